//! Bessel functions of the first kind, zeros and extrema of `J0`, and the
//! standard Gaussian tail.
//!
//! `J_n(x)` for a whole row `n = 0..=n_max` comes from Miller's backward
//! recurrence normalised with `J0 + 2 * sum_k J_{2k} = 1`. Only `n >= 0` is
//! stored; negative orders follow from `J_{-n} = (-1)^n J_n`.

use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest argument for which row accuracy has been validated.
pub const MAX_ARGUMENT: f64 = 100.0;
/// Largest order for which row accuracy has been validated.
pub const MAX_ORDER: usize = 200;

/// Step of the sign-change scan used to bracket zeros.
const SCAN_STEP: f64 = 0.01;
/// Width at which bisection stops.
const BISECTION_TOL: f64 = 1e-12;

const RESCALE_THRESHOLD: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;

/// `J_0(x), ..., J_{n_max}(x)` at one argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselRow {
    x: f64,
    values: Vec<f64>,
}

impl BesselRow {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    /// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
    pub fn signed(&self, n: i64) -> Option<f64> {
        let v = self.get(n.unsigned_abs() as usize)?;
        Some(if n < 0 && n % 2 != 0 { -v } else { v })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn check_domain(x: f64, n_max: usize) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(invalid(format!("Bessel argument must be >= 0, got {x}")));
    }
    if x > MAX_ARGUMENT || n_max > MAX_ORDER {
        return Err(Error::OutOfValidatedDomain {
            x,
            n_max,
            max_x: MAX_ARGUMENT,
            max_n: MAX_ORDER,
        });
    }
    Ok(())
}

/// Computes `J_0(x) ..= J_{n_max}(x)`.
pub fn bessel_j_row(x: f64, n_max: usize) -> Result<BesselRow> {
    let mut values = vec![0.0; n_max + 1];
    bessel_j_fill(x, &mut values)?;
    Ok(BesselRow { x, values })
}

/// Fills `out[n] = J_n(x)` for `n < out.len()` without allocating.
pub fn bessel_j_fill(x: f64, out: &mut [f64]) -> Result<()> {
    if out.is_empty() {
        return Err(invalid("output row must hold at least J_0"));
    }
    check_domain(x, out.len() - 1)?;
    fill_unchecked(x, out);
    Ok(())
}

/// Miller's algorithm. The recurrence starts above `max(n_max, x)` so the
/// dominant solution has decayed before any stored order is reached.
pub(crate) fn fill_unchecked(x: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    out.fill(0.0);
    if x == 0.0 {
        out[0] = 1.0;
        return;
    }

    let m = n_max.max(x.ceil() as usize);
    let start = m + (20.0 + 3.0 * (m as f64).sqrt()).ceil() as usize;
    let two_over_x = 2.0 / x;

    let mut next = 0.0;
    let mut cur = 1.0;
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            even_sum += 2.0 * cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_THRESHOLD {
            cur *= RESCALE_FACTOR;
            next *= RESCALE_FACTOR;
            even_sum *= RESCALE_FACTOR;
            if k <= n_max {
                for v in &mut out[k..] {
                    *v *= RESCALE_FACTOR;
                }
            }
        }
    }
    out[0] = cur;
    let scale = 1.0 / (even_sum + cur);
    for v in out.iter_mut() {
        *v *= scale;
    }
}

pub fn j0(x: f64) -> Result<f64> {
    let mut row = [0.0];
    bessel_j_fill(x, &mut row)?;
    Ok(row[0])
}

pub fn j1(x: f64) -> Result<f64> {
    let mut row = [0.0; 2];
    bessel_j_fill(x, &mut row)?;
    Ok(row[1])
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finds the first `count` sign changes of `f` on a `SCAN_STEP` grid
/// starting at `from`, refining each by bisection.
fn scan_roots(
    f: impl Fn(f64) -> f64 + Copy,
    from: f64,
    count: usize,
    limit: f64,
) -> Result<Vec<f64>> {
    let mut roots = Vec::with_capacity(count);
    let mut i = 0u64;
    let mut prev_x = from;
    let mut prev_v = f(from);
    while roots.len() < count {
        i += 1;
        let x = from + i as f64 * SCAN_STEP;
        if x > limit {
            return Err(Error::OutOfValidatedDomain {
                x,
                n_max: 0,
                max_x: MAX_ARGUMENT,
                max_n: MAX_ORDER,
            });
        }
        let v = f(x);
        if v == 0.0 {
            roots.push(x);
            // step past the exact zero so it is not bracketed again
            i += 1;
            prev_x = from + i as f64 * SCAN_STEP;
            prev_v = f(prev_x);
            continue;
        }
        if (v < 0.0) != (prev_v < 0.0) {
            roots.push(bisect(f, prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }
    Ok(roots)
}

fn j0_unchecked(x: f64) -> f64 {
    let mut row = [0.0];
    fill_unchecked(x, &mut row);
    row[0]
}

fn j1_unchecked(x: f64) -> f64 {
    let mut row = [0.0; 2];
    fill_unchecked(x, &mut row);
    row[1]
}

/// The first `k` positive zeros of `J0`, strictly increasing.
pub fn j0_roots(k: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(invalid("j0_roots needs k >= 1"));
    }
    scan_roots(j0_unchecked, 0.0, k, MAX_ARGUMENT)
}

/// First two positive zeros `(r1, r2)` of `J0`, computed once per process.
pub fn j0_first_zeros() -> (f64, f64) {
    static ZEROS: OnceLock<(f64, f64)> = OnceLock::new();
    *ZEROS.get_or_init(|| {
        let z = j0_roots(2).expect("first two zeros of J0 lie well inside the validated domain");
        (z[0], z[1])
    })
}

/// Location of the first local minimum of `J0`, i.e. the first positive zero of `J1`.
pub fn j0_first_min() -> f64 {
    static MIN: OnceLock<f64> = OnceLock::new();
    *MIN.get_or_init(|| {
        let (r1, r2) = j0_first_zeros();
        let roots = scan_roots(j1_unchecked, r1, 1, r2).expect("J1 changes sign between r1 and r2");
        roots[0]
    })
}

/// `P[xi >= t]` for a standard Gaussian `xi`.
pub fn gaussian_tail(t: f64) -> f64 {
    0.5 * libm::erfc(t / SQRT_2)
}
