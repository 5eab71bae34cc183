//! Analytic lower bound on the nodal domain constant.
//!
//! For a circle radius `r` between the first two zeros of `J0` and a
//! threshold `T >= 0`:
//!
//! ```text
//! P[E_r] >= 2Ψ(T) - √2 r Ψ(T / α(r)),          α(r)² = 1 - J0(r)²
//! ν      >= 16 P[E_r] / r² >= (32 / r²) [Ψ(T) - (r / √2) Ψ(T / α(r))]
//! ```
//!
//! `PaperReplication` mode evaluates the second line with the three factors
//! rounded pessimistically to the printed precision (`32/r²` and `T/α` down
//! to three decimals, `r/√2` up to two), which at `(3.8, 3.35)` gives
//! `2.216`, `3.659` and `2.69`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::special_functions::{gaussian_tail, j0, j0_first_zeros};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    Exact,
    PaperReplication,
}

/// The three factors of the final bound, as used by the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundFactors {
    /// `32 / r²`.
    pub area_factor: f64,
    /// `T / α(r)`, the argument of the second tail.
    pub psi_argument: f64,
    /// `r / √2`.
    pub half_perimeter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub j0_r: f64,
    pub psi_t: f64,
    pub psi_scaled: f64,
    pub circle_prob_lb: f64,
    pub nu_lb: f64,
    pub mode: BoundMode,
    pub factors: BoundFactors,
}

/// `√(1 - J0(r)²)`, the standard deviation of `u(θ)` on the radius-`r` circle.
pub fn alpha(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("radius must be > 0, got {r}")));
    }
    let j = j0(r)?;
    Ok((1.0 - j * j).sqrt())
}

/// `2Ψ(T) - √2 r Ψ(T / α(r))`; negative values are returned as is.
pub fn circle_prob_lower_bound(r: f64, t: f64) -> Result<f64> {
    let a = alpha(r)?;
    Ok(2.0 * gaussian_tail(t) - SQRT_2 * r * gaussian_tail(t / a))
}

/// `1 - (r / (√2 α)) exp(-x0² J0(r)² / (2α²))`, the conditional lower bound
/// on `P[E_r | X0 = x0]` whose expectation over `|X0| >= T` gives the circle bound.
pub fn conditional_integrand(r: f64, x0: f64) -> Result<f64> {
    let a = alpha(r)?;
    let j = j0(r)?;
    Ok(1.0 - r / (SQRT_2 * a) * (-x0 * x0 * j * j / (2.0 * a * a)).exp())
}

/// Smallest `T >= 0` with the conditional integrand nonnegative for all `|x0| >= T`.
pub fn threshold_t(r: f64) -> Result<f64> {
    let a = alpha(r)?;
    let j = j0(r)?;
    let ratio = r / (SQRT_2 * a);
    if ratio <= 1.0 {
        return Ok(0.0);
    }
    if j.abs() < 1e-12 {
        return Err(Error::IntegrandNotPositive(r));
    }
    Ok(a / j.abs() * (2.0 * ratio.ln()).sqrt())
}

fn check_admissible(r: f64) -> Result<()> {
    let (r1, r2) = j0_first_zeros();
    if !(r > r1 && r < r2) {
        return Err(Error::RadiusOutsideAdmissible { r, r1, r2 });
    }
    Ok(())
}

fn floor_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).floor() / s
}

fn ceil_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).ceil() / s
}

/// Evaluates the lower bound at `(r, T)`.
pub fn nu_lower_bound(r: f64, t: f64, mode: BoundMode) -> Result<BoundEvaluation> {
    check_admissible(r)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "threshold T must be finite and >= 0, got {t}"
        )));
    }
    let j0_r = j0(r)?;
    let alpha = (1.0 - j0_r * j0_r).sqrt();
    let exact = BoundFactors {
        area_factor: 32.0 / (r * r),
        psi_argument: t / alpha,
        half_perimeter: r / SQRT_2,
    };
    let factors = match mode {
        BoundMode::Exact => exact,
        BoundMode::PaperReplication => BoundFactors {
            area_factor: floor_to(exact.area_factor, 3),
            psi_argument: floor_to(exact.psi_argument, 3),
            half_perimeter: ceil_to(exact.half_perimeter, 2),
        },
    };
    let psi_t = gaussian_tail(t);
    let psi_scaled = gaussian_tail(factors.psi_argument);
    let circle_prob_lb = 2.0 * psi_t - 2.0 * factors.half_perimeter * psi_scaled;
    let nu_lb = factors.area_factor * (psi_t - factors.half_perimeter * psi_scaled);
    Ok(BoundEvaluation {
        r,
        t,
        alpha,
        j0_r,
        psi_t,
        psi_scaled,
        circle_prob_lb,
        nu_lb,
        mode,
        factors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub r_star: f64,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub best: BoundEvaluation,
}

const COARSE_STEP: f64 = 1e-3;
const T_WINDOW: f64 = 3.0;
const REFINEMENT_ROUNDS: usize = 2;

#[derive(Clone, Copy)]
struct Candidate {
    nu: f64,
    r: f64,
    t: f64,
}

impl Candidate {
    /// Lexicographic on `(nu, -r, -t)`.
    fn beats(&self, other: &Candidate) -> bool {
        if self.nu != other.nu {
            return self.nu > other.nu;
        }
        if self.r != other.r {
            return self.r < other.r;
        }
        self.t < other.t
    }
}

/// Per-radius constants of the exact objective.
struct Radius {
    r: f64,
    inv_alpha: f64,
    area: f64,
    half_perimeter: f64,
    threshold: f64,
}

impl Radius {
    fn new(r: f64) -> Result<Self> {
        let a = alpha(r)?;
        Ok(Self {
            r,
            inv_alpha: 1.0 / a,
            area: 32.0 / (r * r),
            half_perimeter: r / SQRT_2,
            threshold: threshold_t(r)?,
        })
    }

    fn nu(&self, t: f64) -> f64 {
        self.area * (gaussian_tail(t) - self.half_perimeter * gaussian_tail(t * self.inv_alpha))
    }

    fn scan(&self, t_lo: f64, t_hi: f64, step: f64, best: &mut Candidate) {
        let n = ((t_hi - t_lo) / step + 1e-9).floor() as usize;
        for j in 0..=n {
            let t = t_lo + j as f64 * step;
            let c = Candidate {
                nu: self.nu(t),
                r: self.r,
                t,
            };
            if c.beats(best) {
                *best = c;
            }
        }
    }
}

/// Maximises the exact bound over `r` in the admissible interval and
/// `T >= threshold_t(r)` by a grid scan with two rounds of 10x local refinement.
pub fn optimize() -> Result<Optimum> {
    let (r1, r2) = j0_first_zeros();
    let mut best = Candidate {
        nu: f64::NEG_INFINITY,
        r: f64::INFINITY,
        t: f64::INFINITY,
    };

    let lo = r1 + COARSE_STEP;
    let hi = r2 - COARSE_STEP;
    let n = ((hi - lo) / COARSE_STEP).floor() as usize;
    for i in 0..=n {
        let rad = Radius::new(lo + i as f64 * COARSE_STEP)?;
        rad.scan(
            rad.threshold,
            rad.threshold + T_WINDOW,
            COARSE_STEP,
            &mut best,
        );
    }

    let mut prev_step = COARSE_STEP;
    for _ in 0..REFINEMENT_ROUNDS {
        let step = prev_step / 10.0;
        let center = best;
        for i in -10i32..=10 {
            let r = center.r + i as f64 * step;
            if !(r > r1 && r < r2) {
                continue;
            }
            let rad = Radius::new(r)?;
            let t_lo = rad.threshold.max(center.t - prev_step);
            rad.scan(t_lo, center.t + prev_step, step, &mut best);
            rad.scan(rad.threshold, rad.threshold, step, &mut best);
        }
        prev_step = step;
    }

    Ok(Optimum {
        r_star: best.r,
        t_star: best.t,
        best: nu_lower_bound(best.r, best.t, BoundMode::Exact)?,
    })
}
