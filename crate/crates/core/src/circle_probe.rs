//! The field restricted to a circle: level crossings of the angular process
//! `u(θ) = X0 J0(r) - f(r cos θ, r sin θ)`, the non-vanishing event, and the
//! Kac-Rice mean crossing count.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field_sampler::{eval_at, Point, WaveCoefficients};
use crate::special_functions::{self, bessel_j_fill};

/// Angle tolerance for refining a crossing.
pub const ANGLE_TOL: f64 = 1e-8;

/// Minimum number of equally spaced samples on a circle of radius `r`.
pub fn min_samples(r: f64) -> usize {
    ((64.0 * r).ceil() as usize).max(1)
}

fn check_circle(r: f64, m: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("circle radius must be > 0, got {r}")));
    }
    if m < min_samples(r) {
        return Err(invalid(format!(
            "need at least {} samples on a circle of radius {r}, got {m}",
            min_samples(r)
        )));
    }
    Ok(())
}

/// Precomputed Bessel row and trigonometric tables for tracing many
/// samples on the same origin-centred circle.
#[derive(Debug, Clone)]
pub struct CircleProbe {
    r: f64,
    m: usize,
    n_max: usize,
    row: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl CircleProbe {
    pub fn new(r: f64, m: usize, n_max: usize) -> Result<Self> {
        check_circle(r, m)?;
        let mut row = vec![0.0; n_max + 1];
        bessel_j_fill(r, &mut row)?;
        let mut cos = Vec::with_capacity(m * n_max);
        let mut sin = Vec::with_capacity(m * n_max);
        for k in 0..m {
            let theta = TAU * k as f64 / m as f64;
            for n in 1..=n_max {
                let (s, c) = (n as f64 * theta).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Ok(Self {
            r,
            m,
            n_max,
            row,
            cos,
            sin,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `J_0(r) ..= J_{n_max}(r)`.
    pub fn bessel_row(&self) -> &[f64] {
        &self.row
    }

    pub fn trace<'a>(&self, coeffs: &'a WaveCoefficients) -> Result<CircleTrace<'a>> {
        let n = coeffs.n_trunc();
        if n > self.n_max {
            return Err(invalid(format!(
                "probe tabulated up to order {}, coefficients need {n}",
                self.n_max
            )));
        }
        let a: Vec<f64> = coeffs
            .xs()
            .iter()
            .zip(&self.row[1..])
            .map(|(x, j)| x * j)
            .collect();
        let b: Vec<f64> = coeffs
            .ys()
            .iter()
            .zip(&self.row[1..])
            .map(|(y, j)| y * j)
            .collect();
        let radial = coeffs.x0() * self.row[0];
        let mut values = Vec::with_capacity(self.m);
        let mut u_values = Vec::with_capacity(self.m);
        for k in 0..self.m {
            let cos = &self.cos[k * self.n_max..k * self.n_max + n];
            let sin = &self.sin[k * self.n_max..k * self.n_max + n];
            let mut acc = 0.0;
            for i in 0..n {
                acc += a[i] * cos[i] + b[i] * sin[i];
            }
            let u = SQRT_2 * acc;
            u_values.push(u);
            values.push(radial - u);
        }
        Ok(CircleTrace {
            coeffs,
            center: Point::ORIGIN,
            r: self.r,
            m: self.m,
            values,
            u_values: Some(u_values),
            row: self.row[..=n].to_vec(),
        })
    }
}

/// Field samples at angles `2πk/m` on a circle.
#[derive(Debug, Clone)]
pub struct CircleTrace<'a> {
    coeffs: &'a WaveCoefficients,
    center: Point,
    r: f64,
    m: usize,
    values: Vec<f64>,
    u_values: Option<Vec<f64>>,
    row: Vec<f64>,
}

impl<'a> CircleTrace<'a> {
    pub fn center(&self) -> Point {
        self.center
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `u(θ_k)`, available only for traces centred at the origin.
    pub fn u_values(&self) -> Option<&[f64]> {
        self.u_values.as_deref()
    }

    pub fn coeffs(&self) -> &'a WaveCoefficients {
        self.coeffs
    }

    /// `u(θ)` at an arbitrary angle (origin-centred traces only).
    fn u_at(&self, theta: f64) -> f64 {
        SQRT_2 * self.coeffs.angular_sum(&self.row, theta)
    }
}

/// Traces the field on the circle of radius `r` about `center` at `m` angles.
pub fn trace<'a>(
    coeffs: &'a WaveCoefficients,
    center: Point,
    r: f64,
    m: usize,
) -> Result<CircleTrace<'a>> {
    check_circle(r, m)?;
    if center == Point::ORIGIN {
        return CircleProbe::new(r, m, coeffs.n_trunc())?.trace(coeffs);
    }
    let values = (0..m)
        .map(|k| {
            let p = Point::from_polar(r, TAU * k as f64 / m as f64);
            eval_at(coeffs, Point::new(center.x + p.x, center.y + p.y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CircleTrace {
        coeffs,
        center,
        r,
        m,
        values,
        u_values: None,
        row: Vec::new(),
    })
}

/// Level crossings of `u` found on one trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub level: f64,
    pub count: usize,
    pub refined_angles: Vec<f64>,
    /// Some pair of consecutive crossings is closer than `4π/m`.
    pub suspicious: bool,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Counts crossings of `u(θ) = level` around the whole circle.
///
/// Sign changes are taken between consecutive nonzero samples, wrapping
/// around. A run of exact zeros between opposite signs is one crossing
/// located at the first zero; between equal signs it is a touch and not
/// counted. Other crossings are refined by bisection on the continuous `u`.
pub fn count_crossings(tr: &CircleTrace<'_>, level: f64) -> Result<CrossingReport> {
    let u = tr
        .u_values
        .as_deref()
        .ok_or_else(|| invalid("crossing counts need a trace centred at the origin"))?;
    let m = tr.m;
    let step = TAU / m as f64;
    let g: Vec<i8> = u.iter().map(|&v| sign(v - level)).collect();
    let nonzero: Vec<usize> = (0..m).filter(|&k| g[k] != 0).collect();

    let mut angles = Vec::new();
    if nonzero.len() >= 2 {
        for (idx, &i) in nonzero.iter().enumerate() {
            let j = nonzero[(idx + 1) % nonzero.len()];
            if g[i] == g[j] {
                continue;
            }
            let gap = (j + m - i) % m;
            let angle = if gap > 1 {
                (i + 1) as f64 * step
            } else {
                let lo = i as f64 * step;
                refine(|t| tr.u_at(t) - level, lo, lo + step, g[i])
            };
            angles.push(angle.rem_euclid(TAU));
        }
    }
    angles.sort_by(f64::total_cmp);

    let min_gap = 4.0 * PI / m as f64;
    let suspicious = angles.len() >= 2
        && (0..angles.len()).any(|i| {
            let next = if i + 1 < angles.len() {
                angles[i + 1]
            } else {
                angles[0] + TAU
            };
            next - angles[i] < min_gap
        });

    Ok(CrossingReport {
        level,
        count: angles.len(),
        refined_angles: angles,
        suspicious,
    })
}

fn refine(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, sign_lo: i8) -> f64 {
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        let s = sign(g(mid));
        if s == 0 {
            return mid;
        }
        if s == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `E[#{θ : u(θ) = x0 J0(r)}]` given `X0 = x0`:
/// `(√2 r / α) exp(-x0² J0(r)² / (2α²))` with `α² = 1 - J0(r)²`.
pub fn kac_rice_expected_crossings(r: f64, x0: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("radius must be > 0, got {r}")));
    }
    let j0 = special_functions::j0(r)?;
    let alpha2 = 1.0 - j0 * j0;
    Ok(SQRT_2 * r / alpha2.sqrt() * (-x0 * x0 * j0 * j0 / (2.0 * alpha2)).exp())
}

/// Outcome of [`event_no_zero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NoZeroVerdict {
    pub holds: bool,
    /// The `2m` refinement pass overturned a positive first pass.
    pub flagged: bool,
}

fn one_strict_sign(values: &[f64]) -> bool {
    values.iter().all(|&v| v > 0.0) || values.iter().all(|&v| v < 0.0)
}

/// Whether the field keeps one strict sign on the traced circle, confirmed
/// at `2m` samples. A sign change at `m` samples already proves a zero.
pub fn event_no_zero(tr: &CircleTrace<'_>) -> Result<NoZeroVerdict> {
    if !one_strict_sign(&tr.values) {
        return Ok(NoZeroVerdict {
            holds: false,
            flagged: false,
        });
    }
    let fine = trace(tr.coeffs, tr.center, tr.r, 2 * tr.m)?;
    let holds = one_strict_sign(&fine.values) && sign(fine.values[0]) == sign(tr.values[0]);
    Ok(NoZeroVerdict {
        holds,
        flagged: !holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only_x1() -> WaveCoefficients {
        let mut xs = vec![0.0; 6];
        xs[0] = 1.0;
        WaveCoefficients::new(0.0, xs, vec![0.0; 6], 0).unwrap()
    }

    #[test]
    fn constant_trace_for_single_mode() {
        let c = WaveCoefficients::single_mode(1.0, 6).unwrap();
        let tr = trace(&c, Point::ORIGIN, 2.0, min_samples(2.0)).unwrap();
        let j0 = special_functions::j0(2.0).unwrap();
        assert!(tr.values().iter().all(|v| (v - j0).abs() < 1e-15));
        assert!(tr.u_values().unwrap().iter().all(|&u| u == 0.0));
        let rep = count_crossings(&tr, -1.0).unwrap();
        assert_eq!(rep.count, 0);
        assert!(event_no_zero(&tr).unwrap().holds);
    }

    #[test]
    fn single_fourier_mode_crosses_twice() {
        let c = only_x1();
        let r = 1.5;
        let m = min_samples(r);
        let tr = trace(&c, Point::ORIGIN, r, m).unwrap();
        let j1 = special_functions::j1(r).unwrap();
        for (k, v) in tr.values().iter().enumerate() {
            let expect = -SQRT_2 * j1 * (TAU * k as f64 / m as f64).cos();
            assert!((v - expect).abs() < 1e-14);
        }
        let rep = count_crossings(&tr, 0.0).unwrap();
        assert_eq!(rep.count, 2);
        assert!(!rep.suspicious);
        assert!((rep.refined_angles[0] - PI / 2.0).abs() < 1e-7);
        assert!((rep.refined_angles[1] - 3.0 * PI / 2.0).abs() < 1e-7);
        let v = event_no_zero(&tr).unwrap();
        assert!(!v.holds && !v.flagged);
    }

    #[test]
    fn exact_zero_samples_count_once() {
        // m divisible by 4 puts samples exactly at π/2 and 3π/2; cos(π/2) is not
        // exactly zero in floating point, so the zeros are planted through the level.
        let c = only_x1();
        let tr = trace(&c, Point::ORIGIN, 1.0, 64).unwrap();
        let level = tr.u_values().unwrap()[16];
        let rep = count_crossings(&tr, level).unwrap();
        assert_eq!(rep.count % 2, 0);
        assert!(rep.count <= 2);
    }

    #[test]
    fn rejects_undersampled_and_offcenter_crossings() {
        let c = only_x1();
        assert!(trace(&c, Point::ORIGIN, 2.0, 100).is_err());
        let tr = trace(&c, Point::new(0.5, 0.0), 1.0, 64).unwrap();
        assert!(tr.u_values().is_none());
        assert!(count_crossings(&tr, 0.0).is_err());
    }

    #[test]
    fn off_center_trace_matches_pointwise() {
        let c = crate::field_sampler::draw(3, 20).unwrap();
        let center = Point::new(1.0, -0.5);
        let tr = trace(&c, center, 2.0, 128).unwrap();
        let p = Point::new(center.x + 2.0, center.y);
        assert!((tr.values()[0] - eval_at(&c, p).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn kac_rice_closed_forms() {
        let r = 3.0;
        let alpha = (1.0 - special_functions::j0(r).unwrap().powi(2)).sqrt();
        assert!((kac_rice_expected_crossings(r, 0.0).unwrap() - SQRT_2 * r / alpha).abs() < 1e-14);
        let (r1, _) = special_functions::j0_first_zeros();
        for x0 in [0.0, 1.0, 5.0] {
            let v = kac_rice_expected_crossings(r1, x0).unwrap();
            assert!((v - SQRT_2 * r1).abs() < 1e-9);
        }
        assert!(kac_rice_expected_crossings(0.0, 1.0).is_err());
    }
}
