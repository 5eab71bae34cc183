//! Monte Carlo and deterministic checks of the statements behind the bound.
//!
//! Every report is a pure function of its name, seed and sample count: sample
//! `i` always uses [`sample_seed`]`(seed, i)`, and reductions are sums of
//! per-sample integers or ordered float sums, so thread count does not matter.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bound_engine::{circle_prob_lower_bound, threshold_t};
use crate::circle_probe::{
    count_crossings, event_no_zero, kac_rice_expected_crossings, min_samples, CircleProbe,
};
use crate::error::{invalid, Error, Result};
use crate::field_sampler::{
    draw, eval_at, eval_raster, sample_seed, truncation_order, GridSpec, Point,
    DEFAULT_TRUNCATION_EPS,
};
use crate::nodal_counter::{flood_fill_component, NuEstimate, SignGrid};
use crate::special_functions::{j0, j0_first_zeros};

/// Width of every acceptance band, in standard errors.
pub const SIGMAS: f64 = 3.0;
/// Grid step of the containment raster.
pub const LEMMA2_GRID_STEP: f64 = 0.02;
/// Fewer triggering samples than this make the containment check inconclusive.
pub const LEMMA2_MIN_TRIGGERS: u64 = 100;
/// Accepted range of the Helmholtz residual ratio between `h` and `h/2`.
pub const HELMHOLTZ_RATIO_RANGE: (f64, f64) = (3.5, 4.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// How a statistic is compared with its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `|statistic - target| <= 3 stderr`.
    TwoSided,
    /// `statistic >= target - 3 stderr`.
    AtLeast,
    /// `statistic <= target + 3 stderr`.
    AtMost,
}

impl Check {
    pub fn judge(self, statistic: f64, target: f64, stderr: f64) -> Verdict {
        let ok = match self {
            Check::TwoSided => (statistic - target).abs() <= SIGMAS * stderr,
            Check::AtLeast => statistic >= target - SIGMAS * stderr,
            Check::AtMost => statistic <= target + SIGMAS * stderr,
        };
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub n_samples: u64,
    pub statistic: f64,
    pub target: f64,
    pub stderr: f64,
    pub verdict: Verdict,
    pub details: BTreeMap<String, Value>,
}

impl VerificationReport {
    fn judged(
        name: impl Into<String>,
        n_samples: u64,
        statistic: f64,
        target: f64,
        stderr: f64,
        check: Check,
    ) -> Self {
        let mut details = BTreeMap::new();
        details.insert("check".into(), json!(check));
        Self {
            name: name.into(),
            n_samples,
            statistic,
            target,
            stderr,
            verdict: check.judge(statistic, target, stderr),
            details,
        }
    }

    fn detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of `P[E_r]`, the probability that the field has no
/// zero on the radius-`r` circle about the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleEventEstimate {
    pub r: f64,
    pub seed: u64,
    pub n_samples: u64,
    pub hits: u64,
    /// Samples whose first pass said "no zero" and whose `2m` pass disagreed.
    pub flagged: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

pub fn estimate_circle_event(r: f64, n_samples: u64, seed: u64) -> Result<CircleEventEstimate> {
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let n_trunc = truncation_order(r, DEFAULT_TRUNCATION_EPS)?;
    let probe = CircleProbe::new(r, min_samples(r), n_trunc)?;
    let (hits, flagged) = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(u64, u64)> {
            let coeffs = draw(sample_seed(seed, i), n_trunc)?;
            let v = event_no_zero(&probe.trace(&coeffs)?)?;
            Ok((v.holds as u64, v.flagged as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let n = n_samples as f64;
    let p_hat = hits as f64 / n;
    Ok(CircleEventEstimate {
        r,
        seed,
        n_samples,
        hits,
        flagged,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
    })
}

/// One-sided check of the circle-probability lower bound against an existing estimate.
pub fn circle_bound_report(est: &CircleEventEstimate, t: f64) -> Result<VerificationReport> {
    let bound = circle_prob_lower_bound(est.r, t)?;
    Ok(VerificationReport::judged(
        "circle-bound",
        est.n_samples,
        est.p_hat,
        bound,
        est.stderr,
        Check::AtLeast,
    )
    .detail("r", json!(est.r))
    .detail("T", json!(t))
    .detail("seed", json!(est.seed))
    .detail("hits", json!(est.hits))
    .detail("flagged", json!(est.flagged)))
}

/// Empirical `P[E_r]` must not fall more than 3σ below `2Ψ(T) - √2 r Ψ(T/α)`.
pub fn verify_circle_bound(
    r: f64,
    t: f64,
    n_samples: u64,
    seed: u64,
) -> Result<VerificationReport> {
    circle_bound_report(&estimate_circle_event(r, n_samples, seed)?, t)
}

/// `16 P[0 ∈ G_r] / r²` must not exceed the nodal count estimate by more than
/// 3 combined standard errors.
pub fn gr_estimator_report(est: &CircleEventEstimate, nu: &NuEstimate) -> VerificationReport {
    let scale = 16.0 / (est.r * est.r);
    let statistic = scale * est.p_hat;
    let stderr = ((scale * est.stderr).powi(2) + nu.stderr.powi(2)).sqrt();
    let mut report = VerificationReport::judged(
        "gr-estimator",
        est.n_samples,
        statistic,
        nu.nu_hat,
        stderr,
        Check::AtMost,
    )
    .detail("r", json!(est.r))
    .detail("seed", json!(est.seed))
    .detail("p_hat", json!(est.p_hat))
    .detail("nu_hat", json!(nu.nu_hat))
    .detail("nu_stderr", json!(nu.stderr))
    .detail("nu_samples", json!(nu.n_samples))
    .detail("nu_R", json!(nu.radius))
    .detail("nu_h", json!(nu.h));
    if est.n_samples < 2 || nu.n_samples < 2 {
        report.verdict = Verdict::Inconclusive;
    }
    report
}

pub fn verify_gr_estimator(
    r: f64,
    n_samples: u64,
    seed: u64,
    nu: &NuEstimate,
) -> Result<VerificationReport> {
    Ok(gr_estimator_report(
        &estimate_circle_event(r, n_samples, seed)?,
        nu,
    ))
}

/// Conditioned crossing counts of `u` at level `x0 J0(r)` against the Kac-Rice
/// mean, one two-sided report per `x0`. All levels share the same draws.
pub fn verify_kac_rice(
    r: f64,
    x0_list: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    if n_samples < 2 {
        return Err(invalid("Kac-Rice check needs at least 2 samples"));
    }
    let j0_r = j0(r)?;
    let levels: Vec<f64> = x0_list.iter().map(|x0| x0 * j0_r).collect();
    let n_trunc = truncation_order(r, DEFAULT_TRUNCATION_EPS)?;
    let probe = CircleProbe::new(r, min_samples(r), n_trunc)?;

    let per_sample: Vec<Vec<(usize, bool)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, bool)>> {
            let coeffs = draw(sample_seed(seed, i), n_trunc)?;
            let tr = probe.trace(&coeffs)?;
            levels
                .iter()
                .map(|&level| count_crossings(&tr, level).map(|c| (c.count, c.suspicious)))
                .collect()
        })
        .collect::<Result<_>>()?;

    x0_list
        .iter()
        .enumerate()
        .map(|(k, &x0)| {
            let counts: Vec<f64> = per_sample.iter().map(|s| s[k].0 as f64).collect();
            let suspicious = per_sample.iter().filter(|s| s[k].1).count();
            let any = per_sample.iter().filter(|s| s[k].0 > 0).count();
            let odd = per_sample.iter().filter(|s| s[k].0 % 2 == 1).count();
            let (mean, stderr) = mean_and_stderr(&counts);
            let target = kac_rice_expected_crossings(r, x0)?;
            Ok(VerificationReport::judged(
                "kac-rice",
                n_samples,
                mean,
                target,
                stderr,
                Check::TwoSided,
            )
            .detail("r", json!(r))
            .detail("x0", json!(x0))
            .detail("seed", json!(seed))
            .detail("suspicious", json!(suspicious))
            .detail("odd_counts", json!(odd))
            .detail("p_any_crossing", json!(any as f64 / n_samples as f64)))
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct ContainmentTally {
    triggers: u64,
    flagged: u64,
    circle_violations: u64,
    escape_violations: u64,
    violations: u64,
    max_radius_ratio: f64,
    sum_radius_ratio: f64,
}

impl ContainmentTally {
    fn merge(self, o: Self) -> Self {
        Self {
            triggers: self.triggers + o.triggers,
            flagged: self.flagged + o.flagged,
            circle_violations: self.circle_violations + o.circle_violations,
            escape_violations: self.escape_violations + o.escape_violations,
            violations: self.violations + o.violations,
            max_radius_ratio: self.max_radius_ratio.max(o.max_radius_ratio),
            sum_radius_ratio: self.sum_radius_ratio + o.sum_radius_ratio,
        }
    }
}

/// Containment of the nodal domain of the origin in `B(0, r)` whenever the
/// field has no zero on the radius-`r` circle.
///
/// Samples with `f(0) < 0` are negated so the origin is always positive. A
/// violation is either a nonnegative circle sample, or a raster node at
/// distance `>= r` in the 4-connected positive component of the origin.
pub fn verify_lemma2(r: f64, n_samples: u64, seed: u64) -> Result<VerificationReport> {
    let (r1, r2) = j0_first_zeros();
    if !(r > r1 && r < r2) {
        return Err(Error::RadiusOutsideAdmissible { r, r1, r2 });
    }
    let grid = GridSpec::centered(LEMMA2_GRID_STEP, r + 1.0)?;
    let n_trunc = truncation_order(grid.max_radius(), DEFAULT_TRUNCATION_EPS)?;
    let probe = CircleProbe::new(r, min_samples(r), n_trunc)?;
    let center = grid.half_nodes();
    let h = grid.h();

    let tally = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<ContainmentTally> {
            let mut coeffs = draw(sample_seed(seed, i), n_trunc)?;
            let verdict = event_no_zero(&probe.trace(&coeffs)?)?;
            let mut t = ContainmentTally {
                flagged: verdict.flagged as u64,
                ..Default::default()
            };
            if !verdict.holds || coeffs.x0() == 0.0 {
                return Ok(t);
            }
            if coeffs.x0() < 0.0 {
                coeffs = coeffs.negated();
            }
            t.triggers = 1;
            let tr = probe.trace(&coeffs)?;
            let circle_bad = tr.values().iter().any(|&v| v >= 0.0);

            let raster = eval_raster(&coeffs, &grid)?;
            let signs = SignGrid::from_raster(&raster);
            let component = flood_fill_component(&signs, center, center);
            let side = signs.cols();
            let far = component
                .iter()
                .map(|&idx| {
                    let dy = (idx / side) as f64 - center as f64;
                    let dx = (idx % side) as f64 - center as f64;
                    dx.hypot(dy) * h
                })
                .fold(0.0, f64::max);
            let escape_bad = far >= r;

            t.circle_violations = circle_bad as u64;
            t.escape_violations = escape_bad as u64;
            t.violations = (circle_bad || escape_bad) as u64;
            t.max_radius_ratio = far / r;
            t.sum_radius_ratio = far / r;
            Ok(t)
        })
        .try_reduce(ContainmentTally::default, |a, b| Ok(a.merge(b)))?;

    let mut report = VerificationReport::judged(
        "lemma2",
        n_samples,
        tally.violations as f64,
        0.0,
        0.0,
        Check::AtMost,
    )
    .detail("r", json!(r))
    .detail("seed", json!(seed))
    .detail("h", json!(h))
    .detail("half_extent", json!(grid.half_extent()))
    .detail("triggers", json!(tally.triggers))
    .detail("flagged", json!(tally.flagged))
    .detail("circle_violations", json!(tally.circle_violations))
    .detail("escape_violations", json!(tally.escape_violations))
    .detail("max_component_radius_over_r", json!(tally.max_radius_ratio))
    .detail(
        "mean_component_radius_over_r",
        json!(if tally.triggers > 0 {
            tally.sum_radius_ratio / tally.triggers as f64
        } else {
            0.0
        }),
    );
    if tally.triggers < LEMMA2_MIN_TRIGGERS && report.verdict == Verdict::Pass {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}

/// Empirical `E[f(x) f(y)]` for `|x - y| = d` against `J0(d)`; the pair is
/// placed at `x = anchor` along direction `phi`.
pub fn verify_covariance(
    d: f64,
    anchor: Point,
    phi: f64,
    n_samples: u64,
    seed: u64,
) -> Result<VerificationReport> {
    if n_samples < 2 {
        return Err(invalid("covariance check needs at least 2 samples"));
    }
    let target = crate::field_sampler::covariance(d)?;
    let y = Point::new(anchor.x + d * phi.cos(), anchor.y + d * phi.sin());
    let n_trunc = truncation_order(anchor.norm().max(y.norm()).max(0.1), DEFAULT_TRUNCATION_EPS)?;
    let products: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let c = draw(sample_seed(seed, i), n_trunc)?;
            Ok(eval_at(&c, anchor)? * eval_at(&c, y)?)
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_and_stderr(&products);
    Ok(VerificationReport::judged(
        "covariance",
        n_samples,
        mean,
        target,
        stderr,
        Check::TwoSided,
    )
    .detail("d", json!(d))
    .detail("anchor", json!([anchor.x, anchor.y]))
    .detail("phi", json!(phi))
    .detail("seed", json!(seed)))
}

/// Root-mean-square of the 5-point `Δ_h f + f` over the nodes shared by the
/// grids of step `h` and `h/2` on `[-half_extent, half_extent]²`.
pub fn helmholtz_residual_ratio(
    coeffs: &crate::field_sampler::WaveCoefficients,
    h: f64,
    half_extent: f64,
) -> Result<(f64, f64)> {
    let coarse = eval_raster(coeffs, &GridSpec::centered(h, half_extent)?)?;
    let fine = eval_raster(coeffs, &GridSpec::centered(h / 2.0, half_extent)?)?;
    let (pc, pf) = (coarse.grid().half_nodes(), fine.grid().half_nodes());
    if pf != 2 * pc {
        return Err(invalid("half_extent must be a multiple of h"));
    }

    let residual = |raster: &crate::field_sampler::FieldRaster,
                    row: usize,
                    col: usize,
                    off: usize,
                    step: f64| {
        let c = raster.get(row, col);
        let lap = raster.get(row + off, col)
            + raster.get(row - off, col)
            + raster.get(row, col + off)
            + raster.get(row, col - off)
            - 4.0 * c;
        lap / (step * step) + c
    };
    let (mut sum_c, mut sum_f, mut n) = (0.0, 0.0, 0usize);
    for i in 1..2 * pc {
        for j in 1..2 * pc {
            let rc = residual(&coarse, i, j, 1, h);
            let rf = residual(&fine, 2 * i, 2 * j, 1, h / 2.0);
            sum_c += rc * rc;
            sum_f += rf * rf;
            n += 1;
        }
    }
    Ok(((sum_c / n as f64).sqrt(), (sum_f / n as f64).sqrt()))
}

/// Second-order convergence of the discrete Helmholtz residual on `n_samples` fields.
pub fn verify_helmholtz(h: f64, n_samples: u64, seed: u64) -> Result<VerificationReport> {
    const HALF_EXTENT: f64 = 2.0;
    let n_trunc = truncation_order(
        HALF_EXTENT * std::f64::consts::SQRT_2,
        DEFAULT_TRUNCATION_EPS,
    )?;
    let ratios: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let c = draw(sample_seed(seed, i), n_trunc)?;
            let (rc, rf) = helmholtz_residual_ratio(&c, h, HALF_EXTENT)?;
            Ok(rc / rf)
        })
        .collect::<Result<_>>()?;
    let (lo, hi) = HELMHOLTZ_RATIO_RANGE;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let verdict = if ratios.is_empty() {
        Verdict::Inconclusive
    } else if min >= lo && max <= hi {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut details = BTreeMap::new();
    details.insert("check".into(), json!("range"));
    details.insert("range".into(), json!([lo, hi]));
    details.insert("h".into(), json!(h));
    details.insert("seed".into(), json!(seed));
    details.insert("min_ratio".into(), json!(min));
    details.insert("max_ratio".into(), json!(max));
    Ok(VerificationReport {
        name: "helmholtz".into(),
        n_samples,
        statistic: mean,
        target: 4.0,
        stderr: 0.0,
        verdict,
        details,
    })
}

/// Named groups of checks runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Full,
    Lemma2,
    KacRice,
    CircleBound,
    Gr,
    Covariance,
    Helmholtz,
}

/// Sizes and parameters of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub r: f64,
    /// Thresholds for the circle-bound check; `None` entries mean `threshold_t(r)`.
    pub thresholds: Vec<Option<f64>>,
    pub kac_rice_radii: Vec<f64>,
    pub kac_rice_levels: Vec<f64>,
    pub circle_samples: u64,
    pub lemma2_samples: u64,
    pub covariance_samples: u64,
    pub helmholtz_samples: u64,
    pub helmholtz_h: f64,
    #[serde(rename = "nu_R")]
    pub nu_radius: f64,
    pub nu_h: f64,
    pub nu_samples: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            r: 3.8,
            thresholds: vec![Some(3.35), None],
            kac_rice_radii: vec![3.0, 3.8, 4.5],
            kac_rice_levels: vec![0.0, 1.0, 2.0],
            circle_samples: 100_000,
            lemma2_samples: 2_000_000,
            covariance_samples: 100_000,
            helmholtz_samples: 10,
            helmholtz_h: 0.05,
            nu_radius: 50.0,
            nu_h: 0.05,
            nu_samples: 200,
        }
    }
}

/// Runs a suite; `on_report` sees each report as soon as it is ready.
pub fn run_suite(
    suite: Suite,
    cfg: &SuiteConfig,
    mut on_report: impl FnMut(&VerificationReport),
) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let mut push = |r: VerificationReport, out: &mut Vec<VerificationReport>| {
        on_report(&r);
        out.push(r);
    };
    let wants = |s: Suite| suite == Suite::Full || suite == s;

    if wants(Suite::Covariance) {
        for (anchor, phi) in [(Point::new(0.5, 1.0), 0.9), (Point::new(-1.5, 0.2), 2.4)] {
            push(
                verify_covariance(1.0, anchor, phi, cfg.covariance_samples, cfg.seed)?,
                &mut out,
            );
        }
    }
    if wants(Suite::Helmholtz) {
        push(
            verify_helmholtz(cfg.helmholtz_h, cfg.helmholtz_samples, cfg.seed)?,
            &mut out,
        );
    }
    if wants(Suite::KacRice) {
        for &r in &cfg.kac_rice_radii {
            for rep in verify_kac_rice(r, &cfg.kac_rice_levels, cfg.circle_samples, cfg.seed)? {
                push(rep, &mut out);
            }
        }
    }
    let mut event = None;
    if wants(Suite::CircleBound) || wants(Suite::Gr) {
        event = Some(estimate_circle_event(cfg.r, cfg.circle_samples, cfg.seed)?);
    }
    if wants(Suite::CircleBound) {
        let est = event.as_ref().expect("estimated above");
        for t in &cfg.thresholds {
            let t = match t {
                Some(t) => *t,
                None => threshold_t(cfg.r)?,
            };
            push(circle_bound_report(est, t)?, &mut out);
        }
    }
    if wants(Suite::Lemma2) {
        push(
            verify_lemma2(cfg.r, cfg.lemma2_samples, cfg.seed)?,
            &mut out,
        );
    }
    if wants(Suite::Gr) {
        let censuses = crate::nodal_counter::count_ensemble(
            cfg.seed,
            0..cfg.nu_samples,
            cfg.nu_radius,
            cfg.nu_h,
            DEFAULT_TRUNCATION_EPS,
        )?;
        let nu = crate::nodal_counter::estimate_nu(&censuses)?;
        push(
            gr_estimator_report(event.as_ref().expect("estimated above"), &nu),
            &mut out,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(Check::TwoSided.judge(1.0, 1.2, 0.1), Verdict::Pass);
        assert_eq!(Check::TwoSided.judge(1.0, 1.4, 0.1), Verdict::Fail);
        assert_eq!(Check::AtLeast.judge(1.0, 1.25, 0.1), Verdict::Pass);
        assert_eq!(Check::AtLeast.judge(1.0, 1.35, 0.1), Verdict::Fail);
        assert_eq!(Check::AtMost.judge(1.0, 0.75, 0.1), Verdict::Pass);
        assert_eq!(Check::AtMost.judge(0.0, 0.0, 0.0), Verdict::Pass);
        assert_eq!(Check::AtMost.judge(1.0, 0.0, 0.0), Verdict::Fail);
    }

    #[test]
    fn lemma2_refuses_radius_below_first_zero() {
        let (r1, _) = j0_first_zeros();
        assert!(matches!(
            verify_lemma2(r1 - 1e-3, 10, 1),
            Err(Error::RadiusOutsideAdmissible { .. })
        ));
    }

    #[test]
    fn single_sample_gr_is_inconclusive() {
        let est = estimate_circle_event(3.8, 1, 3).unwrap();
        let nu = NuEstimate {
            nu_hat: 0.05,
            stderr: 0.001,
            n_samples: 200,
            radius: 50.0,
            h: 0.05,
            mean_inside: 31.25,
            std_inside: 4.0,
        };
        assert_eq!(
            gr_estimator_report(&est, &nu).verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn vacuous_circle_bounds_pass() {
        let est = estimate_circle_event(3.8, 2000, 5).unwrap();
        let at_zero = circle_bound_report(&est, 0.0).unwrap();
        assert!(at_zero.target < 0.0);
        assert!(at_zero.passed());
        let huge = circle_bound_report(&est, 30.0).unwrap();
        assert!(huge.target.abs() < 1e-100);
        assert!(huge.passed());
    }
}
