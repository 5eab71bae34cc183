//! Exit criteria at full size. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing the test harness capture) and then asserts.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nodal_core::bound_engine::{circle_prob_lower_bound, threshold_t};
use nodal_core::field_sampler::truncation_order;
use nodal_core::nodal_counter::{label, NuEstimate, SignGrid};
use nodal_core::special_functions::bessel_j_row;
use nodal_core::verifier::{
    circle_bound_report, estimate_circle_event, gr_estimator_report, verify_helmholtz,
    verify_kac_rice, verify_lemma2, CircleEventEstimate, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 7;
const R: f64 = 3.8;
const CIRCLE_SAMPLES: u64 = 100_000;

fn report(criterion: u32, title: &str, ok: bool, detail: &str) {
    let line = format!(
        "acceptance {criterion:>2} {}: {title}: {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn nodal(args: &[&str]) -> (Value, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_nodal")).args(args).output().unwrap();
    let elapsed = start.elapsed();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (serde_json::from_slice(&out.stdout).unwrap(), elapsed)
}

fn count_run(radius: f64, h: f64, samples: u64) -> NuEstimate {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("count.ndjson");
    let out = Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args([
            "--seed",
            &SEED.to_string(),
            "--output",
            path.to_str().unwrap(),
            "count",
            "--R",
            &radius.to_string(),
            "--h",
            &h.to_string(),
            "--samples",
            &samples.to_string(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    serde_json::from_value(last["estimate"].clone()).unwrap()
}

fn nu_desk_scale() -> &'static NuEstimate {
    static NU: OnceLock<NuEstimate> = OnceLock::new();
    NU.get_or_init(|| count_run(50.0, 0.05, 200))
}

fn circle_event() -> &'static CircleEventEstimate {
    static EST: OnceLock<CircleEventEstimate> = OnceLock::new();
    EST.get_or_init(|| estimate_circle_event(R, CIRCLE_SAMPLES, SEED).unwrap())
}

#[test]
fn criterion_01_printed_bound_replicated() {
    let (paper, t_paper) = nodal(&["bound", "--r", "3.8", "--T", "3.35", "--mode", "paper"]);
    let (exact, t_exact) = nodal(&["bound", "--r", "3.8", "--T", "3.35", "--mode", "exact"]);
    let p = &paper["result"];
    let e = &exact["result"];
    let (p_nu, e_nu) = (p["nu_lb"].as_f64().unwrap(), e["nu_lb"].as_f64().unwrap());
    let factors_ok = p["factors"]["area_factor"] == 2.216
        && p["factors"]["psi_argument"] == 3.659
        && p["factors"]["half_perimeter"] == 2.69;
    let runtime = t_paper.max(t_exact);
    let ok = factors_ok
        && p_nu >= 1.39e-4
        && (1.39e-4..=1.6e-4).contains(&e_nu)
        && e_nu >= p_nu
        && runtime < Duration::from_secs(1);
    report(
        1,
        "printed bound replication",
        ok,
        &format!("rounded {p_nu:.6e}, exact {e_nu:.6e}, factors match {factors_ok}, {runtime:.2?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_optimizer_dominates() {
    let (a, t) = nodal(&["bound", "--optimize"]);
    let (b, _) = nodal(&["bound", "--optimize"]);
    let (exact, _) = nodal(&["bound", "--r", "3.8", "--T", "3.35"]);
    let best = a["result"]["best"]["nu_lb"].as_f64().unwrap();
    let at_chosen = exact["result"]["nu_lb"].as_f64().unwrap();
    let ok = a == b && best >= at_chosen && best >= 1.39e-4 && t < Duration::from_secs(60);
    report(
        2,
        "optimizer dominance",
        ok,
        &format!(
            "best {best:.6e} at r = {}, T = {} vs {at_chosen:.6e}, deterministic {}, {t:.2?}",
            a["result"]["r_star"], a["result"]["T_star"], a == b
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_03_bessel_identities() {
    let (mut e1, mut e2, mut eg) = (0.0f64, 0.0f64, 0.0f64);
    for k in 1..=20 {
        let x = k as f64 * 0.5;
        let n = truncation_order(x, 1e-12).unwrap();
        let v = bessel_j_row(x, n).unwrap().into_values();
        let s1 = v[0] * v[0] + 2.0 * v[1..].iter().map(|j| j * j).sum::<f64>();
        let s2 = 2.0 * v.iter().enumerate().map(|(i, j)| (i * i) as f64 * j * j).sum::<f64>();
        e1 = e1.max((s1 - 1.0).abs());
        e2 = e2.max((s2 - x * x / 2.0).abs());

        // amplitude error is the square root of the discarded variance
        let ng = truncation_order(x, 1e-20).unwrap();
        let row = bessel_j_row(x, ng).unwrap();
        for q in 0..16 {
            let th = TAU * q as f64 / 16.0;
            let (mut re, mut im) = (0.0, 0.0);
            for m in -(ng as i64)..=(ng as i64) {
                let j = row.signed(m).unwrap();
                re += j * (m as f64 * th).cos();
                im += j * (m as f64 * th).sin();
            }
            let z = x * th.sin();
            eg = eg.max((re - z.cos()).hypot(im - z.sin()));
        }
    }
    let ok = e1 < 1e-10 && e2 < 1e-8 && eg < 1e-8;
    report(
        3,
        "Bessel identities",
        ok,
        &format!("sum J^2 {e1:.1e}, sum n^2 J^2 {e2:.1e}, generating function {eg:.1e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_kac_rice_agreement() {
    let mut all = true;
    let mut parts = Vec::new();
    for r in [3.0, 3.8, 4.5] {
        for rep in verify_kac_rice(r, &[0.0, 1.0, 2.0], CIRCLE_SAMPLES, SEED).unwrap() {
            let z = (rep.statistic - rep.target) / rep.stderr;
            all &= rep.verdict == Verdict::Pass;
            parts.push(format!("({r}, {}) z = {z:+.2}", rep.details["x0"]));
        }
    }
    report(4, "Kac-Rice agreement", all, &parts.join(", "));
    assert!(all);
}

#[test]
fn criterion_05_circle_bound_consistency() {
    let est = circle_event();
    let mut all = true;
    let mut parts = vec![format!("P[E_r] = {:.4e} +- {:.1e}", est.p_hat, est.stderr)];
    for t in [3.35, threshold_t(R).unwrap()] {
        let rep = circle_bound_report(est, t).unwrap();
        all &= rep.verdict == Verdict::Pass;
        parts.push(format!("T = {t:.4}: bound {:.4e}", circle_prob_lower_bound(R, t).unwrap()));
    }
    report(5, "circle bound consistency", all, &parts.join(", "));
    assert!(all);
}

#[test]
fn criterion_06_containment() {
    let rep = verify_lemma2(R, 2_000_000, SEED).unwrap();
    let triggers = rep.details["triggers"].as_u64().unwrap();
    let circle = rep.details["circle_violations"].as_u64().unwrap();
    let escape = rep.details["escape_violations"].as_u64().unwrap();
    let ok = triggers >= 10_000 && circle == 0 && escape == 0 && rep.verdict == Verdict::Pass;
    report(
        6,
        "containment",
        ok,
        &format!(
            "{triggers} triggers, {circle} circle and {escape} flood-fill violations, max radius ratio {}",
            rep.details["max_component_radius_over_r"]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_nodal_constant_estimate() {
    let nu = nu_desk_scale();
    let in_window = (0.055..=0.062).contains(&nu.nu_hat) && nu.stderr.is_finite() && nu.stderr > 0.0;
    let coarse = count_run(30.0, 0.05, 200);
    let fine = count_run(30.0, 0.025, 200);
    let combined = coarse.stderr.hypot(fine.stderr);
    let stable = (coarse.nu_hat - fine.nu_hat).abs() < 2.0 * combined;
    let ok = in_window && stable;
    report(
        7,
        "nodal constant estimate",
        ok,
        &format!(
            "R = 50: nu_hat {:.5} +- {:.5} (window [0.055, 0.062]: {}); R = 30: h {:.5} vs h/2 {:.5} (within 2 se: {stable})",
            nu.nu_hat,
            nu.stderr,
            if in_window { "in" } else { "out" },
            coarse.nu_hat,
            fine.nu_hat
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_estimator_ordering() {
    let rep = gr_estimator_report(circle_event(), nu_desk_scale());
    let ok = rep.verdict == Verdict::Pass;
    report(
        8,
        "estimator ordering",
        ok,
        &format!("16 P/r^2 = {:.5} vs nu_hat {:.5} (3 se = {:.5})", rep.statistic, rep.target, 3.0 * rep.stderr),
    );
    assert!(ok);
}

fn flood_fill(rows: usize, cols: usize, pos: &[bool]) -> Vec<usize> {
    let mut out = vec![usize::MAX; rows * cols];
    let mut next = 0;
    for start in 0..rows * cols {
        if out[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        out[start] = next;
        while let Some(i) = stack.pop() {
            let (r, c) = (i / cols, i % cols);
            let mut push = |j: usize| {
                if out[j] == usize::MAX && pos[j] == pos[i] {
                    out[j] = next;
                    stack.push(j);
                }
            };
            if r > 0 {
                push(i - cols);
            }
            if r + 1 < rows {
                push(i + cols);
            }
            if c > 0 {
                push(i - 1);
            }
            if c + 1 < cols {
                push(i + 1);
            }
        }
        next += 1;
    }
    out
}

#[test]
fn criterion_09_labeling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut identical = 0;
    for _ in 0..100 {
        let p = rng.random_range(0.3..0.7);
        let signs: Vec<bool> = (0..64 * 64).map(|_| rng.random_bool(p)).collect();
        let l = label(&SignGrid::from_signs(64, 64, signs.clone()).unwrap());
        let oracle = flood_fill(64, 64, &signs);
        let (mut ab, mut ba) = (HashMap::new(), HashMap::new());
        let same = l
            .labels()
            .iter()
            .zip(&oracle)
            .all(|(&a, &b)| *ab.entry(a).or_insert(b) == b && *ba.entry(b).or_insert(a) == a);
        identical += same as u32;
    }
    let ok = identical == 100;
    report(9, "labeling oracle", ok, &format!("{identical} / 100 partitions identical"));
    assert!(ok);
}

#[test]
fn criterion_10_helmholtz_residual() {
    let rep = verify_helmholtz(0.05, 10, SEED).unwrap();
    let ok = rep.verdict == Verdict::Pass;
    report(
        10,
        "Helmholtz residual",
        ok,
        &format!(
            "ratio min {} max {} mean {:.3} over {} samples",
            rep.details["min_ratio"], rep.details["max_ratio"], rep.statistic, rep.n_samples
        ),
    );
    assert!(ok);
}
