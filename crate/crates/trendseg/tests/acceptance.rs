// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end acceptance checks. Each test writes one PASS/FAIL line to
//! stderr (bypassing output capture) and then asserts.

use std::io::Write;
use std::num::NonZeroUsize;
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trendseg::simlab::*;
use trendseg_core::postprocess::stage2;
use trendseg_core::reconstruct::{materialize_basis, tguw_inverse, DEFAULT_BASIS_CAP};
use trendseg_core::shrink::{mad_sigma, threshold, threshold_value, CoefficientMask};
use trendseg_core::tguw::{tguw_forward, TransformOptions};
use trendseg_core::{trendsegment, DetectionOptions, Series};

// Keeps the timing check free of competition from the Monte-Carlo runs.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(label: &str, pass: bool, detail: String) {
    let line = format!("[acceptance] {label}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{label}: {detail}");
}

fn threads() -> NonZeroUsize {
    std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN)
}

fn random_series(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-2.0..3.0));
    let drift = rng.gen_range(-1.0..1.0);
    (0..len).map(|t| scale * (rng.sample::<f64, _>(StandardNormal) + drift * t as f64 / len as f64)).collect()
}

/// 200 inputs, 40 at each length.
fn transform_inputs() -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    [3, 10, 100, 1000, 10000]
        .iter()
        .flat_map(|&len| (0..40).map(|_| len).collect::<Vec<_>>())
        .map(|len| random_series(len, &mut rng))
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn simulate(family: Family, kind: NoiseKind, c: f64, seed: u64) -> SimulationReport {
    let cfg = SimulationConfig {
        signal: SignalSpec::canonical(family),
        noise: NoiseSpec { kind, sigma: 1.0, phi: DEFAULT_PHI, seed },
        runs: 100,
        options: DetectionOptions { constant_c: c, ..Default::default() },
        threads: threads(),
    };
    run_simulation(&cfg).unwrap()
}

#[test]
fn round_trip_exactness() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for x in transform_inputs() {
        let s = Series::new(x.clone()).unwrap();
        let d = tguw_forward(&s, &TransformOptions::default()).unwrap();
        let back = tguw_inverse(&d, &CoefficientMask::all(d.records.len())).unwrap();
        let err = x.iter().zip(back.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / s.scale());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "round-trip exactness",
        worst < 1e-8 && secs < 10.0,
        format!("worst relative sup error {worst:.3e}, {secs:.2} s"),
    );
}

#[test]
fn parseval_identity() {
    let _g = serial();
    let mut worst = 0.0f64;
    for x in transform_inputs() {
        let d = tguw_forward(&Series::new(x.clone()).unwrap(), &TransformOptions::default()).unwrap();
        let total: f64 = x.iter().map(|v| v * v).sum();
        let coeffs: f64 = d.coefficients().iter().map(|v| v * v).sum();
        worst = worst.max((total - coeffs).abs() / total);
    }
    verdict("Parseval identity", worst < 1e-9, format!("worst relative gap {worst:.3e}"));
}

#[test]
fn orthonormal_basis() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut defect, mut mismatch) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let len = rng.gen_range(3..=64);
        let x = random_series(len, &mut rng);
        let d = tguw_forward(&Series::new(x.clone()).unwrap(), &TransformOptions::default()).unwrap();
        let basis = materialize_basis(&d, DEFAULT_BASIS_CAP).unwrap();
        defect = defect.max(basis.orthonormality_defect());
        let via_basis = basis.apply(&x);
        let direct = d.coefficients();
        let gap = via_basis.iter().zip(&direct).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        mismatch = mismatch.max(gap);
    }
    verdict(
        "orthonormal basis",
        defect < 1e-10 && mismatch < 1e-9,
        format!("max |PsiPsi^T - I| {defect:.3e}, max coefficient gap {mismatch:.3e}"),
    );
}

#[test]
fn zero_detail_on_lines() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut total_hat) = (0.0f64, 0);
    for _ in 0..20 {
        let len = rng.gen_range(3..=10_000);
        let (a, b) = (rng.gen_range(-1e3..1e3), rng.gen_range(-10.0..10.0));
        let x = Series::new((1..=len).map(|t| a + b * t as f64).collect()).unwrap();
        let d = tguw_forward(&x, &TransformOptions::default()).unwrap();
        let biggest = d.details().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(biggest / x.scale());
        total_hat += trendsegment(&x, &DetectionOptions::default()).unwrap().n_hat;
    }
    verdict(
        "zero details on exact lines",
        worst < 1e-8 && total_hat == 0,
        format!("largest |detail|/scale {worst:.3e}, change-points found {total_hat}"),
    );
}

#[test]
fn projection_identity() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut fit_gap, mut energy_gap) = (0.0f64, 0.0f64);
    for len in [3, 10, 100, 1000, 10000] {
        for _ in 0..4 {
            let x = random_series(len, &mut rng);
            let d = tguw_forward(&Series::new(x.clone()).unwrap(), &TransformOptions::default()).unwrap();
            let f = tguw_inverse(&d, &CoefficientMask::none(d.records.len())).unwrap();
            // Global least-squares line.
            let n = len as f64;
            let tm = (n + 1.0) / 2.0;
            let xm = x.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                let dt = (i + 1) as f64 - tm;
                sxy += dt * (v - xm);
                sxx += dt * dt;
            }
            let ols: Vec<f64> = (1..=len).map(|t| xm + sxy / sxx * (t as f64 - tm)).collect();
            let gap = f.iter().zip(&ols).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            fit_gap = fit_gap.max(gap / sup(&x).max(1.0));
            let rss: f64 = x.iter().zip(&ols).map(|(a, b)| (a - b) * (a - b)).sum();
            let energy: f64 = d.details().map(|v| v * v).sum();
            if rss > 0.0 {
                energy_gap = energy_gap.max((rss - energy).abs() / rss);
            }
        }
    }
    verdict(
        "projection identity",
        fit_gap < 1e-8 && energy_gap < 1e-9,
        format!("sup gap to OLS {fit_gap:.3e} (relative), RSS vs detail energy {energy_gap:.3e}"),
    );
}

#[test]
fn monte_carlo_continuous_wave() {
    let _g = serial();
    let start = Instant::now();
    let r = simulate(Family::Wave1, NoiseKind::GaussIid, 1.3, 1);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "Monte-Carlo continuous wave",
        r.exact_count() >= 85 && r.mean_hausdorff * 100.0 <= 6.0 && secs < 60.0,
        format!(
            "N_hat = N in {}/100, histogram {:?}, mean dH*100 {:.3}, {secs:.1} s",
            r.exact_count(),
            r.histogram,
            r.mean_hausdorff * 100.0
        ),
    );
}

#[test]
fn monte_carlo_line() {
    let _g = serial();
    let r = simulate(Family::Lin, NoiseKind::GaussIid, 1.3, 2);
    verdict(
        "Monte-Carlo line without change-points",
        r.length == 1000 && r.exact_count() >= 95,
        format!("N_hat = 0 in {}/100", r.exact_count()),
    );
}

#[test]
fn point_anomalies() {
    let _g = serial();
    let spec = SignalSpec::canonical(Family::Mix2);
    assert!(spec.anomalies.len() == 2 && spec.anomalies.iter().all(|a| a.magnitude.abs() >= 8.0));
    let cfg = SimulationConfig {
        signal: spec.clone(),
        noise: NoiseSpec::gaussian(1.0, 3),
        runs: 100,
        options: DetectionOptions::default(),
        threads: threads(),
    };
    let flagged = run_replicates(&cfg)
        .unwrap()
        .iter()
        .filter(|o| {
            spec.anomalies.iter().all(|a| {
                let t = a.position;
                o.changepoints.contains(&(t - 1)) && o.changepoints.contains(&t)
            })
        })
        .count();
    verdict("point anomalies", flagged >= 70, format!("both anomalies isolated in {flagged}/100"));
}

#[test]
fn mad_calibration() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 100;
    let mut parts = Vec::new();
    for sigma in [0.5, 1.0, 3.0] {
        let mut good = 0;
        for _ in 0..100 {
            // Random continuous piecewise-linear signal with 1..10 kinks.
            let len = 10_000;
            let kinks = rng.gen_range(1..=10);
            let mut knots: Vec<usize> = (0..kinks).map(|_| rng.gen_range(1..len)).collect();
            knots.sort_unstable();
            let mut slope = rng.gen_range(-0.01..0.01);
            let mut v = rng.gen_range(-5.0..5.0);
            let mut k = 0;
            let x: Vec<f64> = (1..=len)
                .map(|t| {
                    while k < knots.len() && t > knots[k] {
                        slope = rng.gen_range(-0.01..0.01);
                        k += 1;
                    }
                    v += slope;
                    v + sigma * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            let ratio = mad_sigma(&x).unwrap() / sigma;
            if (0.9..=1.1).contains(&ratio) {
                good += 1;
            }
        }
        worst = worst.min(good);
        parts.push(format!("sigma {sigma}: {good}/100"));
    }
    verdict("MAD calibration", worst >= 95, parts.join(", "));
}

fn brute_hausdorff(a: &[usize], b: &[usize], len: usize) -> f64 {
    let aug = |s: &[usize]| {
        let mut v = vec![0];
        v.extend_from_slice(s);
        v.push(len);
        v
    };
    let (a, b) = (aug(a), aug(b));
    let mut d = 0usize;
    for x in &a {
        d = d.max(b.iter().map(|y| x.abs_diff(*y)).min().unwrap());
    }
    for y in &b {
        d = d.max(a.iter().map(|x| x.abs_diff(*y)).min().unwrap());
    }
    d as f64 / len as f64
}

#[test]
fn hausdorff_matches_brute_force() {
    let _g = serial();
    let len = 30;
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for i in 1..len {
        sets.push(vec![i]);
        for j in i + 1..len {
            sets.push(vec![i, j]);
            for k in j + 1..len {
                sets.push(vec![i, j, k]);
            }
        }
    }
    let mut mismatches = 0u64;
    let mut pairs = 0u64;
    for a in &sets {
        for b in &sets {
            pairs += 1;
            if hausdorff(a, b, len) != brute_hausdorff(a, b, len) {
                mismatches += 1;
            }
        }
    }
    verdict(
        "Hausdorff oracle equivalence",
        mismatches == 0,
        format!("{pairs} set pairs, {mismatches} mismatches"),
    );
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn timed_detection(len: usize) -> f64 {
    let f = generate_signal(&SignalSpec::with_length(Family::Wave1, len).unwrap()).unwrap();
    let e = generate_noise(&NoiseSpec::gaussian(1.0, 11), len);
    let x = Series::new(f.values.iter().zip(&e).map(|(a, b)| a + b).collect()).unwrap();
    let runs: Vec<f64> = (0..5)
        .map(|_| {
            let t = Instant::now();
            trendsegment(&x, &DetectionOptions::default()).unwrap();
            t.elapsed().as_secs_f64()
        })
        .collect();
    median(runs)
}

#[test]
fn complexity_scaling() {
    let _g = serial();
    let small = timed_detection(100_000);
    let large = timed_detection(200_000);
    let ratio = large / small;
    verdict(
        "complexity scaling",
        ratio <= 2.6 && small < 2.0,
        format!("median {small:.3} s at 1e5, {large:.3} s at 2e5, ratio {ratio:.2}"),
    );
}

#[test]
fn threshold_monotonicity() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = 0;
    for i in 0..50 {
        let len = rng.gen_range(50..2000);
        let f = generate_signal(&SignalSpec::with_length(Family::ALL[i % 8], len.max(100)).unwrap()).unwrap();
        let e = generate_noise(&NoiseSpec::gaussian(rng.gen_range(0.2..3.0), i as u64), f.values.len());
        let x: Vec<f64> = f.values.iter().zip(&e).map(|(a, b)| a + b).collect();
        let d = tguw_forward(&Series::new(x.clone()).unwrap(), &TransformOptions::default()).unwrap();
        let sigma = mad_sigma(&x).unwrap();
        let masks: Vec<_> = [0.5, 1.0, 1.3, 2.0]
            .iter()
            .map(|&c| threshold(&d, threshold_value(x.len(), c, sigma).lambda))
            .collect();
        violations += masks.windows(2).filter(|w| !w[1].is_subset_of(&w[0])).count();
    }
    verdict("threshold monotonicity", violations == 0, format!("{violations} non-nested steps over 50 inputs"));
}

#[test]
fn stage2_properties() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut not_subset, mut not_idem) = (0, 0);
    for i in 0..50 {
        let len = rng.gen_range(100..1500);
        let f = generate_signal(&SignalSpec::with_length(Family::ALL[i % 8], len).unwrap()).unwrap();
        let e = generate_noise(&NoiseSpec::gaussian(1.0, 500 + i as u64), len);
        let x = Series::new(f.values.iter().zip(&e).map(|(a, b)| a + b).collect()).unwrap();
        let mut cps: Vec<usize> = (0..rng.gen_range(1..20)).map(|_| rng.gen_range(1..len)).collect();
        cps.sort_unstable();
        cps.dedup();
        let lambda = threshold_value(len, 1.3, 1.0).lambda;
        let once = stage2(&x, &cps, lambda, 1e-12).unwrap().changepoints;
        if !once.iter().all(|c| cps.contains(c)) {
            not_subset += 1;
        }
        if stage2(&x, &once, lambda, 1e-12).unwrap().changepoints != once {
            not_idem += 1;
        }
    }
    let line = Series::new((1..=1000).map(|t| 4.0 - 0.02 * t as f64).collect()).unwrap();
    let fake = [100, 250, 400, 401, 800];
    let left = stage2(&line, &fake, 1e-6, 1e-12).unwrap().changepoints;
    verdict(
        "stage-2 pruning properties",
        not_subset == 0 && not_idem == 0 && left.is_empty(),
        format!("{not_subset} non-subset, {not_idem} non-idempotent of 50; fake change-points left on a line: {left:?}"),
    );
}

#[test]
fn robustness_to_dependent_and_heavy_tailed_noise() {
    let _g = serial();
    let mut parts = Vec::new();
    let mut worst = 100;
    for (kind, seed) in [(NoiseKind::Ar1, 41), (NoiseKind::T5Scaled, 42), (NoiseKind::Laplace, 43)] {
        let r = simulate(Family::Wave1, kind, 1.8, seed);
        worst = worst.min(r.exact_count());
        parts.push(format!("{kind}: {}/100 {:?}", r.exact_count(), r.histogram));
    }
    verdict("robustness under AR(1), t5, Laplace noise", worst >= 50, parts.join("; "));
}
