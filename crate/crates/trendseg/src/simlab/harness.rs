// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::num::NonZeroUsize;

use serde::Serialize;
use trendseg_core::{DetectionOptions, Series};

use super::metrics::{hausdorff, mse};
use super::noise::{generate_noise, NoiseSpec};
use super::signals::{generate_signal, SignalSpec};
use crate::clock::{detect_timed, StdClock};
use crate::error::Result;

/// Labels of the `N̂ - N` histogram bins.
pub const BIN_LABELS: [&str; 7] = ["<=-3", "-2", "-1", "0", "1", "2", ">=3"];

/// splitmix64 of `base` advanced `index + 1` steps.
pub fn splitmix(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn bin_of(diff: i64) -> usize {
    (diff.clamp(-3, 3) + 3) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub n_true: usize,
    pub n_hat: usize,
    pub changepoints: Vec<usize>,
    pub mse: f64,
    pub hausdorff: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub signal: SignalSpec,
    /// Noise shape; the seed is the base seed, split per run.
    pub noise: NoiseSpec,
    pub runs: usize,
    pub options: DetectionOptions,
    pub threads: NonZeroUsize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub model: String,
    pub length: usize,
    pub true_changepoints: usize,
    pub noise: String,
    pub sigma: f64,
    pub runs: usize,
    pub seed: u64,
    /// Counts of `N̂ - N` in the bins of [`BIN_LABELS`].
    pub histogram: [usize; 7],
    pub mean_mse: f64,
    pub mean_hausdorff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_seconds: Option<f64>,
}

impl SimulationReport {
    pub fn exact_count(&self) -> usize {
        self.histogram[3]
    }

    /// Same report without the timing column.
    pub fn without_timing(mut self) -> Self {
        self.mean_seconds = None;
        self
    }

    /// Aligned text table, one header row and one data row.
    pub fn to_table(&self) -> String {
        let mut head: Vec<String> = ["model", "T", "noise", "sigma", "runs"].iter().map(|s| s.to_string()).collect();
        head.extend(BIN_LABELS.iter().map(|s| s.to_string()));
        head.extend(["MSE".to_string(), "dH*100".to_string()]);
        let mut row = vec![
            self.model.clone(),
            self.length.to_string(),
            self.noise.clone(),
            format!("{}", self.sigma),
            self.runs.to_string(),
        ];
        row.extend(self.histogram.iter().map(|c| c.to_string()));
        row.push(format!("{:.4}", self.mean_mse));
        row.push(format!("{:.3}", self.mean_hausdorff * 100.0));
        if let Some(s) = self.mean_seconds {
            head.push("time(s)".into());
            row.push(format!("{s:.4}"));
        }
        let widths: Vec<usize> = head.iter().zip(&row).map(|(h, r)| h.len().max(r.len())).collect();
        let mut out = String::new();
        for line in [&head, &row] {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  "));
        }
        out
    }
}

/// One replicate: signal plus noise seeded by `seed`, detected and scored.
pub fn run_once(signal: &SignalSpec, noise: &NoiseSpec, seed: u64, opts: &DetectionOptions) -> Result<RunOutcome> {
    let sig = generate_signal(signal)?;
    let e = generate_noise(&NoiseSpec { seed, ..*noise }, signal.length);
    let x: Vec<f64> = sig.values.iter().zip(&e).map(|(f, e)| f + e).collect();
    let (res, seconds) = detect_timed(&Series::new(x)?, opts, &StdClock::new())?;
    Ok(RunOutcome {
        n_true: sig.changepoints.len(),
        n_hat: res.n_hat,
        mse: mse(&sig.values, &res.fitted)?,
        hausdorff: hausdorff(&sig.changepoints, &res.changepoints, signal.length),
        changepoints: res.changepoints,
        seconds,
    })
}

/// Every replicate in run order. Run `i` uses seed `splitmix(base, i)`, so
/// results do not depend on the thread count.
pub fn run_replicates(cfg: &SimulationConfig) -> Result<Vec<RunOutcome>> {
    let threads = cfg.threads.get().min(cfg.runs.max(1));
    let base = cfg.noise.seed;
    let work = |i: usize| run_once(&cfg.signal, &cfg.noise, splitmix(base, i as u64), &cfg.options);
    if threads <= 1 {
        return (0..cfg.runs).map(work).collect();
    }
    let mut slots: Vec<Option<Result<RunOutcome>>> = (0..cfg.runs).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = cfg.runs.div_ceil(threads);
        for (c, part) in slots.chunks_mut(chunk).enumerate() {
            let work = &work;
            scope.spawn(move || {
                for (k, slot) in part.iter_mut().enumerate() {
                    *slot = Some(work(c * chunk + k));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every run filled")).collect()
}

pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    let outcomes = run_replicates(cfg)?;
    Ok(summarize(cfg, &outcomes))
}

pub fn summarize(cfg: &SimulationConfig, outcomes: &[RunOutcome]) -> SimulationReport {
    let mut histogram = [0; 7];
    let (mut m, mut h, mut s) = (0.0, 0.0, 0.0);
    for o in outcomes {
        histogram[bin_of(o.n_hat as i64 - o.n_true as i64)] += 1;
        m += o.mse;
        h += o.hausdorff;
        s += o.seconds;
    }
    let n = outcomes.len().max(1) as f64;
    SimulationReport {
        model: cfg.signal.family.to_string(),
        length: cfg.signal.length,
        true_changepoints: outcomes.first().map_or(0, |o| o.n_true),
        noise: cfg.noise.kind.to_string(),
        sigma: cfg.noise.sigma,
        runs: outcomes.len(),
        seed: cfg.noise.seed,
        histogram,
        mean_mse: m / n,
        mean_hausdorff: h / n,
        mean_seconds: Some(s / n),
    }
}
