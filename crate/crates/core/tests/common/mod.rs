// SPDX-License-Identifier: MIT OR Apache-2.0

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trendseg_core::Series;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len).map(|_| sigma * r.sample::<f64, _>(StandardNormal)).collect()
}

pub fn series(v: Vec<f64>) -> Series {
    Series::new(v).unwrap()
}

pub fn line(len: usize, a: f64, b: f64) -> Vec<f64> {
    (1..=len).map(|t| a + b * t as f64).collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Direct least-squares line over 1..=T, evaluated.
pub fn ols_line(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let tm = (n + 1.0) / 2.0;
    let xm = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let dt = (i + 1) as f64 - tm;
        sxy += dt * (v - xm);
        sxx += dt * dt;
    }
    let b = sxy / sxx;
    (1..=x.len()).map(|t| xm + b * (t as f64 - tm)).collect()
}
