// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal, StudentT};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// iid Gaussian.
    #[value(name = "gauss", alias = "gauss_iid")]
    GaussIid,
    /// Stationary Gaussian AR(1) with unit marginal variance.
    Ar1,
    /// Student t with 5 degrees of freedom, scaled to unit variance.
    #[value(name = "t5", alias = "t5_scaled")]
    T5Scaled,
    /// Laplace with scale 1/sqrt(2) (unit variance).
    Laplace,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::GaussIid => "gauss",
            NoiseKind::Ar1 => "ar1",
            NoiseKind::T5Scaled => "t5",
            NoiseKind::Laplace => "laplace",
        })
    }
}

pub const DEFAULT_PHI: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    /// AR(1) coefficient, ignored by the other kinds.
    pub phi: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::GaussIid, sigma, phi: DEFAULT_PHI, seed }
    }
}

/// `len` noise values, reproducible from `spec.seed`.
pub fn generate_noise(spec: &NoiseSpec, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.sigma;
    if sigma == 0.0 {
        return vec![0.0; len];
    }
    match spec.kind {
        NoiseKind::GaussIid => (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect(),
        NoiseKind::Ar1 => {
            let phi = spec.phi;
            let innov = (1.0 - phi * phi).sqrt();
            let mut prev: f64 = rng.sample(StandardNormal);
            let mut out = Vec::with_capacity(len);
            for i in 0..len {
                if i > 0 {
                    prev = phi * prev + innov * rng.sample::<f64, _>(StandardNormal);
                }
                out.push(sigma * prev);
            }
            out
        }
        NoiseKind::T5Scaled => {
            let t5 = StudentT::new(5.0).expect("valid degrees of freedom");
            let k = sigma * (3.0f64 / 5.0).sqrt();
            (0..len).map(|_| k * rng.sample(t5)).collect()
        }
        NoiseKind::Laplace => {
            let b = sigma * std::f64::consts::FRAC_1_SQRT_2;
            (0..len)
                .map(|_| {
                    let (e1, e2): (f64, f64) = (rng.sample(Exp1), rng.sample(Exp1));
                    b * (e1 - e2)
                })
                .collect()
        }
    }
}
