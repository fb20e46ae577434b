// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-linear test signals.
//!
//! Each family is a fixed shape on a canonical length. Asking for another
//! length rescales the breakpoints and divides the slopes by the same
//! factor, so amplitudes and jumps stay put. The shapes are listed in
//! `FIXTURES.md` at the crate root.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, TrendsegError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Wave1,
    Wave2,
    Mix1,
    Mix2,
    Mix3,
    #[value(name = "lin_sgmts", alias = "lin-sgmts", alias = "lin.sgmts")]
    LinSgmts,
    Teeth,
    Lin,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Wave1,
        Family::Wave2,
        Family::Mix1,
        Family::Mix2,
        Family::Mix3,
        Family::LinSgmts,
        Family::Teeth,
        Family::Lin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Wave1 => "wave1",
            Family::Wave2 => "wave2",
            Family::Mix1 => "mix1",
            Family::Mix2 => "mix2",
            Family::Mix3 => "mix3",
            Family::LinSgmts => "lin_sgmts",
            Family::Teeth => "teeth",
            Family::Lin => "lin",
        }
    }

    pub fn canonical_length(self) -> usize {
        shape(self).length
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = TrendsegError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', ".") == s)
            .ok_or_else(|| TrendsegError::InvalidSpec(format!("unknown family {s:?}")))
    }
}

/// One linear piece: `f_t = intercept + slope * t` (1-based `t`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Anomaly {
    pub position: usize,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalSpec {
    pub family: Family,
    pub length: usize,
    /// Last index of every piece but the final one.
    pub breakpoints: Vec<usize>,
    pub pieces: Vec<Piece>,
    pub anomalies: Vec<Anomaly>,
}

/// Canonical shape: `(length, slope, jump)` per piece, where `jump` is added
/// at the piece's first point, plus anomalies as `(position, magnitude)`.
struct Shape {
    length: usize,
    start: f64,
    pieces: &'static [(usize, f64, f64)],
    anomalies: &'static [(usize, f64)],
}

const W1: f64 = 1.0 / 48.0;
const W2: f64 = 1.0 / 32.0;

fn shape(family: Family) -> Shape {
    match family {
        Family::Wave1 => Shape {
            length: 1280,
            start: 0.0,
            pieces: &[
                (160, W1, 0.0),
                (160, -W1, 0.0),
                (160, W1, 0.0),
                (160, -W1, 0.0),
                (160, W1, 0.0),
                (160, -W1, 0.0),
                (160, W1, 0.0),
                (160, -W1, 0.0),
            ],
            anomalies: &[],
        },
        Family::Wave2 => Shape {
            length: 1280,
            start: 0.0,
            pieces: &[
                (160, W2, 0.0),
                (160, -W2, -2.0),
                (160, W2, 2.0),
                (160, -W2, -2.0),
                (160, W2, 2.0),
                (160, -W2, -2.0),
                (160, W2, 2.0),
                (160, -W2, -2.0),
            ],
            anomalies: &[],
        },
        Family::Mix1 => Shape { length: 1000, start: 0.0, pieces: MIX, anomalies: &[] },
        Family::Mix2 => Shape { length: 1000, start: 0.0, pieces: MIX, anomalies: &[(75, 8.0), (580, -8.0)] },
        Family::Mix3 => Shape {
            length: 1000,
            start: 0.0,
            pieces: &[
                (200, 0.0, 0.0),
                (12, 0.0, 5.0),
                (188, 0.02, -5.0),
                (200, -0.02, 0.0),
                (15, 0.0, -4.0),
                (185, 0.0, 4.0),
            ],
            anomalies: &[],
        },
        Family::LinSgmts => Shape {
            length: 1000,
            start: 0.0,
            pieces: &[
                (230, 0.0, 0.0),
                (10, 0.8, 0.0),
                (10, -0.8, 0.0),
                (230, 0.0, 0.0),
                (10, 0.8, 0.0),
                (10, -0.8, 0.0),
                (230, 0.0, 0.0),
                (10, -0.8, 0.0),
                (10, 0.8, 0.0),
                (250, 0.0, 0.0),
            ],
            anomalies: &[],
        },
        Family::Teeth => Shape {
            length: 512,
            start: 0.0,
            pieces: &[
                (64, 0.0, 0.0),
                (64, 0.0, 2.0),
                (64, 0.0, -2.0),
                (64, 0.0, 2.0),
                (64, 0.0, -2.0),
                (64, 0.0, 2.0),
                (64, 0.0, -2.0),
                (64, 0.0, 2.0),
            ],
            anomalies: &[],
        },
        Family::Lin => Shape { length: 1000, start: 0.0, pieces: &[(1000, 0.01, 0.0)], anomalies: &[] },
    }
}

const MIX: &[(usize, f64, f64)] = &[
    (150, 0.0, 0.0),
    (150, 0.03, 0.0),
    (200, 0.0, 3.0),
    (150, -0.03, 0.0),
    (200, 0.0, -3.0),
    (150, 0.02, 0.0),
];

impl SignalSpec {
    /// The family's shape at its canonical length.
    pub fn canonical(family: Family) -> Self {
        Self::with_length(family, family.canonical_length()).expect("canonical shapes are valid")
    }

    /// The family's shape rescaled to `length` points.
    pub fn with_length(family: Family, length: usize) -> Result<Self> {
        let sh = shape(family);
        if length < sh.pieces.len() * 3 {
            return Err(TrendsegError::InvalidSpec(format!(
                "{family} needs at least {} points, got {length}",
                sh.pieces.len() * 3
            )));
        }
        let ratio = length as f64 / sh.length as f64;
        let mut ends = Vec::with_capacity(sh.pieces.len());
        let mut acc = 0;
        for &(len, _, _) in sh.pieces {
            acc += len;
            ends.push(((acc as f64 * ratio).round() as usize).min(length));
        }
        *ends.last_mut().expect("non-empty") = length;

        let mut pieces = Vec::with_capacity(ends.len());
        let mut level = sh.start;
        let mut start = 1;
        for (&(_, slope, jump), &end) in sh.pieces.iter().zip(&ends) {
            let slope = slope / ratio;
            level += jump;
            // `level` is the value one step before `start`.
            pieces.push(Piece { intercept: level - slope * (start as f64 - 1.0), slope });
            level += slope * (end + 1 - start) as f64;
            start = end + 1;
        }
        ends.pop();
        let anomalies = sh
            .anomalies
            .iter()
            .map(|&(pos, magnitude)| Anomaly {
                position: ((pos as f64 * ratio).round() as usize).clamp(1, length),
                magnitude,
            })
            .collect();
        let spec = SignalSpec { family, length, breakpoints: ends, pieces, anomalies };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TrendsegError::InvalidSpec(m));
        if self.pieces.len() != self.breakpoints.len() + 1 {
            return bad(format!("{} pieces for {} breakpoints", self.pieces.len(), self.breakpoints.len()));
        }
        let mut prev = 0;
        for &b in &self.breakpoints {
            if b <= prev || b >= self.length {
                return bad(format!("breakpoint {b} out of order or outside 1..{}", self.length - 1));
            }
            prev = b;
        }
        for a in &self.anomalies {
            if a.position == 0 || a.position > self.length || a.magnitude == 0.0 {
                return bad(format!("anomaly at {} of size {}", a.position, a.magnitude));
            }
        }
        Ok(())
    }
}

/// Generated signal and its change-points (1-based, last index before each
/// change).
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub values: Vec<f64>,
    pub changepoints: Vec<usize>,
}

/// Evaluates `spec` and checks that every declared change-point is one:
/// the preceding piece's line, carried one step on, misses the next value.
pub fn generate_signal(spec: &SignalSpec) -> Result<Signal> {
    spec.validate()?;
    let len = spec.length;
    let mut piece_of = Vec::with_capacity(len);
    let mut values = Vec::with_capacity(len);
    let mut k = 0;
    for t in 1..=len {
        if k < spec.breakpoints.len() && t > spec.breakpoints[k] {
            k += 1;
        }
        let p = spec.pieces[k];
        values.push(p.intercept + p.slope * t as f64);
        piece_of.push(p);
    }
    let mut cps = spec.breakpoints.clone();
    for a in &spec.anomalies {
        let t = a.position;
        values[t - 1] += a.magnitude;
        // The anomaly is its own flat piece.
        piece_of[t - 1] = Piece { intercept: values[t - 1], slope: 0.0 };
        if t > 1 {
            cps.push(t - 1);
        }
        if t < len {
            cps.push(t);
        }
    }
    cps.sort_unstable();
    cps.dedup();

    for &eta in &cps {
        let p = piece_of[eta - 1];
        let carried = p.intercept + p.slope * (eta + 1) as f64;
        if (carried - values[eta]).abs() <= 1e-9 * (1.0 + values[eta].abs()) {
            return Err(TrendsegError::InvalidSpec(format!("declared change-point {eta} is not a change")));
        }
    }
    Ok(Signal { values, changepoints: cps })
}
