//! Weighted Bernoulli maximum likelihood: a model with no inputs and a single
//! output `p`, trained with the binary real-world-weight loss.
//!
//! The loss `J(p) = -(1/M)[w_pos·n_pos·ln p + w_neg·n_neg·ln(1-p)]` is minimized
//! at `p* = w_pos·n_pos / (w_pos·n_pos + w_neg·n_neg)`, which is also the
//! maximizer of the likelihood in which every positive counts `w_pos` times
//! and every negative `w_neg` times. `M` is the weighted observation count
//! `w_pos·n_pos + w_neg·n_neg`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::PROB_EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliScenario {
    pub n_pos: u64,
    pub n_neg: u64,
    /// Reward (or cost) per positive outcome.
    pub w_pos: f64,
    /// Reward (or cost) per negative outcome.
    pub w_neg: f64,
}

impl BernoulliScenario {
    pub fn new(n_pos: u64, n_neg: u64, w_pos: f64, w_neg: f64) -> Result<Self> {
        if n_pos + n_neg == 0 {
            return Err(Error::Config(
                "scenario needs at least one observation".into(),
            ));
        }
        for (name, w) in [("w_pos", w_pos), ("w_neg", w_neg)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {w}")));
            }
        }
        Ok(BernoulliScenario {
            n_pos,
            n_neg,
            w_pos,
            w_neg,
        })
    }

    fn weighted_pos(&self) -> f64 {
        self.w_pos * self.n_pos as f64
    }

    fn weighted_neg(&self) -> f64 {
        self.w_neg * self.n_neg as f64
    }

    /// The `M` of the `1/M` prefactor.
    pub fn normalizer(&self) -> f64 {
        self.weighted_pos() + self.weighted_neg()
    }

    /// `J(p)` with log arguments floored at the loss epsilon.
    pub fn loss(&self, p: f64) -> f64 {
        let ln = |x: f64| x.max(PROB_EPSILON).ln();
        -(self.weighted_pos() * ln(p) + self.weighted_neg() * ln(1.0 - p)) / self.normalizer()
    }

    fn loss_gradient(&self, p: f64) -> f64 {
        -(self.weighted_pos() / p - self.weighted_neg() / (1.0 - p)) / self.normalizer()
    }
}

pub fn analytic_minimizer(s: &BernoulliScenario) -> Result<f64> {
    let total = s.normalizer();
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "weighted observation count is zero".into(),
        ));
    }
    Ok(s.weighted_pos() / total)
}

/// Plain gradient descent on `J`, keeping `p` inside `[ε, 1-ε]`.
pub fn descend(s: &BernoulliScenario, p0: f64, step: f64, iterations: usize) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Config(format!(
            "starting point must lie in (0,1), got {p0}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {step}")));
    }
    let mut p = p0;
    for _ in 0..iterations {
        p = (p - step * s.loss_gradient(p)).clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossCurve {
    /// `M` used for the `1/M` prefactor.
    pub normalizer: f64,
    pub points: Vec<(f64, f64)>,
}

impl LossCurve {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p", "loss"])?;
        for &(p, j) in &self.points {
            w.serialize((p, j))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv()?;
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// `n` evenly spaced points strictly inside (0,1).
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

pub fn loss_curve(s: &BernoulliScenario, grid: &[f64]) -> Result<LossCurve> {
    if let Some(bad) = grid.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Input(format!("grid value {bad} outside (0,1)")));
    }
    Ok(LossCurve {
        normalizer: s.normalizer(),
        points: grid.iter().map(|&p| (p, s.loss(p))).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LikelihoodCheck {
    pub likelihood_argmax: f64,
    pub loss_argmin: f64,
}

impl LikelihoodCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.likelihood_argmax - self.loss_argmin).abs()
    }
}

const LIKELIHOOD_GRID: usize = 10_000;

/// Maximizes the weighted likelihood `p^(w_pos·n_pos)·(1-p)^(w_neg·n_neg)` by a
/// dense grid plus ternary refinement and pairs it with the closed-form loss minimizer.
pub fn likelihood_check(s: &BernoulliScenario) -> Result<LikelihoodCheck> {
    let (a, b) = (s.weighted_pos(), s.weighted_neg());
    let log_likelihood = |p: f64| a * p.ln() + b * (-p).ln_1p();
    // log of likelihood(p) / likelihood(q), accurate even when p and q nearly coincide
    let log_ratio = |p: f64, q: f64| a * ((p - q) / q).ln_1p() + b * ((q - p) / (1.0 - q)).ln_1p();

    let grid = uniform_grid(LIKELIHOOD_GRID);
    let best = (0..grid.len())
        .max_by(|&i, &j| log_likelihood(grid[i]).total_cmp(&log_likelihood(grid[j])))
        .expect("grid is nonempty");
    let mut lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let mut hi = if best + 1 == grid.len() {
        1.0
    } else {
        grid[best + 1]
    };
    for _ in 0..400 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if !(m1 > lo && m2 < hi && m1 < m2) {
            break;
        }
        if log_ratio(m1, m2) < 0.0 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(LikelihoodCheck {
        likelihood_argmax: lo + (hi - lo) / 2.0,
        loss_argmin: analytic_minimizer(s)?,
    })
}
