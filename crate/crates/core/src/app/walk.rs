//! Monte-Carlo paths of the level walk (the classical birth–death shadow of `qtr_1`-convolution).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qnum;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelVisits {
    pub level: u32,
    pub departures: u64,
    pub empirical_p_up: f64,
    pub exact_p_up: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WalkStats {
    pub n0: u32,
    pub steps: u32,
    pub trials: u32,
    pub seed: u64,
    pub q: f64,
    /// Final level of every path, in trial order.
    pub final_levels: Vec<u32>,
    pub mean_final: f64,
    pub std_final: f64,
    /// `(mean_final − n0)/steps`; zero when `steps = 0`.
    pub mean_increment: f64,
    /// Standard error of `mean_increment`.
    pub increment_std_error: f64,
    /// Expected increment per step, `Σ_t E[p_up − p_down]`, from the exact level distribution.
    pub expected_increment: f64,
    /// `(1 − q²)/(1 + q²)`, the drift far from the origin.
    pub asymptotic_drift: f64,
    /// Fraction of paths that never came back to `n0` after the first step.
    pub escape_fraction: f64,
    /// Fraction of paths whose final level is above `n0`.
    pub above_start_fraction: f64,
    pub per_level: Vec<LevelVisits>,
}

/// Distribution of the level after `steps` steps from `n0`, propagated exactly in floating point.
pub fn level_distribution(q: f64, n0: u32, steps: u32) -> Vec<f64> {
    let mut p = vec![0.0; n0 as usize + 1];
    p[n0 as usize] = 1.0;
    for _ in 0..steps {
        p = step_distribution(q, &p);
    }
    p
}

pub fn simulate_walk(q: f64, n0: u32, steps: u32, trials: u32, seed: u64) -> Result<WalkStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = (n0 + steps + 1) as usize;
    let p_up: Vec<f64> = (0..=cap as u32).map(|n| qnum::walk_weights(n, q).p_up).collect();
    let mut departures = vec![0u64; cap + 1];
    let mut ups = vec![0u64; cap + 1];
    let mut final_levels = Vec::with_capacity(trials as usize);
    let (mut escaped, mut above) = (0u32, 0u32);
    for _ in 0..trials {
        let mut n = n0;
        let mut returned = false;
        for _ in 0..steps {
            let up = rng.random::<f64>() < p_up[n as usize];
            departures[n as usize] += 1;
            if up {
                ups[n as usize] += 1;
                n += 1;
            } else {
                n -= 1;
            }
            returned |= n == n0;
        }
        if steps > 0 && !returned {
            escaped += 1;
        }
        if n > n0 {
            above += 1;
        }
        final_levels.push(n);
    }

    let t = f64::from(trials);
    let mean_final = final_levels.iter().map(|&n| f64::from(n)).sum::<f64>() / t;
    let var = final_levels.iter().map(|&n| (f64::from(n) - mean_final).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
    let std_final = var.sqrt();
    let (mean_increment, increment_std_error) = if steps == 0 {
        (0.0, 0.0)
    } else {
        let s = f64::from(steps);
        ((mean_final - f64::from(n0)) / s, std_final / s / t.sqrt())
    };
    let expected_increment = if steps == 0 {
        0.0
    } else {
        let mut total = 0.0;
        let mut dist = level_distribution(q, n0, 0);
        for _ in 0..steps {
            total += dist
                .iter()
                .enumerate()
                .map(|(n, &m)| {
                    let w = qnum::walk_weights(n as u32, q);
                    m * (w.p_up - w.p_down)
                })
                .sum::<f64>();
            dist = step_distribution(q, &dist);
        }
        total / f64::from(steps)
    };
    let per_level = departures
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0)
        .map(|(n, &d)| LevelVisits {
            level: n as u32,
            departures: d,
            empirical_p_up: ups[n] as f64 / d as f64,
            exact_p_up: p_up[n],
        })
        .collect();
    Ok(WalkStats {
        n0,
        steps,
        trials,
        seed,
        q,
        final_levels,
        mean_final,
        std_final,
        mean_increment,
        increment_std_error,
        expected_increment,
        asymptotic_drift: (1.0 - q * q) / (1.0 + q * q),
        escape_fraction: if steps == 0 { 0.0 } else { f64::from(escaped) / t },
        above_start_fraction: f64::from(above) / t,
        per_level,
    })
}

fn step_distribution(q: f64, p: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; p.len() + 1];
    for (n, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let w = qnum::walk_weights(n as u32, q);
        if n > 0 {
            next[n - 1] += mass * w.p_down;
        }
        next[n + 1] += mass * w.p_up;
    }
    next
}
