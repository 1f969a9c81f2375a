//! Security-situation assessment: fold every threat's worst-case game
//! value into one number per epoch, normalize the resulting series, and
//! compare scenarios.
//!
//! The per-epoch fold is a log-radix sum: with radix `B`, the aggregate
//! of values `x_1..x_n` is `log_B(B^x_1 + .. + B^x_n)`. The largest
//! threat dominates, and the radix controls how much the others still
//! contribute. The aggregate column is then min-max normalized into
//! [0, 1] to form the situation curve.
//!
//! ```
//! use std::collections::BTreeMap;
//! use scpn::ssa;
//!
//! // A single threat passes through unchanged...
//! let one = BTreeMap::from([("worm".to_string(), 7.25)]);
//! assert!((ssa::aggregate(&one, 10.0).unwrap() - 7.25).abs() < 1e-9);
//!
//! // ...two equal threats exceed either one by log_B(2).
//! let two = BTreeMap::from([("worm".to_string(), 7.25), ("bot".to_string(), 7.25)]);
//! let agg = ssa::aggregate(&two, 10.0).unwrap();
//! assert!((agg - (7.25 + 2.0f64.log10())).abs() < 1e-9);
//!
//! // Min-max normalization pins the extremes.
//! assert_eq!(ssa::normalize(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{
    apply_defender, propagate_enabled, solve, AttackerAction, GameConfig, GameState,
};
use crate::net::{firing_probability, NetError, ScpnNet};

/// Errors raised by the assessment layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsaError {
    /// The aggregate of zero threats is undefined.
    #[error("cannot aggregate an empty threat set")]
    EmptyThreatSet,
    /// The log-radix must be finite and greater than one.
    #[error("invalid radix {0}: must be finite and greater than 1")]
    InvalidRadix(f64),
    /// Two series of different lengths cannot be compared.
    #[error("horizon mismatch: {left} vs {right} points")]
    HorizonMismatch { left: usize, right: usize },
    /// Propagated from net construction or state building.
    #[error(transparent)]
    Net(#[from] NetError),
}

/// How successive epochs of the situation curve are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RolloutMode {
    /// Deterministic: a propagation attempt is marked successful as soon
    /// as its cumulative success probability reaches one half.
    Expectation,
    /// Stochastic: attempts are sampled per trial with a seeded RNG and
    /// the mean curve over all trials is reported.
    MonteCarlo,
}

/// Assessment parameters; the `[ssa]` section of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaOptions {
    /// Log-radix of the aggregation, greater than 1.
    pub radix: f64,
    pub mode: RolloutMode,
    /// Trial count for Monte-Carlo mode.
    pub trials: u32,
    /// RNG seed for Monte-Carlo mode.
    pub seed: u64,
}

impl Default for SsaOptions {
    fn default() -> Self {
        SsaOptions {
            radix: 10.0,
            mode: RolloutMode::Expectation,
            trials: 200,
            seed: 42,
        }
    }
}

/// One epoch of the situation curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SituationPoint {
    pub tau: u32,
    /// Worst-case game value of each threat at this epoch.
    pub per_threat: BTreeMap<String, f64>,
    /// Log-radix fold of the per-threat values.
    pub aggregate: f64,
    /// Min-max normalized aggregate, in [0, 1] over the whole series.
    pub normalized: f64,
}

/// The situation curve of one scenario, one point per epoch 0..=H.
#[derive(Debug, Clone, PartialEq)]
pub struct SituationSeries {
    pub scenario_id: String,
    pub radix: f64,
    pub points: Vec<SituationPoint>,
}

/// Folds per-threat values into one epoch value: `log_B sum(B^x_i)`,
/// computed as `max + log_B sum(B^(x_i - max))` so large values never
/// overflow.
pub fn aggregate(per_threat: &BTreeMap<String, f64>, radix: f64) -> Result<f64, SsaError> {
    if !radix.is_finite() || radix <= 1.0 {
        return Err(SsaError::InvalidRadix(radix));
    }
    if per_threat.is_empty() {
        return Err(SsaError::EmptyThreatSet);
    }
    let max = per_threat
        .values()
        .fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let sum: f64 = per_threat.values().map(|&x| radix.powf(x - max)).sum();
    Ok(max + sum.ln() / radix.ln())
}

/// Min-max normalization: `(x - min) / (max - min)` elementwise. A
/// constant series maps to all zeros by convention.
pub fn normalize(series: &[f64]) -> Vec<f64> {
    let Some(&first) = series.first() else {
        return Vec::new();
    };
    let (min, max) = series
        .iter()
        .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if max == min {
        return vec![0.0; series.len()];
    }
    series.iter().map(|&x| (x - min) / (max - min)).collect()
}

/// Computes the situation curve of a net over `cfg.horizon` epochs.
///
/// Per epoch and per threat, the subnet state is scored with a full
/// fresh-horizon solve, then advanced one epoch along the solved policy
/// pair: the defender's move applies as chosen, and the attacker's
/// propagation succeeds per [`RolloutMode`]. The per-threat columns are
/// folded with [`aggregate`] and the aggregate column is normalized.
pub fn situation_series(
    scenario_id: &str,
    net: &ScpnNet,
    cfg: &GameConfig,
    opts: &SsaOptions,
) -> Result<SituationSeries, SsaError> {
    if !opts.radix.is_finite() || opts.radix <= 1.0 {
        return Err(SsaError::InvalidRadix(opts.radix));
    }
    if net.threats.is_empty() {
        return Err(SsaError::EmptyThreatSet);
    }

    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for threat in &net.threats {
        let values = match opts.mode {
            RolloutMode::Expectation => expectation_rollout(net, &threat.threat_id, cfg)?,
            RolloutMode::MonteCarlo => {
                montecarlo_rollout(net, &threat.threat_id, cfg, opts.trials.max(1), opts.seed)?
            }
        };
        columns.insert(threat.threat_id.clone(), values);
    }

    let epochs = cfg.horizon as usize + 1;
    let mut aggregates = Vec::with_capacity(epochs);
    for tau in 0..epochs {
        let per_threat: BTreeMap<String, f64> = columns
            .iter()
            .map(|(id, vals)| (id.clone(), vals[tau]))
            .collect();
        aggregates.push(aggregate(&per_threat, opts.radix)?);
    }
    let normalized = normalize(&aggregates);

    let points = (0..epochs)
        .map(|tau| SituationPoint {
            tau: tau as u32,
            per_threat: columns
                .iter()
                .map(|(id, vals)| (id.clone(), vals[tau]))
                .collect(),
            aggregate: aggregates[tau],
            normalized: normalized[tau],
        })
        .collect();

    Ok(SituationSeries {
        scenario_id: scenario_id.to_string(),
        radix: opts.radix,
        points,
    })
}

/// Deterministic rollout: per connection, a running attempt counter
/// turns the policy's propagation into an infection as soon as the
/// cumulative success probability `1 - (1-p)^k` reaches one half. A
/// certain path fires on the first attempt; a rank-1 path (p = 0.2)
/// fires on the fourth.
fn expectation_rollout(
    net: &ScpnNet,
    threat_id: &str,
    cfg: &GameConfig,
) -> Result<Vec<f64>, SsaError> {
    let mut state = GameState::from_net(net, threat_id, 0)?;
    let mut attempts: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut values = Vec::with_capacity(cfg.horizon as usize + 1);
    for tau in 0..=cfg.horizon {
        let result = solve(&state, cfg);
        values.push(result.value);
        if tau == cfg.horizon {
            break;
        }
        let mut next = apply_defender(&state, &result.defender_policy);
        if let AttackerAction::Propagate { source, target } = &result.attacker_policy {
            if propagate_enabled(&next, source, target) {
                let p = firing_probability(
                    next.path(source, target)
                        .expect("enabled propagation has a path")
                        .exploitability,
                );
                let k = attempts
                    .entry((source.clone(), target.clone()))
                    .and_modify(|k| *k += 1)
                    .or_insert(1);
                if 1.0 - (1.0 - p).powi(*k as i32) >= 0.5 - 1e-12 {
                    next.node_mut(target)
                        .expect("enabled propagation has a target")
                        .infected = true;
                }
            }
        }
        next.tau = tau + 1;
        state = next;
    }
    Ok(values)
}

/// Stochastic rollout: every trial samples the policy's propagation
/// attempts with its own deterministic RNG stream, and the mean value
/// per epoch over all trials is returned.
fn montecarlo_rollout(
    net: &ScpnNet,
    threat_id: &str,
    cfg: &GameConfig,
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, SsaError> {
    let epochs = cfg.horizon as usize + 1;
    let mut sums = vec![0.0; epochs];
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial, threat_id);
        let mut state = GameState::from_net(net, threat_id, 0)?;
        for tau in 0..=cfg.horizon {
            let result = solve(&state, cfg);
            sums[tau as usize] += result.value;
            if tau == cfg.horizon {
                break;
            }
            let mut next = apply_defender(&state, &result.defender_policy);
            if let AttackerAction::Propagate { source, target } = &result.attacker_policy {
                if propagate_enabled(&next, source, target) {
                    let p = firing_probability(
                        next.path(source, target)
                            .expect("enabled propagation has a path")
                            .exploitability,
                    );
                    if rng.gen::<f64>() < p {
                        next.node_mut(target)
                            .expect("enabled propagation has a target")
                            .infected = true;
                    }
                }
            }
            next.tau = tau + 1;
            state = next;
        }
    }
    Ok(sums.into_iter().map(|s| s / f64::from(trials)).collect())
}

/// Deterministic per-trial RNG: the 32-byte seed embeds the caller
/// seed, the trial index, a hash of the threat id, and a domain tag, so
/// trials and threats never share a stream.
fn trial_rng(seed: u64, trial: u32, threat_id: &str) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&u64::from(trial).to_le_bytes());
    bytes[16..24].copy_from_slice(&fnv1a(threat_id.as_bytes()).to_le_bytes());
    bytes[24..32].copy_from_slice(b"ssa/mc/1");
    ChaCha8Rng::from_seed(bytes)
}

fn fnv1a(data: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in data {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Summary statistics of one situation curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStats {
    pub scenario_id: String,
    /// Largest un-normalized aggregate.
    pub peak: f64,
    /// First epoch attaining the peak.
    pub peak_tau: u32,
    /// First epoch whose normalized value reaches 0.5, measuring how
    /// fast the curve climbs halfway to its own maximum. `None` for a
    /// constant series, which never crosses.
    pub time_to_half_peak: Option<u32>,
    /// Trapezoid area under the un-normalized aggregate.
    pub auc: f64,
}

/// Side-by-side statistics of two curves plus a plain-text verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub left: SeriesStats,
    pub right: SeriesStats,
    /// `"equal"` for identical statistics; otherwise names which
    /// scenario is faster and which is higher impact.
    pub verdict: String,
}

/// Computes the summary statistics of one series.
pub fn series_stats(series: &SituationSeries) -> SeriesStats {
    let mut peak = f64::NEG_INFINITY;
    let mut peak_tau = 0;
    for point in &series.points {
        if point.aggregate > peak {
            peak = point.aggregate;
            peak_tau = point.tau;
        }
    }
    let time_to_half_peak = series
        .points
        .iter()
        .find(|p| p.normalized >= 0.5)
        .map(|p| p.tau);
    let auc = series
        .points
        .windows(2)
        .map(|w| (w[0].aggregate + w[1].aggregate) / 2.0)
        .sum();
    SeriesStats {
        scenario_id: series.scenario_id.clone(),
        peak,
        peak_tau,
        time_to_half_peak,
        auc,
    }
}

/// Compares two curves of the same horizon: which climbs to half of its
/// own peak sooner (faster attack effect) and which peaks higher
/// (higher impact).
pub fn compare(a: &SituationSeries, b: &SituationSeries) -> Result<ComparisonReport, SsaError> {
    if a.points.len() != b.points.len() {
        return Err(SsaError::HorizonMismatch {
            left: a.points.len(),
            right: b.points.len(),
        });
    }
    let left = series_stats(a);
    let right = series_stats(b);
    let verdict = verdict(&left, &right);
    Ok(ComparisonReport {
        left,
        right,
        verdict,
    })
}

fn verdict(left: &SeriesStats, right: &SeriesStats) -> String {
    if left.peak == right.peak
        && left.time_to_half_peak == right.time_to_half_peak
        && left.auc == right.auc
    {
        return "equal".to_string();
    }
    let speed = match (left.time_to_half_peak, right.time_to_half_peak) {
        (Some(l), Some(r)) if l < r => {
            format!(
                "{} is faster (time-to-half-peak {l} vs {r})",
                left.scenario_id
            )
        }
        (Some(l), Some(r)) if r < l => {
            format!(
                "{} is faster (time-to-half-peak {r} vs {l})",
                right.scenario_id
            )
        }
        (Some(l), None) => format!(
            "{} is faster (time-to-half-peak {l}; {} never crosses)",
            left.scenario_id, right.scenario_id
        ),
        (None, Some(r)) => format!(
            "{} is faster (time-to-half-peak {r}; {} never crosses)",
            right.scenario_id, left.scenario_id
        ),
        _ => "equal speed".to_string(),
    };
    let impact = if left.peak > right.peak {
        format!(
            "{} is higher impact (peak {:.6} vs {:.6})",
            left.scenario_id, left.peak, right.peak
        )
    } else if right.peak > left.peak {
        format!(
            "{} is higher impact (peak {:.6} vs {:.6})",
            right.scenario_id, right.peak, left.peak
        )
    } else {
        "equal impact".to_string()
    };
    format!("{speed}; {impact}")
}

/// Renders a series as CSV: header `tau,<threat ids>,aggregate,normalized`,
/// one row per epoch, six decimal places.
pub fn to_csv(series: &SituationSeries) -> String {
    let mut out = String::new();
    let threat_ids: Vec<&String> = series
        .points
        .first()
        .map(|p| p.per_threat.keys().collect())
        .unwrap_or_default();
    out.push_str("tau");
    for id in &threat_ids {
        let _ = write!(out, ",{id}");
    }
    out.push_str(",aggregate,normalized\n");
    for point in &series.points {
        let _ = write!(out, "{}", point.tau);
        for id in &threat_ids {
            let _ = write!(out, ",{:.6}", point.per_threat[*id]);
        }
        let _ = writeln!(out, ",{:.6},{:.6}", point.aggregate, point.normalized);
    }
    out
}
