use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Complexity;
use crate::pipeline::Stage;
use crate::session::ResponseKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub query: String,
    pub complexity: Complexity,
    pub expected_count: usize,
    pub actual_count: Option<usize>,
    pub kind: ResponseKind,
    pub match_filters: bool,
    pub match_count: bool,
    pub correct: bool,
    /// Why the pair was scored incorrect; empty when correct.
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumScore {
    pub complexity: Complexity,
    pub total: usize,
    pub correct: usize,
    /// `None` for an empty stratum.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLatency {
    pub stage: Stage,
    pub samples: usize,
    pub p50_us: u64,
    pub p95_us: u64,
    pub max_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    /// `None` when the suite is empty.
    pub accuracy: Option<f64>,
    pub accuracy_undefined: bool,
    pub strata: Vec<StratumScore>,
    pub cache_hits: usize,
    pub cache_hit_rate: Option<f64>,
    pub results: Vec<PairResult>,
    /// Wall-clock figures; left out of [`EvalReport::deterministic_json`].
    pub latencies: Vec<StageLatency>,
}

fn ratio(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl EvalReport {
    pub fn new(results: Vec<PairResult>, cache_hits: usize, durations: &BTreeMap<Stage, Vec<u64>>) -> Self {
        let total = results.len();
        let correct = results.iter().filter(|r| r.correct).count();
        let strata = Complexity::ALL
            .iter()
            .map(|&c| {
                let t = results.iter().filter(|r| r.complexity == c).count();
                let k = results.iter().filter(|r| r.complexity == c && r.correct).count();
                StratumScore {
                    complexity: c,
                    total: t,
                    correct: k,
                    accuracy: ratio(k, t),
                }
            })
            .collect();
        let latencies = durations
            .iter()
            .map(|(&stage, samples)| {
                let mut s = samples.clone();
                s.sort_unstable();
                StageLatency {
                    stage,
                    samples: s.len(),
                    p50_us: percentile(&s, 50.0),
                    p95_us: percentile(&s, 95.0),
                    max_us: s.last().copied().unwrap_or(0),
                }
            })
            .collect();
        Self {
            total,
            correct,
            accuracy: ratio(correct, total),
            accuracy_undefined: total == 0,
            strata,
            cache_hits,
            cache_hit_rate: ratio(cache_hits, total),
            results,
            latencies,
        }
    }

    pub fn stratum(&self, c: Complexity) -> &StratumScore {
        self.strata.iter().find(|s| s.complexity == c).expect("all strata present")
    }

    /// The report without timings, identical across runs of the same suite.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("latencies");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let pct = |a: Option<f64>| a.map_or_else(|| "undefined".to_string(), |a| format!("{:.1}%", a * 100.0));
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>6} {:>8} {:>10}", "stratum", "pairs", "correct", "accuracy");
        for s in &self.strata {
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>8} {:>10}",
                s.complexity.as_str(),
                s.total,
                s.correct,
                pct(s.accuracy)
            );
        }
        let _ = writeln!(out, "{:<10} {:>6} {:>8} {:>10}", "overall", self.total, self.correct, pct(self.accuracy));
        let _ = writeln!(out, "cache hit rate: {}", pct(self.cache_hit_rate));
        if !self.latencies.is_empty() {
            let _ = writeln!(out, "\n{:<14} {:>8} {:>10} {:>10} {:>10}", "stage", "samples", "p50 us", "p95 us", "max us");
            for l in &self.latencies {
                let _ = writeln!(
                    out,
                    "{:<14} {:>8} {:>10} {:>10} {:>10}",
                    l.stage.as_str(),
                    l.samples,
                    l.p50_us,
                    l.p95_us,
                    l.max_us
                );
            }
        }
        let wrong: Vec<&PairResult> = self.results.iter().filter(|r| !r.correct).collect();
        if !wrong.is_empty() {
            let _ = writeln!(out, "\nincorrect:");
            for r in wrong {
                let _ = writeln!(out, "  [{}] {} ({})", r.complexity.as_str(), r.query, r.reason);
            }
        }
        out
    }
}
