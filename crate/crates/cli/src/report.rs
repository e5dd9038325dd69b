//! Solve reports: `key=value` lines followed by a JSON block.

use lowrank_spca::{SolveReport, SweepCounters};
use serde::{Deserialize, Serialize};

/// Separates the flat lines from the JSON document.
pub const JSON_MARKER: &str = "--- json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub intersections_computed: u64,
    pub intersections_visited: u64,
    pub distinct_supports: u64,
    pub fallbacks: u64,
}

impl From<SweepCounters> for Counters {
    fn from(c: SweepCounters) -> Self {
        Counters {
            intersections_computed: c.intersections_computed,
            intersections_visited: c.intersections_visited,
            distinct_supports: c.distinct_supports,
            fallbacks: c.fallbacks,
        }
    }
}

/// Everything one `solve` run produces. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: String,
    pub format: String,
    pub algorithm: String,
    pub path: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub effective_k: usize,
    pub sigma: f64,
    pub support: Vec<usize>,
    pub loadings: Vec<f64>,
    pub objective_singular: f64,
    pub objective_quadratic: f64,
    pub candidates: usize,
    pub wall_time_s: f64,
    pub counters: Option<Counters>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        input: String,
        format: &str,
        algorithm: &str,
        n: usize,
        d: usize,
        k: usize,
        sigma: f64,
        report: &SolveReport,
        wall_time_s: f64,
    ) -> Self {
        RunReport {
            input,
            format: format.to_string(),
            algorithm: algorithm.to_string(),
            path: report.path.as_str().to_string(),
            n,
            d,
            k,
            effective_k: report.solution.sparsity,
            sigma,
            support: report.solution.support.indices().to_vec(),
            loadings: report.solution.vector.clone(),
            objective_singular: report.solution.objective_singular,
            objective_quadratic: report.solution.objective_quadratic,
            candidates: report.candidates,
            wall_time_s,
            counters: report.counters.map(Counters::from),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("input", self.input.clone());
        kv("format", self.format.clone());
        kv("algorithm", self.algorithm.clone());
        kv("path", self.path.clone());
        kv("n", self.n.to_string());
        kv("d", self.d.to_string());
        kv("k", self.k.to_string());
        kv("effective_k", self.effective_k.to_string());
        kv("sigma", self.sigma.to_string());
        kv("support", join(&self.support));
        kv("loadings", join(&self.loadings));
        kv("objective_singular", self.objective_singular.to_string());
        kv("objective_quadratic", self.objective_quadratic.to_string());
        kv("candidates", self.candidates.to_string());
        kv("wall_time_s", self.wall_time_s.to_string());
        if let Some(c) = &self.counters {
            kv("intersections_computed", c.intersections_computed.to_string());
            kv("intersections_visited", c.intersections_visited.to_string());
            kv("distinct_supports", c.distinct_supports.to_string());
            kv("fallbacks", c.fallbacks.to_string());
        }
        out.push_str(JSON_MARKER);
        out.push('\n');
        out.push_str(&serde_json::to_string_pretty(self).expect("report is plain data"));
        out.push('\n');
        out
    }

    /// Reads back the JSON block of [`RunReport::render`].
    pub fn parse(text: &str) -> Option<RunReport> {
        let (_, json) = text.split_once(JSON_MARKER)?;
        serde_json::from_str(json.trim()).ok()
    }
}
