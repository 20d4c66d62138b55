//! Report types and their text / CSV / JSON renderings.
//!
//! Numbers are printed with the shortest representation that parses back to
//! the same `f64`, so reports are byte-stable across runs and platforms.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{Direction, FormStats, TailBound};
use crate::mgf::EnvelopeCheck;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal form of `v`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise to JSON");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub x: f64,
    pub threshold: f64,
    pub prob_bound: f64,
}

impl From<TailBound> for BoundRow {
    fn from(b: TailBound) -> Self {
        Self {
            x: b.x,
            threshold: b.threshold,
            prob_bound: b.prob_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub direction: Direction,
    pub dim: usize,
    pub stats: FormStats,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        json(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,threshold,prob_bound\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", fmt_num(r.x), fmt_num(r.threshold), fmt_num(r.prob_bound));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(label) = &self.label {
            let _ = writeln!(out, "form: {label}");
        }
        let _ = writeln!(out, "dimension: {}", self.dim);
        write_stats(&mut out, &self.stats);
        let _ = writeln!(out, "direction: {}", self.direction);
        let _ = writeln!(out, "{:>24} {:>24} {:>24}", "x", "threshold", "exp(-x)");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>24} {:>24} {:>24}",
                fmt_num(r.x),
                fmt_num(r.threshold),
                fmt_num(r.prob_bound)
            );
        }
        out
    }
}

fn write_stats(out: &mut String, stats: &FormStats) {
    let _ = writeln!(out, "mean: {}", fmt_num(stats.mean));
    let _ = writeln!(out, "u_sq: {}", fmt_num(stats.u_sq));
    let _ = writeln!(out, "a_plus: {}", fmt_num(stats.a_plus));
    let _ = writeln!(out, "a_minus: {}", fmt_num(stats.a_minus));
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertReport {
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub direction: Direction,
    pub stats: FormStats,
    pub deviation: f64,
    pub x: f64,
    pub prob_bound: f64,
    pub threshold: f64,
}

impl InvertReport {
    pub fn to_json(&self) -> String {
        json(self)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "deviation,x,prob_bound,threshold\n{},{},{},{}\n",
            fmt_num(self.deviation),
            fmt_num(self.x),
            fmt_num(self.prob_bound),
            fmt_num(self.threshold)
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(label) = &self.label {
            let _ = writeln!(out, "form: {label}");
        }
        write_stats(&mut out, &self.stats);
        let _ = writeln!(out, "direction: {}", self.direction);
        let _ = writeln!(out, "deviation: {}", fmt_num(self.deviation));
        let _ = writeln!(out, "x: {}", fmt_num(self.x));
        let _ = writeln!(out, "exp(-x): {}", fmt_num(self.prob_bound));
        let _ = writeln!(out, "threshold: {}", fmt_num(self.threshold));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyMetadata {
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub direction: Direction,
    pub seed: u64,
    pub n: u64,
    pub chunk_size: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub x: f64,
    pub threshold: f64,
    pub bound: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub metadata: VerifyMetadata,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        json(self)
    }

    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "# tool_version={}", m.tool_version);
        if let Some(label) = &m.label {
            let _ = writeln!(out, "# label={label}");
        }
        let _ = writeln!(out, "# direction={}", m.direction);
        let _ = writeln!(out, "# seed={}", m.seed);
        let _ = writeln!(out, "# n={}", m.n);
        let _ = writeln!(out, "# chunk_size={}", m.chunk_size);
        let _ = writeln!(out, "# confidence={}", fmt_num(m.confidence));
        out.push_str("x,threshold,bound,p_hat,ci_low,ci_high,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(r.x),
                fmt_num(r.threshold),
                fmt_num(r.bound),
                fmt_num(r.p_hat),
                fmt_num(r.ci_low),
                fmt_num(r.ci_high),
                r.pass
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "verify {} tail: n = {}, seed = {}, {}% Clopper-Pearson",
            m.direction,
            m.n,
            m.seed,
            fmt_num(100.0 * m.confidence)
        );
        let _ = writeln!(
            out,
            "{:>10} {:>22} {:>22} {:>22} {:>22} {:>5}",
            "x", "threshold", "exp(-x)", "p_hat", "ci_low", "pass"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>10} {:>22} {:>22} {:>22} {:>22} {:>5}",
                fmt_num(r.x),
                fmt_num(r.threshold),
                fmt_num(r.bound),
                fmt_num(r.p_hat),
                fmt_num(r.ci_low),
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfReport {
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(flatten)]
    pub check: EnvelopeCheck,
}

impl MgfReport {
    pub fn to_json(&self) -> String {
        json(self)
    }

    pub fn to_csv(&self) -> String {
        let c = &self.check;
        format!(
            "points,y_max,max_slack,worst_y,violations,passed\n{},{},{},{},{},{}\n",
            c.points,
            fmt_num(c.y_max),
            fmt_num(c.max_slack),
            fmt_num(c.worst_y),
            c.violations,
            self.passed
        )
    }

    pub fn to_text(&self) -> String {
        let c = &self.check;
        let mut out = String::new();
        if let Some(label) = &self.label {
            let _ = writeln!(out, "form: {label}");
        }
        let _ = writeln!(out, "grid: {} points on (0, {}]", c.points, fmt_num(c.y_max));
        let _ = writeln!(out, "max(lhs - rhs): {} at y = {}", fmt_num(c.max_slack), fmt_num(c.worst_y));
        let _ = writeln!(out, "violations: {}", c.violations);
        if let Some(i) = c.first_violation {
            let _ = writeln!(out, "first violation at grid index {i}");
        }
        let _ = writeln!(out, "result: {}", if self.passed { "pass" } else { "FAIL" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [1.0, 0.1, 11.472_135_954_999_58, 1e-300, 2.5e20, -0.0] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_num(1.0), "1.0");
        assert_eq!(fmt_num(1e-7), "1e-7");
    }
}
