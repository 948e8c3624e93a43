//! Flat `key=value` mapping reports.
//!
//! A stats record is eight lines in a fixed order:
//!
//! ```text
//! gate_count=12
//! dff_count=3
//! splitter_count=4
//! logical_depth=5
//! worst_stage_delay=2
//! psd=10
//! runtime_s=0.000812
//! iterations=5
//! ```
//!
//! Reals use the shortest text that parses back to the same value. A run
//! report prefixes one record with `phase1.` (after balancing, before PSD
//! tuning) and one with `final.`, then adds a few run-level keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::genlib::CellLibrary;
use crate::mapped::MappedNetwork;
use crate::peephole::{worst_stage_delay, StageDelayModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStats {
    pub gate_count: usize,
    pub dff_count: usize,
    pub splitter_count: usize,
    pub logical_depth: u32,
    pub worst_stage_delay: f64,
    pub psd: f64,
    pub runtime_s: f64,
    pub iterations: usize,
}

impl MapStats {
    pub fn measure(
        net: &MappedNetwork,
        lib: &CellLibrary,
        model: &StageDelayModel,
        runtime_s: f64,
        iterations: usize,
    ) -> Self {
        let depth = net.logical_depth();
        let worst = if depth == 0 {
            0.0
        } else {
            worst_stage_delay(net, lib, model)
        };
        MapStats {
            gate_count: net.gate_count(),
            dff_count: net.dff_count(),
            splitter_count: net.splitter_count(),
            logical_depth: depth,
            worst_stage_delay: worst,
            psd: worst * depth as f64,
            runtime_s,
            iterations,
        }
    }

    fn fields(&self) -> [(&'static str, String); 8] {
        [
            ("gate_count", self.gate_count.to_string()),
            ("dff_count", self.dff_count.to_string()),
            ("splitter_count", self.splitter_count.to_string()),
            ("logical_depth", self.logical_depth.to_string()),
            ("worst_stage_delay", self.worst_stage_delay.to_string()),
            ("psd", self.psd.to_string()),
            ("runtime_s", self.runtime_s.to_string()),
            ("iterations", self.iterations.to_string()),
        ]
    }
}

/// The stats record as `key=value` lines.
pub fn write_report(stats: &MapStats) -> String {
    write_prefixed(stats, "")
}

fn write_prefixed(stats: &MapStats, prefix: &str) -> String {
    let mut s = String::new();
    for (k, v) in stats.fields() {
        let _ = writeln!(s, "{prefix}{k}={v}");
    }
    s
}

/// Everything the CLI reports about one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub model: String,
    pub mode: &'static str,
    pub cut_size: usize,
    pub phase1: MapStats,
    pub final_stats: MapStats,
    /// DFFs balancing gate inputs in the final network.
    pub balance_dffs: usize,
    /// DFFs aligning primary outputs (zero unless requested).
    pub output_dffs: usize,
    pub dropped_cuts: usize,
    pub accepted_moves: usize,
}

pub fn write_run_report(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model={}", r.model);
    let _ = writeln!(s, "mode={}", r.mode);
    let _ = writeln!(s, "cut_size={}", r.cut_size);
    s.push_str(&write_prefixed(&r.phase1, "phase1."));
    s.push_str(&write_prefixed(&r.final_stats, "final."));
    let _ = writeln!(s, "final.dff_count.balance={}", r.balance_dffs);
    let _ = writeln!(s, "final.dff_count.outputs={}", r.output_dffs);
    let _ = writeln!(s, "cuts_dropped={}", r.dropped_cuts);
    let _ = writeln!(s, "peephole_accepted={}", r.accepted_moves);
    s
}

/// Parse `key=value` lines into a map (blank lines and `#` comments ignored).
pub fn parse_report(text: &str) -> Result<BTreeMap<String, String>, ParseError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ParseError::syntax(i + 1, 1, "expected key=value"));
        };
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ParseError::syntax(i + 1, 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> MapStats {
        MapStats {
            gate_count: 4,
            dff_count: 1,
            splitter_count: 0,
            logical_depth: 2,
            worst_stage_delay: 0.1 + 0.2,
            psd: (0.1 + 0.2) * 2.0,
            runtime_s: 0.5,
            iterations: 5,
        }
    }

    #[test]
    fn exactly_the_eight_fields() {
        let text = write_report(&stats());
        let map = parse_report(&text).unwrap();
        let keys: Vec<&str> = map.keys().map(|s| s.as_str()).collect();
        assert_eq!(
            keys,
            [
                "dff_count",
                "gate_count",
                "iterations",
                "logical_depth",
                "psd",
                "runtime_s",
                "splitter_count",
                "worst_stage_delay"
            ]
        );
        assert_eq!(map["logical_depth"], "2");
        assert_eq!(map["dff_count"], "1");
    }

    #[test]
    fn reals_round_trip() {
        let text = write_report(&stats());
        let map = parse_report(&text).unwrap();
        let w: f64 = map["worst_stage_delay"].parse().unwrap();
        let p: f64 = map["psd"].parse().unwrap();
        let d: f64 = map["logical_depth"].parse().unwrap();
        assert_eq!(w, 0.1 + 0.2);
        assert_eq!(p, w * d);
    }

    #[test]
    fn run_report_prefixes() {
        let r = RunReport {
            model: "m".into(),
            mode: "sfq",
            cut_size: 4,
            phase1: stats(),
            final_stats: stats(),
            balance_dffs: 1,
            output_dffs: 0,
            dropped_cuts: 0,
            accepted_moves: 0,
        };
        let map = parse_report(&write_run_report(&r)).unwrap();
        assert!(map.contains_key("phase1.psd"));
        assert!(map.contains_key("final.psd"));
        assert_eq!(map["final.dff_count.outputs"], "0");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_report("a=1\nb\n").is_err());
        assert!(parse_report("a=1\na=2\n").is_err());
    }
}
