//! Bug report assembly, deduplication, and rendering.

use std::fmt::Write as _;

use indexmap::map::Entry;
use indexmap::IndexMap;
use serde::Serialize;

use crate::checkers::CheckerId;
use crate::symexec::{ExplodedGraph, NodeId};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    /// Fresh from the executor; refutation has not run.
    Candidate,
    /// Survived refutation (or the solver could not decide).
    Confirmed,
    /// Path constraints proven unsatisfiable; this is a false positive.
    Refuted,
}

#[derive(Clone, Debug)]
pub struct BugReport {
    pub checker: CheckerId,
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// Root-to-violation node sequence in the exploded graph.
    pub path: Vec<NodeId>,
    pub status: ReportStatus,
}

impl BugReport {
    pub fn from_epsilon(graph: &ExplodedGraph, eps: NodeId, file: &str) -> BugReport {
        let hyp = graph
            .node(eps)
            .hypothesis()
            .expect("report requested for a non-violation node");
        BugReport {
            checker: hyp.checker,
            file: file.to_string(),
            line: hyp.loc.line,
            col: hyp.loc.col,
            message: hyp.message.clone(),
            path: graph.path_to(eps),
            status: ReportStatus::Candidate,
        }
    }

    /// Reports are considered the same bug when checker and location agree.
    pub fn key(&self) -> (CheckerId, u32, u32) {
        (self.checker, self.line, self.col)
    }

    pub fn epsilon(&self) -> NodeId {
        *self.path.last().expect("report path is never empty")
    }

    pub fn path_length(&self) -> usize {
        self.path.len()
    }
}

/// All candidate reports of a graph in discovery order.
pub fn collect_reports(graph: &ExplodedGraph, file: &str) -> Vec<BugReport> {
    graph
        .epsilons
        .iter()
        .map(|&e| BugReport::from_epsilon(graph, e, file))
        .collect()
}

/// Keep one report per (checker, location): the one with the shortest path,
/// first-discovered winning ties. Output preserves first-discovery order of
/// the keys.
pub fn dedup(reports: Vec<BugReport>) -> Vec<BugReport> {
    let mut best: IndexMap<(CheckerId, u32, u32), BugReport> = IndexMap::new();
    for r in reports {
        match best.entry(r.key()) {
            Entry::Occupied(mut e) => {
                if r.path.len() < e.get().path.len() {
                    *e.get_mut() = r;
                }
            }
            Entry::Vacant(e) => {
                e.insert(r);
            }
        }
    }
    best.into_values().collect()
}

/// Clang-style text rendering: location line, offending source line, caret,
/// and a trailing count. Refuted reports are hidden unless requested, and
/// never count as warnings.
pub fn render_text(reports: &[BugReport], source: &str, show_refuted: bool) -> String {
    let mut out = String::new();
    for r in reports {
        let refuted = r.status == ReportStatus::Refuted;
        if refuted && !show_refuted {
            continue;
        }
        let marker = if refuted { " [refuted]" } else { "" };
        let _ = writeln!(
            out,
            "{}:{}:{}: warning: {}{marker}",
            r.file, r.line, r.col, r.message
        );
        if let Some(line) = source.lines().nth(r.line as usize - 1) {
            let _ = writeln!(out, "{line}");
            let _ = writeln!(out, "{:>width$}", "^", width = r.col as usize);
        }
    }
    let n = reports
        .iter()
        .filter(|r| r.status != ReportStatus::Refuted)
        .count();
    let s = if n == 1 { "" } else { "s" };
    let _ = writeln!(out, "{n} warning{s} generated.");
    out
}

#[derive(Serialize)]
struct ReportJson<'a> {
    checker: &'a str,
    file: &'a str,
    line: u32,
    col: u32,
    message: &'a str,
    status: ReportStatus,
    path_length: usize,
}

/// JSON rendering: an array of objects with a fixed key order. Same
/// refuted-filtering contract as the text renderer.
pub fn render_json(reports: &[BugReport], show_refuted: bool) -> String {
    let items: Vec<ReportJson> = reports
        .iter()
        .filter(|r| show_refuted || r.status != ReportStatus::Refuted)
        .map(|r| ReportJson {
            checker: r.checker.name(),
            file: &r.file,
            line: r.line,
            col: r.col,
            message: &r.message,
            status: r.status,
            path_length: r.path_length(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&items).expect("report serialization");
    s.push('\n');
    s
}
