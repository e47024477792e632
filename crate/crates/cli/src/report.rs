//! Serializable form of analysis reports, and the text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use loopcase_core::driver::{AnalysisReport, CaseNode, Witness};
use loopcase_core::linarith::Model;
use loopcase_core::nonterm::RecurrentWitness;
use loopcase_core::stats::Stats;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDto {
    pub spec_name: String,
    pub overall: String,
    pub stats: StatsDto,
    pub root: NodeDto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsDto {
    pub sat_checks: u64,
    pub entailment_checks: u64,
    pub fm_eliminations: u64,
    pub candidates_tried: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDto {
    pub pre: String,
    pub status: String,
    pub witness: Option<WitnessDto>,
    pub split_condition: Option<String>,
    pub children: Vec<NodeDto>,
}

/// Rationals are written as `n` or `n/d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessDto {
    Ranking { function: String, bound: String, decrease: String },
    Recurrent { condition: String, state: BTreeMap<String, String>, closure_certified: bool },
    ImmediateExit,
    ExitUnreachable { condition: String, state: BTreeMap<String, String>, closure_certified: bool },
    Vacuous,
}

impl From<&AnalysisReport> for ReportDto {
    fn from(r: &AnalysisReport) -> Self {
        ReportDto {
            spec_name: r.spec_name.clone(),
            overall: r.overall.to_string(),
            stats: StatsDto::from(&r.stats),
            root: NodeDto::from(&r.root),
        }
    }
}

impl From<&Stats> for StatsDto {
    fn from(s: &Stats) -> Self {
        StatsDto {
            sat_checks: s.sat_checks,
            entailment_checks: s.entailment_checks,
            fm_eliminations: s.fm_eliminations,
            candidates_tried: s.candidates_tried,
        }
    }
}

impl From<&CaseNode> for NodeDto {
    fn from(n: &CaseNode) -> Self {
        NodeDto {
            pre: n.pre.to_string(),
            status: n.status.to_string(),
            witness: n.witness.as_ref().map(WitnessDto::from),
            split_condition: n.split_condition.as_ref().map(ToString::to_string),
            children: n.children.iter().map(NodeDto::from).collect(),
        }
    }
}

fn state(m: &Model) -> BTreeMap<String, String> {
    m.iter().map(|(v, q)| (v.to_string(), q.to_string())).collect()
}

fn recurrent(w: &RecurrentWitness) -> (String, BTreeMap<String, String>, bool) {
    (w.condition.to_string(), state(&w.nonempty_witness), w.closure_certified)
}

impl From<&Witness> for WitnessDto {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Ranking(r) => WitnessDto::Ranking {
                function: r.function().to_string(),
                bound: r.bound.to_string(),
                decrease: r.decrease.to_string(),
            },
            Witness::Recurrent(r) => {
                let (condition, state, closure_certified) = recurrent(r);
                WitnessDto::Recurrent { condition, state, closure_certified }
            }
            Witness::ExitUnreachable(r) => {
                let (condition, state, closure_certified) = recurrent(r);
                WitnessDto::ExitUnreachable { condition, state, closure_certified }
            }
            Witness::ImmediateExit => WitnessDto::ImmediateExit,
            Witness::Vacuous => WitnessDto::Vacuous,
        }
    }
}

/// Indented tree, one node per line, ending with the overall verdict.
pub fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    writeln!(out, "spec: {}", r.spec_name).unwrap();
    render_node(&mut out, &r.root, 0);
    let s = &r.stats;
    writeln!(
        out,
        "stats: sat_checks={} entailment_checks={} fm_eliminations={} candidates_tried={}",
        s.sat_checks, s.entailment_checks, s.fm_eliminations, s.candidates_tried
    )
    .unwrap();
    out
}

fn render_node(out: &mut String, n: &CaseNode, indent: usize) {
    let pad = "  ".repeat(indent);
    write!(out, "{pad}[{}] {}", n.pre, n.status).unwrap();
    if let Some(w) = &n.witness {
        write!(out, " by {w}").unwrap();
    }
    if let Some(phi) = &n.split_condition {
        write!(out, ", split on {phi}").unwrap();
    }
    out.push('\n');
    for c in &n.children {
        render_node(out, c, indent + 1);
    }
}
