//! Recursive case analysis.
//!
//! Each case region runs the direct checks in order: vacuity, exit
//! unreachability, immediate exit, ranking synthesis. A case none of them
//! settles is split on an abduced condition φ into `pre ∧ φ` and the branches
//! of `pre ∧ ¬φ`, and the parts are analyzed in turn.
//!
//! Termination of the parts does not compose in general: a run may alternate
//! between two parts forever. A split therefore only counts towards a
//! terminating parent when its parts cannot reach each other in a cycle (the
//! phase gate), and a part is only terminating on its own when no run can
//! leave it while still looping.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::abduction::abduce_all;
use crate::linarith::{Checker, Conj, Dnf};
use crate::model::{rho_of, LoopSpec};
use crate::nonterm::{exit_unreachable, verify_recurrent, RecurrentCheck, RecurrentWitness};
use crate::ranking::{synthesize_linear_rf, verify_rf, RankingWitness};
use crate::stats::Stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Terminating,
    NonTerminating,
    PossiblyTerminating,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Terminating => "TERMINATING",
            Status::NonTerminating => "NON_TERMINATING",
            Status::PossiblyTerminating => "POSSIBLY_TERMINATING",
            Status::Unknown => "UNKNOWN",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [Status::Terminating, Status::NonTerminating, Status::PossiblyTerminating, Status::Unknown]
            .into_iter()
            .find(|st| st.as_str() == s)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a case got its verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A linear ranking function valid on the case.
    Ranking(RankingWitness),
    /// The case is a closed recurrent set.
    Recurrent(RecurrentWitness),
    /// Every iteration from the case leaves the loop.
    ImmediateExit,
    /// No iteration from the case leaves the loop, and the case is closed.
    ExitUnreachable(RecurrentWitness),
    /// The case has no state inside the guard.
    Vacuous,
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::Ranking(_) => "ranking",
            Witness::Recurrent(_) => "recurrent",
            Witness::ImmediateExit => "immediate_exit",
            Witness::ExitUnreachable(_) => "exit_unreachable",
            Witness::Vacuous => "vacuous",
        }
    }

    fn per_phase(&self) -> bool {
        matches!(self, Witness::Ranking(_) | Witness::ImmediateExit | Witness::Vacuous)
    }

    /// Terminating from every state of the case regardless of where runs go.
    fn intrinsic(&self) -> bool {
        matches!(self, Witness::ImmediateExit | Witness::Vacuous)
    }

    fn diverging(&self) -> bool {
        matches!(self, Witness::Recurrent(_) | Witness::ExitUnreachable(_))
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())?;
        match self {
            Witness::Ranking(w) => write!(f, " {w}"),
            Witness::Recurrent(w) | Witness::ExitUnreachable(w) => {
                f.write_str(" at ")?;
                for (i, (v, n)) in w.nonempty_witness.iter().enumerate() {
                    write!(f, "{}{v} = {n}", if i > 0 { ", " } else { "" })?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseNode {
    pub pre: Conj,
    pub status: Status,
    pub witness: Option<Witness>,
    pub split_condition: Option<Conj>,
    pub children: Vec<CaseNode>,
    pub depth: usize,
}

impl CaseNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&CaseNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    pub fn leaves(&self) -> Vec<&CaseNode> {
        self.walk().into_iter().filter(|n| n.is_leaf()).collect()
    }

    /// Deepest node depth in the subtree.
    pub fn height(&self) -> usize {
        self.children.iter().map(CaseNode::height).max().unwrap_or(self.depth)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub spec_name: String,
    pub root: CaseNode,
    pub overall: Status,
    pub stats: Stats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub max_depth: usize,
    pub max_support: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { max_depth: 4, max_support: 2 }
    }
}

/// A tree node before statuses are assigned.
struct Draft {
    pre: Conj,
    witness: Option<Witness>,
    split: Option<Conj>,
    gate: bool,
    children: Vec<Draft>,
    depth: usize,
}

impl Draft {
    fn leaf(pre: Conj, witness: Option<Witness>, depth: usize) -> Draft {
        Draft { pre, witness, split: None, gate: false, children: Vec::new(), depth }
    }

    /// Every run that stays inside the case terminates.
    fn per_phase(&self) -> bool {
        match &self.witness {
            Some(w) if self.children.is_empty() => w.per_phase(),
            _ => !self.children.is_empty() && self.gate && self.children.iter().all(Draft::per_phase),
        }
    }

    fn has_per_phase_leaf(&self) -> bool {
        if self.children.is_empty() {
            self.witness.as_ref().is_some_and(Witness::per_phase)
        } else {
            self.children.iter().any(Draft::has_per_phase_leaf)
        }
    }
}

struct Analyzer<'a> {
    spec: &'a LoopSpec,
    cfg: Config,
    ck: Checker,
    rhos: Vec<Conj>,
    psi_primed: Dnf,
}

/// Runs the case analysis.
pub fn analyze(spec: &LoopSpec, cfg: Config) -> AnalysisReport {
    let mut a = Analyzer {
        spec,
        cfg,
        ck: Checker::new(spec.semantics),
        rhos: rho_of(spec),
        psi_primed: spec.guard.prime(),
    };
    let draft = a.root();
    let root = a.finish(draft, false);
    AnalysisReport { spec_name: spec.name.clone(), overall: root.status, root, stats: a.ck.stats().clone() }
}

impl Analyzer<'_> {
    fn root(&mut self) -> Draft {
        let pres = self.spec.pre.disjuncts().to_vec();
        match pres.as_slice() {
            [] => Draft::leaf(Conj::bottom(), Some(Witness::Vacuous), 0),
            [only] => {
                let seeded = match self.spec.guard.disjuncts() {
                    [g] => only.and(g),
                    _ => only.clone(),
                };
                let pre = self.ck.simplify(&seeded);
                self.case(pre, 0)
            }
            _ => {
                // Several initial regions: one child per disjoint piece.
                let mut children = Vec::new();
                for (i, d) in pres.iter().enumerate() {
                    let earlier = Dnf::new(pres[..i].iter().cloned());
                    for piece in self.ck.and_not(d, &earlier).disjuncts() {
                        let piece = self.ck.simplify(piece);
                        if !piece.is_bottom() {
                            children.push(self.case(piece, 1));
                        }
                    }
                }
                let parts: Vec<Conj> = children.iter().map(|c: &Draft| c.pre.clone()).collect();
                let gate = phase_gate(&mut self.ck, &self.rhos, &self.psi_primed, &parts);
                Draft { pre: Conj::top(), witness: None, split: None, gate, children, depth: 0 }
            }
        }
    }

    fn guard_region(&self, pre: &Conj) -> Dnf {
        self.spec.guard.and_conj(pre)
    }

    fn case(&mut self, pre: Conj, depth: usize) -> Draft {
        let ck = &mut self.ck;
        let guarded = self.spec.guard.and_conj(&pre);
        if guarded.disjuncts().iter().all(|g| !ck.is_sat(&ck.normalize(g))) {
            return Draft::leaf(pre, Some(Witness::Vacuous), depth);
        }
        if self.spec.is_deterministic()
            && self.rhos.iter().all(|r| exit_unreachable(ck, r, &self.spec.guard, &pre))
        {
            if let Ok(RecurrentCheck::Certified(w)) = verify_recurrent(ck, self.spec, &pre) {
                return Draft::leaf(pre, Some(Witness::ExitUnreachable(w)), depth);
            }
        }
        let local: Vec<Conj> = self.rhos.iter().map(|r| pre.and(r)).collect();
        if immediate_exit_all(ck, &local, &self.psi_primed) {
            return Draft::leaf(pre, Some(Witness::ImmediateExit), depth);
        }
        if let Some(w) = synthesize_linear_rf(ck, &local) {
            if local.iter().all(|r| verify_rf(ck, r, &w)) {
                return Draft::leaf(pre, Some(Witness::Ranking(w)), depth);
            }
        }
        if depth >= self.cfg.max_depth {
            return Draft::leaf(pre, None, depth);
        }
        let region = self.spec.guard.and_conj(&pre);
        let cands = abduce_all(ck, &local, &region, &self.psi_primed, self.cfg.max_support);
        let mut first: Option<(Conj, Vec<Conj>)> = None;
        let mut chosen: Option<(Conj, Vec<Conj>, bool)> = None;
        for cand in cands {
            let Some(parts) = self.split(&pre, &cand.condition) else { continue };
            if phase_gate(&mut self.ck, &self.rhos, &self.psi_primed, &parts) {
                chosen = Some((cand.condition, parts, true));
                break;
            }
            if first.is_none() {
                first = Some((cand.condition, parts));
            }
        }
        let Some((phi, parts, gate)) = chosen.or_else(|| first.map(|(p, c)| (p, c, false))) else {
            return Draft::leaf(pre, None, depth);
        };
        let children = parts.into_iter().map(|p| self.case(p, depth + 1)).collect();
        Draft { pre, witness: None, split: Some(phi), gate, children, depth }
    }

    /// `pre ∧ φ` followed by the branches of `pre ∧ ¬φ`, keeping only parts
    /// that meet the guard. `None` unless both sides are nonempty.
    fn split(&mut self, pre: &Conj, phi: &Conj) -> Option<Vec<Conj>> {
        let inside = self.ck.simplify(&pre.and(phi));
        if !self.meets_guard(&inside) {
            return None;
        }
        let mut parts = vec![inside];
        let outside = self.ck.negate(&Dnf::from(phi.clone()));
        for b in outside.disjuncts() {
            let b = self.ck.simplify(&pre.and(b));
            if self.meets_guard(&b) {
                parts.push(b);
            }
        }
        (parts.len() > 1).then_some(parts)
    }

    fn meets_guard(&mut self, pre: &Conj) -> bool {
        if pre.is_bottom() {
            return false;
        }
        let region = self.guard_region(pre);
        region.disjuncts().iter().any(|g| {
            let g = self.ck.normalize(g);
            self.ck.is_sat(&g)
        })
    }

    /// No run leaves `pre` while staying in the loop.
    fn closed(&mut self, pre: &Conj) -> bool {
        let exit = self.ck.negate(&self.psi_primed);
        let stay = Dnf::from(pre.prime()).or(&exit);
        let rhos = self.rhos.clone();
        rhos.iter().all(|r| self.ck.entails(&pre.and(r), &stay))
    }

    /// Assigns statuses. `parent_full` means every run from the parent's
    /// region terminates.
    fn finish(&mut self, d: Draft, parent_full: bool) -> CaseNode {
        let per_phase = d.per_phase();
        let full = parent_full
            || d.witness.as_ref().is_some_and(|w| d.children.is_empty() && w.intrinsic())
            || (per_phase && self.closed(&d.pre));
        let any_per_phase_leaf = d.has_per_phase_leaf();
        let Draft { pre, mut witness, split, children, depth, .. } = d;
        let synthetic = split.is_none() && !children.is_empty();
        let children: Vec<CaseNode> = children.into_iter().map(|c| self.finish(c, full)).collect();

        let status = if witness.as_ref().is_some_and(Witness::diverging) {
            Status::NonTerminating
        } else if (full && !synthetic)
            || (synthetic && children.iter().all(|c| c.status == Status::Terminating))
        {
            Status::Terminating
        } else if !children.is_empty() && children.iter().all(|c| c.status == Status::NonTerminating) {
            match verify_recurrent(&mut self.ck, self.spec, &pre) {
                Ok(RecurrentCheck::Certified(w)) => {
                    witness = Some(Witness::Recurrent(w));
                    Status::NonTerminating
                }
                _ if synthetic => Status::NonTerminating,
                _ if any_per_phase_leaf => Status::PossiblyTerminating,
                _ => Status::Unknown,
            }
        } else if any_per_phase_leaf {
            Status::PossiblyTerminating
        } else {
            Status::Unknown
        };
        CaseNode { pre, status, witness, split_condition: split, children, depth }
    }
}

fn immediate_exit_all(ck: &mut Checker, local: &[Conj], psi_primed: &Dnf) -> bool {
    let exit = ck.negate(psi_primed);
    let mut any = false;
    for r in local {
        if !ck.is_sat(&ck.normalize(r)) {
            continue;
        }
        if !ck.entails(r, &exit) {
            return false;
        }
        any = true;
    }
    any
}

/// Whether the parts of a split can only be visited in some fixed order.
///
/// There is an edge from part `i` to part `j` when one iteration can go from
/// a state of `i` to a state of `j` that is still inside the loop. The gate
/// holds when that graph has no cycle, so every run passes through the parts
/// in topological order and each part is entered at most once. With two
/// parts this says one of them is closed.
pub fn phase_gate(ck: &mut Checker, rhos: &[Conj], psi_primed: &Dnf, parts: &[Conj]) -> bool {
    let n = parts.len();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let target = psi_primed.and_conj(&parts[j].prime());
            let reach = rhos.iter().any(|r| {
                let from = parts[i].and(r);
                target.disjuncts().iter().any(|t| {
                    let c = ck.normalize(&from.and(t));
                    ck.is_sat(&c)
                })
            });
            if reach {
                edges[i].push(j);
            }
        }
    }
    !has_cycle(&edges)
}

fn has_cycle(edges: &[Vec<usize>]) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit(u: usize, edges: &[Vec<usize>], mark: &mut [u8]) -> bool {
        mark[u] = 1;
        for &v in &edges[u] {
            if mark[v] == 1 || (mark[v] == 0 && visit(v, edges, mark)) {
                return true;
            }
        }
        mark[u] = 2;
        false
    }
    let mut mark = vec![0u8; edges.len()];
    (0..edges.len()).any(|u| mark[u] == 0 && visit(u, edges, &mut mark))
}

/// Leaf regions grouped by verdict, each intersected with the guard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub terminating_pre: Dnf,
    pub nonterminating_pre: Dnf,
    pub unknown_pre: Dnf,
}

/// Collects the maximal settled regions of the tree. A node that is
/// TERMINATING or NON_TERMINATING counts as a whole; other nodes are
/// refined by their children, and unsettled leaves go to `unknown_pre`.
pub fn summarize(spec: &LoopSpec, report: &AnalysisReport) -> Summary {
    let mut ck = Checker::new(spec.semantics);
    let mut s = Summary { terminating_pre: Dnf::bottom(), nonterminating_pre: Dnf::bottom(), unknown_pre: Dnf::bottom() };
    collect(&mut ck, spec, &report.root, &mut s);
    s
}

fn collect(ck: &mut Checker, spec: &LoopSpec, n: &CaseNode, s: &mut Summary) {
    let target = match n.status {
        Status::Terminating => &mut s.terminating_pre,
        Status::NonTerminating => &mut s.nonterminating_pre,
        _ if !n.is_leaf() => {
            for c in &n.children {
                collect(ck, spec, c, s);
            }
            return;
        }
        _ => &mut s.unknown_pre,
    };
    let mut parts = Vec::new();
    for g in spec.guard.disjuncts() {
        let p = ck.simplify(&n.pre.and(g));
        if !p.is_bottom() {
            parts.push(p);
        }
    }
    *target = target.or(&Dnf::new(parts));
}

/// Re-checks every claim in a report from scratch. Returns one message per
/// violation; an empty list means the report is consistent.
pub fn check_report(spec: &LoopSpec, report: &AnalysisReport) -> Vec<String> {
    let mut ck = Checker::new(spec.semantics);
    let rhos = rho_of(spec);
    let mut out = Vec::new();
    if report.overall != report.root.status {
        out.push(format!("overall {} differs from root status {}", report.overall, report.root.status));
    }
    check_node(&mut ck, spec, &rhos, &report.root, &mut out);
    out
}

fn check_node(ck: &mut Checker, spec: &LoopSpec, rhos: &[Conj], n: &CaseNode, out: &mut Vec<String>) {
    let at = &n.pre;
    let local: Vec<Conj> = rhos.iter().map(|r| at.and(r)).collect();
    let psi_primed = spec.guard.prime();
    let synthetic = n.depth == 0 && n.split_condition.is_none() && !n.children.is_empty();
    if n.split_condition.is_some() == n.children.is_empty() && !synthetic {
        out.push(format!("[{at}] split condition and children disagree"));
    }
    match &n.witness {
        Some(Witness::Ranking(w)) => {
            if !local.iter().all(|r| verify_rf(ck, r, w)) {
                out.push(format!("[{at}] ranking function {w} does not verify"));
            }
            if let Ok(RecurrentCheck::Certified(_)) = verify_recurrent(ck, spec, at) {
                out.push(format!("[{at}] region is both ranked and recurrent"));
            }
        }
        Some(Witness::Recurrent(w)) | Some(Witness::ExitUnreachable(w)) => {
            if w.condition != *at {
                out.push(format!("[{at}] recurrent witness is for {}", w.condition));
            }
            let point_ok = at.holds(&w.nonempty_witness) == Some(true)
                && spec.guard.holds(&w.nonempty_witness) == Some(true)
                && (spec.semantics == crate::linarith::Semantics::Rat
                    || w.nonempty_witness.values().all(|v| v.is_integer()));
            if !point_ok {
                out.push(format!("[{at}] recurrent witness point is outside the region"));
            }
            if !matches!(verify_recurrent(ck, spec, at), Ok(RecurrentCheck::Certified(_))) {
                out.push(format!("[{at}] recurrent set does not verify"));
            }
            if let Some(rf) = synthesize_linear_rf(ck, &local) {
                if local.iter().all(|r| verify_rf(ck, r, &rf)) {
                    out.push(format!("[{at}] region is both recurrent and ranked by {rf}"));
                }
            }
        }
        Some(Witness::ImmediateExit) => {
            if !immediate_exit_all(ck, &local, &psi_primed) {
                out.push(format!("[{at}] immediate exit does not hold"));
            }
        }
        Some(Witness::Vacuous) => {
            let g = spec.guard.and_conj(at);
            if g.disjuncts().iter().any(|d| ck.is_sat(&ck.normalize(d))) {
                out.push(format!("[{at}] vacuous region meets the guard"));
            }
        }
        None => {}
    }
    match n.status {
        Status::Terminating if n.is_leaf() && !n.witness.as_ref().is_some_and(Witness::per_phase) => {
            out.push(format!("[{at}] TERMINATING leaf without a termination witness"));
        }
        Status::Terminating if !n.is_leaf() => {
            if n.children.iter().any(|c| c.status != Status::Terminating) {
                out.push(format!("[{at}] TERMINATING node has a child that is not"));
            }
            let parts: Vec<Conj> = n.children.iter().map(|c| c.pre.clone()).collect();
            if !synthetic && !phase_gate(ck, rhos, &psi_primed, &parts) {
                out.push(format!("[{at}] TERMINATING split fails the phase gate"));
            }
        }
        Status::NonTerminating if !n.witness.as_ref().is_some_and(Witness::diverging) && !synthetic => {
            out.push(format!("[{at}] NON_TERMINATING node without a recurrent witness"));
        }
        _ => {}
    }
    if !n.children.is_empty() {
        check_partition(ck, spec, n, out);
    }
    for c in &n.children {
        if c.depth != n.depth + 1 {
            out.push(format!("[{}] depth {} under depth {}", c.pre, c.depth, n.depth));
        }
        check_node(ck, spec, rhos, c, out);
    }
}

fn check_partition(ck: &mut Checker, spec: &LoopSpec, n: &CaseNode, out: &mut Vec<String>) {
    let parts: Vec<&Conj> = n.children.iter().map(|c| &c.pre).collect();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let both = ck.normalize(&parts[i].and(parts[j]));
            if ck.is_sat(&both) {
                out.push(format!("[{}] children {} and {} overlap", n.pre, parts[i], parts[j]));
            }
        }
    }
    let union = Dnf::new(parts.iter().map(|p| (*p).clone()));
    for g in spec.guard.disjuncts() {
        let region = ck.normalize(&n.pre.and(g));
        if !ck.entails(&region, &union) {
            out.push(format!("[{}] children do not cover the guarded region", n.pre));
        }
    }
}

/// Variables mentioned anywhere in the tree, for callers that print models.
pub fn tree_vars(n: &CaseNode) -> BTreeSet<crate::linarith::VarId> {
    n.walk().iter().flat_map(|m| m.pre.vars()).collect()
}
