//! Exact linear rational arithmetic.
//!
//! Terms, constraints, polyhedral conjunctions and disjunctive normal forms
//! over named variables, with satisfiability, entailment, projection and
//! negation decided by Fourier–Motzkin elimination.

mod atom;
mod fm;
mod formula;
mod term;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

pub use atom::{Atom, Relop};
pub use formula::{Conj, Dnf, Substitute};
pub use term::{int, is_valid_name, ratio, LinTerm, Model, Rational, VarId};

use crate::stats::Stats;

/// Value domain of program variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Integer-valued variables; strict atoms are tightened before solving.
    #[default]
    Int,
    /// Rational-valued variables.
    Rat,
}

/// Outcome of a satisfiability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

/// Decision procedures with a fixed value domain and running counters.
///
/// Under [`Semantics::Int`] every query is answered for the integer
/// tightening of its atoms, which is exact for unsatisfiability over the
/// integers only in one direction: `Unsat` is sound, `Sat` means the
/// tightened system has a rational point.
#[derive(Clone, Debug, Default)]
pub struct Checker {
    semantics: Semantics,
    stats: Stats,
}

impl Checker {
    pub fn new(semantics: Semantics) -> Self {
        Checker { semantics, stats: Stats::default() }
    }

    pub fn rational() -> Self {
        Checker::new(Semantics::Rat)
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut Stats {
        &mut self.stats
    }

    fn int(&self) -> bool {
        self.semantics == Semantics::Int
    }

    /// Applies integer tightening when the domain is integral.
    pub fn normalize(&self, c: &Conj) -> Conj {
        if self.int() {
            c.tighten_int()
        } else {
            c.clone()
        }
    }

    pub fn sat(&mut self, c: &Conj) -> SatResult {
        self.stats.sat_checks += 1;
        let mut elim = fm::Eliminator::new(self.int());
        let mut stages = Vec::new();
        let result = elim.project(c.atoms().to_vec(), &|_| true, &mut stages);
        self.stats.fm_eliminations += elim.steps;
        if result.is_none() {
            return SatResult::Unsat;
        }
        let mut model = Model::new();
        fm::back_substitute(&stages, &mut model);
        for v in c.vars() {
            model.entry(v).or_insert_with(|| int(0));
        }
        debug_assert_eq!(c.holds(&model), Some(true), "witness for {c} violates it");
        SatResult::Sat(model)
    }

    pub fn is_sat(&mut self, c: &Conj) -> bool {
        self.sat(c).is_sat()
    }

    /// The first satisfiable disjunct's witness, in disjunct order.
    pub fn dnf_sat(&mut self, d: &Dnf) -> SatResult {
        for c in d.disjuncts() {
            if let r @ SatResult::Sat(_) = self.sat(c) {
                return r;
            }
        }
        SatResult::Unsat
    }

    /// `gamma ⊢ goal`, i.e. `gamma ∧ ¬goal` is unsatisfiable.
    pub fn entails(&mut self, gamma: &Conj, goal: &Dnf) -> bool {
        self.stats.entailment_checks += 1;
        // Disjuncts inconsistent with gamma contribute nothing to the goal.
        let useful: Vec<Conj> = goal
            .disjuncts()
            .iter()
            .filter(|d| self.is_sat(&gamma.and(d)))
            .cloned()
            .collect();
        self.refutes(gamma.clone(), &useful)
    }

    pub fn entails_conj(&mut self, gamma: &Conj, goal: &Conj) -> bool {
        self.entails(gamma, &Dnf::from(goal.clone()))
    }

    /// True iff `acc ∧ ¬(g1 ∨ g2 ∨ …)` is unsatisfiable, exploring the
    /// distributed branches depth first and pruning unsatisfiable prefixes.
    /// Each `¬gi` is expanded into disjoint branches so no region is visited
    /// twice.
    fn refutes(&mut self, acc: Conj, goals: &[Conj]) -> bool {
        if !self.is_sat(&acc) {
            return true;
        }
        let Some((first, rest)) = goals.split_first() else {
            return false;
        };
        if first.is_top() {
            return true;
        }
        for branch in first.negation_chain() {
            if !self.refutes(acc.and(&branch), rest) {
                return false;
            }
        }
        true
    }

    /// Projection `∃vars. c` onto the remaining variables.
    pub fn eliminate(&mut self, c: &Conj, vars: &BTreeSet<VarId>) -> Conj {
        let mut elim = fm::Eliminator::new(self.int());
        let mut stages = Vec::new();
        let result = elim.project(c.atoms().to_vec(), &|v| vars.contains(v), &mut stages);
        self.stats.fm_eliminations += elim.steps;
        match result {
            Some(atoms) => Conj::new(atoms),
            None => Conj::bottom(),
        }
    }

    /// Projection of every disjunct, dropping the empty ones.
    pub fn eliminate_dnf(&mut self, d: &Dnf, vars: &BTreeSet<VarId>) -> Dnf {
        Dnf::new(d.disjuncts().iter().map(|c| self.eliminate(c, vars)))
    }

    /// Complement by De Morgan. Branches are pairwise disjoint, ordered by
    /// construction, and unsatisfiable branches are pruned. Once a branch
    /// outgrows its dimension it is simplified, which keeps repeated
    /// negation from blowing up the elimination.
    pub fn negate(&mut self, d: &Dnf) -> Dnf {
        let mut acc: Vec<Conj> = alloc::vec![Conj::top()];
        for c in d.disjuncts() {
            let chain = c.negation_chain();
            let mut next = Vec::new();
            for a in &acc {
                for b in &chain {
                    let both = a.and(b);
                    if both.len() > both.vars().len() + 1 {
                        let s = self.simplify(&both);
                        if !s.is_bottom() {
                            next.push(s);
                        }
                    } else if self.is_sat(&self.normalize(&both)) {
                        next.push(both);
                    }
                }
            }
            acc = next;
        }
        Dnf::new(acc)
    }

    /// `c ∧ ¬d` as a disjunction, with unsatisfiable branches pruned.
    pub fn and_not(&mut self, c: &Conj, d: &Dnf) -> Dnf {
        let neg = self.negate(d);
        self.prune(&neg.and_conj(c))
    }

    /// Drops unsatisfiable disjuncts.
    pub fn prune(&mut self, d: &Dnf) -> Dnf {
        let kept: Vec<Conj> =
            d.disjuncts().iter().filter(|c| self.is_sat(c)).cloned().collect();
        Dnf::new(kept)
    }

    /// Tightens (under `Int`) and removes atoms implied by the others.
    /// An unsatisfiable input becomes the canonical false conjunction.
    pub fn simplify(&mut self, c: &Conj) -> Conj {
        let c = self.normalize(c);
        if !self.is_sat(&c) {
            return Conj::bottom();
        }
        let mut atoms: Vec<Atom> = c.atoms().to_vec();
        let mut i = 0;
        while i < atoms.len() {
            let others: Conj = atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            if self.entails(&others, &Dnf::from(atoms[i].clone())) {
                atoms.remove(i);
            } else {
                i += 1;
            }
        }
        Conj::new(atoms)
    }

    /// Simplifies each disjunct and drops the empty ones.
    pub fn simplify_dnf(&mut self, d: &Dnf) -> Dnf {
        Dnf::new(d.disjuncts().iter().map(|c| self.simplify(c)))
    }
}

/// Rational satisfiability of a conjunction.
pub fn conj_sat(c: &Conj) -> SatResult {
    Checker::rational().sat(c)
}

/// Rational satisfiability of a disjunction; the witness comes from the first
/// satisfiable disjunct.
pub fn dnf_sat(d: &Dnf) -> SatResult {
    Checker::rational().dnf_sat(d)
}

/// Rational entailment `gamma ⊢ goal`.
pub fn entails(gamma: &Conj, goal: &Dnf) -> bool {
    Checker::rational().entails(gamma, goal)
}

/// Rational projection `∃vars. c`.
pub fn eliminate(c: &Conj, vars: &BTreeSet<VarId>) -> Conj {
    Checker::rational().eliminate(c, vars)
}

/// Simultaneous substitution on either formula shape.
pub fn substitute<F: Substitute>(f: &F, subst: &alloc::collections::BTreeMap<VarId, LinTerm>) -> F {
    f.substitute_vars(subst)
}

/// Complement of a disjunction.
pub fn negate(d: &Dnf) -> Dnf {
    Checker::rational().negate(d)
}
