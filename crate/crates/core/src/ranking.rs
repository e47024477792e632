//! Linear ranking functions via Farkas' lemma.
//!
//! For a transition relation written as rows `A·(x, x') <= b`, a linear
//! `r·x` is bounded by `δ0` and decreases by 1 iff there are nonnegative
//! multipliers `λ1`, `λ2` with
//!
//! ```text
//! λ1·A = (-r, 0),  λ1·b <= -δ0
//! λ2·A = (-r, r),  λ2·b <= -1
//! ```
//!
//! Both systems are linear in `(λ1, λ2, r, δ0)`, so the search is one more
//! satisfiability query for the elimination engine.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linarith::{int, Atom, Checker, Conj, Dnf, LinTerm, Rational, Relop, VarId};

/// A certificate that `r·x` is bounded below by `bound` and drops by at least
/// `decrease` on every transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankingWitness {
    /// Coefficients of `r` over pre-state variables; zeros are not stored.
    pub coeffs: BTreeMap<VarId, Rational>,
    pub bound: Rational,
    pub decrease: Rational,
}

impl RankingWitness {
    /// `r·x` as a term.
    pub fn function(&self) -> LinTerm {
        LinTerm::from_parts(self.coeffs.iter().map(|(v, c)| (v.clone(), c.clone())), Rational::zero())
    }

    /// `r·x'`.
    pub fn function_primed(&self) -> LinTerm {
        self.function().rename(|v| v.primed())
    }

    /// The same witness with every component multiplied by `k`.
    pub fn scaled(&self, k: &Rational) -> RankingWitness {
        RankingWitness {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            bound: &self.bound * k,
            decrease: &self.decrease * k,
        }
    }
}

impl fmt::Display for RankingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (bound {}, decrease {})", self.function(), self.bound, self.decrease)
    }
}

fn unknown(name: &str) -> LinTerm {
    LinTerm::var(VarId::new(name))
}

fn r_var(v: &VarId) -> LinTerm {
    unknown(&format!("__r_{}", v.name()))
}

/// Searches for one linear ranking function shared by every relation in
/// `rhos` (one per guard disjunct). Unsatisfiable relations impose nothing;
/// if all of them are unsatisfiable the result is `None`.
///
/// Strict atoms are relaxed before the rows are built. Under integer
/// semantics the relations are tightened first.
pub fn synthesize_linear_rf(ck: &mut Checker, rhos: &[Conj]) -> Option<RankingWitness> {
    let mut live: Vec<Conj> = Vec::new();
    for rho in rhos {
        let n = ck.normalize(rho);
        if ck.is_sat(&n) {
            live.push(n.relax());
        }
    }
    if live.is_empty() {
        return None;
    }
    let mut pre_vars: BTreeSet<VarId> = BTreeSet::new();
    for rho in &live {
        pre_vars.extend(rho.vars().iter().map(VarId::unprimed));
    }
    let delta0 = unknown("__d0");

    let mut system: Vec<Atom> = Vec::new();
    for (i, rho) in live.iter().enumerate() {
        // Linear combinations of the rows, one per multiplier family.
        let mut comb1: BTreeMap<VarId, LinTerm> = BTreeMap::new();
        let mut comb2: BTreeMap<VarId, LinTerm> = BTreeMap::new();
        let mut rhs1 = LinTerm::zero();
        let mut rhs2 = LinTerm::zero();
        for (j, atom) in rho.atoms().iter().enumerate() {
            let l1 = unknown(&format!("__a_{i}_{j}"));
            let l2 = unknown(&format!("__b_{i}_{j}"));
            if atom.relop() != Relop::Eq {
                system.push(Atom::ge(l1.clone(), LinTerm::zero()));
                system.push(Atom::ge(l2.clone(), LinTerm::zero()));
            }
            for (w, a) in atom.term().coeffs() {
                let e1 = comb1.entry(w.clone()).or_default();
                *e1 = e1.clone() + l1.clone() * a;
                let e2 = comb2.entry(w.clone()).or_default();
                *e2 = e2.clone() + l2.clone() * a;
            }
            // b_j = -c_j
            let b = -atom.term().constant_part();
            rhs1 = rhs1 + l1 * &b;
            rhs2 = rhs2 + l2 * &b;
        }
        for v in &pre_vars {
            let p = v.primed();
            let take = |m: &BTreeMap<VarId, LinTerm>, w: &VarId| m.get(w).cloned().unwrap_or_default();
            system.push(Atom::eq(take(&comb1, v), -r_var(v)));
            system.push(Atom::eq(take(&comb1, &p), LinTerm::zero()));
            system.push(Atom::eq(take(&comb2, v), -r_var(v)));
            system.push(Atom::eq(take(&comb2, &p), r_var(v)));
        }
        system.push(Atom::le(rhs1, -delta0.clone()));
        system.push(Atom::le(rhs2, LinTerm::constant(int(-1))));
    }

    let mut solver = Checker::rational();
    let model = solver.sat(&Conj::new(system));
    ck.stats_mut().merge(solver.stats());
    let model = model.model()?.clone();

    let mut coeffs: BTreeMap<VarId, Rational> = BTreeMap::new();
    for v in &pre_vars {
        let c = r_var(v).eval(&model).unwrap_or_else(|| int(0));
        if !c.is_zero() {
            coeffs.insert(v.clone(), c);
        }
    }
    // Clear denominators. Scaling up keeps both certificates valid.
    let mut k = BigInt::one();
    for c in coeffs.values() {
        k = k.lcm(c.denom());
    }
    let k = Rational::from_integer(k);
    for c in coeffs.values_mut() {
        *c = &*c * &k;
    }
    let fallback = delta0.eval(&model).unwrap_or_else(|| int(0)) * &k;
    let mut w = RankingWitness { coeffs, bound: fallback, decrease: int(1) };
    if let Some(b) = tightest_bound(ck, &live, &w.function()) {
        w.bound = b;
    }
    Some(w)
}

/// The infimum of `f` over the union of `rhos`, when every relation bounds
/// it from below.
fn tightest_bound(ck: &mut Checker, rhos: &[Conj], f: &LinTerm) -> Option<Rational> {
    let t = VarId::new("__t");
    let mut overall: Option<Rational> = None;
    for rho in rhos {
        let with_t = rho.with(Atom::eq(LinTerm::var(t.clone()), f.clone()));
        let others: BTreeSet<VarId> = with_t.vars().into_iter().filter(|v| *v != t).collect();
        let proj = ck.eliminate(&with_t, &others);
        let mut best: Option<Rational> = None;
        for a in proj.atoms() {
            let c = a.term().coeff(&t);
            let lower = match a.relop() {
                Relop::Eq => true,
                _ => c.is_negative(),
            };
            if !lower {
                continue;
            }
            // c·t + k (<=|=) 0 with c < 0 gives t >= -k/c.
            let b = -a.term().constant_part() / &c;
            if best.as_ref().is_none_or(|cur| b > *cur) {
                best = Some(b);
            }
        }
        let b = best?;
        if overall.as_ref().is_none_or(|cur| b < *cur) {
            overall = Some(b);
        }
    }
    overall
}

/// Checks a witness against one relation by plain entailment:
/// `rho ⊢ r·x >= bound` and `rho ⊢ r·x - r·x' >= decrease`, with
/// `decrease > 0`.
pub fn verify_rf(ck: &mut Checker, rho: &Conj, w: &RankingWitness) -> bool {
    if !w.decrease.is_positive() {
        return false;
    }
    let f = w.function();
    let bounded = Atom::ge(f.clone(), LinTerm::constant(w.bound.clone()));
    let decreasing = Atom::ge(f - w.function_primed(), LinTerm::constant(w.decrease.clone()));
    ck.entails(rho, &Dnf::from(bounded)) && ck.entails(rho, &Dnf::from(decreasing))
}
