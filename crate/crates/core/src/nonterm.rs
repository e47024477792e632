//! Direct checks: exit unreachability, immediate exit, recurrent sets.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::linarith::{int, Checker, Conj, Dnf, LinTerm, Model, Rational, Relop, Semantics, VarId};
use crate::model::{rho_of, LoopSpec};

/// Half-width of the box searched for integer witnesses.
pub const GRID_BOUND: i64 = 64;

/// Search nodes allowed per integer-witness query.
const SEARCH_BUDGET: usize = 20_000;

/// `pre ∧ ρ ∧ ¬ψ'` has no model: no iteration from `pre` leaves the loop.
pub fn exit_unreachable(ck: &mut Checker, rho: &Conj, psi: &Dnf, pre: &Conj) -> bool {
    ck.entails(&pre.and(rho), &psi.prime())
}

/// `pre ∧ ρ ⊢ ¬ψ'`: every iteration from `pre` is the last one. An
/// unsatisfiable `pre ∧ ρ` does not count.
pub fn immediate_exit(ck: &mut Checker, rho: &Conj, psi: &Dnf, pre: &Conj) -> bool {
    let both = pre.and(rho);
    if !ck.is_sat(&ck.normalize(&both)) {
        return false;
    }
    let exit = ck.negate(&psi.prime());
    ck.entails(&both, &exit)
}

/// A nonempty set of guarded states closed under the transition relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrentWitness {
    /// φ, over pre-state variables.
    pub condition: Conj,
    /// A state in φ ∧ ψ, integral under integer semantics.
    pub nonempty_witness: Model,
    pub closure_certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecurrentCheck {
    Certified(RecurrentWitness),
    Refuted(Refutation),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refutation {
    /// φ ∧ ψ has no (integer) model, or none was found in the search box.
    Empty,
    /// Some transition from φ ∧ ψ leaves φ or the guard.
    NotClosed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("recurrent-set check needs deterministic updates")]
pub struct UnsupportedRelational;

/// Proves that every state of `phi ∧ ψ` runs forever: the region is
/// nonempty, and each guard disjunct's transition maps `phi` into
/// `phi' ∧ ψ'`.
pub fn verify_recurrent(
    ck: &mut Checker,
    spec: &LoopSpec,
    phi: &Conj,
) -> Result<RecurrentCheck, UnsupportedRelational> {
    if !spec.is_deterministic() {
        return Err(UnsupportedRelational);
    }
    let Some(point) = find_point(ck, spec, phi) else {
        return Ok(RecurrentCheck::Refuted(Refutation::Empty));
    };
    let goal = spec.guard.prime().and_conj(&phi.prime());
    for rho in rho_of(spec) {
        if !ck.entails(&phi.and(&rho), &goal) {
            return Ok(RecurrentCheck::Refuted(Refutation::NotClosed));
        }
    }
    Ok(RecurrentCheck::Certified(RecurrentWitness {
        condition: phi.clone(),
        nonempty_witness: point,
        closure_certified: true,
    }))
}

/// A model of `phi ∧ ψ` over the declared variables.
fn find_point(ck: &mut Checker, spec: &LoopSpec, phi: &Conj) -> Option<Model> {
    for g in spec.guard.disjuncts() {
        let region = ck.normalize(&phi.and(g));
        let found = match spec.semantics {
            Semantics::Rat => ck.sat(&region).model().cloned(),
            Semantics::Int => integer_point(ck, &region, &spec.vars),
        };
        if let Some(mut m) = found {
            m.retain(|v, _| spec.vars.contains(v));
            for v in &spec.vars {
                m.entry(v.clone()).or_insert_with(Rational::zero);
            }
            return Some(m);
        }
    }
    None
}

/// An integer point of `region` inside `[-B, B]^n`.
///
/// Variables are fixed one at a time in declaration order. Each one ranges
/// over the integers its projection allows, nearest to zero first, so a
/// branch is abandoned as soon as the fixed prefix has no rational
/// extension.
pub fn integer_point(ck: &mut Checker, region: &Conj, vars: &[VarId]) -> Option<Model> {
    if !ck.is_sat(region) {
        return None;
    }
    let mut budget = SEARCH_BUDGET;
    let mut model = Model::new();
    if search(ck, region, vars, &mut model, &mut budget) {
        Some(model)
    } else {
        None
    }
}

fn search(ck: &mut Checker, region: &Conj, vars: &[VarId], model: &mut Model, budget: &mut usize) -> bool {
    let Some((v, rest)) = vars.split_first() else {
        return region.holds(model).unwrap_or(false);
    };
    let later: BTreeSet<VarId> = rest.iter().cloned().collect();
    let proj = ck.eliminate(region, &later);
    if proj.is_bottom() {
        return false;
    }
    let (lo, hi) = integer_range(&proj, v);
    for value in nearest_zero_first(lo, hi) {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut subst = alloc::collections::BTreeMap::new();
        subst.insert(v.clone(), LinTerm::constant(int(value)));
        let next = region.substitute(&subst);
        if next.is_bottom() || !ck.is_sat(&next) {
            continue;
        }
        model.insert(v.clone(), int(value));
        if search(ck, &next, rest, model, budget) {
            return true;
        }
        model.remove(v);
    }
    false
}

/// Integer bounds on `v` implied by single-variable atoms of `proj`,
/// clipped to the search box.
fn integer_range(proj: &Conj, v: &VarId) -> (i64, i64) {
    let (mut lo, mut hi) = (-GRID_BOUND, GRID_BOUND);
    for a in proj.atoms() {
        if a.term().coeffs().len() != 1 {
            continue;
        }
        let c = a.term().coeff(v);
        if c.is_zero() {
            continue;
        }
        let b = -a.term().constant_part() / &c;
        let (up, down) = (b.floor(), b.ceil());
        let clip = |r: &Rational| r.to_integer().to_i64().unwrap_or(if r.is_negative() { i64::MIN } else { i64::MAX });
        match a.relop() {
            Relop::Eq => {
                lo = lo.max(clip(&down));
                hi = hi.min(clip(&up));
            }
            _ if c.is_positive() => hi = hi.min(clip(&up)),
            _ => lo = lo.max(clip(&down)),
        }
    }
    (lo, hi)
}

fn nearest_zero_first(lo: i64, hi: i64) -> impl Iterator<Item = i64> {
    let mut out: Vec<i64> = (lo..=hi).collect();
    out.sort_by_key(|n| (n.unsigned_abs(), *n < 0));
    out.into_iter()
}

impl core::fmt::Display for Refutation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Refutation::Empty => "no state satisfies the condition and the guard",
            Refutation::NotClosed => "a transition leaves the condition or the guard",
        })
    }
}
