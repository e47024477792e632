//! Abduction of potential non-terminating conditions.
//!
//! Given a transition relation ρ and the primed guard ψ', find pre-state
//! conditions φ over few variables with `ρ ∧ φ ⊢ ψ'`. For a variable subset
//! `S` the weakest such φ is the universal projection
//! `¬∃(X∖S, X'). (ρ ∧ ¬ψ')`, obtained by projecting each branch of the
//! negated goal and complementing the union.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::linarith::{Checker, Conj, Dnf, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbductionCandidate {
    /// φ, over pre-state variables.
    pub condition: Conj,
    /// Variables that occur in φ.
    pub support_vars: BTreeSet<VarId>,
    /// Set for branches of the one-step weakest precondition.
    pub trivial: bool,
}

impl AbductionCandidate {
    fn new(condition: Conj, trivial: bool) -> Self {
        AbductionCandidate { support_vars: condition.vars(), condition, trivial }
    }
}

/// `¬∃X'. (τ ∧ ¬ψ')` where τ keeps only the atoms of ρ that mention a primed
/// variable. The guard atoms of ρ are left out so that, for deterministic
/// updates, the result is ψ' with each primed variable replaced by its
/// update.
pub fn weakest_guard_pre(ck: &mut Checker, rho: &Conj, psi_primed: &Dnf) -> Dnf {
    let trans: Conj = rho.atoms().iter().filter(|a| a.term().vars().any(VarId::is_primed)).cloned().collect();
    let primed: BTreeSet<VarId> = trans.vars().into_iter().chain(psi_primed.vars()).filter(VarId::is_primed).collect();
    universal_projection(ck, core::slice::from_ref(&trans), psi_primed, &primed)
}

/// `¬∃elim. ∨ᵢ(ρᵢ ∧ ¬ψ')`, with each branch simplified.
fn universal_projection(ck: &mut Checker, rhos: &[Conj], psi_primed: &Dnf, elim: &BTreeSet<VarId>) -> Dnf {
    let escape = ck.negate(psi_primed);
    let mut bad: Vec<Conj> = Vec::new();
    for rho in rhos {
        for branch in escape.disjuncts() {
            let p = ck.eliminate(&rho.and(branch), elim);
            if !p.is_bottom() {
                bad.push(p);
            }
        }
    }
    let good = ck.negate(&Dnf::new(bad));
    ck.simplify_dnf(&good)
}

/// Candidates φ for a loop whose guard disjuncts have relations `rhos`.
///
/// `guard` is the region being split (guard ∧ case precondition). Every
/// returned candidate satisfies
/// * `ρᵢ ∧ φ ⊢ ψ'` for every `i`,
/// * `ρᵢ ∧ φ` satisfiable for some `i`,
/// * `guard ∧ ¬φ` satisfiable, so the split is proper.
///
/// Candidates are ordered by support size, then atom count, then printed
/// form; the branches of the weakest precondition come last, flagged
/// trivial, unless an equal candidate is already listed.
pub fn abduce_all(
    ck: &mut Checker,
    rhos: &[Conj],
    guard: &Dnf,
    psi_primed: &Dnf,
    max_support: usize,
) -> Vec<AbductionCandidate> {
    let mut pre_vars: BTreeSet<VarId> = BTreeSet::new();
    let mut all_vars: BTreeSet<VarId> = BTreeSet::new();
    for rho in rhos {
        for v in rho.vars() {
            pre_vars.insert(v.unprimed());
            all_vars.insert(v.clone());
            all_vars.insert(v.primed());
        }
    }
    for v in guard.vars().into_iter().chain(psi_primed.vars()) {
        pre_vars.insert(v.unprimed());
    }
    let pre_vars: Vec<VarId> = pre_vars.into_iter().collect();
    all_vars.extend(psi_primed.vars());

    let mut found: Vec<(AbductionCandidate, String)> = Vec::new();
    for size in 1..=max_support.min(pre_vars.len()) {
        for subset in subsets(&pre_vars, size) {
            let keep: BTreeSet<&VarId> = subset.iter().collect();
            let elim: BTreeSet<VarId> = all_vars.iter().filter(|v| !keep.contains(v)).cloned().collect();
            let phi = universal_projection(ck, rhos, psi_primed, &elim);
            for branch in phi.disjuncts() {
                ck.stats_mut().candidates_tried += 1;
                let cond = drop_guard_implied(ck, guard, branch);
                if found.iter().any(|(c, _)| c.condition == cond) {
                    continue;
                }
                if is_candidate(ck, rhos, guard, psi_primed, &cond) {
                    let s = cond.to_string();
                    found.push((AbductionCandidate::new(cond, false), s));
                }
            }
        }
    }
    found.sort_by(|(a, sa), (b, sb)| {
        (a.support_vars.len(), a.condition.len(), sa).cmp(&(b.support_vars.len(), b.condition.len(), sb))
    });
    let mut out: Vec<AbductionCandidate> = found.into_iter().map(|(c, _)| c).collect();

    // φ must work for every relation, so the weakest one is the intersection.
    let mut wp = Dnf::top();
    for rho in rhos {
        wp = wp.and(&weakest_guard_pre(ck, rho, psi_primed));
    }
    let wp = if rhos.len() > 1 { ck.simplify_dnf(&wp) } else { wp };
    for branch in wp.disjuncts() {
        ck.stats_mut().candidates_tried += 1;
        let cond = drop_guard_implied(ck, guard, branch);
        if out.iter().any(|c| c.condition == cond) {
            continue;
        }
        if is_candidate(ck, rhos, guard, psi_primed, &cond) {
            out.push(AbductionCandidate::new(cond, true));
        }
    }
    out
}

/// Single-relation form of [`abduce_all`].
pub fn abduce(
    ck: &mut Checker,
    rho: &Conj,
    guard: &Conj,
    psi_primed: &Dnf,
    max_support: usize,
) -> Vec<AbductionCandidate> {
    abduce_all(ck, core::slice::from_ref(rho), &Dnf::from(guard.clone()), psi_primed, max_support)
}

fn is_candidate(ck: &mut Checker, rhos: &[Conj], guard: &Dnf, psi_primed: &Dnf, phi: &Conj) -> bool {
    if phi.vars().iter().any(VarId::is_primed) {
        return false;
    }
    let mut consistent = false;
    for rho in rhos {
        let both = rho.and(phi);
        if !ck.entails(&both, psi_primed) {
            return false;
        }
        consistent = consistent || ck.is_sat(&ck.normalize(&both));
    }
    if !consistent {
        return false;
    }
    let outside = ck.negate(&Dnf::from(phi.clone()));
    let rest = guard.and(&outside);
    rest.disjuncts().iter().any(|d| {
        let d = ck.normalize(d);
        ck.is_sat(&d)
    })
}

/// Removes atoms that follow from the guard and the remaining atoms.
fn drop_guard_implied(ck: &mut Checker, guard: &Dnf, phi: &Conj) -> Conj {
    let mut atoms = phi.atoms().to_vec();
    let mut i = 0;
    while i < atoms.len() {
        let others: Conj = atoms.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a.clone()).collect();
        let implied = guard
            .disjuncts()
            .iter()
            .all(|g| ck.entails(&g.and(&others), &Dnf::from(atoms[i].clone())));
        if implied && !guard.is_bottom() {
            atoms.remove(i);
        } else {
            i += 1;
        }
    }
    Conj::new(atoms)
}

/// All `k`-element subsets of `items`, in lexicographic order of positions.
fn subsets(items: &[VarId], k: usize) -> Vec<Vec<VarId>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i].clone()).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
