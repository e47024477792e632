//! Fourier–Motzkin variable elimination over exact rationals.
//!
//! Equalities are consumed first as substitutions; remaining variables are
//! eliminated by pairwise combination of lower and upper bounds (the result
//! is strict iff either parent is strict). Every elimination step is recorded
//! so that a model of the residual system can be extended back to a model of
//! the input.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Relop};
use super::term::{LinTerm, Model, Rational, VarId};

/// One recorded elimination.
#[derive(Clone, Debug)]
pub(crate) enum Stage {
    /// `var = expr`, with `expr` free of `var`.
    Subst { var: VarId, expr: LinTerm },
    /// The atoms that bounded `var` when it was eliminated.
    Bounds { var: VarId, atoms: Vec<Atom> },
}

pub(crate) struct Eliminator {
    /// Tighten every atom as an integer constraint.
    pub int: bool,
    /// Drop rows combined from too many inputs. Sound only over the
    /// rationals.
    pub prune: bool,
    /// Number of single-variable eliminations performed.
    pub steps: u64,
}

impl Eliminator {
    pub fn new(int: bool) -> Self {
        Eliminator { int, prune: !int, steps: 0 }
    }

    /// Normalizes a working set. `None` if a false atom shows up.
    ///
    /// An inequality is dropped in favor of one with the same linear part
    /// that implies it. When pruning, the survivor's history must also be a
    /// subset of the dropped one's, or the pruning rule loses rows it needs.
    fn clean(&self, atoms: Vec<(Atom, Hist)>) -> Option<Vec<(Atom, Hist)>> {
        let mut by_part: BTreeMap<LinTerm, Vec<usize>> = BTreeMap::new();
        let mut out: Vec<Option<(Atom, Hist)>> = Vec::with_capacity(atoms.len());
        let covers = |a: &(Atom, Hist), b: &(Atom, Hist)| implies(&a.0, &b.0) && (!self.prune || a.1.subset(&b.1));
        for (a, h) in atoms {
            let a = if self.int { a.tighten_int() } else { a };
            match a.truth() {
                Some(true) => continue,
                Some(false) => return None,
                None => {}
            }
            if a.relop() == Relop::Eq {
                if !out.iter().flatten().any(|(b, _)| *b == a) {
                    out.push(Some((a, h)));
                }
                continue;
            }
            let new = (a, h);
            let group = by_part.entry(new.0.term().linear_part()).or_default();
            if group.iter().any(|&i| out[i].as_ref().is_some_and(|e| covers(e, &new))) {
                continue;
            }
            group.retain(|&i| {
                let gone = out[i].as_ref().is_some_and(|e| covers(&new, e));
                if gone {
                    out[i] = None;
                }
                !gone
            });
            group.push(out.len());
            out.push(Some(new));
        }
        Some(out.into_iter().flatten().collect())
    }

    /// Eliminates every variable selected by `target` from `atoms`.
    ///
    /// Returns `None` when the system is found infeasible; otherwise the
    /// residual atoms (free of targets). Stages are appended to `stages`.
    ///
    /// Over the rationals, an inequality combined from more than `k + 1`
    /// input rows after `k` pairwise eliminations is implied by the others
    /// and is dropped (Chernikov's rule). Equalities are all substituted
    /// before the first pairwise step, so each row's history starts out as
    /// its own index.
    pub fn project(
        &mut self,
        atoms: Vec<Atom>,
        target: &dyn Fn(&VarId) -> bool,
        stages: &mut Vec<Stage>,
    ) -> Option<Vec<Atom>> {
        let n = atoms.len();
        let tagged = atoms.into_iter().enumerate().map(|(i, a)| (a, Hist::single(n, i))).collect();
        let mut atoms = self.clean(tagged)?;
        let mut pairwise = 0usize;
        loop {
            if let Some((idx, var)) = pick_equality(atoms.iter().map(|(a, _)| a), target) {
                let (eq, _) = atoms.remove(idx);
                let a = eq.term().coeff(&var);
                // var = -(rest)/a
                let mut rest = eq.term().clone();
                rest = rest - LinTerm::var(var.clone()).scale(&a);
                let expr = rest.scale(&(-Rational::one() / &a));
                let mut subst = BTreeMap::new();
                subst.insert(var.clone(), expr.clone());
                let next = atoms.into_iter().map(|(x, h)| (x.substitute(&subst), h)).collect();
                atoms = self.clean(next)?;
                stages.push(Stage::Subst { var, expr });
                self.steps += 1;
                continue;
            }
            let Some(var) = pick_variable(atoms.iter().map(|(a, _)| a), target) else {
                return Some(atoms.into_iter().map(|(a, _)| a).collect());
            };
            pairwise += 1;
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            let mut rest = Vec::new();
            for (a, h) in atoms {
                let c = a.term().coeff(&var);
                if c.is_positive() {
                    upper.push((a, h));
                } else if c.is_negative() {
                    lower.push((a, h));
                } else {
                    rest.push((a, h));
                }
            }
            for (l, hl) in &lower {
                let a = -l.term().coeff(&var);
                for (u, hu) in &upper {
                    let h = hl.union(hu);
                    if self.prune && h.len() > pairwise + 1 {
                        continue;
                    }
                    let b = u.term().coeff(&var);
                    let t = l.term().scale(&b) + u.term().scale(&a);
                    let relop = if l.is_strict() || u.is_strict() { Relop::Lt } else { Relop::Le };
                    rest.push((Atom::new(t, relop), h));
                }
            }
            let bounds = lower.into_iter().chain(upper).map(|(a, _)| a).collect();
            stages.push(Stage::Bounds { var, atoms: bounds });
            self.steps += 1;
            atoms = self.clean(rest)?;
        }
    }
}

/// The input rows an atom was combined from.
#[derive(Clone, Debug)]
struct Hist(Vec<u64>);

impl Hist {
    fn single(n: usize, i: usize) -> Self {
        let mut w = alloc::vec![0u64; n.div_ceil(64)];
        w[i / 64] |= 1 << (i % 64);
        Hist(w)
    }

    fn union(&self, other: &Hist) -> Hist {
        Hist(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn subset(&self, other: &Hist) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// `a` implies `b`, for two inequalities with the same linear part.
fn implies(a: &Atom, b: &Atom) -> bool {
    let ca = a.term().constant_part();
    let cb = b.term().constant_part();
    ca > cb || (ca == cb && (a.is_strict() || !b.is_strict()))
}

fn pick_equality<'a>(
    atoms: impl Iterator<Item = &'a Atom>,
    target: &dyn Fn(&VarId) -> bool,
) -> Option<(usize, VarId)> {
    for (i, a) in atoms.enumerate() {
        if a.relop() != Relop::Eq {
            continue;
        }
        let cands: Vec<(&VarId, &Rational)> =
            a.term().coeffs().iter().filter(|(v, _)| target(v)).collect();
        if cands.is_empty() {
            continue;
        }
        let var = cands
            .iter()
            .find(|(v, _)| v.is_primed())
            .or_else(|| cands.iter().find(|(_, c)| c.abs().is_one()))
            .unwrap_or(&cands[0])
            .0
            .clone();
        return Some((i, var));
    }
    None
}

/// The target variable whose elimination creates the fewest new atoms.
fn pick_variable<'a>(atoms: impl Iterator<Item = &'a Atom>, target: &dyn Fn(&VarId) -> bool) -> Option<VarId> {
    let mut counts: BTreeMap<&VarId, (i64, i64)> = BTreeMap::new();
    for a in atoms {
        for (v, c) in a.term().coeffs() {
            if !target(v) {
                continue;
            }
            let e = counts.entry(v).or_insert((0, 0));
            if c.is_positive() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(_, (p, n))| p * n - p - n)
        .map(|(v, _)| v.clone())
}

/// Extends `model` through the recorded stages, newest first.
///
/// Variables that vanished from the system without being eliminated are
/// unconstrained at that point and default to zero.
pub(crate) fn back_substitute(stages: &[Stage], model: &mut Model) {
    for stage in stages.iter().rev() {
        match stage {
            Stage::Subst { var, expr } => {
                default_missing(expr.vars(), model);
                let v = expr.eval(model).expect("all variables assigned");
                model.insert(var.clone(), v);
            }
            Stage::Bounds { var, atoms } => {
                let mut lo: Option<(Rational, bool)> = None;
                let mut hi: Option<(Rational, bool)> = None;
                for a in atoms {
                    default_missing(a.term().vars().filter(|v| *v != var), model);
                    let c = a.term().coeff(var);
                    let mut rest = a.term().clone() - LinTerm::var(var.clone()).scale(&c);
                    rest = rest.scale(&(-Rational::one() / &c));
                    let bound = rest.eval(model).expect("all variables assigned");
                    let strict = a.is_strict();
                    if c.is_positive() {
                        // var <= bound
                        if hi.as_ref().is_none_or(|(h, s)| bound < *h || (bound == *h && strict && !s)) {
                            hi = Some((bound, strict));
                        }
                    } else if lo.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && strict && !s)) {
                        lo = Some((bound, strict));
                    }
                }
                model.insert(var.clone(), pick_value(lo, hi));
            }
        }
    }
}

fn default_missing<'a>(vars: impl Iterator<Item = &'a VarId>, model: &mut Model) {
    for v in vars {
        model.entry(v.clone()).or_insert_with(Rational::zero);
    }
}

/// Chooses a value inside the interval, preferring zero, then the integer
/// closest to zero, then the midpoint.
pub(crate) fn pick_value(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>) -> Rational {
    let inside = |x: &Rational| {
        lo.as_ref().is_none_or(|(l, s)| if *s { x > l } else { x >= l })
            && hi.as_ref().is_none_or(|(h, s)| if *s { x < h } else { x <= h })
    };
    let zero = Rational::zero();
    if inside(&zero) {
        return zero;
    }
    // Zero lies outside, so the interval sits entirely on one side of it.
    let candidate = match (&lo, &hi) {
        (Some((l, s)), _) if l >= &zero => {
            let f = l.floor();
            if *s || f < *l {
                f + Rational::one()
            } else {
                f
            }
        }
        (_, Some((h, s))) => {
            let c = h.ceil();
            if *s || c > *h {
                c - Rational::one()
            } else {
                c
            }
        }
        _ => unreachable!("zero is outside only if some bound excludes it"),
    };
    if inside(&candidate) {
        return candidate;
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / Rational::from_integer(2.into()),
        _ => unreachable!("a one-sided interval always holds an integer"),
    }
}
