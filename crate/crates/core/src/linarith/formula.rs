use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::atom::Atom;
use super::term::{LinTerm, Model, VarId};

/// A conjunction of atoms, i.e. a convex polyhedron. Empty means true.
///
/// Construction drops duplicates and trivially true atoms; a trivially false
/// atom collapses the whole conjunction to the single canonical false atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conj {
    atoms: Vec<Atom>,
}

impl Conj {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Conj {
        let mut out: Vec<Atom> = Vec::new();
        for a in atoms {
            if a.is_true() {
                continue;
            }
            if a.is_false() {
                return Conj::bottom();
            }
            if !out.contains(&a) {
                out.push(a);
            }
        }
        Conj { atoms: out }
    }

    pub fn top() -> Conj {
        Conj { atoms: Vec::new() }
    }

    pub fn bottom() -> Conj {
        Conj { atoms: vec![Atom::constant(false)] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when the conjunction is syntactically false.
    pub fn is_bottom(&self) -> bool {
        self.atoms.iter().any(Atom::is_false)
    }

    pub fn and(&self, other: &Conj) -> Conj {
        Conj::new(self.atoms.iter().chain(other.atoms.iter()).cloned())
    }

    pub fn with(&self, atom: Atom) -> Conj {
        Conj::new(self.atoms.iter().cloned().chain(core::iter::once(atom)))
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            a.term().collect_vars(&mut out);
        }
        out
    }

    /// Evaluates the conjunction; `None` if some variable is unassigned.
    pub fn holds(&self, model: &Model) -> Option<bool> {
        let mut all = true;
        for a in &self.atoms {
            all &= a.holds(model)?;
        }
        Some(all)
    }

    pub fn substitute(&self, subst: &BTreeMap<VarId, LinTerm>) -> Conj {
        Conj::new(self.atoms.iter().map(|a| a.substitute(subst)))
    }

    pub fn rename(&self, f: impl Fn(&VarId) -> VarId + Copy) -> Conj {
        Conj::new(self.atoms.iter().map(|a| a.rename(f)))
    }

    /// Every variable moved to the post-state vocabulary.
    pub fn prime(&self) -> Conj {
        self.rename(|v| v.primed())
    }

    pub fn tighten_int(&self) -> Conj {
        Conj::new(self.atoms.iter().map(Atom::tighten_int))
    }

    pub fn relax(&self) -> Conj {
        Conj::new(self.atoms.iter().map(Atom::relax))
    }

    /// Negation as a chain of pairwise disjoint branches:
    /// `¬(a1 ∧ a2 ∧ …) = ¬a1 ∨ (a1 ∧ ¬a2) ∨ …`.
    pub fn negation_chain(&self) -> Vec<Conj> {
        let mut out = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            let prefix = &self.atoms[..i];
            for neg in a.negate() {
                out.push(Conj::new(prefix.iter().cloned().chain(core::iter::once(neg))));
            }
        }
        out
    }
}

impl From<Atom> for Conj {
    fn from(a: Atom) -> Conj {
        Conj::new([a])
    }
}

impl FromIterator<Atom> for Conj {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Conj {
        Conj::new(iter)
    }
}

impl fmt::Display for Conj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        if self.is_bottom() {
            return f.write_str("false");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A disjunction of conjunctions. Empty means false.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dnf {
    disjuncts: Vec<Conj>,
}

impl Dnf {
    /// Drops syntactically false and duplicate disjuncts, keeping order.
    pub fn new(disjuncts: impl IntoIterator<Item = Conj>) -> Dnf {
        let mut out: Vec<Conj> = Vec::new();
        for d in disjuncts {
            if d.is_bottom() || out.contains(&d) {
                continue;
            }
            out.push(d);
        }
        Dnf { disjuncts: out }
    }

    pub fn top() -> Dnf {
        Dnf { disjuncts: vec![Conj::top()] }
    }

    pub fn bottom() -> Dnf {
        Dnf { disjuncts: Vec::new() }
    }

    pub fn disjuncts(&self) -> &[Conj] {
        &self.disjuncts
    }

    pub fn into_disjuncts(self) -> Vec<Conj> {
        self.disjuncts
    }

    pub fn is_bottom(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.disjuncts.iter().any(Conj::is_top)
    }

    pub fn or(&self, other: &Dnf) -> Dnf {
        Dnf::new(self.disjuncts.iter().chain(other.disjuncts.iter()).cloned())
    }

    /// Conjunction by distribution.
    pub fn and(&self, other: &Dnf) -> Dnf {
        let mut out = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                out.push(a.and(b));
            }
        }
        Dnf::new(out)
    }

    pub fn and_conj(&self, c: &Conj) -> Dnf {
        Dnf::new(self.disjuncts.iter().map(|d| d.and(c)))
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for d in &self.disjuncts {
            out.extend(d.vars());
        }
        out
    }

    pub fn holds(&self, model: &Model) -> Option<bool> {
        let mut any = false;
        for d in &self.disjuncts {
            any |= d.holds(model)?;
        }
        Some(any)
    }

    pub fn substitute(&self, subst: &BTreeMap<VarId, LinTerm>) -> Dnf {
        Dnf::new(self.disjuncts.iter().map(|d| d.substitute(subst)))
    }

    pub fn rename(&self, f: impl Fn(&VarId) -> VarId + Copy) -> Dnf {
        Dnf::new(self.disjuncts.iter().map(|d| d.rename(f)))
    }

    pub fn prime(&self) -> Dnf {
        self.rename(|v| v.primed())
    }

    pub fn tighten_int(&self) -> Dnf {
        Dnf::new(self.disjuncts.iter().map(Conj::tighten_int))
    }
}

impl From<Conj> for Dnf {
    fn from(c: Conj) -> Dnf {
        Dnf::new([c])
    }
}

impl From<Atom> for Dnf {
    fn from(a: Atom) -> Dnf {
        Dnf::from(Conj::from(a))
    }
}

impl FromIterator<Conj> for Dnf {
    fn from_iter<I: IntoIterator<Item = Conj>>(iter: I) -> Dnf {
        Dnf::new(iter)
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return f.write_str("false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" or ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Shape-generic substitution so callers can rewrite either formula kind.
pub trait Substitute {
    fn substitute_vars(&self, subst: &BTreeMap<VarId, LinTerm>) -> Self;
}

impl Substitute for Conj {
    fn substitute_vars(&self, subst: &BTreeMap<VarId, LinTerm>) -> Self {
        self.substitute(subst)
    }
}

impl Substitute for Dnf {
    fn substitute_vars(&self, subst: &BTreeMap<VarId, LinTerm>) -> Self {
        self.substitute(subst)
    }
}

impl Substitute for Atom {
    fn substitute_vars(&self, subst: &BTreeMap<VarId, LinTerm>) -> Self {
        self.substitute(subst)
    }
}
