use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::term::{LinTerm, Model, Rational, VarId};

/// Comparison of a term against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relop {
    /// `term <= 0`
    Le,
    /// `term < 0`
    Lt,
    /// `term = 0`
    Eq,
}

impl Relop {
    /// `v relop 0`
    pub fn holds(self, v: &Rational) -> bool {
        match self {
            Relop::Le => !v.is_positive(),
            Relop::Lt => v.is_negative(),
            Relop::Eq => v.is_zero(),
        }
    }
}

/// An atomic linear constraint `term relop 0`.
///
/// Atoms are normalized on construction: variable coefficients are integers
/// with gcd 1, equalities have a positive leading coefficient, and constant
/// atoms collapse to the canonical `0 <= 0` (true) or `1 <= 0` (false).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    term: LinTerm,
    relop: Relop,
}

impl Atom {
    pub fn new(term: LinTerm, relop: Relop) -> Atom {
        if term.is_constant() {
            return Atom::constant(relop.holds(term.constant_part()));
        }
        let mut lcm = BigInt::one();
        for c in term.coeffs().values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        for c in term.coeffs().values() {
            gcd = gcd.gcd(&(c.numer() * (&lcm / c.denom())));
        }
        let mut factor = Rational::new(lcm, gcd);
        if relop == Relop::Eq {
            let lead = term.coeffs().values().next().expect("non-constant term");
            if lead.is_negative() {
                factor = -factor;
            }
        }
        Atom { term: term.scale(&factor), relop }
    }

    pub fn constant(truth: bool) -> Atom {
        let c = if truth { Rational::zero() } else { Rational::one() };
        Atom { term: LinTerm::constant(c), relop: Relop::Le }
    }

    /// `lhs <= rhs`
    pub fn le(lhs: LinTerm, rhs: LinTerm) -> Atom {
        Atom::new(lhs - rhs, Relop::Le)
    }

    /// `lhs < rhs`
    pub fn lt(lhs: LinTerm, rhs: LinTerm) -> Atom {
        Atom::new(lhs - rhs, Relop::Lt)
    }

    /// `lhs >= rhs`
    pub fn ge(lhs: LinTerm, rhs: LinTerm) -> Atom {
        Atom::new(rhs - lhs, Relop::Le)
    }

    /// `lhs > rhs`
    pub fn gt(lhs: LinTerm, rhs: LinTerm) -> Atom {
        Atom::new(rhs - lhs, Relop::Lt)
    }

    /// `lhs = rhs`
    pub fn eq(lhs: LinTerm, rhs: LinTerm) -> Atom {
        Atom::new(lhs - rhs, Relop::Eq)
    }

    pub fn term(&self) -> &LinTerm {
        &self.term
    }

    pub fn relop(&self) -> Relop {
        self.relop
    }

    pub fn is_strict(&self) -> bool {
        self.relop == Relop::Lt
    }

    /// `Some(truth)` for variable-free atoms.
    pub fn truth(&self) -> Option<bool> {
        self.term.is_constant().then(|| self.relop.holds(self.term.constant_part()))
    }

    pub fn is_false(&self) -> bool {
        self.truth() == Some(false)
    }

    pub fn is_true(&self) -> bool {
        self.truth() == Some(true)
    }

    /// Evaluates the atom; `None` if some variable is unassigned.
    pub fn holds(&self, model: &Model) -> Option<bool> {
        self.term.eval(model).map(|v| self.relop.holds(&v))
    }

    /// The complement as a disjunction of atoms.
    pub fn negate(&self) -> Vec<Atom> {
        let t = self.term.clone();
        match self.relop {
            Relop::Le => vec![Atom::new(-t, Relop::Lt)],
            Relop::Lt => vec![Atom::new(-t, Relop::Le)],
            Relop::Eq => vec![Atom::new(t.clone(), Relop::Lt), Atom::new(-t, Relop::Lt)],
        }
    }

    /// The same constraint with every strict comparison weakened.
    pub fn relax(&self) -> Atom {
        match self.relop {
            Relop::Lt => Atom { term: self.term.clone(), relop: Relop::Le },
            _ => self.clone(),
        }
    }

    /// Strengthening that is equivalent over the integers.
    ///
    /// Coefficients are integral after normalization, so `a·x + c < 0` is
    /// `a·x <= ceil(-c) - 1` and `a·x + c <= 0` is `a·x <= floor(-c)`. An
    /// equality with a fractional constant has no integer solution.
    pub fn tighten_int(&self) -> Atom {
        if self.term.is_constant() {
            return self.clone();
        }
        let neg_c = -self.term.constant_part();
        let bound = match self.relop {
            Relop::Le => neg_c.floor(),
            Relop::Lt => neg_c.ceil() - Rational::one(),
            Relop::Eq => {
                if !neg_c.is_integer() {
                    return Atom::constant(false);
                }
                return self.clone();
            }
        };
        Atom { term: self.term.linear_part() - LinTerm::constant(bound), relop: Relop::Le }
    }

    pub fn substitute(&self, subst: &BTreeMap<VarId, LinTerm>) -> Atom {
        Atom::new(self.term.substitute(subst), self.relop)
    }

    pub fn rename(&self, f: impl Fn(&VarId) -> VarId) -> Atom {
        Atom::new(self.term.rename(f), self.relop)
    }
}

impl fmt::Display for Atom {
    /// Prints in the loop-file syntax: positive-coefficient variables on the
    /// left, negative ones and the constant on the right.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(truth) = self.truth() {
            return f.write_str(if truth { "true" } else { "false" });
        }
        let coeffs = self.term.coeffs();
        let c = self.term.constant_part();
        let any_pos = coeffs.values().any(|c| c.is_positive());
        let any_neg = coeffs.values().any(|c| c.is_negative());
        let (lhs, op, rhs) = if any_pos && any_neg {
            let pos = LinTerm::from_parts(
                coeffs.iter().filter(|(_, c)| c.is_positive()).map(|(v, c)| (v.clone(), c.clone())),
                Rational::zero(),
            );
            let neg = LinTerm::from_parts(
                coeffs.iter().filter(|(_, c)| c.is_negative()).map(|(v, c)| (v.clone(), -c)),
                -c,
            );
            let op = match self.relop {
                Relop::Le => "<=",
                Relop::Lt => "<",
                Relop::Eq => "=",
            };
            (pos, op, neg)
        } else if any_pos {
            let op = match self.relop {
                Relop::Le => "<=",
                Relop::Lt => "<",
                Relop::Eq => "=",
            };
            (self.term.linear_part(), op, LinTerm::constant(-c))
        } else {
            let op = match self.relop {
                Relop::Le => ">=",
                Relop::Lt => ">",
                Relop::Eq => "=",
            };
            (-self.term.linear_part(), op, LinTerm::constant(c.clone()))
        };
        write!(f, "{lhs} {op} {rhs}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linarith::term::{int, ratio};
    use alloc::string::ToString;

    fn v(n: &str) -> LinTerm {
        LinTerm::var(VarId::new(n))
    }
    fn k(n: i64) -> LinTerm {
        LinTerm::constant(int(n))
    }

    #[test]
    fn normalization_makes_integer_gcd_one() {
        let a = Atom::le(v("x").scale(&ratio(2, 3)) + v("y").scale(&ratio(4, 3)), k(1));
        assert_eq!(a.term().coeff(&VarId::new("x")), int(1));
        assert_eq!(a.term().coeff(&VarId::new("y")), int(2));
        assert_eq!(a.term().constant_part(), &ratio(-3, 2));
        assert_eq!(a.to_string(), "x + 2*y <= 3/2");
    }

    #[test]
    fn normalization_is_idempotent() {
        let a = Atom::eq(v("y") - v("x").scale(&int(6)), k(4));
        let b = Atom::new(a.term().clone(), a.relop());
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "6*x = y - 4");
    }

    #[test]
    fn equality_sign_convention() {
        assert_eq!(Atom::eq(v("x"), v("y")), Atom::eq(v("y"), v("x")));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Atom::ge(v("x"), k(0)).to_string(), "x >= 0");
        assert_eq!(Atom::gt(v("y"), k(0)).to_string(), "y > 0");
        assert_eq!(Atom::lt(v("x") + v("y"), k(0)).to_string(), "x + y < 0");
        assert_eq!(Atom::ge(v("x"), k(1)).to_string(), "x >= 1");
        assert_eq!(Atom::ge(v("z"), v("y")).to_string(), "y <= z");
        assert_eq!(Atom::le(k(1), k(0)).to_string(), "false");
    }

    #[test]
    fn integer_tightening() {
        let a = Atom::lt(v("y"), k(0)).tighten_int();
        assert_eq!(a, Atom::le(v("y"), k(-1)));
        let b = Atom::le(v("x").scale(&int(2)), k(1)).tighten_int();
        assert_eq!(b, Atom::le(v("x"), k(0)));
        let c = Atom::eq(v("x").scale(&int(2)), k(1)).tighten_int();
        assert!(c.is_false());
    }

    #[test]
    fn negation() {
        let a = Atom::le(v("y"), k(0));
        assert_eq!(a.negate(), vec![Atom::gt(v("y"), k(0))]);
        assert_eq!(Atom::eq(v("x"), k(0)).negate().len(), 2);
    }
}
