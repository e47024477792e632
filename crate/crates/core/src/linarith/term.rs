use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational coefficient domain.
pub type Rational = BigRational;

/// A (partial) assignment of rational values to variables.
pub type Model = BTreeMap<VarId, Rational>;

/// Builds a rational from an integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds the rational `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Returns true if `name` is a valid identifier (`[A-Za-z_][A-Za-z0-9_]*`).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A program variable, either in the pre-state (`x`) or post-state (`x'`)
/// vocabulary.
///
/// Variables order lexicographically by name, unprimed before primed. That
/// order is the canonical variable order used for normalization and printing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    name: String,
    primed: bool,
}

impl VarId {
    /// Creates an unprimed variable. Panics on an invalid identifier.
    pub fn new(name: &str) -> Self {
        Self::try_new(name).unwrap_or_else(|| panic!("invalid variable name {name:?}"))
    }

    pub fn try_new(name: &str) -> Option<Self> {
        is_valid_name(name).then(|| VarId { name: name.into(), primed: false })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }

    /// The post-state copy of this variable.
    pub fn primed(&self) -> VarId {
        VarId { name: self.name.clone(), primed: true }
    }

    /// The pre-state copy of this variable.
    pub fn unprimed(&self) -> VarId {
        VarId { name: self.name.clone(), primed: false }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// A linear expression `Σ coeff·var + constant` with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinTerm {
    coeffs: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl Default for LinTerm {
    fn default() -> Self {
        Self::zero()
    }
}

impl LinTerm {
    pub fn zero() -> Self {
        LinTerm { coeffs: BTreeMap::new(), constant: Rational::zero() }
    }

    pub fn constant(c: Rational) -> Self {
        LinTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinTerm { coeffs, constant: Rational::zero() }
    }

    /// Builds a term from `(var, coeff)` pairs; repeated variables accumulate.
    pub fn from_parts<I>(coeffs: I, constant: Rational) -> Self
    where
        I: IntoIterator<Item = (VarId, Rational)>,
    {
        let mut t = LinTerm::constant(constant);
        for (v, c) in coeffs {
            t.add_coeff(v, c);
        }
        t
    }

    fn add_coeff(&mut self, v: VarId, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.retain(|_, c| !c.is_zero());
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<VarId, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, v: &VarId) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.coeffs.keys()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        out.extend(self.coeffs.keys().cloned());
    }

    pub fn scale(&self, k: &Rational) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Evaluates the term; `None` if some variable is unassigned.
    pub fn eval(&self, model: &Model) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * model.get(v)?;
        }
        Some(acc)
    }

    /// Simultaneous substitution of variables by terms.
    pub fn substitute(&self, subst: &BTreeMap<VarId, LinTerm>) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match subst.get(v) {
                Some(t) => out = out + t.scale(c),
                None => out.add_coeff(v.clone(), c.clone()),
            }
        }
        out
    }

    /// Renames every variable through `f`.
    pub fn rename(&self, f: impl Fn(&VarId) -> VarId) -> LinTerm {
        LinTerm::from_parts(
            self.coeffs.iter().map(|(v, c)| (f(v), c.clone())),
            self.constant.clone(),
        )
    }

    /// The term with its constant dropped.
    pub fn linear_part(&self) -> LinTerm {
        LinTerm { coeffs: self.coeffs.clone(), constant: Rational::zero() }
    }

    /// Writes the variable part as `2*x - y + 1/2*z`.
    pub(crate) fn fmt_linear(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", self.constant);
        }
        self.fmt_linear(f)?;
        if self.constant.is_positive() {
            write!(f, " + {}", self.constant)?;
        } else if self.constant.is_negative() {
            write!(f, " - {}", -&self.constant)?;
        }
        Ok(())
    }
}

impl Add for LinTerm {
    type Output = LinTerm;
    fn add(mut self, rhs: LinTerm) -> LinTerm {
        self.constant += rhs.constant;
        for (v, c) in rhs.coeffs {
            self.add_coeff(v, c);
        }
        self
    }
}

impl Sub for LinTerm {
    type Output = LinTerm;
    fn sub(self, rhs: LinTerm) -> LinTerm {
        self + (-rhs)
    }
}

impl Neg for LinTerm {
    type Output = LinTerm;
    fn neg(self) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, -c)).collect(),
            constant: -self.constant,
        }
    }
}

impl Mul<&Rational> for LinTerm {
    type Output = LinTerm;
    fn mul(self, k: &Rational) -> LinTerm {
        self.scale(k)
    }
}
