//! The loop-specification language.
//!
//! A `.loop` file describes one loop:
//!
//! ```text
//! vars x, y;
//! pre true;          # optional
//! semantics int;     # optional, `int` (default) or `rat`
//! while x >= 0 {
//!   x := x + y;
//!   y := y - 1;
//! }
//! ```
//!
//! The body is either a block of simultaneous assignments or a single
//! `relation <conjunction>;` over primed and unprimed variables.

mod parse;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linarith::{Atom, Conj, Dnf, LinTerm, Semantics, VarId};

/// Loop body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Updates {
    /// One assignment per declared variable, in declaration order. All
    /// right-hand sides read the pre-state.
    Deterministic(Vec<(VarId, LinTerm)>),
    /// A conjunction over the pre- and post-state vocabularies.
    Relational(Conj),
}

/// A single loop: variables, guard ψ, body, precondition and value domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSpec {
    /// Label used in reports. The parser sets it to `"loop"`.
    pub name: String,
    /// Declared variables, in declaration order.
    pub vars: Vec<VarId>,
    pub guard: Dnf,
    pub updates: Updates,
    pub pre: Dnf,
    pub semantics: Semantics,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { found: String, expected: &'static str },
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("number `{0}` is too large")]
    NumberTooLarge(String),
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("reserved variable name `{0}`")]
    Reserved(String),
    #[error("duplicate `{0}` clause")]
    DuplicateClause(&'static str),
    #[error("duplicate update for `{0}`")]
    DuplicateUpdate(String),
    #[error("missing update for `{0}`")]
    MissingUpdate(String),
    #[error("primed variable on left-hand side")]
    PrimedLhs,
    #[error("primed variable in {0}")]
    PrimedIn(&'static str),
    #[error("non-linear term")]
    NonLinear,
    #[error("division by zero")]
    DivisionByZero,
    #[error("update of `{0}` is not integral under int semantics")]
    NonIntegralUpdate(String),
    #[error("relation must be a single conjunction")]
    DisjunctiveRelation,
}

/// Parses and validates a loop specification.
pub fn parse_loop_spec(text: &str) -> Result<LoopSpec, ParseError> {
    parse::parse(text)
}

/// One transition relation per guard disjunct: the disjunct conjoined with
/// `x' = update(x)` for every variable, or with the relation body.
pub fn rho_of(spec: &LoopSpec) -> Vec<Conj> {
    let body = match &spec.updates {
        Updates::Deterministic(ups) => ups
            .iter()
            .map(|(v, t)| Atom::eq(LinTerm::var(v.primed()), t.clone()))
            .collect::<Conj>(),
        Updates::Relational(c) => c.clone(),
    };
    spec.guard.disjuncts().iter().map(|g| g.and(&body)).collect()
}

impl LoopSpec {
    pub fn is_deterministic(&self) -> bool {
        matches!(self.updates, Updates::Deterministic(_))
    }

    /// The update map, for deterministic specs.
    pub fn update_map(&self) -> Option<BTreeMap<VarId, LinTerm>> {
        match &self.updates {
            Updates::Deterministic(ups) => Some(ups.iter().cloned().collect()),
            Updates::Relational(_) => None,
        }
    }

    /// ψ over the post-state vocabulary.
    pub fn guard_primed(&self) -> Dnf {
        self.guard.prime()
    }
}

impl fmt::Display for LoopSpec {
    /// Canonical source text; parsing it yields the same spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("vars ")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(";\n")?;
        if !self.pre.is_top() {
            writeln!(f, "pre {};", self.pre)?;
        }
        if self.semantics == Semantics::Rat {
            f.write_str("semantics rat;\n")?;
        }
        writeln!(f, "while {} {{", self.guard)?;
        match &self.updates {
            Updates::Deterministic(ups) => {
                for (v, t) in ups {
                    writeln!(f, "  {v} := {t};")?;
                }
            }
            Updates::Relational(c) => writeln!(f, "  relation {c};")?,
        }
        f.write_str("}\n")
    }
}
