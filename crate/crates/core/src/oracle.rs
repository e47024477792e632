//! Concrete execution, used to cross-check verdicts.

use alloc::collections::BTreeMap;
use core::cmp::Ordering;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::{AnalysisReport, CaseNode, Status};
use crate::linarith::{Atom, Checker, Conj, Dnf, LinTerm, Model, Rational, Relop, VarId};
use crate::model::{LoopSpec, Updates};
use crate::nonterm::{integer_point, UnsupportedRelational, GRID_BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    /// The guard failed after this many iterations.
    Terminated(u64),
    /// Still looping after this many iterations.
    FuelExhausted(u64),
}

/// Runs the loop from `state` for at most `fuel` iterations.
///
/// Integral loops run on `i128` and move to `BigInt` on overflow; anything
/// else runs on exact rationals.
pub fn run_concrete(spec: &LoopSpec, state: &Model, fuel: u64) -> Result<RunOutcome, UnsupportedRelational> {
    let Updates::Deterministic(ups) = &spec.updates else {
        return Err(UnsupportedRelational);
    };
    let vars = &spec.vars;
    let mut steps = 0u64;
    let cur: Vec<Rational> = vars.iter().map(|v| state.get(v).cloned().unwrap_or_else(Rational::zero)).collect();

    if let (Some(prog), true) = (Compiled::new(spec, ups), cur.iter().all(Rational::is_integer)) {
        let mut big: Vec<BigInt> = cur.iter().map(Rational::to_integer).collect();
        if let Some(mut small) = big.iter().map(ToPrimitive::to_i128).collect::<Option<Vec<i128>>>() {
            match prog.run_small(&mut small, &mut steps, fuel) {
                Some(out) => return Ok(out),
                None => big = small.into_iter().map(BigInt::from).collect(),
            }
        }
        return Ok(prog.run_big(big, steps, fuel));
    }

    let index: BTreeMap<&VarId, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let eval = |t: &LinTerm, cur: &[Rational]| -> Rational {
        t.coeffs().iter().fold(t.constant_part().clone(), |acc, (v, c)| acc + c * &cur[index[v]])
    };
    let holds = |a: &Atom, cur: &[Rational]| -> bool { a.relop().holds(&eval(a.term(), cur)) };
    let mut cur = cur;
    while steps < fuel {
        if !spec.guard.disjuncts().iter().any(|d| d.atoms().iter().all(|a| holds(a, &cur))) {
            return Ok(RunOutcome::Terminated(steps));
        }
        let mut next = cur.clone();
        for (v, t) in ups {
            next[index[v]] = eval(t, &cur);
        }
        cur = next;
        steps += 1;
    }
    Ok(RunOutcome::FuelExhausted(fuel))
}

fn sign_ok(op: Relop, ord: Ordering) -> bool {
    match op {
        Relop::Le => ord != Ordering::Greater,
        Relop::Lt => ord == Ordering::Less,
        Relop::Eq => ord == Ordering::Equal,
    }
}

/// `Σ cᵢxᵢ + k` with integer coefficients.
struct IntTerm {
    coeffs: Vec<(usize, BigInt)>,
    constant: BigInt,
    small: Option<(Vec<(usize, i128)>, i128)>,
}

impl IntTerm {
    /// Scales by the lcm of the denominators when `scale` is set; otherwise
    /// requires integral coefficients.
    fn new(t: &LinTerm, index: &BTreeMap<&VarId, usize>, scale: bool) -> Option<IntTerm> {
        let mut den = BigInt::one();
        if scale {
            for c in t.coeffs().values().chain([t.constant_part()]) {
                den = den.lcm(c.denom());
            }
        }
        let den = Rational::from_integer(den);
        let conv = |c: &Rational| {
            let c = c * &den;
            c.is_integer().then(|| c.to_integer())
        };
        let coeffs: Vec<(usize, BigInt)> =
            t.coeffs().iter().map(|(v, c)| Some((*index.get(v)?, conv(c)?))).collect::<Option<_>>()?;
        let constant = conv(t.constant_part())?;
        let small = coeffs
            .iter()
            .map(|(i, c)| Some((*i, c.to_i128()?)))
            .collect::<Option<Vec<_>>>()
            .zip(constant.to_i128());
        Some(IntTerm { coeffs, constant, small })
    }

    fn eval_small(&self, x: &[i128]) -> Option<i128> {
        let (coeffs, k) = self.small.as_ref()?;
        coeffs.iter().try_fold(*k, |acc, &(i, c)| acc.checked_add(c.checked_mul(x[i])?))
    }

    fn eval_big(&self, x: &[BigInt]) -> BigInt {
        self.coeffs.iter().fold(self.constant.clone(), |acc, (i, c)| acc + c * &x[*i])
    }
}

/// Guard and updates of an integral loop.
struct Compiled {
    guard: Vec<Vec<(IntTerm, Relop)>>,
    updates: Vec<(usize, IntTerm)>,
}

impl Compiled {
    fn new(spec: &LoopSpec, ups: &[(VarId, LinTerm)]) -> Option<Compiled> {
        let index: BTreeMap<&VarId, usize> = spec.vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let guard = spec
            .guard
            .disjuncts()
            .iter()
            .map(|d| d.atoms().iter().map(|a| Some((IntTerm::new(a.term(), &index, true)?, a.relop()))).collect())
            .collect::<Option<_>>()?;
        let updates = ups.iter().map(|(v, t)| Some((index[v], IntTerm::new(t, &index, false)?))).collect::<Option<_>>()?;
        Some(Compiled { guard, updates })
    }

    /// `None` on overflow, leaving `x` at the last state reached.
    fn run_small(&self, x: &mut [i128], steps: &mut u64, fuel: u64) -> Option<RunOutcome> {
        let mut next = x.to_vec();
        while *steps < fuel {
            let mut inside = false;
            for d in &self.guard {
                let mut all = true;
                for (t, op) in d {
                    if !sign_ok(*op, t.eval_small(x)?.cmp(&0)) {
                        all = false;
                        break;
                    }
                }
                if all {
                    inside = true;
                    break;
                }
            }
            if !inside {
                return Some(RunOutcome::Terminated(*steps));
            }
            for (i, t) in &self.updates {
                next[*i] = t.eval_small(x)?;
            }
            x.copy_from_slice(&next);
            *steps += 1;
        }
        Some(RunOutcome::FuelExhausted(fuel))
    }

    fn run_big(&self, mut x: Vec<BigInt>, mut steps: u64, fuel: u64) -> RunOutcome {
        let zero = BigInt::zero();
        while steps < fuel {
            let inside = self.guard.iter().any(|d| d.iter().all(|(t, op)| sign_ok(*op, t.eval_big(&x).cmp(&zero))));
            if !inside {
                return RunOutcome::Terminated(steps);
            }
            let mut next = x.clone();
            for (i, t) in &self.updates {
                next[*i] = t.eval_big(&x);
            }
            x = next;
            steps += 1;
        }
        RunOutcome::FuelExhausted(fuel)
    }
}

/// A sampled run that disagrees with a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contradiction {
    pub region: Conj,
    pub claimed: Status,
    pub state: Model,
    pub outcome: RunOutcome,
}

/// Samples integer states from the regions the report settles and runs them.
/// A TERMINATING region whose run exhausts `fuel`, or a NON_TERMINATING
/// region whose run stops, is a contradiction.
///
/// States are drawn uniformly from the box `[-64, 64]ⁿ` and kept when they lie
/// in the region; at most `samples` are kept per region. One point found by
/// search is always added, so thin regions are not skipped entirely.
pub fn cross_validate(
    spec: &LoopSpec,
    report: &AnalysisReport,
    samples: usize,
    fuel: u64,
    seed: u64,
) -> Result<Vec<Contradiction>, UnsupportedRelational> {
    if !spec.is_deterministic() {
        return Err(UnsupportedRelational);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ck = Checker::new(spec.semantics);
    let mut settled = Vec::new();
    maximal_settled(&report.root, &mut settled);
    let mut out = Vec::new();
    for node in settled {
        for g in spec.guard.disjuncts() {
            let region = ck.simplify(&node.pre.and(g));
            if region.is_bottom() {
                continue;
            }
            let mut states: Vec<Model> = Vec::new();
            if let Some(p) = integer_point(&mut ck, &region, &spec.vars) {
                states.push(p);
            }
            for _ in 0..samples.saturating_mul(20) {
                if states.len() > samples {
                    break;
                }
                let m: Model = spec
                    .vars
                    .iter()
                    .map(|v| (v.clone(), Rational::from_integer(rng.random_range(-GRID_BOUND..=GRID_BOUND).into())))
                    .collect();
                if region.holds(&m) == Some(true) {
                    states.push(m);
                }
            }
            for state in states {
                let outcome = run_concrete(spec, &state, fuel)?;
                let bad = matches!(
                    (node.status, outcome),
                    (Status::Terminating, RunOutcome::FuelExhausted(_)) | (Status::NonTerminating, RunOutcome::Terminated(_))
                );
                if bad {
                    out.push(Contradiction { region: region.clone(), claimed: node.status, state, outcome });
                }
            }
        }
    }
    Ok(out)
}

fn maximal_settled<'a>(n: &'a CaseNode, out: &mut Vec<&'a CaseNode>) {
    match n.status {
        Status::Terminating | Status::NonTerminating => out.push(n),
        _ => n.children.iter().for_each(|c| maximal_settled(c, out)),
    }
}

/// Runs every state of `pre ∧ guard` in the box `[-bound, bound]ⁿ`.
/// Intended for tests on one- and two-variable loops.
pub fn exhaustive_runs(spec: &LoopSpec, pre: &Dnf, bound: i64, fuel: u64) -> Result<Vec<(Model, RunOutcome)>, UnsupportedRelational> {
    let n = spec.vars.len();
    let width = (2 * bound + 1) as u64;
    let total = width.checked_pow(n as u32).unwrap_or(u64::MAX);
    let mut out = Vec::new();
    for k in 0..total {
        let mut rest = k;
        let mut m = Model::new();
        for v in &spec.vars {
            let val = (rest % width) as i64 - bound;
            rest /= width;
            m.insert(v.clone(), Rational::from_integer(val.into()));
        }
        if pre.holds(&m) == Some(true) {
            let o = run_concrete(spec, &m, fuel)?;
            out.push((m, o));
        }
    }
    Ok(out)
}
