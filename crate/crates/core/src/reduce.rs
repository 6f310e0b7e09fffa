//! Normal-order (leftmost-outermost) reduction, the J δ-rules, and the
//! fuel-bounded normalizer with cycle detection.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::term::{grow, substitute, Term, TermKind};

/// Fuel used when deciding whether two closed type arguments of `J` are equal.
pub const J_TYPE_FUEL: u64 = 10_000;
pub const DEFAULT_FUEL: u64 = 10_000;
pub const DEMO_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    Fun,
    Arg,
    Domain,
    Body,
}

/// A path from the root of a term to one of its subterms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Position(pub Vec<Dir>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, d: Dir) -> Position {
        let mut p = self.0.clone();
        p.push(d);
        Position(p)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The subterm at this position, if the path is valid.
    pub fn subterm(&self, t: &Term) -> Option<Term> {
        let mut cur = t.clone();
        for d in &self.0 {
            let next = match (d, cur.kind()) {
                (Dir::Fun, TermKind::App(f, _)) => f.clone(),
                (Dir::Arg, TermKind::App(_, a)) => a.clone(),
                (Dir::Domain, TermKind::Lam(d, _) | TermKind::Pi(d, _)) => d.clone(),
                (Dir::Body, TermKind::Lam(_, b) | TermKind::Pi(_, b)) => b.clone(),
                _ => return None,
            };
            cur = next;
        }
        Some(cur)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|d| match d {
                Dir::Fun => "fun",
                Dir::Arg => "arg",
                Dir::Domain => "dom",
                Dir::Body => "body",
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    Beta,
    /// `J{σ}{σ}M → M`
    DeltaJEq,
    /// `J{σ}{τ}M → ID_τ` for distinct closed σ, τ
    DeltaJNeq,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Beta => "beta",
            Rule::DeltaJEq => "deltaJ-eq",
            Rule::DeltaJNeq => "deltaJ-neq",
        })
    }
}

/// Which rules fire during reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rules {
    pub delta_j: bool,
}

impl Rules {
    pub const BETA: Rules = Rules { delta_j: false };
    pub const BETA_J: Rules = Rules { delta_j: true };
}

/// `λx:τ.x`, the output of the second J rule.
pub fn identity_at(ty: &Term) -> Term {
    Term::lam(ty.clone(), Term::var(0))
}

/// If `t` is a J δ-redex (J applied to exactly three arguments with closed
/// type arguments), returns its contractum.
pub fn j_contract(t: &Term) -> Option<(Term, Rule)> {
    let TermKind::App(f, m) = t.kind() else { return None };
    let TermKind::App(f, tau) = f.kind() else { return None };
    let TermKind::App(j, sigma) = f.kind() else { return None };
    if !matches!(j.kind(), TermKind::PrimJ) || !sigma.is_closed() || !tau.is_closed() {
        return None;
    }
    let s = Normalizer::new(J_TYPE_FUEL).rules(Rules::BETA).normal_form(sigma)?;
    let u = Normalizer::new(J_TYPE_FUEL).rules(Rules::BETA).normal_form(tau)?;
    if s == u {
        Some((m.clone(), Rule::DeltaJEq))
    } else {
        Some((identity_at(tau), Rule::DeltaJNeq))
    }
}

fn contract_here(t: &Term, rules: Rules) -> Option<(Term, Rule)> {
    if let TermKind::App(f, a) = t.kind() {
        if let TermKind::Lam(_, body) = f.kind() {
            return Some((substitute(body, a), Rule::Beta));
        }
        if rules.delta_j && t.contains_j() {
            return j_contract(t);
        }
    }
    None
}

fn may_contain_redex(t: &Term, rules: Rules) -> bool {
    t.has_beta_redex() || (rules.delta_j && t.contains_j())
}

/// One leftmost-outermost contraction: the new term, the redex position and
/// the rule used. `None` when `t` is normal.
pub fn step_normal_order(t: &Term, rules: Rules) -> Option<(Term, Position, Rule)> {
    let mut path = Vec::new();
    let (out, rule) = step_rec(t, rules, &mut path)?;
    Some((out, Position(path), rule))
}

fn step_rec(t: &Term, rules: Rules, path: &mut Vec<Dir>) -> Option<(Term, Rule)> {
    if !may_contain_redex(t, rules) {
        return None;
    }
    if let Some(hit) = contract_here(t, rules) {
        return Some(hit);
    }
    grow(|| {
        let (a, b, dirs): (&Term, &Term, [Dir; 2]) = match t.kind() {
            TermKind::App(f, a) => (f, a, [Dir::Fun, Dir::Arg]),
            TermKind::Lam(d, b) | TermKind::Pi(d, b) => (d, b, [Dir::Domain, Dir::Body]),
            _ => return None,
        };
        path.push(dirs[0]);
        if let Some((na, r)) = step_rec(a, rules, path) {
            return Some((rebuild(t, Some(na), None), r));
        }
        path.pop();
        path.push(dirs[1]);
        if let Some((nb, r)) = step_rec(b, rules, path) {
            return Some((rebuild(t, None, Some(nb)), r));
        }
        path.pop();
        None
    })
}

fn rebuild(t: &Term, first: Option<Term>, second: Option<Term>) -> Term {
    match t.kind() {
        TermKind::App(f, a) => Term::app(first.unwrap_or_else(|| f.clone()), second.unwrap_or_else(|| a.clone())),
        TermKind::Lam(d, b) => Term::lam(first.unwrap_or_else(|| d.clone()), second.unwrap_or_else(|| b.clone())),
        TermKind::Pi(d, b) => Term::pi(first.unwrap_or_else(|| d.clone()), second.unwrap_or_else(|| b.clone())),
        _ => t.clone(),
    }
}

/// One β-step in normal order, or `None` on a β-normal form.
pub fn beta_step_normal_order(t: &Term) -> Option<(Term, Position)> {
    step_normal_order(t, Rules::BETA).map(|(t, p, _)| (t, p))
}

/// Every redex position, in leftmost-outermost order.
pub fn redex_positions(t: &Term, rules: Rules) -> Vec<Position> {
    fn go(t: &Term, rules: Rules, path: &mut Vec<Dir>, out: &mut Vec<Position>) {
        if !may_contain_redex(t, rules) {
            return;
        }
        if is_redex(t, rules) {
            out.push(Position(path.clone()));
        }
        grow(|| {
            let (a, b, dirs) = match t.kind() {
                TermKind::App(f, a) => (f, a, [Dir::Fun, Dir::Arg]),
                TermKind::Lam(d, b) | TermKind::Pi(d, b) => (d, b, [Dir::Domain, Dir::Body]),
                _ => return,
            };
            path.push(dirs[0]);
            go(a, rules, path, out);
            path.pop();
            path.push(dirs[1]);
            go(b, rules, path, out);
            path.pop();
        })
    }
    let mut out = Vec::new();
    go(t, rules, &mut Vec::new(), &mut out);
    out
}

pub fn is_redex(t: &Term, rules: Rules) -> bool {
    match t.kind() {
        TermKind::App(f, _) if f.is_lam() => true,
        TermKind::App(..) if rules.delta_j && t.contains_j() => j_contract(t).is_some(),
        _ => false,
    }
}

/// Contracts the redex at `pos` (full-β reduction, any position).
pub fn contract_at(t: &Term, pos: &Position, rules: Rules) -> Option<(Term, Rule)> {
    fn go(t: &Term, dirs: &[Dir], rules: Rules) -> Option<(Term, Rule)> {
        let Some((d, rest)) = dirs.split_first() else {
            return contract_here(t, rules);
        };
        grow(|| {
            let (r, rule) = match (d, t.kind()) {
                (Dir::Fun, TermKind::App(f, _)) | (Dir::Domain, TermKind::Lam(f, _) | TermKind::Pi(f, _)) => {
                    let (n, rule) = go(f, rest, rules)?;
                    (rebuild(t, Some(n), None), rule)
                }
                (Dir::Arg, TermKind::App(_, a)) | (Dir::Body, TermKind::Lam(_, a) | TermKind::Pi(_, a)) => {
                    let (n, rule) = go(a, rest, rules)?;
                    (rebuild(t, None, Some(n)), rule)
                }
                _ => return None,
            };
            Some((r, rule))
        })
    }
    go(t, &pos.0, rules)
}

/// Checks that `t` contains no redex under `rules`.
pub fn is_normal(t: &Term, rules: Rules) -> bool {
    step_normal_order(t, rules).is_none()
}

#[derive(Clone, Debug)]
pub struct Step {
    pub index: u64,
    pub position: Position,
    pub rule: Rule,
    pub before: Term,
    pub after: Term,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    NormalForm(Term),
    FuelExhausted {
        last: Term,
        fuel: u64,
    },
    /// `witness` was first reached after `first_seen` steps and again
    /// `period` steps later.
    CycleDetected {
        period: u64,
        witness: Term,
        first_seen: u64,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::NormalForm(_) => "normal-form",
            Outcome::FuelExhausted { .. } => "fuel-exhausted",
            Outcome::CycleDetected { .. } => "cycle-detected",
        }
    }

    pub fn normal_form(&self) -> Option<&Term> {
        match self {
            Outcome::NormalForm(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub start: Term,
    /// Recorded steps; empty when the normalizer was told not to keep them.
    pub steps: Vec<Step>,
    pub step_count: u64,
    pub outcome: Outcome,
}

impl ReductionTrace {
    /// The term reached after `step_count` contractions.
    pub fn last(&self) -> &Term {
        match &self.outcome {
            Outcome::NormalForm(t) => t,
            Outcome::FuelExhausted { last, .. } => last,
            Outcome::CycleDetected { .. } => self.steps.last().map(|s| &s.after).unwrap_or(&self.start),
        }
    }

    /// All visited terms, starting with the input. Only meaningful when steps
    /// were kept.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.after))
    }
}

/// Fuel-bounded normal-order normalizer.
#[derive(Clone, Copy, Debug)]
pub struct Normalizer {
    pub fuel: u64,
    pub detect_cycles: bool,
    pub rules: Rules,
    pub keep_steps: bool,
}

impl Normalizer {
    pub fn new(fuel: u64) -> Normalizer {
        Normalizer { fuel, detect_cycles: false, rules: Rules::BETA, keep_steps: false }
    }

    pub fn detect_cycles(mut self, on: bool) -> Self {
        self.detect_cycles = on;
        self
    }

    pub fn rules(mut self, rules: Rules) -> Self {
        self.rules = rules;
        self
    }

    pub fn keep_steps(mut self, on: bool) -> Self {
        self.keep_steps = on;
        self
    }

    /// The normal form, or `None` if fuel ran out.
    pub fn normal_form(&self, t: &Term) -> Option<Term> {
        if !may_contain_redex(t, self.rules) {
            return Some(t.clone());
        }
        let mut cur = t.clone();
        for _ in 0..self.fuel {
            match step_normal_order(&cur, self.rules) {
                Some((next, _, _)) => cur = next,
                None => return Some(cur),
            }
        }
        is_normal(&cur, self.rules).then_some(cur)
    }

    pub fn run(&self, t: &Term) -> ReductionTrace {
        self.run_with(t, |_| {})
    }

    /// Runs the normalizer, calling `on_step` after every contraction.
    pub fn run_with(&self, t: &Term, mut on_step: impl FnMut(&Step)) -> ReductionTrace {
        let mut steps = Vec::new();
        let mut seen: HashMap<u64, Vec<u64>> = HashMap::new();
        let mut cur = t.clone();
        if self.detect_cycles {
            seen.insert(cur.fingerprint(), vec![0]);
        }
        let mut count = 0u64;
        loop {
            let Some((next, position, rule)) = step_normal_order(&cur, self.rules) else {
                return ReductionTrace {
                    start: t.clone(),
                    steps,
                    step_count: count,
                    outcome: Outcome::NormalForm(cur),
                };
            };
            if count == self.fuel {
                return ReductionTrace {
                    start: t.clone(),
                    steps,
                    step_count: count,
                    outcome: Outcome::FuelExhausted { last: cur, fuel: self.fuel },
                };
            }
            count += 1;
            let step = Step { index: count - 1, position, rule, before: cur, after: next.clone() };
            on_step(&step);
            if self.keep_steps {
                steps.push(step);
            }
            cur = next;
            if self.detect_cycles {
                let earlier = seen.entry(cur.fingerprint()).or_default();
                for &k in earlier.iter() {
                    let old = if self.keep_steps {
                        if k == 0 {
                            t.clone()
                        } else {
                            steps[k as usize - 1].after.clone()
                        }
                    } else {
                        self.replay(t, k)
                    };
                    if old == cur {
                        return ReductionTrace {
                            start: t.clone(),
                            steps,
                            step_count: count,
                            outcome: Outcome::CycleDetected { period: count - k, witness: cur, first_seen: k },
                        };
                    }
                }
                earlier.push(count);
            }
        }
    }

    /// Recomputes the term after `k` steps; reduction is deterministic.
    fn replay(&self, t: &Term, k: u64) -> Term {
        let mut cur = t.clone();
        for _ in 0..k {
            cur = step_normal_order(&cur, self.rules).expect("replay diverged from the original run").0;
        }
        cur
    }
}

/// Normalizes with β only, recording every step.
pub fn normalize(t: &Term, fuel: u64, detect_cycles: bool) -> ReductionTrace {
    Normalizer::new(fuel).detect_cycles(detect_cycles).keep_steps(true).run(t)
}
