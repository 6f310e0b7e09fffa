//! Pure type system specifications and the type checker.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::reduce::{step_normal_order, Dir, Normalizer, Position, Rules};
use crate::surface::{print_term_in, PrintOptions};
use crate::term::{grow, shift, substitute, Sort, Term, TermKind};

pub const CONVERSION_FUEL: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub name: String,
    pub sorts: BTreeSet<Sort>,
    pub axioms: BTreeMap<Sort, Sort>,
    /// Product formation `(s1, s2) ↦ s3`.
    pub rules: BTreeMap<(Sort, Sort), Sort>,
    /// Whether the constant `J` and its δ-rules are available.
    pub prim_j: bool,
    /// Fuel for each normalization performed during conversion.
    pub conversion_fuel: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("axiom {0} : {1} mentions an undeclared sort")]
    Axiom(Sort, Sort),
    #[error("rule ({0}, {1}, {2}) mentions an undeclared sort")]
    Rule(Sort, Sort, Sort),
    #[error("unknown system `{0}` (expected stlc, f, fj, uminus or star)")]
    UnknownSystem(String),
}

impl SystemSpec {
    pub fn new(
        name: &str,
        sorts: &[Sort],
        axioms: &[(Sort, Sort)],
        rules: &[(Sort, Sort, Sort)],
    ) -> Result<SystemSpec, SpecError> {
        let sorts: BTreeSet<Sort> = sorts.iter().copied().collect();
        for &(a, b) in axioms {
            if !sorts.contains(&a) || !sorts.contains(&b) {
                return Err(SpecError::Axiom(a, b));
            }
        }
        for &(a, b, c) in rules {
            if !sorts.contains(&a) || !sorts.contains(&b) || !sorts.contains(&c) {
                return Err(SpecError::Rule(a, b, c));
            }
        }
        Ok(SystemSpec {
            name: name.to_string(),
            sorts,
            axioms: axioms.iter().copied().collect(),
            rules: rules.iter().map(|&(a, b, c)| ((a, b), c)).collect(),
            prim_j: false,
            conversion_fuel: CONVERSION_FUEL,
        })
    }

    /// λ→: `★ : □`, `(★, ★, ★)`.
    pub fn stlc() -> SystemSpec {
        use Sort::*;
        SystemSpec::new("stlc", &[Star, Box], &[(Star, Box)], &[(Star, Star, Star)]).unwrap()
    }

    /// λ2 / System F: λ→ plus `(□, ★, ★)`.
    pub fn system_f() -> SystemSpec {
        use Sort::*;
        SystemSpec::new("f", &[Star, Box], &[(Star, Box)], &[(Star, Star, Star), (Box, Star, Star)]).unwrap()
    }

    /// System F extended with the non-uniform constant `J`.
    pub fn system_f_j() -> SystemSpec {
        SystemSpec { name: "fj".into(), prim_j: true, ..SystemSpec::system_f() }
    }

    /// λU⁻.
    pub fn u_minus() -> SystemSpec {
        use Sort::*;
        SystemSpec::new(
            "uminus",
            &[Star, Box, Triangle],
            &[(Star, Box), (Box, Triangle)],
            &[(Star, Star, Star), (Box, Star, Star), (Box, Box, Box), (Triangle, Box, Box)],
        )
        .unwrap()
    }

    /// λ★: `★ : ★`, `(★, ★, ★)`.
    pub fn star() -> SystemSpec {
        use Sort::*;
        SystemSpec::new("star", &[Star], &[(Star, Star)], &[(Star, Star, Star)]).unwrap()
    }

    pub fn by_name(name: &str) -> Result<SystemSpec, SpecError> {
        match name {
            "stlc" => Ok(SystemSpec::stlc()),
            "f" => Ok(SystemSpec::system_f()),
            "fj" => Ok(SystemSpec::system_f_j()),
            "uminus" => Ok(SystemSpec::u_minus()),
            "star" => Ok(SystemSpec::star()),
            other => Err(SpecError::UnknownSystem(other.to_string())),
        }
    }

    pub fn with_conversion_fuel(mut self, fuel: u64) -> SystemSpec {
        self.conversion_fuel = fuel;
        self
    }

    pub fn reduction_rules(&self) -> Rules {
        Rules { delta_j: self.prim_j }
    }

    pub fn axiom(&self, s: Sort) -> Option<Sort> {
        self.sorts.contains(&s).then(|| self.axioms.get(&s).copied()).flatten()
    }

    pub fn rule(&self, s1: Sort, s2: Sort) -> Option<Sort> {
        self.rules.get(&(s1, s2)).copied()
    }

    /// Print style for diagnostics: Type:Type reads `★` as `V`.
    pub fn print_options(&self) -> PrintOptions<'static> {
        PrintOptions { star_style: self.name == "star", ..PrintOptions::default() }
    }
}

/// `∀X∀Y((X→X)→(Y→Y))`
pub fn j_type() -> Term {
    let x = Term::var(1);
    let y = Term::var(0);
    Term::forall(Term::forall(Term::arrow(Term::arrow(x.clone(), x), Term::arrow(y.clone(), y))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub ty: Term,
}

/// An ordered list of typing assumptions; each type lives in the scope of
/// the declarations before it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    decls: Vec<Decl>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, ty: Term) {
        self.decls.push(Decl { name: name.into(), ty });
    }

    pub fn with(mut self, name: impl Into<String>, ty: Term) -> Context {
        self.push(name, ty);
        self
    }

    pub fn pop(&mut self) -> Option<Decl> {
        self.decls.pop()
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    /// Type of `Var(index)`, valid in the full context.
    pub fn lookup(&self, index: usize) -> Option<Term> {
        let k = self.decls.len().checked_sub(index + 1)?;
        Some(shift(&self.decls[k].ty, index + 1, 0))
    }

    /// Names, outermost first, for printing.
    pub fn names(&self) -> Vec<String> {
        self.decls.iter().map(|d| d.name.clone()).collect()
    }

    /// Re-checks that every declared type is a type in its prefix.
    pub fn check_well_formed(&self, spec: &SystemSpec) -> Result<(), TypeError> {
        let mut prefix = Context::new();
        for d in &self.decls {
            Checker::new(spec, &prefix, &mut CheckCache::new()).sort_of(&d.ty, &mut Vec::new())?;
            prefix.push(d.name.clone(), d.ty.clone());
        }
        Ok(())
    }
}

/// `Γ ⊢ M : A` in a given system. Only produced by [`infer`] and [`check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    context: Context,
    subject: Term,
    ty: Term,
    system: String,
}

impl Judgment {
    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn ty(&self) -> &Term {
        &self.ty
    }

    pub fn system(&self) -> &str {
        &self.system
    }
}

/// A printed term, kept alongside the raw term in diagnostics.
#[derive(Clone, PartialEq, Eq)]
pub struct Shown {
    pub term: Term,
    pub text: String,
}

impl fmt::Debug for Shown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Display for Shown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound variable #{index} at {position}")]
    UnboundVariable { index: usize, position: Position },
    #[error("sort {sort} has no type in this system (NoAxiom) at {position}")]
    NoAxiom { sort: Sort, position: Position },
    #[error("no product rule ({domain}, {codomain}) in this system (NoRule) at {position}")]
    NoRule { domain: Sort, codomain: Sort, position: Position },
    #[error("J is not available in this system at {position}")]
    PrimitiveDisabled { position: Position },
    #[error("{term} has type {ty}, which is not a sort, at {position}")]
    NotAType { term: Shown, ty: Shown, position: Position },
    #[error("{term} of type {ty} is not a function (NotAFunction) at {position}")]
    NotAFunction { term: Shown, ty: Shown, position: Position },
    #[error("argument type mismatch at {position}: expected {expected}, found {found}")]
    ArgumentTypeMismatch { expected: Shown, found: Shown, position: Position },
    #[error("conversion ran out of fuel at {position}")]
    ConversionFuelExhausted { position: Position },
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: Shown, found: Shown },
}

impl TypeError {
    pub fn kind(&self) -> &'static str {
        match self {
            TypeError::UnboundVariable { .. } => "UnboundVariable",
            TypeError::NoAxiom { .. } => "NoAxiom",
            TypeError::NoRule { .. } => "NoRule",
            TypeError::PrimitiveDisabled { .. } => "PrimitiveDisabled",
            TypeError::NotAType { .. } => "NotAType",
            TypeError::NotAFunction { .. } => "NotAFunction",
            TypeError::ArgumentTypeMismatch { .. } => "ArgumentTypeMismatch",
            TypeError::ConversionFuelExhausted { .. } => "ConversionFuelExhausted",
            TypeError::TypeMismatch { .. } => "TypeMismatch",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Convertible { steps: u64 },
    Distinct,
    FuelExhausted,
}

/// Normalizes both sides (each within `fuel`) and compares them.
pub fn convertible(spec: &SystemSpec, _ctx: &Context, a: &Term, b: &Term, fuel: u64) -> Verdict {
    if a == b {
        return Verdict::Convertible { steps: 0 };
    }
    let n = Normalizer::new(fuel).rules(spec.reduction_rules());
    let ta = n.run(a);
    let tb = n.run(b);
    match (ta.outcome.normal_form(), tb.outcome.normal_form()) {
        (Some(x), Some(y)) if x == y => Verdict::Convertible { steps: ta.step_count + tb.step_count },
        (Some(_), Some(_)) => Verdict::Distinct,
        _ => Verdict::FuelExhausted,
    }
}

/// Memo tables for a series of checks in one system: normal forms with the
/// steps they took, and the types of closed subterms (which do not depend on
/// the context). Reusing one cache across checks of related terms, as the
/// subject reduction probe does, avoids re-deriving shared subterms.
#[derive(Debug, Default)]
pub struct CheckCache {
    system: Option<(String, u64)>,
    normal: HashMap<Term, (Term, u64)>,
    closed: HashMap<Term, Term>,
}

impl CheckCache {
    pub fn new() -> CheckCache {
        CheckCache::default()
    }

    fn bind(&mut self, spec: &SystemSpec) {
        let key = (spec.name.clone(), spec.conversion_fuel);
        if self.system.as_ref() != Some(&key) {
            *self = CheckCache { system: Some(key), ..CheckCache::default() };
        }
    }

    fn normal_form(&mut self, spec: &SystemSpec, t: &Term, fuel: u64) -> Option<(Term, u64)> {
        if let Some((n, steps)) = self.normal.get(t) {
            return (*steps <= fuel).then(|| (n.clone(), *steps));
        }
        let tr = Normalizer::new(fuel).rules(spec.reduction_rules()).run(t);
        let n = tr.outcome.normal_form()?.clone();
        self.normal.insert(t.clone(), (n.clone(), tr.step_count));
        Some((n, tr.step_count))
    }

    /// [`convertible`] through the normal-form table.
    fn convertible(&mut self, spec: &SystemSpec, a: &Term, b: &Term, fuel: u64) -> Verdict {
        if a == b {
            return Verdict::Convertible { steps: 0 };
        }
        match (self.normal_form(spec, a, fuel), self.normal_form(spec, b, fuel)) {
            (Some((x, i)), Some((y, j))) if x == y => Verdict::Convertible { steps: i + j },
            (Some(_), Some(_)) => Verdict::Distinct,
            _ => Verdict::FuelExhausted,
        }
    }
}

pub fn infer(spec: &SystemSpec, ctx: &Context, t: &Term) -> Result<Judgment, TypeError> {
    infer_with(spec, ctx, t, &mut CheckCache::new())
}

pub fn infer_with(spec: &SystemSpec, ctx: &Context, t: &Term, cache: &mut CheckCache) -> Result<Judgment, TypeError> {
    let ty = Checker::new(spec, ctx, cache).infer_mut(t, &mut Vec::new())?;
    Ok(Judgment { context: ctx.clone(), subject: t.clone(), ty, system: spec.name.clone() })
}

/// Infers and then converts against `expected`; the judgment records
/// `expected` as the type.
pub fn check(spec: &SystemSpec, ctx: &Context, t: &Term, expected: &Term) -> Result<Judgment, TypeError> {
    check_with(spec, ctx, t, expected, &mut CheckCache::new())
}

pub fn check_with(
    spec: &SystemSpec,
    ctx: &Context,
    t: &Term,
    expected: &Term,
    cache: &mut CheckCache,
) -> Result<Judgment, TypeError> {
    let mut checker = Checker::new(spec, ctx, cache);
    let found = checker.infer_mut(t, &mut Vec::new())?;
    match checker.cache.convertible(spec, &found, expected, spec.conversion_fuel) {
        Verdict::Convertible { .. } => {
            Ok(Judgment { context: ctx.clone(), subject: t.clone(), ty: expected.clone(), system: spec.name.clone() })
        }
        Verdict::Distinct => {
            Err(TypeError::TypeMismatch { expected: checker.show(expected), found: checker.show(&found) })
        }
        Verdict::FuelExhausted => Err(TypeError::ConversionFuelExhausted { position: Position::root() }),
    }
}

struct Checker<'a> {
    spec: &'a SystemSpec,
    ctx: Context,
    cache: &'a mut CheckCache,
}

impl<'a> Checker<'a> {
    fn new(spec: &'a SystemSpec, ctx: &Context, cache: &'a mut CheckCache) -> Self {
        cache.bind(spec);
        Checker { spec, ctx: ctx.clone(), cache }
    }

    fn show(&self, t: &Term) -> Shown {
        Shown { term: t.clone(), text: print_term_in(&self.ctx.names(), t, &self.spec.print_options()) }
    }

    fn pos(path: &[Dir]) -> Position {
        Position(path.to_vec())
    }

    /// Reduces the head of `t` until it is not a redex.
    fn whnf(&self, t: &Term, path: &[Dir]) -> Result<Term, TypeError> {
        let rules = self.spec.reduction_rules();
        let mut cur = t.clone();
        for _ in 0..self.spec.conversion_fuel {
            let (head, args) = cur.spine();
            let head_redex = match head.kind() {
                TermKind::Lam(..) => !args.is_empty(),
                TermKind::PrimJ => rules.delta_j && args.len() >= 3,
                _ => false,
            };
            if !head_redex {
                return Ok(cur);
            }
            match step_normal_order(&cur, rules) {
                Some((next, pos, _)) if pos.0.iter().all(|d| *d == Dir::Fun) => cur = next,
                _ => return Ok(cur),
            }
        }
        Err(TypeError::ConversionFuelExhausted { position: Self::pos(path) })
    }

    fn sort_of(&mut self, t: &Term, path: &mut Vec<Dir>) -> Result<Sort, TypeError> {
        let ty = self.infer_mut(t, path)?;
        let ty = self.whnf(&ty, path)?;
        ty.as_sort().ok_or_else(|| TypeError::NotAType {
            term: self.show(t),
            ty: self.show(&ty),
            position: Self::pos(path),
        })
    }

    fn infer_mut(&mut self, t: &Term, path: &mut Vec<Dir>) -> Result<Term, TypeError> {
        let closed = t.size() > 1 && t.is_closed();
        if closed {
            if let Some(ty) = self.cache.closed.get(t) {
                return Ok(ty.clone());
            }
        }
        let ty = self.infer_uncached(t, path)?;
        if closed {
            self.cache.closed.insert(t.clone(), ty.clone());
        }
        Ok(ty)
    }

    fn infer_uncached(&mut self, t: &Term, path: &mut Vec<Dir>) -> Result<Term, TypeError> {
        grow(|| match t.kind() {
            TermKind::Var(i) => {
                self.ctx.lookup(*i).ok_or(TypeError::UnboundVariable { index: *i, position: Self::pos(path) })
            }
            TermKind::Sort(s) => {
                self.spec.axiom(*s).map(Term::sort).ok_or(TypeError::NoAxiom { sort: *s, position: Self::pos(path) })
            }
            TermKind::PrimJ => {
                if self.spec.prim_j {
                    Ok(j_type())
                } else {
                    Err(TypeError::PrimitiveDisabled { position: Self::pos(path) })
                }
            }
            TermKind::Pi(d, b) => {
                path.push(Dir::Domain);
                let s1 = self.sort_of(d, path)?;
                path.pop();
                self.ctx.push("_", d.clone());
                path.push(Dir::Body);
                let s2 = self.sort_of(b, path);
                path.pop();
                self.ctx.pop();
                let s2 = s2?;
                self.spec.rule(s1, s2).map(Term::sort).ok_or(TypeError::NoRule {
                    domain: s1,
                    codomain: s2,
                    position: Self::pos(path),
                })
            }
            TermKind::Lam(d, b) => {
                path.push(Dir::Domain);
                let s1 = self.sort_of(d, path)?;
                path.pop();
                self.ctx.push("_", d.clone());
                path.push(Dir::Body);
                let res = self.infer_mut(b, path).and_then(|body_ty| {
                    let s2 = self.sort_of(&body_ty, path)?;
                    Ok((body_ty, s2))
                });
                path.pop();
                self.ctx.pop();
                let (body_ty, s2) = res?;
                if self.spec.rule(s1, s2).is_none() {
                    return Err(TypeError::NoRule { domain: s1, codomain: s2, position: Self::pos(path) });
                }
                Ok(Term::pi(d.clone(), body_ty))
            }
            TermKind::App(f, a) => {
                path.push(Dir::Fun);
                let fty = self.infer_mut(f, path);
                let fty = fty.and_then(|ty| self.whnf(&ty, path));
                path.pop();
                let fty = fty?;
                let TermKind::Pi(dom, cod) = fty.kind() else {
                    return Err(TypeError::NotAFunction {
                        term: self.show(f),
                        ty: self.show(&fty),
                        position: Self::pos(path),
                    });
                };
                path.push(Dir::Arg);
                let aty = self.infer_mut(a, path);
                path.pop();
                let aty = aty?;
                match self.cache.convertible(self.spec, dom, &aty, self.spec.conversion_fuel) {
                    Verdict::Convertible { .. } => Ok(substitute(cod, a)),
                    Verdict::Distinct => Err(TypeError::ArgumentTypeMismatch {
                        expected: self.show(dom),
                        found: self.show(&aty),
                        position: Self::pos(path),
                    }),
                    Verdict::FuelExhausted => Err(TypeError::ConversionFuelExhausted { position: Self::pos(path) }),
                }
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProbeViolation {
    /// Number of contractions performed before the violation was observed.
    pub step: u64,
    pub term: Term,
    pub error: TypeError,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub steps_checked: u64,
    pub reached_normal_form: bool,
    pub violation: Option<ProbeViolation>,
}

impl ProbeReport {
    pub fn clean(&self) -> bool {
        self.violation.is_none()
    }
}

/// Reduces `t` in normal order for up to `steps` contractions, re-checking
/// after each that the reduct still has the original type.
pub fn subject_reduction_probe(spec: &SystemSpec, ctx: &Context, t: &Term, steps: u64) -> ProbeReport {
    let mut cache = CheckCache::new();
    let original = match infer_with(spec, ctx, t, &mut cache) {
        Ok(j) => j.ty,
        Err(error) => {
            return ProbeReport {
                steps_checked: 0,
                reached_normal_form: false,
                violation: Some(ProbeViolation { step: 0, term: t.clone(), error }),
            }
        }
    };
    let rules = spec.reduction_rules();
    let mut cur = t.clone();
    for k in 1..=steps {
        let Some((next, _, _)) = step_normal_order(&cur, rules) else {
            return ProbeReport { steps_checked: k - 1, reached_normal_form: true, violation: None };
        };
        cur = next;
        if let Err(error) = check_with(spec, ctx, &cur, &original, &mut cache) {
            return ProbeReport {
                steps_checked: k,
                reached_normal_form: false,
                violation: Some(ProbeViolation { step: k, term: cur, error }),
            };
        }
    }
    ProbeReport { steps_checked: steps, reached_normal_form: step_normal_order(&cur, rules).is_none(), violation: None }
}
