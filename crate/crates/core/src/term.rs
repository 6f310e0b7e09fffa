//! The unified term language shared by every calculus.
//!
//! Terms use de Bruijn indices: `Var(0)` is the innermost binder. System F
//! type abstraction `ΛX.M` is a `Lam` whose domain is `Sort(Star)`, and type
//! application `M{τ}` is a plain `App`. Every node caches a structural hash,
//! its free-variable bound and whether it contains a redex, so structural
//! equality is α-equivalence and the reducer can skip normal subterms.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Stack headroom used by every recursive traversal over terms.
pub(crate) const RED_ZONE: usize = 128 * 1024;
pub(crate) const STACK_CHUNK: usize = 8 * 1024 * 1024;

#[inline]
pub(crate) fn grow<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    /// `★`, the sort of types (written `V` in Type:Type files).
    Star,
    /// `□`, the sort of kinds.
    Box,
    /// `△`, the extra top sort of System U⁻.
    Triangle,
}

impl Sort {
    pub fn symbol(self) -> &'static str {
        match self {
            Sort::Star => "*",
            Sort::Box => "BOX",
            Sort::Triangle => "TRI",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Star => "★",
            Sort::Box => "□",
            Sort::Triangle => "△",
        })
    }
}

#[derive(Clone, Debug)]
pub enum TermKind {
    Var(usize),
    Sort(Sort),
    /// `Lam(domain, body)`; the body binds one variable.
    Lam(Term, Term),
    App(Term, Term),
    /// `Pi(domain, codomain)`; the codomain binds one variable.
    Pi(Term, Term),
    /// The non-uniform constant `J : ∀X∀Y((X→X)→(Y→Y))`.
    PrimJ,
}

struct Node {
    kind: TermKind,
    hash: u64,
    free_bound: usize,
    size: u64,
    has_beta: bool,
    has_j: bool,
}

/// An immutable, cheaply clonable term.
#[derive(Clone)]
pub struct Term(Arc<Node>);

const fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(a << 6).wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Term {
    fn make(kind: TermKind) -> Term {
        let (hash, free_bound, size, has_beta, has_j) = match &kind {
            TermKind::Var(i) => (mix(1, *i as u64), i + 1, 1, false, false),
            TermKind::Sort(s) => (mix(2, *s as u64), 0, 1, false, false),
            TermKind::PrimJ => (mix(3, 0), 0, 1, false, true),
            TermKind::Lam(d, b) => (
                mix(mix(4, d.0.hash), b.0.hash),
                d.0.free_bound.max(b.0.free_bound.saturating_sub(1)),
                d.0.size.saturating_add(b.0.size).saturating_add(1),
                d.0.has_beta || b.0.has_beta,
                d.0.has_j || b.0.has_j,
            ),
            TermKind::Pi(d, b) => (
                mix(mix(5, d.0.hash), b.0.hash),
                d.0.free_bound.max(b.0.free_bound.saturating_sub(1)),
                d.0.size.saturating_add(b.0.size).saturating_add(1),
                d.0.has_beta || b.0.has_beta,
                d.0.has_j || b.0.has_j,
            ),
            TermKind::App(f, a) => (
                mix(mix(6, f.0.hash), a.0.hash),
                f.0.free_bound.max(a.0.free_bound),
                f.0.size.saturating_add(a.0.size).saturating_add(1),
                f.is_lam() || f.0.has_beta || a.0.has_beta,
                f.0.has_j || a.0.has_j,
            ),
        };
        Term(Arc::new(Node { kind, hash, free_bound, size, has_beta, has_j }))
    }

    pub fn var(index: usize) -> Term {
        Term::make(TermKind::Var(index))
    }

    pub fn sort(s: Sort) -> Term {
        Term::make(TermKind::Sort(s))
    }

    pub fn star() -> Term {
        Term::sort(Sort::Star)
    }

    pub fn lam(domain: Term, body: Term) -> Term {
        Term::make(TermKind::Lam(domain, body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::make(TermKind::App(fun, arg))
    }

    pub fn pi(domain: Term, codomain: Term) -> Term {
        Term::make(TermKind::Pi(domain, codomain))
    }

    pub fn prim_j() -> Term {
        Term::make(TermKind::PrimJ)
    }

    /// Non-dependent product `a → b`, with `b` given in the outer scope.
    pub fn arrow(a: Term, b: Term) -> Term {
        Term::pi(a, shift(&b, 1, 0))
    }

    /// Type abstraction `ΛX.body`, i.e. `λX:★.body`.
    pub fn ty_lam(body: Term) -> Term {
        Term::lam(Term::star(), body)
    }

    /// `∀X.body`, i.e. `ΠX:★.body`.
    pub fn forall(body: Term) -> Term {
        Term::pi(Term::star(), body)
    }

    /// Left-nested application of `head` to `args`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// One more than the largest free de Bruijn index, or 0 when closed.
    pub fn free_bound(&self) -> usize {
        self.0.free_bound
    }

    pub fn is_closed(&self) -> bool {
        self.0.free_bound == 0
    }

    /// Number of nodes, saturating.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    /// Structural hash of the α-canonical form.
    pub fn fingerprint(&self) -> u64 {
        self.0.hash
    }

    pub fn has_beta_redex(&self) -> bool {
        self.0.has_beta
    }

    pub fn contains_j(&self) -> bool {
        self.0.has_j
    }

    pub fn is_lam(&self) -> bool {
        matches!(self.0.kind, TermKind::Lam(..))
    }

    pub fn as_sort(&self) -> Option<Sort> {
        match self.0.kind {
            TermKind::Sort(s) => Some(s),
            _ => None,
        }
    }

    pub fn ptr_eq(a: &Term, b: &Term) -> bool {
        Arc::ptr_eq(&a.0, &b.0)
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut head = self.clone();
        while let TermKind::App(f, a) = head.kind() {
            args.push(a.clone());
            let f = f.clone();
            head = f;
        }
        args.reverse();
        (head, args)
    }

    /// Does `Var(index)` (relative to this term's scope) occur free?
    pub fn mentions(&self, index: usize) -> bool {
        if self.free_bound() <= index {
            return false;
        }
        grow(|| match self.kind() {
            TermKind::Var(i) => *i == index,
            TermKind::Sort(_) | TermKind::PrimJ => false,
            TermKind::App(f, a) => f.mentions(index) || a.mentions(index),
            TermKind::Lam(d, b) | TermKind::Pi(d, b) => d.mentions(index) || b.mentions(index + 1),
        })
    }

    /// Maximum binder nesting depth.
    pub fn depth(&self) -> usize {
        grow(|| match self.kind() {
            TermKind::Var(_) | TermKind::Sort(_) | TermKind::PrimJ => 1,
            TermKind::App(f, a) | TermKind::Lam(f, a) | TermKind::Pi(f, a) => 1 + f.depth().max(a.depth()),
        })
    }
}

fn structural_eq(a: &Term, b: &Term) -> bool {
    if Term::ptr_eq(a, b) {
        return true;
    }
    if a.0.hash != b.0.hash || a.0.size != b.0.size || a.0.free_bound != b.0.free_bound {
        return false;
    }
    grow(|| match (a.kind(), b.kind()) {
        (TermKind::Var(i), TermKind::Var(j)) => i == j,
        (TermKind::Sort(s), TermKind::Sort(t)) => s == t,
        (TermKind::PrimJ, TermKind::PrimJ) => true,
        (TermKind::Lam(d1, b1), TermKind::Lam(d2, b2))
        | (TermKind::Pi(d1, b1), TermKind::Pi(d2, b2))
        | (TermKind::App(d1, b1), TermKind::App(d2, b2)) => structural_eq(d1, d2) && structural_eq(b1, b2),
        _ => false,
    })
}

/// Structural equality on de Bruijn terms, which is α-equivalence.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        structural_eq(self, other)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            TermKind::Var(i) => write!(f, "#{i}"),
            TermKind::Sort(s) => write!(f, "{s}"),
            TermKind::PrimJ => write!(f, "J"),
            TermKind::Lam(d, b) => write!(f, "(λ:{d:?}. {b:?})"),
            TermKind::Pi(d, b) => write!(f, "(Π:{d:?}. {b:?})"),
            TermKind::App(a, b) => write!(f, "({a:?} {b:?})"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_term(self, &crate::surface::PrintOptions::default()))
    }
}

// Dropping a long chain of uniquely owned nodes recursively can exhaust the
// stack, so children are unlinked onto an explicit worklist.
impl Drop for Node {
    fn drop(&mut self) {
        let mut stack: Vec<Term> = Vec::new();
        take_children(&mut self.kind, &mut stack);
        while let Some(term) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(term.0) {
                take_children(&mut node.kind, &mut stack);
            }
        }
    }
}

fn take_children(kind: &mut TermKind, stack: &mut Vec<Term>) {
    match std::mem::replace(kind, TermKind::PrimJ) {
        TermKind::Lam(a, b) | TermKind::Pi(a, b) | TermKind::App(a, b) => {
            stack.push(a);
            stack.push(b);
        }
        _ => {}
    }
}

/// Memo table for traversals of shared subterms. Terms built by reduction
/// are DAGs whose unfolding can be exponentially larger than their node
/// count; caching by node identity keeps traversals linear in the DAG.
#[derive(Default)]
struct Memo(HashMap<(usize, usize), Term>);

impl Memo {
    fn worth(t: &Term) -> bool {
        t.size() > 8 && Arc::strong_count(&t.0) > 1
    }

    fn key(&self, t: &Term, level: usize) -> Option<(usize, usize)> {
        Self::worth(t).then_some((Arc::as_ptr(&t.0) as usize, level))
    }

    fn run(&mut self, t: &Term, level: usize, f: impl FnOnce(&mut Self) -> Term) -> Term {
        let Some(key) = self.key(t, level) else {
            return f(self);
        };
        if let Some(hit) = self.0.get(&key) {
            return hit.clone();
        }
        let out = f(self);
        self.0.insert(key, out.clone());
        out
    }
}

/// Adds `by` to every free index `>= cutoff`.
pub fn shift(t: &Term, by: usize, cutoff: usize) -> Term {
    shift_memo(t, by, cutoff, &mut Memo::default())
}

fn shift_memo(t: &Term, by: usize, cutoff: usize, memo: &mut Memo) -> Term {
    if by == 0 || t.free_bound() <= cutoff {
        return t.clone();
    }
    memo.run(t, cutoff, |memo| {
        grow(|| match t.kind() {
            TermKind::Var(i) => Term::var(i + by),
            TermKind::Sort(_) | TermKind::PrimJ => t.clone(),
            TermKind::App(f, a) => Term::app(shift_memo(f, by, cutoff, memo), shift_memo(a, by, cutoff, memo)),
            TermKind::Lam(d, b) => Term::lam(shift_memo(d, by, cutoff, memo), shift_memo(b, by, cutoff + 1, memo)),
            TermKind::Pi(d, b) => Term::pi(shift_memo(d, by, cutoff, memo), shift_memo(b, by, cutoff + 1, memo)),
        })
    })
}

/// Subtracts `by` from every free index `>= cutoff`; indices in
/// `cutoff..cutoff+by` must not occur.
pub fn unshift(t: &Term, by: usize, cutoff: usize) -> Term {
    fn go(t: &Term, by: usize, cutoff: usize, memo: &mut Memo) -> Term {
        if t.free_bound() <= cutoff {
            return t.clone();
        }
        memo.run(t, cutoff, |memo| {
            grow(|| match t.kind() {
                TermKind::Var(i) => {
                    assert!(*i >= cutoff + by, "unshift of a captured index {i}");
                    Term::var(i - by)
                }
                TermKind::Sort(_) | TermKind::PrimJ => t.clone(),
                TermKind::App(f, a) => Term::app(go(f, by, cutoff, memo), go(a, by, cutoff, memo)),
                TermKind::Lam(d, b) => Term::lam(go(d, by, cutoff, memo), go(b, by, cutoff + 1, memo)),
                TermKind::Pi(d, b) => Term::pi(go(d, by, cutoff, memo), go(b, by, cutoff + 1, memo)),
            })
        })
    }
    if by == 0 {
        return t.clone();
    }
    go(t, by, cutoff, &mut Memo::default())
}

/// Capture-avoiding `body[arg/0]`: `body` is the open scope of a binder and
/// `arg` lives in the binder's ambient scope.
pub fn substitute(body: &Term, arg: &Term) -> Term {
    replace(body, 0, arg, true)
}

/// Replaces the free variable `index` of `t` (in `t`'s own scope) by `arg`,
/// which lives in the same scope, without removing the binder.
pub fn replace_free(t: &Term, index: usize, arg: &Term) -> Term {
    replace(t, index, arg, false)
}

struct Replace<'a> {
    arg: &'a Term,
    /// Remove the binder: indices above the target drop by one.
    lower: bool,
    shifted: Vec<Option<Term>>,
    memo: Memo,
}

impl Replace<'_> {
    fn arg_at(&mut self, depth: usize) -> Term {
        if self.shifted.len() <= depth {
            self.shifted.resize(depth + 1, None);
        }
        if let Some(t) = &self.shifted[depth] {
            return t.clone();
        }
        let t = shift_memo(self.arg, depth, 0, &mut Memo::default());
        self.shifted[depth] = Some(t.clone());
        t
    }

    fn go(&mut self, t: &Term, target: usize, depth: usize) -> Term {
        if t.free_bound() <= target {
            return t.clone();
        }
        let key = self.memo.key(t, depth);
        if let Some(hit) = key.and_then(|k| self.memo.0.get(&k)) {
            return hit.clone();
        }
        let out = grow(|| match t.kind() {
            TermKind::Var(i) if *i == target => self.arg_at(depth),
            TermKind::Var(i) if *i > target && self.lower => Term::var(i - 1),
            TermKind::Var(_) | TermKind::Sort(_) | TermKind::PrimJ => t.clone(),
            TermKind::App(f, a) => Term::app(self.go(f, target, depth), self.go(a, target, depth)),
            TermKind::Lam(d, b) => Term::lam(self.go(d, target, depth), self.go(b, target + 1, depth + 1)),
            TermKind::Pi(d, b) => Term::pi(self.go(d, target, depth), self.go(b, target + 1, depth + 1)),
        });
        if let Some(k) = key {
            self.memo.0.insert(k, out.clone());
        }
        out
    }
}

fn replace(t: &Term, index: usize, arg: &Term, lower: bool) -> Term {
    let mut r = Replace { arg, lower, shifted: Vec::new(), memo: Memo::default() };
    r.go(t, index, 0)
}
