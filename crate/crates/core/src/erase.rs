//! Erasure of Church-style System F terms to untyped λ-terms (the Curry view).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::reduce::{Dir, Position};
use crate::term::{grow, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UntypedTerm {
    Var(usize),
    Lam(Arc<UntypedTerm>),
    App(Arc<UntypedTerm>, Arc<UntypedTerm>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EraseError {
    #[error("J has no uniform untyped meaning (at {0})")]
    PrimitiveJ(Position),
    #[error("type expression in term position at {0}")]
    TypeInTermPosition(Position),
    #[error("unbound variable #{index} at {position}")]
    Unbound { index: usize, position: Position },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Binder {
    Type,
    Value,
}

/// Erases a closed System F term.
pub fn erase(t: &Term) -> Result<UntypedTerm, EraseError> {
    erase_in(&[], t)
}

/// Erases a term whose free variables are described by `type_vars`
/// (innermost last): `true` marks a type variable.
pub fn erase_in(type_vars: &[bool], t: &Term) -> Result<UntypedTerm, EraseError> {
    let mut scope: Vec<Binder> = type_vars.iter().map(|&b| if b { Binder::Type } else { Binder::Value }).collect();
    go(&mut scope, t, &mut Vec::new())
}

fn is_type_arg(scope: &[Binder], t: &Term) -> bool {
    match t.kind() {
        TermKind::Pi(..) | TermKind::Sort(_) => true,
        TermKind::Var(i) => scope.len() > *i && scope[scope.len() - 1 - i] == Binder::Type,
        _ => false,
    }
}

fn go(scope: &mut Vec<Binder>, t: &Term, path: &mut Vec<Dir>) -> Result<UntypedTerm, EraseError> {
    grow(|| match t.kind() {
        TermKind::Var(i) => {
            if *i >= scope.len() {
                return Err(EraseError::Unbound { index: *i, position: Position(path.clone()) });
            }
            let k = scope.len() - 1 - i;
            if scope[k] == Binder::Type {
                return Err(EraseError::TypeInTermPosition(Position(path.clone())));
            }
            let skipped = scope[k + 1..].iter().filter(|b| **b == Binder::Value).count();
            Ok(UntypedTerm::Var(skipped))
        }
        TermKind::PrimJ => Err(EraseError::PrimitiveJ(Position(path.clone()))),
        TermKind::Sort(_) | TermKind::Pi(..) => Err(EraseError::TypeInTermPosition(Position(path.clone()))),
        TermKind::Lam(d, b) => {
            let kind = if d.as_sort().is_some() { Binder::Type } else { Binder::Value };
            scope.push(kind);
            path.push(Dir::Body);
            let body = go(scope, b, path);
            path.pop();
            scope.pop();
            let body = body?;
            Ok(match kind {
                Binder::Type => body,
                Binder::Value => UntypedTerm::Lam(Arc::new(body)),
            })
        }
        TermKind::App(f, a) => {
            path.push(Dir::Fun);
            let ef = go(scope, f, path);
            path.pop();
            let ef = ef?;
            if is_type_arg(scope, a) {
                return Ok(ef);
            }
            path.push(Dir::Arg);
            let ea = go(scope, a, path);
            path.pop();
            Ok(UntypedTerm::App(Arc::new(ef), Arc::new(ea?)))
        }
    })
}

/// Is the redex `App(Lam(domain, _), _)` at `pos` a type redex `(ΛX.M){τ}`?
pub fn is_type_redex(t: &Term, pos: &Position) -> bool {
    match pos.subterm(t).as_ref().map(Term::kind) {
        Some(TermKind::App(f, _)) => matches!(f.kind(), TermKind::Lam(d, _) if d.as_sort().is_some()),
        _ => false,
    }
}

impl UntypedTerm {
    pub fn var(i: usize) -> Self {
        UntypedTerm::Var(i)
    }

    pub fn lam(body: UntypedTerm) -> Self {
        UntypedTerm::Lam(Arc::new(body))
    }

    pub fn app(f: UntypedTerm, a: UntypedTerm) -> Self {
        UntypedTerm::App(Arc::new(f), Arc::new(a))
    }

    fn shift(&self, by: usize, cutoff: usize) -> UntypedTerm {
        match self {
            UntypedTerm::Var(i) if *i >= cutoff => UntypedTerm::Var(i + by),
            UntypedTerm::Var(_) => self.clone(),
            UntypedTerm::Lam(b) => UntypedTerm::lam(b.shift(by, cutoff + 1)),
            UntypedTerm::App(f, a) => UntypedTerm::app(f.shift(by, cutoff), a.shift(by, cutoff)),
        }
    }

    fn subst(&self, depth: usize, arg: &UntypedTerm) -> UntypedTerm {
        match self {
            UntypedTerm::Var(i) if *i == depth => arg.shift(depth, 0),
            UntypedTerm::Var(i) if *i > depth => UntypedTerm::Var(i - 1),
            UntypedTerm::Var(_) => self.clone(),
            UntypedTerm::Lam(b) => UntypedTerm::lam(b.subst(depth + 1, arg)),
            UntypedTerm::App(f, a) => UntypedTerm::app(f.subst(depth, arg), a.subst(depth, arg)),
        }
    }

    /// Every term reachable by contracting exactly one β-redex.
    pub fn one_step_reducts(&self) -> Vec<UntypedTerm> {
        let mut out = Vec::new();
        match self {
            UntypedTerm::Var(_) => {}
            UntypedTerm::Lam(b) => out.extend(b.one_step_reducts().into_iter().map(UntypedTerm::lam)),
            UntypedTerm::App(f, a) => {
                if let UntypedTerm::Lam(body) = &**f {
                    out.push(body.subst(0, a));
                }
                out.extend(f.one_step_reducts().into_iter().map(|nf| UntypedTerm::App(Arc::new(nf), a.clone())));
                out.extend(a.one_step_reducts().into_iter().map(|na| UntypedTerm::App(f.clone(), Arc::new(na))));
            }
        }
        out
    }

    /// Leftmost-outermost step.
    pub fn step(&self) -> Option<UntypedTerm> {
        match self {
            UntypedTerm::Var(_) => None,
            UntypedTerm::Lam(b) => b.step().map(UntypedTerm::lam),
            UntypedTerm::App(f, a) => {
                if let UntypedTerm::Lam(body) = &**f {
                    return Some(body.subst(0, a));
                }
                if let Some(nf) = f.step() {
                    return Some(UntypedTerm::App(Arc::new(nf), a.clone()));
                }
                a.step().map(|na| UntypedTerm::App(f.clone(), Arc::new(na)))
            }
        }
    }

    fn write(&self, names: &mut Vec<String>, out: &mut String) {
        match self {
            UntypedTerm::Var(i) => match names.len().checked_sub(i + 1) {
                Some(k) => out.push_str(&names[k]),
                None => out.push_str(&format!("#{}", i - names.len())),
            },
            UntypedTerm::Lam(b) => {
                let name = untyped_name(names.len());
                out.push('λ');
                out.push_str(&name);
                out.push('.');
                names.push(name);
                b.write(names, out);
                names.pop();
            }
            UntypedTerm::App(f, a) => {
                let paren_f = matches!(**f, UntypedTerm::Lam(_));
                if paren_f {
                    out.push('(');
                }
                f.write(names, out);
                if paren_f {
                    out.push(')');
                }
                let paren_a = !matches!(**a, UntypedTerm::Var(_));
                if paren_a {
                    out.push('(');
                } else {
                    out.push(' ');
                }
                a.write(names, out);
                if paren_a {
                    out.push(')');
                }
            }
        }
    }
}

fn untyped_name(depth: usize) -> String {
    const POOL: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    let base = POOL[depth % POOL.len()];
    match depth / POOL.len() {
        0 => base.to_string(),
        n => format!("{base}{n}"),
    }
}

impl fmt::Display for UntypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut Vec::new(), &mut s);
        f.write_str(&s)
    }
}
