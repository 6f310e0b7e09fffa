//! Call-by-need normalization by evaluation.
//!
//! Normal-order rewriting re-evaluates an argument every time it is used,
//! which makes Church arithmetic over typed terms (state threaded through
//! iterators) exponential. This evaluator shares each argument as a
//! memoized thunk and reads values back under binders, so it computes the
//! same β-normal form (β is confluent and call-by-need never evaluates an
//! argument normal order would discard) at a fraction of the cost.
//!
//! `J` is inert here: its δ-rules belong to the rewriting engine in
//! [`crate::reduce`]. Fuel counts β-contractions actually performed.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::rc::Rc;

use crate::term::{grow, Sort, Term, TermKind};
use crate::typing::Verdict;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluated {
    pub term: Term,
    pub beta_steps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuelExhausted {
    pub fuel: u64,
}

impl fmt::Display for FuelExhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "shared evaluation exhausted {} β-steps", self.fuel)
    }
}

impl std::error::Error for FuelExhausted {}

/// β-normal form of `t` by call-by-need evaluation, or an error once more
/// than `fuel` contractions were needed.
pub fn normal_form(t: &Term, fuel: u64) -> Result<Evaluated, FuelExhausted> {
    let ev = Evaluator { fuel, used: Cell::new(0) };
    let n = t.free_bound();
    let mut env = Env::Nil;
    for level in 0..n {
        env = env.push(Thunk::neutral(level));
    }
    let v = ev.eval(t, &env)?;
    let term = ev.quote(&v, n)?;
    Ok(Evaluated { term, beta_steps: ev.used.get() })
}

/// Conversion by shared evaluation: each side gets its own `fuel`.
pub fn convertible(a: &Term, b: &Term, fuel: u64) -> Verdict {
    if a == b {
        return Verdict::Convertible { steps: 0 };
    }
    match (normal_form(a, fuel), normal_form(b, fuel)) {
        (Ok(x), Ok(y)) if x.term == y.term => Verdict::Convertible { steps: x.beta_steps + y.beta_steps },
        (Ok(_), Ok(_)) => Verdict::Distinct,
        _ => Verdict::FuelExhausted,
    }
}

#[derive(Clone)]
enum Env {
    Nil,
    Cons(Rc<(Thunk, Env)>),
}

impl Env {
    fn push(&self, t: Thunk) -> Env {
        Env::Cons(Rc::new((t, self.clone())))
    }

    fn get(&self, mut i: usize) -> &Thunk {
        let mut cur = self;
        loop {
            match cur {
                Env::Nil => panic!("unbound index in shared evaluation"),
                Env::Cons(c) if i == 0 => return &c.0,
                Env::Cons(c) => {
                    i -= 1;
                    cur = &c.1;
                }
            }
        }
    }
}

#[derive(Clone)]
struct Thunk(Rc<RefCell<State>>);

enum State {
    Delayed(Term, Env),
    Forced(Rc<Value>),
    Busy,
}

impl Thunk {
    fn delayed(t: &Term, env: &Env) -> Thunk {
        Thunk(Rc::new(RefCell::new(State::Delayed(t.clone(), env.clone()))))
    }

    fn neutral(level: usize) -> Thunk {
        Thunk(Rc::new(RefCell::new(State::Forced(Rc::new(Value::Neutral(Head::Var(level), Vec::new()))))))
    }
}

// Evaluation histories form long thunk → value → environment → thunk
// chains; releasing them recursively overflows the stack, so the last owner
// of a thunk hands its state to a queue that is drained iteratively.
thread_local! {
    static GRAVEYARD: RefCell<(bool, Vec<State>)> = const { RefCell::new((false, Vec::new())) };
}

impl Drop for Thunk {
    fn drop(&mut self) {
        if Rc::strong_count(&self.0) != 1 {
            return;
        }
        let Ok(mut cell) = self.0.try_borrow_mut() else { return };
        let state = std::mem::replace(&mut *cell, State::Busy);
        drop(cell);
        if matches!(state, State::Busy) {
            return;
        }
        let draining = GRAVEYARD.with(|g| {
            let mut g = g.borrow_mut();
            g.1.push(state);
            std::mem::replace(&mut g.0, true)
        });
        if draining {
            return;
        }
        while let Some(next) = GRAVEYARD.with(|g| g.borrow_mut().1.pop()) {
            drop(next);
        }
        GRAVEYARD.with(|g| g.borrow_mut().0 = false);
    }
}

struct Closure {
    body: Term,
    env: Env,
}

enum Head {
    Var(usize),
    J,
    /// A sort or product in function position (only in ill-typed input).
    Stuck(Rc<Value>),
}

enum Value {
    Sort(Sort),
    Lam(Thunk, Closure),
    Pi(Thunk, Closure),
    Neutral(Head, Vec<Thunk>),
}

struct Evaluator {
    fuel: u64,
    used: Cell<u64>,
}

impl Evaluator {
    fn force(&self, th: &Thunk) -> Result<Rc<Value>, FuelExhausted> {
        let state = std::mem::replace(&mut *th.0.borrow_mut(), State::Busy);
        match state {
            State::Forced(v) => {
                *th.0.borrow_mut() = State::Forced(v.clone());
                Ok(v)
            }
            State::Delayed(t, env) => match self.eval(&t, &env) {
                Ok(v) => {
                    *th.0.borrow_mut() = State::Forced(v.clone());
                    Ok(v)
                }
                Err(e) => {
                    *th.0.borrow_mut() = State::Delayed(t, env);
                    Err(e)
                }
            },
            State::Busy => unreachable!("thunk re-entered while being forced"),
        }
    }

    fn eval(&self, t: &Term, env: &Env) -> Result<Rc<Value>, FuelExhausted> {
        grow(|| match t.kind() {
            TermKind::Var(i) => self.force(env.get(*i)),
            TermKind::Sort(s) => Ok(Rc::new(Value::Sort(*s))),
            TermKind::Lam(d, b) => {
                Ok(Rc::new(Value::Lam(Thunk::delayed(d, env), Closure { body: b.clone(), env: env.clone() })))
            }
            TermKind::Pi(d, b) => {
                Ok(Rc::new(Value::Pi(Thunk::delayed(d, env), Closure { body: b.clone(), env: env.clone() })))
            }
            TermKind::PrimJ => Ok(Rc::new(Value::Neutral(Head::J, Vec::new()))),
            TermKind::App(f, a) => {
                let fv = self.eval(f, env)?;
                // variables keep pointing at the same thunk: this is the sharing
                let arg = match a.kind() {
                    TermKind::Var(i) => env.get(*i).clone(),
                    _ => Thunk::delayed(a, env),
                };
                self.apply(fv, arg)
            }
        })
    }

    fn apply(&self, f: Rc<Value>, arg: Thunk) -> Result<Rc<Value>, FuelExhausted> {
        match &*f {
            Value::Lam(_, clo) => {
                let n = self.used.get();
                if n >= self.fuel {
                    return Err(FuelExhausted { fuel: self.fuel });
                }
                self.used.set(n + 1);
                self.eval(&clo.body, &clo.env.push(arg))
            }
            Value::Neutral(h, args) => {
                let head = match h {
                    Head::Var(l) => Head::Var(*l),
                    Head::J => Head::J,
                    Head::Stuck(v) => Head::Stuck(v.clone()),
                };
                let mut args = args.clone();
                args.push(arg);
                Ok(Rc::new(Value::Neutral(head, args)))
            }
            Value::Sort(_) | Value::Pi(..) => Ok(Rc::new(Value::Neutral(Head::Stuck(f.clone()), vec![arg]))),
        }
    }

    fn under(&self, clo: &Closure, depth: usize) -> Result<Term, FuelExhausted> {
        let v = self.eval(&clo.body, &clo.env.push(Thunk::neutral(depth)))?;
        self.quote(&v, depth + 1)
    }

    fn quote(&self, v: &Value, depth: usize) -> Result<Term, FuelExhausted> {
        grow(|| match v {
            Value::Sort(s) => Ok(Term::sort(*s)),
            Value::Lam(d, clo) => {
                let d = self.force(d)?;
                Ok(Term::lam(self.quote(&d, depth)?, self.under(clo, depth)?))
            }
            Value::Pi(d, clo) => {
                let d = self.force(d)?;
                Ok(Term::pi(self.quote(&d, depth)?, self.under(clo, depth)?))
            }
            Value::Neutral(h, args) => {
                let mut t = match h {
                    Head::Var(l) => Term::var(depth - 1 - l),
                    Head::J => Term::prim_j(),
                    Head::Stuck(v) => self.quote(v, depth)?,
                };
                for a in args {
                    let a = self.force(a)?;
                    t = Term::app(t, self.quote(&a, depth)?);
                }
                Ok(t)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{numeral, numeral_value, term};
    use crate::reduce::Normalizer;

    #[test]
    fn agrees_with_normal_order_on_small_terms() {
        for name in ["add", "mul", "sub", "pow"] {
            let t = Term::apps(term(name), [numeral(3), numeral(2)]);
            let slow = Normalizer::new(1_000_000).normal_form(&t).unwrap();
            assert_eq!(normal_form(&t, 1_000_000).unwrap().term, slow, "{name}");
        }
    }

    #[test]
    fn open_terms_keep_their_free_variables() {
        let t = Term::app(Term::lam(Term::star(), Term::app(Term::var(0), Term::var(1))), Term::var(3));
        assert_eq!(normal_form(&t, 10).unwrap().term, Term::app(Term::var(3), Term::var(0)));
    }

    #[test]
    fn shares_work_that_normal_order_repeats() {
        let t = Term::apps(term("delta"), [numeral(2), numeral(18)]);
        let r = normal_form(&t, 10_000_000).unwrap();
        assert_eq!(numeral_value(&r.term), Some(2));
    }

    #[test]
    fn fuel_is_enforced() {
        let t = Term::apps(term("mul"), [numeral(5), numeral(5)]);
        assert_eq!(normal_form(&t, 3), Err(FuelExhausted { fuel: 3 }));
    }
}
