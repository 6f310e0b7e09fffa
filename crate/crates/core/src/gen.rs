//! Seeded random terms: well-typed System F terms built by construction
//! (with plenty of β- and type redexes), and merely well-scoped raw terms.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::reduce::{redex_positions, Rules};
use crate::term::{shift, substitute, unshift, Sort, Term, TermKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scope entry, innermost last: `None` is a type variable, `Some(ty)` a
/// term variable whose type is valid in the scope before it.
type Scope = Vec<Option<Term>>;

fn lookup(scope: &Scope, i: usize) -> Option<Term> {
    let k = scope.len().checked_sub(i + 1)?;
    scope[k].as_ref().map(|ty| shift(ty, i + 1, 0))
}

fn type_vars(scope: &Scope) -> Vec<usize> {
    (0..scope.len()).filter(|&i| scope[scope.len() - 1 - i].is_none()).collect()
}

/// A random System F type over the type variables in scope.
fn random_type(rng: &mut impl Rng, scope: &mut Scope, depth: usize) -> Term {
    let vars = type_vars(scope);
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf && !vars.is_empty() {
        return Term::var(*vars.choose(rng).unwrap());
    }
    let depth = depth.saturating_sub(1);
    if vars.is_empty() || rng.gen_bool(0.3) {
        scope.push(None);
        let body = random_type(rng, scope, depth);
        scope.pop();
        // ∀X.X alone is uninhabited by closed terms; keep it anyway as a type
        return Term::forall(body);
    }
    let a = random_type(rng, scope, depth);
    let b = random_type(rng, scope, depth);
    Term::arrow(a, b)
}

/// A closed System F type of nesting at most `depth`.
pub fn closed_type(rng: &mut impl Rng, depth: usize) -> Term {
    random_type(rng, &mut Vec::new(), depth)
}

struct FGen<'r, R: Rng> {
    rng: &'r mut R,
    scope: Scope,
}

impl<R: Rng> FGen<'_, R> {
    fn ty(&mut self) -> Term {
        random_type(self.rng, &mut self.scope, 2)
    }

    fn vars_of(&self, want: Option<&Term>) -> Vec<(usize, Term)> {
        (0..self.scope.len())
            .filter_map(|i| lookup(&self.scope, i).map(|t| (i, t)))
            .filter(|(_, t)| want.is_none_or(|w| t == w))
            .collect()
    }

    fn under<T>(&mut self, entry: Option<Term>, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push(entry);
        let out = f(self);
        self.scope.pop();
        out
    }

    /// A term together with its type.
    fn synth(&mut self, budget: i64) -> Option<(Term, Term)> {
        let vars = self.vars_of(None);
        if budget <= 1 {
            return vars.choose(self.rng).map(|(i, t)| (Term::var(*i), t.clone())).or_else(|| self.identity());
        }
        match self.rng.gen_range(0..9) {
            0 if !vars.is_empty() => vars.choose(self.rng).map(|(i, t)| (Term::var(*i), t.clone())),
            0 | 1 => {
                let a = self.ty();
                let (m, b) = self.under(Some(a.clone()), |g| g.synth(budget - 2))?;
                Some((Term::lam(a.clone(), m), Term::pi(a, b)))
            }
            2 => {
                let (m, b) = self.under(None, |g| g.synth(budget - 1))?;
                Some((Term::ty_lam(m), Term::forall(b)))
            }
            3 | 4 => {
                let (f, t) = self.synth(budget / 2)?;
                self.eliminate(f, t, budget / 2)
            }
            5 | 6 => {
                // β-redex (λx:A.M) N
                let (n, a) = self.synth(budget / 3)?;
                let (m, b) = self.under(Some(a.clone()), |g| g.synth(budget / 2))?;
                Some((Term::app(Term::lam(a, m), n), unshift(&b, 1, 0)))
            }
            7 => {
                // type redex (ΛX.M){τ}
                let tau = self.ty();
                let (m, b) = self.under(None, |g| g.synth(budget - 2))?;
                Some((Term::app(Term::ty_lam(m), tau.clone()), substitute(&b, &tau)))
            }
            _ => {
                let (f, t) = self.synth(budget - 1)?;
                self.eliminate(f, t, budget / 2)
            }
        }
    }

    fn identity(&mut self) -> Option<(Term, Term)> {
        let id = Term::ty_lam(Term::lam(Term::var(0), Term::var(0)));
        let ty = Term::forall(Term::pi(Term::var(0), Term::var(1)));
        Some((id, ty))
    }

    /// Applies `f : t` to a suitable argument when `t` is a product.
    fn eliminate(&mut self, f: Term, t: Term, budget: i64) -> Option<(Term, Term)> {
        match t.kind() {
            TermKind::Pi(d, b) if d.as_sort() == Some(Sort::Star) => {
                let tau = self.ty();
                Some((Term::app(f, tau.clone()), substitute(b, &tau)))
            }
            TermKind::Pi(d, b) => {
                let arg = self.check(d, budget)?;
                Some((Term::app(f, arg), unshift(b, 1, 0)))
            }
            _ => Some((f, t)),
        }
    }

    /// A term of the given type.
    fn check(&mut self, want: &Term, budget: i64) -> Option<Term> {
        let vars = self.vars_of(Some(want));
        if !vars.is_empty() && (budget <= 2 || self.rng.gen_bool(0.5)) {
            return Some(Term::var(vars.choose(self.rng).unwrap().0));
        }
        match want.kind() {
            TermKind::Pi(d, b) if d.as_sort() == Some(Sort::Star) => {
                let b = b.clone();
                let m = self.under(None, |g| g.check(&b, budget - 1))?;
                Some(Term::ty_lam(m))
            }
            TermKind::Pi(d, b) => {
                let (d, b) = (d.clone(), b.clone());
                let m = self.under(Some(d.clone()), |g| g.check(&b, budget - 2))?;
                Some(Term::lam(d, m))
            }
            _ => {
                for _ in 0..4 {
                    if let Some((m, t)) = self.synth(budget) {
                        if &t == want {
                            return Some(m);
                        }
                    }
                }
                None
            }
        }
    }
}

/// A closed, well-typed System F term of size at most `max_size`, with its
/// type. Generation is by construction; sizes are enforced by rejection.
pub fn well_typed_f(rng: &mut impl Rng, max_size: u64) -> (Term, Term) {
    loop {
        let budget = rng.gen_range(3..=max_size as i64);
        let mut g = FGen { rng: &mut *rng, scope: Vec::new() };
        if let Some((t, ty)) = g.synth(budget) {
            if t.size() <= max_size && t.size() > 1 {
                return (t, ty);
            }
        }
    }
}

/// Like [`well_typed_f`], keeping only terms with at least `redexes`
/// β-redexes (for two-path confluence joins).
pub fn well_typed_f_with_redexes(rng: &mut impl Rng, max_size: u64, redexes: usize) -> (Term, Term) {
    loop {
        let (t, ty) = well_typed_f(rng, max_size);
        if redex_positions(&t, Rules::BETA).len() >= redexes {
            return (t, ty);
        }
    }
}

/// A well-scoped raw term over `free` free variables; not necessarily
/// typable. Biased towards redexes.
pub fn well_scoped(rng: &mut impl Rng, free: usize, max_size: u64) -> Term {
    loop {
        let t = scoped(rng, free, max_size as i64);
        if t.size() <= max_size {
            return t;
        }
    }
}

fn scoped(rng: &mut impl Rng, free: usize, budget: i64) -> Term {
    if budget <= 1 {
        return if free > 0 && rng.gen_bool(0.85) { Term::var(rng.gen_range(0..free)) } else { Term::star() };
    }
    match rng.gen_range(0..10) {
        0 | 1 => Term::lam(scoped(rng, free, 1), scoped(rng, free + 1, budget - 2)),
        2 => Term::pi(scoped(rng, free, budget / 3), scoped(rng, free + 1, budget / 2)),
        3..=5 => {
            Term::app(Term::lam(scoped(rng, free, 1), scoped(rng, free + 1, budget / 2)), scoped(rng, free, budget / 3))
        }
        _ => Term::app(scoped(rng, free, budget / 2), scoped(rng, free, budget / 2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::{infer, Context, SystemSpec};

    #[test]
    fn generated_f_terms_have_their_types() {
        let mut r = rng(7);
        let spec = SystemSpec::system_f();
        let mut redexes = 0;
        for _ in 0..300 {
            let (t, ty) = well_typed_f(&mut r, 20);
            assert!(t.size() <= 20);
            let j = infer(&spec, &Context::new(), &t).unwrap_or_else(|e| panic!("{t:?}: {e}"));
            assert_eq!(j.ty(), &ty, "{t:?}");
            redexes += t.has_beta_redex() as usize;
        }
        assert!(redexes > 100, "only {redexes} terms with redexes");
    }

    #[test]
    fn scoped_terms_are_scoped() {
        let mut r = rng(1);
        for _ in 0..200 {
            let t = well_scoped(&mut r, 2, 25);
            assert!(t.free_bound() <= 2 && t.size() <= 25);
        }
    }

    #[test]
    fn closed_types_are_closed() {
        let mut r = rng(3);
        for _ in 0..100 {
            assert!(closed_type(&mut r, 3).is_closed());
        }
    }
}
