//! Executable forms of the metatheory: genericity of polymorphic terms,
//! erasure simulation, confluence joins and normalization checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encodings;
use crate::erase::{erase, is_type_redex};
use crate::reduce::{contract_at, redex_positions, step_normal_order, Normalizer, Outcome, Rules, DEFAULT_FUEL};
use crate::term::{substitute, Sort, Term, TermKind};

/// `Some(nf)` when `t` reaches a normal form within `fuel` normal-order steps.
pub fn normalizes(t: &Term, rules: Rules, fuel: u64) -> Option<Term> {
    match Normalizer::new(fuel).rules(rules).run(t).outcome {
        Outcome::NormalForm(n) => Some(n),
        _ => None,
    }
}

/// The body `σ` of a type `∀X.σ`.
pub fn forall_body(ty: &Term) -> Option<&Term> {
    match ty.kind() {
        TermKind::Pi(d, b) if d.as_sort() == Some(Sort::Star) => Some(b),
        _ => None,
    }
}

/// Ten closed instantiation types for `∀X.σ`, the first being `∀X.σ` itself.
pub fn instantiation_types(forall: &Term) -> Vec<Term> {
    let t = encodings::term;
    let arrow = Term::arrow;
    vec![
        forall.clone(),
        t("Bool"),
        t("rho"),
        t("Nat"),
        t("ListBool"),
        t("Falsum"),
        arrow(t("Bool"), t("Nat")),
        arrow(arrow(t("Bool"), t("Bool")), t("Bool")),
        Term::forall(arrow(arrow(Term::var(0), Term::var(0)), Term::var(0))),
        arrow(t("rho"), t("rho")),
    ]
}

#[derive(Clone, Debug)]
pub enum GenericityFailure {
    /// `M{X}` with `X` free has no normal form within fuel.
    OpenDiverges,
    InstanceDiverges {
        tau: Term,
    },
    Mismatch {
        tau: Term,
        direct: Term,
        generic: Term,
    },
}

/// `nf(M{τ}) ≡ nf(M{X})[τ/X]` for a closed `M`.
pub fn genericity(m: &Term, tau: &Term, rules: Rules, fuel: u64) -> Result<(), GenericityFailure> {
    let open = normalizes(&Term::app(m.clone(), Term::var(0)), rules, fuel).ok_or(GenericityFailure::OpenDiverges)?;
    let generic = substitute(&open, tau);
    let direct = normalizes(&Term::app(m.clone(), tau.clone()), rules, fuel)
        .ok_or_else(|| GenericityFailure::InstanceDiverges { tau: tau.clone() })?;
    if direct == generic {
        Ok(())
    } else {
        Err(GenericityFailure::Mismatch { tau: tau.clone(), direct, generic })
    }
}

#[derive(Clone, Debug)]
pub struct ErasureFailure {
    pub term: Term,
    pub reduct: Term,
    pub type_redex: bool,
    pub reason: String,
}

/// Checks every one-step reduct of every term along the normal-order
/// trace of `t` (at most `max_terms` terms): a type redex must leave the
/// erasure unchanged, a term redex must be one untyped β-step. Returns
/// the number of steps checked.
pub fn erasure_simulation(t: &Term, max_terms: usize) -> Result<usize, ErasureFailure> {
    let mut checked = 0;
    let mut cur = t.clone();
    for _ in 0..max_terms {
        let e = erase(&cur).map_err(|err| ErasureFailure {
            term: cur.clone(),
            reduct: cur.clone(),
            type_redex: false,
            reason: err.to_string(),
        })?;
        let untyped_reducts = e.one_step_reducts();
        for pos in redex_positions(&cur, Rules::BETA) {
            let (next, _) = contract_at(&cur, &pos, Rules::BETA).expect("listed redex contracts");
            let type_redex = is_type_redex(&cur, &pos);
            let fail = |reason: String| ErasureFailure { term: cur.clone(), reduct: next.clone(), type_redex, reason };
            let e2 = erase(&next).map_err(|err| fail(err.to_string()))?;
            let ok = if type_redex { e2 == e } else { untyped_reducts.contains(&e2) };
            if !ok {
                return Err(fail(format!("{e} does not reach {e2} in {} step", if type_redex { 0 } else { 1 })));
            }
            checked += 1;
        }
        match step_normal_order(&cur, Rules::BETA) {
            Some((next, _, _)) => cur = next,
            None => break,
        }
    }
    Ok(checked)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Join {
    /// Fewer than two redexes.
    Trivial,
    /// At least one path ran out of fuel.
    Unresolved,
    Joined,
    Diverged {
        left: Term,
        right: Term,
    },
}

/// Contracts two distinct redexes of `t` (chosen at random), normalizes
/// both results and compares.
pub fn two_path_join(t: &Term, rules: Rules, rng: &mut impl Rng) -> Join {
    let positions = redex_positions(t, rules);
    if positions.len() < 2 {
        return Join::Trivial;
    }
    let mut pick = positions.choose_multiple(rng, 2);
    let (p, q) = (pick.next().unwrap(), pick.next().unwrap());
    let left = contract_at(t, p, rules).map(|r| r.0);
    let right = contract_at(t, q, rules).map(|r| r.0);
    let (Some(left), Some(right)) = (left, right) else { return Join::Unresolved };
    match (normalizes(&left, rules, DEFAULT_FUEL), normalizes(&right, rules, DEFAULT_FUEL)) {
        (Some(a), Some(b)) if a == b => Join::Joined,
        (Some(a), Some(b)) => Join::Diverged { left: a, right: b },
        _ => Join::Unresolved,
    }
}
