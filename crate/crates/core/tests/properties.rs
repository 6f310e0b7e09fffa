//! Property tests on random well-scoped terms: substitution against a
//! named-variable oracle, confluence of two-path reductions, and the
//! surface round trip.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ptslab::props::{two_path_join, Join};
use ptslab::surface::{parse_term_in, print_term_in};
use ptslab::term::{substitute, Sort, Term, TermKind};
use ptslab::{Env, PrintOptions, Rules};

/// A raw term whose variable indices are reduced modulo the scope when it
/// is turned into a [`Term`], so every shrink stays well scoped.
#[derive(Clone, Debug)]
enum Raw {
    Var(usize),
    Sort(u8),
    J,
    Lam(Box<Raw>, Box<Raw>),
    Pi(Box<Raw>, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
}

fn raw(depth: u32, size: u32) -> impl Strategy<Value = Raw> {
    let leaf = prop_oneof![
        6 => (0usize..8).prop_map(Raw::Var),
        2 => (0u8..3).prop_map(Raw::Sort),
        1 => Just(Raw::J),
    ];
    leaf.prop_recursive(depth, size, 2, |inner| {
        let bin = |a: Raw, b: Raw| (Box::new(a), Box::new(b));
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(move |(a, b)| { let (a, b) = bin(a, b); Raw::Lam(a, b) }),
            2 => (inner.clone(), inner.clone()).prop_map(move |(a, b)| { let (a, b) = bin(a, b); Raw::Pi(a, b) }),
            3 => (inner.clone(), inner.clone()).prop_map(move |(a, b)| { let (a, b) = bin(a, b); Raw::App(a, b) }),
            3 => (inner.clone(), inner.clone(), inner).prop_map(|(d, b, a)| redex(d, b, a)),
        ]
    })
}

fn redex(d: Raw, b: Raw, a: Raw) -> Raw {
    Raw::App(Box::new(Raw::Lam(Box::new(d), Box::new(b))), Box::new(a))
}

/// A term with at least two redexes, one of them possibly inside the other.
fn two_redexes() -> impl Strategy<Value = Raw> {
    (raw(3, 5), raw(3, 5), raw(3, 5), raw(3, 5), any::<bool>()).prop_map(|(d, b, a, c, nest)| {
        let id = Raw::Lam(Box::new(Raw::Sort(0)), Box::new(Raw::Var(0)));
        if nest {
            redex(d, b, redex(Raw::Sort(0), c, a))
        } else {
            Raw::App(Box::new(redex(d, b, a)), Box::new(Raw::App(Box::new(id), Box::new(c))))
        }
    })
}

fn build(r: &Raw, scope: usize) -> Term {
    match r {
        Raw::Var(i) if scope > 0 => Term::var(i % scope),
        Raw::Var(_) | Raw::Sort(0) => Term::star(),
        Raw::Sort(1) => Term::sort(Sort::Box),
        Raw::Sort(_) => Term::sort(Sort::Triangle),
        Raw::J => Term::prim_j(),
        Raw::Lam(d, b) => Term::lam(build(d, scope), build(b, scope + 1)),
        Raw::Pi(d, b) => Term::pi(build(d, scope), build(b, scope + 1)),
        Raw::App(f, a) => Term::app(build(f, scope), build(a, scope)),
    }
}

fn term(max_size: u64, scope: usize) -> impl Strategy<Value = Term> {
    raw(8, 40).prop_map(move |r| build(&r, scope)).prop_filter("size bound", move |t| t.size() <= max_size)
}

// ---- named oracle -------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Named {
    Var(String),
    Sort(Sort),
    J,
    Lam(String, Box<Named>, Box<Named>),
    Pi(String, Box<Named>, Box<Named>),
    App(Box<Named>, Box<Named>),
}

/// Few names, so shadowing and capture are common.
const POOL: [&str; 4] = ["x", "y", "z", "w"];

fn free_names(t: &Named) -> BTreeSet<String> {
    match t {
        Named::Var(v) => BTreeSet::from([v.clone()]),
        Named::Sort(_) | Named::J => BTreeSet::new(),
        Named::Lam(v, d, b) | Named::Pi(v, d, b) => {
            let mut s = free_names(b);
            s.remove(v);
            s.extend(free_names(d));
            s
        }
        Named::App(f, a) => free_names(f).union(&free_names(a)).cloned().collect(),
    }
}

fn fresh(avoid: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| if k < POOL.len() { POOL[k].to_string() } else { format!("v{k}") })
        .find(|n| !avoid.contains(n))
        .unwrap()
}

/// `names[i]` names de Bruijn index `i`. Binder names are the first pool
/// name not free in the body, which shadows outer names whenever allowed.
fn to_named(t: &Term, names: &mut Vec<String>) -> Named {
    match t.kind() {
        TermKind::Var(i) => Named::Var(names[*i].clone()),
        TermKind::Sort(s) => Named::Sort(*s),
        TermKind::PrimJ => Named::J,
        TermKind::App(f, a) => Named::App(Box::new(to_named(f, names)), Box::new(to_named(a, names))),
        TermKind::Lam(d, b) | TermKind::Pi(d, b) => {
            let d = to_named(d, names);
            names.insert(0, "#".into());
            let probe = to_named(b, names);
            names.remove(0);
            let mut avoid = free_names(&probe);
            avoid.remove("#");
            let v = fresh(&avoid);
            names.insert(0, v.clone());
            let b = to_named(b, names);
            names.remove(0);
            if t.is_lam() {
                Named::Lam(v, Box::new(d), Box::new(b))
            } else {
                Named::Pi(v, Box::new(d), Box::new(b))
            }
        }
    }
}

fn to_debruijn(t: &Named, names: &mut Vec<String>) -> Term {
    match t {
        Named::Var(v) => Term::var(names.iter().position(|n| n == v).expect("scoped")),
        Named::Sort(s) => Term::sort(*s),
        Named::J => Term::prim_j(),
        Named::App(f, a) => Term::app(to_debruijn(f, names), to_debruijn(a, names)),
        Named::Lam(v, d, b) | Named::Pi(v, d, b) => {
            let d = to_debruijn(d, names);
            names.insert(0, v.clone());
            let b = to_debruijn(b, names);
            names.remove(0);
            if matches!(t, Named::Lam(..)) {
                Term::lam(d, b)
            } else {
                Term::pi(d, b)
            }
        }
    }
}

/// Textbook capture-avoiding `t[a/z]`.
fn subst_named(t: &Named, z: &str, a: &Named) -> Named {
    match t {
        Named::Var(v) if v == z => a.clone(),
        Named::Var(_) | Named::Sort(_) | Named::J => t.clone(),
        Named::App(f, x) => Named::App(Box::new(subst_named(f, z, a)), Box::new(subst_named(x, z, a))),
        Named::Lam(v, d, b) | Named::Pi(v, d, b) => {
            let d = subst_named(d, z, a);
            let (v, b) = if v == z {
                (v.clone(), (**b).clone())
            } else if free_names(a).contains(v) && free_names(b).contains(z) {
                let mut avoid = free_names(a);
                avoid.extend(free_names(b));
                avoid.insert(z.to_string());
                let w = fresh(&avoid);
                let renamed = subst_named(b, v, &Named::Var(w.clone()));
                (w, subst_named(&renamed, z, a))
            } else {
                (v.clone(), subst_named(b, z, a))
            };
            if matches!(t, Named::Lam(..)) {
                Named::Lam(v, Box::new(d), Box::new(b))
            } else {
                Named::Pi(v, Box::new(d), Box::new(b))
            }
        }
    }
}

const FREE: usize = 3;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, max_global_rejects: 20_000, ..ProptestConfig::default() })]

    /// `substitute(b, a)` (b under one extra binder, both over FREE free
    /// variables) agrees with named capture-avoiding substitution.
    #[test]
    fn substitution_matches_named_oracle(b in term(30, FREE + 1), a in term(30, FREE)) {
        let ctx: Vec<String> = POOL[..FREE].iter().map(|s| s.to_string()).collect();
        let lam = Term::lam(Term::star(), b.clone());
        let Named::Lam(z, _, body) = to_named(&lam, &mut ctx.clone()) else { unreachable!() };
        let expected = to_debruijn(&subst_named(&body, &z, &to_named(&a, &mut ctx.clone())), &mut ctx.clone());
        prop_assert_eq!(substitute(&b, &a), expected);
    }

    /// The oracle's own translations are inverse to each other.
    #[test]
    fn named_translation_round_trips(t in term(30, FREE)) {
        let ctx: Vec<String> = POOL[..FREE].iter().map(|s| s.to_string()).collect();
        prop_assert_eq!(to_debruijn(&to_named(&t, &mut ctx.clone()), &mut ctx.clone()), t);
    }

    #[test]
    fn two_paths_join_when_both_normalize(r in two_redexes(), seed in any::<u64>()) {
        let t = build(&r, 0);
        prop_assume!(t.size() <= 25);
        let mut rng = ptslab::gen::rng(seed);
        for rules in [Rules::BETA, Rules::BETA_J] {
            if let Join::Diverged { left, right } = two_path_join(&t, rules, &mut rng) {
                prop_assert!(false, "{:?} and {:?} do not join", left, right);
            }
        }
    }

    #[test]
    fn print_then_parse_is_identity(t in term(40, 2), star in any::<bool>()) {
        let names = vec!["a".to_string(), "b".to_string()];
        let text = print_term_in(&names, &t, &PrintOptions { star_style: star, fold: None });
        let back = parse_term_in(&text, &Env::new(), star, &names).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, t, "{}", text);
    }
}
