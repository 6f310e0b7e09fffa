//! Named terms: the shared corpus for tests, the CLI and the surface prelude.

use std::sync::OnceLock;

use serde::Serialize;

use crate::surface::{parse_term, Env};
use crate::term::Term;

#[derive(Clone, Debug)]
pub struct EncodingEntry {
    pub name: &'static str,
    /// Name of the [`SystemSpec`](crate::typing::SystemSpec) the entry lives in.
    pub system: &'static str,
    pub term: Term,
    pub expected_type: Term,
    pub citation: &'static str,
    pub source: &'static str,
    pub type_source: &'static str,
}

/// JSON-friendly view of an entry.
#[derive(Serialize)]
pub struct EntrySummary<'a> {
    pub name: &'a str,
    pub system: &'a str,
    pub term: &'a str,
    #[serde(rename = "type")]
    pub ty: &'a str,
    pub citation: &'a str,
}

impl EncodingEntry {
    pub fn summary(&self) -> EntrySummary<'_> {
        EntrySummary {
            name: self.name,
            system: self.system,
            term: self.source,
            ty: self.type_source,
            citation: self.citation,
        }
    }
}

type Row = (&'static str, &'static str, &'static str, &'static str, &'static str);

const LIST_Y: &str = "forall Z. Z -> (Y -> Z -> Z) -> Z";

// (system, name, term, type, citation)
const ROWS: &[Row] = &[
    ("f", "ID", "/\\X. \\x:X. x", "forall X. X -> X", "§1.2 ID = ΛX.(λx∈X)x"),
    ("f", "rho", "forall Z. Z -> Z", "*", "§2.3 ρ = ∀Z(Z→Z)"),
    ("f", "Bool", "forall Z. Z -> Z -> Z", "*", "§2.3 fn. 18 Bool"),
    ("f", "T", "/\\Z. \\x:Z. \\y:Z. x", "Bool", "§2.3 fn. 18 T = ΛZ.(λx∈Z)(λy∈Z)x"),
    ("f", "F", "/\\Z. \\x:Z. \\y:Z. y", "Bool", "§2.3 fn. 18 F = ΛZ.(λx∈Z)(λy∈Z)y"),
    ("f", "ID_Bool", "ID {Bool}", "Bool -> Bool", "§1.2 ID_σ = ID{σ}"),
    ("f", "SelfID", "ID {rho} ID", "rho", "§1.2 self-application of ID"),
    ("f", "Delta", "\\x:rho. x {rho} x", "rho -> rho", "§2.3 Δ = (λx∈ρ)(x{ρ})x"),
    ("f", "Not", "\\b:Bool. b {Bool} F T", "Bool -> Bool", "derived: Bool case analysis"),
    ("f", "And", "\\a:Bool. \\b:Bool. a {Bool} b F", "Bool -> Bool -> Bool", "derived: Bool case analysis"),
    (
        "f",
        "Nil",
        "/\\X. /\\Y. \\x:Y. \\c:X -> Y -> Y. x",
        "forall X. forall Y. Y -> (X -> Y -> Y) -> Y",
        "§1.2 fn. 10 ε (reconstructed)",
    ),
    (
        "f",
        "Conc",
        "/\\X. \\l:(forall Y. Y -> (X -> Y -> Y) -> Y). \\a:X. /\\Y. \\x:Y. \\c:X -> Y -> Y. c a (l {Y} x c)",
        "forall X. (forall Y. Y -> (X -> Y -> Y) -> Y) -> X -> forall Y. Y -> (X -> Y -> Y) -> Y",
        "§1.2 fn. 10 conc(l, a) (reconstructed)",
    ),
    (
        "f",
        "Map",
        "/\\X. /\\Y. \\f:X -> Y. \\l:(forall Z. Z -> (X -> Z -> Z) -> Z). \
         l {LIST_Y} (Nil {Y}) (\\a:X. \\r:(LIST_Y). Conc {Y} r (f a))",
        "forall X. forall Y. (X -> Y) -> (forall Z. Z -> (X -> Z -> Z) -> Z) -> LIST_Y",
        "§1.2 Map : ∀X∀Y((X→Y)→(X list→Y list)); term derived (fold)",
    ),
    ("f", "ListBool", "forall Y. Y -> (Bool -> Y -> Y) -> Y", "*", "§1.2 fn. 10 X list at X = Bool"),
    ("f", "Nat", "forall X. (X -> X) -> X -> X", "*", "§3.3 N, read in System F"),
    ("f", "Zero", "/\\X. \\f:X -> X. \\x:X. x", "Nat", "§3.3 numeral 0"),
    ("f", "One", "/\\X. \\f:X -> X. \\x:X. f x", "Nat", "§3.3 numeral 1"),
    ("f", "Two", "/\\X. \\f:X -> X. \\x:X. f (f x)", "Nat", "§3.3 numeral 2"),
    ("f", "Three", "/\\X. \\f:X -> X. \\x:X. f (f (f x))", "Nat", "§3.3 numeral 3"),
    ("f", "Succ", "\\n:Nat. /\\X. \\f:X -> X. \\x:X. f (n {X} f x)", "Nat -> Nat", "derived: successor"),
    (
        "f",
        "Plus",
        "\\m:Nat. \\n:Nat. /\\X. \\f:X -> X. \\x:X. m {X} f (n {X} f x)",
        "Nat -> Nat -> Nat",
        "derived: iterated successor",
    ),
    ("f", "Falsum", "forall X. X", "*", "§3.1 ⊥ read in System F"),
    ("fj", "K", "/\\Z. J {rho} {Z} Delta", "forall Z. Z -> Z", "§2.3 K = ΛZ.(J{ρ}{Z})Δ"),
    ("fj", "Loop", "K {rho} K", "rho", "§2.3 (K{ρ})K : ρ"),
    ("star", "Bot", "Pi x:V. x", "V", "§3.1 ⊥ = (Πx∈V)x"),
    ("star", "Pow", "\\x:V. x -> V", "V -> V", "§3.1 P = (λx∈V)(x→V)"),
    ("star", "N", "Pi x:V. (x -> x) -> x -> x", "V", "§3.3 N = (Πx∈V)((x→x)→(x→x))"),
    ("star", "List", "\\X:V. Pi x:V. x -> (X -> x -> x) -> x", "V -> V", "App. B List[X]"),
    ("star", "B", "Pi x:V. x -> x -> x", "V", "derived: Bool in λ★"),
    ("star", "tt", "\\x:V. \\a:x. \\b:x. a", "B", "derived"),
    ("star", "ff", "\\x:V. \\a:x. \\b:x. b", "B", "derived"),
    ("star", "and", "\\a:B. \\b:B. a B b ff", "B -> B -> B", "derived"),
    ("star", "ite", "\\x:V. \\c:B. \\a:x. \\b:x. c x a b", "Pi x:V. B -> x -> x -> x", "derived"),
    ("star", "zero", "\\x:V. \\f:x -> x. \\z:x. z", "N", "§3.3 numeral 0"),
    ("star", "succ", "\\n:N. \\x:V. \\f:x -> x. \\z:x. f (n x f z)", "N -> N", "derived: successor"),
    ("star", "add", "\\m:N. \\n:N. \\x:V. \\f:x -> x. \\z:x. m x f (n x f z)", "N -> N -> N", "derived: addition"),
    ("star", "mul", "\\m:N. \\n:N. \\x:V. \\f:x -> x. m x (n x f)", "N -> N -> N", "derived: multiplication"),
    ("star", "pow", "\\m:N. \\n:N. n N (mul m) (succ zero)", "N -> N -> N", "derived: exponentiation m^n"),
    ("star", "Pair", "\\a:V. \\b:V. Pi x:V. (a -> b -> x) -> x", "V -> V -> V", "derived: pairing"),
    (
        "star",
        "pair",
        "\\a:V. \\b:V. \\u:a. \\v:b. \\x:V. \\k:a -> b -> x. k u v",
        "Pi a:V. Pi b:V. a -> b -> Pair a b",
        "derived: pairing",
    ),
    ("star", "fst", "\\a:V. \\b:V. \\p:Pair a b. p a (\\u:a. \\v:b. u)", "Pi a:V. Pi b:V. Pair a b -> a", "derived"),
    ("star", "snd", "\\a:V. \\b:V. \\p:Pair a b. p b (\\u:a. \\v:b. v)", "Pi a:V. Pi b:V. Pair a b -> b", "derived"),
    (
        "star",
        "pred",
        "\\n:N. fst N N (n (Pair N N) (\\p:Pair N N. pair N N (snd N N p) (succ (snd N N p))) (pair N N zero zero))",
        "N -> N",
        "derived: predecessor by pairing; instantiates n at a closed type",
    ),
    ("star", "sub", "\\m:N. \\n:N. n N pred m", "N -> N -> N", "derived: truncated subtraction"),
    ("star", "isZero", "\\n:N. n B (\\b:B. ff) tt", "N -> B", "derived"),
    ("star", "leq", "\\m:N. \\n:N. isZero (sub m n)", "N -> N -> B", "derived"),
    ("star", "eq", "\\m:N. \\n:N. and (leq m n) (leq n m)", "N -> N -> B", "derived"),
    ("star", "not", "\\a:B. a B ff tt", "B -> B", "derived"),
    ("star", "or", "\\a:B. \\b:B. a B tt b", "B -> B -> B", "derived"),
    ("star", "nil", "\\X:V. \\x:V. \\n:x. \\c:X -> x -> x. n", "Pi X:V. List X", "App. B empty list"),
    (
        "star",
        "snoc",
        "\\X:V. \\l:List X. \\a:X. \\x:V. \\n:x. \\c:X -> x -> x. l x (c a n) c",
        "Pi X:V. List X -> X -> List X",
        "App. B l conc a: append a at the end",
    ),
    ("star", "len", "\\X:V. \\l:List X. l N zero (\\a:X. \\n:N. succ n)", "Pi X:V. List X -> N", "derived"),
    (
        "star",
        "sel",
        "\\X:V. \\d:X. \\i:N. \\l:List X. l (N -> X) (\\k:N. d) (\\a:X. \\r:N -> X. \\k:N. ite X (isZero k) a (r (pred k))) (pred i)",
        "Pi X:V. X -> N -> List X -> X",
        "App. B δ_X(i, <x1..xn>) = x_i, 1-based, d past the end",
    ),
    (
        "star",
        "div",
        "\\n:N. \\d:N. n (N -> N -> N) (\\k:N -> N -> N. \\q:N. \\c:N. ite N (isZero c) (k (succ q) (pred d)) (k q (pred c))) (\\q:N. \\c:N. q) zero (pred d)",
        "N -> N -> N",
        "derived: quotient; c counts down to the next multiple of d",
    ),
    (
        "star",
        "mod",
        "\\n:N. \\d:N. n (N -> N -> N) (\\k:N -> N -> N. \\r:N. \\c:N. ite N (isZero c) (k zero (pred d)) (k (succ r) (pred c))) (\\r:N. \\c:N. r) zero (pred d)",
        "N -> N -> N",
        "derived: remainder; c counts down to the next wrap",
    ),
    ("star", "divides", "\\d:N. \\n:N. isZero (mod n d)", "N -> N -> B", "derived"),
    (
        "star",
        "val",
        "\\p:N. \\n:N. n (N -> N) (\\r:N -> N. \\m:N. ite N (and (not (isZero m)) (divides p m)) (succ (r (div m p))) zero) (\\m:N. zero) n",
        "N -> N -> N",
        "derived: exponent of p in n, by repeated division",
    ),
    (
        "star",
        "isPrime",
        "\\q:N. and (leq (succ (succ zero)) q) \
         (q (N -> B) (\\r:N -> B. \\d:N. and (or (leq q d) (not (divides d q))) (r (succ d))) (\\d:N. tt) (succ (succ zero)))",
        "N -> B",
        "derived: trial division",
    ),
    (
        "star",
        "nextPrime",
        "\\p:N. succ p (N -> N) (\\r:N -> N. \\q:N. ite N (isPrime q) q (r (succ q))) (\\q:N. q) (succ p)",
        "N -> N",
        "derived: least prime above p (Bertrand bound)",
    ),
    ("star", "pi", "\\i:N. i N nextPrime (succ zero)", "N -> N", "App. B π: pi 1 = 2, pi 2 = 3, ..."),
    ("star", "delta", "\\i:N. \\n:N. val (pi i) n", "N -> N -> N", "App. B δ(i, Π π(j)^x_j) = x_i"),
    (
        "star",
        "bprod",
        "\\f:N -> N. \\y:N. succ y (N -> N) (\\r:N -> N. \\z:N. mul (f z) (r (succ z))) (\\z:N. succ zero) zero",
        "(N -> N) -> N -> N",
        "App. B bounded product Π_{z<=y} f z",
    ),
];

fn expand(src: &'static str) -> String {
    src.replace("LIST_Y", LIST_Y)
}

fn build() -> (Vec<EncodingEntry>, Env) {
    let mut env = Env::new();
    let mut entries = Vec::new();
    for &(system, name, src, ty_src, citation) in ROWS {
        let star = system == "star";
        let term = parse_term(&expand(src), &env, star).unwrap_or_else(|e| panic!("registry entry {name}: {e}"));
        let expected_type =
            parse_term(&expand(ty_src), &env, star).unwrap_or_else(|e| panic!("registry type of {name}: {e}"));
        env.define(name, term.clone());
        entries.push(EncodingEntry { name, system, term, expected_type, citation, source: src, type_source: ty_src });
    }
    (entries, env)
}

fn cache() -> &'static (Vec<EncodingEntry>, Env) {
    static CACHE: OnceLock<(Vec<EncodingEntry>, Env)> = OnceLock::new();
    CACHE.get_or_init(build)
}

pub fn registry() -> &'static [EncodingEntry] {
    &cache().0
}

/// Every registry name bound to its term, for use as a parsing prelude.
pub fn prelude() -> &'static Env {
    &cache().1
}

pub fn get(name: &str) -> Option<&'static EncodingEntry> {
    registry().iter().find(|e| e.name == name)
}

/// The term of a registry entry; panics on unknown names.
pub fn term(name: &str) -> Term {
    get(name).unwrap_or_else(|| panic!("no registry entry {name}")).term.clone()
}

/// Church numeral `n` in System F (`∀X.(X→X)→X→X`).
pub fn numeral_f(n: usize) -> Term {
    let mut body = Term::var(0);
    for _ in 0..n {
        body = Term::app(Term::var(1), body);
    }
    Term::ty_lam(Term::lam(Term::arrow(Term::var(0), Term::var(0)), Term::lam(Term::var(1), body)))
}

/// Church numeral `n` in λ★ (`Πx:V.(x→x)→x→x`); the same term as [`numeral_f`].
pub fn numeral(n: usize) -> Term {
    numeral_f(n)
}

/// Inverse of [`numeral`] on normal forms.
pub fn numeral_value(t: &Term) -> Option<usize> {
    use crate::term::TermKind::*;
    let Lam(_, t) = t.kind() else { return None };
    let Lam(_, t) = t.kind() else { return None };
    let Lam(_, mut t) = t.kind().clone() else { return None };
    let mut n = 0;
    loop {
        match t.kind().clone() {
            Var(0) => return Some(n),
            App(f, a) if matches!(f.kind(), Var(1)) => {
                n += 1;
                t = a;
            }
            _ => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::Normalizer;
    use crate::typing::{check, Context, SystemSpec};

    #[test]
    fn every_entry_checks() {
        for e in registry() {
            let spec = SystemSpec::by_name(e.system).unwrap();
            check(&spec, &Context::new(), &e.term, &e.expected_type).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn numeral_round_trip() {
        for n in 0..7 {
            assert_eq!(numeral_value(&numeral(n)), Some(n));
        }
        assert_eq!(numeral_f(2), term("Two"));
        assert_eq!(numeral(0), term("zero"));
    }

    #[test]
    fn star_arithmetic_agrees_with_integers() {
        let nf = |t: Term| Normalizer::new(1_000_000).normal_form(&t).and_then(|t| numeral_value(&t));
        let op = |name: &str, a: usize, b: usize| Term::apps(term(name), [numeral(a), numeral(b)]);
        assert_eq!(nf(op("add", 2, 3)), Some(5));
        assert_eq!(nf(op("mul", 2, 3)), Some(6));
        assert_eq!(nf(op("pow", 2, 3)), Some(8));
        assert_eq!(nf(op("sub", 5, 2)), Some(3));
        assert_eq!(nf(op("sub", 2, 5)), Some(0));
        assert_eq!(nf(Term::app(term("pred"), numeral(4))), Some(3));
        let b = |name: &str, a: usize, c: usize| Normalizer::new(1_000_000).normal_form(&op(name, a, c)).unwrap();
        assert_eq!(b("eq", 3, 3), term("tt"));
        assert_eq!(b("eq", 3, 4), term("ff"));
        assert_eq!(b("leq", 2, 4), term("tt"));
        assert_eq!(nf(op("mod", 5, 3)), Some(2));
        assert_eq!(nf(op("div", 7, 3)), Some(2));

        // the number-theoretic helpers are exercised with shared evaluation
        let ev = |t: Term| crate::eval::normal_form(&t, 10_000_000).ok().and_then(|r| numeral_value(&r.term));
        for (n, d) in [(7, 3), (8, 4), (30, 7), (64, 8)] {
            assert_eq!(ev(op("mod", n, d)), Some(n % d), "mod {n} {d}");
            assert_eq!(ev(op("div", n, d)), Some(n / d), "div {n} {d}");
        }
        assert_eq!(ev(op("val", 2, 8)), Some(3));
        assert_eq!(ev(op("val", 3, 8)), Some(0));
        assert_eq!(ev(op("delta", 2, 18)), Some(2));
        assert_eq!(ev(op("delta", 1, 256)), Some(8));
        let primes: Vec<_> = (1..=5).map(|i| ev(Term::app(term("pi"), numeral(i)))).collect();
        assert_eq!(primes, [Some(2), Some(3), Some(5), Some(7), Some(11)]);
        let sq = crate::surface::parse_term("\\z:N. succ (mul z z)", prelude(), true).unwrap();
        // (0²+1)(1²+1)(2²+1) = 10
        assert_eq!(ev(Term::apps(term("bprod"), [sq, numeral(2)])), Some(10));
        let tt = crate::eval::normal_form(&op("divides", 3, 6), 1_000_000).unwrap().term;
        assert_eq!(tt, term("tt"));
    }

    #[test]
    fn selection_is_one_based() {
        let n = |t: Term| Normalizer::new(1_000_000).normal_form(&t).unwrap();
        let list = ["nil N", "snoc N (nil N) (succ zero)", "snoc N (snoc N (nil N) (succ zero)) (succ (succ zero))"];
        let l2 = crate::surface::parse_term(list[2], prelude(), true).unwrap();
        let sel = |i: usize| n(Term::apps(term("sel"), [term("N"), numeral(9), numeral(i), l2.clone()]));
        assert_eq!([sel(1), sel(2), sel(3)], [numeral(1), numeral(2), numeral(9)]);
        let len = n(Term::apps(term("len"), [term("N"), l2]));
        assert_eq!(len, numeral(2));
    }
}
