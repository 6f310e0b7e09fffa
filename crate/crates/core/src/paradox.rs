//! The two counterexamples: the J loop (non-uniform polymorphism breaks
//! normalization of System F) and Hurkens' paradox in λ★.

use serde::Serialize;

use crate::encodings;
use crate::reduce::{Normalizer, Outcome, ReductionTrace, Rules, DEMO_FUEL};
use crate::surface::{Env, SourceFile};
use crate::term::Term;

pub const HURKENS_SOURCE: &str = include_str!("../../../ipl/hurkens.ipl");

/// A displayed configuration of the loop and where the trace reached it.
#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    pub label: &'static str,
    #[serde(skip)]
    pub term: Term,
    /// Raw contraction count at which the configuration was reached.
    pub step: u64,
}

#[derive(Clone, Debug)]
pub struct LoopDemo {
    pub term: Term,
    pub trace: ReductionTrace,
    /// The configurations visited in order, ending with the recurrence of
    /// the start term.
    pub checkpoints: Vec<Checkpoint>,
}

impl LoopDemo {
    pub fn witness(&self) -> Option<&Term> {
        match &self.trace.outcome {
            Outcome::CycleDetected { witness, .. } => Some(witness),
            _ => None,
        }
    }

    /// Raw contractions between consecutive checkpoints (start included).
    pub fn macro_step_lengths(&self) -> Vec<u64> {
        let mut prev = 0;
        self.checkpoints
            .iter()
            .map(|c| {
                let d = c.step - prev;
                prev = c.step;
                d
            })
            .collect()
    }
}

/// `(K{ρ})K`.
pub fn loop_term() -> Term {
    let k = encodings::term("K");
    Term::app(Term::app(k.clone(), encodings::term("rho")), k)
}

/// The three configurations of the loop: `(K{ρ})K`, `(J{ρ}{ρ}Δ)K`, `ΔK`.
pub fn loop_configurations() -> [(&'static str, Term); 3] {
    let (k, rho, delta) = (encodings::term("K"), encodings::term("rho"), encodings::term("Delta"));
    let j_rho_rho_delta = Term::apps(Term::prim_j(), [rho.clone(), rho.clone(), delta.clone()]);
    [
        ("(K{rho})K", loop_term()),
        ("(J{rho}{rho}Delta)K", Term::app(j_rho_rho_delta, k.clone())),
        ("Delta K", Term::app(delta, k)),
    ]
}

/// Reduces `(K{ρ})K` with J enabled and cycle detection on, and annotates the
/// trace with the displayed configurations.
pub fn build_loop() -> LoopDemo {
    build_loop_with(Rules::BETA_J)
}

pub fn build_loop_with(rules: Rules) -> LoopDemo {
    build_loop_in(rules, DEMO_FUEL)
}

/// The loop demo with explicit rules and fuel.
pub fn build_loop_in(rules: Rules, fuel: u64) -> LoopDemo {
    let term = loop_term();
    let trace = Normalizer::new(fuel).rules(rules).detect_cycles(true).keep_steps(true).run(&term);
    let configs = loop_configurations();
    // expected order after the start: configs[1], configs[2], configs[0]
    let order = [1usize, 2, 0];
    let mut checkpoints = Vec::new();
    let mut want = 0;
    for (i, t) in trace.terms().enumerate().skip(1) {
        if want < order.len() && *t == configs[order[want]].1 {
            let (label, term) = configs[order[want]].clone();
            checkpoints.push(Checkpoint { label, term, step: i as u64 });
            want += 1;
        }
    }
    LoopDemo { term, trace, checkpoints }
}

/// The parsed Hurkens file (definitions are already inlined).
pub fn hurkens_file() -> SourceFile {
    SourceFile::parse(HURKENS_SOURCE, &Env::new()).expect("hurkens source parses")
}

/// A closed λ★ term of type `Πx:V.x` with no normal form.
pub fn build_hurkens() -> Term {
    hurkens_file().definition("loop").expect("hurkens defines loop").clone()
}

/// `Πx:V.x`.
pub fn falsum() -> Term {
    encodings::term("Bot")
}
