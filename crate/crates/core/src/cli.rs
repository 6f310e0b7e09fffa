//! The `ptslab` command-line driver.
//!
//! Every subcommand reports through [`Report`]; with `--json` the report is
//! printed as a single JSON object whose `command`, `outcome`, `steps` and
//! `type` fields are always present (`steps`/`type` may be `null`), followed
//! by command-specific fields.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::appendix_b::{self, FLAT_FUEL};
use crate::encodings;
use crate::erase::erase;
use crate::paradox;
use crate::reduce::{Normalizer, Outcome, Rules, Step, DEFAULT_FUEL, DEMO_FUEL};
use crate::surface::{print_term, FoldTable, Item, PrintOptions, SourceFile};
use crate::term::Term;
use crate::typing::{check, infer, Context, SystemSpec};

/// Overrides the default fuel of `normalize` and the demos; `--fuel` wins.
pub const FUEL_ENV: &str = "PTSLAB_FUEL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ptslab", version, about = "A pure type system kernel: λ→, System F, λU⁻ and λ★")]
pub struct Cli {
    /// Emit one machine-readable JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Type-check every definition and declaration of a file.
    Check {
        file: PathBuf,
        /// stlc, f, fj, uminus or star; defaults to the file's #system, then f.
        #[arg(long)]
        system: Option<String>,
    },
    /// Normalize a definition in normal order.
    Normalize {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        fuel: Option<u64>,
        /// Print every contraction as it happens.
        #[arg(long)]
        trace: bool,
        /// Stop when a term recurs.
        #[arg(long)]
        cycles: bool,
    },
    /// Run one of the built-in demonstrations.
    Demo {
        which: Demo,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Print the untyped erasure of a definition.
    Erase {
        file: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// List the encodings registry.
    Registry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    /// The J loop (K{ρ})K → (J{ρ}{ρ}Δ)K → ΔK → (K{ρ})K.
    Loop,
    /// Hurkens' paradox in λ★.
    Hurkens,
    /// ♭ : N → V and the witness ♭♯Bool ≡ Bool.
    Flat,
}

/// The JSON envelope shared by all subcommands.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub outcome: String,
    pub steps: Option<u64>,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Report {
    fn new(command: &'static str, outcome: impl Into<String>) -> Report {
        Report { command, outcome: outcome.into(), steps: None, ty: None, extra: Map::new() }
    }

    fn with(mut self, key: &str, v: impl Serialize) -> Report {
        self.extra.insert(key.into(), serde_json::to_value(v).expect("serializable"));
        self
    }
}

struct Failure {
    code: i32,
    report: Report,
    message: String,
}

fn fail(code: i32, command: &'static str, outcome: &str, message: String) -> Box<Failure> {
    Box::new(Failure { code, report: Report::new(command, outcome).with("error", &message), message })
}

type Done = Result<(i32, Report), Box<Failure>>;

/// Parses `args` (program name first) and runs the command, writing to
/// `out`/`err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let fuel_env = match std::env::var(FUEL_ENV) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(n) => Some(n),
            Err(_) => {
                let _ = writeln!(err, "error: {FUEL_ENV}={v:?} is not a step count");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    let mut ctx = Run { json: cli.json, fuel_env, out };
    let result = ctx.dispatch(cli.command);
    let (code, report) = match result {
        Ok(r) => r,
        Err(f) => {
            if !ctx.json {
                let _ = writeln!(err, "error: {}", f.message);
            }
            (f.code, f.report)
        }
    };
    if ctx.json {
        let _ = writeln!(ctx.out, "{}", serde_json::to_string(&report).expect("report serializes"));
    }
    code
}

struct Run<'w> {
    json: bool,
    fuel_env: Option<u64>,
    out: &'w mut dyn Write,
}

/// A file with the system it is checked in and printing options for it.
struct Loaded {
    file: SourceFile,
    spec: SystemSpec,
    folds: FoldTable,
}

impl Loaded {
    fn opts(&self) -> PrintOptions<'_> {
        PrintOptions { fold: Some(&self.folds), ..self.spec.print_options() }
    }

    fn term(&self, command: &'static str, name: &str) -> Result<&Term, Box<Failure>> {
        self.file
            .definition(name)
            .or_else(|| encodings::prelude().get(name))
            .ok_or_else(|| fail(EXIT_USAGE, command, "error", format!("no definition named `{name}`")))
    }

    /// A type, folded to a name even at the root.
    fn show_type(&self, ty: &Term) -> String {
        show_folded(ty, &self.opts())
    }
}

/// Registry entries that print well in `system`.
fn registry_names(system: &str) -> Vec<(String, Term)> {
    let family: &[&str] = match system {
        "fj" => &["fj", "f"],
        "stlc" => &["stlc"],
        "f" => &["f"],
        "uminus" => &["uminus", "f"],
        _ => &["star"],
    };
    encodings::registry()
        .iter()
        .filter(|e| family.contains(&e.system))
        .map(|e| (e.name.to_string(), e.term.clone()))
        .collect()
}

fn show_folded(t: &Term, opts: &PrintOptions) -> String {
    match opts.fold.and_then(|f| f.lookup(t)) {
        Some(name) => name.to_string(),
        None => print_term(t, opts),
    }
}

fn folds_for(system: &str, extra: impl IntoIterator<Item = (String, Term)>) -> FoldTable {
    let mut t = FoldTable::new();
    for (n, d) in extra.into_iter().chain(registry_names(system)) {
        t.add(n, d);
    }
    t
}

impl Run<'_> {
    fn say(&mut self, line: impl AsRef<str>) {
        if !self.json {
            let _ = writeln!(self.out, "{}", line.as_ref());
        }
    }

    fn fuel(&self, flag: Option<u64>, default: u64) -> u64 {
        flag.or(self.fuel_env).unwrap_or(default)
    }

    fn dispatch(&mut self, cmd: Command) -> Done {
        match cmd {
            Command::Check { file, system } => self.check(&file, system),
            Command::Normalize { file, term, system, fuel, trace, cycles } => {
                self.normalize(&file, &term, system, fuel, trace, cycles)
            }
            Command::Demo { which: Demo::Loop, fuel } => self.demo_loop(fuel),
            Command::Demo { which: Demo::Hurkens, fuel } => self.demo_hurkens(fuel),
            Command::Demo { which: Demo::Flat, fuel } => self.demo_flat(fuel),
            Command::Erase { file, term } => self.erase(&file, &term),
            Command::Registry => self.registry(),
        }
    }

    fn load(&self, command: &'static str, path: &Path, system: Option<String>) -> Result<Loaded, Box<Failure>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| fail(EXIT_USAGE, command, "io-error", format!("{}: {e}", path.display())))?;
        let file = SourceFile::parse(&text, encodings::prelude())
            .map_err(|e| fail(EXIT_USAGE, command, "parse-error", format!("{}:{e}", path.display())))?;
        let name = system.or_else(|| file.system.clone()).unwrap_or_else(|| "f".into());
        let spec = SystemSpec::by_name(&name).map_err(|e| fail(EXIT_USAGE, command, "error", e.to_string()))?;
        let folds = folds_for(&spec.name, file.definitions().map(|(n, t)| (n.to_string(), t.clone())));
        Ok(Loaded { file, spec, folds })
    }

    fn check(&mut self, path: &Path, system: Option<String>) -> Done {
        let l = self.load("check", path, system)?;
        let ctx = Context::new();
        let mut checked = Vec::new();
        for item in &l.file.items {
            let (name, line, column, result) = match item {
                Item::Def { name, term, line, column } => (name, line, column, infer(&l.spec, &ctx, term)),
                Item::Check { name, ty, line, column } => {
                    let term = l
                        .file
                        .definition(name)
                        .or_else(|| encodings::prelude().get(name))
                        .expect("parser checks names");
                    (name, line, column, check(&l.spec, &ctx, term, ty))
                }
            };
            match result {
                Ok(j) => {
                    let ty = l.show_type(j.ty());
                    if matches!(item, Item::Def { .. }) {
                        self.say(format!("{name} : {ty}"));
                    }
                    checked.push(json!({"name": name, "type": ty}));
                }
                Err(e) => {
                    let message = format!("{}:{line}:{column}: {name}: {e}", path.display());
                    let mut f = fail(EXIT_FAILURE, "check", "type-error", message);
                    f.report = f
                        .report
                        .with("kind", e.kind())
                        .with("name", name)
                        .with("line", line)
                        .with("column", column)
                        .with("checked", &checked);
                    return Err(f);
                }
            }
        }
        self.say(format!("ok: {} item(s) check in {}", l.file.items.len(), l.spec.name));
        let r = Report::new("check", "ok").with("system", &l.spec.name).with("checked", checked);
        Ok((EXIT_OK, r))
    }

    fn normalize(
        &mut self,
        path: &Path,
        name: &str,
        system: Option<String>,
        fuel: Option<u64>,
        trace: bool,
        cycles: bool,
    ) -> Done {
        let l = self.load("normalize", path, system)?;
        let t = l.term("normalize", name)?.clone();
        let fuel = self.fuel(fuel, DEFAULT_FUEL);
        let ty = infer(&l.spec, &Context::new(), &t).ok().map(|j| l.show_type(j.ty()));
        let mut json_steps = Vec::new();
        let json = self.json;
        let n = Normalizer::new(fuel).rules(l.spec.reduction_rules()).detect_cycles(cycles);
        let out = &mut *self.out;
        let tr = n.run_with(&t, |s: &Step| {
            let line = step_line(s, &print_term(&s.after, &l.opts()));
            if json {
                json_steps.push(json!({"index": s.index + 1, "rule": s.rule, "position": s.position.to_string(), "term": print_term(&s.after, &l.opts())}));
            } else if trace {
                let _ = writeln!(out, "{line}");
            }
        });
        let mut r = Report::new("normalize", tr.outcome.label()).with("term", name).with("fuel", fuel);
        r.steps = Some(tr.step_count);
        r.ty = ty;
        match &tr.outcome {
            Outcome::NormalForm(nf) => {
                let shown = print_term(nf, &l.opts());
                self.say(&shown);
                r = r.with("normal_form", shown);
            }
            Outcome::FuelExhausted { last, .. } => {
                self.say(format!("fuel exhausted after {} steps (last term has size {})", tr.step_count, last.size()));
                r = r.with("last_size", last.size());
            }
            Outcome::CycleDetected { period, witness, first_seen } => {
                let shown = print_term(witness, &l.opts());
                self.say(format!("cycle detected: period {period}, first seen after {first_seen} steps: {shown}"));
                r = r.with("period", period).with("witness", shown).with("first_seen", first_seen);
            }
        }
        if trace {
            r = r.with("trace", json_steps);
        }
        Ok((EXIT_OK, r))
    }

    fn erase(&mut self, path: &Path, name: &str) -> Done {
        let l = self.load("erase", path, None)?;
        let t = l.term("erase", name)?;
        let ty = infer(&l.spec, &Context::new(), t).ok().map(|j| l.show_type(j.ty()));
        match erase(t) {
            Ok(e) => {
                let shown = e.to_string();
                self.say(&shown);
                let mut r = Report::new("erase", "ok").with("term", name).with("erasure", shown);
                r.ty = ty;
                Ok((EXIT_OK, r))
            }
            Err(e) => Err(fail(EXIT_FAILURE, "erase", "erase-error", format!("{name}: {e}"))),
        }
    }

    fn registry(&mut self) -> Done {
        let entries: Vec<_> = encodings::registry().iter().map(|e| e.summary()).collect();
        let width = entries.iter().map(|e| e.name.chars().count()).max().unwrap_or(0);
        for e in &entries {
            self.say(format!("{:<width$}  {:<6}  {}  -- {}", e.name, e.system, e.ty, e.citation));
        }
        let mut r = Report::new("registry", "ok").with("entries", &entries);
        r.steps = None;
        Ok((EXIT_OK, r))
    }

    fn demo_loop(&mut self, fuel: Option<u64>) -> Done {
        let fuel = self.fuel(fuel, DEMO_FUEL);
        let demo = paradox::build_loop_in(Rules::BETA_J, fuel);
        let folds = folds_for("fj", []);
        let opts = PrintOptions { fold: Some(&folds), ..PrintOptions::default() };
        let show = |t: &Term| print_term(t, &opts);
        self.say(format!("start: {}", show(&demo.term)));
        for s in &demo.trace.steps {
            let mark = demo.checkpoints.iter().find(|c| c.step == s.index + 1).map(|c| c.label);
            let mut line = step_line(s, &show(&s.after));
            if let Some(label) = mark {
                line.push_str(&format!("    [checkpoint {label}]"));
            }
            self.say(line);
        }
        let labels: Vec<&str> = demo.checkpoints.iter().map(|c| c.label).collect();
        let expected = ["(J{rho}{rho}Delta)K", "Delta K", "(K{rho})K"];
        let ok = demo.witness() == Some(&demo.term) && labels == expected;
        let outcome = demo.trace.outcome.label();
        match &demo.trace.outcome {
            Outcome::CycleDetected { period, witness, .. } => {
                self.say(format!("cycle detected: period {period}, witness {}", show(witness)));
            }
            _ => self.say(format!("{outcome} after {} steps", demo.trace.step_count)),
        }
        self.say(format!(
            "chain: {}",
            std::iter::once("(K{rho})K").chain(labels.iter().copied()).collect::<Vec<_>>().join(" -> ")
        ));
        let mut r = Report::new("demo loop", outcome)
            .with("witness", demo.witness().map(show))
            .with("checkpoints", &demo.checkpoints)
            .with("expected_observed", ok);
        r.steps = Some(demo.trace.step_count);
        r.ty = Some("rho".into());
        Ok((if ok { EXIT_OK } else { EXIT_FAILURE }, r))
    }

    fn demo_hurkens(&mut self, fuel: Option<u64>) -> Done {
        let fuel = self.fuel(fuel, DEMO_FUEL);
        let t = paradox::build_hurkens();
        let star = SystemSpec::star();
        let folds = folds_for("star", []);
        let opts = PrintOptions { fold: Some(&folds), ..star.print_options() };
        self.say(format!("loop: closed λ★ term of size {}", t.size()));
        let (ty, typed_at_bot) = match infer(&star, &Context::new(), &t) {
            Ok(j) => (show_folded(j.ty(), &opts), *j.ty() == paradox::falsum()),
            Err(e) => return Err(fail(EXIT_FAILURE, "demo hurkens", "type-error", format!("λ★ rejects loop: {e}"))),
        };
        self.say(format!("λ★ ⊢ loop : {ty}"));
        let rejection = match infer(&SystemSpec::system_f(), &Context::new(), &t) {
            Ok(_) => None,
            Err(e) => Some(e.kind()),
        };
        match rejection {
            Some(kind) => self.say(format!("λ2 rejects loop: {kind}")),
            None => self.say("λ2 accepts loop (unexpected)"),
        }
        self.say(format!("normal-order reduction, fuel {fuel}, cycle detection on"));
        const SHOWN: u64 = 20;
        let mut sizes = Vec::new();
        let json = self.json;
        let out = &mut *self.out;
        let mut next_mark = 10;
        let tr = Normalizer::new(fuel).detect_cycles(true).run_with(&t, |s| {
            let k = s.index + 1;
            if k <= SHOWN && !json {
                let _ = writeln!(out, "{:>7}. {} at {} (size {})", k, s.rule, s.position, s.after.size());
            }
            if k == next_mark {
                sizes.push((k, s.after.size()));
                next_mark *= 10;
            }
        });
        if tr.step_count > SHOWN {
            self.say(format!("    ... ({} more steps)", tr.step_count - SHOWN));
        }
        for (k, size) in &sizes {
            self.say(format!("size after {k:>7} steps: {size}"));
        }
        let exhausted = matches!(tr.outcome, Outcome::FuelExhausted { .. });
        match &tr.outcome {
            Outcome::FuelExhausted { last, .. } => {
                self.say(format!("fuel exhausted after {} steps, no cycle; final size {}", tr.step_count, last.size()))
            }
            Outcome::CycleDetected { period, .. } => {
                self.say(format!("cycle detected with period {period} (unexpected)"))
            }
            Outcome::NormalForm(_) => self.say("reached a normal form (unexpected)"),
        }
        let ok = typed_at_bot && rejection.is_some() && exhausted;
        let mut r = Report::new("demo hurkens", tr.outcome.label())
            .with("lambda2_rejection", rejection)
            .with("size_profile", &sizes)
            .with("expected_observed", ok);
        r.steps = Some(tr.step_count);
        r.ty = Some(ty);
        Ok((if ok { EXIT_OK } else { EXIT_FAILURE }, r))
    }

    fn demo_flat(&mut self, fuel: Option<u64>) -> Done {
        let fuel = self.fuel(fuel, FLAT_FUEL);
        let m = appendix_b::build_flat_machinery()
            .map_err(|e| fail(EXIT_FAILURE, "demo flat", "type-error", e.to_string()))?;
        let star = SystemSpec::star();
        let folds = folds_for("star", []);
        let opts = PrintOptions { fold: Some(&folds), ..star.print_options() };
        let show = |t: &Term| print_term(t, &opts);
        let type_of = |t: &Term| infer(&star, &Context::new(), t).map(|j| show_folded(j.ty(), &opts));
        self.say("code table:");
        for e in m.table.entries() {
            self.say(format!("  #{} = {}", e.code, e.name));
        }
        let mut derivation = Vec::new();
        for (label, t) in [("List", &m.list), ("delta", &m.delta), ("F", &m.flat_construction.big_f), ("flat", &m.flat)]
        {
            let ty = type_of(t).map_err(|e| fail(EXIT_FAILURE, "demo flat", "type-error", format!("{label}: {e}")))?;
            self.say(format!("⊢ {label} : {ty}   (size {})", t.size()));
            derivation.push(json!({"name": label, "type": ty, "size": t.size()}));
        }
        let code = m.table.type_codes()[0];
        let entry = m.table.entry(code).expect("smallest type code").clone();
        let lhs = Term::app(m.flat.clone(), encodings::numeral(code));
        self.say(format!("witness: flat #{code} = {} by normal-order conversion, fuel {fuel}", entry.name));
        let n = Normalizer::new(fuel);
        let out = &mut *self.out;
        let json = self.json;
        let tr = n.run_with(&lhs, |s| {
            if !json {
                let _ = writeln!(out, "{:>7}. {} at {} (size {})", s.index + 1, s.rule, s.position, s.after.size());
            }
        });
        let rhs = n.run(&entry.term);
        let holds = match (tr.outcome.normal_form(), rhs.outcome.normal_form()) {
            (Some(a), Some(b)) => {
                self.say(format!("flat #{code} ->> {}", show(a)));
                self.say(format!("{} ->> {}", entry.name, show(b)));
                a == b
            }
            _ => false,
        };
        self.say(if holds {
            format!("flat #{code} ≡ {} ({} + {} steps)", entry.name, tr.step_count, rhs.step_count)
        } else {
            format!("flat #{code} ≢ {} within fuel ({})", entry.name, tr.outcome.label())
        });
        let mut r = Report::new("demo flat", if holds { "convertible" } else { tr.outcome.label() })
            .with("code", code)
            .with("decoded", entry.name)
            .with("derivation", derivation)
            .with("expected_observed", holds);
        r.steps = Some(tr.step_count + rhs.step_count);
        r.ty = type_of(&m.flat).ok();
        Ok((if holds { EXIT_OK } else { EXIT_FAILURE }, r))
    }
}

fn step_line(s: &Step, after: &str) -> String {
    format!("{:>5}. {} at {}: {}", s.index + 1, s.rule, s.position, after)
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
