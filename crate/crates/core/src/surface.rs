//! Concrete syntax for terms and `.ipl` source files.
//!
//! ```text
//! term := \x:term. term | /\X. term | Pi x:term. term | forall X. term
//!       | term -> term | term term | term {term} | atom
//! atom := name | * | BOX | TRI | V | J | (term)
//! ```
//!
//! Names are resolved while parsing: bound names become de Bruijn indices
//! (innermost binding wins) and definition names are replaced by their
//! closed bodies. `V` means `*` in Type:Type files and is an ordinary name
//! elsewhere.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::term::{grow, Sort, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Star,
    Backslash,
    BigLambda,
    Arrow,
    Colon,
    Define,
    Dot,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Pragma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Backslash => f.write_str("`\\`"),
            Tok::BigLambda => f.write_str("`/\\`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Define => f.write_str("`:=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Pragma => f.write_str("`#system`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

const KEYWORDS: [&str; 6] = ["Pi", "forall", "BOX", "TRI", "J", "V"];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        let next = chars.get(i + 1).copied();
        if c == '-' && next == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, n) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('/', Some('\\')) => (Tok::BigLambda, 2),
            (':', Some('=')) => (Tok::Define, 2),
            ('\\', _) => (Tok::Backslash, 1),
            ('*', _) => (Tok::Star, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            (';', _) => (Tok::Semi, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('#', _) => {
                let word: String = chars[i + 1..].iter().take_while(|c| c.is_ascii_alphabetic()).collect();
                if word != "system" {
                    return Err(ParseError {
                        line,
                        column: col,
                        expected: "`#system`".into(),
                        found: format!("`#{word}`"),
                    });
                }
                (Tok::Pragma, 1 + word.len())
            }
            (c, _) if c.is_ascii_alphabetic() || c == '_' => {
                let word: String =
                    chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_' || **c == '\'').collect();
                let n = word.chars().count();
                (Tok::Ident(word), n)
            }
            (c, _) => {
                return Err(ParseError { line, column: col, expected: "a token".into(), found: format!("`{c}`") })
            }
        };
        advance(n, &mut i, &mut col);
        out.push(Spanned { tok, line: tl, column: tc });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Closed definitions visible to the parser, in definition order.
#[derive(Clone, Debug, Default)]
pub struct Env {
    defs: Vec<(String, Term)>,
    index: HashMap<String, usize>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Adds (or shadows) a definition. `term` must be closed.
    pub fn define(&mut self, name: impl Into<String>, term: Term) {
        assert!(term.is_closed(), "definitions must be closed");
        let name = name.into();
        self.index.insert(name.clone(), self.defs.len());
        self.defs.push((name, term));
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.index.get(name).map(|&k| &self.defs[k].1)
    }

    /// Visible definitions in definition order (shadowed ones skipped).
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.defs
            .iter()
            .enumerate()
            .filter(|(k, (n, _))| self.index.get(n) == Some(k))
            .map(|(_, (n, t))| (n.as_str(), t))
    }
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<String>,
    env: &'a Env,
    star: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, expected: expected.to_string(), found: t.tok.to_string() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn keyword(&self, tok: &Tok) -> Option<&'static str> {
        match tok {
            Tok::Ident(s) if s == "V" && !self.star => None,
            Tok::Ident(s) => KEYWORDS.iter().copied().find(|k| k == s),
            _ => None,
        }
    }

    fn binder_name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if self.keyword(&Tok::Ident(s.clone())).is_none() => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("a binder name")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        grow(|| match self.peek().clone() {
            Tok::Backslash => {
                self.bump();
                let (name, dom) = self.annotated_binder()?;
                self.binder_body(name, dom, Term::lam)
            }
            Tok::BigLambda => {
                self.bump();
                let name = self.binder_name()?;
                self.expect(Tok::Dot)?;
                self.binder_body(name, Term::star(), Term::lam)
            }
            ref t if self.keyword(t) == Some("Pi") => {
                self.bump();
                let (name, dom) = self.annotated_binder()?;
                self.binder_body(name, dom, Term::pi)
            }
            ref t if self.keyword(t) == Some("forall") => {
                self.bump();
                let name = self.binder_name()?;
                self.expect(Tok::Dot)?;
                self.binder_body(name, Term::star(), Term::pi)
            }
            _ => self.arrow(),
        })
    }

    fn annotated_binder(&mut self) -> Result<(String, Term), ParseError> {
        let name = self.binder_name()?;
        self.expect(Tok::Colon)?;
        let dom = self.term()?;
        self.expect(Tok::Dot)?;
        Ok((name, dom))
    }

    fn binder_body(&mut self, name: String, dom: Term, mk: fn(Term, Term) -> Term) -> Result<Term, ParseError> {
        self.scope.push(name);
        let body = self.term();
        self.scope.pop();
        Ok(mk(dom, body?))
    }

    fn arrow(&mut self) -> Result<Term, ParseError> {
        let lhs = self.app()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            self.scope.push(String::new());
            let rhs = self.term();
            self.scope.pop();
            return Ok(Term::pi(lhs, rhs?));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) => {
                let k = self.keyword(self.peek());
                !matches!(k, Some("Pi") | Some("forall"))
            }
            Tok::Star | Tok::LParen | Tok::LBrace => true,
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut f = self.atom()?;
        while self.starts_atom() {
            let a = if *self.peek() == Tok::LBrace {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RBrace)?;
                t
            } else {
                self.atom()?
            };
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        match tok {
            Tok::Star => {
                self.bump();
                Ok(Term::star())
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(ref s) => match self.keyword(&tok) {
                Some("BOX") => {
                    self.bump();
                    Ok(Term::sort(Sort::Box))
                }
                Some("TRI") => {
                    self.bump();
                    Ok(Term::sort(Sort::Triangle))
                }
                Some("V") => {
                    self.bump();
                    Ok(Term::star())
                }
                Some("J") => {
                    self.bump();
                    Ok(Term::prim_j())
                }
                Some(_) => Err(self.error("a term")),
                None => {
                    if let Some(k) = self.scope.iter().rposition(|n| n == s) {
                        self.bump();
                        return Ok(Term::var(self.scope.len() - 1 - k));
                    }
                    if let Some(t) = self.env.get(s) {
                        let t = t.clone();
                        self.bump();
                        return Ok(t);
                    }
                    Err(self.error("a bound variable or definition"))
                }
            },
            _ => Err(self.error("a term")),
        }
    }
}

/// Parses a closed term.
pub fn parse_term(text: &str, env: &Env, star: bool) -> Result<Term, ParseError> {
    parse_term_in(text, env, star, &[])
}

/// Parses a term whose free names are `names` (outermost first).
pub fn parse_term_in(text: &str, env: &Env, star: bool, names: &[String]) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, scope: names.to_vec(), env, star };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of input"));
    }
    Ok(t)
}

#[derive(Clone, Debug)]
pub enum Item {
    /// `name := term;`
    Def { name: String, term: Term, line: usize, column: usize },
    /// `name : type;`
    Check { name: String, ty: Term, line: usize, column: usize },
}

/// Equality ignores source positions.
impl PartialEq for Item {
    fn eq(&self, other: &Item) -> bool {
        match (self, other) {
            (Item::Def { name: a, term: s, .. }, Item::Def { name: b, term: t, .. }) => a == b && s == t,
            (Item::Check { name: a, ty: s, .. }, Item::Check { name: b, ty: t, .. }) => a == b && s == t,
            _ => false,
        }
    }
}

impl Eq for Item {}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Def { name, .. } | Item::Check { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    /// System named by the `#system` pragma, if any.
    pub system: Option<String>,
    pub items: Vec<Item>,
}

pub const SYSTEM_NAMES: [&str; 5] = ["stlc", "f", "fj", "uminus", "star"];

impl SourceFile {
    /// Parses a source file; `prelude` supplies names the file may use
    /// without defining.
    pub fn parse(text: &str, prelude: &Env) -> Result<SourceFile, ParseError> {
        let toks = lex(text)?;
        let mut env = prelude.clone();
        let mut p = Parser { toks, pos: 0, scope: Vec::new(), env: prelude, star: false };
        let mut system = None;
        if *p.peek() == Tok::Pragma {
            p.bump();
            match p.peek().clone() {
                Tok::Ident(s) if SYSTEM_NAMES.contains(&s.as_str()) => {
                    p.bump();
                    p.star = s == "star";
                    system = Some(s);
                }
                _ => return Err(p.error("one of stlc, f, fj, uminus, star")),
            }
        }
        let star = p.star;
        let mut items = Vec::new();
        let mut pos = p.pos;
        drop(p);
        loop {
            let mut p = Parser { toks: lex(text)?, pos, scope: Vec::new(), env: &env, star };
            if *p.peek() == Tok::Eof {
                break;
            }
            let at = p.toks[p.pos].clone();
            let name = match p.peek().clone() {
                Tok::Ident(s) if p.keyword(&Tok::Ident(s.clone())).is_none() => {
                    p.bump();
                    s
                }
                _ => return Err(p.error("a definition or check")),
            };
            let item = match p.peek() {
                Tok::Define => {
                    p.bump();
                    let term = p.term()?;
                    p.expect(Tok::Semi)?;
                    Item::Def { name: name.clone(), term, line: at.line, column: at.column }
                }
                Tok::Colon => {
                    p.bump();
                    if env.get(&name).is_none() {
                        return Err(ParseError {
                            line: at.line,
                            column: at.column,
                            expected: "a defined name".into(),
                            found: format!("`{name}`"),
                        });
                    }
                    let ty = p.term()?;
                    p.expect(Tok::Semi)?;
                    Item::Check { name: name.clone(), ty, line: at.line, column: at.column }
                }
                _ => return Err(p.error("`:=` or `:`")),
            };
            pos = p.pos;
            drop(p);
            if let Item::Def { name, term, .. } = &item {
                env.define(name.clone(), term.clone());
            }
            items.push(item);
        }
        Ok(SourceFile { system, items })
    }

    pub fn definition(&self, name: &str) -> Option<&Term> {
        self.items.iter().rev().find_map(|i| match i {
            Item::Def { name: n, term, .. } if n == name => Some(term),
            _ => None,
        })
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.items.iter().filter_map(|i| match i {
            Item::Def { name, term, .. } => Some((name.as_str(), term)),
            _ => None,
        })
    }

    /// Canonical text: earlier definitions are folded back into their names.
    pub fn print(&self) -> String {
        let star = self.system.as_deref() == Some("star");
        let mut out = String::new();
        if let Some(s) = &self.system {
            out.push_str(&format!("#system {s}\n"));
        }
        let mut table = FoldTable::new();
        for item in &self.items {
            let opts = PrintOptions { star_style: star, fold: Some(&table) };
            match item {
                Item::Def { name, term, .. } => {
                    out.push_str(&format!("{name} := {};\n", print_term(term, &opts)));
                    table.add(name.clone(), term.clone());
                }
                Item::Check { name, ty, .. } => {
                    out.push_str(&format!("{name} : {};\n", print_term(ty, &opts)));
                }
            }
        }
        out
    }
}

/// Closed terms printed back as their definition names.
#[derive(Clone, Debug, Default)]
pub struct FoldTable {
    entries: Vec<(String, Term)>,
    by_hash: HashMap<u64, Vec<usize>>,
}

impl FoldTable {
    pub fn new() -> FoldTable {
        FoldTable::default()
    }

    pub fn from_env(env: &Env) -> FoldTable {
        let mut t = FoldTable::new();
        for (n, term) in env.iter() {
            t.add(n.to_string(), term.clone());
        }
        t
    }

    /// Registers `name` for `term`; sorts, variables and later duplicates of
    /// an already registered term are ignored.
    pub fn add(&mut self, name: String, term: Term) {
        if term.size() <= 1 || !term.is_closed() || self.lookup(&term).is_some() {
            return;
        }
        self.entries.retain(|(n, _)| *n != name);
        self.by_hash.clear();
        self.entries.push((name, term));
        for (k, (_, t)) in self.entries.iter().enumerate() {
            self.by_hash.entry(t.fingerprint()).or_default().push(k);
        }
    }

    pub fn lookup(&self, t: &Term) -> Option<&str> {
        if !t.is_closed() {
            return None;
        }
        let ks = self.by_hash.get(&t.fingerprint())?;
        ks.iter().find(|&&k| self.entries[k].1 == *t).map(|&k| self.entries[k].0.as_str())
    }

    fn contains_name(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOptions<'a> {
    /// Print `★` as `V` and spell every binder with `\`/`Pi`.
    pub star_style: bool,
    pub fold: Option<&'a FoldTable>,
}

pub fn print_term(t: &Term, opts: &PrintOptions) -> String {
    print_term_in(&[], t, opts)
}

/// Prints `t` whose free variables are named by `names` (outermost first).
pub fn print_term_in(names: &[String], t: &Term, opts: &PrintOptions) -> String {
    let mut pr = Printer { opts, scope: names.iter().map(|n| (n.clone(), false)).collect(), out: String::new() };
    pr.term(t, Level::Top, true);
    pr.out
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Top,
    App,
    Atom,
}

struct Printer<'a, 'b> {
    opts: &'b PrintOptions<'a>,
    /// Names in scope with whether each binds a type (domain is a sort).
    scope: Vec<(String, bool)>,
    out: String,
}

const TYPE_NAMES: [&str; 6] = ["X", "Y", "Z", "W", "U", "S"];
const TERM_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

impl<'a, 'b> Printer<'a, 'b> {
    fn fresh(&self, is_type: bool) -> String {
        let pool = if is_type && !self.opts.star_style { TYPE_NAMES } else { TERM_NAMES };
        for round in 0.. {
            for base in pool {
                let cand = if round == 0 { base.to_string() } else { format!("{base}{round}") };
                let taken = self.scope.iter().any(|(n, _)| *n == cand)
                    || KEYWORDS.contains(&cand.as_str())
                    || self.opts.fold.is_some_and(|f| f.contains_name(&cand));
                if !taken {
                    return cand;
                }
            }
        }
        unreachable!()
    }

    fn is_type_like(&self, t: &Term) -> bool {
        match t.kind() {
            TermKind::Pi(..) | TermKind::Sort(_) => true,
            TermKind::Var(i) => self.scope.len() > *i && self.scope[self.scope.len() - 1 - i].1,
            _ => false,
        }
    }

    fn term(&mut self, t: &Term, level: Level, root: bool) {
        grow(|| self.term_inner(t, level, root))
    }

    fn term_inner(&mut self, t: &Term, level: Level, root: bool) {
        if !root {
            if let Some(name) = self.opts.fold.and_then(|f| f.lookup(t)) {
                self.out.push_str(name);
                return;
            }
        }
        let needs = match t.kind() {
            TermKind::Lam(..) | TermKind::Pi(..) => Level::Top,
            TermKind::App(..) => Level::App,
            _ => Level::Atom,
        };
        let paren = needs < level;
        if paren {
            self.out.push('(');
        }
        match t.kind() {
            TermKind::Var(i) => match self.scope.len().checked_sub(i + 1) {
                Some(k) => {
                    let n = self.scope[k].0.clone();
                    self.out.push_str(&n);
                }
                None => self.out.push_str(&format!("?{}", i - self.scope.len())),
            },
            TermKind::Sort(Sort::Star) if self.opts.star_style => self.out.push('V'),
            TermKind::Sort(s) => self.out.push_str(s.symbol()),
            TermKind::PrimJ => self.out.push('J'),
            TermKind::Lam(d, b) => {
                let is_type = d.as_sort().is_some();
                let name = self.fresh(is_type);
                if !self.opts.star_style && d.as_sort() == Some(Sort::Star) {
                    self.out.push_str(&format!("/\\{name}. "));
                } else {
                    self.out.push_str(&format!("\\{name}:"));
                    self.term(d, Level::Top, false);
                    self.out.push_str(". ");
                }
                self.scope.push((name, is_type));
                self.term(b, Level::Top, false);
                self.scope.pop();
            }
            TermKind::Pi(d, b) => {
                let is_type = d.as_sort().is_some();
                if b.mentions(0) {
                    let name = self.fresh(is_type);
                    if !self.opts.star_style && d.as_sort() == Some(Sort::Star) {
                        self.out.push_str(&format!("forall {name}. "));
                    } else {
                        self.out.push_str(&format!("Pi {name}:"));
                        self.term(d, Level::Top, false);
                        self.out.push_str(". ");
                    }
                    self.scope.push((name, is_type));
                } else {
                    self.term(d, Level::App, false);
                    self.out.push_str(" -> ");
                    self.scope.push((String::new(), is_type));
                }
                self.term(b, Level::Top, false);
                self.scope.pop();
            }
            TermKind::App(f, a) => {
                self.term(f, Level::App, false);
                if self.is_type_like(a) {
                    self.out.push_str(" {");
                    self.term(a, Level::Top, false);
                    self.out.push('}');
                } else {
                    self.out.push(' ');
                    self.term(a, Level::Atom, false);
                }
            }
        }
        if paren {
            self.out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse_term(s, &Env::new(), false).unwrap()
    }

    #[test]
    fn id_parses() {
        let id = Term::ty_lam(Term::lam(Term::var(0), Term::var(0)));
        assert_eq!(p("/\\X. \\x:X. x"), id);
        assert_eq!(print_term(&id, &PrintOptions::default()), "/\\X. \\x:X. x");
    }

    #[test]
    fn falsum_parses_in_star_files() {
        let bot = parse_term("Pi x:V. x", &Env::new(), true).unwrap();
        assert_eq!(bot, Term::pi(Term::star(), Term::var(0)));
        // outside Type:Type files V is an ordinary (here unbound) name
        assert!(parse_term("Pi x:V. x", &Env::new(), false).is_err());
    }

    #[test]
    fn dangling_binder_is_positioned() {
        let e = parse_term("\\x:", &Env::new(), false).unwrap_err();
        assert_eq!((e.line, e.column), (1, 4));
        assert_eq!(e.expected, "a term");
    }

    #[test]
    fn arrows_associate_right_and_bind_loosest() {
        let t = p("forall A. forall B. A -> B -> A");
        let expected = Term::forall(Term::forall(Term::arrow(Term::var(1), Term::arrow(Term::var(0), Term::var(1)))));
        assert_eq!(t, expected);
        let app = p("/\\A. \\f:A -> A. \\x:A. f x -> A");
        assert!(matches!(app.kind(), TermKind::Lam(..)));
    }

    #[test]
    fn braces_are_plain_application() {
        assert_eq!(p("/\\X. \\f:forall Y. Y. f {X}"), p("/\\X. \\f:forall Y. Y. f X"));
    }

    #[test]
    fn shadowing_resolves_innermost() {
        assert_eq!(p("\\x:*. \\x:x. x"), Term::lam(Term::star(), Term::lam(Term::var(0), Term::var(0))));
    }

    #[test]
    fn comments_and_files() {
        let src = "#system f\n-- identity\nID := /\\X. \\x:X. x;\nID : forall X. X -> X;\nSelf := ID {forall X. X -> X} ID;\n";
        let f = SourceFile::parse(src, &Env::new()).unwrap();
        assert_eq!(f.system.as_deref(), Some("f"));
        assert_eq!(f.items.len(), 3);
        let printed = f.print();
        assert_eq!(SourceFile::parse(&printed, &Env::new()).unwrap(), f);
        assert_eq!(SourceFile::parse(&printed, &Env::new()).unwrap().print(), printed);
        assert!(printed.contains("Self := ID {forall X. X -> X} ID;"), "{printed}");
    }

    #[test]
    fn check_of_undefined_name_is_an_error() {
        let e = SourceFile::parse("#system f\nfoo : *;", &Env::new()).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn folding_skips_the_root() {
        let mut env = Env::new();
        env.define("Bool", p("forall Z. Z -> Z -> Z"));
        let table = FoldTable::from_env(&env);
        let opts = PrintOptions { fold: Some(&table), ..Default::default() };
        let t = Term::lam(env.get("Bool").unwrap().clone(), Term::var(0));
        assert_eq!(print_term(&t, &opts), "\\x:Bool. x");
        assert_eq!(print_term(env.get("Bool").unwrap(), &opts), "forall X. X -> X -> X");
    }

    #[test]
    fn printing_fresh_names_avoid_capture() {
        // λx:★. λy:★. x, printed with a free variable named "x"
        let t = Term::lam(Term::star(), Term::lam(Term::var(0), Term::var(2)));
        let s = print_term_in(&["x".to_string()], &t, &PrintOptions::default());
        assert_eq!(s, "/\\X. \\y:X. x");
        assert_eq!(parse_term_in(&s, &Env::new(), false, &["x".to_string()]).unwrap(), t);
    }
}
