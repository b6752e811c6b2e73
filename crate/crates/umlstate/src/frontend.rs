//! UMLState source text to [`StateMachine`], plus validation, effect
//! desugaring and input-enabledness completion.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::datalogic::{CmpOp, DataTerm, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    fn error(code: &'static str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), span }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}[{}]: {}", self.span.line, self.span.col, self.code, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Explicit,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub source: String,
    pub guard: Predicate,
    pub event: String,
    /// Always the declared parameter names of `event`.
    pub params: Vec<String>,
    pub assignments: Vec<(String, DataTerm)>,
    pub effect: Predicate,
    pub target: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    pub name: String,
    pub attributes: Vec<String>,
    pub events: Vec<(String, Vec<String>)>,
    pub states: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    pub initial_state: String,
    pub initial_predicate: Predicate,
}

impl StateMachine {
    pub fn params(&self, event: &str) -> Option<&[String]> {
        self.events.iter().find(|(e, _)| e == event).map(|(_, p)| p.as_slice())
    }

    pub fn explicit_transitions(&self) -> impl Iterator<Item = &TransitionSpec> {
        self.transitions.iter().filter(|t| t.provenance == Provenance::Explicit)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("attribute `{0}` assigned more than once")]
    DuplicateAssignment(String),
    #[error("assignment to undeclared attribute `{0}`")]
    UnknownAttribute(String),
}

/// Conjunction of `a' = t` for assigned attributes and `a' = a` for the
/// others, in attribute order.
pub fn desugar_effect(assignments: &[(String, DataTerm)], attributes: &[String]) -> Result<Predicate, FrontendError> {
    let mut by_attr: BTreeMap<&str, &DataTerm> = BTreeMap::new();
    for (a, t) in assignments {
        if !attributes.contains(a) {
            return Err(FrontendError::UnknownAttribute(a.clone()));
        }
        if by_attr.insert(a, t).is_some() {
            return Err(FrontendError::DuplicateAssignment(a.clone()));
        }
    }
    Ok(Predicate::conj(attributes.iter().map(|a| {
        let rhs = by_attr.get(a.as_str()).map(|t| (*t).clone()).unwrap_or_else(|| DataTerm::attr(a));
        Predicate::cmp(CmpOp::Eq, DataTerm::primed(a), rhs)
    })))
}

/// Appends one idling self-loop per state and event, guarded by the negated
/// disjunction of the explicit guards. Loops whose explicit guards contain
/// the literal `true` can never fire and are left out. Previously generated
/// loops are recomputed, so the operation is idempotent.
pub fn complete_input_enabledness(machine: &StateMachine) -> StateMachine {
    let mut out = machine.clone();
    out.transitions.retain(|t| t.provenance == Provenance::Explicit);
    let frame = desugar_effect(&[], &machine.attributes).expect("empty assignment is valid");
    let mut added = Vec::new();
    for c in &machine.states {
        for (e, params) in &machine.events {
            let guards: Vec<Predicate> =
                out.transitions.iter().filter(|t| &t.source == c && &t.event == e).map(|t| t.guard.clone()).collect();
            if guards.iter().any(|g| *g == Predicate::True) {
                continue;
            }
            added.push(TransitionSpec {
                source: c.clone(),
                guard: Predicate::not(Predicate::disj(guards)),
                event: e.clone(),
                params: params.clone(),
                assignments: Vec::new(),
                effect: frame.clone(),
                target: c.clone(),
                provenance: Provenance::Generated,
            });
        }
    }
    out.transitions.extend(added);
    out
}

/// States reachable from the initial state in the transition digraph.
pub fn syntactically_reachable(machine: &StateMachine) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([machine.initial_state.clone()]);
    let mut queue = VecDeque::from([machine.initial_state.clone()]);
    while let Some(c) = queue.pop_front() {
        for t in machine.transitions.iter().filter(|t| t.source == c) {
            if seen.insert(t.target.clone()) {
                queue.push_back(t.target.clone());
            }
        }
    }
    seen
}

pub fn validate(machine: &StateMachine) -> Vec<Diagnostic> {
    let reach = syntactically_reachable(machine);
    let mut out: Vec<Diagnostic> = machine
        .states
        .iter()
        .filter(|s| !reach.contains(*s))
        .map(|s| Diagnostic::error("unreachable", format!("state {s} not syntactically reachable"), Span::default()))
        .collect();
    if machine.initial_predicate == Predicate::False {
        out.push(Diagnostic {
            severity: Severity::Warning,
            code: "init-false",
            message: "unsatisfiable initial predicate".into(),
            span: Span::default(),
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: [&str; 29] = [
    "-->", "<=>", "/\\", "\\/", "//", ":=", "==", "=>", "<=", ">=", "=", "<", ">", "!", ";", ",", "(", ")", "[", "]",
    "{", "}", ":", "/", "+", "*", "'", ".", "@",
];

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' && chars.get(i + 1) == Some(&'%') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        let mk = |len: usize, tok: Tok| Token {
            tok,
            span: Span { line: start.0, col: start.1, end_line: start.0, end_col: start.1 + len },
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            out.push(mk(j - i, Tok::Ident(s)));
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let n = s.parse::<u64>().map_err(|_| {
                Diagnostic::error("syntax", format!("numeral {s} out of range"), mk(j - i, Tok::Eof).span)
            })?;
            out.push(mk(j - i, Tok::Num(n)));
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                out.push(mk(sym.len(), Tok::Sym(sym)));
                i += sym.len();
                col += sym.len();
            }
            None => {
                return Err(Diagnostic::error("syntax", format!("unexpected character `{c}`"), mk(1, Tok::Eof).span))
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col, end_line: line, end_col: col } });
    Ok(out)
}

const KEYWORDS: [&str; 12] =
    ["logic", "UMLState", "spec", "end", "var", "event", "states", "init", "trans", "true", "false", "suc"];

// ---------------------------------------------------------------------------
// Parser

/// How identifiers inside terms are classified.
pub(crate) trait Scope {
    fn resolve(&self, name: &str) -> Option<DataTerm>;

    fn resolve_primed(&self, _name: &str) -> Option<DataTerm> {
        None
    }
}

/// Raw term or predicate with unresolved identifiers.
#[derive(Debug, Clone)]
pub(crate) enum RawTerm {
    Num(u64),
    Ident(String, Span),
    Primed(String, Span),
    Suc(Box<RawTerm>),
    Add(Box<RawTerm>, Box<RawTerm>),
    Mul(Box<RawTerm>, Box<RawTerm>),
}

#[derive(Debug, Clone)]
pub(crate) enum RawPred {
    True,
    False,
    Cmp(CmpOp, RawTerm, RawTerm),
    Not(Box<RawPred>),
    And(Box<RawPred>, Box<RawPred>),
    Or(Box<RawPred>, Box<RawPred>),
    Implies(Box<RawPred>, Box<RawPred>),
    Iff(Box<RawPred>, Box<RawPred>),
}

impl RawTerm {
    pub(crate) fn resolve(&self, scope: &dyn Scope, what: &str) -> Result<DataTerm, Diagnostic> {
        Ok(match self {
            RawTerm::Num(n) => DataTerm::Num(*n),
            RawTerm::Ident(name, span) => scope
                .resolve(name)
                .ok_or_else(|| Diagnostic::error("undeclared", format!("undeclared {what} {name}"), *span))?,
            RawTerm::Primed(name, span) => scope
                .resolve_primed(name)
                .ok_or_else(|| Diagnostic::error("undeclared", format!("undeclared {what} {name}'"), *span))?,
            RawTerm::Suc(t) => DataTerm::Suc(Box::new(t.resolve(scope, what)?)),
            RawTerm::Add(a, b) => DataTerm::add(a.resolve(scope, what)?, b.resolve(scope, what)?),
            RawTerm::Mul(a, b) => DataTerm::mul(a.resolve(scope, what)?, b.resolve(scope, what)?),
        })
    }
}

impl RawPred {
    pub(crate) fn resolve(&self, scope: &dyn Scope, what: &str) -> Result<Predicate, Diagnostic> {
        Ok(match self {
            RawPred::True => Predicate::True,
            RawPred::False => Predicate::False,
            RawPred::Cmp(op, a, b) => Predicate::Cmp(*op, a.resolve(scope, what)?, b.resolve(scope, what)?),
            RawPred::Not(p) => Predicate::not(p.resolve(scope, what)?),
            RawPred::And(a, b) => Predicate::and(a.resolve(scope, what)?, b.resolve(scope, what)?),
            RawPred::Or(a, b) => Predicate::or(a.resolve(scope, what)?, b.resolve(scope, what)?),
            RawPred::Implies(a, b) => Predicate::implies(a.resolve(scope, what)?, b.resolve(scope, what)?),
            RawPred::Iff(a, b) => Predicate::Iff(Box::new(a.resolve(scope, what)?), Box::new(b.resolve(scope, what)?)),
        })
    }
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    pub(crate) fn fail<T>(&self, expected: &str) -> Result<T, Diagnostic> {
        Err(Diagnostic::error(
            "syntax",
            format!("expected {expected}, found {}", Self::describe(self.peek())),
            self.span(),
        ))
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub(crate) fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> Result<Span, Diagnostic> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), Diagnostic> {
        if self.at_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("`{k}`"))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, Span), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => self.fail("identifier"),
        }
    }

    pub(crate) fn ident_list(&mut self) -> Result<Vec<(String, Span)>, Diagnostic> {
        let mut out = vec![self.ident()?];
        while self.at_sym(",") {
            self.bump();
            out.push(self.ident()?);
        }
        Ok(out)
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn term(&mut self) -> Result<RawTerm, Diagnostic> {
        let mut lhs = self.term_mul()?;
        while self.at_sym("+") {
            self.bump();
            lhs = RawTerm::Add(Box::new(lhs), Box::new(self.term_mul()?));
        }
        Ok(lhs)
    }

    fn term_mul(&mut self) -> Result<RawTerm, Diagnostic> {
        let mut lhs = self.term_atom()?;
        while self.at_sym("*") {
            self.bump();
            lhs = RawTerm::Mul(Box::new(lhs), Box::new(self.term_atom()?));
        }
        Ok(lhs)
    }

    fn term_atom(&mut self) -> Result<RawTerm, Diagnostic> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(RawTerm::Num(n))
            }
            Tok::Ident(k) if k == "suc" => {
                self.bump();
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(RawTerm::Suc(Box::new(t)))
            }
            Tok::Ident(_) => {
                let (s, sp) = self.ident()?;
                if self.at_sym("'") {
                    self.bump();
                    return Ok(RawTerm::Primed(s, sp));
                }
                Ok(RawTerm::Ident(s, sp))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.fail("term"),
        }
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("==") => CmpOp::EqEq,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    pub(crate) fn pred(&mut self) -> Result<RawPred, Diagnostic> {
        let lhs = self.pred_imp()?;
        if self.at_sym("<=>") {
            self.bump();
            return Ok(RawPred::Iff(Box::new(lhs), Box::new(self.pred()?)));
        }
        Ok(lhs)
    }

    fn pred_imp(&mut self) -> Result<RawPred, Diagnostic> {
        let lhs = self.pred_or()?;
        if self.at_sym("=>") {
            self.bump();
            return Ok(RawPred::Implies(Box::new(lhs), Box::new(self.pred_imp()?)));
        }
        Ok(lhs)
    }

    pub(crate) fn pred_or(&mut self) -> Result<RawPred, Diagnostic> {
        let mut lhs = self.pred_and()?;
        while self.at_sym("\\/") {
            self.bump();
            lhs = RawPred::Or(Box::new(lhs), Box::new(self.pred_and()?));
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> Result<RawPred, Diagnostic> {
        let mut lhs = self.pred_unary()?;
        while self.at_sym("/\\") {
            self.bump();
            lhs = RawPred::And(Box::new(lhs), Box::new(self.pred_unary()?));
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> Result<RawPred, Diagnostic> {
        if self.at_sym("!") {
            self.bump();
            return Ok(RawPred::Not(Box::new(self.pred_unary()?)));
        }
        if self.at_kw("true") {
            self.bump();
            return Ok(RawPred::True);
        }
        if self.at_kw("false") {
            self.bump();
            return Ok(RawPred::False);
        }
        if self.at_sym("(") {
            // A parenthesis opens either a predicate or the left term of a
            // comparison; try the comparison first.
            let save = self.pos;
            if let Ok(cmp) = self.comparison() {
                return Ok(cmp);
            }
            self.pos = save;
            self.bump();
            let p = self.pred()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<RawPred, Diagnostic> {
        let a = self.term()?;
        match self.cmp_op() {
            Some(op) => Ok(RawPred::Cmp(op, a, self.term()?)),
            None => self.fail("comparison operator"),
        }
    }
}

pub(crate) struct NameScope<'a> {
    pub attrs: &'a [String],
    pub vars: &'a [String],
    pub allow_primed: bool,
}

impl Scope for NameScope<'_> {
    fn resolve(&self, name: &str) -> Option<DataTerm> {
        if self.attrs.iter().any(|a| a == name) {
            Some(DataTerm::attr(name))
        } else if self.vars.iter().any(|v| v == name) {
            Some(DataTerm::var(name))
        } else {
            None
        }
    }

    fn resolve_primed(&self, name: &str) -> Option<DataTerm> {
        (self.allow_primed && self.attrs.iter().any(|a| a == name)).then(|| DataTerm::primed(name))
    }
}

/// Parses a state predicate over `attrs` and `vars`.
pub fn parse_predicate(text: &str, attrs: &[String], vars: &[String]) -> Result<Predicate, Diagnostic> {
    parse_pred_with(text, &NameScope { attrs, vars, allow_primed: false })
}

/// Like [`parse_predicate`] but also accepts primed attributes `a'`.
pub fn parse_transition_predicate(text: &str, attrs: &[String], vars: &[String]) -> Result<Predicate, Diagnostic> {
    parse_pred_with(text, &NameScope { attrs, vars, allow_primed: true })
}

fn parse_pred_with(text: &str, scope: &dyn Scope) -> Result<Predicate, Diagnostic> {
    let mut p = Parser::new(lex(text)?);
    let raw = p.pred()?;
    if !p.at_eof() {
        return p.fail("end of predicate");
    }
    raw.resolve(scope, "attribute")
}

struct RawTrans {
    source: (String, Span),
    target: (String, Span),
    event: (String, Span),
    params: Option<Vec<(String, Span)>>,
    guard: Option<RawPred>,
    assigns: Vec<((String, Span), RawTerm)>,
}

pub fn parse_umlstate(text: &str) -> Result<StateMachine, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser::new(toks);
    let header = (|| -> Result<String, Diagnostic> {
        p.expect_kw("logic")?;
        p.expect_kw("UMLState")?;
        p.expect_kw("spec")?;
        let (name, _) = p.ident()?;
        p.expect_sym("=")?;
        Ok(name)
    })()
    .map_err(|d| vec![d])?;

    let mut attrs: Vec<(String, Span)> = Vec::new();
    let mut events: Vec<((String, Span), Vec<(String, Span)>)> = Vec::new();
    let mut states: Vec<(String, Span)> = Vec::new();
    let mut inits: Vec<((String, Span), RawPred, Span)> = Vec::new();
    let mut trans: Vec<RawTrans> = Vec::new();

    loop {
        let step = (|| -> Result<bool, Diagnostic> {
            if p.at_kw("end") {
                p.bump();
                if !p.at_eof() {
                    return p.fail("end of input");
                }
                return Ok(false);
            }
            if p.at_kw("var") {
                p.bump();
                attrs.extend(p.ident_list()?);
            } else if p.at_kw("event") {
                p.bump();
                let name = p.ident()?;
                let mut params = Vec::new();
                if p.at_sym("(") {
                    p.bump();
                    params = p.ident_list()?;
                    p.expect_sym(")")?;
                }
                events.push((name, params));
            } else if p.at_kw("states") {
                p.bump();
                states.extend(p.ident_list()?);
            } else if p.at_kw("init") {
                let sp = p.span();
                p.bump();
                let s = p.ident()?;
                p.expect_sym(":")?;
                inits.push((s, p.pred()?, sp));
            } else if p.at_kw("trans") {
                p.bump();
                let source = p.ident()?;
                p.expect_sym("-->")?;
                let target = p.ident()?;
                p.expect_sym(":")?;
                let event = p.ident()?;
                let mut params = None;
                if p.at_sym("(") {
                    p.bump();
                    params = Some(p.ident_list()?);
                    p.expect_sym(")")?;
                }
                let mut guard = None;
                if p.at_sym("[") {
                    p.bump();
                    guard = Some(p.pred()?);
                    p.expect_sym("]")?;
                }
                let mut assigns = Vec::new();
                if p.at_sym("/") {
                    p.bump();
                    p.expect_sym("{")?;
                    loop {
                        let a = p.ident()?;
                        p.expect_sym(":=")?;
                        assigns.push((a, p.term()?));
                        if p.at_sym(";") {
                            p.bump();
                            continue;
                        }
                        break;
                    }
                    p.expect_sym("}")?;
                }
                trans.push(RawTrans { source, target, event, params, guard, assigns });
            } else {
                return p.fail("declaration or `end`");
            }
            p.expect_sym(";")?;
            Ok(true)
        })();
        match step {
            Ok(true) => {}
            Ok(false) => break,
            Err(d) => return Err(vec![d]),
        }
    }

    let mut diags = Vec::new();
    let mut seen: BTreeMap<String, &'static str> = BTreeMap::new();
    let mut declare = |name: &(String, Span), kind: &'static str, diags: &mut Vec<Diagnostic>| match seen.get(&name.0) {
        Some(prev) if *prev == kind => {
            diags.push(Diagnostic::error("duplicate", format!("duplicate declaration of {kind} {}", name.0), name.1))
        }
        Some(prev) => diags.push(Diagnostic::error(
            "name-clash",
            format!("{kind} {} clashes with {prev} of the same name", name.0),
            name.1,
        )),
        None => {
            seen.insert(name.0.clone(), kind);
        }
    };
    for a in &attrs {
        declare(a, "attribute", &mut diags);
    }
    for (e, _) in &events {
        declare(e, "event", &mut diags);
    }
    for s in &states {
        declare(s, "state", &mut diags);
    }
    let mut param_names = BTreeSet::new();
    for (e, params) in &events {
        let mut local = BTreeSet::new();
        for x in params {
            if !local.insert(x.0.clone()) {
                diags.push(Diagnostic::error(
                    "duplicate",
                    format!("duplicate parameter {} of event {}", x.0, e.0),
                    x.1,
                ));
            }
            param_names.insert(x.clone());
        }
    }
    for x in &param_names {
        if let Some(kind) = seen.get(&x.0) {
            diags.push(Diagnostic::error(
                "name-clash",
                format!("parameter {} clashes with {kind} of the same name", x.0),
                x.1,
            ));
        }
    }

    let attr_names: Vec<String> = attrs.iter().map(|a| a.0.clone()).collect();
    let state_names: Vec<String> = states.iter().map(|s| s.0.clone()).collect();
    let event_list: Vec<(String, Vec<String>)> =
        events.iter().map(|(e, ps)| (e.0.clone(), ps.iter().map(|x| x.0.clone()).collect())).collect();
    let check_state = |s: &(String, Span), diags: &mut Vec<Diagnostic>| {
        if !state_names.contains(&s.0) {
            diags.push(Diagnostic::error("undeclared", format!("undeclared state {}", s.0), s.1));
        }
    };

    let (initial_state, initial_predicate) = match inits.as_slice() {
        [] => {
            diags.push(Diagnostic::error("missing-init", "missing init declaration", p.span()));
            (String::new(), Predicate::True)
        }
        [(s, pred, _), rest @ ..] => {
            for (_, _, sp) in rest {
                diags.push(Diagnostic::error("duplicate", "duplicate init declaration", *sp));
            }
            check_state(s, &mut diags);
            let scope = NameScope { attrs: &attr_names, vars: &[], allow_primed: false };
            let resolved = pred.resolve(&scope, "attribute").unwrap_or_else(|d| {
                diags.push(d);
                Predicate::True
            });
            (s.0.clone(), resolved)
        }
    };

    let mut transitions = Vec::new();
    for t in &trans {
        check_state(&t.source, &mut diags);
        check_state(&t.target, &mut diags);
        let Some(declared) = event_list.iter().find(|(e, _)| *e == t.event.0).map(|(_, p)| p.clone()) else {
            diags.push(Diagnostic::error("undeclared", format!("undeclared event {}", t.event.0), t.event.1));
            continue;
        };
        let used: Vec<(String, Span)> = t.params.clone().unwrap_or_default();
        if used.len() != declared.len() {
            diags.push(Diagnostic::error(
                "arity",
                format!(
                    "event {} declared with {} parameter(s) but used with {}",
                    t.event.0,
                    declared.len(),
                    used.len()
                ),
                t.event.1,
            ));
            continue;
        }
        // Rename the transition's local parameter names to the declared ones.
        let renaming: BTreeMap<String, String> =
            used.iter().map(|u| u.0.clone()).zip(declared.iter().cloned()).collect();
        let locals: Vec<String> = used.iter().map(|u| u.0.clone()).collect();
        let scope = TransScope { attrs: &attr_names, locals: &locals, renaming: &renaming };
        let guard = match &t.guard {
            None => Predicate::True,
            Some(g) => match g.resolve(&scope, "attribute") {
                Ok(g) => g,
                Err(d) => {
                    diags.push(d);
                    continue;
                }
            },
        };
        let mut assignments = Vec::new();
        let mut bad = false;
        for ((a, sp), rhs) in &t.assigns {
            if !attr_names.contains(a) {
                diags.push(Diagnostic::error("undeclared", format!("undeclared attribute {a}"), *sp));
                bad = true;
                continue;
            }
            if assignments.iter().any(|(b, _): &(String, DataTerm)| b == a) {
                diags.push(Diagnostic::error(
                    "duplicate-assign",
                    format!("attribute {a} assigned more than once"),
                    *sp,
                ));
                bad = true;
                continue;
            }
            match rhs.resolve(&scope, "attribute") {
                Ok(term) => assignments.push((a.clone(), term)),
                Err(d) => {
                    diags.push(d);
                    bad = true;
                }
            }
        }
        if bad {
            continue;
        }
        let effect = desugar_effect(&assignments, &attr_names).expect("assignments checked above");
        transitions.push(TransitionSpec {
            source: t.source.0.clone(),
            guard,
            event: t.event.0.clone(),
            params: declared,
            assignments,
            effect,
            target: t.target.0.clone(),
            provenance: Provenance::Explicit,
        });
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(StateMachine {
        name: header,
        attributes: attr_names,
        events: event_list,
        states: state_names,
        transitions,
        initial_state,
        initial_predicate,
    })
}

struct TransScope<'a> {
    attrs: &'a [String],
    locals: &'a [String],
    renaming: &'a BTreeMap<String, String>,
}

impl Scope for TransScope<'_> {
    fn resolve(&self, name: &str) -> Option<DataTerm> {
        if self.locals.iter().any(|l| l == name) {
            Some(DataTerm::var(&self.renaming[name]))
        } else if self.attrs.iter().any(|a| a == name) {
            Some(DataTerm::attr(name))
        } else {
            None
        }
    }
}

/// UMLState source text; re-parsing yields an equal machine.
impl fmt::Display for StateMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "logic UMLState")?;
        writeln!(f, "spec {} =", self.name)?;
        if !self.attributes.is_empty() {
            writeln!(f, "  var {};", self.attributes.join(", "))?;
        }
        for (e, params) in &self.events {
            if params.is_empty() {
                writeln!(f, "  event {e};")?;
            } else {
                writeln!(f, "  event {e}({});", params.join(", "))?;
            }
        }
        writeln!(f, "  states {};", self.states.join(", "))?;
        writeln!(f, "  init {} : {};", self.initial_state, self.initial_predicate)?;
        for t in &self.transitions {
            write!(f, "  trans {} --> {} : {}", t.source, t.target, t.event)?;
            if !t.params.is_empty() {
                write!(f, "({})", t.params.join(", "))?;
            }
            if t.guard != Predicate::True {
                write!(f, " [{}]", t.guard)?;
            }
            if !t.assignments.is_empty() {
                let body: Vec<String> = t.assignments.iter().map(|(a, e)| format!("{a} := {e}")).collect();
                write!(f, " / {{ {} }}", body.join("; "))?;
            }
            writeln!(f, ";")?;
        }
        writeln!(f, "end")
    }
}
