//! CASL-style text for theories, with a reader for the same layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::text::{tokenize, Cursor, Tok};
use super::{evt_name, Axiom, FolFormula, FolSignature, FolTerm, FolTheory, FolgenError, Origin, Sort};

struct Glyphs {
    forall: &'static str,
    exists: &'static str,
    dot: &'static str,
    and: &'static str,
    or: &'static str,
    implies: &'static str,
    iff: &'static str,
    not: &'static str,
    le: &'static str,
    ge: &'static str,
    times: &'static str,
    arrow: &'static str,
}

const ASCII: Glyphs = Glyphs {
    forall: "forall",
    exists: "exists",
    dot: ".",
    and: "/\\",
    or: "\\/",
    implies: "=>",
    iff: "<=>",
    not: "not",
    le: "<=",
    ge: ">=",
    times: "*",
    arrow: "->",
};

const UNICODE: Glyphs = Glyphs {
    forall: "∀",
    exists: "∃",
    dot: "•",
    and: "∧",
    or: "∨",
    implies: "⇒",
    iff: "⇔",
    not: "¬",
    le: "≤",
    ge: "≥",
    times: "×",
    arrow: "→",
};

const SYMBOLS: &[&str] = &[
    "(", ")", ",", ":", ";", ".", "{", "}", "=", "==", "<", "<=", ">", ">=", "+", "*", "/\\", "\\/", "=>", "<=>", "->",
    "%(", ")%", "∀", "∃", "•", "∧", "∨", "⇒", "⇔", "¬", "≤", "≥", "×", "→",
];

const NAT_PREDS: [&str; 5] = ["<=", "<", ">", ">=", "=="];

struct Printer<'a> {
    g: &'a Glyphs,
    sets: Option<&'a BTreeMap<BTreeSet<String>, String>>,
}

impl Printer<'_> {
    fn term(&self, t: &FolTerm, out: &mut String) {
        match t {
            FolTerm::Var(v) => out.push_str(v),
            FolTerm::Num(n) => write!(out, "{n}").unwrap(),
            FolTerm::App(f, args) if (f == "+" || f == "*") && args.len() == 2 => {
                self.operand(&args[0], out);
                write!(out, " {f} ").unwrap();
                self.operand(&args[1], out);
            }
            FolTerm::App(f, args) => {
                out.push_str(f);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        self.term(a, out);
                    }
                    out.push(')');
                }
            }
            FolTerm::EventSet(s) => match self.sets.and_then(|m| m.get(s)) {
                Some(name) => out.push_str(name),
                None => {
                    let names: Vec<String> = s.iter().map(|e| evt_name(e)).collect();
                    write!(out, "{{{}}}", names.join(", ")).unwrap();
                }
            },
        }
    }

    fn operand(&self, t: &FolTerm, out: &mut String) {
        if matches!(t, FolTerm::App(f, args) if (f == "+" || f == "*") && args.len() == 2) {
            out.push('(');
            self.term(t, out);
            out.push(')');
        } else {
            self.term(t, out);
        }
    }

    fn binder(&self, vs: &[(String, Sort)], out: &mut String) {
        let mut groups: Vec<(Vec<&str>, Sort)> = Vec::new();
        for (v, s) in vs {
            match groups.last_mut() {
                Some((names, last)) if last == s => names.push(v),
                _ => groups.push((vec![v], *s)),
            }
        }
        let parts: Vec<String> = groups.iter().map(|(names, s)| format!("{} : {s}", names.join(", "))).collect();
        out.push_str(&parts.join("; "));
    }

    fn formula(&self, f: &FolFormula, out: &mut String) {
        let g = self.g;
        match f {
            FolFormula::True => out.push_str("true"),
            FolFormula::False => out.push_str("false"),
            FolFormula::Pred(p, args) if NAT_PREDS.contains(&p.as_str()) && args.len() == 2 => {
                let sym = match p.as_str() {
                    "<=" => g.le,
                    ">=" => g.ge,
                    other => other,
                };
                self.term(&args[0], out);
                write!(out, " {sym} ").unwrap();
                self.term(&args[1], out);
            }
            FolFormula::Pred(p, args) => self.term(&FolTerm::App(p.clone(), args.clone()), out),
            FolFormula::Eq(a, b) => {
                self.term(a, out);
                out.push_str(" = ");
                self.term(b, out);
            }
            FolFormula::Not(a) => {
                write!(out, "{} ", g.not).unwrap();
                self.sub(a, 3, out);
            }
            FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
                let (sym, lvl) = match f {
                    FolFormula::And(..) => (g.and, 2),
                    FolFormula::Or(..) => (g.or, 2),
                    FolFormula::Implies(..) => (g.implies, 1),
                    _ => (g.iff, 1),
                };
                self.sub(a, lvl + 1, out);
                write!(out, " {sym} ").unwrap();
                self.sub(b, lvl + 1, out);
            }
            FolFormula::Forall(vs, body) | FolFormula::Exists(vs, body) => {
                let q = if matches!(f, FolFormula::Forall(..)) { g.forall } else { g.exists };
                write!(out, "{q} ").unwrap();
                self.binder(vs, out);
                write!(out, " {} ", g.dot).unwrap();
                self.formula(body, out);
            }
        }
    }

    /// Binary connectives below `min` and all quantifiers get parentheses.
    fn sub(&self, f: &FolFormula, min: u8, out: &mut String) {
        let lvl = match f {
            FolFormula::Implies(..) | FolFormula::Iff(..) => 1,
            FolFormula::And(..) | FolFormula::Or(..) => 2,
            FolFormula::Forall(..) | FolFormula::Exists(..) => 0,
            _ => 4,
        };
        if lvl < min {
            out.push('(');
            self.formula(f, out);
            out.push(')');
        } else {
            self.formula(f, out);
        }
    }
}

/// A formula in ASCII notation; event sets are written out as sets of names.
pub fn formula_ascii(f: &FolFormula) -> String {
    let mut out = String::new();
    Printer { g: &ASCII, sets: None }.formula(f, &mut out);
    out
}

/// A formula with event sets named as in `theory`'s emitted text.
pub fn theory_formula(theory: &FolTheory, f: &FolFormula, ascii: bool) -> String {
    let sets = theory.event_set_names();
    let mut out = String::new();
    Printer { g: if ascii { &ASCII } else { &UNICODE }, sets: Some(&sets) }.formula(f, &mut out);
    out
}

fn is_plain(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic())
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'')
}

fn op_name(s: &str) -> String {
    if s == "+" || s == "*" || NAT_PREDS.contains(&s) {
        format!("__{s}__")
    } else {
        s.to_string()
    }
}

const PRELUDE: &str = "\
%display(__<=__ %LATEX __\\leq__)%
%display(__>=__ %LATEX __\\geq__)%
%prec({__+__} < {__*__})%
%right_assoc(__+__, __*__)%
%number __@@__

spec Nat =
  free type Nat ::= 0 | suc(Nat)
then %def
  %% Operations to represent natural numbers with digits:
  ops 1 : Nat = suc(0);
      2 : Nat = suc(1);
      3 : Nat = suc(2);
      4 : Nat = suc(3);
      5 : Nat = suc(4);
      6 : Nat = suc(5);
      7 : Nat = suc(6);
      8 : Nat = suc(7);
      9 : Nat = suc(8);
      __@@__ (m : Nat; n : Nat) : Nat = m * suc(9) + n %(decimal_def)%
end

spec EvtNameSet =
  sort EvtName
  generated type EvtNameSet ::= {} | __+__(EvtName; EvtNameSet)
  pred __eps__ : EvtName * EvtNameSet
  forall x, y : EvtName; M : EvtNameSet
  . not x eps {} %(elemOf_empty_Set)%
  . x eps y + M <=> x = y \\/ x eps M %(elemOf_NonEmpty_Set)%
end

";

const FREE_BLOCK: &str = "\
  %% free {
  %%   pred reachable3 : EvtNameSet * Conf * Conf
  %%   forall E : EvtNameSet; g, g', g'' : Conf; e : Evt
  %%   . reachable3(E, g, g)
  %%   . reachable3(E, g, g') /\\ evtName(e) eps E /\\ trans(g', e, g'') => reachable3(E, g, g'')
  %% }
  %% reachable3 is given by its closure axioms and the induction instance below
";

fn check_label(l: &str) -> Result<(), FolgenError> {
    if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(FolgenError::Unsupported(format!("label `{l}`")));
    }
    Ok(())
}

fn check_names(t: &FolTheory) -> Result<(), FolgenError> {
    for name in t.signature.ops.keys().chain(t.signature.preds.keys()) {
        if !is_plain(name) && op_name(name) == *name {
            return Err(FolgenError::Unsupported(format!("symbol `{name}`")));
        }
    }
    for n in &t.notes {
        if n.contains('\n') {
            return Err(FolgenError::Unsupported("multi-line note".into()));
        }
    }
    if !is_plain(&t.name) {
        return Err(FolgenError::Unsupported(format!("theory name `{}`", t.name)));
    }
    Ok(())
}

/// The theory as a library: a fixed prelude for numerals and event-name
/// sets, then one specification holding the signature, the axioms grouped by
/// origin and the goals in an `%implies` extension.
pub fn emit_casl(t: &FolTheory, ascii: bool) -> Result<String, FolgenError> {
    check_names(t)?;
    let g = if ascii { &ASCII } else { &UNICODE };
    let sets = t.event_set_names();
    let p = Printer { g, sets: Some(&sets) };
    let mut out = String::new();
    writeln!(out, "library {}_generated", t.name).unwrap();
    out.push('\n');
    out.push_str(PRELUDE);
    writeln!(out, "spec {} =", t.name).unwrap();
    out.push_str("  Nat\nthen EvtNameSet\nthen\n");
    for n in &t.notes {
        writeln!(out, "  %% note: {n}").unwrap();
    }
    if !t.signature.sorts.is_empty() {
        let sorts: Vec<&str> = t.signature.sorts.iter().map(|s| s.name()).collect();
        writeln!(out, "  sorts {}", sorts.join(", ")).unwrap();
    }
    for (name, (args, res)) in &t.signature.ops {
        if args.is_empty() {
            writeln!(out, "  op {} : {res}", op_name(name)).unwrap();
        } else {
            let a: Vec<&str> = args.iter().map(|s| s.name()).collect();
            writeln!(out, "  op {} : {} {} {res}", op_name(name), a.join(&format!(" {} ", g.times)), g.arrow).unwrap();
        }
    }
    for (set, name) in &sets {
        let mut expr = "{}".to_string();
        for e in set.iter().rev() {
            expr = if expr == "{}" { format!("{} + {{}}", evt_name(e)) } else { format!("{} + ({expr})", evt_name(e)) };
        }
        writeln!(out, "  op {name} : EvtNameSet = {expr}").unwrap();
    }
    for (name, args) in &t.signature.preds {
        let a: Vec<&str> = args.iter().map(|s| s.name()).collect();
        let a = if a.is_empty() { "()".to_string() } else { a.join(&format!(" {} ", g.times)) };
        writeln!(out, "  pred {} : {a}", op_name(name)).unwrap();
    }
    if t.signature.preds.contains_key("reachable3") {
        out.push_str(FREE_BLOCK);
    }
    for origin in Origin::ALL {
        let axs: Vec<&Axiom> = t.axioms.iter().filter(|a| a.origin == origin).collect();
        if axs.is_empty() {
            continue;
        }
        writeln!(out, "  %% {}", origin.as_str()).unwrap();
        for a in axs {
            check_label(&a.label)?;
            let mut f = String::new();
            p.formula(&a.formula, &mut f);
            writeln!(out, "  {} {f} %({})%", g.dot, a.label).unwrap();
        }
    }
    if !t.goals.is_empty() {
        out.push_str("then %implies\n");
        for (label, goal) in &t.goals {
            check_label(label)?;
            let mut f = String::new();
            p.formula(goal, &mut f);
            writeln!(out, "  {} {f} %({label})%", g.dot).unwrap();
        }
    }
    out.push_str("end\n");
    Ok(out)
}

struct FormulaReader<'a> {
    cur: Cursor,
    sets: &'a BTreeMap<String, BTreeSet<String>>,
    scope: Vec<String>,
}

fn tok_sym(t: Option<&Tok>) -> Option<&'static str> {
    match t {
        Some(Tok::Sym(s)) => Some(s),
        _ => None,
    }
}

impl FormulaReader<'_> {
    fn formula(&mut self) -> Result<FolFormula, FolgenError> {
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        let lhs = self.disjunctive()?;
        if self.cur.eat_sym("=>") || self.cur.eat_sym("⇒") {
            let rhs = self.operand_loose()?;
            return Ok(FolFormula::implies(lhs, rhs));
        }
        if self.cur.eat_sym("<=>") || self.cur.eat_sym("⇔") {
            let rhs = self.operand_loose()?;
            return Ok(FolFormula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn operand_loose(&mut self) -> Result<FolFormula, FolgenError> {
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        self.disjunctive()
    }

    fn quantifier(&mut self) -> Result<Option<FolFormula>, FolgenError> {
        let forall = self.cur.eat_ident("forall") || self.cur.eat_sym("∀");
        let exists = !forall && (self.cur.eat_ident("exists") || self.cur.eat_sym("∃"));
        if !forall && !exists {
            return Ok(None);
        }
        let vs = self.binder()?;
        if !(self.cur.eat_sym(".") || self.cur.eat_sym("•")) {
            return self.cur.fail("expected `.` after binder");
        }
        let n = self.scope.len();
        self.scope.extend(vs.iter().map(|(v, _)| v.clone()));
        let body = self.formula()?;
        self.scope.truncate(n);
        Ok(Some(if forall { FolFormula::Forall(vs, Box::new(body)) } else { FolFormula::Exists(vs, Box::new(body)) }))
    }

    fn binder(&mut self) -> Result<Vec<(String, Sort)>, FolgenError> {
        let mut out = Vec::new();
        loop {
            let mut names = vec![self.cur.ident()?];
            while self.cur.eat_sym(",") {
                names.push(self.cur.ident()?);
            }
            self.cur.expect_sym(":")?;
            let s = self.cur.ident()?;
            let sort = Sort::from_name(&s).map_or_else(|| self.cur.fail(format!("unknown sort {s}")), Ok)?;
            out.extend(names.into_iter().map(|n| (n, sort)));
            if !self.cur.eat_sym(";") {
                return Ok(out);
            }
        }
    }

    fn disjunctive(&mut self) -> Result<FolFormula, FolgenError> {
        let mut f = self.unary()?;
        loop {
            if self.cur.eat_sym("/\\") || self.cur.eat_sym("∧") {
                f = FolFormula::and(f, self.unary()?);
            } else if self.cur.eat_sym("\\/") || self.cur.eat_sym("∨") {
                f = FolFormula::or(f, self.unary()?);
            } else {
                return Ok(f);
            }
        }
    }

    fn unary(&mut self) -> Result<FolFormula, FolgenError> {
        if self.cur.eat_ident("not") || self.cur.eat_sym("¬") {
            return Ok(FolFormula::not(self.unary()?));
        }
        if self.cur.at_sym("(") {
            let save = self.cur.pos();
            if let Ok(a) = self.atom() {
                return Ok(a);
            }
            self.cur.reset(save);
            self.cur.expect_sym("(")?;
            let f = self.formula()?;
            self.cur.expect_sym(")")?;
            return Ok(f);
        }
        if self.cur.eat_ident("true") {
            return Ok(FolFormula::True);
        }
        if self.cur.eat_ident("false") {
            return Ok(FolFormula::False);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<FolFormula, FolgenError> {
        let lhs = self.term()?;
        let op = tok_sym(self.cur.peek());
        let pred = match op {
            Some("=") => {
                self.cur.bump();
                return Ok(FolFormula::Eq(lhs, self.term()?));
            }
            Some("≤") => Some("<="),
            Some("≥") => Some(">="),
            Some(s) if NAT_PREDS.contains(&s) => Some(s),
            _ => None,
        };
        if let Some(p) = pred {
            self.cur.bump();
            return Ok(FolFormula::pred(p, vec![lhs, self.term()?]));
        }
        match lhs {
            FolTerm::App(p, args) => Ok(FolFormula::Pred(p, args)),
            _ => self.cur.fail("expected a predicate"),
        }
    }

    fn term(&mut self) -> Result<FolTerm, FolgenError> {
        let a = self.term_atom()?;
        match tok_sym(self.cur.peek()) {
            Some(op @ ("+" | "*")) => {
                self.cur.bump();
                Ok(FolTerm::app(op, vec![a, self.term_atom()?]))
            }
            _ => Ok(a),
        }
    }

    fn term_atom(&mut self) -> Result<FolTerm, FolgenError> {
        match self.cur.bump() {
            Some(Tok::Num(n)) => Ok(FolTerm::Num(n)),
            Some(Tok::Sym("(")) => {
                let t = self.term()?;
                self.cur.expect_sym(")")?;
                Ok(t)
            }
            Some(Tok::Sym("{")) => {
                let mut set = BTreeSet::new();
                if !self.cur.eat_sym("}") {
                    loop {
                        let n = self.cur.ident()?;
                        set.insert(
                            n.strip_prefix("evtName_")
                                .map_or_else(|| self.cur.fail("expected event name"), |e| Ok(e.to_string()))?,
                        );
                        if self.cur.eat_sym("}") {
                            break;
                        }
                        self.cur.expect_sym(",")?;
                    }
                }
                Ok(FolTerm::EventSet(set))
            }
            Some(Tok::Ident(name)) => {
                if self.cur.eat_sym("(") {
                    let mut args = vec![self.term()?];
                    while self.cur.eat_sym(",") {
                        args.push(self.term()?);
                    }
                    self.cur.expect_sym(")")?;
                    return Ok(FolTerm::App(name, args));
                }
                if self.scope.contains(&name) {
                    Ok(FolTerm::Var(name))
                } else if let Some(s) = self.sets.get(&name) {
                    Ok(FolTerm::EventSet(s.clone()))
                } else {
                    Ok(FolTerm::App(name, vec![]))
                }
            }
            _ => {
                self.cur.reset(self.cur.pos() - 1);
                self.cur.fail("expected term")
            }
        }
    }
}

fn read_formula(text: &str, line: usize, sets: &BTreeMap<String, BTreeSet<String>>) -> Result<FolFormula, FolgenError> {
    let toks = tokenize(text, SYMBOLS, line)?;
    let mut r = FormulaReader { cur: Cursor::new(toks, line), sets, scope: Vec::new() };
    let f = r.formula()?;
    if !r.cur.at_end() {
        return r.cur.fail("trailing input");
    }
    Ok(f)
}

fn read_op_name(cur: &mut Cursor) -> Result<String, FolgenError> {
    if cur.eat_ident("__") {
        let s = match cur.bump() {
            Some(Tok::Sym(s)) => s,
            _ => return cur.fail("expected operator symbol"),
        };
        if !cur.eat_ident("__") {
            return cur.fail("expected `__`");
        }
        return Ok(s.to_string());
    }
    cur.ident()
}

fn read_sorts(cur: &mut Cursor) -> Result<Vec<Sort>, FolgenError> {
    let mut out = Vec::new();
    if cur.eat_sym("(") {
        cur.expect_sym(")")?;
        return Ok(out);
    }
    loop {
        let s = cur.ident()?;
        out.push(Sort::from_name(&s).map_or_else(|| cur.fail(format!("unknown sort {s}")), Ok)?);
        if !(cur.eat_sym("*") || cur.eat_sym("×")) {
            return Ok(out);
        }
    }
}

/// `φ %(label)%` split into formula text and label.
fn split_label(body: &str, line: usize) -> Result<(&str, String), FolgenError> {
    let open = body.rfind("%(").ok_or(FolgenError::Parse { line, message: "missing label".into() })?;
    let label =
        body[open + 2..].strip_suffix(")%").ok_or(FolgenError::Parse { line, message: "malformed label".into() })?;
    Ok((body[..open].trim_end(), label.to_string()))
}

/// Reads text produced by [`emit_casl`] back into a theory.
pub fn parse_casl(text: &str) -> Result<FolTheory, FolgenError> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .rposition(|l| l.starts_with("spec "))
        .ok_or(FolgenError::Parse { line: 1, message: "no specification".into() })?;
    let header = lines[start];
    let name = header
        .strip_prefix("spec ")
        .and_then(|r| r.strip_suffix(" ="))
        .ok_or(FolgenError::Parse { line: start + 1, message: "malformed spec header".into() })?
        .to_string();
    let mut t = FolTheory {
        name,
        signature: FolSignature::default(),
        axioms: Vec::new(),
        goals: Vec::new(),
        notes: Vec::new(),
    };
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut origin = None;
    let mut goals = false;
    for (i, raw) in lines.iter().enumerate().skip(start + 1) {
        let line = i + 1;
        let l = raw.trim();
        if let Some(n) = l.strip_prefix("%% note: ") {
            t.notes.push(n.to_string());
        } else if let Some(o) = l.strip_prefix("%% ").and_then(Origin::parse) {
            origin = Some(o);
        } else if l.is_empty()
            || l.starts_with("%%")
            || l == "Nat"
            || l == "then EvtNameSet"
            || l == "then"
            || l == "end"
        {
            continue;
        } else if l == "then %implies" {
            goals = true;
        } else if let Some(rest) = l.strip_prefix("sorts ") {
            for s in rest.split(',') {
                let s = s.trim();
                t.signature.sorts.insert(
                    Sort::from_name(s).ok_or(FolgenError::Parse { line, message: format!("unknown sort {s}") })?,
                );
            }
        } else if let Some(rest) = l.strip_prefix("op ") {
            let mut cur = Cursor::new(tokenize(rest, SYMBOLS, line)?, line);
            let name = read_op_name(&mut cur)?;
            cur.expect_sym(":")?;
            let mut sorts = read_sorts(&mut cur)?;
            if cur.eat_sym("=") {
                let mut set = BTreeSet::new();
                loop {
                    if cur.eat_sym("{") {
                        cur.expect_sym("}")?;
                        break;
                    }
                    cur.eat_sym("(");
                    let e = cur.ident()?;
                    set.insert(
                        e.strip_prefix("evtName_")
                            .map_or_else(|| cur.fail("expected event name"), |e| Ok(e.to_string()))?,
                    );
                    cur.expect_sym("+")?;
                }
                while cur.eat_sym(")") {}
                sets.insert(name, set);
            } else {
                let res = if cur.eat_sym("->") || cur.eat_sym("→") {
                    read_sorts(&mut cur)?.pop().map_or_else(|| cur.fail("missing result sort"), Ok)?
                } else {
                    let r = sorts.pop().map_or_else(|| cur.fail("missing result sort"), Ok)?;
                    if !sorts.is_empty() {
                        return cur.fail("expected `->`");
                    }
                    r
                };
                t.signature.ops.insert(name, (sorts, res));
            }
            if !cur.at_end() {
                return cur.fail("trailing input");
            }
        } else if let Some(rest) = l.strip_prefix("pred ") {
            let mut cur = Cursor::new(tokenize(rest, SYMBOLS, line)?, line);
            let name = read_op_name(&mut cur)?;
            cur.expect_sym(":")?;
            let sorts = read_sorts(&mut cur)?;
            if !cur.at_end() {
                return cur.fail("trailing input");
            }
            t.signature.preds.insert(name, sorts);
        } else if let Some(body) = l.strip_prefix(". ").or_else(|| l.strip_prefix("• ")) {
            let (f, label) = split_label(body, line)?;
            let formula = read_formula(f, line, &sets)?;
            if goals {
                t.goals.push((label, formula));
            } else {
                let origin =
                    origin.ok_or(FolgenError::Parse { line, message: "axiom outside an origin section".into() })?;
                t.axioms.push(Axiom { label, formula, origin });
            }
        } else {
            return Err(FolgenError::Parse { line, message: format!("unexpected line `{l}`") });
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folgen::{machine_theory, simplify_theory};
    use crate::frontend::parse_umlstate;

    fn counter_theory() -> FolTheory {
        let m = parse_umlstate(include_str!("../../fixtures/counter.umlstate")).unwrap();
        simplify_theory(&machine_theory(&m, true).unwrap())
    }

    #[test]
    fn counter_text_has_reference_annotations() {
        let t = counter_theory();
        let text = emit_casl(&t, true).unwrap();
        assert!(text.contains(". forall g : Conf . init(g) => s1 = ctrl(g) /\\ cnt(g) == 0 %(init)%"));
        assert!(text.contains(". forall k : Nat . evtName(evt_inc(k)) = evtName_inc %(evtEqs)%"));
        assert!(text.contains("op allEvts : EvtNameSet = evtName_inc + (evtName_reset + {})"));
        assert!(text.contains("op conf : Ctrl * Nat -> Conf"));
        assert!(text.contains("pred __<=__ : Nat * Nat"));
        assert!(text.contains("%% free {"));
        let uni = emit_casl(&t, false).unwrap();
        assert!(uni.contains("∀ g : Conf • init(g) ⇒ s1 = ctrl(g) ∧ cnt(g) == 0 %(init)%"));
        assert!(text.ends_with("end\n"));
    }

    #[test]
    fn round_trip_both_notations() {
        let t = counter_theory();
        for ascii in [true, false] {
            let text = emit_casl(&t, ascii).unwrap();
            assert_eq!(parse_casl(&text).unwrap(), t);
            assert_eq!(emit_casl(&t, ascii).unwrap(), text);
        }
    }

    #[test]
    fn precedence_and_parentheses() {
        let p = |s: &str| FolFormula::pred(s, vec![]);
        let f = FolFormula::implies(
            FolFormula::and(FolFormula::or(p("a"), p("b")), FolFormula::not(FolFormula::and(p("c"), p("d")))),
            FolFormula::implies(p("e"), FolFormula::forall(vec![("x".into(), Sort::Nat)], p("f"))),
        );
        assert_eq!(formula_ascii(&f), "(a \\/ b) /\\ not (c /\\ d) => (e => (forall x : Nat . f))");
        let sets = BTreeMap::new();
        assert_eq!(read_formula(&formula_ascii(&f), 1, &sets).unwrap(), f);
        let t = FolFormula::pred(
            "<=",
            vec![
                FolTerm::app("+", vec![FolTerm::app("*", vec![FolTerm::var("x"), FolTerm::Num(2)]), FolTerm::Num(1)]),
                FolTerm::Num(3),
            ],
        );
        let wrapped = FolFormula::forall(vec![("x".into(), Sort::Nat)], t);
        assert_eq!(formula_ascii(&wrapped), "forall x : Nat . (x * 2) + 1 <= 3");
        assert_eq!(read_formula(&formula_ascii(&wrapped), 1, &sets).unwrap(), wrapped);
    }

    #[test]
    fn rejects_unprintable_labels() {
        let mut t = counter_theory();
        t.axioms[0].label = "has space".into();
        assert!(matches!(emit_casl(&t, true), Err(FolgenError::Unsupported(_))));
    }
}
