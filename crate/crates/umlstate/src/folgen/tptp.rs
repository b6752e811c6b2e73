//! TPTP first-order form. Sorts become guard predicates `is_<sort>`, event
//! sets become constants defined by membership, numerals become `suc`
//! towers over `zero`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::text::{tokenize, Cursor, Tok};
use super::{evt_name, Axiom, FolFormula, FolSignature, FolTerm, FolTheory, FolgenError, Origin, Sort};

const SYMBOLS: &[&str] =
    &["(", ")", ",", "[", "]", ":", ".", "!", "?", "~", "&", "|", "=>", "<=>", "=", "!=", "$true", "$false"];

const RENAMED: [(&str, &str); 7] =
    [("+", "plus"), ("*", "times"), ("<=", "le"), ("<", "lt"), (">", "gt"), (">=", "ge"), ("==", "eqeq")];

fn out_name(s: &str) -> &str {
    RENAMED.iter().find(|(a, _)| *a == s).map_or(s, |(_, b)| b)
}

fn in_name(s: &str) -> &str {
    RENAMED.iter().find(|(_, b)| *b == s).map_or(s, |(a, _)| a)
}

fn guard(s: Sort) -> String {
    format!("is_{}", s.name().to_lowercase())
}

fn sort_of_guard(p: &str) -> Option<Sort> {
    let rest = p.strip_prefix("is_")?;
    Sort::ALL.into_iter().find(|s| s.name().to_lowercase() == rest)
}

fn lower_word(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_lowercase()) && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn atomic_word(s: &str) -> String {
    if lower_word(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

fn encode_var(v: &str) -> String {
    let mut out = String::from("V");
    for c in v.chars() {
        match c {
            '_' => out.push_str("__"),
            '\'' => out.push_str("_1"),
            c => out.push(c),
        }
    }
    out
}

fn decode_var(v: &str) -> Option<String> {
    let body = v.strip_prefix('V')?;
    let mut out = String::new();
    let mut it = body.chars();
    while let Some(c) = it.next() {
        if c == '_' {
            match it.next() {
                Some('_') => out.push('_'),
                Some('1') => out.push('\''),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

fn guards(vs: &[(String, Sort)]) -> FolFormula {
    FolFormula::conj(vs.iter().map(|(v, s)| FolFormula::pred(&guard(*s), vec![FolTerm::var(v)])))
}

struct Printer<'a> {
    sets: &'a BTreeMap<BTreeSet<String>, String>,
}

impl Printer<'_> {
    fn term(&self, t: &FolTerm, out: &mut String) {
        match t {
            FolTerm::Var(v) => out.push_str(&encode_var(v)),
            FolTerm::Num(n) => {
                for _ in 0..*n {
                    out.push_str("suc(");
                }
                out.push_str("zero");
                for _ in 0..*n {
                    out.push(')');
                }
            }
            FolTerm::App(f, args) => {
                out.push_str(&atomic_word(out_name(f)));
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
            FolTerm::EventSet(s) => out.push_str(&atomic_word(&self.sets[s])),
        }
    }

    fn formula(&self, f: &FolFormula, out: &mut String) {
        match f {
            FolFormula::True => out.push_str("$true"),
            FolFormula::False => out.push_str("$false"),
            FolFormula::Pred(p, args) => self.term(&FolTerm::App(p.clone(), args.clone()), out),
            FolFormula::Eq(a, b) => {
                self.term(a, out);
                out.push_str(" = ");
                self.term(b, out);
            }
            FolFormula::Not(a) => {
                out.push_str("~ ");
                self.unit(a, out);
            }
            FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
                let sym = match f {
                    FolFormula::And(..) => "&",
                    FolFormula::Or(..) => "|",
                    FolFormula::Implies(..) => "=>",
                    _ => "<=>",
                };
                self.unit(a, out);
                write!(out, " {sym} ").unwrap();
                self.unit(b, out);
            }
            FolFormula::Forall(vs, body) | FolFormula::Exists(vs, body) => {
                let (q, inner) = match f {
                    FolFormula::Forall(..) => ("!", FolFormula::implies(guards(vs), (**body).clone())),
                    _ => ("?", FolFormula::and(guards(vs), (**body).clone())),
                };
                let names: Vec<String> = vs.iter().map(|(v, _)| encode_var(v)).collect();
                write!(out, "{q} [{}] : ", names.join(", ")).unwrap();
                self.unit(&inner, out);
            }
        }
    }

    fn unit(&self, f: &FolFormula, out: &mut String) {
        if matches!(
            f,
            FolFormula::And(..)
                | FolFormula::Or(..)
                | FolFormula::Implies(..)
                | FolFormula::Iff(..)
                | FolFormula::Eq(..)
        ) {
            out.push('(');
            self.formula(f, out);
            out.push(')');
        } else {
            self.formula(f, out);
        }
    }

    fn fof(&self, label: &str, role: &str, f: &FolFormula) -> String {
        let mut body = String::new();
        self.formula(f, &mut body);
        format!("fof({}, {role}, {body}).\n", atomic_word(label))
    }
}

fn check(t: &FolTheory) -> Result<(), FolgenError> {
    let taken: BTreeSet<&str> = RENAMED.iter().map(|(_, b)| *b).chain(["zero", "eps"]).collect();
    for name in t.signature.ops.keys().chain(t.signature.preds.keys()) {
        if (taken.contains(name.as_str()) && !(name == "eps" && t.signature.preds.contains_key("eps")))
            || name.starts_with("is_")
        {
            return Err(FolgenError::Unsupported(format!("symbol `{name}` collides with a TPTP encoding name")));
        }
    }
    for n in &t.notes {
        if n.contains('\n') {
            return Err(FolgenError::Unsupported("multi-line note".into()));
        }
    }
    if t.name.contains('\n') {
        return Err(FolgenError::Unsupported("multi-line theory name".into()));
    }
    Ok(())
}

fn sort_axioms(t: &FolTheory, p: &Printer) -> String {
    let mut out = String::from("% sorts\n");
    for s in &t.signature.sorts {
        let f = if *s == Sort::Nat {
            FolFormula::pred(&guard(Sort::Nat), vec![FolTerm::Num(0)])
        } else {
            FolFormula::exists(vec![("X".into(), *s)], FolFormula::True)
        };
        out.push_str(&p.fof(&format!("sort_{}", s.name().to_lowercase()), "axiom", &f));
    }
    out.push_str("% signature\n");
    let mut n = 0;
    let mut next = || {
        n += 1;
        format!("sig_{n}")
    };
    let vars = |args: &[Sort]| -> Vec<(String, Sort)> {
        args.iter().enumerate().map(|(i, s)| (format!("X{}", i + 1), *s)).collect()
    };
    for (name, (args, res)) in &t.signature.ops {
        let vs = vars(args);
        let app = FolTerm::App(name.clone(), vs.iter().map(|(v, _)| FolTerm::var(v)).collect());
        out.push_str(&p.fof(&next(), "axiom", &FolFormula::forall(vs, FolFormula::pred(&guard(*res), vec![app]))));
    }
    for (name, args) in &t.signature.preds {
        let vs = vars(args);
        let atom = FolFormula::Pred(name.clone(), vs.iter().map(|(v, _)| FolTerm::var(v)).collect());
        out.push_str(&p.fof(
            &next(),
            "axiom",
            &FolFormula::forall(vs, FolFormula::or(atom.clone(), FolFormula::not(atom))),
        ));
    }
    out.push_str("% sets\n");
    for (set, name) in p.sets {
        let c = FolTerm::EventSet(set.clone());
        let member = FolFormula::pred("eps", vec![FolTerm::var("X"), c.clone()]);
        let def = if set.is_empty() {
            FolFormula::not(member)
        } else {
            FolFormula::iff(
                member,
                FolFormula::disj(
                    set.iter().map(|e| FolFormula::eq(FolTerm::var("X"), FolTerm::constant(&evt_name(e)))),
                ),
            )
        };
        let f = FolFormula::and(
            FolFormula::pred(&guard(Sort::EvtNameSet), vec![c]),
            FolFormula::forall(vec![("X".into(), Sort::EvtName)], def),
        );
        out.push_str(&p.fof(&format!("set_{name}"), "axiom", &f));
    }
    out
}

fn header(t: &FolTheory) -> String {
    let mut out = format!("% theory: {}\n", t.name);
    for n in &t.notes {
        writeln!(out, "% note: {n}").unwrap();
    }
    out
}

fn axiom_sections(t: &FolTheory, p: &Printer) -> String {
    let mut out = sort_axioms(t, p);
    for origin in Origin::ALL {
        let axs: Vec<&Axiom> = t.axioms.iter().filter(|a| a.origin == origin).collect();
        if axs.is_empty() {
            continue;
        }
        writeln!(out, "% {}", origin.as_str()).unwrap();
        for a in axs {
            out.push_str(&p.fof(&a.label, "axiom", &a.formula));
        }
    }
    out
}

/// Axioms and all goals in one problem.
pub fn emit_tptp(t: &FolTheory) -> Result<String, FolgenError> {
    check(t)?;
    let sets = t.event_set_names();
    let p = Printer { sets: &sets };
    let mut out = header(t);
    out.push_str(&axiom_sections(t, &p));
    if !t.goals.is_empty() {
        out.push_str("% goals\n");
        for (label, g) in &t.goals {
            out.push_str(&p.fof(label, "conjecture", g));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TptpFiles {
    pub axioms: String,
    /// One problem per goal, in goal order: an include of the axiom file,
    /// the earlier goals as lemmas and the goal as conjecture.
    pub goals: Vec<(String, String)>,
}

pub fn emit_tptp_split(t: &FolTheory, axiom_file: &str) -> Result<TptpFiles, FolgenError> {
    check(t)?;
    let sets = t.event_set_names();
    let p = Printer { sets: &sets };
    let mut axioms = header(t);
    axioms.push_str(&axiom_sections(t, &p));
    let mut goals = Vec::new();
    for (i, (label, g)) in t.goals.iter().enumerate() {
        let mut text = format!("% goal {label} of {}\ninclude('{axiom_file}').\n", t.name);
        if i > 0 {
            text.push_str("% earlier goals\n");
            for (l, f) in &t.goals[..i] {
                text.push_str(&p.fof(l, "axiom", f));
            }
        }
        text.push_str("% goal\n");
        text.push_str(&p.fof(label, "conjecture", g));
        goals.push((label.clone(), text));
    }
    Ok(TptpFiles { axioms, goals })
}

struct Reader<'a> {
    cur: Cursor,
    sets: &'a BTreeMap<String, BTreeSet<String>>,
}

impl Reader<'_> {
    fn formula(&mut self) -> Result<FolFormula, FolgenError> {
        let lhs = self.unit()?;
        for (sym, k) in [("&", 0), ("|", 1), ("=>", 2), ("<=>", 3)] {
            if self.cur.at_sym(sym) {
                let mut f = lhs;
                while self.cur.eat_sym(sym) {
                    let rhs = self.unit()?;
                    f = match k {
                        0 => FolFormula::and(f, rhs),
                        1 => FolFormula::or(f, rhs),
                        2 => FolFormula::implies(f, rhs),
                        _ => FolFormula::iff(f, rhs),
                    };
                }
                return Ok(f);
            }
        }
        Ok(lhs)
    }

    fn unit(&mut self) -> Result<FolFormula, FolgenError> {
        if self.cur.eat_sym("(") {
            let f = self.formula()?;
            self.cur.expect_sym(")")?;
            return Ok(f);
        }
        if self.cur.eat_sym("~") {
            return Ok(FolFormula::not(self.unit()?));
        }
        if self.cur.eat_sym("$true") {
            return Ok(FolFormula::True);
        }
        if self.cur.eat_sym("$false") {
            return Ok(FolFormula::False);
        }
        let forall = self.cur.eat_sym("!");
        if forall || self.cur.eat_sym("?") {
            self.cur.expect_sym("[")?;
            let mut names = vec![self.var()?];
            while self.cur.eat_sym(",") {
                names.push(self.var()?);
            }
            self.cur.expect_sym("]")?;
            self.cur.expect_sym(":")?;
            let body = self.unit()?;
            return self.unguard(forall, names, body);
        }
        let lhs = self.term()?;
        if self.cur.eat_sym("=") {
            return Ok(FolFormula::Eq(lhs, self.term()?));
        }
        if self.cur.eat_sym("!=") {
            return Ok(FolFormula::not(FolFormula::Eq(lhs, self.term()?)));
        }
        match lhs {
            FolTerm::App(p, args) => Ok(FolFormula::Pred(p, args)),
            _ => self.cur.fail("expected a predicate"),
        }
    }

    /// Recovers the sorts of `names` from the guard conjunction.
    fn unguard(&self, forall: bool, names: Vec<String>, body: FolFormula) -> Result<FolFormula, FolgenError> {
        let (g, rest) = match (&body, forall) {
            (FolFormula::Implies(g, r), true) | (FolFormula::And(g, r), false) => (g, r),
            _ => return self.cur.fail("quantifier without sort guards"),
        };
        let mut atoms = Vec::new();
        let mut stack = vec![&**g];
        // Guards are left-nested, so the rightmost conjunct is the last variable.
        while let Some(f) = stack.pop() {
            match f {
                FolFormula::And(a, b) if atoms.len() + 1 < names.len() => {
                    atoms.push(&**b);
                    stack.push(a);
                }
                other => atoms.push(other),
            }
        }
        atoms.reverse();
        if atoms.len() != names.len() {
            return self.cur.fail("guard count does not match binder");
        }
        let mut vs = Vec::new();
        for (name, atom) in names.into_iter().zip(atoms) {
            match atom {
                FolFormula::Pred(p, args) if args == &vec![FolTerm::Var(name.clone())] => match sort_of_guard(p) {
                    Some(s) => vs.push((name, s)),
                    None => return self.cur.fail(format!("unknown guard {p}")),
                },
                _ => return self.cur.fail("malformed sort guard"),
            }
        }
        Ok(if forall { FolFormula::Forall(vs, rest.clone()) } else { FolFormula::Exists(vs, rest.clone()) })
    }

    fn var(&mut self) -> Result<String, FolgenError> {
        let v = self.cur.ident()?;
        decode_var(&v).map_or_else(|| self.cur.fail(format!("malformed variable {v}")), Ok)
    }

    fn term(&mut self) -> Result<FolTerm, FolgenError> {
        let name = match self.cur.bump() {
            Some(Tok::Ident(s)) if s.starts_with(|c: char| c.is_ascii_uppercase()) => {
                return decode_var(&s)
                    .map(FolTerm::Var)
                    .map_or_else(|| self.cur.fail(format!("malformed variable {s}")), Ok);
            }
            Some(Tok::Ident(s)) | Some(Tok::Quoted(s)) => s,
            _ => return self.cur.fail("expected term"),
        };
        let mut args = Vec::new();
        if self.cur.eat_sym("(") {
            args.push(self.term()?);
            while self.cur.eat_sym(",") {
                args.push(self.term()?);
            }
            self.cur.expect_sym(")")?;
        }
        Ok(match (name.as_str(), args.as_slice()) {
            ("zero", []) => FolTerm::Num(0),
            ("suc", [FolTerm::Num(n)]) => FolTerm::Num(n + 1),
            (s, []) if self.sets.contains_key(s) => FolTerm::EventSet(self.sets[s].clone()),
            _ => FolTerm::App(in_name(&name).to_string(), args),
        })
    }
}

fn read_fof(
    line: &str,
    n: usize,
    sets: &BTreeMap<String, BTreeSet<String>>,
) -> Result<(String, String, FolFormula), FolgenError> {
    let mut r = Reader { cur: Cursor::new(tokenize(line, SYMBOLS, n)?, n), sets };
    if !r.cur.eat_ident("fof") {
        return r.cur.fail("expected fof");
    }
    r.cur.expect_sym("(")?;
    let label = r.cur.name()?;
    r.cur.expect_sym(",")?;
    let role = r.cur.ident()?;
    r.cur.expect_sym(",")?;
    let f = r.formula()?;
    r.cur.expect_sym(")")?;
    r.cur.expect_sym(".")?;
    if !r.cur.at_end() {
        return r.cur.fail("trailing input");
    }
    Ok((label, role, f))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Sorts,
    Signature,
    Sets,
    Axioms(Origin),
    Lemmas,
    Goals,
}

fn read_into(text: &str, t: &mut FolTheory, sets: &mut BTreeMap<String, BTreeSet<String>>) -> Result<(), FolgenError> {
    let mut section = Section::None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.trim();
        let perr = |message: String| FolgenError::Parse { line: n, message };
        if l.is_empty() || l.starts_with("include(") {
            continue;
        }
        if let Some(c) = l.strip_prefix('%') {
            let c = c.trim();
            if let Some(name) = c.strip_prefix("theory: ") {
                t.name = name.to_string();
            } else if let Some(note) = c.strip_prefix("note: ") {
                t.notes.push(note.to_string());
            } else {
                section = match c {
                    "sorts" => Section::Sorts,
                    "signature" => Section::Signature,
                    "sets" => Section::Sets,
                    "earlier goals" => Section::Lemmas,
                    "goals" | "goal" => Section::Goals,
                    other => Origin::parse(other).map_or(section, Section::Axioms),
                };
            }
            continue;
        }
        let (label, role, f) = read_fof(l, n, sets)?;
        match section {
            Section::Sorts => {
                let s = match &f {
                    FolFormula::Pred(p, args) if args == &vec![FolTerm::Num(0)] => sort_of_guard(p),
                    FolFormula::Exists(vs, body) if vs.len() == 1 && **body == FolFormula::True => Some(vs[0].1),
                    _ => None,
                };
                t.signature.sorts.insert(s.ok_or_else(|| perr(format!("malformed sort axiom {label}")))?);
            }
            Section::Signature => {
                let (vs, body) = match &f {
                    FolFormula::Forall(vs, b) => (vs.clone(), (**b).clone()),
                    other => (Vec::new(), other.clone()),
                };
                let args: Vec<Sort> = vs.iter().map(|(_, s)| *s).collect();
                match body {
                    FolFormula::Pred(g, a) if a.len() == 1 && sort_of_guard(&g).is_some() => match &a[0] {
                        FolTerm::App(op, _) => {
                            t.signature.ops.insert(op.clone(), (args, sort_of_guard(&g).unwrap()));
                        }
                        _ => return Err(perr(format!("malformed signature axiom {label}"))),
                    },
                    FolFormula::Or(a, _) => match *a {
                        FolFormula::Pred(p, _) => {
                            t.signature.preds.insert(p, args);
                        }
                        _ => return Err(perr(format!("malformed signature axiom {label}"))),
                    },
                    _ => return Err(perr(format!("malformed signature axiom {label}"))),
                }
            }
            Section::Sets => {
                let (name, def) = match &f {
                    FolFormula::And(c, d) => match (&**c, &**d) {
                        (FolFormula::Pred(_, a), FolFormula::Forall(_, def)) if a.len() == 1 => {
                            (a[0].clone(), (**def).clone())
                        }
                        _ => return Err(perr(format!("malformed set axiom {label}"))),
                    },
                    _ => return Err(perr(format!("malformed set axiom {label}"))),
                };
                let name = match name {
                    FolTerm::App(n, a) if a.is_empty() => n,
                    _ => return Err(perr(format!("malformed set axiom {label}"))),
                };
                let mut members = BTreeSet::new();
                if let FolFormula::Iff(_, rhs) = def {
                    rhs.walk(&mut |g| {
                        if let FolFormula::Eq(_, FolTerm::App(e, _)) = g {
                            members.extend(e.strip_prefix("evtName_").map(str::to_string));
                        }
                    });
                }
                sets.insert(name, members);
            }
            Section::Axioms(origin) if role == "axiom" => t.axioms.push(Axiom { label, formula: f, origin }),
            Section::Goals if role == "conjecture" => t.goals.push((label, f)),
            Section::Lemmas => {}
            _ => return Err(perr(format!("unexpected {role} {label}"))),
        }
    }
    Ok(())
}

/// Reads the output of [`emit_tptp`].
pub fn parse_tptp(text: &str) -> Result<FolTheory, FolgenError> {
    let mut t = FolTheory {
        name: String::new(),
        signature: FolSignature::default(),
        axioms: Vec::new(),
        goals: Vec::new(),
        notes: Vec::new(),
    };
    read_into(text, &mut t, &mut BTreeMap::new())?;
    Ok(t)
}

/// Reads the output of [`emit_tptp_split`]; lemma copies of earlier goals
/// are skipped.
pub fn parse_tptp_split(files: &TptpFiles) -> Result<FolTheory, FolgenError> {
    let mut t = FolTheory {
        name: String::new(),
        signature: FolSignature::default(),
        axioms: Vec::new(),
        goals: Vec::new(),
        notes: Vec::new(),
    };
    let mut sets = BTreeMap::new();
    read_into(&files.axioms, &mut t, &mut sets)?;
    for (_, g) in &files.goals {
        read_into(g, &mut t, &mut sets)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folgen::{gen_obligations, machine_theory, simplify_theory, ObligationConfig};
    use crate::frontend::{parse_predicate, parse_umlstate};

    fn counter_obligations() -> FolTheory {
        let m = parse_umlstate(include_str!("../../fixtures/counter.umlstate")).unwrap();
        let t = simplify_theory(&machine_theory(&m, true).unwrap());
        let le4 = parse_predicate("cnt <= 4", &m.attributes, &[]).unwrap();
        let cfg =
            ObligationConfig::from_predicates(&[("s1".into(), le4.clone()), ("s2".into(), le4.clone())], &le4).unwrap();
        gen_obligations(&t, &m, &cfg).unwrap()
    }

    #[test]
    fn variable_names_encode_reversibly() {
        for v in ["g", "g'", "g''", "k_1", "a__b", "x'_'"] {
            let e = encode_var(v);
            assert!(e.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
            assert_eq!(decode_var(&e).as_deref(), Some(v));
        }
    }

    #[test]
    fn counter_problem_shape() {
        let t = counter_obligations();
        let text = emit_tptp(&t).unwrap();
        assert!(text.is_ascii());
        assert!(text.contains(
            "fof(init, axiom, ! [Vg] : (is_conf(Vg) => (init(Vg) => ((s1 = ctrl(Vg)) & eqeq(cnt(Vg), zero))))).\n"
        ));
        assert!(text.contains("fof(set_allEvts, axiom, is_evtnameset(allEvts) & ! [VX] : (is_evtname(VX) => (eps(VX, allEvts) <=> ((VX = evtName_inc) | (VX = evtName_reset)))))."));
        assert!(text.contains("fof('InvarInit', conjecture, "));
        assert_eq!(text.matches(", conjecture, ").count(), 6);
        assert!(text.contains("le(cnt(Vg), suc(suc(suc(suc(zero)))))"));
    }

    #[test]
    fn round_trip_combined_and_split() {
        let t = counter_obligations();
        let text = emit_tptp(&t).unwrap();
        assert_eq!(parse_tptp(&text).unwrap(), t);
        assert_eq!(emit_tptp(&t).unwrap(), text);
        let files = emit_tptp_split(&t, "Counter_axioms.p").unwrap();
        assert_eq!(files.goals.len(), 6);
        assert!(files.goals[2].1.contains("fof('InvarReset', axiom, "));
        assert!(!files.goals[0].1.contains("% earlier goals"));
        assert_eq!(parse_tptp_split(&files).unwrap(), t);
    }

    #[test]
    fn goal_free_theory_has_only_axioms() {
        let m = parse_umlstate(include_str!("../../fixtures/counter.umlstate")).unwrap();
        let t = simplify_theory(&machine_theory(&m, false).unwrap());
        let text = emit_tptp(&t).unwrap();
        assert!(!text.contains("conjecture"));
        assert_eq!(parse_tptp(&text).unwrap(), t);
        assert!(emit_tptp_split(&t, "a.p").unwrap().goals.is_empty());
    }
}
