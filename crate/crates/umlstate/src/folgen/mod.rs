//! First-order encoding: the configuration frame for a signature, the
//! standard translation of hybrid formulae, invariant proof obligations,
//! theory simplification and text emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::datalogic::{CmpOp, DataError, DataTerm, Predicate};
use crate::edhml::{self, EdFormula, EdhmlError};
use crate::eds::EdSignature;
use crate::frontend::StateMachine;

pub mod casl;
pub mod eval;
mod text;
pub mod tptp;

pub use eval::{eval_fol, induced_interpretation, InducedInterpretation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Nat,
    Evt,
    EvtName,
    EvtNameSet,
    Ctrl,
    Conf,
}

impl Sort {
    pub const ALL: [Sort; 6] = [Sort::Conf, Sort::Ctrl, Sort::Evt, Sort::EvtName, Sort::EvtNameSet, Sort::Nat];

    pub fn name(self) -> &'static str {
        match self {
            Sort::Nat => "Nat",
            Sort::Evt => "Evt",
            Sort::EvtName => "EvtName",
            Sort::EvtNameSet => "EvtNameSet",
            Sort::Ctrl => "Ctrl",
            Sort::Conf => "Conf",
        }
    }

    pub fn from_name(s: &str) -> Option<Sort> {
        Sort::ALL.into_iter().find(|x| x.name() == s)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FolTerm {
    Var(String),
    Num(u64),
    App(String, Vec<FolTerm>),
    EventSet(BTreeSet<String>),
}

impl FolTerm {
    pub fn var(s: &str) -> Self {
        FolTerm::Var(s.to_string())
    }

    pub fn app(f: &str, args: Vec<FolTerm>) -> Self {
        FolTerm::App(f.to_string(), args)
    }

    pub fn constant(f: &str) -> Self {
        FolTerm::App(f.to_string(), Vec::new())
    }

    fn free_vars_into(&self, bound: &[String], out: &mut BTreeSet<String>) {
        match self {
            FolTerm::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            FolTerm::App(_, args) => args.iter().for_each(|a| a.free_vars_into(bound, out)),
            FolTerm::Num(_) | FolTerm::EventSet(_) => {}
        }
    }

    fn replace_var(&self, v: &str, by: &FolTerm) -> FolTerm {
        match self {
            FolTerm::Var(x) if x == v => by.clone(),
            FolTerm::App(f, args) => FolTerm::App(f.clone(), args.iter().map(|a| a.replace_var(v, by)).collect()),
            other => other.clone(),
        }
    }

    fn symbols_into(&self, out: &mut BTreeSet<String>) {
        if let FolTerm::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.symbols_into(out));
        }
    }

    fn event_sets_into(&self, out: &mut BTreeSet<BTreeSet<String>>) {
        match self {
            FolTerm::EventSet(s) => {
                out.insert(s.clone());
            }
            FolTerm::App(_, args) => args.iter().for_each(|a| a.event_sets_into(out)),
            _ => {}
        }
    }
}

pub type Binder = Vec<(String, Sort)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FolFormula {
    True,
    False,
    Pred(String, Vec<FolTerm>),
    Eq(FolTerm, FolTerm),
    Not(Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Or(Box<FolFormula>, Box<FolFormula>),
    Implies(Box<FolFormula>, Box<FolFormula>),
    Iff(Box<FolFormula>, Box<FolFormula>),
    Forall(Binder, Box<FolFormula>),
    Exists(Binder, Box<FolFormula>),
}

impl FolFormula {
    pub fn pred(p: &str, args: Vec<FolTerm>) -> Self {
        FolFormula::Pred(p.to_string(), args)
    }

    pub fn eq(a: FolTerm, b: FolTerm) -> Self {
        FolFormula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: FolFormula) -> Self {
        FolFormula::Not(Box::new(f))
    }

    pub fn and(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::Iff(Box::new(a), Box::new(b))
    }

    /// Universal closure over `vars`; the body itself when `vars` is empty.
    pub fn forall(vars: Binder, body: FolFormula) -> Self {
        if vars.is_empty() {
            body
        } else {
            FolFormula::Forall(vars, Box::new(body))
        }
    }

    pub fn exists(vars: Binder, body: FolFormula) -> Self {
        if vars.is_empty() {
            body
        } else {
            FolFormula::Exists(vars, Box::new(body))
        }
    }

    /// Left-nested; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = FolFormula>) -> Self {
        items.into_iter().reduce(FolFormula::and).unwrap_or(FolFormula::True)
    }

    /// Left-nested; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = FolFormula>) -> Self {
        items.into_iter().reduce(FolFormula::or).unwrap_or(FolFormula::False)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            FolFormula::True | FolFormula::False => {}
            FolFormula::Pred(_, args) => args.iter().for_each(|a| a.free_vars_into(bound, out)),
            FolFormula::Eq(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            FolFormula::Not(a) => a.free_vars_into(bound, out),
            FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            FolFormula::Forall(vs, body) | FolFormula::Exists(vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|(v, _)| v.clone()));
                body.free_vars_into(bound, out);
                bound.truncate(n);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Function and constant symbols.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            FolFormula::Pred(_, args) => args.iter().for_each(|a| a.symbols_into(&mut out)),
            FolFormula::Eq(a, b) => {
                a.symbols_into(&mut out);
                b.symbols_into(&mut out);
            }
            _ => {}
        });
        out
    }

    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let FolFormula::Pred(p, _) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn event_sets(&self) -> BTreeSet<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            FolFormula::Pred(_, args) => args.iter().for_each(|a| a.event_sets_into(&mut out)),
            FolFormula::Eq(a, b) => {
                a.event_sets_into(&mut out);
                b.event_sets_into(&mut out);
            }
            _ => {}
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&FolFormula)) {
        f(self);
        match self {
            FolFormula::Not(a) | FolFormula::Forall(_, a) | FolFormula::Exists(_, a) => a.walk(f),
            FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    /// Capture-aware replacement of the free variable `v`.
    pub fn replace_var(&self, v: &str, by: &FolTerm) -> FolFormula {
        let rec = |f: &FolFormula| f.replace_var(v, by);
        match self {
            FolFormula::True | FolFormula::False => self.clone(),
            FolFormula::Pred(p, args) => {
                FolFormula::Pred(p.clone(), args.iter().map(|a| a.replace_var(v, by)).collect())
            }
            FolFormula::Eq(a, b) => FolFormula::Eq(a.replace_var(v, by), b.replace_var(v, by)),
            FolFormula::Not(a) => FolFormula::not(rec(a)),
            FolFormula::And(a, b) => FolFormula::and(rec(a), rec(b)),
            FolFormula::Or(a, b) => FolFormula::or(rec(a), rec(b)),
            FolFormula::Implies(a, b) => FolFormula::implies(rec(a), rec(b)),
            FolFormula::Iff(a, b) => FolFormula::iff(rec(a), rec(b)),
            FolFormula::Forall(vs, body) | FolFormula::Exists(vs, body) => {
                let body = if vs.iter().any(|(x, _)| x == v) { (**body).clone() } else { rec(body) };
                match self {
                    FolFormula::Forall(..) => FolFormula::Forall(vs.clone(), Box::new(body)),
                    _ => FolFormula::Exists(vs.clone(), Box::new(body)),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FolSignature {
    pub sorts: BTreeSet<Sort>,
    pub ops: BTreeMap<String, (Vec<Sort>, Sort)>,
    pub preds: BTreeMap<String, Vec<Sort>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Frame,
    Machine,
    Induction,
    Lemma,
}

impl Origin {
    pub const ALL: [Origin; 4] = [Origin::Frame, Origin::Machine, Origin::Induction, Origin::Lemma];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Frame => "frame",
            Origin::Machine => "machine",
            Origin::Induction => "induction",
            Origin::Lemma => "lemma",
        }
    }

    pub fn parse(s: &str) -> Option<Origin> {
        Origin::ALL.into_iter().find(|o| o.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub label: String,
    pub formula: FolFormula,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolTheory {
    pub name: String,
    pub signature: FolSignature,
    pub axioms: Vec<Axiom>,
    pub goals: Vec<(String, FolFormula)>,
    /// Bookkeeping carried into the emitted text as comments.
    pub notes: Vec<String>,
}

impl FolTheory {
    pub fn axiom(&self, label: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.label == label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.axioms.iter().map(|a| a.label.as_str()).chain(self.goals.iter().map(|(l, _)| l.as_str())).collect()
    }

    /// Event-name sets occurring anywhere, with their constant names:
    /// `allEvts` for the full set, `noEvts` for the empty one, otherwise
    /// `evts_<names>`.
    pub fn event_set_names(&self) -> BTreeMap<BTreeSet<String>, String> {
        let all: BTreeSet<String> = self
            .signature
            .ops
            .iter()
            .filter(|(_, (args, res))| args.is_empty() && *res == Sort::EvtName)
            .filter_map(|(n, _)| n.strip_prefix("evtName_").map(str::to_string))
            .collect();
        let mut sets = BTreeSet::new();
        for f in self.axioms.iter().map(|a| &a.formula).chain(self.goals.iter().map(|(_, g)| g)) {
            sets.extend(f.event_sets());
        }
        let mut used: BTreeSet<String> = self.signature.ops.keys().cloned().collect();
        let mut out = BTreeMap::new();
        for s in sets {
            let base = if s == all {
                "allEvts".to_string()
            } else if s.is_empty() {
                "noEvts".to_string()
            } else {
                format!("evts_{}", s.iter().cloned().collect::<Vec<_>>().join("_"))
            };
            let name = fresh_name(&base, &used);
            used.insert(name.clone());
            out.insert(s, name);
        }
        out
    }

    fn fresh_label(&self, base: &str) -> String {
        let used: BTreeSet<String> = self.labels().into_iter().map(str::to_string).collect();
        fresh_name(base, &used)
    }
}

/// `base`, or `base_1`, `base_2`, … if taken.
pub(crate) fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}_{i}")).find(|n| !used.contains(n)).unwrap()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FolgenError {
    #[error("signature has no events")]
    EmptyEvents,
    #[error("name `{0}` clashes with a frame symbol")]
    NameClash(String),
    #[error("unbound state variable {0}")]
    UnboundStateVar(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("formula has unexpected free variables: {0}")]
    FreeVariables(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Edhml(#[from] EdhmlError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("empty carrier for sort {0}")]
    EmptyCarrier(Sort),
    #[error("cannot emit: {0}")]
    Unsupported(String),
}

/// Symbols of the frame that attributes, events and states must not shadow.
pub const RESERVED: &[&str] = &[
    "conf",
    "ctrl",
    "evtName",
    "init",
    "trans",
    "reachable",
    "reachable2",
    "reachable3",
    "eps",
    "suc",
    "invar",
    "allEvts",
    "noEvts",
];

pub(crate) fn evt_ctor(e: &str) -> String {
    format!("evt_{e}")
}

pub(crate) fn evt_name(e: &str) -> String {
    format!("evtName_{e}")
}

fn nat_vars(names: &[&str]) -> Binder {
    names.iter().map(|n| (n.to_string(), Sort::Nat)).collect()
}

fn v(s: &str) -> FolTerm {
    FolTerm::var(s)
}

fn app(f: &str, args: Vec<FolTerm>) -> FolTerm {
    FolTerm::app(f, args)
}

fn nat_pred(op: &str, a: FolTerm, b: FolTerm) -> FolFormula {
    FolFormula::pred(op, vec![a, b])
}

fn nat_axioms() -> Vec<(String, FolFormula)> {
    let (n, m) = (v("n"), v("m"));
    let (r, s, t) = (v("r"), v("s"), v("t"));
    let suc = |x: FolTerm| app("suc", vec![x]);
    let plus = |a: FolTerm, b: FolTerm| app("+", vec![a, b]);
    let times = |a: FolTerm, b: FolTerm| app("*", vec![a, b]);
    let nm = || nat_vars(&["n", "m"]);
    let rst = || nat_vars(&["r", "s", "t"]);
    let ax = |l: &str, f: FolFormula| (l.to_string(), f);
    vec![
        ax(
            "nat_zero_suc",
            FolFormula::forall(nat_vars(&["n"]), FolFormula::not(FolFormula::eq(FolTerm::Num(0), suc(n.clone())))),
        ),
        ax(
            "nat_suc_inj",
            FolFormula::forall(
                nm(),
                FolFormula::iff(FolFormula::eq(suc(m.clone()), suc(n.clone())), FolFormula::eq(m.clone(), n.clone())),
            ),
        ),
        ax(
            "nat_add_zero",
            FolFormula::forall(nat_vars(&["n"]), FolFormula::eq(plus(FolTerm::Num(0), n.clone()), n.clone())),
        ),
        ax(
            "nat_add_suc",
            FolFormula::forall(nm(), FolFormula::eq(plus(suc(n.clone()), m.clone()), suc(plus(n.clone(), m.clone())))),
        ),
        ax(
            "nat_mul_zero",
            FolFormula::forall(nat_vars(&["n"]), FolFormula::eq(times(FolTerm::Num(0), n.clone()), FolTerm::Num(0))),
        ),
        ax(
            "nat_mul_suc",
            FolFormula::forall(
                nm(),
                FolFormula::eq(times(suc(n.clone()), m.clone()), plus(m.clone(), times(n.clone(), m.clone()))),
            ),
        ),
        ax("nat_le_zero", FolFormula::forall(nat_vars(&["n"]), nat_pred("<=", FolTerm::Num(0), n.clone()))),
        ax(
            "nat_le_suc_zero",
            FolFormula::forall(nat_vars(&["n"]), FolFormula::not(nat_pred("<=", suc(n.clone()), FolTerm::Num(0)))),
        ),
        ax(
            "nat_le_suc",
            FolFormula::forall(
                nm(),
                FolFormula::iff(nat_pred("<=", suc(m.clone()), suc(n.clone())), nat_pred("<=", m.clone(), n.clone())),
            ),
        ),
        ax(
            "nat_ge",
            FolFormula::forall(
                nm(),
                FolFormula::iff(nat_pred(">=", m.clone(), n.clone()), nat_pred("<=", n.clone(), m.clone())),
            ),
        ),
        ax(
            "nat_lt",
            FolFormula::forall(
                nm(),
                FolFormula::iff(
                    nat_pred("<", m.clone(), n.clone()),
                    FolFormula::and(
                        nat_pred("<=", m.clone(), n.clone()),
                        FolFormula::not(FolFormula::eq(m.clone(), n.clone())),
                    ),
                ),
            ),
        ),
        ax(
            "nat_gt",
            FolFormula::forall(
                nm(),
                FolFormula::iff(nat_pred(">", m.clone(), n.clone()), nat_pred("<", n.clone(), m.clone())),
            ),
        ),
        ax(
            "nat_eqeq",
            FolFormula::forall(
                nm(),
                FolFormula::iff(nat_pred("==", m.clone(), n.clone()), FolFormula::eq(m.clone(), n.clone())),
            ),
        ),
        ax(
            "nat_add_assoc",
            FolFormula::forall(
                rst(),
                FolFormula::eq(
                    plus(plus(r.clone(), s.clone()), t.clone()),
                    plus(r.clone(), plus(s.clone(), t.clone())),
                ),
            ),
        ),
        ax(
            "nat_add_comm",
            FolFormula::forall(
                nat_vars(&["r", "s"]),
                FolFormula::eq(plus(r.clone(), s.clone()), plus(s.clone(), r.clone())),
            ),
        ),
        ax(
            "nat_mul_assoc",
            FolFormula::forall(
                rst(),
                FolFormula::eq(
                    times(times(r.clone(), s.clone()), t.clone()),
                    times(r.clone(), times(s.clone(), t.clone())),
                ),
            ),
        ),
        ax(
            "nat_mul_comm",
            FolFormula::forall(
                nat_vars(&["r", "s"]),
                FolFormula::eq(times(r.clone(), s.clone()), times(s.clone(), r.clone())),
            ),
        ),
        ax(
            "nat_distr_right",
            FolFormula::forall(
                rst(),
                FolFormula::eq(
                    times(plus(r.clone(), s.clone()), t.clone()),
                    plus(times(r.clone(), t.clone()), times(s.clone(), t.clone())),
                ),
            ),
        ),
        ax(
            "nat_distr_left",
            FolFormula::forall(
                rst(),
                FolFormula::eq(
                    times(t.clone(), plus(r.clone(), s.clone())),
                    plus(times(t.clone(), r.clone()), times(t.clone(), s.clone())),
                ),
            ),
        ),
    ]
}

fn param_vars(n: usize) -> Vec<String> {
    match n {
        1 => vec!["k".to_string()],
        _ => (1..=n).map(|i| format!("k{i}")).collect(),
    }
}

/// The configuration frame for `sigma`: natural numbers, events and event
/// names as free types, configurations with one selector per attribute,
/// initial configurations and loose reachability.
pub fn nu_sig(sigma: &EdSignature) -> Result<FolTheory, FolgenError> {
    if sigma.events.is_empty() {
        return Err(FolgenError::EmptyEvents);
    }
    for name in sigma.attributes.iter().chain(sigma.events.iter().map(|(e, _)| e)) {
        if RESERVED.contains(&name.as_str()) {
            return Err(FolgenError::NameClash(name.clone()));
        }
    }
    let mut sig = FolSignature { sorts: Sort::ALL.into_iter().collect(), ..Default::default() };
    let nat2 = vec![Sort::Nat, Sort::Nat];
    sig.ops.insert("+".into(), (nat2.clone(), Sort::Nat));
    sig.ops.insert("*".into(), (nat2.clone(), Sort::Nat));
    sig.ops.insert("suc".into(), (vec![Sort::Nat], Sort::Nat));
    for p in ["<=", "<", ">", ">=", "=="] {
        sig.preds.insert(p.into(), nat2.clone());
    }
    for (e, params) in &sigma.events {
        sig.ops.insert(evt_ctor(e), (vec![Sort::Nat; params.len()], Sort::Evt));
        sig.ops.insert(evt_name(e), (vec![], Sort::EvtName));
    }
    sig.ops.insert("evtName".into(), (vec![Sort::Evt], Sort::EvtName));
    let mut conf_args = vec![Sort::Ctrl];
    conf_args.extend(sigma.attributes.iter().map(|_| Sort::Nat));
    sig.ops.insert("conf".into(), (conf_args, Sort::Conf));
    sig.ops.insert("ctrl".into(), (vec![Sort::Conf], Sort::Ctrl));
    for a in &sigma.attributes {
        sig.ops.insert(a.clone(), (vec![Sort::Conf], Sort::Nat));
    }
    sig.preds.insert("eps".into(), vec![Sort::EvtName, Sort::EvtNameSet]);
    sig.preds.insert("init".into(), vec![Sort::Conf]);
    sig.preds.insert("trans".into(), vec![Sort::Conf, Sort::Evt, Sort::Conf]);
    sig.preds.insert("reachable3".into(), vec![Sort::EvtNameSet, Sort::Conf, Sort::Conf]);
    sig.preds.insert("reachable2".into(), vec![Sort::EvtNameSet, Sort::Conf]);
    sig.preds.insert("reachable".into(), vec![Sort::Conf]);

    let mut axioms: Vec<(String, FolFormula)> = nat_axioms();
    let evt = |e: &str, args: Vec<FolTerm>| app(&evt_ctor(e), args);
    let ks =
        |n: usize, prefix: &str| -> Vec<String> { param_vars(n).into_iter().map(|k| format!("{prefix}{k}")).collect() };

    // Evt ::= evt_e(Nat^n) | …
    let shapes: Vec<FolFormula> = sigma
        .events
        .iter()
        .map(|(e, p)| {
            let vars = ks(p.len(), "");
            FolFormula::exists(
                nat_vars(&vars.iter().map(String::as_str).collect::<Vec<_>>()),
                FolFormula::eq(v("e"), evt(e, vars.iter().map(|k| v(k)).collect())),
            )
        })
        .collect();
    axioms.push(("evt_exhaustive".into(), FolFormula::forall(vec![("e".into(), Sort::Evt)], FolFormula::disj(shapes))));
    for (i, (a, pa)) in sigma.events.iter().enumerate() {
        for (b, pb) in &sigma.events[i + 1..] {
            let va = ks(pa.len(), "");
            let vb = ks(pb.len(), "l");
            let mut binder = nat_vars(&va.iter().map(String::as_str).collect::<Vec<_>>());
            binder.extend(nat_vars(&vb.iter().map(String::as_str).collect::<Vec<_>>()));
            axioms.push((
                format!("evt_distinct_{a}_{b}"),
                FolFormula::forall(
                    binder,
                    FolFormula::not(FolFormula::eq(
                        evt(a, va.iter().map(|k| v(k)).collect()),
                        evt(b, vb.iter().map(|k| v(k)).collect()),
                    )),
                ),
            ));
        }
    }
    for (e, p) in sigma.events.iter().filter(|(_, p)| !p.is_empty()) {
        let va = ks(p.len(), "");
        let vb = ks(p.len(), "l");
        let mut binder = nat_vars(&va.iter().map(String::as_str).collect::<Vec<_>>());
        binder.extend(nat_vars(&vb.iter().map(String::as_str).collect::<Vec<_>>()));
        axioms.push((
            format!("evt_inj_{e}"),
            FolFormula::forall(
                binder,
                FolFormula::iff(
                    FolFormula::eq(
                        evt(e, va.iter().map(|k| v(k)).collect()),
                        evt(e, vb.iter().map(|k| v(k)).collect()),
                    ),
                    FolFormula::conj(va.iter().zip(&vb).map(|(a, b)| FolFormula::eq(v(a), v(b)))),
                ),
            ),
        ));
    }
    // EvtName ::= evtName_e | …
    axioms.push((
        "evtName_exhaustive".into(),
        FolFormula::forall(
            vec![("n".into(), Sort::EvtName)],
            FolFormula::disj(sigma.events.iter().map(|(e, _)| FolFormula::eq(v("n"), FolTerm::constant(&evt_name(e))))),
        ),
    ));
    for (i, (a, _)) in sigma.events.iter().enumerate() {
        for (b, _) in &sigma.events[i + 1..] {
            axioms.push((
                format!("evtName_distinct_{a}_{b}"),
                FolFormula::not(FolFormula::eq(FolTerm::constant(&evt_name(a)), FolTerm::constant(&evt_name(b)))),
            ));
        }
    }
    let mut eqs_label = "evtEqs".to_string();
    for (i, (e, p)) in sigma.events.iter().enumerate() {
        let vars = ks(p.len(), "");
        axioms.push((
            eqs_label.clone(),
            FolFormula::forall(
                nat_vars(&vars.iter().map(String::as_str).collect::<Vec<_>>()),
                FolFormula::eq(
                    app("evtName", vec![evt(e, vars.iter().map(|k| v(k)).collect())]),
                    FolTerm::constant(&evt_name(e)),
                ),
            ),
        ));
        eqs_label = format!("evtEqs_{}", i + 1);
    }
    // Conf ::= conf(ctrl : Ctrl; a : Nat; …)
    let attr_vars: Vec<String> = (1..=sigma.attributes.len()).map(|i| format!("k{i}")).collect();
    let attr_vars2: Vec<String> = (1..=sigma.attributes.len()).map(|i| format!("l{i}")).collect();
    let conf = |c: &str, ks: &[String]| {
        let mut args = vec![v(c)];
        args.extend(ks.iter().map(|k| v(k)));
        app("conf", args)
    };
    let mut ck: Binder = vec![("c".into(), Sort::Ctrl)];
    ck.extend(attr_vars.iter().map(|k| (k.clone(), Sort::Nat)));
    axioms.push((
        "conf_exhaustive".into(),
        FolFormula::forall(
            vec![("g".into(), Sort::Conf)],
            FolFormula::exists(ck.clone(), FolFormula::eq(v("g"), conf("c", &attr_vars))),
        ),
    ));
    let mut ckdl = ck.clone();
    ckdl.push(("d".into(), Sort::Ctrl));
    ckdl.extend(attr_vars2.iter().map(|k| (k.clone(), Sort::Nat)));
    let mut same = vec![FolFormula::eq(v("c"), v("d"))];
    same.extend(attr_vars.iter().zip(&attr_vars2).map(|(a, b)| FolFormula::eq(v(a), v(b))));
    axioms.push((
        "conf_inj".into(),
        FolFormula::forall(
            ckdl,
            FolFormula::iff(FolFormula::eq(conf("c", &attr_vars), conf("d", &attr_vars2)), FolFormula::conj(same)),
        ),
    ));
    axioms.push((
        "conf_sel_ctrl".into(),
        FolFormula::forall(ck.clone(), FolFormula::eq(app("ctrl", vec![conf("c", &attr_vars)]), v("c"))),
    ));
    for (a, k) in sigma.attributes.iter().zip(&attr_vars) {
        axioms.push((
            format!("conf_sel_{a}"),
            FolFormula::forall(ck.clone(), FolFormula::eq(app(a, vec![conf("c", &attr_vars)]), v(k))),
        ));
    }
    // Initial configurations and reachability.
    let g = || ("g".to_string(), Sort::Conf);
    let g1 = || ("g'".to_string(), Sort::Conf);
    let init = |x: &str| FolFormula::pred("init", vec![v(x)]);
    axioms.push(("init_exists".into(), FolFormula::exists(vec![g()], init("g"))));
    axioms.push((
        "init_single".into(),
        FolFormula::forall(
            vec![g(), g1()],
            FolFormula::implies(
                FolFormula::and(init("g"), init("g'")),
                FolFormula::eq(app("ctrl", vec![v("g")]), app("ctrl", vec![v("g'")])),
            ),
        ),
    ));
    let es = || ("E".to_string(), Sort::EvtNameSet);
    axioms.push((
        "reach_refl".into(),
        FolFormula::forall(vec![es(), g()], FolFormula::pred("reachable3", vec![v("E"), v("g"), v("g")])),
    ));
    axioms.push((
        "reach_step".into(),
        FolFormula::forall(
            vec![es(), g(), g1(), ("g''".into(), Sort::Conf), ("e".into(), Sort::Evt)],
            FolFormula::implies(
                FolFormula::conj([
                    FolFormula::pred("reachable3", vec![v("E"), v("g"), v("g'")]),
                    FolFormula::pred("eps", vec![app("evtName", vec![v("e")]), v("E")]),
                    FolFormula::pred("trans", vec![v("g'"), v("e"), v("g''")]),
                ]),
                FolFormula::pred("reachable3", vec![v("E"), v("g"), v("g''")]),
            ),
        ),
    ));
    axioms.push((
        "reach2_def".into(),
        FolFormula::forall(
            vec![es(), g()],
            FolFormula::iff(
                FolFormula::pred("reachable2", vec![v("E"), v("g")]),
                FolFormula::exists(
                    vec![("g0".into(), Sort::Conf)],
                    FolFormula::and(init("g0"), FolFormula::pred("reachable3", vec![v("E"), v("g0"), v("g")])),
                ),
            ),
        ),
    ));
    axioms.push((
        "reach1_def".into(),
        FolFormula::forall(
            vec![g()],
            FolFormula::iff(
                FolFormula::pred("reachable", vec![v("g")]),
                FolFormula::pred("reachable2", vec![FolTerm::EventSet(sigma.event_names()), v("g")]),
            ),
        ),
    ));
    Ok(FolTheory {
        name: "Trans".into(),
        signature: sig,
        axioms: axioms.into_iter().map(|(label, formula)| Axiom { label, formula, origin: Origin::Frame }).collect(),
        goals: Vec::new(),
        notes: Vec::new(),
    })
}

fn data_term(t: &DataTerm, pre: &str, post: Option<&str>) -> Result<FolTerm, FolgenError> {
    Ok(match t {
        DataTerm::Zero => FolTerm::Num(0),
        DataTerm::Num(n) => FolTerm::Num(*n),
        DataTerm::Suc(a) => match data_term(a, pre, post)? {
            FolTerm::Num(n) => FolTerm::Num(n.checked_add(1).ok_or(DataError::Overflow)?),
            other => app("suc", vec![other]),
        },
        DataTerm::Attr { name, primed: false } => app(name, vec![v(pre)]),
        DataTerm::Attr { name, primed: true } => {
            app(name, vec![v(post.ok_or_else(|| DataError::MissingPostState(name.clone()))?)])
        }
        DataTerm::Var(x) => v(x),
        DataTerm::Add(a, b) => app("+", vec![data_term(a, pre, post)?, data_term(b, pre, post)?]),
        DataTerm::Mul(a, b) => app("*", vec![data_term(a, pre, post)?, data_term(b, pre, post)?]),
    })
}

/// A state or transition predicate with attributes read at `pre` and
/// primed attributes at `post`. Data equality becomes the `==` predicate.
pub fn data_formula(p: &Predicate, pre: &str, post: Option<&str>) -> Result<FolFormula, FolgenError> {
    let rec = |q: &Predicate| data_formula(q, pre, post);
    Ok(match p {
        Predicate::True => FolFormula::True,
        Predicate::False => FolFormula::False,
        Predicate::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Eq | CmpOp::EqEq => "==",
                other => other.symbol(),
            };
            nat_pred(sym, data_term(a, pre, post)?, data_term(b, pre, post)?)
        }
        Predicate::Not(a) => FolFormula::not(rec(a)?),
        Predicate::And(a, b) => FolFormula::and(rec(a)?, rec(b)?),
        Predicate::Or(a, b) => FolFormula::or(rec(a)?, rec(b)?),
        Predicate::Implies(a, b) => FolFormula::implies(rec(a)?, rec(b)?),
        Predicate::Iff(a, b) => FolFormula::iff(rec(a)?, rec(b)?),
    })
}

fn reserved_var(name: &str) -> bool {
    name.starts_with('g') && name[1..].chars().all(|c| c == '\'' || c.is_ascii_digit())
}

/// The standard translation at configuration variable `g` with state
/// variables `states` in scope. Each modality steps to `g` with one more
/// prime.
pub fn nu_frm(
    sigma: &EdSignature,
    states: &BTreeSet<String>,
    g: &str,
    rho: &EdFormula,
) -> Result<FolFormula, FolgenError> {
    let next = format!("{g}'");
    let ctrl = |x: &str| app("ctrl", vec![v(x)]);
    let binder = |params: &[String]| -> Result<Binder, FolgenError> {
        for p in params {
            if reserved_var(p) {
                return Err(FolgenError::NameClash(p.clone()));
            }
        }
        Ok(params.iter().map(|p| (p.clone(), Sort::Nat)).collect())
    };
    let trans = |event: &str, params: &[String]| {
        FolFormula::pred("trans", vec![v(g), app(&evt_ctor(event), params.iter().map(|p| v(p)).collect()), v(&next)])
    };
    if let Some((a, b)) = rho.as_and() {
        return Ok(FolFormula::and(nu_frm(sigma, states, g, a)?, nu_frm(sigma, states, g, b)?));
    }
    Ok(match rho {
        EdFormula::Data(p) => data_formula(p, g, None)?,
        EdFormula::StateVar(s) => {
            if !states.contains(s) {
                return Err(FolgenError::UnboundStateVar(s.clone()));
            }
            FolFormula::eq(v(s), ctrl(g))
        }
        EdFormula::Bind(s, body) => {
            if reserved_var(s) {
                return Err(FolgenError::NameClash(s.clone()));
            }
            let mut inner = states.clone();
            inner.insert(s.clone());
            FolFormula::exists(
                vec![(s.clone(), Sort::Ctrl)],
                FolFormula::and(FolFormula::eq(v(s), ctrl(g)), nu_frm(sigma, &inner, g, body)?),
            )
        }
        EdFormula::At(f, s, body) => {
            if !states.contains(s) {
                return Err(FolgenError::UnboundStateVar(s.clone()));
            }
            // The body does not mention the current configuration, so naming restarts.
            let at = "g'";
            FolFormula::forall(
                vec![(at.to_string(), Sort::Conf)],
                FolFormula::implies(
                    FolFormula::and(
                        FolFormula::eq(ctrl(at), v(s)),
                        FolFormula::pred("reachable2", vec![FolTerm::EventSet(f.clone()), v(at)]),
                    ),
                    nu_frm(sigma, states, at, body)?,
                ),
            )
        }
        EdFormula::Box(f, body) => FolFormula::forall(
            vec![(next.clone(), Sort::Conf)],
            FolFormula::implies(
                FolFormula::pred("reachable3", vec![FolTerm::EventSet(f.clone()), v(g), v(&next)]),
                nu_frm(sigma, states, &next, body)?,
            ),
        ),
        EdFormula::Dia { event, params, psi, body } => FolFormula::exists(
            binder(params)?,
            FolFormula::exists(
                vec![(next.clone(), Sort::Conf)],
                FolFormula::and(
                    FolFormula::and(trans(event, params), data_formula(psi, g, Some(&next))?),
                    nu_frm(sigma, states, &next, body)?,
                ),
            ),
        ),
        EdFormula::Wp { event, params, phi, psi, body } => FolFormula::forall(
            binder(params)?,
            FolFormula::implies(
                data_formula(phi, g, None)?,
                FolFormula::exists(
                    vec![(next.clone(), Sort::Conf)],
                    FolFormula::and(
                        FolFormula::and(trans(event, params), data_formula(psi, g, Some(&next))?),
                        nu_frm(sigma, states, &next, body)?,
                    ),
                ),
            ),
        ),
        EdFormula::Not(a) => FolFormula::not(nu_frm(sigma, states, g, a)?),
        EdFormula::Or(a, b) => FolFormula::or(nu_frm(sigma, states, g, a)?, nu_frm(sigma, states, g, b)?),
    })
}

/// `∀g:Conf. init(g) ⇒ ν(ρ)`.
pub fn nu_sen(sigma: &EdSignature, rho: &EdFormula) -> Result<FolFormula, FolgenError> {
    Ok(FolFormula::forall(
        vec![("g".into(), Sort::Conf)],
        FolFormula::implies(FolFormula::pred("init", vec![v("g")]), nu_frm(sigma, &BTreeSet::new(), "g", rho)?),
    ))
}

/// The frame extended by the translated characterising sentence of
/// `machine`, labelled `machine`.
pub fn machine_theory(machine: &StateMachine, complete: bool) -> Result<FolTheory, FolgenError> {
    let sigma = machine.signature();
    for s in &machine.states {
        if RESERVED.contains(&s.as_str()) || sigma.attributes.contains(s) || reserved_var(s) {
            return Err(FolgenError::NameClash(s.clone()));
        }
    }
    let mut t = nu_sig(&sigma)?;
    t.name = machine.name.clone();
    let rho = edhml::characterize(machine, complete)?;
    t.axioms.push(Axiom { label: "machine".into(), formula: nu_sen(&sigma, &rho)?, origin: Origin::Machine });
    Ok(t)
}

// ---------------------------------------------------------------------------
// Simplification

/// Removes every double negation.
pub fn remove_double_negations(f: &FolFormula) -> FolFormula {
    let rec = remove_double_negations;
    match f {
        FolFormula::Not(a) => match &**a {
            FolFormula::Not(b) => rec(b),
            other => FolFormula::not(rec(other)),
        },
        FolFormula::And(a, b) => FolFormula::and(rec(a), rec(b)),
        FolFormula::Or(a, b) => FolFormula::or(rec(a), rec(b)),
        FolFormula::Implies(a, b) => FolFormula::implies(rec(a), rec(b)),
        FolFormula::Iff(a, b) => FolFormula::iff(rec(a), rec(b)),
        FolFormula::Forall(vs, a) => FolFormula::Forall(vs.clone(), Box::new(rec(a))),
        FolFormula::Exists(vs, a) => FolFormula::Exists(vs.clone(), Box::new(rec(a))),
        other => other.clone(),
    }
}

/// Replaces positively occurring `∃s:Ctrl` by fresh constants.
fn skolemize(
    f: &FolFormula,
    positive: bool,
    used: &mut BTreeSet<String>,
    fresh: &mut Vec<(String, String)>,
) -> FolFormula {
    match f {
        FolFormula::Exists(vs, body) if positive && vs.iter().all(|(_, s)| *s == Sort::Ctrl) => {
            let mut out = (**body).clone();
            let mut consts = Vec::new();
            for (x, _) in vs {
                let name = fresh_name(x, used);
                used.insert(name.clone());
                out = out.replace_var(x, &FolTerm::constant(&name));
                consts.push((x.clone(), name));
            }
            fresh.extend(consts);
            skolemize(&out, positive, used, fresh)
        }
        FolFormula::Not(a) => FolFormula::not(skolemize(a, !positive, used, fresh)),
        FolFormula::And(a, b) => {
            let a = skolemize(a, positive, used, fresh);
            FolFormula::and(a, skolemize(b, positive, used, fresh))
        }
        FolFormula::Or(a, b) => {
            let a = skolemize(a, positive, used, fresh);
            FolFormula::or(a, skolemize(b, positive, used, fresh))
        }
        FolFormula::Implies(a, b) => {
            let a = skolemize(a, !positive, used, fresh);
            FolFormula::implies(a, skolemize(b, positive, used, fresh))
        }
        FolFormula::Forall(vs, a) => FolFormula::Forall(vs.clone(), Box::new(skolemize(a, positive, used, fresh))),
        FolFormula::Exists(vs, a) => FolFormula::Exists(vs.clone(), Box::new(skolemize(a, positive, used, fresh))),
        other => other.clone(),
    }
}

fn has_quantifier(f: &FolFormula) -> bool {
    let mut q = false;
    f.walk(&mut |g| q |= matches!(g, FolFormula::Forall(..) | FolFormula::Exists(..)));
    q
}

/// Moves closed quantified conjuncts in positive conjunctive position to
/// separate axioms. Returns the residual, or `None` if nothing remains.
fn hoist(f: &FolFormula, top: bool, out: &mut Vec<FolFormula>) -> Option<FolFormula> {
    if !top && f.is_closed() && has_quantifier(f) {
        split_into(f, out);
        return None;
    }
    match f {
        FolFormula::And(a, b) => match (hoist(a, false, out), hoist(b, false, out)) {
            (Some(a), Some(b)) => Some(FolFormula::and(a, b)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        },
        FolFormula::Implies(a, b) => hoist(b, false, out).map(|b| FolFormula::implies((**a).clone(), b)),
        FolFormula::Forall(vs, a) => hoist(a, false, out).map(|a| FolFormula::Forall(vs.clone(), Box::new(a))),
        FolFormula::Exists(vs, a) => hoist(a, false, out).map(|a| FolFormula::Exists(vs.clone(), Box::new(a))),
        other => Some(other.clone()),
    }
}

fn split_into(f: &FolFormula, out: &mut Vec<FolFormula>) {
    if let FolFormula::And(a, b) = f {
        split_into(a, out);
        split_into(b, out);
        return;
    }
    let mut hoisted = Vec::new();
    let residual = hoist(f, true, &mut hoisted);
    out.extend(residual);
    out.extend(hoisted);
}

fn is_init_guarded(f: &FolFormula) -> bool {
    matches!(f, FolFormula::Forall(vs, body)
        if vs.len() == 1 && matches!(&**body, FolFormula::Implies(a, _)
            if matches!(&**a, FolFormula::Pred(p, args) if p == "init" && args == &vec![FolTerm::Var(vs[0].0.clone())])))
}

/// Removes double negations, turns positively existential control states
/// into constants and splits conjunctions into separate axioms, where
/// closed quantified conjuncts are lifted out of their context. The
/// initial-state residue of a split axiom is labelled `init`.
pub fn simplify_theory(t: &FolTheory) -> FolTheory {
    let mut out = t.clone();
    out.axioms.clear();
    let mut used: BTreeSet<String> = t.signature.ops.keys().cloned().collect();
    used.extend(t.signature.preds.keys().cloned());
    let mut labels: BTreeSet<String> = t.labels().into_iter().map(str::to_string).collect();
    let mut fresh = Vec::new();
    for ax in &t.axioms {
        let f = remove_double_negations(&ax.formula);
        let f = skolemize(&f, true, &mut used, &mut fresh);
        let mut parts = Vec::new();
        split_into(&f, &mut parts);
        if parts.len() == 1 {
            out.axioms.push(Axiom { formula: parts.pop().unwrap(), ..ax.clone() });
            continue;
        }
        labels.remove(&ax.label);
        let mut rest = parts.as_slice();
        if is_init_guarded(&parts[0]) && !labels.contains("init") {
            labels.insert("init".into());
            out.axioms.push(Axiom { label: "init".into(), formula: parts[0].clone(), origin: ax.origin });
            rest = &parts[1..];
        }
        for p in rest {
            let label = fresh_name(&ax.label, &labels);
            labels.insert(label.clone());
            out.axioms.push(Axiom { label, formula: p.clone(), origin: ax.origin });
        }
    }
    out.goals = t.goals.iter().map(|(l, g)| (l.clone(), remove_double_negations(g))).collect();
    for (var, c) in &fresh {
        out.signature.ops.insert(c.clone(), (vec![], Sort::Ctrl));
        out.notes.push(format!("constant {c} names the control state bound to {var}"));
    }
    out
}

// ---------------------------------------------------------------------------
// Proof obligations

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObligationConfig {
    /// Over the single configuration variable `g`.
    pub invariant: FolFormula,
    pub per_event_case_lemmas: bool,
    /// Over the single configuration variable `g`.
    pub safe_goal: FolFormula,
}

impl ObligationConfig {
    /// `⋁ (ctrl(g) = s ∧ P_s)` over the given state predicates, with
    /// `safe` as the property.
    pub fn from_predicates(per_state: &[(String, Predicate)], safe: &Predicate) -> Result<Self, FolgenError> {
        let mut cases = Vec::new();
        for (s, p) in per_state {
            cases.push(FolFormula::and(
                FolFormula::eq(app("ctrl", vec![v("g")]), FolTerm::constant(s)),
                data_formula(p, "g", None)?,
            ));
        }
        Ok(ObligationConfig {
            invariant: FolFormula::disj(cases),
            per_event_case_lemmas: true,
            safe_goal: data_formula(safe, "g", None)?,
        })
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Adds the invariant predicate, the induction instance for reachability and
/// the goals `InvarInit`, one case lemma per event (last declared first),
/// `InvarStep`, `InvarImpliesSafe` and `Safe`.
pub fn gen_obligations(
    t: &FolTheory,
    machine: &StateMachine,
    cfg: &ObligationConfig,
) -> Result<FolTheory, FolgenError> {
    let mut out = t.clone();
    for (what, f) in [("invariant", &cfg.invariant), ("safety goal", &cfg.safe_goal)] {
        let free = f.free_vars();
        if free.iter().any(|x| x != "g") {
            return Err(FolgenError::FreeVariables(format!(
                "{what}: {}",
                free.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
        for sym in f.symbols() {
            if out.signature.ops.contains_key(&sym) {
                continue;
            }
            if machine.states.contains(&sym) {
                out.signature.ops.insert(sym, (vec![], Sort::Ctrl));
            } else {
                return Err(FolgenError::UnknownSymbol(sym));
            }
        }
        for p in f.predicates() {
            if !out.signature.preds.contains_key(&p) {
                return Err(FolgenError::UnknownSymbol(p));
            }
        }
    }
    let all = FolTerm::EventSet(machine.signature().event_names());
    let g = || ("g".to_string(), Sort::Conf);
    let g1 = || ("g'".to_string(), Sort::Conf);
    let invar = |x: &str| FolFormula::pred("invar", vec![v(x)]);
    out.signature.preds.insert("invar".into(), vec![Sort::Conf]);
    let def_label = out.fresh_label("invar_def");
    out.axioms.push(Axiom {
        label: def_label,
        formula: FolFormula::forall(vec![g()], FolFormula::iff(invar("g"), cfg.invariant.clone())),
        origin: Origin::Induction,
    });
    let step_premise = |set: FolTerm| {
        FolFormula::conj([
            FolFormula::implies(FolFormula::pred("reachable2", vec![set.clone(), v("g")]), invar("g")),
            FolFormula::pred("reachable2", vec![set, v("g")]),
            FolFormula::pred("trans", vec![v("g"), v("e"), v("g'")]),
        ])
    };
    let ind_label = out.fresh_label("InvarIsReachableInd");
    out.axioms.push(Axiom {
        label: ind_label,
        formula: FolFormula::forall(
            vec![("es".into(), Sort::EvtNameSet)],
            FolFormula::implies(
                FolFormula::and(
                    FolFormula::forall(
                        vec![g()],
                        FolFormula::implies(FolFormula::pred("init", vec![v("g")]), invar("g")),
                    ),
                    FolFormula::forall(
                        vec![g(), g1(), ("e".into(), Sort::Evt)],
                        FolFormula::implies(step_premise(v("es")), invar("g'")),
                    ),
                ),
                FolFormula::forall(
                    vec![g()],
                    FolFormula::implies(FolFormula::pred("reachable2", vec![v("es"), v("g")]), invar("g")),
                ),
            ),
        ),
        origin: Origin::Induction,
    });
    let mut goals = vec![(
        "InvarInit".to_string(),
        FolFormula::forall(vec![g()], FolFormula::implies(FolFormula::pred("init", vec![v("g")]), invar("g"))),
    )];
    if cfg.per_event_case_lemmas {
        for (e, params) in machine.events.iter().rev() {
            let ks = param_vars(params.len());
            let mut binder = vec![g(), g1(), ("e".into(), Sort::Evt)];
            binder.extend(ks.iter().map(|k| (k.clone(), Sort::Nat)));
            goals.push((
                format!("Invar{}", capitalize(e)),
                FolFormula::forall(
                    binder,
                    FolFormula::implies(
                        FolFormula::and(
                            step_premise(all.clone()),
                            FolFormula::eq(v("e"), app(&evt_ctor(e), ks.iter().map(|k| v(k)).collect())),
                        ),
                        invar("g'"),
                    ),
                ),
            ));
        }
    }
    goals.push((
        "InvarStep".into(),
        FolFormula::forall(
            vec![g(), g1(), ("e".into(), Sort::Evt)],
            FolFormula::implies(step_premise(all.clone()), invar("g'")),
        ),
    ));
    goals.push((
        "InvarImpliesSafe".into(),
        FolFormula::forall(vec![g()], FolFormula::implies(invar("g"), cfg.safe_goal.clone())),
    ));
    goals.push((
        "Safe".into(),
        FolFormula::forall(
            vec![g()],
            FolFormula::implies(FolFormula::pred("reachable2", vec![all, v("g")]), cfg.safe_goal.clone()),
        ),
    ));
    for (label, f) in goals {
        let label = out.fresh_label(&label);
        out.goals.push((label, f));
    }
    Ok(out)
}
