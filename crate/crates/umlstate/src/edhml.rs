//! The hybrid modal logic over event/data structures: formulae, translation
//! along signature morphisms, bounded satisfaction and the characterising
//! sentence of a state machine.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::datalogic::{self, DataError, Predicate, Valuation};
use crate::eds::{self, Config, EdMorphism, EdSignature, EdStructure};
use crate::frontend::{self, complete_input_enabledness, Diagnostic, Parser, Scope, StateMachine, Tok, TransitionSpec};
use crate::par;

pub use crate::eds::{EdMorphism as Morphism, EdSignature as Signature};

/// Default quantifier bound for event arguments.
pub const DEFAULT_BOUND: u64 = 4;

/// Assignment of state variables to control-state names.
pub type StateVarAssignment = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EdFormula {
    Data(Predicate),
    StateVar(String),
    Bind(String, Box<EdFormula>),
    At(BTreeSet<String>, String, Box<EdFormula>),
    Box(BTreeSet<String>, Box<EdFormula>),
    Dia { event: String, params: Vec<String>, psi: Predicate, body: Box<EdFormula> },
    Wp { event: String, params: Vec<String>, phi: Predicate, psi: Predicate, body: Box<EdFormula> },
    Not(Box<EdFormula>),
    Or(Box<EdFormula>, Box<EdFormula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EdhmlError {
    #[error("unbound state variable {0}")]
    UnboundStateVar(String),
    #[error("unknown control state {0}")]
    UnknownControl(String),
    #[error("configuration not in the structure")]
    UnknownConfig,
    #[error("state {0} is not reachable from the bound states")]
    Unreachable(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Eds(#[from] eds::EdsError),
}

impl EdFormula {
    pub fn data(p: Predicate) -> Self {
        EdFormula::Data(p)
    }

    pub fn var(s: &str) -> Self {
        EdFormula::StateVar(s.to_string())
    }

    pub fn bind(s: &str, body: EdFormula) -> Self {
        EdFormula::Bind(s.to_string(), Box::new(body))
    }

    pub fn at(f: BTreeSet<String>, s: &str, body: EdFormula) -> Self {
        EdFormula::At(f, s.to_string(), Box::new(body))
    }

    pub fn always(f: BTreeSet<String>, body: EdFormula) -> Self {
        EdFormula::Box(f, Box::new(body))
    }

    pub fn dia(event: &str, params: &[String], psi: Predicate, body: EdFormula) -> Self {
        EdFormula::Dia { event: event.to_string(), params: params.to_vec(), psi, body: Box::new(body) }
    }

    pub fn wp(event: &str, params: &[String], phi: Predicate, psi: Predicate, body: EdFormula) -> Self {
        EdFormula::Wp { event: event.to_string(), params: params.to_vec(), phi, psi, body: Box::new(body) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: EdFormula) -> Self {
        EdFormula::Not(Box::new(f))
    }

    pub fn or(a: EdFormula, b: EdFormula) -> Self {
        EdFormula::Or(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∨ ¬b)`.
    pub fn and(a: EdFormula, b: EdFormula) -> Self {
        EdFormula::not(EdFormula::or(EdFormula::not(a), EdFormula::not(b)))
    }

    /// `↓s.s`.
    pub fn truth() -> Self {
        EdFormula::bind("s", EdFormula::var("s"))
    }

    /// `[e(X) ⫽ ψ]ρ`, i.e. `¬⟨e(X) ⫽ ψ⟩¬ρ`.
    pub fn box_event(event: &str, params: &[String], psi: Predicate, body: EdFormula) -> Self {
        EdFormula::not(EdFormula::dia(event, params, psi, EdFormula::not(body)))
    }

    /// Left-nested conjunction; the data sentence `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = EdFormula>) -> Self {
        items.into_iter().reduce(EdFormula::and).unwrap_or(EdFormula::Data(Predicate::True))
    }

    /// Left-nested disjunction; the data sentence `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = EdFormula>) -> Self {
        items.into_iter().reduce(EdFormula::or).unwrap_or(EdFormula::Data(Predicate::False))
    }

    pub fn as_and(&self) -> Option<(&EdFormula, &EdFormula)> {
        match self {
            EdFormula::Not(inner) => match &**inner {
                EdFormula::Or(a, b) => match (&**a, &**b) {
                    (EdFormula::Not(a), EdFormula::Not(b)) => Some((a, b)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Recognises `¬⟨e(X) ⫽ ψ⟩¬ρ` as `(e, X, ψ, ρ)`.
    pub fn as_box_event(&self) -> Option<(&str, &[String], &Predicate, &EdFormula)> {
        match self {
            EdFormula::Not(inner) => match &**inner {
                EdFormula::Dia { event, params, psi, body } => match &**body {
                    EdFormula::Not(rho) => Some((event, params, psi, rho)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Operands of a left-nested derived conjunction, flattened.
    pub fn conjuncts(&self) -> Vec<&EdFormula> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Some((a, b)) = cur.as_and() {
            out.push(b);
            cur = a;
        }
        out.push(cur);
        out.reverse();
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a EdFormula)) {
        f(self);
        match self {
            EdFormula::Data(_) | EdFormula::StateVar(_) => {}
            EdFormula::Bind(_, b) | EdFormula::At(_, _, b) | EdFormula::Box(_, b) | EdFormula::Not(b) => b.walk(f),
            EdFormula::Dia { body, .. } | EdFormula::Wp { body, .. } => body.walk(f),
            EdFormula::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// State variables occurring free.
    pub fn free_state_vars(&self) -> BTreeSet<String> {
        fn go(f: &EdFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                EdFormula::Data(_) => {}
                EdFormula::StateVar(s) => {
                    if !bound.contains(s) {
                        out.insert(s.clone());
                    }
                }
                EdFormula::At(_, s, b) => {
                    if !bound.contains(s) {
                        out.insert(s.clone());
                    }
                    go(b, bound, out);
                }
                EdFormula::Bind(s, b) => {
                    bound.push(s.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                EdFormula::Box(_, b) | EdFormula::Not(b) => go(b, bound, out),
                EdFormula::Dia { body, .. } | EdFormula::Wp { body, .. } => go(body, bound, out),
                EdFormula::Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_state_vars().is_empty()
    }

    fn level(&self) -> u8 {
        if self.as_and().is_some() {
            return 2;
        }
        match self {
            EdFormula::Bind(..) | EdFormula::At(..) => 0,
            EdFormula::Or(..) => 1,
            EdFormula::Not(_) | EdFormula::Box(..) | EdFormula::Dia { .. } | EdFormula::Wp { .. } => 3,
            EdFormula::Data(_) | EdFormula::StateVar(_) => 4,
        }
    }
}

/// Homomorphic renaming along `sigma`.
pub fn translate_formula(sigma: &EdMorphism, rho: &EdFormula) -> Result<EdFormula, EdhmlError> {
    let tr = |p: &Predicate| datalogic::translate_pred(&sigma.data_map, p);
    Ok(match rho {
        EdFormula::Data(p) => EdFormula::Data(tr(p)?),
        EdFormula::StateVar(s) => EdFormula::StateVar(s.clone()),
        EdFormula::Bind(s, b) => EdFormula::Bind(s.clone(), Box::new(translate_formula(sigma, b)?)),
        EdFormula::At(f, s, b) => EdFormula::At(sigma.map_events(f), s.clone(), Box::new(translate_formula(sigma, b)?)),
        EdFormula::Box(f, b) => EdFormula::Box(sigma.map_events(f), Box::new(translate_formula(sigma, b)?)),
        EdFormula::Dia { event, params, psi, body } => EdFormula::Dia {
            event: sigma.map_event(event),
            params: params.clone(),
            psi: tr(psi)?,
            body: Box::new(translate_formula(sigma, body)?),
        },
        EdFormula::Wp { event, params, phi, psi, body } => EdFormula::Wp {
            event: sigma.map_event(event),
            params: params.clone(),
            phi: tr(phi)?,
            psi: tr(psi)?,
            body: Box::new(translate_formula(sigma, body)?),
        },
        EdFormula::Not(b) => EdFormula::Not(Box::new(translate_formula(sigma, b)?)),
        EdFormula::Or(a, b) => {
            EdFormula::Or(Box::new(translate_formula(sigma, a)?), Box::new(translate_formula(sigma, b)?))
        }
    })
}

// ---------------------------------------------------------------------------
// Satisfaction

enum Node {
    Data(Predicate),
    Var(usize),
    Bind(usize),
    At { f: usize, var: usize, child: usize },
    Box { f: usize, child: usize },
    Dia { event: String, params: Vec<String>, psi: Predicate, child: usize },
    Wp { event: String, params: Vec<String>, phi: Predicate, psi: Predicate, child: usize },
    Not(usize),
    Or(usize, usize),
}

struct Compiled {
    nodes: Vec<Node>,
    fsets: Vec<BTreeSet<String>>,
    root: usize,
}

fn compile(rho: &EdFormula, scope: &[String]) -> Result<Compiled, EdhmlError> {
    fn go(
        f: &EdFormula,
        scope: &mut Vec<String>,
        nodes: &mut Vec<Node>,
        fsets: &mut Vec<BTreeSet<String>>,
    ) -> Result<usize, EdhmlError> {
        let lookup = |s: &str, scope: &[String]| {
            scope.iter().rposition(|x| x == s).ok_or_else(|| EdhmlError::UnboundStateVar(s.to_string()))
        };
        let mut fset = |f: &BTreeSet<String>| match fsets.iter().position(|x| x == f) {
            Some(i) => i,
            None => {
                fsets.push(f.clone());
                fsets.len() - 1
            }
        };
        let node = match f {
            EdFormula::Data(p) => Node::Data(p.clone()),
            EdFormula::StateVar(s) => Node::Var(lookup(s, scope)?),
            EdFormula::Bind(s, b) => {
                scope.push(s.clone());
                let child = go(b, scope, nodes, fsets);
                scope.pop();
                Node::Bind(child?)
            }
            EdFormula::At(fs, s, b) => {
                let var = lookup(s, scope)?;
                let f = fset(fs);
                Node::At { f, var, child: go(b, scope, nodes, fsets)? }
            }
            EdFormula::Box(fs, b) => {
                let f = fset(fs);
                Node::Box { f, child: go(b, scope, nodes, fsets)? }
            }
            EdFormula::Dia { event, params, psi, body } => Node::Dia {
                event: event.clone(),
                params: params.clone(),
                psi: psi.clone(),
                child: go(body, scope, nodes, fsets)?,
            },
            EdFormula::Wp { event, params, phi, psi, body } => Node::Wp {
                event: event.clone(),
                params: params.clone(),
                phi: phi.clone(),
                psi: psi.clone(),
                child: go(body, scope, nodes, fsets)?,
            },
            EdFormula::Not(b) => Node::Not(go(b, scope, nodes, fsets)?),
            EdFormula::Or(a, b) => {
                let a = go(a, scope, nodes, fsets)?;
                Node::Or(a, go(b, scope, nodes, fsets)?)
            }
        };
        nodes.push(node);
        Ok(nodes.len() - 1)
    }
    let mut nodes = Vec::new();
    let mut fsets = Vec::new();
    let root = go(rho, &mut scope.to_vec(), &mut nodes, &mut fsets)?;
    Ok(Compiled { nodes, fsets, root })
}

const ANY_CONFIG: usize = usize::MAX;

struct Evaluator<'a> {
    m: &'a EdStructure,
    c: &'a Compiled,
    bound: u64,
    memo: HashMap<(usize, Vec<u32>, usize), bool>,
    reach_init: HashMap<usize, Vec<usize>>,
    reach_from: HashMap<(usize, usize), Vec<usize>>,
}

impl<'a> Evaluator<'a> {
    fn new(m: &'a EdStructure, c: &'a Compiled, bound: u64) -> Self {
        Evaluator { m, c, bound, memo: HashMap::new(), reach_init: HashMap::new(), reach_from: HashMap::new() }
    }

    fn closure(&self, f: usize, roots: &[usize]) -> Vec<usize> {
        self.m.reach_from(&self.c.fsets[f], roots).iter().enumerate().filter(|(_, r)| **r).map(|(i, _)| i).collect()
    }

    fn eval(&mut self, n: usize, env: &mut Vec<u32>, g: usize) -> Result<bool, EdhmlError> {
        let key_g = if matches!(self.c.nodes[n], Node::At { .. }) { ANY_CONFIG } else { g };
        let key = (n, env.clone(), key_g);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let m = self.m;
        let value = match &self.c.nodes[n] {
            Node::Data(p) => datalogic::sat_pred(p, m.data_state(g), None, &Valuation::new())?,
            Node::Var(i) => env[*i] == m.configs()[g].control,
            Node::Bind(child) => {
                env.push(m.configs()[g].control);
                let r = self.eval(*child, env, g);
                env.pop();
                r?
            }
            Node::At { f, var, child } => {
                if !self.reach_init.contains_key(f) {
                    let r = self.closure(*f, &m.initial_indices());
                    self.reach_init.insert(*f, r);
                }
                let targets = self.reach_init[f].clone();
                let want = env[*var];
                let mut all = true;
                for j in targets.into_iter().filter(|j| m.configs()[*j].control == want) {
                    if !self.eval(*child, env, j)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Node::Box { f, child } => {
                if !self.reach_from.contains_key(&(*f, g)) {
                    let r = self.closure(*f, &[g]);
                    self.reach_from.insert((*f, g), r);
                }
                let targets = self.reach_from[&(*f, g)].clone();
                let mut all = true;
                for j in targets {
                    if !self.eval(*child, env, j)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Node::Dia { event, params, psi, child } => {
                let mut any = false;
                for &(e, j) in m.successors(g) {
                    let ev = &m.instantiated_events()[e];
                    if ev.name != *event {
                        continue;
                    }
                    let beta = ev.valuation(params);
                    if datalogic::sat_pred(psi, m.data_state(g), Some(m.data_state(j)), &beta)?
                        && self.eval(*child, env, j)?
                    {
                        any = true;
                        break;
                    }
                }
                any
            }
            Node::Wp { event, params, phi, psi, child } => {
                let mut all = true;
                'outer: for args in eds::valuations(params.len(), self.bound) {
                    let beta: Valuation = params.iter().cloned().zip(args.iter().copied()).collect();
                    if !datalogic::sat_pred(phi, m.data_state(g), None, &beta)? {
                        continue;
                    }
                    for &(e, j) in m.successors(g) {
                        let ev = &m.instantiated_events()[e];
                        if ev.name == *event
                            && ev.args == args
                            && datalogic::sat_pred(psi, m.data_state(g), Some(m.data_state(j)), &beta)?
                            && self.eval(*child, env, j)?
                        {
                            continue 'outer;
                        }
                    }
                    all = false;
                    break;
                }
                all
            }
            Node::Not(child) => !self.eval(*child, env, g)?,
            Node::Or(a, b) => self.eval(*a, env, g)? || self.eval(*b, env, g)?,
        };
        self.memo.insert(key, value);
        Ok(value)
    }
}

/// `M, v, γ ⊨ ρ`, with `wp` quantifying arguments over `{0..=bound}`.
pub fn sat_formula(
    m: &EdStructure,
    v: &StateVarAssignment,
    gamma: Config,
    rho: &EdFormula,
    bound: u64,
) -> Result<bool, EdhmlError> {
    let g = m.index_of(&gamma).ok_or(EdhmlError::UnknownConfig)?;
    let names: Vec<String> = v.keys().cloned().collect();
    let mut env = Vec::with_capacity(names.len());
    for s in v.values() {
        let c = m.controls().iter().position(|x| x == s).ok_or_else(|| EdhmlError::UnknownControl(s.clone()))?;
        env.push(c as u32);
    }
    let compiled = compile(rho, &names)?;
    Evaluator::new(m, &compiled, bound).eval(compiled.root, &mut env, g)
}

/// `M ⊨ ρ`: `ρ` holds at every initial configuration under the empty
/// assignment.
pub fn sat_sentence(m: &EdStructure, rho: &EdFormula, bound: u64) -> Result<bool, EdhmlError> {
    let compiled = compile(rho, &[])?;
    let initials = m.initial_indices();
    let results = par::map(&initials, |&g| Evaluator::new(m, &compiled, bound).eval(compiled.root, &mut Vec::new(), g));
    for r in results {
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Characterisation

fn image<'a>(transitions: &'a [TransitionSpec], c: &str) -> Vec<&'a TransitionSpec> {
    transitions.iter().filter(|t| t.source == c).collect()
}

/// `fin(c)`: at `c`, every event step that matches exactly the effects of a
/// subset `P` of the outgoing specifications must end in a target of `P`.
/// Subsets are enumerated in binary-counter order over the source order.
pub fn fin(c: &str, transitions: &[TransitionSpec], events: &[(String, Vec<String>)]) -> EdFormula {
    let all: BTreeSet<String> = events.iter().map(|(e, _)| e.clone()).collect();
    let mut clauses = Vec::new();
    for (e, params) in events {
        let im: Vec<&TransitionSpec> = transitions.iter().filter(|t| t.source == c && t.event == *e).collect();
        let effect = |t: &TransitionSpec| Predicate::and(t.guard.clone(), t.effect.clone());
        for mask in 0u64..(1u64 << im.len()) {
            let (inside, outside): (Vec<_>, Vec<_>) = (0..im.len()).partition(|i| mask >> i & 1 == 1);
            let chi = Predicate::and(
                Predicate::conj(inside.iter().map(|&i| effect(im[i]))),
                Predicate::not(Predicate::disj(outside.iter().map(|&i| effect(im[i])))),
            );
            let targets = EdFormula::disj(inside.iter().map(|&i| EdFormula::var(&im[i].target)));
            clauses.push(EdFormula::box_event(e, params, chi, targets));
        }
    }
    EdFormula::at(all, c, EdFormula::conj(clauses))
}

/// One step of the traversal: `image` holds the unprocessed outgoing
/// specifications of `c`, `visit` the states still to visit and `bound` the
/// states bound so far.
pub fn sen(
    c: &str,
    image_left: &[TransitionSpec],
    visit: &BTreeSet<String>,
    bound: &BTreeSet<String>,
    transitions: &[TransitionSpec],
    events: &[(String, Vec<String>)],
) -> Result<EdFormula, EdhmlError> {
    let all: BTreeSet<String> = events.iter().map(|(e, _)| e.clone()).collect();
    if let Some((t, rest)) = image_left.split_first() {
        let body = if bound.contains(&t.target) {
            EdFormula::and(EdFormula::var(&t.target), sen(c, rest, visit, bound, transitions, events)?)
        } else {
            let mut b = bound.clone();
            b.insert(t.target.clone());
            EdFormula::bind(&t.target, sen(c, rest, visit, &b, transitions, events)?)
        };
        return Ok(EdFormula::at(all, c, EdFormula::wp(&t.event, &t.params, t.guard.clone(), t.effect.clone(), body)));
    }
    let mut v = visit.clone();
    v.remove(c);
    if !v.is_empty() {
        let next = bound
            .intersection(&v)
            .next()
            .ok_or_else(|| EdhmlError::Unreachable(v.iter().next().cloned().unwrap_or_default()))?;
        let im: Vec<TransitionSpec> = image(transitions, next).into_iter().cloned().collect();
        return sen(next, &im, &v, bound, transitions, events);
    }
    let fins = bound.iter().map(|b| fin(b, transitions, events));
    let distinct: Vec<EdFormula> = bound
        .iter()
        .enumerate()
        .flat_map(|(i, c1)| {
            bound.iter().skip(i + 1).map(|c2| EdFormula::not(EdFormula::at(all.clone(), c1, EdFormula::var(c2))))
        })
        .collect();
    Ok(EdFormula::conj(fins.chain(distinct)))
}

/// `↓c₀.(φ₀ ∧ sen(c₀, Im(c₀), C, {c₀}))`, optionally after input-enabledness
/// completion.
pub fn characterize(machine: &StateMachine, complete: bool) -> Result<EdFormula, EdhmlError> {
    let u = if complete { complete_input_enabledness(machine) } else { machine.clone() };
    let c0 = u.initial_state.clone();
    let im: Vec<TransitionSpec> = image(&u.transitions, &c0).into_iter().cloned().collect();
    let visit: BTreeSet<String> = u.states.iter().cloned().collect();
    let body = sen(&c0, &im, &visit, &BTreeSet::from([c0.clone()]), &u.transitions, &u.events)?;
    Ok(EdFormula::bind(&c0, EdFormula::and(EdFormula::Data(u.initial_predicate.clone()), body)))
}

// ---------------------------------------------------------------------------
// Text form

fn fmt_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<String>) -> fmt::Result {
    write!(f, "[{}]", set.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn fmt_event(f: &mut fmt::Formatter<'_>, event: &str, params: &[String]) -> fmt::Result {
    if params.is_empty() {
        write!(f, "{event}")
    } else {
        write!(f, "{event}({})", params.join(", "))
    }
}

/// Wraps implications and equivalences so that `=>` stays a separator.
fn guarded(p: &Predicate) -> String {
    match p {
        Predicate::Implies(..) | Predicate::Iff(..) => format!("({p})"),
        _ => p.to_string(),
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, rho: &EdFormula, min: u8, tail: bool) -> fmt::Result {
    let lvl = rho.level();
    if lvl < min || (lvl == 0 && !tail) {
        write!(f, "(")?;
        write_formula(f, rho, 0, true)?;
        return write!(f, ")");
    }
    if let Some((a, b)) = rho.as_and() {
        write_formula(f, a, 2, false)?;
        write!(f, " /\\ ")?;
        return write_formula(f, b, 3, tail);
    }
    if let Some((e, params, psi, body)) = rho.as_box_event() {
        write!(f, "[")?;
        fmt_event(f, e, params)?;
        write!(f, " // {}] ", guarded(psi))?;
        return write_formula(f, body, 3, tail);
    }
    match rho {
        EdFormula::Data(p) => write!(f, "{{{p}}}"),
        EdFormula::StateVar(s) => write!(f, "{s}"),
        EdFormula::Bind(s, b) => {
            write!(f, "down {s} . ")?;
            write_formula(f, b, 0, true)
        }
        EdFormula::At(set, s, b) => {
            write!(f, "@")?;
            fmt_set(f, set)?;
            write!(f, " {s} . ")?;
            write_formula(f, b, 0, true)
        }
        EdFormula::Box(set, b) => {
            fmt_set(f, set)?;
            write!(f, " ")?;
            write_formula(f, b, 3, tail)
        }
        EdFormula::Dia { event, params, psi, body } => {
            write!(f, "<")?;
            fmt_event(f, event, params)?;
            write!(f, " // {psi}> ")?;
            write_formula(f, body, 3, tail)
        }
        EdFormula::Wp { event, params, phi, psi, body } => {
            write!(f, "[")?;
            fmt_event(f, event, params)?;
            write!(f, " // {} => {psi}] ", guarded(phi))?;
            write_formula(f, body, 3, tail)
        }
        EdFormula::Not(b) => {
            write!(f, "!")?;
            write_formula(f, b, 3, tail)
        }
        EdFormula::Or(a, b) => {
            write_formula(f, a, 1, false)?;
            write!(f, " \\/ ")?;
            write_formula(f, b, 2, tail)
        }
    }
}

/// Canonical ASCII rendering; [`parse_formula`] reads it back.
impl fmt::Display for EdFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0, true)
    }
}

struct FormulaScope<'a> {
    attrs: &'a [String],
    vars: &'a [String],
    primed: bool,
}

impl Scope for FormulaScope<'_> {
    fn resolve(&self, name: &str) -> Option<datalogic::DataTerm> {
        if self.vars.iter().any(|v| v == name) {
            Some(datalogic::DataTerm::var(name))
        } else if self.attrs.iter().any(|a| a == name) {
            Some(datalogic::DataTerm::attr(name))
        } else {
            None
        }
    }

    fn resolve_primed(&self, name: &str) -> Option<datalogic::DataTerm> {
        (self.primed && self.attrs.iter().any(|a| a == name)).then(|| datalogic::DataTerm::primed(name))
    }
}

struct FormulaParser<'a> {
    p: Parser,
    sig: &'a EdSignature,
}

impl FormulaParser<'_> {
    fn formula(&mut self) -> Result<EdFormula, Diagnostic> {
        let mut lhs = self.conjunction()?;
        while self.p.at_sym("\\/") {
            self.p.bump();
            lhs = EdFormula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<EdFormula, Diagnostic> {
        let mut lhs = self.unary()?;
        while self.p.at_sym("/\\") {
            self.p.bump();
            lhs = EdFormula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn pred(&mut self, vars: &[String], primed: bool, full: bool) -> Result<Predicate, Diagnostic> {
        let raw = if full { self.p.pred()? } else { self.p.pred_or()? };
        raw.resolve(&FormulaScope { attrs: &self.sig.attributes, vars, primed }, "attribute")
    }

    fn event_set(&mut self) -> Result<BTreeSet<String>, Diagnostic> {
        self.p.expect_sym("[")?;
        let mut set = BTreeSet::new();
        if !self.p.at_sym("]") {
            set.extend(self.p.ident_list()?.into_iter().map(|(e, _)| e));
        }
        self.p.expect_sym("]")?;
        Ok(set)
    }

    fn event(&mut self) -> Result<(String, Vec<String>), Diagnostic> {
        let (e, _) = self.p.ident()?;
        let mut params = Vec::new();
        if self.p.at_sym("(") {
            self.p.bump();
            params = self.p.ident_list()?.into_iter().map(|(x, _)| x).collect();
            self.p.expect_sym(")")?;
        }
        Ok((e, params))
    }

    fn unary(&mut self) -> Result<EdFormula, Diagnostic> {
        if self.p.at_sym("!") {
            self.p.bump();
            return Ok(EdFormula::not(self.unary()?));
        }
        if self.p.at_sym("(") {
            self.p.bump();
            let f = self.formula()?;
            self.p.expect_sym(")")?;
            return Ok(f);
        }
        if self.p.at_sym("{") {
            self.p.bump();
            let p = self.pred(&[], false, true)?;
            self.p.expect_sym("}")?;
            return Ok(EdFormula::Data(p));
        }
        if self.p.at_sym("@") {
            self.p.bump();
            let set = self.event_set()?;
            let (s, _) = self.p.ident()?;
            self.p.expect_sym(".")?;
            return Ok(EdFormula::At(set, s, Box::new(self.formula()?)));
        }
        if self.p.at_kw("down") && matches!(self.p.peek_at(1), Tok::Ident(_)) {
            self.p.bump();
            let (s, _) = self.p.ident()?;
            self.p.expect_sym(".")?;
            return Ok(EdFormula::Bind(s, Box::new(self.formula()?)));
        }
        if self.p.at_sym("<") {
            self.p.bump();
            let (event, params) = self.event()?;
            self.p.expect_sym("//")?;
            let psi = self.pred(&params, true, true)?;
            self.p.expect_sym(">")?;
            let body = self.unary()?;
            return Ok(EdFormula::dia(&event, &params, psi, body));
        }
        if self.p.at_sym("[") {
            let is_set = matches!(self.p.peek_at(1), Tok::Sym("]"))
                || matches!(self.p.peek_at(2), Tok::Sym(",") | Tok::Sym("]"));
            if is_set {
                let set = self.event_set()?;
                return Ok(EdFormula::Box(set, Box::new(self.unary()?)));
            }
            self.p.bump();
            let (event, params) = self.event()?;
            self.p.expect_sym("//")?;
            let first = self.pred(&params, true, false)?;
            if self.p.at_sym("=>") {
                self.p.bump();
                let psi = self.pred(&params, true, true)?;
                self.p.expect_sym("]")?;
                let body = self.unary()?;
                return Ok(EdFormula::wp(&event, &params, first, psi, body));
            }
            self.p.expect_sym("]")?;
            let body = self.unary()?;
            return Ok(EdFormula::box_event(&event, &params, first, body));
        }
        let (s, _) = self.p.ident()?;
        Ok(EdFormula::StateVar(s))
    }
}

/// Reads the canonical rendering over `sig`.
pub fn parse_formula(text: &str, sig: &EdSignature) -> Result<EdFormula, Diagnostic> {
    let mut fp = FormulaParser { p: Parser::new(frontend::lex(text)?), sig };
    let f = fp.formula()?;
    if !fp.p.at_eof() {
        return fp.p.fail("end of formula");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalogic::{CmpOp, DataTerm};
    use crate::eds::{canonical_model, EdMorphism};
    use crate::frontend::parse_umlstate;
    use crate::gen;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counter() -> StateMachine {
        parse_umlstate(include_str!("../fixtures/counter.umlstate")).unwrap()
    }

    fn relaxed() -> StateMachine {
        parse_umlstate(include_str!("../fixtures/counter_relaxed.umlstate")).unwrap()
    }

    fn all_events() -> BTreeSet<String> {
        BTreeSet::from(["inc".to_string(), "reset".to_string()])
    }

    fn cnt() -> DataTerm {
        DataTerm::attr("cnt")
    }

    fn x() -> Vec<String> {
        vec!["x".to_string()]
    }

    fn v12() -> StateVarAssignment {
        [("s1".to_string(), "s1".to_string()), ("s2".to_string(), "s2".to_string())].into()
    }

    #[test]
    fn example_sentences_on_canonical_model() {
        let m = canonical_model(&complete_input_enabledness(&counter()), 4).unwrap();
        let g0 = m.initials()[0];
        let wp = EdFormula::at(
            all_events(),
            "s1",
            EdFormula::wp(
                "inc",
                &x(),
                Predicate::cmp(CmpOp::Eq, DataTerm::add(cnt(), DataTerm::var("x")), DataTerm::Num(4)),
                Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), DataTerm::Num(4)),
                EdFormula::var("s2"),
            ),
        );
        assert!(sat_formula(&m, &v12(), g0, &wp, 4).unwrap());
        let prohibit = EdFormula::at(
            all_events(),
            "s2",
            EdFormula::box_event(
                "reset",
                &[],
                Predicate::not(Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), DataTerm::Num(0))),
                EdFormula::Data(Predicate::False),
            ),
        );
        assert!(sat_formula(&m, &v12(), g0, &prohibit, 4).unwrap());
        for c in m.configs() {
            assert!(sat_formula(&m, &BTreeMap::new(), *c, &EdFormula::truth(), 4).unwrap());
        }
        let zero = EdFormula::Data(Predicate::cmp(CmpOp::Eq, cnt(), DataTerm::Num(0)));
        let one = EdFormula::Data(Predicate::cmp(CmpOp::Eq, cnt(), DataTerm::Num(1)));
        assert!(sat_sentence(&m, &zero, 4).unwrap());
        assert!(!sat_sentence(&m, &one, 4).unwrap());
        assert_eq!(
            sat_formula(&m, &BTreeMap::new(), g0, &EdFormula::var("q"), 4),
            Err(EdhmlError::UnboundStateVar("q".into()))
        );
    }

    #[test]
    fn characterisation_holds_on_canonical_models() {
        for u in [counter(), relaxed()] {
            let rho = characterize(&u, true).unwrap();
            assert!(rho.is_sentence());
            let m = canonical_model(&complete_input_enabledness(&u), 4).unwrap();
            assert!(sat_sentence(&m, &rho, 4).unwrap());
        }
    }

    fn at_wp(f: &EdFormula) -> (&str, &str, &EdFormula) {
        match f {
            EdFormula::At(_, c, b) => match &**b {
                EdFormula::Wp { event, body, .. } => (c.as_str(), event.as_str(), body),
                other => panic!("expected wp, got {other}"),
            },
            other => panic!("expected @, got {other}"),
        }
    }

    fn fin_clauses(f: &EdFormula) -> (&str, usize) {
        match f {
            EdFormula::At(_, c, b) => (c, b.conjuncts().len()),
            other => panic!("expected fin, got {other}"),
        }
    }

    #[test]
    fn worked_example_structure() {
        let rho = characterize(&relaxed(), false).unwrap();
        let EdFormula::Bind(c0, body) = &rho else { panic!() };
        assert_eq!(c0, "s1");
        let (init, r11) = body.as_and().unwrap();
        assert_eq!(init.to_string(), "{cnt = 0}");
        let (c, e, b) = at_wp(r11);
        assert_eq!((c, e), ("s1", "inc"));
        let (s1, r12) = b.as_and().unwrap();
        assert_eq!(*s1, EdFormula::var("s1"));
        let (c, e, b) = at_wp(r12);
        assert_eq!((c, e), ("s1", "inc"));
        let EdFormula::Bind(s2, r21) = b else { panic!() };
        assert_eq!(s2, "s2");
        let (c, e, b) = at_wp(r21);
        assert_eq!((c, e), ("s2", "reset"));
        let (s1, rfin) = b.as_and().unwrap();
        assert_eq!(*s1, EdFormula::var("s1"));
        let parts = rfin.conjuncts();
        assert_eq!(parts.len(), 3);
        assert_eq!(fin_clauses(parts[0]), ("s1", 5));
        assert_eq!(fin_clauses(parts[1]), ("s2", 3));
        assert_eq!(parts[2].to_string(), "!(@[inc, reset] s1 . s2)");
    }

    #[test]
    fn fin_clauses_match_example() {
        let u = relaxed();
        let f = fin("s2", &u.transitions, &u.events);
        let text: Vec<String> = match &f {
            EdFormula::At(_, _, b) => b.conjuncts().iter().map(|c| c.to_string()).collect(),
            _ => unreachable!(),
        };
        assert_eq!(
            text,
            vec![
                "[inc(x) // true /\\ !false] {false}",
                "[reset // true /\\ !(true /\\ cnt' = 0)] {false}",
                "[reset // true /\\ cnt' = 0 /\\ !false] s1",
            ]
        );
        let f1 = fin("s1", &u.transitions, &u.events);
        let EdFormula::At(_, _, b) = &f1 else { unreachable!() };
        let clauses = b.conjuncts();
        assert_eq!(clauses.len(), 5);
        assert!(clauses[3].to_string().ends_with("] (s1 \\/ s2)"), "{}", clauses[3]);
        assert_eq!(clauses[4].to_string(), "[reset // true /\\ !false] {false}");
    }

    #[test]
    fn fin_of_isolated_state() {
        let u = parse_umlstate("logic UMLState spec M = event e; states c; init c : true; end").unwrap();
        let f = fin("c", &u.transitions, &u.events);
        assert_eq!(f.to_string(), "@[e] c . [e // true /\\ !false] {false}");
        let s = sen("c", &[], &BTreeSet::from(["c".to_string()]), &BTreeSet::from(["c".to_string()]), &[], &u.events)
            .unwrap();
        assert_eq!(s, f);
    }

    #[test]
    fn completed_counter_has_one_wp_per_transition() {
        let rho = characterize(&counter(), true).unwrap();
        let mut wps = 0;
        rho.walk(&mut |f| {
            if matches!(f, EdFormula::Wp { .. }) {
                wps += 1;
            }
        });
        assert_eq!(wps, complete_input_enabledness(&counter()).transitions.len());
    }

    #[test]
    fn fin_size_is_sum_of_powers() {
        let u = complete_input_enabledness(&counter());
        for c in &u.states {
            let EdFormula::At(_, _, b) = fin(c, &u.transitions, &u.events) else { unreachable!() };
            let expected: usize = u
                .events
                .iter()
                .map(|(e, _)| 1 << u.transitions.iter().filter(|t| &t.source == c && &t.event == e).count())
                .sum();
            assert_eq!(b.conjuncts().len(), expected);
        }
    }

    #[test]
    fn translation_examples() {
        let sig = counter().signature();
        let rho = characterize(&counter(), true).unwrap();
        assert_eq!(translate_formula(&EdMorphism::identity(&sig), &rho).unwrap(), rho);
        let mut target = sig.clone();
        target.events[0].0 = "bump".into();
        target.attributes = vec!["counter".into()];
        let sigma = EdMorphism {
            source: sig.clone(),
            target,
            event_map: [("inc".to_string(), "bump".to_string()), ("reset".to_string(), "reset".to_string())].into(),
            data_map: [("cnt".to_string(), "counter".to_string())].into(),
        };
        let d = parse_formula("<inc(x) // cnt' = cnt + x> {true}", &sig).unwrap();
        assert_eq!(translate_formula(&sigma, &d).unwrap().to_string(), "<bump(x) // counter' = counter + x> {true}");
        let a = parse_formula("down s . @[inc] s . {cnt = 0}", &sig).unwrap();
        assert_eq!(translate_formula(&sigma, &a).unwrap().to_string(), "down s . @[bump] s . {counter = 0}");
    }

    #[test]
    fn text_round_trips_characterisations() {
        for u in [counter(), relaxed()] {
            for complete in [false, true] {
                let rho = characterize(&u, complete).unwrap();
                assert_eq!(parse_formula(&rho.to_string(), &u.signature()).unwrap(), rho);
            }
        }
    }

    #[test]
    fn text_parsing_precedence() {
        let sig = counter().signature();
        let f = parse_formula("s /\\ down t . t \\/ s", &sig).unwrap();
        assert_eq!(
            f,
            EdFormula::and(
                EdFormula::var("s"),
                EdFormula::bind("t", EdFormula::or(EdFormula::var("t"), EdFormula::var("s")))
            )
        );
        let g = EdFormula::or(EdFormula::bind("t", EdFormula::var("t")), EdFormula::var("s"));
        assert_eq!(g.to_string(), "(down t . t) \\/ s");
        let box_impl = EdFormula::box_event(
            "reset",
            &[],
            Predicate::implies(Predicate::True, Predicate::False),
            EdFormula::var("s"),
        );
        assert_eq!(parse_formula(&box_impl.to_string(), &sig).unwrap(), box_impl);
        assert!(parse_formula("[inc(x) // cnt > 1 => cnt' > 2] {true}", &sig).is_ok());
        assert!(parse_formula("<reset // cnt' > 0> {true}", &sig).is_ok());
    }

    #[test]
    fn sequential_fallback_agrees() {
        let rho = characterize(&counter(), true).unwrap();
        let m = canonical_model(&complete_input_enabledness(&counter()), 3).unwrap();
        let a = sat_sentence(&m, &rho, 3).unwrap();
        par::set_parallel(false);
        let b = sat_sentence(&m, &rho, 3).unwrap();
        par::set_parallel(true);
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn satisfaction_condition(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = gen::random_signature(&mut rng);
            let sigma = gen::random_morphism(&target, &mut rng);
            let m = eds::random_structure(&target, 3, 2, 8, &mut rng);
            let rho = gen::random_sentence(&sigma.source, 4, &mut rng);
            let lhs = sat_sentence(&eds::reduct(&m, &sigma).unwrap(), &rho, 2).unwrap();
            let rhs = sat_sentence(&m, &translate_formula(&sigma, &rho).unwrap(), 2).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn translation_preserves_shape(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = gen::random_signature(&mut rng);
            let sigma = gen::random_morphism(&target, &mut rng);
            let rho = gen::random_sentence(&sigma.source, 4, &mut rng);
            let out = translate_formula(&sigma, &rho).unwrap();
            let shape = |f: &EdFormula| {
                let mut s = Vec::new();
                f.walk(&mut |g| s.push(std::mem::discriminant(g)));
                s
            };
            prop_assert_eq!(shape(&rho), shape(&out));
        }

        #[test]
        fn text_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = gen::random_signature(&mut rng);
            let rho = gen::random_sentence(&sig, 5, &mut rng);
            prop_assert_eq!(parse_formula(&rho.to_string(), &sig).unwrap(), rho);
        }

        #[test]
        fn derived_forms_are_structural(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = gen::random_signature(&mut rng);
            let m = eds::random_structure(&sig, 2, 2, 6, &mut rng);
            let a = gen::random_sentence(&sig, 3, &mut rng);
            let b = gen::random_sentence(&sig, 3, &mut rng);
            let and = sat_sentence(&m, &EdFormula::and(a.clone(), b.clone()), 2).unwrap();
            let each = sat_sentence(&m, &a, 2).unwrap() && sat_sentence(&m, &b, 2).unwrap();
            // Conjunction per initial configuration implies the conjunction of sentences.
            prop_assert!(!and || each);
            prop_assert!(sat_sentence(&m, &EdFormula::truth(), 2).unwrap());
        }
    }
}
