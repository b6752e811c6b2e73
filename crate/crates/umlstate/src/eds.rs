//! Finite event/data structures: construction, reachability, reducts, the
//! model-of relation, canonical models and bounded enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::datalogic::{self, CmpOp, DataError, DataMorphism, DataState, DataTerm, Predicate, Valuation};
use crate::frontend::StateMachine;
use crate::par;

/// Upper limit on configurations built by [`canonical_model`].
pub const MAX_CONFIGS: usize = 1 << 20;

/// Upper limit on candidate transition triples for [`enumerate_structures`].
pub const MAX_CANDIDATES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EdSignature {
    pub attributes: Vec<String>,
    pub events: Vec<(String, Vec<String>)>,
}

impl EdSignature {
    pub fn params(&self, event: &str) -> Option<&[String]> {
        self.events.iter().find(|(e, _)| e == event).map(|(_, p)| p.as_slice())
    }

    pub fn arity(&self, event: &str) -> Option<usize> {
        self.params(event).map(<[String]>::len)
    }

    pub fn event_names(&self) -> BTreeSet<String> {
        self.events.iter().map(|(e, _)| e.clone()).collect()
    }

    /// Same attribute set and same events with the same arities.
    pub fn compatible(&self, other: &EdSignature) -> bool {
        let attrs = |s: &EdSignature| s.attributes.iter().cloned().collect::<BTreeSet<_>>();
        let evs = |s: &EdSignature| s.events.iter().map(|(e, p)| (e.clone(), p.len())).collect::<BTreeSet<_>>();
        attrs(self) == attrs(other) && evs(self) == evs(other)
    }
}

impl StateMachine {
    pub fn signature(&self) -> EdSignature {
        EdSignature { attributes: self.attributes.clone(), events: self.events.clone() }
    }
}

/// Signature morphism `source -> target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdMorphism {
    pub source: EdSignature,
    pub target: EdSignature,
    pub event_map: BTreeMap<String, String>,
    pub data_map: DataMorphism,
}

impl EdMorphism {
    pub fn identity(sig: &EdSignature) -> Self {
        EdMorphism {
            source: sig.clone(),
            target: sig.clone(),
            event_map: sig.events.iter().map(|(e, _)| (e.clone(), e.clone())).collect(),
            data_map: sig.attributes.iter().map(|a| (a.clone(), a.clone())).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), EdsError> {
        for (e, params) in &self.source.events {
            let image = self.event_map.get(e).ok_or_else(|| EdsError::Morphism(format!("event {e} unmapped")))?;
            match self.target.arity(image) {
                Some(n) if n == params.len() => {}
                Some(_) => return Err(EdsError::Morphism(format!("{e} -> {image} changes arity"))),
                None => return Err(EdsError::Morphism(format!("image {image} of {e} undeclared"))),
            }
        }
        for a in &self.source.attributes {
            let image = self.data_map.get(a).ok_or_else(|| EdsError::Morphism(format!("attribute {a} unmapped")))?;
            if !self.target.attributes.contains(image) {
                return Err(EdsError::Morphism(format!("image {image} of {a} undeclared")));
            }
        }
        Ok(())
    }

    pub fn map_event(&self, e: &str) -> String {
        self.event_map.get(e).cloned().unwrap_or_else(|| e.to_string())
    }

    pub fn map_events(&self, f: &BTreeSet<String>) -> BTreeSet<String> {
        f.iter().map(|e| self.map_event(e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstantiatedEvent {
    pub name: String,
    pub args: Vec<u64>,
}

impl InstantiatedEvent {
    pub fn new(name: &str, args: &[u64]) -> Self {
        InstantiatedEvent { name: name.to_string(), args: args.to_vec() }
    }

    pub fn valuation(&self, params: &[String]) -> Valuation {
        params.iter().cloned().zip(self.args.iter().copied()).collect()
    }
}

impl fmt::Display for InstantiatedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            let args: Vec<String> = self.args.iter().map(u64::to_string).collect();
            write!(f, "{}({})", self.name, args.join(","))
        }
    }
}

/// Pair of indices into the structure's control and data-name lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub control: u32,
    pub data: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EdsError {
    #[error("no initial configuration")]
    NoInitial,
    #[error("initial configurations use more than one control state")]
    InitialControls,
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("invalid signature morphism: {0}")]
    Morphism(String),
    #[error("signature mismatch between structure and machine")]
    SignatureMismatch,
    #[error("no initial data state within bound satisfies the initial predicate")]
    EmptyInitial,
    #[error("structure exceeds {0} configurations")]
    TooLarge(usize),
    #[error("enumeration limits exceeded: {0} candidate transitions")]
    LimitsExceeded(usize),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdStructure {
    signature: EdSignature,
    controls: Vec<String>,
    data_names: Vec<String>,
    labelling: Vec<DataState>,
    initials: Vec<Config>,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
    events: Vec<InstantiatedEvent>,
    /// Per configuration index, sorted `(event index, target index)` pairs.
    succ: Vec<Vec<(usize, usize)>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

impl EdStructure {
    /// Builds a structure, keeping only the part reachable from `initials`.
    pub fn new(
        signature: EdSignature,
        controls: Vec<String>,
        data: Vec<(String, DataState)>,
        initials: impl IntoIterator<Item = Config>,
        transitions: impl IntoIterator<Item = (Config, InstantiatedEvent, Config)>,
    ) -> Result<Self, EdsError> {
        let invalid = |m: String| Err(EdsError::Invalid(m));
        let uniq = |v: &[String]| v.iter().collect::<BTreeSet<_>>().len() == v.len();
        if !uniq(&controls) || controls.iter().any(|c| !valid_name(c)) {
            return invalid("control names must be unique and free of spaces".into());
        }
        let (data_names, labelling): (Vec<String>, Vec<DataState>) = data.into_iter().unzip();
        if !uniq(&data_names) || data_names.iter().any(|d| !valid_name(d)) {
            return invalid("data names must be unique and free of spaces".into());
        }
        let attrs: BTreeSet<&String> = signature.attributes.iter().collect();
        if let Some(d) = labelling.iter().position(|w| w.keys().collect::<BTreeSet<_>>() != attrs) {
            return invalid(format!("data name {} is not labelled over the attributes", data_names[d]));
        }
        let in_range = |c: &Config| (c.control as usize) < controls.len() && (c.data as usize) < data_names.len();
        let initials: BTreeSet<Config> = initials.into_iter().collect();
        if initials.is_empty() {
            return Err(EdsError::NoInitial);
        }
        if initials.iter().any(|c| !in_range(c)) {
            return invalid("initial configuration out of range".into());
        }
        if initials.iter().map(|c| c.control).collect::<BTreeSet<_>>().len() > 1 {
            return Err(EdsError::InitialControls);
        }
        let mut adj: BTreeMap<Config, BTreeSet<(InstantiatedEvent, Config)>> = BTreeMap::new();
        for (s, e, t) in transitions {
            if !in_range(&s) || !in_range(&t) {
                return invalid("transition endpoint out of range".into());
            }
            match signature.arity(&e.name) {
                Some(n) if n == e.args.len() => {}
                _ => return invalid(format!("instantiated event {e} does not fit the signature")),
            }
            adj.entry(s).or_default().insert((e, t));
        }

        let mut reach: BTreeSet<Config> = initials.clone();
        let mut queue: VecDeque<Config> = initials.iter().copied().collect();
        while let Some(c) = queue.pop_front() {
            for (_, t) in adj.get(&c).into_iter().flatten() {
                if reach.insert(*t) {
                    queue.push_back(*t);
                }
            }
        }
        let configs: Vec<Config> = reach.into_iter().collect();
        let index: HashMap<Config, usize> = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let events: Vec<InstantiatedEvent> = configs
            .iter()
            .flat_map(|c| adj.get(c).into_iter().flatten().map(|(e, _)| e.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ev_index: HashMap<&InstantiatedEvent, usize> = events.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let succ = configs
            .iter()
            .map(|c| {
                let mut out: Vec<(usize, usize)> =
                    adj.get(c).into_iter().flatten().map(|(e, t)| (ev_index[e], index[t])).collect();
                out.sort_unstable();
                out
            })
            .collect();
        Ok(EdStructure {
            signature,
            controls,
            data_names,
            labelling,
            initials: initials.into_iter().collect(),
            configs,
            index,
            events,
            succ,
        })
    }

    pub fn signature(&self) -> &EdSignature {
        &self.signature
    }

    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn data_names(&self) -> &[String] {
        &self.data_names
    }

    pub fn labelling(&self) -> &[DataState] {
        &self.labelling
    }

    /// All configurations, sorted; positions are configuration indices.
    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn initials(&self) -> &[Config] {
        &self.initials
    }

    pub fn initial_indices(&self) -> Vec<usize> {
        self.initials.iter().map(|c| self.index[c]).collect()
    }

    pub fn initial_control(&self) -> &str {
        &self.controls[self.initials[0].control as usize]
    }

    pub fn index_of(&self, c: &Config) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn instantiated_events(&self) -> &[InstantiatedEvent] {
        &self.events
    }

    pub fn successors(&self, i: usize) -> &[(usize, usize)] {
        &self.succ[i]
    }

    pub fn control_name(&self, i: usize) -> &str {
        &self.controls[self.configs[i].control as usize]
    }

    pub fn data_state(&self, i: usize) -> &DataState {
        &self.labelling[self.configs[i].data as usize]
    }

    /// Control states of reachable configurations.
    pub fn reachable_controls(&self) -> BTreeSet<String> {
        (0..self.configs.len()).map(|i| self.control_name(i).to_string()).collect()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (Config, &InstantiatedEvent, Config)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(i, s)| s.iter().map(move |(e, j)| (self.configs[i], &self.events[*e], self.configs[*j])))
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn describe(&self, c: &Config) -> String {
        format!("({}, {})", self.controls[c.control as usize], self.data_names[c.data as usize])
    }

    pub fn find_config(&self, control: &str, data: &str) -> Option<Config> {
        let c = self.controls.iter().position(|x| x == control)? as u32;
        let d = self.data_names.iter().position(|x| x == data)? as u32;
        let cfg = Config { control: c, data: d };
        self.index.contains_key(&cfg).then_some(cfg)
    }

    /// Indices reachable from `from` via events named in `f`.
    pub(crate) fn reach_from(&self, f: &BTreeSet<String>, from: &[usize]) -> Vec<bool> {
        let allowed: Vec<bool> = self.events.iter().map(|e| f.contains(&e.name)).collect();
        let mut seen = vec![false; self.configs.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &i in from {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &(e, j) in &self.succ[i] {
                if allowed[e] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    fn rebuild(
        &self,
        data: Vec<(String, DataState)>,
        initials: Vec<Config>,
        transitions: Vec<(Config, InstantiatedEvent, Config)>,
    ) -> Result<Self, EdsError> {
        EdStructure::new(self.signature.clone(), self.controls.clone(), data, initials, transitions)
    }

    fn data_list(&self) -> Vec<(String, DataState)> {
        self.data_names.iter().cloned().zip(self.labelling.iter().cloned()).collect()
    }
}

/// `Γ^F(M, from)` when `from` is given, otherwise `Γ^F(M)`.
pub fn reachable(m: &EdStructure, f: &BTreeSet<String>, from: Option<Config>) -> BTreeSet<Config> {
    let roots = match from {
        Some(c) => m.index_of(&c).into_iter().collect(),
        None => m.initial_indices(),
    };
    m.reach_from(f, &roots).iter().enumerate().filter(|(_, r)| **r).map(|(i, _)| m.configs[i]).collect()
}

/// The `σ`-reduct of a structure over `σ.target`.
pub fn reduct(m: &EdStructure, sigma: &EdMorphism) -> Result<EdStructure, EdsError> {
    sigma.validate()?;
    if !m.signature.compatible(&sigma.target) {
        return Err(EdsError::SignatureMismatch);
    }
    let data = m
        .data_list()
        .into_iter()
        .map(|(d, w)| Ok((d, datalogic::reduct_state(&sigma.data_map, &w)?)))
        .collect::<Result<Vec<_>, EdsError>>()?;
    let mut transitions = Vec::new();
    for (s, e, t) in m.transitions() {
        for (src_event, _) in &sigma.source.events {
            if sigma.map_event(src_event) == e.name {
                transitions.push((s, InstantiatedEvent { name: src_event.clone(), args: e.args.clone() }, t));
            }
        }
    }
    EdStructure::new(sigma.source.clone(), m.controls.clone(), data, m.initials.clone(), transitions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    MissingControl,
    InitialControl,
    InitialData,
    MissingTransition,
    UnjustifiedTransition,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::MissingControl => "missing-control",
            ViolationKind::InitialControl => "initial-control",
            ViolationKind::InitialData => "initial-data",
            ViolationKind::MissingTransition => "missing-transition",
            ViolationKind::UnjustifiedTransition => "unjustified-transition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub config: Option<Config>,
    pub event: Option<InstantiatedEvent>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheckReport {
    pub verdict: bool,
    pub violations: Vec<Violation>,
}

impl ModelCheckReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ModelCheckReport { verdict: violations.is_empty(), violations }
    }
}

/// All argument vectors in `{0..=bound}^arity`, in lexicographic order.
pub fn valuations(arity: usize, bound: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = (bound + 1).checked_pow(arity as u32).unwrap_or(u64::MAX);
    (0..total).map(move |mut k| {
        let mut v = vec![0; arity];
        for slot in v.iter_mut().rev() {
            *slot = k % (bound + 1);
            k /= bound + 1;
        }
        v
    })
}

/// Checks whether `m` is a model of `u`, quantifying event arguments over
/// `{0..=bound}` for the mandatory-transition requirement.
pub fn is_model_of(m: &EdStructure, u: &StateMachine, bound: u64) -> Result<ModelCheckReport, EdsError> {
    if !m.signature.compatible(&u.signature()) {
        return Err(EdsError::SignatureMismatch);
    }
    let mut violations = Vec::new();
    let reached = m.reachable_controls();
    for s in &u.states {
        if !reached.contains(s) {
            violations.push(Violation {
                kind: ViolationKind::MissingControl,
                config: None,
                event: None,
                detail: format!("control state {s} not reachable in the structure"),
            });
        }
    }
    if m.initial_control() != u.initial_state {
        violations.push(Violation {
            kind: ViolationKind::InitialControl,
            config: None,
            event: None,
            detail: format!("initial control {} differs from {}", m.initial_control(), u.initial_state),
        });
    }
    for (k, c) in m.initials.iter().enumerate() {
        let w = &m.labelling[c.data as usize];
        if !datalogic::sat_pred(&u.initial_predicate, w, None, &Valuation::new())? {
            violations.push(Violation {
                kind: ViolationKind::InitialData,
                config: Some(m.initials[k]),
                event: None,
                detail: format!("initial configuration {} violates the initial predicate", m.describe(c)),
            });
        }
    }
    if !violations.is_empty() {
        return Ok(ModelCheckReport::from_violations(violations));
    }

    let params: BTreeMap<&str, &[String]> = u.events.iter().map(|(e, p)| (e.as_str(), p.as_slice())).collect();
    let indices: Vec<usize> = (0..m.configs.len()).collect();
    let per_config = par::map(&indices, |&i| -> Result<Vec<Violation>, DataError> {
        let mut out = Vec::new();
        let control = m.control_name(i);
        let w = m.data_state(i);
        let cfg = m.configs[i];
        for t in u.transitions.iter().filter(|t| t.source == control) {
            for args in valuations(t.params.len(), bound) {
                let ev = InstantiatedEvent { name: t.event.clone(), args };
                let beta = ev.valuation(&t.params);
                if !datalogic::sat_pred(&t.guard, w, None, &beta)? {
                    continue;
                }
                let mut found = false;
                for &(e, j) in m.successors(i) {
                    if m.events[e] == ev
                        && m.control_name(j) == t.target
                        && datalogic::sat_pred(&t.effect, w, Some(m.data_state(j)), &beta)?
                    {
                        found = true;
                        break;
                    }
                }
                if !found {
                    out.push(Violation {
                        kind: ViolationKind::MissingTransition,
                        config: Some(cfg),
                        event: Some(ev),
                        detail: format!("no transition to {} at {}", t.target, m.describe(&cfg)),
                    });
                }
            }
        }
        for &(e, j) in m.successors(i) {
            let ev = &m.events[e];
            let beta = ev.valuation(params[ev.name.as_str()]);
            let w2 = m.data_state(j);
            let target = m.control_name(j);
            let mut justified = false;
            let mut guard_fires = false;
            for t in u.transitions.iter().filter(|t| t.source == control && t.event == ev.name) {
                if datalogic::sat_pred(&t.guard, w, None, &beta)? {
                    guard_fires = true;
                    if t.target == target && datalogic::sat_pred(&t.effect, w, Some(w2), &beta)? {
                        justified = true;
                        break;
                    }
                }
            }
            let idle = !guard_fires && target == control && w == w2;
            if !justified && !idle {
                out.push(Violation {
                    kind: ViolationKind::UnjustifiedTransition,
                    config: Some(cfg),
                    event: Some(ev.clone()),
                    detail: format!("{} --{ev}--> {} is not justified", m.describe(&cfg), m.describe(&m.configs[j])),
                });
            }
        }
        Ok(out)
    });
    for r in per_config {
        violations.extend(r?);
    }
    Ok(ModelCheckReport::from_violations(violations))
}

/// Renders a data state as a whitespace-free data name, e.g. `a=0,b=1`.
pub fn data_state_name(w: &DataState) -> String {
    if w.is_empty() {
        return "-".to_string();
    }
    w.iter().map(|(a, v)| format!("{a}={v}")).collect::<Vec<_>>().join(",")
}

fn all_states(attrs: &[String], max: u64) -> Vec<DataState> {
    valuations(attrs.len(), max).map(|vals| attrs.iter().cloned().zip(vals).collect()).collect()
}

fn top_conjuncts<'a>(p: &'a Predicate, out: &mut Vec<&'a Predicate>) {
    match p {
        Predicate::And(a, b) => {
            top_conjuncts(a, out);
            top_conjuncts(b, out);
        }
        other => out.push(other),
    }
}

fn unprimed(t: &DataTerm) -> bool {
    match t {
        DataTerm::Attr { primed, .. } => !primed,
        DataTerm::Suc(a) => unprimed(a),
        DataTerm::Add(a, b) | DataTerm::Mul(a, b) => unprimed(a) && unprimed(b),
        _ => true,
    }
}

/// Post states of `effect` from `pre`: attributes fixed by a top-level
/// conjunct `a' = t` take the value of `t`, the others range over
/// `{0..=bound}`.
fn post_states(
    effect: &Predicate,
    attrs: &[String],
    pre: &DataState,
    beta: &Valuation,
    bound: u64,
) -> Result<Vec<DataState>, DataError> {
    let mut parts = Vec::new();
    top_conjuncts(effect, &mut parts);
    let mut fixed: BTreeMap<&str, u64> = BTreeMap::new();
    for p in parts {
        if let Predicate::Cmp(CmpOp::Eq | CmpOp::EqEq, l, r) = p {
            for (x, t) in [(l, r), (r, l)] {
                if let DataTerm::Attr { name, primed: true } = x {
                    if unprimed(t) && !fixed.contains_key(name.as_str()) {
                        fixed.insert(name, datalogic::eval_term(t, pre, None, beta)?);
                    }
                }
            }
        }
    }
    let free: Vec<String> = attrs.iter().filter(|a| !fixed.contains_key(a.as_str())).cloned().collect();
    let mut out = Vec::new();
    for vals in valuations(free.len(), bound) {
        let mut w: DataState = fixed.iter().map(|(a, v)| (a.to_string(), *v)).collect();
        w.extend(free.iter().cloned().zip(vals));
        if datalogic::sat_pred(effect, pre, Some(&w), beta)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Explicit structure generated by `u` itself, with identity labelling.
///
/// Event arguments and initial values range over `{0..=bound}`; effects that
/// fix an attribute compute its value exactly, unconstrained attributes range
/// over `{0..=bound}`.
pub fn canonical_model(u: &StateMachine, bound: u64) -> Result<EdStructure, EdsError> {
    let sig = u.signature();
    let initial: Vec<DataState> = all_states(&u.attributes, bound)
        .into_iter()
        .filter(|w| datalogic::sat_pred(&u.initial_predicate, w, None, &Valuation::new()).unwrap_or(false))
        .collect();
    if initial.is_empty() {
        return Err(EdsError::EmptyInitial);
    }
    let controls = u.states.clone();
    let c0 = controls.iter().position(|c| *c == u.initial_state).expect("validated machine") as u32;
    let mut data: Vec<DataState> = Vec::new();
    let mut data_ix: HashMap<DataState, u32> = HashMap::new();
    let mut intern = |w: DataState, data: &mut Vec<DataState>| -> u32 {
        *data_ix.entry(w.clone()).or_insert_with(|| {
            data.push(w);
            (data.len() - 1) as u32
        })
    };
    let initials: Vec<Config> =
        initial.into_iter().map(|w| Config { control: c0, data: intern(w, &mut data) }).collect();
    let mut seen: BTreeSet<Config> = initials.iter().copied().collect();
    let mut queue: VecDeque<Config> = initials.iter().copied().collect();
    let mut transitions = Vec::new();
    while let Some(cfg) = queue.pop_front() {
        let control = &controls[cfg.control as usize];
        let pre = data[cfg.data as usize].clone();
        for t in u.transitions.iter().filter(|t| &t.source == control) {
            let target = controls.iter().position(|c| *c == t.target).expect("validated machine") as u32;
            for args in valuations(t.params.len(), bound) {
                let ev = InstantiatedEvent { name: t.event.clone(), args };
                let beta = ev.valuation(&t.params);
                if !datalogic::sat_pred(&t.guard, &pre, None, &beta)? {
                    continue;
                }
                for post in post_states(&t.effect, &u.attributes, &pre, &beta, bound)? {
                    let next = Config { control: target, data: intern(post, &mut data) };
                    transitions.push((cfg, ev.clone(), next));
                    if seen.insert(next) {
                        if seen.len() > MAX_CONFIGS {
                            return Err(EdsError::TooLarge(MAX_CONFIGS));
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    let named = data.into_iter().map(|w| (data_state_name(&w), w)).collect();
    EdStructure::new(sig, controls, named, initials, transitions)
}

/// Lazily enumerates structures with controls `s1..=sN` (`s1` initial),
/// identity labelling over values `{0..=data_values}` and event arguments in
/// the same range. Yields at most `cap` structures.
pub fn enumerate_structures(
    controls: usize,
    data_values: u64,
    signature: &EdSignature,
    cap: usize,
) -> Result<Box<dyn Iterator<Item = EdStructure> + '_>, EdsError> {
    if controls == 0 {
        return Ok(Box::new(std::iter::empty()));
    }
    let states = all_states(&signature.attributes, data_values);
    let events: Vec<InstantiatedEvent> = signature
        .events
        .iter()
        .flat_map(|(e, p)| {
            valuations(p.len(), data_values).map(move |a| InstantiatedEvent { name: e.clone(), args: a })
        })
        .collect();
    let configs: Vec<Config> = (0..controls as u32)
        .flat_map(|c| (0..states.len() as u32).map(move |d| Config { control: c, data: d }))
        .collect();
    let candidates = configs.len().saturating_mul(events.len()).saturating_mul(configs.len());
    if candidates > MAX_CANDIDATES || states.len() > 63 {
        return Err(EdsError::LimitsExceeded(candidates));
    }
    let mut triples = Vec::with_capacity(candidates);
    for s in &configs {
        for e in &events {
            for t in &configs {
                triples.push((*s, e.clone(), *t));
            }
        }
    }
    let names: Vec<String> = (1..=controls).map(|i| format!("s{i}")).collect();
    let data: Vec<(String, DataState)> = states.iter().map(|w| (data_state_name(w), w.clone())).collect();
    let n_states = states.len();
    let mut mask = vec![false; triples.len()];
    let mut d0: u64 = 0;
    let mut exhausted = false;
    let iter = std::iter::from_fn(move || loop {
        if exhausted {
            return None;
        }
        d0 += 1;
        if d0 == 1u64 << n_states {
            d0 = 1;
            // Binary increment of the transition subset.
            match mask.iter().position(|b| !*b) {
                Some(k) => {
                    mask[..k].iter_mut().for_each(|b| *b = false);
                    mask[k] = true;
                }
                None => {
                    exhausted = true;
                    return None;
                }
            }
        }
        let initials: Vec<Config> =
            (0..n_states as u32).filter(|d| d0 >> d & 1 == 1).map(|d| Config { control: 0, data: d }).collect();
        let chosen: Vec<(Config, InstantiatedEvent, Config)> =
            triples.iter().zip(&mask).filter(|(_, b)| **b).map(|(t, _)| t.clone()).collect();
        let m = EdStructure::new(signature.clone(), names.clone(), data.clone(), initials, chosen.clone())
            .expect("enumerated components are well-formed");
        if m.transition_count() == chosen.len() {
            return Some(m);
        }
    });
    Ok(Box::new(iter.take(cap)))
}

/// Random structure with identity labelling; used for randomized checks.
pub fn random_structure(
    signature: &EdSignature,
    controls: usize,
    max_value: u64,
    transitions: usize,
    rng: &mut impl Rng,
) -> EdStructure {
    let states = all_states(&signature.attributes, max_value);
    let names: Vec<String> = (1..=controls.max(1)).map(|i| format!("s{i}")).collect();
    let data: Vec<(String, DataState)> = states.iter().map(|w| (data_state_name(w), w.clone())).collect();
    let rand_config = |rng: &mut dyn rand::RngCore| Config {
        control: rng.gen_range(0..names.len() as u32),
        data: rng.gen_range(0..states.len() as u32),
    };
    let n_init = rng.gen_range(1..=2usize.min(states.len()));
    let initials: Vec<Config> =
        (0..n_init).map(|_| Config { control: 0, data: rng.gen_range(0..states.len() as u32) }).collect();
    let mut trans = Vec::new();
    if !signature.events.is_empty() {
        // Chain from an initial configuration so that most edges stay reachable.
        let mut frontier = initials.clone();
        for _ in 0..transitions {
            let src = if rng.gen_bool(0.8) { frontier[rng.gen_range(0..frontier.len())] } else { rand_config(rng) };
            let tgt = rand_config(rng);
            let (e, p) = &signature.events[rng.gen_range(0..signature.events.len())];
            let args = (0..p.len()).map(|_| rng.gen_range(0..=max_value)).collect();
            trans.push((src, InstantiatedEvent { name: e.clone(), args }, tgt));
            frontier.push(tgt);
        }
    }
    EdStructure::new(signature.clone(), names, data, initials, trans).expect("random components are well-formed")
}

/// A random local change: drop, add or redirect a transition, add an initial
/// data state, or move a transition to a fresh data state.
pub fn mutate(m: &EdStructure, bound: u64, rng: &mut impl Rng) -> EdStructure {
    let mut data = m.data_list();
    let mut initials = m.initials.clone();
    let mut trans: Vec<(Config, InstantiatedEvent, Config)> =
        m.transitions().map(|(s, e, t)| (s, e.clone(), t)).collect();
    let pick_config = |rng: &mut dyn rand::RngCore| m.configs[rng.gen_range(0..m.configs.len())];
    let random_event = |rng: &mut dyn rand::RngCore| {
        let (e, p) = &m.signature.events[rng.gen_range(0..m.signature.events.len())];
        InstantiatedEvent { name: e.clone(), args: (0..p.len()).map(|_| rng.gen_range(0..=bound)).collect() }
    };
    match rng.gen_range(0..5) {
        0 if !trans.is_empty() => {
            let k = rng.gen_range(0..trans.len());
            trans.remove(k);
        }
        1 if !m.signature.events.is_empty() => {
            let s = pick_config(rng);
            let t = pick_config(rng);
            trans.push((s, random_event(rng), t));
        }
        2 if !trans.is_empty() => {
            let k = rng.gen_range(0..trans.len());
            trans[k].2 = pick_config(rng);
        }
        3 => {
            let d = rng.gen_range(0..data.len() as u32);
            initials.push(Config { control: initials[0].control, data: d });
        }
        _ if !trans.is_empty() && !m.signature.attributes.is_empty() => {
            let k = rng.gen_range(0..trans.len());
            let mut w = data[trans[k].2.data as usize].1.clone();
            let a = &m.signature.attributes[rng.gen_range(0..m.signature.attributes.len())];
            w.insert(a.clone(), rng.gen_range(0..=bound + 1));
            let name = data_state_name(&w);
            let d = match data.iter().position(|(n, _)| *n == name) {
                Some(d) => d as u32,
                None => {
                    data.push((name, w));
                    (data.len() - 1) as u32
                }
            };
            trans[k].2.data = d;
        }
        _ => {
            if let Some(k) = (!trans.is_empty()).then(|| rng.gen_range(0..trans.len())) {
                trans.remove(k);
            }
        }
    }
    m.rebuild(data, initials, trans).expect("mutation keeps components well-formed")
}

impl fmt::Display for EdStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure")?;
        for a in &self.signature.attributes {
            writeln!(f, "attribute {a}")?;
        }
        for (e, p) in &self.signature.events {
            writeln!(f, "event {e}{}{}", if p.is_empty() { "" } else { " " }, p.join(" "))?;
        }
        writeln!(f, "controls {}", self.controls.join(" "))?;
        for (d, w) in self.data_names.iter().zip(&self.labelling) {
            let vals: Vec<String> = w.iter().map(|(a, v)| format!("{a}={v}")).collect();
            writeln!(f, "data {d}{}{}", if vals.is_empty() { "" } else { " " }, vals.join(" "))?;
        }
        for c in &self.initials {
            writeln!(f, "initial {} {}", self.controls[c.control as usize], self.data_names[c.data as usize])?;
        }
        for (s, e, t) in self.transitions() {
            writeln!(
                f,
                "transition {} {} {e} {} {}",
                self.controls[s.control as usize],
                self.data_names[s.data as usize],
                self.controls[t.control as usize],
                self.data_names[t.data as usize]
            )?;
        }
        writeln!(f, "end")
    }
}

impl FromStr for EdStructure {
    type Err = EdsError;

    fn from_str(text: &str) -> Result<Self, EdsError> {
        let mut sig = EdSignature::default();
        let mut controls = Vec::new();
        let mut data: Vec<(String, DataState)> = Vec::new();
        let mut initials = Vec::new();
        let mut trans = Vec::new();
        let mut seen_header = false;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |m: &str| EdsError::Parse { line, message: m.to_string() };
            let words: Vec<&str> = raw.split_whitespace().collect();
            let Some((&head, rest)) = words.split_first() else { continue };
            if head.starts_with('#') {
                continue;
            }
            let control = |name: &str| {
                controls
                    .iter()
                    .position(|c| c == name)
                    .map(|i| i as u32)
                    .ok_or_else(|| err(&format!("unknown control {name}")))
            };
            let datum = |name: &str| {
                data.iter()
                    .position(|(d, _)| d == name)
                    .map(|i| i as u32)
                    .ok_or_else(|| err(&format!("unknown data name {name}")))
            };
            match (head, rest) {
                ("structure", []) => seen_header = true,
                _ if !seen_header => return Err(err("expected `structure`")),
                ("attribute", [a]) => sig.attributes.push(a.to_string()),
                ("event", [e, ps @ ..]) => sig.events.push((e.to_string(), ps.iter().map(|p| p.to_string()).collect())),
                ("controls", cs) => controls.extend(cs.iter().map(|c| c.to_string())),
                ("data", [d, vals @ ..]) => {
                    let mut w = DataState::new();
                    for kv in vals {
                        let (a, v) = kv.split_once('=').ok_or_else(|| err("expected attribute=value"))?;
                        w.insert(a.to_string(), v.parse().map_err(|_| err("bad value"))?);
                    }
                    data.push((d.to_string(), w));
                }
                ("initial", [c, d]) => initials.push(Config { control: control(c)?, data: datum(d)? }),
                ("transition", [c, d, ev, c2, d2]) => {
                    let src = Config { control: control(c)?, data: datum(d)? };
                    let tgt = Config { control: control(c2)?, data: datum(d2)? };
                    let ev = parse_instantiated(ev).ok_or_else(|| err("bad instantiated event"))?;
                    trans.push((src, ev, tgt));
                }
                ("end", []) => break,
                _ => return Err(err(&format!("unexpected line `{}`", raw.trim()))),
            }
        }
        EdStructure::new(sig, controls, data, initials, trans)
    }
}

pub fn parse_instantiated(s: &str) -> Option<InstantiatedEvent> {
    match s.split_once('(') {
        None => valid_name(s).then(|| InstantiatedEvent::new(s, &[])),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')')?;
            let args = inner.split(',').map(|a| a.trim().parse().ok()).collect::<Option<Vec<u64>>>()?;
            Some(InstantiatedEvent { name: name.to_string(), args })
        }
    }
}
