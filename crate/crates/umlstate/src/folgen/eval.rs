//! Evaluation of first-order formulae over the interpretation induced by a
//! finite event/data structure, with natural numbers cut off at a bound.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::{FolFormula, FolTerm, FolTheory, FolgenError, Sort};
use crate::datalogic::DataError;
use crate::eds::{EdStructure, InstantiatedEvent};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(u64),
    Ctrl(u32),
    /// Configuration index.
    Conf(usize),
    /// Event index into the signature, with arguments.
    Evt(usize, Vec<u64>),
    EvtName(usize),
    /// Bit set over event indices.
    Set(u64),
}

/// Carriers: configurations and control states of the structure, naturals up
/// to the bound, event instantiations with arguments up to the bound, event
/// names and all sets of event names. Nullary `Ctrl` symbols denote the
/// control state of the same name unless given explicitly.
#[derive(Debug, Clone)]
pub struct InducedInterpretation<'a> {
    m: &'a EdStructure,
    bound: u64,
    constants: BTreeMap<String, Value>,
    definitions: BTreeMap<String, (Vec<String>, FolFormula)>,
}

pub fn induced_interpretation(m: &EdStructure, bound: u64) -> InducedInterpretation<'_> {
    InducedInterpretation { m, bound, constants: BTreeMap::new(), definitions: BTreeMap::new() }
}

impl<'a> InducedInterpretation<'a> {
    pub fn structure(&self) -> &'a EdStructure {
        self.m
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn with_constant(mut self, name: &str, v: Value) -> Self {
        self.constants.insert(name.to_string(), v);
        self
    }

    /// Interprets `pred(vars)` as `body`.
    pub fn with_definition(mut self, pred: &str, vars: &[String], body: FolFormula) -> Self {
        self.definitions.insert(pred.to_string(), (vars.to_vec(), body));
        self
    }

    /// Registers every axiom of the shape `∀x̄. p(x̄) ⇔ φ` as a definition of `p`
    /// when `p` has no meaning in the structure.
    pub fn with_definitions_from(mut self, t: &FolTheory) -> Self {
        for ax in &t.axioms {
            if let FolFormula::Forall(vs, body) = &ax.formula {
                if let FolFormula::Iff(lhs, rhs) = &**body {
                    if let FolFormula::Pred(p, args) = &**lhs {
                        let vars: Vec<String> = vs.iter().map(|(v, _)| v.clone()).collect();
                        let plain = args.iter().map(|a| match a {
                            FolTerm::Var(v) => Some(v.clone()),
                            _ => None,
                        });
                        if !builtin_pred(p) && plain.clone().collect::<Option<Vec<_>>>() == Some(vars.clone()) {
                            self.definitions.insert(p.clone(), (vars, (**rhs).clone()));
                        }
                    }
                }
            }
        }
        self
    }

    fn event_index(&self, name: &str) -> Option<usize> {
        self.m.signature().events.iter().position(|(e, _)| e == name)
    }

    pub fn set_value(&self, s: &BTreeSet<String>) -> Result<Value, FolgenError> {
        let mut mask = 0u64;
        for e in s {
            let i = self.event_index(e).ok_or_else(|| FolgenError::UnknownSymbol(e.clone()))?;
            mask |= 1 << i;
        }
        Ok(Value::Set(mask))
    }

    pub fn carrier(&self, s: Sort) -> Vec<Value> {
        match s {
            Sort::Nat => (0..=self.bound).map(Value::Nat).collect(),
            Sort::Ctrl => (0..self.m.controls().len() as u32).map(Value::Ctrl).collect(),
            Sort::Conf => (0..self.m.configs().len()).map(Value::Conf).collect(),
            Sort::EvtName => (0..self.m.signature().events.len()).map(Value::EvtName).collect(),
            Sort::EvtNameSet => (0..1u64 << self.m.signature().events.len()).map(Value::Set).collect(),
            Sort::Evt => {
                let mut out = Vec::new();
                for (i, (_, params)) in self.m.signature().events.iter().enumerate() {
                    for args in crate::eds::valuations(params.len(), self.bound) {
                        out.push(Value::Evt(i, args));
                    }
                }
                out
            }
        }
    }

    /// `trans(g, e, g')` in the structure.
    pub fn trans(&self, g: usize, e: &Value, g1: usize) -> bool {
        let Value::Evt(i, args) = e else { return false };
        let name = &self.m.signature().events[*i].0;
        let evs: &[InstantiatedEvent] = self.m.instantiated_events();
        self.m.successors(g).iter().any(|&(k, t)| t == g1 && evs[k].name == *name && evs[k].args == *args)
    }
}

fn builtin_pred(p: &str) -> bool {
    matches!(p, "<=" | "<" | ">" | ">=" | "==" | "eps" | "init" | "trans" | "reachable" | "reachable2" | "reachable3")
}

struct Evaluator<'i, 'a> {
    i: &'i InducedInterpretation<'a>,
    env: Vec<(String, Value)>,
    free: HashMap<*const FolFormula, Rc<Vec<String>>>,
    memo: HashMap<(*const FolFormula, Vec<Value>), bool>,
    reach: HashMap<(u64, Option<usize>), Rc<Vec<bool>>>,
    initials: Vec<usize>,
}

fn undefined<T>(what: String) -> Result<T, FolgenError> {
    Err(FolgenError::Undefined(what))
}

impl Evaluator<'_, '_> {
    fn lookup(&self, v: &str) -> Result<Value, FolgenError> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, x)| x.clone())
            .ok_or_else(|| FolgenError::FreeVariables(v.to_string()))
    }

    fn nat(&mut self, t: &FolTerm) -> Result<u64, FolgenError> {
        match self.term(t)? {
            Value::Nat(n) => Ok(n),
            other => undefined(format!("{other:?} is not a number")),
        }
    }

    fn conf(&mut self, t: &FolTerm) -> Result<usize, FolgenError> {
        match self.term(t)? {
            Value::Conf(n) => Ok(n),
            other => undefined(format!("{other:?} is not a configuration")),
        }
    }

    fn set(&mut self, t: &FolTerm) -> Result<u64, FolgenError> {
        match self.term(t)? {
            Value::Set(n) => Ok(n),
            other => undefined(format!("{other:?} is not an event set")),
        }
    }

    fn term(&mut self, t: &FolTerm) -> Result<Value, FolgenError> {
        let m = self.i.m;
        match t {
            FolTerm::Var(v) => self.lookup(v),
            FolTerm::Num(n) => Ok(Value::Nat(*n)),
            FolTerm::EventSet(s) => self.i.set_value(s),
            FolTerm::App(f, args) => {
                if let Some(v) = self.i.constants.get(f).filter(|_| args.is_empty()) {
                    return Ok(v.clone());
                }
                match (f.as_str(), args.as_slice()) {
                    ("+", [a, b]) => {
                        let (a, b) = (self.nat(a)?, self.nat(b)?);
                        Ok(Value::Nat(a.checked_add(b).ok_or(DataError::Overflow)?))
                    }
                    ("*", [a, b]) => {
                        let (a, b) = (self.nat(a)?, self.nat(b)?);
                        Ok(Value::Nat(a.checked_mul(b).ok_or(DataError::Overflow)?))
                    }
                    ("suc", [a]) => Ok(Value::Nat(self.nat(a)?.checked_add(1).ok_or(DataError::Overflow)?)),
                    ("ctrl", [g]) => {
                        let g = self.conf(g)?;
                        Ok(Value::Ctrl(m.configs()[g].control))
                    }
                    ("evtName", [e]) => match self.term(e)? {
                        Value::Evt(i, _) => Ok(Value::EvtName(i)),
                        other => undefined(format!("evtName of {other:?}")),
                    },
                    ("conf", [c, rest @ ..]) => {
                        let Value::Ctrl(c) = self.term(c)? else {
                            return undefined("conf needs a control state".into());
                        };
                        let mut vals = Vec::new();
                        for a in rest {
                            vals.push(self.nat(a)?);
                        }
                        let attrs = &m.signature().attributes;
                        (0..m.configs().len())
                            .find(|&k| {
                                m.configs()[k].control == c
                                    && attrs.iter().zip(&vals).all(|(a, v)| m.data_state(k)[a] == *v)
                            })
                            .map(Value::Conf)
                            .map_or_else(|| undefined(format!("no configuration conf({c}, {vals:?})")), Ok)
                    }
                    (name, [g]) if m.signature().attributes.iter().any(|a| a == name) => {
                        let g = self.conf(g)?;
                        Ok(Value::Nat(m.data_state(g)[name]))
                    }
                    (name, _) => {
                        if let Some(e) = name.strip_prefix("evt_").and_then(|e| self.i.event_index(e)) {
                            if args.len() == m.signature().events[e].1.len() {
                                let mut vals = Vec::new();
                                for a in args {
                                    vals.push(self.nat(a)?);
                                }
                                return Ok(Value::Evt(e, vals));
                            }
                        }
                        if let Some(e) = name.strip_prefix("evtName_").and_then(|e| self.i.event_index(e)) {
                            if args.is_empty() {
                                return Ok(Value::EvtName(e));
                            }
                        }
                        if args.is_empty() {
                            if let Some(c) = m.controls().iter().position(|c| c == name) {
                                return Ok(Value::Ctrl(c as u32));
                            }
                        }
                        Err(FolgenError::UnknownSymbol(name.to_string()))
                    }
                }
            }
        }
    }

    fn reach(&mut self, set: u64, from: Option<usize>) -> Rc<Vec<bool>> {
        if let Some(r) = self.reach.get(&(set, from)) {
            return r.clone();
        }
        let names: BTreeSet<String> = self
            .i
            .m
            .signature()
            .events
            .iter()
            .enumerate()
            .filter(|(i, _)| set >> i & 1 == 1)
            .map(|(_, (e, _))| e.clone())
            .collect();
        let roots = match from {
            Some(g) => vec![g],
            None => self.initials.clone(),
        };
        let r = Rc::new(self.i.m.reach_from(&names, &roots));
        self.reach.insert((set, from), r.clone());
        r
    }

    fn pred(&mut self, p: &str, args: &[FolTerm]) -> Result<bool, FolgenError> {
        let nat2 = |s: &mut Self| -> Result<(u64, u64), FolgenError> { Ok((s.nat(&args[0])?, s.nat(&args[1])?)) };
        match (p, args.len()) {
            ("<=", 2) => nat2(self).map(|(a, b)| a <= b),
            ("<", 2) => nat2(self).map(|(a, b)| a < b),
            (">", 2) => nat2(self).map(|(a, b)| a > b),
            (">=", 2) => nat2(self).map(|(a, b)| a >= b),
            ("==", 2) => nat2(self).map(|(a, b)| a == b),
            ("eps", 2) => {
                let Value::EvtName(e) = self.term(&args[0])? else {
                    return undefined("eps needs an event name".into());
                };
                Ok(self.set(&args[1])? >> e & 1 == 1)
            }
            ("init", 1) => {
                let g = self.conf(&args[0])?;
                Ok(self.initials.contains(&g))
            }
            ("trans", 3) => {
                let g = self.conf(&args[0])?;
                let e = self.term(&args[1])?;
                let g1 = self.conf(&args[2])?;
                Ok(self.i.trans(g, &e, g1))
            }
            ("reachable3", 3) => {
                let s = self.set(&args[0])?;
                let (g, g1) = (self.conf(&args[1])?, self.conf(&args[2])?);
                Ok(self.reach(s, Some(g))[g1])
            }
            ("reachable2", 2) => {
                let s = self.set(&args[0])?;
                let g = self.conf(&args[1])?;
                Ok(self.reach(s, None)[g])
            }
            ("reachable", 1) => {
                let g = self.conf(&args[0])?;
                let all = (1u64 << self.i.m.signature().events.len()) - 1;
                Ok(self.reach(all, None)[g])
            }
            _ => {
                let Some((vars, body)) = self.i.definitions.get(p) else {
                    return Err(FolgenError::UnknownSymbol(p.to_string()));
                };
                if vars.len() != args.len() {
                    return undefined(format!("{p} applied to {} arguments", args.len()));
                }
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.term(a)?);
                }
                let saved = std::mem::take(&mut self.env);
                self.env = vars.iter().cloned().zip(vals).collect();
                let r = self.formula(body);
                self.env = saved;
                r
            }
        }
    }

    fn free_of(&mut self, f: &FolFormula) -> Rc<Vec<String>> {
        let key = f as *const FolFormula;
        self.free.entry(key).or_insert_with(|| Rc::new(f.free_vars().into_iter().collect())).clone()
    }

    fn formula(&mut self, f: &FolFormula) -> Result<bool, FolgenError> {
        match f {
            FolFormula::True => Ok(true),
            FolFormula::False => Ok(false),
            FolFormula::Pred(p, args) => self.pred(p, args),
            FolFormula::Eq(a, b) => Ok(self.term(a)? == self.term(b)?),
            FolFormula::Not(a) => Ok(!self.formula(a)?),
            FolFormula::And(a, b) => Ok(self.formula(a)? && self.formula(b)?),
            FolFormula::Or(a, b) => Ok(self.formula(a)? || self.formula(b)?),
            FolFormula::Implies(a, b) => Ok(!self.formula(a)? || self.formula(b)?),
            FolFormula::Iff(a, b) => Ok(self.formula(a)? == self.formula(b)?),
            FolFormula::Forall(vs, body) | FolFormula::Exists(vs, body) => {
                let forall = matches!(f, FolFormula::Forall(..));
                let free = self.free_of(f);
                let mut key_vals = Vec::with_capacity(free.len());
                for v in free.iter() {
                    key_vals.push(self.lookup(v)?);
                }
                let key = (f as *const FolFormula, key_vals);
                if let Some(&r) = self.memo.get(&key) {
                    return Ok(r);
                }
                let r = self.quantify(vs, body, forall)?;
                self.memo.insert(key, r);
                Ok(r)
            }
        }
    }

    fn quantify(&mut self, vs: &[(String, Sort)], body: &FolFormula, forall: bool) -> Result<bool, FolgenError> {
        let Some(((v, s), rest)) = vs.split_first() else { return self.formula(body) };
        let carrier = self.i.carrier(*s);
        if carrier.is_empty() {
            return Err(FolgenError::EmptyCarrier(*s));
        }
        for x in carrier {
            self.env.push((v.clone(), x));
            let r = self.quantify(rest, body, forall);
            self.env.pop();
            if r? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }
}

/// Classical truth of the closed formula `f`, with `Nat` quantifiers over
/// `0..=bound`.
pub fn eval_fol(i: &InducedInterpretation, f: &FolFormula, bound: u64) -> Result<bool, FolgenError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(FolgenError::FreeVariables(free.into_iter().collect::<Vec<_>>().join(", ")));
    }
    let scoped = InducedInterpretation { bound, ..i.clone() };
    let mut ev = Evaluator {
        i: &scoped,
        env: Vec::new(),
        free: HashMap::new(),
        memo: HashMap::new(),
        reach: HashMap::new(),
        initials: i.m.initial_indices(),
    };
    ev.formula(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edhml::{self, sat_sentence};
    use crate::eds::{self, canonical_model, random_structure};
    use crate::folgen::{gen_obligations, machine_theory, nu_sen, nu_sig, simplify_theory, ObligationConfig};
    use crate::frontend::{complete_input_enabledness, parse_predicate, parse_umlstate, StateMachine};
    use crate::gen::{random_sentence, random_signature};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn counter() -> StateMachine {
        parse_umlstate(include_str!("../../fixtures/counter.umlstate")).unwrap()
    }

    fn p(s: &str) -> FolFormula {
        let m = counter();
        let sig = m.signature();
        let rho = edhml::parse_formula(s, &sig).unwrap();
        nu_sen(&sig, &rho).unwrap()
    }

    #[test]
    fn counter_model_examples() {
        let u = complete_input_enabledness(&counter());
        let m = canonical_model(&u, 4).unwrap();
        let i = induced_interpretation(&m, 4);
        let at = |c: &str, v: u64| {
            m.find_config(c, &format!("cnt={v}")).and_then(|c| m.index_of(&c)).unwrap_or_else(|| panic!("{c} {v}"))
        };
        assert!(i.trans(at("s1", 2), &Value::Evt(0, vec![2]), at("s2", 4)));
        assert!(!i.trans(at("s1", 2), &Value::Evt(0, vec![1]), at("s2", 4)));
        let g = || vec![("g".to_string(), Sort::Conf)];
        let init = FolFormula::pred("init", vec![FolTerm::var("g")]);
        assert!(eval_fol(&i, &FolFormula::exists(g(), init.clone()), 4).unwrap());
        let cnt1 = FolFormula::pred("==", vec![FolTerm::app("cnt", vec![FolTerm::var("g")]), FolTerm::Num(1)]);
        assert!(!eval_fol(&i, &FolFormula::forall(g(), FolFormula::implies(init, cnt1)), 4).unwrap());
        assert!(eval_fol(&i, &p("{cnt = 0}"), 4).unwrap());
        let rho = edhml::characterize(&counter(), true).unwrap();
        assert!(eval_fol(&i, &nu_sen(&u.signature(), &rho).unwrap(), 4).unwrap());
    }

    #[test]
    fn open_formulas_and_unknown_symbols_are_reported() {
        let m = canonical_model(&counter(), 2).unwrap();
        let i = induced_interpretation(&m, 2);
        let open = FolFormula::pred("init", vec![FolTerm::var("g")]);
        assert!(matches!(eval_fol(&i, &open, 2), Err(FolgenError::FreeVariables(_))));
        let unknown = FolFormula::pred("bogus", vec![]);
        assert_eq!(eval_fol(&i, &unknown, 2), Err(FolgenError::UnknownSymbol("bogus".into())));
    }

    #[test]
    fn unary_reachability_matches_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let sig = random_signature(&mut rng);
            let m = random_structure(&sig, 3, 2, 8, &mut rng);
            let i = induced_interpretation(&m, 2);
            let all = eds::reachable(&m, &sig.event_names(), None);
            for (k, c) in m.configs().iter().enumerate() {
                let mut ev = Evaluator {
                    i: &i,
                    env: vec![("g".into(), Value::Conf(k))],
                    free: HashMap::new(),
                    memo: HashMap::new(),
                    reach: HashMap::new(),
                    initials: m.initial_indices(),
                };
                let r = ev.formula(&FolFormula::pred("reachable", vec![FolTerm::var("g")])).unwrap();
                assert_eq!(r, all.contains(c));
            }
        }
    }

    #[test]
    fn init_holds_exactly_on_initials() {
        let m = canonical_model(&complete_input_enabledness(&counter()), 3).unwrap();
        let i = induced_interpretation(&m, 3);
        for (k, c) in m.configs().iter().enumerate() {
            let mut ev = Evaluator {
                i: &i,
                env: vec![("g".into(), Value::Conf(k))],
                free: HashMap::new(),
                memo: HashMap::new(),
                reach: HashMap::new(),
                initials: m.initial_indices(),
            };
            let r = ev.formula(&FolFormula::pred("init", vec![FolTerm::var("g")])).unwrap();
            assert_eq!(r, m.initials().contains(c));
        }
    }

    #[test]
    fn obligations_hold_on_the_canonical_counter() {
        let u = counter();
        let t = simplify_theory(&machine_theory(&u, true).unwrap());
        let le4 = parse_predicate("cnt <= 4", &u.attributes, &[]).unwrap();
        let cfg =
            ObligationConfig::from_predicates(&[("s1".into(), le4.clone()), ("s2".into(), le4.clone())], &le4).unwrap();
        let o = gen_obligations(&t, &u, &cfg).unwrap();
        let m = canonical_model(&complete_input_enabledness(&u), 4).unwrap();
        let i = induced_interpretation(&m, 4).with_definitions_from(&o);
        for a in o.axioms.iter().filter(|a| a.origin != crate::folgen::Origin::Frame) {
            assert!(eval_fol(&i, &a.formula, 4).unwrap(), "{}", a.label);
        }
        for (l, g) in &o.goals {
            assert!(eval_fol(&i, g, 4).unwrap(), "{l}");
        }
    }

    #[test]
    fn witness_constants_can_be_overridden() {
        let m = canonical_model(&counter(), 2).unwrap();
        let f = FolFormula::exists(
            vec![("g".into(), Sort::Conf)],
            FolFormula::and(
                FolFormula::pred("init", vec![FolTerm::var("g")]),
                FolFormula::eq(FolTerm::app("ctrl", vec![FolTerm::var("g")]), FolTerm::constant("s1")),
            ),
        );
        let i = induced_interpretation(&m, 2);
        assert!(eval_fol(&i, &f, 2).unwrap());
        let s2 = m.controls().iter().position(|c| c == "s2").unwrap() as u32;
        assert!(!eval_fol(&i.with_constant("s1", Value::Ctrl(s2)), &f, 2).unwrap());
    }

    fn frame_reach_axioms() -> Vec<FolFormula> {
        let sig = counter().signature();
        let t = nu_sig(&sig).unwrap();
        ["reach_refl", "reach_step", "reach2_def", "reach1_def", "init_exists", "init_single"]
            .iter()
            .map(|l| t.axiom(l).unwrap().formula.clone())
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn comorphism_satisfaction(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = random_signature(&mut rng);
            let m = random_structure(&sig, 3, 2, 8, &mut rng);
            let rho = random_sentence(&sig, 3, &mut rng);
            let i = induced_interpretation(&m, 2);
            let lhs = sat_sentence(&m, &rho, 2).unwrap();
            let rhs = eval_fol(&i, &nu_sen(&sig, &rho).unwrap(), 2).unwrap();
            prop_assert_eq!(lhs, rhs, "{}", rho);
        }

        #[test]
        fn reach_closure_axioms_hold(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = complete_input_enabledness(&counter());
            let sig = u.signature();
            let m = random_structure(&sig, 2, 2, 10, &mut rng);
            let i = induced_interpretation(&m, 2);
            for f in frame_reach_axioms() {
                prop_assert!(eval_fol(&i, &f, 2).unwrap());
            }
        }

        #[test]
        fn simplification_preserves_outcomes(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = counter();
            let sig = u.signature();
            let m = random_structure(&sig, 2, 3, 10, &mut rng);
            let t = machine_theory(&u, rng.gen_bool(0.5)).unwrap();
            let s = simplify_theory(&t);
            let i = induced_interpretation(&m, 3);
            let whole = eval_fol(&i, &t.axiom("machine").unwrap().formula, 3).unwrap();
            let parts = s
                .axioms
                .iter()
                .filter(|a| a.origin == crate::folgen::Origin::Machine)
                .map(|a| eval_fol(&i, &a.formula, 3))
                .collect::<Result<Vec<_>, _>>()
                .unwrap();
            // Lifting conjuncts out of guarded positions only strengthens.
            prop_assert!(!parts.iter().all(|b| *b) || whole);
        }
    }
}
