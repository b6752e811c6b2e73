//! Random signatures, morphisms, predicates and sentences for randomized
//! checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::datalogic::{CmpOp, DataMorphism, DataTerm, Predicate};
use crate::edhml::EdFormula;
use crate::eds::{EdMorphism, EdSignature};

/// One or two attributes; a unary or binary event `e` and a constant event `f`.
pub fn random_signature(rng: &mut impl Rng) -> EdSignature {
    EdSignature {
        attributes: if rng.gen_bool(0.5) { vec!["a".into(), "b".into()] } else { vec!["a".into()] },
        events: vec![
            ("e".into(), if rng.gen_bool(0.5) { vec!["x".into(), "y".into()] } else { vec!["x".into()] }),
            ("f".into(), vec![]),
        ],
    }
}

/// A random morphism into `target` whose source renames and merges events
/// and attributes.
pub fn random_morphism(target: &EdSignature, rng: &mut impl Rng) -> EdMorphism {
    let mut events = Vec::new();
    let mut event_map = BTreeMap::new();
    for (i, (e, p)) in target.events.iter().enumerate() {
        for k in 0..rng.gen_range(0..=2) {
            let name = format!("u{i}_{k}");
            let params = (0..p.len()).map(|j| format!("p{j}")).collect();
            events.push((name.clone(), params));
            event_map.insert(name, e.clone());
        }
    }
    let mut attributes = Vec::new();
    let mut data_map = DataMorphism::new();
    if !target.attributes.is_empty() {
        for k in 0..rng.gen_range(0..=2) {
            let name = format!("v{k}");
            attributes.push(name.clone());
            data_map.insert(name, target.attributes[rng.gen_range(0..target.attributes.len())].clone());
        }
    }
    EdMorphism { source: EdSignature { attributes, events }, target: target.clone(), event_map, data_map }
}

pub fn random_term(attrs: &[String], vars: &[String], primed: bool, depth: u32, rng: &mut impl Rng) -> DataTerm {
    if depth == 0 || rng.gen_bool(0.5) {
        let pick = rng.gen_range(0..3);
        return match pick {
            1 if !attrs.is_empty() => {
                let name = attrs.choose(rng).unwrap();
                if primed && rng.gen_bool(0.5) {
                    DataTerm::primed(name)
                } else {
                    DataTerm::attr(name)
                }
            }
            2 if !vars.is_empty() => DataTerm::var(vars.choose(rng).unwrap()),
            _ => DataTerm::Num(rng.gen_range(0..4)),
        };
    }
    let a = random_term(attrs, vars, primed, depth - 1, rng);
    match rng.gen_range(0..3) {
        0 => DataTerm::add(a, random_term(attrs, vars, primed, depth - 1, rng)),
        1 => DataTerm::mul(a, random_term(attrs, vars, primed, depth - 1, rng)),
        _ => DataTerm::Suc(Box::new(a)),
    }
}

pub fn random_pred(attrs: &[String], vars: &[String], primed: bool, depth: u32, rng: &mut impl Rng) -> Predicate {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..6) {
            0 => Predicate::True,
            1 => Predicate::False,
            _ => Predicate::cmp(
                *CmpOp::ALL.choose(rng).unwrap(),
                random_term(attrs, vars, primed, 1, rng),
                random_term(attrs, vars, primed, 1, rng),
            ),
        };
    }
    let a = random_pred(attrs, vars, primed, depth - 1, rng);
    match rng.gen_range(0..5) {
        0 => Predicate::not(a),
        1 => Predicate::and(a, random_pred(attrs, vars, primed, depth - 1, rng)),
        2 => Predicate::or(a, random_pred(attrs, vars, primed, depth - 1, rng)),
        3 => Predicate::implies(a, random_pred(attrs, vars, primed, depth - 1, rng)),
        _ => Predicate::Iff(Box::new(a), Box::new(random_pred(attrs, vars, primed, depth - 1, rng))),
    }
}

fn random_events(sig: &EdSignature, rng: &mut impl Rng) -> BTreeSet<String> {
    sig.events.iter().filter(|_| rng.gen_bool(0.6)).map(|(e, _)| e.clone()).collect()
}

fn formula(sig: &EdSignature, depth: u32, bound: &mut Vec<String>, rng: &mut impl Rng) -> EdFormula {
    if bound.is_empty() {
        let s = format!("z{}", bound.len());
        bound.push(s.clone());
        let body = formula(sig, depth.saturating_sub(1), bound, rng);
        bound.pop();
        return EdFormula::bind(&s, body);
    }
    if depth == 0 {
        return if rng.gen_bool(0.5) {
            EdFormula::var(bound.choose(rng).unwrap())
        } else {
            EdFormula::Data(random_pred(&sig.attributes, &[], false, 1, rng))
        };
    }
    let d = depth - 1;
    let choice = rng.gen_range(0..9);
    if (4..=6).contains(&choice) && !sig.events.is_empty() {
        let (event, params) = sig.events.choose(rng).unwrap().clone();
        let psi = random_pred(&sig.attributes, &params, true, 1, rng);
        let body = formula(sig, d, bound, rng);
        return match choice {
            4 => EdFormula::dia(&event, &params, psi, body),
            5 => EdFormula::wp(&event, &params, random_pred(&sig.attributes, &params, false, 1, rng), psi, body),
            _ => EdFormula::box_event(&event, &params, psi, body),
        };
    }
    match choice {
        0 => {
            let s = format!("z{}", bound.len());
            bound.push(s.clone());
            let body = formula(sig, d, bound, rng);
            bound.pop();
            EdFormula::bind(&s, body)
        }
        1 => {
            let s = bound.choose(rng).unwrap().clone();
            EdFormula::at(random_events(sig, rng), &s, formula(sig, d, bound, rng))
        }
        2 => EdFormula::always(random_events(sig, rng), formula(sig, d, bound, rng)),
        3 => EdFormula::not(formula(sig, d, bound, rng)),
        7 => EdFormula::and(formula(sig, d, bound, rng), formula(sig, d, bound, rng)),
        _ => EdFormula::or(formula(sig, d, bound, rng), formula(sig, d, bound, rng)),
    }
}

/// A random closed formula of modal depth at most `depth`.
pub fn random_sentence(sig: &EdSignature, depth: u32, rng: &mut impl Rng) -> EdFormula {
    formula(sig, depth, &mut Vec::new(), rng)
}
