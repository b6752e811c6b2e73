//! Terms and predicates over the natural numbers.
//!
//! A single [`Predicate`] type serves both as a state predicate (guards, no
//! primed attributes) and as a transition predicate (effects, primed
//! attributes read the post state).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Total assignment of attribute names to values.
pub type DataState = BTreeMap<String, u64>;

/// Assignment of event parameters to values.
pub type Valuation = BTreeMap<String, u64>;

/// Attribute renaming `α : A → A'`.
pub type DataMorphism = BTreeMap<String, String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("primed attribute `{0}'` used without a post state")]
    MissingPostState(String),
    #[error("attribute `{0}` is outside the morphism's domain")]
    Unmapped(String),
    #[error("arithmetic overflow")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataTerm {
    Zero,
    Suc(Box<DataTerm>),
    Num(u64),
    Attr { name: String, primed: bool },
    Var(String),
    Add(Box<DataTerm>, Box<DataTerm>),
    Mul(Box<DataTerm>, Box<DataTerm>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    EqEq,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    True,
    False,
    Cmp(CmpOp, DataTerm, DataTerm),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Implies(Box<Predicate>, Box<Predicate>),
    Iff(Box<Predicate>, Box<Predicate>),
}

impl DataTerm {
    pub fn attr(name: &str) -> Self {
        DataTerm::Attr { name: name.to_string(), primed: false }
    }

    pub fn primed(name: &str) -> Self {
        DataTerm::Attr { name: name.to_string(), primed: true }
    }

    pub fn var(name: &str) -> Self {
        DataTerm::Var(name.to_string())
    }

    pub fn add(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::Mul(Box::new(a), Box::new(b))
    }

    fn visit(&self, f: &mut impl FnMut(&DataTerm)) {
        f(self);
        match self {
            DataTerm::Suc(t) => t.visit(f),
            DataTerm::Add(a, b) | DataTerm::Mul(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    fn try_map_attrs(
        &self,
        f: &mut impl FnMut(&str, bool) -> Result<DataTerm, DataError>,
    ) -> Result<DataTerm, DataError> {
        Ok(match self {
            DataTerm::Attr { name, primed } => f(name, *primed)?,
            DataTerm::Suc(t) => DataTerm::Suc(Box::new(t.try_map_attrs(f)?)),
            DataTerm::Add(a, b) => DataTerm::add(a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            DataTerm::Mul(a, b) => DataTerm::mul(a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            other => other.clone(),
        })
    }

    fn prec(&self) -> u8 {
        match self {
            DataTerm::Add(..) => 1,
            DataTerm::Mul(..) => 2,
            _ => 3,
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::EqEq => "==",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            CmpOp::Eq | CmpOp::EqEq => a == b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::EqEq, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
}

impl Predicate {
    pub fn cmp(op: CmpOp, a: DataTerm, b: DataTerm) -> Self {
        Predicate::Cmp(op, a, b)
    }

    pub fn not(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    pub fn and(a: Predicate, b: Predicate) -> Self {
        Predicate::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Predicate, b: Predicate) -> Self {
        Predicate::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Predicate, b: Predicate) -> Self {
        Predicate::Implies(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Predicate>) -> Self {
        items.into_iter().reduce(Predicate::and).unwrap_or(Predicate::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Predicate>) -> Self {
        items.into_iter().reduce(Predicate::or).unwrap_or(Predicate::False)
    }

    fn terms(&self, f: &mut impl FnMut(&DataTerm)) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Predicate::Not(p) => p.terms(f),
            Predicate::And(a, b) | Predicate::Or(a, b) | Predicate::Implies(a, b) | Predicate::Iff(a, b) => {
                a.terms(f);
                b.terms(f);
            }
        }
    }

    /// Attribute references as `(name, primed)` pairs.
    pub fn attributes(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        self.terms(&mut |t| {
            if let DataTerm::Attr { name, primed } = t {
                out.insert((name.clone(), *primed));
            }
        });
        out
    }

    pub fn has_primed(&self) -> bool {
        self.attributes().iter().any(|(_, p)| *p)
    }

    /// Applies `f` to every attribute reference.
    pub fn try_map_attrs(
        &self,
        f: &mut impl FnMut(&str, bool) -> Result<DataTerm, DataError>,
    ) -> Result<Predicate, DataError> {
        Ok(match self {
            Predicate::True => Predicate::True,
            Predicate::False => Predicate::False,
            Predicate::Cmp(op, a, b) => Predicate::Cmp(*op, a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            Predicate::Not(p) => Predicate::not(p.try_map_attrs(f)?),
            Predicate::And(a, b) => Predicate::and(a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            Predicate::Or(a, b) => Predicate::or(a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            Predicate::Implies(a, b) => Predicate::implies(a.try_map_attrs(f)?, b.try_map_attrs(f)?),
            Predicate::Iff(a, b) => Predicate::Iff(Box::new(a.try_map_attrs(f)?), Box::new(b.try_map_attrs(f)?)),
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Predicate::Iff(..) => 1,
            Predicate::Implies(..) => 2,
            Predicate::Or(..) => 3,
            Predicate::And(..) => 4,
            _ => 5,
        }
    }
}

pub fn eval_term(
    term: &DataTerm,
    pre: &DataState,
    post: Option<&DataState>,
    beta: &Valuation,
) -> Result<u64, DataError> {
    match term {
        DataTerm::Zero => Ok(0),
        DataTerm::Num(n) => Ok(*n),
        DataTerm::Suc(t) => eval_term(t, pre, post, beta)?.checked_add(1).ok_or(DataError::Overflow),
        DataTerm::Attr { name, primed: false } => {
            pre.get(name).copied().ok_or_else(|| DataError::UnknownAttribute(name.clone()))
        }
        DataTerm::Attr { name, primed: true } => {
            let post = post.ok_or_else(|| DataError::MissingPostState(name.clone()))?;
            post.get(name).copied().ok_or_else(|| DataError::UnknownAttribute(name.clone()))
        }
        DataTerm::Var(x) => beta.get(x).copied().ok_or_else(|| DataError::UnknownVariable(x.clone())),
        DataTerm::Add(a, b) => {
            eval_term(a, pre, post, beta)?.checked_add(eval_term(b, pre, post, beta)?).ok_or(DataError::Overflow)
        }
        DataTerm::Mul(a, b) => {
            eval_term(a, pre, post, beta)?.checked_mul(eval_term(b, pre, post, beta)?).ok_or(DataError::Overflow)
        }
    }
}

pub fn sat_pred(
    pred: &Predicate,
    pre: &DataState,
    post: Option<&DataState>,
    beta: &Valuation,
) -> Result<bool, DataError> {
    Ok(match pred {
        Predicate::True => true,
        Predicate::False => false,
        Predicate::Cmp(op, a, b) => op.holds(eval_term(a, pre, post, beta)?, eval_term(b, pre, post, beta)?),
        Predicate::Not(p) => !sat_pred(p, pre, post, beta)?,
        Predicate::And(a, b) => sat_pred(a, pre, post, beta)? && sat_pred(b, pre, post, beta)?,
        Predicate::Or(a, b) => sat_pred(a, pre, post, beta)? || sat_pred(b, pre, post, beta)?,
        Predicate::Implies(a, b) => !sat_pred(a, pre, post, beta)? || sat_pred(b, pre, post, beta)?,
        Predicate::Iff(a, b) => sat_pred(a, pre, post, beta)? == sat_pred(b, pre, post, beta)?,
    })
}

/// Renames attributes along `alpha`; primed references stay primed.
pub fn translate_pred(alpha: &DataMorphism, pred: &Predicate) -> Result<Predicate, DataError> {
    pred.try_map_attrs(&mut |name, primed| match alpha.get(name) {
        Some(target) => Ok(DataTerm::Attr { name: target.clone(), primed }),
        None => Err(DataError::Unmapped(name.to_string())),
    })
}

pub fn free_vars(pred: &Predicate) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    pred.terms(&mut |t| {
        if let DataTerm::Var(x) = t {
            out.insert(x.clone());
        }
    });
    out
}

/// Reads the data state `ω ∘ α` over the source signature of `alpha`.
pub fn reduct_state(alpha: &DataMorphism, state: &DataState) -> Result<DataState, DataError> {
    alpha
        .iter()
        .map(|(a, b)| state.get(b).map(|v| (a.clone(), *v)).ok_or_else(|| DataError::UnknownAttribute(b.clone())))
        .collect()
}

impl fmt::Display for DataTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, t: &DataTerm, need: bool| {
            if need {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        };
        match self {
            DataTerm::Zero => write!(f, "0"),
            DataTerm::Num(n) => write!(f, "{n}"),
            DataTerm::Suc(t) => write!(f, "suc({t})"),
            DataTerm::Attr { name, primed } => write!(f, "{name}{}", if *primed { "'" } else { "" }),
            DataTerm::Var(x) => write!(f, "{x}"),
            DataTerm::Add(a, b) | DataTerm::Mul(a, b) => {
                let (p, op) = if matches!(self, DataTerm::Add(..)) { (1, "+") } else { (2, "*") };
                wrap(f, a, a.prec() < p)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.prec() <= p)
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, p: &Predicate, need: bool| {
            if need {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        };
        match self {
            Predicate::True => write!(f, "true"),
            Predicate::False => write!(f, "false"),
            Predicate::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Predicate::Not(p) => {
                write!(f, "!")?;
                wrap(f, p, p.prec() < 5 || matches!(**p, Predicate::Cmp(..)))
            }
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                let (p, op) = if matches!(self, Predicate::And(..)) { (4, "/\\") } else { (3, "\\/") };
                wrap(f, a, a.prec() < p)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.prec() <= p)
            }
            Predicate::Implies(a, b) => {
                wrap(f, a, a.prec() <= 2)?;
                write!(f, " => ")?;
                wrap(f, b, b.prec() < 2)
            }
            Predicate::Iff(a, b) => {
                wrap(f, a, a.prec() <= 1)?;
                write!(f, " <=> ")?;
                wrap(f, b, b.prec() <= 1)
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    pub fn term(attrs: Vec<String>, vars: Vec<String>, primed: bool) -> BoxedStrategy<DataTerm> {
        let mut leaves: Vec<BoxedStrategy<DataTerm>> = vec![(0u64..4).prop_map(DataTerm::Num).boxed()];
        if !attrs.is_empty() {
            let a = attrs.clone();
            leaves.push(
                (proptest::sample::select(a), proptest::bool::ANY)
                    .prop_map(move |(name, p)| DataTerm::Attr { name, primed: p && primed })
                    .boxed(),
            );
        }
        if !vars.is_empty() {
            leaves.push(proptest::sample::select(vars).prop_map(DataTerm::Var).boxed());
        }
        let leaf = proptest::strategy::Union::new(leaves);
        leaf.prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| DataTerm::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| DataTerm::mul(a, b)),
                inner.prop_map(|t| DataTerm::Suc(Box::new(t))),
            ]
        })
        .boxed()
    }

    pub fn pred(attrs: Vec<String>, vars: Vec<String>, primed: bool) -> BoxedStrategy<Predicate> {
        let t = term(attrs, vars, primed);
        let atom = prop_oneof![
            Just(Predicate::True),
            Just(Predicate::False),
            (proptest::sample::select(CmpOp::ALL.to_vec()), t.clone(), t)
                .prop_map(|(op, a, b)| Predicate::Cmp(op, a, b)),
        ];
        atom.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Predicate::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Predicate::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Predicate::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Predicate::implies(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Predicate::Iff(Box::new(a), Box::new(b))),
            ]
        })
        .boxed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(pairs: &[(&str, u64)]) -> DataState {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn cnt_plus_x() -> DataTerm {
        DataTerm::add(DataTerm::attr("cnt"), DataTerm::var("x"))
    }

    #[test]
    fn additive_unit() {
        let v = eval_term(&cnt_plus_x(), &st(&[("cnt", 3)]), None, &st(&[("x", 0)])).unwrap();
        assert_eq!(v, 3);
    }

    #[test]
    fn constructor_tower() {
        let t = DataTerm::Suc(Box::new(DataTerm::Suc(Box::new(DataTerm::Zero))));
        assert_eq!(eval_term(&t, &DataState::new(), None, &Valuation::new()).unwrap(), 2);
    }

    #[test]
    fn decimal_numeral_matches_digit_composition() {
        // m @@ n = m * suc(9) + n
        let composed =
            DataTerm::add(DataTerm::mul(DataTerm::Num(1), DataTerm::Suc(Box::new(DataTerm::Num(9)))), DataTerm::Num(4));
        let empty = DataState::new();
        let v = eval_term(&composed, &empty, None, &Valuation::new()).unwrap();
        assert_eq!(v, eval_term(&DataTerm::Num(14), &empty, None, &Valuation::new()).unwrap());
        assert_eq!(v, 14);
    }

    #[test]
    fn guard_with_three() {
        let p = Predicate::cmp(CmpOp::Le, cnt_plus_x(), DataTerm::Num(4));
        assert!(sat_pred(&p, &st(&[("cnt", 3)]), None, &st(&[("x", 0)])).unwrap());
    }

    #[test]
    fn effect_of_inc_two() {
        let p = Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), cnt_plus_x());
        let ok = sat_pred(&p, &st(&[("cnt", 2)]), Some(&st(&[("cnt", 4)])), &st(&[("x", 2)]));
        assert!(ok.unwrap());
    }

    #[test]
    fn negation() {
        let p = Predicate::not(Predicate::cmp(CmpOp::Le, DataTerm::attr("cnt"), DataTerm::Num(4)));
        assert!(sat_pred(&p, &st(&[("cnt", 5)]), None, &Valuation::new()).unwrap());
    }

    #[test]
    fn primed_without_post_is_an_error() {
        let p = Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), DataTerm::Num(0));
        let err = sat_pred(&p, &st(&[("cnt", 0)]), None, &Valuation::new()).unwrap_err();
        assert_eq!(err, DataError::MissingPostState("cnt".into()));
    }

    #[test]
    fn translation_renames_both_copies() {
        let alpha: DataMorphism = [("cnt".to_string(), "counter".to_string())].into();
        let guard = Predicate::cmp(CmpOp::Le, cnt_plus_x(), DataTerm::Num(4));
        assert_eq!(translate_pred(&alpha, &guard).unwrap().to_string(), "counter + x <= 4");
        let effect = Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), cnt_plus_x());
        assert_eq!(translate_pred(&alpha, &effect).unwrap().to_string(), "counter' = counter + x");
        let empty = DataMorphism::new();
        assert_eq!(translate_pred(&empty, &guard), Err(DataError::Unmapped("cnt".into())));
    }

    #[test]
    fn free_variables() {
        let guard = Predicate::cmp(CmpOp::Le, cnt_plus_x(), DataTerm::Num(4));
        assert_eq!(free_vars(&guard), BTreeSet::from(["x".to_string()]));
        assert!(free_vars(&Predicate::True).is_empty());
        let frame = Predicate::cmp(CmpOp::Eq, DataTerm::primed("cnt"), DataTerm::attr("cnt"));
        assert!(free_vars(&frame).is_empty());
    }

    #[test]
    fn rendering_uses_minimal_parentheses() {
        let t = DataTerm::mul(DataTerm::add(DataTerm::var("a"), DataTerm::var("b")), DataTerm::var("c"));
        assert_eq!(t.to_string(), "(a + b) * c");
        let p = Predicate::not(Predicate::or(
            Predicate::cmp(CmpOp::Le, cnt_plus_x(), DataTerm::Num(4)),
            Predicate::cmp(CmpOp::Eq, cnt_plus_x(), DataTerm::Num(4)),
        ));
        assert_eq!(p.to_string(), "!(cnt + x <= 4 \\/ cnt + x = 4)");
        let q = Predicate::and(Predicate::True, Predicate::not(Predicate::False));
        assert_eq!(q.to_string(), "true /\\ !false");
    }

    fn state_of(attrs: &[String], values: &[u64]) -> DataState {
        attrs.iter().cloned().zip(values.iter().copied()).collect()
    }

    proptest! {
        #[test]
        fn satisfaction_condition_along_renamings(
            map in proptest::collection::vec(0usize..3, 2),
            pred in strategies::pred(vec!["a".into(), "b".into()], vec!["x".into()], true),
            pre in proptest::collection::vec(0u64..5, 3),
            post in proptest::collection::vec(0u64..5, 3),
            x in 0u64..5,
        ) {
            let target: Vec<String> = vec!["p".into(), "q".into(), "r".into()];
            let alpha: DataMorphism = ["a", "b"].iter().zip(&map)
                .map(|(s, i)| (s.to_string(), target[*i].clone())).collect();
            let pre_t = state_of(&target, &pre);
            let post_t = state_of(&target, &post);
            let beta: Valuation = [("x".to_string(), x)].into();
            let lhs = sat_pred(
                &pred,
                &reduct_state(&alpha, &pre_t).unwrap(),
                Some(&reduct_state(&alpha, &post_t).unwrap()),
                &beta,
            );
            let rhs = sat_pred(&translate_pred(&alpha, &pred).unwrap(), &pre_t, Some(&post_t), &beta);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn eq_and_eqeq_agree(a in strategies::term(vec!["a".into()], vec!["x".into()], false),
                             b in strategies::term(vec!["a".into()], vec!["x".into()], false),
                             av in 0u64..5, xv in 0u64..5) {
            let pre: DataState = [("a".to_string(), av)].into();
            let beta: Valuation = [("x".to_string(), xv)].into();
            let p = sat_pred(&Predicate::Cmp(CmpOp::Eq, a.clone(), b.clone()), &pre, None, &beta);
            let q = sat_pred(&Predicate::Cmp(CmpOp::EqEq, a, b), &pre, None, &beta);
            prop_assert_eq!(p, q);
        }

        #[test]
        fn evaluation_is_total_on_scoped_terms(t in strategies::term(vec!["a".into()], vec!["x".into()], true),
                                               av in 0u64..5, bv in 0u64..5, xv in 0u64..5) {
            let pre: DataState = [("a".to_string(), av)].into();
            let post: DataState = [("a".to_string(), bv)].into();
            let beta: Valuation = [("x".to_string(), xv)].into();
            prop_assert!(eval_term(&t, &pre, Some(&post), &beta).is_ok());
        }
    }
}
