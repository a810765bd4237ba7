//! Estimated description length of expressions in bits.
//!
//! The cost of a subgraph expression is a sum of chain-rule terms, one
//! per predicate and per bound object, each the log2 of a 1-based rank
//! under the context established by the preceding atoms:
//!
//! * `p0(x, I0)`: k(p0) globally, k(I0 | p0).
//! * `p0(x, y) ∧ p1(y, I1)`: k(p0), k(p1 | join p0), k(I1 | p0 ∧ p1).
//! * path + star adds k(p2 | join p0) and k(I2 | p0 ∧ p1 ∧ p2).
//! * `p0(x, y) ∧ p1(x, y)`: k(p0), k(p1 | closing p0).
//! * three closed atoms add k(p2 | closing p0 ∧ p1).
//!
//! A conjunction costs the sum of its components, with repeated
//! predicates charged in full each time.
//!
//! In exact mode a [`Cost`] carries the product of its ranks as an exact
//! integer next to the floating-point bit value: log sums become integer
//! products, so additivity and comparisons hold to full precision and do
//! not depend on summation order. Fitted mode works on floating-point
//! bits only, since fitted estimates are not logs of integers.

use crate::expr::{Expression, SubgraphExpression};
use crate::prominence::{ClosingPrefix, ProminenceModel, RankContext, RankError, RankMode};
use crate::store::TripleStore;
use crate::term::{PredId, Term};
use num_bigint::BigUint;
use std::cmp::Ordering;
use std::fmt;

/// A bit cost; ordered, additive, exact when built from ranks.
#[derive(Debug, Clone)]
pub struct Cost {
    bits: f64,
    /// Product of the 1-based ranks behind `bits`; `None` for fitted
    /// estimates.
    exact: Option<BigUint>,
}

impl Cost {
    pub fn zero() -> Self {
        Cost { bits: 0.0, exact: Some(BigUint::from(1u32)) }
    }

    pub fn from_rank(rank: u64) -> Self {
        assert!(rank >= 1, "ranks are 1-based");
        Cost { bits: (rank as f64).log2(), exact: Some(BigUint::from(rank)) }
    }

    pub fn from_bits(bits: f64) -> Self {
        Cost { bits, exact: None }
    }

    pub fn bits(&self) -> f64 {
        self.bits
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn rank_product(&self) -> Option<&BigUint> {
        self.exact.as_ref()
    }

    pub fn plus(&self, other: &Cost) -> Cost {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Cost { bits: self.bits + other.bits, exact }
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a.cmp(b),
            _ => self.bits.total_cmp(&other.bits),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} bits", self.bits)
    }
}

fn predicate_cost(
    model: &ProminenceModel,
    store: &TripleStore,
    p: PredId,
    ctx: RankContext,
) -> Result<Cost, RankError> {
    let rank = model.conditional_predicate_rank(store, p, ctx)?;
    Ok(match model.mode() {
        RankMode::Exact => Cost::from_rank(rank as u64),
        RankMode::Fitted => Cost::from_bits((rank as f64).log2()),
    })
}

fn object_cost(
    model: &ProminenceModel,
    store: &TripleStore,
    term: Term,
    ctx: RankContext,
) -> Result<Cost, RankError> {
    Ok(match model.mode() {
        RankMode::Exact => Cost::from_rank(model.conditional_entity_rank(store, term, ctx)? as u64),
        RankMode::Fitted => Cost::from_bits(model.estimated_rank_bits(store, term, ctx)?),
    })
}

/// The chain-rule cost of one subgraph expression.
pub fn bits_of_subgraph(
    model: &ProminenceModel,
    store: &TripleStore,
    se: &SubgraphExpression,
) -> Result<Cost, RankError> {
    let mut cost = Cost::zero();
    match *se {
        SubgraphExpression::OneAtom { predicate, object } => {
            cost =
                cost.plus(&predicate_cost(model, store, predicate, RankContext::GlobalPredicate)?);
            cost = cost.plus(&object_cost(
                model,
                store,
                object,
                RankContext::ObjectOfPredicate(predicate),
            )?);
        }
        SubgraphExpression::Path { first, second, object } => {
            cost = cost.plus(&predicate_cost(model, store, first, RankContext::GlobalPredicate)?);
            cost = cost.plus(&predicate_cost(
                model,
                store,
                second,
                RankContext::JoinPredicate(first),
            )?);
            cost = cost.plus(&object_cost(
                model,
                store,
                object,
                RankContext::ObjectOfJoin(first, second),
            )?);
        }
        SubgraphExpression::PathStar { first, star } => {
            let (p1, o1) = star[0];
            let (p2, o2) = star[1];
            cost = cost.plus(&predicate_cost(model, store, first, RankContext::GlobalPredicate)?);
            cost = cost.plus(&predicate_cost(model, store, p1, RankContext::JoinPredicate(first))?);
            cost = cost.plus(&object_cost(model, store, o1, RankContext::ObjectOfJoin(first, p1))?);
            cost = cost.plus(&predicate_cost(
                model,
                store,
                p2,
                RankContext::StarPredicate(first, p1),
            )?);
            cost = cost.plus(&object_cost(
                model,
                store,
                o2,
                RankContext::ObjectOfStar(first, p1, p2),
            )?);
        }
        SubgraphExpression::Closed2 { predicates } => {
            let [p0, p1] = predicates;
            cost = cost.plus(&predicate_cost(model, store, p0, RankContext::GlobalPredicate)?);
            cost = cost.plus(&predicate_cost(
                model,
                store,
                p1,
                RankContext::ClosingPredicate(ClosingPrefix::One(p0)),
            )?);
        }
        SubgraphExpression::Closed3 { predicates } => {
            let [p0, p1, p2] = predicates;
            cost = cost.plus(&predicate_cost(model, store, p0, RankContext::GlobalPredicate)?);
            cost = cost.plus(&predicate_cost(
                model,
                store,
                p1,
                RankContext::ClosingPredicate(ClosingPrefix::One(p0)),
            )?);
            cost = cost.plus(&predicate_cost(
                model,
                store,
                p2,
                RankContext::ClosingPredicate(ClosingPrefix::Two(p0, p1)),
            )?);
        }
    }
    Ok(cost)
}

/// Sum of the component costs.
pub fn bits_of_expression(
    model: &ProminenceModel,
    store: &TripleStore,
    e: &Expression,
) -> Result<Cost, RankError> {
    let mut total = Cost::zero();
    for c in &e.components {
        total = total.plus(&bits_of_subgraph(model, store, c)?);
    }
    Ok(total)
}
