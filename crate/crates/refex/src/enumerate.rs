//! Deriving the subgraph expressions of an entity, intersecting them
//! across targets, and building the complexity-sorted candidate queue.
//!
//! Derivation is breadth-first from the entity t: one-atom expressions
//! come straight from t's facts, two- and three-atom expressions are
//! reached through a witness object y of t. Three heuristics shape the
//! output:
//!
//! * one-atom expressions never bind a blank node, but paths that hide a
//!   blank behind the join variable are kept;
//! * no multi-atom expression is derived through a witness that belongs
//!   to the most prominent entities (by fact frequency, cutoff
//!   configurable, a fraction of 1 or more disables the pruning);
//! * predicates can be excluded wholesale: an explicit blocklist, an
//!   inverse-predicate switch, and a standard-language switch that
//!   restricts the output to one-atom shapes.

use crate::complexity::{bits_of_subgraph, Cost};
use crate::expr::SubgraphExpression;
use crate::prominence::{ProminenceModel, RankError};
use crate::store::TripleStore;
use crate::term::{PredId, Term, TermKind};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

/// Which grammar of subgraph expressions to derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    /// Bound single atoms only.
    Standard,
    /// All five shapes.
    Extended,
}

#[derive(Debug, Clone)]
pub struct EnumOptions {
    pub language: Language,
    /// Fraction of entities counting as prominent; witnesses in this set
    /// are not expanded. 1.0 or more disables the pruning.
    pub prominent_cutoff: f64,
    pub exclude_predicates: HashSet<PredId>,
    pub include_inverse: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            language: Language::Extended,
            prominent_cutoff: 0.05,
            exclude_predicates: HashSet::new(),
            include_inverse: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum EnumError {
    #[error("target {0} is not an entity")]
    NotAnEntity(String),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// All admissible subgraph expressions that describe `t`, sorted into a
/// deterministic order.
pub fn subgraph_expressions_of_entity(
    store: &TripleStore,
    model: &ProminenceModel,
    t: Term,
    opts: &EnumOptions,
) -> Result<Vec<SubgraphExpression>, EnumError> {
    check_entity(store, t)?;
    let prominent = model.fr_top_entities(opts.prominent_cutoff);
    let mut out: Vec<SubgraphExpression> =
        expressions_of(store, t, opts, &prominent).into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// The expressions shared by every target, sorted deterministically.
pub fn common_subgraphs(
    store: &TripleStore,
    model: &ProminenceModel,
    targets: &[Term],
    opts: &EnumOptions,
) -> Result<Vec<SubgraphExpression>, EnumError> {
    let mut iter = targets.iter();
    let Some(&first) = iter.next() else {
        return Ok(Vec::new());
    };
    check_entity(store, first)?;
    let prominent = model.fr_top_entities(opts.prominent_cutoff);
    let mut common = expressions_of(store, first, opts, &prominent);
    for &t in iter {
        check_entity(store, t)?;
        if common.is_empty() {
            break;
        }
        let theirs = expressions_of(store, t, opts, &prominent);
        common.retain(|se| theirs.contains(se));
    }
    let mut out: Vec<SubgraphExpression> = common.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

fn check_entity(store: &TripleStore, t: Term) -> Result<(), EnumError> {
    if t.kind != TermKind::Entity {
        return Err(EnumError::NotAnEntity(store.dict().term_display(t)));
    }
    Ok(())
}

fn expressions_of(
    store: &TripleStore,
    t: Term,
    opts: &EnumOptions,
    prominent: &HashSet<Term>,
) -> HashSet<SubgraphExpression> {
    let admissible = |p: PredId| {
        !opts.exclude_predicates.contains(&p)
            && (opts.include_inverse || !store.dict().is_inverse(p))
    };
    let witness_ok = |y: Term| match y.kind {
        TermKind::Blank => true,
        TermKind::Entity => !prominent.contains(&y),
        TermKind::Literal => false,
    };

    let mut out = HashSet::new();
    for (p, objects) in store.predicate_objects_of(t) {
        if !admissible(p) {
            continue;
        }
        for &o in objects {
            if o.kind != TermKind::Blank {
                out.insert(SubgraphExpression::one_atom(p, o));
            }
        }
    }
    if opts.language == Language::Standard {
        return out;
    }

    // Paths and stars through each admissible witness.
    for (p0, objects) in store.predicate_objects_of(t) {
        if !admissible(p0) {
            continue;
        }
        for &y in objects {
            if !witness_ok(y) {
                continue;
            }
            let mut star_atoms: Vec<(PredId, Term)> = Vec::new();
            for (p1, tails) in store.predicate_objects_of(y) {
                if !admissible(p1) {
                    continue;
                }
                for &i1 in tails {
                    if i1.kind != TermKind::Blank {
                        star_atoms.push((p1, i1));
                    }
                }
            }
            for &(p1, i1) in &star_atoms {
                out.insert(SubgraphExpression::path(p0, p1, i1));
            }
            for i in 0..star_atoms.len() {
                for j in i + 1..star_atoms.len() {
                    if let Some(se) = SubgraphExpression::path_star(
                        store.dict(),
                        p0,
                        star_atoms[i],
                        star_atoms[j],
                    ) {
                        out.insert(se);
                    }
                }
            }
        }
    }

    // Closed shapes: predicates of t sharing the same witness object.
    let mut preds_by_object: BTreeMap<Term, Vec<PredId>> = BTreeMap::new();
    for (p, objects) in store.predicate_objects_of(t) {
        if !admissible(p) {
            continue;
        }
        for &o in objects {
            if witness_ok(o) {
                preds_by_object.entry(o).or_default().push(p);
            }
        }
    }
    for preds in preds_by_object.values() {
        for i in 0..preds.len() {
            for j in i + 1..preds.len() {
                if let Some(se) = SubgraphExpression::closed2(store.dict(), preds[i], preds[j]) {
                    out.insert(se);
                }
                for k in j + 1..preds.len() {
                    if let Some(se) =
                        SubgraphExpression::closed3(store.dict(), preds[i], preds[j], preds[k])
                    {
                        out.insert(se);
                    }
                }
            }
        }
    }
    out
}

/// One costed candidate.
#[derive(Debug, Clone)]
pub struct QueueEntry {
    pub expr: SubgraphExpression,
    pub cost: Cost,
    /// Canonical text, used as the deterministic tie-break.
    pub text: String,
}

/// Candidates in non-decreasing cost order.
#[derive(Debug, Clone, Default)]
pub struct CandidateQueue {
    pub entries: Vec<QueueEntry>,
}

impl CandidateQueue {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The `k` least complex candidates (fewer when the queue is short).
    pub fn top_k(&self, k: usize) -> &[QueueEntry] {
        &self.entries[..k.min(self.entries.len())]
    }
}

/// Costs every expression (in parallel) and sorts by (cost, text).
pub fn build_queue(
    model: &ProminenceModel,
    store: &TripleStore,
    exprs: &[SubgraphExpression],
) -> Result<CandidateQueue, RankError> {
    let mut entries = exprs
        .par_iter()
        .map(|se| {
            let cost = bits_of_subgraph(model, store, se)?;
            Ok(QueueEntry { expr: *se, cost, text: se.display_with(store.dict()) })
        })
        .collect::<Result<Vec<QueueEntry>, RankError>>()?;
    entries.sort_by(|a, b| a.cost.cmp(&b.cost).then_with(|| a.text.cmp(&b.text)));
    entries.dedup_by(|a, b| a.expr == b.expr);
    Ok(CandidateQueue { entries })
}
