//! Evaluation of atoms, subgraph expressions and conjunctions against
//! the store.
//!
//! All results come back sorted and deduplicated, so callers can compare
//! and intersect them without further normalization. Subgraph and atom
//! results pass through the store's LRU cache; cache hits and misses are
//! observationally identical.
//!
//! The join variable y of multi-atom shapes ranges over entities and
//! blank nodes only. For paths this is forced by RDF itself (y occurs in
//! subject position), and closed shapes follow the same rule so that
//! their evaluation agrees with how they are derived.

use crate::expr::{Arg, Assignment, Atom, Expression, SubgraphExpression};
use crate::store::{CacheKey, CacheValue, TripleStore};
use crate::term::{PredId, Term, TermKind};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("atom has no variables")]
    GroundAtom,
}

impl TripleStore {
    /// All assignments σ of the atom's variables with μ_σ(atom) in the
    /// store, in deterministic order.
    pub fn match_atom(&self, atom: &Atom) -> Result<Arc<Vec<Assignment>>, EvalError> {
        if !atom.has_variable() {
            return Err(EvalError::GroundAtom);
        }
        let key = CacheKey::Atom(*atom);
        if let Some(CacheValue::Assignments(hit)) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit);
        }
        let assignments = Arc::new(self.compute_atom_matches(atom));
        self.cache.lock().unwrap().insert(key, CacheValue::Assignments(Arc::clone(&assignments)));
        Ok(assignments)
    }

    fn compute_atom_matches(&self, atom: &Atom) -> Vec<Assignment> {
        let p = atom.predicate;
        match (atom.subject, atom.object) {
            (Arg::Variable(vs), Arg::Variable(vo)) if vs == vo => self
                .triples_of_predicate(p)
                .iter()
                .filter(|t| t.subject == t.object)
                .map(|t| Assignment::from([(vs, t.subject)]))
                .collect(),
            (Arg::Variable(vs), Arg::Variable(vo)) => self
                .triples_of_predicate(p)
                .iter()
                .map(|t| Assignment::from([(vs, t.subject), (vo, t.object)]))
                .collect(),
            (Arg::Variable(vs), Arg::Constant(o)) => self
                .subjects_with_object(p, o)
                .iter()
                .map(|s| Assignment::from([(vs, *s)]))
                .collect(),
            (Arg::Constant(s), Arg::Variable(vo)) => {
                self.objects_of(s, p).iter().map(|o| Assignment::from([(vo, *o)])).collect()
            }
            (Arg::Constant(_), Arg::Constant(_)) => {
                unreachable!("guarded by has_variable")
            }
        }
    }

    /// The root-variable values over all matching assignments of ρ,
    /// sorted and deduplicated.
    pub fn bindings_of_subgraph(&self, se: &SubgraphExpression) -> Arc<Vec<Term>> {
        let key = CacheKey::Subgraph(*se);
        if let Some(CacheValue::Bindings(hit)) = self.cache.lock().unwrap().get(&key) {
            return hit;
        }
        let bindings = Arc::new(self.compute_subgraph_bindings(se));
        self.cache.lock().unwrap().insert(key, CacheValue::Bindings(Arc::clone(&bindings)));
        bindings
    }

    fn compute_subgraph_bindings(&self, se: &SubgraphExpression) -> Vec<Term> {
        match *se {
            SubgraphExpression::OneAtom { predicate, object } => {
                self.subjects_with_object(predicate, object).to_vec()
            }
            SubgraphExpression::Path { first, second, object } => {
                let mut roots = Vec::new();
                for y in self.subjects_with_object(second, object) {
                    roots.extend_from_slice(self.subjects_with_object(first, *y));
                }
                roots.sort_unstable();
                roots.dedup();
                roots
            }
            SubgraphExpression::PathStar { first, star } => {
                let ys = intersect_sorted(
                    self.subjects_with_object(star[0].0, star[0].1),
                    self.subjects_with_object(star[1].0, star[1].1),
                );
                let mut roots = Vec::new();
                for y in ys {
                    roots.extend_from_slice(self.subjects_with_object(first, y));
                }
                roots.sort_unstable();
                roots.dedup();
                roots
            }
            SubgraphExpression::Closed2 { predicates } => self.closed_bindings(&predicates),
            SubgraphExpression::Closed3 { predicates } => self.closed_bindings(&predicates),
        }
    }

    fn closed_bindings(&self, predicates: &[PredId]) -> Vec<Term> {
        let rarest = *predicates
            .iter()
            .min_by_key(|p| self.predicate_count(**p))
            .expect("closed shape has predicates");
        let mut roots: Vec<Term> = self
            .triples_of_predicate(rarest)
            .iter()
            .filter(|t| t.object.kind != TermKind::Literal)
            .filter(|t| {
                predicates.iter().all(|p| *p == rarest || self.has_triple(t.subject, *p, t.object))
            })
            .map(|t| t.subject)
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    /// Intersection of the component binding sets; components share only
    /// the root variable, so the intersection is exact.
    pub fn bindings_of_expression(&self, e: &Expression) -> Vec<Term> {
        let mut components = e.components.iter();
        let Some(first) = components.next() else {
            return Vec::new();
        };
        let mut acc: Vec<Term> = self.bindings_of_subgraph(first).as_ref().clone();
        for c in components {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, &self.bindings_of_subgraph(c));
        }
        acc
    }

    /// True iff the bindings of `e` are exactly `targets`.
    pub fn is_referring_expression(&self, e: &Expression, targets: &[Term]) -> bool {
        let mut wanted = targets.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        self.bindings_of_expression(e) == wanted
    }
}

/// Intersects two sorted, deduplicated slices.
pub fn intersect_sorted(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
