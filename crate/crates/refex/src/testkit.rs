//! Test support: naive reference evaluation, exhaustive shape
//! enumeration, and deterministic corpus generators.
//!
//! Everything here favors obviousness over speed. The naive evaluator
//! ranges over all candidate terms and checks atoms one by one; the
//! exhaustive enumerator tries every constant combination. Production
//! code must agree with both on small inputs, which is what the
//! integration suites check.

use crate::expr::{Arg, Atom, Expression, SubgraphExpression, Var};
use crate::store::TripleStore;
use crate::term::{Dictionary, Term, TermKind};
use std::collections::BTreeSet;

/// Deterministic 64-bit generator (splitmix64) so corpus content is a
/// pure function of the seed, with no external randomness involved.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// True with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        (self.next_u64() >> 11) as f64 / ((1u64 << 53) as f64) < p
    }
}

/// Shape of a generated corpus.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub entities: usize,
    pub predicates: usize,
    pub triples: usize,
    pub blanks: usize,
    /// Probability that a triple's object is a literal.
    pub literal_share: f64,
    /// Probability of drawing a blank node where one is allowed.
    pub blank_share: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            entities: 20,
            predicates: 5,
            triples: 60,
            blanks: 3,
            literal_share: 0.15,
            blank_share: 0.1,
        }
    }
}

/// N-Triples text drawn deterministically from the seed. Entity IRIs
/// are `e0..`, predicates `p0..`, blanks `_:b0..`, literals `"v0.."`.
pub fn random_store_text(seed: u64, spec: &CorpusSpec) -> String {
    let mut rng = TestRng::new(seed);
    let mut out = String::new();
    for _ in 0..spec.triples {
        let subject = if spec.blanks > 0 && rng.chance(spec.blank_share) {
            format!("_:b{}", rng.below(spec.blanks as u64))
        } else {
            format!("<e{}>", rng.below(spec.entities.max(1) as u64))
        };
        let predicate = rng.below(spec.predicates.max(1) as u64);
        let object = if rng.chance(spec.literal_share) {
            format!("\"v{}\"", rng.below(spec.entities.max(1) as u64))
        } else if spec.blanks > 0 && rng.chance(spec.blank_share) {
            format!("_:b{}", rng.below(spec.blanks as u64))
        } else {
            format!("<e{}>", rng.below(spec.entities.max(1) as u64))
        };
        out.push_str(&format!("{subject} <p{predicate}> {object} .\n"));
    }
    out
}

/// A one-predicate corpus whose object frequencies follow
/// `floor(scale / rank)`, so rank and frequency are power-law related.
pub fn zipf_store_text(objects: usize, scale: u64) -> String {
    let mut out = String::new();
    let mut subject = 0usize;
    for k in 1..=objects {
        let count = scale / k as u64;
        for _ in 0..count {
            out.push_str(&format!("<s{subject}> <p> <o{k}> .\n"));
            subject += 1;
        }
    }
    out
}

pub fn node_terms(dict: &Dictionary) -> Vec<Term> {
    let mut out = Vec::new();
    for index in 0..dict.num_entities() as u32 {
        out.push(Term { kind: TermKind::Entity, index });
    }
    for index in 0..dict.num_blanks() as u32 {
        out.push(Term { kind: TermKind::Blank, index });
    }
    out
}

fn constant_terms(dict: &Dictionary) -> Vec<Term> {
    let mut out = Vec::new();
    for index in 0..dict.num_entities() as u32 {
        out.push(Term { kind: TermKind::Entity, index });
    }
    for index in 0..dict.num_literals() as u32 {
        out.push(Term { kind: TermKind::Literal, index });
    }
    out
}

fn resolve(arg: &Arg, x: Term, y: Option<Term>) -> Option<Term> {
    match arg {
        Arg::Constant(t) => Some(*t),
        Arg::Variable(v) if *v == Var::ROOT => Some(x),
        Arg::Variable(_) => y,
    }
}

fn atom_holds(store: &TripleStore, atom: &Atom, x: Term, y: Option<Term>) -> bool {
    match (resolve(&atom.subject, x, y), resolve(&atom.object, x, y)) {
        (Some(s), Some(o)) => store.has_triple(s, atom.predicate, o),
        _ => false,
    }
}

/// Reference bindings of one subgraph expression: try every candidate
/// root, and where a join variable occurs, every entity or blank node
/// as its value.
pub fn naive_subgraph_bindings(store: &TripleStore, se: &SubgraphExpression) -> Vec<Term> {
    let candidates = node_terms(store.dict());
    let atoms = se.atoms();
    let joins = atoms
        .iter()
        .any(|a| a.subject == Arg::Variable(Var::JOIN) || a.object == Arg::Variable(Var::JOIN));
    let mut out = Vec::new();
    for &x in &candidates {
        let satisfied = if joins {
            candidates.iter().any(|&y| atoms.iter().all(|a| atom_holds(store, a, x, Some(y))))
        } else {
            atoms.iter().all(|a| atom_holds(store, a, x, None))
        };
        if satisfied {
            out.push(x);
        }
    }
    out
}

/// Reference bindings of a conjunction: each component keeps its own
/// join variable scope, so this is the intersection of the component
/// bindings.
pub fn naive_expression_bindings(store: &TripleStore, e: &Expression) -> Vec<Term> {
    let mut components = e.components.iter();
    let Some(first) = components.next() else {
        return Vec::new();
    };
    let mut current = naive_subgraph_bindings(store, first);
    for se in components {
        let other = naive_subgraph_bindings(store, se);
        current.retain(|t| other.contains(t));
    }
    current
}

pub fn naive_is_referring(store: &TripleStore, e: &Expression, targets: &[Term]) -> bool {
    let mut expected = targets.to_vec();
    expected.sort_unstable();
    expected.dedup();
    naive_expression_bindings(store, e) == expected
}

/// Every canonical expression of the five shapes that binds `t`, found
/// by trying all predicate and constant combinations. Constants are
/// entities or literals, never blank nodes, matching the rule that
/// derived expressions do not name blanks.
pub fn brute_force_subgraphs(store: &TripleStore, t: Term) -> Vec<SubgraphExpression> {
    let dict = store.dict();
    let preds: Vec<_> = dict.predicate_ids().collect();
    let consts = constant_terms(dict);
    let binds_t = |se: &SubgraphExpression| naive_subgraph_bindings(store, se).contains(&t);
    let mut out = BTreeSet::new();

    for &p in &preds {
        for &o in &consts {
            let se = SubgraphExpression::one_atom(p, o);
            if binds_t(&se) {
                out.insert(se);
            }
        }
    }
    for &p0 in &preds {
        for &p1 in &preds {
            for &i1 in &consts {
                let se = SubgraphExpression::path(p0, p1, i1);
                if binds_t(&se) {
                    out.insert(se);
                }
            }
        }
    }
    let star_atoms: Vec<_> =
        preds.iter().flat_map(|&p| consts.iter().map(move |&o| (p, o))).collect();
    for &p0 in &preds {
        for (i, &a) in star_atoms.iter().enumerate() {
            for &b in &star_atoms[i + 1..] {
                if let Some(se) = SubgraphExpression::path_star(dict, p0, a, b) {
                    if binds_t(&se) {
                        out.insert(se);
                    }
                }
            }
        }
    }
    for (i, &p) in preds.iter().enumerate() {
        for (j, &q) in preds.iter().enumerate().skip(i + 1) {
            if let Some(se) = SubgraphExpression::closed2(dict, p, q) {
                if binds_t(&se) {
                    out.insert(se);
                }
            }
            for &r in &preds[j + 1..] {
                if let Some(se) = SubgraphExpression::closed3(dict, p, q, r) {
                    if binds_t(&se) {
                        out.insert(se);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let spec = CorpusSpec::default();
        assert_eq!(random_store_text(7, &spec), random_store_text(7, &spec));
        assert_ne!(random_store_text(7, &spec), random_store_text(8, &spec));
    }

    #[test]
    fn generated_text_parses() {
        for seed in 0..20 {
            let text = random_store_text(seed, &CorpusSpec::default());
            let store = TripleStore::parse_ntriples(&text).unwrap();
            assert!(store.num_triples() > 0);
        }
    }

    #[test]
    fn zipf_counts_follow_the_formula() {
        let store = TripleStore::parse_ntriples(&zipf_store_text(10, 100)).unwrap();
        let p = store.dict().lookup_predicate("p").unwrap();
        let o3 = store.dict().lookup_entity("o3").unwrap();
        assert_eq!(store.object_count(p, o3), 33);
        let o10 = store.dict().lookup_entity("o10").unwrap();
        assert_eq!(store.object_count(p, o10), 10);
    }

    #[test]
    fn naive_bindings_match_a_hand_example() {
        let text = "<a> <p> _:j .\n_:j <q> <i> .\n<b> <p> <k> .\n<k> <q> <i> .\n";
        let store = TripleStore::parse_ntriples(text).unwrap();
        let p = store.dict().lookup_predicate("p").unwrap();
        let q = store.dict().lookup_predicate("q").unwrap();
        let i = store.dict().lookup_entity("i").unwrap();
        let se = SubgraphExpression::path(p, q, i);
        let bindings = naive_subgraph_bindings(&store, &se);
        let a = store.dict().lookup_entity("a").unwrap();
        let b = store.dict().lookup_entity("b").unwrap();
        assert_eq!(bindings, vec![a, b]);
    }

    #[test]
    fn brute_force_finds_the_only_expression() {
        let store = TripleStore::parse_ntriples("<t> <p> <i> .\n").unwrap();
        let t = store.dict().lookup_entity("t").unwrap();
        let p = store.dict().lookup_predicate("p").unwrap();
        let i = store.dict().lookup_entity("i").unwrap();
        assert_eq!(brute_force_subgraphs(&store, t), vec![SubgraphExpression::one_atom(p, i)]);
    }
}
