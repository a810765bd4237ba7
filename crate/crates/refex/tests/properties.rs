//! Seeded randomized checks: the indexed evaluator, the derivation
//! pass, and the pruned search must agree with the naive reference
//! implementations in the test kit across many generated stores.

use refex::enumerate::{
    build_queue, common_subgraphs, subgraph_expressions_of_entity, EnumOptions,
};
use refex::expr::Expression;
use refex::prominence::ProminenceModel;
use refex::search::{oracle_min_re, p_remi, remi_search, SearchRequest, SearchResult};
use refex::store::TripleStore;
use refex::term::{Term, TermKind};
use refex::testkit::{
    brute_force_subgraphs, naive_expression_bindings, naive_subgraph_bindings, random_store_text,
    CorpusSpec,
};

fn entities_of(store: &TripleStore) -> Vec<Term> {
    (0..store.dict().num_entities() as u32)
        .map(|index| Term { kind: TermKind::Entity, index })
        .collect()
}

fn full_cutoff() -> EnumOptions {
    EnumOptions { prominent_cutoff: 1.0, ..Default::default() }
}

#[test]
fn subgraph_evaluation_matches_the_naive_reference() {
    let spec = CorpusSpec {
        entities: 10,
        predicates: 4,
        triples: 30,
        blanks: 2,
        literal_share: 0.15,
        blank_share: 0.1,
    };
    let mut checked = 0usize;
    for seed in 0..60 {
        let text = random_store_text(seed, &spec);
        let store = if seed % 3 == 0 {
            TripleStore::parse_ntriples(&text).unwrap().materialize_inverses(0.1)
        } else {
            TripleStore::parse_ntriples(&text).unwrap()
        };
        let model = ProminenceModel::build_frequency_model(&store);
        for t in entities_of(&store) {
            let exprs = subgraph_expressions_of_entity(&store, &model, t, &full_cutoff()).unwrap();
            for se in exprs {
                let fast = store.bindings_of_subgraph(&se);
                let naive = naive_subgraph_bindings(&store, &se);
                assert_eq!(*fast, naive, "seed {seed}: {}", se.display_with(store.dict()));
                assert!(fast.contains(&t), "derived expression must bind its entity");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "only {checked} expressions checked");
}

#[test]
fn conjunction_evaluation_matches_and_shrinks() {
    let spec = CorpusSpec {
        entities: 10,
        predicates: 4,
        triples: 32,
        blanks: 1,
        literal_share: 0.1,
        blank_share: 0.08,
    };
    for seed in 0..40 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        for t in entities_of(&store) {
            let exprs = subgraph_expressions_of_entity(&store, &model, t, &full_cutoff()).unwrap();
            let pool: Vec<_> = exprs.into_iter().take(6).collect();
            for i in 0..pool.len() {
                for j in i + 1..pool.len() {
                    let single = store.bindings_of_subgraph(&pool[i]);
                    let e = Expression::new(vec![pool[i], pool[j]]);
                    let both = store.bindings_of_expression(&e);
                    assert_eq!(both, naive_expression_bindings(&store, &e), "seed {seed}");
                    assert!(both.iter().all(|b| single.contains(b)), "seed {seed}");
                    let flipped = Expression::new(vec![pool[j], pool[i]]);
                    assert_eq!(both, store.bindings_of_expression(&flipped), "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn enumeration_equals_brute_force_on_blank_free_stores() {
    let spec = CorpusSpec {
        entities: 8,
        predicates: 3,
        triples: 22,
        blanks: 0,
        literal_share: 0.2,
        blank_share: 0.0,
    };
    for seed in 0..25 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        for t in entities_of(&store) {
            let derived =
                subgraph_expressions_of_entity(&store, &model, t, &full_cutoff()).unwrap();
            let exhaustive = brute_force_subgraphs(&store, t);
            assert_eq!(derived, exhaustive, "seed {seed}, entity {}", store.dict().term_text(t));
        }
    }
}

#[test]
fn derived_bound_objects_are_never_blank() {
    let spec = CorpusSpec {
        entities: 9,
        predicates: 3,
        triples: 30,
        blanks: 3,
        literal_share: 0.1,
        blank_share: 0.25,
    };
    for seed in 0..30 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        for t in entities_of(&store) {
            let exprs = subgraph_expressions_of_entity(&store, &model, t, &full_cutoff()).unwrap();
            for se in exprs {
                assert!(
                    se.bound_objects().iter().all(|o| o.kind != TermKind::Blank),
                    "seed {seed}: {}",
                    se.display_with(store.dict())
                );
            }
        }
    }
}

#[test]
fn queues_are_deterministic_and_sorted() {
    let spec = CorpusSpec::default();
    for seed in 0..30 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        let entities = entities_of(&store);
        let targets = &entities[..2.min(entities.len())];
        let opts = EnumOptions::default();
        let first = common_subgraphs(&store, &model, targets, &opts).unwrap();
        let second = common_subgraphs(&store, &model, targets, &opts).unwrap();
        assert_eq!(first, second);
        let qa = build_queue(&model, &store, &first).unwrap();
        let qb = build_queue(&model, &store, &second).unwrap();
        let texts: Vec<_> = qa.entries.iter().map(|e| e.text.clone()).collect();
        let texts_b: Vec<_> = qb.entries.iter().map(|e| e.text.clone()).collect();
        assert_eq!(texts, texts_b, "seed {seed}");
        for w in qa.entries.windows(2) {
            assert!(
                w[0].cost < w[1].cost || (w[0].cost == w[1].cost && w[0].text <= w[1].text),
                "seed {seed}: queue out of order"
            );
        }
    }
}

/// Draws a target set that shares at least one candidate, preferring
/// pairs; falls back to singletons, and gives up on barren stores.
fn draw_targets(
    store: &TripleStore,
    model: &ProminenceModel,
    opts: &EnumOptions,
) -> Option<Vec<Term>> {
    let entities = entities_of(store);
    for i in 0..entities.len() {
        for j in i + 1..entities.len() {
            let targets = vec![entities[i], entities[j]];
            let common = common_subgraphs(store, model, &targets, opts).ok()?;
            if !common.is_empty() {
                return Some(targets);
            }
        }
    }
    entities
        .into_iter()
        .find(|&t| {
            !subgraph_expressions_of_entity(store, model, t, opts)
                .map(|e| e.is_empty())
                .unwrap_or(true)
        })
        .map(|t| vec![t])
}

#[test]
fn pruned_search_matches_the_oracle_on_random_instances() {
    let spec = CorpusSpec {
        entities: 12,
        predicates: 4,
        triples: 40,
        blanks: 1,
        literal_share: 0.1,
        blank_share: 0.05,
    };
    let mut agreed = 0usize;
    for seed in 100..160 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        let opts = EnumOptions::default();
        let Some(targets) = draw_targets(&store, &model, &opts) else { continue };
        let common = common_subgraphs(&store, &model, &targets, &opts).unwrap();
        let queue = build_queue(&model, &store, &common).unwrap();
        if queue.len() > 12 {
            continue;
        }
        let outcome = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
        let oracle = oracle_min_re(&store, &queue, &targets, queue.len());
        match (&outcome.result, &oracle.best) {
            (SearchResult::Found { expression, cost }, Some((_, oracle_cost))) => {
                assert_eq!(cost, oracle_cost, "seed {seed}");
                assert!(store.is_referring_expression(expression, &targets), "seed {seed}");
            }
            (SearchResult::NoRe, None) => {}
            (got, want) => panic!("seed {seed}: search {got:?} vs oracle {want:?}"),
        }
        assert!(outcome.stats.nodes_visited <= oracle.nodes_enumerated, "seed {seed}");
        agreed += 1;
    }
    assert!(agreed >= 30, "only {agreed} usable instances");
}

#[test]
fn parallel_search_agrees_on_random_instances() {
    let spec = CorpusSpec {
        entities: 12,
        predicates: 4,
        triples: 40,
        blanks: 0,
        literal_share: 0.1,
        blank_share: 0.0,
    };
    for seed in 200..220 {
        let text = random_store_text(seed, &spec);
        let store = TripleStore::parse_ntriples(&text).unwrap();
        let model = ProminenceModel::build_frequency_model(&store);
        let opts = EnumOptions::default();
        let Some(targets) = draw_targets(&store, &model, &opts) else { continue };
        let common = common_subgraphs(&store, &model, &targets, &opts).unwrap();
        let queue = build_queue(&model, &store, &common).unwrap();
        let sequential = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
        for threads in [2, 4] {
            let mut request = SearchRequest::new(targets.clone());
            request.threads = threads;
            let parallel = p_remi(&store, &queue, &request).unwrap();
            match (&sequential.result, &parallel.result) {
                (SearchResult::Found { cost: a, .. }, SearchResult::Found { cost: b, .. }) => {
                    assert_eq!(a, b, "seed {seed} threads {threads}");
                }
                (SearchResult::NoRe, SearchResult::NoRe) => {}
                (a, b) => panic!("seed {seed} threads {threads}: {a:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn cache_capacity_does_not_change_results() {
    let spec = CorpusSpec { entities: 10, predicates: 4, triples: 30, ..Default::default() };
    for seed in 300..315 {
        let text = random_store_text(seed, &spec);
        let cached = TripleStore::parse_ntriples(&text).unwrap();
        let uncached = TripleStore::parse_ntriples(&text).unwrap().with_cache_capacity(0);
        let model_c = ProminenceModel::build_frequency_model(&cached);
        let model_u = ProminenceModel::build_frequency_model(&uncached);
        for t in entities_of(&cached) {
            let exprs =
                subgraph_expressions_of_entity(&cached, &model_c, t, &full_cutoff()).unwrap();
            let exprs_u =
                subgraph_expressions_of_entity(&uncached, &model_u, t, &full_cutoff()).unwrap();
            assert_eq!(exprs, exprs_u, "seed {seed}");
            for se in &exprs {
                assert_eq!(
                    *cached.bindings_of_subgraph(se),
                    *uncached.bindings_of_subgraph(se),
                    "seed {seed}"
                );
            }
        }
        assert_eq!(uncached.cache_stats(), (0, 0));
        let (hits, misses) = cached.cache_stats();
        assert!(hits + misses > 0);
    }
}
