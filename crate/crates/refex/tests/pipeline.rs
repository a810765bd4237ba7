//! End-to-end library tests: parse a fixture, build the prominence
//! model, enumerate, and search, checking the found expressions, their
//! costs, and the pruning behavior against hand-derived expectations
//! and the unpruned oracle.

use refex::enumerate::{build_queue, common_subgraphs, EnumOptions, Language};
use refex::expr::SubgraphExpression;
use refex::prominence::ProminenceModel;
use refex::search::{oracle_min_re, p_remi, remi_search, SearchRequest, SearchResult};
use refex::store::TripleStore;
use refex::term::Term;
use std::time::Duration;

const GEO: &str = include_str!("data/geo.nt");

fn geo() -> (TripleStore, ProminenceModel) {
    let store = TripleStore::parse_ntriples(GEO).unwrap();
    let model = ProminenceModel::build_frequency_model(&store);
    (store, model)
}

fn entity(store: &TripleStore, local: &str) -> Term {
    store.dict().lookup_entity(&format!("http://ex.org/{local}")).unwrap()
}

fn found(result: &SearchResult) -> (&refex::expr::Expression, &refex::complexity::Cost) {
    match result {
        SearchResult::Found { expression, cost } => (expression, cost),
        other => panic!("expected Found, got {other:?}"),
    }
}

#[test]
fn geo_common_subgraphs_are_the_two_expected_candidates() {
    let (store, model) = geo();
    let targets = [entity(&store, "Guyana"), entity(&store, "Suriname")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let located = store.dict().lookup_predicate("http://ex.org/locatedIn").unwrap();
    let language = store.dict().lookup_predicate("http://ex.org/officialLanguage").unwrap();
    let family = store.dict().lookup_predicate("http://ex.org/languageFamily").unwrap();
    let continent = SubgraphExpression::one_atom(located, entity(&store, "SouthAmerica"));
    let germanic = SubgraphExpression::path(language, family, entity(&store, "Germanic"));
    assert_eq!(common.len(), 2);
    assert!(common.contains(&continent));
    assert!(common.contains(&germanic));
}

#[test]
fn geo_queue_costs_match_hand_computation() {
    let (store, model) = geo();
    let targets = [entity(&store, "Guyana"), entity(&store, "Suriname")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    // All three predicates occur 7 times, so they rank lexically:
    // languageFamily, locatedIn, officialLanguage. South America is the
    // second most frequent locatedIn object, the family path pays for
    // officialLanguage (rank 3) and Germanic (rank 2 behind Romance).
    assert_eq!(queue.len(), 2);
    assert!((queue.entries[0].cost.bits() - 2.0).abs() < 1e-9);
    assert!((queue.entries[1].cost.bits() - (3f64.log2() + 1.0)).abs() < 1e-9);
    assert_eq!(queue.entries[0].cost.rank_product().unwrap(), &4u32.into());
    assert_eq!(queue.entries[1].cost.rank_product().unwrap(), &6u32.into());
}

#[test]
fn geo_search_finds_the_continent_language_conjunction() {
    let (store, model) = geo();
    let targets = vec![entity(&store, "Guyana"), entity(&store, "Suriname")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let outcome = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
    let (expression, cost) = found(&outcome.result);
    assert_eq!(expression.components.len(), 2);
    assert!(store.is_referring_expression(expression, &targets));
    assert!((cost.bits() - (3.0 + 3f64.log2())).abs() < 1e-9);

    let oracle = oracle_min_re(&store, &queue, &targets, queue.len());
    let (_, oracle_cost) = oracle.best.as_ref().unwrap();
    assert_eq!(cost, oracle_cost);

    let text = expression.display_with(store.dict());
    assert!(text.contains("locatedIn"), "{text}");
    assert!(text.contains("languageFamily"), "{text}");
}

#[test]
fn geo_standard_language_cannot_identify_the_pair() {
    let (store, model) = geo();
    let targets = vec![entity(&store, "Guyana"), entity(&store, "Suriname")];
    let opts = EnumOptions { language: Language::Standard, ..Default::default() };
    let common = common_subgraphs(&store, &model, &targets, &opts).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let outcome = remi_search(&store, &queue, &SearchRequest::new(targets)).unwrap();
    assert!(matches!(outcome.result, SearchResult::NoRe));
}

#[test]
fn geo_brazil_is_cheapest_through_the_romance_path() {
    // Naming Portuguese directly costs log2(3) + log2(6) bits because
    // Portuguese ranks sixth among officialLanguage objects. The
    // conjunction "Romance-language country in South America" is
    // cheaper: (log2(3) + 0 + 0) + 2 bits.
    let (store, model) = geo();
    let targets = vec![entity(&store, "Brazil")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let outcome = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
    let (expression, cost) = found(&outcome.result);
    assert_eq!(expression.components.len(), 2);
    assert!(store.is_referring_expression(expression, &targets));
    assert!((cost.bits() - (3f64.log2() + 2.0)).abs() < 1e-9);
    let oracle = oracle_min_re(&store, &queue, &targets, queue.len());
    assert_eq!(cost, &oracle.best.unwrap().1);
}

#[test]
fn geo_parallel_agrees_for_all_thread_counts() {
    let (store, model) = geo();
    let targets = vec![entity(&store, "Guyana"), entity(&store, "Suriname")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let sequential = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
    let (_, seq_cost) = found(&sequential.result);
    for threads in [1, 2, 4, 8] {
        let mut request = SearchRequest::new(targets.clone());
        request.threads = threads;
        let parallel = p_remi(&store, &queue, &request).unwrap();
        let (expression, cost) = found(&parallel.result);
        assert_eq!(cost, seq_cost, "threads={threads}");
        assert!(store.is_referring_expression(expression, &targets));
    }
}

#[test]
fn geo_zero_timeout_times_out() {
    let (store, model) = geo();
    let targets = vec![entity(&store, "Guyana")];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let mut request = SearchRequest::new(targets);
    request.timeout = Some(Duration::ZERO);
    let outcome = remi_search(&store, &queue, &request).unwrap();
    assert!(matches!(outcome.result, SearchResult::TimedOut { best: None }));
}

/// Three one-atom candidates with distinct costs and a conjunction of
/// the two cheapest as the only solution. The walk must test exactly
/// the four nodes the pruning rules leave over, skipping the deeper
/// extension of the solution and the solution's later sibling.
fn pruning_fixture() -> String {
    let mut text = String::new();
    for s in ["t1", "t2", "z1"] {
        text.push_str(&format!("<{s}> <a> <A> .\n"));
    }
    for s in ["t1", "t2", "z2"] {
        text.push_str(&format!("<{s}> <b> <B> .\n"));
    }
    for s in ["t1", "t2", "z1", "z2"] {
        text.push_str(&format!("<{s}> <c> <C> .\n"));
    }
    // Pad predicate counts so the candidate costs come out as 1,
    // log2(3), and 2 bits, and add a dominant filler predicate.
    for i in 0..6 {
        text.push_str(&format!("<w{i}> <a> <W{i}> .\n"));
    }
    for i in 0..3 {
        text.push_str(&format!("<v{i}> <b> <V{i}> .\n"));
    }
    for i in 0..12 {
        text.push_str(&format!("<u{i}> <f> <F> .\n"));
    }
    text
}

#[test]
fn pruning_skips_descendants_and_later_siblings_of_a_solution() {
    let text = pruning_fixture();
    let store = TripleStore::parse_ntriples(&text).unwrap();
    let model = ProminenceModel::build_frequency_model(&store);
    let targets =
        vec![store.dict().lookup_entity("t1").unwrap(), store.dict().lookup_entity("t2").unwrap()];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    assert_eq!(queue.len(), 3);
    let bits: Vec<f64> = queue.entries.iter().map(|e| e.cost.bits()).collect();
    assert!((bits[0] - 1.0).abs() < 1e-9);
    assert!((bits[1] - 3f64.log2()).abs() < 1e-9);
    assert!((bits[2] - 2.0).abs() < 1e-9);

    let outcome = remi_search(&store, &queue, &SearchRequest::new(targets.clone())).unwrap();
    let (expression, cost) = found(&outcome.result);
    assert_eq!(expression.components.len(), 2);
    assert_eq!(cost.rank_product().unwrap(), &6u32.into());

    // Visited: candidate 0, its child 0&1 (the solution), candidate 1,
    // candidate 2. Never visited: 0&1&2 (descendant of a solution),
    // 0&2 (its later sibling), 1&2 (cut by the cost bound).
    assert_eq!(outcome.stats.nodes_visited, 4);
    assert_eq!(outcome.stats.re_tests, 4);
    assert_eq!(outcome.stats.prunes_by_depth, 1);
    assert_eq!(outcome.stats.side_prunes, 1);
    assert_eq!(outcome.stats.bound_prunes, 1);

    let oracle = oracle_min_re(&store, &queue, &targets, queue.len());
    assert_eq!(oracle.nodes_enumerated, 7);
    assert_eq!(cost, &oracle.best.unwrap().1);
    assert!(outcome.stats.nodes_visited < oracle.nodes_enumerated);
}

#[test]
fn pruning_fixture_without_bound_still_skips_solution_neighbors() {
    let text = pruning_fixture();
    let store = TripleStore::parse_ntriples(&text).unwrap();
    let model = ProminenceModel::build_frequency_model(&store);
    let targets =
        vec![store.dict().lookup_entity("t1").unwrap(), store.dict().lookup_entity("t2").unwrap()];
    let common = common_subgraphs(&store, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &store, &common).unwrap();
    let mut request = SearchRequest::new(targets.clone());
    request.bound_pruning = false;
    let outcome = remi_search(&store, &queue, &request).unwrap();
    let (_, cost) = found(&outcome.result);
    assert_eq!(cost.rank_product().unwrap(), &6u32.into());
    // Candidate 1's subtree now tests 1&2 instead of bound-pruning it,
    // and its exhaustive failure ends the search before candidate 2.
    assert_eq!(outcome.stats.nodes_visited, 4);
    assert_eq!(outcome.stats.bound_prunes, 0);
    assert_eq!(outcome.stats.prunes_by_depth, 1);
    assert_eq!(outcome.stats.side_prunes, 1);
}

#[test]
fn inverse_predicates_unlock_otherwise_undescribable_entities() {
    let text = "<u1> <follows> <hub> .\n<u2> <follows> <hub> .\n<u1> <likes> <u2> .\n";
    let plain = TripleStore::parse_ntriples(text).unwrap();
    let hub = plain.dict().lookup_entity("hub").unwrap();
    let model = ProminenceModel::build_frequency_model(&plain);
    let common = common_subgraphs(&plain, &model, &[hub], &EnumOptions::default()).unwrap();
    assert!(common.is_empty());

    let inverted = TripleStore::parse_ntriples(text).unwrap().materialize_inverses(0.34);
    let model = ProminenceModel::build_frequency_model(&inverted);
    let hub = inverted.dict().lookup_entity("hub").unwrap();
    let targets = vec![hub];
    let common = common_subgraphs(&inverted, &model, &targets, &EnumOptions::default()).unwrap();
    let queue = build_queue(&model, &inverted, &common).unwrap();
    let outcome = remi_search(&inverted, &queue, &SearchRequest::new(targets.clone())).unwrap();
    let (expression, _) = found(&outcome.result);
    assert!(inverted.is_referring_expression(expression, &targets));
    assert!(expression
        .components
        .iter()
        .flat_map(|se| se.predicates())
        .any(|p| inverted.dict().is_inverse(p)));
}
