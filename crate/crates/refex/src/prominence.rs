//! Prominence rankings: global orders over predicates and terms, the
//! conditional rankings used by the chain-rule cost terms, and the
//! per-predicate power-law fit that compresses object rankings into two
//! coefficients.
//!
//! Every ranking is 1-based and total over its candidate set. Candidates
//! are ordered by descending score with deterministic tie-breaking, so a
//! model built twice from the same store ranks identically.
//!
//! Conditional rankings restrict and re-score the candidates by the part
//! of an expression already written down. The supported contexts are:
//!
//! * `GlobalPredicate`: all predicates, scored by fact count.
//! * `ObjectOfPredicate(p)`: objects of p, scored by the number of facts
//!   p(s, I).
//! * `JoinPredicate(p0)`: predicates q reachable through a
//!   first-to-second-argument join p0(x, y) ∧ q(y, z), scored by the
//!   number of such (x, y, z).
//! * `ObjectOfJoin(p0, p1)`: bindings I of z in p0(x, y) ∧ p1(y, I),
//!   scored by the number of matching (x, y).
//! * `StarPredicate(p0, p1)`: the second star predicate; same ranking
//!   table as `JoinPredicate(p0)` since the star shares the join
//!   variable.
//! * `ObjectOfStar(p0, p1, p2)`: bindings of the second star object in
//!   p0(x, y) ∧ p1(y, z1) ∧ p2(y, I), with z1 left unbound.
//! * `ClosingPredicate(prefix)`: predicates q outside the prefix with
//!   q(x, y) closing all prefix atoms over the same pair, scored by the
//!   number of closed (x, y) pairs.

use crate::store::TripleStore;
use crate::term::{PredId, Term, TermKind};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Which prominence source orders the global term ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Frequency,
    Pagerank,
}

/// Whether object-of-predicate bit costs use exact ranks or the fitted
/// power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    Exact,
    Fitted,
}

/// Least-squares fit of log2(rank) against log2(frequency) for the
/// objects of one predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub sample_size: usize,
}

/// The conditioning established by the atoms preceding a cost term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankContext {
    GlobalPredicate,
    ObjectOfPredicate(PredId),
    JoinPredicate(PredId),
    ObjectOfJoin(PredId, PredId),
    StarPredicate(PredId, PredId),
    ObjectOfStar(PredId, PredId, PredId),
    ClosingPredicate(ClosingPrefix),
}

/// The already-written predicates of a closed shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosingPrefix {
    One(PredId),
    Two(PredId, PredId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("term is not a candidate under this context")]
    NotACandidate,
    #[error("predicate is not a candidate under this context")]
    PredicateNotACandidate,
    #[error("context does not rank this kind of symbol")]
    InvalidContext,
}

#[derive(Debug, Error)]
pub enum PagerankError {
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum TermTableKey {
    ObjectOf(PredId),
    Join(PredId, PredId),
    Star(PredId, PredId, PredId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PredTableKey {
    Join(PredId),
    Closing1(PredId),
    Closing2(PredId, PredId),
}

/// Global and conditional prominence rankings over one store.
#[derive(Debug)]
pub struct ProminenceModel {
    metric: Metric,
    mode: RankMode,
    /// 1-based rank per predicate id.
    predicate_rank: Vec<u32>,
    /// Fact occurrences (subject or object) per term.
    term_frequency: HashMap<Term, u32>,
    /// 1-based metric-dependent rank, total over all fact terms.
    global_term_rank: HashMap<Term, u32>,
    /// Entities by descending fact frequency; prefix = most prominent.
    fr_entity_order: Vec<Term>,
    /// Raw pagerank rows, including entities unknown to the store.
    pagerank_raw: Option<HashMap<String, f64>>,
    /// Pagerank scores resolved against the dictionary.
    pagerank_terms: HashMap<Term, f64>,
    /// Per-predicate fit, populated in fitted mode.
    power_law: Vec<Option<PowerLawFit>>,
    term_tables: Mutex<HashMap<TermTableKey, Arc<HashMap<Term, u32>>>>,
    pred_tables: Mutex<HashMap<PredTableKey, Arc<HashMap<PredId, u32>>>>,
}

impl ProminenceModel {
    pub fn build(store: &TripleStore, metric: Metric) -> Self {
        let term_frequency = store.term_frequencies();

        let num_preds = store.dict().num_predicates();
        let mut preds: Vec<PredId> = (0..num_preds as u32).map(PredId).collect();
        preds.sort_by(|a, b| {
            store
                .predicate_count(*b)
                .cmp(&store.predicate_count(*a))
                .then_with(|| store.dict().predicate_iri(*a).cmp(store.dict().predicate_iri(*b)))
        });
        let mut predicate_rank = vec![0u32; num_preds];
        for (i, p) in preds.iter().enumerate() {
            predicate_rank[p.0 as usize] = i as u32 + 1;
        }

        let mut fr_entity_order: Vec<Term> =
            term_frequency.keys().copied().filter(|t| t.kind == TermKind::Entity).collect();
        fr_entity_order.sort_by(|a, b| {
            term_frequency[b]
                .cmp(&term_frequency[a])
                .then_with(|| store.dict().term_text(*a).cmp(store.dict().term_text(*b)))
        });

        let mut model = ProminenceModel {
            metric,
            mode: RankMode::Exact,
            predicate_rank,
            term_frequency,
            global_term_rank: HashMap::new(),
            fr_entity_order,
            pagerank_raw: None,
            pagerank_terms: HashMap::new(),
            power_law: vec![None; num_preds],
            term_tables: Mutex::new(HashMap::new()),
            pred_tables: Mutex::new(HashMap::new()),
        };
        model.compute_global_term_ranks(store);
        model
    }

    pub fn build_frequency_model(store: &TripleStore) -> Self {
        Self::build(store, Metric::Frequency)
    }

    /// Loads pagerank rows (`iri<TAB>score` per line) and, for pagerank
    /// models, re-derives the global term ranking: scored entities first
    /// by descending score, then everything else in frequency order.
    /// Returns the number of rows read.
    pub fn load_pagerank(
        &mut self,
        store: &TripleStore,
        text: &str,
    ) -> Result<usize, PagerankError> {
        let mut raw = self.pagerank_raw.take().unwrap_or_default();
        let mut rows = 0usize;
        for (i, line) in text.lines().enumerate() {
            let row = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (iri_part, score_part) = trimmed.split_once('\t').ok_or_else(|| {
                PagerankError::Row { row, message: "expected <iri>\\t<score>".to_owned() }
            })?;
            let iri = iri_part.trim().trim_start_matches('<').trim_end_matches('>');
            if iri.is_empty() {
                return Err(PagerankError::Row { row, message: "empty IRI".to_owned() });
            }
            let score: f64 = score_part.trim().parse().map_err(|_| PagerankError::Row {
                row,
                message: format!("invalid score {:?}", score_part.trim()),
            })?;
            if !score.is_finite() || score < 0.0 {
                return Err(PagerankError::Row {
                    row,
                    message: format!("score must be finite and non-negative, got {score}"),
                });
            }
            if let Some(term) = store.dict().lookup_entity(iri) {
                self.pagerank_terms.insert(term, score);
            }
            raw.insert(iri.to_owned(), score);
            rows += 1;
        }
        self.pagerank_raw = Some(raw);
        if self.metric == Metric::Pagerank {
            self.compute_global_term_ranks(store);
            self.term_tables.lock().unwrap().clear();
            self.pred_tables.lock().unwrap().clear();
        }
        Ok(rows)
    }

    pub fn has_pagerank(&self) -> bool {
        self.pagerank_raw.is_some()
    }

    /// Switches to fitted mode, fitting every predicate's object ranking.
    pub fn enable_fitted(&mut self, store: &TripleStore) {
        for p in store.dict().predicate_ids() {
            self.power_law[p.0 as usize] = fit_power_law(self, store, p);
        }
        self.mode = RankMode::Fitted;
    }

    pub fn mode(&self) -> RankMode {
        self.mode
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn power_law_fit(&self, p: PredId) -> Option<&PowerLawFit> {
        self.power_law[p.0 as usize].as_ref()
    }

    pub fn term_frequency(&self, t: Term) -> u32 {
        self.term_frequency.get(&t).copied().unwrap_or(0)
    }

    pub fn predicate_rank(&self, p: PredId) -> u32 {
        self.predicate_rank[p.0 as usize]
    }

    pub fn global_term_rank(&self, t: Term) -> Option<u32> {
        self.global_term_rank.get(&t).copied()
    }

    /// The `fraction` most frequent entities. A fraction of 1 or more
    /// disables the notion of prominence and returns the empty set, so
    /// that callers using this as a pruning cutoff can switch it off.
    pub fn fr_top_entities(&self, fraction: f64) -> std::collections::HashSet<Term> {
        if fraction >= 1.0 {
            return Default::default();
        }
        let take = (fraction.max(0.0) * self.fr_entity_order.len() as f64).floor() as usize;
        self.fr_entity_order.iter().copied().take(take).collect()
    }

    /// Rank of term `I` among the candidate bindings under `ctx`.
    pub fn conditional_entity_rank(
        &self,
        store: &TripleStore,
        term: Term,
        ctx: RankContext,
    ) -> Result<u32, RankError> {
        let table = match ctx {
            RankContext::ObjectOfPredicate(p) => self.term_table(store, TermTableKey::ObjectOf(p)),
            RankContext::ObjectOfJoin(p0, p1) => self.term_table(store, TermTableKey::Join(p0, p1)),
            RankContext::ObjectOfStar(p0, p1, p2) => {
                self.term_table(store, TermTableKey::Star(p0, p1, p2))
            }
            _ => return Err(RankError::InvalidContext),
        };
        table.get(&term).copied().ok_or(RankError::NotACandidate)
    }

    /// Rank of predicate `p` among the candidates under `ctx`.
    pub fn conditional_predicate_rank(
        &self,
        store: &TripleStore,
        p: PredId,
        ctx: RankContext,
    ) -> Result<u32, RankError> {
        let key = match ctx {
            RankContext::GlobalPredicate => {
                return self
                    .predicate_rank
                    .get(p.0 as usize)
                    .copied()
                    .ok_or(RankError::PredicateNotACandidate);
            }
            RankContext::JoinPredicate(p0) => PredTableKey::Join(p0),
            RankContext::StarPredicate(p0, _) => PredTableKey::Join(p0),
            RankContext::ClosingPredicate(ClosingPrefix::One(p0)) => PredTableKey::Closing1(p0),
            RankContext::ClosingPredicate(ClosingPrefix::Two(p0, p1)) => {
                PredTableKey::Closing2(p0, p1)
            }
            _ => return Err(RankError::InvalidContext),
        };
        self.pred_table(store, key).get(&p).copied().ok_or(RankError::PredicateNotACandidate)
    }

    /// Bit cost of term `I` under `ctx`: log2 of its conditional rank,
    /// or the clamped fitted estimate for object-of-predicate contexts in
    /// fitted mode.
    pub fn estimated_rank_bits(
        &self,
        store: &TripleStore,
        term: Term,
        ctx: RankContext,
    ) -> Result<f64, RankError> {
        if self.mode == RankMode::Fitted {
            if let RankContext::ObjectOfPredicate(p) = ctx {
                if let Some(fit) = &self.power_law[p.0 as usize] {
                    let count = store.object_count(p, term);
                    if count == 0 {
                        return Err(RankError::NotACandidate);
                    }
                    let bits = -fit.alpha * (count as f64).log2() + fit.beta;
                    return Ok(bits.max(0.0));
                }
            }
        }
        let rank = self.conditional_entity_rank(store, term, ctx)?;
        Ok((rank as f64).log2())
    }

    fn compute_global_term_ranks(&mut self, store: &TripleStore) {
        let dict = store.dict();
        let mut scored: Vec<Term> = Vec::new();
        if self.metric == Metric::Pagerank {
            scored = self
                .pagerank_terms
                .keys()
                .copied()
                .filter(|t| self.term_frequency.contains_key(t))
                .collect();
            scored.sort_by(|a, b| {
                self.pagerank_terms[b]
                    .total_cmp(&self.pagerank_terms[a])
                    .then_with(|| dict.term_text(*a).cmp(dict.term_text(*b)))
            });
        }
        let in_scored: std::collections::HashSet<Term> = scored.iter().copied().collect();
        let mut rest: Vec<Term> =
            self.term_frequency.keys().copied().filter(|t| !in_scored.contains(t)).collect();
        rest.sort_by(|a, b| {
            let fa = self.term_frequency[a];
            let fb = self.term_frequency[b];
            fb.cmp(&fa)
                .then_with(|| dict.term_text(*a).cmp(dict.term_text(*b)))
                .then_with(|| a.kind.cmp(&b.kind))
        });
        scored.extend(rest);
        self.global_term_rank =
            scored.into_iter().enumerate().map(|(i, t)| (t, i as u32 + 1)).collect();
    }

    fn term_table(&self, store: &TripleStore, key: TermTableKey) -> Arc<HashMap<Term, u32>> {
        if let Some(table) = self.term_tables.lock().unwrap().get(&key) {
            return Arc::clone(table);
        }
        let candidates: Vec<(Term, u64)> = match key {
            TermTableKey::ObjectOf(p) => {
                store.objects_with_counts(p).iter().map(|(o, n)| (*o, *n as u64)).collect()
            }
            TermTableKey::Join(p0, p1) => store
                .objects_with_counts(p1)
                .iter()
                .filter_map(|(obj, _)| {
                    let count: u64 = store
                        .subjects_with_object(p1, *obj)
                        .iter()
                        .map(|y| store.subjects_with_object(p0, *y).len() as u64)
                        .sum();
                    (count > 0).then_some((*obj, count))
                })
                .collect(),
            TermTableKey::Star(p0, p1, p2) => store
                .objects_with_counts(p2)
                .iter()
                .filter_map(|(obj, _)| {
                    let count: u64 = store
                        .subjects_with_object(p2, *obj)
                        .iter()
                        .map(|y| {
                            store.subjects_with_object(p0, *y).len() as u64
                                * store.objects_of(*y, p1).len() as u64
                        })
                        .sum();
                    (count > 0).then_some((*obj, count))
                })
                .collect(),
        };
        let table = Arc::new(self.rank_terms(candidates));
        self.term_tables.lock().unwrap().insert(key, Arc::clone(&table));
        table
    }

    fn pred_table(&self, store: &TripleStore, key: PredTableKey) -> Arc<HashMap<PredId, u32>> {
        if let Some(table) = self.pred_tables.lock().unwrap().get(&key) {
            return Arc::clone(table);
        }
        let all_preds = || store.dict().predicate_ids();
        let candidates: Vec<(PredId, u64)> = match key {
            PredTableKey::Join(p0) => all_preds()
                .filter_map(|q| {
                    let count: u64 = store
                        .triples_of_predicate(q)
                        .iter()
                        .map(|t| store.subjects_with_object(p0, t.subject).len() as u64)
                        .sum();
                    (count > 0).then_some((q, count))
                })
                .collect(),
            PredTableKey::Closing1(p0) => {
                let base = closed_pairs(store, &[p0]);
                all_preds()
                    .filter(|q| *q != p0)
                    .filter_map(|q| {
                        let count =
                            base.iter().filter(|(s, o)| store.has_triple(*s, q, *o)).count() as u64;
                        (count > 0).then_some((q, count))
                    })
                    .collect()
            }
            PredTableKey::Closing2(p0, p1) => {
                let base = closed_pairs(store, &[p0, p1]);
                all_preds()
                    .filter(|q| *q != p0 && *q != p1)
                    .filter_map(|q| {
                        let count =
                            base.iter().filter(|(s, o)| store.has_triple(*s, q, *o)).count() as u64;
                        (count > 0).then_some((q, count))
                    })
                    .collect()
            }
        };
        let mut ordered = candidates;
        ordered.sort_by(|(pa, ca), (pb, cb)| {
            cb.cmp(ca).then_with(|| {
                self.predicate_rank[pa.0 as usize].cmp(&self.predicate_rank[pb.0 as usize])
            })
        });
        let table: Arc<HashMap<PredId, u32>> = Arc::new(
            ordered.into_iter().enumerate().map(|(i, (p, _))| (p, i as u32 + 1)).collect(),
        );
        self.pred_tables.lock().unwrap().insert(key, Arc::clone(&table));
        table
    }

    fn rank_terms(&self, candidates: Vec<(Term, u64)>) -> HashMap<Term, u32> {
        let mut ordered = candidates;
        ordered.sort_by(|(ta, ca), (tb, cb)| {
            cb.cmp(ca).then_with(|| {
                let ra = self.global_term_rank.get(ta).copied().unwrap_or(u32::MAX);
                let rb = self.global_term_rank.get(tb).copied().unwrap_or(u32::MAX);
                ra.cmp(&rb)
            })
        });
        ordered.into_iter().enumerate().map(|(i, (t, _))| (t, i as u32 + 1)).collect()
    }
}

/// All (x, y) pairs closed by every predicate in `prefix`, with y an
/// entity or blank node. Literal y values never participate in closed
/// shapes because they cannot serve as join values.
fn closed_pairs(store: &TripleStore, prefix: &[PredId]) -> Vec<(Term, Term)> {
    let rarest = prefix
        .iter()
        .copied()
        .min_by_key(|p| store.predicate_count(*p))
        .expect("prefix is non-empty");
    store
        .triples_of_predicate(rarest)
        .iter()
        .filter(|t| t.object.kind != TermKind::Literal)
        .filter(|t| {
            prefix.iter().all(|p| *p == rarest || store.has_triple(t.subject, *p, t.object))
        })
        .map(|t| (t.subject, t.object))
        .collect()
}

/// Fits log2(rank) ≈ −alpha·log2(frequency) + beta over the distinct
/// objects of `p`. Returns `None` when fewer than two objects exist or
/// the frequencies have no variance, in which case callers keep exact
/// ranks.
pub fn fit_power_law(
    model: &ProminenceModel,
    store: &TripleStore,
    p: PredId,
) -> Option<PowerLawFit> {
    let objects = store.objects_with_counts(p);
    if objects.len() < 2 {
        return None;
    }
    let table = model.term_table(store, TermTableKey::ObjectOf(p));
    let points: Vec<(f64, f64)> =
        objects.iter().map(|(o, n)| ((*n as f64).log2(), (table[o] as f64).log2())).collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let ss_xx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    if ss_xx == 0.0 {
        return None;
    }
    let ss_xy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = ss_xy / ss_xx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|(x, y)| {
            let predicted = slope * x + intercept;
            (y - predicted) * (y - predicted)
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(PowerLawFit { alpha: -slope, beta: intercept, r_squared, sample_size: points.len() })
}
