//! Minimal-complexity search over conjunctions of queue candidates.
//!
//! The search space is the set of strictly increasing index sequences
//! into the candidate queue: the node (i1 < ... < ik) stands for the
//! conjunction of those candidates, its children append a larger index.
//! Costs are sums of the per-candidate costs, so a child always costs at
//! least as much as its parent, and within one parent the children come
//! in non-decreasing cost order because the queue is sorted.
//!
//! [`remi_search`] explores root subtrees left to right with a
//! depth-first walk per root. Three prunes keep the walk small:
//!
//! * depth pruning: once a node satisfies the targets, none of its
//!   descendants can be strictly cheaper, so they are skipped;
//! * side pruning: the satisfied node's later siblings are skipped too,
//!   and the walk resumes at the grandparent;
//! * bound pruning (on by default, can be disabled): a node whose cost
//!   already reaches the best recorded solution is not expanded, since
//!   only strictly cheaper solutions ever replace the incumbent.
//!
//! If a fully explored subtree contains no solution, nothing to its
//! right can be one either: prepending the subtree's root to any later
//! sequence only shrinks its bindings, and every candidate binds all
//! targets. The search therefore stops and reports the incumbent, or
//! "no referring expression" when there is none.
//!
//! [`p_remi`] runs the same walk with worker threads that claim roots in
//! ascending order, share the incumbent, and cancel roots to the right
//! of a proven-empty subtree. [`oracle_min_re`] is the unpruned
//! reference: it enumerates every sequence in pre-order and evaluates
//! each conjunction from scratch.

use crate::complexity::Cost;
use crate::enumerate::CandidateQueue;
use crate::eval::intersect_sorted;
use crate::expr::Expression;
use crate::store::TripleStore;
use crate::term::{Term, TermKind};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SearchRequest {
    pub targets: Vec<Term>,
    pub threads: usize,
    pub timeout: Option<Duration>,
    /// Skip nodes that cannot beat the incumbent. Off reproduces the
    /// plain depth/side-pruned walk for differential runs.
    pub bound_pruning: bool,
}

impl SearchRequest {
    pub fn new(targets: Vec<Term>) -> Self {
        SearchRequest { targets, threads: 1, timeout: None, bound_pruning: true }
    }
}

#[derive(Debug, Clone)]
pub enum SearchResult {
    Found { expression: Expression, cost: Cost },
    NoRe,
    TimedOut { best: Option<(Expression, Cost)> },
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub re_tests: u64,
    pub prunes_by_depth: u64,
    pub side_prunes: u64,
    pub bound_prunes: u64,
    pub queue_size: usize,
    pub wall_time: Duration,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.nodes_visited += other.nodes_visited;
        self.re_tests += other.re_tests;
        self.prunes_by_depth += other.prunes_by_depth;
        self.side_prunes += other.side_prunes;
        self.bound_prunes += other.bound_prunes;
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub result: SearchResult,
    pub stats: SearchStats,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no target entities were given")]
    EmptyTargets,
    #[error("target {0} is not an entity")]
    NotAnEntity(String),
    #[error("thread count must be at least 1")]
    ZeroThreads,
}

/// Sequential search for the cheapest conjunction whose bindings equal
/// the targets.
///
/// The queue must come from the common subgraph expressions of exactly
/// these targets: the early-stop argument relies on every candidate
/// binding every target. Identical inputs give identical results and
/// identical statistics.
pub fn remi_search(
    store: &TripleStore,
    queue: &CandidateQueue,
    request: &SearchRequest,
) -> Result<SearchOutcome, SearchError> {
    let targets = validate(store, request)?;
    let start = Instant::now();
    let deadline = request.timeout.and_then(|t| start.checked_add(t));
    let mut stats = SearchStats { queue_size: queue.len(), ..Default::default() };
    let expired = deadline.is_some_and(|d| Instant::now() >= d);
    if !expired && !queue_can_distinguish(store, queue, &targets) {
        stats.wall_time = start.elapsed();
        return Ok(SearchOutcome { result: SearchResult::NoRe, stats });
    }
    let mut cell = LocalBest { best: None };
    let mut timed_out = false;
    for root in 0..queue.len() {
        if request.bound_pruning {
            if let Some(b) = cell.snapshot() {
                if queue.entries[root].cost >= b {
                    // Roots are sorted, so every remaining root subtree
                    // is at least this expensive.
                    stats.bound_prunes += 1;
                    break;
                }
            }
        }
        let report = explore_root(
            store,
            queue,
            root,
            &targets,
            &mut cell,
            request.bound_pruning,
            deadline,
            &mut stats,
        );
        if report.timed_out {
            timed_out = true;
            break;
        }
        if !report.found_any && report.exhaustive {
            break;
        }
    }
    stats.wall_time = start.elapsed();
    Ok(SearchOutcome { result: finish(queue, cell.best, timed_out), stats })
}

/// Parallel variant: workers claim roots in ascending order, share the
/// incumbent, and stop early when a fully explored root subtree proves
/// that no solution exists to its right. The reported cost and the
/// found/none classification match [`remi_search`] for every thread
/// count; among equally cheap solutions the returned expression may
/// differ. Statistics other than `queue_size` depend on scheduling.
pub fn p_remi(
    store: &TripleStore,
    queue: &CandidateQueue,
    request: &SearchRequest,
) -> Result<SearchOutcome, SearchError> {
    let targets = validate(store, request)?;
    if request.threads == 0 {
        return Err(SearchError::ZeroThreads);
    }
    let start = Instant::now();
    let deadline = request.timeout.and_then(|t| start.checked_add(t));
    let expired = deadline.is_some_and(|d| Instant::now() >= d);
    if !expired && !queue_can_distinguish(store, queue, &targets) {
        let mut stats = SearchStats { queue_size: queue.len(), ..Default::default() };
        stats.wall_time = start.elapsed();
        return Ok(SearchOutcome { result: SearchResult::NoRe, stats });
    }
    let shared = Shared {
        best: Mutex::new(None),
        cancel_from: AtomicUsize::new(usize::MAX),
        next_root: AtomicUsize::new(0),
        timed_out: AtomicBool::new(false),
    };
    let mut stats = SearchStats { queue_size: queue.len(), ..Default::default() };
    let worker_stats: Vec<SearchStats> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..request.threads)
            .map(|_| {
                scope.spawn(|| {
                    worker(store, queue, &targets, &shared, request.bound_pruning, deadline)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    for ws in &worker_stats {
        stats.absorb(ws);
    }
    let timed_out = shared.timed_out.load(Ordering::Relaxed);
    let best = shared.best.into_inner().expect("best cell poisoned");
    stats.wall_time = start.elapsed();
    Ok(SearchOutcome { result: finish(queue, best, timed_out), stats })
}

/// Depth-first walk of one root subtree, exposed for instrumentation.
/// `best_in` seeds the bound; improvements are reported back through
/// the returned record.
pub fn dfs_remi(
    store: &TripleStore,
    queue: &CandidateQueue,
    root: usize,
    targets: &[Term],
    best_in: Option<Cost>,
    bound_pruning: bool,
    stats: &mut SearchStats,
) -> DfsReport {
    let targets = normalize_targets(targets);
    let mut cell = LocalBest { best: best_in.map(|c| (Vec::new(), c)) };
    let report = explore_root(store, queue, root, &targets, &mut cell, bound_pruning, None, stats);
    let best = cell.best.filter(|(seq, _)| !seq.is_empty());
    DfsReport {
        best: best.map(|(seq, cost)| (expression_of(queue, &seq), cost)),
        found_any: report.found_any,
        exhaustive: report.exhaustive,
    }
}

/// What one root subtree produced.
#[derive(Debug, Clone)]
pub struct DfsReport {
    /// The cheapest solution in the subtree that beats `best_in`.
    pub best: Option<(Expression, Cost)>,
    /// Whether any node in the subtree satisfied the targets.
    pub found_any: bool,
    /// True when the subtree was fully explored, so "no solution found"
    /// means "no solution exists" below this root.
    pub exhaustive: bool,
}

/// Unpruned reference search: enumerates every strictly increasing
/// index sequence of up to `max_components` candidates in pre-order,
/// evaluates each conjunction from scratch, and keeps the first
/// strictly cheapest solution.
pub fn oracle_min_re(
    store: &TripleStore,
    queue: &CandidateQueue,
    targets: &[Term],
    max_components: usize,
) -> OracleOutcome {
    let targets = normalize_targets(targets);
    let mut state = OracleState { best: None, nodes: 0 };
    let mut prefix = Vec::new();
    if max_components > 0 {
        oracle_walk(
            store,
            queue,
            &targets,
            max_components,
            0,
            Cost::zero(),
            &mut prefix,
            &mut state,
        );
    }
    OracleOutcome {
        best: state.best.map(|(seq, cost)| (expression_of(queue, &seq), cost)),
        nodes_enumerated: state.nodes,
    }
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub best: Option<(Expression, Cost)>,
    pub nodes_enumerated: u64,
}

struct OracleState {
    best: Option<(Vec<usize>, Cost)>,
    nodes: u64,
}

#[allow(clippy::too_many_arguments)]
fn oracle_walk(
    store: &TripleStore,
    queue: &CandidateQueue,
    targets: &[Term],
    max_components: usize,
    start: usize,
    cost_so_far: Cost,
    prefix: &mut Vec<usize>,
    state: &mut OracleState,
) {
    for j in start..queue.len() {
        prefix.push(j);
        state.nodes += 1;
        let cost = cost_so_far.plus(&queue.entries[j].cost);
        let expr = expression_of(queue, prefix);
        if store.bindings_of_expression(&expr) == targets {
            let better = match &state.best {
                Some((_, incumbent)) => cost < *incumbent,
                None => true,
            };
            if better {
                state.best = Some((prefix.clone(), cost.clone()));
            }
        }
        if prefix.len() < max_components {
            oracle_walk(store, queue, targets, max_components, j + 1, cost.clone(), prefix, state);
        }
        prefix.pop();
    }
}

fn validate(store: &TripleStore, request: &SearchRequest) -> Result<Vec<Term>, SearchError> {
    if request.targets.is_empty() {
        return Err(SearchError::EmptyTargets);
    }
    for &t in &request.targets {
        if t.kind != TermKind::Entity {
            return Err(SearchError::NotAnEntity(store.dict().term_display(t)));
        }
    }
    Ok(normalize_targets(&request.targets))
}

fn normalize_targets(targets: &[Term]) -> Vec<Term> {
    let mut out = targets.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

fn expression_of(queue: &CandidateQueue, seq: &[usize]) -> Expression {
    Expression::new(seq.iter().map(|&i| queue.entries[i].expr).collect())
}

/// Whether any conjunction over the queue can have exactly the targets
/// as bindings. Adding a component only ever shrinks bindings, so the
/// conjunction of every candidate reaches the smallest binding set the
/// queue allows; if even that set keeps an extra term, the walk would
/// exhaust the whole space before concluding that nothing works. Every
/// candidate binds all targets, so the running intersection can stop as
/// soon as it reaches them.
fn queue_can_distinguish(store: &TripleStore, queue: &CandidateQueue, targets: &[Term]) -> bool {
    let mut acc: Option<Vec<Term>> = None;
    for entry in &queue.entries {
        let bindings = store.bindings_of_subgraph(&entry.expr);
        acc = Some(match acc {
            None => bindings.to_vec(),
            Some(prev) => intersect_sorted(&prev, &bindings),
        });
        if acc.as_deref() == Some(targets) {
            return true;
        }
    }
    acc.as_deref() == Some(targets)
}

fn finish(
    queue: &CandidateQueue,
    best: Option<(Vec<usize>, Cost)>,
    timed_out: bool,
) -> SearchResult {
    let best = best.map(|(seq, cost)| (expression_of(queue, &seq), cost));
    if timed_out {
        SearchResult::TimedOut { best }
    } else {
        match best {
            Some((expression, cost)) => SearchResult::Found { expression, cost },
            None => SearchResult::NoRe,
        }
    }
}

/// Access to the incumbent solution, plus the signals workers exchange.
/// The sequential cell is plain state; the parallel cell wraps the
/// shared structures.
trait BestCell {
    fn snapshot(&self) -> Option<Cost>;
    fn offer(&mut self, seq: &[usize], cost: &Cost);
    fn cancelled(&self, _root: usize) -> bool {
        false
    }
    fn flag_timeout(&mut self) {}
}

struct LocalBest {
    best: Option<(Vec<usize>, Cost)>,
}

impl BestCell for LocalBest {
    fn snapshot(&self) -> Option<Cost> {
        self.best.as_ref().map(|(_, c)| c.clone())
    }

    fn offer(&mut self, seq: &[usize], cost: &Cost) {
        let better = match &self.best {
            Some((_, incumbent)) => *cost < *incumbent,
            None => true,
        };
        if better {
            self.best = Some((seq.to_vec(), cost.clone()));
        }
    }
}

struct Shared {
    best: Mutex<Option<(Vec<usize>, Cost)>>,
    /// Smallest root index whose subtree was fully explored without a
    /// solution; roots to its right are cancelled.
    cancel_from: AtomicUsize,
    next_root: AtomicUsize,
    timed_out: AtomicBool,
}

struct SharedCell<'a> {
    shared: &'a Shared,
}

impl BestCell for SharedCell<'_> {
    fn snapshot(&self) -> Option<Cost> {
        self.shared.best.lock().expect("best cell poisoned").as_ref().map(|(_, c)| c.clone())
    }

    fn offer(&mut self, seq: &[usize], cost: &Cost) {
        // Compare and swap under one lock so concurrent improvements
        // cannot clobber a cheaper incumbent.
        let mut guard = self.shared.best.lock().expect("best cell poisoned");
        let better = match guard.as_ref() {
            Some((_, incumbent)) => *cost < *incumbent,
            None => true,
        };
        if better {
            *guard = Some((seq.to_vec(), cost.clone()));
        }
    }

    fn cancelled(&self, root: usize) -> bool {
        // Relaxed suffices: the value itself says which roots are dead,
        // and acting on a stale value only delays the cancellation.
        root > self.shared.cancel_from.load(Ordering::Relaxed)
    }

    fn flag_timeout(&mut self) {
        self.shared.timed_out.store(true, Ordering::Relaxed);
    }
}

fn worker(
    store: &TripleStore,
    queue: &CandidateQueue,
    targets: &[Term],
    shared: &Shared,
    bound_pruning: bool,
    deadline: Option<Instant>,
) -> SearchStats {
    let mut stats = SearchStats::default();
    loop {
        if shared.timed_out.load(Ordering::Relaxed) {
            break;
        }
        let root = shared.next_root.fetch_add(1, Ordering::Relaxed);
        if root >= queue.len() {
            break;
        }
        let mut cell = SharedCell { shared };
        if cell.cancelled(root) {
            break;
        }
        if bound_pruning {
            if let Some(b) = cell.snapshot() {
                if queue.entries[root].cost >= b {
                    stats.bound_prunes += 1;
                    break;
                }
            }
        }
        let report = explore_root(
            store,
            queue,
            root,
            targets,
            &mut cell,
            bound_pruning,
            deadline,
            &mut stats,
        );
        if report.timed_out {
            break;
        }
        if !report.found_any && report.exhaustive {
            shared.cancel_from.fetch_min(root, Ordering::Relaxed);
            break;
        }
    }
    stats
}

struct Frame {
    idx: usize,
    cost: Cost,
    bindings: std::sync::Arc<Vec<Term>>,
    /// Next queue index to try as a child.
    next: usize,
}

struct RootReport {
    found_any: bool,
    exhaustive: bool,
    timed_out: bool,
}

enum Visit {
    Satisfied,
    NotSatisfied,
    BoundSkip,
    TimedOut,
}

fn test_node<S: BestCell>(
    cost: &Cost,
    bindings: &[Term],
    targets: &[Term],
    cell: &mut S,
    bound_pruning: bool,
    deadline: Option<Instant>,
    stats: &mut SearchStats,
) -> Visit {
    if let Some(d) = deadline {
        if Instant::now() >= d {
            cell.flag_timeout();
            return Visit::TimedOut;
        }
    }
    stats.nodes_visited += 1;
    if bound_pruning {
        if let Some(b) = cell.snapshot() {
            if *cost >= b {
                stats.bound_prunes += 1;
                return Visit::BoundSkip;
            }
        }
    }
    stats.re_tests += 1;
    if bindings == targets {
        Visit::Satisfied
    } else {
        Visit::NotSatisfied
    }
}

#[allow(clippy::too_many_arguments)]
fn explore_root<S: BestCell>(
    store: &TripleStore,
    queue: &CandidateQueue,
    root: usize,
    targets: &[Term],
    cell: &mut S,
    bound_pruning: bool,
    deadline: Option<Instant>,
    stats: &mut SearchStats,
) -> RootReport {
    let mut found_any = false;
    let mut exhaustive = true;
    let root_cost = queue.entries[root].cost.clone();
    let root_bindings = store.bindings_of_subgraph(&queue.entries[root].expr);
    match test_node(&root_cost, &root_bindings, targets, cell, bound_pruning, deadline, stats) {
        Visit::TimedOut => return RootReport { found_any, exhaustive: false, timed_out: true },
        Visit::BoundSkip => return RootReport { found_any, exhaustive: false, timed_out: false },
        Visit::Satisfied => {
            cell.offer(&[root], &root_cost);
            stats.prunes_by_depth += 1;
            return RootReport { found_any: true, exhaustive, timed_out: false };
        }
        Visit::NotSatisfied => {}
    }
    let mut stack =
        vec![Frame { idx: root, cost: root_cost, bindings: root_bindings, next: root + 1 }];
    while !stack.is_empty() {
        if cell.cancelled(root) {
            return RootReport { found_any, exhaustive: false, timed_out: false };
        }
        let top = stack.len() - 1;
        if stack[top].next >= queue.len() {
            stack.pop();
            continue;
        }
        let j = stack[top].next;
        let child_cost = stack[top].cost.plus(&queue.entries[j].cost);
        if bound_pruning {
            if let Some(b) = cell.snapshot() {
                if child_cost >= b {
                    // Later children of this frame cost at least as
                    // much, so the whole frame is done.
                    stats.bound_prunes += 1;
                    exhaustive = false;
                    stack.pop();
                    continue;
                }
            }
        }
        stack[top].next = j + 1;
        let child_bindings = std::sync::Arc::new(intersect_sorted(
            &stack[top].bindings,
            &store.bindings_of_subgraph(&queue.entries[j].expr),
        ));
        match test_node(&child_cost, &child_bindings, targets, cell, bound_pruning, deadline, stats)
        {
            Visit::TimedOut => return RootReport { found_any, exhaustive: false, timed_out: true },
            Visit::BoundSkip => {
                exhaustive = false;
                if let Some(b) = cell.snapshot() {
                    while stack.last().is_some_and(|f| f.cost >= b) {
                        stack.pop();
                    }
                }
            }
            Visit::Satisfied => {
                found_any = true;
                let mut seq: Vec<usize> = stack.iter().map(|f| f.idx).collect();
                seq.push(j);
                cell.offer(&seq, &child_cost);
                stats.prunes_by_depth += 1;
                stack.pop();
                stats.side_prunes += 1;
            }
            Visit::NotSatisfied => {
                stack.push(Frame {
                    idx: j,
                    cost: child_cost,
                    bindings: child_bindings,
                    next: j + 1,
                });
            }
        }
    }
    RootReport { found_any, exhaustive, timed_out: false }
}
