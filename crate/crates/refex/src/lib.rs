//! Mining referring expressions of minimal estimated description length
//! over RDF knowledge bases.
//!
//! Given a set of target entities, the library searches for the cheapest
//! conjunction of small subgraph patterns whose bindings are exactly the
//! targets. "Cheapest" is measured in bits: every constant in an expression
//! is charged the log of its rank in a prominence ordering that is
//! conditioned on the part of the expression already written down.
//!
//! The pipeline is:
//!
//! 1. [`store`] loads an N-Triples file into an indexed in-memory triple
//!    store and optionally materializes inverse predicates for frequently
//!    referenced objects.
//! 2. [`prominence`] ranks entities and predicates, globally and
//!    conditionally, by fact frequency or by an externally supplied
//!    pagerank, and can fit a power law to rank/frequency data so that
//!    ranks of unseen combinations can be extrapolated.
//! 3. [`enumerate`] lists the subgraph expressions that describe each
//!    target, intersects them across targets, and sorts the result into a
//!    queue by estimated cost.
//! 4. [`search`] runs a pruned depth-first search (sequential or parallel)
//!    over conjunctions of queue entries and returns the cheapest
//!    referring expression, or reports that none exists.
//! 5. [`cli`] wires the above into the `refex` command line tool.

pub mod cache;
pub mod cli;
pub mod complexity;
pub mod enumerate;
pub mod eval;
pub mod expr;
pub mod prominence;
pub mod search;
pub mod store;
pub mod term;
#[doc(hidden)]
pub mod testkit;
