//! Command-line front-end: load a knowledge base, build the prominence
//! model, then either describe a target set (find its cheapest
//! referring expression) or summarize a single entity (its top-k least
//! complex subgraph expressions). One JSON document goes to standard
//! output; diagnostics go to standard error.
//!
//! Exit codes: 0 success (including "no referring expression"), 1 input
//! error, 2 unresolvable target, 3 timeout without any result.

use crate::enumerate::{
    build_queue, common_subgraphs, subgraph_expressions_of_entity, EnumOptions, Language,
};
use crate::expr::{Arg, Expression, SubgraphExpression};
use crate::prominence::{ProminenceModel, RankMode};
use crate::search::{p_remi, remi_search, SearchRequest, SearchResult, SearchStats};
use crate::store::{TripleStore, DEFAULT_CACHE_CAPACITY};
use crate::term::{Term, TermKind};
use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use serde::Serialize;
use std::collections::HashSet;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    /// Fact frequency.
    Fr,
    /// Pagerank scores from --pagerank.
    Pr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Exact conditional ranks.
    Exact,
    /// Power-law estimate for object ranks.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LanguageArg {
    /// Single bound atoms only.
    Standard,
    /// All shapes up to three atoms.
    Extended,
}

/// Everything one invocation needs, straight from the flags.
#[derive(Debug, Parser)]
#[command(
    name = "refex",
    version,
    about = "Mine minimal-complexity referring expressions over an RDF knowledge base"
)]
pub struct RunConfig {
    /// N-Triples file to load.
    #[arg(long, value_name = "PATH")]
    pub kb: PathBuf,

    /// Target entity IRIs, comma-separated, or @FILE with one per line.
    #[arg(long, value_name = "LIST|@FILE")]
    pub targets: String,

    /// Prominence metric.
    #[arg(long, value_enum, default_value = "fr", requires_if("pr", "pagerank"))]
    pub metric: MetricArg,

    /// Tab-separated `<iri>\tscore` pagerank file.
    #[arg(long, value_name = "PATH")]
    pub pagerank: Option<PathBuf>,

    /// Rank handling for object terms.
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,

    /// Expression language.
    #[arg(long, value_enum, default_value = "extended")]
    pub language: LanguageArg,

    /// Worker threads for the search.
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub threads: usize,

    /// Search budget in seconds; fractions allowed.
    #[arg(long, value_name = "SECS")]
    pub timeout: Option<f64>,

    /// Fraction of entities whose incoming edges get inverse predicates.
    #[arg(long, default_value_t = 0.01, value_name = "F")]
    pub inverse_top: f64,

    /// Fraction of entities treated as too prominent to expand through.
    #[arg(long, default_value_t = 0.05, value_name = "F")]
    pub prominent_cutoff: f64,

    /// Query cache capacity in entries; 0 disables caching.
    #[arg(long, default_value_t = DEFAULT_CACHE_CAPACITY, value_name = "N")]
    pub cache: usize,

    /// Predicate IRI to exclude; repeatable. Also excludes its derived
    /// inverse.
    #[arg(long = "exclude-predicate", value_name = "IRI")]
    pub exclude_predicate: Vec<String>,

    /// Drop inverse predicates from derived expressions.
    #[arg(long)]
    pub no_inverse: bool,

    /// Emit the K least complex subgraph expressions of a single target
    /// instead of searching for a referring expression.
    #[arg(long, value_name = "K")]
    pub summarize: Option<usize>,

    /// Print search statistics to standard error.
    #[arg(long)]
    pub stats: bool,
}

/// Parses arguments, runs the command, prints the JSON document, and
/// returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return 0;
            }
            eprintln!("{err}");
            return 1;
        }
    };
    let (code, document) = execute(&config);
    println!("{document}");
    code
}

/// Runs one command and returns (exit code, JSON document). Split from
/// [`run`] so tests can inspect the document without capturing stdout.
pub fn execute(config: &RunConfig) -> (i32, String) {
    match try_execute(config) {
        Ok((code, document)) => (code, document),
        Err(failure) => {
            let dto = ErrorDto { status: "error", message: failure.message() };
            (failure.exit_code(), to_json(&dto))
        }
    }
}

enum Failure {
    Input(String),
    Resolution(String),
}

impl Failure {
    fn message(&self) -> String {
        match self {
            Failure::Input(m) | Failure::Resolution(m) => m.clone(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Resolution(_) => 2,
        }
    }
}

fn try_execute(config: &RunConfig) -> Result<(i32, String), Failure> {
    validate(config)?;
    let text = std::fs::read_to_string(&config.kb)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", config.kb.display())))?;
    let store = TripleStore::parse_ntriples(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", config.kb.display())))?
        .materialize_inverses(config.inverse_top)
        .with_cache_capacity(config.cache);
    let mut model = ProminenceModel::build_frequency_model(&store);
    if let Some(path) = &config.pagerank {
        let scores = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        model
            .load_pagerank(&store, &scores)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    if config.mode == ModeArg::Fitted {
        model.enable_fitted(&store);
    }
    let targets = resolve_targets(&store, &config.targets)?;
    let opts = enum_options(&store, config);

    if let Some(k) = config.summarize {
        let [target] = targets.as_slice() else {
            return Err(Failure::Input(format!(
                "--summarize needs exactly one target, got {}",
                targets.len()
            )));
        };
        return summarize(&store, &model, *target, k, config, &opts);
    }
    describe(&store, &model, targets, config, &opts)
}

fn validate(config: &RunConfig) -> Result<(), Failure> {
    for (name, value) in
        [("--inverse-top", config.inverse_top), ("--prominent-cutoff", config.prominent_cutoff)]
    {
        if !(0.0..=1.0).contains(&value) {
            return Err(Failure::Input(format!("{name} must be in [0, 1], got {value}")));
        }
    }
    if config.threads == 0 {
        return Err(Failure::Input("--threads must be at least 1".to_string()));
    }
    if let Some(secs) = config.timeout {
        if !secs.is_finite() || secs < 0.0 {
            return Err(Failure::Input(format!(
                "--timeout must be a finite number of seconds ≥ 0, got {secs}"
            )));
        }
    }
    Ok(())
}

fn strip_angle(iri: &str) -> &str {
    let s = iri.trim();
    s.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(s)
}

fn resolve_targets(store: &TripleStore, spec: &str) -> Result<Vec<Term>, Failure> {
    let names: Vec<String> = if let Some(path) = spec.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect()
    } else {
        spec.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    };
    if names.is_empty() {
        return Err(Failure::Input("no targets given".to_string()));
    }
    let mut targets = Vec::with_capacity(names.len());
    for name in &names {
        let iri = strip_angle(name);
        match store.dict().lookup_entity(iri) {
            Some(t) => targets.push(t),
            None => {
                return Err(Failure::Resolution(format!(
                    "target <{iri}> is not in the knowledge base"
                )))
            }
        }
    }
    Ok(targets)
}

fn enum_options(store: &TripleStore, config: &RunConfig) -> EnumOptions {
    let mut exclude = HashSet::new();
    for raw in &config.exclude_predicate {
        let iri = strip_angle(raw);
        match store.dict().lookup_predicate(iri) {
            Some(p) => {
                exclude.insert(p);
                let inverse = format!("{iri}{}", crate::term::INVERSE_SUFFIX);
                if let Some(inv) = store.dict().lookup_predicate(&inverse) {
                    exclude.insert(inv);
                }
            }
            None => {
                eprintln!("note: excluded predicate <{iri}> does not occur in the knowledge base")
            }
        }
    }
    EnumOptions {
        language: match config.language {
            LanguageArg::Standard => Language::Standard,
            LanguageArg::Extended => Language::Extended,
        },
        prominent_cutoff: config.prominent_cutoff,
        exclude_predicates: exclude,
        include_inverse: !config.no_inverse,
    }
}

fn summarize(
    store: &TripleStore,
    model: &ProminenceModel,
    target: Term,
    k: usize,
    config: &RunConfig,
    opts: &EnumOptions,
) -> Result<(i32, String), Failure> {
    let exprs = subgraph_expressions_of_entity(store, model, target, opts)
        .map_err(|e| Failure::Resolution(e.to_string()))?;
    let queue = build_queue(model, store, &exprs)
        .map_err(|e| Failure::Input(format!("complexity model failure: {e}")))?;
    let expressions: Vec<SummaryEntryDto> = queue
        .top_k(k)
        .iter()
        .map(|entry| SummaryEntryDto {
            atoms: atoms_dto(store, &entry.expr),
            complexity_bits: entry.cost.bits(),
            text: entry.text.clone(),
        })
        .collect();
    let dto = SummarizeDto {
        status: "ok",
        target: store.dict().term_text(target).to_string(),
        derived: queue.len(),
        expressions,
        config: config_dto(config, model),
    };
    Ok((0, to_json(&dto)))
}

fn describe(
    store: &TripleStore,
    model: &ProminenceModel,
    targets: Vec<Term>,
    config: &RunConfig,
    opts: &EnumOptions,
) -> Result<(i32, String), Failure> {
    let common = common_subgraphs(store, model, &targets, opts)
        .map_err(|e| Failure::Resolution(e.to_string()))?;
    let queue = build_queue(model, store, &common)
        .map_err(|e| Failure::Input(format!("complexity model failure: {e}")))?;
    let request = SearchRequest {
        targets: targets.clone(),
        threads: config.threads,
        timeout: config.timeout.map(Duration::from_secs_f64),
        bound_pruning: true,
    };
    let outcome = if config.threads == 1 {
        remi_search(store, &queue, &request)
    } else {
        p_remi(store, &queue, &request)
    }
    .map_err(|e| Failure::Input(e.to_string()))?;

    let (status, best, code) = match outcome.result {
        SearchResult::Found { expression, cost } => ("found", Some((expression, cost)), 0),
        SearchResult::NoRe => ("no_re", None, 0),
        SearchResult::TimedOut { best } => {
            let code = if best.is_some() { 0 } else { 3 };
            ("timeout", best, code)
        }
    };
    if config.stats {
        print_stats(&outcome.stats, store);
    }
    let dto = DescribeDto {
        status,
        targets: targets.iter().map(|&t| store.dict().term_text(t).to_string()).collect(),
        expression: best
            .as_ref()
            .map(|(e, _)| e.components.iter().map(|se| atoms_dto(store, se)).collect()),
        expression_text: best.as_ref().map(|(e, _)| e.display_with(store.dict())),
        complexity_bits: best.as_ref().map(|(_, c)| c.bits()),
        stats: stats_dto(&outcome.stats, store),
        config: config_dto(config, model),
    };
    Ok((code, to_json(&dto)))
}

fn print_stats(stats: &SearchStats, store: &TripleStore) {
    let (hits, misses) = store.cache_stats();
    eprintln!("queue size:      {}", stats.queue_size);
    eprintln!("nodes visited:   {}", stats.nodes_visited);
    eprintln!("tests run:       {}", stats.re_tests);
    eprintln!("depth prunes:    {}", stats.prunes_by_depth);
    eprintln!("side prunes:     {}", stats.side_prunes);
    eprintln!("bound prunes:    {}", stats.bound_prunes);
    eprintln!("cache hit/miss:  {hits}/{misses}");
    eprintln!("wall time:       {:.3} ms", stats.wall_time.as_secs_f64() * 1e3);
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ArgDto {
    Variable { name: String },
    Entity { iri: String },
    Literal { value: String },
    Blank { label: String },
}

#[derive(Serialize)]
struct AtomDto {
    predicate: String,
    subject: ArgDto,
    object: ArgDto,
}

#[derive(Serialize)]
struct StatsDto {
    nodes_visited: u64,
    re_tests: u64,
    prunes_by_depth: u64,
    side_prunes: u64,
    bound_prunes: u64,
    queue_size: usize,
    wall_time_ms: f64,
    cache_hits: u64,
    cache_misses: u64,
}

#[derive(Serialize)]
struct ConfigDto {
    kb: String,
    pagerank: Option<String>,
    metric: &'static str,
    mode: &'static str,
    language: &'static str,
    threads: usize,
    timeout_seconds: Option<f64>,
    inverse_top: f64,
    prominent_cutoff: f64,
    cache: usize,
    exclude_predicates: Vec<String>,
    no_inverse: bool,
    summarize: Option<usize>,
}

#[derive(Serialize)]
struct DescribeDto {
    status: &'static str,
    targets: Vec<String>,
    expression: Option<Vec<Vec<AtomDto>>>,
    expression_text: Option<String>,
    complexity_bits: Option<f64>,
    stats: StatsDto,
    config: ConfigDto,
}

#[derive(Serialize)]
struct SummarizeDto {
    status: &'static str,
    target: String,
    /// How many expressions were derived before truncating to k.
    derived: usize,
    expressions: Vec<SummaryEntryDto>,
    config: ConfigDto,
}

#[derive(Serialize)]
struct SummaryEntryDto {
    atoms: Vec<AtomDto>,
    complexity_bits: f64,
    text: String,
}

#[derive(Serialize)]
struct ErrorDto {
    status: &'static str,
    message: String,
}

fn arg_dto(store: &TripleStore, arg: &Arg) -> ArgDto {
    match arg {
        Arg::Variable(v) => ArgDto::Variable { name: v.name().to_string() },
        Arg::Constant(t) => {
            let text = store.dict().term_text(*t).to_string();
            match t.kind {
                TermKind::Entity => ArgDto::Entity { iri: text },
                TermKind::Literal => ArgDto::Literal { value: text },
                TermKind::Blank => ArgDto::Blank { label: text },
            }
        }
    }
}

fn atoms_dto(store: &TripleStore, se: &SubgraphExpression) -> Vec<AtomDto> {
    se.atoms()
        .iter()
        .map(|atom| AtomDto {
            predicate: store.dict().predicate_iri(atom.predicate).to_string(),
            subject: arg_dto(store, &atom.subject),
            object: arg_dto(store, &atom.object),
        })
        .collect()
}

fn stats_dto(stats: &SearchStats, store: &TripleStore) -> StatsDto {
    let (cache_hits, cache_misses) = store.cache_stats();
    StatsDto {
        nodes_visited: stats.nodes_visited,
        re_tests: stats.re_tests,
        prunes_by_depth: stats.prunes_by_depth,
        side_prunes: stats.side_prunes,
        bound_prunes: stats.bound_prunes,
        queue_size: stats.queue_size,
        wall_time_ms: stats.wall_time.as_secs_f64() * 1e3,
        cache_hits,
        cache_misses,
    }
}

fn config_dto(config: &RunConfig, model: &ProminenceModel) -> ConfigDto {
    ConfigDto {
        kb: config.kb.display().to_string(),
        pagerank: config.pagerank.as_ref().map(|p| p.display().to_string()),
        metric: match config.metric {
            MetricArg::Fr => "fr",
            MetricArg::Pr => "pr",
        },
        mode: match model.mode() {
            RankMode::Exact => "exact",
            RankMode::Fitted => "fitted",
        },
        language: match config.language {
            LanguageArg::Standard => "standard",
            LanguageArg::Extended => "extended",
        },
        threads: config.threads,
        timeout_seconds: config.timeout,
        inverse_top: config.inverse_top,
        prominent_cutoff: config.prominent_cutoff,
        cache: config.cache,
        exclude_predicates: config.exclude_predicate.clone(),
        no_inverse: config.no_inverse,
        summarize: config.summarize,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("JSON serialization cannot fail")
}

/// Rebuilds an [`Expression`] from the JSON `expression` field against
/// the dictionary of a loaded store. Used to check that emitted
/// documents really denote the expression the search found.
pub fn expression_from_json(
    store: &TripleStore,
    expression: &serde_json::Value,
) -> Option<Expression> {
    let components = expression.as_array()?;
    let mut out = Vec::with_capacity(components.len());
    for component in components {
        out.push(subgraph_from_json(store, component)?);
    }
    Some(Expression::new(out))
}

fn subgraph_from_json(
    store: &TripleStore,
    atoms: &serde_json::Value,
) -> Option<SubgraphExpression> {
    let dict = store.dict();
    let atoms = atoms.as_array()?;
    let pred = |a: &serde_json::Value| dict.lookup_predicate(a.get("predicate")?.as_str()?);
    let object = |a: &serde_json::Value| -> Option<Term> {
        let o = a.get("object")?;
        match o.get("kind")?.as_str()? {
            "entity" => dict.lookup_entity(o.get("iri")?.as_str()?),
            "literal" => dict.lookup_literal(o.get("value")?.as_str()?),
            "blank" => dict.lookup_blank(o.get("label")?.as_str()?),
            _ => None,
        }
    };
    let is_var = |a: &serde_json::Value, role: &str, name: &str| {
        a.get(role).and_then(|v| v.get("kind")).and_then(|k| k.as_str()) == Some("variable")
            && a.get(role).and_then(|v| v.get("name")).and_then(|n| n.as_str()) == Some(name)
    };
    match atoms.as_slice() {
        [a] => Some(SubgraphExpression::one_atom(pred(a)?, object(a)?)),
        [a, b] if is_var(a, "object", "y") && is_var(b, "subject", "y") => {
            Some(SubgraphExpression::path(pred(a)?, pred(b)?, object(b)?))
        }
        [a, b] => SubgraphExpression::closed2(dict, pred(a)?, pred(b)?),
        [a, b, c] if is_var(a, "object", "y") && is_var(b, "subject", "y") => {
            SubgraphExpression::path_star(
                dict,
                pred(a)?,
                (pred(b)?, object(b)?),
                (pred(c)?, object(c)?),
            )
        }
        [a, b, c] => SubgraphExpression::closed3(dict, pred(a)?, pred(b)?, pred(c)?),
        _ => None,
    }
}
