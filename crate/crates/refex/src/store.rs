//! The in-memory triple store: N-Triples parsing, dictionary encoding,
//! indexes, and inverse-fact materialization.
//!
//! A store is built once from an N-Triples document, optionally extended
//! with inverse facts, and is immutable afterwards. Three indexes back
//! the evaluation operations in [`crate::eval`]:
//!
//! * subject → predicate → objects (sorted),
//! * predicate → object → subjects (sorted),
//! * predicate → distinct objects with fact counts.
//!
//! The triple list itself is kept sorted by (predicate, subject, object)
//! so that per-predicate slices can be served without copying.

use crate::cache::LruCache;
use crate::expr::{Assignment, Atom, SubgraphExpression};
use crate::term::{Dictionary, PredId, Term, TermKind};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Default capacity of the query result cache.
pub const DEFAULT_CACHE_CAPACITY: usize = 100_000;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// One fact p(s, o).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: PredId,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum CacheKey {
    Atom(Atom),
    Subgraph(SubgraphExpression),
}

#[derive(Debug, Clone)]
pub(crate) enum CacheValue {
    Assignments(Arc<Vec<Assignment>>),
    Bindings(Arc<Vec<Term>>),
}

/// An immutable, indexed fact set.
#[derive(Debug)]
pub struct TripleStore {
    pub(crate) dict: Dictionary,
    /// Sorted by (predicate, subject, object), no duplicates.
    pub(crate) triples: Vec<Triple>,
    /// subject → predicate → sorted objects.
    pub(crate) spo: HashMap<Term, BTreeMap<PredId, Vec<Term>>>,
    /// Per predicate: object → sorted subjects.
    pub(crate) pos: Vec<HashMap<Term, Vec<Term>>>,
    /// Per predicate: (distinct object, fact count), sorted by object.
    pub(crate) pred_objects: Vec<Vec<(Term, u32)>>,
    /// Facts per predicate.
    pub(crate) pred_counts: Vec<u32>,
    /// Slice bounds of each predicate's facts within `triples`.
    pub(crate) pred_ranges: Vec<(usize, usize)>,
    pub(crate) cache: Mutex<LruCache<CacheKey, CacheValue>>,
    cache_capacity: usize,
}

impl TripleStore {
    /// Parses an N-Triples document. Supports IRIs, `_:label` blank
    /// nodes, literals with language or datatype tags, `#` comments and
    /// blank lines. Duplicate triples are dropped.
    pub fn parse_ntriples(text: &str) -> Result<Self, ParseError> {
        let mut dict = Dictionary::new();
        let mut triples = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let parsed =
                parse_line(line).map_err(|message| ParseError::Syntax { line: i + 1, message })?;
            let Some((s, p, o)) = parsed else { continue };
            let subject = match s {
                ParsedTerm::Iri(iri) => dict.intern_entity(&iri),
                ParsedTerm::Blank(label) => dict.intern_blank(&label),
                ParsedTerm::Literal(_) => unreachable!("parser rejects literal subjects"),
            };
            let predicate = match p {
                ParsedTerm::Iri(iri) => dict.intern_predicate(&iri),
                _ => unreachable!("parser only yields IRI predicates"),
            };
            let object = match o {
                ParsedTerm::Iri(iri) => dict.intern_entity(&iri),
                ParsedTerm::Blank(label) => dict.intern_blank(&label),
                ParsedTerm::Literal(lexical) => dict.intern_literal(&lexical),
            };
            let triple = Triple { subject, predicate, object };
            if seen.insert(triple) {
                triples.push(triple);
            }
        }
        Ok(Self::from_parts(dict, triples, DEFAULT_CACHE_CAPACITY))
    }

    pub(crate) fn from_parts(
        dict: Dictionary,
        mut triples: Vec<Triple>,
        cache_capacity: usize,
    ) -> Self {
        triples.sort_unstable_by_key(|t| (t.predicate, t.subject, t.object));
        triples.dedup();

        let num_preds = dict.num_predicates();
        let mut spo: HashMap<Term, BTreeMap<PredId, Vec<Term>>> = HashMap::new();
        let mut pos: Vec<HashMap<Term, Vec<Term>>> = vec![HashMap::new(); num_preds];
        let mut pred_counts = vec![0u32; num_preds];
        let mut pred_ranges = vec![(0usize, 0usize); num_preds];

        for (i, t) in triples.iter().enumerate() {
            let pid = t.predicate.0 as usize;
            spo.entry(t.subject).or_default().entry(t.predicate).or_default().push(t.object);
            pos[pid].entry(t.object).or_default().push(t.subject);
            if pred_counts[pid] == 0 {
                pred_ranges[pid].0 = i;
            }
            pred_counts[pid] += 1;
            pred_ranges[pid].1 = i + 1;
        }

        let pred_objects = pos
            .iter()
            .map(|by_object| {
                let mut objects: Vec<(Term, u32)> =
                    by_object.iter().map(|(o, subjects)| (*o, subjects.len() as u32)).collect();
                objects.sort_unstable_by_key(|(o, _)| *o);
                objects
            })
            .collect();

        TripleStore {
            dict,
            triples,
            spo,
            pos,
            pred_objects,
            pred_counts,
            pred_ranges,
            cache: Mutex::new(LruCache::new(cache_capacity)),
            cache_capacity,
        }
    }

    /// For every fact p(s, o) whose object is among the `top_fraction`
    /// most frequently occurring entities, adds the fact p⁻¹(o, s) under
    /// the materialized inverse of p. Literal and blank objects are never
    /// inverted, and inverse predicates are not inverted again.
    pub fn materialize_inverses(self, top_fraction: f64) -> Self {
        let fraction = top_fraction.clamp(0.0, 1.0);
        let take = (fraction * self.dict.num_entities() as f64).floor() as usize;
        if take == 0 {
            return self;
        }

        let frequencies = self.term_frequencies();
        let mut entities: Vec<Term> = (0..self.dict.num_entities() as u32)
            .map(|index| Term { kind: TermKind::Entity, index })
            .collect();
        entities.sort_by(|a, b| {
            let fa = frequencies.get(a).copied().unwrap_or(0);
            let fb = frequencies.get(b).copied().unwrap_or(0);
            fb.cmp(&fa).then_with(|| self.dict.term_text(*a).cmp(self.dict.term_text(*b)))
        });
        let top: HashSet<Term> = entities.into_iter().take(take).collect();

        let TripleStore { mut dict, triples, cache_capacity, .. } = self;
        let mut extended = triples.clone();
        for t in &triples {
            if dict.is_inverse(t.predicate) {
                continue;
            }
            if t.object.kind == TermKind::Entity && top.contains(&t.object) {
                let inverse = dict.intern_inverse(t.predicate);
                extended.push(Triple { subject: t.object, predicate: inverse, object: t.subject });
            }
        }
        Self::from_parts(dict, extended, cache_capacity)
    }

    /// Replaces the query cache with one of the given capacity.
    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.cache = Mutex::new(LruCache::new(capacity));
        self.cache_capacity = capacity;
        self
    }

    pub fn dict(&self) -> &Dictionary {
        &self.dict
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// All facts of one predicate, sorted by (subject, object).
    pub fn triples_of_predicate(&self, p: PredId) -> &[Triple] {
        let (start, end) = self.pred_ranges[p.0 as usize];
        &self.triples[start..end]
    }

    /// Objects o with p(s, o), sorted.
    pub fn objects_of(&self, s: Term, p: PredId) -> &[Term] {
        self.spo.get(&s).and_then(|by_pred| by_pred.get(&p)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// The (predicate, objects) pairs of one subject, in predicate order.
    pub fn predicate_objects_of(&self, s: Term) -> impl Iterator<Item = (PredId, &[Term])> {
        self.spo
            .get(&s)
            .into_iter()
            .flat_map(|by_pred| by_pred.iter().map(|(p, objects)| (*p, objects.as_slice())))
    }

    /// Subjects s with p(s, o), sorted.
    pub fn subjects_with_object(&self, p: PredId, o: Term) -> &[Term] {
        self.pos[p.0 as usize].get(&o).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Distinct objects of p with their fact counts, sorted by object.
    pub fn objects_with_counts(&self, p: PredId) -> &[(Term, u32)] {
        &self.pred_objects[p.0 as usize]
    }

    /// Number of facts with object o under predicate p.
    pub fn object_count(&self, p: PredId, o: Term) -> u32 {
        self.subjects_with_object(p, o).len() as u32
    }

    pub fn predicate_count(&self, p: PredId) -> u32 {
        self.pred_counts[p.0 as usize]
    }

    pub fn has_triple(&self, s: Term, p: PredId, o: Term) -> bool {
        self.objects_of(s, p).binary_search(&o).is_ok()
    }

    /// Number of facts in which each term occurs as subject or object.
    pub fn term_frequencies(&self) -> HashMap<Term, u32> {
        let mut freq: HashMap<Term, u32> = HashMap::new();
        for t in &self.triples {
            *freq.entry(t.subject).or_insert(0) += 1;
            *freq.entry(t.object).or_insert(0) += 1;
        }
        freq
    }

    pub fn cache_stats(&self) -> (u64, u64) {
        let cache = self.cache.lock().unwrap();
        (cache.hits(), cache.misses())
    }

    pub fn cache_capacity(&self) -> usize {
        self.cache_capacity
    }
}

#[derive(Debug)]
enum ParsedTerm {
    Iri(String),
    Blank(String),
    Literal(String),
}

/// Parses one line into subject, predicate, object; `None` for blank
/// lines and comments.
fn parse_line(line: &str) -> Result<Option<(ParsedTerm, ParsedTerm, ParsedTerm)>, String> {
    let mut scan = Scan::new(line);
    scan.skip_ws();
    if scan.at_end() || scan.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match scan.peek() {
        Some('<') => scan.parse_iriref().map(ParsedTerm::Iri)?,
        Some('_') => scan.parse_blank().map(ParsedTerm::Blank)?,
        Some('"') => return Err("literal not allowed as subject".to_owned()),
        _ => return Err("expected IRI or blank node subject".to_owned()),
    };
    scan.skip_ws();
    if scan.peek() != Some('<') {
        return Err("expected IRI predicate".to_owned());
    }
    let predicate = scan.parse_iriref().map(ParsedTerm::Iri)?;
    scan.skip_ws();
    let object = match scan.peek() {
        Some('<') => scan.parse_iriref().map(ParsedTerm::Iri)?,
        Some('_') => scan.parse_blank().map(ParsedTerm::Blank)?,
        Some('"') => scan.parse_literal().map(ParsedTerm::Literal)?,
        None => return Err("missing object".to_owned()),
        _ => return Err("expected IRI, blank node, or literal object".to_owned()),
    };
    scan.skip_ws();
    if !scan.eat('.') {
        return Err("expected '.' terminator".to_owned());
    }
    scan.skip_ws();
    if !scan.at_end() && scan.peek() != Some('#') {
        return Err("unexpected content after '.'".to_owned());
    }
    Ok(Some((subject, predicate, object)))
}

struct Scan {
    chars: Vec<char>,
    pos: usize,
}

impl Scan {
    fn new(line: &str) -> Self {
        Scan { chars: line.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    fn parse_iriref(&mut self) -> Result<String, String> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.pos += 1;
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".to_owned()),
                Some('>') => break,
                Some('\\') => {
                    let c = self.parse_uchar()?;
                    if forbidden_in_iri(c) {
                        return Err(format!("escaped character {c:?} not allowed in IRI"));
                    }
                    iri.push(c);
                }
                Some(c) if forbidden_in_iri(c) => {
                    return Err(format!("character {c:?} not allowed in IRI"));
                }
                Some(c) => iri.push(c),
            }
        }
        if iri.is_empty() {
            return Err("empty IRI".to_owned());
        }
        Ok(iri)
    }

    fn parse_blank(&mut self) -> Result<String, String> {
        debug_assert_eq!(self.peek(), Some('_'));
        self.pos += 1;
        if !self.eat(':') {
            return Err("expected ':' after '_' in blank node".to_owned());
        }
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' {
                label.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        // A label cannot end with '.'; give trailing dots back to the
        // scanner so `_:b.` parses as label `b` plus the terminator.
        while label.ends_with('.') {
            label.pop();
            self.pos -= 1;
        }
        if label.is_empty() {
            return Err("empty blank node label".to_owned());
        }
        Ok(label)
    }

    /// Parses a literal with optional language or datatype tag and
    /// returns its canonical text form, so that differently escaped
    /// spellings of the same value intern to the same term.
    fn parse_literal(&mut self) -> Result<String, String> {
        debug_assert_eq!(self.peek(), Some('"'));
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".to_owned()),
                Some('"') => break,
                Some('\\') => value.push(self.parse_escape()?),
                Some(c) => value.push(c),
            }
        }
        let mut canonical = String::with_capacity(value.len() + 2);
        canonical.push('"');
        for c in value.chars() {
            match c {
                '\\' => canonical.push_str("\\\\"),
                '"' => canonical.push_str("\\\""),
                '\n' => canonical.push_str("\\n"),
                '\r' => canonical.push_str("\\r"),
                '\t' => canonical.push_str("\\t"),
                _ => canonical.push(c),
            }
        }
        canonical.push('"');
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let tag = self.parse_langtag()?;
                canonical.push('@');
                canonical.push_str(&tag);
            }
            Some('^') => {
                self.pos += 1;
                if !self.eat('^') {
                    return Err("expected '^^' before datatype IRI".to_owned());
                }
                if self.peek() != Some('<') {
                    return Err("expected datatype IRI after '^^'".to_owned());
                }
                let iri = self.parse_iriref()?;
                canonical.push_str("^^<");
                canonical.push_str(&iri);
                canonical.push('>');
            }
            _ => {}
        }
        Ok(canonical)
    }

    fn parse_langtag(&mut self) -> Result<String, String> {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                tag.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if tag.is_empty() {
            return Err("empty language tag".to_owned());
        }
        while self.peek() == Some('-') {
            self.pos += 1;
            tag.push('-');
            let mut part = false;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() {
                    tag.push(c);
                    self.pos += 1;
                    part = true;
                } else {
                    break;
                }
            }
            if !part {
                return Err("malformed language tag".to_owned());
            }
        }
        Ok(tag)
    }

    fn parse_escape(&mut self) -> Result<char, String> {
        match self.bump() {
            None => Err("dangling escape".to_owned()),
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{0008}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{000C}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.parse_hex(4),
            Some('U') => self.parse_hex(8),
            Some(c) => Err(format!("unknown escape '\\{c}'")),
        }
    }

    fn parse_uchar(&mut self) -> Result<char, String> {
        match self.bump() {
            Some('u') => self.parse_hex(4),
            Some('U') => self.parse_hex(8),
            _ => Err("only \\u and \\U escapes are allowed in IRIs".to_owned()),
        }
    }

    fn parse_hex(&mut self, digits: usize) -> Result<char, String> {
        let mut code = 0u32;
        for _ in 0..digits {
            let c = self.bump().ok_or("truncated unicode escape")?;
            let d = c.to_digit(16).ok_or_else(|| format!("invalid hex digit '{c}'"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }
}

fn forbidden_in_iri(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}
