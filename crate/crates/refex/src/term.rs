//! Interned terms, predicates and the dictionary that maps them to text.
//!
//! All RDF terms are interned into dense integer ids so that the rest of
//! the crate can copy, hash and compare them cheaply. A [`Term`] carries
//! its kind (entity, literal or blank node) next to its index; two terms
//! with the same text but different kinds are distinct. Ids are assigned
//! in encounter order, so loading the same file twice produces the same
//! numbering.

use std::collections::HashMap;
use std::fmt;

/// Suffix appended to a predicate IRI to name its materialized inverse.
///
/// `^` cannot occur in a parsed IRI, so an inverse name can never collide
/// with a predicate that was read from the input.
pub const INVERSE_SUFFIX: &str = "^-1";

/// The three syntactic categories a term can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Entity,
    Literal,
    Blank,
}

/// An interned RDF term: an IRI, a literal or a blank node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub kind: TermKind,
    pub index: u32,
}

/// An interned predicate IRI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Everything the dictionary knows about one predicate.
#[derive(Debug, Clone)]
pub struct PredEntry {
    pub iri: String,
    /// For a materialized inverse, the predicate it inverts.
    pub inverse_of: Option<PredId>,
}

/// Bidirectional mapping between term/predicate text and dense ids.
#[derive(Debug, Default, Clone)]
pub struct Dictionary {
    entities: Interner,
    literals: Interner,
    blanks: Interner,
    predicates: Vec<PredEntry>,
    predicate_ids: HashMap<String, PredId>,
}

#[derive(Debug, Default, Clone)]
struct Interner {
    texts: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.ids.get(text) {
            return id;
        }
        let id = self.texts.len() as u32;
        self.texts.push(text.to_owned());
        self.ids.insert(text.to_owned(), id);
        id
    }

    fn lookup(&self, text: &str) -> Option<u32> {
        self.ids.get(text).copied()
    }

    fn text(&self, id: u32) -> &str {
        &self.texts[id as usize]
    }
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_entity(&mut self, iri: &str) -> Term {
        Term { kind: TermKind::Entity, index: self.entities.intern(iri) }
    }

    /// Interns a literal by its canonical lexical form, quotes and any
    /// language or datatype tag included.
    pub fn intern_literal(&mut self, lexical: &str) -> Term {
        Term { kind: TermKind::Literal, index: self.literals.intern(lexical) }
    }

    pub fn intern_blank(&mut self, label: &str) -> Term {
        Term { kind: TermKind::Blank, index: self.blanks.intern(label) }
    }

    pub fn intern_predicate(&mut self, iri: &str) -> PredId {
        if let Some(&id) = self.predicate_ids.get(iri) {
            return id;
        }
        let id = PredId(self.predicates.len() as u32);
        self.predicates.push(PredEntry { iri: iri.to_owned(), inverse_of: None });
        self.predicate_ids.insert(iri.to_owned(), id);
        id
    }

    /// Registers the inverse of `base`, or returns it if already present.
    pub fn intern_inverse(&mut self, base: PredId) -> PredId {
        let iri = format!("{}{}", self.predicates[base.0 as usize].iri, INVERSE_SUFFIX);
        if let Some(&id) = self.predicate_ids.get(&iri) {
            return id;
        }
        let id = PredId(self.predicates.len() as u32);
        self.predicates.push(PredEntry { iri: iri.clone(), inverse_of: Some(base) });
        self.predicate_ids.insert(iri, id);
        id
    }

    pub fn lookup_entity(&self, iri: &str) -> Option<Term> {
        self.entities.lookup(iri).map(|index| Term { kind: TermKind::Entity, index })
    }

    /// Looks up a literal by its canonical text, tags and all.
    pub fn lookup_literal(&self, canonical: &str) -> Option<Term> {
        self.literals.lookup(canonical).map(|index| Term { kind: TermKind::Literal, index })
    }

    pub fn lookup_blank(&self, label: &str) -> Option<Term> {
        self.blanks.lookup(label).map(|index| Term { kind: TermKind::Blank, index })
    }

    pub fn lookup_predicate(&self, iri: &str) -> Option<PredId> {
        self.predicate_ids.get(iri).copied()
    }

    /// The undecorated text of a term: IRI, canonical literal, or blank label.
    pub fn term_text(&self, term: Term) -> &str {
        match term.kind {
            TermKind::Entity => self.entities.text(term.index),
            TermKind::Literal => self.literals.text(term.index),
            TermKind::Blank => self.blanks.text(term.index),
        }
    }

    /// The term as it would appear in an N-Triples file.
    pub fn term_display(&self, term: Term) -> String {
        match term.kind {
            TermKind::Entity => format!("<{}>", self.term_text(term)),
            TermKind::Literal => self.term_text(term).to_owned(),
            TermKind::Blank => format!("_:{}", self.term_text(term)),
        }
    }

    pub fn predicate(&self, id: PredId) -> &PredEntry {
        &self.predicates[id.0 as usize]
    }

    pub fn predicate_iri(&self, id: PredId) -> &str {
        &self.predicates[id.0 as usize].iri
    }

    pub fn is_inverse(&self, id: PredId) -> bool {
        self.predicates[id.0 as usize].inverse_of.is_some()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.texts.len()
    }

    pub fn num_literals(&self) -> usize {
        self.literals.texts.len()
    }

    pub fn num_blanks(&self) -> usize {
        self.blanks.texts.len()
    }

    pub fn predicate_ids(&self) -> impl Iterator<Item = PredId> {
        (0..self.predicates.len() as u32).map(PredId)
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::Entity => write!(f, "entity"),
            TermKind::Literal => write!(f, "literal"),
            TermKind::Blank => write!(f, "blank"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent_and_dense() {
        let mut dict = Dictionary::new();
        let a = dict.intern_entity("http://ex.org/a");
        let b = dict.intern_entity("http://ex.org/b");
        let a2 = dict.intern_entity("http://ex.org/a");
        assert_eq!(a, a2);
        assert_ne!(a, b);
        assert_eq!(a.index, 0);
        assert_eq!(b.index, 1);
        assert_eq!(dict.num_entities(), 2);
    }

    #[test]
    fn kinds_do_not_collide() {
        let mut dict = Dictionary::new();
        let e = dict.intern_entity("x");
        let l = dict.intern_literal("x");
        let b = dict.intern_blank("x");
        assert_ne!(e, l);
        assert_ne!(e, b);
        assert_eq!(e.index, 0);
        assert_eq!(l.index, 0);
        assert_eq!(dict.term_text(e), "x");
        assert_eq!(dict.term_display(b), "_:x");
    }

    #[test]
    fn inverse_predicates_point_back_at_their_base() {
        let mut dict = Dictionary::new();
        let p = dict.intern_predicate("http://ex.org/mayor");
        let inv = dict.intern_inverse(p);
        assert_eq!(dict.predicate_iri(inv), "http://ex.org/mayor^-1");
        assert_eq!(dict.predicate(inv).inverse_of, Some(p));
        assert!(!dict.is_inverse(p));
        assert!(dict.is_inverse(inv));
        assert_eq!(dict.intern_inverse(p), inv);
    }

    #[test]
    fn encounter_order_fixes_ids() {
        let names = ["q", "p", "r"];
        let mut first = Dictionary::new();
        let mut second = Dictionary::new();
        for n in names {
            first.intern_predicate(n);
            second.intern_predicate(n);
        }
        for n in names {
            assert_eq!(first.lookup_predicate(n), second.lookup_predicate(n));
        }
    }
}
