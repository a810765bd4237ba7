//! The expression language: atoms, the five subgraph shapes, and
//! conjunctions of subgraphs.
//!
//! A subgraph expression is rooted at the variable `x` and may use one
//! additional variable `y`. The five admitted shapes are
//!
//! | shape      | pattern                                    |
//! |------------|--------------------------------------------|
//! | OneAtom    | p0(x, I0)                                  |
//! | Path       | p0(x, y) ∧ p1(y, I1)                       |
//! | PathStar   | p0(x, y) ∧ p1(y, I1) ∧ p2(y, I2)           |
//! | Closed2    | p0(x, y) ∧ p1(x, y)                        |
//! | Closed3    | p0(x, y) ∧ p1(x, y) ∧ p2(x, y)             |
//!
//! Constructors normalize the interchangeable parts (the two star atoms,
//! the closed predicates) into lexical order, so structurally equal
//! expressions compare equal and can be deduplicated by plain `Eq`.

use crate::term::{Dictionary, PredId, Term, TermKind};
use std::collections::BTreeMap;

/// A variable of an expression. `Var(0)` is the root `x`, `Var(1)` the
/// auxiliary join variable `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u8);

impl Var {
    pub const ROOT: Var = Var(0);
    pub const JOIN: Var = Var(1);

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "x",
            1 => "y",
            _ => "z",
        }
    }
}

/// An atom argument: either a variable or a constant term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Variable(Var),
    Constant(Term),
}

/// A single triple pattern p(arg1, arg2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: PredId,
    pub subject: Arg,
    pub object: Arg,
}

impl Atom {
    pub fn new(predicate: PredId, subject: Arg, object: Arg) -> Self {
        Atom { predicate, subject, object }
    }

    pub fn has_variable(&self) -> bool {
        matches!(self.subject, Arg::Variable(_)) || matches!(self.object, Arg::Variable(_))
    }

    pub fn display_with(&self, dict: &Dictionary) -> String {
        format!(
            "{}({}, {})",
            dict.predicate_iri(self.predicate),
            arg_text(dict, self.subject),
            arg_text(dict, self.object)
        )
    }
}

fn arg_text(dict: &Dictionary, arg: Arg) -> String {
    match arg {
        Arg::Variable(v) => v.name().to_owned(),
        Arg::Constant(t) => dict.term_display(t),
    }
}

/// A variable-to-term map produced by matching an atom or expression.
pub type Assignment = BTreeMap<Var, Term>;

/// Which of the five admitted shapes an expression has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    OneAtom,
    Path,
    PathStar,
    Closed2,
    Closed3,
}

/// One subgraph expression ρ, canonical by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubgraphExpression {
    /// p0(x, I0)
    OneAtom { predicate: PredId, object: Term },
    /// p0(x, y) ∧ p1(y, I1)
    Path { first: PredId, second: PredId, object: Term },
    /// p0(x, y) ∧ p1(y, I1) ∧ p2(y, I2), star atoms in lexical order
    PathStar { first: PredId, star: [(PredId, Term); 2] },
    /// p0(x, y) ∧ p1(x, y), predicates in lexical order
    Closed2 { predicates: [PredId; 2] },
    /// p0(x, y) ∧ p1(x, y) ∧ p2(x, y), predicates in lexical order
    Closed3 { predicates: [PredId; 3] },
}

impl SubgraphExpression {
    pub fn one_atom(predicate: PredId, object: Term) -> Self {
        SubgraphExpression::OneAtom { predicate, object }
    }

    pub fn path(first: PredId, second: PredId, object: Term) -> Self {
        SubgraphExpression::Path { first, second, object }
    }

    /// Builds a path+star expression; `None` when the two star atoms are
    /// identical, since a duplicate atom adds bits but no constraint.
    pub fn path_star(
        dict: &Dictionary,
        first: PredId,
        a: (PredId, Term),
        b: (PredId, Term),
    ) -> Option<Self> {
        if a == b {
            return None;
        }
        let mut star = [a, b];
        star.sort_by(|l, r| star_atom_key(dict, *l).cmp(&star_atom_key(dict, *r)));
        Some(SubgraphExpression::PathStar { first, star })
    }

    /// Builds a two-predicate closed expression; `None` when both
    /// predicates are equal.
    pub fn closed2(dict: &Dictionary, p: PredId, q: PredId) -> Option<Self> {
        if p == q {
            return None;
        }
        let mut predicates = [p, q];
        predicates.sort_by(|l, r| dict.predicate_iri(*l).cmp(dict.predicate_iri(*r)));
        Some(SubgraphExpression::Closed2 { predicates })
    }

    /// Builds a three-predicate closed expression; `None` on any repeat.
    pub fn closed3(dict: &Dictionary, p: PredId, q: PredId, r: PredId) -> Option<Self> {
        if p == q || p == r || q == r {
            return None;
        }
        let mut predicates = [p, q, r];
        predicates.sort_by(|l, r| dict.predicate_iri(*l).cmp(dict.predicate_iri(*r)));
        Some(SubgraphExpression::Closed3 { predicates })
    }

    pub fn shape(&self) -> Shape {
        match self {
            SubgraphExpression::OneAtom { .. } => Shape::OneAtom,
            SubgraphExpression::Path { .. } => Shape::Path,
            SubgraphExpression::PathStar { .. } => Shape::PathStar,
            SubgraphExpression::Closed2 { .. } => Shape::Closed2,
            SubgraphExpression::Closed3 { .. } => Shape::Closed3,
        }
    }

    /// The expression as a list of atoms over the variables x and y.
    pub fn atoms(&self) -> Vec<Atom> {
        let x = Arg::Variable(Var::ROOT);
        let y = Arg::Variable(Var::JOIN);
        match *self {
            SubgraphExpression::OneAtom { predicate, object } => {
                vec![Atom::new(predicate, x, Arg::Constant(object))]
            }
            SubgraphExpression::Path { first, second, object } => {
                vec![Atom::new(first, x, y), Atom::new(second, y, Arg::Constant(object))]
            }
            SubgraphExpression::PathStar { first, star } => vec![
                Atom::new(first, x, y),
                Atom::new(star[0].0, y, Arg::Constant(star[0].1)),
                Atom::new(star[1].0, y, Arg::Constant(star[1].1)),
            ],
            SubgraphExpression::Closed2 { predicates } => {
                predicates.iter().map(|&p| Atom::new(p, x, y)).collect()
            }
            SubgraphExpression::Closed3 { predicates } => {
                predicates.iter().map(|&p| Atom::new(p, x, y)).collect()
            }
        }
    }

    pub fn predicates(&self) -> Vec<PredId> {
        self.atoms().iter().map(|a| a.predicate).collect()
    }

    /// The constant objects bound by this expression.
    pub fn bound_objects(&self) -> Vec<Term> {
        self.atoms()
            .iter()
            .filter_map(|a| match a.object {
                Arg::Constant(t) => Some(t),
                Arg::Variable(_) => None,
            })
            .collect()
    }

    pub fn num_atoms(&self) -> usize {
        match self.shape() {
            Shape::OneAtom => 1,
            Shape::Path | Shape::Closed2 => 2,
            Shape::PathStar | Shape::Closed3 => 3,
        }
    }

    /// Canonical text form, unique per expression.
    pub fn display_with(&self, dict: &Dictionary) -> String {
        let parts: Vec<String> = self.atoms().iter().map(|a| a.display_with(dict)).collect();
        parts.join(" & ")
    }
}

fn star_atom_key(dict: &Dictionary, (p, t): (PredId, Term)) -> (&str, &str, TermKind) {
    (dict.predicate_iri(p), dict.term_text(t), t.kind)
}

/// A conjunction of subgraph expressions that share only the root `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expression {
    pub components: Vec<SubgraphExpression>,
}

impl Expression {
    pub fn new(components: Vec<SubgraphExpression>) -> Self {
        Expression { components }
    }

    pub fn singleton(component: SubgraphExpression) -> Self {
        Expression { components: vec![component] }
    }

    pub fn display_with(&self, dict: &Dictionary) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.display_with(dict)).collect();
        parts.join("  AND  ")
    }
}
