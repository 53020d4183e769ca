//! Quad data model with streaming TriG / N-Quads parsing and deterministic
//! serialization.
//!
//! Only the subset of TriG needed for nanopublication corpora is accepted:
//! prefixes, named graph blocks, IRIs, literals, `a`, and predicate/object
//! lists. Blank nodes and default-graph triples are rejected.

mod io;
mod lexer;
mod parser;
mod term;
mod writer;

use indexmap::IndexSet;
use thiserror::Error;

pub use self::io::{maybe_decompress, open};
pub use lexer::Position;
pub use parser::{parse, parse_str, QuadReader};
pub use term::{escape_literal, Iri, Literal, LiteralKind, Quad, Term, TermError};
pub use writer::{serialize, serialize_to_string, QuadWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    TriG,
    NQuads,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("blank node at {pos}: blank nodes are not supported")]
    BlankNode { pos: Position },
    #[error("triple outside of a named graph at {pos}")]
    DefaultGraph { pos: Position },
    #[error("invalid UTF-8 on line {line}")]
    InvalidUtf8 { line: u64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Insertion-ordered set of quads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuadSet {
    quads: IndexSet<Quad>,
}

impl QuadSet {
    pub fn new() -> Self {
        QuadSet::default()
    }

    /// Returns false if the quad was already present.
    pub fn insert(&mut self, quad: Quad) -> bool {
        self.quads.insert(quad)
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.quads.contains(quad)
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Quad> + '_ {
        self.quads.iter()
    }

    /// The quads in canonical order.
    pub fn canonical(&self) -> Vec<&Quad> {
        let mut v: Vec<&Quad> = self.quads.iter().collect();
        v.sort();
        v
    }
}

impl FromIterator<Quad> for QuadSet {
    fn from_iter<T: IntoIterator<Item = Quad>>(iter: T) -> Self {
        QuadSet { quads: iter.into_iter().collect() }
    }
}

impl Extend<Quad> for QuadSet {
    fn extend<T: IntoIterator<Item = Quad>>(&mut self, iter: T) {
        self.quads.extend(iter)
    }
}

impl IntoIterator for QuadSet {
    type Item = Quad;
    type IntoIter = indexmap::set::IntoIter<Quad>;
    fn into_iter(self) -> Self::IntoIter {
        self.quads.into_iter()
    }
}

impl<'a> IntoIterator for &'a QuadSet {
    type Item = &'a Quad;
    type IntoIter = indexmap::set::Iter<'a, Quad>;
    fn into_iter(self) -> Self::IntoIter {
        self.quads.iter()
    }
}

/// Deduplicates and sorts quads into the canonical total order: graph, subject,
/// predicate, object, each compared by its N-Quads rendering.
pub fn canonical_sort(quads: impl IntoIterator<Item = Quad>) -> Vec<Quad> {
    let mut v: Vec<Quad> = quads.into_iter().collect::<IndexSet<_>>().into_iter().collect();
    v.sort();
    v
}
