//! Nanopublications: four named graphs (head, assertion, provenance and
//! publication info) held together by the head graph.

mod assemble;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::rdf::{Iri, Literal, ParseError, Quad, QuadSet, Term};
use crate::vocab;

pub use assemble::{assemble, assemble_streaming, Assembler};
pub use validate::{validate, Finding, FindingKind, Level, ValidationReport};

#[derive(Debug, Error)]
pub enum NanopubError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("head graph <{head}> is malformed: {reason}")]
    MalformedHead { head: String, reason: String },
    #[error("nanopublication <{nanopub}> references graph <{graph}> which is absent from the input")]
    DanglingGraph { nanopub: String, graph: String },
    #[error("graph <{graph}> is claimed by both <{first}> and <{second}>")]
    GraphClaimedTwice { graph: String, first: String, second: String },
    #[error("graph <{graph}> does not belong to any nanopublication")]
    OrphanGraph { graph: String },
    #[error("quad in graph <{graph}> is not part of nanopublication <{nanopub}>")]
    ForeignQuad { nanopub: String, graph: String },
    #[error("graph <{graph}> reappears after its nanopublication was complete; input is not grouped by graph")]
    GraphReopened { graph: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphRole {
    Head,
    Assertion,
    Provenance,
    PubInfo,
}

impl GraphRole {
    pub const ALL: [GraphRole; 4] = [GraphRole::Head, GraphRole::Assertion, GraphRole::Provenance, GraphRole::PubInfo];

    pub fn name(self) -> &'static str {
        match self {
            GraphRole::Head => "head",
            GraphRole::Assertion => "assertion",
            GraphRole::Provenance => "provenance",
            GraphRole::PubInfo => "pubinfo",
        }
    }

    pub fn from_name(name: &str) -> Option<GraphRole> {
        GraphRole::ALL.into_iter().find(|r| r.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for GraphRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The IRIs of a nanopublication's four graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphIris {
    pub head: Iri,
    pub assertion: Iri,
    pub provenance: Iri,
    pub pubinfo: Iri,
}

impl GraphIris {
    /// `{uri}#Head`, `{uri}#assertion`, `{uri}#provenance`, `{uri}#pubinfo`.
    pub fn conventional(uri: &Iri) -> GraphIris {
        let sub = |suffix: &str| Iri::new(format!("{}#{suffix}", uri.as_str())).expect("suffix keeps IRI valid");
        GraphIris {
            head: sub("Head"),
            assertion: sub("assertion"),
            provenance: sub("provenance"),
            pubinfo: sub("pubinfo"),
        }
    }

    pub fn get(&self, role: GraphRole) -> &Iri {
        match role {
            GraphRole::Head => &self.head,
            GraphRole::Assertion => &self.assertion,
            GraphRole::Provenance => &self.provenance,
            GraphRole::PubInfo => &self.pubinfo,
        }
    }

    pub fn role_of(&self, graph: &Iri) -> Option<GraphRole> {
        GraphRole::ALL.into_iter().find(|&r| self.get(r) == graph)
    }

    fn map(&self, mut f: impl FnMut(Iri) -> Iri) -> GraphIris {
        GraphIris {
            head: f(self.head.clone()),
            assertion: f(self.assertion.clone()),
            provenance: f(self.provenance.clone()),
            pubinfo: f(self.pubinfo.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nanopub {
    uri: Iri,
    graphs: GraphIris,
    head: QuadSet,
    assertion: QuadSet,
    provenance: QuadSet,
    pubinfo: QuadSet,
}

impl Nanopub {
    /// Routes `quads` into the four graphs by graph IRI. A quad whose graph
    /// matches several roles (non-distinct graph IRIs) lands in each of them.
    pub fn from_quads(uri: Iri, graphs: GraphIris, quads: impl IntoIterator<Item = Quad>) -> Result<Self, NanopubError> {
        let mut np = Nanopub {
            uri,
            graphs,
            head: QuadSet::new(),
            assertion: QuadSet::new(),
            provenance: QuadSet::new(),
            pubinfo: QuadSet::new(),
        };
        for q in quads {
            let mut placed = false;
            for role in GraphRole::ALL {
                if np.graphs.get(role) == &q.graph {
                    np.quads_mut(role).insert(q.clone());
                    placed = true;
                }
            }
            if !placed {
                return Err(NanopubError::ForeignQuad {
                    nanopub: np.uri.as_str().to_owned(),
                    graph: q.graph.as_str().to_owned(),
                });
            }
        }
        Ok(np)
    }

    pub fn uri(&self) -> &Iri {
        &self.uri
    }

    pub fn graphs(&self) -> &GraphIris {
        &self.graphs
    }

    pub fn quads(&self, role: GraphRole) -> &QuadSet {
        match role {
            GraphRole::Head => &self.head,
            GraphRole::Assertion => &self.assertion,
            GraphRole::Provenance => &self.provenance,
            GraphRole::PubInfo => &self.pubinfo,
        }
    }

    fn quads_mut(&mut self, role: GraphRole) -> &mut QuadSet {
        match role {
            GraphRole::Head => &mut self.head,
            GraphRole::Assertion => &mut self.assertion,
            GraphRole::Provenance => &mut self.provenance,
            GraphRole::PubInfo => &mut self.pubinfo,
        }
    }

    pub fn head(&self) -> &QuadSet {
        &self.head
    }

    pub fn assertion(&self) -> &QuadSet {
        &self.assertion
    }

    pub fn provenance(&self) -> &QuadSet {
        &self.provenance
    }

    pub fn pubinfo(&self) -> &QuadSet {
        &self.pubinfo
    }

    /// All quads, graph by graph: head, assertion, provenance, pubinfo.
    pub fn iter(&self) -> impl Iterator<Item = &Quad> + '_ {
        GraphRole::ALL.into_iter().flat_map(move |r| self.quads(r).iter())
    }

    pub fn quad_count(&self) -> usize {
        GraphRole::ALL.into_iter().map(|r| self.quads(r).len()).sum()
    }

    /// Quads outside the head graph.
    pub fn content_count(&self) -> usize {
        self.assertion.len() + self.provenance.len() + self.pubinfo.len()
    }

    /// Rebuilds the nanopublication with `f` applied to every IRI (its own URI,
    /// graph names and all quad positions).
    pub fn map_iris(&self, mut f: impl FnMut(&Iri) -> Iri) -> Nanopub {
        let mut g = |iri: Iri| f(&iri);
        let map_set = |set: &QuadSet, g: &mut dyn FnMut(Iri) -> Iri| -> QuadSet {
            set.iter().cloned().map(|q| q.map_iris(&mut *g)).collect()
        };
        Nanopub {
            uri: g(self.uri.clone()),
            graphs: self.graphs.map(&mut g),
            head: map_set(&self.head, &mut g),
            assertion: map_set(&self.assertion, &mut g),
            provenance: map_set(&self.provenance, &mut g),
            pubinfo: map_set(&self.pubinfo, &mut g),
        }
    }

    /// Returns a copy with `quad` added to the graph of `role`. The quad must
    /// already carry that graph's IRI.
    pub fn with_quad(&self, role: GraphRole, quad: Quad) -> Result<Nanopub, NanopubError> {
        if &quad.graph != self.graphs.get(role) {
            return Err(NanopubError::ForeignQuad {
                nanopub: self.uri.as_str().to_owned(),
                graph: quad.graph.as_str().to_owned(),
            });
        }
        let mut np = self.clone();
        np.quads_mut(role).insert(quad);
        Ok(np)
    }

    pub fn without_quads(&self, mut drop: impl FnMut(GraphRole, &Quad) -> bool) -> Nanopub {
        let mut np = self.clone();
        for role in GraphRole::ALL {
            let kept: QuadSet = self.quads(role).iter().filter(|q| !drop(role, q)).cloned().collect();
            *np.quads_mut(role) = kept;
        }
        np
    }
}

/// Builds nanopublications with a standard four-triple head and conventional
/// graph names.
#[derive(Debug, Clone)]
pub struct NanopubBuilder {
    uri: Iri,
    graphs: GraphIris,
    quads: Vec<Quad>,
}

impl NanopubBuilder {
    pub fn new(uri: Iri) -> Self {
        let graphs = GraphIris::conventional(&uri);
        NanopubBuilder { uri, graphs, quads: Vec::new() }
    }

    pub fn with_graphs(uri: Iri, graphs: GraphIris) -> Self {
        NanopubBuilder { uri, graphs, quads: Vec::new() }
    }

    pub fn uri(&self) -> &Iri {
        &self.uri
    }

    pub fn graphs(&self) -> &GraphIris {
        &self.graphs
    }

    pub fn add(&mut self, role: GraphRole, subject: Iri, predicate: Iri, object: impl Into<Term>) -> &mut Self {
        let graph = self.graphs.get(role).clone();
        self.quads.push(Quad::new(graph, subject, predicate, object));
        self
    }

    pub fn assertion(&mut self, s: Iri, p: Iri, o: impl Into<Term>) -> &mut Self {
        self.add(GraphRole::Assertion, s, p, o)
    }

    pub fn provenance(&mut self, s: Iri, p: Iri, o: impl Into<Term>) -> &mut Self {
        self.add(GraphRole::Provenance, s, p, o)
    }

    pub fn pubinfo(&mut self, s: Iri, p: Iri, o: impl Into<Term>) -> &mut Self {
        self.add(GraphRole::PubInfo, s, p, o)
    }

    /// Adds `<uri> dct:created "timestamp"^^xsd:dateTime` to the pubinfo graph.
    pub fn created(&mut self, timestamp: &str) -> &mut Self {
        let s = self.uri.clone();
        self.pubinfo(s, iri(vocab::DCT_CREATED), Literal::typed(timestamp, iri(vocab::XSD_DATE_TIME)))
    }

    pub fn build(&self) -> Nanopub {
        let head = head_quads(&self.uri, &self.graphs);
        Nanopub::from_quads(self.uri.clone(), self.graphs.clone(), head.into_iter().chain(self.quads.iter().cloned()))
            .expect("builder only adds quads to its own graphs")
    }
}

/// The four mandatory head triples.
pub fn head_quads(uri: &Iri, graphs: &GraphIris) -> Vec<Quad> {
    let h = &graphs.head;
    vec![
        Quad::new(h.clone(), uri.clone(), iri(vocab::RDF_TYPE), iri(vocab::NP_NANOPUBLICATION)),
        Quad::new(h.clone(), uri.clone(), iri(vocab::NP_HAS_ASSERTION), graphs.assertion.clone()),
        Quad::new(h.clone(), uri.clone(), iri(vocab::NP_HAS_PROVENANCE), graphs.provenance.clone()),
        Quad::new(h.clone(), uri.clone(), iri(vocab::NP_HAS_PUBLICATION_INFO), graphs.pubinfo.clone()),
    ]
}

pub(crate) fn iri(s: &str) -> Iri {
    Iri::new(s).expect("constant IRI")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_produces_four_triple_head() {
        let uri = iri("http://example.org/np1");
        let np = NanopubBuilder::new(uri.clone())
            .assertion(iri("http://ex/a"), iri("http://ex/p"), iri("http://ex/b"))
            .build();
        assert_eq!(np.head().len(), 4);
        assert_eq!(np.assertion().len(), 1);
        assert_eq!(np.quad_count(), 5);
        assert_eq!(np.graphs().assertion.as_str(), "http://example.org/np1#assertion");
    }

    #[test]
    fn foreign_quads_are_rejected() {
        let uri = iri("http://example.org/np1");
        let graphs = GraphIris::conventional(&uri);
        let stray = Quad::new(iri("http://other/g"), uri.clone(), iri("http://p"), iri("http://o"));
        assert!(matches!(Nanopub::from_quads(uri, graphs, [stray]), Err(NanopubError::ForeignQuad { .. })));
    }

    #[test]
    fn role_names_round_trip() {
        for r in GraphRole::ALL {
            assert_eq!(GraphRole::from_name(r.name()), Some(r));
        }
        assert_eq!(GraphRole::from_name("PubInfo"), Some(GraphRole::PubInfo));
        assert_eq!(GraphRole::from_name("body"), None);
    }
}
