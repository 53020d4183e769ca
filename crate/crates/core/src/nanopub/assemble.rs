use std::collections::{HashSet, VecDeque};

use indexmap::IndexMap;

use super::{GraphIris, Nanopub, NanopubError};
use crate::rdf::{Iri, ParseError, Quad, QuadSet, Term};
use crate::vocab;

/// Groups a quad stream into nanopublications.
///
/// A graph is a head when it types some subject `N` as `np:Nanopublication`
/// and links it to exactly one assertion, provenance and pubinfo graph.
/// Nanopublications are emitted in order of head appearance.
pub struct Assembler<I> {
    quads: I,
    pending: IndexMap<Iri, QuadSet>,
    heads: VecDeque<Iri>,
    current: Option<Iri>,
    ready: VecDeque<Nanopub>,
    done: bool,
    /// Graphs of nanopublications already emitted; `None` when buffering to the end.
    closed: Option<HashSet<Iri>>,
}

/// Order-insensitive assembly: quads may arrive in any order, and nothing is
/// emitted before the input ends.
pub fn assemble<I>(quads: I) -> Assembler<I::IntoIter>
where
    I: IntoIterator<Item = Result<Quad, ParseError>>,
{
    Assembler {
        quads: quads.into_iter(),
        pending: IndexMap::new(),
        heads: VecDeque::new(),
        current: None,
        ready: VecDeque::new(),
        done: false,
        closed: None,
    }
}

/// Bounded-memory assembly for input grouped by graph (every TriG file written
/// by this crate, and the usual dump layout). A nanopublication is emitted once
/// its four graphs have been read and the stream has moved on; a graph that
/// shows up again afterwards is [`NanopubError::GraphReopened`].
pub fn assemble_streaming<I>(quads: I) -> Assembler<I::IntoIter>
where
    I: IntoIterator<Item = Result<Quad, ParseError>>,
{
    Assembler { closed: Some(HashSet::new()), ..assemble(quads) }
}

struct HeadInfo {
    uri: Iri,
    graphs: GraphIris,
}

fn single_link(quads: &QuadSet, subject: &Iri, predicate: &str) -> Result<Iri, String> {
    let mut found = quads
        .iter()
        .filter(|q| &q.subject == subject && q.predicate.as_str() == predicate)
        .filter_map(|q| q.object.as_iri());
    let short = predicate.rsplit('#').next().unwrap_or(predicate);
    match (found.next(), found.next()) {
        (Some(g), None) => Ok(g.clone()),
        (None, _) => Err(format!("missing np:{short}")),
        (Some(_), Some(_)) => Err(format!("multiple np:{short} values")),
    }
}

fn interpret_head(head: &Iri, quads: &QuadSet) -> Result<HeadInfo, String> {
    let typed: Vec<&Iri> = quads
        .iter()
        .filter(|q| {
            q.predicate.as_str() == vocab::RDF_TYPE
                && matches!(&q.object, Term::Iri(o) if o.as_str() == vocab::NP_NANOPUBLICATION)
        })
        .map(|q| &q.subject)
        .collect();
    let mut first_err = None;
    for uri in typed {
        let links = (|| {
            Ok::<_, String>((
                single_link(quads, uri, vocab::NP_HAS_ASSERTION)?,
                single_link(quads, uri, vocab::NP_HAS_PROVENANCE)?,
                single_link(quads, uri, vocab::NP_HAS_PUBLICATION_INFO)?,
            ))
        })();
        match links {
            Ok((assertion, provenance, pubinfo)) => {
                return Ok(HeadInfo {
                    uri: uri.clone(),
                    graphs: GraphIris { head: head.clone(), assertion, provenance, pubinfo },
                })
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| "no subject typed np:Nanopublication".into()))
}

fn is_head_marker(q: &Quad) -> bool {
    q.predicate.as_str() == vocab::RDF_TYPE && matches!(&q.object, Term::Iri(o) if o.as_str() == vocab::NP_NANOPUBLICATION)
}

impl<I> Assembler<I> {
    fn try_emit(&mut self, eof: bool) -> Result<(), NanopubError> {
        while let Some(head) = self.heads.front().cloned() {
            if !eof && self.current.as_ref() == Some(&head) {
                return Ok(());
            }
            let info = interpret_head(&head, &self.pending[&head])
                .map_err(|reason| NanopubError::MalformedHead { head: head.as_str().to_owned(), reason })?;
            let members = [&info.graphs.assertion, &info.graphs.provenance, &info.graphs.pubinfo];
            for g in members {
                if !self.pending.contains_key(g) {
                    if eof {
                        return Err(NanopubError::DanglingGraph {
                            nanopub: info.uri.as_str().to_owned(),
                            graph: g.as_str().to_owned(),
                        });
                    }
                    return Ok(());
                }
            }
            if !eof && members.iter().any(|g| self.current.as_ref() == Some(*g)) {
                return Ok(());
            }
            self.check_claims(&info)?;

            let mut quads = Vec::new();
            let mut taken: Vec<&Iri> = Vec::with_capacity(4);
            for g in [&info.graphs.head, &info.graphs.assertion, &info.graphs.provenance, &info.graphs.pubinfo] {
                if !taken.contains(&g) {
                    taken.push(g);
                    quads.extend(self.pending.shift_remove(g).expect("presence checked above"));
                }
            }
            self.heads.pop_front();
            if let Some(closed) = &mut self.closed {
                closed.extend(taken.into_iter().cloned());
            }
            self.ready.push_back(Nanopub::from_quads(info.uri, info.graphs, quads)?);
        }
        Ok(())
    }

    /// Rejects a head whose content graphs are also heads, or are linked from
    /// another waiting head.
    fn check_claims(&self, info: &HeadInfo) -> Result<(), NanopubError> {
        let members = [&info.graphs.assertion, &info.graphs.provenance, &info.graphs.pubinfo];
        for other in self.heads.iter().skip(1) {
            let other_info = interpret_head(other, &self.pending[other]).ok();
            for g in members {
                let claimed = g == other
                    || other_info.as_ref().is_some_and(|o| {
                        [&o.graphs.assertion, &o.graphs.provenance, &o.graphs.pubinfo].contains(&g)
                    });
                if claimed && g != &info.graphs.head {
                    let second = other_info.as_ref().map_or(other.as_str(), |o| o.uri.as_str());
                    return Err(NanopubError::GraphClaimedTwice {
                        graph: g.as_str().to_owned(),
                        first: info.uri.as_str().to_owned(),
                        second: second.to_owned(),
                    });
                }
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), NanopubError> {
        self.current = None;
        self.try_emit(true)?;
        if let Some((graph, _)) = self.pending.first() {
            return Err(NanopubError::OrphanGraph { graph: graph.as_str().to_owned() });
        }
        Ok(())
    }

    fn push(&mut self, q: Quad) -> Result<(), NanopubError> {
        if let Some(closed) = &self.closed {
            if self.current.as_ref() != Some(&q.graph) {
                if closed.contains(&q.graph) {
                    return Err(NanopubError::GraphReopened { graph: q.graph.as_str().to_owned() });
                }
                self.current = Some(q.graph.clone());
                self.try_emit(false)?;
            }
        }
        if is_head_marker(&q) && !self.heads.contains(&q.graph) {
            self.heads.push_back(q.graph.clone());
        }
        self.pending.entry(q.graph.clone()).or_default().insert(q);
        Ok(())
    }
}

impl<I> Iterator for Assembler<I>
where
    I: Iterator<Item = Result<Quad, ParseError>>,
{
    type Item = Result<Nanopub, NanopubError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(np) = self.ready.pop_front() {
                return Some(Ok(np));
            }
            if self.done {
                return None;
            }
            let step = match self.quads.next() {
                Some(Ok(q)) => self.push(q),
                Some(Err(e)) => Err(e.into()),
                None => {
                    self.done = true;
                    self.finish()
                }
            };
            if let Err(e) = step {
                self.done = true;
                self.ready.clear();
                return Some(Err(e));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Format;

    fn assemble_str(doc: &str) -> Result<Vec<Nanopub>, NanopubError> {
        let quads = crate::rdf::parse(doc.as_bytes(), Format::TriG);
        let whole: Result<Vec<Nanopub>, NanopubError> = assemble(quads).collect();
        let streamed: Result<Vec<Nanopub>, NanopubError> =
            assemble_streaming(crate::rdf::parse(doc.as_bytes(), Format::TriG)).collect();
        assert_eq!(whole.as_ref().ok(), streamed.as_ref().ok());
        whole
    }

    const PREFIXES: &str = "@prefix np: <http://www.nanopub.org/nschema#> .\n@prefix ex: <http://example.org/> .\n";

    fn np_doc(n: &str, extra_assertion: usize) -> String {
        let mut a = String::new();
        for i in 0..extra_assertion {
            a.push_str(&format!("  ex:s{i} ex:p ex:o{i} .\n"));
        }
        format!(
            "ex:{n}_head {{ ex:{n} a np:Nanopublication ; np:hasAssertion ex:{n}_a ; np:hasProvenance ex:{n}_p ; np:hasPublicationInfo ex:{n}_i . }}\n\
             ex:{n}_a {{\n{a}  ex:x ex:y ex:z . }}\n\
             ex:{n}_p {{ ex:{n}_a ex:from ex:src1 . ex:{n}_a ex:from ex:src2 . }}\n\
             ex:{n}_i {{ ex:{n} ex:created \"2017\" . ex:{n} ex:by ex:me . ex:{n} ex:lic ex:cc0 . }}\n"
        )
    }

    #[test]
    fn two_nanopubs_of_twelve_quads() {
        // 4 head + 3 assertion + 2 provenance + 3 pubinfo
        let doc = format!("{PREFIXES}{}{}", np_doc("np1", 2), np_doc("np2", 2));
        let nps = assemble_str(&doc).unwrap();
        assert_eq!(nps.len(), 2);
        for np in &nps {
            assert_eq!(np.quad_count(), 12);
            assert_eq!((np.head().len(), np.assertion().len(), np.provenance().len(), np.pubinfo().len()), (4, 3, 2, 3));
        }
        assert_eq!(nps[0].uri().as_str(), "http://example.org/np1");
        assert_eq!(nps[1].uri().as_str(), "http://example.org/np2");
    }

    #[test]
    fn head_after_content_graphs() {
        let doc = format!(
            "{PREFIXES}ex:a {{ ex:x ex:y ex:z }}\nex:p {{ ex:a ex:q ex:r }}\nex:i {{ ex:n ex:q ex:r }}\n\
             ex:h {{ ex:n a np:Nanopublication ; np:hasAssertion ex:a ; np:hasProvenance ex:p ; np:hasPublicationInfo ex:i }}\n"
        );
        let nps = assemble_str(&doc).unwrap();
        assert_eq!(nps.len(), 1);
        assert_eq!(nps[0].quad_count(), 7);
    }

    #[test]
    fn missing_provenance_link_is_an_error() {
        let doc = format!(
            "{PREFIXES}ex:h {{ ex:n a np:Nanopublication ; np:hasAssertion ex:a ; np:hasPublicationInfo ex:i }}\n\
             ex:a {{ ex:x ex:y ex:z }}\nex:i {{ ex:n ex:q ex:r }}\n"
        );
        match assemble_str(&doc) {
            Err(NanopubError::MalformedHead { reason, .. }) => assert!(reason.contains("hasProvenance"), "{reason}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_graph() {
        let doc = format!(
            "{PREFIXES}ex:h {{ ex:n a np:Nanopublication ; np:hasAssertion ex:a ; np:hasProvenance ex:p ; np:hasPublicationInfo ex:i }}\n\
             ex:a {{ ex:x ex:y ex:z }}\nex:i {{ ex:n ex:q ex:r }}\n"
        );
        assert!(matches!(assemble_str(&doc), Err(NanopubError::DanglingGraph { graph, .. }) if graph == "http://example.org/p"));
    }

    #[test]
    fn orphan_graph() {
        let doc = format!("{PREFIXES}{}ex:stray {{ ex:x ex:y ex:z }}\n", np_doc("np1", 0));
        assert!(matches!(assemble_str(&doc), Err(NanopubError::OrphanGraph { graph }) if graph == "http://example.org/stray"));
    }

    #[test]
    fn graph_claimed_twice() {
        let doc = format!(
            "{PREFIXES}ex:h1 {{ ex:n1 a np:Nanopublication ; np:hasAssertion ex:a ; np:hasProvenance ex:p1 ; np:hasPublicationInfo ex:i1 }}\n\
             ex:h2 {{ ex:n2 a np:Nanopublication ; np:hasAssertion ex:a ; np:hasProvenance ex:p2 ; np:hasPublicationInfo ex:i2 }}\n\
             ex:a {{ ex:x ex:y ex:z }}\nex:p1 {{ ex:a ex:q ex:r }}\nex:i1 {{ ex:n1 ex:q ex:r }}\n\
             ex:p2 {{ ex:a ex:q ex:r }}\nex:i2 {{ ex:n2 ex:q ex:r }}\n"
        );
        assert!(matches!(assemble_str(&doc), Err(NanopubError::GraphClaimedTwice { .. })));
    }

    #[test]
    fn parse_errors_propagate() {
        assert!(matches!(assemble_str("<http://g> { _:b <http://p> <http://o> }"), Err(NanopubError::Parse(_))));
    }

    #[test]
    fn interleaved_quads() {
        let doc = format!("{PREFIXES}{}{}", np_doc("np1", 2), np_doc("np2", 2));
        let quads = crate::rdf::parse_str(&doc, Format::TriG).unwrap();
        let expected: Vec<Nanopub> = assemble(quads.iter().cloned().map(Ok)).collect::<Result<_, _>>().unwrap();
        // One np1 assertion quad arrives after np2 has started.
        let late = quads.iter().position(|q| q.graph.as_str().ends_with("np1_a")).unwrap();
        let mut shuffled = quads.clone();
        let moved = shuffled.remove(late);
        shuffled.push(moved);
        let mut got: Vec<Nanopub> = assemble(shuffled.iter().cloned().map(Ok)).collect::<Result<_, _>>().unwrap();
        got.sort_by(|x, y| x.uri().cmp(y.uri()));
        assert_eq!(got, expected);
        let streamed: Result<Vec<Nanopub>, _> = assemble_streaming(shuffled.into_iter().map(Ok)).collect();
        assert!(matches!(streamed, Err(NanopubError::GraphReopened { .. })), "{streamed:?}");
    }

    #[test]
    fn empty_stream() {
        assert!(assemble_str("").unwrap().is_empty());
    }
}
