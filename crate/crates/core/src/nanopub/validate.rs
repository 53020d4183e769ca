use std::fmt;

use super::{GraphRole, Nanopub};
use crate::rdf::{Quad, Term};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindingKind {
    EmptyAssertion,
    /// Two of the four graph IRIs coincide.
    NonDistinctGraphs,
    /// A head triple about something other than the nanopublication itself.
    ExtraHeadSubject,
    /// A head triple beyond the four structural ones (strict only).
    ExtraHeadTriple,
    /// No provenance triple mentions the assertion graph (strict only).
    ProvenanceUnlinked,
    /// No pubinfo triple has the nanopublication as subject (strict only).
    PubinfoUnlinked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub level: Level,
    pub kind: FindingKind,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Error => "error",
            Level::Warning => "warning",
        };
        write!(f, "{level}: {:?}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    /// True when there is no error-level finding.
    pub fn is_publishable(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.level == Level::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.level == Level::Warning)
    }

    fn push(&mut self, level: Level, kind: FindingKind, detail: impl Into<String>) {
        self.findings.push(Finding { level, kind, detail: detail.into() });
    }
}

fn is_structural(np: &Nanopub, q: &Quad) -> bool {
    if &q.subject != np.uri() {
        return false;
    }
    let g = np.graphs();
    let expect = |pred: &str, obj: &str| q.predicate.as_str() == pred && q.object.value() == obj;
    matches!(q.object, Term::Iri(_))
        && (expect(vocab::RDF_TYPE, vocab::NP_NANOPUBLICATION)
            || expect(vocab::NP_HAS_ASSERTION, g.assertion.as_str())
            || expect(vocab::NP_HAS_PROVENANCE, g.provenance.as_str())
            || expect(vocab::NP_HAS_PUBLICATION_INFO, g.pubinfo.as_str()))
}

pub fn validate(np: &Nanopub, strict: bool) -> ValidationReport {
    let mut report = ValidationReport::default();

    if np.assertion().is_empty() {
        report.push(Level::Error, FindingKind::EmptyAssertion, format!("<{}> has an empty assertion graph", np.uri().as_str()));
    }

    let g = np.graphs();
    let names = [&g.head, &g.assertion, &g.provenance, &g.pubinfo];
    for (i, a) in names.iter().enumerate() {
        for (j, b) in names.iter().enumerate().skip(i + 1) {
            if a == b {
                report.push(
                    Level::Error,
                    FindingKind::NonDistinctGraphs,
                    format!("{} and {} graphs are both <{}>", GraphRole::ALL[i], GraphRole::ALL[j], a.as_str()),
                );
            }
        }
    }

    for q in np.head() {
        if &q.subject != np.uri() {
            report.push(Level::Error, FindingKind::ExtraHeadSubject, q.to_nquads_line());
        } else if strict && !is_structural(np, q) {
            report.push(Level::Warning, FindingKind::ExtraHeadTriple, q.to_nquads_line());
        }
    }

    if strict {
        let assertion = g.assertion.as_str();
        let mentions = |q: &Quad| {
            q.subject.as_str() == assertion || q.predicate.as_str() == assertion || matches!(&q.object, Term::Iri(o) if o.as_str() == assertion)
        };
        if !np.provenance().iter().any(mentions) {
            report.push(Level::Warning, FindingKind::ProvenanceUnlinked, format!("no provenance triple mentions <{assertion}>"));
        }
        if !np.pubinfo().iter().any(|q| &q.subject == np.uri()) {
            report.push(
                Level::Warning,
                FindingKind::PubinfoUnlinked,
                format!("no pubinfo triple has <{}> as subject", np.uri().as_str()),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nanopub::{iri, GraphIris, NanopubBuilder};
    use crate::rdf::Literal;

    fn minimal() -> NanopubBuilder {
        let uri = iri("http://example.org/np");
        let mut b = NanopubBuilder::new(uri.clone());
        let a = b.graphs().assertion.clone();
        b.assertion(iri("http://ex/s"), iri("http://ex/p"), iri("http://ex/o"))
            .provenance(a, iri("http://www.w3.org/ns/prov#wasDerivedFrom"), iri("http://ex/src"))
            .pubinfo(uri, iri(vocab::DCT_CREATED), Literal::plain("2017-05-10"));
        b
    }

    #[test]
    fn minimal_nanopub_is_clean() {
        let np = minimal().build();
        assert_eq!(np.quad_count(), 7);
        assert!(validate(&np, false).is_empty());
        assert!(validate(&np, true).is_empty());
    }

    #[test]
    fn empty_assertion_is_an_error() {
        let uri = iri("http://example.org/np");
        let np = NanopubBuilder::new(uri).build();
        let r = validate(&np, false);
        assert!(!r.is_publishable());
        assert!(r.findings.iter().any(|f| f.kind == FindingKind::EmptyAssertion));
    }

    #[test]
    fn provenance_linkage_only_warned_in_strict_mode() {
        let uri = iri("http://example.org/np");
        let mut b = NanopubBuilder::new(uri.clone());
        b.assertion(iri("http://ex/s"), iri("http://ex/p"), iri("http://ex/o"))
            .provenance(iri("http://ex/other"), iri("http://ex/p"), iri("http://ex/o"))
            .pubinfo(uri, iri("http://ex/p"), iri("http://ex/o"));
        let np = b.build();
        assert!(validate(&np, false).is_empty());
        let strict = validate(&np, true);
        assert!(strict.is_publishable());
        let kinds: Vec<_> = strict.warnings().map(|f| f.kind.clone()).collect();
        assert_eq!(kinds, vec![FindingKind::ProvenanceUnlinked]);
    }

    #[test]
    fn non_distinct_graphs_and_extra_head_subjects() {
        let uri = iri("http://example.org/np");
        let g = GraphIris {
            head: iri("http://example.org/np#h"),
            assertion: iri("http://example.org/np#x"),
            provenance: iri("http://example.org/np#x"),
            pubinfo: iri("http://example.org/np#i"),
        };
        let mut b = NanopubBuilder::with_graphs(uri, g);
        b.assertion(iri("http://ex/s"), iri("http://ex/p"), iri("http://ex/o"))
            .pubinfo(iri("http://example.org/np"), iri("http://ex/p"), iri("http://ex/o"))
            .add(GraphRole::Head, iri("http://ex/dataset"), iri("http://ex/p"), iri("http://ex/o"));
        let r = validate(&b.build(), false);
        let kinds: Vec<_> = r.errors().map(|f| f.kind.clone()).collect();
        assert!(kinds.contains(&FindingKind::NonDistinctGraphs));
        assert!(kinds.contains(&FindingKind::ExtraHeadSubject));
    }

    #[test]
    fn extra_head_triples_flagged_in_strict_mode() {
        let mut b = minimal();
        let uri = b.uri().clone();
        b.add(GraphRole::Head, uri, iri("http://ex/inDataset"), iri("http://ex/ds"));
        let np = b.build();
        assert_eq!(np.head().len(), 5);
        assert!(validate(&np, false).is_empty());
        let strict = validate(&np, true);
        assert_eq!(strict.findings.len(), 1);
        assert_eq!(strict.findings[0].kind, FindingKind::ExtraHeadTriple);
    }
}
