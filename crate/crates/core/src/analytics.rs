//! Counting, filtering, graph extraction and decontextualization over nanopublication streams.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};

use indexmap::IndexSet;
use serde::Serialize;

use crate::diff::ReuseOutcome;
use crate::nanopub::{GraphRole, Nanopub, NanopubError};
use crate::ratio::fixed_point;
use crate::rdf::{Iri, Quad, Term};
use crate::trusty::self_suffix;
use crate::vocab;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub nanopubs: u64,
    pub total: u64,
    pub head: u64,
    pub assertion: u64,
    pub provenance: u64,
    pub pubinfo: u64,
}

impl CountReport {
    pub fn add(&mut self, np: &Nanopub) {
        let [h, a, p, i] = GraphRole::ALL.map(|r| np.quads(r).len() as u64);
        self.nanopubs += 1;
        self.head += h;
        self.assertion += a;
        self.provenance += p;
        self.pubinfo += i;
        self.total += h + a + p + i;
    }

    /// Triples outside the head graph.
    pub fn outside_head(&self) -> u64 {
        self.assertion + self.provenance + self.pubinfo
    }

    pub fn get(&self, role: GraphRole) -> u64 {
        match role {
            GraphRole::Head => self.head,
            GraphRole::Assertion => self.assertion,
            GraphRole::Provenance => self.provenance,
            GraphRole::PubInfo => self.pubinfo,
        }
    }

    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            #[serde(flatten)]
            counts: &'a CountReport,
            outside_head: u64,
        }
        serde_json::to_string(&Line { counts: self, outside_head: self.outside_head() }).expect("report serializes")
    }
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("nanopublications", self.nanopubs),
            ("triples", self.total),
            ("head", self.head),
            ("outside head", self.outside_head()),
            ("assertion", self.assertion),
            ("provenance", self.provenance),
            ("pubinfo", self.pubinfo),
        ];
        for (label, n) in rows {
            writeln!(f, "{label:<18}{n:>12}")?;
        }
        Ok(())
    }
}

pub fn count<I>(stream: I) -> Result<CountReport, NanopubError>
where
    I: IntoIterator<Item = Result<Nanopub, NanopubError>>,
{
    let mut report = CountReport::default();
    for np in stream {
        report.add(&np?);
    }
    Ok(report)
}

/// True if any quad has a needle as graph, subject, predicate or object value.
pub fn mentions(np: &Nanopub, needles: &HashSet<String>) -> bool {
    np.iter().any(|q| {
        needles.contains(q.graph.as_str())
            || needles.contains(q.subject.as_str())
            || needles.contains(q.predicate.as_str())
            || needles.contains(q.object.value())
    })
}

pub fn filter<'a, I>(stream: I, needles: &'a HashSet<String>) -> impl Iterator<Item = Result<Nanopub, NanopubError>> + 'a
where
    I: IntoIterator<Item = Result<Nanopub, NanopubError>>,
    I::IntoIter: 'a,
{
    stream.into_iter().filter(move |r| match r {
        Ok(np) => mentions(np, needles),
        Err(_) => true,
    })
}

/// Quads of the selected graphs, head to pubinfo.
pub fn extract<'a>(np: &'a Nanopub, graphs: &'a [GraphRole]) -> impl Iterator<Item = &'a Quad> + 'a {
    GraphRole::ALL.into_iter().filter(|r| graphs.contains(r)).flat_map(|r| np.quads(r).iter())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DecontextReport {
    pub decontextualized: u64,
    pub outside_head: u64,
}

impl DecontextReport {
    /// d/t with four decimals.
    pub fn ratio(&self) -> String {
        format_ratio(self.decontextualized, self.outside_head)
    }

    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            #[serde(flatten)]
            report: &'a DecontextReport,
            ratio: String,
        }
        serde_json::to_string(&Line { report: self, ratio: self.ratio() }).expect("report serializes")
    }
}

impl fmt::Display for DecontextReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18}{:>12}", "outside head", self.outside_head)?;
        writeln!(f, "{:<18}{:>12}", "decontextualized", self.decontextualized)?;
        writeln!(f, "{:<18}{:>12}", "ratio", self.ratio())
    }
}

/// `num / den` to four decimals, half-even; `-` when `den` is zero.
pub fn format_ratio(num: u64, den: u64) -> String {
    fixed_point(num, den, 4).unwrap_or_else(|| "-".into())
}

/// Collapses per-nanopublication context and deduplicates the remaining triples.
///
/// Memory grows with the number of distinct triples.
#[derive(Debug, Default)]
pub struct Decontextualizer {
    triples: IndexSet<Triple>,
    outside_head: u64,
}

impl Decontextualizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, np: &Nanopub) {
        let dataset = Iri::new(vocab::DATASET_PLACEHOLDER).expect("valid");
        let own = np.uri().as_str();
        let rewrite = |iri: &Iri| -> Iri {
            if self_suffix(iri.as_str(), own).is_some() || np.graphs().role_of(iri).is_some() {
                dataset.clone()
            } else {
                iri.clone()
            }
        };
        for role in [GraphRole::Assertion, GraphRole::Provenance, GraphRole::PubInfo] {
            for q in np.quads(role).iter() {
                self.outside_head += 1;
                let object = match &q.object {
                    Term::Iri(o) => Term::Iri(rewrite(o)),
                    Term::Literal(l) => Term::Literal(l.clone()),
                };
                self.triples.insert(Triple { subject: rewrite(&q.subject), predicate: rewrite(&q.predicate), object });
            }
        }
    }

    pub fn report(&self) -> DecontextReport {
        DecontextReport { decontextualized: self.triples.len() as u64, outside_head: self.outside_head }
    }

    pub fn triples(&self) -> impl ExactSizeIterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    pub fn into_triples(self) -> IndexSet<Triple> {
        self.triples
    }

    pub fn write_ntriples<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in &self.triples {
            writeln!(out, "{t}")?;
        }
        out.flush()
    }
}

pub fn decontext<I>(stream: I) -> Result<Decontextualizer, NanopubError>
where
    I: IntoIterator<Item = Result<Nanopub, NanopubError>>,
{
    let mut d = Decontextualizer::new();
    for np in stream {
        d.add(&np?);
    }
    Ok(d)
}

/// Triples a reuse run adds to the published history: everything it did not reuse.
pub fn incremental_triples(outcome: &ReuseOutcome) -> u64 {
    let reused: HashSet<usize> = outcome.partition.reused.iter().map(|&(i, _)| i).collect();
    outcome
        .output
        .iter()
        .enumerate()
        .filter(|(i, _)| !reused.contains(i))
        .map(|(_, np)| np.quad_count() as u64)
        .sum()
}

/// Triple count of a change-based store over successive versions: the first
/// version in full, then added plus removed triples for each later one.
pub fn change_based_triple_count<'a, T: Eq + std::hash::Hash + 'a>(versions: impl IntoIterator<Item = &'a HashSet<T>>) -> u64 {
    let mut total = 0u64;
    let mut prev: Option<&HashSet<T>> = None;
    for v in versions {
        total += match prev {
            None => v.len() as u64,
            Some(p) => (v.difference(p).count() + p.difference(v).count()) as u64,
        };
        prev = Some(v);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionTally {
    pub label: String,
    pub snapshot_triples: u64,
    pub incremental_triples: u64,
}

/// Running totals of snapshot versus incremental publishing over a version history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HistoryTally {
    pub versions: Vec<VersionTally>,
}

impl HistoryTally {
    pub fn record(&mut self, label: impl Into<String>, snapshot_triples: u64, incremental_triples: u64) {
        self.versions.push(VersionTally { label: label.into(), snapshot_triples, incremental_triples });
    }

    pub fn cumulative_snapshot(&self) -> u64 {
        self.versions.iter().map(|v| v.snapshot_triples).sum()
    }

    pub fn cumulative_incremental(&self) -> u64 {
        self.versions.iter().map(|v| v.incremental_triples).sum()
    }

    /// Cumulative incremental over cumulative snapshot triples, four decimals.
    pub fn ratio(&self) -> String {
        format_ratio(self.cumulative_incremental(), self.cumulative_snapshot())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nanopub::{assemble, iri, NanopubBuilder};
    use crate::rdf::{parse_str, Format, Literal};

    /// Three nanopubs of 4 head + 2 assertion + 2 provenance + 2 pubinfo triples.
    fn fixture() -> Vec<Nanopub> {
        (0..3)
            .map(|k| {
                let uri = iri(&format!("http://example.org/np/{k}"));
                let mut b = NanopubBuilder::new(uri.clone());
                let a = b.graphs().assertion.clone();
                b.assertion(iri(&format!("http://ex/gene/{k}")), iri("http://ex/assoc"), iri("http://ex/disease/1"))
                    .assertion(iri(&format!("http://ex/gene/{k}")), iri("http://ex/score"), Literal::plain("0.5"))
                    .provenance(a.clone(), iri("http://ex/derivedFrom"), iri("http://ex/pubmed/1"))
                    .provenance(a, iri("http://ex/evidence"), iri("http://ex/eco/1"))
                    .pubinfo(uri.clone(), iri("http://ex/license"), iri("http://ex/cc0"))
                    .created(&format!("2017-0{}-01T00:00:00Z", k + 1));
                b.build()
            })
            .collect()
    }

    fn ok(v: Vec<Nanopub>) -> impl Iterator<Item = Result<Nanopub, NanopubError>> {
        v.into_iter().map(Ok)
    }

    #[test]
    fn counts_fixture() {
        let r = count(ok(fixture())).unwrap();
        assert_eq!((r.nanopubs, r.total, r.head, r.outside_head()), (3, 30, 12, 18));
        assert_eq!(count(ok(vec![])).unwrap(), CountReport::default());
    }

    #[test]
    fn liddi_head_arithmetic() {
        let r = CountReport { nanopubs: 98_085, total: 2_051_959, head: 392_340, assertion: 1_659_619, ..Default::default() };
        assert_eq!(r.total - r.outside_head(), r.head);
        assert_eq!(r.head, 4 * r.nanopubs);
    }

    #[test]
    fn filter_matches_literals_and_iris() {
        let needles: HashSet<String> = ["2017-02-01T00:00:00Z".to_string()].into();
        let hit: Vec<_> = filter(ok(fixture()), &needles).map(Result::unwrap).collect();
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].uri().as_str(), "http://example.org/np/1");
        let needles: HashSet<String> = ["http://ex/disease/1".to_string()].into();
        assert_eq!(filter(ok(fixture()), &needles).count(), 3);
        let needles: HashSet<String> = ["http://nothing".to_string()].into();
        assert_eq!(filter(ok(fixture()), &needles).count(), 0);
    }

    #[test]
    fn extract_agrees_with_count() {
        let nps = fixture();
        let r = count(ok(nps.clone())).unwrap();
        let sel = [GraphRole::Provenance, GraphRole::PubInfo];
        let n: usize = nps.iter().map(|np| extract(np, &sel).count()).sum();
        assert_eq!(n as u64, r.provenance + r.pubinfo);
        let all: usize = nps.iter().map(|np| extract(np, &GraphRole::ALL).count()).sum();
        assert_eq!(all as u64, r.total);
    }

    #[test]
    fn decontext_collapses_shared_context() {
        let d = decontext(ok(fixture())).unwrap();
        let r = d.report();
        assert_eq!(r.outside_head, 18);
        // 6 assertion triples, 2 shared provenance, 1 shared license, 3 timestamps
        assert_eq!(r.decontextualized, 12);
        assert_eq!(r.ratio(), "0.6667");
        let mut out = Vec::new();
        d.write_ntriples(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.contains("<urn:npop:dataset> <http://ex/derivedFrom> <http://ex/pubmed/1> ."));
    }

    #[test]
    fn decontext_without_duplicates_is_identity_ratio() {
        let input = "<http://x/np#Head> { <http://x/np> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.nanopub.org/nschema#Nanopublication> ; <http://www.nanopub.org/nschema#hasAssertion> <http://x/np#a> ; <http://www.nanopub.org/nschema#hasProvenance> <http://x/np#p> ; <http://www.nanopub.org/nschema#hasPublicationInfo> <http://x/np#i> . }\n<http://x/np#a> { <http://ex/s> <http://ex/p> <http://ex/o> . }\n<http://x/np#p> { <http://ex/s> <http://ex/src> <http://ex/db> . }\n<http://x/np#i> { <http://ex/s> <http://ex/lic> \"cc0\" . }\n";
        let quads = parse_str(input, Format::TriG).unwrap();
        let d = decontext(assemble(quads.into_iter().map(Ok))).unwrap();
        assert_eq!(d.report().ratio(), "1.0000");
    }

    #[test]
    fn change_based_counts() {
        let v1: HashSet<u32> = [1, 2, 3].into();
        let v2: HashSet<u32> = [2, 3, 4].into();
        let v3: HashSet<u32> = [2, 3, 4].into();
        assert_eq!(change_based_triple_count([&v1, &v2, &v3]), 3 + 2);
    }

    #[test]
    fn history_tally() {
        let mut h = HistoryTally::default();
        h.record("v1", 100, 100);
        h.record("v2", 100, 5);
        assert_eq!(h.cumulative_snapshot(), 200);
        assert_eq!(h.ratio(), "0.5250");
    }
}
