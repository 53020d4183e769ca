#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use npop_core::diff::Partition;
use npop_core::nanopub::{Nanopub, NanopubBuilder};
use npop_core::rdf::{Iri, Literal, Quad, Term};
use npop_core::trusty::{make_trusty, TrustyUri};
use npop_core::vocab;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn base() -> Iri {
    iri("http://purl.org/np/")
}

pub fn trusty(np: &Nanopub) -> TrustyUri {
    TrustyUri::from_iri(np.uri()).unwrap()
}

// ---- proptest strategies over raw quads ----

pub fn arb_iri() -> impl Strategy<Value = Iri> {
    prop_oneof![
        "http://ex\\.org/[a-zA-Z0-9._~/#%-]{0,12}",
        "urn:[a-z]{1,4}:[a-zA-Z0-9é中ü:_-]{1,10}",
        "https://[a-z]{1,6}\\.net/[^\\x00-\\x20<>\"{}|^`\\\\\\x7f]{0,10}",
    ]
    .prop_map(|s| Iri::new(s).unwrap())
}

pub fn arb_literal() -> impl Strategy<Value = Literal> {
    let value = prop_oneof![3 => "(?s).{0,16}", 1 => "[\"\\\\\n\r\t ]{0,6}"];
    prop_oneof![
        value.clone().prop_map(Literal::plain),
        (value.clone(), "[a-z]{2,3}(-[A-Za-z0-9]{1,8}){0,2}").prop_map(|(v, t)| Literal::lang(v, t).unwrap()),
        (value, arb_iri()).prop_map(|(v, dt)| Literal::typed(v, dt)),
    ]
}

pub fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![arb_iri().prop_map(Term::Iri), arb_literal().prop_map(Term::Literal)]
}

pub fn arb_quad() -> impl Strategy<Value = Quad> {
    // A handful of graph names so that TriG blocks hold several statements.
    let graph = prop_oneof![
        Just(iri("http://ex.org/g/1")),
        Just(iri("http://ex.org/g/2")),
        Just(iri("urn:g:é")),
        arb_iri(),
    ];
    (graph, arb_iri(), arb_iri(), arb_term()).prop_map(|(g, s, p, o)| Quad::new(g, s, p, o))
}

pub fn arb_quads() -> impl Strategy<Value = Vec<Quad>> {
    prop::collection::vec(arb_quad(), 0..24)
}

// ---- synthetic nanopublications ----

/// Abstract content of one synthetic nanopublication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    /// `None` yields an assertion about the nanopublication itself, which has no topic.
    pub topic: Option<u32>,
    pub facts: Vec<(u32, u32)>,
    pub source: u32,
    pub label: Option<String>,
}

impl Payload {
    pub fn random(rng: &mut StdRng, topic: Option<u32>) -> Payload {
        let n = rng.random_range(2..6);
        let facts = (0..n).map(|_| (rng.random_range(0..8), rng.random_range(0..1000))).collect();
        let label = rng.random_bool(0.3).then(|| format!("label \"{}\"\n{}", rng.random_range(0..100), "é"));
        Payload { topic, facts, source: rng.random_range(0..10_000), label }
    }

    /// Same topic, different content.
    pub fn edited(&self, rng: &mut StdRng) -> Payload {
        let mut s = self.clone();
        loop {
            let k = rng.random_range(0..s.facts.len());
            let before = s.facts[k];
            s.facts[k] = (rng.random_range(0..8), rng.random_range(1000..2000));
            if s.facts[k] != before {
                return s;
            }
        }
    }

    pub fn nanopub(&self, uri: &Iri, created: &str) -> Nanopub {
        let mut b = NanopubBuilder::new(uri.clone());
        let subject = match self.topic {
            Some(t) => iri(&format!("http://ex.org/entity/{t}")),
            None => uri.clone(),
        };
        for &(p, o) in &self.facts {
            b.assertion(subject.clone(), iri(&format!("http://ex.org/p/{p}")), iri(&format!("http://ex.org/o/{o}")));
        }
        if let Some(l) = &self.label {
            b.assertion(subject.clone(), iri("http://www.w3.org/2000/01/rdf-schema#label"), Literal::lang(l.clone(), "en").unwrap());
        }
        if self.topic.is_some() {
            // One extra subject, always outnumbered by the topic.
            b.assertion(iri("http://ex.org/aux"), iri("http://ex.org/p/aux"), Literal::plain("x"));
        }
        let a = b.graphs().assertion.clone();
        b.provenance(a, iri("http://www.w3.org/ns/prov#wasDerivedFrom"), iri(&format!("http://ex.org/src/{}", self.source)));
        b.pubinfo(uri.clone(), iri("http://purl.org/pav/createdBy"), iri("http://ex.org/pipeline"));
        b.created(created);
        b.build()
    }
}

pub fn timestamp(version: usize, k: usize) -> String {
    format!("2017-{:02}-{:02}T{:02}:{:02}:00Z", 1 + version % 12, 1 + k % 28, k / 60 % 24, k % 60)
}

pub fn trusty_from_payload(payload: &Payload, created: &str) -> Nanopub {
    make_trusty(&payload.nanopub(&base(), created), &base()).unwrap()
}

/// A previous version (trusty) and the next snapshot (placeholder URIs) with a
/// planted edit script.
pub struct SnapshotPair {
    pub prev: Vec<Nanopub>,
    pub next: Vec<Nanopub>,
}

pub fn snapshot_pair(rng: &mut StdRng, max: usize) -> SnapshotPair {
    let n = rng.random_range(1..=max);
    let mut topic_counter = 0u32;
    let mut fresh_topic = |rng: &mut StdRng| {
        if rng.random_bool(0.03) {
            None
        } else {
            topic_counter += 1;
            Some(topic_counter)
        }
    };
    let mut prev_payloads: Vec<Payload> = Vec::with_capacity(n);
    for _ in 0..n {
        let t = fresh_topic(rng);
        // Occasional exact duplicates and shared topics.
        let payload = match rng.random_range(0..40) {
            0 if !prev_payloads.is_empty() => prev_payloads[rng.random_range(0..prev_payloads.len())].clone(),
            1 if !prev_payloads.is_empty() => {
                let other = &prev_payloads[rng.random_range(0..prev_payloads.len())];
                Payload::random(rng, other.topic)
            }
            _ => Payload::random(rng, t),
        };
        prev_payloads.push(payload);
    }

    let mut next_payloads = Vec::new();
    for s in &prev_payloads {
        match rng.random_range(0..100) {
            0..=79 => next_payloads.push(s.clone()),
            80..=89 => next_payloads.push(s.edited(rng)),
            90..=94 => {}
            95..=97 => {
                next_payloads.push(s.edited(rng));
                next_payloads.push(s.edited(rng));
            }
            _ => next_payloads.push(Payload::random(rng, s.topic)),
        }
    }
    for _ in 0..rng.random_range(0..=n / 10 + 1) {
        let t = fresh_topic(rng);
        next_payloads.push(Payload::random(rng, t));
    }
    next_payloads.shuffle(rng);
    next_payloads.truncate(max);

    let prev = prev_payloads.iter().enumerate().map(|(k, s)| trusty_from_payload(s, &timestamp(0, k))).collect();
    let next = next_payloads
        .iter()
        .enumerate()
        .map(|(k, s)| s.nanopub(&iri(&format!("http://example.org/snapshot/np{k}")), &timestamp(1, k)))
        .collect();
    SnapshotPair { prev, next }
}

// ---- brute-force reuse oracle ----

fn is_code_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn own(iri: &str, uri: &str) -> Option<String> {
    let rest = iri.strip_prefix(uri)?;
    match rest.chars().next() {
        Some(c) if is_code_char(c) => None,
        _ => Some(format!("SELF{rest}")),
    }
}

fn show_iri(iri: &Iri, uri: &str) -> String {
    own(iri.as_str(), uri).unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

/// Content of a nanopublication as a set of lines, with its own IRIs made
/// position-independent and timestamp/supersedes pubinfo dropped.
pub fn content_key(np: &Nanopub) -> BTreeSet<String> {
    let uri = np.uri().as_str();
    let pubinfo = &np.graphs().pubinfo;
    np.iter()
        .filter(|q| {
            !(&q.graph == pubinfo
                && (q.predicate.as_str() == vocab::DCT_CREATED || q.predicate.as_str() == vocab::NPX_SUPERSEDES))
        })
        .map(|q| {
            let o = match &q.object {
                Term::Iri(o) => show_iri(o, uri),
                Term::Literal(l) => l.to_string(),
            };
            format!("{} {} {} {}", show_iri(&q.graph, uri), show_iri(&q.subject, uri), show_iri(&q.predicate, uri), o)
        })
        .collect()
}

pub fn oracle_topic(np: &Nanopub) -> Option<String> {
    let uri = np.uri().as_str();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for q in np.assertion().iter() {
        if own(q.subject.as_str(), uri).is_none() {
            *counts.entry(q.subject.as_str().to_string()).or_default() += 1;
        }
    }
    let max = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, n)| n == max).map(|(t, _)| t)
}

/// Reference partition: first-come exact matches over all pairs, then topic pairing
/// in URI order.
pub fn oracle_partition(prev: &[Nanopub], next: &[Nanopub]) -> Partition {
    let pk: Vec<_> = prev.iter().map(content_key).collect();
    let nk: Vec<_> = next.iter().map(content_key).collect();
    let mut taken = vec![false; prev.len()];
    let mut p = Partition::default();
    let mut rest = Vec::new();
    for (i, k) in nk.iter().enumerate() {
        match (0..prev.len()).find(|&j| !taken[j] && &pk[j] == k) {
            Some(j) => {
                taken[j] = true;
                p.reused.push((i, j));
            }
            None => rest.push(i),
        }
    }
    let mut groups: BTreeMap<String, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in rest {
        match oracle_topic(&next[i]) {
            Some(t) => groups.entry(t).or_default().0.push(i),
            None => p.additions.push(i),
        }
    }
    for j in (0..prev.len()).filter(|&j| !taken[j]) {
        match oracle_topic(&prev[j]) {
            Some(t) => groups.entry(t).or_default().1.push(j),
            None => p.removed.push(j),
        }
    }
    for (_, (mut news, mut olds)) in groups {
        news.sort_by_key(|&i| (next[i].uri().as_str().to_string(), i));
        olds.sort_by_key(|&j| (prev[j].uri().as_str().to_string(), j));
        let k = news.len().min(olds.len());
        p.updates.extend(news[..k].iter().copied().zip(olds[..k].iter().copied()));
        p.additions.extend_from_slice(&news[k..]);
        p.removed.extend_from_slice(&olds[k..]);
    }
    p.normalized()
}

pub fn random_trusty_uris(rng: &mut StdRng, n: usize) -> Vec<TrustyUri> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let digest: [u8; 32] = rng.random();
        if seen.insert(digest) {
            let code = npop_core::trusty::ArtifactCode::from_digest(&digest);
            out.push(TrustyUri::parse(&format!("http://purl.org/np/{}", code.as_str())).unwrap());
        }
    }
    out
}
