//! Index nanopublications: chunked element lists chained by appends links.

use std::collections::{HashMap, HashSet};

use indexmap::IndexSet;

use crate::nanopub::{Nanopub, NanopubBuilder};
use crate::rdf::{Iri, Literal, Term};
use crate::trusty::{self, make_trusty, TrustyError, TrustyUri, Verification};
use crate::vocab;

/// Combined element and sub-index links allowed in one index nanopublication.
pub const MAX_ENTRIES: usize = 1000;

/// Sub-index nesting allowed while resolving.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate index entry <{0}>")]
    DuplicateEntry(String),
    #[error("<{0}> is not a trusty URI")]
    NotTrusty(String),
    #[error("<{0}> is not an index nanopublication")]
    NotAnIndex(String),
    #[error("index <{0}> appends more than one index")]
    MultipleAppends(String),
    #[error("index <{0}> holds {1} entries, more than the limit of {MAX_ENTRIES}")]
    TooManyEntries(String, usize),
    #[error("missing index <{0}>")]
    Missing(String),
    #[error("nanopublication <{uri}> failed verification: {reason}")]
    Verification { uri: String, reason: String },
    #[error("index cycle through <{0}>")]
    Cycle(String),
    #[error("sub-index nesting deeper than {MAX_DEPTH} at <{0}>")]
    TooDeep(String),
    #[error("could not fetch <{uri}>: {reason}")]
    Fetch { uri: String, reason: String },
    #[error("no top index among the previous indexes")]
    NoTop,
    #[error(transparent)]
    Trusty(#[from] TrustyError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexMetadata {
    pub title: String,
    pub description: Option<String>,
    /// `xsd:dateTime` lexical value.
    pub created: Option<String>,
    pub creator: Option<Iri>,
}

/// A verified view of an index nanopublication.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexNanopub {
    np: Nanopub,
    elements: Vec<Iri>,
    subindexes: Vec<Iri>,
    appends: Option<Iri>,
    supersedes: Option<Iri>,
    title: Option<String>,
    description: Option<String>,
}

impl IndexNanopub {
    pub fn is_index(np: &Nanopub) -> bool {
        np.assertion().iter().any(|q| {
            &q.subject == np.uri()
                && q.predicate.as_str() == vocab::RDF_TYPE
                && q.object.value() == vocab::NPX_NANOPUB_INDEX
                && q.object.as_iri().is_some()
        })
    }

    pub fn from_nanopub(np: Nanopub) -> Result<Self, IndexError> {
        let uri = np.uri().as_str().to_owned();
        if !Self::is_index(&np) {
            return Err(IndexError::NotAnIndex(uri));
        }
        let mut elements = Vec::new();
        let mut subindexes = Vec::new();
        let mut appends = None;
        for q in np.assertion().iter().filter(|q| &q.subject == np.uri()) {
            let Term::Iri(target) = &q.object else { continue };
            match q.predicate.as_str() {
                vocab::NPX_INCLUDES_ELEMENT => elements.push(trusty_target(target)?),
                vocab::NPX_INCLUDES_SUBINDEX => subindexes.push(trusty_target(target)?),
                vocab::NPX_APPENDS_INDEX if appends.is_some() => return Err(IndexError::MultipleAppends(uri)),
                vocab::NPX_APPENDS_INDEX => appends = Some(trusty_target(target)?),
                _ => {}
            }
        }
        if elements.len() + subindexes.len() > MAX_ENTRIES {
            return Err(IndexError::TooManyEntries(uri, elements.len() + subindexes.len()));
        }
        let mut supersedes = None;
        let mut title = None;
        let mut description = None;
        for q in np.pubinfo().iter().filter(|q| &q.subject == np.uri()) {
            match (q.predicate.as_str(), &q.object) {
                (vocab::NPX_SUPERSEDES, Term::Iri(o)) => supersedes = Some(o.clone()),
                (vocab::DCT_TITLE, Term::Literal(l)) => title = Some(l.value().to_owned()),
                (vocab::DCT_DESCRIPTION, Term::Literal(l)) => description = Some(l.value().to_owned()),
                _ => {}
            }
        }
        Ok(IndexNanopub { np, elements, subindexes, appends, supersedes, title, description })
    }

    pub fn uri(&self) -> &Iri {
        self.np.uri()
    }

    pub fn nanopub(&self) -> &Nanopub {
        &self.np
    }

    pub fn into_nanopub(self) -> Nanopub {
        self.np
    }

    pub fn elements(&self) -> &[Iri] {
        &self.elements
    }

    pub fn subindexes(&self) -> &[Iri] {
        &self.subindexes
    }

    pub fn appends(&self) -> Option<&Iri> {
        self.appends.as_ref()
    }

    pub fn supersedes(&self) -> Option<&Iri> {
        self.supersedes.as_ref()
    }

    pub fn title(&self) -> Option<&str> {
        self.title.as_deref()
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn entry_count(&self) -> usize {
        self.elements.len() + self.subindexes.len()
    }

    fn entry_set(&self) -> HashSet<&Iri> {
        self.subindexes.iter().chain(&self.elements).collect()
    }
}

fn trusty_target(iri: &Iri) -> Result<Iri, IndexError> {
    TrustyUri::from_iri(iri).map_err(|_| IndexError::NotTrusty(iri.as_str().to_owned()))?;
    Ok(iri.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry<'a> {
    Element(&'a Iri),
    Subindex(&'a Iri),
}

impl<'a> Entry<'a> {
    fn iri(&self) -> &'a Iri {
        match self {
            Entry::Element(i) | Entry::Subindex(i) => i,
        }
    }
}

/// Sub-indexes first, then elements, each in caller order.
fn entries<'a>(elements: &'a [TrustyUri], subindexes: &'a [TrustyUri], iris: &'a mut Vec<Iri>) -> Result<Vec<Entry<'a>>, IndexError> {
    iris.extend(subindexes.iter().chain(elements).map(TrustyUri::to_iri));
    let mut seen = HashSet::with_capacity(iris.len());
    for iri in iris.iter() {
        if !seen.insert(iri) {
            return Err(IndexError::DuplicateEntry(iri.as_str().to_owned()));
        }
    }
    let (subs, elems) = iris.split_at(subindexes.len());
    Ok(subs.iter().map(Entry::Subindex).chain(elems.iter().map(Entry::Element)).collect())
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRI")
}

fn build_chunk(
    entries: &[Entry<'_>],
    appends: Option<&Iri>,
    top: Option<Option<&Iri>>,
    meta: &IndexMetadata,
    placeholder_base: &Iri,
) -> Result<Nanopub, TrustyError> {
    let me = placeholder_base.clone();
    let mut b = NanopubBuilder::new(me.clone());
    b.assertion(me.clone(), iri(vocab::RDF_TYPE), iri(vocab::NPX_NANOPUB_INDEX));
    for e in entries {
        let pred = match e {
            Entry::Element(_) => vocab::NPX_INCLUDES_ELEMENT,
            Entry::Subindex(_) => vocab::NPX_INCLUDES_SUBINDEX,
        };
        b.assertion(me.clone(), iri(pred), e.iri().clone());
    }
    if let Some(prev) = appends {
        b.assertion(me.clone(), iri(vocab::NPX_APPENDS_INDEX), prev.clone());
    }

    let assertion = b.graphs().assertion.clone();
    let creator = meta.creator.clone().unwrap_or_else(|| iri(vocab::ANONYMOUS_CREATOR));
    b.provenance(assertion, iri(vocab::PROV_WAS_ATTRIBUTED_TO), creator);

    b.pubinfo(me.clone(), iri(vocab::DCT_TITLE), Literal::plain(meta.title.clone()));
    if let Some(created) = &meta.created {
        b.created(created);
    }
    if let Some(supersedes) = top {
        if let Some(d) = &meta.description {
            b.pubinfo(me.clone(), iri(vocab::DCT_DESCRIPTION), Literal::plain(d.clone()));
        }
        if let Some(old) = supersedes {
            b.pubinfo(me, iri(vocab::NPX_SUPERSEDES), old.clone());
        }
    }
    make_trusty(&b.build(), placeholder_base)
}

/// Packs entries into a chain of finalized index nanopublications, oldest first.
/// The first new chunk appends `appends`, if given; the last one is the top.
fn build_chain(
    entries: &[Entry<'_>],
    appends: Option<Iri>,
    meta: &IndexMetadata,
    supersedes: Option<&Iri>,
    placeholder_base: &Iri,
) -> Result<Vec<Nanopub>, IndexError> {
    let chunks: Vec<&[Entry<'_>]> = if entries.is_empty() { vec![&[]] } else { entries.chunks(MAX_ENTRIES).collect() };
    let mut out = Vec::with_capacity(chunks.len());
    let mut prev = appends;
    let last = chunks.len() - 1;
    for (k, chunk) in chunks.into_iter().enumerate() {
        let top = (k == last).then_some(supersedes);
        let np = build_chunk(chunk, prev.as_ref(), top, meta, placeholder_base)?;
        prev = Some(np.uri().clone());
        out.push(np);
    }
    Ok(out)
}

/// Builds the index chain for a set. Returns chunks oldest first; the last is the top index.
pub fn build_index(
    elements: &[TrustyUri],
    subindexes: &[TrustyUri],
    meta: &IndexMetadata,
    supersedes: Option<&TrustyUri>,
    placeholder_base: &Iri,
) -> Result<Vec<Nanopub>, IndexError> {
    let mut iris = Vec::new();
    let entries = entries(elements, subindexes, &mut iris)?;
    let supersedes = supersedes.map(TrustyUri::to_iri);
    build_chain(&entries, None, meta, supersedes.as_ref(), placeholder_base)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchError {
    NotFound,
    Failed(String),
}

/// Something that can hand out nanopublications by URI.
pub trait NanopubSource: Sync {
    fn fetch(&self, uri: &Iri) -> Result<Nanopub, FetchError>;

    /// Fetch a batch; results line up with `uris`. Implementations may run these concurrently.
    fn fetch_many(&self, uris: &[Iri]) -> Vec<Result<Nanopub, FetchError>> {
        uris.iter().map(|u| self.fetch(u)).collect()
    }
}

/// In-memory store keyed by URI, with optional withheld URIs.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    items: HashMap<Iri, Nanopub>,
    withheld: HashSet<Iri>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, np: Nanopub) {
        self.items.insert(np.uri().clone(), np);
    }

    pub fn withhold(&mut self, uri: &Iri) {
        self.withheld.insert(uri.clone());
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl Extend<Nanopub> for MemoryStore {
    fn extend<T: IntoIterator<Item = Nanopub>>(&mut self, iter: T) {
        for np in iter {
            self.insert(np);
        }
    }
}

impl NanopubSource for MemoryStore {
    fn fetch(&self, uri: &Iri) -> Result<Nanopub, FetchError> {
        if self.withheld.contains(uri) {
            return Err(FetchError::NotFound);
        }
        self.items.get(uri).cloned().ok_or(FetchError::NotFound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSet {
    pub top: Iri,
    pub element_uris: IndexSet<Iri>,
    /// Visited index URIs in resolution order, top first.
    pub index_uris: Vec<Iri>,
}

/// Result of a resolve run, including the index nanopublications themselves.
#[derive(Debug, Clone)]
pub struct Resolution {
    pub set: ResolvedSet,
    pub indexes: Vec<IndexNanopub>,
}

struct Node {
    uri: Iri,
    parent: Option<usize>,
    depth: usize,
}

fn check_fetched(uri: &Iri, fetched: Result<Nanopub, FetchError>) -> Result<IndexNanopub, IndexError> {
    let np = match fetched {
        Ok(np) => np,
        Err(FetchError::NotFound) => return Err(IndexError::Missing(uri.as_str().to_owned())),
        Err(FetchError::Failed(reason)) => return Err(IndexError::Fetch { uri: uri.as_str().to_owned(), reason }),
    };
    let bad = |reason: String| IndexError::Verification { uri: uri.as_str().to_owned(), reason };
    if np.uri() != uri {
        return Err(bad(format!("served nanopublication is <{}>", np.uri().as_str())));
    }
    match trusty::verify(&np) {
        Ok(Verification::Valid) => {}
        Ok(v) => return Err(bad(v.to_string())),
        Err(e) => return Err(bad(e.to_string())),
    }
    IndexNanopub::from_nanopub(np)
}

/// Walks the appends chain and sub-index tree below `top`, one level per batch fetch.
pub fn resolve_index(top: &TrustyUri, source: &dyn NanopubSource) -> Result<Resolution, IndexError> {
    let top_iri = top.to_iri();
    let mut nodes = vec![Node { uri: top_iri.clone(), parent: None, depth: 0 }];
    let mut visited: HashMap<Iri, usize> = HashMap::from([(top_iri.clone(), 0)]);
    let mut frontier = vec![0usize];
    let mut indexes = Vec::new();
    let mut elements = IndexSet::new();

    while !frontier.is_empty() {
        let uris: Vec<Iri> = frontier.iter().map(|&n| nodes[n].uri.clone()).collect();
        let fetched = source.fetch_many(&uris);
        let mut next = Vec::new();
        for (&n, result) in frontier.iter().zip(fetched) {
            let index = check_fetched(&nodes[n].uri, result)?;
            elements.extend(index.elements().iter().cloned());
            let depth = nodes[n].depth;
            let children = index
                .appends()
                .map(|a| (a, depth))
                .into_iter()
                .chain(index.subindexes().iter().map(|s| (s, depth + 1)));
            for (child, child_depth) in children {
                if let Some(&seen) = visited.get(child) {
                    if is_ancestor(&nodes, seen, n) {
                        return Err(IndexError::Cycle(child.as_str().to_owned()));
                    }
                    continue;
                }
                if child_depth > MAX_DEPTH {
                    return Err(IndexError::TooDeep(child.as_str().to_owned()));
                }
                let id = nodes.len();
                nodes.push(Node { uri: child.clone(), parent: Some(n), depth: child_depth });
                visited.insert(child.clone(), id);
                next.push(id);
            }
            indexes.push(index);
        }
        frontier = next;
    }

    let set = ResolvedSet {
        top: top_iri,
        element_uris: elements,
        index_uris: indexes.iter().map(|i| i.uri().clone()).collect(),
    };
    Ok(Resolution { set, indexes })
}

fn is_ancestor(nodes: &[Node], candidate: usize, mut n: usize) -> bool {
    loop {
        if n == candidate {
            return true;
        }
        match nodes[n].parent {
            Some(p) => n = p,
            None => return false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum IreuseOutcome {
    /// The new set equals the previous one; nothing to publish.
    NoChange,
    Built {
        /// Previous chunks linked into the new chain unchanged, oldest first.
        reused: Vec<Iri>,
        /// New chunks, oldest first; the last is the new top index.
        emitted: Vec<Nanopub>,
    },
}

/// Orders a single appends chain oldest first.
fn chain_order(prev: &[IndexNanopub]) -> Result<Vec<&IndexNanopub>, IndexError> {
    let appended: HashSet<&Iri> = prev.iter().filter_map(IndexNanopub::appends).collect();
    let mut tops = prev.iter().filter(|i| !appended.contains(i.uri()));
    let top = tops.next().ok_or(IndexError::NoTop)?;
    if let Some(other) = tops.next() {
        return Err(IndexError::Verification {
            uri: other.uri().as_str().to_owned(),
            reason: format!("second top index besides <{}>", top.uri().as_str()),
        });
    }
    let by_uri: HashMap<&Iri, &IndexNanopub> = prev.iter().map(|i| (i.uri(), i)).collect();
    let mut chain = vec![top];
    let mut cur = top;
    while let Some(a) = cur.appends() {
        cur = by_uri.get(a).ok_or_else(|| IndexError::Missing(a.as_str().to_owned()))?;
        if chain.len() > prev.len() {
            return Err(IndexError::Cycle(a.as_str().to_owned()));
        }
        chain.push(cur);
    }
    chain.reverse();
    Ok(chain)
}

/// Builds the next version of an indexed set, linking the longest prefix of
/// the previous chain whose chunks hold exactly the matching entries.
pub fn ireuse(
    prev: &[IndexNanopub],
    elements: &[TrustyUri],
    subindexes: &[TrustyUri],
    meta: &IndexMetadata,
    placeholder_base: &Iri,
) -> Result<IreuseOutcome, IndexError> {
    for index in prev {
        match trusty::verify(index.nanopub()) {
            Ok(Verification::Valid) => {}
            Ok(v) => return Err(IndexError::Verification { uri: index.uri().as_str().to_owned(), reason: v.to_string() }),
            Err(e) => return Err(IndexError::Verification { uri: index.uri().as_str().to_owned(), reason: e.to_string() }),
        }
    }
    let chain = chain_order(prev)?;
    let prev_top = chain.last().expect("chain is non-empty").uri().clone();

    let mut iris = Vec::new();
    let entries = entries(elements, subindexes, &mut iris)?;

    let prev_entries: HashSet<&Iri> = chain.iter().flat_map(|c| c.subindexes().iter().chain(c.elements())).collect();
    let new_entries: HashSet<&Iri> = entries.iter().map(Entry::iri).collect();
    if prev_entries == new_entries {
        return Ok(IreuseOutcome::NoChange);
    }

    let mut pos = 0;
    let mut reused = Vec::new();
    for chunk in &chain {
        let n = chunk.entry_count();
        if pos + n > entries.len() {
            break;
        }
        let window: HashSet<&Iri> = entries[pos..pos + n].iter().map(Entry::iri).collect();
        if window != chunk.entry_set() {
            break;
        }
        reused.push(chunk.uri().clone());
        pos += n;
    }

    let emitted = build_chain(&entries[pos..], reused.last().cloned(), meta, Some(&prev_top), placeholder_base)?;
    Ok(IreuseOutcome::Built { reused, emitted })
}
