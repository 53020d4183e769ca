//! Version-to-version reuse: fingerprints, topics and the reuse join.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::nanopub::{GraphRole, Nanopub};
use crate::ratio::percent;
use crate::rdf::{Iri, Quad, Term};
use crate::trusty::{self, make_trusty, normalize_quads, rebase, self_suffix, TrustyError, Verification};
use crate::vocab;

#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error("previous version nanopublication <{uri}> does not verify: {reason}")]
    CorruptHistory { uri: String, reason: String },
    #[error(transparent)]
    Trusty(#[from] TrustyError),
}

/// Which quads are left out before hashing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FingerprintProfile {
    /// Drop `dct:created` from pubinfo.
    #[default]
    IgnoreTimestamp,
    /// Drop the whole pubinfo graph.
    IgnorePubinfo,
    /// Drop pubinfo quads with one of these predicates. An empty set strips nothing.
    Custom(BTreeSet<Iri>),
}

impl FingerprintProfile {
    pub fn strip_nothing() -> Self {
        FingerprintProfile::Custom(BTreeSet::new())
    }

    pub fn strips(&self, role: GraphRole, quad: &Quad) -> bool {
        if role != GraphRole::PubInfo {
            return false;
        }
        match self {
            FingerprintProfile::IgnoreTimestamp => quad.predicate.as_str() == vocab::DCT_CREATED,
            FingerprintProfile::IgnorePubinfo => true,
            FingerprintProfile::Custom(preds) => preds.contains(&quad.predicate),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", self.to_hex())
    }
}

fn fingerprint_filtered(np: &Nanopub, mut strip: impl FnMut(GraphRole, &Quad) -> bool) -> Fingerprint {
    let mut kept = Vec::with_capacity(np.quad_count());
    for role in GraphRole::ALL {
        kept.extend(np.quads(role).iter().filter(|q| !strip(role, q)));
    }
    let doc = normalize_quads(kept, np.uri().as_str());
    Fingerprint(Sha256::digest(doc.to_bytes()).into())
}

pub fn fingerprint(np: &Nanopub, profile: &FingerprintProfile) -> Fingerprint {
    fingerprint_filtered(np, |role, q| profile.strips(role, q))
}

/// Fingerprint used when matching versions: also ignores pubinfo supersedes links,
/// which the reuse step itself injects.
pub fn reuse_fingerprint(np: &Nanopub, profile: &FingerprintProfile) -> Fingerprint {
    fingerprint_filtered(np, |role, q| profile.strips(role, q) || is_supersedes(role, q))
}

fn is_supersedes(role: GraphRole, q: &Quad) -> bool {
    role == GraphRole::PubInfo && q.predicate.as_str() == vocab::NPX_SUPERSEDES
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TopicStrategy {
    #[default]
    DominantSubject,
    /// Most frequent IRI object of this predicate in the assertion.
    FixedPredicate(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopicConfig {
    pub strategy: TopicStrategy,
    /// IRI prefixes that never count as topics.
    pub exclusions: Vec<String>,
}

impl TopicConfig {
    fn excluded(&self, np: &Nanopub, iri: &Iri) -> bool {
        let s = iri.as_str();
        self_suffix(s, np.uri().as_str()).is_some()
            || np.graphs().role_of(iri).is_some()
            || self.exclusions.iter().any(|p| s.starts_with(p.as_str()))
    }
}

pub fn topic(np: &Nanopub, config: &TopicConfig) -> Option<Iri> {
    let mut counts: BTreeMap<&Iri, usize> = BTreeMap::new();
    for q in np.assertion().iter() {
        let candidate = match &config.strategy {
            TopicStrategy::DominantSubject => Some(&q.subject),
            TopicStrategy::FixedPredicate(p) if &q.predicate == p => match &q.object {
                Term::Iri(o) => Some(o),
                Term::Literal(_) => None,
            },
            TopicStrategy::FixedPredicate(_) => None,
        };
        if let Some(c) = candidate {
            if !config.excluded(np, c) {
                *counts.entry(c).or_default() += 1;
            }
        }
    }
    // BTreeMap iterates in code-point order; keep the first maximum.
    let mut best: Option<(&Iri, usize)> = None;
    for (iri, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((iri, n));
        }
    }
    best.map(|(iri, _)| iri.clone())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub version_label: String,
    pub total: u64,
    pub reused: u64,
    pub new: u64,
    pub updates: u64,
    pub additions: u64,
    pub removed: u64,
    /// (new URI, old URI)
    pub supersedes_pairs: Vec<(String, String)>,
}

const TABLE_COLUMNS: [&str; 6] = ["version", "nanopublications", "reused", "new", "update", "addition"];
const TABLE_WIDTHS: [usize; 6] = [12, 18, 18, 16, 16, 16];

impl DiffReport {
    pub fn from_counts(version_label: impl Into<String>, reused: u64, updates: u64, additions: u64, removed: u64) -> Self {
        let new = updates + additions;
        DiffReport {
            version_label: version_label.into(),
            total: reused + new,
            reused,
            new,
            updates,
            additions,
            removed,
            supersedes_pairs: Vec::new(),
        }
    }

    pub fn reused_pct(&self) -> String {
        percent(self.reused, self.total)
    }

    pub fn new_pct(&self) -> String {
        percent(self.new, self.total)
    }

    pub fn updates_pct(&self) -> String {
        percent(self.updates, self.new)
    }

    pub fn additions_pct(&self) -> String {
        percent(self.additions, self.new)
    }

    fn cells(&self) -> [String; 6] {
        [
            self.version_label.clone(),
            self.total.to_string(),
            format!("{} ({})", self.reused, self.reused_pct()),
            format!("{} ({})", self.new, self.new_pct()),
            format!("{} ({})", self.updates, self.updates_pct()),
            format!("{} ({})", self.additions, self.additions_pct()),
        ]
    }

    pub fn table_header() -> String {
        pad_row(TABLE_COLUMNS.iter().map(|s| s.to_string()))
    }

    pub fn table_row(&self) -> String {
        pad_row(self.cells())
    }

    pub fn render_table<'a>(reports: impl IntoIterator<Item = &'a DiffReport>) -> String {
        let mut out = Self::table_header();
        out.push('\n');
        for r in reports {
            out.push_str(&r.table_row());
            out.push('\n');
        }
        out
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            #[serde(flatten)]
            report: &'a DiffReport,
            reused_pct: String,
            new_pct: String,
            updates_pct: String,
            additions_pct: String,
        }
        let line = Line {
            report: self,
            reused_pct: self.reused_pct(),
            new_pct: self.new_pct(),
            updates_pct: self.updates_pct(),
            additions_pct: self.additions_pct(),
        };
        serde_json::to_string(&line).expect("report serializes")
    }
}

fn pad_row(cells: impl IntoIterator<Item = String>) -> String {
    let mut row = String::new();
    for (cell, width) in cells.into_iter().zip(TABLE_WIDTHS) {
        row.push_str(&format!("{cell:<width$}"));
    }
    row.trim_end().to_string()
}

/// Index-level outcome of a reuse run, against positions in the inputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    /// (next index, prev index)
    pub reused: Vec<(usize, usize)>,
    /// (next index, prev index)
    pub updates: Vec<(usize, usize)>,
    pub additions: Vec<usize>,
    pub removed: Vec<usize>,
}

impl Partition {
    /// Sort every list so two partitions can be compared structurally.
    pub fn normalized(mut self) -> Self {
        self.reused.sort_unstable();
        self.updates.sort_unstable();
        self.additions.sort_unstable();
        self.removed.sort_unstable();
        self
    }
}

#[derive(Debug, Clone)]
pub struct ReuseConfig {
    pub profile: FingerprintProfile,
    pub topic: TopicConfig,
    pub placeholder_base: Iri,
    pub version_label: String,
}

#[derive(Debug, Clone)]
pub struct ReuseOutcome {
    /// One nanopub per input of the next snapshot, same order.
    pub output: Vec<Nanopub>,
    pub report: DiffReport,
    pub partition: Partition,
    pub warnings: Vec<String>,
}

pub fn reuse(prev: &[Nanopub], next: &[Nanopub], config: &ReuseConfig) -> Result<ReuseOutcome, DiffError> {
    prev.par_iter().try_for_each(|np| match trusty::verify(np) {
        Ok(Verification::Valid) => Ok(()),
        Ok(v) => Err(DiffError::CorruptHistory { uri: np.uri().as_str().to_string(), reason: v.to_string() }),
        Err(e) => Err(DiffError::CorruptHistory { uri: np.uri().as_str().to_string(), reason: e.to_string() }),
    })?;

    let prev_fp: Vec<Fingerprint> = prev.par_iter().map(|np| reuse_fingerprint(np, &config.profile)).collect();
    let next_fp: Vec<Fingerprint> = next.par_iter().map(|np| reuse_fingerprint(np, &config.profile)).collect();

    let mut by_fp: HashMap<Fingerprint, VecDeque<usize>> = HashMap::with_capacity(prev.len());
    for (j, fp) in prev_fp.iter().enumerate() {
        by_fp.entry(*fp).or_default().push_back(j);
    }

    let mut partition = Partition::default();
    let mut prev_taken = vec![false; prev.len()];
    let mut next_rest = Vec::new();
    for (i, fp) in next_fp.iter().enumerate() {
        match by_fp.get_mut(fp).and_then(VecDeque::pop_front) {
            Some(j) => {
                prev_taken[j] = true;
                partition.reused.push((i, j));
            }
            None => next_rest.push(i),
        }
    }
    let prev_rest: Vec<usize> = (0..prev.len()).filter(|&j| !prev_taken[j]).collect();

    let next_topics: Vec<(usize, Option<Iri>)> =
        next_rest.par_iter().map(|&i| (i, topic(&next[i], &config.topic))).collect();
    let prev_topics: Vec<(usize, Option<Iri>)> =
        prev_rest.par_iter().map(|&j| (j, topic(&prev[j], &config.topic))).collect();

    let mut groups: BTreeMap<Iri, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, t) in next_topics {
        match t {
            Some(t) => groups.entry(t).or_default().0.push(i),
            None => partition.additions.push(i),
        }
    }
    for (j, t) in prev_topics {
        match t {
            Some(t) => groups.entry(t).or_default().1.push(j),
            None => partition.removed.push(j),
        }
    }

    let mut warnings = Vec::new();
    for (t, (mut news, mut olds)) in groups {
        news.sort_by(|&a, &b| next[a].uri().as_str().cmp(next[b].uri().as_str()).then(a.cmp(&b)));
        olds.sort_by(|&a, &b| prev[a].uri().as_str().cmp(prev[b].uri().as_str()).then(a.cmp(&b)));
        let paired = news.len().min(olds.len());
        if !news.is_empty() && !olds.is_empty() && news.len() != olds.len() {
            warnings.push(format!(
                "topic <{}>: {} new vs {} old nanopublications, {} left unpaired",
                t.as_str(),
                news.len(),
                olds.len(),
                news.len().abs_diff(olds.len())
            ));
        }
        partition.updates.extend(news.iter().copied().zip(olds.iter().copied()));
        partition.additions.extend_from_slice(&news[paired..]);
        partition.removed.extend_from_slice(&olds[paired..]);
    }
    for w in &warnings {
        tracing::warn!("{w}");
    }

    let mut update_of: HashMap<usize, usize> = partition.updates.iter().copied().collect();
    let mut reused_of: HashMap<usize, usize> = partition.reused.iter().copied().collect();
    let jobs: Vec<(usize, Job)> = (0..next.len())
        .map(|i| {
            let job = if let Some(j) = reused_of.remove(&i) {
                Job::Reuse(j)
            } else if let Some(j) = update_of.remove(&i) {
                Job::Update(j)
            } else {
                Job::Add
            };
            (i, job)
        })
        .collect();

    let output: Vec<Nanopub> = jobs
        .par_iter()
        .map(|&(i, ref job)| match *job {
            Job::Reuse(j) => Ok(prev[j].clone()),
            Job::Update(j) => finalize(&next[i], Some(prev[j].uri()), &config.placeholder_base),
            Job::Add => finalize(&next[i], None, &config.placeholder_base),
        })
        .collect::<Result<_, TrustyError>>()?;

    let mut report = DiffReport::from_counts(
        config.version_label.clone(),
        partition.reused.len() as u64,
        partition.updates.len() as u64,
        partition.additions.len() as u64,
        partition.removed.len() as u64,
    );
    let mut pairs: Vec<(usize, usize)> = partition.updates.clone();
    pairs.sort_unstable();
    report.supersedes_pairs =
        pairs.into_iter().map(|(i, j)| (output[i].uri().as_str().to_string(), prev[j].uri().as_str().to_string())).collect();

    Ok(ReuseOutcome { output, report, partition, warnings })
}

enum Job {
    Reuse(usize),
    Update(usize),
    Add,
}

/// Move a snapshot nanopub onto the placeholder base, replace any supersedes links
/// it carries, and finalize its trusty URI.
fn finalize(np: &Nanopub, supersedes: Option<&Iri>, placeholder_base: &Iri) -> Result<Nanopub, TrustyError> {
    let mut np = rebase(np, placeholder_base).without_quads(is_supersedes);
    if let Some(old) = supersedes {
        let pubinfo = np.graphs().pubinfo.clone();
        let quad = Quad::new(pubinfo, np.uri().clone(), Iri::new(vocab::NPX_SUPERSEDES).expect("valid"), old.clone());
        np = np.with_quad(GraphRole::PubInfo, quad).expect("pubinfo graph belongs to the nanopub");
    }
    make_trusty(&np, placeholder_base)
}
