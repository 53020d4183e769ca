//! Content-derived identifiers ("trusty URIs") for nanopublications.
//!
//! The artifact code is `RA` followed by the unpadded base64url encoding of the
//! SHA-256 digest of the nanopublication's normalized form. Normalization
//! replaces every IRI derived from the nanopublication's own URI with
//! `urn:trusty:self` + suffix, renders each quad as a canonical N-Quads line,
//! then sorts and deduplicates the lines. The hashed bytes are the lines joined
//! by `\n`, with a trailing `\n`.
//!
//! An IRI is derived from a base when it is the base itself, or the base
//! followed by a suffix that does not start with an artifact-code character.
//! That keeps `http://x/np/RA1…` from matching `http://x/np/RA1…9` or an
//! unrelated `http://x/np/RA2…` when the base is `http://x/np/`.

use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::nanopub::Nanopub;
use crate::rdf::{Iri, Quad};
use crate::vocab;

pub const MODULE_PREFIX: &str = "RA";
/// Length of the hash part of an artifact code.
pub const HASH_LEN: usize = 43;
pub const CODE_LEN: usize = MODULE_PREFIX.len() + HASH_LEN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrustyError {
    #[error("<{0}> does not end with an artifact code")]
    NoArtifactCode(String),
    #[error("`{0}` is not a valid artifact code")]
    InvalidCode(String),
    #[error("nanopublication URI <{uri}> does not match placeholder base <{base}>")]
    UriMismatch { uri: String, base: String },
    #[error("nanopublication already carries artifact code {existing}, but its content hashes to {computed}")]
    CodeMismatch { existing: ArtifactCode, computed: ArtifactCode },
}

pub(crate) fn is_code_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

/// An `RA` + 43-character artifact code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArtifactCode(String);

impl ArtifactCode {
    pub fn parse(s: &str) -> Result<Self, TrustyError> {
        let ok = s.len() == CODE_LEN && s.starts_with(MODULE_PREFIX) && s.chars().all(is_code_char);
        if ok {
            Ok(ArtifactCode(s.to_owned()))
        } else {
            Err(TrustyError::InvalidCode(s.to_owned()))
        }
    }

    pub fn from_digest(digest: &[u8; 32]) -> Self {
        ArtifactCode(format!("{MODULE_PREFIX}{}", URL_SAFE_NO_PAD.encode(digest)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArtifactCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ArtifactCode {
    type Err = TrustyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArtifactCode::parse(s)
    }
}

/// A URI ending in an artifact code, e.g. `http://purl.org/np/RA…`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrustyUri {
    base: String,
    code: ArtifactCode,
}

impl TrustyUri {
    pub fn parse(uri: &str) -> Result<Self, TrustyError> {
        let no_code = || TrustyError::NoArtifactCode(uri.to_owned());
        if uri.len() < CODE_LEN || !uri.is_char_boundary(uri.len() - CODE_LEN) {
            return Err(no_code());
        }
        let (base, code) = uri.split_at(uri.len() - CODE_LEN);
        let code = ArtifactCode::parse(code).map_err(|_| no_code())?;
        if base.chars().next_back().is_some_and(is_code_char) {
            return Err(no_code());
        }
        Iri::new(uri).map_err(|_| no_code())?;
        Ok(TrustyUri { base: base.to_owned(), code })
    }

    pub fn from_iri(iri: &Iri) -> Result<Self, TrustyError> {
        TrustyUri::parse(iri.as_str())
    }

    /// Everything before the artifact code.
    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn code(&self) -> &ArtifactCode {
        &self.code
    }

    pub fn to_iri(&self) -> Iri {
        Iri::new(self.to_string()).expect("validated at parse time")
    }
}

impl fmt::Display for TrustyUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.code)
    }
}

impl FromStr for TrustyUri {
    type Err = TrustyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrustyUri::parse(s)
    }
}

/// The suffix of `iri` after `base`, if `iri` is derived from `base`.
pub fn self_suffix<'a>(iri: &'a str, base: &str) -> Option<&'a str> {
    let rest = iri.strip_prefix(base)?;
    if rest.starts_with(is_code_char) {
        None
    } else {
        Some(rest)
    }
}

/// Rewrites `iri` to `to` + suffix if it is derived from `from`.
pub fn rewrite_self(iri: &Iri, from: &str, to: &str) -> Iri {
    match self_suffix(iri.as_str(), from) {
        Some(suffix) => Iri::new(format!("{to}{suffix}")).unwrap_or_else(|_| iri.clone()),
        None => iri.clone(),
    }
}

/// Moves a nanopublication from its current URI to `new_base`, rewriting all
/// IRIs derived from the old URI.
pub fn rebase(np: &Nanopub, new_base: &Iri) -> Nanopub {
    let from = np.uri().as_str().to_owned();
    np.map_iris(|iri| rewrite_self(iri, &from, new_base.as_str()))
}

/// Sorted, deduplicated canonical N-Quads lines of a nanopublication with
/// self-references replaced by the placeholder token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDocument {
    lines: Vec<String>,
}

impl NormalizedDocument {
    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum());
        for line in &self.lines {
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
        out
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for line in &self.lines {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().into()
    }

    pub fn artifact_code(&self) -> ArtifactCode {
        ArtifactCode::from_digest(&self.digest())
    }
}

pub(crate) fn normalize_quads<'a>(quads: impl IntoIterator<Item = &'a Quad>, self_base: &str) -> NormalizedDocument {
    let mut lines: Vec<String> = quads
        .into_iter()
        .map(|q| q.clone().map_iris(|iri| rewrite_self(&iri, self_base, vocab::TRUSTY_SELF)).to_nquads_line())
        .collect();
    lines.sort_unstable();
    lines.dedup();
    NormalizedDocument { lines }
}

pub fn normalize(np: &Nanopub, self_base: &str) -> NormalizedDocument {
    normalize_quads(np.iter(), self_base)
}

/// Replaces the trailing run of artifact-code characters of `placeholder_base`
/// with `code`.
pub fn final_uri(placeholder_base: &str, code: &ArtifactCode) -> String {
    let keep = placeholder_base.trim_end_matches(is_code_char);
    format!("{keep}{code}")
}

/// Computes the artifact code of `np` and rewrites its URI and every IRI
/// derived from it to the final trusty URI.
///
/// A nanopublication that already carries a matching artifact code is returned
/// unchanged.
pub fn make_trusty(np: &Nanopub, placeholder_base: &Iri) -> Result<Nanopub, TrustyError> {
    if np.uri() != placeholder_base {
        return Err(TrustyError::UriMismatch {
            uri: np.uri().as_str().to_owned(),
            base: placeholder_base.as_str().to_owned(),
        });
    }
    let code = normalize(np, placeholder_base.as_str()).artifact_code();
    if let Ok(existing) = TrustyUri::from_iri(np.uri()) {
        return if existing.code == code {
            Ok(np.clone())
        } else {
            Err(TrustyError::CodeMismatch { existing: existing.code, computed: code })
        };
    }
    let final_base = final_uri(placeholder_base.as_str(), &code);
    Ok(np.map_iris(|iri| rewrite_self(iri, placeholder_base.as_str(), &final_base)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Valid,
    Invalid { embedded: ArtifactCode, computed: ArtifactCode },
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verification::Valid)
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verification::Valid => f.write_str("valid"),
            Verification::Invalid { embedded, computed } => {
                write!(f, "invalid: content hashes to {computed}, URI says {embedded}")
            }
        }
    }
}

/// Recomputes the artifact code of `np`. Errors only when the URI carries no
/// artifact code at all.
pub fn verify(np: &Nanopub) -> Result<Verification, TrustyError> {
    let uri = TrustyUri::from_iri(np.uri())?;
    let computed = normalize(np, np.uri().as_str()).artifact_code();
    Ok(if computed == uri.code {
        Verification::Valid
    } else {
        Verification::Invalid { embedded: uri.code, computed }
    })
}

/// `verify` collapsed to a boolean; a missing code counts as invalid.
pub fn is_valid(np: &Nanopub) -> bool {
    verify(np).is_ok_and(|v| v.is_valid())
}
