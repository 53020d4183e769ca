use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::vocab;

/// Reasons a string is rejected as an IRI or language tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("empty IRI")]
    EmptyIri,
    #[error("IRI `{0}` has no scheme (relative IRIs are not supported)")]
    RelativeIri(String),
    #[error("IRI `{iri}` contains forbidden character {ch:?}")]
    ForbiddenIriChar { iri: String, ch: char },
    #[error("invalid language tag `{0}`")]
    InvalidLangTag(String),
}

/// An absolute IRI.
///
/// The wrapped string never contains whitespace, control characters or any of
/// `<>"{}|^`\`, so its N-Quads rendering is always `<` + iri + `>`.
/// Ordering is by code point of the IRI string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        validate_iri(&iri)?;
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl TryFrom<&str> for Iri {
    type Error = TermError;
    fn try_from(s: &str) -> Result<Self, Self::Error> {
        Iri::new(s)
    }
}

impl TryFrom<String> for Iri {
    type Error = TermError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Iri::new(s)
    }
}

fn is_forbidden_iri_char(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' | '\u{7f}')
}

fn validate_iri(iri: &str) -> Result<(), TermError> {
    if iri.is_empty() {
        return Err(TermError::EmptyIri);
    }
    if let Some(ch) = iri.chars().find(|&c| is_forbidden_iri_char(c)) {
        return Err(TermError::ForbiddenIriChar { iri: iri.to_owned(), ch });
    }
    let scheme_end = iri.find(':').ok_or_else(|| TermError::RelativeIri(iri.to_owned()))?;
    let scheme = &iri[..scheme_end];
    let mut chars = scheme.chars();
    let valid_scheme = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !valid_scheme {
        return Err(TermError::RelativeIri(iri.to_owned()));
    }
    Ok(())
}

pub(crate) fn validate_lang_tag(tag: &str) -> Result<(), TermError> {
    let mut parts = tag.split('-');
    let first_ok = parts
        .next()
        .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    let rest_ok = parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()));
    if first_ok && rest_ok {
        Ok(())
    } else {
        Err(TermError::InvalidLangTag(tag.to_owned()))
    }
}

/// Datatype or language annotation of a literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LiteralKind {
    /// A plain string (`xsd:string`).
    Plain,
    Lang(String),
    Typed(Iri),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    value: String,
    kind: LiteralKind,
}

impl Literal {
    pub fn plain(value: impl Into<String>) -> Self {
        Literal { value: value.into(), kind: LiteralKind::Plain }
    }

    pub fn lang(value: impl Into<String>, tag: impl Into<String>) -> Result<Self, TermError> {
        let tag = tag.into();
        validate_lang_tag(&tag)?;
        Ok(Literal { value: value.into(), kind: LiteralKind::Lang(tag) })
    }

    /// A typed literal. `xsd:string` collapses to [`LiteralKind::Plain`] so that
    /// the two spellings of a plain string compare equal.
    pub fn typed(value: impl Into<String>, datatype: Iri) -> Self {
        let kind = if datatype.as_str() == vocab::XSD_STRING {
            LiteralKind::Plain
        } else {
            LiteralKind::Typed(datatype)
        };
        Literal { value: value.into(), kind }
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }

    pub fn lang_tag(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Lang(tag) => Some(tag),
            _ => None,
        }
    }

    pub fn datatype(&self) -> Option<&Iri> {
        match &self.kind {
            LiteralKind::Typed(dt) => Some(dt),
            _ => None,
        }
    }

    pub(crate) fn map_datatype(self, f: impl FnOnce(Iri) -> Iri) -> Self {
        match self.kind {
            LiteralKind::Typed(dt) => Literal::typed(self.value, f(dt)),
            kind => Literal { value: self.value, kind },
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        f.write_str(&escape_literal(&self.value))?;
        f.write_str("\"")?;
        match &self.kind {
            LiteralKind::Plain => Ok(()),
            LiteralKind::Lang(tag) => write!(f, "@{tag}"),
            LiteralKind::Typed(dt) => write!(f, "^^{dt}"),
        }
    }
}

/// Canonical N-Quads string escaping: exactly `\`, `"`, LF, CR and TAB.
pub fn escape_literal(value: &str) -> std::borrow::Cow<'_, str> {
    if !value.contains(['\\', '"', '\n', '\r', '\t']) {
        return std::borrow::Cow::Borrowed(value);
    }
    let mut out = String::with_capacity(value.len() + 8);
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    std::borrow::Cow::Owned(out)
}

/// The object position of a quad. Blank nodes are deliberately not representable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// The IRI string or the literal's lexical value.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => lit.value(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

fn cmp_rendered_iri(a: &Iri, b: &Iri) -> Ordering {
    // `<a>` vs `<b>` differs from `a` vs `b` when one is a prefix of the other,
    // because `>` takes part in the comparison.
    let ra = a.0.bytes().chain(std::iter::once(b'>'));
    let rb = b.0.bytes().chain(std::iter::once(b'>'));
    ra.cmp(rb)
}

/// Code-point order of the canonical N-Quads rendering.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => cmp_rendered_iri(a, b),
            // `"` < `<`
            (Term::Literal(_), Term::Iri(_)) => Ordering::Less,
            (Term::Iri(_), Term::Literal(_)) => Ordering::Greater,
            (Term::Literal(a), Term::Literal(b)) => a.to_string().cmp(&b.to_string()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One RDF statement inside a named graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quad {
    pub graph: Iri,
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Quad {
    pub fn new(graph: Iri, subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Quad { graph, subject, predicate, object: object.into() }
    }

    /// The canonical N-Quads line, without the trailing newline.
    pub fn to_nquads_line(&self) -> String {
        format!("{} {} {} {} .", self.subject, self.predicate, self.object, self.graph)
    }

    /// Applies `f` to every IRI of the quad, including literal datatypes.
    pub fn map_iris(self, mut f: impl FnMut(Iri) -> Iri) -> Quad {
        let object = match self.object {
            Term::Iri(iri) => Term::Iri(f(iri)),
            Term::Literal(lit) => Term::Literal(lit.map_datatype(&mut f)),
        };
        Quad {
            graph: f(self.graph),
            subject: f(self.subject),
            predicate: f(self.predicate),
            object,
        }
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} .", self.subject, self.predicate, self.object, self.graph)
    }
}

/// Canonical order: (graph, subject, predicate, object), each position compared
/// by the code points of its N-Quads rendering.
impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_rendered_iri(&self.graph, &other.graph)
            .then_with(|| cmp_rendered_iri(&self.subject, &other.subject))
            .then_with(|| cmp_rendered_iri(&self.predicate, &other.predicate))
            .then_with(|| self.object.cmp(&other.object))
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn rejects_bad_iris() {
        assert_eq!(Iri::new(""), Err(TermError::EmptyIri));
        assert!(matches!(Iri::new("foo/bar"), Err(TermError::RelativeIri(_))));
        assert!(matches!(Iri::new("1http://x"), Err(TermError::RelativeIri(_))));
        assert!(matches!(Iri::new("http://x y"), Err(TermError::ForbiddenIriChar { ch: ' ', .. })));
        assert!(matches!(Iri::new("http://x>"), Err(TermError::ForbiddenIriChar { .. })));
        assert!(Iri::new("urn:trusty:self#head").is_ok());
    }

    #[test]
    fn xsd_string_collapses_to_plain() {
        let lit = Literal::typed("x", iri(vocab::XSD_STRING));
        assert_eq!(lit, Literal::plain("x"));
        assert_eq!(lit.to_string(), "\"x\"");
    }

    #[test]
    fn lang_tag_validation() {
        assert!(Literal::lang("x", "en-GB").is_ok());
        assert!(Literal::lang("x", "en--GB").is_err());
        assert!(Literal::lang("x", "").is_err());
        assert!(Literal::lang("x", "1en").is_err());
    }

    #[test]
    fn escaping_is_exactly_five_characters() {
        let lit = Literal::plain("a\"b\\c\nd\re\tf\u{8}g\u{e9}");
        assert_eq!(lit.to_string(), "\"a\\\"b\\\\c\\nd\\re\\tf\u{8}g\u{e9}\"");
    }

    #[test]
    fn rendered_iri_order_differs_from_string_order() {
        // "<a!>" < "<a>" because '!' < '>'
        let a = Term::Iri(iri("http://x/a"));
        let a_bang = Term::Iri(iri("http://x/a!"));
        assert_eq!(a_bang.cmp(&a), Ordering::Less);
        assert!("http://x/a" < "http://x/a!");
    }

    #[test]
    fn literals_sort_before_iris() {
        let lit = Term::Literal(Literal::plain("zzz"));
        let i = Term::Iri(iri("http://a"));
        assert!(lit < i);
    }

    #[test]
    fn lang_tagged_objects_order_by_rendering() {
        let en = Term::Literal(Literal::lang("chat", "en").unwrap());
        let fr = Term::Literal(Literal::lang("chat", "fr").unwrap());
        let plain = Term::Literal(Literal::plain("chat"));
        // "\"chat\"" < "\"chat\"@en" < "\"chat\"@fr"
        let mut v = vec![fr.clone(), plain.clone(), en.clone()];
        v.sort();
        assert_eq!(v, vec![plain, en, fr]);
    }
}
