//! Fixed IRIs shared by the nanopublication, versioning and index code.

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

pub const NP_NANOPUBLICATION: &str = "http://www.nanopub.org/nschema#Nanopublication";
pub const NP_HAS_ASSERTION: &str = "http://www.nanopub.org/nschema#hasAssertion";
pub const NP_HAS_PROVENANCE: &str = "http://www.nanopub.org/nschema#hasProvenance";
pub const NP_HAS_PUBLICATION_INFO: &str = "http://www.nanopub.org/nschema#hasPublicationInfo";

pub const NPX_SUPERSEDES: &str = "http://purl.org/nanopub/x/supersedes";
pub const NPX_NANOPUB_INDEX: &str = "http://purl.org/nanopub/x/NanopubIndex";
pub const NPX_INCLUDES_ELEMENT: &str = "http://purl.org/nanopub/x/includesElement";
pub const NPX_INCLUDES_SUBINDEX: &str = "http://purl.org/nanopub/x/includesSubindex";
pub const NPX_APPENDS_INDEX: &str = "http://purl.org/nanopub/x/appendsIndex";

pub const DCT_CREATED: &str = "http://purl.org/dc/terms/created";
pub const DCT_TITLE: &str = "http://purl.org/dc/terms/title";
pub const DCT_DESCRIPTION: &str = "http://purl.org/dc/terms/description";

pub const PROV_WAS_ATTRIBUTED_TO: &str = "http://www.w3.org/ns/prov#wasAttributedTo";

/// Stand-in for a nanopublication's own URI while hashing.
pub const TRUSTY_SELF: &str = "urn:trusty:self";

/// Stand-in for every nanopublication's own URI when decontextualizing.
pub const DATASET_PLACEHOLDER: &str = "urn:npop:dataset";

/// Attribution used for generated index nanopublications when no creator is given.
pub const ANONYMOUS_CREATOR: &str = "urn:npop:anonymous";
