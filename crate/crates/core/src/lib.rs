pub mod analytics;
pub mod diff;
pub mod index;
pub mod nanopub;
pub mod net;
pub mod ratio;
pub mod rdf;
pub mod trusty;
pub mod vocab;
