//! Verified retrieval from and publishing to redundant nanopublication servers.

mod client;
mod mock;

pub use client::{Ack, Attempt, Client, ContentError, FetchResult, NetError, Progress, ServerList, DEFAULT_PARALLELISM};
pub use mock::{Fault, MockRegistry};
