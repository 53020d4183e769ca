use std::fmt;
use std::io::Cursor;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use reqwest::blocking::Client as Http;
use reqwest::header::{ACCEPT, CONTENT_TYPE};

use crate::index::{resolve_index, FetchError, NanopubSource};
use crate::nanopub::{assemble, Nanopub};
use crate::rdf::{parse, serialize, Format, Iri};
use crate::trusty::{self, TrustyUri, Verification};

pub const DEFAULT_PARALLELISM: usize = 8;

const TRIG: &str = "application/trig";

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("invalid server list: {0}")]
    ServerList(String),
    #[error("all servers failed for <{uri}>:\n{}", render_attempts(.attempts))]
    Exhausted { uri: String, attempts: Vec<Attempt> },
    #[error("refusing to publish <{uri}>: {reason}")]
    Unverified { uri: String, reason: String },
    #[error("every server rejected <{uri}>:\n{}", render_attempts(.attempts))]
    Rejected { uri: String, attempts: Vec<Attempt> },
    #[error("http client setup failed: {0}")]
    Setup(String),
}

fn render_attempts(attempts: &[Attempt]) -> String {
    attempts.iter().map(|a| format!("  {a}")).collect::<Vec<_>>().join("\n")
}

/// Ordered server base URLs, each ending in `/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerList {
    servers: Vec<String>,
}

impl ServerList {
    pub fn new<S: Into<String>>(servers: impl IntoIterator<Item = S>) -> Result<Self, NetError> {
        let servers: Vec<String> = servers.into_iter().map(Into::into).collect();
        if servers.is_empty() {
            return Err(NetError::ServerList("no servers given".into()));
        }
        for s in &servers {
            if !(s.starts_with("http://") || s.starts_with("https://")) {
                return Err(NetError::ServerList(format!("{s}: not an http(s) URL")));
            }
            if !s.ends_with('/') {
                return Err(NetError::ServerList(format!("{s}: base URL must end with '/'")));
            }
        }
        Ok(ServerList { servers })
    }

    /// One URL per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, NetError> {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn from_file(path: &Path) -> Result<Self, NetError> {
        let text = std::fs::read_to_string(path).map_err(|e| NetError::ServerList(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.servers.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.servers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.servers.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attempt {
    pub server: String,
    /// `None` on success.
    pub failure: Option<String>,
}

impl fmt::Display for Attempt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{}: ok", self.server),
            Some(why) => write!(f, "{}: {why}", self.server),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FetchResult {
    pub nanopub: Nanopub,
    pub server: String,
    pub attempts: Vec<Attempt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ack {
    pub server: String,
    pub status: u16,
    pub attempts: Vec<Attempt>,
}

/// How far a content download got before failing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Progress {
    pub indexes: usize,
    pub elements_expected: usize,
    pub elements_fetched: usize,
    /// (URI, reason)
    pub failures: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
#[error("{cause} ({} indexes, {}/{} elements retrieved)", .progress.indexes, .progress.elements_fetched, .progress.elements_expected)]
pub struct ContentError {
    pub cause: String,
    pub progress: Progress,
}

#[derive(Debug, Clone)]
pub struct Client {
    http: Http,
    servers: ServerList,
    parallelism: usize,
}

impl Client {
    pub fn new(servers: ServerList) -> Result<Self, NetError> {
        let http = Http::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| NetError::Setup(e.to_string()))?;
        Ok(Client { http, servers, parallelism: DEFAULT_PARALLELISM })
    }

    pub fn with_parallelism(mut self, n: usize) -> Self {
        self.parallelism = n.max(1);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Result<Self, NetError> {
        self.http = Http::builder().timeout(timeout).build().map_err(|e| NetError::Setup(e.to_string()))?;
        Ok(self)
    }

    pub fn servers(&self) -> &ServerList {
        &self.servers
    }

    fn try_server(&self, server: &str, uri: &TrustyUri) -> Result<Nanopub, String> {
        let url = format!("{server}{}", uri.code());
        let resp = self.http.get(&url).header(ACCEPT, TRIG).send().map_err(|e| format!("request failed: {e}"))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {}", status.as_u16()));
        }
        let body = resp.bytes().map_err(|e| format!("reading body: {e}"))?;
        let nps: Vec<Nanopub> = assemble(parse(Cursor::new(body), Format::TriG))
            .collect::<Result<_, _>>()
            .map_err(|e| format!("unparseable response: {e}"))?;
        let [np] = <[Nanopub; 1]>::try_from(nps).map_err(|v| format!("expected one nanopublication, got {}", v.len()))?;
        if np.uri().as_str() != uri.to_string() {
            return Err(format!("served <{}> instead", np.uri().as_str()));
        }
        match trusty::verify(&np) {
            Ok(Verification::Valid) => Ok(np),
            Ok(v) => Err(format!("verification failed: {v}")),
            Err(e) => Err(format!("verification failed: {e}")),
        }
    }

    /// Tries each server once, in order, and returns the first response that verifies.
    pub fn fetch(&self, uri: &TrustyUri) -> Result<FetchResult, NetError> {
        let mut attempts = Vec::new();
        for server in self.servers.iter() {
            match self.try_server(server, uri) {
                Ok(nanopub) => {
                    attempts.push(Attempt { server: server.to_owned(), failure: None });
                    return Ok(FetchResult { nanopub, server: server.to_owned(), attempts });
                }
                Err(why) => {
                    tracing::debug!(%uri, server, %why, "fetch attempt failed");
                    attempts.push(Attempt { server: server.to_owned(), failure: Some(why) });
                }
            }
        }
        Err(NetError::Exhausted { uri: uri.to_string(), attempts })
    }

    /// Fetches many URIs with bounded parallelism; results line up with `uris`.
    pub fn fetch_all(&self, uris: &[TrustyUri]) -> Vec<Result<FetchResult, NetError>> {
        let slots: Vec<Mutex<Option<Result<FetchResult, NetError>>>> = uris.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.parallelism.min(uris.len()).max(1);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= uris.len() {
                        break;
                    }
                    let r = self.fetch(&uris[k]);
                    *slots[k].lock().expect("slot lock") = Some(r);
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every slot filled")).collect()
    }

    /// Retrieves a top index, everything it links to, and all element nanopublications.
    /// Indexes come first in resolution order, then elements.
    pub fn fetch_content(&self, top: &TrustyUri) -> Result<Vec<Nanopub>, ContentError> {
        let resolution = resolve_index(top, self).map_err(|e| ContentError {
            cause: e.to_string(),
            progress: Progress::default(),
        })?;
        let mut progress = Progress {
            indexes: resolution.indexes.len(),
            elements_expected: resolution.set.element_uris.len(),
            ..Progress::default()
        };
        let mut uris = Vec::with_capacity(progress.elements_expected);
        for iri in &resolution.set.element_uris {
            match TrustyUri::from_iri(iri) {
                Ok(u) => uris.push(u),
                Err(e) => progress.failures.push((iri.as_str().to_owned(), e.to_string())),
            }
        }
        let mut out: Vec<Nanopub> = resolution.indexes.into_iter().map(|i| i.into_nanopub()).collect();
        for (uri, r) in uris.iter().zip(self.fetch_all(&uris)) {
            match r {
                Ok(found) => {
                    progress.elements_fetched += 1;
                    out.push(found.nanopub);
                }
                Err(e) => progress.failures.push((uri.to_string(), e.to_string())),
            }
        }
        if let Some((uri, _)) = progress.failures.first() {
            return Err(ContentError {
                cause: format!("could not retrieve <{uri}> and {} more", progress.failures.len() - 1),
                progress,
            });
        }
        Ok(out)
    }

    /// Verifies locally, then posts to servers in order until one accepts.
    pub fn publish(&self, np: &Nanopub) -> Result<Ack, NetError> {
        let uri = np.uri().as_str().to_owned();
        match trusty::verify(np) {
            Ok(Verification::Valid) => {}
            Ok(v) => return Err(NetError::Unverified { uri, reason: v.to_string() }),
            Err(e) => return Err(NetError::Unverified { uri, reason: e.to_string() }),
        }
        let body = serialize(np.iter(), Format::TriG);
        let mut attempts = Vec::new();
        for server in self.servers.iter() {
            let result = self.http.post(server).header(CONTENT_TYPE, TRIG).body(body.clone()).send();
            let failure = match result {
                Ok(resp) if resp.status().is_success() => {
                    attempts.push(Attempt { server: server.to_owned(), failure: None });
                    return Ok(Ack { server: server.to_owned(), status: resp.status().as_u16(), attempts });
                }
                Ok(resp) => format!("HTTP {}", resp.status().as_u16()),
                Err(e) => format!("request failed: {e}"),
            };
            attempts.push(Attempt { server: server.to_owned(), failure: Some(failure) });
        }
        Err(NetError::Rejected { uri, attempts })
    }
}

impl NanopubSource for Client {
    fn fetch(&self, uri: &Iri) -> Result<Nanopub, FetchError> {
        let uri = TrustyUri::from_iri(uri).map_err(|e| FetchError::Failed(e.to_string()))?;
        Client::fetch(self, &uri).map(|r| r.nanopub).map_err(to_fetch_error)
    }

    fn fetch_many(&self, uris: &[Iri]) -> Vec<Result<Nanopub, FetchError>> {
        let parsed: Vec<Result<TrustyUri, FetchError>> =
            uris.iter().map(|u| TrustyUri::from_iri(u).map_err(|e| FetchError::Failed(e.to_string()))).collect();
        let valid: Vec<TrustyUri> = parsed.iter().filter_map(|p| p.as_ref().ok().cloned()).collect();
        let mut fetched = self.fetch_all(&valid).into_iter();
        parsed
            .into_iter()
            .map(|p| p.and_then(|_| fetched.next().expect("one result per valid URI").map(|r| r.nanopub).map_err(to_fetch_error)))
            .collect()
    }
}

/// Every server answering 404 means the nanopublication is missing; anything else is a failure.
fn to_fetch_error(e: NetError) -> FetchError {
    match &e {
        NetError::Exhausted { attempts, .. }
            if attempts.iter().all(|a| a.failure.as_deref() == Some("HTTP 404")) =>
        {
            FetchError::NotFound
        }
        _ => FetchError::Failed(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn server_list_rules() {
        let list = ServerList::parse("# servers\nhttp://a.example/\n\n  https://b.example/np/  \n").unwrap();
        assert_eq!(list.iter().collect::<Vec<_>>(), vec!["http://a.example/", "https://b.example/np/"]);
        assert!(ServerList::parse("# nothing\n").is_err());
        assert!(ServerList::parse("http://a.example").is_err());
        assert!(ServerList::parse("ftp://a.example/").is_err());
    }

    #[test]
    fn unreachable_servers_exhaust() {
        let client = Client::new(ServerList::new(["http://127.0.0.1:9/"]).unwrap())
            .unwrap()
            .with_timeout(Duration::from_secs(2))
            .unwrap();
        let uri = TrustyUri::parse("http://purl.org/np/RAxMyDRaM8RmKGNiEe7dQPRUTuz616iI-N2T-H3MPYmXk").unwrap();
        match client.fetch(&uri) {
            Err(NetError::Exhausted { attempts, .. }) => assert_eq!(attempts.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
