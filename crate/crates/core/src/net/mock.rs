//! A local stand-in for a nanopublication server, with injectable faults.

use std::collections::HashMap;
use std::io::{self, Cursor};
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use tokio::sync::oneshot;

use crate::nanopub::{assemble, Nanopub};
use crate::rdf::{parse, Format};
use crate::trusty::{self, ArtifactCode, TrustyUri};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Answer 404 regardless of content.
    NotFound,
    /// Serve the stored bytes with one character inserted.
    Corrupt,
    /// Wait before answering.
    Delay(Duration),
    /// Answer POSTs with 503.
    RejectPosts,
}

#[derive(Debug, Default)]
struct Faults {
    global: Vec<Fault>,
    per_code: HashMap<String, Vec<Fault>>,
}

impl Faults {
    fn active(&self, code: Option<&str>) -> Vec<Fault> {
        let mut out = self.global.clone();
        if let Some(list) = code.and_then(|c| self.per_code.get(c)) {
            out.extend_from_slice(list);
        }
        out
    }
}

struct Shared {
    dir: PathBuf,
    faults: Mutex<Faults>,
    gets: AtomicU64,
    posts: AtomicU64,
}

/// Running registry serving `<dir>/<artifact code>.trig`. Stops when dropped.
pub struct MockRegistry {
    addr: SocketAddr,
    shared: Arc<Shared>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockRegistry {
    /// Starts on an ephemeral local port.
    pub fn start(dir: impl Into<PathBuf>) -> io::Result<Self> {
        Self::start_on(dir, SocketAddr::from(([127, 0, 0, 1], 0)))
    }

    pub fn start_on(dir: impl Into<PathBuf>, addr: SocketAddr) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            dir,
            faults: Mutex::new(Faults::default()),
            gets: AtomicU64::new(0),
            posts: AtomicU64::new(0),
        });
        let app = Router::new()
            .route("/", post(store))
            .route("/{code}", get(serve))
            .with_state(shared.clone());
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(4)
            .thread_name("mock-registry")
            .enable_all()
            .build()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = match tokio::net::TcpListener::from_std(listener) {
                    Ok(l) => l,
                    Err(e) => {
                        tracing::error!("mock registry: {e}");
                        return;
                    }
                };
                tokio::select! {
                    r = axum::serve(listener, app) => if let Err(e) = r { tracing::error!("mock registry: {e}") },
                    _ = rx => {}
                }
            });
            runtime.shutdown_timeout(Duration::from_secs(1));
        });
        Ok(MockRegistry { addr, shared, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL with trailing slash, ready for a server list.
    pub fn base_url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    pub fn dir(&self) -> &Path {
        &self.shared.dir
    }

    /// Writes a nanopublication to the store under its artifact code.
    pub fn seed(&self, np: &Nanopub) -> io::Result<()> {
        let uri = TrustyUri::from_iri(np.uri()).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        let bytes = crate::rdf::serialize(np.iter(), Format::TriG);
        std::fs::write(self.shared.dir.join(format!("{}.trig", uri.code())), bytes)
    }

    pub fn add_fault(&self, fault: Fault) {
        self.shared.faults.lock().expect("fault lock").global.push(fault);
    }

    pub fn add_code_fault(&self, code: &ArtifactCode, fault: Fault) {
        let mut faults = self.shared.faults.lock().expect("fault lock");
        faults.per_code.entry(code.as_str().to_owned()).or_default().push(fault);
    }

    pub fn clear_faults(&self) {
        *self.shared.faults.lock().expect("fault lock") = Faults::default();
    }

    pub fn get_count(&self) -> u64 {
        self.shared.gets.load(Ordering::Relaxed)
    }

    pub fn post_count(&self) -> u64 {
        self.shared.posts.load(Ordering::Relaxed)
    }

    /// Blocks until the server thread exits.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for MockRegistry {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn is_code(s: &str) -> bool {
    ArtifactCode::parse(s).is_ok()
}

async fn delay(faults: &[Fault]) {
    for f in faults {
        if let Fault::Delay(d) = f {
            tokio::time::sleep(*d).await;
        }
    }
}

fn corrupt(mut body: Vec<u8>) -> Vec<u8> {
    let at = body.iter().position(|&b| b == b'<').map_or(0, |p| p + 1);
    body.insert(at, b'X');
    body
}

async fn serve(State(shared): State<Arc<Shared>>, UrlPath(code): UrlPath<String>) -> Response {
    shared.gets.fetch_add(1, Ordering::Relaxed);
    let faults = shared.faults.lock().expect("fault lock").active(Some(&code));
    delay(&faults).await;
    if !is_code(&code) || faults.contains(&Fault::NotFound) {
        return StatusCode::NOT_FOUND.into_response();
    }
    let body = match tokio::fs::read(shared.dir.join(format!("{code}.trig"))).await {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return StatusCode::NOT_FOUND.into_response(),
        Err(_) => return StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    };
    let body = if faults.contains(&Fault::Corrupt) { corrupt(body) } else { body };
    ([(header::CONTENT_TYPE, "application/trig")], body).into_response()
}

async fn store(State(shared): State<Arc<Shared>>, body: Bytes) -> Response {
    shared.posts.fetch_add(1, Ordering::Relaxed);
    let faults = shared.faults.lock().expect("fault lock").active(None);
    delay(&faults).await;
    if faults.contains(&Fault::RejectPosts) {
        return StatusCode::SERVICE_UNAVAILABLE.into_response();
    }
    let parsed: Result<Vec<Nanopub>, _> = assemble(parse(Cursor::new(body.as_ref()), Format::TriG)).collect();
    let np = match parsed {
        Ok(mut v) if v.len() == 1 => v.remove(0),
        Ok(v) => return (StatusCode::BAD_REQUEST, format!("expected one nanopublication, got {}\n", v.len())).into_response(),
        Err(e) => return (StatusCode::BAD_REQUEST, format!("{e}\n")).into_response(),
    };
    let code = match TrustyUri::from_iri(np.uri()) {
        Ok(u) if trusty::is_valid(&np) => u.code().as_str().to_owned(),
        _ => return (StatusCode::BAD_REQUEST, "nanopublication does not verify\n").into_response(),
    };
    match tokio::fs::write(shared.dir.join(format!("{code}.trig")), &body).await {
        Ok(()) => (StatusCode::CREATED, format!("{}\n", np.uri().as_str())).into_response(),
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_inserts_after_first_bracket() {
        assert_eq!(corrupt(b"<a> <b>".to_vec()), b"<Xa> <b>".to_vec());
        assert_eq!(corrupt(b"abc".to_vec()), b"Xabc".to_vec());
    }

    #[test]
    fn binds_and_shuts_down() {
        let dir = tempfile::tempdir().unwrap();
        let reg = MockRegistry::start(dir.path()).unwrap();
        assert!(reg.base_url().starts_with("http://127.0.0.1:"));
        drop(reg);
    }
}
