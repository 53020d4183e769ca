use std::time::Duration;

use npop_core::index::{build_index, IndexMetadata};
use npop_core::nanopub::{Nanopub, NanopubBuilder};
use npop_core::net::{Client, Fault, MockRegistry, NetError, ServerList};
use npop_core::rdf::{serialize, Format, Iri, Literal};
use npop_core::trusty::{make_trusty, TrustyUri};

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn base() -> Iri {
    iri("http://purl.org/np/")
}

fn element(k: usize) -> Nanopub {
    let mut b = NanopubBuilder::new(base());
    let a = b.graphs().assertion.clone();
    b.assertion(iri(&format!("http://ex/gene/{k}")), iri("http://ex/assoc"), iri("http://ex/disease/1"))
        .provenance(a, iri("http://ex/derivedFrom"), iri("http://ex/pubmed/1"))
        .pubinfo(base(), iri("http://ex/note"), Literal::plain(format!("element {k}")));
    make_trusty(&b.build(), &base()).unwrap()
}

fn registry(nps: &[Nanopub]) -> (tempfile::TempDir, MockRegistry) {
    let dir = tempfile::tempdir().unwrap();
    let reg = MockRegistry::start(dir.path()).unwrap();
    for np in nps {
        reg.seed(np).unwrap();
    }
    (dir, reg)
}

fn client(regs: &[&MockRegistry]) -> Client {
    Client::new(ServerList::new(regs.iter().map(|r| r.base_url())).unwrap()).unwrap()
}

fn trusty(np: &Nanopub) -> TrustyUri {
    TrustyUri::from_iri(np.uri()).unwrap()
}

#[test]
fn get_returns_seeded_bytes() {
    let np = element(0);
    let (_d, reg) = registry(std::slice::from_ref(&np));
    let url = format!("{}{}", reg.base_url(), trusty(&np).code());
    let body = reqwest::blocking::get(url).unwrap().bytes().unwrap();
    assert_eq!(body.as_ref(), serialize(np.iter(), Format::TriG).as_slice());
}

#[test]
fn fallback_through_faulty_servers() {
    let np = element(1);
    let (_d1, missing) = registry(&[]);
    let (_d2, corrupt) = registry(std::slice::from_ref(&np));
    corrupt.add_fault(Fault::Corrupt);
    let (_d3, healthy) = registry(std::slice::from_ref(&np));

    let found = client(&[&missing, &corrupt, &healthy]).fetch(&trusty(&np)).unwrap();
    assert_eq!(found.server, healthy.base_url());
    assert_eq!(found.attempts.len(), 3);
    assert_eq!(found.attempts[0].failure.as_deref(), Some("HTTP 404"));
    assert!(found.attempts[1].failure.as_deref().unwrap().contains("verif"), "{:?}", found.attempts[1]);
    assert_eq!(found.nanopub, np);
}

#[test]
fn first_healthy_server_wins() {
    let np = element(2);
    let (_d1, a) = registry(std::slice::from_ref(&np));
    let (_d2, b) = registry(std::slice::from_ref(&np));
    let found = client(&[&a, &b]).fetch(&trusty(&np)).unwrap();
    assert_eq!(found.attempts.len(), 1);
    assert_eq!(b.get_count(), 0);
}

#[test]
fn all_corrupt_is_exhausted() {
    let np = element(3);
    let (_d1, a) = registry(std::slice::from_ref(&np));
    let (_d2, b) = registry(std::slice::from_ref(&np));
    a.add_code_fault(trusty(&np).code(), Fault::Corrupt);
    b.add_fault(Fault::Corrupt);
    match client(&[&a, &b]).fetch(&trusty(&np)) {
        Err(NetError::Exhausted { attempts, .. }) => assert_eq!(attempts.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn delayed_server_times_out_and_falls_back() {
    let np = element(4);
    let (_d1, slow) = registry(std::slice::from_ref(&np));
    slow.add_fault(Fault::Delay(Duration::from_secs(3)));
    let (_d2, fast) = registry(std::slice::from_ref(&np));
    let c = client(&[&slow, &fast]).with_timeout(Duration::from_millis(500)).unwrap();
    let found = c.fetch(&trusty(&np)).unwrap();
    assert_eq!(found.server, fast.base_url());
}

#[test]
fn publish_then_fetch_round_trip() {
    let np = element(5);
    let (_d1, rejecting) = registry(&[]);
    rejecting.add_fault(Fault::RejectPosts);
    let (_d2, accepting) = registry(&[]);
    let c = client(&[&rejecting, &accepting]);
    let ack = c.publish(&np).unwrap();
    assert_eq!(ack.server, accepting.base_url());
    assert_eq!(ack.status, 201);
    assert_eq!(ack.attempts.len(), 2);
    assert_eq!(c.fetch(&trusty(&np)).unwrap().nanopub, np);
}

#[test]
fn publish_refuses_unverified_without_network() {
    let (_d, reg) = registry(&[]);
    let mut b = NanopubBuilder::new(iri("http://example.org/np/plain"));
    b.assertion(iri("http://ex/s"), iri("http://ex/p"), iri("http://ex/o"));
    let err = client(&[&reg]).publish(&b.build()).unwrap_err();
    assert!(matches!(err, NetError::Unverified { .. }));
    assert_eq!(reg.post_count(), 0);
}

#[test]
fn mock_rejects_unverifiable_post() {
    let (_d, reg) = registry(&[]);
    let np = element(6);
    let mut body = serialize(np.iter(), Format::TriG);
    let pos = body.windows(9).position(|w| w == b"element 6").unwrap();
    body[pos + 8] = b'7';
    let resp = reqwest::blocking::Client::new()
        .post(reg.base_url())
        .header("Content-Type", "application/trig")
        .body(body)
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 400);
}

#[test]
fn fetch_content_of_chained_index() {
    let elements: Vec<Nanopub> = (0..2500).map(element).collect();
    let uris: Vec<TrustyUri> = elements.iter().map(trusty).collect();
    let meta = IndexMetadata { title: "sample".into(), ..Default::default() };
    let chain = build_index(&uris, &[], &meta, None, &base()).unwrap();
    let (_d, reg) = registry(&elements);
    for idx in &chain {
        reg.seed(idx).unwrap();
    }
    let c = client(&[&reg]);
    let top = trusty(chain.last().unwrap());
    let got = c.fetch_content(&top).unwrap();
    assert_eq!(got.len(), 2503);
    let again = c.clone().with_parallelism(1).fetch_content(&top).unwrap();
    let a: std::collections::HashSet<_> = got.iter().map(|n| n.uri().clone()).collect();
    let b: std::collections::HashSet<_> = again.iter().map(|n| n.uri().clone()).collect();
    assert_eq!(a, b);
}

#[test]
fn fetch_content_rejects_plain_nanopub_and_missing_members() {
    let np = element(7);
    let (_d, reg) = registry(std::slice::from_ref(&np));
    let err = client(&[&reg]).fetch_content(&trusty(&np)).unwrap_err();
    assert!(err.cause.contains("not an index"), "{err}");

    let missing = element(8);
    let meta = IndexMetadata { title: "partial".into(), ..Default::default() };
    let chain = build_index(&[trusty(&np), trusty(&missing)], &[], &meta, None, &base()).unwrap();
    reg.seed(&chain[0]).unwrap();
    let err = client(&[&reg]).fetch_content(&trusty(&chain[0])).unwrap_err();
    assert_eq!(err.progress.elements_expected, 2);
    assert_eq!(err.progress.elements_fetched, 1);
    assert_eq!(err.progress.failures.len(), 1);
    assert!(err.progress.failures[0].0.contains(trusty(&missing).code().as_str()));
}
