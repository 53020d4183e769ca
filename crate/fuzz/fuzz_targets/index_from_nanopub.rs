#![no_main]

use libfuzzer_sys::fuzz_target;
use npop_core::index::IndexNanopub;
use npop_core::nanopub::assemble;
use npop_core::rdf::{parse, Format};

fuzz_target!(|data: &[u8]| {
    for np in assemble(parse(data, Format::TriG)).flatten() {
        if let Ok(idx) = IndexNanopub::from_nanopub(np) {
            assert!(idx.entry_count() <= npop_core::index::MAX_ENTRIES);
        }
    }
});
