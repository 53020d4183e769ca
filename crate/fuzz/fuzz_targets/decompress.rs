#![no_main]

use std::io::Read;

use libfuzzer_sys::fuzz_target;
use npop_core::rdf::maybe_decompress;

fuzz_target!(|data: &[u8]| {
    if let Ok(mut r) = maybe_decompress(data) {
        let mut sink = Vec::new();
        let _ = r.by_ref().take(1 << 20).read_to_end(&mut sink);
    }
});
