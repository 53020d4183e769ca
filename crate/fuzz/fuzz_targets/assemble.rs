#![no_main]

use libfuzzer_sys::fuzz_target;
use npop_core::nanopub::{assemble, assemble_streaming, validate};
use npop_core::rdf::{parse, Format};
use npop_core::trusty;

fuzz_target!(|data: &[u8]| {
    let whole: Result<Vec<_>, _> = assemble(parse(data, Format::TriG)).collect();
    let streamed: Result<Vec<_>, _> = assemble_streaming(parse(data, Format::TriG)).collect();
    if let (Ok(a), Ok(b)) = (&whole, &streamed) {
        assert_eq!(a, b);
    }
    for np in whole.into_iter().flatten() {
        let _ = validate(&np, true);
        let _ = trusty::verify(&np);
    }
});
