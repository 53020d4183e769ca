#![no_main]

use libfuzzer_sys::fuzz_target;
use npop_core::rdf::{canonical_sort, parse, parse_str, serialize_to_string, Format};

fuzz_target!(|data: &[u8]| {
    let quads: Result<Vec<_>, _> = parse(data, Format::NQuads).collect();
    if let Ok(quads) = quads {
        // Whatever parses must survive a write/read cycle unchanged.
        let text = serialize_to_string(quads.iter(), Format::NQuads);
        let back = parse_str(&text, Format::NQuads).expect("serializer output parses");
        assert_eq!(canonical_sort(back), canonical_sort(quads));
    }
});
