#![no_main]

use libfuzzer_sys::fuzz_target;
use npop_core::trusty::TrustyUri;

fuzz_target!(|s: &str| {
    if let Ok(uri) = TrustyUri::parse(s) {
        assert_eq!(uri.to_string(), s);
        assert_eq!(uri.code().as_str().len(), 45);
    }
});
