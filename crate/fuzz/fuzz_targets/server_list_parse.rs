#![no_main]

use libfuzzer_sys::fuzz_target;
use npop_core::net::ServerList;

fuzz_target!(|s: &str| {
    if let Ok(list) = ServerList::parse(s) {
        assert!(list.len() > 0);
        assert!(list.iter().all(|u| u.ends_with('/')));
    }
});
