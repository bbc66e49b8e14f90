//! Catalog parsing must never panic on arbitrary input, and every catalog it
//! accepts must round-trip through the canonical serialization.

#![no_main]

use bellplan::catalog::Catalog;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(catalog) = Catalog::from_json_str(text) {
        let canonical = Catalog::to_json_string(&catalog);
        let reparsed = Catalog::from_json_str(&canonical)
            .expect("canonical serialization of a valid catalog must reparse");
        assert_eq!(catalog, reparsed, "round trip must preserve the catalog");
        assert_eq!(
            canonical,
            reparsed.to_json_string(),
            "second serialization must be byte-identical"
        );
    }
});
