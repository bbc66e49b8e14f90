//! Argument parsing must reject arbitrary argv vectors gracefully, never by
//! panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("bellplan").chain(text.split_whitespace());
    let _ = bellplan_cli::parse_args(argv);
});
