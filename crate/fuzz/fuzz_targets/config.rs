#![no_main]

use convineq_cli::config::config_tokens;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(tokens) = config_tokens(text, "verify") {
            // every key yields a flag, never a bare value in flag position
            assert!(tokens.first().is_none_or(|t| t.starts_with("--")));
        }
    }
});
