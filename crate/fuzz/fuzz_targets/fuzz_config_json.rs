#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // parsing, validation, and hashing must never panic on any input
    if let Ok(cfg) = edgeworth::config::ExperimentConfig::from_json_str(text) {
        let _ = cfg.resolve();
        let _ = cfg.hash();
    }
});
