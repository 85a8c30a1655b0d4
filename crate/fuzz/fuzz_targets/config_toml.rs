#![no_main]

use libfuzzer_sys::fuzz_target;
use qflow::io::{ConfigFile, ConfigFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = ConfigFile::parse(text, ConfigFormat::Toml) {
        // keep the grid small so resolution stays cheap
        if file.grid.is_some_and(|m| m > 4096) {
            return;
        }
        if let Ok(cfg) = file.resolve() {
            assert!(cfg.validate().is_ok());
        }
    }
});
