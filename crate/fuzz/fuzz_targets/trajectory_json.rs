#![no_main]

use libfuzzer_sys::fuzz_target;
use qflow::io::{import_trajectory_json, trajectory_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = import_trajectory_json(text) {
        // accepted documents survive a round trip
        let again = trajectory_json(&doc.trajectory, doc.config.as_ref()).unwrap();
        let back = import_trajectory_json(&again).unwrap();
        assert_eq!(back.trajectory.times, doc.trajectory.times);
    }
});
