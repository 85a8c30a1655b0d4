#![no_main]

use libfuzzer_sys::fuzz_target;
use qflow::measure::{Grid, TargetMeasure};

fuzz_target!(|data: &[u8]| {
    let Ok(target) = serde_json::from_slice::<TargetMeasure>(data) else {
        return;
    };
    let grid = Grid::new(16).unwrap();
    let q = target.sample(&grid);
    assert!(q.is_monotone());
    for x in [-1e3, -1.0, 0.0, 0.5, 1.0, 1e3] {
        let (lo, hi) = (target.cdf_minus(x), target.cdf_plus(x));
        assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0);
    }
});
