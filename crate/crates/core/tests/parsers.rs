//! Replays the fuzz corpus and seeded mutations of it through every parser,
//! checking the same properties as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qflow::io::{import_trajectory_json, trajectory_json, ConfigFile, ConfigFormat};
use qflow::measure::{Grid, TargetMeasure};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.sort();
    out
}

/// Byte flips, deletions and duplications of ASCII punctuation and digits.
fn mutants(seed: &[u8], rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<u8>> {
    const ALPHABET: &[u8] = b"0123456789-.,:[]{}\"=e \n";
    (0..count)
        .map(|_| {
            let mut m = seed.to_vec();
            for _ in 0..rng.random_range(1..4usize) {
                if m.is_empty() {
                    break;
                }
                let i = rng.random_range(0..m.len());
                match rng.random_range(0..3u8) {
                    0 => m[i] = ALPHABET[rng.random_range(0..ALPHABET.len())],
                    1 => {
                        m.remove(i);
                    }
                    _ => {
                        let b = m[i];
                        m.insert(i, b);
                    }
                }
            }
            m
        })
        .collect()
}

fn inputs(target: &str, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = seeds(target);
    let mut all = base.clone();
    for s in &base {
        all.extend(mutants(s, &mut rng, 300));
    }
    all
}

fn check_config(data: &[u8], format: ConfigFormat) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = ConfigFile::parse(text, format) {
        if file.grid.is_some_and(|m| m > 4096) {
            return;
        }
        if let Ok(cfg) = file.resolve() {
            assert!(cfg.validate().is_ok());
        }
    }
}

#[test]
fn config_toml_inputs() {
    let all = inputs("config_toml", 1);
    assert!(ConfigFile::parse(std::str::from_utf8(&all[0]).unwrap(), ConfigFormat::Toml).is_ok());
    for d in &all {
        check_config(d, ConfigFormat::Toml);
    }
}

#[test]
fn config_json_inputs() {
    for d in inputs("config_json", 2) {
        check_config(&d, ConfigFormat::Json);
    }
}

#[test]
fn trajectory_json_inputs() {
    let mut accepted = 0;
    for d in inputs("trajectory_json", 3) {
        let Ok(text) = std::str::from_utf8(&d) else {
            continue;
        };
        if let Ok(doc) = import_trajectory_json(text) {
            accepted += 1;
            let again = trajectory_json(&doc.trajectory, doc.config.as_ref()).unwrap();
            let back = import_trajectory_json(&again).unwrap();
            assert_eq!(back.trajectory.times, doc.trajectory.times);
        }
    }
    assert!(accepted > 0);
}

#[test]
fn measure_spec_inputs() {
    let grid = Grid::new(16).unwrap();
    let mut accepted = 0;
    for d in inputs("measure_spec", 4) {
        let Ok(target) = serde_json::from_slice::<TargetMeasure>(&d) else {
            continue;
        };
        accepted += 1;
        let q = target.sample(&grid);
        assert!(q.is_monotone(), "{}", String::from_utf8_lossy(&d));
        for x in [-1e3, -1.0, 0.0, 0.5, 1.0, 1e3] {
            let (lo, hi) = (target.cdf_minus(x), target.cdf_plus(x));
            assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0, "{}", String::from_utf8_lossy(&d));
        }
    }
    assert!(accepted >= 5);
}

#[test]
fn extreme_measure_specs() {
    let grid = Grid::new(16).unwrap();
    for text in [
        r#"{"kind":"uniform","a":-1e308,"b":1e308}"#,
        r#"{"kind":"dirac","at":1e308}"#,
        r#"{"kind":"truncated_gaussian","mean":0,"stdev":1e-300,"cut_lo":1e-300,"cut_hi":1}"#,
        r#"{"kind":"truncated_gaussian","mean":1e308,"stdev":1e308,"cut_lo":0.1,"cut_hi":0.9}"#,
        r#"{"kind":"empirical","atoms":[1e308,-1e308],"weights":[1e-300,1]}"#,
        r#"{"kind":"grid_sampled","values":[-1e308,1e308]}"#,
    ] {
        let Ok(target) = serde_json::from_str::<TargetMeasure>(text) else {
            continue;
        };
        assert!(target.sample(&grid).is_monotone(), "{text}");
        for x in [-1e3, 0.0, 1e3] {
            let (lo, hi) = (target.cdf_minus(x), target.cdf_plus(x));
            assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0, "{text}");
        }
    }
}
