//! Replays the checked-in fuzz seeds through the same round-trip properties the
//! fuzz targets assert, so the seeds stay meaningful on stable toolchains.

use std::path::PathBuf;

use convineq::grid::GridFunction;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn csv_seeds_round_trip() {
    let mut accepted = 0;
    for (path, data) in seeds("grid_csv") {
        if let Ok(g) = GridFunction::read_csv(data.as_slice()) {
            let mut out = Vec::new();
            g.write_csv(&mut out).unwrap();
            assert_eq!(
                GridFunction::read_csv(out.as_slice()).unwrap(),
                g,
                "{}",
                path.display()
            );
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn json_seeds_round_trip() {
    let mut accepted = 0;
    for (path, data) in seeds("grid_json") {
        if let Ok(g) = GridFunction::from_json_bytes(&data) {
            assert_eq!(
                GridFunction::from_json(&g.to_json().unwrap()).unwrap(),
                g,
                "{}",
                path.display()
            );
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}
