//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use npfk::dataset::render_record;
use npfk::{Dataset, LabeledRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Motion-capture-like raw series: a per-series baseline, one smooth bump
/// (or dip) whose shape depends on a hidden type, and a little noise.
pub fn synthetic_dataset(n: usize, len: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let kind = i % 4;
            let base = rng.random_range(0.5..3.0);
            let amp = [1.2, 0.6, -0.8, 2.0][kind] * rng.random_range(0.8..1.2);
            let center = [60.0, 75.0, 90.0, 70.0][kind] + rng.random_range(-8.0..8.0);
            let width = [10.0, 18.0, 12.0, 25.0][kind] * rng.random_range(0.8..1.2);
            let values = (0..len)
                .map(|t| {
                    let x = (t as f64 - center) / width;
                    base + amp * (-x * x).exp() + 0.01 * rng.random_range(-1.0..1.0)
                })
                .collect();
            LabeledRecord { label: 2, values }
        })
        .collect();
    Dataset::new(records).unwrap()
}

/// Writes `dataset` in label-first text form, with a decoy record of another
/// class interleaved after every record.
pub fn write_ucr(dataset: &Dataset, path: &Path) {
    let mut text = String::new();
    for r in &dataset.records {
        text.push_str(&render_record(r));
        text.push('\n');
        let decoy = LabeledRecord {
            label: 1,
            values: vec![0.0; r.values.len()],
        };
        text.push_str(&render_record(&decoy));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

/// Directory holding the real UCR files, if any.
pub fn data_dir() -> PathBuf {
    std::env::var_os("NPFK_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// First existing `<stem>.txt` / `<stem>.tsv` under [`data_dir`].
pub fn find_dataset(stem: &str) -> Option<PathBuf> {
    let dir = data_dir();
    ["txt", "tsv"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}
