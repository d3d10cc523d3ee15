//! Shared fixtures for the benchmark suite.

use morpho_core::contour::Contour;
use morpho_core::ingest::PeriodTable;
use morpho_core::measures::FeatureMatrix;
use morpho_core::synth::{generate_corpus, generate_outline, OutlineSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One clean generated outline at the default scale.
pub fn sample_outline() -> Contour {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    generate_outline(&OutlineSpec { noise_amp: 0.005, ..OutlineSpec::default() }, &mut rng).contour
}

/// A small dated corpus for dataset-level benchmarks.
pub fn sample_corpus(count: usize) -> Vec<morpho_core::synth::SynthInstrument> {
    generate_corpus(count, 0.005, 3, (1620, 1980), &PeriodTable::default())
}

/// Random blobs for classifier benchmarks: `2 * n_per` rows, `p` features.
pub fn blob_data(n_per: usize, p: usize, sep: f64) -> (FeatureMatrix, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * n_per {
        let class = i % 2;
        let center = if class == 0 { 0.0 } else { sep };
        rows.push((0..p).map(|_| center + rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>());
        labels.push(if class == 0 { "a" } else { "b" }.to_string());
    }
    let names: Vec<String> = (0..p).map(|i| format!("f{i}")).collect();
    (FeatureMatrix::from_rows(names, &rows), labels)
}
