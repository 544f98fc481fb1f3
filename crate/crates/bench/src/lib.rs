//! Deterministic inputs shared by the benchmarks.

use essop_core::{Binary16Value, LfsrState};

/// `n` binary16 values in [-1, 1) drawn from an LFSR stream.
pub fn lfsr_vector(n: usize, seed: u16) -> Vec<Binary16Value> {
    let mut rng = LfsrState::seed(seed).expect("nonzero seed");
    (0..n)
        .map(|_| Binary16Value::from_f64(rng.next_word() as f64 / 32768.0 - 1.0))
        .collect()
}
