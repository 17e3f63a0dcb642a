//! Gaussian-blob stand-in for the digit corpus.

use super::Corpus;
use crate::rng::{RngStream, StreamKey, DATA_MACHINE};

/// Mean offset scale per coordinate; blobs overlap heavily so even-vs-odd is
/// not linearly separable.
const CENTER_SCALE: f64 = 0.12;

/// Ten classes of `per_digit` points in `dim` dimensions. Class c is centered
/// at a random point with coordinates N(0, 0.12^2) and has unit isotropic noise.
pub fn synth_corpus(seed: u64, per_digit: usize, dim: usize) -> Corpus {
    let mut centers = vec![0.0; 10 * dim];
    let mut rc = RngStream::new(seed, StreamKey::new(1, DATA_MACHINE, 0, 0));
    for v in centers.iter_mut() {
        *v = CENTER_SCALE * rc.next_gaussian();
    }
    let mut features = Vec::with_capacity(10 * per_digit * dim);
    let mut labels = Vec::with_capacity(10 * per_digit);
    let mut rs = RngStream::new(seed, StreamKey::new(1, DATA_MACHINE, 1, 0));
    // interleave digits so the corpus looks like a shuffled source file
    for _ in 0..per_digit {
        for c in 0..10 {
            for j in 0..dim {
                features.push(centers[c * dim + j] + rs.next_gaussian());
            }
            labels.push(c as u8);
        }
    }
    Corpus { dim, features, labels }
}
