//! Models shared by the integration tests.
#![allow(dead_code)]

use m5x::rng::{stream, StreamRng};
use m5x::{Copula, M5Model, SignatureArray};
use rand::Rng;

/// d = 2, two patterns, lags 0..=1; `theta_1 = 0.7`, `theta_2 = 0.8`.
pub fn example_signature() -> SignatureArray {
    SignatureArray::from_entries(
        2,
        2,
        0,
        1,
        &[
            (0, 0, 0, 0.5),
            (0, 1, 0, 0.3),
            (1, 0, 0, 0.2),
            (0, 0, 1, 0.4),
            (0, 1, 1, 0.1),
            (1, 0, 1, 0.1),
            (1, 1, 1, 0.4),
        ],
    )
    .unwrap()
}

pub fn example_model(c: Copula) -> M5Model {
    M5Model::new(example_signature(), c).unwrap()
}

/// Both components load on the same cells with the same weights.
pub fn identical_columns() -> SignatureArray {
    SignatureArray::from_entries(
        2,
        2,
        0,
        1,
        &[
            (0, 0, 0, 0.5),
            (0, 1, 0, 0.2),
            (1, 1, 0, 0.3),
            (0, 0, 1, 0.5),
            (0, 1, 1, 0.2),
            (1, 1, 1, 0.3),
        ],
    )
    .unwrap()
}

/// Component 1 uses pattern 1 only and component 2 pattern 2 only.
pub fn disjoint_support() -> SignatureArray {
    SignatureArray::from_entries(
        2,
        2,
        0,
        1,
        &[
            (0, 0, 0, 0.6),
            (0, 1, 0, 0.4),
            (1, 0, 1, 0.25),
            (1, 1, 1, 0.75),
        ],
    )
    .unwrap()
}

/// A normalized array with `d` in {2, 3}, at most four patterns and a lag
/// window of at most five, with roughly 40% zero cells.
pub fn random_signature(rng: &mut impl Rng) -> SignatureArray {
    let d = rng.random_range(2..=3usize);
    let patterns = rng.random_range(1..=4usize);
    let window = rng.random_range(1..=5i64);
    let k_min = rng.random_range(-2..=2i64);
    let k_max = k_min + window - 1;
    let mut sig = SignatureArray::zeros(d, patterns, k_min, k_max).unwrap();
    for l in 0..patterns {
        for k in k_min..=k_max {
            for j in 0..d {
                if rng.random_bool(0.6) {
                    sig.set(l, k, j, rng.random_range(0.05..1.0)).unwrap();
                }
            }
        }
    }
    for l in 0..patterns {
        if (0..d).all(|j| sig.pattern_max(l, j) == 0.0) {
            let (k, j) = (rng.random_range(k_min..=k_max), rng.random_range(0..d));
            sig.set(l, k, j, rng.random_range(0.05..1.0)).unwrap();
        }
    }
    for j in 0..d {
        if sig.column_sum(j) == 0.0 {
            let (l, k) = (
                rng.random_range(0..patterns),
                rng.random_range(k_min..=k_max),
            );
            sig.set(l, k, j, rng.random_range(0.05..1.0)).unwrap();
        }
    }
    sig.normalize().unwrap().validate().unwrap()
}

/// A positive `tau` in `[0.1, 5]^d`.
pub fn random_tau(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.1..5.0)).collect()
}

/// The fixed set of 25 random signatures used across the algebraic checks.
pub fn random_signatures(seed: u64) -> Vec<SignatureArray> {
    let mut rng: StreamRng = stream(seed, 0);
    (0..25).map(|_| random_signature(&mut rng)).collect()
}

/// Each signature paired with an independence, a comonotone and a logistic
/// (alpha = 1.8) copula.
pub fn random_models(seed: u64) -> Vec<M5Model> {
    random_signatures(seed)
        .into_iter()
        .flat_map(|sig| {
            let d = sig.dim();
            [
                Copula::independence(d),
                Copula::comonotone(d),
                Copula::logistic(d, 1.8).unwrap(),
            ]
            .into_iter()
            .map(move |c| M5Model::new(sig.clone(), c).unwrap())
        })
        .collect()
}
