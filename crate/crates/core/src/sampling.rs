//! Seeding, uniform draws and deterministic point sets on `[-1,1]^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator keyed by `(seed, stream)`. Streams are independent, so results do not depend
/// on the order in which parallel work items are scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combines several integers into one seed (splitmix64 finalizer chain).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = splitmix(h);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Point drawn uniformly from `[-1,1]^d`.
pub fn uniform_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// `n` Halton points mapped to `[-1,1]^d`, starting at sequence position `offset + 1`.
pub fn halton_points(n: usize, d: usize, offset: u64) -> Vec<Vec<f64>> {
    let primes = first_primes(d);
    (0..n as u64)
        .map(|i| {
            primes
                .iter()
                .map(|&b| 2.0 * radical_inverse(offset + i + 1, b) - 1.0)
                .collect()
        })
        .collect()
}

/// The `2^min(d,10)` sign corners; coordinates past the tenth are fixed at `+1`.
pub fn sign_corners(d: usize) -> Vec<Vec<f64>> {
    let free = d.min(10);
    (0..1u32 << free)
        .map(|mask| {
            (0..d)
                .map(|k| if k < free && mask & (1 << k) != 0 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = uniform_point(&mut stream_rng(7, 3), 5);
        let b: Vec<f64> = uniform_point(&mut stream_rng(7, 3), 5);
        let c: Vec<f64> = uniform_point(&mut stream_rng(7, 4), 5);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn halton_first_points() {
        let pts = halton_points(3, 2, 0);
        assert_eq!(pts[0], vec![0.0, 2.0 / 3.0 - 1.0]);
        assert_eq!(pts[1], vec![-0.5, 4.0 / 3.0 - 1.0]);
    }

    #[test]
    fn corners_cover_signs() {
        let c = sign_corners(3);
        assert_eq!(c.len(), 8);
        assert!(c.contains(&vec![-1.0, 1.0, -1.0]));
        assert_eq!(sign_corners(12).len(), 1024);
    }
}
