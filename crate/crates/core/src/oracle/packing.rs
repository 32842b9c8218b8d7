//! Greedy separated sets inside `D_σ B_p`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{distance, FiniteDiag};
use crate::error::{Error, Result};

const HALTON_BASES: [u64; 3] = [2, 3, 5];

/// Size of a greedily built set of body points with pairwise `ℓ_q` distance `> 2 eps`.
///
/// Any such set is a lower bound on the packing number at `eps`; points more than
/// `2 C_q r` apart never share an `r`-ball, so `packing_lower(C_q r)` bounds `N(r)` from below.
/// Candidates are the extreme points of the body followed by `candidates` Halton points
/// under a seeded Cranley–Patterson shift, kept only if they fall in the body.
pub fn packing_lower(diag: &FiniteDiag, eps: f64, seed: u64, candidates: usize) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius eps = {eps} must be positive and finite")));
    }
    let k = diag.k();
    let q = diag.q();
    let sep = 2.0 * eps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();

    let mut buckets: HashMap<Vec<i64>, Vec<Vec<f64>>> = HashMap::new();
    let mut count = 0u64;
    let mut offer = |y: Vec<f64>| {
        // ℓ_q distance dominates ℓ_∞ distance, so conflicts sit in adjacent buckets
        let key: Vec<i64> = y.iter().map(|v| (v / sep).floor() as i64).collect();
        let mut neighbour = key.clone();
        for code in 0..3usize.pow(k as u32) {
            let mut c = code;
            for i in 0..k {
                neighbour[i] = key[i] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(points) = buckets.get(&neighbour) {
                if points.iter().any(|z| distance(z, &y, q) <= sep) {
                    return;
                }
            }
        }
        buckets.entry(key).or_default().push(y);
        count += 1;
    };

    for y in extreme_points(diag) {
        offer(y);
    }
    for index in 1..=candidates as u64 {
        let y: Vec<f64> = (0..k)
            .map(|i| {
                let u = (radical_inverse(index, HALTON_BASES[i]) + shift[i]).fract();
                diag.sigma()[i] * (2.0 * u - 1.0)
            })
            .collect();
        if diag.contains(&y) {
            offer(y);
        }
    }
    Ok(count.max(1))
}

/// `±σ_i e_i`, plus every corner of the box when `p = ∞`.
fn extreme_points(diag: &FiniteDiag) -> Vec<Vec<f64>> {
    let k = diag.k();
    let mut points = Vec::new();
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut y = vec![0.0; k];
            y[i] = sign * diag.sigma()[i];
            points.push(y);
        }
    }
    if diag.p() == f64::INFINITY {
        for mask in 0..1u32 << k {
            points.push((0..k).map(|i| if mask >> i & 1 == 1 { -diag.sigma()[i] } else { diag.sigma()[i] }).collect());
        }
    }
    points
}

/// Van der Corput radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let (mut value, mut scale) = (0.0, inv_base);
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{covering_upper, DEFAULT_PACKING_CANDIDATES};

    const INF: f64 = f64::INFINITY;

    #[test]
    fn radical_inverse_digits() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn interval_endpoints_are_separated() {
        let d = FiniteDiag::new(vec![1.0], 2.0, 2.0).unwrap();
        assert!(packing_lower(&d, 0.499, 0, 256).unwrap() >= 2);
    }

    #[test]
    fn square_corners_are_separated() {
        let d = FiniteDiag::new(vec![1.0, 1.0], INF, INF).unwrap();
        assert!(packing_lower(&d, 0.5 - 1e-9, 0, 256).unwrap() >= 4);
    }

    #[test]
    fn same_seed_same_count() {
        let d = FiniteDiag::new(vec![1.0, 0.7, 0.4], 1.5, 0.8).unwrap();
        let a = packing_lower(&d, 0.05, 42, DEFAULT_PACKING_CANDIDATES).unwrap();
        assert_eq!(a, packing_lower(&d, 0.05, 42, DEFAULT_PACKING_CANDIDATES).unwrap());
        assert!(a > 10);
    }

    #[test]
    fn packing_never_beats_a_cover_at_the_matching_radius() {
        for (p, q) in [(2.0, 2.0), (1.0, INF), (INF, 1.0), (1.0, 0.5)] {
            let d = FiniteDiag::new(vec![1.0, 0.5], p, q).unwrap();
            let cq = crate::exponent::quasi_constant(q);
            for eps in [0.4, 0.2, 0.1] {
                let packed = packing_lower(&d, cq * eps, 3, DEFAULT_PACKING_CANDIDATES).unwrap();
                let cover = covering_upper(&d, eps, eps / 8.0).unwrap();
                assert!(packed <= cover, "({p},{q}) eps={eps}: {packed} > {cover}");
            }
        }
    }
}
