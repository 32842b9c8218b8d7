//! Lattice covers of `D_σ B_p` by `ℓ_q` balls.
//!
//! Space is tiled by closed cubes of side `a = 2 eps k^{-1/q}`, each inside the
//! `ℓ_q` ball of radius `eps` around its centre. A tile is needed only if it meets
//! the interior of the body; since the body is unconditional and star-shaped, that
//! happens exactly when the tile's point nearest the origin has gauge `< 1`. The
//! union of needed tiles is closed and contains the interior, hence the body.
//!
//! For a fixed lattice shift the needed tiles are the lattice points of a dilate
//! of the body, so the count can only grow as `eps` shrinks. The reported count is
//! the minimum over a nested dyadic family of shifts, which keeps that property.

use super::{FiniteDiag, MAX_GRID_CELLS};
use crate::error::{Error, Result};
use crate::exponent::inv;

/// An upper bound on the covering number `N(eps)` of `D_σ B_p` in `ℓ_q^k`, nonincreasing
/// in `eps` whether the resolution is held fixed or kept proportional to `eps`.
/// `k = 1` is exact: `⌈σ_1/eps⌉` closed intervals of radius `eps`.
pub fn covering_upper(diag: &FiniteDiag, eps: f64, grid_resolution: f64) -> Result<u64> {
    let plan = Plan::new(diag, eps, grid_resolution)?;
    if let Some(n) = plan.exact_interval() {
        return Ok(n);
    }
    Ok(plan.shifts().map(|t| plan.count(&t)).min().expect("at least one shift"))
}

/// Centres of the cover counted by [`covering_upper`].
#[cfg(test)]
pub(crate) fn cover_centers(diag: &FiniteDiag, eps: f64, grid_resolution: f64) -> Result<Vec<Vec<f64>>> {
    let plan = Plan::new(diag, eps, grid_resolution)?;
    if let Some(m) = plan.exact_interval() {
        let s = diag.sigma()[0];
        return Ok((0..m).map(|j| vec![(-s + (2 * j + 1) as f64 * eps).min(s)]).collect());
    }
    let best = plan.shifts().min_by_key(|t| plan.count(t)).expect("at least one shift");
    let mut centers = Vec::new();
    plan.visit(&best, |lower| centers.push(lower.iter().map(|x| x + 0.5 * plan.side).collect()));
    Ok(centers)
}

struct Plan<'a> {
    diag: &'a FiniteDiag,
    eps: f64,
    side: f64,
    /// Shifts per axis, a power of two.
    shifts_per_axis: usize,
}

impl<'a> Plan<'a> {
    fn new(diag: &'a FiniteDiag, eps: f64, grid_resolution: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius eps = {eps} must be positive and finite")));
        }
        if !(grid_resolution > 0.0 && grid_resolution <= eps / 4.0) {
            return Err(Error::ResolutionTooCoarse { resolution: grid_resolution, eps });
        }
        let k = diag.k();
        let side = 2.0 * eps * (k as f64).powf(-inv(diag.q()));
        let tiles = diag.sigma().iter().map(|s| 2.0 * (s / side).ceil() + 2.0).product::<f64>();
        if tiles > MAX_GRID_CELLS as f64 {
            return Err(Error::GridTooLarge(tiles.min(u64::MAX as f64) as u64));
        }
        // eps/(2δ) ≥ 2 by the resolution check; a finer resolution tries more shifts
        let max_shifts = if k <= 2 { 4.0 } else { 2.0 };
        let wanted = (eps / (2.0 * grid_resolution)).min(max_shifts);
        let shifts_per_axis = 1usize << (wanted.log2().floor() as u32);
        Ok(Plan { diag, eps, side, shifts_per_axis })
    }

    fn exact_interval(&self) -> Option<u64> {
        (self.diag.k() == 1).then(|| ((self.diag.sigma()[0] / self.eps).ceil() as u64).max(1))
    }

    /// Offsets `j/m` of the tile lattice per axis; the family for `m` contains the one for `m/2`.
    fn shifts(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let (k, m) = (self.diag.k(), self.shifts_per_axis);
        (0..m.pow(k as u32)).map(move |mut code| {
            (0..k)
                .map(|_| {
                    let t = (code % m) as f64 / m as f64;
                    code /= m;
                    t
                })
                .collect()
        })
    }

    fn count(&self, shift: &[f64]) -> u64 {
        let mut n = 0u64;
        self.visit(shift, |_| n += 1);
        n
    }

    /// Calls `f` with the lower corner of every needed tile.
    fn visit(&self, shift: &[f64], mut f: impl FnMut(&[f64])) {
        let k = self.diag.k();
        let a = self.side;
        let p = self.diag.p();
        // per axis: (lower corner, gauge contribution of the tile's point nearest 0)
        let axes: Vec<Vec<(f64, f64)>> = (0..k)
            .map(|i| {
                let s = self.diag.sigma()[i];
                let first = (-s / a - shift[i]).floor() as i64;
                let last = (s / a - shift[i]).ceil() as i64;
                (first..=last)
                    .map(|m| {
                        let lo = a * (m as f64 + shift[i]);
                        let hi = lo + a;
                        let near = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { lo.abs().min(hi.abs()) };
                        let term = if p == f64::INFINITY { near / s } else { (near / s).powf(p) };
                        (lo, term)
                    })
                    .filter(|(_, term)| *term < 1.0)
                    .collect()
            })
            .collect();
        let combine = |acc: f64, term: f64| if p == f64::INFINITY { acc.max(term) } else { acc + term };
        let mut lower = vec![0.0; k];
        self.descend(&axes, 0, 0.0, &mut lower, &combine, &mut f);
    }

    fn descend(
        &self,
        axes: &[Vec<(f64, f64)>],
        axis: usize,
        acc: f64,
        lower: &mut Vec<f64>,
        combine: &impl Fn(f64, f64) -> f64,
        f: &mut impl FnMut(&[f64]),
    ) {
        for &(lo, term) in &axes[axis] {
            let g = combine(acc, term);
            if g >= 1.0 {
                continue;
            }
            lower[axis] = lo;
            if axis + 1 == axes.len() {
                f(lower);
            } else {
                self.descend(axes, axis + 1, g, lower, combine, f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{distance, volume_lower_nd};

    const INF: f64 = f64::INFINITY;

    #[test]
    fn interval_counts_are_exact() {
        for (p, q) in [(1.0, 1.0), (2.0, INF), (0.5, 3.0)] {
            let d = FiniteDiag::new(vec![1.0], p, q).unwrap();
            for (eps, want) in [(0.5, 2), (1.0 / 3.0, 3), (0.2, 5), (2.0, 1)] {
                assert_eq!(covering_upper(&d, eps, eps / 4.0).unwrap(), want, "eps={eps}");
            }
        }
    }

    #[test]
    fn euclidean_disc_cover() {
        let d = FiniteDiag::new(vec![1.0, 1.0], 2.0, 2.0).unwrap();
        let n = covering_upper(&d, 0.5, 0.5 / 8.0).unwrap();
        assert_eq!(volume_lower_nd(&d, 0.5).unwrap(), 4);
        assert!((4..=9).contains(&n), "cover count {n}");
    }

    #[test]
    fn cube_cover_is_optimal() {
        // [-1,1]^2 in ℓ_∞ at radius 1/2 needs exactly 4 squares
        let d = FiniteDiag::new(vec![1.0, 1.0], INF, INF).unwrap();
        assert_eq!(covering_upper(&d, 0.5, 0.5 / 8.0).unwrap(), 4);
    }

    #[test]
    fn count_is_monotone_in_eps() {
        for (sigma, p, q) in [
            (vec![1.0, 1.0], 2.0, 2.0),
            (vec![1.0, 0.5], 1.0, 2.0),
            (vec![1.0, 0.7], INF, 1.0),
            (vec![1.0, 0.6, 0.3], 2.0, 1.0),
            (vec![1.0, 0.5], 0.5, 0.7),
        ] {
            let d = FiniteDiag::new(sigma, p, q).unwrap();
            let radii: Vec<f64> = (0..120).map(|j| 0.8 * 0.98f64.powi(j)).collect();
            let finest = radii[119] / 8.0;
            let relative: Vec<u64> = radii.iter().map(|&e| covering_upper(&d, e, e / 8.0).unwrap()).collect();
            let fixed: Vec<u64> = radii.iter().map(|&e| covering_upper(&d, e, finest).unwrap()).collect();
            for counts in [relative, fixed] {
                for w in counts.windows(2) {
                    assert!(w[1] >= w[0], "{d:?}: {counts:?}");
                }
            }
        }
    }

    #[test]
    fn finer_resolution_never_hurts() {
        let d = FiniteDiag::new(vec![1.0, 0.5], 0.5, 0.7).unwrap();
        for eps in [0.5, 0.25, 0.1] {
            let coarse = covering_upper(&d, eps, eps / 4.0).unwrap();
            let fine = covering_upper(&d, eps, eps / 32.0).unwrap();
            assert!(fine <= coarse);
        }
    }

    #[test]
    fn covers_every_body_point() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (sigma, p, q) in [
            (vec![1.0, 0.8, 0.3], 1.0, 2.0),
            (vec![1.0, 0.8, 0.3], 2.0, 1.0),
            (vec![1.0, 0.6], 0.5, 0.5),
            (vec![1.0, 0.6], INF, 0.7),
            (vec![1.0, 1.0], INF, INF),
            (vec![0.9], 1.0, 1.0),
        ] {
            let d = FiniteDiag::new(sigma, p, q).unwrap();
            for eps in [0.4, 0.2] {
                let centers = cover_centers(&d, eps, eps / 8.0).unwrap();
                assert_eq!(centers.len() as u64, covering_upper(&d, eps, eps / 8.0).unwrap());
                assert!(centers.len() as u64 >= volume_lower_nd(&d, eps).unwrap());
                let mut hits = 0;
                while hits < 4000 {
                    let y: Vec<f64> = d.sigma().iter().map(|s| rng.random_range(-*s..=*s)).collect();
                    if !d.contains(&y) {
                        continue;
                    }
                    hits += 1;
                    let near = centers.iter().map(|c| distance(c, &y, q)).fold(INF, f64::min);
                    assert!(near <= eps * (1.0 + 1e-12), "({p},{q}) eps={eps}: {y:?} is {near} away");
                }
            }
        }
    }

    #[test]
    fn guards() {
        let d = FiniteDiag::new(vec![1.0, 1.0], 2.0, 2.0).unwrap();
        assert!(matches!(covering_upper(&d, 0.5, 0.2), Err(Error::ResolutionTooCoarse { .. })));
        assert!(matches!(covering_upper(&d, 1e-5, 1e-6), Err(Error::GridTooLarge(_))));
        assert!(covering_upper(&d, 0.0, 0.0).is_err());
    }
}
