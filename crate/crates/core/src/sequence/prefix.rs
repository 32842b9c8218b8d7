use super::SequenceSpec;
use crate::error::{Error, Result};
use crate::logreal::{log_add_exp, log_sum_exp, CompensatedSum, LogReal};

/// `ln σ_1..ln σ_K` together with prefix sums `Σ_{i≤k} ln σ_i`, so that geometric
/// means over a scan `k = 1..K` cost O(K) in total.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    ln_sigma: Vec<f64>,
    prefix: Vec<f64>,
}

impl SigmaTable {
    pub fn new(spec: &SequenceSpec, k_max: u64) -> Result<Self> {
        let mut table = SigmaTable { ln_sigma: Vec::new(), prefix: Vec::new() };
        table.extend(spec, k_max)?;
        Ok(table)
    }

    /// Grows the table to cover `1..=k_max`.
    pub fn extend(&mut self, spec: &SequenceSpec, k_max: u64) -> Result<()> {
        let have = self.ln_sigma.len() as u64;
        if k_max <= have {
            return Ok(());
        }
        let mut acc = CompensatedSum::default();
        acc.add(self.prefix.last().copied().unwrap_or(0.0));
        let mut zero_seen = self.prefix.last().is_some_and(|p| *p == f64::NEG_INFINITY);
        for n in have + 1..=k_max {
            let l = spec.ln_sigma(n)?;
            self.ln_sigma.push(l);
            if l == f64::NEG_INFINITY {
                zero_seen = true;
            }
            if zero_seen {
                self.prefix.push(f64::NEG_INFINITY);
            } else {
                acc.add(l);
                self.prefix.push(acc.total());
            }
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.ln_sigma.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.ln_sigma.is_empty()
    }

    /// `ln σ_n`, `1 ≤ n ≤ len`.
    #[inline]
    pub fn ln_sigma(&self, n: u64) -> f64 {
        self.ln_sigma[n as usize - 1]
    }

    pub fn ln_sigmas(&self) -> &[f64] {
        &self.ln_sigma
    }

    /// `Σ_{i≤k} ln σ_i`.
    #[inline]
    pub fn ln_product(&self, k: u64) -> f64 {
        self.prefix[k as usize - 1]
    }

    /// `ln GM_k = (Σ_{i≤k} ln σ_i) / k`.
    #[inline]
    pub fn ln_gm(&self, k: u64) -> f64 {
        self.ln_product(k) / k as f64
    }

    /// Running `ln v_n`, `v_n = (Σ_{k≤n} σ_k^{-s})^{1/s}`, for `n = 1..len`.
    pub fn ln_partial_sums_inv(&self, s: f64) -> Result<Vec<f64>> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("s = {s} must be positive")));
        }
        let mut out = Vec::with_capacity(self.ln_sigma.len());
        let mut running = f64::NEG_INFINITY;
        for (i, &l) in self.ln_sigma.iter().enumerate() {
            if l == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter(format!("σ_{} = 0: partial sums of σ^-s diverge", i + 1)));
            }
            running = log_add_exp(running, -s * l);
            out.push(running / s);
        }
        Ok(out)
    }
}

/// `v_n = (Σ_{k≤n} σ_k^{-s})^{1/s}` in log-domain.
pub fn partial_sum_inv(spec: &SequenceSpec, n: u64, s: f64) -> Result<LogReal> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must be positive")));
    }
    let mut terms = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let l = spec.ln_sigma(k)?;
        if l == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter(format!("σ_{k} = 0: partial sums of σ^-s diverge")));
        }
        terms.push(-s * l);
    }
    LogReal::from_ln(log_sum_exp(&terms) / s)
}

/// `GM_k = (σ_1·…·σ_k)^{1/k}`.
pub fn geometric_mean(spec: &SequenceSpec, k: u64) -> Result<LogReal> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let table = SigmaTable::new(spec, k)?;
    Ok(LogReal::from_ln_unchecked(table.ln_gm(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::TailModel;

    #[test]
    fn partial_sums_small_cases() {
        let g = SequenceSpec::geometric(1.0, 2.0).unwrap();
        assert!((partial_sum_inv(&g, 1, 1.0).unwrap().value() - 2.0).abs() < 1e-14);
        assert!((partial_sum_inv(&g, 3, 1.0).unwrap().value() - 14.0).abs() < 1e-12);
        let p = SequenceSpec::polynomial(3.0, 1.5).unwrap();
        let v1 = partial_sum_inv(&p, 1, 0.7).unwrap().value();
        assert!((v1 - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn running_partial_sums_match_direct() {
        let p = SequenceSpec::poly_log(1.0, 1.0, 2.0).unwrap();
        let table = SigmaTable::new(&p, 200).unwrap();
        for s in [0.5, 1.0, 3.0] {
            let running = table.ln_partial_sums_inv(s).unwrap();
            for n in [1u64, 2, 17, 200] {
                let direct = partial_sum_inv(&p, n, s).unwrap().ln();
                assert!((running[n as usize - 1] - direct).abs() < 1e-12, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn geometric_means() {
        let g = SequenceSpec::geometric(1.0, 2.0).unwrap();
        assert!((geometric_mean(&g, 3).unwrap().value() - 0.25).abs() < 1e-15);
        let p = SequenceSpec::polynomial(1.0, 1.0).unwrap();
        // direct product oracle: (1·1/2·1/3·1/4)^{1/4}
        let oracle = (1.0f64 / 24.0).powf(0.25);
        assert!((geometric_mean(&p, 4).unwrap().value() - oracle).abs() < 1e-14);
        assert!((oracle - 0.451_801_001_804_4).abs() < 1e-12);
        let e = SequenceSpec::exp_exp(1.0, 1.0).unwrap();
        assert_eq!(geometric_mean(&e, 1).unwrap(), e.eval_sigma(1).unwrap());
    }

    #[test]
    fn zero_tail_gives_zero_mean() {
        let z = SequenceSpec::explicit(vec![1.0, 0.5], TailModel::Zero).unwrap();
        let t = SigmaTable::new(&z, 4).unwrap();
        assert_eq!(t.ln_gm(2), 0.5f64.ln() / 2.0);
        assert_eq!(t.ln_gm(3), f64::NEG_INFINITY);
        assert!(t.ln_partial_sums_inv(1.0).is_err());
    }

    #[test]
    fn extend_is_consistent() {
        let p = SequenceSpec::polynomial(1.0, 2.0).unwrap();
        let mut a = SigmaTable::new(&p, 10).unwrap();
        a.extend(&p, 50).unwrap();
        let b = SigmaTable::new(&p, 50).unwrap();
        for k in 1..=50 {
            assert!((a.ln_product(k) - b.ln_product(k)).abs() < 1e-12);
        }
    }
}
