//! Special functions used by the volume formulas and the tail remainders.

use statrs::function::gamma as sg;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

/// `ln Γ(s, z)` of the upper incomplete gamma function `∫_z^∞ t^{s-1} e^{-t} dt`,
/// for every real `s` and `z > 0`. Relative accuracy is around 1e-14.
///
/// Large `z` never overflows: the continued fraction is evaluated with the
/// `z^s e^{-z}` prefactor kept in log-domain. `z = ∞` gives `-∞`.
pub fn ln_upper_gamma(s: f64, z: f64) -> f64 {
    assert!(z > 0.0, "ln_upper_gamma needs z > 0, got {z}");
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z >= s + 1.0 {
        return continued_fraction(s, z);
    }
    if s > 0.0 {
        return ln_gamma(s) + sg::gamma_ur(s, z).ln();
    }
    // Here s ∈ (-1, 0] and z < 1.
    if s == 0.0 {
        return exp_integral_series(z).ln();
    }
    // Γ(s, z) = (z^s e^{-z} - Γ(s+1, z)) / (-s), with s+1 ∈ (0, 1).
    let head = (s * z.ln() - z).exp();
    let next = (ln_gamma(s + 1.0) + sg::gamma_ur(s + 1.0, z).ln()).exp();
    ((head - next) / -s).ln()
}

/// Modified Lentz evaluation of the Legendre continued fraction; converges for
/// every real `s` once `z ≥ s + 1`.
fn continued_fraction(s: f64, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    s * z.ln() - z + h.ln()
}

/// `E_1(z) = Γ(0, z)` by its power series, accurate for `0 < z < 1`.
fn exp_integral_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 0.0;
    for k in 1..60 {
        term *= -z / k as f64;
        acc -= term / k as f64;
        if term.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - z.ln() + acc
}
