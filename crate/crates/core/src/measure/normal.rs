//! Standard normal helpers.
//!
//! `libm`'s `erfc` is accurate to a few ulps; `statrs`'s inverse only to about
//! `1e-11`, so its output is polished by Newton steps against `libm`.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Inverse of [`cdf`], evaluated through the tail that keeps precision.
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // solve in the lower tail, where p carries full relative precision
    let q = p.min(1.0 - p);
    let mut z = -SQRT_2 * erfc_inv(2.0 * q);
    for _ in 0..3 {
        let d = pdf(z);
        if d == 0.0 {
            break;
        }
        z -= (cdf(z) - q) / d;
    }
    if p < 0.5 {
        z
    } else {
        -z
    }
}
