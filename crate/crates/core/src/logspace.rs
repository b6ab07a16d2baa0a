//! Log-space arithmetic and Gaussian tail helpers.

use crate::scalar::Real;

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || !max.is_finite() {
        return max;
    }
    let s: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + s.ln()
}

/// `log(1 - exp(x))` for `x <= 0`.
pub fn log1m_exp<T: Real>(x: T) -> T {
    if x > -T::LN_2() {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Mills ratio `Φ̄(z)/φ(z)`.
pub fn mills_ratio<T: Real>(z: T) -> T {
    if z < T::lit(5.0) {
        normal_sf(z) / normal_pdf(z)
    } else {
        // Laplace continued fraction, evaluated bottom-up.
        let mut acc = z;
        for k in (1..=60).rev() {
            acc = z + T::from_usize_lossy(k) / acc;
        }
        T::one() / acc
    }
}

pub fn normal_pdf<T: Real>(z: T) -> T {
    (-(z * z) * T::lit(0.5)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

/// Upper tail `P{N(0,1) > z}`.
pub fn normal_sf<T: Real>(z: T) -> T {
    T::lit(0.5) * (z / T::SQRT_2()).erfc()
}

pub fn normal_cdf<T: Real>(z: T) -> T {
    normal_sf(-z)
}

/// `log P{N(0,1) > z}`, accurate deep into the upper tail.
pub fn log_normal_sf<T: Real>(z: T) -> T {
    if z < T::lit(5.0) {
        normal_sf(z).ln()
    } else {
        mills_ratio(z).ln() - z * z * T::lit(0.5) - T::lit(0.5) * (T::lit(2.0) * T::PI()).ln()
    }
}
