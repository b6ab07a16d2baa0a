//! Exponentially tilted truncated power law on `[0, 1]`.
//!
//! The base density is `r v^{r-1}` and the tilt is `e^{-s v}`. The
//! normaliser is `r G(r, s)` with `G(a, s) = ∫_0^1 v^{a-1} e^{-s v} dv`,
//! and tilted raw moments are `G(r + n, s) / G(r, s)`.

use crate::scalar::Real;

/// Cumulant summary of a tilted law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedCumulants<T> {
    /// `log E[e^{-s V}]` under the base law.
    pub log_mgf: T,
    pub mean: T,
    pub var: T,
    pub k3: T,
    pub k4: T,
}

/// Tilts at or above this use the untruncated gamma cumulants; the mass
/// the truncation removes is below double precision there.
pub fn gamma_regime_threshold<T: Real>(r: T) -> T {
    T::lit(60.0) + T::lit(4.0) * r
}

/// `e^{-s} Σ_j s^j / (a (a+1) ... (a+j))`, i.e. `G(a, s)` for `s ≥ 0`.
fn g_series_pos<T: Real>(a: T, s: T) -> T {
    let mut term = (-s).exp() / a;
    let mut sum = term;
    let mut j = 1usize;
    loop {
        term = term * s / (a + T::from_usize_lossy(j));
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.25) && T::from_usize_lossy(j) > s {
            break;
        }
        j += 1;
        if j > 100_000 {
            break;
        }
    }
    sum
}

/// `Σ_j Pois(j; u) / (a + j)`, so that `G(a, -u) = e^u` times this.
fn poisson_mean_inverse<T: Real>(a: T, u: T) -> T {
    if u == T::zero() {
        return T::one() / a;
    }
    let mode = u.floor().to_usize().unwrap_or(0);
    let log_pmf_mode =
        T::from_usize_lossy(mode) * u.ln() - u - (T::from_usize_lossy(mode) + T::one()).ln_gamma();
    let pmf_mode = log_pmf_mode.exp();
    let mut sum = pmf_mode / (a + T::from_usize_lossy(mode));
    // upward
    let mut p = pmf_mode;
    let mut j = mode;
    loop {
        j += 1;
        p = p * u / T::from_usize_lossy(j);
        let term = p / (a + T::from_usize_lossy(j));
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    // downward
    let mut p = pmf_mode;
    let mut j = mode;
    while j > 0 {
        p = p * T::from_usize_lossy(j) / u;
        j -= 1;
        let term = p / (a + T::from_usize_lossy(j));
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    sum
}

/// `log G(a, s)` for any finite `s`.
pub fn log_g<T: Real>(a: T, s: T) -> T {
    if s < T::zero() {
        let u = -s;
        u + poisson_mean_inverse(a, u).ln()
    } else if s < gamma_regime_threshold(a) {
        g_series_pos(a, s).ln()
    } else {
        let head = a.ln_gamma() - a * s.ln();
        let upper = log_upper_incomplete(a, s);
        head + super::logspace::log1m_exp(upper - head)
    }
}

/// `log ∫_1^∞ v^{a-1} e^{-s v} dv` for `s > a + 1` (continued fraction).
fn log_upper_incomplete<T: Real>(a: T, s: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = s + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..500 {
        let fi = T::from_usize_lossy(i);
        let an = -fi * (fi - a);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    // Γ(a, s) = e^{-s} s^a h, and the integral is s^{-a} Γ(a, s).
    -s + h.ln()
}

/// Cumulants of `V` under density proportional to `v^{r-1} e^{-s v}` on `[0, 1]`.
pub fn tilted_power_law<T: Real>(r: T, s: T) -> TiltedCumulants<T> {
    if s >= gamma_regime_threshold(r) {
        let inv = T::one() / s;
        let head = r.ln_gamma() + r.ln() - r * s.ln();
        let upper = log_upper_incomplete(r, s);
        return TiltedCumulants {
            log_mgf: head + super::logspace::log1m_exp(upper - (r.ln_gamma() - r * s.ln())),
            mean: r * inv,
            var: r * inv * inv,
            k3: T::lit(2.0) * r * inv * inv * inv,
            k4: T::lit(6.0) * r * inv * inv * inv * inv,
        };
    }
    let g0 = log_g(r, s);
    let m: Vec<T> = (1..=4)
        .map(|n| (log_g(r + T::from_usize_lossy(n), s) - g0).exp())
        .collect();
    let (m1, m2, m3, m4) = (m[0], m[1], m[2], m[3]);
    let var = m2 - m1 * m1;
    let c3 = m3 - T::lit(3.0) * m1 * m2 + T::lit(2.0) * m1 * m1 * m1;
    let c4 =
        m4 - T::lit(4.0) * m1 * m3 + T::lit(6.0) * m1 * m1 * m2 - T::lit(3.0) * m1 * m1 * m1 * m1;
    TiltedCumulants {
        log_mgf: r.ln() + g0,
        mean: m1,
        var,
        k3: c3,
        k4: c4 - T::lit(3.0) * var * var,
    }
}
