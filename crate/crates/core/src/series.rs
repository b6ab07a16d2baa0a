//! The four series over `k` that drive the method, with Euler–Maclaurin
//! tails and certified remainder bounds:
//!
//! * mean `M(t) = Σ k^{-α} ψ'(t k^{-α})`
//! * CGF `Λ(t) = Σ ψ(t k^{-α})`
//! * prefactor `P(t) = Σ [ψ(s_k) - s_k ψ'(s_k)]`
//! * variance `V(t) = Σ k^{-2α} ψ''(t k^{-α}) = M'(t)`

use std::cell::Cell;

use crate::distributions::{CgfDerivs, CgfEval};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig, QuadResult};
use crate::scalar::{CompensatedSum, Real};

/// Smallest explicit-summation cutoff.
pub const MIN_K_CUT: usize = 64;
/// Largest explicit-summation cutoff. Past it the summands vary on the
/// scale of `k` itself, so the Euler–Maclaurin bound stays small.
pub const MAX_K_CUT: usize = 1 << 16;
const K_CUT_FACTOR: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesResult<T> {
    pub value: T,
    /// First index handled by the Euler–Maclaurin tail.
    pub k_cut: usize,
    pub tail_correction: T,
    pub remainder_bound: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Mean,
    Cgf,
    Prefactor,
    Variance,
}

pub fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha.is_finite() && alpha > T::lit(0.5) && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "alpha",
            value: alpha.f64(),
            expected: "(1/2, 1]",
        })
    }
}

/// `clamp(⌈8 t^{1/α}⌉, 64, 2^16)`.
pub fn k_cut<T: Real>(alpha: T, t: T) -> usize {
    let raw = T::lit(K_CUT_FACTOR) * t.powf(T::one() / alpha);
    let raw = raw.ceil().to_f64().unwrap_or(f64::INFINITY);
    if raw.is_nan() {
        return MIN_K_CUT;
    }
    raw.clamp(MIN_K_CUT as f64, MAX_K_CUT as f64) as usize
}

/// `(f, f', f'')` of the summand at real `x`, from `ψ` derivatives at
/// `s = t x^{-α}` by the chain rule.
fn summand<T: Real>(kind: SeriesKind, d: &CgfDerivs<T>, alpha: T, s: T, x: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let a = alpha;
    match kind {
        SeriesKind::Mean => {
            let w = x.powf(-a);
            let f = w * d.d1;
            let f1 = -a * w / x * (d.d1 + s * d.d2);
            let f2 = a * w / (x * x)
                * ((a + one) * d.d1 + (three * a + one) * s * d.d2 + a * s * s * d.d3);
            (f, f1, f2)
        }
        SeriesKind::Cgf => {
            let f = d.psi;
            let f1 = -a / x * s * d.d1;
            let f2 = a / (x * x) * ((one + a) * s * d.d1 + a * s * s * d.d2);
            (f, f1, f2)
        }
        SeriesKind::Prefactor => {
            let f = d.h;
            let s2 = s * s;
            let f1 = a / x * s2 * d.d2;
            let f2 = -a / (x * x) * ((one + two * a) * s2 * d.d2 + a * s2 * s * d.d3);
            (f, f1, f2)
        }
        SeriesKind::Variance => {
            let w = x.powf(-two * a);
            let g = two * d.d2 + s * d.d3;
            let g1 = three * d.d3 + s * d.d4;
            let f = w * d.d2;
            let f1 = -a / x * w * g;
            let f2 = a * w / (x * x) * ((two * a + one) * g + a * s * g1);
            (f, f1, f2)
        }
    }
}

/// `Σ_{k ≥ start}` of the chosen series.
pub fn series_from<T: Real>(
    kind: SeriesKind,
    cgf: &CgfEval<T>,
    alpha: T,
    t: T,
    start: usize,
) -> Result<SeriesResult<T>> {
    check_alpha(alpha)?;
    if !t.is_finite() || t < T::zero() {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t.f64(),
            expected: "[0, inf)",
        });
    }
    let start = start.max(1);
    if t == T::zero() && kind != SeriesKind::Variance {
        return Ok(SeriesResult {
            value: T::zero(),
            k_cut: start,
            tail_correction: T::zero(),
            remainder_bound: T::zero(),
        });
    }
    let m = k_cut(alpha, t).max(start);
    let mut acc = CompensatedSum::new();
    for k in start..m {
        let x = T::from_usize_lossy(k);
        let s = t * x.powf(-alpha);
        let d = cgf.derivs(s)?;
        acc.add(summand(kind, &d, alpha, s, x).0);
    }
    // knee of the summand, where s = 1
    let knee = t.powf(T::one() / alpha);
    let eval = |x: T| -> Result<(T, T, T)> {
        let s = t * x.powf(-alpha);
        let d = cgf.derivs(s)?;
        Ok(summand(kind, &d, alpha, s, x))
    };
    let tail = em_tail(eval, m, Some(knee))?;
    Ok(SeriesResult {
        value: acc.value() + tail.value,
        k_cut: m,
        tail_correction: tail.value,
        remainder_bound: tail.remainder_bound,
    })
}

pub fn mean_series<T: Real>(cgf: &CgfEval<T>, alpha: T, t: T) -> Result<SeriesResult<T>> {
    series_from(SeriesKind::Mean, cgf, alpha, t, 1)
}

pub fn cgf_series<T: Real>(cgf: &CgfEval<T>, alpha: T, t: T) -> Result<SeriesResult<T>> {
    series_from(SeriesKind::Cgf, cgf, alpha, t, 1)
}

pub fn prefactor_series<T: Real>(cgf: &CgfEval<T>, alpha: T, t: T) -> Result<SeriesResult<T>> {
    series_from(SeriesKind::Prefactor, cgf, alpha, t, 1)
}

pub fn variance_series<T: Real>(cgf: &CgfEval<T>, alpha: T, t: T) -> Result<SeriesResult<T>> {
    series_from(SeriesKind::Variance, cgf, alpha, t, 1)
}

/// `Σ_{j ≥ m} j^{-p}` for `p > 1`.
pub fn power_tail<T: Real>(p: T, m: usize) -> Result<SeriesResult<T>> {
    if !(p > T::one()) {
        return Err(Error::Divergent(format!("Σ j^-{p} diverges")));
    }
    let m = m.max(1);
    let eval = |x: T| -> Result<(T, T, T)> {
        let f = x.powf(-p);
        Ok((f, -p * f / x, p * (p + T::one()) * f / (x * x)))
    };
    // direct head: the Euler–Maclaurin tail is poor from small m
    let start = m.max(POWER_TAIL_DIRECT);
    let mut head = CompensatedSum::new();
    for j in m..start {
        head.add(T::from_usize_lossy(j).powf(-p));
    }
    let tail = em_tail(eval, start, None)?;
    Ok(SeriesResult {
        value: head.value() + tail.value,
        k_cut: start,
        tail_correction: tail.value,
        remainder_bound: tail.remainder_bound,
    })
}

const POWER_TAIL_DIRECT: usize = 1000;

/// `Σ_{j=m}^{n} f(j)` by Euler–Maclaurin; `remainder_bound` is
/// `(1/12) ∫_m^n |f''|` plus the quadrature error estimates.
pub fn em_finite<T, F, F1, F2>(
    f: F,
    f_prime: F1,
    f_second: F2,
    m: usize,
    n: usize,
) -> Result<SeriesResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
    F1: Fn(T) -> T,
    F2: Fn(T) -> T,
{
    if m >= n {
        return Err(Error::OutOfDomain {
            what: "m",
            value: m as f64,
            expected: "m < n",
        });
    }
    let (a, b) = (T::from_usize_lossy(m), T::from_usize_lossy(n));
    let cfg = QuadConfig::default();
    let int = integrate(&f, a, b, &cfg)?;
    let abs2 = integrate(|x| f_second(x).abs(), a, b, &loose())?;
    let correction = (f(b) + f(a)) * T::lit(0.5) + (f_prime(b) - f_prime(a)) / T::lit(12.0);
    Ok(SeriesResult {
        value: int.value + correction,
        k_cut: m,
        tail_correction: int.value + correction,
        remainder_bound: abs2.value / T::lit(12.0) + abs2.abs_error + int.abs_error,
    })
}

/// `Σ_{j ≥ m} f(j) = ∫_m^∞ f + f(m)/2 - f'(m)/12 + R_m` with
/// `|R_m| ≤ (1/12) ∫_m^∞ |f''|`.
pub fn em_infinite<T, F, F1, F2>(
    f: F,
    f_prime: F1,
    f_second: F2,
    m: usize,
) -> Result<SeriesResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
    F1: Fn(T) -> T,
    F2: Fn(T) -> T,
{
    em_tail(|x| Ok((f(x), f_prime(x), f_second(x))), m.max(1), None)
}

fn loose<T: Real>() -> QuadConfig<T> {
    QuadConfig::with_tolerances(T::lit(1e-15), T::lit(1e-6))
}

/// Integrate `g` over `[m, ∞)` through `x = m e^v`, splitting at `knee`.
fn log_tail_integral<T, G>(
    mut g: G,
    m: T,
    knee: Option<T>,
    cfg: &QuadConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    G: FnMut(T) -> T,
{
    let mut h = |v: T| {
        let x = m * v.exp();
        if x.is_finite() {
            g(x) * x
        } else {
            T::zero()
        }
    };
    match knee {
        Some(k) if k > m * T::lit(1.01) => {
            let vk = (k / m).ln();
            let head = integrate(&mut h, T::zero(), vk, cfg)?;
            let tail = integrate_to_infinity(&mut h, vk, cfg)?;
            Ok(head + tail)
        }
        _ => integrate_to_infinity(h, T::zero(), cfg),
    }
}

fn em_tail<T, E>(eval: E, m: usize, knee: Option<T>) -> Result<SeriesResult<T>>
where
    T: Real,
    E: Fn(T) -> Result<(T, T, T)>,
{
    let first_err: Cell<Option<Error>> = Cell::new(None);
    let component = |x: T, which: usize| -> T {
        match eval(x) {
            Ok((f, f1, f2)) => [f, f1, f2][which],
            Err(e) => {
                let prev = first_err.take();
                first_err.set(prev.or(Some(e)));
                T::nan()
            }
        }
    };
    let mf = T::from_usize_lossy(m);
    let int = log_tail_integral(|x| component(x, 0), mf, knee, &QuadConfig::default());
    let abs2 = log_tail_integral(|x| component(x, 2).abs(), mf, knee, &loose());
    if let Some(e) = first_err.take() {
        return Err(e);
    }
    let int = int.map_err(|e| Error::Divergent(format!("tail integral from {m}: {e}")))?;
    let abs2 = abs2.map_err(|e| Error::Divergent(format!("|f''| integral from {m}: {e}")))?;
    let (f, f1, _) = eval(mf)?;
    let value = int.value + f * T::lit(0.5) - f1 / T::lit(12.0);
    let bound = abs2.value / T::lit(12.0) + abs2.abs_error + int.abs_error;
    if !value.is_finite() || !bound.is_finite() {
        return Err(Error::Divergent(format!(
            "non-finite Euler–Maclaurin tail from {m}"
        )));
    }
    Ok(SeriesResult {
        value,
        k_cut: m,
        tail_correction: value,
        remainder_bound: bound,
    })
}
