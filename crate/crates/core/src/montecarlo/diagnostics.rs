//! Local CLT check under the tilt and an empirical check of the remainder
//! concentration bound.

use rand::Rng;
use serde::Serialize;

use super::{check_inputs, rng, simulate, McConfig, Plan, Remainder, RemainderLaw};
use crate::constants::AsymptoticConstants;
use crate::distributions::{sample, CgfEval, DistributionSpec};
use crate::error::{Error, Result};
use crate::logspace::normal_cdf;
use crate::oracle::remainder_bracket;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalClt {
    pub ks: f64,
    pub emp_var: f64,
    pub sigma_sq: f64,
    pub k_trunc: usize,
    pub n_samples: usize,
}

/// Kolmogorov–Smirnov distance between `sample` and `N(0, var)`; sorts in place.
pub fn ks_normal(sample: &mut [f64], var: f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let sd = var.sqrt();
    sample
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let f = normal_cdf(z / sd);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Truncation point for the diagnostics: the remainder beyond it is
/// Gaussian to good accuracy once `t/K^α` is of order one.
pub fn diagnostic_k(alpha: f64, t: f64) -> usize {
    ((2.0 * t.powf(1.0 / alpha)).ceil() as usize).clamp(super::MIN_K_TRUNC, 1 << 14)
}

/// Distance of `t^{1-1/(2α)} S_0` under the tilt from `N(0, σ²_α)`.
pub fn local_clt_diagnostic(
    cgf: &CgfEval<f64>,
    alpha: f64,
    t: f64,
    cfg: &McConfig,
) -> Result<LocalClt> {
    check_inputs(alpha, cfg)?;
    if !(t >= 100.0) || !t.is_finite() {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t,
            expected: "[100, inf)",
        });
    }
    let k = cfg.k_trunc.unwrap_or_else(|| diagnostic_k(alpha, t));
    let sigma_sq = AsymptoticConstants::cached(cgf, alpha)?.sigma_sq;
    let plan = Plan::new(cgf, alpha, t, k)?;
    let sd_rem = match cfg.remainder {
        Remainder::Gaussian => RemainderLaw::new(cgf, alpha, t, k)?.var.sqrt(),
        Remainder::Truncated => 0.0,
    };
    let draws = simulate(&plan, cfg.n_samples, cfg.seed, cfg.threads)?;
    let scale = t.powf(1.0 - 0.5 / alpha);
    let mut z: Vec<f64> = draws
        .iter()
        .map(|&(d, g)| scale * (d - plan.centred_gap + sd_rem * g))
        .collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let emp_var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    // S_0 = -(D - gap) + G, symmetric law of G: sign flip only
    for v in z.iter_mut() {
        *v = -*v;
    }
    let ks = ks_normal(&mut z, sigma_sq);
    Ok(LocalClt {
        ks,
        emp_var,
        sigma_sq,
        k_trunc: k,
        n_samples: cfg.n_samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HoeffdingCheck {
    pub epsilon: f64,
    pub empirical: f64,
    pub bound: f64,
}

/// Frequency of `|Σ_{k<j≤j_max} j^{-α} η_j| ≥ ε` over untilted draws,
/// against the bound of [`remainder_bracket`].
pub fn hoeffding_check(
    spec: &DistributionSpec<f64>,
    alpha: f64,
    k: usize,
    j_max: usize,
    epsilons: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<HoeffdingCheck>> {
    if j_max <= k || n == 0 {
        return Err(Error::Config("need j_max > k and n > 0".into()));
    }
    let coef: Vec<f64> = (k + 1..=j_max).map(|j| (j as f64).powf(-alpha)).collect();
    let mut hits = vec![0usize; epsilons.len()];
    for c in 0..rng::n_chunks(n) {
        let mut r = rng::chunk_rng(seed, c as u64);
        for _ in 0..rng::CHUNK.min(n - c * rng::CHUNK) {
            let s: f64 = coef.iter().map(|&w| w * sample(spec, &mut r)).sum();
            for (h, &e) in hits.iter_mut().zip(epsilons) {
                if s.abs() >= e {
                    *h += 1;
                }
            }
            let _: u8 = r.random();
        }
    }
    epsilons
        .iter()
        .zip(hits)
        .map(|(&e, h)| {
            Ok(HoeffdingCheck {
                epsilon: e,
                empirical: h as f64 / n as f64,
                bound: remainder_bracket(spec, alpha, k, e)?.0,
            })
        })
        .collect()
}
