//! Exponentially tilted importance sampling for `P{S(α) > x}` and the
//! expectation term of the tail representation.
//!
//! Coordinates `k ≤ K` are drawn exactly from their tilted laws with
//! `s_k = t k^{-α}`. The remainder `R = Σ_{k>K}` is either dropped (the
//! target is then the truncated tail `P{S_K > x_K}`, `x_K = x - E^{(t)}R`)
//! or integrated out with a Gaussian approximation to its tilted law.

mod diagnostics;
pub mod rng;

pub use diagnostics::{
    diagnostic_k, hoeffding_check, ks_normal, local_clt_diagnostic, HoeffdingCheck, LocalClt,
};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{ErrorInfo, Method, TailEstimate};
use crate::distributions::{CgfEval, TiltedSampler};
use crate::error::{Error, Result};
use crate::logspace::{log_normal_sf, mills_ratio};
use crate::oracle::remainder_bracket;
use crate::quadrature::{integrate_to_infinity, QuadConfig};
use crate::saddle::solve_t;
use crate::scalar::CompensatedSum;
use crate::series::{check_alpha, series_from, SeriesKind};

pub const MIN_K_TRUNC: usize = 64;
pub const MAX_K_TRUNC: usize = 1 << 15;
/// Importance-sampling effective sizes below this raise a warning.
pub const MIN_N_EFFECTIVE: f64 = 100.0;
/// Weight kurtosis above which the standard error comes from a jackknife.
const JACKKNIFE_KURTOSIS: f64 = 50.0;
const JACKKNIFE_GROUPS: usize = 100;
/// Smallest standard error (on the log scale) the bias is measured against.
pub const TARGET_SE_FLOOR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Remainder {
    /// Integrate the tail `k > K` out under a Gaussian approximation.
    #[default]
    Gaussian,
    /// Ignore it; the estimate targets the truncated sum.
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMethod {
    Delta,
    Jackknife,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub n_samples: usize,
    /// `None` selects the smallest `K = 64·2^j` whose bias estimate is below
    /// a tenth of the standard error (floored at [`TARGET_SE_FLOOR`]).
    pub k_trunc: Option<usize>,
    pub seed: u64,
    pub threads: usize,
    pub remainder: Remainder,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            k_trunc: None,
            seed: 0,
            threads: 1,
            remainder: Remainder::Gaussian,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::Config("n_samples must be at least 2".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.k_trunc == Some(0) {
            return Err(Error::Config("k_trunc must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McResult {
    pub log_estimate: f64,
    pub std_error_of_log: f64,
    pub truncation_bias_bound: f64,
    pub n_effective: f64,
    pub n_samples: usize,
    pub k_trunc: usize,
    pub t: f64,
    pub remainder: Remainder,
    /// Threshold for the truncated sum when `remainder` is `Truncated`.
    pub x_k: Option<f64>,
    /// Hoeffding bracket `[lower, upper]` on `P{S(α) > x}` (truncated mode).
    pub bracket: Option<[f64; 2]>,
    pub se_method: SeMethod,
    pub warnings: Vec<String>,
}

impl McResult {
    pub fn to_tail_estimate(&self, x: f64) -> TailEstimate<f64> {
        TailEstimate::new(
            x,
            self.log_estimate,
            Method::MonteCarlo,
            Some(ErrorInfo::StdError(self.std_error_of_log)),
        )
    }
}

/// Tilted law of the coordinates `k ≤ K` at tilt `t`.
struct Plan {
    samplers: Vec<TiltedSampler>,
    coef: Vec<f64>,
    /// Reference point: `S_K = reference · Σ coef - D`.
    reference: f64,
    sum_coef: f64,
    /// `Σ_{k≤K} (ψ(s_k) - reference · s_k)`.
    log_norm: f64,
    /// `Σ_{k≤K} coef (reference - ψ'(s_k))`.
    centred_gap: f64,
}

impl Plan {
    fn new(cgf: &CgfEval<f64>, alpha: f64, t: f64, k: usize) -> Result<Self> {
        let spec = cgf.spec();
        let reference = if spec.is_bounded() { spec.b() } else { 0.0 };
        let mut samplers = Vec::with_capacity(k);
        let mut coef = Vec::with_capacity(k);
        let (mut log_norm, mut gap, mut sum_coef) = (
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        );
        for j in 1..=k {
            let c = (j as f64).powf(-alpha);
            let s = t * c;
            let d = cgf.derivs(s)?;
            samplers.push(TiltedSampler::new(spec, s)?);
            coef.push(c);
            sum_coef.add(c);
            if spec.is_bounded() {
                log_norm.add(d.l);
                gap.add(-c * d.l1);
            } else {
                log_norm.add(d.psi);
                gap.add(-c * d.d1);
            }
        }
        Ok(Self {
            samplers,
            coef,
            reference,
            sum_coef: sum_coef.value(),
            log_norm: log_norm.value(),
            centred_gap: gap.value(),
        })
    }

    fn s_k(&self, d: f64) -> f64 {
        self.reference * self.sum_coef - d
    }
}

/// Per-sample draws: `D = Σ coef (reference - η_k)` and one standard normal.
fn simulate(plan: &Plan, n: usize, seed: u64, threads: usize) -> Result<Vec<(f64, f64)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunks = rng::n_chunks(n);
    let out: Vec<Vec<(f64, f64)>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = rng::chunk_rng(seed, c as u64);
                let len = rng::CHUNK.min(n - c * rng::CHUNK);
                (0..len)
                    .map(|_| {
                        let mut d = 0.0;
                        for (s, &w) in plan.samplers.iter().zip(&plan.coef) {
                            d += w * (plan.reference - s.draw(&mut rng));
                        }
                        let g: f64 = StandardNormal.sample(&mut rng);
                        (d, g)
                    })
                    .collect()
            })
            .collect()
    });
    Ok(out.into_iter().flatten().collect())
}

/// Mean of `exp(lw)` in log space with its standard error on the log scale.
#[derive(Clone, Copy, Debug)]
struct WeightStats {
    log_mean: f64,
    se_log: f64,
    n_eff: f64,
    method: SeMethod,
}

fn weight_stats(lw: &[f64]) -> Result<WeightStats> {
    let n = lw.len() as f64;
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite {
            what: "largest log weight (no sample hit the event)",
            value: max,
        });
    }
    let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    for &l in lw {
        let w = (l - max).exp();
        s1.add(w);
        s2.add(w * w);
    }
    let (s1, s2) = (s1.value(), s2.value());
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let delta = (var / n).sqrt() / mean;
    let n_eff = s1 * s1 / s2;

    let (mut m2, mut m4) = (CompensatedSum::new(), CompensatedSum::new());
    for &l in lw {
        let c = (l - max).exp() - mean;
        m2.add(c * c);
        m4.add(c * c * c * c);
    }
    let (m2, m4) = (m2.value() / n, m4.value() / n);
    let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) } else { 0.0 };
    let (se_log, method) = if kurtosis > JACKKNIFE_KURTOSIS && lw.len() >= 2 * JACKKNIFE_GROUPS {
        (jackknife(lw, max, s1), SeMethod::Jackknife)
    } else {
        (delta, SeMethod::Delta)
    };
    Ok(WeightStats {
        log_mean: max + mean.ln(),
        se_log,
        n_eff,
        method,
    })
}

/// Delete-a-group jackknife of `log(mean w)` over contiguous groups.
fn jackknife(lw: &[f64], max: f64, total: f64) -> f64 {
    let n = lw.len();
    let g = JACKKNIFE_GROUPS;
    let mut thetas = Vec::with_capacity(g);
    for i in 0..g {
        let (a, b) = (i * n / g, (i + 1) * n / g);
        let part: f64 = lw[a..b].iter().map(|&l| (l - max).exp()).sum();
        let rest = (total - part) / (n - (b - a)) as f64;
        thetas.push(if rest > 0.0 {
            rest.ln()
        } else {
            f64::NEG_INFINITY
        });
    }
    if thetas.iter().any(|t| !t.is_finite()) {
        return f64::INFINITY;
    }
    let mean = thetas.iter().sum::<f64>() / g as f64;
    let ss: f64 = thetas.iter().map(|t| (t - mean) * (t - mean)).sum();
    ((g as f64 - 1.0) / g as f64 * ss).sqrt()
}

/// `log(e^{τ²/2} Φ̄(w + τ)) = log E[e^{-τZ} 1{Z > w}]`, `Z ~ N(0,1)`.
pub fn log_gauss_tilt(w: f64, tau: f64) -> f64 {
    let z = w + tau;
    if z < 0.0 {
        0.5 * tau * tau + log_normal_sf(z)
    } else {
        -tau * w - 0.5 * w * w - 0.5 * (2.0 * std::f64::consts::PI).ln() + mills_ratio(z).ln()
    }
}

/// `E[He₃(Z)]` for `Z ~ N(0,1)` weighted by `e^{-τZ}` and restricted to
/// `Z > w`: the first Edgeworth correction to [`log_gauss_tilt`] is the
/// standardised skewness over 6 times this.
pub fn tilted_he3(w: f64, tau: f64) -> f64 {
    let beta = w + tau;
    // moments of U = Z - w, density ∝ exp(-βu - u²/2) on u > 0
    let n1 = if beta > 5.0 {
        let mut tail = 0.0;
        for j in (2..=200).rev() {
            tail = j as f64 / (beta + tail);
        }
        1.0 / (beta + tail)
    } else {
        1.0 / mills_ratio(beta) - beta
    };
    let n2 = 1.0 - beta * n1;
    let n3 = 2.0 * n1 - beta * n2;
    w * w * w - 3.0 * w + (3.0 * w * w - 3.0) * n1 + 3.0 * w * n2 + n3
}

/// Tilted law of the remainder `Σ_{k>K}` under the Gaussian approximation.
#[derive(Clone, Copy, Debug)]
struct RemainderLaw {
    mean: f64,
    var: f64,
    /// `Λ_R - t μ_R`.
    prefactor: f64,
    k3: f64,
}

impl RemainderLaw {
    fn new(cgf: &CgfEval<f64>, alpha: f64, t: f64, k: usize) -> Result<Self> {
        let mean = series_from(SeriesKind::Mean, cgf, alpha, t, k + 1)?.value;
        let var = series_from(SeriesKind::Variance, cgf, alpha, t, k + 1)?.value;
        let prefactor = series_from(SeriesKind::Prefactor, cgf, alpha, t, k + 1)?.value;
        // third cumulant: midpoint-rule integral, enough for a bias estimate
        let f = |x: f64| -> f64 {
            let c = x.powf(-alpha);
            cgf.psi(t * c, 3).map(|v| c * c * c * v).unwrap_or(0.0)
        };
        let cfg = QuadConfig::with_tolerances(1e-300, 1e-6);
        let k3 = integrate_to_infinity(f, k as f64 + 0.5, &cfg)?.value;
        Ok(Self {
            mean,
            var,
            prefactor,
            k3,
        })
    }

    /// First Edgeworth correction, relative, to [`RemainderLaw::log_factor`]
    /// at threshold `y`.
    fn skew_correction(&self, t: f64, y: f64) -> f64 {
        if self.var <= 0.0 {
            return 0.0;
        }
        let sd = self.var.sqrt();
        let skew = self.k3 / (6.0 * self.var * sd);
        skew * tilted_he3((y - self.mean) / sd, t * sd)
    }

    /// `log(e^{Λ_R} E^{(t)}[e^{-tR} 1{R > y}])`.
    fn log_factor(&self, t: f64, y: f64) -> f64 {
        if self.var <= 0.0 {
            return if y < self.mean {
                self.prefactor
            } else {
                f64::NEG_INFINITY
            };
        }
        let sd = self.var.sqrt();
        self.prefactor + log_gauss_tilt((y - self.mean) / sd, t * sd)
    }
}

fn k_candidates(fixed: Option<usize>) -> Vec<usize> {
    match fixed {
        Some(k) => vec![k],
        None => std::iter::successors(Some(MIN_K_TRUNC), |k| Some(k * 2))
            .take_while(|&k| k <= MAX_K_TRUNC)
            .collect(),
    }
}

/// Run `body` at increasing `K` until its bias estimate is below a tenth of
/// the (floored) standard error. A fixed `K` fails only when the bias
/// exceeds the standard error.
fn with_auto_k<F>(cfg: &McConfig, mut body: F) -> Result<McResult>
where
    F: FnMut(usize) -> Result<McResult>,
{
    let ks = k_candidates(cfg.k_trunc);
    let mut last = None;
    for &k in &ks {
        let mut res = body(k)?;
        let bias = res.truncation_bias_bound;
        let se = res.std_error_of_log.max(TARGET_SE_FLOOR);
        if bias >= 0.1 * res.std_error_of_log && bias < 0.1 * se {
            let msg = format!(
                "truncation bias estimate {bias:.2e} exceeds a tenth of the standard error {:.2e}; \
                 accepted against the {TARGET_SE_FLOOR:.0e} floor",
                res.std_error_of_log
            );
            log::warn!("{msg}");
            res.warnings.push(msg);
        }
        let ok = if cfg.k_trunc.is_some() {
            bias <= se
        } else {
            bias < 0.1 * se
        };
        if ok || cfg.remainder == Remainder::Truncated {
            return Ok(res);
        }
        last = Some((k, bias, res.std_error_of_log));
    }
    let (k_trunc, bias, std_error) = last.expect("at least one K");
    Err(Error::TruncationBias {
        k_trunc,
        bias,
        std_error,
    })
}

/// `|Σ w_i δ_i / Σ w_i|` over log weights `lw`.
fn weighted_abs_mean(lw: &[f64], delta: impl Iterator<Item = f64>) -> f64 {
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (CompensatedSum::new(), CompensatedSum::new());
    for (&l, d) in lw.iter().zip(delta) {
        let w = (l - max).exp();
        num.add(w * d);
        den.add(w);
    }
    (num.value() / den.value()).abs()
}

fn check_inputs(alpha: f64, cfg: &McConfig) -> Result<()> {
    check_alpha(alpha)?;
    cfg.validate()
}

fn warn_n_eff(n_eff: f64, warnings: &mut Vec<String>) {
    if n_eff < MIN_N_EFFECTIVE {
        let msg = format!("effective sample size {n_eff:.1} < {MIN_N_EFFECTIVE}: tilt poorly matched to the event");
        log::warn!("{msg}");
        warnings.push(msg);
    }
}

/// Importance-sampling estimate of `P{S(α) > x}` at the tilt `t(x)`.
pub fn estimate_tail(cgf: &CgfEval<f64>, alpha: f64, x: f64, cfg: &McConfig) -> Result<McResult> {
    check_inputs(alpha, cfg)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x,
            expected: "[0, inf)",
        });
    }
    let t = solve_t(cgf, alpha, x)?.t;
    with_auto_k(cfg, |k| {
        let plan = Plan::new(cgf, alpha, t, k)?;
        let draws = simulate(&plan, cfg.n_samples, cfg.seed, cfg.threads)?;
        let rem = RemainderLaw::new(cgf, alpha, t, k)?;
        let mut warnings = Vec::new();
        let (lw, x_k, bracket): (Vec<f64>, _, _) = match cfg.remainder {
            Remainder::Truncated => {
                let x_k = x - rem.mean;
                let weights = |y: f64| -> Vec<f64> {
                    draws
                        .iter()
                        .map(|&(d, _)| {
                            if plan.s_k(d) > y {
                                plan.log_norm + t * d
                            } else {
                                f64::NEG_INFINITY
                            }
                        })
                        .collect()
                };
                let bracket = truncated_bracket(cgf, alpha, k, x, &weights)?;
                (weights(x_k), Some(x_k), bracket)
            }
            Remainder::Gaussian => {
                let lw = draws
                    .iter()
                    .map(|&(d, _)| plan.log_norm + t * d + rem.log_factor(t, x - plan.s_k(d)))
                    .collect();
                (lw, None, None)
            }
        };
        let st = weight_stats(&lw)?;
        warn_n_eff(st.n_eff, &mut warnings);
        let bias = match cfg.remainder {
            Remainder::Truncated => 0.0,
            Remainder::Gaussian => weighted_abs_mean(
                &lw,
                draws
                    .iter()
                    .map(|&(d, _)| rem.skew_correction(t, x - plan.s_k(d))),
            ),
        };
        Ok(McResult {
            log_estimate: st.log_mean,
            std_error_of_log: st.se_log,
            truncation_bias_bound: bias,
            n_effective: st.n_eff,
            n_samples: cfg.n_samples,
            k_trunc: k,
            t,
            remainder: cfg.remainder,
            x_k,
            bracket,
            se_method: st.method,
            warnings,
        })
    })
}

/// Bracket on `P{S(α) > x}` from estimates of `P{S_K > x ± ε}` and the
/// remainder concentration bound, best over a grid of `ε`.
fn truncated_bracket(
    cgf: &CgfEval<f64>,
    alpha: f64,
    k: usize,
    x: f64,
    weights: &dyn Fn(f64) -> Vec<f64>,
) -> Result<Option<[f64; 2]>> {
    let spec = cgf.spec();
    let mean_w = |y: f64| -> f64 {
        let lw = weights(y);
        lw.iter().map(|l| l.exp()).sum::<f64>() / lw.len() as f64
    };
    let scale = {
        let tail = crate::series::power_tail(2.0 * alpha, k + 1)?.value;
        if spec.is_bounded() {
            spec.range() * tail.sqrt()
        } else {
            (spec.variance() * tail).sqrt()
        }
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for i in 0..16 {
        let eps = scale * 0.25 * 1.5f64.powi(i);
        let (h, _) = remainder_bracket(spec, alpha, k, eps)?;
        lo = lo.max(mean_w(x + eps) - h);
        hi = hi.min(mean_w(x - eps) + h);
    }
    Ok(Some([lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)]))
}

/// Estimate of `t^{1/(2α)} E^{(t)}[e^{-t S_0} 1{S_0 > 0}]`, with `S_0` the
/// tilted-centred series (truncated at `K` in truncated mode).
pub fn expectation_term(
    cgf: &CgfEval<f64>,
    alpha: f64,
    t: f64,
    cfg: &McConfig,
) -> Result<McResult> {
    check_inputs(alpha, cfg)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t,
            expected: "(0, inf)",
        });
    }
    let scale = t.ln() / (2.0 * alpha);
    with_auto_k(cfg, |k| {
        let plan = Plan::new(cgf, alpha, t, k)?;
        let draws = simulate(&plan, cfg.n_samples, cfg.seed, cfg.threads)?;
        let rem = RemainderLaw::new(cgf, alpha, t, k)?;
        let lw: Vec<f64> = match cfg.remainder {
            Remainder::Truncated => draws
                .iter()
                .map(|&(d, _)| {
                    let a = plan.centred_gap - d;
                    if a > 0.0 {
                        -t * a
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect(),
            Remainder::Gaussian => {
                let sd = rem.var.sqrt();
                draws
                    .iter()
                    .map(|&(d, _)| {
                        let a = plan.centred_gap - d;
                        if sd > 0.0 {
                            -t * a + log_gauss_tilt(-a / sd, t * sd)
                        } else if a > 0.0 {
                            -t * a
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            }
        };
        let st = weight_stats(&lw)?;
        let mut warnings = Vec::new();
        warn_n_eff(st.n_eff, &mut warnings);
        // remainder threshold -a relative to its tilted mean 0
        let bias = match cfg.remainder {
            Remainder::Truncated => 0.0,
            Remainder::Gaussian => weighted_abs_mean(
                &lw,
                draws
                    .iter()
                    .map(|&(d, _)| rem.skew_correction(t, rem.mean - (plan.centred_gap - d))),
            ),
        };
        Ok(McResult {
            log_estimate: st.log_mean + scale,
            std_error_of_log: st.se_log,
            truncation_bias_bound: bias,
            n_effective: st.n_eff,
            n_samples: cfg.n_samples,
            k_trunc: k,
            t,
            remainder: cfg.remainder,
            x_k: None,
            bracket: None,
            se_method: st.method,
            warnings,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::oracle::Enumeration;

    fn rad() -> CgfEval<f64> {
        CgfEval::new(DistributionSpec::rademacher())
    }

    #[test]
    fn gauss_tilt_matches_quadrature() {
        for (w, tau) in [
            (0.0, 0.0),
            (-1.0, 3.0),
            (2.0, 40.0),
            (-3.0, 0.5),
            (-50.0, 1.0),
        ] {
            let f = |z: f64| (-tau * z - 0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let cfg = QuadConfig::with_tolerances(1e-300, 1e-12);
            let q = integrate_to_infinity(f, w, &cfg).unwrap().value;
            assert!(
                (log_gauss_tilt(w, tau) - q.ln()).abs() < 1e-9,
                "w={w} tau={tau}"
            );
        }
    }

    #[test]
    fn he3_matches_quadrature() {
        for (w, tau) in [(0.0, 0.3), (-1.0, 3.0), (1.0, 12.0), (0.0, 200.0)] {
            let cfg = QuadConfig::with_tolerances(1e-300, 1e-12);
            let dens = |z: f64| (-tau * (z - w) - 0.5 * (z * z - w * w)).exp();
            let z0 = integrate_to_infinity(dens, w, &cfg).unwrap().value;
            let z3 = integrate_to_infinity(|z| (z * z * z - 3.0 * z) * dens(z), w, &cfg)
                .unwrap()
                .value;
            let h = tilted_he3(w, tau);
            assert!(
                (h - z3 / z0).abs() < 1e-8 * (1.0 + h.abs()),
                "w={w} tau={tau}: {h} vs {}",
                z3 / z0
            );
        }
    }

    #[test]
    fn unbiased_against_enumeration_k8() {
        // twenty seeds, studentised errors
        let cgf = rad();
        let x = 2.0;
        let k = 8;
        let en = Enumeration::new(cgf.spec(), 1.0, k).unwrap();
        let mut zs = Vec::new();
        for seed in 0..20 {
            let cfg = McConfig {
                n_samples: 20_000,
                k_trunc: Some(k),
                seed,
                threads: 2,
                remainder: Remainder::Truncated,
            };
            let r = estimate_tail(&cgf, 1.0, x, &cfg).unwrap();
            let exact = en.tail(r.x_k.unwrap()).ln();
            let z = (r.log_estimate - exact) / r.std_error_of_log;
            assert!(z.abs() < 3.0, "seed {seed}: z={z}");
            zs.push(z);
        }
        let mean_z = zs.iter().sum::<f64>() / zs.len() as f64;
        assert!(mean_z.abs() < 0.75, "mean z {mean_z}");
    }

    #[test]
    fn thread_count_does_not_change_estimate() {
        let cgf = rad();
        let mk = |threads| McConfig {
            n_samples: 5000,
            k_trunc: Some(64),
            seed: 11,
            threads,
            remainder: Remainder::Gaussian,
        };
        let a = estimate_tail(&cgf, 1.0, 4.0, &mk(1)).unwrap();
        let b = estimate_tail(&cgf, 1.0, 4.0, &mk(4)).unwrap();
        let c = estimate_tail(&cgf, 1.0, 4.0, &mk(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn median_scale_event() {
        for spec in [
            DistributionSpec::rademacher(),
            DistributionSpec::poly_edge(1.0, 2.0).unwrap(),
            DistributionSpec::gaussian_sanity(),
        ] {
            let cgf = CgfEval::new(spec);
            let cfg = McConfig {
                n_samples: 4000,
                ..McConfig::default()
            };
            let r = estimate_tail(&cgf, 0.8, 0.0, &cfg).unwrap();
            assert!(r.log_estimate > 0.05f64.ln());
        }
    }

    #[test]
    fn effective_size_at_saddle() {
        let cgf = rad();
        for x in [3.0, 6.0, 12.0] {
            let cfg = McConfig {
                n_samples: 10_000,
                seed: 3,
                ..McConfig::default()
            };
            let r = estimate_tail(&cgf, 1.0, x, &cfg).unwrap();
            assert!(
                r.n_effective / r.n_samples as f64 > 0.1,
                "x={x}: {}",
                r.n_effective
            );
            assert!(r.n_effective <= r.n_samples as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gaussian_family_exact_tail() {
        let cgf = CgfEval::new(DistributionSpec::gaussian_sanity());
        let alpha = 0.8;
        let zeta = 2.2857656656801296f64; // ζ(1.6)
        let cfg = McConfig {
            n_samples: 20_000,
            seed: 5,
            ..McConfig::default()
        };
        let r = estimate_tail(&cgf, alpha, 5.0, &cfg).unwrap();
        let exact = log_normal_sf(5.0 / zeta.sqrt());
        assert!((r.log_estimate - exact).abs() < 3.0 * r.std_error_of_log + 1e-9);
        assert_eq!(r.truncation_bias_bound, 0.0);
    }

    #[test]
    fn bad_config() {
        let cgf = rad();
        let cfg = McConfig {
            threads: 0,
            ..McConfig::default()
        };
        assert!(estimate_tail(&cgf, 1.0, 2.0, &cfg)
            .unwrap_err()
            .is_config_error());
        assert!(expectation_term(&cgf, 1.0, 0.0, &McConfig::default()).is_err());
    }
}
