//! Cross-check suite for one `(distribution, α)` pair, reported as named
//! checks with measured value, threshold and verdict.

use serde::Serialize;

use crate::asymptotics::{density_thm, tail_atom, tail_poly, tail_saddlepoint, tail_thm};
use crate::constants::AsymptoticConstants;
use crate::distributions::{CgfEval, DistributionSpec, Edge, Kind};
use crate::error::Result;
use crate::logspace::log_normal_sf;
use crate::montecarlo::{
    diagnostic_k, estimate_tail, expectation_term, local_clt_diagnostic, McConfig, Remainder,
};
use crate::oracle::{Enumeration, ENUMERATION_BUDGET};
use crate::saddle::{solve_t, t_expansion};
use crate::series::{mean_series, power_tail};

pub const REPORT_SCHEMA: u32 = 1;

/// Relative floor below which a gap counts as numerically converged.
pub const NOISE_FLOOR_REL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub dist: String,
    pub alpha: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

#[derive(Clone, Debug)]
pub struct ValidateConfig {
    pub seed: u64,
    pub threads: usize,
    pub n_samples: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 1,
            n_samples: 20_000,
        }
    }
}

/// True when each value is below its predecessor or below its own floor.
pub fn decreasing_to_floor(values: &[f64], floors: &[f64]) -> bool {
    values
        .windows(2)
        .zip(&floors[1..])
        .all(|(w, &f)| w[1] < w[0] || w[1] <= f)
}

/// Check that `gaps` shrink along the grid; reports the last gap against
/// the one before it.
fn decreasing(name: &str, gaps: &[f64], scale: &[f64]) -> Check {
    let floors: Vec<f64> = scale
        .iter()
        .map(|s| NOISE_FLOOR_REL * s.abs().max(1.0))
        .collect();
    let n = gaps.len();
    Check {
        name: name.into(),
        value: gaps[n - 1],
        threshold: gaps[n - 2].max(floors[n - 1]),
        pass: decreasing_to_floor(gaps, &floors),
    }
}

pub fn validate(spec: &DistributionSpec<f64>, alpha: f64, cfg: &ValidateConfig) -> Result<Report> {
    let cgf = CgfEval::new(spec.clone());
    let mc = |remainder, k_trunc| McConfig {
        n_samples: cfg.n_samples,
        k_trunc,
        seed: cfg.seed,
        threads: cfg.threads,
        remainder,
    };
    let mut checks = Vec::new();

    let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0];
    let mut worst = 0.0f64;
    for &x in &grid {
        let sp = solve_t(&cgf, alpha, x)?;
        let m = mean_series(&cgf, alpha, sp.t)?.value;
        worst = worst.max((m - x).abs() / (1.0 + x));
    }
    checks.push(Check::below("saddle.residual", worst, 1e-10));

    if spec.kind() == Kind::GaussianSanity {
        // S(α) = θ_α η exactly
        let theta_sq = power_tail(2.0 * alpha, 1)?.value;
        let x = 5.0;
        let r = estimate_tail(&cgf, alpha, x, &mc(Remainder::Gaussian, None))?;
        let exact = log_normal_sf(x / theta_sq.sqrt());
        checks.push(Check::below(
            "mc.gaussian_exact_tail_z",
            (r.log_estimate - exact).abs() / r.std_error_of_log,
            3.0,
        ));
        return Ok(finish(spec, alpha, cfg, checks));
    }

    let consts = AsymptoticConstants::cached(&cgf, alpha)?;
    if alpha == 1.0 {
        checks.push(Check::below(
            "constants.sigma_sq_minus_b",
            (consts.sigma_sq - spec.b()).abs(),
            1e-8,
        ));
    } else {
        checks.push(Check::below(
            "constants.dual_sigma_rel",
            consts.checks.dual_sigma_rel_err,
            1e-6,
        ));
    }
    if let Some(e) = consts.checks.kappa_identity_rel_err {
        checks.push(Check::below("constants.kappa_identity_rel", e, 1e-6));
    }
    if let Some(e) = consts.checks.mean_form_rel_err {
        checks.push(Check::below("constants.mean_form_rel", e, 1e-6));
    }

    let xs = [8.0, 12.0, 16.0, 20.0];
    let mut gaps = Vec::new();
    for &x in &xs {
        let t = solve_t(&cgf, alpha, x)?.t;
        let te = t_expansion(&consts, x).expect("bounded family");
        gaps.push((te / t - 1.0).abs());
    }
    checks.push(decreasing(
        "saddle.expansion_gap_decreasing",
        &gaps,
        &[1.0; 4],
    ));

    let xs = [8.0, 10.0, 12.0, 14.0, 16.0];
    let (mut gaps, mut scale) = (Vec::new(), Vec::new());
    for &x in &xs {
        let s = tail_saddlepoint(&cgf, alpha, x)?.log_value;
        gaps.push((s - tail_thm(&consts, x)?.log_value).abs());
        scale.push(s);
    }
    checks.push(decreasing(
        "tail.saddle_vs_theorem_decreasing",
        &gaps,
        &scale,
    ));

    if let Edge::Atom { theta } = consts.edge {
        let mut worst = 0.0f64;
        for &x in &xs {
            let a = tail_atom(&consts, x)?.log_value;
            let p = tail_poly(&consts, theta, 0.0, x)?.log_value;
            worst = worst.max((a - p).abs() / a.abs().max(1.0));
        }
        checks.push(Check::below("tail.reduction_r0", worst, 1e-12));
    }

    let xs = [8.0, 12.0, 16.0];
    let (mut gaps, mut scale) = (Vec::new(), Vec::new());
    for &x in &xs {
        let t = solve_t(&cgf, alpha, x)?.t;
        let d = density_thm(&consts, x)?.log_value;
        let tl = tail_thm(&consts, x)?.log_value;
        gaps.push((d - tl - t.ln()).abs());
        scale.push(d);
    }
    checks.push(decreasing(
        "density.ratio_minus_log_t_decreasing",
        &gaps,
        &scale,
    ));
    if alpha == 1.0 {
        checks.push(Check::below(
            "density.ratio_minus_log_t_at_16",
            gaps[2],
            0.05,
        ));
    }

    if spec.is_discrete() {
        let m = spec.atoms().len() as f64;
        let k = ((ENUMERATION_BUDGET as f64).ln() / m.ln())
            .floor()
            .min(16.0) as usize;
        let head: f64 = (1..=k).map(|j| (j as f64).powf(-alpha)).sum();
        let x = 0.8 * spec.b() * head;
        let r = estimate_tail(&cgf, alpha, x, &mc(Remainder::Truncated, Some(k)))?;
        let exact = Enumeration::new(spec, alpha, k)?
            .tail(r.x_k.expect("truncated mode"))
            .ln();
        checks.push(Check::below(
            "mc.enumeration_z",
            (r.log_estimate - exact).abs() / r.std_error_of_log,
            3.0,
        ));
    }

    let t = 1e4;
    let k = diagnostic_k(alpha, t);
    let limit = -0.5 * (2.0 * std::f64::consts::PI * consts.sigma_sq).ln();
    let e = expectation_term(&cgf, alpha, t, &mc(Remainder::Gaussian, Some(k)))?;
    checks.push(Check::below(
        "mc.expectation_term_rel",
        ((e.log_estimate - limit).exp() - 1.0).abs(),
        0.1,
    ));
    let clt = local_clt_diagnostic(&cgf, alpha, t, &mc(Remainder::Gaussian, Some(k)))?;
    checks.push(Check::below("mc.local_clt_ks", clt.ks, 0.05));
    checks.push(Check::below(
        "mc.local_clt_var_rel",
        (clt.emp_var / clt.sigma_sq - 1.0).abs(),
        0.05,
    ));

    Ok(finish(spec, alpha, cfg, checks))
}

fn finish(
    spec: &DistributionSpec<f64>,
    alpha: f64,
    cfg: &ValidateConfig,
    checks: Vec<Check>,
) -> Report {
    Report {
        schema: REPORT_SCHEMA,
        dist: spec.label(),
        alpha,
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    }
}
