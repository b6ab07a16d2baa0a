//! Acceptance criteria, one printed line each. Exits non-zero if any fail.

use std::f64::consts::PI;
use std::time::Instant;

use dirtail::asymptotics::{density_thm, tail_atom, tail_poly, tail_saddlepoint, tail_thm};
use dirtail::logspace::log_normal_sf;
use dirtail::montecarlo::{
    diagnostic_k, estimate_tail, expectation_term, local_clt_diagnostic, McConfig, Remainder,
};
use dirtail::oracle::Enumeration;
use dirtail::saddle::{solve_t, t_expansion};
use dirtail::series::{mean_series, power_tail, prefactor_series};
use dirtail::validate::{decreasing_to_floor, validate, ValidateConfig, NOISE_FLOOR_REL};
use dirtail::{Cgf, Constants, Distribution, Result};
use statrs::function::gamma::ln_gamma;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Result<Line> {
    Ok(Line {
        pass,
        detail: detail.into(),
    })
}

fn decreasing(gaps: &[f64], scale: &[f64]) -> bool {
    let floors: Vec<f64> = scale
        .iter()
        .map(|s| NOISE_FLOOR_REL * s.abs().max(1.0))
        .collect();
    decreasing_to_floor(gaps, &floors)
}

fn rademacher() -> Distribution {
    Distribution::rademacher()
}

fn poly(r: f64) -> Distribution {
    Distribution::poly_edge(1.0, r).unwrap()
}

fn families() -> Vec<(&'static str, Distribution)> {
    vec![("rademacher", rademacher()), ("poly_edge(r=2)", poly(2.0))]
}

fn consts(spec: &Distribution, alpha: f64) -> Result<(Cgf, Constants)> {
    let cgf = Cgf::new(spec.clone());
    let c = Constants::compute(&cgf, alpha)?;
    Ok((cgf, c))
}

fn mc(n: usize, k: Option<usize>, seed: u64, remainder: Remainder) -> McConfig {
    McConfig {
        n_samples: n,
        k_trunc: k,
        seed,
        threads: 1,
        remainder,
    }
}

fn ac1() -> Result<Line> {
    let mut worst = 0.0f64;
    for (b, theta) in [(1.0, 0.5), (2.0, 0.3)] {
        let (_, c) = consts(&Distribution::two_point(b, theta)?, 1.0)?;
        worst = worst.max((c.sigma_sq - b).abs());
    }
    line(
        worst < 1e-8,
        format!("max |sigma_sq_1 - b| = {worst:.2e} (< 1e-8)"),
    )
}

fn ac2() -> Result<Line> {
    let mut worst = 0.0f64;
    for (_, spec) in families() {
        for alpha in [0.6, 0.75, 0.9] {
            worst = worst.max(consts(&spec, alpha)?.1.checks.dual_sigma_rel_err);
        }
    }
    line(
        worst < 1e-6,
        format!("max relative dual-form gap = {worst:.2e} (< 1e-6)"),
    )
}

fn ac3() -> Result<Line> {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec) in families() {
        let mut errs = Vec::new();
        for alpha in [0.9, 0.99, 0.999] {
            let (_, c) = consts(&spec, alpha)?;
            let kappa = c.kappa.expect("bounded family");
            errs.push(((1.0 - alpha) * kappa - spec.b()).abs() / spec.b());
            let ident = (kappa - alpha.powi(3) * c.sigma_sq / (1.0 - alpha)).abs() / kappa;
            pass &= ident < 1e-6;
        }
        pass &= errs[2] < 0.02 && errs[0] > errs[1] && errs[1] > errs[2];
        notes.push(format!(
            "{name} {:.2e}/{:.2e}/{:.2e}",
            errs[0], errs[1], errs[2]
        ));
    }
    line(
        pass,
        format!("|(1-a)kappa - b|/b at a=.9/.99/.999: {}", notes.join(", ")),
    )
}

fn ac4() -> Result<Line> {
    let mut grid = vec![0.5];
    grid.extend((1..=20).map(f64::from));
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut last = Vec::new();
    for (name, spec) in families() {
        for alpha in [1.0, 0.75] {
            let (cgf, c) = consts(&spec, alpha)?;
            for &x in &grid {
                let sp = solve_t(&cgf, alpha, x)?;
                let m = mean_series(&cgf, alpha, sp.t)?.value;
                worst = worst.max((m - x).abs() / (1.0 + x));
            }
            let mut gaps = Vec::new();
            for x in [8.0, 12.0, 16.0, 20.0] {
                let t = solve_t(&cgf, alpha, x)?.t;
                gaps.push((t_expansion(&c, x).expect("bounded family") / t - 1.0).abs());
            }
            pass &= decreasing(&gaps, &[1.0; 4]);
            last.push(format!("{name} a={alpha}: {:.1e}", gaps[3]));
        }
    }
    pass &= worst <= 1e-10;
    line(
        pass,
        format!(
            "max |M(t)-x|/(1+x) = {worst:.1e}; expansion gap at x=20 {}",
            last.join(", ")
        ),
    )
}

fn ac5() -> Result<Line> {
    let ts = [1e2, 1e3, 1e4];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec, r) in [
        ("rademacher", rademacher(), 0.0),
        ("poly_edge(r=1)", poly(1.0), 1.0),
    ] {
        let (cgf, c) = consts(&spec, 1.0)?;
        let q = c.q.expect("alpha = 1");
        let (mut gaps, mut scale) = (Vec::new(), Vec::new());
        for &t in &ts {
            let m = mean_series(&cgf, 1.0, t)?.value;
            gaps.push(t * (m - t.ln() - q - r / (2.0 * t)).abs());
            scale.push(t * m);
        }
        pass &= gaps.iter().all(|g| g.is_finite() && *g < 1.0) && decreasing(&gaps, &scale);
        notes.push(format!(
            "{name} {:.1e}/{:.1e}/{:.1e}",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    line(
        pass,
        format!(
            "t*|M(t) - expansion| at t=1e2/1e3/1e4: {}",
            notes.join(", ")
        ),
    )
}

fn prefactor_expansion(spec: &Distribution, c: &Constants, t: f64) -> f64 {
    let alpha = c.alpha;
    let lead = if alpha == 1.0 {
        -spec.b() * t
    } else {
        -(1.0 - alpha) / (alpha * alpha) * c.kappa.expect("bounded family") * t.powf(1.0 / alpha)
    };
    match spec.power_edge() {
        None => lead - 0.5 * spec.theta().expect("atom edge").ln(),
        Some((lambda, r)) => {
            lead + 0.5 * r * t.ln() + 0.5 * r * (alpha * (2.0 * PI).ln() - 1.0)
                - 0.5 * (lambda.ln() + ln_gamma(r + 1.0))
        }
    }
}

fn ac6() -> Result<Line> {
    let t = 1e3;
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec) in [("rademacher", rademacher()), ("poly_edge(r=1)", poly(1.0))] {
        for (alpha, tol) in [(1.0, 5e-2), (0.75, 0.1)] {
            let (cgf, c) = consts(&spec, alpha)?;
            let gap =
                (prefactor_series(&cgf, alpha, t)?.value - prefactor_expansion(&spec, &c, t)).abs();
            pass &= gap < tol;
            notes.push(format!("{name} a={alpha}: {gap:.1e}"));
        }
    }
    line(
        pass,
        format!(
            "|P(1e3) - expansion|: {} (< 5e-2 at a=1, < 0.1 at a=.75)",
            notes.join(", ")
        ),
    )
}

fn ac7() -> Result<Line> {
    let spec = rademacher();
    let cgf = Cgf::new(spec.clone());
    let k = 16;
    let oracle = Enumeration::new(&spec, 1.0, k)?;
    let mut worst = 0.0f64;
    for x in [2.5, 3.0, 3.5] {
        for seed in 0..5 {
            let r = estimate_tail(
                &cgf,
                1.0,
                x,
                &mc(20_000, Some(k), seed, Remainder::Truncated),
            )?;
            let exact = oracle.tail(r.x_k.expect("truncated mode")).ln();
            worst = worst.max((r.log_estimate - exact).abs() / r.std_error_of_log);
        }
    }
    line(
        worst < 3.0,
        format!("max |MC - enumeration| / SE over 15 runs = {worst:.2} (< 3)"),
    )
}

fn ac8() -> Result<Line> {
    let alpha = 0.8;
    let cgf = Cgf::new(Distribution::gaussian_sanity());
    let x = 5.0;
    let r = estimate_tail(&cgf, alpha, x, &mc(100_000, None, 1, Remainder::Gaussian))?;
    let exact = log_normal_sf(x / power_tail(2.0 * alpha, 1)?.value.sqrt());
    let z = (r.log_estimate - exact).abs() / r.std_error_of_log;
    line(
        z < 3.0,
        format!(
            "log MC {:.5} vs exact {exact:.5}, |z| = {z:.2} (< 3)",
            r.log_estimate
        ),
    )
}

fn ac9() -> Result<Line> {
    let spec = rademacher();
    let mut pass = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 0.75] {
        let (cgf, c) = consts(&spec, alpha)?;
        let limit = -0.5 * (2.0 * PI * c.sigma_sq).ln();
        let mut dist = Vec::new();
        for t in [1e2, 1e3, 1e4] {
            let k = diagnostic_k(alpha, t);
            let e = expectation_term(
                &cgf,
                alpha,
                t,
                &mc(100_000, Some(k), 3, Remainder::Gaussian),
            )?;
            dist.push(((e.log_estimate - limit).exp() - 1.0).abs());
        }
        pass &= dist[2] < 0.1 && dist[0] > dist[1] && dist[1] > dist[2];
        notes.push(format!(
            "a={alpha} {:.1e}/{:.1e}/{:.1e}",
            dist[0], dist[1], dist[2]
        ));
    }
    line(
        pass,
        format!(
            "relative distance to limit at t=1e2/1e3/1e4: {}",
            notes.join(", ")
        ),
    )
}

fn ac10() -> Result<Line> {
    let spec = rademacher();
    let t = 1e4;
    let mut pass = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 0.75] {
        let cgf = Cgf::new(spec.clone());
        let k = diagnostic_k(alpha, t);
        let clt = local_clt_diagnostic(
            &cgf,
            alpha,
            t,
            &mc(100_000, Some(k), 4, Remainder::Gaussian),
        )?;
        let var_rel = (clt.emp_var / clt.sigma_sq - 1.0).abs();
        pass &= clt.ks < 0.05 && var_rel < 0.05;
        notes.push(format!("a={alpha} KS {:.4} var {:.1e}", clt.ks, var_rel));
    }
    line(pass, format!("{} (KS < 0.05, var < 5%)", notes.join(", ")))
}

fn ac11() -> Result<Line> {
    let xs = [8.0, 10.0, 12.0, 14.0, 16.0];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst_red = 0.0f64;
    for (name, spec) in families() {
        for alpha in [1.0, 0.75] {
            let (cgf, c) = consts(&spec, alpha)?;
            let (mut gaps, mut scale) = (Vec::new(), Vec::new());
            for &x in &xs {
                let s = tail_saddlepoint(&cgf, alpha, x)?.log_value;
                gaps.push((s - tail_thm(&c, x)?.log_value).abs());
                scale.push(s);
                if let Some(theta) = c.theta() {
                    let a = tail_atom(&c, x)?.log_value;
                    let p = tail_poly(&c, theta, 0.0, x)?.log_value;
                    worst_red = worst_red.max((a - p).abs() / a.abs().max(1.0));
                }
            }
            pass &= decreasing(&gaps, &scale);
            notes.push(format!("{name} a={alpha} {:.2e}->{:.2e}", gaps[0], gaps[4]));
        }
    }
    pass &= worst_red <= 1e-12;
    line(
        pass,
        format!(
            "saddle-vs-theorem gap x=8->16: {}; r=0 reduction {worst_red:.1e}",
            notes.join(", ")
        ),
    )
}

fn ac12() -> Result<Line> {
    let (cgf, c) = consts(&rademacher(), 1.0)?;
    let (mut gaps, mut scale) = (Vec::new(), Vec::new());
    for x in [8.0, 12.0, 16.0] {
        let t = solve_t(&cgf, 1.0, x)?.t;
        let d = density_thm(&c, x)?.log_value;
        gaps.push((d - tail_thm(&c, x)?.log_value - t.ln()).abs());
        scale.push(d);
    }
    line(
        decreasing(&gaps, &scale) && gaps[2] < 0.05,
        format!(
            "gap at x=8/12/16: {:.2e}/{:.2e}/{:.2e} (< 0.05 at 16)",
            gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn ac13() -> Result<Line> {
    let spec = rademacher();
    let cfg = |threads| ValidateConfig {
        seed: 7,
        threads,
        ..ValidateConfig::default()
    };
    let render = |r| serde_json::to_string(&r).expect("report serialises");
    let a = render(validate(&spec, 1.0, &cfg(1))?);
    let b = render(validate(&spec, 1.0, &cfg(1))?);
    let c = render(validate(&spec, 1.0, &cfg(4))?);
    line(
        a == b && a == c,
        format!(
            "threads=1 twice identical: {}; threads=4 identical: {}",
            a == b,
            a == c
        ),
    )
}

type Criterion = (&'static str, fn() -> Result<Line>);

const CRITERIA: [Criterion; 13] = [
    ("AC1  sigma_sq_1 = b", ac1),
    ("AC2  dual sigma_sq forms", ac2),
    ("AC3  kappa limit and identity", ac3),
    ("AC4  saddle contract", ac4),
    ("AC5  mean-series expansion", ac5),
    ("AC6  prefactor expansion", ac6),
    ("AC7  MC vs enumeration oracle", ac7),
    ("AC8  Gaussian exact tail", ac8),
    ("AC9  expectation-term limit", ac9),
    ("AC10 local CLT", ac10),
    ("AC11 theorem convergence", ac11),
    ("AC12 density relation", ac12),
    ("AC13 determinism", ac13),
];

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in CRITERIA {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (verdict, detail) = match run() {
            Ok(l) => (if l.pass { "PASS" } else { "FAIL" }, l.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "{verdict} {name}: {detail} [{:.1}s]",
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
