use log::warn;
use serde_json::{json, Value};

use dirtail::asymptotics::{density_thm, tail_saddlepoint, tail_thm};
use dirtail::config::parse_dist;
use dirtail::constants::AsymptoticConstants;
use dirtail::distributions::{CgfEval, DistributionSpec};
use dirtail::montecarlo::{estimate_tail, local_clt_diagnostic, McConfig, Remainder};
use dirtail::oracle::enumerate_tail;
use dirtail::saddle::solve_t;
use dirtail::series::check_alpha;
use dirtail::validate::{validate, ValidateConfig};

use crate::args::{Cli, Command, Format, RemainderArg, TailMethod};
use crate::output::{csv_text, num, render, value_or_null, with_schema};
use crate::{CliError, EXIT_CHECKS_FAILED};

pub struct Output {
    pub text: String,
    pub status: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, status: 0 }
    }
}

/// Validated global options.
pub struct RunConfig {
    pub dist: DistributionSpec<f64>,
    pub alpha: f64,
    pub output: Format,
    pub seed: u64,
    pub threads: usize,
}

impl RunConfig {
    fn mc(&self, n_samples: usize, k_trunc: Option<usize>, remainder: Remainder) -> McConfig {
        McConfig {
            n_samples,
            k_trunc,
            seed: self.seed,
            threads: self.threads,
            remainder,
        }
    }
}

fn run_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let g = &cli.global;
    let dist = parse_dist(&g.dist)?;
    check_alpha(g.alpha)?;
    if g.threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    Ok(RunConfig {
        dist,
        alpha: g.alpha,
        output: g.out.unwrap_or(match cli.command {
            Command::Sweep { .. } => Format::Csv,
            _ => Format::Json,
        }),
        seed: g.seed,
        threads: g.threads,
    })
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("--{name} must be finite")))
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    let cfg = run_config(&cli)?;
    // the oracle runs on the global pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global();
    let cgf = CgfEval::new(cfg.dist.clone());
    let single = |v: Value| -> Result<Output, CliError> {
        Ok(Output::ok(render(&with_schema(v), cfg.output)?))
    };
    match cli.command {
        Command::Constants => {
            let k = AsymptoticConstants::cached(&cgf, cfg.alpha)?;
            let notes: serde_json::Map<String, Value> = k
                .method_notes
                .iter()
                .map(|(a, b)| (a.to_string(), Value::from(b.clone())))
                .collect();
            single(json!({
                "dist": cfg.dist.label(),
                "alpha": cfg.alpha,
                "b": k.b,
                "gamma_alpha": k.gamma_alpha,
                "sigma_sq": k.sigma_sq,
                "sigma_sq_psi_form": k.sigma_sq_psi_form,
                "kappa": k.kappa,
                "r_alpha": k.r_alpha,
                "q": k.q,
                "c0": k.c0,
                "c1": k.c1,
                "checks": k.checks,
                "method_notes": notes,
            }))
        }
        Command::SolveT { x } => {
            let sp = solve_t(&cgf, cfg.alpha, finite("x", x)?)?;
            single(json!({
                "x": sp.x,
                "t": sp.t,
                "residual": sp.residual,
                "iters": sp.newton_iters,
                "guess_source": sp.guess_source,
            }))
        }
        Command::Tail { x, method } => {
            let x = finite("x", x)?;
            let est = match method {
                TailMethod::Thm => tail_thm(&*AsymptoticConstants::cached(&cgf, cfg.alpha)?, x)?,
                TailMethod::Saddle => tail_saddlepoint(&cgf, cfg.alpha, x)?,
            };
            single(json!({
                "x": est.x,
                "method": est.method,
                "log_value": est.log_value,
                "value": value_or_null(est.log_value),
                "error_info": est.error_info,
            }))
        }
        Command::Density { x } => {
            let est = density_thm(
                &*AsymptoticConstants::cached(&cgf, cfg.alpha)?,
                finite("x", x)?,
            )?;
            single(json!({
                "x": est.x,
                "method": est.method,
                "log_value": est.log_value,
                "value": value_or_null(est.log_value),
            }))
        }
        Command::Simulate {
            x,
            n,
            k_trunc,
            remainder,
        } => {
            let k = match k_trunc.trim() {
                "auto" => None,
                s => Some(s.parse::<usize>().map_err(|_| {
                    CliError::config(format!("--k-trunc: `{s}` is neither an integer nor `auto`"))
                })?),
            };
            let remainder = match remainder {
                RemainderArg::Gaussian => Remainder::Gaussian,
                RemainderArg::Truncated => Remainder::Truncated,
            };
            let r = estimate_tail(&cgf, cfg.alpha, finite("x", x)?, &cfg.mc(n, k, remainder))?;
            let mut v = serde_json::to_value(&r).expect("serialisable");
            v.as_object_mut()
                .unwrap()
                .shift_insert(0, "x".into(), x.into());
            single(v)
        }
        Command::Oracle { x, k } => {
            let b = enumerate_tail(&cfg.dist, cfg.alpha, finite("x", x)?, k)?;
            single(serde_json::to_value(b).expect("serialisable"))
        }
        Command::LocalClt { t, n } => {
            let r = local_clt_diagnostic(
                &cgf,
                cfg.alpha,
                finite("t", t)?,
                &cfg.mc(n, None, Remainder::Gaussian),
            )?;
            single(serde_json::to_value(r).expect("serialisable"))
        }
        Command::Sweep { grid, n, oracle_k } => sweep(&cfg, &cgf, &grid, n, oracle_k),
        Command::Validate { n } => {
            let report = validate(
                &cfg.dist,
                cfg.alpha,
                &ValidateConfig {
                    seed: cfg.seed,
                    threads: cfg.threads,
                    n_samples: n,
                },
            )?;
            let text = match cfg.output {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&report).expect("serialisable")
                ),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = report
                        .checks
                        .iter()
                        .map(|c| {
                            vec![
                                c.name.clone(),
                                num(Some(c.value)),
                                num(Some(c.threshold)),
                                c.pass.to_string(),
                            ]
                        })
                        .collect();
                    csv_text(&["name", "value", "threshold", "pass"], &rows)?
                }
            };
            Ok(Output {
                text,
                status: if report.all_pass {
                    0
                } else {
                    EXIT_CHECKS_FAILED
                },
            })
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "x",
    "t",
    "log_tail_thm",
    "log_tail_saddle",
    "log_tail_mc",
    "mc_se",
    "oracle_lower",
    "oracle_upper",
];

/// Saddlepoint tails need x at least this large.
const SADDLE_MIN_X: f64 = 2.0;

fn sweep(
    cfg: &RunConfig,
    cgf: &CgfEval<f64>,
    grid: &[f64],
    n: usize,
    oracle_k: usize,
) -> Result<Output, CliError> {
    if grid.is_empty() {
        return Err(CliError::config("--grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config(
            "--grid must be finite and strictly ascending",
        ));
    }
    let consts = if cfg.dist.is_bounded() {
        Some(AsymptoticConstants::cached(cgf, cfg.alpha)?)
    } else {
        None
    };
    // absent methods leave the cell empty; failures are logged, not fatal
    let soft = |what: &str, x: f64, r: dirtail::Result<f64>| -> Option<f64> {
        r.map_err(|e| warn!("{what} at x = {x}: {e}")).ok()
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut records = Vec::with_capacity(grid.len());
    for &x in grid {
        let t = solve_t(cgf, cfg.alpha, x)?.t;
        let thm = consts
            .as_ref()
            .and_then(|k| soft("theorem tail", x, tail_thm(k, x).map(|e| e.log_value)));
        let saddle = (cfg.dist.is_bounded() && x >= SADDLE_MIN_X)
            .then(|| {
                soft(
                    "saddlepoint tail",
                    x,
                    tail_saddlepoint(cgf, cfg.alpha, x).map(|e| e.log_value),
                )
            })
            .flatten();
        let mc = (n > 0)
            .then(|| {
                estimate_tail(cgf, cfg.alpha, x, &cfg.mc(n, None, Remainder::Gaussian))
                    .map_err(|e| warn!("monte carlo at x = {x}: {e}"))
                    .ok()
            })
            .flatten();
        let oracle = cfg
            .dist
            .is_discrete()
            .then(|| {
                enumerate_tail(&cfg.dist, cfg.alpha, x, oracle_k)
                    .map_err(|e| warn!("oracle at x = {x}: {e}"))
                    .ok()
            })
            .flatten();
        let cells = [
            Some(x),
            Some(t),
            thm,
            saddle,
            mc.as_ref().map(|r| r.log_estimate),
            mc.as_ref().map(|r| r.std_error_of_log),
            oracle.map(|o| o.lower),
            oracle.map(|o| o.upper),
        ];
        rows.push(cells.iter().map(|&c| num(c)).collect::<Vec<_>>());
        records.push(Value::Object(
            SWEEP_COLUMNS
                .iter()
                .zip(cells)
                .map(|(k, c)| {
                    (
                        k.to_string(),
                        c.filter(|v| v.is_finite()).map_or(Value::Null, Value::from),
                    )
                })
                .collect(),
        ));
    }
    let text = match cfg.output {
        Format::Csv => csv_text(&SWEEP_COLUMNS, &rows)?,
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&with_schema(json!({ "rows": records })))
                .expect("serialisable")
        ),
    };
    Ok(Output::ok(text))
}
