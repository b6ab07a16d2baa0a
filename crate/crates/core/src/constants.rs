//! Asymptotic constants `γ_ρ`, `σ²_α`, `κ_α`, `r_α` and `q`.
//!
//! Every integral is split at `x = 1`. On `[0, 1]` the weight `x^{1-1/α}`
//! is removed by `x = u^p` with `p = 1/(2 - 1/α)`; on `[1, ∞)` we integrate
//! in `v = log x`. Near `x = 0` the evaluator's cumulant expansion keeps
//! `ψ(x)/x²` and `ψ'(x)/x` accurate.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::distributions::{CgfDerivs, CgfEval, Edge};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};
use crate::scalar::{CompensatedSum, Real};
use crate::series::check_alpha;

/// Explicit terms before the Euler–Maclaurin limit in [`gamma_rho`].
const GAMMA_TERMS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ConstantChecks {
    /// `|σ²(ψ''-form) - σ²(ψ-form)| / σ²`.
    pub dual_sigma_rel_err: f64,
    /// `|(1-α)α^{-2}κ - ασ²| / σ²`; absent at `α = 1`.
    pub kappa_identity_rel_err: Option<f64>,
    /// Relative gap of `b/(1-α) + (c0 - c1)/α` to `r_α`; absent at `α = 1`.
    pub mean_form_rel_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticConstants<T> {
    pub alpha: T,
    pub b: T,
    pub edge: Edge<T>,
    pub gamma_alpha: T,
    /// `α^{-1} ∫_0^∞ x^{1-1/α} ψ''(x) dx`.
    pub sigma_sq: T,
    /// `(1-α) α^{-3} ∫_0^∞ x^{-1-1/α} ψ(x) dx`; at `α = 1` its limit `b`.
    pub sigma_sq_psi_form: T,
    /// `∫_0^∞ x^{-1-1/α} ψ(x) dx`, `α < 1` only.
    pub kappa: Option<T>,
    /// `α σ² / (1-α)`, `α < 1` only.
    pub r_alpha: Option<T>,
    /// `α = 1` only.
    pub q: Option<T>,
    /// `∫_0^1 y^{-1/α} ψ'(y) dy`.
    pub c0: T,
    /// `-∫_1^∞ y^{-1/α} L'(y) dy`.
    pub c1: T,
    pub checks: ConstantChecks,
    pub method_notes: Vec<(&'static str, String)>,
}

/// `γ_ρ = lim_n (Σ_{k≤n} k^{-ρ} - n^{1-ρ}/(1-ρ))`, with `log n` at `ρ = 1`.
///
/// Explicit sum to `m = 10^5`, then the Euler–Maclaurin limit
/// `-∫^m x^{-ρ} + f(m)/2 - f'(m)/12`, remainder at most `ρ m^{-ρ-1}/12`.
pub fn gamma_rho<T: Real>(rho: T) -> Result<T> {
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(Error::OutOfDomain {
            what: "rho",
            value: rho.f64(),
            expected: "(0, 1]",
        });
    }
    let m = GAMMA_TERMS;
    let mut acc = CompensatedSum::new();
    // smallest terms first
    for k in (1..m).rev() {
        acc.add(T::from_usize_lossy(k).powf(-rho));
    }
    let mf = T::from_usize_lossy(m);
    let antiderivative = if rho == T::one() {
        mf.ln()
    } else {
        mf.powf(T::one() - rho) / (T::one() - rho)
    };
    let f = mf.powf(-rho);
    let f1 = -rho * f / mf;
    acc.add(-antiderivative);
    acc.add(f * T::lit(0.5));
    acc.add(-f1 / T::lit(12.0));
    Ok(acc.value())
}

fn quad_cfg<T: Real>() -> QuadConfig<T> {
    QuadConfig {
        abs_tol: T::lit(1e-14),
        rel_tol: T::lit(1e-12),
        max_intervals: 4000,
    }
}

/// Evaluates `ψ` derivatives inside an integrand, remembering the first error.
struct Probe<'a, T> {
    cgf: &'a CgfEval<T>,
    err: std::cell::RefCell<Option<Error>>,
}

impl<'a, T: Real> Probe<'a, T> {
    fn new(cgf: &'a CgfEval<T>) -> Self {
        Self {
            cgf,
            err: std::cell::RefCell::new(None),
        }
    }

    fn at(&self, x: T) -> CgfDerivs<T> {
        match self.cgf.derivs(x) {
            Ok(d) => d,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                let nan = T::nan();
                CgfDerivs {
                    psi: nan,
                    d1: nan,
                    d2: nan,
                    d3: nan,
                    d4: nan,
                    l: nan,
                    l1: nan,
                    h: nan,
                }
            }
        }
    }

    fn finish<V>(&self, r: Result<V>) -> Result<V> {
        match self.err.borrow_mut().take() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

/// `∫_0^1 x^{1-1/α} φ(x) dx` through `x = u^p`, `p = 1/(2 - 1/α)`.
fn weighted_head<T: Real, F: Fn(T) -> T>(alpha: T, phi: F) -> Result<T> {
    let p = T::one() / (T::lit(2.0) - T::one() / alpha);
    let g = |u: T| p * phi(u.powf(p));
    Ok(integrate(g, T::zero(), T::one(), &quad_cfg())?.value)
}

/// `∫_1^∞ g(x) dx` in `v = log x`.
fn log_tail<T: Real, F: Fn(T) -> T>(g: F) -> Result<T> {
    let h = |v: T| {
        let x = v.exp();
        if x.is_finite() {
            g(x) * x
        } else {
            T::zero()
        }
    };
    Ok(integrate_to_infinity(h, T::zero(), &quad_cfg())?.value)
}

/// `σ²_α` from the `ψ''` form.
pub fn sigma_sq<T: Real>(cgf: &CgfEval<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    cgf.spec().require_bounded("sigma_sq")?;
    let probe = Probe::new(cgf);
    let head = weighted_head(alpha, |x| probe.at(x).d2);
    let tail = log_tail(|x: T| x.powf(T::one() - T::one() / alpha) * probe.at(x).d2);
    let (head, tail) = (probe.finish(head)?, probe.finish(tail)?);
    Ok((head + tail) / alpha)
}

/// `κ_α = ∫_0^∞ x^{-1-1/α} ψ(x) dx`, `α < 1`.
///
/// On `[1, ∞)` the linear part `b x` of `ψ = b x + L(x)` integrates to
/// `b α/(1-α)` in closed form.
pub fn kappa<T: Real>(cgf: &CgfEval<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    cgf.spec().require_bounded("kappa")?;
    if alpha >= T::one() {
        return Err(Error::OutOfDomain {
            what: "alpha",
            value: alpha.f64(),
            expected: "(1/2, 1) for kappa",
        });
    }
    let b = cgf.spec().b();
    let probe = Probe::new(cgf);
    let head = weighted_head(alpha, |x| {
        if x == T::zero() {
            cgf.spec().variance() * T::lit(0.5)
        } else {
            probe.at(x).psi / (x * x)
        }
    });
    let tail = log_tail(|x: T| x.powf(-T::one() - T::one() / alpha) * probe.at(x).l);
    let (head, tail) = (probe.finish(head)?, probe.finish(tail)?);
    Ok(head + b * alpha / (T::one() - alpha) + tail)
}

/// `c0(α) = ∫_0^1 y^{-1/α} ψ'(y) dy`.
fn c0<T: Real>(cgf: &CgfEval<T>, alpha: T) -> Result<T> {
    let probe = Probe::new(cgf);
    let head = weighted_head(alpha, |x| {
        if x == T::zero() {
            cgf.spec().variance()
        } else {
            probe.at(x).d1 / x
        }
    });
    probe.finish(head)
}

/// `c1(α) = -∫_1^∞ y^{-1/α} L'(y) dy`.
fn c1<T: Real>(cgf: &CgfEval<T>, alpha: T) -> Result<T> {
    let probe = Probe::new(cgf);
    let tail = log_tail(|x: T| -x.powf(-T::one() / alpha) * probe.at(x).l1);
    probe.finish(tail)
}

/// `q = b γ_1 + ∫_0^1 x^{-1} ψ'(x) dx + ∫_1^∞ x^{-1} (ψ'(x) - b) dx`.
pub fn q_const<T: Real>(cgf: &CgfEval<T>) -> Result<T> {
    cgf.spec().require_bounded("q_const")?;
    let b = cgf.spec().b();
    Ok(b * gamma_rho(T::one())? + c0(cgf, T::one())? - c1(cgf, T::one())?)
}

/// `q` by a second scheme: plain adaptive rules in `x` with the rational
/// map on `[1, ∞)`. Used as a cross-check.
pub fn q_const_alt<T: Real>(cgf: &CgfEval<T>) -> Result<T> {
    cgf.spec().require_bounded("q_const")?;
    let b = cgf.spec().b();
    let probe = Probe::new(cgf);
    let cfg = quad_cfg();
    let head = integrate(
        |x: T| {
            if x == T::zero() {
                cgf.spec().variance()
            } else {
                probe.at(x).d1 / x
            }
        },
        T::zero(),
        T::one(),
        &cfg,
    );
    let tail = integrate_to_infinity(|x: T| probe.at(x).l1 / x, T::one(), &cfg);
    let (head, tail) = (probe.finish(head)?.value, probe.finish(tail)?.value);
    Ok(b * gamma_rho(T::one())? + head + tail)
}

impl<T: Real> AsymptoticConstants<T> {
    pub fn compute(cgf: &CgfEval<T>, alpha: T) -> Result<Self> {
        check_alpha(alpha)?;
        let spec = cgf.spec();
        spec.require_bounded("constants")?;
        let one = T::one();
        let b = spec.b();
        let gamma_alpha = gamma_rho(alpha)?;
        let sigma = sigma_sq(cgf, alpha)?;
        let c0 = c0(cgf, alpha)?;
        let c1 = c1(cgf, alpha)?;
        let mut notes = vec![
            (
                "gamma_alpha",
                format!("explicit sum to {GAMMA_TERMS} plus Euler-Maclaurin limit"),
            ),
            (
                "sigma_sq",
                "psi'' form, [0,1] via x = u^p and [1,inf) in log x".to_string(),
            ),
            ("c0", format!("{}", c0.f64())),
            ("c1", format!("{}", c1.f64())),
        ];
        let rel = |a: T, b: T| ((a - b).abs() / b.abs()).f64();
        if alpha == one {
            let q = q_const(cgf)?;
            notes.push(("q", "b gamma_1 + c0(1) - c1(1)".to_string()));
            notes.push((
                "sigma_sq_psi_form",
                "alpha = 1 limit of (1-alpha) kappa_alpha, equal to b".to_string(),
            ));
            Ok(Self {
                alpha,
                b,
                edge: spec.edge(),
                gamma_alpha,
                sigma_sq: sigma,
                sigma_sq_psi_form: b,
                kappa: None,
                r_alpha: None,
                q: Some(q),
                c0,
                c1,
                checks: ConstantChecks {
                    dual_sigma_rel_err: rel(b, sigma),
                    kappa_identity_rel_err: None,
                    mean_form_rel_err: None,
                },
                method_notes: notes,
            })
        } else {
            let kappa = kappa(cgf, alpha)?;
            let psi_form = (one - alpha) * kappa / (alpha * alpha * alpha);
            let r_alpha = alpha * sigma / (one - alpha);
            let mean_form = b / (one - alpha) + (c0 - c1) / alpha;
            notes.push((
                "kappa",
                "[0,1] via x = u^p; [1,inf) as b alpha/(1-alpha) + integral of x^(-1-1/alpha) L(x)"
                    .to_string(),
            ));
            notes.push(("r_alpha", "alpha sigma_sq / (1 - alpha)".to_string()));
            let identity = ((one - alpha) * kappa / (alpha * alpha) - alpha * sigma).abs() / sigma;
            Ok(Self {
                alpha,
                b,
                edge: spec.edge(),
                gamma_alpha,
                sigma_sq: sigma,
                sigma_sq_psi_form: psi_form,
                kappa: Some(kappa),
                r_alpha: Some(r_alpha),
                q: None,
                c0,
                c1,
                checks: ConstantChecks {
                    dual_sigma_rel_err: rel(psi_form, sigma),
                    kappa_identity_rel_err: Some(identity.f64()),
                    mean_form_rel_err: Some(rel(mean_form, r_alpha)),
                },
                method_notes: notes,
            })
        }
    }

    /// Cached per `(spec, mode, α, scalar type)`.
    pub fn cached(cgf: &CgfEval<T>, alpha: T) -> Result<Arc<Self>> {
        type Key = (TypeId, Vec<u64>, bool, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
        let key: Key = (
            TypeId::of::<T>(),
            cgf.spec().cache_key(),
            cgf.mode() == crate::distributions::CgfMode::ClosedForm,
            alpha.f64().to_bits(),
        );
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(hit) = cache.lock().expect("constants cache").get(&key) {
            if let Ok(c) = Arc::clone(hit).downcast::<Self>() {
                return Ok(c);
            }
        }
        let fresh = Arc::new(Self::compute(cgf, alpha)?);
        cache
            .lock()
            .expect("constants cache")
            .insert(key, fresh.clone() as Arc<dyn Any + Send + Sync>);
        Ok(fresh)
    }

    pub fn theta(&self) -> Option<T> {
        match self.edge {
            Edge::Atom { theta } => Some(theta),
            _ => None,
        }
    }

    fn require<V: Copy>(v: Option<V>, what: &'static str) -> Result<V> {
        v.ok_or(Error::OutOfDomain {
            what,
            value: f64::NAN,
            expected: "a value for this alpha",
        })
    }

    pub fn q_value(&self) -> Result<T> {
        Self::require(self.q, "q (alpha = 1 only)")
    }

    pub fn r_alpha_value(&self) -> Result<T> {
        Self::require(self.r_alpha, "r_alpha (alpha < 1 only)")
    }
}
