//! Saddle-point equation `M(t) = x` and the closed-form expansions of `t(x)`.

use crate::constants::AsymptoticConstants;
use crate::distributions::{CgfEval, Edge};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::{check_alpha, mean_series, variance_series};

const MAX_DOUBLINGS: usize = 200;
const MAX_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessSource {
    Expansion,
    Bracket,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddlePoint<T> {
    pub x: T,
    pub t: T,
    /// `M(t) - x`.
    pub residual: T,
    pub newton_iters: usize,
    pub guess_source: GuessSource,
}

/// Closed-form approximation of `t(x)`; `None` while the base of the
/// expansion is not positive or the family has no upper edge.
pub fn t_expansion<T: Real>(consts: &AsymptoticConstants<T>, x: T) -> Option<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let (alpha, b) = (consts.alpha, consts.b);
    let r = match consts.edge {
        Edge::Atom { .. } => None,
        Edge::Power { r, .. } => Some(r),
        Edge::Unbounded => return None,
    };
    let t = if alpha == one {
        let q = consts.q?;
        let lead = ((x - q) / b).exp();
        match r {
            None => lead,
            Some(r) => lead - r / (two * b),
        }
    } else {
        let ra = consts.r_alpha?;
        let p = alpha / (one - alpha);
        let mut base = (x - b * consts.gamma_alpha) / ra;
        if let Some(r) = r {
            base = base - r * ra.powf((two * alpha - one) / (one - alpha)) / two * x.powf(-p);
        }
        if !(base > T::zero()) {
            return None;
        }
        base.powf(p)
    };
    (t > T::zero() && t.is_finite()).then_some(t)
}

/// Solve `Σ k^{-α} ψ'(t/k^α) = x` for `t ≥ 0`.
///
/// Newton steps in `log t` with derivative `t V(t)`, kept inside a bracket
/// that is grown geometrically from the initial guess.
pub fn solve_t<T: Real>(cgf: &CgfEval<T>, alpha: T, x: T) -> Result<SaddlePoint<T>> {
    check_alpha(alpha)?;
    if !x.is_finite() || x < T::zero() {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x.f64(),
            expected: "[0, inf)",
        });
    }
    if x == T::zero() {
        return Ok(SaddlePoint {
            x,
            t: T::zero(),
            residual: T::zero(),
            newton_iters: 0,
            guess_source: GuessSource::Bracket,
        });
    }
    let tol = T::lit(1e-10) * (T::one() + x);
    let m = |t: T| -> Result<T> { Ok(mean_series(cgf, alpha, t)?.value - x) };

    let expansion = if cgf.spec().is_bounded() {
        AsymptoticConstants::cached(cgf, alpha)
            .ok()
            .and_then(|c| t_expansion(&c, x))
    } else {
        None
    };
    let (guess, source) = match expansion {
        Some(t) => (t, GuessSource::Expansion),
        None => (T::one(), GuessSource::Bracket),
    };

    // bracket [lo, hi] with m(lo) < 0 < m(hi)
    let (mut lo, mut hi) = (T::zero(), guess);
    let mut f_hi = m(hi)?;
    let mut doublings = 0;
    if f_hi > T::zero() {
        // shrink towards zero for a lower end
        let mut cand = hi;
        loop {
            cand = cand * T::lit(0.5);
            if cand == T::zero() {
                break;
            }
            let f = m(cand)?;
            doublings += 1;
            if f <= T::zero() {
                lo = cand;
                break;
            }
            hi = cand;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::NoBracket {
                    x: x.f64(),
                    doublings,
                });
            }
        }
    } else {
        lo = hi;
        while f_hi <= T::zero() {
            lo = hi;
            hi = hi * T::lit(2.0);
            f_hi = m(hi)?;
            doublings += 1;
            if doublings > MAX_DOUBLINGS || !hi.is_finite() {
                return Err(Error::NoBracket {
                    x: x.f64(),
                    doublings,
                });
            }
        }
    }

    let mut t = if source == GuessSource::Expansion && guess > lo && guess < hi {
        guess
    } else if lo > T::zero() {
        (lo * hi).sqrt()
    } else {
        T::lit(0.5) * hi
    };
    let mut iters = 0;
    loop {
        let mut f = m(t)?;
        if f.abs() <= tol {
            // a few extra steps: downstream P(t) amplifies the error in t by t
            for _ in 0..3 {
                let v = variance_series(cgf, alpha, t)?.value;
                let next = t * (-f / (t * v)).exp();
                let fn_ = m(next)?;
                if !(fn_.abs() < f.abs()) {
                    break;
                }
                t = next;
                f = fn_;
            }
            return Ok(SaddlePoint {
                x,
                t,
                residual: f,
                newton_iters: iters,
                guess_source: source,
            });
        }
        if f < T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        iters += 1;
        if iters > MAX_ITERS || hi - lo <= T::epsilon() * hi {
            // bracket at roundoff width: accept the best end
            if f.abs() <= tol * T::lit(10.0) || hi - lo <= T::epsilon() * hi {
                return Ok(SaddlePoint {
                    x,
                    t,
                    residual: f,
                    newton_iters: iters,
                    guess_source: source,
                });
            }
            return Err(Error::NoBracket {
                x: x.f64(),
                doublings,
            });
        }
        let v = variance_series(cgf, alpha, t)?.value;
        // Newton in u = log t: dM/du = t V(t)
        let mut step = -f / (t * v);
        let mut next = t * step.exp();
        let mut halvings = 0;
        while !(next > lo && next < hi) && halvings < 60 {
            step = step * T::lit(0.5);
            next = t * step.exp();
            halvings += 1;
        }
        if !(next > lo && next < hi) {
            next = if lo > T::zero() {
                (lo * hi).sqrt()
            } else {
                T::lit(0.5) * hi
            };
        }
        t = next;
    }
}
