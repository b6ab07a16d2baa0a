//! Exact enumeration of truncated sums of discrete coordinates, with a
//! Hoeffding bracket on the full series tail.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{DistributionSpec, Kind};
use crate::error::{Error, Result};
use crate::scalar::CompensatedSum;
use crate::series::{check_alpha, power_tail};

/// Largest number of atom sequences `m^k` enumerated.
pub const ENUMERATION_BUDGET: u64 = 1 << 26;
pub const MAX_K: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleBracket {
    pub k: usize,
    pub x: f64,
    pub p_exact_truncated: f64,
    pub lower: f64,
    pub upper: f64,
    /// Threshold shifts at which `lower` and `upper` were attained.
    pub epsilon_lower: f64,
    pub epsilon_upper: f64,
}

/// Probability mass bound `2 exp(-2ε² / (range² Σ_{j>k} j^{-2α}))` on
/// `|Σ_{j>k} j^{-α} η_j| ≥ ε`, returned for the lower and upper side.
///
/// For the Gaussian family the sub-Gaussian analogue `2 exp(-ε²/(2 Σ))`.
pub fn remainder_bracket(
    spec: &DistributionSpec<f64>,
    alpha: f64,
    k: usize,
    epsilon: f64,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(epsilon > 0.0) {
        return Err(Error::OutOfDomain {
            what: "epsilon",
            value: epsilon,
            expected: "(0, inf]",
        });
    }
    let tail = power_tail(2.0 * alpha, k + 1)?.value;
    let exponent = match spec.kind() {
        Kind::GaussianSanity => -epsilon * epsilon / (2.0 * tail * spec.variance()),
        _ => -2.0 * epsilon * epsilon / (spec.range() * spec.range() * tail),
    };
    let bound = (2.0 * exponent.exp()).min(1.0);
    Ok((bound, bound))
}

/// All partial sums of one block of coordinates with their probabilities,
/// sorted by sum; `suffix[i]` is the mass of entries `i..`.
struct Half {
    sums: Vec<f64>,
    suffix: Vec<f64>,
}

impl Half {
    fn build(atoms: &[(f64, f64)], weights: &[f64]) -> Self {
        let m = atoms.len();
        let len = m.pow(weights.len() as u32);
        let mut entries = Vec::with_capacity(len);
        // odometer over atom indices, running sums kept per digit
        let n = weights.len();
        let mut idx = vec![0usize; n];
        let mut part_sum = vec![0.0f64; n + 1];
        let mut part_prob = vec![1.0f64; n + 1];
        let mut from = 0;
        loop {
            for j in from..n {
                let (v, p) = atoms[idx[j]];
                part_sum[j + 1] = part_sum[j] + weights[j] * v;
                part_prob[j + 1] = part_prob[j] * p;
            }
            entries.push((part_sum[n], part_prob[n]));
            let mut j = n;
            loop {
                if j == 0 {
                    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut suffix = vec![0.0; entries.len() + 1];
                    let mut acc = CompensatedSum::new();
                    for i in (0..entries.len()).rev() {
                        acc.add(entries[i].1);
                        suffix[i] = acc.value();
                    }
                    return Half {
                        sums: entries.into_iter().map(|e| e.0).collect(),
                        suffix,
                    };
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < m {
                    break;
                }
                idx[j] = 0;
            }
            from = j;
        }
    }

    /// Mass of entries with sum `> y`.
    fn mass_above(&self, y: f64) -> f64 {
        self.suffix[self.sums.partition_point(|&s| s <= y)]
    }
}

/// Exact law of `S_k = Σ_{j≤k} j^{-α} η_j`, split in two halves.
pub struct Enumeration {
    first: Half,
    first_probs: Vec<f64>,
    second: Half,
}

impl Enumeration {
    pub fn new(spec: &DistributionSpec<f64>, alpha: f64, k: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if !spec.is_discrete() {
            return Err(Error::Unsupported {
                what: "enumeration",
                family: spec.kind().name(),
            });
        }
        if k == 0 || k > MAX_K {
            return Err(Error::OutOfDomain {
                what: "k",
                value: k as f64,
                expected: "1..=24",
            });
        }
        let m = spec.atoms().len() as u64;
        let needed = m.checked_pow(k as u32).unwrap_or(u64::MAX);
        if needed > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                needed: needed as f64,
                budget: ENUMERATION_BUDGET,
            });
        }
        let weights: Vec<f64> = (1..=k).map(|j| (j as f64).powf(-alpha)).collect();
        let h = k / 2;
        let first = Half::build(spec.atoms(), &weights[..h]);
        let second = Half::build(spec.atoms(), &weights[h..]);
        let first_probs = (0..first.sums.len())
            .map(|i| first.suffix[i] - first.suffix[i + 1])
            .collect();
        Ok(Self {
            first,
            first_probs,
            second,
        })
    }

    /// `P{S_k > y}`. Pairs are compared as `s₂ > y - s₁`, so sums lying
    /// within rounding of `y` may be classified either way.
    pub fn tail(&self, y: f64) -> f64 {
        const CHUNK: usize = 1024;
        let partials: Vec<CompensatedSum<f64>> = self
            .first
            .sums
            .par_chunks(CHUNK)
            .zip(self.first_probs.par_chunks(CHUNK))
            .map(|(sums, probs)| {
                let mut acc = CompensatedSum::new();
                for (&s1, &p1) in sums.iter().zip(probs) {
                    acc.add(p1 * self.second.mass_above(y - s1));
                }
                acc
            })
            .collect();
        let mut total = CompensatedSum::new();
        for p in partials {
            total.add(p.value());
        }
        total.value().clamp(0.0, 1.0)
    }
}

/// `P{S_k > x}` exactly, and a bracket on `P{S(α) > x}`.
pub fn enumerate_tail(
    spec: &DistributionSpec<f64>,
    alpha: f64,
    x: f64,
    k: usize,
) -> Result<OracleBracket> {
    let en = Enumeration::new(spec, alpha, k)?;
    let p = en.tail(x);
    let bound = |eps: f64| remainder_bracket(spec, alpha, k, eps).map(|b| b.0);
    let scale = spec.range() * power_tail(2.0 * alpha, k + 1)?.value.sqrt();

    let lower_obj = |eps: f64| -> Result<f64> { Ok(en.tail(x + eps) - bound(eps)?) };
    let upper_obj = |eps: f64| -> Result<f64> { Ok(-(en.tail(x - eps) + bound(eps)?)) };
    let (eps_lo, lo) = maximise(lower_obj, scale)?;
    let (eps_hi, hi) = maximise(upper_obj, scale)?;
    Ok(OracleBracket {
        k,
        x,
        p_exact_truncated: p,
        lower: lo.max(0.0),
        upper: (-hi).min(1.0),
        epsilon_lower: eps_lo,
        epsilon_upper: eps_hi,
    })
}

/// Maximise `f` over `ε ∈ [scale/100, 10 scale]`: coarse log grid, then
/// golden-section between the neighbours of the best grid point when the
/// grid looks unimodal there.
fn maximise<F: Fn(f64) -> Result<f64>>(f: F, scale: f64) -> Result<(f64, f64)> {
    const GRID: usize = 64;
    let (lo, hi) = ((scale / 100.0).ln(), (10.0 * scale).ln());
    let pts: Vec<f64> = (0..GRID)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    let vals = pts.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
    let best = (0..GRID).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let mut result = (pts[best], vals[best]);
    if best == 0 || best == GRID - 1 {
        return Ok(result);
    }
    let unimodal = vals[..=best].windows(2).all(|w| w[1] >= w[0])
        && vals[best..].windows(2).all(|w| w[1] <= w[0]);
    if !unimodal {
        return Ok(result);
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (pts[best - 1], pts[best + 1]);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    for (e, v) in [(c, fc), (d, fd)] {
        if v > result.1 {
            result = (e, v);
        }
    }
    Ok(result)
}
