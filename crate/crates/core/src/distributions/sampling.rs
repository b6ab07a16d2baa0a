use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{DistributionSpec, Kind};
use crate::error::{Error, Result};

/// Draw from `e^{s η} / E e^{s η}` times the base law, prepared once per `s`.
#[derive(Clone, Debug)]
pub enum TiltedSampler {
    /// Cumulative masses over sorted support points.
    Atoms {
        points: Vec<f64>,
        cum: Vec<f64>,
    },
    /// `η = b - d V`, `V` with density proportional to `v^{r-1} e^{-a v}` on `[0, 1]`.
    PowerEdge {
        b: f64,
        d: f64,
        r: f64,
        a: f64,
        gamma: Option<Gamma<f64>>,
    },
    Normal {
        mean: f64,
    },
}

impl TiltedSampler {
    pub fn new(spec: &DistributionSpec<f64>, s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::NonFinite {
                what: "s",
                value: s,
            });
        }
        if s < 0.0 {
            return Err(Error::OutOfDomain {
                what: "s",
                value: s,
                expected: "[0, inf)",
            });
        }
        Ok(match spec.kind() {
            Kind::TwoPoint | Kind::DiscreteFinite => {
                let b = spec.b();
                let lw: Vec<f64> = spec
                    .atoms()
                    .iter()
                    .map(|&(x, p)| p.ln() + s * (x - b))
                    .collect();
                let lz = crate::logspace::log_sum_exp(&lw);
                let mut acc = 0.0;
                let cum = lw
                    .iter()
                    .map(|&l| {
                        acc += (l - lz).exp();
                        acc
                    })
                    .collect();
                TiltedSampler::Atoms {
                    points: spec.atoms().iter().map(|a| a.0).collect(),
                    cum,
                }
            }
            Kind::PolynomialEdge => {
                let (_, r) = spec.power_edge().expect("poly edge");
                let d = spec.range();
                let a = s * d;
                // acceptance of the gamma proposal over that of Beta(r, 1)
                // is a^r / Γ(r+1)
                let gamma = if r * a.ln() > statrs::function::gamma::ln_gamma(r + 1.0) {
                    Some(Gamma::new(r, 1.0 / a).map_err(|e| Error::spec("r", e.to_string()))?)
                } else {
                    None
                };
                TiltedSampler::PowerEdge {
                    b: spec.b(),
                    d,
                    r,
                    a,
                    gamma,
                }
            }
            Kind::GaussianSanity => TiltedSampler::Normal { mean: s },
        })
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TiltedSampler::Atoms { points, cum } => {
                let u: f64 = rng.random();
                let i = cum.partition_point(|&c| c <= u).min(points.len() - 1);
                points[i]
            }
            TiltedSampler::PowerEdge { b, d, r, a, gamma } => {
                let v = match gamma {
                    Some(g) => loop {
                        let v = g.sample(rng);
                        if v <= 1.0 {
                            break v;
                        }
                    },
                    None => loop {
                        let v = rng.random::<f64>().powf(1.0 / r);
                        if *a == 0.0 || rng.random::<f64>() < (-a * v).exp() {
                            break v;
                        }
                    },
                };
                b - d * v
            }
            TiltedSampler::Normal { mean } => mean + rng.sample::<f64, _>(StandardNormal),
        }
    }
}

pub fn sample<R: Rng + ?Sized>(spec: &DistributionSpec<f64>, rng: &mut R) -> f64 {
    TiltedSampler::new(spec, 0.0)
        .expect("zero tilt is valid")
        .draw(rng)
}

pub fn sample_tilted<R: Rng + ?Sized>(
    spec: &DistributionSpec<f64>,
    s: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(TiltedSampler::new(spec, s)?.draw(rng))
}
