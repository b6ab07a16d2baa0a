//! Admissible laws for the coefficients `η` of the series.
//!
//! Every bounded family has essential supremum `b`, zero mean and finite
//! positive variance. The Gaussian family exists only as a sampler sanity
//! check and is refused by the asymptotic layers.

mod cgf;
mod sampling;

pub use cgf::{CgfDerivs, CgfEval, CgfMode};
pub use sampling::{sample, sample_tilted, TiltedSampler};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    TwoPoint,
    PolynomialEdge,
    DiscreteFinite,
    GaussianSanity,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::TwoPoint => "two_point",
            Kind::PolynomialEdge => "poly_edge",
            Kind::DiscreteFinite => "discrete",
            Kind::GaussianSanity => "gaussian_sanity",
        }
    }
}

/// Behaviour of the law at its upper edge `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Edge<T> {
    /// `P{η = b} = theta`.
    Atom { theta: T },
    /// `P{b - η ≤ x} = lambda x^r` near zero.
    Power { lambda: T, r: T },
    /// No upper edge (Gaussian).
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec<T> {
    kind: Kind,
    b: T,
    support_lo: T,
    variance: T,
    edge: Edge<T>,
    /// Support points sorted ascending with their masses; empty for the
    /// continuous families.
    atoms: Vec<(T, T)>,
    /// Width `d` of the polynomial-edge support `[b - d, b]`.
    width: T,
}

impl<T: Real> DistributionSpec<T> {
    /// Two-point law: `b` with mass `theta`, `-theta b / (1 - theta)` otherwise.
    pub fn two_point(b: T, theta: T) -> Result<Self> {
        check_positive("b", b)?;
        if !(theta > T::zero() && theta < T::one()) {
            return Err(Error::spec(
                "theta",
                format!("must lie in (0, 1), got {theta}"),
            ));
        }
        let lo = -theta * b / (T::one() - theta);
        let variance = theta * b * b / (T::one() - theta);
        Ok(Self {
            kind: Kind::TwoPoint,
            b,
            support_lo: lo,
            variance,
            edge: Edge::Atom { theta },
            atoms: vec![(lo, T::one() - theta), (b, theta)],
            width: b - lo,
        })
    }

    /// `P{η = ±1} = 1/2`.
    pub fn rademacher() -> Self {
        Self::two_point(T::one(), T::lit(0.5)).expect("valid rademacher")
    }

    /// `b - η = d U^{1/r}` with `d = b (r + 1) / r`, so `E[b - η] = b`.
    pub fn poly_edge(b: T, r: T) -> Result<Self> {
        check_positive("b", b)?;
        check_positive("r", r)?;
        let d = b * (r + T::one()) / r;
        // Var(d V) with V ~ Beta(r, 1)
        let variance = d * d * r / ((r + T::one()) * (r + T::one()) * (r + T::lit(2.0)));
        Ok(Self {
            kind: Kind::PolynomialEdge,
            b,
            support_lo: b - d,
            variance,
            edge: Edge::Power {
                lambda: d.powf(-r),
                r,
            },
            atoms: Vec::new(),
            width: d,
        })
    }

    /// Finite discrete law given as `(point, probability)` pairs.
    pub fn discrete(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.len() < 2 {
            return Err(Error::spec("atoms", "need at least two support points"));
        }
        for &(x, p) in &atoms {
            if !x.is_finite() {
                return Err(Error::spec("atoms", format!("non-finite point {x}")));
            }
            if !(p > T::zero() && p <= T::one()) {
                return Err(Error::spec(
                    "atoms",
                    format!("probability {p} of point {x} not in (0, 1]"),
                ));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite points"));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::spec("atoms", "duplicate support point"));
        }
        let total: CompensatedSum<T> = atoms.iter().map(|a| a.1).collect();
        if (total.value() - T::one()).abs() > T::lit(MASS_TOL) {
            return Err(Error::spec(
                "atoms",
                format!("probabilities sum to {}, not 1", total.value()),
            ));
        }
        let mean: CompensatedSum<T> = atoms.iter().map(|a| a.0 * a.1).collect();
        if mean.value().abs() > T::lit(MASS_TOL) {
            return Err(Error::spec(
                "atoms",
                format!("mean is {}, must be 0", mean.value()),
            ));
        }
        let (b, theta) = *atoms.last().expect("non-empty");
        let lo = atoms[0].0;
        if b <= T::zero() {
            return Err(Error::spec(
                "atoms",
                "largest support point must be positive",
            ));
        }
        let variance: CompensatedSum<T> = atoms.iter().map(|a| a.1 * a.0 * a.0).collect();
        Ok(Self {
            kind: Kind::DiscreteFinite,
            b,
            support_lo: lo,
            variance: variance.value(),
            edge: Edge::Atom { theta },
            atoms,
            width: b - lo,
        })
    }

    /// Standard normal coefficients; sampler sanity only.
    pub fn gaussian_sanity() -> Self {
        Self {
            kind: Kind::GaussianSanity,
            b: T::zero(),
            support_lo: T::neg_infinity(),
            variance: T::one(),
            edge: Edge::Unbounded,
            atoms: Vec::new(),
            width: T::infinity(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Essential supremum; zero for the Gaussian family, where it is unused.
    pub fn b(&self) -> T {
        self.b
    }

    pub fn support_lo(&self) -> T {
        self.support_lo
    }

    /// `b - support_lo`; infinite for the Gaussian family.
    pub fn range(&self) -> T {
        self.width
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn edge(&self) -> Edge<T> {
        self.edge
    }

    pub fn is_bounded(&self) -> bool {
        self.kind != Kind::GaussianSanity
    }

    pub fn is_discrete(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Atom mass at `b` for the atom-edge families.
    pub fn theta(&self) -> Option<T> {
        match self.edge {
            Edge::Atom { theta } => Some(theta),
            _ => None,
        }
    }

    /// `(lambda, r)` for the polynomial-edge family.
    pub fn power_edge(&self) -> Option<(T, T)> {
        match self.edge {
            Edge::Power { lambda, r } => Some((lambda, r)),
            _ => None,
        }
    }

    /// Refuse families without an upper edge.
    pub fn require_bounded(&self, what: &'static str) -> Result<()> {
        if self.is_bounded() {
            Ok(())
        } else {
            Err(Error::Unsupported {
                what,
                family: self.kind.name(),
            })
        }
    }

    /// Exact `P{b - η ≤ x}` for the polynomial-edge family.
    pub fn edge_law_check(&self, x: T) -> Result<T> {
        let Edge::Power { r, .. } = self.edge else {
            return Err(Error::Unsupported {
                what: "edge_law_check",
                family: self.kind.name(),
            });
        };
        if x.is_nan() || x < T::zero() {
            return Err(Error::OutOfDomain {
                what: "x",
                value: x.f64(),
                expected: "[0, d]",
            });
        }
        if x >= self.width {
            return Ok(T::one());
        }
        Ok((x / self.width).powf(r))
    }

    /// Key used by caches; identical specs produce identical keys.
    pub fn cache_key(&self) -> Vec<u64> {
        let mut key = vec![self.kind as u64, self.b.f64().to_bits()];
        if let Edge::Power { r, .. } = self.edge {
            key.push(r.f64().to_bits());
        }
        for &(x, p) in &self.atoms {
            key.push(x.f64().to_bits());
            key.push(p.f64().to_bits());
        }
        key
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self.kind {
            Kind::TwoPoint => {
                let theta = self.theta().unwrap_or(T::zero());
                format!("two_point(b={}, theta={})", self.b, theta)
            }
            Kind::PolynomialEdge => {
                let (_, r) = self.power_edge().unwrap_or((T::zero(), T::zero()));
                format!("poly_edge(b={}, r={})", self.b, r)
            }
            Kind::DiscreteFinite => format!("discrete({} atoms, b={})", self.atoms.len(), self.b),
            Kind::GaussianSanity => "gaussian_sanity".to_string(),
        }
    }
}

fn check_positive<T: Real>(field: &str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::spec(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}
