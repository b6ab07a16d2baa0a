use super::{DistributionSpec, Kind};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::scalar::{CompensatedSum, Real};
use crate::special::tilted_power_law;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CgfMode {
    #[default]
    ClosedForm,
    /// Numerical integration against the law; finite sums for discrete laws.
    Quadrature,
}

/// `ψ` and its derivatives at one point, together with the edge-shifted
/// `L(t) = ψ(t) - b t` and `L'(t)`, which stay accurate when `t b` is huge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgfDerivs<T> {
    pub psi: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
    pub d4: T,
    pub l: T,
    pub l1: T,
    /// `ψ(t) - t ψ'(t)`.
    pub h: T,
}

/// Highest cumulant kept in the small-`t` expansion.
const TAYLOR_ORDER: usize = 8;
/// The expansion is used while `|t| · range` stays below this.
const TAYLOR_RADIUS: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct CgfEval<T> {
    spec: DistributionSpec<T>,
    mode: CgfMode,
    /// `κ_0..=κ_8` of the base law (`κ_0` unused).
    cumulants: Vec<T>,
    taylor_max: T,
}

impl<T: Real> CgfEval<T> {
    pub fn new(spec: DistributionSpec<T>) -> Self {
        Self::with_mode(spec, CgfMode::ClosedForm)
    }

    pub fn with_mode(spec: DistributionSpec<T>, mode: CgfMode) -> Self {
        let (cumulants, taylor_max) = match spec.kind {
            Kind::GaussianSanity => (Vec::new(), T::zero()),
            _ => (base_cumulants(&spec), T::lit(TAYLOR_RADIUS) / spec.width),
        };
        Self {
            spec,
            mode,
            cumulants,
            taylor_max,
        }
    }

    /// Cumulants `κ_1..=κ_8` of the base law; empty for the Gaussian family.
    pub fn base_cumulants(&self) -> &[T] {
        self.cumulants.get(1..).unwrap_or(&[])
    }

    pub fn spec(&self) -> &DistributionSpec<T> {
        &self.spec
    }

    pub fn mode(&self) -> CgfMode {
        self.mode
    }

    /// `ψ^{(order)}(t)` for `order` in `0..=4`.
    pub fn psi(&self, t: T, order: usize) -> Result<T> {
        let d = self.derivs(t)?;
        match order {
            0 => Ok(d.psi),
            1 => Ok(d.d1),
            2 => Ok(d.d2),
            3 => Ok(d.d3),
            4 => Ok(d.d4),
            _ => Err(Error::OutOfDomain {
                what: "order",
                value: order as f64,
                expected: "0..=4",
            }),
        }
    }

    /// `L(t) = log E e^{-t (b - η)}`.
    pub fn log_edge_mgf(&self, t: T) -> Result<T> {
        Ok(self.derivs(t)?.l)
    }

    pub fn derivs(&self, t: T) -> Result<CgfDerivs<T>> {
        if !t.is_finite() {
            return Err(Error::NonFinite {
                what: "t",
                value: t.f64(),
            });
        }
        if t.abs() < self.taylor_max {
            return Ok(self.taylor(t));
        }
        match (self.spec.kind, self.mode) {
            (Kind::TwoPoint, CgfMode::ClosedForm) => Ok(two_point(&self.spec, t)),
            (Kind::TwoPoint | Kind::DiscreteFinite, _) => Ok(finite_sums(&self.spec, t)),
            (Kind::PolynomialEdge, CgfMode::ClosedForm) => Ok(poly_closed(&self.spec, t)),
            (Kind::PolynomialEdge, CgfMode::Quadrature) => poly_quadrature(&self.spec, t),
            (Kind::GaussianSanity, CgfMode::ClosedForm) => Ok(CgfDerivs {
                psi: t * t * T::lit(0.5),
                d1: t,
                d2: T::one(),
                d3: T::zero(),
                d4: T::zero(),
                l: t * t * T::lit(0.5),
                l1: t,
                h: -t * t * T::lit(0.5),
            }),
            (Kind::GaussianSanity, CgfMode::Quadrature) => gaussian_quadrature(t),
        }
    }

    /// Cumulant expansion; avoids the cancellation in `b t + L(t)` near 0.
    fn taylor(&self, t: T) -> CgfDerivs<T> {
        let k = &self.cumulants;
        // powers[i] = t^i / i!
        let mut powers = [T::one(); TAYLOR_ORDER + 1];
        for i in 1..=TAYLOR_ORDER {
            powers[i] = powers[i - 1] * t / T::from_usize_lossy(i);
        }
        let mut out = [T::zero(); 5];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for n in (j.max(1)..=TAYLOR_ORDER).rev() {
                acc = acc + k[n] * powers[n - j];
            }
            *o = acc;
        }
        let mut h = T::zero();
        let mut pow = T::one();
        let mut fact = T::one();
        for (n, kn) in k.iter().enumerate().skip(1) {
            pow = pow * t;
            fact = fact * T::from_usize_lossy(n);
            h = h - *kn * pow * T::from_usize_lossy(n - 1) / fact;
        }
        let b = self.spec.b;
        CgfDerivs {
            psi: out[0],
            d1: out[1],
            d2: out[2],
            d3: out[3],
            d4: out[4],
            l: out[0] - b * t,
            l1: out[1] - b,
            h,
        }
    }
}

/// Cumulants `κ_0..=κ_8` from central moments (shift-invariant for `n ≥ 2`).
fn base_cumulants<T: Real>(spec: &DistributionSpec<T>) -> Vec<T> {
    let n_max = TAYLOR_ORDER;
    let central: Vec<T> = match spec.kind {
        Kind::PolynomialEdge => {
            // η = b - d V, V ~ Beta(r, 1), E V^j = r / (r + j)
            let (_, r) = spec.power_edge().expect("poly edge");
            let raw: Vec<T> = (0..=n_max)
                .map(|j| r / (r + T::from_usize_lossy(j)))
                .collect();
            let mu = raw[1];
            let d = spec.width;
            (0..=n_max)
                .map(|n| {
                    let mut acc = CompensatedSum::new();
                    let mut binom = T::one();
                    for (j, &m) in raw.iter().enumerate().take(n + 1) {
                        if j > 0 {
                            binom = binom * T::from_usize_lossy(n + 1 - j) / T::from_usize_lossy(j);
                        }
                        acc.add(binom * m * (-mu).powi((n - j) as i32));
                    }
                    acc.value() * (-d).powi(n as i32)
                })
                .collect()
        }
        _ => {
            let mean: CompensatedSum<T> = spec.atoms.iter().map(|a| a.0 * a.1).collect();
            let mean = mean.value();
            (0..=n_max)
                .map(|n| {
                    let c: CompensatedSum<T> = spec
                        .atoms
                        .iter()
                        .map(|a| a.1 * (a.0 - mean).powi(n as i32))
                        .collect();
                    c.value()
                })
                .collect()
        }
    };
    let mut k = vec![T::zero(); n_max + 1];
    // κ_n = μ_n - Σ_{m=2}^{n-2} C(n-1, m-1) κ_m μ_{n-m}
    for n in 2..=n_max {
        let mut acc = central[n];
        let mut binom = T::one();
        for m in 1..n {
            if m > 1 {
                binom = binom * T::from_usize_lossy(n - m + 1) / T::from_usize_lossy(m - 1);
            }
            if m >= 2 && n - m >= 2 {
                acc = acc - binom * k[m] * central[n - m];
            }
        }
        k[n] = acc;
    }
    // κ_1 = 0 exactly: a rounding-level mean would be summed against the
    // divergent Σ k^{-α} in the series tails
    k[1] = T::zero();
    k
}

fn two_point<T: Real>(spec: &DistributionSpec<T>, t: T) -> CgfDerivs<T> {
    let (a, pa) = spec.atoms[0];
    let (b, theta) = spec.atoms[1];
    let w = b - a;
    // logit of the tilted mass at b
    let z = (theta / pa).ln() + t * w;
    let (p, q) = if z >= T::zero() {
        let e = (-z).exp();
        (T::one() / (T::one() + e), e / (T::one() + e))
    } else {
        let e = z.exp();
        (e / (T::one() + e), T::one() / (T::one() + e))
    };
    // written through expm1 so that L(0) = 0 exactly
    let l = if t >= T::zero() {
        (pa * (-t * w).exp_m1()).ln_1p()
    } else {
        -t * w + (theta * (t * w).exp_m1()).ln_1p()
    };
    let pq = p * q;
    // p - θ without cancelling against b
    let shifted = if t >= T::zero() {
        let e = (-t * w).exp();
        theta * pa * -(-t * w).exp_m1() / (theta + pa * e)
    } else {
        theta * pa * (t * w).exp_m1() / (T::one() + theta * (t * w).exp_m1())
    };
    CgfDerivs {
        psi: b * t + l,
        d1: shifted * w,
        d2: pq * w * w,
        d3: pq * (q - p) * w * w * w,
        d4: pq * (T::one() - T::lit(6.0) * pq) * w * w * w * w,
        l,
        l1: -q * w,
        h: l + t * q * w,
    }
}

fn finite_sums<T: Real>(spec: &DistributionSpec<T>, t: T) -> CgfDerivs<T> {
    let b = spec.b;
    // exponents relative to the largest one, which sits at an end point
    let shift = if t >= T::zero() { b } else { spec.support_lo };
    let lw = |&(x, p): &(T, T)| p.ln() + t * (x - shift);
    let max = spec.atoms.iter().map(lw).fold(T::neg_infinity(), T::max);
    let z: CompensatedSum<T> = spec.atoms.iter().map(|a| (lw(a) - max).exp()).collect();
    let log_z = max + z.value().ln();
    let probs = || spec.atoms.iter().map(move |a| (a.0, (lw(a) - log_z).exp()));
    let l1: CompensatedSum<T> = probs().map(|(x, p)| p * (x - b)).collect();
    let l1 = l1.value();
    let mean = b + l1;
    let (mut c2, mut c3, mut c4) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for (x, p) in probs() {
        let dx = x - mean;
        let p2 = p * dx * dx;
        c2.add(p2);
        c3.add(p2 * dx);
        c4.add(p2 * dx * dx);
    }
    let var = c2.value();
    let l = t * (shift - b) + log_z;
    CgfDerivs {
        psi: b * t + l,
        d1: mean,
        d2: var,
        d3: c3.value(),
        d4: c4.value() - T::lit(3.0) * var * var,
        l,
        l1,
        h: l - t * l1,
    }
}

fn poly_closed<T: Real>(spec: &DistributionSpec<T>, t: T) -> CgfDerivs<T> {
    let (b, d) = (spec.b, spec.width);
    let (_, r) = spec.power_edge().expect("poly edge");
    let c = tilted_power_law(r, t * d);
    let d2 = d * d;
    CgfDerivs {
        psi: b * t + c.log_mgf,
        d1: b - d * c.mean,
        d2: d2 * c.var,
        d3: -d2 * d * c.k3,
        d4: d2 * d2 * c.k4,
        l: c.log_mgf,
        l1: -d * c.mean,
        h: c.log_mgf + t * d * c.mean,
    }
}

/// Tilted moments of `V` (base density `r v^{r-1}` on `[0,1]`) by
/// integrating over `u` with `v = u^{1/r}`.
fn poly_quadrature<T: Real>(spec: &DistributionSpec<T>, t: T) -> Result<CgfDerivs<T>> {
    let (b, d) = (spec.b, spec.width);
    let (_, r) = spec.power_edge().expect("poly edge");
    let s = t * d;
    let inv_r = T::one() / r;
    let v_of = |u: T| u.powf(inv_r);
    // reference point of the exponent so that the weight stays in (0, 1]
    let v_ref = if s >= T::zero() { T::zero() } else { T::one() };
    let weight = |u: T| (-s * (v_of(u) - v_ref)).exp();
    let mut breaks = vec![T::zero()];
    for c in [1.0, 5.0, 20.0, 60.0] {
        let c = T::lit(c);
        if s.abs() > c {
            let u = if s > T::zero() {
                (c / s).powf(r)
            } else {
                (T::one() - c / -s).powf(r)
            };
            breaks.push(u);
        }
    }
    breaks.push(T::one());
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite break points"));
    let cfg = QuadConfig::with_tolerances(T::lit(1e-300), T::lit(1e-12));
    let z = integrate_with_breaks(weight, &breaks, &cfg)?.value;
    let mean = integrate_with_breaks(|u| weight(u) * v_of(u), &breaks, &cfg)?.value / z;
    let central = |k: i32, abs_tol: T| -> Result<T> {
        let cfg = QuadConfig::with_tolerances(abs_tol, T::lit(1e-12));
        Ok(
            integrate_with_breaks(|u| weight(u) * (v_of(u) - mean).powi(k), &breaks, &cfg)?.value
                / z,
        )
    };
    let c2 = central(2, T::lit(1e-300))?;
    let tol = |k: i32| T::lit(1e-13) * z * c2.powi(k).sqrt();
    let (c3, c4) = (central(3, tol(3))?, central(4, tol(4))?);
    let l = -s * v_ref + z.ln();
    let d2 = d * d;
    Ok(CgfDerivs {
        psi: b * t + l,
        d1: b - d * mean,
        d2: d2 * c2,
        d3: -d2 * d * c3,
        d4: d2 * d2 * (c4 - T::lit(3.0) * c2 * c2),
        l,
        l1: -d * mean,
        h: l + t * d * mean,
    })
}

fn gaussian_quadrature<T: Real>(t: T) -> Result<CgfDerivs<T>> {
    // tilted law N(t, 1); integrate in the centred variable
    let w = |y: T| (-(y * y) * T::lit(0.5)).exp();
    let breaks: Vec<T> = [-40.0, -8.0, -2.0, 0.0, 2.0, 8.0, 40.0]
        .iter()
        .map(|&v| T::lit(v))
        .collect();
    let cfg = QuadConfig::with_tolerances(T::lit(1e-300), T::lit(1e-12));
    let z = integrate_with_breaks(w, &breaks, &cfg)?.value;
    let shift_cfg = QuadConfig::with_tolerances(T::lit(1e-13) * z, T::lit(1e-12));
    let shift = integrate_with_breaks(|y| w(y) * y, &breaks, &shift_cfg)?.value / z;
    let c = |k: i32| -> Result<T> {
        let cfg = QuadConfig::with_tolerances(T::lit(1e-13) * z, T::lit(1e-12));
        Ok(integrate_with_breaks(|y| w(y) * (y - shift).powi(k), &breaks, &cfg)?.value / z)
    };
    let (c2, c3, c4) = (c(2)?, c(3)?, c(4)?);
    let psi = t * t * T::lit(0.5) + (z / (T::lit(2.0) * T::PI()).sqrt()).ln();
    Ok(CgfDerivs {
        psi,
        d1: t + shift,
        d2: c2,
        d3: c3,
        d4: c4 - T::lit(3.0) * c2 * c2,
        l: psi,
        l1: t + shift,
        h: psi - t * (t + shift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulants_of_three_point_law() {
        // sympy series of log(e^{2t}/4 + e^{-t}/2 + 1/4)
        let spec =
            DistributionSpec::<f64>::discrete(vec![(2.0, 0.25), (-1.0, 0.5), (0.0, 0.25)]).unwrap();
        let c = CgfEval::new(spec);
        let expected = [
            0.0,
            1.5,
            1.5,
            -2.25,
            -15.0,
            -6.0,
            1071.0 / 4.0,
            7887.0 / 8.0,
        ];
        for (got, want) in c.base_cumulants().iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn taylor_branch_joins_closed_form() {
        for spec in [
            DistributionSpec::<f64>::two_point(2.0, 0.3).unwrap(),
            DistributionSpec::poly_edge(1.0, 2.0).unwrap(),
            DistributionSpec::poly_edge(1.0, 0.5).unwrap(),
        ] {
            let c = CgfEval::new(spec.clone());
            let edge = TAYLOR_RADIUS / spec.range();
            let inside = c.derivs(edge * (1.0 - 1e-15)).unwrap();
            let outside = c.derivs(edge).unwrap();
            for (a, b) in [
                (inside.psi, outside.psi),
                (inside.d1, outside.d1),
                (inside.d2, outside.d2),
                (inside.h, outside.h),
            ] {
                // the closed form loses digits to b t + L(t) here; that is the point of the switch
                assert!(
                    (a - b).abs() < 1e-10 * a.abs(),
                    "{}: {a} vs {b}",
                    spec.label()
                );
            }
            assert!((inside.d3 - outside.d3).abs() < 1e-8 * inside.d3.abs().max(inside.d2));
        }
    }

    #[test]
    fn small_argument_relative_accuracy() {
        // Rademacher: ψ = log cosh t, ψ' = tanh t, ψ - tψ' exactly representable via series
        let c = CgfEval::new(DistributionSpec::<f64>::rademacher());
        let t = 1e-6;
        let d = c.derivs(t).unwrap();
        assert!(rel(d.psi, t * t / 2.0 - t.powi(4) / 12.0) < 1e-14);
        assert!(rel(d.d1, t.tanh()) < 1e-14);
        assert!(rel(d.h, -t * t / 2.0 + t.powi(4) / 4.0) < 1e-14);
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rademacher_closed_form_matches_log_cosh() {
        let c = CgfEval::new(DistributionSpec::<f64>::rademacher());
        assert_eq!(c.psi(0.0, 0).unwrap(), 0.0);
        for &t in &[0.3, 1.0, 4.0, -2.5] {
            let d = c.derivs(t).unwrap();
            assert!(rel(d.psi, f64::cosh(t).ln()) < 1e-14);
            assert!(rel(d.d1, t.tanh()) < 1e-14);
            assert!(rel(d.d2, 1.0 - t.tanh().powi(2)) < 1e-12);
            let th = t.tanh();
            assert!(rel(d.d3, -2.0 * th * (1.0 - th * th)) < 1e-12);
        }
    }

    #[test]
    fn closed_form_and_sums_agree() {
        let c = CgfEval::new(DistributionSpec::<f64>::two_point(2.0, 0.3).unwrap());
        let q = CgfEval::with_mode(
            DistributionSpec::two_point(2.0, 0.3).unwrap(),
            CgfMode::Quadrature,
        );
        for &t in &[-3.0, 0.0, 0.01, 1.0, 10.0, 300.0] {
            let a = c.derivs(t).unwrap();
            let b = q.derivs(t).unwrap();
            for (x, y) in [
                (a.psi, b.psi),
                (a.d1, b.d1),
                (a.d2, b.d2),
                (a.l, b.l),
                (a.l1, b.l1),
            ] {
                assert!(
                    (x - y).abs() <= 1e-12 * x.abs() + 1e-15,
                    "t={t}: {x} vs {y}"
                );
            }
            assert!((a.d3 - b.d3).abs() <= 1e-10 * a.d3.abs() + 1e-300, "t={t}");
            assert!((a.d4 - b.d4).abs() <= 1e-9 * a.d4.abs() + 1e-300, "t={t}");
        }
    }

    #[test]
    fn poly_closed_form_and_quadrature_agree() {
        for r in [0.5, 1.0, 2.0, 3.5] {
            let spec = DistributionSpec::<f64>::poly_edge(1.0, r).unwrap();
            let c = CgfEval::new(spec.clone());
            let q = CgfEval::with_mode(spec, CgfMode::Quadrature);
            for &t in &[-5.0, 0.0, 0.5, 3.0, 40.0, 500.0] {
                let a = c.derivs(t).unwrap();
                let b = q.derivs(t).unwrap();
                assert!(
                    (a.psi - b.psi).abs() < 1e-9 * a.psi.abs().max(1.0),
                    "r={r} t={t}"
                );
                assert!(rel(a.d2, b.d2) < 1e-8, "r={r} t={t}: {} vs {}", a.d2, b.d2);
                assert!(
                    (a.d3 - b.d3).abs() < 1e-7 * a.d3.abs().max(a.d2),
                    "r={r} t={t}"
                );
                assert!((a.l1 - b.l1).abs() < 1e-9 * a.l1.abs(), "r={r} t={t}");
            }
        }
    }

    #[test]
    fn large_t_uses_edge_decomposition() {
        let c = CgfEval::new(DistributionSpec::<f64>::rademacher());
        let d = c.derivs(50.0).unwrap();
        assert!((d.psi - (50.0 + 0.5f64.ln())).abs() < 1e-10);
        let d = c.derivs(1e6).unwrap();
        assert!(d.psi.is_finite() && d.d2 >= 0.0);
        assert!(c.derivs(f64::NAN).is_err());
        assert!(c.psi(1.0, 5).is_err());
    }

    #[test]
    fn gaussian_quadrature_matches_closed_form() {
        let q = CgfEval::with_mode(
            DistributionSpec::<f64>::gaussian_sanity(),
            CgfMode::Quadrature,
        );
        let d = q.derivs(1.7).unwrap();
        assert!((d.psi - 1.445).abs() < 1e-10);
        assert!((d.d1 - 1.7).abs() < 1e-10);
        assert!((d.d2 - 1.0).abs() < 1e-10);
        assert!(d.d3.abs() < 1e-9);
    }
}
