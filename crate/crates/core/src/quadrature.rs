//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Interval errors are the raw Gauss/Kronrod difference, which overstates
//! the error of the Kronrod value. The reported `abs_error` is therefore
//! usable as a conservative bound for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

// Kronrod nodes and weights as tabulated, to more digits than f64 holds
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn with_tolerances(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: T,
    pub evaluations: usize,
}

impl<T: Real> std::ops::Add for QuadResult<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        finite &= f1.is_finite() && f2.is_finite();
        let pair = f1 + f2;
        res_k = res_k + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * pair;
        }
    }
    if !finite {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{}, {}]",
            a.f64(),
            b.f64()
        )));
    }
    let value = res_k * half_len;
    let error = ((res_k - res_g) * half_len).abs();
    Ok((value, error))
}

/// Integrate over `[a, b]`, starting from the given interior break points.
pub fn integrate_with_breaks<T, F>(
    mut f: F,
    points: &[T],
    cfg: &QuadConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = kronrod(&mut f, w[0], w[1])?;
        evaluations += 15;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let totals = |heap: &BinaryHeap<Segment<T>>| {
        let v: CompensatedSum<T> = heap.iter().map(|s| s.value).collect();
        let e: T = heap.iter().map(|s| s.error).sum();
        (v.value(), e)
    };
    let (mut value, mut error) = totals(&heap);
    while error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Quadrature(format!(
                "{} intervals exhausted on [{}, {}]: value {:.6e}, error estimate {:.3e}",
                heap.len(),
                points[0].f64(),
                points[points.len() - 1].f64(),
                value.f64(),
                error.f64()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at roundoff resolution: accept as is
            heap.push(Segment {
                error: T::zero(),
                ..worst
            });
            let (v, e) = totals(&heap);
            value = v;
            error = e;
            continue;
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        let (v, e) = totals(&heap);
        value = v;
        error = e;
    }
    Ok(QuadResult {
        value,
        abs_error: error,
        evaluations,
    })
}

pub fn integrate<T, F>(f: F, a: T, b: T, cfg: &QuadConfig<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrate over `[a, ∞)` through `x = a + s/(1 - s)`.
pub fn integrate_to_infinity<T, F>(mut f: F, a: T, cfg: &QuadConfig<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let one = T::one();
    let g = |s: T| {
        let w = one - s;
        let v = f(a + s / w) / (w * w);
        if v.is_finite() {
            v
        } else if s > T::lit(0.5) {
            T::zero()
        } else {
            v
        }
    };
    integrate_with_breaks(
        g,
        &[T::zero(), T::lit(0.5), T::lit(0.9), T::lit(0.99), one],
        cfg,
    )
}
