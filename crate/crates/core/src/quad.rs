//! Adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Panels are refined greedily: the panel with the largest error estimate is
//! bisected until the global estimate drops below `max(abs, rel * |I|)`.
//! Oscillatory integrands should be seeded with enough initial panels that
//! each one holds at most a few oscillations; the caller knows the scale and
//! passes it via `panels` (or explicit breakpoints).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::real::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_734_012_090,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values a quadrature can accumulate: real scalars and complex numbers.
pub trait QuadValue<T: Real>:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> + Send + Sync
{
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    #[inline]
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    #[inline]
    fn magnitude(self) -> T {
        self.norm()
    }
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    /// Upper bound on the number of panels held at once.
    pub max_panels: usize,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs: T::lit(1e-14),
            rel: T::lit(1e-10),
            max_panels: 200_000,
        }
    }
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T, V> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
    pub panels: usize,
}

struct Panel<T, V> {
    a: T,
    b: T,
    value: V,
    error: T,
    /// Rounding-noise floor of `error`; only `error − floor` can be refined away.
    floor: T,
}

impl<T: Real, V> Panel<T, V> {
    fn reducible(&self) -> T {
        (self.error - self.floor).max(T::zero())
    }
}

impl<T: Real, V> PartialEq for Panel<T, V> {
    fn eq(&self, other: &Self) -> bool {
        self.reducible() == other.reducible()
    }
}
impl<T: Real, V> Eq for Panel<T, V> {}
impl<T: Real, V> PartialOrd for Panel<T, V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real, V> Ord for Panel<T, V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.reducible()
            .partial_cmp(&other.reducible())
            .unwrap_or(Ordering::Equal)
    }
}

/// One K21 panel with the QUADPACK error heuristic.
fn kronrod21<T, V, F>(f: &F, a: T, b: T) -> (V, T, T)
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = f(center);
    let mut kron = fc * T::lit(WGK[10]);
    let mut gauss = V::zero();
    let mut abs_sum = fc.magnitude() * T::lit(WGK[10]);
    let mut fv = [(V::zero(), V::zero()); 10];
    for (j, item) in fv.iter_mut().enumerate() {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let w = T::lit(WGK[j]);
        kron = kron + (f1 + f2) * w;
        abs_sum = abs_sum + (f1.magnitude() + f2.magnitude()) * w;
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * T::lit(WG[j / 2]);
        }
        *item = (f1, f2);
    }
    // Mean absolute deviation from the panel mean, as in QUADPACK's resasc.
    let mean = kron * T::lit(0.5);
    let mut asc = (fc - mean).magnitude() * T::lit(WGK[10]);
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc = asc + ((*f1 - mean).magnitude() + (*f2 - mean).magnitude()) * T::lit(WGK[j]);
    }
    let h = half.abs();
    let value = kron * half;
    let asc = asc * h;
    let abs_sum = abs_sum * h;
    let mut err = (kron - gauss).magnitude() * h;
    if asc > T::zero() && err > T::zero() {
        let scale = (T::lit(200.0) * err / asc).powf(T::lit(1.5));
        err = asc * scale.min(T::one());
    }
    let mut floor = T::zero();
    if abs_sum > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        floor = T::lit(50.0) * T::epsilon() * abs_sum;
        err = err.max(floor);
    }
    (value, err, floor)
}

/// Integrates `f` over `[a, b]`, starting from `panels` equal subintervals.
pub fn integrate<T, V, F>(f: F, a: T, b: T, panels: usize, tol: &Tolerance<T>) -> Result<Quadrature<T, V>>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let n = panels.max(1);
    let step = (b - a) / T::from_count(n);
    let points: Vec<T> = (0..=n)
        .map(|i| if i == n { b } else { a + step * T::from_count(i) })
        .collect();
    integrate_breakpoints(f, &points, tol)
}

/// Integrates `f` over consecutive panels delimited by `points` (ascending).
pub fn integrate_breakpoints<T, V, F>(f: F, points: &[T], tol: &Tolerance<T>) -> Result<Quadrature<T, V>>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    if points.len() < 2 {
        return Ok(Quadrature {
            value: V::zero(),
            error: T::zero(),
            evaluations: 0,
            panels: 0,
        });
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        let (value, error, floor) = kronrod21(&f, w[0], w[1]);
        evaluations += 21;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            floor,
        });
    }
    loop {
        let (total, total_err, reducible) = heap.iter().fold((V::zero(), T::zero(), T::zero()), |(v, e, r), p| {
            (v + p.value, e + p.error, r + p.reducible())
        });
        let target = tol.abs.max(tol.rel * total.magnitude());
        // Once what is left is rounding noise, further bisection cannot help.
        if total_err <= target || reducible <= target {
            return Ok(Quadrature {
                value: total,
                error: total_err,
                evaluations,
                panels: heap.len(),
            });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::QuadratureLimit {
                estimate: total.magnitude().to_f64_lossy(),
                error: total_err.to_f64_lossy(),
                evaluations,
            });
        }
        // Refine a batch: every panel whose error exceeds its fair share.
        let fair = target / T::from_count(heap.len());
        let mut split = Vec::new();
        while let Some(top) = heap.peek() {
            if top.reducible() <= fair && !split.is_empty() {
                break;
            }
            let p = heap.pop().expect("peeked");
            split.push(p);
            if split.len() >= 64 || heap.is_empty() {
                break;
            }
        }
        let mut exhausted = false;
        for p in split {
            let mid = (p.a + p.b) * T::lit(0.5);
            if !(mid > p.a.min(p.b) && mid < p.a.max(p.b)) {
                // Panel at machine resolution; keep it and stop refining.
                exhausted = true;
                heap.push(p);
                continue;
            }
            let (v1, e1, r1) = kronrod21(&f, p.a, mid);
            let (v2, e2, r2) = kronrod21(&f, mid, p.b);
            evaluations += 42;
            heap.push(Panel {
                a: p.a,
                b: mid,
                value: v1,
                error: e1,
                floor: r1,
            });
            heap.push(Panel {
                a: mid,
                b: p.b,
                value: v2,
                error: e2,
                floor: r2,
            });
        }
        if exhausted {
            let (total, total_err) = heap
                .iter()
                .fold((V::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
            return Err(Error::QuadratureLimit {
                estimate: total.magnitude().to_f64_lossy(),
                error: total_err.to_f64_lossy(),
                evaluations,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomials_integrate_exactly() {
        let tol = Tolerance::default();
        for p in 0..20 {
            let q = integrate(|x: f64| x.powi(p), 0.0, 1.0, 1, &tol).unwrap();
            assert!((q.value - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn oscillatory_integral() {
        // ∫_0^{100π} sin²(x) dx = 50π
        let q = integrate(|x: f64| x.sin().powi(2), 0.0, 100.0 * PI, 50, &Tolerance::default()).unwrap();
        assert!((q.value - 50.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 x^{-1/2} dx = 2
        let tol = Tolerance::new(1e-12, 1e-10);
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1, &tol).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^{2π} e^{i x} dx = 0, ∫_0^π e^{ix} dx = 2i
        let q = integrate(|x: f64| Complex::new(0.0, x).exp(), 0.0, PI, 4, &Tolerance::default()).unwrap();
        assert!((q.value - Complex::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn single_precision_works() {
        let q = integrate(
            |x: f32| x.cos(),
            0.0,
            std::f32::consts::FRAC_PI_2,
            2,
            &Tolerance::new(1e-6, 1e-6),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let q = integrate(|x: f64| x, 1.0, 0.0, 3, &Tolerance::default()).unwrap();
        assert!((q.value + 0.5).abs() < 1e-15);
    }
}
