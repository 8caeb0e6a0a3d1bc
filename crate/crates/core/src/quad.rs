//! Panelled adaptive Gauss–Kronrod (G7/K15) quadrature for real- and
//! complex-valued integrands.

use crate::error::{Error, Result};
use crate::model::C64;
use std::collections::BinaryHeap;

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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Scalar types the integrator accepts.
pub trait Value: Copy {
    fn zero() -> Self;
    fn parts(self) -> (f64, f64);
    fn from_parts(re: f64, im: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn add(self, other: Self) -> Self;
    fn magnitude(self) -> f64;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Value for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        C64::new(re, im)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Neumaier compensated sum of one real component.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn push(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    re: Compensated,
    im: Compensated,
}

impl Accumulator {
    fn push<T: Value>(&mut self, v: T) {
        let (re, im) = v.parts();
        self.re.push(re);
        self.im.push(im);
    }

    fn value<T: Value>(&self) -> T {
        T::from_parts(self.re.value(), self.im.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance for the whole integral.
    pub abs_tol: f64,
    /// Relative tolerance applied per panel.
    pub rel_tol: f64,
    /// Maximal number of bisections beyond the initial panels.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-13, max_subdivisions: 20_000 }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

/// One K15 evaluation with its G7 error estimate.
pub fn gauss_kronrod15<T: Value, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = Accumulator::default();
    let mut gauss = Accumulator::default();
    kron.push(fc.scale(WGK[7]));
    gauss.push(fc.scale(WG[3]));
    for i in 0..7 {
        let dx = hw * XGK[i];
        let s = f(c - dx).add(f(c + dx));
        kron.push(s.scale(WGK[i]));
        if i % 2 == 1 {
            gauss.push(s.scale(WG[i / 2]));
        }
    }
    let k: T = kron.value::<T>().scale(hw);
    let g: T = gauss.value::<T>().scale(hw);
    let (kr, ki) = k.parts();
    let (gr, gi) = g.parts();
    (k, (kr - gr).hypot(ki - gi))
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<T> Eq for Piece<T> {}

impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn piece<T: Value, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Result<Piece<T>> {
    let (value, err) = gauss_kronrod15(f, a, b);
    let (re, im) = value.parts();
    if !(re.is_finite() && im.is_finite() && err.is_finite()) {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(Piece { a, b, value, err })
}

/// Integrates f over [a, b].
///
/// The interval is cut at every point of `breaks` inside (a, b) and each
/// piece is divided into equal panels no wider than `panel_width`. The panel
/// with the largest G7/K15 difference is then bisected until the summed
/// error estimate meets the absolute or relative tolerance.
pub fn integrate<T: Value, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    panel_width: f64,
    cfg: &QuadConfig,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if !(a < b) {
        return Err(Error::Domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(a);
    nodes.extend(cuts);
    nodes.push(b);
    let mut heap = BinaryHeap::new();
    for seg in nodes.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let n = ((hi - lo) / panel_width).ceil().max(1.0) as usize;
        let step = (hi - lo) / n as f64;
        for i in 0..n {
            let pa = lo + step * i as f64;
            let pb = if i + 1 == n { hi } else { lo + step * (i + 1) as f64 };
            heap.push(piece(&f, pa, pb)?);
        }
    }
    let limit = heap.len() + cfg.max_subdivisions;
    let mut err_sum: f64 = heap.iter().map(|p| p.err).sum();
    let mut total: T = sum_values(&heap);
    loop {
        if err_sum <= cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
            err_sum = heap.iter().map(|p| p.err).sum();
            total = sum_values(&heap);
            if err_sum <= cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
                return Ok(total);
            }
        }
        let worst = heap.pop().expect("at least one panel");
        let m = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > limit || m <= worst.a || m >= worst.b {
            return Err(Error::QuadratureFailure { a: worst.a, b: worst.b });
        }
        let left = piece(&f, worst.a, m)?;
        let right = piece(&f, m, worst.b)?;
        err_sum += left.err + right.err - worst.err;
        total = total.add(left.value).add(right.value).add(worst.value.scale(-1.0));
        heap.push(left);
        heap.push(right);
    }
}

fn sum_values<T: Value>(heap: &BinaryHeap<Piece<T>>) -> T {
    let mut acc = Accumulator::default();
    for p in heap.iter() {
        acc.push(p.value);
    }
    acc.value()
}

/// Breakpoints accumulating geometrically towards `at` from the side of `to`,
/// starting at distance `first` and growing by a factor of 4.
pub fn graded_breaks(at: f64, to: f64, first: f64) -> Vec<f64> {
    let span = (to - at).abs();
    let dir = (to - at).signum();
    let mut out = Vec::new();
    let mut d = first.min(span);
    while d < span {
        out.push(at + dir * d);
        d *= 4.0;
    }
    out
}
