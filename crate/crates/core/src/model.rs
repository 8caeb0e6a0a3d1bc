//! Model parameters, the complex single-mode dispersion Λ(k) and per-mode
//! Bogoliubov data.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type C64 = Complex64;

/// Default relative tolerance for deciding that γ lies on the critical curve.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Coupling J, real field h and imaginary-field scale γ of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub h: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(j: f64, h: f64, gamma: f64) -> Result<Self> {
        if !(j.is_finite() && h.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if j <= 0.0 {
            return Err(Error::InvalidParams(format!("J must be positive, got {j}")));
        }
        if h < 0.0 {
            return Err(Error::InvalidParams(format!("h must be nonnegative, got {h}")));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be nonnegative, got {gamma}")));
        }
        Ok(Self { j, h, gamma })
    }

    /// Same (h, γ) in units where J = 1.
    pub fn scaled(&self) -> Self {
        Self { j: 1.0, h: self.h / self.j, gamma: self.gamma / self.j }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..*self }
    }

    /// γ_c(h) = 4J√(1 − h²/J²) for h < J, zero otherwise.
    pub fn gamma_critical(&self) -> f64 {
        if self.h < self.j {
            let r = self.h / self.j;
            4.0 * self.j * ((1.0 - r) * (1.0 + r)).sqrt()
        } else {
            0.0
        }
    }

    /// Soft-mode wavenumber q = arccos(h/J), defined for h ≤ J.
    pub fn q(&self) -> Option<f64> {
        (self.h <= self.j).then(|| (self.h / self.j).acos())
    }

    /// True when Γ(k) is bounded away from zero (regions II and III).
    pub fn is_gapped(&self) -> bool {
        matches!(classify_static(self, CRITICAL_TOL).region, Region::II | Region::III)
    }

    /// True in the gapless region I.
    pub fn is_gapless(&self) -> bool {
        classify_static(self, CRITICAL_TOL).region == Region::I
    }
}

/// Λ(k) = E(k) + iΓ(k) with Γ(k) ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub k: f64,
    pub e: f64,
    pub gamma: f64,
}

impl SpectrumPoint {
    pub fn lambda(&self) -> C64 {
        C64::new(self.e, self.gamma)
    }
}

/// Complex Bloch vector (Rx, 0, Rz) of the mode matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub rx: C64,
    pub rz: C64,
}

/// Ratio τ = v/u, which is infinite at the degenerate points k = 0, π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Finite(C64),
    Infinite,
}

impl Tau {
    pub fn finite(&self) -> Option<C64> {
        match *self {
            Tau::Finite(t) => Some(t),
            Tau::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Tau::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovCoeffs {
    pub u: C64,
    pub v: C64,
    pub tau: Tau,
    pub f: C64,
    pub w: f64,
}

/// Static phase regions of the (h, γ) plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    I,
    II,
    III,
    IV,
    HermitianLine,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::HermitianLine => "hermitian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRegion {
    pub region: Region,
    pub q: Option<f64>,
}

/// a/b by Smith's scaling, free of the overflow and underflow of |b|².
pub fn cdiv(a: C64, b: C64) -> C64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let den = b.re + b.im * r;
        C64::new((a.re + a.im * r) / den, (a.im - a.re * r) / den)
    } else {
        let r = b.re / b.im;
        let den = b.im + b.re * r;
        C64::new((a.re * r + a.im) / den, (a.im * r - a.re) / den)
    }
}

/// Square root with full relative accuracy in both components.
pub fn csqrt(z: C64) -> C64 {
    if z.re == 0.0 && z.im == 0.0 {
        return C64::new(0.0, z.im);
    }
    let s = ((z.norm() + z.re.abs()) / 2.0).sqrt();
    if z.re >= 0.0 {
        C64::new(s, z.im / (2.0 * s))
    } else {
        C64::new(z.im.abs() / (2.0 * s), s.copysign(z.im))
    }
}

/// Per-mode data evaluated from (cos k, sin k).
///
/// Taking the trigonometric pair rather than k keeps full resolution next to
/// k = π, where k itself cannot be represented closer than one ulp of π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub cos: f64,
    pub sin: f64,
    /// h − J cos k
    pub d: f64,
    pub rx: f64,
    pub rz: C64,
    pub lambda: C64,
    /// Λ + Rz
    pub plus: C64,
    /// Λ − Rz
    pub minus: C64,
}

impl Mode {
    pub fn new(p: &ModelParams, cos: f64, sin: f64) -> Self {
        let d = p.h - p.j * cos;
        let rx = 2.0 * p.j * sin;
        let rz = C64::new(2.0 * d, p.gamma / 2.0);
        let root = csqrt(rz * rz + rx * rx);
        let mut lambda = if d > 0.0 { -root } else { root };
        if lambda.im > 0.0 {
            lambda = -lambda;
        }
        if lambda.re == 0.0 && lambda.im == 0.0 {
            lambda = C64::new(0.0, -0.0);
        }
        let mut plus = lambda + rz;
        let mut minus = lambda - rz;
        if plus.norm() < minus.norm() {
            plus = if minus.norm() > 0.0 { cdiv(C64::new(rx * rx, 0.0), minus) } else { C64::new(0.0, 0.0) };
        } else if plus.norm() > 0.0 {
            minus = cdiv(C64::new(rx * rx, 0.0), plus);
        }
        Self { cos, sin, d, rx, rz, lambda, plus, minus }
    }

    /// Mode at wavenumber k; k = ±π (as f64) is taken as the exact zone edge.
    pub fn at(p: &ModelParams, k: f64) -> Self {
        if k.abs() == PI {
            return Self::new(p, -1.0, 0.0);
        }
        Self::new(p, k.cos(), k.sin())
    }

    pub fn tau(&self) -> Tau {
        if self.plus.norm() >= self.rx.abs() {
            if self.plus.norm() == 0.0 {
                Tau::Infinite
            } else {
                Tau::Finite(cdiv(C64::new(self.rx, 0.0), self.plus))
            }
        } else {
            Tau::Finite(self.minus / self.rx)
        }
    }

    /// w = |τ|²/(1 + |τ|²).
    pub fn weight(&self) -> f64 {
        let a = self.plus.norm_sqr();
        let b = self.rx * self.rx;
        if a + b == 0.0 {
            return 1.0;
        }
        if a >= b {
            let r = b / a;
            r / (1.0 + r)
        } else {
            let r = a / b;
            1.0 / (1.0 + r)
        }
    }

    /// f = 1 + Rz/Λ.
    pub fn f(&self) -> C64 {
        cdiv(self.plus, self.lambda)
    }

    pub fn coeffs(&self) -> BogoliubovCoeffs {
        let tau = self.tau();
        let one = C64::new(1.0, 0.0);
        let (u, v) = match tau {
            Tau::Infinite => (C64::new(0.0, 0.0), one),
            Tau::Finite(t) if t.norm() <= 1.0 => {
                let u = one / csqrt(one + t * t);
                (u, t * u)
            }
            Tau::Finite(t) => {
                let s = one / t;
                let v = one / csqrt(one + s * s);
                (s * v, v)
            }
        };
        BogoliubovCoeffs { u, v, tau, f: self.f(), w: self.weight() }
    }

    /// Γ(k), the imaginary part of Λ.
    pub fn decay(&self) -> f64 {
        self.lambda.im
    }

    pub fn energy(&self) -> f64 {
        self.lambda.re
    }
}

/// Λ(k) on the branch with Γ(k) ≤ 0.
pub fn lambda_spectrum(k: f64, p: &ModelParams) -> SpectrumPoint {
    let m = Mode::at(p, k);
    SpectrumPoint { k, e: m.lambda.re, gamma: m.lambda.im }
}

pub fn bloch_vector(k: f64, p: &ModelParams) -> BlochVector {
    let m = Mode::at(p, k);
    BlochVector { rx: C64::new(m.rx, 0.0), rz: m.rz }
}

pub fn gamma_critical(p: &ModelParams) -> f64 {
    p.gamma_critical()
}

pub fn classify_static(p: &ModelParams, tol: f64) -> PhaseRegion {
    let q = p.q();
    if p.gamma == 0.0 {
        return PhaseRegion { region: Region::HermitianLine, q };
    }
    let gc = p.gamma_critical();
    let region = if p.h > p.j {
        Region::III
    } else if p.h < p.j && (p.gamma - gc).abs() <= tol * gc {
        Region::IV
    } else if p.h < p.j && p.gamma < gc {
        Region::I
    } else {
        Region::II
    };
    PhaseRegion { region, q }
}

pub fn bogoliubov_coeffs(k: f64, p: &ModelParams) -> BogoliubovCoeffs {
    Mode::at(p, k).coeffs()
}

/// Mode with the slowest decay, k̄ = arccos(16hJ/(16h² + γ²)).
pub fn slowest_mode_kbar(p: &ModelParams) -> Result<f64> {
    if !p.is_gapped() {
        return Err(Error::GaplessPhase);
    }
    let c = 16.0 * p.h * p.j / (16.0 * p.h * p.h + p.gamma * p.gamma);
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Anti-periodic momentum grid k_n = (2π/N)(n + 1/2 − ⌈(N−1)/2⌉), n = 0..N−1.
pub fn abc_momenta(n: usize) -> Result<Vec<f64>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Domain(format!("site count must be even and at least 2, got {n}")));
    }
    let shift = (n as f64 - 1.0) / 2.0;
    let shift = shift.ceil();
    Ok((0..n).map(|i| 2.0 * PI / n as f64 * (i as f64 + 0.5 - shift)).collect())
}

/// Energy of the right vacuum, E_Ω = −Σ_{k>0} Λ(k).
pub fn vacuum_energy(p: &ModelParams, ks: &[f64]) -> C64 {
    -ks.iter().filter(|&&k| k > 0.0).map(|&k| Mode::at(p, k).lambda).sum::<C64>()
}

/// Λ(k), Λ'(k) and Λ''(k) from the analytic derivatives of Λ².
pub fn lambda_derivatives(p: &ModelParams, k: f64) -> (C64, C64, C64) {
    let m = Mode::at(p, k);
    let s = C64::new(2.0 * p.h, p.gamma / 2.0);
    let dp = 4.0 * p.j * m.sin * s;
    let ddp = 4.0 * p.j * m.cos * s;
    let l = m.lambda;
    let d1 = dp / (2.0 * l);
    let d2 = (ddp - 2.0 * d1 * d1) / (2.0 * l);
    (l, d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn lambda_endpoints() {
        let p = ModelParams::new(1.0, 0.5, 1.0).unwrap();
        assert!(close(lambda_spectrum(0.0, &p).lambda(), C64::new(1.0, -0.5), 1e-14));
        assert!(close(lambda_spectrum(PI, &p).lambda(), C64::new(-3.0, -0.5), 1e-14));
    }

    #[test]
    fn exceptional_point_on_critical_curve() {
        let h = 0.2;
        let p0 = ModelParams::new(1.0, h, 0.0).unwrap();
        let p = p0.with_gamma(p0.gamma_critical());
        let l = lambda_spectrum(h.acos(), &p).lambda();
        assert!(l.norm() < 1e-7, "{l}");
    }

    #[test]
    fn gamma_critical_values() {
        let p = |h| ModelParams::new(1.0, h, 0.0).unwrap().gamma_critical();
        assert_eq!(p(0.0), 4.0);
        assert_eq!(p(1.0), 0.0);
        assert!((p(0.2) - 3.919_183_588_453_085).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let c = |h, g| classify_static(&ModelParams::new(1.0, h, g).unwrap(), CRITICAL_TOL).region;
        assert_eq!(c(0.5, 1.0), Region::I);
        assert_eq!(c(1.5, 4.0), Region::III);
        assert_eq!(c(0.5, 4.0), Region::II);
        assert_eq!(c(1.0, 1.0), Region::II);
        assert_eq!(c(0.5, 0.0), Region::HermitianLine);
        let gc = ModelParams::new(1.0, 0.3, 0.0).unwrap().gamma_critical();
        assert_eq!(c(0.3, gc), Region::IV);
    }

    #[test]
    fn symmetric_two_level_point() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let b = bogoliubov_coeffs(PI / 2.0, &p);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(b.u, C64::new(r, 0.0), 1e-14));
        assert!(close(b.v, C64::new(r, 0.0), 1e-14));
        assert!(close(b.tau.finite().unwrap(), C64::new(1.0, 0.0), 1e-14));
    }

    #[test]
    fn degenerate_points_have_unit_weight() {
        let p = ModelParams::new(1.0, 0.5, 1.0).unwrap();
        for k in [0.0, PI] {
            let b = bogoliubov_coeffs(k, &p);
            assert!(b.tau.is_infinite());
            assert_eq!(b.w, 1.0);
            assert_eq!(b.u, C64::new(0.0, 0.0));
            assert_eq!(b.v, C64::new(1.0, 0.0));
        }
        let b = bogoliubov_coeffs(1e-6, &p);
        assert!(b.w > 1.0 - 1e-10);
    }

    #[test]
    fn kbar_requires_gap() {
        let p = ModelParams::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(slowest_mode_kbar(&p), Err(Error::GaplessPhase));
        let p = ModelParams::new(1.0, 0.0, 6.0).unwrap();
        assert!((slowest_mode_kbar(&p).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn abc_grids() {
        let k2 = abc_momenta(2).unwrap();
        assert!((k2[0] + PI / 2.0).abs() < 1e-15 && (k2[1] - PI / 2.0).abs() < 1e-15);
        let k4 = abc_momenta(4).unwrap();
        let want = [-0.75 * PI, -0.25 * PI, 0.25 * PI, 0.75 * PI];
        for (a, b) in k4.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(abc_momenta(3).is_err());
        assert!(abc_momenta(0).is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = ModelParams::new(1.0, 0.7, 5.0).unwrap();
        let k = 0.9;
        let (_, d1, d2) = lambda_derivatives(&p, k);
        let s = 1e-4;
        let l = |k: f64| Mode::at(&p, k).lambda;
        let fd1 = (l(k + s) - l(k - s)) / (2.0 * s);
        let fd2 = (l(k + s) - 2.0 * l(k) + l(k - s)) / (s * s);
        assert!(close(d1, fd1, 1e-7));
        assert!(close(d2, fd2, 1e-6));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 1.0).is_err());
    }
}
