//! Wick contractions, the zz spin correlator C^zz(x) in the right vacuum,
//! its closed-form asymptotics and simple decay fits.

use crate::error::{Error, Result};
use crate::model::{classify_static, ModelParams, Mode, Region, C64, CRITICAL_TOL};
use crate::quad::{integrate, QuadConfig};
use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Range;

/// γ at which the γ → 0 limit is evaluated, in units of J.
pub const LIMIT_GAMMA: f64 = 1e-8;

/// Absolute tolerance of every contraction integral.
pub const CONTRACTION_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSet {
    pub x: u32,
    /// ⟨A₀A_x⟩, purely imaginary for x > 0.
    pub aa: C64,
    /// ⟨B₀A_{+x}⟩
    pub ba_plus: f64,
    /// ⟨B₀A_{−x}⟩
    pub ba_minus: f64,
}

impl ContractionSet {
    /// ⟨B₀B_x⟩ = −2δ_{x0} + ⟨A₀A_x⟩.
    pub fn bb(&self) -> C64 {
        let delta = if self.x == 0 { 2.0 } else { 0.0 };
        self.aa - delta
    }

    /// C^zz(x) = −⟨B₀A_{−x}⟩⟨B₀A_x⟩ − ⟨A₀A_x⟩².
    pub fn czz(&self) -> f64 {
        if self.x == 0 {
            return 1.0 - self.ba_plus * self.ba_plus;
        }
        (-self.ba_minus * self.ba_plus - self.aa * self.aa).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    OscillatoryGapless,
    CriticalLine,
    IsingCritical,
    DisorderedHermitian,
    DisorderedNonHermitian,
    HermitianGsFerro,
    HermitianGsPara,
    HermitianGsCritical,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::OscillatoryGapless => "oscillatory-gapless",
            Regime::CriticalLine => "critical-line",
            Regime::IsingCritical => "ising-critical",
            Regime::DisorderedHermitian => "disordered-hermitian",
            Regime::DisorderedNonHermitian => "disordered-non-hermitian",
            Regime::HermitianGsFerro => "hermitian-gs-ferro",
            Regime::HermitianGsPara => "hermitian-gs-para",
            Regime::HermitianGsCritical => "hermitian-gs-critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticResult {
    pub value: f64,
    pub regime: Regime,
    pub xi: Option<f64>,
    pub leading_power: f64,
}

fn require_even(x: i64) -> Result<()> {
    if x % 2 != 0 {
        return Err(Error::Domain(format!("separation must be even, got {x}")));
    }
    Ok(())
}

fn require_gamma(p: &ModelParams) -> Result<()> {
    if p.gamma <= 0.0 {
        return Err(Error::Domain("contractions need gamma > 0; use the limit path for gamma = 0".into()));
    }
    Ok(())
}

fn breaks(p: &ModelParams) -> Vec<f64> {
    p.q().into_iter().filter(|&q| q > 0.0 && q < PI).collect()
}

fn panel_width(x: f64) -> f64 {
    PI / (x / 2.0).max(8.0)
}

/// ⟨A₀A_x⟩ = (i/γπ) ∫₀^π sin kx (γ² − 4Γ²)/(4J sin k) dk, with ⟨A₀A₀⟩ = 1.
pub fn contraction_aa(x: u32, p: &ModelParams) -> Result<C64> {
    require_even(x as i64)?;
    require_gamma(p)?;
    if x == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let xf = x as f64;
    let g = p.gamma;
    let f = |k: f64| {
        let m = Mode::at(p, k);
        let gm = m.decay();
        (k * xf).sin() * ((g - 2.0 * gm) * (g + 2.0 * gm) / g) / (4.0 * p.j * m.sin)
    };
    let v: f64 = integrate(f, 0.0, PI, &breaks(p), panel_width(xf), &QuadConfig::with_abs_tol(CONTRACTION_TOL))?;
    Ok(C64::new(0.0, v / PI))
}

/// ⟨B₀A_x⟩ for signed even x; x = 0 gives 2𝒞_Ω − 1.
pub fn contraction_ba(x_signed: i64, p: &ModelParams) -> Result<f64> {
    require_even(x_signed)?;
    require_gamma(p)?;
    let xf = x_signed as f64;
    let g = p.gamma;
    let f = |k: f64| {
        let m = Mode::at(p, k);
        let ratio = m.decay() / g;
        let smooth = (m.energy() - 4.0 * m.d * ratio) / (4.0 * p.j * m.sin);
        -(k * xf).cos() * ratio + (k * xf).sin() * smooth
    };
    let v: f64 =
        integrate(f, 0.0, PI, &breaks(p), panel_width(xf.abs()), &QuadConfig::with_abs_tol(CONTRACTION_TOL))?;
    Ok(2.0 * v / PI)
}

pub fn contractions(x: u32, p: &ModelParams) -> Result<ContractionSet> {
    let xi = x as i64;
    let ba_plus = contraction_ba(xi, p)?;
    let ba_minus = if x == 0 { ba_plus } else { contraction_ba(-xi, p)? };
    Ok(ContractionSet { x, aa: contraction_aa(x, p)?, ba_plus, ba_minus })
}

/// C^zz(x) by quadrature of the contractions; requires γ > 0.
pub fn czz_quadrature(x: u32, p: &ModelParams) -> Result<f64> {
    Ok(contractions(x, p)?.czz())
}

/// C^zz(x) in the γ → 0 limit of the non-Hermitian vacuum.
pub fn czz_limit(x: u32, p: &ModelParams) -> Result<f64> {
    czz_quadrature(x, &p.with_gamma(LIMIT_GAMMA * p.j))
}

/// Branch point z₁ = (−γ + 4ih)/(4J).
pub fn branch_point(p: &ModelParams) -> C64 {
    C64::new(-p.gamma, 4.0 * p.h) / (4.0 * p.j)
}

/// ξ = 1/(2 ln|z₁|) of the gapped phase.
pub fn correlation_length(p: &ModelParams) -> f64 {
    1.0 / (2.0 * branch_point(p).norm().ln())
}

fn rotation(x: f64, z1: C64) -> C64 {
    C64::from_polar(1.0, -x * z1.arg())
}

pub fn kappa_plus(x: f64, p: &ModelParams) -> f64 {
    let z1 = branch_point(p);
    let s = z1.powf(1.5) * (z1 + 1.0 / z1).sqrt() / (z1 * z1 + 1.0);
    2.0 * z1.re * (s * rotation(x, z1)).re
}

pub fn kappa_minus(x: f64, p: &ModelParams) -> f64 {
    let z1 = branch_point(p);
    (z1.norm_sqr() - 1.0) * (rotation(x, z1) / (z1 * z1 + 1.0).sqrt()).re
}

pub fn nu(x: f64, p: &ModelParams) -> f64 {
    let z1 = branch_point(p);
    let root = ((2.0 * z1.re * (z1.norm_sqr() - 1.0)) / (z1 * (z1 * z1 + 1.0))).sqrt();
    (z1 * rotation(x, z1) * root).im
}

/// χ(x) = κ₊κ₋ − ν².
pub fn chi(x: f64, p: &ModelParams) -> f64 {
    kappa_plus(x, p) * kappa_minus(x, p) - nu(x, p).powi(2)
}

/// Leading asymptotic forms of ⟨B₀A_{+x}⟩, ⟨B₀A_{−x}⟩ and ⟨A₀A_x⟩ in the gapped phase.
pub fn gapped_contraction_asymptotics(x: u32, p: &ModelParams) -> (f64, f64, C64) {
    let xf = x as f64;
    let sign = if (x / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let pre = 4.0 / PI.sqrt() * p.j / p.gamma * sign * xf.powf(-1.5) * branch_point(p).norm().powf(-xf);
    (pre * kappa_plus(xf, p), pre * kappa_minus(xf, p), C64::new(0.0, pre * nu(xf, p)))
}

/// μ(x) of the critical-line asymptotics, as written in closed form.
pub fn mu(x: f64, p: &ModelParams) -> f64 {
    let (j, h) = (p.j, p.h);
    let q = (h / j).acos();
    let (c, s) = ((q * x + FRAC_PI_4).cos(), (q * x + FRAC_PI_4).sin());
    let first = ((j + h) / (j - h)).powf(0.25) * c + ((j - h) / (j + h)).powf(0.25) * s;
    let second = j / ((j - h).powf(0.25) * (j + h).powf(0.75)) * c + j / ((j + h).powf(0.25) * (j - h).powf(0.75)) * s;
    3.0 * first * second + 4.0 / PI * j * j / (j * j - h * h) * x.powi(-4) * (q * x).sin().powi(2)
}

/// Regime implied by the static phase of p.
pub fn default_regime(p: &ModelParams) -> Result<Regime> {
    match classify_static(p, CRITICAL_TOL).region {
        Region::I => Ok(Regime::OscillatoryGapless),
        Region::IV => Ok(Regime::CriticalLine),
        Region::II | Region::III => Ok(Regime::DisorderedNonHermitian),
        Region::HermitianLine if p.h > p.j => Ok(Regime::DisorderedHermitian),
        Region::HermitianLine if p.h == p.j => Ok(Regime::IsingCritical),
        Region::HermitianLine => Err(Error::UndefinedRegime(
            "h < J at gamma = 0: choose the limit path (oscillatory-gapless) or the true ground state (hermitian-gs-ferro)"
                .into(),
        )),
    }
}

/// Closed-form leading asymptotics of C^zz(x).
pub fn czz_asymptotic(x: u32, p: &ModelParams, regime_override: Option<Regime>) -> Result<AsymptoticResult> {
    require_even(x as i64)?;
    if x == 0 {
        return Err(Error::Domain("asymptotic forms need x > 0".into()));
    }
    let regime = match regime_override {
        Some(r) => r,
        None => default_regime(p)?,
    };
    let xf = x as f64;
    let (j, h, g) = (p.j, p.h, p.gamma);
    let result = |value, xi, leading_power| AsymptoticResult { value, regime, xi, leading_power };
    Ok(match regime {
        Regime::OscillatoryGapless => {
            if h >= j {
                return Err(Error::UndefinedRegime("oscillatory-gapless needs h < J".into()));
            }
            let q = (h / j).acos();
            let amp = (16.0 * (j * j - h * h) - g * g) / (j * j - h * h);
            result(amp / (4.0 * PI * PI) * (q * xf).cos().powi(2) / (xf * xf), None, -2.0)
        }
        Regime::CriticalLine => {
            if h >= j {
                return Err(Error::UndefinedRegime("critical-line needs h < J".into()));
            }
            let value = if h == 0.0 { 3.0 / (2.0 * PI) * xf.powi(-4) } else { mu(xf, p) * xf.powi(-4) / PI };
            result(value, None, -4.0)
        }
        Regime::IsingCritical | Regime::HermitianGsCritical => result(1.0 / (PI * PI * xf * xf), None, -2.0),
        Regime::DisorderedHermitian => {
            if h <= j {
                return Err(Error::UndefinedRegime("disordered-hermitian needs h > J".into()));
            }
            let xi = 1.0 / (2.0 * (h / j).ln());
            result((-xf / xi).exp() / (2.0 * PI * xf * xf), Some(xi), -2.0)
        }
        Regime::DisorderedNonHermitian => {
            if !p.is_gapped() {
                return Err(Error::UndefinedRegime("disordered-non-hermitian needs gamma > gamma_c".into()));
            }
            let xi = correlation_length(p);
            let value = -16.0 / PI * (j / g).powi(2) * xf.powi(-3) * (-xf / xi).exp() * chi(xf, p);
            result(value, Some(xi), -3.0)
        }
        Regime::HermitianGsPara => {
            if h <= j {
                return Err(Error::UndefinedRegime("hermitian-gs-para needs h > J".into()));
            }
            let xi = 1.0 / (2.0 * (h / j).ln());
            let corr = 1.0 - (h * h - 3.0 * j * j) / (8.0 * (h * h - j * j)) / xf;
            result((j / h).powf(2.0 * xf) / (2.0 * PI * xf * xf) * corr, Some(xi), -2.0)
        }
        Regime::HermitianGsFerro => {
            if h >= j || h == 0.0 {
                return Err(Error::UndefinedRegime("hermitian-gs-ferro needs 0 < h < J".into()));
            }
            let xi = 1.0 / (2.0 * (j / h).ln());
            let corr = 1.0 + (h * h - 3.0 * j * j) / (8.0 * (h * h - j * j)) / xf;
            result((h / j).powf(2.0 * xf) / (2.0 * PI * xf * xf) * corr, Some(xi), -2.0)
        }
    })
}

/// C^zz₀(x) = −4G(x)² + 4F(x)² in the ground state of the Hermitian chain.
pub fn hermitian_gs_czz(x: u32, p: &ModelParams) -> Result<f64> {
    if p.gamma != 0.0 {
        return Err(Error::Domain("hermitian_gs_czz needs gamma = 0".into()));
    }
    if x == 0 {
        return Err(Error::Domain("hermitian_gs_czz needs x > 0".into()));
    }
    let xf = x as f64;
    let (j, h) = (p.j, p.h);
    let root = |k: f64| {
        let s = (k / 2.0).sin();
        ((j - h).powi(2) + 4.0 * h * j * s * s).sqrt()
    };
    let cfg = QuadConfig::with_abs_tol(1e-13);
    let w = panel_width(xf);
    let g: f64 = integrate(|k: f64| (k * xf).cos() * (h - j * k.cos()) / root(k), 0.0, PI, &[], w, &cfg)?;
    let f: f64 = integrate(|k: f64| (k * xf).sin() * j * k.sin() / root(k), 0.0, PI, &[], w, &cfg)?;
    let (g, f) = (g / (2.0 * PI), f / (2.0 * PI));
    Ok(-4.0 * g * g + 4.0 * f * f)
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if pts.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, intercept, stderr)
}

/// Least-squares slope of ln|y| against ln x over `window`, with its standard error.
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: Range<usize>) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || window.end > xs.len() {
        return Err(Error::DegenerateFit("window exceeds the sample".into()));
    }
    let pts: Vec<(f64, f64)> = window
        .filter(|&i| xs[i] > 0.0 && ys[i] > 0.0 && ys[i].is_finite())
        .map(|i| (xs[i].ln(), ys[i].ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::DegenerateFit(format!("{} usable points, need 6", pts.len())));
    }
    let (slope, _, stderr) = linear_fit(&pts);
    Ok((slope, stderr))
}

/// Decay length from a fit of ln(|y|·x^power) = a − x/ξ, with the standard error of ξ.
pub fn fit_correlation_length(xs: &[f64], ys: &[f64], power: f64) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateFit("length mismatch".into()));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (*x, (y.abs() * x.powf(power)).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} usable points, need 2", pts.len())));
    }
    let (slope, _, stderr) = linear_fit(&pts);
    if slope >= 0.0 {
        return Err(Error::DegenerateFit("no decay in the sample".into()));
    }
    Ok((-1.0 / slope, stderr / (slope * slope)))
}

/// Even separations in `range` at which |cos qx| exceeds 0.9.
pub fn oscillation_maxima(q: f64, range: Range<u32>) -> Vec<u32> {
    range.filter(|x| x % 2 == 0 && (q * *x as f64).cos().abs() > 0.9).collect()
}
