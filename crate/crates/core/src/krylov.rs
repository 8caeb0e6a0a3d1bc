//! Krylov spread density, its time dependence, the spread fidelity with its
//! asymptotic decomposition, characteristic times and dynamical phases.

use crate::correlations::contraction_ba;
use crate::error::{Error, Result};
use crate::evolution::{
    mode_amplitudes_at, mode_onset_time, soft_mode_energy, soft_mode_phase, ZERO_DECAY_TOL,
};
use crate::model::{abc_momenta, cdiv, lambda_derivatives, slowest_mode_kbar, ModelParams, Mode, C64};
use crate::quad::{graded_breaks, integrate, QuadConfig};
use crate::specfun::{elliptic_e, elliptic_e_complete, elliptic_k, lambert_w0};
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpreadMethod {
    Quadrature,
    Contraction,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadValue {
    pub value: f64,
    pub method: SpreadMethod,
}

fn spread_breaks(p: &ModelParams) -> Vec<f64> {
    p.q().into_iter().filter(|&q| q > 0.0 && q < PI).collect()
}

fn spread_quadrature(p: &ModelParams) -> Result<f64> {
    let v: f64 =
        integrate(|k| Mode::at(p, k).weight(), 0.0, PI, &spread_breaks(p), PI / 8.0, &QuadConfig::with_abs_tol(1e-12))?;
    Ok(v / PI)
}

fn spread_contraction(p: &ModelParams) -> Result<f64> {
    if p.gamma > 0.0 {
        return Ok((1.0 + contraction_ba(0, p)?) / 2.0);
    }
    let f = |k: f64| {
        let c = Mode::at(p, k).coeffs();
        let (a, b) = (c.u.norm_sqr(), c.v.norm_sqr());
        (a - b) / (a + b)
    };
    let v: f64 = integrate(f, 0.0, PI, &spread_breaks(p), PI / 8.0, &QuadConfig::with_abs_tol(1e-12))?;
    Ok((1.0 - v / PI) / 2.0)
}

/// Closed form of 𝒞_Ω in terms of complete and incomplete elliptic integrals.
pub fn spread_closed_form(p: &ModelParams) -> Result<f64> {
    let (j, h, g) = (p.j, p.h, p.gamma);
    if g == 0.0 {
        if h <= j {
            return Ok(0.5 + 1.0 / PI);
        }
        let m = C64::new(-4.0 * h * j / ((h - j) * (h - j)), 0.0);
        let e = elliptic_e_complete(m)?.re;
        let k = elliptic_k(m)?.re;
        return Ok(0.5 + ((h - j) / h * e + (h + j) / h * k) / (2.0 * PI));
    }
    let base = C64::new(4.0 * (h - j), g);
    let zeta = -16.0 * j * C64::new(4.0 * h, g) / (base * base);
    let pre = C64::new(1.0, 4.0 * (j - h) / g);
    let e = elliptic_e_complete(zeta)?;
    if p.is_gapless() {
        let phi = C64::new(0.5 * (h / j).acos(), 0.0);
        let inc = elliptic_e(phi, zeta)?;
        return Ok(0.5 + (pre * (2.0 * inc - e)).re / PI);
    }
    Ok(0.5 + (pre * e).re / PI)
}

/// 𝒞_Ω, the infinite-time spread per site, by the requested route.
pub fn spread_density_infinite(p: &ModelParams, method: SpreadMethod) -> Result<SpreadValue> {
    let value = match method {
        SpreadMethod::Quadrature => spread_quadrature(p)?,
        SpreadMethod::Contraction => spread_contraction(p)?,
        SpreadMethod::ClosedForm => spread_closed_form(p)?,
    };
    Ok(SpreadValue { value, method })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    H,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSample {
    pub param: f64,
    pub d1: f64,
    pub d2: f64,
}

fn along(base: &ModelParams, axis: Axis, v: f64) -> ModelParams {
    match axis {
        Axis::H => base.with_h(v),
        Axis::Gamma => base.with_gamma(v),
    }
}

/// First and second derivatives of the closed-form 𝒞_Ω along a ray.
///
/// Each value must lie at least 1e−6 from `singular`; the stencil step is
/// min(1e−4, δ/8) with δ that distance.
pub fn spread_derivative_scan(
    base: &ModelParams,
    axis: Axis,
    values: &[f64],
    singular: f64,
) -> Result<Vec<DerivativeSample>> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let dist = (v - singular).abs();
        if !(dist >= 1e-6) {
            return Err(Error::Domain(format!("{v} lies within 1e-6 of the singular point {singular}")));
        }
        let s = (1e-4f64).min(dist / 8.0);
        let mut f = [0.0; 5];
        for (i, o) in [-2.0, -1.0, 0.0, 1.0, 2.0].iter().enumerate() {
            let x = v + o * s;
            if x < 0.0 {
                return Err(Error::Domain(format!("stencil around {v} leaves the parameter domain")));
            }
            f[i] = spread_closed_form(&along(base, axis, x))?;
        }
        if f.iter().all(|&y| y == f[2]) {
            out.push(DerivativeSample { param: v, d1: 0.0, d2: 0.0 });
            continue;
        }
        let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * s);
        let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * s * s);
        let noise = 64.0 / 12.0 * 4.0 * f64::EPSILON * f[2].abs() / (s * s);
        if noise > 1e-6 * d2.abs() {
            return Err(Error::StepTooSmall(format!("second difference at {v} is dominated by rounding")));
        }
        out.push(DerivativeSample { param: v, d1, d2 });
    }
    Ok(out)
}

/// Per-mode spread C(t; k) = |A₊|²/(1 + |A₊|²).
pub fn mode_spread(mode: &Mode, t: f64, p: &ModelParams) -> Result<f64> {
    let a = mode_amplitudes_at(mode, t, p)?.a_plus.norm_sqr();
    Ok(a / (1.0 + a))
}

/// 𝒞(t) in the gapped phase.
pub fn spread_density_time(t: f64, p: &ModelParams) -> Result<f64> {
    if !p.is_gapped() {
        return Err(Error::GaplessPhase);
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let err = Cell::new(None);
    let f = |k: f64| match mode_spread(&Mode::at(p, k), t, p) {
        Ok(v) => v,
        Err(e) => {
            err.set(Some(e));
            0.0
        }
    };
    let v: f64 = integrate(f, 0.0, PI, &[], PI / 16.0, &QuadConfig::with_abs_tol(1e-12))?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(v / PI)
}

/// C(t; k) − w_k, the per-mode deviation from the stationary weight.
pub fn fidelity_density(mode: &Mode, t: f64) -> f64 {
    let w = mode.weight();
    if t == 0.0 || mode.plus.norm() == 0.0 {
        return -w;
    }
    let decay = (C64::new(0.0, -2.0) * mode.lambda * t).exp();
    let lead = 2.0 * decay * mode.lambda;
    let tail = mode.plus * (1.0 - decay);
    if lead.norm() > tail.norm() {
        let il = -cdiv(tail, lead);
        let om = (il - 1.0).norm_sqr();
        let num = 2.0 * il.re - 1.0;
        let tau_over_l = cdiv(mode.rx * (1.0 - decay), lead);
        return w * num / (om + tau_over_l.norm_sqr());
    }
    let l = -cdiv(lead, tail);
    let rx2 = mode.rx * mode.rx;
    let pn = mode.plus.norm_sqr();
    let tau2 = if pn >= rx2 { rx2 / pn } else { mode.minus.norm_sqr() / rx2 };
    let om = (1.0 - l).norm_sqr();
    let num = 2.0 * l.re - l.norm_sqr();
    w * num / (om + tau2)
}

/// Smallest |𝒞(t) − 𝒞_Ω| relative to (1/π)∫|𝒞(t;k) − w| dk that the
/// quadrature resolves in double precision.
pub const FIDELITY_RESOLUTION: f64 = 1e-8;

/// 𝒞(t) − 𝒞_Ω computed without cancellation between the two terms.
pub fn spread_deviation(t: f64, p: &ModelParams) -> Result<f64> {
    spread_deviation_with_magnitude(t, p).map(|(v, _)| v)
}

/// 𝒞(t) − 𝒞_Ω together with (1/π)∫|𝒞(t;k) − w| dk.
pub fn spread_deviation_with_magnitude(t: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if !p.is_gapped() {
        return Err(Error::GaplessPhase);
    }
    let g = |s: f64| {
        let (c, sn) = (s.cos(), s.sin());
        fidelity_density(&Mode::new(p, c, sn), t) + fidelity_density(&Mode::new(p, -c, sn), t)
    };
    let first = ((-p.gamma * t).exp() * 1e-4).max(1e-300);
    let breaks = graded_breaks(0.0, FRAC_PI_2, first);
    let coarse = QuadConfig { abs_tol: 0.0, rel_tol: 1e-6, ..QuadConfig::default() };
    let scale: f64 = integrate(|s: f64| g(s).abs(), 0.0, FRAC_PI_2, &breaks, PI / 32.0, &coarse)?;
    let cfg = QuadConfig { abs_tol: 1e-11 * scale, rel_tol: 1e-10, ..QuadConfig::default() };
    let v: f64 = integrate(g, 0.0, FRAC_PI_2, &breaks, PI / 32.0, &cfg)?;
    Ok((v / PI, scale / PI))
}

/// Saddle-point data at the slowest mode k̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleData {
    pub kbar: f64,
    pub lambda: C64,
    pub d_lambda: C64,
    pub dd_lambda: C64,
    pub x: f64,
    pub y: C64,
    pub gamma_y: f64,
    pub omega_y: f64,
}

impl SaddleData {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let kbar = slowest_mode_kbar(p)?;
        let (lambda, d_lambda, dd_lambda) = lambda_derivatives(p, kbar);
        let (gb, eb) = (lambda.im, lambda.re);
        let g = p.gamma;
        let r = gb / g;
        let x = (0.5 - r) / (0.5 + r) * 2.0 * gb / (g * PI);
        let d = p.h - p.j * kbar.cos();
        let y = -(2.0 / (g * PI)) * (0.5 - r) * C64::new(g * d, -gb * gb) / C64::new(2.0 * d, -gb);
        let (e1, e2, g2) = (d_lambda.re, dd_lambda.re, dd_lambda.im);
        let l2 = dd_lambda.norm_sqr();
        let gamma_y = 2.0 * gb + e1 * e1 * g2 / l2;
        let omega_y = 2.0 * eb - e1 * e1 * e2 / l2;
        Ok(Self { kbar, lambda, d_lambda, dd_lambda, x, y, gamma_y, omega_y })
    }

    /// Decay rates (γ, 4|Γ(k̄)|, |γ_Y|) of the three fidelity contributions.
    pub fn rates(&self, p: &ModelParams) -> [f64; 3] {
        [p.gamma, 4.0 * self.lambda.im.abs(), self.gamma_y.abs()]
    }
}

/// The four asymptotic contributions to 𝒞(t) − 𝒞_Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityComponents {
    pub i0: f64,
    pub ipi: f64,
    pub ib1: f64,
    pub ib2: f64,
}

impl FidelityComponents {
    pub fn sum(&self) -> f64 {
        self.i0 + self.ipi + self.ib1 + self.ib2
    }
}

pub fn fidelity_components(t: f64, p: &ModelParams, s: &SaddleData) -> FidelityComponents {
    let (j, h, g) = (p.j, p.h, p.gamma);
    let damp = (-g * t).exp();
    let i0 = -(16.0 * (h - j).powi(2) + g * g).sqrt() / (4.0 * j) * damp;
    let ipi = -(16.0 * (h + j).powi(2) + g * g).sqrt() / (4.0 * j) * damp;
    let g2 = s.dd_lambda.im;
    let ib1 = s.x * (4.0 * s.lambda.im * t).exp() * (PI / (2.0 * g2.abs() * t)).sqrt();
    let width = C64::new(-g2, -s.dd_lambda.re).sqrt();
    let phase = C64::new(s.gamma_y * t, s.omega_y * t).exp();
    let ib2 = (2.0 * s.y * (PI / t).sqrt() / width * phase).re;
    FidelityComponents { i0, ipi, ib1, ib2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    /// F(t) = |𝒞(t) − 𝒞_Ω| by quadrature.
    pub f_exact: Vec<f64>,
    /// False where F(t) lies below the resolution of the quadrature, which
    /// happens when the integrand cancels over many orders of magnitude.
    pub resolved: Vec<bool>,
    /// Components are NaN at t = 0, where the saddle forms are singular.
    pub i0: Vec<f64>,
    pub ipi: Vec<f64>,
    pub ib1: Vec<f64>,
    pub ib2: Vec<f64>,
    pub gamma_y: f64,
    pub omega_y: f64,
}

/// Spread fidelity on a time grid together with its asymptotic components.
pub fn fidelity(tgrid: &[f64], p: &ModelParams) -> Result<FidelityTrace> {
    if !p.is_gapped() {
        return Err(Error::GaplessPhase);
    }
    let s = SaddleData::new(p)?;
    let mut tr = FidelityTrace {
        times: tgrid.to_vec(),
        f_exact: Vec::with_capacity(tgrid.len()),
        resolved: Vec::with_capacity(tgrid.len()),
        i0: Vec::with_capacity(tgrid.len()),
        ipi: Vec::with_capacity(tgrid.len()),
        ib1: Vec::with_capacity(tgrid.len()),
        ib2: Vec::with_capacity(tgrid.len()),
        gamma_y: s.gamma_y,
        omega_y: s.omega_y,
    };
    for &t in tgrid {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        let (v, magnitude) = spread_deviation_with_magnitude(t, p)?;
        tr.f_exact.push(v.abs());
        tr.resolved.push(v.abs() >= FIDELITY_RESOLUTION * magnitude);
        let c = if t > 0.0 {
            fidelity_components(t, p, &s)
        } else {
            FidelityComponents { i0: f64::NAN, ipi: f64::NAN, ib1: f64::NAN, ib2: f64::NAN }
        };
        tr.i0.push(c.i0);
        tr.ipi.push(c.ipi);
        tr.ib1.push(c.ib1);
        tr.ib2.push(c.ib2);
    }
    Ok(tr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicTimes {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t1_star: f64,
    pub t2_star: f64,
    pub t3_star: f64,
}

/// Times t₁(ε), t₂(ε), t₃(ε) after which each fidelity contribution stays
/// below ε, and their ε-free counterparts in units of |ln ε|.
pub fn characteristic_times(p: &ModelParams, eps: f64) -> Result<CharacteristicTimes> {
    if !p.is_gapped() {
        return Err(Error::GaplessPhase);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let s = SaddleData::new(p)?;
    let (j, h, g) = (p.j, p.h, p.gamma);
    let gb = s.lambda.im.abs();
    let g2 = s.dd_lambda.im.abs();
    let gy = s.gamma_y.abs();
    let amp = (16.0 * (h + j).powi(2) + g * g).sqrt() + (16.0 * (h - j).powi(2) + g * g).sqrt();
    let t1 = (amp / (4.0 * j * eps)).ln() / g;
    let arg2 = PI * s.x * s.x * gb / (2.0 * eps * eps * g2);
    let arg3 = 8.0 * PI * s.y.norm_sqr() * gy / (eps * eps * s.dd_lambda.norm());
    if !(arg2 > 0.0 && arg2.is_finite()) || !(arg3 > 0.0 && arg3.is_finite()) {
        return Err(Error::Domain(format!("Lambert W arguments must be positive, got {arg2} and {arg3}")));
    }
    Ok(CharacteristicTimes {
        t1,
        t2: lambert_w0(arg2)? / (8.0 * gb),
        t3: lambert_w0(arg3)? / (2.0 * gy),
        t1_star: 1.0 / g,
        t2_star: 1.0 / (4.0 * gb),
        t3_star: 1.0 / gy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DynamicalLabel {
    Phase1Gamma,
    Phase2GammaBar,
    Phase3GammaY,
    GaplessNone,
}

impl DynamicalLabel {
    pub fn label(&self) -> &'static str {
        match self {
            DynamicalLabel::Phase1Gamma => "phase1-gamma",
            DynamicalLabel::Phase2GammaBar => "phase2-gammabar",
            DynamicalLabel::Phase3GammaY => "phase3-gammay",
            DynamicalLabel::GaplessNone => "gapless-none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalPhase {
    pub label: DynamicalLabel,
    /// Slowest inverse rate, in units of |ln ε|; absent in the gapless phase.
    pub t_star_eps_free: Option<f64>,
}

/// Dynamical phase set by the slowest of the three fidelity decay rates.
pub fn classify_dynamical_phase(p: &ModelParams) -> DynamicalPhase {
    let gapless = DynamicalPhase { label: DynamicalLabel::GaplessNone, t_star_eps_free: None };
    if !p.is_gapped() {
        return gapless;
    }
    let Ok(s) = SaddleData::new(p) else {
        return gapless;
    };
    let rates = s.rates(p);
    let labels = [DynamicalLabel::Phase1Gamma, DynamicalLabel::Phase2GammaBar, DynamicalLabel::Phase3GammaY];
    let mut best = 0;
    for i in 1..3 {
        if rates[i] < rates[best] {
            best = i;
        }
    }
    DynamicalPhase { label: labels[best], t_star_eps_free: Some(1.0 / rates[best]) }
}

/// Time average of C(t)/N over [t⋆, t⋆ + horizon] on the N-site momentum
/// grid in the gapless phase.
///
/// Grid modes with Γ = 0 contribute the two-component stationary term; all
/// other modes contribute their per-mode spread.
pub fn spread_gapless_time_avg(p: &ModelParams, n: usize, horizon: f64) -> Result<f64> {
    if !p.is_gapless() {
        return Err(Error::GappedPhase);
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let ks = abc_momenta(n)?;
    let mut soft = 0usize;
    let mut modes = Vec::new();
    let mut t_star: f64 = 0.0;
    for &k in ks.iter().filter(|&&k| k > 0.0) {
        let m = Mode::at(p, k);
        if m.decay().abs() < ZERO_DECAY_TOL * p.j {
            soft += 1;
        } else {
            t_star = t_star.max(mode_onset_time(&m).0);
            modes.push(m);
        }
    }
    let cfg = QuadConfig { abs_tol: 1e-10 * horizon, rel_tol: 1e-12, ..QuadConfig::default() };
    let (a, b) = (t_star, t_star + horizon);
    let panel = PI / (4.0 * p.j + 2.0 * p.h + p.gamma);
    let mut total = 0.0;
    for m in &modes {
        let err = Cell::new(None);
        let f = |t: f64| match mode_spread(m, t, p) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        };
        let v: f64 = integrate(f, a, b, &[], panel, &cfg)?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        total += 2.0 * v;
    }
    if soft > 0 {
        let e = soft_mode_energy(p);
        let lambda = soft_mode_phase(p);
        let f = |t: f64| {
            let s2 = (e * t).sin().powi(2);
            2.0 * s2 / (s2 + (e * t + lambda).cos().powi(2))
        };
        let v: f64 = integrate(f, a, b, &[], panel, &cfg)?;
        total += v;
    }
    Ok(total / (horizon * n as f64))
}

/// Least-squares decay rate of the upper envelope of a positive trace.
///
/// The envelope consists of the local maxima of ln y; when the trace has no
/// interior maxima every sample is used.
pub fn envelope_decay_rate(ts: &[f64], ys: &[f64]) -> Result<f64> {
    if ts.len() != ys.len() || ts.len() < 3 {
        return Err(Error::DegenerateFit("need at least three samples".into()));
    }
    let mut pts: Vec<(f64, f64)> = (1..ys.len() - 1)
        .filter(|&i| ys[i] > 0.0 && ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| (ts[i], ys[i].ln()))
        .collect();
    if pts.len() < 3 {
        pts = ts.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).collect();
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two positive samples".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if stt == 0.0 {
        return Err(Error::DegenerateFit("all samples at one time".into()));
    }
    Ok(-sty / stt)
}
