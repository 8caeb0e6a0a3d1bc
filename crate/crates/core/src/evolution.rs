//! Exact per-mode evolution of the Jordan–Wigner vacuum, the onset time of
//! the stationary regime and the gapless stationary-state amplitudes.

use crate::error::{Error, Result};
use crate::model::{cdiv, ModelParams, Mode, C64};
use std::f64::consts::FRAC_1_SQRT_2;

/// Modes with |Λ| below this multiple of J count as exceptional points.
pub const EXCEPTIONAL_TOL: f64 = 1e-12;

/// Modes with |Γ| below this multiple of J count as non-decaying.
pub const ZERO_DECAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplitudes {
    pub a_plus: C64,
    pub a_z: C64,
    pub l: C64,
    /// Normalized coefficients of |1/2,−1/2⟩_k and |1/2,+1/2⟩_k.
    pub state2: [C64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTime {
    pub k: f64,
    pub t_k: f64,
    pub beta: f64,
    pub m: f64,
    /// Set when m² < β and the mode was assigned t_k = 0.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryTimeData {
    pub t_star: f64,
    pub per_mode: Vec<ModeTime>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaplessAmplitudes {
    pub lambda_q: f64,
    pub a_t: f64,
    pub amp: C64,
}

/// tan z without overflow for large |Im z|.
pub fn ctan(z: C64) -> C64 {
    if z.im.abs() < 15.0 {
        return z.tan();
    }
    let i = C64::new(0.0, 1.0);
    if z.im > 0.0 {
        let e = (2.0 * i * z).exp();
        -i * (e - 1.0) / (e + 1.0)
    } else {
        let e = (-2.0 * i * z).exp();
        -i * (1.0 - e) / (1.0 + e)
    }
}

/// sec z = 1/cos z, decaying gracefully to zero for large |Im z|.
fn csec(z: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let e = if z.im < 0.0 { (-i * z).exp() } else { (i * z).exp() };
    2.0 * e / (1.0 + e * e)
}

fn unit(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// l_k(t) = 2/(f_k(1 − e^{2iΛt})) in the form that stays finite as t grows.
pub fn l_factor(mode: &Mode, t: f64) -> C64 {
    let decay = (C64::new(0.0, -2.0) * mode.lambda * t).exp();
    -2.0 * cdiv(cdiv(decay, mode.f()), 1.0 - decay)
}

/// L_k(t) of the stationary-regime condition |L_k(t)| < 1.
pub fn big_l_factor(mode: &Mode, t: f64) -> f64 {
    let l = l_factor(mode, t);
    let om = (1.0 - l).norm_sqr();
    mode.weight() * ((om - 1.0) / om).abs()
}

pub fn mode_amplitudes_at(mode: &Mode, t: f64, p: &ModelParams) -> Result<ModeAmplitudes> {
    if mode.lambda.norm() < EXCEPTIONAL_TOL * p.j {
        return Err(Error::ExceptionalPoint(mode.sin.atan2(mode.cos)));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let i = C64::new(0.0, 1.0);
    let z = mode.lambda * t;
    let tan = ctan(z);
    let rx = C64::new(mode.rx, 0.0);
    let denom = mode.lambda + i * mode.rz * tan;
    let a_plus = -i * rx * tan / denom;
    let ratio = denom / mode.lambda;
    let sec = csec(z);
    let a_z = sec * sec / (ratio * ratio);
    let cos_phase = if z.im < 0.0 { -z.re } else { z.re };
    let e = if z.im < 0.0 { (-i * z).exp() } else { (i * z).exp() };
    let lead_phase = -(cos_phase - (1.0 + e * e).arg()) + ratio.arg();
    let norm = (1.0 + a_plus.norm_sqr()).sqrt();
    let lead = unit(lead_phase) / norm;
    Ok(ModeAmplitudes { a_plus, a_z, l: l_factor(mode, t), state2: [lead, lead * a_plus] })
}

/// Per-mode amplitudes A₊(k;t), A_z(k;t), l_k(t) and the normalized state.
pub fn mode_amplitudes(k: f64, t: f64, p: &ModelParams) -> Result<ModeAmplitudes> {
    mode_amplitudes_at(&Mode::at(p, k), t, p)
}

/// Onset time of one decaying mode together with its β_k and m_k.
pub fn mode_onset_time(mode: &Mode) -> (f64, f64, f64, bool) {
    let w = mode.weight();
    let f = mode.f();
    let fa = f.norm();
    let ct = f.re / fa;
    let beta = 4.0 * (1.0 + w) * (1.0 - fa * ct) / (fa * fa) + 1.0;
    let m2 = 1.0 + 4.0 * (1.0 + w) / fa * ((1.0 + w) / fa - ct);
    if m2 < beta || m2 < 0.0 {
        return (0.0, beta, m2.max(0.0).sqrt(), true);
    }
    let m = m2.sqrt();
    let t = (m + (m2 - beta).sqrt()).ln() / (2.0 * mode.decay().abs());
    (t.max(0.0), beta, m, false)
}

/// Stationary-regime onset t⋆ = max_k t_k over the given grid.
pub fn stationary_time(p: &ModelParams, kgrid: &[f64]) -> Result<StationaryTimeData> {
    let mut per_mode = Vec::with_capacity(kgrid.len());
    let mut t_star: f64 = 0.0;
    for &k in kgrid {
        let mode = Mode::at(p, k);
        if mode.decay().abs() < ZERO_DECAY_TOL * p.j {
            return Err(Error::GaplessPhase);
        }
        let (t_k, beta, m, flagged) = mode_onset_time(&mode);
        t_star = t_star.max(t_k);
        per_mode.push(ModeTime { k, t_k, beta, m, flagged });
    }
    Ok(StationaryTimeData { t_star, per_mode })
}

/// Real part E(q) of Λ at the soft mode q = arccos(h/J).
pub fn soft_mode_energy(p: &ModelParams) -> f64 {
    let c = p.h / p.j;
    let s = ((1.0 - c) * (1.0 + c)).sqrt();
    Mode::new(p, c, s).energy()
}

/// λ_q with tan λ_q = γ/(2E(q)).
pub fn soft_mode_phase(p: &ModelParams) -> f64 {
    (p.gamma / (2.0 * soft_mode_energy(p))).atan()
}

/// Amplitude 𝒜(t) of the two-component stationary state in the gapless phase.
pub fn gapless_stationary(t: f64, p: &ModelParams) -> Result<GaplessAmplitudes> {
    if !p.is_gapless() {
        return Err(Error::GappedPhase);
    }
    let eq = soft_mode_energy(p);
    let lambda_q = soft_mode_phase(p);
    let c = (eq * t + lambda_q).cos();
    if c.abs() < 1e-14 {
        return Err(Error::Singular(format!("a(t) has a pole at t = {t}")));
    }
    let a_t = -(eq * t).sin() / c;
    let amp = (unit(lambda_q) - C64::new(0.0, a_t))
        * (FRAC_1_SQRT_2 / ((1.0 + a_t * a_t).sqrt() * lambda_q.cos()));
    Ok(GaplessAmplitudes { lambda_q, a_t, amp })
}
