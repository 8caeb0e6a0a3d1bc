//! Elliptic integrals for complex parameter via Carlson's symmetric forms,
//! and the principal branch of the Lambert W function.

use crate::error::{Error, Result};
use crate::model::C64;
use std::f64::consts::{E, FRAC_PI_2, PI};

const MAX_DUPLICATIONS: usize = 100;

/// Amplitude and parameter of an incomplete elliptic integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticArgs {
    pub phi: C64,
    pub m: C64,
}

fn max_dev(a: C64, xs: &[C64]) -> f64 {
    xs.iter().map(|x| (a - x).norm()).fold(0.0, f64::max)
}

/// Carlson's R_F(x, y, z) by duplication.
pub fn carlson_rf(x: C64, y: C64, z: C64) -> Result<C64> {
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0) * max_dev(a0, &[x, y, z]);
    let mut a = a0;
    let mut scale = 1.0;
    let mut n = 0;
    while scale * q >= a.norm() {
        if n == MAX_DUPLICATIONS {
            return Err(Error::NonConvergence);
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = (x + lam) / 4.0;
        y = (y + lam) / 4.0;
        z = (z + lam) / 4.0;
        a = (a + lam) / 4.0;
        scale /= 4.0;
        n += 1;
    }
    let xs = (a - x) / a;
    let ys = (a - y) / a;
    let zs = -(xs + ys);
    let e2 = xs * ys - zs * zs;
    let e3 = xs * ys * zs;
    let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
    Ok(series / a.sqrt())
}

/// Carlson's R_D(x, y, z) by duplication.
pub fn carlson_rd(x: C64, y: C64, z: C64) -> Result<C64> {
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + 3.0 * z) / 5.0;
    let q = (f64::EPSILON / 4.0).powf(-1.0 / 6.0) * max_dev(a0, &[x, y, z]);
    let mut a = a0;
    let mut scale = 1.0;
    let mut sum = C64::new(0.0, 0.0);
    let mut n = 0;
    while scale * q >= a.norm() {
        if n == MAX_DUPLICATIONS {
            return Err(Error::NonConvergence);
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        sum += scale / (sz * (z + lam));
        x = (x + lam) / 4.0;
        y = (y + lam) / 4.0;
        z = (z + lam) / 4.0;
        a = (a + lam) / 4.0;
        scale /= 4.0;
        n += 1;
    }
    let xs = (a - x) / a;
    let ys = (a - y) / a;
    let zs = -(xs + ys) / 3.0;
    let xy = xs * ys;
    let z2 = zs * zs;
    let e2 = xy - 6.0 * z2;
    let e3 = (3.0 * xy - 8.0 * z2) * zs;
    let e4 = 3.0 * (xy - z2) * z2;
    let e5 = xy * z2 * zs;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    Ok(scale * series / (a * a.sqrt()) + 3.0 * sum)
}

/// Incomplete integral of the second kind E(φ|m), parameter convention.
///
/// Real parts of φ outside [−π/2, π/2] are reduced with
/// E(φ + nπ|m) = E(φ|m) + 2nE(m).
pub fn elliptic_e(phi: C64, m: C64) -> Result<C64> {
    let n = (phi.re / PI).round();
    let reduced = phi - n * PI;
    let base = elliptic_e_reduced(reduced, m)?;
    if n == 0.0 {
        return Ok(base);
    }
    Ok(base + 2.0 * n * elliptic_e_complete(m)?)
}

fn elliptic_e_reduced(phi: C64, m: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let s = phi.sin();
    let c = phi.cos();
    let s2 = s * s;
    let delta = one - m * s2;
    let rf = carlson_rf(c * c, delta, one)?;
    let rd = carlson_rd(c * c, delta, one)?;
    Ok(s * rf - m * s * s2 * rd / 3.0)
}

/// Complete integral of the second kind E(m).
pub fn elliptic_e_complete(m: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let y = one - m;
    if y == zero {
        return Ok(one);
    }
    Ok(carlson_rf(zero, y, one)? - m * carlson_rd(zero, y, one)? / 3.0)
}

/// Complete integral of the first kind K(m).
pub fn elliptic_k(m: C64) -> Result<C64> {
    if (m - 1.0).norm() < 1e-14 {
        return Err(Error::PoleAtOne);
    }
    carlson_rf(C64::new(0.0, 0.0), C64::new(1.0, 0.0) - m, C64::new(1.0, 0.0))
}

/// E evaluated from bundled arguments.
pub fn elliptic_e_args(args: EllipticArgs) -> Result<C64> {
    if args.phi == C64::new(FRAC_PI_2, 0.0) {
        return elliptic_e_complete(args.m);
    }
    elliptic_e(args.phi, args.m)
}

/// Principal branch W₀ of the Lambert W function on [−1/e, ∞).
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 4.0 * f64::EPSILON {
        return Err(Error::Domain(format!("lambert_w0 requires x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x <= branch {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}
