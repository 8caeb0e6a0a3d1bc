use crate::failure::{wrap, Context, Failure};
use nhil::correlations::{czz_asymptotic, czz_limit, czz_quadrature};
use nhil::krylov::{characteristic_times, classify_dynamical_phase, fidelity, spread_density_infinite, SpreadMethod};
use nhil::model::{classify_static, slowest_mode_kbar};
use nhil::{Error, ModelParams};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Params {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub gamma: f64,
}

#[derive(Debug, Serialize)]
pub struct Spread {
    pub quadrature: f64,
    pub contraction: f64,
    pub closed: f64,
}

#[derive(Debug, Serialize)]
pub struct CzzEntry {
    pub x: u32,
    pub quadrature: f64,
    pub asymptotic: Option<f64>,
    pub regime: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct FidelityEntry {
    pub t: f64,
    pub exact: f64,
    pub i0: Option<f64>,
    pub ipi: Option<f64>,
    pub ib1: Option<f64>,
    pub ib2: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Times {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t1s: f64,
    pub t2s: f64,
    pub t3s: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub params: Params,
    pub static_region: &'static str,
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kbar: Option<f64>,
    pub gamma_c: f64,
    pub spread: Spread,
    pub czz: Vec<CzzEntry>,
    pub fidelity: Vec<FidelityEntry>,
    pub times: Option<Times>,
    pub dynamical_phase: &'static str,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Single-point report; energies and times are in units of J.
pub fn run_report(physical: &ModelParams, xs: &[u32], ts: &[f64], eps: f64, tol: f64) -> Result<Report, Failure> {
    let p = &physical.scaled();
    if let Some(x) = xs.iter().find(|x| **x % 2 != 0) {
        return Err(Failure::Usage(format!("separations must be even, got {x}")));
    }
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Failure::Usage(format!("times must be finite and nonnegative, got {t}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Failure::Usage(format!("eps must lie in (0, 1), got {eps}")));
    }
    let region = classify_static(p, tol);
    let gapped = p.is_gapped();

    let route = |m: SpreadMethod, op: &str| spread_density_infinite(p, m).map(|v| v.value).during(op);
    let spread = Spread {
        quadrature: route(SpreadMethod::Quadrature, "spread quadrature")?,
        contraction: route(SpreadMethod::Contraction, "spread contraction")?,
        closed: route(SpreadMethod::ClosedForm, "spread closed form")?,
    };

    let mut czz = Vec::with_capacity(xs.len());
    for &x in xs {
        let quadrature = if p.gamma > 0.0 {
            czz_quadrature(x, p).during(&format!("czz_quadrature(x={x})"))?
        } else {
            czz_limit(x, p).during(&format!("czz_limit(x={x})"))?
        };
        let (asymptotic, regime) = match czz_asymptotic(x, p, None) {
            Ok(r) => (finite(r.value), Some(r.regime.label())),
            Err(Error::UndefinedRegime(_)) => (None, None),
            Err(e) => return Err(wrap(e, &format!("czz_asymptotic(x={x})"))),
        };
        czz.push(CzzEntry { x, quadrature, asymptotic, regime });
    }

    let (fid, times, kbar) = if gapped {
        let tr = fidelity(ts, p).during("fidelity")?;
        let fid = (0..ts.len())
            .map(|i| FidelityEntry {
                t: ts[i],
                exact: tr.f_exact[i],
                i0: finite(tr.i0[i]),
                ipi: finite(tr.ipi[i]),
                ib1: finite(tr.ib1[i]),
                ib2: finite(tr.ib2[i]),
            })
            .collect();
        let ct = characteristic_times(p, eps).during("characteristic_times")?;
        let times =
            Times { t1: ct.t1, t2: ct.t2, t3: ct.t3, t1s: ct.t1_star, t2s: ct.t2_star, t3s: ct.t3_star };
        (fid, Some(times), Some(slowest_mode_kbar(p).during("slowest_mode_kbar")?))
    } else {
        (Vec::new(), None, None)
    };

    Ok(Report {
        params: Params { j: physical.j, h: p.h, gamma: p.gamma },
        static_region: region.region.label(),
        q: region.q,
        kbar,
        gamma_c: p.gamma_critical(),
        spread,
        czz,
        fidelity: fid,
        times,
        dynamical_phase: classify_dynamical_phase(p).label.label(),
    })
}
