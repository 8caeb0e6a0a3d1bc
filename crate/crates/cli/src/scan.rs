use crate::config::{Quantity, ScanConfig};
use crate::failure::{Context, Failure};
use nhil::correlations::correlation_length;
use nhil::krylov::{classify_dynamical_phase, spread_closed_form, SaddleData};
use nhil::model::{classify_static, CRITICAL_TOL};
use nhil::ModelParams;
use rayon::prelude::*;
use std::fmt::Write;

pub const HEADER: &str = "h,gamma,region,dyn_phase,spread,xi,t1_star,t2_star,t3_star";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(p: &ModelParams, cfg: &ScanConfig, tol: f64) -> Result<String, Failure> {
    let at = format!("(h={}, gamma={})", p.h / p.j, p.gamma / p.j);
    let gapped = p.is_gapped();
    let mut cells = vec![num(p.h / p.j), num(p.gamma / p.j)];
    cells.push(if cfg.wants(Quantity::Phase) { classify_static(p, tol).region.label().into() } else { String::new() });
    cells.push(if cfg.wants(Quantity::Dynphase) {
        classify_dynamical_phase(p).label.label().into()
    } else {
        String::new()
    });
    cells.push(if cfg.wants(Quantity::Spread) {
        num(spread_closed_form(p).during(&format!("spread_closed_form{at}"))?)
    } else {
        String::new()
    });
    cells.push(if cfg.wants(Quantity::Xi) && gapped { num(correlation_length(p)) } else { String::new() });
    if cfg.wants(Quantity::Tstar) && gapped {
        let s = SaddleData::new(p).during(&format!("saddle data{at}"))?;
        cells.extend(s.rates(p).iter().map(|r| num(p.j / r)));
    } else {
        cells.extend(std::iter::repeat(String::new()).take(3));
    }
    Ok(cells.join(","))
}

/// Renders the scan grid as CSV, evaluating points in parallel.
///
/// Ranges, energies and times are in units of J.
pub fn run_scan(cfg: &ScanConfig) -> Result<String, Failure> {
    let hs = cfg.h_range.ok_or_else(|| Failure::Usage("h_range: missing".into()))?.points();
    let gs = cfg.gamma_range.ok_or_else(|| Failure::Usage("gamma_range: missing".into()))?.points();
    let tol = cfg.tolerance("critical", CRITICAL_TOL);
    let grid: Vec<ModelParams> = hs
        .iter()
        .flat_map(|&h| gs.iter().map(move |&g| (h, g)))
        .map(|(h, g)| ModelParams::new(cfg.j, h * cfg.j, g * cfg.j).during("parameters"))
        .collect::<Result<_, _>>()?;
    let rows: Vec<String> = grid.par_iter().map(|p| row(p, cfg, tol)).collect::<Result<_, _>>()?;
    let mut out = String::new();
    writeln!(out, "# J={}", num(cfg.j)).unwrap();
    writeln!(out, "{HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{r}").unwrap();
    }
    Ok(out)
}
