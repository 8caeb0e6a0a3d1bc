use crate::failure::{Context, Failure};
use nhil::model::vacuum_energy;
use nhil::oracle::{
    analytic_even_spectrum, build_hamiltonian, czz_exact, czz_wick_discrete, evolve_normalized, krylov_basis, norm,
    overlap, product_evolved_state, spectrum_mismatch, vacuum_state, Propagator, ANTICOMMUTATOR_CHECK_MAX_SITES,
    ANTICOMMUTATOR_TOL, KRYLOV_ORTHONORMALITY_TOL, MAX_SITES,
};
use nhil::{ModelParams, C64};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

const EVOLUTION_TIMES: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Compares the exact Fock-space solution of the N-site ring against the
/// free-fermion formulas; `tol` bounds the spectrum and correlator rows.
pub fn run_oracle(n: usize, p: &ModelParams, tol: f64) -> Result<Vec<Check>, Failure> {
    if n < 2 || n > MAX_SITES || n % 2 != 0 {
        return Err(Failure::Usage(format!("N must be even and in [2, {MAX_SITES}], got {n}")));
    }
    let p = &p.scaled();
    let ops = build_hamiltonian(n, p).during("build_hamiltonian")?;
    let mut checks = Vec::new();
    if n <= ANTICOMMUTATOR_CHECK_MAX_SITES {
        let d = ops.anticommutator_defect().during("anticommutator_defect")?;
        checks.push(Check { name: "anticommutators", value: d, tol: ANTICOMMUTATOR_TOL });
    }
    let want = analytic_even_spectrum(n, p).during("analytic_even_spectrum")?;
    checks.push(Check { name: "even spectrum", value: spectrum_mismatch(&ops.even_spectrum(), &want), tol });

    let omega = vacuum_state(&ops).during("vacuum_state")?;
    checks.push(Check { name: "vacuum annihilation", value: ops.eta_residual(&omega).during("eta_residual")?, tol: 1e-10 });
    let e0 = vacuum_energy(p, &ops.momenta.ks);
    let r: Vec<C64> = ops.apply_hamiltonian(&omega).iter().zip(&omega).map(|(a, b)| a - e0 * b).collect();
    checks.push(Check { name: "vacuum eigenvalue", value: norm(&r), tol: 1e-9 });

    let prop = Propagator::new(ops.hamiltonian.as_ref()).during("propagator")?;
    let mut deficit: f64 = 0.0;
    for t in EVOLUTION_TIMES {
        let exact = evolve_normalized(&prop, &ops.empty_state(), t).during("evolve_normalized")?;
        let product = product_evolved_state(&ops, t).during("product_evolved_state")?;
        deficit = deficit.max(1.0 - overlap(&product, &exact).norm());
    }
    checks.push(Check { name: "mode-product evolution", value: deficit, tol: 1e-10 });

    let mut wick: f64 = 0.0;
    for x in 0..n {
        let exact = czz_exact(&ops, x).during("czz_exact")?;
        wick = wick.max((exact - czz_wick_discrete(n, p, x).during("czz_wick_discrete")?).abs());
    }
    checks.push(Check { name: "Wick correlator", value: wick, tol });

    let basis = krylov_basis(ops.hamiltonian.as_ref(), &ops.empty_state()).during("krylov_basis")?;
    checks.push(Check {
        name: "Krylov orthonormality",
        value: basis.orthonormality_defect(),
        tol: KRYLOV_ORTHONORMALITY_TOL,
    });
    Ok(checks)
}

pub fn render(n: usize, p: &ModelParams, checks: &[Check]) -> String {
    let s = p.scaled();
    let mut out = String::new();
    writeln!(out, "# N={n} J={} h={} gamma={}", p.j, s.h, s.gamma).unwrap();
    writeln!(out, "{:<24} {:>12} {:>12}  result", "check", "value", "tol").unwrap();
    for c in checks {
        let verdict = if c.passed() { "pass" } else { "FAIL" };
        writeln!(out, "{:<24} {:>12.3e} {:>12.1e}  {verdict}", c.name, c.value, c.tol).unwrap();
    }
    out
}
