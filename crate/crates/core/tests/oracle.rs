use faer::complex_native::c64;
use faer::Mat;
use nhil::evolution::stationary_time;
use nhil::krylov::mode_spread;
use nhil::model::{abc_momenta, vacuum_energy, Mode};
use nhil::oracle::{
    analytic_even_spectrum, build_hamiltonian, czz_exact, czz_wick_discrete, discrete_momenta, discrete_spread,
    evolve_normalized, krylov_basis, krylov_spread_exact, norm, overlap, product_evolved_state, spectrum_mismatch,
    vacuum_state, Propagator, ANTICOMMUTATOR_TOL,
};
use nhil::{Error, ModelParams, C64};
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn params(h: f64, gamma: f64) -> ModelParams {
    ModelParams::new(1.0, h, gamma).unwrap()
}

const POINTS: [(f64, f64); 5] = [(0.5, 1.0), (0.5, 6.0), (1.5, 2.0), (0.0, 3.0), (0.3, 0.0)];

fn eigenvalues(m: &Mat<c64>) -> Vec<C64> {
    let evd = m.eigendecomposition::<c64>();
    (0..m.nrows()).map(|i| evd.s().column_vector().read(i)).map(|z| C64::new(z.re, z.im)).collect()
}

/// Spin chain −J Σ σˣ_j σˣ_{j+1} − (h + iγ/4) Σ σᶻ_j on a periodic ring,
/// restricted to states with Π σᶻ = +1.
fn spin_chain_even_sector(n: usize, p: &ModelParams) -> Mat<c64> {
    let states: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() % 2 == 0).collect();
    let mut index = vec![usize::MAX; 1 << n];
    for (i, &s) in states.iter().enumerate() {
        index[s] = i;
    }
    let field = C64::new(p.h, p.gamma / 4.0);
    let mut m = Mat::<c64>::zeros(states.len(), states.len());
    for (col, &s) in states.iter().enumerate() {
        let mz: f64 = (0..n).map(|j| if s & (1 << j) == 0 { 1.0 } else { -1.0 }).sum();
        let d = -field * mz;
        m.write(col, col, c64::new(d.re, d.im));
        for j in 0..n {
            let t = s ^ (1 << j) ^ (1 << ((j + 1) % n));
            let row = index[t];
            let prev = m.read(row, col);
            m.write(row, col, c64::new(prev.re - p.j, prev.im));
        }
    }
    m
}

#[test]
fn momentum_grids() {
    assert_eq!(discrete_momenta(2).unwrap().ks, vec![-PI / 2.0, PI / 2.0]);
    let k4 = discrete_momenta(4).unwrap().ks;
    let want = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
    assert!(k4.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
    for n in (2..=12).step_by(2) {
        let ks = discrete_momenta(n).unwrap().ks;
        assert_eq!(ks.len(), n);
        for &k in &ks {
            assert!(ks.iter().any(|&m| (m + k).abs() < 1e-12));
            assert!(k.abs() > 1e-12 && (k.abs() - PI).abs() > 1e-12);
        }
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }
    assert!(matches!(discrete_momenta(5), Err(Error::Domain(_))));
    assert!(matches!(discrete_momenta(14), Err(Error::Domain(_))));
    assert!(matches!(discrete_momenta(0), Err(Error::Domain(_))));
}

#[test]
fn fermion_operators_anticommute() {
    for n in [2, 4, 6] {
        let ops = build_hamiltonian(n, &params(0.5, 1.0)).unwrap();
        assert!(ops.anticommutator_defect().unwrap() <= ANTICOMMUTATOR_TOL);
    }
}

#[test]
fn hermitian_without_dissipation() {
    let ops = build_hamiltonian(6, &params(0.7, 0.0)).unwrap();
    let h = &ops.hamiltonian;
    for r in 0..ops.dim() {
        for c in 0..ops.dim() {
            let (a, b) = (h.read(r, c), h.read(c, r));
            assert!((a.re - b.re).abs() <= 1e-12 && (a.im + b.im).abs() <= 1e-12);
        }
    }
}

#[test]
fn even_spectrum_matches_mode_sums() {
    let ops = build_hamiltonian(4, &params(0.5, 1.0)).unwrap();
    let want = analytic_even_spectrum(4, &params(0.5, 1.0)).unwrap();
    assert!(spectrum_mismatch(&ops.even_spectrum(), &want) < 1e-9);
    for n in [4, 6, 8] {
        for (h, g) in POINTS {
            let p = params(h, g);
            let got = build_hamiltonian(n, &p).unwrap().even_spectrum();
            let d = spectrum_mismatch(&got, &analytic_even_spectrum(n, &p).unwrap());
            assert!(d < 1e-9, "N={n} ({h}, {g}): {d}");
        }
    }
}

#[test]
fn vacuum_energy_has_largest_imaginary_part() {
    for (h, g) in POINTS {
        let p = params(h, g);
        let ops = build_hamiltonian(6, &p).unwrap();
        let e0 = vacuum_energy(&p, &abc_momenta(6).unwrap());
        assert!(e0.im >= 0.0);
        let top = ops.even_spectrum().into_iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        assert!((top - e0.im).abs() < 1e-9);
    }
}

#[test]
fn spin_chain_is_isospectral() {
    for n in [4, 6] {
        for (h, g) in POINTS {
            let p = params(h, g);
            let spin = eigenvalues(&spin_chain_even_sector(n, &p));
            let fermion = build_hamiltonian(n, &p).unwrap().even_spectrum();
            let d = spectrum_mismatch(&spin, &fermion);
            assert!(d < 1e-9, "N={n} ({h}, {g}): {d}");
        }
    }
}

#[test]
fn vacuum_is_an_annihilated_eigenstate() {
    for n in [4, 6, 8] {
        for (h, g) in POINTS {
            let p = params(h, g);
            let ops = build_hamiltonian(n, &p).unwrap();
            let omega = vacuum_state(&ops).unwrap();
            assert!((norm(&omega) - 1.0).abs() < 1e-14);
            assert!(ops.eta_residual(&omega).unwrap() <= 1e-10);
            let e0 = vacuum_energy(&p, &ops.momenta.ks);
            let r: Vec<C64> = ops.apply_hamiltonian(&omega).iter().zip(&omega).map(|(a, b)| a - e0 * b).collect();
            assert!(norm(&r) <= 1e-9, "N={n} ({h}, {g}): {}", norm(&r));
        }
    }
}

#[test]
fn exceptional_grid_is_rejected() {
    let p0 = params((PI / 4.0).cos(), 0.0);
    let p = p0.with_gamma(p0.gamma_critical());
    let ops = build_hamiltonian(4, &p).unwrap();
    assert!(matches!(vacuum_state(&ops), Err(Error::ExceptionalPoint(_))));
}

#[test]
fn dense_evolution_matches_mode_products() {
    for n in [4, 6, 8] {
        for (h, g) in POINTS {
            let p = params(h, g);
            let ops = build_hamiltonian(n, &p).unwrap();
            let prop = Propagator::new(ops.hamiltonian.as_ref()).unwrap();
            let psi0 = ops.empty_state();
            let at0 = evolve_normalized(&prop, &psi0, 0.0).unwrap();
            assert!(1.0 - overlap(&psi0, &at0).norm() < 1e-12);
            for t in [0.3, 1.0, 2.5, 6.0] {
                let exact = evolve_normalized(&prop, &psi0, t).unwrap();
                let product = product_evolved_state(&ops, t).unwrap();
                let deficit = 1.0 - overlap(&product, &exact).norm();
                assert!(deficit <= 1e-10, "N={n} ({h}, {g}) t={t}: {deficit}");
            }
        }
    }
}

#[test]
fn evolution_requires_normalized_state() {
    let ops = build_hamiltonian(4, &params(0.5, 1.0)).unwrap();
    let prop = Propagator::new(ops.hamiltonian.as_ref()).unwrap();
    let twice: Vec<C64> = ops.empty_state().iter().map(|z| z * 2.0).collect();
    assert!(matches!(evolve_normalized(&prop, &twice, 1.0), Err(Error::Domain(_))));
}

#[test]
fn gapped_evolution_reaches_vacuum() {
    let p = params(0.5, 6.0);
    let ops = build_hamiltonian(8, &p).unwrap();
    let t_star = stationary_time(&p, &ops.momenta.ks).unwrap().t_star;
    let prop = Propagator::new(ops.hamiltonian.as_ref()).unwrap();
    let psi = evolve_normalized(&prop, &ops.empty_state(), 3.0 * t_star).unwrap();
    let omega = vacuum_state(&ops).unwrap();
    assert!(overlap(&omega, &psi).norm() >= 1.0 - 1e-3);
}

#[test]
fn same_site_correlator_matches_discrete_spread() {
    for n in [4, 6, 8] {
        for (h, g) in POINTS {
            let p = params(h, g);
            let ops = build_hamiltonian(n, &p).unwrap();
            let s = discrete_spread(n, &p).unwrap();
            let c0 = czz_exact(&ops, 0).unwrap();
            assert!((c0 - (1.0 - (2.0 * s - 1.0).powi(2))).abs() < 1e-9);
        }
    }
}

#[test]
fn wick_assembly_on_ten_sites() {
    let p = params(0.5, 5.0);
    let ops = build_hamiltonian(10, &p).unwrap();
    let d = (czz_exact(&ops, 2).unwrap() - czz_wick_discrete(10, &p, 2).unwrap()).abs();
    assert!(d < 1e-9, "{d}");
}

#[test]
fn wick_theorem_on_random_draws() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
    let mut draws = 0;
    while draws < 20 {
        let p = params(rng.gen_range(0.0..3.0), rng.gen_range(0.0..8.0));
        let n = [4, 6, 8][rng.gen_range(0..3)];
        let ops = build_hamiltonian(n, &p).unwrap();
        if matches!(vacuum_state(&ops), Err(Error::ExceptionalPoint(_))) {
            continue;
        }
        for x in 0..n {
            let d = (czz_exact(&ops, x).unwrap() - czz_wick_discrete(n, &p, x).unwrap()).abs();
            assert!(d < 1e-9, "N={n} {p:?} x={x}: {d}");
        }
        draws += 1;
    }
    let ops = build_hamiltonian(4, &params(0.5, 1.0)).unwrap();
    assert!(matches!(czz_exact(&ops, 4), Err(Error::Domain(_))));
}

#[test]
fn critical_correlator_approaches_thermodynamic_value() {
    let p = params(1.0, 0.0);
    let want = 4.0 / (15.0 * PI * PI);
    let gaps: Vec<f64> = [4, 6, 8, 10, 12]
        .iter()
        .map(|&n| (czz_exact(&build_hamiltonian(n, &p).unwrap(), 2).unwrap() - want).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] * 144.0 < 0.5, "{gaps:?}");
}

#[test]
fn krylov_basis_is_orthonormal() {
    for n in [4, 6, 8] {
        for (h, g) in POINTS {
            let ops = build_hamiltonian(n, &params(h, g)).unwrap();
            let b = krylov_basis(ops.hamiltonian.as_ref(), &ops.empty_state()).unwrap();
            assert!(b.orthonormality_defect() <= 1e-9);
            assert!(b.dim() <= 1 << (n / 2));
        }
    }
}

#[test]
fn krylov_spread_starts_at_zero() {
    let ops = build_hamiltonian(6, &params(0.5, 6.0)).unwrap();
    assert!(krylov_spread_exact(ops.hamiltonian.as_ref(), &ops.empty_state(), 0.0).unwrap().abs() < 1e-14);
}

/// Spread of a two-level su(2) evolution started in the lowest weight state.
fn su2_spread(r: C64, s: f64, t: f64) -> f64 {
    let w2 = r.norm_sqr() + s * s / 4.0;
    r.norm_sqr() / w2 * (t * w2.sqrt()).sin().powi(2)
}

#[test]
fn krylov_spread_of_a_single_mode() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let r = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let s = rng.gen_range(-3.0..3.0);
        let shift = rng.gen_range(-1.0..1.0);
        let t = rng.gen_range(0.0..5.0);
        let h = Mat::<c64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(-s / 2.0 + shift, 0.0),
            (1, 1) => c64::new(s / 2.0 + shift, 0.0),
            (0, 1) => c64::new(r.re, -r.im),
            _ => c64::new(r.re, r.im),
        });
        let psi0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let got = krylov_spread_exact(h.as_ref(), &psi0, t).unwrap();
        assert!((got - su2_spread(r, s, t)).abs() < 1e-10, "{got} vs {}", su2_spread(r, s, t));
    }
}

#[test]
fn krylov_spread_approaches_mode_sum_with_size() {
    let p = params(0.5, 6.0);
    let t = 0.7;
    let diffs: Vec<f64> = [4, 6, 8]
        .iter()
        .map(|&n| {
            let ops = build_hamiltonian(n, &p).unwrap();
            let exact = krylov_spread_exact(ops.hamiltonian.as_ref(), &ops.empty_state(), t).unwrap();
            let modes: f64 = ops.momenta.ks.iter().map(|&k| mode_spread(&Mode::at(&p, k), t, &p).unwrap()).sum();
            ((exact - modes) / n as f64).abs()
        })
        .collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
}
