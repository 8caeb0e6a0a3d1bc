//! Brute-force validator in the fermionic Fock space of a finite ring with
//! anti-periodic boundary conditions.
//!
//! States are vectors over the even-parity sector, indexed in the order of
//! [`FockOperatorSet::basis`]. Basis states are occupation bitmasks with bit
//! s set when site s + 1 is occupied; fermionic signs follow the site order.

use crate::error::{Error, Result};
use crate::evolution::{gapless_stationary, mode_amplitudes_at};
use crate::model::{abc_momenta, cdiv, vacuum_energy, ModelParams, Mode, Tau, C64};
use faer::complex_native::c64;
use faer::prelude::*;
use faer::Mat;
use std::f64::consts::FRAC_PI_4;

pub const MAX_SITES: usize = 12;

/// Grids whose smallest |Λ(k)| falls below this multiple of J are rejected.
pub const EXCEPTIONAL_PRECHECK: f64 = 1e-6;

/// Build-time anticommutator check tolerance and the largest N it runs at.
pub const ANTICOMMUTATOR_TOL: f64 = 1e-12;
pub const ANTICOMMUTATOR_CHECK_MAX_SITES: usize = 6;

/// Krylov residuals below this fraction of ‖H K_n‖ end the basis.
pub const KRYLOV_TRUNCATION: f64 = 1e-10;
pub const KRYLOV_ORTHONORMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSet {
    pub ks: Vec<f64>,
}

impl MomentumSet {
    pub fn positive(&self) -> impl Iterator<Item = f64> + '_ {
        self.ks.iter().copied().filter(|&k| k > 0.0)
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n < 2 || n > MAX_SITES || n % 2 != 0 {
        return Err(Error::Domain(format!("site count must be even in [2, {MAX_SITES}], got {n}")));
    }
    Ok(())
}

/// Anti-periodic momentum grid of an N-site ring.
pub fn discrete_momenta(n: usize) -> Result<MomentumSet> {
    check_sites(n)?;
    Ok(MomentumSet { ks: abc_momenta(n)? })
}

fn to_faer(z: C64) -> c64 {
    c64::new(z.re, z.im)
}

fn from_faer(z: c64) -> C64 {
    C64::new(z.re, z.im)
}

/// c_site acting on a basis state.
pub fn annihilate(state: usize, site: usize) -> Option<(usize, f64)> {
    if state & (1 << site) == 0 {
        return None;
    }
    let below = (state & ((1 << site) - 1)).count_ones();
    Some((state ^ (1 << site), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

/// c_site† acting on a basis state.
pub fn create(state: usize, site: usize) -> Option<(usize, f64)> {
    if state & (1 << site) != 0 {
        return None;
    }
    let below = (state & ((1 << site) - 1)).count_ones();
    Some((state ^ (1 << site), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

/// A product of site operators applied right to left; `true` marks c†.
fn apply_string(ops: &[(usize, bool)], state: usize) -> Option<(usize, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(site, dagger) in ops.iter().rev() {
        let (next, sg) = if dagger { create(s, site)? } else { annihilate(s, site)? };
        s = next;
        sign *= sg;
    }
    Some((s, sign))
}

#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub n: usize,
    pub params: ModelParams,
    pub momenta: MomentumSet,
    /// Even-parity occupation bitmasks in increasing order.
    pub basis: Vec<usize>,
    /// Position of each bitmask in `basis`, `usize::MAX` for odd states.
    pub index: Vec<usize>,
    /// Hamiltonian restricted to the even sector.
    pub hamiltonian: Mat<c64>,
}

/// Dense Hamiltonian of the ring with c_{N+1} = −c₁ in the even-parity sector.
pub fn build_hamiltonian(n: usize, p: &ModelParams) -> Result<FockOperatorSet> {
    let momenta = discrete_momenta(n)?;
    let full = 1usize << n;
    let basis: Vec<usize> = (0..full).filter(|s| s.count_ones() % 2 == 0).collect();
    let mut index = vec![usize::MAX; full];
    for (i, &s) in basis.iter().enumerate() {
        index[s] = i;
    }
    let field = C64::new(p.h, p.gamma / 4.0);
    let mut hm = Mat::<c64>::zeros(basis.len(), basis.len());
    for (col, &s) in basis.iter().enumerate() {
        let mut diag = C64::new(0.0, 0.0);
        for site in 0..n {
            let sz = if s & (1 << site) == 0 { 1.0 } else { -1.0 };
            diag -= field * sz;
        }
        hm.write(col, col, to_faer(diag));
        for j in 0..n {
            let l = (j + 1) % n;
            let bc = if l == 0 { -1.0 } else { 1.0 };
            let terms: [&[(usize, bool)]; 4] =
                [&[(j, true), (l, false)], &[(l, true), (j, false)], &[(j, true), (l, true)], &[(l, false), (j, false)]];
            for ops in terms {
                if let Some((t, sign)) = apply_string(ops, s) {
                    let row = index[t];
                    let v = hm.read(row, col) + c64::new(-p.j * bc * sign, 0.0);
                    hm.write(row, col, v);
                }
            }
        }
    }
    let ops = FockOperatorSet { n, params: *p, momenta, basis, index, hamiltonian: hm };
    if n <= ANTICOMMUTATOR_CHECK_MAX_SITES {
        let defect = ops.anticommutator_defect()?;
        if defect > ANTICOMMUTATOR_TOL {
            return Err(Error::Domain(format!("fermion operators violate the algebra by {defect:e}")));
        }
    }
    Ok(ops)
}

impl FockOperatorSet {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dense c_site on the full 2^N Fock space.
    pub fn annihilation_matrix(&self, site: usize) -> Result<Mat<c64>> {
        if site >= self.n {
            return Err(Error::Domain(format!("site {site} outside a ring of {} sites", self.n)));
        }
        let full = 1usize << self.n;
        let mut m = Mat::<c64>::zeros(full, full);
        for s in 0..full {
            if let Some((t, sign)) = annihilate(s, site) {
                m.write(t, s, c64::new(sign, 0.0));
            }
        }
        Ok(m)
    }

    /// Largest entry of {c_i, c_j†} − δ_ij and {c_i, c_j} over all site pairs.
    pub fn anticommutator_defect(&self) -> Result<f64> {
        let full = 1usize << self.n;
        let cs: Vec<Mat<c64>> = (0..self.n).map(|i| self.annihilation_matrix(i)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let cj_dag = cs[j].adjoint().to_owned();
                let mixed = &cs[i] * &cj_dag + &cj_dag * &cs[i];
                let pure = &cs[i] * &cs[j] + &cs[j] * &cs[i];
                for r in 0..full {
                    for c in 0..full {
                        let delta = if i == j && r == c { 1.0 } else { 0.0 };
                        worst = worst.max((from_faer(mixed.read(r, c)) - delta).norm());
                        worst = worst.max(from_faer(pure.read(r, c)).norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn apply_hamiltonian(&self, psi: &[C64]) -> Vec<C64> {
        let dim = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (row, o) in out.iter_mut().enumerate() {
            for col in 0..dim {
                let h = self.hamiltonian.read(row, col);
                if h.re != 0.0 || h.im != 0.0 {
                    *o += from_faer(h) * psi[col];
                }
            }
        }
        out
    }

    /// Eigenvalues of the even-sector Hamiltonian.
    pub fn even_spectrum(&self) -> Vec<C64> {
        let evd = self.hamiltonian.eigendecomposition::<c64>();
        let s = evd.s();
        (0..self.dim()).map(|i| from_faer(s.column_vector().read(i))).collect()
    }

    /// ⟨σ^z_a σ^z_b⟩ − ⟨σ^z_a⟩⟨σ^z_b⟩ in a normalized even-sector state.
    pub fn zz_connected(&self, psi: &[C64], a: usize, b: usize) -> f64 {
        let sz = |s: usize, site: usize| if s & (1 << site) == 0 { 1.0 } else { -1.0 };
        let (mut ab, mut za, mut zb) = (0.0, 0.0, 0.0);
        for (i, &s) in self.basis.iter().enumerate() {
            let w = psi[i].norm_sqr();
            ab += w * sz(s, a) * sz(s, b);
            za += w * sz(s, a);
            zb += w * sz(s, b);
        }
        ab - za * zb
    }
}

/// Every E_Ω + Σ_{k∈𝕂} Λ(k) over subsets 𝕂 of even size.
pub fn analytic_even_spectrum(n: usize, p: &ModelParams) -> Result<Vec<C64>> {
    let m = discrete_momenta(n)?;
    let lambdas: Vec<C64> = m.ks.iter().map(|&k| Mode::at(p, k).lambda).collect();
    let e0 = vacuum_energy(p, &m.ks);
    Ok((0usize..1 << n)
        .filter(|s| s.count_ones() % 2 == 0)
        .map(|s| e0 + (0..n).filter(|&i| s & (1 << i) != 0).map(|i| lambdas[i]).sum::<C64>())
        .collect())
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
pub fn spectrum_mismatch(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, &y) in b.iter().enumerate() {
            let d = (x - y).norm();
            if !used[j] && d < best.0 {
                best = (d, j);
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Rejects parameters with an exceptional point near the grid.
pub fn exceptional_precheck(n: usize, p: &ModelParams) -> Result<()> {
    for &k in &discrete_momenta(n)?.ks {
        if Mode::at(p, k).lambda.norm() < EXCEPTIONAL_PRECHECK * p.j {
            return Err(Error::ExceptionalPoint(k));
        }
    }
    Ok(())
}

/// Eigendecomposition of a square matrix, reused for every time.
pub struct Propagator {
    values: Vec<C64>,
    vectors: Mat<c64>,
    lu: faer::solvers::PartialPivLu<c64>,
}

impl Propagator {
    pub fn new(h: faer::MatRef<'_, c64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() == 0 {
            return Err(Error::Domain("propagator needs a nonempty square matrix".into()));
        }
        let evd = h.eigendecomposition::<c64>();
        let n = h.nrows();
        let values = (0..n).map(|i| from_faer(evd.s().column_vector().read(i))).collect();
        let vectors = evd.u().to_owned();
        let lu = vectors.partial_piv_lu();
        Ok(Self { values, vectors, lu })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    fn eigen_coefficients(&self, psi0: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if psi0.len() != n {
            return Err(Error::Domain(format!("state has length {}, expected {n}", psi0.len())));
        }
        let rhs = Mat::<c64>::from_fn(n, 1, |i, _| to_faer(psi0[i]));
        let a = self.lu.solve(&rhs);
        let back = &self.vectors * &a;
        let norm0 = norm(psi0);
        let residual = (0..n).map(|i| (from_faer(back.read(i, 0)) - psi0[i]).norm_sqr()).sum::<f64>().sqrt();
        let size = (0..n).map(|i| from_faer(a.read(i, 0)).norm_sqr()).sum::<f64>().sqrt();
        if !(residual <= 1e-10 * norm0) || !(size <= 1e10 * norm0) {
            return Err(Error::EigendecompositionFailure(format!(
                "eigenvectors do not resolve the state (residual {residual:e}, coefficient norm {size:e})"
            )));
        }
        Ok((0..n).map(|i| from_faer(a.read(i, 0))).collect())
    }

    /// exp(−iHt)ψ₀ normalized.
    pub fn evolve(&self, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
        let a = self.eigen_coefficients(psi0)?;
        let growth = self
            .values
            .iter()
            .zip(&a)
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(l, _)| l.im * t)
            .fold(f64::NEG_INFINITY, f64::max);
        let n = self.dim();
        let c = Mat::<c64>::from_fn(n, 1, |i, _| {
            to_faer(a[i] * (C64::new(0.0, -1.0) * self.values[i] * t - growth).exp())
        });
        let psi = &self.vectors * &c;
        let out: Vec<C64> = (0..n).map(|i| from_faer(psi.read(i, 0))).collect();
        normalized(out)
    }
}

/// exp(−iHt)ψ₀/‖exp(−iHt)ψ₀‖.
pub fn evolve_normalized(prop: &Propagator, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    if (norm(psi0) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("initial state must be normalized".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    prop.evolve(psi0, t)
}

pub fn norm(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(mut psi: Vec<C64>) -> Result<Vec<C64>> {
    let n = norm(&psi);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Singular("state has zero or non-finite norm".into()));
    }
    psi.iter_mut().for_each(|z| *z /= n);
    Ok(psi)
}

/// ⟨a|b⟩.
pub fn overlap(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl FockOperatorSet {
    /// Fock vacuum, the state with no fermions.
    pub fn empty_state(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index[0]] = C64::new(1.0, 0.0);
        v
    }

    /// P_k = c_k† c_{−k}† applied to an even-sector vector.
    pub fn apply_pair(&self, k: f64, psi: &[C64]) -> Vec<C64> {
        let n = self.n;
        let pref = C64::new(0.0, -1.0 / n as f64);
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (col, &s) in self.basis.iter().enumerate() {
            if psi[col] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                for l in 0..n {
                    if j == l {
                        continue;
                    }
                    if let Some((t, sign)) = apply_string(&[(j, true), (l, true)], s) {
                        let phase = C64::from_polar(1.0, k * (j as f64 - l as f64));
                        out[self.index[t]] += pref * phase * sign * psi[col];
                    }
                }
            }
        }
        out
    }

    /// Normalized Π_{k>0}(α_k + β_k P_k)|0⟩ for the given (k, α_k, β_k).
    pub fn pair_product_state(&self, pairs: &[(f64, C64, C64)]) -> Result<Vec<C64>> {
        let mut psi = self.empty_state();
        for &(k, alpha, beta) in pairs {
            let paired = self.apply_pair(k, &psi);
            psi = psi.iter().zip(&paired).map(|(a, b)| alpha * a + beta * b).collect();
        }
        normalized(psi)
    }

    /// c_k on the full Fock space, with c_k = e^{iπ/4}N^{−1/2}Σ_j e^{−ikj}c_j.
    fn apply_momentum(&self, k: f64, dagger: bool, psi: &[C64]) -> Vec<C64> {
        let n = self.n;
        let full = 1usize << n;
        let pref = C64::from_polar(1.0 / (n as f64).sqrt(), if dagger { -FRAC_PI_4 } else { FRAC_PI_4 });
        let mut out = vec![C64::new(0.0, 0.0); full];
        for s in 0..full {
            if psi[s] == C64::new(0.0, 0.0) {
                continue;
            }
            for site in 0..n {
                let j = (site + 1) as f64;
                let hit = if dagger { create(s, site) } else { annihilate(s, site) };
                if let Some((t, sign)) = hit {
                    let phase = C64::from_polar(1.0, if dagger { k * j } else { -k * j });
                    out[t] += pref * phase * sign * psi[s];
                }
            }
        }
        out
    }

    fn embed(&self, psi: &[C64]) -> Vec<C64> {
        let mut full = vec![C64::new(0.0, 0.0); 1 << self.n];
        for (i, &s) in self.basis.iter().enumerate() {
            full[s] = psi[i];
        }
        full
    }

    /// Largest ‖η_k ψ‖ over the grid, with η_k ∝ c_k + τ_k c_{−k}† for k > 0
    /// and η_{−k} ∝ c_{−k} − τ_k c_k†, each normalized by √(1 + |τ_k|²).
    pub fn eta_residual(&self, psi: &[C64]) -> Result<f64> {
        exceptional_precheck(self.n, &self.params)?;
        let full = self.embed(psi);
        let mut worst: f64 = 0.0;
        for k in self.momenta.positive() {
            let (a, b) = match Mode::at(&self.params, k).tau() {
                Tau::Finite(t) => {
                    let s = (1.0 + t.norm_sqr()).sqrt();
                    (C64::new(1.0 / s, 0.0), t / s)
                }
                Tau::Infinite => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            };
            let plus: Vec<C64> = self
                .apply_momentum(k, false, &full)
                .iter()
                .zip(self.apply_momentum(-k, true, &full))
                .map(|(x, y)| a * x + b * y)
                .collect();
            let minus: Vec<C64> = self
                .apply_momentum(-k, false, &full)
                .iter()
                .zip(self.apply_momentum(k, true, &full))
                .map(|(x, y)| a * x - b * y)
                .collect();
            worst = worst.max(norm(&plus)).max(norm(&minus));
        }
        Ok(worst)
    }
}

fn vacuum_pair(mode: &Mode) -> (C64, C64) {
    match mode.tau() {
        Tau::Finite(t) => (C64::new(1.0, 0.0), -t),
        Tau::Infinite => (C64::new(0.0, 0.0), C64::new(-1.0, 0.0)),
    }
}

/// Right vacuum Π_{k>0}(1 − τ_k P_k)/√(1+|τ_k|²)|0⟩.
pub fn vacuum_state(ops: &FockOperatorSet) -> Result<Vec<C64>> {
    exceptional_precheck(ops.n, &ops.params)?;
    let pairs: Vec<(f64, C64, C64)> = ops
        .momenta
        .positive()
        .map(|k| {
            let (a, b) = vacuum_pair(&Mode::at(&ops.params, k));
            (k, a, b)
        })
        .collect();
    ops.pair_product_state(&pairs)
}

/// Product of the exactly evolved pair states at time t.
pub fn product_evolved_state(ops: &FockOperatorSet, t: f64) -> Result<Vec<C64>> {
    let mut pairs = Vec::new();
    for k in ops.momenta.positive() {
        let a = mode_amplitudes_at(&Mode::at(&ops.params, k), t, &ops.params)?;
        pairs.push((k, a.state2[0], a.state2[1]));
    }
    ops.pair_product_state(&pairs)
}

/// 𝒜(t)|Ω⟩ + 𝒜*(t)|q,−q⟩, where |q,−q⟩ replaces the q pair of |Ω⟩ by the
/// excited pair state (1 + τ_q⁻¹P_q)|0⟩·|τ_q|/√(1+|τ_q|²).
pub fn gapless_stationary_state(ops: &FockOperatorSet, t: f64) -> Result<Vec<C64>> {
    let p = &ops.params;
    let g = gapless_stationary(t, p)?;
    let q = p.q().ok_or(Error::GappedPhase)?;
    let on_grid = ops.momenta.positive().find(|&k| (k - q).abs() < 1e-12);
    let Some(kq) = on_grid else {
        return Err(Error::Domain(format!("q = {q} is not a momentum of the {}-site ring", ops.n)));
    };
    let mut pairs = Vec::new();
    for k in ops.momenta.positive() {
        let mode = Mode::at(p, k);
        if k == kq {
            let tau = mode.tau().finite().ok_or(Error::ExceptionalPoint(k))?;
            let s = (1.0 + tau.norm_sqr()).sqrt();
            let ground = (C64::new(1.0 / s, 0.0), -tau / s);
            let scale = tau.norm() / s;
            let excited = (C64::new(scale, 0.0), cdiv(C64::new(scale, 0.0), tau));
            let amp = g.amp;
            pairs.push((k, amp * ground.0 + amp.conj() * excited.0, amp * ground.1 + amp.conj() * excited.1));
        } else {
            if mode.lambda.norm() < EXCEPTIONAL_PRECHECK * p.j {
                return Err(Error::ExceptionalPoint(k));
            }
            let (a, b) = vacuum_pair(&mode);
            pairs.push((k, a, b));
        }
    }
    ops.pair_product_state(&pairs)
}

/// ⟨Ω|σ^z_0 σ^z_x|Ω⟩ − ⟨Ω|σ^z_0|Ω⟩⟨Ω|σ^z_x|Ω⟩ on the ring.
pub fn czz_exact(ops: &FockOperatorSet, x: usize) -> Result<f64> {
    if x >= ops.n {
        return Err(Error::Domain(format!("separation {x} must be below N = {}", ops.n)));
    }
    let omega = vacuum_state(ops)?;
    Ok(ops.zz_connected(&omega, 0, x))
}

/// (1/N)Σ_k w_k, the spread density of the finite ring.
pub fn discrete_spread(n: usize, p: &ModelParams) -> Result<f64> {
    exceptional_precheck(n, p)?;
    let m = discrete_momenta(n)?;
    Ok(m.ks.iter().map(|&k| Mode::at(p, k).weight()).sum::<f64>() / n as f64)
}

/// C^zz(x) from Wick's theorem with momentum sums over the finite grid.
pub fn czz_wick_discrete(n: usize, p: &ModelParams, x: usize) -> Result<f64> {
    exceptional_precheck(n, p)?;
    if x >= n {
        return Err(Error::Domain(format!("separation {x} must be below N = {n}")));
    }
    let m = discrete_momenta(n)?;
    let nf = n as f64;
    let i = C64::new(0.0, 1.0);
    let mut normal = [C64::new(0.0, 0.0); 3];
    let mut anomalous = [C64::new(0.0, 0.0); 3];
    for &k in &m.ks {
        let mode = Mode::at(p, k.abs());
        let w = mode.weight();
        let pair = match mode.tau() {
            Tau::Finite(t) => cdiv(t, C64::new(1.0 + t.norm_sqr(), 0.0)),
            Tau::Infinite => C64::new(0.0, 0.0),
        };
        let a = if k > 0.0 { pair } else { -pair };
        for (slot, r) in [(0, 0.0), (1, x as f64), (2, -(x as f64))] {
            normal[slot] += C64::from_polar(w / nf, k * r);
            anomalous[slot] += -i / nf * C64::from_polar(1.0, -k * r) * a;
        }
    }
    // cdag_c(r) = ⟨c_i†c_{i+r}⟩, cc(r) = ⟨c_i c_{i+r}⟩, cdcd(r) = ⟨c_i†c_{i+r}†⟩.
    let cdag_c = |r: usize| normal[r];
    let cc = |r: usize| anomalous[r];
    let cdcd = |r: usize| -cc(r).conj();
    let c_cdag = |r: usize, other: usize| if r == 0 { 1.0 - cdag_c(0) } else { -cdag_c(other) };
    let fwd = if x == 0 { 0 } else { 1 };
    let back = if x == 0 { 0 } else { 2 };
    let aa = cdcd(fwd) + cdag_c(fwd) + c_cdag(fwd, back) + cc(fwd);
    let bb = cdcd(fwd) - cdag_c(fwd) - c_cdag(fwd, back) + cc(fwd);
    let ab = cdcd(fwd) - cdag_c(fwd) + c_cdag(fwd, back) - cc(fwd);
    let ba = cdcd(fwd) + cdag_c(fwd) - c_cdag(fwd, back) - cc(fwd);
    if x == 0 {
        let sz = ab;
        return Ok(1.0 - (sz * sz).re);
    }
    Ok((ab * ba - aa * bb).re)
}

/// Orthonormal basis of span{Hⁿψ₀} from modified Gram–Schmidt with a second
/// reorthogonalization pass.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub vectors: Vec<Vec<C64>>,
}

fn mat_vec(h: faer::MatRef<'_, c64>, v: &[C64]) -> Vec<C64> {
    (0..h.nrows()).map(|r| (0..h.ncols()).map(|c| from_faer(h.read(r, c)) * v[c]).sum()).collect()
}

pub fn krylov_basis(h: faer::MatRef<'_, c64>, psi0: &[C64]) -> Result<KrylovBasis> {
    if h.nrows() != h.ncols() || psi0.len() != h.nrows() {
        return Err(Error::Domain("Krylov basis needs a square matrix matching the state".into()));
    }
    let mut vectors = vec![normalized(psi0.to_vec())?];
    while vectors.len() < psi0.len() {
        let mut r = mat_vec(h, vectors.last().expect("nonempty"));
        let scale = norm(&r);
        for _ in 0..2 {
            for v in &vectors {
                let c = overlap(v, &r);
                r.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let rn = norm(&r);
        if !(rn >= KRYLOV_TRUNCATION * scale) || scale == 0.0 {
            break;
        }
        r.iter_mut().for_each(|z| *z /= rn);
        vectors.push(r);
    }
    let basis = KrylovBasis { vectors };
    if basis.orthonormality_defect() > KRYLOV_ORTHONORMALITY_TOL {
        return Err(Error::BasisBreakdown(basis.vectors.len()));
    }
    Ok(basis)
}

impl KrylovBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((overlap(a, b) - delta).norm());
            }
        }
        worst
    }

    /// Σ n|⟨K_n|ψ⟩|².
    pub fn spread(&self, psi: &[C64]) -> f64 {
        self.vectors.iter().enumerate().map(|(n, k)| n as f64 * overlap(k, psi).norm_sqr()).sum()
    }

    /// Matrix ⟨K_m|H|K_n⟩ of H in the basis.
    pub fn projected(&self, h: faer::MatRef<'_, c64>) -> Mat<c64> {
        let hk: Vec<Vec<C64>> = self.vectors.iter().map(|v| mat_vec(h, v)).collect();
        Mat::<c64>::from_fn(self.dim(), self.dim(), |m, n| to_faer(overlap(&self.vectors[m], &hk[n])))
    }
}

/// Σ n|⟨K_n|ψ(t)⟩|² with ψ(t) = exp(−iHt)ψ₀ normalized.
///
/// The Krylov space is invariant under H once the residual vanishes, so the
/// evolution runs on the projected matrix.
pub fn krylov_spread_exact(h: faer::MatRef<'_, c64>, psi0: &[C64], t: f64) -> Result<f64> {
    if h.nrows() > 1 << MAX_SITES {
        return Err(Error::Domain(format!("dimension {} exceeds 2^{MAX_SITES}", h.nrows())));
    }
    let basis = krylov_basis(h, psi0)?;
    let prop = Propagator::new(basis.projected(h).as_ref())?;
    let mut e0 = vec![C64::new(0.0, 0.0); basis.dim()];
    e0[0] = C64::new(1.0, 0.0);
    let phi = evolve_normalized(&prop, &e0, t)?;
    Ok(phi.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum())
}
