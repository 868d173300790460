//! Coupled light-matter Hamiltonians over (matter grid) x (photon Fock
//! basis), kept real symmetric in both gauges.
//!
//! Length gauge, in the bare number basis of each mode:
//! `H = H_M + sum_a [ w_a (n_a + 1/2) + (lam_a.mu)^2 / 2 - w_a q_a (lam_a.mu) ]`
//! with `<n|q|n+1> = sqrt((n+1)/(2w))`.
//!
//! Velocity gauge, in the phase-rotated number basis `|n> -> i^n |n>` where
//! `q -> i K` (K real antisymmetric) and `p` becomes real symmetric:
//! `H = H_M' + sum_a w_a (n_a + 1/2) - (1/m) A.D' + F A^2`, every term real.
//! Here D' is the antisymmetric derivative stencil (`sum_l p_l = -i D'`), so
//! the paramagnetic product `(iK) x (-iD')` is the real `K x D'`, and
//! `A^2` picks up `(iK_a)(iK_b) = -K_a K_b`.
//!
//! Composite indices are `block * matter_dim + matter_index`.

use crate::error::{Error, Result};
use crate::fock::{FockTruncation, PhotonBasis};
use crate::matter::MatterOperator;
use crate::par;
use crate::photons::{average_bath, truncate_lowest, PhotonBath};
use crate::solver::{self, SolverConfig};
use crate::sparse::{Csr, SymOp, TripletBuilder};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Length,
    Velocity,
}

/// Approximation strategy tags; external names follow the config strings
/// `exact`, `m_dse`, `nrqed_low`, `nrqed_ave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Strategy {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "m_dse")]
    MeanFieldDse,
    #[serde(rename = "nrqed_low")]
    LowestMode,
    #[serde(rename = "nrqed_ave")]
    AveragedMode,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::MeanFieldDse => "m_dse",
            Strategy::LowestMode => "nrqed_low",
            Strategy::AveragedMode => "nrqed_ave",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Refuse composite dimensions above this budget.
    pub max_dimension: u128,
    /// Explicit CSR below this dimension, matrix-free above.
    pub matrix_free_threshold: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { max_dimension: 5_000_000, matrix_free_threshold: 120_000 }
    }
}

/// Mean-field loop outcome for the matter-plus-self-energy strategy.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeanFieldState {
    pub mean_dipole: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Per-block ladder link used by the matrix-free form: block `b` couples to
/// `neighbor` through mode `mode` with pair amplitude
/// `-sqrt(w (n+1) / 2)` times the mode's dipole-projection diagonal.
#[derive(Debug, Clone, Copy)]
struct Link {
    neighbor: u32,
    mode: u16,
    coeff: f64,
}

#[derive(Debug, Clone)]
struct LengthGaugeKernel {
    photon_diag: Vec<f64>,
    dse_diag: Vec<f64>,
    links: Vec<Vec<Link>>,
}

#[derive(Debug, Clone)]
enum OperatorForm {
    Explicit(Csr),
    MatrixFree(LengthGaugeKernel),
}

/// A coupled operator with its basis bookkeeping.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    gauge: Gauge,
    strategy: Strategy,
    matter: Arc<MatterOperator>,
    bath: PhotonBath,
    basis: PhotonBasis,
    /// Per-mode diagonal lam_a . mu on the matter grid.
    lam_mu: Vec<Vec<f64>>,
    form: OperatorForm,
}

impl CoupledOperator {
    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn matter(&self) -> &Arc<MatterOperator> {
        &self.matter
    }

    pub fn bath(&self) -> &PhotonBath {
        &self.bath
    }

    pub fn basis(&self) -> &PhotonBasis {
        &self.basis
    }

    pub fn matter_dim(&self) -> usize {
        self.matter.dimension()
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn lam_mu(&self, mode: usize) -> &[f64] {
        &self.lam_mu[mode]
    }

    pub fn composite(&self, block: usize, matter_index: usize) -> usize {
        block * self.matter_dim() + matter_index
    }

    /// Inverse of [`Self::composite`].
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.matter_dim(), index % self.matter_dim())
    }

    pub fn explicit_matrix(&self) -> Option<&Csr> {
        match &self.form {
            OperatorForm::Explicit(m) => Some(m),
            OperatorForm::MatrixFree(_) => None,
        }
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self.form, OperatorForm::MatrixFree(_))
    }

    /// Zero-point energy of the photon space actually carried by this
    /// operator (zero for the photonless mean-field strategy).
    pub fn zero_point_energy(&self) -> f64 {
        if self.basis.n_modes() == 0 {
            0.0
        } else {
            self.bath.zero_point_energy()
        }
    }

    fn apply_matrix_free(&self, kernel: &LengthGaugeKernel, v: &[f64], out: &mut [f64], seq: bool) {
        let md = self.matter_dim();
        let matter = &self.matter;
        let body = |b: usize, out_b: &mut [f64]| {
            let v_b = &v[b * md..(b + 1) * md];
            matter.kinetic().apply_rows_seq(v_b, out_b);
            let pe = kernel.photon_diag[b];
            for (i, o) in out_b.iter_mut().enumerate() {
                *o += (matter.potential()[i] + kernel.dse_diag[i] + pe) * v_b[i];
            }
            for link in &kernel.links[b] {
                let v_n = &v[link.neighbor as usize * md..(link.neighbor as usize + 1) * md];
                let proj = &self.lam_mu[link.mode as usize];
                for i in 0..md {
                    out_b[i] += link.coeff * proj[i] * v_n[i];
                }
            }
        };
        if seq {
            par::for_each_block_mut_seq(out, md, body);
        } else {
            par::for_each_block_mut(out, md, body);
        }
    }
}

impl SymOp for CoupledOperator {
    fn dim(&self) -> usize {
        self.matter_dim() * self.basis.len()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        match &self.form {
            OperatorForm::Explicit(m) => m.apply_into(v, out),
            OperatorForm::MatrixFree(k) => self.apply_matrix_free(k, v, out, false),
        }
    }

    fn apply_seq_into(&self, v: &[f64], out: &mut [f64]) {
        match &self.form {
            OperatorForm::Explicit(m) => m.apply_seq_into(v, out),
            OperatorForm::MatrixFree(k) => self.apply_matrix_free(k, v, out, true),
        }
    }
}

/// lam_a . mu diagonals, one per mode; checks coupling-vector compatibility.
fn coupling_projections(matter: &MatterOperator, bath: &PhotonBath) -> Result<Vec<Vec<f64>>> {
    let dirs = matter.n_directions();
    bath.modes()
        .iter()
        .map(|m| {
            if m.coupling.len() != dirs {
                return Err(Error::Config(format!(
                    "mode coupling vector has {} components, matter has {dirs} directions",
                    m.coupling.len()
                )));
            }
            let mut proj = vec![0.0; matter.dimension()];
            for (d, &lam) in m.coupling.iter().enumerate() {
                if lam != 0.0 {
                    for (p, &mu) in proj.iter_mut().zip(matter.dipole(d)) {
                        *p += lam * mu;
                    }
                }
            }
            Ok(proj)
        })
        .collect()
}

fn check_budget(matter_dim: usize, photon_dim: Option<u128>, opts: &AssemblyOptions) -> Result<usize> {
    let dim = photon_dim
        .and_then(|p| p.checked_mul(matter_dim as u128))
        .unwrap_or(u128::MAX);
    if dim > opts.max_dimension {
        return Err(Error::Capacity { dimension: dim, budget: opts.max_dimension });
    }
    Ok(dim as usize)
}

fn photon_diagonal(basis: &PhotonBasis, bath: &PhotonBath) -> Vec<f64> {
    (0..basis.len())
        .map(|b| {
            basis
                .occupation(b)
                .iter()
                .zip(bath.modes())
                .map(|(&n, m)| m.omega * (n as f64 + 0.5))
                .sum()
        })
        .collect()
}

/// Dipole self-energy diagonal sum_a (lam_a . mu)^2 / 2.
fn dse_diagonal(lam_mu: &[Vec<f64>], matter_dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; matter_dim];
    for proj in lam_mu {
        for (o, &p) in out.iter_mut().zip(proj) {
            *o += 0.5 * p * p;
        }
    }
    out
}

/// Undirected bilinear links (block, raised block) with the pair coefficient
/// `-sqrt(w (n+1)/2)` of the `-w q (lam.mu)` term.
fn bilinear_links(basis: &PhotonBasis, bath: &PhotonBath) -> Vec<(u32, u32, u16, f64)> {
    let mut links = Vec::new();
    for b in 0..basis.len() {
        for (mode, m) in bath.modes().iter().enumerate() {
            if let Some(up) = basis.raised(b, mode) {
                let n = basis.occupation(b)[mode] as f64;
                let coeff = -(m.omega * (n + 1.0) / 2.0).sqrt();
                links.push((b as u32, up as u32, mode as u16, coeff));
            }
        }
    }
    links
}

/// Assemble the length-gauge Hamiltonian on the bath's modes.
pub fn assemble_length_gauge(
    matter: Arc<MatterOperator>,
    bath: &PhotonBath,
    truncation: FockTruncation,
    opts: &AssemblyOptions,
) -> Result<CoupledOperator> {
    truncation.validate()?;
    let photon_dim = truncation.dimension(bath.len());
    let dim = check_budget(matter.dimension(), photon_dim, opts)?;
    let basis = PhotonBasis::new(bath.len(), truncation)?;
    let lam_mu = coupling_projections(&matter, bath)?;
    let photon_diag = photon_diagonal(&basis, bath);
    let dse_diag = dse_diagonal(&lam_mu, matter.dimension());
    let links = bilinear_links(&basis, bath);

    let md = matter.dimension();
    let form = if dim <= opts.matrix_free_threshold {
        let nnz_estimate = basis.len() * (matter.kinetic().nnz() + md) + 2 * links.len() * md;
        let mut b = TripletBuilder::with_capacity(dim, dim, nnz_estimate);
        for block in 0..basis.len() {
            let off = block * md;
            for row in 0..md {
                for (col, v) in matter.kinetic().iter_row(row) {
                    b.push(off + row, off + col, v);
                }
                b.push(
                    off + row,
                    off + row,
                    matter.potential()[row] + dse_diag[row] + photon_diag[block],
                );
            }
        }
        for &(lo, up, mode, coeff) in &links {
            let proj = &lam_mu[mode as usize];
            let (lo_off, up_off) = (lo as usize * md, up as usize * md);
            for (i, &p) in proj.iter().enumerate() {
                b.push_sym(lo_off + i, up_off + i, coeff * p);
            }
        }
        let m = b.build();
        assert!(m.is_symmetric_exact(), "length-gauge assembly must be symmetric");
        OperatorForm::Explicit(m)
    } else {
        let mut per_block: Vec<Vec<Link>> = vec![Vec::new(); basis.len()];
        for &(lo, up, mode, coeff) in &links {
            per_block[lo as usize].push(Link { neighbor: up, mode, coeff });
            per_block[up as usize].push(Link { neighbor: lo, mode, coeff });
        }
        OperatorForm::MatrixFree(LengthGaugeKernel { photon_diag, dse_diag, links: per_block })
    };

    Ok(CoupledOperator {
        gauge: Gauge::Length,
        strategy: Strategy::Exact,
        matter,
        bath: bath.clone(),
        basis,
        lam_mu,
        form,
    })
}

/// Assemble the velocity-gauge Hamiltonian (explicit sparse storage; the
/// gauge-comparison runs are single-mode and stay small).
pub fn assemble_velocity_gauge(
    matter: Arc<MatterOperator>,
    bath: &PhotonBath,
    truncation: FockTruncation,
    opts: &AssemblyOptions,
) -> Result<CoupledOperator> {
    truncation.validate()?;
    let photon_dim = truncation.dimension(bath.len());
    let dim = check_budget(matter.dimension(), photon_dim, opts)?;
    let basis = PhotonBasis::new(bath.len(), truncation)?;
    let lam_mu = coupling_projections(&matter, bath)?;
    let photon_diag = photon_diagonal(&basis, bath);
    let md = matter.dimension();
    let f_dia = matter.diamagnetic_factor();
    let inv_mass = 1.0 / matter.particle_mass();
    let modes = bath.modes();
    let n_dir = matter.n_directions();

    // q-ladder element sqrt((n+1)/(2w)) above occupation n.
    let q_elem = |mode: usize, n: f64| ((n + 1.0) / (2.0 * modes[mode].omega)).sqrt();

    let mut b = TripletBuilder::new(dim, dim);
    for block in 0..basis.len() {
        let off = block * md;
        let occ = basis.occupation(block).to_vec();
        // Matter body plus photon energy plus the diagonal of F A^2.
        let mut diag_extra = photon_diag[block];
        for (mode, m) in modes.iter().enumerate() {
            let n = occ[mode] as f64;
            diag_extra += f_dia * m.coupling_sq() * (2.0 * n + 1.0) / (2.0 * m.omega);
        }
        for row in 0..md {
            for (col, v) in matter.kinetic().iter_row(row) {
                b.push(off + row, off + col, v);
            }
            b.push(off + row, off + row, matter.potential()[row] + diag_extra);
        }

        for (mode, m) in modes.iter().enumerate() {
            let up = match basis.raised(block, mode) {
                Some(u) => u,
                None => continue,
            };
            let n = occ[mode] as f64;
            let q1 = q_elem(mode, n);

            // Paramagnetic -(1/m) lam q K x D, one ladder step up.
            for d in 0..n_dir {
                let lam = m.coupling[d];
                if lam == 0.0 {
                    continue;
                }
                let stencil = matter.momentum_sum(d);
                for i in 0..md {
                    for (j, dv) in stencil.iter_row(i) {
                        let val = -inv_mass * lam * q1 * dv;
                        b.push(off + i, up * md + j, val);
                        b.push(up * md + j, off + i, val);
                    }
                }
            }

            // Same-mode A^2 piece: two steps up, matter-diagonal, with the
            // rotated-basis sign -q(n) q(n+1).
            if let Some(up2) = basis.raised(up, mode) {
                let val = -f_dia * m.coupling_sq() * q1 * q_elem(mode, n + 1.0);
                for i in 0..md {
                    b.push_sym(off + i, up2 * md + i, val);
                }
            }

            // Cross-mode A^2 pieces 2F (lam_a . lam_b) q_a q_b: canonical
            // orientation steps up in `mode` and either way in `other`.
            for (other, mo) in modes.iter().enumerate() {
                if other == mode {
                    continue;
                }
                let dot: f64 = m
                    .coupling
                    .iter()
                    .zip(&mo.coupling)
                    .map(|(a, c)| a * c)
                    .sum();
                if dot == 0.0 {
                    continue;
                }
                // Factor 2 from the two orderings, halved again because each
                // unordered pair is visited from both `mode` choices.
                let pref = -f_dia * dot;
                let n_other = occ[other] as f64;
                if let Some(tgt) = basis.raised(up, other) {
                    // up in mode, up in other: K legs (+q1)(+q_other).
                    let val = pref * q1 * q_elem(other, n_other);
                    for i in 0..md {
                        b.push_sym(off + i, tgt * md + i, val);
                    }
                }
                if let Some(tgt) = basis.lowered(up, other) {
                    // up in mode, down in other: K legs (+q1)(-q_other(n-1)).
                    let val = -pref * q1 * q_elem(other, n_other - 1.0);
                    for i in 0..md {
                        b.push_sym(off + i, tgt * md + i, val);
                    }
                }
            }
        }
    }
    let m = b.build();
    assert!(m.is_symmetric_exact(), "velocity-gauge assembly must be symmetric");

    Ok(CoupledOperator {
        gauge: Gauge::Velocity,
        strategy: Strategy::Exact,
        matter,
        bath: bath.clone(),
        basis,
        lam_mu,
        form: OperatorForm::Explicit(m),
    })
}

/// Matter plus self-consistent dipole self-energy: photonless, solved by
/// fixed-point iteration on the mean dipole with linear mixing.
pub fn assemble_m_dse(
    matter: Arc<MatterOperator>,
    bath: &PhotonBath,
    mixing: f64,
    tol: f64,
    max_iter: usize,
    solver: &SolverConfig,
) -> Result<(CoupledOperator, MeanFieldState)> {
    if bath.is_empty() {
        return Err(Error::EmptyBath);
    }
    if !(0.0 < mixing && mixing <= 1.0) {
        return Err(Error::Config(format!("mixing must be in (0, 1], got {mixing}")));
    }
    let lam_mu = coupling_projections(&matter, bath)?;
    let md = matter.dimension();
    let n_dir = matter.n_directions();

    let build = |mean: &[f64]| -> Csr {
        let mut b = TripletBuilder::with_capacity(md, md, matter.kinetic().nnz() + md);
        for row in 0..md {
            for (col, v) in matter.kinetic().iter_row(row) {
                b.push(row, col, v);
            }
            let mut dse = 0.0;
            for (mode, m) in bath.modes().iter().enumerate() {
                let shift: f64 = m.coupling.iter().zip(mean).map(|(l, mu)| l * mu).sum();
                let d = shift - lam_mu[mode][row];
                dse += 0.5 * d * d;
            }
            b.push(row, row, matter.potential()[row] + dse);
        }
        b.build()
    };

    let mut mean = vec![0.0; n_dir];
    let mut history = Vec::new();
    for iteration in 1..=max_iter {
        let h = build(&mean);
        let gs = solver::ground_state(&h, solver)?;
        let mut new_mean = vec![0.0; n_dir];
        for d in 0..n_dir {
            let mu = matter.dipole(d);
            new_mean[d] = gs
                .vector
                .iter()
                .zip(mu)
                .map(|(&psi, &m)| psi * psi * m)
                .sum();
        }
        let delta = new_mean
            .iter()
            .zip(&mean)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        history.push(delta);
        if delta < tol {
            let final_h = build(&new_mean);
            assert!(final_h.is_symmetric_exact(), "mean-field assembly must be symmetric");
            let op = CoupledOperator {
                gauge: Gauge::Length,
                strategy: Strategy::MeanFieldDse,
                matter,
                bath: bath.clone(),
                basis: PhotonBasis::unit(),
                lam_mu,
                form: OperatorForm::Explicit(final_h),
            };
            let state = MeanFieldState { mean_dipole: new_mean, iterations: iteration, residual: delta };
            return Ok((op, state));
        }
        for (m, nm) in mean.iter_mut().zip(&new_mean) {
            *m += mixing * (nm - *m);
        }
    }
    Err(Error::MeanFieldDiverged { history })
}

/// Dispatch a strategy to its bath reduction plus length-gauge assembly.
pub fn assemble_strategy(
    matter: Arc<MatterOperator>,
    bath: &PhotonBath,
    strategy: Strategy,
    truncation: FockTruncation,
    opts: &AssemblyOptions,
    solver: &SolverConfig,
) -> Result<CoupledOperator> {
    let mut op = match strategy {
        Strategy::Exact => assemble_length_gauge(matter, bath, truncation, opts)?,
        Strategy::LowestMode => {
            let reduced = truncate_lowest(bath, 1)?;
            assemble_length_gauge(matter, &reduced, truncation, opts)?
        }
        Strategy::AveragedMode => {
            let reduced = average_bath(bath)?;
            assemble_length_gauge(matter, &reduced, truncation, opts)?
        }
        Strategy::MeanFieldDse => {
            return Ok(assemble_m_dse(matter, bath, 0.5, 1e-10, 200, solver)?.0);
        }
    };
    op.strategy = strategy;
    Ok(op)
}
