//! Ground-state observables, evaluated with the operator set that belongs to
//! the operator's gauge.
//!
//! In the length gauge the photonic operators are the displaced ones built
//! from `s = q - (lam.mu)/w` and `p`; evaluating the bare `(q, p)` forms on a
//! length-gauge state is the classic mistake, kept available here as
//! [`incorrect_lg_observables`] to reproduce its failure curves.
//!
//! All quadratic forms reduce to real ladder applications: with
//! `G = a - a^dag` (antisymmetric) and `S = a + a^dag` (symmetric),
//! `<p^2>_L = (w/2) |G v|^2`, `<s^2> = |s v|^2`, and in the rotated
//! velocity-gauge basis `<p^2>_V = (w/2) |S v|^2` while `n_V` is diagonal.

use crate::assembly::{CoupledOperator, Gauge};
use crate::error::{Error, Result};
use crate::matter::DensityGeometry;
use crate::par;
use crate::solver::GroundState;
use serde::Serialize;

/// Photon occupation below this value makes Mandel Q a 0/0 expression.
pub const MANDEL_UNDEFINED_BELOW: f64 = 1e-14;

fn check_mode(op: &CoupledOperator, mode: usize) -> Result<()> {
    if mode >= op.n_modes() {
        return Err(Error::Usage(format!(
            "mode {mode} out of range for a {}-mode operator",
            op.n_modes()
        )));
    }
    Ok(())
}

/// Apply a one-mode ladder operator with occupation-dependent amplitudes:
/// `w[b] = up(n_b) v[raised(b)] + down(n_b) v[lowered(b)]`.
fn apply_ladder<U, D>(op: &CoupledOperator, mode: usize, v: &[f64], up: U, down: D) -> Vec<f64>
where
    U: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let md = op.matter_dim();
    let basis = op.basis();
    let mut out = vec![0.0; v.len()];
    for b in 0..basis.len() {
        let n = basis.occupation(b)[mode] as f64;
        let dst = &mut out[b * md..(b + 1) * md];
        if let Some(r) = basis.raised(b, mode) {
            let amp = up(n);
            let src = &v[r * md..(r + 1) * md];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += amp * s;
            }
        }
        if let Some(l) = basis.lowered(b, mode) {
            let amp = down(n);
            let src = &v[l * md..(l + 1) * md];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += amp * s;
            }
        }
    }
    out
}

/// Displacement coordinate q (symmetric, 1/sqrt(2w) normalization).
fn apply_q(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    let w = op.bath().modes()[mode].omega;
    let norm = 1.0 / (2.0 * w).sqrt();
    apply_ladder(op, mode, v, |n| norm * (n + 1.0).sqrt(), |n| norm * n.sqrt())
}

/// Bare ladder difference G = a - a^dag (antisymmetric).
fn apply_g(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    apply_ladder(op, mode, v, |n| (n + 1.0).sqrt(), |n| -n.sqrt())
}

/// Bare ladder sum S = a + a^dag (symmetric).
fn apply_s_sum(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    apply_ladder(op, mode, v, |n| (n + 1.0).sqrt(), |n| n.sqrt())
}

/// Length-gauge displaced coordinate s = q - (lam.mu)/w.
fn apply_shifted_q(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    let w = op.bath().modes()[mode].omega;
    let proj = op.lam_mu(mode);
    let md = op.matter_dim();
    let mut out = apply_q(op, mode, v);
    for (i, o) in out.iter_mut().enumerate() {
        *o -= proj[i % md] / w * v[i];
    }
    out
}

/// Apply the length-gauge number operator `n_L = (p^2 + w^2 s^2)/(2w) - 1/2`.
fn apply_number_lg(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    let w = op.bath().modes()[mode].omega;
    let g2 = apply_g(op, mode, &apply_g(op, mode, v));
    let sv = apply_shifted_q(op, mode, v);
    let s2 = apply_shifted_q(op, mode, &sv);
    let mut out = vec![0.0; v.len()];
    for i in 0..v.len() {
        out[i] = -0.25 * g2[i] + 0.5 * w * s2[i] - 0.5 * v[i];
    }
    out
}

/// Bare-oscillator number operator in the (q, p) pair; the incorrect
/// length-gauge definition.
fn apply_number_bare(op: &CoupledOperator, mode: usize, v: &[f64]) -> Vec<f64> {
    let w = op.bath().modes()[mode].omega;
    let g2 = apply_g(op, mode, &apply_g(op, mode, v));
    let qv = apply_q(op, mode, v);
    let q2 = apply_q(op, mode, &qv);
    let mut out = vec![0.0; v.len()];
    for i in 0..v.len() {
        out[i] = -0.25 * g2[i] + 0.5 * w * q2[i] - 0.5 * v[i];
    }
    out
}

fn occupation_moments_diagonal(op: &CoupledOperator, mode: usize, v: &[f64]) -> (f64, f64) {
    let md = op.matter_dim();
    let basis = op.basis();
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for b in 0..basis.len() {
        let n = basis.occupation(b)[mode] as f64;
        let block = &v[b * md..(b + 1) * md];
        let p: f64 = block.iter().map(|x| x * x).sum();
        n1 += n * p;
        n2 += n * n * p;
    }
    (n1, n2)
}

/// `Q = (<n^2> - <n> - <n>^2) / <n>`, using `a'a'aa = n(n-1)`.
fn mandel_from_moments(n1: f64, n2: f64) -> Option<f64> {
    if n1 < MANDEL_UNDEFINED_BELOW {
        None
    } else {
        Some((n2 - n1 - n1 * n1) / n1)
    }
}

/// Mean photon number of one mode, with the gauge-correct operator.
pub fn photon_number(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<f64> {
    check_mode(op, mode)?;
    match op.gauge() {
        Gauge::Length => {
            let nv = apply_number_lg(op, mode, state);
            Ok(par::dot(state, &nv))
        }
        Gauge::Velocity => Ok(occupation_moments_diagonal(op, mode, state).0),
    }
}

/// Mandel Q of one mode; `None` when the occupation is too small to define
/// the statistics.
pub fn mandel_q(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<Option<f64>> {
    check_mode(op, mode)?;
    let (n1, n2) = match op.gauge() {
        Gauge::Length => {
            let nv = apply_number_lg(op, mode, state);
            (par::dot(state, &nv), par::dot(&nv, &nv))
        }
        Gauge::Velocity => occupation_moments_diagonal(op, mode, state),
    };
    Ok(mandel_from_moments(n1, n2))
}

/// Squared transverse electric field of one mode.
pub fn e_field_sq(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<f64> {
    check_mode(op, mode)?;
    let lam_sq = op.bath().modes()[mode].coupling_sq();
    let w = op.bath().modes()[mode].omega;
    match op.gauge() {
        Gauge::Length => {
            let sv = apply_shifted_q(op, mode, state);
            Ok(lam_sq * w * w * par::dot(&sv, &sv))
        }
        Gauge::Velocity => {
            let pv = apply_s_sum(op, mode, state);
            Ok(lam_sq * 0.5 * w * par::dot(&pv, &pv))
        }
    }
}

/// The deliberately wrong length-gauge photonic observables: bare (q, p)
/// ladder forms evaluated on a length-gauge state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IncorrectLgObservables {
    pub photon_number: f64,
    pub mandel_q: Option<f64>,
    pub e_field_sq: f64,
}

pub fn incorrect_lg_observables(
    state: &[f64],
    op: &CoupledOperator,
    mode: usize,
) -> Result<IncorrectLgObservables> {
    if op.gauge() != Gauge::Length {
        return Err(Error::Usage(
            "incorrect-LG observables are defined on length-gauge operators only".into(),
        ));
    }
    check_mode(op, mode)?;
    let nv = apply_number_bare(op, mode, state);
    let n1 = par::dot(state, &nv);
    let n2 = par::dot(&nv, &nv);
    let w = op.bath().modes()[mode].omega;
    let gv = apply_g(op, mode, state);
    let e_sq = op.bath().modes()[mode].coupling_sq() * 0.5 * w * par::dot(&gv, &gv);
    Ok(IncorrectLgObservables {
        photon_number: n1,
        mandel_q: mandel_from_moments(n1, n2),
        e_field_sq: e_sq,
    })
}

/// Mean displacement coordinate of one mode. Antisymmetric-representation
/// expectations vanish identically on the real eigenvectors produced here;
/// they are evaluated numerically all the same.
pub fn mean_q(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<f64> {
    check_mode(op, mode)?;
    match op.gauge() {
        Gauge::Length => {
            let qv = apply_q(op, mode, state);
            Ok(par::dot(state, &qv))
        }
        Gauge::Velocity => {
            let w = op.bath().modes()[mode].omega;
            let gv = apply_g(op, mode, state);
            Ok(par::dot(state, &gv) / (2.0 * w).sqrt())
        }
    }
}

pub fn mean_p(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<f64> {
    check_mode(op, mode)?;
    let w = op.bath().modes()[mode].omega;
    match op.gauge() {
        Gauge::Length => {
            let gv = apply_g(op, mode, state);
            Ok((0.5 * w).sqrt() * par::dot(state, &gv))
        }
        Gauge::Velocity => {
            let sv = apply_s_sum(op, mode, state);
            Ok((0.5 * w).sqrt() * par::dot(state, &sv))
        }
    }
}

/// Residual of the zero-field condition `<q_a> = lam_a.<mu> / w_a` for one
/// mode of a length-gauge ground state.
pub fn zero_field_residual(state: &[f64], op: &CoupledOperator, mode: usize) -> Result<f64> {
    if op.gauge() != Gauge::Length {
        return Err(Error::Usage("zero-field condition applies to the length gauge".into()));
    }
    check_mode(op, mode)?;
    let mu = mean_dipole(state, op);
    let m = &op.bath().modes()[mode];
    let lam_mu: f64 = m.coupling.iter().zip(&mu).map(|(l, d)| l * d).sum();
    Ok(mean_q(state, op, mode)? - lam_mu / m.omega)
}

/// A density with its grid geometry, for quadrature and comparisons.
#[derive(Debug, Clone)]
pub struct DensityField {
    pub values: Vec<f64>,
    pub geometry: DensityGeometry,
}

impl DensityField {
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.geometry.cell_volume()
    }
}

/// Matter probabilities traced over photon occupations.
fn matter_probabilities(state: &[f64], op: &CoupledOperator) -> Vec<f64> {
    let md = op.matter_dim();
    let mut probs = vec![0.0; md];
    for block in state.chunks(md) {
        for (p, s) in probs.iter_mut().zip(block) {
            *p += s * s;
        }
    }
    probs
}

/// One-electron ground-state density, normalized to the electron count.
pub fn electron_density(state: &[f64], op: &CoupledOperator) -> DensityField {
    let probs = matter_probabilities(state, op);
    let geometry = op.matter().density_geometry();
    DensityField { values: geometry.reduce(&probs), geometry }
}

/// Integrated absolute density difference (Riemann sum times cell volume).
pub fn density_diff(n: &DensityField, n_ref: &DensityField) -> Result<f64> {
    if n.geometry != n_ref.geometry || n.values.len() != n_ref.values.len() {
        return Err(Error::GridMismatch(
            "density difference requires identical grids".into(),
        ));
    }
    Ok(n.values
        .iter()
        .zip(&n_ref.values)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * n.geometry.cell_volume())
}

/// Mean total dipole per direction.
pub fn mean_dipole(state: &[f64], op: &CoupledOperator) -> Vec<f64> {
    let probs = matter_probabilities(state, op);
    (0..op.matter().n_directions())
        .map(|d| {
            probs
                .iter()
                .zip(op.matter().dipole(d))
                .map(|(&p, &mu)| p * mu)
                .sum()
        })
        .collect()
}

/// Mean total current per direction, with the gauge-correct operator
/// (the velocity gauge adds the diamagnetic -N_e e^2 A / m part).
pub fn mean_current(state: &[f64], op: &CoupledOperator) -> Vec<f64> {
    let md = op.matter_dim();
    let inv_mass = 1.0 / op.matter().particle_mass();
    let mut out = Vec::with_capacity(op.matter().n_directions());
    let mut sv = vec![0.0; md];
    for d in 0..op.matter().n_directions() {
        let stencil = op.matter().momentum_sum(d);
        let mut para = 0.0;
        for block in state.chunks(md) {
            stencil.apply_rows_seq(block, &mut sv);
            para += par::dot_seq(block, &sv);
        }
        let mut j = inv_mass * para;
        if op.gauge() == Gauge::Velocity {
            let ne = op.matter().n_electrons() as f64;
            let mut a_mean = 0.0;
            for (mode, m) in op.bath().modes().iter().enumerate() {
                if m.coupling[d] != 0.0 {
                    a_mean += m.coupling[d] * mean_q(state, op, mode).expect("mode in range");
                }
            }
            j -= ne * inv_mass * a_mean;
        }
        out.push(j);
    }
    out
}

/// Dissociation data extracted from a potential-energy-surface table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissociationReport {
    pub dissociation_energy: f64,
    pub equilibrium_distance: f64,
    pub minimum_energy: f64,
    pub asymptote_energy: f64,
}

/// `D_e = E(R_max) - min_R E(R)` over a (R, E) table.
pub fn dissociation_energy(pes: &[(f64, f64)]) -> Result<DissociationReport> {
    if pes.len() < 3 {
        return Err(Error::Config("PES needs at least three points".into()));
    }
    let mut rows = pes.to_vec();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
    let (mut min_r, mut min_e) = rows[0];
    for &(r, e) in &rows {
        if e < min_e {
            min_e = e;
            min_r = r;
        }
    }
    let &(last_r, last_e) = rows.last().expect("nonempty");
    if min_r >= last_r || min_r <= rows[0].0 {
        return Err(Error::Domain(
            "potential energy surface has no interior minimum (no bound state)".into(),
        ));
    }
    Ok(DissociationReport {
        dissociation_energy: last_e - min_e,
        equilibrium_distance: min_r,
        minimum_energy: min_e,
        asymptote_energy: last_e,
    })
}

/// Per-mode observable bundle.
#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub omega: f64,
    pub photon_number: f64,
    pub mandel_q: Option<f64>,
    pub e_field_sq: f64,
    pub mean_q: f64,
    pub mean_p: f64,
}

/// Full observable report for one solved ground state.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableReport {
    pub gauge: Gauge,
    pub strategy: String,
    pub total_energy: f64,
    pub per_mode: Vec<ModeReport>,
    pub mean_dipole: Vec<f64>,
    pub mean_current: Vec<f64>,
    pub density_norm: f64,
    pub solver_residual: f64,
}

/// Evaluate everything; the density itself is returned separately (it is
/// exported as a CSV matrix, not as JSON).
pub fn evaluate(
    state: &GroundState,
    op: &CoupledOperator,
) -> Result<(ObservableReport, DensityField)> {
    let v = &state.vector;
    let mut per_mode = Vec::with_capacity(op.n_modes());
    for mode in 0..op.n_modes() {
        per_mode.push(ModeReport {
            omega: op.bath().modes()[mode].omega,
            photon_number: photon_number(v, op, mode)?,
            mandel_q: mandel_q(v, op, mode)?,
            e_field_sq: e_field_sq(v, op, mode)?,
            mean_q: mean_q(v, op, mode)?,
            mean_p: mean_p(v, op, mode)?,
        });
    }
    let density = electron_density(v, op);
    let report = ObservableReport {
        gauge: op.gauge(),
        strategy: op.strategy().label().to_string(),
        total_energy: state.energy,
        per_mode,
        mean_dipole: mean_dipole(v, op),
        mean_current: mean_current(v, op),
        density_norm: density.integral(),
        solver_residual: state.residual,
    };
    Ok((report, density))
}
