//! Lowest-eigenpair solvers for the real symmetric operators assembled here.
//!
//! The iterative path is a restarted Lanczos (Rayleigh-Ritz on an
//! orthonormal Krylov window with thick restarts and locking of converged
//! pairs). Full reorthogonalization keeps ghost eigenvalues out, which the
//! density-difference experiments need. A dense eigensolver doubles as the
//! small-dimension oracle.

use crate::error::{Error, Result};
use crate::par;
use crate::sparse::SymOp;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lanczos,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reorthogonalization {
    Full,
    /// Orthogonalize against locked pairs and the newest window vectors only,
    /// with a periodic full pass.
    Selective,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Residual bound ||Hv - Ev|| required of every returned pair.
    pub tol: f64,
    /// Matrix-vector product budget.
    pub max_iterations: usize,
    pub n_eigenpairs: usize,
    pub reorthogonalization: Reorthogonalization,
    /// Seed for the random start vector; fixes the run bit-for-bit.
    pub seed: u64,
    /// Largest dimension the dense method accepts.
    pub dense_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Lanczos,
            tol: 1e-10,
            max_iterations: 40_000,
            n_eigenpairs: 1,
            reorthogonalization: Reorthogonalization::Full,
            seed: 7,
            dense_limit: 4096,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config("solver tol must be > 0".into()));
        }
        if self.n_eigenpairs == 0 {
            return Err(Error::Config("n_eigenpairs must be >= 1".into()));
        }
        Ok(())
    }
}

/// A converged eigenpair.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub config_echo: SolverConfig,
}

impl GroundState {
    fn finalize(mut self) -> Self {
        // Sign convention: the largest-magnitude component is positive.
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for (i, &v) in self.vector.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if self.vector[best] < 0.0 {
            for v in self.vector.iter_mut() {
                *v = -*v;
            }
        }
        self
    }
}

/// Lowest eigenpair of `op`.
pub fn ground_state(op: &dyn SymOp, cfg: &SolverConfig) -> Result<GroundState> {
    let mut pairs = lowest_k(op, cfg, 1)?;
    Ok(pairs.remove(0))
}

/// The `k` algebraically lowest eigenpairs, ascending.
pub fn lowest_k(op: &dyn SymOp, cfg: &SolverConfig, k: usize) -> Result<Vec<GroundState>> {
    cfg.validate()?;
    let n = op.dim();
    if n < k {
        return Err(Error::Config(format!(
            "requested {k} eigenpairs of a dimension-{n} operator"
        )));
    }
    match cfg.method {
        Method::Dense => dense_lowest_k(op, cfg, k),
        Method::Lanczos => lanczos_lowest_k(op, cfg, k),
    }
}

fn dense_lowest_k(op: &dyn SymOp, cfg: &SolverConfig, k: usize) -> Result<Vec<GroundState>> {
    let n = op.dim();
    if n > cfg.dense_limit {
        return Err(Error::Capacity { dimension: n as u128, budget: cfg.dense_limit as u128 });
    }
    let m = op.to_dense_matrix();
    let (values, vectors) = eigen_sorted(&m);
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        let v: Vec<f64> = vectors.column(idx).iter().copied().collect();
        let energy = values[idx];
        let hv = &m * DVector::from_column_slice(&v);
        let mut res = 0.0;
        for i in 0..n {
            let d = hv[i] - energy * v[i];
            res += d * d;
        }
        out.push(
            GroundState {
                energy,
                vector: v,
                residual: res.sqrt(),
                iterations: 0,
                config_echo: *cfg,
            }
            .finalize(),
        );
    }
    Ok(out)
}

struct Window {
    vectors: Vec<Vec<f64>>,
    /// Projected operator entries; `proj[i][j] = v_i . H v_j`, symmetric.
    proj: DMatrix<f64>,
    capacity: usize,
}

impl Window {
    fn new(capacity: usize) -> Self {
        Self { vectors: Vec::with_capacity(capacity), proj: DMatrix::zeros(capacity, capacity), capacity }
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn active_proj(&self) -> DMatrix<f64> {
        let s = self.len();
        self.proj.view((0, 0), (s, s)).into_owned()
    }

    /// Replace the window with linear combinations `V * S` (columns of `s`)
    /// and set the projected operator to the corresponding Ritz diagonal.
    fn compress(&mut self, s: &DMatrix<f64>, theta: &[f64]) {
        let n = self.vectors[0].len();
        let keep = theta.len();
        let mut new_vectors = vec![vec![0.0; n]; keep];
        for (col, nv) in new_vectors.iter_mut().enumerate() {
            for (j, vj) in self.vectors.iter().enumerate() {
                par::axpy(s[(j, col)], vj, nv);
            }
            let nrm = par::norm(nv);
            par::scale(1.0 / nrm, nv);
        }
        self.vectors = new_vectors;
        self.proj.fill(0.0);
        for (i, &t) in theta.iter().enumerate() {
            self.proj[(i, i)] = t;
        }
    }
}

fn lanczos_lowest_k(op: &dyn SymOp, cfg: &SolverConfig, k: usize) -> Result<Vec<GroundState>> {
    let n = op.dim();
    // Window and restart sizes trade memory for convergence; small windows
    // stall near sqrt(eps) residuals on wide-spectrum grid operators.
    let window_cap = n.min((3 * k + 24).max(80));
    let mut window = Window::new(window_cap);
    let mut locked: Vec<GroundState> = Vec::with_capacity(k);
    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
    };

    let mut v = draw(&mut rng);
    orthogonalize(&mut v, &window.vectors, &locked);
    normalize_or_refresh(&mut v, &mut rng, &window.vectors, &locked);

    let mut hv = vec![0.0; n];
    while matvecs < cfg.max_iterations {
        if window.len() == window.capacity {
            restart(&mut window, k - locked.len());
        }

        // Insert v and record its projected column.
        op.apply_into(&v, &mut hv);
        matvecs += 1;
        window.vectors.push(std::mem::take(&mut v));
        let j = window.len() - 1;
        let mut w = hv.clone();
        deflate_locked(&mut w, &locked);
        for i in 0..window.len() {
            let h = par::dot(&window.vectors[i], &w);
            window.proj[(i, j)] = h;
            window.proj[(j, i)] = h;
            par::axpy(-h, &window.vectors[i], &mut w);
        }
        if matches!(cfg.reorthogonalization, Reorthogonalization::Full) || j.is_multiple_of(4) {
            reorthogonalize_pass(&mut w, &window.vectors, &locked);
        } else {
            let lo = window.len().saturating_sub(2);
            reorthogonalize_pass(&mut w, &window.vectors[lo..], &locked);
        }
        let beta = par::norm(&w);

        // Ritz estimate of the lowest pending pair.
        let (theta, vecs) = eigen_sorted(&window.active_proj());
        let estimate = (beta * vecs[(window.len() - 1, 0)]).abs();
        best_residual = best_residual.min(estimate.max(f64::MIN_POSITIVE));

        let saturated = window.len() + locked.len() == n;
        if estimate <= cfg.tol || saturated || window.len() == window.capacity {
            // Verify the candidate with its true residual before locking.
            let y = vecs.column(0);
            let mut x = vec![0.0; n];
            for (jj, vj) in window.vectors.iter().enumerate() {
                par::axpy(y[jj], vj, &mut x);
            }
            deflate_locked(&mut x, &locked);
            let nrm = par::norm(&x);
            if nrm > 1e-12 {
                par::scale(1.0 / nrm, &mut x);
                op.apply_into(&x, &mut hv);
                matvecs += 1;
                let energy = par::dot(&x, &hv);
                let mut res_sq = 0.0;
                for i in 0..n {
                    let d = hv[i] - energy * x[i];
                    res_sq += d * d;
                }
                let residual = res_sq.sqrt();
                best_residual = best_residual.min(residual);
                if residual <= cfg.tol {
                    locked.push(
                        GroundState {
                            energy,
                            vector: x,
                            residual,
                            iterations: matvecs,
                            config_echo: *cfg,
                        }
                        .finalize(),
                    );
                    if locked.len() == k {
                        locked.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
                        return Ok(locked);
                    }
                    // Drop the locked direction from the window.
                    if theta.len() > 1 {
                        let s = vecs.columns(1, theta.len() - 1).into_owned();
                        window.compress(&s, &theta[1..]);
                    } else {
                        window.vectors.clear();
                        window.proj.fill(0.0);
                    }
                    v = if beta > 1e-13 {
                        let mut next = w;
                        par::scale(1.0 / beta, &mut next);
                        orthogonalize(&mut next, &window.vectors, &locked);
                        normalize_or_refresh(&mut next, &mut rng, &window.vectors, &locked);
                        next
                    } else {
                        let mut next = draw(&mut rng);
                        orthogonalize(&mut next, &window.vectors, &locked);
                        normalize_or_refresh(&mut next, &mut rng, &window.vectors, &locked);
                        next
                    };
                    continue;
                }
            }
        }

        if beta > 1e-13 {
            par::scale(1.0 / beta, &mut w);
            v = w;
        } else {
            // Invariant subspace: continue from a fresh direction.
            let mut next = draw(&mut rng);
            orthogonalize(&mut next, &window.vectors, &locked);
            normalize_or_refresh(&mut next, &mut rng, &window.vectors, &locked);
            v = next;
        }
    }

    Err(Error::SolverStalled { residual: best_residual, iterations: matvecs })
}

/// Symmetric eigendecomposition with columns sorted ascending by their own
/// Rayleigh quotients. Deriving each column's value from the column itself
/// sidesteps value/vector pairing mix-ups in the upstream decomposition,
/// which were observed on wide-spectrum projected matrices.
fn eigen_sorted(p: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = p.clone().symmetric_eigen();
    let m = p.nrows();
    let quotients: Vec<f64> = (0..m)
        .map(|j| {
            let q = eig.eigenvectors.column(j);
            (p * q).dot(&q)
        })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| quotients[a].partial_cmp(&quotients[b]).expect("finite quotients"));
    let mut vectors = DMatrix::zeros(m, m);
    let mut values = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        values.push(quotients[src]);
    }
    (values, vectors)
}

/// Thick restart: keep the lowest Ritz vectors plus a small buffer.
fn restart(window: &mut Window, pending: usize) {
    let size = window.len();
    let (theta, vecs) = eigen_sorted(&window.active_proj());
    let keep_n = (pending + 14).min(size.saturating_sub(2)).max(1);
    let s = vecs.columns(0, keep_n).into_owned();
    window.compress(&s, &theta[..keep_n]);
}

fn deflate_locked(w: &mut [f64], locked: &[GroundState]) {
    for l in locked {
        let g = par::dot(&l.vector, w);
        par::axpy(-g, &l.vector, w);
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[GroundState]) {
    deflate_locked(w, locked);
    for b in basis {
        let g = par::dot(b, w);
        par::axpy(-g, b, w);
    }
}

fn reorthogonalize_pass(w: &mut [f64], basis: &[Vec<f64>], locked: &[GroundState]) {
    orthogonalize(w, basis, locked);
}

fn normalize_or_refresh(
    v: &mut [f64],
    rng: &mut ChaCha8Rng,
    basis: &[Vec<f64>],
    locked: &[GroundState],
) {
    for _ in 0..64 {
        let nrm = par::norm(v);
        if nrm > 1e-10 {
            par::scale(1.0 / nrm, v);
            return;
        }
        for x in v.iter_mut() {
            *x = rng.gen::<f64>() - 0.5;
        }
        orthogonalize(v, basis, locked);
    }
    // Dimension exhausted; leave the zero vector, callers treat it as breakdown.
}

/// Ground energies over an ascending cutoff ladder, for truncation
/// certification.
#[derive(Debug, Clone)]
pub struct ConvergenceSweep {
    pub entries: Vec<(u32, f64)>,
}

impl ConvergenceSweep {
    /// |E(last) - E(previous)|: the truncation-convergence estimate.
    pub fn final_shift(&self) -> f64 {
        match self.entries.len() {
            0 | 1 => 0.0,
            m => (self.entries[m - 1].1 - self.entries[m - 2].1).abs(),
        }
    }

    /// Energies never rise by more than `slack` along the ladder.
    pub fn is_monotone_within(&self, slack: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// Solve the ground state for each cutoff produced by `builder`.
pub fn convergence_sweep<O, F>(
    builder: F,
    cutoffs: &[u32],
    cfg: &SolverConfig,
) -> Result<ConvergenceSweep>
where
    O: SymOp,
    F: Fn(u32) -> Result<O>,
{
    let mut entries = Vec::with_capacity(cutoffs.len());
    for &c in cutoffs {
        let op = builder(c)?;
        let gs = ground_state(&op, cfg)?;
        entries.push((c, gs.energy));
    }
    Ok(ConvergenceSweep { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn two_by_two() -> crate::sparse::Csr {
        let mut b = TripletBuilder::new(2, 2);
        b.push_sym(0, 1, 1.0);
        b.build()
    }

    #[test]
    fn two_level_ground_state_has_sign_convention() {
        let h = two_by_two();
        let gs = ground_state(&h, &SolverConfig::default()).unwrap();
        assert!((gs.energy + 1.0).abs() < 1e-12, "energy {}", gs.energy);
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((gs.vector[0] - inv).abs() < 1e-8);
        assert!((gs.vector[1] + inv).abs() < 1e-8);
        assert!(gs.residual <= 1e-10);
    }

    #[test]
    fn dense_and_lanczos_agree_on_random_sparse() {
        let n = 500;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, rng.gen::<f64>() * 4.0 - 2.0);
        }
        for _ in 0..3 * n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                b.push_sym(i.min(j), i.max(j), rng.gen::<f64>() - 0.5);
            }
        }
        let h = b.build();
        let lan = ground_state(&h, &SolverConfig::default()).unwrap();
        let dense = ground_state(
            &h,
            &SolverConfig { method: Method::Dense, ..SolverConfig::default() },
        )
        .unwrap();
        assert!(
            (lan.energy - dense.energy).abs() < 1e-10,
            "lanczos {} vs dense {}",
            lan.energy,
            dense.energy
        );
    }

    #[test]
    fn lowest_k_returns_ascending_orthogonal_pairs() {
        // Harmonic oscillator on a grid: spacings equal omega within grid error.
        let grid = crate::grid::Grid1D::new(201, 0.1).unwrap();
        let model = crate::matter::AtomModel::new(grid);
        let op = crate::matter::build_atom(&model).unwrap();
        let mut b = TripletBuilder::new(201, 201);
        for row in 0..201 {
            for (col, v) in op.kinetic().iter_row(row) {
                b.push(row, col, v);
            }
        }
        for i in 0..201 {
            let x = grid.coordinate(i);
            b.push(i, i, 0.5 * x * x);
        }
        let h = b.build();
        let cfg = SolverConfig { n_eigenpairs: 4, ..SolverConfig::default() };
        let pairs = lowest_k(&h, &cfg, 4).unwrap();
        for w in pairs.windows(2) {
            assert!(w[0].energy <= w[1].energy);
            let overlap = par::dot(&w[0].vector, &w[1].vector).abs();
            assert!(overlap < 1e-10, "pair overlap {overlap}");
        }
        for (i, p) in pairs.iter().enumerate() {
            let expect = 0.5 + i as f64;
            assert!(
                (p.energy - expect).abs() < 1e-5,
                "level {i}: {} vs {expect}",
                p.energy
            );
        }
    }

    #[test]
    fn rayleigh_quotient_matches_reported_energy() {
        let h = two_by_two();
        let gs = ground_state(&h, &SolverConfig::default()).unwrap();
        let hv = h.apply(&gs.vector);
        let rq = par::dot(&gs.vector, &hv);
        assert!((rq - gs.energy).abs() <= 1e-10 * gs.energy.abs().max(1.0));
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let n = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, rng.gen::<f64>());
        }
        for i in 0..n - 1 {
            b.push_sym(i, i + 1, rng.gen::<f64>() - 0.5);
        }
        let h = b.build();
        let cfg = SolverConfig::default();
        let a = ground_state(&h, &cfg).unwrap();
        let b2 = ground_state(&h, &cfg).unwrap();
        assert_eq!(a.energy.to_bits(), b2.energy.to_bits());
        assert_eq!(a.iterations, b2.iterations);
    }

    #[test]
    fn dense_capacity_limit_is_enforced() {
        let mut b = TripletBuilder::new(10, 10);
        for i in 0..10 {
            b.push(i, i, i as f64);
        }
        let h = b.build();
        let cfg = SolverConfig { method: Method::Dense, dense_limit: 5, ..SolverConfig::default() };
        assert!(matches!(ground_state(&h, &cfg), Err(Error::Capacity { .. })));
    }

    #[test]
    fn selective_reorthogonalization_still_converges() {
        let n = 300;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, rng.gen::<f64>() * 2.0);
        }
        for i in 0..n - 1 {
            b.push_sym(i, i + 1, -0.3);
        }
        let h = b.build();
        let sel = SolverConfig {
            reorthogonalization: Reorthogonalization::Selective,
            ..SolverConfig::default()
        };
        let a = ground_state(&h, &sel).unwrap();
        let d = ground_state(
            &h,
            &SolverConfig { method: Method::Dense, ..SolverConfig::default() },
        )
        .unwrap();
        assert!((a.energy - d.energy).abs() < 1e-9);
    }
}
