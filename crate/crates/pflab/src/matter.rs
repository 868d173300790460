//! Bare matter Hamiltonians on real-space grids: a 1D soft-Coulomb atom, the
//! two-electron clamped-nuclei H2 molecule, and a 2D quantum ring in a
//! Mexican-hat potential. All operators are assembled with the eighth-order
//! finite-difference Laplacian and Dirichlet boundaries.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D, GRADIENT_8TH, LAPLACIAN_8TH};
use crate::sparse::{Csr, TripletBuilder};

/// 1D hydrogen-like atom with a soft-Coulomb binding potential
/// `-Z / sqrt(x^2 + a_en)`.
#[derive(Debug, Clone, Copy)]
pub struct AtomModel {
    pub grid: Grid1D,
    pub softening_a_en: f64,
    pub nuclear_charge_z: f64,
    pub mass_m: f64,
}

impl AtomModel {
    pub fn new(grid: Grid1D) -> Self {
        Self { grid, softening_a_en: 2.0, nuclear_charge_z: 1.0, mass_m: 1.0 }
    }

    /// Reference grid: 3000 points at spacing 0.0707 a.u.
    pub fn reference() -> Self {
        Self::new(Grid1D::new(3000, 0.0707).expect("valid reference grid"))
    }
}

/// 1D H2 with two electrons on a shared symmetric grid and clamped nuclei at
/// +-R/2. The nuclear-separation grid covers (0, 9] a.u.
#[derive(Debug, Clone, Copy)]
pub struct MoleculeModel {
    pub r_grid: Grid1D,
    pub e_grid: Grid1D,
    pub softening_a_ee: f64,
    pub softening_a_en: f64,
    pub proton_mass: f64,
}

impl MoleculeModel {
    pub fn new(e_grid: Grid1D) -> Self {
        Self {
            // (0, 9] with spacing 0.1: 90 points centred on 4.55.
            r_grid: Grid1D::with_center(90, 0.1, 4.55).expect("valid R grid"),
            e_grid,
            softening_a_ee: 2.0,
            softening_a_en: 1.0,
            proton_mass: 1836.0,
        }
    }

    /// Reference electron grids: 200 points at spacing 0.35 a.u.
    pub fn reference() -> Self {
        Self::new(Grid1D::new(200, 0.35).expect("valid reference grid"))
    }

    /// Reduced electron mass 2 Mn / (2 Mn + 1).
    pub fn reduced_mass_electron(&self) -> f64 {
        2.0 * self.proton_mass / (2.0 * self.proton_mass + 1.0)
    }

    /// Reduced nuclear mass Mn / 2.
    pub fn reduced_mass_nuclei(&self) -> f64 {
        self.proton_mass / 2.0
    }
}

/// 2D ring: harmonic confinement plus a central Gaussian barrier,
/// `v(r) = m w0^2 r^2 / 2 + V0 exp(-r^2/d^2)`.
#[derive(Debug, Clone, Copy)]
pub struct QuantumRingModel {
    pub grid: Grid2D,
    pub omega0: f64,
    pub well_depth_v0: f64,
    pub width_d: f64,
    pub effective_mass: f64,
}

impl QuantumRingModel {
    /// Reference GaAs parameters: hbar w0 = 10 meV, V0 = 200 meV, d = 10 nm,
    /// m = 0.067, on a 127x127 grid with 0.7052 nm spacing.
    pub fn reference() -> Self {
        use crate::units::{mev_to_au, nm_to_au};
        Self {
            grid: Grid2D::square(127, nm_to_au(0.7052)).expect("valid reference grid"),
            omega0: mev_to_au(10.0),
            well_depth_v0: mev_to_au(200.0),
            width_d: nm_to_au(10.0),
            effective_mass: 0.067,
        }
    }
}

/// How a matter-space probability vector reduces to a one-electron density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityGeometry {
    /// One electron on a line; density lives on the grid itself.
    Line { grid: Grid1D },
    /// Two electrons on a shared line grid; density is the partner-traced
    /// single-coordinate distribution, doubled for the two electrons.
    PairLine { grid: Grid1D },
    /// One electron on a plane.
    Plane { grid: Grid2D },
}

impl DensityGeometry {
    /// Volume of one grid cell for Riemann-sum quadrature.
    pub fn cell_volume(&self) -> f64 {
        match self {
            DensityGeometry::Line { grid } | DensityGeometry::PairLine { grid } => grid.spacing(),
            DensityGeometry::Plane { grid } => grid.spacing_x() * grid.spacing_y(),
        }
    }

    /// Number of density samples produced by [`Self::reduce`].
    pub fn n_samples(&self) -> usize {
        match self {
            DensityGeometry::Line { grid } | DensityGeometry::PairLine { grid } => grid.n_points(),
            DensityGeometry::Plane { grid } => grid.len(),
        }
    }

    /// Turn per-matter-point probabilities into a density normalized to the
    /// electron count under `sum(n) * cell_volume`.
    pub fn reduce(&self, probabilities: &[f64]) -> Vec<f64> {
        match self {
            DensityGeometry::Line { grid } => {
                let dx = grid.spacing();
                probabilities.iter().map(|p| p / dx).collect()
            }
            DensityGeometry::PairLine { grid } => {
                let n = grid.n_points();
                debug_assert_eq!(probabilities.len(), n * n);
                let dx = grid.spacing();
                let mut out = vec![0.0; n];
                for i1 in 0..n {
                    for i2 in 0..n {
                        let p = probabilities[i1 * n + i2];
                        // Both coordinates contribute to the one-electron density.
                        out[i1] += p;
                        out[i2] += p;
                    }
                }
                for o in out.iter_mut() {
                    *o /= dx;
                }
                out
            }
            DensityGeometry::Plane { grid } => {
                let vol = grid.spacing_x() * grid.spacing_y();
                probabilities.iter().map(|p| p / vol).collect()
            }
        }
    }
}

/// Discrete matter Hamiltonian split into its building blocks.
///
/// `kinetic` is real symmetric, `potential` and `dipole` are real diagonals.
/// `momentum_sum` holds one real antisymmetric stencil D per direction with
/// sum_l p_l = -i D, used by the velocity-gauge assembly.
#[derive(Debug, Clone)]
pub struct MatterOperator {
    dimension: usize,
    kinetic: Csr,
    potential: Vec<f64>,
    dipole: Vec<Vec<f64>>,
    momentum_sum: Vec<Csr>,
    n_electrons: usize,
    particle_mass: f64,
    density: DensityGeometry,
}

impl MatterOperator {
    /// Assemble a custom matter model from its building blocks. Used for
    /// harmonic test systems and other synthetic potentials.
    pub fn from_parts(
        kinetic: Csr,
        potential: Vec<f64>,
        dipole: Vec<Vec<f64>>,
        momentum_sum: Vec<Csr>,
        n_electrons: usize,
        particle_mass: f64,
        density: DensityGeometry,
    ) -> Result<Self> {
        let dimension = kinetic.n_rows();
        if potential.len() != dimension
            || dipole.iter().any(|d| d.len() != dimension)
            || momentum_sum.iter().any(|m| m.n_rows() != dimension)
            || dipole.len() != momentum_sum.len()
        {
            return Err(Error::Config("inconsistent matter operator blocks".into()));
        }
        if !kinetic.is_symmetric_exact() {
            return Err(Error::Config("kinetic block must be symmetric".into()));
        }
        if !(particle_mass > 0.0) || n_electrons == 0 {
            return Err(Error::Domain("need positive mass and at least one electron".into()));
        }
        Ok(Self { dimension, kinetic, potential, dipole, momentum_sum, n_electrons, particle_mass, density })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kinetic(&self) -> &Csr {
        &self.kinetic
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Number of spatial directions carrying a dipole component.
    pub fn n_directions(&self) -> usize {
        self.dipole.len()
    }

    pub fn dipole(&self, direction: usize) -> &[f64] {
        &self.dipole[direction]
    }

    pub fn momentum_sum(&self, direction: usize) -> &Csr {
        &self.momentum_sum[direction]
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn particle_mass(&self) -> f64 {
        self.particle_mass
    }

    /// Coefficient of the squared vector potential in the velocity gauge:
    /// N_e e^2 / (2m).
    pub fn diamagnetic_factor(&self) -> f64 {
        self.n_electrons as f64 / (2.0 * self.particle_mass)
    }

    pub fn density_geometry(&self) -> DensityGeometry {
        self.density
    }

    /// `out = (kinetic + potential) v` for a bare-matter vector.
    pub fn apply_bare_into(&self, v: &[f64], out: &mut [f64]) {
        self.kinetic.apply_into(v, out);
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.potential[i] * v[i];
        }
    }

    /// Diagonal of kinetic + potential, used as a Ritz-start heuristic.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension)
            .map(|i| self.kinetic.get(i, i) + self.potential[i])
            .collect()
    }
}

/// 1D kinetic operator -(1/2m) d2/dx2 as a banded CSR matrix.
fn kinetic_1d(grid: &Grid1D, mass: f64) -> Csr {
    let n = grid.n_points();
    let pref = -1.0 / (2.0 * mass * grid.spacing() * grid.spacing());
    let mut b = TripletBuilder::with_capacity(n, n, 9 * n);
    for i in 0..n {
        b.push(i, i, pref * LAPLACIAN_8TH[0]);
        for k in 1..=4usize {
            let v = pref * LAPLACIAN_8TH[k];
            if i + k < n {
                b.push(i, i + k, v);
            }
            if i >= k {
                b.push(i, i - k, v);
            }
        }
    }
    b.build()
}

/// Antisymmetric first-derivative stencil D with sum over particles of
/// p = -i d/dx represented as -i D.
fn derivative_1d(grid: &Grid1D) -> Csr {
    let n = grid.n_points();
    let inv_dx = 1.0 / grid.spacing();
    let mut b = TripletBuilder::with_capacity(n, n, 8 * n);
    for i in 0..n {
        for k in 1..=4usize {
            let v = GRADIENT_8TH[k - 1] * inv_dx;
            if i + k < n {
                b.push(i, i + k, v);
            }
            if i >= k {
                b.push(i, i - k, -v);
            }
        }
    }
    b.build()
}

/// Kronecker-style embedding of a 1D banded operator along one axis of a
/// tensor grid with `n_outer * n_band * n_inner` layout.
fn embed_axis(band: &Csr, n_outer: usize, n_inner: usize) -> Csr {
    let n_band = band.n_rows();
    let dim = n_outer * n_band * n_inner;
    let mut b = TripletBuilder::with_capacity(dim, dim, band.nnz() * n_outer * n_inner);
    for outer in 0..n_outer {
        for row in 0..n_band {
            for (col, v) in band.iter_row(row) {
                for inner in 0..n_inner {
                    let i = (outer * n_band + row) * n_inner + inner;
                    let j = (outer * n_band + col) * n_inner + inner;
                    b.push(i, j, v);
                }
            }
        }
    }
    b.build()
}

fn merge(a: &Csr, b: &Csr) -> Csr {
    let mut out = TripletBuilder::with_capacity(a.n_rows(), a.n_cols(), a.nnz() + b.nnz());
    for row in 0..a.n_rows() {
        for (col, v) in a.iter_row(row) {
            out.push(row, col, v);
        }
        for (col, v) in b.iter_row(row) {
            out.push(row, col, v);
        }
    }
    out.build()
}

fn soft_coulomb(distance: f64, softening: f64) -> f64 {
    1.0 / (distance * distance + softening).sqrt()
}

/// Assemble the 1D atom.
pub fn build_atom(model: &AtomModel) -> Result<MatterOperator> {
    if !(model.softening_a_en > 0.0) {
        return Err(Error::Domain(format!(
            "soft-Coulomb parameter must be > 0, got {}",
            model.softening_a_en
        )));
    }
    if !(model.mass_m > 0.0) {
        return Err(Error::Domain("electron mass must be > 0".into()));
    }
    let n = model.grid.n_points();
    let xs = model.grid.coordinates();
    let potential: Vec<f64> = xs
        .iter()
        .map(|&x| -model.nuclear_charge_z * soft_coulomb(x, model.softening_a_en))
        .collect();
    // mu = -e x for the electron; the clamped nucleus sits at the origin.
    let dipole: Vec<f64> = xs.iter().map(|&x| -x).collect();
    Ok(MatterOperator {
        dimension: n,
        kinetic: kinetic_1d(&model.grid, model.mass_m),
        potential,
        dipole: vec![dipole],
        momentum_sum: vec![derivative_1d(&model.grid)],
        n_electrons: 1,
        particle_mass: model.mass_m,
        density: DensityGeometry::Line { grid: model.grid },
    })
}

/// Assemble the two-electron H2 Hamiltonian at fixed internuclear distance R
/// (clamped nuclei at +-R/2, including the 1/R repulsion). Matter indices are
/// `i1 * n + i2` over the shared electron grid.
pub fn build_molecule_electronic(model: &MoleculeModel, r: f64) -> Result<MatterOperator> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("internuclear distance must be > 0, got {r}")));
    }
    let r_max = model.r_grid.coordinate(model.r_grid.n_points() - 1);
    if r > r_max + 1e-9 {
        return Err(Error::Domain(format!(
            "internuclear distance {r} outside the R grid (max {r_max})"
        )));
    }
    if !(model.softening_a_ee > 0.0 && model.softening_a_en > 0.0) {
        return Err(Error::Domain("soft-Coulomb parameters must be > 0".into()));
    }
    let n = model.e_grid.n_points();
    let dim = n * n;
    let xs = model.e_grid.coordinates();
    let mu_e = model.reduced_mass_electron();

    let band_kin = kinetic_1d(&model.e_grid, mu_e);
    let kinetic = merge(&embed_axis(&band_kin, 1, n), &embed_axis(&band_kin, n, 1));

    let band_der = derivative_1d(&model.e_grid);
    let momentum = merge(&embed_axis(&band_der, 1, n), &embed_axis(&band_der, n, 1));

    let attraction: Vec<f64> = xs
        .iter()
        .map(|&x| {
            -soft_coulomb(x - r / 2.0, model.softening_a_en)
                - soft_coulomb(x + r / 2.0, model.softening_a_en)
        })
        .collect();
    let mut potential = vec![0.0; dim];
    let mut dipole = vec![0.0; dim];
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            potential[idx] = 1.0 / r
                + soft_coulomb(xs[i1] - xs[i2], model.softening_a_ee)
                + attraction[i1]
                + attraction[i2];
            // Nuclear dipole contributions at +-R/2 cancel; electrons remain.
            dipole[idx] = -(xs[i1] + xs[i2]);
        }
    }

    Ok(MatterOperator {
        dimension: dim,
        kinetic,
        potential,
        dipole: vec![dipole],
        momentum_sum: vec![momentum],
        n_electrons: 2,
        particle_mass: mu_e,
        density: DensityGeometry::PairLine { grid: model.e_grid },
    })
}

/// Assemble the 2D quantum ring. Matter indices follow `Grid2D::index`.
pub fn build_ring(model: &QuantumRingModel) -> Result<MatterOperator> {
    if !(model.effective_mass > 0.0) {
        return Err(Error::Domain("effective mass must be > 0".into()));
    }
    if !(model.width_d > 0.0) {
        return Err(Error::Domain("barrier width must be > 0".into()));
    }
    let g = model.grid;
    let (nx, ny) = (g.n_x(), g.n_y());
    let dim = g.len();

    let row_grid = Grid1D::new(nx, g.spacing_x())?;
    let col_grid = Grid1D::new(ny, g.spacing_y())?;
    let kin_x = kinetic_1d(&row_grid, model.effective_mass);
    let kin_y = kinetic_1d(&col_grid, model.effective_mass);
    // Layout i = iy * nx + ix: x is the inner (fast) axis.
    let kinetic = merge(&embed_axis(&kin_x, ny, 1), &embed_axis(&kin_y, 1, nx));
    let momentum_x = embed_axis(&derivative_1d(&row_grid), ny, 1);
    let momentum_y = embed_axis(&derivative_1d(&col_grid), 1, nx);

    let mut potential = vec![0.0; dim];
    let mut dipole_x = vec![0.0; dim];
    let mut dipole_y = vec![0.0; dim];
    let half_m_w2 = 0.5 * model.effective_mass * model.omega0 * model.omega0;
    let inv_d2 = 1.0 / (model.width_d * model.width_d);
    for iy in 0..ny {
        let y = g.y(iy);
        for ix in 0..nx {
            let x = g.x(ix);
            let r2 = x * x + y * y;
            let idx = g.index(ix, iy);
            potential[idx] = half_m_w2 * r2 + model.well_depth_v0 * (-r2 * inv_d2).exp();
            dipole_x[idx] = -x;
            dipole_y[idx] = -y;
        }
    }

    Ok(MatterOperator {
        dimension: dim,
        kinetic,
        potential,
        dipole: vec![dipole_x, dipole_y],
        momentum_sum: vec![momentum_x, momentum_y],
        n_electrons: 1,
        particle_mass: model.effective_mass,
        density: DensityGeometry::Plane { grid: g },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_is_bitwise_symmetric() {
        let g = Grid1D::new(64, 0.2).unwrap();
        let k = kinetic_1d(&g, 1.0);
        assert!(k.is_symmetric_exact());
        let op = build_atom(&AtomModel::new(g)).unwrap();
        assert!(op.kinetic().is_symmetric_exact());
    }

    #[test]
    fn derivative_is_antisymmetric() {
        let g = Grid1D::new(32, 0.3).unwrap();
        assert!(derivative_1d(&g).is_antisymmetric_exact());
    }

    #[test]
    fn stencil_reproduces_plane_wave_curvature_at_eighth_order() {
        // Apply the Laplacian to sin(kx) on interior points and compare the
        // error against -k^2 sin(kx) for two spacings; the ratio must scale
        // like dx^8.
        let k = 1.3;
        let err = |dx: f64| {
            let n = (20.0 / dx) as usize | 1;
            let g = Grid1D::new(n, dx).unwrap();
            // mass 1/2 turns the kinetic prefactor into a pure -d2/dx2.
            let lap = kinetic_1d(&g, 0.5);
            let f: Vec<f64> = g.coordinates().iter().map(|&x| (k * x).sin()).collect();
            let mut out = vec![0.0; n];
            lap.apply_into(&f, &mut out);
            let mut worst = 0.0f64;
            for i in n / 4..3 * n / 4 {
                worst = worst.max((out[i] - k * k * f[i]).abs());
            }
            worst
        };
        let e1 = err(0.2);
        let e2 = err(0.1);
        let order = (e1 / e2).log2();
        assert!(order > 7.0, "observed order {order} (errors {e1:.3e}, {e2:.3e})");
    }

    #[test]
    fn free_particle_spectrum_is_nonnegative() {
        let g = Grid1D::new(40, 0.25).unwrap();
        let model = AtomModel { nuclear_charge_z: 0.0, ..AtomModel::new(g) };
        let op = build_atom(&model).unwrap();
        let h = op.kinetic().to_dense()
            + nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(op.potential()));
        let eigs = h.symmetric_eigenvalues();
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-12, "free-particle ground energy {min}");
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let g = Grid1D::new(16, 0.2).unwrap();
        let bad = AtomModel { softening_a_en: 0.0, ..AtomModel::new(g) };
        assert!(matches!(build_atom(&bad), Err(Error::Domain(_))));

        let mol = MoleculeModel::new(Grid1D::new(16, 0.35).unwrap());
        assert!(matches!(build_molecule_electronic(&mol, -1.0), Err(Error::Domain(_))));
        assert!(matches!(build_molecule_electronic(&mol, 100.0), Err(Error::Domain(_))));

        let ring = QuantumRingModel { effective_mass: 0.0, ..QuantumRingModel::reference() };
        assert!(matches!(build_ring(&ring), Err(Error::Domain(_))));
    }

    #[test]
    fn molecule_operator_is_exchange_symmetric() {
        let mol = MoleculeModel::new(Grid1D::new(12, 0.5).unwrap());
        let op = build_molecule_electronic(&mol, 1.9).unwrap();
        let n = 12;
        let swap = |idx: usize| -> usize {
            let (i1, i2) = (idx / n, idx % n);
            i2 * n + i1
        };
        let h = merge(op.kinetic(), &{
            let mut b = TripletBuilder::new(n * n, n * n);
            for (i, &v) in op.potential().iter().enumerate() {
                b.push(i, i, v);
            }
            b.build()
        });
        for row in 0..n * n {
            for (col, v) in h.iter_row(row) {
                let vs = h.get(swap(row), swap(col));
                assert!(
                    (v - vs).abs() < 1e-14,
                    "exchange symmetry broken at ({row},{col}): {v} vs {vs}"
                );
            }
        }
    }

    #[test]
    fn reduced_masses_follow_proton_mass() {
        let mol = MoleculeModel::reference();
        assert!((mol.reduced_mass_electron() - 2.0 * 1836.0 / 3673.0).abs() < 1e-12);
        assert!((mol.reduced_mass_nuclei() - 918.0).abs() < 1e-12);
    }

    #[test]
    fn ring_potential_is_mexican_hat_on_nodes() {
        let model = QuantumRingModel {
            grid: Grid2D::square(11, 1.0).unwrap(),
            omega0: 1.0,
            well_depth_v0: 20.0,
            width_d: 0.9,
            effective_mass: 1.0,
        };
        let op = build_ring(&model).unwrap();
        let g = model.grid;
        let (ix, iy) = (7, 3);
        let (x, y) = (g.x(ix), g.y(iy));
        let r2 = x * x + y * y;
        let expect = 0.5 * r2 + 20.0 * (-r2 / 0.81).exp();
        let got = op.potential()[g.index(ix, iy)];
        assert!((got - expect).abs() < 1e-12, "v_ext mismatch {got} vs {expect}");
        // Dipole components carry the electron charge sign.
        assert_eq!(op.dipole(0)[g.index(ix, iy)], -x);
        assert_eq!(op.dipole(1)[g.index(ix, iy)], -y);
    }

    #[test]
    fn pair_density_reduction_normalizes_to_two() {
        let g = Grid1D::new(10, 0.5).unwrap();
        let geom = DensityGeometry::PairLine { grid: g };
        let mut probs = vec![0.0; 100];
        probs[3 * 10 + 7] = 0.25;
        probs[7 * 10 + 3] = 0.25;
        probs[5 * 10 + 5] = 0.5;
        let n = geom.reduce(&probs);
        let total: f64 = n.iter().sum::<f64>() * geom.cell_volume();
        assert!((total - 2.0).abs() < 1e-12, "density integrates to {total}");
        assert_eq!(n[3], n[7], "symmetric probabilities give symmetric density");
    }
}
