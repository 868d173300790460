//! Uniform real-space grids and the finite-difference stencils used on them.
//!
//! Boundary conditions are Dirichlet: the wavefunction is zero outside the
//! box, so stencil legs reaching past the edges are simply dropped.

use crate::error::{Error, Result};

/// Central coefficients of the eighth-order second-derivative stencil,
/// indexed by |offset| 0..=4. Apply as sum_k c[|k|] f(x + k dx) / dx^2.
pub const LAPLACIAN_8TH: [f64; 5] = [
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Antisymmetric coefficients of the eighth-order first-derivative stencil,
/// indexed by offset 1..=4. Apply as sum_k d[k-1] (f(x+k dx) - f(x-k dx)) / dx.
pub const GRADIENT_8TH: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Minimum grid size so the stencil has full support somewhere.
pub const MIN_POINTS: usize = 9;

/// A uniform 1D grid. Coordinates are centred on `center` (0 for the
/// symmetric boxes used by the atom and electron grids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_points: usize,
    spacing: f64,
    center: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, spacing: f64) -> Result<Self> {
        Self::with_center(n_points, spacing, 0.0)
    }

    pub fn with_center(n_points: usize, spacing: f64, center: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_POINTS} points for the eighth-order stencil, got {n_points}"
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("grid spacing must be > 0, got {spacing}")));
        }
        Ok(Self { n_points, spacing, center })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.center + (i as f64 - (self.n_points as f64 - 1.0) / 2.0) * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.coordinate(i)).collect()
    }
}

/// A uniform 2D grid, row-major indexed as `i = iy * n_x + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n_x: usize,
    n_y: usize,
    spacing_x: f64,
    spacing_y: f64,
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, spacing_x: f64, spacing_y: f64) -> Result<Self> {
        for (n, dx) in [(n_x, spacing_x), (n_y, spacing_y)] {
            if n < MIN_POINTS {
                return Err(Error::Config(format!(
                    "grid needs at least {MIN_POINTS} points per axis, got {n}"
                )));
            }
            if !(dx > 0.0) {
                return Err(Error::Domain(format!("grid spacing must be > 0, got {dx}")));
            }
        }
        Ok(Self { n_x, n_y, spacing_x, spacing_y })
    }

    pub fn square(n: usize, spacing: f64) -> Result<Self> {
        Self::new(n, n, spacing, spacing)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn spacing_x(&self) -> f64 {
        self.spacing_x
    }

    pub fn spacing_y(&self) -> f64 {
        self.spacing_y
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.n_x as f64 - 1.0) / 2.0) * self.spacing_x
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.n_y as f64 - 1.0) / 2.0) * self.spacing_y
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n_x + ix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_centres_on_zero() {
        let g = Grid1D::new(9, 0.5).unwrap();
        assert_eq!(g.coordinate(4), 0.0);
        assert_eq!(g.coordinate(0), -2.0);
        assert_eq!(g.coordinate(8), 2.0);
    }

    #[test]
    fn even_point_count_straddles_zero() {
        let g = Grid1D::new(10, 1.0).unwrap();
        assert_eq!(g.coordinate(4), -0.5);
        assert_eq!(g.coordinate(5), 0.5);
    }

    #[test]
    fn offset_grid_covers_positive_interval() {
        // Internuclear-distance grid (0, 9] with spacing 0.1: 90 points.
        let g = Grid1D::with_center(90, 0.1, 4.55).unwrap();
        assert!((g.coordinate(0) - 0.1).abs() < 1e-12);
        assert!((g.coordinate(89) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(matches!(Grid1D::new(8, 0.1), Err(Error::Config(_))));
        assert!(matches!(Grid1D::new(9, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn laplacian_coefficients_sum_to_zero() {
        // A constant function has zero second derivative.
        let s = LAPLACIAN_8TH[0] + 2.0 * (1..=4).map(|k| LAPLACIAN_8TH[k]).sum::<f64>();
        assert!(s.abs() < 1e-14, "stencil sum {s}");
    }
}
