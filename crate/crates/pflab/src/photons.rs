//! Discretized photon continua: sampling, truncation to the lowest modes,
//! and the per-polarization averaging that defines the effective-mode
//! approximation (mean frequency, root-sum-square coupling).

use crate::error::{Error, Result};

/// One photon mode. `coupling` holds the coupling-vector components per
/// matter direction; for a mode polarized along direction d only component d
/// is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonMode {
    pub omega: f64,
    pub coupling: Vec<f64>,
    pub polarization: usize,
}

impl PhotonMode {
    pub fn new(omega: f64, coupling: Vec<f64>, polarization: usize) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InfraredCutoff { omega });
        }
        Ok(Self { omega, coupling, polarization })
    }

    /// Squared coupling magnitude summed over directions.
    pub fn coupling_sq(&self) -> f64 {
        self.coupling.iter().map(|c| c * c).sum()
    }
}

/// Provenance of a mode list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathLabel {
    Sampled,
    Truncated,
    Averaged,
}

/// An ordered photon mode list: modes grouped by polarization, strictly
/// ascending in frequency within each group.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonBath {
    modes: Vec<PhotonMode>,
    label: BathLabel,
}

impl PhotonBath {
    pub fn from_modes(mut modes: Vec<PhotonMode>, label: BathLabel) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptyBath);
        }
        for m in &modes {
            if !(m.omega > 0.0) {
                return Err(Error::InfraredCutoff { omega: m.omega });
            }
        }
        modes.sort_by(|a, b| {
            (a.polarization, a.omega)
                .partial_cmp(&(b.polarization, b.omega))
                .expect("finite frequencies")
        });
        for pair in modes.windows(2) {
            if pair[0].polarization == pair[1].polarization && pair[0].omega >= pair[1].omega {
                return Err(Error::Domain(format!(
                    "duplicate frequency {} within polarization {}",
                    pair[1].omega, pair[1].polarization
                )));
            }
        }
        Ok(Self { modes, label })
    }

    pub fn modes(&self) -> &[PhotonMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn label(&self) -> BathLabel {
        self.label
    }

    pub fn polarizations(&self) -> usize {
        self.modes.iter().map(|m| m.polarization).max().map_or(0, |p| p + 1)
    }

    pub fn modes_of_polarization(&self, pol: usize) -> impl Iterator<Item = &PhotonMode> {
        self.modes.iter().filter(move |m| m.polarization == pol)
    }

    /// Total squared coupling of one polarization group.
    pub fn coupling_sq_of_polarization(&self, pol: usize) -> f64 {
        self.modes_of_polarization(pol).map(|m| m.coupling_sq()).sum()
    }

    /// Photonic zero-point energy sum(omega/2) of this bath.
    pub fn zero_point_energy(&self) -> f64 {
        self.modes.iter().map(|m| m.omega / 2.0).sum::<f64>()
    }

    /// Rescale the coupling magnitude of every mode of each polarization,
    /// keeping each mode polarized along its own direction. Used to set
    /// anisotropic couplings like (lambda_x, lambda_y) on a sampled bath.
    pub fn with_polarization_couplings(&self, lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() != self.polarizations() {
            return Err(Error::Config(format!(
                "expected {} coupling values, got {}",
                self.polarizations(),
                lambdas.len()
            )));
        }
        let n_dir = self.modes[0].coupling.len();
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let mut coupling = vec![0.0; n_dir];
                coupling[m.polarization] = lambdas[m.polarization];
                PhotonMode { omega: m.omega, coupling, polarization: m.polarization }
            })
            .collect();
        Self::from_modes(modes, self.label)
    }
}

/// Sample `n_modes` equidistant frequencies on [omega_min, omega_max]
/// (endpoints included), replicated once per polarization direction with the
/// same fundamental coupling `lambda` along that direction.
pub fn sample_continuum(
    omega_min: f64,
    omega_max: f64,
    n_modes: usize,
    lambda: f64,
    polarizations: usize,
) -> Result<PhotonBath> {
    if !(omega_min > 0.0) {
        return Err(Error::InfraredCutoff { omega: omega_min });
    }
    if !(omega_max > omega_min) && n_modes > 1 {
        return Err(Error::Domain(format!(
            "frequency window [{omega_min}, {omega_max}] is empty"
        )));
    }
    if n_modes == 0 {
        return Err(Error::EmptyBath);
    }
    if polarizations == 0 {
        return Err(Error::Domain("at least one polarization direction required".into()));
    }
    if lambda < 0.0 {
        return Err(Error::Domain(format!("coupling must be >= 0, got {lambda}")));
    }
    let spacing = if n_modes > 1 {
        (omega_max - omega_min) / (n_modes as f64 - 1.0)
    } else {
        0.0
    };
    let mut modes = Vec::with_capacity(n_modes * polarizations);
    for pol in 0..polarizations {
        for k in 0..n_modes {
            let omega = omega_min + spacing * k as f64;
            let mut coupling = vec![0.0; polarizations];
            coupling[pol] = lambda;
            modes.push(PhotonMode { omega, coupling, polarization: pol });
        }
    }
    PhotonBath::from_modes(modes, BathLabel::Sampled)
}

/// Keep the `k` lowest-frequency modes of each polarization, couplings
/// unchanged.
pub fn truncate_lowest(bath: &PhotonBath, k_per_polarization: usize) -> Result<PhotonBath> {
    if k_per_polarization == 0 {
        return Err(Error::EmptyBath);
    }
    let mut modes = Vec::new();
    for pol in 0..bath.polarizations() {
        let group: Vec<&PhotonMode> = bath.modes_of_polarization(pol).collect();
        if group.is_empty() {
            continue;
        }
        if k_per_polarization > group.len() {
            return Err(Error::Domain(format!(
                "cannot keep {k_per_polarization} modes, polarization {pol} has {}",
                group.len()
            )));
        }
        modes.extend(group[..k_per_polarization].iter().map(|m| (*m).clone()));
    }
    PhotonBath::from_modes(modes, BathLabel::Truncated)
}

/// Collapse each polarization group to one effective mode carrying the mean
/// frequency and the root-sum-square coupling of the group.
pub fn average_bath(bath: &PhotonBath) -> Result<PhotonBath> {
    if bath.is_empty() {
        return Err(Error::EmptyBath);
    }
    let n_dir = bath.modes[0].coupling.len();
    let mut modes = Vec::new();
    for pol in 0..bath.polarizations() {
        let group: Vec<&PhotonMode> = bath.modes_of_polarization(pol).collect();
        if group.is_empty() {
            continue;
        }
        let omega_ave = group.iter().map(|m| m.omega).sum::<f64>() / group.len() as f64;
        let mut coupling_sq = vec![0.0; n_dir];
        for m in group {
            for (d, c) in m.coupling.iter().enumerate() {
                coupling_sq[d] += c * c;
            }
        }
        let coupling: Vec<f64> = coupling_sq.iter().map(|s| s.sqrt()).collect();
        modes.push(PhotonMode { omega: omega_ave, coupling, polarization: pol });
    }
    PhotonBath::from_modes(modes, BathLabel::Averaged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sampling_matches_quoted_spacing_and_average() {
        let bath = sample_continuum(0.01, 0.5, 250, 0.05, 1).unwrap();
        assert_eq!(bath.len(), 250);
        let spacing = bath.modes()[1].omega - bath.modes()[0].omega;
        assert!((spacing - 0.00197).abs() < 5e-6, "spacing {spacing}");
        let ave = average_bath(&bath).unwrap();
        assert_eq!(ave.len(), 1);
        assert!((ave.modes()[0].omega - 0.255).abs() < 5e-4, "omega_ave {}", ave.modes()[0].omega);
    }

    #[test]
    fn single_mode_sampling_returns_lower_cutoff() {
        let bath = sample_continuum(0.01, 0.5, 1, 0.1, 1).unwrap();
        assert_eq!(bath.len(), 1);
        assert_eq!(bath.modes()[0].omega, 0.01);
    }

    #[test]
    fn polarization_groups_are_replicated() {
        let bath = sample_continuum(0.01, 0.5, 10, 0.03, 2).unwrap();
        assert_eq!(bath.len(), 20);
        let g0: Vec<f64> = bath.modes_of_polarization(0).map(|m| m.omega).collect();
        let g1: Vec<f64> = bath.modes_of_polarization(1).map(|m| m.omega).collect();
        assert_eq!(g0, g1);
        for m in bath.modes_of_polarization(1) {
            assert_eq!(m.coupling, vec![0.0, 0.03]);
        }
    }

    #[test]
    fn zero_frequency_sampling_is_an_infrared_error() {
        assert!(matches!(
            sample_continuum(0.0, 0.5, 10, 0.1, 1),
            Err(Error::InfraredCutoff { .. })
        ));
    }

    #[test]
    fn truncation_keeps_ordered_prefix() {
        let bath = sample_continuum(0.01, 0.5, 10, 0.1, 1).unwrap();
        let cut = truncate_lowest(&bath, 3).unwrap();
        assert_eq!(cut.label(), BathLabel::Truncated);
        let kept: Vec<f64> = cut.modes().iter().map(|m| m.omega).collect();
        let expect: Vec<f64> = bath.modes()[..3].iter().map(|m| m.omega).collect();
        assert_eq!(kept, expect);
        // Keeping everything is the identity on the mode list.
        let all = truncate_lowest(&bath, 10).unwrap();
        assert_eq!(all.modes(), bath.modes());
        // The single kept mode of the 250-mode reference bath sits at 0.01.
        let reference = sample_continuum(0.01, 0.5, 250, 0.1, 1).unwrap();
        let low = truncate_lowest(&reference, 1).unwrap();
        assert_eq!(low.modes()[0].omega, 0.01);
        assert_eq!(low.modes()[0].coupling, vec![0.1]);
    }

    #[test]
    fn truncation_errors() {
        let bath = sample_continuum(0.01, 0.5, 4, 0.1, 1).unwrap();
        assert!(matches!(truncate_lowest(&bath, 0), Err(Error::EmptyBath)));
        assert!(matches!(truncate_lowest(&bath, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn averaging_four_equal_couplings_doubles_lambda() {
        let bath = sample_continuum(0.1, 0.4, 4, 0.01, 1).unwrap();
        let ave = average_bath(&bath).unwrap();
        assert_eq!(ave.len(), 1);
        assert!((ave.modes()[0].coupling[0] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn averaging_is_idempotent_and_conserves_coupling_power() {
        let bath = sample_continuum(0.02, 0.3, 17, 0.007, 2).unwrap();
        let ave = average_bath(&bath).unwrap();
        let twice = average_bath(&ave).unwrap();
        assert_eq!(ave.modes(), twice.modes());
        for pol in 0..2 {
            let before = bath.coupling_sq_of_polarization(pol);
            let after = ave.coupling_sq_of_polarization(pol);
            assert!(
                (before - after).abs() <= 4.0 * f64::EPSILON * before,
                "coupling power {before} -> {after}"
            );
        }
        // A single-mode bath is a fixed point.
        let single = sample_continuum(0.05, 0.5, 1, 0.3, 1).unwrap();
        let avg = average_bath(&single).unwrap();
        assert_eq!(avg.modes()[0].omega, 0.05);
        assert_eq!(avg.modes()[0].coupling, vec![0.3]);
    }

    #[test]
    fn anisotropic_couplings_rescale_each_polarization() {
        let bath = sample_continuum(0.01, 0.1, 3, 1.0, 2).unwrap();
        let scaled = bath.with_polarization_couplings(&[0.05, 0.01]).unwrap();
        for m in scaled.modes_of_polarization(0) {
            assert_eq!(m.coupling, vec![0.05, 0.0]);
        }
        for m in scaled.modes_of_polarization(1) {
            assert_eq!(m.coupling, vec![0.0, 0.01]);
        }
    }
}
