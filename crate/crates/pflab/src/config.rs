//! TOML run configurations: parsing, strict validation, unit normalization.
//!
//! Unknown keys are rejected outright; a silently ignored typo in a coupling
//! constant would corrupt a strategy comparison. Quantities may be given in
//! meV / nm through `_mev` / `_nm` suffixed keys, converted here and nowhere
//! else. The resolved [`RunConfig`] serializes back to the same schema, so
//! the metadata echo of a run can be fed back in unchanged.

use crate::assembly::{AssemblyOptions, Strategy};
use crate::error::{Error, Result};
use crate::fock::FockTruncation;
use crate::grid::{Grid1D, Grid2D};
use crate::matter::{AtomModel, MoleculeModel, QuantumRingModel};
use crate::solver::SolverConfig;
use crate::units::{mev_to_au, nm_to_au};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ModeOccupation,
    EnergyVsModes,
    DensityDiffVsModes,
    DensityDiffVsLambda,
    H2Dissociation,
    RingDensity,
    GaugeCheck,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::ModeOccupation,
        ScenarioKind::EnergyVsModes,
        ScenarioKind::DensityDiffVsModes,
        ScenarioKind::DensityDiffVsLambda,
        ScenarioKind::H2Dissociation,
        ScenarioKind::RingDensity,
        ScenarioKind::GaugeCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::ModeOccupation => "mode_occupation",
            ScenarioKind::EnergyVsModes => "energy_vs_modes",
            ScenarioKind::DensityDiffVsModes => "density_diff_vs_modes",
            ScenarioKind::DensityDiffVsLambda => "density_diff_vs_lambda",
            ScenarioKind::H2Dissociation => "h2_dissociation",
            ScenarioKind::RingDensity => "ring_density",
            ScenarioKind::GaugeCheck => "gauge_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    /// Composite-dimension budget enforced before any solve starts.
    pub fn dimension_budget(&self) -> u128 {
        match self {
            Scale::Desk => 4_000_000,
            Scale::Full => 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: ScenarioKind,
    #[serde(default = "default_scale")]
    pub scale: Scale,
}

fn default_scale() -> Scale {
    Scale::Desk
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatterSection {
    Atom {
        n_points: usize,
        spacing: f64,
        #[serde(default = "default_a_en_atom")]
        softening_a_en: f64,
        #[serde(default = "default_one")]
        nuclear_charge_z: f64,
        #[serde(default = "default_one")]
        mass: f64,
    },
    Molecule {
        n_points: usize,
        spacing: f64,
        #[serde(default = "default_two")]
        softening_a_ee: f64,
        #[serde(default = "default_one")]
        softening_a_en: f64,
        #[serde(default = "default_proton_mass")]
        proton_mass: f64,
    },
    Ring {
        n_points: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing_nm: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0_mev: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        well_depth: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        well_depth_mev: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width_nm: Option<f64>,
        #[serde(default = "default_effective_mass")]
        effective_mass: f64,
    },
}

fn default_a_en_atom() -> f64 {
    2.0
}
fn default_one() -> f64 {
    1.0
}
fn default_two() -> f64 {
    2.0
}
fn default_proton_mass() -> f64 {
    1836.0
}
fn default_effective_mass() -> f64 {
    0.067
}

/// Pick exactly one of an a.u. value and its unit-suffixed alternative.
fn resolve_unit(
    field: &str,
    au: Option<f64>,
    alt: Option<f64>,
    convert: fn(f64) -> f64,
) -> Result<f64> {
    match (au, alt) {
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(convert(v)),
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "matter.{field}: give either the a.u. value or the suffixed one, not both"
        ))),
        (None, None) => Err(Error::Config(format!("matter.{field} is required"))),
    }
}

impl MatterSection {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MatterSection::Atom { .. } => "atom",
            MatterSection::Molecule { .. } => "molecule",
            MatterSection::Ring { .. } => "ring",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MatterSection::Atom { n_points, spacing, softening_a_en, mass, .. } => {
                Grid1D::new(n_points, spacing)?;
                if !(softening_a_en > 0.0) {
                    return Err(Error::Config(
                        "matter.softening_a_en must be > 0 (the grid cannot host a bare Coulomb singularity)"
                            .into(),
                    ));
                }
                if !(mass > 0.0) {
                    return Err(Error::Config("matter.mass must be > 0".into()));
                }
            }
            MatterSection::Molecule {
                n_points,
                spacing,
                softening_a_ee,
                softening_a_en,
                proton_mass,
            } => {
                Grid1D::new(n_points, spacing)?;
                if !(softening_a_ee > 0.0 && softening_a_en > 0.0) {
                    return Err(Error::Config("matter softening parameters must be > 0".into()));
                }
                if !(proton_mass > 1.0) {
                    return Err(Error::Config(
                        "matter.proton_mass must exceed the electron mass".into(),
                    ));
                }
            }
            MatterSection::Ring { .. } => {
                let model = self.ring_model()?;
                if !(model.omega0 > 0.0 && model.well_depth_v0 >= 0.0) {
                    return Err(Error::Config("ring confinement must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn atom_model(&self) -> Result<AtomModel> {
        match *self {
            MatterSection::Atom { n_points, spacing, softening_a_en, nuclear_charge_z, mass } => {
                Ok(AtomModel {
                    grid: Grid1D::new(n_points, spacing)?,
                    softening_a_en,
                    nuclear_charge_z,
                    mass_m: mass,
                })
            }
            _ => Err(Error::Config("scenario requires matter.kind = \"atom\"".into())),
        }
    }

    pub fn molecule_model(&self) -> Result<MoleculeModel> {
        match *self {
            MatterSection::Molecule {
                n_points,
                spacing,
                softening_a_ee,
                softening_a_en,
                proton_mass,
            } => {
                let mut m = MoleculeModel::new(Grid1D::new(n_points, spacing)?);
                m.softening_a_ee = softening_a_ee;
                m.softening_a_en = softening_a_en;
                m.proton_mass = proton_mass;
                Ok(m)
            }
            _ => Err(Error::Config("scenario requires matter.kind = \"molecule\"".into())),
        }
    }

    pub fn ring_model(&self) -> Result<QuantumRingModel> {
        match self {
            MatterSection::Ring {
                n_points,
                spacing,
                spacing_nm,
                omega0,
                omega0_mev,
                well_depth,
                well_depth_mev,
                width,
                width_nm,
                effective_mass,
            } => {
                let dx = resolve_unit("spacing", *spacing, *spacing_nm, nm_to_au)?;
                Ok(QuantumRingModel {
                    grid: Grid2D::square(*n_points, dx)?,
                    omega0: resolve_unit("omega0", *omega0, *omega0_mev, mev_to_au)?,
                    well_depth_v0: resolve_unit(
                        "well_depth",
                        *well_depth,
                        *well_depth_mev,
                        mev_to_au,
                    )?,
                    width_d: resolve_unit("width", *width, *width_nm, nm_to_au)?,
                    effective_mass: *effective_mass,
                })
            }
            _ => Err(Error::Config("scenario requires matter.kind = \"ring\"".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_modes: usize,
    /// Fundamental coupling; scenarios sweeping lambda override it per point.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_one_usize")]
    pub polarizations: usize,
    /// Keep only this many lowest modes per polarization after sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes_kept: Option<usize>,
}

fn default_one_usize() -> usize {
    1
}

impl BathSection {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0) {
            return Err(Error::Config(format!(
                "bath.omega_min = {} violates the infrared cutoff: the discretized continuum has no zero-frequency mode, frequencies must be > 0",
                self.omega_min
            )));
        }
        if self.n_modes == 0 {
            return Err(Error::Config("bath.n_modes must be >= 1".into()));
        }
        if self.n_modes > 1 && !(self.omega_max > self.omega_min) {
            return Err(Error::Config(
                "bath.omega_max must exceed bath.omega_min (valid window e.g. [0.01, 0.5] a.u.)"
                    .into(),
            ));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config(format!("bath.lambda = {} must be >= 0", self.lambda)));
        }
        if let Some(k) = self.modes_kept {
            if k == 0 || k > self.n_modes {
                return Err(Error::Config(format!(
                    "bath.modes_kept = {k} must be in 1..={}",
                    self.n_modes
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, lambda: f64) -> Result<crate::photons::PhotonBath> {
        let bath = crate::photons::sample_continuum(
            self.omega_min,
            self.omega_max,
            self.n_modes,
            lambda,
            self.polarizations,
        )?;
        match self.modes_kept {
            Some(k) => crate::photons::truncate_lowest(&bath, k),
            None => Ok(bath),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default = "default_scheme")]
    pub scheme: TruncationScheme,
    pub cutoff: u32,
    /// Cutoff of the certification re-solve; defaults to cutoff + 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify_cutoff: Option<u32>,
    #[serde(default = "default_certify_threshold")]
    pub certify_threshold: f64,
    #[serde(default = "default_true")]
    pub certify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationScheme {
    PerMode,
    TotalExcitation,
}

fn default_scheme() -> TruncationScheme {
    TruncationScheme::TotalExcitation
}
fn default_certify_threshold() -> f64 {
    1e-4
}
fn default_true() -> bool {
    true
}

impl TruncationSection {
    pub fn truncation(&self) -> FockTruncation {
        match self.scheme {
            TruncationScheme::PerMode => FockTruncation::PerMode { cutoff: self.cutoff },
            TruncationScheme::TotalExcitation => {
                FockTruncation::TotalExcitation { cutoff: self.cutoff }
            }
        }
    }

    pub fn certify_cutoff(&self) -> u32 {
        self.certify_cutoff.unwrap_or(self.cutoff + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::Config("truncation.cutoff must be >= 1".into()));
        }
        if self.certify_cutoff() <= self.cutoff {
            return Err(Error::Config(
                "truncation.certify_cutoff must exceed truncation.cutoff".into(),
            ));
        }
        if !(self.certify_threshold > 0.0) {
            return Err(Error::Config("truncation.certify_threshold must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_p_grid: Vec<usize>,
    /// Extra mode-count reach for the photonless mean-field branch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_dse_n_p_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_y: Option<f64>,
    /// Isotropic coupling for the symmetry-baseline ring run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategiesSection {
    pub list: Vec<Strategy>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// 0 lets the runtime pick the core count.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_log_level")]
    pub log_level: String,
    #[serde(default)]
    pub overwrite: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            output_dir: default_output_dir(),
            threads: 0,
            log_level: default_log_level(),
            overwrite: false,
        }
    }
}

fn default_output_dir() -> String {
    "out".to_string()
}
fn default_log_level() -> String {
    "info".to_string()
}

/// A fully validated run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub matter: MatterSection,
    pub bath: BathSection,
    pub truncation: TruncationSection,
    #[serde(default = "default_solver")]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    pub strategies: StrategiesSection,
    #[serde(default)]
    pub run: RunSection,
}

fn default_solver() -> SolverConfig {
    SolverConfig::default()
}

impl RunConfig {
    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            max_dimension: self.scenario.scale.dimension_budget(),
            ..AssemblyOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.matter.validate()?;
        self.bath.validate()?;
        self.truncation.validate()?;
        self.solver.validate()?;
        if self.strategies.list.is_empty() {
            return Err(Error::Config("strategies.list must not be empty".into()));
        }
        for &l in &self.sweep.lambda_grid {
            if l < 0.0 {
                return Err(Error::Config(format!("sweep.lambda_grid entry {l} must be >= 0")));
            }
        }
        for &(name, v) in &[
            ("lambda_x", self.sweep.lambda_x),
            ("lambda_y", self.sweep.lambda_y),
            ("baseline_lambda", self.sweep.baseline_lambda),
        ] {
            if let Some(v) = v {
                if v < 0.0 {
                    return Err(Error::Config(format!("sweep.{name} = {v} must be >= 0")));
                }
            }
        }
        for &r in &self.sweep.r_values {
            if !(r > 0.0) {
                return Err(Error::Config(format!(
                    "sweep.r_values entry {r} must be > 0 (internuclear distance)"
                )));
            }
        }
        self.validate_scenario_requirements()
    }

    fn validate_scenario_requirements(&self) -> Result<()> {
        use ScenarioKind::*;
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "scenario {} requires {what}",
                    self.scenario.name.name()
                )))
            }
        };
        match self.scenario.name {
            ModeOccupation => {
                need(!self.sweep.lambda_grid.is_empty(), "sweep.lambda_grid")?;
                need(self.matter.kind_name() != "ring", "a 1D matter model")?;
            }
            EnergyVsModes | DensityDiffVsModes => {
                need(!self.sweep.n_p_grid.is_empty(), "sweep.n_p_grid")?;
                need(self.bath.lambda > 0.0, "bath.lambda > 0")?;
            }
            DensityDiffVsLambda => {
                need(!self.sweep.lambda_grid.is_empty(), "sweep.lambda_grid")?;
            }
            H2Dissociation => {
                need(self.matter.kind_name() == "molecule", "matter.kind = \"molecule\"")?;
                need(!self.sweep.r_values.is_empty(), "sweep.r_values")?;
                need(!self.sweep.lambda_grid.is_empty(), "sweep.lambda_grid")?;
            }
            RingDensity => {
                need(self.matter.kind_name() == "ring", "matter.kind = \"ring\"")?;
                need(self.bath.polarizations == 2, "bath.polarizations = 2")?;
                let (lx, ly) = (self.sweep.lambda_x, self.sweep.lambda_y);
                need(lx.is_some() && ly.is_some(), "sweep.lambda_x and sweep.lambda_y")?;
                if lx.unwrap() < ly.unwrap() {
                    return Err(Error::Config(
                        "ring runs expect sweep.lambda_x >= sweep.lambda_y (the stronger coupling breaks the symmetry along x)"
                            .into(),
                    ));
                }
            }
            GaugeCheck => {
                need(!self.sweep.lambda_grid.is_empty(), "sweep.lambda_grid")?;
                need(self.bath.n_modes == 1, "a single-mode bath (bath.n_modes = 1)")?;
                need(self.matter.kind_name() == "atom", "matter.kind = \"atom\"")?;
            }
        }
        Ok(())
    }

    /// Canonical serialized form, used for hashing and the metadata echo.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [scenario]
        name = "gauge_check"

        [matter]
        kind = "atom"
        n_points = 101
        spacing = 0.4

        [bath]
        omega_min = 0.1
        omega_max = 0.1
        n_modes = 1

        [truncation]
        scheme = "per_mode"
        cutoff = 20

        [sweep]
        lambda_grid = [0.0, 0.05]

        [strategies]
        list = ["exact"]
    "#;

    #[test]
    fn minimal_config_parses_with_defaults_filled() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.scenario.scale, Scale::Desk);
        assert_eq!(cfg.solver.tol, 1e-10);
        assert_eq!(cfg.run.output_dir, "out");
        assert_eq!(cfg.truncation.certify_cutoff(), 21);
        // The resolved echo round-trips to an identical configuration.
        let echo = cfg.canonical_toml();
        let again = parse_config(&echo).unwrap();
        assert_eq!(echo, again.canonical_toml());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("[sweep]", "[sweep]\nlamda_grid = [0.1]");
        let err = parse_config(&bad).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "unknown key must fail: {err}");
        assert!(err.to_string().contains("lamda_grid"), "message names the key: {err}");
    }

    #[test]
    fn zero_omega_min_names_the_infrared_cutoff() {
        let bad = MINIMAL.replace("omega_min = 0.1", "omega_min = 0.0");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("infrared"), "{err}");
    }

    #[test]
    fn negative_lambda_is_rejected() {
        let bad = MINIMAL.replace("n_modes = 1", "n_modes = 1\nlambda = -0.01");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn ring_units_are_converted_at_the_boundary() {
        let text = r#"
            [scenario]
            name = "ring_density"

            [matter]
            kind = "ring"
            n_points = 31
            spacing_nm = 0.7052
            omega0_mev = 10.0
            well_depth_mev = 200.0
            width_nm = 10.0

            [bath]
            omega_min = 0.01
            omega_max = 0.5
            n_modes = 250
            polarizations = 2
            modes_kept = 2

            [truncation]
            cutoff = 2

            [sweep]
            lambda_x = 0.01
            lambda_y = 0.006

            [strategies]
            list = ["exact", "nrqed_ave"]
        "#;
        let cfg = parse_config(text).unwrap();
        let ring = cfg.matter.ring_model().unwrap();
        assert!((ring.omega0 - 3.6749e-4).abs() < 1e-8);
        assert!((ring.width_d - 188.97).abs() < 0.02);
        // Both unit variants at once is ambiguous and must fail.
        let bad = text.replace("width_nm = 10.0", "width_nm = 10.0\nwidth = 188.97");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn scenario_requirements_are_enforced() {
        let bad = MINIMAL.replace("lambda_grid = [0.0, 0.05]", "lambda_grid = []");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("lambda_grid"), "{err}");

        let two_modes = MINIMAL
            .replace("omega_max = 0.1", "omega_max = 0.2")
            .replace("n_modes = 1", "n_modes = 2");
        let err = parse_config(&two_modes).unwrap_err();
        assert!(err.to_string().contains("single-mode"), "{err}");
    }
}
