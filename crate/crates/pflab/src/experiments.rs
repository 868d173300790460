//! Scenario runner: each figure-style experiment maps to a reproducible
//! pipeline (assemble -> certify truncation -> solve -> evaluate) producing a
//! deterministic result table plus per-row convergence certificates.
//!
//! Energies of photon-carrying strategies are reported with the zero-point
//! energy of the operator's own bath subtracted, so that every strategy
//! reduces to the bare matter energy at zero coupling and mode counts can be
//! compared across strategies.

use crate::assembly::{
    assemble_length_gauge, assemble_strategy, assemble_velocity_gauge, AssemblyOptions,
    CoupledOperator, Strategy,
};
use crate::config::{RunConfig, ScenarioKind, TruncationSection};
use crate::error::{Error, Result};
use crate::matter::MatterOperator;
use crate::observables::{
    self, density_diff, dissociation_energy, electron_density, DensityField,
};
use crate::photons::PhotonBath;
use crate::solver::{ground_state, GroundState, SolverConfig};
use serde::Serialize;
use std::sync::Arc;

/// Truncation certificate of one solve: the ground-energy shift when the
/// Fock cutoff is raised one notch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    pub cutoffs: (u32, u32),
    pub energy_shift: f64,
    pub threshold: f64,
    pub certified: bool,
}

/// Solver and certification bookkeeping for one table entry.
#[derive(Debug, Clone, Serialize)]
pub struct SolveRecord {
    pub strategy: String,
    pub axis: Vec<(String, f64)>,
    pub energy: f64,
    /// Energy with the operator's photonic zero-point energy removed.
    pub energy_rel: f64,
    pub residual: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
    /// True when a photon-carrying solve ran without a certificate.
    pub provisional: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<String>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new(), row_labels: None }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Everything a scenario produces; `output::write_scenario` serializes it.
#[derive(Debug)]
pub struct ScenarioOutput {
    pub name: String,
    pub strategies_slug: String,
    pub table: ResultTable,
    pub summary: Option<ResultTable>,
    pub densities: Vec<(String, DensityField)>,
    pub records: Vec<SolveRecord>,
    pub extras: serde_json::Value,
}

struct Runner {
    opts: AssemblyOptions,
    solver: SolverConfig,
    trunc: TruncationSection,
    records: Vec<SolveRecord>,
}

struct Solved {
    op: CoupledOperator,
    state: GroundState,
    energy_rel: f64,
}

impl Runner {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            opts: cfg.assembly_options(),
            solver: cfg.solver,
            trunc: cfg.truncation,
            records: Vec::new(),
        }
    }

    /// Assemble, solve, and certify one strategy on one bath; pushes the
    /// bookkeeping record with the given axis coordinates.
    fn solve(
        &mut self,
        matter: &Arc<MatterOperator>,
        bath: &PhotonBath,
        strategy: Strategy,
        axis: &[(&str, f64)],
    ) -> Result<Solved> {
        let run = || -> Result<(Solved, Option<Certificate>)> {
            let op = assemble_strategy(
                matter.clone(),
                bath,
                strategy,
                self.trunc.truncation(),
                &self.opts,
                &self.solver,
            )?;
            let state = ground_state(&op, &self.solver)?;
            let energy_rel = state.energy - op.zero_point_energy();
            let certificate = if strategy != Strategy::MeanFieldDse && self.trunc.certify {
                let higher = self
                    .trunc
                    .truncation()
                    .with_cutoff(self.trunc.certify_cutoff());
                let op2 = assemble_strategy(
                    matter.clone(),
                    bath,
                    strategy,
                    higher,
                    &self.opts,
                    &self.solver,
                )?;
                let e2 = ground_state(&op2, &self.solver)?.energy;
                let shift = (state.energy - e2).abs();
                Some(Certificate {
                    cutoffs: (self.trunc.cutoff, self.trunc.certify_cutoff()),
                    energy_shift: shift,
                    threshold: self.trunc.certify_threshold,
                    certified: shift <= self.trunc.certify_threshold,
                })
            } else {
                None
            };
            Ok((Solved { op, state, energy_rel }, certificate))
        };
        let (solved, certificate) = run().map_err(|e| annotate(e, strategy, axis))?;
        self.records.push(SolveRecord {
            strategy: strategy.label().to_string(),
            axis: axis.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            energy: solved.state.energy,
            energy_rel: solved.energy_rel,
            residual: solved.state.residual,
            iterations: solved.state.iterations,
            certificate,
            provisional: certificate.is_none() && strategy != Strategy::MeanFieldDse,
        });
        Ok(solved)
    }
}

/// Attach the axis-point context to a propagated failure.
fn annotate(err: Error, strategy: Strategy, axis: &[(&str, f64)]) -> Error {
    let at: Vec<String> = axis.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let ctx = format!("[{} at {}] ", strategy.label(), at.join(", "));
    match err {
        Error::Config(m) => Error::Config(format!("{ctx}{m}")),
        Error::Domain(m) => Error::Domain(format!("{ctx}{m}")),
        Error::Usage(m) => Error::Usage(format!("{ctx}{m}")),
        Error::SolverStalled { residual, iterations } => {
            Error::Config(format!(
                "{ctx}solver stalled at residual {residual:.3e} after {iterations} matvecs"
            ))
        }
        other => other,
    }
}

fn strategies_slug(list: &[Strategy]) -> String {
    list.iter().map(|s| s.label()).collect::<Vec<_>>().join("-")
}

/// Least-squares exponent of y = c x^g over strictly positive samples.
pub fn fit_power_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in logs {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt()).max(f64::MIN_POSITIVE)
}

/// Mirror-asymmetry of a planar density: integral of |n(x,y) - n(y,x)|.
pub fn plane_anisotropy(field: &DensityField) -> Result<f64> {
    match field.geometry {
        crate::matter::DensityGeometry::Plane { grid } => {
            if grid.n_x() != grid.n_y() {
                return Err(Error::GridMismatch("anisotropy needs a square grid".into()));
            }
            let n = grid.n_x();
            let mut acc = 0.0;
            for iy in 0..n {
                for ix in 0..n {
                    acc += (field.values[iy * n + ix] - field.values[ix * n + iy]).abs();
                }
            }
            Ok(acc * field.geometry.cell_volume())
        }
        _ => Err(Error::GridMismatch("anisotropy is defined for planar densities".into())),
    }
}

/// Run the configured scenario to completion.
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    match cfg.scenario.name {
        ScenarioKind::ModeOccupation => mode_occupation(cfg),
        ScenarioKind::EnergyVsModes => energy_vs_modes(cfg),
        ScenarioKind::DensityDiffVsModes => density_diff_vs_modes(cfg),
        ScenarioKind::DensityDiffVsLambda => density_diff_vs_lambda(cfg),
        ScenarioKind::H2Dissociation => h2_dissociation(cfg),
        ScenarioKind::RingDensity => ring_density(cfg),
        ScenarioKind::GaugeCheck => gauge_check(cfg),
    }
}

fn build_matter(cfg: &RunConfig) -> Result<Arc<MatterOperator>> {
    Ok(Arc::new(match cfg.matter.kind_name() {
        "atom" => crate::matter::build_atom(&cfg.matter.atom_model()?)?,
        "ring" => crate::matter::build_ring(&cfg.matter.ring_model()?)?,
        other => {
            return Err(Error::Config(format!(
                "scenario cannot build matter kind {other} without an internuclear distance"
            )))
        }
    }))
}

fn approx_strategies(cfg: &RunConfig) -> Vec<Strategy> {
    cfg.strategies
        .list
        .iter()
        .copied()
        .filter(|&s| s != Strategy::Exact)
        .collect()
}

/// Photon occupation per mode of the exact ground state, for each coupling.
fn mode_occupation(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);
    let lambdas = cfg.sweep.lambda_grid.clone();

    let mut columns = vec!["omega".to_string()];
    columns.extend(lambdas.iter().map(|l| format!("n__lam{l}")));
    let mut per_lambda: Vec<Vec<f64>> = Vec::new();
    let mut omegas: Vec<f64> = Vec::new();
    for &lam in &lambdas {
        let bath = cfg.bath.sample(lam)?;
        let solved = runner.solve(&matter, &bath, Strategy::Exact, &[("lambda", lam)])?;
        omegas = solved.op.bath().modes().iter().map(|m| m.omega).collect();
        let ns: Result<Vec<f64>> = (0..solved.op.n_modes())
            .map(|m| observables::photon_number(&solved.state.vector, &solved.op, m))
            .collect();
        per_lambda.push(ns?);
    }

    let mut table = ResultTable::new(columns);
    for (i, &w) in omegas.iter().enumerate() {
        let mut row = vec![w];
        row.extend(per_lambda.iter().map(|ns| ns[i]));
        table.rows.push(row);
    }
    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary: None,
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::Value::Null,
    })
}

/// Ground energy against the number of sampled modes, per strategy. Each
/// mode count resamples the full frequency window.
fn energy_vs_modes(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);
    let lam = cfg.bath.lambda;

    let mut columns = vec!["n_p".to_string()];
    columns.extend(cfg.strategies.list.iter().map(|s| format!("e__{}", s.label())));
    let mut table = ResultTable::new(columns);
    for &np in &cfg.sweep.n_p_grid {
        let section = crate::config::BathSection { n_modes: np, ..cfg.bath.clone() };
        let bath = section.sample(lam)?;
        let mut row = vec![np as f64];
        for &strategy in &cfg.strategies.list {
            let solved = runner.solve(&matter, &bath, strategy, &[("n_p", np as f64)])?;
            row.push(solved.energy_rel);
        }
        table.rows.push(row);
    }

    // Cheap photonless branch pushed to large mode counts.
    let summary = match cfg.sweep.m_dse_n_p_max {
        Some(max) if max > 0 => {
            let mut s = ResultTable::new(vec!["n_p".into(), "e__m_dse".into()]);
            for np in 1..=max {
                let section = crate::config::BathSection { n_modes: np, ..cfg.bath.clone() };
                let bath = section.sample(lam)?;
                let solved =
                    runner.solve(&matter, &bath, Strategy::MeanFieldDse, &[("n_p", np as f64)])?;
                s.rows.push(vec![np as f64, solved.energy_rel]);
            }
            Some(s)
        }
        _ => None,
    };

    // Fitted growth exponents of E(N_p) - E(bare) per strategy.
    let bare = bare_matter_energy(&matter, &cfg.solver)?;
    let mut gammas = serde_json::Map::new();
    for &strategy in &cfg.strategies.list {
        let col = table
            .column(&format!("e__{}", strategy.label()))
            .expect("column exists");
        let pts: Vec<(f64, f64)> = cfg
            .sweep
            .n_p_grid
            .iter()
            .zip(&col)
            .map(|(&np, &e)| (np as f64, e - bare))
            .collect();
        if let Some(g) = fit_power_exponent(&pts) {
            gammas.insert(strategy.label().to_string(), serde_json::json!(g));
        }
    }

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary,
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::json!({ "bare_energy": bare, "growth_exponents": gammas }),
    })
}

fn bare_matter_energy(matter: &Arc<MatterOperator>, solver: &SolverConfig) -> Result<f64> {
    let mut b = crate::sparse::TripletBuilder::new(matter.dimension(), matter.dimension());
    for row in 0..matter.dimension() {
        for (col, v) in matter.kinetic().iter_row(row) {
            b.push(row, col, v);
        }
        b.push(row, row, matter.potential()[row]);
    }
    Ok(ground_state(&b.build(), solver)?.energy)
}

/// Integrated density difference against the exact reference, per mode count.
fn density_diff_vs_modes(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);
    let lam = cfg.bath.lambda;
    let approx = approx_strategies(cfg);

    let mut columns = vec!["n_p".to_string()];
    columns.extend(approx.iter().map(|s| format!("dn__{}", s.label())));
    let mut table = ResultTable::new(columns);
    for &np in &cfg.sweep.n_p_grid {
        let section = crate::config::BathSection { n_modes: np, ..cfg.bath.clone() };
        let bath = section.sample(lam)?;
        let exact = runner.solve(&matter, &bath, Strategy::Exact, &[("n_p", np as f64)])?;
        let reference = electron_density(&exact.state.vector, &exact.op);
        let mut row = vec![np as f64];
        for &strategy in &approx {
            let solved = runner.solve(&matter, &bath, strategy, &[("n_p", np as f64)])?;
            let density = electron_density(&solved.state.vector, &solved.op);
            row.push(density_diff(&density, &reference)?);
        }
        table.rows.push(row);
    }

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary: None,
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::Value::Null,
    })
}

/// Integrated density difference against the exact reference, per coupling.
fn density_diff_vs_lambda(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);
    let approx = approx_strategies(cfg);

    let mut columns = vec!["lambda".to_string()];
    columns.extend(approx.iter().map(|s| format!("dn__{}", s.label())));
    let mut table = ResultTable::new(columns);
    for &lam in &cfg.sweep.lambda_grid {
        let bath = cfg.bath.sample(lam)?;
        let exact = runner.solve(&matter, &bath, Strategy::Exact, &[("lambda", lam)])?;
        let reference = electron_density(&exact.state.vector, &exact.op);
        let mut row = vec![lam];
        for &strategy in &approx {
            let solved = runner.solve(&matter, &bath, strategy, &[("lambda", lam)])?;
            let density = electron_density(&solved.state.vector, &solved.op);
            row.push(density_diff(&density, &reference)?);
        }
        table.rows.push(row);
    }

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary: None,
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::Value::Null,
    })
}

/// Clamped-nuclei potential energy surfaces and dissociation energies.
fn h2_dissociation(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let model = cfg.matter.molecule_model()?;
    let mut runner = Runner::new(cfg);
    let mut r_values = cfg.sweep.r_values.clone();
    r_values.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let mut columns = vec!["r".to_string()];
    for (li, lam) in cfg.sweep.lambda_grid.iter().enumerate() {
        let _ = lam;
        for s in &cfg.strategies.list {
            columns.push(format!("e__{}__l{li}", s.label()));
        }
    }
    let mut table = ResultTable::new(columns);
    let mut pes: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); cfg.strategies.list.len()]; cfg.sweep.lambda_grid.len()];

    for &r in &r_values {
        let matter = Arc::new(crate::matter::build_molecule_electronic(&model, r)?);
        let mut row = vec![r];
        for (li, &lam) in cfg.sweep.lambda_grid.iter().enumerate() {
            let bath = cfg.bath.sample(lam)?;
            for (si, &strategy) in cfg.strategies.list.iter().enumerate() {
                let solved =
                    runner.solve(&matter, &bath, strategy, &[("r", r), ("lambda", lam)])?;
                row.push(solved.energy_rel);
                pes[li][si].push(solved.energy_rel);
            }
        }
        table.rows.push(row);
    }

    let mut summary = ResultTable::new(vec![
        "lambda".into(),
        "r_eq".into(),
        "d_e".into(),
        "e_min".into(),
    ]);
    let mut labels = Vec::new();
    for (li, &lam) in cfg.sweep.lambda_grid.iter().enumerate() {
        for (si, strategy) in cfg.strategies.list.iter().enumerate() {
            let curve: Vec<(f64, f64)> =
                r_values.iter().copied().zip(pes[li][si].iter().copied()).collect();
            let rep = dissociation_energy(&curve)?;
            labels.push(strategy.label().to_string());
            summary.rows.push(vec![
                lam,
                rep.equilibrium_distance,
                rep.dissociation_energy,
                rep.minimum_energy,
            ]);
        }
    }
    summary.row_labels = Some(labels);

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary: Some(summary),
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::Value::Null,
    })
}

/// Ring ground-state density maps, signed deviation fields against exact,
/// and symmetry-breaking diagnostics.
fn ring_density(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);
    let lx = cfg.sweep.lambda_x.expect("validated");
    let ly = cfg.sweep.lambda_y.expect("validated");
    let bath = cfg.bath.sample(1.0)?.with_polarization_couplings(&[lx, ly])?;

    let exact = runner.solve(&matter, &bath, Strategy::Exact, &[("lambda_x", lx), ("lambda_y", ly)])?;
    let exact_density = electron_density(&exact.state.vector, &exact.op);

    let mut densities = vec![("density__exact".to_string(), exact_density.clone())];
    let mut summary = ResultTable::new(vec![
        "max_abs_dev".into(),
        "integrated_abs_dev".into(),
        "anisotropy".into(),
    ]);
    let mut labels = vec!["exact".to_string()];
    summary.rows.push(vec![0.0, 0.0, plane_anisotropy(&exact_density)?]);

    let mut deviation_fields: Vec<(Strategy, Vec<f64>)> = Vec::new();
    for &strategy in &approx_strategies(cfg) {
        let solved =
            runner.solve(&matter, &bath, strategy, &[("lambda_x", lx), ("lambda_y", ly)])?;
        let density = electron_density(&solved.state.vector, &solved.op);
        let signed: Vec<f64> = density
            .values
            .iter()
            .zip(&exact_density.values)
            .map(|(a, b)| a - b)
            .collect();
        let max_abs = signed.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let integral = density_diff(&density, &exact_density)?;
        labels.push(strategy.label().to_string());
        summary.rows.push(vec![max_abs, integral, plane_anisotropy(&density)?]);
        densities.push((format!("density__{}", strategy.label()), density.clone()));
        densities.push((
            format!("deviation__{}", strategy.label()),
            DensityField { values: signed.clone(), geometry: exact_density.geometry },
        ));
        deviation_fields.push((strategy, signed));
    }
    summary.row_labels = Some(labels);

    // Signed-deviation correlations: the mean-field strategy pushes the
    // density the opposite way from the photon-carrying approximations.
    let mut correlations = serde_json::Map::new();
    if let Some((_, mdse)) = deviation_fields
        .iter()
        .find(|(s, _)| *s == Strategy::MeanFieldDse)
    {
        for (s, field) in &deviation_fields {
            if *s != Strategy::MeanFieldDse {
                correlations.insert(
                    format!("m_dse_vs_{}", s.label()),
                    serde_json::json!(pearson(mdse, field)),
                );
            }
        }
    }

    // Optional isotropic baseline for the anisotropy ratio.
    let mut baseline = serde_json::Value::Null;
    if let Some(b) = cfg.sweep.baseline_lambda {
        let iso = cfg.bath.sample(1.0)?.with_polarization_couplings(&[b, b])?;
        let solved =
            runner.solve(&matter, &iso, Strategy::Exact, &[("lambda_x", b), ("lambda_y", b)])?;
        let density = electron_density(&solved.state.vector, &solved.op);
        baseline = serde_json::json!({
            "lambda": b,
            "anisotropy": plane_anisotropy(&density)?,
        });
        densities.push(("density__baseline".to_string(), density));
    }

    // Main table: one row per strategy echoing the summary for CSV users.
    let table = ResultTable {
        columns: summary.columns.clone(),
        rows: summary.rows.clone(),
        row_labels: summary.row_labels.clone(),
    };

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: strategies_slug(&cfg.strategies.list),
        table,
        summary: None,
        densities,
        records: runner.records,
        extras: serde_json::json!({
            "deviation_correlations": correlations,
            "baseline": baseline,
        }),
    })
}

/// Length- against velocity-gauge observables on a single mode, plus the
/// incorrect length-gauge curves.
fn gauge_check(cfg: &RunConfig) -> Result<ScenarioOutput> {
    let matter = build_matter(cfg)?;
    let mut runner = Runner::new(cfg);

    let columns: Vec<String> = [
        "lambda",
        "e0_lg",
        "e0_vg",
        "n_lg",
        "n_vg",
        "q_lg",
        "q_vg",
        "esq_lg",
        "esq_vg",
        "n_lg_incorrect",
        "q_lg_incorrect",
        "esq_lg_incorrect",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut table = ResultTable::new(columns);

    for &lam in &cfg.sweep.lambda_grid {
        let bath = cfg.bath.sample(lam)?;
        let trunc = cfg.truncation.truncation();
        let lg = assemble_length_gauge(matter.clone(), &bath, trunc, &runner.opts)?;
        let vg = assemble_velocity_gauge(matter.clone(), &bath, trunc, &runner.opts)?;
        let gl = ground_state(&lg, &runner.solver)?;
        let gv = ground_state(&vg, &runner.solver)?;

        // Certify both gauges at the raised cutoff.
        let higher = trunc.with_cutoff(cfg.truncation.certify_cutoff());
        let lg2 = assemble_length_gauge(matter.clone(), &bath, higher, &runner.opts)?;
        let vg2 = assemble_velocity_gauge(matter.clone(), &bath, higher, &runner.opts)?;
        let e_lg2 = ground_state(&lg2, &runner.solver)?.energy;
        let e_vg2 = ground_state(&vg2, &runner.solver)?.energy;
        for (label, state, e2, op) in [
            ("length", &gl, e_lg2, &lg),
            ("velocity", &gv, e_vg2, &vg),
        ] {
            let shift = (state.energy - e2).abs();
            runner.records.push(SolveRecord {
                strategy: format!("exact_{label}"),
                axis: vec![("lambda".to_string(), lam)],
                energy: state.energy,
                energy_rel: state.energy - op.zero_point_energy(),
                residual: state.residual,
                iterations: state.iterations,
                certificate: Some(Certificate {
                    cutoffs: (cfg.truncation.cutoff, cfg.truncation.certify_cutoff()),
                    energy_shift: shift,
                    threshold: cfg.truncation.certify_threshold,
                    certified: shift <= cfg.truncation.certify_threshold,
                }),
                provisional: false,
            });
        }

        let n_lg = observables::photon_number(&gl.vector, &lg, 0)?;
        let n_vg = observables::photon_number(&gv.vector, &vg, 0)?;
        let q_lg = observables::mandel_q(&gl.vector, &lg, 0)?;
        let q_vg = observables::mandel_q(&gv.vector, &vg, 0)?;
        let esq_lg = observables::e_field_sq(&gl.vector, &lg, 0)?;
        let esq_vg = observables::e_field_sq(&gv.vector, &vg, 0)?;
        let wrong = observables::incorrect_lg_observables(&gl.vector, &lg, 0)?;
        table.rows.push(vec![
            lam,
            gl.energy,
            gv.energy,
            n_lg,
            n_vg,
            q_lg.unwrap_or(f64::NAN),
            q_vg.unwrap_or(f64::NAN),
            esq_lg,
            esq_vg,
            wrong.photon_number,
            wrong.mandel_q.unwrap_or(f64::NAN),
            wrong.e_field_sq,
        ]);
    }

    Ok(ScenarioOutput {
        name: cfg.scenario.name.name().to_string(),
        strategies_slug: "lg-vg".to_string(),
        table,
        summary: None,
        densities: Vec::new(),
        records: runner.records,
        extras: serde_json::Value::Null,
    })
}
