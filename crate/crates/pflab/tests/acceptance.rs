//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Tolerances are fixed here,
//! not tuned at runtime. The scenario-level checks run the shipped desk
//! configurations end to end.

use pflab::assembly::{
    assemble_length_gauge, assemble_m_dse, assemble_strategy, assemble_velocity_gauge,
    AssemblyOptions, Strategy,
};
use pflab::config::{parse_config, RunConfig};
use pflab::experiments::{fit_power_exponent, run_scenario, ResultTable, ScenarioOutput};
use pflab::fock::FockTruncation;
use pflab::grid::{Grid1D, Grid2D};
use pflab::matter::{
    build_atom, build_molecule_electronic, build_ring, AtomModel, MatterOperator, MoleculeModel,
    QuantumRingModel,
};
use pflab::observables::{
    self, density_diff, electron_density, mean_current, zero_field_residual,
};
use pflab::photons::{average_bath, sample_continuum};
use pflab::solver::{convergence_sweep, ground_state, lowest_k, Method, SolverConfig};
use pflab::sparse::{SymOp, TripletBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn shipped_config(name: &str) -> RunConfig {
    let path = format!("{}/../../configs/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    parse_config(&text).unwrap_or_else(|e| panic!("parse {path}: {e}"))
}

fn bare_operator(matter: &MatterOperator) -> pflab::sparse::Csr {
    let n = matter.dimension();
    let mut b = TripletBuilder::new(n, n);
    for row in 0..n {
        for (col, v) in matter.kinetic().iter_row(row) {
            b.push(row, col, v);
        }
        b.push(row, row, matter.potential()[row]);
    }
    b.build()
}

fn column(t: &ResultTable, name: &str) -> Vec<f64> {
    t.column(name).unwrap_or_else(|| panic!("column {name} in {:?}", t.columns))
}

fn pass(criterion: &str, detail: &str) {
    println!("criterion {criterion}: PASS - {detail}");
}

/// Criterion 1: bare-matter reference energies on the reference grids.
#[test]
fn criterion_1_bare_matter_reference_energies() {
    let atom = build_atom(&AtomModel::reference()).unwrap();
    let cfg = SolverConfig::default();
    let e_atom = ground_state(&bare_operator(&atom), &cfg).unwrap().energy;
    assert!(
        (e_atom + 0.500).abs() < 1e-3,
        "atom ground energy {e_atom} vs -0.500 within 1e-3"
    );

    let molecule = build_molecule_electronic(&MoleculeModel::reference(), 1.9).unwrap();
    let e_h2 = ground_state(&bare_operator(&molecule), &cfg).unwrap().energy;
    assert!(
        (e_h2 + 1.4843).abs() < 2e-3,
        "H2 ground energy {e_h2} vs -1.4843 within 2e-3"
    );
    pass("1 (bare matter references)", &format!("atom {e_atom:.6}, H2 {e_h2:.6}"));
}

/// Criterion 2: continuum sampling spacing and average frequency.
#[test]
fn criterion_2_continuum_sampling() {
    let bath = sample_continuum(0.01, 0.5, 250, 0.05, 1).unwrap();
    let spacing = bath.modes()[1].omega - bath.modes()[0].omega;
    assert!(
        (spacing - 0.00197).abs() < 5e-6,
        "mode spacing {spacing} vs 0.00197 within 5e-6"
    );
    let ave = average_bath(&bath).unwrap();
    let w_ave = ave.modes()[0].omega;
    assert!(
        (w_ave - 0.255).abs() < 5e-4,
        "average frequency {w_ave} vs 0.255 within 5e-4"
    );
    pass("2 (continuum sampling)", &format!("spacing {spacing:.6}, average {w_ave:.4}"));
}

/// Criterion 3: certified gauge consistency plus diverging incorrect forms.
#[test]
fn criterion_3_gauge_consistency() {
    let cfg = shipped_config("atom-fig8");
    let out = run_scenario(&cfg).expect("gauge scenario runs");
    let lam = column(&out.table, "lambda");
    assert_eq!(lam, vec![0.0, 0.02, 0.05, 0.1], "coupling grid from the criterion");

    for rec in &out.records {
        let cert = rec.certificate.expect("gauge rows carry certificates");
        assert!(
            cert.certified,
            "{} at {:?}: cutoff shift {:.2e} above {:.2e}",
            rec.strategy, rec.axis, cert.energy_shift, cert.threshold
        );
    }

    let pairs = [("e0_lg", "e0_vg"), ("n_lg", "n_vg"), ("esq_lg", "esq_vg"), ("q_lg", "q_vg")];
    for (a, b) in pairs {
        let ca = column(&out.table, a);
        let cb = column(&out.table, b);
        for (i, (&x, &y)) in ca.iter().zip(&cb).enumerate() {
            if x.is_nan() && y.is_nan() {
                continue; // Mandel Q undefined at zero coupling in both gauges.
            }
            assert!(
                (x - y).abs() <= 1e-6,
                "{a} vs {b} at lambda {}: {x} vs {y}",
                lam[i]
            );
        }
    }

    // Incorrect-LG deviation: zero at lambda = 0, strictly increasing in it.
    let n_ok = column(&out.table, "n_lg");
    let n_bad = column(&out.table, "n_lg_incorrect");
    let e_ok = column(&out.table, "esq_lg");
    let e_bad = column(&out.table, "esq_lg_incorrect");
    let dev: Vec<f64> = (0..lam.len())
        .map(|i| (n_bad[i] - n_ok[i]).abs() + (e_bad[i] - e_ok[i]).abs())
        .collect();
    assert!(dev[0] < 1e-12, "incorrect forms coincide at lambda = 0, got {}", dev[0]);
    for w in dev.windows(2) {
        assert!(w[1] > w[0], "incorrect-LG deviation not increasing: {dev:?}");
    }
    pass(
        "3 (gauge consistency)",
        &format!("max |LG-VG| energy gap {:.2e}", {
            let a = column(&out.table, "e0_lg");
            let b = column(&out.table, "e0_vg");
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        }),
    );
}

/// Criterion 4: occupation decreasing in frequency, increasing in coupling.
#[test]
fn criterion_4_mode_occupation_trend() {
    let cfg = shipped_config("atom-fig1");
    assert_eq!(cfg.bath.n_modes, 8, "desk mode count from the criterion");
    assert_eq!(cfg.sweep.lambda_grid.len(), 2, "two coupling values");
    let out = run_scenario(&cfg).expect("occupation scenario runs");
    let low = column(&out.table, &format!("n__lam{}", cfg.sweep.lambda_grid[0]));
    let high = column(&out.table, &format!("n__lam{}", cfg.sweep.lambda_grid[1]));
    for col in [&low, &high] {
        for w in col.windows(2) {
            assert!(w[1] < w[0], "occupation must fall with frequency: {col:?}");
        }
    }
    for (i, (&l, &h)) in low.iter().zip(&high).enumerate() {
        assert!(h > l, "occupation must rise with coupling at mode {i}: {l} vs {h}");
    }
    pass(
        "4 (mode occupation trend)",
        &format!("n ranges {:.2e}..{:.2e}", low.last().unwrap(), high[0]),
    );
}

/// Criterion 5: growth exponents of the energy shift against mode count.
#[test]
fn criterion_5_energy_scaling_trend() {
    let cfg = shipped_config("atom-fig2");
    assert_eq!(cfg.sweep.n_p_grid, vec![1, 2, 4, 8, 12]);
    assert_eq!(cfg.sweep.m_dse_n_p_max, Some(250));
    let out = run_scenario(&cfg).expect("energy scenario runs");
    let gammas = out.extras["growth_exponents"].as_object().expect("fits recorded");
    let g_exact = gammas["exact"].as_f64().unwrap();
    let g_ave = gammas["nrqed_ave"].as_f64().unwrap();
    let g_mdse = gammas["m_dse"].as_f64().unwrap();
    assert!(
        (0.95..=1.05).contains(&g_mdse),
        "mean-field exponent {g_mdse} outside [0.95, 1.05]"
    );
    assert!(g_exact < 0.9, "exact exponent {g_exact} not below 0.9");
    assert!(g_ave < 0.9, "averaged exponent {g_ave} not below 0.9");

    // The photonless branch alone, pushed to 250 modes, stays linear.
    let summary = out.summary.as_ref().expect("long mean-field branch present");
    let bare = out.extras["bare_energy"].as_f64().unwrap();
    let pts: Vec<(f64, f64)> = summary.rows.iter().map(|r| (r[0], r[1] - bare)).collect();
    let g_long = fit_power_exponent(&pts).expect("fit over 250 points");
    assert!(
        (0.95..=1.05).contains(&g_long),
        "250-mode mean-field exponent {g_long} outside [0.95, 1.05]"
    );
    pass(
        "5 (energy scaling trend)",
        &format!("gamma exact {g_exact:.3}, ave {g_ave:.3}, m_dse {g_mdse:.3} / {g_long:.3} @250"),
    );
}

/// Criterion 6: the averaged strategy deviates least, and deviations vanish
/// monotonically with the coupling.
#[test]
fn criterion_6_strategy_ordering() {
    let cfg = shipped_config("atom-fig4");
    let out = run_scenario(&cfg).expect("density scenario runs");
    let lam = column(&out.table, "lambda");
    let ave = column(&out.table, "dn__nrqed_ave");
    let low = column(&out.table, "dn__nrqed_low");
    let mdse = column(&out.table, "dn__m_dse");

    let at = lam.iter().position(|&l| l == 0.05).expect("coupling 0.05 on the grid");
    assert!(
        ave[at] <= low[at] && ave[at] <= mdse[at],
        "at lambda 0.05: ave {:.3e} vs low {:.3e}, m_dse {:.3e}",
        ave[at],
        low[at],
        mdse[at]
    );
    for col in [&ave, &low, &mdse] {
        for w in col.windows(2) {
            assert!(
                w[0] < w[1],
                "density deviation must shrink monotonically towards lambda -> 0: {col:?}"
            );
        }
        assert!(col[0] < col[col.len() - 1] / 2.0, "clear decrease over the grid");
    }

    // Ring counterpart at the coupling pair from the criterion.
    let ring_cfg = shipped_config("ring-fig6");
    assert_eq!(ring_cfg.sweep.lambda_x, Some(0.01));
    assert_eq!(ring_cfg.sweep.lambda_y, Some(0.006));
    let ring = run_scenario(&ring_cfg).expect("ring scenario runs");
    let max_dev = |out: &ScenarioOutput, strategy: &str| -> f64 {
        let labels = out.table.row_labels.as_ref().expect("labelled rows");
        let idx = labels.iter().position(|l| l == strategy).expect("strategy row");
        out.table.rows[idx][0]
    };
    let (r_ave, r_low, r_mdse) = (
        max_dev(&ring, "nrqed_ave"),
        max_dev(&ring, "nrqed_low"),
        max_dev(&ring, "m_dse"),
    );
    assert!(
        r_ave <= r_low && r_ave <= r_mdse,
        "ring: ave {r_ave:.3e} vs low {r_low:.3e}, m_dse {r_mdse:.3e}"
    );
    pass(
        "6 (strategy ordering)",
        &format!(
            "atom dn(ave) {:.2e} <= low {:.2e}, m_dse {:.2e}; ring {r_ave:.2e} <= {r_low:.2e}, {r_mdse:.2e}",
            ave[at], low[at], mdse[at]
        ),
    );
}

/// Criterion 7: dissociation energies on the desk molecule.
#[test]
fn criterion_7_h2_dissociation() {
    let cfg = shipped_config("h2-fig5");
    assert!(cfg.matter.molecule_model().unwrap().e_grid.n_points() <= 80);
    let out = run_scenario(&cfg).expect("dissociation scenario runs");
    let summary = out.summary.as_ref().expect("dissociation summary");
    let labels = summary.row_labels.as_ref().unwrap();

    let lookup = |lambda: f64, strategy: &str| -> (f64, f64) {
        for (i, row) in summary.rows.iter().enumerate() {
            if row[0] == lambda && labels[i] == strategy {
                return (row[1], row[2]); // (r_eq, d_e)
            }
        }
        panic!("no summary row for {strategy} at lambda {lambda}");
    };

    let (r_eq0, _) = lookup(0.0, "exact");
    assert!((r_eq0 - 1.9).abs() <= 0.1, "bare equilibrium distance {r_eq0} vs 1.9 +- 0.1");

    let lambdas = &cfg.sweep.lambda_grid;
    let d_exact: Vec<f64> = lambdas.iter().map(|&l| lookup(l, "exact").1).collect();
    for w in d_exact.windows(2) {
        assert!(
            w[1] > w[0],
            "dissociation energy must increase with coupling: {d_exact:?}"
        );
    }

    let lam_max = *lambdas.last().unwrap();
    let d_e = lookup(lam_max, "exact").1;
    let d_ave = lookup(lam_max, "nrqed_ave").1;
    let d_mdse = lookup(lam_max, "m_dse").1;
    assert!(
        (d_ave - d_e).abs() < (d_mdse - d_e).abs(),
        "averaged strategy closer: |{d_ave:.6} - {d_e:.6}| vs |{d_mdse:.6} - {d_e:.6}|"
    );
    pass(
        "7 (H2 dissociation)",
        &format!("r_eq {r_eq0}, D_e(lambda) {d_exact:?}"),
    );
}

/// Criterion 8: the always-on property battery.
#[test]
fn criterion_8_property_suites() {
    let cfg = SolverConfig::default();
    let opts = AssemblyOptions::default();

    // Hermiticity of explicitly assembled operators in both gauges.
    let grid = Grid1D::new(101, 0.4).unwrap();
    let matter = Arc::new(build_atom(&AtomModel::new(grid)).unwrap());
    let bath = sample_continuum(0.05, 0.4, 3, 0.06, 1).unwrap();
    let trunc = FockTruncation::TotalExcitation { cutoff: 3 };
    let lg = assemble_length_gauge(matter.clone(), &bath, trunc, &opts).unwrap();
    let vg = assemble_velocity_gauge(matter.clone(), &bath, trunc, &opts).unwrap();
    assert!(lg.explicit_matrix().unwrap().is_symmetric_exact());
    assert!(vg.explicit_matrix().unwrap().is_symmetric_exact());
    let (mdse_op, _) = assemble_m_dse(matter.clone(), &bath, 0.5, 1e-10, 50, &cfg).unwrap();
    assert!(mdse_op.explicit_matrix().unwrap().is_symmetric_exact());

    // Lanczos equals the dense oracle to 1e-10 on randomized small scenarios.
    let mut rng = ChaCha8Rng::seed_from_u64(20260809);
    for case in 0..6 {
        let n = rng.gen_range(40..140);
        let dx = rng.gen_range(0.25..0.5);
        let lam = rng.gen_range(0.0..0.1);
        let w = rng.gen_range(0.05..0.5);
        let cutoff = rng.gen_range(2..10);
        let m = Arc::new(build_atom(&AtomModel::new(Grid1D::new(n, dx).unwrap())).unwrap());
        let b = sample_continuum(w, w, 1, lam, 1).unwrap();
        let op = assemble_length_gauge(m, &b, FockTruncation::PerMode { cutoff }, &opts).unwrap();
        assert!(op.dim() <= 4096, "randomized case stays in oracle range");
        let e_lan = ground_state(&op, &cfg).unwrap().energy;
        let dense = op.to_dense_matrix();
        let e_dense = dense
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(
            (e_lan - e_dense).abs() < 1e-10,
            "case {case}: lanczos {e_lan} vs dense {e_dense}"
        );
    }

    // Zero-field condition, current, and density normalization on an exact
    // multimode ground state.
    let op = assemble_length_gauge(matter.clone(), &bath, trunc, &opts).unwrap();
    let gs = ground_state(&op, &cfg).unwrap();
    for mode in 0..op.n_modes() {
        let r = zero_field_residual(&gs.vector, &op, mode).unwrap();
        assert!(r.abs() < 1e-9, "zero-field residual {r} of mode {mode}");
    }
    let j = mean_current(&gs.vector, &op);
    assert!(j.iter().all(|v| v.abs() < 1e-9), "eigenstate current {j:?}");
    let density = electron_density(&gs.vector, &op);
    assert!((density.integral() - 1.0).abs() < 1e-10);

    // Density-difference pseudometric on three computed densities.
    let fields: Vec<_> = [0.0, 0.04, 0.08]
        .iter()
        .map(|&l| {
            let b = sample_continuum(0.1, 0.1, 1, l, 1).unwrap();
            let op =
                assemble_length_gauge(matter.clone(), &b, FockTruncation::PerMode { cutoff: 16 }, &opts)
                    .unwrap();
            let gs = ground_state(&op, &cfg).unwrap();
            electron_density(&gs.vector, &op)
        })
        .collect();
    let d = |a: usize, b: usize| density_diff(&fields[a], &fields[b]).unwrap();
    assert_eq!(d(0, 1), d(1, 0));
    assert_eq!(d(0, 0), 0.0);
    assert!(d(0, 1) > 0.0 && d(1, 2) > 0.0);
    assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-15);

    // Averaging idempotence and coupling-power conservation.
    let multi = sample_continuum(0.01, 0.5, 40, 0.03, 2).unwrap();
    let ave = average_bath(&multi).unwrap();
    assert_eq!(average_bath(&ave).unwrap().modes(), ave.modes());
    for pol in 0..2 {
        let before = multi.coupling_sq_of_polarization(pol);
        let after = ave.coupling_sq_of_polarization(pol);
        assert!((before - after).abs() <= 4.0 * f64::EPSILON * before);
    }

    // Variational monotonicity along the cutoff ladder.
    let sweep = convergence_sweep(
        |c| {
            assemble_length_gauge(
                matter.clone(),
                &sample_continuum(0.1, 0.1, 1, 0.05, 1).unwrap(),
                FockTruncation::PerMode { cutoff: c },
                &opts,
            )
        },
        &[4, 8, 16, 24],
        &cfg,
    )
    .unwrap();
    assert!(sweep.is_monotone_within(1e-9), "cutoff ladder energies {:?}", sweep.entries);
    assert!(sweep.final_shift() < 1e-8, "tail shift {:.2e}", sweep.final_shift());

    pass("8 (property suites)", "hermiticity, oracle equality, zero-field, pseudometric, averaging, monotonicity");
}

/// Criterion 9: ring symmetry breaking and opposed mean-field deviations.
#[test]
fn criterion_9_ring_symmetry_breaking() {
    let cfg = shipped_config("ring-fig9");
    assert_eq!(cfg.sweep.lambda_x, Some(0.05));
    assert_eq!(cfg.sweep.lambda_y, Some(0.01));
    let out = run_scenario(&cfg).expect("ring scenario runs");

    let labels = out.table.row_labels.as_ref().unwrap();
    let aniso_col = out
        .table
        .columns
        .iter()
        .position(|c| c == "anisotropy")
        .unwrap();
    let exact_row = labels.iter().position(|l| l == "exact").unwrap();
    let anisotropy = out.table.rows[exact_row][aniso_col];
    let baseline = out.extras["baseline"]["anisotropy"].as_f64().expect("baseline run");
    assert!(
        anisotropy > 10.0 * baseline,
        "anisotropy {anisotropy:.3e} vs 10x baseline {baseline:.3e}"
    );

    let corr = out.extras["deviation_correlations"].as_object().unwrap();
    let c_ave = corr["m_dse_vs_nrqed_ave"].as_f64().unwrap();
    let c_low = corr["m_dse_vs_nrqed_low"].as_f64().unwrap();
    assert!(c_ave < 0.0, "mean-field deviation correlates with ave: {c_ave}");
    assert!(c_low < 0.0, "mean-field deviation correlates with low: {c_low}");
    pass(
        "9 (ring symmetry breaking)",
        &format!("anisotropy ratio {:.1}, correlations {c_ave:.2}/{c_low:.2}", anisotropy / baseline),
    );
}
