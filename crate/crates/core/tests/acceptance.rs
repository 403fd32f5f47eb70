//! Acceptance criteria, one line each. Run with `--nocapture` to see the table.
//!
//! Everything runs inside one test on a single worker thread so that the
//! runtime budgets are measured without interference.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jcladder::checks::{first_rung_gap, nheh_lindblad_gap, random_first_rung_state, rk4_order_ratio, trajectory_invariants};
use jcladder::integrator::{IntegrationSpec, Part, SolverTag};
use jcladder::lindblad::evolve_lindblad;
use jcladder::nheh::{evolve_nheh_with, NhehOptions, RungLayout};
use jcladder::nhqm::{evolve_nh_schrodinger, evolve_nhqm_with, first_rung_rhs, first_rung_rhs_extra_factor, NhqmOptions};
use jcladder::quantum::{BasisIndex, DensityMatrix, Frame, SystemParams};
use jcladder::scenarios::{
    emit_outputs, fig1_timeseries_elements, run_fig1, run_fig2, with_threads, Fig1Result, ResultTable, ScenarioConfig,
    Status, Sweep, TrackedElement,
};
use jcladder::steady_state::{default_seeds, first_rung_support, nhqm_fixed_points_with, FixedPointSearch};

struct Line {
    id: &'static str,
    text: String,
    passed: bool,
    /// Counted towards the verdict of the test.
    asserted: bool,
}

#[derive(Default)]
struct Table {
    lines: Vec<Line>,
}

impl Table {
    fn check(&mut self, id: &'static str, passed: bool, text: String) {
        self.lines.push(Line { id, text, passed, asserted: true });
    }

    fn report(&mut self, id: &'static str, passed: bool, text: String) {
        self.lines.push(Line { id, text, passed, asserted: false });
    }

    fn print_and_verdict(&self) {
        let mut out = String::new();
        for l in &self.lines {
            let mark = if l.passed { "PASS" } else { "FAIL" };
            let tag = if l.asserted { "" } else { " (reported, not asserted)" };
            writeln!(out, "{mark} [{}] {}{tag}", l.id, l.text).unwrap();
        }
        println!("{out}");
        let failed: Vec<&str> = self.lines.iter().filter(|l| l.asserted && !l.passed).map(|l| l.id).collect();
        assert!(failed.is_empty(), "failed criteria: {failed:?}\n{out}");
    }
}

fn el(row: BasisIndex, col: BasisIndex, part: Part) -> TrackedElement {
    TrackedElement::new(row, col, part)
}

/// Correlations of `other` vs Lindblad at `alpha`, defined ones only.
fn defined(r: &Fig1Result, alpha: f64, other: SolverTag) -> Vec<(String, f64)> {
    r.rows
        .iter()
        .filter(|row| (row.alpha - alpha).abs() < 1e-12 && row.pair.0 == other)
        .filter_map(|row| row.correlation.map(|c| (row.element.label(), c)))
        .collect()
}

fn criteria_1_2(t: &mut Table) {
    let cfg = ScenarioConfig::fig1_default();
    let start = Instant::now();
    let r = run_fig1(&cfg).expect("fig1 sweep");
    let secs = start.elapsed().as_secs_f64();

    let failed: Vec<_> = r.rows.iter().filter(|row| matches!(row.status, Status::Failed(_))).collect();
    let nheh: Vec<f64> = r.rows.iter().filter(|row| row.pair.0 == SolverTag::Nheh).filter_map(|row| row.correlation).collect();
    let undefined = r.rows.iter().filter(|row| row.pair.0 == SolverTag::Nheh && row.status == Status::Undefined).count();
    let worst = nheh.iter().fold(0.0f64, |m, c| m.max((1.0 - c).abs()));
    t.check(
        "1",
        failed.is_empty() && worst < 1e-6,
        format!(
            "fig1 NHEH vs Lindblad over 101 alpha: max |1 - r| = {worst:.3e} (need < 1e-6) over {} defined correlations, {undefined} undefined (constant series), {} failed",
            nheh.len(),
            failed.len()
        ),
    );
    t.check("1", secs < 300.0, format!("fig1 default sweep single-threaded: {secs:.1} s (need < 300 s)"));

    let g1 = BasisIndex::g(1);
    let r0 = r.correlation(0.0, el(g1, g1, Part::Real), SolverTag::Nhqm).and_then(|row| row.correlation);
    t.check(
        "2",
        r0.is_some_and(|c| c < 0.999),
        format!("NHQM vs Lindblad G1G1 at alpha = 0: r = {r0:?} (need < 0.999)"),
    );

    // every element defined at all three alphas must increase towards 1
    let alphas = [0.9, 0.95, 0.99];
    let series: Vec<Vec<(String, f64)>> = alphas.iter().map(|&a| defined(&r, a, SolverTag::Nhqm)).collect();
    let mut text = String::new();
    let mut monotone = !series[0].is_empty();
    for (label, c0) in &series[0] {
        let vals: Vec<f64> = std::iter::once(*c0)
            .chain(series[1..].iter().filter_map(|s| s.iter().find(|(l, _)| l == label).map(|x| x.1)))
            .collect();
        if vals.len() != alphas.len() {
            continue;
        }
        let ok = vals.windows(2).all(|w| w[0] < w[1]) && vals.iter().all(|&v| v <= 1.0);
        monotone &= ok;
        write!(text, " {label} [{:.6}, {:.6}, {:.6}]", vals[0], vals[1], vals[2]).unwrap();
    }
    t.check("2", monotone, format!("NHQM correlations strictly increase over alpha = 0.9, 0.95, 0.99:{text}"));

    let (x0, g0) = (BasisIndex::x(0), BasisIndex::g(0));
    let mut parts = String::new();
    for (row, col) in [(x0, g1), (g0, g1)] {
        for part in [Part::Real, Part::Imag, Part::Abs] {
            let c = r.correlation(0.0, el(row, col, part), SolverTag::Nhqm).unwrap();
            let v = c.correlation.map_or_else(|| c.status.to_string(), |v| format!("{v:.4}"));
            write!(parts, " {}={v}", c.element.label()).unwrap();
        }
    }
    t.report("2", true, format!("NHQM coherence correlations at alpha = 0 by part:{parts}"));
}

fn grid_convergence(t: &mut Table) {
    let mut cfg = ScenarioConfig::fig1_default();
    cfg.sweep = Some(Sweep::AlphaGrid(vec![0.0, 0.5, 0.9]));
    let coarse = run_fig1(&cfg).expect("coarse grid");
    cfg.integration.samples = 2 * cfg.integration.samples - 1;
    let fine = run_fig1(&cfg).expect("fine grid");
    for other in [SolverTag::Nheh, SolverTag::Nhqm] {
        let mut worst = 0.0f64;
        for (a, b) in coarse.rows.iter().zip(&fine.rows).filter(|(a, _)| a.pair.0 == other) {
            if let (Some(x), Some(y)) = (a.correlation, b.correlation) {
                worst = worst.max((x - y).abs());
            }
        }
        let text = format!("{other} vs Lindblad correlation change on doubling the sample density: {worst:.3e} (need < 1e-8)");
        match other {
            SolverTag::Nheh => t.check("grid", worst < 1e-8, text),
            _ => t.report("grid", worst < 1e-8, text + "; sampling error of the Pearson average at 2001 samples"),
        }
    }
}

fn criterion_3(t: &mut Table) {
    let p = SystemParams::resonant_benchmark();
    let rho0 = DensityMatrix::alpha_mixture(0.0, p.n_max_photons).unwrap();
    let cfg = ScenarioConfig::fig1_default();
    let spec = cfg.integration.spec();
    let lind = evolve_lindblad(&p, &rho0, &spec).unwrap();
    let nheh = evolve_nheh_with(&p, &rho0, &spec, &RungLayout::for_cutoff(1), &NhehOptions::for_params(&p)).unwrap();
    let nhqm = evolve_nhqm_with(&p, &rho0, &spec, &NhqmOptions::default()).unwrap();
    let (mut nh, mut q) = (0.0f64, 0.0f64);
    for e in fig1_timeseries_elements() {
        let l = lind.series(e.row, e.col, e.part);
        for (a, b) in nheh.series(e.row, e.col, e.part).iter().zip(&l) {
            nh = nh.max((a - b).abs());
        }
        for (a, b) in nhqm.series(e.row, e.col, e.part).iter().zip(&l) {
            q = q.max((a - b).abs());
        }
    }
    t.check("3", nh < 1e-6, format!("alpha = 0 time series, NHEH vs Lindblad over [0, 1000]: max |diff| = {nh:.3e} (need < 1e-6)"));
    t.check("3", q > 1e-2, format!("alpha = 0 time series, NHQM vs Lindblad: max |diff| = {q:.3e} (need > 1e-2)"));
}

fn criterion_4(t: &mut Table) {
    let cfg = ScenarioConfig::fig2_default();
    let start = Instant::now();
    let r = run_fig2(&cfg).expect("fig2 sweep");
    let secs = start.elapsed().as_secs_f64();
    let pumps = cfg.sweep.as_ref().unwrap().values().to_vec();

    let mut nheh_worst = 0.0f64;
    let mut vac_worst = 0.0f64;
    let mut match_worst = 0.0f64;
    let mut all_present = true;
    let mut nhqm_f = Vec::new();
    for &p in &pumps {
        let (Some(nh), Some(q), Some(l)) = (r.row(p, SolverTag::Nheh), r.row(p, SolverTag::Nhqm), r.row(p, SolverTag::Lindblad)) else {
            all_present = false;
            continue;
        };
        match (nh.fidelity, q.fidelity, q.distance_to_vacuum, l.vacuum_population) {
            (Some(fnh), Some(fq), Some(dv), Some(pg0)) => {
                nheh_worst = nheh_worst.max((fnh - 1.0).abs());
                vac_worst = vac_worst.max(dv);
                match_worst = match_worst.max((fq - pg0).abs());
                nhqm_f.push(fq);
            }
            _ => all_present = false,
        }
    }
    t.check(
        "4",
        all_present && nheh_worst < 1e-6,
        format!("fig2 NHEH fidelity over {} pumps in [0, 0.09]: max |F - 1| = {nheh_worst:.3e} (need < 1e-6)", pumps.len()),
    );
    t.check("4", all_present && vac_worst < 1e-8, format!("NHQM steady state vs |G0><G0|: max entry diff = {vac_worst:.3e} (need < 1e-8)"));
    t.check(
        "4",
        all_present && match_worst < 1e-8,
        format!("NHQM fidelity vs <G0|rho_L|G0>: max diff = {match_worst:.3e} (need < 1e-8)"),
    );
    let decreasing = nhqm_f.len() == pumps.len() && nhqm_f.windows(2).all(|w| w[1] < w[0]);
    let listed: Vec<String> = nhqm_f.iter().map(|f| format!("{f:.4}")).collect();
    t.check("4", decreasing, format!("NHQM fidelity strictly decreasing in P: [{}]", listed.join(", ")));
    let f0 = nhqm_f.first().copied().unwrap_or(f64::NAN);
    t.check("4", (f0 - 1.0).abs() < 1e-8, format!("NHQM fidelity at P = 0: |F - 1| = {:.3e} (need < 1e-8)", (f0 - 1.0).abs()));
    t.check("4", secs < 120.0, format!("fig2 default sweep single-threaded: {secs:.1} s (need < 120 s)"));
}

fn criterion_5(t: &mut Table) {
    let p = SystemParams::resonant_benchmark().with_pump(0.05);
    let opts = FixedPointSearch { support: Some(first_rung_support()), ..Default::default() };
    let r = nhqm_fixed_points_with(&p, &default_seeds(3, 64, opts.rng_seed), &opts).expect("first-rung search");
    t.check(
        "5",
        r.candidates.len() > 1 && r.physical_count() == 1 && r.selected.is_some(),
        format!(
            "pumped NHQM on {{G0, G1, X0}} at P = 0.05: {} fixed points, {} physical (need > 1 and exactly 1), selected G0G0 = {:.12}",
            r.candidates.len(),
            r.physical_count(),
            r.selected.map_or(f64::NAN, |k| r.candidates[k].rho[(0, 0)].re)
        ),
    );
    t.report(
        "5",
        true,
        format!(
            "isolated rank-one fixed points on {{G0, G1, X0}}: {}; Hermitian unit-trace PSD candidates without the stability check: {}",
            r.rank_one_count(),
            r.density_like_count()
        ),
    );
    for n in 1..=3 {
        let pn = p.with_cutoff(n);
        let d = pn.dim();
        let opts = FixedPointSearch::default();
        let r = nhqm_fixed_points_with(&pn, &default_seeds(d, 64, opts.rng_seed), &opts).expect("cutoff search");
        t.report(
            "5",
            r.physical_count() == 1,
            format!(
                "cutoff {n}: {} rank-one fixed points, {} candidates, {} physical",
                r.rank_one_count(),
                r.candidates.len(),
                r.physical_count()
            ),
        );
    }
}

fn criterion_6(t: &mut Table) {
    let p = SystemParams::resonant_benchmark().with_pump(0.05).with_cutoff(3);
    let a = nheh_lindblad_gap(&p, 1000, 11).unwrap();
    t.check("6a", a < 1e-13, format!("nheh_rhs vs lindblad_rhs on 1000 random states: max |diff| = {a:.3e} (need < 1e-13)"));

    let b = first_rung_gap(&SystemParams::resonant_benchmark(), 1000, 12).unwrap();
    t.check("6b", b < 1e-12, format!("first_rung_rhs vs restricted nhqm_rhs on 1000 random states: max |diff| = {b:.3e} (need < 1e-12)"));

    // the alternative emitter-population form with an extra ρ_X0X0 factor
    let bench = SystemParams::resonant_benchmark();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut gap = 0.0f64;
    for _ in 0..1000 {
        let (_, fr) = random_first_rung_state(&mut rng);
        let (u, v) = (first_rung_rhs(&bench, &fr).unwrap(), first_rung_rhs_extra_factor(&bench, &fr).unwrap());
        gap = gap.max(u.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).norm())));
    }
    t.report("6b", gap > 1e-6, format!("extra-factor form of the X0X0 line vs the derived form: max |diff| = {gap:.3e}; the derived form is used"));

    let spec = IntegrationSpec::adaptive(100.0, 201);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for (pump, n, include_pump) in [(0.0, 1, false), (0.0, 2, false), (0.05, 2, true), (0.05, 3, false)] {
        let p = SystemParams::resonant_benchmark().with_pump(pump).with_cutoff(n);
        for _ in 0..3 {
            let psi = DensityMatrix::random_pure_vector(&mut rng, n);
            let mut opts = NhqmOptions { include_pump, ..Default::default() };
            opts.evolve.check_cutoff = false;
            let q = evolve_nhqm_with(&p, &DensityMatrix::pure(&psi).unwrap(), &spec, &opts).unwrap();
            let s = evolve_nh_schrodinger(&p, &psi, &spec, include_pump, Frame::Rotating).unwrap();
            for (x, y) in q.states.iter().zip(&s) {
                worst = worst.max(jcladder::linalg::max_abs_diff(x.as_matrix(), y.as_matrix()));
            }
        }
    }
    t.check("6c", worst < 1e-7, format!("NHQM vs normalised Schrodinger flow, 12 pure states over [0, 100]: max |diff| = {worst:.3e} (need < 1e-7)"));
}

fn compare_dirs(a: &Path, b: &Path, names: &[&str]) -> Result<(), String> {
    for n in names {
        let x = std::fs::read(a.join(n)).map_err(|e| format!("{n}: {e}"))?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{n}: {e}"))?;
        if x != y {
            return Err(format!("{n} differs"));
        }
    }
    Ok(())
}

fn criterion_7(t: &mut Table) {
    let mut drift = 0.0f64;
    let mut herm = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let spec = IntegrationSpec::adaptive(1000.0, 2001);
    let mut runs = 0;
    for (pump, n) in [(0.0, 1), (0.02, 24), (0.05, 48)] {
        let p = SystemParams::resonant_benchmark().with_pump(pump).with_cutoff(n);
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for rho0 in [DensityMatrix::alpha_mixture(alpha, n).unwrap(), DensityMatrix::alpha_superposition(alpha, n).unwrap()] {
                let (d, h, m) = trajectory_invariants(&evolve_lindblad(&p, &rho0, &spec).unwrap().states);
                drift = drift.max(d);
                herm = herm.max(h);
                min_eig = min_eig.min(m);
                runs += 1;
            }
        }
    }
    t.check("7", drift < 1e-9, format!("Lindblad trace drift over {runs} trajectories: {drift:.3e} (need < 1e-9)"));
    t.check("7", herm < 1e-10, format!("Lindblad hermiticity error: {herm:.3e} (need < 1e-10)"));
    t.check("7", min_eig > -1e-8, format!("Lindblad min eigenvalue: {min_eig:.3e} (need > -1e-8)"));

    let mut nheh_drift = 0.0f64;
    for (pump, n) in [(0.0, 3), (0.03, 24)] {
        let p = SystemParams::resonant_benchmark().with_pump(pump).with_cutoff(n);
        let rho0 = DensityMatrix::alpha_superposition(0.3, n).unwrap();
        let tr = evolve_nheh_with(&p, &rho0, &spec, &RungLayout::for_cutoff(n), &NhehOptions::for_params(&p)).unwrap();
        nheh_drift = nheh_drift.max(trajectory_invariants(&tr.states).0);
    }
    t.check("7", nheh_drift < 1e-9, format!("NHEH global trace drift: {nheh_drift:.3e} (need < 1e-9)"));

    let ratio = rk4_order_ratio().unwrap();
    t.check("7", (12.0..=20.0).contains(&ratio), format!("RK4 error ratio on halving the step: {ratio:.3} (need in [12, 20])"));

    let checks = jcladder::checks::run_checks().unwrap();
    let props: Vec<_> = checks.iter().filter(|c| c.name.starts_with("fidelity") || c.name.starts_with("pearson")).collect();
    let worst: Vec<String> = props.iter().map(|c| format!("{} {:.1e}", c.name, c.value)).collect();
    t.check(
        "7",
        props.iter().all(|c| c.passed),
        format!("fidelity and pearson properties on fixed draws: {}; randomised versions in tests/properties.rs", worst.join(", ")),
    );

    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let mut results = Vec::new();
    for (kind, names) in [
        ("fig1_small", vec!["fig1_correlations.csv", "fig1_timeseries_alpha0.csv"]),
        ("fig2_small", vec!["fig2_fidelity.csv", "fig2_states.csv"]),
    ] {
        let cfg = ScenarioConfig::load(&root.join(format!("configs/{kind}.toml"))).unwrap();
        for rerun in ["a", "b"] {
            let dir = tmp.path().join(kind).join(rerun);
            let res = if kind == "fig1_small" {
                emit_outputs(&ResultTable::Fig1(&run_fig1(&cfg).unwrap()), &cfg, &dir, 0.0)
            } else {
                emit_outputs(&ResultTable::Fig2(&run_fig2(&cfg).unwrap()), &cfg, &dir, 0.0)
            };
            res.unwrap();
        }
        let base = tmp.path().join(kind);
        results.push(compare_dirs(&base.join("a"), &base.join("b"), &names).map_err(|e| format!("rerun: {e}")));
        results.push(compare_dirs(&base.join("a"), &root.join("tests/golden").join(kind), &names).map_err(|e| format!("golden: {e}")));
    }
    let errors: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
    t.check(
        "7",
        errors.is_empty(),
        format!("golden CSVs (5 alpha, 5 P) byte-identical across reruns and with tests/golden: {}", if errors.is_empty() { "identical".to_string() } else { errors.join("; ") }),
    );
}

#[test]
fn acceptance_criteria() {
    let mut t = Table::default();
    with_threads(1, || {
        criteria_1_2(&mut t);
        grid_convergence(&mut t);
        criterion_3(&mut t);
        criterion_4(&mut t);
        criterion_5(&mut t);
        criterion_6(&mut t);
        criterion_7(&mut t);
    });
    t.print_and_verdict();
}
