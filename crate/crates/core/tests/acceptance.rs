//! Acceptance suite. Prints one PASS/FAIL line per criterion (INFO lines are not scored).
//!
//! `ACSURF_ACCEPTANCE_ONLY=1,5` restricts the run to the listed criterion groups (7 is the
//! Example 3 run);
//! `ACSURF_ACCEPTANCE_STRICT=1` turns any FAIL into a nonzero exit status.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use acsurf::assembly::{OperatorBlocks, StepParams};
use acsurf::band::{classify, extract_surface, NarrowBand};
use acsurf::bench::eoc::eoc;
use acsurf::bench::example1::{self, Example1};
use acsurf::bench::harness::{
    example1_ladder, run_example1_observed, run_example2_observed, run_example3_observed,
    EXAMPLE3_SNAPSHOTS,
};
use acsurf::bench::norms::ExactSolution;
use acsurf::bench::ode::ode_reference;
use acsurf::geometry::{DiscreteLevelSet, LevelSetGeometry, Plane, StationarySphere};
use acsurf::mesh::{Aabb, BackgroundMesh};
use acsurf::potential::DoubleWell;
use acsurf::solver::condition_estimate;
use acsurf::timestepper::{beta_policy, BetaMode, SchemeParams, Simulation, StepView};
use acsurf::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

struct Tally {
    passed: usize,
    failed: usize,
}

impl Tally {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!(
            "{} [{id}] {what}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }

    fn info(&self, id: &str, what: &str, detail: String) {
        println!("INFO [{id}] {what}: {detail}");
    }
}

/// Per-step checks shared by every benchmark run: `vᵀAv > 0` for random `v` on each
/// sampled step matrix, and explicit band nesting against the previous step.
struct StepAudit {
    rng: ChaCha8Rng,
    every: usize,
    matrices: usize,
    nonpositive: usize,
    min_rayleigh: f64,
    steps: usize,
    nesting_failures: usize,
    prev_band: Option<NarrowBand>,
}

impl StepAudit {
    fn new(seed: u64, every: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            every,
            matrices: 0,
            nonpositive: 0,
            min_rayleigh: f64::INFINITY,
            steps: 0,
            nesting_failures: 0,
            prev_band: None,
        }
    }

    fn observe(&mut self, view: &StepView<'_>) -> acsurf::Result<()> {
        let band = &view.state.band;
        if let Some(prev) = &self.prev_band {
            self.steps += 1;
            if band.nesting_violation(prev).is_some() {
                self.nesting_failures += 1;
            }
        }
        if view.state.step.is_multiple_of(self.every) {
            let a = view.blocks.system_matrix(&view.step_params)?;
            for _ in 0..100 {
                let v: Vec<f64> = (0..a.dim())
                    .map(|_| self.rng.gen_range(-1.0..1.0))
                    .collect();
                let q = a.bilinear(&v, &v) / v.iter().map(|x| x * x).sum::<f64>();
                self.min_rayleigh = self.min_rayleigh.min(q);
                if !(q > 0.0) {
                    self.nonpositive += 1;
                }
            }
            self.matrices += 1;
        }
        self.prev_band = Some(band.clone());
        Ok(())
    }

    fn merge(&mut self, other: &StepAudit) {
        self.matrices += other.matrices;
        self.nonpositive += other.nonpositive;
        self.min_rayleigh = self.min_rayleigh.min(other.min_rayleigh);
        self.steps += other.steps;
        self.nesting_failures += other.nesting_failures;
    }
}

fn selected(group: u32) -> bool {
    match std::env::var("ACSURF_ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').any(|s| s.trim() == group.to_string()),
        Err(_) => true,
    }
}

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(name)
}

fn main() {
    let mut tally = Tally {
        passed: 0,
        failed: 0,
    };
    let mut audit = StepAudit::new(11, 1);
    let mut unforced_ratios: Vec<(String, f64)> = Vec::new();
    let start = Instant::now();

    if selected(1) {
        criterion1(&mut tally, &mut audit);
    }
    if selected(2) {
        criterion2(&mut tally, &mut audit, &mut unforced_ratios);
    }
    if selected(4) {
        criterion4(&mut tally);
    }
    if selected(5) {
        criterion5(&mut tally);
    }
    if selected(6) {
        criterion6(&mut tally, &mut audit, &mut unforced_ratios);
    }
    if selected(7) {
        example3(&mut tally, &mut unforced_ratios);
    }

    if !unforced_ratios.is_empty() {
        let worst = unforced_ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        let list: Vec<String> = unforced_ratios
            .iter()
            .map(|(n, r)| format!("{n} {r:.3}"))
            .collect();
        tally.check(
            "3",
            "stability functional max E_n/E_1 <= 10 on unforced runs",
            worst <= 10.0 && worst.is_finite(),
            list.join(", "),
        );
    }
    if audit.matrices > 0 {
        tally.check(
            "4a",
            "v^T A v > 0 for 100 random v on step matrices of benchmark runs",
            audit.nonpositive == 0,
            format!(
                "{} matrices, {} nonpositive samples, min Rayleigh quotient {:.3e}",
                audit.matrices, audit.nonpositive, audit.min_rayleigh
            ),
        );
    }
    if audit.steps > 0 {
        tally.check(
            "6b",
            "band nesting holds on every step of every benchmark run",
            audit.nesting_failures == 0,
            format!(
                "{} steps checked, {} violations",
                audit.steps, audit.nesting_failures
            ),
        );
    }

    println!(
        "acceptance: {} passed, {} failed ({:.0} s)",
        tally.passed,
        tally.failed,
        start.elapsed().as_secs_f64()
    );
    if tally.failed > 0 && std::env::var_os("ACSURF_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}

fn criterion1(tally: &mut Tally, audit: &mut StepAudit) {
    let ladder = match example1_ladder(3, |_| {}) {
        Ok(l) => l,
        Err(e) => {
            tally.check("1", "Example 1 ladder", false, format!("run failed: {e}"));
            return;
        }
    };
    for line in ladder.l2h1.to_csv().lines() {
        println!("       L2(H1)  {line}");
    }
    for line in ladder.linf_l2.to_csv().lines() {
        println!("       Linf(L2) {line}");
    }
    let ex_x = ladder.l2h1.eoc_x()[2].unwrap_or(f64::NAN);
    tally.check(
        "1a",
        "L2(H1) eoc_x at finest dt, h 1/4 -> 1/8, in [0.8, 1.2]",
        (0.8..=1.2).contains(&ex_x),
        format!("{ex_x:.4}"),
    );
    let ex_xtt = ladder.linf_l2.eoc_xtt()[2].unwrap_or(f64::NAN);
    tally.check(
        "1b",
        "Linf(L2) diagonal eoc_xtt, (1/4, T/256) -> (1/8, T/1024), in [1.7, 2.2]",
        (1.7..=2.2).contains(&ex_xtt),
        format!("{ex_xtt:.4} (all diagonal: {:?})", ladder.linf_l2.eoc_xtt()),
    );
    let within2 = |v: f64, r: f64| v.is_finite() && v <= 2.0 * r && v >= 0.5 * r;
    for (id, table, i, j, reference, label) in [
        (
            "1c",
            &ladder.l2h1,
            2,
            2,
            0.065671,
            "L2(H1) at (1/8, T/1024)",
        ),
        (
            "1d",
            &ladder.linf_l2,
            2,
            2,
            0.0607511,
            "Linf(L2) at (1/8, T/1024)",
        ),
        ("1e", &ladder.l2h1, 1, 1, 0.192922, "L2(H1) at (1/4, T/256)"),
        (
            "1f",
            &ladder.linf_l2,
            1,
            1,
            0.240204,
            "Linf(L2) at (1/4, T/256)",
        ),
    ] {
        let v = table.get(i, j).unwrap_or(f64::NAN);
        tally.check(
            id,
            &format!("{label} within x2 of {reference}"),
            within2(v, reference),
            format!("{v:.6} (ratio {:.2})", v / reference),
        );
    }

    // Functional growth on the forced problem: the forcing is outside the stability
    // estimate's hypotheses, so this is reported only.
    let ratios: Vec<String> = ladder
        .runs
        .iter()
        .map(|r| {
            format!(
                "h={} N={}: {:.2}",
                r.h,
                (r.report.final_time / r.dt).round(),
                r.report.max_functional_ratio().unwrap_or(f64::NAN)
            )
        })
        .collect();
    tally.info("3", "forced Example 1 max E_n/E_1", ratios.join(", "));

    // Coercivity and nesting audit on the finest ladder run.
    let mut a = StepAudit::new(12, 1);
    match run_example1_observed(0.125, 1024, BetaMode::Experiment, |v| a.observe(v)) {
        Ok(_) => audit.merge(&a),
        Err(e) => tally.check(
            "1",
            "Example 1 audited run",
            false,
            format!("run failed: {e}"),
        ),
    }
}

fn criterion2(tally: &mut Tally, audit: &mut StepAudit, ratios: &mut Vec<(String, f64)>) {
    let mut errors = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let mut a = StepAudit::new(20 + (eps * 10.0) as u64, 16);
        let t0 = Instant::now();
        let run = match run_example2_observed(eps, 0.0625, 4096, 1.5, 0.75, |v| a.observe(v)) {
            Ok(r) => r,
            Err(e) => {
                tally.check(
                    "2",
                    &format!("Example 2 eps={eps}"),
                    false,
                    format!("run failed: {e}"),
                );
                return;
            }
        };
        audit.merge(&a);
        let _ = std::fs::create_dir_all(out_dir("example2"));
        let _ = std::fs::write(
            out_dir("example2").join(format!("radius_eps{eps}.csv")),
            run.radius_csv(),
        );
        let ode_jump = run
            .reference
            .r
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        tally.info(
            "2",
            &format!("Example 2 eps={eps}"),
            format!(
                "r_h(T)={:.6} r_ode(T)={:.6} |error|={:.4e} max jump {:.2e} (ODE {:.2e}) in {:.0} s",
                run.r_fem.last().unwrap(),
                run.reference.r.last().unwrap(),
                run.final_error,
                run.max_jump,
                ode_jump,
                t0.elapsed().as_secs_f64()
            ),
        );
        tally.check(
            "2c",
            &format!("radius trajectory continuous at eps={eps} (jump <= 5 dt max|r_t|)"),
            run.max_jump <= 5.0 * ode_jump,
            format!("{:.3e} <= {:.3e}", run.max_jump, 5.0 * ode_jump),
        );
        ratios.push((
            format!("Example2(eps={eps})"),
            run.report.max_functional_ratio().unwrap_or(f64::NAN),
        ));
        errors.push((eps, run.final_error));
    }
    let e02 = errors[1].1;
    tally.check(
        "2a",
        "|r_h(T) - r_ODE(T)| <= 0.03 at eps=0.2, h=1/16, dt=T/4096",
        e02 <= 0.03,
        format!("{e02:.4e}"),
    );
    let monotone = errors.windows(2).all(|w| w[1].1 < w[0].1);
    tally.check(
        "2b",
        "radius error decreases monotonically over eps 0.4, 0.2, 0.1",
        monotone,
        errors
            .iter()
            .map(|(e, v)| format!("eps={e}: {v:.4e}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
}

/// Step matrix of a resting surface with one time step of the Example 1 parameters.
fn resting_step_matrix(
    geo: &dyn LevelSetGeometry,
    mesh: &BackgroundMesh,
) -> acsurf::Result<acsurf::solver::CsrMatrix> {
    let dls = DiscreteLevelSet::interpolate(geo, mesh, 0, 0.0);
    let band = classify(&dls, mesh, 0.0)?;
    let surf = extract_surface(&dls, mesh, &band)?;
    let blocks = OperatorBlocks::assemble(mesh, &dls, &band, &surf, geo, 0.0)?;
    let pot = DoubleWell::standard(2.0, 0.1)?;
    let params = StepParams {
        dt: 0.1 / 256.0,
        beta: beta_policy(BetaMode::Experiment, 0.1, blocks.xi, pot.lipschitz()),
        rho: 1.0 / mesh.h(),
    };
    blocks.system_matrix(&params)
}

fn criterion4(tally: &mut Tally) {
    let h = 0.125;
    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(1.5), h).unwrap();
    let offsets = [1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6];
    let normal = Vec3::new(1.0, 2.0, 3.0).normalize();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut nonpositive = 0;
    let mut matrices = 0;
    for (label, geos) in [
        (
            "plane",
            offsets
                .iter()
                .map(|&s| {
                    Box::new(Plane {
                        normal,
                        offset: 0.1 + s * h,
                    }) as Box<dyn LevelSetGeometry>
                })
                .collect::<Vec<_>>(),
        ),
        (
            "sphere",
            offsets
                .iter()
                .map(|&s| {
                    Box::new(StationarySphere {
                        center: Vec3::new(s * h, 0.0, 0.0),
                        radius: 1.0,
                    }) as Box<dyn LevelSetGeometry>
                })
                .collect(),
        ),
    ] {
        let mut conds = Vec::new();
        for geo in &geos {
            let a = match resting_step_matrix(geo.as_ref(), &mesh) {
                Ok(a) => a,
                Err(e) => {
                    tally.check("4b", label, false, format!("assembly failed: {e}"));
                    return;
                }
            };
            for _ in 0..100 {
                let v: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if !(a.bilinear(&v, &v) > 0.0) {
                    nonpositive += 1;
                }
            }
            matrices += 1;
            conds.push(condition_estimate(&a).unwrap_or(f64::NAN));
        }
        let (lo, hi) = conds
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, u), &c| (l.min(c), u.max(c)));
        tally.check(
            "4b",
            &format!("condition estimate varies < x4 over 5 {label} cut offsets"),
            hi / lo < 4.0,
            format!(
                "ratio {:.3}; {}",
                hi / lo,
                conds
                    .iter()
                    .map(|c| format!("{c:.3e}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        );
    }
    tally.check(
        "4a",
        "v^T A v > 0 for 100 random v on the cut-offset matrices",
        nonpositive == 0,
        format!("{matrices} matrices, {nonpositive} nonpositive samples"),
    );
}

/// Forcing from finite differences of the exact solution: central material derivative
/// along `w`, and the surface Laplacian as the ambient Laplacian of the radially constant
/// extension on the unit sphere.
fn forcing_by_differences(ex: &Example1, x: &Vec3, t: f64) -> f64 {
    let w = ex.geo.velocity;
    let tau = 1e-5;
    let udot =
        (ex.value(&(x + w * tau), t + tau) - ex.value(&(x - w * tau), t - tau)) / (2.0 * tau);
    let eta = 1e-3;
    let u = ex.value(x, t);
    let mut lap = 0.0;
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = eta;
        lap += (ex.value(&(x + e), t) + ex.value(&(x - e), t) - 2.0 * u) / (eta * eta);
    }
    let eps2 = example1::EPS * example1::EPS;
    udot - lap + (u * u * u - u) / eps2
}

fn criterion5(tally: &mut Tally) {
    let ex = Example1::new(example1::EPS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.gen_range(0.0..=example1::FINAL_TIME);
        let d = loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                break v / n;
            }
        };
        let x = ex.geo.center(t) + d;
        let g = ex.forcing(&x, t);
        let fd = forcing_by_differences(&ex, &x, t);
        worst = worst.max((g - fd).abs() / g.abs().max(1.0));
    }
    tally.check(
        "5a",
        "Example 1 forcing vs finite-difference oracle at 100 random points, <= 1e-6 relative",
        worst <= 1e-6,
        format!("max relative difference {worst:.3e}"),
    );

    let times: Vec<f64> = (0..=120).map(|i| i as f64 * 1e-3).collect();
    let r0 = 0.5;
    let max_err = match ode_reference(r0, |_| 1.0, |_| 0.0, &times, 1e-12) {
        Ok(r) => times
            .iter()
            .zip(&r.r)
            .map(|(t, v)| (v - (1.0 - (1.0 - r0 * r0) * (2.0 * t).exp()).sqrt()).abs())
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    tally.check(
        "5b",
        "ODE reference vs closed form for constant R, <= 1e-8",
        max_err <= 1e-8,
        format!("max error {max_err:.3e}"),
    );

    let sphere = StationarySphere {
        center: Vec3::new(0.0123, -0.0456, 0.0789),
        radius: 1.0,
    };
    let mut errs = Vec::new();
    for h in [0.5, 0.25, 0.125, 0.0625] {
        let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(1.5), h).unwrap();
        let dls = DiscreteLevelSet::interpolate(&sphere, &mesh, 0, 0.0);
        let area = classify(&dls, &mesh, 0.0)
            .and_then(|b| extract_surface(&dls, &mesh, &b))
            .map(|s| s.area())
            .unwrap_or(f64::NAN);
        errs.push((area - 4.0 * PI).abs());
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| eoc(w[0], w[1])).collect();
    let last = *orders.last().unwrap();
    tally.check(
        "5c",
        "surface area converges at order 2 under h-halving (finest pair in [1.8, 2.2])",
        (1.8..=2.2).contains(&last),
        format!(
            "errors {}; orders {}",
            errs.iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(" "),
            orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    );
}

fn criterion6(tally: &mut Tally, audit: &mut StepAudit, ratios: &mut Vec<(String, f64)>) {
    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(1.5), 0.125).unwrap();
    let sphere = StationarySphere {
        center: Vec3::new(0.01, 0.02, -0.03),
        radius: 1.0,
    };
    for value in [1.0, -1.0] {
        let params = SchemeParams::new(0.001, 0.1, 0.1);
        let mut drift: f64 = 0.0;
        let mut steps = 0;
        let mut a = StepAudit::new(61, 10);
        let result =
            Simulation::new(&mesh, &sphere, params, &move |_, _| value, None).and_then(|sim| {
                sim.run(|view| {
                    steps = view.state.step;
                    drift = view
                        .state
                        .values
                        .iter()
                        .fold(drift, |m, u| m.max((u - value).abs()));
                    a.observe(view)
                })
            });
        match result {
            Ok(report) => {
                audit.merge(&a);
                tally.check(
                    "6a",
                    &format!("steady state u = {value:+} preserved to 1e-9 over 100 steps"),
                    drift <= 1e-9 && steps == 100,
                    format!("{steps} steps, max nodal drift {drift:.3e}"),
                );
                ratios.push((
                    format!("steady({value:+})"),
                    report.max_functional_ratio().unwrap_or(f64::NAN),
                ));
            }
            Err(e) => tally.check(
                "6a",
                &format!("steady state u = {value:+}"),
                false,
                format!("run failed: {e}"),
            ),
        }
    }
}

fn example3(tally: &mut Tally, ratios: &mut Vec<(String, f64)>) {
    let dir = out_dir("example3");
    let mut a = StepAudit::new(71, 1);
    let t0 = Instant::now();
    match run_example3_observed(0.125, 1024, 20240101, &EXAMPLE3_SNAPSHOTS, &dir, |v| {
        a.observe(v)
    }) {
        Ok(run) => {
            let ratio = run.report.max_functional_ratio().unwrap_or(f64::NAN);
            ratios.push(("Example3".into(), ratio));
            let present = run.snapshots.iter().filter(|p| p.exists()).count();
            tally.check(
                "x3",
                "Example 3 completes and writes VTK snapshots at steps 0,32,256,512,768,1024",
                present == 2 * EXAMPLE3_SNAPSHOTS.len(),
                format!(
                    "{present} files in {} ({:.0} s)",
                    dir.display(),
                    t0.elapsed().as_secs_f64()
                ),
            );
            tally.check(
                "x3",
                "Example 3 criteria 3/4/6: E_n/E_1 <= 10, v^T A v > 0 every step, nesting every step",
                ratio <= 10.0 && a.nonpositive == 0 && a.nesting_failures == 0 && a.steps == 1024,
                format!(
                    "ratio {ratio:.3}, {} matrices / {} nonpositive, {} steps / {} nesting violations",
                    a.matrices, a.nonpositive, a.steps, a.nesting_failures
                ),
            );
        }
        Err(e) => tally.check("x3", "Example 3 run", false, format!("run failed: {e}")),
    }
}
