//! Benchmark drivers and their file outputs.

use crate::assembly::ForcingFn;
use crate::bench::config::{
    ForcingChoice, GeometryConfig, InitialCondition, PotentialChoice, RunConfig,
};
use crate::bench::eoc::EocTable;
use crate::bench::example1::{self, Example1};
use crate::bench::norms::{ErrorAccumulator, ExactSolution};
use crate::bench::ode::{pulsating_reference, OdeReference};
use crate::bench::radius::recover_radius;
use crate::geometry::{
    DziukOscillating, LevelSetGeometry, PulsatingSphere, StationarySphere, TranslatingSphere,
};
use crate::mesh::{Aabb, BackgroundMesh};
use crate::potential::PotentialKind;
use crate::timestepper::{BetaMode, RunReport, SchemeParams, Simulation, StepView};
use crate::{vtk, Error, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// One point of the convergence ladder.
#[derive(Debug, Clone)]
pub struct Example1Run {
    pub h: f64,
    pub dt: f64,
    pub l2h1: f64,
    pub linf_l2: f64,
    pub report: RunReport,
}

/// Translating sphere with forcing, started from the exact solution.
pub fn run_example1(h: f64, n_steps: usize, beta_mode: BetaMode) -> Result<Example1Run> {
    run_example1_observed(h, n_steps, beta_mode, |_| Ok(()))
}

/// As [`run_example1`], also calling `observer` on every step.
pub fn run_example1_observed(
    h: f64,
    n_steps: usize,
    beta_mode: BetaMode,
    mut observer: impl FnMut(&StepView<'_>) -> Result<()>,
) -> Result<Example1Run> {
    let ex = Example1::new(example1::EPS)?;
    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(example1::DOMAIN_HALF_WIDTH), h)?;
    let dt = example1::FINAL_TIME / n_steps as f64;
    let mut params = SchemeParams::new(dt, example1::FINAL_TIME, example1::EPS);
    params.beta_mode = beta_mode;
    let forcing = |x: &Vec3, t: f64| ex.forcing(x, t);
    let ic = |_: usize, x: &Vec3| ex.value(x, 0.0);
    let sim = Simulation::new(&mesh, &ex.geo, params, &ic, Some(&forcing))?;
    let mut acc = ErrorAccumulator::default();
    let report = sim.run(|view| {
        acc.record(view, &ex)?;
        observer(view)
    })?;
    Ok(Example1Run {
        h,
        dt,
        l2h1: acc.l2_h1(dt),
        linf_l2: acc.linf_l2(),
        report,
    })
}

#[derive(Debug, Clone)]
pub struct Example1Ladder {
    pub runs: Vec<Example1Run>,
    pub l2h1: EocTable,
    pub linf_l2: EocTable,
}

impl Example1Ladder {
    /// `h,dt,L2H1,LinfL2` per run.
    pub fn ladder_csv(&self) -> String {
        let mut s = String::from("h,dt,L2H1,LinfL2\n");
        for r in &self.runs {
            s.push_str(&format!(
                "{},{:.10e},{:.10e},{:.10e}\n",
                r.h, r.dt, r.l2h1, r.linf_l2
            ));
        }
        s
    }

    /// Writes `ladder.csv`, `table_L2H1.csv` and `table_LinfL2.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("ladder.csv"), self.ladder_csv())?;
        std::fs::write(dir.join("table_L2H1.csv"), self.l2h1.to_csv())?;
        std::fs::write(dir.join("table_LinfL2.csv"), self.linf_l2.to_csv())?;
        Ok(())
    }
}

/// Runs `h = 2^{-(i+1)}`, `Δt = T/(64·4^j)` for `i, j < levels`.
pub fn example1_ladder(
    levels: usize,
    mut progress: impl FnMut(&Example1Run),
) -> Result<Example1Ladder> {
    let hs: Vec<f64> = (0..levels).map(|i| 0.5f64.powi(i as i32 + 1)).collect();
    let steps: Vec<usize> = (0..levels).map(|j| 64 * 4usize.pow(j as u32)).collect();
    let dts: Vec<f64> = steps
        .iter()
        .map(|&n| example1::FINAL_TIME / n as f64)
        .collect();
    let mut l2h1 = EocTable::new(hs.clone(), dts.clone());
    let mut linf_l2 = EocTable::new(hs.clone(), dts);
    let mut runs = Vec::new();
    for (j, &n) in steps.iter().enumerate() {
        for (i, &h) in hs.iter().enumerate() {
            let run = run_example1(h, n, BetaMode::Experiment)?;
            l2h1.set(i, j, run.l2h1);
            linf_l2.set(i, j, run.linf_l2);
            progress(&run);
            runs.push(run);
        }
    }
    Ok(Example1Ladder {
        runs,
        l2h1,
        linf_l2,
    })
}

/// `tanh(d/ε)` with `d = R(0)(θ - θ₀)`, `θ` the polar angle from `+z` and
/// `R(0) sin θ₀ = r₀`.
pub fn latitude_ic(sphere_radius: f64, r0: f64, eps: f64) -> impl Fn(usize, &Vec3) -> f64 {
    let theta0 = (r0 / sphere_radius).asin();
    move |_, x: &Vec3| {
        let theta = (x.z / x.norm()).clamp(-1.0, 1.0).acos();
        (sphere_radius * (theta - theta0) / eps).tanh()
    }
}

#[derive(Debug, Clone)]
pub struct Example2Run {
    pub eps: f64,
    pub h: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub r_fem: Vec<f64>,
    pub r_std: Vec<f64>,
    pub reference: OdeReference,
    pub final_error: f64,
    /// `max_n |r_h^n - r_h^{n-1}|`
    pub max_jump: f64,
    pub report: RunReport,
}

impl Example2Run {
    /// `t,r_fem,r_ode,r_std`.
    pub fn radius_csv(&self) -> String {
        let mut s = String::from("t,r_fem,r_ode,r_std\n");
        for k in 0..self.times.len() {
            s.push_str(&format!(
                "{:.10e},{:.10e},{:.10e},{:.10e}\n",
                self.times[k], self.r_fem[k], self.reference.r[k], self.r_std[k]
            ));
        }
        s
    }
}

pub const EXAMPLE2_FINAL_TIME: f64 = 0.125;

/// Pulsating sphere with a latitude-circle initial interface.
pub fn run_example2(
    eps: f64,
    h: f64,
    n_steps: usize,
    half_width: f64,
    r0_fraction: f64,
) -> Result<Example2Run> {
    run_example2_observed(eps, h, n_steps, half_width, r0_fraction, |_| Ok(()))
}

/// As [`run_example2`], also calling `observer` on every step.
pub fn run_example2_observed(
    eps: f64,
    h: f64,
    n_steps: usize,
    half_width: f64,
    r0_fraction: f64,
    mut observer: impl FnMut(&StepView<'_>) -> Result<()>,
) -> Result<Example2Run> {
    let geo = PulsatingSphere::default();
    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(half_width), h)?;
    let dt = EXAMPLE2_FINAL_TIME / n_steps as f64;
    let params = SchemeParams::new(dt, EXAMPLE2_FINAL_TIME, eps);
    let r0 = r0_fraction * geo.radius(0.0);
    let ic = latitude_ic(geo.radius(0.0), r0, eps);
    let sim = Simulation::new(&mesh, &geo, params, &ic, None)?;
    let (mut times, mut r_fem, mut r_std) = (Vec::new(), Vec::new(), Vec::new());
    let report = sim.run(|view| {
        let est = recover_radius(view.mesh, view.surface, view.state)?;
        times.push(view.state.time);
        r_fem.push(est.mean);
        r_std.push(est.std);
        observer(view)
    })?;
    let reference = pulsating_reference(&geo, r0, &times, 1e-11)?;
    let final_error =
        (r_fem.last().expect("step 0 recorded") - reference.r.last().expect("non-empty")).abs();
    let max_jump = r_fem
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    Ok(Example2Run {
        eps,
        h,
        dt,
        times,
        r_fem,
        r_std,
        reference,
        final_error,
        max_jump,
        report,
    })
}

pub const EXAMPLE3_SNAPSHOTS: [usize; 6] = [0, 32, 256, 512, 768, 1024];

/// Per-vertex uniform draws in vertex-id order.
pub fn random_nodal_values(n_vertices: usize, seed: u64, low: f64, high: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_vertices).map(|_| rng.gen_range(low..=high)).collect()
}

#[derive(Debug, Clone)]
pub struct Example3Run {
    pub report: RunReport,
    pub snapshots: Vec<PathBuf>,
}

/// Deforming surface with random initial data; writes VTK snapshots at `snapshot_steps`.
pub fn run_example3(
    h: f64,
    n_steps: usize,
    seed: u64,
    snapshot_steps: &[usize],
    out_dir: &Path,
) -> Result<Example3Run> {
    run_example3_observed(h, n_steps, seed, snapshot_steps, out_dir, |_| Ok(()))
}

/// As [`run_example3`], also calling `observer` on every step.
pub fn run_example3_observed(
    h: f64,
    n_steps: usize,
    seed: u64,
    snapshot_steps: &[usize],
    out_dir: &Path,
    observer: impl FnMut(&StepView<'_>) -> Result<()>,
) -> Result<Example3Run> {
    let cfg = RunConfig {
        geometry: GeometryConfig::Dziuk,
        domain: 2.0,
        h,
        dt: 0.04 / n_steps as f64,
        final_time: 0.04,
        eps: 0.01,
        potential: PotentialChoice::Example3,
        m: 2.0,
        c_delta: 2.0,
        c_rho: 1.0,
        beta_mode: BetaMode::Experiment,
        initial: InitialCondition::Random {
            low: 0.0,
            high: 1.0,
        },
        forcing: ForcingChoice::None,
        seed,
        output: crate::bench::config::OutputConfig {
            dir: out_dir.to_path_buf(),
            vtk_steps: snapshot_steps.to_vec(),
            ..Default::default()
        },
    };
    let (report, snapshots) = run_config_with_files(&cfg, observer)?;
    Ok(Example3Run { report, snapshots })
}

pub fn build_geometry(cfg: &GeometryConfig) -> Result<Box<dyn LevelSetGeometry>> {
    Ok(match cfg {
        GeometryConfig::TranslatingSphere { velocity, radius } => Box::new(TranslatingSphere {
            velocity: Vec3::from(*velocity),
            radius: *radius,
            center0: Vec3::zeros(),
        }),
        GeometryConfig::PulsatingSphere { delta, frequency } => {
            Box::new(PulsatingSphere::new(*delta, *frequency)?)
        }
        GeometryConfig::Dziuk => Box::new(DziukOscillating),
        GeometryConfig::StationarySphere { center, radius } => Box::new(StationarySphere {
            center: Vec3::from(*center),
            radius: *radius,
        }),
    })
}

fn sphere_radius_at_start(geo: &GeometryConfig) -> Result<f64> {
    Ok(match geo {
        GeometryConfig::TranslatingSphere { radius, .. }
        | GeometryConfig::StationarySphere { radius, .. } => *radius,
        GeometryConfig::PulsatingSphere { delta, frequency } => {
            PulsatingSphere::new(*delta, *frequency)?.radius(0.0)
        }
        GeometryConfig::Dziuk => {
            return Err(Error::Config(
                "latitude initial condition needs a sphere geometry".into(),
            ));
        }
    })
}

/// Runs a configuration and writes its diagnostics CSV and VTK snapshots.
pub fn run_config(cfg: &RunConfig) -> Result<RunReport> {
    run_config_with_files(cfg, |_| Ok(())).map(|r| r.0)
}

fn run_config_with_files(
    cfg: &RunConfig,
    mut observer: impl FnMut(&StepView<'_>) -> Result<()>,
) -> Result<(RunReport, Vec<PathBuf>)> {
    let geo = build_geometry(&cfg.geometry)?;
    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(cfg.domain), cfg.h)?;
    let mut params = SchemeParams::new(cfg.dt, cfg.final_time, cfg.eps);
    params.potential = match cfg.potential {
        PotentialChoice::Standard => PotentialKind::Standard { m: cfg.m },
        PotentialChoice::Example3 => PotentialKind::Example3,
    };
    params.c_delta = cfg.c_delta;
    params.c_rho = cfg.c_rho;
    params.beta_mode = cfg.beta_mode;

    let ex1 = Example1::new(cfg.eps)?;
    type Initial<'a> = Box<dyn Fn(usize, &Vec3) -> f64 + 'a>;
    let ic: Initial<'_> = match &cfg.initial {
        InitialCondition::Constant { value } => {
            let v = *value;
            Box::new(move |_, _| v)
        }
        InitialCondition::Example1 => Box::new(|_, x: &Vec3| ex1.value(x, 0.0)),
        InitialCondition::Latitude { r0_fraction } => {
            let big = sphere_radius_at_start(&cfg.geometry)?;
            Box::new(latitude_ic(big, r0_fraction * big, cfg.eps))
        }
        InitialCondition::Random { low, high } => {
            if !(low <= high) {
                return Err(Error::Config(format!("empty random range [{low}, {high}]")));
            }
            let draws = random_nodal_values(mesh.n_vertices(), cfg.seed, *low, *high);
            Box::new(move |v, _| draws[v])
        }
    };
    let forcing_fn = |x: &Vec3, t: f64| ex1.forcing(x, t);
    let forcing: Option<&ForcingFn<'_>> = match cfg.forcing {
        ForcingChoice::None => None,
        ForcingChoice::Example1 => Some(&forcing_fn),
    };

    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let mut sim = Simulation::new(&mesh, geo.as_ref(), params, &*ic, forcing)?;
    if cfg.output.dump_matrices {
        sim.set_matrix_dump(dir.clone());
    }
    let mut written = Vec::new();
    let report = sim.run(|view| {
        let n = view.state.step;
        if cfg.output.vtk_steps.contains(&n) {
            let surf_path = dir.join(format!("surface_{n:05}.vtk"));
            vtk::write_surface(
                BufWriter::new(File::create(&surf_path)?),
                view.mesh,
                view.surface,
                view.state,
            )?;
            let band_path = dir.join(format!("band_{n:05}.vtk"));
            vtk::write_band(
                BufWriter::new(File::create(&band_path)?),
                view.mesh,
                view.state,
            )?;
            written.push(surf_path);
            written.push(band_path);
        }
        observer(view)
    })?;
    std::fs::write(dir.join(&cfg.output.diagnostics), report.diagnostics_csv())?;
    Ok((report, written))
}
