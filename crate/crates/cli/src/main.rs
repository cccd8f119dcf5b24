use acsurf::assembly::OperatorBlocks;
use acsurf::band::{classify, extract_surface};
use acsurf::bench::config::RunConfig;
use acsurf::bench::harness::{
    example1_ladder, run_example2, run_example3, EXAMPLE2_FINAL_TIME, EXAMPLE3_SNAPSHOTS,
};
use acsurf::geometry::{DiscreteLevelSet, StationarySphere, TranslatingSphere};
use acsurf::mesh::{Aabb, BackgroundMesh};
use acsurf::timestepper::{SchemeParams, Simulation};
use acsurf::Vec3;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "acsurf",
    version,
    about = "Allen-Cahn on evolving implicit surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence ladder on the translating sphere.
    Example1 {
        /// Number of refinement levels in h and in Δt.
        #[arg(long, default_value_t = 3)]
        max_level: usize,
        #[arg(long, default_value = "output/example1")]
        out: PathBuf,
    },
    /// Latitude-circle motion on the pulsating sphere.
    Example2 {
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.0625)]
        h: f64,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        #[arg(long, default_value = "output/example2")]
        out: PathBuf,
    },
    /// Phase separation on the oscillating surface, with VTK snapshots.
    Example3 {
        #[arg(long, default_value_t = 0.125)]
        h: f64,
        #[arg(long, default_value_t = 1024)]
        steps: usize,
        #[arg(long, default_value_t = 20240101)]
        seed: u64,
        #[arg(long, default_value = "output/example3")]
        out: PathBuf,
    },
    /// Run a TOML configuration.
    Custom { config: PathBuf },
    /// Quick invariant checks on coarse meshes.
    Check,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Example1 { max_level, out } => {
            if max_level == 0 {
                bail!("--max-level must be at least 1");
            }
            let ladder = example1_ladder(max_level, |r| {
                log::info!(
                    "h = {}, dt = {:.3e}: L2(H1) = {:.6e}, Linf(L2) = {:.6e}",
                    r.h,
                    r.dt,
                    r.l2h1,
                    r.linf_l2
                );
            })?;
            ladder.write(&out)?;
            println!("{}", ladder.l2h1.to_csv());
            println!("{}", ladder.linf_l2.to_csv());
            println!("wrote {}", out.display());
        }
        Command::Example2 { eps, h, steps, out } => {
            std::fs::create_dir_all(&out)?;
            for e in eps {
                let run = run_example2(e, h, steps, 1.5, 0.75)?;
                let path = out.join(format!("radius_eps{e}.csv"));
                std::fs::write(&path, run.radius_csv())?;
                println!(
                    "eps = {e}: r_h(T) = {:.6}, r_ode(T) = {:.6}, |error| = {:.3e}, T = {EXAMPLE2_FINAL_TIME}",
                    run.r_fem.last().copied().unwrap_or(f64::NAN),
                    run.reference.r.last().copied().unwrap_or(f64::NAN),
                    run.final_error
                );
            }
        }
        Command::Example3 {
            h,
            steps,
            seed,
            out,
        } => {
            let snaps: Vec<usize> = EXAMPLE3_SNAPSHOTS
                .iter()
                .map(|&s| s * steps / 1024)
                .collect();
            let run = run_example3(h, steps, seed, &snaps, &out)?;
            let ratio = run.report.max_functional_ratio().unwrap_or(f64::NAN);
            println!(
                "steps = {}, max E_n/E_1 = {ratio:.4}, {} files",
                steps,
                run.snapshots.len()
            );
            for w in &run.report.warnings {
                println!("warning: {w}");
            }
        }
        Command::Custom { config } => {
            let cfg = RunConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let report = acsurf::bench::harness::run_config(&cfg)?;
            println!(
                "{} steps, max E_n/E_1 = {:.4}, output in {}",
                report.diagnostics.len().saturating_sub(1),
                report.max_functional_ratio().unwrap_or(f64::NAN),
                cfg.output.dir.display()
            );
        }
        Command::Check => check()?,
    }
    Ok(())
}

fn check() -> Result<()> {
    let mut failed = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    };

    let mesh = BackgroundMesh::build_uniform(Aabb::centered_cube(1.5), 0.25)?;
    let sphere = StationarySphere {
        center: Vec3::new(0.013, -0.021, 0.007),
        radius: 1.0,
    };
    let dls = DiscreteLevelSet::interpolate(&sphere, &mesh, 0, 0.0);
    let band = classify(&dls, &mesh, 0.1)?;
    let surf = extract_surface(&dls, &mesh, &band)?;
    let area_err = (surf.area() - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI);
    report(
        "surface area",
        area_err < 0.05,
        format!("relative error {area_err:.2e}"),
    );

    let moving = TranslatingSphere::default();
    let dls = DiscreteLevelSet::interpolate(&moving, &mesh, 0, 0.05);
    let band = classify(&dls, &mesh, 0.1)?;
    let surf = extract_surface(&dls, &mesh, &band)?;
    let blocks = OperatorBlocks::assemble(&mesh, &dls, &band, &surf, &moving, 0.05)?;
    let skew = blocks.advection.to_dense() + blocks.advection.to_dense().transpose();
    let skew_norm = skew.abs().max() / blocks.advection.max_abs().max(1e-300);
    report(
        "advection skew-symmetry",
        skew_norm < 1e-12,
        format!("{skew_norm:.2e}"),
    );

    for value in [1.0, -1.0] {
        let params = SchemeParams::new(0.01, 0.2, 0.1);
        let sim = Simulation::new(&mesh, &sphere, params, &move |_, _| value, None)?;
        let mut drift: f64 = 0.0;
        sim.run(|view| {
            drift = view
                .state
                .values
                .iter()
                .fold(drift, |m, u| m.max((u - value).abs()));
            Ok(())
        })?;
        report(
            &format!("steady state {value:+}"),
            drift < 1e-9,
            format!("max nodal drift {drift:.2e}"),
        );
    }
    if failed > 0 {
        bail!("{failed} check(s) failed");
    }
    Ok(())
}
