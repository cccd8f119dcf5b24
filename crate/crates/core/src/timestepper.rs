//! Time loop: parameter policy, per-step geometry rebuild, assembly, solve and
//! stability monitoring.

use crate::assembly::{
    assemble_rhs, surface_integral, ForcingFn, OperatorBlocks, StepParams, TimeStepState,
};
use crate::band::{classify, extract_surface, NarrowBand, SurfaceSample};
use crate::geometry::{DiscreteLevelSet, LevelSetGeometry};
use crate::mesh::BackgroundMesh;
use crate::potential::{DoubleWell, PotentialKind};
use crate::solver::{solve, SolveMethod, SolverOptions};
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `β_s = 0.2 ε^{-2}`
    Experiment,
    /// `β_s = 2ξ_h + ε^{-2} L + 1`
    Analysis,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub dt: f64,
    pub final_time: f64,
    pub eps: f64,
    pub potential: PotentialKind,
    pub beta_mode: BetaMode,
    /// `ρ_n = c_rho / (δ_n + h)`
    pub c_rho: f64,
    pub c_delta: f64,
    /// Factor on the sampled normal speed when computing `δ_n`.
    pub delta_safety: f64,
    pub solver: SolverOptions,
}

impl SchemeParams {
    pub fn new(dt: f64, final_time: f64, eps: f64) -> Self {
        Self {
            dt,
            final_time,
            eps,
            potential: PotentialKind::Standard { m: 2.0 },
            beta_mode: BetaMode::Experiment,
            c_rho: 1.0,
            c_delta: 2.0,
            delta_safety: 1.2,
            solver: SolverOptions::default(),
        }
    }

    /// Number of steps `N = T / Δt`; `T` must be a whole multiple of `Δt`.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.final_time >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "need dt > 0 and T >= 0, got dt={} T={}",
                self.dt, self.final_time
            )));
        }
        let n = (self.final_time / self.dt).round();
        if (n * self.dt - self.final_time).abs() > 1e-9 * self.final_time.max(self.dt) {
            return Err(Error::InvalidInput(format!(
                "T={} is not a multiple of dt={}",
                self.final_time, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn double_well(&self) -> Result<DoubleWell> {
        match self.potential {
            PotentialKind::Standard { m } => DoubleWell::standard(m, self.eps),
            PotentialKind::Example3 => DoubleWell::example3(self.eps),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c_rho > 0.0 && self.c_delta >= 1.0 && self.delta_safety >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "need c_rho > 0, c_delta >= 1 and delta_safety >= 1 (got {}, {}, {})",
                self.c_rho, self.c_delta, self.delta_safety
            )));
        }
        self.double_well()?;
        self.n_steps().map(|_| ())
    }
}

/// `β_s` for the selected mode.
pub fn beta_policy(mode: BetaMode, eps: f64, xi: f64, lipschitz: f64) -> f64 {
    let k = 1.0 / (eps * eps);
    match mode {
        BetaMode::Experiment => 0.2 * k,
        BetaMode::Analysis => 2.0 * xi + k * lipschitz + 1.0,
        BetaMode::Fixed(b) => b,
    }
}

/// Observables of one time level. Norms are squared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// `‖u_h^n‖²` on `Γ_h^n`
    pub norm_u: f64,
    /// `‖∇_Γh u_h^n‖²`
    pub seminorm: f64,
    /// `ρ_n ‖n_h·∇u_h^n‖²` over the band
    pub stab_term: f64,
    /// `∫ F(u_h^n)`
    pub f_integral: f64,
    /// Left side of the discrete stability estimate at this step.
    pub functional: f64,
    pub delta: f64,
    pub rho: f64,
    pub area: f64,
    pub n_dofs: usize,
    pub n_cut: usize,
    pub n_band: usize,
    pub iterations: usize,
    pub residual: f64,
    /// `max |φ_h^n - φ_h^{n-1}| / Δt` over the vertices of cut tets.
    pub levelset_rate: f64,
    /// `max |w·∇φ_h|` over surface points at `t_{n-1}` and `t_n`.
    pub normal_speed: f64,
}

/// Running record of the stability functional.
#[derive(Debug, Clone, Default)]
pub struct StabilityMonitor {
    pub history: Vec<StepDiagnostics>,
    cumulative: f64,
}

impl StabilityMonitor {
    /// Fills in `functional` and appends.
    fn push(&mut self, mut d: StepDiagnostics, dt: f64, inv_eps2: f64) {
        if d.step > 0 {
            self.cumulative += dt * (d.seminorm + dt * d.stab_term);
        }
        d.functional = d.norm_u + dt * inv_eps2 * d.f_integral + self.cumulative;
        self.history.push(d);
    }

    pub fn all_finite_nonneg(&self) -> bool {
        self.history.iter().all(|d| {
            [d.norm_u, d.seminorm, d.stab_term, d.functional]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0)
                && d.f_integral.is_finite()
        })
    }

    /// `max_n E_n / E_1`; `None` before the first step.
    pub fn max_ratio_to_first_step(&self) -> Option<f64> {
        let e1 = self.history.get(1)?.functional;
        Some(
            self.history[1..]
                .iter()
                .map(|d| d.functional / e1)
                .fold(0.0, f64::max),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub geometry: String,
    pub h: f64,
    pub dt: f64,
    pub final_time: f64,
    pub eps: f64,
    pub beta: f64,
    pub beta_mode: BetaMode,
    pub xi: f64,
    pub warnings: Vec<String>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub dense_fallbacks: usize,
}

impl RunReport {
    pub fn max_functional_ratio(&self) -> Option<f64> {
        let e1 = self.diagnostics.get(1)?.functional;
        Some(
            self.diagnostics[1..]
                .iter()
                .map(|d| d.functional / e1)
                .fold(0.0, f64::max),
        )
    }

    /// Diagnostics CSV: `n,t,norm_u,seminorm,stab_term,F_integral`.
    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("n,t,norm_u,seminorm,stab_term,F_integral\n");
        for d in &self.diagnostics {
            s.push_str(&format!(
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                d.step, d.time, d.norm_u, d.seminorm, d.stab_term, d.f_integral
            ));
        }
        s
    }
}

/// Everything the observer can look at after a time level has been computed.
pub struct StepView<'s> {
    pub mesh: &'s BackgroundMesh,
    pub geo: &'s dyn LevelSetGeometry,
    pub levelset: &'s DiscreteLevelSet,
    pub surface: &'s SurfaceSample,
    pub state: &'s TimeStepState,
    pub blocks: &'s OperatorBlocks,
    pub diagnostics: &'s StepDiagnostics,
    /// Parameters of the step that produced `state` (at step 0, those the first step would use).
    pub step_params: StepParams,
}

pub struct Simulation<'a> {
    mesh: &'a BackgroundMesh,
    geo: &'a dyn LevelSetGeometry,
    forcing: Option<&'a ForcingFn<'a>>,
    params: SchemeParams,
    pot: DoubleWell,
    n_steps: usize,
    beta: f64,
    xi: f64,
    warnings: Vec<String>,
    dense_fallbacks: usize,
    matrix_dump: Option<PathBuf>,
    levelset: DiscreteLevelSet,
    surface: SurfaceSample,
    blocks: OperatorBlocks,
    state: TimeStepState,
    monitor: StabilityMonitor,
}

struct Geometry {
    levelset: DiscreteLevelSet,
    surface: SurfaceSample,
    band: NarrowBand,
    normal_speed: f64,
}

fn build_geometry(
    mesh: &BackgroundMesh,
    geo: &dyn LevelSetGeometry,
    params: &SchemeParams,
    step: usize,
    t: f64,
    t_other: f64,
) -> Result<Geometry> {
    let levelset = DiscreteLevelSet::interpolate(geo, mesh, step, t);
    let cut = classify(&levelset, mesh, 0.0)?;
    let surface = extract_surface(&levelset, mesh, &cut)?;
    let mut speed: f64 = 0.0;
    for &(tet, _, start, end) in &surface.tet_ranges {
        let g = levelset.gradient(mesh, tet);
        for p in &surface.points[start..end] {
            for s in [t, t_other] {
                speed = speed.max(geo.velocity(&p.x, s)?.dot(&g).abs());
            }
        }
    }
    let delta = params.c_delta * params.delta_safety * params.dt * speed;
    let band = classify(&levelset, mesh, delta)?;
    Ok(Geometry {
        levelset,
        surface,
        band,
        normal_speed: speed,
    })
}

impl<'a> Simulation<'a> {
    /// Builds the step-0 state with nodal values `ic` at the band vertices and applies
    /// the parameter policy.
    pub fn new(
        mesh: &'a BackgroundMesh,
        geo: &'a dyn LevelSetGeometry,
        params: SchemeParams,
        ic: &dyn Fn(usize, &Vec3) -> f64,
        forcing: Option<&'a ForcingFn<'a>>,
    ) -> Result<Self> {
        params.validate()?;
        let pot = params.double_well()?;
        let n_steps = params.n_steps()?;
        let g = build_geometry(mesh, geo, &params, 0, 0.0, params.dt)?;
        let values: Vec<f64> = g
            .band
            .active_dofs
            .iter()
            .map(|&v| ic(v, &mesh.vertices()[v]))
            .collect();
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "initial condition is not finite".into(),
            ));
        }
        let blocks = OperatorBlocks::assemble(mesh, &g.levelset, &g.band, &g.surface, geo, 0.0)?;
        let xi = blocks.xi;
        let beta = beta_policy(params.beta_mode, params.eps, xi, pot.lipschitz());

        let mut warnings = Vec::new();
        if xi > 0.0 && params.dt > 1.0 / (4.0 * xi) {
            return Err(Error::InvalidInput(format!(
                "time step {} exceeds 1/(4 xi_h) = {}",
                params.dt,
                1.0 / (4.0 * xi)
            )));
        }
        let h = mesh.h();
        if h * h > params.dt {
            warnings.push(format!(
                "h^2 = {:.3e} exceeds dt = {:.3e}",
                h * h,
                params.dt
            ));
        }
        let cfl = params.c_delta * g.normal_speed * params.dt;
        if cfl > 0.1 {
            warnings.push(format!("c_delta |w.n| dt = {cfl:.3e} is not small"));
        }
        for w in &warnings {
            log::warn!("{w}");
        }

        let rho = params.c_rho / (g.band.delta + h);
        let state = TimeStepState {
            step: 0,
            time: 0.0,
            band: g.band,
            values,
        };
        let mut sim = Self {
            mesh,
            geo,
            forcing,
            params,
            pot,
            n_steps,
            beta,
            xi,
            warnings,
            dense_fallbacks: 0,
            matrix_dump: None,
            levelset: g.levelset,
            surface: g.surface,
            blocks,
            state,
            monitor: StabilityMonitor::default(),
        };
        let d = sim.diagnostics(rho, 0, 0.0, 0.0, g.normal_speed)?;
        sim.monitor.push(d, sim.params.dt, sim.pot.inv_eps2());
        Ok(sim)
    }

    /// Writes each step matrix to `dir/step_<n>.mtx`.
    pub fn set_matrix_dump(&mut self, dir: PathBuf) {
        self.matrix_dump = Some(dir);
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn state(&self) -> &TimeStepState {
        &self.state
    }

    pub fn monitor(&self) -> &StabilityMonitor {
        &self.monitor
    }

    pub fn view(&self) -> StepView<'_> {
        let d = self.monitor.history.last().expect("initial diagnostics");
        StepView {
            mesh: self.mesh,
            geo: self.geo,
            levelset: &self.levelset,
            surface: &self.surface,
            state: &self.state,
            blocks: &self.blocks,
            diagnostics: d,
            step_params: StepParams {
                dt: self.params.dt,
                beta: self.beta,
                rho: d.rho,
            },
        }
    }

    fn diagnostics(
        &self,
        rho: f64,
        iterations: usize,
        residual: f64,
        phi_rate: f64,
        speed: f64,
    ) -> Result<StepDiagnostics> {
        let u = &self.state.values;
        let b = &self.blocks;
        let f_integral = surface_integral(self.mesh, &self.state.band, &self.surface, u, |x| {
            self.pot.F(x)
        })?;
        Ok(StepDiagnostics {
            step: self.state.step,
            time: self.state.time,
            norm_u: b.mass.bilinear(u, u),
            seminorm: b.stiffness.bilinear(u, u),
            stab_term: rho * b.normal_stab.bilinear(u, u),
            f_integral,
            functional: 0.0,
            delta: self.state.band.delta,
            rho,
            area: self.surface.area(),
            n_dofs: self.state.band.n_dofs(),
            n_cut: self.state.band.cut_tets.len(),
            n_band: self.state.band.band_tets.len(),
            iterations,
            residual,
            levelset_rate: phi_rate,
            normal_speed: speed,
        })
    }

    /// One step `n-1 → n`.
    pub fn advance(&mut self) -> Result<&StepDiagnostics> {
        let n = self.state.step + 1;
        let dt = self.params.dt;
        let t = n as f64 * dt;
        let t_prev = self.state.time;
        let g = build_geometry(self.mesh, self.geo, &self.params, n, t, t_prev)?;
        if let Some(tet) = g.band.nesting_violation(&self.state.band) {
            return Err(Error::BandNesting { step: n, tet });
        }
        let rho = self.params.c_rho / (g.band.delta + self.mesh.h());
        let sp = StepParams {
            dt,
            beta: self.beta,
            rho,
        };
        let blocks =
            OperatorBlocks::assemble(self.mesh, &g.levelset, &g.band, &g.surface, self.geo, t)?;
        let matrix = blocks.system_matrix(&sp)?;
        let rhs = assemble_rhs(
            self.mesh,
            &g.band,
            &g.surface,
            &self.state,
            &sp,
            &self.pot,
            self.forcing,
            t,
        )?;
        if let Some(dir) = &self.matrix_dump {
            let f = std::fs::File::create(dir.join(format!("step_{n}.mtx")))?;
            matrix.write_coordinate(std::io::BufWriter::new(f))?;
        }
        let x0: Vec<f64> = g
            .band
            .active_dofs
            .iter()
            .map(|&v| self.state.vertex_value(v).unwrap_or(0.0))
            .collect();
        let out = solve(&matrix, &rhs, Some(&x0), &self.params.solver)?;
        if out.method == SolveMethod::DenseLu {
            self.dense_fallbacks += 1;
        }
        log::debug!(
            "step {n}: {} dofs, {} iterations, residual {:.2e}",
            out.x.len(),
            out.iterations,
            out.residual
        );

        let mut phi_rate: f64 = 0.0;
        for &tet in &g.band.cut_tets {
            for v in self.mesh.tet(tet) {
                phi_rate =
                    phi_rate.max((g.levelset.values[v] - self.levelset.values[v]).abs() / dt);
            }
        }
        self.levelset = g.levelset;
        self.surface = g.surface;
        self.blocks = blocks;
        self.state = TimeStepState {
            step: n,
            time: t,
            band: g.band,
            values: out.x,
        };
        let d = self.diagnostics(rho, out.iterations, out.residual, phi_rate, g.normal_speed)?;
        self.monitor.push(d, dt, self.pot.inv_eps2());
        Ok(self.monitor.history.last().expect("just pushed"))
    }

    /// Runs all remaining steps, calling `observer` at step 0 and after every step.
    pub fn run(
        mut self,
        mut observer: impl FnMut(&StepView<'_>) -> Result<()>,
    ) -> Result<RunReport> {
        if self.state.step == 0 {
            observer(&self.view())?;
        }
        while self.state.step < self.n_steps {
            self.advance()?;
            observer(&self.view())?;
        }
        Ok(self.report())
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            geometry: self.geo.name().to_string(),
            h: self.mesh.h(),
            dt: self.params.dt,
            final_time: self.params.final_time,
            eps: self.params.eps,
            beta: self.beta,
            beta_mode: self.params.beta_mode,
            xi: self.xi,
            warnings: self.warnings.clone(),
            diagnostics: self.monitor.history.clone(),
            dense_fallbacks: self.dense_fallbacks,
        }
    }
}
