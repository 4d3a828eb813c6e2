//! Strang-split spectral integrator for `i u_t + Δu = α(x)|u|^2 u` on the
//! periodic box, with mass/energy diagnostics.

use log::{debug, warn};
use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::{ComplexField, FieldGrid, Spectral};
use crate::profiles::Profile;

/// Packet carrier `h^{-1/2} exp(i(x·ξ/h - t'|ξ|^2/h))` at rescaled time `t' = t/h`.
pub fn carrier(x: &[f64], xi: &[f64], tp: f64, h: f64) -> Complex64 {
    let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    Complex64::from_polar(h.powf(-0.5), dot / h - tp * xi2 / h)
}

/// Rescaled time `t/h`, snapped to `±T` at the window ends so endpoint
/// evaluations do not depend on rounding of `T h / h`.
pub fn rescaled_time(cfg: &ExperimentConfig, t: f64) -> f64 {
    let (lo, hi) = cfg.lab_window();
    let eps = 4.0 * f64::EPSILON * hi.abs();
    if (t - lo).abs() <= eps {
        -cfg.horizon
    } else if (t - hi).abs() <= eps {
        cfg.horizon
    } else {
        t / cfg.h
    }
}

pub fn check_resolution(cfg: &ExperimentConfig, grid: &FieldGrid) -> Result<()> {
    let limit = std::f64::consts::PI * cfg.h / 8.0;
    let dx = grid.max_spacing();
    if dx > limit * (1.0 + 1e-12) {
        return Err(Error::UnderResolved { dx, limit });
    }
    Ok(())
}

/// `u(-Th, x) = h^{-1/2} exp(i(x·ξ/h + T|ξ|^2/h)) ψ(x)`.
pub fn initial_data(cfg: &ExperimentConfig, grid: &FieldGrid) -> Result<ComplexField> {
    check_resolution(cfg, grid)?;
    if grid.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            found: grid.dim(),
        });
    }
    ComplexField::from_fn(grid.clone(), |x| {
        carrier(x, &cfg.xi, -cfg.horizon, cfg.h) * Complex64::new(cfg.psi.eval(x), 0.0)
    })
}

pub fn mass(u: &ComplexField) -> f64 {
    u.norm_sq()
}

/// `½∫|∇u|^2 + ¼∫α|u|^4`, gradient term by Parseval.
pub fn energy(u: &ComplexField, alpha: &Profile) -> f64 {
    let alpha_nodes = sample_alpha(u.grid(), alpha);
    energy_with(u, &Spectral::new(u.grid()), &u.grid().k_squared(), &alpha_nodes)
}

fn energy_with(u: &ComplexField, spectral: &Spectral, k2: &[f64], alpha: &[f64]) -> f64 {
    let grid = u.grid();
    let mut buf = u.values().to_vec();
    spectral.forward(&mut buf);
    let grad: f64 = buf.iter().zip(k2).map(|(z, k)| k * z.norm_sqr()).sum::<f64>() / grid.len() as f64;
    let quartic: f64 = u
        .values()
        .iter()
        .zip(alpha)
        .map(|(z, a)| a * z.norm_sqr() * z.norm_sqr())
        .sum();
    grid.cell_volume() * (0.5 * grad + 0.25 * quartic)
}

fn sample_alpha(grid: &FieldGrid, alpha: &Profile) -> Vec<f64> {
    let mut p = vec![0.0; grid.dim()];
    (0..grid.len())
        .map(|i| {
            grid.node_coords(i, &mut p);
            alpha.eval(&p)
        })
        .collect()
}

/// Largest modulus within the outer `n/32` layer of every axis, relative to the field max.
pub fn boundary_leak(u: &ComplexField) -> f64 {
    let grid = u.grid();
    let shape = grid.shape();
    let max = u.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let layers: Vec<usize> = shape.iter().map(|&n| (n / 32).max(1)).collect();
    let mut edge = 0.0f64;
    for (flat, z) in u.values().iter().enumerate() {
        let mut rem = flat;
        let mut near = false;
        for a in (0..shape.len()).rev() {
            let i = rem % shape[a];
            rem /= shape[a];
            if i < layers[a] || i >= shape[a] - layers[a] {
                near = true;
            }
        }
        if near {
            edge = edge.max(z.norm());
        }
    }
    edge / max
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub dt: f64,
    pub steps: usize,
}

impl StepPolicy {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            dt: cfg.dt(),
            steps: cfg.step_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub u: ComplexField,
}

/// Precomputed per-node coefficient and kinetic phase for a fixed `dt`.
pub struct Propagator {
    grid: FieldGrid,
    spectral: Spectral,
    alpha: Vec<f64>,
    k2: Vec<f64>,
    kinetic: Vec<Complex64>,
    dt: f64,
}

impl Propagator {
    pub fn new(grid: &FieldGrid, alpha: &Profile, dt: f64) -> Result<Self> {
        if alpha.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: alpha.dim(),
            });
        }
        Self::with_alpha_values(grid, sample_alpha(grid, alpha), dt)
    }

    /// Arbitrary nodal coefficient; lets tests use a constant α.
    pub fn with_alpha_values(grid: &FieldGrid, alpha: Vec<f64>, dt: f64) -> Result<Self> {
        if alpha.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: alpha.len(),
            });
        }
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::Config(format!("invalid time step {dt}")));
        }
        let k2 = grid.k_squared();
        let kinetic = k2.iter().map(|k| Complex64::from_polar(1.0, -dt * k)).collect();
        Ok(Self {
            grid: grid.clone(),
            spectral: Spectral::new(grid),
            alpha,
            k2,
            kinetic,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn alpha_values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn energy(&self, u: &ComplexField) -> f64 {
        energy_with(u, &self.spectral, &self.k2, &self.alpha)
    }

    fn nonlinear_half(&self, u: &mut [Complex64]) {
        let half = 0.5 * self.dt;
        for (z, a) in u.iter_mut().zip(&self.alpha) {
            if *a != 0.0 {
                *z *= Complex64::from_polar(1.0, -half * a * z.norm_sqr());
            }
        }
    }

    /// One Strang step in place: half nonlinear, full linear, half nonlinear.
    pub fn apply(&self, u: &mut [Complex64]) {
        self.nonlinear_half(u);
        self.spectral.forward(u);
        for (z, e) in u.iter_mut().zip(&self.kinetic) {
            *z *= e;
        }
        self.spectral.inverse(u);
        self.nonlinear_half(u);
    }
}

/// Advance `state` by one step of `prop`.
pub fn strang_step(state: SolverState, prop: &Propagator) -> Result<SolverState> {
    if state.u.grid() != prop.grid() {
        return Err(Error::GridMismatch);
    }
    let SolverState { t, step, u } = state;
    let grid = u.grid().clone();
    let mut values = u.into_values();
    prop.apply(&mut values);
    let t = t + prop.dt;
    let u = ComplexField::new(grid, values).map_err(|_| Error::SolverBlowUp { step: step + 1, t })?;
    Ok(SolverState { t, step: step + 1, u })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub max_abs: f64,
    pub boundary_leak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub mass_tol: f64,
    pub diag_stride: usize,
    /// Steps at which to keep a copy of the field (sorted or not).
    pub keep_steps: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: SolverState,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

impl Evolution {
    pub fn snapshot_at(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.step == step)
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("step,t,mass,energy,max_abs,boundary_leak\n");
        for r in &self.diagnostics {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e}\n",
                r.step, r.t, r.mass, r.energy, r.max_abs, r.boundary_leak
            ));
        }
        s
    }
}

/// Step `u0` from `t0` with `prop`, checking mass every step.
pub fn run(u0: ComplexField, t0: f64, prop: &Propagator, steps: usize, opts: &RunOptions) -> Result<Evolution> {
    let mut state = SolverState { t: t0, step: 0, u: u0 };
    let m0 = mass(&state.u);
    let e0 = prop.energy(&state.u);
    let stride = opts.diag_stride.max(1);
    let mut diagnostics = Vec::new();
    let mut snapshots = Vec::new();
    let mut mass_drift = 0.0f64;
    let mut energy_drift = 0.0f64;
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };

    let record = |state: &SolverState, e: f64, diagnostics: &mut Vec<DiagnosticRow>| {
        diagnostics.push(DiagnosticRow {
            step: state.step,
            t: state.t,
            mass: mass(&state.u),
            energy: e,
            max_abs: state.u.max_abs(),
            boundary_leak: boundary_leak(&state.u),
        });
    };
    record(&state, e0, &mut diagnostics);
    if opts.keep_steps.contains(&0) {
        snapshots.push(Snapshot {
            step: 0,
            t: state.t,
            field: state.u.clone(),
        });
    }

    for _ in 0..steps {
        state = strang_step(state, prop)?;
        // Times come from the step count, not accumulated sums.
        state.t = t0 + state.step as f64 * prop.dt;
        let m = mass(&state.u);
        let drift = rel(m, m0);
        mass_drift = mass_drift.max(drift);
        if drift > opts.mass_tol {
            return Err(Error::MassDrift {
                step: state.step,
                drift,
                tol: opts.mass_tol,
            });
        }
        if state.step.is_multiple_of(stride) || state.step == steps {
            let e = prop.energy(&state.u);
            energy_drift = energy_drift.max(rel(e, e0));
            record(&state, e, &mut diagnostics);
        }
        if opts.keep_steps.contains(&state.step) {
            snapshots.push(Snapshot {
                step: state.step,
                t: state.t,
                field: state.u.clone(),
            });
        }
    }
    let leak = diagnostics.iter().fold(0.0f64, |m, r| m.max(r.boundary_leak));
    if leak > 1e-6 {
        warn!("boundary leak {leak:e} exceeds 1e-6 of the field maximum");
    }
    debug!("run finished: {steps} steps, mass drift {mass_drift:e}, energy drift {energy_drift:e}");
    Ok(Evolution {
        final_state: state,
        snapshots,
        diagnostics,
        mass_drift,
        energy_drift,
    })
}

/// Step indices closest to lab times `times` under `policy`, starting at `-Th`.
pub fn steps_for_times(cfg: &ExperimentConfig, policy: &StepPolicy, times: &[f64]) -> Vec<usize> {
    let t0 = cfg.lab_window().0;
    times
        .iter()
        .map(|t| (((t - t0) / policy.dt).round().max(0.0) as usize).min(policy.steps))
        .collect()
}

/// Lab times at which the ansatz is compared with the solution.
pub fn check_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let th = cfg.horizon * cfg.h;
    vec![-th, 0.0, th / 2.0, th]
}

/// Full run from `-Th` to `Th`, keeping the check-time snapshots and any
/// configured snapshot trail.
pub fn evolve(cfg: &ExperimentConfig) -> Result<Evolution> {
    let grid = cfg.grid()?;
    let policy = StepPolicy::from_config(cfg);
    evolve_with(cfg, &grid, &policy)
}

pub fn evolve_with(cfg: &ExperimentConfig, grid: &FieldGrid, policy: &StepPolicy) -> Result<Evolution> {
    let u0 = initial_data(cfg, grid)?;
    let prop = Propagator::new(grid, &cfg.alpha, policy.dt)?;
    let mut keep = steps_for_times(cfg, policy, &check_times(cfg));
    if cfg.time.snapshot_stride > 0 {
        keep.extend((0..=policy.steps).step_by(cfg.time.snapshot_stride));
    }
    keep.sort_unstable();
    keep.dedup();
    let opts = RunOptions {
        mass_tol: cfg.time.mass_tol,
        diag_stride: cfg.time.diag_stride,
        keep_steps: keep,
    };
    run(u0, cfg.lab_window().0, &prop, policy.steps, &opts)
}

/// Exact linear propagation `exp(i τ Δ) u` by one spectral multiplier.
pub fn linear_flow(u: &ComplexField, tau: f64) -> Result<ComplexField> {
    let grid = u.grid();
    let spectral = Spectral::new(grid);
    let mut buf = u.values().to_vec();
    spectral.forward(&mut buf);
    for (z, k) in buf.iter_mut().zip(grid.k_squared()) {
        *z *= Complex64::from_polar(1.0, -tau * k);
    }
    spectral.inverse(&mut buf);
    ComplexField::new(grid.clone(), buf)
}
