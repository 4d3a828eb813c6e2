//! WKB wave-packet approximations: the leading amplitude a₀ in closed form,
//! the first correction a₁ by integration along characteristics, and the
//! assembled approximate solutions v and u₁.
//!
//! Internally time is rescaled, `t' = t/h ∈ [-T, T]`; public entry points take
//! lab time `t`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::{laplacian, partial, ComplexField, FieldGrid};
use crate::profiles::Jet;
use crate::solver::{carrier, rescaled_time};
use crate::xray::gauss_legendre;

pub const PHASE_PANELS: usize = 32;
/// Halved-step disagreement above this aborts [`solve_a1`].
pub const A1_STABILITY_TOL: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coupling term of the a₁ equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// `2|A₀|²A₁ + A₀² conj(A₁)`, the first-order coefficient of `a|a|²`.
    #[default]
    Expansion,
    /// `4 A₀ Re(A₀ conj(A₁))`.
    Doubled,
}

impl Coupling {
    fn eval(self, a0: Complex64, a1: Complex64) -> Complex64 {
        match self {
            Coupling::Expansion => 2.0 * a0.norm_sqr() * a1 + a0 * a0 * a1.conj(),
            Coupling::Doubled => 4.0 * a0 * (a0 * a1.conj()).re,
        }
    }
}

fn axpy(x: &[f64], c: f64, xi: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(xi) {
        *o = a + c * b;
    }
}

/// Parameter window `[lo, hi]` of `σ` where `|x0 + 2ξσ| <= reach`, if any.
fn chord(x0: &[f64], xi: &[f64], reach: f64) -> Option<(f64, f64)> {
    let p: f64 = x0.iter().zip(xi).map(|(a, b)| a * b).sum();
    let q: f64 = x0.iter().map(|a| a * a).sum::<f64>() - reach * reach;
    let disc = p * p - q;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((-p - r) / 2.0, (-p + r) / 2.0))
}

/// `∫_{-T}^{t'} α(x0 + 2ξσ) dσ` for the characteristic through `x0` at `t' = 0`.
pub fn phase_along(cfg: &ExperimentConfig, x0: &[f64], tp: f64) -> f64 {
    let Some((a, b)) = chord(x0, &cfg.xi, cfg.alpha.reach()) else {
        return 0.0;
    };
    let lo = a.max(-cfg.horizon);
    let hi = b.min(tp);
    if hi <= lo {
        return 0.0;
    }
    let mut p = vec![0.0; x0.len()];
    gauss_legendre(
        |s| {
            axpy(x0, 2.0 * s, &cfg.xi, &mut p);
            cfg.alpha.eval(&p)
        },
        lo,
        hi,
        PHASE_PANELS,
    )
}

/// Φ(t, x) at lab time `t`.
pub fn phase_integral(cfg: &ExperimentConfig, t: f64, x: &[f64]) -> f64 {
    let tp = rescaled_time(cfg, t);
    let mut x0 = vec![0.0; x.len()];
    axpy(x, -2.0 * tp, &cfg.xi, &mut x0);
    phase_along(cfg, &x0, tp)
}

/// `A₀(t', x)` at rescaled time.
pub fn a0_at(cfg: &ExperimentConfig, tp: f64, x: &[f64]) -> Complex64 {
    let d = x.len();
    let mut z = [0.0; 3];
    // z = x - 2ξ(t' + T) is exactly x at t' = -T.
    axpy(x, -2.0 * (tp + cfg.horizon), &cfg.xi, &mut z[..d]);
    let p = cfg.psi.eval(&z[..d]);
    if p == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut x0 = [0.0; 3];
    axpy(x, -2.0 * tp, &cfg.xi, &mut x0[..d]);
    let phi = phase_along(cfg, &x0[..d], tp);
    Complex64::from_polar(p, -p * p * phi)
}

fn par_field<F>(grid: &FieldGrid, f: F) -> Result<ComplexField>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = grid.dim();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut p = [0.0; 3];
            grid.node_coords(i, &mut p[..d]);
            f(&p[..d])
        })
        .collect();
    ComplexField::new(grid.clone(), values)
}

fn check_time(cfg: &ExperimentConfig, t: f64) -> Result<f64> {
    let (lo, hi) = cfg.lab_window();
    let slack = 4.0 * f64::EPSILON * hi;
    if !(t >= lo - slack && t <= hi + slack) {
        return Err(Error::Config(format!("time {t} outside [{lo}, {hi}]")));
    }
    Ok(rescaled_time(cfg, t))
}

fn check_grid(cfg: &ExperimentConfig, grid: &FieldGrid) -> Result<()> {
    if grid.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            found: grid.dim(),
        });
    }
    Ok(())
}

/// a₀ on `grid` at lab time `t`.
pub fn eval_a0(cfg: &ExperimentConfig, t: f64, grid: &FieldGrid) -> Result<ComplexField> {
    check_grid(cfg, grid)?;
    let tp = check_time(cfg, t)?;
    par_field(grid, |x| a0_at(cfg, tp, x))
}

/// Leading approximation `v = h^{-1/2} e^{i(x·ξ/h - t|ξ|²/h²)} a₀`.
pub fn assemble_v(cfg: &ExperimentConfig, t: f64, grid: &FieldGrid) -> Result<ComplexField> {
    check_grid(cfg, grid)?;
    let tp = check_time(cfg, t)?;
    par_field(grid, |x| carrier(x, &cfg.xi, tp, cfg.h) * a0_at(cfg, tp, x))
}

/// `u₁ = h^{-1/2} e^{i(...)} (a₀ + h a₁)` with a₁ taken from `correction` at time `t`.
pub fn assemble_with_correction(
    cfg: &ExperimentConfig,
    t: f64,
    grid: &FieldGrid,
    correction: &CorrectionField,
) -> Result<ComplexField> {
    let a1 = correction
        .at(t)
        .ok_or_else(|| Error::Config(format!("no correction stored for t = {t}")))?;
    if a1.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let tp = check_time(cfg, t)?;
    let d = grid.dim();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut p = [0.0; 3];
            grid.node_coords(i, &mut p[..d]);
            let x = &p[..d];
            carrier(x, &cfg.xi, tp, cfg.h) * (a0_at(cfg, tp, x) + cfg.h * a1.values()[i])
        })
        .collect();
    ComplexField::new(grid.clone(), values)
}

/// `u_N` for `N ∈ {0, 1}`.
pub fn assemble_un(cfg: &ExperimentConfig, t: f64, grid: &FieldGrid, n: usize) -> Result<ComplexField> {
    match n {
        0 => assemble_v(cfg, t, grid),
        1 => {
            let c = solve_a1(cfg, grid, &[t])?;
            assemble_with_correction(cfg, t, grid, &c)
        }
        _ => Err(Error::Config(format!("only N = 0 or 1 is implemented, got {n}"))),
    }
}

/// A₁ on a grid at a list of lab times.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionField {
    pub times: Vec<f64>,
    pub fields: Vec<ComplexField>,
}

impl CorrectionField {
    pub fn at(&self, t: f64) -> Option<&ComplexField> {
        self.times.iter().position(|&s| s == t).map(|i| &self.fields[i])
    }

    pub fn sup_abs(&self) -> Vec<f64> {
        self.fields.iter().map(ComplexField::max_abs).collect()
    }
}

/// Everything about a characteristic that stays fixed while integrating A₁.
struct Characteristic<'a> {
    cfg: &'a ExperimentConfig,
    coupling: Coupling,
    d: usize,
    x0: [f64; 3],
    psi: Jet,
}

// State layout: [Re A₁, Im A₁, Φ, ∇Φ (3), ΔΦ].
type State = [f64; 7];

impl Characteristic<'_> {
    /// `A₀` and `ΔA₀` from the ψ jet and the running phase moments.
    fn amplitude(&self, y: &State) -> (Complex64, Complex64) {
        let d = self.d;
        let (p, gp, lp) = (self.psi.value, &self.psi.gradient, self.psi.laplacian);
        let phi = y[2];
        let g = &y[3..6];
        let l = y[6];
        let q = p * p * phi;
        let mut gq = [0.0; 3];
        let mut gp2 = 0.0;
        let mut gp_g = 0.0;
        for i in 0..d {
            gq[i] = 2.0 * p * gp[i] * phi + p * p * g[i];
            gp2 += gp[i] * gp[i];
            gp_g += gp[i] * g[i];
        }
        let lq = (2.0 * gp2 + 2.0 * p * lp) * phi + 4.0 * p * gp_g + p * p * l;
        let gp_gq: f64 = (0..d).map(|i| gp[i] * gq[i]).sum();
        let gq2: f64 = gq[..d].iter().map(|v| v * v).sum();
        let e = Complex64::from_polar(1.0, -q);
        let a0 = p * e;
        let la0 = e * Complex64::new(lp - p * gq2, -2.0 * gp_gq - p * lq);
        (a0, la0)
    }

    fn rhs(&self, s: f64, y: &State) -> State {
        let d = self.d;
        let mut pt = [0.0; 3];
        axpy(&self.x0[..d], 2.0 * s, &self.cfg.xi, &mut pt[..d]);
        let aj = self.cfg.alpha.jet(&pt[..d]);
        let (a0, la0) = self.amplitude(y);
        let a1 = Complex64::new(y[0], y[1]);
        let mut da1 = I * la0;
        if aj.value != 0.0 {
            da1 -= I * aj.value * self.coupling.eval(a0, a1);
        }
        let mut out = [0.0; 7];
        out[0] = da1.re;
        out[1] = da1.im;
        out[2] = aj.value;
        out[3..3 + d].copy_from_slice(&aj.gradient[..d]);
        out[6] = aj.laplacian;
        out
    }

    fn integrate(&self, tp: f64, n: usize) -> Complex64 {
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let t0 = -self.cfg.horizon;
        let ds = (tp - t0) / n as f64;
        let mut y: State = [0.0; 7];
        let lin = |y: &State, k: &State, c: f64| -> State {
            let mut o = *y;
            for (a, b) in o.iter_mut().zip(k) {
                *a += c * b;
            }
            o
        };
        for j in 0..n {
            let s = t0 + j as f64 * ds;
            let k1 = self.rhs(s, &y);
            let k2 = self.rhs(s + 0.5 * ds, &lin(&y, &k1, 0.5 * ds));
            let k3 = self.rhs(s + 0.5 * ds, &lin(&y, &k2, 0.5 * ds));
            let k4 = self.rhs(s + ds, &lin(&y, &k3, ds));
            for i in 0..7 {
                y[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        Complex64::new(y[0], y[1])
    }
}

/// Steps used to reach `t'` when the full window gets `steps`.
fn steps_to(cfg: &ExperimentConfig, tp: f64, steps: usize) -> usize {
    (steps as f64 * (tp + cfg.horizon) / (2.0 * cfg.horizon)).round() as usize
}

/// `A₁(t', x)` by RK4 along the characteristic through `x` at `t'`, with
/// `steps` steps for the full window.
pub fn a1_at(cfg: &ExperimentConfig, tp: f64, x: &[f64], steps: usize, coupling: Coupling) -> Complex64 {
    let d = x.len();
    let mut z = [0.0; 3];
    axpy(x, -2.0 * (tp + cfg.horizon), &cfg.xi, &mut z[..d]);
    let psi = cfg.psi.jet(&z[..d]);
    if psi.value == 0.0 && psi.laplacian == 0.0 && psi.gradient.iter().all(|g| *g == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let mut x0 = [0.0; 3];
    axpy(x, -2.0 * tp, &cfg.xi, &mut x0[..d]);
    let ch = Characteristic {
        cfg,
        coupling,
        d,
        x0,
        psi,
    };
    ch.integrate(tp, steps_to(cfg, tp, steps))
}

/// A₁ at each lab time in `times` with an explicit step count and coupling.
pub fn solve_a1_with(
    cfg: &ExperimentConfig,
    grid: &FieldGrid,
    times: &[f64],
    steps: usize,
    coupling: Coupling,
) -> Result<CorrectionField> {
    check_grid(cfg, grid)?;
    let mut fields = Vec::with_capacity(times.len());
    for &t in times {
        let tp = check_time(cfg, t)?;
        fields.push(par_field(grid, |x| a1_at(cfg, tp, x, steps, coupling))?);
    }
    Ok(CorrectionField {
        times: times.to_vec(),
        fields,
    })
}

/// A₁ at the configured step count, checked against a half-step-count run.
pub fn solve_a1(cfg: &ExperimentConfig, grid: &FieldGrid, times: &[f64]) -> Result<CorrectionField> {
    let fine = solve_a1_with(cfg, grid, times, cfg.a1_steps, Coupling::default())?;
    let coarse = solve_a1_with(cfg, grid, times, cfg.a1_steps / 2, Coupling::default())?;
    let mut diff = 0.0f64;
    for (a, b) in fine.fields.iter().zip(&coarse.fields) {
        diff = diff.max(crate::fields::sup_norm_diff(a, b)?);
    }
    if diff > A1_STABILITY_TOL {
        return Err(Error::CorrectionUnstable { diff });
    }
    Ok(fine)
}

fn transport(f: &ComplexField, xi: &[f64]) -> Result<ComplexField> {
    let mut out = ComplexField::zeros(f.grid().clone());
    for (axis, &c) in xi.iter().enumerate() {
        if c != 0.0 {
            let g = partial(f, axis)?;
            out = out.zip_with(&g, |a, b| a + 2.0 * c * b)?;
        }
    }
    Ok(out)
}

/// `∂_{t'}A₀ + 2ξ·∇A₀ + iα|A₀|²A₀` at lab time `t`, central difference of
/// half-width `delta` in `t'`, spectral gradient.
pub fn a0_residual(cfg: &ExperimentConfig, t: f64, grid: &FieldGrid, delta: f64) -> Result<ComplexField> {
    let tp = check_time(cfg, t)?;
    if tp - delta < -cfg.horizon || tp + delta > cfg.horizon {
        return Err(Error::Config("difference stencil leaves the time window".into()));
    }
    let plus = par_field(grid, |x| a0_at(cfg, tp + delta, x))?;
    let minus = par_field(grid, |x| a0_at(cfg, tp - delta, x))?;
    let mid = par_field(grid, |x| a0_at(cfg, tp, x))?;
    let alpha = par_field(grid, |x| Complex64::new(cfg.alpha.eval(x), 0.0))?;
    let dt = plus.zip_with(&minus, |a, b| (a - b) / (2.0 * delta))?;
    let nl = mid.zip_with(&alpha, |a, al| I * al.re * a.norm_sqr() * a)?;
    dt.add(&transport(&mid, &cfg.xi)?)?.add(&nl)
}

/// Residual of the A₁ equation `i∂_{t'}A₁ + 2iξ·∇A₁ + ΔA₀ - α g₁` at lab time `t`:
/// fourth-order differences of half-width `delta` in `t'`, spectral in space.
pub fn a1_residual(
    cfg: &ExperimentConfig,
    t: f64,
    grid: &FieldGrid,
    delta: f64,
    coupling: Coupling,
) -> Result<ComplexField> {
    let tp = check_time(cfg, t)?;
    if tp - 2.0 * delta < -cfg.horizon || tp + 2.0 * delta > cfg.horizon {
        return Err(Error::Config("difference stencil leaves the time window".into()));
    }
    let steps = cfg.a1_steps;
    let at = |s: f64| par_field(grid, |x| a1_at(cfg, s, x, steps, coupling));
    let (m2, m1, p1, p2) = (
        at(tp - 2.0 * delta)?,
        at(tp - delta)?,
        at(tp + delta)?,
        at(tp + 2.0 * delta)?,
    );
    let mid = at(tp)?;
    let a0 = par_field(grid, |x| a0_at(cfg, tp, x))?;
    let alpha = par_field(grid, |x| Complex64::new(cfg.alpha.eval(x), 0.0))?;
    let n = grid.len();
    let dt: Vec<Complex64> = (0..n)
        .map(|i| (m2.values()[i] - 8.0 * m1.values()[i] + 8.0 * p1.values()[i] - p2.values()[i]) / (12.0 * delta))
        .collect();
    let dt = ComplexField::new(grid.clone(), dt)?;
    let tr = transport(&mid, &cfg.xi)?;
    let la0 = laplacian(&a0)?;
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            let g1 = coupling.eval(a0.values()[i], mid.values()[i]);
            I * (dt.values()[i] + tr.values()[i]) + la0.values()[i] - alpha.values()[i].re * g1
        })
        .collect();
    ComplexField::new(grid.clone(), values)
}

/// `t_prime, sup_abs_a1, residual_sup` rows.
pub fn a1_diagnostics_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("t_prime,sup_abs_a1,residual_sup\n");
    for (tp, a, r) in rows {
        s.push_str(&format!("{tp:e},{a:e},{r:e}\n"));
    }
    s
}
