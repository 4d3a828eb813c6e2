//! Recovery of the X-ray transform of α from the phase of the packet at
//! `(Th, 4ξT + x₀)`, with anchored branch unwrapping, and reconstruction of α
//! in one and two dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::assemble_v;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::{ComplexField, FieldGrid, Spectral};
use crate::profiles::Profile;
use crate::solver::evolve;
use crate::xray::{check_unit, direction, fbp_invert_2d, normal, recover_alpha_1d, xray_transform, Sinogram};

/// Below this `|w|` a sample is treated as lost.
pub const MIN_MODULUS: f64 = 0.1;
/// Unwrap increments closer to `±π` than this fraction abort.
pub const AMBIGUITY_FRACTION: f64 = 0.9;
pub const MIN_ANGLES: usize = 8;

/// Trigonometric interpolant of a periodic grid field.
pub struct FourierInterpolator {
    grid: FieldGrid,
    coeffs: Vec<Complex64>,
    wavenumbers: Vec<Vec<f64>>,
}

impl FourierInterpolator {
    pub fn new(f: &ComplexField) -> Self {
        let grid = f.grid().clone();
        let mut coeffs = f.values().to_vec();
        Spectral::new(&grid).forward(&mut coeffs);
        let n = grid.len() as f64;
        for c in coeffs.iter_mut() {
            *c /= n;
        }
        let wavenumbers = grid.axes().iter().map(|a| a.wavenumbers()).collect();
        Self {
            grid,
            coeffs,
            wavenumbers,
        }
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn eval(&self, p: &[f64]) -> Result<Complex64> {
        let d = self.grid.dim();
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        let phases: Vec<Vec<Complex64>> = (0..d)
            .map(|a| {
                let x = p[a] - self.grid.axis(a).x_min;
                self.wavenumbers[a]
                    .iter()
                    .map(|k| Complex64::from_polar(1.0, k * x))
                    .collect()
            })
            .collect();
        let shape = self.grid.shape();
        let mut acc = Complex64::new(0.0, 0.0);
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut rem = flat;
            let mut e = *c;
            for a in (0..d).rev() {
                e *= phases[a][rem % shape[a]];
                rem /= shape[a];
            }
            acc += e;
        }
        Ok(acc)
    }
}

/// Normalized packet values along a set of base points for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementLine {
    pub xi: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub w: Vec<Complex64>,
    /// `-arg w`, principal branch.
    pub theta: Vec<f64>,
}

/// `w = K⁻¹ e^{-i(3T + x₀·ξ)/h} h^{1/2} u(Th, 4ξT + x₀)` at each base point.
pub fn measure_packet(u_final: &ComplexField, cfg: &ExperimentConfig, x0: &[Vec<f64>]) -> Result<MeasurementLine> {
    check_unit(&cfg.xi)?;
    let grid = u_final.grid();
    let interp = FourierInterpolator::new(u_final);
    let th = cfg.horizon;
    let mut w = Vec::with_capacity(x0.len());
    let mut theta = Vec::with_capacity(x0.len());
    for (index, p0) in x0.iter().enumerate() {
        let p: Vec<f64> = p0.iter().zip(&cfg.xi).map(|(a, b)| a + 4.0 * th * b).collect();
        if !grid.contains(&p) {
            return Err(Error::OutsideBox { index });
        }
        let dot: f64 = p0.iter().zip(&cfg.xi).map(|(a, b)| a * b).sum();
        let scale = Complex64::from_polar(cfg.h.sqrt() / cfg.plateau_value, -(3.0 * th + dot) / cfg.h);
        let wm = interp.eval(&p)? * scale;
        if wm.norm() < MIN_MODULUS {
            return Err(Error::SignalLost {
                index,
                modulus: wm.norm(),
            });
        }
        theta.push(-wm.arg());
        w.push(wm);
    }
    Ok(MeasurementLine {
        xi: cfg.xi.clone(),
        points: x0.to_vec(),
        w,
        theta,
    })
}

/// Branch integers for `theta`, anchored so that `theta + 2πg` is nearest zero
/// at `anchor`, then propagated to both ends by nearest-neighbour continuity.
pub fn unwrap_phase(theta: &[f64], anchor: usize) -> Result<Vec<i64>> {
    if anchor >= theta.len() {
        return Err(Error::BadAnchor(format!(
            "index {anchor} outside {} samples",
            theta.len()
        )));
    }
    let tau = 2.0 * PI;
    let mut g = vec![0i64; theta.len()];
    g[anchor] = (-theta[anchor] / tau).round() as i64;
    let step = |from: usize, to: usize, g: &mut [i64]| -> Result<()> {
        let q = (theta[from] - theta[to]) / tau;
        let n = q.round();
        let residual = (q - n) * tau;
        if residual.abs() > AMBIGUITY_FRACTION * PI {
            return Err(Error::SamplingTooCoarse { index: to, residual });
        }
        g[to] = g[from] + n as i64;
        Ok(())
    };
    for m in anchor..theta.len() - 1 {
        step(m, m + 1, &mut g)?;
    }
    for m in (1..=anchor).rev() {
        step(m, m - 1, &mut g)?;
    }
    Ok(g)
}

/// Signed positions and base points `x₀ = offset + s ξ` on a path through the
/// anchor `s_a`, spaced `spacing` and clipped to `[s_min, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPath {
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub anchor: usize,
}

pub fn measurement_path(
    offset: &[f64],
    along: &[f64],
    s_min: f64,
    s_max: f64,
    s_anchor: f64,
    spacing: f64,
) -> Result<MeasurementPath> {
    if offset.len() != along.len() {
        return Err(Error::DimensionMismatch {
            expected: along.len(),
            found: offset.len(),
        });
    }
    if !(spacing > 0.0) || !(s_min <= s_anchor && s_anchor <= s_max) {
        return Err(Error::BadAnchor(format!(
            "anchor {s_anchor} not in [{s_min}, {s_max}] or bad spacing"
        )));
    }
    let eps = 1e-9 * spacing;
    let lo = -(((s_anchor - s_min) / spacing + 1e-9).floor() as i64);
    let hi = ((s_max - s_anchor) / spacing + 1e-9).floor() as i64;
    let s: Vec<f64> = (lo..=hi)
        .map(|j| s_anchor + j as f64 * spacing)
        .filter(|v| *v >= s_min - eps && *v <= s_max + eps)
        .collect();
    let anchor = (-lo) as usize;
    let points = s
        .iter()
        .map(|v| offset.iter().zip(along).map(|(o, a)| o + v * a).collect())
        .collect();
    Ok(MeasurementPath { s, points, anchor })
}

/// The configured 1D-style path along `ξ` through the origin.
pub fn config_path(cfg: &ExperimentConfig) -> Result<MeasurementPath> {
    let m = &cfg.measure;
    measurement_path(
        &vec![0.0; cfg.dim],
        &cfg.xi,
        m.s_min,
        m.s_max,
        cfg.anchor_position(),
        cfg.unwrap_spacing(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub g: Vec<i64>,
    pub xalpha: Vec<f64>,
    pub xalpha_true: Vec<f64>,
    pub anchor: usize,
}

impl RecoveryResult {
    pub fn sup_error(&self) -> f64 {
        self.xalpha
            .iter()
            .zip(&self.xalpha_true)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_csv(&self) -> String {
        let d = self.xi.len();
        let mut s = String::new();
        for i in 0..d {
            s.push_str(&format!("x0_{i},"));
        }
        s.push_str("theta,g,xalpha_recovered,xalpha_true,abs_err\n");
        for m in 0..self.s.len() {
            for c in &self.points[m] {
                s.push_str(&format!("{c:e},"));
            }
            s.push_str(&format!(
                "{:e},{},{:e},{:e},{:e}\n",
                self.theta[m],
                self.g[m],
                self.xalpha[m],
                self.xalpha_true[m],
                (self.xalpha[m] - self.xalpha_true[m]).abs()
            ));
        }
        s
    }
}

/// Quadrature ground truth along a path.
pub fn synthetic_xalpha(alpha: &Profile, points: &[Vec<f64>], xi: &[f64]) -> Result<Vec<f64>> {
    points.par_iter().map(|p| xray_transform(alpha, p, xi)).collect()
}

/// Unwrap a measured line and compare with quadrature.
pub fn recover_from_line(
    cfg: &ExperimentConfig,
    line: &MeasurementLine,
    path: &MeasurementPath,
) -> Result<RecoveryResult> {
    let g = unwrap_phase(&line.theta, path.anchor)?;
    let k2 = cfg.plateau_value * cfg.plateau_value;
    let xalpha = line
        .theta
        .iter()
        .zip(&g)
        .map(|(t, n)| (t + 2.0 * PI * *n as f64) / k2)
        .collect();
    let xalpha_true = synthetic_xalpha(&cfg.alpha, &path.points, &cfg.xi)?;
    Ok(RecoveryResult {
        xi: cfg.xi.clone(),
        s: path.s.clone(),
        points: path.points.clone(),
        theta: line.theta.clone(),
        g,
        xalpha,
        xalpha_true,
        anchor: path.anchor,
    })
}

/// Recovery from a given final field along `path`.
pub fn recover_from_field(
    cfg: &ExperimentConfig,
    u_final: &ComplexField,
    path: &MeasurementPath,
) -> Result<RecoveryResult> {
    let line = measure_packet(u_final, cfg, &path.points)?;
    recover_from_line(cfg, &line, path)
}

/// Recovery fed by the leading approximation at `t = Th`, no solver.
pub fn recover_ansatz_fed(cfg: &ExperimentConfig, path: &MeasurementPath) -> Result<RecoveryResult> {
    let grid = cfg.grid()?;
    let v = assemble_v(cfg, cfg.horizon * cfg.h, &grid)?;
    recover_from_field(cfg, &v, path)
}

/// End to end: evolve, measure along the configured path, unwrap.
pub fn recover_xalpha(cfg: &ExperimentConfig) -> Result<RecoveryResult> {
    let ev = evolve(cfg)?;
    recover_from_field(cfg, &ev.final_state.u, &config_path(cfg)?)
}

/// α samples and errors from a 1D recovery along `ξ = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction1d {
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_true: Vec<f64>,
}

impl Reconstruction1d {
    pub fn sup_error(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.alpha_true)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn l2_error(&self) -> f64 {
        let dx = if self.x.len() > 1 { self.x[1] - self.x[0] } else { 0.0 };
        (self
            .alpha
            .iter()
            .zip(&self.alpha_true)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            * dx)
            .sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,alpha_recovered,alpha_true,abs_err\n");
        for i in 0..self.x.len() {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.x[i],
                self.alpha[i],
                self.alpha_true[i],
                (self.alpha[i] - self.alpha_true[i]).abs()
            ));
        }
        s
    }
}

/// `α = -2 dXα/dx₀` from uniformly spaced samples in `s` with `ξ = +1`.
pub fn reconstruct_alpha_1d(s: &[f64], xalpha: &[f64], truth: &Profile) -> Result<Reconstruction1d> {
    if s.len() != xalpha.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            found: xalpha.len(),
        });
    }
    if s.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 5,
            found: s.len(),
        });
    }
    let dx = s[1] - s[0];
    let alpha = recover_alpha_1d(xalpha, dx)?;
    let alpha_true = s.iter().map(|x| truth.eval(&[*x])).collect();
    Ok(Reconstruction1d {
        x: s.to_vec(),
        alpha,
        alpha_true,
    })
}

/// Synthetic 1D pipeline: quadrature Xα on `[lo, hi]` at spacing `dx`, then differentiate.
pub fn synthetic_reconstruction_1d(alpha: &Profile, lo: f64, hi: f64, dx: f64) -> Result<Reconstruction1d> {
    let n = ((hi - lo) / dx).round() as usize + 1;
    let s: Vec<f64> = (0..n).map(|i| lo + i as f64 * dx).collect();
    let points: Vec<Vec<f64>> = s.iter().map(|v| vec![*v]).collect();
    let xa = synthetic_xalpha(alpha, &points, &[1.0])?;
    reconstruct_alpha_1d(&s, &xa, alpha)
}

/// Xα for `±ξ(θ)` along the offsets `t ξ⊥(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalScan {
    pub theta: f64,
    pub offsets: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

pub fn synthetic_scans(alpha: &Profile, thetas: &[f64], offsets: &[f64]) -> Result<Vec<DirectionalScan>> {
    thetas
        .par_iter()
        .map(|&th| {
            let xi = direction(th);
            let back = [-xi[0], -xi[1]];
            let nrm = normal(th);
            let pts: Vec<Vec<f64>> = offsets.iter().map(|t| vec![t * nrm[0], t * nrm[1]]).collect();
            Ok(DirectionalScan {
                theta: th,
                offsets: offsets.to_vec(),
                plus: synthetic_xalpha(alpha, &pts, &xi)?,
                minus: synthetic_xalpha(alpha, &pts, &back)?,
            })
        })
        .collect()
}

/// End-to-end scan for one angle: two evolutions with `ξ = ±ξ(θ)`, each measured
/// along the perpendicular offsets and anchored at the first offset.
pub fn recover_scan_2d(cfg: &ExperimentConfig, theta: f64, offsets: &[f64]) -> Result<DirectionalScan> {
    if cfg.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: cfg.dim,
        });
    }
    let xi = direction(theta);
    let nrm = normal(theta);
    let pts: Vec<Vec<f64>> = offsets.iter().map(|t| vec![t * nrm[0], t * nrm[1]]).collect();
    let path = MeasurementPath {
        s: offsets.to_vec(),
        points: pts,
        anchor: 0,
    };
    let run = |dir: Vec<f64>| -> Result<Vec<f64>> {
        let c = cfg.with_xi(dir)?;
        Ok(recover_xalpha_on(&c, &path)?.xalpha)
    };
    Ok(DirectionalScan {
        theta,
        offsets: offsets.to_vec(),
        plus: run(xi.to_vec())?,
        minus: run(vec![-xi[0], -xi[1]])?,
    })
}

fn recover_xalpha_on(cfg: &ExperimentConfig, path: &MeasurementPath) -> Result<RecoveryResult> {
    let ev = evolve(cfg)?;
    recover_from_field(cfg, &ev.final_state.u, path)
}

/// `Pα = 2(Xα(·, ξ) + Xα(·, -ξ))` arranged as a sinogram.
pub fn sinogram_from_scans(scans: &[DirectionalScan]) -> Result<Sinogram> {
    let first = scans.first().ok_or(Error::InsufficientAngles {
        needed: MIN_ANGLES,
        found: 0,
    })?;
    let offsets = first.offsets.clone();
    let mut values = Vec::with_capacity(scans.len() * offsets.len());
    for s in scans {
        if s.offsets != offsets {
            return Err(Error::NonUniform("scans use different offsets".into()));
        }
        values.extend(s.plus.iter().zip(&s.minus).map(|(a, b)| 2.0 * (a + b)));
    }
    Sinogram::new(scans.iter().map(|s| s.theta).collect(), offsets, values)
}

pub fn reconstruct_alpha_2d(scans: &[DirectionalScan], grid: &FieldGrid) -> Result<ComplexField> {
    if scans.len() < MIN_ANGLES {
        return Err(Error::InsufficientAngles {
            needed: MIN_ANGLES,
            found: scans.len(),
        });
    }
    fbp_invert_2d(&sinogram_from_scans(scans)?, grid)
}

/// `‖f - truth‖ / ‖truth‖` in discrete L² over the ball of `radius` about the profile center.
pub fn relative_l2_on_ball(f: &ComplexField, truth: &Profile, radius: f64) -> f64 {
    let g = f.grid();
    let c = truth.center();
    let (mut num, mut den) = (0.0, 0.0);
    let mut p = vec![0.0; g.dim()];
    for (i, z) in f.values().iter().enumerate() {
        g.node_coords(i, &mut p);
        let r2: f64 = p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
        if r2 <= radius * radius {
            let t = truth.eval(&p);
            num += (z.re - t).powi(2);
            den += t * t;
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use crate::xray::{uniform_angles, uniform_offsets};
    use proptest::prelude::*;

    fn wrap(x: f64) -> f64 {
        let y = (x + PI).rem_euclid(2.0 * PI) - PI;
        if y == -PI {
            PI
        } else {
            y
        }
    }

    #[test]
    fn interpolation_on_grid_and_band_limited() {
        let grid = make_grid(1, &[(-3.0, 5.0)], &[64]).unwrap();
        let k = 2.0 * PI * 5.0 / 8.0;
        let f = ComplexField::from_fn(grid.clone(), |x| Complex64::from_polar(1.0, k * x[0]) + 0.3).unwrap();
        let it = FourierInterpolator::new(&f);
        for i in [0, 7, 31, 63] {
            assert!((it.eval(&grid.node(i)).unwrap() - f.values()[i]).norm() < 1e-12);
        }
        for x in [-2.71, 0.123, 4.9] {
            let exact = Complex64::from_polar(1.0, k * x) + 0.3;
            assert!((it.eval(&[x]).unwrap() - exact).norm() < 1e-12);
        }
        let g2 = make_grid(2, &[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[16, 8]).unwrap();
        let f2 = ComplexField::from_fn(g2.clone(), |x| Complex64::from_polar(1.0, 3.0 * x[0] - 2.0 * x[1])).unwrap();
        let it2 = FourierInterpolator::new(&f2);
        let p = [1.234, 5.678];
        assert!((it2.eval(&p).unwrap() - Complex64::from_polar(1.0, 3.0 * p[0] - 2.0 * p[1])).norm() < 1e-12);
        assert!((it2.eval(&g2.node(37)).unwrap() - f2.values()[37]).norm() < 1e-12);
    }

    #[test]
    fn unwrap_trivial_and_ramp() {
        let g = unwrap_phase(&[0.0; 10], 3).unwrap();
        assert!(g.iter().all(|n| *n == 0));
        let theta: Vec<f64> = (0..=100).map(|m| wrap(0.3 * m as f64)).collect();
        let g = unwrap_phase(&theta, 0).unwrap();
        for (m, (t, n)) in theta.iter().zip(&g).enumerate() {
            assert!((t + 2.0 * PI * *n as f64 - 0.3 * m as f64).abs() < 1e-12);
        }
        assert!(unwrap_phase(&theta, 101).is_err());
    }

    #[test]
    fn unwrap_rejects_ambiguous_increment() {
        let theta = [0.0, 0.5, 0.5 + 0.95 * PI];
        assert!(matches!(
            unwrap_phase(&theta, 0),
            Err(Error::SamplingTooCoarse { index: 2, .. })
        ));
    }

    #[test]
    fn path_contains_anchor() {
        let p = measurement_path(&[0.0], &[1.0], -2.0, 2.0, 1.5, 0.05).unwrap();
        assert_eq!(p.s[p.anchor], 1.5);
        assert_eq!(p.s.len(), 81);
        assert!((p.s[0] + 2.0).abs() < 1e-12 && (p.s[80] - 2.0).abs() < 1e-12);
        assert!(measurement_path(&[0.0], &[1.0], -2.0, 1.0, 1.5, 0.05).is_err());
    }

    /// Trigonometric interpolation of the lab-grid field adds ~1e-8 at the
    /// default spacing; the pipeline oracles use a quarter of it.
    fn fine_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::canonical(1).unwrap();
        cfg.grid.dx_factor /= 4.0;
        cfg
    }

    #[test]
    fn ansatz_fed_recovery_matches_quadrature() {
        let cfg = fine_cfg();
        let path = config_path(&cfg).unwrap();
        let v = assemble_v(&cfg, cfg.horizon * cfg.h, &cfg.grid().unwrap()).unwrap();
        let line = measure_packet(&v, &cfg, &path.points).unwrap();
        // The plateau covers the whole path, so |w| = 1.
        assert!(line.w.iter().all(|w| (w.norm() - 1.0).abs() < 1e-10));
        let r = recover_from_line(&cfg, &line, &path).unwrap();
        assert!(r.sup_error() < 1e-8, "sup error {:e}", r.sup_error());
        assert!(r.xalpha[r.anchor].abs() < 1e-12);
        assert!(r.xalpha.iter().all(|x| *x >= -1e-10));
        assert!(r
            .to_csv()
            .starts_with("x0_0,theta,g,xalpha_recovered,xalpha_true,abs_err\n"));
    }

    #[test]
    fn zero_alpha_gives_zero_phase() {
        let mut cfg = fine_cfg();
        cfg.alpha = cfg.alpha.with_amplitude(0.0);
        let r = recover_ansatz_fed(&cfg, &config_path(&cfg).unwrap()).unwrap();
        assert!(r.theta.iter().all(|t| t.abs() < 1e-10));
        assert!(r.g.iter().all(|n| *n == 0));
    }

    #[test]
    fn strong_nonlinearity_needs_branches() {
        // K²‖α‖ large enough that Xα exceeds π: g must be nonzero somewhere.
        let mut cfg = fine_cfg();
        cfg.alpha = cfg.alpha.with_amplitude(20.0);
        let r = recover_ansatz_fed(&cfg, &config_path(&cfg).unwrap()).unwrap();
        assert!(r.g.iter().any(|n| *n != 0));
        assert!(r.sup_error() < 1e-8, "sup error {:e}", r.sup_error());
    }

    #[test]
    fn measurement_errors() {
        let cfg = ExperimentConfig::canonical(1).unwrap();
        let grid = cfg.grid().unwrap();
        let z = ComplexField::zeros(grid.clone());
        assert!(matches!(
            measure_packet(&z, &cfg, &[vec![0.0]]),
            Err(Error::SignalLost { .. })
        ));
        assert!(matches!(
            measure_packet(&z, &cfg, &[vec![30.0]]),
            Err(Error::OutsideBox { index: 0 })
        ));
    }

    #[test]
    fn synthetic_1d_reconstruction() {
        let alpha = Profile::bump(vec![0.0], 1.0, 0.5).unwrap();
        let rec = synthetic_reconstruction_1d(&alpha, -2.0, 2.0, 0.01).unwrap();
        assert!(rec.sup_error() < 1e-5, "{:e}", rec.sup_error());
        let zero = alpha.with_amplitude(0.0);
        assert_eq!(
            synthetic_reconstruction_1d(&zero, -2.0, 2.0, 0.01).unwrap().sup_error(),
            0.0
        );
    }

    #[test]
    fn synthetic_2d_reconstruction() {
        let alpha = Profile::bump(vec![0.0, 0.0], 1.0, 0.5).unwrap();
        let scans = synthetic_scans(&alpha, &uniform_angles(90), &uniform_offsets(-2.0, 2.0, 401)).unwrap();
        let grid = make_grid(2, &[(-2.0, 2.0), (-2.0, 2.0)], &[64, 64]).unwrap();
        let rec = reconstruct_alpha_2d(&scans, &grid).unwrap();
        let err = relative_l2_on_ball(&rec, &alpha, 1.5);
        assert!(err < 0.05, "relative L2 {err}");
        assert!(matches!(
            reconstruct_alpha_2d(&scans[..7], &grid),
            Err(Error::InsufficientAngles { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn unwrap_recovers_slow_signals(
            incs in proptest::collection::vec(-2.5f64..2.5, 1..60),
            anchor_frac in 0.0f64..1.0,
            offset in -20.0f64..20.0,
        ) {
            let mut truth = vec![0.0];
            for d in &incs {
                truth.push(truth.last().unwrap() + d);
            }
            let anchor = ((truth.len() - 1) as f64 * anchor_frac).round() as usize;
            let shift = truth[anchor];
            let truth: Vec<f64> = truth.iter().map(|t| t - shift + offset.fract()).collect();
            let theta: Vec<f64> = truth.iter().map(|t| wrap(*t)).collect();
            let g = unwrap_phase(&theta, anchor).unwrap();
            for (m, t) in truth.iter().enumerate() {
                prop_assert!((theta[m] + 2.0 * PI * g[m] as f64 - t).abs() < 1e-9);
            }
        }

        #[test]
        fn constant_phase_shifts_are_uniform(phi in -0.5f64..0.5) {
            let cfg = ExperimentConfig::canonical(1).unwrap();
            let path = config_path(&cfg).unwrap();
            let v = assemble_v(&cfg, cfg.horizon * cfg.h, &cfg.grid().unwrap()).unwrap();
            let a = recover_from_field(&cfg, &v, &path).unwrap();
            let b = recover_from_field(&cfg, &v.scale(Complex64::from_polar(1.0, phi)).unwrap(), &path).unwrap();
            for (x, y) in a.xalpha.iter().zip(&b.xalpha) {
                prop_assert!((y - x + phi).abs() < 1e-9);
            }
        }
    }
}
