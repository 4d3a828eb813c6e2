//! Half-line and full-line X-ray transforms of a profile, derivative-based
//! recovery in one dimension, and 2D filtered backprojection.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fields::{ComplexField, FieldGrid};
use crate::profiles::{norm, Profile};

/// Tolerance on `| |xi| - 1 |`.
pub const UNIT_TOL: f64 = 1e-12;
pub const QUAD_PANELS: usize = 64;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a || panels == 0 {
        return 0.0;
    }
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            acc += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += acc * half;
    }
    total
}

pub(crate) fn check_unit(xi: &[f64]) -> Result<()> {
    let n = norm(xi);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitVector { norm: n });
    }
    Ok(())
}

fn check_dims(alpha: &Profile, x0: &[f64], xi: &[f64]) -> Result<()> {
    for v in [x0, xi] {
        if v.len() != alpha.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                found: v.len(),
            });
        }
    }
    check_unit(xi)
}

/// `X alpha(x0, xi) = 1/2 * int_0^inf alpha(x0 + s xi) ds`, truncated to
/// `s <= |x0| + T0` beyond which the ray has left `B(0, T0)`.
pub fn xray_transform(alpha: &Profile, x0: &[f64], xi: &[f64]) -> Result<f64> {
    xray_transform_with(alpha, x0, xi, QUAD_PANELS)
}

pub fn xray_transform_with(alpha: &Profile, x0: &[f64], xi: &[f64], panels: usize) -> Result<f64> {
    check_dims(alpha, x0, xi)?;
    if alpha.amplitude() == 0.0 {
        return Ok(0.0);
    }
    let d = x0.len();
    let upper = norm(x0) + alpha.reach();
    let mut p = [0.0; 3];
    let integrand = |s: f64| {
        for i in 0..d {
            p[i] = x0[i] + s * xi[i];
        }
        alpha.eval(&p[..d])
    };
    Ok(0.5 * gauss_legendre(integrand, 0.0, upper, panels))
}

/// Full line integral `P alpha(x0, xi) = 2 (X alpha(x0, xi) + X alpha(x0, -xi))`.
pub fn pray_transform(alpha: &Profile, x0: &[f64], xi: &[f64]) -> Result<f64> {
    let back: Vec<f64> = xi.iter().map(|v| -v).collect();
    Ok(2.0 * (xray_transform(alpha, x0, xi)? + xray_transform(alpha, x0, &back)?))
}

/// Recover `alpha` on a uniform 1D sample line from `x0 -> X alpha(x0, +1)`
/// using `d/dx0 X alpha = -alpha/2`. Fourth-order differences, one-sided at
/// the two end samples on each side.
pub fn recover_alpha_1d(xalpha: &[f64], dx: f64) -> Result<Vec<f64>> {
    let n = xalpha.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, found: n });
    }
    let f = xalpha;
    let scale = -2.0 / (12.0 * dx);
    let deriv = |i: usize| -> f64 {
        if i >= 2 && i + 2 < n {
            f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]
        } else if i == 0 {
            -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
        } else if i == 1 {
            -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
        } else if i == n - 2 {
            3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]
        } else {
            25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]
        }
    };
    Ok((0..n).map(|i| scale * deriv(i)).collect())
}

/// Line integrals of a 2D function sampled over angles and signed offsets.
///
/// For angle `theta_j` the ray direction is `xi = (cos, sin)` and the sample
/// point is `t_k * (-sin, cos)`, so `t` is the signed distance of the line from
/// the origin. `values` is angle-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    thetas: Vec<f64>,
    offsets: Vec<f64>,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn new(thetas: Vec<f64>, offsets: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != thetas.len() * offsets.len() {
            return Err(Error::LengthMismatch {
                expected: thetas.len() * offsets.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            thetas,
            offsets,
            values,
        })
    }

    pub fn zeros(thetas: Vec<f64>, offsets: Vec<f64>) -> Self {
        let values = vec![0.0; thetas.len() * offsets.len()];
        Self {
            thetas,
            offsets,
            values,
        }
    }

    /// Project `alpha` with [`pray_transform`].
    pub fn project(alpha: &Profile, thetas: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        if alpha.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: alpha.dim(),
            });
        }
        let rows: Vec<Vec<f64>> = thetas
            .par_iter()
            .map(|&th| {
                let xi = direction(th);
                let nrm = normal(th);
                offsets
                    .iter()
                    .map(|&t| pray_transform(alpha, &[t * nrm[0], t * nrm[1]], &xi))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Self::new(thetas, offsets, rows.concat())
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.offsets.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.thetas != other.thetas || self.offsets != other.offsets {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.thetas.clone(), self.offsets.clone(), values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_index,theta,offset,value\n");
        for (j, &th) in self.thetas.iter().enumerate() {
            for (k, &t) in self.offsets.iter().enumerate() {
                let _ = writeln!(out, "{j},{th},{t},{}", self.values[j * self.offsets.len() + k]);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["angle_index", "theta", "offset", "value"] {
            return Err(Error::Format(format!("unexpected sinogram header {header:?}")));
        }
        let mut thetas: Vec<f64> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Format(format!("sinogram line {}: {line:?}", lineno + 2));
            if parts.len() != 4 {
                return Err(bad());
            }
            let j: usize = parts[0].parse().map_err(|_| bad())?;
            let th: f64 = parts[1].parse().map_err(|_| bad())?;
            let t: f64 = parts[2].parse().map_err(|_| bad())?;
            let v: f64 = parts[3].parse().map_err(|_| bad())?;
            if j == thetas.len() {
                thetas.push(th);
            } else if j + 1 != thetas.len() {
                return Err(bad());
            }
            if j == 0 {
                offsets.push(t);
            }
            values.push(v);
        }
        Self::new(thetas, offsets, values)
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|source| Error::File {
            path: path.into(),
            source,
        })
    }
}

pub fn direction(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

pub fn normal(theta: f64) -> [f64; 2] {
    [-theta.sin(), theta.cos()]
}

/// `n` angles evenly spaced over `[0, pi)`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| PI * j as f64 / n as f64).collect()
}

/// `n` points evenly spaced over the closed interval `[lo, hi]`.
pub fn uniform_offsets(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + k as f64 * step).collect()
}

fn uniform_step(xs: &[f64], what: &str) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::NonUniform(format!("{what}: need at least two samples")));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::NonUniform(format!("{what}: not increasing")));
    }
    for (i, pair) in xs.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::NonUniform(format!("{what}: gap {i} differs from {step}")));
        }
    }
    Ok(step)
}

/// Ram–Lak ramp (spatial-domain kernel, transformed) apodized by a Hann
/// window, for a zero-padded length `m` and offset spacing `tau`.
fn ramp_hann_filter(m: usize, tau: f64) -> Vec<f64> {
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    kernel[0] = Complex64::new(1.0 / (4.0 * tau * tau), 0.0);
    for n in (1..m / 2).step_by(2) {
        let v = -1.0 / ((n * n) as f64 * PI * PI * tau * tau);
        kernel[n] = Complex64::new(v, 0.0);
        kernel[m - n] = Complex64::new(v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut kernel);
    kernel
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mm = if i < m / 2 { i as f64 } else { i as f64 - m as f64 };
            let hann = 0.5 * (1.0 + (2.0 * PI * mm / m as f64).cos());
            z.re * tau * hann
        })
        .collect()
}

/// Filtered backprojection onto a 2D grid. The output is real-valued.
pub fn fbp_invert_2d(sino: &Sinogram, out_grid: &FieldGrid) -> Result<ComplexField> {
    if out_grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: out_grid.dim(),
        });
    }
    let n_ang = sino.thetas.len();
    let dtheta = uniform_step(&sino.thetas, "angles")?;
    if (dtheta * n_ang as f64 - PI).abs() > 1e-9 {
        return Err(Error::NonUniform(format!(
            "angles must cover [0, pi) evenly: step {dtheta} x {n_ang}"
        )));
    }
    let tau = uniform_step(&sino.offsets, "offsets")?;
    let n_off = sino.offsets.len();
    let m = (2 * n_off).next_power_of_two();
    let filter = ramp_hann_filter(m, tau);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let filtered: Vec<Vec<f64>> = (0..n_ang)
        .into_par_iter()
        .map(|j| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for (b, &v) in buf.iter_mut().zip(sino.row(j)) {
                *b = Complex64::new(v, 0.0);
            }
            fwd.process(&mut buf);
            for (b, &w) in buf.iter_mut().zip(&filter) {
                *b *= w / m as f64;
            }
            inv.process(&mut buf);
            buf[..n_off].iter().map(|z| z.re).collect()
        })
        .collect();

    let t0 = sino.offsets[0];
    let trig: Vec<[f64; 2]> = sino.thetas.iter().map(|&th| normal(th)).collect();
    let weight = PI / n_ang as f64;
    let values: Vec<Complex64> = (0..out_grid.len())
        .into_par_iter()
        .map(|flat| {
            let p = out_grid.node(flat);
            let mut acc = 0.0;
            for (q, nrm) in filtered.iter().zip(&trig) {
                let pos = (p[0] * nrm[0] + p[1] * nrm[1] - t0) / tau;
                if pos < 0.0 || pos > (n_off - 1) as f64 {
                    continue;
                }
                let i = (pos.floor() as usize).min(n_off - 2);
                let frac = pos - i as f64;
                acc += q[i] * (1.0 - frac) + q[i + 1] * frac;
            }
            Complex64::new(acc * weight, 0.0)
        })
        .collect();
    ComplexField::new(out_grid.clone(), values)
}
