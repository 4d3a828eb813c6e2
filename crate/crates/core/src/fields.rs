//! Uniform periodic grids, complex fields on them, spectral differential
//! operators, norms, and the NLSF binary field format.
//!
//! Layout is row-major with the last axis fastest. Wavenumbers follow the
//! standard FFT ordering, `k = 2*pi*m/L` with `m` in `[-n/2, n/2)`; the Nyquist
//! bin is read as `-n/2`.

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MIN_AXIS_COUNT: usize = 8;
pub const MAX_DIM: usize = 3;

const MAGIC: &[u8; 4] = b"NLSF";
const VERSION: u32 = 1;

/// One axis of a periodic grid. Node `i` sits at `x_min + i*dx`; node `n`
/// wraps onto node `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub x_min: f64,
    pub dx: f64,
}

impl Axis {
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.extent()
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// Angular wavenumbers in FFT bin order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let base = 2.0 * PI / self.extent();
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { j - n };
                base * m as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    axes: Vec<Axis>,
}

impl FieldGrid {
    pub fn new(extents: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        if extents.len() != counts.len() {
            return Err(Error::InvalidGrid(format!(
                "{} extents for {} counts",
                extents.len(),
                counts.len()
            )));
        }
        let axes = extents
            .iter()
            .zip(counts)
            .map(|(&(lo, hi), &n)| {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(Error::InvalidGrid(format!("degenerate extent ({lo}, {hi})")));
                }
                Ok(Axis {
                    n,
                    x_min: lo,
                    dx: (hi - lo) / n as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_axes(axes)
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {} not in 1..=3", axes.len())));
        }
        for a in &axes {
            if a.n < MIN_AXIS_COUNT || !a.n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis count {} must be a power of two >= {MIN_AXIS_COUNT}",
                    a.n
                )));
            }
            if !(a.dx.is_finite() && a.dx > 0.0 && a.x_min.is_finite()) {
                return Err(Error::InvalidGrid(format!("bad spacing {} / origin {}", a.dx, a.x_min)));
            }
        }
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.dx).collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.dx).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.dx).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.extent()).product()
    }

    /// Coordinates of the node with flat index `flat`, written into `out`.
    pub fn node_coords(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for (ax, slot) in self.axes.iter().zip(out.iter_mut()).rev() {
            *slot = ax.coord(rem % ax.n);
            rem /= ax.n;
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.node_coords(flat, &mut p);
        p
    }

    /// Whether `p` lies in the closed box `[x_min, x_max)` on every axis.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.axes.iter().zip(p).all(|(a, &x)| x >= a.x_min && x <= a.x_max())
    }

    /// Distance from `p` to the nearest box face (negative when outside).
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(p)
            .map(|(a, &x)| (x - a.x_min).min(a.x_max() - x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `|k|^2` at every node in row-major order.
    pub fn k_squared(&self) -> Vec<f64> {
        let ks: Vec<Vec<f64>> = self.axes.iter().map(Axis::wavenumbers).collect();
        let mut out = vec![0.0; self.len()];
        let mut idx = vec![0usize; self.dim()];
        for v in out.iter_mut() {
            *v = idx.iter().zip(&ks).map(|(&i, k)| k[i] * k[i]).sum();
            advance(&mut idx, &self.shape());
        }
        out
    }
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}

pub fn make_grid(dim: usize, extents: &[(f64, f64)], counts: &[usize]) -> Result<FieldGrid> {
    if extents.len() != dim || counts.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "dim {dim} but {} extents and {} counts",
            extents.len(),
            counts.len()
        )));
    }
    FieldGrid::new(extents, counts)
}

/// Complex samples on a [`FieldGrid`]. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: FieldGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: FieldGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: FieldGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn<F>(grid: FieldGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let mut p = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.node_coords(i, &mut p);
                f(&p)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn<F>(grid: FieldGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64,
    {
        Self::from_fn(grid, |p| Complex64::new(f(p), 0.0))
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().copied().map(f).collect())
    }

    pub fn scale(&self, c: Complex64) -> Result<Self> {
        self.map(|z| z * c)
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with<F>(&self, other: &Self, mut f: F) -> Result<Self>
    where
        F: FnMut(Complex64, Complex64) -> Complex64,
    {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `sum |f|^2 * cell volume`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }
}

/// Maximum pointwise modulus of `a - b`.
pub fn sup_norm_diff(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (x, y)| m.max((x - y).norm())))
}

/// Multidimensional FFT over a fixed grid. Plans are shared; scratch space is
/// allocated per call.
pub struct Spectral {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl Spectral {
    pub fn new(grid: &FieldGrid) -> Self {
        let mut planner = FftPlanner::new();
        let shape = grid.shape();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self {
            shape,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// Inverse transform including the `1/N` factor, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
        let s = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn apply(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.shape[axis];
            let stride: usize = self.shape[axis + 1..].iter().product();
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            // Transpose each block so the lanes along `axis` are contiguous.
            let block = n * stride;
            let mut lanes = vec![Complex64::new(0.0, 0.0); block];
            for chunk in data.chunks_mut(block) {
                for i in 0..n {
                    for j in 0..stride {
                        lanes[j * n + i] = chunk[i * stride + j];
                    }
                }
                plan.process_with_scratch(&mut lanes, &mut scratch);
                for i in 0..n {
                    for j in 0..stride {
                        chunk[i * stride + j] = lanes[j * n + i];
                    }
                }
            }
        }
    }
}

/// Apply a real Fourier multiplier `m(k)` given per node in FFT order.
pub fn apply_multiplier(f: &ComplexField, spectral: &Spectral, multiplier: &[f64]) -> Result<ComplexField> {
    let mut buf = f.values.clone();
    spectral.forward(&mut buf);
    for (z, &m) in buf.iter_mut().zip(multiplier) {
        *z *= m;
    }
    spectral.inverse(&mut buf);
    ComplexField::new(f.grid.clone(), buf)
}

/// Spectral Laplacian: multiply mode `k` by `-|k|^2`.
pub fn laplacian(f: &ComplexField) -> Result<ComplexField> {
    let spectral = Spectral::new(&f.grid);
    let m: Vec<f64> = f.grid.k_squared().into_iter().map(|k2| -k2).collect();
    apply_multiplier(f, &spectral, &m)
}

/// Spectral partial derivative along `axis`.
pub fn partial(f: &ComplexField, axis: usize) -> Result<ComplexField> {
    let grid = &f.grid;
    let spectral = Spectral::new(grid);
    let k_axis = grid.axis(axis).wavenumbers();
    let shape = grid.shape();
    let stride: usize = shape[axis + 1..].iter().product();
    let n = shape[axis];
    let mut buf = f.values.clone();
    spectral.forward(&mut buf);
    for (flat, z) in buf.iter_mut().enumerate() {
        let k = k_axis[(flat / stride) % n];
        *z *= Complex64::new(0.0, k);
    }
    spectral.inverse(&mut buf);
    ComplexField::new(grid.clone(), buf)
}

pub fn dump_field<P: AsRef<Path>>(f: &ComplexField, path: P) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(16 + 24 * f.grid.dim() + 16 * f.values.len());
    write_field(f, &mut bytes)?;
    fs::write(path, bytes).map_err(|source| Error::File {
        path: path.into(),
        source,
    })
}

pub fn load_field<P: AsRef<Path>>(path: P) -> Result<ComplexField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::File {
        path: path.into(),
        source,
    })?;
    read_field(&mut bytes.as_slice())
}

pub fn write_field<W: Write>(f: &ComplexField, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(f.grid.dim() as u32).to_le_bytes())?;
    for a in f.grid.axes() {
        w.write_all(&(a.n as u64).to_le_bytes())?;
        w.write_all(&a.x_min.to_le_bytes())?;
        w.write_all(&a.dx.to_le_bytes())?;
    }
    for z in &f.values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    let magic = cur.take(4).ok_or_else(|| Error::Format("missing magic".into()))?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = cur.u32().ok_or_else(|| Error::Format("truncated header".into()))?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = cur.u32().ok_or_else(|| Error::Format("truncated header".into()))? as usize;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Format(format!("dimension {dim} not in 1..=3")));
    }
    let mut axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (n, x_min, dx) = match (cur.u64(), cur.f64(), cur.f64()) {
            (Some(n), Some(x), Some(d)) => (n, x, d),
            _ => return Err(Error::Format("truncated axis header".into())),
        };
        let n = usize::try_from(n).map_err(|_| Error::Format(format!("axis count {n} too large")))?;
        axes.push(Axis { n, x_min, dx });
    }
    let grid = FieldGrid::from_axes(axes).map_err(|e| Error::Format(e.to_string()))?;

    let expected = grid
        .len()
        .checked_mul(16)
        .ok_or_else(|| Error::Format("sample count overflows".into()))? as u64;
    let found = (bytes.len() - cur.pos) as u64;
    if expected != found {
        return Err(Error::SizeMismatch { expected, found });
    }
    let values = bytes[cur.pos..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    ComplexField::new(grid, values)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}
