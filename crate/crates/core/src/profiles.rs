//! Compactly supported radial profiles used for the nonlinearity coefficient
//! and the initial envelope.
//!
//! Two shapes are available: the standard bump `A*exp(1 - 1/(1 - (r/a)^2))`
//! and a plateau that equals `A` on an inner ball and falls to zero through a
//! smoothstep built from `e(t) = exp(-1/t)`. Both return exactly zero outside
//! their support. Derivatives are fourth-order centered differences.

use crate::error::{Error, Result};

/// Finite-difference step relative to the support radius.
pub const FD_STEP_FACTOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Bump { radius: f64 },
    Plateau { inner: f64, outer: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    kind: ProfileKind,
    center: Vec<f64>,
    amplitude: f64,
}

/// Value, gradient and Laplacian at one point. Only the first `dim` gradient
/// entries are meaningful.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: [f64; 3],
    pub laplacian: f64,
}

impl Profile {
    pub fn bump(center: Vec<f64>, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("bump radius must be positive, got {radius}")));
        }
        Self::checked(ProfileKind::Bump { radius }, center, amplitude)
    }

    pub fn plateau(center: Vec<f64>, inner: f64, outer: f64, amplitude: f64) -> Result<Self> {
        if !(inner.is_finite() && outer.is_finite() && inner > 0.0 && outer > inner) {
            return Err(Error::Config(format!(
                "plateau radii must satisfy 0 < inner < outer, got {inner}, {outer}"
            )));
        }
        Self::checked(ProfileKind::Plateau { inner, outer }, center, amplitude)
    }

    fn checked(kind: ProfileKind, center: Vec<f64>, amplitude: f64) -> Result<Self> {
        if center.is_empty() || center.len() > 3 || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(format!("bad profile center {center:?}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::Config(format!("bad profile amplitude {amplitude}")));
        }
        Ok(Self {
            kind,
            center,
            amplitude,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    pub fn with_center(&self, center: Vec<f64>) -> Self {
        Self { center, ..self.clone() }
    }

    /// Radius of the closed support ball about the center.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            ProfileKind::Bump { radius } => radius,
            ProfileKind::Plateau { outer, .. } => outer,
        }
    }

    /// Smallest `T0` with the support contained in `B(0, T0)`.
    pub fn reach(&self) -> f64 {
        norm(&self.center) + self.support_radius()
    }

    /// Maximum of `|value|`.
    pub fn sup(&self) -> f64 {
        self.amplitude.abs()
    }

    pub fn fd_step(&self) -> f64 {
        FD_STEP_FACTOR * self.support_radius()
    }

    /// Profile value as a function of the distance `r` from the center.
    pub fn radial(&self, r: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        match self.kind {
            ProfileKind::Bump { radius } => {
                if r >= radius {
                    return 0.0;
                }
                let q = r / radius;
                self.amplitude * (1.0 - 1.0 / (1.0 - q * q)).exp()
            }
            ProfileKind::Plateau { inner, outer } => {
                if r <= inner {
                    self.amplitude
                } else if r >= outer {
                    0.0
                } else {
                    self.amplitude * smoothstep((outer - r) / (outer - inner))
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.center.len());
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        let s = self.support_radius();
        if r2 >= s * s {
            return 0.0;
        }
        self.radial(r2.sqrt())
    }

    /// Whether every stencil point of [`Profile::jet`] at `x` is outside the support.
    fn stencil_outside(&self, x: &[f64]) -> bool {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        let reach = self.support_radius() + 2.5 * self.fd_step();
        r2 >= reach * reach
    }

    /// Value, gradient and Laplacian sharing one set of stencil evaluations.
    pub fn jet(&self, x: &[f64]) -> Jet {
        let d = x.len();
        if self.amplitude == 0.0 || self.stencil_outside(x) {
            return Jet::default();
        }
        let eta = self.fd_step();
        let f0 = self.eval(x);
        let mut p = [0.0; 3];
        p[..d].copy_from_slice(x);
        let mut jet = Jet {
            value: f0,
            ..Jet::default()
        };
        for axis in 0..d {
            let mut at = |off: f64| {
                p[axis] = x[axis] + off;
                let v = self.eval(&p[..d]);
                p[axis] = x[axis];
                v
            };
            let (m2, m1, p1, p2) = (at(-2.0 * eta), at(-eta), at(eta), at(2.0 * eta));
            jet.gradient[axis] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * eta);
            jet.laplacian += (-m2 + 16.0 * m1 - 30.0 * f0 + 16.0 * p1 - p2) / (12.0 * eta * eta);
        }
        jet
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.jet(x).gradient[..x.len()].to_vec()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.jet(x).laplacian
    }
}

/// `S(t) = e(t) / (e(t) + e(1-t))`, zero for `t <= 0` and one for `t >= 1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

pub fn profile_eval(p: &Profile, x: &[f64]) -> f64 {
    p.eval(x)
}

pub fn profile_laplacian(p: &Profile, x: &[f64]) -> f64 {
    p.laplacian(x)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
