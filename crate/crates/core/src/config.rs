//! Experiment configuration: the flat `key = value` file format, validation of
//! the wave-packet hypotheses, and the grid/time-step policies derived from it.
//!
//! ```text
//! # canonical 1D desk run
//! dim = 1
//! h = 0.1
//! T = 1
//! T0 = 1
//! R = 4
//! xi = 1
//! K = 1
//! alpha.kind = bump
//! alpha.center = 0
//! alpha.amplitude = 0.5
//! alpha.radius = 1
//! psi.kind = plateau
//! psi.center = 0
//! psi.inner_radius = 2.5
//! psi.outer_radius = 4
//! grid.lower = -12
//! grid.upper = 20
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fields::{FieldGrid, MIN_AXIS_COUNT};
use crate::profiles::{norm, Profile, ProfileKind};

/// Largest admissible `dx / (pi h)`: at least 16 points per carrier wavelength.
pub const MAX_DX_FACTOR: f64 = 0.125;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPolicy {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Target spacing as a fraction of `pi h`.
    pub dx_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimePolicy {
    /// Target step as a fraction of `h`.
    pub dt_factor: f64,
    pub mass_tol: f64,
    pub diag_stride: usize,
    /// Write a snapshot every this many steps; 0 disables the trail.
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePolicy {
    /// Signed positions `s` of the 1D measurement path `x0 = s * xi`.
    pub s_min: f64,
    pub s_max: f64,
    /// Path spacing; `None` uses [`ExperimentConfig::unwrap_spacing`].
    pub spacing: Option<f64>,
    /// Number of angles over `[0, pi)` for planar reconstruction.
    pub angles: usize,
    /// Offsets per angle for synthetic planar sinograms.
    pub offsets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    /// Semiclassical parameter, `0 < h < 1`.
    pub h: f64,
    /// Rescaled half window `T`; the lab window is `[-T h, T h]`.
    pub horizon: f64,
    /// Radius `T0` of a ball containing the support of alpha.
    pub alpha_reach: f64,
    /// Radius `R` of a ball containing the support of psi.
    pub envelope_radius: f64,
    pub xi: Vec<f64>,
    /// Plateau value `K` of psi.
    pub plateau_value: f64,
    pub alpha: Profile,
    pub psi: Profile,
    pub grid: GridPolicy,
    pub time: TimePolicy,
    pub a1_steps: usize,
    pub measure: MeasurePolicy,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// The documented desk configuration for `dim` 1 or 2, at `h = 0.1`.
    pub fn canonical(dim: usize) -> Result<Self> {
        let (lower, upper, xi) = match dim {
            1 => (vec![-12.0], vec![20.0], vec![1.0]),
            2 => (vec![-16.0, -16.0], vec![16.0, 16.0], vec![1.0, 0.0]),
            _ => return Err(Error::Config(format!("no canonical config for dim {dim}"))),
        };
        let origin = vec![0.0; dim];
        let cfg = Self {
            dim,
            h: 0.1,
            horizon: 1.0,
            alpha_reach: 1.0,
            envelope_radius: 4.0,
            xi,
            plateau_value: 1.0,
            alpha: Profile::bump(origin.clone(), 1.0, 0.5)?,
            psi: Profile::plateau(origin, 2.5, 4.0, 1.0)?,
            grid: GridPolicy {
                lower,
                upper,
                dx_factor: MAX_DX_FACTOR,
            },
            time: TimePolicy {
                dt_factor: 1.0 / 2000.0,
                mass_tol: 1e-10,
                diag_stride: 100,
                snapshot_stride: 0,
            },
            a1_steps: 2000,
            measure: MeasurePolicy {
                s_min: -2.0,
                s_max: 2.0,
                spacing: None,
                angles: 90,
                offsets: 401,
            },
            output_dir: PathBuf::from("out"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        let cfg = Self { h, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_xi(&self, xi: Vec<f64>) -> Result<Self> {
        let cfg = Self { xi, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_alpha(&self, alpha: Profile) -> Result<Self> {
        let cfg = Self { alpha, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every hypothesis of the wave-packet construction and the
    /// discretization policy. Each failure names the violated condition.
    pub fn validate(&self) -> Result<()> {
        let hyp = |msg: &str| Err(Error::Hypothesis(msg.to_string()));
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        for (what, len) in [
            ("xi", self.xi.len()),
            ("alpha.center", self.alpha.dim()),
            ("psi.center", self.psi.dim()),
            ("grid.lower", self.grid.lower.len()),
            ("grid.upper", self.grid.upper.len()),
        ] {
            if len != self.dim {
                return Err(Error::Config(format!(
                    "{what} has {len} components, dim is {}",
                    self.dim
                )));
            }
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return hyp("requires 0 < h < 1");
        }
        if (norm(&self.xi) - 1.0).abs() > 1e-12 {
            return hyp("requires |xi| = 1");
        }
        if !(self.alpha_reach > 0.0) {
            return hyp("requires T0 > 0");
        }
        if !(self.horizon > self.alpha_reach / 2.0) {
            return hyp("requires T > T0/2");
        }
        if self.alpha.amplitude() < 0.0 {
            return hyp("requires alpha >= 0");
        }
        let slack = 1e-12;
        if self.alpha.reach() > self.alpha_reach + slack {
            return hyp("requires supp alpha in B(0, T0)");
        }
        if self.psi.reach() > self.envelope_radius + slack {
            return hyp("requires supp psi in B(0, R)");
        }
        if self.plateau_value == 0.0 || !self.plateau_value.is_finite() {
            return hyp("requires K != 0");
        }
        match self.psi.kind() {
            ProfileKind::Plateau { inner, .. } => {
                if norm(self.psi.center()) + 2.0 * self.alpha_reach > inner + slack {
                    return hyp("psi must be constant on B(0,2T0)");
                }
            }
            ProfileKind::Bump { .. } => return hyp("psi must be a plateau profile"),
        }
        if self.psi.amplitude() != self.plateau_value {
            return hyp("psi plateau value must equal K");
        }

        for (lo, hi) in self.grid.lower.iter().zip(&self.grid.upper) {
            if !(hi > lo) {
                return Err(Error::Config(format!("degenerate box axis [{lo}, {hi}]")));
            }
        }
        if !(self.grid.dx_factor > 0.0 && self.grid.dx_factor <= MAX_DX_FACTOR) {
            return Err(Error::Config(format!(
                "grid.dx_factor must lie in (0, {MAX_DX_FACTOR}], got {}",
                self.grid.dx_factor
            )));
        }
        // Both the initial envelope and the packet at t = Th need a 2R margin
        // to the box faces.
        let margin = 2.0 * self.envelope_radius;
        let final_center: Vec<f64> = self.xi.iter().map(|x| 4.0 * self.horizon * x).collect();
        for (name, c) in [("initial", vec![0.0; self.dim]), ("final", final_center)] {
            for ((lo, hi), ci) in self.grid.lower.iter().zip(&self.grid.upper).zip(&c) {
                if ci - self.envelope_radius - margin < lo - slack || ci + self.envelope_radius + margin > hi + slack {
                    return Err(Error::Config(format!(
                        "box [{lo}, {hi}] must hold the {name} envelope B({ci}, R) with margin 2R"
                    )));
                }
            }
        }

        if !(self.time.dt_factor > 0.0 && self.time.dt_factor.is_finite()) {
            return Err(Error::Config("time.dt_factor must be positive".into()));
        }
        if !(self.time.mass_tol > 0.0) {
            return Err(Error::Config("time.mass_tol must be positive".into()));
        }
        if self.time.diag_stride == 0 {
            return Err(Error::Config("time.diag_stride must be at least 1".into()));
        }
        if self.a1_steps < 2 {
            return Err(Error::Config("ansatz.a1_steps must be at least 2".into()));
        }

        let m = &self.measure;
        let lim = 2.0 * self.alpha_reach + slack;
        if !(m.s_min < m.s_max) || m.s_min.abs() > lim || m.s_max.abs() > lim {
            return hyp("measurement path must lie in B(0, 2T0)");
        }
        let anchor = self.anchor_position();
        if anchor < m.s_min || anchor > m.s_max {
            return Err(Error::Config("measurement path must contain the anchor 3T0/2".into()));
        }
        if let Some(s) = m.spacing {
            if !(s > 0.0) {
                return Err(Error::Config("measure.spacing must be positive".into()));
            }
        }
        if m.offsets < 5 {
            return Err(Error::Config("measure.offsets must be at least 5".into()));
        }
        Ok(())
    }

    /// Signed position of the unwrap anchor along `xi`.
    pub fn anchor_position(&self) -> f64 {
        1.5 * self.alpha_reach
    }

    /// Path spacing keeping true phase increments well below pi.
    pub fn unwrap_spacing(&self) -> f64 {
        if let Some(s) = self.measure.spacing {
            return s;
        }
        let k2 = self.plateau_value * self.plateau_value;
        let rate = k2 * self.alpha.sup() * 3.0 * self.alpha_reach;
        if rate == 0.0 {
            0.05
        } else {
            0.05f64.min(PI / (4.0 * rate))
        }
    }

    pub fn lab_window(&self) -> (f64, f64) {
        (-self.horizon * self.h, self.horizon * self.h)
    }

    /// Grid for this `h`: smallest power-of-two counts meeting `dx <= dx_factor * pi * h`.
    pub fn grid(&self) -> Result<FieldGrid> {
        let target = self.grid.dx_factor * PI * self.h;
        let extents: Vec<(f64, f64)> = self
            .grid
            .lower
            .iter()
            .copied()
            .zip(self.grid.upper.iter().copied())
            .collect();
        let counts: Vec<usize> = extents
            .iter()
            .map(|(lo, hi)| {
                let need = ((hi - lo) / target).ceil() as usize;
                need.next_power_of_two().max(MIN_AXIS_COUNT)
            })
            .collect();
        FieldGrid::new(&extents, &counts)
    }

    /// Number of steps covering `[-Th, Th]` at the target step size.
    pub fn step_count(&self) -> usize {
        ((2.0 * self.horizon / self.time.dt_factor) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.horizon * self.h / self.step_count() as f64
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::File {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.into_config()
    }

    /// Serialize in the same flat format accepted by [`ExperimentConfig::parse`].
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("dim", self.dim.to_string());
        put("h", self.h.to_string());
        put("T", self.horizon.to_string());
        put("T0", self.alpha_reach.to_string());
        put("R", self.envelope_radius.to_string());
        put("xi", list(&self.xi));
        put("K", self.plateau_value.to_string());
        for (name, p) in [("alpha", &self.alpha), ("psi", &self.psi)] {
            put(&format!("{name}.center"), list(p.center()));
            put(&format!("{name}.amplitude"), p.amplitude().to_string());
            match p.kind() {
                ProfileKind::Bump { radius } => {
                    put(&format!("{name}.kind"), "bump".into());
                    put(&format!("{name}.radius"), radius.to_string());
                }
                ProfileKind::Plateau { inner, outer } => {
                    put(&format!("{name}.kind"), "plateau".into());
                    put(&format!("{name}.inner_radius"), inner.to_string());
                    put(&format!("{name}.outer_radius"), outer.to_string());
                }
            }
        }
        put("grid.lower", list(&self.grid.lower));
        put("grid.upper", list(&self.grid.upper));
        put("grid.dx_factor", self.grid.dx_factor.to_string());
        put("time.dt_factor", self.time.dt_factor.to_string());
        put("time.mass_tol", self.time.mass_tol.to_string());
        put("time.diag_stride", self.time.diag_stride.to_string());
        put("time.snapshot_stride", self.time.snapshot_stride.to_string());
        put("ansatz.a1_steps", self.a1_steps.to_string());
        put("measure.s_min", self.measure.s_min.to_string());
        put("measure.s_max", self.measure.s_max.to_string());
        if let Some(s) = self.measure.spacing {
            put("measure.spacing", s.to_string());
        }
        put("measure.angles", self.measure.angles.to_string());
        put("measure.offsets", self.measure.offsets.to_string());
        put("output.dir", self.output_dir.display().to_string());
        out
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

struct RawConfig {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "dim",
    "h",
    "T",
    "T0",
    "R",
    "xi",
    "K",
    "alpha.kind",
    "alpha.center",
    "alpha.amplitude",
    "alpha.radius",
    "alpha.inner_radius",
    "alpha.outer_radius",
    "psi.kind",
    "psi.center",
    "psi.amplitude",
    "psi.radius",
    "psi.inner_radius",
    "psi.outer_radius",
    "grid.lower",
    "grid.upper",
    "grid.dx_factor",
    "time.dt_factor",
    "time.mass_tol",
    "time.diag_stride",
    "time.snapshot_stride",
    "ansatz.a1_steps",
    "measure.s_min",
    "measure.s_max",
    "measure.spacing",
    "measure.angles",
    "measure.offsets",
    "output.dir",
];

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn req(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    fn num(&self, key: &str) -> Result<f64> {
        parse_num(key, self.req(key)?)
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| parse_num(key, v))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("`{key}`: expected an integer, got `{v}`"))),
        }
    }

    fn vector(&self, key: &str) -> Result<Vec<f64>> {
        self.req(key)?.split(',').map(|s| parse_num(key, s.trim())).collect()
    }

    fn profile(&self, name: &str, default_amplitude: Option<f64>) -> Result<Profile> {
        let center = self.vector(&format!("{name}.center"))?;
        let amp_key = format!("{name}.amplitude");
        let amplitude = match (self.get(&amp_key), default_amplitude) {
            (Some(v), _) => parse_num(&amp_key, v)?,
            (None, Some(a)) => a,
            (None, None) => return Err(Error::Config(format!("missing key `{amp_key}`"))),
        };
        match self.req(&format!("{name}.kind"))? {
            "bump" => Profile::bump(center, self.num(&format!("{name}.radius"))?, amplitude),
            "plateau" => Profile::plateau(
                center,
                self.num(&format!("{name}.inner_radius"))?,
                self.num(&format!("{name}.outer_radius"))?,
                amplitude,
            ),
            other => Err(Error::Config(format!("`{name}.kind`: unknown profile kind `{other}`"))),
        }
    }

    fn into_config(self) -> Result<ExperimentConfig> {
        let dim = self.count_or("dim", 0)?;
        let plateau_value = self.num("K")?;
        let defaults = ExperimentConfig::canonical(1)?;
        let cfg = ExperimentConfig {
            dim,
            h: self.num("h")?,
            horizon: self.num("T")?,
            alpha_reach: self.num("T0")?,
            envelope_radius: self.num("R")?,
            xi: self.vector("xi")?,
            plateau_value,
            alpha: self.profile("alpha", None)?,
            psi: self.profile("psi", Some(plateau_value))?,
            grid: GridPolicy {
                lower: self.vector("grid.lower")?,
                upper: self.vector("grid.upper")?,
                dx_factor: self.num_or("grid.dx_factor", defaults.grid.dx_factor)?,
            },
            time: TimePolicy {
                dt_factor: self.num_or("time.dt_factor", defaults.time.dt_factor)?,
                mass_tol: self.num_or("time.mass_tol", defaults.time.mass_tol)?,
                diag_stride: self.count_or("time.diag_stride", defaults.time.diag_stride)?,
                snapshot_stride: self.count_or("time.snapshot_stride", 0)?,
            },
            a1_steps: self.count_or("ansatz.a1_steps", defaults.a1_steps)?,
            measure: MeasurePolicy {
                s_min: self.num_or("measure.s_min", defaults.measure.s_min)?,
                s_max: self.num_or("measure.s_max", defaults.measure.s_max)?,
                spacing: self
                    .get("measure.spacing")
                    .map(|v| parse_num("measure.spacing", v))
                    .transpose()?,
                angles: self.count_or("measure.angles", defaults.measure.angles)?,
                offsets: self.count_or("measure.offsets", defaults.measure.offsets)?,
            },
            output_dir: PathBuf::from(self.get("output.dir").unwrap_or("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("`{key}`: expected a number, got `{v}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hypothesis_message(r: Result<()>) -> String {
        match r {
            Err(Error::Hypothesis(m)) => m,
            other => panic!("expected hypothesis error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_is_valid() {
        let c = ExperimentConfig::canonical(1).unwrap();
        assert_eq!(c.grid().unwrap().len(), 1024);
        assert_eq!(c.grid().unwrap().axis(0).dx, 0.03125);
        assert_eq!(c.step_count(), 4000);
        assert!((c.dt() - c.h / 2000.0).abs() < 1e-18);
        assert_eq!(c.unwrap_spacing(), 0.05);
        ExperimentConfig::canonical(2).unwrap();
        assert!(ExperimentConfig::canonical(3).is_err());
    }

    #[test]
    fn grid_resolves_carrier() {
        for h in [0.2, 0.1, 0.05, 0.025] {
            let c = ExperimentConfig::canonical(1).unwrap().with_h(h).unwrap();
            assert!(c.grid().unwrap().max_spacing() <= PI * h / 8.0);
        }
    }

    #[test]
    fn short_horizon_rejected() {
        let mut c = ExperimentConfig::canonical(1).unwrap();
        c.horizon = c.alpha_reach / 4.0;
        assert_eq!(hypothesis_message(c.validate()), "requires T > T0/2");
    }

    #[test]
    fn oblique_direction_accepted() {
        let c = ExperimentConfig::canonical(2).unwrap();
        let c = c.with_xi(vec![0.6, 0.8]).unwrap();
        assert!((norm(&c.xi) - 1.0).abs() < 1e-15);
        assert!(c.with_xi(vec![0.6, 0.81]).is_err());
    }

    #[test]
    fn narrow_plateau_rejected() {
        let mut c = ExperimentConfig::canonical(1).unwrap();
        c.psi = Profile::plateau(vec![0.0], c.alpha_reach, 4.0, 1.0).unwrap();
        assert_eq!(hypothesis_message(c.validate()), "psi must be constant on B(0,2T0)");
    }

    #[test]
    fn other_hypotheses() {
        let base = ExperimentConfig::canonical(1).unwrap();
        assert!(base.with_h(1.0).is_err());
        assert!(base.with_h(0.0).is_err());
        let neg = base.alpha.with_amplitude(-0.1);
        assert_eq!(
            hypothesis_message(base.with_alpha(neg).map(|_| ())),
            "requires alpha >= 0"
        );
        let wide = Profile::bump(vec![0.5], 1.0, 0.5).unwrap();
        assert_eq!(
            hypothesis_message(base.with_alpha(wide).map(|_| ())),
            "requires supp alpha in B(0, T0)"
        );
        let mut c = base.clone();
        c.plateau_value = 2.0;
        assert_eq!(hypothesis_message(c.validate()), "psi plateau value must equal K");
        let mut c = base.clone();
        c.psi = Profile::bump(vec![0.0], 4.0, 1.0).unwrap();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.grid.upper = vec![10.0];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn parse_emit_round_trip() {
        for dim in [1, 2] {
            let mut c = ExperimentConfig::canonical(dim).unwrap().with_h(0.05).unwrap();
            c.measure.spacing = Some(0.025);
            c.output_dir = PathBuf::from("runs/a b");
            let back = ExperimentConfig::parse(&c.emit()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn shipped_configs() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let one = ExperimentConfig::load(dir.join("canonical_1d.cfg")).unwrap();
        let mut expect = ExperimentConfig::canonical(1).unwrap();
        expect.output_dir = PathBuf::from("out/canonical_1d");
        assert_eq!(one, expect);
        let two = ExperimentConfig::load(dir.join("small_2d.cfg")).unwrap();
        assert_eq!((two.dim, two.h, two.measure.angles), (2, 0.2, 16));
    }

    #[test]
    fn parse_minimal_file_with_comments() {
        let text = "# canonical\n dim = 1\nh=0.2 # coarse\nT = 1\nT0 = 1\nR = 4\nxi = 1\nK = 1\n\
                    alpha.kind = bump\nalpha.center = 0\nalpha.amplitude = 0.5\nalpha.radius = 1\n\
                    psi.kind = plateau\npsi.center = 0\npsi.inner_radius = 2.5\npsi.outer_radius = 4\n\
                    grid.lower = -12\ngrid.upper = 20\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c, ExperimentConfig::canonical(1).unwrap().with_h(0.2).unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            ExperimentConfig::parse("dim = 1\nbogus = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("dim = 1\ndim = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(ExperimentConfig::parse("dim 1\n"), Err(Error::Config(_))));
        let c = ExperimentConfig::canonical(1)
            .unwrap()
            .emit()
            .replace("h = 0.1", "h = abc");
        assert!(matches!(ExperimentConfig::parse(&c), Err(Error::Config(_))));
        let c = ExperimentConfig::canonical(1)
            .unwrap()
            .emit()
            .replace("T = 1\n", "T = 0.25\n");
        assert!(matches!(ExperimentConfig::parse(&c), Err(Error::Hypothesis(_))));
    }
}
