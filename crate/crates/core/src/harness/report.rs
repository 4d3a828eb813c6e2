use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Fits whose RMS log residual exceeds this do not establish a rate.
pub const RATE_RESIDUAL_LIMIT: f64 = 0.3;

/// Least-squares fit of `ln e = ln C + p ln h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    /// `C = exp(intercept)`.
    pub constant: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn rate_established(&self) -> bool {
        self.residual <= RATE_RESIDUAL_LIMIT
    }

    pub fn predict(&self, h: f64) -> f64 {
        self.constant * h.powf(self.slope)
    }
}

fn fit_points(h: &[f64], e: &[f64]) -> SlopeFit {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    SlopeFit {
        slope,
        constant: intercept.exp(),
        residual: (ss / n).sqrt(),
        points: h.len(),
    }
}

/// Log-log slope of `e` against `h` over at least three positive, distinct samples.
pub fn fit_loglog(h: &[f64], e: &[f64]) -> Result<SlopeFit> {
    if h.len() != e.len() {
        return Err(Error::Fit(format!("{} step sizes but {} errors", h.len(), e.len())));
    }
    if h.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            found: h.len(),
        });
    }
    if let Some(v) = h.iter().chain(e).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Fit(format!("non-positive or non-finite sample {v}")));
    }
    if h.iter().all(|v| *v == h[0]) {
        return Err(Error::Fit("step sizes are all equal".into()));
    }
    Ok(fit_points(h, e))
}

/// One sweep entry. Quantities that were not computed are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub err_v: f64,
    pub err_u1: f64,
    pub err_xalpha: f64,
    /// Reason the phase unwrap gave up, if it did.
    pub unwrap_abort: Option<String>,
    pub g_max_abs: i64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Ordered by decreasing `h`.
    pub rows: Vec<SweepRow>,
    /// The nonlinearity is identically zero.
    pub degenerate: bool,
    pub fit_v: Option<SlopeFit>,
    pub fit_u1: Option<SlopeFit>,
    pub fit_xalpha: Option<SlopeFit>,
}

fn fit_column(rows: &[SweepRow], col: impl Fn(&SweepRow) -> f64) -> Option<SlopeFit> {
    let (h, e): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| (r.h, col(r)))
        .filter(|(_, e)| e.is_finite() && *e > 0.0)
        .unzip();
    fit_loglog(&h, &e).ok()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

impl SweepReport {
    pub fn new(rows: Vec<SweepRow>, degenerate: bool) -> Self {
        let fit_v = fit_column(&rows, |r| r.err_v);
        let fit_u1 = fit_column(&rows, |r| r.err_u1);
        let fit_xalpha = fit_column(&rows, |r| r.err_xalpha);
        Self {
            rows,
            degenerate,
            fit_v,
            fit_u1,
            fit_xalpha,
        }
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn unwrap_aborts(&self) -> usize {
        self.rows.iter().filter(|r| r.unwrap_abort.is_some()).count()
    }

    /// Slope of `err_v` over the rows up to and including each row.
    pub fn running_slopes(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|i| {
                let (h, e): (Vec<f64>, Vec<f64>) = self.rows[..=i]
                    .iter()
                    .map(|r| (r.h, r.err_v))
                    .filter(|(_, e)| e.is_finite() && *e > 0.0)
                    .unzip();
                if h.len() < 2 {
                    f64::NAN
                } else {
                    fit_points(&h, &e).slope
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,err_v,err_u1,err_xalpha,slope_v_running,mass_drift,energy_drift,wall_s\n");
        for (r, slope) in self.rows.iter().zip(self.running_slopes()) {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{:.3}",
                num(r.h),
                num(r.err_v),
                num(r.err_u1),
                num(r.err_xalpha),
                num(slope),
                num(r.mass_drift),
                num(r.energy_drift),
                r.wall_s
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let hs = self.h_values();
        let _ = writeln!(
            s,
            "h values: {}",
            hs.iter().map(|h| num(*h)).collect::<Vec<_>>().join(", ")
        );
        let line = |s: &mut String, name: &str, fit: &Option<SlopeFit>| match fit {
            Some(f) => {
                let _ = write!(
                    s,
                    "{name}: slope {:.4} constant {:e} residual {:.4} over {} points",
                    f.slope, f.constant, f.residual, f.points
                );
                if !f.rate_established() {
                    s.push_str(" [rate not established]");
                }
                if self.degenerate {
                    s.push_str(" [degenerate]");
                }
                s.push('\n');
            }
            None => {
                let _ = writeln!(s, "{name}: no fit");
            }
        };
        line(&mut s, "err_v", &self.fit_v);
        line(&mut s, "err_u1", &self.fit_u1);
        line(&mut s, "err_xalpha", &self.fit_xalpha);
        let below = self.rows.iter().filter(|r| r.err_u1 < r.err_v).count();
        let _ = writeln!(s, "err_u1 < err_v at {below} of {} h values", self.rows.len());
        let _ = writeln!(s, "unwrap aborts: {}", self.unwrap_aborts());
        let g = self.rows.iter().map(|r| r.g_max_abs).max().unwrap_or(0);
        let _ = writeln!(s, "max |g|: {g}");
        if self.degenerate {
            s.push_str("degenerate: alpha is zero, errors are discretization noise\n");
        }
        s
    }

    /// Two-column `h error` data for one curve, finite entries only.
    pub fn curve_dat(&self, name: &str, col: impl Fn(&SweepRow) -> f64) -> String {
        let mut s = format!("# h {name}\n");
        for r in &self.rows {
            let e = col(r);
            if e.is_finite() {
                let _ = writeln!(s, "{:e} {:e}", r.h, e);
            }
        }
        s
    }

    /// `sweep.csv`, `summary.txt` and one `.dat` file per error curve.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        write_text(&dir.join("sweep.csv"), &self.to_csv())?;
        write_text(&dir.join("summary.txt"), &self.summary())?;
        write_text(&dir.join("err_v.dat"), &self.curve_dat("err_v", |r| r.err_v))?;
        write_text(&dir.join("err_u1.dat"), &self.curve_dat("err_u1", |r| r.err_u1))?;
        write_text(
            &dir.join("err_xalpha.dat"),
            &self.curve_dat("err_xalpha", |r| r.err_xalpha),
        )
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::File {
        path: dir.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(h: f64, e: f64) -> SweepRow {
        SweepRow {
            h,
            err_v: e,
            err_u1: e / 2.0,
            err_xalpha: f64::NAN,
            unwrap_abort: None,
            g_max_abs: 0,
            mass_drift: 0.0,
            energy_drift: 0.0,
            wall_s: 1.25,
        }
    }

    #[test]
    fn exact_power_law() {
        let h = [0.2, 0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        let f = fit_loglog(&h, &e).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.constant - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(f.rate_established());
    }

    #[test]
    fn noisy_fit_is_flagged() {
        let f = fit_loglog(&[0.2, 0.1, 0.05], &[1.0, 0.1, 1.0]).unwrap();
        assert!(f.residual > RATE_RESIDUAL_LIMIT);
        assert!(!f.rate_established());
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit_loglog(&[0.2, 0.1], &[1.0, 0.5]),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            fit_loglog(&[0.2, 0.1, 0.05], &[1.0, 0.0, 0.5]),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            fit_loglog(&[0.1, 0.1, 0.1], &[1.0, 0.5, 0.2]),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let rep = SweepReport::new(vec![row(0.2, 0.4), row(0.1, 0.2), row(0.05, 0.1)], false);
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "h,err_v,err_u1,err_xalpha,slope_v_running,mass_drift,energy_drift,wall_s"
        );
        assert_eq!(lines.len(), 4);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[4], "nan");
        assert_eq!(first[3], "nan");
        let slope: f64 = lines[3].split(',').nth(4).unwrap().parse().unwrap();
        assert!((slope - 1.0).abs() < 1e-12);
        assert!((rep.fit_u1.unwrap().slope - 1.0).abs() < 1e-12);
        assert!(rep.fit_xalpha.is_none());
        assert!(rep.summary().contains("err_u1 < err_v at 3 of 3"));
    }

    #[test]
    fn degenerate_tag() {
        let rep = SweepReport::new(vec![row(0.2, 1e-12), row(0.1, 3e-12), row(0.05, 2e-12)], true);
        assert!(rep.summary().contains("[degenerate]"));
    }

    #[test]
    fn dat_skips_missing() {
        let rep = SweepReport::new(vec![row(0.2, 0.4), row(0.1, 0.2), row(0.05, 0.1)], false);
        assert_eq!(rep.curve_dat("err_xalpha", |r| r.err_xalpha).lines().count(), 1);
        assert_eq!(rep.curve_dat("err_v", |r| r.err_v).lines().count(), 4);
    }

    proptest! {
        #[test]
        fn recovers_power_laws(p in -1.0f64..3.0, c in 1e-3f64..1e3) {
            let h = [0.3, 0.17, 0.08, 0.05, 0.021];
            let e: Vec<f64> = h.iter().map(|v: &f64| c * v.powf(p)).collect();
            let f = fit_loglog(&h, &e).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
            prop_assert!((f.constant / c - 1.0).abs() < 1e-9);
        }

        #[test]
        fn slope_invariant_under_scaling(s in 1e-6f64..1e6) {
            let h = [0.2, 0.1, 0.05, 0.025];
            let e = [0.9, 0.7, 0.2, 0.15];
            let es: Vec<f64> = e.iter().map(|v| v * s).collect();
            let a = fit_loglog(&h, &e).unwrap();
            let b = fit_loglog(&h, &es).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
            prop_assert!((a.residual - b.residual).abs() < 1e-9);
        }
    }
}
