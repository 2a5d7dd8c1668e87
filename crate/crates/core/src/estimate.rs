//! W from measurements: ordinary least squares of total consumed power on
//! delivered signal power. Slope is W, intercept is the non-path power.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::Power;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerSample {
    pub p_signal: Power,
    pub p_total: Power,
}

impl PowerSample {
    pub fn from_watts(p_signal: f64, p_total: f64) -> Result<Self> {
        Ok(Self {
            p_signal: Power::from_watts(p_signal)?,
            p_total: Power::from_watts(p_total)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WasteFit {
    pub w: f64,
    pub p_non_path_w: f64,
    pub r_squared: f64,
    pub n_samples: usize,
    /// False when the slope is below 1 or the intercept is negative.
    pub physical: bool,
}

pub fn fit_waste_factor(samples: &[PowerSample]) -> Result<WasteFit> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 samples, got {n}")));
    }
    let nf = n as f64;
    let mx = samples.iter().map(|s| s.p_signal.watts()).sum::<f64>() / nf;
    let my = samples.iter().map(|s| s.p_total.watts()).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for s in samples {
        let dx = s.p_signal.watts() - mx;
        let dy = s.p_total.watts() - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * nf {
        return Err(Error::DegenerateFit("all p_signal values are equal".into()));
    }
    let w = sxy / sxx;
    let intercept = my - w * mx;
    let sse: f64 = samples
        .iter()
        .map(|s| {
            let r = s.p_total.watts() - (intercept + w * s.p_signal.watts());
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(WasteFit {
        w,
        p_non_path_w: intercept,
        r_squared,
        n_samples: n,
        physical: w >= 1.0 && intercept >= 0.0,
    })
}

#[derive(Clone, Copy)]
enum Unit {
    Watt,
    Dbm,
}

fn column(headers: &csv::StringRecord, base: &str) -> Option<(usize, Unit)> {
    headers.iter().enumerate().find_map(|(i, h)| {
        let h = h.trim();
        if h == format!("{base}_w") {
            Some((i, Unit::Watt))
        } else if h == format!("{base}_dbm") {
            Some((i, Unit::Dbm))
        } else {
            None
        }
    })
}

/// Parse a power log from any reader. `origin` names the source in errors.
pub fn read_power_log<R: Read>(reader: R, origin: &Path) -> Result<Vec<PowerSample>> {
    let err = |line: u64, message: String| Error::PowerLog {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(err(1, "empty file: header row required".into()));
    }
    let header_line = rdr.position().line().max(1);
    let (sig, sig_unit) = column(&headers, "p_signal")
        .ok_or_else(|| err(header_line, "missing column p_signal_w or p_signal_dbm".into()))?;
    let (tot, tot_unit) = column(&headers, "p_total")
        .ok_or_else(|| err(header_line, "missing column p_total_w or p_total_dbm".into()))?;

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |idx: usize, name: &str, unit: Unit| -> Result<Power> {
            let raw = record
                .get(idx)
                .ok_or_else(|| err(line, format!("missing value for column {name}")))?;
            let v: f64 = raw
                .parse()
                .map_err(|_| err(line, format!("column {name}: '{raw}' is not a number")))?;
            match unit {
                Unit::Watt => Power::from_watts(v)
                    .map_err(|_| err(line, format!("column {name}: power must be finite and ≥ 0, got {v}"))),
                Unit::Dbm if v.is_finite() => Ok(Power::from_dbm(v)),
                Unit::Dbm => Err(err(line, format!("column {name}: '{raw}' is not finite"))),
            }
        };
        samples.push(PowerSample {
            p_signal: cell(sig, &headers[sig], sig_unit)?,
            p_total: cell(tot, &headers[tot], tot_unit)?,
        });
    }
    if samples.is_empty() {
        return Err(err(header_line, "no data rows".into()));
    }
    Ok(samples)
}

pub fn load_power_log(path: impl AsRef<Path>) -> Result<Vec<PowerSample>> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let file = std::fs::File::open(&path)?;
    read_power_log(file, &path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage::total_consumed_power;
    use crate::units::LinearRatio;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn line(w: f64, p0: f64, xs: &[f64]) -> Vec<PowerSample> {
        xs.iter()
            .map(|&x| PowerSample::from_watts(x, w * x + p0).unwrap())
            .collect()
    }

    #[test]
    fn noiseless_ru_line() {
        let xs: Vec<f64> = (0..=6).map(|k| 20.0 * k as f64).collect();
        let f = fit_waste_factor(&line(3.5, 140.0, &xs)).unwrap();
        assert!((f.w - 3.5).abs() < 1e-12);
        assert!((f.p_non_path_w - 140.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.physical);
        assert_eq!(f.n_samples, 7);
    }

    #[test]
    fn two_points() {
        let s = [
            PowerSample::from_watts(0.0, 80.0).unwrap(),
            PowerSample::from_watts(120.0, 500.0).unwrap(),
        ];
        let f = fit_waste_factor(&s).unwrap();
        assert!((f.w - 3.5).abs() < 1e-12);
        assert!((f.p_non_path_w - 80.0).abs() < 1e-9);
    }

    #[test]
    fn noisy_fit_within_bounds() {
        let normal = Normal::new(0.0, 5.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<_> = (0..100)
            .map(|k| {
                let x = 120.0 * k as f64 / 99.0;
                PowerSample::from_watts(x, 3.5 * x + 140.0 + normal.sample(&mut rng)).unwrap()
            })
            .collect();
        let f = fit_waste_factor(&samples).unwrap();
        assert!((f.w - 3.5).abs() < 0.07);
        assert!((f.p_non_path_w - 140.0).abs() < 5.0);
        assert!(f.r_squared > 0.9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_waste_factor(&[]), Err(Error::DegenerateFit(_))));
        let one = [PowerSample::from_watts(1.0, 2.0).unwrap()];
        assert!(fit_waste_factor(&one).is_err());
        let flat = [
            PowerSample::from_watts(5.0, 2.0).unwrap(),
            PowerSample::from_watts(5.0, 9.0).unwrap(),
        ];
        assert!(matches!(fit_waste_factor(&flat), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn non_physical_flagged() {
        let f = fit_waste_factor(&line(0.5, 10.0, &[1.0, 2.0, 3.0])).unwrap();
        assert!(!f.physical);
        let f = fit_waste_factor(&line(2.0, -10.0, &[10.0, 20.0, 30.0])).unwrap();
        assert!(!f.physical);
    }

    fn parse(text: &str) -> Result<Vec<PowerSample>> {
        read_power_log(text.as_bytes(), Path::new("log.csv"))
    }

    #[test]
    fn parse_watts() {
        let s = parse("p_signal_w,p_total_w\n0,140\n10,175\n# note\n20,210\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].p_total.watts(), 210.0);
    }

    #[test]
    fn parse_dbm_and_extra_columns() {
        let s = parse("time_s, p_signal_dbm , p_total_w\n0,30,5\n1,40,12\n").unwrap();
        assert!((s[0].p_signal.watts() - 1.0).abs() < 1e-12);
        assert!((s[1].p_signal.watts() - 10.0).abs() < 1e-12);
        assert_eq!(s[1].p_total.watts(), 12.0);
    }

    #[test]
    fn parse_errors_name_lines() {
        let e = parse("p_signal_w,p_total_w\n1,2\n3,abc\n").unwrap_err();
        match e {
            Error::PowerLog { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("p_total_w"));
            }
            other => panic!("{other:?}"),
        }
        let e = parse("# header follows\np_signal_w,p_total_w\n1,2\n4,-1\n").unwrap_err();
        assert!(matches!(e, Error::PowerLog { line: 4, .. }), "{e:?}");
        assert!(matches!(parse("p_signal_w,total\n1,2\n"), Err(Error::PowerLog { .. })));
        assert!(parse("").is_err());
        assert!(parse("p_signal_w,p_total_w\n").is_err());
        assert!(parse("p_signal_w,p_total_w\n1,2,3\n").is_err());
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ru.csv");
        std::fs::write(&path, "p_signal_w,p_total_w\n0,80\n120,500\n").unwrap();
        let f = fit_waste_factor(&load_power_log(&path).unwrap()).unwrap();
        assert!((f.w - 3.5).abs() < 1e-12);
        assert!(load_power_log(dir.path().join("missing.csv")).is_err());
    }

    proptest! {
        #[test]
        fn recovers_generating_line(w0 in 1.0f64..20.0, p0 in 0.0f64..500.0, n in 2usize..40) {
            let samples: Vec<_> = (0..n)
                .map(|k| {
                    let x = Power::from_watts(3.0 * k as f64).unwrap();
                    let total = total_consumed_power(
                        LinearRatio::new(w0).unwrap(), x, Power::from_watts(p0).unwrap()).unwrap();
                    PowerSample { p_signal: x, p_total: total }
                })
                .collect();
            let f = fit_waste_factor(&samples).unwrap();
            prop_assert!((f.w - w0).abs() < 1e-9 * w0);
            prop_assert!((f.p_non_path_w - p0).abs() < 1e-7 * (1.0 + p0 + w0 * 3.0 * n as f64));
            prop_assert!((f.r_squared - 1.0).abs() < 1e-9);
        }

        #[test]
        fn affine_invariance(
            k in 0.01f64..100.0,
            pts in proptest::collection::vec((0.0f64..100.0, 0.0f64..1000.0), 3..30),
        ) {
            prop_assume!(pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-3));
            let base: Vec<_> = pts.iter().map(|&(x, y)| PowerSample::from_watts(x, y).unwrap()).collect();
            let scaled: Vec<_> = pts.iter().map(|&(x, y)| PowerSample::from_watts(k * x, k * y).unwrap()).collect();
            let a = fit_waste_factor(&base).unwrap();
            let b = fit_waste_factor(&scaled).unwrap();
            prop_assert!((a.w - b.w).abs() < 1e-8 * (1.0 + a.w.abs()));
            prop_assert!((k * a.p_non_path_w - b.p_non_path_w).abs() < 1e-7 * k * (1.0 + a.p_non_path_w.abs() + 100.0 * a.w.abs()));
        }

        #[test]
        fn r_squared_below_one_with_residuals(w in 1.0f64..10.0, p0 in 0.0f64..100.0, bump in 0.01f64..10.0) {
            let mut s = line(w, p0, &[0.0, 10.0, 20.0, 30.0]);
            prop_assert!((fit_waste_factor(&s).unwrap().r_squared - 1.0).abs() < 1e-9);
            s[1].p_total = Power::from_watts(s[1].p_total.watts() + bump).unwrap();
            prop_assert!(fit_waste_factor(&s).unwrap().r_squared < 1.0 - 1e-9);
        }
    }
}
