use std::path::Path;

use anyhow::{bail, Context, Result};

use tifiss_core::adapt::fitted_slope;

/// Relative difference above which a row is flagged.
const FLAG_TOL: f64 = 1e-6;
/// Largest accepted difference between the fitted slopes.
pub const SLOPE_TOL: f64 = 0.1;

pub struct History {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl History {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect::<Result<_>>()?;
        Ok(History { header, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn numbers(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[col].parse::<f64>().with_context(|| format!("row {}: `{}` is not a number", i + 1, r[col])))
            .collect()
    }

    /// Slope of the estimate column against `dofs` over the final half.
    pub fn slope(&self) -> Result<f64> {
        let x = self.column("dofs").context("history has no `dofs` column")?;
        let y = ["eta", "mu_zeta"].iter().find_map(|c| self.column(c)).context("history has no `eta` or `mu_zeta` column")?;
        fitted_slope(&self.numbers(x)?, &self.numbers(y)?).context("too few rows to fit a slope")
    }
}

fn rel_diff(a: &str, b: &str) -> f64 {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        }
        _ => {
            if a == b {
                0.0
            } else {
                1.0
            }
        }
    }
}

pub struct Comparison {
    /// Largest relative difference per common row and whether it is flagged.
    pub rows: Vec<(f64, bool)>,
    pub slopes: (f64, f64),
    pub lengths: (usize, usize),
}

impl Comparison {
    pub fn slopes_agree(&self) -> bool {
        (self.slopes.0 - self.slopes.1).abs() <= SLOPE_TOL
    }
}

/// Compares two histories with the same columns. Timing columns are skipped.
pub fn compare(a: &History, b: &History) -> Result<Comparison> {
    if a.header != b.header {
        bail!("schema mismatch: [{}] vs [{}]", a.header.join(","), b.header.join(","));
    }
    let cols: Vec<usize> = (0..a.header.len()).filter(|&c| !a.header[c].starts_with("t_")).collect();
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| {
            let d = cols.iter().map(|&c| rel_diff(&ra[c], &rb[c])).fold(0.0, f64::max);
            (d, d > FLAG_TOL)
        })
        .collect();
    Ok(Comparison {
        rows,
        slopes: (a.slope()?, b.slope()?),
        lengths: (a.rows.len(), b.rows.len()),
    })
}
