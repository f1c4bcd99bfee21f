//! Deterministic parameter sweeps over the power-law families.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{theorem4_family, theorem5_family, Branch, FamilyParams};
use crate::geometry::{Signature, SpecParts, WarpedSpec};
use crate::verifier::{verify, ToleranceProfile, DEFAULT_SAMPLES};

/// Grid axes; an axis left empty takes its default single value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridAxes {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    pub branch: Vec<Branch>,
}

fn parse_list<T>(key: &str, values: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    values
        .split(',')
        .map(|v| {
            parse(v.trim()).ok_or_else(|| Error::InvalidRequest(format!("bad value `{v}` for grid axis `{key}`")))
        })
        .collect()
}

impl GridAxes {
    /// Adds one `KEY=v1,v2,...` axis.
    pub fn add(&mut self, arg: &str) -> Result<()> {
        let (key, values) = arg
            .split_once('=')
            .ok_or_else(|| Error::InvalidRequest(format!("grid axis `{arg}` is not KEY=v1,v2,...")))?;
        let key = key.trim();
        if values.trim().is_empty() {
            return Err(Error::InvalidRequest(format!("grid axis `{key}` has no values")));
        }
        let taken = match key {
            "n" => !self.n.is_empty(),
            "m" => !self.m.is_empty(),
            "k" => !self.k.is_empty(),
            "r" => !self.r.is_empty(),
            "branch" => !self.branch.is_empty(),
            _ => {
                return Err(Error::InvalidRequest(format!(
                    "unknown grid axis `{key}` (expected n, m, k, r or branch)"
                )))
            }
        };
        if taken {
            return Err(Error::InvalidRequest(format!("grid axis `{key}` given twice")));
        }
        match key {
            "n" => self.n = parse_list(key, values, |v| v.parse().ok())?,
            "m" => self.m = parse_list(key, values, |v| v.parse().ok())?,
            "k" => self.k = parse_list(key, values, |v| v.parse().ok())?,
            "r" => self.r = parse_list(key, values, |v| v.parse().ok())?,
            _ => {
                self.branch = parse_list(key, values, |v| match v {
                    "plus" | "+" => Some(Branch::Plus),
                    "minus" | "-" => Some(Branch::Minus),
                    _ => None,
                })?
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty() && self.m.is_empty() && self.k.is_empty() && self.r.is_empty() && self.branch.is_empty()
    }

    /// Cells in lexicographic order of `(n, m, k, r, branch)`.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.is_empty() {
            return Err(Error::InvalidRequest("empty grid".into()));
        }
        fn or<T: Clone>(v: &[T], d: T) -> Vec<T> {
            if v.is_empty() {
                vec![d]
            } else {
                v.to_vec()
            }
        }
        let (ns, ms, ks, rs, bs) = (
            or(&self.n, 3),
            or(&self.m, 1),
            or(&self.k, 1.0),
            or(&self.r, 2.0),
            or(&self.branch, Branch::Plus),
        );
        let mut cells = Vec::new();
        for &n in &ns {
            for &m in &ms {
                for &k in &ks {
                    for &r in &rs {
                        for &branch in &bs {
                            cells.push(Cell { n, m, k, r, branch });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub k: f64,
    pub r: f64,
    pub branch: Branch,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub k: f64,
    pub r: f64,
    pub branch: Branch,
    pub family: &'static str,
    pub admissible: bool,
    #[serde(rename = "N")]
    pub n_root: Option<f64>,
    pub max_residual: Option<f64>,
    pub mu_mean: Option<f64>,
    pub verdict: &'static str,
    pub reason: String,
}

/// Spacelike direction `(1, 1, 0, ..., 0)/sqrt(2)` in Euclidean signature, so every
/// equation group carries nonzero terms.
pub fn sweep_spec(cell: &Cell) -> Result<(WarpedSpec, Option<f64>)> {
    let params = FamilyParams::new(cell.k).with_branch(cell.branch);
    let fam = if cell.r == 1.0 {
        theorem5_family(cell.n, cell.m, &params)?
    } else {
        theorem4_family(cell.n, cell.m, cell.r, &params)?
    };
    let mut alpha = vec![0.0; cell.n];
    alpha[0] = 1.0;
    if cell.n > 1 {
        alpha[1] = 1.0;
    }
    let spec = WarpedSpec::new(SpecParts {
        m: cell.m,
        r: cell.r,
        rho: 0.0,
        lambda_f: 0.0,
        signature: Signature::euclidean(cell.n)?,
        alpha,
        f: fam.f,
        phi: fam.phi,
        h: fam.h,
    })?;
    Ok((spec, fam.constants.n_root))
}

pub fn run_sweep(axes: &GridAxes, samples: usize, profile: ToleranceProfile) -> Result<Vec<SweepRow>> {
    let cells = axes.cells()?;
    Ok(cells.iter().map(|c| sweep_cell(c, samples, profile)).collect())
}

fn sweep_cell(cell: &Cell, samples: usize, profile: ToleranceProfile) -> SweepRow {
    let mut row = SweepRow {
        n: cell.n,
        m: cell.m,
        k: cell.k,
        r: cell.r,
        branch: cell.branch,
        family: if cell.r == 1.0 { "theorem5" } else { "theorem4" },
        admissible: false,
        n_root: None,
        max_residual: None,
        mu_mean: None,
        verdict: "inadmissible",
        reason: String::new(),
    };
    let (spec, n_root) = match sweep_spec(cell) {
        Ok(v) => v,
        Err(e) => {
            row.reason = e.to_string();
            return row;
        }
    };
    row.admissible = true;
    row.n_root = n_root;
    let result = spec
        .default_samples(samples)
        .and_then(|xis| verify(&spec, &xis, profile));
    match result {
        Ok(report) => {
            row.max_residual = Some(report.max_residual());
            row.mu_mean = Some(report.mu_mean);
            row.verdict = if report.pass() { "pass" } else { "fail" };
            row.reason = report.violated.join(" ");
        }
        Err(e) => {
            row.verdict = "error";
            row.reason = e.to_string();
        }
    }
    row
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)
            .map_err(|e| Error::InvalidRequest(format!("csv output failed: {e}")))?;
    }
    out.flush()
        .map_err(|e| Error::InvalidRequest(format!("csv output failed: {e}")))
}

/// Default sample count for sweeps.
pub const SWEEP_SAMPLES: usize = DEFAULT_SAMPLES;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_parse_and_order() {
        let mut axes = GridAxes::default();
        axes.add("k=0.5,1,2").unwrap();
        axes.add("r=2,3").unwrap();
        assert!(axes.add("k=1").is_err());
        assert!(axes.add("q=1").is_err());
        assert!(axes.add("n=").is_err());
        let cells = axes.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[0].k, cells[0].r), (0.5, 2.0));
        assert_eq!((cells[1].k, cells[1].r), (0.5, 3.0));
        assert!(GridAxes::default().cells().is_err());
    }

    #[test]
    fn inadmissible_cells_are_marked() {
        let mut axes = GridAxes::default();
        axes.add("r=0.5").unwrap();
        let rows = run_sweep(&axes, 11, ToleranceProfile::Analytic).unwrap();
        assert_eq!(rows[0].verdict, "inadmissible");
        assert!(rows[0].max_residual.is_none());
    }
}
