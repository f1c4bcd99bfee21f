//! Residuals of the quasi-Einstein equations, the Kim-Kim constant and Einstein
//! assemblies with a second fiber.

use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::{grad_norm_base_at_xi, laplacian_base_at_xi, mixed_hessian, Field, PointJets};
use crate::error::{Error, Result};
use crate::geometry::WarpedSpec;
use crate::ode::ImplicitRun;

/// Default number of evenly spaced samples over the central 80% of the domain.
pub const DEFAULT_SAMPLES: usize = 101;

/// Tolerance on the spread of the Kim-Kim trace, relative to `1 + |mean|`.
pub const MU_SPREAD_TOLERANCE: f64 = 1e-8;

/// Tolerance between the certified Kim-Kim constant and the second fiber's constant.
pub const ASSEMBLY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    /// Closed-form families.
    #[default]
    Analytic,
    /// Integrated families.
    Numeric,
}

impl ToleranceProfile {
    pub fn tolerance(self) -> f64 {
        match self {
            ToleranceProfile::Analytic => 1e-9,
            ToleranceProfile::Numeric => 1e-6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ToleranceProfile::Analytic => "analytic",
            ToleranceProfile::Numeric => "numeric",
        }
    }
}

impl FromStr for ToleranceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(ToleranceProfile::Analytic),
            "numeric" => Ok(ToleranceProfile::Numeric),
            other => Err(Error::InvalidRequest(format!(
                "unknown tolerance profile `{other}` (expected analytic or numeric)"
            ))),
        }
    }
}

impl fmt::Display for ToleranceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest absolute residual of one equation group and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualStat {
    pub max_abs: f64,
    pub argmax_xi: f64,
}

impl ResidualStat {
    fn record(&mut self, value: f64, xi: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidSpec(format!("non-finite residual at xi = {xi}")));
        }
        if value.abs() > self.max_abs {
            self.max_abs = value.abs();
            self.argmax_xi = xi;
        }
        Ok(())
    }
}

/// Left-minus-right of the three PDE groups at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResiduals {
    /// Entry `(i, j)`, `i != j`; the diagonal is unused and zero.
    pub offdiag: DMatrix<f64>,
    pub diag: Vec<f64>,
    pub fiber: f64,
}

/// The three PDE groups at `point`. For `m = 1` the fiber equation is the reduced
/// form with right-hand side `rho f h`.
pub fn pde_residuals_at(spec: &WarpedSpec, point: &[f64]) -> Result<PdeResiduals> {
    let p = PointJets::at(spec, point)?;
    let n = spec.n();
    let nf = n as f64;
    let m = spec.m() as f64;
    let r = spec.r();
    let (f, phi, h) = (p.f.value, p.phi.value, p.h.value);
    let (df, dp, dh) = (
        |i| p.d(Field::F, i),
        |i| p.d(Field::Phi, i),
        |i| p.d(Field::H, i),
    );
    let (ddf, ddp, ddh) = (
        |i, j| p.dd(Field::F, i, j),
        |i, j| p.dd(Field::Phi, i, j),
        |i, j| p.dd(Field::H, i, j),
    );

    let mut offdiag = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            offdiag[(i, j)] = (nf - 2.0) * f * h * ddp(i, j)
                - r * f * phi * ddh(i, j)
                - m * h * phi * ddf(i, j)
                - m * h * dp(i) * df(j)
                - m * h * dp(j) * df(i)
                - r * f * dp(i) * dh(j)
                - r * f * dp(j) * dh(i);
        }
    }

    let sum: f64 = (0..n)
        .map(|k| {
            p.eps[k]
                * (f * h * phi * ddp(k, k) - (nf - 1.0) * f * h * dp(k).powi(2)
                    + m * h * phi * dp(k) * df(k)
                    + r * f * phi * dp(k) * dh(k))
        })
        .sum();
    let diag = (0..n)
        .map(|i| {
            phi * ((nf - 2.0) * f * h * ddp(i, i)
                - r * f * phi * ddh(i, i)
                - m * h * phi * ddf(i, i)
                - 2.0 * m * h * dp(i) * df(i)
                - 2.0 * r * f * dp(i) * dh(i))
                + p.eps[i] * sum
                - p.eps[i] * spec.rho() * f * h
        })
        .collect();

    let fiber = if spec.m() == 1 {
        let lhs: f64 = (0..n)
            .map(|k| {
                p.eps[k]
                    * (-h * phi * phi * ddf(k, k) + (nf - 2.0) * h * phi * dp(k) * df(k)
                        - r * phi * phi * df(k) * dh(k))
            })
            .sum();
        lhs - spec.rho() * f * h
    } else {
        let lhs: f64 = (0..n)
            .map(|k| {
                p.eps[k]
                    * (-f * h * phi * phi * ddf(k, k) + (nf - 2.0) * f * h * phi * dp(k) * df(k)
                        - (m - 1.0) * h * phi * phi * df(k).powi(2)
                        - r * f * phi * phi * df(k) * dh(k))
            })
            .sum();
        lhs - h * (spec.rho() * f * f - spec.lambda_f())
    };

    Ok(PdeResiduals { offdiag, diag, fiber })
}

/// Residuals of the reduced ODE system at `xi`. `second` and `third` are absent on a
/// null direction, where only the first equation survives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResiduals {
    pub first: f64,
    pub second: Option<f64>,
    pub third: Option<f64>,
}

impl OdeResiduals {
    pub fn max_abs(&self) -> f64 {
        [Some(self.first), self.second, self.third]
            .into_iter()
            .flatten()
            .fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn ode_residuals_at(spec: &WarpedSpec, xi: f64) -> Result<OdeResiduals> {
    let p = PointJets::at_xi(spec, xi)?;
    let (f, phi, h) = (p.f, p.phi, p.h);
    let nf = spec.n() as f64;
    let m = spec.m() as f64;
    let r = spec.r();
    let first = (nf - 2.0) * f.value * h.value * phi.d2
        - r * f.value * phi.value * h.d2
        - m * h.value * phi.value * f.d2
        - 2.0 * m * h.value * phi.d1 * f.d1
        - 2.0 * r * f.value * phi.d1 * h.d1;
    let class = spec.class();
    if class.is_null() {
        if spec.rho() != 0.0 || spec.lambda_f() != 0.0 {
            return Err(Error::InvalidSpec("null direction requires rho = lambda_F = 0".into()));
        }
        return Ok(OdeResiduals {
            first,
            second: None,
            third: None,
        });
    }
    let e = class.sign();
    let second = e
        * (f.value * h.value * phi.value * phi.d2 - (nf - 1.0) * f.value * h.value * phi.d1 * phi.d1
            + m * h.value * phi.value * phi.d1 * f.d1
            + r * f.value * phi.value * phi.d1 * h.d1)
        - spec.rho() * f.value * h.value;
    let phi2 = phi.value * phi.value;
    let third = if spec.m() == 1 {
        e * (-h.value * phi2 * f.d2 + (nf - 2.0) * h.value * phi.value * phi.d1 * f.d1
            - r * phi2 * f.d1 * h.d1)
            - spec.rho() * f.value * h.value
    } else {
        e * (-f.value * h.value * phi2 * f.d2 + (nf - 2.0) * f.value * h.value * phi.value * phi.d1 * f.d1
            - (m - 1.0) * h.value * phi2 * f.d1 * f.d1
            - r * f.value * phi2 * f.d1 * h.d1)
            - h.value * (spec.rho() * f.value * f.value - spec.lambda_f())
    };
    Ok(OdeResiduals {
        first,
        second: Some(second),
        third: Some(third),
    })
}

fn require_samples(xis: &[f64]) -> Result<()> {
    if xis.is_empty() {
        return Err(Error::InvalidRequest("empty sample set".into()));
    }
    Ok(())
}

/// PDE section of a report.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PdeSection {
    pub pde_offdiag: ResidualStat,
    pub pde_diag: ResidualStat,
    pub pde_fiber: ResidualStat,
}

/// Evaluates the PDE groups at one base point per sample, placed on the level set of
/// each `xi` away from the coordinate axes.
pub fn residual_pde(spec: &WarpedSpec, xis: &[f64]) -> Result<PdeSection> {
    require_samples(xis)?;
    let mut out = PdeSection::default();
    for (idx, &xi) in xis.iter().enumerate() {
        let point = spec.direction().point_on_level(xi, idx);
        let res = pde_residuals_at(spec, &point)?;
        for v in res.offdiag.iter() {
            out.pde_offdiag.record(*v, xi)?;
        }
        for v in &res.diag {
            out.pde_diag.record(*v, xi)?;
        }
        out.pde_fiber.record(res.fiber, xi)?;
    }
    Ok(out)
}

pub fn residual_ode(spec: &WarpedSpec, xis: &[f64]) -> Result<ResidualStat> {
    require_samples(xis)?;
    let mut out = ResidualStat::default();
    for &xi in xis {
        out.record(ode_residuals_at(spec, xi)?.max_abs(), xi)?;
    }
    Ok(out)
}

/// Residual of the reduced system measured on an integration table alone.
///
/// First log-derivatives come from five-point central differences of the `log`
/// columns and second-derivative ratios from differences of `x` and `xz`, so the
/// value reflects integration error rather than the algebraic closure of the flow.
/// Equations are divided by `f h phi` (first) and `f h phi^2` (others); the run has
/// `rho = lambda_F = 0`, so the causal sign only flips the last two.
pub fn residual_table(run: &ImplicitRun) -> Result<ResidualStat> {
    let s = &run.states;
    if s.len() < 5 {
        return Err(Error::InvalidRequest(format!(
            "table residual needs at least five nodes, got {}",
            s.len()
        )));
    }
    let h = run.step;
    let d1 = |col: &dyn Fn(usize) -> f64, i: usize| {
        (-col(i + 2) + 8.0 * col(i + 1) - 8.0 * col(i - 1) + col(i - 2)) / (12.0 * h)
    };
    let sys = &run.system;
    let (nf, m, r, k) = (sys.n as f64, sys.m as f64, sys.r, sys.k);
    let mut out = ResidualStat::default();
    for i in 2..s.len() - 2 {
        let pf = d1(&|j| s[j].logf, i);
        let pp = d1(&|j| s[j].logphi, i);
        let ph = d1(&|j| s[j].logh, i);
        let f2 = d1(&|j| s[j].x, i) + pf * pf;
        let p2 = k * d1(&|j| s[j].x, i) + pp * pp;
        let h2 = d1(&|j| s[j].y(), i) + ph * ph;
        let e1 = (nf - 2.0) * p2 - r * h2 - m * f2 - 2.0 * m * pp * pf - 2.0 * r * pp * ph;
        let e2 = p2 - (nf - 1.0) * pp * pp + m * pp * pf + r * pp * ph;
        let e3 = -f2 + (nf - 2.0) * pp * pf - (m - 1.0) * pf * pf - r * pf * ph;
        let worst = e1.abs().max(e2.abs()).max(e3.abs());
        out.record(worst, s[i].xi)?;
    }
    Ok(out)
}

/// One sample of the Kim-Kim trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSample {
    pub xi: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuTrace {
    pub samples: Vec<MuSample>,
    pub mean: f64,
    pub spread: f64,
    pub constant: bool,
}

/// `h Lap h + (r-1)|grad h|^2 + rho h^2` on the base `R^n x_f F^m`.
pub fn kimkim_mu_at(spec: &WarpedSpec, xi: f64) -> Result<f64> {
    let h = spec.h().at(xi)?.value;
    let lap = laplacian_base_at_xi(spec, Field::H, xi)?;
    let grad = grad_norm_base_at_xi(spec, Field::H, xi)?;
    Ok(h * lap + (spec.r() - 1.0) * grad + spec.rho() * h * h)
}

/// The Kim-Kim trace without checking that the spec is quasi-Einstein.
pub fn kimkim_mu_trace(spec: &WarpedSpec, xis: &[f64]) -> Result<MuTrace> {
    require_samples(xis)?;
    let mut samples = Vec::with_capacity(xis.len());
    for &xi in xis {
        let mu = kimkim_mu_at(spec, xi)?;
        if !mu.is_finite() {
            return Err(Error::InvalidSpec(format!("non-finite Kim-Kim value at xi = {xi}")));
        }
        samples.push(MuSample { xi, mu });
    }
    let mean = samples.iter().map(|s| s.mu).sum::<f64>() / samples.len() as f64;
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.mu), hi.max(s.mu)));
    let spread = hi - lo;
    Ok(MuTrace {
        samples,
        mean,
        spread,
        constant: spread <= MU_SPREAD_TOLERANCE * (1.0 + mean.abs()),
    })
}

/// The Kim-Kim trace of a spec certified quasi-Einstein under `profile`.
pub fn kimkim_mu(spec: &WarpedSpec, xis: &[f64], profile: ToleranceProfile) -> Result<MuTrace> {
    let report = verify(spec, xis, profile)?;
    if !report.pass() {
        return Err(Error::Precondition(format!(
            "spec is not quasi-Einstein at the {profile} tolerance: {}",
            report.violated.join(", ")
        )));
    }
    Ok(report.mu_trace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Full verification output for one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub profile: ToleranceProfile,
    pub tolerance: f64,
    pub samples: usize,
    pub causal_class: i8,
    pub pde_offdiag: ResidualStat,
    pub pde_diag: ResidualStat,
    pub pde_fiber: ResidualStat,
    pub ode_system: ResidualStat,
    /// Table-based residual, present for integrated families.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ode_table: Option<ResidualStat>,
    pub kimkim_mu_trace: Vec<MuSample>,
    pub mu_mean: f64,
    pub mu_spread: f64,
    pub mu_constant: bool,
    pub violated: Vec<String>,
    pub verdict: Verdict,
}

/// Runs every residual on `xis` and derives the verdict from `profile`.
pub fn verify(spec: &WarpedSpec, xis: &[f64], profile: ToleranceProfile) -> Result<ResidualReport> {
    let pde = residual_pde(spec, xis)?;
    let ode = residual_ode(spec, xis)?;
    let mu = kimkim_mu_trace(spec, xis)?;
    let tol = profile.tolerance();
    let mut report = ResidualReport {
        profile,
        tolerance: tol,
        samples: xis.len(),
        causal_class: i8::from(spec.class()),
        pde_offdiag: pde.pde_offdiag,
        pde_diag: pde.pde_diag,
        pde_fiber: pde.pde_fiber,
        ode_system: ode,
        ode_table: None,
        kimkim_mu_trace: mu.samples,
        mu_mean: mu.mean,
        mu_spread: mu.spread,
        mu_constant: mu.constant,
        violated: Vec::new(),
        verdict: Verdict::Pass,
    };
    report.settle();
    Ok(report)
}

/// [`verify`] plus the table residual of the run the spec was built from.
pub fn verify_integrated(
    spec: &WarpedSpec,
    run: &ImplicitRun,
    xis: &[f64],
    profile: ToleranceProfile,
) -> Result<ResidualReport> {
    let mut report = verify(spec, xis, profile)?;
    report.ode_table = Some(residual_table(run)?);
    report.settle();
    Ok(report)
}

impl ResidualReport {
    fn settle(&mut self) {
        let tol = self.tolerance;
        let mut violated = Vec::new();
        for (name, stat) in self.stats() {
            if !(stat.max_abs <= tol) {
                violated.push(name.to_string());
            }
        }
        self.verdict = if violated.is_empty() { Verdict::Pass } else { Verdict::Fail };
        self.violated = violated;
    }

    pub fn stats(&self) -> Vec<(&'static str, ResidualStat)> {
        let mut v = vec![
            ("pde_offdiag", self.pde_offdiag),
            ("pde_diag", self.pde_diag),
            ("pde_fiber", self.pde_fiber),
            ("ode_system", self.ode_system),
        ];
        if let Some(t) = self.ode_table {
            v.push(("ode_table", t));
        }
        v
    }

    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest residual over every equation group.
    pub fn max_residual(&self) -> f64 {
        self.stats().iter().fold(0.0, |a, (_, s)| a.max(s.max_abs))
    }

    pub fn mu_trace(&self) -> MuTrace {
        MuTrace {
            samples: self.kimkim_mu_trace.clone(),
            mean: self.mu_mean,
            spread: self.mu_spread,
            constant: self.mu_constant,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRequest(format!("malformed report: {e}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "profile   {} (tolerance {:e})", self.profile, self.tolerance);
        let _ = writeln!(out, "samples   {}", self.samples);
        let _ = writeln!(out, "{:<12} {:>24} {:>24}", "equation", "max |residual|", "at xi");
        for (name, s) in self.stats() {
            let _ = writeln!(out, "{:<12} {:>24.6e} {:>24.12}", name, s.max_abs, s.argmax_xi);
        }
        let _ = writeln!(
            out,
            "mu          mean {:.12e}  spread {:.3e}  constant {}",
            self.mu_mean, self.mu_spread, self.mu_constant
        );
        let verdict = match self.verdict {
            Verdict::Pass => "PASS".to_string(),
            Verdict::Fail => format!("FAIL ({})", self.violated.join(", ")),
        };
        let _ = writeln!(out, "verdict   {verdict}");
        out
    }

    pub fn write_mu_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "xi,mu")?;
        for s in &self.kimkim_mu_trace {
            writeln!(w, "{},{}", s.xi, s.mu)?;
        }
        Ok(())
    }
}

/// Certificate that `(R^n x_f F1^m) x_h F2^r` is Einstein with constant `rho = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinsteinCertificate {
    pub rho: f64,
    pub fiber2_dim: u32,
    pub fiber2_mu: f64,
    pub certified_mu: f64,
    pub mu_spread: f64,
    pub max_residual: f64,
    pub samples: usize,
}

/// Checks the three conditions for the second warping: base quasi-Einstein with
/// `rho = 0`, a second fiber of dimension `r` that is Einstein with constant
/// `fiber2_mu`, and `fiber2_mu` equal to the Kim-Kim constant of the base.
pub fn einstein_assembly(
    spec: &WarpedSpec,
    fiber2_dim: u32,
    fiber2_mu: f64,
    xis: &[f64],
    profile: ToleranceProfile,
) -> Result<EinsteinCertificate> {
    if spec.rho() != 0.0 {
        return Err(Error::Precondition(format!(
            "assembly needs rho = 0, got {}",
            spec.rho()
        )));
    }
    let exponent = spec.r_exponent();
    if !exponent.is_integral {
        return Err(Error::Precondition(format!(
            "second fiber dimension must equal r, which is not an integer ({})",
            exponent.value
        )));
    }
    if f64::from(fiber2_dim) != exponent.value {
        return Err(Error::InvalidRequest(format!(
            "second fiber dimension {fiber2_dim} differs from r = {}",
            exponent.value
        )));
    }
    if !fiber2_mu.is_finite() {
        return Err(Error::InvalidRequest("fiber constant must be finite".into()));
    }
    let report = verify(spec, xis, profile)?;
    if !report.pass() {
        return Err(Error::Precondition(format!(
            "spec is not quasi-Einstein at the {profile} tolerance: {}",
            report.violated.join(", ")
        )));
    }
    if !report.mu_constant {
        return Err(Error::Precondition(format!(
            "Kim-Kim trace is not constant (spread {:e})",
            report.mu_spread
        )));
    }
    let mismatch = (report.mu_mean - fiber2_mu).abs();
    if !(mismatch <= ASSEMBLY_TOLERANCE) {
        return Err(Error::AssemblyRejected {
            certified: report.mu_mean,
            supplied: fiber2_mu,
            mismatch,
        });
    }
    Ok(EinsteinCertificate {
        rho: 0.0,
        fiber2_dim,
        fiber2_mu,
        certified_mu: report.mu_mean,
        mu_spread: report.mu_spread,
        max_residual: report.max_residual(),
        samples: report.samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedHessianReport {
    pub pass: bool,
    pub max_abs: f64,
}

/// Asserts the mixed block `h_{,x_i y_j} - (f_{,x_i}/f) h_{,y_j}` vanishes exactly.
/// `fiber_slope` injects a potential `h(xi) + s.y`; families use all zeros.
pub fn mixed_hessian_check(spec: &WarpedSpec, xis: &[f64], fiber_slope: &[f64]) -> Result<MixedHessianReport> {
    require_samples(xis)?;
    let mut max_abs: f64 = 0.0;
    for (idx, &xi) in xis.iter().enumerate() {
        let point = spec.direction().point_on_level(xi, idx);
        let block = mixed_hessian(spec, &point, fiber_slope)?;
        max_abs = block.iter().fold(max_abs, |a, v| a.max(v.abs()));
    }
    Ok(MixedHessianReport {
        pass: max_abs == 0.0,
        max_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{theorem4_family, FamilyParams};
    use crate::geometry::{Profile, Signature, SpecParts};

    fn constant_spec(m: usize) -> WarpedSpec {
        WarpedSpec::new(SpecParts {
            m,
            r: 2.0,
            rho: 0.0,
            lambda_f: 0.0,
            signature: Signature::new(vec![-1, 1, 1]).unwrap(),
            alpha: vec![0.3, 1.0, 0.2],
            f: Profile::constant("f", 2.0),
            phi: Profile::constant("phi", 0.5),
            h: Profile::constant("h", 3.0),
        })
        .unwrap()
    }

    fn theorem4_spec(lambda_f: f64) -> WarpedSpec {
        let fam = theorem4_family(3, 2, 2.0, &FamilyParams::new(1.0)).unwrap();
        WarpedSpec::new(SpecParts {
            m: 2,
            r: 2.0,
            rho: 0.0,
            lambda_f,
            signature: Signature::new(vec![1, 1, 1]).unwrap(),
            alpha: vec![1.0, 1.0, 0.0],
            f: fam.f,
            phi: fam.phi,
            h: fam.h,
        })
        .unwrap()
    }

    #[test]
    fn constants_have_zero_residuals() {
        for m in [1, 2] {
            let spec = constant_spec(m);
            let xis = [-1.0, 0.0, 2.0];
            let report = verify(&spec, &xis, ToleranceProfile::Analytic).unwrap();
            assert_eq!(report.max_residual(), 0.0);
            assert!(report.pass());
            assert!(report.kimkim_mu_trace.iter().all(|s| s.mu == 0.0));
        }
    }

    #[test]
    fn theorem4_passes_and_lambda_perturbation_fails() {
        let spec = theorem4_spec(0.0);
        let xis = spec.default_samples(DEFAULT_SAMPLES).unwrap();
        let report = verify(&spec, &xis, ToleranceProfile::Analytic).unwrap();
        assert!(report.pass(), "{}", report.to_text());

        let bad = theorem4_spec(0.1);
        let report = verify(&bad, &xis, ToleranceProfile::Analytic).unwrap();
        assert!(!report.pass());
        assert!(report.violated.contains(&"pde_fiber".to_string()));
        // residual is exactly h * 0.1 up to the baseline
        for &xi in &xis {
            let point = bad.direction().point_on_level(xi, 0);
            let fiber = pde_residuals_at(&bad, &point).unwrap().fiber;
            let h = bad.h().value(xi).unwrap();
            assert!((fiber - 0.1 * h).abs() < 1e-9 * (1.0 + h));
        }
    }

    #[test]
    fn empty_samples_rejected() {
        let spec = constant_spec(2);
        assert!(matches!(
            verify(&spec, &[], ToleranceProfile::Analytic),
            Err(Error::InvalidRequest(_))
        ));
    }

    #[test]
    fn assembly_matches_only_the_certified_constant() {
        let spec = theorem4_spec(0.0);
        let xis = spec.default_samples(DEFAULT_SAMPLES).unwrap();
        let cert = einstein_assembly(&spec, 2, 0.0, &xis, ToleranceProfile::Analytic).unwrap();
        assert!(cert.certified_mu.abs() < 1e-8);
        match einstein_assembly(&spec, 2, 1.0, &xis, ToleranceProfile::Analytic) {
            Err(Error::AssemblyRejected { mismatch, .. }) => assert!((mismatch - 1.0).abs() < 1e-8),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(einstein_assembly(&spec, 3, 0.0, &xis, ToleranceProfile::Analytic).is_err());
    }

    #[test]
    fn report_json_round_trips() {
        let spec = theorem4_spec(0.0);
        let xis = spec.default_samples(11).unwrap();
        let report = verify(&spec, &xis, ToleranceProfile::Analytic).unwrap();
        let text = report.to_json();
        let again = ResidualReport::from_json(&text).unwrap().to_json();
        assert_eq!(text, again);
    }

    #[test]
    fn profile_names_parse() {
        assert_eq!("Numeric".parse::<ToleranceProfile>().unwrap(), ToleranceProfile::Numeric);
        assert!("loose".parse::<ToleranceProfile>().is_err());
    }
}
