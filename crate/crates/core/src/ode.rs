//! Numerical families: the implicit `(x, z)` system and the linear null-direction
//! equation for `h`, both integrated by classical RK4 on a fixed grid with
//! step-halving error control.

use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{coeff_a, coeff_b, DerivedConstants, FamilySolution};
use crate::geometry::{Interval, Profile};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub step: f64,
    pub tolerance: f64,
    pub max_steps: usize,
    pub singularity_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tolerance: 1e-8,
            max_steps: 10_000_000,
            singularity_guard: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.tolerance > 0.0
            && self.singularity_guard > 0.0
            && self.max_steps > 0
            && self.step.is_finite();
        if !ok {
            return Err(Error::InvalidRequest(format!("integrator settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

// Deepest step subdivision before a step counts as underflow.
const MAX_DEPTH: u32 = 30;

fn rk4<const D: usize, F>(rhs: &F, t: f64, y: &[f64; D], h: f64) -> [f64; D]
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let shift = |y: &[f64; D], k: &[f64; D], s: f64| -> [f64; D] {
        let mut out = *y;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += s * ki;
        }
        out
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &shift(y, &k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, &shift(y, &k2, 0.5 * h));
    let k4 = rhs(t + h, &shift(y, &k3, h));
    let mut out = *y;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

enum StepFault {
    Singular,
    Underflow,
}

/// One step of size `h` from two half steps, recursively subdivided until the
/// Richardson estimate `|y_half - y_full| / 15` is within tolerance.
fn halving_step<const D: usize, F, G>(
    rhs: &F,
    guard: &G,
    t: f64,
    y: &[f64; D],
    h: f64,
    tol: f64,
    depth: u32,
) -> std::result::Result<([f64; D], f64), StepFault>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    G: Fn(&[f64; D]) -> bool,
{
    let full = rk4(rhs, t, y, h);
    let mid = rk4(rhs, t, y, 0.5 * h);
    let half = rk4(rhs, t + 0.5 * h, &mid, 0.5 * h);
    let finite = half.iter().chain(&full).chain(&mid).all(|v| v.is_finite());
    let err = if finite {
        half.iter()
            .zip(&full)
            .map(|(a, b)| (a - b).abs() / 15.0 / (1.0 + a.abs()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    if err <= tol {
        if guard(&mid) || guard(&half) {
            return Err(StepFault::Singular);
        }
        return Ok((half, err));
    }
    if depth == 0 {
        return Err(if finite { StepFault::Underflow } else { StepFault::Singular });
    }
    let (y1, e1) = halving_step(rhs, guard, t, y, 0.5 * h, tol, depth - 1)?;
    let (y2, e2) = halving_step(rhs, guard, t + 0.5 * h, &y1, 0.5 * h, tol, depth - 1)?;
    Ok((y2, e1 + e2))
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    RangeEnd,
    SingularityGuard,
    MaxSteps,
}

struct Trajectory<const D: usize> {
    xi: Vec<f64>,
    states: Vec<[f64; D]>,
    errors: Vec<f64>,
    stop: StopReason,
}

fn integrate<const D: usize, F, G>(
    rhs: &F,
    guard: &G,
    xi0: f64,
    xi1: f64,
    y0: [f64; D],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<D>>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    G: Fn(&[f64; D]) -> bool,
{
    cfg.validate()?;
    if !(xi1 > xi0) {
        return Err(Error::InvalidRequest(format!("empty integration range [{xi0}, {xi1}]")));
    }
    let steps = ((xi1 - xi0) / cfg.step).round().max(1.0) as usize;
    let h = (xi1 - xi0) / steps as f64;
    let mut traj = Trajectory {
        xi: vec![xi0],
        states: vec![y0],
        errors: vec![0.0],
        stop: StopReason::RangeEnd,
    };
    if guard(&y0) {
        traj.stop = StopReason::SingularityGuard;
        return Ok(traj);
    }
    let mut y = y0;
    for i in 0..steps {
        if i >= cfg.max_steps {
            traj.stop = StopReason::MaxSteps;
            break;
        }
        let t = xi0 + h * i as f64;
        match halving_step(rhs, guard, t, &y, h, cfg.tolerance, MAX_DEPTH) {
            Ok((next, err)) => {
                y = next;
                traj.xi.push(xi0 + h * (i + 1) as f64);
                traj.states.push(y);
                traj.errors.push(err);
            }
            Err(StepFault::Singular) => {
                traj.stop = StopReason::SingularityGuard;
                break;
            }
            Err(StepFault::Underflow) => {
                return Err(Error::IntegrationFailure {
                    xi: t,
                    reason: "step size underflow".into(),
                })
            }
        }
    }
    Ok(traj)
}

/// Shared dense evaluation over a uniform grid: one RK4 step from the node at or
/// below `xi`.
struct Dense<const D: usize, F> {
    xi0: f64,
    h: f64,
    states: Vec<[f64; D]>,
    rhs: F,
}

impl<const D: usize, F> Dense<D, F>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn state_at(&self, xi: f64) -> [f64; D] {
        let last = self.states.len() - 1;
        let i = (((xi - self.xi0) / self.h).floor().max(0.0) as usize).min(last.saturating_sub(1));
        let node = self.xi0 + self.h * i as f64;
        let delta = xi - node;
        if delta == 0.0 {
            self.states[i]
        } else {
            rk4(&self.rhs, node, &self.states[i], delta)
        }
    }
}

/// `v(z) = r(a - rz) / (r(r-1)z^2 - 2r(k+a)z + a^2 - b)`.
pub fn v_of_z(n: usize, m: usize, r: f64, k: f64, z: f64, guard: f64) -> Result<f64> {
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    let den = r * (r - 1.0) * z * z - 2.0 * r * (k + a) * z + (a * a - b);
    if den.abs() <= guard {
        return Err(Error::NearSingularity { z, denominator: den });
    }
    Ok(r * (a - r * z) / den)
}

/// Right-hand side of the `(x, z)` system:
/// `x' = (a - rz) x^2`, `z' = ((a^2-b)/r) x - 2(k+a) x z + (r-1) x z^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitSystem {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

impl ImplicitSystem {
    pub fn new(n: usize, m: usize, r: f64, k: f64) -> Self {
        Self {
            n,
            m,
            r,
            k,
            a: coeff_a(n, m, k),
            b: coeff_b(n, m, k),
        }
    }

    pub fn x_prime(&self, x: f64, z: f64) -> f64 {
        (self.a - self.r * z) * x * x
    }

    pub fn z_prime(&self, x: f64, z: f64) -> f64 {
        let (a, b, r, k) = (self.a, self.b, self.r, self.k);
        (a * a - b) / r * x - 2.0 * (k + a) * x * z + (r - 1.0) * x * z * z
    }

    /// `r(r-1)z^2 - 2r(k+a)z + a^2 - b`; its roots are the constant-ratio solutions.
    pub fn quadratic(&self, z: f64) -> f64 {
        let (a, b, r, k) = (self.a, self.b, self.r, self.k);
        r * (r - 1.0) * z * z - 2.0 * r * (k + a) * z + (a * a - b)
    }

    fn rhs(&self) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] + Clone + Send + Sync + 'static {
        let s = *self;
        move |_, y: &[f64; 5]| {
            let (x, z) = (y[0], y[1]);
            [s.x_prime(x, z), s.z_prime(x, z), x, s.k * x, x * z]
        }
    }
}

/// Inputs of the implicit family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplicitParams {
    pub k: f64,
    pub x0: f64,
    pub z0: f64,
    pub xi_start: f64,
    pub xi_end: f64,
    /// Initial values `f(xi_start)`, `h(xi_start)`, `phi(xi_start)`.
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default = "one")]
    pub c3: f64,
}

fn one() -> f64 {
    1.0
}

/// One row of the integration table. `y = x z` reproduces `h'/h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub xi: f64,
    pub x: f64,
    pub z: f64,
    pub logf: f64,
    pub logphi: f64,
    pub logh: f64,
    pub local_error: f64,
}

impl OdeState {
    pub fn y(&self) -> f64 {
        self.x * self.z
    }
}

/// A finished integration of the implicit family.
#[derive(Debug, Clone)]
pub struct ImplicitRun {
    pub system: ImplicitSystem,
    pub step: f64,
    pub states: Vec<OdeState>,
    pub stop: StopReason,
}

pub fn integrate_implicit_family(
    n: usize,
    m: usize,
    r: f64,
    params: &ImplicitParams,
    cfg: &IntegratorConfig,
) -> Result<ImplicitRun> {
    if !(params.k > 0.0) {
        return Err(Error::Inadmissible(format!("k must be positive, got {}", params.k)));
    }
    if !(r > 0.0) {
        return Err(Error::Inadmissible(format!("r must be positive, got {r}")));
    }
    if params.x0 == 0.0 || !params.x0.is_finite() || !params.z0.is_finite() {
        return Err(Error::InvalidRequest("x0 must be finite and nonzero".into()));
    }
    if !(params.c1 > 0.0 && params.c2 > 0.0 && params.c3 > 0.0) {
        return Err(Error::Inadmissible("initial values c1, c2, c3 must be positive".into()));
    }
    let system = ImplicitSystem::new(n, m, r, params.k);
    let limit = 1.0 / cfg.singularity_guard;
    let guard = move |y: &[f64; 5]| !(y[0].abs() < limit && y[1].abs() < limit);
    let y0 = [params.x0, params.z0, params.c1.ln(), params.c3.ln(), params.c2.ln()];
    let traj = integrate(&system.rhs(), &guard, params.xi_start, params.xi_end, y0, cfg)?;
    let step = if traj.xi.len() > 1 { traj.xi[1] - traj.xi[0] } else { cfg.step };
    let states = traj
        .xi
        .iter()
        .zip(&traj.states)
        .zip(&traj.errors)
        .map(|((xi, s), e)| OdeState {
            xi: *xi,
            x: s[0],
            z: s[1],
            logf: s[2],
            logphi: s[3],
            logh: s[4],
            local_error: *e,
        })
        .collect();
    Ok(ImplicitRun {
        system,
        step,
        states,
        stop: traj.stop,
    })
}

impl ImplicitRun {
    pub fn domain(&self) -> Result<Interval> {
        let first = self.states.first().map(|s| s.xi).unwrap_or(0.0);
        let last = self.states.last().map(|s| s.xi).unwrap_or(first);
        if self.states.len() < 3 {
            return Err(Error::IntegrationFailure {
                xi: last,
                reason: "fewer than three accepted nodes".into(),
            });
        }
        Interval::new(first, last)
    }

    /// Profiles `f = e^{logf}`, `phi = e^{logphi}`, `h = e^{logh}` with derivatives closed
    /// through the system: `f'/f = x`, `phi'/phi = kx`, `h'/h = xz`.
    pub fn profiles(&self) -> Result<FamilySolution> {
        let domain = self.domain()?;
        let sys = self.system;
        let dense = Arc::new(Dense {
            xi0: self.states[0].xi,
            h: self.step,
            states: self
                .states
                .iter()
                .map(|s| [s.x, s.z, s.logf, s.logphi, s.logh])
                .collect(),
            rhs: sys.rhs(),
        });
        // u'/u = g, u''/u = g' + g^2
        let jet = |log_u: f64, g: f64, dg: f64| {
            let u = log_u.exp();
            Jet::new(u, g * u, (dg + g * g) * u)
        };
        let make = |label: &str, pick: fn(&ImplicitSystem, &[f64; 5]) -> (f64, f64, f64)| {
            let dense = dense.clone();
            Profile::new(label, domain, move |xi| {
                let y = dense.state_at(xi);
                let (log_u, g, dg) = pick(&sys, &y);
                jet(log_u, g, dg)
            })
        };
        let f = make("implicit.f", |s, y| (y[2], y[0], s.x_prime(y[0], y[1])));
        let phi = make("implicit.phi", |s, y| (y[3], s.k * y[0], s.k * s.x_prime(y[0], y[1])));
        let h = make("implicit.h", |s, y| {
            let (x, z) = (y[0], y[1]);
            (y[4], x * z, s.x_prime(x, z) * z + x * s.z_prime(x, z))
        });
        Ok(FamilySolution {
            f,
            phi,
            h,
            domain,
            constants: DerivedConstants {
                a: Some(sys.a),
                b: Some(sys.b),
                domain,
                ..Default::default()
            },
        })
    }

    /// CSV with columns `xi,x,z,f,phi,h,local_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "xi,x,z,f,phi,h,local_error")?;
        for s in &self.states {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.xi,
                s.x,
                s.z,
                s.logf.exp(),
                s.logphi.exp(),
                s.logh.exp(),
                s.local_error
            )?;
        }
        Ok(())
    }
}

/// Solution of `-r f phi h'' - 2r f phi' h' + [(n-2) f phi'' - m phi f'' - 2m phi' f'] h = 0`.
#[derive(Debug, Clone)]
pub struct NullSolution {
    pub h: Profile,
    pub xi: Vec<f64>,
    pub values: Vec<[f64; 2]>,
    pub stop: StopReason,
}

/// `h''` from the linear null-direction equation.
pub fn null_h_second_derivative(n: usize, m: usize, r: f64, f: Jet, phi: Jet, h: f64, hp: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let coeff = (n - 2.0) * f.value * phi.d2 - m * phi.value * f.d2 - 2.0 * m * phi.d1 * f.d1;
    (coeff * h - 2.0 * r * f.value * phi.d1 * hp) / (r * f.value * phi.value)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_null_h(
    n: usize,
    m: usize,
    r: f64,
    f: &Profile,
    phi: &Profile,
    h0: f64,
    h0_prime: f64,
    xi_range: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<NullSolution> {
    if !(r > 0.0) {
        return Err(Error::Inadmissible(format!("r must be positive, got {r}")));
    }
    let (xi0, xi1) = xi_range;
    for p in [f, phi] {
        p.at(xi0)?;
        p.at(xi1)?;
    }
    let (fc, pc) = (f.clone(), phi.clone());
    let rhs = move |t: f64, y: &[f64; 2]| {
        let fj = fc.at_unchecked(t);
        let pj = pc.at_unchecked(t);
        [y[1], null_h_second_derivative(n, m, r, fj, pj, y[0], y[1])]
    };
    let guard = |_: &[f64; 2]| false;
    let traj = integrate(&rhs, &guard, xi0, xi1, [h0, h0_prime], cfg)?;
    for &t in &traj.xi {
        for p in [f, phi] {
            let v = p.at_unchecked(t).value;
            if !(v > 0.0) {
                return Err(Error::OutsideDomain {
                    profile: p.label().to_string(),
                    xi: t,
                    lo: xi0,
                    hi: xi1,
                });
            }
        }
    }
    let last = *traj.xi.last().expect("trajectory has its initial node");
    if traj.xi.len() < 2 {
        return Err(Error::IntegrationFailure {
            xi: last,
            reason: "no accepted steps".into(),
        });
    }
    let domain = Interval::new(xi0, last)?;
    let step = traj.xi[1] - traj.xi[0];
    let dense = Arc::new(Dense {
        xi0,
        h: step,
        states: traj.states.clone(),
        rhs: rhs.clone(),
    });
    let (fc, pc) = (f.clone(), phi.clone());
    let h = Profile::new("null_ode.h", domain, move |t| {
        let y = dense.state_at(t);
        let hpp = null_h_second_derivative(n, m, r, fc.at_unchecked(t), pc.at_unchecked(t), y[0], y[1]);
        Jet::new(y[0], y[1], hpp)
    });
    Ok(NullSolution {
        h,
        xi: traj.xi,
        values: traj.states,
        stop: traj.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_of_z_examples() {
        // n=3, m=1, k=1, r=2: a=0, b=2
        assert_eq!(v_of_z(3, 1, 2.0, 1.0, 0.0, 1e-6).unwrap(), 0.0);
        // numerator 2(0-2) = -4, denominator 2 - 4 - 2 = -4
        assert_eq!(v_of_z(3, 1, 2.0, 1.0, 1.0, 1e-6).unwrap(), 1.0);
        // numerator root z = a/r
        let a = coeff_a(5, 2, 1.5);
        assert_eq!(v_of_z(5, 2, 3.0, 1.5, a / 3.0, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn v_of_z_guards_the_constant_ratio_roots() {
        let (p, m) = crate::families::theorem4_roots(3, 1, 2.0, 1.0).unwrap();
        for z in [p, m] {
            assert!(matches!(
                v_of_z(3, 1, 2.0, 1.0, z, 1e-6),
                Err(Error::NearSingularity { .. })
            ));
        }
    }

    #[test]
    fn constant_roots_are_fixed_points() {
        let sys = ImplicitSystem::new(3, 1, 2.0, 1.0);
        let (p, m) = crate::families::theorem4_roots(3, 1, 2.0, 1.0).unwrap();
        for z in [p, m] {
            for x in [-2.0, 0.3, 1.0] {
                assert!(sys.z_prime(x, z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rk4_on_exponential_is_fourth_order() {
        let rhs = |_: f64, y: &[f64; 1]| [y[0]];
        let err = |h: f64| {
            let mut y = [1.0];
            let steps = (1.0 / h).round() as usize;
            for i in 0..steps {
                y = rk4(&rhs, i as f64 * h, &y, h);
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = err(0.05) / err(0.025);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn blow_up_stops_at_the_guard() {
        // With z pinned at a root N, x = 1/(1 - s xi) where s = a - rN, blowing up at 1/s when s > 0.
        let (p, q) = crate::families::theorem4_roots(3, 1, 2.0, 1.0).unwrap();
        let a = coeff_a(3, 1, 1.0);
        let z = if a - 2.0 * p > 0.0 { p } else { q };
        let slope = a - 2.0 * z;
        assert!(slope > 0.0);
        let blow = 1.0 / slope;
        let params = ImplicitParams { k: 1.0, x0: 1.0, z0: z, xi_start: 0.0, xi_end: blow + 1.0, c1: 1.0, c2: 1.0, c3: 1.0 };
        let run = integrate_implicit_family(3, 1, 2.0, &params, &IntegratorConfig::default()).unwrap();
        assert_eq!(run.stop, StopReason::SingularityGuard);
        let last = run.states.last().unwrap().xi;
        assert!(last < blow && last > blow - 0.01, "last {last}, blow-up {blow}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = ImplicitParams { k: 1.0, x0: 0.0, z0: 0.1, xi_start: 0.0, xi_end: 1.0, c1: 1.0, c2: 1.0, c3: 1.0 };
        assert!(integrate_implicit_family(3, 1, 2.0, &params, &IntegratorConfig::default()).is_err());
        let params = ImplicitParams { x0: 1.0, xi_end: -1.0, ..params };
        assert!(integrate_implicit_family(3, 1, 2.0, &params, &IntegratorConfig::default()).is_err());
        let params = ImplicitParams { xi_end: 1.0, ..params };
        let cfg = IntegratorConfig { step: -1.0, ..Default::default() };
        assert!(integrate_implicit_family(3, 1, 2.0, &params, &cfg).is_err());
    }

    #[test]
    fn max_steps_truncates() {
        let params = ImplicitParams { k: 1.0, x0: 0.1, z0: 0.1, xi_start: 0.0, xi_end: 1.0, c1: 1.0, c2: 1.0, c3: 1.0 };
        let cfg = IntegratorConfig { max_steps: 10, ..Default::default() };
        let run = integrate_implicit_family(3, 1, 2.0, &params, &cfg).unwrap();
        assert_eq!(run.stop, StopReason::MaxSteps);
        assert_eq!(run.states.len(), 11);
    }

    #[test]
    fn null_solve_with_constant_profiles_is_linear() {
        let f = Profile::constant("f", 2.0);
        let phi = Profile::constant("phi", 3.0);
        let sol = solve_null_h(4, 2, 2.0, &f, &phi, 1.5, -0.25, (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        for t in [0.3, 1.0, 1.999] {
            let h = sol.h.at(t).unwrap();
            // roundoff from summing ~2000 increments
            assert!((h.value - (1.5 - 0.25 * t)).abs() < 1e-12, "{t}: {}", h.value - (1.5 - 0.25 * t));
            assert!((h.d1 + 0.25).abs() < 1e-13);
            assert_eq!(h.d2, 0.0);
        }
    }

    #[test]
    fn null_solve_requires_profiles_on_range() {
        let f = Profile::new("f", Interval::above(0.0), |x| Jet::new(x * x, 2.0 * x, 2.0));
        let phi = f.clone();
        assert!(solve_null_h(4, 1, 2.0, &f, &phi, 1.0, 0.0, (-1.0, 1.0), &IntegratorConfig::default()).is_err());
    }
}
