//! Finite-difference curvature oracle.
//!
//! Deliberately naive and independent of [`crate::curvature`]: it reads only profile
//! values, builds the full metric `diag(eps_i/phi^2, f^2, ..., f^2)` on `R^n x R^m`
//! (a flat fiber in its own coordinates), and obtains Christoffels, Ricci and
//! Hessians by central differences.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{christoffel_conformal, hessian_conformal, ricci_conformal, warped_ricci, Field};
use crate::error::Result;
use crate::geometry::{causal_class, Profile, Signature, SpecParts, WarpedSpec};
use crate::jet::Jet;

/// Central-difference step of the oracle.
pub const ORACLE_STEP: f64 = 1e-4;

/// Bound on normalized direction coefficients of random specs.
pub const MAX_ALPHA: f64 = 2.0;

/// Largest engine-versus-oracle deviation accepted on random specs.
pub const ORACLE_THRESHOLD: f64 = 1e-5;

type MetricFn<'a> = dyn Fn(&[f64]) -> Vec<f64> + 'a;

/// Diagonal metric components as a function of the full coordinate vector.
struct Metric<'a> {
    dim: usize,
    diag: Box<MetricFn<'a>>,
}

impl<'a> Metric<'a> {
    fn components(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec((self.diag)(x)))
    }

    fn shifted(x: &[f64], l: usize, s: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        y[l] += s;
        y
    }

    /// `d_l g_ij` for all `l`.
    fn derivatives(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let h = ORACLE_STEP;
        (0..self.dim)
            .map(|l| {
                (self.components(&Self::shifted(x, l, h)) - self.components(&Self::shifted(x, l, -h))) / (2.0 * h)
            })
            .collect()
    }

    /// `Gamma[k][(i, j)] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)`.
    fn christoffel(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let g = self.components(x);
        let inv = g.try_inverse().expect("metric is nondegenerate");
        let dg = self.derivatives(x);
        let d = self.dim;
        (0..d)
            .map(|k| {
                DMatrix::from_fn(d, d, |i, j| {
                    (0..d)
                        .map(|l| 0.5 * inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum()
                })
            })
            .collect()
    }

    /// `R_ij = d_k Gamma^k_ij - d_j Gamma^k_ik + Gamma^k_kl Gamma^l_ij - Gamma^k_jl Gamma^l_ik`.
    fn ricci(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let h = ORACLE_STEP;
        let gamma = self.christoffel(x);
        let dgamma: Vec<Vec<DMatrix<f64>>> = (0..d)
            .map(|l| {
                let plus = self.christoffel(&Self::shifted(x, l, h));
                let minus = self.christoffel(&Self::shifted(x, l, -h));
                plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
            })
            .collect();
        DMatrix::from_fn(d, d, |i, j| {
            let mut s = 0.0;
            for k in 0..d {
                s += dgamma[k][k][(i, j)] - dgamma[j][k][(i, k)];
                for l in 0..d {
                    s += gamma[k][(k, l)] * gamma[l][(i, j)] - gamma[k][(j, l)] * gamma[l][(i, k)];
                }
            }
            s
        })
    }

    /// `d_i d_j u - Gamma^k_ij d_k u` with all derivatives by central differences.
    fn hessian(&self, x: &[f64], u: &dyn Fn(&[f64]) -> f64) -> DMatrix<f64> {
        let d = self.dim;
        let h = ORACLE_STEP;
        let gamma = self.christoffel(x);
        let grad: Vec<f64> = (0..d)
            .map(|k| (u(&Self::shifted(x, k, h)) - u(&Self::shifted(x, k, -h))) / (2.0 * h))
            .collect();
        DMatrix::from_fn(d, d, |i, j| {
            let second = if i == j {
                (u(&Self::shifted(x, i, h)) - 2.0 * u(x) + u(&Self::shifted(x, i, -h))) / (h * h)
            } else {
                let pp = Self::shifted(&Self::shifted(x, i, h), j, h);
                let pm = Self::shifted(&Self::shifted(x, i, h), j, -h);
                let mp = Self::shifted(&Self::shifted(x, i, -h), j, h);
                let mm = Self::shifted(&Self::shifted(x, i, -h), j, -h);
                (u(&pp) - u(&pm) - u(&mp) + u(&mm)) / (4.0 * h * h)
            };
            second - (0..d).map(|k| gamma[k][(i, j)] * grad[k]).sum::<f64>()
        })
    }
}

fn value(p: &Profile, alpha: &[f64], x: &[f64]) -> f64 {
    let xi: f64 = alpha.iter().zip(x).map(|(a, b)| a * b).sum();
    p.value(xi).unwrap_or(f64::NAN)
}

/// Engine-versus-oracle deviations at one point, by quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Deviations {
    pub christoffel: f64,
    pub ricci_conformal: f64,
    pub hessian_f: f64,
    pub warped_ricci: f64,
    pub hessian_h: f64,
}

impl Deviations {
    pub fn max(&self) -> f64 {
        [
            self.christoffel,
            self.ricci_conformal,
            self.hessian_f,
            self.warped_ricci,
            self.hessian_h,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Christoffel and Ricci of the conformal base; both paths are exact when `phi` is constant.
    pub fn conformal_curvature(&self) -> f64 {
        self.christoffel.max(self.ricci_conformal)
    }
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Compares the engine with the oracle at `point` of the base. The spec must have
/// `lambda_F = 0` since the oracle fiber is flat.
pub fn compare_at(spec: &WarpedSpec, point: &[f64]) -> Result<Deviations> {
    let n = spec.n();
    let m = spec.m();
    let alpha = spec.direction().alpha().to_vec();
    let eps: Vec<f64> = (0..n).map(|i| spec.signature().eps(i)).collect();

    let base = Metric {
        dim: n,
        diag: Box::new(|x: &[f64]| {
            let phi = value(spec.phi(), &alpha, x);
            eps.iter().map(|e| e / (phi * phi)).collect()
        }),
    };
    let full = Metric {
        dim: n + m,
        diag: Box::new(|x: &[f64]| {
            let phi = value(spec.phi(), &alpha, &x[..n]);
            let f = value(spec.f(), &alpha, &x[..n]);
            let mut g: Vec<f64> = eps.iter().map(|e| e / (phi * phi)).collect();
            g.extend(std::iter::repeat(f * f).take(m));
            g
        }),
    };

    let mut dev = Deviations::default();

    let engine_gamma = christoffel_conformal(spec, point)?;
    let oracle_gamma = base.christoffel(point);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = (engine_gamma.get(i, j, k) - oracle_gamma[k][(i, j)]).abs();
                dev.christoffel = dev.christoffel.max(d);
            }
        }
    }

    dev.ricci_conformal = max_abs_diff(&ricci_conformal(spec, point)?, &base.ricci(point));

    let f_of = |x: &[f64]| value(spec.f(), &alpha, &x[..n]);
    dev.hessian_f = max_abs_diff(&hessian_conformal(spec, Field::F, point)?, &base.hessian(point, &f_of));

    let mut x_full = point.to_vec();
    x_full.extend(std::iter::repeat(0.0).take(m));
    let block = warped_ricci(spec, point)?;
    let engine_ricci = DMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => block.base_ricci[(i, j)],
        (false, false) if i == j => block.fiber_coeff,
        _ => 0.0,
    });
    dev.warped_ricci = max_abs_diff(&engine_ricci, &full.ricci(&x_full));

    let h_of = |x: &[f64]| value(spec.h(), &alpha, &x[..n]);
    let engine_hess = DMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => block.hess_h_base[(i, j)],
        (false, false) if i == j => block.hess_h_fiber_coeff,
        _ => 0.0,
    });
    dev.hessian_h = max_abs_diff(&engine_hess, &full.hessian(&x_full, &h_of));

    Ok(dev)
}

/// Options for a batch of random specs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub count: usize,
    /// Use `phi = 1`, where both paths are exact for the conformal quantities.
    pub flat_phi: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            count: 20,
            flat_phi: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub eps: Vec<i8>,
    pub alpha: Vec<f64>,
    pub point: Vec<f64>,
    pub deviations: Deviations,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    pub flat_phi: bool,
    pub threshold: f64,
    pub cases: Vec<OracleCase>,
    pub max_deviation: f64,
    pub conformal_curvature_max: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("oracle report is finite")
    }
}

/// `c0 e^{s1 xi} + c1 e^{s2 xi}` with positive coefficients.
fn random_profile(rng: &mut ChaCha8Rng, label: &str) -> Profile {
    let c0 = rng.gen_range(0.5..1.5);
    let c1 = rng.gen_range(0.5..1.5);
    let s1 = rng.gen_range(-0.5..0.5);
    let s2 = rng.gen_range(-0.5..0.5);
    Profile::new(label, Default::default(), move |xi| {
        (Jet::variable(xi) * s1).exp() * c0 + (Jet::variable(xi) * s2).exp() * c1
    })
}

/// A random smooth spec with `rho = lambda_F = 0` and a random base point.
pub fn random_spec(rng: &mut ChaCha8Rng, flat_phi: bool) -> Result<(WarpedSpec, Vec<f64>)> {
    let n = rng.gen_range(3..=5);
    let m = rng.gen_range(1..=3);
    let eps: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let signature = Signature::new(eps)?;
    // Nearly null draws normalize to huge coefficients; redraw to keep the spec tame.
    let alpha = loop {
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok((_, normalized)) = causal_class(&signature, &alpha) {
            if normalized.iter().all(|a| a.abs() <= MAX_ALPHA) {
                break alpha;
            }
        }
    };
    let r = rng.gen_range(0.5..3.0);
    let f = random_profile(rng, "f");
    let phi = if flat_phi { Profile::constant("phi", 1.0) } else { random_profile(rng, "phi") };
    let h = random_profile(rng, "h");
    let point: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let spec = WarpedSpec::new(SpecParts {
        m,
        r,
        rho: 0.0,
        lambda_f: 0.0,
        signature,
        alpha,
        f,
        phi,
        h,
    })?;
    Ok((spec, point))
}

pub fn run_oracle(cfg: &OracleConfig) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::with_capacity(cfg.count);
    for index in 0..cfg.count {
        let (spec, point) = random_spec(&mut rng, cfg.flat_phi)?;
        let deviations = compare_at(&spec, &point)?;
        cases.push(OracleCase {
            index,
            n: spec.n(),
            m: spec.m(),
            r: spec.r(),
            eps: spec.signature().entries().to_vec(),
            alpha: spec.direction().alpha().to_vec(),
            point,
            max_deviation: deviations.max(),
            deviations,
        });
    }
    let max_deviation = cases.iter().fold(0.0_f64, |a, c| a.max(c.max_deviation));
    let conformal_curvature_max = cases
        .iter()
        .fold(0.0_f64, |a, c| a.max(c.deviations.conformal_curvature()));
    Ok(OracleReport {
        seed: cfg.seed,
        flat_phi: cfg.flat_phi,
        threshold: ORACLE_THRESHOLD,
        pass: max_deviation <= ORACLE_THRESHOLD,
        cases,
        max_deviation,
        conformal_curvature_max,
    })
}
