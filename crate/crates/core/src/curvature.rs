//! Pointwise curvature of `(R^n, g/phi^2) x_f F^m` for profiles of `xi`.
//!
//! Every partial derivative is `alpha_i u'(xi)` or `alpha_i alpha_j u''(xi)`, so all
//! tensors below are assembled from jets of `f`, `phi` and `h` at a single point.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::WarpedSpec;
use crate::jet::Jet;

/// Which profile a Hessian, Laplacian or gradient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    F,
    Phi,
    H,
}

/// Jets of the three profiles at one base point together with the metric data.
#[derive(Debug, Clone)]
pub struct PointJets<'a> {
    pub xi: f64,
    pub eps: Vec<f64>,
    pub alpha: &'a [f64],
    pub f: Jet,
    pub phi: Jet,
    pub h: Jet,
}

impl<'a> PointJets<'a> {
    pub fn at(spec: &'a WarpedSpec, point: &[f64]) -> Result<Self> {
        let xi = spec.direction().xi_at(point)?;
        Self::at_xi(spec, xi)
    }

    pub fn at_xi(spec: &'a WarpedSpec, xi: f64) -> Result<Self> {
        let n = spec.n();
        Ok(Self {
            xi,
            eps: (0..n).map(|i| spec.signature().eps(i)).collect(),
            alpha: spec.direction().alpha(),
            f: spec.f().at(xi)?,
            phi: spec.phi().at(xi)?,
            h: spec.h().at(xi)?,
        })
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    pub fn jet(&self, which: Field) -> Jet {
        match which {
            Field::F => self.f,
            Field::Phi => self.phi,
            Field::H => self.h,
        }
    }

    /// `u_{,x_i}`
    pub fn d(&self, which: Field, i: usize) -> f64 {
        self.alpha[i] * self.jet(which).d1
    }

    /// `u_{,x_i x_j}`
    pub fn dd(&self, which: Field, i: usize, j: usize) -> f64 {
        self.alpha[i] * self.alpha[j] * self.jet(which).d2
    }

    fn require_conformal(&self) -> Result<()> {
        if self.phi.value == 0.0 {
            return Err(Error::SingularConformalFactor { xi: self.xi });
        }
        Ok(())
    }

    fn require_warping(&self) -> Result<()> {
        if !(self.f.value > 0.0) {
            return Err(Error::InvalidWarping {
                xi: self.xi,
                value: self.f.value,
            });
        }
        Ok(())
    }

    fn require_potential(&self) -> Result<()> {
        if !(self.h.value > 0.0) {
            return Err(Error::InvalidPotential {
                xi: self.xi,
                value: self.h.value,
            });
        }
        Ok(())
    }
}

/// Christoffel symbols `Gamma_ij^k` of `g/phi^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Gamma_ij^k`
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }
}

pub fn christoffel_conformal(spec: &WarpedSpec, point: &[f64]) -> Result<Christoffel> {
    let p = PointJets::at(spec, point)?;
    christoffel_from_jets(&p)
}

pub fn christoffel_from_jets(p: &PointJets<'_>) -> Result<Christoffel> {
    p.require_conformal()?;
    let n = p.n();
    let phi = p.phi.value;
    let mut g = Christoffel {
        n,
        data: vec![0.0; n * n * n],
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = if i == j && j == k {
                    -p.d(Field::Phi, i) / phi
                } else if i == j {
                    p.eps[i] * p.eps[k] * p.d(Field::Phi, k) / phi
                } else if k == i {
                    -p.d(Field::Phi, j) / phi
                } else if k == j {
                    -p.d(Field::Phi, i) / phi
                } else {
                    0.0
                };
                g.set(i, j, k, v);
            }
        }
    }
    Ok(g)
}

pub fn hessian_conformal(spec: &WarpedSpec, which: Field, point: &[f64]) -> Result<DMatrix<f64>> {
    let p = PointJets::at(spec, point)?;
    hessian_from_jets(&p, which)
}

/// `Hess_{g/phi^2} u` in coordinates.
pub fn hessian_from_jets(p: &PointJets<'_>, which: Field) -> Result<DMatrix<f64>> {
    p.require_conformal()?;
    let n = p.n();
    let phi = p.phi.value;
    let contraction: f64 = (0..n)
        .map(|k| p.eps[k] * p.d(Field::Phi, k) / phi * p.d(which, k))
        .sum();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            p.dd(which, i, i) + 2.0 * p.d(Field::Phi, i) / phi * p.d(which, i) - p.eps[i] * contraction
        } else {
            p.dd(which, i, j)
                + p.d(Field::Phi, j) / phi * p.d(which, i)
                + p.d(Field::Phi, i) / phi * p.d(which, j)
        }
    }))
}

pub fn ricci_conformal(spec: &WarpedSpec, point: &[f64]) -> Result<DMatrix<f64>> {
    let p = PointJets::at(spec, point)?;
    ricci_from_jets(&p)
}

/// Ricci tensor of `g/phi^2`.
pub fn ricci_from_jets(p: &PointJets<'_>) -> Result<DMatrix<f64>> {
    p.require_conformal()?;
    let n = p.n();
    let nf = n as f64;
    let phi = p.phi.value;
    let lap: f64 = (0..n).map(|k| p.eps[k] * p.dd(Field::Phi, k, k)).sum();
    let grad2: f64 = (0..n).map(|k| p.eps[k] * p.d(Field::Phi, k).powi(2)).sum();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ((nf - 2.0) * p.dd(Field::Phi, i, i) + p.eps[i] * lap) / phi
                - (nf - 1.0) * p.eps[i] * grad2 / (phi * phi)
        } else {
            (nf - 2.0) * p.dd(Field::Phi, i, j) / phi
        }
    }))
}

/// Ricci and Hessian data of the warped product at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBlock {
    /// `Ric(X_i, X_j)` on base directions.
    pub base_ricci: DMatrix<f64>,
    /// `gamma` with `Ric(Y_i, Y_j) = gamma g_F(Y_i, Y_j)`.
    pub fiber_coeff: f64,
    pub mixed_is_zero: bool,
    pub hess_h_base: DMatrix<f64>,
    /// Coefficient of `g_F` in `Hess h` on fiber directions.
    pub hess_h_fiber_coeff: f64,
}

pub fn warped_ricci(spec: &WarpedSpec, point: &[f64]) -> Result<CurvatureBlock> {
    let p = PointJets::at(spec, point)?;
    warped_ricci_from_jets(spec, &p)
}

/// Base block `Ric_gbar - (m/f) Hess_gbar f` and fiber coefficient
/// `lambda_F - f Lap f - (m-1)|grad f|^2`. For `m = 1` the last term drops and
/// `lambda_F = 0`, which is the one-dimensional fiber case.
pub fn warped_ricci_from_jets(spec: &WarpedSpec, p: &PointJets<'_>) -> Result<CurvatureBlock> {
    p.require_conformal()?;
    p.require_warping()?;
    let n = p.n();
    let m = spec.m() as f64;
    let (f, phi) = (p.f.value, p.phi.value);
    let ric = ricci_from_jets(p)?;
    let hess_f = hessian_from_jets(p, Field::F)?;
    let base_ricci = ric - hess_f * (m / f);

    let sum_ff: f64 = (0..n).map(|k| p.eps[k] * p.dd(Field::F, k, k)).sum();
    let sum_pf: f64 = (0..n).map(|k| p.eps[k] * p.d(Field::Phi, k) * p.d(Field::F, k)).sum();
    let sum_f2: f64 = (0..n).map(|k| p.eps[k] * p.d(Field::F, k).powi(2)).sum();
    let fiber_coeff = spec.lambda_f() - f * phi * phi * sum_ff
        + (n as f64 - 2.0) * f * phi * sum_pf
        - (m - 1.0) * phi * phi * sum_f2;

    let hess_h_base = hessian_from_jets(p, Field::H)?;
    let sum_fh: f64 = (0..n).map(|k| p.eps[k] * p.d(Field::F, k) * p.d(Field::H, k)).sum();
    let hess_h_fiber_coeff = f * phi * phi * sum_fh;
    let mixed = mixed_hessian_from_jets(p, &vec![0.0; spec.m()]);

    Ok(CurvatureBlock {
        base_ricci,
        fiber_coeff,
        mixed_is_zero: mixed.iter().all(|v| *v == 0.0),
        hess_h_base,
        hess_h_fiber_coeff,
    })
}

/// `Ric - (r/h) Hess h` split into its base matrix and fiber coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct BakryEmery {
    pub base: DMatrix<f64>,
    pub fiber_coeff: f64,
}

pub fn bakry_emery(spec: &WarpedSpec, point: &[f64]) -> Result<BakryEmery> {
    let p = PointJets::at(spec, point)?;
    bakry_emery_from_jets(spec, &p)
}

pub fn bakry_emery_from_jets(spec: &WarpedSpec, p: &PointJets<'_>) -> Result<BakryEmery> {
    p.require_potential()?;
    let block = warped_ricci_from_jets(spec, p)?;
    let s = spec.r() / p.h.value;
    Ok(BakryEmery {
        base: block.base_ricci - block.hess_h_base * s,
        fiber_coeff: block.fiber_coeff - s * block.hess_h_fiber_coeff,
    })
}

/// `Ric - (r/h) Hess h - rho g~`; vanishes exactly for quasi-Einstein specs.
pub fn quasi_einstein_defect(spec: &WarpedSpec, point: &[f64]) -> Result<BakryEmery> {
    let p = PointJets::at(spec, point)?;
    let be = bakry_emery_from_jets(spec, &p)?;
    let phi2 = p.phi.value * p.phi.value;
    let n = p.n();
    let metric = DMatrix::from_fn(n, n, |i, j| if i == j { p.eps[i] / phi2 } else { 0.0 });
    Ok(BakryEmery {
        base: be.base - metric * spec.rho(),
        fiber_coeff: be.fiber_coeff - spec.rho() * p.f.value * p.f.value,
    })
}

/// `Lap_{g_B} u` on the base `(R^n x_f F^m, gbar + f^2 g_F)` for `u = u(xi)`.
pub fn laplacian_base(spec: &WarpedSpec, which: Field, point: &[f64]) -> Result<f64> {
    let xi = spec.direction().xi_at(point)?;
    laplacian_base_at_xi(spec, which, xi)
}

pub fn laplacian_base_at_xi(spec: &WarpedSpec, which: Field, xi: f64) -> Result<f64> {
    let p = PointJets::at_xi(spec, xi)?;
    p.require_conformal()?;
    p.require_warping()?;
    let e = spec.class().sign();
    let u = p.jet(which);
    let (f, phi) = (p.f, p.phi);
    let n = spec.n() as f64;
    let m = spec.m() as f64;
    Ok(phi.value * phi.value * e * (u.d2 - (n - 2.0) * phi.d1 * u.d1 / phi.value)
        + m * e * phi.value * phi.value * u.d1 * f.d1 / f.value)
}

/// `|grad_{g_B} u|^2 = eps_{i0} phi^2 (u')^2`.
pub fn grad_norm_base(spec: &WarpedSpec, which: Field, point: &[f64]) -> Result<f64> {
    let xi = spec.direction().xi_at(point)?;
    grad_norm_base_at_xi(spec, which, xi)
}

pub fn grad_norm_base_at_xi(spec: &WarpedSpec, which: Field, xi: f64) -> Result<f64> {
    let p = PointJets::at_xi(spec, xi)?;
    p.require_conformal()?;
    let u = p.jet(which);
    Ok(spec.class().sign() * p.phi.value * p.phi.value * u.d1 * u.d1)
}

/// Mixed block `h_{,x_i y_j} - (f_{,x_i}/f) h_{,y_j}` of `Hess h`, as an `n x m` matrix.
///
/// `fiber_slope[j]` is `h_{,y_j}` for a potential of the form `h(xi) + sum_j s_j y_j`;
/// the all-zero slope is the base-only potential every family produces.
pub fn mixed_hessian(spec: &WarpedSpec, point: &[f64], fiber_slope: &[f64]) -> Result<DMatrix<f64>> {
    if fiber_slope.len() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: fiber_slope.len(),
        });
    }
    let p = PointJets::at(spec, point)?;
    p.require_warping()?;
    Ok(mixed_hessian_from_jets(&p, fiber_slope))
}

fn mixed_hessian_from_jets(p: &PointJets<'_>, fiber_slope: &[f64]) -> DMatrix<f64> {
    // h_{,x_i y_j} = 0 for h(xi) + s.y
    DMatrix::from_fn(p.n(), fiber_slope.len(), |i, j| {
        0.0 - p.d(Field::F, i) / p.f.value * fiber_slope[j]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Interval, Profile, Signature, SpecParts};

    fn spec_with(phi: Profile, f: Profile, h: Profile, eps: &[i8], alpha: &[f64]) -> WarpedSpec {
        WarpedSpec::new(SpecParts {
            m: 2,
            r: 2.0,
            rho: 0.0,
            lambda_f: 0.0,
            signature: Signature::new(eps.to_vec()).unwrap(),
            alpha: alpha.to_vec(),
            f,
            phi,
            h,
        })
        .unwrap()
    }

    fn exp_profile(label: &str, s: f64) -> Profile {
        Profile::new(label, Interval::REAL_LINE, move |x| (Jet::variable(x) * s).exp())
    }

    #[test]
    fn flat_christoffels_vanish() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(one.clone(), one.clone(), one, &[1, -1, 1], &[0.3, 0.2, 1.0]);
        let g = christoffel_conformal(&spec, &[0.1, 0.2, 0.3]).unwrap();
        assert!(g.data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn exponential_factor_christoffels() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(exp_profile("phi", 1.0), one.clone(), one, &[1, 1, 1], &[1.0, 0.0, 0.0]);
        for pt in [[0.0, 0.0, 0.0], [1.3, -2.0, 0.5]] {
            let g = christoffel_conformal(&spec, &pt).unwrap();
            assert!((g.get(0, 0, 0) + 1.0).abs() < 1e-15);
            assert!((g.get(1, 1, 0) - 1.0).abs() < 1e-15);
            // Gamma_12^1 = -phi_{,x_2}/phi vanishes; Gamma_12^2 = -phi_{,x_1}/phi does not.
            assert_eq!(g.get(0, 1, 0), 0.0);
            assert!((g.get(0, 1, 1) + 1.0).abs() < 1e-15);
            assert_eq!(g.get(1, 2, 0), 0.0);
        }
    }

    #[test]
    fn ricci_of_constant_factor_vanishes() {
        let one = Profile::constant("1", 1.0);
        for c in [1.0, 3.5, -2.0] {
            let spec = spec_with(Profile::constant("phi", c), one.clone(), one.clone(), &[1, 1, -1, 1], &[1.0, 2.0, 0.0, 1.0]);
            let ric = ricci_conformal(&spec, &[0.3, 0.1, 0.0, 2.0]).unwrap();
            assert!(ric.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn exponential_factor_ricci_diagonal() {
        // phi'/phi = 1 along x_1: (n-2) + 1 - (n-1) = 0 on X_1, and 1 - 2 = -1 elsewhere.
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(exp_profile("phi", 1.0), one.clone(), one, &[1, 1, 1], &[1.0, 0.0, 0.0]);
        let ric = ricci_conformal(&spec, &[0.4, 0.0, 0.0]).unwrap();
        assert!(ric[(0, 0)].abs() < 1e-14);
        assert!((ric[(1, 1)] + 1.0).abs() < 1e-14);
        assert!((ric[(2, 2)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_factor_is_reported() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(Profile::constant("phi", 0.0), one.clone(), one, &[1, 1, 1], &[1.0, 0.0, 0.0]);
        assert!(matches!(
            christoffel_conformal(&spec, &[0.0; 3]),
            Err(Error::SingularConformalFactor { .. })
        ));
        assert!(ricci_conformal(&spec, &[0.0; 3]).is_err());
    }

    #[test]
    fn hessian_special_cases() {
        let one = Profile::constant("1", 1.0);
        let f = Profile::new("f", Interval::REAL_LINE, |x| Jet::variable(x).powf(3.0) + 2.0);
        let alpha = [0.5, -1.0, 2.0];
        let spec = spec_with(one.clone(), f, one.clone(), &[1, -1, 1], &alpha);
        let pt = [0.2, 0.7, 0.9];
        let xi = spec.direction().xi_at(&pt).unwrap();
        let hf = hessian_conformal(&spec, Field::F, &pt).unwrap();
        let a = spec.direction().alpha();
        for i in 0..3 {
            for j in 0..3 {
                assert!((hf[(i, j)] - 6.0 * xi * a[i] * a[j]).abs() < 1e-13);
            }
        }
        let spec = spec_with(exp_profile("phi", 0.7), Profile::constant("f", 4.0), one, &[1, -1, 1], &alpha);
        let hf = hessian_conformal(&spec, Field::F, &pt).unwrap();
        assert!(hf.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn warping_and_potential_guards() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(one.clone(), Profile::constant("f", -1.0), one.clone(), &[1, 1, 1], &[1.0, 0.0, 0.0]);
        assert!(matches!(warped_ricci(&spec, &[0.0; 3]), Err(Error::InvalidWarping { .. })));
        let spec = spec_with(one.clone(), one.clone(), Profile::constant("h", 0.0), &[1, 1, 1], &[1.0, 0.0, 0.0]);
        assert!(matches!(bakry_emery(&spec, &[0.0; 3]), Err(Error::InvalidPotential { .. })));
    }

    #[test]
    fn flat_product_has_zero_blocks() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(one.clone(), one.clone(), one, &[1, 1, 1], &[1.0, 0.0, 0.0]);
        let b = warped_ricci(&spec, &[0.5, 0.5, 0.5]).unwrap();
        assert!(b.base_ricci.iter().all(|v| *v == 0.0));
        assert_eq!(b.fiber_coeff, 0.0);
        assert!(b.mixed_is_zero);
        let be = bakry_emery(&spec, &[0.5, 0.5, 0.5]).unwrap();
        assert!(be.base.iter().all(|v| *v == 0.0));
        assert_eq!(be.fiber_coeff, 0.0);
    }

    #[test]
    fn laplacian_and_gradient_examples() {
        let one = Profile::constant("1", 1.0);
        let h = Profile::new("h", Interval::REAL_LINE, Jet::variable);
        let spec = spec_with(one.clone(), one.clone(), h, &[1, 1, 1], &[1.0, 0.0, 0.0]);
        assert_eq!(laplacian_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(grad_norm_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 1.0);

        let spec = spec_with(one.clone(), one.clone(), one.clone(), &[1, 1, 1], &[1.0, 0.0, 0.0]);
        assert_eq!(laplacian_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(grad_norm_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 0.0);

        let wild = exp_profile("h", 1.3);
        let spec = spec_with(exp_profile("phi", 0.4), exp_profile("f", -0.2), wild, &[-1, 1, 1], &[1.0, 1.0, 0.0]);
        assert_eq!(laplacian_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(grad_norm_base(&spec, Field::H, &[0.3, 1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn mixed_block_responds_to_fiber_slope() {
        let one = Profile::constant("1", 1.0);
        let spec = spec_with(one.clone(), exp_profile("f", 0.5), one.clone(), &[1, 1, 1], &[1.0, 0.0, 0.0]);
        let zero = mixed_hessian(&spec, &[0.2, 0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let bent = mixed_hessian(&spec, &[0.2, 0.0, 0.0], &[0.1, 0.0]).unwrap();
        assert!((bent[(0, 0)] + 0.05).abs() < 1e-15);
        assert!(mixed_hessian(&spec, &[0.2, 0.0, 0.0], &[0.1]).is_err());
    }
}
