//! Closed-form solution families: power laws for non-null directions and the
//! exponential and Cauchy-Euler examples for null directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Interval, Profile};
use crate::jet::Jet;

/// `a = (n-2)k - m`
pub fn coeff_a(n: usize, m: usize, k: f64) -> f64 {
    (n as f64 - 2.0) * k - m as f64
}

/// `b = m(2k+1) - (n-2)k^2`
pub fn coeff_b(n: usize, m: usize, k: f64) -> f64 {
    m as f64 * (2.0 * k + 1.0) - (n as f64 - 2.0) * k * k
}

/// Quadratic whose roots are the constant ratios `z = (h'/h)/(f'/f)`:
/// `r(r-1)z^2 - 2r(k+a)z + (a^2 - b)`.
pub fn ratio_quadratic(n: usize, m: usize, r: f64, k: f64, z: f64) -> f64 {
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    r * (r - 1.0) * z * z - 2.0 * r * (k + a) * z + (a * a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

/// Parameters shared by the two power-law families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub k: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default = "one")]
    pub c3: f64,
    #[serde(default)]
    pub branch: Branch,
}

fn one() -> f64 {
    1.0
}

impl FamilyParams {
    pub fn new(k: f64) -> Self {
        Self {
            k,
            c: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            branch: Branch::Plus,
        }
    }

    pub fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::Inadmissible(format!("k must be positive, got {}", self.k)));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(v > 0.0) {
                return Err(Error::Inadmissible(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.c.is_finite() {
            return Err(Error::Inadmissible("c must be finite".into()));
        }
        Ok(())
    }
}

/// Cauchy-Euler regime selected by the sign of `9 - (40m - 8(n-2))/r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    TwoRealRoots,
    DoubleRoot,
    ComplexRoots,
}

/// Constants resolved while building a family; echoed by the CLI.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DerivedConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n_root: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c_exp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    pub domain: Interval,
}

/// A constructed `(f, phi, h)` triple.
#[derive(Debug, Clone)]
pub struct FamilySolution {
    pub f: Profile,
    pub phi: Profile,
    pub h: Profile,
    pub domain: Interval,
    pub constants: DerivedConstants,
}

/// `(N+, N-)` of the quadratic `r(r-1)N^2 - 2r(k+a)N + (a^2-b) = 0`, `r != 1`.
pub fn theorem4_roots(n: usize, m: usize, r: f64, k: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) || r == 1.0 {
        return Err(Error::Inadmissible(format!("power-law family needs r > 0, r != 1, got {r}")));
    }
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    let disc = r * r * (k + a) * (k + a) - r * (r - 1.0) * (a * a - b);
    if disc < 0.0 {
        return Err(Error::NoRealBranch { discriminant: disc });
    }
    let sq = disc.sqrt();
    let p = r * (k + a);
    let q = a * a - b;
    let den = r * (r - 1.0);
    // Pair the larger-magnitude root with the product relation to avoid cancellation.
    let big = if p >= 0.0 { (p + sq) / den } else { (p - sq) / den };
    let small = if big != 0.0 { q / (den * big) } else { 0.0 };
    let (plus, minus) = if p >= 0.0 { (big, small) } else { (small, big) };
    Ok((plus, minus))
}

/// `N = (a^2 - b) / (2(k + a))` for `r = 1`.
pub fn theorem5_root(n: usize, m: usize, k: f64) -> Result<f64> {
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    if k + a == 0.0 {
        return Err(Error::Inadmissible("k + a = 0".into()));
    }
    Ok((a * a - b) / (2.0 * (k + a)))
}

/// `c_i [slope * xi + c]^(-e_i / slope)` for the three exponents `(1, N, k)`.
fn power_law_triple(
    slope: f64,
    n_root: f64,
    p: &FamilyParams,
    tag: &str,
) -> (Profile, Profile, Profile, Interval) {
    let bound = -p.c / slope;
    let domain = if slope > 0.0 {
        Interval::above(bound)
    } else {
        Interval::below(bound)
    };
    let c = p.c;
    let build = |label: String, scale: f64, e: f64| {
        Profile::new(label, domain, move |x| {
            (Jet::variable(x) * slope + c).powf(-e / slope) * scale
        })
    };
    (
        build(format!("{tag}.f"), p.c1, 1.0),
        build(format!("{tag}.phi"), p.c3, p.k),
        build(format!("{tag}.h"), p.c2, n_root),
        domain,
    )
}

fn degenerate(slope: f64, a: f64, n_root: f64, r: f64) -> bool {
    slope.abs() <= 1e-12 * (1.0 + a.abs() + (r * n_root).abs())
}

/// Power-law family for `r != 1`.
pub fn theorem4_family(n: usize, m: usize, r: f64, params: &FamilyParams) -> Result<FamilySolution> {
    params.validate()?;
    let k = params.k;
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    if !(r > 0.0) || r == 1.0 {
        return Err(Error::Inadmissible(format!("theorem4 family needs r > 0, r != 1, got {r}")));
    }
    if r * (k + a) * (k + a) < (r - 1.0) * (a * a - b) {
        let disc = r * r * (k + a) * (k + a) - r * (r - 1.0) * (a * a - b);
        return Err(Error::NoRealBranch { discriminant: disc });
    }
    let (plus, minus) = theorem4_roots(n, m, r, k)?;
    let n_root = match params.branch {
        Branch::Plus => plus,
        Branch::Minus => minus,
    };
    let slope = a - r * n_root;
    if degenerate(slope, a, n_root, r) {
        return Err(Error::DegenerateExponent { slope });
    }
    let (f, phi, h, domain) = power_law_triple(slope, n_root, params, "theorem4");
    Ok(FamilySolution {
        f,
        phi,
        h,
        domain,
        constants: DerivedConstants {
            a: Some(a),
            b: Some(b),
            n_root: Some(n_root),
            slope: Some(slope),
            domain,
            ..Default::default()
        },
    })
}

/// Power-law family for `r = 1`.
pub fn theorem5_family(n: usize, m: usize, params: &FamilyParams) -> Result<FamilySolution> {
    params.validate()?;
    let k = params.k;
    let a = coeff_a(n, m, k);
    let b = coeff_b(n, m, k);
    let n_root = theorem5_root(n, m, k)?;
    let slope = a - n_root;
    if degenerate(slope, a, n_root, 1.0) {
        return Err(Error::DegenerateExponent { slope });
    }
    // The half-space bound in closed form must agree with -c / (a - N).
    let closed = -2.0 * params.c * (k + a) / (a * a + b + 2.0 * k * a);
    let direct = -params.c / slope;
    if (closed - direct).abs() > 1e-12 * (1.0 + direct.abs()) {
        return Err(Error::Inadmissible(format!(
            "half-space bounds disagree: {closed} vs {direct}"
        )));
    }
    let (f, phi, h, domain) = power_law_triple(slope, n_root, params, "theorem5");
    Ok(FamilySolution {
        f,
        phi,
        h,
        domain,
        constants: DerivedConstants {
            a: Some(a),
            b: Some(b),
            n_root: Some(n_root),
            slope: Some(slope),
            domain,
            ..Default::default()
        },
    })
}

/// Parameters of `f = k1 e^{A xi}`, `phi = k2 e^{B xi}` on a null direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpNullParams {
    #[serde(default = "one")]
    pub k1: f64,
    #[serde(default = "one")]
    pub k2: f64,
    #[serde(rename = "A")]
    pub a_exp: f64,
    #[serde(rename = "B")]
    pub b_exp: f64,
    #[serde(default = "one")]
    pub c1_h: f64,
    #[serde(default = "one")]
    pub c2_h: f64,
}

/// `(n-2)B^2 - mA^2 - 2mAB`, the zeroth-order coefficient of the reduced equation.
pub fn exp_null_bracket(n: usize, m: usize, a_exp: f64, b_exp: f64) -> f64 {
    let mf = m as f64;
    (n as f64 - 2.0) * b_exp * b_exp - mf * a_exp * a_exp - 2.0 * mf * a_exp * b_exp
}

/// `C = r^2 B^2 + r[(n-2)B^2 - mA^2 - 2mAB]`
pub fn exp_null_c(n: usize, m: usize, r: f64, a_exp: f64, b_exp: f64) -> f64 {
    r * r * b_exp * b_exp + r * exp_null_bracket(n, m, a_exp, b_exp)
}

/// Exponential null-direction family with `h` built from the general `C`.
pub fn exp_null_family(n: usize, m: usize, r: f64, params: &ExpNullParams) -> Result<FamilySolution> {
    let c = exp_null_c(n, m, r, params.a_exp, params.b_exp);
    exp_null_family_with_c(n, m, r, params, c)
}

/// Same as [`exp_null_family`] but with the exponent constant `C` supplied, so that
/// alternative values can be tested against the governing equation.
pub fn exp_null_family_with_c(
    n: usize,
    m: usize,
    r: f64,
    params: &ExpNullParams,
    c: f64,
) -> Result<FamilySolution> {
    let _ = (n, m);
    if !(r > 0.0) {
        return Err(Error::Inadmissible(format!("r must be positive, got {r}")));
    }
    if c < 0.0 {
        return Err(Error::ComplexExponent { c });
    }
    if !(params.k1 > 0.0 && params.k2 > 0.0) {
        return Err(Error::Inadmissible("k1 and k2 must be positive".into()));
    }
    if params.c1_h == 0.0 && params.c2_h == 0.0 {
        return Err(Error::Inadmissible("h vanishes identically".into()));
    }
    let ExpNullParams {
        k1,
        k2,
        a_exp,
        b_exp,
        c1_h,
        c2_h,
    } = *params;
    let s_plus = (-r * b_exp + c.sqrt()) / r;
    let s_minus = (-r * b_exp - c.sqrt()) / r;
    let domain = Interval::REAL_LINE;
    let f = Profile::new("exp_null.f", domain, move |x| (Jet::variable(x) * a_exp).exp() * k1);
    let phi = Profile::new("exp_null.phi", domain, move |x| (Jet::variable(x) * b_exp).exp() * k2);
    let h = Profile::new("exp_null.h", domain, move |x| {
        let t = Jet::variable(x);
        (t * s_plus).exp() * c1_h + (t * s_minus).exp() * c2_h
    });
    Ok(FamilySolution {
        f,
        phi,
        h,
        domain,
        constants: DerivedConstants {
            c_exp: Some(c),
            domain,
            ..Default::default()
        },
    })
}

/// Residual of `-r h'' - 2rB h' + [(n-2)B^2 - mA^2 - 2mAB] h`.
pub fn exp_null_reduced_residual(n: usize, m: usize, r: f64, a_exp: f64, b_exp: f64, h: Jet) -> f64 {
    -r * h.d2 - 2.0 * r * b_exp * h.d1 + exp_null_bracket(n, m, a_exp, b_exp) * h.value
}

/// Half-line on which the Cauchy-Euler family is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyEulerParams {
    #[serde(default = "one")]
    pub c1_h: f64,
    #[serde(default = "one")]
    pub c2_h: f64,
    #[serde(default)]
    pub side: Side,
}

/// Regime and `lambda = |9 - (40m - 8(n-2))/r|^{1/2} / 2`.
pub fn cauchy_euler_regime(n: usize, m: usize, r: f64) -> (Regime, f64) {
    let d = (40.0 * m as f64 - 8.0 * (n as f64 - 2.0)) / r;
    let gap = 9.0 - d;
    let regime = if gap > 0.0 {
        Regime::TwoRealRoots
    } else if gap == 0.0 {
        Regime::DoubleRoot
    } else {
        Regime::ComplexRoots
    };
    (regime, 0.5 * gap.abs().sqrt())
}

/// `f = phi = xi^2` with `h` solving `xi^2 h'' + 4 xi h' + ((10m - 2(n-2))/r) h = 0`.
pub fn cauchy_euler_family(n: usize, m: usize, r: f64, params: &CauchyEulerParams) -> Result<FamilySolution> {
    if !(r > 0.0) {
        return Err(Error::Inadmissible(format!("r must be positive, got {r}")));
    }
    let (regime, lambda) = cauchy_euler_regime(n, m, r);
    let domain = match params.side {
        Side::Positive => Interval::above(0.0),
        Side::Negative => Interval::below(0.0),
    };
    let square = |label: &str| Profile::new(label, domain, |x| Jet::new(x * x, 2.0 * x, 2.0));
    let CauchyEulerParams { c1_h, c2_h, .. } = *params;
    let h = Profile::new("cauchy_euler.h", domain, move |x| {
        let t = Jet::variable(x).abs();
        let envelope = t.powf(-1.5);
        let body = match regime {
            Regime::TwoRealRoots => t.powf(lambda) * c1_h + t.powf(-lambda) * c2_h,
            Regime::DoubleRoot => t.ln() * c2_h + c1_h,
            Regime::ComplexRoots => {
                let u = t.ln() * lambda;
                u.sin() * c1_h + u.cos() * c2_h
            }
        };
        envelope * body
    });
    Ok(FamilySolution {
        f: square("cauchy_euler.f"),
        phi: square("cauchy_euler.phi"),
        h,
        domain,
        constants: DerivedConstants {
            lambda: Some(lambda),
            regime: Some(regime),
            domain,
            ..Default::default()
        },
    })
}

/// Residual of `xi^2 h'' + 4 xi h' + ((10m - 2(n-2))/r) h`.
pub fn cauchy_euler_reduced_residual(n: usize, m: usize, r: f64, xi: f64, h: Jet) -> f64 {
    let q = (10.0 * m as f64 - 2.0 * (n as f64 - 2.0)) / r;
    xi * xi * h.d2 + 4.0 * xi * h.d1 + q * h.value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem4_roots_worked_example() {
        // n=3, m=1, k=1, r=2: a=0, b=2, 2N^2 - 4N - 2 = 0.
        assert_eq!(coeff_a(3, 1, 1.0), 0.0);
        assert_eq!(coeff_b(3, 1, 1.0), 2.0);
        let (p, m) = theorem4_roots(3, 1, 2.0, 1.0).unwrap();
        // back-substitution
        for nr in [p, m] {
            assert!((2.0 * nr * nr - 4.0 * nr - 2.0).abs() < 1e-13);
        }
        assert!((p - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((m - (1.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn theorem5_worked_example() {
        // n=4, m=2, k=1: a=0, b=4, N=-2, slope a-N=2.
        let sol = theorem5_family(4, 2, &FamilyParams::new(1.0)).unwrap();
        assert_eq!(sol.constants.n_root, Some(-2.0));
        assert_eq!(sol.constants.slope, Some(2.0));
        let f = sol.f.at(1.5).unwrap();
        assert!((f.value - (2.0f64 * 1.5 + 1.0).powf(-0.5)).abs() < 1e-15);
        assert_eq!(sol.domain, Interval::above(-0.5));
    }

    #[test]
    fn proportional_conformal_factor() {
        let p = FamilyParams {
            k: 1.5,
            c: 0.3,
            c1: 2.0,
            c2: 0.5,
            c3: 1.7,
            branch: Branch::Minus,
        };
        let sol = theorem4_family(5, 2, 3.0, &p).unwrap();
        for xi in sol.domain.samples(11) {
            let f = sol.f.at(xi).unwrap();
            let phi = sol.phi.at(xi).unwrap();
            assert!((phi.d1 / phi.value - p.k * f.d1 / f.value).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem4_rejects_r_one_and_negative_discriminant() {
        assert!(matches!(
            theorem4_family(3, 1, 1.0, &FamilyParams::new(1.0)),
            Err(Error::Inadmissible(_))
        ));
        // n=3, m=1, k=1, r=1/2: r(k+a)^2 = 1/2 < (r-1)(a^2-b) = 1
        let (n, m, k, r) = (3, 1, 1.0, 0.5);
        let a = coeff_a(n, m, k);
        let b = coeff_b(n, m, k);
        assert!(r * (k + a) * (k + a) < (r - 1.0) * (a * a - b));
        assert!(matches!(
            theorem4_family(n, m, r, &FamilyParams::new(k)),
            Err(Error::NoRealBranch { .. })
        ));
    }

    #[test]
    fn theorem5_rejects_k_plus_a_zero() {
        // n=3, m=2, k=1: a = -1, k + a = 0
        assert!(matches!(
            theorem5_family(3, 2, &FamilyParams::new(1.0)),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn parameter_positivity() {
        let p = FamilyParams { c2: 0.0, ..FamilyParams::new(1.0) };
        assert!(theorem4_family(3, 1, 2.0, &p).is_err());
        let p = FamilyParams::new(-1.0);
        assert!(theorem4_family(3, 1, 2.0, &p).is_err());
    }

    #[test]
    fn exp_null_special_case_bracket_vanishes() {
        for n in 3..9 {
            let a = ((n - 1) as f64).sqrt() - 1.0;
            assert!(exp_null_bracket(n, 1, a, 1.0).abs() < 1e-13);
            let r = 3.0;
            assert!((exp_null_c(n, 1, r, a, 1.0) - r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_null_constants_are_trivial() {
        let p = ExpNullParams { k1: 1.0, k2: 1.0, a_exp: 0.0, b_exp: 0.0, c1_h: 0.7, c2_h: 0.3 };
        let sol = exp_null_family(4, 2, 2.0, &p).unwrap();
        assert_eq!(sol.constants.c_exp, Some(0.0));
        let h = sol.h.at(2.3).unwrap();
        assert!((h.value - 1.0).abs() < 1e-15);
        assert_eq!(h.d1, 0.0);
    }

    #[test]
    fn exp_null_rejects_complex_exponent() {
        // B = 0, A = 1: C = -r m < 0
        let p = ExpNullParams { k1: 1.0, k2: 1.0, a_exp: 1.0, b_exp: 0.0, c1_h: 1.0, c2_h: 1.0 };
        assert!(matches!(exp_null_family(4, 1, 2.0, &p), Err(Error::ComplexExponent { .. })));
    }

    #[test]
    fn cauchy_euler_regimes() {
        // (40 - 80)/8 = -5 < 9
        assert_eq!(cauchy_euler_regime(12, 1, 8.0).0, Regime::TwoRealRoots);
        // 40*2 - 8 = 72 = 9 * 8
        assert_eq!(cauchy_euler_regime(3, 2, 8.0), (Regime::DoubleRoot, 0.0));
        // 40 - 8 = 32 > 9 r for r = 2
        let (reg, lam) = cauchy_euler_regime(3, 1, 2.0);
        assert_eq!(reg, Regime::ComplexRoots);
        assert!((lam - 0.5 * 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cauchy_euler_excludes_origin() {
        let sol = cauchy_euler_family(4, 1, 2.0, &CauchyEulerParams { c1_h: 1.0, c2_h: 1.0, side: Side::Positive }).unwrap();
        assert!(matches!(sol.h.at(0.0), Err(Error::OutsideDomain { .. })));
        let neg = cauchy_euler_family(4, 1, 2.0, &CauchyEulerParams { c1_h: 1.0, c2_h: 1.0, side: Side::Negative }).unwrap();
        assert!(neg.h.at(-2.0).is_ok());
        assert!(neg.h.at(2.0).is_err());
    }
}
