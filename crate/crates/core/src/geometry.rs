//! Base-space data model: signature, translation direction, profiles of the
//! invariant `xi = sum(alpha_i x_i)` and the full warped problem instance.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Diagonal pseudo-Euclidean metric `g_ij = delta_ij eps_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature {
    eps: Vec<i8>,
}

impl Signature {
    pub fn new(eps: Vec<i8>) -> Result<Self> {
        if eps.len() < 3 {
            return Err(Error::InvalidSignature(format!(
                "base dimension must be at least 3, got {}",
                eps.len()
            )));
        }
        if let Some(bad) = eps.iter().find(|e| **e != 1 && **e != -1) {
            return Err(Error::InvalidSignature(format!("entry {bad} is not +1 or -1")));
        }
        Ok(Self { eps })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    pub fn eps(&self, i: usize) -> f64 {
        f64::from(self.eps[i])
    }

    pub fn entries(&self) -> &[i8] {
        &self.eps
    }

    /// `sum eps_i v_i^2`
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.eps
            .iter()
            .zip(v)
            .map(|(e, x)| f64::from(*e) * x * x)
            .sum()
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.eps
    }
}

/// Causal character of the translation direction, `eps_{i0}` in the reduced equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum CausalClass {
    Timelike,
    Null,
    Spacelike,
}

impl CausalClass {
    pub fn sign(self) -> f64 {
        match self {
            CausalClass::Timelike => -1.0,
            CausalClass::Null => 0.0,
            CausalClass::Spacelike => 1.0,
        }
    }

    pub fn is_null(self) -> bool {
        self == CausalClass::Null
    }
}

impl TryFrom<i8> for CausalClass {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(CausalClass::Timelike),
            0 => Ok(CausalClass::Null),
            1 => Ok(CausalClass::Spacelike),
            other => Err(Error::InvalidDirection(format!("causal class {other}"))),
        }
    }
}

impl From<CausalClass> for i8 {
    fn from(c: CausalClass) -> i8 {
        c.sign() as i8
    }
}

impl fmt::Display for CausalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

// Below this ratio |sum eps alpha^2| / |alpha|^2 the direction is treated as null.
const NULL_THRESHOLD: f64 = 1e-14;
// Quadratic forms this close to +-1 (relative to |alpha|^2) are already normalized.
const UNIT_SLACK: f64 = 8.0 * f64::EPSILON;

/// Classify `alpha` and rescale it so that `sum eps_i alpha_i^2` is `+-1` when non-null.
pub fn causal_class(signature: &Signature, alpha: &[f64]) -> Result<(CausalClass, Vec<f64>)> {
    if alpha.len() != signature.dim() {
        return Err(Error::Dimension {
            expected: signature.dim(),
            got: alpha.len(),
        });
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidDirection("non-finite component".into()));
    }
    let norm2: f64 = alpha.iter().map(|a| a * a).sum();
    if norm2 == 0.0 {
        return Err(Error::InvalidDirection("alpha is the zero vector".into()));
    }
    let q = signature.quadratic_form(alpha);
    if q.abs() <= NULL_THRESHOLD * norm2 {
        return Ok((CausalClass::Null, alpha.to_vec()));
    }
    let class = if q > 0.0 {
        CausalClass::Spacelike
    } else {
        CausalClass::Timelike
    };
    if (q.abs() - 1.0).abs() <= UNIT_SLACK * norm2.max(1.0) {
        return Ok((class, alpha.to_vec()));
    }
    let s = q.abs().sqrt().recip();
    Ok((class, alpha.iter().map(|a| a * s).collect()))
}

/// Translation-invariant direction with its normalized coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    alpha: Vec<f64>,
    class: CausalClass,
}

impl Direction {
    pub fn new(signature: &Signature, alpha: &[f64]) -> Result<Self> {
        let (class, alpha) = causal_class(signature, alpha)?;
        Ok(Self { alpha, class })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn class(&self) -> CausalClass {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Evaluate `xi = sum alpha_i x_i` at a base point.
    pub fn xi_at(&self, point: &[f64]) -> Result<f64> {
        xi_at(&self.alpha, point)
    }

    /// A deterministic base point on the level set `xi = value`.
    ///
    /// The point is `value * alpha / |alpha|^2` shifted by a vector Euclidean-orthogonal to
    /// `alpha` that depends on `salt`, so different salts probe different points of the
    /// same level set.
    pub fn point_on_level(&self, value: f64, salt: usize) -> Vec<f64> {
        let n = self.alpha.len();
        let norm2: f64 = self.alpha.iter().map(|a| a * a).sum();
        let mut w: Vec<f64> = (0..n)
            .map(|i| 0.37 * ((salt as f64 + 1.0) * (i as f64 + 1.0) * 0.731).sin())
            .collect();
        let proj = w.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>() / norm2;
        for (wi, ai) in w.iter_mut().zip(&self.alpha) {
            *wi -= proj * ai;
        }
        self.alpha
            .iter()
            .zip(w)
            .map(|(a, wi)| value * a / norm2 + wi)
            .collect()
    }
}

/// `sum alpha_i x_i`.
pub fn xi_at(alpha: &[f64], point: &[f64]) -> Result<f64> {
    if alpha.len() != point.len() {
        return Err(Error::Dimension {
            expected: alpha.len(),
            got: point.len(),
        });
    }
    Ok(alpha.iter().zip(point).map(|(a, x)| a * x).sum())
}

/// Open interval `(lo, hi)` of the invariant; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Width used for sampling windows on unbounded domains.
pub const UNBOUNDED_SPAN: f64 = 10.0;

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidSpec(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn above(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
        }
    }

    pub fn below(hi: f64) -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// The bounded window that sampling uses: the central 80% of the domain, where
    /// unbounded ends are replaced by a span of [`UNBOUNDED_SPAN`].
    pub fn sample_window(&self) -> (f64, f64) {
        let (a, b) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + UNBOUNDED_SPAN),
            (false, true) => (self.hi - UNBOUNDED_SPAN, self.hi),
            (false, false) => (-0.5 * UNBOUNDED_SPAN, 0.5 * UNBOUNDED_SPAN),
        };
        let w = b - a;
        (a + 0.1 * w, b - 0.1 * w)
    }

    /// `count` evenly spaced points of [`Interval::sample_window`].
    pub fn samples(&self, count: usize) -> Vec<f64> {
        let (a, b) = self.sample_window();
        linspace(a, b, count)
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::REAL_LINE
    }
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..count)
            .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let lo = self.lo.is_finite().then_some(self.lo);
        let hi = self.hi.is_finite().then_some(self.hi);
        (lo, hi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi): (Option<f64>, Option<f64>) = Deserialize::deserialize(d)?;
        Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
            .map_err(serde::de::Error::custom)
    }
}

type ProfileFn = dyn Fn(f64) -> Jet + Send + Sync;

/// A scalar function of `xi` with exact first and second derivatives on an open domain.
#[derive(Clone)]
pub struct Profile {
    label: String,
    domain: Interval,
    eval: Arc<ProfileFn>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl Profile {
    pub fn new(
        label: impl Into<String>,
        domain: Interval,
        eval: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            domain,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(label: impl Into<String>, c: f64) -> Self {
        Self::new(label, Interval::REAL_LINE, move |_| Jet::constant(c))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn at(&self, xi: f64) -> Result<Jet> {
        if !self.domain.contains(xi) {
            return Err(Error::OutsideDomain {
                profile: self.label.clone(),
                xi,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok((self.eval)(xi))
    }

    pub fn value(&self, xi: f64) -> Result<f64> {
        self.at(xi).map(|j| j.value)
    }

    /// Evaluate without the domain check. Callers must already know `xi` is admissible.
    pub(crate) fn at_unchecked(&self, xi: f64) -> Jet {
        (self.eval)(xi)
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..self.clone()
        }
    }

    pub fn restricted(&self, domain: Interval) -> Result<Self> {
        Ok(Self {
            domain: self.domain.intersect(&domain)?,
            ..self.clone()
        })
    }

    /// `c * p`
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(format!("{}*{c}", self.label), self.domain, move |x| inner(x).scale(c))
    }

    /// `p * (1 + amplitude * exp(-((xi - center) / width)^2))`, a localized multiplicative bump.
    pub fn bumped(&self, amplitude: f64, center: f64, width: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(format!("{}~bump", self.label), self.domain, move |x| {
            let u = (Jet::variable(x) - center) / width;
            let bump = (-(u * u)).exp() * amplitude + 1.0;
            inner(x) * bump
        })
    }
}

/// Outcome of [`profile_consistency_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub pass: bool,
    pub worst_relative_error: f64,
    pub worst_xi: f64,
}

/// Tolerance for [`profile_consistency_check`].
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// Compare the analytic derivatives of `p` against central differences.
///
/// The step is `1e-5 * max(1, |xi|)`. `d1` is differenced from the values and `d2`
/// from the analytic `d1`, so the check chains value -> d1 -> d2 without the
/// `1/step^2` rounding amplification of a second difference.
pub fn profile_consistency_check(p: &Profile, samples: &[f64]) -> Result<ConsistencyReport> {
    let mut worst = 0.0f64;
    let mut worst_xi = f64::NAN;
    for &xi in samples {
        let s = 1e-5 * xi.abs().max(1.0);
        let (jm, j0, jp) = (p.at(xi - s)?, p.at(xi)?, p.at(xi + s)?);
        let fd1 = (jp.value - jm.value) / (2.0 * s);
        let fd2 = (jp.d1 - jm.d1) / (2.0 * s);
        let e1 = (j0.d1 - fd1).abs() / j0.d1.abs().max(1.0);
        let e2 = (j0.d2 - fd2).abs() / j0.d2.abs().max(1.0);
        let e = e1.max(e2);
        if !(e <= worst) {
            worst = e;
            worst_xi = xi;
        }
    }
    Ok(ConsistencyReport {
        pass: worst <= CONSISTENCY_TOLERANCE,
        worst_relative_error: worst,
        worst_xi,
    })
}

/// The Bakry-Emery exponent `r`, stored as a positive real with an integrality flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakryEmeryExponent {
    pub value: f64,
    pub is_integral: bool,
}

impl BakryEmeryExponent {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidSpec(format!("r must be positive, got {value}")));
        }
        Ok(Self {
            value,
            is_integral: value.fract() == 0.0,
        })
    }
}

/// A complete quasi-Einstein warped-product problem instance.
#[derive(Debug, Clone)]
pub struct WarpedSpec {
    n: usize,
    m: usize,
    r: BakryEmeryExponent,
    rho: f64,
    lambda_f: f64,
    signature: Signature,
    direction: Direction,
    f: Profile,
    phi: Profile,
    h: Profile,
}

/// Constructor input for [`WarpedSpec`].
#[derive(Debug, Clone)]
pub struct SpecParts {
    pub m: usize,
    pub r: f64,
    pub rho: f64,
    pub lambda_f: f64,
    pub signature: Signature,
    pub alpha: Vec<f64>,
    pub f: Profile,
    pub phi: Profile,
    pub h: Profile,
}

impl WarpedSpec {
    pub fn new(parts: SpecParts) -> Result<Self> {
        let direction = Direction::new(&parts.signature, &parts.alpha)?;
        Self::assemble(parts, direction)
    }

    fn assemble(parts: SpecParts, direction: Direction) -> Result<Self> {
        let SpecParts {
            m,
            r,
            rho,
            lambda_f,
            signature,
            f,
            phi,
            h,
            ..
        } = parts;
        if m < 1 {
            return Err(Error::InvalidSpec("fiber dimension m must be at least 1".into()));
        }
        let r = BakryEmeryExponent::new(r)?;
        if !rho.is_finite() || !lambda_f.is_finite() {
            return Err(Error::InvalidSpec("rho and lambda_F must be finite".into()));
        }
        if direction.class().is_null() && (rho != 0.0 || lambda_f != 0.0) {
            return Err(Error::InvalidSpec(format!(
                "null direction forces rho = lambda_F = 0, got rho = {rho}, lambda_F = {lambda_f}"
            )));
        }
        if m == 1 && lambda_f != 0.0 {
            return Err(Error::InvalidSpec(format!(
                "a one-dimensional fiber is Ricci-flat, got lambda_F = {lambda_f}"
            )));
        }
        Ok(Self {
            n: signature.dim(),
            m,
            r,
            rho,
            lambda_f,
            signature,
            direction,
            f,
            phi,
            h,
        })
    }

    fn parts(&self) -> SpecParts {
        SpecParts {
            m: self.m,
            r: self.r.value,
            rho: self.rho,
            lambda_f: self.lambda_f,
            signature: self.signature.clone(),
            alpha: self.direction.alpha().to_vec(),
            f: self.f.clone(),
            phi: self.phi.clone(),
            h: self.h.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn r(&self) -> f64 {
        self.r.value
    }
    pub fn r_exponent(&self) -> BakryEmeryExponent {
        self.r
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn lambda_f(&self) -> f64 {
        self.lambda_f
    }
    pub fn signature(&self) -> &Signature {
        &self.signature
    }
    pub fn direction(&self) -> &Direction {
        &self.direction
    }
    pub fn class(&self) -> CausalClass {
        self.direction.class()
    }
    pub fn f(&self) -> &Profile {
        &self.f
    }
    pub fn phi(&self) -> &Profile {
        &self.phi
    }
    pub fn h(&self) -> &Profile {
        &self.h
    }

    /// Intersection of the three profile domains.
    pub fn domain(&self) -> Result<Interval> {
        self.f
            .domain()
            .intersect(&self.phi.domain())?
            .intersect(&self.h.domain())
    }

    /// Default sample set of the invariant over the common domain.
    pub fn default_samples(&self, count: usize) -> Result<Vec<f64>> {
        Ok(self.domain()?.samples(count))
    }

    pub fn with_rho_lambda(&self, rho: f64, lambda_f: f64) -> Result<Self> {
        let parts = SpecParts {
            rho,
            lambda_f,
            ..self.parts()
        };
        Self::assemble(parts, self.direction.clone())
    }

    pub fn with_profiles(&self, f: Profile, phi: Profile, h: Profile) -> Result<Self> {
        let parts = SpecParts {
            f,
            phi,
            h,
            ..self.parts()
        };
        Self::assemble(parts, self.direction.clone())
    }

    pub fn with_h(&self, h: Profile) -> Result<Self> {
        self.with_profiles(self.f.clone(), self.phi.clone(), h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(e: &[i8]) -> Signature {
        Signature::new(e.to_vec()).unwrap()
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_at(&[1.0, 1.0, 0.0], &[2.0, 3.0, 7.0]).unwrap(), 5.0);
        assert_eq!(xi_at(&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]).unwrap(), 1.0);
        for t in [-3.0, 0.0, 0.5, 11.0] {
            assert_eq!(xi_at(&[1.0, 1.0, 0.0, 0.0], &[t, -t, 4.0, 2.0]).unwrap(), 0.0);
        }
        assert!(matches!(
            xi_at(&[1.0, 1.0, 0.0], &[1.0, 2.0]),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn causal_class_examples() {
        let (c, a) = causal_class(&sig(&[-1, 1, 1]), &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(c, CausalClass::Null);
        assert_eq!(a, vec![1.0, 1.0, 0.0]);

        let (c, a) = causal_class(&sig(&[1, 1, 1]), &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(c, CausalClass::Spacelike);
        assert_eq!(a, vec![1.0, 0.0, 0.0]);

        let (c, a) = causal_class(&sig(&[-1, 1, 1]), &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(c, CausalClass::Timelike);
        assert_eq!(a, vec![1.0, 0.0, 0.0]);

        assert!(matches!(
            causal_class(&sig(&[1, 1, 1]), &[0.0, 0.0, 0.0]),
            Err(Error::InvalidDirection(_))
        ));
    }

    #[test]
    fn signature_rejects_bad_input() {
        assert!(Signature::new(vec![1, 1]).is_err());
        assert!(Signature::new(vec![1, 0, 1]).is_err());
        assert!(Signature::new(vec![1, -1, 1, -1]).is_ok());
    }

    #[test]
    fn level_points_hit_their_level() {
        let d = Direction::new(&sig(&[-1, 1, 1, 1]), &[0.3, 1.2, -0.4, 0.9]).unwrap();
        for salt in 0..5 {
            let p = d.point_on_level(1.75, salt);
            assert!((d.xi_at(&p).unwrap() - 1.75).abs() < 1e-14);
        }
    }

    #[test]
    fn consistency_check_examples() {
        let c = Profile::constant("one", 1.0);
        let rep = profile_consistency_check(&c, &[-2.0, 0.0, 3.0]).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_relative_error, 0.0);

        let sq = Profile::new("sq", Interval::REAL_LINE, |x| Jet::new(x * x, 2.0 * x, 2.0));
        assert!(profile_consistency_check(&sq, &[-3.0, 0.1, 2.5, 40.0]).unwrap().pass);

        let wrong = Profile::new("sq", Interval::REAL_LINE, |x| Jet::new(x * x, 2.0 * x, 3.0));
        assert!(!profile_consistency_check(&wrong, &[0.5]).unwrap().pass);
    }

    #[test]
    fn consistency_check_rejects_out_of_domain_samples() {
        let p = Profile::new("log", Interval::above(0.0), |x| Jet::variable(x).ln());
        assert!(matches!(
            profile_consistency_check(&p, &[-1.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn sample_windows() {
        let (a, b) = Interval::new(0.0, 10.0).unwrap().sample_window();
        assert_eq!((a, b), (1.0, 9.0));
        let (a, b) = Interval::above(2.0).sample_window();
        assert_eq!((a, b), (3.0, 11.0));
        let (a, b) = Interval::REAL_LINE.sample_window();
        assert_eq!((a, b), (-4.0, 4.0));
    }

    fn flat_parts(alpha: Vec<f64>, eps: &[i8]) -> SpecParts {
        SpecParts {
            m: 2,
            r: 2.0,
            rho: 0.0,
            lambda_f: 0.0,
            signature: sig(eps),
            alpha,
            f: Profile::constant("f", 1.0),
            phi: Profile::constant("phi", 1.0),
            h: Profile::constant("h", 1.0),
        }
    }

    #[test]
    fn null_direction_forces_vanishing_constants() {
        let parts = flat_parts(vec![1.0, 1.0, 0.0], &[-1, 1, 1]);
        assert!(WarpedSpec::new(parts.clone()).is_ok());
        let bad = SpecParts { rho: 0.5, ..parts.clone() };
        assert!(matches!(WarpedSpec::new(bad), Err(Error::InvalidSpec(_))));
        let bad = SpecParts { lambda_f: -1.0, ..parts };
        assert!(matches!(WarpedSpec::new(bad), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_rejects_bad_dimensions_and_r() {
        let parts = flat_parts(vec![1.0, 0.0, 0.0], &[1, 1, 1]);
        assert!(WarpedSpec::new(SpecParts { m: 0, ..parts.clone() }).is_err());
        assert!(WarpedSpec::new(SpecParts { r: 0.0, ..parts.clone() }).is_err());
        assert!(WarpedSpec::new(SpecParts { r: -2.0, ..parts.clone() }).is_err());
        assert!(WarpedSpec::new(SpecParts { alpha: vec![1.0, 0.0], ..parts.clone() }).is_err());
        let spec = WarpedSpec::new(SpecParts { r: 2.5, ..parts }).unwrap();
        assert!(!spec.r_exponent().is_integral);
    }
}
