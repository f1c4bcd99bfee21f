//! The JSON problem document read by the command line and its resolution into a
//! [`WarpedSpec`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::families::{
    cauchy_euler_family, exp_null_family, theorem4_family, theorem5_family, CauchyEulerParams, DerivedConstants,
    ExpNullParams, FamilyParams, FamilySolution,
};
use crate::geometry::{Interval, Profile, Signature, SpecParts, WarpedSpec};
use crate::ode::{integrate_implicit_family, solve_null_h, ImplicitParams, ImplicitRun, IntegratorConfig, NullSolution, StopReason};
use crate::verifier::ToleranceProfile;

/// A problem instance as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(rename = "lambda_F", default)]
    pub lambda_f: f64,
    pub eps: Vec<i8>,
    pub alpha: Vec<f64>,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    Theorem4(FamilyParams),
    Theorem5(FamilyParams),
    ExpNull(ExpNullParams),
    CauchyEuler(CauchyEulerParams),
    Implicit(ImplicitParams),
    Custom(CustomFamily),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Theorem4(_) => "theorem4",
            Family::Theorem5(_) => "theorem5",
            Family::ExpNull(_) => "exp_null",
            Family::CauchyEuler(_) => "cauchy_euler",
            Family::Implicit(_) => "implicit",
            Family::Custom(_) => "custom",
        }
    }
}

/// Profiles given as expressions in `xi`; `h` may instead come from the linear
/// null-direction equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomFamily {
    pub f: String,
    pub phi: String,
    pub h: CustomPotential,
    #[serde(default)]
    pub domain: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CustomPotential {
    Expression(String),
    NullOde { null_ode: NullOdeInit },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullOdeInit {
    pub h0: f64,
    pub h0_prime: f64,
    pub xi_start: f64,
    pub xi_end: f64,
}

/// A resolved document.
#[derive(Debug, Clone)]
pub struct Built {
    pub family: &'static str,
    pub spec: WarpedSpec,
    pub constants: DerivedConstants,
    pub run: Option<ImplicitRun>,
    pub null_solution: Option<NullSolution>,
    /// `numeric` for integrated families, `analytic` otherwise.
    pub default_profile: ToleranceProfile,
}

impl Built {
    pub fn stop_reason(&self) -> Option<StopReason> {
        self.run
            .as_ref()
            .map(|r| r.stop)
            .or(self.null_solution.as_ref().map(|s| s.stop))
    }
}

fn expression_profile(label: &str, src: &str, domain: Interval) -> Result<Profile> {
    let expr = Expression::parse(src)?;
    Ok(Profile::new(label, domain, move |xi| expr.eval(xi)))
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("malformed spec document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn build(&self) -> Result<Built> {
        if self.eps.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: self.eps.len(),
            });
        }
        let signature = Signature::new(self.eps.clone())?;
        let cfg = self.integrator.unwrap_or_default();
        let (n, m, r) = (self.n, self.m, self.r);
        let mut run = None;
        let mut null_solution = None;
        let mut default_profile = ToleranceProfile::Analytic;
        let solution = match &self.family {
            Family::Theorem4(p) => theorem4_family(n, m, r, p)?,
            Family::Theorem5(p) => {
                if r != 1.0 {
                    return Err(Error::InvalidSpec(format!("theorem5 family requires r = 1, got {r}")));
                }
                theorem5_family(n, m, p)?
            }
            Family::ExpNull(p) => exp_null_family(n, m, r, p)?,
            Family::CauchyEuler(p) => cauchy_euler_family(n, m, r, p)?,
            Family::Implicit(p) => {
                let integrated = integrate_implicit_family(n, m, r, p, &cfg)?;
                let solution = integrated.profiles()?;
                run = Some(integrated);
                default_profile = ToleranceProfile::Numeric;
                solution
            }
            Family::Custom(c) => {
                let f = expression_profile("custom.f", &c.f, c.domain)?;
                let phi = expression_profile("custom.phi", &c.phi, c.domain)?;
                let h = match &c.h {
                    CustomPotential::Expression(src) => expression_profile("custom.h", src, c.domain)?,
                    CustomPotential::NullOde { null_ode } => {
                        let sol = solve_null_h(
                            n,
                            m,
                            r,
                            &f,
                            &phi,
                            null_ode.h0,
                            null_ode.h0_prime,
                            (null_ode.xi_start, null_ode.xi_end),
                            &cfg,
                        )?;
                        let h = sol.h.clone();
                        null_solution = Some(sol);
                        default_profile = ToleranceProfile::Numeric;
                        h
                    }
                };
                let domain = f.domain().intersect(&phi.domain())?.intersect(&h.domain())?;
                FamilySolution {
                    f,
                    phi,
                    h,
                    domain,
                    constants: DerivedConstants {
                        domain,
                        ..Default::default()
                    },
                }
            }
        };
        let spec = WarpedSpec::new(SpecParts {
            m,
            r,
            rho: self.rho,
            lambda_f: self.lambda_f,
            signature,
            alpha: self.alpha.clone(),
            f: solution.f,
            phi: solution.phi,
            h: solution.h,
        })?;
        if spec.n() != n {
            return Err(Error::Dimension {
                expected: n,
                got: spec.n(),
            });
        }
        Ok(Built {
            family: self.family.name(),
            spec,
            constants: solution.constants,
            run,
            null_solution,
            default_profile,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem4_document_resolves_root() {
        let doc = SpecDocument::from_json(
            r#"{"n":3,"m":1,"r":2,"rho":0,"lambda_F":0,"eps":[1,1,1],"alpha":[1,0,0],
                "family":{"type":"theorem4","k":1,"branch":"plus"}}"#,
        )
        .unwrap();
        let built = doc.build().unwrap();
        let n_root = built.constants.n_root.unwrap();
        assert!((n_root - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(built.default_profile, ToleranceProfile::Analytic);
    }

    #[test]
    fn custom_document_with_null_ode() {
        let doc = SpecDocument::from_json(
            r#"{"n":3,"m":1,"r":2,"eps":[-1,1,1],"alpha":[1,1,0],
                "family":{"type":"custom","f":"2","phi":"3",
                          "h":{"null_ode":{"h0":1,"h0_prime":0.5,"xi_start":0,"xi_end":1}}}}"#,
        )
        .unwrap();
        let built = doc.build().unwrap();
        assert_eq!(built.default_profile, ToleranceProfile::Numeric);
        let h = built.spec.h().at(0.5).unwrap();
        assert!((h.value - 1.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatches() {
        let bad_dim = r#"{"n":4,"m":1,"r":2,"eps":[1,1,1],"alpha":[1,0,0],"family":{"type":"theorem4","k":1}}"#;
        assert!(SpecDocument::from_json(bad_dim).unwrap().build().is_err());
        let bad_r = r#"{"n":3,"m":1,"r":2,"eps":[1,1,1],"alpha":[1,0,0],"family":{"type":"theorem5","k":1}}"#;
        assert!(SpecDocument::from_json(bad_r).unwrap().build().is_err());
        let unknown = r#"{"n":3,"m":1,"r":2,"eps":[1,1,1],"alpha":[1,0,0],"family":{"type":"nope"}}"#;
        assert!(SpecDocument::from_json(unknown).is_err());
        let parse = r#"{"n":3,"m":1,"r":2,"eps":[1,1,1],"alpha":[1,0,0],"family":{"type":"custom","f":"1+","phi":"1","h":"1"}}"#;
        assert!(matches!(SpecDocument::from_json(parse).unwrap().build(), Err(Error::Parse { .. })));
    }

    #[test]
    fn documents_round_trip() {
        let text = r#"{"n":3,"m":2,"r":2,"eps":[1,1,1],"alpha":[1,0,0],
            "family":{"type":"implicit","k":1,"x0":1,"z0":0.5,"xi_start":0,"xi_end":1},
            "integrator":{"step":0.002}}"#;
        let doc = SpecDocument::from_json(text).unwrap();
        assert_eq!(doc.integrator.unwrap().step, 0.002);
        assert_eq!(doc.integrator.unwrap().tolerance, 1e-8);
        assert_eq!(SpecDocument::from_json(&doc.to_json()).unwrap(), doc);
    }
}
