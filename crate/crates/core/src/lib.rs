//! Construction and numerical certification of quasi-Einstein warped products
//! `(R^n, g/phi^2) x_f F^m` whose data depend on a single invariant `xi = sum(alpha_i x_i)`.

pub mod curvature;
pub mod document;
pub mod error;
pub mod expr;
pub mod families;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod oracle;
pub mod sweep;
pub mod verifier;

pub use error::{Error, Result};
pub use geometry::{causal_class, xi_at, CausalClass, Direction, Interval, Profile, Signature, SpecParts, WarpedSpec};
pub use jet::Jet;
