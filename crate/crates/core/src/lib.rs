//! Multivariate generalized Pareto (MGP) and multivariate extreme value (MEV)
//! distributions.
//!
//! A standard MGP vector is `Z = E + S` with `E` unit exponential and `S` an
//! independent dependence vector with `max S = 0`. Everything else here is
//! derived from the law of `S`:
//!
//! ```text
//! Y = sigma * (exp(xi * Z) - 1) / xi          general margins
//! Lambda(B) = Lambda(L) * P(Z in B)           B subset of L = {max x > 0}
//! l(y) = Lambda({x : x !<= -log y})           stable tail dependence function
//! G(x) = exp(-l(-log G_1(x_1), ..., -log G_D(x_D)))
//! ```

pub mod error;
pub mod generators;
pub mod margins;
pub mod mc;
pub mod mev;
pub mod mgp;
pub mod parametric;
pub mod pointproc;
pub mod quad;
pub mod region;
pub mod rng;
pub mod stability;
pub mod stats;
pub mod tailmeasure;
pub mod xvec;

pub use error::{Error, Result};
pub use generators::{SGenerator, TiltConfig, TiltMethod};
pub use margins::{gev_cdf, gp_margin, gp_margin_inverse, GevParams, MarginParams};
pub use mc::Estimate;
pub use mev::MevModel;
pub use mgp::MgpModel;
pub use quad::QuadConfig;
pub use region::Region;
pub use rng::RngStream;
pub use tailmeasure::{AngularSample, TailFunctions};
pub use xvec::{exceeds, Samples, XVec};
