//! Dimension-wise orthogonal polynomial expansions for dependent random
//! inputs.
//!
//! The library builds measure-consistent multivariate orthogonal polynomial
//! bases per variable subset, solves the degree-decoupled Gram systems for
//! the expansion coefficients (GPDD), and provides the degree-wise chaos
//! expansion (GPCE) over the full variable vector for accuracy/cost
//! comparisons. Verification lives in [`oracle`]: exact Dirichlet moments,
//! simplex quadrature, and seeded Monte Carlo, none of which share code with
//! the analytic moment path.

pub mod gpce;
pub mod gpdd;
pub mod linalg;
pub mod measure;
pub mod multiindex;
pub mod oracle;
pub mod orthopoly;
pub mod polynomial;

pub use measure::{Marginal, Measure, MeasureError, MeasureKind};
pub use multiindex::{MultiIndex, SubsetId};
pub use polynomial::Polynomial;
