//! Exact computation of orders of contact between holomorphic curves and
//! real hypersurface germs in `C^n`.
//!
//! Everything is generic over an exact real field `R` (see [`Real`]); the
//! aliases below fix `R = BigRational`, which is what the command line tool
//! uses.

pub mod algebra;
pub mod curve;
pub mod error;
pub mod expr;
pub mod fdb;
pub mod germ;
pub mod scalar;
pub mod search;
pub mod typecalc;

pub use algebra::{CPolynomial, ExponentPair, Kind, Order, Truncation};
pub use curve::{ContactOrder, CurveJet, LowestTermProfile, PsOutcome};
pub use error::{Error, Result};
pub use scalar::{Gaussian, Real};
pub use search::SearchBudget;

pub type Rational = num_rational::BigRational;
pub type GaussianRational = Gaussian<Rational>;
pub type Polynomial = CPolynomial<Rational>;
pub type Curve = CurveJet<Rational>;
pub type DefiningFunction = germ::DefiningFunction<Rational>;
pub type GraphForm = germ::GraphForm<Rational>;
pub type PsCertificate = germ::PsCertificate<Rational>;
pub type MultilinearForm = fdb::MultilinearForm<Rational>;
pub type TypeReport = typecalc::TypeReport<Rational>;
