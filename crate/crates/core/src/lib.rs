//! Arbitrary-precision evaluation of the Riemann zeta function and of
//! digit-restricted Dirichlet series `K_{b,A}(s) = sum' n^-s` through
//! moment-recurrence series with geometric convergence and a-priori error
//! bounds.

pub mod digitset;
pub mod error;
pub mod mgf;
pub mod moments;
pub mod numerics;
pub mod oracle;
pub mod series;

pub use digitset::{parse_digit_spec, DigitSet};
pub use error::{Error, Result};
pub use mgf::{evaluate_e, evaluate_f, fourier_coefficient, LimitFunctionEvaluation, MgfEvaluation};
pub use moments::{MomentCache, MomentTable};
pub use numerics::{BernoulliCache, ComplexParameter, PrecisionContext};
pub use oracle::{double_precision_closed_form_demo, restricted_sum_bracket, zeta_reference, Bracket};
pub use series::{evaluate_series, plan_terms, SeriesOptions, SeriesResult, TermPlan};
