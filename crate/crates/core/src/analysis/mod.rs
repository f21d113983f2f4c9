//! Structural and extremal checks on AMCs, and the report builders behind
//! the `census`, `extremal`, `alpha`, `additions` and `gap` commands.

pub mod alpha;
pub mod extremal;
pub mod irredundant;
pub mod reports;

pub use alpha::{alpha_decompose, AlphaDecomposition, AlphaError};
pub use extremal::{extremal_survey, extremal_survey_capped, ExtremalError, ExtremalReport};
pub use reports::{
    addition_count_report, alpha_sweep, census, count_bound, gap_report, AdditionCountReport,
    AlphaSweepReport, CensusReport, GapReport, ReportError,
};
