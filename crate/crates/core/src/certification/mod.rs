//! Numerical checks of the recovery guarantee's ingredients: moment
//! conditions, exact near-isotropy and 2-design identities, robust
//! injectivity, truncation events, and golfing-scheme dual certificates.

mod enumeration;
mod golfing;
mod injectivity;
mod moments;
mod truncation;

pub use enumeration::{
    check_near_isotropy_exact, check_two_design_exact, symmetric_projector_doubled, variance_bound_check,
    Expectation, IsotropyReport, TwoDesignReport, VarianceReport, DEFAULT_ENUMERATION_BUDGET,
};
pub use golfing::{
    certify_optimality, format_log, golfing_construct, identity_witness, range_witness, tangent_bound,
    verify_certificate, CertificateCheck, DualCertificate, GolfingFailure, GolfingOutcome, GolfingParams,
    GolfingReport, GolfingStep, Hypothesis, OptimalityVerdict, DEFAULT_FIRST_BATCH, DEFAULT_LATER_BATCH,
};
pub use injectivity::{injectivity_spectrum, quadratic_form_gap, restricted_operator, InjectivityReport, UPPER_BOUND_SAMPLES};
pub use moments::{validate_moments, MomentReport};
pub use truncation::{truncation_statistics, TruncationStatistics};
