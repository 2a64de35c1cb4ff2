//! Disorder relevance diagnostics and the delocalization certificate.

pub mod certificate;
pub mod decomposition;
pub mod frac_moment;
pub mod second_moment;

pub use certificate::{
    deloc_certificate, ez_delta, asymptotic_ell, asymptotic_scale, rho_terms, BoundSource, CertParams, CertificateReport,
    RhoTerms, TiltSchedule,
};
pub use decomposition::{decomposition_identity_check, DecompositionCheck};
pub use frac_moment::{
    frac_moment_jensen_bound, frac_moment_jensen_bounds, frac_moment_mc, frac_moment_mc_grid, frac_moment_tilt_bound,
    frac_moment_tilt_bounds, max_tilt, strip_size, JensenBounds, MonteCarloMoment, DP_SLACK,
};
pub use second_moment::{
    compute_beta1, compute_n_beta, n_beta_scaling, overlap_excess, second_moment_curve, NBeta, NBetaScaling,
    SecondMomentCurve,
};
