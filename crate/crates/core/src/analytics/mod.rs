//! Closed-form performance expressions.
//!
//! Functions address NOMA users by power-domain layer, 0 being the strongest
//! coefficient. In SSK-NOMA user `i >= 2` decodes layer `i - 2`; in the
//! single-antenna baseline user `i` decodes layer `i - 1`.

pub mod abep;
pub mod capacity;
pub mod fading;
pub mod outage;
pub mod special;
pub mod union_bound;

pub use abep::{
    abep_u1, abep_u2, abep_u3, conditional_bep_u1, conditional_bep_u2, conditional_bep_u3,
    pep_u1_pair, LinkParams, PairEnergySpectrum, ZetaSet,
};
pub use capacity::{ergodic_capacity_noma_user, ergodic_capacity_u1, sum_rate};
pub use fading::{chi2_cdf, chi2_pdf};
pub use outage::{outage_noma_user, outage_threshold_psi, outage_u1, OutageTargets, ThresholdRule};
pub use special::{exp_integral, q_func};
pub use union_bound::{noma_pep, union_bound_ber, PepTerm, UnionBound};
