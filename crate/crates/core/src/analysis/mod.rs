//! Whitney covers of balls and empirical Poincaré audits.

pub mod gaussian;
pub mod poincare;
pub mod whitney;

pub use gaussian::{gaussian_envelope_fit, EnvelopeFit};
pub use poincare::{
    ball_operator, complex_poincare_check, convex_mean_inequality_check, group_poincare_check, neumann_poincare_constant,
    poincare_transfer, ChartBox, PoincareReport, TransferReport,
};
pub use whitney::{audit_cover, whitney_cover, CoverAudit, WhitneyCover};
