//! Integration of the type dynamics and subcriticality certificates.

mod certificate;
mod integrate;
pub(crate) mod sci;

pub use certificate::{
    certificate_roundtrip, certify, euler_ode_compare, find_r, Certificate, CertificateStatus, Metadata, Refinement,
    Sample, StoppingTime, TuningRecord, DEFAULT_THRESHOLD, MAX_EULER_STEP, MAX_STORED_SAMPLES, RECOMPUTE_TOLERANCE,
    R_STABILITY, SCHEMA_VERSION,
};
pub use integrate::{integrate, integrate_until, IntegrationControl, Method, StopReason, Trajectory, ABORT_MARGIN};
#[allow(unused_imports)]
pub(crate) use integrate::interpolate;
