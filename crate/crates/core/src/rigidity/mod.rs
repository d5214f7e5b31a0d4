//! Property 𝒲 certificates for unions of cosets, and witness families in
//! normal closures that separate points of outer space.

mod propw;
mod witness;

pub use propw::{
    check_property_w, propw_certificate, CertificateLimits, CosetBound, CosetSpec, PropertyWCertificate,
    PropertyWReport, Provenance, Violation,
};
pub use witness::{
    convergence_csv, convergence_report, convergence_row, rigidity_distinguisher, ConvergenceRow, Distinction,
    WitnessFamily, CONNECTOR_LENGTH,
};
