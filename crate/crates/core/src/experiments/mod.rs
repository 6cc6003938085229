//! Verification campaigns and their reports.

pub mod campaign;
pub mod exponents;
pub mod localization;
pub mod pipeline;
pub mod report;
pub mod rh;
pub mod scan;

pub use campaign::{
    localization_campaign, refinement_levels, rh_campaign, LocalizationOutcome, LocalizationSetup, RhOutcome,
    RhSetup, RhStability, SPREAD_FACTOR,
};
pub use exponents::{fractional_exponents, ExponentBook};
pub use localization::{cone_containment, localization_check, resolve_m, LocalizationRecord, DEFAULT_M, ESCALATED_M};
pub use pipeline::{run, RunOutput, IDENTITY_TOL};
pub use report::{
    report_emit, write_summary, CertificateEntry, Check, RecordCounts, Records, Summary, SUMMARY_SCHEMA,
};
pub use rh::{boundary_rh, interior_rh, spread, RHRecord, RhKind};
pub use scan::{
    solvability_scan, ScanGap, ScanOutcome, ScanRecord, ScanSetup, ScanVerdict, Verdict, RANGE_LOWER,
    STABILITY_GROWTH,
};
