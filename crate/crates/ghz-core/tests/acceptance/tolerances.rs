//! Pass thresholds, one block per criterion.

pub const TRACE_DEVIATION: f64 = 1e-9;
pub const MIN_EIGENVALUE: f64 = -1e-8;

pub const POPULATION_GAP: f64 = 0.02;

/// Allowed ratio either way between simulated and predicted error.
pub const ERROR_FACTOR: f64 = 2.0;

pub const B_TABLE_ABS: f64 = 1.0;
pub const KAPPA_TABLE_ABS: f64 = 0.01;

pub const LAMBERT_ANCHOR_ABS: f64 = 0.01;
pub const LAMBERT_FACTOR_ABS: f64 = 0.005;
pub const LAMBERT_RESIDUAL: f64 = 1e-12;

pub const STARK_REL: f64 = 1e-12;
pub const ANNIHILATION: f64 = 1e-12;

pub const STRONG_COEFF_REL: f64 = 0.02;
pub const STRONG_RATE_REL: f64 = 0.10;

/// Relative drift allowed against the frozen optimizer outputs.
pub const FIXTURE_REL: f64 = 1e-6;
