//! Frozen experiment defaults and inequality constants.
//!
//! Any change here must bump [`DEFAULTS_VERSION`]; the golden test in
//! `tests/defaults_golden.rs` pins every value.

/// Version tag of this defaults table, echoed in every report header.
pub const DEFAULTS_VERSION: &str = "1";

/// Largest state space enumerated exactly (`|S|^|Λ|`).
pub const ENUMERATION_CAP: u64 = 1 << 26;

/// Largest state space for exact blow-up computations.
pub const BLOWUP_EXACT_CAP: u64 = 1 << 22;

/// Largest set `C` scanned per sample in sampled blow-up mode.
pub const BLOWUP_SAMPLED_SET_CAP: usize = 1 << 16;

/// Pattern tables up to this many entries are stored densely.
pub const DENSE_TABLE_CAP: u64 = 1 << 20;

/// Local functions may depend on at most this many sites.
pub const MAX_DEPENDENCE_SITES: usize = 20;

/// Base λ grid for exponential-moment tests; scaled by `1/‖δF‖₂`, used with
/// both signs.
pub const LAMBDA_BASE_GRID: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

/// Grid points with `λ ‖δF‖₁` above this are dropped (MGF not estimable).
pub const LAMBDA_OSCILLATION_CAP: f64 = 20.0;

/// Deviation events use the margin `ε / EVENT_MARGIN_DIVISOR`.
pub const EVENT_MARGIN_DIVISOR: f64 = 3.0;

/// Constant of the volume deviation bound `exp(-|Λ| ε² / (36 D ‖δf‖₁²))`.
pub const VOLUME_DEVIATION_CONSTANT: f64 = 36.0;

/// Volume ratio threshold `((2n+1)/(2(n-k)+1))^d ≤ 5/4` defining `N̆`.
pub const FREQUENCY_VOLUME_RATIO: f64 = 5.0 / 4.0;

/// `ϱ = 2ε / (5 (2k+1)^d)`: numerator and denominator factors.
pub const FREQUENCY_RHO_NUMERATOR: f64 = 2.0;
pub const FREQUENCY_RHO_DENOMINATOR: f64 = 5.0;

/// Additive slack `2/e` of the absolute log-ratio bound.
pub const ABS_ENTROPY_SLACK: f64 = 2.0 / std::f64::consts::E;

/// Bounded-differences constant of a product measure.
pub const PRODUCT_MEASURE_D: f64 = 1.0 / 8.0;

/// Burn-in sweeps at high and low temperature.
pub const BURNIN_HIGH_TEMPERATURE: usize = 1_000;
pub const BURNIN_LOW_TEMPERATURE: usize = 10_000;

/// Number of batches for batch-means standard errors.
pub const BATCH_COUNT: usize = 32;

/// Statistical verdicts use this many standard errors.
pub const SIGMA_MULTIPLIER: f64 = 3.0;

/// Sites × sweeps × chains budget of one sampler run.
pub const SAMPLER_BUDGET: u64 = 1 << 40;

/// Relative tolerance for exact inequality checks.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Critical inverse temperature of the square-lattice Ising model,
/// `log(1 + √2) / 2`.
pub fn critical_beta_2d_ising() -> f64 {
    (1.0 + std::f64::consts::SQRT_2).ln() / 2.0
}
