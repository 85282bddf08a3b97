//! Every numerical default in one record, printed by `--show-config`.

use serde::Serialize;

use crate::counting::{self, FieldConfig};
use crate::dirichlet;
use crate::operator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    /// Counting fields and integral checks.
    pub field: FieldConfig,
    /// Essentially-radial test.
    pub radial_field: FieldConfig,
    pub radial_k_max: usize,
    pub radial_tolerance: f64,
    /// Fullness defect.
    pub defect_field: FieldConfig,
    /// `z`-side quadrature of the change-of-variable check (radial × angular).
    pub z_grid: (usize, usize),
    pub energy_degree: usize,
    pub covcheck_tolerance: f64,

    pub gram_size: usize,
    pub gram_truncation: usize,
    /// Gram truncation for symbols with sampled coefficients, whose
    /// `k^{-3/2}` coefficient decay leaves an `O(1/N)` tail.
    pub gram_truncation_sampled: usize,

    pub kernel_tail_tolerance: f64,
    pub kernel_truncation_limit: usize,
    pub sample_oversample: usize,

    pub truncation_ladder: Vec<usize>,
    pub essnorm_truncation: usize,
    pub essnorm_n_max: usize,
    pub isometry_block: usize,
    pub isometry_truncation: usize,
    pub power_seed: u64,
    pub power_tolerance: f64,
    pub power_max_iterations: usize,

    /// Environment variable capping the worker threads (0 = all cores).
    pub threads_env: &'static str,
}

pub const THREADS_ENV: &str = "DIRLAB_THREADS";

impl Default for Defaults {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            radial_field: counting::radial_config(),
            radial_k_max: counting::RADIAL_K_MAX,
            radial_tolerance: counting::RADIAL_TOLERANCE,
            defect_field: counting::defect_config(),
            z_grid: counting::Z_GRID,
            energy_degree: counting::ENERGY_DEGREE,
            covcheck_tolerance: 5e-3,
            gram_size: 8,
            gram_truncation: 256,
            gram_truncation_sampled: 65_536,
            kernel_tail_tolerance: dirichlet::KERNEL_TAIL_TOLERANCE,
            kernel_truncation_limit: dirichlet::KERNEL_TRUNCATION_LIMIT,
            sample_oversample: crate::symbols::catalog::OVERSAMPLE,
            truncation_ladder: operator::TRUNCATION_LADDER.to_vec(),
            essnorm_truncation: 256,
            essnorm_n_max: 32,
            isometry_block: 64,
            isometry_truncation: 256,
            power_seed: operator::DEFAULT_SEED,
            power_tolerance: operator::POWER_TOLERANCE,
            power_max_iterations: operator::MAX_ITERATIONS,
            threads_env: THREADS_ENV,
        }
    }
}

impl Defaults {
    /// Gram truncation appropriate for `symbol`.
    pub fn gram_truncation_for(&self, symbol: &dyn crate::symbols::Symbol) -> usize {
        if symbol.sampled() {
            self.gram_truncation_sampled
        } else {
            self.gram_truncation
        }
    }
}
