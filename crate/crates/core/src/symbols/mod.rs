//! Analytic self-maps of the disk.
//!
//! Every symbol implements [`Symbol`]; the catalog variants are registered
//! by name in a [`SymbolRegistry`] and built from spec strings such as
//! `"mobius:p=0.5|slit:c=0.5"`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::series::TruncatedSeries;

pub mod catalog;
mod registry;

pub use registry::{parse_complex, SpecArgs, SymbolRegistry};

/// Threshold below which `|φ(0)|` counts as zero.
pub const ORIGIN_TOLERANCE: f64 = 1e-12;

pub trait Symbol: Send + Sync + fmt::Debug {
    /// Canonical spec text; parsing it with the catalog registry rebuilds
    /// an equivalent symbol.
    fn spec(&self) -> String;

    fn eval(&self, z: Complex64) -> Complex64;

    fn derivative(&self, z: Complex64) -> Complex64;

    /// Taylor coefficients `a_0..=a_N`.
    fn taylor(&self, degree: usize) -> TruncatedSeries;

    /// Whether [`Symbol::taylor`] is estimated from samples rather than
    /// given in closed form.
    fn sampled(&self) -> bool {
        false
    }

    /// Ground truth where it is known.
    fn univalent(&self) -> Option<bool>;

    fn full(&self) -> Option<bool>;

    /// `||φ||_∞`.
    fn sup_modulus(&self) -> f64;

    fn fixes_origin(&self) -> bool {
        self.eval(Complex64::new(0.0, 0.0)).norm() < ORIGIN_TOLERANCE
    }

    fn metadata(&self) -> Metadata {
        Metadata {
            fixes_origin: self.fixes_origin(),
            univalent: self.univalent(),
            full: self.full(),
            sup_modulus: self.sup_modulus(),
        }
    }
}

pub type SymbolMap = Arc<dyn Symbol>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metadata {
    pub fixes_origin: bool,
    pub univalent: Option<bool>,
    pub full: Option<bool>,
    pub sup_modulus: f64,
}

/// The 64×64 polar grid used to spot-check the self-map property:
/// radii `i/65`, `i = 1..=64`, and 64 uniform angles.
pub fn validation_grid() -> Vec<Complex64> {
    let mut points = Vec::with_capacity(64 * 64);
    for i in 1..=64 {
        let r = i as f64 / 65.0;
        for j in 0..64 {
            points.push(Complex64::from_polar(r, TAU * j as f64 / 64.0));
        }
    }
    points
}

/// Largest `|φ(z)|` over the validation grid.
pub fn max_modulus_on_grid(symbol: &dyn Symbol) -> f64 {
    validation_grid()
        .into_iter()
        .map(|z| symbol.eval(z).norm())
        .fold(0.0, f64::max)
}

/// Largest `|φ|` over `nodes` equispaced points of the circle `|z| = radius`.
pub fn max_modulus_on_circle(symbol: &dyn Symbol, radius: f64, nodes: usize) -> f64 {
    (0..nodes)
        .map(|j| {
            let z = Complex64::from_polar(radius, TAU * j as f64 / nodes as f64);
            symbol.eval(z).norm()
        })
        .fold(0.0, f64::max)
}
