use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use super::{max_modulus_on_circle, max_modulus_on_grid, Symbol, SymbolMap};
use crate::error::{Error, Result};
use crate::series::{adaptive_sample_radius, coefficients_from_samples, TruncatedSeries};

/// Oversampling factor for sampled Taylor coefficients.
pub const OVERSAMPLE: usize = 8;

fn sampled_taylor<F>(eval: F, degree: usize) -> TruncatedSeries
where
    F: Fn(Complex64) -> Complex64,
{
    coefficients_from_samples(eval, degree, adaptive_sample_radius(degree), OVERSAMPLE)
        .expect("sampling radius lies in (0, 1)")
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `z ↦ e^{iθ} z`.
#[derive(Debug, Clone)]
pub struct Rotation {
    theta: f64,
    factor: Complex64,
}

pub fn rotation(theta: f64) -> SymbolMap {
    Arc::new(Rotation {
        theta,
        factor: Complex64::from_polar(1.0, theta),
    })
}

impl Symbol for Rotation {
    fn spec(&self) -> String {
        format!("rotation:theta={}", self.theta)
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        self.factor * z
    }
    fn derivative(&self, _z: Complex64) -> Complex64 {
        self.factor
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        TruncatedSeries::monomial(1, degree).scale(self.factor)
    }
    fn univalent(&self) -> Option<bool> {
        Some(true)
    }
    fn full(&self) -> Option<bool> {
        Some(true)
    }
    fn sup_modulus(&self) -> f64 {
        1.0
    }
}

/// The self-inverse disk automorphism `α_p(z) = (p - z)/(1 - conj(p) z)`,
/// which swaps `p` and `0`.
#[derive(Debug, Clone)]
pub struct Automorphism {
    p: Complex64,
}

pub fn automorphism(p: Complex64) -> Result<SymbolMap> {
    if p.norm() >= 1.0 || !p.norm().is_finite() {
        return Err(Error::OutOfDomain {
            what: "|p|",
            value: p.norm(),
            domain: "[0, 1)",
        });
    }
    Ok(Arc::new(Automorphism { p }))
}

impl Symbol for Automorphism {
    fn spec(&self) -> String {
        format!("mobius:p={}", super::registry::format_complex_spec(self.p))
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        (self.p - z) / (1.0 - self.p.conj() * z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        let d = 1.0 - self.p.conj() * z;
        (self.p.norm_sqr() - 1.0) / (d * d)
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        // a_0 = p, a_k = -(1 - |p|^2) conj(p)^{k-1}
        let pc = self.p.conj();
        let mut coeffs = vec![self.p];
        let mut term = Complex64::new(-(1.0 - self.p.norm_sqr()), 0.0);
        for _ in 1..=degree {
            coeffs.push(term);
            term *= pc;
        }
        TruncatedSeries::new(coeffs)
    }
    fn univalent(&self) -> Option<bool> {
        Some(true)
    }
    fn full(&self) -> Option<bool> {
        Some(true)
    }
    fn sup_modulus(&self) -> f64 {
        1.0
    }
}

/// The linear fractional map fixing `0` and `1` with `φ_t(-1) = -1/t`:
/// `z ↦ 2z/((1+t) + (1-t)z)`. Its image is the disk on the real diameter
/// `[-1/t, 1]`, tangent to the unit circle at `1`.
#[derive(Debug, Clone)]
pub struct BoundaryFixedLft {
    t: f64,
}

pub fn boundary_fixed_lft(t: f64) -> Result<SymbolMap> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t,
            domain: "[1, ∞)",
        });
    }
    Ok(Arc::new(BoundaryFixedLft { t }))
}

impl Symbol for BoundaryFixedLft {
    fn spec(&self) -> String {
        format!("lft:t={}", self.t)
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        2.0 * z / ((1.0 + self.t) + (1.0 - self.t) * z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        let d = (1.0 + self.t) + (1.0 - self.t) * z;
        2.0 * (1.0 + self.t) / (d * d)
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        // (2/(1+t)) z / (1 - q z), q = (t-1)/(t+1)
        let q = (self.t - 1.0) / (self.t + 1.0);
        let mut coeffs = vec![zero()];
        let mut term = 2.0 / (1.0 + self.t);
        for _ in 1..=degree {
            coeffs.push(Complex64::new(term, 0.0));
            term *= q;
        }
        TruncatedSeries::new(coeffs)
    }
    fn univalent(&self) -> Option<bool> {
        Some(true)
    }
    fn full(&self) -> Option<bool> {
        Some(self.t == 1.0)
    }
    fn sup_modulus(&self) -> f64 {
        1.0
    }
}

/// `z ↦ z^k`; its counting function is `k` almost everywhere.
#[derive(Debug, Clone)]
pub struct Monomial {
    k: u32,
}

pub fn monomial(k: u32) -> Result<SymbolMap> {
    if k == 0 {
        return Err(Error::OutOfDomain {
            what: "k",
            value: 0.0,
            domain: ">= 1",
        });
    }
    Ok(Arc::new(Monomial { k }))
}

impl Symbol for Monomial {
    fn spec(&self) -> String {
        format!("power:k={}", self.k)
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        z.powu(self.k)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.k as f64 * z.powu(self.k - 1)
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        TruncatedSeries::monomial(self.k as usize, degree)
    }
    fn univalent(&self) -> Option<bool> {
        Some(self.k == 1)
    }
    fn full(&self) -> Option<bool> {
        Some(true)
    }
    fn sup_modulus(&self) -> f64 {
        1.0
    }
}

/// Koebe function `k(z) = z/(1-z)^2`.
fn koebe(z: Complex64) -> Complex64 {
    let d = 1.0 - z;
    z / (d * d)
}

fn koebe_derivative(z: Complex64) -> Complex64 {
    let d = 1.0 - z;
    (1.0 + z) / (d * d * d)
}

/// Branch of `k^{-1}` with `k^{-1}(0) = 0`, written without cancellation:
/// `((2w+1) - sqrt(4w+1))/(2w) = 2w/((2w+1) + sqrt(4w+1))`.
/// The principal root is continuous on `C \ (-∞, -1/4]`.
fn koebe_inverse(w: Complex64) -> Complex64 {
    let two_w = 2.0 * w;
    two_w / ((two_w + 1.0) + (4.0 * w + 1.0).sqrt())
}

/// `φ_c = k^{-1}(c k(z))`: a univalent map of the disk onto the disk minus
/// a radial slit along the negative real axis. The slit has zero area, so
/// `φ_c` is full and fixes the origin.
#[derive(Debug, Clone)]
pub struct RadialSlit {
    c: f64,
}

pub fn radial_slit_full_map(c: f64) -> Result<SymbolMap> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::OutOfDomain {
            what: "c",
            value: c,
            domain: "(0, 1)",
        });
    }
    Ok(Arc::new(RadialSlit { c }))
}

impl RadialSlit {
    /// Inner end of the slit: the point of `(-1, 0)` where `k = -c/4`.
    pub fn slit_tip(&self) -> f64 {
        koebe_inverse(Complex64::new(-self.c / 4.0, 0.0)).re
    }
}

impl Symbol for RadialSlit {
    fn spec(&self) -> String {
        format!("slit:c={}", self.c)
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        koebe_inverse(self.c * koebe(z))
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.c * koebe_derivative(z) / koebe_derivative(self.eval(z))
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        sampled_taylor(|z| self.eval(z), degree)
    }
    fn sampled(&self) -> bool {
        true
    }
    fn univalent(&self) -> Option<bool> {
        Some(true)
    }
    fn full(&self) -> Option<bool> {
        Some(true)
    }
    fn sup_modulus(&self) -> f64 {
        1.0
    }
}

/// A polynomial self-map with exact coefficients.
#[derive(Debug, Clone)]
pub struct Polynomial {
    series: TruncatedSeries,
    univalent: Option<bool>,
    full: Option<bool>,
    sup_modulus: f64,
}

/// Radius of the open-disk check that polynomial symbols must pass.
pub const POLYNOMIAL_CHECK_RADIUS: f64 = 0.999;
const POLYNOMIAL_CHECK_NODES: usize = 4096;

pub fn polynomial(coeffs: Vec<Complex64>) -> Result<SymbolMap> {
    if coeffs.is_empty() {
        return Err(Error::Precondition(
            "polynomial needs at least one coefficient".into(),
        ));
    }
    let mut coeffs = coeffs;
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    let series = TruncatedSeries::new(coeffs);
    let eval_on_circle = |r: f64| {
        (0..POLYNOMIAL_CHECK_NODES)
            .map(|j| {
                let z = Complex64::from_polar(r, TAU * j as f64 / POLYNOMIAL_CHECK_NODES as f64);
                series.eval(z).norm()
            })
            .fold(0.0, f64::max)
    };
    let inner_sup = eval_on_circle(POLYNOMIAL_CHECK_RADIUS);
    if inner_sup >= 1.0 || !inner_sup.is_finite() {
        return Err(Error::NotSelfMap { sup: inner_sup });
    }
    let sup_modulus = eval_on_circle(1.0).min(1.0);

    let degree = series.degree();
    let (a0, a1) = (series.coeff(0), series.coeff(1));
    let (univalent, full) = match degree {
        0 => (Some(false), Some(false)),
        1 => (
            Some(a1.norm() > 0.0),
            Some(a0.norm() == 0.0 && (a1.norm() - 1.0).abs() < 1e-15),
        ),
        _ => {
            let critical = critical_points_inside(&series);
            (if critical > 0 { Some(false) } else { None }, None)
        }
    };
    Ok(Arc::new(Polynomial {
        series,
        univalent,
        full,
        sup_modulus,
    }))
}

/// Zeros of `p'` in `|z| < 0.9999`, by the argument principle applied to `p'`.
fn critical_points_inside(p: &TruncatedSeries) -> usize {
    let dp = p.derivative();
    let ddp = dp.derivative();
    let nodes = 4096;
    let radius = 0.9999;
    let sum: Complex64 = (0..nodes)
        .map(|j| {
            let z = Complex64::from_polar(radius, TAU * j as f64 / nodes as f64);
            ddp.eval(z) * z / dp.eval(z)
        })
        .sum();
    (sum.re / nodes as f64).round().max(0.0) as usize
}

impl Symbol for Polynomial {
    fn spec(&self) -> String {
        let parts: Vec<String> = self
            .series
            .coeffs()
            .iter()
            .map(|&c| super::registry::format_complex_spec(c))
            .collect();
        format!("poly:{}", parts.join(","))
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        self.series.eval(z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.series.derivative().eval(z)
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        self.series.with_degree(degree)
    }
    fn univalent(&self) -> Option<bool> {
        self.univalent
    }
    fn full(&self) -> Option<bool> {
        self.full
    }
    fn sup_modulus(&self) -> f64 {
        self.sup_modulus
    }
}

/// Pointwise composition `outer ∘ inner`.
#[derive(Debug, Clone)]
pub struct Composition {
    outer: SymbolMap,
    inner: SymbolMap,
    sup_modulus: f64,
}

pub fn compose(outer: SymbolMap, inner: SymbolMap) -> Result<SymbolMap> {
    let mut composed = Composition {
        outer,
        inner,
        sup_modulus: 1.0,
    };
    let grid_sup = max_modulus_on_grid(&composed);
    if grid_sup >= 1.0 || !grid_sup.is_finite() {
        return Err(Error::NotSelfMap { sup: grid_sup });
    }
    if composed.full() != Some(true) {
        composed.sup_modulus = max_modulus_on_circle(&composed, 0.9999, 4096).min(1.0);
    }
    Ok(Arc::new(composed))
}

impl Symbol for Composition {
    fn spec(&self) -> String {
        format!("{}|{}", self.outer.spec(), self.inner.spec())
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        self.outer.eval(self.inner.eval(z))
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.outer.derivative(self.inner.eval(z)) * self.inner.derivative(z)
    }
    fn taylor(&self, degree: usize) -> TruncatedSeries {
        sampled_taylor(|z| self.eval(z), degree)
    }
    fn sampled(&self) -> bool {
        true
    }
    fn univalent(&self) -> Option<bool> {
        match (self.outer.univalent(), self.inner.univalent()) {
            (Some(a), Some(b)) => Some(a && b),
            _ => None,
        }
    }
    fn full(&self) -> Option<bool> {
        let both_full = self.outer.full() == Some(true) && self.inner.full() == Some(true);
        (both_full && self.outer.univalent() == Some(true)).then_some(true)
    }
    fn sup_modulus(&self) -> f64 {
        self.sup_modulus
    }
}
