//! Polar quadrature on disks: Gauss–Legendre in the radius, trapezoid in the angle.
//!
//! All integrals are taken against the normalized area measure
//! `dA = r dr dθ / π`, so the unit disk has mass 1.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Gauss–Legendre nodes and weights mapped to `[a, b]`, in increasing order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let degree = NonZeroUsize::new(n.max(1)).expect("nonzero");
    let rule = GaussLegendre::new(degree);
    let half = 0.5 * (b - a);
    let mut pairs: Vec<(f64, f64)> = rule
        .iter()
        .map(|&(x, w)| (a + half * (x + 1.0), half * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs
}

/// Uniform angles `(j + 1/2) 2π / n`, offset by half a cell so that no node
/// sits on the real axis.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    let step = TAU / n as f64;
    (0..n).map(|j| (j as f64 + 0.5) * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub angles: Vec<f64>,
    pub outer_radius: f64,
}

impl PolarGrid {
    pub fn new(n_radial: usize, n_angular: usize, outer_radius: f64) -> Self {
        let (radii, radial_weights) = gauss_legendre(n_radial, 0.0, outer_radius)
            .into_iter()
            .unzip();
        Self {
            radii,
            radial_weights,
            angles: uniform_angles(n_angular),
            outer_radius,
        }
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.angles.len() as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `(i, j)` as a point of the plane.
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radii[i], self.angles[j])
    }

    /// Weight of node `(i, j)` in the normalized area measure.
    pub fn area_weight(&self, i: usize) -> f64 {
        self.radial_weights[i] * self.radii[i] * self.dtheta() / PI
    }

    /// `∫ f dA` over the grid's disk.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64,
    {
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..self.radii.len() {
            let ring: Complex64 = (0..self.angles.len()).map(|j| f(self.point(i, j))).sum();
            total += ring * self.area_weight(i);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_has_mass_one() {
        let g = PolarGrid::new(8, 16, 1.0);
        assert!((g.integrate(|_| Complex64::new(1.0, 0.0)).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monomial_moments() {
        // ∫ |z|^{2k} dA = 1/(k+1); ∫ z^k dA = 0 for k >= 1
        let g = PolarGrid::new(16, 32, 1.0);
        for k in 0..8 {
            let v = g.integrate(|z| Complex64::new(z.norm_sqr().powi(k), 0.0));
            assert!((v.re - 1.0 / (k as f64 + 1.0)).abs() < 1e-13);
            if k > 0 {
                assert!(g.integrate(|z| z.powi(k)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_inside() {
        let nodes = gauss_legendre(10, 0.0, 0.9);
        assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(nodes.iter().all(|&(x, _)| x > 0.0 && x < 0.9));
        let total: f64 = nodes.iter().map(|p| p.1).sum();
        assert!((total - 0.9).abs() < 1e-14);
    }
}
