//! The counting function `n_φ(w)`: number of zeros of `φ - w` in a disk,
//! evaluated by the argument principle on a polar grid of `w` values.
//!
//! Counts are taken with multiplicity. They agree with the set cardinality
//! off the critical values of `φ`, a set of zero area.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::{self, GramMatrix};
use crate::error::{Error, Result};
use crate::quadrature::{uniform_angles, PolarGrid};
use crate::symbols::{max_modulus_on_circle, Symbol};

/// Grid and contour parameters of a counting field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    pub r_max: f64,
    pub contour_radius: f64,
    pub contour_nodes: usize,
    /// How often the contour node count may double when a winding
    /// integral fails to snap.
    pub max_doublings: u32,
    /// Minimum distance between `w` and the sampled contour image.
    pub guard: f64,
    pub snap_tolerance: f64,
    /// Largest tolerated fraction of excluded nodes.
    pub exclusion_limit: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            n_radial: 64,
            n_angular: 256,
            r_max: 0.99,
            contour_radius: 0.995,
            contour_nodes: 4096,
            max_doublings: 4,
            guard: 1e-4,
            snap_tolerance: 0.1,
            exclusion_limit: 0.05,
        }
    }
}

/// Largest `r_max` accepted for a field.
pub const MAX_FIELD_RADIUS: f64 = 0.995;

/// Samples of `φ` on `|z| = ρ` and the trapezoid weights of
/// `(1/2πi) ∮ φ'(z) dz / (φ(z) - w)`.
#[derive(Debug, Clone)]
struct ContourLevel {
    values: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl ContourLevel {
    fn new(symbol: &dyn Symbol, radius: f64, nodes: usize) -> Self {
        let scale = 1.0 / nodes as f64;
        let (values, weights) = uniform_angles(nodes)
            .into_iter()
            .map(|theta| {
                let z = Complex64::from_polar(radius, theta);
                (symbol.eval(z), symbol.derivative(z) * z * scale)
            })
            .unzip();
        Self { values, weights }
    }

    fn min_distance(&self, w: Complex64) -> f64 {
        self.nearest(w).1
    }

    fn nearest(&self, w: Complex64) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| (j, (v - w).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Whether `w` is at least one local sample spacing away from the
    /// sampled image curve; closer points make the trapezoid sum unreliable.
    fn resolves(&self, w: Complex64) -> bool {
        let (j, distance) = self.nearest(w);
        let n = self.values.len();
        let v = self.values[j];
        let spacing = (self.values[(j + 1) % n] - v)
            .norm()
            .max((self.values[(j + n - 1) % n] - v).norm());
        distance >= spacing
    }

    fn winding(&self, w: Complex64) -> Complex64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, q)| q / (v - w))
            .sum()
    }
}

/// Contour samples at `M, 2M, 4M, ...` nodes, shared by every `w`.
#[derive(Debug, Clone)]
pub struct Contour {
    radius: f64,
    levels: Vec<ContourLevel>,
    guard: f64,
    snap_tolerance: f64,
}

/// Outcome of counting at one `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Counted(u32),
    /// `w` is within the guard distance of the contour image.
    Guarded,
    /// The winding integral did not land near an integer.
    Unsnapped,
}

impl NodeStatus {
    pub fn count(self) -> Option<u32> {
        match self {
            NodeStatus::Counted(n) => Some(n),
            _ => None,
        }
    }
}

impl Contour {
    pub fn new(symbol: &dyn Symbol, radius: f64, cfg: &FieldConfig) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::OutOfDomain {
                what: "contour radius",
                value: radius,
                domain: "(0, 1)",
            });
        }
        let levels = (0..=cfg.max_doublings)
            .into_par_iter()
            .map(|k| ContourLevel::new(symbol, radius, cfg.contour_nodes << k))
            .collect();
        Ok(Self {
            radius,
            levels,
            guard: cfg.guard,
            snap_tolerance: cfg.snap_tolerance,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of zeros of `φ - w` inside the contour.
    pub fn count(&self, w: Complex64) -> Result<u32> {
        let base = &self.levels[0];
        let distance = base.min_distance(w);
        if distance < self.guard {
            return Err(Error::ContourTooClose {
                w,
                distance,
                suggested_radius: suggest_radius(self.radius),
            });
        }
        let mut raw = Complex64::new(0.0, 0.0);
        for level in &self.levels {
            if !level.resolves(w) {
                continue;
            }
            raw = level.winding(w);
            let snapped = raw.re.round();
            if (raw - snapped).norm() <= self.snap_tolerance {
                return Ok(snapped.max(0.0) as u32);
            }
        }
        Err(Error::QuadratureFailure {
            raw,
            nodes: self.levels.last().map_or(0, |l| l.values.len()),
        })
    }

    fn status(&self, w: Complex64) -> NodeStatus {
        match self.count(w) {
            Ok(n) => NodeStatus::Counted(n),
            Err(Error::ContourTooClose { .. }) => NodeStatus::Guarded,
            Err(_) => NodeStatus::Unsnapped,
        }
    }
}

fn suggest_radius(radius: f64) -> f64 {
    if radius > 0.5 {
        radius - 0.5 * (1.0 - radius)
    } else {
        radius + 0.5 * (1.0 - radius)
    }
}

/// `n_φ(w)` for zeros in `|z| < contour_radius`, with the default contour
/// resolution.
pub fn count_preimages(symbol: &dyn Symbol, w: Complex64, contour_radius: f64) -> Result<u32> {
    if w.norm() >= 1.0 {
        return Err(Error::OutOfDomain {
            what: "|w|",
            value: w.norm(),
            domain: "[0, 1)",
        });
    }
    Contour::new(symbol, contour_radius, &FieldConfig::default())?.count(w)
}

/// `n_φ` on a polar grid of Gauss–Legendre radii and uniform angles.
#[derive(Debug, Clone)]
pub struct CountingField {
    pub grid: PolarGrid,
    /// Row-major by radius: node `(i, j)` is at index `i * n_angular + j`.
    pub values: Vec<NodeStatus>,
    pub contour_radius: f64,
}

impl CountingField {
    pub fn build(symbol: &dyn Symbol, cfg: &FieldConfig) -> Result<Self> {
        if !(cfg.r_max > 0.0 && cfg.r_max <= MAX_FIELD_RADIUS) {
            return Err(Error::OutOfDomain {
                what: "r_max",
                value: cfg.r_max,
                domain: "(0, 0.995]",
            });
        }
        let contour = Contour::new(symbol, cfg.contour_radius, cfg)?;
        let grid = PolarGrid::new(cfg.n_radial, cfg.n_angular, cfg.r_max);
        let n_angular = grid.angles.len();
        let values: Vec<NodeStatus> = (0..grid.len())
            .into_par_iter()
            .map(|idx| contour.status(grid.point(idx / n_angular, idx % n_angular)))
            .collect();
        let field = Self {
            grid,
            values,
            contour_radius: cfg.contour_radius,
        };
        let excluded = field.excluded();
        if excluded as f64 > cfg.exclusion_limit * field.values.len() as f64 {
            return Err(Error::TooManyExcluded {
                excluded,
                total: field.values.len(),
                limit: 100.0 * cfg.exclusion_limit,
            });
        }
        Ok(field)
    }

    pub fn n_radial(&self) -> usize {
        self.grid.radii.len()
    }

    pub fn n_angular(&self) -> usize {
        self.grid.angles.len()
    }

    pub fn r_max(&self) -> f64 {
        self.grid.outer_radius
    }

    pub fn status(&self, i: usize, j: usize) -> NodeStatus {
        self.values[i * self.n_angular() + j]
    }

    pub fn guarded(&self) -> usize {
        self.values
            .iter()
            .filter(|s| **s == NodeStatus::Guarded)
            .count()
    }

    pub fn unsnapped(&self) -> usize {
        self.values
            .iter()
            .filter(|s| **s == NodeStatus::Unsnapped)
            .count()
    }

    pub fn excluded(&self) -> usize {
        self.values.iter().filter(|s| s.count().is_none()).count()
    }

    /// Fraction of all nodes whose winding integral snapped to an integer.
    pub fn snap_fraction(&self) -> f64 {
        1.0 - self.excluded() as f64 / self.values.len() as f64
    }

    pub fn max_count(&self) -> u32 {
        self.values
            .iter()
            .filter_map(|s| s.count())
            .max()
            .unwrap_or(0)
    }

    /// Normalized area of the excluded nodes.
    pub fn excluded_mass(&self) -> f64 {
        let n_angular = self.n_angular();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, s)| s.count().is_none())
            .map(|(idx, _)| self.grid.area_weight(idx / n_angular))
            .sum()
    }

    /// Normalized area of the annulus `r_max < |w| < 1` the grid does not see.
    pub fn unresolved_mass(&self) -> f64 {
        1.0 - self.r_max() * self.r_max()
    }

    /// `∫ f(w) n_φ(w) dA(w)` over the grid disk, skipping excluded nodes.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let n_angular = self.n_angular();
        (0..self.n_radial())
            .into_par_iter()
            .map(|i| {
                let ring: Complex64 = (0..n_angular)
                    .filter_map(|j| {
                        let n = self.status(i, j).count()?;
                        (n > 0).then(|| f(self.grid.point(i, j)) * n as f64)
                    })
                    .sum();
                ring * self.grid.area_weight(i)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }

    /// Long-format CSV: `r,theta,value,status`; `value` is empty for
    /// excluded nodes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["r", "theta", "value", "status"])?;
        for i in 0..self.n_radial() {
            for j in 0..self.n_angular() {
                let (value, status) = match self.status(i, j) {
                    NodeStatus::Counted(n) => (n.to_string(), "ok"),
                    NodeStatus::Guarded => (String::new(), "guarded"),
                    NodeStatus::Unsnapped => (String::new(), "unsnapped"),
                };
                wtr.write_record([
                    self.grid.radii[i].to_string(),
                    self.grid.angles[j].to_string(),
                    value,
                    status.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn counting_field(
    symbol: &dyn Symbol,
    n_radial: usize,
    n_angular: usize,
    r_max: f64,
    contour_radius: f64,
) -> Result<CountingField> {
    let cfg = FieldConfig {
        n_radial,
        n_angular,
        r_max,
        contour_radius,
        ..FieldConfig::default()
    };
    CountingField::build(symbol, &cfg)
}

/// Angular Fourier moments `f_k(r) = Σ_θ e^{ikθ} n_φ(r e^{iθ}) Δθ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub k: usize,
    pub radii: Vec<f64>,
    #[serde(skip)]
    pub moments: Vec<Complex64>,
}

/// Moments for `k = 0..=k_max`; excluded nodes contribute nothing.
pub fn radial_moments(field: &CountingField, k_max: usize) -> Vec<RadialProfile> {
    let dtheta = field.grid.dtheta();
    (0..=k_max)
        .map(|k| {
            let moments = (0..field.n_radial())
                .map(|i| {
                    (0..field.n_angular())
                        .filter_map(|j| {
                            let n = field.status(i, j).count()?;
                            let phase = Complex64::from_polar(1.0, k as f64 * field.grid.angles[j]);
                            Some(phase * (n as f64 * dtheta))
                        })
                        .sum()
                })
                .collect();
            RadialProfile {
                k,
                radii: field.grid.radii.clone(),
                moments,
            }
        })
        .collect()
}

/// CSV with columns `k,r,moment`.
pub fn write_profiles_csv<W: Write>(profiles: &[RadialProfile], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["k", "r", "moment"])?;
    for p in profiles {
        for (r, m) in p.radii.iter().zip(&p.moments) {
            wtr.write_record([
                p.k.to_string(),
                r.to_string(),
                crate::output::format_complex(*m),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Outcome of the essentially-radial test with its worst witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialReport {
    pub radial: bool,
    pub tolerance: f64,
    pub k_max: usize,
    /// `max |f_k(r)| / max(f_0(r), 1)` over `k = 1..=k_max` and radius nodes.
    pub worst_ratio: f64,
    pub worst_k: usize,
    pub worst_r: f64,
    pub excluded: usize,
    pub nodes: usize,
}

pub const RADIAL_K_MAX: usize = 8;
pub const RADIAL_TOLERANCE: f64 = 0.05;

pub fn radial_report(field: &CountingField, k_max: usize, tol: f64) -> RadialReport {
    let profiles = radial_moments(field, k_max);
    let base = &profiles[0].moments;
    let mut worst = (0.0, 1, field.grid.radii.first().copied().unwrap_or(0.0));
    for p in &profiles[1..] {
        for (i, m) in p.moments.iter().enumerate() {
            let ratio = m.norm() / base[i].re.max(1.0);
            if ratio > worst.0 {
                worst = (ratio, p.k, field.grid.radii[i]);
            }
        }
    }
    RadialReport {
        radial: worst.0 < tol,
        tolerance: tol,
        k_max,
        worst_ratio: worst.0,
        worst_k: worst.1,
        worst_r: worst.2,
        excluded: field.excluded(),
        nodes: field.values.len(),
    }
}

/// Field parameters for the radial test. The contour sits closer to the
/// boundary than for plain fields: near boundary corners of `φ(D)` the
/// image of `|z| = 0.995` stays visibly inside `|w| = 0.99`, which would
/// show up as spurious angular moments on the outer rings.
pub fn radial_config() -> FieldConfig {
    FieldConfig {
        contour_radius: 0.9999,
        ..FieldConfig::default()
    }
}

/// Whether `n_φ` depends on `|w|` alone, on the radial-test field.
pub fn is_essentially_radial(symbol: &dyn Symbol, tol: f64) -> Result<RadialReport> {
    let field = CountingField::build(symbol, &radial_config())?;
    Ok(radial_report(&field, RADIAL_K_MAX, tol))
}

/// Field parameters used for the fullness defect: a contour closer to the
/// boundary than the field radius so that the field sees the image of
/// almost the whole disk.
pub fn defect_config() -> FieldConfig {
    FieldConfig {
        r_max: 0.995,
        contour_radius: 0.999,
        ..FieldConfig::default()
    }
}

/// Share of the resolved disk `|w| < r_max` not covered by `φ(D)`:
/// area of nodes with `n_φ = 0` over the area of all counted nodes.
pub fn fullness_defect_of(field: &CountingField) -> f64 {
    let mut omitted = 0.0;
    let mut resolved = 0.0;
    for i in 0..field.n_radial() {
        let weight = field.grid.area_weight(i);
        for j in 0..field.n_angular() {
            if let Some(n) = field.status(i, j).count() {
                resolved += weight;
                if n == 0 {
                    omitted += weight;
                }
            }
        }
    }
    if resolved == 0.0 {
        return 1.0;
    }
    (omitted / resolved).clamp(0.0, 1.0)
}

pub fn fullness_defect(symbol: &dyn Symbol) -> Result<f64> {
    Ok(fullness_defect_of(&CountingField::build(
        symbol,
        &defect_config(),
    )?))
}

/// Nonnegative test functions for the change-of-variable identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    One,
    AbsSquared,
}

impl TestFunction {
    pub fn eval(self, w: Complex64) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::AbsSquared => w.norm_sqr(),
        }
    }

    /// `sup |f|` on the disk.
    pub fn bound(self) -> f64 {
        1.0
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::One => "1",
            TestFunction::AbsSquared => "|w|^2",
        }
    }
}

/// Resolution of the `z`-side quadrature.
pub const Z_GRID: (usize, usize) = (128, 4096);

/// Field parameters for integral checks over the contour disk: the field
/// radius follows the image of the contour circle, so it covers all of
/// `φ(|z| < ρ_c)` whenever that image stays inside the allowed radius.
pub fn image_matched_config(symbol: &dyn Symbol, base: &FieldConfig) -> FieldConfig {
    let image = max_modulus_on_circle(symbol, base.contour_radius, base.contour_nodes);
    FieldConfig {
        r_max: image.min(MAX_FIELD_RADIUS),
        ..*base
    }
}

/// Both sides of `∫ f(φ)|φ'|² dA = ∫ f n_φ dA` over the contour disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeOfVariable {
    pub test_function: TestFunction,
    pub contour_radius: f64,
    pub r_max: f64,
    /// `∫_{|z|<ρ_c} f(φ)|φ'|² dA`.
    pub lhs: f64,
    /// `∫_{|w|<r_max} f n_φ dA` with preimages counted in `|z| < ρ_c`.
    pub rhs: f64,
    pub residual: f64,
    /// `∫_D f(φ)|φ'|² dA` on the whole disk, for reference.
    pub lhs_full_disk: f64,
    /// Area of `|w| > r_max`, not seen by the field.
    pub unresolved_mass: f64,
    pub excluded_mass: f64,
    /// Bound on the part of the right side lost to excluded nodes.
    pub exclusion_allowance: f64,
}

fn z_side(symbol: &dyn Symbol, f: TestFunction, radius: f64) -> f64 {
    let grid = PolarGrid::new(Z_GRID.0, Z_GRID.1, radius);
    let n_angular = grid.angles.len();
    let total: f64 = (0..grid.radii.len())
        .into_par_iter()
        .map(|i| {
            let ring: f64 = (0..n_angular)
                .map(|j| {
                    let z = grid.point(i, j);
                    f.eval(symbol.eval(z)) * symbol.derivative(z).norm_sqr()
                })
                .sum();
            ring * grid.area_weight(i)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    total
}

pub fn change_of_variable(
    symbol: &dyn Symbol,
    f: TestFunction,
    base: &FieldConfig,
) -> Result<ChangeOfVariable> {
    let cfg = image_matched_config(symbol, base);
    let field = CountingField::build(symbol, &cfg)?;
    Ok(change_of_variable_on(symbol, f, &field))
}

pub fn change_of_variable_on(
    symbol: &dyn Symbol,
    f: TestFunction,
    field: &CountingField,
) -> ChangeOfVariable {
    let rho = field.contour_radius;
    let lhs = z_side(symbol, f, rho);
    let rhs = field.integrate(|w| Complex64::new(f.eval(w), 0.0)).re;
    let excluded_mass = field.excluded_mass();
    ChangeOfVariable {
        test_function: f,
        contour_radius: rho,
        r_max: field.r_max(),
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        lhs_full_disk: z_side(symbol, f, 1.0),
        unresolved_mass: field.unresolved_mass(),
        excluded_mass,
        exclusion_allowance: excluded_mass * f.bound() * field.max_count() as f64,
    }
}

/// Residual of the change-of-variable identity at the default grids.
pub fn change_of_variable_residual(symbol: &dyn Symbol, f: TestFunction) -> Result<f64> {
    Ok(change_of_variable(symbol, f, &FieldConfig::default())?.residual)
}

/// `∫ n_φ dA` from the field against the coefficient-space energy of `φ`
/// on the contour disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyIdentity {
    pub contour_radius: f64,
    pub field_integral: f64,
    pub energy: f64,
    pub residual: f64,
    pub excluded_mass: f64,
}

/// Truncation of the Taylor series used for coefficient-side energies.
pub const ENERGY_DEGREE: usize = 4096;

pub fn energy_identity(symbol: &dyn Symbol, base: &FieldConfig) -> Result<EnergyIdentity> {
    let field = CountingField::build(symbol, &image_matched_config(symbol, base))?;
    Ok(energy_identity_on(symbol, &field))
}

pub fn energy_identity_on(symbol: &dyn Symbol, field: &CountingField) -> EnergyIdentity {
    let field_integral = field.integrate(|_| Complex64::new(1.0, 0.0)).re;
    let energy = dirichlet::energy_within(&symbol.taylor(ENERGY_DEGREE), field.contour_radius);
    EnergyIdentity {
        contour_radius: field.contour_radius,
        field_integral,
        energy,
        residual: (field_integral - energy).abs(),
        excluded_mass: field.excluded_mass(),
    }
}

/// Gram matrix of powers from the counting field:
/// `φ(0)^n conj(φ(0)^m) + nm ∫ w^{n-1} conj(w^{m-1}) n_φ(w) dA`,
/// which is the restriction of `<φ^n, φ^m>` to `|z| < ρ_c`.
pub fn gram_via_counting(symbol: &dyn Symbol, size: usize, field: &CountingField) -> GramMatrix {
    let p0 = symbol.eval(Complex64::new(0.0, 0.0));
    let mut entries = vec![Complex64::new(0.0, 0.0); size * size];
    for n in 1..=size {
        for m in n..=size {
            let integral = field.integrate(|w| w.powu(n as u32 - 1) * w.powu(m as u32 - 1).conj());
            let value = p0.powu(n as u32) * p0.powu(m as u32).conj() + integral * (n * m) as f64;
            entries[(n - 1) * size + (m - 1)] = value;
            entries[(m - 1) * size + (n - 1)] = value.conj();
        }
    }
    GramMatrix::from_entries(size, entries, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::gram_powers_within;
    use crate::symbols::catalog;
    use crate::symbols::SymbolMap;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity() -> SymbolMap {
        catalog::rotation(0.0)
    }

    fn catalog_symbols() -> Vec<SymbolMap> {
        vec![
            identity(),
            catalog::rotation(1.0),
            catalog::automorphism(c(0.5, 0.0)).unwrap(),
            catalog::automorphism(c(0.2, -0.3)).unwrap(),
            catalog::boundary_fixed_lft(2.0).unwrap(),
            catalog::monomial(2).unwrap(),
            catalog::monomial(3).unwrap(),
            catalog::radial_slit_full_map(0.5).unwrap(),
            catalog::polynomial(vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)]).unwrap(),
        ]
    }

    #[test]
    fn single_counts() {
        assert_eq!(
            count_preimages(identity().as_ref(), c(0.3, 0.0), 0.9).unwrap(),
            1
        );
        let sq = catalog::monomial(2).unwrap();
        assert_eq!(count_preimages(sq.as_ref(), c(0.25, 0.0), 0.9).unwrap(), 2);
        let lft = catalog::boundary_fixed_lft(2.0).unwrap();
        assert_eq!(
            count_preimages(lft.as_ref(), c(-0.9, 0.0), 0.99).unwrap(),
            0
        );
    }

    #[test]
    fn counts_grow_with_the_contour() {
        let sq = catalog::monomial(2).unwrap();
        let counts: Vec<u32> = [0.3, 0.6, 0.75, 0.9]
            .iter()
            .map(|&rho| count_preimages(sq.as_ref(), c(0.25, 0.0), rho).unwrap())
            .collect();
        assert!(counts.windows(2).all(|p| p[0] <= p[1]), "{counts:?}");
        assert_eq!(counts, vec![0, 2, 2, 2]);
    }

    #[test]
    fn guard_and_domain_errors() {
        let id = identity();
        let on_curve = Complex64::from_polar(0.9, TAU * 0.5 / 4096.0);
        assert!(matches!(
            count_preimages(id.as_ref(), on_curve, 0.9),
            Err(Error::ContourTooClose { .. })
        ));
        assert!(matches!(
            count_preimages(id.as_ref(), c(1.0, 0.0), 0.9),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            counting_field(id.as_ref(), 4, 8, 0.999, 0.9),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn simple_fields() {
        let rot = counting_field(catalog::rotation(0.7).as_ref(), 16, 64, 0.99, 0.995).unwrap();
        assert!(rot.values.iter().all(|s| *s == NodeStatus::Counted(1)));
        let mob = counting_field(
            catalog::automorphism(c(0.5, 0.0)).unwrap().as_ref(),
            16,
            64,
            0.9,
            0.995,
        )
        .unwrap();
        assert!(mob.values.iter().all(|s| *s == NodeStatus::Counted(1)));
        let sq = CountingField::build(
            catalog::monomial(2).unwrap().as_ref(),
            &FieldConfig::default(),
        )
        .unwrap();
        assert!(sq
            .values
            .iter()
            .all(|s| matches!(s, NodeStatus::Counted(2) | NodeStatus::Guarded)));
        assert!(sq.snap_fraction() >= 0.99);
    }

    #[test]
    fn integer_snap_across_the_catalog() {
        for phi in catalog_symbols() {
            let field = CountingField::build(phi.as_ref(), &FieldConfig::default()).unwrap();
            assert!(
                field.snap_fraction() >= 0.99,
                "{}: {}",
                phi.spec(),
                field.snap_fraction()
            );
            if phi.univalent() == Some(true) {
                assert!(field.max_count() <= 1, "{}", phi.spec());
            }
        }
    }

    #[test]
    fn moments() {
        let rot = counting_field(catalog::rotation(0.3).as_ref(), 16, 64, 0.99, 0.995).unwrap();
        let p = radial_moments(&rot, 4);
        assert!(p[1..]
            .iter()
            .all(|q| q.moments.iter().all(|m| m.norm() < 1e-12)));
        assert!(p[0]
            .moments
            .iter()
            .all(|m| m.im.abs() < 1e-10 && m.re >= 0.0));

        let sq = CountingField::build(
            catalog::monomial(2).unwrap().as_ref(),
            &FieldConfig::default(),
        )
        .unwrap();
        let p = radial_moments(&sq, 4);
        assert!(p[0].moments.iter().all(|m| (m.re - 4.0 * PI).abs() < 1e-9));
        assert!(p[1..]
            .iter()
            .all(|q| q.moments.iter().all(|m| m.norm() < 1e-9)));

        let lft = CountingField::build(
            catalog::boundary_fixed_lft(2.0).unwrap().as_ref(),
            &FieldConfig::default(),
        )
        .unwrap();
        let p = radial_moments(&lft, 1);
        let max_f1 = p[1].moments.iter().map(|m| m.norm()).fold(0.0, f64::max);
        assert!(max_f1 > 0.5, "{max_f1}");
    }

    #[test]
    fn radial_test() {
        let radial =
            |phi: SymbolMap| is_essentially_radial(phi.as_ref(), RADIAL_TOLERANCE).unwrap();
        assert!(radial(catalog::monomial(3).unwrap()).radial);
        let slit = radial(catalog::radial_slit_full_map(0.5).unwrap());
        assert!(slit.radial, "{slit:?}");
        let lft = radial(catalog::boundary_fixed_lft(2.0).unwrap());
        assert!(!lft.radial);
        assert!(lft.worst_ratio > 0.5);
        let poly =
            radial(catalog::polynomial(vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)]).unwrap());
        assert!(!poly.radial);
    }

    #[test]
    fn defects() {
        let id = fullness_defect(identity().as_ref()).unwrap();
        assert!(id < 1e-2, "{id}");
        let lft = fullness_defect(catalog::boundary_fixed_lft(2.0).unwrap().as_ref()).unwrap();
        assert!((lft - 0.4375).abs() < 1e-2, "{lft}");
        let slit = fullness_defect(catalog::radial_slit_full_map(0.5).unwrap().as_ref()).unwrap();
        assert!(slit < 1e-2, "{slit}");
    }

    #[test]
    fn change_of_variable_closed_forms() {
        let rho = FieldConfig::default().contour_radius;
        let id = change_of_variable(
            identity().as_ref(),
            TestFunction::One,
            &FieldConfig::default(),
        )
        .unwrap();
        assert!((id.lhs - rho * rho).abs() < 1e-10);
        assert!((id.lhs_full_disk - 1.0).abs() < 1e-10);
        assert!(id.residual < 1e-6, "{id:?}");

        let sq = change_of_variable(
            catalog::monomial(2).unwrap().as_ref(),
            TestFunction::One,
            &FieldConfig::default(),
        )
        .unwrap();
        assert!((sq.lhs - 2.0 * rho.powi(4)).abs() < 1e-10);
        assert!((sq.lhs_full_disk - 2.0).abs() < 1e-10);
        assert!(sq.residual < 1e-3, "{sq:?}");

        let lft = change_of_variable(
            catalog::boundary_fixed_lft(2.0).unwrap().as_ref(),
            TestFunction::AbsSquared,
            &FieldConfig::default(),
        )
        .unwrap();
        assert!(lft.residual < 5e-3, "{lft:?}");
    }

    #[test]
    fn energy_matches_field_integral() {
        for phi in catalog_symbols() {
            let e = energy_identity(phi.as_ref(), &FieldConfig::default()).unwrap();
            assert!(e.residual < 5e-3, "{}: {e:?}", phi.spec());
        }
    }

    #[test]
    fn gram_from_counting_matches_coefficients() {
        let cfg = FieldConfig {
            n_radial: 96,
            n_angular: 384,
            ..FieldConfig::default()
        };
        for phi in [
            catalog::polynomial(vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)]).unwrap(),
            catalog::automorphism(c(0.3, 0.1)).unwrap(),
        ] {
            let field =
                CountingField::build(phi.as_ref(), &image_matched_config(phi.as_ref(), &cfg))
                    .unwrap();
            let via = gram_via_counting(phi.as_ref(), 3, &field);
            let coeff = gram_powers_within(&phi.taylor(2048), 3, field.contour_radius);
            for n in 1..=3 {
                for m in 1..=3 {
                    let d = (via.get(n, m) - coeff.get(n, m)).norm();
                    assert!(
                        d < 2e-2 * (n * m) as f64,
                        "{} ({n},{m}): {} vs {}",
                        phi.spec(),
                        via.get(n, m),
                        coeff.get(n, m)
                    );
                }
            }
        }
    }

    #[test]
    fn field_csv_layout() {
        let f = counting_field(identity().as_ref(), 2, 4, 0.5, 0.9).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,theta,value,status");
        assert_eq!(lines.len(), 9);
        assert!(lines[1].ends_with(",1,ok"));
    }
}
