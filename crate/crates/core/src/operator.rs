//! Truncated matrices of composition operators in the orthonormal basis
//! `e_0 = 1`, `e_j = z^j / √j` of the Dirichlet space, and their norms.
//!
//! Column `j` of the truncation at `N` holds the `e`-coordinates of
//! `φ^j / √j`. Truncated products are exact on indices `0..=N`, so every
//! stored entry is an entry of the infinite matrix and every singular
//! value computed here is a lower bound for the corresponding operator.

use std::io::Write;

use nalgebra::{DMatrix, DMatrixView, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::format_complex;
use crate::series::TruncatedSeries;
use crate::symbols::Symbol;

/// Seed of the random start vector of every power iteration.
pub const DEFAULT_SEED: u64 = 0x5eed_d1c7;
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;
/// Truncations reported for compression-norm ladders.
pub const TRUNCATION_LADDER: [usize; 4] = [64, 128, 256, 512];

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub truncation: usize,
    pub symbol_id: String,
    pub fixes_origin: bool,
}

impl OperatorMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Dense CSV: header `i,0,1,...,N`, one row per basis vector.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["i".to_string()];
        header.extend((0..=self.truncation).map(|j| j.to_string()));
        wtr.write_record(&header)?;
        for i in 0..=self.truncation {
            let mut row = vec![i.to_string()];
            row.extend((0..=self.truncation).map(|j| format_complex(self.get(i, j))));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Matrix of `C_φ` truncated at `N` from the symbol's Taylor series.
pub fn build_matrix(symbol: &dyn Symbol, truncation: usize) -> Result<OperatorMatrix> {
    build_matrix_from_series(
        &symbol.taylor(truncation),
        symbol.spec(),
        symbol.fixes_origin(),
    )
}

pub fn build_matrix_from_series(
    series: &TruncatedSeries,
    symbol_id: String,
    fixes_origin: bool,
) -> Result<OperatorMatrix> {
    if series.is_zero() {
        return Err(Error::ZeroSymbol);
    }
    let n = series.degree();
    let mut powers = Vec::with_capacity(n);
    let mut current = series.clone();
    for _ in 1..=n {
        let next = current.multiply(series)?;
        powers.push(std::mem::replace(&mut current, next));
    }
    let columns: Vec<Vec<Complex64>> = powers
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let scale = 1.0 / ((idx + 1) as f64).sqrt();
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let weight = if k == 0 { 1.0 } else { (k as f64).sqrt() };
                    a * (weight * scale)
                })
                .collect()
        })
        .collect();

    let mut entries = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    entries[(0, 0)] = Complex64::new(1.0, 0.0);
    for (idx, col) in columns.iter().enumerate() {
        entries.column_mut(idx + 1).copy_from_slice(col);
    }
    Ok(OperatorMatrix {
        entries,
        truncation: n,
        symbol_id,
        fixes_origin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub truncation: usize,
    /// Compression norms never exceed the norm of the full operator.
    pub lower_bound: bool,
    pub iterations: usize,
    pub residual: f64,
}

fn random_unit(len: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    unit(DVector::from_fn(len, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }))
}

/// Ritz values are compared every this many Krylov steps.
const CHECK_EVERY: usize = 4;

fn unit(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Largest singular value of `m` from the Krylov space of `m* m` grown
/// from a seeded start vector (Lanczos with full reorthogonalization).
///
/// This is power iteration with every iterate kept: the top Ritz value
/// dominates the Rayleigh quotient of each power iterate, never exceeds
/// the true top eigenvalue, and grows with the Krylov dimension. Plain
/// power iteration stalls when the top singular values cluster, which is
/// the normal situation for the essential-norm compressions.
///
/// A warm start is mixed with a tiny random component so that the Krylov
/// space is not confined to an invariant subspace of the previous problem.
fn power_iteration(
    m: DMatrixView<'_, Complex64>,
    start: Option<&DVector<Complex64>>,
    truncation: usize,
) -> Result<(NormReport, DVector<Complex64>)> {
    let n = m.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let noise = random_unit(n, &mut rng);
    let q0 = match start {
        Some(s) if s.norm() > 0.0 => unit(s + noise * Complex64::new(1e-8, 0.0)),
        _ => noise,
    };
    let limit = n.min(MAX_ITERATIONS);
    let mut basis = vec![q0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut previous = 0.0;
    let mut last = (0.0, DVector::from_element(1, 1.0));
    for step in 1..=limit {
        let q = &basis[step - 1];
        let mut w = m.ad_mul(&(m * q));
        let alpha = q.dotc(&w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let beta = w.norm();
        let scale = alphas.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
        let exhausted = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) || step == limit;
        if step % CHECK_EVERY == 0 || exhausted {
            last = top_ritz(&alphas, &betas);
            let theta = last.0;
            let residual = if theta > 0.0 {
                (theta - previous).abs() / theta
            } else {
                0.0
            };
            if exhausted || residual < POWER_TOLERANCE {
                let vector = ritz_vector(&basis, &last.1);
                let report = NormReport {
                    value: theta.max(0.0).sqrt(),
                    truncation,
                    lower_bound: true,
                    iterations: step,
                    residual: if exhausted && step == n {
                        0.0
                    } else {
                        residual
                    },
                };
                return Ok((report, vector));
            }
            previous = theta;
        }
        betas.push(beta);
        basis.push(w / Complex64::new(beta, 0.0));
    }
    Err(Error::NonConvergence {
        last: last.0.max(0.0).sqrt(),
        iterations: limit,
    })
}

/// Largest eigenvalue of the Lanczos tridiagonal and its eigenvector.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, DVector<f64>) {
    let k = alphas.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (theta, eig.eigenvectors.column(idx).into_owned())
}

fn ritz_vector(basis: &[DVector<Complex64>], y: &DVector<f64>) -> DVector<Complex64> {
    let mut v = DVector::zeros(basis[0].len());
    for (b, &c) in basis.iter().zip(y.iter()) {
        v += b * Complex64::new(c, 0.0);
    }
    unit(v)
}

pub fn operator_norm(m: &OperatorMatrix) -> Result<NormReport> {
    Ok(power_iteration(m.entries.as_view(), None, m.truncation)?.0)
}

/// Compression norms at each truncation, warm-starting every step from
/// the previous top singular vector padded with zeros.
pub fn operator_norm_ladder(symbol: &dyn Symbol, truncations: &[usize]) -> Result<Vec<NormReport>> {
    ladder(symbol, truncations, false)
}

/// As [`operator_norm_ladder`] for the restriction to `D_0`.
pub fn restricted_norm_d0_ladder(
    symbol: &dyn Symbol,
    truncations: &[usize],
) -> Result<Vec<NormReport>> {
    if !symbol.fixes_origin() {
        return Err(not_invariant(&symbol.spec()));
    }
    ladder(symbol, truncations, true)
}

fn ladder(symbol: &dyn Symbol, truncations: &[usize], restricted: bool) -> Result<Vec<NormReport>> {
    let mut sorted = truncations.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&top) = sorted.last() else {
        return Ok(Vec::new());
    };
    let full = build_matrix(symbol, top)?;
    let offset = usize::from(restricted);
    let mut previous: Option<DVector<Complex64>> = None;
    let mut reports = Vec::with_capacity(sorted.len());
    for &n in &sorted {
        let size = n + 1 - offset;
        let view = full.entries.view((offset, offset), (size, size));
        let start = previous.as_ref().map(|p| {
            let mut padded = DVector::zeros(size);
            padded.rows_mut(0, p.len()).copy_from(p);
            padded
        });
        let (report, v) = power_iteration(view, start.as_ref(), n)?;
        reports.push(report);
        previous = Some(v);
    }
    Ok(reports)
}

/// `||C_φ||` on `D` for `φ(0) = p`, with `L = log(1/(1 - |p|^2))`.
pub fn norm_formula(p_modulus: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_modulus) {
        return Err(Error::OutOfDomain {
            what: "|phi(0)|",
            value: p_modulus,
            domain: "[0, 1)",
        });
    }
    let l = (1.0 / (1.0 - p_modulus * p_modulus)).ln();
    Ok(((l + 2.0 + (l * (4.0 + l)).sqrt()) / 2.0).sqrt())
}

fn not_invariant(spec: &str) -> Error {
    Error::Precondition(format!(
        "{spec} does not fix the origin, so D_0 is not invariant"
    ))
}

/// Norm of the compression to `D_0 = span{e_1, e_2, ...}`.
pub fn restricted_norm_d0(m: &OperatorMatrix) -> Result<NormReport> {
    if !m.fixes_origin {
        return Err(not_invariant(&m.symbol_id));
    }
    let n = m.truncation;
    Ok(power_iteration(m.entries.view((1, 1), (n, n)), None, n)?.0)
}

/// The bound `ν = (1 + ((1-ρ²)/2) / (ρ²/2))^{-1/2}` on `||C_φ|_{D_0}||`
/// when the symbol maps into `|w| <= ρ`; it equals `ρ`.
pub fn d0_norm_bound(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::OutOfDomain {
            what: "rho",
            value: rho,
            domain: "(0, 1]",
        });
    }
    let r2 = rho * rho;
    let nu = (1.0 + ((1.0 - r2) / 2.0) / (r2 / 2.0)).powf(-0.5);
    assert!(
        (nu - rho).abs() <= 1e-12 * rho.max(1.0),
        "nu = {nu}, rho = {rho}"
    );
    Ok(nu)
}

/// `s_n = ||M R_n||` for `n = 1..=n_max`, where `R_n` keeps the columns
/// `n..=N`.
///
/// Computed from `n_max` down, each step warm-started from the next one,
/// so the reported sequence is nonincreasing.
pub fn essential_norm_profile(m: &OperatorMatrix, n_max: usize) -> Result<Vec<f64>> {
    Ok(essential_norm_reports(m, n_max)?
        .iter()
        .map(|r| r.value)
        .collect())
}

pub fn essential_norm_reports(m: &OperatorMatrix, n_max: usize) -> Result<Vec<NormReport>> {
    let total = m.truncation + 1;
    if n_max >= m.truncation {
        return Err(Error::Precondition(format!(
            "n_max = {n_max} must be below the truncation {}",
            m.truncation
        )));
    }
    let mut reports = Vec::with_capacity(n_max);
    let mut previous: Option<DVector<Complex64>> = None;
    for n in (1..=n_max).rev() {
        let cols = total - n;
        let view = m.entries.view((0, n), (total, cols));
        let start = previous.as_ref().map(|p| {
            let mut padded = DVector::zeros(cols);
            padded.rows_mut(1, p.len()).copy_from(p);
            padded
        });
        let (report, v) = power_iteration(view, start.as_ref(), m.truncation)?;
        reports.push(report);
        previous = Some(v);
    }
    reports.reverse();
    Ok(reports)
}

/// `max |(M* M - I)_{ij}|` over `0 <= i, j < block`.
pub fn isometry_defect(m: &OperatorMatrix, block: usize) -> Result<f64> {
    if block == 0 || 2 * block > m.truncation {
        return Err(Error::Precondition(format!(
            "block {block} must be in 1..=N/2 for truncation N = {}",
            m.truncation
        )));
    }
    let leading = m.entries.columns(0, block);
    let gram = leading.ad_mul(&leading);
    let mut worst: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    Ok(worst)
}

pub fn write_reports_csv<W: Write>(reports: &[NormReport], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in reports {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// CSV `n,s_n`.
pub fn write_profile_csv<W: Write>(profile: &[f64], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["n", "s_n"])?;
    for (idx, s) in profile.iter().enumerate() {
        wtr.write_record([(idx + 1).to_string(), s.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
