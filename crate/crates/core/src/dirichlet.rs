//! Hilbert-space structure of the Dirichlet space `D`.
//!
//! With `f = Σ a_k z^k` and `g = Σ b_k z^k`,
//!
//! ```text
//! <f, g>_D = a_0 conj(b_0) + Σ_{k>=1} k a_k conj(b_k)
//! ```
//!
//! which is the polarization of `|f(0)|^2 + ∫ |f'|^2 dA`. Production paths
//! work only in coefficient space; area quadrature lives in the tests as
//! an independent oracle.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output::format_complex;
use crate::series::TruncatedSeries;
use crate::symbols::Symbol;

/// Largest kernel truncation we are willing to build.
pub const KERNEL_TRUNCATION_LIMIT: usize = 100_000;

/// Kernel series are truncated once `|w|^{N+1}/(N+1)` drops below this.
pub const KERNEL_TAIL_TOLERANCE: f64 = 1e-10;

fn check_degrees(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<()> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            left: f.degree(),
            right: g.degree(),
        });
    }
    Ok(())
}

pub fn inner(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<Complex64> {
    check_degrees(f, g)?;
    let (a, b) = (f.coeffs(), g.coeffs());
    let tail: Complex64 = (1..a.len()).map(|k| a[k] * b[k].conj() * k as f64).sum();
    Ok(a[0] * b[0].conj() + tail)
}

/// `f(0) conj(g(0)) + ∫_{|z|<ρ} f' conj(g') dA`, the inner product with the
/// area integral restricted to the disk of radius `radius`.
pub fn inner_within(f: &TruncatedSeries, g: &TruncatedSeries, radius: f64) -> Result<Complex64> {
    check_degrees(f, g)?;
    let (a, b) = (f.coeffs(), g.coeffs());
    let r2 = radius * radius;
    let mut weight = 1.0;
    let mut tail = Complex64::new(0.0, 0.0);
    for k in 1..a.len() {
        weight *= r2;
        tail += a[k] * b[k].conj() * (k as f64 * weight);
    }
    Ok(a[0] * b[0].conj() + tail)
}

pub fn norm(f: &TruncatedSeries) -> f64 {
    inner(f, f).expect("same series").re.max(0.0).sqrt()
}

/// Dirichlet energy `∫ |f'|^2 dA = Σ k |a_k|^2`.
pub fn energy(f: &TruncatedSeries) -> f64 {
    energy_within(f, 1.0)
}

/// `∫_{|z|<ρ} |f'|^2 dA = Σ k |a_k|^2 ρ^{2k}`.
pub fn energy_within(f: &TruncatedSeries, radius: f64) -> f64 {
    let r2 = radius * radius;
    let mut weight = 1.0;
    let mut total = 0.0;
    for (k, a) in f.coeffs().iter().enumerate().skip(1) {
        weight *= r2;
        total += k as f64 * a.norm_sqr() * weight;
    }
    total
}

fn check_in_disk(w: Complex64) -> Result<()> {
    if w.norm() >= 1.0 || !w.norm().is_finite() {
        return Err(Error::OutOfDomain {
            what: "|w|",
            value: w.norm(),
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// Taylor series of `K_w(z) = 1 + log 1/(1 - conj(w) z)`:
/// `a_0 = 1`, `a_k = conj(w)^k / k`.
pub fn kernel(w: Complex64, degree: usize) -> Result<TruncatedSeries> {
    check_in_disk(w)?;
    let wc = w.conj();
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    let mut power = Complex64::new(1.0, 0.0);
    for k in 1..=degree {
        power *= wc;
        coeffs.push(power / k as f64);
    }
    Ok(TruncatedSeries::new(coeffs))
}

/// Smallest `N` with `|w|^{N+1}/(N+1) < 1e-10`; refuses points so close to
/// the circle that `N` would exceed [`KERNEL_TRUNCATION_LIMIT`].
pub fn kernel_truncation(w: Complex64) -> Result<usize> {
    check_in_disk(w)?;
    let modulus = w.norm();
    if modulus == 0.0 {
        return Ok(0);
    }
    let log_r = modulus.ln();
    let mut n = 0usize;
    while (n as f64 + 1.0) * log_r - (n as f64 + 1.0).ln() >= KERNEL_TAIL_TOLERANCE.ln() {
        n += 1;
        if n > KERNEL_TRUNCATION_LIMIT {
            return Err(Error::KernelTruncation {
                modulus,
                needed: n,
                limit: KERNEL_TRUNCATION_LIMIT,
            });
        }
    }
    Ok(n)
}

/// `K_w(w) = 1 + log 1/(1 - |w|^2)`, which the reproducing property forces
/// to equal `||K_w||^2`.
pub fn kernel_norm_squared(w: Complex64) -> Result<f64> {
    check_in_disk(w)?;
    Ok(1.0 + (1.0 / (1.0 - w.norm_sqr())).ln())
}

/// Matrix of inner products `<φ^n, φ^m>_D` for `n, m = 1..=size`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<Complex64>,
    truncation: usize,
    /// First power whose truncated series vanishes identically.
    unsafe_from: Option<usize>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn unsafe_from(&self) -> Option<usize> {
        self.unsafe_from
    }

    /// Entry `<φ^n, φ^m>` with 1-based powers.
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        assert!((1..=self.size).contains(&n) && (1..=self.size).contains(&m));
        self.entries[(n - 1) * self.size + (m - 1)]
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..=self.size {
            for m in 1..=self.size {
                if n != m {
                    worst = worst.max(self.get(n, m).norm());
                }
            }
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..=self.size {
            for m in 1..=self.size {
                worst = worst.max((self.get(n, m) - self.get(m, n).conj()).norm());
            }
        }
        worst
    }

    /// Row-major CSV, complex entries as `re+imj`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let header: Vec<String> = std::iter::once("n".to_string())
            .chain((1..=self.size).map(|m| format!("m{m}")))
            .collect();
        wtr.write_record(&header)?;
        for n in 1..=self.size {
            let mut row = vec![n.to_string()];
            row.extend((1..=self.size).map(|m| format_complex(self.get(n, m))));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub(crate) fn from_entries(size: usize, entries: Vec<Complex64>, truncation: usize) -> Self {
        Self {
            size,
            entries,
            truncation,
            unsafe_from: None,
        }
    }
}

/// Gram matrix of the powers of a series, computed entrywise in parallel.
pub fn gram_powers_of_series(series: &TruncatedSeries, size: usize) -> GramMatrix {
    gram_powers_with(series, size, |f, g| inner(f, g).expect("equal degrees"))
}

/// As [`gram_powers_of_series`], with the area integral restricted to `|z| < radius`.
pub fn gram_powers_within(series: &TruncatedSeries, size: usize, radius: f64) -> GramMatrix {
    gram_powers_with(series, size, |f, g| {
        inner_within(f, g, radius).expect("equal degrees")
    })
}

fn gram_powers_with<F>(series: &TruncatedSeries, size: usize, product: F) -> GramMatrix
where
    F: Fn(&TruncatedSeries, &TruncatedSeries) -> Complex64 + Sync,
{
    let mut powers = Vec::with_capacity(size);
    let mut current = series.clone();
    for _ in 0..size {
        powers.push(current.clone());
        current = current.multiply(series).expect("equal degrees");
    }
    let degree = series.degree();
    let unsafe_from = match series.order() {
        None => Some(1),
        Some(0) => None,
        Some(ord) => (1..=size).find(|n| n * ord > degree),
    };

    let entries: Vec<Complex64> = (0..size * size)
        .into_par_iter()
        .map(|idx| {
            let (n, m) = (idx / size, idx % size);
            if n <= m {
                product(&powers[n], &powers[m])
            } else {
                product(&powers[m], &powers[n]).conj()
            }
        })
        .collect();
    GramMatrix {
        size,
        entries,
        truncation: series.degree(),
        unsafe_from,
    }
}

/// `<φ^n, φ^m>_D` for `n, m = 1..=size` from the symbol's Taylor series at
/// truncation `degree`.
pub fn gram_powers(symbol: &dyn Symbol, size: usize, degree: usize) -> GramMatrix {
    gram_powers_of_series(&symbol.taylor(degree), size)
}
