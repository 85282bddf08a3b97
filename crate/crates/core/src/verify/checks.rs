use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Context, Provenance, ReportBuilder, TheoremCheck, TheoremId, VerificationReport};
use crate::counting::{self, CountingField, NodeStatus, TestFunction};
use crate::dirichlet::{self, gram_powers};
use crate::error::{Error, Result};
use crate::operator::{self, build_matrix};
use crate::quadrature::PolarGrid;
use crate::series::TruncatedSeries;
use crate::symbols::Symbol;

use Provenance::{Derived, Paper, Trivial};

pub(super) fn all() -> Vec<Box<dyn TheoremCheck>> {
    vec![
        Box::new(InnerProduct),
        Box::new(ReproducingKernel),
        Box::new(OrthogonalityRadial),
        Box::new(ChangeOfVariable),
        Box::new(FullNormFormula),
        Box::new(D0NormOne),
        Box::new(CounterexampleLft),
        Box::new(EssentialNormOne),
        Box::new(IsometryFull),
        Box::new(CountingEngine),
    ]
}

/// Symbols used where a check runs "across the catalog".
const CATALOG: [&str; 9] = [
    "rotation:theta=0",
    "rotation:theta=1",
    "mobius:p=0.5",
    "lft:t=2",
    "power:k=2",
    "power:k=3",
    "slit:c=0.5",
    "poly:0,0.5,0.5",
    "mobius:p=0.5|slit:c=0.5",
];

const RANDOM_CASE: &str = "random-polynomials";
const RANDOM_PAIRS: usize = 20;
const RANDOM_DEGREE: usize = 16;

fn random_polynomial(rng: &mut ChaCha8Rng, degree: usize) -> TruncatedSeries {
    let d = rng.random_range(0..=RANDOM_DEGREE);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    for c in coeffs.iter_mut().take(d + 1) {
        *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    TruncatedSeries::new(coeffs)
}

fn only_random_case(spec: &str) -> Result<()> {
    if spec != RANDOM_CASE {
        return Err(Error::Precondition(format!(
            "this check runs on `{RANDOM_CASE}` only, not on `{spec}`"
        )));
    }
    Ok(())
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(operator::DEFAULT_SEED)
}

fn needs_origin_fixed(symbol: &dyn Symbol) -> Result<()> {
    if !symbol.fixes_origin() {
        return Err(Error::Precondition(format!(
            "{} does not fix the origin",
            symbol.spec()
        )));
    }
    Ok(())
}

/// `||h||^2 = |h(0)|^2 + ∫ |h'|^2 dA` by polar quadrature.
fn quadrature_norm_sq(h: &TruncatedSeries, grid: &PolarGrid) -> f64 {
    let dh = h.derivative();
    h.coeff(0).norm_sqr()
        + grid
            .integrate(|z| Complex64::new(dh.eval(z).norm_sqr(), 0.0))
            .re
}

struct InnerProduct;

impl TheoremCheck for InnerProduct {
    fn id(&self) -> TheoremId {
        TheoremId::InnerProduct
    }

    fn cases(&self) -> Vec<&'static str> {
        vec![RANDOM_CASE]
    }

    fn check(&self, spec: &str, _ctx: &Context) -> Result<VerificationReport> {
        only_random_case(spec)?;
        let mut rng = rng();
        let grid = PolarGrid::new(RANDOM_DEGREE + 2, 4 * RANDOM_DEGREE + 8, 1.0);
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_PAIRS {
            let f = random_polynomial(&mut rng, RANDOM_DEGREE);
            let g = random_polynomial(&mut rng, RANDOM_DEGREE);
            // polarization: <f,g> = (1/4) Σ_k i^k ||f + i^k g||^2
            let polarized: Complex64 = (0..4)
                .map(|k| {
                    let unit = Complex64::i().powu(k);
                    let h = TruncatedSeries::new(
                        f.coeffs()
                            .iter()
                            .zip(g.coeffs())
                            .map(|(a, b)| a + unit * b)
                            .collect(),
                    );
                    unit * quadrature_norm_sq(&h, &grid)
                })
                .sum::<Complex64>()
                / 4.0;
            worst = worst.max((dirichlet::inner(&f, &g)? - polarized).norm());
        }
        let monomial_gap = (1..=RANDOM_DEGREE)
            .map(|n| {
                let z = TruncatedSeries::monomial(n, RANDOM_DEGREE);
                Ok((dirichlet::inner(&z, &z)? - Complex64::new(n as f64, 0.0)).norm())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("pairs", RANDOM_PAIRS)
            .record("max_degree", RANDOM_DEGREE)
            .at_most("max_gap_to_quadrature", worst, 0.0, 1e-8, Derived)
            .approx("max_monomial_norm_error", monomial_gap, 0.0, 0.0, Trivial);
        Ok(b.finish())
    }
}

struct ReproducingKernel;

impl TheoremCheck for ReproducingKernel {
    fn id(&self) -> TheoremId {
        TheoremId::ReproducingKernel
    }

    fn cases(&self) -> Vec<&'static str> {
        vec![RANDOM_CASE]
    }

    fn check(&self, spec: &str, _ctx: &Context) -> Result<VerificationReport> {
        only_random_case(spec)?;
        const N: usize = 128;
        let mut rng = rng();
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_PAIRS {
            let f = random_polynomial(&mut rng, N);
            let w = Complex64::from_polar(
                rng.random_range(0.0..0.7),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let k = dirichlet::kernel(w, N)?;
            worst = worst.max((dirichlet::inner(&f, &k)? - f.eval(w)).norm());
        }
        let w = Complex64::new(0.6, 0.0);
        let needed = dirichlet::kernel_truncation(w)?;
        let kw = dirichlet::kernel(w, needed)?;
        let norm_sq = dirichlet::inner(&kw, &kw)?.re;
        let log_term = (1.0 / (1.0 - w.norm_sqr())).ln();

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("truncation", N)
            .at_most("max_reproducing_error", worst, 0.0, 1e-8, Derived)
            .record("w", 0.6)
            .record("kernel_truncation", needed)
            .approx("kernel_norm_sq", norm_sq, 1.0 + log_term, 1e-8, Derived)
            .approx(
                "kernel_norm_sq_minus_log_form",
                norm_sq - log_term,
                1.0,
                1e-8,
                Derived,
            )
            .note(
                "the closed form log(1/(1-|w|^2)) for ||K_w||^2 differs from the reproducing \
                 value K_w(w) = 1 + log(1/(1-|w|^2)) by the constant term ||1||^2 = 1; \
                 the reproducing value is the one computed and checked",
            );
        Ok(b.finish())
    }
}

/// Size of the Gram matrices in the orthogonality check.
const ORTHOGONALITY_SIZE: usize = 6;

struct OrthogonalityRadial;

impl TheoremCheck for OrthogonalityRadial {
    fn id(&self) -> TheoremId {
        TheoremId::OrthogonalityRadial
    }

    fn cases(&self) -> Vec<&'static str> {
        vec![
            "power:k=2",
            "power:k=3",
            "rotation:theta=1",
            "slit:c=0.5",
            "poly:0,0.5,0.5",
            "lft:t=2",
        ]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        needs_origin_fixed(phi.as_ref())?;
        let d = &ctx.defaults;
        let truncation = d.gram_truncation_for(phi.as_ref());
        let gram = gram_powers(phi.as_ref(), ORTHOGONALITY_SIZE, truncation);
        let off = gram.max_off_diagonal();
        let tol = if phi.sampled() { 1e-3 } else { 1e-6 };
        let orthogonal = off < tol;
        let radial = counting::is_essentially_radial(phi.as_ref(), d.radial_tolerance)?;

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("gram_size", ORTHOGONALITY_SIZE)
            .record("truncation", truncation)
            .record("gram_max_off_diagonal", off)
            .record("radial_worst_ratio", radial.worst_ratio)
            .record("radial_worst_k", radial.worst_k)
            .record("radial_worst_r", radial.worst_r)
            .equals("powers_orthogonal", orthogonal, radial.radial, Paper);
        b.note(format!(
            "powers count as orthogonal when every off-diagonal entry is below {tol:e}"
        ));
        if phi.full() == Some(true) {
            b.at_most("gram_off_diagonal_bound", off, tol, 0.0, Derived)
                .equals("essentially_radial", radial.radial, true, Derived);
        }
        match spec {
            "poly:0,0.5,0.5" => {
                b.approx(
                    "gram_2_1",
                    gram.get(2, 1),
                    Complex64::new(0.25, 0.0),
                    1e-10,
                    Derived,
                )
                .equals("essentially_radial", radial.radial, false, Derived);
            }
            "lft:t=2" => {
                b.equals("essentially_radial", radial.radial, false, Derived);
            }
            _ => {}
        }
        Ok(b.finish())
    }
}

struct ChangeOfVariable;

impl TheoremCheck for ChangeOfVariable {
    fn id(&self) -> TheoremId {
        TheoremId::ChangeOfVariable
    }

    fn cases(&self) -> Vec<&'static str> {
        CATALOG.to_vec()
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        let d = &ctx.defaults;
        let field = CountingField::build(
            phi.as_ref(),
            &counting::image_matched_config(phi.as_ref(), &d.field),
        )?;
        let rho = field.contour_radius;
        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("contour_radius", rho)
            .record("r_max", field.r_max())
            .record("excluded_nodes", field.excluded());
        for f in [TestFunction::One, TestFunction::AbsSquared] {
            let cov = counting::change_of_variable_on(phi.as_ref(), f, &field);
            let key = match f {
                TestFunction::One => "one",
                TestFunction::AbsSquared => "abs_sq",
            };
            b.record(&format!("{key}_lhs"), cov.lhs)
                .record(&format!("{key}_rhs"), cov.rhs)
                .record(&format!("{key}_lhs_full_disk"), cov.lhs_full_disk)
                .record(&format!("{key}_unresolved_mass"), cov.unresolved_mass)
                .at_most(
                    &format!("{key}_residual"),
                    cov.residual,
                    d.covcheck_tolerance,
                    cov.exclusion_allowance,
                    Derived,
                );
            if f == TestFunction::One {
                let closed = if spec.starts_with("rotation:") {
                    Some((1.0, Trivial))
                } else if spec == "power:k=2" {
                    Some((2.0, Derived))
                } else {
                    None
                };
                if let Some((value, p)) = closed {
                    // ∫_{|z|<ρ} |φ'|^2 dA equals value·ρ^{2·deg}
                    let power = if value == 1.0 { 2 } else { 4 };
                    b.approx(
                        "one_lhs_full_disk_closed_form",
                        cov.lhs_full_disk,
                        value,
                        1e-10,
                        p,
                    )
                    .approx(
                        "one_lhs_closed_form",
                        cov.lhs,
                        value * rho.powi(power),
                        1e-10,
                        p,
                    )
                    .approx(
                        "one_rhs_closed_form",
                        cov.rhs,
                        value * rho.powi(power),
                        1e-3,
                        p,
                    );
                }
            }
        }
        b.note(
            "both sides are integrated over the contour disk |z| < contour_radius and its image",
        );
        Ok(b.finish())
    }
}

struct FullNormFormula;

impl TheoremCheck for FullNormFormula {
    fn id(&self) -> TheoremId {
        TheoremId::FullNormFormula
    }

    fn cases(&self) -> Vec<&'static str> {
        vec!["mobius:p=0.5", "mobius:p=0.5|slit:c=0.5"]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        if phi.univalent() != Some(true) {
            return Err(Error::Precondition(format!(
                "{spec} is not known to be univalent"
            )));
        }
        let ladder = operator::operator_norm_ladder(phi.as_ref(), &ctx.defaults.truncation_ladder)?;
        let p = phi.eval(Complex64::new(0.0, 0.0)).norm();
        let target = operator::norm_formula(p)?;

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("phi0_modulus", p);
        for r in &ladder {
            b.record(&format!("norm_n{}", r.truncation), r.value);
        }
        let min_step = ladder
            .windows(2)
            .map(|w| w[1].value - w[0].value)
            .fold(f64::INFINITY, f64::min);
        let max_value = ladder.iter().map(|r| r.value).fold(0.0, f64::max);
        b.approx("formula_target", target, target, 0.0, Derived)
            .at_least(
                "ladder_min_step",
                if min_step.is_finite() { min_step } else { 0.0 },
                0.0,
                1e-12,
                Derived,
            )
            .at_most("ladder_max", max_value, target, 1e-9, Paper);
        if phi.full() == Some(true) {
            if let Some(last) = ladder.last() {
                b.at_most(
                    "top_relative_gap",
                    (target - last.value).abs() / target,
                    0.0,
                    0.05,
                    Derived,
                );
            }
        }
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        b.approx(
            "formula_at_p0",
            operator::norm_formula(0.0)?,
            1.0,
            0.0,
            Trivial,
        )
        .approx(
            "formula_at_l1",
            operator::norm_formula((1.0 - (-1.0f64).exp()).sqrt())?,
            golden,
            1e-12,
            Derived,
        );
        b.note("ladder values are compression norms, hence lower bounds; steps are compared with a 1e-12 rounding slack");
        Ok(b.finish())
    }
}

struct D0NormOne;

impl TheoremCheck for D0NormOne {
    fn id(&self) -> TheoremId {
        TheoremId::D0NormOne
    }

    fn cases(&self) -> Vec<&'static str> {
        vec!["rotation:theta=0.5", "slit:c=0.5", "poly:0,0.5"]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        needs_origin_fixed(phi.as_ref())?;
        let d = &ctx.defaults;
        let ladder = operator::restricted_norm_d0_ladder(phi.as_ref(), &d.truncation_ladder)?;
        let top = ladder.last().map_or(0.0, |r| r.value);
        let mut b = ReportBuilder::new(self.id(), spec);
        for r in &ladder {
            b.record(&format!("d0_norm_n{}", r.truncation), r.value);
        }
        b.at_most(
            "d0_norm_max",
            ladder.iter().map(|r| r.value).fold(0.0, f64::max),
            1.0,
            1e-9,
            Paper,
        );
        match phi.full() {
            Some(true) => {
                b.approx("d0_norm_top", top, 1.0, 2e-2, Paper);
            }
            _ if phi.univalent() == Some(true) => {
                let radial = counting::is_essentially_radial(phi.as_ref(), d.radial_tolerance)?;
                b.record("essentially_radial", radial.radial);
                if radial.radial {
                    let nu = operator::d0_norm_bound(phi.sup_modulus())?;
                    b.record("sup_modulus", phi.sup_modulus()).at_most(
                        "d0_norm_vs_nu",
                        top,
                        nu,
                        2e-2,
                        Paper,
                    );
                    if spec == "poly:0,0.5" {
                        b.approx("d0_norm_attains_nu", top, nu, 1e-10, Derived);
                    }
                }
            }
            _ => {}
        }
        Ok(b.finish())
    }
}

struct CounterexampleLft;

impl TheoremCheck for CounterexampleLft {
    fn id(&self) -> TheoremId {
        TheoremId::CounterexampleLft
    }

    fn cases(&self) -> Vec<&'static str> {
        vec!["lft:t=2"]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        if !spec.starts_with("lft:") {
            return Err(Error::Precondition(format!(
                "{spec} is not a boundary-fixing LFT"
            )));
        }
        let phi = ctx.parse(spec)?;
        let d = &ctx.defaults;
        let ladder = operator::restricted_norm_d0_ladder(phi.as_ref(), &d.truncation_ladder)?;
        let top = ladder.last().map_or(0.0, |r| r.value);
        // the image is the disk with diameter [φ(-1), φ(1)] = [-1/t, 1]
        let left = phi.eval(Complex64::new(-1.0, 0.0)).re;
        let radius = (1.0 - left) / 2.0;
        let defect = counting::fullness_defect(phi.as_ref())?;
        let radial = counting::is_essentially_radial(phi.as_ref(), d.radial_tolerance)?;

        let mut b = ReportBuilder::new(self.id(), spec);
        for r in &ladder {
            b.record(&format!("d0_norm_n{}", r.truncation), r.value);
        }
        b.approx("d0_norm_top", top, 1.0, 2e-2, Paper)
            .at_most(
                "d0_norm_max",
                ladder.iter().map(|r| r.value).fold(0.0, f64::max),
                1.0,
                1e-9,
                Paper,
            )
            .approx(
                "fullness_defect",
                defect,
                1.0 - radius * radius,
                1e-2,
                Derived,
            )
            .equals("essentially_radial", radial.radial, false, Derived)
            .equals("full", phi.full() == Some(true), false, Derived);
        Ok(b.finish())
    }
}

struct EssentialNormOne;

impl TheoremCheck for EssentialNormOne {
    fn id(&self) -> TheoremId {
        TheoremId::EssentialNormOne
    }

    fn cases(&self) -> Vec<&'static str> {
        vec!["rotation:theta=1", "slit:c=0.5", "mobius:p=0.5"]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        if phi.univalent() != Some(true) || phi.full() != Some(true) {
            return Err(Error::Precondition(format!(
                "{spec} is not a univalent full map"
            )));
        }
        let d = &ctx.defaults;
        let exact_isometry = phi.fixes_origin() && !phi.sampled();
        let truncation = if exact_isometry {
            64
        } else {
            d.essnorm_truncation
        };
        let n_max = d.essnorm_n_max;
        let m = build_matrix(phi.as_ref(), truncation)?;
        let profile = operator::essential_norm_profile(&m, n_max)?;
        let s = |n: usize| profile[n - 1];
        let max_rise = profile
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("truncation", truncation)
            .record("s_1", s(1))
            .record("s_8", s(8))
            .record(&format!("s_{n_max}"), s(n_max))
            .at_most("profile_max_rise", max_rise.max(0.0), 0.0, 1e-10, Derived);
        if exact_isometry {
            let dev = profile.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
            b.at_most("max_deviation_from_one", dev, 0.0, 1e-10, Trivial);
        } else if phi.fixes_origin() {
            b.approx(&format!("s_{n_max}_vs_one"), s(n_max), 1.0, 2e-2, Paper);
        } else {
            let norm = operator::operator_norm(&m)?.value;
            b.record("operator_norm", norm).at_least(
                "norm_minus_tail",
                norm - s(n_max),
                0.05,
                0.0,
                Paper,
            );
        }
        Ok(b.finish())
    }
}

struct IsometryFull;

impl TheoremCheck for IsometryFull {
    fn id(&self) -> TheoremId {
        TheoremId::IsometryFull
    }

    fn cases(&self) -> Vec<&'static str> {
        vec!["rotation:theta=0.3", "slit:c=0.5", "mobius:p=0.5"]
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        let d = &ctx.defaults;
        let isometry =
            phi.univalent() == Some(true) && phi.full() == Some(true) && phi.fixes_origin();
        let (truncation, block, tol) = match (isometry, phi.sampled()) {
            (true, false) => (64, 32, 1e-12),
            (true, true) => (d.isometry_truncation, d.isometry_block, 1e-3),
            (false, _) => (64, 8, 0.1),
        };
        let m = build_matrix(phi.as_ref(), truncation)?;
        let defect = operator::isometry_defect(&m, block)?;
        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("truncation", truncation).record("block", block);
        if isometry {
            b.at_most("isometry_defect", defect, tol, 0.0, Paper);
        } else {
            b.at_least("isometry_defect", defect, tol, 0.0, Derived);
        }
        Ok(b.finish())
    }
}

struct CountingEngine;

impl TheoremCheck for CountingEngine {
    fn id(&self) -> TheoremId {
        TheoremId::CountingEngine
    }

    fn cases(&self) -> Vec<&'static str> {
        CATALOG.to_vec()
    }

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport> {
        let phi = ctx.parse(spec)?;
        let d = &ctx.defaults;
        let field = CountingField::build(phi.as_ref(), &d.field)?;
        let energy = counting::energy_identity(phi.as_ref(), &d.field)?;

        let mut b = ReportBuilder::new(self.id(), spec);
        b.record("nodes", field.values.len())
            .record("guarded", field.guarded())
            .record("unsnapped", field.unsnapped())
            .at_least("snap_fraction", field.snap_fraction(), 0.99, 0.0, Derived)
            .record("energy_field_integral", energy.field_integral)
            .record("energy_coefficients", energy.energy)
            .at_most("energy_residual", energy.residual, 5e-3, 0.0, Paper);
        if phi.univalent() == Some(true) {
            b.at_most("max_count", field.max_count(), 1u32, 0.0, Derived);
        }
        if spec == "power:k=2" {
            let off = field
                .values
                .iter()
                .filter(|s| matches!(s, NodeStatus::Counted(n) if *n != 2))
                .count();
            b.equals("nodes_not_two", off, 0usize, Derived);
            let w = Complex64::new(0.25, 0.0);
            let counts = [0.6, 0.75, 0.9]
                .iter()
                .map(|&rho| counting::count_preimages(phi.as_ref(), w, rho))
                .collect::<Result<Vec<u32>>>()?;
            let monotone = counts.windows(2).all(|c| c[0] <= c[1]);
            b.record("count_at_0.6", counts[0])
                .record("count_at_0.75", counts[1])
                .record("count_at_0.9", counts[2])
                .equals("counts_monotone_in_contour", monotone, true, Derived);
        }
        Ok(b.finish())
    }
}
