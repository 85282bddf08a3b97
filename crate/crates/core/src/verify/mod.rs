//! Theorem verifications: each check computes named quantities for one
//! symbol and compares them with expected values tagged by where the
//! expectation comes from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Defaults;
use crate::error::{Error, Result};
use crate::symbols::{SymbolMap, SymbolRegistry};

mod checks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    InnerProduct,
    ReproducingKernel,
    OrthogonalityRadial,
    ChangeOfVariable,
    FullNormFormula,
    D0NormOne,
    CounterexampleLft,
    EssentialNormOne,
    IsometryFull,
    CountingEngine,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::InnerProduct,
        TheoremId::ReproducingKernel,
        TheoremId::OrthogonalityRadial,
        TheoremId::ChangeOfVariable,
        TheoremId::FullNormFormula,
        TheoremId::D0NormOne,
        TheoremId::CounterexampleLft,
        TheoremId::EssentialNormOne,
        TheoremId::IsometryFull,
        TheoremId::CountingEngine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::InnerProduct => "inner_product",
            TheoremId::ReproducingKernel => "reproducing_kernel",
            TheoremId::OrthogonalityRadial => "orthogonality_radial",
            TheoremId::ChangeOfVariable => "change_of_variable",
            TheoremId::FullNormFormula => "full_norm_formula",
            TheoremId::D0NormOne => "d0_norm_one",
            TheoremId::CounterexampleLft => "counterexample_lft",
            TheoremId::EssentialNormOne => "essential_norm_one",
            TheoremId::IsometryFull => "isometry_full",
            TheoremId::CountingEngine => "counting_engine",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = TheoremId::ALL.iter().map(|id| id.as_str()).collect();
                Error::parse(
                    s,
                    format!("unknown theorem; expected one of {}", known.join(", ")),
                )
            })
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// Stated in the source results.
    Paper,
    /// Immediate from the definitions.
    Trivial,
    /// Obtained by a short derivation or an independent computation.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex { re: f64, im: f64 },
    Flag(bool),
    Count(u64),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Flag(b)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Count(n as u64)
    }
}

impl From<u32> for Value {
    fn from(n: u32) -> Self {
        Value::Count(n.into())
    }
}

impl From<Complex64> for Value {
    fn from(c: Complex64) -> Self {
        Value::Complex { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|computed - value| <= tolerance`.
    Approx,
    /// `computed <= value + tolerance`.
    AtMost,
    /// `computed >= value - tolerance`.
    AtLeast,
    /// Exact equality of flags or counts.
    Equals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub relation: Relation,
    pub value: Value,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: TheoremId,
    pub symbol_spec: String,
    pub passed: bool,
    pub computed: BTreeMap<String, Value>,
    pub expected: BTreeMap<String, Expected>,
    pub tolerances: BTreeMap<String, f64>,
    /// Names of the expectations that did not hold.
    pub failed: Vec<String>,
    pub notes: Vec<String>,
}

fn holds(computed: Value, expected: &Expected, tol: f64) -> bool {
    use Value::*;
    match (expected.relation, computed, expected.value) {
        (Relation::Equals, c, e) => c == e,
        (rel, Real(c), Real(e)) => match rel {
            Relation::Approx => (c - e).abs() <= tol,
            Relation::AtMost => c <= e + tol,
            Relation::AtLeast => c >= e - tol,
            Relation::Equals => unreachable!(),
        },
        (rel, Count(c), Count(e)) => holds(
            Real(c as f64),
            &Expected {
                value: Real(e as f64),
                relation: rel,
                provenance: expected.provenance,
            },
            tol,
        ),
        (Relation::Approx, Complex { re, im }, Complex { re: er, im: ei }) => {
            Complex64::new(re - er, im - ei).norm() <= tol
        }
        _ => false,
    }
}

/// Accumulates computed values and expectations for one report.
#[derive(Debug)]
pub struct ReportBuilder {
    report: VerificationReport,
}

impl ReportBuilder {
    pub fn new(theorem_id: TheoremId, symbol_spec: impl Into<String>) -> Self {
        Self {
            report: VerificationReport {
                theorem_id,
                symbol_spec: symbol_spec.into(),
                passed: false,
                computed: BTreeMap::new(),
                expected: BTreeMap::new(),
                tolerances: BTreeMap::new(),
                failed: Vec::new(),
                notes: Vec::new(),
            },
        }
    }

    /// Records a value without an expectation.
    pub fn record(&mut self, name: &str, value: impl Into<Value>) -> &mut Self {
        self.report.computed.insert(name.to_string(), value.into());
        self
    }

    fn expect(
        &mut self,
        name: &str,
        computed: Value,
        relation: Relation,
        value: Value,
        tol: Option<f64>,
        provenance: Provenance,
    ) -> &mut Self {
        self.report.computed.insert(name.to_string(), computed);
        self.report.expected.insert(
            name.to_string(),
            Expected {
                relation,
                value,
                provenance,
            },
        );
        if let Some(t) = tol {
            self.report.tolerances.insert(name.to_string(), t);
        }
        self
    }

    pub fn approx(
        &mut self,
        name: &str,
        computed: impl Into<Value>,
        expected: impl Into<Value>,
        tol: f64,
        p: Provenance,
    ) -> &mut Self {
        self.expect(
            name,
            computed.into(),
            Relation::Approx,
            expected.into(),
            Some(tol),
            p,
        )
    }

    pub fn at_most(
        &mut self,
        name: &str,
        computed: impl Into<Value>,
        bound: impl Into<Value>,
        slack: f64,
        p: Provenance,
    ) -> &mut Self {
        self.expect(
            name,
            computed.into(),
            Relation::AtMost,
            bound.into(),
            Some(slack),
            p,
        )
    }

    pub fn at_least(
        &mut self,
        name: &str,
        computed: impl Into<Value>,
        bound: impl Into<Value>,
        slack: f64,
        p: Provenance,
    ) -> &mut Self {
        self.expect(
            name,
            computed.into(),
            Relation::AtLeast,
            bound.into(),
            Some(slack),
            p,
        )
    }

    pub fn equals(
        &mut self,
        name: &str,
        computed: impl Into<Value>,
        expected: impl Into<Value>,
        p: Provenance,
    ) -> &mut Self {
        self.expect(
            name,
            computed.into(),
            Relation::Equals,
            expected.into(),
            None,
            p,
        )
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.report.notes.push(text.into());
        self
    }

    pub fn finish(mut self) -> VerificationReport {
        let r = &mut self.report;
        r.failed = r
            .expected
            .iter()
            .filter(|(name, e)| {
                let tol = r.tolerances.get(*name).copied().unwrap_or(0.0);
                !holds(r.computed[*name], e, tol)
            })
            .map(|(name, _)| name.clone())
            .collect();
        r.passed = r.failed.is_empty() && !r.expected.is_empty();
        self.report
    }
}

/// Shared inputs of every check.
#[derive(Default)]
pub struct Context {
    pub symbols: SymbolRegistry,
    pub defaults: Defaults,
}

impl Context {
    pub fn parse(&self, spec: &str) -> Result<SymbolMap> {
        self.symbols.parse(spec)
    }
}

/// One theorem check, run once per symbol case.
pub trait TheoremCheck: Send + Sync {
    fn id(&self) -> TheoremId;

    /// Symbol specs checked by default.
    fn cases(&self) -> Vec<&'static str>;

    fn check(&self, spec: &str, ctx: &Context) -> Result<VerificationReport>;
}

/// Checks registered by theorem id.
pub struct CheckRegistry {
    checks: BTreeMap<TheoremId, Box<dyn TheoremCheck>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self {
            checks: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for check in checks::all() {
            reg.register(check);
        }
        reg
    }

    pub fn register(&mut self, check: Box<dyn TheoremCheck>) {
        self.checks.insert(check.id(), check);
    }

    pub fn ids(&self) -> impl Iterator<Item = TheoremId> + '_ {
        self.checks.keys().copied()
    }

    pub fn get(&self, id: TheoremId) -> Option<&dyn TheoremCheck> {
        self.checks.get(&id).map(|c| c.as_ref())
    }

    /// Runs one theorem on its default cases or on `symbol`; errors become
    /// failed reports instead of aborting.
    pub fn run(
        &self,
        id: TheoremId,
        symbol: Option<&str>,
        ctx: &Context,
    ) -> Vec<VerificationReport> {
        let Some(check) = self.get(id) else {
            let mut b = ReportBuilder::new(id, symbol.unwrap_or(""));
            b.note("no check registered for this theorem");
            return vec![b.finish()];
        };
        let cases: Vec<String> = match symbol {
            Some(s) => vec![s.to_string()],
            None => check.cases().into_iter().map(String::from).collect(),
        };
        cases
            .iter()
            .map(|spec| {
                check.check(spec, ctx).unwrap_or_else(|e| {
                    let mut b = ReportBuilder::new(id, spec.clone());
                    b.note(format!("error: {e}"));
                    b.finish()
                })
            })
            .collect()
    }

    pub fn run_all(&self, ctx: &Context) -> Vec<VerificationReport> {
        self.ids().flat_map(|id| self.run(id, None, ctx)).collect()
    }
}

/// Every registered check on its default cases.
pub fn verify_all() -> Vec<VerificationReport> {
    CheckRegistry::standard().run_all(&Context::default())
}
