use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{catalog, SymbolMap};
use crate::error::{Error, Result};

type Builder = fn(&SpecArgs<'_>) -> Result<SymbolMap>;

struct Registration {
    usage: &'static str,
    build: Builder,
}

/// Arguments of one `name:payload` spec token.
///
/// The payload is a comma-separated list; items of the form `key=value`
/// are named, the rest positional.
#[derive(Debug, Clone)]
pub struct SpecArgs<'a> {
    token: &'a str,
    positional: Vec<&'a str>,
    named: Vec<(&'a str, &'a str)>,
}

impl<'a> SpecArgs<'a> {
    fn parse(token: &'a str, payload: Option<&'a str>) -> Result<Self> {
        let mut positional = Vec::new();
        let mut named = Vec::new();
        for item in payload.into_iter().flat_map(|p| p.split(',')) {
            let item = item.trim();
            if item.is_empty() {
                return Err(Error::parse(token, "empty argument"));
            }
            match item.split_once('=') {
                Some((key, value)) => named.push((key.trim(), value.trim())),
                None => positional.push(item),
            }
        }
        Ok(Self {
            token,
            positional,
            named,
        })
    }

    pub fn token(&self) -> &'a str {
        self.token
    }

    fn value(&self, key: &str) -> Result<&'a str> {
        self.named
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::parse(self.token, format!("missing `{key}=`")))
    }

    /// Rejects keys and positionals other than `keys`.
    fn expect_only(&self, keys: &[&str]) -> Result<()> {
        if let Some(p) = self.positional.first() {
            return Err(Error::parse(*p, "unexpected positional argument"));
        }
        for (k, _) in &self.named {
            if !keys.contains(k) {
                return Err(Error::parse(*k, format!("unknown key in `{}`", self.token)));
            }
        }
        Ok(())
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        let v = self.value(key)?;
        v.parse::<f64>()
            .map_err(|_| Error::parse(v, format!("`{key}` must be a real number")))
    }

    pub fn complex(&self, key: &str) -> Result<Complex64> {
        let v = self.value(key)?;
        parse_complex(v).ok_or_else(|| Error::parse(v, format!("`{key}` must be a complex number")))
    }

    pub fn unsigned(&self, key: &str) -> Result<u32> {
        let v = self.value(key)?;
        v.parse::<u32>()
            .map_err(|_| Error::parse(v, format!("`{key}` must be a nonnegative integer")))
    }

    pub fn positional_complex(&self) -> Result<Vec<Complex64>> {
        if let Some((k, _)) = self.named.first() {
            return Err(Error::parse(*k, "expected a plain coefficient list"));
        }
        self.positional
            .iter()
            .map(|p| parse_complex(p).ok_or_else(|| Error::parse(*p, "not a complex number")))
            .collect()
    }
}

/// Parses `1.5`, `-0.2+0.3i`, `0.3j`, `-i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().ok()?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

pub(crate) fn format_complex_spec(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

/// Named symbol constructors, selected at runtime from spec strings.
pub struct SymbolRegistry {
    entries: BTreeMap<&'static str, Registration>,
}

impl Default for SymbolRegistry {
    fn default() -> Self {
        Self::with_catalog()
    }
}

impl SymbolRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding every catalog symbol.
    pub fn with_catalog() -> Self {
        let mut reg = Self::empty();
        reg.register("rotation", "rotation:theta=<radians>", |a| {
            a.expect_only(&["theta"])?;
            Ok(catalog::rotation(a.real("theta")?))
        });
        reg.register("mobius", "mobius:p=<complex, |p|<1>", |a| {
            a.expect_only(&["p"])?;
            catalog::automorphism(a.complex("p")?)
        });
        reg.register("lft", "lft:t=<real >= 1>", |a| {
            a.expect_only(&["t"])?;
            catalog::boundary_fixed_lft(a.real("t")?)
        });
        reg.register("power", "power:k=<integer >= 1>", |a| {
            a.expect_only(&["k"])?;
            catalog::monomial(a.unsigned("k")?)
        });
        reg.register("slit", "slit:c=<real in (0,1)>", |a| {
            a.expect_only(&["c"])?;
            catalog::radial_slit_full_map(a.real("c")?)
        });
        reg.register("poly", "poly:a0,a1,...", |a| {
            catalog::polynomial(a.positional_complex()?)
        });
        reg
    }

    pub fn register(&mut self, name: &'static str, usage: &'static str, build: Builder) {
        self.entries.insert(name, Registration { usage, build });
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn usage(&self) -> Vec<&'static str> {
        self.entries.values().map(|r| r.usage).collect()
    }

    /// Parses `A|B|...` as `A ∘ (B ∘ ...)`.
    pub fn parse(&self, spec: &str) -> Result<SymbolMap> {
        let mut parts = spec.split('|').rev();
        let last = parts.next().expect("split yields one part");
        let mut symbol = self.parse_single(last)?;
        for part in parts {
            symbol = catalog::compose(self.parse_single(part)?, symbol)?;
        }
        Ok(symbol)
    }

    fn parse_single(&self, token: &str) -> Result<SymbolMap> {
        let token = token.trim();
        if token.is_empty() {
            return Err(Error::parse(token, "empty symbol"));
        }
        let (name, payload) = match token.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (token, None),
        };
        let entry = self.entries.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::parse(
                name,
                format!("unknown symbol; expected one of {}", known.join(", ")),
            )
        })?;
        (entry.build)(&SpecArgs::parse(token, payload)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5"), Some(c(0.5, 0.0)));
        assert_eq!(parse_complex("-0.2+0.3i"), Some(c(-0.2, 0.3)));
        assert_eq!(parse_complex("0.1-2j"), Some(c(0.1, -2.0)));
        assert_eq!(parse_complex("0.3i"), Some(c(0.0, 0.3)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("1e-3+2e-2i"), Some(c(1e-3, 2e-2)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn parses_every_catalog_form() {
        let reg = SymbolRegistry::with_catalog();
        for spec in [
            "rotation:theta=1.57",
            "mobius:p=0.5",
            "lft:t=2",
            "power:k=2",
            "slit:c=0.5",
            "poly:0,0.5,0.5",
        ] {
            let phi = reg.parse(spec).unwrap();
            assert_eq!(phi.spec(), spec);
        }
    }

    #[test]
    fn composition_is_outer_then_inner() {
        let reg = SymbolRegistry::with_catalog();
        let phi = reg.parse("mobius:p=0.5|slit:c=0.5").unwrap();
        assert!((phi.eval(c(0.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(phi.spec(), "mobius:p=0.5|slit:c=0.5");
        let phi = reg.parse("rotation:theta=0.5|power:k=2|lft:t=2").unwrap();
        let z = c(0.3, 0.1);
        let lft = 2.0 * z / (3.0 - z);
        let want = c(0.5f64.cos(), 0.5f64.sin()) * lft * lft;
        assert!((phi.eval(z) - want).norm() < 1e-15);
    }

    #[test]
    fn errors_name_the_offending_token() {
        let reg = SymbolRegistry::with_catalog();
        let err = |s: &str| match reg.parse(s) {
            Err(Error::Parse { token, .. }) => token,
            Err(e) => panic!("unexpected error {e}"),
            Ok(_) => panic!("`{s}` should not parse"),
        };
        assert_eq!(err("blaschke:a=0.1"), "blaschke");
        assert_eq!(err("mobius:p=zz"), "zz");
        assert_eq!(err("lft:s=2"), "s");
        assert_eq!(err("power"), "power");
        assert_eq!(err("poly:0,x"), "x");
        assert_eq!(err("power:k=2|"), "");
        assert!(matches!(
            reg.parse("mobius:p=1.5"),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            reg.parse("poly:0,1.2"),
            Err(Error::NotSelfMap { .. })
        ));
    }

    #[test]
    fn custom_registration() {
        let mut reg = SymbolRegistry::empty();
        reg.register("half", "half", |_| {
            catalog::polynomial(vec![c(0.0, 0.0), c(0.5, 0.0)])
        });
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["half"]);
        assert!(reg.parse("half").is_ok());
        assert!(reg.parse("power:k=2").is_err());
    }

    proptest! {
        #[test]
        fn spec_round_trips(re in -0.6f64..0.6, im in -0.6f64..0.6, theta in -7.0f64..7.0) {
            let reg = SymbolRegistry::with_catalog();
            let p = c(re, im);
            for phi in [catalog::automorphism(p).unwrap(), catalog::rotation(theta)] {
                let again = reg.parse(&phi.spec()).unwrap();
                let z = c(0.31, -0.27);
                prop_assert_eq!(again.eval(z), phi.eval(z));
            }
        }
    }
}
