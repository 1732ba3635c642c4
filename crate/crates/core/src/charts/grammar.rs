//! One-line ASCII map specifications:
//!
//! ```text
//! power:d=2
//! quad:c=0.1+0.0i
//! rational:P=1,0,0;Q=0,0,1
//! product:q=affine(2,0);d=2;h=zero
//! iter:n=3(power:d=2)
//! ```
//!
//! Radial profiles: `affine(a,b)`, `dilation(a)`, `poly(c0,c1,..)`,
//! `pwl(s:v,s:v,..)` (values may be `inf`/`-inf`) and `zero`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::{ChartError, MapKind, MapSpec, RadialProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unknown map kind `{0}`")]
    UnknownKind(String),
    #[error("unknown key `{key}` for `{kind}`")]
    UnknownKey { kind: String, key: String },
    #[error("missing key `{key}` for `{kind}`")]
    MissingKey { kind: String, key: String },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("malformed {what}: `{text}`")]
    Malformed { what: &'static str, text: String },
    #[error(transparent)]
    Invalid(#[from] ChartError),
}

fn malformed(what: &'static str, text: &str) -> ParseError {
    ParseError::Malformed {
        what,
        text: text.to_string(),
    }
}

pub fn parse_map(text: &str) -> Result<MapSpec, ParseError> {
    let text = text.trim();
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| malformed("map spec", text))?;
    match kind {
        "power" => {
            let mut keys = parse_keys(kind, body, &["d"])?;
            Ok(MapSpec::power(parse_int(&take(kind, &mut keys, "d")?)?))
        }
        "quad" => {
            let mut keys = parse_keys(kind, body, &["c"])?;
            Ok(MapSpec::quadratic(parse_complex(&take(
                kind, &mut keys, "c",
            )?)?))
        }
        "rational" => {
            let mut keys = parse_keys(kind, body, &["P", "Q"])?;
            let p = parse_complex_list(&take(kind, &mut keys, "P")?)?;
            let q = parse_complex_list(&take(kind, &mut keys, "Q")?)?;
            Ok(MapSpec::rational(p, q)?)
        }
        "product" => {
            let mut keys = parse_keys(kind, body, &["q", "d", "h"])?;
            let radial = parse_profile(&take(kind, &mut keys, "q")?)?;
            let d = parse_int(&take(kind, &mut keys, "d")?)?;
            let twist = match keys.remove("h") {
                Some(h) => parse_profile(&h)?,
                None => RadialProfile::zero(),
            };
            Ok(MapSpec::product(radial, d, twist)?)
        }
        "iter" => {
            let open = body.find('(').ok_or_else(|| malformed("iterate", text))?;
            if !body.ends_with(')') {
                return Err(malformed("iterate", text));
            }
            let mut keys = parse_keys(kind, &body[..open], &["n"])?;
            let n_text = take(kind, &mut keys, "n")?;
            let n: u32 = n_text
                .parse()
                .map_err(|_| malformed("iterate count", &n_text))?;
            let inner = parse_map(&body[open + 1..body.len() - 1])?;
            Ok(MapSpec::iterate(inner, n)?)
        }
        other => Err(ParseError::UnknownKind(other.to_string())),
    }
}

fn parse_keys(
    kind: &str,
    body: &str,
    allowed: &[&str],
) -> Result<BTreeMap<String, String>, ParseError> {
    let mut out = BTreeMap::new();
    for item in body.split(';') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| malformed("key=value pair", item))?;
        if !allowed.contains(&key) {
            return Err(ParseError::UnknownKey {
                kind: kind.to_string(),
                key: key.to_string(),
            });
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ParseError::DuplicateKey(key.to_string()));
        }
    }
    Ok(out)
}

fn take(kind: &str, keys: &mut BTreeMap<String, String>, key: &str) -> Result<String, ParseError> {
    keys.remove(key).ok_or_else(|| ParseError::MissingKey {
        kind: kind.to_string(),
        key: key.to_string(),
    })
}

fn parse_int(text: &str) -> Result<i32, ParseError> {
    text.parse().map_err(|_| malformed("integer", text))
}

fn parse_real(text: &str) -> Result<f64, ParseError> {
    match text {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed("real number", text)),
    }
}

fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    text.parse::<Complex64>()
        .ok()
        .filter(|c| c.re.is_finite() && c.im.is_finite())
        .ok_or_else(|| malformed("complex number", text))
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, ParseError> {
    text.split(',').map(parse_complex).collect()
}

fn parse_profile(text: &str) -> Result<RadialProfile, ParseError> {
    if text == "zero" {
        return Ok(RadialProfile::zero());
    }
    let open = text
        .find('(')
        .ok_or_else(|| malformed("radial profile", text))?;
    if !text.ends_with(')') {
        return Err(malformed("radial profile", text));
    }
    let name = &text[..open];
    let args: Vec<&str> = text[open + 1..text.len() - 1].split(',').collect();
    match name {
        "affine" => {
            if args.len() != 2 {
                return Err(malformed("affine profile", text));
            }
            Ok(RadialProfile::affine(
                parse_real(args[0])?,
                parse_real(args[1])?,
            ))
        }
        "dilation" => {
            if args.len() != 1 {
                return Err(malformed("dilation profile", text));
            }
            Ok(RadialProfile::dilation(parse_real(args[0])?)?)
        }
        "poly" => Ok(RadialProfile::poly(
            args.iter()
                .map(|a| parse_real(a))
                .collect::<Result<_, _>>()?,
        )?),
        "pwl" => {
            let points = args
                .iter()
                .map(|a| {
                    let (s, v) = a
                        .split_once(':')
                        .ok_or_else(|| malformed("breakpoint", a))?;
                    Ok((parse_real(s)?, parse_real(v)?))
                })
                .collect::<Result<Vec<_>, ParseError>>()?;
            Ok(RadialProfile::piecewise_linear(points)?)
        }
        _ => Err(malformed("radial profile", text)),
    }
}

fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Affine { a, b } if *a == 0.0 && *b == 0.0 => write!(f, "zero"),
            RadialProfile::Affine { a, b } => {
                write!(f, "affine({},{})", fmt_real(*a), fmt_real(*b))
            }
            RadialProfile::Poly { coefficients } => {
                let parts: Vec<String> = coefficients.iter().map(|&c| fmt_real(c)).collect();
                write!(f, "poly({})", parts.join(","))
            }
            RadialProfile::PiecewiseLinear { breakpoints } => {
                let parts: Vec<String> = breakpoints
                    .iter()
                    .map(|&(s, v)| format!("{}:{}", fmt_real(s), fmt_real(v)))
                    .collect();
                write!(f, "pwl({})", parts.join(","))
            }
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            MapKind::Power { d } => write!(f, "power:d={d}"),
            MapKind::Quadratic { c } => write!(f, "quad:c={}", fmt_complex(*c)),
            MapKind::RationalPair { p, q } => {
                let list = |v: &[Complex64]| {
                    let mut v = v.to_vec();
                    while v.len() > 1 && *v.last().unwrap() == Complex64::new(0.0, 0.0) {
                        v.pop();
                    }
                    v.iter()
                        .map(|&c| fmt_complex(c))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                write!(f, "rational:P={};Q={}", list(p), list(q))
            }
            MapKind::Product {
                radial,
                angular_degree,
                twist,
            } => write!(f, "product:q={radial};d={angular_degree};h={twist}"),
            MapKind::Iterate { inner, n } => write!(f, "iter:n={n}({inner})"),
        }
    }
}

impl std::str::FromStr for MapSpec {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_map(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_documented_form() {
        for text in [
            "power:d=2",
            "quad:c=0.1+0.0i",
            "rational:P=1,0,0;Q=0,0,1",
            "product:q=affine(2,0);d=2;h=zero",
            "iter:n=3(power:d=2)",
        ] {
            parse_map(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        }
    }

    #[test]
    fn rational_coefficients_are_ascending() {
        let f = parse_map("rational:P=1;Q=0,1").unwrap();
        let w = f.evaluate(crate::charts::SpherePoint::north(Complex64::new(2.0, 0.0)));
        assert!((w.z() - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unknown_and_missing_keys_are_errors() {
        assert!(matches!(
            parse_map("power:e=2"),
            Err(ParseError::UnknownKey { .. })
        ));
        assert!(matches!(
            parse_map("product:d=2"),
            Err(ParseError::MissingKey { .. })
        ));
        assert!(matches!(
            parse_map("power:d=2;d=3"),
            Err(ParseError::DuplicateKey(_))
        ));
        assert!(matches!(
            parse_map("cubic:c=1"),
            Err(ParseError::UnknownKind(_))
        ));
        assert!(parse_map("power:d=two").is_err());
        assert!(parse_map("iter:n=0(power:d=2)").is_err());
        assert!(parse_map("product:q=wiggle(1);d=2").is_err());
    }

    #[test]
    fn nested_iterates() {
        let f = parse_map("iter:n=2(iter:n=3(power:d=2))").unwrap();
        assert_eq!(f.declared_degree(), 64);
        assert_eq!(f.flatten().1, 6);
    }

    #[test]
    fn pwl_profiles_accept_pole_levels() {
        let f = parse_map("product:q=pwl(-3:-4,-2:-3,-1:inf,1:-inf,2:3,3:4);d=2").unwrap();
        assert_eq!(f.declared_degree(), 2);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "power:d=-3",
            "quad:c=0.1-0.2i",
            "rational:P=1+0i,2+0i;Q=0+0i,0+0i,1+0i",
            "product:q=pwl(-3:-4,-2:-3,-1:inf,1:-inf,2:3,3:4);d=2;h=affine(0.5,0)",
            "product:q=poly(0,2);d=-1;h=zero",
            "iter:n=2(quad:c=0.2+0i)",
        ] {
            let f = parse_map(text).unwrap();
            let again = parse_map(&f.to_string()).unwrap();
            assert_eq!(f, again, "{text}");
        }
    }
}
