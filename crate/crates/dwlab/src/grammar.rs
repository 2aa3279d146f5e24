//! Text grammar for self-maps, shared by the CLI and config layer.
//!
//! Forms: `identity`, `mobius(a,b,c,d)`, `mobius_h(a,b,c,d)` (half-plane),
//! `affine(a,b)`, `blaschke([(z1,k1),...], rot)`, `hpexp(offset, freq)`,
//! `rotation(theta)` (sugar for a Möbius rotation) and
//! `compose(m1, m2, ...)`. Complex literals are written `x+yi`.
//!
//! `parse_map(print_map(m))` reproduces `m` bit-exactly: floats print in
//! shortest round-trip form and Möbius coefficients are already
//! determinant-normalized when printed.

use num_complex::Complex64;

use crate::holomap::{HoloMap, Model};
use crate::hypgeom::{DiscPoint, HalfPlanePoint};
use crate::{Error, Result};

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Print a complex literal in `x+yi` form, dropping exact-zero parts.
pub fn print_complex(z: Complex64) -> String {
    let re_zero = z.re.to_bits() == 0;
    let im_zero = z.im.to_bits() == 0;
    if im_zero {
        return fmt_f64(z.re);
    }
    let im_str = if z.im.is_sign_negative() {
        format!("-{}i", fmt_f64(-z.im))
    } else {
        format!("{}i", fmt_f64(z.im))
    };
    if re_zero {
        im_str
    } else if z.im.is_sign_negative() {
        format!("{}{}", fmt_f64(z.re), im_str)
    } else {
        format!("{}+{}", fmt_f64(z.re), im_str)
    }
}

/// Parse a complex literal: `2`, `-1.5`, `i`, `-2i`, `1+2i`, `1.5e-3-2e4i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // Find the split between real and imaginary parts: the last +/- that
        // is not leading and not an exponent sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for (idx, &ch) in bytes.iter().enumerate().rev() {
            if (ch == b'+' || ch == b'-') && idx > 0 {
                let prev = bytes[idx - 1];
                if prev != b'e' && prev != b'E' {
                    split = Some(idx);
                    break;
                }
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            parse_f64(re_str)?
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => parse_f64(other)?,
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(parse_f64(s)?, 0.0))
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number: {s:?}")))
}

/// Split a string on `sep` at nesting depth zero (with respect to
/// parentheses and brackets).
pub fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (idx, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..idx]);
                start = idx + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn call_parts(s: &str) -> Result<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
            }
            Ok((s[..open].trim(), Some(&s[open + 1..s.len() - 1])))
        }
    }
}

/// Parse a map expression.
pub fn parse_map(s: &str) -> Result<HoloMap> {
    let (head, args) = call_parts(s)?;
    match (head, args) {
        ("identity", None) => Ok(HoloMap::Identity),
        ("mobius" | "mobius_h", Some(args)) => {
            let parts = split_top_level(args, ',');
            if parts.len() != 4 {
                return Err(Error::Parse("mobius takes four coefficients".into()));
            }
            let coef: Vec<Complex64> = parts
                .iter()
                .map(|p| parse_complex(p))
                .collect::<Result<_>>()?;
            let model = if head == "mobius" {
                Model::Disc
            } else {
                Model::HalfPlane
            };
            HoloMap::mobius(coef[0], coef[1], coef[2], coef[3], model)
        }
        ("affine", Some(args)) => {
            let parts = split_top_level(args, ',');
            if parts.len() != 2 {
                return Err(Error::Parse("affine takes two coefficients".into()));
            }
            HoloMap::affine(parse_complex(parts[0])?, parse_complex(parts[1])?)
        }
        ("rotation", Some(args)) => Ok(HoloMap::rotation(parse_f64(args)?)),
        ("blaschke", Some(args)) => {
            let parts = split_top_level(args, ',');
            if parts.len() != 2 {
                return Err(Error::Parse(
                    "blaschke takes a factor list and a rotation".into(),
                ));
            }
            let list = parts[0].trim();
            let list = list
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or_else(|| Error::Parse("blaschke factors must be bracketed".into()))?;
            let mut factors = Vec::new();
            for item in split_top_level(list, ',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let item = item
                    .strip_prefix('(')
                    .and_then(|l| l.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("bad blaschke factor {item:?}")))?;
                let halves = split_top_level(item, ',');
                if halves.len() != 2 {
                    return Err(Error::Parse(
                        "blaschke factor is (zero, exponent)".into(),
                    ));
                }
                let zero = DiscPoint::from_complex(parse_complex(halves[0])?)?;
                let k: u32 = halves[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent {:?}", halves[1])))?;
                factors.push((zero, k));
            }
            HoloMap::blaschke(factors, parse_complex(parts[1])?)
        }
        ("hpexp", Some(args)) => {
            let parts = split_top_level(args, ',');
            if parts.len() != 2 {
                return Err(Error::Parse("hpexp takes offset and frequency".into()));
            }
            let offset = HalfPlanePoint::from_complex(parse_complex(parts[0])?)?;
            HoloMap::half_plane_exp(offset, parse_f64(parts[1])?)
        }
        ("compose", Some(args)) => {
            let chain: Vec<HoloMap> = split_top_level(args, ',')
                .iter()
                .map(|p| parse_map(p))
                .collect::<Result<_>>()?;
            if chain.is_empty() {
                return Err(Error::Parse("compose needs at least one map".into()));
            }
            HoloMap::composite(chain)
        }
        _ => Err(Error::Parse(format!("unknown map expression {s:?}"))),
    }
}

/// Print a map in the grammar; inverse of [`parse_map`] on its output.
pub fn print_map(m: &HoloMap) -> String {
    match m {
        HoloMap::Identity => "identity".into(),
        HoloMap::Mobius { mat, model } => {
            let head = match model {
                Model::Disc => "mobius",
                Model::HalfPlane => "mobius_h",
            };
            format!(
                "{head}({},{},{},{})",
                print_complex(mat.a),
                print_complex(mat.b),
                print_complex(mat.c),
                print_complex(mat.d)
            )
        }
        HoloMap::Affine { a, b } => format!("affine({},{})", print_complex(*a), print_complex(*b)),
        HoloMap::Blaschke { factors, rotation } => {
            let items: Vec<String> = factors
                .iter()
                .map(|(z, k)| format!("({},{})", print_complex(z.get()), k))
                .collect();
            format!("blaschke([{}],{})", items.join(","), print_complex(*rotation))
        }
        HoloMap::HalfPlaneExp { offset, frequency } => format!(
            "hpexp({},{})",
            print_complex(offset.get()),
            fmt_f64(*frequency)
        ),
        HoloMap::Composite(chain) => {
            let items: Vec<String> = chain.iter().map(print_map).collect();
            format!("compose({})", items.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) {
        let m = parse_map(s).unwrap();
        let printed = print_map(&m);
        let again = parse_map(&printed).unwrap();
        assert_eq!(
            print_map(&again),
            printed,
            "print-parse-print not stable for {s}"
        );
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("-1.5").unwrap(), Complex64::new(-1.5, 0.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("1+2i").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(
            parse_complex("1.5e-3+2e4i").unwrap(),
            Complex64::new(1.5e-3, 2e4)
        );
        assert!(parse_complex("").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn complex_print_parse_bits() {
        for z in [
            Complex64::new(0.1 + 0.2, -3.75),
            Complex64::new(0.0, 1.0),
            Complex64::new(-2.5, 0.0),
            Complex64::new(1e-300, -1e300),
        ] {
            let back = parse_complex(&print_complex(z)).unwrap();
            assert_eq!(back.re.to_bits(), z.re.to_bits());
            assert_eq!(back.im.to_bits(), z.im.to_bits());
        }
    }

    #[test]
    fn map_roundtrips() {
        roundtrip("identity");
        roundtrip("affine(0.5,0)");
        roundtrip("affine(0.25+0.25i,-0.1i)");
        roundtrip("mobius(3,1,1,3)");
        roundtrip("mobius_h(1,1,0,1)");
        roundtrip("blaschke([(0.3+0.1i,2),(-0.2i,1)],1)");
        roundtrip("hpexp(i,6.283185307179586)");
        roundtrip("compose(affine(0.5,0),blaschke([(0.1,1)],i))");
        roundtrip("rotation(0.7)");
    }

    #[test]
    fn parse_print_is_identity_on_maps() {
        let m = parse_map("mobius(3,1,1,3)").unwrap();
        let again = parse_map(&print_map(&m)).unwrap();
        let (a, b) = match (&m, &again) {
            (HoloMap::Mobius { mat: a, .. }, HoloMap::Mobius { mat: b, .. }) => (*a, *b),
            _ => panic!(),
        };
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_map("mobius(1,2,3)").is_err());
        assert!(parse_map("unknown(1)").is_err());
        assert!(parse_map("affine(0.9,0.9)").is_err()); // not a self-map
        assert!(parse_map("mobius(1,2,0.5,1)").is_err()); // escapes the disc
        assert!(parse_map("compose()").is_err());
    }
}
