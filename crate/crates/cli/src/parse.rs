//! String-to-value parsers shared by flags and config values. Grammar:
//! commas separate scalars, semicolons separate rows or components, pipes
//! separate top-level items (matrices in a list, family members).

use anyhow::{bail, Context, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use qrec_core::linalg::IntMat;
use qrec_core::poly::{IntValuedPoly, PolyVec};
use std::str::FromStr;

/// "a/b", a plain integer, or an exact decimal like "0.25".
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).with_context(|| format!("bad numerator in {t:?}"))?;
        let d = BigInt::from_str(den.trim()).with_context(|| format!("bad denominator in {t:?}"))?;
        if d.is_zero() {
            bail!("zero denominator in {t:?}");
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1, b),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    if let Some((int, frac)) = body.split_once('.') {
        let all_digits =
            int.chars().all(|c| c.is_ascii_digit()) && frac.chars().all(|c| c.is_ascii_digit());
        if !all_digits || (int.is_empty() && frac.is_empty()) {
            bail!("bad rational {t:?}");
        }
        let digits = format!("{int}{frac}");
        let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })? * sign;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(BigRational::new(num, den));
    }
    let n = BigInt::from_str(body).with_context(|| format!("bad rational {t:?}"))?;
    Ok(BigRational::from_integer(n * sign))
}

pub fn parse_biguint(s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).with_context(|| format!("bad nonnegative integer {s:?}"))
}

pub fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .with_context(|| format!("bad integer {:?}", t.trim()))
        })
        .collect()
}

pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .with_context(|| format!("bad nonnegative integer {:?}", t.trim()))
        })
        .collect()
}

pub fn parse_bigint_list(s: &str) -> Result<Vec<BigInt>> {
    s.split(',')
        .map(|t| BigInt::from_str(t.trim()).with_context(|| format!("bad integer {:?}", t.trim())))
        .collect()
}

/// Rows separated by ';', entries by ','; must be rectangular.
pub fn parse_matrix(s: &str) -> Result<IntMat> {
    let rows: Vec<Vec<BigInt>> = s.split(';').map(parse_bigint_list).collect::<Result<_>>()?;
    if rows.is_empty() || rows[0].is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        bail!("ragged or empty matrix {s:?}");
    }
    Ok(IntMat::from_rows(rows))
}

pub fn parse_matrices(s: &str) -> Result<Vec<IntMat>> {
    s.split('|').map(parse_matrix).collect()
}

/// Components separated by ';', each a monomial coefficient list c0,c1,...
pub fn parse_polyvec(s: &str) -> Result<PolyVec> {
    let comps: Vec<IntValuedPoly> = s
        .split(';')
        .map(|c| Ok(IntValuedPoly::from_integer_monomial(&parse_bigint_list(c)?)))
        .collect::<Result<_>>()?;
    Ok(PolyVec::new(comps))
}

pub fn parse_polyvecs(s: &str) -> Result<Vec<PolyVec>> {
    s.split('|').map(parse_polyvec).collect()
}

pub fn parse_gens(s: &str) -> Result<Vec<Vec<u64>>> {
    s.split('|').map(parse_u64_list).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational(" -3/9 ").unwrap(), BigRational::new((-1).into(), 3.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-0.1").unwrap(), BigRational::new((-1).into(), 10.into()));
        assert_eq!(parse_rational("7").unwrap(), BigRational::from_integer(7.into()));
        assert_eq!(parse_rational("1.").unwrap(), BigRational::one());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("a").is_err());
    }

    #[test]
    fn matrices_and_polys() {
        let m = parse_matrix("1,1;0,1").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.at(0, 1), &BigInt::one());
        assert!(parse_matrix("1,1;0").is_err());
        assert_eq!(parse_matrices("1,0;0,1|2").unwrap().len(), 2);
        let p = parse_polyvec("0,0,1;0,1").unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.degree(), 2);
        assert_eq!(parse_polyvecs("0,1|0,0,2").unwrap().len(), 2);
    }
}
