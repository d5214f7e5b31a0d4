//! Shared helpers for the line-based file formats.

use crate::error::{Error, Result};

/// A non-blank line with its comment stripped, split on whitespace.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<&'a str>,
    /// The text after the first token, trimmed.
    pub rest: &'a str,
}

pub(crate) fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            return None;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let rest = content[tokens[0].len()..].trim();
        Some(Line {
            number: i + 1,
            tokens,
            rest,
        })
    })
}

/// Comment bodies (text after `#`), with line numbers.
pub(crate) fn comments(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| raw.find('#').map(|p| (i + 1, raw[p + 1..].trim())))
}

pub(crate) fn number<T: std::str::FromStr>(line: usize, token: Option<&&str>, what: &str) -> Result<T> {
    token
        .ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what}")))
}

/// Splits `key = value` after a keyword, e.g. `image x1 = ab`.
pub(crate) fn assignment<'a>(line: &Line<'a>) -> Result<(&'a str, &'a str)> {
    let (lhs, rhs) = line
        .rest
        .split_once('=')
        .ok_or_else(|| Error::parse(line.number, "expected `=`"))?;
    Ok((lhs.trim(), rhs.trim()))
}

/// Parses `x<k>` into a zero-based generator index.
pub(crate) fn generator_name(line: usize, name: &str) -> Result<usize> {
    name.strip_prefix('x')
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .map(|k| k - 1)
        .ok_or_else(|| Error::parse(line, format!("expected x<k>, found {name:?}")))
}

/// Parses `7`, `-3/4` or `0.125` exactly.
pub(crate) fn parse_rational(token: &str) -> Option<crate::Rational> {
    use num::{BigInt, One, Zero};
    let token = token.trim();
    if let Some((n, d)) = token.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| crate::Rational::new(n, d));
    }
    let (negative, digits) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("0{int}{frac}").parse().ok()?;
    let mut denom = BigInt::one();
    for _ in 0..frac.len() {
        denom *= 10;
    }
    let value = crate::Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Writes `p/q`, or just `p` for integers.
pub(crate) fn format_rational(x: &crate::Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
