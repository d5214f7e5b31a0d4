//! Marked metric graphs and their translation length functions.
//!
//! A [`MarkedMetricGraph`] is a connected graph with positive rational edge
//! lengths and a marking sending each basis letter to an edge loop at the
//! base. The translation length of `g` is the length of the cyclically
//! reduced loop freely homotopic to the image of `g`.
//!
//! Tree file format:
//!
//! ```text
//! rank 2
//! vertices 1
//! base 0
//! edge e1 0 0 1
//! edge e2 0 0 3/2
//! marking x1 = e1 e2
//! marking x2 = e1
//! ```
//!
//! Identity-marked roses may be written `rose 1 3/2` instead (the `rank`
//! line is optional there).

use std::fmt;

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::stallings::{fold, Index};
use crate::text;
use crate::words::{Basis, Endomorphism, Letter, Word};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedMetricGraph {
    basis: Basis,
    graph: TopGraph,
    lengths: Vec<Rational>,
    marking: Vec<Vec<Letter>>,
}

impl MarkedMetricGraph {
    pub fn new(basis: Basis, graph: TopGraph, lengths: Vec<Rational>, marking: Vec<Vec<Letter>>) -> Result<Self> {
        if lengths.len() != graph.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "{} lengths for {} edges",
                lengths.len(),
                graph.edge_count()
            )));
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::NonPositiveLength);
        }
        if marking.len() != basis.rank() {
            return Err(Error::InvalidMarking(format!(
                "{} loops for rank {}",
                marking.len(),
                basis.rank()
            )));
        }
        if graph.rank() != basis.rank() {
            return Err(Error::InvalidMarking(format!(
                "graph has rank {}, basis has rank {}",
                graph.rank(),
                basis.rank()
            )));
        }
        let marking: Vec<Vec<Letter>> = marking.into_iter().map(TopGraph::reduce_path).collect();
        let coordinates = graph.chord_words(&marking)?;
        let chord_basis = coordinates[0].basis();
        if fold(&coordinates, chord_basis).index() != Index::Finite(1) {
            return Err(Error::InvalidMarking("marking loops do not generate the fundamental group".into()));
        }
        Ok(MarkedMetricGraph {
            basis,
            graph,
            lengths,
            marking,
        })
    }

    /// The rose with identity marking: edge `e_k` is `x_k`.
    pub fn rose(basis: Basis, lengths: Vec<Rational>) -> Result<Self> {
        MarkedMetricGraph::marked_rose(&Endomorphism::identity(basis), lengths)
    }

    /// The rose whose marking sends `x_k` to the loop spelling `phi(x_k)`.
    pub fn marked_rose(phi: &Endomorphism, lengths: Vec<Rational>) -> Result<Self> {
        let basis = phi.basis();
        if lengths.len() != basis.rank() {
            return Err(Error::InvalidArgument(format!(
                "{} lengths for rank {}",
                lengths.len(),
                basis.rank()
            )));
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::NonPositiveLength);
        }
        if fold(phi.images(), basis).index() != Index::Finite(1) {
            return Err(Error::NotAutomorphism);
        }
        Ok(MarkedMetricGraph {
            basis,
            graph: TopGraph::rose(basis.rank()),
            lengths,
            marking: phi.images().iter().map(|w| w.letters().to_vec()).collect(),
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn graph(&self) -> &TopGraph {
        &self.graph
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn marking(&self) -> &[Vec<Letter>] {
        &self.marking
    }

    pub fn max_length(&self) -> &Rational {
        self.lengths.iter().max().expect("rank is positive")
    }

    /// For a rose whose edges are the basis letters, the marking as an
    /// automorphism.
    pub fn rose_marking(&self) -> Option<Endomorphism> {
        if !self.graph.is_rose() {
            return None;
        }
        let images = self
            .marking
            .iter()
            .map(|p| Word::new(p.iter().copied(), self.basis))
            .collect();
        Endomorphism::new(images).ok()
    }

    /// Homothety by `c > 0`.
    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::NonPositiveLength);
        }
        Ok(MarkedMetricGraph {
            lengths: self.lengths.iter().map(|l| l * c).collect(),
            ..self.clone()
        })
    }

    /// The reduced edge path of the marked image of `g` (not cyclically reduced).
    pub fn image_path(&self, g: &Word) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        let mut push = |x: Letter| {
            if out.last() == Some(&x.inverse()) {
                out.pop();
            } else {
                out.push(x);
            }
        };
        for &l in g.letters() {
            let img = &self.marking[l.generator()];
            if l.is_inverse() {
                img.iter().rev().for_each(|&x| push(x.inverse()));
            } else {
                img.iter().for_each(|&x| push(x));
            }
        }
        out
    }

    /// Weighted length of an edge path.
    pub fn path_length(&self, path: &[Letter]) -> Rational {
        let mut counts = vec![0u64; self.lengths.len()];
        for l in path {
            counts[l.generator()] += 1;
        }
        self.weigh(&counts)
    }

    fn weigh(&self, counts: &[u64]) -> Rational {
        counts
            .iter()
            .zip(&self.lengths)
            .filter(|(&c, _)| c > 0)
            .fold(Rational::zero(), |acc, (&c, l)| acc + l * Rational::from_integer(BigInt::from(c)))
    }

    /// `‖g‖_T`; zero exactly for the trivial element.
    pub fn translation_length(&self, g: &Word) -> Rational {
        let path = self.image_path(g);
        let (lo, hi) = crate::words::cyclic_core(&path);
        self.path_length(&path[lo..hi])
    }

    pub fn parse(text_in: &str) -> Result<Self> {
        let mut rank = None;
        let mut vertices = None;
        let mut base = None;
        let mut edges: Vec<(String, usize, usize)> = Vec::new();
        let mut lengths = Vec::new();
        let mut marking_lines: Vec<(usize, usize, String)> = Vec::new();
        let mut rose: Option<Vec<Rational>> = None;
        for line in text::lines(text_in) {
            match line.tokens[0] {
                "rank" => rank = Some(text::number::<usize>(line.number, line.tokens.get(1), "rank")?),
                "vertices" => vertices = Some(text::number::<usize>(line.number, line.tokens.get(1), "vertex count")?),
                "base" => base = Some(text::number::<usize>(line.number, line.tokens.get(1), "base")?),
                "edge" => {
                    if line.tokens.len() != 5 {
                        return Err(Error::parse(line.number, "expected `edge <name> <src> <dst> <length>`"));
                    }
                    let s = text::number(line.number, line.tokens.get(2), "edge source")?;
                    let t = text::number(line.number, line.tokens.get(3), "edge target")?;
                    let l = text::parse_rational(line.tokens[4])
                        .ok_or_else(|| Error::parse(line.number, "invalid edge length"))?;
                    edges.push((line.tokens[1].to_string(), s, t));
                    lengths.push(l);
                }
                "marking" => {
                    let (lhs, rhs) = text::assignment(&line)?;
                    let k = text::generator_name(line.number, lhs)?;
                    marking_lines.push((line.number, k, rhs.to_string()));
                }
                "rose" => {
                    let ls = line.tokens[1..]
                        .iter()
                        .map(|t| text::parse_rational(t).ok_or_else(|| Error::parse(line.number, "invalid length")))
                        .collect::<Result<Vec<_>>>()?;
                    rose = Some(ls);
                }
                other => return Err(Error::parse(line.number, format!("unknown keyword {other:?}"))),
            }
        }
        if let Some(ls) = rose {
            if !edges.is_empty() || !marking_lines.is_empty() {
                return Err(Error::parse(0, "`rose` cannot be combined with edge or marking lines"));
            }
            let basis = Basis::new(ls.len())?;
            if rank.is_some_and(|r| r != ls.len()) {
                return Err(Error::parse(0, "rank does not match the number of rose lengths"));
            }
            return MarkedMetricGraph::rose(basis, ls);
        }
        let rank = rank.ok_or_else(|| Error::parse(0, "missing rank line"))?;
        let basis = Basis::new(rank)?;
        let vertices = vertices.ok_or_else(|| Error::parse(0, "missing vertices line"))?;
        let base = base.ok_or_else(|| Error::parse(0, "missing base line"))?;
        let graph = TopGraph::new(vertices, base, edges)?;
        let mut marking = vec![None; rank];
        for (n, k, rhs) in marking_lines {
            if k >= rank {
                return Err(Error::parse(n, "marking for a letter outside the rank"));
            }
            let path = graph.parse_path(&rhs).map_err(|e| Error::parse(n, e.to_string()))?;
            marking[k] = Some(path);
        }
        let marking = marking
            .into_iter()
            .enumerate()
            .map(|(k, m)| m.ok_or_else(|| Error::InvalidMarking(format!("no marking for {}", basis.letter_name(k)))))
            .collect::<Result<Vec<_>>>()?;
        MarkedMetricGraph::new(basis, graph, lengths, marking)
    }

    /// `rose:1,2` or `rose:1/2,3` shorthand used on command lines.
    pub fn parse_rose_spec(spec: &str) -> Result<Self> {
        let body = spec
            .strip_prefix("rose:")
            .ok_or_else(|| Error::InvalidArgument(format!("expected rose:<l1>,<l2>,..., found {spec:?}")))?;
        let lengths = body
            .split(',')
            .map(|t| text::parse_rational(t).ok_or_else(|| Error::InvalidArgument(format!("invalid length {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        MarkedMetricGraph::rose(Basis::new(lengths.len())?, lengths)
    }

    fn is_identity_rose(&self) -> bool {
        self.graph == TopGraph::rose(self.basis.rank())
            && self
                .marking
                .iter()
                .enumerate()
                .all(|(k, p)| p.as_slice() == [Letter::new(k, false)])
    }
}

impl fmt::Display for MarkedMetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.basis.rank())?;
        if self.is_identity_rose() {
            let ls: Vec<String> = self.lengths.iter().map(text::format_rational).collect();
            return writeln!(f, "rose {}", ls.join(" "));
        }
        writeln!(f, "vertices {}", self.graph.vertex_count())?;
        writeln!(f, "base {}", self.graph.base())?;
        for (e, l) in self.lengths.iter().enumerate() {
            let (s, t) = self.graph.ends(e);
            writeln!(f, "edge {} {s} {t} {}", self.graph.name(e), text::format_rational(l))?;
        }
        for (k, p) in self.marking.iter().enumerate() {
            writeln!(f, "marking {} = {}", self.basis.letter_name(k), self.graph.format_path(p))?;
        }
        Ok(())
    }
}

/// True when `‖g‖` differs by at most `tol` between the two trees on all of `sigma`.
pub fn spectra_agree(t: &MarkedMetricGraph, u: &MarkedMetricGraph, sigma: &[Word], tol: &Rational) -> bool {
    sigma
        .iter()
        .all(|g| (t.translation_length(g) - u.translation_length(g)).abs() <= *tol)
}

/// Decimal rendering with 12 significant digits, rounded half away from zero.
pub fn decimal(x: &Rational) -> String {
    const DIGITS: i64 = 12;
    if x.is_zero() {
        return format!("0.{}", "0".repeat(DIGITS as usize - 1));
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    let ten = Rational::from_integer(BigInt::from(10));
    // Exponent e with 10^e <= a < 10^(e+1).
    let mut e: i64 = (a.numer().bits() as i64 - a.denom().bits() as i64) * 3 / 10;
    let pow10 = |k: i64| -> Rational {
        let p = num::pow(ten.clone(), k.unsigned_abs() as usize);
        if k >= 0 {
            p
        } else {
            p.recip()
        }
    };
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let round = |v: Rational| -> BigInt {
        let twice = v * Rational::from_integer(BigInt::from(2)) + Rational::one();
        (twice / Rational::from_integer(BigInt::from(2))).floor().to_integer()
    };
    let mut digits = round(&a * pow10(DIGITS - 1 - e));
    if digits >= num::pow(BigInt::from(10), DIGITS as usize) {
        e += 1;
        digits = round(&a * pow10(DIGITS - 1 - e));
    }
    let d = digits.to_string();
    let body = if e >= DIGITS - 1 {
        format!("{d}{}", "0".repeat((e - (DIGITS - 1)) as usize))
    } else if e >= 0 {
        let split = (e + 1) as usize;
        format!("{}.{}", &d[..split], &d[split..])
    } else {
        format!("0.{}{d}", "0".repeat((-e - 1) as usize))
    };
    format!("{sign}{body}")
}

/// Nearest `f64`, for summaries only.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, b2()).unwrap()
    }

    fn q(s: &str) -> Rational {
        text::parse_rational(s).unwrap()
    }

    fn rose(ls: &[&str]) -> MarkedMetricGraph {
        MarkedMetricGraph::rose(Basis::new(ls.len()).unwrap(), ls.iter().map(|l| q(l)).collect()).unwrap()
    }

    #[test]
    fn translation_length_examples() {
        let t = rose(&["1", "2"]);
        assert_eq!(t.translation_length(&w("ab")), q("3"));
        assert_eq!(t.translation_length(&w("abA")), q("2"));
        assert_eq!(t.translation_length(&w("1")), q("0"));
        let phi = Endomorphism::parse(&["ab", "a"]).unwrap();
        let m = MarkedMetricGraph::marked_rose(&phi, vec![q("1"), q("1")]).unwrap();
        assert_eq!(m.translation_length(&w("b")), q("1"));
        assert_eq!(m.translation_length(&w("a")), q("2"));
    }

    #[test]
    fn spectra_agree_examples() {
        let (t, u) = (rose(&["1", "1"]), rose(&["1", "2"]));
        assert!(spectra_agree(&t, &t, &[w("ab"), w("aBBa")], &q("0")));
        assert!(!spectra_agree(&t, &u, &[w("b")], &q("0")));
        assert!(spectra_agree(&t, &u, &[w("a")], &q("0")));
        assert!(spectra_agree(&t, &u, &[w("b")], &q("1")));
    }

    #[test]
    fn scale_is_linear() {
        let phi = Endomorphism::parse(&["aB", "b"]).unwrap();
        let t = MarkedMetricGraph::marked_rose(&phi, vec![q("3/10"), q("7")]).unwrap();
        let c = q("5/3");
        let s = t.scale(&c).unwrap();
        for g in ["a", "ab", "abAB"] {
            assert_eq!(s.translation_length(&w(g)), &c * t.translation_length(&w(g)));
        }
        assert_eq!(t.scale(&q("0")), Err(Error::NonPositiveLength));
        let id = Endomorphism::identity(b2());
        assert_eq!(
            MarkedMetricGraph::marked_rose(&id, vec![q("2"), q("2")]).unwrap(),
            rose(&["1", "1"]).scale(&q("2")).unwrap()
        );
    }

    #[test]
    fn constructor_errors() {
        let bad = Endomorphism::parse(&["a", "a"]).unwrap();
        assert_eq!(
            MarkedMetricGraph::marked_rose(&bad, vec![q("1"), q("1")]),
            Err(Error::NotAutomorphism)
        );
        assert_eq!(
            MarkedMetricGraph::rose(b2(), vec![q("1"), q("0")]),
            Err(Error::NonPositiveLength)
        );
    }

    #[test]
    fn theta_graph_marking() {
        let text = "rank 2\nvertices 2\nbase 0\nedge p 0 1 1\nedge q 0 1 2\nedge s 1 0 1/2\n\
                    marking x1 = p -q\nmarking x2 = p s\n";
        let t = MarkedMetricGraph::parse(text).unwrap();
        assert_eq!(t.translation_length(&w("a")), q("3"));
        assert_eq!(t.translation_length(&w("b")), q("3/2"));
        // ab = p -q p s ; cyclically reduced already.
        assert_eq!(t.translation_length(&w("ab")), q("9/2"));
        assert_eq!(t.translation_length(&w("bAB")), q("3"));
        assert_eq!(MarkedMetricGraph::parse(&t.to_string()).unwrap(), t);

        let not_generating = text.replace("marking x2 = p s", "marking x2 = p -q p -q");
        assert!(matches!(MarkedMetricGraph::parse(&not_generating), Err(Error::InvalidMarking(_))));
        let open = text.replace("marking x2 = p s", "marking x2 = p");
        assert!(matches!(MarkedMetricGraph::parse(&open), Err(Error::InvalidMarking(_))));
    }

    #[test]
    fn rose_file_forms() {
        let t = MarkedMetricGraph::parse("rose 1 3/2\n").unwrap();
        assert_eq!(t, rose(&["1", "3/2"]));
        assert_eq!(t.to_string(), "rank 2\nrose 1 3/2\n");
        assert_eq!(MarkedMetricGraph::parse(&t.to_string()).unwrap(), t);
        assert_eq!(MarkedMetricGraph::parse_rose_spec("rose:1,0.5").unwrap(), rose(&["1", "1/2"]));
        let phi = Endomorphism::parse(&["ab", "a"]).unwrap();
        let m = MarkedMetricGraph::marked_rose(&phi, vec![q("1"), q("2")]).unwrap();
        assert!(m.to_string().contains("marking x1 = e1 e2"));
        assert_eq!(MarkedMetricGraph::parse(&m.to_string()).unwrap(), m);
        assert_eq!(m.rose_marking().unwrap(), phi);
    }

    #[test]
    fn decimal_examples() {
        assert_eq!(decimal(&q("1/10")), "0.100000000000");
        assert_eq!(decimal(&q("0")), "0.00000000000");
        assert_eq!(decimal(&q("2/3")), "0.666666666667");
        assert_eq!(decimal(&q("-1/3")), "-0.333333333333");
        assert_eq!(decimal(&q("44")), "44.0000000000");
        assert_eq!(decimal(&q("123456789012345")), "123456789012000");
        assert_eq!(decimal(&q("1/400")), "0.00250000000000");
        assert_eq!(decimal(&q("9.9999999999999")), "10.0000000000");
    }
}
