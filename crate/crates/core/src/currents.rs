//! Cylinder frequencies of counting currents.
//!
//! For a nonempty cyclic word `g` and a window `L`, the frequency vector
//! holds `n_g(v±) / ‖g‖` for every class `{v, v⁻¹}` of reduced words with
//! `1 ≤ |v| ≤ L`, keyed by the shortlex-least of `v` and `v⁻¹`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num::{BigInt, Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::{decimal, MarkedMetricGraph};
use crate::words::{reduced_words, Basis, CyclicWord, Letter, Word};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    basis: Basis,
    window: usize,
    source_length: usize,
    table: BTreeMap<Word, Rational>,
}

/// Shortlex-least of `v` and `v⁻¹`.
pub fn class_representative(v: &Word) -> Word {
    let inv = v.inverse();
    if inv < *v {
        inv
    } else {
        v.clone()
    }
}

/// Cylinder classes with `1 ≤ |v| ≤ window`, in shortlex order.
pub fn cylinder_classes(basis: Basis, window: usize) -> Vec<Word> {
    (1..=window)
        .flat_map(|len| reduced_words(basis, len))
        .filter(|v| class_representative(v) == *v)
        .collect()
}

impl FrequencyVector {
    /// Counts are taken by one scan over the cyclic positions of `g`.
    pub fn new(g: &CyclicWord, window: usize) -> Result<FrequencyVector> {
        if g.is_empty() {
            return Err(Error::EmptyWord);
        }
        if window == 0 {
            return Err(Error::InvalidArgument("window must be positive".into()));
        }
        let basis = g.basis();
        let n = g.len();
        let mut counts: HashMap<Vec<Letter>, usize> = HashMap::new();
        let mut buf = Vec::with_capacity(window);
        for p in 0..n {
            buf.clear();
            for len in 1..=window {
                buf.push(g.at(p + len - 1));
                let inv: Vec<Letter> = buf.iter().rev().map(|l| l.inverse()).collect();
                let key = if inv < buf {
                    inv
                } else {
                    buf.clone()
                };
                *counts.entry(key).or_default() += 1;
            }
        }
        let denom = BigInt::from(n);
        let table = cylinder_classes(basis, window)
            .into_iter()
            .map(|v| {
                let c = counts.get(v.letters()).copied().unwrap_or(0);
                (v, Rational::new(BigInt::from(c), denom.clone()))
            })
            .collect();
        Ok(FrequencyVector {
            basis,
            window,
            source_length: n,
            table,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `‖g‖` of the word the vector was built from.
    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn table(&self) -> &BTreeMap<Word, Rational> {
        &self.table
    }

    /// Value on the class of `v` (either orientation); zero outside the window.
    pub fn get(&self, v: &Word) -> Rational {
        self.table
            .get(&class_representative(v))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `cylinder, value_num, value_den, value_decimal` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cylinder, value_num, value_den, value_decimal\n");
        for (v, x) in &self.table {
            let _ = writeln!(out, "{v}, {}, {}, {}", x.numer(), x.denom(), decimal(x));
        }
        out
    }
}

/// Sup over cylinders of the absolute difference.
pub fn current_distance(u: &FrequencyVector, w: &FrequencyVector) -> Result<Rational> {
    if u.basis != w.basis || u.window != w.window {
        return Err(Error::WindowMismatch);
    }
    Ok(u.table
        .iter()
        .map(|(v, x)| (x - &w.table[v]).abs())
        .max()
        .unwrap_or_else(Rational::zero))
}

/// `⟨T, η_g⟩ = ‖g‖_T`.
pub fn pair_with_tree(t: &MarkedMetricGraph, g: &Word) -> Rational {
    t.translation_length(g)
}
