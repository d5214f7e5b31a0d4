//! Words in a free group of finite rank.
//!
//! Letters are signed generator indices. Every [`Word`] is freely reduced and
//! every [`CyclicWord`] is cyclically reduced; constructors reduce eagerly.
//!
//! Text syntax: `a, b, c, ...` are the generators `x1, x2, x3, ...`, the
//! uppercase letters are their inverses, and the empty word is written `1`.

use std::cmp::Ordering;
use std::fmt;
use std::num::NonZeroI32;

use crate::error::{Error, Result};

/// Maximum rank expressible in the single-letter text syntax.
pub const MAX_TEXT_RANK: usize = 26;

/// A generator or the inverse of a generator.
///
/// Letters are ordered `a < A < b < B < ...`; this is the order used for
/// every shortlex comparison in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter(NonZeroI32);

impl Letter {
    /// `generator` is zero-based.
    pub fn new(generator: usize, inverse: bool) -> Letter {
        let k = generator as i32 + 1;
        let signed = if inverse { -k } else { k };
        Letter(NonZeroI32::new(signed).expect("nonzero by construction"))
    }

    pub fn from_signed(signed: i32) -> Option<Letter> {
        NonZeroI32::new(signed).map(Letter)
    }

    pub fn signed(self) -> i32 {
        self.0.get()
    }

    pub fn generator(self) -> usize {
        (self.0.get().unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0.get() < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position of the letter in `a, A, b, B, ...`; handy as a table slot.
    pub fn slot(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }

    pub fn from_slot(slot: usize) -> Letter {
        Letter::new(slot / 2, slot % 2 == 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new((c as u8 - b'a') as usize, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new((c as u8 - b'A') as usize, true))
        } else {
            None
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.slot().cmp(&other.slot())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A free basis `x1, ..., xN`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Basis {
    rank: usize,
}

impl Basis {
    pub fn new(rank: usize) -> Result<Basis> {
        if rank == 0 {
            return Err(Error::InvalidRank(rank));
        }
        Ok(Basis { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    pub fn letter_name(self, generator: usize) -> String {
        format!("x{}", generator + 1)
    }

    /// Every letter and inverse letter, in letter order.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        (0..2 * self.rank).map(Letter::from_slot)
    }

    pub fn generators(self) -> impl Iterator<Item = Letter> {
        (0..self.rank).map(|g| Letter::new(g, false))
    }

    pub fn check(self, letter: Letter) -> Result<Letter> {
        if letter.generator() < self.rank {
            Ok(letter)
        } else {
            Err(Error::UnknownLetter(letter.signed().to_string(), self.rank))
        }
    }

    /// Smallest basis that can spell every letter of `text`.
    pub fn for_text(text: &str) -> Result<Basis> {
        let rank = text
            .chars()
            .filter_map(Letter::from_char)
            .map(|l| l.generator() + 1)
            .max()
            .unwrap_or(1);
        Basis::new(rank)
    }
}

/// Freely reduces a letter sequence with a single stack pass.
pub fn free_reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// For a freely reduced sequence, the range of its cyclically reduced core.
pub fn cyclic_core(letters: &[Letter]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, letters.len());
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    (lo, hi)
}

/// True when no two adjacent letters cancel.
pub fn is_reduced(letters: &[Letter]) -> bool {
    letters.windows(2).all(|w| w[0] != w[1].inverse())
}

/// True when reduced and the first letter does not cancel the last.
pub fn is_cyclically_reduced(letters: &[Letter]) -> bool {
    is_reduced(letters)
        && match (letters.first(), letters.last()) {
            (Some(&f), Some(&l)) => letters.len() == 1 || f != l.inverse(),
            _ => true,
        }
}

fn parse_letters(text: &str, basis: Basis) -> Result<Vec<Letter>> {
    let text = text.trim();
    if text == "1" || text.is_empty() {
        return Ok(Vec::new());
    }
    text.chars()
        .map(|c| {
            let letter = Letter::from_char(c).ok_or_else(|| Error::UnknownLetter(c.to_string(), basis.rank()))?;
            if letter.generator() < basis.rank() {
                Ok(letter)
            } else {
                Err(Error::UnknownLetter(c.to_string(), basis.rank()))
            }
        })
        .collect()
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[Letter]) -> fmt::Result {
    if letters.is_empty() {
        return f.write_str("1");
    }
    for l in letters {
        write!(f, "{}", l.to_char())?;
    }
    Ok(())
}

fn shortlex(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A freely reduced word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    basis: Basis,
    letters: Vec<Letter>,
}

/// Reduces a raw signed-index sequence (`k` is `x_k`, `-k` its inverse).
pub fn reduce(raw: &[i32], basis: Basis) -> Result<Word> {
    let letters = raw
        .iter()
        .map(|&s| {
            Letter::from_signed(s)
                .ok_or_else(|| Error::UnknownLetter(s.to_string(), basis.rank()))
                .and_then(|l| basis.check(l))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Word::new(letters, basis))
}

impl Word {
    /// Reduces `letters`. Letters must belong to `basis`.
    pub fn new(letters: impl IntoIterator<Item = Letter>, basis: Basis) -> Word {
        let letters = free_reduce(letters);
        debug_assert!(letters.iter().all(|l| l.generator() < basis.rank()));
        Word { basis, letters }
    }

    pub fn identity(basis: Basis) -> Word {
        Word {
            basis,
            letters: Vec::new(),
        }
    }

    pub fn letter(letter: Letter, basis: Basis) -> Word {
        Word {
            basis,
            letters: vec![letter],
        }
    }

    pub fn parse(text: &str, basis: Basis) -> Result<Word> {
        Ok(Word::new(parse_letters(text, basis)?, basis))
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            basis: self.basis,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.basis, other.basis, "words over different bases");
        Word::new(self.letters.iter().chain(other.letters.iter()).copied(), self.basis)
    }

    /// `by · self · by⁻¹`.
    pub fn conjugate(&self, by: &Word) -> Word {
        by.mul(self).mul(&by.inverse())
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let (c, conj) = base.cyclic_reduce();
        let mut core = Vec::with_capacity(c.len() * exponent.unsigned_abs() as usize);
        for _ in 0..exponent.unsigned_abs() {
            core.extend_from_slice(c.letters());
        }
        let core = Word {
            basis: self.basis,
            letters: core,
        };
        core.conjugate(&conj)
    }

    /// Splits into a cyclically reduced core and a conjugator with
    /// `self = conjugator · core · conjugator⁻¹`.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let (lo, hi) = cyclic_core(&self.letters);
        (
            CyclicWord {
                basis: self.basis,
                letters: self.letters[lo..hi].to_vec(),
            },
            Word {
                basis: self.basis,
                letters: self.letters[..lo].to_vec(),
            },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        is_cyclically_reduced(&self.letters)
    }

    /// True when `v` occurs as a contiguous subword.
    pub fn contains(&self, v: &Word) -> bool {
        v.is_empty() || self.letters.windows(v.len()).any(|w| w == v.letters())
    }

    /// Number of occurrences of `letter` or its inverse.
    pub fn count_generator(&self, generator: usize) -> usize {
        self.letters.iter().filter(|l| l.generator() == generator).count()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex(&self.letters, &other.letters)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

/// A cyclically reduced word, read around a circle.
///
/// The stored rotation is whatever the constructor was given; use
/// [`CyclicWord::same_cycle`] to compare up to rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    basis: Basis,
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// Cyclically reduces `letters` (after free reduction).
    pub fn new(letters: impl IntoIterator<Item = Letter>, basis: Basis) -> CyclicWord {
        Word::new(letters, basis).cyclic_reduce().0
    }

    pub fn parse(text: &str, basis: Basis) -> Result<CyclicWord> {
        Ok(Word::parse(text, basis)?.cyclic_reduce().0)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word {
            basis: self.basis,
            letters: self.letters.clone(),
        }
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord {
            basis: self.basis,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, exponent: usize) -> CyclicWord {
        let mut letters = Vec::with_capacity(self.len() * exponent);
        for _ in 0..exponent {
            letters.extend_from_slice(&self.letters);
        }
        CyclicWord {
            basis: self.basis,
            letters,
        }
    }

    /// Letter at cyclic position `i` (any `i`).
    pub fn at(&self, i: usize) -> Letter {
        self.letters[i % self.letters.len()]
    }

    /// True when `other` is a rotation of `self`.
    pub fn same_cycle(&self, other: &CyclicWord) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        (0..self.len()).any(|r| (0..self.len()).all(|i| self.at(r + i) == other.letters[i]))
    }

    /// True when `v` can be read starting at cyclic position `start`.
    pub fn reads_at(&self, start: usize, v: &[Letter]) -> bool {
        v.iter().enumerate().all(|(i, &l)| self.at(start + i) == l)
    }

    /// Decomposes as `root^exponent` with `exponent` maximal.
    pub fn is_proper_power(&self) -> Result<(CyclicWord, usize)> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
            if (d..n).all(|i| self.letters[i] == self.letters[i - d]) {
                let root = CyclicWord {
                    basis: self.basis,
                    letters: self.letters[..d].to_vec(),
                };
                return Ok((root, n / d));
            }
        }
        unreachable!("d = n always divides")
    }

    /// `n_g(v±)`: cyclic positions at which `v` or `v⁻¹` can be read.
    ///
    /// Reading may wind around the circle. For a proper power `h^k` the
    /// count is `k · n_h(v±)`.
    pub fn count_occurrences(&self, v: &Word) -> Result<usize> {
        if v.is_empty() {
            return Err(Error::EmptyWord);
        }
        if self.is_empty() {
            return Ok(0);
        }
        let (root, k) = self.is_proper_power()?;
        let inv = v.inverse();
        let per_root = (0..root.len())
            .filter(|&p| root.reads_at(p, v.letters()) || root.reads_at(p, inv.letters()))
            .count();
        Ok(k * per_root)
    }

    /// Largest `|k|` such that `z^k` is a subword of the cyclic word, with
    /// wrap-around runs counted once and `k·|z| ≤ |self|`.
    pub fn max_power_run(&self, z: &CyclicWord) -> usize {
        let (n, m) = (self.len(), z.len());
        if m == 0 || n < m {
            return 0;
        }
        let cap = n / m;
        let mut best = 0;
        for pattern in [z.letters.clone(), z.inverse().letters] {
            for start in 0..n {
                let mut k = 0;
                while k < cap && self.reads_at(start + k * m, &pattern) {
                    k += 1;
                }
                best = best.max(k);
                if best == cap {
                    return best;
                }
            }
        }
        best
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

/// An endomorphism of the free group, given by the images of the basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Endomorphism {
    basis: Basis,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(images: Vec<Word>) -> Result<Endomorphism> {
        let basis = images.first().ok_or(Error::InvalidRank(0))?.basis();
        if basis.rank() != images.len() {
            return Err(Error::BasisMismatch(basis.rank(), images.len()));
        }
        if let Some(w) = images.iter().find(|w| w.basis() != basis) {
            return Err(Error::BasisMismatch(basis.rank(), w.basis().rank()));
        }
        Ok(Endomorphism { basis, images })
    }

    /// Parses images such as `["ab", "a"]`.
    pub fn parse(images: &[&str]) -> Result<Endomorphism> {
        let basis = Basis::new(images.len())?;
        Endomorphism::new(images.iter().map(|t| Word::parse(t, basis)).collect::<Result<_>>()?)
    }

    pub fn identity(basis: Basis) -> Endomorphism {
        Endomorphism {
            basis,
            images: basis.generators().map(|l| Word::letter(l, basis)).collect(),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &Word {
        &self.images[generator]
    }

    pub fn apply_letter(&self, letter: Letter) -> Word {
        let w = &self.images[letter.generator()];
        if letter.is_inverse() {
            w.inverse()
        } else {
            w.clone()
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        self.apply_letters(w.letters())
    }

    pub fn apply_letters(&self, letters: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for &l in letters {
            let img = &self.images[l.generator()].letters;
            let push = |out: &mut Vec<Letter>, x: Letter| {
                if out.last() == Some(&x.inverse()) {
                    out.pop();
                } else {
                    out.push(x);
                }
            };
            if l.is_inverse() {
                for &x in img.iter().rev() {
                    push(&mut out, x.inverse());
                }
            } else {
                for &x in img {
                    push(&mut out, x);
                }
            }
        }
        Word {
            basis: self.basis,
            letters: out,
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Endomorphism) -> Endomorphism {
        Endomorphism {
            basis: self.basis,
            images: other.images.iter().map(|w| self.apply(w)).collect(),
        }
    }

    pub fn power(&self, n: usize) -> Endomorphism {
        let mut acc = Endomorphism::identity(self.basis);
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == Endomorphism::identity(self.basis)
    }

    /// Largest image length (the Lipschitz constant on the rose).
    pub fn lipschitz(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Elementary Nielsen moves on the tuple of images.
    pub fn nielsen(&self, mv: NielsenMove) -> Endomorphism {
        let mut images = self.images.clone();
        match mv {
            NielsenMove::Invert(i) => images[i] = images[i].inverse(),
            NielsenMove::Swap(i, j) => images.swap(i, j),
            NielsenMove::MulRight(i, j, inv) => {
                let y = if inv { images[j].inverse() } else { images[j].clone() };
                images[i] = images[i].mul(&y);
            }
            NielsenMove::MulLeft(i, j, inv) => {
                let y = if inv { images[j].inverse() } else { images[j].clone() };
                images[i] = y.mul(&images[i]);
            }
        }
        Endomorphism {
            basis: self.basis,
            images,
        }
    }
}

/// Elementary Nielsen transformation of a basis tuple. `MulRight(i, j, inv)`
/// replaces `y_i` by `y_i · y_j^{±1}` (`i ≠ j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NielsenMove {
    Invert(usize),
    Swap(usize, usize),
    MulRight(usize, usize, bool),
    MulLeft(usize, usize, bool),
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", self.basis.letter_name(i), w)?;
        }
        Ok(())
    }
}

/// All reduced words of length exactly `len`, in shortlex order.
pub fn reduced_words(basis: Basis, len: usize) -> Vec<Word> {
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(layer.len() * (2 * basis.rank()));
        for w in &layer {
            for l in basis.letters() {
                if w.last() != Some(&l.inverse()) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    layer.into_iter().map(|letters| Word { basis, letters }).collect()
}

/// All reduced words of length at most `max_len` (the empty word first), shortlex.
pub fn reduced_words_up_to(basis: Basis, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|n| reduced_words(basis, n)).collect()
}
