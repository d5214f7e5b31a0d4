use std::fmt::Write as _;

use num::{BigInt, Signed};

use crate::currents::{current_distance, FrequencyVector};
use crate::error::{Error, Result};
use crate::metric::{decimal, MarkedMetricGraph};
use crate::stallings::invert;
use crate::text::format_rational;
use crate::words::{is_cyclically_reduced, is_reduced, reduced_words_up_to, CyclicWord, Letter, Word};
use crate::Rational;

/// Connector words are searched up to this length.
pub const CONNECTOR_LENGTH: usize = 2;

/// The words
/// `w_i = α u^i β r β⁻¹ u⁻ⁱ α⁻¹ · γ u^i δ r δ⁻¹ u⁻ⁱ γ⁻¹`,
/// optionally prefixed by a coset tail `g`. Each `w_i` is a product of two
/// conjugates of `r`, and the connectors make every concatenation
/// cyclically reduced as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessFamily {
    u: CyclicWord,
    r: CyclicWord,
    connectors: [Word; 4],
    tail: Option<Word>,
}

fn inverse_letters(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// `x u^i y r y⁻¹ u⁻ⁱ x⁻¹`, concatenated without reduction.
fn block(u: &[Letter], r: &[Letter], x: &[Letter], y: &[Letter], i: usize) -> Vec<Letter> {
    let ui: Vec<Letter> = u.iter().copied().cycle().take(i * u.len()).collect();
    [x, &ui, y, r, &inverse_letters(y), &inverse_letters(&ui), &inverse_letters(x)].concat()
}

fn raw_w(u: &[Letter], r: &[Letter], c: [&[Letter]; 4], tail: Option<&[Letter]>, i: usize) -> Vec<Letter> {
    let [alpha, beta, gamma, delta] = c;
    [tail.unwrap_or(&[]), &block(u, r, alpha, beta, i), &block(u, r, gamma, delta, i)].concat()
}

fn cyclic_parts(u: &Word, r: &Word) -> Result<(CyclicWord, CyclicWord)> {
    if r.is_empty() {
        return Err(Error::TrivialRelator);
    }
    if u.is_empty() {
        return Err(Error::EmptyWord);
    }
    if u.basis() != r.basis() {
        return Err(Error::BasisMismatch(u.basis().rank(), r.basis().rank()));
    }
    Ok((u.cyclic_reduce().0, r.cyclic_reduce().0))
}

impl WitnessFamily {
    /// Uses `[[u]]` and `[[r]]`; fails unless `w_1` is cyclically reduced as written.
    pub fn new(u: &Word, r: &Word, connectors: [Word; 4], tail: Option<Word>) -> Result<WitnessFamily> {
        let (u, r) = cyclic_parts(u, r)?;
        let family = WitnessFamily {
            u,
            r,
            connectors,
            tail,
        };
        if !is_cyclically_reduced(&family.raw(1)) {
            return Err(Error::InvalidConnectors);
        }
        Ok(family)
    }

    /// Shortlex-least connectors `(α, β, γ, δ)` of length at most 2.
    pub fn find(u: &Word, r: &Word) -> Result<WitnessFamily> {
        WitnessFamily::search(u, r, None)
    }

    /// As [`find`](Self::find), with `g · w_i` cyclically reduced as written.
    pub fn find_for_coset(tail: &Word, u: &Word, r: &Word) -> Result<WitnessFamily> {
        WitnessFamily::search(u, r, Some(tail.clone()))
    }

    fn search(u: &Word, r: &Word, tail: Option<Word>) -> Result<WitnessFamily> {
        let (cu, cr) = cyclic_parts(u, r)?;
        let candidates = reduced_words_up_to(u.basis(), CONNECTOR_LENGTH);
        let (ul, rl) = (cu.letters(), cr.letters());
        let t = tail.as_ref().map(Word::letters);
        // Prefix checks prune the tuple search; the order stays lexicographic.
        for alpha in &candidates {
            for beta in &candidates {
                let first = [t.unwrap_or(&[]), &block(ul, rl, alpha.letters(), beta.letters(), 1)].concat();
                if !is_reduced(&first) {
                    continue;
                }
                for gamma in &candidates {
                    for delta in &candidates {
                        let c = [alpha.letters(), beta.letters(), gamma.letters(), delta.letters()];
                        if is_cyclically_reduced(&raw_w(ul, rl, c, t, 1)) {
                            return Ok(WitnessFamily {
                                u: cu,
                                r: cr,
                                connectors: [alpha.clone(), beta.clone(), gamma.clone(), delta.clone()],
                                tail,
                            });
                        }
                    }
                }
            }
        }
        Err(Error::ConnectorSearchExhausted(CONNECTOR_LENGTH))
    }

    pub fn u(&self) -> &CyclicWord {
        &self.u
    }

    pub fn r(&self) -> &CyclicWord {
        &self.r
    }

    /// `(α, β, γ, δ)`.
    pub fn connectors(&self) -> &[Word; 4] {
        &self.connectors
    }

    pub fn tail(&self) -> Option<&Word> {
        self.tail.as_ref()
    }

    fn raw(&self, i: usize) -> Vec<Letter> {
        let c = [0, 1, 2, 3].map(|k| self.connectors[k].letters());
        raw_w(self.u.letters(), self.r.letters(), c, self.tail.as_ref().map(Word::letters), i)
    }

    /// `w_i`, or `[[g · w_i]]` for a coset family.
    pub fn witness(&self, i: usize) -> Result<CyclicWord> {
        if i == 0 {
            return Err(Error::InvalidArgument("witness index starts at 1".into()));
        }
        let raw = self.raw(i);
        if !is_cyclically_reduced(&raw) {
            return Err(Error::InvalidConnectors);
        }
        Ok(CyclicWord::new(raw, self.u.basis()))
    }

    /// `c₀` in `|w_i| = 4i|u| + c₀`.
    pub fn base_length(&self) -> usize {
        let c: usize = self.connectors.iter().map(Word::len).sum();
        2 * c + 2 * self.r.len() + self.tail.as_ref().map_or(0, Word::len)
    }

    /// `(x₁, x₂)` with `w_i = x₁ r x₁⁻¹ · x₂ r x₂⁻¹` (without the tail).
    pub fn conjugators(&self, i: usize) -> (Word, Word) {
        let ui = self.u.to_word().pow(i as i64);
        let [alpha, beta, gamma, delta] = &self.connectors;
        (alpha.mul(&ui).mul(beta), gamma.mul(&ui).mul(delta))
    }

    /// The four pieces `Q_j` between the `u^{±i}` blocks, read cyclically
    /// starting after the first block: `βrβ⁻¹`, `α⁻¹γ`, `δrδ⁻¹`, `γ⁻¹gα`.
    fn pieces(&self) -> [Vec<Letter>; 4] {
        let inv = |w: &Word| w.inverse().letters().to_vec();
        let [alpha, beta, gamma, delta] = &self.connectors;
        let r = self.r.letters();
        let cat = |parts: &[&[Letter]]| parts.concat();
        let tail: &[Letter] = self.tail.as_ref().map_or(&[], Word::letters);
        [
            cat(&[beta.letters(), r, &inv(beta)]),
            cat(&[&inv(alpha), gamma.letters()]),
            cat(&[delta.letters(), r, &inv(delta)]),
            cat(&[&inv(gamma), tail, alpha.letters()]),
        ]
    }

    /// Upper bound on `i · d_i` at window `window`, valid for every `i ≥ 1`.
    ///
    /// Every position of `w_i` whose window lies inside a `u^{±i}` block
    /// reads a window of the cyclic word `u^{±1}`; at most `c₀ + 4(L−1)`
    /// positions do not, and at most `4(L−1)` block positions are lost.
    pub fn distance_bound(&self, window: usize) -> Rational {
        let c0 = self.base_length();
        Rational::new(
            BigInt::from(c0 + 4 * (window - 1)),
            BigInt::from(4 * self.u.len()),
        )
    }

    /// Upper bound on `i · gap_i(T)` for a marked rose `T`, valid for every `i ≥ 1`.
    ///
    /// With `Φ` the marking, `Φ(u) = c Y c⁻¹` and `R_j = [Φ(Q_j)]`, the
    /// cyclic length of `Φ(w_i)` is `4i‖u‖_T + K_i` with
    /// `Σℓ(R_j) − 16·B·ℓ_max ≤ K_i ≤ 8ℓ(c) + Σℓ(R_j)`, where `B` is a
    /// bounded cancellation constant of `Φ`. Returns `None` for other trees.
    pub fn gap_bound(&self, tree: &MarkedMetricGraph) -> Option<Rational> {
        let phi = tree.rose_marking()?;
        let phi_inv = invert(&phi).ok()?;
        let (lip, lip_inv) = (phi.lipschitz(), phi_inv.lipschitz());
        let b = lip / 2 + lip * lip * lip_inv;
        let (y, c) = phi.apply(&self.u.to_word()).cyclic_reduce();
        let len_u_t = tree.path_length(y.letters());
        let len_c = tree.path_length(c.letters());
        let r_sum: Rational = self
            .pieces()
            .iter()
            .map(|q| tree.path_length(phi.apply_letters(q).letters()))
            .sum();
        let scaled = |n: usize, x: &Rational| Rational::from_integer(BigInt::from(n)) * x;
        let lower = &r_sum - scaled(16 * b, tree.max_length());
        let upper = scaled(8, &len_c) + &r_sum;
        let k = lower.abs().max(upper);
        let u_len = self.u.len();
        Some((scaled(u_len, &k) + scaled(self.base_length(), &len_u_t)) / Rational::from_integer(BigInt::from(4 * u_len)))
    }
}

/// One row of a convergence report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub i: usize,
    /// `d_i`: distance between the frequency vectors of `w_i` and `u`.
    pub distance: Rational,
    /// `λ_i = ‖u‖ / ‖w_i‖`.
    pub lambda: Rational,
    /// `|λ_i ‖w_i‖_T − ‖u‖_T|`, one per tree.
    pub gaps: Vec<Rational>,
}

pub fn convergence_row(
    family: &WitnessFamily,
    window: usize,
    i: usize,
    trees: &[MarkedMetricGraph],
) -> Result<ConvergenceRow> {
    let u = family.u();
    let nu_u = FrequencyVector::new(u, window)?;
    let w = family.witness(i)?;
    let distance = current_distance(&FrequencyVector::new(&w, window)?, &nu_u)?;
    let lambda = Rational::new(BigInt::from(u.len()), BigInt::from(w.len()));
    let (u_word, w_word) = (u.to_word(), w.to_word());
    let gaps = trees
        .iter()
        .map(|t| {
            if t.basis() != u.basis() {
                return Err(Error::BasisMismatch(u.basis().rank(), t.basis().rank()));
            }
            Ok((&lambda * t.translation_length(&w_word) - t.translation_length(&u_word)).abs())
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceRow {
        i,
        distance,
        lambda,
        gaps,
    })
}

pub fn convergence_report(
    family: &WitnessFamily,
    window: usize,
    indices: &[usize],
    trees: &[MarkedMetricGraph],
) -> Result<Vec<ConvergenceRow>> {
    if trees.is_empty() {
        return Err(Error::InvalidArgument("at least one tree is required".into()));
    }
    indices.iter().map(|&i| convergence_row(family, window, i, trees)).collect()
}

/// CSV with header `i, d_i_num, d_i_den, lambda_i, tree_id, gap_i`; one
/// line per row and tree.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("i, d_i_num, d_i_den, lambda_i, tree_id, gap_i\n");
    for row in rows {
        for (t, gap) in row.gaps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}, {}, {}, {}, {t}, {}",
                row.i,
                row.distance.numer(),
                row.distance.denom(),
                format_rational(&row.lambda),
                decimal(gap)
            );
        }
    }
    out
}

/// Outcome of a distinguisher search.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Distinction {
    Found {
        family: WitnessFamily,
        i: usize,
        witness: CyclicWord,
        lengths: (Rational, Rational),
    },
    /// No `u` of length at most `u_search_length` (or no `i ≤ i_max`)
    /// separated the trees.
    AgreeUpTo { u_search_length: usize, i_max: usize },
}

/// An element of the normal closure of `r` with different translation
/// lengths in the two trees.
pub fn rigidity_distinguisher(
    t: &MarkedMetricGraph,
    t2: &MarkedMetricGraph,
    r: &Word,
    i_max: usize,
    u_search_length: usize,
) -> Result<Distinction> {
    if r.is_empty() {
        return Err(Error::TrivialRelator);
    }
    let basis = r.basis();
    for tree in [t, t2] {
        if tree.basis() != basis {
            return Err(Error::BasisMismatch(basis.rank(), tree.basis().rank()));
        }
    }
    let u = reduced_words_up_to(basis, u_search_length)
        .into_iter()
        .filter(|u| !u.is_empty() && u.is_cyclically_reduced())
        .find(|u| t.translation_length(u) != t2.translation_length(u));
    let agree = Distinction::AgreeUpTo { u_search_length, i_max };
    let Some(u) = u else { return Ok(agree) };
    let family = WitnessFamily::find(&u, r)?;
    for i in 1..=i_max {
        let witness = family.witness(i)?;
        let w = witness.to_word();
        let (a, b) = (t.translation_length(&w), t2.translation_length(&w));
        if a != b {
            return Ok(Distinction::Found {
                family,
                i,
                witness,
                lengths: (a, b),
            });
        }
    }
    Ok(agree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Basis;

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, b2()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn names(f: &WitnessFamily) -> Vec<String> {
        f.connectors().iter().map(Word::to_string).collect()
    }

    #[test]
    fn connector_examples() {
        let f = WitnessFamily::find(&w("a"), &w("b")).unwrap();
        assert_eq!(names(&f), ["1", "1", "b", "1"]);
        assert_eq!(f.witness(1).unwrap().to_string(), "abAbabAB");
        assert_eq!(f.witness(9).unwrap().len(), 40);

        let f = WitnessFamily::find(&w("b"), &w("a")).unwrap();
        assert_eq!(names(&f), ["1", "1", "a", "1"]);

        let f = WitnessFamily::find(&w("ab"), &w("ab")).unwrap();
        let raw = f.raw(1);
        assert!(is_cyclically_reduced(&raw));
        assert!(f.connectors().iter().all(|c| c.len() <= 2));
    }

    #[test]
    fn connector_search_is_shortlex_least() {
        // Brute force over the full tuple space, no pruning.
        for (u, r) in [("a", "b"), ("ab", "ab"), ("aB", "bb"), ("abA", "b")] {
            let (u, r) = (w(u), w(r));
            let found = WitnessFamily::find(&u, &r).unwrap();
            let cands = reduced_words_up_to(b2(), 2);
            let first = cands
                .iter()
                .flat_map(|a| cands.iter().map(move |b| (a, b)))
                .flat_map(|(a, b)| cands.iter().map(move |c| (a, b, c)))
                .flat_map(|(a, b, c)| cands.iter().map(move |d| [a.clone(), b.clone(), c.clone(), d.clone()]))
                .find(|c| WitnessFamily::new(&u, &r, c.clone(), None).is_ok())
                .unwrap();
            assert_eq!(found.connectors(), &first);
        }
    }

    #[test]
    fn coset_witness() {
        let f = WitnessFamily::find_for_coset(&w("b"), &w("a"), &w("b")).unwrap();
        let g1 = f.witness(1).unwrap();
        assert_eq!(g1.len(), 9);
        assert_eq!(g1.to_string(), "babABabAb");
        assert_eq!(names(&f), ["1", "1", "B", "1"]);
    }

    #[test]
    fn witnesses_lie_in_the_normal_closure() {
        let f = WitnessFamily::find(&w("aB"), &w("abb")).unwrap();
        let r = f.r().to_word();
        for i in 1..=20 {
            let (x1, x2) = f.conjugators(i);
            let product = r.conjugate(&x1).mul(&r.conjugate(&x2));
            assert_eq!(product.letters(), f.witness(i).unwrap().letters());
            assert_eq!(f.witness(i).unwrap().len(), 4 * i * 2 + f.base_length());
        }
    }

    #[test]
    fn convergence_examples() {
        let f = WitnessFamily::find(&w("a"), &w("b")).unwrap();
        let t = MarkedMetricGraph::rose(b2(), vec![q(1, 1), q(2, 1)]).unwrap();
        let rows = convergence_report(&f, 1, &[1, 9, 99], std::slice::from_ref(&t)).unwrap();
        for row in &rows {
            let expected = q(1, row.i as i64 + 1);
            assert_eq!(row.distance, expected);
            assert_eq!(row.gaps[0], expected);
            assert_eq!(row.lambda, q(1, 4 * row.i as i64 + 4));
        }
        let csv = convergence_csv(&rows[1..2]);
        assert_eq!(csv, "i, d_i_num, d_i_den, lambda_i, tree_id, gap_i\n9, 1, 10, 1/40, 0, 0.100000000000\n");
        assert!(q(9, 1) * &rows[1].distance <= f.distance_bound(1));
        let gb = f.gap_bound(&t).unwrap();
        assert!(rows.iter().all(|row| q(row.i as i64, 1) * &row.gaps[0] <= gb));
    }

    #[test]
    fn distinguisher_examples() {
        let t = MarkedMetricGraph::rose(b2(), vec![q(1, 1), q(1, 1)]).unwrap();
        let t2 = MarkedMetricGraph::rose(b2(), vec![q(1, 1), q(2, 1)]).unwrap();
        match rigidity_distinguisher(&t, &t2, &w("a"), 10, 3).unwrap() {
            Distinction::Found { family, i, witness, lengths } => {
                assert_eq!(family.u().to_string(), "b");
                assert_eq!(i, 1);
                assert_eq!(witness.to_string(), "baBabaBA");
                assert_eq!(lengths, (q(8, 1), q(12, 1)));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            rigidity_distinguisher(&t, &t, &w("a"), 10, 3).unwrap(),
            Distinction::AgreeUpTo { u_search_length: 3, i_max: 10 }
        );
        let scaled = t.scale(&q(2, 1)).unwrap();
        match rigidity_distinguisher(&t, &scaled, &w("a"), 10, 3).unwrap() {
            Distinction::Found { family, i, .. } => {
                assert_eq!(family.u().to_string(), "a");
                assert_eq!(i, 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(rigidity_distinguisher(&t, &t2, &w("1"), 10, 3), Err(Error::TrivialRelator));
    }
}
