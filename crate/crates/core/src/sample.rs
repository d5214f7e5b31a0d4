//! Seeded random words, subgroups and points of outer space.

use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::metric::MarkedMetricGraph;
use crate::words::{Basis, CyclicWord, Endomorphism, Letter, NielsenMove, Word};
use crate::Rational;

/// The generator used everywhere a seed is accepted.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_letter<R: Rng>(rng: &mut R, basis: Basis) -> Letter {
    Letter::from_slot(rng.gen_range(0..2 * basis.rank()))
}

/// Uniform reduced word of length exactly `len`.
pub fn random_word<R: Rng>(rng: &mut R, basis: Basis, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = random_letter(rng, basis);
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::new(letters, basis)
}

/// Uniform cyclically reduced word of length exactly `len`.
pub fn random_cyclic_word<R: Rng>(rng: &mut R, basis: Basis, len: usize) -> CyclicWord {
    loop {
        let w = random_word(rng, basis, len);
        if w.is_cyclically_reduced() {
            return w.cyclic_reduce().0;
        }
    }
}

/// Between 1 and `max_gens` generators, each of length 1 to `max_len`.
pub fn random_subgroup<R: Rng>(rng: &mut R, basis: Basis, max_gens: usize, max_len: usize) -> Vec<Word> {
    let count = rng.gen_range(1..=max_gens);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            random_word(rng, basis, len)
        })
        .collect()
}

fn random_move<R: Rng>(rng: &mut R, rank: usize) -> NielsenMove {
    if rank == 1 {
        return NielsenMove::Invert(0);
    }
    let i = rng.gen_range(0..rank);
    let mut j = rng.gen_range(0..rank - 1);
    if j >= i {
        j += 1;
    }
    match rng.gen_range(0..4) {
        0 => NielsenMove::Invert(i),
        1 => NielsenMove::Swap(i, j),
        2 => NielsenMove::MulRight(i, j, rng.gen()),
        _ => NielsenMove::MulLeft(i, j, rng.gen()),
    }
}

/// Product of up to `max_moves` random elementary Nielsen moves.
pub fn random_automorphism<R: Rng>(rng: &mut R, basis: Basis, max_moves: usize) -> Endomorphism {
    let moves = rng.gen_range(0..=max_moves);
    (0..moves).fold(Endomorphism::identity(basis), |phi, _| {
        let mv = random_move(rng, basis.rank());
        phi.nielsen(mv)
    })
}

/// Lengths `k/10` with `k` uniform in `1..=100`.
pub fn random_lengths<R: Rng>(rng: &mut R, count: usize) -> Vec<Rational> {
    (0..count)
        .map(|_| Rational::new(BigInt::from(rng.gen_range(1..=100)), BigInt::from(10)))
        .collect()
}

/// A rose marked by a random automorphism, with random lengths.
pub fn random_marked_rose<R: Rng>(rng: &mut R, basis: Basis, max_moves: usize) -> Result<MarkedMetricGraph> {
    let phi = random_automorphism(rng, basis, max_moves);
    let lengths = random_lengths(rng, basis.rank());
    MarkedMetricGraph::marked_rose(&phi, lengths)
}
