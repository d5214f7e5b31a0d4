use freerig::currents::FrequencyVector;
use freerig::metric::MarkedMetricGraph;
use freerig::sample;
use freerig::words::{Basis, Letter, NielsenMove};
use freerig::{fold, CyclicWord, Endomorphism, Rational, Word};
use num::{BigInt, One, Zero};
use proptest::prelude::*;

fn basis(rank: usize) -> Basis {
    Basis::new(rank).unwrap()
}

fn raw_word(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(0..2 * rank, 0..=max_len)
        .prop_map(|slots| slots.into_iter().map(Letter::from_slot).collect())
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    raw_word(rank, max_len).prop_map(move |ls| Word::new(ls, basis(rank)))
}

fn nonempty_cyclic(rank: usize, max_len: usize) -> impl Strategy<Value = CyclicWord> {
    word(rank, max_len)
        .prop_map(|w| w.cyclic_reduce().0)
        .prop_filter("nontrivial", |c| !c.is_empty())
}

fn lengths(rank: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(1i64..=100, rank)
        .prop_map(|ks| ks.into_iter().map(|k| Rational::new(k.into(), 10.into())).collect())
}

fn moves(rank: usize) -> impl Strategy<Value = Vec<NielsenMove>> {
    let mv = (0..rank, 0..rank, 0..4u8, any::<bool>()).prop_map(move |(i, j, kind, flag)| {
        let j = if j == i { (i + 1) % rank } else { j };
        match kind {
            _ if rank == 1 => NielsenMove::Invert(0),
            0 => NielsenMove::Invert(i),
            1 => NielsenMove::Swap(i, j),
            2 => NielsenMove::MulRight(i, j, flag),
            _ => NielsenMove::MulLeft(i, j, flag),
        }
    });
    prop::collection::vec(mv, 0..=5)
}

fn automorphism(rank: usize) -> impl Strategy<Value = Endomorphism> {
    moves(rank).prop_map(move |ms| {
        ms.into_iter()
            .fold(Endomorphism::identity(basis(rank)), |phi, m| phi.nielsen(m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_idempotent(letters in raw_word(3, 30)) {
        let w = Word::new(letters.clone(), basis(3));
        prop_assert_eq!(Word::new(w.letters().to_vec(), basis(3)), w.clone());
        let (c, conj) = w.cyclic_reduce();
        prop_assert_eq!(c.to_word().cyclic_reduce().0, c.clone());
        prop_assert_eq!(c.to_word().conjugate(&conj), w);
    }

    #[test]
    fn multiplication_is_a_group_law(u in word(2, 12), v in word(2, 12), w in word(2, 12)) {
        prop_assert_eq!(u.mul(&v).mul(&w), u.mul(&v.mul(&w)));
        prop_assert!(u.mul(&u.inverse()).is_empty());
        prop_assert_eq!(u.mul(&v).inverse(), v.inverse().mul(&u.inverse()));
    }

    #[test]
    fn counts_are_inversion_symmetric(g in nonempty_cyclic(2, 16), v in word(2, 4)) {
        prop_assume!(!v.is_empty());
        prop_assert_eq!(g.count_occurrences(&v).unwrap(), g.count_occurrences(&v.inverse()).unwrap());
        prop_assert_eq!(g.inverse().count_occurrences(&v).unwrap(), g.count_occurrences(&v).unwrap());
    }

    #[test]
    fn power_runs_of_powers(w in nonempty_cyclic(2, 8), m in 1usize..6) {
        prop_assume!(w.is_proper_power().unwrap().1 == 1);
        prop_assert_eq!(w.pow(m).max_power_run(&w), m);
        prop_assert_eq!(w.pow(m).max_power_run(&w.inverse()), m);
    }

    #[test]
    fn folding_ignores_generator_order(gens in prop::collection::vec(word(2, 6), 1..4), w in word(2, 8)) {
        let mut rev = gens.clone();
        rev.reverse();
        let inv: Vec<Word> = gens.iter().map(Word::inverse).collect();
        let (a, b, c) = (fold(&gens, basis(2)), fold(&rev, basis(2)), fold(&inv, basis(2)));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        prop_assert_eq!(a.contains(&w), b.contains(&w));
        for g in &gens {
            prop_assert!(a.contains(g));
        }
    }

    #[test]
    fn readability_is_prefix_closed(gens in prop::collection::vec(word(2, 6), 1..4), p in word(2, 10)) {
        let g = fold(&gens, basis(2));
        if g.reads(&p) {
            for k in 0..p.len() {
                prop_assert!(g.reads(&Word::new(p.letters()[..k].to_vec(), basis(2))));
            }
        }
    }

    #[test]
    fn translation_length_is_homogeneous_and_a_class_function(
        phi in automorphism(2),
        ls in lengths(2),
        g in word(2, 10),
        h in word(2, 10),
        n in 1i64..6,
    ) {
        let t = MarkedMetricGraph::marked_rose(&phi, ls).unwrap();
        let lg = t.translation_length(&g);
        prop_assert_eq!(t.translation_length(&g.pow(n)), &lg * Rational::from_integer(BigInt::from(n)));
        prop_assert_eq!(t.translation_length(&g.conjugate(&h)), lg.clone());
        prop_assert_eq!(t.translation_length(&g.inverse()), lg.clone());
        prop_assert_eq!(lg.is_zero(), g.cyclic_reduce().0.is_empty());
    }

    #[test]
    fn marked_rose_reads_images(phi in automorphism(3), ls in lengths(3), g in word(3, 10)) {
        let t = MarkedMetricGraph::marked_rose(&phi, ls.clone()).unwrap();
        let id = MarkedMetricGraph::rose(basis(3), ls).unwrap();
        prop_assert_eq!(t.translation_length(&g), id.translation_length(&phi.apply(&g)));
    }

    #[test]
    fn frequencies_are_normalized_and_power_invariant(g in nonempty_cyclic(2, 14), k in 1usize..5, window in 1usize..4) {
        let f = FrequencyVector::new(&g, window).unwrap();
        for len in 1..=window {
            let total: Rational = f
                .table()
                .iter()
                .filter(|(v, _)| v.len() == len)
                .map(|(_, x)| x.clone())
                .sum();
            prop_assert_eq!(total, Rational::one());
        }
        let pow = FrequencyVector::new(&g.pow(k), window).unwrap();
        prop_assert_eq!(pow.table(), f.table());
        let inv = FrequencyVector::new(&g.inverse(), window).unwrap();
        prop_assert_eq!(inv.table(), f.table());
    }
}

#[test]
fn sampled_subgroups_contain_their_generators() {
    let mut rng = sample::rng(99);
    for rank in 1..=3 {
        for _ in 0..100 {
            let gens = sample::random_subgroup(&mut rng, basis(rank), 3, 5);
            let g = fold(&gens, basis(rank));
            assert!(gens.iter().all(|w| g.contains(w)));
        }
    }
}
