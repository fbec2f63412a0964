use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use proptest::prelude::*;
use stallings::counting::{factorial, InjectionTable};
use stallings::injection::{
    count_sequences, decompose, draw_component_kind, draw_component_size, label_shapes,
    random_partial_injection, random_permutation, random_shape_sequence, ComponentKind,
    ComponentShape, ComponentSizer, PartialInjection, Permutation, ShapeSequence,
};
use stallings::oracle::{
    chi_square_p_value, enumerate_partial_injections, enumerate_permutations, uniformity_test,
};
use stallings::random::RandomSource;

const SIGNIFICANCE: f64 = 0.001;

fn histogram<K: std::hash::Hash + Eq>(items: impl Iterator<Item = K>) -> HashMap<K, u64> {
    let mut h = HashMap::new();
    for k in items {
        *h.entry(k).or_insert(0) += 1;
    }
    h
}

#[test]
fn size_two_components_follow_exact_probabilities() {
    let table = InjectionTable::build(2);
    let sizer = ComponentSizer::new(&table);
    let mut plain = RandomSource::new(21);
    let mut fast = RandomSource::new(22);
    let a = histogram((0..700_000).map(|_| draw_component_size(2, &table, &mut plain).unwrap()));
    let b = histogram((0..700_000).map(|_| sizer.draw(2, &mut fast).unwrap()));
    for h in [a, b] {
        let observed = [h[&1], h[&2]];
        assert!(chi_square_p_value(&observed, &[4.0 / 7.0, 3.0 / 7.0]).unwrap() > SIGNIFICANCE);
    }
}

#[test]
fn component_kinds() {
    let mut src = RandomSource::new(31);
    for (k, trials) in [(1usize, 100_000u64), (2, 90_000)] {
        let seq = (0..trials)
            .filter(|_| draw_component_kind(k, &mut src).unwrap().kind == ComponentKind::Sequence)
            .count() as u64;
        let p = k as f64 / (k + 1) as f64;
        assert!(chi_square_p_value(&[seq, trials - seq], &[p, 1.0 - p]).unwrap() > SIGNIFICANCE);
    }
    let seq = (0..110_000)
        .filter(|_| draw_component_kind(10, &mut src).unwrap().kind == ComponentKind::Sequence)
        .count();
    let freq = seq as f64 / 110_000.0;
    assert!((freq / (10.0 / 11.0) - 1.0).abs() < 0.01, "{freq}");
}

/// Probability of each sorted shape list at size `n`, by unrolling the size
/// and kind probabilities.
fn shape_probabilities(n: usize, table: &InjectionTable) -> BTreeMap<Vec<ComponentShape>, f64> {
    let mut out = BTreeMap::new();
    fn go(
        n: usize,
        prefix: Vec<ComponentShape>,
        p: f64,
        table: &InjectionTable,
        out: &mut BTreeMap<Vec<ComponentShape>, f64>,
    ) {
        if n == 0 {
            let mut key = prefix;
            key.sort();
            *out.entry(key).or_insert(0.0) += p;
            return;
        }
        let i_n = table.get(n).unwrap().to_f64().unwrap();
        for k in 1..=n {
            let t = (factorial(n as u64 - 1) / factorial((n - k) as u64))
                .to_f64()
                .unwrap();
            let pk = (k + 1) as f64 * t * table.get(n - k).unwrap().to_f64().unwrap() / i_n;
            for (shape, pkind) in [
                (ComponentShape::sequence(k), k as f64 / (k + 1) as f64),
                (ComponentShape::cycle(k), 1.0 / (k + 1) as f64),
            ] {
                let mut next = prefix.clone();
                next.push(shape);
                go(n - k, next, p * pk * pkind, table, out);
            }
        }
    }
    go(n, Vec::new(), 1.0, table, &mut out);
    out
}

#[test]
fn shape_distribution_at_three() {
    let table = InjectionTable::build(3);
    let exact = shape_probabilities(3, &table);
    assert!((exact.values().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut src = RandomSource::new(41);
    let h = histogram((0..1_000_000).map(|_| {
        let mut shapes = random_shape_sequence(3, &table, &mut src)
            .unwrap()
            .shapes()
            .to_vec();
        shapes.sort();
        shapes
    }));
    assert_eq!(h.len(), exact.len());
    let observed: Vec<u64> = exact.keys().map(|k| h[k]).collect();
    let expected: Vec<f64> = exact.values().copied().collect();
    assert!(chi_square_p_value(&observed, &expected).unwrap() > SIGNIFICANCE);
}

#[test]
fn shape_sequence_small_cases() {
    let table = InjectionTable::build(1);
    let mut src = RandomSource::new(5);
    assert!(random_shape_sequence(0, &table, &mut src)
        .unwrap()
        .shapes()
        .is_empty());
    for _ in 0..100 {
        let s = random_shape_sequence(1, &table, &mut src).unwrap();
        assert_eq!(s.shapes().len(), 1);
        assert_eq!(s.shapes()[0].size, 1);
    }
}

#[test]
fn permutations_of_three_are_uniform() {
    let classes = enumerate_permutations(3).unwrap();
    let mut src = RandomSource::new(51);
    let p = uniformity_test(
        |s| Ok(random_permutation(3, s)),
        &classes,
        600_000,
        &mut src,
    )
    .unwrap();
    assert!(p > SIGNIFICANCE, "p = {p}");
    assert_eq!(random_permutation(0, &mut src).n(), 0);
    assert_eq!(random_permutation(1, &mut src), Permutation::identity(1));
}

#[test]
fn partial_injections_are_uniform_up_to_four() {
    let table = InjectionTable::build(4);
    for n in 0..=4 {
        let classes = enumerate_partial_injections(n).unwrap();
        let mut src = RandomSource::new(60 + n as u64);
        let p = uniformity_test(
            |s| random_partial_injection(n, &table, s),
            &classes,
            1_000_000,
            &mut src,
        )
        .unwrap();
        assert!(p > SIGNIFICANCE, "n = {n}: p = {p}");
    }
}

#[test]
fn label_examples() {
    let one = ShapeSequence::new(vec![ComponentShape::cycle(1)]).unwrap();
    assert_eq!(
        label_shapes(&one, &Permutation::identity(1))
            .unwrap()
            .image(),
        &[Some(0)]
    );
    let path = ShapeSequence::new(vec![ComponentShape::sequence(2)]).unwrap();
    let swapped = Permutation::new(vec![1, 0]).unwrap();
    assert_eq!(
        label_shapes(&path, &swapped).unwrap().image(),
        &[None, Some(0)]
    );
    let mixed =
        ShapeSequence::new(vec![ComponentShape::sequence(1), ComponentShape::cycle(1)]).unwrap();
    assert_eq!(
        label_shapes(&mixed, &Permutation::identity(2))
            .unwrap()
            .image(),
        &[None, Some(1)]
    );
    assert!(label_shapes(&mixed, &Permutation::identity(3)).is_err());
}

#[test]
fn decompose_examples() {
    let ids = decompose(&PartialInjection::identity(3));
    assert_eq!(ids, BTreeMap::from([(ComponentShape::cycle(1), 3)]));
    let empty = decompose(&PartialInjection::empty(3));
    assert_eq!(empty, BTreeMap::from([(ComponentShape::sequence(1), 3)]));
    let swap = PartialInjection::new(vec![Some(1), Some(0), None]).unwrap();
    assert_eq!(
        decompose(&swap),
        BTreeMap::from([
            (ComponentShape::sequence(1), 1),
            (ComponentShape::cycle(2), 1)
        ])
    );
    assert_eq!(count_sequences(&PartialInjection::identity(5)), 0);
    assert_eq!(count_sequences(&PartialInjection::empty(5)), 5);
}

#[test]
fn sampled_injections_are_injective() {
    let table = InjectionTable::build(500);
    let mut src = RandomSource::new(71);
    for n in (0..=500).step_by(25) {
        let inj = random_partial_injection(n, &table, &mut src).unwrap();
        assert_eq!(PartialInjection::new(inj.image().to_vec()).unwrap(), inj);
        let total: usize = decompose(&inj).iter().map(|(s, c)| s.size * c).sum();
        assert_eq!(total, n);
    }
}

/// Shortest of several timed batches, to keep scheduler noise out.
fn best_time(n: usize, table: &InjectionTable, seed: u64) -> Duration {
    let sizer = ComponentSizer::new(table);
    (0..5)
        .map(|round| {
            let mut src = RandomSource::for_stream(seed, round);
            let start = Instant::now();
            for _ in 0..20 {
                sizer.partial_injection(n, &mut src).unwrap();
            }
            start.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn doubling_n_at_most_triples_the_time() {
    let table = InjectionTable::build(20_000);
    let small = best_time(10_000, &table, 81);
    let large = best_time(20_000, &table, 82);
    let ratio = large.as_secs_f64() / small.as_secs_f64();
    assert!(ratio <= 3.0, "{small:?} -> {large:?}, ratio {ratio:.2}");
}

fn shapes_strategy() -> impl Strategy<Value = Vec<ComponentShape>> {
    prop::collection::vec((1usize..6, any::<bool>()), 0..8).prop_map(|v| {
        v.into_iter()
            .map(|(k, cyc)| {
                if cyc {
                    ComponentShape::cycle(k)
                } else {
                    ComponentShape::sequence(k)
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn labeling_preserves_the_shape_multiset(shapes in shapes_strategy(), seed: u64) {
        let seq = ShapeSequence::new(shapes.clone()).unwrap();
        let mut src = RandomSource::new(seed);
        let perm = random_permutation(seq.total(), &mut src);
        let inj = label_shapes(&seq, &perm).unwrap();
        let mut expect = BTreeMap::new();
        for s in shapes {
            *expect.entry(s).or_insert(0) += 1;
        }
        prop_assert_eq!(decompose(&inj), expect);
    }

    #[test]
    fn inverse_keeps_the_shape_multiset(shapes in shapes_strategy(), seed: u64) {
        let seq = ShapeSequence::new(shapes).unwrap();
        let mut src = RandomSource::new(seed);
        let inj = label_shapes(&seq, &random_permutation(seq.total(), &mut src)).unwrap();
        prop_assert_eq!(decompose(&inj.inverse()), decompose(&inj));
        prop_assert_eq!(inj.inverse().inverse(), inj);
    }
}
