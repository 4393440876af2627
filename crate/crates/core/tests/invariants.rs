mod common;

use hypergrid::counting::{self, DEFAULT_ENUMERATION_LIMIT, DEFAULT_STATE_LIMIT};
use hypergrid::flows::{self, AveragedFlow, FlowSource, Snmf, DEFAULT_EDGE_GUARD};
use hypergrid::grid::{self, Point};
use hypergrid::saturation;
use hypergrid::{GridShape, VertexSet};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn shape(t: usize, n: usize) -> GridShape {
    GridShape::new(t, n).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Points of a shape picked by a bit pattern, one bit per lex index.
fn subset(s: GridShape, bits: &[bool]) -> VertexSet {
    VertexSet::from_indices(s, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
}

/// Greedy antichain: walk the points in the given order, keep those
/// incomparable to everything kept so far.
fn greedy_antichain(s: GridShape, order: &[usize]) -> VertexSet {
    let pts = common::all_points(s.t(), s.n());
    let mut kept: Vec<usize> = Vec::new();
    for &i in order {
        if kept.iter().all(|&j| !common::comparable(&pts[i], &pts[j])) {
            kept.push(i);
        }
    }
    VertexSet::from_indices(s, kept)
}

fn small_shape() -> impl Strategy<Value = GridShape> {
    prop_oneof![
        (2usize..=10).prop_map(|t| shape(t, 2)),
        (2usize..=4).prop_map(|t| shape(t, 3)),
        (2usize..=6).prop_map(|n| shape(2, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_profile_matches_polynomial(t in 2usize..9, n in 1usize..9) {
        let s = shape(t, n);
        let profile = grid::level_sizes(&s);
        let expected = common::level_sizes(t, n);
        prop_assert_eq!(profile.sizes(), expected.as_slice());
        prop_assert!(profile.is_symmetric());
        prop_assert!(grid::is_log_concave(&profile));
        let total: BigUint = profile.total();
        prop_assert_eq!(total, BigUint::from(t).pow(n as u32));
        prop_assert_eq!(grid::width(&s), profile.size(s.middle()).clone());
    }

    #[test]
    fn lex_index_round_trips(t in 2usize..7, n in 1usize..6, seed in any::<u64>()) {
        let s = shape(t, n);
        let idx = (seed % s.volume() as u64) as usize;
        let p = s.point(idx);
        prop_assert_eq!(s.index(&p), idx);
        prop_assert_eq!(p.rank(), p.coords().iter().map(|&c| c as usize).sum::<usize>());
    }

    #[test]
    fn antichains_have_lym_at_most_one(s in small_shape(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..s.volume() as usize).collect();
        // cheap deterministic shuffle
        let mut x = seed | 1;
        for i in (1..order.len()).rev() {
            x ^= x << 13; x ^= x >> 7; x ^= x << 17;
            order.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let a = greedy_antichain(s, &order);
        prop_assert!(a.is_antichain());
        let lym = grid::lym_weight(&grid::level_sizes(&s), &a);
        prop_assert!(lym <= BigRational::one());
        prop_assert!(BigUint::from(a.len()) <= grid::width(&s));
    }

    #[test]
    fn degree_matches_brute_force(
        s in small_shape(),
        bits in proptest::collection::vec(any::<bool>(), 128),
    ) {
        let a = subset(s, &bits[..s.volume() as usize]);
        let pts: Vec<Vec<u32>> = a.points().map(|p| p.coords().to_vec()).collect();
        let delta = saturation::comp_max_degree(&a);
        prop_assert_eq!(delta, common::brute_max_degree(&pts));
        prop_assert_eq!(delta == 0, common::is_antichain(&pts));
        prop_assert_eq!(a.is_antichain(), common::is_antichain(&pts));
    }

    #[test]
    fn strong_saturation_on_good_levels(
        n in 3usize..6,
        bits in proptest::collection::vec(any::<bool>(), 64),
        k in 1usize..3,
    ) {
        let s = shape(2, n);
        let good = grid::good_levels(&s, grid::Exponent::default());
        let a = VertexSet::from_indices(
            s,
            (0..s.volume() as usize).filter(|&i| bits[i] && good.contains(&s.point(i).rank())),
        );
        let lym = grid::lym_weight(&grid::level_sizes(&s), &a);
        let need = BigRational::from_integer(k.into());
        prop_assume!(lym > need);
        let slack = &lym - &need;
        let w = flows::max_good_weight(&s, flows::AveragingMode::Exact, grid::Exponent::default()).unwrap();
        let report = saturation::check_strong_saturation(&a, k, &slack, w.exact.as_ref().unwrap(), grid::Exponent::default()).unwrap();
        prop_assert!(report.holds);
        prop_assert!(report.delta >= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counting_engines_agree(s in prop_oneof![
        (2usize..=5).prop_map(|t| shape(t, 2)),
        (2usize..=3).prop_map(|t| shape(t, 3)),
        (1usize..=5).prop_map(|n| shape(2, n)),
    ]) {
        let brute = BigUint::from(common::brute_antichains(s.t(), s.n()));
        let transfer = counting::count_by_transfer(&s, DEFAULT_STATE_LIMIT).unwrap();
        prop_assert_eq!(&transfer, &brute);
        if s.volume() <= DEFAULT_ENUMERATION_LIMIT {
            prop_assert_eq!(counting::count_by_enumeration(&s, DEFAULT_ENUMERATION_LIMIT).unwrap(), brute.clone());
        }
        if let Some(closed) = counting::count_closed_form(&s) {
            prop_assert_eq!(closed, brute);
        }
    }

    #[test]
    fn averaged_flow_is_permutation_invariant(
        s in prop_oneof![
            (2usize..=4).prop_map(|t| shape(t, 2)),
            (2usize..=3).prop_map(|t| shape(t, 3)),
            (2usize..=4).prop_map(|n| shape(2, n)),
        ],
        pick in any::<u64>(),
    ) {
        let snmf = Snmf::new(s);
        let avg = AveragedFlow::new(s).unwrap();
        let n = s.n();
        let perms = permutations(n);
        let below_top: Vec<Point> = s.points().filter(|p| p.rank() < s.top()).collect();
        let x = below_top[(pick % below_top.len() as u64) as usize].clone();
        for axis in grid::up_axes(&s, &x).collect::<Vec<_>>() {
            // brute force: mean of f over every relabelling of the axes
            let mut sum = BigRational::zero();
            for p in &perms {
                let mut c = vec![0u32; n];
                for i in 0..n {
                    c[p[i]] = x.coords()[i];
                }
                sum += snmf.weight(&Point::new(c), p[axis]);
            }
            let brute = sum / BigRational::from_integer(perms.len().into());
            let w = avg.weight(&x, axis);
            prop_assert_eq!(&w, &brute);
            for p in &perms {
                let mut c = vec![0u32; n];
                for i in 0..n {
                    c[p[i]] = x.coords()[i];
                }
                prop_assert_eq!(avg.weight(&Point::new(c), p[axis]), w.clone());
            }
        }
    }
}

#[test]
fn averaged_flow_conserves_mass() {
    for (t, n) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4), (4, 3), (5, 2), (3, 5)] {
        let s = shape(t, n);
        let report = flows::verify_flow(&AveragedFlow::new(s).unwrap(), DEFAULT_EDGE_GUARD).unwrap();
        assert!(report.pass, "[{t}]^{n}: {:?}", report.violations);
        assert_eq!(report.negative_edges, 0);
    }
}

#[test]
fn structured_flow_conserves_mass() {
    for t in 2..=7 {
        for n in 1..=4 {
            let s = shape(t, n);
            let report = flows::verify_flow(&Snmf::new(s), DEFAULT_EDGE_GUARD).unwrap();
            assert!(report.pass, "[{t}]^{n}: {:?}", report.violations);
        }
    }
}
