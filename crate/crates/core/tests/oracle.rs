mod common;

use aimc::exact::reach_prob;
use aimc::gadgets::{encode_sqrtsum, SqrtSumOptions};
use aimc::model::{refines, AimcModel, Interval, Query, Relation};
use aimc::oracle::{brute_force_opt, lattice_points, resolution_containing, OracleMode, OracleOptions};
use aimc::rational::{int, ratio};
use aimc::Error;
use proptest::prelude::*;

fn fixture() -> AimcModel {
    let opts = SqrtSumOptions {
        m: Some(4),
        n: Some(32),
        x_interval: Some(common::closed(ratio(1, 8), ratio(7, 8))),
    };
    encode_sqrtsum(&[4], 1, &opts).unwrap().0
}

fn gadget_query(rel: Relation) -> Query {
    Query::new("g1.a", "S", rel, int(0), None).unwrap()
}

#[test]
fn grid_recovers_fixture_optimum() {
    let m = fixture();
    let r = brute_force_opt(&m, &gadget_query(Relation::Ge), OracleMode::Grid { resolution: 8 }, OracleOptions::default())
        .unwrap();
    assert_eq!(r.best_prob, ratio(59, 432));
    assert_eq!(r.evaluations, 7);
    assert!(refines(&r.best_chain, &m).unwrap());
    assert_eq!(reach_prob(&r.best_chain, "g1.a", "S").unwrap(), r.best_prob);

    // the minimum of the cubic over [1/8, 7/8] is at an endpoint
    let r = brute_force_opt(&m, &gadget_query(Relation::Le), OracleMode::Grid { resolution: 8 }, OracleOptions::default())
        .unwrap();
    let ends = [ratio(1, 8), ratio(7, 8)].map(|x| common::gadget_cubic(&ratio(1, 2), &ratio(8, 27), &x));
    assert_eq!(r.best_prob, ends.into_iter().min().unwrap());
}

#[test]
fn sampling_never_beats_the_grid_optimum() {
    let m = fixture();
    let mode = OracleMode::Sample {
        count: 200,
        seed: 7,
        denominator: 1 << 10,
    };
    let r = brute_force_opt(&m, &gadget_query(Relation::Ge), mode, OracleOptions::default()).unwrap();
    assert_eq!(r.evaluations, 200);
    assert!(r.best_prob <= ratio(59, 432));
    assert!(r.best_prob > ratio(1, 10));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let m = fixture();
    for mode in [
        OracleMode::Grid { resolution: 64 },
        OracleMode::Sample {
            count: 300,
            seed: 3,
            denominator: 97,
        },
    ] {
        let one = brute_force_opt(&m, &gadget_query(Relation::Ge), mode.clone(), OracleOptions {
            jobs: Some(1),
            ..Default::default()
        })
        .unwrap();
        let four = brute_force_opt(&m, &gadget_query(Relation::Ge), mode, OracleOptions {
            jobs: Some(4),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(one, four);
    }
}

#[test]
fn budget_and_infeasibility() {
    let m = fixture();
    let tiny = OracleOptions {
        budget: 3,
        jobs: None,
    };
    assert!(matches!(
        brute_force_opt(&m, &gadget_query(Relation::Ge), OracleMode::Grid { resolution: 8 }, tiny),
        Err(Error::GridTooLarge { .. })
    ));

    // two untied edges whose intervals cannot make the row sum to one
    let mut bad = AimcModel::new(["s", "t"]).unwrap();
    bad.add_transition("s", "t", common::closed(int(0), ratio(1, 4))).unwrap();
    bad.add_transition("s", "s", common::closed(int(0), ratio(1, 4))).unwrap();
    bad.add_transition("t", "t", Interval::point(int(1))).unwrap();
    let q = Query::new("s", "t", Relation::Ge, int(0), None).unwrap();
    assert!(brute_force_opt(&bad, &q, OracleMode::Grid { resolution: 8 }, OracleOptions::default()).is_err());
}

#[test]
fn lattice_resolution() {
    let pts = [ratio(1, 8), ratio(3, 4), ratio(2, 5)];
    let res = resolution_containing(&pts);
    assert_eq!(res, 40);
    let i = common::closed(int(0), int(1));
    let lattice = lattice_points(&i, res);
    assert!(pts.iter().all(|p| lattice.contains(p)));
}

proptest! {
    #[test]
    fn lattice_points_stay_inside(lo in 0i64..16, width in 1i64..16, res in 1u64..40, ls: bool, hs: bool) {
        let i = Interval::new(ratio(lo, 16), ls, ratio((lo + width).min(16), 16), hs).unwrap();
        let pts = lattice_points(&i, res);
        prop_assert!(!pts.is_empty());
        prop_assert!(pts.iter().all(|p| i.contains(p)));
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let finer = lattice_points(&i, 2 * res);
        prop_assert!(pts.iter().all(|p| finer.contains(p)));
    }

    #[test]
    fn oracle_bounds_hidden_refinement(seed in 0u64..2000) {
        let mut rng = common::rng(seed);
        let (m, hidden) = common::random_model(&mut rng, 5);
        let truth = reach_prob(&hidden, "v0", "v4").unwrap();
        let res = resolution_containing(&hidden.entries().map(|(_, p)| p.clone()).collect::<Vec<_>>());
        prop_assume!(res <= 48);
        let opts = OracleOptions { budget: 200_000, jobs: Some(1) };
        let q = Query::new("v0", "v4", Relation::Ge, int(0), None).unwrap();
        let hi = match brute_force_opt(&m, &q, OracleMode::Grid { resolution: res }, opts) {
            Err(Error::GridTooLarge { .. }) => return Ok(()),
            r => r.unwrap(),
        };
        let q = Query::new("v0", "v4", Relation::Le, int(0), None).unwrap();
        let lo = brute_force_opt(&m, &q, OracleMode::Grid { resolution: res }, opts).unwrap();
        prop_assert!(lo.best_prob <= truth && truth <= hi.best_prob);
    }
}
