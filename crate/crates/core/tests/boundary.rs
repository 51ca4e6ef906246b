mod common;

use cnp_core::boundary::{
    boundary_defect, check_boundary_relation, check_semigroup_nica, opp_components, raag_relations_report,
    IsometryFamily, RelationMode, TruncatedToeplitz,
};
use cnp_core::covariance::Verdict;
use cnp_core::qlo::{QloMonoid, RaagGraph};
use cnp_core::random;
use proptest::prelude::*;

fn raag(name: &str) -> QloMonoid {
    QloMonoid::raag(RaagGraph::from_json_str(&common::read(&format!("raag/{name}.json"))).unwrap())
}

fn monoids() -> Vec<QloMonoid> {
    let mut out: Vec<QloMonoid> = ["path3", "free2", "square4", "grid2"].iter().map(|n| raag(n)).collect();
    out.push(QloMonoid::grid(2));
    out
}

#[test]
fn truncated_toeplitz_is_nica_covariant() {
    for m in monoids() {
        let t = TruncatedToeplitz::new(m.clone(), 4).unwrap();
        let ball = m.ball(2);
        let pairs: Vec<_> = ball.iter().flat_map(|p| ball.iter().map(move |q| (p.clone(), q.clone()))).collect();
        let v = check_semigroup_nica(&t.family, &pairs).unwrap();
        assert_eq!(v, Verdict::Pass, "{}", m.name());
    }
}

#[test]
fn truncated_toeplitz_satisfies_relations_on_interior() {
    for m in monoids() {
        let t = TruncatedToeplitz::new(m.clone(), 4).unwrap();
        let r = raag_relations_report(&t.family, &[1, 2, 3, 4]).unwrap();
        assert!(r.pass(), "{}: {:?}", m.name(), r.relations);
        // the identity word is never in the range of any T_s
        let id = m.format(&m.identity());
        assert!(r.notes.iter().all(|n| n.contains(&format!("[{id}"))), "{:?}", r.notes);
    }
}

#[test]
fn components_of_opposite_graph() {
    let names = |m: &QloMonoid| -> Vec<Vec<String>> {
        opp_components(m)
            .unwrap()
            .into_iter()
            .map(|c| c.into_iter().map(|i| m.generators()[i].clone()).collect())
            .collect()
    };
    let mut path = names(&raag("path3"));
    path.sort();
    assert_eq!(path, vec![vec!["a".to_string(), "c".to_string()], vec!["b".to_string()]]);
    assert_eq!(names(&raag("free2")).len(), 1);
    assert_eq!(names(&raag("square4")).len(), 2);
    assert_eq!(names(&QloMonoid::grid(3)).len(), 3);
}

#[test]
fn components_are_foundation_sets() {
    for m in monoids() {
        for comp in opp_components(&m).unwrap() {
            let f: Vec<_> = comp.iter().map(|&i| m.generator(i)).collect();
            let qs = m.ball(1);
            let r = check_boundary_relation(&m, &f, RelationMode::Symbolic { test_qs: &qs, horizon: 4 }).unwrap();
            assert!(r.verdict.passed(), "{}: {:?}", m.name(), r.verdict);
        }
    }
}

#[test]
fn non_foundation_set_is_not_applicable() {
    let m = raag("free2");
    let qs = m.ball(1);
    let r =
        check_boundary_relation(&m, &[m.generator(0)], RelationMode::Symbolic { test_qs: &qs, horizon: 4 }).unwrap();
    match r.verdict {
        Verdict::NotApplicable(why) => assert!(why.contains("q = b"), "{why}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unitaries_satisfy_boundary_relations() {
    let fam = IsometryFamily::from_json(
        &serde_json::from_str(&common::read("reps/n2_unitaries.json")).unwrap(),
        Some(&common::data_dir().join("reps")),
    )
    .unwrap();
    assert!(!fam.is_truncated());
    let r = raag_relations_report(&fam, &[1, 2, 3, 4]).unwrap();
    assert!(r.pass(), "{:?}", r.relations);
    assert_eq!(r.verdict("4"), Some(&Verdict::Pass));
}

#[test]
fn shift_fails_relation_four() {
    let t = TruncatedToeplitz::new(QloMonoid::grid(1), 3).unwrap();
    let m = QloMonoid::grid(1);
    let r = check_boundary_relation(&m, &[m.generator(0)], RelationMode::Matrix(&t.family)).unwrap();
    assert!(r.verdict.failed());
    assert_eq!(r.defect_support, vec!["(0)".to_string()]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn defect_matches_inclusion_exclusion(seed in any::<u64>(), which in 0usize..5, n in 1usize..4) {
        let m = monoids().swap_remove(which);
        let mut rng = random::rng(seed);
        let f: Vec<_> = (0..n).map(|_| random::random_element(&mut rng, &m, 2)).collect();
        let s = random::random_element(&mut rng, &m, 4);
        let d = boundary_defect(&m, &f, &s).unwrap();
        prop_assert_eq!(i64::from(d.value), d.inclusion_exclusion);
        let divisible = f.iter().any(|p| m.divides(p, &s).unwrap());
        prop_assert_eq!(d.value == 0, divisible);
    }
}
