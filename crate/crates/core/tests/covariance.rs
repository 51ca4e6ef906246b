use std::sync::Arc;

use cnp_core::covariance::{self, check_axioms, Axiom, Representation, Verdict};
use cnp_core::linalg::Matrix;
use cnp_core::psys::{CompactFamily, FamilyOrigin, ProductSystem};
use cnp_core::qlo::{QloMonoid, RaagGraph};
use cnp_core::random;
use cnp_core::scalar;

#[test]
fn fock_representation_is_toeplitz() {
    let mut rng = random::rng(7);
    let ps = Arc::new(random::grid2_system(&mut rng).unwrap());
    let rep = Representation::fock(ps.clone(), 3).unwrap();
    let report = check_axioms(&rep, &[Axiom::T1, Axiom::T2, Axiom::T3, Axiom::N], 3, None).unwrap();
    assert!(report.pass(), "{:?}", report.verdicts);
    let fowler = covariance::check_fowler(&rep, 2).unwrap();
    assert!(fowler.failed());
}

#[test]
fn nica_infinite_branch_on_free_letters() {
    let m = QloMonoid::raag(RaagGraph::path(&["a", "b", "c"]));
    let ps = Arc::new(ProductSystem::trivial(m.clone()));
    let rep = Representation::fock(ps, 3).unwrap();
    let pairs = vec![(m.parse("a").unwrap(), m.parse("c").unwrap()), (m.parse("a").unwrap(), m.parse("b").unwrap())];
    assert_eq!(covariance::check_nica(&rep, &pairs).unwrap(), Verdict::Pass);
}

#[test]
fn permutation_reps_are_covariant() {
    let mut rng = random::rng(11);
    for _ in 0..5 {
        let sys = random::permutation_system(&mut rng).unwrap();
        let rep = sys.covariant_rep([random::phase(&mut rng), random::phase(&mut rng)]).unwrap();
        let report =
            check_axioms(&rep, &[Axiom::T1, Axiom::T2, Axiom::T3, Axiom::N, Axiom::Fowler, Axiom::CP], 2, None)
                .unwrap();
        assert!(report.pass(), "{:?}", report.verdicts);
        let g = sys.system.monoid().generator(0);
        let gauge = rep.with_scaled(&g, 0, &-scalar::one()).unwrap();
        assert!(covariance::check_t3(&gauge, 2).unwrap().passed());
        let bad = rep.with_scaled(&g, 0, &scalar::int(2)).unwrap();
        assert!(covariance::check_t3(&bad, 2).unwrap().failed());
    }
}

#[test]
fn counterexample_forces_psi_e_to_vanish() {
    let ps = Arc::new(ProductSystem::lex_counterexample());
    let m = ps.monoid().clone();
    let e = m.identity();
    let rep = Representation::new(
        ps.clone(),
        2,
        vec![(e.clone(), vec![random::unit_matrix(2, 0, 0), random::unit_matrix(2, 1, 1)])],
    )
    .unwrap();
    let fam = CompactFamily::new(
        &ps,
        vec![(e.clone(), Matrix::diagonal(&[scalar::zero(), scalar::one()]))],
        FamilyOrigin::Generic,
    )
    .unwrap();
    let (v, _) = covariance::check_cp(&rep, &[fam.clone()], &[e.clone()], 4).unwrap();
    assert!(v.failed());
    let killed =
        Representation::new(ps.clone(), 2, vec![(e.clone(), vec![random::unit_matrix(2, 0, 0), Matrix::zeros(2, 2)])])
            .unwrap();
    let (v, _) = covariance::check_cp(&killed, &[fam], &[e], 4).unwrap();
    assert!(v.passed());
    assert!(matches!(covariance::check_fowler(&rep, 2).unwrap(), Verdict::NotApplicable(_)));
}

#[test]
fn katsura_boundary_and_toeplitz() {
    let mut rng = random::rng(3);
    for _ in 0..5 {
        let x = random::acyclic_bimodule(&mut rng).unwrap();
        let ps = Arc::new(ProductSystem::tensor_power(x).unwrap());
        let good = random::boundary_rep(&ps, None).unwrap();
        let r = covariance::check_katsura(&good, 3).unwrap();
        assert!(r.verdict(Axiom::Katsura).unwrap().passed());
        assert!(r.verdict(Axiom::CP).unwrap().passed(), "{:?}", r.verdicts);
        let bad = random::toeplitz_rep(&ps).unwrap();
        let r = covariance::check_katsura(&bad, 3).unwrap();
        assert!(r.verdict(Axiom::Katsura).unwrap().failed());
        assert!(r.verdict(Axiom::CP).unwrap().failed());
        let t = check_axioms(&good, &[Axiom::T1, Axiom::T2, Axiom::T3, Axiom::N], 3, None).unwrap();
        assert!(t.pass(), "{:?}", t.verdicts);
    }
}
