use cnp_core::linalg::Matrix;
use cnp_core::psys::{CompactFamily, DefectStatus, FamilyOrigin, ProductSystem};
use cnp_core::scalar;

#[test]
fn counterexample_fails_injectivity_at_one_zero() {
    let x = ProductSystem::lex_counterexample();
    let m = x.monoid().clone();
    let q = m.parse("(1,0)").unwrap();
    let v = x.phi_tilde_injective(&q).unwrap();
    assert!(!v.injective);
    assert_eq!(v.kernel, vec![1]);
    for s in ["(0,0)", "(0,1)", "(0,2)"] {
        assert!(x.phi_tilde_injective(&m.parse(s).unwrap()).unwrap().injective, "{s}");
    }
}

#[test]
fn counterexample_defect_vanishes_beyond_one_zero() {
    let x = ProductSystem::lex_counterexample();
    let m = x.monoid().clone();
    let a = Matrix::diagonal(&[scalar::zero(), scalar::one()]);
    let fam = CompactFamily::new(&x, vec![(m.identity(), a)], FamilyOrigin::Generic).unwrap();
    let verdict = x.check_cp_vanishes(&fam, &[m.identity()], 4).unwrap();
    match &verdict.status {
        DefectStatus::VanishesForLargeS { witnesses } => {
            assert_eq!(m.format(&witnesses[0].1), "(1,0)");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(!verdict.exact);
    assert!(verdict.hypothesis_violated.is_some());
    assert!(!x.cp_defect(&fam, &m.parse("(0,3)").unwrap()).unwrap().is_zero());
}
