mod common;

use cnp_core::covariance::{check_cp, Representation, Verdict};
use cnp_core::kgraph::{check_ck_family, ck_defect_oracle, deg_join, deg_le, CkFamily, CkLevel, KGraph, Path};
use common::oracle::{all_paths, common_extensions, degrees_up_to};

#[test]
fn corpus_loads_and_roundtrips() {
    for (name, g) in common::corpus() {
        let again = KGraph::from_value(&g.to_json()).unwrap();
        assert_eq!(again.to_json(), g.to_json(), "{name}");
    }
}

#[test]
fn path_counts_match_composable_pairs() {
    for (name, g) in common::corpus() {
        for m in degrees_up_to(&vec![1; g.k()]) {
            for n in degrees_up_to(&vec![1; g.k()]) {
                let pairs = g
                    .paths_of_degree(&m)
                    .iter()
                    .map(|a| g.paths_of_degree(&n).iter().filter(|b| a.source() == b.range()).count())
                    .sum::<usize>();
                let total = g.paths_of_degree(&cnp_core::kgraph::deg_add(&m, &n)).len();
                assert_eq!(pairs, total, "{name}: |Lambda^(m+n)| for m={m:?} n={n:?}");
            }
        }
    }
}

#[test]
fn factorisations_are_unique() {
    for (name, g) in common::corpus() {
        let bound = vec![2; g.k()];
        let paths = all_paths(&g, &bound);
        for lambda in &paths {
            for m in degrees_up_to(lambda.degree()) {
                let hits: Vec<_> = paths
                    .iter()
                    .filter(|a| a.degree() == m.as_slice())
                    .flat_map(|a| paths.iter().map(move |b| (a, b)))
                    .filter(|(a, b)| g.compose(a, b).as_ref() == Some(lambda))
                    .collect();
                assert_eq!(hits.len(), 1, "{name}: {} at {m:?}", g.format_path(lambda));
                let (a, b) = g.factor(lambda, &m).unwrap();
                assert_eq!((&a, &b), (hits[0].0, hits[0].1));
            }
        }
    }
}

#[test]
fn mce_agrees_with_brute_force() {
    for (name, g) in common::corpus() {
        let paths = all_paths(&g, &vec![1; g.k()]);
        for mu in &paths {
            for nu in paths.iter().filter(|p| p.range() == mu.range()) {
                let mut got = g.mce(mu, nu);
                let mut want = common_extensions(&g, mu, nu);
                got.sort();
                want.sort();
                assert_eq!(got, want, "{name}: MCE({}, {})", g.format_path(mu), g.format_path(nu));
            }
        }
    }
}

#[test]
fn mce_members_are_extended_at_most_once() {
    for (name, g) in common::corpus() {
        let paths = all_paths(&g, &vec![1; g.k()]);
        let long = all_paths(&g, &vec![2; g.k()]);
        for (i, a) in paths.iter().enumerate() {
            for b in paths.iter().skip(i + 1).filter(|b| b.range() == a.range()) {
                let set = g.mce_set(&[a.clone(), b.clone()]);
                for tau in &long {
                    let n = set.iter().filter(|l| g.extends(tau, l)).count();
                    assert!(n <= 1, "{name}: {} extends {n} members", g.format_path(tau));
                }
            }
        }
    }
}

#[test]
fn paths_le_matches_definition() {
    for (name, g) in common::corpus() {
        let n = vec![2; g.k()];
        let mut want: Vec<Path> = all_paths(&g, &n)
            .into_iter()
            .filter(|l| {
                degrees_up_to(&n).iter().all(|p| {
                    let target = cnp_core::kgraph::deg_add(l.degree(), p);
                    p.iter().all(|&x| x == 0) || !deg_le(&target, &n) || g.paths_from(l.source(), p).is_empty()
                })
            })
            .collect();
        let mut got = g.paths_le(&n);
        want.sort();
        got.sort();
        assert_eq!(got, want, "{name}");
    }
}

// Decides exhaustiveness by scanning every path up to `bound`.
fn scan_exhaustive(g: &KGraph, v: usize, f: &[Path], bound: &[u32]) -> bool {
    all_paths(g, bound).iter().filter(|mu| mu.range() == v).all(|mu| f.iter().any(|nu| !g.mce(mu, nu).is_empty()))
}

#[test]
fn exhaustive_search_agrees_with_deep_scan() {
    for (name, g) in common::corpus() {
        let cands = all_paths(&g, &vec![1; g.k()]);
        for v in 0..g.vertices().len() {
            let local: Vec<Path> = cands.iter().filter(|p| p.range() == v && !p.is_vertex()).cloned().collect();
            for mask in 1u32..(1 << local.len().min(6)) {
                let f: Vec<Path> =
                    (0..local.len()).filter(|i| mask & (1 << i) != 0).map(|i| local[i].clone()).collect();
                let verdict = g.is_exhaustive(v, &f).unwrap();
                assert_eq!(verdict.exhaustive, scan_exhaustive(&g, v, &f, &vec![4; g.k()]), "{name} at {v}");
                if let Some(mu) = verdict.counterexample {
                    assert_eq!(mu.range(), v);
                    assert!(f.iter().all(|nu| g.mce(&mu, nu).is_empty()));
                }
            }
        }
    }
}

#[test]
fn join_degree_bound_misses_late_sources() {
    let g = common::kgraph("late_source");
    let v = g.vertex_index("v").unwrap();
    let f = vec![g.parse_path("e").unwrap()];
    assert!(scan_exhaustive(&g, v, &f, &[1, 0]));
    let verdict = g.is_exhaustive(v, &f).unwrap();
    assert!(!verdict.exhaustive);
    let mu = verdict.counterexample.unwrap();
    assert_eq!(g.format_path(&mu), "fk");
}

#[test]
fn ck_defect_vanishes_on_minimal_exhaustive_sets() {
    for (name, g) in common::corpus() {
        let ball: Vec<Vec<u32>> =
            degrees_up_to(&vec![5; g.k()]).into_iter().filter(|d| d.iter().sum::<u32>() <= 5).collect();
        for v in 0..g.vertices().len() {
            for f in g.minimal_exhaustive_sets(v, &g.default_bound()).unwrap() {
                let top = f.iter().fold(g.zero_degree(), |acc, p| deg_join(&acc, p.degree()));
                let mut seen = std::collections::BTreeSet::new();
                for q in &ball {
                    let s = deg_join(q, &top);
                    if s.iter().sum::<u32>() > 5 || !seen.insert(s.clone()) {
                        continue;
                    }
                    let d = g.ck_defect_symbolic(v, &f, &s).unwrap();
                    assert!(d.is_zero(), "{name}: defect at {s:?}");
                }
            }
        }
    }
}

#[test]
fn ck_defect_forms_agree() {
    for (name, g) in common::corpus() {
        let cands = all_paths(&g, &g.default_bound());
        for v in 0..g.vertices().len() {
            let local: Vec<Path> = cands.iter().filter(|p| p.range() == v && !p.is_vertex()).cloned().collect();
            for mask in 0u32..(1 << local.len().min(4)) {
                let f: Vec<Path> =
                    (0..local.len()).filter(|i| mask & (1 << i) != 0).map(|i| local[i].clone()).collect();
                for s in degrees_up_to(&vec![2; g.k()]) {
                    let sym = g.ck_defect_symbolic(v, &f, &s).unwrap();
                    let prod = g.ck_defect_product(v, &f, &s).unwrap();
                    let oracle = ck_defect_oracle(&g, v, &f, &s).unwrap();
                    assert_eq!(sym, prod, "{name}: forms at {s:?}");
                    assert_eq!(sym, oracle, "{name}: oracle at {s:?}");
                }
            }
        }
    }
}

#[test]
fn non_exhaustive_set_leaves_unit_defect() {
    let g = common::kgraph("source");
    let v = g.vertex_index("v").unwrap();
    let e = g.parse_path("e").unwrap();
    let f = g.parse_path("f").unwrap();
    for s in [[0, 1], [1, 1], [2, 3]] {
        let d = g.ck_defect_symbolic(v, &[e.clone()], &s).unwrap();
        let basis = g.augmented_basis_paths(&s).unwrap();
        let i = basis.iter().position(|p| *p == f).unwrap();
        assert_eq!(d.get(i, i), cnp_core::scalar::one());
        assert_eq!(cnp_core::kgraph::defect_support(&g, &s, &d).unwrap(), vec!["f".to_string()]);
    }
}

fn ck_families(g: &KGraph) -> Vec<cnp_core::psys::CompactFamily> {
    let mut out = Vec::new();
    for v in 0..g.vertices().len() {
        for f in g.minimal_exhaustive_sets(v, &g.default_bound()).unwrap() {
            out.push(g.ck_family(v, &f).unwrap());
        }
    }
    out
}

fn bridge(g: &KGraph, fam: &CkFamily) -> (bool, bool) {
    let ck = check_ck_family(g, fam, CkLevel::CuntzKrieger, &vec![2; g.k()]).unwrap();
    let rep = Representation::from_ck_family(g, fam).unwrap();
    let qs = g.monoid().ball(1);
    let (verdict, _) = check_cp(&rep, &ck_families(g), &qs, 4).unwrap();
    (ck.pass(), !verdict.failed())
}

#[test]
fn ck_relations_match_cuntz_pimsner_covariance() {
    for name in ["square", "swap", "path_loop"] {
        let g = common::kgraph(name);
        let fam = CkFamily::permutation(&g);
        if let Ok(fam) = fam {
            assert_eq!(bridge(&g, &fam), (true, true), "{name}: permutation family");
        }
    }
    for name in ["source", "grid", "late_source"] {
        let g = common::kgraph(name);
        assert!(g.is_acyclic());
        let (fam, _) = CkFamily::boundary_paths(&g).unwrap();
        assert_eq!(bridge(&g, &fam), (true, true), "{name}: boundary paths");
        let toeplitz = CkFamily::path_space(&g, &vec![2; g.k()]);
        let (ck, cp) = bridge(&g, &toeplitz);
        assert!(!ck && !cp, "{name}: path space");
        assert!(
            check_ck_family(&g, &toeplitz, CkLevel::Toeplitz, &vec![1; g.k()]).unwrap().pass(),
            "{name}: path space is Toeplitz"
        );
    }
}

#[test]
fn permutation_family_is_rejected_off_permutation_graphs() {
    assert!(CkFamily::permutation(&common::kgraph("twisted")).is_err());
    let g = common::kgraph("square");
    let fam = CkFamily::permutation(&g).unwrap();
    let rep = Representation::from_ck_family(&g, &fam).unwrap();
    let r = cnp_core::covariance::check_axioms(&rep, &cnp_core::covariance::Axiom::parse_list("T,N").unwrap(), 3, None)
        .unwrap();
    assert!(r.pass(), "{:?}", r.verdicts);
    assert!(matches!(r.verdicts[0].1, Verdict::Pass));
}
