#![allow(dead_code)]

use std::path::PathBuf;

use cnp_core::kgraph::KGraph;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub const KGRAPHS: &[&str] = &["square", "swap", "source", "path_loop", "two_loops", "grid", "twisted", "late_source"];

pub fn kgraph(name: &str) -> KGraph {
    KGraph::from_json_str(&read(&format!("kgraphs/{name}.json"))).unwrap()
}

pub fn corpus() -> Vec<(&'static str, KGraph)> {
    KGRAPHS.iter().map(|n| (*n, kgraph(n))).collect()
}

pub mod oracle {
    use cnp_core::kgraph::{deg_join, deg_sub, KGraph, Path};
    use cnp_core::qlo::{LubResult, MonoidElement, QloMonoid};

    pub fn degrees_up_to(bound: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &b in bound {
            out = out.into_iter().flat_map(|d| (0..=b).map(move |x| [d.clone(), vec![x]].concat())).collect();
        }
        out
    }

    pub fn all_paths(g: &KGraph, bound: &[u32]) -> Vec<Path> {
        degrees_up_to(bound).iter().flat_map(|d| g.paths_of_degree(d).to_vec()).collect()
    }

    /// Paths of degree `d(mu) v d(nu)` that factor through both `mu` and `nu`.
    pub fn common_extensions(g: &KGraph, mu: &Path, nu: &Path) -> Vec<Path> {
        let d = deg_join(mu.degree(), nu.degree());
        g.paths_of_degree(&d)
            .iter()
            .filter(|l| {
                let ext = |a: &Path| {
                    let rest = deg_sub(&d, a.degree());
                    g.paths_of_degree(&rest).iter().any(|b| g.compose(a, b).as_ref() == Some(*l))
                };
                ext(mu) && ext(nu)
            })
            .cloned()
            .collect()
    }

    /// All generator words of length at most `len`.
    pub fn words(rank: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..len {
            frontier = frontier
                .into_iter()
                .flat_map(|w: Vec<usize>| (0..rank).map(move |x| [w.clone(), vec![x]].concat()))
                .collect();
            out.extend(frontier.iter().cloned());
        }
        out
    }

    /// `p <= r` when some spelling of `r` starts with a spelling of `p`.
    pub fn below(m: &QloMonoid, all: &[Vec<usize>], p: &MonoidElement, r: &MonoidElement) -> bool {
        let lp = m.length(p);
        lp <= m.length(r)
            && all.iter().any(|w| w.len() == m.length(r) && m.from_letters(w) == *r && m.from_letters(&w[..lp]) == *p)
    }

    /// Searches all products of length at most `|p| + |q|` for common upper
    /// bounds; any finite join is that short.
    pub fn brute_lub(m: &QloMonoid, p: &MonoidElement, q: &MonoidElement) -> LubResult {
        let all = words(m.rank(), m.length(p) + m.length(q));
        let mut ups: Vec<MonoidElement> =
            all.iter().map(|w| m.from_letters(w)).filter(|r| below(m, &all, p, r) && below(m, &all, q, r)).collect();
        ups.sort_by_key(|r| m.length(r));
        ups.dedup();
        match ups.first() {
            None => LubResult::Infinity,
            Some(r) => {
                assert!(ups.iter().all(|u| below(m, &all, r, u)), "least upper bound is not least");
                LubResult::Finite(r.clone())
            }
        }
    }
}
