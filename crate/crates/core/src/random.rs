//! Seeded random systems, representations and compact families.
//!
//! Everything is exact: unitaries are permutation matrices times
//! Gaussian-rational phases, with rational rotations on 2x2 blocks.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::covariance::Representation;
use crate::error::Result;
use crate::hilbmod::{Bimodule, VertexAlgebra};
use crate::linalg::Matrix;
use crate::psys::{CompactFamily, FamilyOrigin, ProductSystem};
use crate::qlo::{MonoidElement, QloMonoid, RaagGraph};
use crate::scalar::{self, Scalar};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A unit-modulus Gaussian rational.
pub fn phase(rng: &mut TestRng) -> Scalar {
    match rng.gen_range(0..6) {
        0 => scalar::one(),
        1 => -scalar::one(),
        2 => scalar::i_unit(),
        3 => -scalar::i_unit(),
        4 => scalar::gauss((3, 5), (4, 5)),
        _ => scalar::gauss((5, 13), (-12, 13)),
    }
}

/// A random exact unitary of size `n`.
pub fn unitary(rng: &mut TestRng, n: usize) -> Matrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut u = Matrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        u.set(i, j, phase(rng));
    }
    if n >= 2 && rng.gen_bool(0.5) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            let mut r = Matrix::identity(n);
            r.set(a, a, scalar::ratio(3, 5));
            r.set(a, b, scalar::ratio(-4, 5));
            r.set(b, a, scalar::ratio(4, 5));
            r.set(b, b, scalar::ratio(3, 5));
            u = r.mul(&u);
        }
    }
    u
}

/// A block-diagonal unitary on `X_i (x) X_j -> X_j (x) X_i` that is a
/// random unitary on each (range, source) block. The two tensor products
/// must have equal block sizes.
fn random_flip(rng: &mut TestRng, xi: &Bimodule, xj: &Bimodule) -> Result<Matrix> {
    let from = crate::hilbmod::tensor(xi, xj)?;
    let to = crate::hilbmod::tensor(xj, xi)?;
    let key = |t: &crate::hilbmod::Tensor, c: usize| (t.module.range(c), t.module.source(c));
    let mut m = Matrix::zeros(to.pairs.len(), from.pairs.len());
    let mut blocks: Vec<(Option<usize>, usize)> = (0..from.pairs.len()).map(|c| key(&from, c)).collect();
    blocks.sort();
    blocks.dedup();
    for b in blocks {
        let cols: Vec<usize> = (0..from.pairs.len()).filter(|&c| key(&from, c) == b).collect();
        let rows: Vec<usize> = (0..to.pairs.len()).filter(|&c| key(&to, c) == b).collect();
        assert_eq!(cols.len(), rows.len(), "block sizes must agree");
        let u = unitary(rng, cols.len());
        for (a, &r) in rows.iter().enumerate() {
            for (c, &col) in cols.iter().enumerate() {
                m.set(r, col, u.get(a, c));
            }
        }
    }
    Ok(m)
}

/// A bimodule over `n` vertices with adjacency matrix `adj[range][source]`.
pub fn bimodule_from_adjacency(algebra: &VertexAlgebra, adj: &[Vec<usize>], prefix: &str) -> Result<Bimodule> {
    let mut labels = Vec::new();
    let mut source = Vec::new();
    let mut range = Vec::new();
    for (r, row) in adj.iter().enumerate() {
        for (s, &k) in row.iter().enumerate() {
            for c in 0..k {
                labels.push(format!("{prefix}{r}{s}{c}"));
                source.push(s);
                range.push(Some(r));
            }
        }
    }
    Bimodule::new(algebra.clone(), labels, source, range)
}

fn mat_mul(a: &[Vec<usize>], b: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn random_perm_matrix(rng: &mut TestRng, n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    (0..n).map(|i| (0..n).map(|j| usize::from(perm[i] == j)).collect()).collect()
}

/// An adjacency matrix with every row nonzero (so `phi` is injective) and
/// at most `max_edges` edges.
fn injective_adjacency(rng: &mut TestRng, n: usize, max_edges: usize) -> Vec<Vec<usize>> {
    loop {
        let mut a = random_perm_matrix(rng, n);
        let extra = rng.gen_range(0..=max_edges.saturating_sub(n));
        for _ in 0..extra {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            a[i][j] += 1;
        }
        if a.iter().flatten().sum::<usize>() <= max_edges {
            return a;
        }
    }
}

/// Two commuting adjacency matrices with injective left actions.
fn commuting_pair(rng: &mut TestRng, n: usize, max_edges: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    loop {
        let a = injective_adjacency(rng, n, max_edges);
        let b = match rng.gen_range(0..3) {
            0 => a.clone(),
            1 => random_perm_matrix(rng, n),
            _ => injective_adjacency(rng, n, max_edges),
        };
        if mat_mul(&a, &b) == mat_mul(&b, &a) {
            return (a, b);
        }
    }
}

/// A system over `N^2` with injective left actions, fibres of dimension at
/// most 3 and random unitary flips.
pub fn grid2_system(rng: &mut TestRng) -> Result<ProductSystem> {
    let n = rng.gen_range(1..=3);
    let algebra = VertexAlgebra::numbered(n);
    let (a, b) = commuting_pair(rng, n, 3);
    let x1 = bimodule_from_adjacency(&algebra, &a, "a")?;
    let x2 = bimodule_from_adjacency(&algebra, &b, "b")?;
    let t = random_flip(rng, &x1, &x2)?;
    ProductSystem::generated("random N^2", QloMonoid::grid(2), vec![x1, x2], vec![((0, 1), t)])
}

/// A system over the Artin monoid of the path `a - b - c` with injective
/// left actions and fibres of dimension at most 3.
pub fn raag3_system(rng: &mut TestRng) -> Result<ProductSystem> {
    let n = rng.gen_range(1..=3);
    let algebra = VertexAlgebra::numbered(n);
    let b_adj = injective_adjacency(rng, n, 3);
    let a_adj = loop {
        let c = commuting_pair(rng, n, 3).0;
        if mat_mul(&c, &b_adj) == mat_mul(&b_adj, &c) {
            break c;
        }
    };
    let c_adj = loop {
        let c = injective_adjacency(rng, n, 3);
        if mat_mul(&c, &b_adj) == mat_mul(&b_adj, &c) {
            break c;
        }
    };
    let xa = bimodule_from_adjacency(&algebra, &a_adj, "a")?;
    let xb = bimodule_from_adjacency(&algebra, &b_adj, "b")?;
    let xc = bimodule_from_adjacency(&algebra, &c_adj, "c")?;
    let tab = random_flip(rng, &xa, &xb)?;
    let tbc = random_flip(rng, &xb, &xc)?;
    let m = QloMonoid::raag(RaagGraph::path(&["a", "b", "c"]));
    ProductSystem::generated("random path Artin", m, vec![xa, xb, xc], vec![((0, 1), tab), ((1, 2), tbc)])
}

/// A system over `N^2` in which each vertex receives exactly one basis
/// vector of each generator, together with phases `u` such that
/// `psi(xi) = u_xi E_{r(xi), s(xi)}` is a Cuntz-Pimsner covariant
/// representation.
pub struct PermutationSystem {
    pub system: Arc<ProductSystem>,
    pub phases: Vec<Vec<Scalar>>,
}

pub fn permutation_system(rng: &mut TestRng) -> Result<PermutationSystem> {
    let n = rng.gen_range(1..=3);
    let algebra = VertexAlgebra::numbered(n);
    let (a, b) = loop {
        let a = random_perm_matrix(rng, n);
        let b = random_perm_matrix(rng, n);
        if mat_mul(&a, &b) == mat_mul(&b, &a) {
            break (a, b);
        }
    };
    let x1 = bimodule_from_adjacency(&algebra, &a, "a")?;
    let x2 = bimodule_from_adjacency(&algebra, &b, "b")?;
    let phases: Vec<Vec<Scalar>> = [&x1, &x2].iter().map(|x| (0..x.dim()).map(|_| phase(rng)).collect()).collect();
    let from = crate::hilbmod::tensor(&x1, &x2)?;
    let to = crate::hilbmod::tensor(&x2, &x1)?;
    let mut t = Matrix::zeros(to.pairs.len(), from.pairs.len());
    for (col, &(i, j)) in from.pairs.iter().enumerate() {
        let r = x1.range(i);
        let row = (0..to.pairs.len()).find(|&k| to.module.range(k) == r).expect("one path per range");
        let (jj, ii) = to.pairs[row];
        let c = &phases[0][i] * &phases[1][j] / (&phases[1][jj] * &phases[0][ii]);
        t.set(row, col, c);
    }
    let system =
        ProductSystem::generated("random permutation N^2", QloMonoid::grid(2), vec![x1, x2], vec![((0, 1), t)])?;
    Ok(PermutationSystem { system: Arc::new(system), phases })
}

impl PermutationSystem {
    /// `psi_e(d_v) = E_vv`, `psi_i(xi) = z_i u_xi E_{r(xi), s(xi)}` where
    /// `z` is a gauge character; every such representation is covariant.
    pub fn covariant_rep(&self, gauge: [Scalar; 2]) -> Result<Representation> {
        let ps = &self.system;
        let n = ps.algebra().len();
        let m = ps.monoid();
        let mut fibres = vec![(m.identity(), (0..n).map(|v| unit_matrix(n, v, v)).collect())];
        for g in 0..2 {
            let x = &ps.generators().expect("generated")[g];
            let ms = (0..x.dim())
                .map(|b| {
                    unit_matrix(n, x.range(b).expect("range"), x.source(b)).scale(&(&gauge[g] * &self.phases[g][b]))
                })
                .collect();
            fibres.push((m.generator(g), ms));
        }
        Representation::new(ps.clone(), n, fibres)
    }
}

pub fn unit_matrix(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m.set(i, j, scalar::one());
    m
}

/// A single bimodule over at most 3 vertices with every basis vector
/// going from a larger to a smaller vertex index, so the top vertex
/// receives nothing and `ker(phi)` is nontrivial.
pub fn acyclic_bimodule(rng: &mut TestRng) -> Result<Bimodule> {
    let n = rng.gen_range(2..=3);
    let algebra = VertexAlgebra::numbered(n);
    let mut adj = vec![vec![0usize; n]; n];
    for r in 0..n {
        for s in r + 1..n {
            adj[r][s] = rng.gen_range(0..=2);
        }
    }
    if adj.iter().flatten().all(|&k| k == 0) {
        adj[0][n - 1] = 1;
    }
    let x = bimodule_from_adjacency(&algebra, &adj, "x")?;
    // labels like x010 are unambiguous but long; rename to single letters
    let labels: Vec<String> = (0..x.dim()).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    Bimodule::new(
        algebra,
        labels,
        (0..x.dim()).map(|i| x.source(i)).collect(),
        (0..x.dim()).map(|i| x.range(i)).collect(),
    )
}

/// For an acyclic single bimodule: `l^2` of the paths whose source receives
/// no edge, with `psi(xi) delta_lambda = u_xi delta_{xi lambda}`. This is
/// Katsura covariant.
pub fn boundary_rep(system: &Arc<ProductSystem>, phases: Option<&[Scalar]>) -> Result<Representation> {
    let x = system.generators().expect("generated")[0].clone();
    let kernel = x.kernel_phi();
    path_rep(system, &x, |src| kernel.contains(&src), phases)
}

/// `l^2` of all paths, a Toeplitz representation.
pub fn toeplitz_rep(system: &Arc<ProductSystem>) -> Result<Representation> {
    let x = system.generators().expect("generated")[0].clone();
    path_rep(system, &x, |_| true, None)
}

fn path_rep(
    system: &Arc<ProductSystem>,
    x: &Bimodule,
    keep_source: impl Fn(usize) -> bool,
    phases: Option<&[Scalar]>,
) -> Result<Representation> {
    let n = system.algebra().len();
    // (edge sequence, range, source); acyclic, so the search terminates
    let mut all: Vec<(Vec<usize>, usize, usize)> = (0..n).map(|v| (vec![], v, v)).collect();
    let mut frontier = all.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (seq, r, s) in &frontier {
            for b in 0..x.dim() {
                if x.source(b) == *r {
                    let mut w = vec![b];
                    w.extend(seq);
                    next.push((w, x.range(b).expect("range"), *s));
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let basis: Vec<_> = all.into_iter().filter(|(_, _, s)| keep_source(*s)).collect();
    let index: HashMap<(Vec<usize>, usize), usize> =
        basis.iter().enumerate().map(|(i, (w, r, _))| ((w.clone(), *r), i)).collect();
    let dim = basis.len();
    let m = system.monoid();
    let e_ms: Vec<Matrix> = (0..n)
        .map(|v| {
            let mut mat = Matrix::zeros(dim, dim);
            for (i, (_, r, _)) in basis.iter().enumerate() {
                if *r == v {
                    mat.set(i, i, scalar::one());
                }
            }
            mat
        })
        .collect();
    let x_ms: Vec<Matrix> = (0..x.dim())
        .map(|b| {
            let mut mat = Matrix::zeros(dim, dim);
            for (j, (w, r, _)) in basis.iter().enumerate() {
                if x.source(b) != *r {
                    continue;
                }
                let mut ext = vec![b];
                ext.extend(w);
                if let Some(&i) = index.get(&(ext, x.range(b).expect("range"))) {
                    mat.set(i, j, phases.map_or_else(scalar::one, |p| p[b].clone()));
                }
            }
            mat
        })
        .collect();
    Representation::new(system.clone(), dim, vec![(m.identity(), e_ms), (m.generator(0), x_ms)])
}

/// `{L_a, -phi_p(a)}` for a random `a` and a random generator `p`.
pub fn fowler_family(rng: &mut TestRng, ps: &ProductSystem) -> Result<CompactFamily> {
    let m = ps.monoid();
    let n = ps.algebra().len();
    let a: Vec<Scalar> = (0..n).map(|_| scalar::int(rng.gen_range(-2..=2))).collect();
    let p = random_element(rng, m, 2);
    let e = m.identity();
    CompactFamily::new(
        ps,
        vec![(e.clone(), ps.phi(&e, &a)?), (p.clone(), ps.phi(&p, &a)?.scale(&-scalar::one()))],
        FamilyOrigin::Generic,
    )
}

/// `{T, -iota^{pq}_p(T)}` for a random operator `T` on `X_p`.
pub fn lift_family(rng: &mut TestRng, ps: &ProductSystem) -> Result<CompactFamily> {
    let m = ps.monoid();
    let p = random_element(rng, m, 1);
    let q = random_element(rng, m, 1);
    let pq = m.multiply(&p, &q)?;
    let t = random_operator(rng, &ps.module(&p)?);
    CompactFamily::new(
        ps,
        vec![(p.clone(), t.clone()), (pq.clone(), ps.iota(&p, &pq, &t)?.scale(&-scalar::one()))],
        FamilyOrigin::Generic,
    )
}

/// A random module map supported on source blocks, with small integer entries.
pub fn random_operator(rng: &mut TestRng, x: &Bimodule) -> Matrix {
    let mut t = Matrix::zeros(x.dim(), x.dim());
    for (i, j) in x.compact_basis() {
        if rng.gen_bool(0.5) {
            t.set(i, j, scalar::gauss((rng.gen_range(-2..=2), 1), (rng.gen_range(-1..=1), 1)));
        }
    }
    t
}

/// A random element of length between 0 and `max_len`.
pub fn random_element(rng: &mut TestRng, m: &QloMonoid, max_len: usize) -> MonoidElement {
    let ball = m.ball(max_len);
    ball[rng.gen_range(0..ball.len())].clone()
}

/// A random element of length exactly `len` (a random word in the generators).
pub fn random_word(rng: &mut TestRng, m: &QloMonoid, len: usize) -> MonoidElement {
    let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..m.rank())).collect();
    m.from_letters(&word)
}
