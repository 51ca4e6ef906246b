//! Finite-dimensional right-Hilbert `C^V`-`C^V` bimodules.
//!
//! A bimodule is described by an orthonormal basis in which every basis
//! vector `xi` sits over a source vertex (`xi . delta_v = xi` iff
//! `v = source(xi)`) and a range vertex (`phi(delta_v) xi = xi` iff
//! `v = range(xi)`). A missing range means `phi(A) xi = 0`.
//!
//! Adjointable operators are exactly the matrices that do not mix source
//! blocks; at finite dimension they are all compact.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::scalar::{self, Scalar};

/// Vertex subsets of `V`; every ideal of `C^V` has this form.
pub type Ideal = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexAlgebra {
    vertices: Vec<String>,
}

impl VertexAlgebra {
    pub fn new(vertices: Vec<String>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Invalid("vertex set must be nonempty".into()));
        }
        let distinct: BTreeSet<&String> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::Invalid("duplicate vertex names".into()));
        }
        Ok(VertexAlgebra { vertices })
    }

    pub fn named(names: &[&str]) -> Self {
        VertexAlgebra::new(names.iter().map(|s| s.to_string()).collect()).expect("valid vertex names")
    }

    /// `C^n` with vertices `1..=n`.
    pub fn numbered(n: usize) -> Self {
        VertexAlgebra::new((1..=n).map(|i| i.to_string()).collect()).expect("valid vertex names")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn all(&self) -> Ideal {
        (0..self.len()).collect()
    }

    /// `delta_v` as an element of `C^V`.
    pub fn delta(&self, v: usize) -> Vector {
        crate::linalg::unit(self.len(), v)
    }

    pub fn is_zero_on(&self, a: &[Scalar], ideal: &Ideal) -> bool {
        ideal.iter().all(|&v| a[v].is_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bimodule {
    algebra: VertexAlgebra,
    labels: Vec<String>,
    source: Vec<usize>,
    range: Vec<Option<usize>>,
}

#[derive(Deserialize)]
struct BasisJson {
    id: String,
    source: String,
    range: Option<String>,
}

#[derive(Deserialize)]
struct BimoduleJson {
    vertices: Vec<String>,
    basis: Vec<BasisJson>,
}

impl Bimodule {
    pub fn new(
        algebra: VertexAlgebra,
        labels: Vec<String>,
        source: Vec<usize>,
        range: Vec<Option<usize>>,
    ) -> Result<Self> {
        if labels.len() != source.len() || labels.len() != range.len() {
            return Err(Error::Shape("labels, sources and ranges differ in length".into()));
        }
        let n = algebra.len();
        if source.iter().any(|&s| s >= n) || range.iter().flatten().any(|&r| r >= n) {
            return Err(Error::Invalid("basis vector refers to a vertex outside the algebra".into()));
        }
        Ok(Bimodule { algebra, labels, source, range })
    }

    /// `A` as a bimodule over itself, basis `delta_v`.
    pub fn coefficient(algebra: &VertexAlgebra) -> Self {
        let n = algebra.len();
        Bimodule {
            algebra: algebra.clone(),
            labels: algebra.vertices().to_vec(),
            source: (0..n).collect(),
            range: (0..n).map(Some).collect(),
        }
    }

    pub fn zero(algebra: &VertexAlgebra) -> Self {
        Bimodule { algebra: algebra.clone(), labels: vec![], source: vec![], range: vec![] }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let raw: BimoduleJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let algebra = VertexAlgebra::new(raw.vertices)?;
        let lookup = |name: &str, what: &str, id: &str| {
            algebra
                .index(name)
                .ok_or_else(|| Error::Invalid(format!("basis vector `{id}` has unknown {what} `{name}`")))
        };
        let mut labels = Vec::new();
        let mut source = Vec::new();
        let mut range = Vec::new();
        for b in &raw.basis {
            source.push(lookup(&b.source, "source", &b.id)?);
            range.push(match &b.range {
                Some(r) => Some(lookup(r, "range", &b.id)?),
                None => None,
            });
            labels.push(b.id.clone());
        }
        Bimodule::new(algebra, labels, source, range)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = self.algebra.vertices();
        let basis: Vec<_> = (0..self.dim())
            .map(|i| {
                serde_json::json!({
                    "id": self.labels[i],
                    "source": v[self.source[i]],
                    "range": self.range[i].map(|r| v[r].clone()),
                })
            })
            .collect();
        serde_json::json!({ "vertices": v, "basis": basis })
    }

    pub fn algebra(&self) -> &VertexAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn source(&self, i: usize) -> usize {
        self.source[i]
    }

    pub fn range(&self, i: usize) -> Option<usize> {
        self.range[i]
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        crate::linalg::unit(self.dim(), i)
    }

    fn check_vector(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::ModuleMismatch(format!(
                "vector of length {} in a module of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_algebra_element(&self, a: &[Scalar]) -> Result<()> {
        if a.len() != self.algebra.len() {
            return Err(Error::ModuleMismatch(format!(
                "algebra element of length {} over {} vertices",
                a.len(),
                self.algebra.len()
            )));
        }
        Ok(())
    }

    /// `<x, y>_A`, conjugate-linear in `x`.
    pub fn inner(&self, x: &[Scalar], y: &[Scalar]) -> Result<Vector> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        let mut out = vec![scalar::zero(); self.algebra.len()];
        for i in 0..self.dim() {
            out[self.source[i]] += x[i].conj() * &y[i];
        }
        Ok(out)
    }

    /// `x . a`
    pub fn right_act(&self, x: &[Scalar], a: &[Scalar]) -> Result<Vector> {
        self.check_vector(x)?;
        self.check_algebra_element(a)?;
        Ok((0..self.dim()).map(|i| &x[i] * &a[self.source[i]]).collect())
    }

    /// `phi(a) x`
    pub fn left_act(&self, a: &[Scalar], x: &[Scalar]) -> Result<Vector> {
        self.check_vector(x)?;
        Ok(self.left_action(a)?.apply(x))
    }

    /// The operator `phi(a)`.
    pub fn left_action(&self, a: &[Scalar]) -> Result<Matrix> {
        self.check_algebra_element(a)?;
        let diag: Vec<Scalar> =
            (0..self.dim()).map(|i| self.range[i].map_or_else(scalar::zero, |r| a[r].clone())).collect();
        Ok(Matrix::diagonal(&diag))
    }

    /// Vertices `v` with `phi(delta_v) = 0`.
    pub fn kernel_phi(&self) -> Ideal {
        let hit: Ideal = self.range.iter().flatten().copied().collect();
        self.algebra.all().difference(&hit).copied().collect()
    }

    pub fn phi_injective(&self) -> bool {
        self.kernel_phi().is_empty()
    }

    /// Basis indices of `X . I`.
    pub fn restrict(&self, ideal: &Ideal) -> Vec<usize> {
        (0..self.dim()).filter(|i| ideal.contains(&self.source[*i])).collect()
    }

    /// `z -> x <y, z>_A`
    pub fn rank_one(&self, x: &[Scalar], y: &[Scalar]) -> Result<Matrix> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim() {
                if self.source[i] == self.source[j] && !y[j].is_zero() {
                    m.set(i, j, &x[i] * y[j].conj());
                }
            }
        }
        Ok(m)
    }

    /// `theta_{xi_i, xi_j}`; zero when the sources differ.
    pub fn matrix_unit(&self, i: usize, j: usize) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        if self.source[i] == self.source[j] {
            m.set(i, j, scalar::one());
        }
        m
    }

    /// Index pairs of the nonzero matrix units; they span `K(X)`.
    pub fn compact_basis(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.source[i] == self.source[j]).collect()
    }

    /// Checks that `t` is a square matrix over the basis preserving source blocks.
    pub fn check_operator(&self, t: &Matrix) -> Result<()> {
        if t.rows() != self.dim() || t.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "operator is {}x{} on a module of dimension {}",
                t.rows(),
                t.cols(),
                self.dim()
            )));
        }
        if let Some((i, j, _)) = t.entries().find(|(i, j, _)| self.source[*i] != self.source[*j]) {
            return Err(Error::Invalid(format!(
                "operator mixes source blocks at ({}, {})",
                self.labels[i], self.labels[j]
            )));
        }
        Ok(())
    }

    /// Checks that `m : self -> other` intertwines both actions.
    pub fn check_bimodule_map(&self, other: &Bimodule, m: &Matrix) -> Result<()> {
        if m.rows() != other.dim() || m.cols() != self.dim() {
            return Err(Error::Shape("bimodule map has the wrong shape".into()));
        }
        for (i, j, _) in m.entries() {
            if other.source[i] != self.source[j] || other.range[i] != self.range[j] {
                return Err(Error::Invalid(format!(
                    "map sends `{}` to `{}` with different source or range",
                    self.labels[j], other.labels[i]
                )));
            }
        }
        Ok(())
    }

    /// Adjacency counts `a[r][s]` = number of basis vectors from `s` to `r`.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.algebra.len();
        let mut a = vec![vec![0; n]; n];
        for i in 0..self.dim() {
            if let Some(r) = self.range[i] {
                a[r][self.source[i]] += 1;
            }
        }
        a
    }
}

pub fn operator_norm(t: &Matrix) -> f64 {
    t.norm()
}

/// Internal tensor product `X (x)_A Y` in its canonical basis.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub module: Bimodule,
    pub pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    left_dim: usize,
    right_dim: usize,
}

pub fn tensor(x: &Bimodule, y: &Bimodule) -> Result<Tensor> {
    if x.algebra != y.algebra {
        return Err(Error::ModuleMismatch("tensor factors live over different algebras".into()));
    }
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    let mut source = Vec::new();
    let mut range = Vec::new();
    for i in 0..x.dim() {
        for j in 0..y.dim() {
            if y.range[j] == Some(x.source[i]) {
                pairs.push((i, j));
                labels.push(format!("{}⊗{}", x.labels[i], y.labels[j]));
                source.push(y.source[j]);
                range.push(x.range[i]);
            }
        }
    }
    let index = pairs.iter().enumerate().map(|(k, p)| (*p, k)).collect();
    let module = Bimodule::new(x.algebra.clone(), labels, source, range)?;
    Ok(Tensor { module, pairs, index, left_dim: x.dim(), right_dim: y.dim() })
}

impl Tensor {
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    /// Coordinates of `x (x) y`; pairs with mismatched vertices vanish.
    pub fn elementary(&self, x: &[Scalar], y: &[Scalar]) -> Result<Vector> {
        if x.len() != self.left_dim || y.len() != self.right_dim {
            return Err(Error::ModuleMismatch("elementary tensor factors have the wrong length".into()));
        }
        Ok(self.pairs.iter().map(|&(i, j)| &x[i] * &y[j]).collect())
    }

    /// `S (x) 1`.
    pub fn lift_left(&self, s: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.pairs.len(), self.pairs.len());
        for (col, &(i, j)) in self.pairs.iter().enumerate() {
            for (r, z) in s.column(i).into_iter().enumerate() {
                if z.is_zero() {
                    continue;
                }
                if let Some(row) = self.position(r, j) {
                    out.add_at(row, col, &z);
                }
            }
        }
        out
    }
}

/// `iota(S) = M (S (x) 1) M*` for a multiplication map `M : X (x) Y -> Z`.
pub fn iota(s: &Matrix, t: &Tensor, m: &Matrix) -> Result<Matrix> {
    if s.rows() != t.left_dim || s.cols() != t.left_dim {
        return Err(Error::Shape("operator does not act on the left tensor factor".into()));
    }
    if m.cols() != t.pairs.len() {
        return Err(Error::Shape("multiplication map does not start at the tensor product".into()));
    }
    Ok(m.mul(&t.lift_left(s)).mul(&m.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn counterexample_ps() -> Bimodule {
        Bimodule::new(VertexAlgebra::numbered(2), vec!["e1".into(), "e2".into()], vec![0, 1], vec![Some(0), Some(0)])
            .unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let x = Bimodule::new(
            VertexAlgebra::named(&["v"]),
            vec!["a".into(), "b".into()],
            vec![0, 0],
            vec![Some(0), Some(0)],
        )
        .unwrap();
        let v = vec![int(2), int(3)];
        assert_eq!(x.inner(&v, &v).unwrap(), vec![int(13)]);
        assert_eq!(x.inner(&x.basis_vector(0), &x.basis_vector(1)).unwrap(), vec![int(0)]);
    }

    #[test]
    fn rank_one_examples() {
        let x = counterexample_ps();
        let r = x.rank_one(&x.basis_vector(0), &x.basis_vector(1)).unwrap();
        assert!(r.is_zero());
        let y = Bimodule::new(
            VertexAlgebra::named(&["v"]),
            vec!["a".into(), "b".into()],
            vec![0, 0],
            vec![Some(0), Some(0)],
        )
        .unwrap();
        let r = y.rank_one(&[int(2), int(0)], &y.basis_vector(1)).unwrap();
        assert_eq!(r.nnz(), 1);
        assert_eq!(r.get(0, 1), int(2));
        assert!(y.rank_one(&y.basis_vector(0), &y.basis_vector(0)).unwrap().is_projection());
    }

    #[test]
    fn counterexample_tensor_square() {
        let x = counterexample_ps();
        let t = tensor(&x, &x).unwrap();
        assert_eq!(t.pairs, vec![(0, 0), (0, 1)]);
        assert_eq!(t.module.source(1), 1);
        assert_eq!(t.module.range(1), Some(0));
        assert_eq!(x.kernel_phi(), Ideal::from([1]));
    }

    #[test]
    fn norms() {
        assert_eq!(operator_norm(&Matrix::zeros(2, 2)), 0.0);
        let d = Matrix::diagonal(&[int(3), int(4)]);
        assert!((operator_norm(&d) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn json_roundtrip() {
        let x = counterexample_ps();
        assert_eq!(Bimodule::from_value(&x.to_json()).unwrap(), x);
        assert!(Bimodule::from_json_str(r#"{"vertices":["v"],"basis":[{"id":"a","source":"w","range":"v"}]}"#).is_err());
    }
}
