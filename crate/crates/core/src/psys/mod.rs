//! Product systems of finite-dimensional bimodules.
//!
//! Two presentations are supported.
//!
//! * Generated systems over `N^k` or a right-angled Artin monoid: one fibre
//!   per generator plus a flip unitary `t_ij : X_i (x) X_j -> X_j (x) X_i` for
//!   every commuting pair `i < j`. The fibre over `p` is the tensor product of
//!   generator fibres along the canonical word of `p`; multiplication
//!   concatenates and then moves letters into canonical order with flips.
//! * Two-type systems over the lexicographic cone, where `X_p` only depends
//!   on whether `p` lies in `S = {0} x N` and products send
//!   `xi_i (x) eta_j` to `eta_j`.

mod augmented;
mod fock;
mod json;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::Zero;

pub use augmented::{
    AugmentedFiber, CompactFamily, DefectStatus, DefectVerdict, FamilyOrigin, InjectivityVerdict, Summand,
};
pub use fock::{DecayReport, FockExpr, FockSpace};
pub use json::{monoid_from_json, resolve as resolve_json};

use crate::error::{Error, Result};
use crate::hilbmod::{self, Bimodule, Ideal, Tensor, VertexAlgebra};
use crate::linalg::{Matrix, Vector};
use crate::qlo::{MonoidElement, MonoidKind, QloMonoid};
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug)]
enum SystemKind {
    Generated {
        generators: Vec<Bimodule>,
        /// Keyed by ordered pair `(a, b)`: the map `X_a (x) X_b -> X_b (x) X_a`.
        flips: HashMap<(usize, usize), Matrix>,
        pair_tensors: HashMap<(usize, usize), Tensor>,
    },
    Lex {
        s: Bimodule,
        ps: Bimodule,
    },
}

/// A fibre together with, for generated systems, the generator-basis
/// sequence behind each basis vector.
#[derive(Clone, Debug)]
pub struct Fibre {
    pub module: Bimodule,
    seqs: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl Fibre {
    /// For each basis vector, the generator basis vectors along the
    /// canonical word; empty for fibres that are not tensor products.
    pub fn seqs(&self) -> &[Vec<usize>] {
        &self.seqs
    }
}

/// `M_{p,q}` with the tensor product it starts from.
#[derive(Clone, Debug)]
pub struct Multiplication {
    pub tensor: Tensor,
    pub matrix: Matrix,
}

type Cache<K, V> = RwLock<HashMap<K, Arc<V>>>;

fn cached<K, V>(cache: &Cache<K, V>, key: &K, build: impl FnOnce() -> Result<V>) -> Result<Arc<V>>
where
    K: std::hash::Hash + Eq + Clone,
{
    if let Some(v) = cache.read().expect("cache lock").get(key) {
        return Ok(v.clone());
    }
    let v = Arc::new(build()?);
    Ok(cache.write().expect("cache lock").entry(key.clone()).or_insert(v).clone())
}

pub struct ProductSystem {
    name: String,
    monoid: QloMonoid,
    algebra: VertexAlgebra,
    kind: SystemKind,
    fibres: Cache<MonoidElement, Fibre>,
    mults: Cache<(MonoidElement, MonoidElement), Multiplication>,
    ideals: Cache<MonoidElement, Ideal>,
    augmented: Cache<MonoidElement, AugmentedFiber>,
}

impl std::fmt::Debug for ProductSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductSystem").field("name", &self.name).field("monoid", &self.monoid.name()).finish()
    }
}

fn join_labels(parts: &[&str]) -> String {
    if parts.iter().all(|p| p.chars().count() == 1) {
        parts.concat()
    } else {
        parts.join(".")
    }
}

impl ProductSystem {
    fn with_kind(name: String, monoid: QloMonoid, algebra: VertexAlgebra, kind: SystemKind) -> Self {
        ProductSystem {
            name,
            monoid,
            algebra,
            kind,
            fibres: RwLock::default(),
            mults: RwLock::default(),
            ideals: RwLock::default(),
            augmented: RwLock::default(),
        }
    }

    /// A system over `N^k` or an Artin monoid from generator fibres and flips.
    ///
    /// `flips` must contain exactly one entry `((i, j), t_ij)` with `i < j`
    /// for each commuting pair of distinct generators. Each flip must be a
    /// unitary bimodule map, and flips must satisfy the braid relation on
    /// every pairwise commuting triple, which makes the induced
    /// multiplication associative.
    pub fn generated(
        name: impl Into<String>,
        monoid: QloMonoid,
        generators: Vec<Bimodule>,
        flips: Vec<((usize, usize), Matrix)>,
    ) -> Result<Self> {
        if monoid.is_lex() {
            return Err(Error::Domain("the lexicographic cone has no finite generating set".into()));
        }
        if generators.len() != monoid.rank() {
            return Err(Error::Invalid(format!(
                "{} generator fibres for a monoid with {} generators",
                generators.len(),
                monoid.rank()
            )));
        }
        let algebra = generators[0].algebra().clone();
        if generators.iter().any(|g| *g.algebra() != algebra) {
            return Err(Error::ModuleMismatch("generator fibres live over different algebras".into()));
        }
        let mut table = HashMap::new();
        for ((i, j), m) in flips {
            if i >= j || j >= generators.len() {
                return Err(Error::Invalid(format!("flip index ({i},{j}) must satisfy i < j < rank")));
            }
            if !monoid.commutes(i, j) {
                return Err(Error::Invalid(format!(
                    "flip given for non-commuting generators {} and {}",
                    monoid.generators()[i],
                    monoid.generators()[j]
                )));
            }
            if table.insert((i, j), m).is_some() {
                return Err(Error::Invalid(format!("duplicate flip for ({i},{j})")));
            }
        }
        let n = generators.len();
        let mut pair_tensors = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && monoid.commutes(a, b) {
                    pair_tensors.insert((a, b), hilbmod::tensor(&generators[a], &generators[b])?);
                }
            }
        }
        let mut flip_table = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                if !monoid.commutes(i, j) {
                    continue;
                }
                let t = table.remove(&(i, j)).ok_or_else(|| {
                    Error::Invalid(format!(
                        "missing flip for commuting generators {} and {}",
                        monoid.generators()[i],
                        monoid.generators()[j]
                    ))
                })?;
                let from = &pair_tensors[&(i, j)];
                let to = &pair_tensors[&(j, i)];
                if t.rows() != to.module.dim() || t.cols() != from.module.dim() {
                    return Err(Error::Shape(format!(
                        "flip ({i},{j}) is {}x{}, expected {}x{}",
                        t.rows(),
                        t.cols(),
                        to.module.dim(),
                        from.module.dim()
                    )));
                }
                if !t.is_unitary() {
                    return Err(Error::Invalid(format!("flip ({i},{j}) is not unitary")));
                }
                from.module.check_bimodule_map(&to.module, &t)?;
                flip_table.insert((j, i), t.adjoint());
                flip_table.insert((i, j), t);
            }
        }
        let sys = ProductSystem::with_kind(
            name.into(),
            monoid,
            algebra,
            SystemKind::Generated { generators, flips: flip_table, pair_tensors },
        );
        sys.check_braid_relations()?;
        Ok(sys)
    }

    /// The system `X^(x)` over `N` with `X^(x)_n = X^{(x) n}`.
    pub fn tensor_power(x: Bimodule) -> Result<Self> {
        ProductSystem::generated("tensor power", QloMonoid::grid(1), vec![x], vec![])
    }

    /// `C^P`: one-dimensional fibres, multiplication of complex numbers.
    pub fn trivial(monoid: QloMonoid) -> Self {
        let algebra = VertexAlgebra::named(&["*"]);
        if monoid.is_lex() {
            let one = Bimodule::coefficient(&algebra);
            return ProductSystem::with_kind(
                "trivial".into(),
                monoid,
                algebra,
                SystemKind::Lex { s: one.clone(), ps: one },
            );
        }
        let gens: Vec<Bimodule> = (0..monoid.rank())
            .map(|i| {
                Bimodule::new(algebra.clone(), vec![format!("1_{}", monoid.generators()[i])], vec![0], vec![Some(0)])
                    .expect("one-dimensional fibre")
            })
            .collect();
        let mut flips = Vec::new();
        for i in 0..monoid.rank() {
            for j in i + 1..monoid.rank() {
                if monoid.commutes(i, j) {
                    flips.push(((i, j), Matrix::identity(1)));
                }
            }
        }
        ProductSystem::generated("trivial", monoid, gens, flips).expect("trivial system is valid")
    }

    /// The system over the lexicographic cone in which the hypotheses of the
    /// injectivity lemma fail: `A = C^2`, `phi_S = id`,
    /// `phi_{P \ S}(z1, z2) = (z1, z1)`.
    pub fn lex_counterexample() -> Self {
        let algebra = VertexAlgebra::numbered(2);
        let labels = vec!["e1".to_string(), "e2".to_string()];
        let s = Bimodule::new(algebra.clone(), labels.clone(), vec![0, 1], vec![Some(0), Some(1)]).expect("X_S");
        let ps = Bimodule::new(algebra.clone(), labels, vec![0, 1], vec![Some(0), Some(0)]).expect("X_P\\S");
        ProductSystem::lex_two_type("lex counterexample", s, ps).expect("counterexample system is valid")
    }

    /// A two-type system over the lexicographic cone. Basis vector `i` of
    /// either module must have source `i`.
    pub fn lex_two_type(name: impl Into<String>, s: Bimodule, ps: Bimodule) -> Result<Self> {
        let algebra = s.algebra().clone();
        if *ps.algebra() != algebra {
            return Err(Error::ModuleMismatch("the two fibre types live over different algebras".into()));
        }
        for m in [&s, &ps] {
            if m.dim() != algebra.len() || (0..m.dim()).any(|i| m.source(i) != i || m.range(i).is_none()) {
                return Err(Error::Invalid("basis vector i of each fibre type must have source i and a range".into()));
            }
        }
        let sys = ProductSystem::with_kind(name.into(), QloMonoid::lex(), algebra, SystemKind::Lex { s, ps });
        for p in [MonoidElement::Lex(0, 1), MonoidElement::Lex(1, 0)] {
            for q in [MonoidElement::Lex(0, 1), MonoidElement::Lex(1, 0)] {
                let m = sys.mult(&p, &q)?;
                let target = sys.fibre(&sys.monoid.multiply(&p, &q)?)?;
                if !m.matrix.is_unitary() {
                    return Err(Error::Invalid("two-type multiplication is not unitary".into()));
                }
                m.tensor.module.check_bimodule_map(&target.module, &m.matrix)?;
            }
        }
        Ok(sys)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn monoid(&self) -> &QloMonoid {
        &self.monoid
    }

    pub fn algebra(&self) -> &VertexAlgebra {
        &self.algebra
    }

    /// Generator fibres of a generated system.
    pub fn generators(&self) -> Option<&[Bimodule]> {
        match &self.kind {
            SystemKind::Generated { generators, .. } => Some(generators),
            SystemKind::Lex { .. } => None,
        }
    }

    /// Stored flip `t_ij` for `i < j`.
    pub fn flip(&self, i: usize, j: usize) -> Option<&Matrix> {
        match &self.kind {
            SystemKind::Generated { flips, .. } => flips.get(&(i, j)),
            SystemKind::Lex { .. } => None,
        }
    }

    pub fn fibre(&self, p: &MonoidElement) -> Result<Arc<Fibre>> {
        self.monoid.check(p)?;
        cached(&self.fibres, p, || self.build_fibre(p))
    }

    pub fn module(&self, p: &MonoidElement) -> Result<Bimodule> {
        Ok(self.fibre(p)?.module.clone())
    }

    fn build_fibre(&self, p: &MonoidElement) -> Result<Fibre> {
        if self.monoid.is_identity(p) {
            return Ok(Fibre { module: Bimodule::coefficient(&self.algebra), seqs: vec![], index: HashMap::new() });
        }
        match &self.kind {
            SystemKind::Lex { s, ps } => {
                let MonoidElement::Lex(m, _) = p else { unreachable!("checked") };
                let module = if *m == 0 { s.clone() } else { ps.clone() };
                Ok(Fibre { module, seqs: vec![], index: HashMap::new() })
            }
            SystemKind::Generated { generators, .. } => {
                let word = self.monoid.letters(p).expect("finitely generated");
                let mut seqs: Vec<Vec<usize>> = (0..generators[word[0]].dim()).map(|b| vec![b]).collect();
                for &x in &word[1..] {
                    let g = &generators[x];
                    let mut next = Vec::new();
                    for seq in &seqs {
                        let prev = &generators[word[seq.len() - 1]];
                        let src = prev.source(*seq.last().unwrap());
                        for b in 0..g.dim() {
                            if g.range(b) == Some(src) {
                                let mut s = seq.clone();
                                s.push(b);
                                next.push(s);
                            }
                        }
                    }
                    seqs = next;
                }
                let mut labels = Vec::new();
                let mut source = Vec::new();
                let mut range = Vec::new();
                for seq in &seqs {
                    let parts: Vec<&str> = seq.iter().zip(&word).map(|(&b, &x)| generators[x].label(b)).collect();
                    labels.push(join_labels(&parts));
                    source.push(generators[word[word.len() - 1]].source(seq[seq.len() - 1]));
                    range.push(generators[word[0]].range(seq[0]));
                }
                let module = Bimodule::new(self.algebra.clone(), labels, source, range)?;
                let index = seqs.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
                Ok(Fibre { module, seqs, index })
            }
        }
    }

    /// `M_{p,q} : X_p (x) X_q -> X_{pq}`.
    pub fn mult(&self, p: &MonoidElement, q: &MonoidElement) -> Result<Arc<Multiplication>> {
        self.monoid.check(p)?;
        self.monoid.check(q)?;
        cached(&self.mults, &(p.clone(), q.clone()), || self.build_mult(p, q))
    }

    fn build_mult(&self, p: &MonoidElement, q: &MonoidElement) -> Result<Multiplication> {
        let fp = self.fibre(p)?;
        let fq = self.fibre(q)?;
        let pq = self.monoid.multiply(p, q)?;
        let fpq = self.fibre(&pq)?;
        let tensor = hilbmod::tensor(&fp.module, &fq.module)?;
        let mut matrix = Matrix::zeros(fpq.module.dim(), tensor.pairs.len());
        let lex = matches!(self.kind, SystemKind::Lex { .. });
        for (col, &(i, j)) in tensor.pairs.iter().enumerate() {
            if self.monoid.is_identity(p) || lex {
                matrix.set(j, col, scalar::one());
            } else if self.monoid.is_identity(q) {
                matrix.set(i, col, scalar::one());
            } else {
                let mut seq = fp.seqs[i].clone();
                seq.extend(&fq.seqs[j]);
                let mut word = self.monoid.letters(p).unwrap();
                word.extend(self.monoid.letters(q).unwrap());
                let target = self.monoid.letters(&pq).unwrap();
                for (s, z) in self.reorder(&word, &target, seq)? {
                    let row = *fpq.index.get(&s).ok_or_else(|| {
                        Error::Invalid("reordered tensor is not a basis vector of the product fibre".into())
                    })?;
                    matrix.add_at(row, col, &z);
                }
            }
        }
        Ok(Multiplication { tensor, matrix })
    }

    /// Expresses the generator-basis sequence `seq` over `word` as a
    /// combination of sequences over `target`, a rearrangement of `word`
    /// that keeps the relative order of equal letters.
    fn reorder(&self, word: &[usize], target: &[usize], seq: Vec<usize>) -> Result<Vec<(Vec<usize>, Scalar)>> {
        let mut rank = vec![0usize; word.len()];
        let mut used = vec![false; word.len()];
        for (pos, &x) in target.iter().enumerate() {
            let k = (0..word.len())
                .find(|&k| !used[k] && word[k] == x)
                .ok_or_else(|| Error::Invalid("target word is not a rearrangement".into()))?;
            used[k] = true;
            rank[k] = pos;
        }
        let mut swaps = Vec::new();
        let mut w = word.to_vec();
        loop {
            let Some(k) = (0..w.len().saturating_sub(1)).find(|&k| rank[k] > rank[k + 1]) else { break };
            swaps.push(k);
            rank.swap(k, k + 1);
            w.swap(k, k + 1);
        }
        self.apply_swaps(word, vec![(seq, scalar::one())], &swaps)
    }

    fn apply_swaps(
        &self,
        word: &[usize],
        mut state: Vec<(Vec<usize>, Scalar)>,
        swaps: &[usize],
    ) -> Result<Vec<(Vec<usize>, Scalar)>> {
        let SystemKind::Generated { flips, pair_tensors, .. } = &self.kind else {
            unreachable!("only generated systems reorder words")
        };
        let mut w = word.to_vec();
        for &k in swaps {
            let (a, b) = (w[k], w[k + 1]);
            let flip = flips.get(&(a, b)).ok_or_else(|| {
                Error::Invalid(format!(
                    "no flip for generators {} and {}",
                    self.monoid.generators()[a],
                    self.monoid.generators()[b]
                ))
            })?;
            let from = &pair_tensors[&(a, b)];
            let to = &pair_tensors[&(b, a)];
            let mut next: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
            for (seq, c) in state {
                let col = from
                    .position(seq[k], seq[k + 1])
                    .ok_or_else(|| Error::Invalid("sequence is not composable".into()))?;
                for (row, z) in flip.column(col).into_iter().enumerate() {
                    if z.is_zero() {
                        continue;
                    }
                    let (x, y) = to.pairs[row];
                    let mut s = seq.clone();
                    s[k] = x;
                    s[k + 1] = y;
                    *next.entry(s).or_insert_with(scalar::zero) += &c * z;
                }
            }
            state = next.into_iter().filter(|(_, z)| !z.is_zero()).collect();
            w.swap(k, k + 1);
        }
        Ok(state)
    }

    fn check_braid_relations(&self) -> Result<()> {
        let SystemKind::Generated { generators, .. } = &self.kind else { return Ok(()) };
        let n = generators.len();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    if !(self.monoid.commutes(i, j) && self.monoid.commutes(j, l) && self.monoid.commutes(i, l)) {
                        continue;
                    }
                    let word = [i, j, l];
                    let mut seqs = Vec::new();
                    for a in 0..generators[i].dim() {
                        for b in 0..generators[j].dim() {
                            if generators[j].range(b) != Some(generators[i].source(a)) {
                                continue;
                            }
                            for c in 0..generators[l].dim() {
                                if generators[l].range(c) == Some(generators[j].source(b)) {
                                    seqs.push(vec![a, b, c]);
                                }
                            }
                        }
                    }
                    for seq in seqs {
                        let one = vec![(seq, scalar::one())];
                        let left = self.apply_swaps(&word, one.clone(), &[0, 1, 0])?;
                        let right = self.apply_swaps(&word, one, &[1, 0, 1])?;
                        if left != right {
                            return Err(Error::Invalid(format!(
                                "flips for {}, {}, {} violate the braid relation",
                                self.monoid.generators()[i],
                                self.monoid.generators()[j],
                                self.monoid.generators()[l]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `x y` for `x` in `X_p`, `y` in `X_q`.
    pub fn product(&self, p: &MonoidElement, x: &[Scalar], q: &MonoidElement, y: &[Scalar]) -> Result<Vector> {
        let m = self.mult(p, q)?;
        Ok(m.matrix.apply(&m.tensor.elementary(x, y)?))
    }

    /// `phi_p(a)`.
    pub fn phi(&self, p: &MonoidElement, a: &[Scalar]) -> Result<Matrix> {
        self.fibre(p)?.module.left_action(a)
    }

    /// `iota^r_p(S)` for `S` on `X_p`; zero when `p` does not divide `r`.
    pub fn iota(&self, p: &MonoidElement, r: &MonoidElement, s: &Matrix) -> Result<Matrix> {
        let fp = self.fibre(p)?;
        fp.module.check_operator(s)?;
        let fr = self.fibre(r)?;
        let Some(q) = self.monoid.quotient(p, r)? else {
            return Ok(Matrix::zeros(fr.module.dim(), fr.module.dim()));
        };
        if self.monoid.is_identity(p) {
            let a: Vec<Scalar> = (0..self.algebra.len()).map(|v| s.get(v, v)).collect();
            return fr.module.left_action(&a);
        }
        if self.monoid.is_identity(&q) {
            return Ok(s.clone());
        }
        let m = self.mult(p, &q)?;
        hilbmod::iota(s, &m.tensor, &m.matrix)
    }

    /// Checks `M_{pq,r}(M_{p,q} (x) 1) = M_{p,qr}(1 (x) M_{q,r})` on basis triples.
    pub fn check_associativity(&self, p: &MonoidElement, q: &MonoidElement, r: &MonoidElement) -> Result<bool> {
        let (fp, fq, fr) = (self.fibre(p)?, self.fibre(q)?, self.fibre(r)?);
        let pq = self.monoid.multiply(p, q)?;
        let qr = self.monoid.multiply(q, r)?;
        for i in 0..fp.module.dim() {
            let x = fp.module.basis_vector(i);
            for j in 0..fq.module.dim() {
                let y = fq.module.basis_vector(j);
                let xy = self.product(p, &x, q, &y)?;
                for k in 0..fr.module.dim() {
                    let z = fr.module.basis_vector(k);
                    let left = self.product(&pq, &xy, r, &z)?;
                    let right = self.product(p, &x, &qr, &self.product(q, &y, r, &z)?)?;
                    if left != right {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Whether `phi_p` is injective for every `p` of length at most `radius`.
    pub fn phi_injective_up_to(&self, radius: usize) -> Result<bool> {
        for p in self.monoid.ball(radius) {
            if !self.fibre(&p)?.module.phi_injective() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_generated(&self) -> bool {
        matches!(self.kind, SystemKind::Generated { .. })
    }

    fn lex_types(&self) -> Option<(&Bimodule, &Bimodule)> {
        match &self.kind {
            SystemKind::Lex { s, ps } => Some((s, ps)),
            SystemKind::Generated { .. } => None,
        }
    }

    pub fn monoid_kind(&self) -> &MonoidKind {
        self.monoid.kind()
    }
}
