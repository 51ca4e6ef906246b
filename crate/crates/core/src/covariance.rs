//! Matrix representations of product systems and the covariance checks
//! (T1)-(T3), (N), (CP), Fowler and Katsura covariance.
//!
//! All identities are (bi)linear, so they are checked exactly on fibre
//! bases. Truncated representations carry a [`Window`]; an identity that
//! raises degree by `p` is then only compared on basis columns with room
//! for `p` below the truncation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path as FsPath;
use std::sync::{Arc, RwLock};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kgraph::{deg_add, deg_le, CkFamily, KGraph};
use crate::linalg::Matrix;
use crate::par;
use crate::psys::{CompactFamily, FamilyOrigin, FockSpace, ProductSystem};
use crate::qlo::MonoidElement;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Window {
    /// Fock-type truncation: basis vector `c` lives in a component of
    /// length `lengths[c]`; components longer than `radius` are dropped.
    Ball { lengths: Vec<usize>, radius: usize },
    /// Path-space truncation of a k-graph to degrees at most `bound`.
    Box { degrees: Vec<Vec<u32>>, bound: Vec<u32> },
}

impl Window {
    fn columns(&self, ps: &ProductSystem, raise: &MonoidElement) -> Vec<usize> {
        match self {
            Window::Ball { lengths, radius } => {
                let h = ps.monoid().length(raise);
                lengths.iter().enumerate().filter(|(_, l)| *l + h <= *radius).map(|(i, _)| i).collect()
            }
            Window::Box { degrees, bound } => {
                let r = match raise {
                    MonoidElement::Grid(r) => r.clone(),
                    _ => vec![0; bound.len()],
                };
                degrees.iter().enumerate().filter(|(_, d)| deg_le(&deg_add(d, &r), bound)).map(|(i, _)| i).collect()
            }
        }
    }

    fn merge(a: Option<&Window>, da: usize, b: Option<&Window>, db: usize) -> Option<Window> {
        match (a, b) {
            (None, None) => None,
            (Some(Window::Ball { lengths, radius }), None) => {
                let mut l = lengths.clone();
                l.extend(std::iter::repeat(0).take(db));
                Some(Window::Ball { lengths: l, radius: *radius })
            }
            (None, Some(Window::Ball { lengths, radius })) => {
                let mut l = vec![0; da];
                l.extend(lengths);
                Some(Window::Ball { lengths: l, radius: *radius })
            }
            (Some(Window::Ball { lengths: la, radius: ra }), Some(Window::Ball { lengths: lb, radius: rb })) => {
                let r = *ra.min(rb);
                let shift = |l: &Vec<usize>, rr: usize| l.iter().map(|x| x + (rr - r)).collect::<Vec<_>>();
                let mut l = shift(la, *ra);
                l.extend(shift(lb, *rb));
                Some(Window::Ball { lengths: l, radius: r })
            }
            (Some(Window::Box { degrees, bound }), None) => {
                let mut d = degrees.clone();
                d.extend(std::iter::repeat(vec![0; bound.len()]).take(db));
                Some(Window::Box { degrees: d, bound: bound.clone() })
            }
            (None, Some(Window::Box { degrees, bound })) => {
                let mut d = vec![vec![0; bound.len()]; da];
                d.extend(degrees.iter().cloned());
                Some(Window::Box { degrees: d, bound: bound.clone() })
            }
            _ => None,
        }
    }
}

/// `psi_p` for finitely many `p`, stored as one matrix per fibre basis
/// vector. For generated systems only `e` and the generators are stored;
/// other fibres are products along canonical words.
#[derive(Debug)]
pub struct Representation {
    system: Arc<ProductSystem>,
    dim: usize,
    explicit: BTreeMap<MonoidElement, Vec<Matrix>>,
    window: Option<Window>,
    cache: RwLock<HashMap<MonoidElement, Arc<Vec<Matrix>>>>,
}

impl Clone for Representation {
    fn clone(&self) -> Self {
        Representation {
            system: self.system.clone(),
            dim: self.dim,
            explicit: self.explicit.clone(),
            window: self.window.clone(),
            cache: RwLock::default(),
        }
    }
}

impl Representation {
    pub fn new(system: Arc<ProductSystem>, dim: usize, fibres: Vec<(MonoidElement, Vec<Matrix>)>) -> Result<Self> {
        let mut explicit = BTreeMap::new();
        for (p, ms) in fibres {
            let fibre = system.fibre(&p)?;
            if ms.len() != fibre.module.dim() {
                return Err(Error::Shape(format!(
                    "fibre {} has dimension {} but {} matrices were given",
                    system.monoid().format(&p),
                    fibre.module.dim(),
                    ms.len()
                )));
            }
            if ms.iter().any(|m| m.rows() != dim || m.cols() != dim) {
                return Err(Error::Shape(format!(
                    "matrices for fibre {} must be {dim}x{dim}",
                    system.monoid().format(&p)
                )));
            }
            explicit.insert(p, ms);
        }
        let m = system.monoid();
        if !explicit.contains_key(&m.identity()) {
            return Err(Error::MissingFibre("a representation needs psi_e".into()));
        }
        if system.is_generated() {
            for i in 0..m.rank() {
                if !explicit.contains_key(&m.generator(i)) {
                    return Err(Error::MissingFibre(format!("no matrices for generator {}", m.generators()[i])));
                }
            }
        }
        Ok(Representation { system, dim, explicit, window: None, cache: RwLock::default() })
    }

    pub fn with_window(mut self, window: Window) -> Result<Self> {
        let n = match &window {
            Window::Ball { lengths, .. } => lengths.len(),
            Window::Box { degrees, .. } => degrees.len(),
        };
        if n != self.dim {
            return Err(Error::Shape("window does not match the representation dimension".into()));
        }
        self.window = Some(window);
        Ok(self)
    }

    pub fn system(&self) -> &Arc<ProductSystem> {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> Option<&Window> {
        self.window.as_ref()
    }

    pub fn explicit(&self) -> &BTreeMap<MonoidElement, Vec<Matrix>> {
        &self.explicit
    }

    pub fn covers(&self, p: &MonoidElement) -> bool {
        self.explicit.contains_key(p) || (self.system.is_generated() && self.system.monoid().check(p).is_ok())
    }

    /// Elements covered by the representation with length at most `radius`.
    pub fn covered(&self, radius: usize) -> Vec<MonoidElement> {
        let m = self.system.monoid();
        if self.system.is_generated() {
            m.ball(radius)
        } else {
            let mut v: Vec<_> = self.explicit.keys().filter(|p| m.length(p) <= radius).cloned().collect();
            m.sort_elements(&mut v);
            v
        }
    }

    /// `psi_p` on each basis vector of `X_p`.
    pub fn psi(&self, p: &MonoidElement) -> Result<Arc<Vec<Matrix>>> {
        if let Some(ms) = self.explicit.get(p) {
            return Ok(Arc::new(ms.clone()));
        }
        if let Some(ms) = self.cache.read().expect("cache lock").get(p) {
            return Ok(ms.clone());
        }
        if !self.system.is_generated() {
            return Err(Error::MissingFibre(format!("no matrices for fibre {}", self.system.monoid().format(p))));
        }
        let m = self.system.monoid();
        let word = m.letters(p).expect("generated monoid");
        let fibre = self.system.fibre(p)?;
        let gens: Vec<&Vec<Matrix>> = (0..m.rank()).map(|i| &self.explicit[&m.generator(i)]).collect();
        let out: Vec<Matrix> = fibre
            .seqs()
            .iter()
            .map(|seq| {
                seq.iter().zip(&word).skip(1).fold(gens[word[0]][seq[0]].clone(), |acc, (&b, &x)| acc.mul(&gens[x][b]))
            })
            .collect();
        let out = Arc::new(out);
        self.cache.write().expect("cache lock").insert(p.clone(), out.clone());
        Ok(out)
    }

    /// `psi_p(x)` for a coordinate vector `x`.
    pub fn psi_vector(&self, p: &MonoidElement, x: &[Scalar]) -> Result<Matrix> {
        let ms = self.psi(p)?;
        if x.len() != ms.len() {
            return Err(Error::Shape("vector does not match the fibre".into()));
        }
        let mut out = Matrix::zeros(self.dim, self.dim);
        for (c, m) in x.iter().zip(ms.iter()) {
            if !c.is_zero() {
                out = out.add(&m.scale(c));
            }
        }
        Ok(out)
    }

    /// `psi^(p)(T) = sum_ij T_ij psi_p(xi_i) psi_p(xi_j)^*`.
    pub fn psi_compact(&self, p: &MonoidElement, t: &Matrix) -> Result<Matrix> {
        self.system.fibre(p)?.module.check_operator(t)?;
        let ms = self.psi(p)?;
        let mut out = Matrix::zeros(self.dim, self.dim);
        let mut adj: HashMap<usize, Matrix> = HashMap::new();
        for (i, j, c) in t.entries() {
            let a = adj.entry(j).or_insert_with(|| ms[j].adjoint());
            out = out.add(&ms[i].mul(a).scale(c));
        }
        Ok(out)
    }

    /// Creation operators on the truncated Fock space of length `radius`.
    pub fn fock(system: Arc<ProductSystem>, radius: usize) -> Result<Self> {
        let space = FockSpace::new(&system, radius, false)?;
        let m = system.monoid().clone();
        let elems: Vec<MonoidElement> = if system.is_generated() {
            std::iter::once(m.identity()).chain((0..m.rank()).map(|i| m.generator(i))).collect()
        } else {
            m.ball(radius)
        };
        let mut fibres = Vec::new();
        for p in elems {
            let f = system.fibre(&p)?;
            let ms = (0..f.module.dim())
                .map(|b| space.creation(&p, &f.module.basis_vector(b)))
                .collect::<Result<Vec<_>>>()?;
            fibres.push((p, ms));
        }
        let window = Window::Ball { lengths: space.basis_lengths(), radius };
        let dim = space.dim();
        drop(space);
        Representation::new(system, dim, fibres)?.with_window(window)
    }

    /// `psi_e(delta_v) = s_v`, `psi_i(delta_e) = s_e` for a family of
    /// matrices on a k-graph.
    pub fn from_ck_family(g: &KGraph, fam: &CkFamily) -> Result<Self> {
        let ps = g.product_system()?;
        let m = ps.monoid().clone();
        let mut fibres = vec![(m.identity(), fam.vertex.clone())];
        for c in 0..g.k() {
            let ms = (0..g.edges().len()).filter(|&e| g.edges()[e].color == c).map(|e| fam.edge[e].clone()).collect();
            fibres.push((m.generator(c), ms));
        }
        let rep = Representation::new(ps, fam.dim, fibres)?;
        match &fam.window {
            Some((degrees, bound)) => rep.with_window(Window::Box { degrees: degrees.clone(), bound: bound.clone() }),
            None => Ok(rep),
        }
    }

    pub fn direct_sum(&self, other: &Representation) -> Result<Self> {
        if !Arc::ptr_eq(&self.system, &other.system) {
            return Err(Error::ModuleMismatch("direct sum of representations of different systems".into()));
        }
        let n = self.dim + other.dim;
        let mut fibres = Vec::new();
        for (p, a) in &self.explicit {
            let b =
                other.explicit.get(p).ok_or_else(|| Error::MissingFibre("summands cover different fibres".into()))?;
            let ms = a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let mut m = Matrix::zeros(n, n);
                    m.add_block(0, 0, x);
                    m.add_block(self.dim, self.dim, y);
                    m
                })
                .collect();
            fibres.push((p.clone(), ms));
        }
        let rep = Representation::new(self.system.clone(), n, fibres)?;
        match Window::merge(self.window.as_ref(), self.dim, other.window.as_ref(), other.dim) {
            Some(w) => rep.with_window(w),
            None => Ok(rep),
        }
    }

    /// Replaces the stored `psi_p(xi_b)` by `c psi_p(xi_b)`.
    pub fn with_scaled(&self, p: &MonoidElement, b: usize, c: &Scalar) -> Result<Self> {
        let mut out = self.clone();
        let ms =
            out.explicit.get_mut(p).ok_or_else(|| Error::MissingFibre("only stored fibres can be rescaled".into()))?;
        let m = ms.get_mut(b).ok_or_else(|| Error::Shape("basis index out of range".into()))?;
        *m = m.scale(c);
        Ok(out)
    }

    /// `{"dim": N, "fibres": {"e": [matrix, ...], "a": [...]}, "window": ...}`.
    pub fn from_json(v: &Value, system: Arc<ProductSystem>, base: Option<&FsPath>) -> Result<Self> {
        let v = crate::psys::resolve_json(v, base)?;
        let dim =
            v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Parse("representation needs `dim`".into()))?
                as usize;
        let obj = v
            .get("fibres")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("representation needs a `fibres` object".into()))?;
        let mut fibres = Vec::new();
        for (k, ms) in obj {
            let p = system.monoid().parse(k).map_err(|e| Error::Parse(format!("fibres.{k}: {e}")))?;
            let arr = ms.as_array().ok_or_else(|| Error::Parse(format!("fibres.{k} must be a list of matrices")))?;
            let mats = arr
                .iter()
                .enumerate()
                .map(|(i, m)| Matrix::from_json(m).map_err(|e| Error::Parse(format!("fibres.{k}[{i}]: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            fibres.push((p, mats));
        }
        let rep = Representation::new(system, dim, fibres)?;
        match v.get("window") {
            Some(w) => {
                let lengths: Vec<usize> = serde_json::from_value(w["lengths"].clone())
                    .map_err(|e| Error::Parse(format!("window.lengths: {e}")))?;
                let radius = w["radius"].as_u64().ok_or_else(|| Error::Parse("window.radius missing".into()))? as usize;
                rep.with_window(Window::Ball { lengths, radius })
            }
            None => Ok(rep),
        }
    }

    pub fn to_json(&self) -> Value {
        let m = self.system.monoid();
        let fibres: serde_json::Map<String, Value> = self
            .explicit
            .iter()
            .map(|(p, ms)| (m.format(p), Value::Array(ms.iter().map(Matrix::to_json).collect())))
            .collect();
        let mut out = json!({"dim": self.dim, "fibres": fibres});
        if let Some(Window::Ball { lengths, radius }) = &self.window {
            out["window"] = json!({"lengths": lengths, "radius": radius});
        }
        out
    }

    fn agree(&self, a: &Matrix, b: &Matrix, raise: &MonoidElement) -> bool {
        match &self.window {
            None => a == b,
            Some(w) => {
                let cols = w.columns(&self.system, raise);
                let rows: Vec<usize> = (0..self.dim).collect();
                a.select(&rows, &cols) == b.select(&rows, &cols)
            }
        }
    }

    fn is_degenerate(&self) -> bool {
        self.explicit[&self.system.monoid().identity()].iter().all(Matrix::is_zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    T1,
    T2,
    T3,
    N,
    CP,
    Fowler,
    Katsura,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::T1 => "T1",
            Axiom::T2 => "T2",
            Axiom::T3 => "T3",
            Axiom::N => "N",
            Axiom::CP => "CP",
            Axiom::Fowler => "Fowler",
            Axiom::Katsura => "Katsura",
        };
        f.write_str(s)
    }
}

impl Axiom {
    /// Parses a comma-separated list; `T` stands for `T1,T2,T3`.
    pub fn parse_list(s: &str) -> Result<Vec<Axiom>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "t" => out.extend([Axiom::T1, Axiom::T2, Axiom::T3]),
                "t1" => out.push(Axiom::T1),
                "t2" => out.push(Axiom::T2),
                "t3" => out.push(Axiom::T3),
                "n" => out.push(Axiom::N),
                "cp" => out.push(Axiom::CP),
                "fowler" => out.push(Axiom::Fowler),
                "katsura" => out.push(Axiom::Katsura),
                _ => return Err(Error::Parse(format!("unknown axiom `{part}`"))),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// A violated identity with both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub identity: String,
    pub lhs: Option<Matrix>,
    pub rhs: Option<Matrix>,
}

impl Failure {
    fn new(identity: String, lhs: Matrix, rhs: Matrix) -> Self {
        Failure { identity, lhs: Some(lhs), rhs: Some(rhs) }
    }

    fn to_json(&self) -> Value {
        json!({
            "identity": self.identity,
            "lhs": self.lhs.as_ref().map(Matrix::to_json),
            "rhs": self.rhs.as_ref().map(Matrix::to_json),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(Vec<Failure>),
    NotApplicable(String),
    VerifiedUpToHorizon(usize),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass | Verdict::VerifiedUpToHorizon(_))
    }

    pub fn failed(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    fn from_failures(failures: Vec<Failure>) -> Self {
        if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(failures)
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::Pass => json!({"verdict": "Pass"}),
            Verdict::Fail(fs) => json!({
                "verdict": "Fail",
                "failures": fs.len(),
                "witnesses": fs.iter().take(3).map(Failure::to_json).collect::<Vec<_>>(),
            }),
            Verdict::NotApplicable(r) => json!({"verdict": "NotApplicable", "reason": r}),
            Verdict::VerifiedUpToHorizon(h) => json!({"verdict": "VerifiedUpToHorizon", "horizon": h}),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CovarianceReport {
    pub verdicts: Vec<(Axiom, Verdict)>,
    pub degenerate: bool,
    /// Vertices spanning `ker(phi)^perp`, for Katsura checks.
    pub katsura_ideal: Option<Vec<usize>>,
    pub notes: Vec<String>,
}

impl CovarianceReport {
    pub fn verdict(&self, a: Axiom) -> Option<&Verdict> {
        self.verdicts.iter().find(|(x, _)| *x == a).map(|(_, v)| v)
    }

    /// No requested check failed.
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| !v.failed())
    }

    pub fn to_json(&self, ps: &ProductSystem) -> Value {
        let names = ps.algebra().vertices();
        let verdicts: Vec<Value> = self
            .verdicts
            .iter()
            .map(|(a, v)| {
                let mut j = v.to_json();
                j["axiom"] = json!(a.to_string());
                j
            })
            .collect();
        json!({
            "pass": self.pass(),
            "degenerate": self.degenerate,
            "verdicts": verdicts,
            "katsura_ideal": self.katsura_ideal.as_ref().map(|k| k.iter().map(|&v| names[v].clone()).collect::<Vec<_>>()),
            "notes": self.notes,
        })
    }
}

fn basis_vector(ps: &ProductSystem, p: &MonoidElement, i: usize) -> Result<Vec<Scalar>> {
    Ok(ps.fibre(p)?.module.basis_vector(i))
}

/// `psi_e` is a *-homomorphism: the `psi_e(delta_v)` are mutually
/// orthogonal projections.
pub fn check_t1(rep: &Representation) -> Verdict {
    let ps = &rep.system;
    let e = ps.monoid().identity();
    let ms = &rep.explicit[&e];
    let names = ps.algebra().vertices();
    let mut failures = Vec::new();
    for (v, m) in ms.iter().enumerate() {
        let sq = m.mul(m);
        if sq != *m || !m.is_hermitian() {
            failures.push(Failure::new(
                format!("psi_e(d_{0})^2 = psi_e(d_{0}) = psi_e(d_{0})^*", names[v]),
                sq,
                m.clone(),
            ));
        }
        for (w, n) in ms.iter().enumerate().skip(v + 1) {
            let prod = m.mul(n);
            if !prod.is_zero() {
                failures.push(Failure::new(
                    format!("psi_e(d_{}) psi_e(d_{}) = 0", names[v], names[w]),
                    prod,
                    Matrix::zeros(rep.dim, rep.dim),
                ));
            }
        }
    }
    Verdict::from_failures(failures)
}

/// `psi_p(x) psi_q(y) = psi_pq(xy)` on basis vectors, for covered `p, q`
/// with `|p| + |q| <= horizon`.
pub fn check_t2(rep: &Representation, horizon: usize) -> Result<Verdict> {
    let ps = &rep.system;
    let m = ps.monoid();
    let elems = rep.covered(horizon);
    let mut pairs = Vec::new();
    for p in &elems {
        for q in &elems {
            if m.length(p) + m.length(q) > horizon {
                continue;
            }
            let pq = m.multiply(p, q)?;
            if rep.covers(&pq) {
                pairs.push((p.clone(), q.clone(), pq));
            }
        }
    }
    let results = par::map(&pairs, |(p, q, pq)| -> Result<Vec<Failure>> {
        let (ap, aq) = (rep.psi(p)?, rep.psi(q)?);
        let mut out = Vec::new();
        for i in 0..ap.len() {
            let x = basis_vector(ps, p, i)?;
            for j in 0..aq.len() {
                let y = basis_vector(ps, q, j)?;
                let lhs = ap[i].mul(&aq[j]);
                let rhs = rep.psi_vector(pq, &ps.product(p, &x, q, &y)?)?;
                if !rep.agree(&lhs, &rhs, pq) {
                    out.push(Failure::new(
                        format!("psi_{0}(x{i}) psi_{1}(y{j}) = psi_{0}{1}(x{i} y{j})", m.format(p), m.format(q)),
                        lhs,
                        rhs,
                    ));
                }
            }
        }
        Ok(out)
    });
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(Verdict::from_failures(failures))
}

/// `psi_p(x)^* psi_p(y) = psi_e(<x, y>)` on basis vectors.
pub fn check_t3(rep: &Representation, horizon: usize) -> Result<Verdict> {
    let ps = &rep.system;
    let m = ps.monoid();
    let e = m.identity();
    let elems = rep.covered(horizon);
    let results = par::map(&elems, |p| -> Result<Vec<Failure>> {
        let a = rep.psi(p)?;
        let module = ps.module(p)?;
        let mut out = Vec::new();
        for i in 0..a.len() {
            let ai = a[i].adjoint();
            for j in 0..a.len() {
                let lhs = ai.mul(&a[j]);
                let inner = module.inner(&module.basis_vector(i), &module.basis_vector(j))?;
                let rhs = rep.psi_vector(&e, &inner)?;
                if !rep.agree(&lhs, &rhs, p) {
                    out.push(Failure::new(
                        format!("psi_{0}(x{i})^* psi_{0}(x{j}) = psi_e(<x{i}, x{j}>)", m.format(p)),
                        lhs,
                        rhs,
                    ));
                }
            }
        }
        Ok(out)
    });
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(Verdict::from_failures(failures))
}

/// Nica covariance on matrix units of `K(X_p)` and `K(X_q)`; the right
/// side is zero when `p v q = infinity`.
pub fn check_nica(rep: &Representation, pairs: &[(MonoidElement, MonoidElement)]) -> Result<Verdict> {
    let ps = &rep.system;
    let m = ps.monoid();
    let results = par::map(pairs, |(p, q)| -> Result<Vec<Failure>> {
        let (mp, mq) = (ps.module(p)?, ps.module(q)?);
        let lub = m.lub(p, q)?.finite();
        if let Some(r) = &lub {
            if !rep.covers(r) {
                return Err(Error::MissingFibre(format!("Nica check needs fibre {}", m.format(r))));
            }
        }
        let mut out = Vec::new();
        for (i, j) in mp.compact_basis() {
            let s = mp.matrix_unit(i, j);
            let ls = rep.psi_compact(p, &s)?;
            let is = match &lub {
                Some(r) => Some(ps.iota(p, r, &s)?),
                None => None,
            };
            for (k, l) in mq.compact_basis() {
                let t = mq.matrix_unit(k, l);
                let lhs = ls.mul(&rep.psi_compact(q, &t)?);
                let rhs = match (&lub, &is) {
                    (Some(r), Some(is)) => rep.psi_compact(r, &is.mul(&ps.iota(q, r, &t)?))?,
                    _ => Matrix::zeros(rep.dim, rep.dim),
                };
                if !rep.agree(&lhs, &rhs, &m.identity()) {
                    let target = lub.as_ref().map_or("infinity".to_string(), |r| m.format(r));
                    out.push(Failure::new(
                        format!(
                            "psi^({0})(t{i}{j}) psi^({1})(t{k}{l}) = psi^({target})(iota(S) iota(T))",
                            m.format(p),
                            m.format(q)
                        ),
                        lhs,
                        rhs,
                    ));
                }
            }
        }
        Ok(out)
    });
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(Verdict::from_failures(failures))
}

/// All pairs of elements of length at most one.
pub fn default_nica_pairs(rep: &Representation) -> Vec<(MonoidElement, MonoidElement)> {
    let elems = rep.covered(1);
    let mut out = Vec::new();
    for p in &elems {
        for q in &elems {
            out.push((p.clone(), q.clone()));
        }
    }
    out
}

/// Families `{L_{d_v}}` and `{L_{d_v}, -phi_p(d_v)}` for `p` of length one.
pub fn default_families(ps: &ProductSystem) -> Result<Vec<CompactFamily>> {
    let m = ps.monoid();
    let e = m.identity();
    let mut out = Vec::new();
    let len1: Vec<MonoidElement> = m.ball(1).into_iter().filter(|p| !m.is_identity(p)).collect();
    for v in 0..ps.algebra().len() {
        let a = ps.algebra().delta(v);
        let la = ps.phi(&e, &a)?;
        out.push(CompactFamily::new(ps, vec![(e.clone(), la.clone())], FamilyOrigin::Generic)?);
        for p in &len1 {
            let t = ps.phi(p, &a)?.scale(&-scalar::one());
            out.push(CompactFamily::new(ps, vec![(e.clone(), la.clone()), (p.clone(), t)], FamilyOrigin::Generic)?);
        }
    }
    Ok(out)
}

/// Outcome of certifying and evaluating one family.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyOutcome {
    Uncertified,
    Holds { exact: bool },
    Violated(Failure),
    NotCovered,
}

/// For each family certified by `check_cp_vanishes`, checks
/// `sum_p psi^(p)(T_p) = 0`.
pub fn check_cp(
    rep: &Representation,
    families: &[CompactFamily],
    test_qs: &[MonoidElement],
    horizon: usize,
) -> Result<(Verdict, Vec<FamilyOutcome>)> {
    let ps = &rep.system;
    let m = ps.monoid();
    let mut outcomes = Vec::new();
    for fam in families {
        let cert = ps.check_cp_vanishes(fam, test_qs, horizon)?;
        if !cert.vanishes() {
            outcomes.push(FamilyOutcome::Uncertified);
            continue;
        }
        if fam.entries.iter().any(|(p, _)| !rep.covers(p)) {
            outcomes.push(FamilyOutcome::NotCovered);
            continue;
        }
        let mut sum = Matrix::zeros(rep.dim, rep.dim);
        for (p, t) in &fam.entries {
            sum = sum.add(&rep.psi_compact(p, t)?);
        }
        let zero = Matrix::zeros(rep.dim, rep.dim);
        if rep.agree(&sum, &zero, &m.identity()) {
            outcomes.push(FamilyOutcome::Holds { exact: cert.exact });
        } else {
            let idx: Vec<String> = fam.indices().iter().map(|p| m.format(p)).collect();
            outcomes.push(FamilyOutcome::Violated(Failure::new(
                format!("sum of psi^(p)(T_p) over p in {{{}}} = 0", idx.join(",")),
                sum,
                zero,
            )));
        }
    }
    let failures: Vec<Failure> = outcomes
        .iter()
        .filter_map(|o| match o {
            FamilyOutcome::Violated(f) => Some(f.clone()),
            _ => None,
        })
        .collect();
    let held: Vec<bool> = outcomes
        .iter()
        .filter_map(|o| match o {
            FamilyOutcome::Holds { exact } => Some(*exact),
            _ => None,
        })
        .collect();
    let verdict = if !failures.is_empty() {
        Verdict::Fail(failures)
    } else if held.is_empty() {
        Verdict::NotApplicable("no family was certified to vanish for large s".into())
    } else if held.iter().all(|x| *x) {
        Verdict::Pass
    } else {
        Verdict::VerifiedUpToHorizon(horizon)
    };
    Ok((verdict, outcomes))
}

/// `psi^(p)(phi_p(d_v)) = psi_e(d_v)` for every covered `p` of length at
/// most `horizon` and every vertex. Not applicable when some `phi_p` with
/// `|p| <= horizon` fails to be injective.
pub fn check_fowler(rep: &Representation, horizon: usize) -> Result<Verdict> {
    let ps = &rep.system;
    let m = ps.monoid();
    for p in m.ball(horizon) {
        if m.is_identity(&p) {
            continue;
        }
        let k = ps.module(&p)?.kernel_phi();
        if !k.is_empty() {
            return Ok(Verdict::NotApplicable(format!(
                "hypothesis violated: phi_p is not injective at p = {}",
                m.format(&p)
            )));
        }
    }
    let e = m.identity();
    let names = ps.algebra().vertices();
    let mut failures = Vec::new();
    for p in rep.covered(horizon) {
        if m.is_identity(&p) {
            continue;
        }
        for v in 0..ps.algebra().len() {
            let a = ps.algebra().delta(v);
            let lhs = rep.psi_compact(&p, &ps.phi(&p, &a)?)?;
            let rhs = rep.psi_vector(&e, &a)?;
            if !rep.agree(&lhs, &rhs, &e) {
                failures.push(Failure::new(
                    format!("psi^({})(phi(d_{})) = psi_e(d_{})", m.format(&p), names[v], names[v]),
                    lhs,
                    rhs,
                ));
            }
        }
    }
    Ok(Verdict::from_failures(failures))
}

/// Vertices spanning `ker(phi)^perp`; every operator is compact here.
pub fn katsura_ideal(ps: &ProductSystem) -> Result<Vec<usize>> {
    let m = ps.monoid();
    let x = ps.module(&m.generator(0))?;
    let k = x.kernel_phi();
    Ok((0..ps.algebra().len()).filter(|v| !k.contains(v)).collect())
}

/// Families certifying Katsura covariance through (CP): for `v` in the
/// Katsura ideal, `{L_{d_v}, -phi(d_v)}`.
pub fn katsura_families(ps: &ProductSystem) -> Result<Vec<CompactFamily>> {
    let m = ps.monoid();
    let (e, one) = (m.identity(), m.generator(0));
    let mut out = Vec::new();
    for v in katsura_ideal(ps)? {
        let a = ps.algebra().delta(v);
        out.push(CompactFamily::new(
            ps,
            vec![(e.clone(), ps.phi(&e, &a)?), (one.clone(), ps.phi(&one, &a)?.scale(&-scalar::one()))],
            FamilyOrigin::Generic,
        )?);
    }
    Ok(out)
}

/// Katsura covariance for a representation of `X^(x)`, cross-checked
/// against (CP) on the families of [`katsura_families`].
pub fn check_katsura(rep: &Representation, horizon: usize) -> Result<CovarianceReport> {
    let ps = &rep.system;
    let m = ps.monoid();
    if m.is_lex() || m.rank() != 1 || !ps.is_generated() {
        return Err(Error::Domain("Katsura covariance is checked for tensor power systems over N".into()));
    }
    let e = m.identity();
    let one = m.generator(0);
    let ideal = katsura_ideal(ps)?;
    let names = ps.algebra().vertices();
    let mut failures = Vec::new();
    for &v in &ideal {
        let a = ps.algebra().delta(v);
        let lhs = rep.psi_compact(&one, &ps.phi(&one, &a)?)?;
        let rhs = rep.psi_vector(&e, &a)?;
        if !rep.agree(&lhs, &rhs, &e) {
            failures.push(Failure::new(format!("psi^(1)(phi(d_{0})) = psi_e(d_{0})", names[v]), lhs, rhs));
        }
    }
    let katsura = Verdict::from_failures(failures);
    let (cp, _) = check_cp(rep, &katsura_families(ps)?, &[e.clone(), one], horizon)?;
    let mut notes = Vec::new();
    if katsura.passed() != cp.passed() && !matches!(cp, Verdict::NotApplicable(_)) {
        notes.push("Katsura covariance and (CP) disagree".to_string());
    }
    Ok(CovarianceReport {
        verdicts: vec![(Axiom::Katsura, katsura), (Axiom::CP, cp)],
        degenerate: rep.is_degenerate(),
        katsura_ideal: Some(ideal),
        notes,
    })
}

/// Runs the requested checks. `families` defaults to [`default_families`].
pub fn check_axioms(
    rep: &Representation,
    axioms: &[Axiom],
    horizon: usize,
    families: Option<&[CompactFamily]>,
) -> Result<CovarianceReport> {
    let ps = &rep.system;
    let mut report = CovarianceReport { degenerate: rep.is_degenerate(), ..Default::default() };
    for &a in axioms {
        let v = match a {
            Axiom::T1 => check_t1(rep),
            Axiom::T2 => check_t2(rep, horizon)?,
            Axiom::T3 => check_t3(rep, horizon)?,
            Axiom::N => check_nica(rep, &default_nica_pairs(rep))?,
            Axiom::CP => {
                let owned;
                let fams = match families {
                    Some(f) => f,
                    None => {
                        owned = default_families(ps)?;
                        &owned
                    }
                };
                let qs = ps.monoid().ball(1);
                check_cp(rep, fams, &qs, horizon)?.0
            }
            Axiom::Fowler => check_fowler(rep, horizon)?,
            Axiom::Katsura => {
                let k = check_katsura(rep, horizon)?;
                report.katsura_ideal = k.katsura_ideal.clone();
                report.notes.extend(k.notes.iter().cloned());
                k.verdict(Axiom::Katsura).cloned().expect("present")
            }
        };
        report.verdicts.push((a, v));
    }
    Ok(report)
}
