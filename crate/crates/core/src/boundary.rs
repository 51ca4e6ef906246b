//! The one-dimensional system `C^P`, isometric representations of `P`,
//! foundation-set relations and the boundary relations of right-angled
//! Artin monoids.

use serde_json::{json, Value};

use crate::covariance::{Failure, Verdict};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::psys::{CompactFamily, DefectStatus, FamilyOrigin, ProductSystem};
use crate::qlo::{FoundationVerdict, LubResult, MonoidElement, MonoidKind, QloMonoid};
use crate::scalar;

/// `C^P`.
pub fn trivial_system(m: QloMonoid) -> ProductSystem {
    ProductSystem::trivial(m)
}

/// Generator matrices `V_s`, extended multiplicatively along canonical words.
#[derive(Clone, Debug)]
pub struct IsometryFamily {
    monoid: QloMonoid,
    dim: usize,
    gens: Vec<Matrix>,
    /// Truncation: the word length of each basis index and the radius.
    window: Option<(Vec<usize>, usize)>,
    labels: Option<Vec<String>>,
}

impl IsometryFamily {
    /// Validates shapes and that commuting generators get commuting matrices.
    pub fn new(monoid: QloMonoid, gens: Vec<Matrix>) -> Result<Self> {
        if monoid.is_lex() {
            return Err(Error::Domain("isometry families need a finitely generated monoid".into()));
        }
        if gens.len() != monoid.rank() {
            return Err(Error::Shape(format!("expected {} generator matrices, got {}", monoid.rank(), gens.len())));
        }
        let dim = gens.first().map_or(0, Matrix::rows);
        if gens.iter().any(|g| g.rows() != dim || g.cols() != dim) {
            return Err(Error::Shape(format!("all generator matrices must be {dim}x{dim}")));
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if monoid.commutes(i, j) && gens[i].mul(&gens[j]) != gens[j].mul(&gens[i]) {
                    return Err(Error::Invalid(format!(
                        "generators {} and {} commute in the monoid but their matrices do not",
                        monoid.generators()[i],
                        monoid.generators()[j]
                    )));
                }
            }
        }
        Ok(IsometryFamily { monoid, dim, gens, window: None, labels: None })
    }

    /// `{"monoid": ..., "generators": [matrix, ...]}`.
    pub fn from_json(v: &Value, base: Option<&std::path::Path>) -> Result<Self> {
        let m = crate::psys::monoid_from_json(
            v.get("monoid").ok_or_else(|| Error::Parse("family needs `monoid`".into()))?,
            base,
        )?;
        let gens = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("family needs a `generators` array".into()))?
            .iter()
            .enumerate()
            .map(|(i, g)| Matrix::from_json(g).map_err(|e| Error::Parse(format!("generators[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        IsometryFamily::new(m, gens)
    }

    pub fn monoid(&self) -> &QloMonoid {
        &self.monoid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_truncated(&self) -> bool {
        self.window.is_some()
    }

    pub fn generator(&self, i: usize) -> &Matrix {
        &self.gens[i]
    }

    /// `V_p`.
    pub fn v(&self, p: &MonoidElement) -> Result<Matrix> {
        self.monoid.check(p)?;
        let word = self.monoid.letters(p).expect("finitely generated");
        Ok(word.iter().fold(Matrix::identity(self.dim), |acc, &x| acc.mul(&self.gens[x])))
    }

    /// Basis indices whose word length leaves room for `raise` more letters.
    pub fn interior(&self, raise: usize) -> Vec<usize> {
        match &self.window {
            None => (0..self.dim).collect(),
            Some((lengths, radius)) => {
                lengths.iter().enumerate().filter(|(_, l)| **l + raise <= *radius).map(|(i, _)| i).collect()
            }
        }
    }

    fn agree(&self, a: &Matrix, b: &Matrix, raise: usize) -> bool {
        let cols = self.interior(raise);
        let rows: Vec<usize> = (0..self.dim).collect();
        a.select(&rows, &cols) == b.select(&rows, &cols)
    }

    pub fn label(&self, i: usize) -> String {
        self.labels.as_ref().map_or_else(|| i.to_string(), |l| l[i].clone())
    }
}

/// `l^2(D)` for `D` the ball of the given radius, with `V_p delta_q =
/// delta_{pq}` when `pq` is in `D` and zero otherwise.
pub struct TruncatedToeplitz {
    pub window: Vec<MonoidElement>,
    pub family: IsometryFamily,
}

impl TruncatedToeplitz {
    pub fn new(monoid: QloMonoid, radius: usize) -> Result<Self> {
        if monoid.is_lex() {
            return Err(Error::Domain("truncated Toeplitz families need a finitely generated monoid".into()));
        }
        let window = monoid.ball(radius);
        let index = |q: &MonoidElement| window.iter().position(|x| x == q);
        let n = window.len();
        let mut gens = Vec::new();
        for i in 0..monoid.rank() {
            let g = monoid.generator(i);
            let mut m = Matrix::zeros(n, n);
            for (j, q) in window.iter().enumerate() {
                if let Some(k) = index(&monoid.multiply(&g, q)?) {
                    m.set(k, j, scalar::one());
                }
            }
            gens.push(m);
        }
        let lengths = window.iter().map(|q| monoid.length(q)).collect();
        let labels = window.iter().map(|q| monoid.format(q)).collect();
        let mut family = IsometryFamily::new(monoid, gens)?;
        family.window = Some((lengths, radius));
        family.labels = Some(labels);
        Ok(TruncatedToeplitz { window, family })
    }

    /// `{q in D : pq in D}`.
    pub fn interior_of(&self, p: &MonoidElement) -> Vec<MonoidElement> {
        let m = &self.family.monoid;
        let (_, radius) = self.family.window.as_ref().expect("truncated");
        self.window.iter().filter(|q| m.length(q) + m.length(p) <= *radius).cloned().collect()
    }
}

/// `V_p V_p^* V_q V_q^* = V_{p v q} V_{p v q}^*`, or `0` when `p v q` is
/// infinite.
pub fn check_semigroup_nica(fam: &IsometryFamily, pairs: &[(MonoidElement, MonoidElement)]) -> Result<Verdict> {
    let m = &fam.monoid;
    let mut failures = Vec::new();
    for (p, q) in pairs {
        let (vp, vq) = (fam.v(p)?, fam.v(q)?);
        let lhs = vp.mul(&vp.adjoint()).mul(&vq).mul(&vq.adjoint());
        let rhs = match m.lub(p, q)? {
            LubResult::Finite(r) => {
                let vr = fam.v(&r)?;
                vr.mul(&vr.adjoint())
            }
            LubResult::Infinity => Matrix::zeros(fam.dim, fam.dim),
        };
        if !fam.agree(&lhs, &rhs, 0) {
            failures.push(Failure {
                identity: format!("V_{0} V_{0}^* V_{1} V_{1}^* = V_(p v q) V_(p v q)^*", m.format(p), m.format(q)),
                lhs: Some(lhs),
                rhs: Some(rhs),
            });
        }
    }
    Ok(if failures.is_empty() { Verdict::Pass } else { Verdict::Fail(failures) })
}

/// The value of `prod_{p in F} (1 - iota^s_p(1 (x) 1^*))` on the
/// one-dimensional space `X^{<=s}`, computed two ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryDefect {
    /// 1 exactly when no member of `F` divides `s`.
    pub value: u8,
    /// `1 + sum_{H nonempty, v H finite} (-1)^|H| [v H <= s]`.
    pub inclusion_exclusion: i64,
}

impl BoundaryDefect {
    pub fn operator(&self) -> Matrix {
        Matrix::diagonal(&[scalar::int(i64::from(self.value))])
    }
}

pub fn boundary_defect(m: &QloMonoid, f: &[MonoidElement], s: &MonoidElement) -> Result<BoundaryDefect> {
    if f.is_empty() {
        return Err(Error::Domain("F must be nonempty".into()));
    }
    m.check(s)?;
    let mut value = 1u8;
    for p in f {
        if m.divides(p, s)? {
            value = 0;
        }
    }
    let mut ie = 1i64;
    for (h, join) in subset_joins(m, f)? {
        if let Some(j) = join {
            if m.divides(&j, s)? {
                ie += if h % 2 == 0 { 1 } else { -1 };
            }
        }
    }
    Ok(BoundaryDefect { value, inclusion_exclusion: ie })
}

/// `(|H|, v H)` for every nonempty `H` in `F`, `None` for infinite joins.
fn subset_joins(m: &QloMonoid, f: &[MonoidElement]) -> Result<Vec<(usize, Option<MonoidElement>)>> {
    if f.len() > 20 {
        return Err(Error::Domain("at most 20 elements in F".into()));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << f.len()) {
        let h: Vec<&MonoidElement> = (0..f.len()).filter(|i| mask & (1 << i) != 0).map(|i| &f[i]).collect();
        out.push((h.len(), m.lub_all(h)?.finite()));
    }
    Ok(out)
}

/// `T_e = 1` and `T_{v H} += (-1)^|H|` for nonempty `H` with finite join.
pub fn foundation_family(ps: &ProductSystem, f: &[MonoidElement]) -> Result<CompactFamily> {
    let m = ps.monoid();
    let mut entries = vec![(m.identity(), Matrix::identity(1))];
    for (h, join) in subset_joins(m, f)? {
        if let Some(j) = join {
            let sign = if h % 2 == 0 { scalar::one() } else { -scalar::one() };
            entries.push((j, Matrix::diagonal(&[sign])));
        }
    }
    CompactFamily::new(ps, entries, FamilyOrigin::FoundationInclusionExclusion)
}

pub enum RelationMode<'a> {
    /// Certify through the covariance engine on `C^P`.
    Symbolic { test_qs: &'a [MonoidElement], horizon: usize },
    /// Evaluate `prod (1 - W_p W_p^*)` on a concrete family.
    Matrix(&'a IsometryFamily),
}

#[derive(Clone, Debug)]
pub struct BoundaryReport {
    pub foundation: String,
    pub verdict: Verdict,
    /// Basis indices where a matrix defect is nonzero.
    pub defect_support: Vec<String>,
    pub witnesses: Vec<(String, String)>,
}

impl BoundaryReport {
    pub fn to_json(&self) -> Value {
        let mut v = self.verdict.to_json();
        v["foundation"] = json!(self.foundation);
        v["defect_support"] = json!(self.defect_support);
        v["witnesses"] = json!(self.witnesses.iter().map(|(q, r)| json!({"q": q, "r": r})).collect::<Vec<_>>());
        v
    }
}

/// `prod_{p in F} (1 - W_p W_p^*) = 0`.
pub fn check_boundary_relation(m: &QloMonoid, f: &[MonoidElement], mode: RelationMode) -> Result<BoundaryReport> {
    let foundation = match m.is_foundation_set(f)? {
        FoundationVerdict::False { counterexample } => {
            return Ok(BoundaryReport {
                foundation: "false".into(),
                verdict: Verdict::NotApplicable(format!(
                    "not a foundation set: p v q is infinite for every p in F at q = {}",
                    m.format(&counterexample)
                )),
                defect_support: vec![],
                witnesses: vec![],
            });
        }
        FoundationVerdict::True { certificate } => certificate,
        FoundationVerdict::TrueUpToHorizon { horizon } => format!("verified up to length {horizon}"),
    };
    match mode {
        RelationMode::Symbolic { test_qs, horizon } => {
            let ps = trivial_system(m.clone());
            let fam = foundation_family(&ps, f)?;
            let d = ps.check_cp_vanishes(&fam, test_qs, horizon)?;
            let (verdict, witnesses) = match &d.status {
                DefectStatus::VanishesForLargeS { witnesses } => (
                    if d.exact { Verdict::Pass } else { Verdict::VerifiedUpToHorizon(horizon) },
                    witnesses.iter().map(|(q, r)| (m.format(q), m.format(r))).collect(),
                ),
                DefectStatus::FailsAt { q, s, .. } => (
                    Verdict::Fail(vec![Failure {
                        identity: format!(
                            "inclusion-exclusion defect vanishes above q = {} (nonzero at s = {})",
                            m.format(q),
                            m.format(s)
                        ),
                        lhs: None,
                        rhs: None,
                    }]),
                    vec![],
                ),
                DefectStatus::InconclusiveAtHorizon { .. } => (Verdict::VerifiedUpToHorizon(horizon), vec![]),
            };
            Ok(BoundaryReport { foundation, verdict, defect_support: vec![], witnesses })
        }
        RelationMode::Matrix(fam) => {
            let id = Matrix::identity(fam.dim);
            let mut prod = id.clone();
            for p in f {
                let w = fam.v(p)?;
                prod = prod.mul(&id.sub(&w.mul(&w.adjoint())));
            }
            let support: Vec<String> =
                (0..fam.dim).filter(|&j| !crate::linalg::vec_is_zero(&prod.column(j))).map(|j| fam.label(j)).collect();
            let verdict = if support.is_empty() {
                Verdict::Pass
            } else {
                let zero = Matrix::zeros(fam.dim, fam.dim);
                Verdict::Fail(vec![Failure {
                    identity: "prod_{p in F} (1 - W_p W_p^*) = 0".into(),
                    lhs: Some(prod),
                    rhs: Some(zero),
                }])
            };
            Ok(BoundaryReport { foundation, verdict, defect_support: support, witnesses: vec![] })
        }
    }
}

/// Finite components of the opposite graph; for `N^k` every generator is
/// its own component.
pub fn opp_components(m: &QloMonoid) -> Result<Vec<Vec<usize>>> {
    match m.kind() {
        MonoidKind::GridNk { k } => Ok((0..*k).map(|i| vec![i]).collect()),
        MonoidKind::Raag(_) => m.opp_components(),
        MonoidKind::LexZxZ => Err(Error::Domain("the lexicographic cone has no generators".into())),
    }
}

#[derive(Clone, Debug)]
pub struct RelationsReport {
    pub relations: Vec<(String, Verdict)>,
    /// Which basis indices each relation was checked on.
    pub interiors: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl RelationsReport {
    pub fn pass(&self) -> bool {
        self.relations.iter().all(|(_, v)| !v.failed())
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass(),
            "relations": self.relations.iter().map(|(n, v)| {
                let mut j = v.to_json();
                j["relation"] = json!(n);
                j
            }).collect::<Vec<_>>(),
            "interiors": self.interiors.iter().map(|(n, i)| json!({"relation": n, "checked_on": i})).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

fn fail(identity: String, lhs: Matrix, rhs: Matrix) -> Failure {
    Failure { identity, lhs: Some(lhs), rhs: Some(rhs) }
}

/// Relations (1)-(4) of the boundary quotient of a right-angled Artin
/// monoid, restricted to `which` (a subset of 1..=4).
///
/// (1) `T_s^* T_s = 1`; (2) `T_s T_t = T_t T_s` and `T_s^* T_t = T_t T_s^*`
/// for adjacent `s, t`, together with the derivation
/// `W_s^* W_t = W_s^* (W_s W_s^* W_t W_t^*) W_t`; (3) `T_s^* T_t = 0` for
/// distinct non-adjacent `s, t`; (4) `prod_{s in C} (1 - T_s T_s^*) = 0`
/// for every finite component `C` of the opposite graph. For truncated
/// families (4) is certified through the covariance engine and the matrix
/// defect is only reported.
pub fn raag_relations_report(fam: &IsometryFamily, which: &[u8]) -> Result<RelationsReport> {
    let m = &fam.monoid;
    let n = m.rank();
    let gens = m.generators();
    let id = Matrix::identity(fam.dim);
    let mut relations = Vec::new();
    let mut interiors = Vec::new();
    let mut notes = Vec::new();
    let describe = |raise: usize| match &fam.window {
        None => "all basis vectors".to_string(),
        Some((_, r)) => format!("basis words of length <= {}", r.saturating_sub(raise)),
    };
    let adj: Vec<Matrix> = fam.gens.iter().map(Matrix::adjoint).collect();
    if which.contains(&1) {
        let mut fs = Vec::new();
        for s in 0..n {
            let lhs = adj[s].mul(&fam.gens[s]);
            if !fam.agree(&lhs, &id, 1) {
                fs.push(fail(format!("T_{0}^* T_{0} = 1", gens[s]), lhs, id.clone()));
            }
        }
        relations.push(("1".to_string(), verdict(fs)));
        interiors.push(("1".to_string(), describe(1)));
    }
    if which.contains(&2) {
        let mut fs = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if s == t || !m.commutes(s, t) {
                    continue;
                }
                let (a, b) = (fam.gens[s].mul(&fam.gens[t]), fam.gens[t].mul(&fam.gens[s]));
                if s < t && !fam.agree(&a, &b, 2) {
                    fs.push(fail(format!("T_{0} T_{1} = T_{1} T_{0}", gens[s], gens[t]), a, b));
                }
                let lhs = adj[s].mul(&fam.gens[t]);
                let rhs = fam.gens[t].mul(&adj[s]);
                if !fam.agree(&lhs, &rhs, 1) {
                    fs.push(fail(format!("T_{0}^* T_{1} = T_{1} T_{0}^*", gens[s], gens[t]), lhs.clone(), rhs));
                }
                let ps_ = fam.gens[s].mul(&adj[s]);
                let pt = fam.gens[t].mul(&adj[t]);
                let derived = adj[s].mul(&ps_).mul(&pt).mul(&fam.gens[t]);
                if !fam.agree(&lhs, &derived, 1) {
                    fs.push(fail(
                        format!("W_{0}^* W_{1} = W_{0}^* (W_{0} W_{0}^* W_{1} W_{1}^*) W_{1}", gens[s], gens[t]),
                        lhs,
                        derived,
                    ));
                }
            }
        }
        relations.push(("2".to_string(), verdict(fs)));
        interiors.push(("2".to_string(), describe(2)));
    }
    if which.contains(&3) {
        let mut fs = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if s == t || m.commutes(s, t) {
                    continue;
                }
                let lhs = adj[s].mul(&fam.gens[t]);
                let zero = Matrix::zeros(fam.dim, fam.dim);
                if !fam.agree(&lhs, &zero, 1) {
                    fs.push(fail(format!("T_{0}^* T_{1} = 0", gens[s], gens[t]), lhs, zero));
                }
            }
        }
        relations.push(("3".to_string(), verdict(fs)));
        interiors.push(("3".to_string(), describe(1)));
    }
    if which.contains(&4) {
        let mut verdicts = Vec::new();
        for comp in opp_components(m)? {
            let f: Vec<MonoidElement> = comp.iter().map(|&i| m.generator(i)).collect();
            let names: Vec<&str> = comp.iter().map(|&i| gens[i].as_str()).collect();
            if fam.is_truncated() {
                let qs = m.ball(1);
                let sym = check_boundary_relation(m, &f, RelationMode::Symbolic { test_qs: &qs, horizon: 4 })?;
                let mat = check_boundary_relation(m, &f, RelationMode::Matrix(fam))?;
                notes.push(format!(
                    "component {{{}}}: certified through (CP); truncated matrix defect supported on [{}]",
                    names.join(","),
                    mat.defect_support.join(",")
                ));
                verdicts.push(sym.verdict);
            } else {
                verdicts.push(check_boundary_relation(m, &f, RelationMode::Matrix(fam))?.verdict);
            }
        }
        let fs: Vec<Failure> = verdicts
            .iter()
            .filter_map(|v| match v {
                Verdict::Fail(f) => Some(f.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        let v = if !fs.is_empty() {
            Verdict::Fail(fs)
        } else if let Some(h) = verdicts.iter().find_map(|v| match v {
            Verdict::VerifiedUpToHorizon(h) => Some(*h),
            _ => None,
        }) {
            Verdict::VerifiedUpToHorizon(h)
        } else {
            Verdict::Pass
        };
        relations.push(("4".to_string(), v));
        interiors
            .push(("4".to_string(), if fam.is_truncated() { "symbolic, on C^P".to_string() } else { describe(0) }));
    }
    Ok(RelationsReport { relations, interiors, notes })
}

fn verdict(fs: Vec<Failure>) -> Verdict {
    if fs.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail(fs)
    }
}
