//! Truncated Fock spaces `(+)_{q in D} X_q` and augmented Fock spaces
//! `(+)_{q in D} X^{<=q}` with creation operators `l(x)` and `l~(x)`.
//!
//! `D` is the ball of elements of length at most `radius`. A creation
//! operator drops every term that would leave `D`, so products of creation
//! and annihilation operators agree with the untruncated ones on components
//! with enough headroom; see [`FockSpace::columns_with_headroom`].

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::json;

use super::{AugmentedFiber, CompactFamily, ProductSystem};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::qlo::MonoidElement;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct Component {
    pub q: MonoidElement,
    pub offset: usize,
    pub dim: usize,
    aug: Option<Arc<AugmentedFiber>>,
}

pub struct FockSpace<'a> {
    ps: &'a ProductSystem,
    components: Vec<Component>,
    index: HashMap<MonoidElement, usize>,
    augmented: bool,
    radius: usize,
    dim: usize,
}

impl<'a> FockSpace<'a> {
    pub fn new(ps: &'a ProductSystem, radius: usize, augmented: bool) -> Result<Self> {
        let mut components = Vec::new();
        let mut index = HashMap::new();
        let mut offset = 0;
        for q in ps.monoid().ball(radius) {
            let (dim, aug) = if augmented {
                let a = ps.augmented_fiber(&q)?;
                (a.dim(), Some(a))
            } else {
                (ps.fibre(&q)?.module.dim(), None)
            };
            index.insert(q.clone(), components.len());
            components.push(Component { q, offset, dim, aug });
            offset += dim;
        }
        Ok(FockSpace { ps, components, index, augmented, radius, dim: offset })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, q: &MonoidElement) -> Option<&Component> {
        self.index.get(q).map(|&i| &self.components[i])
    }

    /// Length of the component each basis vector lives in.
    pub fn basis_lengths(&self) -> Vec<usize> {
        let m = self.ps.monoid();
        self.components.iter().flat_map(|c| std::iter::repeat(m.length(&c.q)).take(c.dim)).collect()
    }

    /// Basis vectors in components of length at most `radius - headroom`.
    pub fn columns_with_headroom(&self, headroom: usize) -> Vec<usize> {
        let Some(limit) = self.radius.checked_sub(headroom) else { return vec![] };
        self.basis_lengths().into_iter().enumerate().filter(|(_, l)| *l <= limit).map(|(i, _)| i).collect()
    }

    pub fn component_columns(&self, q: &MonoidElement) -> Vec<usize> {
        self.component(q).map_or_else(Vec::new, |c| (c.offset..c.offset + c.dim).collect())
    }

    /// `l(x)` or `l~(x)` for `x` in `X_p`.
    pub fn creation(&self, p: &MonoidElement, x: &[Scalar]) -> Result<Matrix> {
        let m = self.ps.monoid();
        let mut out = Matrix::zeros(self.dim, self.dim);
        for c in &self.components {
            let target = m.multiply(p, &c.q)?;
            let Some(tc) = self.component(&target) else { continue };
            match (&c.aug, &tc.aug) {
                (Some(src), Some(dst)) => {
                    for sm in &src.summands {
                        let pr = m.multiply(p, &sm.p)?;
                        let fr = self.ps.fibre(&sm.p)?;
                        let dst_sm = dst.summand(&pr);
                        for (k, &b) in sm.basis.iter().enumerate() {
                            let y = self.ps.product(p, x, &sm.p, &fr.module.basis_vector(b))?;
                            for (i, z) in y.iter().enumerate() {
                                if num_traits::Zero::is_zero(z) {
                                    continue;
                                }
                                let row = dst_sm
                                    .and_then(|d| d.basis.iter().position(|&bb| bb == i).map(|pos| d.offset + pos))
                                    .ok_or_else(|| {
                                        Error::Invalid("product left the augmented summand it should land in".into())
                                    })?;
                                out.add_at(tc.offset + row, c.offset + sm.offset + k, z);
                            }
                        }
                    }
                }
                _ => {
                    let fq = self.ps.fibre(&c.q)?;
                    for j in 0..c.dim {
                        let y = self.ps.product(p, x, &c.q, &fq.module.basis_vector(j))?;
                        for (i, z) in y.iter().enumerate() {
                            if !num_traits::Zero::is_zero(z) {
                                out.add_at(tc.offset + i, c.offset + j, z);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block diagonal operator acting on each `X^{<=t}` by `cp_defect(fam, t)`.
    pub fn cp_defect_operator(&self, fam: &CompactFamily) -> Result<Matrix> {
        if !self.augmented {
            return Err(Error::Domain("the covariance defect acts on the augmented Fock space".into()));
        }
        let mut out = Matrix::zeros(self.dim, self.dim);
        for c in &self.components {
            out.add_block(c.offset, c.offset, &self.ps.cp_defect(fam, &c.q)?);
        }
        Ok(out)
    }

    pub fn evaluate(&self, expr: &FockExpr, fam: &CompactFamily) -> Result<Matrix> {
        Ok(match expr {
            FockExpr::Create(p, x) => self.creation(p, x)?,
            FockExpr::Annihilate(p, x) => self.creation(p, x)?.adjoint(),
            FockExpr::CpDefect => self.cp_defect_operator(fam)?,
            FockExpr::Scaled(c, e) => self.evaluate(e, fam)?.scale(c),
            FockExpr::Product(fs) => {
                let mut acc = Matrix::identity(self.dim);
                for f in fs {
                    acc = acc.mul(&self.evaluate(f, fam)?);
                }
                acc
            }
            FockExpr::Sum(ts) => {
                let mut acc = Matrix::zeros(self.dim, self.dim);
                for t in ts {
                    acc = acc.add(&self.evaluate(t, fam)?);
                }
                acc
            }
        })
    }
}

/// Formal expressions in creation operators, their adjoints and the
/// covariance defect.
#[derive(Clone, Debug)]
pub enum FockExpr {
    Create(MonoidElement, Vector),
    Annihilate(MonoidElement, Vector),
    CpDefect,
    Scaled(Scalar, Box<FockExpr>),
    Product(Vec<FockExpr>),
    Sum(Vec<FockExpr>),
}

impl FockExpr {
    /// `(net length change, largest intermediate increase)` when applied
    /// right to left; sums take the worst case of their terms.
    fn profile(&self, ps: &ProductSystem) -> (i64, i64) {
        let len = |p: &MonoidElement| ps.monoid().length(p) as i64;
        match self {
            FockExpr::Create(p, _) => (len(p), len(p)),
            FockExpr::Annihilate(p, _) => (-len(p), 0),
            FockExpr::CpDefect => (0, 0),
            FockExpr::Scaled(_, e) => e.profile(ps),
            FockExpr::Product(fs) => {
                let (mut net, mut peak) = (0i64, 0i64);
                for f in fs.iter().rev() {
                    let (n, p) = f.profile(ps);
                    peak = peak.max(net + p);
                    net += n;
                }
                (net, peak)
            }
            FockExpr::Sum(ts) => {
                ts.iter().map(|t| t.profile(ps)).fold((i64::MIN, 0), |(n, p), (n2, p2)| (n.max(n2), p.max(p2)))
            }
        }
    }

    /// Length a component needs below the truncation radius for the
    /// expression to be evaluated exactly there.
    pub fn headroom(&self, ps: &ProductSystem) -> usize {
        self.profile(ps).1.max(0) as usize
    }
}

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub witness: Option<MonoidElement>,
    pub norms: Vec<(MonoidElement, f64)>,
    pub horizon: usize,
}

impl DecayReport {
    pub fn to_json(&self, ps: &ProductSystem) -> serde_json::Value {
        let m = ps.monoid();
        json!({
            "witness": self.witness.as_ref().map(|s| m.format(s)),
            "norms": self.norms.iter().map(|(s, n)| json!({"s": m.format(s), "norm": n})).collect::<Vec<_>>(),
            "horizon": self.horizon,
            "status": if self.witness.is_some() { "Found" } else { "InconclusiveAtHorizon" },
        })
    }
}

impl ProductSystem {
    /// Looks for `s` with `|| element restricted to X^{<=s} || < eps`.
    ///
    /// Candidates are the elements above `v F` (the join of the family's
    /// indices, infinite joins skipped), shortest first, that leave enough
    /// room below the horizon to evaluate `element` without truncation.
    pub fn boundary_norm_decay(
        &self,
        element: &FockExpr,
        fam: &CompactFamily,
        eps: f64,
        horizon: usize,
    ) -> Result<DecayReport> {
        let space = FockSpace::new(self, horizon, true)?;
        let op = space.evaluate(element, fam)?;
        let headroom = element.headroom(self);
        let frontier = self.monoid.frontier_for(&self.monoid.identity(), &fam.indices(), horizon)?;
        let mut norms = Vec::new();
        let mut witness = None;
        for s in self.monoid.upper_window(&frontier.witnesses[0], horizon.saturating_sub(headroom))? {
            let cols = space.component_columns(&s);
            let rows: Vec<usize> = (0..space.dim()).collect();
            let n = op.select(&rows, &cols).norm();
            norms.push((s.clone(), n));
            if n < eps {
                witness = Some(s);
                break;
            }
        }
        Ok(DecayReport { witness, norms, horizon })
    }
}
