//! The ideals `I_p`, augmented fibres `X^{<=q}`, the maps `phi~_q` and
//! `iota~^q_p`, and the covariance defect `sum_p iota~^s_p(T_p)`.

use std::collections::{BTreeSet, HashMap};

use serde_json::json;

use super::ProductSystem;
use crate::error::{Error, Result};
use crate::hilbmod::{Bimodule, Ideal};
use crate::linalg::Matrix;
use crate::par;
use crate::qlo::MonoidElement;
use crate::scalar::Scalar;

/// The summand `X_p . I_{p^{-1} q}` of `X^{<=q}`, as a set of basis vectors
/// of `X_p` placed at `offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub p: MonoidElement,
    pub rest: MonoidElement,
    pub basis: Vec<usize>,
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct AugmentedFiber {
    pub q: MonoidElement,
    pub summands: Vec<Summand>,
    /// The direct sum as a bimodule; basis in summand order.
    pub module: Bimodule,
}

impl AugmentedFiber {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn summand(&self, p: &MonoidElement) -> Option<&Summand> {
        self.summands.iter().find(|s| s.p == *p)
    }

    /// `phi~_q(a)`.
    pub fn phi_tilde(&self, a: &[Scalar]) -> Result<Matrix> {
        self.module.left_action(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectivityVerdict {
    pub injective: bool,
    /// Vertices `v` with `phi~_q(delta_v) = 0`.
    pub kernel: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyOrigin {
    Generic,
    /// Inclusion-exclusion family of a k-graph vertex and exhaustive set.
    CkInclusionExclusion,
    /// Inclusion-exclusion family of a foundation set in `C^P`.
    FoundationInclusionExclusion,
}

/// Finitely many compact operators `T_p` on `X_p`.
#[derive(Clone, Debug)]
pub struct CompactFamily {
    pub entries: Vec<(MonoidElement, Matrix)>,
    pub origin: FamilyOrigin,
}

impl CompactFamily {
    /// Validates each operator against its fibre; repeated indices are summed.
    pub fn new(ps: &ProductSystem, entries: Vec<(MonoidElement, Matrix)>, origin: FamilyOrigin) -> Result<Self> {
        let mut merged: Vec<(MonoidElement, Matrix)> = Vec::new();
        for (p, t) in entries {
            ps.fibre(&p)?.module.check_operator(&t)?;
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some((_, acc)) => *acc = acc.add(&t),
                None => merged.push((p, t)),
            }
        }
        Ok(CompactFamily { entries: merged, origin })
    }

    pub fn zero() -> Self {
        CompactFamily { entries: vec![], origin: FamilyOrigin::Generic }
    }

    pub fn indices(&self) -> Vec<MonoidElement> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    /// `{"entries": [{"p": "(1,0)", "operator": [[...]]}, ...]}`.
    pub fn from_json(v: &serde_json::Value, ps: &ProductSystem) -> Result<Self> {
        let entries = v
            .get("entries")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::Parse("family needs an `entries` array".into()))?;
        let mut out = Vec::new();
        for (k, e) in entries.iter().enumerate() {
            let p = e
                .get("p")
                .and_then(serde_json::Value::as_str)
                .ok_or_else(|| Error::Parse(format!("entries[{k}].p must be a string")))?;
            let p = ps.monoid().parse(p).map_err(|e| Error::Parse(format!("entries[{k}].p: {e}")))?;
            let t = Matrix::from_json(
                e.get("operator").ok_or_else(|| Error::Parse(format!("entries[{k}] lacks `operator`")))?,
            )
            .map_err(|e| Error::Parse(format!("entries[{k}].operator: {e}")))?;
            out.push((p, t));
        }
        CompactFamily::new(ps, out, FamilyOrigin::Generic)
    }

    pub fn to_json(&self, ps: &ProductSystem) -> serde_json::Value {
        json!({"entries": self.entries.iter().map(|(p, t)| json!({"p": ps.monoid().format(p), "operator": t.to_json()})).collect::<Vec<_>>()})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DefectStatus {
    VanishesForLargeS { witnesses: Vec<(MonoidElement, MonoidElement)> },
    FailsAt { q: MonoidElement, s: MonoidElement, norm: f64 },
    InconclusiveAtHorizon { q: MonoidElement, horizon: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectVerdict {
    pub status: DefectStatus,
    pub horizon: usize,
    /// True when vanishing was certified with the witness `q v (v F)`, which
    /// is conclusive for inclusion-exclusion families of k-graphs and of
    /// foundation sets.
    pub exact: bool,
    /// Smallest tested `s` with `phi~_s` not injective, if any.
    pub hypothesis_violated: Option<MonoidElement>,
}

impl DefectVerdict {
    pub fn vanishes(&self) -> bool {
        matches!(self.status, DefectStatus::VanishesForLargeS { .. })
    }

    pub fn to_json(&self, ps: &ProductSystem) -> serde_json::Value {
        let m = ps.monoid();
        let status = match &self.status {
            DefectStatus::VanishesForLargeS { witnesses } => json!({
                "status": "VanishesForLargeS",
                "witnesses": witnesses.iter().map(|(q, r)| json!({"q": m.format(q), "r": m.format(r)})).collect::<Vec<_>>(),
            }),
            DefectStatus::FailsAt { q, s, norm } => {
                json!({"status": "FailsAt", "q": m.format(q), "s": m.format(s), "norm": norm})
            }
            DefectStatus::InconclusiveAtHorizon { q, horizon } => {
                json!({"status": "InconclusiveAtHorizon", "q": m.format(q), "horizon": horizon})
            }
        };
        json!({
            "verdict": status,
            "horizon": self.horizon,
            "exact": self.exact,
            "hypothesis_violated": self.hypothesis_violated.as_ref().map(|s| m.format(s)),
        })
    }
}

impl ProductSystem {
    /// `I_p`: vertices killed by every `phi_r`, `e < r <= p`.
    pub fn ideal_i(&self, p: &MonoidElement) -> Result<Ideal> {
        self.monoid.check(p)?;
        super::cached(&self.ideals, p, || self.build_ideal(p)).map(|i| (*i).clone())
    }

    fn build_ideal(&self, p: &MonoidElement) -> Result<Ideal> {
        if self.monoid.is_identity(p) {
            return Ok(self.algebra.all());
        }
        if let Some((s, ps)) = self.lex_types() {
            // Every r > e dominates (0,1), so the interval below p meets S
            // and, when p lies outside S, meets P \ S at p itself.
            let MonoidElement::Lex(m, _) = p else { unreachable!("checked") };
            let mut ideal = s.kernel_phi();
            if *m > 0 {
                ideal = ideal.intersection(&ps.kernel_phi()).copied().collect();
            }
            return Ok(ideal);
        }
        let mut ideal = self.algebra.all();
        for r in self.monoid.interval(p)? {
            let k = self.fibre(&r)?.module.kernel_phi();
            ideal = ideal.intersection(&k).copied().collect();
            if ideal.is_empty() {
                break;
            }
        }
        Ok(ideal)
    }

    /// Basis vectors of `X_p . I`.
    pub fn restrict_to_ideal(&self, p: &MonoidElement, ideal: &Ideal) -> Result<Vec<usize>> {
        Ok(self.fibre(p)?.module.restrict(ideal))
    }

    fn augmented_divisors(&self, q: &MonoidElement) -> Result<Vec<MonoidElement>> {
        match self.monoid.divisors(q) {
            Ok(d) => Ok(d),
            Err(Error::DivisorSetInfinite(msg)) => {
                // Below q every proper divisor p has p^{-1} q != e, and every
                // such I_r sits inside ker(phi_S); when that is zero only the
                // summand at q itself survives.
                let (s, _) = self.lex_types().ok_or(Error::DivisorSetInfinite(msg.clone()))?;
                if s.kernel_phi().is_empty() {
                    Ok(vec![q.clone()])
                } else {
                    Err(Error::DivisorSetInfinite(msg))
                }
            }
            Err(e) => Err(e),
        }
    }

    pub fn augmented_fiber(&self, q: &MonoidElement) -> Result<std::sync::Arc<AugmentedFiber>> {
        self.monoid.check(q)?;
        super::cached(&self.augmented, q, || self.build_augmented(q))
    }

    fn build_augmented(&self, q: &MonoidElement) -> Result<AugmentedFiber> {
        let mut summands = Vec::new();
        let mut labels = Vec::new();
        let mut source = Vec::new();
        let mut range = Vec::new();
        for p in self.augmented_divisors(q)? {
            let rest = self.monoid.quotient(&p, q)?.expect("divisor");
            let ideal = self.ideal_i(&rest)?;
            let fibre = self.fibre(&p)?;
            let basis = fibre.module.restrict(&ideal);
            if basis.is_empty() {
                continue;
            }
            let offset = labels.len();
            for &b in &basis {
                labels.push(fibre.module.label(b).to_string());
                source.push(fibre.module.source(b));
                range.push(fibre.module.range(b));
            }
            summands.push(Summand { p, rest, basis, offset });
        }
        let module = Bimodule::new(self.algebra.clone(), labels, source, range)?;
        Ok(AugmentedFiber { q: q.clone(), summands, module })
    }

    pub fn phi_tilde_injective(&self, q: &MonoidElement) -> Result<InjectivityVerdict> {
        let aug = self.augmented_fiber(q)?;
        let kernel: Vec<usize> = aug.module.kernel_phi().into_iter().collect();
        Ok(InjectivityVerdict { injective: kernel.is_empty(), kernel })
    }

    /// `iota~^q_p(S)`: `iota^r_p(S)` on each summand over `r >= p`, zero elsewhere.
    pub fn iota_tilde(&self, p: &MonoidElement, s: &Matrix, q: &MonoidElement) -> Result<Matrix> {
        self.fibre(p)?.module.check_operator(s)?;
        let aug = self.augmented_fiber(q)?;
        let mut out = Matrix::zeros(aug.dim(), aug.dim());
        if !self.monoid.divides(p, q)? {
            return Ok(out);
        }
        for sm in &aug.summands {
            if !self.monoid.divides(p, &sm.p)? {
                continue;
            }
            let op = self.iota(p, &sm.p, s)?;
            out.add_block(sm.offset, sm.offset, &op.select(&sm.basis, &sm.basis));
        }
        Ok(out)
    }

    /// `sum_p iota~^s_p(T_p)`.
    pub fn cp_defect(&self, fam: &CompactFamily, s: &MonoidElement) -> Result<Matrix> {
        let aug = self.augmented_fiber(s)?;
        let mut out = Matrix::zeros(aug.dim(), aug.dim());
        for (p, t) in &fam.entries {
            out = out.add(&self.iota_tilde(p, t, s)?);
        }
        Ok(out)
    }

    /// Semi-decides "`cp_defect(fam, s) = 0` for large `s`".
    ///
    /// For each `q` the first candidate witness is `r* = q v (v F)` (joins
    /// that are infinite are skipped). If the defect vanishes on the window
    /// `{s >= r*, length(s) <= horizon}` that witness is reported. Otherwise
    /// shorter elements `r >= r*` are tried in a fixed order, each against
    /// its own window. If none works the first nonzero `s` above `r*` is
    /// reported.
    pub fn check_cp_vanishes(
        &self,
        fam: &CompactFamily,
        test_qs: &[MonoidElement],
        horizon: usize,
    ) -> Result<DefectVerdict> {
        let extras = fam.indices();
        let mut witnesses = Vec::new();
        let mut exact = fam.origin != FamilyOrigin::Generic;
        let mut violated: Option<MonoidElement> = None;
        let mut memo: HashMap<MonoidElement, Option<f64>> = HashMap::new();
        let mut verdict_status = None;
        for q in test_qs {
            let frontier = self.monoid.frontier_for(q, &extras, horizon)?;
            let r_star = frontier.witnesses[0].clone();
            if self.monoid.length(&r_star) > horizon {
                verdict_status.get_or_insert(DefectStatus::InconclusiveAtHorizon { q: q.clone(), horizon });
                continue;
            }
            let window = self.monoid.upper_window(&r_star, horizon)?;
            let todo: Vec<MonoidElement> = window.iter().filter(|s| !memo.contains_key(*s)).cloned().collect();
            let computed = par::map(&todo, |s| -> Result<(Option<f64>, bool)> {
                let d = self.cp_defect(fam, s)?;
                let inj = self.phi_tilde_injective(s)?.injective;
                Ok((if d.is_zero() { None } else { Some(d.norm()) }, inj))
            });
            for (s, res) in todo.into_iter().zip(computed) {
                let (norm, inj) = res?;
                if !inj && violated.as_ref().is_none_or(|v| self.monoid.length(&s) < self.monoid.length(v)) {
                    violated = Some(s.clone());
                }
                memo.insert(s, norm);
            }
            let bound = (self.monoid.length(&r_star) + horizon) / 2;
            let mut found = None;
            for r in window.iter().filter(|r| self.monoid.length(r) <= bound.max(self.monoid.length(&r_star))) {
                let mut ok = true;
                for s in &window {
                    if self.monoid.divides(r, s)? && memo[s].is_some() {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found = Some(r.clone());
                    break;
                }
            }
            match found {
                Some(r) => {
                    if r != r_star {
                        exact = false;
                    }
                    witnesses.push((q.clone(), r));
                }
                None => {
                    let s = window.iter().find(|s| memo[*s].is_some()).expect("a failing s exists").clone();
                    let norm = memo[&s].unwrap();
                    if !matches!(verdict_status, Some(DefectStatus::FailsAt { .. })) {
                        verdict_status = Some(DefectStatus::FailsAt { q: q.clone(), s, norm });
                    }
                }
            }
        }
        let status = verdict_status.unwrap_or(DefectStatus::VanishesForLargeS { witnesses });
        if !matches!(status, DefectStatus::VanishesForLargeS { .. }) {
            exact = false;
        }
        Ok(DefectVerdict { status, horizon, exact, hypothesis_violated: violated })
    }

    /// Elements of length at most `radius` at which `phi~` fails to be injective.
    pub fn non_injective_points(&self, radius: usize) -> Result<Vec<MonoidElement>> {
        let mut out = Vec::new();
        for q in self.monoid.ball(radius) {
            if !self.phi_tilde_injective(&q)?.injective {
                out.push(q);
            }
        }
        Ok(out)
    }

    /// Checks that `x` lies in `X_p . I_{p^{-1} q}` using the product
    /// characterisation: `x y = 0` for every basis vector `y` of every
    /// `X_r` with `e < r <= p^{-1} q`.
    pub fn annihilates_interval(&self, p: &MonoidElement, x: &[Scalar], q: &MonoidElement) -> Result<bool> {
        let rest = self.monoid.quotient(p, q)?.ok_or_else(|| {
            Error::Domain(format!("{} does not divide {}", self.monoid.format(p), self.monoid.format(q)))
        })?;
        for r in self.monoid.interval(&rest)? {
            let fr = self.fibre(&r)?;
            for j in 0..fr.module.dim() {
                if !crate::linalg::vec_is_zero(&self.product(p, x, &r, &fr.module.basis_vector(j))?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Vertices `v` whose summand basis is mapped outside itself by some
    /// `iota^r_p(S)`; empty when the invariance lemma holds for `S`.
    pub fn invariance_defect(&self, p: &MonoidElement, s: &Matrix, q: &MonoidElement) -> Result<usize> {
        let aug = self.augmented_fiber(q)?;
        let mut bad = 0;
        for sm in &aug.summands {
            if !self.monoid.divides(p, &sm.p)? {
                continue;
            }
            let op = self.iota(p, &sm.p, s)?;
            let inside: BTreeSet<usize> = sm.basis.iter().copied().collect();
            let outside: Vec<usize> = (0..op.rows()).filter(|i| !inside.contains(i)).collect();
            bad += op.select(&outside, &sm.basis).nnz();
        }
        Ok(bad)
    }
}
