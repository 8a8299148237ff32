//! Core data model: instances, allocations, picking sequences, welfare and
//! share computations, instance-class predicates, and JSON (de)serialization.
//!
//! An instance pairs two additive valuation matrices over the same goods:
//! `v[i][g]` is agent `i`'s private value for good `g`, and `s[i][g]` is the
//! social impact of giving `g` to agent `i`. Bundle values are always sums of
//! singleton entries. All entries are non-negative exact rationals.
//!
//! Instances and allocations are immutable after construction; every
//! operation here is a pure function.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rational::{approx_f64, format_rational, parse_rational, rat_u64, Rational};

/// A fair division instance with `n` agents and `m` goods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    v: Vec<Vec<Rational>>,
    s: Vec<Vec<Rational>>,
    labels: Option<Vec<String>>,
}

impl Instance {
    /// Builds an instance from value and impact matrices. Both must be
    /// `n x m` with `n >= 1` and non-negative entries.
    pub fn new(v: Vec<Vec<Rational>>, s: Vec<Vec<Rational>>) -> Result<Self> {
        let n = v.len();
        if n == 0 {
            return Err(Error::InvalidInput("instance needs at least one agent".into()));
        }
        let m = v[0].len();
        if v.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidInput("ragged value matrix".into()));
        }
        if s.len() != n || s.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidInput(format!(
                "impact matrix must be {n}x{m} like the value matrix"
            )));
        }
        for row in v.iter().chain(s.iter()) {
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidInput("matrix entries must be non-negative".into()));
            }
        }
        Ok(Instance { n, m, v, s, labels: None })
    }

    /// Attaches cosmetic good labels; must match the good count.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "expected {} labels, got {}",
                self.m,
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `v_i(g)` for a single good.
    pub fn value(&self, agent: usize, good: usize) -> &Rational {
        &self.v[agent][good]
    }

    /// `s_i(g)` for a single good.
    pub fn impact(&self, agent: usize, good: usize) -> &Rational {
        &self.s[agent][good]
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n {
            return Err(Error::InvalidInput(format!(
                "agent index {agent} out of range (n = {})",
                self.n
            )));
        }
        Ok(())
    }

    fn check_bundle<'a>(&self, bundle: impl IntoIterator<Item = &'a usize>) -> Result<()> {
        for &g in bundle {
            if g >= self.m {
                return Err(Error::InvalidInput(format!(
                    "good index {g} out of range (m = {})",
                    self.m
                )));
            }
        }
        Ok(())
    }

    /// Additive bundle value `v_i(B)`; the empty bundle is worth 0.
    pub fn agent_value<'a>(
        &self,
        agent: usize,
        bundle: impl IntoIterator<Item = &'a usize> + Clone,
    ) -> Result<Rational> {
        self.check_agent(agent)?;
        self.check_bundle(bundle.clone())?;
        Ok(bundle.into_iter().map(|&g| &self.v[agent][g]).sum())
    }

    /// Additive bundle impact `s_i(B)`.
    pub fn agent_impact<'a>(
        &self,
        agent: usize,
        bundle: impl IntoIterator<Item = &'a usize> + Clone,
    ) -> Result<Rational> {
        self.check_agent(agent)?;
        self.check_bundle(bundle.clone())?;
        Ok(bundle.into_iter().map(|&g| &self.s[agent][g]).sum())
    }

    /// `v_i(G)`, the agent's value for all goods.
    pub fn total_value(&self, agent: usize) -> Rational {
        self.v[agent].iter().sum()
    }

    /// `s_i(G)`, the agent's impact over all goods.
    pub fn total_impact(&self, agent: usize) -> Rational {
        self.s[agent].iter().sum()
    }

    /// Utilitarian social welfare of an allocation: the sum over agents of
    /// the social impact of their own bundle.
    pub fn utilitarian_welfare(&self, allocation: &Allocation) -> Result<Rational> {
        allocation.validate_for(self)?;
        let mut total = Rational::zero();
        for (i, bundle) in allocation.bundles().iter().enumerate() {
            for &g in bundle {
                total += &self.s[i][g];
            }
        }
        Ok(total)
    }

    /// The proportional share `v_i(G) / n`.
    pub fn proportional_share(&self, agent: usize) -> Result<Rational> {
        self.check_agent(agent)?;
        Ok(self.total_value(agent) / rat_u64(self.n as u64))
    }

    /// A permutation of the goods along which every agent's values are
    /// non-increasing, when one exists. Among valid orders, goods that every
    /// agent values identically are placed in ascending index order.
    pub fn common_good_order(&self) -> Option<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by(|&a, &b| {
            for i in 0..self.n {
                let cmp = self.v[i][b].cmp(&self.v[i][a]);
                if cmp != std::cmp::Ordering::Equal {
                    return cmp;
                }
            }
            a.cmp(&b)
        });
        for w in order.windows(2) {
            for i in 0..self.n {
                if self.v[i][w[0]] < self.v[i][w[1]] {
                    return None;
                }
            }
        }
        Some(order)
    }

    /// True iff all agents share the same value row.
    pub fn is_identical(&self) -> bool {
        self.v.iter().all(|row| row == &self.v[0])
    }

    /// Appends zero-valued, zero-impact goods until the good count is a
    /// multiple of the agent count. Idempotent when `n | m`.
    pub fn pad_with_dummies(&self) -> Instance {
        let target = self.m.div_ceil(self.n) * self.n;
        if target == self.m {
            return self.clone();
        }
        let mut out = self.clone();
        for row in out.v.iter_mut().chain(out.s.iter_mut()) {
            row.resize(target, Rational::zero());
        }
        if let Some(labels) = &mut out.labels {
            for g in self.m..target {
                labels.push(format!("dummy{g}"));
            }
        }
        out.m = target;
        out
    }

    /// Sub-instance over the listed goods (ascending, deduplicated order is
    /// the caller's responsibility); new good `j` is old good `keep[j]`.
    pub fn restrict_goods(&self, keep: &[usize]) -> Result<Instance> {
        self.check_bundle(keep)?;
        let pick = |row: &Vec<Rational>| keep.iter().map(|&g| row[g].clone()).collect();
        let v = self.v.iter().map(pick).collect();
        let s = self.s.iter().map(pick).collect();
        let mut out = Instance::new(v, s)?;
        if let Some(labels) = &self.labels {
            out = out.with_labels(keep.iter().map(|&g| labels[g].clone()).collect())?;
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        doc.into_instance()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let matrix = |mat: &Vec<Vec<Rational>>| {
            serde_json::Value::Array(
                mat.iter()
                    .map(|row| {
                        serde_json::Value::Array(row.iter().map(rational_to_json).collect())
                    })
                    .collect(),
            )
        };
        let mut obj = serde_json::Map::new();
        obj.insert("n".into(), self.n.into());
        obj.insert("m".into(), self.m.into());
        obj.insert("v".into(), matrix(&self.v));
        obj.insert("s".into(), matrix(&self.s));
        if let Some(labels) = &self.labels {
            obj.insert("labels".into(), serde_json::json!(labels));
        }
        serde_json::Value::Object(obj)
    }
}

/// Emits an integer JSON number when the value is an integer fitting `u64`,
/// otherwise an exact `"p/q"` string (accepted back by the parser).
fn rational_to_json(r: &Rational) -> serde_json::Value {
    if r.denom() == &BigInt::from(1) {
        if let Ok(u) = u64::try_from(r.numer().clone()) {
            return serde_json::Value::from(u);
        }
    }
    serde_json::Value::from(format_rational(r))
}

/// JSON helper: `{"exact": "p/q", "approx": f64}`.
pub fn rational_json_pair(r: &Rational) -> serde_json::Value {
    serde_json::json!({ "exact": format_rational(r), "approx": approx_f64(r) })
}

#[derive(Deserialize)]
struct InstanceDoc {
    n: usize,
    m: usize,
    v: Vec<Vec<JsonRational>>,
    s: Vec<Vec<JsonRational>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonRational {
    UInt(u64),
    Int(i64),
    Float(f64),
    Text(String),
}

impl JsonRational {
    fn into_rational(self) -> Result<Rational> {
        match self {
            JsonRational::UInt(x) => Ok(rat_u64(x)),
            JsonRational::Int(x) => Ok(Rational::from_integer(BigInt::from(x))),
            JsonRational::Float(x) => {
                if x.fract() == 0.0 && x.abs() <= 2f64.powi(53) {
                    Ok(Rational::from_integer(BigInt::from(x as i64)))
                } else {
                    Err(Error::Json(format!(
                        "non-integer numeric literal {x}; write it as a decimal string"
                    )))
                }
            }
            JsonRational::Text(t) => parse_rational(&t).map_err(Error::Json),
        }
    }
}

impl InstanceDoc {
    fn into_instance(self) -> Result<Instance> {
        let convert = |mat: Vec<Vec<JsonRational>>| -> Result<Vec<Vec<Rational>>> {
            mat.into_iter()
                .map(|row| row.into_iter().map(JsonRational::into_rational).collect())
                .collect()
        };
        let v = convert(self.v)?;
        let s = convert(self.s)?;
        if v.len() != self.n {
            return Err(Error::Json(format!(
                "field n = {} does not match {} value rows",
                self.n,
                v.len()
            )));
        }
        if v.iter().any(|row| row.len() != self.m) {
            return Err(Error::Json(format!("value rows must have m = {} entries", self.m)));
        }
        let mut inst = Instance::new(v, s).map_err(|e| Error::Json(e.to_string()))?;
        if let Some(labels) = self.labels {
            inst = inst.with_labels(labels).map_err(|e| Error::Json(e.to_string()))?;
        }
        Ok(inst)
    }
}

/// A (possibly partial) allocation: one disjoint bundle of good indices per
/// agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<BTreeSet<usize>>,
}

impl Allocation {
    /// Builds an allocation, rejecting overlapping bundles.
    pub fn new(bundles: Vec<BTreeSet<usize>>) -> Result<Self> {
        let total: usize = bundles.iter().map(|b| b.len()).sum();
        let union: BTreeSet<usize> = bundles.iter().flatten().copied().collect();
        if union.len() != total {
            return Err(Error::InvalidInput("bundles are not pairwise disjoint".into()));
        }
        Ok(Allocation { bundles })
    }

    pub fn empty(n: usize) -> Self {
        Allocation { bundles: vec![BTreeSet::new(); n] }
    }

    pub fn bundles(&self) -> &[BTreeSet<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &BTreeSet<usize> {
        &self.bundles[agent]
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    /// The agent holding a good, if any.
    pub fn holder_of(&self, good: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(&good))
    }

    /// Checks bundle count and good indices against an instance.
    pub fn validate_for(&self, instance: &Instance) -> Result<()> {
        if self.bundles.len() != instance.agents() {
            return Err(Error::InvalidInput(format!(
                "allocation has {} bundles but the instance has {} agents",
                self.bundles.len(),
                instance.agents()
            )));
        }
        for bundle in &self.bundles {
            for &g in bundle {
                if g >= instance.goods() {
                    return Err(Error::InvalidInput(format!(
                        "good index {g} out of range (m = {})",
                        instance.goods()
                    )));
                }
            }
        }
        Ok(())
    }

    /// True iff every good of the instance is allocated.
    pub fn is_complete_for(&self, instance: &Instance) -> bool {
        let assigned: usize = self.bundles.iter().map(|b| b.len()).sum();
        assigned == instance.goods()
    }

    /// Drops every good index at or beyond `original_m`; inverse of padding.
    pub fn stripped(&self, original_m: usize) -> Allocation {
        Allocation {
            bundles: self
                .bundles
                .iter()
                .map(|b| b.iter().copied().filter(|&g| g < original_m).collect())
                .collect(),
        }
    }

    /// Mutable insertion used by the constructive algorithms. Panics if the
    /// good is already held elsewhere.
    pub(crate) fn give(&mut self, agent: usize, good: usize) {
        debug_assert!(self.holder_of(good).is_none(), "good {good} already allocated");
        self.bundles[agent].insert(good);
    }

    pub(crate) fn set_bundles(bundles: Vec<BTreeSet<usize>>) -> Self {
        Allocation { bundles }
    }

    pub fn from_json(text: &str) -> Result<Allocation> {
        #[derive(Deserialize)]
        struct Doc {
            bundles: Vec<Vec<usize>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let bundles: Vec<BTreeSet<usize>> = doc
            .bundles
            .iter()
            .map(|b| {
                let set: BTreeSet<usize> = b.iter().copied().collect();
                if set.len() != b.len() {
                    Err(Error::Json("bundle lists a good twice".into()))
                } else {
                    Ok(set)
                }
            })
            .collect::<Result<_>>()?;
        Allocation::new(bundles).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bundles": self
                .bundles
                .iter()
                .map(|b| b.iter().copied().collect::<Vec<_>>())
                .collect::<Vec<_>>()
        })
    }
}

/// A sequence of agent turns; entry `k` is the agent picking at step `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PickingSequence {
    entries: Vec<usize>,
}

impl PickingSequence {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&a| a >= n) {
            return Err(Error::InvalidInput(format!(
                "picking sequence entry {bad} out of range (n = {n})"
            )));
        }
        Ok(PickingSequence { entries })
    }

    /// The round-robin sequence `0, 1, ..., n-1, 0, 1, ...` of length `len`.
    pub fn round_robin(n: usize, len: usize) -> Self {
        PickingSequence { entries: (0..len).map(|k| k % n).collect() }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Price-of-fairness outcome: unconstrained optimum vs. the best welfare
/// achievable subject to a fairness predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PoFResult {
    pub opt_value: Rational,
    pub constrained_value: Rational,
    /// `None` encodes an infinite ratio (constrained optimum 0 < opt).
    /// Both optima zero is reported as ratio 1.
    pub ratio: Option<Rational>,
    pub opt_allocation: Allocation,
    pub constrained_allocation: Option<Allocation>,
}

impl PoFResult {
    pub fn is_infinite(&self) -> bool {
        self.ratio.is_none()
    }

    pub fn to_json(&self, predicate: &str) -> serde_json::Value {
        let ratio = match &self.ratio {
            Some(r) => serde_json::json!({
                "exact": format_rational(r),
                "approx": approx_f64(r),
                "infinite": false,
            }),
            None => serde_json::json!({ "infinite": true }),
        };
        serde_json::json!({
            "predicate": predicate,
            "opt": rational_json_pair(&self.opt_value),
            "constrained": rational_json_pair(&self.constrained_value),
            "ratio": ratio,
            "opt_allocation": self.opt_allocation.to_json(),
            "constrained_allocation": self.constrained_allocation.as_ref().map(|a| a.to_json()),
        })
    }
}
