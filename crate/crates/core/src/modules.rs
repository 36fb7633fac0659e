//! Weighted modules as finitely supported formal sums over weighted bases.
//!
//! Bases may be finite tables, the naturals with a weight formula, a free
//! module over a group ring (keys `(g, x)` weighted by `L(g) + w(x)`), the
//! group ring itself, or tagged direct sums of the above. Operations that
//! must traverse an infinite basis take an explicit weight cutoff.

use crate::bounding::{self, BoundingFunction};
use crate::groups::{GroupElement, GroupModel, LengthOracle};
use crate::rat::{self, bit_length, rat, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("basis key {0} does not belong to this module")]
    UnknownKey(String),
    #[error("operation needs a finite basis (pass a cutoff to enumerate lazy bases)")]
    InfiniteBasis,
    #[error("coefficient {0} is not an element of the ring")]
    RingViolation(String),
    #[error("weights must be >= 1 for this operation; {0} has weight {1}")]
    WeightBelowOne(String, String),
    #[error("modules are over different rings or groups")]
    ContextMismatch,
    #[error("bounding function evaluation failed: {0}")]
    Bounding(String),
    #[error("group error: {0}")]
    Group(String),
}

impl From<bounding::BoundingError> for ModuleError {
    fn from(e: bounding::BoundingError) -> Self {
        ModuleError::Bounding(e.to_string())
    }
}

impl From<crate::groups::GroupError> for ModuleError {
    fn from(e: crate::groups::GroupError) -> Self {
        ModuleError::Group(e.to_string())
    }
}

/// A basis element. `Pair` carries the group part of a free `R[G]`-module
/// basis, `Tagged` the summand index inside a direct sum, `Prod` a tensor
/// factor pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    Sym(String),
    Nat(BigUint),
    Group(GroupElement),
    Pair(GroupElement, Box<Key>),
    Tagged(u32, Box<Key>),
    Prod(Box<Key>, Box<Key>),
}

impl Key {
    pub fn sym(s: &str) -> Key {
        Key::Sym(s.to_string())
    }

    pub fn nat(n: u64) -> Key {
        Key::Nat(BigUint::from(n))
    }

    pub fn tagged(i: u32, k: Key) -> Key {
        Key::Tagged(i, Box::new(k))
    }

    pub fn pair(g: GroupElement, k: Key) -> Key {
        Key::Pair(g, Box::new(k))
    }

    pub fn prod(a: Key, b: Key) -> Key {
        Key::Prod(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Sym(s) => write!(f, "{s}"),
            Key::Nat(n) => write!(f, "{n}"),
            Key::Group(g) => write!(f, "[{g}]"),
            Key::Pair(g, k) => write!(f, "({g},{k})"),
            Key::Tagged(i, k) => write!(f, "{i}:{k}"),
            Key::Prod(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// The base ring: exact-arithmetic kinds only, with the norm floor used by
/// the two-senses-agree hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NormedRing {
    Integers,
    Rationals,
}

impl NormedRing {
    /// Nonzero norms land in `(epsilon, infinity)`; `epsilon` is positive for
    /// the integers, zero for the rationals.
    pub fn norm_floor(&self) -> Rat {
        match self {
            NormedRing::Integers => rat(1),
            NormedRing::Rationals => rat(0),
        }
    }

    pub fn admits(&self, coeff: &Rat) -> bool {
        match self {
            NormedRing::Integers => coeff.denom().is_one(),
            NormedRing::Rationals => true,
        }
    }

    pub fn norm(&self, coeff: &Rat) -> Rat {
        coeff.abs()
    }
}

/// A finitely supported linear combination of basis keys. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormalSum {
    terms: BTreeMap<Key, Rat>,
}

impl FormalSum {
    pub fn zero() -> FormalSum {
        FormalSum::default()
    }

    pub fn single(key: Key, coeff: Rat) -> FormalSum {
        let mut s = FormalSum::zero();
        s.add_term(key, coeff);
        s
    }

    pub fn basis(key: Key) -> FormalSum {
        FormalSum::single(key, rat(1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &Key) -> Rat {
        self.terms.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Rat)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, key: Key, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> FormalSum {
        FormalSum {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rat) -> FormalSum {
        if r.is_zero() {
            return FormalSum::zero();
        }
        FormalSum {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * r)).collect(),
        }
    }

    /// Relabels every key; the map must be injective on the support.
    pub fn map_keys(&self, f: impl Fn(&Key) -> Key) -> FormalSum {
        let mut out = FormalSum::zero();
        for (k, c) in self.iter() {
            out.add_term(f(k), c.clone());
        }
        out
    }

    pub fn validate_ring(&self, ring: NormedRing) -> Result<(), ModuleError> {
        for (_, c) in self.iter() {
            if !ring.admits(c) {
                return Err(ModuleError::RingViolation(rat::rat_string(c)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(k, c)| format!("{}·{}", rat::rat_string(c), k))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Weight formulas for the naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NatWeight {
    /// `w(n) = n`
    Identity,
    /// `w(n) = bit length of n`, the integer stand-in for `log2`
    Log2,
}

impl NatWeight {
    pub fn weight(&self, n: &BigUint) -> Rat {
        match self {
            NatWeight::Identity => Rat::from_integer(BigInt::from(n.clone())),
            NatWeight::Log2 => rat(bit_length(n) as i64),
        }
    }
}

#[derive(Clone)]
pub enum Basis {
    /// Explicit keys with a weight table.
    Finite(BTreeMap<Key, Rat>),
    /// Basis `{ n in N : n >= 1 }` with a weight formula.
    Nat(NatWeight),
    /// The group ring itself: keys `Group(g)`, weight `L(g)`.
    GroupRing(Arc<LengthOracle>),
    /// Free module over the group ring: keys `Pair(g, x)` for `x` in `inner`,
    /// weight `L(g) + w(x)`.
    FreeOverGroup {
        oracle: Arc<LengthOracle>,
        inner: Vec<(Key, Rat)>,
    },
    /// Tagged direct sum; keys `Tagged(i, k)`.
    Sum(Vec<Module>),
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Finite(t) => write!(f, "Finite({} keys)", t.len()),
            Basis::Nat(w) => write!(f, "Nat({w:?})"),
            Basis::GroupRing(_) => write!(f, "GroupRing"),
            Basis::FreeOverGroup { inner, .. } => {
                write!(f, "FreeOverGroup({} generators)", inner.len())
            }
            Basis::Sum(ms) => write!(f, "Sum({} summands)", ms.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Module {
    pub ring: NormedRing,
    pub basis: Basis,
}

impl Module {
    pub fn zero(ring: NormedRing) -> Module {
        Module {
            ring,
            basis: Basis::Finite(BTreeMap::new()),
        }
    }

    pub fn finite(ring: NormedRing, weights: Vec<(Key, Rat)>) -> Module {
        Module {
            ring,
            basis: Basis::Finite(weights.into_iter().collect()),
        }
    }

    pub fn nat(ring: NormedRing, w: NatWeight) -> Module {
        Module {
            ring,
            basis: Basis::Nat(w),
        }
    }

    pub fn group_ring(ring: NormedRing, oracle: Arc<LengthOracle>) -> Module {
        Module {
            ring,
            basis: Basis::GroupRing(oracle),
        }
    }

    pub fn free_over_group(
        ring: NormedRing,
        oracle: Arc<LengthOracle>,
        inner: Vec<(Key, Rat)>,
    ) -> Module {
        Module {
            ring,
            basis: Basis::FreeOverGroup { oracle, inner },
        }
    }

    /// Tagged direct sum. Zero summands are dropped, and a singleton sum is
    /// returned untagged, so `M ⊕ 0` leaves the basis of `M` unchanged.
    pub fn direct_sum(summands: Vec<Module>) -> Module {
        let ring = summands
            .first()
            .map(|m| m.ring)
            .unwrap_or(NormedRing::Integers);
        let mut nonzero: Vec<Module> = summands
            .into_iter()
            .filter(|m| m.free_rank() != Some(0))
            .collect();
        match nonzero.len() {
            0 => Module::zero(ring),
            1 => nonzero.pop().unwrap(),
            _ => Module {
                ring,
                basis: Basis::Sum(nonzero),
            },
        }
    }

    /// Direct sum that always tags, even for zero or singleton summands;
    /// constructions that need stable component indices use this one.
    pub fn tagged_sum(summands: Vec<Module>) -> Module {
        let ring = summands
            .first()
            .map(|m| m.ring)
            .unwrap_or(NormedRing::Integers);
        Module {
            ring,
            basis: Basis::Sum(summands),
        }
    }

    pub fn summands(&self) -> Option<&[Module]> {
        match &self.basis {
            Basis::Sum(ms) => Some(ms),
            _ => None,
        }
    }

    pub fn group(&self) -> Option<Arc<GroupModel>> {
        match &self.basis {
            Basis::GroupRing(o) | Basis::FreeOverGroup { oracle: o, .. } => Some(o.model.clone()),
            Basis::Sum(ms) => ms.iter().find_map(|m| m.group()),
            _ => None,
        }
    }

    pub fn oracle(&self) -> Option<Arc<LengthOracle>> {
        match &self.basis {
            Basis::GroupRing(o) | Basis::FreeOverGroup { oracle: o, .. } => Some(o.clone()),
            Basis::Sum(ms) => ms.iter().find_map(|m| m.oracle()),
            _ => None,
        }
    }

    /// Number of module generators (over the group ring where applicable);
    /// `None` for genuinely infinite bases.
    pub fn free_rank(&self) -> Option<usize> {
        match &self.basis {
            Basis::Finite(t) => Some(t.len()),
            Basis::Nat(_) => None,
            Basis::GroupRing(_) => Some(1),
            Basis::FreeOverGroup { inner, .. } => Some(inner.len()),
            Basis::Sum(ms) => ms.iter().map(Module::free_rank).sum(),
        }
    }

    /// Module generator keys: full keys for finite bases, identity-based
    /// `(e, x)` keys for free group modules.
    pub fn generators(&self) -> Result<Vec<Key>, ModuleError> {
        match &self.basis {
            Basis::Finite(t) => Ok(t.keys().cloned().collect()),
            Basis::Nat(_) => Err(ModuleError::InfiniteBasis),
            Basis::GroupRing(o) => Ok(vec![Key::Group(o.model.identity())]),
            Basis::FreeOverGroup { oracle, inner } => Ok(inner
                .iter()
                .map(|(k, _)| Key::pair(oracle.model.identity(), k.clone()))
                .collect()),
            Basis::Sum(ms) => {
                let mut out = Vec::new();
                for (i, m) in ms.iter().enumerate() {
                    for k in m.generators()? {
                        out.push(Key::tagged(i as u32, k));
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn weight(&self, key: &Key) -> Result<Rat, ModuleError> {
        match (&self.basis, key) {
            (Basis::Finite(t), k) => t
                .get(k)
                .cloned()
                .ok_or_else(|| ModuleError::UnknownKey(k.to_string())),
            (Basis::Nat(w), Key::Nat(n)) => {
                if n.is_zero() {
                    return Err(ModuleError::UnknownKey(key.to_string()));
                }
                Ok(w.weight(n))
            }
            (Basis::GroupRing(o), Key::Group(g)) => Ok(o.word_length(g)?),
            (Basis::FreeOverGroup { oracle, inner }, Key::Pair(g, k)) => {
                let wx = inner
                    .iter()
                    .find(|(ik, _)| ik == k.as_ref())
                    .map(|(_, w)| w.clone())
                    .ok_or_else(|| ModuleError::UnknownKey(key.to_string()))?;
                Ok(oracle.word_length(g)? + wx)
            }
            (Basis::Sum(ms), Key::Tagged(i, k)) => ms
                .get(*i as usize)
                .ok_or_else(|| ModuleError::UnknownKey(key.to_string()))?
                .weight(k),
            _ => Err(ModuleError::UnknownKey(key.to_string())),
        }
    }

    pub fn contains_key(&self, key: &Key) -> bool {
        self.weight(key).is_ok()
    }

    /// Left action of a group element on a basis key, where defined.
    pub fn act(&self, g: &GroupElement, key: &Key) -> Result<Key, ModuleError> {
        match (&self.basis, key) {
            (Basis::GroupRing(o), Key::Group(h)) => Ok(Key::Group(o.model.mul(g, h))),
            (Basis::FreeOverGroup { oracle, .. }, Key::Pair(h, k)) => {
                Ok(Key::Pair(oracle.model.mul(g, h), k.clone()))
            }
            (Basis::Sum(ms), Key::Tagged(i, k)) => {
                let inner = ms
                    .get(*i as usize)
                    .ok_or_else(|| ModuleError::UnknownKey(key.to_string()))?
                    .act(g, k)?;
                Ok(Key::tagged(*i, inner))
            }
            _ => Err(ModuleError::UnknownKey(key.to_string())),
        }
    }

    /// Splits a key into its group part and the based key at the identity.
    pub fn split_group(&self, key: &Key) -> Result<(GroupElement, Key), ModuleError> {
        match (&self.basis, key) {
            (Basis::GroupRing(o), Key::Group(h)) => {
                Ok((h.clone(), Key::Group(o.model.identity())))
            }
            (Basis::FreeOverGroup { oracle, .. }, Key::Pair(h, k)) => Ok((
                h.clone(),
                Key::pair(oracle.model.identity(), k.as_ref().clone()),
            )),
            (Basis::Sum(ms), Key::Tagged(i, k)) => {
                let (g, based) = ms
                    .get(*i as usize)
                    .ok_or_else(|| ModuleError::UnknownKey(key.to_string()))?
                    .split_group(k)?;
                Ok((g, Key::tagged(*i, based)))
            }
            _ => Err(ModuleError::UnknownKey(key.to_string())),
        }
    }

    /// All keys of weight `<= cutoff`, sorted.
    pub fn enumerate(&self, cutoff: &Rat) -> Result<Vec<Key>, ModuleError> {
        let mut out = match &self.basis {
            Basis::Finite(t) => t
                .iter()
                .filter(|(_, w)| *w <= cutoff)
                .map(|(k, _)| k.clone())
                .collect(),
            Basis::Nat(w) => {
                let mut keys = Vec::new();
                let mut n = BigUint::from(1u32);
                while &w.weight(&n) <= cutoff && keys.len() <= 1 << 16 {
                    keys.push(Key::Nat(n.clone()));
                    n += 1u32;
                }
                keys
            }
            Basis::GroupRing(o) => {
                let mut keys: Vec<Key> = o
                    .ball_elements(cutoff)?
                    .into_iter()
                    .map(Key::Group)
                    .collect();
                keys.retain(|k| self.weight(k).map(|w| &w <= cutoff).unwrap_or(false));
                keys
            }
            Basis::FreeOverGroup { oracle, inner } => {
                let mut keys = Vec::new();
                for (k, wx) in inner {
                    let room = cutoff - wx;
                    if room.is_negative() {
                        continue;
                    }
                    for g in oracle.ball_elements(&room)? {
                        let key = Key::pair(g, k.clone());
                        if self.weight(&key).map(|w| &w <= cutoff).unwrap_or(false) {
                            keys.push(key);
                        }
                    }
                }
                keys
            }
            Basis::Sum(ms) => {
                let mut keys = Vec::new();
                for (i, m) in ms.iter().enumerate() {
                    keys.extend(
                        m.enumerate(cutoff)?
                            .into_iter()
                            .map(|k| Key::tagged(i as u32, k)),
                    );
                }
                keys
            }
        };
        out.sort();
        Ok(out)
    }

    /// `sum_s |alpha_s| · f(w(s))`, the seminorm attached to `f`.
    pub fn seminorm(&self, a: &FormalSum, f: &BoundingFunction) -> Result<Rat, ModuleError> {
        let mut acc = Rat::zero();
        for (k, c) in a.iter() {
            let w = self.weight(k)?;
            acc += self.ring.norm(c) * f.eval(&w)?;
        }
        Ok(acc)
    }

    /// The weighted l1 norm (`f = identity`).
    pub fn id_norm(&self, a: &FormalSum) -> Result<Rat, ModuleError> {
        let mut acc = Rat::zero();
        for (k, c) in a.iter() {
            acc += self.ring.norm(c) * self.weight(k)?;
        }
        Ok(acc)
    }

    /// The plain l1 norm (`f = 1`), which ignores weights.
    pub fn l1_norm(&self, a: &FormalSum) -> Rat {
        a.iter().map(|(_, c)| self.ring.norm(c)).sum()
    }

    /// Deterministic random element: up to `max_terms` keys drawn from the
    /// cutoff ball with nonzero integer coefficients bounded by `coeff_bound`.
    pub fn sample<R: Rng>(
        &self,
        rng: &mut R,
        cutoff: &Rat,
        max_terms: usize,
        coeff_bound: i64,
    ) -> Result<FormalSum, ModuleError> {
        let keys = self.enumerate(cutoff)?;
        if keys.is_empty() {
            return Ok(FormalSum::zero());
        }
        let mut out = FormalSum::zero();
        let terms = rng.random_range(0..=max_terms);
        for _ in 0..terms {
            let k = keys[rng.random_range(0..keys.len())].clone();
            let mut c = 0i64;
            while c == 0 {
                c = rng.random_range(-coeff_bound..=coeff_bound);
            }
            out.add_term(k, rat(c));
        }
        Ok(out)
    }
}

/// Left multiplication by a group-ring element: the bilinear expansion
/// `sum a_g b_s (g·s)` with like terms collected.
pub fn scalar_multiply(
    r: &FormalSum,
    module: &Module,
    b: &FormalSum,
) -> Result<FormalSum, ModuleError> {
    let mut out = FormalSum::zero();
    for (gk, a) in r.iter() {
        let g = match gk {
            Key::Group(g) => g,
            _ => return Err(ModuleError::UnknownKey(gk.to_string())),
        };
        for (s, c) in b.iter() {
            out.add_term(module.act(g, s)?, a * c);
        }
    }
    Ok(out)
}

/// A quotient of a weighted module by finitely many relations, with the
/// induced weighting realised as a truncated search over representatives.
#[derive(Debug, Clone)]
pub struct QuotientModule {
    pub ambient: Module,
    pub relations: Vec<FormalSum>,
    pub search_radius: Rat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedWeight {
    pub value: Rat,
    /// `true` when the search space was exhausted (no relations); `false`
    /// marks an upper bound from a truncated search.
    pub exact: bool,
    pub representatives_tried: usize,
}

impl QuotientModule {
    /// Minimum of the weighted l1 norm over representatives
    /// `rep + sum c_i·rel_i` with integer coefficients explored up to the
    /// search radius.
    pub fn induced_weight(&self, rep: &FormalSum) -> Result<InducedWeight, ModuleError> {
        let base = self.ambient.id_norm(rep)?;
        if self.relations.is_empty() {
            return Ok(InducedWeight {
                value: base,
                exact: true,
                representatives_tried: 1,
            });
        }
        let bound = rat::ceil_int(&self.search_radius)
            .max(BigInt::from(1))
            .min(BigInt::from(8i64));
        let b: i64 = bound.try_into().unwrap_or(4);
        let mut best = base;
        let mut tried = 1usize;
        let k = self.relations.len().min(4);
        let mut coeffs = vec![-b; k];
        loop {
            if !coeffs.iter().all(|c| *c == 0) {
                let mut candidate = rep.clone();
                for (c, rel) in coeffs.iter().zip(&self.relations) {
                    candidate = candidate.add(&rel.scale(&rat(*c)));
                }
                tried += 1;
                let mut feasible = true;
                for (key, _) in candidate.iter() {
                    if self.ambient.weight(key)? > self.search_radius {
                        feasible = false;
                        break;
                    }
                }
                if feasible {
                    let norm = self.ambient.id_norm(&candidate)?;
                    if norm < best {
                        best = norm;
                    }
                }
            }
            // advance the coefficient odometer
            let mut pos = 0;
            loop {
                if pos == k {
                    return Ok(InducedWeight {
                        value: best,
                        exact: false,
                        representatives_tried: tried,
                    });
                }
                coeffs[pos] += 1;
                if coeffs[pos] > b {
                    coeffs[pos] = -b;
                    pos += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Report for the two weighted-ring norm inequalities checked on samples.
#[derive(Debug, Clone, Default)]
pub struct RingAxiomReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl RingAxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies, for sampled pairs `(r, m)` of group-ring elements,
/// `|r·m|_1 <= |r|_1·|m|_1` and `|r·m|_w <= |r|_w·|m|_1 + |r|_1·|m|_w`.
pub fn check_weighted_ring_axioms(
    ring_module: &Module,
    samples: &[(FormalSum, FormalSum)],
) -> Result<RingAxiomReport, ModuleError> {
    let mut report = RingAxiomReport::default();
    for (r, m) in samples {
        report.checked += 1;
        let product = scalar_multiply(r, ring_module, m)?;
        if ring_module.l1_norm(&product) > ring_module.l1_norm(r) * ring_module.l1_norm(m) {
            report
                .violations
                .push(format!("l1 submultiplicativity fails for r={r}, m={m}"));
        }
        let lhs = ring_module.id_norm(&product)?;
        let rhs = ring_module.id_norm(r)? * ring_module.l1_norm(m)
            + ring_module.l1_norm(r) * ring_module.id_norm(m)?;
        if lhs > rhs {
            report.violations.push(format!(
                "weighted inequality fails for r={r}, m={m}: {} > {}",
                rat::rat_string(&lhs),
                rat::rat_string(&rhs)
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounding::{constant, identity, monomial};
    use crate::rat::ratio;

    fn z_module_xy() -> (Module, Key, Key) {
        // Z[Z]-module with inner basis {x (w=1), y (w=2)}
        let model = GroupModel::integers();
        let oracle = Arc::new(LengthOracle::new(model, rat(64)));
        let m = Module::free_over_group(
            NormedRing::Integers,
            oracle,
            vec![(Key::sym("x"), rat(1)), (Key::sym("y"), rat(2))],
        );
        (m, Key::sym("x"), Key::sym("y"))
    }

    fn z_elt(k: i64) -> GroupElement {
        GroupElement::Vector(vec![BigInt::from(k)])
    }

    #[test]
    fn seminorm_of_zero_is_zero() {
        let (m, _, _) = z_module_xy();
        for f in [constant(1), identity(), monomial(2)] {
            assert_eq!(m.seminorm(&FormalSum::zero(), &f).unwrap(), rat(0));
        }
    }

    #[test]
    fn seminorm_matches_hand_evaluation() {
        // a = 2·(3,x) − 3·(−2,y): both weights are 4, so under x^2 the value
        // is 2·16 + 3·16 = 80
        let (m, x, y) = z_module_xy();
        let mut a = FormalSum::zero();
        a.add_term(Key::pair(z_elt(3), x), rat(2));
        a.add_term(Key::pair(z_elt(-2), y), rat(-3));
        assert_eq!(m.seminorm(&a, &monomial(2)).unwrap(), rat(80));
    }

    #[test]
    fn l1_norm_ignores_weights() {
        let (m, _, y) = z_module_xy();
        let a = FormalSum::single(Key::pair(z_elt(0), y), rat(5));
        assert_eq!(m.seminorm(&a, &constant(1)).unwrap(), rat(5));
    }

    #[test]
    fn scalar_multiply_unit_law_and_expansion() {
        let (m, x, _) = z_module_xy();
        let model = GroupModel::integers();
        let one = FormalSum::basis(Key::Group(model.identity()));
        let b = FormalSum::single(Key::pair(z_elt(1), x.clone()), rat(1));
        assert_eq!(scalar_multiply(&one, &m, &b).unwrap(), b);

        // (t + t^-1)·(0, x) = (1, x) + (-1, x)
        let mut r = FormalSum::zero();
        r.add_term(Key::Group(z_elt(1)), rat(1));
        r.add_term(Key::Group(z_elt(-1)), rat(1));
        let b0 = FormalSum::basis(Key::pair(z_elt(0), x.clone()));
        let rb = scalar_multiply(&r, &m, &b0).unwrap();
        let mut expected = FormalSum::zero();
        expected.add_term(Key::pair(z_elt(1), x.clone()), rat(1));
        expected.add_term(Key::pair(z_elt(-1), x), rat(1));
        assert_eq!(rb, expected);
    }

    #[test]
    fn multiplication_bound_hand_instance() {
        // r = t, b = (1,x) with total weight 2: |rb|_id = 3 <= 2·F(1)·F(2)
        // with F = 2x, i.e. 16
        let (m, x, _) = z_module_xy();
        let r = FormalSum::basis(Key::Group(z_elt(1)));
        let b = FormalSum::basis(Key::pair(z_elt(1), x));
        let rb = scalar_multiply(&r, &m, &b).unwrap();
        assert_eq!(m.id_norm(&rb).unwrap(), rat(3));
        assert!(m.id_norm(&rb).unwrap() <= rat(16));
    }

    #[test]
    fn induced_weight_finds_the_short_representative() {
        // ambient Z[{s1 (w=1), s2 (w=5)}], relation s2 − s1, rep = s2:
        // rep − (s2 − s1) = s1 has norm 1
        let ambient = Module::finite(
            NormedRing::Integers,
            vec![(Key::sym("s1"), rat(1)), (Key::sym("s2"), rat(5))],
        );
        let rel = FormalSum::basis(Key::sym("s2")).sub(&FormalSum::basis(Key::sym("s1")));
        let q = QuotientModule {
            ambient,
            relations: vec![rel],
            search_radius: rat(6),
        };
        let got = q.induced_weight(&FormalSum::basis(Key::sym("s2"))).unwrap();
        assert_eq!(got.value, rat(1));
        assert!(!got.exact);
    }

    #[test]
    fn induced_weight_with_no_relations_is_the_norm() {
        let ambient = Module::finite(NormedRing::Integers, vec![(Key::sym("s"), rat(3))]);
        let q = QuotientModule {
            ambient,
            relations: vec![],
            search_radius: rat(6),
        };
        let got = q.induced_weight(&FormalSum::basis(Key::sym("s"))).unwrap();
        assert_eq!(got.value, rat(3));
        assert!(got.exact);
    }

    #[test]
    fn induced_weight_never_exceeds_the_representative_norm() {
        let ambient = Module::finite(
            NormedRing::Integers,
            vec![(Key::sym("a"), rat(2)), (Key::sym("b"), rat(2))],
        );
        let rel = FormalSum::basis(Key::sym("a")).add(&FormalSum::basis(Key::sym("b")));
        let q = QuotientModule {
            ambient: ambient.clone(),
            relations: vec![rel],
            search_radius: rat(8),
        };
        let rep = FormalSum::single(Key::sym("a"), rat(2));
        let got = q.induced_weight(&rep).unwrap();
        assert!(got.value <= ambient.id_norm(&rep).unwrap());
    }

    #[test]
    fn direct_sum_drops_zero_and_splits_seminorms() {
        let (m, x, _) = z_module_xy();
        let z = Module::zero(NormedRing::Integers);
        let s = Module::direct_sum(vec![m.clone(), z]);
        // M ⊕ 0 leaves the basis untouched
        assert_eq!(s.free_rank(), m.free_rank());
        assert!(s.weight(&Key::pair(z_elt(0), x.clone())).is_ok());

        let s2 = Module::direct_sum(vec![m.clone(), m.clone()]);
        let a = FormalSum::basis(Key::tagged(0, Key::pair(z_elt(2), x.clone())));
        let b = FormalSum::basis(Key::tagged(1, Key::pair(z_elt(0), x)));
        let ab = a.add(&b);
        let f = monomial(2);
        let left = s2.seminorm(&ab, &f).unwrap();
        let right = s2.seminorm(&a, &f).unwrap() + s2.seminorm(&b, &f).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn ring_axioms_hold_on_the_integers_group_ring() {
        let model = GroupModel::integers();
        let oracle = Arc::new(LengthOracle::new(model.clone(), rat(64)));
        let ring = Module::group_ring(NormedRing::Integers, oracle);
        // unit: both inequalities with equality or better
        let one = FormalSum::basis(Key::Group(model.identity()));
        let r = check_weighted_ring_axioms(&ring, &[(one.clone(), one)]).unwrap();
        assert!(r.passed());

        // radius-4 ball pairs
        let keys = ring.enumerate(&rat(4)).unwrap();
        let mut samples = Vec::new();
        'outer: for (i, a) in keys.iter().enumerate() {
            for b in keys.iter().skip(i % 3) {
                samples.push((
                    FormalSum::single(a.clone(), rat(2)),
                    FormalSum::single(b.clone(), rat(-3)),
                ));
                if samples.len() >= 200 {
                    break 'outer;
                }
            }
        }
        let r = check_weighted_ring_axioms(&ring, &samples).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn ring_axioms_catch_a_planted_zero_weight() {
        // forcing L(g) = 0 for g != 1 breaks the weighted inequality at
        // r = g, m = g^-1
        let model = GroupModel::integers();
        let g = z_elt(1);
        let oracle = LengthOracle::new(model.clone(), rat(64))
            .with_override(g.clone(), rat(0))
            .with_override(model.inv(&g), rat(0));
        let ring = Module::group_ring(NormedRing::Integers, Arc::new(oracle));
        let r = FormalSum::basis(Key::Group(g.clone()));
        let m = FormalSum::basis(Key::Group(model.inv(&g)));
        let report = check_weighted_ring_axioms(&ring, &[(r, m)]).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn nat_bases_weigh_by_formula() {
        let m_id = Module::nat(NormedRing::Integers, NatWeight::Identity);
        let m_log = Module::nat(NormedRing::Integers, NatWeight::Log2);
        let n = Key::Nat(BigUint::from(1u64 << 16));
        assert_eq!(m_id.weight(&n).unwrap(), rat(1 << 16));
        assert_eq!(m_log.weight(&n).unwrap(), rat(17));
        assert!(m_id.weight(&Key::Nat(BigUint::zero())).is_err());
    }

    #[test]
    fn formal_sums_never_store_zero() {
        let mut a = FormalSum::zero();
        a.add_term(Key::sym("s"), rat(2));
        a.add_term(Key::sym("s"), rat(-2));
        assert!(a.is_zero());
        let b = FormalSum::single(Key::sym("s"), ratio(1, 2));
        assert!(b.validate_ring(NormedRing::Integers).is_err());
        assert!(b.validate_ring(NormedRing::Rationals).is_ok());
    }
}
