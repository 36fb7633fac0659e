//! Weighted chain complexes, graded map algebra, and homotopy certificates.
//!
//! Everything a certificate claims is checked per degree on explicit basis
//! keys, in exact arithmetic. The constructions (cones, cylinders, pushouts
//! along cofibrations, quotient equivalences, saturation completion, the
//! cylinder factorization) all emit certificates whose chain identities hold
//! exactly and whose boundedness witnesses are assembled from the input
//! witnesses by dominator closure.

use crate::bounding::{self, BoundingClass, BoundingFunction};
use crate::maps::{dehn_linear_constant, MapError, MapRule, ModuleMap, MonoCertificate, SplittingData};
use crate::modules::{FormalSum, Key, Module, ModuleError, NormedRing};
use crate::rat::{rat, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("map error: {0}")]
    Map(String),
    #[error("bounding error: {0}")]
    Bounding(String),
    #[error("d² ≠ 0 at degree {0} on basis element {1}")]
    DifferentialSquare(i64, String),
    #[error("operation requires a finite complex: {0}")]
    NotFinite(String),
    #[error("certificate failed verification: {0}")]
    BadCertificate(String),
    #[error("witness combination failed: {0}")]
    Witness(String),
}

impl From<MapError> for ComplexError {
    fn from(e: MapError) -> Self {
        ComplexError::Map(e.to_string())
    }
}

impl From<bounding::BoundingError> for ComplexError {
    fn from(e: bounding::BoundingError) -> Self {
        ComplexError::Bounding(e.to_string())
    }
}

/// A chain complex supported on a finite degree interval. Modules may have
/// infinite rank (lazy bases); the degree support is always finite.
#[derive(Clone)]
pub struct ChainComplex {
    pub label: String,
    pub ring: NormedRing,
    pub lo: i64,
    pub hi: i64,
    degrees: BTreeMap<i64, Module>,
    /// `d_n : C_n -> C_{n-1}`
    diffs: BTreeMap<i64, ModuleMap>,
    /// Dehn witness for every differential component.
    pub diff_witness: BoundingFunction,
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainComplex({}, [{}, {}])", self.label, self.lo, self.hi)
    }
}

impl ChainComplex {
    pub fn zero(ring: NormedRing) -> ChainComplex {
        ChainComplex {
            label: "*".into(),
            ring,
            lo: 0,
            hi: 0,
            degrees: BTreeMap::new(),
            diffs: BTreeMap::new(),
            diff_witness: bounding::identity(),
        }
    }

    /// Builds a complex from per-degree modules and differentials; checks
    /// `d² = 0` on the module generators.
    pub fn new(
        label: &str,
        ring: NormedRing,
        degrees: BTreeMap<i64, Module>,
        diffs: BTreeMap<i64, ModuleMap>,
        diff_witness: BoundingFunction,
    ) -> Result<ChainComplex, ComplexError> {
        let lo = degrees.keys().min().copied().unwrap_or(0);
        let hi = degrees.keys().max().copied().unwrap_or(0);
        let c = ChainComplex {
            label: label.into(),
            ring,
            lo,
            hi,
            degrees,
            diffs,
            diff_witness,
        };
        c.verify_d_squared()?;
        Ok(c)
    }

    pub fn module(&self, n: i64) -> Module {
        self.degrees
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Module::zero(self.ring))
    }

    pub fn differential(&self, n: i64) -> ModuleMap {
        self.diffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| ModuleMap::zero(self.module(n), self.module(n - 1)))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.values().all(|m| m.free_rank() == Some(0))
    }

    pub fn is_finite(&self) -> bool {
        self.degrees.values().all(|m| m.free_rank().is_some())
    }

    pub fn rank(&self, n: i64) -> Option<usize> {
        self.module(n).free_rank()
    }

    /// Test keys for a degree: all generators for finite modules, the cutoff
    /// ball for lazy ones.
    pub fn test_keys(&self, n: i64, cutoff: &Rat) -> Result<Vec<Key>, ComplexError> {
        let m = self.module(n);
        match m.generators() {
            Ok(g) => Ok(g),
            Err(_) => Ok(m.enumerate(cutoff)?),
        }
    }

    pub fn verify_d_squared(&self) -> Result<(), ComplexError> {
        let cutoff = rat(6);
        for n in self.support() {
            let d_n = self.differential(n);
            let d_n1 = self.differential(n - 1);
            for k in self.test_keys(n, &cutoff)? {
                let once = d_n.apply_key(&k)?;
                let twice = d_n1.apply(&once)?;
                if !twice.is_zero() {
                    return Err(ComplexError::DifferentialSquare(n, k.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Degree shift: `(ΣᵏC)_n = C_{n-k}`, differentials negated for odd `k`.
    pub fn shift(&self, k: i64) -> ChainComplex {
        let degrees = self
            .degrees
            .iter()
            .map(|(n, m)| (n + k, m.clone()))
            .collect();
        let sign = if k % 2 == 0 { rat(1) } else { rat(-1) };
        let diffs = self
            .diffs
            .iter()
            .map(|(n, d)| (n + k, d.scale(&sign)))
            .collect();
        ChainComplex {
            label: format!("Σ{}({})", k, self.label),
            ring: self.ring,
            lo: self.lo + k,
            hi: self.hi + k,
            degrees,
            diffs,
            diff_witness: self.diff_witness.clone(),
        }
    }

    /// Tagged direct sum of complexes, summandwise in every degree.
    pub fn direct_sum(parts: &[&ChainComplex]) -> Result<ChainComplex, ComplexError> {
        let ring = parts.first().map(|c| c.ring).unwrap_or(NormedRing::Integers);
        let lo = parts.iter().map(|c| c.lo).min().unwrap_or(0);
        let hi = parts.iter().map(|c| c.hi).max().unwrap_or(0);
        let mut degrees = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for n in lo..=hi {
            let mods: Vec<Module> = parts.iter().map(|c| c.module(n)).collect();
            degrees.insert(n, Module::tagged_sum(mods));
        }
        for n in lo..=hi {
            let dom = degrees.get(&n).unwrap().clone();
            let cod = degrees.get(&(n - 1)).cloned().unwrap_or_else(|| Module::zero(ring));
            let ds: Vec<ModuleMap> = parts.iter().map(|c| c.differential(n)).collect();
            let rule: crate::maps::MapRule = {
                let ds = ds.clone();
                MapRule::Lazy(Arc::new(move |k: &Key| match k {
                    Key::Tagged(i, inner) => {
                        let img = ds[*i as usize].apply_key(inner)?;
                        Ok(img.map_keys(|kk| Key::tagged(*i, kk.clone())))
                    }
                    _ => Err(ModuleError::UnknownKey(k.to_string())),
                }))
            };
            diffs.insert(
                n,
                ModuleMap {
                    label: "d⊕".into(),
                    domain: dom,
                    codomain: cod,
                    rule,
                },
            );
        }
        let witness = parts
            .iter()
            .map(|c| c.diff_witness.clone())
            .try_fold(bounding::constant(0), |acc, w| {
                witness_sum(&acc, &w)
            })?;
        ChainComplex::new(
            &format!(
                "({})",
                parts.iter().map(|c| c.label.clone()).collect::<Vec<_>>().join("⊕")
            ),
            ring,
            degrees,
            diffs,
            witness,
        )
    }

    /// Recomputes a linear differential witness from the matrix constants;
    /// only available for finite complexes.
    pub fn linear_diff_witness(&self) -> Result<BoundingFunction, ComplexError> {
        let mut k = Rat::zero();
        for n in self.support() {
            let d = self.differential(n);
            if d.domain.free_rank().is_none() {
                return Err(ComplexError::NotFinite(self.label.clone()));
            }
            let kn = dehn_linear_constant(&d)?;
            if kn > k {
                k = kn;
            }
        }
        Ok(BoundingFunction::Linear { a: k, b: Rat::zero() })
    }
}

/// Pointwise dominator of `a + b` staying within the symbolic kinds.
pub fn witness_sum(
    a: &BoundingFunction,
    b: &BoundingFunction,
) -> Result<BoundingFunction, ComplexError> {
    if let Some(s) = a.add_exact(b) {
        return Ok(s);
    }
    // same-kind exponential widening
    let class = BoundingClass::iterated_exponential_class();
    let expr = bounding::ClassExpr::Sum(vec![
        (rat(1), bounding::ClassExpr::member(a.clone())),
        (rat(1), bounding::ClassExpr::member(b.clone())),
    ]);
    if class.contains(a) && class.contains(b) {
        let (w, _) = class
            .weak_dominator(&expr)
            .map_err(|e| ComplexError::Witness(e.to_string()))?;
        return Ok(w);
    }
    Err(ComplexError::Witness(format!(
        "cannot dominate the sum of {a} and {b}"
    )))
}

/// Dominator of the composition `outer ∘ inner` of two witnesses.
pub fn witness_compose(
    outer: &BoundingFunction,
    inner: &BoundingFunction,
) -> BoundingFunction {
    outer.compose_dominating(inner)
}

/// A degree-shifting family of module maps `C_n -> D_{n+shift}` with a Dehn
/// witness. The algebra below (compose, add, scale) is what the certificate
/// constructions are written in.
#[derive(Clone)]
pub struct GradedMap {
    pub label: String,
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub shift: i64,
    components: BTreeMap<i64, ModuleMap>,
    pub witness: BoundingFunction,
}

impl fmt::Debug for GradedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedMap({}, shift {})", self.label, self.shift)
    }
}

impl GradedMap {
    pub fn new(
        label: &str,
        source: ChainComplex,
        target: ChainComplex,
        shift: i64,
        components: BTreeMap<i64, ModuleMap>,
        witness: BoundingFunction,
    ) -> GradedMap {
        GradedMap {
            label: label.into(),
            source,
            target,
            shift,
            components,
            witness,
        }
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex, shift: i64) -> GradedMap {
        GradedMap::new(
            "0",
            source.clone(),
            target.clone(),
            shift,
            BTreeMap::new(),
            bounding::identity(),
        )
    }

    pub fn identity(c: &ChainComplex) -> GradedMap {
        let mut comps = BTreeMap::new();
        for n in c.support() {
            comps.insert(n, ModuleMap::identity(c.module(n)));
        }
        GradedMap::new("id", c.clone(), c.clone(), 0, comps, bounding::identity())
    }

    /// The differential as a graded map of shift −1.
    pub fn differential(c: &ChainComplex) -> GradedMap {
        let mut comps = BTreeMap::new();
        for n in c.support() {
            comps.insert(n, c.differential(n));
        }
        GradedMap::new(
            "d",
            c.clone(),
            c.clone(),
            -1,
            comps,
            c.diff_witness.clone(),
        )
    }

    pub fn component(&self, n: i64) -> ModuleMap {
        self.components.get(&n).cloned().unwrap_or_else(|| {
            ModuleMap::zero(self.source.module(n), self.target.module(n + self.shift))
        })
    }

    pub fn apply(&self, n: i64, a: &FormalSum) -> Result<FormalSum, ComplexError> {
        Ok(self.component(n).apply(a)?)
    }

    /// `self ∘ first` (apply `first`, then `self`); shifts add.
    pub fn compose(&self, first: &GradedMap) -> GradedMap {
        let mut comps = BTreeMap::new();
        for n in first.source.support() {
            let inner = first.component(n);
            let outer = self.component(n + first.shift);
            comps.insert(n, outer.compose(&inner));
        }
        GradedMap::new(
            &format!("{}∘{}", self.label, first.label),
            first.source.clone(),
            self.target.clone(),
            self.shift + first.shift,
            comps,
            witness_compose(&self.witness, &first.witness),
        )
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap, ComplexError> {
        assert_eq!(self.shift, other.shift, "shift mismatch in sum");
        let mut comps = BTreeMap::new();
        for n in self.source.support() {
            comps.insert(n, self.component(n).add(&other.component(n)));
        }
        Ok(GradedMap::new(
            &format!("({}+{})", self.label, other.label),
            self.source.clone(),
            self.target.clone(),
            self.shift,
            comps,
            witness_sum(&self.witness, &other.witness)?,
        ))
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap, ComplexError> {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &Rat) -> GradedMap {
        let mut comps = BTreeMap::new();
        for n in self.source.support() {
            comps.insert(n, self.component(n).scale(c));
        }
        let scale_abs = if c.is_zero() {
            rat(1)
        } else {
            crate::modules::NormedRing::Rationals.norm(c)
        };
        GradedMap::new(
            &format!("{}·{}", c, self.label),
            self.source.clone(),
            self.target.clone(),
            self.shift,
            comps,
            self.witness.scale_output(&std::cmp::max(scale_abs, rat(1))),
        )
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&rat(-1))
    }

    pub fn with_label(mut self, label: &str) -> GradedMap {
        self.label = label.to_string();
        self
    }

    pub fn with_witness(mut self, w: BoundingFunction) -> GradedMap {
        self.witness = w;
        self
    }

    /// Exact equality against `other` on test keys per degree; returns the
    /// offending (degree, key) pairs.
    pub fn difference_on_keys(
        &self,
        other: &GradedMap,
        cutoff: &Rat,
    ) -> Result<Vec<(i64, Key)>, ComplexError> {
        let mut bad = Vec::new();
        for n in self.source.support() {
            for k in self.source.test_keys(n, cutoff)? {
                let a = self.component(n).apply_key(&k)?;
                let b = other.component(n).apply_key(&k)?;
                if a != b {
                    bad.push((n, k));
                }
            }
        }
        Ok(bad)
    }

    /// Is `d∘self = sign·self∘d`? Chain maps use `sign = +1` (shift 0).
    pub fn commutes_with_d(&self, cutoff: &Rat) -> Result<Vec<(i64, Key)>, ComplexError> {
        let d_src = GradedMap::differential(&self.source);
        let d_tgt = GradedMap::differential(&self.target);
        d_tgt.compose(self).difference_on_keys(&self.compose(&d_src), cutoff)
    }

    /// `d∘self + self∘d` as a graded map (the homotopy boundary).
    pub fn boundary(&self) -> Result<GradedMap, ComplexError> {
        let d_src = GradedMap::differential(&self.source);
        let d_tgt = GradedMap::differential(&self.target);
        d_tgt.compose(self).add(&self.compose(&d_src))
    }

    /// Verifies the map's Dehn witness on the degree-wise test keys taken as
    /// singleton sums plus their pairwise combinations.
    pub fn verify_witness(&self, cutoff: &Rat) -> Result<Vec<String>, ComplexError> {
        let mut failures = Vec::new();
        for n in self.source.support() {
            let keys = self.source.test_keys(n, cutoff)?;
            let m = self.component(n);
            let dom = self.source.module(n);
            let cod = self.target.module(n + self.shift);
            let mut samples: Vec<FormalSum> = keys
                .iter()
                .map(|k| FormalSum::basis(k.clone()))
                .collect();
            for pair in keys.windows(2) {
                samples.push(
                    FormalSum::basis(pair[0].clone())
                        .add(&FormalSum::single(pair[1].clone(), rat(-2))),
                );
            }
            for a in &samples {
                let lhs = cod.id_norm(&m.apply(a)?)?;
                let rhs = self.witness.eval(&dom.id_norm(a)?)?;
                if lhs > rhs {
                    failures.push(format!(
                        "witness {} fails for {} at degree {n} on {a}",
                        self.witness, self.label
                    ));
                }
            }
        }
        Ok(failures)
    }
}

/// Certificate that `forward` is a bounded chain homotopy equivalence with
/// inverse `inverse`: `inverse∘forward − id = d∘h + h∘d` on the source and
/// `forward∘inverse − id = d∘k + k∘d` on the target, with every family
/// carrying its own witness.
#[derive(Clone)]
pub struct HomotopyCertificate {
    pub forward: GradedMap,
    pub inverse: GradedMap,
    pub h: GradedMap,
    pub k: GradedMap,
}

impl fmt::Debug for HomotopyCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomotopyCertificate({})", self.forward.label)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EquivalenceReport {
    pub exact_failures: Vec<String>,
    pub witness_failures: Vec<String>,
    pub checked_keys: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.exact_failures.is_empty() && self.witness_failures.is_empty()
    }
}

impl HomotopyCertificate {
    pub fn identity(c: &ChainComplex) -> HomotopyCertificate {
        HomotopyCertificate {
            forward: GradedMap::identity(c),
            inverse: GradedMap::identity(c),
            h: GradedMap::zero(c, c, 1),
            k: GradedMap::zero(c, c, 1),
        }
    }

    /// Certificate from an explicit strict inverse (isomorphism case).
    pub fn from_iso(forward: GradedMap, inverse: GradedMap) -> HomotopyCertificate {
        let h = GradedMap::zero(&forward.source, &forward.source, 1);
        let k = GradedMap::zero(&forward.target, &forward.target, 1);
        HomotopyCertificate {
            forward,
            inverse,
            h,
            k,
        }
    }

    pub fn invert(&self) -> HomotopyCertificate {
        HomotopyCertificate {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            h: self.k.clone(),
            k: self.h.clone(),
        }
    }

    /// Certificate for `other.forward ∘ self.forward`.
    pub fn compose(&self, other: &HomotopyCertificate) -> Result<HomotopyCertificate, ComplexError> {
        let forward = other.forward.compose(&self.forward);
        let inverse = self.inverse.compose(&other.inverse);
        // h = h1 + G1∘h2∘F1, k = k2 + F2∘k1∘G2
        let h = self
            .h
            .add(&self.inverse.compose(&other.h).compose(&self.forward))?;
        let k = other
            .k
            .add(&other.forward.compose(&self.k).compose(&other.inverse))?;
        Ok(HomotopyCertificate {
            forward,
            inverse,
            h,
            k,
        })
    }

    /// Transfers the certificate to `forward + dS + Sd`.
    pub fn perturb(&self, s: &GradedMap) -> Result<HomotopyCertificate, ComplexError> {
        let boundary = s.boundary()?;
        let forward = self.forward.add(&boundary)?;
        let h = self.h.add(&self.inverse.compose(s))?;
        let k = self.k.add(&s.compose(&self.inverse))?;
        Ok(HomotopyCertificate {
            forward,
            inverse: self.inverse.clone(),
            h,
            k,
        })
    }

    /// Summandwise certificate on a tagged direct sum.
    pub fn direct_sum(certs: &[&HomotopyCertificate]) -> Result<HomotopyCertificate, ComplexError> {
        let sources: Vec<&ChainComplex> = certs.iter().map(|c| &c.forward.source).collect();
        let targets: Vec<&ChainComplex> = certs.iter().map(|c| &c.forward.target).collect();
        let source = ChainComplex::direct_sum(&sources)?;
        let target = ChainComplex::direct_sum(&targets)?;
        let build = |pick: &dyn Fn(&HomotopyCertificate) -> &GradedMap,
                     src: &ChainComplex,
                     tgt: &ChainComplex,
                     shift: i64|
         -> Result<GradedMap, ComplexError> {
            let mut comps = BTreeMap::new();
            let parts: Vec<GradedMap> = certs.iter().map(|c| pick(c).clone()).collect();
            for n in src.support() {
                let dom = src.module(n);
                let cod = tgt.module(n + shift);
                let parts = parts.clone();
                comps.insert(
                    n,
                    ModuleMap {
                        label: "⊕".into(),
                        domain: dom,
                        codomain: cod,
                        rule: MapRule::Lazy(Arc::new(move |k: &Key| match k {
                            Key::Tagged(i, inner) => {
                                let img = parts[*i as usize].component(n).apply_key(inner)?;
                                Ok(img.map_keys(|kk| Key::tagged(*i, kk.clone())))
                            }
                            _ => Err(ModuleError::UnknownKey(k.to_string())),
                        })),
                    },
                );
            }
            let mut w = bounding::constant(0);
            for c in certs {
                w = witness_sum(&w, &pick(c).witness)?;
            }
            Ok(GradedMap::new("⊕", src.clone(), tgt.clone(), shift, comps, w))
        };
        Ok(HomotopyCertificate {
            forward: build(&|c| &c.forward, &source, &target, 0)?,
            inverse: build(&|c| &c.inverse, &target, &source, 0)?,
            h: build(&|c| &c.h, &source, &source, 1)?,
            k: build(&|c| &c.k, &target, &target, 1)?,
        })
    }
}

/// Runs every exactness and boundedness check a certificate claims.
pub fn verify_equivalence(
    cert: &HomotopyCertificate,
    cutoff: &Rat,
) -> Result<EquivalenceReport, ComplexError> {
    let mut report = EquivalenceReport::default();
    for (label, map) in [("forward", &cert.forward), ("inverse", &cert.inverse)] {
        for (n, k) in map.commutes_with_d(cutoff)? {
            report
                .exact_failures
                .push(format!("{label} fails to chain-commute at degree {n}, key {k}"));
        }
    }
    // G∘F − id = dh + hd on the source
    let gf = cert.inverse.compose(&cert.forward);
    let lhs = gf.sub(&GradedMap::identity(&cert.forward.source))?;
    let rhs = cert.h.boundary()?;
    for (n, k) in lhs.difference_on_keys(&rhs, cutoff)? {
        report
            .exact_failures
            .push(format!("G∘F − id ≠ dh + hd at degree {n}, key {k}"));
    }
    // F∘G − id = dk + kd on the target
    let fg = cert.forward.compose(&cert.inverse);
    let lhs = fg.sub(&GradedMap::identity(&cert.forward.target))?;
    let rhs = cert.k.boundary()?;
    for (n, k) in lhs.difference_on_keys(&rhs, cutoff)? {
        report
            .exact_failures
            .push(format!("F∘G − id ≠ dk + kd at degree {n}, key {k}"));
    }
    for map in [&cert.forward, &cert.inverse, &cert.h, &cert.k] {
        report.witness_failures.extend(map.verify_witness(cutoff)?);
    }
    for n in cert.forward.source.support() {
        report.checked_keys += cert.forward.source.test_keys(n, cutoff)?.len();
    }
    Ok(report)
}

/// Certificate that a complex contracts: `d∘c + c∘d = id`.
#[derive(Clone)]
pub struct ContractionCertificate {
    pub c: GradedMap,
}

impl fmt::Debug for ContractionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContractionCertificate({})", self.c.source.label)
    }
}

impl ContractionCertificate {
    pub fn verify(&self, cutoff: &Rat) -> Result<EquivalenceReport, ComplexError> {
        let mut report = EquivalenceReport::default();
        let lhs = self.c.boundary()?;
        let id = GradedMap::identity(&self.c.source);
        for (n, k) in lhs.difference_on_keys(&id, cutoff)? {
            report
                .exact_failures
                .push(format!("dc + cd ≠ id at degree {n}, key {k}"));
        }
        report.witness_failures.extend(self.c.verify_witness(cutoff)?);
        Ok(report)
    }

    /// Moves a contraction across an equivalence, in either direction:
    /// from the target (`c' = G∘c∘F − h`) or to the target (`c' = F∘c∘G − k`).
    pub fn transport_to_source(
        cert: &HomotopyCertificate,
        c_target: &ContractionCertificate,
    ) -> Result<ContractionCertificate, ComplexError> {
        let moved = cert
            .inverse
            .compose(&c_target.c)
            .compose(&cert.forward)
            .sub(&cert.h)?;
        Ok(ContractionCertificate { c: moved })
    }

    pub fn transport_to_target(
        cert: &HomotopyCertificate,
        c_source: &ContractionCertificate,
    ) -> Result<ContractionCertificate, ComplexError> {
        let moved = cert
            .forward
            .compose(&c_source.c)
            .compose(&cert.inverse)
            .sub(&cert.k)?;
        Ok(ContractionCertificate { c: moved })
    }
}

/// A degreewise-split short exact sequence of complexes
/// `A ↪ B ↠ C` with complementary splitting data: `q∘σ = id`, `ρ∘i = id`,
/// `i∘ρ + σ∘q = id`. `i` and `q` are chain maps; `σ` and `ρ` are graded.
#[derive(Clone)]
pub struct ChainSes {
    pub kernel: ChainComplex,
    pub total: ChainComplex,
    pub quotient: ChainComplex,
    pub i: GradedMap,
    pub q: GradedMap,
    pub sigma: GradedMap,
    pub rho: GradedMap,
}

impl ChainSes {
    pub fn verify(&self, cutoff: &Rat) -> Result<Vec<String>, ComplexError> {
        let mut bad = Vec::new();
        for (n, k) in self.i.commutes_with_d(cutoff)? {
            bad.push(format!("i not a chain map at {n}, {k}"));
        }
        for (n, k) in self.q.commutes_with_d(cutoff)? {
            bad.push(format!("q not a chain map at {n}, {k}"));
        }
        let qs = self.q.compose(&self.sigma);
        for (n, k) in qs.difference_on_keys(&GradedMap::identity(&self.quotient), cutoff)? {
            bad.push(format!("q∘σ ≠ id at {n}, {k}"));
        }
        let ri = self.rho.compose(&self.i);
        for (n, k) in ri.difference_on_keys(&GradedMap::identity(&self.kernel), cutoff)? {
            bad.push(format!("ρ∘i ≠ id at {n}, {k}"));
        }
        let comp = self
            .i
            .compose(&self.rho)
            .add(&self.sigma.compose(&self.q))?;
        for (n, k) in comp.difference_on_keys(&GradedMap::identity(&self.total), cutoff)? {
            bad.push(format!("i∘ρ + σ∘q ≠ id at {n}, {k}"));
        }
        let qi = self.q.compose(&self.i);
        for (n, k) in qi.difference_on_keys(&GradedMap::zero(&self.kernel, &self.quotient, 0), cutoff)? {
            bad.push(format!("q∘i ≠ 0 at {n}, {k}"));
        }
        Ok(bad)
    }
}

/// Contractible kernel makes the quotient map an equivalence: builds the
/// chain-map section `ψ = σ − i∘c∘ρ∘(dσ − σd)` with `q∘ψ = id` exactly, and
/// the homotopy `h = −i∘c∘ρ∘(id − ψ∘q)`.
pub fn quotient_equivalence(
    ses: &ChainSes,
    contraction: &ContractionCertificate,
) -> Result<HomotopyCertificate, ComplexError> {
    let d_total = GradedMap::differential(&ses.total);
    let d_quot = GradedMap::differential(&ses.quotient);
    let defect = d_total.compose(&ses.sigma).sub(&ses.sigma.compose(&d_quot))?;
    let dprime = ses.rho.compose(&defect);
    let psi = ses
        .sigma
        .sub(&ses.i.compose(&contraction.c).compose(&dprime))?
        .with_label("ψ");
    let e = GradedMap::identity(&ses.total).sub(&psi.compose(&ses.q))?;
    let e_tilde = ses.rho.compose(&e);
    let h = ses
        .i
        .compose(&contraction.c)
        .compose(&e_tilde)
        .neg()
        .with_label("h");
    let k = GradedMap::zero(&ses.quotient, &ses.quotient, 1);
    Ok(HomotopyCertificate {
        forward: ses.q.clone(),
        inverse: psi,
        h,
        k,
    })
}

/// Contractible quotient makes the kernel inclusion an equivalence: builds
/// the chain retraction `φ = ρ − D̃∘c∘q` with `φ∘i = id` exactly.
pub fn kernel_equivalence(
    ses: &ChainSes,
    quotient_contraction: &ContractionCertificate,
) -> Result<HomotopyCertificate, ComplexError> {
    let d_total = GradedMap::differential(&ses.total);
    let d_kernel = GradedMap::differential(&ses.kernel);
    // D = ρ∘d − d∘ρ kills i(A) and factors as D̃∘q with D̃ = D∘σ
    let defect = ses.rho.compose(&d_total).sub(&d_kernel.compose(&ses.rho))?;
    let d_tilde = defect.compose(&ses.sigma);
    let x = d_tilde.compose(&quotient_contraction.c).neg();
    let phi = ses.rho.add(&x.compose(&ses.q))?.with_label("φ");
    let e = GradedMap::identity(&ses.total).sub(&ses.i.compose(&phi))?;
    let e_tilde = e.compose(&ses.sigma);
    let k = e_tilde
        .compose(&quotient_contraction.c)
        .compose(&ses.q)
        .neg()
        .with_label("k");
    let h = GradedMap::zero(&ses.kernel, &ses.kernel, 1);
    Ok(HomotopyCertificate {
        forward: ses.i.clone(),
        inverse: phi,
        h,
        k,
    })
}

/// A cofibration of complexes: a degreewise admissible monomorphism with its
/// chosen cofiber presentation and complementary splitting, plus the linear
/// bound for the section.
#[derive(Clone)]
pub struct Cofibration {
    pub ses: ChainSes,
    pub section_bound: (Rat, Rat),
}

impl fmt::Debug for Cofibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Cofibration({} ↪ {})",
            self.ses.kernel.label, self.ses.total.label
        )
    }
}

impl Cofibration {
    /// The canonical inclusion `X ↪ X ⊕ R` with cofiber `R`.
    pub fn summand_inclusion(x: &ChainComplex, r: &ChainComplex) -> Result<Cofibration, ComplexError> {
        let total = ChainComplex::direct_sum(&[x, r])?;
        let i = tag_inclusion(x, &total, 0);
        let rho = tag_projection(&total, x, 0);
        let q = tag_projection(&total, r, 1);
        let sigma = tag_inclusion(r, &total, 1);
        Ok(Cofibration {
            ses: ChainSes {
                kernel: x.clone(),
                total,
                quotient: r.clone(),
                i,
                q,
                sigma,
                rho,
            },
            section_bound: (rat(1), rat(0)),
        })
    }

    /// Post-composes the mono with a strict isomorphism (certificate with
    /// zero homotopies); the splitting transports along the strict inverse.
    pub fn twist(&self, iso: &HomotopyCertificate) -> Result<Cofibration, ComplexError> {
        let i = iso.forward.compose(&self.ses.i);
        let q = self.ses.q.compose(&iso.inverse);
        let sigma = iso.forward.compose(&self.ses.sigma);
        let rho = self.ses.rho.compose(&iso.inverse);
        Ok(Cofibration {
            ses: ChainSes {
                kernel: self.ses.kernel.clone(),
                total: iso.forward.target.clone(),
                quotient: self.ses.quotient.clone(),
                i,
                q,
                sigma,
                rho,
            },
            section_bound: self.section_bound.clone(),
        })
    }

    pub fn verify(&self, cutoff: &Rat) -> Result<Vec<String>, ComplexError> {
        let mut bad = self.ses.verify(cutoff)?;
        // section bound on singleton test keys
        let (a, b) = &self.section_bound;
        for n in self.ses.quotient.support() {
            for k in self.ses.quotient.test_keys(n, cutoff)? {
                let u = FormalSum::basis(k.clone());
                let img = self.ses.sigma.apply(n, &u)?;
                let lhs = self
                    .ses
                    .total
                    .module(n)
                    .id_norm(&img)?;
                let rhs = a * self.ses.quotient.module(n).id_norm(&u)? + b;
                if lhs > rhs {
                    bad.push(format!("section bound fails at degree {n}, key {k}"));
                }
            }
        }
        Ok(bad)
    }
}

fn tag_inclusion(part: &ChainComplex, total: &ChainComplex, tag: u32) -> GradedMap {
    let mut comps = BTreeMap::new();
    for n in part.support() {
        let dom = part.module(n);
        let cod = total.module(n);
        comps.insert(
            n,
            ModuleMap {
                label: format!("in{tag}"),
                domain: dom,
                codomain: cod,
                rule: MapRule::Relabel(Arc::new(move |k: &Key| {
                    Ok(Some((rat(1), Key::tagged(tag, k.clone()))))
                })),
            },
        );
    }
    GradedMap::new(
        &format!("in{tag}"),
        part.clone(),
        total.clone(),
        0,
        comps,
        bounding::identity(),
    )
}

fn tag_projection(total: &ChainComplex, part: &ChainComplex, tag: u32) -> GradedMap {
    let mut comps = BTreeMap::new();
    for n in total.support() {
        let dom = total.module(n);
        let cod = part.module(n);
        comps.insert(
            n,
            ModuleMap {
                label: format!("pr{tag}"),
                domain: dom,
                codomain: cod,
                rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                    Key::Tagged(i, inner) if *i == tag => {
                        Ok(Some((rat(1), inner.as_ref().clone())))
                    }
                    Key::Tagged(_, _) => Ok(None),
                    _ => Err(ModuleError::UnknownKey(k.to_string())),
                })),
            },
        );
    }
    GradedMap::new(
        &format!("pr{tag}"),
        total.clone(),
        part.clone(),
        0,
        comps,
        bounding::identity(),
    )
}

/// The mapping cone `Cone(f)_n = B_n ⊕ A_{n-1}` (tags 0, 1) with
/// `d(b, x) = (d b + f x, −d x)`, together with its part maps.
#[derive(Clone)]
pub struct ConeData {
    pub complex: ChainComplex,
    pub base: ChainComplex,
    pub apex: ChainComplex,
    /// `B → Cone`, chain map
    pub incl_base: GradedMap,
    /// `A → Cone`, shift +1, graded only
    pub incl_apex: GradedMap,
    /// `Cone → B`, graded only
    pub proj_base: GradedMap,
    /// `Cone → A`, shift −1, graded only
    pub proj_apex: GradedMap,
}

pub fn cone(f: &GradedMap) -> Result<ConeData, ComplexError> {
    assert_eq!(f.shift, 0, "cone expects a chain map");
    let a = f.source.clone();
    let b = f.target.clone();
    let ring = b.ring;
    let lo = b.lo.min(a.lo + 1).min(a.lo);
    let hi = b.hi.max(a.hi + 1);
    let mut degrees = BTreeMap::new();
    for n in lo..=hi {
        degrees.insert(n, Module::tagged_sum(vec![b.module(n), a.module(n - 1)]));
    }
    let mut diffs = BTreeMap::new();
    for n in lo..=hi {
        let dom = degrees.get(&n).unwrap().clone();
        let cod = degrees
            .get(&(n - 1))
            .cloned()
            .unwrap_or_else(|| Module::zero(ring));
        let db = b.differential(n);
        let da = a.differential(n - 1);
        let fc = f.component(n - 1);
        diffs.insert(
            n,
            ModuleMap {
                label: "d_cone".into(),
                domain: dom,
                codomain: cod,
                rule: MapRule::Lazy(Arc::new(move |k: &Key| match k {
                    Key::Tagged(0, y) => Ok(db
                        .apply_key(y)?
                        .map_keys(|kk| Key::tagged(0, kk.clone()))),
                    Key::Tagged(1, x) => {
                        let into_b = fc.apply_key(x)?.map_keys(|kk| Key::tagged(0, kk.clone()));
                        let into_a = da
                            .apply_key(x)?
                            .neg()
                            .map_keys(|kk| Key::tagged(1, kk.clone()));
                        Ok(into_b.add(&into_a))
                    }
                    _ => Err(ModuleError::UnknownKey(k.to_string())),
                })),
            },
        );
    }
    let witness = witness_sum(
        &witness_sum(&b.diff_witness, &a.diff_witness)?,
        &f.witness,
    )?;
    let complex = ChainComplex::new(
        &format!("Cone({})", f.label),
        ring,
        degrees,
        diffs,
        witness,
    )?;
    let shifted_a = a.shift(1);
    let incl_base = tag_inclusion(&b, &complex, 0);
    let proj_base = tag_projection(&complex, &b, 0);
    // apex maps carry the degree offset: A_{n-1} sits in Cone_n
    let incl_apex = {
        let mut g = tag_inclusion(&shifted_a, &complex, 1);
        g.source = a.clone();
        let comps: BTreeMap<i64, ModuleMap> =
            a.support().map(|n| (n, g.component(n + 1).clone_with_domain(a.module(n)))).collect();
        GradedMap::new("in_apex", a.clone(), complex.clone(), 1, comps, bounding::identity())
    };
    let proj_apex = {
        let mut comps = BTreeMap::new();
        for n in complex.support() {
            let dom = complex.module(n);
            let cod = a.module(n - 1);
            comps.insert(
                n,
                ModuleMap {
                    label: "pr_apex".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(1, inner) => Ok(Some((rat(1), inner.as_ref().clone()))),
                        Key::Tagged(_, _) => Ok(None),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("pr_apex", complex.clone(), a.clone(), -1, comps, bounding::identity())
    };
    Ok(ConeData {
        complex,
        base: b,
        apex: a,
        incl_base,
        incl_apex,
        proj_base,
        proj_apex,
    })
}

impl ModuleMap {
    fn clone_with_domain(&self, domain: Module) -> ModuleMap {
        let mut out = self.clone();
        out.domain = domain;
        out
    }
}

/// Contraction of `Cone(f)` built from a homotopy-equivalence certificate
/// for `f`. With `k' = f∘h∘G + k − k∘f∘G` and `Q = k∘f − f∘h`, the
/// contraction is `c = [[−k', Q∘h], [G, h]]` in the (base, apex) block
/// decomposition; the identity `dc + cd = id` holds exactly.
pub fn cone_contraction_from_equivalence(
    cert: &HomotopyCertificate,
    cone: &ConeData,
) -> Result<ContractionCertificate, ComplexError> {
    let f = &cert.forward;
    let g = &cert.inverse;
    let h = &cert.h;
    let k = &cert.k;
    let fg = f.compose(g);
    let k_prime = f
        .compose(h)
        .compose(g)
        .add(k)?
        .sub(&k.compose(&fg))?;
    let q_map = k.compose(f).sub(&f.compose(h))?;
    let c = cone
        .incl_base
        .compose(&k_prime.neg())
        .compose(&cone.proj_base)
        .add(
            &cone
                .incl_base
                .compose(&q_map.compose(h))
                .compose(&cone.proj_apex),
        )?
        .add(&cone.incl_apex.compose(g).compose(&cone.proj_base))?
        .add(&cone.incl_apex.compose(h).compose(&cone.proj_apex))?
        .with_label("c_cone");
    Ok(ContractionCertificate { c })
}

/// Reads a homotopy-equivalence certificate for `g` off a contraction of
/// `Cone(g)`: the inverse is the (base → apex) block, `h` the (apex → apex)
/// block, `k` minus the (base → base) block.
pub fn equivalence_from_cone_contraction(
    g_map: &GradedMap,
    cone: &ConeData,
    contraction: &ContractionCertificate,
) -> Result<HomotopyCertificate, ComplexError> {
    let c = &contraction.c;
    let inverse = cone
        .proj_apex
        .compose(c)
        .compose(&cone.incl_base)
        .with_label("G");
    let h = cone
        .proj_apex
        .compose(c)
        .compose(&cone.incl_apex)
        .with_label("h");
    let k = cone
        .proj_base
        .compose(c)
        .compose(&cone.incl_base)
        .neg()
        .with_label("k");
    Ok(HomotopyCertificate {
        forward: g_map.clone(),
        inverse,
        h,
        k,
    })
}

/// The algebraic mapping cylinder with its structure maps and certificates.
/// `Cyl(* → A)` is `A` itself with identity structure maps.
#[derive(Clone)]
pub struct CylinderData {
    pub complex: ChainComplex,
    pub source: ChainComplex,
    pub target: ChainComplex,
    /// front inclusion `j1 : A ↪ Cyl(f)`, a cofibration
    pub front: GradedMap,
    pub front_cofibration: Cofibration,
    /// back inclusion `j2 : B ↪ Cyl(f)`, a cofibration
    pub back: GradedMap,
    pub back_cofibration: Cofibration,
    /// `p : Cyl(f) → B` with `p∘j2 = id` and `p∘j1 = f`
    pub projection: GradedMap,
    /// certificate that `p` is an equivalence with inverse `j2`
    pub p_certificate: HomotopyCertificate,
    /// the cone of `f`, which is the cofiber of the front inclusion
    pub cone: ConeData,
    pub degenerate: bool,
}

pub fn cylinder(f: &GradedMap) -> Result<CylinderData, ComplexError> {
    assert_eq!(f.shift, 0, "cylinder expects a chain map");
    let a = f.source.clone();
    let b = f.target.clone();
    let cone_data = cone(f)?;
    if a.is_zero() {
        // Cyl(* → A) = A with identity structure maps
        let id_cert = HomotopyCertificate::identity(&b);
        let front = GradedMap::zero(&a, &b, 0);
        let front_cof = Cofibration {
            ses: ChainSes {
                kernel: a.clone(),
                total: b.clone(),
                quotient: b.clone(),
                i: GradedMap::zero(&a, &b, 0),
                q: GradedMap::identity(&b),
                sigma: GradedMap::identity(&b),
                rho: GradedMap::zero(&b, &a, 0),
            },
            section_bound: (rat(1), rat(0)),
        };
        let back_cof = Cofibration {
            ses: ChainSes {
                kernel: b.clone(),
                total: b.clone(),
                quotient: ChainComplex::zero(b.ring),
                i: GradedMap::identity(&b),
                q: GradedMap::zero(&b, &ChainComplex::zero(b.ring), 0),
                sigma: GradedMap::zero(&ChainComplex::zero(b.ring), &b, 0),
                rho: GradedMap::identity(&b),
            },
            section_bound: (rat(1), rat(0)),
        };
        return Ok(CylinderData {
            complex: b.clone(),
            source: a,
            target: b.clone(),
            front,
            front_cofibration: front_cof,
            back: GradedMap::identity(&b),
            back_cofibration: back_cof,
            projection: GradedMap::identity(&b),
            p_certificate: id_cert,
            cone: cone_data,
            degenerate: true,
        });
    }
    let ring = b.ring;
    let lo = a.lo.min(b.lo);
    let hi = (a.hi + 1).max(b.hi);
    let mut degrees = BTreeMap::new();
    for n in lo..=hi {
        degrees.insert(
            n,
            Module::tagged_sum(vec![a.module(n), a.module(n - 1), b.module(n)]),
        );
    }
    let mut diffs = BTreeMap::new();
    for n in lo..=hi {
        let dom = degrees.get(&n).unwrap().clone();
        let cod = degrees
            .get(&(n - 1))
            .cloned()
            .unwrap_or_else(|| Module::zero(ring));
        let da = a.differential(n);
        let da1 = a.differential(n - 1);
        let db = b.differential(n);
        let fc = f.component(n - 1);
        diffs.insert(
            n,
            ModuleMap {
                label: "d_cyl".into(),
                domain: dom,
                codomain: cod,
                rule: MapRule::Lazy(Arc::new(move |k: &Key| match k {
                    Key::Tagged(0, x) => Ok(da
                        .apply_key(x)?
                        .map_keys(|kk| Key::tagged(0, kk.clone()))),
                    Key::Tagged(1, x) => {
                        let front_part = FormalSum::single(Key::tagged(0, x.as_ref().clone()), rat(-1));
                        let mid = da1
                            .apply_key(x)?
                            .neg()
                            .map_keys(|kk| Key::tagged(1, kk.clone()));
                        let back = fc.apply_key(x)?.map_keys(|kk| Key::tagged(2, kk.clone()));
                        Ok(front_part.add(&mid).add(&back))
                    }
                    Key::Tagged(2, y) => Ok(db
                        .apply_key(y)?
                        .map_keys(|kk| Key::tagged(2, kk.clone()))),
                    _ => Err(ModuleError::UnknownKey(k.to_string())),
                })),
            },
        );
    }
    let witness = witness_sum(
        &witness_sum(
            &witness_sum(&a.diff_witness, &b.diff_witness)?,
            &f.witness,
        )?,
        &bounding::identity(),
    )?;
    let complex = ChainComplex::new(
        &format!("Cyl({})", f.label),
        ring,
        degrees,
        diffs,
        witness,
    )?;
    let front = tag_inclusion(&a, &complex, 0).with_label("j1");
    let back = tag_inclusion(&b, &complex, 2).with_label("j2");
    // p(a, a', b) = f(a) + b
    let projection = {
        let mut comps = BTreeMap::new();
        for n in complex.support() {
            let dom = complex.module(n);
            let cod = b.module(n);
            let fc = f.component(n);
            comps.insert(
                n,
                ModuleMap {
                    label: "p".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Lazy(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, x) => fc.apply_key(x),
                        Key::Tagged(1, _) => Ok(FormalSum::zero()),
                        Key::Tagged(2, y) => Ok(FormalSum::basis(y.as_ref().clone())),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new(
            "p",
            complex.clone(),
            b.clone(),
            0,
            comps,
            witness_sum(&f.witness, &bounding::identity())?,
        )
    };
    // h(a, a', b) = (0, a, 0) satisfies j2∘p − id = dh + hd
    let homotopy = {
        let mut comps = BTreeMap::new();
        for n in complex.support() {
            let dom = complex.module(n);
            let cod = complex
                .module(n + 1);
            comps.insert(
                n,
                ModuleMap {
                    label: "h_cyl".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, x) => {
                            Ok(Some((rat(1), Key::tagged(1, x.as_ref().clone()))))
                        }
                        Key::Tagged(_, _) => Ok(None),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("h_cyl", complex.clone(), complex.clone(), 1, comps, bounding::identity())
    };
    let p_certificate = HomotopyCertificate {
        forward: projection.clone(),
        inverse: back.clone(),
        h: homotopy,
        k: GradedMap::zero(&b, &b, 1),
    };
    // front cofiber is the cone: q kills tag0, sends (a', b) to cone (b, a')
    let cone_cx = cone_data.complex.clone();
    let front_q = {
        let mut comps = BTreeMap::new();
        for n in complex.support() {
            let dom = complex.module(n);
            let cod = cone_cx.module(n);
            comps.insert(
                n,
                ModuleMap {
                    label: "q_front".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, _) => Ok(None),
                        Key::Tagged(1, x) => Ok(Some((rat(1), Key::tagged(1, x.as_ref().clone())))),
                        Key::Tagged(2, y) => Ok(Some((rat(1), Key::tagged(0, y.as_ref().clone())))),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("q_front", complex.clone(), cone_cx.clone(), 0, comps, bounding::identity())
    };
    let front_sigma = {
        let mut comps = BTreeMap::new();
        for n in cone_cx.support() {
            let dom = cone_cx.module(n);
            let cod = complex.module(n);
            comps.insert(
                n,
                ModuleMap {
                    label: "σ_front".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, y) => Ok(Some((rat(1), Key::tagged(2, y.as_ref().clone())))),
                        Key::Tagged(1, x) => Ok(Some((rat(1), Key::tagged(1, x.as_ref().clone())))),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("σ_front", cone_cx.clone(), complex.clone(), 0, comps, bounding::identity())
    };
    let front_cofibration = Cofibration {
        ses: ChainSes {
            kernel: a.clone(),
            total: complex.clone(),
            quotient: cone_cx.clone(),
            i: front.clone(),
            q: front_q,
            sigma: front_sigma,
            rho: tag_projection(&complex, &a, 0),
        },
        section_bound: (rat(1), rat(0)),
    };
    // back cofiber is Cone(−id_A)
    let minus_id = GradedMap::identity(&a).neg().with_label("-id");
    let back_cone = cone(&minus_id)?;
    let back_q = {
        let mut comps = BTreeMap::new();
        let bc = back_cone.complex.clone();
        for n in complex.support() {
            let dom = complex.module(n);
            let cod = bc.module(n);
            comps.insert(
                n,
                ModuleMap {
                    label: "q_back".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, x) => Ok(Some((rat(1), Key::tagged(0, x.as_ref().clone())))),
                        Key::Tagged(1, x) => Ok(Some((rat(1), Key::tagged(1, x.as_ref().clone())))),
                        Key::Tagged(2, _) => Ok(None),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("q_back", complex.clone(), bc, 0, comps, bounding::identity())
    };
    let back_sigma = {
        let mut comps = BTreeMap::new();
        let bc = back_cone.complex.clone();
        for n in bc.support() {
            let dom = bc.module(n);
            let cod = complex.module(n);
            comps.insert(
                n,
                ModuleMap {
                    label: "σ_back".into(),
                    domain: dom,
                    codomain: cod,
                    rule: MapRule::Relabel(Arc::new(move |k: &Key| match k {
                        Key::Tagged(0, x) => Ok(Some((rat(1), Key::tagged(0, x.as_ref().clone())))),
                        Key::Tagged(1, x) => Ok(Some((rat(1), Key::tagged(1, x.as_ref().clone())))),
                        _ => Err(ModuleError::UnknownKey(k.to_string())),
                    })),
                },
            );
        }
        GradedMap::new("σ_back", back_cone.complex.clone(), complex.clone(), 0, comps, bounding::identity())
    };
    let back_cofibration = Cofibration {
        ses: ChainSes {
            kernel: b.clone(),
            total: complex.clone(),
            quotient: back_cone.complex.clone(),
            i: back.clone(),
            q: back_q,
            sigma: back_sigma,
            rho: tag_projection(&complex, &b, 2),
        },
        section_bound: (rat(1), rat(0)),
    };
    Ok(CylinderData {
        complex,
        source: a,
        target: b,
        front,
        front_cofibration,
        back,
        back_cofibration,
        projection,
        p_certificate,
        cone: cone_data,
        degenerate: false,
    })
}

/// Pushout of `f : X → Z` along the cofibration `i : X ↪ Y`:
/// `W = Z ⊕ U` on the cofiber presentation, with the canonical cofibration
/// `j : Z ↪ W` (section produced by the diagram chase) and the glueing map
/// `η : Y → W`, `η(y) = (f∘ρ(y), q(y))`.
#[derive(Clone)]
pub struct PushoutData {
    pub complex: ChainComplex,
    pub j: Cofibration,
    pub eta: GradedMap,
}

pub fn pushout_along_cofibration(
    i: &Cofibration,
    f: &GradedMap,
) -> Result<PushoutData, ComplexError> {
    let z = f.target.clone();
    let u = i.ses.quotient.clone();
    let y = i.ses.total.clone();
    let ring = z.ring;
    let lo = z.lo.min(u.lo);
    let hi = z.hi.max(u.hi);
    let mut degrees = BTreeMap::new();
    for n in lo..=hi {
        degrees.insert(n, Module::tagged_sum(vec![z.module(n), u.module(n)]));
    }
    // connecting part: f∘ρ∘d_Y∘σ : U_n → Z_{n-1}
    let d_y = GradedMap::differential(&y);
    let connect = f
        .compose(&i.ses.rho)
        .compose(&d_y)
        .compose(&i.ses.sigma);
    let mut diffs = BTreeMap::new();
    for n in lo..=hi {
        let dom = degrees.get(&n).unwrap().clone();
        let cod = degrees
            .get(&(n - 1))
            .cloned()
            .unwrap_or_else(|| Module::zero(ring));
        let dz = z.differential(n);
        let du = u.differential(n);
        let cn = connect.component(n);
        diffs.insert(
            n,
            ModuleMap {
                label: "d_pushout".into(),
                domain: dom,
                codomain: cod,
                rule: MapRule::Lazy(Arc::new(move |k: &Key| match k {
                    Key::Tagged(0, zk) => Ok(dz
                        .apply_key(zk)?
                        .map_keys(|kk| Key::tagged(0, kk.clone()))),
                    Key::Tagged(1, uk) => {
                        let zpart = cn
                            .apply_key(uk)?
                            .map_keys(|kk| Key::tagged(0, kk.clone()));
                        let upart = du
                            .apply_key(uk)?
                            .map_keys(|kk| Key::tagged(1, kk.clone()));
                        Ok(zpart.add(&upart))
                    }
                    _ => Err(ModuleError::UnknownKey(k.to_string())),
                })),
            },
        );
    }
    let witness = witness_sum(
        &witness_sum(&z.diff_witness, &u.diff_witness)?,
        &connect.witness,
    )?;
    let complex = ChainComplex::new(
        &format!("({} ∪_{} {})", z.label, i.ses.kernel.label, y.label),
        ring,
        degrees,
        diffs,
        witness,
    )?;
    let j_map = tag_inclusion(&z, &complex, 0).with_label("j");
    let q_w = tag_projection(&complex, &u, 1).with_label("q_w");
    let sigma_w = tag_inclusion(&u, &complex, 1).with_label("σ_w");
    let rho_w = tag_projection(&complex, &z, 0).with_label("ρ_w");
    let j = Cofibration {
        ses: ChainSes {
            kernel: z.clone(),
            total: complex.clone(),
            quotient: u.clone(),
            i: j_map,
            q: q_w,
            sigma: sigma_w,
            rho: rho_w,
        },
        section_bound: i.section_bound.clone(),
    };
    // η = j∘f∘ρ + σ_w∘q
    let eta = j
        .ses
        .i
        .compose(&f.compose(&i.ses.rho))
        .add(&j.ses.sigma.compose(&i.ses.q))?
        .with_label("η");
    Ok(PushoutData { complex, j, eta })
}

/// Which two of `{f, g, g∘f}` arrive with certificates.
pub enum SaturationGiven {
    FAndG {
        f: HomotopyCertificate,
        g: HomotopyCertificate,
    },
    FAndComposite {
        f: HomotopyCertificate,
        composite: HomotopyCertificate,
    },
    GAndComposite {
        g: HomotopyCertificate,
        composite: HomotopyCertificate,
    },
}

/// Completes the third certificate from the other two, following the
/// cone-and-cylinder pushout diagram: the bottom short exact sequence
/// `Cone(f) ↪ W ↠ Cone(g)` with `W` the pushout of `Cone(f) ← B ↪ Cyl(g)`,
/// the comparison `θ : W → Cone(g∘f)` with contractible kernel, and the
/// quotient/kernel equivalences moving contractions around the diagram.
pub fn saturation_complete(
    f_map: &GradedMap,
    g_map: &GradedMap,
    given: SaturationGiven,
) -> Result<HomotopyCertificate, ComplexError> {
    if !f_map.source.is_finite() || !g_map.target.is_finite() || !f_map.target.is_finite() {
        return Err(ComplexError::NotFinite(
            "saturation traverses whole bases".into(),
        ));
    }
    match given {
        SaturationGiven::FAndG { f, g } => f.compose(&g),
        SaturationGiven::FAndComposite { f, composite } => {
            let diagram = SaturationDiagram::build(f_map, g_map)?;
            let c_cone_f = cone_contraction_from_equivalence(&f, &diagram.cone_f)?;
            let cert_pi = quotient_equivalence(&diagram.bottom_ses, &c_cone_f)?;
            let c_w = diagram.contraction_of_w(&composite)?;
            let c_cone_g = ContractionCertificate::transport_to_target(&cert_pi, &c_w)?;
            equivalence_from_cone_contraction(g_map, &diagram.cone_g, &c_cone_g)
        }
        SaturationGiven::GAndComposite { g, composite } => {
            let diagram = SaturationDiagram::build(f_map, g_map)?;
            let c_cone_g = cone_contraction_from_equivalence(&g, &diagram.cone_g)?;
            let cert_incl = kernel_equivalence(&diagram.bottom_ses, &c_cone_g)?;
            let c_w = diagram.contraction_of_w(&composite)?;
            let c_cone_f = ContractionCertificate::transport_to_source(&cert_incl, &c_w)?;
            equivalence_from_cone_contraction(f_map, &diagram.cone_f, &c_cone_f)
        }
    }
}

/// The objects of the saturation proof, built once per completion.
struct SaturationDiagram {
    cone_f: ConeData,
    cone_g: ConeData,
    cone_gf: ConeData,
    /// `Cone(f) ↪ W ↠ Cone(g)`
    bottom_ses: ChainSes,
    /// `θ : W → Cone(g∘f)` as part of its own split SES with kernel
    /// `Cone(−id_B)`
    theta_ses: ChainSes,
    kernel_contraction: ContractionCertificate,
}

impl SaturationDiagram {
    fn build(f_map: &GradedMap, g_map: &GradedMap) -> Result<SaturationDiagram, ComplexError> {
        let b = f_map.target.clone();
        let cone_f = cone(f_map)?;
        let cyl_g = cylinder(g_map)?;
        let cone_g = cyl_g.cone.clone();
        let gf = g_map.compose(f_map).with_label("g∘f");
        let cone_gf = cone(&gf)?;
        // W = Cone(f) ∪_B Cyl(g)
        let push = pushout_along_cofibration(&cyl_g.front_cofibration, &cone_f.incl_base)?;
        let w = push.complex.clone();
        let bottom_ses = push.j.ses.clone();
        // θ(b, x, z, b') = (g b + z, x); kernel is Cone(−id_B)
        let p0 = bottom_ses.rho.clone(); // W → Cone(f)
        let p1 = bottom_ses.q.clone(); // W → Cone(g)
        let i0 = bottom_ses.i.clone(); // Cone(f) → W
        let i1 = bottom_ses.sigma.clone(); // Cone(g) → W
        let theta = cone_gf
            .incl_base
            .compose(&g_map.compose(&cone_f.proj_base).compose(&p0))
            .add(&cone_gf.incl_apex.compose(&cone_f.proj_apex).compose(&p0))?
            .add(&cone_gf.incl_base.compose(&cone_g.proj_base).compose(&p1))?
            .with_label("θ");
        let sigma_theta = i0
            .compose(&cone_f.incl_apex.compose(&cone_gf.proj_apex))
            .add(&i1.compose(&cone_g.incl_base.compose(&cone_gf.proj_base)))?
            .with_label("σ_θ");
        let minus_id_b = GradedMap::identity(&b).neg().with_label("-id_B");
        let kernel_cone = cone(&minus_id_b)?;
        let kernel_cert = HomotopyCertificate::from_iso(minus_id_b.clone(), minus_id_b);
        let kernel_contraction =
            cone_contraction_from_equivalence(&kernel_cert, &kernel_cone)?;
        let iota = i0
            .compose(&cone_f.incl_base.compose(&kernel_cone.proj_base))
            .add(&i1.compose(&cone_g.incl_apex.compose(&kernel_cone.proj_apex)))?
            .add(
                &i1.compose(
                    &cone_g
                        .incl_base
                        .compose(&g_map.compose(&kernel_cone.proj_base))
                        .neg(),
                ),
            )?
            .with_label("ι");
        let rho_theta = kernel_cone
            .incl_base
            .compose(&cone_f.proj_base.compose(&p0))
            .add(&kernel_cone.incl_apex.compose(&cone_g.proj_apex.compose(&p1)))?
            .with_label("ρ_θ");
        let theta_ses = ChainSes {
            kernel: kernel_cone.complex.clone(),
            total: w,
            quotient: cone_gf.complex.clone(),
            i: iota,
            q: theta,
            sigma: sigma_theta,
            rho: rho_theta,
        };
        Ok(SaturationDiagram {
            cone_f,
            cone_g,
            cone_gf,
            bottom_ses,
            theta_ses,
            kernel_contraction: ContractionCertificate {
                c: kernel_contraction.c,
            },
        })
    }

    /// Contraction of the pushout `W` from a certificate for `g∘f`, moved
    /// backwards along `θ`.
    fn contraction_of_w(
        &self,
        composite_cert: &HomotopyCertificate,
    ) -> Result<ContractionCertificate, ComplexError> {
        let cert_theta = quotient_equivalence(&self.theta_ses, &self.kernel_contraction)?;
        let c_cone_gf = cone_contraction_from_equivalence(composite_cert, &self.cone_gf)?;
        ContractionCertificate::transport_to_source(&cert_theta, &c_cone_gf)
    }
}

/// Output of the cylinder factorization `C ↪ E → D`.
pub struct Factorization {
    /// `E = Cyl(j_forward ∘ f)`, finite
    pub e: ChainComplex,
    /// the front inclusion `g : C ↪ E` with its admissibility data
    pub g: Cofibration,
    /// certificate for `h = j_inverse ∘ p : E → D`
    pub h: HomotopyCertificate,
    /// `S : C → D` of degree +1 with `h∘g − f = dS + Sd`
    pub comparison_homotopy: GradedMap,
}

/// Factors a chain map `f : C → D` (finite `C`) through the cylinder of
/// `j_forward ∘ f`, given a certificate `j : D ≃ D'` onto a finite complex:
/// the front inclusion is a cofibration, the projection composed with the
/// inverse of `j` is a certified equivalence, and `h∘g` is chain-homotopic
/// to `f` via the emitted homotopy.
pub fn app2_factorize(
    f_map: &GradedMap,
    j: &HomotopyCertificate,
) -> Result<Factorization, ComplexError> {
    if !f_map.source.is_finite() {
        return Err(ComplexError::NotFinite(f_map.source.label.clone()));
    }
    if !j.forward.target.is_finite() {
        return Err(ComplexError::NotFinite(j.forward.target.label.clone()));
    }
    let f_tilde = j.forward.compose(f_map).with_label("f~");
    let cyl = cylinder(&f_tilde)?;
    let j_inv = j.invert();
    let h = cyl.p_certificate.compose(&j_inv)?;
    // h∘g = j⁻¹∘f~ = f + (d h_j + h_j d)∘f
    let comparison_homotopy = j.h.compose(f_map).with_label("S");
    Ok(Factorization {
        e: cyl.complex.clone(),
        g: cyl.front_cofibration.clone(),
        h,
        comparison_homotopy,
    })
}

impl ChainComplex {
    /// A complex concentrated in one degree.
    pub fn concentrated(
        label: &str,
        ring: NormedRing,
        degree: i64,
        module: Module,
    ) -> Result<ChainComplex, ComplexError> {
        let mut degrees = BTreeMap::new();
        degrees.insert(degree, module);
        ChainComplex::new(label, ring, degrees, BTreeMap::new(), bounding::identity())
    }

    /// A two-term complex `top --d--> bot` in degrees `n, n-1`.
    pub fn two_term(
        label: &str,
        ring: NormedRing,
        top_degree: i64,
        top: Module,
        bot: Module,
        d: ModuleMap,
        diff_witness: BoundingFunction,
    ) -> Result<ChainComplex, ComplexError> {
        let mut degrees = BTreeMap::new();
        degrees.insert(top_degree, top);
        degrees.insert(top_degree - 1, bot);
        let mut diffs = BTreeMap::new();
        diffs.insert(top_degree, d);
        ChainComplex::new(label, ring, degrees, diffs, diff_witness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupElement, GroupModel, LengthOracle};
    use crate::modules::NatWeight;
    use num_bigint::BigInt;

    fn z_elt(k: i64) -> GroupElement {
        GroupElement::Vector(vec![BigInt::from(k)])
    }

    fn zz(inner: &[(&str, i64)]) -> Module {
        let model = GroupModel::integers();
        let oracle = Arc::new(LengthOracle::new(model, rat(64)));
        Module::free_over_group(
            NormedRing::Integers,
            oracle,
            inner.iter().map(|(n, w)| (Key::sym(n), rat(*w))).collect(),
        )
    }

    /// `Z[Z]` in one degree.
    fn sphere(label: &str, degree: i64, name: &str) -> ChainComplex {
        ChainComplex::concentrated(label, NormedRing::Integers, degree, zz(&[(name, 1)])).unwrap()
    }

    /// `Z[Z] = Z[Z]` in degrees `n, n-1` with identity differential.
    fn disc(label: &str, top: i64, name: &str) -> ChainComplex {
        let m_top = zz(&[(name, 1)]);
        let m_bot = zz(&[(name, 1)]);
        let d = ModuleMap::identity(m_top.clone());
        let d = ModuleMap {
            label: "d".into(),
            domain: m_top.clone(),
            codomain: m_bot.clone(),
            rule: d.rule,
        };
        ChainComplex::two_term(
            label,
            NormedRing::Integers,
            top,
            m_top,
            m_bot,
            d,
            bounding::identity(),
        )
        .unwrap()
    }

    fn disc_contraction(c: &ChainComplex, top: i64) -> ContractionCertificate {
        // bottom -> top by the identity
        let mut comps = BTreeMap::new();
        comps.insert(
            top - 1,
            ModuleMap {
                label: "c".into(),
                domain: c.module(top - 1),
                codomain: c.module(top),
                rule: MapRule::Relabel(Arc::new(|k| Ok(Some((rat(1), k.clone()))))),
            },
        );
        ContractionCertificate {
            c: GradedMap::new("c", c.clone(), c.clone(), 1, comps, bounding::identity()),
        }
    }

    /// Strict iso certificate: multiplication by the group generator on
    /// every degree of a one-generator complex.
    fn shift_iso(c: &ChainComplex) -> HomotopyCertificate {
        let model = GroupModel::integers();
        let t = z_elt(1);
        let tinv = z_elt(-1);
        let build = |g: GroupElement, label: &str| {
            let mut comps = BTreeMap::new();
            for n in c.support() {
                let m = c.module(n);
                let g = g.clone();
                let mcl = m.clone();
                comps.insert(
                    n,
                    ModuleMap {
                        label: label.into(),
                        domain: m.clone(),
                        codomain: m,
                        rule: MapRule::Lazy(Arc::new(move |k: &Key| {
                            Ok(FormalSum::basis(mcl.act(&g, k)?))
                        })),
                    },
                );
            }
            GradedMap::new(
                label,
                c.clone(),
                c.clone(),
                0,
                comps,
                bounding::linear(1, 1),
            )
        };
        let _ = model;
        HomotopyCertificate::from_iso(build(t, "t·"), build(tinv, "t⁻¹·"))
    }

    #[test]
    fn cone_of_identity_contracts() {
        let s = sphere("S", 0, "x");
        let id = GradedMap::identity(&s);
        let cone_data = cone(&id).unwrap();
        cone_data.complex.verify_d_squared().unwrap();
        let cert = HomotopyCertificate::identity(&s);
        let c = cone_contraction_from_equivalence(&cert, &cone_data).unwrap();
        let report = c.verify(&rat(5)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
    }

    #[test]
    fn cone_of_zero_endomap_doubles_the_ranks() {
        let d = disc("D", 1, "x");
        let zero = GradedMap::zero(&d, &d, 0);
        let cone_data = cone(&zero).unwrap();
        for n in cone_data.complex.support() {
            let expect = d.rank(n).unwrap() + d.rank(n - 1).unwrap();
            assert_eq!(cone_data.complex.rank(n).unwrap(), expect);
        }
    }

    #[test]
    fn cone_of_degreewise_iso_contracts_with_linear_witness() {
        let s = disc("D", 1, "x");
        let iso = shift_iso(&s);
        let cone_data = cone(&iso.forward).unwrap();
        let c = cone_contraction_from_equivalence(&iso, &cone_data).unwrap();
        let report = c.verify(&rat(5)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
        assert_eq!(c.c.witness.growth().tower, 0);
        assert!(c.c.witness.growth().degree <= 1);
    }

    #[test]
    fn cylinder_structure_identities() {
        // a generic two-term chain map: multiplication by (1 + t) between
        // discs is a chain map
        let d1 = disc("D1", 1, "x");
        let d2 = disc("D2", 1, "y");
        let model = GroupModel::integers();
        let e = model.identity();
        let mut f_comps = BTreeMap::new();
        for n in [0i64, 1] {
            let dom = d1.module(n);
            let cod = d2.module(n);
            let mut cols = BTreeMap::new();
            let mut img = FormalSum::zero();
            img.add_term(Key::pair(e.clone(), Key::sym("y")), rat(1));
            img.add_term(Key::pair(z_elt(1), Key::sym("y")), rat(1));
            cols.insert(Key::pair(e.clone(), Key::sym("x")), img);
            f_comps.insert(
                n,
                ModuleMap::from_generator_columns("f", dom, cod, cols),
            );
        }
        let f = GradedMap::new("f", d1.clone(), d2.clone(), 0, f_comps, bounding::linear(2, 2));
        assert!(f.commutes_with_d(&rat(5)).unwrap().is_empty());

        let cyl = cylinder(&f).unwrap();
        cyl.complex.verify_d_squared().unwrap();
        // p∘j2 = id exactly
        let pj2 = cyl.projection.compose(&cyl.back);
        assert!(pj2
            .difference_on_keys(&GradedMap::identity(&d2), &rat(5))
            .unwrap()
            .is_empty());
        // p∘j1 = f exactly
        let pj1 = cyl.projection.compose(&cyl.front);
        assert!(pj1.difference_on_keys(&f, &rat(5)).unwrap().is_empty());
        // the projection certificate passes, with class-L witnesses
        let report = verify_equivalence(&cyl.p_certificate, &rat(5)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
        let l = BoundingClass::linear_class();
        for m in [
            &cyl.p_certificate.forward,
            &cyl.p_certificate.inverse,
            &cyl.p_certificate.h,
            &cyl.p_certificate.k,
        ] {
            assert!(l.contains(&m.witness), "witness {} not linear", m.witness);
        }
        // both inclusions are cofibrations
        assert!(cyl.front_cofibration.verify(&rat(5)).unwrap().is_empty());
        assert!(cyl.back_cofibration.verify(&rat(5)).unwrap().is_empty());
    }

    #[test]
    fn cylinder_of_the_map_from_zero_is_the_target() {
        let a = ChainComplex::zero(NormedRing::Integers);
        let b = disc("B", 1, "x");
        let f = GradedMap::zero(&a, &b, 0);
        let cyl = cylinder(&f).unwrap();
        assert!(cyl.degenerate);
        // bit-exact: same labels, ranks, and weights per degree
        for n in b.support() {
            assert_eq!(cyl.complex.rank(n), b.rank(n));
            let keys = b.module(n).generators().unwrap();
            for k in keys {
                assert_eq!(
                    cyl.complex.module(n).weight(&k).unwrap(),
                    b.module(n).weight(&k).unwrap()
                );
            }
        }
        assert!(cyl
            .projection
            .difference_on_keys(&GradedMap::identity(&b), &rat(4))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn pushout_along_identity_is_the_total_complex() {
        let x = sphere("X", 0, "x");
        let r = disc("R", 1, "r");
        let cof = Cofibration::summand_inclusion(&x, &r).unwrap();
        assert!(cof.verify(&rat(5)).unwrap().is_empty());
        let id = GradedMap::identity(&x);
        let push = pushout_along_cofibration(&cof, &id).unwrap();
        push.complex.verify_d_squared().unwrap();
        for n in push.complex.support() {
            assert_eq!(push.complex.rank(n), cof.ses.total.rank(n));
        }
        // the glueing square commutes exactly: η∘i = j∘f
        let lhs = push.eta.compose(&cof.ses.i);
        let rhs = push.j.ses.i.compose(&id);
        assert!(lhs.difference_on_keys(&rhs, &rat(5)).unwrap().is_empty());
        // the emitted section is exact
        assert!(push.j.verify(&rat(5)).unwrap().is_empty());
        // η is a chain map
        assert!(push.eta.commutes_with_d(&rat(5)).unwrap().is_empty());
    }

    #[test]
    fn pushout_of_split_inclusion_keeps_the_complement() {
        // i = (A ↪ A⊕B): W ≅ Z⊕B with the canonical inclusion and the
        // complement projection as section
        let a = sphere("A", 0, "a");
        let bpart = sphere("B", 0, "b");
        let z = disc("Z", 1, "z");
        let cof = Cofibration::summand_inclusion(&a, &bpart).unwrap();
        // any chain map A → Z: zero works
        let f = GradedMap::zero(&a, &z, 0);
        let push = pushout_along_cofibration(&cof, &f).unwrap();
        for n in push.complex.support() {
            assert_eq!(
                push.complex.rank(n).unwrap(),
                z.rank(n).unwrap() + bpart.rank(n).unwrap()
            );
        }
        assert!(push.j.verify(&rat(5)).unwrap().is_empty());
    }

    #[test]
    fn quotient_equivalence_on_a_split_total_complex() {
        // B = A ⊕ C with A the contractible disc: q : B ↠ C gets a
        // certificate that verifies
        let a = disc("A", 1, "a");
        let c = disc("C", 2, "c");
        let cof = Cofibration::summand_inclusion(&a, &c).unwrap();
        let contraction = disc_contraction(&a, 1);
        assert!(contraction.verify(&rat(5)).unwrap().passed());
        let cert = quotient_equivalence(&cof.ses, &contraction).unwrap();
        let report = verify_equivalence(&cert, &rat(5)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
    }

    #[test]
    fn quotient_equivalence_with_zero_kernel_returns_the_section() {
        let a = ChainComplex::zero(NormedRing::Integers);
        let c = disc("C", 1, "c");
        let cof = Cofibration::summand_inclusion(&a, &c).unwrap();
        let contraction = ContractionCertificate {
            c: GradedMap::zero(&a, &a, 1),
        };
        let cert = quotient_equivalence(&cof.ses, &contraction).unwrap();
        let report = verify_equivalence(&cert, &rat(5)).unwrap();
        assert!(report.passed());
        // the inverse is σ itself and the homotopies vanish
        assert!(cert
            .inverse
            .difference_on_keys(&cof.ses.sigma, &rat(5))
            .unwrap()
            .is_empty());
        assert!(cert.h.boundary().unwrap().is_zero_everywhere(&rat(5)).unwrap());
    }

    #[test]
    fn kernel_equivalence_on_a_split_total_complex() {
        // quotient contractible: the inclusion A ↪ A⊕C is an equivalence
        let a = sphere("A", 0, "a");
        let c = disc("C", 1, "c");
        let cof = Cofibration::summand_inclusion(&a, &c).unwrap();
        let qc = disc_contraction(&c, 1);
        let cert = kernel_equivalence(&cof.ses, &qc).unwrap();
        let report = verify_equivalence(&cert, &rat(5)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
    }

    #[test]
    fn planted_sign_error_is_reported_with_the_basis_element() {
        let a = disc("A", 1, "a");
        let c = disc("C", 2, "c");
        let cof = Cofibration::summand_inclusion(&a, &c).unwrap();
        let contraction = disc_contraction(&a, 1);
        let mut cert = quotient_equivalence(&cof.ses, &contraction).unwrap();
        cert.h = cert.h.neg();
        let report = verify_equivalence(&cert, &rat(5)).unwrap();
        assert!(!report.passed());
        assert!(report
            .exact_failures
            .iter()
            .any(|m| m.contains("dh + hd")));
    }

    #[test]
    fn saturation_completes_g_from_f_and_composite() {
        // f a strict iso (so Cone(f) contracts), g a certified equivalence
        let b = disc("B", 1, "x");
        let f_cert = shift_iso(&b);
        let f = f_cert.forward.clone();
        let g_cert = shift_iso(&b);
        let g = g_cert.forward.clone();
        let composite = f_cert.compose(&g_cert).unwrap();
        let out = saturation_complete(
            &f,
            &g,
            SaturationGiven::FAndComposite {
                f: f_cert,
                composite,
            },
        )
        .unwrap();
        let report = verify_equivalence(&out, &rat(4)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
    }

    #[test]
    fn saturation_completes_f_from_g_and_composite() {
        let b = disc("B", 1, "x");
        let f_cert = shift_iso(&b);
        let f = f_cert.forward.clone();
        let g_cert = shift_iso(&b);
        let g = g_cert.forward.clone();
        let composite = f_cert.compose(&g_cert).unwrap();
        let out = saturation_complete(
            &f,
            &g,
            SaturationGiven::GAndComposite {
                g: g_cert,
                composite,
            },
        )
        .unwrap();
        let report = verify_equivalence(&out, &rat(4)).unwrap();
        assert!(report.passed(), "{:?}", report.exact_failures);
    }

    #[test]
    fn saturation_composes_when_both_factors_are_given() {
        let b = disc("B", 1, "x");
        let f_cert = shift_iso(&b);
        let g_cert = shift_iso(&b);
        let out = saturation_complete(
            &f_cert.forward.clone(),
            &g_cert.forward.clone(),
            SaturationGiven::FAndG {
                f: f_cert,
                g: g_cert,
            },
        )
        .unwrap();
        assert!(verify_equivalence(&out, &rat(4)).unwrap().passed());
    }

    #[test]
    fn factorization_through_the_cylinder() {
        // D already finite with j the identity: E = Cyl(f), h = p
        let c = sphere("C", 0, "c");
        let d = disc("D", 1, "d");
        let f = GradedMap::zero(&c, &d, 0);
        let j = HomotopyCertificate::identity(&d);
        let fac = app2_factorize(&f, &j).unwrap();
        for n in fac.e.support() {
            let expect = c.rank(n).unwrap_or(0)
                + c.rank(n - 1).unwrap_or(0)
                + d.rank(n).unwrap_or(0);
            assert_eq!(fac.e.rank(n).unwrap(), expect, "rank at degree {n}");
        }
        assert!(fac.g.verify(&rat(5)).unwrap().is_empty());
        assert!(verify_equivalence(&fac.h, &rat(5)).unwrap().passed());
        // h∘g − f = dS + Sd exactly
        let hg = fac.h.forward.compose(&fac.g.ses.i);
        let lhs = hg.sub(&f).unwrap();
        let rhs = fac.comparison_homotopy.boundary().unwrap();
        assert!(lhs.difference_on_keys(&rhs, &rat(5)).unwrap().is_empty());
    }

    #[test]
    fn transported_contractions_stay_exact() {
        let a = disc("A", 1, "a");
        let contraction = disc_contraction(&a, 1);
        let iso = shift_iso(&a);
        let moved = ContractionCertificate::transport_to_target(&iso, &contraction).unwrap();
        assert!(moved.verify(&rat(4)).unwrap().passed());
        let back = ContractionCertificate::transport_to_source(&iso, &moved).unwrap();
        assert!(back.verify(&rat(4)).unwrap().passed());
    }

    #[test]
    fn perturbed_certificates_transfer() {
        let b = disc("B", 1, "x");
        let cert = shift_iso(&b);
        // random-ish graded S of degree +1: bottom generator to top
        let mut comps = BTreeMap::new();
        comps.insert(
            0,
            ModuleMap {
                label: "S".into(),
                domain: b.module(0),
                codomain: b.module(1),
                rule: MapRule::Relabel(Arc::new(|k| Ok(Some((rat(3), k.clone()))))),
            },
        );
        let s = GradedMap::new("S", b.clone(), b.clone(), 1, comps, bounding::linear(3, 0));
        let perturbed = cert.perturb(&s).unwrap();
        assert!(verify_equivalence(&perturbed, &rat(4)).unwrap().passed());
    }
}

impl GradedMap {
    /// True when every component vanishes on the test keys.
    pub fn is_zero_everywhere(&self, cutoff: &Rat) -> Result<bool, ComplexError> {
        for n in self.source.support() {
            for k in self.source.test_keys(n, cutoff)? {
                if !self.component(n).apply_key(&k)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
