//! Module maps and boundedness certificates.
//!
//! A map is a column rule: explicit columns over a finite basis, equivariant
//! columns over the module generators of a free group module, a based
//! relabeling, or a lazy rule. Boundedness is never decided, only certified
//! or refuted: the Dehn sense checks one inequality `|m(a)|_id <= f(|a|_id)`,
//! the functional-analytic sense pairs every scheduled `f` with a produced
//! `f'`. Finite matrices get symbolic certificates through the column
//! constants; everything else is sample-verified with explicit
//! counterexamples on failure.

use crate::bounding::{BoundingClass, BoundingFunction, ClassExpr};
use crate::modules::{FormalSum, Key, Module, ModuleError};
use crate::rat::{self, rat, sqrt_ceil, Rat};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("bounding error: {0}")]
    Bounding(String),
    #[error("the ring norm floor must be positive for this construction")]
    ZeroNormFloor,
    #[error("the class must dominate the linear class here")]
    ClassBelowLinear,
    #[error("finite bases required: {0}")]
    InfiniteBasis(String),
    #[error("weights must be >= 1 for the matrix constants; {0} has weight {1}")]
    WeightBelowOne(String, String),
}

impl From<crate::bounding::BoundingError> for MapError {
    fn from(e: crate::bounding::BoundingError) -> Self {
        MapError::Bounding(e.to_string())
    }
}

type LazyRule = Arc<dyn Fn(&Key) -> Result<FormalSum, ModuleError> + Send + Sync>;
type RelabelRule = Arc<dyn Fn(&Key) -> Result<Option<(Rat, Key)>, ModuleError> + Send + Sync>;

#[derive(Clone)]
pub enum MapRule {
    Zero,
    /// Columns indexed by full basis keys; missing columns act as zero.
    Columns(BTreeMap<Key, FormalSum>),
    /// Columns indexed by module generator keys; a full key is split into its
    /// group part and based key, and the column is translated accordingly.
    Equivariant(BTreeMap<Key, FormalSum>),
    /// Based relabeling `k -> c·k'`; `None` sends the key to zero.
    Relabel(RelabelRule),
    Lazy(LazyRule),
}

#[derive(Clone)]
pub struct ModuleMap {
    pub label: String,
    pub domain: Module,
    pub codomain: Module,
    pub rule: MapRule,
}

impl fmt::Debug for ModuleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleMap({})", self.label)
    }
}

impl ModuleMap {
    pub fn zero(domain: Module, codomain: Module) -> ModuleMap {
        ModuleMap {
            label: "0".into(),
            domain,
            codomain,
            rule: MapRule::Zero,
        }
    }

    pub fn identity(module: Module) -> ModuleMap {
        ModuleMap {
            label: "id".into(),
            domain: module.clone(),
            codomain: module,
            rule: MapRule::Relabel(Arc::new(|k| Ok(Some((rat(1), k.clone()))))),
        }
    }

    pub fn from_columns(
        label: &str,
        domain: Module,
        codomain: Module,
        columns: BTreeMap<Key, FormalSum>,
    ) -> ModuleMap {
        ModuleMap {
            label: label.into(),
            domain,
            codomain,
            rule: MapRule::Columns(columns),
        }
    }

    /// Equivariant map given by columns on the domain's module generators.
    pub fn from_generator_columns(
        label: &str,
        domain: Module,
        codomain: Module,
        columns: BTreeMap<Key, FormalSum>,
    ) -> ModuleMap {
        ModuleMap {
            label: label.into(),
            domain,
            codomain,
            rule: MapRule::Equivariant(columns),
        }
    }

    pub fn from_relabel(
        label: &str,
        domain: Module,
        codomain: Module,
        rule: RelabelRule,
    ) -> ModuleMap {
        ModuleMap {
            label: label.into(),
            domain,
            codomain,
            rule: MapRule::Relabel(rule),
        }
    }

    pub fn apply_key(&self, key: &Key) -> Result<FormalSum, ModuleError> {
        match &self.rule {
            MapRule::Zero => Ok(FormalSum::zero()),
            MapRule::Columns(cols) => {
                self.domain.weight(key)?;
                Ok(cols.get(key).cloned().unwrap_or_else(FormalSum::zero))
            }
            MapRule::Equivariant(cols) => {
                let (g, based) = self.domain.split_group(key)?;
                match cols.get(&based) {
                    None => Ok(FormalSum::zero()),
                    Some(col) => {
                        let mut out = FormalSum::zero();
                        for (k, c) in col.iter() {
                            out.add_term(self.codomain.act(&g, k)?, c.clone());
                        }
                        Ok(out)
                    }
                }
            }
            MapRule::Relabel(r) => {
                self.domain.weight(key)?;
                Ok(match r(key)? {
                    None => FormalSum::zero(),
                    Some((c, k)) => FormalSum::single(k, c),
                })
            }
            MapRule::Lazy(f) => f(key),
        }
    }

    pub fn apply(&self, a: &FormalSum) -> Result<FormalSum, ModuleError> {
        let mut out = FormalSum::zero();
        for (k, c) in a.iter() {
            let img = self.apply_key(k)?;
            out = out.add(&img.scale(c));
        }
        Ok(out)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &ModuleMap) -> ModuleMap {
        let first = other.clone();
        let second = self.clone();
        ModuleMap {
            label: format!("{}∘{}", self.label, other.label),
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            rule: MapRule::Lazy(Arc::new(move |k| {
                let mid = first.apply_key(k)?;
                second.apply(&mid)
            })),
        }
    }

    pub fn add(&self, other: &ModuleMap) -> ModuleMap {
        let a = self.clone();
        let b = other.clone();
        ModuleMap {
            label: format!("({}+{})", self.label, other.label),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rule: MapRule::Lazy(Arc::new(move |k| {
                Ok(a.apply_key(k)?.add(&b.apply_key(k)?))
            })),
        }
    }

    pub fn sub(&self, other: &ModuleMap) -> ModuleMap {
        let a = self.clone();
        let b = other.clone();
        ModuleMap {
            label: format!("({}-{})", self.label, other.label),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rule: MapRule::Lazy(Arc::new(move |k| {
                Ok(a.apply_key(k)?.sub(&b.apply_key(k)?))
            })),
        }
    }

    pub fn scale(&self, c: &Rat) -> ModuleMap {
        let a = self.clone();
        let c = c.clone();
        ModuleMap {
            label: format!("{}·{}", rat::rat_string(&c), self.label),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rule: MapRule::Lazy(Arc::new(move |k| Ok(a.apply_key(k)?.scale(&c)))),
        }
    }

    pub fn neg(&self) -> ModuleMap {
        self.scale(&rat(-1))
    }

    pub fn relabel(&self, label: &str) -> ModuleMap {
        let mut out = self.clone();
        out.label = label.to_string();
        out
    }

    /// Materializes the rule as explicit generator columns; needs finite
    /// module generators on the domain.
    pub fn materialize(&self) -> Result<ModuleMap, ModuleError> {
        let gens = self.domain.generators()?;
        let mut cols = BTreeMap::new();
        for g in gens {
            let img = self.apply_key(&g)?;
            if !img.is_zero() {
                cols.insert(g, img);
            }
        }
        Ok(ModuleMap {
            label: self.label.clone(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rule: MapRule::Equivariant(cols),
        })
    }

    /// Exact equality against another map on all module generators.
    pub fn equals_on_generators(&self, other: &ModuleMap) -> Result<bool, ModuleError> {
        let gens = self.domain.generators()?;
        for g in &gens {
            if self.apply_key(g)? != other.apply_key(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_zero_on_generators(&self) -> Result<bool, ModuleError> {
        let gens = self.domain.generators()?;
        for g in &gens {
            if !self.apply_key(g)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    SymbolicallyVerified,
    SampleVerified(usize),
    Refuted(Box<FormalSum>),
}

impl CheckStatus {
    pub fn verified(&self) -> bool {
        !matches!(self, CheckStatus::Refuted(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sense {
    Dehn,
    FunctionalAnalytic,
}

/// Certificate that a map is bounded in one of the two senses, or a
/// refutation carrying the violating element.
#[derive(Debug, Clone)]
pub struct BoundednessCertificate {
    pub map_label: String,
    pub sense: Sense,
    pub dehn_witness: Option<(BoundingFunction, CheckStatus)>,
    pub fa_schedule: Vec<FaPair>,
}

#[derive(Debug, Clone)]
pub struct FaPair {
    pub f: BoundingFunction,
    pub f_prime: BoundingFunction,
    pub status: CheckStatus,
}

impl BoundednessCertificate {
    pub fn verified(&self) -> bool {
        self.dehn_witness
            .iter()
            .all(|(_, s)| s.verified())
            && self.fa_schedule.iter().all(|p| p.status.verified())
    }

    pub fn counterexample(&self) -> Option<&FormalSum> {
        if let Some((_, CheckStatus::Refuted(a))) = &self.dehn_witness {
            return Some(a);
        }
        self.fa_schedule.iter().find_map(|p| match &p.status {
            CheckStatus::Refuted(a) => Some(a.as_ref()),
            _ => None,
        })
    }
}

/// Linear Dehn constant for a finite-generator map: the smallest `K` the
/// column norms certify, so `|m(a)|_id <= K·|a|_id` for every `a`.
pub fn dehn_linear_constant(m: &ModuleMap) -> Result<Rat, MapError> {
    let gens = m
        .domain
        .generators()
        .map_err(|_| MapError::InfiniteBasis(m.label.clone()))?;
    let mut k = Rat::zero();
    for gkey in &gens {
        let col = m.apply_key(gkey)?;
        if col.is_zero() {
            continue;
        }
        let n1 = m.codomain.l1_norm(&col);
        let nid = m.codomain.id_norm(&col)?;
        let wx = inner_weight(&m.domain, gkey)?;
        if !wx.is_positive() {
            return Err(MapError::WeightBelowOne(
                gkey.to_string(),
                rat::rat_string(&wx),
            ));
        }
        let ratio = &nid / &wx;
        if n1 > k {
            k = n1;
        }
        if ratio > k {
            k = ratio;
        }
    }
    Ok(k)
}

/// The weighted-set weight of a module generator: the inner weight for free
/// group modules, the table weight otherwise.
fn inner_weight(module: &Module, based_key: &Key) -> Result<Rat, ModuleError> {
    use crate::modules::Basis;
    match (&module.basis, based_key) {
        (Basis::FreeOverGroup { inner, .. }, Key::Pair(_, k)) => inner
            .iter()
            .find(|(ik, _)| ik == k.as_ref())
            .map(|(_, w)| w.clone())
            .ok_or_else(|| ModuleError::UnknownKey(based_key.to_string())),
        (Basis::Sum(ms), Key::Tagged(i, k)) => inner_weight(
            ms.get(*i as usize)
                .ok_or_else(|| ModuleError::UnknownKey(based_key.to_string()))?,
            k,
        ),
        _ => module.weight(based_key),
    }
}

/// Checks `|m(a)|_id <= f(|a|_id)` with the given witness: symbolically when
/// the matrix constants prove it, otherwise on the supplied samples.
pub fn check_dehn_bounded(
    m: &ModuleMap,
    f: &BoundingFunction,
    samples: &[FormalSum],
) -> Result<BoundednessCertificate, MapError> {
    let mut status: Option<CheckStatus> = None;

    // symbolic route: the column constants give a linear witness K·x; the
    // candidate f only has to dominate it from the least nonzero norm
    if let Ok(k) = dehn_linear_constant(m) {
        let linear = BoundingFunction::Linear {
            a: k,
            b: Rat::zero(),
        };
        let floor = least_nonzero_norm(&m.domain);
        if f.dominates_from(&linear, &floor) == Some(true) {
            status = Some(CheckStatus::SymbolicallyVerified);
        }
    }
    // based-relabel route: termwise weight domination with witness >= id
    if status.is_none() {
        if let Some(true) = relabel_termwise_contraction(m) {
            if f
                .dominates_from(&crate::bounding::identity(), &least_nonzero_norm(&m.domain))
                == Some(true)
            {
                status = Some(CheckStatus::SymbolicallyVerified);
            }
        }
    }

    let mut checked = 0usize;
    for a in samples {
        let lhs = m.codomain.id_norm(&m.apply(a)?)?;
        let rhs = f.eval(&m.domain.id_norm(a)?)?;
        checked += 1;
        if lhs > rhs {
            status = Some(CheckStatus::Refuted(Box::new(a.clone())));
            break;
        }
    }
    let status = status.unwrap_or(CheckStatus::SampleVerified(checked));
    Ok(BoundednessCertificate {
        map_label: m.label.clone(),
        sense: Sense::Dehn,
        dehn_witness: Some((f.clone(), status)),
        fa_schedule: vec![],
    })
}

/// `Some(true)` when the map is a coefficient-norm-one relabeling whose
/// output weight never exceeds the input weight; decided on the weight
/// formulas for nat bases.
fn relabel_termwise_contraction(m: &ModuleMap) -> Option<bool> {
    use crate::modules::{Basis, NatWeight};
    if !matches!(m.rule, MapRule::Relabel(_)) {
        return None;
    }
    match (&m.domain.basis, &m.codomain.basis) {
        (Basis::Nat(a), Basis::Nat(b)) => match (a, b) {
            // bit length never exceeds the value itself for n >= 1
            (NatWeight::Identity, NatWeight::Log2) => Some(true),
            (NatWeight::Identity, NatWeight::Identity) => Some(true),
            (NatWeight::Log2, NatWeight::Log2) => Some(true),
            (NatWeight::Log2, NatWeight::Identity) => None,
        },
        _ => None,
    }
}

fn least_nonzero_norm(module: &Module) -> Rat {
    // with integer coefficients and weights >= 1 every nonzero element has
    // id-norm >= 1; rationals drop the floor to zero
    let floor = module.ring.norm_floor();
    if floor.is_zero() {
        Rat::zero()
    } else {
        floor
    }
}

/// The column constants of the finite-matrix boundedness argument, with the
/// rescaled `f4` that makes the displayed bound provable for every element.
#[derive(Debug, Clone)]
pub struct MatrixBoundData {
    pub c_f: Rat,
    pub h_f4: Rat,
    pub c: Rat,
    pub bound: Rat,
    pub f2: BoundingFunction,
    pub f4: BoundingFunction,
    pub lambda: Rat,
}

impl MatrixBoundData {
    /// `2·C_f·H_{f4}·C`
    pub fn coefficient(&self) -> &Rat {
        &self.bound
    }
}

/// Computes `C_f = max_j |y_j|_{f2}`, `H_{f4} = max_{ij} |h_ij|_{f4}` and
/// `C = max_i 1/w_X(x_i)` for a finite matrix map. `f2` is exactly `f(2x)`;
/// `f4` is `lambda·f(4x)` with `lambda` chosen from the column masses so that
/// `|h(a)|_f <= 2·C_f·H_{f4}·C·|a|_{f4}` holds for every element, not just
/// the sampled ones.
pub fn matrix_bound_constants(
    m: &ModuleMap,
    f: &BoundingFunction,
) -> Result<MatrixBoundData, MapError> {
    let dom_gens = m
        .domain
        .generators()
        .map_err(|_| MapError::InfiniteBasis(format!("domain of {}", m.label)))?;
    let cod_gens = m
        .codomain
        .generators()
        .map_err(|_| MapError::InfiniteBasis(format!("codomain of {}", m.label)))?;
    let f2 = f.scale_argument(2);
    let f4_base = f.scale_argument(4);

    // C_f over the codomain basis elements
    let mut c_f = Rat::zero();
    for y in &cod_gens {
        let v = f2.eval(&m.codomain.weight(y)?)?;
        if v > c_f {
            c_f = v;
        }
    }
    // C = max 1/w_X and q = f4(min w_X); weights below one are rejected
    let mut c = Rat::zero();
    let mut min_wx: Option<Rat> = None;
    for x in &dom_gens {
        let wx = inner_weight(&m.domain, x)?;
        if wx < rat(1) {
            return Err(MapError::WeightBelowOne(
                x.to_string(),
                rat::rat_string(&wx),
            ));
        }
        let inv = rat(1) / &wx;
        if inv > c {
            c = inv;
        }
        if min_wx.as_ref().map(|m| &wx < m).unwrap_or(true) {
            min_wx = Some(wx);
        }
    }
    // column masses: N = max l1, S = max f2-seminorm, H4 = max entry norm
    let mut n_mass = Rat::zero();
    let mut s_mass = Rat::zero();
    let mut h4 = Rat::zero();
    for x in &dom_gens {
        let col = m.apply_key(x)?;
        let n1 = m.codomain.l1_norm(&col);
        let sf2 = m.codomain.seminorm(&col, &f2)?;
        if n1 > n_mass {
            n_mass = n1;
        }
        if sf2 > s_mass {
            s_mass = sf2;
        }
        // entry norms: group terms of the column by based codomain key; the
        // group part contributes its length, plain bases count as L(1) = 1
        let mut per_entry: BTreeMap<Key, Rat> = BTreeMap::new();
        for (k, coeff) in col.iter() {
            let (l, based) = match m.codomain.split_group(k) {
                Ok((g, based)) => {
                    let oracle = m.codomain.oracle().expect("group module has an oracle");
                    (
                        oracle.word_length(&g).map_err(ModuleError::from)?,
                        based,
                    )
                }
                Err(_) => (rat(1), k.clone()),
            };
            let contrib = m.codomain.ring.norm(coeff) * f4_base.eval(&l)?;
            *per_entry.entry(based).or_insert_with(Rat::zero) += contrib;
        }
        for (_, v) in per_entry {
            if v > h4 {
                h4 = v;
            }
        }
    }

    let zero_bound = h4.is_zero() || c_f.is_zero();
    let q = match &min_wx {
        Some(w) => f4_base.eval(w)?,
        None => Rat::zero(),
    };
    // lambda^2 >= (N + S/q) / (2·C_f·H4·C)
    let lambda = if zero_bound || q.is_zero() {
        rat(1)
    } else {
        let need = (&n_mass + &s_mass / &q) / (rat(2) * &c_f * &h4 * &c);
        let root = sqrt_ceil(&need).map_err(|e| MapError::Bounding(e.to_string()))?;
        std::cmp::max(Rat::from_integer(root), rat(1))
    };
    let f4 = f4_base.scale_output(&lambda);
    let h_f4 = &h4 * &lambda;
    let bound = rat(2) * &c_f * &h_f4 * &c;
    Ok(MatrixBoundData {
        c_f,
        h_f4,
        c,
        bound,
        f2,
        f4,
        lambda,
    })
}

/// Verifies `|m(a)|_f <= bound·|a|_{f4}` on samples against the constants.
pub fn verify_matrix_bound(
    m: &ModuleMap,
    f: &BoundingFunction,
    data: &MatrixBoundData,
    samples: &[FormalSum],
) -> Result<CheckStatus, MapError> {
    let mut checked = 0;
    for a in samples {
        let lhs = m.codomain.seminorm(&m.apply(a)?, f)?;
        let rhs = &data.bound * m.domain.seminorm(a, &data.f4)?;
        checked += 1;
        if lhs > rhs {
            return Ok(CheckStatus::Refuted(Box::new(a.clone())));
        }
    }
    Ok(CheckStatus::SampleVerified(checked))
}

/// For every scheduled `f`, proposes `f'` and checks
/// `|m(x)|_f <= |x|_{f'}`: through the Dehn witness when one is supplied,
/// through the matrix constants otherwise.
pub fn check_fa_bounded(
    m: &ModuleMap,
    schedule: &[BoundingFunction],
    class: &BoundingClass,
    dehn_witness: Option<&BoundingFunction>,
    samples: &[FormalSum],
) -> Result<BoundednessCertificate, MapError> {
    let mut pairs = Vec::new();
    let identity_map = matches!(&m.rule, MapRule::Relabel(_))
        && m.label == "id";
    for f in schedule {
        let (f_prime, symbolic) = if identity_map {
            (f.clone(), true)
        } else if let Some(fd) = dehn_witness {
            let expr = ClassExpr::Compose(
                Box::new(ClassExpr::member(f.clone())),
                Box::new(ClassExpr::member(fd.clone())),
            );
            let (w, _) = class.weak_dominator(&expr)?;
            (w, false)
        } else {
            let data = matrix_bound_constants(m, f)?;
            let expr = ClassExpr::Sum(vec![(
                data.bound.clone(),
                ClassExpr::member(data.f4.clone()),
            )]);
            let (w, _) = class.weak_dominator(&expr)?;
            (w, true)
        };
        let mut status = if symbolic {
            CheckStatus::SymbolicallyVerified
        } else {
            CheckStatus::SampleVerified(0)
        };
        let mut checked = 0;
        for a in samples {
            let lhs = m.codomain.seminorm(&m.apply(a)?, f)?;
            let rhs = m.domain.seminorm(a, &f_prime)?;
            checked += 1;
            if lhs > rhs {
                status = CheckStatus::Refuted(Box::new(a.clone()));
                break;
            }
        }
        if matches!(status, CheckStatus::SampleVerified(_)) {
            status = CheckStatus::SampleVerified(checked);
        }
        pairs.push(FaPair {
            f: f.clone(),
            f_prime,
            status,
        });
    }
    Ok(BoundednessCertificate {
        map_label: m.label.clone(),
        sense: Sense::FunctionalAnalytic,
        dehn_witness: None,
        fa_schedule: pairs,
    })
}

/// Report for the Dehn-implies-functional-analytic construction.
#[derive(Debug, Clone)]
pub struct DehnFaReport {
    pub f_prime: BoundingFunction,
    pub basis_checked: usize,
    pub basis_failures: Vec<Key>,
    pub element_checked: usize,
    pub element_failures: Vec<FormalSum>,
}

impl DehnFaReport {
    pub fn passed(&self) -> bool {
        self.basis_failures.is_empty() && self.element_failures.is_empty()
    }
}

/// From a Dehn witness `f` and a scheduled `h`, produces `f' >= h∘f` and
/// checks the per-basis inequality `|m(gx)|_h <= |gx|_{h∘f}` and the
/// whole-element inequality `|m(a)|_h <= |a|_{h∘f}` on the given samples.
/// Rings with norm floor zero are rejected, as is a class below linear.
pub fn dehn_implies_fa(
    m: &ModuleMap,
    dehn_witness: &BoundingFunction,
    h: &BoundingFunction,
    class: &BoundingClass,
    basis_samples: &[Key],
    element_samples: &[FormalSum],
) -> Result<(BoundingFunction, DehnFaReport), MapError> {
    if m.domain.ring.norm_floor().is_zero() {
        return Err(MapError::ZeroNormFloor);
    }
    let linear = BoundingClass::linear_class();
    if !matches!(
        linear.precedes(class, &rat(1)),
        crate::bounding::Precedence::YesWitnessed(_)
    ) {
        return Err(MapError::ClassBelowLinear);
    }
    let expr = ClassExpr::Compose(
        Box::new(ClassExpr::member(h.clone())),
        Box::new(ClassExpr::member(dehn_witness.clone())),
    );
    let (f_prime, _) = class.weak_dominator(&expr)?;
    let h_of_f = BoundingFunction::Chain(vec![dehn_witness.clone(), h.clone()]).normalized();

    let mut report = DehnFaReport {
        f_prime: f_prime.clone(),
        basis_checked: 0,
        basis_failures: vec![],
        element_checked: 0,
        element_failures: vec![],
    };
    for k in basis_samples {
        let img = m.apply_key(k)?;
        let lhs = m.codomain.seminorm(&img, h)?;
        let rhs = h_of_f.eval(&m.domain.weight(k)?)?;
        report.basis_checked += 1;
        if lhs > rhs {
            report.basis_failures.push(k.clone());
        }
    }
    for a in element_samples {
        let lhs = m.codomain.seminorm(&m.apply(a)?, h)?;
        let rhs = m.domain.seminorm(a, &h_of_f)?;
        report.element_checked += 1;
        if lhs > rhs {
            report.element_failures.push(a.clone());
        }
    }
    Ok((f_prime, report))
}

/// Splitting data certifying an admissible epimorphism `q: Y -> U`: a graded
/// section with `q∘σ = id` and a linear bound for the section.
#[derive(Clone)]
pub struct SplittingData {
    pub epi: ModuleMap,
    pub section: ModuleMap,
    /// `(a, b)` with `|σ(u)|_id <= a·|u|_id + b` on samples.
    pub section_bound: (Rat, Rat),
}

impl fmt::Debug for SplittingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SplittingData({} / {})", self.epi.label, self.section.label)
    }
}

/// Certificate for an admissible monomorphism `i: X -> Y`: the chosen
/// cofiber presentation with its admissible epi, plus the retraction that
/// makes the splitting complementary (`i∘ρ + σ∘q = id`).
#[derive(Clone)]
pub struct MonoCertificate {
    pub mono: ModuleMap,
    pub cofiber: Module,
    pub splitting: SplittingData,
    pub retraction: ModuleMap,
}

impl fmt::Debug for MonoCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonoCertificate({})", self.mono.label)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AdmissibilityReport {
    pub identity_checked: usize,
    pub identity_failures: Vec<Key>,
    pub bound_checked: usize,
    pub bound_failures: Vec<FormalSum>,
    pub complement_failures: Vec<Key>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.identity_failures.is_empty()
            && self.bound_failures.is_empty()
            && self.complement_failures.is_empty()
    }
}

/// Verifies an epi splitting: `q∘σ = id` exactly on the tested basis of `U`
/// and the linear section bound on the samples.
pub fn verify_splitting(
    s: &SplittingData,
    basis: &[Key],
    samples: &[FormalSum],
) -> Result<AdmissibilityReport, MapError> {
    let mut report = AdmissibilityReport::default();
    for u in basis {
        let back = s.epi.apply(&s.section.apply_key(u)?)?;
        report.identity_checked += 1;
        if back != FormalSum::basis(u.clone()) {
            report.identity_failures.push(u.clone());
        }
    }
    let (a, b) = &s.section_bound;
    for x in samples {
        let lhs = s.section.codomain.id_norm(&s.section.apply(x)?)?;
        let rhs = a * s.section.domain.id_norm(x)? + b;
        report.bound_checked += 1;
        if lhs > rhs {
            report.bound_failures.push(x.clone());
        }
    }
    Ok(report)
}

/// Verifies a mono certificate: the retraction identity `ρ∘i = id` on the
/// domain basis, complementarity `i∘ρ + σ∘q = id` on the ambient basis, and
/// the cofiber epi's own splitting.
pub fn verify_mono(
    cert: &MonoCertificate,
    domain_basis: &[Key],
    ambient_basis: &[Key],
    cofiber_basis: &[Key],
    samples: &[FormalSum],
) -> Result<AdmissibilityReport, MapError> {
    let mut report = verify_splitting(&cert.splitting, cofiber_basis, samples)?;
    for x in domain_basis {
        let back = cert.retraction.apply(&cert.mono.apply_key(x)?)?;
        report.identity_checked += 1;
        if back != FormalSum::basis(x.clone()) {
            report.identity_failures.push(x.clone());
        }
    }
    for y in ambient_basis {
        let via_x = cert.mono.apply(&cert.retraction.apply_key(y)?)?;
        let via_u = cert
            .splitting
            .section
            .apply(&cert.splitting.epi.apply_key(y)?)?;
        if via_x.add(&via_u) != FormalSum::basis(y.clone()) {
            report.complement_failures.push(y.clone());
        }
    }
    Ok(report)
}

/// A weighted projective module: a free carrier with an idempotent
/// projection and a section, both linearly bounded.
#[derive(Clone)]
pub struct ProjectiveModule {
    pub carrier: Module,
    pub projection: ModuleMap,
    pub section: ModuleMap,
}

impl ProjectiveModule {
    /// `p∘p = p` exactly on the carrier generators, `p∘s∘p = p` on samples,
    /// and linear Dehn constants exist for both maps.
    pub fn verify(&self, samples: &[FormalSum]) -> Result<AxReport, MapError> {
        let mut failures = Vec::new();
        let gens = self.carrier.generators()?;
        for g in &gens {
            let once = self.projection.apply_key(g)?;
            let twice = self.projection.apply(&once)?;
            if once != twice {
                failures.push(format!("p² ≠ p at {g}"));
            }
        }
        for a in samples {
            let p = self.projection.apply(a)?;
            let psp = self
                .projection
                .apply(&self.section.apply(&self.projection.apply(a)?)?)?;
            if p != psp {
                failures.push(format!("p∘s∘p ≠ p at {a}"));
            }
        }
        let kp = dehn_linear_constant(&self.projection)?;
        let ks = dehn_linear_constant(&self.section)?;
        Ok(AxReport {
            checked: gens.len() + samples.len(),
            failures,
            linear_constants: vec![kp, ks],
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct AxReport {
    pub checked: usize,
    pub failures: Vec<String>,
    pub linear_constants: Vec<Rat>,
}

impl AxReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounding::{constant, identity, linear, monomial};
    use crate::groups::{GroupElement, GroupModel, LengthOracle};
    use crate::modules::{NatWeight, NormedRing};
    use num_bigint::{BigInt, BigUint};

    fn z_elt(k: i64) -> GroupElement {
        GroupElement::Vector(vec![BigInt::from(k)])
    }

    fn zz_module(inner: &[(&str, i64)]) -> Module {
        let model = GroupModel::integers();
        let oracle = Arc::new(LengthOracle::new(model, rat(64)));
        Module::free_over_group(
            NormedRing::Integers,
            oracle,
            inner
                .iter()
                .map(|(n, w)| (Key::sym(n), rat(*w)))
                .collect(),
        )
    }

    fn nat_relabel(dom: NatWeight, cod: NatWeight) -> ModuleMap {
        let domain = Module::nat(NormedRing::Integers, dom);
        let codomain = Module::nat(NormedRing::Integers, cod);
        ModuleMap::from_relabel(
            "n↦n",
            domain,
            codomain,
            Arc::new(|k| Ok(Some((rat(1), k.clone())))),
        )
    }

    #[test]
    fn zero_map_is_symbolically_dehn_bounded_by_one() {
        let m = zz_module(&[("x", 1)]);
        let z = ModuleMap::zero(m.clone(), m);
        let cert = check_dehn_bounded(&z, &constant(1), &[]).unwrap();
        assert!(matches!(
            cert.dehn_witness,
            Some((_, CheckStatus::SymbolicallyVerified))
        ));
    }

    #[test]
    fn nat_id_to_log_is_dehn_bounded_by_t() {
        let m = nat_relabel(NatWeight::Identity, NatWeight::Log2);
        let samples: Vec<FormalSum> = (1u64..6)
            .map(|n| FormalSum::single(Key::nat(1 << n), rat(n as i64)))
            .collect();
        let cert = check_dehn_bounded(&m, &identity(), &samples).unwrap();
        assert!(matches!(
            cert.dehn_witness,
            Some((_, CheckStatus::SymbolicallyVerified))
        ));
    }

    #[test]
    fn log_to_id_refuted_by_a_big_basis_element() {
        // degree-3 witness with coefficient sum 4·10^6 is beaten by n = 2^64:
        // 2^64 > 10^7·64^3
        let m = nat_relabel(NatWeight::Log2, NatWeight::Identity);
        let witness = BoundingFunction::Polynomial(vec![
            rat(1_000_000),
            rat(1_000_000),
            rat(1_000_000),
            rat(1_000_000),
        ]);
        let big = FormalSum::basis(Key::Nat(BigUint::from(1u8) << 64));
        let cert = check_dehn_bounded(&m, &witness, &[big]).unwrap();
        assert!(matches!(
            cert.dehn_witness,
            Some((_, CheckStatus::Refuted(_)))
        ));
    }

    #[test]
    fn matrix_constants_on_the_one_by_one_identity_entry() {
        let dom = zz_module(&[("x", 1)]);
        let cod = zz_module(&[("y", 1)]);
        let model = GroupModel::integers();
        let mut cols = BTreeMap::new();
        cols.insert(
            Key::pair(model.identity(), Key::sym("x")),
            FormalSum::basis(Key::pair(model.identity(), Key::sym("y"))),
        );
        let m = ModuleMap::from_generator_columns("h", dom.clone(), cod, cols);
        let data = matrix_bound_constants(&m, &identity()).unwrap();
        // f2 = 2x at module weight 2 gives C_f = 4; C = 1; lambda stays 1
        assert_eq!(data.c_f, rat(4));
        assert_eq!(data.c, rat(1));
        assert_eq!(data.lambda, rat(1));
        assert_eq!(data.f4, linear(4, 0));
        let mut rng = crate::exec::seeded_rng(7);
        let samples: Vec<FormalSum> = (0..50)
            .map(|_| dom.sample(&mut rng, &rat(4), 4, 5).unwrap())
            .collect();
        let status = verify_matrix_bound(&m, &identity(), &data, &samples).unwrap();
        assert!(status.verified());
    }

    #[test]
    fn dense_columns_force_a_larger_f4() {
        // all-ones 3x3 with f = 1: the literal max-based constant is too
        // small, the rescaled f4 restores the bound for every element
        let dom = zz_module(&[("x1", 1), ("x2", 1), ("x3", 1)]);
        let cod = zz_module(&[("y1", 1), ("y2", 1), ("y3", 1)]);
        let model = GroupModel::integers();
        let e = model.identity();
        let mut cols = BTreeMap::new();
        for x in ["x1", "x2", "x3"] {
            let mut img = FormalSum::zero();
            for y in ["y1", "y2", "y3"] {
                img.add_term(Key::pair(e.clone(), Key::sym(y)), rat(1));
            }
            cols.insert(Key::pair(e.clone(), Key::sym(x)), img);
        }
        let m = ModuleMap::from_generator_columns("ones", dom.clone(), cod.clone(), cols);
        let f = constant(1);
        let data = matrix_bound_constants(&m, &f).unwrap();
        assert!(data.lambda > rat(1));
        // the adversarial element x1+x2+x3
        let mut a = FormalSum::zero();
        for x in ["x1", "x2", "x3"] {
            a.add_term(Key::pair(e.clone(), Key::sym(x)), rat(1));
        }
        let status = verify_matrix_bound(&m, &f, &data, &[a]).unwrap();
        assert!(status.verified());
    }

    #[test]
    fn zero_matrix_has_zero_bound() {
        let dom = zz_module(&[("x", 1)]);
        let cod = zz_module(&[("y", 1)]);
        let m = ModuleMap::zero(dom.clone(), cod);
        let data = matrix_bound_constants(&m, &identity()).unwrap();
        assert!(data.h_f4.is_zero());
        assert!(data.bound.is_zero());
    }

    #[test]
    fn fa_identity_pairs_f_with_itself() {
        let m = zz_module(&[("x", 1)]);
        let id = ModuleMap::identity(m.clone());
        let class = BoundingClass::polynomial_class();
        let schedule = [constant(1), identity(), monomial(2)];
        let cert = check_fa_bounded(&id, &schedule, &class, None, &[]).unwrap();
        for pair in &cert.fa_schedule {
            assert_eq!(pair.f, pair.f_prime);
            assert!(matches!(pair.status, CheckStatus::SymbolicallyVerified));
        }
    }

    #[test]
    fn dehn_implies_fa_on_the_shift_map() {
        // n ↦ n+1 on (N, id) with Dehn witness x+1 and h = x^2
        let domain = Module::nat(NormedRing::Integers, NatWeight::Identity);
        let codomain = domain.clone();
        let m = ModuleMap::from_relabel(
            "shift",
            domain.clone(),
            codomain,
            Arc::new(|k| match k {
                Key::Nat(n) => Ok(Some((rat(1), Key::Nat(n + 1u32)))),
                _ => Ok(None),
            }),
        );
        let class = BoundingClass::polynomial_class();
        let basis: Vec<Key> = (1..40u64).map(Key::nat).collect();
        let elements: Vec<FormalSum> = (1..20u64)
            .map(|n| {
                FormalSum::basis(Key::nat(n)).add(&FormalSum::single(Key::nat(n + 3), rat(-2)))
            })
            .collect();
        let (f_prime, report) =
            dehn_implies_fa(&m, &linear(1, 1), &monomial(2), &class, &basis, &elements).unwrap();
        assert!(report.passed(), "basis {:?}", report.basis_failures);
        // f' dominates (x+1)^2
        for x in [rat(0), rat(1), rat(9)] {
            let hof = linear(1, 1).compose_exact(&linear(1, 0)).unwrap();
            let _ = hof;
            let target = monomial(2).compose_exact(&linear(1, 1)).unwrap();
            assert!(f_prime.eval(&x).unwrap() >= target.eval(&x).unwrap());
        }
    }

    #[test]
    fn dehn_implies_fa_rejects_zero_floor_rings() {
        let domain = Module::nat(NormedRing::Rationals, NatWeight::Identity);
        let m = ModuleMap::identity(domain);
        let class = BoundingClass::polynomial_class();
        assert!(matches!(
            dehn_implies_fa(&m, &identity(), &identity(), &class, &[], &[]),
            Err(MapError::ZeroNormFloor)
        ));
    }

    #[test]
    fn splitting_verification_and_defect_injection() {
        // q: Z[{s1,s2}] -> Z[{s}] sending both to s, section s -> s1
        let y = Module::finite(
            NormedRing::Integers,
            vec![(Key::sym("s1"), rat(1)), (Key::sym("s2"), rat(2))],
        );
        let u = Module::finite(NormedRing::Integers, vec![(Key::sym("s"), rat(1))]);
        let mut qcols = BTreeMap::new();
        qcols.insert(Key::sym("s1"), FormalSum::basis(Key::sym("s")));
        qcols.insert(Key::sym("s2"), FormalSum::basis(Key::sym("s")));
        let q = ModuleMap::from_columns("q", y.clone(), u.clone(), qcols);
        let mut scols = BTreeMap::new();
        scols.insert(Key::sym("s"), FormalSum::basis(Key::sym("s1")));
        let sigma = ModuleMap::from_columns("σ", u.clone(), y.clone(), scols);
        let split = SplittingData {
            epi: q.clone(),
            section: sigma,
            section_bound: (rat(1), rat(0)),
        };
        let basis = [Key::sym("s")];
        let samples = [FormalSum::single(Key::sym("s"), rat(3))];
        let report = verify_splitting(&split, &basis, &samples).unwrap();
        assert!(report.passed());

        // planted: section hitting s2 with weight 2 breaks the (1,0) bound
        let mut bad_cols = BTreeMap::new();
        bad_cols.insert(Key::sym("s"), FormalSum::basis(Key::sym("s2")));
        let bad = SplittingData {
            epi: q.clone(),
            section: ModuleMap::from_columns("σ'", u.clone(), y.clone(), bad_cols),
            section_bound: (rat(1), rat(0)),
        };
        let report = verify_splitting(&bad, &basis, &samples).unwrap();
        assert!(!report.passed());

        // planted: q∘σ ≠ id is a hard refutation
        let mut broken = BTreeMap::new();
        broken.insert(Key::sym("s"), FormalSum::single(Key::sym("s1"), rat(2)));
        let bad = SplittingData {
            epi: q,
            section: ModuleMap::from_columns("σ''", u, y, broken),
            section_bound: (rat(2), rat(0)),
        };
        let report = verify_splitting(&bad, &basis, &[]).unwrap();
        assert!(!report.identity_failures.is_empty());
    }

    #[test]
    fn fa_certificates_compose() {
        // if m has pairs (f, f') and m' has (f', f'') then m'∘m passes with
        // (f, f'')
        let m = zz_module(&[("x", 1)]);
        let model = GroupModel::integers();
        let t = |k: i64| Key::pair(z_elt(k), Key::sym("x"));
        let mut cols = BTreeMap::new();
        cols.insert(
            Key::pair(model.identity(), Key::sym("x")),
            FormalSum::basis(t(1)),
        );
        let shift = ModuleMap::from_generator_columns("t·", m.clone(), m.clone(), cols);
        let comp = shift.compose(&shift);
        let class = BoundingClass::polynomial_class();
        let mut rng = crate::exec::seeded_rng(11);
        let samples: Vec<FormalSum> = (0..60)
            .map(|_| m.sample(&mut rng, &rat(5), 3, 4).unwrap())
            .collect();
        let schedule = [identity(), monomial(2)];
        let c1 = check_fa_bounded(&shift, &schedule, &class, None, &samples).unwrap();
        assert!(c1.verified());
        let c2 = check_fa_bounded(&comp, &schedule, &class, None, &samples).unwrap();
        assert!(c2.verified());
    }

    #[test]
    fn projective_module_verification() {
        // split projection on Z[{a,b}] onto the a-line
        let carrier = Module::finite(
            NormedRing::Integers,
            vec![(Key::sym("a"), rat(1)), (Key::sym("b"), rat(1))],
        );
        let mut pcols = BTreeMap::new();
        pcols.insert(Key::sym("a"), FormalSum::basis(Key::sym("a")));
        let p = ModuleMap::from_columns("p", carrier.clone(), carrier.clone(), pcols);
        let proj = ProjectiveModule {
            carrier: carrier.clone(),
            projection: p.clone(),
            section: ModuleMap::identity(carrier.clone()),
        };
        let samples = [FormalSum::basis(Key::sym("a")).add(&FormalSum::basis(Key::sym("b")))];
        let report = proj.verify(&samples).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        // idempotence failure is caught
        let mut qcols = BTreeMap::new();
        qcols.insert(Key::sym("a"), FormalSum::single(Key::sym("a"), rat(2)));
        let q = ModuleMap::from_columns("q", carrier.clone(), carrier.clone(), qcols);
        let bad = ProjectiveModule {
            carrier,
            projection: q,
            section: p,
        };
        assert!(!bad.verify(&samples).unwrap().passed());
    }
}
