//! Group models with weighted word length.
//!
//! Three kinds of groups are supported: free abelian `Z^n` and free groups
//! `F_n` with closed-form lengths, and finite presentations where lengths are
//! computed by weighted shortest-path search over canonical forms inside a
//! truncation radius. Canonical forms for presented groups come from a small
//! Knuth-Bendix-style completion over the relators; when completion hits its
//! caps the partial rule set is still sound (it only ever applies valid
//! relations), queries outside the explored ball are hard errors either way.

use crate::rat::{self, rat, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BinaryHeap, BTreeSet};
use std::cmp::Reverse;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("element {0} is outside the truncation radius {1}")]
    OutOfTruncation(String, String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed word `{0}`")]
    BadWord(String),
    #[error("element shape does not match the group kind")]
    ShapeMismatch,
    #[error("generator weights must be strictly positive")]
    NonPositiveWeight,
}

/// A group element in the representation its model expects: an exponent
/// vector for `Z^n`, a reduced word otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    Vector(Vec<BigInt>),
    /// `(generator index, exponent)` runs with nonzero exponents and no two
    /// adjacent runs on the same generator.
    Word(Vec<(u16, i64)>),
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Vector(v) => v.iter().all(Zero::is_zero),
            GroupElement::Word(w) => w.is_empty(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            GroupElement::Word(w) => {
                if w.is_empty() {
                    return write!(f, "e");
                }
                let parts: Vec<String> = w
                    .iter()
                    .map(|(g, e)| {
                        if *e == 1 {
                            format!("g{g}")
                        } else {
                            format!("g{g}^{e}")
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum GroupKind {
    FreeAbelian,
    Free,
    Presented {
        relations: Vec<Vec<(u16, i64)>>,
    },
}

/// A group given by generators with strictly positive weights, plus the data
/// needed to multiply, invert, and render elements.
#[derive(Debug, Clone)]
pub struct GroupModel {
    pub kind: GroupKind,
    pub generator_names: Vec<String>,
    pub weights: Vec<Rat>,
    rewriter: OnceLock<Rewriter>,
}

impl GroupModel {
    pub fn free_abelian(n: usize, weights: Vec<Rat>) -> Result<Arc<Self>, GroupError> {
        Self::build(
            GroupKind::FreeAbelian,
            (0..n).map(|i| format!("g{i}")).collect(),
            weights,
        )
    }

    /// `Z` with one generator `t` of weight 1; the workhorse test group.
    pub fn integers() -> Arc<Self> {
        Self::build(GroupKind::FreeAbelian, vec!["t".into()], vec![rat(1)]).unwrap()
    }

    pub fn free_group(names: Vec<String>, weights: Vec<Rat>) -> Result<Arc<Self>, GroupError> {
        Self::build(GroupKind::Free, names, weights)
    }

    pub fn presented(
        names: Vec<String>,
        weights: Vec<Rat>,
        relations: Vec<Vec<(u16, i64)>>,
    ) -> Result<Arc<Self>, GroupError> {
        Self::build(GroupKind::Presented { relations }, names, weights)
    }

    fn build(
        kind: GroupKind,
        names: Vec<String>,
        weights: Vec<Rat>,
    ) -> Result<Arc<Self>, GroupError> {
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(GroupError::NonPositiveWeight);
        }
        assert_eq!(names.len(), weights.len());
        Ok(Arc::new(GroupModel {
            kind,
            generator_names: names,
            weights,
            rewriter: OnceLock::new(),
        }))
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::FreeAbelian => {
                GroupElement::Vector(vec![BigInt::zero(); self.rank()])
            }
            _ => GroupElement::Word(vec![]),
        }
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        match self.kind {
            GroupKind::FreeAbelian => {
                let mut v = vec![BigInt::zero(); self.rank()];
                v[i] = BigInt::from(1);
                GroupElement::Vector(v)
            }
            _ => self.canonical_word(vec![(i as u16, 1)]),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (&self.kind, a, b) {
            (GroupKind::FreeAbelian, GroupElement::Vector(x), GroupElement::Vector(y)) => {
                GroupElement::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (_, GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut w = x.clone();
                w.extend_from_slice(y);
                self.canonical_word(w)
            }
            _ => panic!("element shape does not match the group kind"),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        match (&self.kind, a) {
            (GroupKind::FreeAbelian, GroupElement::Vector(x)) => {
                GroupElement::Vector(x.iter().map(|p| -p).collect())
            }
            (_, GroupElement::Word(x)) => {
                let w: Vec<(u16, i64)> = x.iter().rev().map(|(g, e)| (*g, -e)).collect();
                self.canonical_word(w)
            }
            _ => panic!("element shape does not match the group kind"),
        }
    }

    /// Reduces a run list to the model's canonical form.
    pub fn canonical_word(&self, runs: Vec<(u16, i64)>) -> GroupElement {
        match &self.kind {
            GroupKind::FreeAbelian => {
                let mut v = vec![BigInt::zero(); self.rank()];
                for (g, e) in runs {
                    v[g as usize] += BigInt::from(e);
                }
                GroupElement::Vector(v)
            }
            GroupKind::Free => GroupElement::Word(free_reduce(runs)),
            GroupKind::Presented { .. } => {
                let letters = runs_to_letters(&runs);
                let canon = self.rewriter().canonicalize(&letters);
                GroupElement::Word(letters_to_runs(&canon))
            }
        }
    }

    fn rewriter(&self) -> &Rewriter {
        self.rewriter.get_or_init(|| {
            let relations = match &self.kind {
                GroupKind::Presented { relations } => relations.clone(),
                _ => vec![],
            };
            Rewriter::complete(self.rank(), &relations)
        })
    }

    /// Parses `"e"`, `"a b^-1 a"`, `"t^3"`, or `"(3,-4)"` (abelian vectors).
    pub fn parse_element(&self, s: &str) -> Result<GroupElement, GroupError> {
        let t = s.trim();
        if t == "e" || t == "1" {
            return Ok(self.identity());
        }
        if t.starts_with('(') && t.ends_with(')') {
            if !matches!(self.kind, GroupKind::FreeAbelian) {
                return Err(GroupError::ShapeMismatch);
            }
            let inner = &t[1..t.len() - 1];
            let coords: Result<Vec<BigInt>, _> = inner
                .split(',')
                .map(|p| p.trim().parse::<BigInt>())
                .collect();
            let coords = coords.map_err(|_| GroupError::BadWord(s.to_string()))?;
            if coords.len() != self.rank() {
                return Err(GroupError::BadWord(s.to_string()));
            }
            return Ok(GroupElement::Vector(coords));
        }
        let mut runs = Vec::new();
        for tok in t.split_whitespace().flat_map(|p| p.split('*')) {
            if tok.is_empty() {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| GroupError::BadWord(s.to_string()))?,
                ),
                None => (tok, 1),
            };
            let idx = self
                .generator_names
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| GroupError::UnknownGenerator(name.to_string()))? as u16;
            runs.push((idx, exp));
        }
        Ok(self.canonical_word(runs))
    }

    pub fn render_element(&self, g: &GroupElement) -> String {
        match g {
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(","))
            }
            GroupElement::Word(w) => {
                if w.is_empty() {
                    return "e".to_string();
                }
                w.iter()
                    .map(|(g, e)| {
                        let name = &self.generator_names[*g as usize];
                        if *e == 1 {
                            name.clone()
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        }
    }
}

fn free_reduce(runs: Vec<(u16, i64)>) -> Vec<(u16, i64)> {
    let mut out: Vec<(u16, i64)> = Vec::with_capacity(runs.len());
    for (g, e) in runs {
        if e == 0 {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if last.0 == g {
                last.1 += e;
                if last.1 == 0 {
                    out.pop();
                }
                continue;
            }
        }
        out.push((g, e));
    }
    out
}

fn runs_to_letters(runs: &[(u16, i64)]) -> Vec<u16> {
    let mut out = Vec::new();
    for (g, e) in runs {
        let letter = if *e >= 0 { 2 * g } else { 2 * g + 1 };
        for _ in 0..e.unsigned_abs() {
            out.push(letter);
        }
    }
    out
}

fn letters_to_runs(letters: &[u16]) -> Vec<(u16, i64)> {
    let mut runs = Vec::new();
    for &l in letters {
        let (g, e) = (l / 2, if l % 2 == 0 { 1i64 } else { -1 });
        runs.push((g, e));
    }
    free_reduce(runs)
}

fn inv_letter(l: u16) -> u16 {
    l ^ 1
}

fn inverse_letters(w: &[u16]) -> Vec<u16> {
    w.iter().rev().map(|&l| inv_letter(l)).collect()
}

fn shortlex_less(a: &[u16], b: &[u16]) -> bool {
    (a.len(), a) < (b.len(), b)
}

/// A capped string rewriting system oriented by shortlex.
#[derive(Debug, Clone)]
struct Rewriter {
    rules: Vec<(Vec<u16>, Vec<u16>)>,
}

const KB_MAX_RULES: usize = 256;
const KB_MAX_LEN: usize = 32;
const KB_MAX_PASSES: usize = 24;

impl Rewriter {
    fn complete(rank: usize, relations: &[Vec<(u16, i64)>]) -> Rewriter {
        let _ = rank;
        let mut rules: Vec<(Vec<u16>, Vec<u16>)> = Vec::new();
        let mut push_rule = |rules: &mut Vec<(Vec<u16>, Vec<u16>)>, lhs: Vec<u16>, rhs: Vec<u16>| {
            if lhs == rhs || lhs.len() > KB_MAX_LEN || rules.len() >= KB_MAX_RULES {
                return;
            }
            let (l, r) = if shortlex_less(&rhs, &lhs) {
                (lhs, rhs)
            } else {
                (rhs, lhs)
            };
            if !rules.iter().any(|(a, b)| a == &l && b == &r) {
                rules.push((l, r));
            }
        };
        for rel in relations {
            let letters = runs_to_letters(&free_reduce(rel.clone()));
            if letters.is_empty() {
                continue;
            }
            for word in [letters.clone(), inverse_letters(&letters)] {
                for rot in 0..word.len() {
                    let mut r = word[rot..].to_vec();
                    r.extend_from_slice(&word[..rot]);
                    // r = 1, so the front half equals the inverted back half
                    let mid = r.len().div_ceil(2);
                    let lhs = r[..mid].to_vec();
                    let rhs = inverse_letters(&r[mid..]);
                    push_rule(&mut rules, lhs, rhs);
                }
            }
        }
        let mut rw = Rewriter { rules };
        // resolve critical pairs until stable or capped
        for _ in 0..KB_MAX_PASSES {
            let mut new_rules = Vec::new();
            let snapshot = rw.rules.clone();
            for (l1, r1) in &snapshot {
                for (l2, r2) in &snapshot {
                    // overlap: a suffix of l1 equals a prefix of l2
                    for k in 1..=l1.len().min(l2.len()) {
                        if l1[l1.len() - k..] != l2[..k] {
                            continue;
                        }
                        // superposition l1 · l2[k..], reduced two ways
                        let mut sup_left = r1.clone();
                        sup_left.extend_from_slice(&l2[k..]);
                        let mut sup_right = l1[..l1.len() - k].to_vec();
                        sup_right.extend_from_slice(r2);
                        if sup_left.len() > KB_MAX_LEN || sup_right.len() > KB_MAX_LEN {
                            continue;
                        }
                        let a = rw.canonicalize(&sup_left);
                        let b = rw.canonicalize(&sup_right);
                        if a != b {
                            new_rules.push((a, b));
                        }
                    }
                }
            }
            if new_rules.is_empty() {
                break;
            }
            for (a, b) in new_rules {
                push_rule(&mut rw.rules, a, b);
            }
        }
        rw
    }

    /// Free reduction plus rule application to a fixpoint.
    fn canonicalize(&self, letters: &[u16]) -> Vec<u16> {
        let mut w = free_reduce_letters(letters);
        let mut budget = 4096usize;
        'outer: while budget > 0 {
            budget -= 1;
            for (lhs, rhs) in &self.rules {
                if lhs.len() > w.len() {
                    continue;
                }
                for pos in 0..=(w.len() - lhs.len()) {
                    if &w[pos..pos + lhs.len()] == lhs.as_slice() {
                        let mut out = w[..pos].to_vec();
                        out.extend_from_slice(rhs);
                        out.extend_from_slice(&w[pos + lhs.len()..]);
                        w = free_reduce_letters(&out);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        w
    }
}

fn free_reduce_letters(letters: &[u16]) -> Vec<u16> {
    let mut out: Vec<u16> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last().map(|&p| p == inv_letter(l)).unwrap_or(false) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Word length oracle: `L(1) = identity_value` (default 1) and `L(g)` is the
/// minimum of the summed generator weights over nonempty words for `g`.
pub struct LengthOracle {
    pub model: Arc<GroupModel>,
    pub identity_value: Rat,
    pub truncation_radius: Rat,
    overrides: BTreeMap<GroupElement, Rat>,
    ball: OnceLock<BTreeMap<GroupElement, Rat>>,
}

impl LengthOracle {
    pub fn new(model: Arc<GroupModel>, truncation_radius: Rat) -> Self {
        LengthOracle {
            model,
            identity_value: rat(1),
            truncation_radius,
            overrides: BTreeMap::new(),
            ball: OnceLock::new(),
        }
    }

    /// Plants a fixed answer for one element; used to inject defects in
    /// axiom-check tests.
    pub fn with_override(mut self, g: GroupElement, value: Rat) -> Self {
        self.overrides.insert(g, value);
        self
    }

    pub fn word_length(&self, g: &GroupElement) -> Result<Rat, GroupError> {
        if let Some(v) = self.overrides.get(g) {
            return Ok(v.clone());
        }
        if g.is_identity() {
            return Ok(self.identity_value.clone());
        }
        match (&self.model.kind, g) {
            (GroupKind::FreeAbelian, GroupElement::Vector(v)) => {
                let mut acc = Rat::zero();
                for (x, w) in v.iter().zip(&self.model.weights) {
                    acc += Rat::from_integer(x.abs()) * w;
                }
                Ok(acc)
            }
            (GroupKind::Free, GroupElement::Word(runs)) => {
                let mut acc = Rat::zero();
                for (gen, e) in runs {
                    acc += rat(e.abs()) * &self.model.weights[*gen as usize];
                }
                Ok(acc)
            }
            (GroupKind::Presented { .. }, _) => {
                let ball = self.ball();
                ball.get(g).cloned().ok_or_else(|| {
                    GroupError::OutOfTruncation(
                        self.model.render_element(g),
                        rat::rat_string(&self.truncation_radius),
                    )
                })
            }
            _ => Err(GroupError::ShapeMismatch),
        }
    }

    /// All elements with `L(g) <= radius`, sorted for determinism. For
    /// presented groups this is the cached search ball (and `radius` must not
    /// exceed the truncation radius).
    pub fn ball_elements(&self, radius: &Rat) -> Result<Vec<GroupElement>, GroupError> {
        match &self.model.kind {
            GroupKind::FreeAbelian => {
                let mut out = Vec::new();
                let mut current = vec![BigInt::zero(); self.model.rank()];
                self.enumerate_abelian(radius, 0, &mut current, &mut out);
                out.sort();
                Ok(out)
            }
            GroupKind::Free => {
                let mut out = vec![self.model.identity()];
                let mut word = Vec::new();
                self.enumerate_free(radius, &mut word, &Rat::zero(), &mut out);
                out.sort();
                Ok(out)
            }
            GroupKind::Presented { .. } => {
                if radius > &self.truncation_radius {
                    return Err(GroupError::OutOfTruncation(
                        format!("ball of radius {}", rat::rat_string(radius)),
                        rat::rat_string(&self.truncation_radius),
                    ));
                }
                let mut out: Vec<GroupElement> = self
                    .ball()
                    .iter()
                    .filter(|(_, l)| *l <= radius)
                    .map(|(g, _)| g.clone())
                    .collect();
                out.push(self.model.identity());
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }

    fn enumerate_abelian(
        &self,
        radius: &Rat,
        coord: usize,
        current: &mut Vec<BigInt>,
        out: &mut Vec<GroupElement>,
    ) {
        if coord == current.len() {
            out.push(GroupElement::Vector(current.clone()));
            return;
        }
        let used: Rat = current[..coord]
            .iter()
            .zip(&self.model.weights)
            .map(|(x, w)| Rat::from_integer(x.abs()) * w)
            .sum();
        let room = radius - &used;
        let max = (room / &self.model.weights[coord]).floor().to_integer();
        let mut k = -max.clone();
        while k <= max {
            current[coord] = k.clone();
            self.enumerate_abelian(radius, coord + 1, current, out);
            k += 1;
        }
        current[coord] = BigInt::zero();
    }

    fn enumerate_free(
        &self,
        radius: &Rat,
        word: &mut Vec<(u16, i64)>,
        used: &Rat,
        out: &mut Vec<GroupElement>,
    ) {
        for gen in 0..self.model.rank() as u16 {
            for e in [1i64, -1] {
                if let Some(last) = word.last() {
                    if last.0 == gen && last.1.signum() != e.signum() {
                        continue;
                    }
                }
                let cost = used + &self.model.weights[gen as usize];
                if &cost > radius {
                    continue;
                }
                push_run(word, gen, e);
                out.push(GroupElement::Word(word.clone()));
                self.enumerate_free(radius, word, &cost, out);
                pop_run(word, gen, e);
            }
        }
    }

    /// Weighted shortest-path ball for presented groups (Dijkstra over
    /// canonical forms), computed once.
    fn ball(&self) -> &BTreeMap<GroupElement, Rat> {
        self.ball.get_or_init(|| {
            let mut dist: BTreeMap<GroupElement, Rat> = BTreeMap::new();
            let mut heap: BinaryHeap<Reverse<(Rat, GroupElement)>> = BinaryHeap::new();
            let id = self.model.identity();
            heap.push(Reverse((Rat::zero(), id)));
            let mut settled: BTreeSet<GroupElement> = BTreeSet::new();
            while let Some(Reverse((d, g))) = heap.pop() {
                if !settled.insert(g.clone()) {
                    continue;
                }
                if !g.is_identity() {
                    dist.insert(g.clone(), d.clone());
                }
                for gen in 0..self.model.rank() {
                    for e in [1i64, -1] {
                        let step = self
                            .model
                            .mul(&g, &self.model.canonical_word(vec![(gen as u16, e)]));
                        let nd = &d + &self.model.weights[gen];
                        if nd > self.truncation_radius || settled.contains(&step) {
                            continue;
                        }
                        heap.push(Reverse((nd, step)));
                    }
                }
            }
            dist
        })
    }
}

fn push_run(word: &mut Vec<(u16, i64)>, gen: u16, e: i64) {
    if let Some(last) = word.last_mut() {
        if last.0 == gen {
            last.1 += e;
            if last.1 == 0 {
                word.pop();
            }
            return;
        }
    }
    word.push((gen, e));
}

fn pop_run(word: &mut Vec<(u16, i64)>, gen: u16, e: i64) {
    push_run(word, gen, -e);
}

/// Outcome of sampling-based axiom checks; empty `violations` means a pass.
#[derive(Debug, Clone, Default)]
pub struct AxiomReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies `L(1) = identity_value`, `L(g) = L(g^-1)`, and non-strict
/// subadditivity on the supplied sample pairs.
pub fn check_length_axioms(
    oracle: &LengthOracle,
    pairs: &[(GroupElement, GroupElement)],
) -> AxiomReport {
    let mut report = AxiomReport::default();
    let id = oracle.model.identity();
    report.checked += 1;
    match oracle.word_length(&id) {
        Ok(l) if l == oracle.identity_value => {}
        Ok(l) => report.violations.push(format!(
            "L(1) = {} instead of {}",
            rat::rat_string(&l),
            rat::rat_string(&oracle.identity_value)
        )),
        Err(e) => report.violations.push(format!("L(1): {e}")),
    }
    for (g, h) in pairs {
        report.checked += 1;
        let (lg, lh) = match (oracle.word_length(g), oracle.word_length(h)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        if let Ok(lginv) = oracle.word_length(&oracle.model.inv(g)) {
            if lginv != lg {
                report.violations.push(format!(
                    "L({g}) = {} but L(inverse) = {}",
                    rat::rat_string(&lg),
                    rat::rat_string(&lginv)
                ));
            }
        }
        let gh = oracle.model.mul(g, h);
        if let Ok(lgh) = oracle.word_length(&gh) {
            if lgh > &lg + &lh {
                report.violations.push(format!(
                    "subadditivity fails: L({g}·{h}) = {} > {} + {}",
                    rat::rat_string(&lgh),
                    rat::rat_string(&lg),
                    rat::rat_string(&lh)
                ));
            }
        }
    }
    report
}

/// A weighted set with a group action and a claimed compatibility constant.
pub struct WeightedGSet<S> {
    pub label: String,
    pub weight: Arc<dyn Fn(&S) -> Rat + Send + Sync>,
    pub action: Arc<dyn Fn(&GroupElement, &S) -> S + Send + Sync>,
    pub constant: Rat,
}

#[derive(Debug, Clone)]
pub struct GSetReport {
    pub checked: usize,
    pub violations: Vec<String>,
    /// Largest observed `w(g·s) / (L(g) + w(s))`.
    pub tightest_constant: Option<Rat>,
}

impl GSetReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `w(g·s) <= C·(L(g) + w(s))` on the given samples and reports the
/// tightest constant that would have sufficed.
pub fn check_gset<S: fmt::Debug>(
    oracle: &LengthOracle,
    set: &WeightedGSet<S>,
    samples: &[(GroupElement, S)],
) -> GSetReport {
    let mut report = GSetReport {
        checked: 0,
        violations: Vec::new(),
        tightest_constant: None,
    };
    for (g, s) in samples {
        let lg = match oracle.word_length(g) {
            Ok(l) => l,
            Err(_) => continue,
        };
        report.checked += 1;
        let ws = (set.weight)(s);
        let moved = (set.action)(g, s);
        let wm = (set.weight)(&moved);
        let denom = &lg + &ws;
        if denom.is_positive() {
            let ratio = &wm / &denom;
            if report
                .tightest_constant
                .as_ref()
                .map(|t| &ratio > t)
                .unwrap_or(true)
            {
                report.tightest_constant = Some(ratio.clone());
            }
            if wm > &set.constant * &denom {
                report.violations.push(format!(
                    "w({g}·{s:?}) = {} exceeds C·(L+w) = {}",
                    rat::rat_string(&wm),
                    rat::rat_string(&(&set.constant * &denom))
                ));
            }
        }
    }
    report
}
