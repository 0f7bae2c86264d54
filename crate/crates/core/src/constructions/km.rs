//! Functions on the universe of balanced ±1 vectors of length `2k`.
//!
//! Item `i` is the `i`-th balanced vector in lexicographic order with `+`
//! before `-` (item 1 of `k = 4` is `++++----`). Generator `P_j` holds the
//! items that are `+` at coordinate `j`, and `N_j` is its complement. Negation
//! pairs every item with its opposite vector; the dual of `S` is the
//! complement of the image of `S` under negation.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{SetFunction, SetRule, MAX_TABLE_ITEMS};
use crate::metrics::certificate::{support_certificate, SupportCertificate};
use crate::metrics::modularity::{modularity_eps, Variant};
use crate::report::Check;
use crate::sampling::{self, Mode};
use crate::set::{ItemSet, Members};

/// Largest `k` supported (`C(8, 4) = 70` items).
pub const MAX_K: usize = 4;

/// A subset of a universe of at most 128 items.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WideSet {
    bits: u128,
    n: u8,
}

fn wide_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

impl WideSet {
    pub fn new(bits: u128, n: usize) -> Result<Self> {
        if n > 128 {
            return Err(Error::Capacity {
                what: "WideSet",
                n,
                limit: 128,
            });
        }
        if bits & !wide_mask(n) != 0 {
            return Err(Error::Domain(format!("bits outside a universe of {n} items")));
        }
        Ok(Self { bits, n: n as u8 })
    }

    fn raw(bits: u128, n: usize) -> Self {
        Self { bits, n: n as u8 }
    }

    pub fn empty(n: usize) -> Self {
        Self::raw(0, n)
    }

    pub fn full(n: usize) -> Self {
        Self::raw(wide_mask(n), n)
    }

    pub fn from_items(n: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u128;
        for i in items {
            if i >= n {
                return Err(Error::Domain(format!("item index {i} outside universe of {n}")));
            }
            bits |= 1 << i;
        }
        Self::new(bits, n)
    }

    pub fn bits(self) -> u128 {
        self.bits
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.n() && self.bits >> i & 1 == 1
    }

    pub fn complement(self) -> Self {
        Self::raw(!self.bits & wide_mask(self.n()), self.n())
    }

    pub fn union(self, o: Self) -> Self {
        Self::raw(self.bits | o.bits, self.n())
    }

    pub fn intersection(self, o: Self) -> Self {
        Self::raw(self.bits & o.bits, self.n())
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.bits & !o.bits == 0
    }

    pub fn toggle(self, i: usize) -> Self {
        Self::raw(self.bits ^ (1 << i), self.n())
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut m = self.bits;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    pub fn to_item_set(self) -> Result<ItemSet> {
        if self.n() > 64 {
            return Err(Error::Capacity {
                what: "ItemSet",
                n: self.n(),
                limit: 64,
            });
        }
        ItemSet::new(self.bits as u64, self.n())
    }

    pub fn from_item_set(s: ItemSet) -> Self {
        Self::raw(u128::from(s.mask()), s.n())
    }

    pub fn to_item_list(self) -> String {
        let parts: Vec<String> = self.items().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for WideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.to_item_list(), self.n)
    }
}

impl fmt::Display for WideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_item_list())
    }
}

impl Members for WideSet {
    fn universe(&self) -> usize {
        self.n()
    }
    fn contains(&self, item: usize) -> bool {
        WideSet::contains(*self, item)
    }
    fn members(&self) -> Vec<usize> {
        self.items().collect()
    }
    fn len(&self) -> usize {
        WideSet::len(*self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KmUniverse {
    k: usize,
    /// `vectors[i][j]` is `+1` or `-1`.
    vectors: Vec<Vec<i8>>,
    generators: Vec<WideSet>,
    matching: Vec<usize>,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

pub fn km_universe(k: usize) -> Result<KmUniverse> {
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::Capacity {
            what: "km_universe (k)",
            n: k,
            limit: MAX_K,
        });
    }
    let width = 2 * k;
    // Bit `width-1-j` set means coordinate `j` is `-`; numeric order is then
    // lexicographic order with `+` first.
    let codes: Vec<u32> = (0u32..1 << width).filter(|c| c.count_ones() as usize == k).collect();
    let n = codes.len();
    let index: HashMap<u32, usize> = codes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let full = (1u32 << width) - 1;
    let vectors: Vec<Vec<i8>> = codes
        .iter()
        .map(|&c| (0..width).map(|j| if c >> (width - 1 - j) & 1 == 1 { -1 } else { 1 }).collect())
        .collect();
    let matching = codes.iter().map(|&c| index[&(c ^ full)]).collect();
    let generators = (0..width)
        .map(|j| WideSet::from_items(n, (0..n).filter(|&i| vectors[i][j] == 1)).unwrap())
        .collect();
    Ok(KmUniverse {
        k,
        vectors,
        generators,
        matching,
    })
}

impl KmUniverse {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, item: usize) -> &[i8] {
        &self.vectors[item]
    }

    /// `P_1..P_2k`.
    pub fn generators(&self) -> &[WideSet] {
        &self.generators
    }

    /// `N_1..N_2k`.
    pub fn negatives(&self) -> Vec<WideSet> {
        self.generators.iter().map(|g| g.complement()).collect()
    }

    pub fn matched(&self, item: usize) -> usize {
        self.matching[item]
    }

    pub fn dual(&self, s: WideSet) -> WideSet {
        let image = s.items().fold(0u128, |acc, i| acc | 1 << self.matching[i]);
        WideSet::raw(image, self.n()).complement()
    }

    /// Item permutation induced by permuting coordinates: coordinate `j` of
    /// the image vector is coordinate `perm[j]` of the source.
    pub fn item_permutation(&self, perm: &[usize]) -> Vec<usize> {
        let index: HashMap<&[i8], usize> =
            self.vectors.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
        self.vectors
            .iter()
            .map(|v| {
                let w: Vec<i8> = (0..v.len()).map(|j| v[perm[j]]).collect();
                index[w.as_slice()]
            })
            .collect()
    }

    pub fn map_set(&self, s: WideSet, items: &[usize]) -> WideSet {
        WideSet::raw(s.items().fold(0u128, |acc, i| acc | 1 << items[i]), self.n())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSet {
    /// PS → M; `S1 ⊆ S ⊆ S1 ∪ S2` or `S1 ∩ S2 ⊆ S ⊆ S1` → 1; antisymmetry; 0.
    Interval,
    /// PS → M; strictly inside some P but no N, or strictly containing some P
    /// but no N → 1; antisymmetry; 0.
    ProperContainment,
}

/// A (k, M)-symmetric function given by ordered rules.
#[derive(Clone, Debug)]
pub struct KmFunction {
    name: String,
    universe: KmUniverse,
    m: i64,
    rules: RuleSet,
    claimed: (Variant, f64),
    gens: Vec<u128>,
    negs: Vec<u128>,
}

impl KmFunction {
    pub fn new(name: &str, universe: KmUniverse, m: i64, rules: RuleSet, claimed: (Variant, f64)) -> Self {
        let gens = universe.generators().iter().map(|g| g.bits()).collect();
        let negs = universe.negatives().iter().map(|g| g.bits()).collect();
        Self {
            name: name.to_string(),
            universe,
            m,
            rules,
            claimed,
            gens,
            negs,
        }
    }

    pub fn rules(&self) -> RuleSet {
        self.rules
    }

    /// Value and index (1-based) of the rule that fires.
    pub fn explain(&self, s: WideSet) -> (i64, usize) {
        if let Some((v, r)) = self.positive(s.bits()) {
            return (v, r);
        }
        if self.positive(s.complement().bits()).is_some() {
            let (v, _) = self.positive(s.complement().bits()).unwrap();
            return (-v, 3);
        }
        (0, 4)
    }

    pub fn value_int(&self, s: WideSet) -> i64 {
        self.explain(s).0
    }

    fn positive(&self, s: u128) -> Option<(i64, usize)> {
        if self.gens.contains(&s) {
            return Some((self.m, 1));
        }
        let hit = match self.rules {
            RuleSet::Interval => self.gens.iter().any(|&a| {
                (a & !s == 0 && {
                    let rest = s & !a;
                    self.gens.iter().any(|&b| rest & !b == 0)
                }) || (s & !a == 0 && self.gens.iter().any(|&b| a & b & !s == 0))
            }),
            RuleSet::ProperContainment => {
                let proper = |x: u128, y: u128| x & !y == 0 && x != y;
                let below = self.gens.iter().any(|&p| proper(s, p))
                    && !self.negs.iter().any(|&n| proper(s, n));
                let above = self.gens.iter().any(|&p| proper(p, s))
                    && !self.negs.iter().any(|&n| proper(n, s));
                below || above
            }
        };
        hit.then_some((1, 2))
    }

    /// Dense table when the universe is small enough.
    pub fn to_set_function(&self) -> Result<SetFunction> {
        let n = self.universe.n();
        if n > MAX_TABLE_ITEMS {
            return Err(Error::Capacity {
                what: "tabulated (k,M)-symmetric function",
                n,
                limit: MAX_TABLE_ITEMS,
            });
        }
        SetFunction::from_fn(n, |s| self.value_int(WideSet::from_item_set(s)) as f64)
    }
}

impl SetRule for KmFunction {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn eval(&self, s: ItemSet) -> f64 {
        self.value_int(WideSet::from_item_set(s)) as f64
    }
}

/// The 70-item strong lower-bound witness: `k = 4`, `M = 2`.
pub fn km70() -> KmFunction {
    KmFunction::new("km70", km_universe(4).unwrap(), 2, RuleSet::Interval, (Variant::Strong, 2.0))
}

/// The 20-item weak lower-bound witness: `k = 3`, `M = 3`.
pub fn km20() -> KmFunction {
    KmFunction::new(
        "km20",
        km_universe(3).unwrap(),
        3,
        RuleSet::ProperContainment,
        (Variant::Weak, 2.0),
    )
}

/// Value access to a (k, M)-symmetric candidate, possibly not a genuine one.
pub trait KmOracle: Sync {
    fn name(&self) -> String;
    fn universe(&self) -> &KmUniverse;
    fn m(&self) -> i64;
    /// Variant and ε the function is claimed to satisfy.
    fn claimed(&self) -> (Variant, f64);
    fn value(&self, s: WideSet) -> f64;
}

impl KmOracle for KmFunction {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn universe(&self) -> &KmUniverse {
        &self.universe
    }
    fn m(&self) -> i64 {
        self.m
    }
    fn claimed(&self) -> (Variant, f64) {
        self.claimed
    }
    fn value(&self, s: WideSet) -> f64 {
        self.value_int(s) as f64
    }
}

/// Overrides the value of one set; used as a negative control.
pub struct Mutated<'a> {
    pub inner: &'a dyn KmOracle,
    pub set: WideSet,
    pub value: f64,
}

impl KmOracle for Mutated<'_> {
    fn name(&self) -> String {
        format!("{} (mutated at {})", self.inner.name(), self.set)
    }
    fn universe(&self) -> &KmUniverse {
        self.inner.universe()
    }
    fn m(&self) -> i64 {
        self.inner.m()
    }
    fn claimed(&self) -> (Variant, f64) {
        self.inner.claimed()
    }
    fn value(&self, s: WideSet) -> f64 {
        if s == self.set {
            self.value
        } else {
            self.inner.value(s)
        }
    }
}

/// Step applied by [`reduce_pair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Swap,
    Complement,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPair {
    pub s: WideSet,
    pub t: WideSet,
    pub steps: Vec<Reduction>,
    pub violation: f64,
}

pub fn wide_violation(f: &dyn KmOracle, s: WideSet, t: WideSet) -> f64 {
    f.value(s) + f.value(t) - f.value(s.union(t)) - f.value(s.intersection(t))
}

/// Brings `(S, T)` to a pair with `|f(T')| <= |f(S')|`, `0 <= f(S') <= M` and
/// `f(S' ∩ T') <= f(S' ∪ T')` using swaps, complements and duals.
pub fn reduce_pair(f: &dyn KmOracle, s: WideSet, t: WideSet) -> Result<ReducedPair> {
    let u = f.universe();
    let before = wide_violation(f, s, t).abs();
    let (mut s, mut t) = (s, t);
    let mut steps = Vec::new();
    let involved = |s: WideSet, t: WideSet| [s, t, s.union(t), s.intersection(t)];
    if f.value(t).abs() > f.value(s).abs() {
        std::mem::swap(&mut s, &mut t);
        steps.push(Reduction::Swap);
    }
    if f.value(s) < 0.0 {
        for x in involved(s, t) {
            if f.value(x.complement()) != -f.value(x) {
                return Err(Error::Unsupported(format!("antisymmetry fails at {x}")));
            }
        }
        s = s.complement();
        t = t.complement();
        steps.push(Reduction::Complement);
    }
    if f.value(s.intersection(t)) > f.value(s.union(t)) {
        for x in involved(s, t) {
            if f.value(u.dual(x)) != f.value(x) {
                return Err(Error::Unsupported(format!("dual symmetry fails at {x}")));
            }
        }
        s = u.dual(s);
        t = u.dual(t);
        steps.push(Reduction::Dual);
    }
    let violation = wide_violation(f, s, t).abs();
    if violation != before {
        return Err(Error::Unsupported(format!(
            "reduction changed the violation from {before} to {violation}"
        )));
    }
    Ok(ReducedPair {
        s,
        t,
        steps,
        violation,
    })
}

/// Random sets biased toward the structured region where the rules fire.
pub fn structured_sample(rng: &mut impl Rng, u: &KmUniverse) -> WideSet {
    let n = u.n();
    let g = u.generators();
    let pick = |rng: &mut _| -> WideSet {
        let s = *g.choose(rng).unwrap();
        if Rng::gen_bool(rng, 0.5) {
            s.complement()
        } else {
            s
        }
    };
    let random = |rng: &mut _, p: f64| {
        WideSet::raw((0..n).filter(|_| Rng::gen_bool(rng, p)).fold(0u128, |a, i| a | 1 << i), n)
    };
    let base = match rng.gen_range(0..6) {
        0 => random(rng, 0.5),
        1 => {
            let (a, b) = (pick(rng), pick(rng));
            let p = rng.gen_range(0.0..1.0);
            let r = random(rng, p);
            a.union(b.intersection(r))
        }
        2 => {
            let (a, b) = (pick(rng), pick(rng));
            let p = rng.gen_range(0.0..1.0);
            let r = random(rng, p);
            a.intersection(b.union(r))
        }
        3 => {
            let mut s = pick(rng);
            for _ in 0..rng.gen_range(1..=3) {
                s = s.toggle(rng.gen_range(0..n));
            }
            s
        }
        4 => {
            let (a, b) = (pick(rng), pick(rng));
            if rng.gen_bool(0.5) {
                a.intersection(b)
            } else {
                a.union(b)
            }
        }
        _ => {
            let p = rng.gen_range(0.0..1.0);
            random(rng, p)
        }
    };
    match rng.gen_range(0..4) {
        0 => base.complement(),
        1 => u.dual(base),
        _ => base,
    }
}

/// Generators, their complements, pairwise unions/intersections of those,
/// and the complements and duals of everything.
pub fn structural_family(u: &KmUniverse) -> Vec<WideSet> {
    let mut base: Vec<WideSet> = u.generators().to_vec();
    base.extend(u.negatives());
    let mut out = base.clone();
    for &a in &base {
        for &b in &base {
            out.push(a.union(b));
            out.push(a.intersection(b));
        }
    }
    let more: Vec<WideSet> = out.iter().flat_map(|&s| [s.complement(), u.dual(s)]).collect();
    out.extend(more);
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Sampled { samples: usize, pairs: usize, seed: u64 },
    Exact,
}

#[derive(Clone, Debug, Serialize)]
pub struct KmReport {
    pub function: String,
    pub n: usize,
    pub m: i64,
    pub level: Level,
    pub checks: Vec<Check>,
    /// Largest violation found for the claimed variant.
    pub max_violation: f64,
    pub violation_witness: (String, String),
    /// Violation on `(P_1, P_2)`.
    pub generator_pair_violation: f64,
    pub certificate: SupportCertificate,
}

impl KmReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct PointStats {
    sets: usize,
    antisymmetry: Option<WideSet>,
    dual: Option<WideSet>,
    bound: Option<WideSet>,
    integral: Option<WideSet>,
}

fn point_checks(f: &dyn KmOracle, sets: impl Iterator<Item = WideSet>) -> PointStats {
    let u = f.universe();
    let m = f.m() as f64;
    let mut st = PointStats {
        sets: 0,
        antisymmetry: None,
        dual: None,
        bound: None,
        integral: None,
    };
    for s in sets {
        st.sets += 1;
        let v = f.value(s);
        if st.antisymmetry.is_none() && f.value(s.complement()) != -v {
            st.antisymmetry = Some(s);
        }
        if st.dual.is_none() && f.value(u.dual(s)) != v {
            st.dual = Some(s);
        }
        if st.bound.is_none() && v.abs() > m {
            st.bound = Some(s);
        }
        if st.integral.is_none() && v.fract() != 0.0 {
            st.integral = Some(s);
        }
    }
    st
}

fn push_point_checks(checks: &mut Vec<Check>, scope: &str, st: &PointStats, m: i64) {
    let items = [
        ("antisymmetry", st.antisymmetry, "f(S) = -f(complement S)".to_string()),
        ("dual_symmetry", st.dual, "f(S) = f(dual S)".to_string()),
        ("bounded", st.bound, format!("|f(S)| <= {m}")),
        ("integral", st.integral, "f(S) is an integer".to_string()),
    ];
    for (name, bad, what) in items {
        let detail = format!("{what} on {} {scope} sets", st.sets);
        checks.push(match bad {
            None => Check::pass(format!("{name}/{scope}"), detail),
            Some(s) => Check::fail(format!("{name}/{scope}"), detail, Some(s.to_item_list())),
        });
    }
}

fn circuit(rng: &mut impl Rng, depth: usize, gens: usize) -> Vec<(u8, usize)> {
    // Postfix program: (0, j) pushes generator j, (1, _) union, (2, _) intersection, (3, _) complement.
    fn build(rng: &mut impl Rng, depth: usize, gens: usize, out: &mut Vec<(u8, usize)>) {
        if depth == 0 || rng.gen_bool(0.3) {
            out.push((0, rng.gen_range(0..gens)));
            return;
        }
        match rng.gen_range(0..3) {
            0 | 1 => {
                build(rng, depth - 1, gens, out);
                build(rng, depth - 1, gens, out);
                out.push((rng.gen_range(1..=2), 0));
            }
            _ => {
                build(rng, depth - 1, gens, out);
                out.push((3, 0));
            }
        }
    }
    let mut out = Vec::new();
    build(rng, depth, gens, &mut out);
    out
}

fn run_circuit(program: &[(u8, usize)], gens: &[WideSet]) -> WideSet {
    let mut stack: Vec<WideSet> = Vec::new();
    for &(op, j) in program {
        match op {
            0 => stack.push(gens[j]),
            3 => {
                let a = stack.pop().unwrap();
                stack.push(a.complement());
            }
            _ => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(if op == 1 { a.union(b) } else { a.intersection(b) });
            }
        }
    }
    stack.pop().unwrap()
}

const ANONYMITY_TRIALS: usize = 2000;

/// Runs the symmetry, value, support and modularity checks.
pub fn km_certificates(f: &dyn KmOracle, level: Level) -> Result<KmReport> {
    let u = f.universe();
    let n = u.n();
    let k = u.k();
    let m = f.m();
    let mut checks = Vec::new();

    let sizes_ok = u.generators().iter().all(|g| g.len() == n / 2);
    checks.push(Check::new(
        "generator_sizes",
        sizes_ok,
        format!("{} generators of size {}", u.generators().len(), n / 2),
    ));
    let mut freq = vec![0usize; n];
    for g in u.generators() {
        for i in g.items() {
            freq[i] += 1;
        }
    }
    let bad = freq.iter().position(|&c| c != k);
    checks.push(
        Check::new("generator_frequency", bad.is_none(), format!("every item in exactly {k} of {} generators", 2 * k))
            .with_witness(bad.map(|i| format!("item {} in {} generators", i + 1, freq[i]))),
    );

    let ps = u.generators().to_vec();
    let ns = u.negatives();
    let bad_ps = ps.iter().chain(&ns).find(|&&s| {
        let want = if ps.contains(&s) { m } else { -m } as f64;
        f.value(s) != want
    });
    checks.push(
        Check::new("support_values", bad_ps.is_none(), format!("f = {m} on PS and {} on NS", -m))
            .with_witness(bad_ps.map(|s| s.to_item_list())),
    );
    let certificate = support_certificate(n, m as f64, &ps, &ns, |&s| f.value(s), |s| s.to_item_list())
        .unwrap_or(SupportCertificate {
            feasible: false,
            m: m as f64,
            p: vec![],
            q: vec![],
            marginals: vec![],
            uniform: false,
        });
    let half = certificate.marginals.iter().all(|&x| (x - 0.5).abs() < 1e-12);
    checks.push(Check::new(
        "zero_closest_certificate",
        certificate.feasible && certificate.uniform && half,
        "uniform PS/NS distributions with item marginals 1/2",
    ));

    let family = structural_family(u);
    let st = point_checks(f, family.iter().copied());
    push_point_checks(&mut checks, "structural", &st, m);

    if u.k() >= 3 {
        let (p1, p2) = (ps[0], ps[1]);
        let want = [(p1.union(p2), 1.0), (p1.intersection(p2), 1.0)];
        if let RuleSet::Interval = rules_of(f) {
            let bad = want.iter().find(|(s, v)| f.value(*s) != *v);
            checks.push(
                Check::new("pair_union_intersection_values", bad.is_none(), "f(P1 ∪ P2) = f(P1 ∩ P2) = 1")
                    .with_witness(bad.map(|(s, _)| s.to_item_list())),
            );
        }
    }

    let (variant, claimed) = f.claimed();
    let generator_pair_violation = wide_violation(f, ps[0], ps[1]).abs();
    let (max_violation, witness) = match level {
        Level::Exact => {
            if n > MAX_TABLE_ITEMS {
                return Err(Error::Capacity {
                    what: "exact km_certificates",
                    n,
                    limit: MAX_TABLE_ITEMS,
                });
            }
            let table = SetFunction::from_fn(n, |s| f.value(WideSet::from_item_set(s)))?;
            let all = (0..1u64 << n).map(|mask| WideSet::raw(u128::from(mask), n));
            let st = point_checks(f, all);
            push_point_checks(&mut checks, "all", &st, m);
            let v = modularity_eps(&table, variant, Mode::Exact)?;
            (v.value, (v.s.to_item_list(), v.t.to_item_list()))
        }
        Level::Sampled { samples, pairs, seed } => {
            let sizes = sampling::chunk_sizes(samples);
            let parts = sampling::map_chunks(sizes.len(), |w| {
                let mut rng = sampling::stream_rng(seed, w as u64);
                let sets: Vec<WideSet> = (0..sizes[w]).map(|_| structured_sample(&mut rng, u)).collect();
                point_checks(f, sets.into_iter())
            });
            let merged = parts.into_iter().fold(
                PointStats {
                    sets: 0,
                    antisymmetry: None,
                    dual: None,
                    bound: None,
                    integral: None,
                },
                |a, b| PointStats {
                    sets: a.sets + b.sets,
                    antisymmetry: a.antisymmetry.or(b.antisymmetry),
                    dual: a.dual.or(b.dual),
                    bound: a.bound.or(b.bound),
                    integral: a.integral.or(b.integral),
                },
            );
            push_point_checks(&mut checks, "sampled", &merged, m);
            sampled_violation(f, variant, pairs, seed)
        }
    };
    let sampled = matches!(level, Level::Sampled { .. });
    checks.push(
        Check::new(
            "modularity",
            max_violation <= claimed + 1e-9,
            format!(
                "{} {:?} violation {max_violation} <= {claimed}",
                if sampled { "sampled" } else { "exhaustive" },
                variant
            ),
        )
        .with_witness(Some(format!("{} {}", witness.0, witness.1))),
    );
    if variant == Variant::Strong {
        checks.push(Check::new(
            "generator_pair_attains_claim",
            generator_pair_violation == claimed,
            format!("violation on (P1, P2) is {generator_pair_violation}"),
        ));
    }

    let mut rng = sampling::rng(level_seed(level) ^ 0xa11ce);
    let gens = u.generators().to_vec();
    let mut anonymity_bad = None;
    for _ in 0..ANONYMITY_TRIALS {
        let program = circuit(&mut rng, 3, gens.len());
        let mut perm: Vec<usize> = (0..gens.len()).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<WideSet> = perm.iter().map(|&j| gens[j]).collect();
        let (a, b) = (run_circuit(&program, &gens), run_circuit(&program, &permuted));
        if f.value(a) != f.value(b) {
            anonymity_bad = Some(format!("{a} vs {b}"));
            break;
        }
    }
    checks.push(
        Check::new(
            "generator_anonymity",
            anonymity_bad.is_none(),
            format!("{ANONYMITY_TRIALS} random circuits under random generator permutations"),
        )
        .with_witness(anonymity_bad),
    );

    Ok(KmReport {
        function: f.name(),
        n,
        m,
        level,
        checks,
        max_violation,
        violation_witness: witness,
        generator_pair_violation,
        certificate,
    })
}

fn rules_of(f: &dyn KmOracle) -> RuleSet {
    if f.claimed().0 == Variant::Strong {
        RuleSet::Interval
    } else {
        RuleSet::ProperContainment
    }
}

fn level_seed(level: Level) -> u64 {
    match level {
        Level::Sampled { seed, .. } => seed,
        Level::Exact => 0,
    }
}

/// Largest violation over seeded random pairs drawn from the structured
/// sampler (disjoint pairs for the weak variant).
pub fn sampled_violation(
    f: &dyn KmOracle,
    variant: Variant,
    pairs: usize,
    seed: u64,
) -> (f64, (String, String)) {
    let u = f.universe();
    let sizes = sampling::chunk_sizes(pairs);
    let best = sampling::map_chunks(sizes.len(), |w| {
        let mut rng = sampling::stream_rng(seed ^ 0x9e37_79b9, w as u64);
        let mut best = (f64::NEG_INFINITY, WideSet::empty(u.n()), WideSet::empty(u.n()));
        for _ in 0..sizes[w] {
            let s = structured_sample(&mut rng, u);
            let mut t = structured_sample(&mut rng, u);
            if variant == Variant::Weak {
                t = t.intersection(s.complement());
            }
            let v = wide_violation(f, s, t).abs();
            if v > best.0 {
                best = (v, s, t);
            }
        }
        best
    });
    let (v, s, t) = best
        .into_iter()
        .fold((f64::NEG_INFINITY, WideSet::empty(u.n()), WideSet::empty(u.n())), |a, b| {
            if b.0 > a.0 {
                b
            } else {
                a
            }
        });
    (v.max(0.0), (s.to_item_list(), t.to_item_list()))
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub k: usize,
    pub checks: Vec<Check>,
}

impl StructuralReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Exhaustive containment facts about generator pairs.
pub fn structural_claims(u: &KmUniverse) -> StructuralReport {
    let p = u.generators().to_vec();
    let nn = u.negatives();
    let r = 0..p.len();
    let mut checks = Vec::new();
    let mut claim = |name: &str, detail: &str, found: Option<String>| {
        checks.push(Check::new(name, found.is_none(), detail).with_witness(found));
    };
    let w = p.len();
    let all: Vec<(usize, usize, usize, usize)> = r
        .clone()
        .flat_map(|a| r.clone().flat_map(move |b| (0..w).flat_map(move |c| (0..w).map(move |d| (a, b, c, d)))))
        .collect();
    let quads = || all.iter().copied();
    let label = |xs: &[(char, usize)]| {
        xs.iter().map(|(c, i)| format!("{c}{}", i + 1)).collect::<Vec<_>>().join(",")
    };
    claim(
        "positive_not_inside_negative",
        "no P_a ∩ P_b is contained in N_c ∪ N_d",
        quads()
            .find(|&(a, b, c, d)| p[a].intersection(p[b]).is_subset(nn[c].union(nn[d])))
            .map(|(a, b, c, d)| label(&[('P', a), ('P', b), ('N', c), ('N', d)])),
    );
    claim(
        "negative_not_inside_positive",
        "no N_c ∩ N_d is contained in P_a ∪ P_b",
        quads()
            .find(|&(a, b, c, d)| nn[c].intersection(nn[d]).is_subset(p[a].union(p[b])))
            .map(|(a, b, c, d)| label(&[('N', c), ('N', d), ('P', a), ('P', b)])),
    );
    claim(
        "no_generator_covers_pair_intersection",
        "P_c does not contain P_a ∩ P_b for distinct a, b, c",
        quads()
            .find(|&(a, b, c, _)| a != b && c != a && c != b && p[a].intersection(p[b]).is_subset(p[c]))
            .map(|(a, b, c, _)| label(&[('P', a), ('P', b), ('P', c)])),
    );
    claim(
        "weak_1_pair_intersection_not_in_negative",
        "P_1 ∩ P_2 ⊄ N_3",
        quads()
            .find(|&(a, b, c, _)| p[a].intersection(p[b]).is_subset(nn[c]))
            .map(|(a, b, c, _)| label(&[('P', a), ('P', b), ('N', c)])),
    );
    claim(
        "weak_2_negative_intersection_not_in_positive",
        "N_3 ∩ N_4 ⊄ P_1",
        quads()
            .find(|&(a, _, c, d)| nn[c].intersection(nn[d]).is_subset(p[a]))
            .map(|(a, _, c, d)| label(&[('N', c), ('N', d), ('P', a)])),
    );
    claim(
        "weak_3_positive_not_in_negative_union",
        "P_1 ⊄ N_3 ∪ N_4",
        quads()
            .find(|&(a, _, c, d)| p[a].is_subset(nn[c].union(nn[d])))
            .map(|(a, _, c, d)| label(&[('P', a), ('N', c), ('N', d)])),
    );
    claim(
        "weak_4_negative_not_in_positive_union",
        "N_3 ⊄ P_1 ∪ P_2",
        quads()
            .find(|&(a, b, c, _)| nn[c].is_subset(p[a].union(p[b])))
            .map(|(a, b, c, _)| label(&[('N', c), ('P', a), ('P', b)])),
    );
    StructuralReport { k: u.k(), checks }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeficitProfile {
    pub ell: usize,
    /// Averages over the `C(2k, ℓ)` distinct generator subsets.
    pub d: f64,
    pub s: f64,
    /// Averages over all `(2k)^ℓ` ordered tuples with repetition.
    pub d_tuples: f64,
    pub s_tuples: f64,
    pub envelope: f64,
    /// Fraction of ordered ℓ-tuples whose intersection contains each item.
    pub item_frequency: Vec<f64>,
    pub within_envelope: bool,
}

/// `ε · (5ℓ/2 - 2)` for even `ℓ`, `ε · (5(ℓ-1)/2 + 1)` for odd `ℓ`.
pub fn deficit_envelope(ell: usize, eps: f64) -> f64 {
    let l = ell as f64;
    if ell.is_multiple_of(2) {
        eps * (2.5 * l - 2.0)
    } else {
        eps * (2.5 * (l - 1.0) + 1.0)
    }
}

fn surjections(ell: usize, j: usize) -> f64 {
    (0..=j)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(j, i) as f64 * ((j - i) as f64).powi(ell as i32)
        })
        .sum()
}

/// Average deficit of ℓ-wise PS intersections and surplus of NS intersections.
pub fn intersection_deficit_profile(f: &dyn KmOracle, ell: usize, eps: f64) -> Result<DeficitProfile> {
    let u = f.universe();
    let width = u.generators().len();
    if ell == 0 || ell > width {
        return Err(crate::error::domain(format!("ℓ must be in 1..={width}, got {ell}")));
    }
    let m = f.m() as f64;
    let ps = u.generators();
    let ns = u.negatives();
    let n = u.n();
    let (mut d, mut s, mut dt, mut st) = (0.0, 0.0, 0.0, 0.0);
    let mut freq = vec![0.0; n];
    let mut subsets = 0.0;
    let tuples = (width as f64).powi(ell as i32);
    for idx in 1u32..1 << width {
        let j = idx.count_ones() as usize;
        if j > ell {
            continue;
        }
        let meet = |sets: &[WideSet]| {
            (0..width)
                .filter(|b| idx >> b & 1 == 1)
                .fold(WideSet::full(n), |acc, b| acc.intersection(sets[b]))
        };
        let (pi, ni) = (meet(ps), meet(&ns));
        let dv = m - f.value(pi);
        let sv = f.value(ni) + m;
        let w = surjections(ell, j);
        dt += w * dv;
        st += w * sv;
        for i in pi.items() {
            freq[i] += w;
        }
        if j == ell {
            d += dv;
            s += sv;
            subsets += 1.0;
        }
    }
    let envelope = deficit_envelope(ell, eps);
    let (d, s) = (d / subsets, s / subsets);
    let (d_tuples, s_tuples) = (dt / tuples, st / tuples);
    Ok(DeficitProfile {
        ell,
        d,
        s,
        d_tuples,
        s_tuples,
        envelope,
        item_frequency: freq.iter().map(|x| x / tuples).collect(),
        within_envelope: d + s <= envelope + 1e-9 && d_tuples + s_tuples <= envelope + 1e-9,
    })
}
