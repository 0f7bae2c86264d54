//! Modularity violations `f(S) + f(T) - f(S ∪ T) - f(S ∩ T)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Evaluator, SetFunction};
use crate::metrics::fit::{closest_linear, FitMode};
use crate::sampling::{self, Mode};
use crate::set::{low_mask, ItemSet};

/// Widest universe scanned exhaustively.
pub const MAX_EXACT_ITEMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Disjoint pairs only.
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Largest absolute violation found.
    pub value: f64,
    pub s: ItemSet,
    pub t: ItemSet,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularityReport {
    pub eps_weak: f64,
    pub eps_strong: f64,
    pub witness_weak: (ItemSet, ItemSet),
    pub witness_strong: (ItemSet, ItemSet),
    pub mode: Mode,
}

#[inline]
pub fn pair_violation(f: &SetFunction, s: ItemSet, t: ItemSet) -> f64 {
    f.value(s) + f.value(t) - f.value(s.union(t)) - f.value(s.intersection(t))
}

type Best = (f64, u64, u64);

#[inline]
fn better(a: Best, b: Best) -> Best {
    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
        b
    } else {
        a
    }
}

const NONE: Best = (f64::NEG_INFINITY, 0, 0);

fn exact_weak(table: &[f64], n: usize) -> Best {
    let size = 1u64 << n;
    let full = low_mask(n);
    let chunks = (size as usize).min(256);
    let f0 = table[0];
    sampling::map_chunks(chunks, |c| {
        let mut best = NONE;
        for s in ((c as u64).max(1)..size).step_by(chunks) {
            let fs = table[s as usize] - f0;
            let comp = full & !s;
            let mut t = comp;
            while t > s {
                let v = (fs + table[t as usize] - table[(s | t) as usize]).abs();
                if v >= best.0 {
                    best = better(best, (v, s, t));
                }
                t = (t - 1) & comp;
            }
        }
        best
    })
    .into_iter()
    .fold(NONE, better)
}

fn exact_strong(table: &[f64], n: usize) -> Best {
    let size = 1u64 << n;
    let chunks = (size as usize).min(256);
    // Interleave rows so every chunk gets a similar share of the triangle.
    sampling::map_chunks(chunks, |c| {
        let mut best = NONE;
        let mut s = c as u64;
        while s < size {
            let fs = table[s as usize];
            for t in s + 1..size {
                if s & !t == 0 || t & !s == 0 {
                    continue;
                }
                let v = (fs + table[t as usize] - table[(s | t) as usize] - table[(s & t) as usize]).abs();
                if v >= best.0 {
                    best = better(best, (v, s, t));
                }
            }
            s += chunks as u64;
        }
        best
    })
    .into_iter()
    .fold(NONE, better)
}

fn sampled(f: &SetFunction, variant: Variant, count: usize, seed: u64) -> Best {
    let n = f.n();
    let sizes = sampling::chunk_sizes(count);
    sampling::map_chunks(sizes.len(), |w| {
        let mut rng = sampling::stream_rng(seed, w as u64);
        let mut best = NONE;
        for _ in 0..sizes[w] {
            let (s, t) = match variant {
                Variant::Strong => (
                    sampling::random_mask(&mut rng, n),
                    sampling::random_mask(&mut rng, n),
                ),
                Variant::Weak => {
                    let (mut a, mut b) = (0u64, 0u64);
                    for i in 0..n {
                        match rng.gen_range(0..3) {
                            0 => a |= 1 << i,
                            1 => b |= 1 << i,
                            _ => {}
                        }
                    }
                    (ItemSet::from_raw(a, n), ItemSet::from_raw(b, n))
                }
            };
            let (s, t) = if s.mask() <= t.mask() { (s, t) } else { (t, s) };
            let v = pair_violation(f, s, t).abs();
            best = better(best, (v, s.mask(), t.mask()));
        }
        best
    })
    .into_iter()
    .fold(NONE, better)
}

/// Largest violation over disjoint (weak) or all (strong) pairs.
///
/// Pairs are taken once as `S < T` by mask; comparable pairs, whose violation
/// is identically zero, are skipped. Ties go to the smallest `(S, T)`.
pub fn modularity_eps(f: &SetFunction, variant: Variant, mode: Mode) -> Result<Violation> {
    let n = f.n();
    let best = match mode {
        Mode::Exact => {
            if n > MAX_EXACT_ITEMS {
                return Err(Error::Capacity {
                    what: "exact modularity scan",
                    n,
                    limit: MAX_EXACT_ITEMS,
                });
            }
            let table = f.dense()?;
            match variant {
                Variant::Weak => exact_weak(&table, n),
                Variant::Strong => exact_strong(&table, n),
            }
        }
        Mode::Sampled { count, seed } => sampled(f, variant, count, seed),
    };
    let (value, s, t) = if best.0.is_finite() { best } else { (0.0, 0, 0) };
    Ok(Violation {
        value: value.max(0.0),
        s: ItemSet::from_raw(s, n),
        t: ItemSet::from_raw(t, n),
        exact: mode.is_exact(),
    })
}

pub fn modularity_report(f: &SetFunction, mode: Mode) -> Result<ModularityReport> {
    let weak = modularity_eps(f, Variant::Weak, mode)?;
    let strong = modularity_eps(f, Variant::Strong, mode)?;
    Ok(ModularityReport {
        eps_weak: weak.value,
        eps_strong: strong.value,
        witness_weak: (weak.s, weak.t),
        witness_strong: (strong.s, strong.t),
        mode,
    })
}

/// Sizes `(|S|, |T|, |S ∩ T|)` of a worst pair of a symmetric function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricViolation {
    pub value: f64,
    pub sizes: (usize, usize, usize),
}

/// Exact ε of a cardinality-determined function from its value vector.
pub fn symmetric_modularity_eps(f: &SetFunction, variant: Variant) -> Result<SymmetricViolation> {
    let Evaluator::Symmetric(v) = f.evaluator() else {
        return Err(Error::Unsupported("symmetric_modularity_eps needs a symmetric function".into()));
    };
    Ok(symmetric_eps(v, variant))
}

pub fn symmetric_eps(v: &[f64], variant: Variant) -> SymmetricViolation {
    let n = v.len() - 1;
    let mut best = SymmetricViolation {
        value: 0.0,
        sizes: (0, 0, 0),
    };
    let mut consider = |a: usize, b: usize, c: usize| {
        let x = (v[a] + v[b] - v[a + b - c] - v[c]).abs();
        if x > best.value {
            best = SymmetricViolation {
                value: x,
                sizes: (a, b, c),
            };
        }
    };
    for a in 0..=n {
        for b in a..=n {
            match variant {
                Variant::Weak => {
                    if a + b <= n {
                        consider(a, b, 0);
                    }
                }
                Variant::Strong => {
                    for c in (a + b).saturating_sub(n)..=a.min(b) {
                        consider(a, b, c);
                    }
                }
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KaltonRatio {
    pub delta: f64,
    pub eps: f64,
    pub ratio: f64,
}

/// `Δ(f) / ε(f)`, zero when `ε = 0`.
pub fn kalton_ratio(f: &SetFunction, variant: Variant) -> Result<KaltonRatio> {
    let eps = modularity_eps(f, variant, Mode::Exact)?.value;
    let delta = closest_linear(f, FitMode::Exact)?.delta;
    let ratio = if eps <= 1e-12 { 0.0 } else { delta / eps };
    Ok(KaltonRatio { delta, eps, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::LinearFunction;

    fn alternating() -> SetFunction {
        SetFunction::symmetric(vec![0.0, -1.0, 1.0, -1.0, 0.0]).unwrap()
    }

    #[test]
    fn linear_functions_are_modular() {
        let f = SetFunction::linear(LinearFunction::new(1.0, vec![0.5, -1.5, 2.0, 0.0, 3.0])).unwrap();
        let r = modularity_report(&f, Mode::Exact).unwrap();
        assert!(r.eps_weak < 1e-12 && r.eps_strong < 1e-12);
        assert_eq!(kalton_ratio(&f, Variant::Strong).unwrap().ratio, 0.0);
    }

    #[test]
    fn alternating_four_item_function_is_violated_by_four() {
        let f = alternating();
        let v = modularity_eps(&f, Variant::Strong, Mode::Exact).unwrap();
        assert_eq!(v.value, 4.0);
        assert_eq!(pair_violation(&f, v.s, v.t).abs(), 4.0);
        assert_eq!(symmetric_modularity_eps(&f, Variant::Strong).unwrap().value, 4.0);
    }

    #[test]
    fn witness_reproduces_violation() {
        let f = SetFunction::from_fn(6, |s| ((s.mask() * 40503) % 11) as f64).unwrap();
        for variant in [Variant::Weak, Variant::Strong] {
            let v = modularity_eps(&f, variant, Mode::Exact).unwrap();
            assert_eq!(pair_violation(&f, v.s, v.t).abs(), v.value);
            assert!(v.s.mask() < v.t.mask());
            if variant == Variant::Weak {
                assert!(v.s.is_disjoint(v.t));
            }
        }
    }

    #[test]
    fn sampled_is_a_lower_bound() {
        let f = SetFunction::from_fn(8, |s| ((s.mask() * 7919) % 13) as f64).unwrap();
        for variant in [Variant::Weak, Variant::Strong] {
            let exact = modularity_eps(&f, variant, Mode::Exact).unwrap().value;
            let s = modularity_eps(&f, variant, Mode::sampled(500, 9)).unwrap();
            assert!(s.value <= exact);
            if variant == Variant::Weak {
                assert!(s.s.is_disjoint(s.t));
            }
        }
    }

    #[test]
    fn exact_capacity_is_enforced() {
        let f = SetFunction::linear(LinearFunction::zero(21)).unwrap();
        assert!(matches!(
            modularity_eps(&f, Variant::Weak, Mode::Exact),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn constant_symmetric_function_has_zero_eps() {
        let f = SetFunction::symmetric(vec![2.5; 7]).unwrap();
        assert_eq!(symmetric_modularity_eps(&f, Variant::Weak).unwrap().value, 0.0);
        assert_eq!(symmetric_modularity_eps(&f, Variant::Strong).unwrap().value, 0.0);
    }
}
