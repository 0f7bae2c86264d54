//! Set functions and the value-oracle abstraction.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{self, Mode};
use crate::set::{low_mask, ItemSet, LargeSet, Members, MAX_ITEMS};

/// Largest universe that may be materialized as a dense table (2^24 doubles).
pub const MAX_TABLE_ITEMS: usize = 24;

/// `c0 + sum of coeffs[i] over items i in S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFunction {
    pub c0: f64,
    pub coeffs: Vec<f64>,
}

impl LinearFunction {
    pub fn new(c0: f64, coeffs: Vec<f64>) -> Self {
        Self { c0, coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(0.0, vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn eval(&self, s: ItemSet) -> f64 {
        s.items().fold(self.c0, |acc, i| acc + self.coeffs[i])
    }

    pub fn eval_members<S: Members + ?Sized>(&self, s: &S) -> f64 {
        (0..self.n()).filter(|&i| s.contains(i)).fold(self.c0, |acc, i| acc + self.coeffs[i])
    }

    pub fn eval_large(&self, s: &LargeSet) -> f64 {
        s.items().fold(self.c0, |acc, i| acc + self.coeffs[i])
    }

    /// Values on all `2^n` masks. Each entry adds the highest item last, so
    /// the sum is bit-identical to [`eval`](Self::eval).
    pub fn table(&self) -> Vec<f64> {
        let n = self.n();
        let mut t = vec![0.0; 1 << n];
        t[0] = self.c0;
        for mask in 1usize..(1 << n) {
            let high = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
            t[mask] = t[mask ^ (1 << high)] + self.coeffs[high];
        }
        t
    }

    pub fn sub(&self, other: &LinearFunction) -> LinearFunction {
        LinearFunction::new(
            self.c0 - other.c0,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        )
    }

    /// Largest coefficient-wise difference, `c0` included.
    pub fn max_coeff_diff(&self, other: &LinearFunction) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold((self.c0 - other.c0).abs(), f64::max)
    }
}

/// Evaluation rule for functions defined by a program rather than by data.
pub trait SetRule: Send + Sync {
    fn name(&self) -> String;
    fn eval(&self, s: ItemSet) -> f64;
}

pub type OracleFn = dyn Fn(ItemSet) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Evaluator {
    /// Values indexed by mask, `0..2^n`.
    Table(Arc<Vec<f64>>),
    Linear(LinearFunction),
    /// Values indexed by cardinality, `0..=n`.
    Symmetric(Vec<f64>),
    Generated(Arc<dyn SetRule>),
    Oracle(Arc<OracleFn>),
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Table(t) => write!(f, "Table({} entries)", t.len()),
            Evaluator::Linear(l) => write!(f, "Linear({l:?})"),
            Evaluator::Symmetric(v) => write!(f, "Symmetric({v:?})"),
            Evaluator::Generated(r) => write!(f, "Generated({})", r.name()),
            Evaluator::Oracle(_) => f.write_str("Oracle"),
        }
    }
}

/// A real-valued function on the subsets of an `n`-item universe, with a
/// counter of non-table evaluations.
pub struct SetFunction {
    n: usize,
    evaluator: Evaluator,
    queries: AtomicU64,
}

impl Clone for SetFunction {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            evaluator: self.evaluator.clone(),
            queries: AtomicU64::new(self.query_count()),
        }
    }
}

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunction")
            .field("n", &self.n)
            .field("evaluator", &self.evaluator)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl SetFunction {
    fn build(n: usize, evaluator: Evaluator) -> Result<Self> {
        if n > MAX_ITEMS {
            return Err(Error::Capacity {
                what: "SetFunction",
                n,
                limit: MAX_ITEMS,
            });
        }
        Ok(Self {
            n,
            evaluator,
            queries: AtomicU64::new(0),
        })
    }

    pub fn table(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_TABLE_ITEMS {
            return Err(Error::Capacity {
                what: "table function",
                n,
                limit: MAX_TABLE_ITEMS,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::Format(format!(
                "table for n={n} needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        Self::build(n, Evaluator::Table(Arc::new(values)))
    }

    pub fn linear(g: LinearFunction) -> Result<Self> {
        Self::build(g.n(), Evaluator::Linear(g))
    }

    pub fn symmetric(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Format("symmetric function needs n+1 values".into()));
        }
        Self::build(values.len() - 1, Evaluator::Symmetric(values))
    }

    pub fn generated(n: usize, rule: Arc<dyn SetRule>) -> Result<Self> {
        Self::build(n, Evaluator::Generated(rule))
    }

    pub fn oracle(n: usize, f: impl Fn(ItemSet) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::build(n, Evaluator::Oracle(Arc::new(f)))
    }

    /// Tabulates an arbitrary closure over all `2^n` masks.
    pub fn from_fn(n: usize, f: impl Fn(ItemSet) -> f64 + Sync) -> Result<Self> {
        if n > MAX_TABLE_ITEMS {
            return Err(Error::Capacity {
                what: "table function",
                n,
                limit: MAX_TABLE_ITEMS,
            });
        }
        Self::table(n, fill_table(n, f))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn is_table(&self) -> bool {
        matches!(self.evaluator, Evaluator::Table(_))
    }

    pub fn as_table(&self) -> Option<&[f64]> {
        match &self.evaluator {
            Evaluator::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn evaluate(&self, s: ItemSet) -> Result<f64> {
        if s.n() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                found: s.n(),
            });
        }
        Ok(self.value(s))
    }

    /// Unchecked evaluation; the set must come from this function's universe.
    #[inline]
    pub fn value(&self, s: ItemSet) -> f64 {
        debug_assert_eq!(s.n(), self.n);
        match &self.evaluator {
            Evaluator::Table(t) => t[s.mask() as usize],
            other => {
                self.queries.fetch_add(1, Ordering::Relaxed);
                match other {
                    Evaluator::Linear(g) => g.eval(s),
                    Evaluator::Symmetric(v) => v[s.len()],
                    Evaluator::Generated(r) => r.eval(s),
                    Evaluator::Oracle(f) => f(s),
                    Evaluator::Table(_) => unreachable!(),
                }
            }
        }
    }

    #[inline]
    pub fn value_mask(&self, mask: u64) -> f64 {
        self.value(ItemSet::from_raw(mask, self.n))
    }

    pub fn to_table(&self) -> Result<SetFunction> {
        if self.n > MAX_TABLE_ITEMS {
            return Err(Error::Capacity {
                what: "to_table",
                n: self.n,
                limit: MAX_TABLE_ITEMS,
            });
        }
        if self.is_table() {
            return Ok(self.clone());
        }
        let values = match &self.evaluator {
            Evaluator::Linear(g) => {
                self.queries.fetch_add(1u64 << self.n, Ordering::Relaxed);
                g.table()
            }
            _ => fill_table(self.n, |s| self.value(s)),
        };
        SetFunction::table(self.n, values)
    }

    /// Dense values, borrowing when already tabulated.
    pub(crate) fn dense(&self) -> Result<std::borrow::Cow<'_, [f64]>> {
        match &self.evaluator {
            Evaluator::Table(t) => Ok(std::borrow::Cow::Borrowed(t.as_slice())),
            _ => {
                let t = self.to_table()?;
                Ok(std::borrow::Cow::Owned(t.as_table().unwrap().to_vec()))
            }
        }
    }

    /// Pointwise `self - g`, tabulated.
    pub fn minus_linear(&self, g: &LinearFunction) -> Result<SetFunction> {
        if g.n() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                found: g.n(),
            });
        }
        let f = self.dense()?;
        let gt = g.table();
        SetFunction::table(self.n, f.iter().zip(&gt).map(|(a, b)| a - b).collect())
    }

    /// Maximum absolute value (exact scan, `n <= 24`).
    pub fn max_abs(&self) -> Result<f64> {
        Ok(self.dense()?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

fn fill_table(n: usize, f: impl Fn(ItemSet) -> f64 + Sync) -> Vec<f64> {
    let size = 1usize << n;
    let chunks = size.min(256);
    let per = size / chunks;
    sampling::map_chunks(chunks, |c| {
        (c * per..(c + 1) * per)
            .map(|m| f(ItemSet::from_raw(m as u64, n)))
            .collect::<Vec<_>>()
    })
    .concat()
}

/// A value oracle over universes of any width.
pub trait Oracle: Sync {
    fn n(&self) -> usize;
    fn value(&self, s: &LargeSet) -> f64;
}

impl Oracle for SetFunction {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, s: &LargeSet) -> f64 {
        let s = s.to_item_set().expect("SetFunction universes fit one word");
        SetFunction::value(self, s)
    }
}

impl Oracle for LinearFunction {
    fn n(&self) -> usize {
        LinearFunction::n(self)
    }
    fn value(&self, s: &LargeSet) -> f64 {
        self.eval_large(s)
    }
}

/// Result of a maximum-distance computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    pub witness: ItemSet,
    /// `true` when every set was scanned; otherwise `value` is a lower bound.
    pub exact: bool,
}

/// `max_S |f(S) - g(S)|`, over all sets or over a seeded uniform sample.
pub fn max_distance(f: &SetFunction, g: &SetFunction, mode: Mode) -> Result<Distance> {
    if f.n() != g.n() {
        return Err(Error::WidthMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    let n = f.n();
    let best = |a: (f64, u64), b: (f64, u64)| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
    let (value, mask) = match mode {
        Mode::Exact => {
            if n > MAX_TABLE_ITEMS {
                return Err(Error::Capacity {
                    what: "exact max_distance",
                    n,
                    limit: MAX_TABLE_ITEMS,
                });
            }
            let (ft, gt) = (f.dense()?, g.dense()?);
            ft.iter()
                .zip(gt.iter())
                .enumerate()
                .map(|(m, (a, b))| ((a - b).abs(), m as u64))
                .fold((f64::NEG_INFINITY, 0), best)
        }
        Mode::Sampled { count, seed } => {
            let sizes = sampling::chunk_sizes(count);
            sampling::map_chunks(sizes.len(), |w| {
                let mut rng = sampling::stream_rng(seed, w as u64);
                (0..sizes[w])
                    .map(|_| {
                        let s = sampling::random_mask(&mut rng, n);
                        ((f.value(s) - g.value(s)).abs(), s.mask())
                    })
                    .fold((f64::NEG_INFINITY, 0), best)
            })
            .into_iter()
            .fold((f64::NEG_INFINITY, 0), best)
        }
    };
    Ok(Distance {
        value: value.max(0.0),
        witness: ItemSet::from_raw(mask & low_mask(n), n),
        exact: mode.is_exact(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_evaluation() {
        let f = SetFunction::linear(LinearFunction::new(1.0, vec![1.0, 2.0])).unwrap();
        assert_eq!(f.evaluate(ItemSet::full(2)).unwrap(), 4.0);
        assert_eq!(f.query_count(), 1);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let f = SetFunction::linear(LinearFunction::zero(3)).unwrap();
        assert!(matches!(f.evaluate(ItemSet::full(4)), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn to_table_of_linear() {
        let f = SetFunction::linear(LinearFunction::new(0.0, vec![1.0, 2.0])).unwrap();
        assert_eq!(f.to_table().unwrap().as_table().unwrap(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn table_lookups_are_not_billed() {
        let f = SetFunction::table(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        for m in 0..4 {
            f.value_mask(m);
        }
        assert_eq!(f.query_count(), 0);
    }

    #[test]
    fn table_capacity() {
        assert!(matches!(
            SetFunction::table(25, vec![]),
            Err(Error::Capacity { .. })
        ));
        let wide = SetFunction::linear(LinearFunction::zero(30)).unwrap();
        assert!(matches!(wide.to_table(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn distance_to_self_is_zero() {
        let f = SetFunction::symmetric(vec![0.0, -1.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(max_distance(&f, &f, Mode::Exact).unwrap().value, 0.0);
        assert_eq!(max_distance(&f, &f, Mode::sampled(100, 3)).unwrap().value, 0.0);
    }

    #[test]
    fn to_table_agrees_with_direct_evaluation() {
        let g = LinearFunction::new(0.25, (0..12).map(|i| (i as f64 * 0.37).sin()).collect());
        let f = SetFunction::linear(g.clone()).unwrap();
        let t = f.to_table().unwrap();
        let mut rng = sampling::rng(11);
        for _ in 0..1000 {
            let s = sampling::random_mask(&mut rng, 12);
            assert_eq!(t.value(s), g.eval(s));
        }
    }

    #[test]
    fn sampled_distance_is_a_lower_bound() {
        let f = SetFunction::symmetric(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        let zero = SetFunction::linear(LinearFunction::zero(6)).unwrap();
        let exact = max_distance(&f, &zero, Mode::Exact).unwrap();
        assert_eq!(exact.value, 1.0);
        assert_eq!(exact.witness, ItemSet::full(6));
        let sampled = max_distance(&f, &zero, Mode::sampled(10, 1)).unwrap();
        assert!(sampled.value <= exact.value && !sampled.exact);
    }
}
