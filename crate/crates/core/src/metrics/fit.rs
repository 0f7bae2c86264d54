//! Chebyshev (minimax) linear fitting.
//!
//! The minimax problem `min_{c,t} t` subject to `|target_k - c0 - sum_{i in S_k} c_i| <= t`
//! is solved through its dual: maximize `sum_k target_k (p_k - q_k)` over
//! `p, q >= 0` with `sum (p + q) = 1` and zero net weight on the constant and
//! on every item. The dual has `n + 2` rows however many sets are involved,
//! and its shadow prices are the fitted coefficients and `t`. The optimal
//! `p - q` is the certificate: a signed distribution over sets with equal
//! item marginals on both sides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{LinearFunction, SetFunction, MAX_TABLE_ITEMS};
use crate::lp::{self, Problem, Relation, Sense};
use crate::sampling;
use crate::set::{low_mask, ItemSet, Members};

/// Tolerance for declaring a residual equal to the fitted delta.
pub const ACTIVE_TOL: f64 = 1e-7;

const MAX_ROUNDS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub g: LinearFunction,
    /// Maximum deviation of `g` from `f` over the scanned sets.
    pub delta: f64,
    /// Sets carrying the optimal dual weights; `|f - g| == delta` on each.
    pub active_sets: Vec<ItemSet>,
    /// Signed dual weight of each active set (positive where `f > g`).
    pub weights: Vec<f64>,
    /// `true` when `delta` was checked against every set.
    pub exact: bool,
    pub rounds: usize,
}

/// Constraint-family selection for [`closest_linear`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Exact,
    SampledConstraints { count: usize, seed: u64 },
}

pub(crate) struct Minimax {
    pub g: LinearFunction,
    pub t: f64,
    /// `p_k - q_k` per input row.
    pub weights: Vec<f64>,
}

/// Solves the minimax fit over explicit incidence lists.
pub(crate) fn minimax(n: usize, rows: &[(Vec<usize>, f64)]) -> Result<Minimax> {
    let k = rows.len();
    if k == 0 {
        return Err(crate::error::domain("minimax fit needs at least one row"));
    }
    let mut p = Problem::new(2 * k);
    let mut constant = vec![0.0; 2 * k];
    let mut items = vec![vec![0.0; 2 * k]; n];
    for (r, (members, _)) in rows.iter().enumerate() {
        constant[2 * r] = 1.0;
        constant[2 * r + 1] = -1.0;
        for &i in members {
            items[i][2 * r] = 1.0;
            items[i][2 * r + 1] = -1.0;
        }
    }
    p.add_row(constant, Relation::Eq, 0.0);
    for row in items {
        p.add_row(row, Relation::Eq, 0.0);
    }
    p.add_row(vec![1.0; 2 * k], Relation::Eq, 1.0);
    let objective: Vec<f64> = rows.iter().flat_map(|(_, v)| [*v, -*v]).collect();
    let sol = lp::solve(&p, Sense::Maximize, &objective)?
        .optimal()
        .ok_or_else(|| crate::error::domain("minimax dual is always feasible and bounded"))?;
    let g = LinearFunction::new(sol.duals[0], sol.duals[1..=n].to_vec());
    let weights = (0..k).map(|r| sol.x[2 * r] - sol.x[2 * r + 1]).collect();
    Ok(Minimax {
        g,
        t: sol.duals[n + 1],
        weights,
    })
}

/// Evaluates a linear function over masks with two half-width lookup tables.
pub(crate) struct SplitLinear {
    c0: f64,
    low: Vec<f64>,
    high: Vec<f64>,
    bits: usize,
}

impl SplitLinear {
    pub(crate) fn new(g: &LinearFunction) -> Self {
        let n = g.n();
        let bits = n.min(12);
        let half = |coeffs: &[f64]| LinearFunction::new(0.0, coeffs.to_vec()).table();
        Self {
            c0: g.c0,
            low: half(&g.coeffs[..bits]),
            high: half(&g.coeffs[bits..]),
            bits,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, mask: u64) -> f64 {
        let lo = (mask & low_mask(self.bits)) as usize;
        let hi = (mask >> self.bits) as usize;
        self.c0 + self.low[lo] + self.high[hi]
    }
}

/// Largest `|f - g|` over a dense table, ties to the smallest mask.
pub(crate) fn worst_residual(table: &[f64], g: &LinearFunction) -> (f64, u64) {
    let split = SplitLinear::new(g);
    let size = table.len();
    let chunks = size.min(sampling::SAMPLE_CHUNKS);
    let per = size / chunks;
    sampling::map_chunks(chunks, |c| {
        let mut best = (f64::NEG_INFINITY, 0u64);
        for m in c * per..(c + 1) * per {
            let r = (table[m] - split.eval(m as u64)).abs();
            if r > best.0 {
                best = (r, m as u64);
            }
        }
        best
    })
    .into_iter()
    .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
}

fn seed_masks(n: usize) -> Vec<u64> {
    let mut seeds = vec![0, low_mask(n)];
    seeds.extend((0..n).map(|i| 1u64 << i));
    seeds.sort_unstable();
    seeds.dedup();
    seeds
}

fn generate(
    n: usize,
    value: impl Fn(u64) -> f64,
    scan: impl Fn(&LinearFunction) -> (f64, u64),
    mut working: Vec<u64>,
    exact: bool,
) -> Result<LinearFit> {
    let scale = working.iter().fold(1.0f64, |a, &m| a.max(value(m).abs()));
    let mut best: Option<LinearFit> = None;
    for round in 1..=MAX_ROUNDS {
        let rows: Vec<(Vec<usize>, f64)> = working
            .iter()
            .map(|&m| (ItemSet::from_raw(m, n).items().collect(), value(m)))
            .collect();
        let sol = minimax(n, &rows)?;
        let (worst, mask) = scan(&sol.g);
        let mut active: Vec<(ItemSet, f64)> = working
            .iter()
            .zip(&sol.weights)
            .filter(|(_, w)| w.abs() > 1e-12)
            .map(|(&m, &w)| (ItemSet::from_raw(m, n), w))
            .collect();
        active.sort_by_key(|(s, _)| s.mask());
        let fit = LinearFit {
            g: sol.g,
            delta: worst.max(sol.t),
            active_sets: active.iter().map(|a| a.0).collect(),
            weights: active.iter().map(|a| a.1).collect(),
            exact,
            rounds: round,
        };
        if worst <= sol.t + 1e-9 * scale || working.contains(&mask) {
            return Ok(fit);
        }
        working.push(mask);
        best = Some(fit);
    }
    Err(Error::NonConvergence {
        iterations: MAX_ROUNDS,
        best: Box::new(best.expect("at least one round")),
    })
}

/// Closest linear function in the max norm, by constraint generation.
pub fn closest_linear(f: &SetFunction, mode: FitMode) -> Result<LinearFit> {
    let n = f.n();
    match mode {
        FitMode::Exact => {
            if n > MAX_TABLE_ITEMS {
                return Err(Error::Capacity {
                    what: "exact closest_linear",
                    n,
                    limit: MAX_TABLE_ITEMS,
                });
            }
            let table = f.dense()?;
            generate(
                n,
                |m| table[m as usize],
                |g| worst_residual(&table, g),
                seed_masks(n),
                true,
            )
        }
        FitMode::SampledConstraints { count, seed } => {
            let mut pool = seed_masks(n);
            let mut rng = sampling::rng(seed);
            pool.extend((0..count).map(|_| sampling::random_mask(&mut rng, n).mask()));
            pool.sort_unstable();
            pool.dedup();
            let values: std::collections::HashMap<u64, f64> =
                pool.iter().map(|&m| (m, f.value_mask(m))).collect();
            let scan = |g: &LinearFunction| {
                pool.iter()
                    .map(|&m| ((values[&m] - g.eval(ItemSet::from_raw(m, n))).abs(), m))
                    .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
            };
            generate(n, |m| values[&m], scan, seed_masks(n), false)
        }
    }
}

/// Result of a band-constrained fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandFit {
    Feasible(LinearFit),
    /// No linear function is within the band; `min_delta` is the best achievable.
    Infeasible { min_delta: f64 },
}

impl BandFit {
    pub fn feasible(self) -> Option<LinearFit> {
        match self {
            BandFit::Feasible(fit) => Some(fit),
            BandFit::Infeasible { .. } => None,
        }
    }
}

/// Minimax fit over the given rows only; with a band, reports whether some
/// linear function is within `band` of every row (the minimax fit is returned
/// as the witness).
pub fn chebyshev_fit<S: Members>(rows: &[(S, f64)], band: Option<f64>) -> Result<BandFit> {
    let Some(first) = rows.first() else {
        return Err(crate::error::domain("chebyshev_fit needs at least one row"));
    };
    let n = first.0.universe();
    if let Some(bad) = rows.iter().find(|(s, _)| s.universe() != n) {
        return Err(Error::WidthMismatch {
            expected: n,
            found: bad.0.universe(),
        });
    }
    let incidence: Vec<(Vec<usize>, f64)> = rows.iter().map(|(s, v)| (s.members(), *v)).collect();
    let sol = minimax(n, &incidence)?;
    let worst = incidence
        .iter()
        .map(|(m, v)| (v - m.iter().fold(sol.g.c0, |a, &i| a + sol.g.coeffs[i])).abs())
        .fold(0.0f64, f64::max);
    let delta = worst.max(sol.t);
    if let Some(b) = band {
        if delta > b + 1e-9 * (1.0 + b.abs()) {
            return Ok(BandFit::Infeasible { min_delta: delta });
        }
    }
    let mut active = Vec::new();
    let mut weights = Vec::new();
    if n <= crate::set::MAX_ITEMS {
        for ((s, _), w) in incidence.iter().zip(&sol.weights) {
            if w.abs() > 1e-12 {
                active.push(ItemSet::from_items(n, s.iter().copied())?);
                weights.push(*w);
            }
        }
    }
    Ok(BandFit::Feasible(LinearFit {
        g: sol.g,
        delta,
        active_sets: active,
        weights,
        exact: false,
        rounds: 1,
    }))
}

/// `f - l` where `l` is a closest linear function of `f`.
pub fn normalize_zero_closest(f: &SetFunction) -> Result<SetFunction> {
    let fit = closest_linear(f, FitMode::Exact)?;
    f.minus_linear(&fit.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::max_distance;
    use crate::sampling::Mode;

    #[test]
    fn linear_function_is_its_own_fit() {
        let g = LinearFunction::new(0.5, vec![1.0, -2.0, 0.25, 3.0]);
        let f = SetFunction::linear(g.clone()).unwrap();
        let fit = closest_linear(&f, FitMode::Exact).unwrap();
        assert!(fit.delta < 1e-9);
        assert!(fit.g.max_coeff_diff(&g) < 1e-9);
    }

    #[test]
    fn symmetric_example_fit() {
        let mut v = vec![0.0; 11];
        v[10] = -1.0;
        let f = SetFunction::symmetric(v).unwrap();
        let fit = closest_linear(&f, FitMode::Exact).unwrap();
        assert!((fit.delta - 0.45).abs() < 1e-9);
        for c in &fit.g.coeffs {
            assert!((c + 0.1).abs() < 1e-9, "{c}");
        }
        let gf = SetFunction::linear(fit.g.clone()).unwrap();
        let d = max_distance(&f, &gf, Mode::Exact).unwrap();
        assert!((d.value - fit.delta).abs() < 1e-7);
    }

    #[test]
    fn certificate_balances_marginals() {
        let f = SetFunction::from_fn(5, |s| ((s.mask() * 2654435761) % 7) as f64 - 3.0).unwrap();
        let fit = closest_linear(&f, FitMode::Exact).unwrap();
        let total: f64 = fit.weights.iter().map(|w| w.abs()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(fit.weights.iter().sum::<f64>().abs() < 1e-9);
        for i in 0..5 {
            let m: f64 = fit
                .active_sets
                .iter()
                .zip(&fit.weights)
                .filter(|(s, _)| s.contains(i))
                .map(|(_, w)| w)
                .sum();
            assert!(m.abs() < 1e-9);
        }
        let value: f64 = fit
            .active_sets
            .iter()
            .zip(&fit.weights)
            .map(|(s, w)| w * f.value(*s))
            .sum();
        assert!((value - fit.delta).abs() < 1e-7);
    }

    #[test]
    fn conflicting_rows_are_infeasible_in_a_narrow_band() {
        let s = ItemSet::from_items(2, [0]).unwrap();
        let rows = [(s, 0.0), (s, 1.0)];
        assert!(matches!(
            chebyshev_fit(&rows, Some(0.4)).unwrap(),
            BandFit::Infeasible { min_delta } if (min_delta - 0.5).abs() < 1e-9
        ));
        assert!(chebyshev_fit(&rows, Some(0.5)).unwrap().feasible().is_some());
    }

    #[test]
    fn sampled_constraints_bound_exact_delta() {
        let f = SetFunction::from_fn(10, |s| (s.len() as f64 - 5.0).abs().sqrt()).unwrap();
        let exact = closest_linear(&f, FitMode::Exact).unwrap();
        let sampled =
            closest_linear(&f, FitMode::SampledConstraints { count: 200, seed: 4 }).unwrap();
        assert!(sampled.delta <= exact.delta + 1e-9);
        assert!(!sampled.exact);
    }
}
