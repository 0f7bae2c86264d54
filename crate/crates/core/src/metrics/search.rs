//! Worst-ratio search over small universes.
//!
//! Δ is convex in `f` (it is the support function of the set of balanced
//! signed distributions), so over the polytope `{f : ε_strong(f) <= 1}` it is
//! maximized at a vertex. Functions are normalized to vanish on `∅` and on the
//! singletons, which changes neither Δ nor ε and makes the polytope bounded.
//! Vertices come from maximizing linear objectives: mostly random directions,
//! and otherwise the incumbent's dual certificate plus noise, which can only
//! move uphill since `Δ(f') >= w·f' >= w·f = Δ(f)` for the certificate `w`.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SetFunction;
use crate::lp::{Problem, Relation, Sense, Simplex};
use crate::metrics::fit::{closest_linear, FitMode};
use crate::metrics::modularity::{modularity_eps, Variant};
use crate::sampling::{self, Mode};

pub const MAX_SEARCH_ITEMS: usize = 5;

const REBUILD_EVERY: usize = 500;
const INCUMBENT_SHARE: f64 = 0.2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    /// Best function found, as a table scaled to `ε_strong = 1`.
    pub table: Vec<f64>,
    pub delta: f64,
    pub eps: f64,
    /// Certified `delta / eps` of `table`, re-verified exactly.
    pub ratio: f64,
    pub vertices: usize,
    pub improvements: usize,
}

struct Scored {
    table: Vec<f64>,
    delta: f64,
    eps: f64,
    ratio: f64,
    /// Certificate restricted to the free coordinates.
    direction: Vec<f64>,
}

fn score(n: usize, table: Vec<f64>, free: &[usize]) -> Result<Scored> {
    let f = SetFunction::table(n, table)?;
    let eps = modularity_eps(&f, Variant::Strong, Mode::Exact)?.value;
    let fit = closest_linear(&f, FitMode::Exact)?;
    let mut dense = vec![0.0; 1 << n];
    for (s, w) in fit.active_sets.iter().zip(&fit.weights) {
        dense[s.mask() as usize] += w;
    }
    let ratio = if eps > 1e-12 { fit.delta / eps } else { 0.0 };
    Ok(Scored {
        table: f.as_table().unwrap().to_vec(),
        delta: fit.delta,
        eps,
        ratio,
        direction: free.iter().map(|&m| dense[m]).collect(),
    })
}

/// Subtracts the linear function agreeing with `f` on `∅` and singletons.
fn normalize(table: &[f64], n: usize) -> Vec<f64> {
    let f0 = table[0];
    let c: Vec<f64> = (0..n).map(|i| table[1 << i] - f0).collect();
    (0..table.len())
        .map(|m| {
            let g = (0..n).filter(|&i| m >> i & 1 == 1).fold(f0, |a, i| a + c[i]);
            table[m] - g
        })
        .collect()
}

fn polytope(n: usize, free: &[usize]) -> Problem {
    let size = 1usize << n;
    let mut index = vec![usize::MAX; size];
    for (k, &m) in free.iter().enumerate() {
        index[m] = k;
    }
    let mut seen = HashSet::new();
    let mut p = Problem::new(free.len());
    for k in 0..free.len() {
        p.set_free(k);
    }
    for s in 0..size {
        for t in s + 1..size {
            if s & !t == 0 || t & !s == 0 {
                continue;
            }
            let mut row = vec![0i8; free.len()];
            for (m, sign) in [(s, 1), (t, 1), (s | t, -1), (s & t, -1)] {
                if index[m] != usize::MAX {
                    row[index[m]] += sign;
                }
            }
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            let neg: Vec<i8> = row.iter().map(|x| -x).collect();
            if seen.contains(&row) || seen.contains(&neg) {
                continue;
            }
            seen.insert(row.clone());
            let coeffs: Vec<f64> = row.iter().map(|&x| f64::from(x)).collect();
            p.add_row(coeffs.clone(), Relation::Le, 1.0);
            p.add_row(coeffs.iter().map(|x| -x).collect(), Relation::Le, 1.0);
        }
    }
    p
}

/// Searches for a function with large `Δ / ε_strong` on `n <= 5` items.
///
/// `budget` counts vertex LPs. A warm start, if given, is normalized, scaled
/// to `ε = 1` and scored first.
pub fn kalton_search(
    n: usize,
    budget: usize,
    seed: u64,
    warm_start: Option<&SetFunction>,
) -> Result<SearchResult> {
    if n > MAX_SEARCH_ITEMS {
        return Err(Error::Capacity {
            what: "kalton_search",
            n,
            limit: MAX_SEARCH_ITEMS,
        });
    }
    let size = 1usize << n;
    let free: Vec<usize> = (0..size).filter(|m| m.count_ones() >= 2).collect();
    let zero = score(n, vec![0.0; size], &free)?;
    let mut best = zero;
    let mut vertices = 0;
    let mut improvements = 0;
    if let Some(f) = warm_start {
        if f.n() != n {
            return Err(Error::WidthMismatch {
                expected: n,
                found: f.n(),
            });
        }
        let t = normalize(&f.dense()?, n);
        let eps = modularity_eps(&SetFunction::table(n, t.clone())?, Variant::Strong, Mode::Exact)?.value;
        if eps > 1e-12 {
            let s = score(n, t.iter().map(|v| v / eps).collect(), &free)?;
            if s.ratio > best.ratio {
                best = s;
                improvements += 1;
            }
        }
    }
    if free.is_empty() {
        return Ok(finish(n, best, vertices, improvements));
    }
    let problem = polytope(n, &free);
    let mut rng = sampling::rng(seed);
    let mut simplex = None;
    while vertices < budget {
        if vertices % REBUILD_EVERY == 0 || simplex.is_none() {
            simplex = Simplex::new(&problem)?;
        }
        let lp = simplex.as_mut().expect("the origin is feasible");
        let objective: Vec<f64> = if best.ratio > 0.0 && rng.gen_bool(INCUMBENT_SHARE) {
            let scale = best.direction.iter().fold(0.0f64, |a, w| a.max(w.abs())).max(1e-12);
            best.direction
                .iter()
                .map(|w| w / scale + 0.05 * rng.gen_range(-1.0..1.0))
                .collect()
        } else {
            (0..free.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        vertices += 1;
        let Some(sol) = lp.optimize(Sense::Maximize, &objective)?.optimal() else {
            continue;
        };
        let mut table = vec![0.0; size];
        for (k, &m) in free.iter().enumerate() {
            table[m] = sol.x[k];
        }
        let s = score(n, table, &free)?;
        if s.ratio > best.ratio + 1e-12 {
            best = s;
            improvements += 1;
        }
    }
    Ok(finish(n, best, vertices, improvements))
}

fn finish(n: usize, best: Scored, vertices: usize, improvements: usize) -> SearchResult {
    SearchResult {
        n,
        table: best.table,
        delta: best.delta,
        eps: best.eps,
        ratio: best.ratio,
        vertices,
        improvements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_item_functions_are_linear() {
        let r = kalton_search(1, 10, 0, None).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn two_items_reach_a_quarter() {
        let r = kalton_search(2, 50, 1, None).unwrap();
        assert!((r.ratio - 0.25).abs() < 1e-9, "{}", r.ratio);
    }

    #[test]
    fn normalization_preserves_delta() {
        let t: Vec<f64> = (0..8).map(|m| ((m * 37) % 5) as f64).collect();
        let a = closest_linear(&SetFunction::table(3, t.clone()).unwrap(), FitMode::Exact).unwrap();
        let b = closest_linear(&SetFunction::table(3, normalize(&t, 3)).unwrap(), FitMode::Exact).unwrap();
        assert!((a.delta - b.delta).abs() < 1e-9);
    }
}
