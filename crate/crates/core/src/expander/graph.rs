//! Biregular bipartite graphs and exhaustive expansion checks.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sampling;

/// Left vertices `0..2k`, right vertices `0..2θk`, edges as a multiset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
    pub r: f64,
    pub theta: f64,
}

fn integral(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if (x - r).abs() > 1e-9 || r < 0.0 {
        return Err(domain(format!("{what} = {x} must be a non-negative integer")));
    }
    Ok(r as usize)
}

/// `r` copies of each left vertex, shuffled, dealt round-robin to the right.
pub fn sample_biregular(k: usize, r: usize, theta: f64, seed: u64) -> Result<BipartiteGraph> {
    if k == 0 || r == 0 || !(theta > 0.0 && theta <= 1.0) {
        return Err(domain("sample_biregular needs k, r >= 1 and 0 < θ <= 1"));
    }
    let left = 2 * k;
    let right = integral(2.0 * theta * k as f64, "2θk")?;
    integral(r as f64 / theta, "r/θ")?;
    if right == 0 {
        return Err(domain("2θk must be positive"));
    }
    let mut copies: Vec<usize> = (0..left).flat_map(|v| std::iter::repeat_n(v, r)).collect();
    copies.shuffle(&mut sampling::rng(seed));
    let edges = copies.into_iter().enumerate().map(|(p, v)| (v, p % right)).collect();
    Ok(BipartiteGraph {
        left,
        right,
        edges,
        r: r as f64,
        theta,
    })
}

impl BipartiteGraph {
    /// Complete bipartite graph with one edge per pair.
    pub fn complete(left: usize, right: usize) -> Self {
        let edges = (0..left).flat_map(|v| (0..right).map(move |w| (v, w))).collect();
        Self {
            left,
            right,
            edges,
            r: right as f64,
            theta: right as f64 / left as f64,
        }
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.left];
        for &(v, _) in &self.edges {
            d[v] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.right];
        for &(_, w) in &self.edges {
            d[w] += 1;
        }
        d
    }

    /// Right neighbourhood of each left vertex as a bitmask.
    fn neighbour_masks(&self) -> Vec<u128> {
        let mut m = vec![0u128; self.left];
        for &(v, w) in &self.edges {
            m[v] |= 1 << w;
        }
        m
    }
}

/// Largest number of subsets [`verify_expansion`] will scan.
pub const MAX_SUBSETS: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub ok: bool,
    pub alpha: f64,
    pub max_size: usize,
    pub subsets_checked: u64,
    /// Subset minimizing `|N(S)| - |S|`, with its neighbour count.
    pub worst: Vec<usize>,
    pub worst_neighbours: usize,
}

fn binomial(n: usize, k: usize) -> u64 {
    crate::constructions::km::binomial(n, k)
}

/// Checks `|N(S)| >= |S|` for every left subset with `|S| <= 2kα`.
pub fn verify_expansion(g: &BipartiteGraph, alpha: f64) -> Result<ExpansionReport> {
    if g.left > 64 || g.right > 128 {
        return Err(Error::Capacity {
            what: "verify_expansion (left side)",
            n: g.left,
            limit: 64,
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("α must lie in [0, 1], got {alpha}")));
    }
    let max_size = ((g.left as f64) * alpha + 1e-9).floor() as usize;
    let total: u64 = (1..=max_size).map(|s| binomial(g.left, s)).sum();
    if total > MAX_SUBSETS {
        return Err(Error::Capacity {
            what: "verify_expansion (subsets)",
            n: total as usize,
            limit: MAX_SUBSETS as usize,
        });
    }
    let nb = g.neighbour_masks();
    let mut report = ExpansionReport {
        ok: true,
        alpha,
        max_size,
        subsets_checked: 0,
        worst: vec![],
        worst_neighbours: 0,
    };
    let mut worst_surplus = i64::MAX;
    for size in 1..=max_size {
        let mut s: u64 = (1u64 << size) - 1;
        let limit = if g.left == 64 { u64::MAX } else { 1u64 << g.left };
        while s < limit {
            report.subsets_checked += 1;
            let mut m = s;
            let mut union = 0u128;
            while m != 0 {
                union |= nb[m.trailing_zeros() as usize];
                m &= m - 1;
            }
            let count = union.count_ones() as usize;
            let surplus = count as i64 - size as i64;
            if surplus < worst_surplus {
                worst_surplus = surplus;
                report.worst = (0..g.left).filter(|&v| s >> v & 1 == 1).collect();
                report.worst_neighbours = count;
            }
            // Gosper's hack: next subset with the same popcount.
            let c = s & s.wrapping_neg();
            let r = s.wrapping_add(c);
            if r == 0 {
                break;
            }
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    report.ok = worst_surplus >= 0;
    Ok(report)
}
