//! Splitting source sets across expander edges and reassembling them at the
//! right vertices.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::expander::graph::BipartiteGraph;
use crate::function::SetFunction;
use crate::metrics::modularity::{modularity_eps, Variant};
use crate::sampling::{self, Mode};
use crate::set::{Collection, ItemSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub sum_sources: f64,
    pub sum_labels: f64,
    pub sum_targets: f64,
    pub f_empty: f64,
    pub eps: f64,
    /// `Σ f(S_v) + (2kr - 2k)(f(∅) - ε)`.
    pub lower: f64,
    /// `Σ f(T_w) + (2kr - 2θk)(f(∅) + ε)`.
    pub upper: f64,
}

impl Accounting {
    pub fn holds(&self) -> bool {
        let tol = 1e-9 * (1.0 + self.sum_labels.abs());
        self.lower <= self.sum_labels + tol && self.sum_labels <= self.upper + tol
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Recombination {
    /// Label of each edge, in edge order.
    pub labels: Vec<ItemSet>,
    pub targets: Collection,
    pub accounting: Accounting,
}

fn try_augment(
    v: usize,
    adj: &[Vec<(usize, usize)>],
    owner: &mut [Option<(usize, usize)>],
    seen: &mut [bool],
) -> bool {
    for &(w, e) in &adj[v] {
        if seen[w] {
            continue;
        }
        seen[w] = true;
        if owner[w].is_none_or(|(u, _)| try_augment(u, adj, owner, seen)) {
            owner[w] = Some((v, e));
            return true;
        }
    }
    false
}

/// Matches, for every item, the sources containing it to distinct right
/// vertices and labels the matched edges with the item.
///
/// `eps` defaults to the exact weak modularity of `f`.
pub fn recombine(
    g: &BipartiteGraph,
    sources: &Collection,
    f: &SetFunction,
    eps: Option<f64>,
) -> Result<Recombination> {
    if sources.len() != g.left {
        return Err(domain(format!(
            "recombine needs one source per left vertex ({}), got {}",
            g.left,
            sources.len()
        )));
    }
    let n = sources.n();
    if f.n() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: f.n(),
        });
    }
    let mut adj = vec![Vec::new(); g.left];
    for (e, &(v, w)) in g.edges.iter().enumerate() {
        adj[v].push((w, e));
    }
    for a in &mut adj {
        a.sort();
    }
    let mut labels = vec![0u64; g.edges.len()];
    for item in 0..n {
        let holders: Vec<usize> = (0..g.left).filter(|&v| sources.sets()[v].contains(item)).collect();
        let mut owner = vec![None; g.right];
        for &v in &holders {
            let mut seen = vec![false; g.right];
            if !try_augment(v, &adj, &mut owner, &mut seen) {
                return Err(Error::ExpansionViolation {
                    item,
                    sources: holders.len(),
                });
            }
        }
        for (_, e) in owner.into_iter().flatten() {
            labels[e] |= 1 << item;
        }
    }
    let labels: Vec<ItemSet> = labels.into_iter().map(|m| ItemSet::new(m, n)).collect::<Result<_>>()?;
    let mut targets = vec![0u64; g.right];
    for (e, &(_, w)) in g.edges.iter().enumerate() {
        targets[w] |= labels[e].mask();
    }
    let targets = Collection::new(n, targets.into_iter().map(|m| ItemSet::new(m, n)).collect::<Result<_>>()?)?;
    let eps = match eps {
        Some(e) => e,
        None => modularity_eps(f, Variant::Weak, Mode::Exact)?.value,
    };
    let f_empty = f.value(ItemSet::empty(n));
    let sum_sources: f64 = sources.sets().iter().map(|&s| f.value(s)).sum();
    let sum_labels: f64 = labels.iter().map(|&s| f.value(s)).sum();
    let sum_targets: f64 = targets.sets().iter().map(|&s| f.value(s)).sum();
    let edges = g.edges.len() as f64;
    Ok(Recombination {
        labels,
        targets,
        accounting: Accounting {
            sum_sources,
            sum_labels,
            sum_targets,
            f_empty,
            eps,
            lower: sum_sources + (edges - g.left as f64) * (f_empty - eps),
            upper: sum_targets + (edges - g.right as f64) * (f_empty + eps),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecombineChecks {
    /// Labels on the edges of each left vertex partition its source.
    pub partition: bool,
    /// Labels entering each right vertex are pairwise disjoint.
    pub disjoint: bool,
    /// Every item lies in as many targets as sources.
    pub frequency: bool,
    pub accounting: bool,
}

impl RecombineChecks {
    pub fn all(&self) -> bool {
        self.partition && self.disjoint && self.frequency && self.accounting
    }
}

pub fn check_recombination(g: &BipartiteGraph, sources: &Collection, rec: &Recombination) -> RecombineChecks {
    let mut union = vec![0u64; g.left];
    let mut total = vec![0u32; g.left];
    let mut seen = vec![0u64; g.right];
    let mut disjoint = true;
    for (e, &(v, w)) in g.edges.iter().enumerate() {
        let m = rec.labels[e].mask();
        union[v] |= m;
        total[v] += m.count_ones();
        disjoint &= seen[w] & m == 0;
        seen[w] |= m;
    }
    let partition = sources
        .sets()
        .iter()
        .enumerate()
        .all(|(v, s)| union[v] == s.mask() && total[v] as usize == s.len());
    RecombineChecks {
        partition,
        disjoint,
        frequency: sources.item_counts() == rec.targets.item_counts(),
        accounting: rec.accounting.holds(),
    }
}

/// `sets` sources over `n` items where every item lies in exactly `per_item`
/// seeded random sources.
pub fn frequent_collection(n: usize, sets: usize, per_item: usize, seed: u64) -> Result<Collection> {
    if per_item > sets || n > 64 {
        return Err(domain("frequent_collection needs per_item <= sets and n <= 64"));
    }
    let mut rng = sampling::rng(seed);
    let mut masks = vec![0u64; sets];
    for item in 0..n {
        for v in index::sample(&mut rng, sets, per_item) {
            masks[v] |= 1 << item;
        }
    }
    Collection::new(n, masks.into_iter().map(|m| ItemSet::new(m, n)).collect::<Result<_>>()?)
}
