//! Nonadaptive learning of near-linear functions from `O(n)` queries.
//!
//! Row `v_i` of a Hadamard basis splits the universe into its `+1` set `S_i`
//! and `-1` set `S̄_i`. For a linear `g`, `g(S_i) - g(S̄_i) = <v_i, c>`, so
//! the coefficients are recovered from the `2n` differences by orthogonality.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::function::{LinearFunction, Oracle, SetFunction};
use crate::metrics::fit::{chebyshev_fit, BandFit};
use crate::sampling;
use crate::set::{ItemSet, LargeSet, MAX_ITEMS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HadamardBasis {
    pub n: usize,
    /// `rows[i][j]` is `+1` or `-1`.
    pub rows: Vec<Vec<i8>>,
    pub first_vector: Vec<i8>,
}

/// Sylvester construction; columns where `first_vector` is `-1` are negated.
pub fn hadamard_basis(n: usize, first_vector: Option<&[i8]>) -> Result<HadamardBasis> {
    if !n.is_power_of_two() {
        return Err(domain(format!("Hadamard basis needs a power of two, got {n}")));
    }
    let mut rows = vec![vec![1i8]];
    while rows.len() < n {
        let top: Vec<Vec<i8>> = rows.iter().map(|r| [r.as_slice(), r.as_slice()].concat()).collect();
        let bottom: Vec<Vec<i8>> = rows
            .iter()
            .map(|r| r.iter().copied().chain(r.iter().map(|x| -x)).collect())
            .collect();
        rows = top.into_iter().chain(bottom).collect();
    }
    let first = match first_vector {
        None => vec![1i8; n],
        Some(v) => {
            if v.len() != n || v.iter().any(|&x| x != 1 && x != -1) {
                return Err(domain("first_vector must hold n entries of ±1"));
            }
            v.to_vec()
        }
    };
    for row in &mut rows {
        for (x, &s) in row.iter_mut().zip(&first) {
            *x *= s;
        }
    }
    Ok(HadamardBasis {
        n,
        rows,
        first_vector: first,
    })
}

impl HadamardBasis {
    pub fn plus_set(&self, i: usize) -> LargeSet {
        LargeSet::from_fn(self.n, |j| self.rows[i][j] == 1)
    }

    pub fn minus_set(&self, i: usize) -> LargeSet {
        LargeSet::from_fn(self.n, |j| self.rows[i][j] == -1)
    }

    fn scale(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}

/// Coordinates `λ_i = <v_S, v_i> / √n` of the indicator of `S`.
pub fn decompose(b: &HadamardBasis, s: &LargeSet) -> Vec<f64> {
    let items: Vec<usize> = s.items().collect();
    b.rows
        .iter()
        .map(|r| items.iter().map(|&j| f64::from(r[j])).sum::<f64>() / b.scale())
        .collect()
}

/// `Σ λ_i v_i / √n`.
pub fn recompose(b: &HadamardBasis, lambda: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; b.n];
    for (r, &l) in b.rows.iter().zip(lambda) {
        for (x, &e) in v.iter_mut().zip(r) {
            *x += l * f64::from(e) / b.scale();
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hadamard,
    Lp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnResult {
    pub h: LinearFunction,
    /// Distinct queried sets, in query order.
    pub queries: Vec<LargeSet>,
    pub query_count: usize,
    pub method: Method,
}

/// `∅`, then `S_i` and `S̄_i` for every row, without repeats.
pub fn query_plan(b: &HadamardBasis) -> Vec<LargeSet> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(2 * b.n + 1);
    let sets = std::iter::once(LargeSet::empty(b.n))
        .chain((0..b.n).flat_map(|i| [b.plus_set(i), b.minus_set(i)]));
    for s in sets {
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

fn ask(f: &dyn Oracle, plan: &[LargeSet]) -> HashMap<LargeSet, f64> {
    let chunk = plan.len().div_ceil(sampling::SAMPLE_CHUNKS).max(1);
    let parts = sampling::map_chunks(plan.len().div_ceil(chunk), |w| {
        plan[w * chunk..((w + 1) * chunk).min(plan.len())]
            .iter()
            .map(|s| f.value(s))
            .collect::<Vec<_>>()
    });
    plan.iter().cloned().zip(parts.into_iter().flatten()).collect()
}

fn check_width(f: &dyn Oracle, b: &HadamardBasis) -> Result<()> {
    if f.n() != b.n {
        return Err(Error::WidthMismatch {
            expected: b.n,
            found: f.n(),
        });
    }
    Ok(())
}

pub fn learn_hadamard_with(f: &dyn Oracle, b: &HadamardBasis) -> Result<LearnResult> {
    check_width(f, b)?;
    let plan = query_plan(b);
    let answers = ask(f, &plan);
    let diffs: Vec<f64> = (0..b.n)
        .map(|i| answers[&b.plus_set(i)] - answers[&b.minus_set(i)])
        .collect();
    let coeffs = (0..b.n)
        .map(|j| {
            let lambda = decompose(b, &LargeSet::from_items(b.n, [j]));
            lambda.iter().zip(&diffs).map(|(l, d)| l * d).sum::<f64>() / b.scale()
        })
        .collect();
    Ok(LearnResult {
        h: LinearFunction::new(answers[&LargeSet::empty(b.n)], coeffs),
        query_count: plan.len(),
        queries: plan,
        method: Method::Hadamard,
    })
}

pub fn learn_lp_with(f: &dyn Oracle, b: &HadamardBasis, delta: f64) -> Result<LearnResult> {
    check_width(f, b)?;
    let plan = query_plan(b);
    let answers = ask(f, &plan);
    let rows: Vec<(LargeSet, f64)> = plan.iter().map(|s| (s.clone(), answers[s])).collect();
    match chebyshev_fit(&rows, Some(delta))? {
        BandFit::Feasible(fit) => Ok(LearnResult {
            h: fit.g,
            query_count: plan.len(),
            queries: plan,
            method: Method::Lp,
        }),
        BandFit::Infeasible { min_delta } => Err(Error::Infeasible {
            band: delta,
            min_delta,
        }),
    }
}

/// Algorithm on a power-of-two universe with the all-ones first row.
pub fn learn_hadamard(f: &dyn Oracle) -> Result<LearnResult> {
    learn_hadamard_with(f, &hadamard_basis(f.n(), None)?)
}

pub fn learn_lp(f: &dyn Oracle, delta: f64) -> Result<LearnResult> {
    learn_lp_with(f, &hadamard_basis(f.n(), None)?, delta)
}

/// `f'(S) = f(S ∩ U)` on the next power of two.
pub struct Padded<'a> {
    inner: &'a dyn Oracle,
    n: usize,
}

impl Oracle for Padded<'_> {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, s: &LargeSet) -> f64 {
        self.inner.value(&s.truncate(self.inner.n()))
    }
}

pub fn pad_oracle(f: &dyn Oracle) -> Padded<'_> {
    Padded {
        inner: f,
        n: f.n().next_power_of_two(),
    }
}

/// Tabulation-free padding of a [`SetFunction`].
pub fn extend_power_of_two(f: &SetFunction) -> Result<SetFunction> {
    let n = f.n();
    let wide = n.next_power_of_two();
    if wide == n {
        return Ok(f.clone());
    }
    if wide > MAX_ITEMS {
        return Err(Error::Capacity {
            what: "extend_power_of_two",
            n: wide,
            limit: MAX_ITEMS,
        });
    }
    let inner = f.clone();
    let low = crate::set::low_mask(n);
    SetFunction::oracle(wide, move |s: ItemSet| inner.value_mask(s.mask() & low))
}

/// `+1` on the original items, `-1` on padding.
pub fn padded_first_vector(n: usize) -> Vec<i8> {
    let wide = n.next_power_of_two();
    (0..wide).map(|j| if j < n { 1 } else { -1 }).collect()
}

/// Learns on any width, padding to a power of two when needed; the returned
/// hypothesis and queries are restricted to the original items.
pub fn learn(f: &dyn Oracle, method: Method, delta: Option<f64>) -> Result<LearnResult> {
    let n = f.n();
    if n == 0 {
        return Err(domain("cannot learn on an empty universe"));
    }
    let run = |g: &dyn Oracle, b: &HadamardBasis| match method {
        Method::Hadamard => learn_hadamard_with(g, b),
        Method::Lp => {
            let d = delta.ok_or_else(|| domain("the LP learner needs a band Δ"))?;
            learn_lp_with(g, b, d)
        }
    };
    if n.is_power_of_two() {
        return run(f, &hadamard_basis(n, None)?);
    }
    let padded = pad_oracle(f);
    let b = hadamard_basis(padded.n, Some(&padded_first_vector(n)))?;
    let mut r = run(&padded, &b)?;
    r.h.coeffs.truncate(n);
    let mut seen = std::collections::HashSet::new();
    r.queries = r.queries.iter().map(|s| s.truncate(n)).filter(|s| seen.insert(s.clone())).collect();
    r.query_count = r.queries.len();
    Ok(r)
}

/// `2Δ√min(|S|, n-|S|) + 4Δ`.
pub fn error_bound(size: usize, n: usize, delta: f64) -> f64 {
    2.0 * delta * (size.min(n - size) as f64).sqrt() + 4.0 * delta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub size: usize,
    pub max_err: f64,
    pub bound: f64,
    pub samples: usize,
}

/// Cardinalities at the deciles of `0..=n`.
pub fn decile_sizes(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=10).map(|d| (n * d + 5) / 10).collect();
    v.dedup();
    v
}

/// Largest `|h - f|` over seeded sets of each decile size, against the envelope.
pub fn learner_error_profile(
    h: &LinearFunction,
    f: &dyn Oracle,
    delta: f64,
    samples_per_size: usize,
    seed: u64,
) -> Result<Vec<ProfileRow>> {
    let n = f.n();
    if h.n() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: h.n(),
        });
    }
    let rows = decile_sizes(n)
        .into_iter()
        .map(|size| {
            let sizes = sampling::chunk_sizes(samples_per_size);
            let max_err = sampling::map_chunks(sizes.len(), |w| {
                let mut rng = sampling::stream_rng(seed ^ size as u64, w as u64);
                (0..sizes[w])
                    .map(|_| {
                        let s = sampling::random_of_size(&mut rng, n, size);
                        (h.eval_large(&s) - f.value(&s)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .into_iter()
            .fold(0.0, f64::max);
            ProfileRow {
                size,
                max_err,
                bound: error_bound(size, n, delta),
                samples: samples_per_size,
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `|h - f| / bound` seen.
    pub worst_ratio: f64,
    pub worst_set: Option<LargeSet>,
    pub max_err: f64,
}

/// Checks `|h - f| <= 2Δ√min(|S|, n-|S|) + 4Δ` on uniformly random sets.
pub fn envelope_check(h: &LinearFunction, f: &dyn Oracle, delta: f64, samples: usize, seed: u64) -> EnvelopeCheck {
    let n = f.n();
    let sizes = sampling::chunk_sizes(samples);
    let parts = sampling::map_chunks(sizes.len(), |w| {
        let mut rng = sampling::stream_rng(seed, w as u64);
        let mut violations = 0;
        let mut worst: (f64, Option<LargeSet>) = (0.0, None);
        let mut max_err = 0.0f64;
        for _ in 0..sizes[w] {
            let s = sampling::random_large(&mut rng, n);
            let err = (h.eval_large(&s) - f.value(&s)).abs();
            let ratio = err / error_bound(s.len(), n, delta);
            max_err = max_err.max(err);
            if ratio > 1.0 + 1e-12 {
                violations += 1;
            }
            if worst.1.is_none() || ratio > worst.0 {
                worst = (ratio, Some(s));
            }
        }
        (violations, worst, max_err)
    });
    let mut out = EnvelopeCheck {
        samples,
        violations: 0,
        worst_ratio: 0.0,
        worst_set: None,
        max_err: 0.0,
    };
    for (v, (r, s), e) in parts {
        out.violations += v;
        out.max_err = out.max_err.max(e);
        if s.is_some() && (out.worst_set.is_none() || r > out.worst_ratio) {
            out.worst_ratio = r;
            out.worst_set = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::adversarial::{noisy_linear, random_linear};

    #[test]
    fn two_by_two() {
        let b = hadamard_basis(2, None).unwrap();
        assert_eq!(b.rows, vec![vec![1, 1], vec![1, -1]]);
    }

    #[test]
    fn gram_matrix_with_flipped_first_row() {
        let first = [1i8, 1, -1, -1];
        let b = hadamard_basis(4, Some(&first)).unwrap();
        assert_eq!(b.rows[0], first);
        for (i, r) in b.rows.iter().enumerate() {
            for (j, s) in b.rows.iter().enumerate() {
                let dot: i32 = r.iter().zip(s).map(|(&a, &c)| i32::from(a * c)).sum();
                assert_eq!(dot, if i == j { 4 } else { 0 });
            }
        }
        assert!(hadamard_basis(6, None).is_err());
    }

    #[test]
    fn decompose_full_set() {
        let b = hadamard_basis(16, None).unwrap();
        let l = decompose(&b, &LargeSet::full(16));
        assert!((l[0] - 4.0).abs() < 1e-12);
        assert!(l[1..].iter().all(|x| x.abs() < 1e-12));
        assert!(decompose(&b, &LargeSet::empty(16)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn queries_are_deduplicated() {
        let b = hadamard_basis(64, None).unwrap();
        assert_eq!(query_plan(&b).len(), 2 * 64);
        assert_eq!(query_plan(&b), query_plan(&hadamard_basis(64, None).unwrap()));
    }

    #[test]
    fn three_items_padded() {
        let g = LinearFunction::new(0.5, vec![1.0, -2.0, 3.0]);
        let f = SetFunction::linear(g.clone()).unwrap();
        let r = learn(&f, Method::Hadamard, None).unwrap();
        assert!(r.h.max_coeff_diff(&g) < 1e-9);
        let padded = extend_power_of_two(&f).unwrap();
        assert_eq!(padded.n(), 4);
        assert_eq!(padded.value_mask(0b1111), g.eval(ItemSet::full(3)));
    }

    #[test]
    fn difference_identity_holds() {
        let f = noisy_linear(random_linear(16, 2), 0.1, 5).unwrap();
        let b = hadamard_basis(16, None).unwrap();
        let r = learn_hadamard_with(&f, &b).unwrap();
        for i in 0..16 {
            let (p, m) = (b.plus_set(i), b.minus_set(i));
            let lhs = r.h.eval_large(&p) - r.h.eval_large(&m);
            let rhs = Oracle::value(&f, &p) - Oracle::value(&f, &m);
            assert!((lhs - rhs).abs() < 1e-9);
        }
        assert_eq!(r.h.c0, Oracle::value(&f, &LargeSet::empty(16)));
    }

    #[test]
    fn lp_rejects_small_band() {
        let f = noisy_linear(random_linear(8, 2), 0.1, 5).unwrap();
        assert!(matches!(learn_lp(&f, 0.01), Err(Error::Infeasible { .. })));
        assert!(learn_lp(&f, 0.1).is_ok());
    }

    #[test]
    fn envelope_is_symmetric() {
        for s in 0..=64 {
            assert_eq!(error_bound(s, 64, 0.1), error_bound(64 - s, 64, 0.1));
        }
        assert_eq!(decile_sizes(64), vec![0, 6, 13, 19, 26, 32, 38, 45, 51, 58, 64]);
    }
}
