//! Support certificates for "the zero function is a closest linear function".
//!
//! If every set in PS has value `M = max |f|`, every set in NS has value `-M`,
//! and there are distributions over PS and NS with the same marginal
//! probability for every item, then any linear `g` has equal expectation under
//! both distributions, so it is at least `M` away from `f` somewhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{SetFunction, MAX_TABLE_ITEMS};
use crate::lp::{self, Problem, Relation, Sense};
use crate::set::{Collection, Members};

const VALUE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCertificate {
    pub feasible: bool,
    pub m: f64,
    /// Weights over PS and NS; empty when infeasible.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Per-item marginal probability under `p` (equal to that under `q`).
    pub marginals: Vec<f64>,
    /// `true` when the uniform distributions already certify.
    pub uniform: bool,
}

fn marginals<S: Members>(n: usize, sets: &[S], w: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n];
    for (s, &x) in sets.iter().zip(w) {
        for i in s.members() {
            m[i] += x;
        }
    }
    m
}

/// Generic certificate over any set representation.
///
/// `m` is the maximum absolute value of the function; `describe` renders an
/// offending set for the error message.
pub fn support_certificate<S: Members>(
    n: usize,
    m: f64,
    ps: &[S],
    ns: &[S],
    value: impl Fn(&S) -> f64,
    describe: impl Fn(&S) -> String,
) -> Result<SupportCertificate> {
    for (sets, want) in [(ps, m), (ns, -m)] {
        for s in sets {
            if s.universe() != n {
                return Err(Error::WidthMismatch {
                    expected: n,
                    found: s.universe(),
                });
            }
            let v = value(s);
            if (v - want).abs() > VALUE_TOL * (1.0 + m.abs()) {
                return Err(Error::Certificate {
                    set: describe(s),
                    value: v,
                    expected: want,
                });
            }
        }
    }
    let infeasible = SupportCertificate {
        feasible: false,
        m,
        p: vec![],
        q: vec![],
        marginals: vec![],
        uniform: false,
    };
    if ps.is_empty() || ns.is_empty() {
        return Ok(infeasible);
    }
    let up = vec![1.0 / ps.len() as f64; ps.len()];
    let uq = vec![1.0 / ns.len() as f64; ns.len()];
    let (mp, mq) = (marginals(n, ps, &up), marginals(n, ns, &uq));
    if mp.iter().zip(&mq).all(|(a, b)| (a - b).abs() < 1e-12) {
        return Ok(SupportCertificate {
            feasible: true,
            m,
            p: up,
            q: uq,
            marginals: mp,
            uniform: true,
        });
    }
    let (a, b) = (ps.len(), ns.len());
    let mut lp = Problem::new(a + b);
    lp.add_row((0..a + b).map(|j| f64::from(u8::from(j < a))).collect(), Relation::Eq, 1.0);
    lp.add_row((0..a + b).map(|j| f64::from(u8::from(j >= a))).collect(), Relation::Eq, 1.0);
    let mut item_rows = vec![vec![0.0; a + b]; n];
    for (j, s) in ps.iter().enumerate() {
        for i in s.members() {
            item_rows[i][j] = 1.0;
        }
    }
    for (j, s) in ns.iter().enumerate() {
        for i in s.members() {
            item_rows[i][a + j] = -1.0;
        }
    }
    for row in item_rows {
        lp.add_row(row, Relation::Eq, 0.0);
    }
    match lp::solve(&lp, Sense::Minimize, &vec![0.0; a + b])?.optimal() {
        Some(sol) => {
            let p = sol.x[..a].to_vec();
            let q = sol.x[a..].to_vec();
            Ok(SupportCertificate {
                feasible: true,
                m,
                marginals: marginals(n, ps, &p),
                p,
                q,
                uniform: false,
            })
        }
        None => Ok(infeasible),
    }
}

/// Checks that PS/NS attain `±max|f|` and support equal-marginal distributions.
pub fn zero_closest_certificate(
    f: &SetFunction,
    ps: &Collection,
    ns: &Collection,
) -> Result<SupportCertificate> {
    for c in [ps, ns] {
        if c.n() != f.n() {
            return Err(Error::WidthMismatch {
                expected: f.n(),
                found: c.n(),
            });
        }
    }
    let m = if f.n() <= MAX_TABLE_ITEMS {
        f.max_abs()?
    } else {
        ps.sets().iter().chain(ns.sets()).map(|&s| f.value(s).abs()).fold(0.0, f64::max)
    };
    support_certificate(f.n(), m, ps.sets(), ns.sets(), |&s| f.value(s), |s| s.to_item_list())
}
