//! Hard instances for nonadaptive learners and noisy linear test functions.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::function::{LinearFunction, Oracle, SetFunction};
use crate::sampling;
use crate::set::{LargeSet, ItemSet};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversarialSpec {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
}

/// `f` agrees with `q|S|/2` on sets balanced with respect to a hidden `T` and
/// with `g(S) ∓ Δ` on unbalanced ones, where `g = q·|S ∩ T|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversarialInstance {
    pub spec: AdversarialSpec,
    pub q: f64,
    /// Balance threshold `√(n ln n)`.
    pub threshold: f64,
    pub hidden_t: LargeSet,
    pub hidden_g: LinearFunction,
}

pub fn adversarial(n: usize, delta: f64, seed: u64) -> Result<AdversarialInstance> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(domain(format!("adversarial needs an even n >= 16, got {n}")));
    }
    let ln = (n as f64).ln();
    let limit = (ln / n as f64).sqrt();
    if !(delta > 0.0 && delta <= limit + 1e-15) {
        return Err(domain(format!("adversarial needs 0 < Δ <= √(ln n / n) = {limit}, got {delta}")));
    }
    let mut rng = sampling::rng(seed);
    let hidden_t = LargeSet::from_items(n, index::sample(&mut rng, n, n / 2).into_iter().collect::<Vec<_>>());
    let q = delta / (n as f64 * ln).sqrt();
    let coeffs = (0..n).map(|i| if hidden_t.contains(i) { q } else { 0.0 }).collect();
    Ok(AdversarialInstance {
        spec: AdversarialSpec { n, delta, seed },
        q,
        threshold: (n as f64 * ln).sqrt(),
        hidden_t,
        hidden_g: LinearFunction::new(0.0, coeffs),
    })
}

impl AdversarialInstance {
    /// `|S ∩ T| - |S|/2`.
    pub fn imbalance(&self, s: &LargeSet) -> f64 {
        s.intersection(&self.hidden_t).len() as f64 - s.len() as f64 / 2.0
    }

    /// `Δ√n / (2√ln n) - 2Δ`, the gap `f(T) - f(T̄)`.
    pub fn predicted_gap(&self) -> f64 {
        let n = self.spec.n as f64;
        self.spec.delta * n.sqrt() / (2.0 * n.ln().sqrt()) - 2.0 * self.spec.delta
    }

    /// `Δ√n / (8√ln n)`.
    pub fn hardness_floor(&self) -> f64 {
        let n = self.spec.n as f64;
        self.spec.delta * n.sqrt() / (8.0 * n.ln().sqrt())
    }
}

impl Oracle for AdversarialInstance {
    fn n(&self) -> usize {
        self.spec.n
    }
    fn value(&self, s: &LargeSet) -> f64 {
        let d = self.imbalance(s);
        if d.abs() <= self.threshold {
            self.q * s.len() as f64 / 2.0
        } else if d > 0.0 {
            self.hidden_g.eval_large(s) - self.spec.delta
        } else {
            self.hidden_g.eval_large(s) + self.spec.delta
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sign `±1` chosen by hashing the mask with `seed`.
pub fn noise_sign(mask: u64, seed: u64) -> f64 {
    if mix(mask ^ mix(seed)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `g(S) ± Δ` with a hashed per-set sign.
pub fn noisy_linear(g: LinearFunction, delta: f64, seed: u64) -> Result<SetFunction> {
    let n = g.n();
    SetFunction::oracle(n, move |s: ItemSet| g.eval(s) + delta * noise_sign(s.mask(), seed))
}

/// Random linear function with coefficients in `[-1, 1)`.
pub fn random_linear(n: usize, seed: u64) -> LinearFunction {
    use rand::Rng;
    let mut rng = sampling::rng(seed);
    let c0 = rng.gen_range(-1.0..1.0);
    LinearFunction::new(c0, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_between_t_and_complement() {
        let n = 256;
        let delta = ((n as f64).ln() / n as f64).sqrt();
        let a = adversarial(n, delta, 3).unwrap();
        let t = a.hidden_t.clone();
        let gap = a.value(&t) - a.value(&t.complement());
        assert!((gap - a.predicted_gap()).abs() < 1e-12);
    }

    #[test]
    fn within_delta_of_hidden_g() {
        let n = 64;
        let delta = 0.5 * ((n as f64).ln() / n as f64).sqrt();
        let a = adversarial(n, delta, 9).unwrap();
        let mut rng = sampling::rng(1);
        for _ in 0..10_000 {
            let s = sampling::random_large(&mut rng, n);
            assert!((a.value(&s) - a.hidden_g.eval_large(&s)).abs() <= delta + 1e-12);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(adversarial(8, 0.1, 0).is_err());
        assert!(adversarial(64, 1.0, 0).is_err());
    }

    #[test]
    fn noise_has_exact_magnitude() {
        let g = random_linear(10, 4);
        let f = noisy_linear(g.clone(), 0.1, 7).unwrap();
        let signs: f64 = (0..1024u64)
            .map(|m| {
                let s = ItemSet::new(m, 10).unwrap();
                let d = f.value(s) - g.eval(s);
                assert!((d.abs() - 0.1).abs() < 1e-12);
                d.signum()
            })
            .sum();
        assert!(signs.abs() < 200.0);
    }
}
