//! Small explicit witnesses.

use crate::error::{domain, Result};
use crate::function::SetFunction;
use crate::set::{low_mask, Collection, ItemSet};

/// Pawlik's function on `X ⊎ Y`, `|X| = |Y| = k`; `X` holds items `1..=k`.
pub fn pawlik(k: usize) -> Result<SetFunction> {
    if !(2..=10).contains(&k) {
        return Err(domain(format!("pawlik needs 2 <= k <= 10, got {k}")));
    }
    let half = low_mask(k);
    SetFunction::from_fn(2 * k, |s| {
        let class = |part: u64| match part {
            0 => 0,
            p if p == half => 2,
            _ => 1,
        };
        let x = class(s.mask() & half);
        let y = class(s.mask() >> k);
        const TABLE: [[i8; 3]; 3] = [[0, -1, -3], [1, 0, -1], [3, 1, 0]];
        f64::from(TABLE[x][y])
    })
}

/// `-eps` on the full set, zero elsewhere.
pub fn symmetric_example(n: usize, eps: f64) -> Result<SetFunction> {
    if n < 2 {
        return Err(domain(format!("symmetric_example needs n >= 2, got {n}")));
    }
    let mut v = vec![0.0; n + 1];
    v[n] = -eps;
    SetFunction::symmetric(v)
}

/// `eps / 2 - eps / (2n)`.
pub fn symmetric_example_delta(n: usize, eps: f64) -> f64 {
    eps / 2.0 - eps / (2.0 * n as f64)
}

/// `+1` on `{1,2}` and `{3,4}`, `-1` on `{1,3}` and `{2,4}`.
pub fn four_item_worstcase() -> SetFunction {
    let mut t = vec![0.0; 16];
    t[0b0011] = 1.0;
    t[0b1100] = 1.0;
    t[0b0101] = -1.0;
    t[0b1010] = -1.0;
    SetFunction::table(4, t).expect("16 values")
}

/// Positive and negative supports of [`four_item_worstcase`].
pub fn four_item_supports() -> (Collection, Collection) {
    let c = |a: u64, b: u64| {
        Collection::new(4, vec![ItemSet::from_raw(a, 4), ItemSet::from_raw(b, 4)]).unwrap()
    };
    (c(0b0011, 0b1100), c(0b0101, 0b1010))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pawlik_table_corners() {
        let f = pawlik(4).unwrap();
        let x = ItemSet::from_raw(0x0f, 8);
        let y = ItemSet::from_raw(0xf0, 8);
        assert_eq!(f.value(x), 3.0);
        assert_eq!(f.value(y), -3.0);
        assert_eq!(f.value(ItemSet::full(8)), 0.0);
        assert_eq!(f.value(ItemSet::from_raw(0x01, 8)), 1.0);
        assert_eq!(f.value(ItemSet::from_raw(0x10, 8)), -1.0);
        assert_eq!(f.value(ItemSet::from_raw(0x1f, 8)), 1.0);
        assert_eq!(f.value(ItemSet::from_raw(0xf1, 8)), -1.0);
        assert_eq!(f.value(ItemSet::from_raw(0x11, 8)), 0.0);
        assert!(pawlik(1).is_err() && pawlik(11).is_err());
    }

    #[test]
    fn symmetric_example_values() {
        let f = symmetric_example(3, 1.0).unwrap().to_table().unwrap();
        let t = f.as_table().unwrap();
        assert_eq!(t[7], -1.0);
        assert!(t[..7].iter().all(|&v| v == 0.0));
        assert_eq!(symmetric_example_delta(10, 1.0), 0.45);
        assert_eq!(symmetric_example_delta(2, 1.0), 0.25);
    }
}
