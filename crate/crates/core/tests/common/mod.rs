#![allow(dead_code)]

use modkit::sampling;
use modkit::{LinearFunction, SetFunction};
use rand::Rng;

pub fn random_table(n: usize, seed: u64) -> SetFunction {
    let mut rng = sampling::rng(seed);
    SetFunction::table(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn max_residual(table: &[f64], g: &LinearFunction) -> f64 {
    let lin = g.table();
    table.iter().zip(&lin).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Minimax fit by damped Newton on the log-sum-exp smoothing
/// `(1/β) log Σ (e^{β r} + e^{-β r})`, with β raised geometrically.
/// Independent of the LP code; returns an upper bound on the optimum.
pub fn smoothed_minimax(table: &[f64], n: usize) -> LinearFunction {
    let rows: Vec<Vec<f64>> = (0..table.len())
        .map(|m| std::iter::once(1.0).chain((0..n).map(|i| f64::from((m >> i & 1) as u8))).collect())
        .collect();
    let dim = n + 1;
    let mut c = vec![0.0; dim];
    let objective = |c: &[f64], beta: f64| {
        let r: Vec<f64> = rows
            .iter()
            .zip(table)
            .map(|(a, f)| f - a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>())
            .collect();
        let top = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let s: f64 = r.iter().map(|x| (beta * (x - top)).exp() + (beta * (-x - top)).exp()).sum();
        (top + s.ln() / beta, r, top)
    };
    let mut beta = 4.0;
    while beta <= 4e7 {
        for _ in 0..100 {
            let (val, r, top) = objective(&c, beta);
            let mut grad = vec![0.0; dim];
            let mut hess = vec![vec![0.0; dim]; dim];
            let w: Vec<(f64, f64)> = r
                .iter()
                .map(|x| ((beta * (x - top)).exp(), (beta * (-x - top)).exp()))
                .collect();
            let z: f64 = w.iter().map(|(p, q)| p + q).sum();
            let mut mean = vec![0.0; dim];
            for (a, (p, q)) in rows.iter().zip(&w) {
                let s = (p - q) / z;
                for k in 0..dim {
                    mean[k] += s * a[k];
                }
            }
            for (a, (p, q)) in rows.iter().zip(&w) {
                let s = (p + q) / z;
                for i in 0..dim {
                    for j in 0..dim {
                        hess[i][j] += beta * s * a[i] * a[j];
                    }
                }
            }
            for i in 0..dim {
                grad[i] = -mean[i];
                for j in 0..dim {
                    hess[i][j] -= beta * mean[i] * mean[j];
                }
                hess[i][i] += 1e-12;
            }
            let step = solve(hess, grad.iter().map(|g| -g).collect());
            let mut t = 1.0;
            let mut improved = false;
            while t > 1e-12 {
                let trial: Vec<f64> = c.iter().zip(&step).map(|(x, d)| x + t * d).collect();
                if objective(&trial, beta).0 < val - 1e-16 {
                    c = trial;
                    improved = true;
                    break;
                }
                t /= 2.0;
            }
            if !improved {
                break;
            }
        }
        beta *= 4.0;
    }
    LinearFunction::new(c[0], c[1..].to_vec())
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}
