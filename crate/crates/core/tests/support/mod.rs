//! Independent reference implementations used as test oracles. Nothing
//! here calls into the code paths it checks.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Breadth-first flood fill with 4-connectivity. Returns per-cell component
/// ids (`usize::MAX` for background) numbered in order of discovery.
pub fn flood_fill_components(rows: usize, cols: usize, mask: &[u8]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; rows * cols];
    let mut next = 0;
    for start in 0..rows * cols {
        if mask[start] == 0 || comp[start] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        comp[start] = next;
        while let Some(k) = queue.pop_front() {
            let (r, c) = (k / cols, k % cols);
            let mut visit = |nr: usize, nc: usize| {
                let nk = nr * cols + nc;
                if mask[nk] != 0 && comp[nk] == usize::MAX {
                    comp[nk] = next;
                    queue.push_back(nk);
                }
            };
            if r > 0 {
                visit(r - 1, c);
            }
            if r + 1 < rows {
                visit(r + 1, c);
            }
            if c > 0 {
                visit(r, c - 1);
            }
            if c + 1 < cols {
                visit(r, c + 1);
            }
        }
        next += 1;
    }
    comp
}

/// True when two labelings induce the same partition of the cells
/// (background must coincide too).
pub fn same_partition(a: &[u32], b: &[usize]) -> bool {
    use std::collections::HashMap;
    let mut ab: HashMap<u32, usize> = HashMap::new();
    let mut ba: HashMap<usize, u32> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if (x == 0) != (y == usize::MAX) {
            return false;
        }
        if x == 0 {
            continue;
        }
        if *ab.entry(x).or_insert(y) != y || *ba.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

pub fn random_mask<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> Vec<u8> {
    (0..rows * cols).map(|_| u8::from(rng.random::<f64>() < density)).collect()
}

pub fn normal_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

/// Composite Simpson's rule with `2m` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Box-Muller standard normal draws.
pub fn normals<R: Rng>(rng: &mut R, n: usize, mu: f64, sd: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            mu + sd * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let dl = (b.1 - a.1).to_radians();
    // Spherical law of cosines, a different route from haversine.
    let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
    6371.0 * c.acos()
}
