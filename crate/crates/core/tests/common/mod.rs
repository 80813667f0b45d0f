//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qclab::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-scale..scale);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Cyclic Jacobi eigendecomposition. Returns eigenvalues and the matrix of
/// eigenvectors (columns).
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    jacobi_eigen(m).0.iter().map(|x| x.abs()).sum()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    jacobi_eigen(m).0.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Euclidean projection of `m` onto `{lo <= x <= hi, sum x >= target}` by
/// enumerating every active set (each entry at `lo`, `hi` or free, with the
/// sum constraint active or not) and keeping the nearest feasible candidate.
pub fn brute_force_box_halfspace(m: &[f64], lo: f64, hi: f64, target: f64) -> Vec<f64> {
    let k = m.len();
    let total = 3usize.pow(k as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut x = vec![0.0; k];
    let mut state = vec![0u8; k];
    for code in 0..total {
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        for sum_active in [false, true] {
            let mut fixed = 0.0;
            let mut free_m = 0.0;
            let mut free = 0usize;
            for i in 0..k {
                match state[i] {
                    0 => fixed += lo,
                    1 => fixed += hi,
                    _ => {
                        free += 1;
                        free_m += m[i];
                    }
                }
            }
            let theta = if sum_active {
                if free == 0 {
                    0.0
                } else {
                    (target - fixed - free_m) / free as f64
                }
            } else {
                0.0
            };
            for i in 0..k {
                x[i] = match state[i] {
                    0 => lo,
                    1 => hi,
                    _ => m[i] + theta,
                };
            }
            let sum: f64 = x.iter().sum();
            let tol = 1e-12;
            if x.iter().any(|&v| v < lo - tol || v > hi + tol) || sum < target - 1e-10 {
                continue;
            }
            let d: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, x.clone()));
            }
        }
    }
    best.expect("feasible set is non-empty").1
}

/// `||Q||_* + lambda ||A - Q||_1` for a symmetric `q`.
pub fn eq5_objective(a: &DMatrix<f64>, q: &DMatrix<f64>, lambda: f64) -> f64 {
    nuclear_norm(q) + lambda * (a - q).abs().sum()
}

/// Minimum of `||Q||_* + lambda ||A - Q||_1` over symmetric `Q` with entries
/// in [0, 1] and `sum Q >= bound`, by the central-cut ellipsoid method over
/// the upper triangle of `Q`.
pub fn ellipsoid_eq5(a: &DMatrix<f64>, lambda: f64, bound: f64) -> f64 {
    let n = a.nrows();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let d = pairs.len();
    let to_matrix = |x: &DVector<f64>| {
        let mut q = DMatrix::zeros(n, n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            q[(i, j)] = x[k];
            q[(j, i)] = x[k];
        }
        q
    };
    let weight = |k: usize| if pairs[k].0 == pairs[k].1 { 1.0 } else { 2.0 };

    let mut x = DVector::from_element(d, 0.5);
    // ball around the unit cube
    let r2 = d as f64;
    let mut p = DMatrix::<f64>::identity(d, d) * r2;
    let mut best = f64::INFINITY;
    let df = d as f64;
    for _ in 0..20_000 {
        let mut g = DVector::zeros(d);
        let mut cut = false;
        for k in 0..d {
            if x[k] < 0.0 {
                g[k] = -1.0;
                cut = true;
                break;
            }
            if x[k] > 1.0 {
                g[k] = 1.0;
                cut = true;
                break;
            }
        }
        let q = to_matrix(&x);
        if !cut && q.sum() < bound {
            for k in 0..d {
                g[k] = -weight(k);
            }
            cut = true;
        }
        if !cut {
            best = best.min(eq5_objective(a, &q, lambda));
            let (vals, vecs) = jacobi_eigen(&q);
            let mut sub = DMatrix::zeros(n, n);
            for (c, &l) in vals.iter().enumerate() {
                let s = if l.abs() < 1e-14 { 0.0 } else { l.signum() };
                let v = vecs.column(c);
                sub += s * v * v.transpose();
            }
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let l1 = -(a[(i, j)] - q[(i, j)]).signum();
                g[k] = weight(k) * (sub[(i, j)] + lambda * l1);
            }
        }
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if gpg <= 1e-24 {
            if !cut {
                break;
            }
            continue;
        }
        if !cut && gpg.sqrt() < 1e-9 {
            break;
        }
        let gt = pg / gpg.sqrt();
        x -= &gt / (df + 1.0);
        p = (df * df / (df * df - 1.0)) * (&p - (2.0 / (df + 1.0)) * &gt * gt.transpose());
        p = (&p + p.transpose()) * 0.5;
    }
    best
}
