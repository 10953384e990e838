//! Point sets on spheres: equal-angle and Fibonacci layouts for probing the
//! estimated field, and a product Gauss rule for averaging closed-form
//! functions to high accuracy.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Number of points of the averaging rule on S^1 and S^2.
pub const QUADRATURE_POINTS: usize = 1024;

/// `k` equi-distributed points on the sphere of radius `rho` about `center`:
/// the two endpoints in 1-D, equal angles in 2-D, a Fibonacci lattice in 3-D.
pub fn sphere_probe_points(center: &[f64], rho: f64, k: usize) -> Result<Vec<Vec<f64>>> {
    let d = center.len();
    let dirs: Vec<Vec<f64>> = match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "sphere probe layouts exist for d <= 3, got d = {d}"
            )))
        }
    };
    if d > 1 && k == 0 {
        return Err(Error::InvalidParameter {
            field: "k",
            reason: "need at least one sphere point".into(),
        });
    }
    Ok(dirs
        .into_iter()
        .map(|u| center.iter().zip(&u).map(|(c, ui)| c + rho * ui).collect())
        .collect())
}

/// Unit directions and normalized weights (summing to one) of a rule that
/// averages over S^{d-1}.
///
/// 1-D: the two endpoints. 2-D: 1024 equal angles (trapezoid rule, exact for
/// trigonometric degree < 1024). d >= 3: product of Gauss–Gegenbauer nodes in
/// the last coordinate with the rule on S^{d-2}; 32 x 32 = 1024 points in 3-D.
pub fn sphere_average_rule(d: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match d {
        0 => Err(Error::InvalidParameter {
            field: "d",
            reason: "dimension must be at least 1".into(),
        }),
        1 => Ok((vec![vec![1.0], vec![-1.0]], vec![0.5, 0.5])),
        2 => Ok(circle_rule(QUADRATURE_POINTS)),
        _ => {
            let m = if d == 3 {
                32
            } else {
                ((QUADRATURE_POINTS as f64).powf(1.0 / (d - 1) as f64).ceil() as usize).max(4)
            };
            Ok(product_rule(d, m))
        }
    }
}

fn circle_rule(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dirs = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    (dirs, vec![1.0 / n as f64; n])
}

fn product_rule(d: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if d == 2 {
        return circle_rule(m);
    }
    // the last coordinate t of a uniform point on S^{d-1} has density
    // proportional to (1 - t^2)^{(d-3)/2}
    let (nodes, weights) = gegenbauer_gauss(m, 0.5 * (d as f64 - 2.0));
    let (inner_dirs, inner_w) = product_rule(d - 1, m);
    let mut dirs = Vec::with_capacity(nodes.len() * inner_dirs.len());
    let mut w = Vec::with_capacity(dirs.capacity());
    for (t, wt) in nodes.iter().zip(&weights) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (eta, we) in inner_dirs.iter().zip(&inner_w) {
            let mut x: Vec<f64> = eta.iter().map(|e| s * e).collect();
            x.push(*t);
            dirs.push(x);
            w.push(wt * we);
        }
    }
    (dirs, w)
}

/// Gauss nodes and normalized weights for the weight `(1 - t^2)^{λ - 1/2}` on
/// [-1, 1], by the Golub–Welsch eigenvalue method.
pub(crate) fn gegenbauer_gauss(m: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0));
        let off = beta.sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(t, w)| (t, w / total)).unzip()
}

/// Average of `f` over the sphere of radius `rho` about `center`.
pub fn sphere_average(center: &[f64], rho: f64, mut f: impl FnMut(&[f64]) -> f64) -> Result<f64> {
    let (dirs, weights) = sphere_average_rule(center.len())?;
    let mut x = vec![0.0; center.len()];
    let mut acc = 0.0;
    for (u, w) in dirs.iter().zip(&weights) {
        for ((xi, ci), ui) in x.iter_mut().zip(center).zip(u) {
            *xi = ci + rho * ui;
        }
        acc += w * f(&x);
    }
    Ok(acc)
}
