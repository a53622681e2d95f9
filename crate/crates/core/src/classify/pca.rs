//! Two-component PCA via cyclic Jacobi eigen-decomposition.
//!
//! With fewer samples than features the decomposition runs on the `n x n`
//! Gram matrix of centered samples instead of the `d x d` covariance; both
//! share their non-zero spectrum and the components are recovered as
//! `X^T u / sqrt((n - 1) mu)`.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm};
use crate::{Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
}

/// Eigenvalues and eigenvectors (as columns) of a symmetric matrix, sorted by
/// decreasing eigenvalue. Sweeps stop once the off-diagonal Frobenius norm is
/// below `1e-12` times the matrix norm.
pub fn jacobi_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("matrix {:?} is not square", a.dim())));
    }
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let off = |m: &Array2<f64>| {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * m[[p, q]] * m[[p, q]];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > JACOBI_TOL * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric("Jacobi iteration did not converge".into()));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

fn orient(mut c: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, v) in c.iter().enumerate() {
        if v.abs() > c[best].abs() {
            best = i;
        }
    }
    if c[best] < 0.0 {
        c.iter_mut().for_each(|v| *v = -*v);
    }
    c
}

/// Unit vector orthogonal to `basis`, from the first coordinate axis that is
/// not already (numerically) spanned.
fn complete_basis(basis: &[Vec<f64>], d: usize) -> Vec<f64> {
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let p = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, bi)| *x -= p * bi);
            }
        }
        let n = norm(&e);
        if n > 1e-6 {
            return e.into_iter().map(|x| x / n).collect();
        }
    }
    vec![0.0; d]
}

pub fn pca_fit(xs: &[Vec<f64>], n_components: usize) -> Result<PcaModel> {
    if xs.len() < 2 {
        return Err(Error::Degenerate(format!(
            "PCA needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(Error::Dimension("ragged PCA inputs".into()));
    }
    if n_components == 0 || n_components > d {
        return Err(Error::Config(format!(
            "cannot extract {n_components} components from {d} features"
        )));
    }
    let n = xs.len();
    let mut mean = vec![0.0; d];
    for x in xs {
        mean.iter_mut().zip(x).for_each(|(m, v)| *m += v / n as f64);
    }
    let centered = Array2::from_shape_fn((n, d), |(i, j)| xs[i][j] - mean[j]);
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;
    if total_variance < 1e-12 {
        return Err(Error::Degenerate("data has zero variance".into()));
    }

    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    if d <= n {
        let cov = centered.t().dot(&centered) / denom;
        let (values, vectors) = jacobi_eigen(&cov)?;
        for k in 0..n_components {
            components.push(orient(vectors.column(k).to_vec()));
            explained_variance.push(values[k].max(0.0));
        }
    } else {
        let gram = centered.dot(&centered.t()) / denom;
        let (values, vectors) = jacobi_eigen(&gram)?;
        for k in 0..n_components {
            let mu = values.get(k).copied().unwrap_or(0.0);
            if mu > 1e-12 * total_variance {
                let u = vectors.column(k);
                let mut c = centered.t().dot(&u).to_vec();
                let len = norm(&c);
                c.iter_mut().for_each(|v| *v /= len);
                components.push(orient(c));
                explained_variance.push(mu);
            } else {
                components.push(orient(complete_basis(&components, d)));
                explained_variance.push(0.0);
            }
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

pub fn pca_transform(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.mean.len() {
        return Err(Error::Dimension(format!(
            "input has {} features, PCA expects {}",
            x.len(),
            model.mean.len()
        )));
    }
    let centered: Vec<f64> = x.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
    Ok(model.components.iter().map(|c| dot(c, &centered)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn jacobi_two_by_two() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = jacobi_eigen(&a).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let v0 = vecs.column(0);
        assert!((v0[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_points() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let m = pca_fit(&xs, 2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((m.components[0][0] - h).abs() < 1e-9);
        assert!((m.components[0][1] - h).abs() < 1e-9);
        assert!(m.explained_variance[1].abs() < 1e-9);
    }

    #[test]
    fn mean_maps_to_origin_and_variance_bounded() {
        let xs: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let t = i as f64;
                vec![t.sin(), (2.0 * t).cos(), t * 0.1, 1.0]
            })
            .collect();
        let m = pca_fit(&xs, 2).unwrap();
        let z = pca_transform(&m, &m.mean).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-15));
        assert!(m.explained_variance.iter().sum::<f64>() <= m.total_variance + 1e-12);
        assert!(m.explained_variance[0] >= m.explained_variance[1]);
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        // 5 samples in 8 dimensions takes the Gram route; compare to a direct
        // covariance decomposition.
        let xs: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..8).map(|j| ((i * 8 + j) as f64 * 0.37).sin()).collect())
            .collect();
        let m = pca_fit(&xs, 2).unwrap();
        let n = xs.len();
        let mean: Vec<f64> = (0..8).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let c = Array2::from_shape_fn((n, 8), |(i, j)| xs[i][j] - mean[j]);
        let cov = c.t().dot(&c) / (n - 1) as f64;
        let (vals, vecs) = jacobi_eigen(&cov).unwrap();
        for k in 0..2 {
            assert!((vals[k] - m.explained_variance[k]).abs() < 1e-9);
            let direct = orient(vecs.column(k).to_vec());
            for (a, b) in direct.iter().zip(&m.components[k]) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let xs = vec![vec![1.0, 2.0]; 4];
        assert!(matches!(pca_fit(&xs, 2), Err(Error::Degenerate(_))));
    }
}
