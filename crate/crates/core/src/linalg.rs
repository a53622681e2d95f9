//! Small dense helpers shared by the target builders and classifiers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` orthonormal vectors in `R^d` with a rotation-invariant distribution:
/// Gaussian columns orthonormalized by modified Gram-Schmidt (two passes).
/// Equivalent to the first `k` columns of the Q factor of a Gaussian matrix.
pub fn random_orthonormal<R: Rng>(d: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if k > d {
        return Err(Error::Capacity(format!(
            "cannot draw {k} orthonormal vectors in {d} dimensions"
        )));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= p * qi);
            }
        }
        let n = norm(&v);
        // A draw (numerically) inside the span is redrawn.
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn orthonormal_columns() {
        let mut rng = rng_from_seed(3);
        let q = random_orthonormal(64, 10, &mut rng).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - expected).abs() < 1e-12);
            }
        }
        assert!(random_orthonormal(3, 4, &mut rng).is_err());
    }
}
