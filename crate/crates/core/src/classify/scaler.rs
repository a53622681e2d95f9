use serde::{Deserialize, Serialize};

/// Centers features and applies one global scale so the mean per-coordinate
/// square is 1. Geometry (angles, distance ratios) is unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsScaler {
    pub mean: Vec<f64>,
    pub scale: f64,
}

impl RmsScaler {
    pub fn fit(xs: &[Vec<f64>]) -> Self {
        let d = xs.first().map_or(0, Vec::len);
        let n = xs.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for x in xs {
            mean.iter_mut().zip(x).for_each(|(m, v)| *m += v / n);
        }
        let ss: f64 = xs
            .iter()
            .flat_map(|x| x.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)))
            .sum();
        let rms = (ss / (n * d.max(1) as f64)).sqrt();
        let scale = if rms > 1e-300 { 1.0 / rms } else { 1.0 };
        Self { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .map(|(v, m)| (v - m) * self.scale)
            .collect()
    }

    pub fn transform_all(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| self.transform(x)).collect()
    }
}
