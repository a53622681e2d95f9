//! Analyte representation spaces used as regression targets.
//!
//! Three geometries are supported: semantic vectors (loaded from an embedding
//! CSV or synthesized with cluster structure), one-hot basis vectors, and the
//! vertices of a regular simplex on the unit hypersphere.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm, random_orthonormal};
use crate::seed::rng_from_seed;
use crate::signals::AnalyteMix;
use crate::{Error, Result};

pub const DEFAULT_DIMENSION: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Semantic,
    OneHot,
    Simplex,
}

impl TargetKind {
    pub const ALL: [TargetKind; 3] = [TargetKind::Semantic, TargetKind::OneHot, TargetKind::Simplex];
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::Semantic => "semantic",
            TargetKind::OneHot => "onehot",
            TargetKind::Simplex => "simplex",
        })
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semantic" => Ok(TargetKind::Semantic),
            "onehot" | "one_hot" => Ok(TargetKind::OneHot),
            "simplex" => Ok(TargetKind::Simplex),
            other => Err(Error::Config(format!("unknown target space `{other}`"))),
        }
    }
}

/// A point in a target space.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    pub values: Vec<f64>,
}

impl TargetVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("target vector has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Map from analyte id to a `dimension`-long vector, kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpace {
    dimension: usize,
    kind: TargetKind,
    analytes: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl TargetSpace {
    pub fn new(
        kind: TargetKind,
        dimension: usize,
        entries: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("target dimension must be positive".into()));
        }
        let mut analytes = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        for (id, v) in entries {
            if analytes.contains(&id) {
                return Err(Error::Config(format!("duplicate analyte `{id}`")));
            }
            if v.len() != dimension {
                return Err(Error::Dimension(format!(
                    "vector for `{id}` has length {}, expected {dimension}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numeric(format!("vector for `{id}` is not finite")));
            }
            analytes.push(id);
            vectors.push(v);
        }
        Ok(Self {
            dimension,
            kind,
            analytes,
            vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn analytes(&self) -> &[String] {
        &self.analytes
    }

    pub fn len(&self) -> usize {
        self.analytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analytes.is_empty()
    }

    pub fn get(&self, analyte: &str) -> Result<&[f64]> {
        self.analytes
            .iter()
            .position(|a| a == analyte)
            .map(|i| self.vectors[i].as_slice())
            .ok_or_else(|| Error::Lookup(analyte.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.analytes
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter().map(Vec::as_slice))
    }

    /// Write the `analyte_id,v0,...` embedding CSV.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::from("analyte_id");
        for i in 0..self.dimension {
            out.push_str(&format!(",v{i}"));
        }
        out.push('\n');
        for (id, v) in self.iter() {
            out.push_str(id);
            for x in v {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn check_distinct(analytes: &[String]) -> Result<()> {
    for (i, a) in analytes.iter().enumerate() {
        if analytes[..i].contains(a) {
            return Err(Error::Config(format!("duplicate analyte `{a}`")));
        }
    }
    if analytes.is_empty() {
        return Err(Error::Config("no analytes given".into()));
    }
    Ok(())
}

/// Analyte `k` (enumeration order) maps to the standard basis vector `e_k`.
pub fn build_one_hot(analytes: &[String], dimension: usize) -> Result<TargetSpace> {
    check_distinct(analytes)?;
    if analytes.len() > dimension {
        return Err(Error::Capacity(format!(
            "{} analytes do not fit {dimension} one-hot dimensions",
            analytes.len()
        )));
    }
    let entries = analytes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mut v = vec![0.0; dimension];
            v[k] = 1.0;
            (a.clone(), v)
        })
        .collect();
    TargetSpace::new(TargetKind::OneHot, dimension, entries)
}

/// Vertices of a regular simplex centered at the origin, all unit norm, with
/// pairwise inner products `-1/(n-1)`.
///
/// The `n` vertices are built in `n-1` coordinates (centered basis vectors
/// expressed in the Helmert basis of the sum-zero subspace) and then carried
/// into `R^d` by a seeded random orthonormal frame.
pub fn build_simplex(analytes: &[String], dimension: usize, seed: u64) -> Result<TargetSpace> {
    check_distinct(analytes)?;
    let n = analytes.len();
    if dimension == 0 || n > dimension + 1 {
        return Err(Error::Capacity(format!(
            "a regular simplex with {n} vertices needs at least {} dimensions, got {dimension}",
            n.saturating_sub(1).max(1)
        )));
    }
    if n == 1 {
        let mut rng = rng_from_seed(seed);
        let frame = random_orthonormal(dimension, 1, &mut rng)?;
        return TargetSpace::new(
            TargetKind::Simplex,
            dimension,
            vec![(analytes[0].clone(), frame[0].clone())],
        );
    }

    // Coordinates of e_i - 1/n in the Helmert basis h_k, k = 1..n-1, where
    // h_k = (1, ..., 1, -k, 0, ...) / sqrt(k (k + 1)) with k leading ones.
    let m = n - 1;
    let scale = (n as f64 / m as f64).sqrt();
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (1..=m)
                .map(|k| {
                    let denom = ((k * (k + 1)) as f64).sqrt();
                    let hk_i = if i < k {
                        1.0
                    } else if i == k {
                        -(k as f64)
                    } else {
                        0.0
                    };
                    // e_i . h_k; the centering term vanishes because h_k sums to zero.
                    scale * hk_i / denom
                })
                .collect()
        })
        .collect();

    let mut rng = rng_from_seed(seed);
    let frame = random_orthonormal(dimension, m, &mut rng)?;
    let entries = analytes
        .iter()
        .zip(&coords)
        .map(|(a, c)| {
            let mut v = vec![0.0; dimension];
            for (ck, qk) in c.iter().zip(&frame) {
                v.iter_mut().zip(qk).for_each(|(x, q)| *x += ck * q);
            }
            (a.clone(), v)
        })
        .collect();
    TargetSpace::new(TargetKind::Simplex, dimension, entries)
}

/// Parse an embedding CSV (`analyte_id,v0,...,v{d-1}`) into a semantic space.
pub fn load_semantic(path: &Path) -> Result<TargetSpace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, message: String| Error::Parse {
        line: line as u64,
        message: format!("{}: {message}", path.display()),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| err(1, "empty embedding file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header.first() != Some(&"analyte_id") || header.len() < 2 {
        return Err(err(1, "header must be analyte_id,v0,...".into()));
    }
    let dimension = header.len() - 1;
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(err(
                line_no,
                format!("ragged row: expected {} cells, found {}", header.len(), cells.len()),
            ));
        }
        let id = cells[0].trim().to_string();
        if entries.iter().any(|(a, _)| *a == id) {
            return Err(err(line_no, format!("duplicate analyte `{id}`")));
        }
        let v = cells[1..]
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(line_no, format!("non-numeric cell `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push((id, v));
    }
    TargetSpace::new(TargetKind::Semantic, dimension, entries)
}

/// Parameters of a synthetic semantic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticParams {
    pub n_clusters: usize,
    pub cluster_spread: f64,
    /// Explicit cluster index per analyte; when absent, analyte `k` joins
    /// cluster `min(k, n_clusters - 1)`.
    pub assignment: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for SemanticParams {
    fn default() -> Self {
        Self {
            n_clusters: 2,
            cluster_spread: 0.02,
            assignment: None,
            seed: 17,
        }
    }
}

/// Clustered unit vectors: orthonormal centroids plus gaussian jitter, renormalized.
pub fn gen_synthetic_semantic(
    analytes: &[String],
    dimension: usize,
    params: &SemanticParams,
) -> Result<TargetSpace> {
    check_distinct(analytes)?;
    let n = analytes.len();
    let k = params.n_clusters;
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "cluster count must lie in 1..={n}, got {k}"
        )));
    }
    if k > dimension {
        return Err(Error::Capacity(format!(
            "{k} orthogonal centroids do not fit {dimension} dimensions"
        )));
    }
    if !(params.cluster_spread > 0.0) || !params.cluster_spread.is_finite() {
        return Err(Error::Config(format!(
            "cluster spread must be positive, got {}",
            params.cluster_spread
        )));
    }
    let assignment: Vec<usize> = match &params.assignment {
        Some(a) => {
            if a.len() != n || a.iter().any(|&c| c >= k) {
                return Err(Error::Config(format!(
                    "cluster assignment must list one index below {k} per analyte"
                )));
            }
            a.clone()
        }
        None => (0..n).map(|i| i.min(k - 1)).collect(),
    };

    let mut rng = rng_from_seed(params.seed);
    let centroids = random_orthonormal(dimension, k, &mut rng)?;
    let jitter = Normal::new(0.0, params.cluster_spread)
        .map_err(|e| Error::Config(format!("cluster spread: {e}")))?;
    let mut entries = Vec::with_capacity(n);
    for (analyte, &cluster) in analytes.iter().zip(&assignment) {
        let mut v: Vec<f64> = centroids[cluster]
            .iter()
            .map(|c| c + jitter.sample(&mut rng))
            .collect();
        let len = norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        entries.push((analyte.clone(), v));
    }
    TargetSpace::new(TargetKind::Semantic, dimension, entries)
}

/// Target for an exposure: the analyte's vector for singles, and the
/// concentration-weighted combination `lambda * y_a + (1 - lambda) * y_b`
/// with `lambda = c_a / (c_a + c_b)` for doubles.
pub fn mixture_target(space: &TargetSpace, mix: &AnalyteMix) -> Result<TargetVector> {
    match mix.components() {
        [(a, _)] => TargetVector::new(space.get(a)?.to_vec()),
        [(a, ca), (b, cb)] => {
            let ya = space.get(a)?;
            let yb = space.get(b)?;
            let lambda = ca / (ca + cb);
            TargetVector::new(
                ya.iter()
                    .zip(yb)
                    .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                    .collect(),
            )
        }
        _ => Err(Error::Config("mixes hold one or two analytes".into())),
    }
}

/// Largest deviation of any pairwise distance from the mean pairwise distance,
/// and largest deviation of any norm from 1.
pub fn simplex_defects(space: &TargetSpace) -> (f64, f64) {
    let vs: Vec<&[f64]> = space.iter().map(|(_, v)| v).collect();
    let mut dists = Vec::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            dists.push(crate::linalg::distance(vs[i], vs[j]));
        }
    }
    let mean = if dists.is_empty() {
        0.0
    } else {
        dists.iter().sum::<f64>() / dists.len() as f64
    };
    let dist_dev = dists.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
    let norm_dev = vs.iter().map(|v| (norm(v) - 1.0).abs()).fold(0.0, f64::max);
    (dist_dev, norm_dev)
}

/// Pairwise inner products, row-major `n x n`.
pub fn gram_matrix(space: &TargetSpace) -> Vec<Vec<f64>> {
    let vs: Vec<&[f64]> = space.iter().map(|(_, v)| v).collect();
    vs.iter()
        .map(|a| vs.iter().map(|b| dot(a, b)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::distance;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    #[test]
    fn one_hot_basis() {
        let s = build_one_hot(&ids(2), 4).unwrap();
        assert_eq!(s.get("A").unwrap(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.get("B").unwrap(), &[0.0, 1.0, 0.0, 0.0]);
        assert!((distance(s.get("A").unwrap(), s.get("B").unwrap()) - 2f64.sqrt()).abs() < 1e-15);
        let one = build_one_hot(&ids(1), 1).unwrap();
        assert_eq!(one.get("A").unwrap(), &[1.0]);
        assert!(matches!(build_one_hot(&ids(5), 4), Err(Error::Capacity(_))));
        for (_, v) in build_one_hot(&ids(4), 16).unwrap().iter() {
            assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 1);
            assert_eq!(v.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn simplex_pair_is_antipodal() {
        let s = build_simplex(&ids(2), 7, 1).unwrap();
        let (a, b) = (s.get("A").unwrap(), s.get("B").unwrap());
        assert!((distance(a, b) - 2.0).abs() < 1e-12);
        assert!((norm(a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_triangle_gram() {
        let s = build_simplex(&ids(3), 5, 9).unwrap();
        let g = gram_matrix(&s);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { -0.5 };
                assert!((g[i][j] - expected).abs() < 1e-9);
            }
        }
        let (dd, _) = simplex_defects(&s);
        assert!(dd < 1e-9);
        assert!((distance(s.get("A").unwrap(), s.get("C").unwrap()) - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn simplex_full_capacity_and_limits() {
        // n = d + 1 uses every coordinate.
        let s = build_simplex(&ids(4), 3, 2).unwrap();
        let (dd, nd) = simplex_defects(&s);
        assert!(dd < 1e-9 && nd < 1e-9);
        assert!(matches!(build_simplex(&ids(5), 3, 2), Err(Error::Capacity(_))));
    }

    #[test]
    fn mixture_weights() {
        let s = build_one_hot(&ids(2), 3).unwrap();
        let single = mixture_target(&s, &AnalyteMix::single("A", 0.2).unwrap()).unwrap();
        assert_eq!(single.values, vec![1.0, 0.0, 0.0]);
        let even = mixture_target(&s, &AnalyteMix::double("A", 0.125, "B", 0.125).unwrap()).unwrap();
        assert_eq!(even.values, vec![0.5, 0.5, 0.0]);
        let uneven = mixture_target(&s, &AnalyteMix::double("A", 0.3, "B", 0.1).unwrap()).unwrap();
        assert!((uneven.values[0] - 0.75).abs() < 1e-15);
        assert!((uneven.values[1] - 0.25).abs() < 1e-15);
        assert!(matches!(
            mixture_target(&s, &AnalyteMix::single("Q", 0.2).unwrap()),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn semantic_round_trip_and_errors() {
        let space = gen_synthetic_semantic(&ids(4), 512, &SemanticParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.csv");
        space.save(&path).unwrap();
        let back = load_semantic(&path).unwrap();
        assert_eq!(back, space);
        assert_eq!(back.dimension(), 512);
        assert_eq!(back.len(), 4);

        fs::write(&path, "analyte_id,v0,v1\nA,1,2\nB,3,4\nA,5,6\n").unwrap();
        match load_semantic(&path) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "analyte_id,v0,v1\nA,1\n").unwrap();
        assert!(matches!(load_semantic(&path), Err(Error::Parse { line: 2, .. })));
        fs::write(&path, "analyte_id,v0,v1\nA,1,x\n").unwrap();
        assert!(matches!(load_semantic(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn semantic_limits() {
        let tight = SemanticParams {
            cluster_spread: 1e-300,
            ..SemanticParams::default()
        };
        let s = gen_synthetic_semantic(&ids(4), 32, &tight).unwrap();
        // B, C, D share the last of two clusters.
        assert_eq!(s.get("B").unwrap(), s.get("C").unwrap());
        assert_eq!(s.get("C").unwrap(), s.get("D").unwrap());
        assert_ne!(s.get("A").unwrap(), s.get("B").unwrap());

        let distinct = SemanticParams {
            n_clusters: 4,
            ..SemanticParams::default()
        };
        let s = gen_synthetic_semantic(&ids(4), 32, &distinct).unwrap();
        let vs: Vec<_> = s.iter().map(|(_, v)| v.to_vec()).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(distance(&vs[i], &vs[j]) > 0.1);
            }
        }
        assert_eq!(s, gen_synthetic_semantic(&ids(4), 32, &distinct).unwrap());
        let too_many = SemanticParams {
            n_clusters: 5,
            ..SemanticParams::default()
        };
        assert!(gen_synthetic_semantic(&ids(4), 32, &too_many).is_err());
    }

    #[test]
    fn intra_cluster_closer_than_inter() {
        let p = SemanticParams {
            n_clusters: 2,
            cluster_spread: 0.02,
            assignment: Some(vec![0, 1, 1, 0]),
            seed: 4,
        };
        let s = gen_synthetic_semantic(&ids(4), 512, &p).unwrap();
        let d = |a: &str, b: &str| distance(s.get(a).unwrap(), s.get(b).unwrap());
        assert!(d("A", "D") < d("A", "B"));
        assert!(d("B", "C") < d("C", "D"));
    }
}
