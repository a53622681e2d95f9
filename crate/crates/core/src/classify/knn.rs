use crate::linalg::squared_distance;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 5;

/// Majority label among the `k` Euclidean nearest neighbours. Equal distances
/// are ordered by lower training index. `k` must be odd so votes cannot tie.
pub fn knn_predict(train: &[Vec<f64>], labels: &[bool], query: &[f64], k: usize) -> Result<bool> {
    if train.is_empty() {
        return Err(Error::Data("KNN needs a non-empty training set".into()));
    }
    if train.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} training points for {} labels",
            train.len(),
            labels.len()
        )));
    }
    if k == 0 || k % 2 == 0 || k > train.len() {
        return Err(Error::Config(format!(
            "k must be odd and at most {}, got {k}",
            train.len()
        )));
    }
    if let Some(bad) = train.iter().find(|x| x.len() != query.len()) {
        return Err(Error::Dimension(format!(
            "query has {} features, training point has {}",
            query.len(),
            bad.len()
        )));
    }
    let mut ranked: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, x)| (squared_distance(x, query), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let positives = ranked[..k].iter().filter(|(_, i)| labels[*i]).count();
    Ok(2 * positives > k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_with_k1() {
        let train = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let labels = vec![false, true, false];
        for (x, l) in train.iter().zip(&labels) {
            assert_eq!(knn_predict(&train, &labels, x, 1).unwrap(), *l);
        }
    }

    #[test]
    fn global_majority() {
        let train: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let labels = vec![true, false, true, false, true];
        assert!(knn_predict(&train, &labels, &[100.0], 5).unwrap());
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let train = vec![vec![1.0], vec![-1.0]];
        assert!(knn_predict(&train, &[true, false], &[0.0], 1).unwrap());
        assert!(!knn_predict(&train, &[false, true], &[0.0], 1).unwrap());
    }

    #[test]
    fn invalid_requests() {
        let train = vec![vec![1.0], vec![2.0]];
        assert!(knn_predict(&[], &[], &[0.0], 1).is_err());
        assert!(knn_predict(&train, &[true, false], &[0.0], 2).is_err());
        assert!(knn_predict(&train, &[true, false], &[0.0], 3).is_err());
        assert!(knn_predict(&train, &[true, false], &[0.0, 1.0], 1).is_err());
    }
}
