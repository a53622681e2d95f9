use rand::seq::SliceRandom;

use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Stratified K-fold partition over sample indices.
///
/// Each class is shuffled separately and the classes are concatenated, then the
/// sequence is dealt round-robin into folds. Fold sizes differ by at most one and
/// each class is spread as evenly as possible. Returns `(train, val)` index
/// lists per fold, both ascending.
pub fn kfold_split(
    labels: &[bool],
    n_folds: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if n_folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {n_folds}")));
    }
    if labels.len() < n_folds {
        return Err(Error::Data(format!(
            "{} samples cannot fill {n_folds} folds",
            labels.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut negatives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let mut fold_of = vec![0; labels.len()];
    for (pos, &i) in positives.iter().chain(&negatives).enumerate() {
        fold_of[i] = pos % n_folds;
    }
    Ok((0..n_folds)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| fold_of[i] == f);
            (train, val)
        })
        .collect())
}
