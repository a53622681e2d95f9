use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub r#fn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.r#fn
    }
}

pub fn confusion(preds: &[bool], labels: &[bool]) -> Result<ConfusionCounts> {
    if preds.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in preds.iter().zip(labels) {
        match (p, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.r#fn += 1,
        }
    }
    Ok(c)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.r#fn as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let denom = factors.iter().map(|f| f.sqrt()).product::<f64>();
    ((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0)
}

/// Fraction correct; 0 for an empty evaluation.
pub fn accuracy(c: &ConfusionCounts) -> f64 {
    match c.total() {
        0 => 0.0,
        n => (c.tp + c.tn) as f64 / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, r#fn: fn_ }
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(
            confusion(&[true, false], &[true, false]).unwrap(),
            counts(1, 0, 1, 0)
        );
        assert_eq!(
            confusion(&[false, true], &[true, false]).unwrap(),
            counts(0, 1, 0, 1)
        );
        assert_eq!(confusion(&[], &[]).unwrap(), counts(0, 0, 0, 0));
        assert!(confusion(&[true], &[]).is_err());
    }

    #[test]
    fn mcc_examples() {
        assert!((mcc(&counts(5, 0, 5, 0)) - 1.0).abs() < 1e-12);
        assert!((mcc(&counts(0, 5, 0, 5)) + 1.0).abs() < 1e-12);
        assert!((mcc(&counts(3, 1, 4, 2)) - 10.0 / 600f64.sqrt()).abs() < 1e-12);
        assert_eq!(mcc(&counts(4, 3, 0, 0)), 0.0);
        assert_eq!(mcc(&counts(0, 5, 5, 0)), 0.0);
    }

    proptest! {
        #[test]
        fn bounded_and_class_symmetric(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
            let c = counts(tp, fp, tn, fn_);
            let m = mcc(&c);
            prop_assert!((-1.0..=1.0).contains(&m));
            let swapped = counts(tn, fn_, tp, fp);
            prop_assert!((m - mcc(&swapped)).abs() < 1e-12);
        }
    }
}
