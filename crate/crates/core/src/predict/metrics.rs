use crate::error::{Error, Result};

/// Fraction of predictions equal to the truth. Works for binary and categorical labels alike.
pub fn accuracy<L: PartialEq>(predictions: &[L], truth: &[L]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::Mismatch(format!(
            "{} predictions for {} truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty label set".into()));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[truth][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    /// Label represented by row/column 0.
    pub first_label: u8,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// Labels must lie in `first_label .. first_label + n_classes`.
    pub fn tally(predictions: &[u8], truth: &[u8], n_classes: usize, first_label: u8) -> Result<Self> {
        if predictions.len() != truth.len() {
            return Err(Error::Mismatch(format!(
                "{} predictions for {} truth labels",
                predictions.len(),
                truth.len()
            )));
        }
        let index = |label: u8| -> Result<usize> {
            let i = label.checked_sub(first_label).map(usize::from);
            match i {
                Some(i) if i < n_classes => Ok(i),
                _ => Err(Error::InvalidArgument(format!(
                    "label {label} outside {first_label}..{}",
                    first_label as usize + n_classes - 1
                ))),
            }
        };
        let mut counts = vec![vec![0usize; n_classes]; n_classes];
        for (&p, &t) in predictions.iter().zip(truth) {
            counts[index(t)?][index(p)?] += 1;
        }
        Ok(ConfusionMatrix { first_label, counts })
    }

    pub fn binary(predictions: &[u8], truth: &[u8]) -> Result<Self> {
        Self::tally(predictions, truth, 2, 0)
    }

    /// Answer options 1..=4, stored shifted to 0..=3.
    pub fn categorical(predictions: &[u8], truth: &[u8]) -> Result<Self> {
        Self::tally(predictions, truth, 4, 1)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1u8, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1u8, 0, 1, 1], &[1, 1, 1, 0]).unwrap(), 0.5);
        assert!((accuracy(&[2u8, 3, 4], &[2, 3, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(accuracy::<u8>(&[], &[]).is_err());
        assert!(accuracy(&[1u8], &[1, 0]).is_err());
    }

    #[test]
    fn confusion_examples() {
        let c = ConfusionMatrix::binary(&[1, 1, 0], &[1, 0, 0]).unwrap();
        assert_eq!(c.counts, vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(c.total(), 3);
        let d = ConfusionMatrix::categorical(&[1, 2, 3, 4], &[1, 2, 3, 4]).unwrap();
        for (i, row) in d.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, usize::from(i == j));
            }
        }
        let truth = [1, 1, 2, 4, 4, 4];
        let e = ConfusionMatrix::categorical(&[2, 1, 2, 3, 4, 1], &truth).unwrap();
        assert_eq!(e.row_sums(), vec![2, 1, 0, 3]);
        assert!(ConfusionMatrix::categorical(&[0], &[1]).is_err());
        assert!(ConfusionMatrix::binary(&[2], &[1]).is_err());
    }
}
