use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_size: usize,
    pub seed: u64,
}

/// Seeded Fisher–Yates shuffle of the indices; the first `train_size`
/// become the training set and the rest the test set.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if spec.train_size == 0 || spec.train_size >= data.len() {
        return Err(Error::invalid(format!(
            "train size must lie in 1..{}, got {}",
            data.len(),
            spec.train_size
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (train_idx, test_idx) = order.split_at(spec.train_size);
    let train = data.subset(train_idx);
    if !train.has_both_classes() {
        return Err(Error::SingleClass("training split; try another seed"));
    }
    Ok((train, data.subset(test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;

    fn numbered(n: usize) -> Dataset {
        Dataset::from_parts(
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect(),
        )
        .unwrap()
    }

    fn ids(d: &Dataset) -> Vec<usize> {
        d.points().map(|p| p[0] as usize).collect()
    }

    #[test]
    fn partition() {
        let d = numbered(50);
        let (train, test) = split(&d, &SplitSpec { train_size: 20, seed: 5 }).unwrap();
        assert_eq!(train.len(), 20);
        assert_eq!(test.len(), 30);
        let mut all: Vec<usize> = ids(&train).into_iter().chain(ids(&test)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());

        let (_, one) = split(&d, &SplitSpec { train_size: 49, seed: 5 }).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn seeded() {
        let d = numbered(100);
        let spec = SplitSpec { train_size: 30, seed: 11 };
        assert_eq!(split(&d, &spec).unwrap(), split(&d, &spec).unwrap());
        for s in 0..10u64 {
            let a = split(&d, &SplitSpec { train_size: 30, seed: s }).unwrap().0;
            let b = split(&d, &SplitSpec { train_size: 30, seed: s + 1000 }).unwrap().0;
            assert_ne!(ids(&a), ids(&b));
        }
    }

    #[test]
    fn errors() {
        let d = numbered(10);
        assert!(split(&d, &SplitSpec { train_size: 10, seed: 0 }).is_err());
        assert!(split(&d, &SplitSpec { train_size: 0, seed: 0 }).is_err());
        // One training sample is necessarily single-class.
        assert!(matches!(
            split(&d, &SplitSpec { train_size: 1, seed: 0 }),
            Err(Error::SingleClass(_))
        ));
    }
}
