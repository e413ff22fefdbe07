use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    Holdout { train_fraction: f64 },
    KFold { folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub mode: SplitMode,
    pub runs: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn holdout(train_fraction: f64, runs: usize, seed: u64) -> Self {
        SplitPlan {
            mode: SplitMode::Holdout { train_fraction },
            runs,
            seed,
        }
    }

    pub fn kfold(folds: usize, runs: usize, seed: u64) -> Self {
        SplitPlan {
            mode: SplitMode::KFold { folds },
            runs,
            seed,
        }
    }

    pub fn validate(&self, corpus_len: usize) -> Result<()> {
        if corpus_len == 0 {
            return Err(Error::EmptyCorpus("nothing to split".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidPlan("runs must be positive".into()));
        }
        match self.mode {
            SplitMode::Holdout { train_fraction } => {
                if !(train_fraction > 0.0 && train_fraction < 1.0) {
                    return Err(Error::InvalidPlan(format!(
                        "train fraction {train_fraction} outside (0, 1)"
                    )));
                }
                let train = holdout_train_size(corpus_len, train_fraction);
                if train == 0 || train == corpus_len {
                    return Err(Error::InvalidPlan(format!(
                        "train fraction {train_fraction} leaves an empty partition of {corpus_len} documents"
                    )));
                }
            }
            SplitMode::KFold { folds } => {
                if folds < 2 {
                    return Err(Error::InvalidPlan("need at least 2 folds".into()));
                }
                if folds > corpus_len {
                    return Err(Error::InvalidPlan(format!(
                        "{folds} folds for {corpus_len} documents"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Indices of one train/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn holdout_train_size(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction).round() as usize
}

fn shuffled(n: usize, seed: u64, run: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    idx.shuffle(&mut rng);
    idx
}

/// Partition document indices `0..corpus_len` according to `plan`.
///
/// Holdout yields one partition per run; k-fold yields `folds` partitions per
/// run, run-major.
pub fn split(corpus_len: usize, plan: &SplitPlan) -> Result<Vec<Partition>> {
    plan.validate(corpus_len)?;
    let mut out = Vec::new();
    for run in 0..plan.runs {
        let order = shuffled(corpus_len, plan.seed, run);
        match plan.mode {
            SplitMode::Holdout { train_fraction } => {
                let k = holdout_train_size(corpus_len, train_fraction);
                let mut train = order[..k].to_vec();
                let mut test = order[k..].to_vec();
                train.sort_unstable();
                test.sort_unstable();
                out.push(Partition { train, test });
            }
            SplitMode::KFold { folds } => {
                for f in 0..folds {
                    let lo = f * corpus_len / folds;
                    let hi = (f + 1) * corpus_len / folds;
                    let mut test = order[lo..hi].to_vec();
                    let mut train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
                    train.sort_unstable();
                    test.sort_unstable();
                    out.push(Partition { train, test });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cmu_sized_holdout() {
        let parts = split(485, &SplitPlan::holdout(0.8, 5, 7)).unwrap();
        assert_eq!(parts.len(), 5);
        for p in &parts {
            assert_eq!((p.train.len(), p.test.len()), (388, 97));
        }
        assert_ne!(parts[0], parts[1]);
    }

    #[test]
    fn invalid_plans() {
        assert!(matches!(split(10, &SplitPlan::holdout(1.0, 1, 0)), Err(Error::InvalidPlan(_))));
        assert!(matches!(split(10, &SplitPlan::holdout(0.0, 1, 0)), Err(Error::InvalidPlan(_))));
        assert!(matches!(split(3, &SplitPlan::kfold(4, 1, 0)), Err(Error::InvalidPlan(_))));
        assert!(matches!(split(10, &SplitPlan::holdout(0.5, 0, 0)), Err(Error::InvalidPlan(_))));
        assert!(split(0, &SplitPlan::holdout(0.5, 1, 0)).is_err());
    }

    #[test]
    fn same_seed_same_partitions() {
        let plan = SplitPlan::holdout(0.8, 3, 42);
        assert_eq!(split(50, &plan).unwrap(), split(50, &plan).unwrap());
        let other = SplitPlan::holdout(0.8, 3, 43);
        assert_ne!(split(50, &plan).unwrap(), split(50, &other).unwrap());
    }

    proptest! {
        #[test]
        fn holdout_is_disjoint_cover(n in 2usize..200, frac in 0.05f64..0.95, seed: u64) {
            let plan = SplitPlan::holdout(frac, 2, seed);
            if let Ok(parts) = split(n, &plan) {
                for p in parts {
                    let mut all: Vec<usize> = p.train.iter().chain(&p.test).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                }
            }
        }

        #[test]
        fn kfold_test_sets_cover_corpus(n in 2usize..200, k in 2usize..12, seed: u64) {
            prop_assume!(k <= n);
            let parts = split(n, &SplitPlan::kfold(k, 1, seed)).unwrap();
            prop_assert_eq!(parts.len(), k);
            let mut tests: Vec<usize> = parts.iter().flat_map(|p| p.test.clone()).collect();
            tests.sort_unstable();
            prop_assert_eq!(tests, (0..n).collect::<Vec<_>>());
            for p in &parts {
                prop_assert_eq!(p.train.len() + p.test.len(), n);
                prop_assert!(p.train.iter().all(|i| p.test.binary_search(i).is_err()));
            }
        }
    }
}
