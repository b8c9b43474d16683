use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DatasetError, Label};
use crate::rng::{derive_seed, seeded};

pub const MIN_SUBJECTS: usize = 5;
pub const CV_FOLDS: usize = 3;

/// One (ID document, selfie) verification trial, identified by subject ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub id_subject: String,
    pub selfie_subject: String,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Dev,
    Eval,
}

/// Serialized form of a plan: the pair lists are derived, not stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub seed: u64,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub eval: Vec<String>,
    pub cv_folds: Vec<Vec<String>>,
}

/// One subject-disjoint train/dev/eval partition with its generated pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "SplitRecord", into = "SplitRecord")]
pub struct SplitPlan {
    pub seed: u64,
    pub train_subjects: Vec<String>,
    pub dev_subjects: Vec<String>,
    pub eval_subjects: Vec<String>,
    pub train_pairs: Vec<Pair>,
    pub dev_pairs: Vec<Pair>,
    pub eval_pairs: Vec<Pair>,
    pub cv_folds: Vec<Vec<String>>,
}

/// All ID × selfie cross products within one subject set, ID-major in the
/// order of `subjects`.
pub fn cross_pairs(subjects: &[String]) -> Vec<Pair> {
    let mut pairs = Vec::with_capacity(subjects.len() * subjects.len());
    for a in subjects {
        for b in subjects {
            pairs.push(Pair {
                id_subject: a.clone(),
                selfie_subject: b.clone(),
                label: if a == b { Label::Genuine } else { Label::Impostor },
            });
        }
    }
    pairs
}

impl From<SplitRecord> for SplitPlan {
    fn from(r: SplitRecord) -> Self {
        SplitPlan {
            seed: r.seed,
            train_pairs: cross_pairs(&r.train),
            dev_pairs: cross_pairs(&r.dev),
            eval_pairs: cross_pairs(&r.eval),
            train_subjects: r.train,
            dev_subjects: r.dev,
            eval_subjects: r.eval,
            cv_folds: r.cv_folds,
        }
    }
}

impl From<SplitPlan> for SplitRecord {
    fn from(p: SplitPlan) -> Self {
        p.record()
    }
}

impl SplitPlan {
    pub fn record(&self) -> SplitRecord {
        SplitRecord {
            seed: self.seed,
            train: self.train_subjects.clone(),
            dev: self.dev_subjects.clone(),
            eval: self.eval_subjects.clone(),
            cv_folds: self.cv_folds.clone(),
        }
    }

    pub fn pairs(&self, part: Partition) -> &[Pair] {
        match part {
            Partition::Train => &self.train_pairs,
            Partition::Dev => &self.dev_pairs,
            Partition::Eval => &self.eval_pairs,
        }
    }

    /// Pairs generated within each CV fold (cross-fold pairs never exist).
    pub fn fold_pairs(&self) -> Vec<Vec<Pair>> {
        self.cv_folds.iter().map(|f| cross_pairs(f)).collect()
    }

    /// SHA-256 of the serialized record, hex encoded.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&self.record()).expect("record serializes");
        hex_digest(&json)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fingerprint of an ordered split list; configurations evaluated in one
/// experiment must all report the same value.
pub fn split_list_fingerprint(plans: &[SplitPlan]) -> String {
    let records: Vec<SplitRecord> = plans.iter().map(SplitPlan::record).collect();
    hex_digest(&serde_json::to_vec(&records).expect("records serialize"))
}

/// Shuffles the (sorted, de-duplicated) subjects with `seed` and assigns
/// `floor(0.6u)` to train, `floor(0.2u)` to dev and the rest to eval. Train
/// subjects are dealt round-robin, in shuffled order, into three CV folds.
pub fn plan_split(subjects: &[String], seed: u64) -> Result<SplitPlan, DatasetError> {
    let mut ids: Vec<String> = subjects.to_vec();
    ids.sort();
    ids.dedup();
    let u = ids.len();
    if u < MIN_SUBJECTS {
        return Err(DatasetError::TooFewSubjects {
            needed: MIN_SUBJECTS,
            got: u,
        });
    }
    ids.shuffle(&mut seeded(seed));

    let n_train = u * 3 / 5;
    let n_dev = u / 5;
    let eval = ids.split_off(n_train + n_dev);
    let dev = ids.split_off(n_train);
    let train = ids;

    let mut cv_folds = vec![Vec::new(); CV_FOLDS];
    for (i, s) in train.iter().enumerate() {
        cv_folds[i % CV_FOLDS].push(s.clone());
    }

    Ok(SplitRecord {
        seed,
        train,
        dev,
        eval,
        cv_folds,
    }
    .into())
}

/// `n` plans; plan `i` uses seed `derive_seed(master_seed, i)`.
pub fn plan_many_splits(subjects: &[String], master_seed: u64, n: usize) -> Result<Vec<SplitPlan>, DatasetError> {
    (0..n)
        .map(|i| plan_split(subjects, derive_seed(master_seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn subjects(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i:02}")).collect()
    }

    fn count(pairs: &[Pair], label: Label) -> usize {
        pairs.iter().filter(|p| p.label == label).count()
    }

    #[test]
    fn fifty_subject_protocol_counts() {
        let plan = plan_split(&subjects(50), 3).unwrap();
        assert_eq!(plan.train_subjects.len(), 30);
        assert_eq!(plan.dev_subjects.len(), 10);
        assert_eq!(plan.eval_subjects.len(), 10);
        assert_eq!(count(&plan.train_pairs, Label::Genuine), 30);
        assert_eq!(count(&plan.train_pairs, Label::Impostor), 870);
        assert_eq!(count(&plan.dev_pairs, Label::Genuine), 10);
        assert_eq!(count(&plan.dev_pairs, Label::Impostor), 90);
        assert_eq!(count(&plan.eval_pairs, Label::Genuine), 10);
        assert_eq!(count(&plan.eval_pairs, Label::Impostor), 90);
        for fold in plan.fold_pairs() {
            assert_eq!(count(&fold, Label::Genuine), 10);
            assert_eq!(count(&fold, Label::Impostor), 90);
        }
    }

    #[test]
    fn floor_rule_for_uneven_counts() {
        let plan = plan_split(&subjects(23), 1).unwrap();
        assert_eq!(
            (plan.train_subjects.len(), plan.dev_subjects.len(), plan.eval_subjects.len()),
            (13, 4, 6)
        );
        let sizes: Vec<usize> = plan.cv_folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 4, 4]);
    }

    #[test]
    fn too_few_subjects() {
        assert!(plan_split(&subjects(4), 0).is_err());
        // duplicates do not count twice
        let mut s = subjects(4);
        s.push("s00".into());
        assert!(plan_split(&s, 0).is_err());
    }

    #[test]
    fn determinism_and_many() {
        let s = subjects(50);
        assert_eq!(plan_split(&s, 9).unwrap(), plan_split(&s, 9).unwrap());
        let plans = plan_many_splits(&s, 77, 100).unwrap();
        assert_eq!(plans.len(), 100);
        let distinct: HashSet<Vec<String>> = plans
            .iter()
            .map(|p| {
                let mut t = p.train_subjects.clone();
                t.sort();
                t
            })
            .collect();
        assert_eq!(distinct.len(), 100);
        assert_ne!(plans[0], plans[1]);
        assert_eq!(plans, plan_many_splits(&s, 77, 100).unwrap());
        let single = plan_many_splits(&s, 77, 1).unwrap();
        assert_eq!(single[0], plan_split(&s, derive_seed(77, 0)).unwrap());
    }

    #[test]
    fn json_round_trip_rebuilds_pairs() {
        let plan = plan_split(&subjects(12), 5).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        assert!(!json.contains("train_pairs"));
        let back: SplitPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.fingerprint(), plan.fingerprint());
    }

    #[test]
    fn input_order_does_not_matter() {
        let mut s = subjects(15);
        let a = plan_split(&s, 4).unwrap();
        s.reverse();
        assert_eq!(a, plan_split(&s, 4).unwrap());
    }
}
