//! Session-level classifier strategies selectable by name (`analytic.learner`).

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::registry::Registry;

use super::{
    align_base, autocorrelation_updates, joint_solve, predict_with, AnalyticState,
    AutocorrelationUpdate, SessionBatch,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSettings {
    pub gamma: f64,
    /// Name in [`autocorrelation_updates`].
    pub r_update: String,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            r_update: "auto".into(),
        }
    }
}

/// Consumes one session at a time and classifies over every class seen so far.
pub trait ClassifierLearner: Send {
    fn name(&self) -> &'static str;

    /// Learns a session; the first call is the base alignment.
    fn learn(&mut self, batch: SessionBatch) -> Result<()>;

    /// Current weights, columns ordered as [`ClassifierLearner::seen_classes`].
    fn weights(&self) -> Option<&Matrix>;

    fn seen_classes(&self) -> &[usize];

    /// The retained analytic state, for learners that keep one.
    fn state(&self) -> Option<&AnalyticState> {
        None
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let w = self
            .weights()
            .ok_or_else(|| Error::Empty("classifier has not learned any session".into()))?;
        predict_with(x, w, self.seen_classes())
    }
}

/// The recursive analytic learner: ridge alignment, then exact RLS updates.
/// Keeps only `W` and `R` between sessions.
pub struct RecursiveLearner {
    gamma: f64,
    rule: Box<dyn AutocorrelationUpdate>,
    state: Option<AnalyticState>,
}

impl RecursiveLearner {
    pub fn new(settings: &LearnerSettings) -> Result<Self> {
        Ok(Self {
            gamma: settings.gamma,
            rule: autocorrelation_updates().create(&settings.r_update)?,
            state: None,
        })
    }

    pub fn into_state(self) -> Option<AnalyticState> {
        self.state
    }
}

impl ClassifierLearner for RecursiveLearner {
    fn name(&self) -> &'static str {
        "recursive"
    }

    fn learn(&mut self, batch: SessionBatch) -> Result<()> {
        match &mut self.state {
            None => self.state = Some(align_base(&batch, self.gamma)?),
            Some(state) => state.learn(&batch, self.rule.as_ref())?,
        }
        Ok(())
    }

    fn weights(&self) -> Option<&Matrix> {
        self.state.as_ref().map(|s| s.weights())
    }

    fn seen_classes(&self) -> &[usize] {
        self.state.as_ref().map_or(&[], |s| s.seen_classes())
    }

    fn state(&self) -> Option<&AnalyticState> {
        self.state.as_ref()
    }
}

/// Retains every session and re-solves the joint ridge problem after each one.
/// This is the replay upper bound the recursive learner must reproduce.
pub struct JointRetrain {
    gamma: f64,
    batches: Vec<SessionBatch>,
    weights: Option<Matrix>,
    seen: Vec<usize>,
}

impl JointRetrain {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            batches: Vec::new(),
            weights: None,
            seen: Vec::new(),
        }
    }
}

impl ClassifierLearner for JointRetrain {
    fn name(&self) -> &'static str {
        "joint"
    }

    fn learn(&mut self, batch: SessionBatch) -> Result<()> {
        let overlap: Vec<usize> = batch
            .class_ids()
            .iter()
            .copied()
            .filter(|c| self.seen.contains(c))
            .collect();
        if !overlap.is_empty() {
            return Err(Error::ClassOverlap(overlap));
        }
        self.seen.extend_from_slice(batch.class_ids());
        self.batches.push(batch);
        self.weights = Some(joint_solve(&self.batches, self.gamma)?);
        Ok(())
    }

    fn weights(&self) -> Option<&Matrix> {
        self.weights.as_ref()
    }

    fn seen_classes(&self) -> &[usize] {
        &self.seen
    }
}

pub fn classifier_learners() -> Registry<dyn ClassifierLearner, LearnerSettings> {
    Registry::<dyn ClassifierLearner, LearnerSettings>::new("classifier learner")
        .with(
            "recursive",
            "closed-form base alignment plus exact recursive updates (keeps W and R only)",
            |s| Ok(Box::new(RecursiveLearner::new(s)?)),
        )
        .with(
            "joint",
            "store all sessions and re-solve the joint ridge problem each time",
            |s| Ok(Box::new(JointRetrain::new(s.gamma))),
        )
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_batch;
    use super::*;
    use crate::linalg::relative_frobenius;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn learners_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sessions = [
            random_batch(20, 8, &[0, 1, 2], &mut rng),
            random_batch(5, 8, &[3], &mut rng),
            random_batch(6, 8, &[4, 5], &mut rng),
        ];
        let settings = LearnerSettings {
            gamma: 0.1,
            ..Default::default()
        };
        let reg = classifier_learners();
        let mut rec = reg.create_with("recursive", &settings).unwrap();
        let mut joint = reg.create_with("joint", &settings).unwrap();
        for s in &sessions {
            rec.learn(s.clone()).unwrap();
            joint.learn(s.clone()).unwrap();
            assert!(relative_frobenius(rec.weights().unwrap(), joint.weights().unwrap()) < 1e-8);
            assert_eq!(rec.seen_classes(), joint.seen_classes());
        }
        assert!(rec.state().is_some());
        assert!(joint.state().is_none());
    }

    #[test]
    fn predict_before_learning_errors() {
        let rec = RecursiveLearner::new(&LearnerSettings::default()).unwrap();
        assert!(rec.predict(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn unknown_rule_is_config_error() {
        let s = LearnerSettings {
            r_update: "magic".into(),
            ..Default::default()
        };
        assert!(RecursiveLearner::new(&s).err().unwrap().is_config_error());
    }
}
