//! Minimal hyperparameter study runner: random sampling over a declared
//! space with median pruning of trials that fall behind at a checkpoint.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HyperoptError {
    #[error("dimension '{0}' has an empty or inverted range")]
    InvalidDimension(String),
    #[error("study budget must be at least 1")]
    EmptyBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dimension {
    /// exp(uniform(ln lo, ln hi)); lo must be positive.
    LogUniform { lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
    Categorical(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub dims: Vec<(String, Dimension)>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            dims: vec![
                ("lr".into(), Dimension::LogUniform { lo: 1e-5, hi: 1e-3 }),
                ("gamma".into(), Dimension::Uniform { lo: 0.95, hi: 0.999 }),
                ("tau".into(), Dimension::LogUniform { lo: 1e-3, hi: 5e-2 }),
                ("batch".into(), Dimension::Categorical(vec![64.0, 128.0, 256.0])),
            ],
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), HyperoptError> {
        for (name, dim) in &self.dims {
            let ok = match dim {
                Dimension::LogUniform { lo, hi } => *lo > 0.0 && lo <= hi,
                Dimension::Uniform { lo, hi } => lo <= hi,
                Dimension::Categorical(values) => !values.is_empty(),
            };
            if !ok {
                return Err(HyperoptError::InvalidDimension(name.clone()));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// One value per dimension, in declaration order.
pub fn sample_config<R: Rng>(space: &SearchSpace, rng: &mut R) -> Vec<f64> {
    space
        .dims
        .iter()
        .map(|(_, dim)| match dim {
            Dimension::LogUniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(lo.ln()..hi.ln()).exp()
                }
            }
            Dimension::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..*hi)
                }
            }
            Dimension::Categorical(values) => values[rng.gen_range(0..values.len())],
        })
        .collect()
}

/// Prune iff the value falls strictly below the median of the completed
/// trials' objectives at the same checkpoint (higher is better). With no
/// references the trial always survives.
pub fn median_prune(references: &[f64], value: f64) -> bool {
    if references.is_empty() {
        return false;
    }
    let mut sorted = references.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median =
        if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    value < median
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Pruned,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: usize,
    pub config: Vec<f64>,
    /// (checkpoint step, objective) pairs reported so far.
    pub intermediate: Vec<(usize, f64)>,
    pub status: TrialStatus,
    pub final_objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub trials: Vec<Trial>,
    /// Index of the best completed trial.
    pub best: usize,
}

impl StudyResult {
    pub fn best_trial(&self) -> &Trial {
        &self.trials[self.best]
    }

    pub fn to_csv(&self, space: &SearchSpace) -> String {
        let mut out = String::from("trial_id,status");
        for name in space.names() {
            out.push(',');
            out.push_str(name);
        }
        out.push_str(",final_objective\n");
        for t in &self.trials {
            out.push_str(&format!("{},", t.id));
            out.push_str(match t.status {
                TrialStatus::Pruned => "pruned",
                TrialStatus::Complete => "complete",
            });
            for v in &t.config {
                out.push_str(&format!(",{v}"));
            }
            match t.final_objective {
                Some(v) => out.push_str(&format!(",{v}\n")),
                None => out.push_str(",\n"),
            }
        }
        out
    }
}

/// Sequential random-search study. The objective runner is called once per
/// (config, checkpoint step) and returns a higher-is-better objective; the
/// last checkpoint's value becomes the trial's final objective. Trials are
/// never pruned before two have completed.
pub fn run_study<F>(
    space: &SearchSpace,
    budget: usize,
    checkpoints: &[usize],
    seed: u64,
    mut objective: F,
) -> Result<StudyResult, HyperoptError>
where
    F: FnMut(&[f64], usize) -> f64,
{
    space.validate()?;
    if budget == 0 || checkpoints.is_empty() {
        return Err(HyperoptError::EmptyBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials: Vec<Trial> = Vec::with_capacity(budget);
    // Completed-trial objectives per checkpoint index.
    let mut references: Vec<Vec<f64>> = vec![Vec::new(); checkpoints.len()];
    let mut completed = 0usize;

    for id in 0..budget {
        let config = sample_config(space, &mut rng);
        let mut trial = Trial {
            id,
            config,
            intermediate: Vec::new(),
            status: TrialStatus::Complete,
            final_objective: None,
        };
        for (ci, &step) in checkpoints.iter().enumerate() {
            let value = objective(&trial.config, step);
            trial.intermediate.push((step, value));
            if completed >= 2 && median_prune(&references[ci], value) {
                trial.status = TrialStatus::Pruned;
                break;
            }
            if ci == checkpoints.len() - 1 {
                trial.final_objective = Some(value);
            }
        }
        if trial.status == TrialStatus::Complete {
            for &(step, value) in &trial.intermediate {
                let ci = checkpoints.iter().position(|&s| s == step).unwrap();
                references[ci].push(value);
            }
            completed += 1;
        }
        trials.push(trial);
    }
    assert!(completed >= 1, "the first two trials are never pruned");

    let best = trials
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.final_objective.map(|v| (i, v)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(i, _)| i)
        .expect("at least one completed trial");
    Ok(StudyResult { trials, best })
}
