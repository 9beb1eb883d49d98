use marl_nn::NnError;
use particle_env::EnvError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, MarlError>;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("variant mismatch: {0}")]
    VariantMismatch(String),
    #[error("policy update not permitted: {critic_updates} critic updates, {policy_updates} policy updates, delay {delay}")]
    ClockViolation {
        critic_updates: u64,
        policy_updates: u64,
        delay: u64,
    },
    #[error("non-finite critic loss for agent {agent} critic {critic}: sample {batch_index} has q = {q}, y = {y}")]
    NonFiniteLoss {
        agent: usize,
        critic: usize,
        batch_index: usize,
        q: f64,
        y: f64,
    },
    #[error("probe window is empty: no transitions since sequence {marker}; lengthen the evaluation interval")]
    EmptyProbeWindow { marker: u64 },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid buffer request: {0}")]
    Buffer(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("episode {episode}, step {step}: {source}")]
    AtStep {
        episode: usize,
        step: usize,
        #[source]
        source: Box<MarlError>,
    },
}

impl MarlError {
    pub(crate) fn at(self, episode: usize, step: usize) -> Self {
        MarlError::AtStep {
            episode,
            step,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(MarlError::Dimension {
            context,
            expected,
            actual,
        })
    }
}
