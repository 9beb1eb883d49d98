//! Multi-agent actor-critic learners under centralized training with
//! decentralized execution.
//!
//! Three algorithms share one code path:
//!
//! * MADDPG: one centralized critic per agent, deterministic target actions.
//! * MATD3: two centralized critics per agent with a min-of-two target,
//!   clipped Gaussian smoothing on every agent's target action and policy
//!   updates delayed to every `d` critic updates.
//! * IL-TD3: MATD3 with critics that only see the agent's own observation
//!   and action.
//!
//! The [`probe`] module measures critic over/underestimation against
//! Monte-Carlo returns.

mod algo;
mod buffer;
mod bundle;
mod error;
mod hyper;
mod persist;
mod policy;
pub mod probe;
mod train;

pub use algo::{
    critic_loss_and_grads, critic_update, maddpg_critic_target, matd3_critic_target,
    policy_objective_and_grads, policy_update, select_actions, target_actions, update_targets,
};
pub use buffer::{Batch, ReplayBuffer, Transition};
pub use bundle::{AgentBundle, CriticView, UpdateClock};
pub use error::{MarlError, Result};
pub use hyper::{Algorithm, HyperParams};
pub use persist::{decode_bundle, encode_bundle};
pub use policy::{Policy, PolicyCache};
pub use train::{ProbeSchedule, 
    random_baseline, train, MetricsLog, MetricsRow, TrainOptions, TrainOutcome, METRICS_HEADER,
};
