use thiserror::Error;

pub type Result<T> = std::result::Result<T, EnvError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("unknown scenario '{id}'; registered: {}", registered.join(", "))]
    UnknownScenario { id: String, registered: Vec<String> },
    #[error("scenario '{0}' is reserved but has no built-in implementation; register a plug-in")]
    NotImplemented(String),
    #[error("episode already finished (t = {t}, horizon = {horizon})")]
    EpisodeDone { t: usize, horizon: usize },
    #[error("malformed action for agent {agent}: {reason}")]
    MalformedAction { agent: usize, reason: String },
    #[error("agent index {index} out of range for {count} agents")]
    AgentIndex { index: usize, count: usize },
    #[error("could not place entities without overlap after {0} attempts")]
    Placement(usize),
}
