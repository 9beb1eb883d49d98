use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{EnvError, Result};
use crate::scenario::Scenario;
use crate::scenarios::{
    CooperativeCommunication, CooperativeNavigation, PhysicalDeception, PredatorPrey,
};

/// Task ids that are recognized but ship without an implementation.
pub const RESERVED_SCENARIOS: [&str; 2] = ["keep_away", "covert_communication"];

/// Scenarios keyed by string id.
#[derive(Debug, Clone, Default)]
pub struct ScenarioRegistry {
    scenarios: BTreeMap<String, Arc<dyn Scenario>>,
}

impl ScenarioRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(CooperativeNavigation::default()));
        reg.register(Arc::new(CooperativeCommunication));
        reg.register(Arc::new(PredatorPrey::default()));
        reg.register(Arc::new(PhysicalDeception::default()));
        reg
    }

    /// Adds or replaces a scenario. Reserved ids are accepted.
    pub fn register(&mut self, scenario: Arc<dyn Scenario>) {
        self.scenarios.insert(scenario.id().to_string(), scenario);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn Scenario>> {
        if let Some(s) = self.scenarios.get(id) {
            return Ok(Arc::clone(s));
        }
        if RESERVED_SCENARIOS.contains(&id) {
            return Err(EnvError::NotImplemented(id.to_string()));
        }
        Err(EnvError::UnknownScenario {
            id: id.to_string(),
            registered: self.ids(),
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.scenarios.contains_key(id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.scenarios.keys().cloned().collect()
    }
}
