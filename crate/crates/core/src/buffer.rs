use marl_nn::{Matrix2D, SeededRng};
use particle_env::World;
use rand::seq::index;

use crate::error::{check_dim, MarlError, Result};

/// One joint step. Actions use the flat movement-then-message layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<Vec<f64>>,
    pub done: bool,
    /// Simulator state in which `actions` were taken; kept for probing.
    pub world: Option<World>,
}

impl Transition {
    /// Joint state `x`: every agent's observation in agent order.
    pub fn state(&self) -> Vec<f64> {
        self.obs.concat()
    }

    pub fn next_state(&self) -> Vec<f64> {
        self.next_obs.concat()
    }

    fn shape(&self) -> Vec<(usize, usize)> {
        self.obs
            .iter()
            .zip(&self.actions)
            .map(|(o, a)| (o.len(), a.len()))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.obs.len();
        check_dim("transition actions", n, self.actions.len())?;
        check_dim("transition rewards", n, self.rewards.len())?;
        check_dim("transition next observations", n, self.next_obs.len())?;
        for (o, o2) in self.obs.iter().zip(&self.next_obs) {
            check_dim("transition next observation width", o.len(), o2.len())?;
        }
        Ok(())
    }
}

/// Minibatch in per-agent column blocks, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Vec<Matrix2D>,
    pub actions: Vec<Matrix2D>,
    pub rewards: Vec<Vec<f64>>,
    pub next_obs: Vec<Matrix2D>,
    pub done: Vec<bool>,
}

impl Batch {
    pub fn from_transitions(ts: &[&Transition]) -> Result<Self> {
        let first = ts
            .first()
            .ok_or_else(|| MarlError::Buffer("empty batch".into()))?;
        let n = first.obs.len();
        let block = |get: &dyn Fn(&Transition) -> &Vec<f64>| -> Result<Matrix2D> {
            let rows: Vec<&Vec<f64>> = ts.iter().map(|t| get(t)).collect();
            Ok(Matrix2D::from_rows(&rows)?)
        };
        let mut batch = Batch {
            obs: Vec::with_capacity(n),
            actions: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            next_obs: Vec::with_capacity(n),
            done: ts.iter().map(|t| t.done).collect(),
        };
        for i in 0..n {
            batch.obs.push(block(&|t| &t.obs[i])?);
            batch.actions.push(block(&|t| &t.actions[i])?);
            batch.next_obs.push(block(&|t| &t.next_obs[i])?);
            batch.rewards.push(ts.iter().map(|t| t.rewards[i]).collect());
        }
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.obs.len()
    }

    pub fn state(&self) -> Result<Matrix2D> {
        Ok(Matrix2D::hcat(&self.obs.iter().collect::<Vec<_>>())?)
    }

    pub fn next_state(&self) -> Result<Matrix2D> {
        Ok(Matrix2D::hcat(&self.next_obs.iter().collect::<Vec<_>>())?)
    }
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten once
/// full. Every pushed transition gets a sequence number starting at 1.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<(u64, Transition)>,
    head: usize,
    total_pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(MarlError::Buffer("capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
            total_pushed: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_pushed(&self) -> u64 {
        self.total_pushed
    }

    /// Appends `t` and returns its sequence number.
    pub fn push(&mut self, t: Transition) -> Result<u64> {
        t.validate()?;
        if let Some((_, first)) = self.items.first() {
            if first.shape() != t.shape() {
                return Err(MarlError::Buffer(format!(
                    "transition shape {:?} differs from stored shape {:?}",
                    t.shape(),
                    first.shape()
                )));
            }
        }
        self.total_pushed += 1;
        let entry = (self.total_pushed, t);
        if self.items.len() < self.capacity {
            self.items.push(entry);
        } else {
            self.items[self.head] = entry;
            self.head = (self.head + 1) % self.capacity;
        }
        Ok(self.total_pushed)
    }

    /// Stored entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &Transition)> {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer).map(|(s, t)| (*s, t))
    }

    /// Distinct slot indices drawn uniformly without replacement.
    pub fn sample_indices(&self, batch_size: usize, rng: &mut SeededRng) -> Result<Vec<usize>> {
        if batch_size == 0 {
            return Err(MarlError::Buffer("batch size must be positive".into()));
        }
        if batch_size > self.len() {
            return Err(MarlError::Buffer(format!(
                "requested {batch_size} samples from a buffer holding {}",
                self.len()
            )));
        }
        Ok(index::sample(rng, self.len(), batch_size).into_vec())
    }

    pub fn slot(&self, index: usize) -> Option<(u64, &Transition)> {
        self.items.get(index).map(|(s, t)| (*s, t))
    }

    pub fn sample(&self, batch_size: usize, rng: &mut SeededRng) -> Result<Batch> {
        let idx = self.sample_indices(batch_size, rng)?;
        let ts: Vec<&Transition> = idx.iter().map(|&i| &self.items[i].1).collect();
        Batch::from_transitions(&ts)
    }

    /// Stored transitions with sequence number greater than `marker`.
    pub fn since(&self, marker: u64) -> Vec<(u64, &Transition)> {
        self.iter().filter(|(s, _)| *s > marker).collect()
    }
}
