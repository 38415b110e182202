use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayTransition<T> {
    pub state: Vec<T>,
    /// Continuous pre-projection action.
    pub action: Vec<T>,
    pub reward: T,
    pub next_state: Vec<T>,
    /// Last slot of an episode: no bootstrap from `next_state`.
    pub terminal: bool,
}

/// Fixed-capacity FIFO store sampled uniformly with replacement.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<ReplayTransition<T>>,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
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

    pub fn push(&mut self, t: ReplayTransition<T>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReplayTransition<T>> {
        self.items.iter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&ReplayTransition<T>>> {
        if self.items.is_empty() {
            return Err(Error::invalid("cannot sample an empty replay buffer"));
        }
        Ok((0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }
}
