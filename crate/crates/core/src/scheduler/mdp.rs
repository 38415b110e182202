use crate::channel::PairTable;
use crate::error::{Error, Result};

use super::schedule::ScheduleMatrix;

/// Ordered user pairs whose worst accumulated service is maximised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSet {
    users: usize,
    pairs: Vec<(usize, usize)>,
}

impl DemandSet {
    pub fn new(users: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("demand set is empty"));
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &(r, k) in &sorted {
            if r >= users || k >= users {
                return Err(Error::invalid(format!("demand pair ({r}, {k}) outside {users} users")));
            }
            if r == k {
                return Err(Error::invalid(format!("demand pair ({r}, {k}) needs distinct users")));
            }
        }
        Ok(Self { users, pairs: sorted })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// One slot of history: the schedule and a per-pair quality table
/// (similarity `ξ` or SINR `γ`, depending on the reward mode).
#[derive(Clone, Debug, PartialEq)]
pub struct SlotRecord {
    pub schedule: ScheduleMatrix,
    pub values: PairTable<f64>,
}

/// Per-user activity counts `o(t)` and the slot index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulerState {
    pub counts: Vec<u64>,
    pub slot: usize,
}

impl SchedulerState {
    pub fn initial(users: usize) -> Self {
        Self {
            counts: vec![0; users],
            slot: 0,
        }
    }

    pub fn advance(&self, schedule: &ScheduleMatrix) -> Result<Self> {
        Ok(Self {
            counts: state_update(&self.counts, schedule)?,
            slot: self.slot + 1,
        })
    }

    /// Network input: counts divided by `slots`, then the slot fraction.
    pub fn features(&self, slots: usize) -> Vec<f64> {
        let s = slots.max(1) as f64;
        self.counts
            .iter()
            .map(|&c| c as f64 / s)
            .chain(std::iter::once(self.slot as f64 / s))
            .collect()
    }
}

/// `o(t)[j] = o(t−1)[j] + Σ_{i≠j} B[j,i] + Σ_{i≠j} B[i,j]`.
pub fn state_update(prev: &[u64], schedule: &ScheduleMatrix) -> Result<Vec<u64>> {
    let k = schedule.users();
    if prev.len() != k {
        return Err(Error::Shape {
            op: "state_update",
            lhs: vec![k],
            rhs: vec![prev.len()],
        });
    }
    Ok((0..k)
        .map(|j| {
            let out = (0..k).filter(|&i| i != j && schedule.get(j, i)).count();
            let inc = (0..k).filter(|&i| i != j && schedule.get(i, j)).count();
            prev[j] + (out + inc) as u64
        })
        .collect())
}

/// Per demand pair: `Σ_i B_i[r,k]·v_i(r,k)` over the history.
pub fn accumulated(history: &[SlotRecord], demand: &DemandSet) -> Result<Vec<f64>> {
    demand
        .pairs()
        .iter()
        .map(|&(r, k)| {
            history.iter().try_fold(0.0, |acc, slot| {
                if slot.schedule.users() != demand.users() || slot.values.users() != demand.users() {
                    return Err(Error::invalid("history and demand set disagree on user count"));
                }
                Ok(if slot.schedule.get(r, k) { acc + *slot.values.get(r, k) } else { acc })
            })
        })
        .collect()
}

/// `min_{(r,k) ∈ demand} Σ_{i ≤ t} B_i[r,k]·v_i(r,k)`.
pub fn reward(history: &[SlotRecord], demand: &DemandSet) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::invalid("reward needs at least one slot"));
    }
    Ok(accumulated(history, demand)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Reported objective: `(1/T)·min_{(r,k)} Σ_t B_t[r,k]·v_t(r,k)`.
pub fn maxmin_objective(history: &[SlotRecord], demand: &DemandSet, slots: usize) -> Result<f64> {
    if slots == 0 {
        return Err(Error::invalid("objective needs T ≥ 1"));
    }
    if history.len() > slots {
        return Err(Error::invalid(format!("history of {} slots exceeds T = {slots}", history.len())));
    }
    let worst = accumulated(history, demand)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(worst / slots as f64)
}
