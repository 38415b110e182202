use crate::error::{Error, Result};

use super::env::{RewardMode, SlotEvaluator, SlotOutcome};
use super::mdp::{maxmin_objective, DemandSet, SlotRecord};
use super::schedule::ScheduleMatrix;

/// Default cap on the number of enumerated schedule sequences.
pub const ORACLE_LIMIT: f64 = 2.0e6;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub schedules: Vec<ScheduleMatrix>,
    pub objective: f64,
}

fn multisets(kinds: usize, slots: usize) -> f64 {
    // C(kinds + slots − 1, slots)
    (0..slots).fold(1.0, |acc, i| acc * (kinds + i) as f64 / (i + 1) as f64)
}

/// Exact max-min optimum over all half-duplex schedule sequences of length `slots`.
///
/// The evaluator must score a schedule independently of the slot it occupies;
/// the objective is then order-free and only multisets are enumerated. The
/// first optimum in lexicographic schedule order wins ties.
pub fn exhaustive_oracle<E: SlotEvaluator + ?Sized>(
    evaluator: &mut E,
    demand: &DemandSet,
    slots: usize,
    mode: RewardMode,
    limit: f64,
) -> Result<OracleResult> {
    let users = evaluator.users();
    if users != demand.users() {
        return Err(Error::invalid("evaluator and demand set disagree on user count"));
    }
    if slots == 0 {
        return Err(Error::invalid("oracle needs T ≥ 1"));
    }
    let all = ScheduleMatrix::enumerate(users)?;
    let estimate = multisets(all.len(), slots);
    if estimate > limit {
        return Err(Error::TooLarge { estimate, limit });
    }

    let mut scored: Vec<SlotOutcome> = Vec::with_capacity(all.len());
    for s in &all {
        scored.push(evaluator.evaluate(s)?);
    }

    let mut idx = vec![0usize; slots];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let history: Vec<SlotRecord> = idx
            .iter()
            .map(|&i| SlotRecord {
                schedule: all[i].clone(),
                values: scored[i].values(mode).clone(),
            })
            .collect();
        let v = maxmin_objective(&history, demand, slots)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, idx.clone()));
        }
        // next nondecreasing index tuple
        let mut p = slots;
        while p > 0 && idx[p - 1] == all.len() - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        let next = idx[p - 1] + 1;
        idx[p - 1..].iter_mut().for_each(|i| *i = next);
    }
    let (objective, picks) = best.expect("at least one sequence");
    Ok(OracleResult {
        schedules: picks.into_iter().map(|i| all[i].clone()).collect(),
        objective,
    })
}
