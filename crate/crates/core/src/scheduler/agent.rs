use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::ddpg::DdpgNets;
use super::env::{RewardMode, SlotEvaluator};
use super::mdp::{maxmin_objective, reward, DemandSet, SchedulerState, SlotRecord};
use super::project::project_to_schedule;
use super::replay::{ReplayBuffer, ReplayTransition};
use super::schedule::ScheduleMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeConfig {
    /// `E`.
    pub episodes: usize,
    /// `T`, one environment step per slot.
    pub slots: usize,
    pub reward_mode: RewardMode,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            episodes: 200,
            slots: 5,
            reward_mode: RewardMode::Similarity,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedulerRun {
    /// Reward at every slot of every episode.
    pub slot_rewards: Vec<Vec<f64>>,
    /// Final-slot reward per episode.
    pub reward_trace: Vec<f64>,
    /// Noise-free rollout of the trained actor.
    pub schedules: Vec<ScheduleMatrix>,
    pub objective: f64,
    /// Best sequence met during training or in the final rollout.
    pub best_schedules: Vec<ScheduleMatrix>,
    pub best_objective: f64,
    pub critic_losses: Vec<f64>,
}

struct Episode {
    history: Vec<SlotRecord>,
    rewards: Vec<f64>,
}

/// One environment step: actor scores, exploration, projection, evaluation.
fn act<T: Real, E: SlotEvaluator + ?Sized, R: Rng + ?Sized>(
    nets: &DdpgNets<T>,
    evaluator: &mut E,
    state: &SchedulerState,
    cfg: &EpisodeConfig,
    noise: f64,
    rng: &mut R,
) -> Result<(Vec<T>, Vec<T>, SlotRecord)> {
    let users = state.counts.len();
    let feats: Vec<T> = state.features(cfg.slots).into_iter().map(T::lit).collect();
    let scores = nets.actor_forward(&feats)?;
    let action = nets.explore(&scores, noise, rng);
    let schedule = project_to_schedule(users, &action)?;
    let outcome = evaluator.evaluate(&schedule)?;
    let values = outcome.values(cfg.reward_mode).clone();
    Ok((feats, action, SlotRecord { schedule, values }))
}

/// DDPG over the scheduling MDP.
///
/// Each slot the actor's noisy scores are projected to a schedule, scored by
/// `evaluator`, and stored. Every `R_f` steps (once the buffer holds a batch)
/// the critic and actor take one step each; every `U_f` steps the targets are
/// blended. Exploration noise decays once per episode.
pub fn train_scheduler<T: Real, E: SlotEvaluator + ?Sized, R: Rng + ?Sized>(
    nets: &mut DdpgNets<T>,
    evaluator: &mut E,
    demand: &DemandSet,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Result<SchedulerRun> {
    let users = demand.users();
    if evaluator.users() != users {
        return Err(Error::invalid("evaluator and demand set disagree on user count"));
    }
    if cfg.slots == 0 {
        return Err(Error::invalid("episodes need T ≥ 1"));
    }
    if nets.state_dim() != users + 1 || nets.action_dim() != users * users {
        return Err(Error::invalid(format!(
            "networks sized {}→{} but {users} users need {}→{}",
            nets.state_dim(),
            nets.action_dim(),
            users + 1,
            users * users
        )));
    }
    let dcfg = nets.config().clone();
    let mut buffer = ReplayBuffer::new(dcfg.capacity)?;
    let mut noise = dcfg.noise_scale;
    let mut steps = 0usize;
    let mut slot_rewards = Vec::with_capacity(cfg.episodes);
    let mut reward_trace = Vec::with_capacity(cfg.episodes);
    let mut critic_losses = Vec::new();
    let mut best: Option<(f64, Vec<ScheduleMatrix>)> = None;

    for ep in 0..cfg.episodes {
        let mut state = SchedulerState::initial(users);
        let mut history = Vec::with_capacity(cfg.slots);
        let mut rewards = Vec::with_capacity(cfg.slots);
        for t in 0..cfg.slots {
            let ctx = |e: Error| e.context(format!("episode {ep}, slot {t}"));
            let (feats, action, record) = act(nets, evaluator, &state, cfg, noise, rng).map_err(ctx)?;
            let next = state.advance(&record.schedule)?;
            history.push(record);
            let r = reward(&history, demand)?;
            rewards.push(r);
            buffer.push(ReplayTransition {
                state: feats,
                action,
                reward: T::lit(r),
                next_state: next.features(cfg.slots).into_iter().map(T::lit).collect(),
                terminal: t + 1 == cfg.slots,
            });
            state = next;
            steps += 1;
            if steps.is_multiple_of(dcfg.replay_every) && buffer.len() >= dcfg.batch_size {
                let batch = buffer.sample(dcfg.batch_size, rng)?;
                let loss = nets.critic_update(&batch).map_err(ctx)?;
                critic_losses.push(loss.to_f64_lossy());
                nets.actor_update(&batch).map_err(ctx)?;
            }
            if steps.is_multiple_of(dcfg.target_every) {
                nets.soft_update(dcfg.tau)?;
            }
        }
        let episode = Episode { history, rewards };
        let value = maxmin_objective(&episode.history, demand, cfg.slots)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, episode.history.iter().map(|s| s.schedule.clone()).collect()));
        }
        reward_trace.push(*episode.rewards.last().expect("T ≥ 1"));
        slot_rewards.push(episode.rewards);
        noise *= dcfg.noise_decay;
    }

    let mut state = SchedulerState::initial(users);
    let mut schedules = Vec::with_capacity(cfg.slots);
    let mut greedy = Vec::with_capacity(cfg.slots);
    for t in 0..cfg.slots {
        let (_, _, record) =
            act(nets, evaluator, &state, cfg, 0.0, rng).map_err(|e| e.context(format!("greedy rollout, slot {t}")))?;
        state = state.advance(&record.schedule)?;
        schedules.push(record.schedule.clone());
        greedy.push(record);
    }
    let objective = maxmin_objective(&greedy, demand, cfg.slots)?;
    let (best_objective, best_schedules) = match best {
        Some((b, s)) if b > objective => (b, s),
        _ => (objective, schedules.clone()),
    };
    Ok(SchedulerRun {
        slot_rewards,
        reward_trace,
        schedules,
        objective,
        best_schedules,
        best_objective,
        critic_losses,
    })
}
