use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::autodiff::nn::{Activation, Mlp};
use crate::autodiff::{Adam, Binding, Gradients, Optimizer, ParameterSet, Tape, Var};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::replay::ReplayTransition;

#[derive(Clone, Debug, PartialEq)]
pub struct DdpgConfig {
    /// `λ_d`.
    pub discount: f64,
    /// Soft-update rate `τ`.
    pub tau: f64,
    /// `R_f`: learn every this many environment steps.
    pub replay_every: usize,
    /// `U_f`: blend targets every this many environment steps.
    pub target_every: usize,
    pub capacity: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Exploration noise standard deviation at the first episode.
    pub noise_scale: f64,
    /// Per-episode multiplicative noise decay.
    pub noise_decay: f64,
    /// Noise samples are clipped to `±noise_clip`.
    pub noise_clip: f64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            discount: 0.95,
            tau: 0.01,
            replay_every: 4,
            target_every: 16,
            capacity: 10_000,
            batch_size: 64,
            hidden: 64,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            noise_scale: 0.2,
            noise_decay: 0.995,
            noise_clip: 0.5,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::invalid("discount must lie in [0, 1]"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::invalid("tau must lie in (0, 1]"));
        }
        if self.replay_every == 0 || self.target_every == 0 || self.capacity == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::invalid("DDPG frequencies and sizes must be positive"));
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0 && self.noise_scale >= 0.0 && self.noise_clip >= 0.0) {
            return Err(Error::invalid("DDPG rates and noise must be nonnegative"));
        }
        if !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return Err(Error::invalid("noise decay must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Online and target actor/critic with their optimisers.
#[derive(Clone, Debug)]
pub struct DdpgNets<T> {
    state_dim: usize,
    action_dim: usize,
    cfg: DdpgConfig,
    actor: ParameterSet<T>,
    critic: ParameterSet<T>,
    target_actor: ParameterSet<T>,
    target_critic: ParameterSet<T>,
    actor_opt: Adam<T>,
    critic_opt: Adam<T>,
}

fn matrix<T: Real>(tape: &mut Tape<T>, rows: &[&[T]], width: usize) -> Result<Var> {
    let mut values = Vec::with_capacity(rows.len() * width);
    for r in rows {
        if r.len() != width {
            return Err(Error::Shape {
                op: "ddpg input",
                lhs: vec![width],
                rhs: vec![r.len()],
            });
        }
        values.extend_from_slice(r);
    }
    tape.constant([rows.len(), width], values)
}

impl<T: Real> DdpgNets<T> {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, cfg: DdpgConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::invalid("state and action dimensions must be positive"));
        }
        let mut nets = Self {
            state_dim,
            action_dim,
            actor_opt: Adam::new(T::lit(cfg.actor_lr)),
            critic_opt: Adam::new(T::lit(cfg.critic_lr)),
            cfg,
            actor: ParameterSet::new(),
            critic: ParameterSet::new(),
            target_actor: ParameterSet::new(),
            target_critic: ParameterSet::new(),
        };
        nets.actor_mlp().init(&mut nets.actor, rng)?;
        nets.critic_mlp().init(&mut nets.critic, rng)?;
        nets.target_actor = nets.actor.clone();
        nets.target_critic = nets.critic.clone();
        Ok(nets)
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.cfg
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn actor_mlp(&self) -> Mlp {
        let h = self.cfg.hidden;
        Mlp::new("actor", &[self.state_dim, h, h, self.action_dim], Activation::Relu, Activation::Sigmoid)
    }

    pub fn critic_mlp(&self) -> Mlp {
        let h = self.cfg.hidden;
        Mlp::new("critic", &[self.state_dim + self.action_dim, h, h, 1], Activation::Relu, Activation::Identity)
    }

    pub fn actor(&self) -> &ParameterSet<T> {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut ParameterSet<T> {
        &mut self.actor
    }

    pub fn critic(&self) -> &ParameterSet<T> {
        &self.critic
    }

    pub fn critic_mut(&mut self) -> &mut ParameterSet<T> {
        &mut self.critic
    }

    pub fn target_actor(&self) -> &ParameterSet<T> {
        &self.target_actor
    }

    pub fn target_critic(&self) -> &ParameterSet<T> {
        &self.target_critic
    }

    pub fn target_critic_mut(&mut self) -> &mut ParameterSet<T> {
        &mut self.target_critic
    }

    /// Copies the online weights into the targets.
    pub fn sync_targets(&mut self) {
        self.target_actor = self.actor.clone();
        self.target_critic = self.critic.clone();
    }

    fn policy(&self, params: &ParameterSet<T>, state: &[T]) -> Result<Vec<T>> {
        let mut tape = Tape::new();
        let b = params.bind(&mut tape);
        let x = matrix(&mut tape, &[state], self.state_dim)?;
        let y = self.actor_mlp().forward(&mut tape, &b, x)?;
        Ok(tape.value(y).to_vec())
    }

    /// Deterministic scores in `(0, 1)` from the online actor.
    pub fn actor_forward(&self, state: &[T]) -> Result<Vec<T>> {
        self.policy(&self.actor, state)
    }

    pub fn target_actor_forward(&self, state: &[T]) -> Result<Vec<T>> {
        self.policy(&self.target_actor, state)
    }

    /// Adds clipped Gaussian noise of standard deviation `scale` and clamps
    /// the result to `[0, 1]`.
    pub fn explore<R: Rng + ?Sized>(&self, scores: &[T], scale: f64, rng: &mut R) -> Vec<T> {
        if scale <= 0.0 {
            return scores.to_vec();
        }
        let normal = Normal::new(0.0, scale).expect("positive scale");
        let clip = self.cfg.noise_clip;
        scores
            .iter()
            .map(|&s| {
                let n = normal.sample(rng).clamp(-clip, clip);
                (s + T::lit(n)).max(T::zero()).min(T::one())
            })
            .collect()
    }

    fn critic_graph(&self, tape: &mut Tape<T>, b: &Binding, states: Var, actions: Var) -> Result<Var> {
        let x = tape.concat(&[states, actions])?;
        self.critic_mlp().forward(tape, b, x)
    }

    fn q_with(&self, params: &ParameterSet<T>, states: &[&[T]], actions: &[&[T]]) -> Result<Vec<T>> {
        let mut tape = Tape::new();
        let b = params.bind(&mut tape);
        let s = matrix(&mut tape, states, self.state_dim)?;
        let a = matrix(&mut tape, actions, self.action_dim)?;
        let q = self.critic_graph(&mut tape, &b, s, a)?;
        Ok(tape.value(q).to_vec())
    }

    pub fn q_value(&self, state: &[T], action: &[T]) -> Result<T> {
        Ok(self.q_with(&self.critic, &[state], &[action])?[0])
    }

    pub fn target_q_value(&self, state: &[T], action: &[T]) -> Result<T> {
        Ok(self.q_with(&self.target_critic, &[state], &[action])?[0])
    }

    /// `y_i = r_i + λ_d·Q'(o_{i+1}, π'(o_{i+1}))`, without the bootstrap
    /// term for terminal transitions.
    pub fn td_targets(&self, batch: &[&ReplayTransition<T>]) -> Result<Vec<T>> {
        let discount = T::lit(self.cfg.discount);
        batch
            .iter()
            .map(|t| {
                if t.terminal || self.cfg.discount == 0.0 {
                    return Ok(t.reward);
                }
                let a = self.target_actor_forward(&t.next_state)?;
                Ok(t.reward + discount * self.target_q_value(&t.next_state, &a)?)
            })
            .collect()
    }

    fn critic_tape(&self, batch: &[&ReplayTransition<T>], targets: &[T]) -> Result<(Tape<T>, Binding, Var)> {
        if batch.is_empty() || batch.len() != targets.len() {
            return Err(Error::invalid("critic batch and targets must be nonempty and aligned"));
        }
        let mut tape = Tape::new();
        let b = self.critic.bind(&mut tape);
        let states: Vec<&[T]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let actions: Vec<&[T]> = batch.iter().map(|t| t.action.as_slice()).collect();
        let s = matrix(&mut tape, &states, self.state_dim)?;
        let a = matrix(&mut tape, &actions, self.action_dim)?;
        let q = self.critic_graph(&mut tape, &b, s, a)?;
        let y = tape.constant([batch.len(), 1], targets.to_vec())?;
        let d = tape.sub(q, y)?;
        let sq = tape.square(d);
        let loss = tape.mean(sq);
        Ok((tape, b, loss))
    }

    /// Mean squared TD error of the online critic against `targets`.
    pub fn critic_loss(&self, batch: &[&ReplayTransition<T>], targets: &[T]) -> Result<T> {
        let (tape, _, loss) = self.critic_tape(batch, targets)?;
        Ok(tape.item(loss))
    }

    /// Loss and its gradient per critic parameter.
    pub fn critic_gradients(&self, batch: &[&ReplayTransition<T>], targets: &[T]) -> Result<(T, Vec<(String, Vec<T>)>)> {
        let (mut tape, b, loss) = self.critic_tape(batch, targets)?;
        let value = tape.item(loss);
        let grads = tape.backward(loss)?;
        Ok((value, collect(&self.critic, &b, &grads)?))
    }

    /// One gradient step on the TD error; returns the pre-step loss.
    pub fn critic_update(&mut self, batch: &[&ReplayTransition<T>]) -> Result<T> {
        let targets = self.td_targets(batch)?;
        let (mut tape, b, loss) = self.critic_tape(batch, &targets)?;
        let value = tape.item(loss);
        if !value.is_finite() {
            return Err(Error::NonFinite { name: "critic loss".into() });
        }
        let grads = tape.backward(loss)?;
        self.critic.accumulate(&b, &grads)?;
        self.critic_opt.step(&mut self.critic)?;
        Ok(value)
    }

    /// Records `−mean(q(o, π(o)))` for the online actor, with `q` building a
    /// `[B, 1]` value from state and action nodes.
    fn actor_tape<F>(&self, states: &[&[T]], q: F) -> Result<(Tape<T>, Binding, Var)>
    where
        F: FnOnce(&mut Tape<T>, Var, Var) -> Result<Var>,
    {
        if states.is_empty() {
            return Err(Error::invalid("actor batch is empty"));
        }
        let mut tape = Tape::new();
        let b = self.actor.bind(&mut tape);
        let s = matrix(&mut tape, states, self.state_dim)?;
        let a = self.actor_mlp().forward(&mut tape, &b, s)?;
        let v = q(&mut tape, s, a)?;
        let m = tape.mean(v);
        let loss = tape.neg(m);
        Ok((tape, b, loss))
    }

    /// Gradient step on the actor that ascends a caller-supplied value
    /// `q(state, action)`. Returns the mean value before the step.
    pub fn actor_update_with<F>(&mut self, states: &[&[T]], q: F) -> Result<T>
    where
        F: FnOnce(&mut Tape<T>, Var, Var) -> Result<Var>,
    {
        let (mut tape, b, loss) = self.actor_tape(states, q)?;
        let value = -tape.item(loss);
        let grads = tape.backward(loss)?;
        self.actor.accumulate(&b, &grads)?;
        self.actor_opt.step(&mut self.actor)?;
        Ok(value)
    }

    fn critic_as_value(&self) -> impl FnOnce(&mut Tape<T>, Var, Var) -> Result<Var> + '_ {
        move |tape: &mut Tape<T>, s: Var, a: Var| {
            let cb = self.critic.bind(tape);
            self.critic_graph(tape, &cb, s, a)
        }
    }

    /// Mean online-critic value of the online policy on `states`.
    pub fn actor_objective(&self, states: &[&[T]]) -> Result<T> {
        let (tape, _, loss) = self.actor_tape(states, self.critic_as_value())?;
        Ok(-tape.item(loss))
    }

    /// Gradient of `−actor_objective` per actor parameter.
    pub fn actor_gradients(&self, states: &[&[T]]) -> Result<Vec<(String, Vec<T>)>> {
        let (mut tape, b, loss) = self.actor_tape(states, self.critic_as_value())?;
        let grads = tape.backward(loss)?;
        collect(&self.actor, &b, &grads)
    }

    /// Deterministic policy-gradient step through the online critic.
    pub fn actor_update(&mut self, batch: &[&ReplayTransition<T>]) -> Result<T> {
        let states: Vec<&[T]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let (mut tape, b, loss) = self.actor_tape(&states, self.critic_as_value())?;
        let value = -tape.item(loss);
        let grads = tape.backward(loss)?;
        self.actor.accumulate(&b, &grads)?;
        self.actor_opt.step(&mut self.actor)?;
        Ok(value)
    }

    /// `θ' ← τθ + (1−τ)θ'` for both actor and critic.
    pub fn soft_update(&mut self, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::invalid(format!("soft-update rate {tau} outside (0, 1]")));
        }
        self.target_actor.blend_from(&self.actor, T::lit(tau))?;
        self.target_critic.blend_from(&self.critic, T::lit(tau))?;
        Ok(())
    }

    /// All four networks in one set; targets carry a `target.` prefix.
    pub fn checkpoint(&self) -> Result<ParameterSet<T>> {
        let mut out = ParameterSet::new();
        for (prefix, set) in [("", &self.actor), ("", &self.critic), ("target.", &self.target_actor), ("target.", &self.target_critic)] {
            for (name, t) in set.iter() {
                out.insert(format!("{prefix}{name}"), t.clone())?;
            }
        }
        Ok(out)
    }

    /// Restores weights from [`checkpoint`](Self::checkpoint) output.
    pub fn restore(&mut self, ckpt: &ParameterSet<T>) -> Result<()> {
        for (prefix, set) in [
            ("", &mut self.actor),
            ("", &mut self.critic),
            ("target.", &mut self.target_actor),
            ("target.", &mut self.target_critic),
        ] {
            for (name, t) in set.iter_mut() {
                let src = ckpt.get(&format!("{prefix}{name}"))?;
                if src.shape() != t.shape() {
                    return Err(Error::Shape {
                        op: "restore",
                        lhs: t.shape().to_vec(),
                        rhs: src.shape().to_vec(),
                    });
                }
                t.values_mut().copy_from_slice(src.values());
            }
        }
        Ok(())
    }
}

fn collect<T: Real>(params: &ParameterSet<T>, b: &Binding, grads: &Gradients<T>) -> Result<Vec<(String, Vec<T>)>> {
    params
        .iter()
        .map(|(name, t)| {
            let v = b.var(name)?;
            Ok((name.to_string(), grads.get(v).map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); t.len()])))
        })
        .collect()
}
