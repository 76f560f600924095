//! SAC state and single-update mechanics: twin critics regressed onto the
//! soft Bellman target, a reparameterized tanh-Gaussian actor and an
//! auto-tuned entropy temperature.

use rand::Rng;
use rand_distr::StandardNormal;

use super::replay::{ReplayBuffer, StoredObs, StoredTransition};
use super::AgentError;
use crate::env::{Observation, N_SCALARS};
use crate::nn::{
    backward, clamp_log_std, forward, init_params, AdamConfig, AdamState, NetworkSpec, NnError,
    Params, ScalarAdam, Tensor, TANH_EPS,
};

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SacConfig {
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Env steps driven by uniform-random actions before the policy is used.
    pub warmup_steps: usize,
    pub target_entropy: f64,
    pub updates_per_env_step: usize,
    pub seed: u64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            gamma: 0.99,
            tau: 0.005,
            lr: 3e-4,
            batch_size: 256,
            buffer_capacity: 200_000,
            warmup_steps: 1000,
            target_entropy: -(ACTION_DIM as f64),
            updates_per_env_step: 1,
            seed: 0,
        }
    }
}

/// Front-end shared by the actor and both critics (separate weights).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureNet {
    /// Two conv stages feeding a dense trunk.
    Cnn,
    /// Flattened image straight into dense layers.
    Dense { hidden: usize },
}

fn build_spec(rows: usize, cols: usize, feature: FeatureNet, side: usize, output: usize) -> NetworkSpec {
    match feature {
        FeatureNet::Cnn => NetworkSpec::cnn_sac(rows, cols, side, output),
        FeatureNet::Dense { hidden } => NetworkSpec::dense_sac(rows, cols, side, hidden, output),
    }
}

#[derive(Debug, Clone)]
struct Network {
    params: Params<f64>,
    adam: AdamState<f64>,
}

impl Network {
    fn new<R: Rng>(spec: &NetworkSpec, rng: &mut R) -> Self {
        let params = init_params::<f64, _>(spec, rng);
        let adam = AdamState::new(&params);
        Network { params, adam }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct SacState {
    pub actor_spec: NetworkSpec,
    pub critic_spec: NetworkSpec,
    actor: Network,
    critic1: Network,
    critic2: Network,
    target1: Params<f64>,
    target2: Params<f64>,
    log_alpha: f64,
    alpha_adam: ScalarAdam<f64>,
    adam_cfg: AdamConfig<f64>,
    pub updates: u64,
}

impl SacState {
    /// Fresh networks for a rows x cols depth image. The actor emits
    /// [mean, log_std] per action axis; critics take the action as extra
    /// side scalars and emit one value.
    pub fn new<R: Rng>(rows: usize, cols: usize, feature: FeatureNet, cfg: &SacConfig, rng: &mut R) -> Self {
        let actor_spec = build_spec(rows, cols, feature, N_SCALARS, 2 * ACTION_DIM);
        let critic_spec = build_spec(rows, cols, feature, N_SCALARS + ACTION_DIM, 1);
        let actor = Network::new(&actor_spec, rng);
        let critic1 = Network::new(&critic_spec, rng);
        let critic2 = Network::new(&critic_spec, rng);
        let target1 = critic1.params.clone();
        let target2 = critic2.params.clone();
        SacState {
            actor_spec,
            critic_spec,
            actor,
            critic1,
            critic2,
            target1,
            target2,
            log_alpha: 0.0,
            alpha_adam: ScalarAdam::default(),
            adam_cfg: AdamConfig::with_lr(cfg.lr),
            updates: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn actor_params(&self) -> &Params<f64> {
        &self.actor.params
    }

    pub fn actor_params_mut(&mut self) -> &mut Params<f64> {
        &mut self.actor.params
    }

    pub fn critic_params(&self) -> (&Params<f64>, &Params<f64>) {
        (&self.critic1.params, &self.critic2.params)
    }

    pub fn target_params(&self) -> (&Params<f64>, &Params<f64>) {
        (&self.target1, &self.target2)
    }

    fn actor_heads(&self, obs: &StoredObs) -> ([f64; ACTION_DIM], [f64; ACTION_DIM]) {
        let image = Tensor::from_vec(&[obs.image.len()], obs.image.clone());
        let scalars = Tensor::from_vec(&[N_SCALARS], obs.scalars.to_vec());
        let (out, _) = forward(&self.actor_spec, &self.actor.params, &image, &scalars)
            .expect("actor spec matches observation");
        let mut mean = [0.0; ACTION_DIM];
        let mut log_std = [0.0; ACTION_DIM];
        for i in 0..ACTION_DIM {
            mean[i] = out.data[i];
            log_std[i] = out.data[ACTION_DIM + i];
        }
        (mean, log_std)
    }

    fn critic_value(&self, params: &Params<f64>, obs: &StoredObs, action: &[f64; ACTION_DIM]) -> f64 {
        let image = Tensor::from_vec(&[obs.image.len()], obs.image.clone());
        let mut side = obs.scalars.to_vec();
        side.extend_from_slice(action);
        let scalars = Tensor::from_vec(&[side.len()], side);
        let (out, _) = forward(&self.critic_spec, params, &image, &scalars)
            .expect("critic spec matches observation");
        out.data[0]
    }
}

/// theta' <- tau*theta + (1-tau)*theta'.
pub fn polyak_update(target: &mut Params<f64>, online: &Params<f64>, tau: f64) -> Result<(), NnError> {
    if target.layers.len() != online.layers.len() {
        return Err(NnError::ShapeMismatch("target/online layer counts differ".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        if t.weight.data.len() != o.weight.data.len() || t.bias.data.len() != o.bias.data.len() {
            return Err(NnError::ShapeMismatch("target/online layer sizes differ".into()));
        }
        for (tv, ov) in t.weight.data.iter_mut().zip(&o.weight.data) {
            *tv = tau * ov + (1.0 - tau) * *tv;
        }
        for (tv, ov) in t.bias.data.iter_mut().zip(&o.bias.data) {
            *tv = tau * ov + (1.0 - tau) * *tv;
        }
    }
    Ok(())
}

/// Policy head: deterministic takes tanh(mean); stochastic draws the
/// reparameterized tanh-Gaussian sample.
pub fn select_action<R: Rng>(
    sac: &SacState,
    obs: &Observation<f64>,
    deterministic: bool,
    rng: &mut R,
) -> [f64; ACTION_DIM] {
    let stored = StoredObs::from_observation(obs);
    let (mean, log_std) = sac.actor_heads(&stored);
    let mut action = [0.0; ACTION_DIM];
    if deterministic {
        for i in 0..ACTION_DIM {
            action[i] = mean[i].tanh();
        }
    } else {
        for i in 0..ACTION_DIM {
            let noise: f64 = rng.sample(StandardNormal);
            let u = mean[i] + clamp_log_std(log_std[i]).exp() * noise;
            action[i] = u.tanh();
        }
    }
    action
}

/// tanh(mean) from a standalone actor network (a loaded policy file).
pub fn deterministic_action(
    spec: &NetworkSpec,
    params: &Params<f64>,
    obs: &Observation<f64>,
) -> Result<[f64; ACTION_DIM], NnError> {
    let image = Tensor::from_vec(&[obs.image.len()], obs.image.clone());
    let scalars = Tensor::from_vec(&[N_SCALARS], obs.scalars.to_vec());
    let (out, _) = forward(spec, params, &image, &scalars)?;
    if out.data.len() != 2 * ACTION_DIM {
        return Err(NnError::ShapeMismatch(format!(
            "policy head has {} outputs, expected {}",
            out.data.len(),
            2 * ACTION_DIM
        )));
    }
    Ok([out.data[0].tanh(), out.data[1].tanh()])
}

fn sample_squashed<R: Rng>(
    mean: &[f64; ACTION_DIM],
    log_std: &[f64; ACTION_DIM],
    rng: &mut R,
) -> ([f64; ACTION_DIM], [f64; ACTION_DIM], f64) {
    let mut action = [0.0; ACTION_DIM];
    let mut noise = [0.0; ACTION_DIM];
    let mut log_prob = 0.0;
    for i in 0..ACTION_DIM {
        let ls = clamp_log_std(log_std[i]);
        let eps: f64 = rng.sample(StandardNormal);
        noise[i] = eps;
        let u = mean[i] + ls.exp() * eps;
        let t = u.tanh();
        action[i] = t;
        log_prob += -0.5 * eps * eps - ls - 0.5 * (2.0 * std::f64::consts::PI).ln()
            - (1.0 - t * t + TANH_EPS).ln();
    }
    (action, noise, log_prob)
}

/// Soft Bellman targets y = r + gamma*(1-done)*(min Q' - alpha*logpi) with
/// the next action freshly sampled from the current actor.
pub fn critic_target<R: Rng>(
    sac: &SacState,
    batch: &[&StoredTransition],
    cfg: &SacConfig,
    rng: &mut R,
) -> Vec<f64> {
    let alpha = sac.alpha();
    batch
        .iter()
        .map(|tr| {
            if tr.done {
                return tr.reward;
            }
            let (mean, log_std) = sac.actor_heads(&tr.next_obs);
            let (a, _, log_prob) = sample_squashed(&mean, &log_std, rng);
            let q1 = sac.critic_value(&sac.target1, &tr.next_obs, &a);
            let q2 = sac.critic_value(&sac.target2, &tr.next_obs, &a);
            tr.reward + cfg.gamma * (q1.min(q2) - alpha * log_prob)
        })
        .collect()
}

fn accumulate(into: &mut Params<f64>, from: &[crate::nn::Params<f64>]) {
    for p in from {
        for (dst, src) in into.layers.iter_mut().zip(&p.layers) {
            for (d, s) in dst.weight.data.iter_mut().zip(&src.weight.data) {
                *d += s;
            }
            for (d, s) in dst.bias.data.iter_mut().zip(&src.bias.data) {
                *d += s;
            }
        }
    }
}

/// One gradient step on both critics, the actor and the temperature from a
/// uniformly sampled batch, followed by target polyak updates.
pub fn update_step<R: Rng>(
    sac: &mut SacState,
    buffer: &ReplayBuffer,
    cfg: &SacConfig,
    rng: &mut R,
) -> Result<Losses, AgentError> {
    if buffer.len() < cfg.batch_size {
        return Err(AgentError::BufferTooSmall { have: buffer.len(), need: cfg.batch_size });
    }
    let indices = buffer.sample_indices(cfg.batch_size, rng);
    let batch: Vec<&StoredTransition> = indices.iter().map(|&i| buffer.get(i)).collect();
    let targets = critic_target(sac, &batch, cfg, rng);
    let inv_b = 1.0 / cfg.batch_size as f64;

    // Critic regression onto y: per-sample grad on the value head is
    // 2*(q - y)/B.
    let mut critic_losses = [0.0; 2];
    for (ci, loss_slot) in critic_losses.iter_mut().enumerate() {
        let (params, spec) = if ci == 0 {
            (&sac.critic1.params, &sac.critic_spec)
        } else {
            (&sac.critic2.params, &sac.critic_spec)
        };
        let mut grads = params.zeros_like();
        let mut loss = 0.0;
        let mut per_sample = Vec::with_capacity(batch.len());
        for (tr, &y) in batch.iter().zip(&targets) {
            let image = Tensor::from_vec(&[tr.obs.image.len()], tr.obs.image.clone());
            let mut side = tr.obs.scalars.to_vec();
            side.extend_from_slice(&tr.action);
            let scalars = Tensor::from_vec(&[side.len()], side);
            let (out, cache) = forward(spec, params, &image, &scalars)?;
            let e = out.data[0] - y;
            loss += e * e * inv_b;
            let g = backward(spec, params, &cache, &[2.0 * e * inv_b])?;
            per_sample.push(Params { layers: g.layers });
        }
        accumulate(&mut grads, &per_sample);
        let net = if ci == 0 { &mut sac.critic1 } else { &mut sac.critic2 };
        net.adam.step(&mut net.params, &grads, &sac.adam_cfg);
        *loss_slot = loss;
    }

    // Actor: L = mean(alpha*logpi - min Q) with a reparameterized sample;
    // the head gradients are hand-derived through tanh and the clamp.
    let alpha = sac.alpha();
    let mut actor_grads = sac.actor.params.zeros_like();
    let mut actor_loss = 0.0;
    let mut alpha_grad = 0.0;
    let mut alpha_loss = 0.0;
    let mut per_sample = Vec::with_capacity(batch.len());
    for tr in &batch {
        let image = Tensor::from_vec(&[tr.obs.image.len()], tr.obs.image.clone());
        let scalars = Tensor::from_vec(&[N_SCALARS], tr.obs.scalars.to_vec());
        let (out, cache) = forward(&sac.actor_spec, &sac.actor.params, &image, &scalars)?;
        let mut mean = [0.0; ACTION_DIM];
        let mut log_std_raw = [0.0; ACTION_DIM];
        for i in 0..ACTION_DIM {
            mean[i] = out.data[i];
            log_std_raw[i] = out.data[ACTION_DIM + i];
        }
        let (action, noise, log_prob) = sample_squashed(&mean, &log_std_raw, rng);

        let q1 = sac.critic_value(&sac.critic1.params, &tr.obs, &action);
        let q2 = sac.critic_value(&sac.critic2.params, &tr.obs, &action);
        let min_params = if q1 <= q2 { &sac.critic1.params } else { &sac.critic2.params };
        let q_min = q1.min(q2);

        // dQ/da through the critic's side input (last two scalar slots).
        let mut side = tr.obs.scalars.to_vec();
        side.extend_from_slice(&action);
        let cimage = Tensor::from_vec(&[tr.obs.image.len()], tr.obs.image.clone());
        let cside = Tensor::from_vec(&[side.len()], side);
        let (_, ccache) = forward(&sac.critic_spec, min_params, &cimage, &cside)?;
        let cgrad = backward(&sac.critic_spec, min_params, &ccache, &[1.0])?;
        let dq = &cgrad.scalars.data[N_SCALARS..];

        actor_loss += (alpha * log_prob - q_min) * inv_b;

        let mut head_grad = vec![0.0; 2 * ACTION_DIM];
        for i in 0..ACTION_DIM {
            let ls = clamp_log_std(log_std_raw[i]);
            let std = ls.exp();
            let t = action[i];
            let da_du = 1.0 - t * t;
            let dlp_du = 2.0 * t * da_du / (da_du + TANH_EPS);
            head_grad[i] = (alpha * dlp_du - dq[i] * da_du) * inv_b;
            // The clamp kills the log-std gradient outside its range.
            if log_std_raw[i] == ls {
                head_grad[ACTION_DIM + i] =
                    (alpha * (-1.0 + dlp_du * std * noise[i]) - dq[i] * da_du * std * noise[i])
                        * inv_b;
            }
        }
        let g = backward(&sac.actor_spec, &sac.actor.params, &cache, &head_grad)?;
        per_sample.push(Params { layers: g.layers });

        // Temperature loss mean(-log_alpha*(logpi + target_entropy)) with
        // logpi detached.
        alpha_loss += -sac.log_alpha * (log_prob + cfg.target_entropy) * inv_b;
        alpha_grad += -(log_prob + cfg.target_entropy) * inv_b;
    }
    accumulate(&mut actor_grads, &per_sample);
    sac.actor.adam.step(&mut sac.actor.params, &actor_grads, &sac.adam_cfg);
    sac.alpha_adam.step(&mut sac.log_alpha, alpha_grad, &sac.adam_cfg);

    polyak_update(&mut sac.target1, &sac.critic1.params, cfg.tau)?;
    polyak_update(&mut sac.target2, &sac.critic2.params, cfg.tau)?;
    sac.updates += 1;

    Ok(Losses {
        critic1: critic_losses[0],
        critic2: critic_losses[1],
        actor: actor_loss,
        alpha: alpha_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_cfg() -> SacConfig {
        SacConfig { batch_size: 4, buffer_capacity: 64, warmup_steps: 0, ..SacConfig::default() }
    }

    fn tiny_sac(seed: u64) -> SacState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SacState::new(2, 2, FeatureNet::Dense { hidden: 8 }, &tiny_cfg(), &mut rng)
    }

    fn stored(tag: f64, reward: f64, done: bool) -> StoredTransition {
        let obs = StoredObs { image: vec![tag; 4], scalars: [tag * 0.1; N_SCALARS] };
        StoredTransition { obs: obs.clone(), action: [0.1, -0.2], reward, next_obs: obs, done }
    }

    fn obs(tag: f64) -> Observation<f64> {
        Observation { rows: 2, cols: 2, image: vec![tag; 4], scalars: [tag * 0.1; N_SCALARS] }
    }

    #[test]
    fn zero_actor_head_gives_zero_deterministic_action() {
        let mut sac = tiny_sac(0);
        let n = sac.actor.params.layers.len();
        let last = &mut sac.actor.params.layers[n - 1];
        for v in last.weight.data.iter_mut() {
            *v = 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = select_action(&sac, &obs(0.3), true, &mut rng);
        assert_eq!(a, [0.0, 0.0]);
    }

    #[test]
    fn stochastic_actions_reproducible_and_bounded() {
        let sac = tiny_sac(1);
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for i in 0..50 {
            let o = obs(i as f64 / 50.0);
            let a = select_action(&sac, &o, false, &mut r1);
            let b = select_action(&sac, &o, false, &mut r2);
            assert_eq!(a, b);
            assert!(a.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn deterministic_action_is_mode_of_samples() {
        let sac = tiny_sac(2);
        let o = obs(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let det = select_action(&sac, &o, true, &mut rng);
        // tanh is monotone, so the sample mean of u maps near the mode.
        let mut sums = [0.0; ACTION_DIM];
        let n = 10_000;
        for _ in 0..n {
            let a = select_action(&sac, &o, false, &mut rng);
            for i in 0..ACTION_DIM {
                sums[i] += a[i].atanh();
            }
        }
        for i in 0..ACTION_DIM {
            let mode = (sums[i] / n as f64).tanh();
            assert!((mode - det[i]).abs() < 0.05, "axis {i}: {mode} vs {det:?}");
        }
    }

    #[test]
    fn target_is_reward_when_done() {
        let sac = tiny_sac(3);
        let cfg = tiny_cfg();
        let tr = stored(0.2, -250.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = critic_target(&sac, &[&tr], &cfg, &mut rng);
        assert_eq!(y, vec![-250.0]);
    }

    #[test]
    fn target_matches_scalar_recomputation() {
        let sac = tiny_sac(4);
        let cfg = tiny_cfg();
        let batch: Vec<StoredTransition> =
            (0..6).map(|i| stored(i as f64 * 0.1, i as f64, i % 3 == 0)).collect();
        let refs: Vec<&StoredTransition> = batch.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = critic_target(&sac, &refs, &cfg, &mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (tr, &yi) in batch.iter().zip(&y) {
            if tr.done {
                assert_eq!(yi, tr.reward);
                continue;
            }
            let (mean, log_std) = sac.actor_heads(&tr.next_obs);
            let (a, _, lp) = sample_squashed(&mean, &log_std, &mut rng);
            let q1 = sac.critic_value(&sac.target1, &tr.next_obs, &a);
            let q2 = sac.critic_value(&sac.target2, &tr.next_obs, &a);
            let expect = tr.reward + cfg.gamma * (q1.min(q2) - sac.alpha() * lp);
            assert_eq!(yi, expect);
        }
    }

    #[test]
    fn hand_target_arithmetic() {
        // y = r + gamma*(min Q' - alpha*logpi) = 1 + 0.99*(2 + 0.2) = 3.178.
        let y = 1.0 + 0.99 * (2.0f64.min(5.0) - 0.2 * -1.0);
        assert!((y - 3.178).abs() < 1e-12);
    }

    #[test]
    fn polyak_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = NetworkSpec::dense_sac(2, 2, 3, 4, 1);
        let online = init_params::<f64, _>(&spec, &mut rng);
        let mut target = init_params::<f64, _>(&spec, &mut rng);
        let before = target.clone();

        polyak_update(&mut target, &online, 0.0).unwrap();
        assert_eq!(target, before);
        polyak_update(&mut target, &online, 1.0).unwrap();
        assert_eq!(target, online);

        let mut t = before.clone();
        polyak_update(&mut t, &online, 0.005).unwrap();
        for ((tl, ol), bl) in t.layers.iter().zip(&online.layers).zip(&before.layers) {
            for ((tv, ov), bv) in tl.weight.data.iter().zip(&ol.weight.data).zip(&bl.weight.data) {
                assert!((tv - (0.005 * ov + 0.995 * bv)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn polyak_shape_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = init_params::<f64, _>(&NetworkSpec::dense_sac(2, 2, 3, 4, 1), &mut rng);
        let mut b = init_params::<f64, _>(&NetworkSpec::dense_sac(2, 2, 3, 8, 1), &mut rng);
        assert!(matches!(polyak_update(&mut b, &a, 0.5), Err(NnError::ShapeMismatch(_))));
    }

    #[test]
    fn buffer_too_small_rejected() {
        let mut sac = tiny_sac(8);
        let cfg = tiny_cfg();
        let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
        buffer.push(stored(0.1, 0.0, false));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(matches!(
            update_step(&mut sac, &buffer, &cfg, &mut rng),
            Err(AgentError::BufferTooSmall { have: 1, need: 4 })
        ));
    }

    #[test]
    fn fixed_batch_critic_regression_converges() {
        let mut sac = tiny_sac(9);
        let cfg = SacConfig { batch_size: 1, ..tiny_cfg() };
        let mut buffer = ReplayBuffer::new(16);
        buffer.push(stored(0.3, 1.5, true));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut last = f64::INFINITY;
        for _ in 0..2000 {
            last = update_step(&mut sac, &buffer, &cfg, &mut rng).unwrap().critic1;
            if last < 1e-3 {
                break;
            }
        }
        assert!(last < 1e-3, "critic loss stalled at {last}");
    }

    #[test]
    fn losses_finite_on_random_batch() {
        let mut sac = tiny_sac(10);
        let cfg = tiny_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut buffer = ReplayBuffer::new(64);
        for i in 0..16 {
            buffer.push(stored(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-250.0..1.0),
                i % 5 == 0,
            ));
        }
        for _ in 0..20 {
            let l = update_step(&mut sac, &buffer, &cfg, &mut rng).unwrap();
            assert!(l.critic1.is_finite() && l.critic2.is_finite());
            assert!(l.actor.is_finite() && l.alpha.is_finite());
        }
        assert!(sac.actor.params.all_finite());
    }

    #[test]
    fn alpha_tracks_entropy_error_sign() {
        // Gradient of the temperature is -(logpi + target_entropy); with a
        // near-deterministic policy logpi is large so alpha should rise.
        let mut sac = tiny_sac(11);
        let cfg = SacConfig { target_entropy: -2.0, ..tiny_cfg() };
        let mut buffer = ReplayBuffer::new(64);
        for i in 0..8 {
            buffer.push(stored(i as f64 * 0.1, 0.0, false));
        }
        // Force tight log-std heads so logpi >> -target_entropy.
        let n = sac.actor.params.layers.len();
        let last = &mut sac.actor.params.layers[n - 1];
        for i in ACTION_DIM..2 * ACTION_DIM {
            last.bias.data[i] = -10.0;
            let cols = last.weight.data.len() / (2 * ACTION_DIM);
            for j in 0..cols {
                last.weight.data[i * cols + j] = 0.0;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a0 = sac.alpha();
        let mut prev = a0;
        for _ in 0..50 {
            update_step(&mut sac, &buffer, &cfg, &mut rng).unwrap();
            assert!(sac.alpha() >= prev - 1e-12);
            prev = sac.alpha();
        }
        assert!(sac.alpha() > a0);
    }
}
