use crate::scalar::{real, Real};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Epsilon inside log(1 - tanh^2 + eps) guarding the squash correction.
pub const TANH_EPS: f64 = 1e-6;

pub fn clamp_log_std<T: Real>(log_std: T) -> T {
    log_std.max(real(LOG_STD_MIN)).min(real(LOG_STD_MAX))
}

/// Reparameterized tanh-Gaussian sample: u = mean + exp(log_std)*noise,
/// action = tanh(u). Returns the action and its log density
/// sum_i [log N(u_i; mean_i, std_i) - log(1 - tanh^2(u_i) + eps)].
pub fn squashed_gaussian_sample<T: Real>(
    mean: &[T],
    log_std: &[T],
    noise: &[T],
) -> (Vec<T>, T) {
    assert_eq!(mean.len(), log_std.len());
    assert_eq!(mean.len(), noise.len());
    let half = real::<T>(0.5);
    let log_two_pi = real::<T>((2.0 * std::f64::consts::PI).ln());
    let eps = real::<T>(TANH_EPS);
    let mut action = Vec::with_capacity(mean.len());
    let mut log_prob = T::zero();
    for i in 0..mean.len() {
        let ls = clamp_log_std(log_std[i]);
        let std = ls.exp();
        let u = mean[i] + std * noise[i];
        let t = u.tanh();
        action.push(t);
        let gauss = -half * noise[i] * noise[i] - ls - half * log_two_pi;
        let correction = (T::one() - t * t + eps).ln();
        log_prob = log_prob + gauss - correction;
    }
    (action, log_prob)
}

/// Deterministic policy output: tanh of the mean head.
pub fn tanh_mean<T: Real>(mean: &[T]) -> Vec<T> {
    mean.iter().map(|m| m.tanh()).collect()
}
