//! Rate-commanded kinematic fixed-wing model. Aileron and elevator drive
//! roll and pitch rates through first-order lags, airspeed is constant and
//! velocity points along the body x-axis; yaw rate follows the coordinated
//! turn relation.

use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("non-finite aircraft state after integration")]
    NonFiniteState,
}

/// Position is (x east, y north, altitude); angles in radians, rates in
/// rad/s, airspeed in m/s, load factor in g units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftState<T: Real> {
    pub position: [T; 3],
    pub roll: T,
    pub pitch: T,
    pub heading: T,
    pub p: T,
    pub q: T,
    pub r: T,
    pub airspeed: T,
    pub load_factor: T,
}

impl<T: Real> AircraftState<T> {
    /// Straight-and-level state at the given position and heading.
    pub fn level(position: [T; 3], heading: T, airspeed: T) -> Self {
        AircraftState {
            position,
            roll: T::zero(),
            pitch: T::zero(),
            heading,
            p: T::zero(),
            q: T::zero(),
            r: T::zero(),
            airspeed,
            load_factor: T::one(),
        }
    }

    /// Rotates a body-frame vector (x forward, y right, z down) into the
    /// world frame (x east, y north, z up) using the ZYX Euler attitude.
    pub fn body_to_world(&self, v: [T; 3]) -> [T; 3] {
        let (sf, cf) = (self.roll.sin(), self.roll.cos());
        let (st, ct) = (self.pitch.sin(), self.pitch.cos());
        let (sp, cp) = (self.heading.sin(), self.heading.cos());
        // Body -> NED direction cosine matrix, then NED -> ENU.
        let n = v[0] * (ct * cp) + v[1] * (sf * st * cp - cf * sp) + v[2] * (cf * st * cp + sf * sp);
        let e = v[0] * (ct * sp) + v[1] * (sf * st * sp + cf * cp) + v[2] * (cf * st * sp - sf * cp);
        let d = v[0] * (-st) + v[1] * (sf * ct) + v[2] * (cf * ct);
        [e, n, -d]
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && [self.roll, self.pitch, self.heading, self.p, self.q, self.r, self.airspeed, self.load_factor]
                .iter()
                .all(|c| c.is_finite())
    }
}

/// Aileron/elevator commands, clamped to [-1, 1] before use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlAction<T: Real> {
    pub aileron: T,
    pub elevator: T,
}

impl<T: Real> Default for ControlAction<T> {
    fn default() -> Self {
        ControlAction { aileron: T::zero(), elevator: T::zero() }
    }
}

impl<T: Real> ControlAction<T> {
    pub fn new(aileron: T, elevator: T) -> Self {
        ControlAction { aileron, elevator }
    }

    pub fn clamped(self) -> Self {
        let one = T::one();
        ControlAction {
            aileron: self.aileron.max(-one).min(one),
            elevator: self.elevator.max(-one).min(one),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig<T: Real> {
    /// Maximum commanded roll rate (rad/s).
    pub p_max: T,
    /// Maximum commanded pitch rate (rad/s).
    pub q_max: T,
    pub tau_p: T,
    pub tau_q: T,
    /// Reference airspeed (m/s).
    pub v0: T,
    pub g0: T,
    pub dt: T,
}

impl<T: Real> Default for DynamicsConfig<T> {
    fn default() -> Self {
        DynamicsConfig {
            p_max: real(3.14),
            q_max: real(0.52),
            tau_p: real(0.3),
            tau_q: real(0.5),
            v0: real(200.0),
            g0: real(9.80665),
            dt: real(0.05),
        }
    }
}

/// n = V*q/g0 + cos(roll)*cos(pitch).
pub fn load_factor<T: Real>(state: &AircraftState<T>, cfg: &DynamicsConfig<T>) -> T {
    state.airspeed * state.q / cfg.g0 + state.roll.cos() * state.pitch.cos()
}

fn wrap_pi<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = (a + T::PI()) % two_pi;
    if a < T::zero() {
        a = a + two_pi;
    }
    a - T::PI()
}

fn wrap_two_pi<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = a % two_pi;
    if a < T::zero() {
        a = a + two_pi;
    }
    a
}

/// Semi-implicit Euler step over `cfg.dt`.
pub fn step<T: Real>(
    state: &AircraftState<T>,
    action: ControlAction<T>,
    cfg: &DynamicsConfig<T>,
) -> Result<AircraftState<T>, DynamicsError> {
    let a = action.clamped();
    let dt = cfg.dt;
    let v = state.airspeed;

    let p = state.p + dt * (cfg.p_max * a.aileron - state.p) / cfg.tau_p;
    let q = state.q + dt * (cfg.q_max * a.elevator - state.q) / cfg.tau_q;
    let r = (cfg.g0 / v) * state.roll.tan() * state.pitch.cos();

    let roll = wrap_pi(state.roll + dt * p);
    let pitch_limit = T::FRAC_PI_2() - real::<T>(1e-6);
    let pitch = (state.pitch + dt * q).max(-pitch_limit).min(pitch_limit);
    let heading = wrap_two_pi(state.heading + dt * r);

    let position = [
        state.position[0] + dt * v * pitch.cos() * heading.sin(),
        state.position[1] + dt * v * pitch.cos() * heading.cos(),
        state.position[2] + dt * v * pitch.sin(),
    ];

    let mut next = AircraftState {
        position,
        roll,
        pitch,
        heading,
        p,
        q,
        r,
        airspeed: v,
        load_factor: T::zero(),
    };
    next.load_factor = load_factor(&next, cfg);
    if !next.is_finite() {
        return Err(DynamicsError::NonFiniteState);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> DynamicsConfig<f64> {
        DynamicsConfig::default()
    }

    #[test]
    fn level_equilibrium() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0, 0.0, 3000.0], 0.0, 200.0);
        for _ in 0..1000 {
            s = step(&s, ControlAction::default(), &cfg).unwrap();
        }
        assert!(s.roll.abs() < 1e-9);
        assert!(s.pitch.abs() < 1e-9);
        assert!((s.load_factor - 1.0).abs() < 1e-9);
        assert!((s.position[2] - 3000.0).abs() < 1e-9);
        // Position advances along heading (north) at V*dt per step.
        assert!((s.position[1] - 200.0 * 0.05 * 1000.0).abs() < 1e-6);
        assert!(s.position[0].abs() < 1e-9);
    }

    #[test]
    fn full_aileron_converges_to_p_max() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0, 0.0, 3000.0], 0.0, 200.0);
        let steps = (5.0 * cfg.tau_p / cfg.dt).ceil() as usize;
        for _ in 0..steps {
            s = step(&s, ControlAction::new(1.0, 0.0), &cfg).unwrap();
        }
        assert!((s.p - cfg.p_max).abs() < 0.01 * cfg.p_max, "p = {}", s.p);
    }

    #[test]
    fn full_down_elevator_drives_pitch_to_floor() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0, 0.0, 30000.0], 0.0, 200.0);
        let mut prev_pitch = s.pitch;
        for i in 0..2000 {
            s = step(&s, ControlAction::new(0.0, -1.0), &cfg).unwrap();
            if i > 20 && s.pitch > -1.5 {
                assert!(s.pitch < prev_pitch, "pitch not monotone at step {i}");
            }
            prev_pitch = s.pitch;
        }
        assert!((s.q + cfg.q_max).abs() < 0.01 * cfg.q_max);
        assert!(s.pitch <= -std::f64::consts::FRAC_PI_2 + 1e-5);
    }

    #[test]
    fn load_factor_formula() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0; 3], 0.0, 200.0);
        s.q = -0.15;
        let n = load_factor(&s, &cfg);
        assert!((n - (200.0 * -0.15 / 9.80665 + 1.0)).abs() < 1e-12);
        assert!(n < -2.0, "n = {n}"); // below the -2 g floor
    }

    #[test]
    fn coordinated_turn_load_factor() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0; 3], 0.0, 200.0);
        s.roll = 60f64.to_radians();
        s.q = (cfg.g0 / s.airspeed) * s.roll.tan() * s.roll.sin();
        let n = load_factor(&s, &cfg);
        assert!((n - 2.0).abs() / 2.0 < 0.05, "n = {n}");
    }

    #[test]
    fn rates_saturate() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0, 0.0, 50000.0], 0.0, 200.0);
        for i in 0..500 {
            let a = ControlAction::new(if i % 3 == 0 { 1.0 } else { -1.0 }, 1.0);
            s = step(&s, a, &cfg).unwrap();
            assert!(s.p.abs() <= cfg.p_max + 1e-9);
            assert!(s.q.abs() <= cfg.q_max + 1e-9);
            assert!(s.roll >= -std::f64::consts::PI && s.roll < std::f64::consts::PI);
            assert!(s.pitch.abs() < std::f64::consts::FRAC_PI_2);
            assert!(s.heading >= 0.0 && s.heading < 2.0 * std::f64::consts::PI);
        }
    }

    #[test]
    fn altitude_change_is_kinematic() {
        let cfg = cfg();
        let mut s = AircraftState::level([0.0, 0.0, 5000.0], 1.0, 200.0);
        s.pitch = 0.2;
        let next = step(&s, ControlAction::default(), &cfg).unwrap();
        assert!((next.position[2] - s.position[2] - 200.0 * next.pitch.sin() * 0.05).abs() < 1e-12);
    }

    #[test]
    fn step_is_deterministic() {
        let cfg = cfg();
        let s = AircraftState::level([10.0, 20.0, 3000.0], 0.7, 200.0);
        let a = ControlAction::new(0.3, -0.6);
        assert_eq!(step(&s, a, &cfg).unwrap(), step(&s, a, &cfg).unwrap());
    }

    #[test]
    fn body_to_world_identity_attitude() {
        let s = AircraftState::<f64>::level([0.0; 3], 0.0, 200.0);
        // Body +x at heading 0 points north; body z-down maps to world -z.
        let fwd = s.body_to_world([1.0, 0.0, 0.0]);
        assert!((fwd[1] - 1.0).abs() < 1e-12 && fwd[0].abs() < 1e-12 && fwd[2].abs() < 1e-12);
        let down = s.body_to_world([0.0, 0.0, 1.0]);
        assert!((down[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn body_to_world_right_bank_makes_nadir_horizontal() {
        let mut s = AircraftState::<f64>::level([0.0; 3], 0.0, 200.0);
        s.roll = std::f64::consts::FRAC_PI_2;
        let down = s.body_to_world([0.0, 0.0, 1.0]);
        assert!(down[2].abs() < 1e-12, "vertical component {}", down[2]);
    }
}
