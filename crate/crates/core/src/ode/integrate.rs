use serde::{Deserialize, Serialize};

use crate::dynamics::{clamp_nonnegative, drift_with, BranchLaw, PaletteConfig, TuningParams, TypeDistribution};
use crate::error::{Error, Result};

/// Integration stops once cascade growth reaches `1 - ABORT_MARGIN`; the
/// drift has a `1/(1 - g)` pole at `g = 1`.
pub const ABORT_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Euler,
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Config(format!("unknown integration method {other:?} (euler|rk4)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationControl {
    pub method: Method,
    pub step: f64,
    pub max_time: f64,
    pub sample_stride: u32,
    /// Number of step halvings used by the convergence study in `certify`.
    pub halvings: u32,
}

impl Default for IntegrationControl {
    fn default() -> Self {
        Self { method: Method::Rk4, step: 1e-3, max_time: 1000.0, sample_stride: 1, halvings: 2 }
    }
}

impl IntegrationControl {
    pub const MAX_STEP: f64 = 0.1;

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || self.step > Self::MAX_STEP {
            return Err(Error::Config(format!(
                "integration step {} must lie in (0, {}]",
                self.step,
                Self::MAX_STEP
            )));
        }
        if !(self.max_time > 0.0) || !self.max_time.is_finite() {
            return Err(Error::Config(format!("max_time {} must be positive and finite", self.max_time)));
        }
        if self.sample_stride == 0 {
            return Err(Error::Config("sample_stride must be positive".into()));
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        Self { step: self.step / 2.0, sample_stride: self.sample_stride * 2, ..*self }
    }
}

/// Why integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StopReason {
    MaxTime,
    /// Cascade growth came within `ABORT_MARGIN` of 1.
    Supercritical { time: f64, g: f64 },
    /// All remaining mass sits on degree-0 types.
    Degenerate { time: f64 },
    /// A caller-supplied stop condition fired at a sample.
    Requested,
}

/// Sampled solution of the type dynamics started from the all-`(r, p)`
/// distribution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub cfg: PaletteConfig,
    pub times: Vec<f64>,
    pub states: Vec<TypeDistribution>,
    pub g_values: Vec<f64>,
    pub remainder_values: Vec<f64>,
    /// Largest cascade growth seen at any integration step in
    /// `(times[i-1], times[i]]`; entry 0 is `g_values[0]`.
    pub interval_max_g: Vec<f64>,
    /// State with the largest cascade growth over every integration step.
    pub peak: (f64, TypeDistribution, f64),
    pub stop: StopReason,
    /// Steps at which some entry went below `-1e-9` and was clamped.
    pub clamp_events: usize,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation of the state at time `x`, clamped to the sampled range.
    pub fn state_at(&self, x: f64) -> TypeDistribution {
        interpolate(&self.times, &self.states, x)
    }
}

pub(crate) fn interpolate(times: &[f64], states: &[TypeDistribution], x: f64) -> TypeDistribution {
    assert!(!times.is_empty());
    if x <= times[0] {
        return states[0].clone();
    }
    let last = times.len() - 1;
    if x >= times[last] {
        return states[last].clone();
    }
    let hi = times.partition_point(|&t| t <= x);
    let lo = hi - 1;
    let w = (x - times[lo]) / (times[hi] - times[lo]);
    let cfg = states[lo].cfg();
    let v = states[lo]
        .as_slice()
        .iter()
        .zip(states[hi].as_slice())
        .map(|(a, b)| a + w * (b - a))
        .collect();
    TypeDistribution::from_raw(cfg, v)
}

/// Integrates `dz/dx = drift(z)` from the initial distribution until
/// `max_time` or until cascade growth reaches `1 - 1e-6`.
pub fn integrate(cfg: PaletteConfig, tuning: &TuningParams, control: &IntegrationControl) -> Result<Trajectory> {
    integrate_until(cfg, tuning, control, |_, _, _| false)
}

/// Like [`integrate`], but also stops at the first sample for which
/// `stop(time, max_g, remainder_growth)` holds, where `max_g` is the largest
/// cascade growth over the integration steps since the previous sample.
pub fn integrate_until<F>(
    cfg: PaletteConfig,
    tuning: &TuningParams,
    control: &IntegrationControl,
    stop: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, f64, f64) -> bool,
{
    control.validate()?;
    integrate_inner(cfg, tuning, control, stop)
}

/// Integration without the `MAX_STEP` cap, for Euler runs whose step is the
/// process step size.
pub(crate) fn integrate_inner<F>(
    cfg: PaletteConfig,
    tuning: &TuningParams,
    control: &IntegrationControl,
    mut stop: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, f64, f64) -> bool,
{
    cfg.validate()?;
    if tuning.cfg() != cfg {
        return Err(Error::Config("tuning parameters are for a different (r, p)".into()));
    }
    let weights = tuning.weights();
    let h = control.step;
    let total_steps = (control.max_time / h).round() as u64;

    let mut z = TypeDistribution::initial(cfg).into_vec();
    let law0 = BranchLaw::new(&TypeDistribution::from_raw(cfg, z.clone()))?;
    let mut traj = Trajectory {
        cfg,
        times: vec![0.0],
        states: vec![TypeDistribution::from_raw(cfg, z.clone())],
        g_values: vec![law0.g],
        remainder_values: vec![law0.remainder_growth()],
        interval_max_g: vec![law0.g],
        peak: (0.0, TypeDistribution::from_raw(cfg, z.clone()), law0.g),
        stop: StopReason::MaxTime,
        clamp_events: 0,
        step: h,
    };
    if stop(0.0, law0.g, law0.remainder_growth()) {
        traj.stop = StopReason::Requested;
        return Ok(traj);
    }

    let field = |state: &[f64]| -> std::result::Result<Vec<f64>, StageFailure> {
        let law = BranchLaw::new(&TypeDistribution::from_raw(cfg, state.to_vec()))
            .map_err(|_| StageFailure::Degenerate)?;
        if law.g >= 1.0 - ABORT_MARGIN {
            return Err(StageFailure::Supercritical(law.g));
        }
        Ok(drift_with(&law, state, weights))
    };

    let mut interval_max = law0.g;
    for k in 1..=total_steps {
        let x_prev = (k - 1) as f64 * h;
        let advanced = match control.method {
            Method::Euler => field(&z).map(|f| axpy(&z, h, &f)),
            Method::Rk4 => rk4_step(&z, h, &field),
        };
        let next = match advanced {
            Ok(next) => next,
            Err(failure) => {
                traj.stop = failure.into_stop(x_prev);
                break;
            }
        };
        let (next, clamped) = clamp_nonnegative(next);
        if clamped > 0 {
            traj.clamp_events += 1;
        }
        z = next;
        let x = k as f64 * h;
        let dist = TypeDistribution::from_raw(cfg, z.clone());
        let law = match BranchLaw::new(&dist) {
            Ok(law) => law,
            Err(_) => {
                traj.stop = StopReason::Degenerate { time: x };
                break;
            }
        };
        interval_max = interval_max.max(law.g);
        if law.g > traj.peak.2 {
            traj.peak = (x, dist.clone(), law.g);
        }
        if law.g >= 1.0 - ABORT_MARGIN {
            push_sample(&mut traj, x, dist, &law, interval_max);
            traj.stop = StopReason::Supercritical { time: x, g: law.g };
            break;
        }
        if k % control.sample_stride as u64 == 0 || k == total_steps {
            let rem = law.remainder_growth();
            let seen_g = interval_max.max(law.g);
            push_sample(&mut traj, x, dist, &law, interval_max);
            interval_max = f64::NEG_INFINITY;
            if stop(x, seen_g, rem) {
                traj.stop = StopReason::Requested;
                break;
            }
        }
    }

    if traj.times.len() == 1 {
        if let StopReason::Supercritical { time, g } = traj.stop {
            return Err(Error::Integration {
                time,
                reason: format!("cascade growth {g} reached the critical value before any progress"),
            });
        }
    }
    Ok(traj)
}

fn push_sample(traj: &mut Trajectory, x: f64, dist: TypeDistribution, law: &BranchLaw, interval_max: f64) {
    traj.times.push(x);
    traj.states.push(dist);
    traj.g_values.push(law.g);
    traj.remainder_values.push(law.remainder_growth());
    traj.interval_max_g.push(interval_max.max(law.g));
}

enum StageFailure {
    Supercritical(f64),
    Degenerate,
}

impl StageFailure {
    fn into_stop(self, time: f64) -> StopReason {
        match self {
            StageFailure::Supercritical(g) => StopReason::Supercritical { time, g },
            StageFailure::Degenerate => StopReason::Degenerate { time },
        }
    }
}

fn axpy(z: &[f64], h: f64, f: &[f64]) -> Vec<f64> {
    z.iter().zip(f).map(|(a, b)| a + h * b).collect()
}

fn rk4_step<F>(z: &[f64], h: f64, field: &F) -> std::result::Result<Vec<f64>, StageFailure>
where
    F: Fn(&[f64]) -> std::result::Result<Vec<f64>, StageFailure>,
{
    let k1 = field(z)?;
    let k2 = field(&axpy(z, h / 2.0, &k1))?;
    let k3 = field(&axpy(z, h / 2.0, &k2))?;
    let k4 = field(&axpy(z, h, &k3))?;
    Ok(z.iter()
        .enumerate()
        .map(|(i, &zi)| zi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{drift, VertexType};

    fn cfg43() -> PaletteConfig {
        PaletteConfig::new(4, 3).unwrap()
    }

    #[test]
    fn control_validation() {
        assert!(IntegrationControl::default().validate().is_ok());
        let bad = IntegrationControl { step: 0.2, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = IntegrationControl { step: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegrationControl { max_time: f64::INFINITY, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegrationControl { sample_stride: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn first_euler_step_follows_initial_drift() {
        let cfg = cfg43();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl { method: Method::Euler, step: 1e-3, max_time: 1e-3, ..Default::default() };
        let traj = integrate(cfg, &tp, &control).unwrap();
        assert_eq!(traj.len(), 2);
        let slope = (traj.states[1].get(VertexType::new(4, 3)) - 1.0) / 1e-3;
        assert!((slope + 5.0 / 64.0).abs() < 1e-12);
        let f0 = drift(&TypeDistribution::initial(cfg), &tp).unwrap();
        assert_eq!(f0[cfg.index_of(VertexType::new(4, 3)).unwrap()], -5.0 / 64.0);
    }

    #[test]
    fn zero_weights_give_constant_trajectory() {
        let cfg = cfg43();
        let tp = TuningParams::zero(cfg, 0.01).unwrap();
        let control = IntegrationControl { step: 0.01, max_time: 1.0, sample_stride: 10, ..Default::default() };
        let traj = integrate(cfg, &tp, &control).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.iter().all(|s| *s == TypeDistribution::initial(cfg)));
        assert_eq!(traj.stop, StopReason::MaxTime);
    }

    #[test]
    fn samples_are_consistent() {
        let cfg = cfg43();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl { step: 0.01, max_time: 5.0, sample_stride: 7, ..Default::default() };
        let traj = integrate(cfg, &tp, &control).unwrap();
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*traj.times.last().unwrap(), 5.0);
        for (i, s) in traj.states.iter().enumerate() {
            assert_eq!(traj.g_values[i], crate::dynamics::cascade_growth(s).unwrap());
            assert_eq!(traj.remainder_values[i], crate::dynamics::remainder_growth(s).unwrap());
            assert!(traj.interval_max_g[i] >= traj.g_values[i]);
        }
        // mass never increases
        let masses: Vec<f64> = traj.states.iter().map(|s| s.total_mass()).collect();
        assert!(masses.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn interpolation_hits_endpoints_and_midpoints() {
        let cfg = cfg43();
        let a = TypeDistribution::initial(cfg);
        let b = TypeDistribution::zeros(cfg);
        let mid = interpolate(&[0.0, 2.0], &[a.clone(), b.clone()], 1.0);
        assert_eq!(mid.get(VertexType::new(4, 3)), 0.5);
        assert_eq!(interpolate(&[0.0, 2.0], &[a.clone(), b.clone()], -1.0), a);
        assert_eq!(interpolate(&[0.0, 2.0], &[a, b.clone()], 3.0), b);
    }
}
