use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{cascade_growth, remainder_growth, PaletteConfig, TuningParams, TypeDistribution};
use crate::error::{Error, Result};
use crate::ode::integrate::{integrate_inner, integrate_until, IntegrationControl, Method, StopReason, Trajectory};
use crate::ode::sci;

/// Threshold for both growth rates used when nothing else is asked for.
pub const DEFAULT_THRESHOLD: f64 = 0.99999;

/// Successive stopping times under step halving must agree to this
/// relative tolerance.
pub const R_STABILITY: f64 = 0.01;

/// Stored samples are recomputed and compared to this tolerance on load.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-9;

pub const SCHEMA_VERSION: u32 = 1;

/// At most this many samples (plus the stopping point and the growth peak)
/// are written to a certificate.
pub const MAX_STORED_SAMPLES: usize = 2000;

/// Outcome of the search for the stopping time `R`.
#[derive(Clone, Debug, PartialEq)]
pub enum StoppingTime {
    Found {
        r: f64,
        /// Sample index of `R`.
        index: usize,
        /// Largest cascade growth over every integration step in `[0, R]`.
        max_g: f64,
        remainder: f64,
    },
    NotFound {
        /// First sample time at which cascade growth reached the threshold.
        violation: Option<(f64, f64)>,
        /// Smallest remainder growth seen before giving up.
        min_remainder: f64,
    },
}

impl StoppingTime {
    pub fn r(&self) -> Option<f64> {
        match self {
            StoppingTime::Found { r, .. } => Some(*r),
            StoppingTime::NotFound { .. } => None,
        }
    }

    fn describe(&self, threshold: f64) -> String {
        match self {
            StoppingTime::Found { r, max_g, remainder, .. } => {
                format!("R = {r}, max g on [0,R] = {max_g}, remainder growth at R = {remainder}")
            }
            StoppingTime::NotFound { violation: Some((x, g)), min_remainder } => format!(
                "binding constraint: cascade growth reached {g} >= {threshold} at x = {x} \
                 before remainder growth fell below the threshold (smallest remainder growth so far {min_remainder})"
            ),
            StoppingTime::NotFound { violation: None, min_remainder } => format!(
                "binding constraint: remainder growth never fell below {threshold} \
                 (smallest value {min_remainder}) within the integration horizon"
            ),
        }
    }
}

/// Smallest sample time at which remainder growth is below `threshold`,
/// provided cascade growth stayed below `threshold` at every integration
/// step up to it.
pub fn find_r(traj: &Trajectory, threshold: f64) -> Result<StoppingTime> {
    check_threshold(threshold)?;
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let mut max_g = f64::NEG_INFINITY;
    let mut min_remainder = f64::INFINITY;
    for i in 0..traj.len() {
        let g_here = traj.interval_max_g.get(i).copied().unwrap_or(traj.g_values[i]).max(traj.g_values[i]);
        max_g = max_g.max(g_here);
        if max_g >= threshold {
            return Ok(StoppingTime::NotFound { violation: Some((traj.times[i], g_here)), min_remainder });
        }
        let rem = traj.remainder_values[i];
        min_remainder = min_remainder.min(rem);
        if rem < threshold {
            return Ok(StoppingTime::Found { r: traj.times[i], index: i, max_g, remainder: rem });
        }
    }
    let violation = match traj.stop {
        StopReason::Supercritical { time, g } => Some((time, g)),
        _ => None,
    };
    Ok(StoppingTime::NotFound { violation, min_remainder })
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("threshold {threshold} must lie in (0, 1]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    #[serde(serialize_with = "sci::map_f64")]
    pub weights: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    #[serde(serialize_with = "sci::f64")]
    pub step: f64,
    #[serde(serialize_with = "sci::opt_f64")]
    pub r: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub max_g_on_0_r: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub remainder_growth_at_r: Option<f64>,
    pub clamp_events: usize,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(serialize_with = "sci::f64")]
    pub time: f64,
    #[serde(serialize_with = "sci::f64")]
    pub g: f64,
    #[serde(serialize_with = "sci::f64")]
    pub remainder: f64,
    #[serde(serialize_with = "sci::vec_f64")]
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub version: String,
    pub note: String,
}

/// Serialized record of an integrated trajectory together with the
/// subcriticality claim it supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub cfg: PaletteConfig,
    pub tuning: TuningRecord,
    pub control: IntegrationControl,
    #[serde(serialize_with = "sci::f64")]
    pub threshold: f64,
    pub status: CertificateStatus,
    #[serde(serialize_with = "sci::opt_f64")]
    pub r: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub max_g_on_0_r: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub remainder_growth_at_r: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub margin_g: Option<f64>,
    #[serde(serialize_with = "sci::opt_f64")]
    pub margin_remainder: Option<f64>,
    pub refinements: Vec<Refinement>,
    pub diagnostics: Vec<String>,
    /// Type keys `"d,c"` giving the order of every `z` vector.
    pub types: Vec<String>,
    pub samples: Vec<Sample>,
    pub metadata: Metadata,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }

    /// Tuning parameters recorded in the certificate, with step size `epsilon`.
    pub fn tuning_params(&self, epsilon: f64) -> Result<TuningParams> {
        let mut weights = Vec::with_capacity(self.cfg.num_types());
        for t in self.cfg.types() {
            let key = t.to_string();
            let w = self
                .tuning
                .weights
                .get(&key)
                .ok_or_else(|| Error::Parse(format!("tuning.weights is missing type {key:?}")))?;
            weights.push(*w);
        }
        TuningParams::new(self.cfg, weights, epsilon)
    }

    /// Times and states of the stored samples.
    pub fn trajectory_samples(&self) -> Result<(Vec<f64>, Vec<TypeDistribution>)> {
        let mut times = Vec::with_capacity(self.samples.len());
        let mut states = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            times.push(s.time);
            states.push(TypeDistribution::from_vec(self.cfg, s.z.clone())?);
        }
        Ok((times, states))
    }

    /// Recomputes every stored derived value and checks the certified claim.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Verification(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("unsupported schema_version {}", self.schema_version));
        }
        self.cfg.validate()?;
        check_threshold(self.threshold)?;
        let expected: Vec<String> = self.cfg.types().map(|t| t.to_string()).collect();
        if self.types != expected {
            return fail("types does not list the type space in canonical order".into());
        }
        self.tuning_params(1.0 / self.tuning.weights.values().copied().fold(1.0, f64::max))?;
        if self.samples.is_empty() {
            return fail("no samples".into());
        }
        if self.samples[0].time != 0.0 || self.samples[0].z != TypeDistribution::initial(self.cfg).into_vec() {
            return fail("first sample is not the initial distribution at x = 0".into());
        }
        let mut prev_time = f64::NEG_INFINITY;
        let mut max_g = f64::NEG_INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.time > prev_time) {
                return fail(format!("samples[{i}].time is not increasing"));
            }
            prev_time = s.time;
            let z = TypeDistribution::from_vec(self.cfg, s.z.clone())
                .map_err(|e| Error::Verification(format!("samples[{i}].z: {e}")))?;
            let g = cascade_growth(&z).map_err(|e| Error::Verification(format!("samples[{i}]: {e}")))?;
            let rem = remainder_growth(&z).map_err(|e| Error::Verification(format!("samples[{i}]: {e}")))?;
            if (g - s.g).abs() > RECOMPUTE_TOLERANCE {
                return fail(format!("samples[{i}].g = {} but recomputes to {g}", s.g));
            }
            if (rem - s.remainder).abs() > RECOMPUTE_TOLERANCE {
                return fail(format!("samples[{i}].remainder = {} but recomputes to {rem}", s.remainder));
            }
            max_g = max_g.max(g);
        }

        if self.status == CertificateStatus::Failed {
            return Ok(());
        }
        let (Some(r), Some(gmax), Some(rem_r), Some(mg), Some(mr)) =
            (self.r, self.max_g_on_0_r, self.remainder_growth_at_r, self.margin_g, self.margin_remainder)
        else {
            return fail("certified status requires r, max_g_on_0_r, remainder_growth_at_r and margins".into());
        };
        if !(gmax < self.threshold) || !(rem_r < self.threshold) {
            return fail(format!(
                "certified status but max g {gmax} or remainder growth {rem_r} is not below {}",
                self.threshold
            ));
        }
        if (mg - (self.threshold - gmax)).abs() > RECOMPUTE_TOLERANCE
            || (mr - (self.threshold - rem_r)).abs() > RECOMPUTE_TOLERANCE
        {
            return fail("margins do not equal threshold minus the stored values".into());
        }
        let last = self.samples.last().unwrap();
        if last.time != r {
            return fail(format!("last sample is at x = {} but r = {r}", last.time));
        }
        if (last.remainder - rem_r).abs() > RECOMPUTE_TOLERANCE {
            return fail(format!("remainder_growth_at_r = {rem_r} but the sample at r gives {}", last.remainder));
        }
        // With a sample at every step the stored maximum is exact; otherwise
        // it may come from an unsampled step and can only exceed the samples.
        let exact = self.control.sample_stride == 1;
        if (exact && (max_g - gmax).abs() > RECOMPUTE_TOLERANCE) || max_g > gmax + RECOMPUTE_TOLERANCE {
            return fail(format!("max_g_on_0_r = {gmax} but the stored samples give {max_g}"));
        }
        if self.samples.iter().filter(|s| s.time < r).any(|s| s.remainder < self.threshold) {
            return fail("a sample before r already has remainder growth below the threshold".into());
        }
        let rs: Vec<f64> = self.refinements.iter().filter_map(|x| x.r).collect();
        if rs.len() != self.refinements.len() || rs.is_empty() {
            return fail("certified status requires every refinement to find R".into());
        }
        for w in rs.windows(2) {
            if (w[0] - w[1]).abs() / w[0] >= R_STABILITY {
                return fail(format!("refinements disagree: R = {} vs {}", w[0], w[1]));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    /// Parses and verifies a certificate.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cert: Certificate = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse(format!("field `{path}`: {}", e.into_inner()))
        })?;
        cert.verify()?;
        Ok(cert)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Writes `cert` to `path` and reads it back, verifying the result.
pub fn certificate_roundtrip(cert: &Certificate, path: &Path) -> Result<Certificate> {
    cert.write(path)?;
    Certificate::read(path)
}

/// Integrates at `control.step` and at `control.halvings` successive
/// halvings, locates `R` in each run and records whether the trajectory
/// stays subcritical until the remainder becomes subcritical.
pub fn certify(
    cfg: PaletteConfig,
    tuning: &TuningParams,
    threshold: f64,
    control: &IntegrationControl,
) -> Result<Certificate> {
    cfg.validate()?;
    check_threshold(threshold)?;
    control.validate()?;
    if tuning.cfg() != cfg {
        return Err(Error::Config("tuning parameters are for a different (r, p)".into()));
    }

    let mut controls = vec![*control];
    for _ in 0..control.halvings {
        controls.push(controls.last().unwrap().halved());
    }

    let mut refinements = Vec::new();
    let mut diagnostics = Vec::new();
    let mut primary: Option<(Trajectory, StoppingTime)> = None;
    for ctl in &controls {
        let run = integrate_until(cfg, tuning, ctl, |_, g, rem| rem < threshold || g >= threshold);
        let (traj, found) = match run {
            Ok(traj) => {
                let found = find_r(&traj, threshold)?;
                (traj, found)
            }
            Err(Error::Integration { time, reason }) => {
                diagnostics.push(format!("step {}: integration failed at x = {time}: {reason}", ctl.step));
                refinements.push(Refinement {
                    step: ctl.step,
                    r: None,
                    max_g_on_0_r: None,
                    remainder_growth_at_r: None,
                    clamp_events: 0,
                    outcome: "integration failure".into(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        if traj.clamp_events > 0 {
            diagnostics.push(format!("step {}: {} steps clamped negative entries", ctl.step, traj.clamp_events));
        }
        let (max_g, rem) = match found {
            StoppingTime::Found { max_g, remainder, .. } => (Some(max_g), Some(remainder)),
            StoppingTime::NotFound { .. } => (None, None),
        };
        refinements.push(Refinement {
            step: ctl.step,
            r: found.r(),
            max_g_on_0_r: max_g,
            remainder_growth_at_r: rem,
            clamp_events: traj.clamp_events,
            outcome: found.describe(threshold),
        });
        if primary.is_none() {
            primary = Some((traj, found));
        }
    }

    let mut certified = refinements.iter().all(|x| x.r.is_some());
    if !certified {
        for x in refinements.iter().filter(|x| x.r.is_none()) {
            diagnostics.push(format!("step {}: {}", x.step, x.outcome));
        }
    }
    let rs: Vec<f64> = refinements.iter().filter_map(|x| x.r).collect();
    for w in rs.windows(2) {
        let rel = (w[0] - w[1]).abs() / w[0];
        if rel >= R_STABILITY {
            certified = false;
            diagnostics.push(format!("R is not stable under step halving: {} vs {} (relative {rel})", w[0], w[1]));
        }
    }

    let (samples, r, max_g, rem_r) = match &primary {
        Some((traj, found)) => {
            let end = match found {
                StoppingTime::Found { index, .. } => *index,
                StoppingTime::NotFound { .. } => traj.len() - 1,
            };
            let samples = thin_samples(traj, end);
            match found {
                StoppingTime::Found { r, max_g, remainder, .. } => (samples, Some(*r), Some(*max_g), Some(*remainder)),
                StoppingTime::NotFound { .. } => (samples, None, None, None),
            }
        }
        None => {
            let z = TypeDistribution::initial(cfg);
            let sample = Sample {
                time: 0.0,
                g: cascade_growth(&z)?,
                remainder: remainder_growth(&z)?,
                z: z.into_vec(),
            };
            (vec![sample], None, None, None)
        }
    };
    if certified {
        if let (Some(g), Some(rem)) = (max_g, rem_r) {
            certified = g < threshold && rem < threshold;
        }
    }

    let status = if certified { CertificateStatus::Certified } else { CertificateStatus::Failed };
    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        cfg,
        tuning: TuningRecord { weights: tuning.weight_map() },
        control: *control,
        threshold,
        status,
        r,
        max_g_on_0_r: max_g,
        remainder_growth_at_r: rem_r,
        margin_g: max_g.map(|g| threshold - g),
        margin_remainder: rem_r.map(|x| threshold - x),
        refinements,
        diagnostics,
        types: cfg.types().map(|t| t.to_string()).collect(),
        samples,
        metadata: Metadata {
            generator: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            note: "stopping time R is located on the sample grid of the coarsest run".into(),
        },
    })
}

/// Keeps at most `MAX_STORED_SAMPLES` evenly strided samples from
/// `0..=end`, always including sample `end` and the in-range sample with
/// the largest cascade growth.
fn thin_samples(traj: &Trajectory, end: usize) -> Vec<Sample> {
    let stride = end / MAX_STORED_SAMPLES + 1;
    let peak = (0..=end)
        .max_by(|&a, &b| traj.g_values[a].total_cmp(&traj.g_values[b]))
        .unwrap_or(0);
    (0..=end)
        .filter(|&i| i % stride == 0 || i == end || i == peak)
        .map(|i| Sample {
            time: traj.times[i],
            g: traj.g_values[i],
            remainder: traj.remainder_values[i],
            z: traj.states[i].as_slice().to_vec(),
        })
        .collect()
}

/// Largest explicit-Euler step accepted by [`euler_ode_compare`].
pub const MAX_EULER_STEP: f64 = 0.2;

/// Sup over `n * epsilon <= R` of the max-norm distance between the Euler
/// sequence with step `epsilon` and an RK4 reference with step at most
/// `epsilon / 10`.
///
/// `R` is located on the reference with [`DEFAULT_THRESHOLD`]; when the
/// remainder never becomes subcritical the comparison runs to
/// `control.max_time`.
pub fn euler_ode_compare(
    cfg: PaletteConfig,
    tuning: &TuningParams,
    epsilon: f64,
    control: &IntegrationControl,
) -> Result<f64> {
    control.validate()?;
    if !(epsilon > 0.0) || epsilon > MAX_EULER_STEP {
        return Err(Error::Config(format!("Euler step {epsilon} must lie in (0, {MAX_EULER_STEP}]")));
    }
    let per_step = ((epsilon / control.step).ceil() as u32).max(10);
    let reference_control = IntegrationControl {
        method: Method::Rk4,
        step: epsilon / per_step as f64,
        max_time: control.max_time,
        sample_stride: per_step,
        halvings: 0,
    };
    let reference = integrate_inner(cfg, tuning, &reference_control, |_, _, rem| rem < DEFAULT_THRESHOLD)?;
    if let StopReason::Supercritical { time, g } = reference.stop {
        return Err(Error::Integration {
            time,
            reason: format!("reference run became supercritical (g = {g}) before R"),
        });
    }
    let horizon_steps = reference.len() - 1;
    let horizon = horizon_steps as f64 * epsilon;

    let euler_control = IntegrationControl {
        method: Method::Euler,
        step: epsilon,
        max_time: horizon.max(epsilon),
        sample_stride: 1,
        halvings: 0,
    };
    let euler = integrate_inner(cfg, tuning, &euler_control, |_, _, _| false)?;
    if let StopReason::Supercritical { time, g } = euler.stop {
        return Err(Error::Integration {
            time,
            reason: format!("Euler run became supercritical (g = {g}) before R"),
        });
    }
    if euler.len() < horizon_steps + 1 {
        return Err(Error::Integration { time: horizon, reason: "Euler run stopped before R".into() });
    }
    Ok((0..=horizon_steps)
        .map(|n| euler.states[n].max_distance(&reference.states[n]))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(times: Vec<f64>, g: Vec<f64>, rem: Vec<f64>) -> Trajectory {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let states = vec![TypeDistribution::initial(cfg); times.len()];
        Trajectory {
            cfg,
            peak: (0.0, states[0].clone(), 0.0),
            times,
            states,
            interval_max_g: g.clone(),
            g_values: g,
            remainder_values: rem,
            stop: StopReason::MaxTime,
            clamp_events: 0,
            step: 1.0,
        }
    }

    #[test]
    fn find_r_on_synthetic_trajectories() {
        let t = synthetic(vec![0.0, 1.0, 2.0], vec![0.0; 3], vec![3.0, 2.0, 0.5]);
        assert_eq!(find_r(&t, DEFAULT_THRESHOLD).unwrap().r(), Some(2.0));

        let t = synthetic(vec![0.0, 1.0, 2.0], vec![0.0, 0.99999, 0.2], vec![3.0, 2.0, 0.5]);
        match find_r(&t, DEFAULT_THRESHOLD).unwrap() {
            StoppingTime::NotFound { violation: Some((x, _)), .. } => assert_eq!(x, 1.0),
            other => panic!("expected a violation, got {other:?}"),
        }

        let t = synthetic(vec![0.0, 1.0], vec![0.0; 2], vec![3.0, 2.0]);
        assert!(matches!(
            find_r(&t, DEFAULT_THRESHOLD).unwrap(),
            StoppingTime::NotFound { violation: None, min_remainder } if min_remainder == 2.0
        ));
        assert!(find_r(&t, 0.0).is_err());
        assert!(find_r(&t, 1.5).is_err());
    }

    #[test]
    fn low_threshold_fails_with_diagnostics() {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl { step: 0.01, halvings: 0, ..Default::default() };
        let cert = certify(cfg, &tp, 0.01, &control).unwrap();
        assert_eq!(cert.status, CertificateStatus::Failed);
        assert!(cert.r.is_none());
        assert!(cert.diagnostics.iter().any(|d| d.contains("binding constraint")), "{:?}", cert.diagnostics);
        cert.verify().unwrap();
    }

    #[test]
    fn certify_rejects_bad_inputs() {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl::default();
        assert!(matches!(certify(cfg, &tp, 0.0, &control), Err(Error::Config(_))));
        let bad = IntegrationControl { step: 0.5, ..control };
        assert!(matches!(certify(cfg, &tp, 0.9, &bad), Err(Error::Config(_))));
        let other = TuningParams::standard(PaletteConfig::new(6, 4).unwrap(), 0.01).unwrap();
        assert!(matches!(certify(cfg, &other, 0.9, &control), Err(Error::Config(_))));
    }

    #[test]
    fn coarse_certificate_verifies_and_detects_tampering() {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl { step: 0.01, halvings: 1, ..Default::default() };
        let cert = certify(cfg, &tp, DEFAULT_THRESHOLD, &control).unwrap();
        assert!(cert.is_certified(), "{:?}", cert.diagnostics);
        cert.verify().unwrap();

        let text = cert.to_json().unwrap();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, cert);

        let mut tampered = cert.clone();
        tampered.max_g_on_0_r = Some(0.5);
        tampered.margin_g = Some(DEFAULT_THRESHOLD - 0.5);
        assert!(matches!(tampered.verify(), Err(Error::Verification(_))));

        let mut tampered = cert.clone();
        *tampered.samples[3].z.last_mut().unwrap() += 0.01;
        assert!(matches!(tampered.verify(), Err(Error::Verification(_))));

        assert!(matches!(Certificate::from_json(&text[..text.len() / 2]), Err(Error::Parse(_))));
        let wrong_type = text.replacen("\"threshold\": 9.", "\"threshold\": \"x\", \"was\": 9.", 1);
        match Certificate::from_json(&wrong_type) {
            Err(Error::Parse(msg)) => assert!(msg.contains("threshold"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn euler_compare_rejects_large_steps_and_vanishes_for_zero_weights() {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let tp = TuningParams::standard(cfg, 0.01).unwrap();
        let control = IntegrationControl { max_time: 2.0, ..Default::default() };
        assert!(matches!(euler_ode_compare(cfg, &tp, 0.25, &control), Err(Error::Config(_))));
        let zero = TuningParams::zero(cfg, 0.01).unwrap();
        assert_eq!(euler_ode_compare(cfg, &zero, 0.05, &control).unwrap(), 0.0);
        let d = euler_ode_compare(cfg, &tp, 0.05, &control).unwrap();
        assert!(d > 0.0 && d < 0.01, "{d}");
    }
}
