//! Time integration driver: CFL stepping with sample-aligned step truncation,
//! diagnostics at every sample, resolution-monitor stopping and marker curves.

use crate::diagnostics::{record_with, DiagnosticsRecord};
use crate::dynamics::{cfl_dt, Dynamics, StepperConfig};
use crate::error::{IpmError, Result};
use crate::spectral::ScalarField;
use crate::tracking::{advect_curve_stages, MarkerCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub stepper: StepperConfig,
    pub sample_interval: f64,
    pub requested_s: Vec<f64>,
    /// Keep the field of every sample in the returned trajectory.
    pub keep_fields: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            stepper: StepperConfig::default(),
            sample_interval: 0.05,
            requested_s: vec![1.0],
            keep_fields: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub record: DiagnosticsRecord,
    pub field: ScalarField,
    pub curves: Vec<MarkerCurve>,
    pub tripped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Completed,
    MonitorTripped,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// Fields at the sample times (only with `keep_fields`).
    pub fields: Vec<ScalarField>,
    /// Curves at the sample times.
    pub curves: Vec<Vec<MarkerCurve>>,
    pub stop: StopReason,
    /// Last sample time reached.
    pub horizon: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Integrate from `rho0` (first projected onto the retained modes). `on_sample`
/// sees every sample, including `t = 0` and the sample at which the monitor trips.
pub fn simulate_with(
    rho0: &ScalarField,
    curves: Vec<MarkerCurve>,
    opts: &SimulationOptions,
    mut on_sample: impl FnMut(&Sample) -> Result<()>,
) -> Result<Trajectory> {
    opts.stepper.validate()?;
    if !(opts.sample_interval > 0.0) {
        return Err(IpmError::InvalidArgument(format!(
            "sample interval must be positive, got {}",
            opts.sample_interval
        )));
    }
    let cfg = opts.stepper;
    let dy = Dynamics::new(*rho0.domain(), cfg.dealias_fraction)?;
    let mut rho = dy.filter(rho0)?;
    let mut curves = curves;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut traj = Trajectory {
        records: Vec::new(),
        fields: Vec::new(),
        curves: Vec::new(),
        stop: StopReason::Completed,
        horizon: 0.0,
        steps: 0,
    };
    let mut emit = |rho: &ScalarField, curves: &[MarkerCurve], t: f64, traj: &mut Trajectory| -> Result<bool> {
        let record = record_with(&dy, rho, t, &opts.requested_s)?;
        let tripped = record.tail_fraction > cfg.resolution_tail_max;
        let sample = Sample {
            record,
            field: rho.clone(),
            curves: curves.to_vec(),
            tripped,
        };
        on_sample(&sample)?;
        traj.records.push(sample.record);
        traj.curves.push(sample.curves);
        if opts.keep_fields {
            traj.fields.push(sample.field);
        }
        traj.horizon = t;
        Ok(tripped)
    };
    if emit(&rho, &curves, t, &mut traj)? {
        traj.stop = StopReason::MonitorTripped;
        return Ok(traj);
    }
    let n_samples = (cfg.t_end / opts.sample_interval - 1e-9).ceil().max(0.0) as usize;
    for m in 1..=n_samples {
        let t_sample = (m as f64 * opts.sample_interval).min(cfg.t_end);
        while t < t_sample {
            if steps >= cfg.max_steps {
                traj.stop = StopReason::MaxSteps;
                traj.steps = steps;
                return Ok(traj);
            }
            let u = dy.biot_savart(&rho)?;
            let sub = StepperConfig {
                t_end: t_sample,
                ..cfg
            };
            let mut dt = cfl_dt(&u, &sub, t);
            // avoid a sliver step just before the sample time
            if t_sample - (t + dt) < 1e-3 * dt {
                dt = t_sample - t;
            }
            let out = dy.step_rk4(&rho, dt)?;
            if !curves.is_empty() {
                curves = curves
                    .iter()
                    .map(|c| advect_curve_stages(c, &out.stages, dt))
                    .collect::<Result<_>>()?;
            }
            rho = out.rho;
            steps += 1;
            t = if t_sample - (t + dt) <= 1e-12 * t_sample.max(1.0) {
                t_sample
            } else {
                t + dt
            };
        }
        if emit(&rho, &curves, t, &mut traj)? {
            traj.stop = StopReason::MonitorTripped;
            traj.steps = steps;
            return Ok(traj);
        }
    }
    traj.steps = steps;
    Ok(traj)
}

pub fn simulate(rho0: &ScalarField, curves: Vec<MarkerCurve>, opts: &SimulationOptions) -> Result<Trajectory> {
    simulate_with(rho0, curves, opts, |_| Ok(()))
}

/// Fixed-step RK4 integration to `t_end` (no monitor, no sampling).
pub fn integrate_fixed(dy: &Dynamics, rho0: &ScalarField, dt: f64, t_end: f64) -> Result<ScalarField> {
    let n = (t_end / dt).round() as usize;
    if n == 0 || ((n as f64) * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(IpmError::InvalidArgument(format!(
            "t_end = {t_end} is not a positive multiple of dt = {dt}"
        )));
    }
    let mut rho = rho0.clone();
    for _ in 0..n {
        rho = dy.step_rk4(&rho, dt)?.rho;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Domain;

    #[test]
    fn stratified_run_is_stationary() {
        let d = Domain::torus(32, 32).unwrap();
        let rho = ScalarField::from_fn(d, |_, y| y.sin());
        let opts = SimulationOptions {
            sample_interval: 0.25,
            ..Default::default()
        };
        let tr = simulate(&rho, Vec::new(), &opts).unwrap();
        assert_eq!(tr.stop, StopReason::Completed);
        assert_eq!(tr.records.len(), 5);
        assert!((tr.horizon - 1.0).abs() < 1e-15);
        let e0 = tr.records[0].energy;
        assert!(tr.records.iter().all(|r| (r.energy - e0).abs() <= 1e-12 * e0.abs()));
    }

    #[test]
    fn samples_are_aligned() {
        let d = Domain::torus(32, 32).unwrap();
        let rho = crate::initial_data::make_s2_symmetric(d).unwrap();
        let opts = SimulationOptions {
            stepper: StepperConfig {
                t_end: 0.3,
                resolution_tail_max: 1.0,
                ..Default::default()
            },
            sample_interval: 0.1,
            ..Default::default()
        };
        let tr = simulate(&rho, Vec::new(), &opts).unwrap();
        let t = tr.times();
        assert_eq!(t, vec![0.0, 0.1, 0.2, 0.3]);
    }
}
