//! Closed-loop simulation of the hover-linearized hexacopter under PD
//! control, with scripted fault injection and the degraded (yaw-free)
//! reallocation strategy.
//!
//! The plant is `ẋ = Ax + B(H_η f − G)` with the yaw torque channel
//! augmented by the aerodynamic damping moment `−sign(r)·K_ND·r²`; lifts are
//! zero-order held over each RK4 step and saturated to `[0, K]`.

use nalgebra::{DMatrix, DVector, SVector};
use serde::{Deserialize, Serialize};

use crate::allocation::{self, saturate, AllocationMatrix};
use crate::model::{
    build_full_effectiveness, build_reduced_effectiveness, AirframeParams, EfficiencyVector,
    FullEffectiveness, ROTOR_COUNT,
};
use crate::{Error, Result};

/// Simulation state `[h, φ, θ, ψ, v_h, p, q, r]`
/// (m, rad, rad, rad, m/s, rad/s, rad/s, rad/s).
pub type SimState = SVector<f64, 8>;

/// Commanded hover point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setpoints {
    pub h_c: f64,
    pub phi_c: f64,
    pub theta_c: f64,
    pub psi_c: f64,
}

impl Setpoints {
    pub fn validate(&self) -> Result<()> {
        let all = [self.h_c, self.phi_c, self.theta_c, self.psi_c];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("setpoints must be finite".into()));
        }
        Ok(())
    }
}

/// PD gains. The attitude laws are applied in the stabilizing orientation
/// (negative feedback of angle error and rate); the altitude law feeds back
/// positively because the thrust axis of `J_f` carries a negative sign.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gains {
    pub k_p_att: f64,
    pub k_d_att: f64,
    pub k_p_h: f64,
    pub k_d_h: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self { k_p_att: 20.0, k_d_att: 3.0, k_p_h: 10.0, k_d_h: 6.0 }
    }
}

/// A scheduled efficiency change: at `time_s`, rotor `rotor` (1-based) drops
/// to efficiency `eta`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEvent {
    pub time_s: f64,
    pub rotor: usize,
    pub eta: f64,
}

fn default_dt() -> f64 {
    0.001
}
fn default_decimation() -> usize {
    1
}

/// A scripted simulation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub params: AirframeParams,
    pub setpoints: Setpoints,
    #[serde(default)]
    pub gains: Gains,
    #[serde(default)]
    pub fault_events: Vec<FaultEvent>,
    pub dcs_enabled: bool,
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    /// Delay between a fault and the controller switching to the degraded
    /// allocation. Reserved for detection studies; default 0 (faults are
    /// assumed known immediately).
    #[serde(default)]
    pub detection_delay_s: f64,
    #[serde(default)]
    pub seed: u64,
    /// Row decimation applied when exporting, not when simulating.
    #[serde(default = "default_decimation")]
    pub output_decimation: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.setpoints.validate()?;
        if !self.dt_s.is_finite() || self.dt_s <= 0.0 {
            return Err(Error::Config("dt_s must be positive".into()));
        }
        if self.duration_s < self.dt_s {
            return Err(Error::Config("duration_s must be at least dt_s".into()));
        }
        if self.detection_delay_s < 0.0 {
            return Err(Error::Config("detection_delay_s must be nonnegative".into()));
        }
        if self.output_decimation == 0 {
            return Err(Error::Config("output_decimation must be at least 1".into()));
        }
        let mut last = f64::NEG_INFINITY;
        for ev in &self.fault_events {
            if ev.time_s < last {
                return Err(Error::Config("fault_events must be sorted by time".into()));
            }
            last = ev.time_s;
            if !(1..=ROTOR_COUNT).contains(&ev.rotor) {
                return Err(Error::Config(format!("fault rotor {} out of range", ev.rotor)));
            }
            if !(ev.eta >= 0.0 && ev.eta <= 1.0) {
                return Err(Error::Config(format!("fault eta {} out of [0, 1]", ev.eta)));
            }
        }
        Ok(())
    }
}

/// PD virtual control `[T, L, M, N]`. With `dcs_active` the sensed yaw
/// states are replaced by the commanded ones, so the yaw error terms vanish
/// and `N = 0`.
pub fn pd_control(
    state: &SimState,
    setpoints: &Setpoints,
    gains: &Gains,
    params: &AirframeParams,
    dcs_active: bool,
) -> SVector<f64, 4> {
    let t = gains.k_p_h * (state[0] - setpoints.h_c) + gains.k_d_h * state[4] + params.hover_thrust();
    let l = -(gains.k_p_att * (state[1] - setpoints.phi_c) + gains.k_d_att * state[5]);
    let m = -(gains.k_p_att * (state[2] - setpoints.theta_c) + gains.k_d_att * state[6]);
    let n = if dcs_active {
        0.0
    } else {
        -(gains.k_p_att * (state[3] - setpoints.psi_c) + gains.k_d_att * state[7])
    };
    SVector::<f64, 4>::new(t, l, m, n)
}

fn derivative(
    state: &SimState,
    control_base: &SVector<f64, 4>,
    params: &AirframeParams,
) -> SimState {
    let r = state[7];
    let yaw = control_base[3] - r.signum() * params.yaw_damping * r * r;
    let mut dx = SimState::zeros();
    for i in 0..4 {
        dx[i] = state[i + 4];
    }
    dx[4] = -control_base[0] / params.mass_kg;
    dx[5] = control_base[1] / params.inertia_roll;
    dx[6] = control_base[2] / params.inertia_pitch;
    dx[7] = yaw / params.inertia_yaw;
    dx
}

/// One classical RK4 step with the applied lifts held constant.
pub fn step(
    state: &SimState,
    applied_lifts: &SVector<f64, 6>,
    eta: &EfficiencyVector,
    params: &AirframeParams,
    dt: f64,
) -> SimState {
    assert!(dt > 0.0);
    let h: FullEffectiveness = build_full_effectiveness(params, eta);
    let gravity = SVector::<f64, 4>::new(params.hover_thrust(), 0.0, 0.0, 0.0);
    let u = h * applied_lifts - gravity;
    let k1 = derivative(state, &u, params);
    let k2 = derivative(&(state + k1 * (dt / 2.0)), &u, params);
    let k3 = derivative(&(state + k2 * (dt / 2.0)), &u, params);
    let k4 = derivative(&(state + k3 * dt), &u, params);
    state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Converged,
    Diverged,
    SaturationLimited,
}

/// Error and convergence thresholds for trace classification.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyThresholds {
    /// Altitude error bound over the last 10 % of the run (m).
    pub position_m: f64,
    /// Angle error bound over the last 10 % of the run (rad).
    pub angle_rad: f64,
    /// Divergence bound factor: an error above
    /// `factor · max(1, |setpoint|)` classifies the run as diverged.
    pub divergence_factor: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self { position_m: 0.05, angle_rad: 0.02, divergence_factor: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub state: [f64; 8],
    /// Commanded virtual control `[T, L, M, N]`; `N = 0` while the yaw
    /// channel is abandoned.
    pub command: [f64; 4],
    pub lifts: [f64; 6],
    pub saturated: [bool; 6],
    pub eta: [f64; 6],
    pub dcs_active: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    /// `[h, φ, θ, ψ]` errors at the end of the run.
    pub final_errors: [f64; 4],
    pub max_yaw_rate_abs: f64,
    pub settling_time_s: Option<f64>,
}

/// Time series of one simulation run: one row per integrator step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// State at `t = duration` (one step past the last row).
    pub final_state: [f64; 8],
    pub classification: Classification,
    pub metrics: TraceMetrics,
}

/// Runs a scenario to completion (or to the first non-finite state).
pub fn run_scenario(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    let params = &scenario.params;
    let dt = scenario.dt_s;
    let steps = (scenario.duration_s / dt).round().max(1.0) as usize;

    let mut x = SimState::zeros();
    let mut eta = EfficiencyVector::nominal();
    // efficiencies the controller allocates with; lags `eta` by the
    // detection delay
    let mut eta_known = eta;
    let mut pending: Vec<(f64, usize, f64)> = Vec::new();
    let mut events = scenario.fault_events.iter().peekable();

    let mut rows = Vec::with_capacity(steps);
    let mut allocator: Option<(EfficiencyVector, bool, AllocationMatrix)> = None;

    for k in 0..steps {
        let t = k as f64 * dt;

        while let Some(ev) = events.peek() {
            if ev.time_s <= t {
                let mut arr = eta.as_array();
                arr[ev.rotor - 1] = ev.eta;
                eta = EfficiencyVector::new(arr)?;
                pending.push((ev.time_s + scenario.detection_delay_s, ev.rotor, ev.eta));
                events.next();
            } else {
                break;
            }
        }
        pending.retain(|&(known_at, rotor, value)| {
            if known_at <= t {
                let mut arr = eta_known.as_array();
                arr[rotor - 1] = value;
                eta_known = EfficiencyVector::new(arr).expect("validated event");
                false
            } else {
                true
            }
        });

        let dcs_active = scenario.dcs_enabled && eta_known.any_failed();
        let command = pd_control(&x, &scenario.setpoints, &scenario.gains, params, dcs_active);

        let needs_rebuild = allocator
            .as_ref()
            .is_none_or(|(e, d, _)| *e != eta_known || *d != dcs_active);
        if needs_rebuild {
            let matrix = if dcs_active {
                let h = build_reduced_effectiveness(params, &eta_known);
                allocation::pim(&DMatrix::from_iterator(3, ROTOR_COUNT, h.iter().copied()))?
            } else {
                let h = build_full_effectiveness(params, &eta_known);
                allocation::pim(&DMatrix::from_iterator(4, ROTOR_COUNT, h.iter().copied()))?
            };
            allocator = Some((eta_known, dcs_active, matrix));
        }
        let pim = &allocator.as_ref().unwrap().2;

        let virtual_control = if dcs_active {
            DVector::from_vec(vec![command[0], command[1], command[2]])
        } else {
            DVector::from_iterator(4, command.iter().copied())
        };
        let raw_lifts = pim.allocate(&virtual_control);
        let (lifts, saturated) = saturate(&raw_lifts, params.max_lift_n);

        rows.push(TraceRow {
            t,
            state: x.as_slice().try_into().unwrap(),
            command: command.as_slice().try_into().unwrap(),
            lifts: lifts.as_slice().try_into().unwrap(),
            saturated,
            eta: eta.as_array(),
            dcs_active,
        });

        let lifts6 = SVector::<f64, 6>::from_iterator(lifts.iter().copied());
        x = step(&x, &lifts6, &eta, params, dt);
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
    }

    let final_state: [f64; 8] = x.as_slice().try_into().unwrap();
    let (classification, metrics) = classify_rows(
        &rows,
        &final_state,
        &scenario.setpoints,
        &ClassifyThresholds::default(),
    );
    Ok(Trace { rows, final_state, classification, metrics })
}

/// Re-classifies an existing trace with different thresholds.
pub fn classify_trace(
    trace: &Trace,
    setpoints: &Setpoints,
    thresholds: &ClassifyThresholds,
) -> Classification {
    classify_rows(&trace.rows, &trace.final_state, setpoints, thresholds).0
}

fn classify_rows(
    rows: &[TraceRow],
    final_state: &[f64; 8],
    setpoints: &Setpoints,
    thresholds: &ClassifyThresholds,
) -> (Classification, TraceMetrics) {
    assert!(!rows.is_empty());
    let targets = [setpoints.h_c, setpoints.phi_c, setpoints.theta_c, setpoints.psi_c];
    let bounds: Vec<f64> = targets
        .iter()
        .map(|s| thresholds.divergence_factor * s.abs().max(1.0))
        .collect();
    let error_limits = [
        thresholds.position_m,
        thresholds.angle_rad,
        thresholds.angle_rad,
        thresholds.angle_rad,
    ];

    let final_errors = [
        final_state[0] - targets[0],
        final_state[1] - targets[1],
        final_state[2] - targets[2],
        final_state[3] - targets[3],
    ];
    let mut max_yaw_rate = final_state[7].abs();
    for row in rows {
        max_yaw_rate = max_yaw_rate.max(row.state[7].abs());
    }

    // controlled channels: h, φ, θ always; ψ only while yaw is being flown
    let controlled = |row: &TraceRow| -> Vec<usize> {
        if row.dcs_active { vec![0, 1, 2] } else { vec![0, 1, 2, 3] }
    };
    let row_ok = |row: &TraceRow| -> bool {
        controlled(row)
            .iter()
            .all(|&c| (row.state[c] - targets[c]).abs() < error_limits[c])
    };

    let mut diverged = !final_state.iter().all(|v| v.is_finite());
    for row in rows {
        if !row.state.iter().all(|v| v.is_finite()) {
            diverged = true;
            break;
        }
        if controlled(row)
            .iter()
            .any(|&c| (row.state[c] - targets[c]).abs() > bounds[c])
        {
            diverged = true;
            break;
        }
    }

    // earliest time of the trailing streak of in-threshold rows
    let settling_time_s = rows
        .iter()
        .rev()
        .take_while(|row| row_ok(row))
        .last()
        .map(|row| row.t);

    let metrics = TraceMetrics { final_errors, max_yaw_rate_abs: max_yaw_rate, settling_time_s };

    if diverged {
        return (Classification::Diverged, metrics);
    }
    let tail_start = rows.len() - (rows.len() / 10).max(1);
    let converged = rows[tail_start..].iter().all(row_ok);
    if converged {
        (Classification::Converged, metrics)
    } else {
        (Classification::SaturationLimited, metrics)
    }
}

/// Writes the trace as CSV with the fixed column layout
/// `t,h,phi,theta,psi,vh,p,q,r,T,L,M,N,f1..f6,sat1..sat6`, keeping every
/// `decimation`-th row (the first row is always kept).
pub fn write_csv<W: std::io::Write>(trace: &Trace, writer: &mut W, decimation: usize) -> Result<()> {
    assert!(decimation >= 1);
    writeln!(
        writer,
        "t,h,phi,theta,psi,vh,p,q,r,T,L,M,N,f1,f2,f3,f4,f5,f6,sat1,sat2,sat3,sat4,sat5,sat6"
    )?;
    for row in trace.rows.iter().step_by(decimation) {
        write!(writer, "{}", row.t)?;
        for v in row.state.iter().chain(row.command.iter()).chain(row.lifts.iter()) {
            write!(writer, ",{v}")?;
        }
        for s in row.saturated {
            write!(writer, ",{}", u8::from(s))?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
