//! Nonlinear divider formed by one or two MTJs feeding the shared load
//! resistor `R_G`, plus per-operation energy integration.

use serde::{Deserialize, Serialize};

use crate::device::{Bit, DeviceInstance, DeviceParams, SwitchDirection};
use crate::error::{Error, Result};

pub const FIXED_POINT_DAMPING: f64 = 0.5;
pub const FIXED_POINT_TOL: f64 = 1e-9;
pub const FIXED_POINT_MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatingPoint {
    /// Temperature (K).
    pub temperature: f64,
    /// Load resistor (Ω).
    pub r_g: f64,
    pub v_read: f64,
    pub t_read: f64,
    pub v_set: f64,
    pub t_set: f64,
    /// Negative FALSE pulse amplitude (V).
    pub v_reset: f64,
    pub t_reset: f64,
    /// Reference-voltage uncertainty used for worst-case BER (V).
    pub delta_ref: f64,
}

impl Default for OperatingPoint {
    /// The 300 K, 10 kΩ READ/SET point used throughout the gate analysis.
    fn default() -> Self {
        Self {
            temperature: 300.0,
            r_g: 10e3,
            v_read: 0.35,
            t_read: 10e-9,
            v_set: 0.78,
            t_set: 10e-9,
            v_reset: -1.4,
            t_reset: 10e-9,
            delta_ref: 5e-3,
        }
    }
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParameter { name, reason: reason.to_string() });
        if !(self.r_g > 0.0 && self.r_g.is_finite()) {
            return bad("r_g", "must be > 0");
        }
        if !(self.t_read > 0.0 && self.t_set > 0.0 && self.t_reset >= 0.0) {
            return bad("t_*", "pulse widths must be positive");
        }
        if !(self.v_read > 0.0 && self.v_set > 0.0) {
            return bad("v_read/v_set", "must be > 0");
        }
        if !(self.v_reset < 0.0) {
            return bad("v_reset", "must be < 0");
        }
        if !(self.delta_ref >= 0.0) {
            return bad("delta_ref", "must be >= 0");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature", "must be > 0");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSolution {
    pub state: Bit,
    /// Top electrode minus V_G (V).
    pub v_mtj: f64,
    /// Signed current, positive from top electrode into R_G (A).
    pub current: f64,
    pub resistance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSolution {
    pub v_g: f64,
    pub devices: Vec<DeviceSolution>,
    pub iterations: usize,
    /// KCL mismatch `|R_G·ΣI − V_G|` at the returned point (V).
    pub residual: f64,
}

impl NodeSolution {
    pub fn total_current(&self) -> f64 {
        self.devices.iter().map(|d| d.current).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_read: f64,
    pub e_set: f64,
    pub e_false: f64,
    pub e_comp: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(e_read: f64, e_set: f64, e_false: f64, e_comp: f64) -> Self {
        Self { e_read, e_set, e_false, e_comp, total: e_read + e_set + e_false + e_comp }
    }
}

/// Damped fixed point of `V_G = V·R_G·G(V − V_G) / (1 + R_G·G(V − V_G))`
/// where `G` is the summed conductance of the driven devices.
fn solve_divider(
    params: &DeviceParams,
    v_drive: f64,
    devices: &[(Bit, &DeviceInstance)],
    op: &OperatingPoint,
) -> Result<NodeSolution> {
    let t = op.temperature;
    let r_g = op.r_g;
    let image = |v_g: f64| -> Result<f64> {
        let v_mtj = v_drive - v_g;
        let mut g = 0.0;
        for (state, inst) in devices {
            g += 1.0 / params.resistance(*state, v_mtj, t, inst)?;
        }
        Ok(v_drive * r_g * g / (1.0 + r_g * g))
    };

    let mut v_g = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < FIXED_POINT_MAX_ITER {
        iterations += 1;
        let next = image(v_g)?;
        residual = (next - v_g).abs();
        if residual <= FIXED_POINT_TOL {
            v_g = next;
            break;
        }
        v_g += FIXED_POINT_DAMPING * (next - v_g);
    }
    if residual > FIXED_POINT_TOL {
        return Err(Error::NoConvergence { iterations, residual });
    }

    let v_mtj = v_drive - v_g;
    let mut sols = Vec::with_capacity(devices.len());
    for (state, inst) in devices {
        let r = params.resistance(*state, v_mtj, t, inst)?;
        sols.push(DeviceSolution { state: *state, v_mtj, current: v_mtj / r, resistance: r });
    }
    let i_sum: f64 = sols.iter().map(|d| d.current).sum();
    Ok(NodeSolution { v_g, devices: sols, iterations, residual: (r_g * i_sum - v_g).abs() })
}

/// READ: `V_READ` on both top electrodes, `V_G` sensed across `R_G`.
pub fn solve_read(
    params: &DeviceParams,
    states: (Bit, Bit),
    op: &OperatingPoint,
    insts: (&DeviceInstance, &DeviceInstance),
) -> Result<NodeSolution> {
    solve_divider(params, op.v_read, &[(states.0, insts.0), (states.1, insts.1)], op)
}

/// One driven device with the other driver in HI-Z.
pub fn solve_single(
    params: &DeviceParams,
    state: Bit,
    v_drive: f64,
    op: &OperatingPoint,
    inst: &DeviceInstance,
) -> Result<NodeSolution> {
    if v_drive == 0.0 || !v_drive.is_finite() {
        return Err(Error::InvalidParameter { name: "v_drive", reason: "must be non-zero".into() });
    }
    solve_divider(params, v_drive, &[(state, inst)], op)
}

/// Probability that `sol`'s device flips during a pulse of `duration`.
fn disturb_probability(
    params: &DeviceParams,
    dev: &DeviceSolution,
    duration: f64,
    temperature: f64,
    inst: &DeviceInstance,
) -> Result<f64> {
    match SwitchDirection::destabilizing(dev.state, dev.current) {
        Some(dir) => Ok(params.switching(temperature, dir, inst)?.probability(dev.current.abs(), duration)),
        None => Ok(0.0),
    }
}

/// Read-disturb rate of the gate: probability that at least one device
/// flips during READ. Parallel-state devices see a stabilizing current.
pub fn gate_rdr(
    params: &DeviceParams,
    states: (Bit, Bit),
    op: &OperatingPoint,
    insts: (&DeviceInstance, &DeviceInstance),
) -> Result<f64> {
    let sol = solve_read(params, states, op, insts)?;
    rdr_from_solution(params, &sol, op, [insts.0, insts.1])
}

pub(crate) fn rdr_from_solution(
    params: &DeviceParams,
    sol: &NodeSolution,
    op: &OperatingPoint,
    insts: [&DeviceInstance; 2],
) -> Result<f64> {
    let mut log_survive = 0.0;
    for (dev, inst) in sol.devices.iter().zip(insts) {
        let p = disturb_probability(params, dev, op.t_read, op.temperature, inst)?;
        log_survive += (-p).ln_1p();
    }
    // subtracting from +0 keeps a zero rate from printing as -0
    Ok(0.0 - log_survive.exp_m1())
}

/// Write error rate of the SET pulse on a device storing 0, evaluated at
/// the pre-switch (high-resistance) current.
pub fn set_wer(params: &DeviceParams, op: &OperatingPoint, inst: &DeviceInstance) -> Result<f64> {
    let sol = solve_single(params, Bit::Zero, op.v_set, op, inst)?;
    let sw = params.switching(op.temperature, SwitchDirection::ApToP, inst)?;
    Ok(sw.failure(sol.devices[0].current, op.t_set))
}

pub fn energy_read(sol: &NodeSolution, op: &OperatingPoint) -> f64 {
    op.v_read * sol.total_current() * op.t_read
}

/// Piecewise-constant energy of a switching pulse: pre-switch current up
/// to the median switching time, post-switch current afterwards.
fn two_phase_energy(
    params: &DeviceParams,
    from: Bit,
    to: Bit,
    v_drive: f64,
    duration: f64,
    op: &OperatingPoint,
    inst: &DeviceInstance,
) -> Result<f64> {
    if duration <= 0.0 {
        return Ok(0.0);
    }
    let pre = solve_single(params, from, v_drive, op, inst)?.devices[0].current;
    let Some(dir) = SwitchDirection::destabilizing(from, pre) else {
        return Ok((v_drive * pre).abs() * duration);
    };
    let post = solve_single(params, to, v_drive, op, inst)?.devices[0].current;
    let t_star = params.switching(op.temperature, dir, inst)?.median_time(pre.abs());
    Ok(match t_star {
        Some(ts) if ts < duration => v_drive.abs() * (pre.abs() * ts + post.abs() * (duration - ts)),
        _ => (v_drive * pre).abs() * duration,
    })
}

pub fn energy_set(params: &DeviceParams, op: &OperatingPoint, inst: &DeviceInstance) -> Result<f64> {
    two_phase_energy(params, Bit::Zero, Bit::One, op.v_set, op.t_set, op, inst)
}

/// FALSE pulse energy on a device initially storing `state`.
pub fn energy_false(params: &DeviceParams, state: Bit, op: &OperatingPoint, inst: &DeviceInstance) -> Result<f64> {
    two_phase_energy(params, state, Bit::Zero, op.v_reset, op.t_reset, op, inst)
}

/// Residual probability that FALSE leaves a device storing `state` at 1.
pub fn false_error(params: &DeviceParams, state: Bit, op: &OperatingPoint, inst: &DeviceInstance) -> Result<f64> {
    if state == Bit::Zero || op.t_reset <= 0.0 {
        return Ok(if state == Bit::Zero { 0.0 } else { 1.0 });
    }
    let sol = solve_single(params, Bit::One, op.v_reset, op, inst)?;
    let sw = params.switching(op.temperature, SwitchDirection::PToAp, inst)?;
    Ok(sw.failure(sol.devices[0].current.abs(), op.t_reset))
}
