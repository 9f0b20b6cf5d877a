//! SIMPLY protocol: READ both devices, compare `V_G` with `V_REF`, and
//! pulse SET on Q only when the comparator reports P = Q = 0. FALSE is a
//! single negative pulse.

use serde::{Deserialize, Serialize};

use crate::circuit::{
    energy_false, energy_read, energy_set, false_error, rdr_from_solution, set_wer, solve_read, EnergyBreakdown,
    OperatingPoint,
};
use crate::device::{Bit, DeviceParams};
use crate::error::{Error, Result};
use crate::stats::{equal_ber_vref, ReadCampaign, ReadStatistics, RngSpec, COMBOS};

/// Temperature-indexed reference voltages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtatTable {
    /// `(T, V_REF)` sorted by temperature.
    pub entries: Vec<(f64, f64)>,
}

impl PtatTable {
    const T_MATCH: f64 = 1e-6;

    pub fn lookup(&self, t: f64) -> Result<f64> {
        self.entries
            .iter()
            .find(|(tt, _)| (tt - t).abs() <= Self::T_MATCH)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Config(format!("PTAT table has no entry for {t} K")))
    }

    pub fn is_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VrefPolicy {
    /// Equal-BER reference extracted from the campaign being evaluated.
    Balanced,
    Constant(f64),
    Ptat(PtatTable),
}

impl VrefPolicy {
    pub fn resolve(&self, t: f64, stats: &ReadStatistics) -> Result<f64> {
        let v = match self {
            VrefPolicy::Balanced => equal_ber_vref(&stats.s00, &stats.s_neq, None, 0.0)?.v_ref,
            VrefPolicy::Constant(v) => *v,
            VrefPolicy::Ptat(table) => table.lookup(t)?,
        };
        if !(v > 0.0) {
            return Err(Error::Config(format!("reference voltage must be positive, got {v}")));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboReport {
    pub p: Bit,
    pub q: Bit,
    pub rdr: f64,
    pub ber: f64,
    /// Present only when a SET pulse is applied to a device storing 0.
    pub wer: Option<f64>,
    pub error: f64,
    pub energy: f64,
    pub breakdown: EnergyBreakdown,
    pub set_applied: bool,
    /// Q after the operation on the error-free path.
    pub output_bit: Bit,
    /// P after the operation on the error-free path.
    pub p_after: Bit,
}

/// Composes independent phase failures into one error probability.
pub fn compose_error(rdr: f64, ber: f64, wer: f64) -> f64 {
    1.0 - (1.0 - rdr) * (1.0 - ber) * (1.0 - wer)
}

/// Runs one SIMPLY operation on nominal devices.
///
/// The comparator decision uses the nominal `V_G`; the BER charged to the
/// row is the worst-case tail of its population at `V_REF ∓ δ`.
pub fn execute_simply(
    params: &DeviceParams,
    combo: (Bit, Bit),
    op: &OperatingPoint,
    v_ref: f64,
    stats: &ReadStatistics,
) -> Result<ComboReport> {
    let inst = params.nominal_instance();
    let read = solve_read(params, combo, op, (&inst, &inst))?;
    let rdr = rdr_from_solution(params, &read, op, [&inst, &inst])?;
    let bers = stats.worst_case_bers(v_ref, op.delta_ref);
    let ber = match combo {
        (Bit::Zero, Bit::Zero) => bers.ber_00,
        (Bit::One, Bit::One) => bers.ber_11,
        _ => bers.ber_neq,
    };

    let set_applied = read.v_g < v_ref;
    let (e_set, wer, output_bit) = if set_applied {
        let (e, w) = match combo.1 {
            Bit::Zero => (energy_set(params, op, &inst)?, Some(set_wer(params, op, &inst)?)),
            // SET on a parallel-state device only reinforces it.
            Bit::One => {
                let cur = crate::circuit::solve_single(params, Bit::One, op.v_set, op, &inst)?.devices[0].current;
                (op.v_set * cur * op.t_set, None)
            }
        };
        (e, w, Bit::One)
    } else {
        (0.0, None, combo.1)
    };

    let breakdown = EnergyBreakdown::new(energy_read(&read, op), e_set, 0.0, params.e_comp);
    Ok(ComboReport {
        p: combo.0,
        q: combo.1,
        rdr,
        ber,
        wer,
        error: compose_error(rdr, ber, wer.unwrap_or(0.0)),
        energy: breakdown.total,
        breakdown,
        set_applied,
        output_bit,
        p_after: combo.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub temperature: f64,
    pub v_ref: f64,
    pub stats: ReadStatistics,
    pub rows: Vec<ComboReport>,
    pub avg_rdr: f64,
    pub avg_ber: f64,
    pub avg_error: f64,
    pub avg_energy: f64,
}

impl GateReport {
    pub fn row(&self, p: Bit, q: Bit) -> &ComboReport {
        self.rows.iter().find(|r| r.p == p && r.q == q).expect("all four combinations present")
    }

    /// WER of the SET pulse in the 00 row.
    pub fn wer_00(&self) -> f64 {
        self.row(Bit::Zero, Bit::Zero).wer.unwrap_or(1.0)
    }
}

/// Builds the four-row report from precomputed READ statistics.
pub fn gate_report_from_stats(
    params: &DeviceParams,
    op: &OperatingPoint,
    v_ref: f64,
    stats: &ReadStatistics,
) -> Result<GateReport> {
    let rows = COMBOS.iter().map(|&c| execute_simply(params, c, op, v_ref, stats)).collect::<Result<Vec<_>>>()?;
    let mean = |f: &dyn Fn(&ComboReport) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    Ok(GateReport {
        temperature: op.temperature,
        v_ref,
        stats: *stats,
        avg_rdr: mean(&|r| r.rdr),
        avg_ber: mean(&|r| r.ber),
        avg_error: mean(&|r| r.error),
        avg_energy: mean(&|r| r.energy),
        rows,
    })
}

/// Runs the READ campaign, resolves `V_REF` per `policy` and assembles the
/// per-combination error/energy report.
pub fn gate_report(
    params: &DeviceParams,
    op: &OperatingPoint,
    policy: &VrefPolicy,
    n: usize,
    rng: &RngSpec,
) -> Result<GateReport> {
    op.validate()?;
    let stats = ReadCampaign::run(params, op, n, rng)?.statistics()?;
    let v_ref = policy.resolve(op.temperature, &stats)?;
    gate_report_from_stats(params, op, v_ref, &stats)
}

/// Error-free functional outcome `(P, Q, P', Q')` for each input pair:
/// no variation, no reference drift, probabilities ignored.
pub fn truth_table(params: &DeviceParams, op: &OperatingPoint) -> Result<Vec<(Bit, Bit, Bit, Bit)>> {
    let ideal = DeviceParams { sigma_area_rel: 0.0, sigma_tox_rel: 0.0, ..params.clone() };
    let op = OperatingPoint { delta_ref: 0.0, ..op.clone() };
    let stats = ReadCampaign::run(&ideal, &op, crate::stats::MIN_TRIALS, &RngSpec::new(0))?.statistics()?;
    let v_ref = VrefPolicy::Balanced.resolve(op.temperature, &stats)?;
    COMBOS
        .iter()
        .map(|&c| execute_simply(&ideal, c, &op, v_ref, &stats).map(|r| (r.p, r.q, r.p_after, r.output_bit)))
        .collect()
}

/// True when the error-free outcomes match material implication
/// `Q' = ¬P ∨ Q` with P left unchanged.
pub fn truth_table_check(params: &DeviceParams, op: &OperatingPoint) -> Result<bool> {
    Ok(truth_table(params, op)?.into_iter().all(|(p, q, p2, q2)| {
        let implied = if p == Bit::Zero || q == Bit::One { Bit::One } else { Bit::Zero };
        p2 == p && q2 == implied
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalseReport {
    pub start: Bit,
    pub end: Bit,
    pub error: f64,
    pub energy: f64,
}

/// FALSE: drive the device with the negative reset pulse.
pub fn false_op(params: &DeviceParams, state: Bit, op: &OperatingPoint) -> Result<FalseReport> {
    if !(op.v_reset < 0.0) {
        return Err(Error::InvalidParameter { name: "v_reset", reason: "must be < 0".into() });
    }
    let inst = params.nominal_instance();
    Ok(FalseReport {
        start: state,
        end: Bit::Zero,
        error: false_error(params, state, op, &inst)?,
        energy: energy_false(params, state, op, &inst)?,
    })
}

/// Equal-BER reference voltage at each temperature, from fresh READ
/// campaigns under the same seed.
pub fn ptat_vref_table(
    params: &DeviceParams,
    template: &OperatingPoint,
    temperatures: &[f64],
    n: usize,
    rng: &RngSpec,
) -> Result<PtatTable> {
    let (lo, hi) = params.temperature_range();
    let mut entries = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        if !(t >= lo && t <= hi) {
            return Err(Error::TemperatureOutOfRange(t, lo, hi));
        }
        let op = OperatingPoint { temperature: t, ..template.clone() };
        let stats = ReadCampaign::run(params, &op, n, rng)?.statistics()?;
        entries.push((t, VrefPolicy::Balanced.resolve(t, &stats)?));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PtatTable { entries })
}
