//! Design-space sweeps over load resistor, READ and SET voltages, and
//! temperature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{set_wer, OperatingPoint};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::gate::{gate_report_from_stats, GateReport, PtatTable, VrefPolicy};
use crate::roots::bisect;
use crate::stats::{ReadCampaign, ReadStatistics, RngSpec};

pub const TARGET_WER: f64 = 1e-7;
pub const VSET_BRACKET: (f64, f64) = (0.4, 1.5);
/// Log-space tolerance of the target-WER search (decades).
pub const VSET_LOG_TOL: f64 = 0.02;

const R_G_BOUNDS: (f64, f64) = (5e3, 30e3);
const V_READ_BOUNDS: (f64, f64) = (0.2, 1.0);
const V_SET_BOUNDS: (f64, f64) = (0.5, 1.3);
const EPS: f64 = 1e-9;

/// Inclusive arithmetic range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + EPS).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub r_g: Vec<f64>,
    pub v_read: Range,
    pub v_set: Range,
    pub temperatures: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            r_g: vec![5e3, 10e3, 15e3, 20e3, 25e3, 30e3],
            v_read: Range { start: 0.2, stop: 1.0, step: 0.025 },
            v_set: Range { start: 0.5, stop: 1.3, step: 0.01 },
            temperatures: vec![250.0, 275.0, 300.0, 325.0, 350.0],
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let within = |name: &'static str, v: f64, (lo, hi): (f64, f64)| {
            if v >= lo - EPS && v <= hi + EPS {
                Ok(())
            } else {
                Err(Error::Config(format!("sweep {name} value {v} outside [{lo}, {hi}]")))
            }
        };
        if self.r_g.is_empty() || self.temperatures.is_empty() {
            return Err(Error::Config("sweep r_g and temperatures must be non-empty".into()));
        }
        for &r in &self.r_g {
            within("r_g", r, R_G_BOUNDS)?;
        }
        for &t in &self.temperatures {
            within("temperature", t, (250.0, 350.0))?;
        }
        for (name, r, bounds) in [("v_read", self.v_read, V_READ_BOUNDS), ("v_set", self.v_set, V_SET_BOUNDS)] {
            if !(r.step > 0.0) || r.stop < r.start {
                return Err(Error::Config(format!("sweep {name} needs step > 0 and stop >= start")));
            }
            within(name, r.start, bounds)?;
            within(name, r.stop, bounds)?;
        }
        Ok(())
    }
}

/// One cell of the design-space maps. SET-side fields are absent in
/// READ-only sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r_g: f64,
    pub v_read: f64,
    pub v_set: Option<f64>,
    pub temperature: f64,
    pub rm_nom: f64,
    pub rm_3sigma: f64,
    pub v_ref: f64,
    pub avg_rdr: f64,
    pub avg_ber: f64,
    pub wer_00: Option<f64>,
    pub avg_error: Option<f64>,
    pub avg_energy: Option<f64>,
}

impl SweepPoint {
    fn from_report(op: &OperatingPoint, report: &GateReport, with_set: bool) -> Self {
        let (rm_nom, rm_3sigma) = report.stats.margins();
        Self {
            r_g: op.r_g,
            v_read: op.v_read,
            v_set: with_set.then_some(op.v_set),
            temperature: op.temperature,
            rm_nom,
            rm_3sigma,
            v_ref: report.v_ref,
            avg_rdr: report.avg_rdr,
            avg_ber: report.avg_ber,
            wer_00: with_set.then(|| report.wer_00()),
            avg_error: with_set.then_some(report.avg_error),
            avg_energy: with_set.then_some(report.avg_energy),
        }
    }
}

fn read_statistics(params: &DeviceParams, op: &OperatingPoint, n: usize, rng: &RngSpec) -> Result<ReadStatistics> {
    ReadCampaign::run(params, op, n, rng)?.statistics()
}

fn evaluate(params: &DeviceParams, op: &OperatingPoint, n: usize, rng: &RngSpec, with_set: bool) -> Result<SweepPoint> {
    let stats = read_statistics(params, op, n, rng)?;
    let v_ref = VrefPolicy::Balanced.resolve(op.temperature, &stats)?;
    let report = gate_report_from_stats(params, op, v_ref, &stats)?;
    Ok(SweepPoint::from_report(op, &report, with_set))
}

/// SET amplitude at which the 00 write error rate meets `target`.
pub fn vset_for_target_wer(
    params: &DeviceParams,
    r_g: f64,
    temperature: f64,
    target: f64,
    template: &OperatingPoint,
) -> Result<f64> {
    if !(target > 1e-12 && target < 0.5) {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!("must lie in (1e-12, 0.5), got {target}"),
        });
    }
    let inst = params.nominal_instance();
    let mut err = None;
    let log_gap = |v: f64| {
        let op = OperatingPoint { r_g, temperature, v_set: v, ..template.clone() };
        match set_wer(params, &op, &inst) {
            Ok(w) => w.max(f64::MIN_POSITIVE).log10() - target.log10(),
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        }
    };
    let v = bisect("V_SET for target WER", log_gap, VSET_BRACKET.0, VSET_BRACKET.1, 1e-7, VSET_LOG_TOL * 0.1);
    match err {
        Some(e) => Err(e),
        None => v,
    }
}

/// Full READ-side map over `grid.r_g × grid.v_read` at the template
/// temperature, in grid order (R_G outer).
pub fn sweep_read(
    params: &DeviceParams,
    grid: &SweepGrid,
    template: &OperatingPoint,
    n: usize,
    rng: &RngSpec,
) -> Result<Vec<SweepPoint>> {
    grid.validate()?;
    let cells: Vec<(f64, f64)> =
        grid.r_g.iter().flat_map(|&r| grid.v_read.values().into_iter().map(move |v| (r, v))).collect();
    cells
        .par_iter()
        .map(|&(r_g, v_read)| {
            let op = OperatingPoint { r_g, v_read, ..template.clone() };
            evaluate(params, &op, n, rng, false)
        })
        .collect()
}

/// V_READ minimizing the average worst-case BER at one load resistor.
pub fn find_min_ber(
    params: &DeviceParams,
    r_g: f64,
    grid: &SweepGrid,
    template: &OperatingPoint,
    n: usize,
    rng: &RngSpec,
) -> Result<(f64, f64)> {
    let sub = SweepGrid { r_g: vec![r_g], ..grid.clone() };
    let rows = sweep_read(params, &sub, template, n, rng)?;
    Ok(min_ber_of(&rows))
}

/// Argmin of the average BER over a set of sweep points.
pub fn min_ber_of(rows: &[SweepPoint]) -> (f64, f64) {
    rows.iter()
        .min_by(|a, b| a.avg_ber.total_cmp(&b.avg_ber))
        .map(|p| (p.v_read, p.avg_ber))
        .unwrap_or((f64::NAN, f64::NAN))
}

/// `(R_G, V_SET*)` pairs meeting the target WER at the template temperature.
pub fn vset_targets(
    params: &DeviceParams,
    grid: &SweepGrid,
    template: &OperatingPoint,
    target: f64,
) -> Result<Vec<(f64, f64)>> {
    grid.r_g
        .iter()
        .map(|&r| vset_for_target_wer(params, r, template.temperature, target, template).map(|v| (r, v)))
        .collect()
}

/// WER of the 00 SET over `grid.r_g × grid.v_set` (nominal devices).
pub fn sweep_wer(params: &DeviceParams, grid: &SweepGrid, template: &OperatingPoint) -> Result<Vec<(f64, f64, f64)>> {
    grid.validate()?;
    let inst = params.nominal_instance();
    let mut out = Vec::new();
    for &r_g in &grid.r_g {
        for v_set in grid.v_set.values() {
            let op = OperatingPoint { r_g, v_set, ..template.clone() };
            out.push((r_g, v_set, set_wer(params, &op, &inst)?));
        }
    }
    Ok(out)
}

/// Error/energy maps with V_SET pinned per R_G to the target WER.
pub fn sweep_full(
    params: &DeviceParams,
    grid: &SweepGrid,
    template: &OperatingPoint,
    n: usize,
    rng: &RngSpec,
) -> Result<Vec<SweepPoint>> {
    grid.validate()?;
    let targets = vset_targets(params, grid, template, TARGET_WER)?;
    let cells: Vec<(f64, f64, f64)> =
        targets.iter().flat_map(|&(r, vs)| grid.v_read.values().into_iter().map(move |v| (r, v, vs))).collect();
    cells
        .par_iter()
        .map(|&(r_g, v_read, v_set)| {
            let op = OperatingPoint { r_g, v_read, v_set, ..template.clone() };
            evaluate(params, &op, n, rng, true)
        })
        .collect()
}

/// Operating point of the temperature study.
pub fn temperature_template() -> OperatingPoint {
    OperatingPoint { r_g: 15e3, v_read: 0.375, v_set: 0.89, ..OperatingPoint::default() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureRecord {
    pub temperature: f64,
    pub avg_rdr: f64,
    pub wer_00: f64,
    pub rm_nom: f64,
    pub rm_3sigma: f64,
    pub v_ref_const: f64,
    pub v_ref_ptat: f64,
    pub avg_error_const: f64,
    pub avg_error_ptat: f64,
    pub avg_energy: f64,
}

/// Per-temperature error budget under a constant reference (the 300 K
/// value) and under a PTAT reference tracking the equal-BER point.
pub fn temperature_analysis(
    params: &DeviceParams,
    template: &OperatingPoint,
    temperatures: &[f64],
    n: usize,
    rng: &RngSpec,
) -> Result<(Vec<TemperatureRecord>, PtatTable)> {
    let (lo, hi) = params.temperature_range();
    if let Some(&t) = temperatures.iter().find(|&&t| !(t >= lo && t <= hi)) {
        return Err(Error::TemperatureOutOfRange(t, lo, hi));
    }
    let stats: Vec<(f64, ReadStatistics)> = temperatures
        .par_iter()
        .map(|&t| {
            let op = OperatingPoint { temperature: t, ..template.clone() };
            read_statistics(params, &op, n, rng).map(|s| (t, s))
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(stats.len());
    for (t, s) in &stats {
        entries.push((*t, VrefPolicy::Balanced.resolve(*t, s)?));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ptat = PtatTable { entries };

    let anchor = template.temperature;
    let v_const = match ptat.lookup(anchor) {
        Ok(v) => v,
        Err(_) => {
            let op = OperatingPoint { temperature: anchor, ..template.clone() };
            VrefPolicy::Balanced.resolve(anchor, &read_statistics(params, &op, n, rng)?)?
        }
    };

    let records = stats
        .iter()
        .map(|(t, s)| {
            let op = OperatingPoint { temperature: *t, ..template.clone() };
            let v_ptat = ptat.lookup(*t)?;
            let with_ptat = gate_report_from_stats(params, &op, v_ptat, s)?;
            let with_const = gate_report_from_stats(params, &op, v_const, s)?;
            let (rm_nom, rm_3sigma) = s.margins();
            Ok(TemperatureRecord {
                temperature: *t,
                avg_rdr: with_ptat.avg_rdr,
                wer_00: with_ptat.wer_00(),
                rm_nom,
                rm_3sigma,
                v_ref_const: v_const,
                v_ref_ptat: v_ptat,
                avg_error_const: with_const.avg_error,
                avg_error_ptat: with_ptat.avg_error,
                avg_energy: with_ptat.avg_energy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((records, ptat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let r = Range { start: 0.2, stop: 1.0, step: 0.025 };
        let v = r.values();
        assert_eq!(v.len(), 33);
        assert!((v[32] - 1.0).abs() < 1e-12);
        assert_eq!(Range { start: 0.5, stop: 0.5, step: 0.1 }.values(), vec![0.5]);
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::default().validate().is_ok());
        let g = SweepGrid { r_g: vec![50e3], ..Default::default() };
        assert!(g.validate().is_err());
        let g = SweepGrid { v_read: Range { start: 0.2, stop: 1.0, step: 0.0 }, ..Default::default() };
        assert!(g.validate().is_err());
        let g = SweepGrid { v_set: Range { start: 0.4, stop: 1.0, step: 0.01 }, ..Default::default() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn vset_target_search() {
        let p = DeviceParams::calibrated();
        let op = OperatingPoint::default();
        let v10 = vset_for_target_wer(&p, 10e3, 300.0, TARGET_WER, &op).unwrap();
        assert!((v10 - 0.78).abs() < 0.01, "{v10}");
        let w = set_wer(&p, &OperatingPoint { v_set: v10, ..op.clone() }, &p.nominal_instance()).unwrap();
        assert!((w.log10() + 7.0).abs() <= VSET_LOG_TOL);
        let v5 = vset_for_target_wer(&p, 5e3, 300.0, TARGET_WER, &op).unwrap();
        let v30 = vset_for_target_wer(&p, 30e3, 300.0, TARGET_WER, &op).unwrap();
        assert!(v5 < v10 && v10 < v30);
        assert!(vset_for_target_wer(&p, 10e3, 300.0, 0.7, &op).is_err());
        assert!(vset_for_target_wer(&p, 10e3, 300.0, 1e-13, &op).is_err());
    }

    #[test]
    fn wer_map_trends() {
        let p = DeviceParams::calibrated();
        let grid = SweepGrid {
            r_g: vec![10e3, 15e3, 20e3],
            v_set: Range { start: 0.8, stop: 1.0, step: 0.05 },
            ..Default::default()
        };
        let rows = sweep_wer(&p, &grid, &OperatingPoint::default()).unwrap();
        assert_eq!(rows.len(), 15);
        let falls = |a: f64, b: f64| b <= a;
        for r in rows.chunks(5) {
            assert!(r.windows(2).all(|w| falls(w[0].2, w[1].2)), "{r:?}");
        }
        for k in 0..5 {
            assert!(falls(rows[10 + k].2, rows[5 + k].2) && falls(rows[5 + k].2, rows[k].2));
        }
        assert!(rows[14].2 < rows[10].2 && rows[4].2 < rows[0].2);
    }
}
