use serde::Serialize;
use simply_core::calibration::{calibrate, validate_heldout, AnchorResiduals, CalibrationAnchors, Check};
use simply_core::device::SwitchDirection;
use simply_core::explorer::{sweep_full, sweep_read, sweep_wer, temperature_analysis, vset_targets, Range, TARGET_WER};
use simply_core::gate::gate_report;
use simply_core::stats::{equal_ber_vref, GaussianSummary, ReadCampaign, COMBOS};
use simply_core::{Bit, RngSpec, VrefPolicy};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Sink;

/// Temperature grid of the device characteristic curves.
pub const CHARACTERIZE_T: Range = Range { start: 250.0, stop: 350.0, step: 5.0 };
/// Bias grid of the WER-versus-voltage curves.
pub const CHARACTERIZE_V: Range = Range { start: 0.2, stop: 1.2, step: 0.02 };
pub const WER_PULSE: f64 = 10e-9;

fn combo_label((p, q): (Bit, Bit)) -> String {
    format!("{p}{q}")
}

#[derive(Serialize)]
struct RtRow {
    temperature: f64,
    r_l: f64,
    r_h: f64,
    tmr0: f64,
}

#[derive(Serialize)]
struct DeltaIcRow {
    temperature: f64,
    delta: f64,
    ic_ap_to_p: f64,
    ic_p_to_ap: f64,
}

#[derive(Serialize)]
struct WerRow {
    temperature: f64,
    v_mtj: f64,
    wer: f64,
}

pub fn characterize(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let p = &cfg.device;
    let inst = p.nominal_instance();
    let mut rt = Vec::new();
    let mut dic = Vec::new();
    for t in CHARACTERIZE_T.values() {
        rt.push(RtRow {
            temperature: t,
            r_l: p.resistance(Bit::One, 0.0, t, &inst)?,
            r_h: p.resistance(Bit::Zero, 0.0, t, &inst)?,
            tmr0: p.tmr(0.0, t)?,
        });
        dic.push(DeltaIcRow {
            temperature: t,
            delta: p.thermal_stability(t, &inst)?,
            ic_ap_to_p: p.critical_current(t, SwitchDirection::ApToP, &inst)?,
            ic_p_to_ap: p.critical_current(t, SwitchDirection::PToAp, &inst)?,
        });
    }
    let mut wer = Vec::new();
    for &t in &cfg.sweep.temperatures {
        for v in CHARACTERIZE_V.values() {
            wer.push(WerRow { temperature: t, v_mtj: v, wer: p.write_error_rate(t, v, WER_PULSE, &inst)? });
        }
    }
    out.table("characterize_rt", &rt)?;
    out.table("characterize_delta_ic", &dic)?;
    out.table("characterize_wer", &wer)
}

#[derive(Serialize)]
struct DistributionRow {
    combo: String,
    trial: usize,
    v_g: f64,
}

#[derive(Serialize)]
struct Population {
    combos: &'static str,
    mu: f64,
    sigma: f64,
    n: usize,
}

impl Population {
    fn new(combos: &'static str, s: &GaussianSummary) -> Self {
        Self { combos, mu: s.mu, sigma: s.sigma, n: s.n }
    }
}

#[derive(Serialize)]
struct ReadSummary {
    seed: u64,
    trials: usize,
    temperature: f64,
    r_g: f64,
    v_read: f64,
    delta_ref: f64,
    populations: Vec<Population>,
    rm_nom: f64,
    rm_3sigma: f64,
    v_ref: f64,
    balanced_ber: f64,
    worst_ber_00: f64,
    worst_ber_neq: f64,
    ber_11: Option<f64>,
}

pub fn read(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let (op, n) = (&cfg.operating, cfg.campaign.trials);
    let campaign = ReadCampaign::run(&cfg.device, op, n, &RngSpec::new(cfg.campaign.seed))?;
    let rows: Vec<DistributionRow> = COMBOS
        .iter()
        .flat_map(|&c| {
            campaign.combo(c).iter().enumerate().map(move |(trial, &v_g)| DistributionRow {
                combo: combo_label(c),
                trial,
                v_g,
            })
        })
        .collect();
    let stats = campaign.statistics()?;
    let ber = equal_ber_vref(&stats.s00, &stats.s_neq, Some(&stats.s11), op.delta_ref)?;
    let (rm_nom, rm_3sigma) = stats.margins();
    let summary = ReadSummary {
        seed: cfg.campaign.seed,
        trials: n,
        temperature: op.temperature,
        r_g: op.r_g,
        v_read: op.v_read,
        delta_ref: op.delta_ref,
        populations: vec![
            Population::new("00", &stats.s00),
            Population::new("01+10", &stats.s_neq),
            Population::new("11", &stats.s11),
        ],
        rm_nom,
        rm_3sigma,
        v_ref: ber.v_ref,
        balanced_ber: ber.balanced_ber,
        worst_ber_00: ber.worst_ber_00,
        worst_ber_neq: ber.worst_ber_neq,
        ber_11: ber.ber_11,
    };
    out.table("read_distributions", &rows)?;
    out.document("read_summary", &summary)
}

#[derive(Serialize)]
struct GateRow {
    combo: String,
    rdr: f64,
    ber: f64,
    wer: Option<f64>,
    error: f64,
    energy: f64,
    e_read: Option<f64>,
    e_set: Option<f64>,
    e_comp: Option<f64>,
    output: Option<u8>,
}

pub fn gate(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let rng = RngSpec::new(cfg.campaign.seed);
    let report = gate_report(&cfg.device, &cfg.operating, &VrefPolicy::Balanced, cfg.campaign.trials, &rng)?;
    let mut rows: Vec<GateRow> = report
        .rows
        .iter()
        .map(|r| GateRow {
            combo: combo_label((r.p, r.q)),
            rdr: r.rdr,
            ber: r.ber,
            wer: r.wer,
            error: r.error,
            energy: r.energy,
            e_read: Some(r.breakdown.e_read),
            e_set: Some(r.breakdown.e_set),
            e_comp: Some(r.breakdown.e_comp),
            output: Some(r.output_bit.as_u8()),
        })
        .collect();
    rows.push(GateRow {
        combo: "avg".into(),
        rdr: report.avg_rdr,
        ber: report.avg_ber,
        wer: None,
        error: report.avg_error,
        energy: report.avg_energy,
        e_read: None,
        e_set: None,
        e_comp: None,
        output: None,
    });
    out.table("gate_report", &rows)
}

#[derive(Serialize)]
struct VsetRow {
    r_g: f64,
    v_set: f64,
}

#[derive(Serialize)]
struct WerMapRow {
    r_g: f64,
    v_set: f64,
    wer_00: f64,
}

pub fn sweep(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let (p, grid, op, n) = (&cfg.device, &cfg.sweep, &cfg.operating, cfg.campaign.trials);
    let rng = RngSpec::new(cfg.campaign.seed);
    let read_map = sweep_read(p, grid, op, n, &rng)?;
    let targets: Vec<VsetRow> =
        vset_targets(p, grid, op, TARGET_WER)?.into_iter().map(|(r_g, v_set)| VsetRow { r_g, v_set }).collect();
    let wer_map: Vec<WerMapRow> =
        sweep_wer(p, grid, op)?.into_iter().map(|(r_g, v_set, wer_00)| WerMapRow { r_g, v_set, wer_00 }).collect();
    let full_map = sweep_full(p, grid, op, n, &rng)?;
    out.table("sweep_read", &read_map)?;
    out.table("vset_targets", &targets)?;
    out.table("sweep_wer", &wer_map)?;
    out.table("sweep_full", &full_map)
}

pub fn temperature(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let rng = RngSpec::new(cfg.campaign.seed);
    let (records, _) =
        temperature_analysis(&cfg.device, &cfg.operating, &cfg.sweep.temperatures, cfg.campaign.trials, &rng)?;
    out.table("temperature", &records)
}

#[derive(Serialize)]
struct Constants {
    n_eff: f64,
    k_ic: f64,
    k_w: f64,
    c_tox: f64,
    e_comp: f64,
}

#[derive(Serialize)]
struct CalibrationDoc {
    seed: u64,
    trials: usize,
    anchors: CalibrationAnchors,
    constants: Constants,
    outer_iterations: usize,
    residuals: AnchorResiduals,
    heldout_pass: bool,
    heldout: Vec<Check>,
}

pub fn calibrate_cmd(cfg: &RunConfig, out: &mut Sink) -> Result<(), CliError> {
    let rng = RngSpec::new(cfg.campaign.seed);
    let anchors = CalibrationAnchors::default();
    let r = calibrate(&cfg.device, &anchors, cfg.campaign.trials, &rng)?;
    let heldout = validate_heldout(&r.params, cfg.campaign.trials, &rng)?;
    let doc = CalibrationDoc {
        seed: cfg.campaign.seed,
        trials: cfg.campaign.trials,
        anchors,
        constants: Constants { n_eff: r.n_eff, k_ic: r.k_ic, k_w: r.k_w, c_tox: r.c_tox, e_comp: r.e_comp },
        outer_iterations: r.outer_iterations,
        residuals: r.residuals,
        heldout_pass: heldout.all_pass(),
        heldout: heldout.checks,
    };
    out.document("calibration", &doc)
}
