//! WebAssembly bindings for the static demo page. Every export returns a
//! JSON string; the plain functions are callable (and tested) natively.

use serde::Serialize;
use simply_core::device::SwitchDirection;
use simply_core::explorer::{vset_for_target_wer, Range, TARGET_WER};
use simply_core::stats::{equal_ber_vref, ReadCampaign, COMBOS};
use simply_core::{Bit, DeviceParams, OperatingPoint, RngSpec};
use wasm_bindgen::prelude::*;

const MAX_TRIALS: usize = 20_000;
const BINS: usize = 60;

#[derive(Serialize)]
pub struct DeviceCurves {
    pub temperature: Vec<f64>,
    pub r_l: Vec<f64>,
    pub r_h: Vec<f64>,
    pub tmr0: Vec<f64>,
    pub delta: Vec<f64>,
    pub ic_ap_to_p: Vec<f64>,
    pub ic_p_to_ap: Vec<f64>,
}

/// Device characteristics on a 1 K grid over the tabulated range.
pub fn device_curves() -> Result<DeviceCurves, String> {
    let p = DeviceParams::calibrated();
    let inst = p.nominal_instance();
    let (lo, hi) = p.temperature_range();
    let mut c = DeviceCurves {
        temperature: vec![],
        r_l: vec![],
        r_h: vec![],
        tmr0: vec![],
        delta: vec![],
        ic_ap_to_p: vec![],
        ic_p_to_ap: vec![],
    };
    let e = |e: simply_core::Error| e.to_string();
    for t in (Range { start: lo, stop: hi, step: 1.0 }).values() {
        c.temperature.push(t);
        c.r_l.push(p.resistance(Bit::One, 0.0, t, &inst).map_err(e)?);
        c.r_h.push(p.resistance(Bit::Zero, 0.0, t, &inst).map_err(e)?);
        c.tmr0.push(p.tmr(0.0, t).map_err(e)?);
        c.delta.push(p.thermal_stability(t, &inst).map_err(e)?);
        c.ic_ap_to_p.push(p.critical_current(t, SwitchDirection::ApToP, &inst).map_err(e)?);
        c.ic_p_to_ap.push(p.critical_current(t, SwitchDirection::PToAp, &inst).map_err(e)?);
    }
    Ok(c)
}

#[derive(Serialize)]
pub struct Histogram {
    pub combo: String,
    pub counts: Vec<u32>,
}

#[derive(Serialize)]
pub struct ReadView {
    pub bin_edges: Vec<f64>,
    pub histograms: Vec<Histogram>,
    pub rm_nom: f64,
    pub rm_3sigma: f64,
    pub v_ref: f64,
    pub balanced_ber: f64,
    pub worst_ber_00: f64,
    pub worst_ber_neq: f64,
}

/// Monte Carlo V_G histograms for the four input combinations.
pub fn read_distributions(
    r_g: f64,
    v_read: f64,
    temperature: f64,
    trials: usize,
    seed: u64,
) -> Result<ReadView, String> {
    if trials > MAX_TRIALS {
        return Err(format!("at most {MAX_TRIALS} trials in the browser"));
    }
    let p = DeviceParams::calibrated();
    let op = OperatingPoint { r_g, v_read, temperature, ..OperatingPoint::default() };
    let e = |e: simply_core::Error| e.to_string();
    op.validate().map_err(e)?;
    let campaign = ReadCampaign::run(&p, &op, trials, &RngSpec::new(seed)).map_err(e)?;
    let stats = campaign.statistics().map_err(e)?;
    let ber = equal_ber_vref(&stats.s00, &stats.s_neq, Some(&stats.s11), op.delta_ref).map_err(e)?;

    let all = campaign.samples.iter().flatten();
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / BINS as f64).max(f64::MIN_POSITIVE);
    let bin_edges = (0..=BINS).map(|k| lo + k as f64 * width).collect();
    let histograms = COMBOS
        .iter()
        .map(|&c| {
            let mut counts = vec![0u32; BINS];
            for &v in campaign.combo(c) {
                counts[(((v - lo) / width) as usize).min(BINS - 1)] += 1;
            }
            Histogram { combo: format!("{}{}", c.0, c.1), counts }
        })
        .collect();
    let (rm_nom, rm_3sigma) = stats.margins();
    Ok(ReadView {
        bin_edges,
        histograms,
        rm_nom,
        rm_3sigma,
        v_ref: ber.v_ref,
        balanced_ber: ber.balanced_ber,
        worst_ber_00: ber.worst_ber_00,
        worst_ber_neq: ber.worst_ber_neq,
    })
}

#[derive(Serialize)]
pub struct WerCurve {
    pub v_set: Vec<f64>,
    pub wer: Vec<f64>,
    /// V_SET meeting the 1e-7 target, if inside the search bracket.
    pub v_set_target: Option<f64>,
}

/// SET write error rate of a device storing 0 versus drive amplitude.
pub fn wer_curve(r_g: f64, temperature: f64) -> Result<WerCurve, String> {
    let p = DeviceParams::calibrated();
    let inst = p.nominal_instance();
    let template = OperatingPoint { r_g, temperature, ..OperatingPoint::default() };
    template.validate().map_err(|e| e.to_string())?;
    let mut c = WerCurve { v_set: vec![], wer: vec![], v_set_target: None };
    for v in (Range { start: 0.4, stop: 1.5, step: 0.005 }).values() {
        let op = OperatingPoint { v_set: v, ..template.clone() };
        c.v_set.push(v);
        c.wer.push(simply_core::circuit::set_wer(&p, &op, &inst).map_err(|e| e.to_string())?);
    }
    c.v_set_target = vset_for_target_wer(&p, r_g, temperature, TARGET_WER, &template).ok();
    Ok(c)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = deviceCurves)]
pub fn device_curves_js() -> Result<String, JsValue> {
    to_js(device_curves())
}

#[wasm_bindgen(js_name = readDistributions)]
pub fn read_distributions_js(
    r_g: f64,
    v_read: f64,
    temperature: f64,
    trials: u32,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(read_distributions(r_g, v_read, temperature, trials as usize, u64::from(seed)))
}

#[wasm_bindgen(js_name = werCurve)]
pub fn wer_curve_js(r_g: f64, temperature: f64) -> Result<String, JsValue> {
    to_js(wer_curve(r_g, temperature))
}
