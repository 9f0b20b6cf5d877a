//! Perpendicular STT-MTJ compact model.
//!
//! Resistance, TMR bias/temperature dependence, thermal stability factor,
//! critical current and a two-regime stochastic switching model
//! (Néel–Arrhenius below the critical current, precessional above it).
//!
//! All quantities are SI. Saturation magnetization is tabulated in tesla
//! (`µ0·M_S`) and converted to A/m internally.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots::bisect;

/// Stored bit. `One` is the parallel (low resistance) state, `Zero` the
/// antiparallel (high resistance) state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Bit> {
        match v {
            0 => Some(Bit::Zero),
            1 => Some(Bit::One),
            _ => None,
        }
    }
}

impl std::fmt::Display for Bit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchDirection {
    /// Bit 0 -> 1, driven by positive top-electrode bias.
    ApToP,
    /// Bit 1 -> 0, driven by negative top-electrode bias.
    PToAp,
}

impl SwitchDirection {
    /// Direction a signed device current pushes `state` towards, if it
    /// destabilizes it. Stabilizing currents return `None`.
    pub fn destabilizing(state: Bit, current: f64) -> Option<SwitchDirection> {
        match state {
            Bit::Zero if current > 0.0 => Some(SwitchDirection::ApToP),
            Bit::One if current < 0.0 => Some(SwitchDirection::PToAp),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    /// Vacuum permeability (T·m/A).
    pub mu0: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Elementary charge (C).
    pub e: f64,
    /// Gyromagnetic ratio (rad·s⁻¹·T⁻¹).
    pub gamma: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Thermal attempt time (s).
    pub tau0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            mu0: 4.0e-7 * PI,
            k_b: 1.380649e-23,
            e: 1.602176634e-19,
            gamma: 1.76e11,
            mu_b: 9.2740100783e-24,
            tau0: 1.0e-9,
        }
    }
}

/// One tabulated temperature row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalRow {
    /// Temperature (K).
    pub t: f64,
    /// Spin polarization.
    pub p: f64,
    /// Saturation magnetization µ0·M_S (T).
    pub m_s: f64,
    /// Interfacial perpendicular anisotropy (J/m²).
    pub k_i: f64,
}

/// Temperature-dependent material parameters at one temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalParams {
    pub p: f64,
    pub m_s: f64,
    pub k_i: f64,
    pub tmr0: f64,
}

/// One Monte Carlo sample of the device geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceInstance {
    /// Oxide barrier thickness (m).
    pub t_ox: f64,
    /// Cross-section area (m²).
    pub area: f64,
}

/// Deserialized fields that are absent take the calibrated values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default = "DeviceParams::calibrated")]
pub struct DeviceParams {
    /// Diameter (m).
    pub d: f64,
    /// Free-layer thickness (m).
    pub t_fl: f64,
    /// Nominal oxide thickness (m).
    pub t_ox_nom: f64,
    /// Resistance-area product in the parallel state (Ω·m²).
    pub ra: f64,
    /// Bias at which TMR halves (V).
    pub v_h: f64,
    /// Gilbert damping.
    pub alpha: f64,
    pub temp_table: Vec<ThermalRow>,
    /// Zero-bias TMR anchors as (T, TMR0) pairs.
    pub tmr0_anchors: [(f64, f64); 2],
    pub sigma_tox_rel: f64,
    pub sigma_area_rel: f64,
    /// Effective demagnetization factor difference.
    pub n_eff: f64,
    /// Critical-current scale.
    pub k_ic: f64,
    /// Precessional-rate scale.
    pub k_w: f64,
    /// Exponential sensitivity of R_L to oxide thickness (1/m).
    pub c_tox: f64,
    /// Comparator energy per compare (J).
    pub e_comp: f64,
    pub constants: PhysicalConstants,
}

impl Default for DeviceParams {
    /// Uncalibrated starting point: thin-film demagnetization, unit scales.
    fn default() -> Self {
        Self {
            d: 30e-9,
            t_fl: 1.15e-9,
            t_ox_nom: 0.85e-9,
            ra: 10e-12,
            v_h: 0.5,
            alpha: 0.03,
            temp_table: vec![
                ThermalRow { t: 250.0, p: 0.68, m_s: 1.64, k_i: 1.41e-3 },
                ThermalRow { t: 300.0, p: 0.66, m_s: 1.58, k_i: 1.30e-3 },
                ThermalRow { t: 350.0, p: 0.64, m_s: 1.51, k_i: 1.18e-3 },
            ],
            tmr0_anchors: [(250.0, 1.66), (350.0, 1.34)],
            sigma_tox_rel: 0.01,
            sigma_area_rel: 0.05,
            n_eff: 1.0,
            k_ic: 1.0,
            k_w: 1.0,
            c_tox: 6.5e9,
            e_comp: 42e-15,
            constants: PhysicalConstants::default(),
        }
    }
}

impl DeviceParams {
    /// Constants produced by `calibration::calibrate` from the default
    /// parameters with seed 1 and 1000 trials.
    pub fn calibrated() -> Self {
        Self {
            n_eff: crate::calibration::CALIBRATED_N_EFF,
            k_ic: crate::calibration::CALIBRATED_K_IC,
            c_tox: crate::calibration::CALIBRATED_C_TOX,
            e_comp: crate::calibration::CALIBRATED_E_COMP,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        }
        positive("d", self.d)?;
        positive("t_fl", self.t_fl)?;
        positive("t_ox_nom", self.t_ox_nom)?;
        positive("ra", self.ra)?;
        positive("v_h", self.v_h)?;
        positive("alpha", self.alpha)?;
        positive("k_ic", self.k_ic)?;
        positive("k_w", self.k_w)?;
        positive("c_tox", self.c_tox)?;
        if !(self.e_comp >= 0.0) {
            return Err(Error::InvalidParameter { name: "e_comp", reason: "must be >= 0".into() });
        }
        let c = &self.constants;
        for (name, v) in
            [("mu0", c.mu0), ("k_b", c.k_b), ("e", c.e), ("gamma", c.gamma), ("mu_b", c.mu_b), ("tau0", c.tau0)]
        {
            positive(name, v)?;
        }
        if self.temp_table.len() < 2 {
            return Err(Error::InvalidParameter { name: "temp_table", reason: "needs at least two rows".into() });
        }
        for w in self.temp_table.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::InvalidParameter {
                    name: "temp_table",
                    reason: "temperatures must be strictly increasing".into(),
                });
            }
        }
        for row in &self.temp_table {
            if !(row.p > 0.0 && row.p < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "temp_table.p",
                    reason: format!("polarization must lie in (0, 1), got {}", row.p),
                });
            }
            positive("temp_table.m_s", row.m_s)?;
            positive("temp_table.k_i", row.k_i)?;
        }
        let [(t0, _), (t1, _)] = self.tmr0_anchors;
        if t1 <= t0 {
            return Err(Error::InvalidParameter {
                name: "tmr0_anchors",
                reason: "anchor temperatures must be increasing".into(),
            });
        }
        if !(self.n_eff > 0.0 && self.n_eff <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "n_eff",
                reason: format!("must lie in (0, 1], got {}", self.n_eff),
            });
        }
        for (name, v) in [("sigma_tox_rel", self.sigma_tox_rel), ("sigma_area_rel", self.sigma_area_rel)] {
            if !(0.0..=0.2).contains(&v) {
                return Err(Error::InvalidParameter { name, reason: format!("must lie in [0, 0.2], got {v}") });
            }
        }
        Ok(())
    }

    pub fn nominal_area(&self) -> f64 {
        PI * self.d * self.d / 4.0
    }

    pub fn nominal_instance(&self) -> DeviceInstance {
        DeviceInstance { t_ox: self.t_ox_nom, area: self.nominal_area() }
    }

    pub fn temperature_range(&self) -> (f64, f64) {
        (self.temp_table[0].t, self.temp_table[self.temp_table.len() - 1].t)
    }

    /// Piecewise-linear interpolation of the material table; no extrapolation.
    pub fn interpolate_thermal(&self, t: f64) -> Result<ThermalParams> {
        let (lo, hi) = self.temperature_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::TemperatureOutOfRange(t, lo, hi));
        }
        let idx = self.temp_table.windows(2).position(|w| t <= w[1].t).unwrap_or(self.temp_table.len() - 2);
        let (a, b) = (self.temp_table[idx], self.temp_table[idx + 1]);
        let f = (t - a.t) / (b.t - a.t);
        let lerp = |x: f64, y: f64| x + f * (y - x);
        let [(ta, ra), (tb, rb)] = self.tmr0_anchors;
        Ok(ThermalParams {
            p: lerp(a.p, b.p),
            m_s: lerp(a.m_s, b.m_s),
            k_i: lerp(a.k_i, b.k_i),
            tmr0: ra + (t - ta) / (tb - ta) * (rb - ra),
        })
    }

    /// Parallel-state resistance; bias and temperature independent.
    pub fn resistance_parallel(&self, inst: &DeviceInstance) -> f64 {
        self.ra / inst.area * (self.c_tox * (inst.t_ox - self.t_ox_nom)).exp()
    }

    pub fn tmr(&self, v: f64, t: f64) -> Result<f64> {
        let tmr0 = self.interpolate_thermal(t)?.tmr0;
        let x = v.abs() / self.v_h;
        Ok(tmr0 / (1.0 + x * x))
    }

    pub fn resistance(&self, state: Bit, v: f64, t: f64, inst: &DeviceInstance) -> Result<f64> {
        let r_l = self.resistance_parallel(inst);
        Ok(match state {
            Bit::One => r_l,
            Bit::Zero => r_l * (1.0 + self.tmr(v, t)?),
        })
    }

    /// Effective perpendicular anisotropy field (A/m).
    pub fn h_k_eff(&self, t: f64) -> Result<f64> {
        let th = self.interpolate_thermal(t)?;
        let mu0 = self.constants.mu0;
        let m_s = th.m_s / mu0;
        let h = 2.0 * th.k_i / (mu0 * m_s * self.t_fl) - self.n_eff * m_s;
        if h < 0.0 {
            return Err(Error::EasyPlane(h));
        }
        Ok(h)
    }

    pub fn thermal_stability(&self, t: f64, inst: &DeviceInstance) -> Result<f64> {
        let th = self.interpolate_thermal(t)?;
        let c = &self.constants;
        let m_s = th.m_s / c.mu0;
        let v_fl = inst.area * self.t_fl;
        Ok(c.mu0 * m_s * self.h_k_eff(t)? * v_fl / (2.0 * c.k_b * t))
    }

    /// Spin-transfer efficiency for the given switching direction.
    pub fn g_stt(p: f64, dir: SwitchDirection) -> f64 {
        match dir {
            SwitchDirection::ApToP => p / (2.0 * (1.0 - p * p)),
            SwitchDirection::PToAp => p / (2.0 * (1.0 + p * p)),
        }
    }

    pub fn critical_current(&self, t: f64, dir: SwitchDirection, inst: &DeviceInstance) -> Result<f64> {
        let th = self.interpolate_thermal(t)?;
        let c = &self.constants;
        let m_s = th.m_s / c.mu0;
        let v_fl = inst.area * self.t_fl;
        let num = self.alpha * c.e * c.gamma * c.mu0 * m_s * self.h_k_eff(t)? * v_fl;
        Ok(self.k_ic * num / (c.mu_b * Self::g_stt(th.p, dir)))
    }

    /// Switching statistics of one device at one temperature and direction.
    pub fn switching(&self, t: f64, dir: SwitchDirection, inst: &DeviceInstance) -> Result<Switching> {
        let hk = self.h_k_eff(t)?;
        Ok(Switching {
            delta: self.thermal_stability(t, inst)?,
            i_c: self.critical_current(t, dir, inst)?,
            mu0_hk: self.constants.mu0 * hk,
            tau0: self.constants.tau0,
            alpha: self.alpha,
            gamma: self.constants.gamma,
            k_w: self.k_w,
        })
    }

    pub fn switching_probability(
        &self,
        current: f64,
        duration: f64,
        t: f64,
        dir: SwitchDirection,
        inst: &DeviceInstance,
    ) -> Result<f64> {
        Ok(self.switching(t, dir, inst)?.probability(current, duration))
    }

    pub fn median_switch_time(
        &self,
        current: f64,
        t: f64,
        dir: SwitchDirection,
        inst: &DeviceInstance,
    ) -> Result<Option<f64>> {
        Ok(self.switching(t, dir, inst)?.median_time(current))
    }

    /// AP→P write error rate of a device biased directly at `v_mtj`.
    pub fn write_error_rate(&self, t: f64, v_mtj: f64, duration: f64, inst: &DeviceInstance) -> Result<f64> {
        let current = v_mtj / self.resistance(Bit::Zero, v_mtj, t, inst)?;
        Ok(self.switching(t, SwitchDirection::ApToP, inst)?.failure(current, duration))
    }
}

/// Precomputed switching statistics for one (temperature, direction,
/// instance) triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Switching {
    pub delta: f64,
    pub i_c: f64,
    /// µ0·H_k,eff (T).
    pub mu0_hk: f64,
    pub tau0: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub k_w: f64,
}

/// Bounds of the median switching-time search (s).
pub const MEDIAN_T_MIN: f64 = 1e-12;
pub const MEDIAN_T_MAX: f64 = 1e-6;

impl Switching {
    /// Néel–Arrhenius relaxation time at normalized current `i <= 1`.
    fn tau_thermal(&self, i: f64) -> f64 {
        self.tau0 * (self.delta * (1.0 - i)).exp()
    }

    /// Exponent `x` of the precessional failure probability `1 - exp(-x)`.
    fn precessional_exponent(&self, i: f64, duration: f64) -> f64 {
        let tau_d = (1.0 + self.alpha * self.alpha) / (self.k_w * self.alpha * self.gamma * self.mu0_hk * (i - 1.0));
        PI * PI * self.delta / 4.0 * (-2.0 * duration / tau_d).exp()
    }

    fn thermal_failure(&self, i: f64, duration: f64) -> f64 {
        (-duration / self.tau_thermal(i.min(1.0))).exp()
    }

    /// Probability that the device has *not* switched after `duration`.
    ///
    /// Computed directly rather than as `1 - p` so that tails down to
    /// the subnormal range stay resolved. Above `I_c` the value is the
    /// smaller of the precessional failure and the thermal failure at
    /// `I = I_c`, which makes the switching probability non-decreasing
    /// in current across the regime boundary.
    pub fn failure(&self, current: f64, duration: f64) -> f64 {
        if !(current > 0.0) || !(duration > 0.0) {
            return 1.0;
        }
        let i = current / self.i_c;
        let thermal = self.thermal_failure(i, duration);
        if i <= 1.0 {
            return thermal;
        }
        let prec = -(-self.precessional_exponent(i, duration)).exp_m1();
        prec.min(thermal).clamp(0.0, 1.0)
    }

    /// Probability of switching within `duration` under a destabilizing
    /// current of magnitude `current`.
    pub fn probability(&self, current: f64, duration: f64) -> f64 {
        if !(current > 0.0) || !(duration > 0.0) {
            return 0.0;
        }
        let i = current / self.i_c;
        let thermal = -(-duration / self.tau_thermal(i.min(1.0))).exp_m1();
        if i <= 1.0 {
            return thermal.clamp(0.0, 1.0);
        }
        let prec = (-self.precessional_exponent(i, duration)).exp();
        prec.max(thermal).clamp(0.0, 1.0)
    }

    /// Regime switching probability without the cross-regime clamp: the
    /// precessional law above `I_c` and the thermal law below it.
    fn regime_probability(&self, current: f64, duration: f64) -> f64 {
        let i = current / self.i_c;
        if i > 1.0 {
            (-self.precessional_exponent(i, duration)).exp()
        } else {
            -(-duration / self.tau_thermal(i)).exp_m1()
        }
    }

    /// Time at which half of the population has switched, or `None` if
    /// fewer than half switch within 1 µs.
    ///
    /// Uses the regime law for the operating current, so a supercritical
    /// pulse is timed by its precessional dynamics rather than by the
    /// thermal floor that the monotonicity clamp introduces.
    pub fn median_time(&self, current: f64) -> Option<f64> {
        if !(current > 0.0) {
            return None;
        }
        let f = |t: f64| self.regime_probability(current, t) - 0.5;
        if f(MEDIAN_T_MAX) < 0.0 {
            return None;
        }
        if f(MEDIAN_T_MIN) >= 0.0 {
            return Some(MEDIAN_T_MIN);
        }
        bisect("median switch time", f, MEDIAN_T_MIN, MEDIAN_T_MAX, 1e-12, 0.0).ok()
    }
}
