//! Seeded Monte Carlo over device geometry, Gaussian summaries of the
//! sensed voltage, read margins and comparator bit-error rates.
//!
//! Every random draw comes from a ChaCha8 stream selected by
//! `(trial, device)` under the campaign seed, so a given trial sees the
//! same geometry regardless of thread count, evaluation order, input
//! combination or sweep point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{solve_read, OperatingPoint};
use crate::device::{Bit, DeviceInstance, DeviceParams};
use crate::error::{Error, Result};
use crate::roots::bisect;

/// Geometry samples beyond this many standard deviations are redrawn.
pub const TRUNCATION_SIGMA: f64 = 4.0;
/// Bisection tolerance for the equal-BER reference voltage (V).
pub const VREF_TOL: f64 = 1e-6;
pub const MIN_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Independent substream for one device of one trial.
    pub fn stream(&self, trial: usize, device: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(((trial as u64) << 8) | (device as u64 & 0xff));
        rng
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= TRUNCATION_SIGMA {
            return z;
        }
    }
}

/// Draws one device geometry: relative Gaussian spread on oxide thickness
/// and cross-section area, truncated at ±4σ.
pub fn sample_instance(rng: &RngSpec, trial: usize, device: usize, params: &DeviceParams) -> DeviceInstance {
    let mut s = rng.stream(trial, device);
    let z_tox = truncated_normal(&mut s);
    let z_area = truncated_normal(&mut s);
    DeviceInstance {
        t_ox: params.t_ox_nom * (1.0 + params.sigma_tox_rel * z_tox),
        area: params.nominal_area() * (1.0 + params.sigma_area_rel * z_area),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
}

impl GaussianSummary {
    /// Two-pass sample mean and (n−1)-normalized standard deviation.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::InvalidParameter { name: "samples", reason: format!("need n >= 2, got {n}") });
        }
        // constant samples: report the value itself rather than a rounded mean
        if xs.iter().all(|&x| x == xs[0]) {
            return Ok(Self { mu: xs[0], sigma: 0.0, n });
        }
        let mu = xs.iter().sum::<f64>() / n as f64;
        let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
        Ok(Self { mu, sigma: (ss / (n - 1) as f64).sqrt(), n })
    }
}

/// The four READ input combinations in (P, Q) order 00, 01, 10, 11.
pub const COMBOS: [(Bit, Bit); 4] =
    [(Bit::Zero, Bit::Zero), (Bit::Zero, Bit::One), (Bit::One, Bit::Zero), (Bit::One, Bit::One)];

/// Sensed voltages of one Monte Carlo READ campaign, one vector per
/// combination in `COMBOS` order. Trial `k` uses the same pair of device
/// instances in all four vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadCampaign {
    pub samples: [Vec<f64>; 4],
}

fn combo_index(combo: (Bit, Bit)) -> usize {
    (combo.0.as_u8() * 2 + combo.1.as_u8()) as usize
}

fn trial_voltages(
    params: &DeviceParams,
    op: &OperatingPoint,
    rng: &RngSpec,
    trial: usize,
    combos: &[(Bit, Bit)],
) -> Result<Vec<f64>> {
    let p = sample_instance(rng, trial, 0, params);
    let q = sample_instance(rng, trial, 1, params);
    combos
        .iter()
        .map(|&c| solve_read(params, c, op, (&p, &q)).map(|s| s.v_g))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Trial { trial, source: Box::new(e) })
}

fn check_trials(n: usize) -> Result<()> {
    if n < MIN_TRIALS {
        return Err(Error::InvalidParameter { name: "trials", reason: format!("need at least {MIN_TRIALS}, got {n}") });
    }
    Ok(())
}

impl ReadCampaign {
    pub fn run(params: &DeviceParams, op: &OperatingPoint, n: usize, rng: &RngSpec) -> Result<Self> {
        check_trials(n)?;
        let rows =
            (0..n).into_par_iter().map(|k| trial_voltages(params, op, rng, k, &COMBOS)).collect::<Result<Vec<_>>>()?;
        let mut samples: [Vec<f64>; 4] = Default::default();
        for row in rows {
            for (dst, v) in samples.iter_mut().zip(row) {
                dst.push(v);
            }
        }
        Ok(Self { samples })
    }

    pub fn trials(&self) -> usize {
        self.samples[0].len()
    }

    pub fn combo(&self, combo: (Bit, Bit)) -> &[f64] {
        &self.samples[combo_index(combo)]
    }

    pub fn statistics(&self) -> Result<ReadStatistics> {
        let pooled: Vec<f64> = self.samples[1].iter().chain(&self.samples[2]).copied().collect();
        Ok(ReadStatistics {
            s00: GaussianSummary::from_samples(&self.samples[0])?,
            s_neq: GaussianSummary::from_samples(&pooled)?,
            s11: GaussianSummary::from_samples(&self.samples[3])?,
        })
    }
}

/// Summary of one combination's `V_G` population.
pub fn run_read_mc(
    params: &DeviceParams,
    combo: (Bit, Bit),
    op: &OperatingPoint,
    n: usize,
    rng: &RngSpec,
) -> Result<GaussianSummary> {
    check_trials(n)?;
    let v = (0..n)
        .into_par_iter()
        .map(|k| trial_voltages(params, op, rng, k, &[combo]).map(|v| v[0]))
        .collect::<Result<Vec<_>>>()?;
    GaussianSummary::from_samples(&v)
}

/// Upper tail of the standard normal distribution.
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// `Q(x/σ)` with the σ = 0 limit taken as a step.
fn tail(x: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        q_function(x / sigma)
    } else if x > 0.0 {
        0.0
    } else if x < 0.0 {
        1.0
    } else {
        0.5
    }
}

/// Nominal read margin and the margin left at the 3σ corner.
pub fn read_margins(s00: &GaussianSummary, s_neq: &GaussianSummary) -> (f64, f64) {
    let rm_nom = s_neq.mu - s00.mu;
    (rm_nom, rm_nom - 3.0 * (s_neq.sigma + s00.sigma))
}

/// Gaussian summaries of the three distinguishable READ populations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadStatistics {
    pub s00: GaussianSummary,
    /// Pooled P≠Q population.
    pub s_neq: GaussianSummary,
    pub s11: GaussianSummary,
}

/// Comparator misclassification probabilities at a shifted reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparatorErrors {
    /// 00 read above the reference, evaluated at `V_REF − δ`.
    pub ber_00: f64,
    /// P≠Q read below the reference, evaluated at `V_REF + δ`.
    pub ber_neq: f64,
    /// 11 read below the reference, evaluated at `V_REF + δ`.
    pub ber_11: f64,
}

impl ComparatorErrors {
    pub fn average(&self) -> f64 {
        (self.ber_00 + 2.0 * self.ber_neq + self.ber_11) / 4.0
    }
}

impl ReadStatistics {
    pub fn margins(&self) -> (f64, f64) {
        read_margins(&self.s00, &self.s_neq)
    }

    /// Worst-case BERs for a reference that may drift by `±delta`.
    pub fn worst_case_bers(&self, v_ref: f64, delta: f64) -> ComparatorErrors {
        ComparatorErrors {
            ber_00: tail(v_ref - delta - self.s00.mu, self.s00.sigma),
            ber_neq: tail(self.s_neq.mu - v_ref - delta, self.s_neq.sigma),
            ber_11: tail(self.s11.mu - v_ref - delta, self.s11.sigma),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub v_ref: f64,
    pub balanced_ber: f64,
    pub worst_ber_00: f64,
    pub worst_ber_neq: f64,
    pub ber_11: Option<f64>,
}

/// Reference voltage at which 00 and P≠Q are misread with equal
/// probability, and the BERs it implies with a `±delta` drift.
pub fn equal_ber_vref(
    s00: &GaussianSummary,
    s_neq: &GaussianSummary,
    s11: Option<&GaussianSummary>,
    delta: f64,
) -> Result<BerReport> {
    if !(s00.mu < s_neq.mu) {
        return Err(Error::InvalidParameter {
            name: "summaries",
            reason: format!("00 mean {} must lie below the P≠Q mean {}", s00.mu, s_neq.mu),
        });
    }
    let (v_ref, balanced) = if s00.sigma == 0.0 || s_neq.sigma == 0.0 {
        (0.5 * (s00.mu + s_neq.mu), 0.0)
    } else {
        // Equal Gaussian tails means equal standardized distances.
        let gap = |v: f64| (v - s00.mu) / s00.sigma - (s_neq.mu - v) / s_neq.sigma;
        let v = bisect("V_REF", gap, s00.mu, s_neq.mu, VREF_TOL, 0.0)?;
        (v, tail(v - s00.mu, s00.sigma))
    };
    let stats = ReadStatistics { s00: *s00, s_neq: *s_neq, s11: s11.copied().unwrap_or(*s_neq) };
    let worst = stats.worst_case_bers(v_ref, delta);
    Ok(BerReport {
        v_ref,
        balanced_ber: balanced,
        worst_ber_00: worst.ber_00,
        worst_ber_neq: worst.ber_neq,
        ber_11: s11.map(|_| worst.ber_11),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn summary(mu: f64, sigma: f64) -> GaussianSummary {
        GaussianSummary { mu, sigma, n: 1000 }
    }

    /// Composite Simpson integration of the standard normal density.
    fn q_oracle(z: f64) -> f64 {
        let upper = z + 40.0;
        let n = 200_000;
        let h = (upper - z) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(z) + pdf(upper);
        for k in 1..n {
            let x = z + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        s * h / 3.0
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        let oracle = q_oracle(4.05);
        assert!((oracle - 2.56e-5).abs() < 1e-7, "{oracle}");
        assert_relative_eq!(q_function(4.05), oracle, max_relative = 1e-9);
        for z in [0.5, 1.0, 2.0, 3.0, 5.0, 6.5, 8.0] {
            assert_relative_eq!(q_function(z), q_oracle(z), max_relative = 1e-9);
        }
        for z in [-8.0, -3.3, -0.1, 0.0, 0.7, 2.2, 7.9] {
            assert!((q_function(z) + q_function(-z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_gives_nominal_instances() {
        let mut p = DeviceParams::default();
        p.sigma_area_rel = 0.0;
        p.sigma_tox_rel = 0.0;
        let rng = RngSpec::new(7);
        for k in 0..20 {
            assert_eq!(sample_instance(&rng, k, k % 2, &p), p.nominal_instance());
        }
    }

    #[test]
    fn area_sample_moments() {
        let p = DeviceParams::default();
        let rng = RngSpec::new(42);
        let areas: Vec<f64> = (0..100_000).map(|k| sample_instance(&rng, k, 0, &p).area).collect();
        let s = GaussianSummary::from_samples(&areas).unwrap();
        let a0 = p.nominal_area();
        assert!((s.mu - a0).abs() < 0.005 * a0);
        assert!((s.sigma - 0.05 * a0).abs() < 0.05 * 0.05 * a0);
        let lo = a0 * (1.0 - 4.0 * 0.05);
        let hi = a0 * (1.0 + 4.0 * 0.05);
        assert!(areas.iter().all(|a| *a >= lo && *a <= hi));
    }

    #[test]
    fn streams_are_independent_of_order() {
        let p = DeviceParams::default();
        let rng = RngSpec::new(3);
        let a = sample_instance(&rng, 17, 1, &p);
        let _ = sample_instance(&rng, 5, 0, &p);
        assert_eq!(sample_instance(&rng, 17, 1, &p), a);
        assert_ne!(sample_instance(&rng, 17, 0, &p), a);
        assert_ne!(sample_instance(&RngSpec::new(4), 17, 1, &p), a);
    }

    #[test]
    fn summary_statistics() {
        let s = GaussianSummary::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(s.mu, 2.5);
        assert_relative_eq!(s.sigma, (5.0f64 / 3.0).sqrt());
        assert!(GaussianSummary::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn margins() {
        let (nom, c3) = read_margins(&summary(0.135, 0.0), &summary(0.176, 0.0));
        assert_relative_eq!(nom, c3);
        let (nom, c3) = read_margins(&summary(0.135, 0.004), &summary(0.176, 0.006));
        assert_relative_eq!(c3, nom - 0.03, max_relative = 1e-12);
    }

    #[test]
    fn balanced_reference() {
        let s0 = summary(0.1346, 0.0045);
        let s1 = summary(0.1758, 0.0056);
        let r = equal_ber_vref(&s0, &s1, None, 5e-3).unwrap();
        let closed = (s0.mu * s1.sigma + s1.mu * s0.sigma) / (s0.sigma + s1.sigma);
        assert!((r.v_ref - closed).abs() <= VREF_TOL);
        assert!(r.v_ref > s0.mu && r.v_ref < s1.mu);
        assert!(r.worst_ber_00 >= r.balanced_ber && r.worst_ber_neq >= r.balanced_ber);
        assert!(r.ber_11.is_none());
        let q0 = q_function((r.v_ref - s0.mu) / s0.sigma);
        let q1 = q_function((s1.mu - r.v_ref) / s1.sigma);
        assert_relative_eq!(q0, q1, max_relative = 1e-3);

        // Equal spreads put the reference at the midpoint.
        let r = equal_ber_vref(&summary(0.1, 0.01), &summary(0.2, 0.01), None, 0.0).unwrap();
        assert!((r.v_ref - 0.15).abs() <= VREF_TOL);
        assert_relative_eq!(r.worst_ber_00, r.balanced_ber, max_relative = 1e-3);
    }

    #[test]
    fn balanced_ber_falls_with_sigma() {
        let base = equal_ber_vref(&summary(0.13, 0.005), &summary(0.17, 0.006), None, 0.0).unwrap();
        let a = equal_ber_vref(&summary(0.13, 0.004), &summary(0.17, 0.006), None, 0.0).unwrap();
        let b = equal_ber_vref(&summary(0.13, 0.005), &summary(0.17, 0.005), None, 0.0).unwrap();
        assert!(a.balanced_ber < base.balanced_ber && b.balanced_ber < base.balanced_ber);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let r = equal_ber_vref(&summary(0.1, 0.0), &summary(0.2, 0.0), Some(&summary(0.3, 0.0)), 5e-3).unwrap();
        assert_relative_eq!(r.v_ref, 0.15);
        assert_eq!(r.balanced_ber, 0.0);
        assert_eq!(r.worst_ber_00, 0.0);
        assert_eq!(r.ber_11, Some(0.0));
        assert!(equal_ber_vref(&summary(0.2, 0.01), &summary(0.1, 0.01), None, 0.0).is_err());
    }

    #[test]
    fn zero_variance_campaign_matches_nominal() {
        let mut p = DeviceParams::default();
        p.sigma_area_rel = 0.0;
        p.sigma_tox_rel = 0.0;
        let op = OperatingPoint::default();
        let i = p.nominal_instance();
        let s = run_read_mc(&p, (Bit::Zero, Bit::Zero), &op, 100, &RngSpec::new(1)).unwrap();
        let nominal = solve_read(&p, (Bit::Zero, Bit::Zero), &op, (&i, &i)).unwrap().v_g;
        assert_eq!(s.sigma, 0.0);
        assert_relative_eq!(s.mu, nominal, max_relative = 1e-12);
        assert!(run_read_mc(&p, (Bit::Zero, Bit::Zero), &op, 10, &RngSpec::new(1)).is_err());
    }

    #[test]
    fn campaign_is_deterministic_and_consistent() {
        let p = DeviceParams::calibrated();
        let op = OperatingPoint::default();
        let rng = RngSpec::new(11);
        let a = ReadCampaign::run(&p, &op, 200, &rng).unwrap();
        let b = ReadCampaign::run(&p, &op, 200, &rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(), 200);
        let s = run_read_mc(&p, (Bit::Zero, Bit::Zero), &op, 200, &rng).unwrap();
        assert_eq!(s, GaussianSummary::from_samples(a.combo((Bit::Zero, Bit::Zero))).unwrap());
        let st = a.statistics().unwrap();
        assert_eq!(st.s_neq.n, 400);
        let (nom, c3) = st.margins();
        assert_relative_eq!(c3, nom - 3.0 * (st.s00.sigma + st.s_neq.sigma), max_relative = 1e-12);
    }
}
