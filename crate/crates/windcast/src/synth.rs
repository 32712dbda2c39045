//! Synthetic SCADA generation: a physically grounded power curve, Weibull
//! wind, bimodal direction, correlated auxiliary channels, and ground-truth
//! labeled outliers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scada::{ScadaRecord, ScadaSeries};

/// Physical turbine parameters for the cubic power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurbineSpec {
    /// Air density, kg/m³.
    pub rho: f64,
    /// Rotor radius, m.
    pub rotor_radius: f64,
    /// Power coefficient, at most the Betz limit 0.593.
    pub cp: f64,
    /// Cut-in wind speed, m/s.
    pub cut_in: f64,
    /// Rated wind speed, m/s.
    pub rated: f64,
    /// Cut-out wind speed, m/s.
    pub cut_out: f64,
    /// Rated power, W. Zero means "cubic law value at rated speed".
    pub rated_power: f64,
}

impl Default for TurbineSpec {
    fn default() -> Self {
        let mut spec = Self {
            rho: 1.225,
            rotor_radius: 45.0,
            cp: 0.4,
            cut_in: 3.0,
            rated: 12.0,
            cut_out: 25.0,
            rated_power: 0.0,
        };
        spec.rated_power = spec.cubic_law(spec.rated);
        spec
    }
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cut_in < self.rated && self.rated < self.cut_out) {
            return Err(Error::InvalidParameter(format!(
                "need cut_in < rated < cut_out, got {} / {} / {}",
                self.cut_in, self.rated, self.cut_out
            )));
        }
        if !(self.cp > 0.0 && self.cp <= 0.593) {
            return Err(Error::InvalidParameter(format!(
                "cp must be in (0, 0.593], got {}",
                self.cp
            )));
        }
        if self.rho <= 0.0 || self.rotor_radius <= 0.0 || self.rated_power < 0.0 {
            return Err(Error::InvalidParameter(
                "rho, rotor_radius must be positive; rated_power non-negative".into(),
            ));
        }
        Ok(())
    }

    /// ½ρπR²C_p u³ in W, uncapped.
    fn cubic_law(&self, u: f64) -> f64 {
        0.5 * self.rho * std::f64::consts::PI * self.rotor_radius.powi(2) * self.cp * u.powi(3)
    }

    fn rated_power_w(&self) -> f64 {
        if self.rated_power > 0.0 {
            self.rated_power
        } else {
            self.cubic_law(self.rated)
        }
    }
}

/// Theoretical power output in W for wind speed `u` (m/s): zero outside
/// [cut_in, cut_out), cubic law up to rated speed, capped at rated power.
pub fn power_curve(spec: &TurbineSpec, u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    if u < spec.cut_in || u >= spec.cut_out {
        return 0.0;
    }
    spec.cubic_law(u).min(spec.rated_power_w())
}

/// How labeled outliers corrupt the power channel. All kinds stay inside
/// the plausible sensor envelope (a real SCADA anomaly reads a wrong but
/// physical value), and every corrupted row deviates from the clean curve
/// by at least 5 noise sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutlierKind {
    /// Power frozen at a constant level regardless of wind.
    StuckAt,
    /// Power tripled, on rows where the result stays within 1.1·rated.
    Scaled,
    /// Power shifted off the clean curve by a random offset of 12 to 18
    /// noise sigma, either side.
    #[default]
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_records: usize,
    /// Seconds between records.
    pub cadence: i64,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    /// Fraction of records drawn from the dominant (NW) direction mode.
    pub dominant_mode_weight: f64,
    /// Gaussian power noise std as a fraction of rated power.
    pub noise_std_frac: f64,
    /// Fraction of rows corrupted, in [0, 0.2].
    pub outlier_rate: f64,
    pub outlier_kind: OutlierKind,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_records: 20_000,
            cadence: 600,
            weibull_shape: 2.0,
            weibull_scale: 8.0,
            dominant_mode_weight: 0.65,
            noise_std_frac: 0.01,
            outlier_rate: 0.05,
            outlier_kind: OutlierKind::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_records == 0 {
            return Err(Error::InvalidParameter("n_records must be positive".into()));
        }
        if !(0.0..=0.2).contains(&self.outlier_rate) {
            return Err(Error::InvalidParameter(format!(
                "outlier_rate must be in [0, 0.2], got {}",
                self.outlier_rate
            )));
        }
        if self.weibull_shape <= 0.0 || self.weibull_scale <= 0.0 {
            return Err(Error::InvalidParameter("weibull parameters must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.dominant_mode_weight) {
            return Err(Error::InvalidParameter("dominant_mode_weight must be in [0, 1]".into()));
        }
        if self.noise_std_frac < 0.0 {
            return Err(Error::InvalidParameter("noise_std_frac must be non-negative".into()));
        }
        Ok(())
    }
}

/// Fraction of near-zero-wind rows given slightly negative spin-up power.
const SPIN_UP_FRACTION: f64 = 0.005;
/// Dominant and secondary direction modes, degrees.
const MODE_NW: f64 = 315.0;
const MODE_SE: f64 = 135.0;
const MODE_SPREAD_DEG: f64 = 25.0;

/// Generates a labeled synthetic series. Deterministic in `config.seed`.
///
/// Returns the series plus the sorted indices of rows whose power was
/// corrupted; every labeled outlier deviates from the clean value by at
/// least 5 noise sigma.
pub fn generate(spec: &TurbineSpec, config: &SynthConfig) -> Result<(ScadaSeries, Vec<usize>)> {
    spec.validate()?;
    config.validate()?;

    let n = config.n_records;
    let rated_w = spec.rated_power_w();
    let rated_kw = rated_w / 1000.0;
    let sigma_kw = config.noise_std_frac * rated_kw;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weibull = Weibull::new(config.weibull_scale, config.weibull_shape)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let dir_noise = Normal::new(0.0, MODE_SPREAD_DEG).expect("valid normal");
    let power_noise = Normal::new(0.0, sigma_kw.max(f64::MIN_POSITIVE)).expect("valid normal");

    // Wind: i.i.d. Weibull smoothed with a trailing moving average of
    // window 3 for temporal autocorrelation. Linear smoothing preserves
    // the Weibull mean.
    let raw: Vec<f64> = (0..n).map(|_| weibull.sample(&mut rng)).collect();
    let wind: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let w = &raw[lo..=i];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect();

    let direction: Vec<f64> = (0..n)
        .map(|_| {
            let mode = if rng.random::<f64>() < config.dominant_mode_weight {
                MODE_NW
            } else {
                MODE_SE
            };
            (mode + dir_noise.sample(&mut rng)).rem_euclid(360.0)
        })
        .collect();

    // Smooth auxiliary channels; noise is itself moving-averaged.
    let aux_noise: Vec<f64> = {
        let raw_noise: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(4);
                let w = &raw_noise[lo..=i];
                w.iter().sum::<f64>() / w.len() as f64
            })
            .collect()
    };

    let day = 86_400.0 / config.cadence as f64;
    let year = day * 365.0;

    let mut clean_power_kw = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let u = wind[i];
        let theta = direction[i];
        // Direction weakly modulates power: ±1% multiplicative, peaked at
        // NW. Kept near the noise floor so the modulation reads as signal
        // for direction-aware models without dominating the band spread.
        let dir_mod = 1.0 + 0.01 * ((theta - MODE_NW).to_radians()).cos();
        let clean = power_curve(spec, u) / 1000.0 * dir_mod;
        let noisy = clean + power_noise.sample(&mut rng);
        // Keep power inside [-3 sigma, rated].
        let power = noisy.clamp(-3.0 * sigma_kw, rated_kw);
        clean_power_kw.push(clean);

        let t = i as f64;
        let ambient = 8.0 + 6.0 * (2.0 * std::f64::consts::PI * t / year).sin()
            + 2.0 * (2.0 * std::f64::consts::PI * t / day).sin()
            + 2.0 * aux_noise[i];
        let load = (power / rated_kw).clamp(0.0, 1.0);
        records.push(ScadaRecord {
            timestamp: i as i64 * config.cadence,
            wind_speed: u,
            wind_direction: theta,
            power,
            ambient_temp: ambient,
            nacelle_temp: ambient + 5.0 + 8.0 * load + aux_noise[i],
            hydraulic_oil_temp: 40.0 + 12.0 * load + 2.0 * aux_noise[i],
            hydraulic_oil_pressure: 160.0 + 18.0 * load + 3.0 * aux_noise[i],
        });
    }

    // Slightly negative spin-up power for a sliver of near-zero-wind rows;
    // these are inliers, not labeled outliers.
    let mut calm_rows: Vec<usize> = (0..n).filter(|&i| wind[i] < spec.cut_in).collect();
    let n_spin = ((n as f64 * SPIN_UP_FRACTION) as usize).min(calm_rows.len());
    for _ in 0..n_spin {
        let pick = rng.random_range(0..calm_rows.len());
        let row = calm_rows.swap_remove(pick);
        records[row].power = -rng.random_range(0.1..1.0) * sigma_kw;
    }

    // Labeled outliers: corrupt the power channel so the deviation from the
    // clean value is at least 12 noise sigma (comfortably past the >= 5
    // sigma contract) while staying inside the sensor envelope.
    let min_dev = 12.0 * sigma_kw;
    let n_outliers = (n as f64 * config.outlier_rate).round() as usize;
    let mut candidates: Vec<usize> = (0..n).collect();
    // Fisher-Yates walk; take the first eligible rows.
    let mut labels: Vec<usize> = Vec::with_capacity(n_outliers);
    let stuck_level = 0.55 * rated_kw;
    let mut pos = 0usize;
    while labels.len() < n_outliers && pos < candidates.len() {
        let j = rng.random_range(pos..candidates.len());
        candidates.swap(pos, j);
        let row = candidates[pos];
        pos += 1;
        let clean = clean_power_kw[row];
        // Only producing rows host anomalies; an idle turbine reading zero
        // is a correct reading.
        if clean < min_dev {
            continue;
        }
        let corrupted = match config.outlier_kind {
            OutlierKind::StuckAt => ((stuck_level - clean).abs() >= min_dev).then_some(stuck_level),
            OutlierKind::Scaled => {
                let v = 3.0 * records[row].power;
                ((v - clean).abs() >= min_dev && v <= 1.1 * rated_kw).then_some(v)
            }
            OutlierKind::Random => {
                let mut v = None;
                for _ in 0..32 {
                    let dev = rng.random_range(min_dev..18.0 * sigma_kw.max(f64::MIN_POSITIVE));
                    let sign = if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
                    let draw = (clean + sign * dev).clamp(0.0, 1.05 * rated_kw);
                    if (draw - clean).abs() >= min_dev {
                        v = Some(draw);
                        break;
                    }
                }
                v
            }
        };
        if let Some(v) = corrupted {
            records[row].power = v;
            labels.push(row);
        }
    }
    labels.sort_unstable();

    let series = ScadaSeries::new(records, config.cadence)?;
    Ok((series, labels))
}
