//! SCADA telemetry types, normalization, windowing, and correlation analysis.

mod correlation;
mod parse;
mod window;

pub use correlation::{correlation_matrix, pearson, CorrelationMatrix};
pub use parse::{parse_csv, write_csv, ColumnSchema, ParseReport};
pub use window::{build_supervised, SplitIndices, SplitMode, SupervisedSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped row of turbine telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScadaRecord {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    /// m/s, non-negative.
    pub wind_speed: f64,
    /// Degrees in [0, 360).
    pub wind_direction: f64,
    /// kW. May be negative: stationary turbines draw power while spinning up.
    pub power: f64,
    /// °C.
    pub ambient_temp: f64,
    /// °C.
    pub nacelle_temp: f64,
    /// °C.
    pub hydraulic_oil_temp: f64,
    /// bar.
    pub hydraulic_oil_pressure: f64,
}

impl ScadaRecord {
    /// Field-level sanity: finite values, non-negative wind speed,
    /// direction within [0, 360).
    pub fn is_valid(&self) -> bool {
        let finite = [
            self.wind_speed,
            self.wind_direction,
            self.power,
            self.ambient_temp,
            self.nacelle_temp,
            self.hydraulic_oil_temp,
            self.hydraulic_oil_pressure,
        ]
        .iter()
        .all(|v| v.is_finite());
        finite && self.wind_speed >= 0.0 && (0.0..360.0).contains(&self.wind_direction)
    }
}

/// The seven numeric telemetry features of a [`ScadaRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    WindSpeed,
    WindDirection,
    Power,
    AmbientTemp,
    NacelleTemp,
    HydraulicOilTemp,
    HydraulicOilPressure,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::WindSpeed,
        Feature::WindDirection,
        Feature::Power,
        Feature::AmbientTemp,
        Feature::NacelleTemp,
        Feature::HydraulicOilTemp,
        Feature::HydraulicOilPressure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::WindSpeed => "wind_speed",
            Feature::WindDirection => "wind_direction",
            Feature::Power => "power",
            Feature::AmbientTemp => "ambient_temp",
            Feature::NacelleTemp => "nacelle_temp",
            Feature::HydraulicOilTemp => "hydraulic_oil_temp",
            Feature::HydraulicOilPressure => "hydraulic_oil_pressure",
        }
    }

    pub fn extract(self, rec: &ScadaRecord) -> f64 {
        match self {
            Feature::WindSpeed => rec.wind_speed,
            Feature::WindDirection => rec.wind_direction,
            Feature::Power => rec.power,
            Feature::AmbientTemp => rec.ambient_temp,
            Feature::NacelleTemp => rec.nacelle_temp,
            Feature::HydraulicOilTemp => rec.hydraulic_oil_temp,
            Feature::HydraulicOilPressure => rec.hydraulic_oil_pressure,
        }
    }
}

/// An ordered single-turbine telemetry series with a fixed nominal cadence.
///
/// Timestamps are strictly increasing. Missing intervals are recorded as
/// gaps, never interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScadaSeries {
    records: Vec<ScadaRecord>,
    /// Seconds between consecutive records (600 for 10-minute data).
    cadence: i64,
    /// Indices `i` where `records[i+1]` does not follow `records[i]` at the
    /// nominal cadence.
    gaps: Vec<usize>,
}

impl ScadaSeries {
    /// Builds a series, validating strictly increasing timestamps and
    /// recording every cadence break as a gap.
    pub fn new(records: Vec<ScadaRecord>, cadence: i64) -> Result<Self> {
        if cadence <= 0 {
            return Err(Error::InvalidParameter(format!(
                "cadence must be positive, got {cadence}"
            )));
        }
        for pair in records.windows(2) {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(Error::InvalidParameter(format!(
                    "timestamps must be strictly increasing: {} then {}",
                    pair[0].timestamp, pair[1].timestamp
                )));
            }
        }
        let gaps = records
            .windows(2)
            .enumerate()
            .filter(|(_, pair)| pair[1].timestamp - pair[0].timestamp != cadence)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            records,
            cadence,
            gaps,
        })
    }

    pub fn records(&self) -> &[ScadaRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cadence(&self) -> i64 {
        self.cadence
    }

    /// Indices after which a recorded gap occurs.
    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    /// True when records `a..=b` are consecutive at the nominal cadence.
    pub fn contiguous(&self, a: usize, b: usize) -> bool {
        debug_assert!(a <= b && b < self.records.len());
        self.records[b].timestamp - self.records[a].timestamp == (b - a) as i64 * self.cadence
    }

    /// Length of the longest gap-free run of records.
    pub fn longest_contiguous_run(&self) -> usize {
        if self.records.is_empty() {
            return 0;
        }
        let mut best = 1usize;
        let mut run = 1usize;
        for pair in self.records.windows(2) {
            if pair[1].timestamp - pair[0].timestamp == self.cadence {
                run += 1;
            } else {
                run = 1;
            }
            best = best.max(run);
        }
        best
    }

    /// New series keeping only the records at `indices` (must be ascending).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let records = indices.iter().map(|&i| self.records[i]).collect();
        Self::new(records, self.cadence)
    }
}

/// Min/max of one feature, used for [0, 1] scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub z_min: f64,
    pub z_max: f64,
}

impl FeatureRange {
    pub fn new(name: &str, z_min: f64, z_max: f64) -> Result<Self> {
        if !(z_max > z_min) {
            return Err(Error::DegenerateFeature(name.to_string()));
        }
        Ok(Self { z_min, z_max })
    }

    /// Min/max over a non-empty slice.
    pub fn from_values(name: &str, values: &[f64]) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self::new(name, lo, hi)
    }

    #[inline]
    pub fn normalize_one(&self, z: f64) -> f64 {
        (z - self.z_min) / (self.z_max - self.z_min)
    }

    #[inline]
    pub fn denormalize_one(&self, z_hat: f64) -> f64 {
        z_hat * (self.z_max - self.z_min) + self.z_min
    }

    pub fn span(&self) -> f64 {
        self.z_max - self.z_min
    }
}

/// Saved normalization statistics: one range per input feature plus the
/// power target range. Computed from the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub features: Vec<FeatureRange>,
    pub target: FeatureRange,
}

/// Ẑ = (Z − Z_min)/(Z_max − Z_min) for every value in `values`.
pub fn normalize(values: &[f64], range: &FeatureRange) -> Vec<f64> {
    values.iter().map(|&z| range.normalize_one(z)).collect()
}

/// Inverse of [`normalize`]; `inverse_normalize(normalize(v))` recovers `v`
/// within 1e-12 relative error.
pub fn inverse_normalize(values: &[f64], range: &FeatureRange) -> Vec<f64> {
    values.iter().map(|&z| range.denormalize_one(z)).collect()
}

/// Which SCADA features feed the forecaster input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    /// Wind speed only.
    M1,
    /// Wind speed and wind direction.
    M2,
    /// Wind speed and current power output.
    M3,
    /// Wind speed, wind direction, and current power output.
    M4,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::M1,
        ModelVariant::M2,
        ModelVariant::M3,
        ModelVariant::M4,
    ];

    pub fn features(self) -> &'static [Feature] {
        match self {
            ModelVariant::M1 => &[Feature::WindSpeed],
            ModelVariant::M2 => &[Feature::WindSpeed, Feature::WindDirection],
            ModelVariant::M3 => &[Feature::WindSpeed, Feature::Power],
            ModelVariant::M4 => &[Feature::WindSpeed, Feature::WindDirection, Feature::Power],
        }
    }

    pub fn input_dim(self) -> usize {
        self.features().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::M1 => "M1",
            ModelVariant::M2 => "M2",
            ModelVariant::M3 => "M3",
            ModelVariant::M4 => "M4",
        }
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" | "1" => Ok(ModelVariant::M1),
            "m2" | "2" => Ok(ModelVariant::M2),
            "m3" | "3" => Ok(ModelVariant::M3),
            "m4" | "4" => Ok(ModelVariant::M4),
            other => Err(Error::InvalidParameter(format!(
                "unknown model variant `{other}` (expected m1..m4)"
            ))),
        }
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(ts: i64) -> ScadaRecord {
        ScadaRecord {
            timestamp: ts,
            wind_speed: 5.0,
            wind_direction: 180.0,
            power: 100.0,
            ambient_temp: 10.0,
            nacelle_temp: 20.0,
            hydraulic_oil_temp: 40.0,
            hydraulic_oil_pressure: 160.0,
        }
    }

    #[test]
    fn normalize_hits_bounds_and_midpoint() {
        let range = FeatureRange::new("x", 0.0, 10.0).unwrap();
        assert_eq!(range.normalize_one(0.0), 0.0);
        assert_eq!(range.normalize_one(10.0), 1.0);
        assert_eq!(range.normalize_one(5.0), 0.5);
    }

    #[test]
    fn degenerate_range_is_rejected() {
        let err = FeatureRange::new("flat", 3.0, 3.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateFeature(ref n) if n == "flat"));
    }

    #[test]
    fn series_rejects_non_increasing_timestamps() {
        let err = ScadaSeries::new(vec![rec(600), rec(600)], 600).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn gaps_are_recorded() {
        let series =
            ScadaSeries::new(vec![rec(0), rec(600), rec(1800), rec(2400)], 600).unwrap();
        assert_eq!(series.gaps(), &[1]);
        assert!(series.contiguous(0, 1));
        assert!(!series.contiguous(0, 3));
        assert_eq!(series.longest_contiguous_run(), 2);
    }

    #[test]
    fn variant_dimensions() {
        assert_eq!(ModelVariant::M1.input_dim(), 1);
        assert_eq!(ModelVariant::M2.input_dim(), 2);
        assert_eq!(ModelVariant::M3.input_dim(), 2);
        assert_eq!(ModelVariant::M4.input_dim(), 3);
    }
}
