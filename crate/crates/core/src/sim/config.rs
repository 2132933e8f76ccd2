use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{DescriptorSet, Snssai};
use crate::orchestrator::{OrchestratorConfig, ScalingPolicy};
use crate::resource::{Mcs, ResourceModelParams};
use crate::topology::{Qos, Scenario};

/// A config problem, located by its dotted field path.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

mod snssai_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::descriptor::Snssai;

    pub fn serialize<S: Serializer>(s: &Snssai, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Snssai, D::Error> {
        String::deserialize(de)?.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsWeight {
    pub modulation_order: u8,
    pub code_rate: f64,
    pub prob: f64,
}

/// DRB demand of one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandProfile {
    #[serde(with = "snssai_text")]
    pub snssai: Snssai,
    /// Mean DRB arrivals per tick (Poisson).
    #[serde(default)]
    pub drb_arrival_rate: f64,
    /// Mean DRB lifetime in ticks (geometric, at least 1).
    #[serde(default = "one")]
    pub mean_holding: f64,
    /// DRBs requested at tick 0 that never leave.
    #[serde(default)]
    pub persistent_drbs: u32,
    pub qos: Qos,
    pub mcs: Vec<McsWeight>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn default_delay_cap() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub per_slice_cap: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { per_slice_cap: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub ticks: u64,
    pub total_prbs: u32,
    #[serde(default = "one_u32")]
    pub n_dus_per_gnb: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delay_cap")]
    pub vnic_delay_cap_ms: f64,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub resource: ResourceModelParams,
    #[serde(default)]
    pub scaling: ScalingPolicy,
    #[serde(default)]
    pub profiles: Vec<DemandProfile>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: SimConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError::new(line.map_or_else(|| "config".to_string(), |l| format!("line {l}")), e.message())
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn orchestrator_config(&self) -> OrchestratorConfig {
        OrchestratorConfig {
            params: self.resource,
            per_slice_cap: self.budget.per_slice_cap,
            vnic_delay_cap_s: self.vnic_delay_cap_ms * 1e-3,
            n_dus_per_gnb: self.n_dus_per_gnb,
        }
    }

    /// Checks that do not need the descriptors.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.ticks == 0 {
            return Err(ConfigError::new("ticks", "must be at least 1"));
        }
        if self.n_dus_per_gnb == 0 {
            return Err(ConfigError::new("n_dus_per_gnb", "must be at least 1"));
        }
        if !(self.vnic_delay_cap_ms > 0.0 && self.vnic_delay_cap_ms.is_finite()) {
            return Err(ConfigError::new("vnic_delay_cap_ms", "must be positive"));
        }
        if !(self.budget.per_slice_cap > 0.0 && self.budget.per_slice_cap <= 1.0) {
            return Err(ConfigError::new("budget.per_slice_cap", "must be in (0, 1]"));
        }
        self.resource.validate().map_err(|e| ConfigError::new("resource", e.to_string()))?;
        self.scaling.validate().map_err(|e| ConfigError::new("scaling", e))?;

        let mut seen = BTreeSet::new();
        for (i, p) in self.profiles.iter().enumerate() {
            let at = |field: &str| format!("profiles[{i}].{field}");
            if !seen.insert(&p.snssai) {
                return Err(ConfigError::new(at("snssai"), format!("{} has two profiles", p.snssai)));
            }
            if !(p.drb_arrival_rate >= 0.0 && p.drb_arrival_rate.is_finite()) {
                return Err(ConfigError::new(at("drb_arrival_rate"), "must be a non-negative number"));
            }
            if !(p.mean_holding >= 1.0 && p.mean_holding.is_finite()) {
                return Err(ConfigError::new(at("mean_holding"), "must be at least 1 tick"));
            }
            p.qos.check().map_err(|e| ConfigError::new(at("qos"), e))?;
            if p.mcs.is_empty() {
                return Err(ConfigError::new(at("mcs"), "needs at least one entry"));
            }
            for (j, w) in p.mcs.iter().enumerate() {
                Mcs::new(w.modulation_order, w.code_rate)
                    .map_err(|e| ConfigError::new(at(&format!("mcs[{j}]")), e.to_string()))?;
                if !(w.prob >= 0.0 && w.prob.is_finite()) {
                    return Err(ConfigError::new(at(&format!("mcs[{j}].prob")), "must be non-negative"));
                }
            }
            let total: f64 = p.mcs.iter().map(|w| w.prob).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(ConfigError::new(at("mcs"), format!("probabilities sum to {total}, not 1")));
            }
        }
        Ok(())
    }

    /// Every NSST has exactly one profile and every profile an NSST.
    pub fn check_against(&self, ds: &DescriptorSet) -> Result<(), ConfigError> {
        for (i, p) in self.profiles.iter().enumerate() {
            if ds.nsst_for(&p.snssai).is_none() {
                return Err(ConfigError::new(format!("profiles[{i}].snssai"), format!("no RAN NSST for {}", p.snssai)));
            }
        }
        for s in ds.slices() {
            if !self.profiles.iter().any(|p| p.snssai == s) {
                return Err(ConfigError::new("profiles", format!("no profile for slice {s}")));
            }
        }
        Ok(())
    }
}
