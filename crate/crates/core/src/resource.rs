//! vCPU and vNIC resource model of CU/DU instances.
//!
//! DU vCPU consumption of one slice is
//! `c0 + k * prbs * code_rate * exp(beta * modulation_order)`: exponential in
//! modulation order, affine in PRBs with offset `c0`, linear in code rate. The
//! CU uses the same family scaled by `cu_scale`. The vNIC buffer is an M/M/1
//! queue whose arrival rate is proportional to the PRBs carried.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::Snssai;
use crate::topology::Component;

/// Coefficients of the consumption and queueing models. The defaults are
/// placeholders; real deployments calibrate `c0` and `k` from measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceModelParams {
    /// Per-slice baseline consumption of an instance, in vCPU.
    pub c0: f64,
    /// vCPU per unit of `prbs * code_rate * exp(beta * m)`.
    pub k: f64,
    pub beta: f64,
    /// CU consumption relative to DU consumption for the same load.
    pub cu_scale: f64,
    /// vNIC service rate, packets/s.
    #[serde(rename = "vnic_mu")]
    pub vnic_service_rate: f64,
    /// vNIC packets/s generated per allocated PRB.
    pub pkt_per_prb: f64,
}

impl Default for ResourceModelParams {
    fn default() -> Self {
        Self { c0: 0.05, k: 0.001, beta: 0.35, cu_scale: 0.3, vnic_service_rate: 100_000.0, pkt_per_prb: 100.0 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ResourceError {
    #[error("invalid resource parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("invalid slice load: {0}")]
    InvalidLoad(String),
}

impl ResourceModelParams {
    pub fn validate(&self) -> Result<(), ResourceError> {
        let positive = [
            ("k", self.k),
            ("beta", self.beta),
            ("cu_scale", self.cu_scale),
            ("vnic_mu", self.vnic_service_rate),
            ("pkt_per_prb", self.pkt_per_prb),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ResourceError::InvalidParams { field, reason: format!("{v} must be positive") });
            }
        }
        if !(self.c0.is_finite() && self.c0 >= 0.0) {
            return Err(ResourceError::InvalidParams {
                field: "c0",
                reason: format!("{} must be non-negative", self.c0),
            });
        }
        if self.cu_scale >= 1.0 {
            return Err(ResourceError::InvalidParams {
                field: "cu_scale",
                reason: format!("{} must be below 1", self.cu_scale),
            });
        }
        Ok(())
    }

    fn scale(&self, component: Component) -> f64 {
        match component {
            Component::Du => 1.0,
            Component::Cu => self.cu_scale,
        }
    }

    /// Baseline vCPU a slice costs on an instance of `component`.
    pub fn baseline(&self, component: Component) -> f64 {
        self.c0 * self.scale(component)
    }

    /// Load-dependent vCPU of `prbs` (possibly fractional) PRBs at `mcs`.
    pub fn variable_cost(&self, component: Component, prbs: f64, mcs: Mcs) -> f64 {
        self.scale(component) * self.k * prbs * mcs.code_rate * (self.beta * f64::from(mcs.modulation_order)).exp()
    }
}

/// Modulation order (bits/symbol) and code rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mcs {
    pub modulation_order: u8,
    pub code_rate: f64,
}

impl Mcs {
    pub fn new(modulation_order: u8, code_rate: f64) -> Result<Self, ResourceError> {
        let mcs = Self { modulation_order, code_rate };
        mcs.check()?;
        Ok(mcs)
    }

    pub fn check(&self) -> Result<(), ResourceError> {
        if !matches!(self.modulation_order, 2 | 4 | 6 | 8) {
            return Err(ResourceError::InvalidLoad(format!(
                "modulation order {} not in {{2, 4, 6, 8}}",
                self.modulation_order
            )));
        }
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return Err(ResourceError::InvalidLoad(format!("code rate {} not in (0, 1]", self.code_rate)));
        }
        Ok(())
    }

    /// Bit rate of one PRB: 12 subcarriers x 14 symbols per slot, `1000 * 2^mu`
    /// slots per second.
    pub fn prb_rate_mbps(&self, numerology: u8) -> f64 {
        0.168 * f64::from(1u32 << numerology.min(4)) * f64::from(self.modulation_order) * self.code_rate
    }
}

/// Average radio load of one slice on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceLoad {
    pub snssai: Snssai,
    pub prbs: u32,
    pub modulation_order: u8,
    pub code_rate: f64,
}

impl SliceLoad {
    pub fn new(snssai: Snssai, prbs: u32, mcs: Mcs) -> Result<Self, ResourceError> {
        mcs.check()?;
        Ok(Self { snssai, prbs, modulation_order: mcs.modulation_order, code_rate: mcs.code_rate })
    }

    pub fn mcs(&self) -> Mcs {
        Mcs { modulation_order: self.modulation_order, code_rate: self.code_rate }
    }
}

fn consumption(component: Component, load: &SliceLoad, p: &ResourceModelParams) -> f64 {
    p.baseline(component) + p.variable_cost(component, f64::from(load.prbs), load.mcs())
}

pub fn du_vcpu_consumption(load: &SliceLoad, p: &ResourceModelParams) -> f64 {
    consumption(Component::Du, load, p)
}

pub fn cu_vcpu_consumption(load: &SliceLoad, p: &ResourceModelParams) -> f64 {
    consumption(Component::Cu, load, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("vNIC saturated: arrival rate reaches the service rate")]
pub struct Saturated;

/// Queue model of a vNIC buffer.
pub trait QueueModel {
    /// Mean time a packet waits before service, in seconds.
    fn mean_wait(&self, arrival_rate: f64, service_rate: f64) -> Result<f64, Saturated>;
}

/// Poisson arrivals, exponential service, one server.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mm1;

impl QueueModel for Mm1 {
    fn mean_wait(&self, arrival_rate: f64, service_rate: f64) -> Result<f64, Saturated> {
        if arrival_rate >= service_rate {
            return Err(Saturated);
        }
        // 1/(mu - lambda) - 1/mu, written to stay exact at lambda = 0.
        Ok(arrival_rate / (service_rate * (service_rate - arrival_rate)))
    }
}

/// Mean vNIC waiting time for `prbs` PRBs of traffic under `model`.
pub fn vnic_wait_with(model: &dyn QueueModel, prbs: f64, p: &ResourceModelParams) -> Result<f64, Saturated> {
    model.mean_wait(p.pkt_per_prb * prbs, p.vnic_service_rate)
}

pub fn vnic_mean_wait(total_prbs: u32, p: &ResourceModelParams) -> Result<f64, Saturated> {
    vnic_wait_with(&Mm1, f64::from(total_prbs), p)
}

/// Capacity of one instance and the share of it any single slice may use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBudget {
    pub vcpu_capacity: f64,
    pub per_slice_cap: f64,
}

impl CapacityBudget {
    pub fn new(vcpu_capacity: f64, per_slice_cap: f64) -> Result<Self, ResourceError> {
        if !(per_slice_cap > 0.0 && per_slice_cap <= 1.0) {
            return Err(ResourceError::InvalidParams {
                field: "per_slice_cap",
                reason: format!("{per_slice_cap} not in (0, 1]"),
            });
        }
        if !(vcpu_capacity.is_finite() && vcpu_capacity >= 0.0) {
            return Err(ResourceError::InvalidParams {
                field: "vcpu_capacity",
                reason: format!("{vcpu_capacity} must be non-negative"),
            });
        }
        Ok(Self { vcpu_capacity, per_slice_cap })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolationCheck {
    pub ok: bool,
    pub total: f64,
    /// `capacity - total`; negative when the instance is over capacity.
    pub total_headroom: f64,
    /// `cap * capacity - consumption` per slice.
    pub headroom: BTreeMap<Snssai, f64>,
}

/// Isolation predicate over per-slice consumptions on one instance: the sum
/// stays within capacity and each slice within its cap. Both bounds inclusive.
pub fn check_consumptions(consumptions: &BTreeMap<Snssai, f64>, budget: &CapacityBudget) -> IsolationCheck {
    let total: f64 = consumptions.values().sum();
    let slice_limit = budget.per_slice_cap * budget.vcpu_capacity;
    let headroom: BTreeMap<Snssai, f64> = consumptions.iter().map(|(s, c)| (s.clone(), slice_limit - c)).collect();
    let ok = total <= budget.vcpu_capacity && consumptions.values().all(|c| *c <= slice_limit);
    IsolationCheck { ok, total, total_headroom: budget.vcpu_capacity - total, headroom }
}

/// Groups `loads` by slice (several entries of one slice share one baseline)
/// and checks isolation on an instance of `component`.
pub fn isolation_check(
    component: Component,
    loads: &[SliceLoad],
    budget: &CapacityBudget,
    p: &ResourceModelParams,
) -> IsolationCheck {
    let mut per_slice: BTreeMap<Snssai, f64> = BTreeMap::new();
    for load in loads {
        per_slice
            .entry(load.snssai.clone())
            .and_modify(|c| *c += p.variable_cost(component, f64::from(load.prbs), load.mcs()))
            .or_insert_with(|| consumption(component, load, p));
    }
    check_consumptions(&per_slice, budget)
}

/// Isolation on a shared DU instance.
pub fn isolation_ok(loads: &[SliceLoad], budget: &CapacityBudget, p: &ResourceModelParams) -> IsolationCheck {
    isolation_check(Component::Du, loads, budget, p)
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("{given} anchor point(s) with distinct loads, need at least 2")]
    Underdetermined { given: usize },
    #[error("fit is not physical (c0 = {c0}, k = {k})")]
    NonPhysical { c0: f64, k: f64 },
    #[error(transparent)]
    Invalid(#[from] ResourceError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub params: ResourceModelParams,
    /// `observed - predicted` per anchor, in input order.
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `c0` and `k` to observed DU consumptions, with every
/// other coefficient taken from `template`.
pub fn calibrate_params(
    anchors: &[(SliceLoad, f64)],
    template: &ResourceModelParams,
) -> Result<Calibration, CalibrationError> {
    for (load, _) in anchors {
        load.mcs().check()?;
    }
    let xs: Vec<f64> = anchors
        .iter()
        .map(|(load, _)| {
            f64::from(load.prbs) * load.code_rate * (template.beta * f64::from(load.modulation_order)).exp()
        })
        .collect();
    let ys: Vec<f64> = anchors.iter().map(|(_, y)| *y).collect();
    let n = xs.len() as f64;
    let distinct = {
        let mut v = xs.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    if distinct < 2 {
        return Err(CalibrationError::Underdetermined { given: distinct });
    }
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let k = sxy / sxx;
    let c0 = mean_y - k * mean_x;
    if !(k > 0.0 && c0 >= 0.0) {
        return Err(CalibrationError::NonPhysical { c0, k });
    }
    let params = ResourceModelParams { c0, k, ..*template };
    params.validate()?;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (c0 + k * x)).collect();
    Ok(Calibration { params, residuals })
}
