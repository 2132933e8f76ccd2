//! Discrete-time simulation of slice demand against an [`Orchestrator`].
//!
//! Each tick releases expired DRBs, admits new arrivals, splits PRBs, runs
//! the autoscaler and records one [`TickRecord`]. Demand is drawn from one
//! seeded stream per slice, independent of admission outcomes, so the same
//! config offers identical demand to every scenario.

mod config;
mod export;

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Geometric, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{DescriptorSet, Snssai};
use crate::orchestrator::{AdmissionDecision, Autoscaler, LoadBasis, Orchestrator, OrchestratorError, ScalingTarget};
use crate::resource::Mcs;
use crate::topology::{Component, Drb, Scenario};

pub use config::{BudgetConfig, ConfigError, DemandProfile, McsWeight, SimConfig};
pub use export::{
    result_from_json, result_to_json, summaries_to_json, write_summary_csv, write_trace_csv, TRACE_HEADER,
};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid config")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
}

/// One DRB request.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub drb: Drb,
    /// Ticks until release; `None` for persistent DRBs.
    pub holding: Option<u64>,
}

struct SliceStream {
    profile: DemandProfile,
    index: u64,
    rng: ChaCha8Rng,
    arrivals: Option<Poisson<f64>>,
    holding: Geometric,
    mcs: WeightedIndex<f64>,
    issued: u64,
}

impl SliceStream {
    fn next_drb(&mut self) -> Drb {
        let w = self.profile.mcs[self.mcs.sample(&mut self.rng)];
        self.issued += 1;
        Drb {
            drb_id: (self.index << 48) | self.issued,
            snssai: self.profile.snssai.clone(),
            qos: self.profile.qos,
            mcs: Mcs { modulation_order: w.modulation_order, code_rate: w.code_rate },
            signalling: false,
        }
    }
}

/// Per-slice seeded DRB arrival streams.
pub struct DemandGenerator {
    streams: Vec<SliceStream>,
}

impl DemandGenerator {
    /// Expects a config that passed [`SimConfig::check`].
    pub fn new(config: &SimConfig) -> Self {
        let streams = config
            .profiles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ p.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                rng.set_stream(i as u64);
                SliceStream {
                    index: i as u64,
                    rng,
                    arrivals: (p.drb_arrival_rate > 0.0)
                        .then(|| Poisson::new(p.drb_arrival_rate).expect("checked rate")),
                    holding: Geometric::new(1.0 / p.mean_holding).expect("checked holding"),
                    mcs: WeightedIndex::new(p.mcs.iter().map(|w| w.prob)).expect("checked weights"),
                    profile: p.clone(),
                    issued: 0,
                }
            })
            .collect();
        Self { streams }
    }

    /// Requests of `tick`, slice by slice in profile order.
    pub fn arrivals(&mut self, tick: u64) -> Vec<Arrival> {
        let mut out = Vec::new();
        for s in &mut self.streams {
            if tick == 0 {
                for _ in 0..s.profile.persistent_drbs {
                    out.push(Arrival { drb: s.next_drb(), holding: None });
                }
            }
            let n = s.arrivals.as_ref().map_or(0, |d| d.sample(&mut s.rng) as u64);
            for _ in 0..n {
                let drb = s.next_drb();
                let holding = 1 + s.holding.sample(&mut s.rng);
                out.push(Arrival { drb, holding: Some(holding) });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceTick {
    pub snssai: Snssai,
    pub prbs: u32,
    pub demand_prbs: u32,
    pub du_util: f64,
    pub cu_util: f64,
    pub vnic_wait_ms: f64,
    pub arrived: u32,
    pub admitted: u32,
    pub rejected: u32,
    pub active_drbs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTick {
    pub id: String,
    pub utilization: f64,
    pub vnic_wait_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub vm_count: u32,
    pub cu_vms: u32,
    pub du_vms: u32,
    pub vcpus_provisioned: f64,
    pub vcpus_consumed: f64,
    pub isolation_violations: u32,
    pub slices: Vec<SliceTick>,
    pub instances: Vec<InstanceTick>,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub scenario: Scenario,
    pub ticks: u64,
    pub avg_vm_count: f64,
    pub avg_cu_vms: f64,
    pub avg_du_vms: f64,
    pub max_vm_count: u32,
    pub vcpu_ticks: f64,
    pub consumed_vcpu_ticks: f64,
    pub arrived: u64,
    pub admitted: u64,
    pub rejected: u64,
    pub rejection_rate: f64,
    pub mean_vnic_wait_ms: f64,
    pub isolation_violations: u64,
    pub scaling_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub summary: SimSummary,
    pub trace: Vec<TickRecord>,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    arrived: u32,
    admitted: u32,
    rejected: u32,
}

/// Runs `config` against `ds`.
pub fn run(ds: &DescriptorSet, config: &SimConfig) -> Result<SimResult, SimError> {
    config.check()?;
    config.check_against(ds)?;
    let mut orch = Orchestrator::new(ds.clone(), config.scenario, config.orchestrator_config())?;
    orch.instantiate_all()?;
    let mut scaler = Autoscaler::new(config.scaling);
    let mut demand = DemandGenerator::new(config);
    let mut departures: BTreeMap<u64, Vec<(Snssai, u64)>> = BTreeMap::new();
    let mut trace = Vec::with_capacity(config.ticks as usize);
    let mut scaling_events = 0u64;

    for tick in 0..config.ticks {
        orch.set_time(tick);
        for (s, id) in departures.remove(&tick).unwrap_or_default() {
            orch.release_drb(&s, id);
        }

        let mut counts: BTreeMap<Snssai, Counts> = BTreeMap::new();
        let mut pressure = BTreeSet::new();
        for arrival in demand.arrivals(tick) {
            let snssai = arrival.drb.snssai.clone();
            let id = arrival.drb.drb_id;
            let c = counts.entry(snssai.clone()).or_default();
            c.arrived += 1;
            match orch.admit_drb(arrival.drb)? {
                AdmissionDecision::Admit { .. } => {
                    c.admitted += 1;
                    if let Some(h) = arrival.holding {
                        departures.entry(tick + h).or_default().push((snssai, id));
                    }
                }
                AdmissionDecision::Reject { reason, instance } => {
                    c.rejected += 1;
                    if reason.is_vcpu() {
                        if let Some(inst) = instance.as_deref().and_then(|i| orch.graph().instance(i)) {
                            pressure.insert(orch.group_of(inst));
                        }
                    }
                }
            }
        }

        orch.allocate_prbs(config.total_prbs)?;
        let events = scaler.step(&mut orch, &pressure);
        scaling_events += events.iter().filter(|e| matches!(e.target, ScalingTarget::Group(_))).count() as u64;
        trace.push(record(&orch, tick, &counts, events.iter().map(ToString::to_string).collect()));
    }

    let summary = summarize(config.scenario, &trace, scaling_events);
    Ok(SimResult { summary, trace })
}

fn record(orch: &Orchestrator, tick: u64, counts: &BTreeMap<Snssai, Counts>, events: Vec<String>) -> TickRecord {
    let params = orch.config().params;
    let loads = orch.instance_loads(LoadBasis::Allocated);
    let wait_ms = |l: &crate::orchestrator::InstanceLoad| l.vnic_wait(&params).map_or(f64::INFINITY, |w| w * 1e3);
    let worst = |s: &Snssai, component: Option<Component>, f: &dyn Fn(&crate::orchestrator::InstanceLoad) -> f64| {
        loads
            .iter()
            .filter(|l| l.per_slice.contains_key(s) && component.is_none_or(|c| l.component == c))
            .map(f)
            .fold(0.0, f64::max)
    };

    let slices = orch
        .subnets()
        .iter()
        .map(|subnet| {
            let s = &subnet.snssai;
            let c = counts.get(s).copied().unwrap_or_default();
            SliceTick {
                snssai: s.clone(),
                prbs: subnet.allocated_prbs,
                demand_prbs: subnet.demand_prbs(),
                du_util: worst(s, Some(Component::Du), &|l| l.utilization()),
                cu_util: worst(s, Some(Component::Cu), &|l| l.utilization()),
                vnic_wait_ms: worst(s, None, &wait_ms),
                arrived: c.arrived,
                admitted: c.admitted,
                rejected: c.rejected,
                active_drbs: subnet.admitted_drbs.len() as u32,
            }
        })
        .collect();

    TickRecord {
        tick,
        vm_count: orch.vm_count(),
        cu_vms: orch.vm_count_of(Component::Cu),
        du_vms: orch.vm_count_of(Component::Du),
        vcpus_provisioned: orch.provisioned_vcpus(),
        vcpus_consumed: loads.iter().map(|l| l.consumption).sum(),
        isolation_violations: loads.iter().filter(|l| l.shared && !l.isolation(orch.config().per_slice_cap).ok).count()
            as u32,
        slices,
        instances: loads
            .iter()
            .map(|l| InstanceTick { id: l.id.clone(), utilization: l.utilization(), vnic_wait_ms: wait_ms(l) })
            .collect(),
        events,
    }
}

fn summarize(scenario: Scenario, trace: &[TickRecord], scaling_events: u64) -> SimSummary {
    let ticks = trace.len() as u64;
    let n = ticks.max(1) as f64;
    let sum = |f: &dyn Fn(&TickRecord) -> f64| trace.iter().map(f).sum::<f64>();
    let count =
        |f: &dyn Fn(&SliceTick) -> u32| trace.iter().flat_map(|t| &t.slices).map(|s| u64::from(f(s))).sum::<u64>();
    let arrived = count(&|s| s.arrived);
    let rejected = count(&|s| s.rejected);
    let slice_ticks = trace.iter().map(|t| t.slices.len()).sum::<usize>().max(1) as f64;
    SimSummary {
        scenario,
        ticks,
        avg_vm_count: sum(&|t| f64::from(t.vm_count)) / n,
        avg_cu_vms: sum(&|t| f64::from(t.cu_vms)) / n,
        avg_du_vms: sum(&|t| f64::from(t.du_vms)) / n,
        max_vm_count: trace.iter().map(|t| t.vm_count).max().unwrap_or(0),
        vcpu_ticks: sum(&|t| t.vcpus_provisioned),
        consumed_vcpu_ticks: sum(&|t| t.vcpus_consumed),
        arrived,
        admitted: count(&|s| s.admitted),
        rejected,
        rejection_rate: if arrived == 0 { 0.0 } else { rejected as f64 / arrived as f64 },
        mean_vnic_wait_ms: trace.iter().flat_map(|t| &t.slices).map(|s| s.vnic_wait_ms).sum::<f64>() / slice_ticks,
        isolation_violations: trace.iter().map(|t| u64::from(t.isolation_violations)).sum(),
        scaling_events,
    }
}

/// Runs `config` once per scenario, with identical demand.
pub fn compare_scenarios(
    ds: &DescriptorSet,
    config: &SimConfig,
    scenarios: &[Scenario],
) -> Result<Vec<SimResult>, SimError> {
    scenarios.iter().map(|&scenario| run(ds, &SimConfig { scenario, ..config.clone() })).collect()
}
