//! Lifecycle management of RAN slice subnets over shared gNB components.
//!
//! The [`Orchestrator`] plays the NFVO/VNFM/RAN NSSMF roles on one gNB:
//! it instantiates subnets from their NSSTs, admits DRBs under the isolation
//! constraints of shared instances, splits PRBs between slices and executes
//! scaling. A shared component is scaled once, on its auxiliary service, after
//! which every subnet's IL is re-aligned to the new level.
//!
//! All mutation goes through `&mut self`; the type is a single-writer state
//! machine and clones are cheap snapshots for readers.

mod admission;
mod policy;
mod scaling;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{validate, DescriptorSet, GnbNsd, ScalingAspect, Snssai, ValidationReport};
use crate::resource::{
    check_consumptions, vnic_wait_with, CapacityBudget, IsolationCheck, Mm1, ResourceModelParams, Saturated,
};
use crate::topology::{
    build_instance_graph, Component, Drb, DrbPath, Instance, InstanceGraph, Scenario, TopologyError,
};

pub use admission::{AdmissionDecision, RejectReason};
pub use policy::{evaluate_scaling_policy, Autoscaler, ScalingPolicy, UtilizationHistory};
pub use scaling::ScalingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// A set of instances that scale together.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Group {
    /// Slice-specific CU.
    Cu(Snssai),
    /// Slice-specific DUs.
    Du(Snssai),
    SharedCu,
    SharedDu,
}

impl Group {
    pub fn component(&self) -> Component {
        match self {
            Group::Cu(_) | Group::SharedCu => Component::Cu,
            Group::Du(_) | Group::SharedDu => Component::Du,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Cu(s) => write!(f, "cu:{s}"),
            Group::Du(s) => write!(f, "du:{s}"),
            Group::SharedCu => f.write_str("shared_cu"),
            Group::SharedDu => f.write_str("shared_du"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ScalingTarget {
    Group(Group),
    /// IL update of one subnet's gNB instance following a shared scaling.
    GnbIl(Snssai),
}

impl fmt::Display for ScalingTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingTarget::Group(g) => g.fmt(f),
            ScalingTarget::GnbIl(s) => write!(f, "gnb:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingCause {
    LoadIncrease,
    LoadDecrease,
    Admission,
}

impl fmt::Display for ScalingCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingCause::LoadIncrease => "load_increase",
            ScalingCause::LoadDecrease => "load_decrease",
            ScalingCause::Admission => "admission",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScalingEvent {
    pub time: u64,
    pub target: ScalingTarget,
    pub from_level: String,
    pub to_level: String,
    pub cause: ScalingCause,
}

impl fmt::Display for ScalingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}:{}", self.target, self.from_level, self.to_level, self.cause)
    }
}

/// A scale level as deployed: VMs per logical instance and their total vCPUs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub id: String,
    pub vms: u32,
    pub vcpus: f64,
}

/// Levels of one scaling aspect, ascending by vCPU capacity; ties keep
/// declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    levels: Vec<Level>,
}

impl Ladder {
    fn new(mut levels: Vec<Level>) -> Self {
        levels.sort_by(|a, b| a.vcpus.total_cmp(&b.vcpus));
        Self { levels }
    }

    fn from_aspect(ds: &DescriptorSet, aspect: &ScalingAspect) -> Self {
        Self::new(
            aspect
                .sls
                .iter()
                .map(|sl| Level {
                    id: sl.id.clone(),
                    vms: sl.instances.iter().map(|s| s.count).sum(),
                    vcpus: f64::from(ds.level_vcpus(sl)),
                })
                .collect(),
        )
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.id == id)
    }

    pub fn get(&self, index: usize) -> &Level {
        &self.levels[index]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn step(&self, index: usize, direction: Direction) -> Option<usize> {
        match direction {
            Direction::Up => (index + 1 < self.levels.len()).then_some(index + 1),
            Direction::Down => index.checked_sub(1),
        }
    }
}

/// A DRB admitted into a subnet, with its PRB demand and route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmittedDrb {
    pub drb: Drb,
    pub demand_prbs: u32,
    pub path: DrbPath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubnetInstance {
    pub snssai: Snssai,
    pub nsst_ref: String,
    pub gnb_nsd_ref: String,
    pub current_il: String,
    pub cu_sl: String,
    pub du_sl: String,
    pub admitted_drbs: Vec<AdmittedDrb>,
    pub allocated_prbs: u32,
}

impl SubnetInstance {
    pub fn demand_prbs(&self) -> u32 {
        self.admitted_drbs.iter().map(|a| a.demand_prbs).sum()
    }

    pub fn sl(&self, component: Component) -> &str {
        match component {
            Component::Cu => &self.cu_sl,
            Component::Du => &self.du_sl,
        }
    }
}

/// Runtime of an auxiliary network service: the single place where a shared
/// component is scaled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxServiceInstance {
    pub component: Component,
    pub aux_nsd_ref: String,
    pub current_il: String,
    /// One entry per live VM of the shared component.
    pub live_instances: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestratorConfig {
    pub params: ResourceModelParams,
    /// Share of a shared instance's capacity any one slice may use.
    pub per_slice_cap: f64,
    /// Largest tolerated mean vNIC wait, seconds.
    pub vnic_delay_cap_s: f64,
    pub n_dus_per_gnb: u32,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self { params: ResourceModelParams::default(), per_slice_cap: 1.0, vnic_delay_cap_s: 1e-3, n_dus_per_gnb: 1 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OrchestratorError {
    #[error("descriptor set has {} finding(s); first: {}", .0.findings.len(), .0.findings[0])]
    DescriptorFindings(ValidationReport),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no RAN NSST for S-NSSAI {0}")]
    UnknownSnssai(Snssai),
    #[error("slice subnet {0} is not instantiated")]
    NotInstantiated(Snssai),
    #[error("slice subnet {0} is already instantiated")]
    AlreadyInstantiated(Snssai),
    #[error("DRB {0} is already admitted")]
    DuplicateDrb(u64),
    #[error("gNB NSD of {snssai} declares no IL for ({cu_sl}, {du_sl})")]
    NoMatchingIl { snssai: Snssai, cu_sl: String, du_sl: String },
    #[error("instance {instance} violates its constraints with every slice at zero PRBs")]
    Infeasible { instance: String },
}

/// Static per-slice data resolved from the descriptors.
#[derive(Debug, Clone)]
struct SliceCatalog {
    nsst_id: String,
    nsd: GnbNsd,
    numerology: u8,
    cu: Ladder,
    du: Ladder,
}

impl SliceCatalog {
    fn ladder(&self, component: Component) -> &Ladder {
        match component {
            Component::Cu => &self.cu,
            Component::Du => &self.du,
        }
    }
}

#[derive(Debug, Clone)]
struct SharedService {
    instance: AuxServiceInstance,
    ladder: Ladder,
}

/// Load of one logical instance under some PRB basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceLoad {
    pub id: String,
    pub component: Component,
    pub group: Group,
    pub shared: bool,
    pub vms: u32,
    pub capacity: f64,
    /// vCPU consumed per owner slice, baselines included.
    pub per_slice: BTreeMap<Snssai, f64>,
    pub consumption: f64,
    /// PRBs whose traffic crosses this instance's vNIC.
    pub prbs: f64,
    /// Per-owner-slice PRBs crossing this instance.
    pub slice_prbs: BTreeMap<Snssai, f64>,
}

impl InstanceLoad {
    pub fn utilization(&self) -> f64 {
        if self.capacity > 0.0 {
            self.consumption / self.capacity
        } else {
            f64::INFINITY
        }
    }

    pub fn isolation(&self, per_slice_cap: f64) -> IsolationCheck {
        check_consumptions(&self.per_slice, &CapacityBudget { vcpu_capacity: self.capacity, per_slice_cap })
    }

    pub fn vnic_wait(&self, params: &ResourceModelParams) -> Result<f64, Saturated> {
        vnic_wait_with(&Mm1, self.prbs, params)
    }
}

/// Which PRB figure drives consumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadBasis {
    /// Every admitted DRB at its full PRB demand.
    Demand,
    /// Demand scaled by each slice's last PRB allocation.
    Allocated,
}

#[derive(Debug, Clone)]
pub struct Orchestrator {
    ds: DescriptorSet,
    scenario: Scenario,
    graph: InstanceGraph,
    config: OrchestratorConfig,
    catalog: BTreeMap<Snssai, SliceCatalog>,
    subnets: Vec<SubnetInstance>,
    shared_cu: Option<SharedService>,
    shared_du: Option<SharedService>,
    now: u64,
}

impl Orchestrator {
    /// Validates the descriptors and builds the instance graph. Any
    /// validation finding blocks instantiation.
    pub fn new(ds: DescriptorSet, scenario: Scenario, config: OrchestratorConfig) -> Result<Self, OrchestratorError> {
        let report = validate(&ds);
        if !report.is_clean() {
            return Err(OrchestratorError::DescriptorFindings(report));
        }
        config.params.validate().map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
        if !(config.per_slice_cap > 0.0 && config.per_slice_cap <= 1.0) {
            return Err(OrchestratorError::InvalidConfig(format!(
                "per_slice_cap {} not in (0, 1]",
                config.per_slice_cap
            )));
        }
        if config.vnic_delay_cap_s.is_nan() || config.vnic_delay_cap_s <= 0.0 {
            return Err(OrchestratorError::InvalidConfig("vnic delay cap must be positive".into()));
        }
        let graph = build_instance_graph(&ds, scenario, config.n_dus_per_gnb)?;

        let mut catalog = BTreeMap::new();
        for nsst in &ds.ran_nsst {
            let nsd = ds.gnb_nsd(&nsst.gnb_nsd_ref).expect("validated reference").clone();
            catalog.insert(
                nsst.snssai.clone(),
                SliceCatalog {
                    nsst_id: nsst.id.clone(),
                    numerology: nsst.slice_profile.numerology_index,
                    cu: Ladder::from_aspect(&ds, &nsd.sa_cu),
                    du: Ladder::from_aspect(&ds, &nsd.sa_du),
                    nsd,
                },
            );
        }

        Ok(Self { ds, scenario, graph, config, catalog, subnets: Vec::new(), shared_cu: None, shared_du: None, now: 0 })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn graph(&self) -> &InstanceGraph {
        &self.graph
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.config
    }

    pub fn descriptors(&self) -> &DescriptorSet {
        &self.ds
    }

    pub fn set_time(&mut self, now: u64) {
        self.now = now;
    }

    pub fn time(&self) -> u64 {
        self.now
    }

    pub fn subnets(&self) -> &[SubnetInstance] {
        &self.subnets
    }

    pub fn subnet(&self, snssai: &Snssai) -> Option<&SubnetInstance> {
        self.subnets.iter().find(|s| &s.snssai == snssai)
    }

    fn subnet_index(&self, snssai: &Snssai) -> Result<usize, OrchestratorError> {
        self.subnets
            .iter()
            .position(|s| &s.snssai == snssai)
            .ok_or_else(|| OrchestratorError::NotInstantiated(snssai.clone()))
    }

    pub fn aux_service(&self, component: Component) -> Option<&AuxServiceInstance> {
        self.shared(component).map(|s| &s.instance)
    }

    fn shared(&self, component: Component) -> Option<&SharedService> {
        match component {
            Component::Cu => self.shared_cu.as_ref(),
            Component::Du => self.shared_du.as_ref(),
        }
    }

    fn shared_mut(&mut self, component: Component) -> Option<&mut SharedService> {
        match component {
            Component::Cu => self.shared_cu.as_mut(),
            Component::Du => self.shared_du.as_mut(),
        }
    }

    /// Ladder of the auxiliary service for a shared component: the declared
    /// auxiliary NSD when the first slice's gNB NSD references one (DU only),
    /// otherwise that NSD's own scaling aspect.
    fn shared_ladder(&self, component: Component) -> (String, Ladder) {
        let first = &self.catalog[&self.graph.slices[0]];
        if component == Component::Du {
            if let Some(aux) = first.nsd.aux_nsd_ref.as_deref().and_then(|id| self.ds.aux_nsd(id)) {
                let vcpus_of = |flavour: &str| {
                    self.ds.vnfd(&first.nsd.du_vnfd_ref).and_then(|v| v.flavour(flavour)).map_or(0, |f| f.vcpus)
                };
                let levels = aux
                    .ils
                    .iter()
                    .map(|il| Level {
                        id: il.id.clone(),
                        vms: il.du_count,
                        vcpus: f64::from(il.du_count * vcpus_of(&il.du_il_ref)),
                    })
                    .collect();
                return (aux.id.clone(), Ladder::new(levels));
            }
        }
        let aspect = match component {
            Component::Cu => &first.nsd.sa_cu,
            Component::Du => &first.nsd.sa_du,
        };
        (format!("{}/{}", first.nsd.id, aspect.id), first.ladder(component).clone())
    }

    fn live_instances(&self, component: Component, level: &Level) -> Vec<String> {
        let instances = match component {
            Component::Cu => &self.graph.cu_instances,
            Component::Du => &self.graph.du_instances,
        };
        instances.iter().flat_map(|i| (1..=level.vms).map(move |k| format!("{}/vm-{k}", i.id))).collect()
    }

    /// The subnet-side SL equivalent to `level` of a shared ladder: the SL
    /// with the same id, or failing that the SL at the same rank.
    fn subnet_level_for(&self, snssai: &Snssai, component: Component, shared: &Ladder, index: usize) -> String {
        let own = self.catalog[snssai].ladder(component);
        let id = &shared.get(index).id;
        if own.index_of(id).is_some() {
            id.clone()
        } else {
            own.get(index.min(own.len() - 1)).id.clone()
        }
    }

    fn pinned_level(&self, snssai: &Snssai, component: Component) -> Option<String> {
        let service = self.shared(component)?;
        let index = service.ladder.index_of(&service.instance.current_il)?;
        Some(self.subnet_level_for(snssai, component, &service.ladder, index))
    }

    /// Creates the subnet at its lowest IL. In scenarios with a shared
    /// component, the first subnet creates the auxiliary service at its lowest
    /// level and later subnets join it at its current level.
    pub fn instantiate_subnet(&mut self, snssai: &Snssai) -> Result<&SubnetInstance, OrchestratorError> {
        let Some(entry) = self.catalog.get(snssai) else {
            return Err(OrchestratorError::UnknownSnssai(snssai.clone()));
        };
        if self.subnet(snssai).is_some() {
            return Err(OrchestratorError::AlreadyInstantiated(snssai.clone()));
        }
        let nsst_id = entry.nsst_id.clone();
        let nsd_id = entry.nsd.id.clone();

        for component in [Component::Cu, Component::Du] {
            if self.scenario.shares(component) && self.shared(component).is_none() {
                let (aux_ref, ladder) = self.shared_ladder(component);
                let lowest = ladder.get(0).clone();
                let instance = AuxServiceInstance {
                    component,
                    aux_nsd_ref: aux_ref,
                    current_il: lowest.id.clone(),
                    live_instances: self.live_instances(component, &lowest),
                };
                let service = Some(SharedService { instance, ladder });
                match component {
                    Component::Cu => self.shared_cu = service,
                    Component::Du => self.shared_du = service,
                }
            }
        }

        let pinned_cu = self.pinned_level(snssai, Component::Cu);
        let pinned_du = self.pinned_level(snssai, Component::Du);
        let entry = &self.catalog[snssai];
        let rank = |component: Component, sl: &Option<String>| {
            sl.as_deref().and_then(|id| entry.ladder(component).index_of(id)).unwrap_or(usize::MAX)
        };
        let il = entry
            .nsd
            .ils
            .iter()
            .filter(|il| pinned_cu.is_none() || il.cu_sl == pinned_cu)
            .filter(|il| pinned_du.is_none() || il.du_sl == pinned_du)
            .min_by_key(|il| rank(Component::Cu, &il.cu_sl).saturating_add(rank(Component::Du, &il.du_sl)))
            .cloned()
            .ok_or_else(|| OrchestratorError::NoMatchingIl {
                snssai: snssai.clone(),
                cu_sl: pinned_cu.clone().unwrap_or_else(|| "*".into()),
                du_sl: pinned_du.clone().unwrap_or_else(|| "*".into()),
            })?;

        self.subnets.push(SubnetInstance {
            snssai: snssai.clone(),
            nsst_ref: nsst_id,
            gnb_nsd_ref: nsd_id,
            current_il: il.id.clone(),
            cu_sl: il.cu_sl.clone().expect("validated IL"),
            du_sl: il.du_sl.clone().expect("validated IL"),
            admitted_drbs: Vec::new(),
            allocated_prbs: 0,
        });
        Ok(self.subnets.last().expect("just pushed"))
    }

    /// Instantiates every slice of the descriptor set, in NSST order.
    pub fn instantiate_all(&mut self) -> Result<(), OrchestratorError> {
        for snssai in self.graph.slices.clone() {
            self.instantiate_subnet(&snssai)?;
        }
        Ok(())
    }

    pub fn group_of(&self, instance: &Instance) -> Group {
        let component = instance.component;
        if self.scenario.shares(component) {
            return match component {
                Component::Cu => Group::SharedCu,
                Component::Du => Group::SharedDu,
            };
        }
        let owner = instance.owners.iter().next().expect("instances have an owner").clone();
        match component {
            Component::Cu => Group::Cu(owner),
            Component::Du => Group::Du(owner),
        }
    }

    /// Scaling groups whose subnets are instantiated, in a fixed order:
    /// per-slice CUs, per-slice DUs, then shared CU and shared DU.
    pub fn groups(&self) -> Vec<Group> {
        let mut groups = Vec::new();
        for component in [Component::Cu, Component::Du] {
            if self.scenario.shares(component) {
                continue;
            }
            for subnet in &self.subnets {
                groups.push(match component {
                    Component::Cu => Group::Cu(subnet.snssai.clone()),
                    Component::Du => Group::Du(subnet.snssai.clone()),
                });
            }
        }
        if self.shared_cu.is_some() {
            groups.push(Group::SharedCu);
        }
        if self.shared_du.is_some() {
            groups.push(Group::SharedDu);
        }
        groups
    }

    /// Ladder and current position of a group; `None` if its subnet is not
    /// instantiated.
    pub fn group_level(&self, group: &Group) -> Option<(&Ladder, usize)> {
        match group {
            Group::Cu(s) | Group::Du(s) => {
                let component = group.component();
                let subnet = self.subnet(s)?;
                let ladder = self.catalog[s].ladder(component);
                Some((ladder, ladder.index_of(subnet.sl(component))?))
            }
            Group::SharedCu | Group::SharedDu => {
                let service = self.shared(group.component())?;
                Some((&service.ladder, service.ladder.index_of(&service.instance.current_il)?))
            }
        }
    }

    fn instance_level(&self, instance: &Instance) -> Option<&Level> {
        let (ladder, index) = self.group_level(&self.group_of(instance))?;
        Some(ladder.get(index))
    }

    /// Live VMs of one component across the gNB.
    pub fn vm_count_of(&self, component: Component) -> u32 {
        self.graph
            .instances()
            .filter(|i| i.component == component)
            .filter_map(|i| self.instance_level(i))
            .map(|l| l.vms)
            .sum()
    }

    pub fn vm_count(&self) -> u32 {
        self.vm_count_of(Component::Cu) + self.vm_count_of(Component::Du)
    }

    /// vCPUs provisioned for all live VMs.
    pub fn provisioned_vcpus(&self) -> f64 {
        self.graph.instances().filter_map(|i| self.instance_level(i)).map(|l| l.vcpus).sum()
    }

    fn prb_scale(&self, basis: LoadBasis) -> BTreeMap<Snssai, f64> {
        self.subnets
            .iter()
            .map(|s| {
                let f = match basis {
                    LoadBasis::Demand => 1.0,
                    LoadBasis::Allocated => {
                        let demand = s.demand_prbs();
                        if demand == 0 {
                            0.0
                        } else {
                            f64::from(s.allocated_prbs) / f64::from(demand)
                        }
                    }
                };
                (s.snssai.clone(), f)
            })
            .collect()
    }

    /// Loads of every instance whose level is known.
    pub fn instance_loads(&self, basis: LoadBasis) -> Vec<InstanceLoad> {
        self.loads_with(&self.prb_scale(basis), None, None)
    }

    /// Loads where each slice's DRBs are scaled by `scale`, optionally with
    /// one extra DRB at full demand and with one group's capacity replaced.
    fn loads_with(
        &self,
        scale: &BTreeMap<Snssai, f64>,
        extra: Option<&AdmittedDrb>,
        capacity_override: Option<(&Group, &Level)>,
    ) -> Vec<InstanceLoad> {
        let p = &self.config.params;
        let mut loads: Vec<InstanceLoad> = self
            .graph
            .instances()
            .filter_map(|inst| {
                let group = self.group_of(inst);
                let level = match capacity_override {
                    Some((g, level)) if *g == group => level,
                    _ => self.instance_level(inst)?,
                };
                let per_slice: BTreeMap<Snssai, f64> = inst
                    .owners
                    .iter()
                    .filter(|s| self.subnet(s).is_some())
                    .map(|s| (s.clone(), p.baseline(inst.component)))
                    .collect();
                let slice_prbs = per_slice.keys().map(|s| (s.clone(), 0.0)).collect();
                Some(InstanceLoad {
                    id: inst.id.clone(),
                    component: inst.component,
                    shared: inst.is_shared(),
                    group,
                    vms: level.vms,
                    capacity: level.vcpus,
                    per_slice,
                    consumption: 0.0,
                    prbs: 0.0,
                    slice_prbs,
                })
            })
            .collect();
        let index: BTreeMap<String, usize> = loads.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();

        let mut add = |adm: &AdmittedDrb, factor: f64| {
            let prbs = f64::from(adm.demand_prbs) * factor;
            for (id, component) in [(&adm.path.cu_id, Component::Cu), (&adm.path.du_id, Component::Du)] {
                if let Some(&i) = index.get(id.as_str()) {
                    let load = &mut loads[i];
                    *load.per_slice.entry(adm.drb.snssai.clone()).or_insert(p.baseline(component)) +=
                        p.variable_cost(component, prbs, adm.drb.mcs);
                    *load.slice_prbs.entry(adm.drb.snssai.clone()).or_insert(0.0) += prbs;
                    load.prbs += prbs;
                }
            }
        };
        for subnet in &self.subnets {
            let factor = scale.get(&subnet.snssai).copied().unwrap_or(1.0);
            for adm in &subnet.admitted_drbs {
                add(adm, factor);
            }
        }
        if let Some(adm) = extra {
            add(adm, 1.0);
        }
        for load in &mut loads {
            load.consumption = load.per_slice.values().sum();
        }
        loads
    }

    /// Worst utilization among a group's instances.
    pub fn group_utilization(&self, group: &Group, basis: LoadBasis) -> f64 {
        self.instance_loads(basis)
            .iter()
            .filter(|l| &l.group == group)
            .map(InstanceLoad::utilization)
            .fold(0.0, f64::max)
    }

    /// Shared instances currently violating isolation under `basis`.
    pub fn isolation_violations(&self, basis: LoadBasis) -> Vec<String> {
        self.instance_loads(basis)
            .into_iter()
            .filter(|l| l.shared && !l.isolation(self.config.per_slice_cap).ok)
            .map(|l| l.id)
            .collect()
    }

    /// Subnets whose DU SL disagrees with the shared DU service (empty when
    /// consistent or when the DU is not shared).
    pub fn shared_level_mismatches(&self, component: Component) -> Vec<Snssai> {
        let Some(service) = self.shared(component) else { return Vec::new() };
        let Some(index) = service.ladder.index_of(&service.instance.current_il) else {
            return self.subnets.iter().map(|s| s.snssai.clone()).collect();
        };
        self.subnets
            .iter()
            .filter(|s| s.sl(component) != self.subnet_level_for(&s.snssai, component, &service.ladder, index))
            .map(|s| s.snssai.clone())
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::descriptor::{parse_descriptor_set, Document};

    pub fn two_slices() -> DescriptorSet {
        let text = include_str!("../../../../data/two-slice-s4/descriptors.toml");
        parse_descriptor_set(&[Document::new("d", text)]).unwrap()
    }

    pub fn orchestrator(scenario: Scenario, config: OrchestratorConfig) -> Orchestrator {
        let mut o = Orchestrator::new(two_slices(), scenario, config).unwrap();
        o.instantiate_all().unwrap();
        o
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::descriptor::ServiceType;

    fn embb() -> Snssai {
        Snssai::new(ServiceType::Embb)
    }

    fn urllc() -> Snssai {
        Snssai::new(ServiceType::Urllc)
    }

    #[test]
    fn first_s4_subnet_creates_aux_at_lowest() {
        let mut o = Orchestrator::new(two_slices(), Scenario::S4DuShared, OrchestratorConfig::default()).unwrap();
        o.instantiate_subnet(&embb()).unwrap();
        let aux = o.aux_service(Component::Du).unwrap();
        assert_eq!(aux.current_il, "du-sl-1");
        assert_eq!(aux.aux_nsd_ref, "aux-du");
        assert_eq!(aux.live_instances.len(), 1);
        let subnet = o.subnet(&embb()).unwrap();
        assert_eq!(
            (subnet.current_il.as_str(), subnet.cu_sl.as_str(), subnet.du_sl.as_str()),
            ("il-1", "cu-sl-1", "du-sl-1")
        );
    }

    #[test]
    fn second_s4_subnet_reuses_aux() {
        let mut o = Orchestrator::new(two_slices(), Scenario::S4DuShared, OrchestratorConfig::default()).unwrap();
        o.instantiate_subnet(&embb()).unwrap();
        let before = o.aux_service(Component::Du).cloned();
        o.instantiate_subnet(&urllc()).unwrap();
        assert_eq!(o.aux_service(Component::Du).cloned(), before);
        assert!(o.aux_service(Component::Cu).is_none());
        assert_eq!(o.subnets().len(), 2);
    }

    #[test]
    fn s1_has_no_aux() {
        let o = orchestrator(Scenario::S1Dedicated, OrchestratorConfig::default());
        assert!(o.aux_service(Component::Du).is_none());
        assert!(o.aux_service(Component::Cu).is_none());
    }

    #[test]
    fn unknown_and_duplicate_instantiation() {
        let mut o = orchestrator(Scenario::S4DuShared, OrchestratorConfig::default());
        assert_eq!(
            o.instantiate_subnet(&Snssai::new(ServiceType::Mmtc)).unwrap_err(),
            OrchestratorError::UnknownSnssai(Snssai::new(ServiceType::Mmtc))
        );
        assert_eq!(o.instantiate_subnet(&embb()).unwrap_err(), OrchestratorError::AlreadyInstantiated(embb()));
    }

    #[test]
    fn findings_block_instantiation() {
        let mut ds = two_slices();
        ds.aux_nsd.clear();
        assert!(matches!(
            Orchestrator::new(ds, Scenario::S4DuShared, OrchestratorConfig::default()),
            Err(OrchestratorError::DescriptorFindings(_))
        ));
    }

    #[test]
    fn idle_vm_counts_per_scenario() {
        let config = OrchestratorConfig { n_dus_per_gnb: 3, ..Default::default() };
        let expected = [
            (Scenario::S1Dedicated, 8),
            (Scenario::S2AllShared, 4),
            (Scenario::S3CuShared, 7),
            (Scenario::S4DuShared, 5),
        ];
        for (scenario, vms) in expected {
            assert_eq!(orchestrator(scenario, config).vm_count(), vms, "{scenario}");
        }
    }

    #[test]
    fn idle_loads_are_baselines() {
        let o = orchestrator(Scenario::S2AllShared, OrchestratorConfig::default());
        let p = o.config().params;
        for load in o.instance_loads(LoadBasis::Demand) {
            let expected = 2.0 * p.baseline(load.component);
            assert!((load.consumption - expected).abs() < 1e-15);
            assert!(load.shared);
        }
    }

    #[test]
    fn groups_follow_scenario() {
        let o = orchestrator(Scenario::S4DuShared, OrchestratorConfig::default());
        assert_eq!(o.groups(), vec![Group::Cu(embb()), Group::Cu(urllc()), Group::SharedDu]);
        let o = orchestrator(Scenario::S2AllShared, OrchestratorConfig::default());
        assert_eq!(o.groups(), vec![Group::SharedCu, Group::SharedDu]);
    }
}
