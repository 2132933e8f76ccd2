//! Concrete CU/DU/RU instance graph of one gNB under each sharing scenario,
//! with the matching tables shared components need to route DRBs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{DescriptorSet, Snssai};
use crate::resource::Mcs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Cu,
    Du,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Cu => "cu",
            Component::Du => "du",
        })
    }
}

/// Which gNB components are shared between slice subnets. RUs are always
/// shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Slice-specific CU and DUs.
    #[serde(rename = "s1")]
    S1Dedicated,
    /// One gNB for all slices.
    #[serde(rename = "s2")]
    S2AllShared,
    /// Shared CU, slice-specific DUs.
    #[serde(rename = "s3")]
    S3CuShared,
    /// Slice-specific CUs, shared DUs.
    #[serde(rename = "s4")]
    S4DuShared,
}

impl Scenario {
    pub const ALL: [Scenario; 4] =
        [Scenario::S1Dedicated, Scenario::S2AllShared, Scenario::S3CuShared, Scenario::S4DuShared];

    pub fn shares(self, component: Component) -> bool {
        match component {
            Component::Cu => matches!(self, Scenario::S2AllShared | Scenario::S3CuShared),
            Component::Du => matches!(self, Scenario::S2AllShared | Scenario::S4DuShared),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::S1Dedicated => "s1",
            Scenario::S2AllShared => "s2",
            Scenario::S3CuShared => "s3",
            Scenario::S4DuShared => "s4",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Scenario::S1Dedicated),
            "s2" => Ok(Scenario::S2AllShared),
            "s3" => Ok(Scenario::S3CuShared),
            "s4" => Ok(Scenario::S4DuShared),
            other => Err(format!("unknown scenario `{other}` (expected s1..s4)")),
        }
    }
}

/// Protocol functions that must tell slices apart when components are
/// shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceAwareness {
    IntraSliceRrmDu,
    IntraSliceRrmCu,
    RrcLayer,
}

pub fn slice_awareness_required(scenario: Scenario) -> BTreeSet<SliceAwareness> {
    use SliceAwareness::*;
    match scenario {
        Scenario::S1Dedicated => BTreeSet::new(),
        Scenario::S2AllShared => [IntraSliceRrmDu, IntraSliceRrmCu, RrcLayer].into(),
        Scenario::S3CuShared => [IntraSliceRrmCu, RrcLayer].into(),
        Scenario::S4DuShared => [IntraSliceRrmDu].into(),
    }
}

/// One logical CU or DU.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub id: String,
    pub component: Component,
    pub owners: BTreeSet<Snssai>,
}

impl Instance {
    /// Serving more than one slice.
    pub fn is_shared(&self) -> bool {
        self.owners.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceGraph {
    pub scenario: Scenario,
    pub slices: Vec<Snssai>,
    pub cu_instances: Vec<Instance>,
    pub du_instances: Vec<Instance>,
    pub ru_units: Vec<String>,
    /// Undirected CU-DU and DU-RU adjacencies.
    pub edges: Vec<(String, String)>,
    /// Scenario #3: the shared CU finds each slice's DUs here.
    pub snssai_to_du: BTreeMap<Snssai, Vec<String>>,
    /// Scenario #4: the shared DU identifies a slice from the CU id.
    pub cu_to_snssai: BTreeMap<String, Snssai>,
    du_to_ru: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Qos {
    pub throughput_mbps: f64,
    pub latency_ms: f64,
    pub reliability: f64,
}

impl Qos {
    pub fn check(&self) -> Result<(), String> {
        if !(self.throughput_mbps > 0.0 && self.throughput_mbps.is_finite()) {
            return Err(format!("throughput {} must be positive", self.throughput_mbps));
        }
        if !(self.latency_ms > 0.0 && self.latency_ms.is_finite()) {
            return Err(format!("latency {} must be positive", self.latency_ms));
        }
        if !(self.reliability > 0.0 && self.reliability <= 1.0) {
            return Err(format!("reliability {} not in (0, 1]", self.reliability));
        }
        Ok(())
    }
}

/// Data radio bearer of one slice, with the MCS its UE is scheduled at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drb {
    pub drb_id: u64,
    pub snssai: Snssai,
    pub qos: Qos,
    pub mcs: Mcs,
    /// Signalling-only bearer (UE attachment), as opposed to user data.
    #[serde(default)]
    pub signalling: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DrbPath {
    pub ru_id: String,
    pub du_id: String,
    pub cu_id: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("descriptor set has no RAN slice subnet")]
    NoSlices,
    #[error("no RU is referenced by any gNB NSD")]
    NoRadioUnits,
    #[error("at least one DU per gNB is required")]
    NoDus,
    #[error("slice {0} is not served by this graph")]
    UnknownSlice(Snssai),
}

pub fn build_instance_graph(
    ds: &DescriptorSet,
    scenario: Scenario,
    n_dus_per_gnb: u32,
) -> Result<InstanceGraph, TopologyError> {
    if ds.ran_nsst.is_empty() {
        return Err(TopologyError::NoSlices);
    }
    if n_dus_per_gnb == 0 {
        return Err(TopologyError::NoDus);
    }
    let slices = ds.slices();
    let all: BTreeSet<Snssai> = slices.iter().cloned().collect();

    let mut ru_units: Vec<String> = Vec::new();
    for nsst in &ds.ran_nsst {
        if let Some(nsd) = ds.gnb_nsd(&nsst.gnb_nsd_ref) {
            for ru in &nsd.ru_pnfd_refs {
                if !ru_units.contains(ru) {
                    ru_units.push(ru.clone());
                }
            }
        }
    }
    if ru_units.is_empty() {
        return Err(TopologyError::NoRadioUnits);
    }

    let mut cu_instances = Vec::new();
    let mut cu_to_snssai = BTreeMap::new();
    if scenario.shares(Component::Cu) {
        cu_instances.push(Instance { id: "cu-shared".into(), component: Component::Cu, owners: all.clone() });
    } else {
        for nsst in &ds.ran_nsst {
            let id = ds.gnb_nsd(&nsst.gnb_nsd_ref).map_or_else(|| format!("cu-{}", nsst.id), |nsd| nsd.cu_identifier());
            if scenario == Scenario::S4DuShared {
                cu_to_snssai.insert(id.clone(), nsst.snssai.clone());
            }
            cu_instances.push(Instance { id, component: Component::Cu, owners: [nsst.snssai.clone()].into() });
        }
    }

    let mut du_instances = Vec::new();
    let mut snssai_to_du = BTreeMap::new();
    if scenario.shares(Component::Du) {
        for j in 1..=n_dus_per_gnb {
            du_instances.push(Instance { id: format!("du-shared-{j}"), component: Component::Du, owners: all.clone() });
        }
    } else {
        for nsst in &ds.ran_nsst {
            let ids: Vec<String> = (1..=n_dus_per_gnb).map(|j| format!("du-{}-{j}", nsst.id)).collect();
            for id in &ids {
                du_instances.push(Instance {
                    id: id.clone(),
                    component: Component::Du,
                    owners: [nsst.snssai.clone()].into(),
                });
            }
            if scenario == Scenario::S3CuShared {
                snssai_to_du.insert(nsst.snssai.clone(), ids);
            }
        }
    }

    let mut edges = Vec::new();
    let mut du_to_ru = BTreeMap::new();
    let mut position: BTreeMap<&BTreeSet<Snssai>, usize> = BTreeMap::new();
    for du in &du_instances {
        for cu in cu_instances.iter().filter(|cu| !cu.owners.is_disjoint(&du.owners)) {
            edges.push((cu.id.clone(), du.id.clone()));
        }
        let j = position.entry(&du.owners).or_default();
        let ru = &ru_units[*j % ru_units.len()];
        *j += 1;
        edges.push((du.id.clone(), ru.clone()));
        du_to_ru.insert(du.id.clone(), ru.clone());
    }

    Ok(InstanceGraph {
        scenario,
        slices,
        cu_instances,
        du_instances,
        ru_units,
        edges,
        snssai_to_du,
        cu_to_snssai,
        du_to_ru,
    })
}

/// SplitMix64 finalizer: spreads consecutive DRB ids over the DU set.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl InstanceGraph {
    pub fn instance_count(&self) -> usize {
        self.cu_instances.len() + self.du_instances.len()
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.cu_instances.iter().chain(&self.du_instances)
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances().find(|i| i.id == id)
    }

    pub fn serves(&self, snssai: &Snssai) -> bool {
        self.slices.contains(snssai)
    }

    pub fn cu_of(&self, snssai: &Snssai) -> Option<&Instance> {
        if self.scenario == Scenario::S4DuShared {
            let id = self.cu_to_snssai.iter().find(|(_, s)| *s == snssai).map(|(cu, _)| cu)?;
            return self.cu_instances.iter().find(|cu| &cu.id == id);
        }
        self.cu_instances.iter().find(|cu| cu.owners.contains(snssai))
    }

    pub fn dus_of(&self, snssai: &Snssai) -> Vec<&Instance> {
        if let Some(ids) = self.snssai_to_du.get(snssai) {
            return ids.iter().filter_map(|id| self.du_instances.iter().find(|d| &d.id == id)).collect();
        }
        self.du_instances.iter().filter(|d| d.owners.contains(snssai)).collect()
    }

    /// CU and DU serving the DRB's slice; among several DUs of the slice, the
    /// one selected by hashing the DRB id.
    pub fn route_drb(&self, drb: &Drb) -> Result<DrbPath, TopologyError> {
        let unknown = || TopologyError::UnknownSlice(drb.snssai.clone());
        if !self.serves(&drb.snssai) {
            return Err(unknown());
        }
        let cu = self.cu_of(&drb.snssai).ok_or_else(unknown)?;
        let dus = self.dus_of(&drb.snssai);
        if dus.is_empty() {
            return Err(unknown());
        }
        let du = dus[(mix(drb.drb_id) % dus.len() as u64) as usize];
        Ok(DrbPath { ru_id: self.du_to_ru[&du.id].clone(), du_id: du.id.clone(), cu_id: cu.id.clone() })
    }
}

/// UE-attachment hybrid: signalling bearers go through the `signalling`
/// graph (typically all-shared), user data through `data`.
pub fn route_hybrid(signalling: &InstanceGraph, data: &InstanceGraph, drb: &Drb) -> Result<DrbPath, TopologyError> {
    if drb.signalling {
        signalling.route_drb(drb)
    } else {
        data.route_drb(drb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{parse_descriptor_set, Document, ServiceType};

    fn two_slices() -> DescriptorSet {
        let text = include_str!("../../../data/two-slice-s4/descriptors.toml");
        parse_descriptor_set(&[Document::new("d", text)]).unwrap()
    }

    fn drb(id: u64, s: ServiceType) -> Drb {
        Drb {
            drb_id: id,
            snssai: Snssai::new(s),
            qos: Qos { throughput_mbps: 1.0, latency_ms: 10.0, reliability: 0.99 },
            mcs: Mcs::new(4, 0.5).unwrap(),
            signalling: false,
        }
    }

    #[test]
    fn counts_for_two_slices_three_dus() {
        let ds = two_slices();
        // K = 2, n = 3, from the sharing rules: (CUs, DUs).
        let expected = [
            (Scenario::S1Dedicated, 2, 6),
            (Scenario::S2AllShared, 1, 3),
            (Scenario::S3CuShared, 1, 6),
            (Scenario::S4DuShared, 2, 3),
        ];
        for (scenario, cus, dus) in expected {
            let g = build_instance_graph(&ds, scenario, 3).unwrap();
            assert_eq!((g.cu_instances.len(), g.du_instances.len()), (cus, dus), "{scenario}");
        }
    }

    #[test]
    fn single_slice_scenarios_coincide() {
        let mut ds = two_slices();
        ds.ran_nsst.truncate(1);
        for scenario in Scenario::ALL {
            let g = build_instance_graph(&ds, scenario, 2).unwrap();
            assert_eq!((g.cu_instances.len(), g.du_instances.len()), (1, 2));
            assert!(g.instances().all(|i| !i.is_shared()));
        }
    }

    #[test]
    fn matching_tables_only_where_needed() {
        let ds = two_slices();
        let s3 = build_instance_graph(&ds, Scenario::S3CuShared, 2).unwrap();
        assert_eq!(s3.snssai_to_du.len(), 2);
        assert!(s3.cu_to_snssai.is_empty());
        let s4 = build_instance_graph(&ds, Scenario::S4DuShared, 2).unwrap();
        assert!(s4.snssai_to_du.is_empty());
        assert_eq!(s4.cu_to_snssai.len(), s4.cu_instances.len());
        assert_eq!(s4.cu_to_snssai["cu-urllc-0"], Snssai::new(ServiceType::Urllc));
        for scenario in [Scenario::S1Dedicated, Scenario::S2AllShared] {
            let g = build_instance_graph(&ds, scenario, 2).unwrap();
            assert!(g.snssai_to_du.is_empty() && g.cu_to_snssai.is_empty());
        }
    }

    #[test]
    fn owner_shapes() {
        let ds = two_slices();
        for scenario in Scenario::ALL {
            let g = build_instance_graph(&ds, scenario, 3).unwrap();
            for (component, list) in [(Component::Cu, &g.cu_instances), (Component::Du, &g.du_instances)] {
                for inst in list {
                    let expected = if scenario.shares(component) { 2 } else { 1 };
                    assert_eq!(inst.owners.len(), expected, "{scenario} {}", inst.id);
                }
            }
        }
    }

    #[test]
    fn s3_routes_through_table() {
        let ds = two_slices();
        let g = build_instance_graph(&ds, Scenario::S3CuShared, 1).unwrap();
        assert_eq!(g.snssai_to_du[&Snssai::new(ServiceType::Embb)], vec!["du-nsst-embb-1".to_string()]);
        let path = g.route_drb(&drb(7, ServiceType::Embb)).unwrap();
        assert_eq!(path.du_id, "du-nsst-embb-1");
        assert_eq!(path.cu_id, "cu-shared");
        assert_eq!(path.ru_id, "ru-1");
    }

    #[test]
    fn s4_routes_by_inverse_cu_table() {
        let ds = two_slices();
        let g = build_instance_graph(&ds, Scenario::S4DuShared, 2).unwrap();
        let path = g.route_drb(&drb(3, ServiceType::Urllc)).unwrap();
        assert_eq!(path.cu_id, "cu-urllc-0");
        assert!(path.du_id.starts_with("du-shared-"));
    }

    #[test]
    fn s2_single_cu_and_stable_du_choice() {
        let ds = two_slices();
        let g = build_instance_graph(&ds, Scenario::S2AllShared, 3).unwrap();
        let a = g.route_drb(&drb(11, ServiceType::Embb)).unwrap();
        let b = g.route_drb(&drb(11, ServiceType::Embb)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cu_id, "cu-shared");
    }

    #[test]
    fn routing_total_and_deterministic() {
        let ds = two_slices();
        for scenario in Scenario::ALL {
            for n in 1..=4 {
                let g = build_instance_graph(&ds, scenario, n).unwrap();
                for s in [ServiceType::Embb, ServiceType::Urllc] {
                    let mut used = BTreeSet::new();
                    for id in 0..200 {
                        let d = drb(id, s);
                        let path = g.route_drb(&d).unwrap();
                        assert_eq!(path, g.route_drb(&d).unwrap());
                        assert!(g.instance(&path.du_id).unwrap().owners.contains(&d.snssai));
                        assert!(g.instance(&path.cu_id).unwrap().owners.contains(&d.snssai));
                        assert!(g.edges.contains(&(path.cu_id.clone(), path.du_id.clone())));
                        assert!(g.edges.contains(&(path.du_id.clone(), path.ru_id.clone())));
                        used.insert(path.du_id);
                    }
                    assert_eq!(used.len(), n as usize, "every DU of the slice gets traffic");
                }
            }
        }
    }

    #[test]
    fn unknown_slice_is_an_error() {
        let g = build_instance_graph(&two_slices(), Scenario::S1Dedicated, 1).unwrap();
        assert_eq!(
            g.route_drb(&drb(1, ServiceType::Mmtc)),
            Err(TopologyError::UnknownSlice(Snssai::new(ServiceType::Mmtc)))
        );
    }

    #[test]
    fn no_slices() {
        let ds = DescriptorSet::default();
        assert_eq!(build_instance_graph(&ds, Scenario::S2AllShared, 1), Err(TopologyError::NoSlices));
    }

    #[test]
    fn awareness_per_scenario() {
        use SliceAwareness::*;
        assert!(slice_awareness_required(Scenario::S1Dedicated).is_empty());
        assert_eq!(slice_awareness_required(Scenario::S2AllShared).len(), 3);
        assert_eq!(slice_awareness_required(Scenario::S3CuShared), [IntraSliceRrmCu, RrcLayer].into());
        assert_eq!(slice_awareness_required(Scenario::S4DuShared), [IntraSliceRrmDu].into());
    }

    #[test]
    fn hybrid_splits_signalling() {
        let ds = two_slices();
        let sig = build_instance_graph(&ds, Scenario::S2AllShared, 1).unwrap();
        let data = build_instance_graph(&ds, Scenario::S1Dedicated, 1).unwrap();
        let mut d = drb(5, ServiceType::Embb);
        assert_eq!(route_hybrid(&sig, &data, &d).unwrap().cu_id, "cu-embb-0");
        d.signalling = true;
        assert_eq!(route_hybrid(&sig, &data, &d).unwrap().cu_id, "cu-shared");
    }
}
