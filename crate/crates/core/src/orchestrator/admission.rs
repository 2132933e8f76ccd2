use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{AdmittedDrb, InstanceLoad, Orchestrator, OrchestratorError};
use crate::descriptor::Snssai;
use crate::topology::{Drb, DrbPath};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RejectReason {
    InvalidDrb(String),
    /// The slice would exceed its share of a shared instance.
    VcpuCap,
    /// The shared instance would exceed its capacity.
    VcpuCapacity,
    VnicSaturated,
    /// Mean vNIC wait above the configured cap, seconds.
    VnicDelay(f64),
}

impl RejectReason {
    /// Rejections that more vCPU on the instance could have avoided.
    pub fn is_vcpu(&self) -> bool {
        matches!(self, RejectReason::VcpuCap | RejectReason::VcpuCapacity)
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::InvalidDrb(why) => write!(f, "invalid DRB: {why}"),
            RejectReason::VcpuCap => f.write_str("per-slice vCPU cap"),
            RejectReason::VcpuCapacity => f.write_str("instance vCPU capacity"),
            RejectReason::VnicSaturated => f.write_str("vNIC saturated"),
            RejectReason::VnicDelay(w) => write!(f, "vNIC wait {w:.3e} s over cap"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AdmissionDecision {
    Admit {
        path: DrbPath,
        demand_prbs: u32,
    },
    /// `instance` is the instance whose constraint failed, if any.
    Reject {
        reason: RejectReason,
        instance: Option<String>,
    },
}

impl AdmissionDecision {
    pub fn is_admit(&self) -> bool {
        matches!(self, AdmissionDecision::Admit { .. })
    }
}

enum Violation {
    SliceCap(Snssai),
    Capacity,
    Vnic,
}

impl Orchestrator {
    /// PRBs needed to carry `drb`'s guaranteed throughput at its MCS.
    pub fn demand_prbs(&self, drb: &Drb) -> Result<u32, OrchestratorError> {
        let numerology = self
            .catalog
            .get(&drb.snssai)
            .ok_or_else(|| OrchestratorError::UnknownSnssai(drb.snssai.clone()))?
            .numerology;
        let prbs = (drb.qos.throughput_mbps / drb.mcs.prb_rate_mbps(numerology)).ceil();
        Ok(prbs.clamp(1.0, f64::from(u32::MAX)) as u32)
    }

    /// Admits `drb` if, with its full PRB demand added, every shared instance
    /// on its path keeps isolation and every instance on its path keeps the
    /// vNIC wait within the cap. Nothing changes on rejection.
    pub fn admit_drb(&mut self, drb: Drb) -> Result<AdmissionDecision, OrchestratorError> {
        let index = self.subnet_index(&drb.snssai)?;
        if self.subnets.iter().any(|s| s.admitted_drbs.iter().any(|a| a.drb.drb_id == drb.drb_id)) {
            return Err(OrchestratorError::DuplicateDrb(drb.drb_id));
        }
        if let Err(why) = drb.qos.check().and_then(|_| drb.mcs.check().map_err(|e| e.to_string())) {
            return Ok(AdmissionDecision::Reject { reason: RejectReason::InvalidDrb(why), instance: None });
        }
        let demand_prbs = self.demand_prbs(&drb)?;
        let path = self.graph.route_drb(&drb)?;
        let candidate = AdmittedDrb { drb, demand_prbs, path };

        let loads = self.loads_with(&self.prb_scale(super::LoadBasis::Demand), Some(&candidate), None);
        for id in [&candidate.path.du_id, &candidate.path.cu_id] {
            let Some(load) = loads.iter().find(|l| &l.id == id) else { continue };
            if let Some(reason) = self.admission_violation(load) {
                return Ok(AdmissionDecision::Reject { reason, instance: Some(id.clone()) });
            }
        }

        let path = candidate.path.clone();
        self.subnets[index].admitted_drbs.push(candidate);
        Ok(AdmissionDecision::Admit { path, demand_prbs })
    }

    fn admission_violation(&self, load: &InstanceLoad) -> Option<RejectReason> {
        match self.violation(load)? {
            Violation::SliceCap(_) => Some(RejectReason::VcpuCap),
            Violation::Capacity => Some(RejectReason::VcpuCapacity),
            Violation::Vnic => Some(match load.vnic_wait(&self.config.params) {
                Ok(w) => RejectReason::VnicDelay(w),
                Err(_) => RejectReason::VnicSaturated,
            }),
        }
    }

    fn violation(&self, load: &InstanceLoad) -> Option<Violation> {
        if load.shared {
            let check = load.isolation(self.config.per_slice_cap);
            if !check.ok {
                if let Some((s, _)) = check.headroom.iter().filter(|(_, h)| **h < 0.0).min_by(|a, b| a.1.total_cmp(b.1))
                {
                    return Some(Violation::SliceCap(s.clone()));
                }
                return Some(Violation::Capacity);
            }
        }
        match load.vnic_wait(&self.config.params) {
            Ok(w) if w <= self.config.vnic_delay_cap_s => None,
            _ => Some(Violation::Vnic),
        }
    }

    /// Removes a DRB; returns it if it was admitted.
    pub fn release_drb(&mut self, snssai: &Snssai, drb_id: u64) -> Option<AdmittedDrb> {
        let subnet = self.subnets.iter_mut().find(|s| &s.snssai == snssai)?;
        let pos = subnet.admitted_drbs.iter().position(|a| a.drb.drb_id == drb_id)?;
        Some(subnet.admitted_drbs.remove(pos))
    }

    /// Splits `total` PRBs between subnets in proportion to their admitted
    /// PRB demand, never beyond it, then trims one PRB at a time until every
    /// shared instance keeps isolation and every vNIC wait is within the cap.
    pub fn allocate_prbs(&mut self, total: u32) -> Result<BTreeMap<Snssai, u32>, OrchestratorError> {
        let demands: Vec<u32> = self.subnets.iter().map(|s| s.demand_prbs()).collect();
        let mut alloc = proportional_split(total, &demands);

        loop {
            let scale: BTreeMap<Snssai, f64> = self
                .subnets
                .iter()
                .zip(demands.iter().zip(&alloc))
                .map(|(s, (&d, &a))| (s.snssai.clone(), if d == 0 { 0.0 } else { f64::from(a) / f64::from(d) }))
                .collect();
            let loads = self.loads_with(&scale, None, None);
            let Some((load, violation)) = loads.iter().find_map(|l| self.violation(l).map(|v| (l, v))) else {
                break;
            };
            let position = |s: &Snssai| self.subnets.iter().position(|x| &x.snssai == s);
            let victim = match violation {
                Violation::SliceCap(s) => position(&s).filter(|&i| alloc[i] > 0),
                Violation::Capacity => {
                    // Highest variable vCPU per PRB on the violated instance.
                    let baseline = self.config.params.baseline(load.component);
                    load.per_slice
                        .iter()
                        .filter_map(|(s, c)| {
                            let i = position(s)?;
                            let prbs = load.slice_prbs.get(s).copied().unwrap_or(0.0);
                            (alloc[i] > 0 && prbs > 0.0).then(|| (i, (c - baseline) / f64::from(alloc[i])))
                        })
                        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                        .map(|(i, _)| i)
                }
                Violation::Vnic => load
                    .slice_prbs
                    .iter()
                    .filter_map(|(s, prbs)| {
                        let i = position(s)?;
                        (alloc[i] > 0 && *prbs > 0.0).then(|| (i, prbs / f64::from(alloc[i])))
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i),
            };
            match victim {
                Some(i) => alloc[i] -= 1,
                None => return Err(OrchestratorError::Infeasible { instance: load.id.clone() }),
            }
        }

        for (subnet, a) in self.subnets.iter_mut().zip(&alloc) {
            subnet.allocated_prbs = *a;
        }
        Ok(self.subnets.iter().map(|s| (s.snssai.clone(), s.allocated_prbs)).collect())
    }
}

/// Largest-remainder split of `total` proportional to `demands`, capped at
/// each demand. Ties on the remainder go to the earlier entry.
pub(crate) fn proportional_split(total: u32, demands: &[u32]) -> Vec<u32> {
    let sum: u64 = demands.iter().map(|&d| u64::from(d)).sum();
    if sum <= u64::from(total) {
        return demands.to_vec();
    }
    let total = u64::from(total);
    let mut alloc: Vec<u32> = demands.iter().map(|&d| (total * u64::from(d) / sum) as u32).collect();
    let given: u64 = alloc.iter().map(|&a| u64::from(a)).sum();
    let mut order: Vec<usize> = (0..demands.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(total * u64::from(demands[i]) % sum));
    for &i in order.iter().take((total - given) as usize) {
        alloc[i] += 1;
    }
    alloc
}
