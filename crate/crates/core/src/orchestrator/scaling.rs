use thiserror::Error;

use super::{Direction, Group, Level, LoadBasis, Orchestrator, ScalingCause, ScalingEvent, ScalingTarget};
use crate::descriptor::Snssai;
use crate::topology::Component;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("{group} has no level {direction:?} from its current one")]
    AtBoundary { group: Group, direction: Direction },
    #[error("gNB NSD of {snssai} declares no IL for ({cu_sl}, {du_sl})")]
    NoMatchingIl { snssai: Snssai, cu_sl: String, du_sl: String },
    #[error("the {0} is shared in this scenario; scale it through its auxiliary service")]
    SharedComponent(Component),
    #[error("the {0} is not shared in this scenario")]
    NotShared(Component),
    #[error("slice subnet {0} is not instantiated")]
    NotInstantiated(Snssai),
    #[error("scaling {group} down would overload {instance}")]
    Suppressed { group: Group, instance: String },
}

fn other(component: Component) -> Component {
    match component {
        Component::Cu => Component::Du,
        Component::Du => Component::Cu,
    }
}

fn dedicated(component: Component, snssai: &Snssai) -> Group {
    match component {
        Component::Cu => Group::Cu(snssai.clone()),
        Component::Du => Group::Du(snssai.clone()),
    }
}

fn shared_group(component: Component) -> Group {
    match component {
        Component::Cu => Group::SharedCu,
        Component::Du => Group::SharedDu,
    }
}

fn pair(component: Component, own: String, other: String) -> (String, String) {
    match component {
        Component::Cu => (own, other),
        Component::Du => (other, own),
    }
}

struct Realignment {
    subnet: usize,
    cu_sl: String,
    du_sl: String,
    il: String,
}

impl Orchestrator {
    /// Whether `group` has a level in `direction`.
    pub fn can_scale(&self, group: &Group, direction: Direction) -> bool {
        self.group_level(group).is_some_and(|(ladder, i)| ladder.step(i, direction).is_some())
    }

    pub fn scale_group(
        &mut self,
        group: &Group,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<Vec<ScalingEvent>, ScalingError> {
        match group {
            Group::Cu(s) => self.scale_dedicated(s, Component::Cu, direction, cause).map(|e| vec![e]),
            Group::Du(s) => self.scale_dedicated(s, Component::Du, direction, cause).map(|e| vec![e]),
            Group::SharedCu => self.scale_shared(Component::Cu, direction, cause),
            Group::SharedDu => self.scale_shared(Component::Du, direction, cause),
        }
    }

    /// Moves a slice-specific CU one scale level, keeping its DU level.
    pub fn scale_subnet_cu(
        &mut self,
        snssai: &Snssai,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<ScalingEvent, ScalingError> {
        self.scale_dedicated(snssai, Component::Cu, direction, cause)
    }

    /// Moves a slice-specific DU group one scale level, keeping its CU level.
    pub fn scale_subnet_du(
        &mut self,
        snssai: &Snssai,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<ScalingEvent, ScalingError> {
        self.scale_dedicated(snssai, Component::Du, direction, cause)
    }

    /// Moves the shared DU one level on its auxiliary service, then updates
    /// every subnet's IL to match. Returns the auxiliary event followed by one
    /// IL event per subnet whose IL changed.
    pub fn scale_shared_du(
        &mut self,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<Vec<ScalingEvent>, ScalingError> {
        self.scale_shared(Component::Du, direction, cause)
    }

    pub fn scale_shared_cu(
        &mut self,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<Vec<ScalingEvent>, ScalingError> {
        self.scale_shared(Component::Cu, direction, cause)
    }

    /// First instance of `group` that would not fit at `level`, judged on
    /// full PRB demand.
    fn overloaded_at(&self, group: &Group, level: &Level) -> Option<String> {
        self.loads_with(&self.prb_scale(LoadBasis::Demand), None, Some((group, level)))
            .into_iter()
            .filter(|l| &l.group == group)
            .find(|l| if l.shared { !l.isolation(self.config.per_slice_cap).ok } else { l.consumption > l.capacity })
            .map(|l| l.id)
    }

    fn scale_dedicated(
        &mut self,
        snssai: &Snssai,
        component: Component,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<ScalingEvent, ScalingError> {
        if self.scenario.shares(component) {
            return Err(ScalingError::SharedComponent(component));
        }
        let group = dedicated(component, snssai);
        let index = self.subnet_index(snssai).map_err(|_| ScalingError::NotInstantiated(snssai.clone()))?;
        let entry = &self.catalog[snssai];
        let ladder = entry.ladder(component);
        let subnet = &self.subnets[index];
        let from = subnet.sl(component).to_string();
        let current = ladder.index_of(&from).expect("subnet level is on its ladder");
        let next = ladder
            .step(current, direction)
            .ok_or_else(|| ScalingError::AtBoundary { group: group.clone(), direction })?;
        let level = ladder.get(next).clone();
        let (cu_sl, du_sl) = pair(component, level.id.clone(), subnet.sl(other(component)).to_string());
        let il = entry
            .nsd
            .il_for(&cu_sl, &du_sl)
            .ok_or_else(|| ScalingError::NoMatchingIl {
                snssai: snssai.clone(),
                cu_sl: cu_sl.clone(),
                du_sl: du_sl.clone(),
            })?
            .id
            .clone();
        if direction == Direction::Down {
            if let Some(instance) = self.overloaded_at(&group, &level) {
                return Err(ScalingError::Suppressed { group, instance });
            }
        }

        let subnet = &mut self.subnets[index];
        subnet.cu_sl = cu_sl;
        subnet.du_sl = du_sl;
        subnet.current_il = il;
        Ok(ScalingEvent {
            time: self.now,
            target: ScalingTarget::Group(group),
            from_level: from,
            to_level: level.id,
            cause,
        })
    }

    /// Level of the dedicated `component` for `snssai` once the shared other
    /// component moves to `shared_sl`: the smallest declared level that
    /// covers current demand, or the largest declared one if none does.
    fn reselect(&self, snssai: &Snssai, component: Component, shared_sl: &str) -> Option<String> {
        let entry = &self.catalog[snssai];
        let ladder = entry.ladder(component);
        let group = dedicated(component, snssai);
        let required = self
            .instance_loads(LoadBasis::Demand)
            .iter()
            .filter(|l| l.group == group)
            .map(|l| l.consumption)
            .fold(0.0, f64::max);
        let shared_component = other(component);
        let candidates: Vec<usize> = entry
            .nsd
            .ils
            .iter()
            .filter(|il| {
                let sl = match shared_component {
                    Component::Cu => &il.cu_sl,
                    Component::Du => &il.du_sl,
                };
                sl.as_deref() == Some(shared_sl)
            })
            .filter_map(|il| {
                let sl = match component {
                    Component::Cu => il.cu_sl.as_deref(),
                    Component::Du => il.du_sl.as_deref(),
                };
                ladder.index_of(sl?)
            })
            .collect();
        let sufficient = candidates.iter().copied().filter(|&i| ladder.get(i).vcpus >= required).min();
        sufficient.or_else(|| candidates.iter().copied().max()).map(|i| ladder.get(i).id.clone())
    }

    fn scale_shared(
        &mut self,
        component: Component,
        direction: Direction,
        cause: ScalingCause,
    ) -> Result<Vec<ScalingEvent>, ScalingError> {
        let group = shared_group(component);
        let service = self.shared(component).ok_or(ScalingError::NotShared(component))?;
        let ladder = service.ladder.clone();
        let from = service.instance.current_il.clone();
        let current = ladder.index_of(&from).expect("aux level is on its ladder");
        let next = ladder
            .step(current, direction)
            .ok_or_else(|| ScalingError::AtBoundary { group: group.clone(), direction })?;
        let level = ladder.get(next).clone();
        if direction == Direction::Down {
            if let Some(instance) = self.overloaded_at(&group, &level) {
                return Err(ScalingError::Suppressed { group, instance });
            }
        }

        // Every subnet must have a declared IL at the new level before
        // anything changes.
        let mut plan = Vec::with_capacity(self.subnets.len());
        for (i, subnet) in self.subnets.iter().enumerate() {
            let own = self.subnet_level_for(&subnet.snssai, component, &ladder, next);
            let partner = if self.scenario.shares(other(component)) {
                Some(subnet.sl(other(component)).to_string())
            } else {
                self.reselect(&subnet.snssai, other(component), &own)
            };
            let (cu_sl, du_sl) = pair(component, own.clone(), partner.clone().unwrap_or_else(|| "*".into()));
            let il =
                partner.and_then(|_| self.catalog[&subnet.snssai].nsd.il_for(&cu_sl, &du_sl)).map(|il| il.id.clone());
            let Some(il) = il else {
                return Err(ScalingError::NoMatchingIl { snssai: subnet.snssai.clone(), cu_sl, du_sl });
            };
            plan.push(Realignment { subnet: i, cu_sl, du_sl, il });
        }

        let live = self.live_instances(component, &level);
        let service = self.shared_mut(component).expect("checked above");
        service.instance.current_il = level.id.clone();
        service.instance.live_instances = live;

        let mut events = vec![ScalingEvent {
            time: self.now,
            target: ScalingTarget::Group(group),
            from_level: from,
            to_level: level.id,
            cause,
        }];
        for step in plan {
            let subnet = &mut self.subnets[step.subnet];
            if subnet.current_il != step.il {
                events.push(ScalingEvent {
                    time: self.now,
                    target: ScalingTarget::GnbIl(subnet.snssai.clone()),
                    from_level: subnet.current_il.clone(),
                    to_level: step.il.clone(),
                    cause,
                });
            }
            subnet.cu_sl = step.cu_sl;
            subnet.du_sl = step.du_sl;
            subnet.current_il = step.il;
        }
        Ok(events)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::OrchestratorConfig;
    use super::*;
    use crate::descriptor::ServiceType;
    use crate::resource::{Mcs, ResourceModelParams};
    use crate::topology::{Drb, Qos, Scenario};

    fn embb() -> Snssai {
        Snssai::new(ServiceType::Embb)
    }

    fn urllc() -> Snssai {
        Snssai::new(ServiceType::Urllc)
    }

    fn drb(id: u64, snssai: Snssai, prbs: f64) -> Drb {
        Drb {
            drb_id: id,
            snssai,
            qos: Qos { throughput_mbps: prbs * 0.336, latency_ms: 10.0, reliability: 0.999 },
            mcs: Mcs::new(4, 0.5).unwrap(),
            signalling: false,
        }
    }

    fn linear(per_prb: f64) -> OrchestratorConfig {
        let params = ResourceModelParams { c0: 0.0, k: per_prb / (0.5 * 1.4f64.exp()), ..Default::default() };
        OrchestratorConfig { params, ..Default::default() }
    }

    fn sls(o: &Orchestrator, s: &Snssai) -> (String, String, String) {
        let x = o.subnet(s).unwrap();
        (x.current_il.clone(), x.cu_sl.clone(), x.du_sl.clone())
    }

    #[test]
    fn cu_up_keeps_du_level() {
        let mut o = orchestrator(Scenario::S1Dedicated, OrchestratorConfig::default());
        o.scale_subnet_du(&embb(), Direction::Up, ScalingCause::LoadIncrease).unwrap();
        assert_eq!(sls(&o, &embb()), ("il-2".into(), "cu-sl-1".into(), "du-sl-2".into()));
        let e = o.scale_subnet_cu(&embb(), Direction::Up, ScalingCause::LoadIncrease).unwrap();
        assert_eq!(sls(&o, &embb()), ("il-5".into(), "cu-sl-2".into(), "du-sl-2".into()));
        assert_eq!((e.from_level.as_str(), e.to_level.as_str()), ("cu-sl-1", "cu-sl-2"));
        assert_eq!(e.target, ScalingTarget::Group(Group::Cu(embb())));
        assert_eq!(sls(&o, &urllc()).0, "il-1");
    }

    #[test]
    fn at_boundary() {
        let mut o = orchestrator(Scenario::S1Dedicated, OrchestratorConfig::default());
        assert_eq!(
            o.scale_subnet_cu(&embb(), Direction::Down, ScalingCause::LoadDecrease).unwrap_err(),
            ScalingError::AtBoundary { group: Group::Cu(embb()), direction: Direction::Down }
        );
        o.scale_subnet_cu(&embb(), Direction::Up, ScalingCause::LoadIncrease).unwrap();
        assert!(matches!(
            o.scale_subnet_cu(&embb(), Direction::Up, ScalingCause::LoadIncrease),
            Err(ScalingError::AtBoundary { .. })
        ));
        assert!(!o.can_scale(&Group::Cu(embb()), Direction::Up));
    }

    #[test]
    fn undeclared_il_is_refused() {
        let mut ds = two_slices();
        ds.gnb_nsd[0].ils.retain(|il| il.id != "il-4");
        let mut o = Orchestrator::new(ds, Scenario::S1Dedicated, OrchestratorConfig::default()).unwrap();
        o.instantiate_all().unwrap();
        let before = o.subnet(&embb()).cloned();
        assert_eq!(
            o.scale_subnet_cu(&embb(), Direction::Up, ScalingCause::LoadIncrease).unwrap_err(),
            ScalingError::NoMatchingIl { snssai: embb(), cu_sl: "cu-sl-2".into(), du_sl: "du-sl-1".into() }
        );
        assert_eq!(o.subnet(&embb()).cloned(), before);
    }

    #[test]
    fn shared_component_cannot_scale_per_slice() {
        let mut o = orchestrator(Scenario::S4DuShared, OrchestratorConfig::default());
        assert_eq!(
            o.scale_subnet_du(&embb(), Direction::Up, ScalingCause::LoadIncrease).unwrap_err(),
            ScalingError::SharedComponent(Component::Du)
        );
        assert_eq!(
            o.scale_shared_cu(Direction::Up, ScalingCause::LoadIncrease).unwrap_err(),
            ScalingError::NotShared(Component::Cu)
        );
    }

    #[test]
    fn shared_du_up_realigns_every_subnet() {
        let mut o = orchestrator(Scenario::S4DuShared, OrchestratorConfig::default());
        let events = o.scale_shared_du(Direction::Up, ScalingCause::LoadIncrease).unwrap();
        assert_eq!(o.aux_service(Component::Du).unwrap().current_il, "du-sl-2");
        assert_eq!(events.len(), 3);
        assert_eq!(events[0].target, ScalingTarget::Group(Group::SharedDu));
        assert_eq!((events[0].from_level.as_str(), events[0].to_level.as_str()), ("du-sl-1", "du-sl-2"));
        assert_eq!(events.iter().filter(|e| e.target == ScalingTarget::Group(Group::SharedDu)).count(), 1);
        for s in [embb(), urllc()] {
            assert_eq!(sls(&o, &s), ("il-2".into(), "cu-sl-1".into(), "du-sl-2".into()));
        }
        assert!(o.shared_level_mismatches(Component::Du).is_empty());
        assert_eq!(o.aux_service(Component::Du).unwrap().live_instances.len(), 2);
    }

    #[test]
    fn shared_du_up_reselects_cu_by_demand() {
        // CU cost 0.3 * 0.01 per PRB: 400 PRBs need 1.2 vCPU, more than cu-sl-1.
        let mut o = orchestrator(Scenario::S4DuShared, linear(0.01));
        let path = o.graph().route_drb(&drb(1, embb(), 1.0)).unwrap();
        o.subnets[0].admitted_drbs.push(super::super::AdmittedDrb { drb: drb(1, embb(), 1.0), demand_prbs: 400, path });
        o.scale_shared_du(Direction::Up, ScalingCause::LoadIncrease).unwrap();
        assert_eq!(sls(&o, &embb()), ("il-5".into(), "cu-sl-2".into(), "du-sl-2".into()));
        assert_eq!(sls(&o, &urllc()), ("il-2".into(), "cu-sl-1".into(), "du-sl-2".into()));
    }

    #[test]
    fn shared_du_refuses_when_a_subnet_lacks_the_il() {
        let mut ds = two_slices();
        ds.gnb_nsd[1].ils.retain(|il| il.du_sl.as_deref() != Some("du-sl-2"));
        let mut o = Orchestrator::new(ds, Scenario::S4DuShared, OrchestratorConfig::default()).unwrap();
        o.instantiate_all().unwrap();
        assert!(matches!(
            o.scale_shared_du(Direction::Up, ScalingCause::LoadIncrease),
            Err(ScalingError::NoMatchingIl { .. })
        ));
        assert_eq!(o.aux_service(Component::Du).unwrap().current_il, "du-sl-1");
        assert!(o.subnets().iter().all(|s| s.du_sl == "du-sl-1"));
    }

    #[test]
    fn scale_down_is_suppressed_when_load_does_not_fit() {
        let mut o = orchestrator(Scenario::S4DuShared, linear(0.01));
        o.scale_shared_du(Direction::Up, ScalingCause::LoadIncrease).unwrap();
        // 0.6 + 0.6 vCPU on the shared DU: fits 2 vCPUs, not 1.
        assert!(o.admit_drb(drb(1, embb(), 60.0)).unwrap().is_admit());
        assert!(o.admit_drb(drb(2, urllc(), 60.0)).unwrap().is_admit());
        assert!(matches!(
            o.scale_shared_du(Direction::Down, ScalingCause::LoadDecrease),
            Err(ScalingError::Suppressed { .. })
        ));
        o.release_drb(&urllc(), 2);
        let events = o.scale_shared_du(Direction::Down, ScalingCause::LoadDecrease).unwrap();
        assert_eq!(events[0].to_level, "du-sl-1");
    }

    #[test]
    fn shared_cu_pins_shared_du_in_s2() {
        let mut o = orchestrator(Scenario::S2AllShared, OrchestratorConfig::default());
        o.scale_shared_du(Direction::Up, ScalingCause::LoadIncrease).unwrap();
        o.scale_shared_cu(Direction::Up, ScalingCause::LoadIncrease).unwrap();
        for s in [embb(), urllc()] {
            assert_eq!(sls(&o, &s), ("il-5".into(), "cu-sl-2".into(), "du-sl-2".into()));
        }
        assert!(o.shared_level_mismatches(Component::Cu).is_empty());
        assert!(o.shared_level_mismatches(Component::Du).is_empty());
    }
}
