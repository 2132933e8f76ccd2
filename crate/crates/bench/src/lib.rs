//! Fixtures shared by the benchmarks.

use ranslice_core::descriptor::sample::{slice_id, uniform};
use ranslice_core::orchestrator::{Orchestrator, OrchestratorConfig};
use ranslice_core::sim::{DemandProfile, McsWeight, SimConfig};
use ranslice_core::{DescriptorSet, Drb, Mcs, Qos, Scenario};

/// `k` slices sharing one DU.
pub fn descriptors(k: usize) -> DescriptorSet {
    uniform(k, true)
}

/// Moderately loaded run of `ticks` over `k` slices.
pub fn sim_config(k: usize, scenario: Scenario, ticks: u64) -> SimConfig {
    let profiles = (0..k)
        .map(|i| DemandProfile {
            snssai: slice_id(i, k),
            drb_arrival_rate: 2.0,
            mean_holding: 10.0,
            persistent_drbs: 0,
            qos: Qos { throughput_mbps: 4.0, latency_ms: 10.0, reliability: 0.999 },
            mcs: vec![
                McsWeight { modulation_order: 4, code_rate: 0.5, prob: 0.5 },
                McsWeight { modulation_order: 6, code_rate: 0.75, prob: 0.5 },
            ],
            seed: i as u64,
        })
        .collect();
    SimConfig {
        scenario,
        ticks,
        total_prbs: 273,
        n_dus_per_gnb: 1,
        seed: 7,
        vnic_delay_cap_ms: 1.0,
        budget: Default::default(),
        resource: Default::default(),
        scaling: Default::default(),
        profiles,
    }
}

/// Orchestrator over `k` slices with `drbs_per_slice` admitted DRBs each.
pub fn loaded_orchestrator(k: usize, scenario: Scenario, drbs_per_slice: u64) -> Orchestrator {
    let mut o = Orchestrator::new(descriptors(k), scenario, OrchestratorConfig::default()).unwrap();
    o.instantiate_all().unwrap();
    let mcs = Mcs::new(4, 0.5).unwrap();
    for i in 0..k {
        for j in 0..drbs_per_slice {
            let drb = Drb {
                drb_id: (i as u64) << 32 | j,
                snssai: slice_id(i, k),
                qos: Qos { throughput_mbps: 0.5, latency_ms: 10.0, reliability: 0.999 },
                mcs,
                signalling: false,
            };
            o.admit_drb(drb).unwrap();
        }
    }
    o
}
