use ranslice_core::descriptor::sample::{slice_id, uniform};
use ranslice_core::orchestrator::{Orchestrator, OrchestratorConfig};
use ranslice_core::resource::calibrate_params;
use ranslice_core::sim::{compare_scenarios, run, BudgetConfig, DemandProfile, McsWeight, SimConfig};
use ranslice_core::{Drb, Mcs, Qos, Scenario, SliceLoad};

fn profile(i: usize, k: usize, rate: f64, persistent: u32, mbps: f64) -> DemandProfile {
    DemandProfile {
        snssai: slice_id(i, k),
        drb_arrival_rate: rate,
        mean_holding: 8.0,
        persistent_drbs: persistent,
        qos: Qos { throughput_mbps: mbps, latency_ms: 10.0, reliability: 0.999 },
        mcs: vec![McsWeight { modulation_order: 4, code_rate: 0.5, prob: 1.0 }],
        seed: i as u64 + 1,
    }
}

fn config(profiles: Vec<DemandProfile>) -> SimConfig {
    SimConfig {
        scenario: Scenario::S1Dedicated,
        ticks: 100,
        total_prbs: 273,
        n_dus_per_gnb: 1,
        seed: 9,
        vnic_delay_cap_ms: 1.0,
        budget: BudgetConfig { per_slice_cap: 0.9 },
        resource: Default::default(),
        scaling: Default::default(),
        profiles,
    }
}

#[test]
fn idle_vm_counts_by_scenario() {
    let ds = uniform(2, true);
    let c = SimConfig {
        n_dus_per_gnb: 3,
        ticks: 5,
        ..config(vec![profile(0, 2, 0.0, 0, 1.0), profile(1, 2, 0.0, 0, 1.0)])
    };
    let runs = compare_scenarios(&ds, &c, &Scenario::ALL).unwrap();
    let counts: Vec<f64> = runs.iter().map(|r| r.summary.avg_vm_count).collect();
    assert_eq!(counts, vec![8.0, 4.0, 7.0, 5.0]);
}

#[test]
fn single_slice_is_the_same_in_every_scenario() {
    let ds = uniform(1, false);
    let c = config(vec![profile(0, 1, 4.0, 0, 6.0)]);
    let runs = compare_scenarios(&ds, &c, &Scenario::ALL).unwrap();
    // Instance and group names differ by scenario; behaviour does not.
    for r in &runs[1..] {
        for (a, b) in r.trace.iter().zip(&runs[0].trace) {
            assert_eq!(a.slices, b.slices);
            assert_eq!((a.vm_count, a.cu_vms, a.du_vms), (b.vm_count, b.cu_vms, b.du_vms));
            assert_eq!(a.vcpus_consumed, b.vcpus_consumed);
            assert_eq!(a.events.len(), b.events.len());
        }
        assert_eq!(r.summary.scaling_events, runs[0].summary.scaling_events);
    }
}

/// eMBB at 65% and uRLLC at 15% of a one-vCPU DU: two DU VMs when
/// dedicated, one when shared.
#[test]
fn shared_du_halves_du_vms_for_complementary_load() {
    let ds = uniform(2, true);
    let probe = Orchestrator::new(ds.clone(), Scenario::S1Dedicated, OrchestratorConfig::default()).unwrap();
    let mcs = Mcs::new(4, 0.5).unwrap();
    let demand = |i: usize, mbps: f64| {
        let drb = Drb {
            drb_id: 0,
            snssai: slice_id(i, 2),
            qos: Qos { throughput_mbps: mbps, latency_ms: 10.0, reliability: 0.999 },
            mcs,
            signalling: false,
        };
        probe.demand_prbs(&drb).unwrap()
    };
    let (embb, urllc) = (demand(0, 40.0), demand(1, 6.0));
    let anchors = [
        (SliceLoad::new(slice_id(0, 2), embb, mcs).unwrap(), 0.65),
        (SliceLoad::new(slice_id(1, 2), urllc, mcs).unwrap(), 0.15),
    ];
    let fit = calibrate_params(&anchors, &Default::default()).unwrap();

    let c = SimConfig {
        total_prbs: 1000,
        resource: fit.params,
        ..config(vec![profile(0, 2, 0.0, 1, 40.0), profile(1, 2, 0.0, 1, 6.0)])
    };
    let runs = compare_scenarios(&ds, &c, &[Scenario::S1Dedicated, Scenario::S2AllShared]).unwrap();
    assert_eq!(runs[0].summary.avg_du_vms, 2.0);
    assert_eq!(runs[1].summary.avg_du_vms, 1.0);
    for r in &runs {
        assert_eq!(r.summary.isolation_violations, 0);
        assert_eq!(r.summary.rejected, 0);
    }
    assert!(runs[1].summary.vcpu_ticks < runs[0].summary.vcpu_ticks);
    assert!(runs[1].summary.consumed_vcpu_ticks <= runs[0].summary.consumed_vcpu_ticks + 1e-9);
    let du_util = runs[1].trace[50].slices[0].du_util;
    assert!((du_util - 0.80).abs() < 1e-9, "{du_util}");
}

#[test]
fn trace_length_matches_ticks() {
    let ds = uniform(3, true);
    let c = SimConfig { ticks: 37, ..config((0..3).map(|i| profile(i, 3, 2.0, 0, 5.0)).collect()) };
    let r = run(&ds, &SimConfig { scenario: Scenario::S4DuShared, ..c }).unwrap();
    assert_eq!(r.trace.len(), 37);
    assert!(r.trace.iter().all(|t| t.slices.len() == 3));
}
