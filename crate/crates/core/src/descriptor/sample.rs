//! Ready-made descriptor sets for examples, tests and benchmarks.

use std::collections::BTreeMap;

use super::{
    AuxIl, AuxiliaryNsd, ConnectivityPoint, DescriptorSet, GnbNsd, InstanceSpec, InstantiationLevel, Pnfd, RanNsst,
    ScaleLevel, ScalingAspect, ServiceType, SliceProfile, Snssai, VmFlavour, Vnfd,
};

const SERVICES: [ServiceType; 3] = [ServiceType::Embb, ServiceType::Urllc, ServiceType::Mmtc];

/// S-NSSAI of slice `i` out of `k`: plain service types while they suffice,
/// numbered subtypes beyond three slices.
pub fn slice_id(i: usize, k: usize) -> Snssai {
    let service = SERVICES[i % SERVICES.len()];
    if k <= SERVICES.len() {
        Snssai::new(service)
    } else {
        Snssai::with_subtype(service, format!("{:02}", i + 1))
    }
}

fn level(id: &str, vnfd: &str, count: u32, flavour: &str) -> ScaleLevel {
    ScaleLevel {
        id: id.into(),
        instances: vec![InstanceSpec { constituent_ref: vnfd.into(), count, flavour_ref: flavour.into() }],
    }
}

fn flavour(id: &str, vcpus: u32) -> VmFlavour {
    VmFlavour { id: id.into(), vcpus, cpu_ghz: 2.4, mem_gb: 2.0 * f64::from(vcpus) }
}

/// `k` slices, each with its own gNB NSD: two CU levels (1 and 2 vCPU),
/// three DU levels (1 to 3 single-vCPU VMs) and all six ILs, on one RU.
/// With `shared_du` all NSDs point at one shared DU VNFD and an auxiliary
/// NSD mirroring the DU levels; otherwise each slice has its own DU VNFD.
pub fn uniform(k: usize, shared_du: bool) -> DescriptorSet {
    let mut ds = DescriptorSet::default();
    for i in 0..k {
        let n = i + 1;
        let snssai = slice_id(i, k);
        let cu = format!("cu-{n}");
        let du = if shared_du { "du-shared".to_string() } else { format!("du-{n}") };
        ds.ran_nsst.push(RanNsst {
            id: format!("nsst-{n}"),
            snssai,
            slice_profile: SliceProfile::default(),
            fcaps: BTreeMap::new(),
            gnb_nsd_ref: format!("gnb-{n}"),
        });
        let mut ils = Vec::new();
        for c in 1..=2 {
            for d in 1..=3 {
                ils.push(InstantiationLevel {
                    id: format!("il-{}", (c - 1) * 3 + d),
                    cu_sl: Some(format!("cu-sl-{c}")),
                    du_sl: Some(format!("du-sl-{d}")),
                });
            }
        }
        ds.gnb_nsd.push(GnbNsd {
            id: format!("gnb-{n}"),
            cu_id: None,
            sa_cu: ScalingAspect {
                id: "sa-cu".into(),
                sls: vec![level("cu-sl-1", &cu, 1, "cu-il-1"), level("cu-sl-2", &cu, 1, "cu-il-2")],
            },
            sa_du: ScalingAspect {
                id: "sa-du".into(),
                sls: (1..=3).map(|d| level(&format!("du-sl-{d}"), &du, d, "du-il-1")).collect(),
            },
            ils,
            cu_vnfd_ref: cu.clone(),
            du_vnfd_ref: du.clone(),
            ru_pnfd_refs: vec!["ru-1".into()],
            aux_nsd_ref: shared_du.then(|| "aux-du".to_string()),
        });
        ds.vnfd.push(Vnfd { id: cu, shared: false, ils: vec![flavour("cu-il-1", 1), flavour("cu-il-2", 2)] });
        if !shared_du {
            ds.vnfd.push(Vnfd { id: du, shared: false, ils: vec![flavour("du-il-1", 1)] });
        }
    }
    if shared_du {
        ds.vnfd.push(Vnfd { id: "du-shared".into(), shared: true, ils: vec![flavour("du-il-1", 1)] });
        ds.aux_nsd.push(AuxiliaryNsd {
            id: "aux-du".into(),
            ils: (1..=3)
                .map(|d| AuxIl { id: format!("du-sl-{d}"), du_count: d, du_il_ref: "du-il-1".into() })
                .collect(),
        });
    }
    ds.pnfd.push(Pnfd { id: "ru-1".into(), cps: vec![ConnectivityPoint { name: "fronthaul-0".into(), gbps: 10.0 }] });
    ds
}
