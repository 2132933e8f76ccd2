use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{DescriptorSet, GnbNsd, ScalingAspect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FindingKind {
    UnresolvedReference,
    DuplicateSnssai,
    InvalidSliceProfile,
    SliceProfileMismatch,
    GnbNsdReused,
    EmptyScalingAspect,
    NoInstantiationLevels,
    ZeroInstanceCount,
    ForeignConstituent,
    DuplicateLevelId,
    IncompleteIl,
    UnknownScaleLevel,
    CuLevelsMismatch,
    CuVnfdNotSpecific,
    MissingAuxiliaryNsd,
    SharedVnfdUnderReferenced,
    SharedDuLevelsDiverge,
    AuxLevelsMismatch,
    InvalidFlavour,
    InvalidPnfd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    /// Id of the descriptor the finding is about.
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.kind, self.subject, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn kinds(&self) -> BTreeSet<FindingKind> {
        self.findings.iter().map(|f| f.kind).collect()
    }

    pub fn has(&self, kind: FindingKind) -> bool {
        self.findings.iter().any(|f| f.kind == kind)
    }
}

struct Checker<'a> {
    ds: &'a DescriptorSet,
    findings: Vec<Finding>,
}

impl Checker<'_> {
    fn push(&mut self, kind: FindingKind, subject: &str, detail: impl Into<String>) {
        self.findings.push(Finding { kind, subject: subject.to_string(), detail: detail.into() });
    }

    fn unresolved(&mut self, subject: &str, field: &str, target: &str) {
        self.push(FindingKind::UnresolvedReference, subject, format!("{field} `{target}` does not resolve"));
    }
}

/// Checks every structural rule of the template hierarchy. Findings are data:
/// an empty report means the set is usable for instantiation.
pub fn validate(ds: &DescriptorSet) -> ValidationReport {
    let mut c = Checker { ds, findings: Vec::new() };
    check_nssts(&mut c);
    for nsd in &ds.gnb_nsd {
        check_nsd(&mut c, nsd);
    }
    check_vnfds(&mut c);
    check_pnfds(&mut c);
    check_aux(&mut c);
    ValidationReport { findings: c.findings }
}

fn check_nssts(c: &mut Checker<'_>) {
    let ds = c.ds;
    let mut snssais = BTreeSet::new();
    let mut nsd_users: BTreeMap<&str, usize> = BTreeMap::new();
    for nsst in &ds.ran_nsst {
        if !snssais.insert(&nsst.snssai) {
            c.push(
                FindingKind::DuplicateSnssai,
                &nsst.id,
                format!("S-NSSAI {} already used by another slice subnet", nsst.snssai),
            );
        }
        let profile = &nsst.slice_profile;
        if profile.numerology_index > 4 {
            c.push(
                FindingKind::InvalidSliceProfile,
                &nsst.id,
                format!("numerology index {} outside 0..=4", profile.numerology_index),
            );
        }
        if !(profile.dl_ul_symbol_ratio.is_finite() && profile.dl_ul_symbol_ratio > 0.0) {
            c.push(
                FindingKind::InvalidSliceProfile,
                &nsst.id,
                format!("DL/UL symbol ratio {} must be finite and positive", profile.dl_ul_symbol_ratio),
            );
        }
        if let Some(s) = &profile.snssai {
            if s != &nsst.snssai {
                c.push(
                    FindingKind::SliceProfileMismatch,
                    &nsst.id,
                    format!("slice profile is for {s}, template is for {}", nsst.snssai),
                );
            }
        }
        if ds.gnb_nsd(&nsst.gnb_nsd_ref).is_none() {
            c.unresolved(&nsst.id, "gnb_nsd_ref", &nsst.gnb_nsd_ref);
        } else {
            *nsd_users.entry(nsst.gnb_nsd_ref.as_str()).or_default() += 1;
        }
    }
    for (nsd, users) in nsd_users {
        if users > 1 {
            c.push(
                FindingKind::GnbNsdReused,
                nsd,
                format!("referenced by {users} RAN NSSTs; each slice subnet needs its own gNB NSD"),
            );
        }
    }
}

fn check_nsd(c: &mut Checker<'_>, nsd: &GnbNsd) {
    let ds = c.ds;
    if ds.vnfd(&nsd.cu_vnfd_ref).is_none() {
        c.unresolved(&nsd.id, "cu_vnfd_ref", &nsd.cu_vnfd_ref);
    }
    if ds.vnfd(&nsd.du_vnfd_ref).is_none() {
        c.unresolved(&nsd.id, "du_vnfd_ref", &nsd.du_vnfd_ref);
    }
    for ru in &nsd.ru_pnfd_refs {
        if ds.pnfd(ru).is_none() {
            c.unresolved(&nsd.id, "ru_pnfd_refs", ru);
        }
    }
    if let Some(aux) = &nsd.aux_nsd_ref {
        if ds.aux_nsd(aux).is_none() {
            c.unresolved(&nsd.id, "aux_nsd_ref", aux);
        }
    }

    check_aspect(c, nsd, &nsd.sa_cu, &nsd.cu_vnfd_ref);
    check_aspect(c, nsd, &nsd.sa_du, &nsd.du_vnfd_ref);
    check_cu_levels(c, nsd);

    if nsd.ils.is_empty() {
        c.push(FindingKind::NoInstantiationLevels, &nsd.id, "gNB NSD declares no ILs");
    }
    let mut il_ids = BTreeSet::new();
    for il in &nsd.ils {
        if !il_ids.insert(il.id.as_str()) {
            c.push(FindingKind::DuplicateLevelId, &nsd.id, format!("IL id `{}` repeated", il.id));
        }
        for (sl, aspect) in [(&il.cu_sl, &nsd.sa_cu), (&il.du_sl, &nsd.sa_du)] {
            match sl {
                None => c.push(
                    FindingKind::IncompleteIl,
                    &nsd.id,
                    format!("IL `{}` selects no SL of aspect `{}`", il.id, aspect.id),
                ),
                Some(sl) if aspect.level(sl).is_none() => c.push(
                    FindingKind::UnknownScaleLevel,
                    &nsd.id,
                    format!("IL `{}` selects `{sl}`, not an SL of aspect `{}`", il.id, aspect.id),
                ),
                Some(_) => {}
            }
        }
    }

    if ds.vnfd(&nsd.du_vnfd_ref).is_some_and(|v| v.shared) && nsd.aux_nsd_ref.is_none() {
        c.push(
            FindingKind::MissingAuxiliaryNsd,
            &nsd.id,
            format!("DU VNFD `{}` is shared but no auxiliary NSD is referenced", nsd.du_vnfd_ref),
        );
    }
}

fn check_aspect(c: &mut Checker<'_>, nsd: &GnbNsd, aspect: &ScalingAspect, vnfd_ref: &str) {
    let ds = c.ds;
    if aspect.sls.is_empty() {
        c.push(FindingKind::EmptyScalingAspect, &nsd.id, format!("scaling aspect `{}` has no scale levels", aspect.id));
    }
    let mut ids = BTreeSet::new();
    for sl in &aspect.sls {
        if !ids.insert(sl.id.as_str()) {
            c.push(
                FindingKind::DuplicateLevelId,
                &nsd.id,
                format!("SL id `{}` repeated in aspect `{}`", sl.id, aspect.id),
            );
        }
        if sl.instances.is_empty() {
            c.push(FindingKind::ZeroInstanceCount, &nsd.id, format!("SL `{}` instantiates nothing", sl.id));
        }
        for member in &sl.instances {
            if member.count == 0 {
                c.push(
                    FindingKind::ZeroInstanceCount,
                    &nsd.id,
                    format!("SL `{}` has zero instances of `{}`", sl.id, member.constituent_ref),
                );
            }
            if member.constituent_ref != vnfd_ref {
                c.push(
                    FindingKind::ForeignConstituent,
                    &nsd.id,
                    format!(
                        "SL `{}` of aspect `{}` sizes `{}` instead of `{vnfd_ref}`",
                        sl.id, aspect.id, member.constituent_ref
                    ),
                );
            } else if let Some(vnfd) = ds.vnfd(vnfd_ref) {
                if vnfd.flavour(&member.flavour_ref).is_none() {
                    c.unresolved(&nsd.id, &format!("SL `{}` flavour_ref", sl.id), &member.flavour_ref);
                }
            }
        }
    }
}

/// The CU aspect defines a single CU instance per level and its levels are
/// exactly the CU VNFD's ILs.
fn check_cu_levels(c: &mut Checker<'_>, nsd: &GnbNsd) {
    let Some(vnfd) = c.ds.vnfd(&nsd.cu_vnfd_ref) else { return };
    let own: Vec<_> = nsd
        .sa_cu
        .sls
        .iter()
        .flat_map(|sl| sl.instances.iter().map(move |member| (sl, member)))
        .filter(|(_, member)| member.constituent_ref == vnfd.id)
        .collect();
    if own.iter().any(|(_, member)| vnfd.flavour(&member.flavour_ref).is_none()) {
        return;
    }
    let mut problems = Vec::new();
    for sl in &nsd.sa_cu.sls {
        let specs: Vec<_> = sl.instances.iter().filter(|s| s.constituent_ref == vnfd.id).collect();
        if specs.len() > 1 || specs.iter().any(|s| s.count > 1) {
            problems.push(format!("SL `{}` defines more than one CU instance", sl.id));
        }
    }
    let used: Vec<&str> = own.iter().map(|(_, member)| member.flavour_ref.as_str()).collect();
    let distinct: BTreeSet<&str> = used.iter().copied().collect();
    if distinct.len() != used.len() {
        problems.push("two SLs map to the same CU IL".to_string());
    }
    let all: BTreeSet<&str> = vnfd.ils.iter().map(|f| f.id.as_str()).collect();
    for missing in all.difference(&distinct) {
        problems.push(format!("CU IL `{missing}` has no SL"));
    }
    if !problems.is_empty() {
        c.push(FindingKind::CuLevelsMismatch, &nsd.id, problems.join("; "));
    }
}

fn check_vnfds(c: &mut Checker<'_>) {
    let ds = c.ds;
    for vnfd in &ds.vnfd {
        if vnfd.ils.is_empty() {
            c.push(FindingKind::InvalidFlavour, &vnfd.id, "VNFD declares no VM flavour");
        }
        let mut ids = BTreeSet::new();
        for f in &vnfd.ils {
            if !ids.insert(f.id.as_str()) {
                c.push(FindingKind::DuplicateLevelId, &vnfd.id, format!("IL id `{}` repeated", f.id));
            }
            if f.vcpus == 0 || !(f.cpu_ghz > 0.0 && f.cpu_ghz.is_finite()) || !(f.mem_gb > 0.0 && f.mem_gb.is_finite())
            {
                c.push(
                    FindingKind::InvalidFlavour,
                    &vnfd.id,
                    format!("flavour `{}` needs >= 1 vCPU and positive frequency and memory", f.id),
                );
            }
        }

        let cu_users = ds.gnb_nsd.iter().filter(|n| n.cu_vnfd_ref == vnfd.id).count();
        if cu_users > 0 && (vnfd.shared || cu_users > 1) {
            c.push(
                FindingKind::CuVnfdNotSpecific,
                &vnfd.id,
                format!("CU VNFD must be slice-specific (shared = {}, referenced by {cu_users} gNB NSDs)", vnfd.shared),
            );
        }

        if !vnfd.shared {
            continue;
        }
        let du_users: Vec<&GnbNsd> = ds.gnb_nsd.iter().filter(|n| n.du_vnfd_ref == vnfd.id).collect();
        if du_users.len() < 2 {
            c.push(
                FindingKind::SharedVnfdUnderReferenced,
                &vnfd.id,
                format!("shared VNFD referenced by {} gNB NSD(s), needs at least 2", du_users.len()),
            );
        }
        let level_sets: BTreeSet<BTreeSet<&str>> =
            du_users.iter().map(|n| n.sa_du.sls.iter().map(|sl| sl.id.as_str()).collect()).collect();
        if level_sets.len() > 1 {
            c.push(
                FindingKind::SharedDuLevelsDiverge,
                &vnfd.id,
                "gNB NSDs sharing this DU declare different DU scale levels",
            );
        }
    }
}

fn check_pnfds(c: &mut Checker<'_>) {
    for pnfd in &c.ds.pnfd {
        if pnfd.cps.is_empty() {
            c.push(FindingKind::InvalidPnfd, &pnfd.id, "PNFD has no connectivity point");
        }
        for cp in &pnfd.cps {
            if !(cp.gbps > 0.0 && cp.gbps.is_finite()) {
                c.push(
                    FindingKind::InvalidPnfd,
                    &pnfd.id,
                    format!("connectivity point `{}` has non-positive capacity", cp.name),
                );
            }
        }
    }
}

/// Auxiliary NSD ILs must coincide one-to-one with the DU SLs of every gNB
/// NSD that references it: same ids, same DU count and same DU flavour.
fn check_aux(c: &mut Checker<'_>) {
    let ds = c.ds;
    for aux in &ds.aux_nsd {
        let mut ids = BTreeSet::new();
        for il in &aux.ils {
            if !ids.insert(il.id.as_str()) {
                c.push(FindingKind::DuplicateLevelId, &aux.id, format!("IL id `{}` repeated", il.id));
            }
            if il.du_count == 0 {
                c.push(FindingKind::ZeroInstanceCount, &aux.id, format!("IL `{}` has zero DUs", il.id));
            }
        }
        for nsd in ds.gnb_nsd.iter().filter(|n| n.aux_nsd_ref.as_deref() == Some(aux.id.as_str())) {
            if let Some(vnfd) = ds.vnfd(&nsd.du_vnfd_ref) {
                for il in &aux.ils {
                    if vnfd.flavour(&il.du_il_ref).is_none() {
                        c.unresolved(&aux.id, &format!("IL `{}` du_il_ref", il.id), &il.du_il_ref);
                    }
                }
            }
            let mut problems = Vec::new();
            if aux.ils.len() != nsd.sa_du.sls.len() {
                problems.push(format!("{} auxiliary ILs vs {} DU SLs", aux.ils.len(), nsd.sa_du.sls.len()));
            }
            for il in &aux.ils {
                match nsd.sa_du.level(&il.id) {
                    None => problems.push(format!("IL `{}` has no DU SL", il.id)),
                    Some(sl) => {
                        let matches = sl.instances.len() == 1
                            && sl.instances[0].count == il.du_count
                            && sl.instances[0].flavour_ref == il.du_il_ref;
                        if !matches {
                            problems.push(format!("IL `{}` sizes the DU differently from SL `{}`", il.id, sl.id));
                        }
                    }
                }
            }
            for sl in &nsd.sa_du.sls {
                if !aux.ils.iter().any(|il| il.id == sl.id) {
                    problems.push(format!("DU SL `{}` has no auxiliary IL", sl.id));
                }
            }
            if !problems.is_empty() {
                c.push(
                    FindingKind::AuxLevelsMismatch,
                    &aux.id,
                    format!("against `{}`: {}", nsd.id, problems.join("; ")),
                );
            }
        }
    }
}
