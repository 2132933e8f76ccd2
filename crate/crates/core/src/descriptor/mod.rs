//! Management templates for a gNB whose components may be shared between
//! RAN slice subnets.
//!
//! The hierarchy is: a [`RanNsst`] per slice subnet references one
//! [`GnbNsd`]; the NSD references a CU [`Vnfd`], a DU [`Vnfd`] (possibly
//! shared by several NSDs), any number of RU [`Pnfd`]s and, when the DU is
//! shared, an [`AuxiliaryNsd`] whose ILs mirror the DU scale levels.

mod parse;
pub mod sample;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use parse::{parse_descriptor_set, serialize_descriptor_set, Document, ParseError};
pub use validate::{validate, Finding, FindingKind, ValidationReport};

/// Slice/service type of an S-NSSAI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ServiceType {
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "uRLLC")]
    Urllc,
    #[serde(rename = "mMTC")]
    Mmtc,
}

impl ServiceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceType::Embb => "eMBB",
            ServiceType::Urllc => "uRLLC",
            ServiceType::Mmtc => "mMTC",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Single Network Slice Selection Assistance Information.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snssai {
    pub service_type: ServiceType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<String>,
}

impl Snssai {
    pub fn new(service_type: ServiceType) -> Self {
        Self { service_type, subtype: None }
    }

    pub fn with_subtype(service_type: ServiceType, subtype: impl Into<String>) -> Self {
        Self { service_type, subtype: Some(subtype.into()) }
    }
}

impl fmt::Display for Snssai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subtype {
            Some(sd) => write!(f, "{}:{}", self.service_type, sd),
            None => write!(f, "{}", self.service_type),
        }
    }
}

impl FromStr for Snssai {
    type Err = String;

    /// Accepts `eMBB`, `uRLLC`, `mMTC`, optionally followed by `:<subtype>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (st, sd) = match s.split_once(':') {
            Some((st, sd)) => (st, Some(sd.to_string())),
            None => (s, None),
        };
        let service_type = match st {
            "eMBB" => ServiceType::Embb,
            "uRLLC" => ServiceType::Urllc,
            "mMTC" => ServiceType::Mmtc,
            other => return Err(format!("unknown service type `{other}`")),
        };
        Ok(Snssai { service_type, subtype: sd })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RlcMode {
    #[serde(rename = "AM")]
    Am,
    #[serde(rename = "UM")]
    Um,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarqTarget {
    SpectralEfficiency,
    Coverage,
    RoundTripTime,
}

/// Per-slice NR protocol-stack configuration. Carried declaratively; nothing
/// in this crate processes packets according to it, except that the
/// numerology scales the per-PRB bit rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snssai: Option<Snssai>,
    pub pdcp_duplication: bool,
    pub pdcp_ciphering: bool,
    pub rlc_mode: RlcMode,
    pub rlc_segmentation: bool,
    pub numerology_index: u8,
    pub harq_target: HarqTarget,
    pub dl_ul_symbol_ratio: f64,
}

impl Default for SliceProfile {
    fn default() -> Self {
        Self {
            snssai: None,
            pdcp_duplication: false,
            pdcp_ciphering: true,
            rlc_mode: RlcMode::Am,
            rlc_segmentation: true,
            numerology_index: 0,
            harq_target: HarqTarget::SpectralEfficiency,
            dl_ul_symbol_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RanNsst {
    pub id: String,
    pub snssai: Snssai,
    #[serde(default)]
    pub slice_profile: SliceProfile,
    /// Opaque FCAPS configuration, round-tripped but not interpreted.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fcaps: BTreeMap<String, String>,
    pub gnb_nsd_ref: String,
}

/// Number of instances of one constituent, each backed by the VM flavour
/// `flavour_ref` of that constituent's VNFD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub constituent_ref: String,
    pub count: u32,
    pub flavour_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleLevel {
    pub id: String,
    pub instances: Vec<InstanceSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingAspect {
    pub id: String,
    pub sls: Vec<ScaleLevel>,
}

impl ScalingAspect {
    pub fn level(&self, id: &str) -> Option<&ScaleLevel> {
        self.sls.iter().find(|sl| sl.id == id)
    }
}

/// One SL per scaling aspect. Either side may be missing in a malformed
/// document; validation reports that as an incomplete IL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstantiationLevel {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cu_sl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub du_sl: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnbNsd {
    pub id: String,
    /// Identifier of the CU constituent, used by DU-side matching tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cu_id: Option<String>,
    pub sa_cu: ScalingAspect,
    pub sa_du: ScalingAspect,
    pub ils: Vec<InstantiationLevel>,
    pub cu_vnfd_ref: String,
    pub du_vnfd_ref: String,
    #[serde(default)]
    pub ru_pnfd_refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_nsd_ref: Option<String>,
}

impl GnbNsd {
    pub fn il(&self, id: &str) -> Option<&InstantiationLevel> {
        self.ils.iter().find(|il| il.id == id)
    }

    /// First declared IL selecting exactly this SL pair.
    pub fn il_for(&self, cu_sl: &str, du_sl: &str) -> Option<&InstantiationLevel> {
        self.ils.iter().find(|il| il.cu_sl.as_deref() == Some(cu_sl) && il.du_sl.as_deref() == Some(du_sl))
    }

    pub fn cu_identifier(&self) -> String {
        self.cu_id.clone().unwrap_or_else(|| format!("cu-{}", self.id))
    }
}

/// VM flavour of a VNFD. Since each CU/DU instance maps to one VM, the VNFD
/// has a single implicit scaling aspect and its SLs are its ILs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmFlavour {
    pub id: String,
    pub vcpus: u32,
    pub cpu_ghz: f64,
    pub mem_gb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vnfd {
    pub id: String,
    #[serde(default)]
    pub shared: bool,
    pub ils: Vec<VmFlavour>,
}

impl Vnfd {
    pub fn flavour(&self, id: &str) -> Option<&VmFlavour> {
        self.ils.iter().find(|f| f.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivityPoint {
    pub name: String,
    pub gbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pnfd {
    pub id: String,
    pub cps: Vec<ConnectivityPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxIl {
    pub id: String,
    pub du_count: u32,
    pub du_il_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxiliaryNsd {
    pub id: String,
    pub ils: Vec<AuxIl>,
}

/// All descriptors of one deployment, in document order. References are kept
/// symbolic; [`validate`] checks that they resolve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorSet {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ran_nsst: Vec<RanNsst>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gnb_nsd: Vec<GnbNsd>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vnfd: Vec<Vnfd>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pnfd: Vec<Pnfd>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aux_nsd: Vec<AuxiliaryNsd>,
}

impl DescriptorSet {
    pub fn is_empty(&self) -> bool {
        self.ran_nsst.is_empty()
            && self.gnb_nsd.is_empty()
            && self.vnfd.is_empty()
            && self.pnfd.is_empty()
            && self.aux_nsd.is_empty()
    }

    pub fn nsst(&self, id: &str) -> Option<&RanNsst> {
        self.ran_nsst.iter().find(|n| n.id == id)
    }

    pub fn nsst_for(&self, snssai: &Snssai) -> Option<&RanNsst> {
        self.ran_nsst.iter().find(|n| &n.snssai == snssai)
    }

    pub fn gnb_nsd(&self, id: &str) -> Option<&GnbNsd> {
        self.gnb_nsd.iter().find(|n| n.id == id)
    }

    pub fn vnfd(&self, id: &str) -> Option<&Vnfd> {
        self.vnfd.iter().find(|v| v.id == id)
    }

    pub fn pnfd(&self, id: &str) -> Option<&Pnfd> {
        self.pnfd.iter().find(|p| p.id == id)
    }

    pub fn aux_nsd(&self, id: &str) -> Option<&AuxiliaryNsd> {
        self.aux_nsd.iter().find(|a| a.id == id)
    }

    /// Slice identifiers in NSST declaration order.
    pub fn slices(&self) -> Vec<Snssai> {
        self.ran_nsst.iter().map(|n| n.snssai.clone()).collect()
    }

    /// Total vCPUs of one logical instance at the given SL: the sum over its
    /// instance specs of `count * vcpus(flavour)`. Unresolvable flavours
    /// count as zero.
    pub fn level_vcpus(&self, level: &ScaleLevel) -> u32 {
        level
            .instances
            .iter()
            .map(|member| {
                let vcpus = self
                    .vnfd(&member.constituent_ref)
                    .and_then(|v| v.flavour(&member.flavour_ref))
                    .map_or(0, |f| f.vcpus);
                member.count * vcpus
            })
            .sum()
    }
}

/// SL/IL readout for one NSD: `(il_id, cu_sl, du_sl)` in declaration order.
/// Incomplete ILs are skipped; a validated NSD has none.
pub fn enumerate_ils(nsd: &GnbNsd) -> Vec<(String, String, String)> {
    nsd.ils
        .iter()
        .filter_map(|il| match (&il.cu_sl, &il.du_sl) {
            (Some(cu), Some(du)) => Some((il.id.clone(), cu.clone(), du.clone())),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nsd_with_ils(ils: &[(&str, &str, &str)]) -> GnbNsd {
        let sl = |id: &str| ScaleLevel { id: id.into(), instances: vec![] };
        GnbNsd {
            id: "gnb".into(),
            cu_id: None,
            sa_cu: ScalingAspect { id: "sa-1".into(), sls: vec![sl("SL1"), sl("SL2")] },
            sa_du: ScalingAspect { id: "sa-2".into(), sls: vec![sl("SL1"), sl("SL2")] },
            ils: ils
                .iter()
                .map(|(id, cu, du)| InstantiationLevel {
                    id: id.to_string(),
                    cu_sl: Some(cu.to_string()),
                    du_sl: Some(du.to_string()),
                })
                .collect(),
            cu_vnfd_ref: "cu".into(),
            du_vnfd_ref: "du".into(),
            ru_pnfd_refs: vec![],
            aux_nsd_ref: None,
        }
    }

    #[test]
    fn enumerate_three_of_four_pairs() {
        let nsd = nsd_with_ils(&[("IL1", "SL1", "SL1"), ("IL2", "SL1", "SL2"), ("IL3", "SL2", "SL2")]);
        // Hand-written table of the declared ILs above.
        let expected = vec![
            ("IL1".to_string(), "SL1".to_string(), "SL1".to_string()),
            ("IL2".to_string(), "SL1".to_string(), "SL2".to_string()),
            ("IL3".to_string(), "SL2".to_string(), "SL2".to_string()),
        ];
        assert_eq!(enumerate_ils(&nsd), expected);
    }

    #[test]
    fn enumerate_singleton() {
        let nsd = nsd_with_ils(&[("IL1", "SL1", "SL1")]);
        assert_eq!(enumerate_ils(&nsd), vec![("IL1".into(), "SL1".into(), "SL1".into())]);
    }

    #[test]
    fn il2_combines_cu_sl1_and_du_sl2() {
        let nsd = nsd_with_ils(&[("IL1", "SL1", "SL1"), ("IL2", "SL1", "SL2")]);
        let ils = enumerate_ils(&nsd);
        assert_eq!(ils[1], ("IL2".into(), "SL1".into(), "SL2".into()));
        assert_eq!(nsd.il_for("SL1", "SL2").unwrap().id, "IL2");
    }

    #[test]
    fn snssai_text_form() {
        let s: Snssai = "uRLLC:0a".parse().unwrap();
        assert_eq!(s, Snssai::with_subtype(ServiceType::Urllc, "0a"));
        assert_eq!(s.to_string(), "uRLLC:0a");
        assert_eq!("eMBB".parse::<Snssai>().unwrap().to_string(), "eMBB");
        assert!("xMBB".parse::<Snssai>().is_err());
    }
}
