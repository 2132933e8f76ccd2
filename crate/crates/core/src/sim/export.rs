use std::io;

use super::{SimResult, SimSummary, TickRecord};

pub const TRACE_HEADER: [&str; 10] =
    ["tick", "slice", "prbs", "du_util", "cu_util", "vnic_wait_ms", "admitted", "rejected", "vm_count", "event"];

const SUMMARY_HEADER: [&str; 15] = [
    "scenario",
    "ticks",
    "avg_vm_count",
    "avg_cu_vms",
    "avg_du_vms",
    "max_vm_count",
    "vcpu_ticks",
    "consumed_vcpu_ticks",
    "arrived",
    "admitted",
    "rejected",
    "rejection_rate",
    "mean_vnic_wait_ms",
    "isolation_violations",
    "scaling_events",
];

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per tick and slice. A tick's scaling events, joined with `|`,
/// go on its first row.
pub fn write_trace_csv<W: io::Write>(trace: &[TickRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in trace {
        for (i, s) in t.slices.iter().enumerate() {
            let events = if i == 0 { t.events.join("|") } else { String::new() };
            w.write_record([
                t.tick.to_string(),
                s.snssai.to_string(),
                s.prbs.to_string(),
                fixed(s.du_util),
                fixed(s.cu_util),
                fixed(s.vnic_wait_ms),
                s.admitted.to_string(),
                s.rejected.to_string(),
                t.vm_count.to_string(),
                events,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: io::Write>(summaries: &[SimSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.scenario.to_string(),
            s.ticks.to_string(),
            fixed(s.avg_vm_count),
            fixed(s.avg_cu_vms),
            fixed(s.avg_du_vms),
            s.max_vm_count.to_string(),
            fixed(s.vcpu_ticks),
            fixed(s.consumed_vcpu_ticks),
            s.arrived.to_string(),
            s.admitted.to_string(),
            s.rejected.to_string(),
            fixed(s.rejection_rate),
            fixed(s.mean_vnic_wait_ms),
            s.isolation_violations.to_string(),
            s.scaling_events.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn result_to_json(result: &SimResult) -> String {
    serde_json::to_string_pretty(result).expect("results hold only finite numbers")
}

pub fn summaries_to_json(summaries: &[SimSummary]) -> String {
    serde_json::to_string_pretty(summaries).expect("summaries hold only finite numbers")
}

pub fn result_from_json(text: &str) -> serde_json::Result<SimResult> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn sample() -> SimResult {
        let text = include_str!("../../../../data/two-slice-s4/descriptors.toml");
        let ds = crate::descriptor::parse_descriptor_set(&[crate::descriptor::Document::new("d", text)]).unwrap();
        let config = SimConfig::from_toml(include_str!("../../../../data/sim/two-slice-s4.toml")).unwrap();
        run(&ds, &SimConfig { ticks: 30, ..config }).unwrap()
    }

    #[test]
    fn empty_trace_writes_header_only() {
        let mut buf = Vec::new();
        write_trace_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", TRACE_HEADER.join(",")));
    }

    #[test]
    fn trace_has_a_row_per_tick_and_slice() {
        let r = sample();
        let mut buf = Vec::new();
        write_trace_csv(&r.trace, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 30 * 2);
        assert_eq!(&rows[1][0], "0");
        assert_eq!(&rows[1][1], "uRLLC");
        assert!(rows[0][3].split('.').nth(1).is_some_and(|d| d.len() == 6));
    }

    #[test]
    fn summary_csv_shape() {
        let r = sample();
        let mut buf = Vec::new();
        write_summary_csv(std::slice::from_ref(&r.summary), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("s4,30,"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(result_from_json(&result_to_json(&r)).unwrap(), r);
    }
}
