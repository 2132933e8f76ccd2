use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ranslice_core::descriptor::{parse_descriptor_set, validate, Document};
use ranslice_core::resource::calibrate_params;
use ranslice_core::sim::{self, SimConfig};
use ranslice_core::{DescriptorSet, Mcs, ResourceModelParams, Scenario, ServiceType, SliceLoad, Snssai};

/// Lifecycle and admission simulator for RAN slices over shared gNB components.
#[derive(Parser)]
#[command(name = "ranslice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Inputs shared by `simulate` and `compare`.
#[derive(Args)]
struct RunArgs {
    /// Descriptor file, or directory of `*.toml` descriptor files.
    #[arg(long)]
    descriptors: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `ticks` of the config.
    #[arg(long)]
    ticks: Option<u64>,
    /// Overrides `seed` of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and export its per-tick trace (CSV) or full result (JSON).
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Overrides the scenario of the config.
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Also write the one-row summary CSV here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the same demand under several scenarios and export one summary per scenario.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "s1,s2,s3,s4")]
        scenarios: Vec<Scenario>,
    },
    /// Check a descriptor set; exits 1 on any finding.
    Validate {
        #[arg(long)]
        descriptors: PathBuf,
    },
    /// Fit c0 and k to measured DU consumptions and print a `[resource]` section.
    Calibrate {
        #[arg(long)]
        anchors: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorFile {
    #[serde(default)]
    beta: Option<f64>,
    anchor: Vec<Anchor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Anchor {
    prbs: u32,
    modulation_order: u8,
    code_rate: f64,
    /// Measured vCPU.
    observed: f64,
}

#[derive(Serialize)]
struct ResourceSection {
    resource: ResourceModelParams,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate { run, scenario, summary } => {
            let (ds, mut config) = load_run(&run)?;
            if let Some(s) = scenario {
                config.scenario = s;
            }
            let result = sim::run(&ds, &config)?;
            emit(run.out.as_deref(), |mut w| match run.format {
                Format::Csv => Ok(sim::write_trace_csv(&result.trace, w)?),
                Format::Json => Ok(w.write_all(sim::result_to_json(&result).as_bytes())?),
            })?;
            if let Some(path) = summary {
                emit(Some(&path), |w| Ok(sim::write_summary_csv(std::slice::from_ref(&result.summary), w)?))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { run, scenarios } => {
            if scenarios.is_empty() {
                bail!("--scenarios needs at least one scenario");
            }
            let (ds, config) = load_run(&run)?;
            let summaries: Vec<_> =
                sim::compare_scenarios(&ds, &config, &scenarios)?.into_iter().map(|r| r.summary).collect();
            emit(run.out.as_deref(), |mut w| match run.format {
                Format::Csv => Ok(sim::write_summary_csv(&summaries, w)?),
                Format::Json => Ok(w.write_all(sim::summaries_to_json(&summaries).as_bytes())?),
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { descriptors } => {
            let documents = read_documents(&descriptors)?;
            let ds = match parse_descriptor_set(&documents) {
                Ok(ds) => ds,
                Err(e) => {
                    println!("error: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            let report = validate(&ds);
            for finding in &report.findings {
                println!("{finding}");
            }
            if report.is_clean() {
                println!(
                    "ok: {} NSST(s), {} gNB NSD(s), {} VNFD(s)",
                    ds.ran_nsst.len(),
                    ds.gnb_nsd.len(),
                    ds.vnfd.len()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Calibrate { anchors } => {
            let text = fs::read_to_string(&anchors).with_context(|| format!("reading {}", anchors.display()))?;
            let file: AnchorFile = toml::from_str(&text).with_context(|| format!("parsing {}", anchors.display()))?;
            let mut template = ResourceModelParams::default();
            if let Some(beta) = file.beta {
                template.beta = beta;
            }
            let points = file
                .anchor
                .iter()
                .map(|a| {
                    let mcs = Mcs::new(a.modulation_order, a.code_rate)?;
                    Ok((SliceLoad::new(Snssai::new(ServiceType::Embb), a.prbs, mcs)?, a.observed))
                })
                .collect::<Result<Vec<_>>>()?;
            let fit = calibrate_params(&points, &template)?;
            for (a, r) in file.anchor.iter().zip(&fit.residuals) {
                eprintln!("anchor prbs={} observed={} residual={r:.3e}", a.prbs, a.observed);
            }
            print!("{}", toml::to_string(&ResourceSection { resource: fit.params })?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_run(run: &RunArgs) -> Result<(DescriptorSet, SimConfig)> {
    let ds = load_descriptors(&run.descriptors)?;
    let mut config = load_config(&run.config)?;
    if let Some(ticks) = run.ticks {
        config.ticks = ticks;
    }
    if let Some(seed) = run.seed {
        config.seed = seed;
    }
    Ok((ds, config))
}

fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SimConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))
}

fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path).with_context(|| format!("listing {}", path.display()))? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "toml") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Document::new(p.display().to_string(), text))
        })
        .collect()
}

fn load_descriptors(path: &Path) -> Result<DescriptorSet> {
    let ds = parse_descriptor_set(&read_documents(path)?)?;
    let report = validate(&ds);
    if let Some(first) = report.findings.first() {
        bail!("descriptor set has {} finding(s), first: {first}", report.findings.len());
    }
    Ok(ds)
}

fn emit(path: Option<&Path>, write: impl FnOnce(Box<dyn Write>) -> Result<()>) -> Result<()> {
    match path {
        None => write(Box::new(io::stdout().lock())),
        Some(p) if p == Path::new("-") => write(Box::new(io::stdout().lock())),
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write(Box::new(io::BufWriter::new(file)))
        }
    }
}
