//! `tiltlab`: sampling, verification and table generation driven by TOML
//! experiment files.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tiltlab::io::{write_results, write_samples, write_summary, SampleHeader};
use tiltlab::sampler::{map_replicas, run_chain, MoveCounts};
use tiltlab::verify::{run_confinement, CheckConfig, ConfinementCell, VerificationReport};
use tiltlab::{Execution, RngPosition};
use tiltlab_airy::AirySpectrum;

use config::{Format, RunConfig, Seeds};

#[derive(Debug, Parser)]
#[command(name = "tiltlab", version, about = "Area-tilted path ensembles above a wall: sampling and checks")]
struct Cli {
    /// Experiment file (TOML), or a `run.json` sidecar written by `sample`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; results go to `<out>/<command>/<config hash>/`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent replicas and chains.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed, replacing the one in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the configured ensemble, one CSV per replica.
    Sample,
    /// Run the configured checks; exit status 0 iff every check passes.
    Verify {
        /// Default-configured checks to append to the list in the config.
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
    },
    /// Tabulate the Dirichlet Airy spectrum.
    AiryTable,
    /// Curved-maximum means over an (n, T) grid.
    ConfinementSweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Verify { .. } => "verify",
            Command::AiryTable => "airy-table",
            Command::ConfinementSweep => "confinement-sweep",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed; commands without checks return true.
fn run(cli: Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let name = cli.command.name();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = Some(Seeds { master: seed });
    }
    if let Command::Verify { checks } = &cli.command {
        for c in checks {
            cfg.checks.push(CheckConfig::by_name(c)?);
        }
    }
    cfg.validate_for(name)?;
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let dir = root.join(name).join(cfg.hash()?);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.toml"), cfg.normalized()?)?;
    let passed = match cli.command {
        Command::Sample => cmd_sample(&cfg, &dir).map(|_| true),
        Command::Verify { .. } => cmd_verify(&cfg, &dir),
        Command::AiryTable => cmd_airy_table(&cfg, &dir).map(|_| true),
        Command::ConfinementSweep => cmd_confinement_sweep(&cfg, &dir),
    }?;
    println!("{}", dir.display());
    Ok(passed)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ReplicaRecord {
    file: String,
    stream_id: u64,
    start: RngPosition,
    samples: usize,
    counts: MoveCounts,
    sha256: String,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    replicas: Vec<ReplicaRecord>,
}

fn cmd_sample(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let Some(spec) = &cfg.spec else {
        bail!("sample needs a [spec] block");
    };
    let Some(block) = &cfg.schedule else {
        bail!("sample needs a [schedule] block");
    };
    let seed = cfg.master_seed()?;
    let schedule = block.schedule();
    let runs = map_replicas(block.replicas as usize, Execution::Parallel, |r| {
        run_chain(spec, &schedule, seed, r as u64)
    });
    let mut replicas = Vec::new();
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        let file = format!("samples_r{r}.csv");
        let mut bytes = Vec::new();
        write_samples(&mut bytes, &SampleHeader::for_spec(spec, seed), &run.samples)?;
        fs::write(dir.join(&file), &bytes)?;
        replicas.push(ReplicaRecord {
            file,
            stream_id: r as u64,
            start: run.start,
            samples: run.samples.len(),
            counts: run.counts,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    write_json(&dir.join("run.json"), &Sidecar { config: cfg, replicas })
}

#[derive(Serialize)]
struct Timing<'a> {
    check: &'a str,
    seconds: f64,
}

#[derive(Serialize)]
struct Aggregate<'a> {
    pass: bool,
    checks: usize,
    failed: Vec<&'a str>,
    reports: &'a [VerificationReport],
}

fn cmd_verify(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let seed = cfg.master_seed()?;
    let mut reports = Vec::new();
    for check in &cfg.checks {
        let report = check.run(seed, Execution::Parallel)?;
        eprintln!(
            "{:<14} {}  ({} failed subchecks, {:.1}s)",
            report.check,
            if report.pass { "PASS" } else { "FAIL" },
            report.statistic,
            report.wall_clock.as_secs_f64()
        );
        reports.push(report);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    let pass = failed.is_empty();
    if cfg.wants(Format::Json) {
        write_json(
            &dir.join("reports.json"),
            &Aggregate {
                pass,
                checks: reports.len(),
                failed: failed.clone(),
                reports: &reports,
            },
        )?;
    }
    if cfg.wants(Format::Csv) {
        let rows: Vec<_> = reports.iter().flat_map(|r| r.result_rows()).collect();
        write_results(create(&dir.join("reports.csv"))?, &rows)?;
        let summaries: Vec<_> = reports.iter().flat_map(|r| r.summaries.iter().cloned()).collect();
        write_summary(create(&dir.join("summary.csv"))?, &summaries)?;
    }
    let timing: Vec<Timing> = reports
        .iter()
        .map(|r| Timing {
            check: &r.check,
            seconds: r.wall_clock.as_secs_f64(),
        })
        .collect();
    write_json(&dir.join("timing.json"), &timing)?;
    Ok(pass)
}

fn cmd_airy_table(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let Some(block) = &cfg.airy else {
        bail!("airy-table needs an [airy] block with a and L");
    };
    let s = AirySpectrum::new(block.a, block.len)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&dir.join("airy_table.csv"))?);
    w.write_record(["ell", "omega", "lambda", "c"])?;
    for l in 0..s.len() {
        w.write_record([
            l.to_string(),
            s.omegas()[l].to_string(),
            s.lambdas()[l].to_string(),
            s.norms()[l].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_confinement_sweep(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let Some(conf) = &cfg.confinement else {
        bail!("confinement-sweep needs a [confinement] block");
    };
    let outcome = run_confinement(conf, cfg.master_seed()?, Execution::Parallel)?;
    let cells: Vec<&ConfinementCell> = outcome.cells.iter().chain(&outcome.control).collect();

    let mut long = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&dir.join("cells.csv"))?);
    for c in &cells {
        long.serialize(c)?;
    }
    if cells.is_empty() {
        long.write_record(["n", "T", "lambda", "mean", "stderr", "count", "tail_slope", "heavy_tail"])?;
    }
    long.flush()?;

    let mut table = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&dir.join("table.csv"))?);
    let mut head = vec!["n".to_string()];
    head.extend(conf.ts.iter().map(|t| format!("T={t}")));
    table.write_record(&head)?;
    for &n in &conf.ns {
        let mut row = vec![n.to_string()];
        for &t in &conf.ts {
            let c = outcome.cells.iter().find(|c| c.n == n && c.t == t).expect("grid cell");
            row.push(c.mean.to_string());
        }
        table.write_record(&row)?;
    }
    table.flush()?;

    let report = outcome.report;
    write_json(&dir.join("report.json"), &report)?;
    write_results(create(&dir.join("results.csv"))?, &report.result_rows())?;
    write_json(
        &dir.join("timing.json"),
        &[Timing {
            check: "confinement",
            seconds: report.wall_clock.as_secs_f64(),
        }],
    )?;
    eprintln!(
        "confinement    {}  ({} failed subchecks)",
        if report.pass { "PASS" } else { "FAIL" },
        report.statistic
    );
    Ok(report.pass)
}
