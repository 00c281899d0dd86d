//! The `sasoca` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 I/O error.

pub mod config;
pub mod meta;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    evaluate_dominant, knockout_hidden, rule_density, s_op, scaling_sweep, DensityMode, TestProtocol,
};
use crate::ca::render::{ascii, write_trajectory_images};
use crate::ca::{gen_ic, run_ic, Configuration, IcScheme, Lattice, Topology, NEIGHBOR_ORDER};
use crate::error::Error;
use crate::evolve::{Checkpoint, CheckpointPolicy, EaConfig, Evolver, Jobs, CHECKPOINT_MANIFEST};
use crate::fsm::{Fsm, KnockoutMask};
use crate::genome::GenomeFile;
use crate::seed::{self, tag};
use config::{format_dims, parse_dims, ExperimentConfig};
use meta::{describe, load_genome, GenomeMeta, LoadedGenome};

pub fn tool_version() -> String {
    format!("sasoca {}", env!("CARGO_PKG_VERSION"))
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::Io { .. } => Failure::Io(e.to_string()),
            Error::Tie { .. } | Error::Parse { .. } | Error::Data(_) => Failure::Data(e.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn usage(e: Error) -> Failure {
    match e {
        Error::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn data(e: Error) -> Failure {
    match e {
        Error::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Data(other.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sasoca",
    version,
    about = "Evolve and analyze FSM update rules for density-classifying cellular automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run evolution replicates.
    Evolve(EvolveArgs),
    /// Continue an interrupted `evolve` output directory from its checkpoints.
    Resume(ResumeArgs),
    /// Accuracy of a genome on seeded ICs.
    Eval(TestArgs),
    /// Rule density: fraction of state assignments whose next output is 1.
    Density(DensityArgs),
    /// Accuracy with hidden variables held at 0.
    Knockout(TestArgs),
    /// Operational self-organization: accuracy with neighbor inputs held at 0.
    Sop(TestArgs),
    /// Accuracy on lattices scaled by each factor.
    Scale(ScaleArgs),
    /// Trajectory images and ASCII for one IC.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct EvolveArgs {
    /// key=value experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Canonical lattice: 1d, 2d or 3d.
    #[arg(long)]
    topology: Option<String>,
    /// Updates (generations) per replicate.
    #[arg(long)]
    updates: Option<String>,
    /// Master seed; replicate r uses seed + r. Generated and printed if absent.
    #[arg(long)]
    seed: Option<String>,
    /// Independent runs, written to rep-000, rep-001, ...
    #[arg(long)]
    replicates: Option<String>,
    /// Updates between checkpoints; 0 disables them.
    #[arg(long)]
    checkpoint_every: Option<String>,
    /// Extra `key=value` override, applied last (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory [default: run-<seed>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Continue replicates from existing checkpoints in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Debug, Args)]
struct ResumeArgs {
    /// Output directory of an earlier `evolve`.
    dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct GenomeArgs {
    /// Genome file (`sasoca-genome v1`).
    genome: PathBuf,
    /// Lattice to run on; defaults to the one recorded next to the genome.
    #[arg(long, conflicts_with = "dims")]
    topology: Option<String>,
    /// Custom extents such as 35, 7x7 or 3x3x5 (needs --radius).
    #[arg(long, requires = "radius")]
    dims: Option<String>,
    /// Neighborhood radius for --dims.
    #[arg(long, requires = "dims")]
    radius: Option<usize>,
    /// Output directory [default: <genome stem>-<command> next to the genome].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Binomial,
    Uniform,
    UniformLow,
    UniformHigh,
}

impl From<Scheme> for IcScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Binomial => IcScheme::Binomial,
            Scheme::Uniform => IcScheme::UniformDensityFull,
            Scheme::UniformLow => IcScheme::UniformDensityLow,
            Scheme::UniformHigh => IcScheme::UniformDensityHigh,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    g: GenomeArgs,
    /// Number of ICs.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Generated and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    /// How IC densities are drawn.
    #[arg(long, value_enum, default_value_t = Scheme::Binomial)]
    ic_scheme: Scheme,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    g: GenomeArgs,
    /// Enumerate every state assignment.
    #[arg(long, conflicts_with = "samples")]
    exact: bool,
    /// Uniformly sample this many assignments [default: 1000000].
    #[arg(long)]
    samples: Option<u64>,
    /// Largest state-variable count --exact accepts.
    #[arg(long, default_value_t = crate::analysis::DEFAULT_EXACT_CAP)]
    exact_cap: usize,
    /// Sampling seed; generated and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[command(flatten)]
    t: TestArgs,
    /// Scale factors: `1..9` (inclusive), `1,3,9` or a single value.
    #[arg(long = "s", default_value = "1..9")]
    s: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mask {
    None,
    Hidden,
    Neighbors,
}

impl From<Mask> for KnockoutMask {
    fn from(m: Mask) -> Self {
        match m {
            Mask::None => KnockoutMask::NONE,
            Mask::Hidden => KnockoutMask::HIDDEN,
            Mask::Neighbors => KnockoutMask::NEIGHBORS,
        }
    }
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[command(flatten)]
    g: GenomeArgs,
    /// Seed for a generated IC (generated and printed if neither this nor --ic is given).
    #[arg(long, conflicts_with = "ic")]
    ic_seed: Option<u64>,
    /// File holding the IC as 0/1 (or ./#) characters in raster order.
    #[arg(long)]
    ic: Option<PathBuf>,
    /// How a generated IC's density is drawn.
    #[arg(long, value_enum, default_value_t = Scheme::Binomial)]
    ic_scheme: Scheme,
    /// Also write trajectory.txt and print it.
    #[arg(long)]
    ascii: bool,
    /// Pixels per cell edge.
    #[arg(long, default_value_t = 4)]
    cell_px: usize,
    /// Hold hidden variables or neighbor inputs at 0 while stepping.
    #[arg(long, value_enum, default_value_t = Mask::None)]
    knockout: Mask,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Resume(a) => cmd_resume(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Density(a) => cmd_density(a),
        Command::Knockout(a) => cmd_knockout(a),
        Command::Sop(a) => cmd_sop(a),
        Command::Scale(a) => cmd_scale(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn write_manifest(dir: &Path, command: &str, entries: &[(&str, String)]) -> CliResult {
    // entries keyed "config" carry their own `key=value` and become `config.key=value`
    let mut s = String::from("# sasoca artifact manifest\n");
    let _ = writeln!(s, "tool={}", tool_version());
    let _ = writeln!(s, "command={command}");
    let _ = writeln!(s, "neighbor_order={NEIGHBOR_ORDER}");
    for (k, v) in entries {
        if *k == "config" {
            let _ = writeln!(s, "config.{v}");
        } else {
            let _ = writeln!(s, "{k}={v}");
        }
    }
    write_file(&dir.join("manifest.txt"), s)
}

fn seed_or_generate(seed: Option<u64>, what: &str) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>() >> 11;
        eprintln!("{what}: {s} (generated)");
        s
    })
}

fn jobs(n: usize) -> CliResult<Jobs> {
    if n == 0 {
        Err(Failure::Usage("--jobs must be at least 1".into()))
    } else {
        Ok(Jobs(n))
    }
}

// ---- evolve / resume ----

fn cmd_evolve(a: EvolveArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p).map_err(usage)?,
        None => ExperimentConfig::default(),
    };
    let mut overrides: Vec<(&str, String)> = Vec::new();
    let flags = [
        ("topology", &a.topology),
        ("updates", &a.updates),
        ("seed", &a.seed),
        ("replicates", &a.replicates),
        ("checkpoint_every", &a.checkpoint_every),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)
                .map_err(|e| Failure::Usage(format!("--{}: {}", key.replace('_', "-"), strip(e))))?;
            overrides.push(("override", format!("{key}={v}")));
        }
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set `{kv}`: expected KEY=VALUE")))?;
        cfg.set(k, v)
            .map_err(|e| Failure::Usage(format!("--set {kv}: {}", strip(e))))?;
        overrides.push(("override", format!("{}={}", k.trim(), v.trim())));
    }
    if cfg.seed.is_none() {
        cfg.seed = Some(seed_or_generate(None, "seed"));
    }
    cfg.validate().map_err(usage)?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("run-{}", cfg.seed.unwrap_or_default())));
    run_experiment(&cfg, &out, &overrides, jobs(a.jobs)?, a.resume)
}

fn cmd_resume(a: ResumeArgs) -> CliResult {
    let path = a.dir.join("experiment.cfg");
    let cfg = ExperimentConfig::from_file(&path).map_err(usage)?;
    if cfg.seed.is_none() {
        return Err(Failure::Data(format!("{}: no seed recorded", path.display())));
    }
    cfg.validate().map_err(usage)?;
    let overrides = read_overrides(&a.dir.join("manifest.txt"));
    let overrides: Vec<(&str, String)> = overrides.into_iter().map(|v| ("override", v)).collect();
    run_experiment(&cfg, &a.dir, &overrides, jobs(a.jobs)?, true)
}

fn read_overrides(manifest: &Path) -> Vec<String> {
    fs::read_to_string(manifest)
        .unwrap_or_default()
        .lines()
        .filter_map(|l| l.strip_prefix("override=").map(str::to_string))
        .collect()
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

fn run_experiment(
    cfg: &ExperimentConfig,
    out: &Path,
    overrides: &[(&str, String)],
    jobs: Jobs,
    resume: bool,
) -> CliResult {
    create_dir(out)?;
    write_file(&out.join("experiment.cfg"), cfg.to_text())?;
    let mut entries: Vec<(&str, String)> = vec![("seed", cfg.seed.unwrap_or_default().to_string())];
    entries.extend(cfg.to_text().lines().map(|l| {
        let (k, v) = l.split_once(" = ").unwrap_or((l, ""));
        ("config", format!("{k}={v}"))
    }));
    entries.extend(overrides.iter().cloned());
    entries.push(("replicate_seeds", "seed + replicate index".into()));
    write_manifest(out, "evolve", &entries)?;

    for r in 0..cfg.replicates {
        let rcfg = cfg.replicate(r).map_err(usage)?;
        let dir = out.join(format!("rep-{r:03}"));
        run_replicate(&rcfg, cfg.checkpoint_every, &dir, r, jobs, resume)?;
    }
    Ok(())
}

fn run_replicate(rcfg: &EaConfig, every: usize, dir: &Path, r: usize, jobs: Jobs, resume: bool) -> CliResult {
    create_dir(dir)?;
    let ck_dir = dir.join("checkpoint");
    let evolver = if resume && ck_dir.join(CHECKPOINT_MANIFEST).exists() {
        let ck = Checkpoint::load(&ck_dir).map_err(data)?;
        if &ck.config != rcfg {
            return Err(Failure::Data(format!(
                "checkpoint {} was written for a different configuration than the one requested",
                ck_dir.display()
            )));
        }
        eprintln!("rep-{r:03}: resuming at update {}", ck.next_update);
        Evolver::resume(ck, jobs)?
    } else {
        Evolver::new(rcfg.clone(), jobs)?
    };
    let evolver = if every > 0 {
        evolver.with_checkpoints(CheckpointPolicy { dir: ck_dir, every })
    } else {
        evolver
    };
    let lattice = evolver.lattice().clone();
    let (log, dominant) = evolver.run()?;
    log.write_csv(&dir.join("runlog.csv"))?;
    let gpath = dir.join("dominant.genome");
    GenomeFile {
        genome: dominant.genome.clone(),
        total_states: lattice.layout().total(),
    }
    .write(&gpath)?;
    let mut m = GenomeMeta::for_lattice(&lattice);
    m.insert("seed", rcfg.seed);
    m.insert("replicate", r);
    m.insert("updates", rcfg.updates);
    m.insert("individual", dominant.id);
    m.insert("raw_fitness", dominant.raw_fitness.unwrap_or(0.0));
    m.insert("effective_fitness", dominant.effective_fitness());
    m.insert("ic_scheme", rcfg.ic_scheme);
    m.write(&GenomeMeta::path_for(&gpath))?;
    write_manifest(
        dir,
        "evolve",
        &[
            ("replicate", r.to_string()),
            ("seed", rcfg.seed.to_string()),
            ("lattice", describe(&lattice)),
            ("updates", rcfg.updates.to_string()),
        ],
    )?;
    println!(
        "rep-{r:03} seed={} updates={} best_raw={} dominant=#{} eff={:.4} genes={}",
        rcfg.seed,
        rcfg.updates,
        log.best_raw_by(usize::MAX),
        dominant.id,
        dominant.effective_fitness(),
        dominant.fsm().gates().len()
    );
    Ok(())
}

// ---- genome-consuming commands ----

fn requested_lattice(g: &GenomeArgs) -> CliResult<Option<Lattice>> {
    if let Some(t) = &g.topology {
        let t: Topology = t.parse().map_err(usage)?;
        return Ok(Some(t.lattice()));
    }
    match (&g.dims, g.radius) {
        (Some(d), Some(r)) => {
            let dims = parse_dims(d).map_err(usage)?;
            Ok(Some(Lattice::new(&dims, r).map_err(usage)?))
        }
        _ => Ok(None),
    }
}

struct Prepared {
    path: PathBuf,
    loaded: LoadedGenome,
    fsm: Fsm,
    out: PathBuf,
}

fn prepare(g: &GenomeArgs, command: &str) -> CliResult<Prepared> {
    let requested = requested_lattice(g)?;
    let loaded = load_genome(&g.genome, requested).map_err(data)?;
    let fsm = Fsm::compile(&loaded.file.genome, loaded.lattice.layout());
    let out = g.out.clone().unwrap_or_else(|| {
        let stem = g
            .genome
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "genome".into());
        g.genome.with_file_name(format!("{stem}-{command}"))
    });
    create_dir(&out)?;
    Ok(Prepared {
        path: g.genome.clone(),
        loaded,
        fsm,
        out,
    })
}

fn genome_entries(p: &Prepared) -> Vec<(&'static str, String)> {
    vec![
        ("genome", p.path.display().to_string()),
        ("codons", p.loaded.file.genome.len().to_string()),
        ("lattice", describe(&p.loaded.lattice)),
        ("dims", format_dims(p.loaded.lattice.dims())),
        ("radius", p.loaded.lattice.radius().to_string()),
        ("gates", p.fsm.gates().len().to_string()),
    ]
}

fn write_report<T: Serialize>(p: &Prepared, name: &str, csv: &str, report: &T) -> CliResult {
    write_file(&p.out.join(format!("{name}.csv")), csv)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Failure::Data(e.to_string()))?;
    write_file(&p.out.join(format!("{name}.json")), json + "\n")
}

fn protocol_entries(t: &TestProtocol) -> Vec<(&'static str, String)> {
    vec![
        ("seed", t.seed.to_string()),
        ("n", t.n.to_string()),
        ("ic_scheme", t.scheme.to_string()),
    ]
}

fn protocol(a: &TestArgs) -> TestProtocol {
    TestProtocol {
        n: a.n,
        scheme: a.ic_scheme.into(),
        seed: seed_or_generate(a.seed, "seed"),
    }
}

fn cmd_eval(a: TestArgs) -> CliResult {
    let p = prepare(&a.g, "eval")?;
    let t = protocol(&a);
    let r = evaluate_dominant(&p.fsm, &p.loaded.lattice, &t, jobs(a.jobs)?)?;
    write_report(&p, "eval", &r.to_csv(), &r)?;
    let mut e = genome_entries(&p);
    e.extend(protocol_entries(&t));
    write_manifest(&p.out, "eval", &e)?;
    println!(
        "accuracy {} ({}/{} {} ICs, seed {}) on {}",
        r.accuracy,
        r.correct,
        t.n,
        t.scheme,
        t.seed,
        describe(&p.loaded.lattice)
    );
    Ok(())
}

fn cmd_density(a: DensityArgs) -> CliResult {
    let p = prepare(&a.g, "density")?;
    let (mode, seed) = if a.exact {
        (DensityMode::Exact { cap: a.exact_cap }, a.seed.unwrap_or(0))
    } else {
        let n = a.samples.unwrap_or(1_000_000);
        (DensityMode::Sampled(n), seed_or_generate(a.seed, "seed"))
    };
    let r = rule_density(&p.fsm, mode, seed)?;
    write_report(&p, "density", &r.to_csv(), &r)?;
    let mut e = genome_entries(&p);
    match mode {
        DensityMode::Exact { cap } => {
            e.push(("mode", "exact".into()));
            e.push(("exact_cap", cap.to_string()));
        }
        DensityMode::Sampled(n) => {
            e.push(("mode", "sampled".into()));
            e.push(("samples", n.to_string()));
            e.push(("seed", seed.to_string()));
        }
    }
    write_manifest(&p.out, "density", &e)?;
    println!(
        "rule density {} ({} of {} states{})",
        r.density,
        r.ones,
        r.states_evaluated,
        if r.std_error > 0.0 {
            format!(", std error {:.2e}", r.std_error)
        } else {
            String::new()
        }
    );
    Ok(())
}

fn cmd_knockout(a: TestArgs) -> CliResult {
    let p = prepare(&a.g, "knockout")?;
    let t = protocol(&a);
    let r = knockout_hidden(&p.fsm, &p.loaded.lattice, &t, jobs(a.jobs)?)?;
    write_report(&p, "knockout", &r.to_csv(), &r)?;
    let mut e = genome_entries(&p);
    e.extend(protocol_entries(&t));
    write_manifest(&p.out, "knockout", &e)?;
    println!(
        "w_normal {} w_knockout {} delta_w {}",
        r.w_normal, r.w_knockout, r.delta_w
    );
    Ok(())
}

fn cmd_sop(a: TestArgs) -> CliResult {
    let p = prepare(&a.g, "sop")?;
    let t = protocol(&a);
    let r = s_op(&p.fsm, &p.loaded.lattice, &t, jobs(a.jobs)?)?;
    write_report(&p, "sop", &r.to_csv(), &r)?;
    let mut e = genome_entries(&p);
    e.extend(protocol_entries(&t));
    write_manifest(&p.out, "sop", &e)?;
    println!("f {} f_nc {} s_op {}", r.f, r.f_nc, r.s_op);
    Ok(())
}

/// `1..9` and `1..=9` are inclusive; also `1,3,9` and `4`.
pub fn parse_scales(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("`{s}` is not a scale list like 1..9 or 1,3,9");
    let scales: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if scales.is_empty() || scales.contains(&0) {
        return Err(format!("`{s}`: scale factors must be at least 1"));
    }
    Ok(scales)
}

fn cmd_scale(a: ScaleArgs) -> CliResult {
    let scales = parse_scales(&a.s).map_err(Failure::Usage)?;
    let p = prepare(&a.t.g, "scale")?;
    let t = protocol(&a.t);
    let r = scaling_sweep(&p.fsm, &p.loaded.lattice, &scales, &t, jobs(a.t.jobs)?)?;
    write_report(&p, "scale", &r.to_csv(), &r)?;
    let mut e = genome_entries(&p);
    e.extend(protocol_entries(&t));
    e.push(("s", a.s.clone()));
    write_manifest(&p.out, "scale", &e)?;
    println!("{:>3} {:>7} {:>9}", "s", "cells", "accuracy");
    for row in &r.rows {
        println!("{:>3} {:>7} {:>9}", row.s, row.cells, row.accuracy);
    }
    Ok(())
}

fn cmd_render(a: RenderArgs) -> CliResult {
    let p = prepare(&a.g, "render")?;
    let lattice = &p.loaded.lattice;
    let mut e = genome_entries(&p);
    let ic = match &a.ic {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
            e.push(("ic_file", path.display().to_string()));
            Configuration::parse(&text, lattice)
                .map_err(|err| Failure::Data(format!("{}: {}", path.display(), strip(err))))?
        }
        None => {
            let s = seed_or_generate(a.ic_seed, "ic seed");
            let scheme: IcScheme = a.ic_scheme.into();
            e.push(("ic_seed", s.to_string()));
            e.push(("ic_scheme", scheme.to_string()));
            gen_ic(lattice, scheme, &mut seed::stream(&[s, tag::RENDER_IC]))
        }
    };
    let mask: KnockoutMask = a.knockout.into();
    e.push(("knockout", format!("{:?}", a.knockout).to_lowercase()));
    e.push(("cell_px", a.cell_px.to_string()));
    let (outcome, traj) = run_ic(&p.fsm, lattice, &ic, mask, true)?;
    let traj = traj.expect("trajectory was requested");
    write_file(&p.out.join("ic.txt"), format!("{ic}\n"))?;
    write_trajectory_images(&p.out, &traj, a.cell_px)?;
    let summary = format!(
        "{} cells, {} steps, density {:.4}, verdict {:?}, correct {}",
        ic.len(),
        traj.len() - 1,
        ic.density(),
        outcome.verdict,
        outcome.correct
    );
    if a.ascii {
        let text = ascii(&traj);
        write_file(&p.out.join("trajectory.txt"), &text)?;
        print!("{text}");
        eprintln!("{summary}");
    } else {
        println!("{summary}");
    }
    write_manifest(&p.out, "render", &e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_lists() {
        assert_eq!(parse_scales("1..9").unwrap(), (1..=9).collect::<Vec<_>>());
        assert_eq!(parse_scales("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_scales("1,3, 9").unwrap(), vec![1, 3, 9]);
        assert_eq!(parse_scales("4").unwrap(), vec![4]);
        assert!(parse_scales("0..2").is_err());
        assert!(parse_scales("x").is_err());
        assert!(parse_scales("5..2").is_err());
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::invalid("x")).code(), 1);
        assert_eq!(Failure::from(Error::Data("x".into())).code(), 2);
        assert_eq!(Failure::from(Error::io("p", std::io::Error::other("x"))).code(), 3);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
