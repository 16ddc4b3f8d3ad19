use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fragfold::energy::EnergyTables;
use fragfold::fragdb::{
    build_from_chains, load_corpus, load_database, parse_sequence, save_database, AminoAcid,
    DbFormat, FragmentDatabase,
};
use fragfold::geometry::rmsd;
use fragfold::io::{
    emit_structure, parse_structure, read_emitted, EmitOptions, Fetcher, Settings, SsAnnotation,
};
use fragfold::model::{build_model, Conformation};
use fragfold::search::{enumerate, lns_runs, run_seed, SearchMode, SearchStatus};
use fragfold::validate::{check_emitted, ValidationParams};
use fragfold::Error;

const EXIT_NO_SOLUTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fragfold",
    version,
    about = "Protein structure prediction by fragment assembly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a fragment database from a manifest of structure files or PDB ids.
    BuildDb(BuildDbArgs),
    /// Assemble conformations for a sequence.
    Predict(PredictArgs),
    /// Check a predicted structure file against a database.
    Validate(ValidateArgs),
    /// Print a database's build report.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BuildDbArgs {
    /// Manifest: one structure path (relative to the manifest) or PDB id per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Overlap RMSD threshold for clustering and next links, Å.
    #[arg(long)]
    rmsd_thr: Option<f64>,
    /// Size of the fallback template list.
    #[arg(long)]
    fallback_k: Option<usize>,
    /// Output database; `.bin` selects the binary format.
    #[arg(long)]
    out: PathBuf,
    /// `text` or `binary`; overrides the extension.
    #[arg(long)]
    format: Option<String>,
    /// Directory for downloaded structures.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    db: PathBuf,
    /// One-letter amino-acid sequence.
    #[arg(long, conflicts_with = "id", required_unless_present = "id")]
    seq: Option<String>,
    /// PDB id whose first chain supplies the sequence (and, without --ss,
    /// the HELIX/SHEET annotations).
    #[arg(long)]
    id: Option<String>,
    /// Secondary-structure file: `helix <start> <end>` / `strand <start> <end>`.
    #[arg(long)]
    ss: Option<PathBuf>,
    /// `enumerate` or `lns`.
    #[arg(long)]
    mode: Option<String>,
    /// Solutions to enumerate (0 = all).
    #[arg(long)]
    n: Option<usize>,
    /// Total time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    inner_timeout: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop LNS after this many moves.
    #[arg(long)]
    iters: Option<u64>,
    /// Independent LNS runs in parallel.
    #[arg(long)]
    runs: Option<usize>,
    /// Cα diameter bound in Å (default 5.68·n^0.38).
    #[arg(long)]
    diameter: Option<f64>,
    /// Output structure file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write each solution to its own file `<out stem>_<k>.pdb`.
    #[arg(long, requires = "out")]
    split: bool,
    /// Run log destination (LNS).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Energy tables; default `<db>.energy`.
    #[arg(long)]
    energy: Option<PathBuf>,
    /// Leave out timestamps and elapsed times so outputs are byte-identical.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ValidateArgs {
    /// Structure file written by `predict`.
    pdb: PathBuf,
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    energy: Option<PathBuf>,
    #[arg(long)]
    diameter: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    db: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::UnknownResidue(_) => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        msg: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildDb(a) => build_db(a),
        Command::Predict(a) => predict(a),
        Command::Validate(a) => validate(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn settings(common: &Common) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(p) = &common.config {
        s.apply_file(p).map_err(|e| match e {
            Error::Io { .. } => Failure::from(e),
            e => Failure {
                code: EXIT_USAGE,
                msg: e.to_string(),
            },
        })?;
    }
    s.apply_env(std::env::vars())?;
    Ok(s)
}

fn fetcher(s: &Settings, cache_dir: Option<PathBuf>) -> Fetcher {
    Fetcher::new(&s.endpoint, cache_dir.or_else(|| s.cache_dir.clone()))
}

fn energy_path(db: &Path) -> PathBuf {
    let mut p = db.as_os_str().to_owned();
    p.push(".energy");
    PathBuf::from(p)
}

fn load_tables(
    db_path: &Path,
    db: &FragmentDatabase,
    explicit: Option<&Path>,
) -> Result<EnergyTables, Failure> {
    if let Some(p) = explicit {
        return Ok(EnergyTables::load(p)?);
    }
    let side = energy_path(db_path);
    if side.is_file() {
        return Ok(EnergyTables::load(&side)?);
    }
    eprintln!(
        "warning: no energy tables at {}; using neutral tables",
        side.display()
    );
    Ok(EnergyTables::neutral(db.geometry(), 10.0))
}

fn build_db(a: BuildDbArgs) -> CliResult {
    let mut s = settings(&a.common)?;
    if let Some(v) = a.rmsd_thr {
        s.build.rmsd_thr = v;
    }
    if let Some(v) = a.fallback_k {
        s.build.fallback_k = v;
    }
    let format = match a.format.as_deref() {
        None => DbFormat::from_path(&a.out),
        Some("text") => DbFormat::Text,
        Some("binary") => DbFormat::Binary,
        Some(f) => {
            return Err(Failure {
                code: EXIT_USAGE,
                msg: format!("unknown format '{f}'"),
            })
        }
    };
    let fetch = fetcher(&s, a.cache_dir);
    let fetch_text = |id: &str| -> fragfold::Result<String> {
        let bytes = fetch.fetch(id)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    };
    let corpus = load_corpus(&a.corpus, Some(&fetch_text))?;
    let db = build_from_chains(
        &corpus.chains,
        corpus.entries.clone(),
        &s.build,
        corpus.report,
    )?;
    let tables = EnergyTables::derive(
        &corpus.chains,
        db.geometry(),
        s.build.break_tolerance,
        s.build.mass_weighted,
        &s.pmf,
    );
    save_database(&db, &a.out, format)?;
    tables.save(&energy_path(&a.out))?;
    print!("{}", db.report().to_text());
    Ok(0)
}

fn read_ss(path: &Path) -> Result<SsAnnotation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(SsAnnotation::parse(&text, &path.display().to_string())?)
}

/// Sequence, annotation and (for --id) the native Cα trace.
type Query = (
    Vec<AminoAcid>,
    SsAnnotation,
    Option<Vec<fragfold::geometry::Vec3>>,
);

fn query(a: &PredictArgs, s: &Settings) -> Result<Query, Failure> {
    let ss_file = a.ss.as_deref().map(read_ss).transpose()?;
    if let Some(seq) = &a.seq {
        return Ok((parse_sequence(seq)?, ss_file.unwrap_or_default(), None));
    }
    let id = a.id.as_deref().expect("clap requires --seq or --id");
    let bytes = fetcher(s, a.cache_dir.clone()).fetch(id)?;
    let structure = parse_structure(&String::from_utf8_lossy(&bytes), id)?;
    let chain = &structure.chains[0];
    let ss = ss_file.unwrap_or_else(|| structure.ss_for_chain(chain));
    Ok((chain.sequence(), ss, Some(chain.ca_trace())))
}

fn predict(a: PredictArgs) -> CliResult {
    let mut s = settings(&a.common)?;
    let cfg = &mut s.search;
    if let Some(m) = &a.mode {
        cfg.mode = SearchMode::parse(m)?;
    }
    if let Some(v) = a.n {
        cfg.n_solutions = v;
    }
    if let Some(v) = a.timeout {
        cfg.total_timeout = v;
    }
    if let Some(v) = a.inner_timeout {
        cfg.inner_timeout = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.iters {
        cfg.max_iterations = Some(v);
    }
    if let Some(v) = a.runs {
        s.runs = v;
    }
    if let Some(v) = a.diameter {
        s.model.diameter = Some(v);
    }
    s.search.validate()?;

    let db = load_database(&a.db)?;
    let tables = load_tables(&a.db, &db, a.energy.as_deref())?;
    let (seq, ss, native) = query(&a, &s)?;
    let model = build_model(&seq, &ss, &db, &tables, s.model.clone())?;

    let (solutions, status) =
        match s.search.mode {
            SearchMode::Enumerate => {
                let res = enumerate(&model, &s.search)?;
                eprintln!(
                    "enumerate: {} solution(s), {}; nodes {} failures {} backtracks {}",
                    res.solutions.len(),
                    res.status.message(),
                    res.stats.nodes,
                    res.stats.failures,
                    res.stats.backtracks
                );
                (res.solutions, res.status)
            }
            SearchMode::Lns => {
                let (runs, best) = lns_runs(&model, &s.search, s.runs)?;
                if let Some(path) = &a.log {
                    let mut text = String::new();
                    for (k, r) in runs.iter().enumerate() {
                        text.push_str(&format!(
                            "# run {} seed {}\n",
                            k + 1,
                            run_seed(s.search.seed, k)
                        ));
                        text.push_str(&r.log.to_text(!a.deterministic));
                    }
                    std::fs::write(path, text).map_err(|e| io_failure(path, e))?;
                }
                for (k, r) in runs.iter().enumerate() {
                    eprintln!(
                    "lns run {}: {}; best {}; iterations {} accepted {} worsening {} rejected {}",
                    k + 1,
                    r.status.message(),
                    r.best.as_ref().map_or("-".to_string(), |b| b.energy.total.to_string()),
                    r.stats.iterations,
                    r.stats.accepted,
                    r.stats.worsening,
                    r.stats.rejected
                );
                }
                match best {
                    Some(k) => {
                        let r = &runs[k];
                        (
                            vec![r.best.clone().expect("best run has a solution")],
                            r.status,
                        )
                    }
                    None => (Vec::new(), runs[0].status),
                }
            }
        };
    if solutions.is_empty() {
        eprintln!("no solution: {}", status.message());
        return Ok(EXIT_NO_SOLUTION);
    }
    if let Some(native) = &native {
        if native.len() == seq.len() {
            if let Ok(d) = rmsd(&solutions[0].ca_angstrom(), native) {
                eprintln!("Ca rmsd to native: {d:.3}");
            }
        }
    }
    write_solutions(&a, &solutions, &db)?;
    if status == SearchStatus::Timeout {
        eprintln!("note: stopped by the time limit");
    }
    Ok(0)
}

fn write_solutions(
    a: &PredictArgs,
    solutions: &[Conformation],
    db: &FragmentDatabase,
) -> Result<(), Failure> {
    let opts = EmitOptions {
        title: Some("fragfold prediction".into()),
        timestamp: (!a.deterministic).then(timestamp),
    };
    match &a.out {
        None => {
            let text = emit_structure(solutions, db, &opts)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| io_failure(Path::new("stdout"), e))?;
        }
        Some(out) if a.split => {
            let stem = out.with_extension("");
            for (k, sol) in solutions.iter().enumerate() {
                let path = PathBuf::from(format!("{}_{}.pdb", stem.display(), k + 1));
                let text = emit_structure(std::slice::from_ref(sol), db, &opts)?;
                std::fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
            }
        }
        Some(out) => {
            let text = emit_structure(solutions, db, &opts)?;
            std::fs::write(out, text).map_err(|e| io_failure(out, e))?;
        }
    }
    Ok(())
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("unix {secs}")
}

fn validate(a: ValidateArgs) -> CliResult {
    let s = settings(&a.common)?;
    let db = load_database(&a.db)?;
    let tables = load_tables(&a.db, &db, a.energy.as_deref())?;
    let text = std::fs::read_to_string(&a.pdb).map_err(|e| io_failure(&a.pdb, e))?;
    let models = read_emitted(&text)?;
    let mut params = ValidationParams::from_model(&s.model);
    if let Some(d) = a.diameter {
        params.diameter = Some(d);
    }
    let mut bad = 0;
    for (k, m) in models.iter().enumerate() {
        let report = check_emitted(&db, &tables, m, &params)?;
        if report.is_valid() {
            println!("model {}: ok (energy {})", k + 1, m.energy.total);
        } else {
            bad += 1;
            println!("model {}: {} issue(s)", k + 1, report.issues.len());
            for i in &report.issues {
                println!("  {i}");
            }
        }
    }
    Ok(if bad == 0 { 0 } else { EXIT_NO_SOLUTION })
}

fn stats(a: StatsArgs) -> CliResult {
    let db = load_database(&a.db)?;
    print!("{}", db.report().to_text());
    println!("{:<26}{}", "manifest entries", db.contents().manifest.len());
    println!("{:<26}{}", "rmsd threshold", db.params().rmsd_thr);
    println!("{:<26}{}", "fallback templates", db.fallback().len());
    Ok(0)
}
