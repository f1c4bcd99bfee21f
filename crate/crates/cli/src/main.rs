use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qewarp_core::document::{Built, SpecDocument};
use qewarp_core::oracle::{run_oracle, OracleConfig};
use qewarp_core::sweep::{run_sweep, write_csv, GridAxes};
use qewarp_core::verifier::{einstein_assembly, verify, verify_integrated, ToleranceProfile, DEFAULT_SAMPLES};
use qewarp_core::Error;

const PROFILE_ENV: &str = "QEWARP_DEFAULT_PROFILE";

#[derive(Parser)]
#[command(name = "qewarp", version, about = "Construct and certify quasi-Einstein warped products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the profiles of a spec and echo its derived constants.
    Generate(GenerateArgs),
    /// Evaluate every residual of a spec; exit 1 unless it passes.
    Verify(VerifyArgs),
    /// Certify a grid of power-law families.
    Sweep(SweepArgs),
    /// Compare the curvature engine with a finite-difference oracle.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Sampling {
    /// Number of evenly spaced samples over the central 80% of the domain.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    spec: PathBuf,
    /// CSV table; the JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON report; text report and mu trace are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
    /// analytic (1e-9) or numeric (1e-6); defaults to the family's precision class.
    #[arg(long)]
    profile: Option<String>,
    /// Ricci constant of a second fiber of dimension r; certifies the Einstein assembly.
    #[arg(long = "fiber2-mu", allow_hyphen_values = true)]
    fiber2_mu: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid axis KEY=v1,v2,... over n, m, k, r or branch; repeatable.
    #[arg(long = "grid", required = true)]
    grid: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Use a constant conformal factor.
    #[arg(long)]
    flat_phi: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure modes mapped onto the exit-code contract.
enum Failure {
    /// Verification ran and failed: exit 1.
    Verdict(String),
    /// Bad input, unreadable file or unwritable output: exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            eprintln!("qewarp: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("qewarp: {msg}");
            ExitCode::from(2)
        }
    }
}

fn check_samples(s: &Sampling) -> Result<usize, Failure> {
    if s.samples < 3 {
        return Err(Failure::Usage(format!("--samples must be at least 3, got {}", s.samples)));
    }
    Ok(s.samples)
}

fn resolve_profile(flag: Option<&str>, family_default: ToleranceProfile) -> Result<ToleranceProfile, Failure> {
    if let Some(p) = flag {
        return Ok(p.parse()?);
    }
    match std::env::var(PROFILE_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .parse()
            .map_err(|e: Error| Failure::Usage(format!("{PROFILE_ENV}: {e}"))),
        _ => Ok(family_default),
    }
}

fn load(path: &Path) -> Result<Built, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read spec {}: {e}", path.display())))?;
    let doc = SpecDocument::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    doc.build().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `out` with its extension replaced by `suffix`, e.g. `report.json` -> `report.mu.csv`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(OsString::from).unwrap_or_default();
    let mut name = stem;
    name.push(suffix);
    out.with_file_name(name)
}

fn generate(args: GenerateArgs) -> Outcome {
    let samples = check_samples(&args.sampling)?;
    let built = load(&args.spec)?;
    let spec = &built.spec;
    let xis = spec.default_samples(samples)?;

    let mut csv = String::from("xi,f,fp,fpp,phi,php,phpp,h,hp,hpp\n");
    for &xi in &xis {
        let (f, p, h) = (spec.f().at(xi)?, spec.phi().at(xi)?, spec.h().at(xi)?);
        csv.push_str(&format!(
            "{xi},{},{},{},{},{},{},{},{},{}\n",
            f.value, f.d1, f.d2, p.value, p.d1, p.d2, h.value, h.d1, h.d2
        ));
    }
    write_atomic(&args.out, csv.as_bytes())?;

    let mut sidecar = json!({
        "family": built.family,
        "n": spec.n(),
        "m": spec.m(),
        "r": spec.r(),
        "r_is_integral": spec.r_exponent().is_integral,
        "rho": spec.rho(),
        "lambda_F": spec.lambda_f(),
        "causal_class": i8::from(spec.class()),
        "constants": built.constants,
        "samples": samples,
    });
    if let Some(run) = &built.run {
        let table = sibling(&args.out, ".ode.csv");
        let mut buf = Vec::new();
        run.write_csv(&mut buf)
            .map_err(|e| Failure::Usage(format!("cannot format table: {e}")))?;
        write_atomic(&table, &buf)?;
        sidecar["integration"] = json!({
            "stop": run.stop,
            "nodes": run.states.len(),
            "step": run.step,
            "table": table.display().to_string(),
        });
    } else if let Some(stop) = built.stop_reason() {
        sidecar["integration"] = json!({ "stop": stop });
    }
    let sidecar_path = sibling(&args.out, ".json");
    let sidecar_path = if sidecar_path == args.out {
        sibling(&args.out, ".sidecar.json")
    } else {
        sidecar_path
    };
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&sidecar_path, text.as_bytes())?;
    println!("{}", text);
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Outcome {
    let samples = check_samples(&args.sampling)?;
    let built = load(&args.spec)?;
    let profile = resolve_profile(args.profile.as_deref(), built.default_profile)?;
    let spec = &built.spec;
    let xis = spec.default_samples(samples)?;
    let report = match &built.run {
        Some(run) => verify_integrated(spec, run, &xis, profile)?,
        None => verify(spec, &xis, profile)?,
    };
    let text = report.to_text();
    print!("{text}");
    if let Some(out) = &args.out {
        write_atomic(out, report.to_json().as_bytes())?;
        write_atomic(&sibling(out, ".txt"), text.as_bytes())?;
        let mut mu = Vec::new();
        report
            .write_mu_csv(&mut mu)
            .map_err(|e| Failure::Usage(format!("cannot format mu trace: {e}")))?;
        write_atomic(&sibling(out, ".mu.csv"), &mu)?;
    }
    if !report.pass() {
        return Err(Failure::Verdict(format!("verification failed: {}", report.violated.join(", "))));
    }
    if let Some(mu) = args.fiber2_mu {
        let exponent = spec.r_exponent();
        if !exponent.is_integral {
            return Err(Failure::Usage(format!(
                "a second fiber needs integral r, got {}",
                exponent.value
            )));
        }
        match einstein_assembly(spec, exponent.value as u32, mu, &xis, profile) {
            Ok(cert) => {
                let text = serde_json::to_string_pretty(&cert).expect("certificate serializes");
                println!("assembly  Einstein with rho = 0 (mu = {:.12e})", cert.certified_mu);
                if let Some(out) = &args.out {
                    write_atomic(&sibling(out, ".certificate.json"), text.as_bytes())?;
                }
            }
            Err(e @ Error::AssemblyRejected { .. }) => return Err(Failure::Verdict(e.to_string())),
            Err(e @ Error::Precondition(_)) => return Err(Failure::Verdict(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Outcome {
    let samples = check_samples(&args.sampling)?;
    let profile = resolve_profile(args.profile.as_deref(), ToleranceProfile::Analytic)?;
    let mut axes = GridAxes::default();
    for g in &args.grid {
        axes.add(g)?;
    }
    let rows = run_sweep(&axes, samples, profile)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    match &args.out {
        Some(out) => write_atomic(out, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    let failed = rows.iter().filter(|r| r.admissible && r.verdict != "pass").count();
    let admissible = rows.iter().filter(|r| r.admissible).count();
    eprintln!(
        "sweep: {} cells, {admissible} admissible, {failed} failed at the {profile} tolerance",
        rows.len()
    );
    if failed > 0 {
        return Err(Failure::Verdict(format!("{failed} admissible cells failed")));
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Outcome {
    if args.count == 0 {
        return Err(Failure::Usage("--count must be positive".into()));
    }
    let report = run_oracle(&OracleConfig {
        seed: args.seed,
        count: args.count,
        flat_phi: args.flat_phi,
    })?;
    let text = report.to_json();
    match &args.out {
        Some(out) => write_atomic(out, text.as_bytes())?,
        None => println!("{text}"),
    }
    eprintln!(
        "oracle: {} specs, seed {}, max deviation {:e} (threshold {:e})",
        report.cases.len(),
        report.seed,
        report.max_deviation,
        report.threshold
    );
    if !report.pass {
        return Err(Failure::Verdict("engine and oracle disagree".into()));
    }
    Ok(())
}
