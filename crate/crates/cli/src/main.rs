//! Batch command-line surface for the fermipack toolkit.
//!
//! Exit codes: 0 success, 1 domain failure (search exhausted, invalid code,
//! failed self-test), 2 usage or parse error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fermipack::code::{
    build_lookup, qubit_bounds, qubit_cap, rle_with_aux_stats, search_minimal_qubits_aux,
    table_search, SubspaceCode,
};
use fermipack::combinatorics::binomial_usize;
use fermipack::fed::EncodedHamiltonian;
use fermipack::fermion::FermionHamiltonian;
use fermipack::selftest::{run_selftest, SelftestConfig};
use fermipack::sim::Shots;
use fermipack::vqe::{run_vqe, VqeConfig, VqeResult};
use fermipack::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fermipack",
    version,
    about = "Compress particle-conserving fermionic problems onto fewer qubits, simulate them, and decode the measurements back"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit one machine-readable JSON object on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Cap the worker-thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print only the essential result lines.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a particle-conserving encoder and write its JSON artifact.
    Encode(EncodeArgs),
    /// Print the qubit bounds for a (modes, electrons) problem.
    Bounds(BoundsArgs),
    /// Budgeted search for the largest encodable mode count at fixed (N, Q).
    Table(TableArgs),
    /// Decompose a Hamiltonian and report its measurement groups.
    Groups(GroupsArgs),
    /// Run the variational ground-state solver.
    Vqe(VqeArgs),
    /// Exact diagonalization energy of a Hamiltonian file.
    Fci(FciArgs),
    /// Randomized decode-versus-oracle self-test.
    Selftest(SelftestArgs),
    /// Lookup-decoder round-trip over the full state set of a code artifact.
    DecodeCheck(DecodeCheckArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long)]
    electrons: usize,
    /// Fixed qubit count; omitted means search for the minimum.
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Auxiliary qubits added on top of the base count.
    #[arg(long, default_value_t = 0)]
    aux: usize,
    #[arg(long, default_value_t = 20_000)]
    max_attempts: u64,
    /// Output path for the code artifact.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long)]
    electrons: usize,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    electrons: usize,
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    max_modes: usize,
    #[arg(long, default_value_t = 30)]
    budget_seconds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GroupsArgs {
    /// Hamiltonian file in the native text format.
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Code artifact; the identity encoder when omitted.
    #[arg(long)]
    code: Option<PathBuf>,
}

#[derive(Args)]
struct VqeArgs {
    #[arg(long)]
    hamiltonian: PathBuf,
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// "exact" or a shot count.
    #[arg(long, default_value = "exact")]
    shots: String,
    #[arg(long, default_value_t = 30)]
    restarts: usize,
    /// Write the full result as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FciArgs {
    #[arg(long)]
    hamiltonian: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long)]
    electrons: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deliberately corrupt one decoded sign per trial (harness check).
    #[arg(long, hide = true)]
    inject_sign_fault: bool,
}

#[derive(Args)]
struct DecodeCheckArgs {
    #[arg(long)]
    code: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let printer = Printer {
        json: cli.json,
        quiet: cli.quiet,
    };
    match run(cli.command, &printer) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

struct Printer {
    json: bool,
    quiet: bool,
}

impl Printer {
    fn info(&self, line: impl AsRef<str>) {
        if !self.json && !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn result(&self, line: impl AsRef<str>) {
        if !self.json {
            println!("{}", line.as_ref());
        }
    }

    fn json_out(&self, value: &impl Serialize) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        }
    }
}

fn run(command: Command, printer: &Printer) -> Result<ExitCode> {
    match command {
        Command::Encode(args) => cmd_encode(args, printer),
        Command::Bounds(args) => cmd_bounds(args, printer),
        Command::Table(args) => cmd_table(args, printer),
        Command::Groups(args) => cmd_groups(args, printer),
        Command::Vqe(args) => cmd_vqe(args, printer),
        Command::Fci(args) => cmd_fci(args, printer),
        Command::Selftest(args) => cmd_selftest(args, printer),
        Command::DecodeCheck(args) => cmd_decode_check(args, printer),
    }
}

#[derive(Serialize)]
struct EncodeReport {
    found: bool,
    modes: usize,
    electrons: usize,
    qubits: Option<usize>,
    aux_qubits: usize,
    seed: u64,
    qubit_cap: usize,
    attempts_used: u64,
    out: Option<String>,
}

fn cmd_encode(args: EncodeArgs, printer: &Printer) -> Result<ExitCode> {
    let cap = {
        // Validates modes > 2 * electrons up front.
        qubit_bounds(args.modes, args.electrons)?;
        qubit_cap(args.modes, args.electrons)
    };
    let (code, attempts_used) = match args.qubits {
        Some(base) => {
            let stats = rle_with_aux_stats(
                args.modes,
                args.electrons,
                base,
                args.aux,
                args.seed,
                args.max_attempts,
            )?;
            (stats.code, stats.attempts_used)
        }
        None => {
            let search = search_minimal_qubits_aux(
                args.modes,
                args.electrons,
                args.aux,
                args.seed,
                args.max_attempts,
            )?;
            (search.code, search.attempts_used)
        }
    };

    let mut report = EncodeReport {
        found: code.is_some(),
        modes: args.modes,
        electrons: args.electrons,
        qubits: code.as_ref().map(SubspaceCode::qubits),
        aux_qubits: args.aux,
        seed: args.seed,
        qubit_cap: cap,
        attempts_used,
        out: None,
    };

    let Some(code) = code else {
        printer.json_out(&report);
        printer.result(format!(
            "no code found for modes={} electrons={} within {} attempts",
            args.modes, args.electrons, args.max_attempts
        ));
        return Ok(ExitCode::from(1));
    };

    std::fs::write(&args.out, code.to_artifact_json())?;
    report.out = Some(args.out.display().to_string());
    printer.json_out(&report);
    printer.result(format!(
        "qubits {}  cap {}  attempts {}  -> {}",
        code.qubits(),
        cap,
        attempts_used,
        args.out.display()
    ));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BoundsReport {
    modes: usize,
    electrons: usize,
    gv_qubits: usize,
    impossibility_qubits: usize,
    qubit_cap: usize,
}

fn cmd_bounds(args: BoundsArgs, printer: &Printer) -> Result<ExitCode> {
    let bounds = qubit_bounds(args.modes, args.electrons)?;
    let report = BoundsReport {
        modes: args.modes,
        electrons: args.electrons,
        gv_qubits: bounds.gv_qubits,
        impossibility_qubits: bounds.impossibility_qubits,
        qubit_cap: qubit_cap(args.modes, args.electrons),
    };
    printer.json_out(&report);
    printer.result(format!(
        "guaranteed qubits {}   impossibility bound {}   cap 2N*log2(M) {}",
        report.gv_qubits, report.impossibility_qubits, report.qubit_cap
    ));
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs, printer: &Printer) -> Result<ExitCode> {
    let outcome = table_search(
        args.electrons,
        args.qubits,
        args.max_modes,
        Duration::from_secs(args.budget_seconds),
        args.seed,
    )?;
    printer.json_out(&outcome);
    match outcome.best_modes {
        Some(m) => printer.result(format!(
            "max modes {m} at electrons={} qubits={} ({} attempts, {:.1}s{})",
            args.electrons,
            args.qubits,
            outcome.attempts_used,
            outcome.elapsed_seconds,
            if outcome.budget_exhausted {
                ", budget exhausted"
            } else {
                ""
            }
        )),
        None => printer.result(format!(
            "no modes encodable at electrons={} qubits={} within the budget",
            args.electrons, args.qubits
        )),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct GroupsReport {
    modes: usize,
    electrons: usize,
    qubits: usize,
    group_count: usize,
    bound: usize,
    groups: Vec<fermipack::encoding::GroupSummary>,
}

fn load_code_or_identity(
    path: Option<&PathBuf>,
    hamiltonian: &FermionHamiltonian,
) -> Result<SubspaceCode> {
    match path {
        Some(p) => SubspaceCode::from_artifact_json(&std::fs::read_to_string(p)?),
        None => Ok(SubspaceCode::identity(
            hamiltonian.modes(),
            hamiltonian.electrons(),
        )),
    }
}

fn cmd_groups(args: GroupsArgs, printer: &Printer) -> Result<ExitCode> {
    let hamiltonian = FermionHamiltonian::read_native(&args.hamiltonian)?;
    let code = load_code_or_identity(args.code.as_ref(), &hamiltonian)?;
    let compiled = EncodedHamiltonian::compile(&hamiltonian, &code)?;
    let m = hamiltonian.modes();
    let bound = 1 + binomial_usize(m, 2) + binomial_usize(m, 4);
    let report = GroupsReport {
        modes: m,
        electrons: hamiltonian.electrons(),
        qubits: code.qubits(),
        group_count: compiled.groups().len(),
        bound,
        groups: compiled.groups().iter().map(|g| g.summary()).collect(),
    };
    printer.json_out(&report);
    for g in &report.groups {
        printer.info(format!(
            "group {}  terms {}  pivot {}  cnots {:?}  rotation {:?}",
            g.x_key,
            g.term_count,
            g.pivot.map_or("-".to_string(), |p| p.to_string()),
            g.cnots,
            g.rotation
        ));
    }
    printer.result(format!(
        "{} measurement groups (bound 1 + C(M,2) + C(M,4) = {bound})",
        report.group_count
    ));
    if report.group_count > bound {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_shots(text: &str, seed: u64) -> Result<Shots> {
    if text.eq_ignore_ascii_case("exact") {
        return Ok(Shots::Exact);
    }
    let shots: u64 = text.parse().map_err(|_| {
        Error::InvalidArgument(format!("--shots takes \"exact\" or a count, got {text:?}"))
    })?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be positive".into()));
    }
    Ok(Shots::Sampled { shots, seed })
}

#[derive(Serialize)]
struct VqeReport<'a> {
    hamiltonian: String,
    code: String,
    shots: String,
    #[serde(flatten)]
    result: &'a VqeResult,
}

fn cmd_vqe(args: VqeArgs, printer: &Printer) -> Result<ExitCode> {
    let hamiltonian = FermionHamiltonian::read_native(&args.hamiltonian)?;
    let code = SubspaceCode::from_artifact_json(&std::fs::read_to_string(&args.code)?)?;
    let config = VqeConfig {
        restarts: args.restarts,
        seed: args.seed,
        shots: parse_shots(&args.shots, args.seed)?,
        ..VqeConfig::benchmark(args.layers)
    };
    let result = run_vqe(&hamiltonian, &code, &config)?;
    let report = VqeReport {
        hamiltonian: args.hamiltonian.display().to_string(),
        code: args.code.display().to_string(),
        shots: args.shots.clone(),
        result: &result,
    };
    printer.json_out(&report);
    printer.result(format!(
        "energy      {:+.9} Ha\nexact       {:+.9} Ha\ndelta       {:+.6} kcal/mol\ncnots       {}\nparameters  {}\nrestarts    {} ({} failed)",
        result.best_energy,
        result.exact_energy,
        result.delta_e_kcal,
        result.cnot_count,
        result.parameter_count,
        result.restarts,
        result.failed_restarts
    ));
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)?)?;
        printer.info(format!("result written to {}", out.display()));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FciReport {
    modes: usize,
    electrons: usize,
    energy: f64,
}

fn cmd_fci(args: FciArgs, printer: &Printer) -> Result<ExitCode> {
    let hamiltonian = FermionHamiltonian::read_native(&args.hamiltonian)?;
    let energy = hamiltonian.exact_ground_energy()?;
    let report = FciReport {
        modes: hamiltonian.modes(),
        electrons: hamiltonian.electrons(),
        energy,
    };
    printer.json_out(&report);
    printer.result(format!("{energy:+.12}"));
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: SelftestArgs, printer: &Printer) -> Result<ExitCode> {
    let outcome = run_selftest(&SelftestConfig {
        modes: args.modes,
        electrons: args.electrons,
        trials: args.trials,
        seed: args.seed,
        inject_sign_fault: args.inject_sign_fault,
    })?;
    printer.json_out(&outcome);
    if outcome.vacuous {
        printer.result(format!(
            "no weight-{} states on {} modes; vacuous pass",
            args.electrons, args.modes
        ));
        return Ok(ExitCode::SUCCESS);
    }
    for failure in &outcome.failures {
        printer.info(format!("FAIL {failure}"));
    }
    printer.result(format!(
        "{}/{} pass (max |error| {:.3e})",
        outcome.passes, outcome.trials_run, outcome.max_abs_error
    ));
    if outcome.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

#[derive(Serialize)]
struct DecodeCheckReport {
    modes: usize,
    electrons: usize,
    qubits: usize,
    states: usize,
    round_trip_ok: bool,
}

fn cmd_decode_check(args: DecodeCheckArgs, printer: &Printer) -> Result<ExitCode> {
    let code = SubspaceCode::from_artifact_json(&std::fs::read_to_string(&args.code)?)?;
    let decoder = build_lookup(&code)?;
    let mut ok = true;
    for (word, state) in decoder.sorted_entries() {
        if &code.encode(state)? != word || decoder.decode(word) != Some(state) {
            ok = false;
            printer.result(format!("round-trip failure at state {state}"));
        }
    }
    let report = DecodeCheckReport {
        modes: code.modes(),
        electrons: code.electrons(),
        qubits: code.qubits(),
        states: decoder.len(),
        round_trip_ok: ok,
    };
    printer.json_out(&report);
    printer.result(format!(
        "{} states decode round-trip: {}",
        report.states,
        if ok { "ok" } else { "FAILED" }
    ));
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
