//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or input error (including a request for
//! zero shifts), 3 stabilizability/detectability or semidefiniteness
//! precondition failure, 4 no admissible eigenvalue, 5 numerical failure,
//! 6 verification failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::are::{check_assumptions, residual, solve_stabilizing, AreProblem};
use crate::error::{Error, Result};
use crate::io::{write_text, Mode, ProblemFile, ReportFile, SolutionFile, VerifySection};
use crate::lqr::{are_to_lqr_realization, case_study, BenchmarkSpec};
use crate::numerics::{eigenvalues, is_hurwitz};
use crate::privacy::{
    attack_simulate, confusion_member, privacy_measures, true_reverse_sequence, AttackReport,
    PrivacyReport,
};
use crate::realizability::{algorithm2_with, RealizableOptions};
use crate::shift::{perturb, SamplingWindow, ShiftKind, ShiftKinds, ShiftRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_NO_EIGENVALUE: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;
pub const EXIT_VERIFY: i32 = 6;

pub const SEED_ENV: &str = "RICCATI_DISGUISE_SEED";

/// Relative solution mismatch accepted as equal.
pub const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "riccati-disguise", version, about = "Disguise, solve and check algebraic Riccati equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shift Hamiltonian eigenvalues and write the disguised problem.
    Disguise(DisguiseArgs),
    /// Compute the stabilizing solution of a problem file.
    Solve(SolveArgs),
    /// Check a returned solution against the original coefficients.
    Verify(VerifyArgs),
    /// Privacy measures and, optionally, a simulated reconstruction attack.
    Analyze(AnalyzeArgs),
    /// Measure table of the shift drivers on a generated benchmark.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindsArg {
    Real,
    Complex,
    Mixed,
}

impl From<KindsArg> for ShiftKinds {
    fn from(k: KindsArg) -> Self {
        match k {
            KindsArg::Real => ShiftKinds::Real,
            KindsArg::Complex => ShiftKinds::Complex,
            KindsArg::Mixed => ShiftKinds::Mixed,
        }
    }
}

#[derive(Debug, Args)]
pub struct DisguiseArgs {
    /// Problem file with an "are" or "lqr" section.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "problem1")]
    pub mode: Mode,
    /// Number of eigenvalue shifts.
    #[arg(long, default_value_t = 1)]
    pub shifts: usize,
    /// RNG seed; required through the flag or the environment variable.
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Fraction of |λ| kept clear at both ends of the shift window.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    /// Eigenvalue kinds eligible in problem1 mode.
    #[arg(long, value_enum, default_value = "real")]
    pub kinds: KindsArg,
    /// Disguised problem, the file sent to the solver.
    #[arg(long)]
    pub out: PathBuf,
    /// Local report with the applied shifts; keep it private.
    #[arg(long)]
    pub secrets_out: Option<PathBuf>,
    /// Also store eigenvectors in the report.
    #[arg(long)]
    pub keep_secrets: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub input: PathBuf,
    /// Solution file; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub original: PathBuf,
    pub disguised: PathBuf,
    pub solution: PathBuf,
    /// Report written by `disguise`; enables the exact solution comparison.
    #[arg(long)]
    pub secrets: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub original: PathBuf,
    pub disguised: PathBuf,
    /// Report written by `disguise`; supplies the number of shifts.
    #[arg(long)]
    pub secrets: Option<PathBuf>,
    /// Number of shifts assumed when no report is given.
    #[arg(long)]
    pub k: Option<usize>,
    /// Run the reconstruction attack with the original as scoring oracle.
    #[arg(long)]
    pub attack: bool,
    /// Maximum number of index sequences the attack scores.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub attack_seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 9)]
    pub shifts: usize,
    #[arg(long, value_enum, default_value = "problem1")]
    pub mode: Mode,
    /// Isolated unstable modes with their own input and output.
    #[arg(long, default_value_t = 2)]
    pub isolated_modes: usize,
    /// Measure table as CSV; printed to stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Full case-study record as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Output of `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub privacy: PrivacyReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_sequence: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackReport>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::InvalidArgument(_)
        | Error::Dimension(_)
        | Error::NonFinite(_)
        | Error::NotSymmetric { .. } => EXIT_USAGE,
        Error::Assumption(_)
        | Error::NotPsd { .. }
        | Error::ImaginaryAxis(_)
        | Error::SingularBasis(_) => EXIT_ASSUMPTION,
        Error::NoAdmissibleEigenvalue | Error::NotEnoughEigenvalues { .. } => EXIT_NO_EIGENVALUE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Disguise(a) => disguise(&a),
        Command::Solve(a) => solve(&a),
        Command::Verify(a) => verify(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Bench(a) => bench(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", text.trim_end())?;
            Ok(())
        }
    }
}

fn ensure_assumptions(p: &AreProblem) -> Result<()> {
    let report = check_assumptions(p)?;
    if !report.holds() {
        return Err(Error::Assumption(format!(
            "stabilizable: {}, detectable: {}",
            report.stabilizable, report.detectable
        )));
    }
    Ok(())
}

/// Solution check of `candidate` against `original`.
fn check_solution(
    original: &AreProblem,
    candidate: &crate::numerics::Matrix,
    reference: Option<&crate::numerics::Matrix>,
) -> Result<VerifySection> {
    let res = residual(original, candidate)?;
    let closed_loop = eigenvalues(&(original.a() - original.d() * candidate))?;
    let rel = reference.map(|p| (candidate - p).norm() / p.norm().max(f64::MIN_POSITIVE));
    Ok(VerifySection {
        residual: res,
        closed_loop_stable: is_hurwitz(&closed_loop),
        solution_match: rel.map(|r| r <= MATCH_TOL),
        solution_rel_diff: rel,
    })
}

fn residual_ok(section: &VerifySection, p: &crate::numerics::Matrix) -> bool {
    section.residual <= MATCH_TOL * (1.0 + p.norm().powi(2))
}

fn disguise(args: &DisguiseArgs) -> Result<i32> {
    if args.shifts == 0 {
        return Err(Error::InvalidArgument(
            "trivial request: at least one shift is needed to change the coefficients".into(),
        ));
    }
    let original = ProblemFile::read(&args.input)?.are_problem()?;
    ensure_assumptions(&original)?;
    let seed = args.seed.ok_or_else(|| {
        Error::InvalidArgument(format!("no seed: pass --seed or set {SEED_ENV}"))
    })?;

    let (modified, records): (AreProblem, Vec<ShiftRecord>) = match args.mode {
        Mode::Problem1 => {
            let window = SamplingWindow {
                margin: args.margin,
                kinds: args.kinds.into(),
                ..SamplingWindow::default()
            };
            let (h, plan) = perturb(&original.hamiltonian(), args.shifts, window, seed)?;
            (h.split()?, plan.records)
        }
        Mode::Problem2 => {
            let mut options = RealizableOptions {
                margin: args.margin,
                ..RealizableOptions::default()
            };
            let mut current = original.clone();
            let mut records = Vec::with_capacity(args.shifts);
            for i in 0..args.shifts {
                let out = algorithm2_with(&current, seed.wrapping_add(i as u64), &options)?;
                options.exclude.push(out.record.shifted_eigenvalue().re);
                records.push(out.record);
                current = out.problem;
            }
            (current, records)
        }
    };

    let before = solve_stabilizing(&original)?;
    let after = solve_stabilizing(&modified)?;
    let verify = check_solution(&original, &after.p, Some(&before.p))?;
    if verify.solution_match != Some(true) || !verify.closed_loop_stable {
        eprintln!(
            "disguised problem does not reproduce the solution (relative difference {:.3e})",
            verify.solution_rel_diff.unwrap_or(f64::NAN)
        );
        return Ok(EXIT_NUMERIC);
    }

    let mut shipped = ProblemFile::from_are(&modified);
    if args.mode == Mode::Problem2 {
        shipped.lqr = ProblemFile::from_lqr(&are_to_lqr_realization(&modified)?).lqr;
    }
    shipped.write(&args.out)?;

    if let Some(path) = &args.secrets_out {
        let report = ReportFile {
            mode: args.mode,
            seed,
            shifts: records
                .iter()
                .map(|r| if args.keep_secrets { r.clone() } else { r.without_vectors() })
                .collect(),
            privacy: privacy_measures(&original, &modified, records.len())?,
            verify,
        };
        report.write(path)?;
    }
    Ok(EXIT_OK)
}

fn solve(args: &SolveArgs) -> Result<i32> {
    let problem = ProblemFile::read(&args.input)?.are_problem()?;
    ensure_assumptions(&problem)?;
    let solution = solve_stabilizing(&problem)?;
    if !solution.is_stabilizing() {
        return Err(Error::Assumption("closed loop is not Hurwitz".into()));
    }
    let file = SolutionFile::from(solution);
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&file)?)?;
    Ok(EXIT_OK)
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let original = ProblemFile::read(&args.original)?.are_problem()?;
    let disguised = ProblemFile::read(&args.disguised)?.are_problem()?;
    let solution = SolutionFile::read(&args.solution)?;
    if disguised.order() != original.order() {
        return Err(Error::Dimension(format!(
            "original has order {}, disguised {}",
            original.order(),
            disguised.order()
        )));
    }
    let reference = match &args.secrets {
        Some(path) => {
            let report = ReportFile::read(path)?;
            if report.shifts.len() > 0 && report.shifts.iter().all(|r| r.kind == ShiftKind::Real) {
                // The recorded shifts must lead back from the disguised problem.
                let h_tilde = disguised.hamiltonian();
                let h = original.hamiltonian();
                let (idx, gammas) = true_reverse_sequence(&h_tilde, &report.shifts)?;
                let back = confusion_member(&h_tilde, &idx, &gammas)?;
                let gap = (back.hamiltonian.matrix() - h.matrix()).norm() / h.norm().max(1.0);
                if gap > MATCH_TOL {
                    eprintln!("secrets do not connect the two problems (gap {gap:.3e})");
                    return Ok(EXIT_VERIFY);
                }
            }
            Some(solve_stabilizing(&original)?.p)
        }
        None => None,
    };
    let section = check_solution(&original, &solution.p, reference.as_ref())?;
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&section)?)?;
    let passed = residual_ok(&section, &solution.p)
        && section.closed_loop_stable
        && section.solution_match != Some(false);
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

fn analyze(args: &AnalyzeArgs) -> Result<i32> {
    let original = ProblemFile::read(&args.original)?.are_problem()?;
    let disguised = ProblemFile::read(&args.disguised)?.are_problem()?;
    let report = args.secrets.as_deref().map(ReportFile::read).transpose()?;
    let k = match (&report, args.k) {
        (_, Some(k)) => k,
        (Some(r), None) => r.shifts.len(),
        (None, None) => 1,
    };
    let privacy = privacy_measures(&original, &disguised, k)?;
    let h_tilde = disguised.hamiltonian();
    let true_sequence = match &report {
        Some(r) if r.shifts.iter().all(|s| s.kind == ShiftKind::Real) => {
            Some(true_reverse_sequence(&h_tilde, &r.shifts)?.0)
        }
        _ => None,
    };
    let attack = if args.attack {
        Some(attack_simulate(
            &h_tilde,
            &original.hamiltonian(),
            k,
            args.budget,
            args.attack_seed,
        )?)
    } else {
        None
    };
    let out = AnalyzeReport {
        privacy,
        true_sequence,
        attack,
    };
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&out)?)?;
    Ok(EXIT_OK)
}

fn bench(args: &BenchArgs) -> Result<i32> {
    let spec = BenchmarkSpec::new(args.n, args.m, args.p, args.seed)
        .with_isolated_modes(args.isolated_modes);
    let study = case_study(&spec, args.shifts, args.mode)?;
    let csv = study.to_csv()?;
    emit(args.csv.as_deref(), &csv)?;
    if let Some(path) = &args.json {
        write_text(path, &serde_json::to_string_pretty(&study)?)?;
    }
    if study.solution_rel_diff > MATCH_TOL || !study.closed_loop_stable {
        eprintln!(
            "solution changed by {:.3e} after the shifts",
            study.solution_rel_diff
        );
        return Ok(EXIT_VERIFY);
    }
    Ok(EXIT_OK)
}
