use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wrank::bounds::{bound_report, lemma2_witness_check, BoundSpec, SuppliedCertificate};
use wrank::certificate::{check_span_containment, decomposition_from_certificate, support_basis};
use wrank::json::{self, AnyDecomposition, AnyTensor};
use wrank::search::{
    als_search, numeric_rank_probe, verify_approx, verify_decomposition, warm_start_search,
    AlsConfig, VerifyMode,
};
use wrank::slocc::{rate_table, render_table};
use wrank::{Bipartition, Error, Party, Result};

mod sources;

#[derive(Parser)]
#[command(name = "wrank", version, about = "Exact tensor-rank tools for W and GHZ powers")]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    W,
    Ghz,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::W => "w",
            Family::Ghz => "ghz",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build W or GHZ powers.
    #[command(subcommand)]
    State(StateCmd),
    /// Rank bounds with provenance.
    #[command(subcommand)]
    Rank(RankCmd),
    /// Span certificates.
    #[command(subcommand)]
    Cert(CertCmd),
    /// Verify, search for, or derive decompositions.
    #[command(subcommand)]
    Decomp(DecompCmd),
    /// GHZ↔W conversion predicates.
    #[command(subcommand)]
    Slocc(SloccCmd),
    /// Full-rank check on perturbed slices of W powers.
    #[command(subcommand)]
    Lemma2(Lemma2Cmd),
}

#[derive(Subcommand)]
enum StateCmd {
    Build {
        family: Family,
        #[arg(long, default_value_t = 1)]
        power: u32,
        /// Emit double-precision entries instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
}

#[derive(Subcommand)]
enum RankCmd {
    /// Bounds for a W/GHZ power, or for a tensor file with `--state`.
    Bounds {
        family: Option<Family>,
        #[arg(long)]
        power: Option<u32>,
        /// Exact tensor file or builtin.
        #[arg(long, conflicts_with_all = ["family", "power"])]
        state: Option<String>,
        /// Certificate files for the `--state` tensor; the file stem is the id.
        #[arg(long = "cert", requires = "state")]
        certs: Vec<String>,
    },
}

#[derive(Subcommand)]
enum CertCmd {
    /// Decide whether a set of product pairs spans the support of one party's slices.
    Span {
        #[arg(long)]
        state: String,
        #[arg(long)]
        spanning: String,
        #[arg(long, default_value = "A")]
        traced: String,
    },
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    max_sweeps: usize,
}

impl SearchArgs {
    fn config(&self) -> AlsConfig {
        AlsConfig {
            restarts: self.restarts,
            seed: self.seed,
            max_sweeps: self.max_sweeps,
            ..AlsConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum DecompCmd {
    Verify {
        #[arg(long)]
        target: String,
        #[arg(long)]
        decomp: String,
        /// Decide entrywise equality exactly instead of comparing a residual.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Alternating least squares at a fixed rank. Never a rank certificate.
    Search {
        #[arg(long)]
        target: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Start from this decomposition instead of random factors.
        #[arg(long, conflicts_with = "rank")]
        warm: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Best residual per rank 1..=max-rank, one JSON line per rank.
    Probe {
        #[arg(long)]
        target: String,
        #[arg(long)]
        max_rank: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Expand a span certificate into an explicit decomposition.
    FromCert {
        #[arg(long)]
        state: String,
        /// Certificate file, as written by `cert span`.
        #[arg(long, conflicts_with = "spanning")]
        cert: Option<String>,
        /// Build the certificate from this spanning set instead.
        #[arg(long)]
        spanning: Option<String>,
        #[arg(long, default_value = "A")]
        traced: String,
    },
}

#[derive(Subcommand)]
enum SloccCmd {
    Table {
        #[arg(long)]
        max_m: u32,
        #[arg(long)]
        max_n: u32,
    },
}

#[derive(Subcommand)]
enum Lemma2Cmd {
    Witness {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a subcommand produced: the report in both renderings, and whether a
/// certifying subcommand reached a negative verdict.
struct Report {
    json: String,
    text: String,
    negative: bool,
}

impl Report {
    fn new(value: &impl Serialize, text: String) -> Self {
        Report {
            json: serde_json::to_string(value).expect("serializable"),
            text,
            negative: false,
        }
    }

    fn raw(json: String, text: String) -> Self {
        Report { json, text, negative: false }
    }

    fn negative_if(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }
}

fn traced(flag: &str, s: &str) -> Result<Bipartition> {
    s.parse::<Party>()
        .map(Bipartition::new)
        .map_err(|_| Error::input(flag, format!("expected A, B or C, got `{s}`")))
}

fn describe_tensor(t: &AnyTensor) -> String {
    let (shape, nonzero): ([usize; 3], Vec<String>) = match t {
        AnyTensor::Exact(t) => (t.shape(), t.nonzero().map(|(i, v)| format!("  {i:?}  {v}")).collect()),
        AnyTensor::Float(t) => (t.shape(), t.nonzero().map(|(i, v)| format!("  {i:?}  {v}")).collect()),
    };
    format!("shape {shape:?}, {} nonzero entries\n{}", nonzero.len(), nonzero.join("\n"))
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::State(StateCmd::Build { family, power, float }) => {
            let t = sources::power_state(family.name(), *power)?;
            let any = if *float { AnyTensor::Float(t.to_float()) } else { AnyTensor::Exact(t) };
            let json = match &any {
                AnyTensor::Exact(t) => json::tensor_to_json(t),
                AnyTensor::Float(t) => json::tensor_to_json(t),
            };
            Ok(Report::raw(json, describe_tensor(&any)))
        }

        Command::Rank(RankCmd::Bounds { family, power, state, certs }) => {
            let spec = match (family, state) {
                (Some(f), None) => {
                    let n = power.ok_or_else(|| Error::input("--power", "required with a state family"))?;
                    match f {
                        Family::W => BoundSpec::WPower(n),
                        Family::Ghz => BoundSpec::GhzPower(n),
                    }
                }
                (None, Some(src)) => {
                    let tensor = sources::exact_tensor("--state", src)?;
                    let certificates = certs
                        .iter()
                        .map(|path| {
                            let (certificate, traced) = sources::certificate("--cert", path)?;
                            let id = std::path::Path::new(path)
                                .file_stem()
                                .map_or_else(|| path.clone(), |s| s.to_string_lossy().into_owned());
                            Ok(SuppliedCertificate { id, traced, certificate })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    BoundSpec::Tensor { label: src.clone(), tensor, certificates }
                }
                _ => return Err(Error::input("state", "give either `w|ghz --power n` or `--state <file>`")),
            };
            let report = bound_report(&spec)?;
            Ok(Report::new(&report, report.render_text()))
        }

        Command::Cert(CertCmd::Span { state, spanning, traced: party }) => {
            let t = sources::exact_tensor("--state", state)?;
            let cut = traced("--traced", party)?;
            let pairs = sources::spanning("--spanning", spanning)?;
            let cert = check_span_containment(&pairs, &support_basis(&t, cut))?;
            let text = format!(
                "verdict: {}\nsupport dimension: {}\nspanning rank: {} of {} pairs\nunreachable support vectors: {:?}",
                if cert.verdict() { "contained" } else { "not contained" },
                cert.support.len(),
                cert.spanning_rank,
                cert.spanning.len(),
                cert.unreachable,
            );
            let negative = !cert.verdict();
            Ok(Report::raw(json::certificate_to_json(&cert, cut), text).negative_if(negative))
        }

        Command::Decomp(DecompCmd::Verify { target, decomp, exact, tol }) => {
            let t = sources::tensor("--target", target)?;
            let d = sources::decomposition("--decomp", decomp)?;
            let result = if *exact {
                match (t, d) {
                    (AnyTensor::Exact(t), AnyDecomposition::Exact(d)) => {
                        verify_decomposition(&t, &d, VerifyMode::Exact, *tol)?
                    }
                    (AnyTensor::Float(_), _) => {
                        return Err(Error::input("--target", "exact verification needs an exact-mode tensor"))
                    }
                    (_, AnyDecomposition::Float(_)) => {
                        return Err(Error::input("--decomp", "exact verification needs an exact-mode decomposition"))
                    }
                }
            } else {
                verify_approx(&t.to_float(), &d.to_float(), *tol)?
            };
            let text = format!(
                "{}: residual {:e}{}{}",
                if result.passed { "PASS" } else { "FAIL" },
                result.residual,
                result.mismatched_entries.map_or(String::new(), |m| format!(", {m} mismatched entries")),
                match (&result.worst_index, &result.worst_difference) {
                    (Some(i), Some(v)) => format!(", worst {i:?} differs by {}{:+}i", v.re, v.im.parse::<f64>().unwrap_or(f64::NAN)),
                    _ => String::new(),
                },
            );
            let negative = !result.passed;
            Ok(Report::new(&result, text).negative_if(negative))
        }

        Command::Decomp(DecompCmd::Search { target, rank, warm, search }) => {
            let t = sources::tensor("--target", target)?.to_float();
            let cfg = search.config();
            let result = match (rank, warm) {
                (_, Some(src)) => {
                    let d0 = sources::decomposition("--warm", src)?.to_float();
                    warm_start_search(&t, &d0, &cfg)?
                }
                (Some(r), None) => als_search(&t, *r, &cfg)?,
                (None, None) => return Err(Error::input("--rank", "required unless --warm is given")),
            };
            let text = format!(
                "rank {}: residual {:e} after {} sweeps ({:?}), restart {}, max factor norm {:.3e}, border-rank suspicion {}\n(numerical fit, not a rank certificate)",
                result.rank,
                result.residual,
                result.sweeps,
                result.stop,
                result.best_restart,
                result.max_factor_norm,
                result.border_rank_suspicion,
            );
            Ok(Report::new(&result, text))
        }

        Command::Decomp(DecompCmd::Probe { target, max_rank, search }) => {
            let t = sources::tensor("--target", target)?.to_float();
            let rows = numeric_rank_probe(&t, *max_rank, &search.config())?;
            eprintln!("numerical probe: residuals are not rank certificates");
            let json = rows
                .iter()
                .map(|r| serde_json::to_string(r).expect("serializable"))
                .collect::<Vec<_>>()
                .join("\n");
            let mut text = String::from("non-certifying numerical probe\n  r  residual     suspicion  restart");
            for r in &rows {
                text += &format!("\n{:>3}  {:<11.3e}  {:<9}  {}", r.r, r.residual, r.suspicion, r.restart);
            }
            Ok(Report::raw(json, text))
        }

        Command::Decomp(DecompCmd::FromCert { state, cert, spanning, traced: party }) => {
            let t = sources::exact_tensor("--state", state)?;
            let (certificate, cut) = match (cert, spanning) {
                (Some(path), None) => sources::certificate("--cert", path)?,
                (None, Some(src)) => {
                    let cut = traced("--traced", party)?;
                    let pairs = sources::spanning("--spanning", src)?;
                    (check_span_containment(&pairs, &support_basis(&t, cut))?, cut)
                }
                _ => return Err(Error::input("--cert", "give either --cert or --spanning")),
            };
            if !certificate.verdict() {
                let text = format!(
                    "certificate is negative: support vectors {:?} are not spanned",
                    certificate.unreachable
                );
                return Ok(Report::raw(json::certificate_to_json(&certificate, cut), text).negative_if(true));
            }
            if !certificate.reverify() || support_basis(&t, cut) != certificate.support {
                return Err(Error::input("--cert", "certificate does not re-verify against this state"));
            }
            let d = decomposition_from_certificate(&t, cut, &certificate)?;
            let text = format!("{} terms from a certificate along party {}", d.len(), cut.separated);
            Ok(Report::raw(json::decomposition_to_json(&d), text))
        }

        Command::Slocc(SloccCmd::Table { max_m, max_n }) => {
            if *max_m == 0 || *max_n == 0 {
                return Err(Error::input(if *max_m == 0 { "--max-m" } else { "--max-n" }, "must be at least 1"));
            }
            let rows = rate_table(*max_m, *max_n);
            Ok(Report::new(&rows, render_table(&rows)))
        }

        Command::Lemma2(Lemma2Cmd::Witness { n, trials, seed }) => {
            let report = lemma2_witness_check(*n, *trials, *seed)?;
            let text = format!(
                "n={}: {} trials (seed {}), expected rank {}, {} failures",
                report.n,
                report.trials,
                report.seed,
                report.expected_rank,
                report.failures.len()
            );
            let negative = !report.verdict;
            Ok(Report::new(&report, text).negative_if(negative))
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    let body = match cli.format {
        Format::Json => &report.json,
        Format::Text => &report.text,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, format!("{body}\n")),
        None => writeln!(std::io::stdout().lock(), "{body}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: invalid input in `--out`: {e}");
                return ExitCode::from(2);
            }
            if report.negative {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
