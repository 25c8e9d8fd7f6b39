//! `stab`: parse, type-check and run programs, compile alternating machines
//! and tabulate space bounds over a corpus.

use clap::{Parser, Subcommand, ValueEnum};
use stab::atm::{atm_oracle, bool_string, compile, AtmSpec, Poly};
use stab::corpus::{arithmetic_programs, m_n, random_programs, Program};
use stab::machine::{computation_tree, eval_observed, run_small_observed, CsvTrace, MachineError};
use stab::report::{run_report, static_report, BoundReport};
use stab::syntax::{parse_term, Term};
use stab::types::{read_jsonl, write_jsonl, ATerm, Derivation, Elaborator, Type};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stab", version, about = "Space-bounded machines for soft type assignment with booleans")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MachineKind {
    Big,
    Small,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the canonical form and size of a term.
    Parse { file: PathBuf },
    /// Validate a derivation for a term and print its static measures.
    Check {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        derivation: PathBuf,
    },
    /// Build a derivation of `⊢ M : B` and print it as JSON lines.
    Derive { file: PathBuf },
    /// Evaluate a program.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "big")]
        machine: MachineKind,
        /// One comma-separated record per configuration.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        stats: bool,
        /// Print the computation tree (big-step only).
        #[arg(long)]
        tree: bool,
        #[arg(long, default_value_t = 10_000_000)]
        fuel: usize,
        /// With a derivation every bound of the report is checked.
        #[arg(long, value_name = "FILE")]
        derivation: Option<PathBuf>,
    },
    /// Compile a machine with a time bound and run it on one input.
    CompileAtm {
        file: PathBuf,
        /// Coefficients of the time bound, constant first.
        #[arg(long, default_value = "0,1")]
        poly: Poly,
        #[arg(long, default_value = "")]
        input: String,
        /// Write the program term here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        /// Write the program derivation here.
        #[arg(long, value_name = "FILE")]
        derivation: Option<PathBuf>,
    },
    /// Report bounds for every `*.term` file of a directory, paired with the
    /// `*.jsonl` derivation of the same stem.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        fuel: usize,
        /// Comma-separated records instead of the table.
        #[arg(long)]
        csv: bool,
    },
    /// Write a corpus of programs with derivations into a directory.
    Corpus {
        dir: PathBuf,
        /// `M_1` to `M_n`.
        #[arg(long, default_value_t = 10)]
        mn: usize,
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        arithmetic: bool,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
    Stuck(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Stuck(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Stuck(m) => m,
        }
    }
}

impl From<MachineError> for Failure {
    fn from(e: MachineError) -> Failure {
        Failure::Stuck(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_term(path: &Path) -> Result<Term, Failure> {
    parse_term(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// A derivation whose subject is `t`, validated.
fn load_derivation(path: &Path, t: &Term) -> Result<Derivation, Failure> {
    let d = read_jsonl(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    d.validate().map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    if !d.term.alpha_eq(t) {
        return Err(Failure::Invalid(format!("derivation concludes {} but the program is {t}", d.term)));
    }
    if !d.ctx.is_empty() || d.ty != Type::Bool {
        return Err(Failure::Invalid(format!("derivation concludes {} : {}, not a program", d.term, d.ty)));
    }
    Ok(d)
}

fn bit(b: bool) -> u8 {
    u8::from(!b)
}

fn parse_cmd(file: &Path) -> Outcome {
    let t = load_term(file)?;
    Ok(format!("{t}\nsize {}\n", t.size()))
}

fn check_cmd(file: &Path, derivation: &Path) -> Outcome {
    let t = load_term(file)?;
    let d = read_jsonl(&read(derivation)?).map_err(|e| Failure::Invalid(e.to_string()))?;
    d.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    if !d.term.alpha_eq(&t) {
        return Err(Failure::Invalid(format!("derivation concludes {} but the term is {t}", d.term)));
    }
    Ok(format!("{} : {}\n{}", d.term, d.ty, static_report(&d)))
}

fn derive_cmd(file: &Path) -> Outcome {
    let t = load_term(file)?;
    let d = Elaborator::new()
        .check_closed(&ATerm::from_term(&t), &Type::Bool)
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(write_jsonl(&d))
}

#[allow(clippy::too_many_arguments)]
fn run_cmd(
    file: &Path,
    machine: MachineKind,
    trace: bool,
    stats: bool,
    tree: bool,
    fuel: usize,
    derivation: Option<&Path>,
) -> Outcome {
    let t = load_term(file)?;
    let d = derivation.map(|p| load_derivation(p, &t)).transpose()?;
    let mut out = String::new();
    if tree {
        let ct = computation_tree(&t, fuel)?;
        write!(out, "{ct}").unwrap();
    }
    let (result, space) = match machine {
        MachineKind::Big => {
            let (b, s) = if trace {
                let mut csv = CsvTrace::new(Vec::new());
                let r = eval_observed(&t, fuel, &mut csv)?;
                out.push_str(&String::from_utf8(csv.into_inner()).unwrap());
                r
            } else {
                eval_observed(&t, fuel, &mut ())?
            };
            if stats {
                writeln!(out, "configurations {}", s.configurations).unwrap();
                writeln!(out, "beta {} (path max {})", s.beta_total, s.max_beta).unwrap();
                writeln!(out, "h {} (path max {})", s.h_total, s.max_h).unwrap();
                writeln!(out, "if {} (path max {})", s.if_total, s.max_if).unwrap();
                writeln!(out, "max |A| {}  max |C| {}  max |M| {}", s.max_mctx, s.max_bctx, s.max_subject).unwrap();
            }
            (b, s.space)
        }
        MachineKind::Small => {
            let mut steps = 0usize;
            let mut max = 0;
            if trace {
                out.push_str("rule,stack,bctx,mctx,subject,max\n");
            }
            let (b, space) = run_small_observed(&t, fuel, &mut |c, rule| {
                steps += 1;
                max = max.max(c.size());
                if trace {
                    let tag = rule.map_or("final", |r| r.tag());
                    let (s, bc, a, m) = (c.stack_size(), c.bctx.size(), c.mctx.size(), c.subject.size());
                    writeln!(out, "{tag},{s},{bc},{a},{m},{max}").unwrap();
                }
            })?;
            if stats {
                writeln!(out, "configurations {steps}").unwrap();
            }
            (b, space)
        }
    };
    let label = match machine {
        MachineKind::Big => "space",
        MachineKind::Small => "space_s",
    };
    if stats {
        writeln!(out, "{label} {space}").unwrap();
    }
    writeln!(out, "result {}", bit(result)).unwrap();
    if let Some(d) = d {
        let r = run_report(&d, fuel)?;
        write!(out, "{r}").unwrap();
    }
    Ok(out)
}

fn parse_bits(s: &str) -> Result<Vec<u8>, Failure> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Failure::Usage(format!("input must be a string of 0 and 1, found {c:?}"))),
        })
        .collect()
}

fn compile_cmd(file: &Path, poly: &Poly, input: &str, emit: Option<&Path>, derivation: Option<&Path>) -> Outcome {
    let bits = parse_bits(input)?;
    let spec = AtmSpec::from_toml(&read(file)?).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut c = compile(&spec, poly).map_err(|e| Failure::Invalid(e.to_string()))?;
    let program = c.program(&bits);
    if let Some(p) = emit {
        write(p, &format!("{}\n", program.term))?;
    }
    if let Some(p) = derivation {
        write(p, &write_jsonl(&program))?;
    }
    let (got, stats) = eval_observed(&program.term, usize::MAX, &mut ())?;
    let time = poly.eval(bits.len() as u64);
    let want = atm_oracle(&spec, &bits, time);
    let mut out = String::new();
    writeln!(out, "eval size {}  degree {}  argument !^{} S", c.term().size(), c.eval.degree(), c.t).unwrap();
    writeln!(out, "input {input:?} ({} as a string term of size {})", bits.len(), bool_string(&bits).size()).unwrap();
    writeln!(out, "time bound {time}").unwrap();
    writeln!(out, "program size {}  space {}", program.term.size(), stats.space).unwrap();
    writeln!(out, "compiled {}  oracle {}", verdict(got), verdict(want)).unwrap();
    if got == want {
        out.push_str("match\n");
        Ok(out)
    } else {
        Err(Failure::Stuck(format!("{out}mismatch")))
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

struct Row {
    file: String,
    report: BoundReport,
}

const COLUMNS: [&str; 11] = ["file", "size", "degree", "rank", "weight", "rules", "space", "space_s", "bound", "result", "flags"];

impl Row {
    fn cells(&self) -> Vec<String> {
        let r = &self.report;
        let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        let failed: Vec<&str> = r.flags.iter().filter(|f| !f.ok).map(|f| f.name).collect();
        vec![
            self.file.clone(),
            r.size.to_string(),
            r.degree.to_string(),
            r.rank.to_string(),
            r.weight.to_string(),
            opt(r.rule_applications),
            opt(r.space),
            opt(r.space_s),
            r.bound.to_string(),
            r.result.map_or("-".to_string(), |b| bit(b).to_string()),
            if failed.is_empty() { "ok".to_string() } else { failed.join("|") },
        ]
    }
}

fn table(rows: &[Row]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
    let mut width: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
    for r in &cells {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| {
        let padded: Vec<String> = items.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(COLUMNS.to_vec());
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn bench_cmd(dir: &Path, fuel: usize, csv: bool) -> Outcome {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut terms: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "term"))
        .collect();
    terms.sort();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for path in terms {
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let dpath = path.with_extension("jsonl");
        let report = load_term(&path)
            .and_then(|t| load_derivation(&dpath, &t))
            .and_then(|d| run_report(&d, fuel).map_err(Failure::from));
        match report {
            Ok(report) => rows.push(Row { file, report }),
            Err(e) => errors.push(format!("{file}: {}", e.message())),
        }
    }
    let out = if csv {
        let mut s = format!("file,{}\n", BoundReport::CSV_HEADER);
        for r in &rows {
            writeln!(s, "{},{}", r.file, r.report.csv()).unwrap();
        }
        s
    } else {
        table(&rows)
    };
    if errors.is_empty() {
        Ok(out)
    } else {
        // the rows that did load still go to stdout
        let _ = std::io::stdout().write_all(out.as_bytes());
        Err(Failure::Invalid(errors.join("\n")))
    }
}

fn corpus_cmd(dir: &Path, mn: usize, random: usize, seed: u64, arithmetic: bool) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut programs: Vec<Program> = (1..=mn)
        .map(|n| Program { name: format!("m{n:02}"), derivation: m_n(n) })
        .collect();
    programs.extend(random_programs(seed, random, 60));
    if arithmetic {
        programs.extend(arithmetic_programs().into_iter().map(|(p, _)| p));
    }
    for p in &programs {
        write(&dir.join(format!("{}.term", p.name)), &format!("{}\n", p.derivation.term))?;
        write(&dir.join(format!("{}.jsonl", p.name)), &write_jsonl(&p.derivation))?;
    }
    Ok(format!("wrote {} programs to {}\n", programs.len(), dir.display()))
}

fn dispatch(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Parse { file } => parse_cmd(&file),
        Cmd::Check { file, derivation } => check_cmd(&file, &derivation),
        Cmd::Derive { file } => derive_cmd(&file),
        Cmd::Run { file, machine, trace, stats, tree, fuel, derivation } => {
            run_cmd(&file, machine, trace, stats, tree, fuel, derivation.as_deref())
        }
        Cmd::CompileAtm { file, poly, input, emit, derivation } => {
            compile_cmd(&file, &poly, &input, emit.as_deref(), derivation.as_deref())
        }
        Cmd::Bench { dir, fuel, csv } => bench_cmd(&dir, fuel, csv),
        Cmd::Corpus { dir, mn, random, seed, arithmetic } => corpus_cmd(&dir, mn, random, seed, arithmetic),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.cmd) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
