//! Command-line front end. Exit codes: 0 success, 1 error, 2 verification
//! mismatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use stackelberg_core::oracle::Mode;
use stackelberg_core::Rational;

use crate::generate::generate_random;
use crate::io::{parse_instance, read_report, write_json, InstanceFile, JsonlSink};
use crate::run::{bench_exp_binary, run_learner, sweep, verify, BenchRow};

#[derive(Debug, Parser)]
#[command(name = "stackelberg", version, about = "Learn optimal leader commitments from best-response queries")]
pub struct Cli {
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "STACKELBERG_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random game with dyadic payoffs.
    Gen(GenArgs),
    /// Run the learner on an instance.
    Learn(LearnArgs),
    /// Compare a report against the brute-force optimum.
    Verify(VerifyArgs),
    /// Query counts of naive and exact search on close crossings.
    BenchExpBinary(BenchArgs),
    /// Query counts over many random games against the theoretical budget.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub bits: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "0.1")]
    pub zeta: Rational,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long)]
    pub out_transcript: Option<PathBuf>,
    /// Treat follower actions with identical payoff columns as distinct
    /// regions split by leader preference.
    #[arg(long)]
    pub equivalent_actions: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Report to check; updated in place with the baseline fields.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    pub eps_exponents: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Inclusive range `a-b` or a single value.
    #[arg(long, default_value = "3")]
    pub m_range: String,
    #[arg(long, default_value = "3")]
    pub n_range: String,
    #[arg(long, default_value_t = 6)]
    pub bits: u32,
    #[arg(long, default_value = "0.1")]
    pub zeta: Rational,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid range `{s}`, expected `a-b` or `a`");
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn resolve(explicit: &Option<PathBuf>, dir: &Path, default: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| dir.join(default))
}

type CliResult = Result<i32, Box<dyn std::error::Error>>;

fn gen(a: &GenArgs, dir: &Path) -> CliResult {
    if a.bits < 2 || a.m == 0 || a.n == 0 {
        return Err("gen needs m, n ≥ 1 and bits ≥ 2".into());
    }
    let mut file = InstanceFile::from_instance(&generate_random(a.m, a.n, a.bits, a.seed));
    file.seed = Some(a.seed);
    file.bits = Some(a.bits);
    let path = resolve(&a.out, dir, &format!("game_{}x{}_b{}_s{}.json", a.m, a.n, a.bits, a.seed));
    write_json(&path, &file)?;
    println!("{}", path.display());
    Ok(0)
}

fn learn_cmd(a: &LearnArgs, dir: &Path) -> CliResult {
    let instance = parse_instance(&a.instance)?;
    let mode = if a.equivalent_actions { Mode::EquivalentActions } else { Mode::Standard };
    let report = match &a.out_transcript {
        Some(path) => {
            let mut sink = JsonlSink::new(BufWriter::new(File::create(path)?));
            let out = run_learner(&instance, &a.zeta, a.seed, mode, Some(&mut sink))?;
            sink.finish()?;
            out.report
        }
        None => run_learner(&instance, &a.zeta, a.seed, mode, None)?.report,
    };
    let path = resolve(&a.out_report, dir, &format!("report_s{}.json", a.seed));
    write_json(&path, &report)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(0)
}

fn verify_cmd(a: &VerifyArgs) -> CliResult {
    let instance = parse_instance(&a.instance)?;
    let mut report = read_report(&a.report)?;
    if (report.m, report.n) != (instance.m(), instance.n()) {
        return Err(format!(
            "report is for a {}x{} game but the instance is {}x{}",
            report.m,
            report.n,
            instance.m(),
            instance.n()
        )
        .into());
    }
    let ok = verify(&instance, &mut report);
    write_json(&a.report, &report)?;
    println!("{}", serde_json::to_string(&report)?);
    if ok {
        Ok(0)
    } else {
        eprintln!("mismatch: learned value differs from the baseline optimum");
        Ok(2)
    }
}

fn bench_cmd(a: &BenchArgs, dir: &Path) -> CliResult {
    let instance = parse_instance(&a.instance)?;
    let rows: Vec<BenchRow> = bench_exp_binary(&instance, &a.eps_exponents)?;
    let path = resolve(&a.out, dir, "bench_exp_binary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in &rows {
        w.serialize(r)?;
        println!("k={} naive={} exact={}", r.k, r.naive, r.exact);
    }
    w.flush()?;
    Ok(0)
}

fn sweep_cmd(a: &SweepArgs, dir: &Path) -> CliResult {
    let ms = parse_range(&a.m_range)?;
    let ns = parse_range(&a.n_range)?;
    if a.bits < 2 || a.runs == 0 {
        return Err("sweep needs bits ≥ 2 and runs ≥ 1".into());
    }
    let shapes: Vec<(usize, usize)> = ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect();
    let rows = sweep(&shapes, a.bits, &a.zeta, a.runs, a.seed)?;
    let path = resolve(&a.out, dir, "sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let matched = rows.iter().filter(|r| r.matches).count();
    println!("{} runs, {matched} matched the baseline, max queries/budget = {worst:.4}", rows.len());
    Ok(0)
}

/// Parses `argv` and runs the chosen command, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let dir = &cli.out_dir;
    let result = match &cli.command {
        Command::Gen(a) => gen(a, dir),
        Command::Learn(a) => learn_cmd(a, dir),
        Command::Verify(a) => verify_cmd(a),
        Command::BenchExpBinary(a) => bench_cmd(a, dir),
        Command::Sweep(a) => sweep_cmd(a, dir),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3-4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("2").unwrap(), vec![2]);
        assert!(parse_range("4-3").is_err());
        assert!(parse_range("0").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "stackelberg",
            "bench-exp-binary",
            "--instance",
            "a.json",
            "--eps-exponents",
            "10,20,40",
        ])
        .unwrap();
        match cli.command {
            Command::BenchExpBinary(a) => assert_eq!(a.eps_exponents, vec![10, 20, 40]),
            other => panic!("{other:?}"),
        }
    }
}
