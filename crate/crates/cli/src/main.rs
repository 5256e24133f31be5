use clap::{Args, Parser, Subcommand};
use covert_core::bits::BitVec;
use covert_core::codec::ConcatCode;
use covert_core::design::{
    contour_grid, derive_params, design_k2, design_ru, solve_k1, ChannelModel, ContourCell, Mode, Overrides,
    DEFAULT_DELTA,
};
use covert_core::harness::{self, lemma1_table, ExperimentConfig, Kind, Lemma1Row, Lemma1Spec, RunRecord};
use covert_core::{Error, Result};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "covertlab", version, about = "Covert concatenated-code design, simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed for all randomness.
    #[arg(long)]
    seed: u64,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ChannelArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value = "paper")]
    mode: Mode,
}

impl ChannelArgs {
    fn model(&self) -> Result<ChannelModel> {
        ChannelModel::new(self.p, self.q, self.eps, self.delta)
    }

    fn echo(&self) -> Value {
        json!({ "p": self.p, "q": self.q, "eps": self.eps, "delta": self.delta, "mode": self.mode })
    }
}

#[derive(Args, Debug, Clone)]
struct ScaleArgs {
    #[arg(long = "L")]
    num_chunks: usize,
    #[arg(long = "B")]
    chunk_len: usize,
    #[arg(long)]
    l2: Option<usize>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    rho: Option<f64>,
}

impl ScaleArgs {
    fn overrides(&self) -> Overrides {
        Overrides { l2: self.l2, m: self.m, rho: self.rho, ..Default::default() }
    }

    fn echo(&self) -> Value {
        json!({ "L": self.num_chunks, "B": self.chunk_len, "l2": self.l2, "m": self.m, "rho": self.rho })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the design constants and, with --L/--B, the integer parameters.
    Design {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long = "L", requires = "chunk_len")]
        num_chunks: Option<usize>,
        #[arg(long = "B", requires = "num_chunks")]
        chunk_len: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Encode a hex message (t=1) or silence (t=0).
    Encode {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long, default_value_t = 1)]
        t: u8,
        /// Message as hex, l1*m bits, bit 0 is the MSB of the first byte.
        #[arg(long)]
        message: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Decode a hex channel output of n bits.
    Decode {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        received: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a reliability experiment from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Instead of evaluating, run this many disjoint pilot trials and
        /// write the config with its tolerance band filled in.
        #[arg(long)]
        pilot_trials: Option<u64>,
        #[arg(long, default_value_t = 0.01, requires = "pilot_trials")]
        silence_failure_max: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a covertness experiment from a JSON config.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate exact total variation against its bound.
    Lemma1 {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.4")]
        q_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        eps_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10000,1000000")]
        n_values: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value = "paper")]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Complexity-exponent grid over (p, q).
    Contour {
        #[arg(long, value_delimiter = ',', num_args = 2, default_value = "0.01,0.24")]
        p_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2, default_value = "0.05,0.45")]
        q_range: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value = "paper")]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "appendix")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Output document plus whether every requested check passed.
struct Report {
    body: String,
    summary: Option<String>,
    passed: bool,
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}

fn code(channel: &ChannelArgs, scale: &ScaleArgs, seed: u64) -> Result<ConcatCode> {
    let params = derive_params(&channel.model()?, scale.num_chunks, scale.chunk_len, channel.mode, &scale.overrides())?;
    ConcatCode::build(&params, seed)
}

fn record_report(rec: RunRecord, flags: Value) -> Result<Report> {
    let summary = Some(rec.summary());
    let passed = rec.passed;
    let mut v = serde_json::to_value(&rec)?;
    if let Value::Object(m) = &mut v {
        m.remove("rows");
        m.insert("flags".into(), flags);
    }
    Ok(Report { body: pretty(&v), summary, passed })
}

fn run_config(path: &PathBuf, common: &Common, kind: Kind) -> Result<Report> {
    let mut cfg = ExperimentConfig::load(path)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!("kind: expected {kind:?}, found {:?}", cfg.kind)));
    }
    cfg.master_seed = common.seed;
    if let Some(out) = &common.out {
        cfg.output_path = Some(out.display().to_string());
    }
    let rec = harness::run(&cfg)?;
    let flags = json!({ "config": path.display().to_string(), "seed": common.seed });
    let mut r = record_report(rec, flags)?;
    if common.out.is_some() {
        // The harness has already written the full record.
        r.body.clear();
    }
    Ok(r)
}

fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Design { channel, num_chunks, chunk_len, common } => {
            let ch = channel.model()?;
            let mut flags = channel.echo();
            flags["seed"] = json!(common.seed);
            let body = match (num_chunks, chunk_len) {
                (Some(l), Some(b)) => {
                    flags["L"] = json!(l);
                    flags["B"] = json!(b);
                    let params = derive_params(&ch, *l, *b, channel.mode, &Overrides::default())?;
                    json!({ "flags": flags, "params": params })
                }
                _ => {
                    let sol = solve_k1(&ch, channel.mode)?;
                    json!({
                        "flags": flags,
                        "k2": design_k2(ch.q, ch.eps_d, channel.mode),
                        "r_u": design_ru(ch.p, ch.q, ch.eps_d, channel.mode),
                        "k1_solution": sol,
                    })
                }
            };
            Ok(Report { body: pretty(&body), summary: None, passed: true })
        }
        Command::Encode { channel, scale, t, message, common } => {
            let c = code(channel, scale, common.seed)?;
            let msg = message.as_deref().map(|h| BitVec::from_hex(h, c.message_bits())).transpose()?;
            let x = c.encode(msg.as_ref(), *t)?;
            let symbols = match (&msg, t) {
                (Some(m), 1) => Some(c.outer_codeword(m)?),
                _ => None,
            };
            let mut flags = channel.echo();
            flags["scale"] = scale.echo();
            flags["seed"] = json!(common.seed);
            flags["t"] = json!(t);
            let body = json!({
                "flags": flags,
                "n": x.len(),
                "outer_codeword": symbols,
                "codeword": x.to_hex(),
                "off_paper": c.params.off_paper,
            });
            Ok(Report { body: pretty(&body), summary: None, passed: true })
        }
        Command::Decode { channel, scale, received, common } => {
            let c = code(channel, scale, common.seed)?;
            let y = BitVec::from_hex(received, c.params.n as usize)?;
            let r = c.decode(&y)?;
            let mut flags = channel.echo();
            flags["scale"] = scale.echo();
            flags["seed"] = json!(common.seed);
            let body = json!({
                "flags": flags,
                "t_hat": r.t_hat,
                "message": r.message.as_ref().map(BitVec::to_hex),
                "chunk_outcomes": covert_core::codec::outcome_string(&r.chunk_outcomes, c.params.m),
                "rs_status": r.rs_status,
                "work": r.work,
            });
            Ok(Report { body: pretty(&body), summary: None, passed: true })
        }
        Command::Simulate { config, pilot_trials: Some(n), silence_failure_max, common } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if cfg.kind != Kind::Reliability {
                return Err(Error::Config(format!("kind: expected Reliability, found {:?}", cfg.kind)));
            }
            cfg.master_seed = common.seed;
            cfg.output_path = None;
            let (golden, rec) = harness::pilot_golden(&cfg, *n, *silence_failure_max)?;
            let summary = format!(
                "pilot trials={n} p_err={} band={:?}",
                rec.metrics["p_err"],
                golden.expected.as_ref().map(|e| e.p_err_band)
            );
            Ok(Report { body: pretty(&serde_json::to_value(&golden)?), summary: Some(summary), passed: true })
        }
        Command::Simulate { config, common, .. } => run_config(config, common, Kind::Reliability),
        Command::Detect { config, common } => run_config(config, common, Kind::Covertness),
        Command::Lemma1 { q_values, eps_values, n_values, delta, mode, common } => {
            let spec = Lemma1Spec { q_values: q_values.clone(), eps_values: eps_values.clone(), n_values: n_values.clone() };
            let rows = lemma1_table(&spec, *delta, *mode);
            let mut body = format!(
                "# mode={} delta={delta} seed={}\n{}\n",
                mode_name(*mode),
                common.seed,
                Lemma1Row::CSV_HEADER
            );
            for r in &rows {
                body.push_str(&r.csv_row());
                body.push('\n');
            }
            let passed = rows.iter().all(|r| r.holds);
            let summary = format!("lemma1 {} cells={}", if passed { "PASS" } else { "FAIL" }, rows.len());
            Ok(Report { body, summary: Some(summary), passed })
        }
        Command::Contour { p_range, q_range, steps, eps, delta, mode, common } => {
            let cells = contour_grid((p_range[0], p_range[1]), (q_range[0], q_range[1]), *eps, *delta, *steps, *mode);
            let mut body = format!(
                "# mode={} eps={eps} delta={delta} steps={steps} seed={}\n{}\n",
                mode_name(*mode),
                common.seed,
                ContourCell::CSV_HEADER
            );
            for c in &cells {
                body.push_str(&c.csv_row());
                body.push('\n');
            }
            let feasible = cells.iter().filter(|c| c.exponent.is_some()).count();
            Ok(Report { body, summary: Some(format!("contour cells={} feasible={feasible}", cells.len())), passed: true })
        }
        Command::Verify { suite, common } => {
            let cfg = ExperimentConfig::from_json(&format!(
                r#"{{"kind":"verify","channel":{{"p":0.05,"q":0.25,"eps_d":0.1}},"master_seed":{},"suite":{}}}"#,
                common.seed,
                serde_json::to_string(suite)?
            ))?;
            let rec = harness::run_verify(&cfg)?;
            let failed: Vec<String> = rec
                .rows
                .iter()
                .filter(|r| r["passed"] != json!(true))
                .filter_map(|r| r["check"].as_str().map(str::to_owned))
                .collect();
            let summary = rec.summary();
            let passed = rec.passed;
            let mut v = serde_json::to_value(&rec)?;
            v["failed_checks"] = json!(failed);
            v["flags"] = json!({ "suite": suite, "seed": common.seed });
            Ok(Report { body: pretty(&v), summary: Some(summary), passed })
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Paper => "paper",
        Mode::Optimal => "optimal",
    }
}

fn out_of(cmd: &Command) -> &Option<PathBuf> {
    match cmd {
        Command::Design { common, .. }
        | Command::Encode { common, .. }
        | Command::Decode { common, .. }
        | Command::Simulate { common, .. }
        | Command::Detect { common, .. }
        | Command::Lemma1 { common, .. }
        | Command::Contour { common, .. }
        | Command::Verify { common, .. } => &common.out,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(report) => {
            if !report.body.is_empty() {
                if let Err(e) = emit(out_of(&cli.command), &report.body) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if let Some(s) = report.summary {
                eprintln!("{s}");
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
