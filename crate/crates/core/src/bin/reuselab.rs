//! Single entry point: synthesis, planning, ceiling reports, session
//! simulation, drift audits, baseline tables, fixture reproduction, and
//! log-to-table rendering.
//!
//! Exit codes: 0 success, 1 reproduction diff, 2 usage or config error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use reuselab::baselines::{
    baseline_table, demo_corpus, demo_jitter, DetectorJitter, EventSpec, SelectionPolicy,
};
use reuselab::ceiling::{ceiling_report, scatterback_pred, CeilingCell};
use reuselab::drift::{drift_report, ArmRecord, AttractorSet, Choice, PairedRow};
use reuselab::fixtures;
use reuselab::framestream::{
    load_stream, square_pad_resize, synth_stream, write_ppm, ActiveMask, Frame, FrameStream,
    SynthSpec,
};
use reuselab::planner::{plan_stream, PlanConfig, Thresholds};
use reuselab::report::{
    drift_csv, drift_markdown, economics_report, OutputFormat, Provenance,
};
use reuselab::session::{
    run_cohort, session_speedup, warm_speedup, AnswerOracle, BasinModel, LatencyModel, Policy,
    QuerySchedule, TurnSpec,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "reuselab", version, about = "anti-recomputation lab bench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// md | csv | json
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic PPM stream plus change truth from a spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for frames, manifest.json, and truth.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan reuse over a stream manifest and emit a JSONL plan log.
    Plan {
        /// Frame manifest (JSON array of PPM paths) or a synth output dir.
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, default_value_t = 8)]
        tau_static: u8,
        #[arg(long, default_value_t = 48)]
        tau_novel: u8,
        #[arg(long, default_value_t = 4)]
        max_age: u32,
        #[arg(long, default_value_t = 28)]
        block_size: u32,
        /// Square-pad and resize to this side first; enables padding mask.
        #[arg(long)]
        target: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a ceiling-residual table from cells (bundled when omitted).
    Ceiling {
        #[arg(long)]
        cells: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        tolerance_pp: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate cache-session cohorts under a policy; emits JSONL.
    Simulate {
        /// Schedules JSON (array); generated from --sessions/--frames/--turns
        /// when omitted.
        #[arg(long)]
        schedules: Option<PathBuf>,
        /// cold | raw | fixed-k:K | adaptive | refresh:P | failed-adaptive
        #[arg(long)]
        policy: String,
        #[arg(long)]
        latency: Option<PathBuf>,
        #[arg(long)]
        basin: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        sessions: usize,
        #[arg(long, default_value_t = 20)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        turns: usize,
        /// Append the previous dense answer to every follow-up prompt.
        #[arg(long)]
        dense_anchor: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired drift audit of two session-log JSONL files.
    Audit {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value_t = 0.03)]
        gate: f64,
        /// Attractor JSON; bundled set when omitted.
        #[arg(long)]
        attractors: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score frame-selection policies against event windows.
    Baseline {
        /// Event corpus JSON; built-in 22-event corpus when omitted.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Detector jitter JSON for the event-window proxy.
        #[arg(long)]
        detector_jitter: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate bundled expected tables and diff; exit 1 on mismatch.
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
    /// Render session-log JSONL into summary tables.
    Report {
        /// Candidate (warm-policy) session log.
        #[arg(long)]
        logs: PathBuf,
        /// Cold-cohort session log for speedup and drift columns.
        #[arg(long)]
        against: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum ReproduceTarget {
    /// Ceiling predictions and residuals against the published table.
    Ceiling,
    /// Setup-inclusive Q-column speedups against the published table.
    Economics,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Synth { spec, out } => cmd_synth(&spec, &out),
        Cmd::Plan {
            stream,
            tau_static,
            tau_novel,
            max_age,
            block_size,
            target,
            out,
        } => cmd_plan(&stream, tau_static, tau_novel, max_age, block_size, target, out.as_deref()),
        Cmd::Ceiling {
            cells,
            tolerance_pp,
            output,
        } => cmd_ceiling(cells.as_deref(), tolerance_pp, &output),
        Cmd::Simulate {
            schedules,
            policy,
            latency,
            basin,
            sessions,
            frames,
            turns,
            dense_anchor,
            seed,
            out,
        } => cmd_simulate(
            schedules.as_deref(),
            &policy,
            latency.as_deref(),
            basin.as_deref(),
            sessions,
            frames,
            turns,
            dense_anchor,
            seed,
            out.as_deref(),
        ),
        Cmd::Audit {
            baseline,
            candidate,
            gate,
            attractors,
            output,
        } => cmd_audit(&baseline, &candidate, gate, attractors.as_deref(), &output),
        Cmd::Baseline {
            events,
            detector_jitter,
            output,
        } => cmd_baseline(events.as_deref(), detector_jitter.as_deref(), &output),
        Cmd::Reproduce { target } => match target {
            ReproduceTarget::Ceiling => cmd_reproduce_ceiling(),
            ReproduceTarget::Economics => cmd_reproduce_economics(),
        },
        Cmd::Report {
            logs,
            against,
            output,
        } => cmd_report(&logs, against.as_deref(), &output),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat> {
    OutputFormat::parse(s).ok_or_else(|| anyhow!("unknown format {s}; expected md, csv, or json"))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_synth(spec_path: &Path, out_dir: &Path) -> Result<ExitCode> {
    let spec: SynthSpec = read_json(spec_path)?;
    let (stream, truth) = synth_stream(&spec)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = Vec::new();
    for (i, frame) in stream.frames().iter().enumerate() {
        let name = format!("frame_{i:04}.ppm");
        fs::write(out_dir.join(&name), write_ppm(frame))?;
        manifest.push(name);
    }
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    fs::write(
        out_dir.join("truth.json"),
        serde_json::to_string_pretty(&truth)?,
    )?;
    eprintln!(
        "wrote {} frames to {}",
        stream.frames().len(),
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_stream_arg(path: &Path) -> Result<FrameStream> {
    let manifest = if path.is_dir() {
        path.join("manifest.json")
    } else {
        path.to_path_buf()
    };
    Ok(load_stream(&manifest)?)
}

fn cmd_plan(
    stream_path: &Path,
    tau_static: u8,
    tau_novel: u8,
    max_age: u32,
    block_size: u32,
    target: Option<u32>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let stream = load_stream_arg(stream_path)?;
    let config = PlanConfig {
        block_size,
        thresholds: Thresholds::new(tau_static, tau_novel)?,
        max_age,
    };
    let log = match target {
        None => plan_stream(&stream, &config, None)?,
        Some(side) => {
            let mut frames: Vec<Frame> = Vec::with_capacity(stream.len());
            let mut mask: Option<ActiveMask> = None;
            for frame in stream.frames() {
                let (resized, m) = square_pad_resize(frame, side, block_size)?;
                frames.push(resized);
                mask.get_or_insert(m);
            }
            let resized = FrameStream::new("resized", frames)?;
            plan_stream(&resized, &config, mask.as_ref())?
        }
    };
    emit(out, &log.to_jsonl())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_ceiling(cells_path: Option<&Path>, tolerance_pp: f64, output: &OutputArgs) -> Result<ExitCode> {
    let format = parse_format(&output.format)?;
    let (cells, input_name): (Vec<CeilingCell>, String) = match cells_path {
        Some(p) => (read_json(p)?, p.display().to_string()),
        None => (
            fixtures::ceiling_cells()?
                .iter()
                .map(|r| r.to_cell())
                .collect(),
            "bundled:table10.json".into(),
        ),
    };
    let report = ceiling_report(&cells, tolerance_pp)?;
    let prov = Provenance::new(vec![input_name], None);
    let body = match format {
        OutputFormat::Markdown => format!("{}{}", report.to_markdown(), prov.footer(format)),
        OutputFormat::Csv => format!("{}{}", report.to_csv(), prov.footer(format)),
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&report)?;
            v["provenance"] = serde_json::to_value(&prov)?;
            format!("{}\n", serde_json::to_string_pretty(&v)?)
        }
    };
    emit(output.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn generated_schedules(
    sessions: usize,
    frames: usize,
    turns: usize,
    dense_anchor: bool,
) -> Vec<QuerySchedule> {
    (0..sessions)
        .map(|s| QuerySchedule {
            video_id: format!("v{s:02}"),
            n_frames: frames,
            turns: (0..turns)
                .map(|t| TurnSpec {
                    question_id: format!("q{t:02}"),
                    n_options: 4,
                    key: 'A',
                    dense_anchor: dense_anchor && t > 0,
                })
                .collect(),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    schedules_path: Option<&Path>,
    policy: &str,
    latency_path: Option<&Path>,
    basin_path: Option<&Path>,
    sessions: usize,
    frames: usize,
    turns: usize,
    dense_anchor: bool,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let policy = Policy::parse(policy)?;
    let schedules: Vec<QuerySchedule> = match schedules_path {
        Some(p) => read_json(p)?,
        None => generated_schedules(sessions, frames, turns, dense_anchor),
    };
    let latency: LatencyModel = match latency_path {
        Some(p) => read_json(p)?,
        None => LatencyModel::default(),
    };
    let basin: BasinModel = match basin_path {
        Some(p) => read_json(p)?,
        None => BasinModel::default(),
    };
    let oracle = AnswerOracle::default();
    let (logs, summary) = run_cohort(&schedules, policy, &oracle, &latency, &basin, seed)?;
    let mut body = String::new();
    for log in &logs {
        body.push_str(&log.to_jsonl());
    }
    body.push_str(&serde_json::json!({ "summary": summary, "seed": seed }).to_string());
    body.push('\n');
    emit(out, &body)?;
    Ok(ExitCode::SUCCESS)
}

/// One JSONL session-log line, as emitted by `simulate`.
#[derive(Debug, Deserialize)]
struct LogLine {
    video_id: String,
    policy: String,
    turn: usize,
    raw_text: String,
    choice: Choice,
    correct: bool,
    latency_s: f64,
}

fn read_log(path: &Path) -> Result<Vec<LogLine>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        // summary trailer lines are not turn records
        if line.contains("\"summary\"") {
            continue;
        }
        let row: LogLine = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(row);
    }
    Ok(out)
}

fn pair_logs(baseline: &[LogLine], candidate: &[LogLine]) -> Result<Vec<PairedRow>> {
    let index: BTreeMap<(&str, usize), &LogLine> = baseline
        .iter()
        .map(|l| ((l.video_id.as_str(), l.turn), l))
        .collect();
    let mut rows = Vec::new();
    for c in candidate {
        let b = index
            .get(&(c.video_id.as_str(), c.turn))
            .ok_or_else(|| anyhow!("no baseline row for {}:{}", c.video_id, c.turn))?;
        rows.push(PairedRow {
            item_id: format!("{}:{}", c.video_id, c.turn),
            session_id: c.video_id.clone(),
            turn: c.turn,
            baseline: ArmRecord {
                raw_text: b.raw_text.clone(),
                choice: b.choice,
                correct: b.correct,
            },
            candidate: ArmRecord {
                raw_text: c.raw_text.clone(),
                choice: c.choice,
                correct: c.correct,
            },
        });
    }
    Ok(rows)
}

fn cmd_audit(
    baseline: &Path,
    candidate: &Path,
    gate: f64,
    attractors_path: Option<&Path>,
    output: &OutputArgs,
) -> Result<ExitCode> {
    let format = parse_format(&output.format)?;
    let attractors: AttractorSet = match attractors_path {
        Some(p) => read_json(p)?,
        None => fixtures::attractors()?,
    };
    let rows = pair_logs(&read_log(baseline)?, &read_log(candidate)?)?;
    let report = drift_report(&rows, gate, &attractors)?;
    let prov = Provenance::new(
        vec![baseline.display().to_string(), candidate.display().to_string()],
        None,
    );
    let body = match format {
        OutputFormat::Markdown => format!("{}{}", drift_markdown(&report), prov.footer(format)),
        OutputFormat::Csv => format!("{}{}", drift_csv(&report), prov.footer(format)),
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&report)?;
            v["provenance"] = serde_json::to_value(&prov)?;
            format!("{}\n", serde_json::to_string_pretty(&v)?)
        }
    };
    emit(output.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(
    events_path: Option<&Path>,
    jitter_path: Option<&Path>,
    output: &OutputArgs,
) -> Result<ExitCode> {
    let format = parse_format(&output.format)?;
    let (events, input_name): (Vec<EventSpec>, String) = match events_path {
        Some(p) => (read_json(p)?, p.display().to_string()),
        None => (demo_corpus(), "builtin:demo-corpus".into()),
    };
    let jitter: DetectorJitter = match jitter_path {
        Some(p) => read_json(p)?,
        None => demo_jitter(),
    };
    let table = baseline_table(&events, &SelectionPolicy::standard_set(), jitter)?;
    let prov = Provenance::new(vec![input_name], None);
    let body = match format {
        OutputFormat::Markdown => format!("{}{}", table.to_markdown(), prov.footer(format)),
        OutputFormat::Csv => format!("{}{}", table.to_csv(), prov.footer(format)),
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&table)?;
            v["provenance"] = serde_json::to_value(&prov)?;
            format!("{}\n", serde_json::to_string_pretty(&v)?)
        }
    };
    emit(output.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn cmd_reproduce_ceiling() -> Result<ExitCode> {
    let rows = fixtures::ceiling_cells()?;
    let mut ok = true;
    println!("cell | computed pred | published pred | computed residual | published residual | status");
    for r in &rows {
        let pred = scatterback_pred(r.v_share, r.v_red)?;
        // published predictions carry three decimals; compare at that grain
        let pred_diff = (round3(pred) - r.printed_pred).abs();
        let residual_pp = (r.observed - pred) * 100.0;
        let residual_diff = (residual_pp - r.printed_residual_pp).abs();
        let pass = pred_diff <= 0.001 + 1e-9 && residual_diff <= 0.15 + 1e-9;
        ok &= pass;
        println!(
            "{} | {:.3} | {:.3} | {:+.1}pp | {:+.1}pp | {}",
            r.name,
            pred,
            r.printed_pred,
            residual_pp,
            r.printed_residual_pp,
            if pass { "ok" } else { "DIFF" }
        );
    }
    if ok {
        println!("reproduce ceiling: PASS ({} cells)", rows.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("reproduce ceiling: FAIL");
        Ok(ExitCode::from(1))
    }
}

fn cmd_reproduce_economics() -> Result<ExitCode> {
    let cells = fixtures::economics_cells()?;
    let report = economics_report(&cells, 0.1);
    print!("{}", report.to_markdown());
    if report.all_pass {
        println!("reproduce economics: PASS ({} cells)", report.rows.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("reproduce economics: FAIL");
        Ok(ExitCode::from(1))
    }
}

struct PolicyStats {
    policy: String,
    sessions: usize,
    turns_per_session: usize,
    first_latency_mean: f64,
    followup_latencies: Vec<f64>,
    all_latency_mean: f64,
}

fn policy_stats(rows: &[LogLine], policy_label: &str) -> PolicyStats {
    let mut sessions: BTreeMap<&str, Vec<&LogLine>> = BTreeMap::new();
    for r in rows {
        sessions.entry(&r.video_id).or_default().push(r);
    }
    let n_sessions = sessions.len();
    let mut first = Vec::new();
    let mut followups = Vec::new();
    let mut all = Vec::new();
    let mut turns_per_session = 0;
    for turns in sessions.values() {
        turns_per_session = turns_per_session.max(turns.len());
        for t in turns.iter() {
            all.push(t.latency_s);
            if t.turn == 0 {
                first.push(t.latency_s);
            } else {
                followups.push(t.latency_s);
            }
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    PolicyStats {
        policy: policy_label.to_string(),
        sessions: n_sessions,
        turns_per_session,
        first_latency_mean: mean(&first),
        followup_latencies: followups,
        all_latency_mean: mean(&all),
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn cmd_report(logs: &Path, against: Option<&Path>, output: &OutputArgs) -> Result<ExitCode> {
    let format = parse_format(&output.format)?;
    let cand_rows = read_log(logs)?;
    if cand_rows.is_empty() {
        let body = match format {
            OutputFormat::Markdown => {
                "| Policy | Sessions | Median follow-up (s) | Mean all-query (s) |\n|---|---|---|---|\n".to_string()
            }
            OutputFormat::Csv => "policy,sessions,median_follow-up_(s),mean_all-query_(s)\n".to_string(),
            OutputFormat::Json => bail!("report supports md and csv output"),
        };
        emit(output.out.as_deref(), &body)?;
        return Ok(ExitCode::SUCCESS);
    }
    let policy_label = cand_rows[0].policy.clone();
    let mut cand = policy_stats(&cand_rows, &policy_label);
    let cand_followup_median = median(&mut cand.followup_latencies);

    let mut inputs = vec![logs.display().to_string()];
    let mut header = String::from(
        "| Policy | Sessions | Median follow-up (s) | Mean all-query (s) |",
    );
    let mut sep = String::from("|---|---|---|---|");
    let mut row = format!(
        "| {} | {} | {:.3} | {:.3} |",
        cand.policy, cand.sessions, cand_followup_median, cand.all_latency_mean
    );

    if let Some(cold_path) = against {
        inputs.push(cold_path.display().to_string());
        let cold_rows = read_log(cold_path)?;
        let mut cold = policy_stats(&cold_rows, "cold");
        let cold_followup_median = median(&mut cold.followup_latencies);
        // warm speedup denominator: median cold follow-up latency
        let warm = warm_speedup(cold_followup_median, cand_followup_median);
        let q = cand.turns_per_session.max(1);
        let all_query = session_speedup(
            q,
            cold.all_latency_mean,
            cand.first_latency_mean,
            cand_followup_median,
        );
        let attractors = fixtures::attractors()?;
        let paired = pair_logs(&cold_rows, &cand_rows)?;
        let drift = drift_report(&paired, 0.03, &attractors)?;
        header.push_str(" Warm speedup (cold follow-up denom) | All-query speedup (Q per session) | Choice diffs | Correctness diffs |");
        sep.push_str("---|---|---|---|");
        row.push_str(&format!(
            " {warm:.2}x | {all_query:.2}x | {}/{} | {}/{} |",
            drift.choice_diffs, drift.n_rows, drift.correctness_diffs, drift.n_rows
        ));
    }

    let prov = Provenance::new(inputs, None);
    let body = match format {
        OutputFormat::Markdown => {
            format!("{header}\n{sep}\n{row}\n{}", prov.footer(format))
        }
        OutputFormat::Csv => {
            let csv_header = header
                .trim_matches('|')
                .split('|')
                .map(|s| s.trim().replace(' ', "_").to_lowercase())
                .collect::<Vec<_>>()
                .join(",");
            let csv_row = row
                .trim_matches('|')
                .split('|')
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(",");
            format!("{csv_header}\n{csv_row}\n{}", prov.footer(format))
        }
        OutputFormat::Json => bail!("report supports md and csv output"),
    };
    emit(output.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}
