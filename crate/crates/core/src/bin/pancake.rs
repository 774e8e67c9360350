//! Command-line front end: builds initial curves, runs flows and shooting,
//! and writes deterministic JSON/CSV artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use pancake_stack::ShootError;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pancake_stack::diagnostics::{area_rate_check, extract_series, neck_boundedness_check};
use pancake_stack::flow::{evolve, FlowTrace};
use pancake_stack::io::{
    canonical_json, curve_csv, mentions_seed, read_profile, read_trace, sha256_hex, write_file, write_trace, RunConfig,
};
use pancake_stack::join::NeckParam;
use pancake_stack::presets::{initial_curve, preset, PRESETS};
use pancake_stack::shoot::{
    build_family, build_old_flow_for, classify, convergence_study, existence_time_check, ShootResult,
};

#[derive(Parser)]
#[command(name = "pancake", version, about = "Axisymmetric mean curvature flow of stacked pancakes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: sphere, cylinder, dumbbell or stack-desk.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (defaults to the configured `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Refuse any configuration that mentions a random seed.
    #[arg(long)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the initial curve and its join metadata.
    Gen {
        #[command(flatten)]
        common: Common,
        /// Neck minimum of a glued stack.
        #[arg(long, conflicts_with = "rho", allow_negative_numbers = true)]
        m: Option<f64>,
        /// Carve height of a glued stack.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
    },
    /// Evolve an initial curve and write the trace directory.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial curve CSV (`x,r`); built from the configuration if absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Neck minimum overriding the configured one (ignored with `--input`).
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
    },
    /// Label the flow of the stack with neck `m`.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Neck minimum to classify.
        #[arg(long, allow_negative_numbers = true)]
        m: f64,
    },
    /// Bisect the critical neck of the configured pancake and build its old flow.
    Shoot {
        #[command(flatten)]
        common: Common,
    },
    /// Build the old flow for every construction time of the schedule.
    Stack {
        #[command(flatten)]
        common: Common,
    },
    /// Convergence, neck and existence-time study over the schedule.
    Study {
        #[command(flatten)]
        common: Common,
    },
    /// Series and law checks over a trace directory (or a fresh evolution).
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Trace directory written by `evolve`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

/// Error tagged with its exit code.
struct Fail {
    code: u8,
    err: anyhow::Error,
}

trait Tag<T> {
    /// Usage or validation problem: exit code 2.
    fn usage(self) -> Result<T, Fail>;
    /// Numerical or internal failure: exit code 1.
    fn failure(self) -> Result<T, Fail>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn usage(self) -> Result<T, Fail> {
        self.map_err(|e| Fail { code: 2, err: e.into() })
    }
    fn failure(self) -> Result<T, Fail> {
        self.map_err(|e| Fail { code: 1, err: e.into() })
    }
}

struct Run {
    config: RunConfig,
    config_text: String,
    config_hash: String,
    out: PathBuf,
}

impl Run {
    fn new(common: &Common) -> Result<Self, Fail> {
        let config = match (&common.config, &common.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))
                    .usage()?;
                if common.seedless {
                    let raw: Value = serde_json::from_str(&text)
                        .with_context(|| format!("{} is not JSON", path.display()))
                        .usage()?;
                    if mentions_seed(&raw) {
                        return Err(anyhow!("--seedless: configuration mentions a seed")).usage();
                    }
                }
                RunConfig::from_json(&text, &path.display().to_string()).usage()?
            }
            (None, Some(name)) => preset(name)
                .ok_or_else(|| anyhow!("unknown preset `{name}` (expected one of {})", PRESETS.join(", ")))
                .usage()?,
            (None, None) => return Err(anyhow!("either --config or --preset is required")).usage(),
        };
        let config_text = canonical_json(&config);
        let config_hash = sha256_hex(config_text.as_bytes());
        let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output_dir));
        Ok(Run {
            config,
            config_text,
            config_hash,
            out,
        })
    }

    fn write(&self, name: &str, text: &str, files: &mut BTreeMap<String, String>) -> Result<(), Fail> {
        let hash = write_file(&self.out.join(name), text).failure()?;
        files.insert(name.to_string(), hash);
        Ok(())
    }

    /// Writes `config.json` and `manifest.json`; the manifest echoes the
    /// config and its hash so the run can be repeated from it alone.
    fn finish(&self, command: &str, mut body: Value, mut files: BTreeMap<String, String>) -> Result<String, Fail> {
        self.write("config.json", &self.config_text, &mut files)?;
        let obj = body.as_object_mut().expect("manifest body is an object");
        obj.insert("command".into(), json!(command));
        obj.insert("config".into(), serde_json::to_value(&self.config).unwrap());
        obj.insert("config_hash".into(), json!(self.config_hash));
        obj.insert("files".into(), json!(files));
        let text = canonical_json(&body);
        write_file(&self.out.join("manifest.json"), &text).failure()?;
        Ok(sha256_hex(text.as_bytes()))
    }

    fn threads(&self) -> Result<Option<usize>, Fail> {
        match std::env::var("PANCAKE_THREADS") {
            Ok(v) => {
                let k: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("PANCAKE_THREADS = `{v}` is not a positive integer"))
                    .usage()?;
                if k == 0 {
                    return Err(anyhow!("PANCAKE_THREADS must be positive")).usage();
                }
                Ok(Some(k))
            }
            Err(_) => Ok(self.config.threads),
        }
    }
}

fn neck_arg(m: Option<f64>, rho: Option<f64>) -> Option<NeckParam> {
    m.map(NeckParam::M).or(rho.map(NeckParam::Rho))
}

fn label(v: f64) -> String {
    format!("{v}")
}

fn gen(common: &Common, m: Option<f64>, rho: Option<f64>) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let init = initial_curve(&run.config, neck_arg(m, rho)).usage()?;
    let mut files = BTreeMap::new();
    run.write("initial.csv", &curve_csv(init.graph.nodes()), &mut files)?;
    let mut body = json!({ "nodes": init.graph.len() });
    if let Some(j) = &init.joined {
        body["join"] = json!({
            "m_achieved": j.m_achieved,
            "rho": j.rho,
            "arc_center": j.arc_center,
            "arc_radius": j.arc_radius,
            "f_m_domain": j.f_m_domain,
            "tangent_mismatch": j.tangent_mismatch,
        });
    }
    let hash = run.finish("gen", body, files)?;
    println!("wrote {} ({} nodes), manifest {hash}", run.out.join("initial.csv").display(), init.graph.len());
    Ok(())
}

/// Writes a trace directory under `run.out/sub` and returns its manifest
/// hash.
fn write_trace_dir(run: &Run, sub: &str, command: &str, trace: &FlowTrace, extra: Value) -> Result<String, Fail> {
    let dir = run.out.join(sub);
    let manifest = write_trace(&dir, trace).failure()?;
    let mut body = extra;
    body["trace"] = serde_json::to_value(&manifest).unwrap();
    body["command"] = json!(command);
    body["config_hash"] = json!(run.config_hash);
    let text = canonical_json(&body);
    write_file(&dir.join("manifest.json"), &text).failure()?;
    Ok(sha256_hex(text.as_bytes()))
}

fn evolve_cmd(common: &Common, input: Option<&Path>, m: Option<f64>) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let (graph, source) = match input {
        Some(p) => {
            if !p.exists() {
                return Err(anyhow!("input curve {} does not exist", p.display())).usage();
            }
            (read_profile(p).usage()?, json!(p.display().to_string()))
        }
        None => (initial_curve(&run.config, m.map(NeckParam::M)).usage()?.graph, json!("config")),
    };
    let trace = evolve(&graph, &run.config.flow, |_| false).usage()?;
    let dir = run.out.clone();
    let manifest = write_trace(&dir, &trace).failure()?;
    let files = manifest.files.clone();
    let body = json!({ "input": source, "trace": manifest });
    let hash = run.finish("evolve", body, files)?;
    println!(
        "{} snapshots, {} events, extinction {:?}; manifest {hash}",
        trace.snapshots.len(),
        trace.events.len(),
        trace.extinction_time
    );
    print!("{}", trace.event_log());
    if let Some(f) = &trace.failure {
        return Err(anyhow!("flow blew up at t = {}: {}", f.t, f.reason)).failure();
    }
    Ok(())
}

fn classify_cmd(common: &Common, m: f64) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let result = classify(&run.config.pancake, m, &run.config.shoot_config());
    let c = match result {
        Err(e @ ShootError::Join(_)) => return Err(e).usage(),
        other => other.failure()?,
    };
    let mut files = BTreeMap::new();
    let name = format!("classify_{}.json", label(m));
    run.write(&name, &canonical_json(&c), &mut files)?;
    run.finish("classify", json!({ "m": m, "label": c.label.as_str() }), files)?;
    println!("m = {m}: {}", c.label.as_str());
    Ok(())
}

fn shoot_files(run: &Run, r: &ShootResult, sub: &str, files: &mut BTreeMap<String, String>) -> Result<(), Fail> {
    run.write(&format!("shoot_{}.json", label(r.s)), &canonical_json(r), files)?;
    if let Some(trace) = r.trace() {
        let h = write_trace_dir(run, sub, "shoot", trace, json!({ "s": r.s }))?;
        files.insert(format!("{sub}/manifest.json"), h);
    }
    Ok(())
}

fn shoot_cmd(common: &Common) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let r = build_old_flow_for(&run.config.pancake, &run.config.shoot_config()).failure()?;
    let mut files = BTreeMap::new();
    shoot_files(&run, &r, "mbar", &mut files)?;
    let width = r.bracket.1 - r.bracket.0;
    run.finish(
        "shoot",
        json!({ "s": r.s, "bracket_width": width, "m_star": r.m_star, "classifications": r.classifications }),
        files,
    )?;
    println!(
        "s = {}: bracket {:?} (width {width:.3e}) after {} classifications, m* = {}",
        r.s, r.bracket, r.classifications, r.m_star
    );
    Ok(())
}

/// Builds the family and splits it into successes and per-`s` errors.
/// Family results plus the per-`s` failures.
type Family = (Vec<ShootResult>, Vec<(f64, String)>);

fn family(run: &Run) -> Result<Family, Fail> {
    let cfg = run.config.shoot_config();
    let all = build_family(&run.config.schedule, &cfg, run.threads()?).failure()?;
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (s, r) in run.config.schedule.s.iter().zip(all) {
        match r {
            Ok(r) => ok.push(r),
            Err(e) => errors.push((*s, e.to_string())),
        }
    }
    Ok((ok, errors))
}

fn stack_cmd(common: &Common) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let (results, errors) = family(&run)?;
    let mut files = BTreeMap::new();
    let mut rows = Vec::new();
    for r in &results {
        shoot_files(&run, r, &format!("stack_{}", label(r.s)), &mut files)?;
        let old = r.old_flow.as_ref().expect("family results carry old flows");
        rows.push(json!({
            "s": r.s,
            "girth": r.girth,
            "m_star": r.m_star,
            "m_bar": old.m_bar,
            "t_threshold": old.t_threshold,
            "corrections": old.corrections.len(),
            "slice_passes": old.slice.passes(),
        }));
        println!(
            "s = {}: m* = {:.6}, T = {:.3}, {} corrections, slice ok = {}",
            r.s,
            r.m_star,
            old.t_threshold,
            old.corrections.len(),
            old.slice.passes()
        );
    }
    let errs: Vec<Value> = errors.iter().map(|(s, e)| json!({ "s": s, "error": e })).collect();
    run.finish("stack", json!({ "runs": rows, "errors": errs }), files)?;
    if let Some((s, e)) = errors.first() {
        return Err(anyhow!("stack failed at s = {s}: {e}")).failure();
    }
    Ok(())
}

fn study_cmd(common: &Common) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let (results, errors) = family(&run)?;
    if let Some((s, e)) = errors.first() {
        return Err(anyhow!("old flow failed at s = {s}: {e}")).failure();
    }
    let cfg = run.config.shoot_config();
    let table = convergence_study(&results, &run.config.study.window, &run.config.study.times).usage()?;
    let necks = neck_boundedness_check(&results, cfg.band_abs());
    let existence = results
        .iter()
        .map(|r| existence_time_check(r, &cfg).map(|e| json!({ "s": r.s, "report": e })))
        .collect::<Result<Vec<_>, _>>()
        .failure()?;
    let mut files = BTreeMap::new();
    let doc = json!({
        "convergence": table,
        "convergence_non_increasing": table.is_non_increasing(),
        "necks": necks,
        "existence": existence,
    });
    run.write("study.json", &canonical_json(&doc), &mut files)?;
    run.finish(
        "study",
        json!({ "convergence_non_increasing": table.is_non_increasing(), "necks_pass": necks.passes }),
        files,
    )?;
    for row in &table.rows {
        println!("pair ({}, {}): cauchy {:?}", row.i, row.j, row.cauchy);
    }
    println!("neck spans within band: {}", necks.passes);
    Ok(())
}

fn diagnose_cmd(common: &Common, trace_dir: Option<&Path>) -> Result<(), Fail> {
    let run = Run::new(common)?;
    let trace = match trace_dir {
        Some(d) => {
            if !d.join("manifest.json").exists() {
                return Err(anyhow!("{} is not a trace directory", d.display())).usage();
            }
            read_trace(d).usage()?
        }
        None => {
            let init = initial_curve(&run.config, None).usage()?;
            evolve(&init.graph, &run.config.flow, |_| false).usage()?
        }
    };
    let girth = trace.initial.max_height();
    let cs: Vec<f64> = run.config.diagnostics.c_fractions.iter().map(|f| f * girth).collect();
    let series = extract_series(&trace, &run.config.diagnostics.barriers, &cs);
    let w_slab = series.width.iter().copied().fold(0.0, f64::max);
    let mut checks = Vec::new();
    let mut violations = series.violations.clone();
    for &c in &cs {
        match area_rate_check(&series, c, w_slab, trace.config.n) {
            Ok(chk) => {
                violations.extend(chk.violations.iter().cloned());
                checks.push(json!({ "c": c, "check": chk }));
            }
            Err(e) => checks.push(json!({ "c": c, "inapplicable": e.to_string() })),
        }
    }
    let mut files = BTreeMap::new();
    let doc = json!({ "series": series, "area_checks": checks, "violations": violations });
    run.write("diagnostics.json", &canonical_json(&doc), &mut files)?;
    run.write("series.csv", &series.to_csv(), &mut files)?;
    run.finish("diagnose", json!({ "violations": violations.len() }), files)?;
    println!("{} snapshots, {} violations", series.times.len(), violations.len());
    for v in &violations {
        println!("  t = {}: {} ({})", v.t, v.law, v.magnitude);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Gen { common, m, rho } => gen(common, *m, *rho),
        Command::Evolve { common, input, m } => evolve_cmd(common, input.as_deref(), *m),
        Command::Classify { common, m } => classify_cmd(common, *m),
        Command::Shoot { common } => shoot_cmd(common),
        Command::Stack { common } => stack_cmd(common),
        Command::Study { common } => study_cmd(common),
        Command::Diagnose { common, trace } => diagnose_cmd(common, trace.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail { code, err }) => {
            // Library errors already embed their source in the message.
            let mut msg = err.to_string();
            for cause in err.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
