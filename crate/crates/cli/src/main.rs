use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cait_core::equivalence::check_algebraic_laws;
use cait_core::meta::PropertyReport;
use cait_core::models::{check_runtime_properties, check_system_equality, ScenarioConfig, Variant};
use cait_core::{
    barbs, build_lts, canonicalize, check_harmony, check_time_properties, check_well_formed, expansion,
    free_channels, parse_model, print_network, rd_bound, reductions, structural_hash, update_sensor,
    weak_bisimilar_across, EquivalenceVerdict, ModelUniverse, Network,
};

#[derive(Parser)]
#[command(name = "cait", version, about = "Check, run and compare timed IoT network models")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Give up after exploring this many states.
    #[arg(long, global = true, default_value_t = 200_000)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and run the static checks.
    Check { file: PathBuf },
    /// Follow reductions from the initial state.
    Reduce {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// One `<label> :: <hash>` line per step.
        #[arg(long)]
        trace: bool,
        /// Print every intermediate state.
        #[arg(long)]
        print: bool,
        /// Choose each step (and sensor updates) from a menu on stdin.
        #[arg(long)]
        interactive: bool,
    },
    /// Build the labelled transition system.
    Lts {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Extensional)]
        mode: ModeArg,
        #[arg(long, value_enum)]
        export: Option<Export>,
    },
    /// Weak bisimilarity of two models.
    Bisim { left: PathBuf, right: PathBuf },
    /// Does the first model expand the second?
    Expand { left: PathBuf, right: PathBuf },
    /// Time properties, harmony and the well-timedness bound.
    Props {
        file: PathBuf,
        #[arg(long)]
        harmony: bool,
        #[arg(long)]
        time: bool,
        #[arg(long)]
        bound: bool,
    },
    /// Check the bundled algebraic law instances.
    Laws,
    /// The smart-home case study.
    SmartHome {
        #[arg(long, value_enum, default_value_t = VariantArg::Proximity)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = SmartCheck::Props)]
        check: SmartCheck,
        #[arg(long, default_value_t = 20)]
        theta: i64,
        /// Also compare the full systems, not only the light subsystems.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Intensional,
    Extensional,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Graph,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Proximity,
    Gps,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmartCheck {
    Props,
    Equiv,
}

fn load(path: &Path) -> Result<(ModelUniverse, Network)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&text).with_context(|| format!("in {}", path.display()))
}

fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        print!("{}", text());
    }
}

fn check(cli: &Cli, file: &Path) -> Result<bool> {
    let (u, net) = load(file)?;
    let violations: Vec<String> = check_well_formed(&net, &u).iter().map(|v| v.to_string()).collect();
    let mut problems = violations.clone();
    if let Err(e) = net.check_closed() {
        problems.push(e.to_string());
    }
    for node in &net.nodes {
        if let Err(e) = node.process.check_time_guarded() {
            problems.push(format!("node {}: {e}", node.name));
        }
    }
    let bound = rd_bound(&net).ok();
    let shown: Vec<String> = barbs(&net).iter().map(|b| b.to_string()).collect();
    let free: Vec<String> = free_channels(&net).iter().map(|c| c.to_string()).collect();
    emit(
        cli.json,
        json!({
            "nodes": net.nodes.len(),
            "problems": problems,
            "rd_bound": bound,
            "barbs": shown,
            "free_channels": free,
        }),
        || {
            let mut s = format!("{} nodes\n", net.nodes.len());
            if let Some(b) = bound {
                s += &format!("rd bound {b}\n");
            }
            s += &format!("barbs: {}\n", shown.join(" "));
            s += &format!("free channels: {}\n", free.join(" "));
            for p in &problems {
                s += &format!("problem: {p}\n");
            }
            s += if problems.is_empty() { "ok\n" } else { "failed\n" };
            s
        },
    );
    Ok(problems.is_empty())
}

fn sensor_updates(net: &Network, u: &ModelUniverse) -> Vec<(String, Network)> {
    let mut out = Vec::new();
    for (s, decl) in u.sensors() {
        for h in u.locations() {
            for v in decl.domain.values() {
                if let Ok(m) = update_sensor(net, u, s, h, v) {
                    if &m != net {
                        out.push((format!("{s}@{h} := {v}"), m));
                    }
                }
            }
        }
    }
    out
}

fn ask(options: &[(String, Network)]) -> Result<Option<usize>> {
    let stdin = io::stdin();
    loop {
        for (i, (l, _)) in options.iter().enumerate() {
            println!("  [{i}] {l}");
        }
        print!("choice (q to stop): ");
        io::stdout().flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            return Ok(None);
        }
        let line = line.trim();
        if line == "q" {
            return Ok(None);
        }
        match line.parse::<usize>() {
            Ok(i) if i < options.len() => return Ok(Some(i)),
            _ => println!("pick a number between 0 and {}", options.len().saturating_sub(1)),
        }
    }
}

fn reduce(cli: &Cli, file: &Path, steps: usize, trace: bool, print: bool, interactive: bool) -> Result<bool> {
    let (u, net) = load(file)?;
    let mut state = canonicalize(&net);
    let mut taken = Vec::new();
    for _ in 0..steps {
        let mut options: Vec<(String, Network)> =
            reductions(&state, &u)?.into_iter().map(|(l, m)| (l.to_string(), m)).collect();
        let chosen = if interactive {
            println!("{}", print_network(&state));
            options.extend(sensor_updates(&state, &u));
            match ask(&options)? {
                Some(i) => i,
                None => break,
            }
        } else if options.is_empty() {
            break;
        } else {
            0
        };
        let (label, next) = options.swap_remove(chosen);
        state = next;
        if trace && !cli.json {
            println!("{label} :: {:016x}", structural_hash(&state));
        }
        if print && !cli.json {
            println!("{}", print_network(&state));
        }
        taken.push(json!({"label": label, "hash": format!("{:016x}", structural_hash(&state))}));
    }
    emit(cli.json, json!({"steps": taken, "state": print_network(&state)}), || {
        format!("after {} steps:\n{}\n", taken.len(), print_network(&state))
    });
    Ok(true)
}

fn lts(cli: &Cli, file: &Path, mode: ModeArg, export: Option<Export>) -> Result<bool> {
    let (u, net) = load(file)?;
    let mode = match mode {
        ModeArg::Intensional => cait_core::Mode::Intensional,
        ModeArg::Extensional => cait_core::Mode::Extensional,
    };
    let ts = build_lts(&net, &u, mode, cli.budget)?;
    match export {
        Some(Export::Graph) => print!("{}", ts.export_graph()),
        Some(Export::Dot) => print!("{}", ts.export_dot()),
        None => emit(
            cli.json,
            json!({"states": ts.num_states(), "edges": ts.num_edges()}),
            || format!("{} states, {} edges\n", ts.num_states(), ts.num_edges()),
        ),
    }
    Ok(true)
}

fn verdict_text(v: &EquivalenceVerdict) -> String {
    let mut s = match v.result {
        cait_core::Outcome::Bisimilar => "bisimilar\n".to_string(),
        cait_core::Outcome::Distinct => "distinct\n".to_string(),
    };
    s += &format!(
        "{} + {} states, {} blocks after {} rounds\n",
        v.stats.left_states, v.stats.right_states, v.stats.blocks, v.stats.rounds
    );
    if !v.witness.is_empty() {
        let moves: Vec<String> = v.witness.iter().map(|m| m.to_string()).collect();
        s += &format!("distinguishing play: {}\n", moves.join(" "));
    }
    s
}

fn bisim(cli: &Cli, left: &Path, right: &Path) -> Result<bool> {
    let (ul, l) = load(left)?;
    let (ur, r) = load(right)?;
    let v = weak_bisimilar_across(&l, &ul, &r, &ur, cli.budget)?;
    emit(cli.json, serde_json::to_value(&v)?, || verdict_text(&v));
    Ok(v.is_bisimilar())
}

fn expand(cli: &Cli, left: &Path, right: &Path) -> Result<bool> {
    let (ul, l) = load(left)?;
    let (ur, r) = load(right)?;
    if ul.to_decl() != ur.to_decl() {
        bail!("expansion needs both models to declare the same universe");
    }
    let holds = expansion(&r, &l, &ul, cli.budget)?;
    emit(cli.json, json!({"expands": holds}), || {
        format!("{} {} {}\n", left.display(), if holds { "expands" } else { "does not expand" }, right.display())
    });
    Ok(holds)
}

fn report_table(reports: &[PropertyReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let status = if r.passed() { "ok" } else { "FAILED" };
        s += &format!("{:<44} {:>8} states  {status}\n", r.property, r.states);
        for c in r.counterexamples.iter().take(5) {
            s += &format!("  {}: {}\n    in {}\n", c.check, c.explanation, c.state.replace('\n', "\n       "));
        }
        if r.counterexamples.len() > 5 {
            s += &format!("  ... {} more\n", r.counterexamples.len() - 5);
        }
    }
    s
}

fn props(cli: &Cli, file: &Path, harmony: bool, time: bool, bound: bool) -> Result<bool> {
    let (u, net) = load(file)?;
    let all = !(harmony || time || bound);
    let mut reports = Vec::new();
    if all || time {
        reports.push(check_time_properties(&net, &u, cli.budget)?);
    }
    if all || harmony {
        reports.push(check_harmony(&net, &u, cli.budget)?);
    }
    let rd = if all || bound { Some(rd_bound(&net)?) } else { None };
    let passed = reports.iter().all(|r| r.passed());
    emit(cli.json, json!({"reports": reports, "rd_bound": rd}), || {
        let mut s = report_table(&reports);
        if let Some(rd) = rd {
            s += &format!("rd bound of the initial state: {rd}\n");
        }
        s
    });
    Ok(passed)
}

fn laws(cli: &Cli) -> Result<bool> {
    let reports = check_algebraic_laws(cli.budget)?;
    let passed = reports.iter().all(|r| r.passed());
    emit(cli.json, serde_json::to_value(&reports)?, || {
        let mut s = String::new();
        for r in &reports {
            let status = if r.passed() { "ok" } else { "FAILED" };
            s += &format!("law {} ({:?}): {}  {status}\n", r.law, r.kind, r.statement);
            if !r.counterpart_distinct {
                s += "  the side-condition-violating counterpart is not told apart\n";
            }
        }
        s
    });
    Ok(passed)
}

fn smart_home(cli: &Cli, variant: VariantArg, what: SmartCheck, theta: i64, full: bool) -> Result<bool> {
    let variant = match variant {
        VariantArg::Proximity => Variant::Proximity,
        VariantArg::Gps => Variant::Gps,
    };
    let cfg = ScenarioConfig {
        theta,
        ..ScenarioConfig::with_variant(variant)
    };
    match what {
        SmartCheck::Props => {
            let reports = check_runtime_properties(&cfg, cli.budget)?;
            let passed = reports.iter().all(|r| r.passed());
            emit(cli.json, serde_json::to_value(&reports)?, || report_table(&reports));
            Ok(passed)
        }
        SmartCheck::Equiv => {
            let eq = check_system_equality(&cfg, full, cli.budget)?;
            let passed = eq.lights.is_bisimilar() && eq.full.as_ref().is_none_or(|v| v.is_bisimilar());
            emit(cli.json, json!({"lights": eq.lights, "full": eq.full}), || {
                let mut s = format!("light subsystems: {}", verdict_text(&eq.lights));
                if let Some(v) = &eq.full {
                    s += &format!("full systems: {}", verdict_text(v));
                }
                s
            });
            Ok(passed)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Check { file } => check(cli, file),
        Command::Reduce {
            file,
            steps,
            trace,
            print,
            interactive,
        } => reduce(cli, file, *steps, *trace, *print, *interactive),
        Command::Lts { file, mode, export } => lts(cli, file, *mode, *export),
        Command::Bisim { left, right } => bisim(cli, left, right),
        Command::Expand { left, right } => expand(cli, left, right),
        Command::Props {
            file,
            harmony,
            time,
            bound,
        } => props(cli, file, *harmony, *time, *bound),
        Command::Laws => laws(cli),
        Command::SmartHome {
            variant,
            check,
            theta,
            full,
        } => smart_home(cli, *variant, *check, *theta, *full),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
