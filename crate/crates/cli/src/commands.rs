use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use deceptra::belief::{build, AugConfig, InitialBelief, Mode};
use deceptra::dot::{export_dot, mdp_to_dot};
use deceptra::experiments::{illustrative_model, layout_robust_violations, render_markdown, replicate_figs, table1};
use deceptra::gridworld::{benchmark_scenario, Coverage, ScenarioFile, SensorKind};
use deceptra::mdp::{Mdp, ObservationModel, ReachAvoidObjective};
use deceptra::model_file::{Model, ModelFile};
use deceptra::planner::{ssp_refine, synthesize_from, StrategyFile};
use deceptra::sim::{check_theorem, export_trace_csv, simulate_many, CheckConfig, Selection};
use deceptra::{asw, AugmentedMdp};

use crate::{AugArgs, BeliefArg, Command, ConfigArg, ModeArg, ObjectiveArg, ScenarioCommand, SensorArg};

/// Runs a subcommand; `Ok(false)` means it completed but found violations,
/// counterexamples or diffs.
pub fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Validate { model } => validate(&model),
        Command::Asw { model, objective, dot } => asw_cmd(&model, objective, dot.as_deref()),
        Command::BuildAug { aug, dot, json } => build_aug(&aug, dot.as_deref(), json.as_deref()),
        Command::Synthesize {
            aug,
            report,
            strategy,
            dot,
        } => synthesize(&aug, report.as_deref(), strategy.as_deref(), dot.as_deref()),
        Command::Scenario {
            kind:
                ScenarioCommand::Grid {
                    config,
                    sensor,
                    p,
                    spec,
                    out,
                },
        } => scenario_grid(config, sensor, p, spec.as_deref(), &out),
        Command::Simulate {
            strategy,
            model,
            runs,
            seed,
            max_steps,
            ssp,
            csv,
        } => simulate(&strategy, model.as_deref(), runs, seed, max_steps, ssp, csv.as_deref()),
        Command::Check { aug, runs, depth, seed } => check(&aug, runs, depth, seed),
        Command::Table1 {
            p,
            markdown,
            report,
            timings,
        } => table1_cmd(p, markdown.as_deref(), report.as_deref(), timings),
        Command::ReplicateFigs {
            model,
            initial_belief,
            invisible_any_action,
        } => replicate(model.as_deref(), initial_belief, invisible_any_action),
    }
}

fn load_model(path: &Path) -> Result<Model> {
    Model::load(path).with_context(|| format!("loading {}", path.display()))
}

fn load_valid(path: &Path) -> Result<Model> {
    let model = load_model(path)?;
    model.ensure_valid()?;
    Ok(model)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn validate(path: &Path) -> Result<bool> {
    let model = load_model(path)?;
    let violations = model.validate();
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!(
            "ok: {} states, {} actions",
            model.mdp.num_states(),
            model.mdp.num_actions()
        );
    }
    Ok(violations.is_empty())
}

fn asw_cmd(path: &Path, which: ObjectiveArg, dot: Option<&Path>) -> Result<bool> {
    let model = load_valid(path)?;
    let m = &model.mdp;
    let obj = match which {
        ObjectiveArg::User => model.user()?,
        ObjectiveArg::Attacker => model.attacker()?,
    };
    let r = asw(m, obj);
    let allowed: serde_json::Map<String, serde_json::Value> = r
        .region
        .iter()
        .map(|s| {
            let acts: Vec<&str> = r.allowed(s).iter().map(|&a| m.action_name(a)).collect();
            (m.state_name(s).to_string(), acts.into())
        })
        .collect();
    let levels: Vec<Vec<&str>> = r
        .levels
        .iter()
        .map(|l| l.iter().map(|s| m.state_name(s)).collect())
        .collect();
    let out = serde_json::json!({
        "region": r.region.iter().map(|s| m.state_name(s)).collect::<Vec<_>>(),
        "levels": levels,
        "allowed": allowed,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(p) = dot {
        write(p, &mdp_to_dot(m, &r.region, &[m.initial()]))?;
    }
    Ok(true)
}

fn aug_config(model: &Model, belief: Option<BeliefArg>, any_action: bool) -> AugConfig {
    AugConfig {
        initial_belief: match belief {
            Some(BeliefArg::Singleton) => InitialBelief::Singleton,
            Some(BeliefArg::ObsClass) => InitialBelief::ObservationClass,
            None => model.initial_belief.clone(),
        },
        invisible_any_action: any_action,
    }
}

fn observation(model: &Model, mode: Option<ModeArg>) -> ObservationModel {
    match mode {
        Some(ModeArg::Visible) => model.obs.with_action_visibility(true),
        Some(ModeArg::Invisible) => model.obs.with_action_visibility(false),
        None => model.obs.clone(),
    }
}

fn build_from(model: &Model, obs: &ObservationModel, cfg: &AugConfig) -> Result<(deceptra::AswResult, AugmentedMdp)> {
    let m = &model.mdp;
    let user = asw(m, model.user()?);
    let am = build(m, obs, &user, model.attacker()?, cfg, &[m.initial()])?;
    Ok((user, am))
}

/// Model-file spelling of an augmented state name: `2|{2,3}` becomes `2@[2;3]`.
fn file_name(name: &str) -> String {
    name.replace('|', "@")
        .replace('{', "[")
        .replace('}', "]")
        .replace(',', ";")
}

/// The augmented model in the model-file format: fully observed, with the
/// attacker's lifted objective.
fn aug_to_file(am: &AugmentedMdp) -> Result<ModelFile> {
    let src = &am.mdp;
    let names: Vec<String> = (0..am.len()).map(|x| file_name(am.name(x))).collect();
    let mut m = Mdp::new(names.clone(), src.action_names().to_vec(), src.initial())?;
    for s in src.states() {
        for &a in src.enabled(s) {
            m.enable(s, a);
        }
    }
    for (s, a, row) in src.rows() {
        m.set_transition(s, a, row.to_vec());
    }
    let visible = am.mode == Mode::Visible;
    let lifted = ReachAvoidObjective::new(am.unsafe_states.clone(), am.target.clone());
    let mut file = Model {
        mdp: m,
        obs: ObservationModel::full(am.len(), visible),
        user: None,
        attacker: Some(lifted),
        initial_belief: InitialBelief::Singleton,
        initial_groups: Vec::new(),
    }
    .to_file();
    file.observation.classes = names.into_iter().map(|n| vec![n]).collect();
    Ok(file)
}

fn build_aug(args: &AugArgs, dot: Option<&Path>, json: Option<&Path>) -> Result<bool> {
    let model = load_valid(&args.model)?;
    let obs = observation(&model, args.mode);
    let cfg = aug_config(&model, args.initial_belief, args.invisible_any_action);
    let (_, am) = build_from(&model, &obs, &cfg)?;
    let solved = asw(&am.mdp, &am.objective());
    println!(
        "{}",
        serde_json::json!({
            "mode": am.mode,
            "initial": am.name(am.initial()),
            "aug_size": am.len(),
            "asw_size": solved.region.len(),
        })
    );
    if let Some(p) = dot {
        write(p, &export_dot(&am, &solved.region))?;
    }
    if let Some(p) = json {
        write(p, &aug_to_file(&am)?.to_json()?)?;
    }
    Ok(true)
}

fn synthesize(args: &AugArgs, report: Option<&Path>, strategy: Option<&Path>, dot: Option<&Path>) -> Result<bool> {
    let model = load_valid(&args.model)?;
    let obs = observation(&model, args.mode);
    let cfg = aug_config(&model, args.initial_belief, args.invisible_any_action);
    let m = &model.mdp;
    let syn = synthesize_from(m, &obs, model.user()?, model.attacker()?, &cfg, &[m.initial()])?;
    let ssp = if syn.strategy.is_empty() {
        None
    } else {
        Some(ssp_refine(&syn.aug, &syn.strategy)?)
    };
    let mut summary = serde_json::to_value(&syn.report)?;
    summary["mode"] = serde_json::to_value(syn.aug.mode)?;
    summary["initial_wins"] = syn.root_wins(0).into();
    // wall times vary between runs; keep stdout reproducible
    let obj = summary.as_object_mut().expect("object");
    obj.remove("build_seconds");
    obj.remove("solve_seconds");
    println!("{summary}");
    if let Some(p) = report {
        write(p, &format!("{}\n", serde_json::to_string_pretty(&syn.report)?))?;
    }
    if let Some(p) = strategy {
        let model_path = fs::canonicalize(&args.model).unwrap_or_else(|_| args.model.clone());
        let file = StrategyFile::from_strategy(
            &syn.aug,
            &syn.strategy,
            ssp.as_ref(),
            &cfg,
            Some(model_path.display().to_string()),
        );
        write(p, &format!("{}\n", serde_json::to_string_pretty(&file)?))?;
    }
    if let Some(p) = dot {
        write(p, &export_dot(&syn.aug, &syn.attacker.region))?;
    }
    Ok(true)
}

fn scenario_grid(
    config: Option<ConfigArg>,
    sensor: SensorArg,
    p: f64,
    spec: Option<&Path>,
    out: &Path,
) -> Result<bool> {
    let sc = match (config, spec) {
        (_, Some(spec)) => ScenarioFile::load(spec)
            .with_context(|| format!("loading {}", spec.display()))?
            .build()?,
        (Some(c), None) => {
            let coverage = match c {
                ConfigArg::A => Coverage::A,
                ConfigArg::B => Coverage::B,
                ConfigArg::C => Coverage::C,
            };
            let kind = match sensor {
                SensorArg::Boolean => SensorKind::Boolean,
                SensorArg::Precise => SensorKind::Precise,
            };
            benchmark_scenario(coverage, kind, p)?
        }
        (None, None) => bail!("either --config or --spec is required"),
    };
    sc.emit_model(out)?;
    println!(
        "wrote {} ({} states, {} observation classes)",
        out.display(),
        sc.model.mdp.num_states(),
        sc.model.obs.num_classes()
    );
    Ok(true)
}

fn csv_path(base: &Path, seed: u64, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{seed}"),
    };
    base.with_file_name(name)
}

fn simulate(
    strategy: &Path,
    model: Option<&Path>,
    runs: usize,
    seed: u64,
    max_steps: usize,
    use_ssp: bool,
    csv: Option<&Path>,
) -> Result<bool> {
    let text = fs::read_to_string(strategy).with_context(|| format!("reading {}", strategy.display()))?;
    let file: StrategyFile = serde_json::from_str(&text)?;
    let model_path = match (model, &file.model) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => bail!("the strategy file names no model; pass --model"),
    };
    let model = load_valid(&model_path)?;
    let obs = model.obs.with_action_visibility(file.mode == Mode::Visible);
    let cfg = AugConfig {
        initial_belief: match file.initial_belief.as_str() {
            "explicit" => model.initial_belief.clone(),
            other => InitialBelief::parse(other)?,
        },
        invisible_any_action: file.invisible_any_action,
    };
    let (_, am) = build_from(&model, &obs, &cfg)?;
    let (strat, ssp) = file.resolve(&am)?;
    let sel = match (&ssp, use_ssp) {
        (Some(actions), true) => Selection::Ssp(actions),
        (None, true) => bail!("the strategy file carries no SSP actions"),
        (_, false) => Selection::Uniform,
    };
    let traces = simulate_many(&am, &strat, sel, seed, runs, max_steps)?;
    let mut all_reached = true;
    for t in &traces {
        let status = t.status();
        all_reached &= status == deceptra::sim::Status::ReachedTarget;
        println!(
            "{}",
            serde_json::json!({"seed": t.seed, "status": status, "steps": t.steps()})
        );
        if let Some(base) = csv {
            write(&csv_path(base, t.seed, runs > 1), &export_trace_csv(t))?;
        }
    }
    Ok(all_reached)
}

fn check(args: &AugArgs, runs: usize, depth: usize, seed: u64) -> Result<bool> {
    let model = load_valid(&args.model)?;
    let obs = observation(&model, args.mode);
    let cfg = aug_config(&model, args.initial_belief, args.invisible_any_action);
    let m = &model.mdp;
    let syn = synthesize_from(m, &obs, model.user()?, model.attacker()?, &cfg, &[m.initial()])?;
    if !syn.root_wins(0) {
        println!("{}", serde_json::json!({"mode": syn.aug.mode, "initial_wins": false}));
        return Ok(true);
    }
    let check_cfg = CheckConfig {
        runs,
        max_len: depth,
        seed,
        ..CheckConfig::default()
    };
    let report = check_theorem(m, &obs, &syn.user, &syn.aug, &syn.strategy, &check_cfg)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(report.passed())
}

fn table1_cmd(p: f64, markdown: Option<&Path>, report: Option<&Path>, timings: bool) -> Result<bool> {
    let results = table1(p, timings)?;
    let mut exact = true;
    for r in &results {
        println!("{}", r.comparison);
        exact &= r.comparison.matches();
    }
    let robust = layout_robust_violations(&results);
    if robust.is_empty() {
        println!("layout-robust inclusions: hold");
    } else {
        for v in &robust {
            println!("layout-robust inclusion violated: {v}");
        }
    }
    if let Some(path) = markdown {
        write(path, &render_markdown(&results))?;
    }
    if let Some(path) = report {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        for r in &results {
            writeln!(f, "{}", serde_json::to_string(&r.report)?)?;
        }
    }
    Ok(exact && robust.is_empty())
}

fn replicate(model: Option<&Path>, belief: Option<BeliefArg>, any_action: bool) -> Result<bool> {
    let model = match model {
        Some(p) => load_valid(p)?,
        None => illustrative_model(),
    };
    let cfg = aug_config(&model, belief, any_action);
    let mut ok = true;
    for check in replicate_figs(&model, &cfg)? {
        if check.passed {
            println!("{} ({}): pass", check.figure, check.mode);
        } else {
            println!("{} ({}): FAIL", check.figure, check.mode);
            print!("{}", check.diff);
            ok = false;
        }
    }
    Ok(ok)
}
