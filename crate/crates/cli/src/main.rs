//! `absplan` command line: place a swarm of airborne base stations, tune
//! antenna orientation and power, validate coverage with simulated mobile
//! users, run drop detection/recovery, and summarize deployment metrics.
//!
//! Exit codes: 0 success, 2 usage error, 3 input validation error,
//! 4 numerical failure.

#![allow(clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use absplan_core::geometry::{semi_random_init, Point2, Scene};
use absplan_core::interference::{
    coverage_mask, effective_sirs, jain_fairness, loss_weighted_aoi, sir_map,
};
use absplan_core::interop::{
    self, DeploymentDoc, DropReportDoc, ScenarioDoc, TrajectoryDoc, SCHEMA_VERSION,
};
use absplan_core::orient::{
    optimize_orient_power, OrientMethod, OrientPowerParams, OrientSchedule,
};
use absplan_core::placement::{aoi_satisfaction, optimize_placement};
use absplan_core::propagation::{
    compute_coverage_map, load_coverage_map, received_power, tx_bank, CoverageMap,
};
use absplan_core::resilience::{
    apply_recovery, build_recovery_schedule, detect_drops, received_power_series,
    recovery_trajectory, simulate_ue_track, RecoveryHyper, UeRegion, UeTrack,
};
use absplan_core::units::dbm_to_watts;

mod exit_code {
    pub const VALIDATION: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "absplan", version, about = "Airborne base-station deployment planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize hover positions and emit deployment + trajectory files.
    Place(PlaceArgs),
    /// Optimize antenna orientation and transmit power for a deployment.
    Orient(OrientArgs),
    /// Simulate mobile users per AOI and emit per-step SIR series.
    Validate(ValidateArgs),
    /// Detect coverage drops for a critical user and plan a recovery flight.
    Recover(RecoverArgs),
    /// Print an effective-SIR summary (mean, std, min, fairness).
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
struct PlaceArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Base RNG seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration cap override.
    #[arg(long)]
    iters: Option<usize>,
    /// Learning-rate override.
    #[arg(long)]
    lr: Option<f64>,
    /// Number of ABSs to deploy.
    #[arg(long, default_value_t = 10)]
    abs: usize,
    /// Independent runs with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Whole-map max-min fairness objective.
    Maxmin,
    /// Weighted per-AOI objective.
    Aoi,
}

#[derive(Debug, Args)]
struct OrientArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Deployment JSON produced by `place` (or edited by hand).
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
    /// Unused by the deterministic loop; accepted for interface symmetry.
    #[arg(long)]
    seed: Option<u64>,
    /// Epoch cap override.
    #[arg(long)]
    iters: Option<usize>,
    /// Learning-rate override.
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulation steps (1 s granularity by default).
    #[arg(long, default_value_t = 60)]
    steps: usize,
    /// Users simulated per AOI.
    #[arg(long, default_value_t = 50)]
    ues: usize,
    /// UE speed in m/s.
    #[arg(long, default_value_t = 1.4)]
    speed: f64,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Serving ABS id.
    #[arg(long, default_value_t = 0)]
    abs: u32,
    /// AOI index the critical UE roams in (ignored with --ue-track).
    #[arg(long, default_value_t = 0)]
    aoi: usize,
    #[arg(long, default_value_t = 60)]
    steps: usize,
    #[arg(long, default_value_t = 1.4)]
    speed: f64,
    /// Import the critical UE's trajectory instead of simulating one.
    #[arg(long)]
    ue_track: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    deployment: PathBuf,
    /// Use an imported coverage map instead of the built-in model.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Optional JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error wrapper carrying the process exit code.
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: exit_code::VALIDATION,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: exit_code::NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<interop::InteropError> for CliError {
    fn from(e: interop::InteropError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<absplan_core::geometry::GeometryError> for CliError {
    fn from(e: absplan_core::geometry::GeometryError) -> Self {
        match e {
            absplan_core::geometry::GeometryError::InfeasibleInit { .. } => {
                CliError::numerical(e.to_string())
            }
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<absplan_core::placement::PlacementError> for CliError {
    fn from(e: absplan_core::placement::PlacementError) -> Self {
        match e {
            absplan_core::placement::PlacementError::NonFiniteLoss { .. } => {
                CliError::numerical(e.to_string())
            }
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<absplan_core::orient::OrientError> for CliError {
    fn from(e: absplan_core::orient::OrientError) -> Self {
        CliError::numerical(e.to_string())
    }
}

impl From<absplan_core::interference::InterferenceError> for CliError {
    fn from(e: absplan_core::interference::InterferenceError) -> Self {
        CliError::numerical(e.to_string())
    }
}

impl From<absplan_core::resilience::ResilienceError> for CliError {
    fn from(e: absplan_core::resilience::ResilienceError) -> Self {
        CliError::numerical(e.to_string())
    }
}

impl From<absplan_core::propagation::PropagationError> for CliError {
    fn from(e: absplan_core::propagation::PropagationError) -> Self {
        CliError::validation(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Place(args) => cmd_place(args),
        Command::Orient(args) => cmd_orient(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Metrics(args) => cmd_metrics(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

fn load_inputs(
    scenario: &Path,
    deployment: &Path,
) -> Result<(ScenarioDoc, Scene, DeploymentDoc), CliError> {
    let doc = interop::load_scenario(scenario)?;
    let scene = doc.to_scene()?;
    let dep = interop::load_deployment(deployment)?;
    for a in &dep.abs {
        if !scene.contains([a.x_m, a.y_m]) {
            return Err(CliError::validation(format!(
                "ABS {} at ({}, {}) lies outside the scene extent",
                a.id, a.x_m, a.y_m
            )));
        }
    }
    Ok((doc, scene, dep))
}

// ---------------------------------------------------------------------------
// place
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct PlaceRunSummary {
    run: usize,
    seed: u64,
    satisfaction: f64,
    best_loss: f64,
    iterations: usize,
}

#[derive(serde::Serialize)]
struct PlaceSummary {
    schema_version: u32,
    runs: Vec<PlaceRunSummary>,
    mean_satisfaction: f64,
}

fn cmd_place(args: PlaceArgs) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::validation("--runs must be at least 1"));
    }
    if args.abs == 0 {
        return Err(CliError::validation("--abs must be at least 1"));
    }
    let doc = interop::load_scenario(&args.scenario)?;
    let scene = doc.to_scene()?;
    let aois = doc.to_aois()?;
    let mut hyper = doc.placement_hyper();
    if let Some(iters) = args.iters {
        hyper.max_iterations = iters;
    }
    if let Some(lr) = args.lr {
        hyper.learning_rate = lr;
    }
    let base_seed = args.seed.unwrap_or(doc.seed);
    ensure_out_dir(&args.out)?;

    let blocking = scene.blocking_buildings(hyper.c_b);
    let mut summaries = Vec::with_capacity(args.runs);
    for run in 0..args.runs {
        let seed = base_seed + run as u64;
        let init = semi_random_init(&scene, &blocking, args.abs, hyper.d_min, seed)?;
        let (final_pos, trace) = optimize_placement(&scene, &aois, &init, &hyper)?;
        let clamped: Vec<Point2> = final_pos.iter().map(|p| scene.clamp(*p)).collect();
        let satisfaction = aoi_satisfaction(&clamped, &aois)?;

        let params = OrientPowerParams::facing_down(args.abs, doc.rf.default_tx_power_dbm);
        let deployment = DeploymentDoc::from_params(&clamped, &params);
        let mut trajectories = TrajectoryDoc::new(1.0);
        for abs in 0..args.abs {
            let waypoints: Vec<Point2> = trace
                .waypoints(abs)
                .iter()
                .map(|p| scene.clamp(*p))
                .collect();
            trajectories.push_entity(format!("abs-{abs}"), &waypoints);
        }

        let suffix = if args.runs == 1 {
            String::new()
        } else {
            format!("_run{run}")
        };
        interop::save_deployment(&deployment, &args.out.join(format!("deployment{suffix}.json")))?;
        interop::save_trajectories(
            &trajectories,
            &args.out.join(format!("trajectory{suffix}.json")),
        )?;
        println!(
            "run {run}: seed {seed} satisfaction {satisfaction:.3} best loss {:.3} ({} iterations)",
            trace.best_loss(),
            trace.steps.len()
        );
        summaries.push(PlaceRunSummary {
            run,
            seed,
            satisfaction,
            best_loss: trace.best_loss(),
            iterations: trace.steps.len(),
        });
    }
    let mean = summaries.iter().map(|s| s.satisfaction).sum::<f64>() / summaries.len() as f64;
    let summary = PlaceSummary {
        schema_version: SCHEMA_VERSION,
        runs: summaries,
        mean_satisfaction: mean,
    };
    write_text(
        &args.out.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
    )?;
    println!("mean satisfaction over {} run(s): {mean:.3}", args.runs);
    Ok(())
}

// ---------------------------------------------------------------------------
// orient
// ---------------------------------------------------------------------------

fn cmd_orient(args: OrientArgs) -> Result<(), CliError> {
    let (doc, scene, dep) = load_inputs(&args.scenario, &args.deployment)?;
    let aois = doc.to_aois()?;
    let positions = dep.positions();
    let init = dep.orient_params();
    let prop_cfg = doc.propagation_config();
    let loss_cfg = doc.orient_loss_config();
    let (method, mut schedule) = match args.method {
        MethodArg::Maxmin => (OrientMethod::MaxMin, OrientSchedule::maxmin_default()),
        MethodArg::Aoi => (
            OrientMethod::WeightedAoi,
            OrientSchedule::weighted_aoi_default(),
        ),
    };
    if method == OrientMethod::WeightedAoi && aois.is_empty() {
        return Err(CliError::validation(
            "the aoi method needs at least one AOI in the scenario",
        ));
    }
    if let Some(iters) = args.iters {
        schedule.max_epochs = iters;
    }
    if let Some(lr) = args.lr {
        schedule.learning_rate = lr;
    }
    ensure_out_dir(&args.out)?;

    let (best, trace) = optimize_orient_power(
        &scene, &positions, &aois, method, &init, &schedule, &prop_cfg, &loss_cfg,
    )?;

    let deployment = DeploymentDoc::from_params(&positions, &best);
    interop::save_deployment(&deployment, &args.out.join("deployment_optimized.json"))?;

    let mut csv =
        String::from("epoch,loss,best_loss,learning_rate,min_effective_sir_db,mean_effective_sir_db\n");
    for e in &trace.epochs {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            e.epoch,
            e.loss,
            e.best_loss,
            e.learning_rate,
            e.min_effective_sir_db,
            e.mean_effective_sir_db
        )
        .unwrap();
    }
    write_text(&args.out.join("epochs.csv"), &csv)?;

    let last = trace.epochs.last().unwrap();
    println!(
        "{} epochs, final loss {:.4}, min effective SIR {:.3} dB, mean {:.3} dB",
        trace.epochs.len(),
        last.loss,
        last.min_effective_sir_db,
        last.mean_effective_sir_db
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let (doc, scene, dep) = load_inputs(&args.scenario, &args.deployment)?;
    let aois = doc.to_aois()?;
    if aois.is_empty() {
        return Err(CliError::validation("scenario has no AOIs to validate"));
    }
    if args.steps == 0 || args.ues == 0 {
        return Err(CliError::validation("--steps and --ues must be positive"));
    }
    let prop_cfg = doc.propagation_config();
    let loss_cfg = doc.orient_loss_config();
    let txs = tx_bank(
        &scene,
        &dep.positions(),
        &dep.orient_params().azimuths,
        &dep.orient_params().tilts,
        &dep.orient_params().powers_dbm,
    );
    let base_seed = args.seed.unwrap_or(doc.seed);
    ensure_out_dir(&args.out)?;

    // Per AOI, per step: mean over UEs of the serving-ABS SIR in dB.
    let mut per_aoi_series: Vec<Vec<f64>> = Vec::with_capacity(aois.len());
    let mut tracks_doc = TrajectoryDoc::new(1.0);
    for (k, aoi) in aois.iter().enumerate() {
        let mut sums = vec![0.0f64; args.steps];
        for u in 0..args.ues {
            let seed = base_seed
                .wrapping_add(1_000_003u64.wrapping_mul(k as u64))
                .wrapping_add(u as u64);
            let track = simulate_ue_track(
                &UeRegion::AoiSquare(*aoi),
                args.steps,
                args.speed,
                1.0,
                seed,
                &scene,
            )?;
            tracks_doc.push_entity(format!("ue-{k}-{u}"), &track.positions);
            for (t, pos) in track.positions.iter().enumerate() {
                let rx = [pos[0], pos[1], prop_cfg.rx_height_m];
                let powers: Vec<f64> = txs
                    .iter()
                    .map(|tx| received_power(&scene, tx, rx, &prop_cfg))
                    .collect();
                let total: f64 = powers.iter().sum();
                let p_serv = powers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sir = p_serv / (total - p_serv + loss_cfg.epsilon);
                sums[t] += 10.0 * sir.log10();
            }
        }
        per_aoi_series.push(sums.iter().map(|s| s / args.ues as f64).collect());
    }

    let mut csv = String::from("step");
    for k in 0..aois.len() {
        write!(csv, ",aoi{k}_mean_sir_db").unwrap();
    }
    csv.push('\n');
    for t in 0..args.steps {
        write!(csv, "{t}").unwrap();
        for series in &per_aoi_series {
            write!(csv, ",{}", series[t]).unwrap();
        }
        csv.push('\n');
    }
    write_text(&args.out.join("sir_per_step.csv"), &csv)?;
    interop::save_trajectories(&tracks_doc, &args.out.join("ue_tracks.json"))?;

    for (k, series) in per_aoi_series.iter().enumerate() {
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        println!("AOI {k}: mean serving SIR over {} steps = {mean:.3} dB", args.steps);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

fn cmd_recover(args: RecoverArgs) -> Result<(), CliError> {
    let (doc, scene, dep) = load_inputs(&args.scenario, &args.deployment)?;
    let aois = doc.to_aois()?;
    let prop_cfg = doc.propagation_config();
    let detector = doc.detector_config();
    let abs_entry = dep
        .abs
        .iter()
        .find(|a| a.id == args.abs)
        .ok_or_else(|| CliError::validation(format!("no ABS with id {} in deployment", args.abs)))?;
    let txs = tx_bank(
        &scene,
        &[[abs_entry.x_m, abs_entry.y_m]],
        &[abs_entry.azimuth_deg.to_radians()],
        &[abs_entry.tilt_deg.to_radians()],
        &[abs_entry.tx_power_dbm],
    );
    let tx = txs[0];
    ensure_out_dir(&args.out)?;

    let (track, ue_id) = match &args.ue_track {
        Some(path) => {
            let tdoc = interop::load_trajectories(path)?;
            let entity = tdoc
                .entities
                .first()
                .ok_or_else(|| CliError::validation("UE trajectory file has no entities"))?;
            let positions: Vec<Point2> = entity.points.iter().map(|p| [p.x_m, p.y_m]).collect();
            (
                UeTrack {
                    positions,
                    step_duration_s: tdoc.step_duration_s,
                },
                entity.id.clone(),
            )
        }
        None => {
            let aoi = aois.get(args.aoi).ok_or_else(|| {
                CliError::validation(format!("scenario has no AOI index {}", args.aoi))
            })?;
            let seed = args.seed.unwrap_or(doc.seed);
            let track = simulate_ue_track(
                &UeRegion::AoiSquare(*aoi),
                args.steps,
                args.speed,
                1.0,
                seed,
                &scene,
            )?;
            (track, format!("ue-{}", args.aoi))
        }
    };

    let before = received_power_series(&track, &tx, &scene, &prop_cfg);
    let events = detect_drops(&before, &detector);
    let report = DropReportDoc {
        schema_version: SCHEMA_VERSION,
        abs_id: args.abs,
        ue_id: ue_id.clone(),
        t_min_watts: detector.t_min_watts,
        c_min: detector.c_min,
        s_p: detector.s_p,
        events: events.iter().map(|e| (*e).into()).collect(),
    };
    interop::save_drop_report(&report, &args.out.join("drops.json"))?;

    if events.is_empty() {
        println!("no drops detected over {} steps", track.steps());
        return Ok(());
    }

    let hyper = RecoveryHyper {
        kappa_b: doc.placement_hyper().kappa_b,
        c_b: doc.placement_hyper().c_b,
        ..RecoveryHyper::default()
    };
    let mut after = before.clone();
    let mut flight: Vec<Point2> = vec![[abs_entry.x_m, abs_entry.y_m]; track.steps()];
    for event in &events {
        if event.duration() < 2 {
            continue;
        }
        let target = track.positions[event.t_mid()];
        let trajectory =
            recovery_trajectory([abs_entry.x_m, abs_entry.y_m], target, &scene, &hyper)?;
        let schedule = build_recovery_schedule(&trajectory, *event)?;
        after = apply_recovery(&track, &after, &schedule, &tx, &scene, &prop_cfg);
        // Flight plan: reaction into the drop window, hover, then the
        // return leg after the drop ends.
        for t in (event.t_start + 1)..event.t_end.min(track.steps()) {
            flight[t] = if t <= event.t_mid() {
                schedule.reaction[t - event.t_start - 1]
            } else {
                schedule.stationary
            };
        }
        for (j, p) in schedule.return_path.iter().enumerate() {
            let t = event.t_end + j;
            if t < flight.len() {
                flight[t] = *p;
            }
        }
        println!(
            "drop [{}..{}] (duration {}): recovery over {} waypoints, target ({:.1}, {:.1})",
            event.t_start,
            event.t_end,
            event.duration(),
            schedule.reaction.len(),
            target[0],
            target[1]
        );
    }

    let mut flight_doc = TrajectoryDoc::new(track.step_duration_s);
    flight_doc.push_entity(format!("abs-{}", args.abs), &flight);
    interop::save_trajectories(&flight_doc, &args.out.join("recovery_trajectory.json"))?;

    let mut ue_doc = TrajectoryDoc::new(track.step_duration_s);
    ue_doc.push_entity(ue_id, &track.positions);
    interop::save_trajectories(&ue_doc, &args.out.join("ue_track.json"))?;

    let mut csv = String::from("step,power_before_w,power_after_w\n");
    for t in 0..track.steps() {
        writeln!(csv, "{t},{},{}", before[t], after[t]).unwrap();
    }
    write_text(&args.out.join("power.csv"), &csv)?;

    let event = events[0];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let before_mean = mean(&before[event.t_start..=event.t_end.min(before.len() - 1)]);
    let after_mean = mean(&after[event.t_start..=event.t_end.min(after.len() - 1)]);
    println!(
        "first drop interval mean power: {before_mean:.3e} W before, {after_mean:.3e} W after ({:+.1} dB)",
        10.0 * (after_mean / before_mean).log10()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct MetricsOut {
    schema_version: u32,
    per_abs_effective_sir_db: Vec<f64>,
    mean_db: f64,
    std_dev_db: f64,
    min_db: f64,
    jain_fairness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_aoi_serving_abs: Option<Vec<ServingOut>>,
}

#[derive(serde::Serialize)]
struct ServingOut {
    aoi: usize,
    abs: usize,
    effective_sir_db: f64,
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let (doc, scene, dep) = load_inputs(&args.scenario, &args.deployment)?;
    let aois = doc.to_aois()?;
    let prop_cfg = doc.propagation_config();
    let loss_cfg = doc.orient_loss_config();
    let params = dep.orient_params();

    let map: CoverageMap = match &args.map {
        Some(path) => {
            let m = load_coverage_map(path)?;
            if m.n_abs != dep.abs.len() {
                return Err(CliError::validation(format!(
                    "coverage map holds {} transmitters, deployment has {}",
                    m.n_abs,
                    dep.abs.len()
                )));
            }
            m
        }
        None => {
            let txs = tx_bank(
                &scene,
                &dep.positions(),
                &params.azimuths,
                &params.tilts,
                &params.powers_dbm,
            );
            compute_coverage_map(&scene, &txs, &prop_cfg)
        }
    };

    let powers_w: Vec<f64> = params.powers_dbm.iter().map(|p| dbm_to_watts(*p)).collect();
    let sir = sir_map(&map, &powers_w, loss_cfg.epsilon);
    let threshold = prop_cfg.default_mask_threshold(&scene);
    let mask = coverage_mask(&map, threshold);
    let sirs = effective_sirs(&sir, &mask)?;

    let n = sirs.len() as f64;
    let mean = sirs.iter().sum::<f64>() / n;
    let var = sirs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = sirs.iter().copied().fold(f64::INFINITY, f64::min);
    let jain = jain_fairness(&sirs)?;

    println!("ABS   effective SIR (dB)");
    for (i, v) in sirs.iter().enumerate() {
        println!("{:<5} {v:.3}", i + 1);
    }
    println!("Average    {mean:.3}");
    println!("Std. Dev.  {:.3}", var.sqrt());
    println!("Minimum    {min:.3}");
    println!("Jain's     {jain:.3}");

    let serving = if aois.is_empty() {
        None
    } else {
        let w = loss_weighted_aoi(&sir, &mask, &aois, loss_cfg.beta_l, loss_cfg.temperature)?;
        let rows: Vec<ServingOut> = w
            .serving_abs()
            .iter()
            .enumerate()
            .map(|(k, (abs, v))| {
                println!("AOI {k}: serving ABS {} at {v:.3} dB", abs + 1);
                ServingOut {
                    aoi: k,
                    abs: *abs,
                    effective_sir_db: *v,
                }
            })
            .collect();
        Some(rows)
    };

    if let Some(out) = &args.out {
        let payload = MetricsOut {
            schema_version: SCHEMA_VERSION,
            per_abs_effective_sir_db: sirs,
            mean_db: mean,
            std_dev_db: var.sqrt(),
            min_db: min,
            jain_fairness: jain,
            per_aoi_serving_abs: serving,
        };
        write_text(
            out,
            &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()),
        )?;
    }
    Ok(())
}
