//! One function per subcommand. Each writes its artifacts into `Output`
//! and returns whether the run ended in a domain failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use morphboat_core::control::reference::{ReferenceTrajectory, Shape};
use morphboat_core::control::tracking_metrics;
use morphboat_core::mission::{run_bridge, BridgeRun, MissionLog, Phase};
use morphboat_core::sim::scenario::{run_scenario, ControllerSpec, ScenarioConfig};
use morphboat_core::sim::trials::{
    docking_monte_carlo, tracking_reference_spec, tracking_trial, ControllerKind, DockingReport,
    Form, TrackingRun,
};
use morphboat_core::sim::{EventKind, SimLog};
use morphboat_core::sysid::{
    run_identification, IdentificationProblem, IdentifiedSet, ManeuverLog, SyntheticSweep,
};
use morphboat_core::vessel::{Pose, VesselModel, VesselState};
use morphboat_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::{checksum_file, Artifact, Output};
use crate::plot;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    /// The run finished and wrote its artifacts, but the domain goal failed.
    Failed(String),
}

pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub model: &'a VesselModel,
    pub out: &'a mut Output,
    pub inputs: Vec<Artifact>,
}

fn log_csv(log: &SimLog) -> Result<String> {
    log.to_csv_string()
}

fn reference_csv(r: &ReferenceTrajectory) -> String {
    let mut s = String::from("t,x,y,psi\n");
    for (k, p) in r.samples.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?}",
            r.t0 + k as f64 * r.dt,
            p[0],
            p[1],
            p[2]
        );
    }
    s
}

fn count_events(log: &SimLog, kind: EventKind) -> usize {
    log.events.iter().filter(|e| e.kind == kind).count()
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    controller: String,
    duration: f64,
    final_state: VesselState,
    captured_port: Option<usize>,
    captured_at: Option<f64>,
    converged_at: Option<f64>,
    aborted: Option<String>,
    clamp_events: usize,
    degraded_solves: usize,
    mae_position: Option<f64>,
    mae_yaw: Option<f64>,
    effort: Option<f64>,
}

pub fn simulate(run: &mut Run) -> Result<Outcome> {
    let cfg = run.cfg;
    let mut scenario = match &cfg.simulate.scenario {
        Some(s) => s.clone(),
        None => {
            let reference = tracking_reference_spec(Shape::Square)?;
            let probe = reference.build(&VesselState::default(), 0.0, 0.1)?;
            let p = probe.sample(0.0);
            ScenarioConfig::new(
                VesselState::at_rest(Pose::new(p[0], p[1], p[2]), 0.0),
                ControllerSpec::nmpc(),
                reference,
                probe.duration(),
            )
        }
    };
    if let Some(w) = cfg.simulate.water {
        scenario.waves = w.disturbance(cfg.seed);
    }
    scenario.validate(run.model)?;
    let result = run_scenario(run.model, &scenario)?;
    let metrics = tracking_metrics(&result.log, &result.reference).ok();

    run.out.write_str("log.csv", &log_csv(&result.log)?)?;
    run.out.write_str("log.json", &result.log.to_json()?)?;
    run.out
        .write_str("reference.csv", &reference_csv(&result.reference))?;
    let summary = SimulateSummary {
        controller: result
            .log
            .metadata
            .get("controller")
            .cloned()
            .unwrap_or_default(),
        duration: result.log.duration(),
        final_state: result.final_state,
        captured_port: result.captured.map(|c| c.0),
        captured_at: result.captured.map(|c| c.1),
        converged_at: result.converged_at,
        aborted: result.aborted.as_ref().map(|e| e.to_string()),
        clamp_events: count_events(&result.log, EventKind::Clamp),
        degraded_solves: count_events(&result.log, EventKind::SolverDegraded),
        mae_position: metrics.map(|m| m.mae_position),
        mae_yaw: metrics.map(|m| m.mae_yaw),
        effort: metrics.map(|m| m.effort),
    };
    run.out.write_json("summary.json", &summary)?;
    plot::paths(
        &run.out.path("path.svg"),
        "simulated path",
        &[(summary.controller.clone(), &run.out.path("log.csv"))],
        Some(&run.out.path("reference.csv")),
    )?;
    run.out.record("path.svg")?;

    println!(
        "simulated {:.1} s with {}: final pose ({:.3}, {:.3}, {:.1}°)",
        summary.duration,
        summary.controller,
        result.final_state.pose.x,
        result.final_state.pose.y,
        result.final_state.pose.psi.to_degrees()
    );
    if let Some(m) = metrics {
        println!(
            "  MAE {:.4} m / {:.3}°, effort {:.1}",
            m.mae_position,
            m.mae_yaw.to_degrees(),
            m.effort
        );
    }
    Ok(match result.aborted {
        Some(e) => Outcome::Failed(e.to_string()),
        None => Outcome::Success,
    })
}

fn length_name(l: f64) -> String {
    format!("{l:.3}").replace('.', "p")
}

fn polynomial_toml(set: &IdentifiedSet) -> String {
    let p = &set.polynomials;
    let row =
        |q: morphboat_core::vessel::Quadratic| format!("[{:?}, {:?}, {:?}]", q.c2, q.c1, q.c0);
    format!(
        "# c2 l^2 + c1 l + c0, usable as a --config file\n[vessel.params]\nm12 = {}\nm3 = {}\nxuv = {}\nnr = {}\n",
        row(p.m12),
        row(p.m3),
        row(p.xuv),
        row(p.nr)
    )
}

pub fn identify(run: &mut Run) -> Result<Outcome> {
    let id = &run.cfg.identify;
    let mut maneuver = id.maneuver;
    maneuver.dt = run.model.dt;
    maneuver.arm_offset = run.model.thrusters.arm_offset;

    let set = if id.logs.is_empty() {
        let sweep = SyntheticSweep {
            truth: run.model.polynomials,
            lengths: id.lengths.clone(),
            duration: id.duration,
            maneuver,
            seed: run.cfg.seed,
        };
        let groups = sweep.logs()?;
        for log in groups.iter().flatten() {
            let mut buf = Vec::new();
            log.write_csv(&mut buf)?;
            run.out.write(
                &format!("logs/{}_l{}.csv", log.kind, length_name(log.expansion)),
                &buf,
            )?;
        }
        let arm = maneuver.arm_offset;
        let mut set = run_identification(groups, |logs| {
            let mut p = IdentificationProblem::new(logs);
            p.arm_offset = arm;
            p.seed = sweep.seed;
            p
        })?;
        set.deviation_from_truth = Some(morphboat_core::sysid::max_relative_deviation(
            &set.polynomials,
            &sweep.truth,
            morphboat_core::vessel::MAX_EXPANSION,
            50,
        ));
        set
    } else {
        let mut groups: BTreeMap<u64, Vec<ManeuverLog>> = BTreeMap::new();
        for src in &id.logs {
            let log = ManeuverLog::load_csv(&src.path, src.kind)?;
            run.inputs.push(checksum_file(&src.path)?);
            if id.lengths.iter().any(|l| (l - log.expansion).abs() < 1e-9) {
                groups.entry(log.expansion.to_bits()).or_default().push(log);
            }
        }
        let arm = maneuver.arm_offset;
        let seed = run.cfg.seed;
        run_identification(groups.into_values().collect(), |logs| {
            let mut p = IdentificationProblem::new(logs);
            p.arm_offset = arm;
            p.seed = seed;
            p
        })?
    };

    run.out.write_str("report.json", &set.to_json()?)?;
    run.out
        .write_str("polynomials.toml", &polynomial_toml(&set))?;
    plot::residuals(&run.out.path("residuals.svg"), &run.out.path("report.json"))?;
    run.out.record("residuals.svg")?;
    plot::parameters(
        &run.out.path("parameters.svg"),
        &run.out.path("report.json"),
    )?;
    run.out.record("parameters.svg")?;

    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10} {:>12} {:>12}",
        "l", "m12", "m3", "xuv", "nr", "res.id", "res.fit"
    );
    for e in &set.entries {
        let p = &e.params;
        println!(
            "{:>6.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>12.3e} {:>12.3e}{}",
            e.l,
            0.5 * (p.m1 + p.m2),
            p.m3,
            0.5 * (p.xu + p.yv),
            p.nr,
            e.residual_pre,
            e.residual_post,
            if e.active_bound { "  (at bound)" } else { "" }
        );
    }
    for (name, q) in [
        ("m12", set.polynomials.m12),
        ("m3", set.polynomials.m3),
        ("xuv", set.polynomials.xuv),
        ("nr", set.polynomials.nr),
    ] {
        println!(
            "{name:>4}(l) = {:.8} l^2 + {:.8} l + {:.8}",
            q.c2, q.c1, q.c0
        );
    }
    if let Some(d) = set.deviation_from_truth {
        println!(
            "max relative deviation from the generating model: {:.3}%",
            100.0 * d
        );
    }
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Serialize)]
struct TrialRow {
    shape: Shape,
    controller: ControllerKind,
    form: Form,
    trial: usize,
    seed: u64,
    mae_position: Option<f64>,
    mae_yaw: Option<f64>,
    effort: Option<f64>,
    degraded_solves: usize,
    error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct TableRow {
    shape: Shape,
    controller: ControllerKind,
    form: Form,
    trials: usize,
    mae_position: f64,
    mae_yaw: f64,
    effort: f64,
    degraded_solves: usize,
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Log(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Log(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Log(e.to_string()))
}

pub fn track(run: &mut Run) -> Result<Outcome> {
    let t = &run.cfg.track;
    let mut jobs = Vec::new();
    for &shape in &t.shapes {
        for &controller in &t.controllers {
            for &form in &t.forms {
                for trial in 0..t.trials {
                    jobs.push((shape, controller, form, trial));
                }
            }
        }
    }
    let model = run.model;
    let seed = run.cfg.seed;
    let results: Vec<Result<TrackingRun>> = jobs
        .par_iter()
        .map(|&(shape, controller, form, trial)| {
            tracking_trial(model, shape, controller, form, seed + trial as u64)
        })
        .collect();

    let mut rows = Vec::new();
    let mut references: BTreeMap<String, ReferenceTrajectory> = BTreeMap::new();
    let mut failures = Vec::new();
    for (&(shape, controller, form, trial), result) in jobs.iter().zip(results) {
        let name = format!("{shape}_{controller}_{form}_{trial}");
        let row = match result {
            Ok(r) => {
                run.out
                    .write_str(&format!("logs/{name}.csv"), &log_csv(&r.log)?)?;
                references.entry(shape.to_string()).or_insert(r.reference);
                TrialRow {
                    shape,
                    controller,
                    form,
                    trial,
                    seed: seed + trial as u64,
                    mae_position: Some(r.metrics.mae_position),
                    mae_yaw: Some(r.metrics.mae_yaw),
                    effort: Some(r.metrics.effort),
                    degraded_solves: count_events(&r.log, EventKind::SolverDegraded),
                    error: None,
                }
            }
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                TrialRow {
                    shape,
                    controller,
                    form,
                    trial,
                    seed: seed + trial as u64,
                    mae_position: None,
                    mae_yaw: None,
                    effort: None,
                    degraded_solves: 0,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    for (shape, r) in &references {
        run.out
            .write_str(&format!("reference_{shape}.csv"), &reference_csv(r))?;
    }

    let mut table = Vec::new();
    for chunk in rows.chunks(t.trials) {
        let ok: Vec<&TrialRow> = chunk.iter().filter(|r| r.error.is_none()).collect();
        if ok.is_empty() {
            continue;
        }
        let mean = |f: fn(&TrialRow) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64;
        table.push(TableRow {
            shape: chunk[0].shape,
            controller: chunk[0].controller,
            form: chunk[0].form,
            trials: ok.len(),
            mae_position: mean(|r| r.mae_position.unwrap_or(0.0)),
            mae_yaw: mean(|r| r.mae_yaw.unwrap_or(0.0)),
            effort: mean(|r| r.effort.unwrap_or(0.0)),
            degraded_solves: ok.iter().map(|r| r.degraded_solves).sum(),
        });
    }
    run.out.write_str("trials.csv", &csv_string(&rows)?)?;
    run.out.write_str("table.csv", &csv_string(&table)?)?;
    run.out.write_json("table.json", &table)?;

    for shape in &t.shapes {
        let mut logs = Vec::new();
        for r in rows
            .iter()
            .filter(|r| r.shape == *shape && r.trial == 0 && r.error.is_none())
        {
            let name = format!("logs/{}_{}_{}_0.csv", r.shape, r.controller, r.form);
            logs.push((format!("{} {}", r.controller, r.form), run.out.path(&name)));
        }
        let logs: Vec<(String, &std::path::Path)> =
            logs.iter().map(|(l, p)| (l.clone(), p.as_path())).collect();
        let svg = format!("path_{shape}.svg");
        let reference = run.out.path(&format!("reference_{shape}.csv"));
        plot::paths(
            &run.out.path(&svg),
            &format!("{shape} tracking, trial 0"),
            &logs,
            reference.exists().then_some(reference.as_path()),
        )?;
        run.out.record(&svg)?;
    }

    println!(
        "{:<10} {:<5} {:<11} {:>12} {:>10} {:>10} {:>9}",
        "shape", "ctrl", "form", "MAE pos [m]", "MAE yaw[°]", "effort", "degraded"
    );
    for r in &table {
        println!(
            "{:<10} {:<5} {:<11} {:>12.4} {:>10.3} {:>10.1} {:>9}",
            r.shape.to_string(),
            r.controller.to_string(),
            r.form.to_string(),
            r.mae_position,
            r.mae_yaw.to_degrees(),
            r.effort,
            r.degraded_solves
        );
    }
    for f in &failures {
        eprintln!("trial failed: {f}");
    }
    Ok(if failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::Failed(format!("{} tracking trial(s) failed", failures.len()))
    })
}

pub fn dock(run: &mut Run) -> Result<Outcome> {
    let d = &run.cfg.dock;
    d.options.port.validate(run.model.dt)?;
    let mut reports: Vec<DockingReport> = Vec::new();
    let mut report_files = Vec::new();
    for &form in &d.forms {
        let (report, logs) = docking_monte_carlo(
            run.model,
            form,
            d.water,
            d.repetitions,
            run.cfg.seed,
            &d.options,
        )?;
        for (trial, log) in report.trials.iter().zip(&logs) {
            run.out.write_str(
                &format!("logs/dock_{form}_{}.csv", trial.seed),
                &log_csv(log)?,
            )?;
        }
        let file = format!("report_{form}.json");
        run.out.write_json(&file, &report)?;
        report_files.push(run.out.path(&file));
        reports.push(report);
    }
    let rows: Vec<_> = reports
        .iter()
        .flat_map(|r| r.trials.iter().copied())
        .collect();
    run.out.write_str("trials.csv", &csv_string(&rows)?)?;
    let files: Vec<&std::path::Path> = report_files.iter().map(PathBuf::as_path).collect();
    plot::docking(&run.out.path("docking.svg"), &files)?;
    run.out.record("docking.svg")?;

    for r in &reports {
        let captured = r.trials.iter().filter(|t| t.captured).count();
        println!(
            "{} / {}: {}/{} captured ({:.0}%), mean time to dock {}",
            r.form,
            r.water,
            captured,
            r.trials.len(),
            100.0 * r.success_rate,
            r.mean_time.map_or("n/a".into(), |t| format!("{t:.1} s"))
        );
    }
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct FrameRow {
    t: f64,
    x: f64,
    y: f64,
    psi: f64,
    l: f64,
    phase: String,
    block: usize,
    blocks_placed: usize,
    carrying: bool,
}

/// Samples of the mission at a fixed frame interval, annotated with the
/// phase active at each frame.
fn frames(log: &SimLog, mission: &MissionLog, every: f64) -> Vec<FrameRow> {
    let stride = ((every / log.dt).round() as usize).max(1);
    let mut rows = Vec::new();
    for (k, s) in log.samples.iter().enumerate() {
        if k % stride != 0 && k + 1 != log.samples.len() {
            continue;
        }
        let current = mission
            .records
            .iter()
            .find(|r| r.start <= s.t && s.t < r.end);
        let mut done = mission.records.iter().filter(|r| r.end <= s.t);
        let placed = done.clone().filter(|r| r.phase == Phase::MagnetOff).count();
        let carrying = done
            .rfind(|r| (r.phase == Phase::DockPickup && r.success) || r.phase == Phase::MagnetOff)
            .is_some_and(|r| r.phase == Phase::DockPickup);
        rows.push(FrameRow {
            t: s.t,
            x: s.q[0],
            y: s.q[1],
            psi: s.q[2],
            l: s.expansion,
            phase: current.map_or_else(
                || mission.final_state.phase.to_string(),
                |r| r.phase.to_string(),
            ),
            block: current.map_or(mission.final_state.blocks_placed, |r| r.block),
            blocks_placed: placed,
            carrying,
        });
    }
    rows
}

pub fn bridge(run: &mut Run) -> Result<Outcome> {
    let b = &run.cfg.bridge;
    let waves = b.water.disturbance(run.cfg.seed);
    let BridgeRun {
        plan,
        mission,
        summary,
        log,
    } = run_bridge(run.model, &b.site, &waves, &b.mission, &b.driver)?;

    let plan_text = toml::to_string(&plan).map_err(|e| Error::Log(e.to_string()))?;
    run.out.write_str("plan.toml", &plan_text)?;
    run.out.write_str("log.csv", &log_csv(&log)?)?;
    run.out.write_str("log.json", &log.to_json()?)?;
    run.out
        .write_str("timeline.csv", &csv_string(&mission.records)?)?;
    run.out
        .write_str("frames.csv", &csv_string(&frames(&log, &mission, 0.5))?)?;
    run.out.write_json("summary.json", &summary)?;
    plot::paths(
        &run.out.path("path.svg"),
        &format!("bridge mission, {} water", b.water),
        &[("vessel".into(), &run.out.path("log.csv"))],
        None,
    )?;
    run.out.record("path.svg")?;

    println!(
        "{} block(s) placed in {:.1} s with {} retr{}",
        summary.blocks_placed,
        summary.total_time,
        summary.retries,
        if summary.retries == 1 { "y" } else { "ies" }
    );
    for (phase, d) in &summary.phase_durations {
        println!("  {:<18} {:>8.1} s", phase.to_string(), d);
    }
    Ok(if summary.success {
        Outcome::Success
    } else {
        Outcome::Failed(format!(
            "mission aborted in {}: {}",
            summary.failing_phase.map_or("?".into(), |p| p.to_string()),
            summary.reason.clone().unwrap_or_default()
        ))
    })
}
