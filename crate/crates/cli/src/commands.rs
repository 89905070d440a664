use std::fs;
use std::path::Path;

use bell_lab::harness::{
    detection_loophole_run, ghz_signaling, ghz_vcausal_run, run, ExperimentConfig,
    InputDistribution, Source, VCausalGhzConfig,
};
use bell_lab::lhv::{
    count_deterministic, enumerate_deterministic, is_local_with_cap, local_max_with_cap, LhvError,
};
use bell_lab::quantum::max_entangled_state;
use bell_lab::relativity::{
    delayed_outcome_viable, scan_speed_bound, EventKind, PartyEvents, ScanGeometry, ScanPreset,
    SpacetimeEvent,
};
use bell_lab::{Behavior, BellFunctional, LocalModel, QuantumSetup, Scenario};
use serde_json::{json, Value};

use crate::cli::{AliceMode, ChshArgs, Cli, Command, SourceKind};
use crate::error::CliError;
use crate::schemas;

const DEFAULT_PRESET: &str = "geneva-18km-6ns";

pub fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let pretty = !cli.compact;
    let value = match &cli.command {
        Command::Chsh(a) => chsh(a)?,
        Command::Localbound(a) => localbound(&a.scenario, &a.functional, a.cap)?,
        Command::Membership(a) => membership(&a.behavior, a.tol, a.cap)?,
        Command::GhzSignal(a) => ghz(a.alice, a.v, a.rounds, a.seed)?,
        Command::SpeedScan(a) => {
            let (scan, doc) = speed_scan(a.geometry.as_deref(), a.preset.as_deref(), a.sync_ns)?;
            if a.csv {
                return Ok(scan);
            }
            doc
        }
        Command::Detection(a) => {
            check_rounds(a.rounds)?;
            to_value(&detection_loophole_run(a.efficiency, a.rounds, a.seed)?)?
        }
        Command::DelayedOutcome(a) => delayed(a.events.as_deref(), a.distance_m, a.delay_us)?,
        Command::Schema(a) => return schema(a.name.as_deref()),
    };
    let mut text =
        bell_lab::format::to_json(&value, pretty).map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Invalid(e.to_string()))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

fn parse_as<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_value(read_json(path)?).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

fn check_rounds(rounds: u64) -> Result<(), CliError> {
    if rounds == 0 {
        return Err(CliError::Invalid("--rounds must be at least 1".into()));
    }
    Ok(())
}

/// Uniform mixture of the deterministic strategies attaining S = 3.
fn chsh_optimal_local() -> Result<LocalModel, CliError> {
    let f = BellFunctional::chsh_s();
    let best: Vec<_> = enumerate_deterministic(&Scenario::chsh())?
        .into_iter()
        .filter(|s| f.strategy_value(s) == 3.0)
        .collect();
    Ok(LocalModel::uniform(best)?)
}

fn chsh(a: &ChshArgs) -> Result<Value, CliError> {
    check_rounds(a.rounds)?;
    let source = match a.source {
        SourceKind::Pr => Source::PrBox,
        SourceKind::Quantum => {
            let ang = &a.angles;
            if ang.len() != 4 {
                return Err(CliError::Invalid(format!(
                    "--angles needs 4 values, got {}",
                    ang.len()
                )));
            }
            Source::Quantum(QuantumSetup::from_angles(
                max_entangled_state(),
                vec![vec![ang[0], ang[1]], vec![ang[2], ang[3]]],
            )?)
        }
        SourceKind::Local => Source::Local(chsh_optimal_local()?),
        SourceKind::File => {
            let path = a
                .behavior
                .as_deref()
                .ok_or_else(|| CliError::Invalid("--source file needs --behavior".into()))?;
            let b = Behavior::from_json_value(&read_json(path)?).map_err(|e| CliError::Parse {
                path: path.into(),
                message: e.to_string(),
            })?;
            Source::Behavior(b)
        }
    };
    let geometry = match &a.geometry {
        Some(p) => Some(parse_as::<Vec<PartyEvents>>(p)?),
        None => None,
    };
    let cfg = ExperimentConfig {
        source,
        rounds: a.rounds,
        inputs: InputDistribution::Uniform,
        seed: a.seed,
        geometry,
        fair_sampling: a.fair_sampling,
    };
    let mut out = run(&cfg)?;
    if let Some(path) = &a.tallies {
        let file = fs::File::create(path).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        out.tally.write_csv(file)?;
        eprintln!("tallies written to {}", path.display());
        out.report.tallies_ref = Some(path.display().to_string());
    }
    to_value(&out.report)
}

fn parse_scenario(spec: &str) -> Result<Scenario, CliError> {
    let parts: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            CliError::Invalid(format!(
                "--scenario {spec:?}: expected parties,inputs,outputs"
            ))
        })?;
    match parts[..] {
        [p, i, o] => Ok(Scenario::uniform(p, i, o)?),
        _ => Err(CliError::Invalid(format!(
            "--scenario {spec:?}: expected parties,inputs,outputs"
        ))),
    }
}

fn localbound(scenario: &str, functional: &str, cap: u128) -> Result<Value, CliError> {
    let s = parse_scenario(scenario)?;
    match count_deterministic(&s) {
        Some(n) if n <= cap => {}
        n => {
            let count = n.map_or_else(|| "more than 2^128".to_string(), |n| n.to_string());
            return Err(LhvError::CapExceeded { count, cap }.into());
        }
    }
    let f = match functional {
        "chsh" if s == Scenario::chsh() => BellFunctional::chsh_s(),
        "chsh" => BellFunctional::chsh_s_lifted(&s)?,
        "zero" => BellFunctional::zero(s),
        path => {
            let path = Path::new(path);
            BellFunctional::from_json_value(&read_json(path)?).map_err(|e| CliError::Parse {
                path: path.into(),
                message: e.to_string(),
            })?
        }
    };
    let m = local_max_with_cap(&f, cap)?;
    Ok(json!({
        "scenario": f.scenario(),
        "functional": functional,
        "max": m.value,
        "argmax": m.argmax,
        "n_optimal": m.n_optimal,
    }))
}

fn membership(path: &Path, tol: f64, cap: u128) -> Result<Value, CliError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Invalid(format!(
            "--tol {tol} must be a finite nonnegative number"
        )));
    }
    let b = Behavior::from_json_value(&read_json(path)?).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })?;
    let mut v = is_local_with_cap(&b, tol, cap)?.to_json_value()?;
    v["tol"] = json!(tol);
    Ok(v)
}

fn ghz(alice: AliceMode, v: f64, rounds: u64, seed: u64) -> Result<Value, CliError> {
    check_rounds(rounds)?;
    let cfg = VCausalGhzConfig::standard(v, alice == AliceMode::On)?;
    let report = match alice {
        AliceMode::Both => to_value(&ghz_signaling(&cfg, rounds, seed)?)?,
        _ => to_value(&ghz_vcausal_run(&cfg, rounds, seed)?)?,
    };
    Ok(json!({ "config": cfg, "report": report }))
}

fn speed_scan(
    geometry: Option<&Path>,
    preset: Option<&str>,
    sync_ns: Option<f64>,
) -> Result<(String, Value), CliError> {
    let (name, geometry, default_sync) = match (geometry, preset) {
        (Some(path), _) => (None, parse_as::<ScanGeometry>(path)?, None),
        (None, name) => {
            let name = name.unwrap_or(DEFAULT_PRESET);
            let p = ScanPreset::by_name(name).ok_or_else(|| {
                let known: Vec<_> = ScanPreset::all().iter().map(|p| p.name).collect();
                CliError::Invalid(format!(
                    "unknown preset {name:?}; known: {}",
                    known.join(", ")
                ))
            })?;
            (Some(p.name), p.geometry, Some(p.sync_s))
        }
    };
    let sync_s = match (sync_ns, default_sync) {
        (Some(ns), _) => ns * 1e-9,
        (None, Some(s)) => s,
        (None, None) => return Err(CliError::Invalid("--geometry needs --sync-ns".into())),
    };
    let result = scan_speed_bound(&geometry, sync_s)?;
    let doc = json!({
        "preset": name,
        "geometry": geometry,
        "sync_s": sync_s,
        "overall_v_min_over_c": result.overall,
        "frames": result.frames,
    });
    Ok((result.to_csv(), doc))
}

fn delayed(events: Option<&Path>, distance_m: f64, delay_us: f64) -> Result<Value, CliError> {
    let parties = match events {
        Some(p) => parse_as::<Vec<PartyEvents>>(p)?,
        None => {
            if !(distance_m.is_finite() && distance_m >= 0.0) {
                return Err(CliError::Invalid(format!(
                    "--distance-m {distance_m} must be nonnegative"
                )));
            }
            (0..2)
                .map(|p| {
                    let x = p as f64 * distance_m;
                    PartyEvents {
                        input: SpacetimeEvent::on_axis(p, EventKind::InputChosen, x, 0.0),
                        outcome: SpacetimeEvent::on_axis(p, EventKind::OutcomeRegistered, x, 0.0),
                    }
                })
                .collect()
        }
    };
    if !(delay_us.is_finite() && delay_us >= 0.0) {
        return Err(CliError::Invalid(format!(
            "--delay-us {delay_us} must be nonnegative"
        )));
    }
    let r = delayed_outcome_viable(&parties, delay_us * 1e-6)?;
    Ok(json!({ "events": parties, "result": r }))
}

fn schema(name: Option<&str>) -> Result<String, CliError> {
    match name {
        None => Ok(schemas::SCHEMAS
            .iter()
            .map(|(n, _)| format!("{n}\n"))
            .collect()),
        Some(n) => schemas::get(n)
            .map(str::to_string)
            .ok_or_else(|| CliError::Invalid(format!("unknown schema {n:?}"))),
    }
}
