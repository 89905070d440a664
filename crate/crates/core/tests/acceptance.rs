//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p bell-lab --test acceptance`.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bell_lab::correlations::no_signaling_check;
use bell_lab::harness::{
    detection_loophole_run, ghz_signaling, ghz_vcausal_run, run, ExperimentConfig, HarnessError,
    Source, VCausalGhzConfig,
};
use bell_lab::lhv::{behavior_of, bell_value, enumerate_deterministic, is_local, local_max};
use bell_lab::nonlocal_box::pr_behavior;
use bell_lab::quantum::tsirelson_setup;
use bell_lab::relativity::{
    before_before, boost, delayed_outcome_viable, interval, scan_speed_bound, EventKind,
    PartyEvents, RelativityError, ScanGeometry, Units, C_SI,
};
use bell_lab::{
    BellFunctional, DetectionModel, Frame, LocalModel, QuantumSetup, Scenario, SpacetimeEvent,
    StateVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TSIRELSON: f64 = 2.0 + SQRT_2;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn c1_local_bound() -> Outcome {
    let f = BellFunctional::chsh_s();
    let st = enumerate_deterministic(&Scenario::chsh()).map_err(err)?;
    check(st.len() == 16, format!("{} strategies", st.len()))?;
    let best = st
        .iter()
        .map(|s| bell_value(&s.behavior(), &f).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    check(best == 3.0, format!("max over strategies {best}"))?;
    check(
        local_max(&f).map_err(err)?.value == 3.0,
        "local_max disagrees",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let raw: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let m =
            LocalModel::new(st.clone(), raw.iter().map(|w| w / total).collect()).map_err(err)?;
        worst = worst.max(bell_value(&behavior_of(&m), &f).map_err(err)?);
    }
    check(
        worst <= 3.0 + 1e-12,
        format!("random mixture reached {worst}"),
    )?;
    Ok(format!(
        "16 strategies, max S = {best}; 10^4 mixtures max S = {worst:.15}"
    ))
}

fn c2_pr_box() -> Outcome {
    let pr = pr_behavior();
    let s = bell_value(&pr, &BellFunctional::chsh_s()).map_err(err)?;
    check(s == 4.0, format!("S = {s}"))?;
    let ns = no_signaling_check(&pr, 1e-12).map_err(err)?;
    check(
        ns.passes && ns.max_deviation <= 1e-12,
        format!("no-signaling deviation {}", ns.max_deviation),
    )?;
    let m = is_local(&pr, 1e-9).map_err(err)?;
    let cert = m.certificate().ok_or("PR box reported local")?;
    check(
        cert.witnessed_value == 4.0,
        format!("witnessed {}", cert.witnessed_value),
    )?;
    Ok(format!(
        "S = {s}, no-signaling deviation {:.1e}, certificate witnessed {} > bound {}",
        ns.max_deviation, cert.witnessed_value, cert.local_bound
    ))
}

fn grid_max() -> f64 {
    let cos: Vec<f64> = (0..360).map(|d| (d as f64 * PI / 180.0).cos()).collect();
    let e = |a: usize, b: usize| cos[(a + 360 - b) % 360];
    let mut best = f64::NEG_INFINITY;
    for a1 in 0..360 {
        for b0 in 0..360 {
            for b1 in 0..360 {
                best = best.max(2.0 + (e(0, b0) + e(0, b1) + e(a1, b0) - e(a1, b1)) / 2.0);
            }
        }
    }
    best
}

fn c3_quantum() -> Outcome {
    let f = BellFunctional::chsh_s();
    let s = bell_value(&tsirelson_setup().behavior(), &f).map_err(err)?;
    check(
        (s - TSIRELSON).abs() <= 1e-9,
        format!("Tsirelson setup S = {s}"),
    )?;
    let grid = grid_max();
    check((grid - TSIRELSON).abs() <= 1e-4, format!("grid max {grid}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let amps = (0..4)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let angles = (0..2)
            .map(|_| (0..2).map(|_| rng.random_range(0.0..2.0 * PI)).collect())
            .collect();
        let q = QuantumSetup::from_angles(StateVector::normalized(amps).map_err(err)?, angles)
            .map_err(err)?;
        worst = worst.max(bell_value(&q.behavior(), &f).map_err(err)?);
    }
    check(
        worst <= TSIRELSON + 1e-9,
        format!("random setup reached {worst}"),
    )?;
    Ok(format!(
        "S = {s:.12}, 1° grid max {grid:.8}, 10^4 random setups max {worst:.8}"
    ))
}

fn c4_monte_carlo() -> Outcome {
    let local: Vec<_> = enumerate_deterministic(&Scenario::chsh())
        .map_err(err)?
        .into_iter()
        .filter(|s| BellFunctional::chsh_s().strategy_value(s) == 3.0)
        .collect();
    let sources = [
        ("pr", Source::PrBox, 4.0),
        ("quantum", Source::Quantum(tsirelson_setup()), TSIRELSON),
        (
            "local",
            Source::Local(LocalModel::uniform(local).map_err(err)?),
            3.0,
        ),
    ];
    let mut parts = Vec::new();
    for (name, src, exact) in sources {
        let r = run(&ExperimentConfig::new(src, 1_000_000, 4))
            .map_err(err)?
            .report;
        let (s, se) = (r.s_hat.ok_or("no S")?, r.stderr.ok_or("no stderr")?);
        check(
            (s - exact).abs() <= 4.0 * se + 1e-12,
            format!("{name}: {s} ± {se} vs {exact}"),
        )?;
        parts.push(format!("{name} {s:.5}±{se:.5}"));
    }
    let mut covered = 0;
    for rep in 0..100u64 {
        let r = run(&ExperimentConfig::new(
            Source::Quantum(tsirelson_setup()),
            10_000,
            1000 + rep,
        ))
        .map_err(err)?
        .report;
        let (s, se) = (r.s_hat.unwrap(), r.stderr.unwrap());
        covered += usize::from((s - TSIRELSON).abs() <= 2.0 * se);
    }
    check(
        (89..=99).contains(&covered),
        format!("coverage {covered}/100"),
    )?;
    // Every PR-box estimate is exactly 4 with zero stderr.
    let mut pr_exact = 0;
    for rep in 0..100u64 {
        let r = run(&ExperimentConfig::new(Source::PrBox, 10_000, 2000 + rep))
            .map_err(err)?
            .report;
        pr_exact += usize::from(r.s_hat == Some(4.0) && r.stderr == Some(0.0));
    }
    check(
        pr_exact == 100,
        format!("PR estimates exact in {pr_exact}/100"),
    )?;
    Ok(format!(
        "N=10^6: {}; quantum 2-stderr coverage {covered}/100; PR box exact in {pr_exact}/100",
        parts.join(", ")
    ))
}

fn c5_ghz() -> Outcome {
    let on = ghz_vcausal_run(
        &VCausalGhzConfig::standard(1e4, true).map_err(err)?,
        100_000,
        5,
    )
    .map_err(err)?;
    check(
        on.p_equal == 1.0,
        format!("measuring arm P(b=c) = {}", on.p_equal),
    )?;
    let off = ghz_vcausal_run(
        &VCausalGhzConfig::standard(1e4, false).map_err(err)?,
        100_000,
        6,
    )
    .map_err(err)?;
    let se = (0.25f64 / 100_000.0).sqrt();
    check(
        (off.p_equal - 0.5).abs() <= 4.0 * se,
        format!("idle arm P(b=c) = {}", off.p_equal),
    )?;
    let sig = ghz_signaling(
        &VCausalGhzConfig::standard(1e4, true).map_err(err)?,
        100_000,
        7,
    )
    .map_err(err)?;
    let h = |p: f64| -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    let closed = h(0.75) - 0.5;
    check(
        (sig.mutual_information_bits - closed).abs() <= 0.01,
        format!("MI {}", sig.mutual_information_bits),
    )?;
    let mut leaky = VCausalGhzConfig::standard(1e4, true).map_err(err)?;
    leaky.events[2].time += 1e-3;
    check(
        matches!(
            ghz_vcausal_run(&leaky, 1000, 8),
            Err(HarnessError::IsolationViolated(_))
        ),
        "non-isolated Bob–Charlie accepted",
    )?;
    Ok(format!(
        "P(b=c) on {} / off {:.4}; MI {:.4} bits vs {closed:.4}; non-isolated config rejected",
        on.p_equal, off.p_equal, sig.mutual_information_bits
    ))
}

fn c6_detection() -> Outcome {
    check(
        is_local(&DetectionModel.behavior(), 1e-9)
            .map_err(err)?
            .is_local(),
        "full behavior not local",
    )?;
    let r = detection_loophole_run(true, 1_000_000, 9).map_err(err)?;
    let ps = r.post_selected_s;
    check(
        (ps.value - 4.0).abs() <= 4.0 * ps.stderr + 1e-12,
        format!("post-selected S {}", ps.value),
    )?;
    let co = r.coincidence;
    check(
        (co.value - 0.25).abs() <= 4.0 * co.stderr,
        format!("coincidence {}", co.value),
    )?;
    let plain = local_max(&BellFunctional::chsh_s()).map_err(err)?.value;
    let lifted = local_max(&BellFunctional::chsh_s().with_bottom_added())
        .map_err(err)?
        .value;
    check(
        plain <= 3.0 && lifted <= 3.0,
        format!("enumeration max {plain} / {lifted}"),
    )?;
    Ok(format!(
        "full behavior local; post-selected S {:.4}±{:.4}; coincidence {:.5}±{:.5}; enumeration max {plain} (⊥-extended {lifted})",
        ps.value, ps.stderr, co.value, co.stderr
    ))
}

fn c7_relativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..10_000 {
        let mut ev = || {
            let p = [(); 3].map(|_| rng.random_range(-1e4..1e4));
            SpacetimeEvent::new(
                0,
                EventKind::InputChosen,
                p,
                rng.random_range(-1e-4..1e-4),
                Units::Si,
            )
        };
        let (e1, e2) = (ev(), ev());
        let dir: [f64; 3] = [(); 3].map(|_| rng.sample(StandardNormal));
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let speed: f64 = rng.random_range(0.0..0.99);
        let f = Frame::new(dir.map(|d| d / n * speed)).map_err(err)?;
        let i0 = interval(&e1, &e2).map_err(err)?;
        let i1 = interval(&boost(&e1, &f), &boost(&e2, &f)).map_err(err)?;
        let scale =
            (C_SI * (e2.time - e1.time)).powi(2) + (e2.position - e1.position).norm_squared();
        worst_rel = worst_rel.max((i0.invariant - i1.invariant).abs() / scale);
        check(i0.class == i1.class, "classification changed under boost")?;
    }
    check(worst_rel <= 1e-12, format!("interval drift {worst_rel:e}"))?;

    let a = SpacetimeEvent::on_axis(0, EventKind::OutcomeRegistered, 0.0, 0.0);
    let b = SpacetimeEvent::on_axis(1, EventKind::OutcomeRegistered, 18e3, 0.0);
    let (fa, fb) = (
        Frame::along_x(-0.1).map_err(err)?,
        Frame::along_x(0.1).map_err(err)?,
    );
    check(
        before_before(&a, &b, &fa, &fb).map_err(err)?,
        "symmetric diverging frames not before-before",
    )?;
    let late = SpacetimeEvent::on_axis(1, EventKind::OutcomeRegistered, 0.0, 1.0);
    check(
        matches!(
            before_before(&a, &late, &fa, &fb),
            Err(RelativityError::Configuration(_))
        ),
        "timelike pair accepted",
    )?;

    let g = ScanGeometry::chord(18e3);
    let v6 = scan_speed_bound(&g, 6e-9)
        .map_err(err)?
        .overall
        .value()
        .ok_or("bound exceeds cap")?;
    let v3 = scan_speed_bound(&g, 3e-9)
        .map_err(err)?
        .overall
        .value()
        .ok_or("bound exceeds cap")?;
    check(v6 >= 1e4, format!("bound {v6}"))?;
    check(
        (v3 / v6 - 2.0).abs() <= 1e-9,
        format!("halving δt gave ratio {}", v3 / v6),
    )?;
    Ok(format!(
        "10^4 boosts max relative drift {worst_rel:.1e}; before-before ok; scan bound {v6:.1} c at 6 ns, ratio {:.12} at 3 ns",
        v3 / v6
    ))
}

fn c8_delayed() -> Outcome {
    let party = |p, x| PartyEvents {
        input: SpacetimeEvent::on_axis(p, EventKind::InputChosen, x, 0.0),
        outcome: SpacetimeEvent::on_axis(p, EventKind::OutcomeRegistered, x, 0.0),
    };
    let ps = [party(0, 0.0), party(1, 18e3)];
    let r = delayed_outcome_viable(&ps, 100e-6).map_err(err)?;
    check(r.viable, "T = 100 μs not viable")?;
    check(
        (r.required_speed - 1.8e8).abs() <= 1e-6,
        format!("required speed {}", r.required_speed),
    )?;
    let r0 = delayed_outcome_viable(&ps, 0.0).map_err(err)?;
    check(!r0.viable, "T = 0 viable")?;
    Ok(format!(
        "T=100 μs viable at {:.6e} m/s; T=0 not viable",
        r.required_speed
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("local bound", c1_local_bound, Duration::from_secs(1)),
        ("PR box", c2_pr_box, Duration::from_secs(1)),
        ("quantum violation", c3_quantum, Duration::from_secs(60)),
        (
            "Monte Carlo calibration",
            c4_monte_carlo,
            Duration::from_secs(120),
        ),
        ("GHZ signaling", c5_ghz, Duration::from_secs(10)),
        ("detection loophole", c6_detection, Duration::from_secs(30)),
        ("relativity kernel", c7_relativity, Duration::from_secs(10)),
        ("delayed outcomes", c8_delayed, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {} {:<24} {} ({:.2} s, limit {} s): {detail}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
