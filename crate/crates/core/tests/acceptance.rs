//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Sweeps use 20 seeds at a 10^5-slot horizon.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use srv_handoff::fig1;
use srv_handoff::gcs::build_ranking;
use srv_handoff::harness::scenario::{mean_std, preset, run_scenario, ResultRow};
use srv_handoff::model::{derive_stream, Channel, Protocol, SimConfig};
use srv_handoff::traffic::{BusyInterval, ChannelSchedule, PuSchedule};
use srv_handoff::{run_metrics, run_simulation};

const SEEDS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

struct Sweeps {
    fig4: Vec<ResultRow>,
    fig5: Vec<ResultRow>,
    fig7: Vec<ResultRow>,
    fig8: Vec<ResultRow>,
    elapsed: Duration,
}

fn run_sweeps() -> Sweeps {
    let start = Instant::now();
    let run = |name: &str| run_scenario(&preset(name, SEEDS).unwrap()).unwrap();
    let fig4 = run("fig4");
    let fig5 = run("fig5");
    let fig7 = run("fig7");
    let fig8 = run("fig8");
    Sweeps {
        fig4,
        fig5,
        fig7,
        fig8,
        elapsed: start.elapsed(),
    }
}

/// Seed mean and standard error per `(protocol, x)`.
#[derive(Clone, Copy, Debug)]
struct Stat {
    mean: f64,
    se: f64,
}

fn stats(rows: &[ResultRow], x: &str, y: &str) -> BTreeMap<(Protocol, i64), Stat> {
    let mut groups: BTreeMap<(Protocol, i64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let Some(v) = r.numeric(y) {
            let key = (r.protocol, (r.numeric(x).unwrap() * 1000.0).round() as i64);
            groups.entry(key).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|(k, v)| {
            let (mean, sd) = mean_std(&v);
            (
                k,
                Stat {
                    mean,
                    se: sd / (v.len() as f64).sqrt(),
                },
            )
        })
        .collect()
}

fn series(st: &BTreeMap<(Protocol, i64), Stat>, p: Protocol) -> Vec<(f64, Stat)> {
    st.iter()
        .filter(|((q, _), _)| *q == p)
        .map(|((_, x), s)| (*x as f64 / 1000.0, *s))
        .collect()
}

/// Inversions against the required direction; `Ok` if there is at most
/// `allowed` of them and each is within `tol_frac` of the curve's range.
fn monotone(
    points: &[(f64, Stat)],
    decreasing: bool,
    allowed: usize,
    tol_frac: f64,
) -> Result<String, String> {
    let ys: Vec<f64> = points.iter().map(|p| p.1.mean).collect();
    let range =
        ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    let mut inversions = Vec::new();
    for (i, w) in ys.windows(2).enumerate() {
        let step = if decreasing { w[1] - w[0] } else { w[0] - w[1] };
        if step > 0.0 {
            inversions.push((points[i + 1].0, step));
        }
    }
    let ok = inversions.len() <= allowed && inversions.iter().all(|(_, s)| *s <= tol_frac * range);
    let msg = format!(
        "{} inversion(s) {:?}, range {:.1}",
        inversions.len(),
        inversions,
        range
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn se_diff(a: Stat, b: Stat) -> f64 {
    (a.se * a.se + b.se * b.se).sqrt()
}

const BASELINES: [Protocol; 2] = [Protocol::Probability, Protocol::Random];

fn c1_no_pu_collision(s: &Sweeps) -> Outcome {
    let rows: Vec<&ResultRow> = [&s.fig4, &s.fig5, &s.fig7, &s.fig8]
        .into_iter()
        .flatten()
        .filter(|r| r.protocol == Protocol::GcsSrv)
        .collect();
    let bad: Vec<_> = rows
        .iter()
        .filter(|r| r.pu_su_collision_slots != 0)
        .collect();
    if bad.is_empty() {
        pass(format!("{} gcs_srv runs, all zero", rows.len()))
    } else {
        fail(format!("{} of {} runs collided", bad.len(), rows.len()))
    }
}

fn c2_no_su_collision(s: &Sweeps) -> Outcome {
    let rows: Vec<&ResultRow> = [&s.fig4, &s.fig5, &s.fig7, &s.fig8]
        .into_iter()
        .flatten()
        .collect();
    let bad = rows.iter().filter(|r| r.su_su_collision_slots != 0).count();
    if bad == 0 {
        pass(format!(
            "{} runs over three protocols, all zero",
            rows.len()
        ))
    } else {
        fail(format!("{bad} of {} runs had SU-SU collisions", rows.len()))
    }
}

fn c3_replay() -> Outcome {
    let expected = [
        "0\trendezvous\tchannel=3",
        "0\tassign\tpair=1\tchannel=3",
        "8\thandoff_request\tpair=1\tchannel=3\tpu_at=11",
        "8\trendezvous\tchannel=4",
        "8\tsense_broadcast\tpair=1\tmini_slot=1",
        "8\thandoff\tpair=1\tfrom=3\tto=4\tpu_at=11",
        "16\tstay\tpair=1\tchannel=4\tpu_at=19\tstaying=10",
        "19\tpause\tpair=1\tchannel=4",
        "24\tstay\tpair=1\tchannel=4\tpu_at=19\tstaying=4",
        "25\tpause\tpair=1\tchannel=4",
        "79\tcomplete\tpair=1\tservice_slots=80",
        "80\trelease\tpair=1\tchannel=4",
    ];
    let r = fig1::replay();
    let got: Vec<String> = r
        .trace
        .records()
        .iter()
        .filter(|rec| {
            !matches!(
                rec.event.kind(),
                "frame" | "pu_start" | "pu_stop" | "prs" | "rts" | "cts"
            )
        })
        .map(|rec| rec.to_string())
        .collect();
    let narrative = fig1::narrative(&r.decisions);
    if got == expected && narrative == "switch 3→4 at slot 11; stay on 4 at slot 19" {
        pass(narrative)
    } else {
        fail(format!("narrative `{narrative}`, trace {got:?}"))
    }
}

fn c4_fig4_trend(s: &Sweeps) -> Outcome {
    let st = stats(&s.fig4, "lambda_p", "throughput_bps");
    match monotone(&series(&st, Protocol::GcsSrv), true, 1, 0.01) {
        Ok(m) => pass(m),
        Err(m) => fail(m),
    }
}

fn c5_fig5_ordering(s: &Sweeps) -> Outcome {
    let st = stats(&s.fig5, "lambda_p", "throughput_bps");
    let g = series(&st, Protocol::GcsSrv);
    let p = series(&st, Protocol::Probability);
    let r = series(&st, Protocol::Random);
    let mut problems = Vec::new();
    let mut gaps = Vec::new();
    for i in 0..g.len() {
        let (lp, gs, ps, rs) = (g[i].0, g[i].1, p[i].1, r[i].1);
        if gs.mean < ps.mean {
            problems.push(format!(
                "λp={lp}: gcs {:.0} < probability {:.0}",
                gs.mean, ps.mean
            ));
        }
        if ps.mean < rs.mean - se_diff(ps, rs) {
            problems.push(format!(
                "λp={lp}: probability {:.0} < random {:.0} - SE",
                ps.mean, rs.mean
            ));
        }
        let best = ps.mean.max(rs.mean);
        let gap = gs.mean / best - 1.0;
        gaps.push(format!("{lp}:{:.1}%", gap * 100.0));
        if lp >= 3.0 && gap < 0.05 {
            problems.push(format!("λp={lp}: gcs lead {:.2}% < 5%", gap * 100.0));
        }
    }
    let detail = format!("gcs lead over best baseline [{}]", gaps.join(" "));
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", problems.join("; ")))
    }
}

fn c6_fig6_service(s: &Sweeps) -> Outcome {
    let st = stats(&s.fig5, "lambda_p", "avg_service_time_s");
    let g = series(&st, Protocol::GcsSrv);
    let mut problems = Vec::new();
    for b in BASELINES {
        for (gp, bp) in g.iter().zip(series(&st, b)) {
            if gp.1.mean > bp.1.mean + se_diff(gp.1, bp.1) {
                problems.push(format!(
                    "λp={}: gcs {:.4}s > {b} {:.4}s",
                    gp.0, gp.1.mean, bp.1.mean
                ));
            }
        }
    }
    if problems.is_empty() {
        pass(format!("{} points, gcs never slower", g.len()))
    } else {
        fail(problems.join("; "))
    }
}

fn c7_fig7_trend(s: &Sweeps) -> Outcome {
    let st = stats(&s.fig7, "K", "throughput_bps");
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for p in Protocol::ALL {
        match monotone(&series(&st, p), true, 1, 0.01) {
            Ok(m) => notes.push(format!("{p}: {m}")),
            Err(m) => problems.push(format!("{p}: {m}")),
        }
    }
    let g = series(&st, Protocol::GcsSrv);
    for b in BASELINES {
        for (gp, bp) in g.iter().zip(series(&st, b)) {
            if gp.1.mean < bp.1.mean {
                problems.push(format!(
                    "K={}: gcs {:.0} < {b} {:.0}",
                    gp.0, gp.1.mean, bp.1.mean
                ));
            }
        }
    }
    if problems.is_empty() {
        pass(notes.join("; "))
    } else {
        fail(problems.join("; "))
    }
}

fn c8_fig8_saturation(s: &Sweeps) -> Outcome {
    let st = stats(&s.fig8, "M", "throughput_bps");
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for p in Protocol::ALL {
        let pts = series(&st, p);
        if let Err(m) = monotone(&pts, false, 0, 0.0) {
            problems.push(format!("{p}: {m}"));
        }
        let n = pts.len();
        let plateau = pts[n - 1].1.mean;
        let gain = (plateau - pts[n - 2].1.mean) / plateau;
        notes.push(format!("{p} last-step gain {:.2}%", gain * 100.0));
        if gain >= 0.02 {
            problems.push(format!("{p}: last-step gain {:.2}% ≥ 2%", gain * 100.0));
        }
    }
    if problems.is_empty() {
        pass(notes.join(", "))
    } else {
        fail(problems.join("; "))
    }
}

/// Busy fraction averaged over the 10 seeds of each load.
fn c9_pu_calibration() -> Outcome {
    let mut worst_seed: f64 = 0.0;
    let mut notes = Vec::new();
    let mut problems = Vec::new();
    for rho in [0.1, 0.3, 0.5, 0.7] {
        let mut fractions = Vec::new();
        let mut expected = 0.0;
        for seed in 1..=10 {
            let cfg = SimConfig {
                num_channels: 1,
                lambda_p: rho * 10.0,
                horizon: 1_000_000,
                seed,
                ..SimConfig::default()
            }
            .validate()
            .unwrap();
            expected = cfg.lambda_p * cfg.pu_packet_bits as f64 / cfg.bit_rate as f64;
            let sched = PuSchedule::generate(&cfg);
            let busy = sched.channel(Channel(1)).unwrap().busy_slots() as f64 / cfg.horizon as f64;
            worst_seed = worst_seed.max((busy - expected).abs());
            fractions.push(busy);
        }
        let (mean, _) = mean_std(&fractions);
        notes.push(format!("ρ={rho}: {mean:.4}"));
        if (mean - expected).abs() > 0.02 {
            problems.push(format!("ρ={rho}: mean {mean:.4}"));
        }
    }
    let detail = format!(
        "{}; worst single seed off by {worst_seed:.4}",
        notes.join(", ")
    );
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; {}", problems.join("; ")))
    }
}

/// Independent slot-scan oracle for the ranking lists.
fn oracle_lists(
    busy: &[Vec<bool>],
    current: Option<Channel>,
    t: usize,
) -> (Vec<Channel>, Vec<Channel>) {
    let horizon = busy[0].len();
    let mut idle: Vec<(Channel, usize)> = Vec::new();
    for (j, row) in busy.iter().enumerate() {
        let ch = Channel(j as u32 + 1);
        if Some(ch) == current {
            continue;
        }
        let mut changing = 0;
        while t + changing < horizon && row[t + changing] {
            changing += 1;
        }
        if changing == 0 {
            let mut vacant = 0;
            while t + vacant < horizon && !row[t + vacant] {
                vacant += 1;
            }
            idle.push((ch, vacant));
        }
    }
    let lnc: Vec<Channel> = idle.iter().map(|(c, _)| *c).collect();
    let mut lsc = Vec::new();
    let mut left = idle;
    while !left.is_empty() {
        let mut best = 0;
        for i in 1..left.len() {
            if left[i].1 > left[best].1 || (left[i].1 == left[best].1 && left[i].0 < left[best].0) {
                best = i;
            }
        }
        lsc.push(left.remove(best).0);
    }
    (lsc, lnc)
}

fn c10_policy_oracle() -> Outcome {
    let mut rng = derive_stream(2024, "acceptance-oracle", 0);
    let mut mismatches = Vec::new();
    for case in 0..1_000 {
        let m = rng.random_range(1..=5usize);
        let horizon = rng.random_range(1..=30usize);
        let density = rng.random_range(0.0..1.0);
        let busy: Vec<Vec<bool>> = (0..m)
            .map(|_| (0..horizon).map(|_| rng.random_bool(density)).collect())
            .collect();
        let channels = busy
            .iter()
            .map(|row| {
                let mut ivs = Vec::new();
                let mut s = 0;
                while s < horizon {
                    if row[s] {
                        let mut e = s;
                        while e + 1 < horizon && row[e + 1] {
                            e += 1;
                        }
                        ivs.push(BusyInterval {
                            start: s as u64,
                            end: e as u64,
                        });
                        s = e + 1;
                    } else {
                        s += 1;
                    }
                }
                ChannelSchedule::from_intervals(ivs, horizon as u64).unwrap()
            })
            .collect();
        let sched = PuSchedule::new(channels, horizon as u64);
        let current = match rng.random_range(0..=m) {
            0 => None,
            j => Some(Channel(j as u32)),
        };
        let t = rng.random_range(0..horizon);
        let th = rng.random_range(0..4u64);
        let ranking = build_ranking(&sched.predict(current, t as u64).unwrap(), th);
        let (lsc, lnc) = oracle_lists(&busy, current, t);
        if ranking.lsc != lsc || ranking.lnc != lnc {
            mismatches.push(case);
        }
    }
    if mismatches.is_empty() {
        pass("1000 instances, all equal")
    } else {
        fail(format!(
            "{} mismatches, first cases {:?}",
            mismatches.len(),
            &mismatches[..mismatches.len().min(5)]
        ))
    }
}

fn c11_determinism() -> Outcome {
    let mut runs = 0;
    let mut problems = Vec::new();
    for protocol in Protocol::ALL {
        for seed in 1..=5 {
            let cfg = SimConfig {
                protocol,
                seed,
                ..SimConfig::default()
            };
            let (ma, ta) = run_simulation(&cfg).unwrap();
            let (mb, tb) = run_simulation(&cfg).unwrap();
            runs += 2;
            if ta.digest() != tb.digest() || ma != mb {
                problems.push(format!("{protocol} seed {seed}: digests differ"));
            }
            if ma.conservation_violations + mb.conservation_violations != 0 {
                problems.push(format!("{protocol} seed {seed}: conservation broken"));
            }
        }
    }
    if problems.is_empty() {
        pass(format!(
            "{runs} traced runs, digests reproducible, conservation held every slot"
        ))
    } else {
        fail(problems.join("; "))
    }
}

fn c12_performance(s: &Sweeps) -> Outcome {
    let cfg = SimConfig::default();
    let start = Instant::now();
    run_metrics(&cfg).unwrap();
    let single = start.elapsed();
    let detail = format!(
        "single run {:.3}s, preset suite {:.1}s",
        single.as_secs_f64(),
        s.elapsed.as_secs_f64()
    );
    if single < Duration::from_secs(5) && s.elapsed < Duration::from_secs(30 * 60) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() -> ExitCode {
    let sweeps = run_sweeps();
    let results: Vec<(&str, Outcome)> = vec![
        (
            "zero PU-SU collision under gcs_srv",
            c1_no_pu_collision(&sweeps),
        ),
        (
            "zero SU-SU collision under all protocols",
            c2_no_su_collision(&sweeps),
        ),
        ("worked-example replay", c3_replay()),
        ("throughput falls with PU load", c4_fig4_trend(&sweeps)),
        (
            "throughput ordering vs baselines",
            c5_fig5_ordering(&sweeps),
        ),
        (
            "service time ordering vs baselines",
            c6_fig6_service(&sweeps),
        ),
        ("throughput vs number of pairs", c7_fig7_trend(&sweeps)),
        (
            "throughput saturates with channels",
            c8_fig8_saturation(&sweeps),
        ),
        ("PU busy fraction calibration", c9_pu_calibration()),
        ("ranking equals slot-scan oracle", c10_policy_oracle()),
        ("determinism and conservation", c11_determinism()),
        ("performance envelope", c12_performance(&sweeps)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} passed, {} failed", results.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
