//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test -p recyc-miso-cli --test acceptance -- 1 4 10`.

use std::process::Command;
use std::time::Instant;

use rand::Rng;

use recyc_miso::power::{mean_allocated, DEFAULT_BUDGET_TOL};
use recyc_miso::{
    antenna_penalty, avg_active_sweep, check_lemma1, db_to_linear, draw_channel, run_point, schedule_exhaustive,
    schedule_fast, solve_water_level, sweep_harvest_cap, sweep_m, verify_harvest_identity, CouplingMatrix,
    CouplingSpec, ExperimentConfig, GainSamples, LayoutKind, Mode, SampleStream, SchedulerKind, SchedulerLimits,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Rate pairs seen by any criterion, checked for ordering by criterion 4.
#[derive(Default)]
struct Ledger {
    pairs: Vec<(String, f64, f64)>,
}

impl Ledger {
    fn add(&mut self, label: impl Into<String>, ryc: f64, noryc: f64) {
        self.pairs.push((label.into(), ryc, noryc));
    }
}

fn fig2(snr_db: f64) -> ExperimentConfig {
    ExperimentConfig {
        m: 25,
        max_harvesters: Some(5),
        coupling: CouplingSpec::Scalar {
            alpha: db_to_linear(-15.0),
        },
        snr_db,
        n_samples: 100_000,
        seed: 2024,
        scheduler: SchedulerKind::Fast,
        ..ExperimentConfig::default()
    }
}

fn criterion_1(_: &mut Ledger) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    for m in 2..=12 {
        for (ai, &alpha) in [0.01, 0.0316, 0.1, 0.3].iter().enumerate() {
            let coupling = CouplingMatrix::symmetric(m, alpha).unwrap();
            for n in 0..10_000u64 {
                let mut rng = SampleStream::new(1000 + 100 * m as u64 + ai as u64, n);
                let sample = draw_channel(&mut rng, m, 1.0).unwrap();
                let fast = schedule_fast(&sample, alpha, SchedulerLimits::unlimited()).unwrap();
                let full = schedule_exhaustive(&sample, &coupling, SchedulerLimits::unlimited()).unwrap();
                let rel = (fast.g() - full.g()).abs() / full.g();
                worst = worst.max(rel);
                if rel > 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("440000 draws, {violations} above 1e-12, worst relative error {worst:.2e}"),
    )
}

fn criterion_2(_: &mut Ledger) -> Verdict {
    let mut violations = 0usize;
    let mut total = 0usize;
    for (ai, &alpha) in [0.01, 0.1, 0.3].iter().enumerate() {
        for &m in &[4usize, 8, 16] {
            for n in 0..10_000u64 {
                let mut rng = SampleStream::new(2000 + 10 * m as u64 + ai as u64, n);
                let mut h: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 10.0 + 1e-3).collect();
                h.sort_by(|a, b| b.total_cmp(a));
                total += 1;
                if !check_lemma1(&h, alpha, m) {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{total} sorted draws, {violations} violations"),
    )
}

/// Water level from the sorted active-set closed form.
fn closed_form_level(g: &[f64], budget: f64) -> f64 {
    let mut inv: Vec<f64> = g.iter().map(|x| 1.0 / x).collect();
    inv.sort_by(f64::total_cmp);
    let n = inv.len() as f64;
    let mut prefix = 0.0;
    let mut level = 0.0;
    for (j, &w) in inv.iter().enumerate() {
        prefix += w;
        let candidate = (n * budget + prefix) / (j + 1) as f64;
        if candidate > w {
            level = candidate;
        } else {
            break;
        }
    }
    level
}

fn criterion_3(_: &mut Ledger) -> Verdict {
    let mut worst_budget: f64 = 0.0;
    let mut worst_level: f64 = 0.0;
    for n in 0..100u64 {
        let mut rng = SampleStream::new(3000, n);
        let len = rng.random_range(1..=1000);
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let g: Vec<f64> = (0..len).map(|_| scale * rng.random_range(1e-3..1.0f64)).collect();
        let budget = 10f64.powf(rng.random_range(-2.0..2.0));
        let mode = if n % 2 == 0 {
            Mode::Recycling
        } else {
            Mode::NonRecycling
        };
        let samples = GainSamples::new(g.clone(), mode).unwrap();
        let policy = solve_water_level(&samples, budget, DEFAULT_BUDGET_TOL).unwrap();
        worst_budget = worst_budget.max((mean_allocated(&samples, &policy) - budget).abs() / budget);
        let oracle = closed_form_level(&g, budget);
        worst_level = worst_level.max((policy.water_level() - oracle).abs() / oracle);
    }
    // Monte Carlo gain sets from real draws, both transmitters
    for (i, snr) in [-10.0, 10.0].into_iter().enumerate() {
        let cfg = ExperimentConfig {
            n_samples: 20_000,
            ..fig2(snr)
        };
        let alpha = db_to_linear(-15.0);
        let budget = cfg.budget();
        let (mut ryc, mut noryc) = (Vec::new(), Vec::new());
        for n in 0..cfg.n_samples as u64 {
            let mut rng = SampleStream::new(3100 + i as u64, n);
            let s = draw_channel(&mut rng, cfg.m, cfg.mean_gain()).unwrap();
            ryc.push(schedule_fast(&s, alpha, SchedulerLimits::capped(5)).unwrap().g());
            noryc.push(s.total_power());
        }
        for (g, mode) in [(ryc, Mode::Recycling), (noryc, Mode::NonRecycling)] {
            let samples = GainSamples::new(g, mode).unwrap();
            let policy = solve_water_level(&samples, budget, DEFAULT_BUDGET_TOL).unwrap();
            worst_budget = worst_budget.max((mean_allocated(&samples, &policy) - budget).abs() / budget);
        }
    }
    verdict(
        worst_budget <= 1e-6 && worst_level <= 1e-9,
        format!("worst budget error {worst_budget:.2e} (limit 1e-6), worst level vs closed form {worst_level:.2e} (limit 1e-9)"),
    )
}

fn criterion_4(ledger: &mut Ledger) -> Verdict {
    let grid_configs = {
        let mut v = Vec::new();
        for &alpha_db in &[-30.0, -15.0, -5.0] {
            for &snr_db in &[-10.0, 10.0] {
                for &cap in &[None, Some(2)] {
                    v.push(ExperimentConfig {
                        m: 12,
                        max_harvesters: cap,
                        coupling: CouplingSpec::Scalar {
                            alpha: db_to_linear(alpha_db),
                        },
                        snr_db,
                        n_samples: 5_000,
                        seed: 4000,
                        ..ExperimentConfig::default()
                    });
                }
            }
        }
        v.push(ExperimentConfig {
            m: 10,
            max_harvesters: Some(4),
            coupling: CouplingSpec::Geometry {
                layout: LayoutKind::Ula,
                spacing: 0.25,
                alpha_ref: db_to_linear(-10.3),
                d_ref: 1.0 / 3.0,
                exponent: 2.0,
            },
            n_samples: 5_000,
            seed: 4001,
            scheduler: SchedulerKind::Exhaustive,
            ..ExperimentConfig::default()
        });
        v
    };
    for (i, cfg) in grid_configs.iter().enumerate() {
        let ms: Vec<usize> = (2..=cfg.m).collect();
        for r in sweep_m(cfg, &ms).unwrap().rows {
            ledger.add(format!("grid {i} m={}", r.x), r.rate_ryc, r.rate_noryc);
        }
    }
    let bad: Vec<&(String, f64, f64)> = ledger.pairs.iter().filter(|(_, r, c)| r < c).collect();
    verdict(
        bad.is_empty(),
        match bad.first() {
            None => format!("{} sweep rows, 0 violations", ledger.pairs.len()),
            Some((l, r, c)) => format!("{} violations, first at {l}: {r} < {c}", bad.len()),
        },
    )
}

fn criterion_5(_: &mut Ledger) -> Verdict {
    let cfg = ExperimentConfig {
        m: 4,
        max_harvesters: None,
        n_samples: 1_000_000,
        seed: 5000,
        ..ExperimentConfig::default()
    };
    let a = verify_harvest_identity(&cfg).unwrap();
    let diff = (a.simulated_harvest - a.analytic_harvest).abs();
    let sigmas = diff / a.std_err_difference;
    let rel = diff / a.analytic_harvest;
    let cross_sigmas = a.cross_term.abs() / a.std_err_cross;
    verdict(
        sigmas <= 3.0 && rel <= 0.01 && cross_sigmas <= 5.0,
        format!(
            "harvest {:.6e} vs {:.6e}: {sigmas:.2} se, {:.3}% rel; cross term {cross_sigmas:.2} se",
            a.simulated_harvest,
            a.analytic_harvest,
            100.0 * rel
        ),
    )
}

fn criterion_6(ledger: &mut Ledger) -> Verdict {
    let targets = [(10.0, 7.0), (0.0, 10.0), (-10.0, 20.0)];
    let mut gains = Vec::new();
    let mut pass = true;
    for (snr, target) in targets {
        let p = run_point(&fig2(snr)).unwrap();
        ledger.add(format!("fig2 snr={snr}"), p.rate_ryc, p.rate_noryc);
        let g = p.gain_pct();
        pass &= (g - target).abs() <= 2.0;
        gains.push(g);
    }
    pass &= gains[2] > gains[1] && gains[1] > gains[0];
    verdict(
        pass,
        format!(
            "gain_pct {:.2} / {:.2} / {:.2} at 10 / 0 / -10 dB (targets 7 / 10 / 20 +/- 2, strictly increasing)",
            gains[0], gains[1], gains[2]
        ),
    )
}

fn criterion_7(_: &mut Ledger) -> Verdict {
    let cfg = ExperimentConfig {
        max_harvesters: Some(10),
        ..fig2(10.0)
    };
    let ms: Vec<usize> = (5..=25).collect();
    let rows = avg_active_sweep(&cfg, &ms).unwrap();
    let worst = rows
        .iter()
        .max_by(|a, b| a.avg_harvesting.total_cmp(&b.avg_harvesting))
        .unwrap();
    let over: Vec<usize> = rows.iter().filter(|r| r.avg_harvesting >= 6.0).map(|r| r.m).collect();
    verdict(
        over.is_empty(),
        format!(
            "max avg harvesting {:.3} at M={}; M with >= 6: {:?}",
            worst.avg_harvesting, worst.m, over
        ),
    )
}

fn criterion_8(ledger: &mut Ledger) -> Verdict {
    let cfg = fig2(10.0);
    let caps: Vec<usize> = (6..=10).collect();
    let sweep = sweep_harvest_cap(&cfg, &caps).unwrap();
    for r in &sweep.rows {
        ledger.add(format!("cap={}", r.x), r.rate_ryc, r.rate_noryc);
    }
    let base = sweep.row(6).unwrap().rate_ryc;
    let mut pass = true;
    let mut parts = Vec::new();
    for cap in 7..=10 {
        let r = sweep.row(cap).unwrap();
        let excess = (r.rate_ryc - base) / r.std_err_ryc;
        pass &= r.rate_ryc - base < 2.0 * r.std_err_ryc;
        parts.push(format!("cap {cap}: {excess:+.2} se"));
    }
    verdict(pass, format!("rate(cap) - rate(6): {}", parts.join(", ")))
}

fn criterion_9(ledger: &mut Ledger) -> Verdict {
    let cfg = ExperimentConfig {
        m: 20,
        max_harvesters: Some(6),
        coupling: CouplingSpec::Geometry {
            layout: LayoutKind::Hex,
            spacing: 1.0 / 3.0,
            alpha_ref: db_to_linear(-10.3),
            d_ref: 1.0 / 3.0,
            exponent: 2.0,
        },
        snr_db: 10.0,
        n_samples: 10_000,
        seed: 9000,
        scheduler: SchedulerKind::Exhaustive,
        ..ExperimentConfig::default()
    };
    let ms: Vec<usize> = (2..=20).collect();
    let sweep = sweep_m(&cfg, &ms).unwrap();
    for r in &sweep.rows {
        ledger.add(format!("hex m={}", r.x), r.rate_ryc, r.rate_noryc);
    }
    let penalty = antenna_penalty(&sweep, 20).unwrap();
    verdict(penalty >= 3, format!("antenna_penalty(20) = {penalty} (need >= 3)"))
}

fn run_cli(args: &[&str], threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_recyc-miso"))
        .args(args)
        .env("RECYC_MISO_THREADS", threads.to_string())
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_10(_: &mut Ledger) -> Verdict {
    let runs: [&[&str]; 4] = [
        &[
            "rate-sweep",
            "--m",
            "5..12",
            "--snr-db",
            "0",
            "--n-samples",
            "20000",
            "--seed",
            "10",
        ],
        &[
            "cap-sweep",
            "--m",
            "12",
            "--caps",
            "0..6",
            "--n-samples",
            "20000",
            "--seed",
            "11",
        ],
        &["active-sweep", "--m", "5..15", "--cap", "10", "--n-samples", "20000"],
        &[
            "penalty",
            "--m",
            "2..9",
            "--layout",
            "hex",
            "--scheduler",
            "exhaustive",
            "--cap",
            "6",
            "--n-samples",
            "5000",
        ],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let reference = run_cli(args, 1);
        let again = run_cli(args, 1);
        let wide = run_cli(args, 8);
        if reference != again || reference != wide {
            mismatched.push(args[0]);
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "4 subcommands, byte-identical across repeat and 1 vs 8 workers".to_string()
        } else {
            format!("output differs for {mismatched:?}")
        },
    )
}

type Criterion = fn(&mut Ledger) -> Verdict;

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // criterion 4 runs last so it also checks the rows produced by the others
    let order: [(usize, Criterion); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (4, criterion_4),
    ];
    let mut ledger = Ledger::default();
    let mut results = Vec::new();
    for (id, run) in order {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run(&mut ledger);
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            secs,
            v.detail
        );
        results.push((id, v.pass));
    }
    results.sort_unstable();
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed {:?}",
        results.len() - failed.len(),
        failed.len(),
        failed
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
