//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relsched::harness::{brute_force_oracle, ft_etas, non_ft_etas, run_pipeline, ExperimentConfig, OracleLimits};
use relsched::reliability::TargetGuard;
use relsched::schedule::schedule_log_reliability;
use relsched::*;

/// Log-space slack for "reliability >= r_req" at maximum frequency.
const LOG_TOL: f64 = 1e-9;
/// FA must land in `[r_req, r_req + ZETA)`.
const ZETA: f64 = 1e-5;
/// Exact-`r_req` comparisons after FA allow this much log-space rounding.
const FA_LOG_TOL: f64 = 1e-12;
/// Relative slack when comparing heuristic energy with the oracle optimum.
const ENERGY_REL_TOL: f64 = 1e-9;
/// Largest allowed share of FA runs that hit the iteration cap.
const MAX_CAP_SHARE: f64 = 0.05;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(out: &mut Vec<Outcome>, id: u32, name: &'static str, pass: bool, detail: String) {
    println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    out.push(Outcome { id, name, pass, detail });
}

fn guard_of(res: &AllocationResult<f64>) -> TargetGuard {
    res.diagnostics.guard
}

fn fft_count(rho: u32) -> usize {
    (2 + rho as usize) * (1 << rho) - 1
}

fn ge_count(rho: u32) -> usize {
    let r = rho as usize;
    (r * r + r - 2) / 2
}

fn criterion_1(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let mut bad = Vec::new();
    let cfg = GeneratorConfig::default().with_processors(4);
    for rho in 1..=6 {
        let g: TaskGraph64 = generate_fft(rho, &cfg).unwrap();
        if g.real_task_count() != fft_count(rho) {
            bad.push(format!("fft {rho}: {}", g.real_task_count()));
        }
    }
    for rho in 2..=25 {
        let g: TaskGraph64 = generate_ge(rho, &cfg).unwrap();
        if g.real_task_count() != ge_count(rho) {
            bad.push(format!("ge {rho}: {}", g.real_task_count()));
        }
    }
    let fft5 = generate_fft::<f64>(5, &cfg).unwrap().real_task_count();
    let ge20 = generate_ge::<f64>(20, &cfg).unwrap().real_task_count();
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && fft5 == 223 && ge20 == 209 && elapsed < Duration::from_secs(1);
    report(
        out,
        1,
        "generator exactness",
        pass,
        format!("fft(5)={fft5} ge(20)={ge20} mismatches={bad:?} in {elapsed:.2?}"),
    );
}

struct FaTally {
    runs: usize,
    out_of_band: Vec<String>,
    energy_up: usize,
    cap_hits: usize,
    safety: usize,
}

impl FaTally {
    fn new() -> Self {
        Self {
            runs: 0,
            out_of_band: Vec::new(),
            energy_up: 0,
            cap_hits: 0,
            safety: 0,
        }
    }

    fn check(&mut self, tag: String, alloc: &AllocationResult<f64>, g: &TaskGraph64, p: &Platform64, r_req: f64) {
        let (s, rep) = fa(&alloc.schedule, g, p, r_req, &FaConfig::default()).unwrap();
        validate(&s, g, p).unwrap();
        self.runs += 1;
        let log_r = schedule_log_reliability(&s, g, p).unwrap();
        let r = log_r.exp();
        if !(log_r >= r_req.ln() - FA_LOG_TOL && r - r_req < ZETA) {
            self.out_of_band.push(format!("{tag}: gap {:.3e} ({:?})", r - r_req, rep.stop));
        }
        if rep.energy_after > rep.energy_before {
            self.energy_up += 1;
        }
        self.cap_hits += usize::from(rep.cap_hit());
        self.safety += rep.safety_violations;
    }
}

/// Runs criteria 2 and 3 over the same pipeline runs; returns guard hits.
fn criteria_2_3(out: &mut Vec<Outcome>) -> TargetGuard {
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.processors, 32);
    let grid = MertGrid::default().configs(225);
    let mut guard = TargetGuard::default();
    let (mut nft_runs, mut ft_runs, mut worst) = (0, 0, f64::INFINITY);
    let mut violations = Vec::new();
    let mut tally = FaTally::new();
    for i in 0..100 {
        let inst = cfg.instance(i).unwrap();
        assert_eq!(inst.graph.real_task_count(), 223);
        let (g, p) = (&inst.graph, &inst.platform);
        let mc = grid[i % grid.len()];
        for eta in non_ft_etas() {
            let r_req = inst.r_req(eta);
            let alloc = mert(g, p, r_req, &mc).unwrap();
            validate(&alloc.schedule, g, p).unwrap();
            let margin = schedule_log_reliability(&alloc.schedule, g, p).unwrap() - r_req.ln();
            worst = worst.min(margin);
            if margin < -LOG_TOL {
                violations.push(format!("mert i={i} eta={eta}"));
            }
            guard.merge(guard_of(&alloc));
            nft_runs += 1;
            tally.check(format!("mert i={i} eta={eta}"), &alloc, g, p, r_req);
        }
        for eta in ft_etas(inst.eta_max()) {
            let r_req = inst.r_req(eta);
            let alloc = eafts(g, p, r_req).unwrap();
            validate(&alloc.schedule, g, p).unwrap();
            let margin = schedule_log_reliability(&alloc.schedule, g, p).unwrap() - r_req.ln();
            worst = worst.min(margin);
            if margin < -LOG_TOL {
                violations.push(format!("eafts i={i} eta={eta}"));
            }
            guard.merge(guard_of(&alloc));
            ft_runs += 1;
            tally.check(format!("eafts i={i} eta={eta}"), &alloc, g, p, r_req);
        }
    }
    report(
        out,
        2,
        "feasibility of MERT and EAFTS allocations",
        violations.is_empty() && ft_runs > 0,
        format!(
            "{nft_runs} non-ft + {ft_runs} ft runs, {} violations, min log margin {worst:.3e}, {:.1?}",
            violations.len(),
            start.elapsed()
        ),
    );
    let cap_share = tally.cap_hits as f64 / tally.runs as f64;
    let pass = tally.out_of_band.is_empty() && tally.energy_up == 0 && tally.safety == 0 && cap_share <= MAX_CAP_SHARE;
    report(
        out,
        3,
        "FA safety and convergence",
        pass,
        format!(
            "{} runs, {} outside [r_req, r_req+1e-5) {:?}, {} energy increases, {} safety violations, cap hits {:.2}%",
            tally.runs,
            tally.out_of_band.len(),
            tally.out_of_band.iter().take(5).collect::<Vec<_>>(),
            tally.energy_up,
            tally.safety,
            100.0 * cap_share
        ),
    );
    guard
}

fn criterion_4(out: &mut Vec<Outcome>) -> TargetGuard {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut guard = TargetGuard::default();
    let (mut checked, mut mismatched) = (0, 0);
    for i in 0..200u64 {
        let m = rng.gen_range(2..=12);
        let gen = GeneratorConfig::default().with_processors(m).with_seed(rng.gen());
        let g: TaskGraph64 = if i % 2 == 0 {
            generate_fft(rng.gen_range(1..=4), &gen).unwrap()
        } else {
            generate_ge(rng.gen_range(2..=9), &gen).unwrap()
        };
        let p: Platform64 = random_platform(m, &Default::default(), rng.gen()).unwrap();
        let r_req = rng.gen_range(0.9..=1.0) * ReliabilityMaxima::compute(&g, &p).non_ft();
        let mc = MertConfig::new(f64::from(rng.gen_range(0..=10u8)) / 10.0, rng.gen_range(0..=g.len()));
        let alloc = mert(&g, &p, r_req, &mc).unwrap();
        guard.merge(guard_of(&alloc));
        let mut schedules = vec![alloc.schedule.clone()];
        // scaled frequencies exercise non-integer durations
        if i % 4 == 1 {
            schedules.push(fa(&alloc.schedule, &g, &p, r_req, &FaConfig::default()).unwrap().0);
        }
        for s in &schedules {
            let sim = simulate(s, &g, &p).unwrap();
            checked += 1;
            let same = g.tasks().all(|t| {
                s.replicas(t)
                    .iter()
                    .zip(&sim[t.0])
                    .all(|(r, &(a, b))| r.start.to_bits() == a.to_bits() && r.finish.to_bits() == b.to_bits())
            });
            mismatched += usize::from(!same);
        }
    }
    report(
        out,
        4,
        "analytic timing equals discrete-event simulation",
        mismatched == 0 && checked >= 200,
        format!("{checked} schedules, {mismatched} with differing bits"),
    );
    guard
}

fn criterion_5(out: &mut Vec<Outcome>) -> TargetGuard {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ranges = ParameterRanges {
        frequency_step: 0.1,
        ..Default::default()
    };
    let limits = OracleLimits::default();
    let mut guard = TargetGuard::default();
    let (mut feas_mismatch, mut below_opt, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    let mut counts = [0usize; 3];
    for i in 0..50u64 {
        let gen = GeneratorConfig::default().with_processors(3).with_seed(rng.gen());
        let g: TaskGraph64 = match i % 3 {
            0 => generate_fft(1, &gen).unwrap(),
            1 => generate_ge(3, &gen).unwrap(),
            _ => generate_ge(2, &gen).unwrap(),
        };
        assert!(g.real_task_count() <= 5);
        let p: Platform64 = random_platform(3, &ranges, rng.gen()).unwrap();
        let max = ReliabilityMaxima::compute(&g, &p);
        let r_req = match i % 5 {
            0 | 1 => rng.gen_range(0.9..=1.0) * max.non_ft(),
            2 | 3 => max.non_ft() + rng.gen_range(0.05..=0.95) * (max.ft() - max.non_ft()),
            // at least as strict as anything achievable
            _ => 1.0,
        };
        let opt = brute_force_oracle(&g, &p, r_req, &limits).unwrap();
        let scenario = max.classify(r_req);
        counts[scenario as usize] += 1;
        let heur = match scenario {
            ConstraintScenario::NonFaultTolerant => Some((Algorithm::Mert, Algorithm::Eafts)),
            ConstraintScenario::FaultTolerant => Some((Algorithm::Eafts, Algorithm::Eafts)),
            ConstraintScenario::Infeasible => None,
        };
        let mut feasible = false;
        if let Some((primary, ft)) = heur {
            for a in [primary, ft] {
                let res = run_pipeline(a, &g, &p, r_req, &MertConfig::default(), Some(&FaConfig::default())).unwrap();
                guard.merge(res.allocation.diagnostics.guard);
                feasible = res.log_reliability >= r_req.ln() - LOG_TOL;
                if let Some(e) = opt.energy {
                    if res.energy < e * (1.0 - ENERGY_REL_TOL) {
                        below_opt.push(format!("i={i} {a}: {} < {e}", res.energy));
                    }
                    if a == Algorithm::Eafts {
                        ratios.push(res.energy / e);
                    }
                }
            }
        }
        if feasible != opt.feasible() {
            feas_mismatch.push(format!("i={i} heuristic {feasible} oracle {}", opt.feasible()));
        }
    }
    let elapsed = start.elapsed();
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    report(
        out,
        5,
        "brute-force oracle agreement",
        feas_mismatch.is_empty() && below_opt.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "50 instances (non-ft/ft/infeasible {counts:?}), feasibility mismatches {feas_mismatch:?}, below optimum {below_opt:?}, EAFTS+FA/optimum mean {mean:.4} max {max_ratio:.4}, {elapsed:.1?}"
        ),
    );
    guard
}

fn criterion_6(out: &mut Vec<Outcome>) -> usize {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        mode: Mode::Ft,
        seed: 6,
        // roughly 1 in 140 fresh draws reaches the pilot maximum
        max_resample_attempts: 20_000,
        ..Default::default()
    };
    let rep = run_sweep(&cfg).unwrap();
    let rs = rep.resampling.clone().unwrap();
    let etas = ft_etas(rs.eta_max);
    let mean = |eta: f64, algo: &str| {
        rep.aggregates
            .iter()
            .find(|a| a.eta == eta && a.algorithm == algo)
            .map(|a| (a.energy, a.replicas, a.instances))
    };
    let mut bad = Vec::new();
    let (mut rr_reps, mut maxre_reps) = (0.0, 0.0);
    for &eta in &etas {
        let (e, _, n) = mean(eta, "eafts+fa").unwrap();
        let (er, rr, nr) = mean(eta, "rr+fa").unwrap();
        let (em, mr, nm) = mean(eta, "maxre+fa").unwrap();
        assert!(n == cfg.instances && nr == n && nm == n || rs.exhausted);
        if !(e <= er && e <= em) {
            bad.push(format!("eta {eta}: eafts {e:.1} rr {er:.1} maxre {em:.1}"));
        }
        if rr > mr {
            bad.push(format!("eta {eta}: rr replicas {rr:.1} > maxre {mr:.1}"));
        }
        rr_reps += rr;
        maxre_reps += mr;
    }
    let unmet = rep.rows.iter().filter(|r| !r.meets_constraint).count();
    report(
        out,
        6,
        "fault-tolerant directional comparison",
        bad.is_empty() && !rs.exhausted && unmet == 0 && !etas.is_empty(),
        format!(
            "eta_max {} over {} etas, {} kept of {} draws, mean replicas rr {:.1} maxre {:.1}, {} unmet rows, {} energy drops with eta (reported), {bad:?}, {:.1?}",
            rs.eta_max,
            etas.len(),
            rs.kept,
            rs.attempts,
            rr_reps / etas.len() as f64,
            maxre_reps / etas.len() as f64,
            unmet,
            rep.energy_drops.len(),
            start.elapsed()
        ),
    );
    rep.guard_hits()
}

fn criterion_7(out: &mut Vec<Outcome>) {
    let cfg = ExperimentConfig {
        workload: Workload::Fft { rho: 3 },
        processors: 8,
        instances: 5,
        seed: 77,
        mert_grid: MertGrid {
            alphas: vec![0.0, 0.5, 1.0],
            ell_fractions: vec![0.0, 0.5],
        },
        ..Default::default()
    };
    let run = |cfg: &ExperimentConfig| {
        let mut buf = Vec::new();
        run_sweep(cfg).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    let a = run(&cfg);
    let b = run(&cfg);
    let ft = ExperimentConfig {
        mode: Mode::Ft,
        ..cfg.clone()
    };
    let c = run(&ft);
    let d = run(&ft);
    report(
        out,
        7,
        "sweep CSV determinism",
        a == b && c == d && !a.is_empty(),
        format!("non-ft {} bytes identical={}, ft {} bytes identical={}", a.len(), a == b, c.len(), c == d),
    );
}

// Runs without the libtest harness so the criterion lines always reach the log.
fn main() {
    let mut out = Vec::new();
    criterion_1(&mut out);
    let g23 = criteria_2_3(&mut out);
    let g4 = criterion_4(&mut out);
    let g5 = criterion_5(&mut out);
    let g6 = criterion_6(&mut out);
    criterion_7(&mut out);
    let mut guard = g23;
    guard.merge(g4);
    guard.merge(g5);
    report(
        &mut out,
        8,
        "reliability guardrails never fire",
        guard.total() == 0 && g6 == 0,
        format!(
            "target above bound {}, prefix deficit {} in criteria 2-5; {g6} hits in the criterion 6 sweep",
            guard.target_above_bound, guard.prefix_deficit
        ),
    );
    let failed: Vec<String> = out
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} {}: {}", o.id, o.name, o.detail))
        .collect();
    if !failed.is_empty() {
        eprintln!("failed criteria:\n{}", failed.join("\n"));
        std::process::exit(1);
    }
    println!("all {} criteria passed", out.len());
}
