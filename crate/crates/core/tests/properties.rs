use proptest::prelude::*;

use relsched::graph::{parse_dot, parse_json, to_dot, to_json};
use relsched::harness::{brute_force_oracle, OracleLimits};
use relsched::schedule::{schedule_from_json, schedule_log_reliability, schedule_to_json};
use relsched::*;

fn instance(fft: bool, rho: u32, m: usize, seed: u64) -> (TaskGraph64, Platform64) {
    let gen = GeneratorConfig::default().with_processors(m).with_seed(seed);
    let g = if fft {
        generate_fft(rho, &gen).unwrap()
    } else {
        generate_ge(rho + 1, &gen).unwrap()
    };
    let p = random_platform(m, &Default::default(), seed.wrapping_mul(31)).unwrap();
    (g, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_graphs_are_well_formed(fft: bool, rho in 1u32..5, m in 1usize..6, seed: u64) {
        let (g, _) = instance(fft, rho, m, seed);
        let order = g.topological_order();
        prop_assert_eq!(order.len(), g.len());
        let mut pos = vec![0; g.len()];
        for (i, t) in order.iter().enumerate() {
            pos[t.0] = i;
        }
        for e in g.edges() {
            prop_assert!(pos[e.from.0] < pos[e.to.0]);
            prop_assert!(e.weight >= 0.0);
        }
        let sources: Vec<_> = g.tasks().filter(|&t| g.predecessors(t).is_empty()).collect();
        let sinks: Vec<_> = g.tasks().filter(|&t| g.successors(t).is_empty()).collect();
        prop_assert_eq!(sources, vec![g.entry()]);
        prop_assert_eq!(sinks, vec![g.exit()]);
    }

    #[test]
    fn graph_files_roundtrip(fft: bool, rho in 1u32..4, seed: u64) {
        let (g, _) = instance(fft, rho, 3, seed);
        let j: TaskGraph64 = parse_json(&to_json(&g)).unwrap();
        prop_assert_eq!(j.wcet_matrix(), g.wcet_matrix());
        prop_assert_eq!(j.edges(), g.edges());
        let d: TaskGraph64 = parse_dot(&to_dot(&g)).unwrap();
        prop_assert_eq!(d.wcet_matrix(), g.wcet_matrix());
        prop_assert_eq!(d.edges(), g.edges());
    }

    #[test]
    fn reliability_falls_and_fault_rate_per_cycle_falls_with_frequency(seed: u64, wcet in 1.0f64..200.0) {
        let p: Platform64 = random_platform(4, &Default::default(), seed).unwrap();
        for k in 0..4 {
            let pr = p.processor(k);
            let mut prev: Option<(f64, f64)> = None;
            for g in (0..=p.grid_len(k)).rev().step_by(50) {
                let f = p.grid_frequency(k, g);
                let rate = pr.fault_rate_at(f) / f;
                let rel = p.reliability(k, wcet, f).unwrap();
                if let Some((r0, l0)) = prev {
                    prop_assert!(rate < r0);
                    prop_assert!(rel >= l0);
                }
                prev = Some((rate, rel));
            }
        }
    }

    #[test]
    fn bounds_multiply_to_the_constraint(fft: bool, rho in 1u32..5, seed: u64, eta in 0.5f64..1.0) {
        let (g, p) = instance(fft, rho, 4, seed);
        let max = ReliabilityMaxima::compute(&g, &p);
        let r_req = eta * max.non_ft();
        let plan = ReliabilityPlan::bounds(&g, &p, r_req, ConstraintScenario::NonFaultTolerant).unwrap();
        let sum: f64 = plan.log_bounds().iter().sum();
        prop_assert!((sum - r_req.ln()).abs() <= 1e-12 * r_req.ln().abs().max(1.0));
        for t in g.tasks() {
            prop_assert!(plan.log_bound(t) <= max.task_log_non_ft[t.0] + 1e-15);
        }
    }

    #[test]
    fn every_scheduler_meets_its_constraint(fft: bool, rho in 1u32..5, m in 2usize..7, seed: u64, x in 0.0f64..1.0) {
        let (g, p) = instance(fft, rho, m, seed);
        let max = ReliabilityMaxima::compute(&g, &p);
        let nft = (0.9 + 0.1 * x) * max.non_ft();
        let ft = max.non_ft() + x * (max.ft() - max.non_ft());
        let cfg = MertConfig::new(x, ((x * g.len() as f64) as usize).min(g.len()));
        let mut runs = vec![
            (nft, mert(&g, &p, nft, &cfg).unwrap()),
            (nft, mr(&g, &p).unwrap()),
        ];
        if max.classify(ft) == ConstraintScenario::FaultTolerant {
            runs.push((ft, eafts(&g, &p, ft).unwrap()));
            runs.push((ft, rr(&g, &p, ft).unwrap()));
            runs.push((ft, maxre(&g, &p, ft).unwrap()));
        }
        for (r_req, res) in runs {
            validate(&res.schedule, &g, &p).unwrap();
            let lr = schedule_log_reliability(&res.schedule, &g, &p).unwrap();
            prop_assert!(lr >= r_req.ln() - 1e-9);
            prop_assert_eq!(res.diagnostics.guard.total(), 0);
            let (s, rep) = fa(&res.schedule, &g, &p, r_req, &FaConfig::default()).unwrap();
            validate(&s, &g, &p).unwrap();
            prop_assert_eq!(rep.safety_violations, 0);
            prop_assert!(rep.energy_after <= rep.energy_before);
            prop_assert!(schedule_log_reliability(&s, &g, &p).unwrap() >= r_req.ln() - 1e-12);
        }
    }

    #[test]
    fn schedule_files_roundtrip(rho in 1u32..4, seed: u64) {
        let (g, p) = instance(true, rho, 3, seed);
        let r_req = 0.95 * ReliabilityMaxima::compute(&g, &p).non_ft();
        let s = mert(&g, &p, r_req, &MertConfig::default()).unwrap().schedule;
        let (s, _) = fa(&s, &g, &p, r_req, &FaConfig::default()).unwrap();
        let back: Schedule64 = schedule_from_json(&schedule_to_json(&s, &g, &p).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn oracle_energy_rises_with_the_constraint(seed: u64) {
        let ranges = ParameterRanges { frequency_step: 0.1, ..Default::default() };
        let g: TaskGraph64 = generate_ge(3, &GeneratorConfig::default().with_processors(2).with_seed(seed)).unwrap();
        let p: Platform64 = random_platform(2, &ranges, seed ^ 1).unwrap();
        let max = ReliabilityMaxima::compute(&g, &p);
        let mut last = 0.0;
        for k in 0..8 {
            let r_req = max.non_ft() * (0.96 + 0.01 * f64::from(k));
            let res = brute_force_oracle(&g, &p, r_req.min(max.ft() * (1.0 - 1e-12)), &OracleLimits::default()).unwrap();
            let e = res.energy.unwrap();
            prop_assert!(e >= last);
            last = e;
        }
    }
}

#[test]
fn single_precision_pipeline() {
    let g: TaskGraph32 = generate_fft(3, &GeneratorConfig::default().with_processors(6).with_seed(3)).unwrap();
    let p: Platform32 = random_platform(6, &Default::default(), 9).unwrap();
    let max = ReliabilityMaxima::compute(&g, &p);
    let r_req = 0.95 * max.non_ft();
    let alloc = mert(&g, &p, r_req, &MertConfig::new(0.5, 10)).unwrap();
    validate(&alloc.schedule, &g, &p).unwrap();
    let (s, rep) = fa(&alloc.schedule, &g, &p, r_req, &FaConfig::default()).unwrap();
    validate(&s, &g, &p).unwrap();
    assert!(rep.energy_after <= rep.energy_before);
    assert!(schedule_reliability(&s, &g, &p).unwrap() >= r_req * (1.0 - 1e-6));
    let ft = 0.5 * (max.non_ft() + max.ft());
    if max.classify(ft) == ConstraintScenario::FaultTolerant {
        let res = eafts(&g, &p, ft).unwrap();
        validate(&res.schedule, &g, &p).unwrap();
    }
}

#[test]
fn simulation_agrees_with_retiming_after_scaling() {
    let (g, p) = instance(false, 5, 5, 12);
    let r_req = 0.9 * ReliabilityMaxima::compute(&g, &p).non_ft();
    let alloc = mert(&g, &p, r_req, &MertConfig::new(0.7, g.len() / 2)).unwrap();
    let (s, _) = fa(&alloc.schedule, &g, &p, r_req, &FaConfig::default()).unwrap();
    let sim = simulate(&s, &g, &p).unwrap();
    for t in g.tasks() {
        for (r, &(a, b)) in s.replicas(t).iter().zip(&sim[t.0]) {
            assert_eq!((r.start, r.finish), (a, b));
        }
    }
    assert_eq!(makespan(&s), sim[g.exit().0][0].1);
}
