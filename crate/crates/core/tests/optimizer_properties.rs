use iscc_core::comm_model::{generate_scenario, Scenario, ScenarioParams};
use iscc_core::optimizer::{
    evaluate_fixed_fs, plan_at, run_benchmark, solve_exhaustive, solve_low_complexity, Instance, Scheme, SolveOptions,
    ThresholdPolicy,
};
use iscc_core::resource_alloc::fs_upper_bound;
use iscc_core::sensing_model::{AlphaModel, ClassSet, SensingParams};

fn setup() -> (SensingParams, ClassSet, AlphaModel) {
    let sp = SensingParams::default();
    let cs = ClassSet::synthetic_default(&sp);
    (sp, cs, AlphaModel::default())
}

fn scenario(n: usize, f_e: f64, seed: u64) -> Scenario {
    generate_scenario(n, 0.3, &ScenarioParams { f_edge_hz: f_e, ..ScenarioParams::default() }, seed).unwrap()
}

fn opts(step: u64) -> SolveOptions {
    SolveOptions { step, ..SolveOptions::default() }
}

#[test]
fn proposed_dominates_benchmarks() {
    let (sp, cs, am) = setup();
    for seed in 0..8 {
        let s = scenario(8, 30e9, seed);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let p = solve_exhaustive(&inst, opts(10)).unwrap();
        let c = run_benchmark(Scheme::Conventional, &inst, opts(10)).unwrap();
        assert!(p.accuracy >= c.accuracy, "seed {seed}");
        for r in [0.25, 0.5, 0.75, 1.0] {
            let f = run_benchmark(Scheme::FixedThreshold(r), &inst, opts(10)).unwrap();
            assert!(p.accuracy >= f.accuracy - 1e-6, "seed {seed} ratio {r}");
        }
    }
}

#[test]
fn accuracy_monotone_in_edge_compute_and_devices() {
    let (sp, cs, am) = setup();
    for seed in 0..4 {
        let mut last = 0.0;
        for f_e in [10e9, 20e9, 40e9, 80e9] {
            let s = scenario(10, f_e, seed);
            let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
            let a = solve_exhaustive(&inst, opts(10)).unwrap().accuracy;
            assert!(a >= last, "seed {seed} f_e {f_e}");
            last = a;
        }
        let mut last = 1.0;
        for n in [2, 6, 10, 14] {
            let s = scenario(n, 40e9, seed);
            let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
            let a = solve_exhaustive(&inst, opts(10)).unwrap().accuracy;
            assert!(a <= last, "seed {seed} n {n}");
            last = a;
        }
    }
}

#[test]
fn coarse_step_costs_little_accuracy() {
    let (sp, cs, am) = setup();
    for seed in 0..4 {
        let s = scenario(10, 40e9, seed);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let fine = solve_exhaustive(&inst, opts(1)).unwrap();
        let coarse = solve_exhaustive(&inst, opts(10)).unwrap();
        assert!(fine.accuracy >= coarse.accuracy);
        assert!(fine.accuracy - coarse.accuracy <= 0.005, "seed {seed}");
    }
}

#[test]
fn low_complexity_finds_the_largest_feasible_rate() {
    let (sp, cs, am) = setup();
    for seed in 0..4 {
        let s = scenario(8, 40e9, seed);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let upper = fs_upper_bound(&s, sp.tau_s).unwrap();
        let policy = ThresholdPolicy::Optimal { m_segments: 1 };
        // linear scan oracle
        let scan = (1..=upper).rev().find(|&f| plan_at(&inst, "scan", f as f64, policy).feasible);
        let lc = solve_low_complexity(&inst);
        match scan {
            Some(f) => assert!(lc.feasible && (lc.f_s - f as f64).abs() <= 1.0, "seed {seed}: {} vs {f}", lc.f_s),
            None => assert!(!lc.feasible),
        }
    }
}

#[test]
fn infeasible_beyond_the_rate_bound() {
    let (sp, cs, am) = setup();
    for seed in 0..20 {
        let s = scenario(1 + (seed as usize % 12), 20e9 + 5e9 * seed as f64, seed);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let Ok(upper) = fs_upper_bound(&s, sp.tau_s) else { continue };
        for f in [upper + 1, upper + 7, 2 * upper + 1] {
            assert!(!evaluate_fixed_fs(&inst, f as f64, 8).feasible, "seed {seed} f {f}");
        }
    }
}

#[test]
fn equal_compute_split_catches_up_with_ample_compute() {
    let (sp, cs, am) = setup();
    let s = scenario(6, 40e9, 3);
    let gap = |f_e: f64| {
        let s = s.with_f_edge(f_e);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let p = solve_exhaustive(&inst, opts(10)).unwrap().accuracy;
        let a = run_benchmark(Scheme::AvgCompute, &inst, opts(10)).unwrap().accuracy;
        assert!(p >= a - 1e-12);
        p - a
    };
    let tight = gap(15e9);
    let ample = gap(2e12);
    assert!(ample <= tight, "{ample} > {tight}");
    assert!(ample < 0.01, "{ample}");
}
