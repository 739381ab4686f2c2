//! Whole-run behaviour: determinism, budget accounting, corrected archives.

use std::sync::Mutex;

use uqd_core::archive::GridArchive;
use uqd_core::metrics::{build_corrected, snapshot};
use uqd_core::solver::{run, run_with};
use uqd_core::{
    Algo, BatchExecutor, MetricsConfig, Sequential, SolverConfig, StreamSeed, TaskId, TaskSpec,
};

fn small(algo: Algo, budget: u64) -> SolverConfig {
    SolverConfig {
        algo,
        batch_size: 16,
        init_batch: 32,
        eval_budget: budget,
        metric_period: 20,
        resolution: (25, 25),
        metrics: MetricsConfig {
            n_reeval: 10,
            ..MetricsConfig::default()
        },
        ..SolverConfig::default()
    }
}

/// Computes jobs back to front on scoped threads, then restores order.
struct Scrambled;

impl BatchExecutor for Scrambled {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for part in 0..3 {
                let (f, slots) = (&f, &slots);
                s.spawn(move || {
                    for i in (0..n).rev().filter(|i| i % 3 == part) {
                        *slots[i].lock().unwrap() = Some(f(i));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().unwrap())
            .collect()
    }
}

#[test]
fn runs_are_reproducible_and_executor_independent() {
    for id in [TaskId::GaussFit, TaskId::TwoSigmaDesc, TaskId::PhenoJ] {
        let task = TaskSpec::with_defaults(id);
        for algo in Algo::ALL {
            let budget = if algo == Algo::Me { 3_000 } else { 20_000 };
            let cfg = small(algo, budget);
            let a = run(&task, &cfg, 42).unwrap();
            let b = run(&task, &cfg, 42).unwrap();
            let c = run_with(&task, &cfg, 42, &Scrambled).unwrap();
            assert_eq!(a, b, "{id}/{algo}");
            assert_eq!(a, c, "{id}/{algo} under a threaded executor");
            let d = run(&task, &cfg, 43).unwrap();
            assert_ne!(a.archive, d.archive, "{id}/{algo}: seeds must matter");
        }
    }
}

#[test]
fn budget_is_respected() {
    let task = TaskSpec::with_defaults(TaskId::SmallGaussDesc);
    for algo in Algo::ALL {
        let cfg = small(algo, 25_000);
        let n = cfg.effective_samples() as u64;
        let out = run(&task, &cfg, 1).unwrap();
        assert!(out.evaluations_used <= cfg.eval_budget);
        assert!(out.evaluations_used > cfg.eval_budget - cfg.batch_size as u64 * n);
        assert_eq!(out.evaluations_used, out.candidates_evaluated * n);
        let evals: Vec<u64> = out.trace.records.iter().map(|r| r.evaluations_used).collect();
        assert!(evals.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(evals.last(), Some(&out.evaluations_used));
    }
}

#[test]
fn noise_free_sampling_replays_plain_map_elites() {
    let task = TaskSpec::with_defaults(TaskId::NoiseFree);
    let me = run(&task, &small(Algo::Me, 4_000), 8).unwrap();
    let me_s = run(&task, &small(Algo::MeSampling, 4_000 * 30), 8).unwrap();
    assert_eq!(me.candidates_evaluated, me_s.candidates_evaluated);
    let strip = |a: &GridArchive| -> Vec<_> {
        a.iter()
            .map(|(cell, e)| (cell, e.genotype.clone(), e.fitness, e.descriptor))
            .collect()
    };
    assert_eq!(strip(&me.archive), strip(&me_s.archive));
}

#[test]
fn noise_free_corrected_archive_is_the_illusory_one() {
    let task = TaskSpec::with_defaults(TaskId::NoiseFree);
    let out = run(&task, &small(Algo::Me, 5_000), 3).unwrap();
    let (record, corrected) = snapshot(
        &out.archive,
        &task,
        &MetricsConfig::default(),
        out.evaluations_used,
        StreamSeed::root(1),
        &Sequential,
    )
    .unwrap();
    assert_eq!(corrected.len(), out.archive.len());
    for ((ci, a), (cc, b)) in out.archive.iter().zip(corrected.archive.iter()) {
        assert_eq!(ci, cc);
        assert_eq!(corrected.source_of(cc), Some(ci));
        assert_eq!((&a.genotype, a.fitness, a.descriptor), (&b.genotype, b.fitness, b.descriptor));
    }
    assert_eq!(record.loss_qd_score, 0.0);
    assert_eq!(record.loss_coverage, 0.0);
    assert_eq!(record.reproducibility_score, out.archive.len() as f64);
}

#[test]
fn corrected_fitness_is_the_reevaluated_mean() {
    // Gaussian fitness noise: the corrected value of an elite is the mean of
    // 50 draws around its clean fitness, so it lies within a few σ/√50.
    let task = TaskSpec::with_defaults(TaskId::GaussFit);
    let out = run(&task, &small(Algo::Me, 5_000), 4).unwrap();
    let corrected =
        build_corrected(&out.archive, &task, 50, StreamSeed::root(2), &Sequential).unwrap();
    let tol = 5.0 * 0.5 / 50f64.sqrt();
    let mut lucky = 0usize;
    for (cell, e) in corrected.archive.iter() {
        let clean = task.arm.fitness(&e.genotype).unwrap();
        assert!((e.fitness - clean).abs() < tol, "{cell:?}");
        let src = out.archive.get(corrected.source_of(cell).unwrap()).unwrap();
        if src.fitness > e.fitness {
            lucky += 1;
        }
    }
    // Elites selected on a single noisy draw are mostly over-estimated.
    assert!(lucky * 2 > corrected.len(), "{lucky} of {}", corrected.len());
}
