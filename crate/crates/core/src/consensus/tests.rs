use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::harness::{AdversaryScript, CrashAt, CrashEvent, DelayPolicy, GstModel, HarnessError, NetConfig};

fn instance(n: usize, f: usize, k: usize, inputs: &[i64]) -> ConsensusInstance {
    ConsensusInstance::new(n, f, k, inputs.to_vec()).unwrap()
}

/// Knowledge-set oracle: each process's set of known inputs after each
/// round, propagated directly from the crash script.
fn known_sets(inputs: &[i64], script: &AdversaryScript, rounds: usize) -> Vec<Option<BTreeSet<i64>>> {
    let n = inputs.len();
    let mut known: Vec<BTreeSet<i64>> = inputs.iter().map(|&v| BTreeSet::from([v])).collect();
    let mut dead = vec![false; n];
    for r in 1..=rounds {
        let before = known.clone();
        let crashing: Vec<bool> = (0..n)
            .map(|p| script.crash_of(p).is_some_and(|c| c.round == r))
            .collect();
        for q in 0..n {
            if dead[q] || crashing[q] {
                continue;
            }
            for p in 0..n {
                if dead[p] {
                    continue;
                }
                let reaches = !crashing[p] || script.crash_of(p).unwrap().deliver_to.contains(&q);
                if reaches {
                    known[q].extend(before[p].iter().copied());
                }
            }
        }
        for p in 0..n {
            dead[p] |= crashing[p];
        }
    }
    (0..n).map(|p| (!dead[p]).then(|| known[p].clone())).collect()
}

#[test]
fn instance_validation() {
    assert!(ConsensusInstance::new(3, 3, 1, vec![0, 0, 0]).is_err());
    assert!(ConsensusInstance::new(3, 1, 0, vec![0, 0, 0]).is_err());
    assert!(ConsensusInstance::new(3, 1, 1, vec![0, 0]).is_err());
}

#[test]
fn flood_min_round_count() {
    assert_eq!(flood_min_rounds(3, 2), 2);
    let run = flood_min(&instance(4, 3, 2, &[1, 0, 1, 0]), &AdversaryScript::none()).unwrap();
    assert_eq!(run.rounds, 2);
}

#[test]
fn flood_min_failure_free() {
    let run = flood_min(&instance(4, 0, 1, &[3, 1, 2, 2]), &AdversaryScript::none()).unwrap();
    assert_eq!(run.rounds, 1);
    assert_eq!(run.decisions, vec![Some(1); 4]);
}

#[test]
fn two_crashes_exceed_single_fault_budget() {
    let script = AdversaryScript::crashes([CrashEvent::new(0, 1, [2]), CrashEvent::new(2, 2, [])]);
    let err = flood_min(&instance(3, 1, 1, &[0, 1, 1]), &script).unwrap_err();
    assert!(matches!(err, ConsensusError::Harness(HarnessError::BudgetExceeded { named: 2, f: 1 })));

    let run = flood_min(&instance(3, 2, 1, &[0, 1, 1]), &script).unwrap();
    let free = flood_min(&instance(3, 2, 1, &[0, 1, 1]), &AdversaryScript::none()).unwrap();
    assert_eq!(run.decisions, vec![None, Some(1), None]);
    assert_eq!(free.distinct_decisions(), BTreeSet::from([0]));
    assert_ne!(run.distinct_decisions(), free.distinct_decisions());
}

#[test]
fn flood_min_matches_knowledge_oracle() {
    for inputs in [[0, 1, 1], [1, 0, 2], [2, 2, 0]] {
        let inst = instance(3, 1, 1, &inputs);
        let rounds = flood_min_rounds(1, 1);
        let mut count = 0;
        for_each_crash_script(3, 1, rounds, |events| {
            count += 1;
            let script = AdversaryScript::crashes(events.to_vec());
            let run = flood_min(&inst, &script).unwrap();
            let oracle = known_sets(&inputs, &script, rounds);
            for p in 0..3 {
                assert_eq!(run.decisions[p], oracle[p].as_ref().map(|s| *s.first().unwrap()));
            }
            assert!(run.distinct_decisions().len() <= 1, "{script:?}");
            assert!(run.valid(&inputs));
        });
        // none, plus 3 processes x 2 rounds x 4 subsets
        assert_eq!(count, 1 + 3 * 2 * 4);
    }
}

#[test]
fn chain_script_delays_convergence_to_round_f_plus_one() {
    let inst = instance(4, 2, 1, &[0, 1, 1, 1]);
    let run = flood_min(&inst, &chain_script(2)).unwrap();
    assert_eq!(run.rounds, 3);
    for r in 1..=2 {
        let m: BTreeSet<i64> = run.minima_after(r).into_iter().collect();
        assert_eq!(m, BTreeSet::from([0, 1]), "round {r}");
    }
    assert_eq!(run.decisions, vec![None, None, Some(0), Some(0)]);
}

#[test]
fn trimmed_mean_examples() {
    assert_eq!(ft_average(&[5.0], 0).unwrap(), 5.0);
    assert_eq!(ft_average(&[0.0, 1.0, 2.0, 3.0, 4.0], 1).unwrap(), 2.0);
    assert_eq!(ft_average(&[0.0, 0.0, 0.0, 0.0, 100.0], 1).unwrap(), 0.0);
    assert_eq!(
        ft_average(&[1.0, 2.0], 1),
        Err(ConsensusError::TooFewValues { got: 2, f: 1 })
    );
}

proptest! {
    #[test]
    fn trimmed_mean_permutation_and_monotone(
        mut values in prop::collection::vec(-100.0f64..100.0, 3..9),
        f in 0usize..2,
        i in 0usize..9,
        bump in 0.0f64..50.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(values.len() > 2 * f);
        let base = ft_average(&values, f).unwrap();
        let mut shuffled = values.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        prop_assert!((ft_average(&shuffled, f).unwrap() - base).abs() < 1e-9);
        let i = i % len;
        values[i] += bump;
        prop_assert!(ft_average(&values, f).unwrap() >= base - 1e-9);
    }

    #[test]
    fn trimmed_mean_ignores_f_outliers(
        honest in prop::collection::vec(-10.0f64..10.0, 3..7),
        junk in prop::collection::vec(-1e6f64..1e6, 1..2),
    ) {
        let f = junk.len();
        let mut all = honest.clone();
        all.extend(junk);
        let lo = honest.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = honest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let v = ft_average(&all, f).unwrap();
        prop_assert!(lo - 1e-9 <= v && v <= hi + 1e-9);
    }
}

fn dls(n: usize, f: usize, inputs: &[i64], config: &NetConfig) -> DlsRun {
    dls_consensus(&ConsensusInstance::consensus(n, f, inputs.to_vec()).unwrap(), config).unwrap()
}

#[test]
fn dls_rejects_missing_majority() {
    let inst = ConsensusInstance::consensus(4, 2, vec![0, 1, 0, 1]).unwrap();
    let config = NetConfig::new(GstModel { gst: 0, delta: 1, f: 2 }, DelayPolicy::HoldUntilGst, 10);
    assert_eq!(
        dls_consensus(&inst, &config).unwrap_err(),
        ConsensusError::QuorumUnreachable { n: 4, f: 2 }
    );
}

#[test]
fn dls_uniform_inputs_decide_that_value() {
    for seed in 0..20 {
        let run = dls(3, 1, &[4, 4, 4], &chaos_config(3, 1, seed, 12, 1));
        assert!(run.decisions.iter().flatten().all(|&d| d == 4));
        assert!(run.all_live_decided());
    }
}

#[test]
fn dls_synchronous_from_start() {
    let config = NetConfig::new(
        GstModel { gst: 0, delta: 1, f: 1 },
        DelayPolicy::HoldUntilGst,
        dls_horizon(3, 1, 0, 1),
    );
    let run = dls(3, 1, &[0, 1, 1], &config);
    assert!(run.all_live_decided());
    assert!(run.agreement());
    assert_eq!(run.decisions, vec![Some(0); 3]);
    assert_eq!(run.last_decided_attempt(), Some(0));
}

#[test]
fn dls_holds_until_gst() {
    let gst = 20;
    let config = NetConfig::new(
        GstModel { gst, delta: 1, f: 1 },
        DelayPolicy::HoldUntilGst,
        dls_horizon(3, 1, gst, 1),
    );
    let run = dls(3, 1, &[0, 1, 1], &config);
    assert!(run.decided_at.iter().flatten().all(|&t| t >= gst));
    assert!(run.all_live_decided());
    assert!(run.agreement());
}

#[test]
fn dls_survives_coordinator_crash() {
    let config = NetConfig::new(
        GstModel { gst: 0, delta: 2, f: 1 },
        DelayPolicy::HoldUntilGst,
        dls_horizon(3, 1, 0, 2),
    )
    .with_crashes(vec![CrashAt { process: 0, step: 0 }]);
    let run = dls(3, 1, &[0, 1, 1], &config);
    assert_eq!(run.decisions, vec![None, Some(1), Some(1)]);
    assert_eq!(run.last_decided_attempt(), Some(1));
}

#[test]
fn dls_safety_under_chaos_and_conflicts() {
    for n in [3, 5] {
        let f = (n - 1) / 2;
        let inputs: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
        for seed in 0..40 {
            for config in [chaos_config(n, f, seed, 24, 1), conflict_config(n, f, seed, 24, 2)] {
                let run = dls(n, f, &inputs, &config);
                assert!(run.agreement(), "n={n} seed={seed}: {:?}", run.decisions);
                assert!(run.valid(&inputs));
                assert!(run.locks_coherent());
                assert!(run.all_live_decided(), "n={n} seed={seed}");
            }
        }
    }
}

#[test]
fn approx_equal_inputs_finish_in_one_round() {
    let run = approx_agree(&[2.5; 4], 1, &ApproxConfig::sync(0.1, 10)).unwrap();
    assert_eq!(run.rounds, 1);
    assert_eq!(run.outputs, vec![Some(2.5); 4]);
}

#[test]
fn approx_sync_contracts() {
    let inputs = [0.0, 0.0, 0.0, 12.0];
    let run = approx_agree(&inputs, 1, &ApproxConfig::sync(1.0, 20)).unwrap();
    assert_eq!(run.diameters[0], 12.0);
    assert!(run.diameters.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0));
    assert!(run.contraction.iter().all(|&c| c < 1.0));
    assert!(run.output_spread() <= 1.0);
    assert!(run.valid(&inputs));
}

#[test]
fn approx_sync_with_crash_reaches_tight_epsilon() {
    let inputs = [0.0, 3.0, 7.0, 10.0];
    let script = AdversaryScript::crashes([CrashEvent::new(3, 1, [0])]);
    let config = ApproxConfig {
        mode: ApproxMode::Sync { script },
        ..ApproxConfig::sync(1e-3, 60)
    };
    let run = approx_agree(&inputs, 1, &config).unwrap();
    assert!(run.output_spread() <= 1e-3);
    assert!(run.diameters_nonincreasing());
    assert!(run.valid(&inputs));
    assert_eq!(run.outputs[3], None);
}

#[test]
fn approx_async_with_one_crash_terminates() {
    let inputs = [0.0, 4.0, 8.0, 12.0];
    for seed in 0..20 {
        let config = ApproxConfig {
            mode: ApproxMode::Async {
                seed,
                max_delay: 5,
                crashes: vec![CrashAt { process: (seed % 4) as usize, step: seed % 7 }],
            },
            ..ApproxConfig::sync(0.01, 200)
        };
        let run = approx_agree(&inputs, 1, &config).unwrap();
        assert!(run.output_spread() <= 0.01, "seed {seed}: {:?}", run.outputs);
        assert!(run.diameters_nonincreasing());
        assert!(run.valid(&inputs));
    }
}

#[test]
fn approx_async_requires_third() {
    let config = ApproxConfig::asynchronous(0.1, 10, 0, 3);
    assert!(matches!(
        approx_agree(&[0.0, 1.0, 2.0], 1, &config),
        Err(ConsensusError::TooManyFaults(_))
    ));
}

#[test]
fn approx_cap_reports_non_termination() {
    let err = approx_agree(&[0.0, 100.0, 50.0, 25.0], 1, &ApproxConfig::sync(1e-9, 1)).unwrap_err();
    assert_eq!(err, ConsensusError::NonTermination { rounds: 1 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approx_runs_stay_valid(
        inputs in prop::collection::vec(-50.0f64..50.0, 4..6),
        seed in any::<u64>(),
        crash in any::<bool>(),
        sync in any::<bool>(),
    ) {
        let n = inputs.len();
        let victim = (seed % n as u64) as usize;
        let mode = if sync {
            let script = if crash {
                AdversaryScript::crashes([CrashEvent::new(victim, 1 + (seed % 3) as usize, [0])])
            } else {
                AdversaryScript::none()
            };
            ApproxMode::Sync { script }
        } else {
            let crashes = if crash { vec![CrashAt { process: victim, step: seed % 9 }] } else { Vec::new() };
            ApproxMode::Async { seed, max_delay: 4, crashes }
        };
        let config = ApproxConfig { mode, ..ApproxConfig::sync(0.05, 400) };
        let run = approx_agree(&inputs, 1, &config).unwrap();
        prop_assert!(run.diameters_nonincreasing());
        prop_assert!(run.valid(&inputs));
        prop_assert!(run.output_spread() <= 0.05);
    }
}

#[test]
fn conflict_scenarios_produce_competing_locks() {
    let competing = (0..50)
        .filter(|&s| {
            let run = dls(3, 1, &[0, 1, 1], &conflict_config(3, 1, s, 24, 2));
            run.locks.iter().map(|(_, l)| l.value).collect::<BTreeSet<_>>().len() > 1
        })
        .count();
    assert!(competing > 0);
}
