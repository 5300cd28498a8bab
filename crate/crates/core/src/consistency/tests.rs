use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::harness::{CrashAt, DelayPolicy, GstModel, NetConfig};

fn hist() -> HistoryBuilder {
    HistoryBuilder::new()
}

fn both(h: &History) -> (LinResult, LinResult) {
    (lin_check(h).unwrap(), lin_check_enumerate(h).unwrap())
}

#[test]
fn write_then_read_is_linearizable() {
    let h = hist().write(0, 1).read(1, 1).build().unwrap();
    let (a, b) = both(&h);
    assert_eq!(a, LinResult::Linearizable(vec![0, 1]));
    assert_eq!(b, a);
}

#[test]
fn stale_read_after_write_is_a_violation() {
    let h = hist().write(0, 1).read(1, 0).build().unwrap();
    let (a, b) = both(&h);
    let LinResult::Violation(prefix) = a.clone() else { panic!("{a:?}") };
    assert_eq!(prefix.events.len(), 4);
    assert_eq!(a, b);
}

#[test]
fn concurrent_read_may_see_old_value() {
    let h = hist()
        .invoke_write(0, 1)
        .invoke_read(1)
        .return_read(1, 0)
        .ack_write(0, 1)
        .read(1, 1)
        .build()
        .unwrap();
    let (a, b) = both(&h);
    assert_eq!(a, LinResult::Linearizable(vec![1, 0, 2]));
    assert!(b.is_linearizable());
}

#[test]
fn pending_write_may_take_effect() {
    let h = hist().invoke_write(0, 5).read(1, 5).build().unwrap();
    assert!(lin_check(&h).unwrap().is_linearizable());
    let h = hist().invoke_write(0, 5).read(1, 0).invoke_read(2).build().unwrap();
    assert!(lin_check(&h).unwrap().is_linearizable());
}

#[test]
fn minimal_prefix_stops_at_first_bad_response() {
    let h = hist().write(0, 1).read(1, 2).write(0, 3).read(1, 3).build().unwrap();
    let LinResult::Violation(prefix) = lin_check(&h).unwrap() else { panic!() };
    assert_eq!(prefix.events.len(), 4);
}

#[test]
fn rejects_malformed_and_large_histories() {
    let e = |ts, phase| Event { ts, client: 0, kind: OpKind::Read, phase, value: Some(0) };
    assert!(History::new(vec![e(2, Phase::Invoke), e(1, Phase::Respond)]).is_err());
    assert!(History::new(vec![e(1, Phase::Respond)]).is_err());
    assert!(History::new(vec![e(1, Phase::Invoke), e(2, Phase::Invoke)]).is_err());
    let mut b = hist();
    for i in 0..13 {
        b = b.write(0, i);
    }
    assert_eq!(
        lin_check(&b.build().unwrap()).unwrap_err(),
        LinError::TooLarge { ops: 13, max: MAX_OPS }
    );
}

#[test]
fn csv_round_trip() {
    let h = hist().invoke_write(0, 1).read(1, 0).ack_write(0, 1).build().unwrap();
    let mut buf = Vec::new();
    h.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("ts,client,kind,phase,value"));
    assert_eq!(text.lines().nth(2), Some("2,1,read,invoke,"));
    assert_eq!(History::read_csv(buf.as_slice()).unwrap(), h);
}

/// Every interleaving of two clients' event sequences, deduplicated by
/// the real-time precedence pattern it induces, then labelled with every
/// assignment of operations.
#[test]
fn checkers_agree_on_two_client_histories() {
    #[derive(Clone, Copy)]
    enum Label {
        W,
        R(i64),
    }
    let labels = [Label::W, Label::R(0), Label::R(1), Label::R(2)];
    let mut patterns: HashSet<([usize; 2], Vec<bool>)> = HashSet::new();
    let mut checked = 0;
    for per_client in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        for pending in 0..4u8 {
            let counts = [per_client.0, per_client.1];
            let events_of = |c: usize| 2 * counts[c] - usize::from(pending >> c & 1 == 1);
            let total = events_of(0) + events_of(1);
            for mask in 0..1u32 << total {
                if mask.count_ones() as usize != events_of(1) {
                    continue;
                }
                let order: Vec<(usize, usize, bool)> = {
                    let mut next = [0usize; 2];
                    (0..total)
                        .map(|i| {
                            let c = (mask >> i & 1) as usize;
                            let k = next[c];
                            next[c] += 1;
                            (c, k / 2, k % 2 == 0)
                        })
                        .collect()
                };
                let at = |c: usize, k: usize, invoke: bool| order.iter().position(|&e| e == (c, k, invoke));
                let slots: Vec<(usize, usize)> =
                    (0..counts[0]).map(|k| (0, k)).chain((0..counts[1]).map(|k| (1, k))).collect();
                let mut pattern = Vec::new();
                for &(c, k) in &slots {
                    pattern.push(at(c, k, false).is_none());
                    for &(d, l) in &slots {
                        let before = match (at(c, k, false), at(d, l, true)) {
                            (Some(r), Some(i)) => r < i,
                            _ => false,
                        };
                        pattern.push(before);
                    }
                }
                if !patterns.insert((counts, pattern)) {
                    continue;
                }
                let ops = counts[0] + counts[1];
                for assign in 0..labels.len().pow(ops as u32) {
                    let label_of = |c: usize, k: usize| {
                        let slot = if c == 0 { k } else { counts[0] + k };
                        labels[assign / labels.len().pow(slot as u32) % labels.len()]
                    };
                    let mut b = hist();
                    for &(c, k, invoke) in &order {
                        let write_value = (c * 3 + k + 1) as i64;
                        b = match (label_of(c, k), invoke) {
                            (Label::W, true) => b.invoke_write(c, write_value),
                            (Label::W, false) => b.ack_write(c, write_value),
                            (Label::R(_), true) => b.invoke_read(c),
                            (Label::R(v), false) => b.return_read(c, v),
                        };
                    }
                    let h = b.build().unwrap();
                    let (a, e) = both(&h);
                    assert_eq!(a.is_linearizable(), e.is_linearizable(), "{h:?}");
                    if let (LinResult::Violation(x), LinResult::Violation(y)) = (&a, &e) {
                        assert_eq!(x, y);
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 500, "{checked}");
}

fn arb_history() -> impl Strategy<Value = History> {
    prop::collection::vec((0usize..3, any::<bool>(), 0i64..3, any::<bool>()), 1..16).prop_map(|steps| {
        let mut open: [Option<(bool, i64)>; 3] = [None; 3];
        let mut b = hist();
        let mut ops = 0;
        for (c, is_write, v, _) in steps {
            match open[c] {
                None if ops < 8 => {
                    b = if is_write { b.invoke_write(c, v + 1) } else { b.invoke_read(c) };
                    open[c] = Some((is_write, v + 1));
                    ops += 1;
                }
                None => {}
                Some((true, w)) => {
                    b = b.ack_write(c, w);
                    open[c] = None;
                }
                Some((false, _)) => {
                    b = b.return_read(c, v);
                    open[c] = None;
                }
            }
        }
        b.build().unwrap()
    })
}

proptest! {
    #[test]
    fn checkers_agree_on_random_histories(h in arb_history()) {
        let (a, e) = both(&h);
        prop_assert_eq!(a.is_linearizable(), e.is_linearizable());
        if let LinResult::Linearizable(order) = &a {
            let ops = h.operations();
            for (x, &i) in order.iter().enumerate() {
                for &j in &order[x + 1..] {
                    prop_assert!(!ops[j].precedes(&ops[i]));
                }
            }
        }
    }
}

fn quorum_config(seed: u64, script: Vec<ClientOp>) -> RegisterConfig {
    RegisterConfig {
        servers: 3,
        clients: 2,
        protocol: Protocol::Quorum,
        script,
        net: NetConfig::new(GstModel { gst: 0, delta: 3, f: 1 }, DelayPolicy::Seeded { seed, max_delay: 3 }, 200),
        retry: 4,
        homes: Vec::new(),
    }
}

#[test]
fn solo_client_reads_its_write() {
    let run = run_register(&quorum_config(
        0,
        vec![ClientOp { client: 0, at: 0, op: Op::Write(1) }, ClientOp { client: 0, at: 0, op: Op::Read }],
    ))
    .unwrap();
    let ops = run.history.operations();
    assert_eq!(ops[1].value, Some(1));
}

#[test]
fn quorum_read_after_write_sees_it() {
    for seed in 0..1000 {
        let script = vec![ClientOp { client: 0, at: 0, op: Op::Write(1) }, ClientOp { client: 1, at: 40, op: Op::Read }];
        let run = run_register(&quorum_config(seed, script)).unwrap();
        let ops = run.history.operations();
        assert!(ops[0].precedes(&ops[1]), "seed {seed}");
        assert_eq!(ops[1].value, Some(1));
        assert!(lin_check(&run.history).unwrap().is_linearizable());
        assert!(run.tags_monotone());
    }
}

#[test]
fn quorum_survives_one_crashed_server() {
    let script = vec![
        ClientOp { client: 0, at: 0, op: Op::Write(7) },
        ClientOp { client: 1, at: 0, op: Op::Read },
        ClientOp { client: 1, at: 5, op: Op::Write(8) },
        ClientOp { client: 0, at: 5, op: Op::Read },
    ];
    let mut config = quorum_config(3, script);
    config.net = config.net.with_crashes(vec![CrashAt { process: 2, step: 0 }]);
    let run = run_register(&config).unwrap();
    assert_eq!(run.unavailable, 0);
    assert_eq!(run.history.pending(), 0);
    assert!(lin_check(&run.history).unwrap().is_linearizable());
}

#[test]
fn concurrent_quorum_histories_linearize() {
    for seed in 0..200 {
        let script = vec![
            ClientOp { client: 0, at: 0, op: Op::Write(1) },
            ClientOp { client: 1, at: 1, op: Op::Read },
            ClientOp { client: 0, at: 2, op: Op::Write(2) },
            ClientOp { client: 1, at: 3, op: Op::Read },
            ClientOp { client: 0, at: 4, op: Op::Read },
            ClientOp { client: 1, at: 4, op: Op::Write(3) },
        ];
        let run = run_register(&quorum_config(seed, script)).unwrap();
        assert!(lin_check(&run.history).unwrap().is_linearizable(), "seed {seed}");
        assert!(run.tags_monotone());
    }
}

#[test]
fn cap_cp_gives_up_availability() {
    for seed in 0..20 {
        let config = cap_config(CapVariant::Cp, Some(&PartitionScenario::canonical()), seed);
        let report = cap_scenario(&config, CapVariant::Cp).unwrap();
        assert!(report.run.unavailable >= 1);
        assert!(report.consistent());
        assert_eq!(report.violated(), Some("availability"));
    }
}

#[test]
fn cap_ap_gives_up_consistency() {
    for seed in 0..20 {
        let config = cap_config(CapVariant::Ap, Some(&PartitionScenario::canonical()), seed);
        let report = cap_scenario(&config, CapVariant::Ap).unwrap();
        assert_eq!(report.run.unavailable, 0);
        assert!(!report.consistent());
        assert_eq!(report.violated(), Some("consistency"));
    }
}

#[test]
fn cap_without_partition_keeps_both() {
    for variant in [CapVariant::Cp, CapVariant::Ap] {
        let report = cap_scenario(&cap_config(variant, None, 1), variant).unwrap();
        assert_eq!(report.violated(), None, "{variant:?}");
    }
}
