//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use distlab::automata::{is_fair, Automaton, Execution};
use distlab::checker::protocols::shipped_protocols;
use distlab::checker::{flp_witness, Explorer, FlpOutcome, SafetyVerdict, ValenceMap};
use distlab::clocksync::{corner_skews, shift_witness, skew_bound, ClockModel};
use distlab::consensus::{
    approx_agree, chain_script, chaos_config, conflict_config, dls_consensus, dls_horizon, flood_min, flood_min_log,
    flood_min_rounds, for_each_crash_script, random_crash_script, ApproxConfig, ApproxMode, ConsensusInstance,
};
use distlab::consistency::{
    cap_config, cap_scenario, lin_check, lin_check_enumerate, run_register, CapVariant, ClientOp, HistoryBuilder,
    LinResult, Op, PartitionScenario, Protocol, RegisterConfig,
};
use distlab::harness::{
    records_digest, AdversaryScript, CrashAt, CrashEvent, DelayPolicy, GstModel, NetConfig, TraceFile,
};
use distlab::mutex::{
    burns_lynch, check_mutex, critical_count, one_register, poised_attack, semaphore, AttackBounds, MutexProperty,
    PropertyVerdict,
};

/// Reachable-state counts, pinned after the first computation.
const BURNS_STATES: [(usize, usize); 2] = [(2, 71), (3, 855)];
const SEMAPHORE_STATES: usize = 27;
const CHECK_CAP: usize = 1_000_000;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {spent:.1?}, limit {limit:?}"))
}

fn k_set_bound() -> Verdict {
    let start = Instant::now();
    let mut scripts = 0u64;
    let mut configs = 0;
    for n in 1..=4usize {
        for f in 0..n {
            for k in 1..=2usize {
                configs += 1;
                let rounds = flood_min_rounds(f, k);
                for mask in 0..1u32 << n {
                    let inputs: Vec<i64> = (0..n).map(|i| i64::from(mask >> i & 1)).collect();
                    let inst = ConsensusInstance::new(n, f, k, inputs.clone()).map_err(|e| e.to_string())?;
                    let mut failure = None;
                    for_each_crash_script(n, f, rounds, |events| {
                        scripts += 1;
                        if failure.is_some() {
                            return;
                        }
                        let script = AdversaryScript::crashes(events.iter().cloned());
                        match flood_min(&inst, &script) {
                            Ok(run) if run.rounds != rounds => failure = Some(format!("{} rounds", run.rounds)),
                            Ok(run) if run.distinct_decisions().len() > k => {
                                failure = Some(format!("decisions {:?}", run.decisions))
                            }
                            Ok(run) if !run.valid(&inputs) => failure = Some("validity".into()),
                            Ok(_) => {}
                            Err(e) => failure = Some(e.to_string()),
                        }
                    });
                    if let Some(why) = failure {
                        return Err(format!("n={n} f={f} k={k} inputs={inputs:?}: {why}"));
                    }
                }
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{configs} (n,f,k) configurations, {scripts} crash scripts, {:.1?}", start.elapsed()))
}

/// Who holds 0 after each round, read off the message log alone.
fn knows_zero_from_log(inst: &ConsensusInstance, script: &AdversaryScript, rounds: usize) -> Result<Vec<BTreeSet<usize>>, String> {
    let log = flood_min_log(inst, script).map_err(|e| e.to_string())?;
    let mut knows: BTreeSet<usize> = (0..inst.n).filter(|&p| inst.inputs[p] == 0).collect();
    let mut per_round = Vec::new();
    for r in 1..=rounds as u64 {
        for rec in log.iter().filter(|rec| rec.step == r && rec.action == "send") {
            let payload: serde_json::Value = serde_json::from_str(&rec.payload).map_err(|e| e.to_string())?;
            if payload["msg"] == 0 {
                knows.insert(payload["to"].as_u64().ok_or("bad payload")? as usize);
            }
        }
        per_round.push(knows.clone());
    }
    Ok(per_round)
}

fn chain_worst_case() -> Verdict {
    let inst = ConsensusInstance::consensus(4, 2, vec![0, 1, 1, 1]).map_err(|e| e.to_string())?;
    let script = chain_script(2);
    let run = flood_min(&inst, &script).map_err(|e| e.to_string())?;
    ensure(run.rounds == 3, || format!("ran {} rounds", run.rounds))?;
    for r in 1..=2 {
        let held: BTreeSet<i64> = run.minima_after(r).into_iter().collect();
        ensure(held.len() > 1, || format!("minima agree after round {r}: {held:?}"))?;
    }
    let last: BTreeSet<i64> = (0..4).filter(|&p| run.crashed[p].is_none()).map(|p| run.minima[p][2]).collect();
    ensure(last == BTreeSet::from([0]), || format!("live minima after round 3: {last:?}"))?;
    let knows = knows_zero_from_log(&inst, &script, 3)?;
    let live: BTreeSet<usize> = (0..4).filter(|&p| run.crashed[p].is_none()).collect();
    for (r, k) in knows.iter().enumerate().take(2) {
        ensure(!live.is_subset(k), || format!("log shows every live process holding 0 after round {}", r + 1))?;
    }
    ensure(live.is_subset(&knows[2]), || "log shows a live process missing 0 after round 3".into())?;
    ensure(run.decisions.iter().flatten().all(|&d| d == 0), || format!("decisions {:?}", run.decisions))?;
    Ok(format!("differing minima through round 2, agreement at round 3; log holders {knows:?}"))
}

fn dls_safety_and_liveness() -> Verdict {
    let start = Instant::now();
    let mut runs = 0;
    for n in [3usize, 5] {
        let f = (n - 1) / 2;
        let inputs: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
        let inst = ConsensusInstance::consensus(n, f, inputs.clone()).map_err(|e| e.to_string())?;
        let configs = (0..1000).map(|s| ("chaos", s, chaos_config(n, f, s, 20, 1)));
        let conflicts = (0..50).map(|s| ("conflict", s, conflict_config(n, f, s, 24, 2)));
        for (mode, seed, config) in configs.chain(conflicts) {
            let run = dls_consensus(&inst, &config).map_err(|e| e.to_string())?;
            runs += 1;
            ensure(run.agreement() && run.valid(&inputs), || {
                format!("n={n} {mode} seed {seed}: decisions {:?}", run.decisions)
            })?;
        }
    }
    let mut worst_attempt = 0;
    let mut bound = 0;
    for n in [3usize, 5] {
        let f = (n - 1) / 2;
        let inputs: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
        let inst = ConsensusInstance::consensus(n, f, inputs).map_err(|e| e.to_string())?;
        // The last attempt that completes inside the horizon.
        let attempt_bound = dls_horizon(n, f, 20, 1) / 4;
        bound = bound.max(attempt_bound);
        for seed in 0..100 {
            let run = dls_consensus(&inst, &chaos_config(n, f, seed, 20, 1)).map_err(|e| e.to_string())?;
            ensure(run.all_live_decided(), || format!("n={n} seed {seed}: live process undecided"))?;
            let a = run.last_decided_attempt().unwrap_or(0);
            ensure(a <= attempt_bound, || format!("n={n} seed {seed}: decided in attempt {a} > {attempt_bound}"))?;
            worst_attempt = worst_attempt.max(a);
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "{runs} safety runs clean; 200/200 liveness runs decided by attempt {worst_attempt} (bound {bound}), {:.1?}",
        start.elapsed()
    ))
}

fn approximate_agreement() -> Verdict {
    let inputs = [0.0, 3.0, 7.0, 10.0];
    let eps = 1e-3;
    let mut scripts = vec![AdversaryScript::none()];
    for round in 1..=2 {
        for to in [vec![], vec![0], vec![0, 1], vec![1, 2]] {
            scripts.push(AdversaryScript::crashes([CrashEvent::new(3, round, to)]));
        }
    }
    let mut worst_contraction: f64 = 0.0;
    for script in scripts {
        let config = ApproxConfig { mode: ApproxMode::Sync { script: script.clone() }, ..ApproxConfig::sync(eps, 60) };
        let run = approx_agree(&inputs, 1, &config).map_err(|e| format!("{script:?}: {e}"))?;
        ensure(run.contraction.iter().all(|&c| c < 1.0), || format!("contraction {:?}", run.contraction))?;
        ensure(run.diameters_nonincreasing(), || format!("diameters {:?}", run.diameters))?;
        ensure(run.output_spread() <= eps, || format!("spread {}", run.output_spread()))?;
        ensure(run.valid(&inputs), || format!("outputs {:?}", run.outputs))?;
        worst_contraction = run.contraction.iter().copied().fold(worst_contraction, f64::max);
    }
    let mut async_rounds = 0;
    for seed in 0..50u64 {
        let crash = CrashAt { process: (seed % 4) as usize, step: seed % 11 };
        let config = ApproxConfig {
            mode: ApproxMode::Async { seed, max_delay: 5, crashes: vec![crash] },
            ..ApproxConfig::sync(eps, 400)
        };
        let run = approx_agree(&inputs, 1, &config).map_err(|e| format!("async seed {seed}: {e}"))?;
        ensure(run.diameters_nonincreasing(), || format!("async seed {seed}: diameters {:?}", run.diameters))?;
        ensure(run.valid(&inputs), || format!("async seed {seed}: outputs {:?}", run.outputs))?;
        ensure(run.output_spread() <= eps, || format!("async seed {seed}: spread {}", run.output_spread()))?;
        async_rounds = async_rounds.max(run.rounds);
    }
    Ok(format!("sync contraction <= {worst_contraction:.3}; 50 async crash runs terminated within {async_rounds} rounds"))
}

fn clock_bound() -> Verdict {
    let start = Instant::now();
    let mut summary = Vec::new();
    for n in 2..=4usize {
        let bound = skew_bound(n, 1.0);
        for offsets in [vec![0.0; n], (0..n).map(|i| 0.375 * i as f64 - 0.25).collect()] {
            let rows = corner_skews(&offsets, 0.0, 1.0).map_err(|e| e.to_string())?;
            let max = rows.iter().map(|r| r.skew).fold(0.0, f64::max);
            ensure(max <= bound + 1e-9, || format!("n={n}: corner skew {max} > {bound}"))?;
            let w = shift_witness(&ClockModel::uniform(offsets, 0.0, 1.0)).map_err(|e| e.to_string())?;
            ensure(w.skew() >= bound - 1e-9, || format!("n={n}: witness skew {}", w.skew()))?;
            ensure(w.views_identical(), || format!("n={n}: shifted views differ"))?;
            ensure(w.outcome.views == w.twin_outcome.views, || "views not bit-identical".into())?;
            summary.push(format!("n={n} max {max:.6}"));
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(summary.join(", "))
}

fn states_of(v: &PropertyVerdict) -> Option<usize> {
    match v {
        PropertyVerdict::Holds { states } => Some(*states),
        PropertyVerdict::Violated(_) => None,
    }
}

fn mutual_exclusion() -> Verdict {
    let mut notes = Vec::new();
    for (n, pinned) in BURNS_STATES {
        let sys = burns_lynch(n);
        let me = check_mutex(&sys, MutexProperty::MutualExclusion, CHECK_CAP).map_err(|e| e.to_string())?;
        ensure(states_of(&me) == Some(pinned), || format!("burns({n}) mutual exclusion: {me:?}"))?;
        let df = check_mutex(&sys, MutexProperty::DeadlockFreedom, CHECK_CAP).map_err(|e| e.to_string())?;
        ensure(df.holds(), || format!("burns({n}) deadlock freedom fails"))?;
        notes.push(format!("burns({n}) {pinned} states"));
    }
    let sem = semaphore(2);
    let me = check_mutex(&sem, MutexProperty::MutualExclusion, CHECK_CAP).map_err(|e| e.to_string())?;
    ensure(states_of(&me) == Some(SEMAPHORE_STATES), || format!("semaphore(2): {me:?}"))?;
    let PropertyVerdict::Violated(lasso) =
        check_mutex(&sem, MutexProperty::NoLockout, CHECK_CAP).map_err(|e| e.to_string())?
    else {
        return Err("semaphore(2) shows no lockout".into());
    };
    ensure(lasso.lasso_start.is_some() && is_fair(&lasso, &sem.automaton()), || "lockout run is not a fair lasso".into())?;
    let frag = poised_attack(&one_register(2), &[0], AttackBounds::default()).map_err(|e| e.to_string())?;
    ensure(frag.views_equal(), || "observer views differ".into())?;
    ensure(frag.mutual_exclusion_violated, || "hiding fragment does not break exclusion".into())?;
    ensure(critical_count(frag.execution.last_state()) >= 2, || "fragment does not end with two critical".into())?;
    notes.push(format!("semaphore lockout lasso of {} steps", lasso.len()));
    notes.push(format!("hiding fragment with {} hidden steps", frag.hidden.len()));
    Ok(notes.join("; "))
}

fn flp_phenomena() -> Verdict {
    let start = Instant::now();
    let mut notes = Vec::new();
    for sys in shipped_protocols() {
        let name = sys.protocol.name();
        let map = ValenceMap::compute(&sys, CHECK_CAP).map_err(|e| format!("{name}: {e}"))?;
        map.check_monotonicity().map_err(|e| format!("{name}: {e}"))?;
        ensure(map.bivalent_initial().is_some(), || format!("{name}: no bivalent initial configuration"))?;
        match flp_witness(&sys, CHECK_CAP).map_err(|e| format!("{name}: {e}"))? {
            FlpOutcome::NonDecidingRun { run, kind, .. } => {
                ensure(is_fair(&run, &sys.automaton()), || format!("{name}: witness is not fair"))?;
                notes.push(format!("{name} (n={}): {kind:?}, {} configs", sys.n(), map.graph.len()));
            }
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(notes.join("; "))
}

fn two_client_histories(max_per_client: usize) -> Vec<distlab::consistency::History> {
    #[derive(Clone, Copy)]
    enum Label {
        W,
        R(i64),
    }
    let labels = [Label::W, Label::R(0), Label::R(1), Label::R(2)];
    let mut patterns: HashSet<([usize; 2], Vec<bool>)> = HashSet::new();
    let mut out = Vec::new();
    for a in 1..=max_per_client {
        for b in 1..=max_per_client {
            let counts = [a, b];
            for pending in 0..4u8 {
                let events_of = |c: usize| 2 * counts[c] - usize::from(pending >> c & 1 == 1);
                let total = events_of(0) + events_of(1);
                for mask in 0..1u32 << total {
                    if mask.count_ones() as usize != events_of(1) {
                        continue;
                    }
                    let mut next = [0usize; 2];
                    let order: Vec<(usize, usize, bool)> = (0..total)
                        .map(|i| {
                            let c = (mask >> i & 1) as usize;
                            let k = next[c];
                            next[c] += 1;
                            (c, k / 2, k % 2 == 0)
                        })
                        .collect();
                    let at = |c: usize, k: usize, invoke: bool| order.iter().position(|&e| e == (c, k, invoke));
                    let slots: Vec<(usize, usize)> = (0..a).map(|k| (0, k)).chain((0..b).map(|k| (1, k))).collect();
                    // Histories with the same real-time precedence and
                    // pending pattern are equivalent to both checkers.
                    let mut pattern = Vec::new();
                    for &(c, k) in &slots {
                        pattern.push(at(c, k, false).is_none());
                        for &(d, l) in &slots {
                            pattern.push(matches!((at(c, k, false), at(d, l, true)), (Some(r), Some(i)) if r < i));
                        }
                    }
                    if !patterns.insert((counts, pattern)) {
                        continue;
                    }
                    for assign in 0..labels.len().pow((a + b) as u32) {
                        let label_of = |c: usize, k: usize| {
                            let slot = if c == 0 { k } else { a + k };
                            labels[assign / labels.len().pow(slot as u32) % labels.len()]
                        };
                        let mut h = HistoryBuilder::new();
                        for &(c, k, invoke) in &order {
                            let v = (c * 3 + k + 1) as i64;
                            h = match (label_of(c, k), invoke) {
                                (Label::W, true) => h.invoke_write(c, v),
                                (Label::W, false) => h.ack_write(c, v),
                                (Label::R(_), true) => h.invoke_read(c),
                                (Label::R(r), false) => h.return_read(c, r),
                            };
                        }
                        out.push(h.build().expect("generated histories are well formed"));
                    }
                }
            }
        }
    }
    out
}

fn cap_and_lincheck() -> Verdict {
    let partition = PartitionScenario::canonical();
    for seed in 0..20 {
        let cp = cap_scenario(&cap_config(CapVariant::Cp, Some(&partition), seed), CapVariant::Cp)
            .map_err(|e| e.to_string())?;
        ensure(cp.run.unavailable >= 1, || format!("cp seed {seed}: every operation responded"))?;
        ensure(cp.consistent(), || format!("cp seed {seed}: linearizability violated"))?;
        let ap = cap_scenario(&cap_config(CapVariant::Ap, Some(&partition), seed), CapVariant::Ap)
            .map_err(|e| e.to_string())?;
        ensure(ap.run.unavailable == 0, || format!("ap seed {seed}: {} unavailable", ap.run.unavailable))?;
        ensure(matches!(ap.lin, LinResult::Violation(_)), || format!("ap seed {seed}: no violation"))?;
    }
    let start = Instant::now();
    let histories = two_client_histories(3);
    for h in &histories {
        let (a, b) = (lin_check(h).map_err(|e| e.to_string())?, lin_check_enumerate(h).map_err(|e| e.to_string())?);
        ensure(a.is_linearizable() == b.is_linearizable(), || format!("checkers disagree on {h:?}"))?;
        if let (LinResult::Violation(x), LinResult::Violation(y)) = (&a, &b) {
            ensure(x == y, || format!("different minimal prefixes for {h:?}"))?;
        }
    }
    Ok(format!(
        "20 seeds per variant; checkers agree on {} two-client histories ({:.1?})",
        histories.len(),
        start.elapsed()
    ))
}

fn replays(automaton: &Automaton, exec: &Execution, kind: &str) -> Result<(), String> {
    let trace = TraceFile::from_execution(automaton, exec, kind, 0, "fail");
    let parsed = TraceFile::parse(&trace.render()).map_err(|e| e.to_string())?;
    let again = parsed.replay(automaton).map_err(|e| e.to_string())?;
    ensure(&again == exec, || format!("{kind}: replayed execution differs"))
}

fn quorum_config(seed: u64) -> RegisterConfig {
    RegisterConfig {
        servers: 3,
        clients: 2,
        protocol: Protocol::Quorum,
        script: vec![
            ClientOp { client: 0, at: 0, op: Op::Write(1) },
            ClientOp { client: 1, at: 1, op: Op::Read },
            ClientOp { client: 0, at: 2, op: Op::Write(2) },
            ClientOp { client: 1, at: 3, op: Op::Read },
        ],
        net: NetConfig::new(GstModel { gst: 0, delta: 3, f: 1 }, DelayPolicy::Seeded { seed, max_delay: 3 }, 300),
        retry: 4,
        homes: Vec::new(),
    }
}

fn determinism() -> Verdict {
    // Counterexamples: every one the checkers emit replays step for step.
    let mut replayed = 0;
    let sem = semaphore(2);
    for p in [MutexProperty::NoLockout, MutexProperty::BoundedBypass(1)] {
        if let PropertyVerdict::Violated(e) = check_mutex(&sem, p, CHECK_CAP).map_err(|e| e.to_string())? {
            replays(&sem.automaton(), &e, "mutex.semaphore")?;
            replayed += 1;
        }
    }
    let broken = one_register(2);
    if let PropertyVerdict::Violated(e) =
        check_mutex(&broken, MutexProperty::MutualExclusion, CHECK_CAP).map_err(|e| e.to_string())?
    {
        replays(&broken.automaton(), &e, "mutex.safety")?;
        replayed += 1;
    }
    let frag = poised_attack(&broken, &[0], AttackBounds::default()).map_err(|e| e.to_string())?;
    replays(&broken.automaton(), &frag.execution, "mutex.attack")?;
    replayed += 1;
    for sys in shipped_protocols() {
        if let FlpOutcome::NonDecidingRun { run, .. } = flp_witness(&sys, CHECK_CAP).map_err(|e| e.to_string())? {
            replays(&sys.automaton(), &run, "flp")?;
            replayed += 1;
        }
    }

    // Seeded runs: the same seed gives the same records and verdict.
    let mut seeded = 0;
    for seed in 0..25u64 {
        let inst = ConsensusInstance::consensus(5, 2, vec![0, 1, 0, 1, 1]).map_err(|e| e.to_string())?;
        for config in [chaos_config(5, 2, seed, 20, 1), conflict_config(5, 2, seed, 24, 2)] {
            let a = dls_consensus(&inst, &config).map_err(|e| e.to_string())?;
            let b = dls_consensus(&inst, &config).map_err(|e| e.to_string())?;
            ensure(records_digest(&a.log) == records_digest(&b.log) && a.decisions == b.decisions, || {
                format!("dls seed {seed} differs between runs")
            })?;
            seeded += 1;
        }
        let a = run_register(&quorum_config(seed)).map_err(|e| e.to_string())?;
        let b = run_register(&quorum_config(seed)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("quorum seed {seed} differs between runs"))?;
        let finst = ConsensusInstance::new(4, 2, 1, vec![0, 1, 1, 0]).map_err(|e| e.to_string())?;
        let script = random_crash_script(4, 2, 3, seed);
        ensure(script == random_crash_script(4, 2, 3, seed), || "crash script not seed-determined".into())?;
        let la = flood_min_log(&finst, &script).map_err(|e| e.to_string())?;
        ensure(la == flood_min_log(&finst, &script).map_err(|e| e.to_string())?, || "floodmin log differs".into())?;
        let cfg = ApproxConfig::asynchronous(1e-3, 400, seed, 5);
        let x = approx_agree(&[0.0, 3.0, 7.0, 10.0], 1, &cfg).map_err(|e| e.to_string())?;
        let y = approx_agree(&[0.0, 3.0, 7.0, 10.0], 1, &cfg).map_err(|e| e.to_string())?;
        ensure(x.outputs.iter().zip(&y.outputs).all(|(p, q)| p.map(f64::to_bits) == q.map(f64::to_bits)), || {
            format!("approx seed {seed} outputs differ in bits")
        })?;
        seeded += 3;
    }

    // Sharding: frontier partitioning changes neither verdicts nor counts.
    let mut sharded = 0;
    let mut automata: Vec<Automaton> = vec![burns_lynch(2).automaton(), burns_lynch(3).automaton(), sem.automaton()];
    automata.extend(shipped_protocols().iter().map(|s| s.automaton()));
    for a in &automata {
        let bad = |s: &distlab::Value| critical_count(s) >= 2;
        let base = Explorer::new(a).cap(CHECK_CAP).graph().map_err(|e| e.to_string())?;
        for shards in [2, 4, 7] {
            let g = Explorer::new(a).cap(CHECK_CAP).shards(shards).graph().map_err(|e| e.to_string())?;
            ensure(g.states == base.states && g.edges == base.edges, || format!("{shards} shards change the graph"))?;
            let one = Explorer::new(a).cap(CHECK_CAP).safety(bad).map_err(|e| e.to_string())?;
            let many = Explorer::new(a).cap(CHECK_CAP).shards(shards).safety(bad).map_err(|e| e.to_string())?;
            ensure(one == many, || format!("{shards} shards change a safety verdict"))?;
            if let SafetyVerdict::Verified { states } = many {
                ensure(states == base.len(), || "state count differs".into())?;
            }
            sharded += 1;
        }
    }
    Ok(format!("{replayed} counterexamples replayed, {seeded} seeded runs reproduced, {sharded} sharded explorations identical"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("k-set agreement bound", k_set_bound),
        ("f+1 round worst case", chain_worst_case),
        ("DLS safety and liveness", dls_safety_and_liveness),
        ("approximate agreement", approximate_agreement),
        ("clock synchronization bound", clock_bound),
        ("mutual exclusion", mutual_exclusion),
        ("FLP phenomena", flp_phenomena),
        ("CAP and linearizability checking", cap_and_lincheck),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let spent = start.elapsed();
        match verdict {
            Ok(detail) => println!("criterion {} {name}: PASS ({spent:.1?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({spent:.1?}) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
