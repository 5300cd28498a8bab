use std::collections::BTreeSet;

use super::toys::*;
use super::*;
use crate::value::Value;

/// All executions of length <= depth, by exhaustive DFS over `successors`.
fn executions(a: &Automaton, depth: usize) -> Vec<Execution> {
    let mut out = Vec::new();
    let mut stack: Vec<Execution> = a.start_states().iter().cloned().map(Execution::empty).collect();
    while let Some(exec) = stack.pop() {
        if exec.len() < depth {
            for (action, next) in a.successors(exec.last_state()) {
                let mut longer = exec.clone();
                longer.push(action, next);
                stack.push(longer);
            }
        }
        out.push(exec);
    }
    out
}

fn traces(a: &Automaton, depth: usize) -> BTreeSet<Trace> {
    executions(a, depth).iter().map(|e| trace_of(e, a)).collect()
}

#[test]
fn compose_single_component_keeps_traces() {
    let c = channel("ch", &[0, 1], 2);
    let composed = compose(std::slice::from_ref(&c)).unwrap();
    assert_eq!(traces(&c, 4), traces(&composed, 4));
}

#[test]
fn composed_send_is_an_output() {
    let system = compose(&[sender("S", &[7]), channel("C", &[7], 2), receiver("R", &[7])]).unwrap();
    assert_eq!(system.kind("send"), Some(ActionKind::Output));
    assert_eq!(system.kind("deliver"), Some(ActionKind::Output));
    let start = system.start_states()[0].clone();
    let exec = Execution::replay(
        &system,
        start,
        [Action::new("send", Value::Int(7)), Action::new("deliver", Value::Int(7))],
    )
    .unwrap();
    let trace = trace_of(&exec, &system);
    assert_eq!(trace.0[0], Action::new("send", Value::Int(7)));
    assert_eq!(exec.last_state().at(2), Some(&Value::list([Value::Int(7)])));
}

#[test]
fn shared_output_is_rejected() {
    let err = compose(&[decider("P1", 0), decider("P2", 1)]).unwrap_err();
    match err {
        AutomatonError::IncompatibleSignatures { action, left, right, .. } => {
            assert_eq!(action, "decide");
            assert_eq!((left.as_str(), right.as_str()), ("P1", "P2"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn shared_internal_is_rejected() {
    let a = ticker("a", 1);
    let b = Automaton::new(
        "b",
        Signature::new().input("a_tick"),
        vec![Value::Unit],
        Default::default(),
        FnBehavior::new(|_| vec![]).with_inputs(vec![], |s, _| Some(s.clone())),
    )
    .unwrap();
    assert!(matches!(
        compose(&[a, b]),
        Err(AutomatonError::IncompatibleSignatures { .. })
    ));
}

#[test]
fn task_partition_is_validated() {
    let missing = Automaton::new(
        "x",
        Signature::new().output("o"),
        vec![Value::Unit],
        Default::default(),
        FnBehavior::new(|_| vec![]),
    );
    assert!(matches!(missing, Err(AutomatonError::TaskMissing { .. })));
    let input_in_task = Automaton::new(
        "x",
        Signature::new().input("i"),
        vec![Value::Unit],
        [("t".to_string(), BTreeSet::from(["i".to_string()]))].into(),
        FnBehavior::new(|_| vec![]),
    );
    assert!(matches!(input_in_task, Err(AutomatonError::TaskNotLocal { .. })));
    let no_start = Automaton::new("x", Signature::new(), vec![], Default::default(), FnBehavior::new(|_| vec![]));
    assert!(matches!(no_start, Err(AutomatonError::NoStartStates(_))));
}

#[test]
fn step_examples() {
    let c = counter("c", 3);
    assert_eq!(c.step(&Value::Int(0), &Action::bare("increment")), Ok(Value::Int(1)));

    let ch = channel("ch", &[5], 2);
    let full = Value::record([("queue", Value::list([Value::Int(5)]))]);
    let empty = Value::record([("queue", Value::list([]))]);
    assert_eq!(ch.step(&full, &Action::new("deliver", Value::Int(5))), Ok(empty.clone()));
    assert!(matches!(
        ch.step(&empty, &Action::new("deliver", Value::Int(5))),
        Err(StepError::ActionNotEnabled { .. })
    ));
    assert!(matches!(
        ch.step(&empty, &Action::bare("teleport")),
        Err(StepError::UnknownAction(_))
    ));
}

#[test]
fn enabled_tasks_examples() {
    assert!(idle("p").enabled_tasks(&Value::Unit).is_empty());

    let ch = channel("ch", &[5], 2);
    let one = Value::record([("queue", Value::list([Value::Int(5)]))]);
    assert_eq!(ch.enabled_tasks(&one), BTreeSet::from(["delivery".to_string()]));

    let system = compose(&[counter("c", 1), ch]).unwrap();
    let state = Value::list([Value::Int(0), one]);
    assert_eq!(
        system.enabled_tasks(&state),
        BTreeSet::from(["c.count".to_string(), "ch.delivery".to_string()])
    );
}

#[test]
fn fairness_examples() {
    let c = counter("c", 2);
    let done = Execution::replay(&c, Value::Int(0), [Action::bare("increment"), Action::bare("increment")]).unwrap();
    assert!(is_fair(&done, &c));

    let halfway = Execution::replay(&c, Value::Int(0), [Action::bare("increment")]).unwrap();
    assert!(matches!(fairness(&halfway, &c), Fairness::Inconclusive { .. }));

    assert!(is_fair(&Execution::empty(Value::Unit), &idle("p")));

    // A flipper keeps running while a queued message is never delivered.
    let system = compose(&[flipper("f"), channel("ch", &[1], 1)]).unwrap();
    let start = system.start_states()[0].clone();
    let mut exec = Execution::replay(
        &system,
        start,
        [
            Action::new("send", Value::Int(1)),
            Action::bare("f_flip"),
            Action::bare("f_flip"),
        ],
    )
    .unwrap();
    exec.lasso_start = Some(1);
    exec.validate(&system).unwrap();
    assert_eq!(
        fairness(&exec, &system),
        Fairness::Unfair { starved: BTreeSet::from(["ch.delivery".to_string()]) }
    );
}

#[test]
fn open_lasso_is_rejected() {
    let c = counter("c", 3);
    let mut exec = Execution::replay(&c, Value::Int(0), [Action::bare("increment")]).unwrap();
    exec.lasso_start = Some(0);
    assert_eq!(exec.validate(&c), Err(ExecutionError::OpenLasso(0)));
}

#[test]
fn trace_and_solves_examples() {
    let t = ticker("t", 3);
    let exec = Execution::replay(&t, Value::Int(0), vec![Action::bare("t_tick"); 3]).unwrap();
    assert!(trace_of(&exec, &t).is_empty());
    assert_eq!(trace_of(&exec, &t).to_string(), "ε");

    assert!(solves([&Trace::default()], |_| true));

    let agreement = |tr: &Trace| {
        let decided: BTreeSet<&Value> = tr.0.iter().filter(|a| a.name == "decide").map(|a| &a.payload).collect();
        decided.len() <= 1
    };
    let bad = Trace(vec![
        Action::new("decide", Value::Int(0)),
        Action::new("decide", Value::Int(1)),
    ]);
    assert!(!solves([&bad], agreement));
}

#[test]
fn solve_report_separates_fair_traces() {
    let c = counter("c", 2);
    let partial = Execution::replay(&c, Value::Int(0), [Action::bare("increment")]).unwrap();
    let full = Execution::replay(&c, Value::Int(0), vec![Action::bare("increment"); 2]).unwrap();
    // "Problem": at least two increments. Only the fair execution satisfies it.
    let report = solve_report(&[partial, full], &c, |t| t.0.len() >= 2);
    assert!(!report.all_traces);
    assert!(report.fair_traces);
    assert_eq!((report.fair_count, report.total), (1, 2));
}

#[test]
fn projections_of_composed_executions_are_component_executions() {
    let parts = [sender("S", &[1, 2]), channel("C", &[1, 2], 2), receiver("R", &[1, 2])];
    let system = compose(&parts).unwrap();
    let mut checked = 0;
    for exec in executions(&system, 6) {
        for (i, part) in parts.iter().enumerate() {
            let start = exec.start.at(i).unwrap().clone();
            let mut projected = Execution::empty(start);
            for step in &exec.steps {
                if part.signature().contains(&step.action.name) {
                    projected.push(step.action.clone(), step.state.at(i).unwrap().clone());
                } else {
                    assert_eq!(step.state.at(i), Some(projected.last_state()));
                }
            }
            projected.validate(part).unwrap();
            checked += 1;
        }
    }
    assert!(checked >= 15, "{checked}");
}

#[test]
fn toys_are_input_enabled() {
    for a in [channel("c", &[0, 1], 2), receiver("r", &[0, 1]), counter("k", 3)] {
        assert!(a.check_input_enabled(10_000).is_ok(), "{}", a.id());
    }
    let system = compose(&[sender("S", &[1, 2]), channel("C", &[1, 2], 2), receiver("R", &[1, 2])]).unwrap();
    assert!(system.check_input_enabled(10_000).unwrap() > 1);
}

#[test]
fn start_states_form_a_product() {
    let a = Automaton::with_singleton_tasks(
        "a",
        Signature::new(),
        vec![Value::Int(0), Value::Int(1)],
        FnBehavior::new(|_| vec![]),
    )
    .unwrap();
    let b = Automaton::with_singleton_tasks("b", Signature::new(), vec![Value::Int(5), Value::Int(6)], FnBehavior::new(|_| vec![])).unwrap();
    let ab = compose(&[a, b]).unwrap();
    assert_eq!(ab.start_states().len(), 4);
    assert_eq!(ab.start_states()[0], Value::list([Value::Int(0), Value::Int(5)]));
}
