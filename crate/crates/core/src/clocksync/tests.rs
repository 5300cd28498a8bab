use proptest::prelude::*;

use super::*;

fn max_skew(rows: &[SkewRow]) -> f64 {
    rows.iter().map(|r| r.skew).fold(0.0, f64::max)
}

/// Closed-form logical clocks: mean offset minus the average excess delay
/// (over δ + ε/2) of the messages each process received.
fn logical_oracle(m: &ClockModel) -> Vec<f64> {
    let n = m.n as f64;
    let mean = m.offsets.iter().sum::<f64>() / n;
    (0..m.n)
        .map(|q| {
            let excess: f64 = (0..m.n)
                .filter(|&p| p != q)
                .map(|p| m.delays[p][q] - m.delta - m.epsilon / 2.0)
                .sum();
            mean - excess / n
        })
        .collect()
}

#[test]
fn exact_delays_give_zero_skew() {
    let m = ClockModel::uniform(vec![3.0, -1.5, 7.25], 2.0, 0.0);
    assert!(sync_run(&m).unwrap().skew < 1e-12);
}

#[test]
fn rejects_out_of_range_delay() {
    let mut delays = vec![vec![1.0; 2]; 2];
    delays[0][1] = 2.5;
    let m = ClockModel::uniform(vec![0.0, 0.0], 1.0, 1.0).with_delays(delays);
    assert!(matches!(sync_run(&m), Err(ClockError::InvalidModel(_))));
    assert!(sync_run(&ClockModel::uniform(vec![], 1.0, 1.0)).is_err());
}

#[test]
fn two_process_witness_is_the_swap() {
    let w = shift_witness(&ClockModel::uniform(vec![0.0, 0.0], 0.0, 1.0)).unwrap();
    assert_eq!(w.model.delays[1][0], 0.0);
    assert_eq!(w.model.delays[0][1], 1.0);
    assert_eq!(w.twin.delays[1][0], 1.0);
    assert_eq!(w.twin.delays[0][1], 0.0);
    assert!(w.views_identical());
    assert_eq!(w.skew(), 0.5);
}

#[test]
fn zero_uncertainty_witness() {
    let w = shift_witness(&ClockModel::uniform(vec![0.0, 0.0], 1.0, 0.0)).unwrap();
    assert_eq!(w.skew(), 0.0);
}

#[test]
fn witness_attains_bound() {
    for n in 2..=6 {
        let w = shift_witness(&ClockModel::uniform(vec![0.0; n], 1.0, 1.0)).unwrap();
        assert!(w.views_identical(), "n={n}");
        assert!(w.skew() >= skew_bound(n, 1.0) - 1e-9, "n={n}: {}", w.skew());
    }
    let w = shift_witness(&ClockModel::uniform(vec![0.0; 4], 0.0, 1.0)).unwrap();
    assert!(w.skew() >= 0.75 - 1e-9);
}

#[test]
fn corners_respect_bound() {
    for n in 2..=4 {
        let rows = corner_skews(&vec![0.0; n], 1.0, 1.0).unwrap();
        assert_eq!(rows.len() as u64, corner_count(n));
        let max = max_skew(&rows);
        assert!(max <= skew_bound(n, 1.0) + 1e-9, "n={n}: {max}");
        assert!(max >= skew_bound(n, 1.0) - 1e-9);
    }
}

#[test]
fn sampled_three_process_skew() {
    let rows = sampled_skews(&[0.0, 0.4, -2.0], 0.5, 1.0, 10_000, 7).unwrap();
    assert!(max_skew(&rows) <= 2.0 / 3.0 + 1e-9);
}

#[test]
fn csv_columns() {
    let rows = corner_skews(&[0.0, 0.0], 0.0, 1.0).unwrap();
    let mut buf = Vec::new();
    write_skews(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("n,epsilon,assignmentId,skew"));
    assert_eq!(text.lines().count(), 5);
}

proptest! {
    #[test]
    fn matches_closed_form(
        offsets in prop::collection::vec(-5.0f64..5.0, 2..5),
        fractions in prop::collection::vec(0.0f64..=1.0, 16),
        delta in 0.0f64..3.0,
        epsilon in 0.0f64..2.0,
    ) {
        let n = offsets.len();
        let delays = (0..n).map(|p| (0..n).map(|q| delta + epsilon * fractions[p * 4 + q]).collect()).collect();
        let m = ClockModel::uniform(offsets, delta, epsilon).with_delays(delays);
        let got = sync_run(&m).unwrap();
        for (a, b) in got.logical.iter().zip(logical_oracle(&m)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(got.skew <= skew_bound(n, epsilon) + 1e-9);
    }

    #[test]
    fn translation_invariant(
        offsets in prop::collection::vec(-5.0f64..5.0, 2..5),
        shift in -100.0f64..100.0,
        id in any::<u64>(),
    ) {
        let n = offsets.len();
        let delays = corner_delays(n, 1.0, 1.0, id % corner_count(n));
        let a = sync_run(&ClockModel::uniform(offsets.clone(), 1.0, 1.0).with_delays(delays.clone())).unwrap();
        let moved: Vec<f64> = offsets.iter().map(|o| o + shift).collect();
        let b = sync_run(&ClockModel::uniform(moved, 1.0, 1.0).with_delays(delays)).unwrap();
        prop_assert!((a.skew - b.skew).abs() < 1e-9);
    }
}
