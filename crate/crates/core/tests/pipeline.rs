use iqc_core::lmi::Status;
use iqc_core::linalg::Mat;
use iqc_core::oracle;
use iqc_core::sweep::{run_sweep, Grid, SweepConfig};

fn small(cfg: SweepConfig, grid: Grid) -> SweepConfig {
    SweepConfig { grid, ..cfg }
}

#[test]
fn decoupled_hurwitz_plant_is_certified_on_the_whole_grid() {
    let a = Mat::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
    let cfg = SweepConfig {
        a,
        b: Mat::zeros(2, 2),
        orders: vec![0],
        grid: Grid::new(0.05, 2.0, 0.15).unwrap(),
        ..SweepConfig::chatter(2.0, vec![0])
    };
    let report = run_sweep(&cfg).unwrap();
    let o = report.order(0).unwrap();
    assert_eq!(o.intervals.len(), 1);
    assert!((o.intervals[0].lo - 0.05).abs() < 1e-12);
    assert!((o.intervals[0].hi - cfg.grid.points().last().unwrap()).abs() < 1e-12);
    assert_eq!(report.oracle.unwrap().intervals.len(), 1);
}

#[test]
fn high_gain_certifies_only_very_short_delays() {
    let cfg = small(SweepConfig::chatter(50.0, vec![0]), Grid::new(0.001, 0.4, 0.004).unwrap());
    let report = run_sweep(&cfg).unwrap();
    let o = report.order(0).unwrap();
    assert_eq!(o.intervals.len(), 1);
    assert!(o.intervals[0].hi < 0.01, "{:?}", o.intervals);
    let exact = &report.oracle.as_ref().unwrap().intervals;
    assert_eq!(exact.len(), 1);
    assert!(exact[0].1 > 0.29 && exact[0].1 < 0.31);
    assert!(report.soundness.is_empty());
}

#[test]
fn short_chatter_sweep_is_sound_hierarchical_and_deterministic() {
    let cfg = small(SweepConfig::chatter(2.0, vec![0, 2]), Grid::new(0.02, 1.0, 0.07).unwrap());
    let first = run_sweep(&cfg).unwrap();
    assert!(first.soundness.is_empty());
    assert!(first.hierarchy.is_empty(), "{:?}", first.hierarchy);
    let n2 = first.order(2).unwrap();
    assert_eq!(n2.intervals.len(), 1);
    assert!((n2.intervals[0].hi - 0.854).abs() < 0.01, "{:?}", n2.intervals);
    assert!(n2.verdicts.iter().all(|v| v.status != Status::Inconclusive));

    let second = run_sweep(&cfg).unwrap();
    let statuses = |r: &iqc_core::sweep::CertificationReport| {
        r.orders.iter().flat_map(|o| o.verdicts.iter().map(|v| (v.order, v.h.to_bits(), v.status))).collect::<Vec<_>>()
    };
    assert_eq!(statuses(&first), statuses(&second));
    assert_eq!(first.order(2).unwrap().intervals, second.order(2).unwrap().intervals);
}

#[test]
fn oracle_examples() {
    let (a, b) = iqc_core::model::chatter(2.0);
    assert!(oracle::dde_abscissa(&a, &b, 0.5).unwrap() < 0.0);
    let z = Mat::zeros(2, 2);
    assert!(oracle::stable_intervals(&z, &z, 0.1, 1.0, 0.1, 1e-3).unwrap().is_empty());
    let hurwitz = Mat::from_row_slice(2, 2, &[-1.0, 3.0, 0.0, -0.5]);
    assert_eq!(oracle::stable_intervals(&hurwitz, &z, 0.1, 1.0, 0.1, 1e-3).unwrap(), vec![(0.1, 1.0)]);
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = SweepConfig::chatter(2.0, vec![]);
    assert!(run_sweep(&cfg).is_err());
    cfg.orders = vec![0];
    cfg.grid.step = -1.0;
    assert!(run_sweep(&cfg).is_err());
}
