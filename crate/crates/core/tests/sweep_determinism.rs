use ifsim_core::{run_sweep, trend_statistics, Axis, Param, SimConfig, SweepSpec};

fn spec() -> SweepSpec {
    SweepSpec {
        base: SimConfig { num_journals: 3, years: 5, ..SimConfig::default() },
        axes: vec![
            Axis::single(Param::AvgRefs, [10.0, 30.0]),
            Axis::single(Param::ReviewCycleMonths, [2.0, 8.0, 14.0]),
        ],
        replications: 3,
        seed_base: 77,
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let spec = spec();
    let serial = run_sweep(&spec, 1).unwrap();
    let parallel = run_sweep(&spec, 8).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial.cells.len(), 6);
    assert!(serial.cells.iter().enumerate().all(|(i, c)| c.index as usize == i));
}

#[test]
fn replication_seeds_are_distinct() {
    let result = run_sweep(&spec(), 2).unwrap();
    let mut seeds: Vec<u64> = result
        .cells
        .iter()
        .flat_map(|c| c.replications.iter().map(|r| r.seed))
        .collect();
    let n = seeds.len();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), n);
}

#[test]
fn trend_marginalizes_over_other_axes() {
    let result = run_sweep(&spec(), 2).unwrap();
    let trend = trend_statistics(&result, "review_cycle_months").unwrap();
    assert_eq!(trend.positions, vec![2.0, 8.0, 14.0]);
    let means = result.cell_means();
    for (k, m) in trend.means.iter().enumerate() {
        let manual = (means[k] + means[3 + k]) / 2.0;
        assert!((m - manual).abs() < 1e-12);
    }
    assert!(trend_statistics(&result, "avg_refs").is_err());
}
