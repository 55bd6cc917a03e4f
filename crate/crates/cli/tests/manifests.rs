use ifsim_cli::manifest::{parse_manifest_str, RunConfig};
use ifsim_cli::presets;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_manifest_round_trips(
        seed in 0..=i64::MAX as u64,
        journals in 1u32..20,
        years in 3u32..20,
        cycle in 0u32..24,
        refs in 1u32..80,
        alpha in -50.0f64..200.0,
        beta in 0.5f64..100.0,
        gamma in 0.5f64..100.0,
        delta in 0.0f64..30.0,
        edges in any::<bool>(),
    ) {
        let text = format!(
            "seed = {seed}\nnum_journals = {journals}\nyears = {years}\nreview_cycle_months = {cycle}\n\
             avg_refs = {refs}\n[kernel]\nalpha = {alpha:?}\nbeta = {beta:?}\ngamma = {gamma:?}\ndelta = {delta:?}\n\
             [emit]\nedges = {edges}\n"
        );
        let m = parse_manifest_str(&text, "generated").unwrap();
        let RunConfig::Simulate(c) = &m.run else { panic!("expected a simulation") };
        prop_assert_eq!(c.seed, seed);
        prop_assert_eq!(c.kernel.alpha, alpha);
        prop_assert_eq!(m.emit.edges, edges);
        let again = parse_manifest_str(&m.to_toml(), "round-trip").unwrap();
        prop_assert_eq!(again, m);
    }
}

#[test]
fn seeds_beyond_toml_range_are_rejected() {
    let err = parse_manifest_str("seed = 1\n", "inline").map(|mut m| {
        m.run.set_seed(u64::MAX);
        m.validate()
    });
    assert_eq!(err.unwrap().unwrap_err().code(), "config-invalid");
}

#[test]
fn presets_round_trip() {
    for name in presets::names() {
        let m = presets::preset(name).unwrap();
        assert_eq!(parse_manifest_str(&m.to_toml(), name).unwrap(), m);
    }
}
