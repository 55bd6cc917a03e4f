use std::collections::HashSet;

use ifsim_core::engine::MIN_REFERENCES;
use ifsim_core::{run_simulation, SimConfig, SimResult};
use proptest::prelude::*;

fn check_invariants(result: &SimResult) {
    let cfg = &result.config;
    let arts = &result.articles;
    assert_eq!(arts.len() as u64, cfg.total_articles());

    let mut recount = vec![0u32; arts.len()];
    let mut filled = 0u64;
    for a in arts {
        assert_eq!(arts[a.id as usize - 1].id, a.id);
        assert!(a.ref_target >= MIN_REFERENCES);
        assert!(a.out_refs.len() as u32 <= a.ref_target);
        if a.pub_month <= cfg.warmup_months {
            assert!(a.out_refs.is_empty(), "article {} cites during warm-up", a.id);
        }
        let mut seen = HashSet::new();
        for &c in &a.out_refs {
            assert_ne!(c, a.id, "self-citation");
            assert!(c < a.id);
            let cited = &arts[c as usize - 1];
            assert!(a.pub_month - cited.pub_month > cfg.review_cycle_months);
            seen.insert(c);
            recount[c as usize - 1] += 1;
        }
        filled += a.out_refs.len() as u64;
    }
    for a in arts {
        assert_eq!(a.times_cited, recount[a.id as usize - 1]);
    }

    let d = &result.diagnostics;
    assert_eq!(d.slots_requested, filled + d.abandoned_slots + d.unfillable_slots);
    assert_eq!(result.ledger.edges.len() as u64, filled);
    let total_cites: u64 = result.ledger.per_journal_year_cites.iter().flatten().sum();
    let in_window = result
        .ledger
        .edges
        .iter()
        .filter(|&&(citing, cited)| {
            let dy = arts[citing as usize - 1].pub_year() - arts[cited as usize - 1].pub_year();
            dy == 1 || dy == 2
        })
        .count() as u64;
    assert_eq!(total_cites, in_window);
}

#[test]
fn default_run_satisfies_invariants() {
    for seed in [1, 2, 3] {
        let result = run_simulation(&SimConfig { seed, ..SimConfig::default() }).unwrap();
        assert_eq!(result.articles.len(), 15_600);
        check_invariants(&result);
    }
}

#[test]
fn identical_seeds_give_identical_runs() {
    let cfg = SimConfig { years: 5, seed: 99, ..SimConfig::default() };
    assert_eq!(run_simulation(&cfg).unwrap(), run_simulation(&cfg).unwrap());
    let other = run_simulation(&SimConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(run_simulation(&cfg).unwrap().ledger.edges, other.ledger.edges);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_runs_satisfy_invariants(
        seed in any::<u64>(),
        journals in 1u32..4,
        issues in prop::sample::select(vec![1u32, 2, 4, 6, 12]),
        per_issue in 1u32..8,
        years in 3u32..7,
        cycle in 0u32..20,
        refs in 1u32..40,
        warmup in 0u32..30,
    ) {
        let cfg = SimConfig {
            num_journals: journals,
            issues_per_year: issues,
            articles_per_issue: per_issue,
            years,
            review_cycle_months: cycle,
            avg_refs: refs,
            warmup_months: warmup,
            max_attempts: 2_000,
            seed,
            ..SimConfig::default()
        };
        let result = run_simulation(&cfg).unwrap();
        check_invariants(&result);
    }
}
