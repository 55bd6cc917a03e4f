//! Journal presets shipped with the binary. Each is a calibration manifest
//! for one of four journal profiles (review cycle, reference count and
//! target average impact factor).

use crate::manifest::{parse_manifest_str, ManifestError, RunConfig, RunManifest};

pub const PRESETS: [(&str, &str); 4] = [
    ("nature-cell-biology", include_str!("../presets/nature-cell-biology.toml")),
    ("nature-chemical-biology", include_str!("../presets/nature-chemical-biology.toml")),
    ("ieee-tac", include_str!("../presets/ieee-tac.toml")),
    ("laa", include_str!("../presets/laa.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset(name: &str) -> Result<RunManifest, ManifestError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ManifestError::Invalid {
            field: "preset".into(),
            reason: format!("unknown preset `{name}` (known: {})", names().collect::<Vec<_>>().join(", ")),
        })?;
    parse_manifest_str(text, &format!("preset {name}"))
}

/// One line per preset: name, review cycle, average references, target IF.
pub fn listing() -> String {
    let mut out = String::from("name\treview_cycle_months\tavg_refs\ttarget_if\n");
    for name in names() {
        let manifest = preset(name).expect("shipped presets parse");
        if let RunConfig::Calibrate(job) = &manifest.run {
            let t = &job.target;
            out.push_str(&format!(
                "{name}\t{}\t{}\t{:.2}\n",
                t.review_cycle_months, t.avg_refs, t.target_if
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_as_calibration() {
        for name in names() {
            let m = preset(name).unwrap();
            let RunConfig::Calibrate(job) = m.run else {
                panic!("{name} is not a calibration")
            };
            assert_eq!(job.target.name, name);
        }
    }

    #[test]
    fn journal_profiles() {
        let RunConfig::Calibrate(tac) = preset("ieee-tac").unwrap().run else { unreachable!() };
        assert_eq!((tac.target.review_cycle_months, tac.target.avg_refs), (17, 30));
        assert_eq!(tac.target.target_if, 2.65);
        let RunConfig::Calibrate(laa) = preset("laa").unwrap().run else { unreachable!() };
        assert_eq!((laa.target.review_cycle_months, laa.target.avg_refs), (10, 20));
        assert_eq!(laa.target.target_if, 0.94);
        assert!(preset("nature").is_err());
        assert_eq!(listing().lines().count(), 5);
    }
}
