use proptest::prelude::*;

use nfvplan_core::gen::{random_scenario, RandomParams};
use nfvplan_core::model::{validate, Rule, Scenario};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_keeps_scenario_and_hash(seed in any::<u64>()) {
        let s = random_scenario(seed, &RandomParams::default());
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.content_hash(), s.content_hash());
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn compact_and_pretty_forms_hash_alike(seed in any::<u64>()) {
        let s = random_scenario(seed, &RandomParams::default());
        let compact = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(Scenario::from_json(&compact).unwrap().content_hash(), s.content_hash());
    }

    #[test]
    fn short_volume_rows_are_reported(seed in any::<u64>(), class_pick in any::<prop::sample::Index>()) {
        let mut s = random_scenario(seed, &RandomParams::default());
        let c = class_pick.index(s.classes.len());
        s.classes[c].volumes.push(1.0);
        let v = validate(&s);
        prop_assert!(v.iter().any(|x| x.rule == Rule::EpochMismatch), "{:?}", v);
    }

    #[test]
    fn negative_capacity_is_reported(seed in any::<u64>(), inst in any::<prop::sample::Index>()) {
        let mut s = random_scenario(seed, &RandomParams::default());
        let i = inst.index(s.instances.len());
        s.instances[i].capacity = -1.0;
        prop_assert!(validate(&s).iter().any(|x| x.rule == Rule::NonPositiveCapacity));
    }
}

#[test]
fn distinct_scenarios_hash_apart() {
    let p = RandomParams::default();
    let hashes: std::collections::BTreeSet<String> = (0..100).map(|seed| random_scenario(seed, &p).content_hash()).collect();
    assert_eq!(hashes.len(), 100);
}

#[test]
fn unknown_fields_are_parse_errors() {
    let s = random_scenario(1, &RandomParams::default());
    let mut v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    v["surprise"] = serde_json::json!(1);
    let err = Scenario::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("surprise"), "{err}");
}
