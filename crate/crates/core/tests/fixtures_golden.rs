//! The JSON files under the repository's `fixtures/` directory are the
//! serialized form of `fixtures::all()`. Set `NFVPLAN_BLESS=1` to rewrite them.

use std::path::PathBuf;

use nfvplan_core::fixtures;
use nfvplan_core::model::Scenario;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn fixture_files_match_builders() {
    let bless = std::env::var_os("NFVPLAN_BLESS").is_some();
    for (stem, scenario) in fixtures::all() {
        let path = dir().join(format!("{stem}.json"));
        let expected = scenario.to_json();
        if bless {
            std::fs::write(&path, &expected).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, expected, "{stem}.json is stale");
        assert_eq!(Scenario::from_json(&on_disk).unwrap(), scenario);
    }
}
