use oagkit::catalogue::{groups, mod2_pair};
use oagkit::group::GroupSpec;
use oagkit::pair::PairSpec;

fn read(name: &str) -> serde_json::Value {
    let path = format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn group_files_match_the_catalogue() {
    if std::env::var("OAGKIT_WRITE_DATA").is_ok() {
        for (name, g) in groups() {
            let path = format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"));
            std::fs::write(path, serde_json::to_string_pretty(&g.to_json()).unwrap() + "\n").unwrap();
        }
        let path = format!("{}/data/mod2_pair.json", env!("CARGO_MANIFEST_DIR"));
        std::fs::write(path, serde_json::to_string_pretty(&mod2_pair().to_json()).unwrap() + "\n").unwrap();
    }
    for (name, g) in groups() {
        assert_eq!(GroupSpec::from_json(&read(name)).unwrap(), g, "{name}");
    }
    assert_eq!(PairSpec::from_json(&read("mod2_pair")).unwrap(), mod2_pair());
}
