use std::path::PathBuf;

use sprig_core::fixtures::fixture_files;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// `SPRIG_BLESS=1` rewrites the files instead of comparing.
#[test]
fn checked_in_fixtures_are_current() {
    let bless = std::env::var("SPRIG_BLESS").is_ok_and(|v| v == "1");
    for (path, contents) in fixture_files() {
        let file = root().join(&path);
        if bless {
            std::fs::create_dir_all(file.parent().unwrap()).unwrap();
            std::fs::write(&file, &contents).unwrap();
            continue;
        }
        let on_disk = std::fs::read_to_string(&file)
            .unwrap_or_else(|e| panic!("{}: {e} (run with SPRIG_BLESS=1 to regenerate)", file.display()));
        assert_eq!(
            on_disk, contents,
            "{path} is stale (run with SPRIG_BLESS=1 to regenerate)"
        );
    }
}
