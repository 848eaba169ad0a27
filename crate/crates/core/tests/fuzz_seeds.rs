//! Replays the checked-in fuzz seeds through the fuzz target bodies.

#[path = "../../../fuzz/src/checks.rs"]
mod checks;

use std::path::Path;

#[test]
fn seeds_pass_their_targets() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    for (name, check) in checks::ALL {
        let dir = root.join(name);
        let mut seen = 0;
        for entry in std::fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
            let path = entry.unwrap().path();
            let data = std::fs::read(&path).unwrap();
            check(&data);
            // damaged variants must not panic either
            for cut in [data.len() / 2, data.len().saturating_sub(1)] {
                check(&data[..cut]);
            }
            let mut flipped = data.clone();
            if let Some(b) = flipped.get_mut(data.len() / 3) {
                *b ^= 0x55;
            }
            check(&flipped);
            seen += 1;
        }
        assert!(seen > 0, "no seeds for {name}");
    }
}

#[test]
fn every_target_has_a_binary() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/fuzz_targets");
    for (name, _) in checks::ALL {
        assert!(root.join(format!("{name}.rs")).exists(), "missing fuzz target {name}");
    }
}
