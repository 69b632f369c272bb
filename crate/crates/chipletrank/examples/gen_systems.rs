//! Regenerate the bundled benchmark systems and suite manifest.
//!
//! Usage: cargo run --example gen_systems -- [output-dir]
//! Defaults to ./systems relative to the current directory.

use chipletrank::synthetic::{bundled_suite, bundled_systems};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "systems".to_string());
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create output dir");
    for bundled in bundled_systems() {
        let path = dir.join(format!("{}.json", bundled.id));
        std::fs::write(&path, bundled.system.to_json()).expect("write system file");
        println!("wrote {}", path.display());
    }
    let suite = bundled_suite();
    let suite_path = dir.join("suite.json");
    std::fs::write(
        &suite_path,
        serde_json::to_string_pretty(&suite).expect("serialize suite"),
    )
    .expect("write suite file");
    println!("wrote {}", suite_path.display());
}
