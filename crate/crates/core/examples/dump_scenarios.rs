//! Regenerates the canned scenario files under `scenarios/` from the
//! built-in definitions, so the JSON on disk never drifts from the code.
//!
//! Usage: `cargo run --example dump_scenarios [out_dir]`

use hexactl::config::{builtin_scenario, to_canonical_json, BUILTIN_SCENARIOS};

fn main() -> hexactl::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "scenarios".into());
    std::fs::create_dir_all(&out_dir)?;
    for name in BUILTIN_SCENARIOS {
        let scenario = builtin_scenario(name)?;
        let path = format!("{out_dir}/{name}.json");
        std::fs::write(&path, to_canonical_json(&scenario)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
