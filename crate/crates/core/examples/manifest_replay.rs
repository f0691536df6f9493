//! Every command leaves a manifest beside its output; replaying it
//! reproduces the output byte for byte.

use spo_core::cli;
use spo_core::manifest::manifest_path;

fn main() -> spo_core::Result<()> {
    let dir = std::env::temp_dir().join(format!("spo-replay-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let inst = dir.join("instance.json");
    let gap = dir.join("gap.csv");
    let again = dir.join("gap_again.csv");

    cli::run(["spo", "gen", "--n", "4", "--seed", "11", "--out", inst.to_str().unwrap()])?;
    cli::run(["spo", "gap", "--instance", inst.to_str().unwrap(), "--N", "20", "--out", gap.to_str().unwrap()])?;

    let manifest = manifest_path(&gap);
    print!("{}", std::fs::read_to_string(&manifest).unwrap());
    cli::replay(&manifest, Some(&again))?;

    let same = std::fs::read(&gap).unwrap() == std::fs::read(&again).unwrap();
    println!("replayed output identical: {same}");
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
