//! Writes every named fixture state to `<dir>/<name>.json` (default: ./fixtures).

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, rho) in gocoh::fixtures::all() {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, gocoh::io::state_to_json(&rho) + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
