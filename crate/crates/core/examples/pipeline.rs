//! Full pipeline on CHSH, written to a directory given as the first argument
//! (default `pipeline_out`).
use std::path::PathBuf;

use fortify::arith::rat;
use fortify::library::chsh;
use fortify::pipeline::{run_pipeline, PipelineConfig};

fn main() -> fortify::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()));
    let mut cfg = PipelineConfig::new(rat(1, 4), rat(1, 4), rat(1, 8));
    cfg.seed = 3;
    let out = run_pipeline(&chsh(), &cfg)?;
    out.write_to(&dir)?;
    println!("{}", out.manifest());
    println!("wrote {} artifacts to {}", out.artifacts.len(), dir.display());
    Ok(())
}
