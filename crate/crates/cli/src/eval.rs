use anyhow::{Context, Result};

use meibo::evalseg::score;
use meibo::io::read_mask;
use meibo::report::ScoreRecord;

use crate::args::EvalArgs;

pub fn run(a: &EvalArgs) -> Result<()> {
    let auto = read_mask(&a.auto).with_context(|| format!("reading {}", a.auto.display()))?;
    let manual = read_mask(&a.manual).with_context(|| format!("reading {}", a.manual.display()))?;
    let s = score(&manual, &auto)?;
    log::info!("k = {:.4}, r_p = {:.4}%, r_n = {:.4}%", s.k, s.r_p, s.r_n);
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&a.out, ScoreRecord::of(&s).to_json())
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
