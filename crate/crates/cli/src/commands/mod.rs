pub mod baseline;
pub mod evaluate;
pub mod fit;
pub mod simulate;

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

pub(crate) fn out_dir(dir: &str) -> Result<PathBuf> {
    let p = PathBuf::from(dir);
    std::fs::create_dir_all(&p)
        .with_context(|| format!("creating output directory {}", p.display()))?;
    Ok(p)
}

pub(crate) fn input_path(s: &str) -> Result<PathBuf> {
    let p = Path::new(s);
    if !p.is_file() {
        return Err(crate::config::usage(format!(
            "input file {} does not exist",
            p.display()
        )));
    }
    Ok(p.to_path_buf())
}
