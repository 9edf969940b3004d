use super::out_dir;
use crate::config::{usage, Settings};
use crate::io::{variable_names, write_data, write_labels};
use crate::manifest::Manifest;
use anyhow::Result;
use corrclust_core::simgen::{simulate, SimDesign};
use std::time::Instant;

/// Builds the design from settings: `bunea`, or `block` with either explicit
/// `sizes` (and `rs` or one `r`) or `k`, `m`, `r` with equal block sizes.
pub fn design_from(s: &mut Settings, n: usize, seed: u64) -> Result<SimDesign> {
    let design: String = s.get("design", "bunea".to_string())?;
    let d = match design.as_str() {
        "bunea" => {
            let k = s.require("k")?;
            let m = s.require("m")?;
            SimDesign::bunea(k, m, n, seed)
        }
        "block" => match s.get_list::<usize>("sizes")? {
            Some(sizes) => {
                let rs = match s.get_list::<f64>("rs")? {
                    Some(rs) => rs,
                    None => vec![s.get("r", 0.7)?; sizes.len()],
                };
                SimDesign::block_equicorr(sizes, rs, n, seed)
            }
            None => {
                let k: usize = s.require("k")?;
                let m: usize = s.require("m")?;
                if m == 0 || !k.is_multiple_of(m) {
                    return Err(usage(format!(
                        "k = {k} is not divisible by m = {m}; give --sizes for unequal blocks"
                    )));
                }
                SimDesign::balanced_blocks(k, m, s.get("r", 0.7)?, n, seed)?
            }
        },
        other => {
            return Err(usage(format!(
                "unknown design '{other}' (expected bunea or block)"
            )))
        }
    };
    d.validate().map_err(|e| usage(e.to_string()))?;
    Ok(d)
}

pub fn run(mut s: Settings) -> Result<()> {
    let started = Instant::now();
    let n = s.get("n", 300usize)?;
    let seed = s.get("seed", 1u64)?;
    let design = design_from(&mut s, n, seed)?;
    let dir = out_dir(&s.get("out", ".".to_string())?)?;
    let config = s.finish()?;

    let (data, truth) = simulate(&design)?;
    let data_path = dir.join("data.csv");
    let truth_path = dir.join("truth.csv");
    write_data(&data_path, &data)?;
    write_labels(&truth_path, &variable_names(&data), &truth.labels)?;

    let mut manifest = Manifest::new("simulate", config, started);
    manifest.seed(seed.into());
    manifest.output(&data_path);
    manifest.output(&truth_path);
    manifest.write(&dir)
}
