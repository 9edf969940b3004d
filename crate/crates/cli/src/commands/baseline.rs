use super::{input_path, out_dir};
use crate::config::Settings;
use crate::io::{fmt_f64, read_data, variable_names, write_labels, writer};
use crate::manifest::Manifest;
use anyhow::Result;
use corrclust_core::baselines::{
    hierarchical_variables, kmeans_variables, pam_variables, BaselineSpec, Linkage, Method,
};
use std::time::Instant;

pub fn run(mut s: Settings) -> Result<()> {
    let started = Instant::now();
    let data_path = input_path(&s.require::<String>("data")?)?;
    let method: Method = s.require("method")?;
    let mut spec = BaselineSpec::new(method, s.require("m")?);
    if method == Method::Hierarchical {
        spec.linkage = s.get::<Linkage>("linkage", Linkage::Average)?;
    } else {
        spec.max_iter = s.get("max-iter", spec.max_iter)?;
    }
    if method == Method::KMeans {
        spec.seed = s.get("seed", spec.seed)?;
        spec.restarts = s.get("restarts", spec.restarts)?;
    }
    let standardize = s.get("standardize", true)?;
    let dir = out_dir(&s.get("out", ".".to_string())?)?;
    let config = s.finish()?;

    let raw = read_data(&data_path)?;
    spec.validate(raw.k())
        .map_err(|e| crate::config::usage(e.to_string()))?;
    let data = if standardize {
        raw.standardized()?
    } else {
        raw
    };
    let names = variable_names(&data);
    let mut manifest = Manifest::new("baseline", config, started);
    manifest.input(&data_path);

    let labels = match method {
        Method::KMeans => {
            manifest.seed(spec.seed.into());
            kmeans_variables(&data, &spec)?.labels
        }
        Method::Pam => pam_variables(&data, &spec)?.labels,
        Method::Hierarchical => {
            let fit = hierarchical_variables(&data, &spec)?;
            // Leaves are 1..=k; the cluster formed at step t is k + t.
            let merges_path = dir.join("merges.csv");
            let mut w = writer(&merges_path)?;
            w.write_record(["step", "left", "right", "height", "size"])?;
            for (t, mg) in fit.dendrogram.merges().iter().enumerate() {
                w.write_record([
                    (t + 1).to_string(),
                    (mg.left + 1).to_string(),
                    (mg.right + 1).to_string(),
                    fmt_f64(mg.height),
                    mg.size.to_string(),
                ])?;
            }
            w.flush()?;
            manifest.output(&merges_path);
            fit.labels
        }
    };
    let labels_path = dir.join("labels.csv");
    write_labels(&labels_path, &names, &labels)?;
    manifest.output(&labels_path);
    manifest.write(&dir)
}
