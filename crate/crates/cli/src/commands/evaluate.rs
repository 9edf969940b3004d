use super::fit::{chain_config, run_chains};
use super::simulate::design_from;
use super::{input_path, out_dir};
use crate::config::{usage, Settings};
use crate::io::{fmt_f64, read_labels, write_json, writer};
use crate::manifest::Manifest;
use anyhow::Result;
use corrclust_core::baselines::{cluster_variables, BaselineSpec, Linkage, Method};
use corrclust_core::sampler::summarize;
use corrclust_core::simgen::{contingency_table, recovery, simulate};
use serde_json::json;
use std::time::Instant;

const SWEEPABLE: [&str; 4] = ["n", "k", "m", "r"];

/// Design settings of a sweep; without any, block data with k = 12, m = 3,
/// r = 0.7.
const SWEEP_DESIGN_DEFAULTS: [(&str, Option<&str>); 6] = [
    ("design", Some("block")),
    ("k", Some("12")),
    ("m", Some("3")),
    ("r", Some("0.7")),
    ("sizes", None),
    ("rs", None),
];

pub fn run(mut s: Settings) -> Result<()> {
    match s.get_opt::<String>("sweep")? {
        Some(sweep) => run_sweep(s, &sweep),
        None => run_single(s),
    }
}

fn run_single(mut s: Settings) -> Result<()> {
    let started = Instant::now();
    let labels_path = input_path(&s.require::<String>("labels")?)?;
    let truth_path = input_path(&s.require::<String>("truth")?)?;
    let dir = out_dir(&s.get("out", ".".to_string())?)?;
    let echo = s.finish()?;

    let (names, labels) = read_labels(&labels_path)?;
    let (truth_names, truth) = read_labels(&truth_path)?;
    if labels.len() != truth.len() {
        return Err(usage(format!(
            "{} labels but {} truth labels",
            labels.len(),
            truth.len()
        )));
    }
    if let Some(i) = (0..names.len()).find(|&i| names[i] != truth_names[i]) {
        return Err(usage(format!(
            "row {}: variable '{}' in labels but '{}' in truth",
            i + 1,
            names[i],
            truth_names[i]
        )));
    }
    let score = recovery(&labels, &truth)?;
    let table = contingency_table(&labels, &truth)?;
    let eval_path = dir.join("eval.json");
    write_json(
        &eval_path,
        &json!({
            "recovery": score,
            "variables": labels.len(),
            "estimated_clusters": table.len(),
            "true_clusters": table.first().map_or(0, Vec::len),
            "contingency": table,
        }),
    )?;
    let mut manifest = Manifest::new("evaluate", echo, started);
    manifest.input(&labels_path);
    manifest.input(&truth_path);
    manifest.output(&eval_path);
    manifest.write(&dir)
}

/// Simulates `reps` datasets per value of the swept setting, fits the
/// sampler and the baselines on each, and writes per-run and mean recovery.
fn run_sweep(mut s: Settings, sweep: &str) -> Result<()> {
    let started = Instant::now();
    let (param, values) = sweep
        .split_once('=')
        .ok_or_else(|| usage(format!("sweep '{sweep}' must look like n=100,300,600")))?;
    let param = param.trim().to_string();
    if !SWEEPABLE.contains(&param.as_str()) {
        return Err(usage(format!(
            "cannot sweep '{param}'; choose one of {SWEEPABLE:?}"
        )));
    }
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(usage("sweep lists no values"));
    }
    let reps = s.get("reps", 5usize)?;
    let methods: Vec<String> = s.get_list::<String>("methods")?.unwrap_or_else(|| {
        ["bvc", "kmeans", "pam", "hierarchical"]
            .map(String::from)
            .to_vec()
    });
    for m in &methods {
        if m != "bvc" {
            m.parse::<Method>().map_err(|e| usage(e.to_string()))?;
        }
    }
    let linkage = s.get("linkage", Linkage::Average)?;
    let standardize = s.get("standardize", true)?;
    let base_seed = s.get("seed", 1u64)?;
    let mut chain = chain_config(&mut s)?;
    let dir = out_dir(&s.get("out", ".".to_string())?)?;

    // Resolve the design once per swept value on a copy of the settings so
    // every value sees the same base configuration.
    let mut designs = Vec::new();
    let base_n = s.get("n", 300usize)?;
    for v in &values {
        let mut per = Vec::new();
        for rep in 0..reps {
            let mut local = Settings::default();
            for (key, default) in SWEEP_DESIGN_DEFAULTS {
                let val = s
                    .get_opt::<String>(key)?
                    .or_else(|| default.map(String::from));
                local.flag(key, val);
            }
            let mut n = base_n;
            if param == "n" {
                n = v
                    .parse()
                    .map_err(|_| usage(format!("sweep value '{v}' is not a valid n")))?;
            } else {
                local.flag(&param, Some(v.clone()));
            }
            let seed = base_seed + rep as u64;
            per.push((seed, design_from(&mut local, n, seed)?));
        }
        designs.push(per);
    }
    let echo = s.finish()?;

    let runs_path = dir.join("sweep_runs.csv");
    let mut runs = writer(&runs_path)?;
    runs.write_record([param.as_str(), "replicate", "seed", "method", "recovery"])?;
    let mut means = Vec::new();
    for (v, per) in values.iter().zip(&designs) {
        let mut scores = vec![Vec::new(); methods.len()];
        for (rep, (seed, design)) in per.iter().enumerate() {
            let (raw, truth) = simulate(design)?;
            let data = if standardize {
                raw.standardized()?
            } else {
                raw
            };
            for (mi, method) in methods.iter().enumerate() {
                let labels = if method == "bvc" {
                    chain.seed = *seed;
                    let traces = run_chains(&data, &chain, 1)?;
                    summarize(&traces[0])?.point_labels
                } else {
                    let mut spec = BaselineSpec::new(method.parse()?, design.m);
                    spec.linkage = linkage;
                    spec.seed = *seed;
                    cluster_variables(&data, &spec)?
                };
                let score = recovery(&labels, &truth.labels)?;
                runs.write_record([
                    v.clone(),
                    (rep + 1).to_string(),
                    seed.to_string(),
                    method.clone(),
                    fmt_f64(score),
                ])?;
                scores[mi].push(score);
            }
        }
        for (method, sc) in methods.iter().zip(scores) {
            let mean = sc.iter().sum::<f64>() / sc.len() as f64;
            let var = if sc.len() > 1 {
                sc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (sc.len() - 1) as f64
            } else {
                0.0
            };
            means.push([
                v.clone(),
                method.clone(),
                sc.len().to_string(),
                fmt_f64(mean),
                fmt_f64(var.sqrt()),
            ]);
        }
    }
    runs.flush()?;
    let sweep_path = dir.join("sweep.csv");
    let mut w = writer(&sweep_path)?;
    w.write_record([
        param.as_str(),
        "method",
        "replicates",
        "mean_recovery",
        "sd_recovery",
    ])?;
    for row in means {
        w.write_record(row)?;
    }
    w.flush()?;

    let mut manifest = Manifest::new("evaluate", echo, started);
    for seed in 0..reps {
        manifest.seed((base_seed + seed as u64).into());
    }
    manifest.output(&runs_path);
    manifest.output(&sweep_path);
    manifest.write(&dir)
}
