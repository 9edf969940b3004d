use super::{input_path, out_dir};
use crate::config::{usage, Settings};
use crate::io::{
    fmt_f64, read_data, read_labels, variable_names, write_json, write_labels, writer,
};
use crate::manifest::Manifest;
use anyhow::{Context, Result};
use corrclust_core::model::{Dataset, Hyperparams};
use corrclust_core::sampler::{
    run_chain, summarize, ChainConfig, ChainTrace, MoveCounters, MoveMix, MoveStats,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;
use std::time::Instant;

/// Sampler settings shared by `fit` and the evaluation sweep.
pub fn chain_config(s: &mut Settings) -> Result<ChainConfig> {
    let d = ChainConfig::default();
    let h = Hyperparams::default();
    let birth = s.get("birth", d.moves.birth)?;
    let death = s.get("death", d.moves.death)?;
    let config = ChainConfig {
        iterations: s.get("iterations", d.iterations)?,
        burn_in: s.get("burn-in", d.burn_in)?,
        thin: s.get("thin", d.thin)?,
        seed: s.get("seed", d.seed)?,
        stream: 0,
        moves: MoveMix {
            birth,
            death,
            within: 1.0 - birth - death,
        },
        verify: s.get("verify", d.verify)?,
        use_likelihood: s.get("likelihood", d.use_likelihood)?,
        initial_m: s.get("initial-m", d.initial_m)?,
        hyper: Hyperparams {
            poisson_rate: s.get("poisson-rate", h.poisson_rate)?,
            alpha: s.get("alpha", h.alpha)?,
            theta_step: s.get("theta-step", h.theta_step)?,
            lambda_step: s.get("lambda-step", h.lambda_step)?,
            ..h
        },
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

/// Thread count for `chains` concurrent chains, capped by `CORRCLUST_THREADS`.
fn thread_count(chains: usize) -> Result<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = match std::env::var("CORRCLUST_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| {
                usage(format!(
                    "CORRCLUST_THREADS must be a positive integer, got '{v}'"
                ))
            })?,
        Err(_) => available,
    };
    Ok(chains.min(cap).max(1))
}

pub fn run_chains(data: &Dataset, config: &ChainConfig, chains: usize) -> Result<Vec<ChainTrace>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(chains)?)
        .build()
        .context("starting chain thread pool")?;
    let traces = pool.install(|| {
        (0..chains)
            .into_par_iter()
            .map(|c| {
                run_chain(
                    data,
                    &ChainConfig {
                        stream: c as u64,
                        ..config.clone()
                    },
                )
            })
            .collect::<Vec<_>>()
    });
    Ok(traces
        .into_iter()
        .collect::<corrclust_core::Result<Vec<_>>>()?)
}

fn add(a: MoveStats, b: MoveStats) -> MoveStats {
    MoveStats {
        proposed: a.proposed + b.proposed,
        accepted: a.accepted + b.accepted,
    }
}

/// All chains' kept states as one trace.
pub fn pool(traces: &[ChainTrace]) -> ChainTrace {
    let mut counters = MoveCounters::default();
    for t in traces {
        let c = &t.counters;
        counters.birth = add(counters.birth, c.birth);
        counters.death = add(counters.death, c.death);
        counters.assignment = add(counters.assignment, c.assignment);
        counters.theta = add(counters.theta, c.theta);
        counters.lambda = add(counters.lambda, c.lambda);
        counters.order = add(counters.order, c.order);
    }
    ChainTrace {
        records: traces
            .iter()
            .flat_map(|t| t.records.iter().cloned())
            .collect(),
        counters,
        k: traces[0].k,
    }
}

fn acceptance(c: &MoveCounters) -> Value {
    let entry =
        |m: MoveStats| json!({ "proposed": m.proposed, "accepted": m.accepted, "rate": m.rate() });
    json!({
        "birth": entry(c.birth),
        "death": entry(c.death),
        "assignment": entry(c.assignment),
        "theta": entry(c.theta),
        "lambda": entry(c.lambda),
        "exchange": entry(c.order),
    })
}

fn joined<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn write_trace(path: &Path, trace: &ChainTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "iteration",
        "m",
        "log_posterior",
        "labels",
        "theta",
        "lambda",
    ])?;
    for r in &trace.records {
        let st = &r.state;
        w.write_record([
            r.iteration.to_string(),
            st.m().to_string(),
            fmt_f64(r.log_posterior),
            joined(st.assignment.labels().iter().map(|l| l + 1)),
            joined(st.theta.theta.iter().map(|&t| fmt_f64(t))),
            joined(st.lambda.iter().map(|&l| fmt_f64(l))),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(mut s: Settings) -> Result<()> {
    let started = Instant::now();
    let data_path = input_path(&s.require::<String>("data")?)?;
    let truth_path = s
        .get_opt::<String>("truth")?
        .map(|p| input_path(&p))
        .transpose()?;
    let config = chain_config(&mut s)?;
    let chains = s.get("chains", 1usize)?;
    if chains == 0 {
        return Err(usage("chains must be positive"));
    }
    let standardize = s.get("standardize", true)?;
    let dir = out_dir(&s.get("out", ".".to_string())?)?;
    let echo = s.finish()?;

    let raw = read_data(&data_path)?;
    let data = if standardize {
        raw.standardized()?
    } else {
        raw
    };
    let names = variable_names(&data);
    let truth = truth_path
        .as_deref()
        .map(|p| -> Result<Vec<usize>> {
            let (_, labels) = read_labels(p)?;
            if labels.len() != data.k() {
                return Err(usage(format!(
                    "truth has {} labels for {} variables",
                    labels.len(),
                    data.k()
                )));
            }
            Ok(labels)
        })
        .transpose()?;

    let sampling = Instant::now();
    let traces = run_chains(&data, &config, chains)?;
    let sampling_seconds = sampling.elapsed().as_secs_f64();
    let pooled = pool(&traces);
    let mut result = summarize(&pooled)?;
    if let Some(t) = &truth {
        result = result.with_truth(t)?;
    }

    let mut manifest = Manifest::new("fit", echo, started);
    manifest.input(&data_path);
    if let Some(p) = &truth_path {
        manifest.input(p);
    }
    let mut per_chain = Vec::new();
    for (c, t) in traces.iter().enumerate() {
        let path = if chains == 1 {
            dir.join("trace.csv")
        } else {
            dir.join(format!("trace_{}.csv", c + 1))
        };
        write_trace(&path, t)?;
        manifest.output(&path);
        manifest.seed(json!({ "chain": c + 1, "seed": config.seed, "stream": c }));
        per_chain.push(json!({
            "chain": c + 1,
            "map_m": summarize(t)?.map_m,
            "acceptance": acceptance(&t.counters),
        }));
    }

    let cocluster_path = dir.join("cocluster.csv");
    let mut w = writer(&cocluster_path)?;
    w.write_record(std::iter::once("variable".to_string()).chain(names.iter().cloned()))?;
    for (i, name) in names.iter().enumerate() {
        w.write_record(
            std::iter::once(name.clone())
                .chain((0..data.k()).map(|j| fmt_f64(result.coclustering.get(i, j)))),
        )?;
    }
    w.flush()?;
    manifest.output(&cocluster_path);

    let assignment_path = dir.join("assignment.csv");
    write_labels(&assignment_path, &names, &result.point_labels)?;
    manifest.output(&assignment_path);

    let summary = json!({
        "map_m": result.map_m,
        "m_frequencies": result.m_frequencies,
        "point_clusters": result.num_clusters(),
        "recovery": result.recovery,
        "acceptance": acceptance(&pooled.counters),
        "chains": per_chain,
        "k": data.k(),
        "n": data.n(),
        "kept_states": pooled.records.len(),
        "standardize": standardize,
        "runtime_seconds": sampling_seconds,
    });
    let summary_path = dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    manifest.output(&summary_path);
    manifest.write(&dir)
}
