use super::hierarchical::first_appearance_labels;
use super::BaselineSpec;
use crate::error::Result;
use crate::model::Dataset;
use crate::numerics::RngStream;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares of the returned partition.
    pub ss: f64,
    /// Within-cluster SS after every assignment step, one trace per restart.
    pub traces: Vec<Vec<f64>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_seeds(points: &[Vec<f64>], m: usize, stream: &mut RngStream) -> Vec<Vec<f64>> {
    let k = points.len();
    let mut chosen = vec![stream.uniform_index(k)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < m {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = stream.open01() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc >= target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| (0..k).rev().find(|&i| d2[i] > 0.0).expect("positive mass"))
        } else {
            // All remaining points coincide with a seed.
            let free: Vec<usize> = (0..k).filter(|i| !chosen.contains(i)).collect();
            free[stream.uniform_index(free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut ss = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (best, d) = centers
                .iter()
                .enumerate()
                .map(|(c, ctr)| (c, sq_dist(p, ctr)))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
            ss += d;
            best
        })
        .collect();
    (labels, ss)
}

fn lloyd(
    points: &[Vec<f64>],
    mut centers: Vec<Vec<f64>>,
    max_iter: usize,
) -> (Vec<usize>, f64, Vec<f64>) {
    let m = centers.len();
    let dim = points[0].len();
    let (mut labels, mut ss) = assign(points, &centers);
    let mut trace = vec![ss];
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; m];
        let mut counts = vec![0usize; m];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        let mut used = Vec::new();
        for c in 0..m {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..m {
            if counts[c] == 0 {
                // Re-seed at the point farthest from its own center.
                let far = (0..points.len())
                    .filter(|i| !used.contains(i))
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[labels[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("m <= k");
                used.push(far);
                centers[c] = points[far].clone();
            }
        }
        let (next, next_ss) = assign(points, &centers);
        let changed = next != labels;
        labels = next;
        ss = next_ss;
        trace.push(ss);
        if !changed {
            break;
        }
    }
    (labels, ss, trace)
}

/// Lloyd's algorithm on the variables (columns of the data, each an
/// `n`-vector) with k-means++ seeding; best of `spec.restarts` runs.
pub fn kmeans_variables(data: &Dataset, spec: &BaselineSpec) -> Result<KMeansFit> {
    spec.validate(data.k())?;
    let points = data.observations().columns();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut traces = Vec::with_capacity(spec.restarts);
    for r in 0..spec.restarts {
        let mut stream = RngStream::with_stream(spec.seed, r as u64);
        let centers = plus_plus_seeds(&points, spec.m, &mut stream);
        let (labels, ss, trace) = lloyd(&points, centers, spec.max_iter);
        traces.push(trace);
        if best.as_ref().is_none_or(|(_, b)| ss < *b) {
            best = Some((labels, ss));
        }
    }
    let (labels, ss) = best.expect("at least one restart");
    Ok(KMeansFit {
        labels: first_appearance_labels(&labels),
        ss,
        traces,
    })
}
