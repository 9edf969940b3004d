use super::hierarchical::first_appearance_labels;
use super::BaselineSpec;
use crate::error::Result;
use crate::model::Dataset;
use crate::numerics::SymmetricMatrix;

#[derive(Debug, Clone)]
pub struct PamFit {
    pub labels: Vec<usize>,
    pub medoids: Vec<usize>,
    pub objective: f64,
    /// Objective after BUILD and after every accepted swap.
    pub trace: Vec<f64>,
}

/// Manhattan distance between the columns of the data.
pub fn manhattan_distance(data: &Dataset) -> SymmetricMatrix {
    let cols = data.observations().columns();
    SymmetricMatrix::from_fn(cols.len(), |i, j| {
        cols[i]
            .iter()
            .zip(&cols[j])
            .map(|(a, b)| (a - b).abs())
            .sum()
    })
}

fn objective(d: &SymmetricMatrix, medoids: &[usize]) -> f64 {
    (0..d.dim())
        .map(|i| {
            medoids
                .iter()
                .map(|&c| d.get(i, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// BUILD then SWAP (steepest descent over all medoid/non-medoid exchanges)
/// on a dissimilarity matrix.
pub fn pam(d: &SymmetricMatrix, m: usize, max_swaps: usize) -> PamFit {
    let k = d.dim();
    let mut medoids: Vec<usize> = Vec::with_capacity(m);
    let mut nearest = vec![f64::INFINITY; k];
    for _ in 0..m {
        let (best, _) = (0..k)
            .filter(|c| !medoids.contains(c))
            .map(|c| {
                let total: f64 = (0..k).map(|i| nearest[i].min(d.get(i, c))).sum();
                (c, total)
            })
            .fold((usize::MAX, f64::INFINITY), |acc, x| {
                if x.1 < acc.1 {
                    x
                } else {
                    acc
                }
            });
        medoids.push(best);
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d.get(i, best));
        }
    }
    let mut obj = objective(d, &medoids);
    let mut trace = vec![obj];
    for _ in 0..max_swaps {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..m {
            for h in 0..k {
                if medoids.contains(&h) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = h;
                let v = objective(d, &trial);
                if best.is_none_or(|b| v < b.2) {
                    best = Some((slot, h, v));
                }
            }
        }
        match best {
            Some((slot, h, v)) if v < obj - 1e-12 * obj.abs().max(1.0) => {
                medoids[slot] = h;
                obj = v;
                trace.push(obj);
            }
            _ => break,
        }
    }
    let labels: Vec<usize> = (0..k)
        .map(|i| {
            (0..m)
                .map(|s| (s, d.get(i, medoids[s])))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                )
                .0
        })
        .collect();
    PamFit {
        labels: first_appearance_labels(&labels),
        medoids,
        objective: obj,
        trace,
    }
}

/// Partitioning around medoids of the variables under Manhattan distance.
pub fn pam_variables(data: &Dataset, spec: &BaselineSpec) -> Result<PamFit> {
    spec.validate(data.k())?;
    Ok(pam(&manhattan_distance(data), spec.m, spec.max_iter))
}
