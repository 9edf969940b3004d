use super::chain::ChainTrace;
use crate::baselines::{agglomerate, Linkage};
use crate::error::{Error, Result};
use crate::numerics::SymmetricMatrix;

/// Co-clustering distance at which the point estimate is cut.
pub const COCLUSTER_CUT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Most visited cluster count.
    pub map_m: usize,
    /// Visit frequency of each `m` in `1..=k` (entry `m − 1`).
    pub m_frequencies: Vec<f64>,
    /// Pairwise same-cluster frequencies over kept states with `m = map_m`.
    pub coclustering: SymmetricMatrix,
    /// Point-estimate partition, labels `0..`.
    pub point_labels: Vec<usize>,
    pub recovery: Option<f64>,
}

impl ClusterResult {
    /// Recovery of the point estimate against known labels.
    pub fn with_truth(mut self, truth: &[usize]) -> Result<Self> {
        self.recovery = Some(crate::simgen::recovery(&self.point_labels, truth)?);
        Ok(self)
    }

    pub fn num_clusters(&self) -> usize {
        self.point_labels.iter().max().map_or(0, |v| v + 1)
    }
}

/// MAP cluster count (ties to the smaller `m`), co-clustering matrix over
/// the states at that count, and a point partition from complete linkage on
/// `1 − coclustering` cut below 0.5.
///
/// Point clusters are numbered by the mean rate rank of their members in the
/// contributing states, so cluster 0 sits lowest in the rate order.
pub fn summarize(trace: &ChainTrace) -> Result<ClusterResult> {
    if trace.records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let k = trace.k;
    let mut counts = vec![0usize; k];
    for m in trace.m_values() {
        counts[m - 1] += 1;
    }
    let best = *counts.iter().max().expect("k >= 1");
    let map_m = counts.iter().position(|&c| c == best).expect("max exists") + 1;
    let total = trace.records.len() as f64;
    let m_frequencies = counts.iter().map(|&c| c as f64 / total).collect();

    let mut together = vec![vec![0usize; k]; k];
    let mut rank_sum = vec![0usize; k];
    let mut used = 0usize;
    for r in trace.records.iter().filter(|r| r.state.m() == map_m) {
        used += 1;
        let labels = r.state.assignment.labels();
        for i in 0..k {
            rank_sum[i] += labels[i];
            for j in 0..i {
                if labels[i] == labels[j] {
                    together[i][j] += 1;
                }
            }
        }
    }
    let coclustering = SymmetricMatrix::from_fn(k, |i, j| {
        if i == j {
            1.0
        } else {
            let (a, b) = if i > j { (i, j) } else { (j, i) };
            together[a][b] as f64 / used as f64
        }
    });
    let distance = SymmetricMatrix::from_fn(k, |i, j| 1.0 - coclustering.get(i, j));
    let raw = agglomerate(&distance, Linkage::Complete).cut_height(COCLUSTER_CUT);

    // Order point clusters by the mean rank of their members, then by first
    // appearance.
    let groups = raw.iter().max().map_or(0, |v| v + 1);
    let mut key: Vec<(f64, usize, usize)> = (0..groups)
        .map(|g| {
            let members: Vec<usize> = (0..k).filter(|&i| raw[i] == g).collect();
            let mean =
                members.iter().map(|&i| rank_sum[i] as f64).sum::<f64>() / members.len() as f64;
            (mean, members[0], g)
        })
        .collect();
    key.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut relabel = vec![0; groups];
    for (new, &(_, _, g)) in key.iter().enumerate() {
        relabel[g] = new;
    }
    let point_labels = raw.iter().map(|&g| relabel[g]).collect();
    Ok(ClusterResult {
        map_m,
        m_frequencies,
        coclustering,
        point_labels,
        recovery: None,
    })
}
