use super::BaselineSpec;
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::numerics::SymmetricMatrix;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Ward,
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Ward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown linkage '{s}'")))
    }
}

/// One agglomeration step. Leaves are `0..k`; the cluster formed at step `t`
/// gets id `k + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    fn labels_after(&self, steps: usize) -> Vec<usize> {
        let k = self.leaves;
        // Union-find over leaf and internal ids.
        let mut parent: Vec<usize> = (0..k + steps).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (t, mg) in self.merges[..steps].iter().enumerate() {
            let id = k + t;
            let (a, b) = (find(&mut parent, mg.left), find(&mut parent, mg.right));
            parent[a] = id;
            parent[b] = id;
        }
        let roots: Vec<usize> = (0..k).map(|i| find(&mut parent, i)).collect();
        first_appearance_labels(&roots)
    }

    /// Partition into exactly `m` clusters (`1 ≤ m ≤ k`), labeled by first
    /// appearance.
    pub fn cut_clusters(&self, m: usize) -> Result<Vec<usize>> {
        if m == 0 || m > self.leaves {
            return Err(Error::Config(format!(
                "cannot cut {} leaves into {m} clusters",
                self.leaves
            )));
        }
        Ok(self.labels_after(self.leaves - m))
    }

    /// Partition formed by the merges with height strictly below `height`,
    /// for monotone dendrograms.
    pub fn cut_height(&self, height: f64) -> Vec<usize> {
        let steps = self
            .merges
            .iter()
            .take_while(|mg| mg.height < height)
            .count();
        self.labels_after(steps)
    }
}

/// Relabels arbitrary ids to `0..` in order of first appearance.
pub(crate) fn first_appearance_labels(ids: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    ids.iter()
        .map(|id| {
            let next = map.len();
            *map.entry(*id).or_insert(next)
        })
        .collect()
}

/// Agglomerative clustering of a precomputed dissimilarity matrix with
/// Lance–Williams updates. Ward works on squared dissimilarities and reports
/// the square root of the merge criterion, so its heights are on the scale of
/// the input. Ties merge the lexicographically smallest pair of active
/// cluster slots.
pub fn agglomerate(dist: &SymmetricMatrix, linkage: Linkage) -> Dendrogram {
    let k = dist.dim();
    let ward = linkage == Linkage::Ward;
    let mut d: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if ward {
                        dist.get(i, j).powi(2)
                    } else {
                        dist.get(i, j)
                    }
                })
                .collect()
        })
        .collect();
    let mut active = vec![true; k];
    let mut size = vec![1usize; k];
    let mut id: Vec<usize> = (0..k).collect();
    let mut merges = Vec::with_capacity(k.saturating_sub(1));
    for step in 0..k.saturating_sub(1) {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..k {
            if !active[i] {
                continue;
            }
            for j in i + 1..k {
                if active[j] && d[i][j] < best.2 {
                    best = (i, j, d[i][j]);
                }
            }
        }
        let (i, j, dij) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for h in 0..k {
            if !active[h] || h == i || h == j {
                continue;
            }
            let (dih, djh) = (d[i][h], d[j][h]);
            let nh = size[h] as f64;
            let v = match linkage {
                Linkage::Single => dih.min(djh),
                Linkage::Complete => dih.max(djh),
                Linkage::Average => (ni * dih + nj * djh) / (ni + nj),
                Linkage::Ward => ((ni + nh) * dih + (nj + nh) * djh - nh * dij) / (ni + nj + nh),
            };
            d[i][h] = v;
            d[h][i] = v;
        }
        let (lo, hi) = if id[i] < id[j] {
            (id[i], id[j])
        } else {
            (id[j], id[i])
        };
        size[i] += size[j];
        active[j] = false;
        merges.push(Merge {
            left: lo,
            right: hi,
            height: if ward { dij.max(0.0).sqrt() } else { dij },
            size: size[i],
        });
        id[i] = k + step;
    }
    Dendrogram { leaves: k, merges }
}

/// `1 − |corr(i, j)|` between the columns of the data.
pub fn correlation_distance(data: &Dataset) -> SymmetricMatrix {
    let c = data.observations().column_correlation();
    SymmetricMatrix::from_fn(c.dim(), |i, j| {
        if i == j {
            0.0
        } else {
            (1.0 - c.get(i, j).abs()).max(0.0)
        }
    })
}

#[derive(Debug, Clone)]
pub struct HierarchicalFit {
    pub dendrogram: Dendrogram,
    pub labels: Vec<usize>,
}

/// Agglomerative clustering of the variables on correlation distance, cut at
/// `spec.m` clusters.
pub fn hierarchical_variables(data: &Dataset, spec: &BaselineSpec) -> Result<HierarchicalFit> {
    spec.validate(data.k())?;
    let dendrogram = agglomerate(&correlation_distance(data), spec.linkage);
    let labels = dendrogram.cut_clusters(spec.m)?;
    Ok(HierarchicalFit { dendrogram, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dist(rng: &mut ChaCha8Rng, k: usize) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(k, |i, j| {
            if i == j {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
    }

    /// Prim's algorithm; returns the sorted edge weights of a minimum
    /// spanning tree.
    fn mst_weights(d: &SymmetricMatrix) -> Vec<f64> {
        let k = d.dim();
        let mut in_tree = vec![false; k];
        let mut best = vec![f64::INFINITY; k];
        best[0] = 0.0;
        let mut out = Vec::new();
        for _ in 0..k {
            let v = (0..k)
                .filter(|&v| !in_tree[v])
                .min_by(|&a, &b| best[a].total_cmp(&best[b]))
                .unwrap();
            in_tree[v] = true;
            if out.len() < k - 1 && v != 0 {
                out.push(best[v]);
            }
            for w in 0..k {
                if !in_tree[w] && d.get(v, w) < best[w] {
                    best[w] = d.get(v, w);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn two_leaves_single_merge() {
        let d = SymmetricMatrix::from_rows(&[vec![0.0, 0.3], vec![0.3, 0.0]]).unwrap();
        for l in Linkage::ALL {
            let dg = agglomerate(&d, l);
            assert_eq!(dg.merges().len(), 1);
            assert_eq!(dg.merges()[0].height, 0.3);
            assert_eq!((dg.merges()[0].left, dg.merges()[0].right), (0, 1));
        }
    }

    #[test]
    fn single_linkage_matches_mst() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = random_dist(&mut rng, 6);
            let heights: Vec<f64> = agglomerate(&d, Linkage::Single)
                .merges()
                .iter()
                .map(|m| m.height)
                .collect();
            assert_eq!(heights, mst_weights(&d));
        }
    }

    #[test]
    fn monotone_heights_and_cut_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let k = rng.random_range(2..12);
            let d = random_dist(&mut rng, k);
            for l in Linkage::ALL {
                let dg = agglomerate(&d, l);
                assert_eq!(dg.merges().len(), k - 1);
                assert_eq!(dg.merges().last().unwrap().size, k);
                if l != Linkage::Ward {
                    assert!(
                        dg.merges().windows(2).all(|w| w[0].height <= w[1].height),
                        "{l}"
                    );
                }
                for m in 1..=k {
                    let labels = dg.cut_clusters(m).unwrap();
                    let distinct: std::collections::HashSet<_> = labels.iter().collect();
                    assert_eq!(distinct.len(), m);
                    assert_eq!(*labels.iter().max().unwrap(), m - 1);
                }
            }
        }
    }

    #[test]
    fn ward_matches_reference_heights() {
        // Three points on a line at 0, 1, 3: Ward merges {0,1} at 1, then
        // at sqrt(2·(2·1)/3 · (3 − 0.5)²) = sqrt(25/3).
        let pts = [0.0f64, 1.0, 3.0];
        let d = SymmetricMatrix::from_fn(3, |i, j| (pts[i] - pts[j]).abs());
        let dg = agglomerate(&d, Linkage::Ward);
        assert!((dg.merges()[0].height - 1.0).abs() < 1e-12);
        assert!((dg.merges()[1].height - (25.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn average_linkage_by_hand() {
        let d = SymmetricMatrix::from_rows(&[
            vec![0.0, 0.1, 0.5, 0.9],
            vec![0.1, 0.0, 0.7, 0.8],
            vec![0.5, 0.7, 0.0, 0.2],
            vec![0.9, 0.8, 0.2, 0.0],
        ])
        .unwrap();
        let dg = agglomerate(&d, Linkage::Average);
        let h: Vec<f64> = dg.merges().iter().map(|m| m.height).collect();
        assert!((h[0] - 0.1).abs() < 1e-15);
        assert!((h[1] - 0.2).abs() < 1e-15);
        assert!((h[2] - (0.5 + 0.9 + 0.7 + 0.8) / 4.0).abs() < 1e-15);
        assert_eq!((dg.merges()[2].left, dg.merges()[2].right), (4, 5));
        assert_eq!(dg.cut_height(0.15), vec![0, 0, 1, 2]);
    }

    #[test]
    fn linkage_names_round_trip() {
        for l in Linkage::ALL {
            assert_eq!(l.name().parse::<Linkage>().unwrap(), l);
        }
        assert!("median".parse::<Linkage>().is_err());
    }
}
