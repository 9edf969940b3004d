use crate::angles::{pivotal_support_bound, PivotalAngles};
use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_4;

/// Variable-to-cluster map: `labels[i] ∈ 0..m`, every cluster nonempty.
///
/// Labels are 0-based here; files written by the CLI use 1-based ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    m: usize,
    labels: Vec<usize>,
}

impl Assignment {
    pub fn new(m: usize, labels: Vec<usize>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidState("cluster count must be positive".into()));
        }
        let mut seen = vec![false; m];
        for (i, &l) in labels.iter().enumerate() {
            if l >= m {
                return Err(Error::InvalidState(format!(
                    "variable {i} has label {l}, but m = {m}"
                )));
            }
            seen[l] = true;
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidState(format!("cluster {u} is empty")));
        }
        Ok(Self { m, labels })
    }

    /// Everything in one cluster.
    pub fn single(k: usize) -> Self {
        Self {
            m: 1,
            labels: vec![0; k],
        }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.m];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, u: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == u)
            .collect()
    }

    /// Stable permutation that lists variables cluster by cluster:
    /// `order[p]` is the variable at contiguous position `p`.
    pub fn contiguous_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by_key(|&i| self.labels[i]);
        order
    }

    /// Dense `k × m` indicator matrix `Z`.
    pub fn indicator(&self) -> Vec<Vec<u8>> {
        self.labels
            .iter()
            .map(|&l| (0..self.m).map(|u| u8::from(u == l)).collect())
            .collect()
    }

    /// Moves variable `i` to cluster `to`; the caller guarantees no cluster
    /// is left empty.
    pub(crate) fn move_variable(&mut self, i: usize, to: usize) {
        debug_assert!(to < self.m);
        self.labels[i] = to;
        debug_assert!(self.sizes().iter().all(|&s| s > 0));
    }

    /// Same partition with a relabeling `new = map[old]`.
    pub fn relabeled(&self, map: &[usize]) -> Result<Self> {
        Self::new(self.m, self.labels.iter().map(|&l| map[l]).collect())
    }
}

/// One point of the trans-dimensional parameter space. Clusters are indexed
/// in ascending order of `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub assignment: Assignment,
    pub theta: PivotalAngles,
    pub lambda: Vec<f64>,
    pub q: Vec<f64>,
}

impl ModelState {
    pub fn new(
        assignment: Assignment,
        theta: Vec<f64>,
        lambda: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<Self> {
        let state = Self {
            assignment,
            theta: PivotalAngles::new(theta),
            lambda,
            q,
        };
        state.validate()?;
        Ok(state)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.assignment.m()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.assignment.k()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        for (name, len) in [
            ("theta", self.theta.theta.len()),
            ("lambda", self.lambda.len()),
            ("q", self.q.len()),
        ] {
            if len != m {
                return Err(Error::InvalidState(format!(
                    "{name} has length {len}, m = {m}"
                )));
            }
        }
        if !(self.lambda[0] > 0.0) || self.lambda.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidState(format!(
                "lambda must be positive and strictly increasing: {:?}",
                self.lambda
            )));
        }
        self.theta
            .check_support(&self.assignment.sizes())
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        let total: f64 = self.q.iter().sum();
        if self.q.iter().any(|&v| !(v > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "q must be a positive probability vector: {:?}",
                self.q
            )));
        }
        Ok(())
    }

    /// Support bound of every cluster's pivotal angle.
    pub fn theta_bounds(&self) -> Vec<f64> {
        self.assignment
            .sizes()
            .into_iter()
            .map(pivotal_support_bound)
            .collect()
    }
}

/// Hyperparameters and fixed proposal scales.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Rate of the truncated Poisson prior on the cluster count.
    pub poisson_rate: f64,
    /// Symmetric Dirichlet concentration for the mixture weights.
    pub alpha: f64,
    /// Half-width of the uniform split variable in birth moves.
    pub tau_half_width: f64,
    /// Random-walk step for pivotal angles.
    pub theta_step: f64,
    /// Random-walk step for the rate vector.
    pub lambda_step: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            poisson_rate: 1.0,
            alpha: 1.0,
            tau_half_width: FRAC_PI_4,
            theta_step: 0.1,
            lambda_step: 0.3,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("poisson_rate", self.poisson_rate),
            ("alpha", self.alpha),
            ("tau_half_width", self.tau_half_width),
            ("theta_step", self.theta_step),
            ("lambda_step", self.lambda_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn alpha_vec(&self, m: usize) -> Vec<f64> {
        vec![self.alpha; m]
    }
}
