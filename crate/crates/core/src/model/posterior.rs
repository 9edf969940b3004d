use super::data::Dataset;
use super::likelihood::{block_log_likelihood, log_likelihood, BlockStats};
use super::prior::{
    log_dirichlet_multinomial, log_nonempty_probabilities, log_prior_assignment, log_prior_lambda,
    log_prior_m, log_prior_q, log_prior_theta,
};
use super::state::{Assignment, Hyperparams, ModelState};
use crate::angles::PivotalAngles;
use crate::error::{Error, Result};

/// The additive pieces of the unnormalized log-posterior.
///
/// `nonempty` is `−log P(no empty cluster | m)`, the renormalization of the
/// joint `(q, Z)` prior to surjective assignments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPosteriorTerms {
    pub likelihood: f64,
    pub m: f64,
    pub q: f64,
    pub assignment: f64,
    pub theta: f64,
    pub lambda: f64,
    pub nonempty: f64,
}

impl LogPosteriorTerms {
    pub fn total(&self) -> f64 {
        self.likelihood
            + self.m
            + self.q
            + self.assignment
            + self.theta
            + self.lambda
            + self.nonempty
    }
}

/// Posterior target over model states for a fixed dataset.
///
/// Switching `use_likelihood` off gives the prior as target. Prior tables
/// depending only on `(k, hyperparameters)` are computed once.
#[derive(Debug, Clone)]
pub struct Target<'a> {
    data: &'a Dataset,
    hyper: Hyperparams,
    use_likelihood: bool,
    log_prior_m: Vec<f64>,
    log_nonempty: Vec<f64>,
}

impl<'a> Target<'a> {
    pub fn new(data: &'a Dataset, hyper: Hyperparams, use_likelihood: bool) -> Result<Self> {
        hyper.validate()?;
        let k = data.k();
        let log_prior_m = (1..=k)
            .map(|m| log_prior_m(m, k, hyper.poisson_rate))
            .collect::<Result<_>>()?;
        let log_nonempty = log_nonempty_probabilities(k, hyper.alpha);
        Ok(Self {
            data,
            hyper,
            use_likelihood,
            log_prior_m,
            log_nonempty,
        })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn use_likelihood(&self) -> bool {
        self.use_likelihood
    }

    pub fn log_likelihood(&self, a: &Assignment, theta: &PivotalAngles) -> Result<f64> {
        if self.use_likelihood {
            log_likelihood(self.data, a, theta)
        } else {
            theta.check_support(&a.sizes())?;
            Ok(0.0)
        }
    }

    /// Likelihood contribution of one cluster with the given members.
    pub fn block_log_likelihood(&self, members: &[usize], theta: f64) -> Result<f64> {
        if !self.use_likelihood {
            return Ok(0.0);
        }
        let stats = BlockStats::of(self.data.cross_product(), members);
        block_log_likelihood(self.data.n(), &stats, theta)
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.data.k() {
            return Err(Error::OutOfSupport(format!(
                "m = {m} outside 1..={}",
                self.data.k()
            )));
        }
        Ok(())
    }

    pub fn terms(&self, state: &ModelState) -> Result<LogPosteriorTerms> {
        let a = &state.assignment;
        if a.k() != self.data.k() {
            return Err(Error::DimensionMismatch {
                expected: self.data.k(),
                got: a.k(),
            });
        }
        let m = a.m();
        self.check_m(m)?;
        Ok(LogPosteriorTerms {
            likelihood: self.log_likelihood(a, &state.theta)?,
            m: self.log_prior_m[m - 1],
            q: log_prior_q(&state.q, &self.hyper.alpha_vec(m))?,
            assignment: log_prior_assignment(a, &state.q)?,
            theta: log_prior_theta(&state.theta, &state.lambda, a)?,
            lambda: log_prior_lambda(&state.lambda)?,
            nonempty: -self.log_nonempty[m - 1],
        })
    }

    pub fn log_posterior(&self, state: &ModelState) -> Result<f64> {
        self.terms(state).map(|t| t.total())
    }

    /// Log-posterior with `q` integrated out.
    pub fn log_marginal(
        &self,
        a: &Assignment,
        theta: &PivotalAngles,
        lambda: &[f64],
    ) -> Result<f64> {
        if a.k() != self.data.k() {
            return Err(Error::DimensionMismatch {
                expected: self.data.k(),
                got: a.k(),
            });
        }
        let m = a.m();
        self.check_m(m)?;
        Ok(self.log_likelihood(a, theta)?
            + self.log_prior_m[m - 1]
            + log_dirichlet_multinomial(&a.sizes(), self.hyper.alpha)
            - self.log_nonempty[m - 1]
            + log_prior_theta(theta, lambda, a)?
            + log_prior_lambda(lambda)?)
    }
}

/// Unnormalized log-posterior of `state`.
pub fn log_posterior(data: &Dataset, state: &ModelState, h: &Hyperparams) -> Result<f64> {
    Target::new(data, h.clone(), true)?.log_posterior(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::dirichlet_log_pdf;
    use crate::numerics::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(seed: u64, n: usize, k: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n * k).map(|_| rng.random_range(-1.5..1.5)).collect();
        Dataset::new(DenseMatrix::from_vec(n, k, v).unwrap(), None).unwrap()
    }

    fn state() -> ModelState {
        let a = Assignment::new(2, vec![0, 1, 0, 0, 1]).unwrap();
        ModelState::new(a, vec![0.8, 1.1], vec![0.4, 1.3], vec![0.35, 0.65]).unwrap()
    }

    #[test]
    fn total_is_sum_of_parts() {
        let d = dataset(1, 20, 5);
        let h = Hyperparams::default();
        let t = Target::new(&d, h.clone(), true).unwrap();
        let s = state();
        let terms = t.terms(&s).unwrap();
        let a = &s.assignment;
        let expected = log_likelihood(&d, a, &s.theta).unwrap()
            + log_prior_m(2, 5, 1.0).unwrap()
            + log_prior_q(&s.q, &[1.0, 1.0]).unwrap()
            + log_prior_assignment(a, &s.q).unwrap()
            + log_prior_theta(&s.theta, &s.lambda, a).unwrap()
            + log_prior_lambda(&s.lambda).unwrap()
            - log_nonempty_probabilities(5, 1.0)[1];
        assert!((terms.total() - expected).abs() < 1e-12);
        assert!((log_posterior(&d, &s, &h).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_reduces() {
        let d = dataset(2, 15, 4);
        let t = Target::new(&d, Hyperparams::default(), true).unwrap();
        let s = ModelState::new(Assignment::single(4), vec![1.0], vec![0.7], vec![1.0]).unwrap();
        let terms = t.terms(&s).unwrap();
        assert_eq!(terms.q, 0.0);
        assert_eq!(terms.assignment, 0.0);
        assert!(terms.nonempty.abs() < 1e-12);
    }

    #[test]
    fn better_fit_raises_posterior() {
        let d = dataset(3, 30, 5);
        let t = Target::new(&d, Hyperparams::default(), true).unwrap();
        let s = state();
        let mut s2 = s.clone();
        s2.theta.theta[0] = 1.0;
        let (p1, p2) = (t.terms(&s).unwrap(), t.terms(&s2).unwrap());
        let d_prior = (p2.theta - p1.theta) + (p2.lambda - p1.lambda);
        let d_lik = p2.likelihood - p1.likelihood;
        let d_post = t.log_posterior(&s2).unwrap() - t.log_posterior(&s).unwrap();
        assert!((d_post - (d_lik + d_prior)).abs() < 1e-10);
    }

    #[test]
    fn marginal_is_posterior_minus_q_conditional() {
        let d = dataset(4, 25, 5);
        let t = Target::new(
            &d,
            Hyperparams {
                alpha: 0.7,
                ..Default::default()
            },
            true,
        )
        .unwrap();
        let s = state();
        let counts = s.assignment.sizes();
        let post_alpha: Vec<f64> = counts.iter().map(|&c| 0.7 + c as f64).collect();
        let cond = dirichlet_log_pdf(&s.q, &post_alpha).unwrap();
        let lhs = t.log_posterior(&s).unwrap()
            - t.log_marginal(&s.assignment, &s.theta, &s.lambda).unwrap();
        assert!((lhs - cond).abs() < 1e-10);
    }

    #[test]
    fn prior_target_ignores_data() {
        let d1 = dataset(5, 25, 5);
        let d2 = dataset(6, 25, 5);
        let h = Hyperparams::default();
        let s = state();
        let a = Target::new(&d1, h.clone(), false)
            .unwrap()
            .log_posterior(&s)
            .unwrap();
        let b = Target::new(&d2, h, false)
            .unwrap()
            .log_posterior(&s)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_support_propagates() {
        let d = dataset(7, 10, 5);
        let t = Target::new(&d, Hyperparams::default(), true).unwrap();
        let mut s = state();
        s.theta.theta[0] = 1.5;
        assert!(t.log_posterior(&s).is_err());
        let mut s = state();
        s.lambda = vec![1.3, 0.4];
        assert!(t.log_posterior(&s).is_err());
    }
}
