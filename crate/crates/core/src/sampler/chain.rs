use super::kernels::{Kernels, MoveStats};
use crate::angles::pivotal_support_bound;
use crate::error::{Error, Result};
use crate::model::{Assignment, Dataset, Hyperparams, ModelState, Target};
use crate::numerics::{sample_dirichlet, RngStream};

/// Probabilities of the move chosen at the start of each iteration: a birth,
/// a death, or neither (within-model updates only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveMix {
    pub birth: f64,
    pub death: f64,
    pub within: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self {
            birth: 0.25,
            death: 0.25,
            within: 0.5,
        }
    }
}

impl MoveMix {
    /// No trans-dimensional moves; `m` stays at its initial value.
    pub fn fixed_m() -> Self {
        Self {
            birth: 0.0,
            death: 0.0,
            within: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.birth, self.death, self.within];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::Config(format!(
                "move probabilities {parts:?} must be in [0, 1] and sum to 1"
            )));
        }
        if (self.birth > 0.0) != (self.death > 0.0) {
            return Err(Error::Config(
                "birth and death must both be enabled or both disabled".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// ChaCha stream id, so parallel chains can share one seed.
    pub stream: u64,
    pub moves: MoveMix,
    /// Cross-check every acceptance ratio against full recomputation.
    pub verify: bool,
    /// `false` samples the prior.
    pub use_likelihood: bool,
    /// Cluster count of the generated initial state.
    pub initial_m: usize,
    pub hyper: Hyperparams,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            burn_in: 1000,
            thin: 1,
            seed: 1,
            stream: 0,
            moves: MoveMix::default(),
            verify: false,
            use_likelihood: true,
            initial_m: 2,
            hyper: Hyperparams::default(),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if self.initial_m == 0 {
            return Err(Error::Config("initial m must be positive".into()));
        }
        self.moves.validate()?;
        self.hyper.validate()
    }
}

/// One kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub state: ModelState,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveCounters {
    pub birth: MoveStats,
    pub death: MoveStats,
    pub assignment: MoveStats,
    pub theta: MoveStats,
    pub lambda: MoveStats,
    pub order: MoveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
    pub counters: MoveCounters,
    pub k: usize,
}

impl ChainTrace {
    pub fn m_values(&self) -> impl Iterator<Item = usize> + '_ {
        self.records.iter().map(|r| r.state.m())
    }
}

/// Random balanced assignment into `min(m, k)` clusters, angles at three
/// quarters of their support, rates `0.5, 1.5, …`, `q ~ Dirichlet(α)`.
pub fn initial_state(k: usize, m: usize, h: &Hyperparams, stream: &mut RngStream) -> ModelState {
    let m = m.clamp(1, k);
    let mut order: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        order.swap(i, stream.uniform_index(i + 1));
    }
    let mut labels = vec![0; k];
    for (p, &i) in order.iter().enumerate() {
        labels[i] = p % m;
    }
    let assignment = Assignment::new(m, labels).expect("balanced labels cover every cluster");
    let theta = assignment
        .sizes()
        .into_iter()
        .map(|s| 0.75 * pivotal_support_bound(s))
        .collect();
    let lambda = (0..m).map(|u| 0.5 + u as f64).collect();
    let q = sample_dirichlet(stream, &h.alpha_vec(m));
    ModelState::new(assignment, theta, lambda, q).expect("valid initial state")
}

/// Runs one chain from a generated initial state.
pub fn run_chain(data: &Dataset, config: &ChainConfig) -> Result<ChainTrace> {
    config.validate()?;
    let mut stream = RngStream::with_stream(config.seed, config.stream);
    let init = initial_state(data.k(), config.initial_m, &config.hyper, &mut stream);
    run_chain_with(data, config, init, &mut stream)
}

/// Runs one chain from `init`, drawing from `stream`.
///
/// Each iteration: a birth or death (chosen by the move mix), then the
/// assignment sweep, the `q` draw, the angle updates, the rate updates and the order exchanges.
pub fn run_chain_with(
    data: &Dataset,
    config: &ChainConfig,
    init: ModelState,
    stream: &mut RngStream,
) -> Result<ChainTrace> {
    config.validate()?;
    init.validate()?;
    let target = Target::new(data, config.hyper.clone(), config.use_likelihood)?;
    let kernels = Kernels::new(
        target,
        config.moves.birth,
        config.moves.death,
        config.verify,
    );
    let mut state = init;
    let mut counters = MoveCounters::default();
    let kept = (config.iterations - config.burn_in).div_ceil(config.thin);
    let mut records = Vec::with_capacity(kept);
    for it in 0..config.iterations {
        let u = stream.open01();
        if u < config.moves.birth {
            counters.birth += kernels.birth_move(&mut state, stream)?;
        } else if u < config.moves.birth + config.moves.death {
            counters.death += kernels.death_move(&mut state, stream)?;
        }
        counters.assignment += kernels.update_assignment(&mut state, stream)?;
        kernels.update_q(&mut state, stream);
        counters.theta += kernels.update_theta(&mut state, stream)?;
        counters.lambda += kernels.update_lambda(&mut state, stream)?;
        counters.order += kernels.update_order(&mut state, stream)?;
        if config.verify || cfg!(debug_assertions) {
            state.validate()?;
        }
        if it >= config.burn_in && (it - config.burn_in).is_multiple_of(config.thin) {
            let log_posterior = kernels.target().log_posterior(&state)?;
            records.push(TraceRecord {
                iteration: it,
                state: state.clone(),
                log_posterior,
            });
        }
    }
    Ok(ChainTrace {
        records,
        counters,
        k: data.k(),
    })
}
