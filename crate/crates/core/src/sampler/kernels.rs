use crate::angles::pivotal_support_bound;
use crate::error::{Error, Result};
use crate::model::{Assignment, ModelState, Target};
use crate::numerics::special::{
    log_add_exp, log_sum_exp, truncated_exponential_log_pdf, truncated_normal_log_pdf,
};
use crate::numerics::{
    sample_dirichlet, sample_truncated_normal_interval, sample_truncated_wrapped_exponential,
    RngStream, SymmetricMatrix,
};
use std::f64::consts::LN_2;

/// Spread of the data-centered component of the angle proposal used when a
/// cluster is created or merged.
pub const THETA_PROPOSAL_SD: f64 = 0.1;

/// Weight of the correlation contrast in the birth allocation.
pub const SPLIT_SHARPNESS: f64 = 10.0;

/// Proposal and acceptance counts of one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    fn one(accepted: bool) -> Self {
        Self {
            proposed: 1,
            accepted: u64::from(accepted),
        }
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

impl std::ops::AddAssign for MoveStats {
    fn add_assign(&mut self, rhs: Self) {
        self.proposed += rhs.proposed;
        self.accepted += rhs.accepted;
    }
}

/// Proposal density for the pivotal angle of a newly formed cluster: an
/// equal mixture of its conditional prior and a normal centered at the
/// angle of the members' mean sample correlation, both truncated to the
/// support. Single-variable clusters (and prior-only targets) use the
/// conditional prior alone.
#[derive(Debug, Clone, Copy)]
pub struct AngleProposal {
    lambda: f64,
    bound: f64,
    center: Option<f64>,
}

impl AngleProposal {
    pub fn new(target: &Target, members: &[usize], lambda: f64) -> Self {
        let bound = pivotal_support_bound(members.len());
        let center = (target.use_likelihood() && members.len() >= 2).then(|| {
            let corr = target.data().correlation();
            let mut sum = 0.0;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[..a] {
                    sum += corr.get(i, j);
                }
            }
            let pairs = (members.len() * (members.len() - 1) / 2) as f64;
            (sum / pairs).clamp(-1.0, 1.0).acos().clamp(0.0, bound)
        });
        Self {
            lambda,
            bound,
            center,
        }
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        match self.center {
            Some(c) if stream.coin() => {
                sample_truncated_normal_interval(stream, c, THETA_PROPOSAL_SD, 0.0, self.bound)
            }
            _ => sample_truncated_wrapped_exponential(stream, self.lambda, self.bound),
        }
    }

    pub fn log_pdf(&self, theta: f64) -> f64 {
        let prior = truncated_exponential_log_pdf(theta, self.lambda, self.bound)
            .unwrap_or(f64::NEG_INFINITY);
        match self.center {
            None => prior,
            Some(c) => {
                let normal = truncated_normal_log_pdf(theta, c, THETA_PROPOSAL_SD, 0.0, self.bound)
                    .unwrap_or(f64::NEG_INFINITY);
                log_add_exp(prior, normal) - LN_2
            }
        }
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Allocation of a cluster's members to the two children of a birth.
///
/// An ordered pair of distinct members `(a, b)` is drawn uniformly; `a`
/// joins the lower child and `b` the upper, and every other member `i`
/// follows `a` with probability `σ(κ (r_ia − r_ib))`, `r` the sample
/// correlations and `κ` [`SPLIT_SHARPNESS`].
#[derive(Debug, Clone, Copy)]
pub struct SplitAllocation<'c> {
    corr: &'c SymmetricMatrix,
}

impl<'c> SplitAllocation<'c> {
    pub fn new(corr: &'c SymmetricMatrix) -> Self {
        Self { corr }
    }

    fn log_follow(&self, i: usize, a: usize, b: usize) -> f64 {
        log_sigmoid(SPLIT_SHARPNESS * (self.corr.get(i, a) - self.corr.get(i, b)))
    }

    /// Draws `to_high` flags for `members`; `None` for fewer than two.
    pub fn sample(&self, members: &[usize], stream: &mut RngStream) -> Option<Vec<bool>> {
        let n = members.len();
        if n < 2 {
            return None;
        }
        let pa = stream.uniform_index(n);
        let mut pb = stream.uniform_index(n - 1);
        if pb >= pa {
            pb += 1;
        }
        let (a, b) = (members[pa], members[pb]);
        Some(
            members
                .iter()
                .enumerate()
                .map(|(p, &i)| {
                    if p == pa {
                        false
                    } else if p == pb {
                        true
                    } else {
                        stream.open01().ln() >= self.log_follow(i, a, b)
                    }
                })
                .collect(),
        )
    }

    /// Log probability that [`Self::sample`] on `lo ∪ hi` yields exactly
    /// this split, summed over the anchor pairs that can produce it.
    pub fn log_prob(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let n = (lo.len() + hi.len()) as f64;
        if lo.is_empty() || hi.is_empty() {
            return f64::NEG_INFINITY;
        }
        let mut terms = Vec::with_capacity(lo.len() * hi.len());
        for &a in lo {
            for &b in hi {
                let with_a: f64 = lo
                    .iter()
                    .filter(|&&i| i != a)
                    .map(|&i| self.log_follow(i, a, b))
                    .sum();
                let with_b: f64 = hi
                    .iter()
                    .filter(|&&i| i != b)
                    .map(|&i| self.log_follow(i, b, a))
                    .sum();
                terms.push(with_a + with_b);
            }
        }
        log_sum_exp(&terms) - (n * (n - 1.0)).ln()
    }
}

/// Splits cluster `j` into two adjacent clusters with rates `λ_j − |τ|` and
/// `λ_j + |τ|`. `to_high[p]` sends the `p`-th member of `j` (in variable
/// order) to the upper child. `q` is set uniform; the sampler redraws it.
///
/// `None` when a child is empty, the children leave the interval between
/// the neighboring rates, or an angle is outside its child's support.
pub fn split_state(
    state: &ModelState,
    j: usize,
    tau: f64,
    to_high: &[bool],
    theta_lo: f64,
    theta_hi: f64,
) -> Option<ModelState> {
    let m = state.m();
    let members = state.assignment.members(j);
    assert_eq!(members.len(), to_high.len());
    let n_hi = to_high.iter().filter(|&&h| h).count();
    if n_hi == 0 || n_hi == members.len() {
        return None;
    }
    let t = tau.abs();
    let (lo, hi) = (state.lambda[j] - t, state.lambda[j] + t);
    let floor = if j == 0 { 0.0 } else { state.lambda[j - 1] };
    let ceil = state.lambda.get(j + 1).copied().unwrap_or(f64::INFINITY);
    if !(lo > floor && lo < hi && hi < ceil) {
        return None;
    }
    if !(theta_lo > 0.0 && theta_lo < pivotal_support_bound(members.len() - n_hi))
        || !(theta_hi > 0.0 && theta_hi < pivotal_support_bound(n_hi))
    {
        return None;
    }
    let mut labels: Vec<usize> = state
        .assignment
        .labels()
        .iter()
        .map(|&l| if l > j { l + 1 } else { l })
        .collect();
    for (&i, &h) in members.iter().zip(to_high) {
        if h {
            labels[i] = j + 1;
        }
    }
    let mut theta = state.theta.theta.clone();
    theta[j] = theta_lo;
    theta.insert(j + 1, theta_hi);
    let mut lambda = state.lambda.clone();
    lambda[j] = lo;
    lambda.insert(j + 1, hi);
    Some(ModelState {
        assignment: Assignment::new(m + 1, labels).ok()?,
        theta: crate::angles::PivotalAngles::new(theta),
        lambda,
        q: vec![1.0 / (m + 1) as f64; m + 1],
    })
}

/// Merges clusters `j` and `j + 1` into one with rate equal to their mean and
/// pivotal angle `theta`; `q` is set uniform.
pub fn merge_state(state: &ModelState, j: usize, theta: f64) -> Option<ModelState> {
    let m = state.m();
    if j + 1 >= m {
        return None;
    }
    let merged_size = state.assignment.sizes()[j] + state.assignment.sizes()[j + 1];
    if !(theta > 0.0 && theta < pivotal_support_bound(merged_size)) {
        return None;
    }
    let labels = state
        .assignment
        .labels()
        .iter()
        .map(|&l| if l > j { l - 1 } else { l })
        .collect();
    let mut th = state.theta.theta.clone();
    th[j] = theta;
    th.remove(j + 1);
    let mut lambda = state.lambda.clone();
    lambda[j] = 0.5 * (state.lambda[j] + state.lambda[j + 1]);
    lambda.remove(j + 1);
    Some(ModelState {
        assignment: Assignment::new(m - 1, labels).ok()?,
        theta: crate::angles::PivotalAngles::new(th),
        lambda,
        q: vec![1.0 / (m - 1) as f64; m - 1],
    })
}

fn reflect(mut x: f64, hi: f64) -> f64 {
    // Fold into [0, hi]; steps are small relative to the width.
    loop {
        if x < 0.0 {
            x = -x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
}

fn accept(stream: &mut RngStream, log_ratio: f64) -> bool {
    log_ratio >= 0.0 || stream.open01().ln() < log_ratio
}

/// The birth, death and within-model kernels for one posterior target.
///
/// With `verify` set, every proposal's log acceptance ratio is checked
/// against a from-scratch evaluation of the target (and the closed-form
/// likelihood against the Cholesky route); a mismatch aborts with
/// `InvalidState`.
#[derive(Debug, Clone)]
pub struct Kernels<'a> {
    target: Target<'a>,
    birth_prob: f64,
    death_prob: f64,
    verify: bool,
}

impl<'a> Kernels<'a> {
    pub fn new(target: Target<'a>, birth_prob: f64, death_prob: f64, verify: bool) -> Self {
        Self {
            target,
            birth_prob,
            death_prob,
            verify,
        }
    }

    pub fn target(&self) -> &Target<'a> {
        &self.target
    }

    fn check_close(&self, what: &str, incremental: f64, full: f64) -> Result<()> {
        let tol = 1e-8_f64.max(1e-13 * full.abs());
        if (incremental - full).abs() > tol {
            return Err(Error::InvalidState(format!(
                "{what}: incremental {incremental} differs from full recomputation {full}"
            )));
        }
        Ok(())
    }

    fn verify_delta(
        &self,
        what: &str,
        before: &ModelState,
        after: &ModelState,
        delta: f64,
    ) -> Result<()> {
        if !self.verify {
            return Ok(());
        }
        let full = self.target.log_posterior(after)? - self.target.log_posterior(before)?;
        self.check_close(what, delta, full)?;
        self.verify_dense(after)
    }

    fn verify_dense(&self, state: &ModelState) -> Result<()> {
        if !self.target.use_likelihood() {
            return Ok(());
        }
        let data = self.target.data();
        let fast = crate::model::log_likelihood(data, &state.assignment, &state.theta)?;
        if let Ok(dense) = crate::model::log_likelihood_dense(data, &state.assignment, &state.theta)
        {
            let tol = 1e-8 * fast.abs().max(1.0);
            if (fast - dense).abs() > tol {
                return Err(Error::InvalidState(format!(
                    "closed-form likelihood {fast} differs from Cholesky route {dense}"
                )));
            }
        }
        Ok(())
    }

    fn verify_marginal(&self, state: &ModelState) -> Result<()> {
        if !self.verify {
            return Ok(());
        }
        let alpha: Vec<f64> = state
            .assignment
            .sizes()
            .iter()
            .map(|&c| self.target.hyper().alpha + c as f64)
            .collect();
        let cond = if state.m() == 1 {
            0.0
        } else {
            crate::numerics::special::dirichlet_log_pdf(&state.q, &alpha)
                .ok_or_else(|| Error::InvalidState("q off the simplex".into()))?
        };
        let marginal = self
            .target
            .log_marginal(&state.assignment, &state.theta, &state.lambda)?;
        self.check_close(
            "q-marginal",
            marginal + cond,
            self.target.log_posterior(state)?,
        )
    }

    fn log_marginal(&self, state: &ModelState) -> Option<f64> {
        self.target
            .log_marginal(&state.assignment, &state.theta, &state.lambda)
            .ok()
    }

    fn redraw_q(&self, state: &mut ModelState, stream: &mut RngStream) {
        let alpha: Vec<f64> = state
            .assignment
            .sizes()
            .iter()
            .map(|&c| self.target.hyper().alpha + c as f64)
            .collect();
        state.q = sample_dirichlet(stream, &alpha);
    }

    /// Log acceptance ratio of the split of cluster `j` of `state` into
    /// `proposal` (clusters `j`, `j + 1`), with `q` integrated out.
    pub fn birth_log_ratio(&self, state: &ModelState, proposal: &ModelState, j: usize) -> f64 {
        let (Some(before), Some(after)) = (self.log_marginal(state), self.log_marginal(proposal))
        else {
            return f64::NEG_INFINITY;
        };
        let parent = state.assignment.members(j);
        let (lo, hi) = (
            proposal.assignment.members(j),
            proposal.assignment.members(j + 1),
        );
        let allocation = SplitAllocation::new(self.target.data().correlation()).log_prob(&lo, &hi);
        let g_parent = AngleProposal::new(&self.target, &parent, state.lambda[j]);
        let g_lo = AngleProposal::new(&self.target, &lo, proposal.lambda[j]);
        let g_hi = AngleProposal::new(&self.target, &hi, proposal.lambda[j + 1]);
        let w = self.target.hyper().tau_half_width;
        after - before + self.death_prob.ln() - self.birth_prob.ln()
            + g_parent.log_pdf(state.theta.theta[j])
            + w.ln()
            - allocation
            - g_lo.log_pdf(proposal.theta.theta[j])
            - g_hi.log_pdf(proposal.theta.theta[j + 1])
            + LN_2
    }

    /// Birth with the cluster `j` and split variable `tau` given; the
    /// allocation and the children's angles are drawn from `stream`.
    pub fn birth_move_at(
        &self,
        state: &mut ModelState,
        j: usize,
        tau: f64,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let members = state.assignment.members(j);
        let Some(to_high) =
            SplitAllocation::new(self.target.data().correlation()).sample(&members, stream)
        else {
            return Ok(MoveStats::one(false));
        };
        let t = tau.abs();
        let (lam_lo, lam_hi) = (state.lambda[j] - t, state.lambda[j] + t);
        let n_hi = to_high.iter().filter(|&&h| h).count();
        if n_hi == 0 || n_hi == members.len() || !(lam_lo > 0.0) {
            return Ok(MoveStats::one(false));
        }
        let lo_members: Vec<usize> = members
            .iter()
            .zip(&to_high)
            .filter(|p| !*p.1)
            .map(|p| *p.0)
            .collect();
        let hi_members: Vec<usize> = members
            .iter()
            .zip(&to_high)
            .filter(|p| *p.1)
            .map(|p| *p.0)
            .collect();
        let theta_lo = AngleProposal::new(&self.target, &lo_members, lam_lo).sample(stream);
        let theta_hi = AngleProposal::new(&self.target, &hi_members, lam_hi).sample(stream);
        let Some(mut proposal) = split_state(state, j, tau, &to_high, theta_lo, theta_hi) else {
            return Ok(MoveStats::one(false));
        };
        let log_ratio = self.birth_log_ratio(state, &proposal, j);
        if self.verify && log_ratio.is_finite() {
            self.verify_marginal(state)?;
            self.verify_dense(&proposal)?;
        }
        let ok = accept(stream, log_ratio);
        if ok {
            self.redraw_q(&mut proposal, stream);
            *state = proposal;
        }
        Ok(MoveStats::one(ok))
    }

    /// Proposes splitting a uniformly chosen cluster. Not proposed at `m = k`.
    pub fn birth_move(&self, state: &mut ModelState, stream: &mut RngStream) -> Result<MoveStats> {
        if state.m() >= state.k() {
            return Ok(MoveStats::default());
        }
        let j = stream.uniform_index(state.m());
        let w = self.target.hyper().tau_half_width;
        let tau = w * (2.0 * stream.open01() - 1.0);
        self.birth_move_at(state, j, tau, stream)
    }

    /// Death merging clusters `j` and `j + 1`.
    pub fn death_move_at(
        &self,
        state: &mut ModelState,
        j: usize,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let t = 0.5 * (state.lambda[j + 1] - state.lambda[j]);
        if t >= self.target.hyper().tau_half_width {
            return Ok(MoveStats::one(false));
        }
        let mut merged: Vec<usize> = state.assignment.members(j);
        merged.extend(state.assignment.members(j + 1));
        merged.sort_unstable();
        let lam = 0.5 * (state.lambda[j] + state.lambda[j + 1]);
        let theta = AngleProposal::new(&self.target, &merged, lam).sample(stream);
        let Some(mut proposal) = merge_state(state, j, theta) else {
            return Ok(MoveStats::one(false));
        };
        let log_ratio = -self.birth_log_ratio(&proposal, state, j);
        if self.verify && log_ratio.is_finite() {
            self.verify_marginal(state)?;
            self.verify_dense(&proposal)?;
        }
        let ok = accept(stream, log_ratio);
        if ok {
            self.redraw_q(&mut proposal, stream);
            *state = proposal;
        }
        Ok(MoveStats::one(ok))
    }

    /// Proposes merging a uniformly chosen pair of clusters adjacent in rate.
    /// Not proposed at `m = 1`.
    pub fn death_move(&self, state: &mut ModelState, stream: &mut RngStream) -> Result<MoveStats> {
        if state.m() < 2 {
            return Ok(MoveStats::default());
        }
        let j = stream.uniform_index(state.m() - 1);
        self.death_move_at(state, j, stream)
    }

    /// One sweep over the variables in random order, each proposing a move
    /// to a uniformly chosen other cluster.
    pub fn update_assignment(
        &self,
        state: &mut ModelState,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let (m, k) = (state.m(), state.k());
        let mut stats = MoveStats::default();
        if m == 1 {
            return Ok(stats);
        }
        let mut order: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            order.swap(i, stream.uniform_index(i + 1));
        }
        let mut members: Vec<Vec<usize>> = (0..m).map(|u| state.assignment.members(u)).collect();
        let mut block_ll: Vec<f64> = members
            .iter()
            .zip(&state.theta.theta)
            .map(|(mem, &t)| self.target.block_log_likelihood(mem, t))
            .collect::<Result<_>>()?;
        for i in order {
            let u = state.assignment.label(i);
            let r = stream.uniform_index(m - 1);
            let v = if r >= u { r + 1 } else { r };
            stats.proposed += 1;
            if members[u].len() == 1 {
                continue;
            }
            let (ku, kv) = (members[u].len(), members[v].len());
            let (tu, tv) = (state.theta.theta[u], state.theta.theta[v]);
            let (lu, lv) = (state.lambda[u], state.lambda[v]);
            let (bu, bu_new) = (pivotal_support_bound(ku), pivotal_support_bound(ku - 1));
            let (bv, bv_new) = (pivotal_support_bound(kv), pivotal_support_bound(kv + 1));
            let (Some(pu_new), Some(pv_new)) = (
                truncated_exponential_log_pdf(tu, lu, bu_new),
                truncated_exponential_log_pdf(tv, lv, bv_new),
            ) else {
                continue;
            };
            let pu = truncated_exponential_log_pdf(tu, lu, bu).expect("current state in support");
            let pv = truncated_exponential_log_pdf(tv, lv, bv).expect("current state in support");
            let new_u: Vec<usize> = members[u].iter().copied().filter(|&x| x != i).collect();
            let mut new_v = members[v].clone();
            let pos = new_v.partition_point(|&x| x < i);
            new_v.insert(pos, i);
            let (Ok(ll_u), Ok(ll_v)) = (
                self.target.block_log_likelihood(&new_u, tu),
                self.target.block_log_likelihood(&new_v, tv),
            ) else {
                continue;
            };
            let delta = (ll_u + ll_v - block_ll[u] - block_ll[v])
                + (pu_new + pv_new - pu - pv)
                + (state.q[v].ln() - state.q[u].ln());
            if self.verify {
                let mut after = state.clone();
                after.assignment.move_variable(i, v);
                self.verify_delta("assignment", state, &after, delta)?;
            }
            if accept(stream, delta) {
                state.assignment.move_variable(i, v);
                members[u] = new_u;
                members[v] = new_v;
                block_ll[u] = ll_u;
                block_ll[v] = ll_v;
                stats.accepted += 1;
            }
        }
        Ok(stats)
    }

    /// Gibbs draw `q ~ Dirichlet(α + counts)`.
    pub fn update_q(&self, state: &mut ModelState, stream: &mut RngStream) {
        self.redraw_q(state, stream);
    }

    /// Random-walk Metropolis on each pivotal angle, reflected into the
    /// support.
    pub fn update_theta(
        &self,
        state: &mut ModelState,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let mut stats = MoveStats::default();
        let step = self.target.hyper().theta_step;
        for u in 0..state.m() {
            let members = state.assignment.members(u);
            let bound = pivotal_support_bound(members.len());
            let (t, lam) = (state.theta.theta[u], state.lambda[u]);
            let proposal = reflect(t + step * stream.std_normal(), bound);
            stats.proposed += 1;
            let Some(prior_new) = truncated_exponential_log_pdf(proposal, lam, bound) else {
                continue;
            };
            let Ok(ll_new) = self.target.block_log_likelihood(&members, proposal) else {
                continue;
            };
            let ll = self.target.block_log_likelihood(&members, t)?;
            let prior =
                truncated_exponential_log_pdf(t, lam, bound).expect("current state in support");
            let delta = ll_new - ll + prior_new - prior;
            if self.verify {
                let mut after = state.clone();
                after.theta.theta[u] = proposal;
                self.verify_delta("theta", state, &after, delta)?;
            }
            if accept(stream, delta) {
                state.theta.theta[u] = proposal;
                stats.accepted += 1;
            }
        }
        Ok(stats)
    }

    /// Metropolis exchange of the contents (members, angle, weight) of each
    /// pair of rate-adjacent clusters, rates held in place.
    ///
    /// Rates never cross under [`Self::update_lambda`], so without this move
    /// the rate order of the clusters, and with it which pairs a death can
    /// merge, would be fixed between births and deaths. The swap is its own
    /// inverse and leaves the likelihood untouched.
    pub fn update_order(
        &self,
        state: &mut ModelState,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let mut stats = MoveStats::default();
        let mut sizes = state.assignment.sizes();
        for u in 0..state.m().saturating_sub(1) {
            stats.proposed += 1;
            let (t0, t1) = (state.theta.theta[u], state.theta.theta[u + 1]);
            let (l0, l1) = (state.lambda[u], state.lambda[u + 1]);
            let (b0, b1) = (
                pivotal_support_bound(sizes[u]),
                pivotal_support_bound(sizes[u + 1]),
            );
            let log_g = |t: f64, l: f64, b: f64| {
                truncated_exponential_log_pdf(t, l, b).expect("angle in support")
            };
            let delta =
                log_g(t0, l1, b0) + log_g(t1, l0, b1) - log_g(t0, l0, b0) - log_g(t1, l1, b1);
            let mut map: Vec<usize> = (0..state.m()).collect();
            map.swap(u, u + 1);
            let swapped = || -> Result<ModelState> {
                let mut after = state.clone();
                after.assignment = state.assignment.relabeled(&map)?;
                after.theta.theta.swap(u, u + 1);
                after.q.swap(u, u + 1);
                Ok(after)
            };
            if self.verify {
                self.verify_delta("order", state, &swapped()?, delta)?;
            }
            if accept(stream, delta) {
                *state = swapped()?;
                sizes.swap(u, u + 1);
                stats.accepted += 1;
            }
        }
        Ok(stats)
    }

    /// Random-walk Metropolis on each rate, restricted to lie between its
    /// neighbors.
    pub fn update_lambda(
        &self,
        state: &mut ModelState,
        stream: &mut RngStream,
    ) -> Result<MoveStats> {
        let mut stats = MoveStats::default();
        let step = self.target.hyper().lambda_step;
        let sizes = state.assignment.sizes();
        for u in 0..state.m() {
            let lam = state.lambda[u];
            let proposal = lam + step * stream.std_normal();
            stats.proposed += 1;
            let floor = if u == 0 { 0.0 } else { state.lambda[u - 1] };
            let ceil = state.lambda.get(u + 1).copied().unwrap_or(f64::INFINITY);
            if !(proposal > floor && proposal < ceil) {
                continue;
            }
            let bound = pivotal_support_bound(sizes[u]);
            let t = state.theta.theta[u];
            let mut next = state.lambda.clone();
            next[u] = proposal;
            let delta = crate::model::log_prior_lambda(&next)?
                - crate::model::log_prior_lambda(&state.lambda)?
                + truncated_exponential_log_pdf(t, proposal, bound).expect("angle in support")
                - truncated_exponential_log_pdf(t, lam, bound).expect("angle in support");
            if self.verify {
                let mut after = state.clone();
                after.lambda = next;
                self.verify_delta("lambda", state, &after, delta)?;
            }
            if accept(stream, delta) {
                state.lambda[u] = proposal;
                stats.accepted += 1;
            }
        }
        Ok(stats)
    }
}
