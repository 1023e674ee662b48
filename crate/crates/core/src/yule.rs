//! Yule (pure-birth) processes and the nested genus/species process.
//!
//! A Yule process with birth rate `lambda` starts from `initial` individuals;
//! each individual independently spawns at rate `lambda`. Its population law
//! at a fixed horizon is negative-binomial-shaped and is implemented in
//! closed form next to the event-driven sampler so the two routes can be
//! checked against each other.
//!
//! The nested process grows genera as a rate-`genus_rate` Yule process from a
//! single genus; a genus born at time `tau` holds an independent species-level
//! Yule process run for the remaining `horizon - tau`. Uniformly choosing a
//! genus and asking for its size has a closed-form law via the order-statistic
//! representation of birth times, also implemented here.

use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;
use crate::special::{ln_beta, ln_choose, regularized_beta};
use rand::Rng;

/// Errors from the Yule samplers and laws.
#[derive(Debug, Error)]
pub enum YuleError {
    /// Parameters failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// An event-driven run outgrew its population cap.
    #[error("population cap {cap} exceeded during event-driven run")]
    PopulationCap {
        /// Configured cap.
        cap: u64,
    },
}

/// Parameters of one Yule process.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct YuleParams {
    /// Per-individual birth rate (`> 0`).
    pub lambda: f64,
    /// Population at time zero (`>= 1`).
    pub initial: u64,
    /// Observation horizon (`>= 0`).
    pub horizon: f64,
}

impl YuleParams {
    /// Validated constructor.
    pub fn new(lambda: f64, initial: u64, horizon: f64) -> Result<Self, YuleError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(YuleError::InvalidConfig(format!(
                "birth rate must be finite and positive, got {lambda}"
            )));
        }
        if initial == 0 {
            return Err(YuleError::InvalidConfig(
                "initial population must be at least 1".into(),
            ));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(YuleError::InvalidConfig(format!(
                "horizon must be finite and non-negative, got {horizon}"
            )));
        }
        Ok(Self {
            lambda,
            initial,
            horizon,
        })
    }
}

/// Population law at the horizon: probability that the process sits at `k`.
///
/// `P(N = k) = C(k-1, initial-1) e^{-initial*lambda*T} (1 - e^{-lambda*T})^{k-initial}`
/// for `k >= initial`, zero below. Evaluated in log space so it stays finite
/// for `k` up to 1e5 and beyond.
pub fn yule_pmf(params: &YuleParams, k: u64) -> f64 {
    if k < params.initial {
        return 0.0;
    }
    let lt = params.lambda * params.horizon;
    if lt == 0.0 {
        return if k == params.initial { 1.0 } else { 0.0 };
    }
    // ln(1 - e^{-lt}) computed via expm1 for small lt
    let ln_growth = (-(-lt).exp_m1()).ln();
    let ln_p = ln_choose(k - 1, params.initial - 1) - (params.initial as f64) * lt
        + (k - params.initial) as f64 * ln_growth;
    ln_p.exp()
}

/// Upper tail `P(N >= k_from)` in closed form (regularized incomplete beta).
pub fn yule_tail(params: &YuleParams, k_from: u64) -> f64 {
    if k_from <= params.initial {
        return 1.0;
    }
    let lt = params.lambda * params.horizon;
    if lt == 0.0 {
        return 0.0;
    }
    // N - initial is negative binomial (initial successes, failure mass q);
    // P(N - initial >= j) = I_q(j, initial) for j >= 1.
    let q = -(-lt).exp_m1();
    regularized_beta(q, (k_from - params.initial) as f64, params.initial as f64)
}

/// Expected population at the horizon, `initial * e^{lambda*T}`.
pub fn yule_mean(params: &YuleParams) -> f64 {
    params.initial as f64 * (params.lambda * params.horizon).exp()
}

/// Event-driven draw of the population at the horizon.
///
/// The population-`k` holding time is exponential with rate `lambda * k`.
/// Errors out (rather than looping) if the population would exceed `cap`.
pub fn yule_sample(params: &YuleParams, cap: u64, rng: &mut SimRng) -> Result<u64, YuleError> {
    if cap < params.initial {
        return Err(YuleError::InvalidConfig(format!(
            "cap {cap} below initial population {}",
            params.initial
        )));
    }
    let mut k = params.initial;
    let mut t = 0.0f64;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e / (params.lambda * k as f64);
        if t > params.horizon {
            return Ok(k);
        }
        k += 1;
        if k > cap {
            return Err(YuleError::PopulationCap { cap });
        }
    }
}

/// Probability of observing counts `(k_1, ..., k_d)` at strictly increasing
/// times `(t_1, ..., t_d)` for a Yule process with rate `lambda` started at
/// `initial`. By the Markov branching property this is the product of
/// single-step population laws over the increments.
pub fn yule_fdd_pmf(
    lambda: f64,
    initial: u64,
    times: &[f64],
    counts: &[u64],
) -> Result<f64, YuleError> {
    if times.is_empty() || times.len() != counts.len() {
        return Err(YuleError::InvalidConfig(
            "times and counts must be non-empty and of equal length".into(),
        ));
    }
    let mut prev_t = 0.0f64;
    let mut prev_k = initial;
    let mut prob = 1.0f64;
    for (&t, &k) in times.iter().zip(counts) {
        if !(t > prev_t && t.is_finite()) {
            return Err(YuleError::InvalidConfig(
                "times must be finite, positive, and strictly increasing".into(),
            ));
        }
        if k < prev_k {
            return Err(YuleError::InvalidConfig(
                "counts must be non-decreasing (pure birth)".into(),
            ));
        }
        let step = YuleParams::new(lambda, prev_k, t - prev_t)?;
        prob *= yule_pmf(&step, k);
        prev_t = t;
        prev_k = k;
    }
    Ok(prob)
}

/// One realization of the nested genus/species process.
#[derive(Clone, Debug, Serialize)]
pub struct MYuleRealization {
    /// Genus birth times in arrival order; the initial genus is at 0.
    pub birth_times: Vec<f64>,
    /// Species count of each genus at the horizon.
    pub sizes: Vec<u64>,
    /// Observation horizon.
    pub horizon: f64,
}

impl MYuleRealization {
    /// Number of genera at the horizon.
    pub fn num_genera(&self) -> u64 {
        self.birth_times.len() as u64
    }
}

/// Event-driven realization of the nested process: genera arrive as a Yule
/// process at `genus_rate` from one genus; each genus runs an independent
/// species process (`species.lambda`, `species.initial`) from its birth to
/// the horizon given by `species.horizon`.
///
/// `cap` bounds both the genus count and each species count.
pub fn myule_simulate(
    genus_rate: f64,
    species: &YuleParams,
    cap: u64,
    rng: &mut SimRng,
) -> Result<MYuleRealization, YuleError> {
    let birth_times = genus_birth_times(genus_rate, species.horizon, cap, rng)?;
    let mut sizes = Vec::with_capacity(birth_times.len());
    for &tau in &birth_times {
        let local = YuleParams::new(species.lambda, species.initial, species.horizon - tau)?;
        sizes.push(yule_sample(&local, cap, rng)?);
    }
    Ok(MYuleRealization {
        birth_times,
        sizes,
        horizon: species.horizon,
    })
}

/// Genus birth times of one realization (initial genus at time 0).
fn genus_birth_times(
    genus_rate: f64,
    horizon: f64,
    cap: u64,
    rng: &mut SimRng,
) -> Result<Vec<f64>, YuleError> {
    if !(genus_rate > 0.0 && genus_rate.is_finite()) {
        return Err(YuleError::InvalidConfig(format!(
            "genus rate must be finite and positive, got {genus_rate}"
        )));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(YuleError::InvalidConfig(format!(
            "horizon must be finite and non-negative, got {horizon}"
        )));
    }
    if cap == 0 {
        return Err(YuleError::InvalidConfig("cap must be positive".into()));
    }
    let mut times = Vec::with_capacity(64);
    times.push(0.0);
    let mut t = 0.0f64;
    loop {
        let g = times.len() as f64;
        let e: f64 = rng.sample(Exp1);
        t += e / (genus_rate * g);
        if t > horizon {
            return Ok(times);
        }
        times.push(t);
        if times.len() as u64 > cap {
            return Err(YuleError::PopulationCap { cap });
        }
    }
}

/// Size of a uniformly chosen genus from an existing realization.
pub fn sample_genus_uniform(realization: &MYuleRealization, rng: &mut SimRng) -> u64 {
    let idx = rng.random_range(0..realization.sizes.len());
    realization.sizes[idx]
}

/// Birth time and horizon size of a uniformly chosen genus, drawn without
/// materializing the realization at all.
///
/// Statistically identical to [`myule_simulate`] followed by
/// [`sample_genus_uniform`], by three exact reductions:
///
/// 1. the genus count at the horizon is geometric with success probability
///    `exp(-genus_rate * horizon)` (the pure-birth law from one ancestor),
///    sampled here by inversion in O(1);
/// 2. conditioned on the count, the non-initial birth times are iid with
///    density `rate * e^{rate t} / (e^{rate T} - 1)` (order-statistic form),
///    and the marginal of a *uniformly chosen* one is that same density —
///    so picking the initial genus with probability `1/count` and otherwise
///    drawing one inversion sample reproduces a uniform genus's birth time;
/// 3. species processes are independent Yule processes given the births, so
///    only the chosen genus's process needs to run.
///
/// This makes the cost per draw O(chosen genus size) instead of
/// O(total genera + species), which is what allows large-horizon
/// experiments (the expected genus count grows like `e^{rate T}`).
pub fn myule_uniform_genus_sample(
    genus_rate: f64,
    species: &YuleParams,
    cap: u64,
    rng: &mut SimRng,
) -> Result<(f64, u64), YuleError> {
    if !(genus_rate > 0.0 && genus_rate.is_finite()) {
        return Err(YuleError::InvalidConfig(format!(
            "genus rate must be finite and positive, got {genus_rate}"
        )));
    }
    if cap == 0 {
        return Err(YuleError::InvalidConfig("cap must be positive".into()));
    }
    let horizon = species.horizon;
    let p_one = (-genus_rate * horizon).exp(); // P(count stays 1)
    if p_one <= 0.0 {
        return Err(YuleError::InvalidConfig(format!(
            "genus horizon {horizon} too large: the count law underflows"
        )));
    }
    // Geometric count by inversion: smallest g with 1 - (1-p)^g > u.
    let u: f64 = rng.random();
    let genera = if horizon == 0.0 {
        1.0
    } else {
        ((1.0 - u).ln() / (-p_one).ln_1p()).ceil().max(1.0)
    };
    if genera > cap as f64 {
        return Err(YuleError::PopulationCap { cap });
    }
    let genera = genera as u64;

    let pick = rng.random_range(0..genera);
    let tau = if pick == 0 {
        0.0
    } else {
        let v: f64 = rng.random();
        (v * (genus_rate * horizon).exp_m1()).ln_1p() / genus_rate
    };
    let local = YuleParams::new(species.lambda, species.initial, (horizon - tau).max(0.0))?;
    let size = yule_sample(&local, cap, rng)?;
    Ok((tau, size))
}

/// Inverse-CDF sampler for the order-statistic law of a non-initial genus
/// birth time on `[0, T]`: density `e^t / (e^T - 1)`, so
/// `tau = ln(1 + u (e^T - 1))`.
pub fn order_stat_time_from_uniform(horizon: f64, u: f64) -> f64 {
    assert!(
        (0.0..1.0).contains(&u),
        "uniform variate out of [0,1): {u}"
    );
    assert!(horizon > 0.0, "horizon must be positive");
    (u * horizon.exp_m1()).ln_1p()
}

/// Draws one order-statistic birth time on `[0, horizon]`.
pub fn order_stat_time_sample(horizon: f64, rng: &mut SimRng) -> f64 {
    order_stat_time_from_uniform(horizon, rng.random::<f64>())
}

/// Closed-form law of the size of a genus whose birth time follows the
/// order-statistic density on `[0, T]`, with species dynamics at rate 1/2
/// from `initial` founders and unit genus rate:
///
/// `p_k(T) = 2/(1 - e^{-T}) * C(k-1, initial-1) * B(k-initial+1, initial+2)
///           * I_x(k-initial+1, initial+2)`, with `x = 1 - e^{-T/2}`.
///
/// As `T` grows this converges to [`limit_pmf`]. Requires `T > 0`.
pub fn genus_size_pmf_at_t(initial: u64, horizon: f64, k: u64) -> Result<f64, YuleError> {
    if initial == 0 {
        return Err(YuleError::InvalidConfig(
            "initial population must be at least 1".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(YuleError::InvalidConfig(format!(
            "horizon must be finite and positive, got {horizon}"
        )));
    }
    if k < initial {
        return Ok(0.0);
    }
    let a = (k - initial + 1) as f64;
    let b = initial as f64 + 2.0;
    let x = -(-horizon / 2.0).exp_m1();
    let front = 2.0 / (-(-horizon).exp_m1());
    let ln_core = ln_choose(k - 1, initial - 1) + ln_beta(a, b);
    Ok(front * ln_core.exp() * regularized_beta(x, a, b))
}

/// Limiting genus-size law: `p_k = 2 m (m+1) / (k (k+1) (k+2))` for
/// `k >= m` where `m` is the founding species count, zero below.
pub fn limit_pmf(initial: u64, k: u64) -> f64 {
    if k < initial {
        return 0.0;
    }
    let m = initial as f64;
    let kf = k as f64;
    2.0 * m * (m + 1.0) / (kf * (kf + 1.0) * (kf + 2.0))
}

/// Exact upper tail of [`limit_pmf`]: `sum_{k >= k_from} p_k = m(m+1) /
/// (k_from (k_from + 1))` for `k_from >= m` (telescoping), 1 below.
pub fn limit_pmf_tail(initial: u64, k_from: u64) -> f64 {
    if k_from <= initial {
        return 1.0;
    }
    let m = initial as f64;
    let kf = k_from as f64;
    m * (m + 1.0) / (kf * (kf + 1.0))
}

/// Analytic total-variation distance between the uniformly-picked genus-size
/// law at a finite horizon and its long-horizon limit.
///
/// Sums pointwise differences until both tails drop below `1e-9`; the
/// remaining mass is added as an upper bound, so the result errs on the
/// conservative side by less than `1e-9`.
pub fn genus_size_limit_tv(initial: u64, horizon: f64) -> Result<f64, YuleError> {
    let mut sum = 0.0f64;
    let mut mass_t = 0.0f64;
    let mut k = initial;
    loop {
        let pt = genus_size_pmf_at_t(initial, horizon, k)?;
        sum += (pt - limit_pmf(initial, k)).abs();
        mass_t += pt;
        if limit_pmf_tail(initial, k + 1) < 1e-9 && 1.0 - mass_t < 1e-9 {
            break;
        }
        if k > initial + 10_000_000 {
            return Err(YuleError::InvalidConfig(
                "genus-size tail comparison did not converge".into(),
            ));
        }
        k += 1;
    }
    sum += (1.0 - mass_t).max(0.0) + limit_pmf_tail(initial, k + 1);
    Ok(0.5 * sum)
}
