//! Sampling and expectation machinery for positive selector processes, the
//! threshold-family construction, and the subsampling reduction verifiers.
//!
//! Exact expectations enumerate the whole sample space (guarded); Monte Carlo
//! estimates run on seeded streams so a `(seed, trials)` pair is fully
//! reproducible regardless of thread schedule.

use crate::bitset::{GroundSet, Subset};
use crate::ecost::ECost;
use crate::error::Error;
use crate::exec::{map_indexed, ExecPolicy};
use crate::family::{
    is_p_small, SmallnessMethod, Verdict, WeightedFamily, WeightedMember, DEFAULT_ENUM_GUARD,
};
use crate::rational::{
    big_binomial, rat_pow, rat_to_f64, rat_to_string, rat_u, Rat,
};
use crate::rng::{stream_rng, StreamRng};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

/// Guards for exact enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumGuards {
    /// Max `2^n` for expectations over the product measure.
    pub max_subset_enum: u64,
    /// Max `C(n, w)` for uniform-W exhaustion.
    pub max_choose_enum: u64,
}

impl Default for EnumGuards {
    fn default() -> Self {
        EnumGuards { max_subset_enum: 1 << 20, max_choose_enum: 1_000_000 }
    }
}

/// A collection of nonnegative weight sequences over the ground set.
#[derive(Clone, Debug)]
pub struct LambdaCollection {
    pub ground: GroundSet,
    pub sequences: Vec<Vec<Rat>>,
}

impl LambdaCollection {
    pub fn new(ground: GroundSet, sequences: Vec<Vec<Rat>>) -> Result<Self, Error> {
        if sequences.is_empty() {
            return Err(Error::InvalidInput("lambda collection is empty".into()));
        }
        for (k, seq) in sequences.iter().enumerate() {
            if seq.len() != ground.size() as usize {
                return Err(Error::SizeMismatch(format!(
                    "sequence {k} has {} entries, ground set has {}",
                    seq.len(),
                    ground.size()
                )));
            }
            if seq.iter().any(|w| w.is_negative()) {
                return Err(Error::NegativeWeight(format!("sequence {k}")));
            }
        }
        Ok(LambdaCollection { ground, sequences })
    }

    /// `sup over sequences of sum_{i in A} lambda_i`.
    pub fn sup(&self, a: &Subset) -> Rat {
        self.sequences
            .iter()
            .map(|seq| a.ids().fold(Rat::zero(), |acc, i| acc + &seq[i as usize]))
            .max()
            .expect("nonempty collection")
    }

    /// Index of the first sequence attaining the sup on A.
    pub fn argmax(&self, a: &Subset) -> usize {
        let mut best = 0usize;
        let mut best_val: Option<Rat> = None;
        for (k, seq) in self.sequences.iter().enumerate() {
            let v = a.ids().fold(Rat::zero(), |acc, i| acc + &seq[i as usize]);
            if best_val.as_ref().map_or(true, |b| &v > b) {
                best_val = Some(v);
                best = k;
            }
        }
        best
    }

    pub fn scaled(&self, c: &Rat) -> LambdaCollection {
        LambdaCollection {
            ground: self.ground,
            sequences: self
                .sequences
                .iter()
                .map(|seq| seq.iter().map(|w| w * c).collect())
                .collect(),
        }
    }

    fn as_f64(&self) -> Vec<Vec<f64>> {
        self.sequences
            .iter()
            .map(|seq| seq.iter().map(rat_to_f64).collect())
            .collect()
    }
}

/// `X_p`: each element joins independently with probability p.
pub fn sample_xp(ground: &GroundSet, p: f64, rng: &mut StreamRng) -> Subset {
    let mut bits = 0u64;
    for i in ground.elements() {
        if rng.gen::<f64>() < p {
            bits |= 1 << i;
        }
    }
    Subset::from_bits(bits)
}

/// Uniform draw from C(X, w) via a partial Fisher-Yates shuffle.
pub fn sample_uniform_w_subset(ground: &GroundSet, w: u32, rng: &mut StreamRng) -> Subset {
    let n = ground.size();
    assert!(w <= n, "w = {w} exceeds n = {n}");
    let mut ids: Vec<u32> = (0..n).collect();
    for k in 0..w as usize {
        let j = rng.gen_range(k..n as usize);
        ids.swap(k, j);
    }
    Subset::from_ids(ids[..w as usize].iter().copied())
}

/// Uniform sub-subset: picks `k` of the elements of `base` uniformly.
pub fn sample_uniform_subset_of(base: &Subset, k: u32, rng: &mut StreamRng) -> Subset {
    let mut ids = base.to_vec();
    assert!(k as usize <= ids.len());
    for t in 0..k as usize {
        let j = rng.gen_range(t..ids.len());
        ids.swap(t, j);
    }
    Subset::from_ids(ids[..k as usize].iter().copied())
}

/// A Monte Carlo mean with its standard error and a normal-approximation
/// 95% interval half-width.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub sigma: f64,
    pub ci95: f64,
    pub trials: u64,
    pub seed: u64,
}

fn mc_from_samples(samples: &[f64], seed: u64) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let sigma = (var / n).sqrt();
    McEstimate { mean, sigma, ci95: 1.96 * sigma, trials: samples.len() as u64, seed }
}

const MC_BATCH: u64 = 4096;

/// Monte Carlo mean of `value(rng)` over `trials` draws, batched onto seeded
/// streams (stream id = batch index) so the result is reproducible and
/// thread-schedule independent.
pub fn mc_mean<F>(trials: u64, seed: u64, policy: ExecPolicy, value: F) -> McEstimate
where
    F: Fn(&mut StreamRng) -> f64 + Sync + Send,
{
    assert!(trials >= 1);
    let batches = trials.div_ceil(MC_BATCH);
    // Per-batch sums are combined in batch order; totals are exact functions
    // of (seed, trials).
    let parts: Vec<(f64, f64, u64)> = map_indexed(policy, batches as usize, |bi| {
        let mut rng = stream_rng(seed, bi as u64);
        let lo = bi as u64 * MC_BATCH;
        let hi = ((bi as u64 + 1) * MC_BATCH).min(trials);
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in lo..hi {
            let x = value(&mut rng);
            sum += x;
            sumsq += x * x;
        }
        (sum, sumsq, hi - lo)
    });
    let (sum, sumsq, count) = parts
        .into_iter()
        .fold((0.0, 0.0, 0u64), |(a, b, c), (x, y, k)| (a + x, b + y, c + k));
    let n = count as f64;
    let mean = sum / n;
    let var = if count > 1 { (sumsq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    let sigma = (var / n).sqrt();
    McEstimate { mean, sigma, ci95: 1.96 * sigma, trials: count, seed }
}

/// Exact `E sup` over the product measure: `sum_A mu_p(A) sup(A)`, rational.
pub fn expected_sup_exact<F>(
    ground: &GroundSet,
    p: &Rat,
    guards: &EnumGuards,
    sup: F,
) -> Result<Rat, Error>
where
    F: Fn(&Subset) -> Rat + Sync + Send,
{
    crate::family::check_probability(p)?;
    let n = ground.size();
    if n >= 63 || (1u64 << n) > guards.max_subset_enum {
        return Err(Error::TooLarge {
            guard: "subset-enumeration",
            detail: format!("2^{n} exceeds {}", guards.max_subset_enum),
        });
    }
    let q = Rat::one() - p;
    let weight_by_count: Vec<Rat> = (0..=n)
        .map(|k| rat_pow(p, k as i64) * rat_pow(&q, (n - k) as i64))
        .collect();
    let mut total = Rat::zero();
    for mask in 0..=ground.full_mask() {
        let a = Subset::from_bits(mask);
        total += &weight_by_count[a.len() as usize] * sup(&a);
    }
    Ok(total)
}

/// Exact `E sup` over the uniform distribution on C(X, w), rational.
pub fn expected_sup_uniform_w<F>(
    ground: &GroundSet,
    w: u32,
    guards: &EnumGuards,
    sup: F,
) -> Result<Rat, Error>
where
    F: Fn(&Subset) -> Rat + Sync + Send,
{
    let n = ground.size();
    if w > n {
        return Err(Error::InvalidInput(format!("w = {w} exceeds n = {n}")));
    }
    let count = big_binomial(n as u64, w as u64);
    if count > num_bigint::BigUint::from(guards.max_choose_enum) {
        return Err(Error::TooLarge {
            guard: "choose-enumeration",
            detail: format!("C({n},{w}) = {count} exceeds {}", guards.max_choose_enum),
        });
    }
    let mut total = Rat::zero();
    for wset in ground.subsets_of_size(w) {
        total += sup(&wset);
    }
    Ok(total / Rat::from_integer(count.into()))
}

/// Monte Carlo `E sup` over `X_p`. When `2^n` fits, sups are precomputed per
/// mask so a million trials stay cheap.
pub fn expected_sup_mc(
    lambda: &LambdaCollection,
    p: f64,
    trials: u64,
    seed: u64,
    policy: ExecPolicy,
) -> McEstimate {
    let ground = lambda.ground;
    let n = ground.size();
    if n <= 20 {
        let seqs = lambda.as_f64();
        let table: Vec<f64> = (0..=ground.full_mask())
            .map(|mask| {
                let a = Subset::from_bits(mask);
                seqs.iter()
                    .map(|seq| a.ids().map(|i| seq[i as usize]).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        mc_mean(trials, seed, policy, move |rng| {
            table[sample_xp(&ground, p, rng).bits() as usize]
        })
    } else {
        let seqs = lambda.as_f64();
        mc_mean(trials, seed, policy, move |rng| {
            let a = sample_xp(&ground, p, rng);
            seqs.iter()
                .map(|seq| a.ids().map(|i| seq[i as usize]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }
}

/// The family `{S : sup_lambda sum_{i in S} lambda_i >= threshold}` realized
/// by exact enumeration, with the argmax sequence restricted to S attached as
/// the member's weights. Possibly empty; `p` is only recorded.
pub fn threshold_family(
    lambda: &LambdaCollection,
    threshold: &Rat,
    p: &Rat,
    guards: &EnumGuards,
) -> Result<Vec<WeightedMember>, Error> {
    crate::family::check_probability(p)?;
    let ground = lambda.ground;
    let n = ground.size();
    if n >= 63 || (1u64 << n) > guards.max_subset_enum {
        return Err(Error::TooLarge {
            guard: "subset-enumeration",
            detail: format!("2^{n} exceeds {}", guards.max_subset_enum),
        });
    }
    let mut members = Vec::new();
    for mask in 0..=ground.full_mask() {
        let s = Subset::from_bits(mask);
        if &lambda.sup(&s) >= threshold {
            let tau_idx = lambda.argmax(&s);
            let weights = s
                .ids()
                .map(|i| (i, lambda.sequences[tau_idx][i as usize].clone()))
                .collect();
            members.push(WeightedMember::new(s, weights)?);
        }
    }
    Ok(members)
}

/// Exact upper binomial tail `P(Bin(n, p) >= k)`.
pub fn binomial_at_least(n: u64, k: u64, p: &Rat) -> Rat {
    let q = Rat::one() - p;
    let mut total = Rat::zero();
    for i in k..=n {
        total += Rat::from_integer(big_binomial(n, i).into())
            * rat_pow(p, i as i64)
            * rat_pow(&q, (n - i) as i64);
    }
    total
}

/// `1 - e^{-1/2} > 1/4`, decided exactly (equivalent to `e > 16/9`).
pub fn exp_half_fact_holds() -> bool {
    ECost::term(Rat::one(), 1).cmp_rat(&Rat::new(16.into(), 9.into()))
        == std::cmp::Ordering::Greater
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupEstimate {
    Exact { value: String, approx: f64 },
    Mc(McEstimate),
}

/// Verification of the uniform-W expectation conclusion.
#[derive(Clone, Debug, Serialize)]
pub struct Thm15Report {
    pub n: u32,
    pub k: String,
    pub w: u64,
    /// The premise needs a family that is NOT p-small; when it is, the
    /// conclusion is vacuous and this flags it.
    pub vacuous_premise: bool,
    pub min_cover_cost: String,
    pub estimate: SupEstimate,
    /// Whether the estimate clears the 1e-11 floor (informational at desk
    /// scale; every small instance clears it by a wide margin).
    pub meets_threshold: bool,
    pub threshold: String,
}

/// Estimates `E sup_S sum_{i in S cap W} lambda^S(i)` over uniform W of size
/// `floor(K n p)` and compares against the 1e-11 floor.
pub fn verify_thm15_conclusion(
    family: &WeightedFamily,
    k: &Rat,
    trials: u64,
    seed: u64,
    guards: &EnumGuards,
    policy: ExecPolicy,
) -> Result<Thm15Report, Error> {
    let n = family.ground.size();
    let np = rat_u(n as u64) * &family.p;
    let w = crate::rational::rat_floor_u64(&(k * &np))
        .ok_or_else(|| Error::InvalidInput("K n p is negative".into()))?;
    if w > n as u64 {
        return Err(Error::TooLarge {
            guard: "thm15-w",
            detail: format!("w = floor(K n p) = {w} exceeds n = {n}"),
        });
    }
    let cert = is_p_small(family, SmallnessMethod::Exact { guard: DEFAULT_ENUM_GUARD })?;
    let vacuous = cert.verdict == Verdict::PSmall;
    let threshold = Rat::new(1.into(), BigInt::from(10u64).pow(11));
    let count = big_binomial(n as u64, w);
    let (estimate, meets) =
        if count <= num_bigint::BigUint::from(guards.max_choose_enum) {
            let exact =
                expected_sup_uniform_w(&family.ground, w as u32, guards, |a| family.sup_weight(a))?;
            let meets = exact >= threshold;
            (
                SupEstimate::Exact { value: rat_to_string(&exact), approx: rat_to_f64(&exact) },
                meets,
            )
        } else {
            let ground = family.ground;
            let est = mc_mean(trials, seed, policy, |rng| {
                let wset = sample_uniform_w_subset(&ground, w as u32, rng);
                rat_to_f64(&family.sup_weight(&wset))
            });
            let meets = est.mean - 4.0 * est.sigma >= rat_to_f64(&threshold);
            (SupEstimate::Mc(est), meets)
        };
    Ok(Thm15Report {
        n,
        k: rat_to_string(k),
        w,
        vacuous_premise: vacuous,
        min_cover_cost: rat_to_string(&cert.min_cost),
        estimate,
        meets_threshold: meets,
        threshold: rat_to_string(&threshold),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionCase {
    /// `np >= 1`: the 1/2 constant applies.
    AboveOne,
    /// `1/2 <= np < 1`: the 1/4 constant applies.
    HalfToOne,
    /// `np < 1/2`: only consistent with a p-small family.
    BelowHalf,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactChain {
    pub e_xp: String,
    pub e_wprime: String,
    pub e_w: String,
    /// `E sup X_p >= c * E sup W'` at the case constant c.
    pub case_inequality_holds: bool,
    /// `E sup W' >= zeta * E sup W`.
    pub zeta_inequality_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct McChain {
    pub e_xp: McEstimate,
    pub e_wprime: McEstimate,
    pub e_w: McEstimate,
    /// Coupled per-trial `sup(W') - zeta sup(W)` with W' drawn inside W.
    pub coupled_diff: McEstimate,
    /// `mean(X_p) - c mean(W') >= -4 sigma`.
    pub case_within_slack: bool,
    /// `mean(coupled_diff) >= -4 sigma`.
    pub zeta_within_slack: bool,
}

/// The full subsampling-reduction report.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub n: u32,
    pub p: String,
    pub np: String,
    pub k: String,
    pub w: u64,
    pub n_prime: u64,
    pub zeta: String,
    pub case: ReductionCase,
    pub not_p_small: bool,
    pub binomial_threshold: u64,
    pub binomial_prob: String,
    /// `P(Bin(n,p) >= floor(np)) >= 1/2`, exactly.
    pub binomial_fact_holds: bool,
    /// `1 - e^{-1/2} > 1/4`, exactly.
    pub exp_half_fact_holds: bool,
    pub exact: Option<ExactChain>,
    pub mc: McChain,
    /// No hard violations: exact inequalities hold where computed, MC gaps
    /// within 4 sigma.
    pub chain_holds: bool,
}

/// Numerically verifies the reduction from product sampling to uniform
/// w-subsets on one instance: the binomial median fact, the two-case
/// constant, and the zeta-fraction coupling.
pub fn verify_subsampling_chain(
    family: &WeightedFamily,
    k: &Rat,
    trials: u64,
    seed: u64,
    guards: &EnumGuards,
    policy: ExecPolicy,
) -> Result<ReductionReport, Error> {
    let n = family.ground.size();
    let p = family.p.clone();
    let np = rat_u(n as u64) * &p;
    let w = crate::rational::rat_floor_u64(&(k * &np))
        .ok_or_else(|| Error::InvalidInput("K n p is negative".into()))?;
    if w == 0 || w > n as u64 {
        return Err(Error::InvalidInput(format!(
            "w = floor(K n p) = {w} must lie in 1..=n"
        )));
    }
    let cert = is_p_small(family, SmallnessMethod::Exact { guard: DEFAULT_ENUM_GUARD })?;
    let not_p_small = cert.verdict == Verdict::NotPSmall;
    let half = Rat::new(1.into(), 2.into());
    let case = if np >= Rat::one() {
        ReductionCase::AboveOne
    } else if np >= half {
        ReductionCase::HalfToOne
    } else {
        ReductionCase::BelowHalf
    };
    if case == ReductionCase::BelowHalf && not_p_small {
        return Err(Error::Inconsistent(format!(
            "family is not p-small but n p = {} < 1/2; the singleton cover {{{{x}}}} prices at np < 1/2, so such a family cannot exist with normalized weights",
            rat_to_string(&np)
        )));
    }
    let floor_np = crate::rational::rat_floor_u64(&np).unwrap_or(0);
    let n_prime = floor_np.max(1);
    let zeta = rat_u(n_prime) / rat_u(w);
    let case_const = match case {
        ReductionCase::AboveOne => Rat::new(1.into(), 2.into()),
        _ => Rat::new(1.into(), 4.into()),
    };

    // exact binomial median fact
    let binomial_prob = binomial_at_least(n as u64, floor_np, &p);
    let binomial_fact_holds = binomial_prob >= half;

    // exact chain when the spaces enumerate
    let enumerable = n < 63
        && (1u64 << n) <= guards.max_subset_enum
        && big_binomial(n as u64, w) <= num_bigint::BigUint::from(guards.max_choose_enum);
    let exact = if enumerable {
        let e_xp = expected_sup_exact(&family.ground, &p, guards, |a| family.sup_weight(a))?;
        let e_wp =
            expected_sup_uniform_w(&family.ground, n_prime as u32, guards, |a| {
                family.sup_weight(a)
            })?;
        let e_w =
            expected_sup_uniform_w(&family.ground, w as u32, guards, |a| family.sup_weight(a))?;
        let case_ok = case == ReductionCase::BelowHalf || &e_xp >= &(&case_const * &e_wp);
        let zeta_ok = &e_wp >= &(&zeta * &e_w);
        Some(ExactChain {
            e_xp: rat_to_string(&e_xp),
            e_wprime: rat_to_string(&e_wp),
            e_w: rat_to_string(&e_w),
            case_inequality_holds: case_ok,
            zeta_inequality_holds: zeta_ok,
        })
    } else {
        None
    };

    // Monte Carlo chain: X_p on its own stream family; (W, W' inside W)
    // coupled per trial.
    let ground = family.ground;
    let p_f = rat_to_f64(&p);
    let e_xp_mc = mc_mean(trials, seed, policy, |rng| {
        rat_to_f64(&family.sup_weight(&sample_xp(&ground, p_f, rng)))
    });
    let zeta_f = rat_to_f64(&zeta);
    // coupled samples: per trial sample W, then W' uniformly inside W;
    // record sup(W'), sup(W), and the difference sup(W') - zeta sup(W)
    let coupled: Vec<(f64, f64)> = {
        let batches = trials.div_ceil(MC_BATCH);
        let parts: Vec<Vec<(f64, f64)>> = map_indexed(policy, batches as usize, |bi| {
            let mut rng = stream_rng(seed ^ 0x57AB_5EED, bi as u64);
            let lo = bi as u64 * MC_BATCH;
            let hi = ((bi as u64 + 1) * MC_BATCH).min(trials);
            (lo..hi)
                .map(|_| {
                    let wset = sample_uniform_w_subset(&ground, w as u32, &mut rng);
                    let wp = sample_uniform_subset_of(&wset, n_prime as u32, &mut rng);
                    (
                        rat_to_f64(&family.sup_weight(&wp)),
                        rat_to_f64(&family.sup_weight(&wset)),
                    )
                })
                .collect()
        });
        parts.into_iter().flatten().collect()
    };
    let wp_samples: Vec<f64> = coupled.iter().map(|(a, _)| *a).collect();
    let w_samples: Vec<f64> = coupled.iter().map(|(_, b)| *b).collect();
    let diff_samples: Vec<f64> = coupled.iter().map(|(a, b)| a - zeta_f * b).collect();
    let e_wp_mc = mc_from_samples(&wp_samples, seed ^ 0x57AB_5EED);
    let e_w_mc = mc_from_samples(&w_samples, seed ^ 0x57AB_5EED);
    let diff_mc = mc_from_samples(&diff_samples, seed ^ 0x57AB_5EED);

    let c = rat_to_f64(&case_const);
    let case_gap = e_xp_mc.mean - c * e_wp_mc.mean;
    let case_sigma = (e_xp_mc.sigma.powi(2) + (c * e_wp_mc.sigma).powi(2)).sqrt();
    let case_within = case == ReductionCase::BelowHalf || case_gap >= -4.0 * case_sigma;
    let zeta_within = diff_mc.mean >= -4.0 * diff_mc.sigma;

    let exp_half = exp_half_fact_holds();
    let exact_ok = exact.as_ref().map_or(true, |e| {
        e.case_inequality_holds && e.zeta_inequality_holds
    });
    let chain_holds =
        binomial_fact_holds && exp_half && exact_ok && case_within && zeta_within;

    Ok(ReductionReport {
        n,
        p: rat_to_string(&p),
        np: rat_to_string(&np),
        k: rat_to_string(k),
        w,
        n_prime,
        zeta: rat_to_string(&zeta),
        case,
        not_p_small,
        binomial_threshold: floor_np,
        binomial_prob: rat_to_string(&binomial_prob),
        binomial_fact_holds,
        exp_half_fact_holds: exp_half,
        exact,
        mc: McChain {
            e_xp: e_xp_mc,
            e_wprime: e_wp_mc,
            e_w: e_w_mc,
            coupled_diff: diff_mc,
            case_within_slack: case_within,
            zeta_within_slack: zeta_within,
        },
        chain_holds,
    })
}
