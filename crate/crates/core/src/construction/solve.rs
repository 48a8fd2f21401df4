use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Rational};

use super::{gap, lemma_bounds_with, parameter_bounds, ConstructionLimits, ConstructionTrace, Recursion};
use crate::construction::Certificate;
use crate::dimension::{classify, singularity_threshold};
use crate::error::{Error, Result};
use crate::ifs::{parse_rational, parse_real, Params};
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub precision_bits: u32,
    /// Largest block count tried before giving up.
    pub k_cap: usize,
    /// Precision is doubled on undecidable comparisons up to this many bits.
    pub max_precision_bits: u32,
    pub limits: ConstructionLimits,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            precision_bits: 256,
            k_cap: 64,
            max_precision_bits: 4096,
            limits: ConstructionLimits::default(),
        }
    }
}

fn quarter(prec: u32) -> Interval {
    &Interval::from_int(prec, 1) / &Interval::from_int(prec, 4)
}

/// `(1 / (4 b2), b2)` for `b2` strictly inside `(1/4, 1/2)`.
pub fn boundary_params(beta2: &str, prec: u32) -> Result<Params> {
    let b2 = parse_real(beta2, prec)?;
    let half = &Interval::from_int(prec, 1) / &Interval::from_int(prec, 2);
    if b2.gt(&quarter(prec)) != Some(true) || b2.lt(&half) != Some(true) {
        return Err(Error::Domain(format!(
            "beta2 must lie strictly between 1/4 and 1/2, got {beta2}"
        )));
    }
    let b1 = (&Interval::from_int(prec, 4) * &b2).recip();
    Params::new(b1, b2)
}

/// The recursion at the boundary, with exact tie-breaking when `b2` is a
/// finite decimal or fraction.
fn boundary_recursion(beta2: &str, params: &Params, limits: ConstructionLimits) -> Result<Recursion> {
    let recursion = Recursion::new(params, limits)?;
    Ok(match parse_rational(beta2.trim()) {
        Some(b2) => {
            let b1 = Rational::from(Rational::from(4 * &b2).recip_ref());
            recursion.with_exact(b1, b2)
        }
        None => recursion,
    })
}

fn with_precision_escalation<T>(
    config: &SolveConfig,
    mut attempt: impl FnMut(u32) -> Result<T>,
) -> Result<T> {
    let mut prec = config.precision_bits;
    loop {
        match attempt(prec) {
            Err(Error::Precision(msg)) => {
                if prec.saturating_mul(2) > config.max_precision_bits {
                    return Err(Error::Precision(format!("{msg} (at {prec} bits)")));
                }
                prec *= 2;
            }
            other => return other,
        }
    }
}

/// Certifies a root of `g = V_t - V_s` just above `b1 = 1/(4 b2)`.
///
/// Starting from `k` blocks, looks for a certified sign change of `g` on
/// `[b1, b1 + 2 C_k]` (escalating `k` up to the cap), then bisects to a
/// bracket of width at most `2^{-prec/2}`. Undecidable signs double the
/// working precision.
pub fn solve_coincidence(beta2: &str, k: usize, config: &SolveConfig) -> Result<Certificate> {
    if k == 0 {
        return Err(Error::Domain("block count must be at least 1".into()));
    }
    with_precision_escalation(config, |prec| solve_at(beta2, k, prec, config))
}

fn point_up(prec: u32, x: &Float) -> Interval {
    let (p, _) = Float::with_val_round(prec, x, Round::Up);
    Interval::point(p)
}

fn sign_of(g: &Interval, at: &str) -> Result<Ordering> {
    match g.sign() {
        Some(Ordering::Equal) | None => Err(Error::Precision(format!(
            "sign of g at {at} is undecided: {g}"
        ))),
        Some(s) => Ok(s),
    }
}

fn solve_at(beta2: &str, k_start: usize, prec: u32, config: &SolveConfig) -> Result<Certificate> {
    let params = boundary_params(beta2, prec)?;
    let b2 = params.beta2();
    let one = Float::with_val(prec, 1);
    let mut recursion = boundary_recursion(beta2, &params, config.limits)?;
    let mut log = Vec::new();

    for k in k_start..=config.k_cap.max(k_start) {
        let trace = recursion.extend_to(k)?.clone();
        let bounds = lemma_bounds_with(&params, &trace, &config.limits)?;

        let lo = point_up(prec, params.beta1().hi());
        let two_ck = &Interval::from_int(prec, 2) * &bounds.c_k;
        let hi = Interval::point(Float::with_val_round(prec, lo.hi() + two_ck.hi(), Round::Up).0);
        if hi.hi() >= &one {
            log.push(format!("k={k} n={}: bracket end {} >= 1", trace.len(), hi.to_f64()));
            continue;
        }
        let g_lo = gap(&trace, &lo, b2);
        if sign_of(&g_lo, "b1")? != Ordering::Greater {
            return Err(Error::Construction(format!("g(b1) = {g_lo} is not positive")));
        }
        let g_hi = gap(&trace, &hi, b2);
        if sign_of(&g_hi, "b1 + 2 C_k")? != Ordering::Less {
            log.push(format!("k={k} n={}: g(b1 + 2 C_k) = {} >= 0", trace.len(), g_hi.to_f64()));
            continue;
        }

        let (lo, hi, g_lo, g_hi) = bisect(&trace, b2, lo, hi, g_lo, g_hi, prec)?;
        let bracket = Interval::new(lo.hi().clone(), hi.hi().clone());
        let bracket_params = Params::new(bracket, b2.clone())?;
        let dimension = classify(&bracket_params, Some(trace.len()))?;
        return Ok(Certificate {
            beta2: beta2.trim().to_string(),
            beta1_boundary: params.beta1().clone(),
            bracket: (lo.hi().clone(), hi.hi().clone()),
            k,
            n: trace.len(),
            s_word: trace.s_word(),
            t_word: trace.t_word(),
            b: bounds.b,
            c_k: bounds.c_k,
            c: bounds.c,
            lambda: bounds.lambda,
            dim_bound: dimension.dim_bound.clone(),
            singular: dimension.regime == crate::dimension::Regime::CertifiedSingular,
            precision_bits: prec,
            gap_at_lo: g_lo,
            gap_at_hi: g_hi,
            dimension,
            trace,
        });
    }
    Err(Error::Construction(format!(
        "no certified sign change of g for k in {k_start}..={}:\n  {}",
        config.k_cap,
        log.join("\n  ")
    )))
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    trace: &ConstructionTrace,
    beta2: &Interval,
    mut lo: Interval,
    mut hi: Interval,
    mut g_lo: Interval,
    mut g_hi: Interval,
    prec: u32,
) -> Result<(Interval, Interval, Interval, Interval)> {
    let target = Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)));
    loop {
        let width = Float::with_val_round(prec, hi.hi() - lo.hi(), Round::Up).0;
        if width <= target {
            return Ok((lo, hi, g_lo, g_hi));
        }
        let mut mid = Float::with_val(prec, lo.hi() + hi.hi());
        mid /= 2;
        if &mid <= lo.hi() || &mid >= hi.hi() {
            return Err(Error::Precision(format!(
                "bracket cannot shrink below {} at {prec} bits",
                width.to_f64()
            )));
        }
        let mid = Interval::point(mid);
        let g_mid = gap(trace, &mid, beta2);
        match sign_of(&g_mid, "a bisection point")? {
            Ordering::Greater => {
                lo = mid;
                g_lo = g_mid;
            }
            _ => {
                hi = mid;
                g_hi = g_mid;
            }
        }
    }
}

/// One row of the block-count schedule used by [`find_exceptional`].
#[derive(Clone, Debug)]
pub struct KStep {
    pub k: usize,
    pub n: u64,
    /// `c λ^n`, the width of the a-priori root bracket.
    pub bracket_bound: Interval,
    /// `(2^n - 1)^{-2/n} - (1/4 + c b2 λ^n)`; positive means the a-priori
    /// bracket lies inside `D_n`.
    pub domain_margin: Interval,
    pub epsilon_ok: bool,
    pub domain_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ExceptionalRun {
    pub certificate: Certificate,
    pub schedule: Vec<KStep>,
    /// First `k` with `c λ^{n_k} < ε`.
    pub k_epsilon: usize,
    /// First `k` that also satisfies `1/4 + c b2 λ^{n_k} < (2^n - 1)^{-2/n}`.
    pub k_domain: Option<usize>,
}

/// Searches for an exceptional `b1 ∈ (1/(4 b2), 1/(4 b2) + ε)`.
///
/// Escalates `k` from `k_start` until `c λ^{n_k} < ε` and the a-priori
/// bracket fits in `D_{n_k}`, then certifies the root. When no `k` up to the
/// cap meets the second condition, the root is certified at the first `k`
/// meeting the first one and the certificate records the (non-singular)
/// verdict it gets.
pub fn find_exceptional(
    beta2: &str,
    epsilon: &str,
    k_start: usize,
    config: &SolveConfig,
) -> Result<ExceptionalRun> {
    if k_start == 0 || k_start > config.k_cap {
        return Err(Error::Domain(format!(
            "k_start must lie in 1..={}, got {k_start}",
            config.k_cap
        )));
    }
    let (schedule, k_epsilon, k_domain) = with_precision_escalation(config, |prec| {
        schedule_at(beta2, epsilon, k_start, prec, config)
    })?;
    let k_epsilon = k_epsilon.ok_or_else(|| {
        Error::Construction(format!(
            "c λ^n stays >= {epsilon} for every k <= {}",
            config.k_cap
        ))
    })?;
    let certificate = solve_coincidence(beta2, k_domain.unwrap_or(k_epsilon), config)?;
    Ok(ExceptionalRun {
        certificate,
        schedule,
        k_epsilon,
        k_domain,
    })
}

type Schedule = (Vec<KStep>, Option<usize>, Option<usize>);

fn schedule_at(
    beta2: &str,
    epsilon: &str,
    k_start: usize,
    prec: u32,
    config: &SolveConfig,
) -> Result<Schedule> {
    let params = boundary_params(beta2, prec)?;
    let eps = parse_real(epsilon, prec)?;
    if eps.sign() != Some(Ordering::Greater) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let (_, c, lambda) = parameter_bounds(&params, &config.limits)?;
    let c_b2 = &c * params.beta2();
    let mut recursion = boundary_recursion(beta2, &params, config.limits)?;
    let mut schedule = Vec::new();
    let (mut k_epsilon, mut k_domain) = (None, None);
    for k in 1..=config.k_cap {
        let n = recursion.extend_to(k)?.len();
        if k < k_start {
            continue;
        }
        let lambda_n = lambda.powu(n);
        let bracket_bound = &c * &lambda_n;
        let lhs = &quarter(prec) + &(&c_b2 * &lambda_n);
        let domain_margin = &singularity_threshold(n, prec)? - &lhs;
        let epsilon_ok = bracket_bound.lt(&eps) == Some(true);
        let domain_ok = domain_margin.sign() == Some(Ordering::Greater);
        schedule.push(KStep {
            k,
            n,
            bracket_bound,
            domain_margin,
            epsilon_ok,
            domain_ok,
        });
        if epsilon_ok && k_epsilon.is_none() {
            k_epsilon = Some(k);
        }
        if epsilon_ok && domain_ok {
            k_domain = Some(k);
            break;
        }
    }
    Ok((schedule, k_epsilon, k_domain))
}
