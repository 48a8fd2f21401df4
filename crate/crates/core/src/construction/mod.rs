//! Words `s != t` of equal length and symbol counts whose translations
//! nearly agree, and certified isolation of the parameter where they agree
//! exactly.
//!
//! For block counts `N_1..N_k`, `M_1..M_k` the words are
//!
//! ```text
//! s = 1 2^{N_1} 1^{M_1} 2^{N_2} 1^{M_2} ... 2^{N_k} 1^{M_k}
//! t = 2 1^{𝓜} 2^{𝓝 - 1}        𝓝 = Σ N_l,  𝓜 = 1 + Σ M_l
//! ```
//!
//! Both have `𝓜` ones and `𝓝` twos, so `T_s` and `T_t` share the scale
//! `b1^𝓜 b2^𝓝` and coincide iff `V_s = V_t`. The blocks are chosen greedily
//! (each `N_l` maximal, each `M_l` minimal) so that the partial sums
//! `y_l = V_s` creep up to `1` from below, while `V_t = 1 + O(b1^𝓜)`.

mod certificate;
mod solve;

pub use certificate::{Certificate, CertificateRecord, SCHEMA_VERSION};
pub use solve::{
    boundary_params, find_exceptional, solve_coincidence, ExceptionalRun, KStep, SolveConfig,
};

use rug::ops::Pow;
use rug::Rational;

use crate::error::{Error, Result};
use crate::ifs::Params;
use crate::interval::Interval;
use crate::word::{Symbol, SymbolWord};

/// Caps on the recursion: longest admissible run and largest admissible `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructionLimits {
    pub run_cap: u64,
    pub b_cap: f64,
}

impl Default for ConstructionLimits {
    fn default() -> Self {
        ConstructionLimits {
            run_cap: 1_000_000,
            b_cap: 1e6,
        }
    }
}

/// One step of the recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    /// `N_l`, maximal.
    pub twos: u64,
    /// `M_l`, minimal.
    pub ones: u64,
    /// `y_l < 1`.
    pub y: Interval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionTrace {
    blocks: Vec<Block>,
}

impl ConstructionTrace {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block count `k`.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// `𝓝 = N_1 + ... + N_k`.
    pub fn twos_total(&self) -> u64 {
        self.blocks.iter().map(|b| b.twos).sum()
    }

    /// `𝓜 = 1 + M_1 + ... + M_k`.
    pub fn ones_total(&self) -> u64 {
        1 + self.blocks.iter().map(|b| b.ones).sum::<u64>()
    }

    /// Word length `n = 𝓝 + 𝓜`.
    pub fn len(&self) -> u64 {
        self.twos_total() + self.ones_total()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The first `k` blocks. The recursion is deterministic, so this equals
    /// a fresh run with block count `k`.
    pub fn truncated(&self, k: usize) -> ConstructionTrace {
        ConstructionTrace {
            blocks: self.blocks[..k.min(self.blocks.len())].to_vec(),
        }
    }

    /// `s = 1 2^{N_1} 1^{M_1} ... 2^{N_k} 1^{M_k}`.
    pub fn s_word(&self) -> SymbolWord {
        let mut word = SymbolWord::new();
        word.push(Symbol::One);
        for block in &self.blocks {
            word.push_run(Symbol::Two, block.twos);
            word.push_run(Symbol::One, block.ones);
        }
        word
    }

    /// `t = 2 1^{𝓜} 2^{𝓝 - 1}`.
    pub fn t_word(&self) -> SymbolWord {
        SymbolWord::from_runs([
            (Symbol::Two, 1),
            (Symbol::One, self.ones_total()),
            (Symbol::Two, self.twos_total().saturating_sub(1)),
        ])
    }
}

/// Whether `b1 + b2 > 1`, decided on enclosures.
pub fn check_sum_exceeds_one(params: &Params) -> Result<()> {
    let one = Interval::from_int(params.precision_bits(), 1);
    let sum = params.beta1() + params.beta2();
    match sum.gt(&one) {
        Some(true) => Ok(()),
        Some(false) => Err(Error::Precondition(format!(
            "the construction needs b1 + b2 > 1, got {sum}"
        ))),
        None => Err(Error::Precision(format!("cannot decide b1 + b2 > 1: {sum}"))),
    }
}

/// Runs the block recursion for `k` blocks with default limits.
pub fn run_recursion(params: &Params, k: usize) -> Result<ConstructionTrace> {
    run_recursion_with(params, k, &ConstructionLimits::default())
}

pub fn run_recursion_with(
    params: &Params,
    k: usize,
    limits: &ConstructionLimits,
) -> Result<ConstructionTrace> {
    if k == 0 {
        return Err(Error::Domain("block count must be at least 1".into()));
    }
    let mut recursion = Recursion::new(params, *limits)?;
    recursion.extend_to(k)?;
    Ok(recursion.trace().clone())
}

/// Resumable form of the recursion: blocks are produced one at a time, so
/// callers escalating `k` never recompute earlier blocks.
#[derive(Clone, Debug)]
pub struct Recursion {
    beta1: Interval,
    beta2: Interval,
    one: Interval,
    limits: ConstructionLimits,
    y: Interval,
    // b2^{N_1+..+N_{l-1}} b1^{1+M_1+..+M_{l-1}}
    lead: Interval,
    trace: ConstructionTrace,
    exact: Option<(Rational, Rational)>,
}

impl Recursion {
    pub fn new(params: &Params, limits: ConstructionLimits) -> Result<Self> {
        check_sum_exceeds_one(params)?;
        let prec = params.precision_bits();
        Ok(Recursion {
            beta1: params.beta1().clone(),
            beta2: params.beta2().clone(),
            one: Interval::from_int(prec, 1),
            limits,
            y: Interval::from_int(prec, 0),
            lead: params.beta1().clone(),
            trace: ConstructionTrace { blocks: Vec::new() },
            exact: None,
        })
    }

    /// Supplies exact values of `(b1, b2)`, used to settle comparisons with 1
    /// that enclosures cannot decide (the defining sums can equal 1 exactly
    /// for rational parameters).
    pub fn with_exact(mut self, beta1: Rational, beta2: Rational) -> Self {
        self.exact = Some((beta1, beta2));
        self
    }

    /// Exact `y` after the finished blocks plus `run` twos of the current
    /// block, plus `b2^{𝓝} b1^{𝓜 + m}` when `tail_ones = Some(m)`.
    fn exact_sum(&self, b1: &Rational, b2: &Rational, run: u64, tail_ones: Option<u64>) -> Rational {
        let pow = |x: &Rational, e: u64| Rational::from(x.pow(e as u32));
        let mut y = Rational::new();
        let (mut twos, mut ones) = (0u64, 1u64);
        let current = Block { twos: run, ones: 0, y: self.y.clone() };
        for block in self.trace.blocks.iter().chain(std::iter::once(&current)) {
            let lead = pow(b2, twos) * pow(b1, ones);
            for i in 0..block.twos {
                y += Rational::from(&lead * &pow(b2, i));
            }
            twos += block.twos;
            ones += block.ones;
        }
        if let Some(m) = tail_ones {
            y += pow(b2, twos) * pow(b1, ones + m);
        }
        y
    }

    fn below_one(&self, x: &Interval, run: u64, tail_ones: Option<u64>, what: &str) -> Result<bool> {
        match (x.lt(&self.one), &self.exact) {
            (Some(decided), _) => Ok(decided),
            (None, Some((b1, b2))) => Ok(self.exact_sum(b1, b2, run, tail_ones) < 1),
            (None, None) => Err(Error::Precision(format!("cannot decide whether {what} < 1: {x}"))),
        }
    }

    pub fn trace(&self) -> &ConstructionTrace {
        &self.trace
    }

    pub fn extend_to(&mut self, k: usize) -> Result<&ConstructionTrace> {
        while self.trace.k() < k {
            self.next_block()?;
        }
        Ok(&self.trace)
    }

    /// Appends block `l = k + 1`: `N_l` maximal with `y_l < 1`, then `M_l`
    /// minimal with `y_l + b2^{𝓝_l} b1^{𝓜_{l-1} + M_l} < 1`.
    pub fn next_block(&mut self) -> Result<&Block> {
        let l = self.trace.k() + 1;
        let mut y = self.y.clone();
        let mut twos = 0u64;
        let mut term = self.lead.clone();
        loop {
            let candidate = &y + &term;
            if !self.below_one(&candidate, twos + 1, None, &format!("y_{l} with N = {}", twos + 1))? {
                break;
            }
            y = candidate;
            twos += 1;
            term = &term * &self.beta2;
            if twos > self.limits.run_cap {
                return Err(Error::Resource(format!("N_{l} exceeds the run cap")));
            }
        }
        if twos == 0 {
            return Err(Error::Construction(format!("no admissible N_{l} >= 1")));
        }

        let mut ones = 0u64;
        let mut tail = term;
        loop {
            ones += 1;
            tail = &tail * &self.beta1;
            let candidate = &y + &tail;
            if self.below_one(&candidate, twos, Some(ones), &format!("the M_{l} = {ones} test"))? {
                break;
            }
            if ones > self.limits.run_cap {
                return Err(Error::Resource(format!("M_{l} exceeds the run cap")));
            }
        }
        self.y = y.clone();
        self.lead = tail;
        self.trace.blocks.push(Block { twos, ones, y });
        Ok(self.trace.blocks.last().unwrap())
    }
}

/// `V_s(x, b2) = Σ_{j<k} b2^{𝓝_j} x^{𝓜_j} Σ_{i<N_{j+1}} b2^i`, with
/// `𝓝_j = N_1 + .. + N_j` and `𝓜_j = 1 + M_1 + .. + M_j`.
pub fn vs_poly(trace: &ConstructionTrace, x: &Interval, beta2: &Interval) -> Interval {
    let prec = x.prec().max(beta2.prec());
    let mut sum = Interval::from_int(prec, 0);
    let (mut twos, mut ones) = (0u64, 1u64);
    for block in trace.blocks() {
        let lead = &beta2.powu(twos) * &x.powu(ones);
        sum = &sum + &(&lead * &beta2.geometric_sum(block.twos));
        twos += block.twos;
        ones += block.ones;
    }
    sum
}

/// `V_t(x, b2) = 1 + x^𝓜 Σ_{i=1}^{𝓝-1} b2^i`.
pub fn vt_poly(trace: &ConstructionTrace, x: &Interval, beta2: &Interval) -> Interval {
    let prec = x.prec().max(beta2.prec());
    let one = Interval::from_int(prec, 1);
    let twos = trace.twos_total();
    if twos <= 1 {
        return one;
    }
    let tail = &(beta2 * &beta2.geometric_sum(twos - 1)) * &x.powu(trace.ones_total());
    &one + &tail
}

/// `g(x) = V_t(x) - V_s(x)`: positive at `b1`, and its root is the
/// parameter where `T_s = T_t`.
pub fn gap(trace: &ConstructionTrace, x: &Interval, beta2: &Interval) -> Interval {
    &vt_poly(trace, x, beta2) - &vs_poly(trace, x, beta2)
}

/// Bounds controlling the size of the root bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaBounds {
    /// `B = max{1, log_{b2}((b1 + b2 - 1) / b1)}`, bounding `N_l` for `l >= 2`.
    pub b: Interval,
    /// `C_k = (1/b1 + b2/(1-b2)) λ^n`, bounding `g(b1)`.
    pub c_k: Interval,
    /// `c = 2 (1/b1 + b2/(1-b2))`, so that `2 C_k = c λ^n`.
    pub c: Interval,
    /// `λ = b1^{1/(1+B)}`.
    pub lambda: Interval,
    /// `g(b1)`.
    pub gap_at_beta1: Interval,
}

/// `B`, `c` and `λ` depend only on the parameters.
pub fn parameter_bounds(
    params: &Params,
    limits: &ConstructionLimits,
) -> Result<(Interval, Interval, Interval)> {
    check_sum_exceeds_one(params)?;
    let prec = params.precision_bits();
    let (b1, b2) = (params.beta1(), params.beta2());
    let one = Interval::from_int(prec, 1);
    let two = Interval::from_int(prec, 2);

    let ratio = &(&(b1 + b2) - &one) / b1;
    let b = (&ratio.ln()? / &b2.ln()?).max(&one);
    if b.lo().to_f64() > limits.b_cap {
        return Err(Error::Precondition(format!(
            "B = {b} exceeds the cap {} (b1 + b2 is too close to 1)",
            limits.b_cap
        )));
    }
    let lambda = (&b1.ln()? / &(&one + &b)).exp();
    let k_factor = &b1.recip() + &(b2 / &(&one - b2));
    let c = &two * &k_factor;
    Ok((b, c, lambda))
}

/// `B`, `C_k`, `c`, `λ` for `trace`, checking that `g(b1) ∈ (0, C_k]` and
/// `N_l <= B` for `l >= 2`.
pub fn lemma_bounds(params: &Params, trace: &ConstructionTrace) -> Result<LemmaBounds> {
    lemma_bounds_with(params, trace, &ConstructionLimits::default())
}

pub fn lemma_bounds_with(
    params: &Params,
    trace: &ConstructionTrace,
    limits: &ConstructionLimits,
) -> Result<LemmaBounds> {
    let (b, c, lambda) = parameter_bounds(params, limits)?;
    let prec = params.precision_bits();
    let half = &Interval::from_int(prec, 1) / &Interval::from_int(prec, 2);
    let c_k = &(&half * &c) * &lambda.powu(trace.len());

    for (i, block) in trace.blocks().iter().enumerate().skip(1) {
        let n_l = Interval::from_int(prec, block.twos as i64);
        if n_l.gt(&b) == Some(true) {
            return Err(Error::Construction(format!(
                "N_{} = {} exceeds B = {b}",
                i + 1,
                block.twos
            )));
        }
    }

    let gap_at_beta1 = gap(trace, params.beta1(), params.beta2());
    match gap_at_beta1.sign() {
        Some(std::cmp::Ordering::Greater) => {}
        None => return Err(Error::Precision(format!("sign of g(b1) undecided: {gap_at_beta1}"))),
        Some(_) => {
            return Err(Error::Construction(format!(
                "g(b1) = {gap_at_beta1} is not positive"
            )))
        }
    }
    if trace.k() >= 2 {
        match gap_at_beta1.gt(&c_k) {
            Some(false) => {}
            Some(true) => {
                return Err(Error::Construction(format!(
                    "g(b1) = {gap_at_beta1} exceeds C_k = {c_k}"
                )))
            }
            None => {
                return Err(Error::Precision(format!(
                    "cannot compare g(b1) = {gap_at_beta1} with C_k = {c_k}"
                )))
            }
        }
    }
    Ok(LemmaBounds {
        b,
        c_k,
        c,
        lambda,
        gap_at_beta1,
    })
}
