//! Lyapunov exponent, entropy/Lyapunov dimension bounds and the parameter
//! regimes they imply. All raw values are in nats; bounds are ratios and do
//! not depend on the logarithm base.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::Params;
use crate::interval::Interval;
use crate::partition::entropy_upper_bound;

/// Informational text for the overlapping regime. The constant is quoted,
/// not recomputed.
pub const GENERIC_AC_NOTE: &str = "no singularity conclusion: in the overlapping regime the measure \
     is absolutely continuous for almost every (b1, b2) with b1, b2 < 0.649; no verdict is made for \
     this parameter";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `b1 b2 < 1/4`: the attractor has Lebesgue measure zero.
    BelowQuarterSingular,
    /// `b1 b2 >= 1/4` without a usable coincidence.
    OverlappingGeneric,
    /// A certified coincidence at depth `n` and `(b1, b2)` in `D_n`.
    CertifiedSingular,
    /// `b1 = b2 > 1/2`, a Bernoulli convolution; no verdict without a
    /// coincidence.
    Symmetric,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::BelowQuarterSingular => "below-quarter-singular",
            Regime::OverlappingGeneric => "overlapping-generic",
            Regime::CertifiedSingular => "certified-singular",
            Regime::Symmetric => "symmetric",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    pub lyapunov: Interval,
    pub entropy_bound: Interval,
    pub dim_bound: Interval,
    pub regime: Regime,
    pub n_used: Option<u64>,
    pub product: Interval,
    pub threshold: Option<Interval>,
    pub notes: Vec<String>,
}

impl DimensionReport {
    /// Whether the report proves `dim_H μ < 1`.
    pub fn is_singular(&self) -> bool {
        matches!(
            self.regime,
            Regime::BelowQuarterSingular | Regime::CertifiedSingular
        )
    }

    pub fn to_record(&self) -> DimensionRecord {
        DimensionRecord {
            regime: self.regime,
            lyapunov: self.lyapunov.to_decimal(),
            entropy_bound: self.entropy_bound.to_decimal(),
            dim_bound: self.dim_bound.to_decimal(),
            n_used: self.n_used,
            product: self.product.to_decimal(),
            threshold: self.threshold.as_ref().map(Interval::to_decimal),
            notes: self.notes.clone(),
        }
    }
}

/// JSON form of a [`DimensionReport`]; reals are midpoint decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionRecord {
    pub regime: Regime,
    pub lyapunov: String,
    pub entropy_bound: String,
    pub dim_bound: String,
    pub n_used: Option<u64>,
    pub product: String,
    pub threshold: Option<String>,
    pub notes: Vec<String>,
}

/// `Ξ(μ) = -(log b1 + log b2) / 2`.
pub fn lyapunov(params: &Params) -> Interval {
    let sum = &params.beta1().ln().expect("b1 > 0") + &params.beta2().ln().expect("b2 > 0");
    let half = Interval::from_int(params.precision_bits(), -2);
    &sum / &half
}

/// `-2 log(2^n - 1) / (n (log b1 + log b2))`: the dimension bound implied by
/// a coincidence `T_s = T_t` between distinct words of length `n`.
pub fn dim_bound_coincidence(params: &Params, n: u64) -> Result<Interval> {
    if n < 1 {
        return Err(Error::Domain("coincidence depth must be at least 1".into()));
    }
    let entropy = entropy_upper_bound(n, true, params.precision_bits())?;
    Ok(&entropy / &lyapunov(params))
}

/// `(2^n - 1)^{-2/n}`: a depth-`n` coincidence forces `dim_H μ < 1` exactly
/// when `b1 b2` is below this value.
pub fn singularity_threshold(n: u64, prec: u32) -> Result<Interval> {
    if n < 1 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let rate = entropy_upper_bound(n, true, prec)?;
    let minus_two = Interval::from_int(rate.prec(), -2);
    Ok((&rate * &minus_two).exp())
}

/// Whether `1/4 < b1 b2 < (2^n - 1)^{-2/n}`.
pub fn in_domain_dn(params: &Params, n: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::Domain("D_n is defined for n >= 2".into()));
    }
    let prec = params.precision_bits();
    let product = params.product();
    let quarter = &Interval::from_int(prec, 1) / &Interval::from_int(prec, 4);
    let threshold = singularity_threshold(n, prec)?;
    match (product.gt(&quarter), product.lt(&threshold)) {
        (Some(false), _) | (_, Some(false)) => Ok(false),
        (Some(true), Some(true)) => Ok(true),
        _ => Err(Error::Precision(format!(
            "b1*b2 = {product} cannot be placed relative to the boundary of D_{n}"
        ))),
    }
}

/// Regime and dimension bound for `params`, optionally using a coincidence
/// at depth `n` certified by the caller.
pub fn classify(params: &Params, certified: Option<u64>) -> Result<DimensionReport> {
    let prec = params.precision_bits();
    let product = params.product();
    let quarter = &Interval::from_int(prec, 1) / &Interval::from_int(prec, 4);
    let lyap = lyapunov(params);
    let below = product.lt(&quarter).ok_or_else(|| {
        Error::Precision(format!("b1*b2 = {product} straddles 1/4"))
    })?;

    if below {
        let entropy_bound = Interval::ln2(prec);
        return Ok(DimensionReport {
            dim_bound: &entropy_bound / &lyap,
            entropy_bound,
            lyapunov: lyap,
            regime: Regime::BelowQuarterSingular,
            n_used: None,
            product,
            threshold: None,
            notes: vec!["b1*b2 < 1/4: singular, dim <= 2 log 2 / -(log b1 + log b2)".into()],
        });
    }

    let generic = if product.gt(&quarter) == Some(true) && params.beta1() == params.beta2() {
        Regime::Symmetric
    } else {
        Regime::OverlappingGeneric
    };

    let Some(n) = certified else {
        let entropy_bound = Interval::ln2(prec);
        return Ok(DimensionReport {
            dim_bound: &entropy_bound / &lyap,
            entropy_bound,
            lyapunov: lyap,
            regime: generic,
            n_used: None,
            product,
            threshold: None,
            notes: vec![GENERIC_AC_NOTE.into()],
        });
    };

    let entropy_bound = entropy_upper_bound(n, true, prec)?;
    let dim_bound = &entropy_bound / &lyap;
    if n == 1 {
        return Ok(DimensionReport {
            lyapunov: lyap,
            entropy_bound,
            dim_bound,
            regime: generic,
            n_used: Some(1),
            product,
            threshold: Some(singularity_threshold(1, prec)?),
            notes: vec![
                "degenerate: T1 and T2 never coincide, so a depth-1 coincidence is impossible \
                 and the zero bound carries no information"
                    .into(),
            ],
        });
    }

    let threshold = singularity_threshold(n, prec)?;
    let (regime, note) = if in_domain_dn(params, n)? {
        (
            Regime::CertifiedSingular,
            format!("coincidence at depth {n} with b1*b2 in D_{n}: singular, dim < 1"),
        )
    } else {
        (
            generic,
            format!("no singularity conclusion: b1*b2 is not below the depth-{n} threshold"),
        )
    };
    Ok(DimensionReport {
        lyapunov: lyap,
        entropy_bound,
        dim_bound,
        regime,
        n_used: Some(n),
        product,
        threshold: Some(threshold),
        notes: vec![note],
    })
}
