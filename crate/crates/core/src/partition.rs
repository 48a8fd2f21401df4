//! The partition of length-`m` words by equality of their composed maps.
//!
//! Two words `s, t` of length `m` fall in the same class when
//! `T_{s_1} ∘ ... ∘ T_{s_m} = T_{t_1} ∘ ... ∘ T_{t_m}`. For irrational
//! parameters this can only be tested up to a tolerance, so classes built
//! here are *candidate* coincidences; certified ones come from the
//! construction module or from [`enumerate_partition_exact`] on rational
//! inputs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::ifs::Params;
use crate::interval::Interval;
use crate::word::SymbolWord;

pub const DEFAULT_DEPTH_CAP: u32 = 24;
pub const EXACT_DEPTH_CAP: u32 = 20;

/// `2^{-prec/2}`.
pub fn default_tolerance(prec: u32) -> f64 {
    2f64.powi(-((prec / 2) as i32))
}

/// Counts and entropy of the level-`m` partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSummary {
    pub depth: u32,
    pub class_count: u64,
    /// Class sizes in non-increasing order; they sum to `2^depth`.
    pub class_sizes: Vec<u64>,
    /// `H(P_m) = -Σ b(P) log b(P)` in nats, with `b` the uniform Bernoulli
    /// weight `|P| / 2^m`.
    pub entropy_nats: f64,
    pub tolerance_used: f64,
    /// Neighbouring maps (same scale) whose translations differ by an
    /// amount in `[tol, 10·tol]`: close calls worth a second look.
    pub near_coincidences: u64,
}

impl PartitionSummary {
    fn from_sizes(depth: u32, mut sizes: Vec<u64>, tol: f64, near: u64) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let total = 2f64.powi(depth as i32);
        let weighted: f64 = sizes
            .iter()
            .filter(|&&s| s > 1)
            .map(|&s| s as f64 * (s as f64).ln())
            .sum();
        let entropy = (depth as f64 * std::f64::consts::LN_2 - weighted / total).max(0.0);
        PartitionSummary {
            depth,
            class_count: sizes.len() as u64,
            class_sizes: sizes,
            entropy_nats: entropy,
            tolerance_used: tol,
            near_coincidences: near,
        }
    }

    /// `H(P_m) / m`.
    pub fn entropy_rate(&self) -> f64 {
        self.entropy_nats / self.depth as f64
    }
}

/// One class of the partition together with its (shared) map.
#[derive(Clone, Debug)]
pub struct PartitionClass {
    /// Words as bit codes, most significant letter first, `1` bit = symbol `2`.
    pub codes: Vec<u32>,
    pub scale: Interval,
    pub translation: Interval,
}

impl PartitionClass {
    pub fn words(&self, depth: u32) -> Vec<SymbolWord> {
        self.codes
            .iter()
            .map(|&c| SymbolWord::from_code(c as u64, depth))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub summary: PartitionSummary,
    pub classes: Vec<PartitionClass>,
}

#[derive(Clone)]
struct Entry {
    code: u32,
    ones: u32,
    translation: Interval,
}

fn check_request(m: u32, tol: f64, cap: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    if m > cap {
        return Err(Error::Resource(format!(
            "depth {m} exceeds the enumeration cap {cap}"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Maps of all words one letter longer: `T_{a s'} = T_a ∘ T_{s'}`.
fn extend(prev: &[Entry], params: &Params, len: u32) -> Vec<Entry> {
    let prec = params.precision_bits();
    let one = Interval::from_int(prec, 1);
    let with_one = prev.par_iter().map(|e| Entry {
        code: e.code,
        ones: e.ones + 1,
        translation: params.beta1() * &e.translation,
    });
    let with_two = prev.par_iter().map(|e| Entry {
        code: e.code | (1 << len),
        ones: e.ones,
        translation: &(params.beta2() * &e.translation) + &one,
    });
    let mut next: Vec<Entry> = with_one.collect();
    next.par_extend(with_two);
    next
}

/// Scale-class id for each possible count of `1`s: counts whose scale
/// enclosures overlap (transitively) share an id.
fn scale_groups(params: &Params, m: u32) -> (Vec<usize>, Vec<Interval>) {
    let scales: Vec<Interval> = (0..=m)
        .map(|ones| &params.beta1().powu(ones as u64) * &params.beta2().powu((m - ones) as u64))
        .collect();
    let mut order: Vec<usize> = (0..=m as usize).collect();
    order.sort_by(|&a, &b| {
        scales[a]
            .lo()
            .partial_cmp(scales[b].lo())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut group = vec![0; scales.len()];
    let mut current = 0;
    let mut reach = scales[order[0]].hi().clone();
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 {
            if scales[idx].lo() > &reach {
                current += 1;
                reach = scales[idx].hi().clone();
            } else if scales[idx].hi() > &reach {
                reach = scales[idx].hi().clone();
            }
        }
        group[idx] = current;
    }
    (group, scales)
}

fn group_level(entries: &[Entry], params: &Params, m: u32, tol: f64) -> Partition {
    let (group_of, scales) = scale_groups(params, m);
    let mut order: Vec<(usize, Float, usize)> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| (group_of[e.ones as usize], e.translation.mid(), i))
        .collect();
    order.par_sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .then(entries[a.2].code.cmp(&entries[b.2].code))
    });

    let tol_f = Float::with_val(53, tol);
    let near_f = Float::with_val(53, 10.0 * tol);
    let mut classes: Vec<PartitionClass> = Vec::new();
    let mut near = 0u64;
    let mut prev: Option<(usize, usize)> = None;
    for &(group, _, idx) in &order {
        let entry = &entries[idx];
        let joins = match prev {
            Some((g, p)) if g == group => {
                let diff = (&entry.translation - &entries[p].translation).mag();
                if diff < tol_f {
                    true
                } else {
                    if diff <= near_f {
                        near += 1;
                    }
                    false
                }
            }
            _ => false,
        };
        if joins {
            let class = classes.last_mut().unwrap();
            class.codes.push(entry.code);
            class.translation = class.translation.hull(&entry.translation);
        } else {
            classes.push(PartitionClass {
                codes: vec![entry.code],
                scale: scales[entry.ones as usize].clone(),
                translation: entry.translation.clone(),
            });
        }
        prev = Some((group, idx));
    }
    for class in &mut classes {
        class.codes.sort_unstable();
    }
    classes.sort_by_key(|c| c.codes[0]);
    let sizes = classes.iter().map(|c| c.codes.len() as u64).collect();
    Partition {
        summary: PartitionSummary::from_sizes(m, sizes, tol, near),
        classes,
    }
}

fn root_entries(params: &Params) -> Vec<Entry> {
    vec![Entry {
        code: 0,
        ones: 0,
        translation: Interval::from_int(params.precision_bits(), 0),
    }]
}

/// Full partition at depth `m` with class membership.
pub fn enumerate_classes(params: &Params, m: u32, tol: f64, cap: u32) -> Result<Partition> {
    check_request(m, tol, cap)?;
    let mut entries = root_entries(params);
    for len in 0..m {
        entries = extend(&entries, params, len);
    }
    Ok(group_level(&entries, params, m, tol))
}

/// Groups the `2^m` level-`m` maps and returns `Card(P_m)` and `H(P_m)`.
pub fn enumerate_partition(params: &Params, m: u32, tol: f64) -> Result<PartitionSummary> {
    Ok(enumerate_classes(params, m, tol, DEFAULT_DEPTH_CAP)?.summary)
}

/// Summaries for every depth `1..=m_max`, sharing one enumeration.
pub fn enumerate_depths(
    params: &Params,
    m_max: u32,
    tol: f64,
    cap: u32,
) -> Result<Vec<PartitionSummary>> {
    check_request(m_max, tol, cap)?;
    let mut entries = root_entries(params);
    let mut out = Vec::with_capacity(m_max as usize);
    for len in 0..m_max {
        entries = extend(&entries, params, len);
        out.push(group_level(&entries, params, len + 1, tol).summary);
    }
    Ok(out)
}

/// Exact partition for rational parameters: classes are certified.
pub fn enumerate_partition_exact(
    beta1: &Rational,
    beta2: &Rational,
    m: u32,
) -> Result<PartitionSummary> {
    check_request(m, 1.0, EXACT_DEPTH_CAP)?;
    if *beta1 <= 0 || *beta1 >= 1 || *beta2 <= 0 || *beta2 >= 1 {
        return Err(Error::Domain("parameters must lie in (0, 1)".into()));
    }
    let symmetric = beta1 == beta2;
    let mut level: Vec<(u32, Rational)> = vec![(0, Rational::new())];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (ones, t) in &level {
            next.push((ones + 1, Rational::from(beta1 * t)));
            next.push((*ones, Rational::from(beta2 * t) + 1u32));
        }
        level = next;
    }
    // distinct positive rationals b1 != b2 give distinct b1^j b2^(m-j)
    let mut classes: BTreeMap<(u32, Rational), u64> = BTreeMap::new();
    for (ones, t) in level {
        let key = if symmetric { 0 } else { ones };
        *classes.entry((key, t)).or_default() += 1;
    }
    Ok(PartitionSummary::from_sizes(
        m,
        classes.into_values().collect(),
        0.0,
        0,
    ))
}

/// Upper bound on the entropy `h(μ)`: `(1/n) log(2^n - 1)` when two distinct
/// words of length `n` give the same map, `log 2` otherwise.
pub fn entropy_upper_bound(n: u64, has_coincidence: bool, prec: u32) -> Result<Interval> {
    if n == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    if !has_coincidence {
        return Ok(Interval::ln2(prec));
    }
    let count = (Integer::from(1) << n as u32) - 1u32;
    let count = Interval::from_integer(prec, &count);
    let n_iv = Interval::from_int(prec, n as i64);
    let bound = &count.ln()? / &n_iv;
    Ok(narrow(bound, prec))
}

fn narrow(x: Interval, prec: u32) -> Interval {
    if x.prec() <= prec {
        return x;
    }
    let (lo, _) = Float::with_val_round(prec, x.lo(), rug::float::Round::Down);
    let (hi, _) = Float::with_val_round(prec, x.hi(), rug::float::Round::Up);
    Interval::new(lo, hi)
}

/// Subadditive estimate of the entropy `h(μ) = lim H(P_m)/m`.
#[derive(Clone, Debug)]
pub struct EntropyEstimate {
    /// `min_{2 <= m <= m_max} H(P_m)/m`.
    pub value: f64,
    pub depth_at_min: u32,
    pub tolerance: f64,
    /// Near coincidences summed over all depths; non-zero means the estimate
    /// is sensitive to the tolerance.
    pub near_coincidences: u64,
    pub per_depth: Vec<PartitionSummary>,
}

pub fn entropy_estimate(params: &Params, m_max: u32, tol: f64) -> Result<EntropyEstimate> {
    if m_max < 2 {
        return Err(Error::Domain("entropy estimate needs m_max >= 2".into()));
    }
    let per_depth = enumerate_depths(params, m_max, tol, DEFAULT_DEPTH_CAP)?;
    let (value, depth_at_min) = per_depth
        .iter()
        .skip(1)
        .map(|s| (s.entropy_rate(), s.depth))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best });
    Ok(EntropyEstimate {
        value,
        depth_at_min,
        tolerance: tol,
        near_coincidences: per_depth.iter().map(|s| s.near_coincidences).sum(),
        per_depth,
    })
}

/// Writes one `class,word,scale,translation` row per word.
pub fn write_classes_csv<W: Write>(partition: &Partition, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "class,word,scale,translation")?;
    let depth = partition.summary.depth;
    for (i, class) in partition.classes.iter().enumerate() {
        for word in class.words(depth) {
            writeln!(
                out,
                "{},{},{},{}",
                i,
                word.to_flat_string(),
                class.scale.to_decimal(),
                class.translation.to_decimal()
            )?;
        }
    }
    Ok(())
}
