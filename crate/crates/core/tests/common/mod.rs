//! Independent oracles shared by the integration suites. None of them call
//! into the closed forms they are used to check.
#![allow(dead_code)]

use std::collections::HashMap;

use rug::{Float, Rational};

use ifs_core::{Symbol, SymbolWord};

/// `T_w(0)` by applying the step maps one at a time, innermost (last
/// symbol) first.
pub fn fold_translation(word: &SymbolWord, b1: &Float, b2: &Float, prec: u32) -> Float {
    let symbols: Vec<Symbol> = word.symbols().collect();
    let mut x = Float::with_val(prec, 0);
    for s in symbols.iter().rev() {
        match s {
            Symbol::One => x *= b1,
            Symbol::Two => {
                x *= b2;
                x += 1;
            }
        }
    }
    x
}

pub fn fold_scale(word: &SymbolWord, b1: &Float, b2: &Float, prec: u32) -> Float {
    let mut x = Float::with_val(prec, 1);
    for s in word.symbols() {
        match s {
            Symbol::One => x *= b1,
            Symbol::Two => x *= b2,
        }
    }
    x
}

/// `|a - b| <= 2^-bits * max(|b|, 2^-bits)`.
pub fn close_relative(a: &Float, b: &Float, bits: i32) -> bool {
    let prec = a.prec().max(b.prec()) + 64;
    let diff = Float::with_val(prec, a - b).abs();
    let tiny = Float::with_val(prec, Float::i_exp(1, -bits));
    let scale = Float::with_val(prec, b.abs_ref()).max(&tiny);
    diff <= Float::with_val(prec, &scale * &tiny)
}

/// `a + b φ` with `φ = (√5 - 1)/2`, so `φ² = 1 - φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GoldenInt {
    pub a: i64,
    pub b: i64,
}

impl GoldenInt {
    pub fn times_phi(self) -> Self {
        // (a + bφ)φ = aφ + b(1 - φ)
        GoldenInt {
            a: self.b,
            b: self.a - self.b,
        }
    }
}

/// Class sizes of the level-`m` partition at `b1 = b2 = φ`, with every
/// translation computed exactly in `Z[φ]`.
pub fn golden_class_sizes(m: u32) -> Vec<u64> {
    let mut level = vec![GoldenInt { a: 0, b: 0 }];
    for _ in 0..m {
        level = level
            .iter()
            .flat_map(|t| {
                let scaled = t.times_phi();
                [scaled, GoldenInt { a: scaled.a + 1, b: scaled.b }]
            })
            .collect();
    }
    let mut counts: HashMap<GoldenInt, u64> = HashMap::new();
    for t in level {
        *counts.entry(t).or_default() += 1;
    }
    let mut sizes: Vec<u64> = counts.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Words of length `m` (MSB-first codes, set bit = symbol 2) grouped by
/// exact golden translation, only classes with more than one word.
pub fn golden_merged_classes(m: u32) -> Vec<Vec<String>> {
    let mut by_value: HashMap<GoldenInt, Vec<String>> = HashMap::new();
    for code in 0..(1u64 << m) {
        let word = SymbolWord::from_code(code, m);
        let mut t = GoldenInt { a: 0, b: 0 };
        let symbols: Vec<Symbol> = word.symbols().collect();
        for s in symbols.iter().rev() {
            t = t.times_phi();
            if *s == Symbol::Two {
                t.a += 1;
            }
        }
        by_value.entry(t).or_default().push(word.to_flat_string());
    }
    let mut merged: Vec<Vec<String>> = by_value
        .into_values()
        .filter(|v| v.len() > 1)
        .map(|mut v| {
            v.sort();
            v
        })
        .collect();
    merged.sort();
    merged
}

pub fn entropy_of_sizes(m: u32, sizes: &[u64]) -> f64 {
    let total = 2f64.powi(m as i32);
    -sizes
        .iter()
        .map(|&s| {
            let p = s as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// One block of the greedy recursion evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactBlock {
    pub twos: u64,
    pub ones: u64,
    pub y: Rational,
}

/// The greedy recursion in exact rational arithmetic, each `N_l` and `M_l`
/// found by scanning candidates and re-evaluating the defining sums from
/// scratch.
pub fn exact_recursion(b1: &Rational, b2: &Rational, k: usize, scan: u64) -> Vec<ExactBlock> {
    let pow = |x: &Rational, e: u64| -> Rational {
        let mut r = Rational::from(1);
        for _ in 0..e {
            r *= x;
        }
        r
    };
    // y after blocks (N_1, M_1) .. (N_{l-1}, M_{l-1}) and a final run of N twos
    let y_of = |blocks: &[(u64, u64)], n: u64| -> Rational {
        let mut y = Rational::new();
        let (mut twos, mut ones) = (0u64, 1u64);
        for (i, &(nl, ml)) in blocks.iter().chain(std::iter::once(&(n, 0))).enumerate() {
            let lead = Rational::from(&pow(b2, twos) * &pow(b1, ones));
            for j in 0..nl {
                y += Rational::from(&lead * &pow(b2, j));
            }
            twos += nl;
            if i < blocks.len() {
                ones += ml;
            }
        }
        y
    };
    let one = Rational::from(1);
    let mut blocks: Vec<(u64, u64)> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..k {
        let n = (1..=scan)
            .filter(|&n| y_of(&blocks, n) < one)
            .max()
            .expect("some N satisfies y < 1");
        let y = y_of(&blocks, n);
        let twos: u64 = blocks.iter().map(|b| b.0).sum::<u64>() + n;
        let ones_before: u64 = 1 + blocks.iter().map(|b| b.1).sum::<u64>();
        let m = (1..=scan)
            .find(|&m| Rational::from(&y + &(pow(b2, twos) * pow(b1, ones_before + m))) < one)
            .expect("some M satisfies the test");
        blocks.push((n, m));
        out.push(ExactBlock { twos: n, ones: m, y });
    }
    out
}

/// Signs of `T_t(0) - T_s(0)` at `points + 1` equally spaced abscissae of
/// `[lo, hi]`, evaluated by step folds at `prec` bits.
pub fn gap_signs_on_grid(
    s: &SymbolWord,
    t: &SymbolWord,
    b2: &Float,
    lo: &Float,
    hi: &Float,
    points: u32,
    prec: u32,
) -> Vec<(Float, std::cmp::Ordering)> {
    (0..=points)
        .map(|i| {
            let step = Float::with_val(prec, hi - lo) * i / points;
            let x = Float::with_val(prec, lo + &step);
            let g = Float::with_val(
                prec,
                fold_translation(t, &x, b2, prec) - fold_translation(s, &x, b2, prec),
            );
            let sign = g.cmp0().expect("gap is a number");
            (x, sign)
        })
        .collect()
}

pub fn sign_changes(signs: &[(Float, std::cmp::Ordering)]) -> usize {
    signs.windows(2).filter(|w| w[0].1 != w[1].1).count()
}
