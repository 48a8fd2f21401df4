use std::cmp::Ordering;
use std::collections::BTreeMap;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::ConstructionTrace;
use crate::dimension::{dim_bound_coincidence, singularity_threshold, DimensionRecord, DimensionReport};
use crate::error::{Error, Result};
use crate::ifs::{compose, Params};
use crate::interval::{float_to_decimal, Interval};
use crate::word::SymbolWord;

pub const SCHEMA_VERSION: u32 = 1;

/// A certified exceptional parameter: a bracket `[lo, hi]` on which
/// `g = V_t - V_s` changes sign, so `T_s = T_t` for some `b1` inside it.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// `b2` exactly as given.
    pub beta2: String,
    pub beta1_boundary: Interval,
    pub bracket: (Float, Float),
    pub k: usize,
    pub n: u64,
    pub s_word: SymbolWord,
    pub t_word: SymbolWord,
    pub b: Interval,
    pub c_k: Interval,
    pub c: Interval,
    pub lambda: Interval,
    pub dim_bound: Interval,
    pub singular: bool,
    pub precision_bits: u32,
    pub gap_at_lo: Interval,
    pub gap_at_hi: Interval,
    pub dimension: DimensionReport,
    pub trace: ConstructionTrace,
}

impl Certificate {
    pub fn bracket_interval(&self) -> Interval {
        Interval::new(self.bracket.0.clone(), self.bracket.1.clone())
    }

    /// Midpoint of the bracket.
    pub fn beta1_estimate(&self) -> Float {
        self.bracket_interval().mid()
    }

    pub fn to_record(&self) -> CertificateRecord {
        CertificateRecord {
            schema_version: SCHEMA_VERSION,
            beta2: self.beta2.clone(),
            beta1_boundary: self.beta1_boundary.to_decimal(),
            bracket: [
                float_to_decimal(&self.bracket.0),
                float_to_decimal(&self.bracket.1),
            ],
            k: self.k,
            n: self.n,
            s_word: self.s_word.clone(),
            t_word: self.t_word.clone(),
            b: self.b.to_decimal(),
            c_k: self.c_k.to_decimal(),
            c: self.c.to_decimal(),
            lambda: self.lambda.to_decimal(),
            dim_bound: self.dim_bound.to_decimal(),
            singular: self.singular,
            precision_bits: self.precision_bits,
            dimension: self.dimension.to_record(),
            input: BTreeMap::new(),
        }
    }
}

/// JSON form of a [`Certificate`]. Reals are decimal strings; bracket
/// endpoints are exact at `precision_bits`, other reals are enclosure
/// midpoints. Words are arrays of `[symbol, count]` runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub schema_version: u32,
    pub beta2: String,
    pub beta1_boundary: String,
    pub bracket: [String; 2],
    pub k: usize,
    pub n: u64,
    pub s_word: SymbolWord,
    pub t_word: SymbolWord,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(rename = "C_k")]
    pub c_k: String,
    pub c: String,
    pub lambda: String,
    pub dim_bound: String,
    pub singular: bool,
    pub precision_bits: u32,
    pub dimension: DimensionRecord,
    /// Echo of the inputs that produced the certificate.
    #[serde(default)]
    pub input: BTreeMap<String, String>,
}

fn parse_float(text: &str, prec: u32, field: &str) -> Result<Float> {
    let parsed = Float::parse(text)
        .map_err(|e| Error::Domain(format!("{field}: cannot parse {text:?}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

fn fail(msg: impl Into<String>) -> Error {
    Error::Construction(format!("certificate check failed: {}", msg.into()))
}

impl CertificateRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: CertificateRecord = serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("malformed certificate: {e}")))?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(Error::Domain(format!(
                "unsupported schema_version {}",
                record.schema_version
            )));
        }
        Ok(record)
    }

    /// Re-checks the certificate from its words alone, evaluating both maps
    /// through the generic composition formula rather than the block
    /// polynomials used to find the root.
    pub fn verify(&self) -> Result<()> {
        let prec = self.precision_bits;
        let b2 = crate::ifs::parse_real(&self.beta2, prec)?;
        let lo = parse_float(&self.bracket[0], prec, "bracket[0]")?;
        let hi = parse_float(&self.bracket[1], prec, "bracket[1]")?;
        if lo >= hi {
            return Err(fail("bracket is empty"));
        }
        let boundary = (&Interval::from_int(prec, 4) * &b2).recip();
        if &lo <= boundary.hi() {
            return Err(fail("bracket does not lie strictly above 1/(4 b2)"));
        }

        let (s, t) = (&self.s_word, &self.t_word);
        if s == t {
            return Err(fail("words are equal"));
        }
        if s.len() != self.n || t.len() != self.n {
            return Err(fail("word lengths differ from n"));
        }
        if s.ones() != t.ones() {
            return Err(fail("words have different symbol counts"));
        }

        let gap_at = |x: &Float| -> Result<Interval> {
            let params = Params::new(Interval::point(x.clone()), b2.clone())?;
            let ts = compose(s, &params)?;
            let tt = compose(t, &params)?;
            if !ts.scale.overlaps(&tt.scale) {
                return Err(fail("scales differ"));
            }
            Ok(&tt.translation - &ts.translation)
        };
        if gap_at(&lo)?.sign() != Some(Ordering::Greater) {
            return Err(fail("g(lo) is not certifiably positive"));
        }
        if gap_at(&hi)?.sign() != Some(Ordering::Less) {
            return Err(fail("g(hi) is not certifiably negative"));
        }

        let c_k = Interval::from_decimal(prec, &self.c_k)?;
        let width = Interval::point(Float::with_val(prec, &hi - &lo));
        let two_ck = &Interval::from_int(prec, 2) * &c_k;
        if width.gt(&two_ck) == Some(true) {
            return Err(fail("bracket is wider than 2 C_k"));
        }

        if self.singular {
            let bracket = Params::new(Interval::new(lo, hi), b2)?;
            let threshold = singularity_threshold(self.n, prec)?;
            if bracket.product().lt(&threshold) != Some(true) {
                return Err(fail("singular claimed but b1*b2 is not below the threshold"));
            }
            let dim = dim_bound_coincidence(&bracket, self.n)?;
            if dim.lt(&Interval::from_int(prec, 1)) != Some(true) {
                return Err(fail("singular claimed but the dimension bound is not below 1"));
            }
        }
        Ok(())
    }
}
