//! Exact counting of combinatorial types: families of pairwise-disjoint
//! integer subintervals of [0, n), each of length at least L, the empty
//! family included. Counts overflow u64 well before n = 200, so the
//! recurrence runs on big integers; floating logs are for reporting only.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeCount {
    pub n: usize,
    pub l_min: usize,
    #[serde(with = "biguint_decimal")]
    pub count: BigUint,
    /// log(count)/n (0 when n = 0).
    pub log_rate: f64,
}

mod biguint_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Natural log of a big integer via its top bits.
pub fn log_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        let small: u64 = v.try_into().unwrap_or(u64::MAX);
        return (small as f64).ln();
    }
    let shift = bits - 53;
    let top: u64 = (v >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// T(m) = T(m-1) + Σ_{s=0}^{m-L} T(s), with T(m) = 1 for m ≤ L-1: either the
/// last position is uncovered, or the last interval is [s, m) for some
/// s ≤ m - L.
pub fn count_types(n: usize, l_min: usize) -> TypeCount {
    assert!(l_min >= 1);
    let mut table: Vec<BigUint> = Vec::with_capacity(n + 1);
    let mut prefix = BigUint::from(0u32); // Σ_{s=0}^{m-L} T(s), maintained incrementally
    for m in 0..=n {
        let t = if m < l_min {
            BigUint::from(1u32)
        } else {
            prefix += &table[m - l_min];
            &table[m - 1] + &prefix
        };
        table.push(t);
    }
    let count = table.pop().unwrap();
    let log_rate = if n == 0 { 0.0 } else { log_biguint(&count) / n as f64 };
    TypeCount { n, l_min, count, log_rate }
}
