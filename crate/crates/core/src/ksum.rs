//! Kloosterman sums K(a) = Σ_{x ∈ F*} (−1)^Tr(a·x + 1/x) over GF(2^m).
//!
//! Single values are summed directly. Whole-field tables come in two
//! flavours: a naive O(q²) loop, and a spectral O(q log q) build that runs a
//! Walsh–Hadamard transform over g(x) = (−1)^Tr(1/x) (with g(0) = +1) and
//! reads K(a) = ĝ(T·a) − 1, where T is the field's trace-dual matrix.
//!
//! K(0) is the literal value of the sum at a = 0, namely −1.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};

/// Largest degree accepted by [`kloosterman_table_naive`].
pub const NAIVE_MAX_DEGREE: u32 = 16;
/// Largest degree accepted by [`kloosterman_table_fast`].
pub const FAST_MAX_DEGREE: u32 = 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KsumError {
    #[error("naive Kloosterman table costs O(q^2); refusing m = {m} > {NAIVE_MAX_DEGREE} (use the spectral table)")]
    NaiveTooLarge { m: u32 },
    #[error("spectral Kloosterman table needs 2^m i32 slots; refusing m = {m} > {FAST_MAX_DEGREE}")]
    FastTooLarge { m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Spectral,
}

/// K(a) for every a ∈ F, indexed by coefficient vector.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    field: FieldSpec,
    values: Vec<i32>,
    method: Method,
}

impl KloostermanTable {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    #[inline]
    pub fn get(&self, a: FieldElement) -> i64 {
        self.values[a.index()] as i64
    }

    /// CSV with header `a_hex,K,K_mod12`, ascending in a.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "a_hex,K,K_mod12")?;
        for (a, &k) in self.values.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                FieldElement::from_bits(a as u32),
                k,
                residue_mod(k as i64, 12)
            )?;
        }
        out.flush()
    }
}

/// Mathematical residue of `k` in `[0, modulus)`.
pub fn residue_mod(k: i64, modulus: u64) -> u64 {
    assert!(modulus > 0, "modulus must be positive");
    k.rem_euclid(modulus as i64) as u64
}

#[inline]
fn sign(bit: u8) -> i64 {
    1 - 2 * bit as i64
}

/// K(a) by direct summation over F*.
pub fn kloosterman(field: &FieldSpec, a: FieldElement) -> i64 {
    field
        .elements()
        .skip(1)
        .map(|x| {
            let inv = field.inv(x).expect("x is nonzero");
            sign(field.trace(field.mul(a, x)) ^ field.trace(inv))
        })
        .sum()
}

pub fn kloosterman_table_naive(field: &FieldSpec) -> Result<KloostermanTable, KsumError> {
    let m = field.degree();
    if m > NAIVE_MAX_DEGREE {
        return Err(KsumError::NaiveTooLarge { m });
    }
    let inv_trace: Vec<u8> = field
        .elements()
        .map(|x| match field.inv(x) {
            Ok(y) => field.trace(y),
            Err(_) => 0,
        })
        .collect();
    let values = (0..field.size())
        .into_par_iter()
        .map(|a| {
            let a = FieldElement::from_bits(a as u32);
            let mut acc = 0i32;
            for x in field.elements().skip(1) {
                let bit = field.trace(field.mul(a, x)) ^ inv_trace[x.index()];
                acc += 1 - 2 * bit as i32;
            }
            acc
        })
        .collect();
    Ok(KloostermanTable {
        field: field.clone(),
        values,
        method: Method::Naive,
    })
}

pub fn kloosterman_table_fast(field: &FieldSpec) -> Result<KloostermanTable, KsumError> {
    let m = field.degree();
    if m > FAST_MAX_DEGREE {
        return Err(KsumError::FastTooLarge { m });
    }
    let mut spectrum = inverse_trace_signs(field);
    walsh_hadamard(&mut spectrum);
    let values = (0..field.size())
        .into_par_iter()
        .map(|a| spectrum[field.dual_apply(FieldElement::from_bits(a as u32)) as usize] - 1)
        .collect();
    Ok(KloostermanTable {
        field: field.clone(),
        values,
        method: Method::Spectral,
    })
}

const INVERSION_CHUNK: usize = 1 << 12;

/// g(x) = (−1)^Tr(1/x) for x ≠ 0 and g(0) = +1, using batched inversion.
fn inverse_trace_signs(field: &FieldSpec) -> Vec<i32> {
    let mut signs = vec![1i32; field.size()];
    signs
        .par_chunks_mut(INVERSION_CHUNK)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let start = chunk_idx * INVERSION_CHUNK;
            // prefix[i] = product of the nonzero elements start..=start+i
            let mut prefix = Vec::with_capacity(chunk.len());
            let mut acc = FieldElement::ONE;
            for i in 0..chunk.len() {
                let x = FieldElement::from_bits((start + i) as u32);
                if !x.is_zero() {
                    acc = field.mul(acc, x);
                }
                prefix.push(acc);
            }
            let mut inv_acc = field.inv(acc).expect("product of nonzero elements");
            for i in (0..chunk.len()).rev() {
                let x = FieldElement::from_bits((start + i) as u32);
                if x.is_zero() {
                    continue;
                }
                let before = if i == 0 { FieldElement::ONE } else { prefix[i - 1] };
                let x_inv = field.mul(inv_acc, before);
                inv_acc = field.mul(inv_acc, x);
                chunk[i] = 1 - 2 * field.trace(x_inv) as i32;
            }
        });
    signs
}

/// In-place unnormalized Walsh–Hadamard transform:
/// out[w] = Σ_x in[x]·(−1)^popcount(w & x). Length must be a power of two.
pub fn walsh_hadamard(data: &mut [i32]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "transform length must be a power of two");
    let mut h = 1;
    while h < n {
        data.par_chunks_mut(2 * h).for_each(|block| {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        });
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(m: u32) -> FieldSpec {
        FieldSpec::with_default_poly(m).unwrap()
    }

    fn e(bits: u32) -> FieldElement {
        FieldElement::from_bits(bits)
    }

    /// Sum with inverses found by exhaustive search, independent of `inv`.
    fn kloosterman_enumerated(f: &FieldSpec, a: FieldElement) -> i64 {
        let mut total = 0;
        for x in f.elements().skip(1) {
            let x_inv = f.elements().find(|&y| f.mul(x, y) == FieldElement::ONE).unwrap();
            let t = f.trace_by_definition(f.add(f.mul(a, x), x_inv));
            total += if t == 0 { 1 } else { -1 };
        }
        total
    }

    #[test]
    fn single_value_examples() {
        assert_eq!(kloosterman(&gf(2), FieldElement::ONE), 3);
        assert_eq!(kloosterman(&gf(3), FieldElement::ONE), -5);
        assert_eq!(kloosterman(&gf(3), e(0b111)), 3);
        for m in 1..=6 {
            assert_eq!(kloosterman(&gf(m), FieldElement::ZERO), -1);
        }
    }

    #[test]
    fn direct_sum_matches_enumeration_oracle() {
        for m in 1..=6 {
            let f = gf(m);
            for a in f.elements() {
                assert_eq!(kloosterman(&f, a), kloosterman_enumerated(&f, a));
            }
        }
        assert_eq!(kloosterman_enumerated(&gf(3), e(0b111)), 3);
    }

    #[test]
    fn residues() {
        assert_eq!(residue_mod(-1, 12), 11);
        assert_eq!(residue_mod(-5, 12), 7);
        assert_eq!(residue_mod(3, 12), 3);
        assert_eq!(residue_mod(-24, 12), 0);
    }

    #[test]
    fn gf4_tables() {
        let f = gf(2);
        let naive = kloosterman_table_naive(&f).unwrap();
        let fast = kloosterman_table_fast(&f).unwrap();
        assert_eq!(naive.values(), &[-1, 3, -1, -1]);
        assert_eq!(fast.values(), &[-1, 3, -1, -1]);
        assert_eq!(naive.method(), Method::Naive);
        assert_eq!(fast.method(), Method::Spectral);
    }

    #[test]
    fn gf8_value_set() {
        let t = kloosterman_table_fast(&gf(3)).unwrap();
        for &k in &t.values()[1..] {
            assert!([-5, -1, 3].contains(&k), "{k}");
            assert_eq!((k + 1).rem_euclid(4), 0);
        }
    }

    #[test]
    fn fast_matches_naive_m_le_12_both_polys() {
        for m in 1..=12 {
            let mut polys = vec![None];
            if let Some(alt) = (crate::field::poly::default_poly(m).unwrap() + 1..(1 << (m + 1)))
                .find(|&p| crate::field::poly::is_irreducible(p))
            {
                polys.push(Some(alt));
            }
            for poly in polys {
                let f = FieldSpec::new(m, poly).unwrap();
                let naive = kloosterman_table_naive(&f).unwrap();
                let fast = kloosterman_table_fast(&f).unwrap();
                assert_eq!(naive.values(), fast.values(), "m={m} poly={poly:?}");
            }
        }
    }

    #[test]
    fn full_sum_is_zero() {
        for m in 1..=14 {
            let t = kloosterman_table_fast(&gf(m)).unwrap();
            assert_eq!(t.values().iter().map(|&k| k as i64).sum::<i64>(), 0);
        }
    }

    #[test]
    fn guards() {
        assert_eq!(
            kloosterman_table_naive(&gf(17)).unwrap_err(),
            KsumError::NaiveTooLarge { m: 17 }
        );
        assert_eq!(
            kloosterman_table_fast(&gf(29)).unwrap_err(),
            KsumError::FastTooLarge { m: 29 }
        );
    }

    #[test]
    fn walsh_hadamard_matches_definition() {
        let input: Vec<i32> = (0..32).map(|i| i * 7 % 5 - 2).collect();
        let mut fast = input.clone();
        walsh_hadamard(&mut fast);
        for (w, &got) in fast.iter().enumerate() {
            let expected: i32 = input
                .iter()
                .enumerate()
                .map(|(x, &v)| if (w & x).count_ones() % 2 == 0 { v } else { -v })
                .sum();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn csv_layout() {
        let t = kloosterman_table_fast(&gf(2)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a_hex,K,K_mod12\n0x0,-1,11\n0x1,3,3\n0x2,-1,11\n0x3,-1,11\n"
        );
    }
}
