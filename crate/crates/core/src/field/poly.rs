//! Polynomials over GF(2) packed into a `u64` (bit i = coefficient of x^i).
//!
//! Only what field construction needs: degree, remainder, gcd, and an
//! irreducibility test that reports the degree of the smallest factor.

/// Lexicographically smallest irreducible polynomial of each degree 1..=32,
/// with degree 1 taken as x+1 so that x is a unit in every default field.
pub const DEFAULT_POLYS: [u64; 32] = [
    0x3,
    0x7,
    0xB,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11B,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201B,
    0x4021,
    0x8003,
    0x1002B,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001B,
    0x2000009,
    0x400001B,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008D,
];

/// Default reduction polynomial for degree `m`, if `m` is in 1..=32.
pub fn default_poly(m: u32) -> Option<u64> {
    if (1..=32).contains(&m) {
        Some(DEFAULT_POLYS[(m - 1) as usize])
    } else {
        None
    }
}

/// Degree of `p`; `None` for the zero polynomial.
#[inline]
pub fn degree(p: u64) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros())
    }
}

/// Remainder of `a` modulo the nonzero polynomial `f`.
pub fn rem(mut a: u64, f: u64) -> u64 {
    let df = degree(f).expect("division by the zero polynomial");
    while let Some(da) = degree(a) {
        if da < df {
            break;
        }
        a ^= f << (da - df);
    }
    a
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Carryless product of two polynomials of degree < 32.
#[inline]
pub fn clmul32(a: u32, b: u32) -> u64 {
    let a = a as u64;
    let mut b = b;
    let mut acc = 0u64;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= a << i;
        b &= b - 1;
    }
    acc
}

/// `a * b mod f` for `a, b` already reduced modulo `f` (deg f ≤ 32).
fn mulmod(a: u64, b: u64, f: u64) -> u64 {
    rem(clmul32(a as u32, b as u32), f)
}

/// Outcome of an irreducibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factorization {
    Irreducible,
    /// Smallest degree among the irreducible factors.
    Reducible { factor_degree: u32 },
}

/// Ben-Or test: `f` of degree m is irreducible iff gcd(x^(2^i) − x, f) = 1
/// for every i ≤ m/2. The first i with a nontrivial gcd is the degree of the
/// smallest irreducible factor.
pub fn factorization(f: u64) -> Factorization {
    let m = degree(f).expect("zero polynomial has no factorization");
    assert!(m <= 32, "polynomials of degree > 32 are not supported");
    if m <= 1 {
        return Factorization::Irreducible;
    }
    let x = rem(0b10, f);
    let mut t = x;
    for i in 1..=m / 2 {
        t = mulmod(t, t, f);
        if gcd(f, t ^ x) != 1 {
            return Factorization::Reducible { factor_degree: i };
        }
    }
    Factorization::Irreducible
}

pub fn is_irreducible(f: u64) -> bool {
    f != 0 && factorization(f) == Factorization::Irreducible
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trial division by every polynomial of degree 1..=deg/2.
    fn smallest_factor_by_trial_division(f: u64) -> Option<u32> {
        let m = degree(f).unwrap();
        for d in 1..=m / 2 {
            for g in (1u64 << d)..(1u64 << (d + 1)) {
                if rem(f, g) == 0 {
                    return Some(d);
                }
            }
        }
        None
    }

    #[test]
    fn ben_or_matches_trial_division_up_to_degree_12() {
        for f in 2u64..(1 << 13) {
            let expected = match smallest_factor_by_trial_division(f) {
                None => Factorization::Irreducible,
                Some(d) => Factorization::Reducible { factor_degree: d },
            };
            assert_eq!(factorization(f), expected, "f = {f:#x}");
        }
    }

    #[test]
    fn default_table_is_smallest_irreducible_by_trial_division() {
        for m in 2..=16u32 {
            let first = ((1u64 << m)..(1u64 << (m + 1)))
                .find(|&f| smallest_factor_by_trial_division(f).is_none())
                .unwrap();
            assert_eq!(default_poly(m), Some(first), "m = {m}");
        }
        assert_eq!(default_poly(1), Some(0b11));
    }

    #[test]
    fn default_table_large_degrees_are_smallest() {
        for m in 17..=32u32 {
            let p = default_poly(m).unwrap();
            assert_eq!(degree(p), Some(m));
            assert!(is_irreducible(p));
            assert!(((1u64 << m)..p).all(|f| !is_irreducible(f)), "m = {m}");
        }
    }

    #[test]
    fn squared_trinomial_reports_quadratic_factor() {
        assert_eq!(
            factorization(0b10101),
            Factorization::Reducible { factor_degree: 2 }
        );
        assert_eq!(
            factorization(0b10110),
            Factorization::Reducible { factor_degree: 1 }
        );
    }
}
