//! Solution counts for the system over GF(2^m)
//!
//! ```text
//! x + y + z + u                     = 1
//! u² + xy + xz + xu + yz + yu + zu  = b²
//! x³ + y³ + z³ + u³                 = c
//! ```
//!
//! with x, y, z, u pairwise distinct. Three routes are provided: exhaustive
//! enumeration, the sum over v ∈ F∖{0,1} that defines M2(b,c), and the closed
//! forms in terms of K(k1·k2).
//!
//! Enumeration counts ordered tuples. The closed forms count solutions up to
//! reordering of (x, y, z), so an ordered count is
//! [`ORDERINGS_PER_SOLUTION`] times the closed-form value.

use std::io::{self, Write};

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::ksum::KloostermanTable;

pub type Rational = Ratio<i64>;

/// Largest degree for which enumeration (O(q³)) is attempted.
pub const BRUTE_FORCE_MAX_DEGREE: u32 = 10;

/// Orderings of (x, y, z) within one solution; u stays in the fourth slot.
pub const ORDERINGS_PER_SOLUTION: u64 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoethalsError {
    #[error("enumeration costs O(q^3); refusing m = {m} > {BRUTE_FORCE_MAX_DEGREE}")]
    TooLarge { m: u32 },
}

/// Derived quantities for one (b, c).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub b: FieldElement,
    pub c: FieldElement,
    /// b² + c + 1
    pub k1: FieldElement,
    /// b² + b + c + √c
    pub k2: FieldElement,
    /// Tr(b)
    pub l: u8,
    /// k1·k2 = 0, so the Kloosterman argument leaves F*.
    pub degenerate: bool,
}

pub fn derive_params(field: &FieldSpec, b: FieldElement, c: FieldElement) -> SystemParams {
    let b2 = field.square(b);
    let k1 = field.add(field.add(b2, c), FieldElement::ONE);
    let k2 = field.add(field.add(b2, b), field.add(c, field.sqrt(c)));
    SystemParams {
        b,
        c,
        k1,
        k2,
        l: field.trace(b),
        degenerate: k1.is_zero() || k2.is_zero(),
    }
}

fn check_size(field: &FieldSpec) -> Result<(), GoethalsError> {
    let m = field.degree();
    if m > BRUTE_FORCE_MAX_DEGREE {
        return Err(GoethalsError::TooLarge { m });
    }
    Ok(())
}

struct PowerTables {
    square: Vec<u32>,
    cube: Vec<u32>,
    sqrt: Vec<u32>,
}

impl PowerTables {
    fn new(field: &FieldSpec) -> Self {
        let square: Vec<u32> = field.elements().map(|x| field.square(x).bits()).collect();
        let cube = field
            .elements()
            .map(|x| field.mul(x, FieldElement::from_bits(square[x.index()])).bits())
            .collect();
        let sqrt = field.elements().map(|x| field.sqrt(x).bits()).collect();
        PowerTables { square, cube, sqrt }
    }
}

/// Visits every ordered solution with first coordinate `x`, passing (b, c).
fn sweep_x<F: FnMut(u32, u32)>(field: &FieldSpec, t: &PowerTables, x: u32, mut visit: F) {
    let q = field.order() as u32;
    let fx = FieldElement::from_bits(x);
    for y in 0..q {
        // y = x or y = x + 1 leaves no valid z
        if y == x || y == x ^ 1 {
            continue;
        }
        let s = x ^ y;
        let xy = field.mul(fx, FieldElement::from_bits(y)).bits();
        let cube_xy = t.cube[x as usize] ^ t.cube[y as usize];
        for z in 0..q {
            let u = 1 ^ s ^ z;
            if z == x || z == y || u == x || u == y {
                continue;
            }
            let fz = FieldElement::from_bits(z);
            let fu = FieldElement::from_bits(u);
            let sigma2 = xy
                ^ field.mul(fz, FieldElement::from_bits(s)).bits()
                ^ field.mul(fu, FieldElement::from_bits(s ^ z)).bits();
            let b = t.sqrt[(t.square[u as usize] ^ sigma2) as usize];
            let c = cube_xy ^ t.cube[z as usize] ^ t.cube[u as usize];
            visit(b, c);
        }
    }
}

/// Number of ordered, pairwise distinct (x, y, z, u) solving the system.
pub fn mu2_bruteforce(
    field: &FieldSpec,
    b: FieldElement,
    c: FieldElement,
) -> Result<u64, GoethalsError> {
    check_size(field)?;
    let t = PowerTables::new(field);
    let (b, c) = (b.bits(), c.bits());
    Ok((0..field.order() as u32)
        .into_par_iter()
        .map(|x| {
            let mut n = 0u64;
            sweep_x(field, &t, x, |bb, cc| {
                if bb == b && cc == c {
                    n += 1;
                }
            });
            n
        })
        .sum())
}

/// Ordered solution counts for every (b, c).
#[derive(Clone, Debug)]
pub struct Mu2Table {
    field: FieldSpec,
    /// Row-major by b.
    counts: Vec<u32>,
}

impl Mu2Table {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn ordered(&self, b: FieldElement, c: FieldElement) -> u64 {
        self.counts[b.index() * self.field.size() + c.index()] as u64
    }

    /// Count up to reordering of (x, y, z): the ordered count over six.
    pub fn mu2(&self, b: FieldElement, c: FieldElement) -> Rational {
        Rational::new(self.ordered(b, c) as i64, ORDERINGS_PER_SOLUTION as i64)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&n| n as u64).sum()
    }

    /// CSV with header `b_hex,c_hex,mu2_bruteforce,mu2_closed,degenerate_flag,match`.
    /// `mu2_bruteforce` is the ordered count over six so that both columns
    /// share the closed form's convention.
    pub fn write_csv<W: Write>(&self, ks: &KloostermanTable, mut out: W) -> io::Result<()> {
        assert_eq!(ks.field(), &self.field, "tables built over different fields");
        writeln!(out, "b_hex,c_hex,mu2_bruteforce,mu2_closed,degenerate_flag,match")?;
        for b in self.field.elements() {
            for c in self.field.elements() {
                let brute = self.mu2(b, c);
                let closed = mu2_closed(ks, b, c);
                let degenerate = derive_params(&self.field, b, c).degenerate;
                writeln!(
                    out,
                    "{b},{c},{brute},{closed},{},{}",
                    degenerate as u8,
                    brute == closed
                )?;
            }
        }
        out.flush()
    }
}

/// One O(q³) pass filling the whole (b, c) table. The x-range is split
/// across workers, each with a private table.
pub fn mu2_bruteforce_all(field: &FieldSpec) -> Result<Mu2Table, GoethalsError> {
    check_size(field)?;
    let t = PowerTables::new(field);
    let q = field.size();
    let counts = (0..q as u32)
        .into_par_iter()
        .fold(
            || vec![0u32; q * q],
            |mut acc, x| {
                sweep_x(field, &t, x, |b, c| acc[b as usize * q + c as usize] += 1);
                acc
            },
        )
        .reduce(
            || vec![0u32; q * q],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Mu2Table {
        field: field.clone(),
        counts,
    })
}

/// M2(b, c) from its defining sum over v ∈ F∖{0,1}, taken verbatim:
/// ¼ Σ (1 + (−1)^(Tr(k1/v)+l))·(1 + (−1)^(Tr(k2/v)+l)).
pub fn m2_sum(field: &FieldSpec, params: &SystemParams) -> Rational {
    let mut acc = 0i64;
    for v in field.elements().skip(2) {
        let v_inv = field.inv(v).expect("v ∉ {0, 1}");
        let t1 = field.trace(field.mul(params.k1, v_inv)) ^ params.l;
        let t2 = field.trace(field.mul(params.k2, v_inv)) ^ params.l;
        acc += (1 + sign(t1)) * (1 + sign(t2));
    }
    Rational::new(acc, 4)
}

#[inline]
fn sign(bit: u8) -> i64 {
    1 - 2 * bit as i64
}

/// Closed form ¼(q − 3 + (−1)^Tr(k1)·K(k1k2) − (−1)^Tr(b)·(3 + (−1)^Tr(k1))).
pub fn m2_closed(ks: &KloostermanTable, params: &SystemParams) -> Rational {
    let field = ks.field();
    let q = field.order() as i64;
    let s1 = sign(field.trace(params.k1));
    let k = ks.get(field.mul(params.k1, params.k2));
    Rational::new(q - 3 + s1 * k - sign(params.l) * (3 + s1), 4)
}

/// μ2 = ⅔·M2 when Tr(c) ≠ Tr(1), else ⅔·(M2 − 1).
pub fn mu2_from_m2(m2: Rational, tr_c: u8, tr_one: u8) -> Rational {
    let two_thirds = Rational::new(2, 3);
    if tr_c != tr_one {
        two_thirds * m2
    } else {
        two_thirds * (m2 - 1)
    }
}

/// Closed-form μ2(b, c), split on the parity of m and Tr(c).
pub fn mu2_closed(ks: &KloostermanTable, b: FieldElement, c: FieldElement) -> Rational {
    let field = ks.field();
    let params = derive_params(field, b, c);
    let q = field.order() as i64;
    let k = ks.get(field.mul(params.k1, params.k2));
    let s = sign(params.l);
    let m_odd = field.degree() % 2 == 1;
    let tr_c = field.trace(c);
    let case_one = (m_odd && tr_c == 1) || (!m_odd && tr_c == 0);
    if case_one {
        Rational::new(q - 8 + s * (k - 3), 6)
    } else {
        Rational::new(q - 2 - s * (k + 3), 6)
    }
}

/// A pair where the defining sum for M2 and its closed form differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct M2Discrepancy {
    pub params: SystemParams,
    pub sum: Rational,
    pub closed: Rational,
}

/// Every (b, c) on which [`m2_sum`] and [`m2_closed`] disagree, ascending.
pub fn m2_discrepancies(ks: &KloostermanTable) -> Vec<M2Discrepancy> {
    let field = ks.field();
    let q = field.size();
    (0..q * q)
        .into_par_iter()
        .filter_map(|i| {
            let b = FieldElement::from_bits((i / q) as u32);
            let c = FieldElement::from_bits((i % q) as u32);
            let params = derive_params(field, b, c);
            let sum = m2_sum(field, &params);
            let closed = m2_closed(ks, &params);
            (sum != closed).then_some(M2Discrepancy { params, sum, closed })
        })
        .collect()
}
