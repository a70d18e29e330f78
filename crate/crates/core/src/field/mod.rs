//! Arithmetic in GF(2^m), 1 ≤ m ≤ 32, in a polynomial basis.
//!
//! An element is the integer whose bit i is the coefficient of α^i, where α
//! is the class of x modulo the reduction polynomial. Addition is XOR;
//! multiplication is a carryless product followed by reduction.

pub mod poly;

use std::fmt;

use thiserror::Error;

use self::poly::Factorization;

pub const MAX_DEGREE: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#X} has degree {actual}, expected {expected}")]
    WrongDegree { poly: u64, expected: u32, actual: i64 },
    #[error("polynomial {poly:#X} is reducible: it has an irreducible factor of degree {factor_degree}")]
    Reducible { poly: u64, factor_degree: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("element {bits:#X} does not fit in GF(2^{m})")]
    ElementOutOfRange { bits: u64, m: u32 },
    #[error("malformed hex value {0:?}")]
    MalformedHex(String),
}

/// An element of GF(2^m) as its coefficient vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw coefficient vector. Range is not checked here; use
    /// [`FieldSpec::element`] for untrusted input.
    #[inline]
    pub const fn from_bits(bits: u32) -> Self {
        FieldElement(bits)
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#X}", self.0)
    }
}

/// Parses `0x`-prefixed (or bare) hexadecimal.
pub fn parse_hex(s: &str) -> Result<u64, FieldError> {
    let t = s.trim();
    let digits = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .unwrap_or(t);
    if digits.is_empty() {
        return Err(FieldError::MalformedHex(s.to_string()));
    }
    u64::from_str_radix(digits, 16).map_err(|_| FieldError::MalformedHex(s.to_string()))
}

/// Solutions of x² + p·x + r = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticRoots {
    NoRoots,
    OneRoot(FieldElement),
    /// Two distinct roots, smaller coefficient vector first.
    TwoRoots(FieldElement, FieldElement),
}

impl QuadraticRoots {
    pub fn roots(&self) -> Vec<FieldElement> {
        match *self {
            QuadraticRoots::NoRoots => vec![],
            QuadraticRoots::OneRoot(x) => vec![x],
            QuadraticRoots::TwoRoots(x, y) => vec![x, y],
        }
    }

    pub fn count(&self) -> usize {
        match self {
            QuadraticRoots::NoRoots => 0,
            QuadraticRoots::OneRoot(_) => 1,
            QuadraticRoots::TwoRoots(..) => 2,
        }
    }
}

/// A validated GF(2^m) instance with its trace tables.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    m: u32,
    poly: u64,
    trace_mask: u32,
    /// Column i is T·α^i, where parity((T·a) & x) = Tr(a·x).
    dual_cols: Vec<u32>,
    /// Echelon basis of the image of y ↦ y² + y, indexed by pivot bit:
    /// `(image, preimage)`, or `(0, 0)` where no vector has that pivot.
    artin_basis: Vec<(u32, u32)>,
}

impl FieldSpec {
    /// Builds GF(2^m) with `poly` or, if absent, the default table entry.
    pub fn new(m: u32, poly: Option<u64>) -> Result<Self, FieldError> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        let poly = match poly {
            Some(p) => p,
            None => poly::default_poly(m).expect("degree already range-checked"),
        };
        let actual = poly::degree(poly).map_or(-1, |d| d as i64);
        if actual != m as i64 {
            return Err(FieldError::WrongDegree {
                poly,
                expected: m,
                actual,
            });
        }
        if let Factorization::Reducible { factor_degree } = poly::factorization(poly) {
            return Err(FieldError::Reducible {
                poly,
                factor_degree,
            });
        }

        let mut field = FieldSpec {
            m,
            poly,
            trace_mask: 0,
            dual_cols: Vec::new(),
            artin_basis: Vec::new(),
        };

        // Tr(α^k) for k < 2m - 1, from the defining sum.
        let mut alpha_pow = FieldElement::ONE;
        let alpha = field.alpha();
        let mut tr_pow = Vec::with_capacity(2 * m as usize);
        for _ in 0..(2 * m - 1) {
            tr_pow.push(field.trace_by_definition(alpha_pow));
            alpha_pow = field.mul(alpha_pow, alpha);
        }
        field.trace_mask = (0..m).fold(0, |acc, i| acc | ((tr_pow[i as usize] as u32) << i));
        field.dual_cols = (0..m as usize)
            .map(|i| (0..m as usize).fold(0, |acc, j| acc | ((tr_pow[i + j] as u32) << j)))
            .collect();
        field.artin_basis = field.build_artin_basis();
        Ok(field)
    }

    pub fn with_default_poly(m: u32) -> Result<Self, FieldError> {
        Self::new(m, None)
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m
    }

    /// q = 2^m.
    #[inline]
    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    /// q as a `usize`, for table sizing.
    #[inline]
    pub fn size(&self) -> usize {
        1usize << self.m
    }

    #[inline]
    pub fn reduction_poly(&self) -> u64 {
        self.poly
    }

    #[inline]
    pub fn trace_mask(&self) -> u32 {
        self.trace_mask
    }

    pub fn dual_matrix_columns(&self) -> &[u32] {
        &self.dual_cols
    }

    #[inline]
    fn value_mask(&self) -> u64 {
        self.order() - 1
    }

    /// The class of x. For m = 1 this is 1.
    pub fn alpha(&self) -> FieldElement {
        FieldElement(poly::rem(0b10, self.poly) as u32)
    }

    /// Range-checked element constructor.
    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        if bits > self.value_mask() {
            return Err(FieldError::ElementOutOfRange { bits, m: self.m });
        }
        Ok(FieldElement(bits as u32))
    }

    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        self.element(parse_hex(s)?)
    }

    /// All elements in ascending coefficient order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.order()).map(|b| FieldElement(b as u32))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!((a.0 as u64) <= self.value_mask() && (b.0 as u64) <= self.value_mask());
        let mut p = poly::clmul32(a.0, b.0);
        let m = self.m;
        while p >> m != 0 {
            let top = 63 - p.leading_zeros();
            p ^= self.poly << (top - m);
        }
        FieldElement(p as u32)
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// Square-and-multiply; `pow(0, 0) = 1`.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// a^(q-2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// a / b for b ≠ 0.
    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The unique square root, a^(2^(m-1)).
    pub fn sqrt(&self, a: FieldElement) -> FieldElement {
        (1..self.m).fold(a, |x, _| self.square(x))
    }

    /// Absolute trace as the parity of `trace_mask & a`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u8 {
        ((self.trace_mask & a.0).count_ones() & 1) as u8
    }

    /// Absolute trace from the defining sum a + a² + … + a^(2^(m-1)).
    pub fn trace_by_definition(&self, a: FieldElement) -> u8 {
        let mut t = a;
        let mut sum = a;
        for _ in 1..self.m {
            t = self.square(t);
            sum = self.add(sum, t);
        }
        debug_assert!(sum.0 <= 1);
        sum.0 as u8
    }

    /// T·a, so that Tr(a·x) = parity((T·a) & x).
    #[inline]
    pub fn dual_apply(&self, a: FieldElement) -> u32 {
        let mut bits = a.0;
        let mut out = 0;
        while bits != 0 {
            out ^= self.dual_cols[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        out
    }

    fn build_artin_basis(&self) -> Vec<(u32, u32)> {
        let mut basis = vec![(0u32, 0u32); self.m as usize];
        for i in 0..self.m {
            let y = FieldElement(1 << i);
            let mut image = self.add(self.square(y), y).0;
            let mut pre = y.0;
            while image != 0 {
                let pivot = 31 - image.leading_zeros();
                let slot = &mut basis[pivot as usize];
                if slot.0 == 0 {
                    *slot = (image, pre);
                    break;
                }
                image ^= slot.0;
                pre ^= slot.1;
            }
        }
        basis
    }

    /// Some y with y² + y = c, by elimination against the precomputed basis.
    pub fn solve_artin_schreier_linear(&self, c: FieldElement) -> Option<FieldElement> {
        let mut rest = c.0;
        let mut y = 0u32;
        for pivot in (0..self.m).rev() {
            if rest >> pivot & 1 == 1 {
                let (image, pre) = self.artin_basis[pivot as usize];
                if image == 0 {
                    return None;
                }
                rest ^= image;
                y ^= pre;
            }
        }
        Some(FieldElement(y))
    }

    /// Half-trace Σ c^(4^i), i = 0..=(m-1)/2. Solves y² + y = c when m is
    /// odd and Tr(c) = 0.
    pub fn half_trace(&self, c: FieldElement) -> FieldElement {
        let mut t = c;
        let mut sum = c;
        for _ in 0..(self.m - 1) / 2 {
            t = self.square(self.square(t));
            sum = self.add(sum, t);
        }
        sum
    }

    /// Some y with y² + y = c, or `None` when Tr(c) = 1.
    pub fn solve_artin_schreier(&self, c: FieldElement) -> Option<FieldElement> {
        if self.trace(c) == 1 {
            return None;
        }
        let y = if self.m % 2 == 1 {
            self.half_trace(c)
        } else {
            self.solve_artin_schreier_linear(c)?
        };
        debug_assert_eq!(self.add(self.square(y), y), c);
        Some(y)
    }

    /// Roots of x² + p·x + r = 0.
    pub fn solve_quadratic(&self, p: FieldElement, r: FieldElement) -> QuadraticRoots {
        let roots = if p.is_zero() {
            QuadraticRoots::OneRoot(self.sqrt(r))
        } else {
            let p_inv = self.inv(p).expect("p is nonzero");
            let c = self.mul(r, self.square(p_inv));
            match self.solve_artin_schreier(c) {
                None => QuadraticRoots::NoRoots,
                Some(y) => {
                    let x0 = self.mul(p, y);
                    let x1 = self.add(x0, p);
                    QuadraticRoots::TwoRoots(x0.min(x1), x0.max(x1))
                }
            }
        };
        for x in roots.roots() {
            let value = self.add(self.add(self.square(x), self.mul(p, x)), r);
            assert!(value.is_zero(), "quadratic root {x} failed substitution");
        }
        roots
    }

    /// The two primitive cube roots of unity (roots of x² + x + 1); present
    /// exactly when m is even.
    pub fn cube_roots_of_unity(&self) -> Option<(FieldElement, FieldElement)> {
        match self.solve_quadratic(FieldElement::ONE, FieldElement::ONE) {
            QuadraticRoots::TwoRoots(x, y) => Some((x, y)),
            _ => None,
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#X}", self.m, self.poly)
    }
}
