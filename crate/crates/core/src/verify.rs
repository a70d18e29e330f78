//! Exhaustive checkers producing [`VerificationReport`]s.
//!
//! Every case is either checked or skipped with a reason. Arguments that
//! collapse to K(0) are skipped rather than asserted, since the sum is only
//! defined on F*. Violations and skips are sorted by input before reporting,
//! so two runs over the same field differ only in `elapsed_secs`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::goethals::{self, derive_params, GoethalsError, Mu2Table, Rational};
use crate::ksum::{self, residue_mod, KloostermanTable, KsumError};

/// Largest degree for the enumeration-backed theorem check.
pub const CORRECTED_MAX_DEGREE: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("solution-count check enumerates O(q^3) tuples; refusing m = {m} > {CORRECTED_MAX_DEGREE}")]
    TooLarge { m: u32 },
    #[error(transparent)]
    Goethals(#[from] GoethalsError),
    #[error(transparent)]
    Ksum(#[from] KsumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    CorrectedTheorem,
    FamilyA,
    FamilyXi,
    CubeRoot,
    Conjecture,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    HypothesisExcluded,
    ArgumentZeroDegenerate,
    Vacuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    ResidueMismatch,
    CountMismatch,
    NonIntegerClosedForm,
    NegativeClosedForm,
    RootsDisagree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub inputs: String,
    pub kind: ViolationKind,
    pub expected: String,
    pub observed: String,
    #[serde(skip)]
    key: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedCase {
    pub inputs: String,
    pub reason: SkipReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    key: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: TheoremId,
    pub m: u32,
    pub poly: String,
    pub cases_total: u64,
    pub cases_checked: u64,
    pub cases_skipped_degenerate: u64,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub skipped: Vec<SkippedCase>,
    pub notes: Vec<String>,
    pub elapsed_secs: f64,
}

impl VerificationReport {
    pub fn to_structured_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Copy with the timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        VerificationReport {
            elapsed_secs: 0.0,
            ..self.clone()
        }
    }
}

enum Outcome {
    Pass,
    Fail(Violation),
    Skip(SkippedCase),
}

fn violation(key: Vec<u64>, inputs: String, kind: ViolationKind, expected: String, observed: String) -> Outcome {
    debug_assert_ne!(expected, observed);
    Outcome::Fail(Violation {
        inputs,
        kind,
        expected,
        observed,
        key,
    })
}

fn skip(key: Vec<u64>, inputs: String, reason: SkipReason, detail: Option<String>) -> Outcome {
    Outcome::Skip(SkippedCase {
        inputs,
        reason,
        detail,
        key,
    })
}

fn assemble(
    theorem_id: TheoremId,
    field: &FieldSpec,
    outcomes: Vec<Outcome>,
    notes: Vec<String>,
    started: Instant,
) -> VerificationReport {
    let cases_total = outcomes.len() as u64;
    let mut checked = 0;
    let mut violations: Vec<Violation> = Vec::new();
    let mut skipped: Vec<SkippedCase> = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Pass => checked += 1,
            Outcome::Fail(v) => {
                checked += 1;
                violations.push(v);
            }
            Outcome::Skip(s) => skipped.push(s),
        }
    }
    violations.sort_by(|a, b| a.key.cmp(&b.key));
    skipped.sort_by(|a, b| a.key.cmp(&b.key));
    let cases_skipped_degenerate = skipped.len() as u64;
    debug_assert_eq!(checked + cases_skipped_degenerate, cases_total);
    VerificationReport {
        theorem_id,
        m: field.degree(),
        poly: format!("{:#X}", field.reduction_poly()),
        cases_total,
        cases_checked: checked,
        cases_skipped_degenerate,
        pass: violations.is_empty(),
        violations,
        skipped,
        notes,
        elapsed_secs: started.elapsed().as_secs_f64(),
    }
}

/// 3 for odd m, 7 for even m.
pub fn expected_residue(m: u32) -> u64 {
    assert!(m >= 1);
    if m % 2 == 1 {
        3
    } else {
        7
    }
}

/// Builds the enumeration table and the K-table, then compares.
pub fn verify_corrected_theorem(field: &FieldSpec) -> Result<VerificationReport, VerifyError> {
    let m = field.degree();
    if m > CORRECTED_MAX_DEGREE {
        return Err(VerifyError::TooLarge { m });
    }
    let started = Instant::now();
    let mu2 = goethals::mu2_bruteforce_all(field)?;
    let ks = ksum::kloosterman_table_fast(field)?;
    let mut report = verify_corrected_theorem_from(&mu2, &ks);
    report.elapsed_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Compares an existing enumeration table against the closed form on every
/// (b, c). Degenerate pairs are skipped with both values recorded.
pub fn verify_corrected_theorem_from(mu2: &Mu2Table, ks: &KloostermanTable) -> VerificationReport {
    let field = mu2.field();
    assert_eq!(field, ks.field(), "tables built over different fields");
    let started = Instant::now();
    let q = field.size();
    let outcomes: Vec<Outcome> = (0..q * q)
        .into_par_iter()
        .map(|i| {
            let b = FieldElement::from_bits((i / q) as u32);
            let c = FieldElement::from_bits((i % q) as u32);
            let key = vec![b.bits() as u64, c.bits() as u64];
            let inputs = format!("b={b} c={c}");
            let params = derive_params(field, b, c);
            let closed = goethals::mu2_closed(ks, b, c);
            let brute = mu2.mu2(b, c);
            if params.degenerate {
                let detail = format!(
                    "k1={} k2={} ordered={} bruteforce={} closed={}",
                    params.k1,
                    params.k2,
                    mu2.ordered(b, c),
                    brute,
                    closed
                );
                return skip(key, inputs, SkipReason::ArgumentZeroDegenerate, Some(detail));
            }
            if !closed.is_integer() {
                violation(key, inputs, ViolationKind::NonIntegerClosedForm, brute.to_string(), closed.to_string())
            } else if closed < Rational::from_integer(0) {
                violation(key, inputs, ViolationKind::NegativeClosedForm, brute.to_string(), closed.to_string())
            } else if closed * goethals::ORDERINGS_PER_SOLUTION as i64
                != Rational::from_integer(mu2.ordered(b, c) as i64)
            {
                violation(key, inputs, ViolationKind::CountMismatch, closed.to_string(), brute.to_string())
            } else {
                Outcome::Pass
            }
        })
        .collect();
    let notes = vec![
        format!(
            "convention: ordered solution count = {} x closed-form mu2 (x, y, z permuted, u fixed)",
            goethals::ORDERINGS_PER_SOLUTION
        ),
        format!("ordered total over all (b, c) = {}", mu2.total()),
    ];
    assemble(TheoremId::CorrectedTheorem, field, outcomes, notes, started)
}

/// Which single-parameter divisibility statement to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// K(a⁴ + a³) with a = b² + b + 1.
    A,
    /// K(ξ⁴ + ξ³) with ξ = b⁴ + b + 1.
    Xi,
    /// K(ξ) for the primitive cube roots of unity ξ.
    CubeRoot,
}

fn quartic_plus_cubic(field: &FieldSpec, a: FieldElement) -> FieldElement {
    let a3 = field.pow(a, 3);
    field.add(field.mul(a3, a), a3)
}

/// Shared check for "K(t⁴ + t³) ≡ r (mod 12) whenever t ≠ 0".
fn residue_case(
    ks: &KloostermanTable,
    key: Vec<u64>,
    inputs: String,
    t: FieldElement,
    expected: u64,
) -> Outcome {
    let field = ks.field();
    if t.is_zero() {
        return skip(key, inputs, SkipReason::HypothesisExcluded, None);
    }
    let arg = quartic_plus_cubic(field, t);
    if arg.is_zero() {
        let detail = format!("argument 0; K(0)={} (residue {})", ks.get(arg), residue_mod(ks.get(arg), 12));
        return skip(key, inputs, SkipReason::ArgumentZeroDegenerate, Some(detail));
    }
    let observed = residue_mod(ks.get(arg), 12);
    if observed == expected {
        Outcome::Pass
    } else {
        let inputs = format!("{inputs} arg={arg} K={}", ks.get(arg));
        violation(key, inputs, ViolationKind::ResidueMismatch, expected.to_string(), observed.to_string())
    }
}

pub fn verify_divisibility_family_a(ks: &KloostermanTable) -> VerificationReport {
    verify_family(ks, Family::A, None)
}

pub fn verify_divisibility_family_xi(ks: &KloostermanTable) -> VerificationReport {
    verify_family(ks, Family::Xi, None)
}

pub fn verify_cube_root_theorem(ks: &KloostermanTable) -> VerificationReport {
    verify_family(ks, Family::CubeRoot, None)
}

/// Runs one family. `residue_override` replaces every expected residue and
/// exists to exercise the failure path.
pub fn verify_family(
    ks: &KloostermanTable,
    family: Family,
    residue_override: Option<u64>,
) -> VerificationReport {
    let started = Instant::now();
    let field = ks.field();
    let m = field.degree();
    let expected = residue_override.unwrap_or_else(|| expected_residue(m));
    match family {
        Family::A | Family::Xi => {
            let outcomes = (0..field.size())
                .into_par_iter()
                .map(|b| {
                    let b = FieldElement::from_bits(b as u32);
                    let (t, name) = match family {
                        Family::A => (field.add(field.add(field.square(b), b), FieldElement::ONE), "a"),
                        _ => (field.add(field.add(field.pow(b, 4), b), FieldElement::ONE), "xi"),
                    };
                    residue_case(ks, vec![b.bits() as u64], format!("b={b} {name}={t}"), t, expected)
                })
                .collect();
            let id = if family == Family::A { TheoremId::FamilyA } else { TheoremId::FamilyXi };
            let notes = vec![format!("expected residue mod 12: {expected}")];
            assemble(id, field, outcomes, notes, started)
        }
        Family::CubeRoot => {
            let Some((w1, w2)) = field.cube_roots_of_unity() else {
                let notes = vec![format!(
                    "vacuous: GF(2^{m}) has no primitive cube roots of unity for odd m"
                )];
                let case = skip(vec![], format!("m={m}"), SkipReason::Vacuous, None);
                return assemble(TheoremId::CubeRoot, field, vec![case], notes, started);
            };
            let outcomes: Vec<Outcome> = [w1, w2]
                .into_iter()
                .map(|w| {
                    let tr = field.trace(w);
                    let want = residue_override.unwrap_or(if tr == 0 { 7 } else { 11 });
                    let observed = residue_mod(ks.get(w), 12);
                    if observed == want {
                        Outcome::Pass
                    } else {
                        let inputs = format!("xi={w} Tr={tr} K={}", ks.get(w));
                        let key = vec![w.bits() as u64];
                        violation(key, inputs, ViolationKind::ResidueMismatch, want.to_string(), observed.to_string())
                    }
                })
                .collect();
            let notes = vec![format!("Tr(xi) = {}", field.trace(w1))];
            let mut report = assemble(TheoremId::CubeRoot, field, outcomes, notes, started);
            // ξ² is the other root, so K must agree on the pair
            if ks.get(w1) != ks.get(w2) {
                report.violations.push(Violation {
                    inputs: format!("xi={w1} xi^2={w2}"),
                    kind: ViolationKind::RootsDisagree,
                    expected: ks.get(w1).to_string(),
                    observed: ks.get(w2).to_string(),
                    key: vec![w1.bits() as u64, u64::MAX],
                });
                report.violations.sort_by(|a, b| a.key.cmp(&b.key));
                report.pass = false;
            }
            report
        }
    }
}

/// How the conjecture's sum Σ_{i=0..n} a^(e_i) + a picks its exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMode {
    /// e_i = 2i
    EvenPowers,
    /// e_i = 2^i
    PowersOfTwo,
}

/// ξ = Σ_{i=0..n} a^(e_i) + a.
pub fn conjecture_xi(field: &FieldSpec, a: FieldElement, n: u32, mode: ExponentMode) -> FieldElement {
    let mut xi = a;
    match mode {
        ExponentMode::EvenPowers => {
            let a2 = field.square(a);
            let mut term = FieldElement::ONE;
            for _ in 0..=n {
                xi = field.add(xi, term);
                term = field.mul(term, a2);
            }
        }
        ExponentMode::PowersOfTwo => {
            let mut term = a;
            for _ in 0..=n {
                xi = field.add(xi, term);
                term = field.square(term);
            }
        }
    }
    xi
}

pub fn conjecture_scan(ks: &KloostermanTable, n_max: u32, mode: ExponentMode) -> VerificationReport {
    conjecture_scan_with(ks, n_max, mode, None)
}

pub fn conjecture_scan_with(
    ks: &KloostermanTable,
    n_max: u32,
    mode: ExponentMode,
    residue_override: Option<u64>,
) -> VerificationReport {
    let started = Instant::now();
    let field = ks.field();
    let expected = residue_override.unwrap_or_else(|| expected_residue(field.degree()));
    let per_b = n_max as usize + 1;
    let outcomes = (0..field.size() * per_b)
        .into_par_iter()
        .map(|i| {
            let b = FieldElement::from_bits((i / per_b) as u32);
            let n = (i % per_b) as u32;
            let a = field.add(field.add(field.square(b), b), FieldElement::ONE);
            let xi = conjecture_xi(field, a, n, mode);
            let key = vec![b.bits() as u64, n as u64];
            residue_case(ks, key, format!("b={b} n={n} xi={xi}"), xi, expected)
        })
        .collect();
    let mode_name = match mode {
        ExponentMode::EvenPowers => "a^(2i)",
        ExponentMode::PowersOfTwo => "a^(2^i)",
    };
    let notes = vec![
        format!("exponent convention: {mode_name}, n = 0..={n_max}"),
        format!("expected residue mod 12: {expected}"),
    ];
    assemble(TheoremId::Conjecture, field, outcomes, notes, started)
}
