//! Pointwise comparison of terms on random points, and the reports that
//! law checks produce.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::exec::Executor;
use crate::gen;
use crate::linmap::LinMap;
use crate::rdiff::relative_deviation;
use crate::scalar::{rational_to_f64, Dim, Rational};
use crate::span::Span;
use crate::term::{DomainTag, Term};

/// Relative tolerance for comparisons in the smooth domain.
pub const SMOOTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub law: String,
    pub trials: usize,
    /// Exact comparison (polynomial domains) rather than a tolerance.
    pub exact: bool,
    pub max_deviation: f64,
    pub mismatches: usize,
    pub passed: bool,
    pub note: Option<String>,
}

impl LawReport {
    pub fn new(law: &str, exact: bool) -> LawReport {
        LawReport {
            law: law.into(),
            trials: 0,
            exact,
            max_deviation: 0.0,
            mismatches: 0,
            passed: true,
            note: None,
        }
    }

    pub fn failure(law: &str, exact: bool, note: impl Into<String>) -> LawReport {
        LawReport { passed: false, mismatches: 1, note: Some(note.into()), ..LawReport::new(law, exact) }
    }

    /// Folds another report on the same law into this one.
    pub fn absorb(&mut self, other: LawReport) {
        self.trials += other.trials;
        self.exact &= other.exact;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        self.mismatches += other.mismatches;
        self.passed &= other.passed;
        if self.note.is_none() {
            self.note = other.note;
        }
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:<5} trials={:<6} max_dev={:<10.3e} mismatches={:<4} {}",
            self.law,
            if self.exact { "exact" } else { "float" },
            self.trials,
            self.max_deviation,
            self.mismatches,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

enum Outcome {
    Agree(f64),
    Disagree(f64),
    Error,
}

/// Random evaluation points of dimension `dim` for `tag`.
pub(crate) enum Points {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

impl Points {
    pub(crate) fn draw(rng: &mut impl Rng, tag: DomainTag, dim: Dim, count: usize) -> Points {
        if tag.is_poly() {
            Points::Exact((0..count).map(|_| gen::rational_point(rng, dim)).collect())
        } else {
            Points::Float((0..count).map(|_| gen::real_point(rng, dim)).collect())
        }
    }
}

/// Evaluates `lhs` and `rhs` at `trials` random points. Exact equality in
/// the polynomial domains, relative deviation at most [`SMOOTH_TOLERANCE`]
/// in the smooth domain. Trials run through `exec` and are merged in index
/// order.
pub fn compare_terms<E: Executor>(
    law: &str,
    lhs: &Term,
    rhs: &Term,
    tag: DomainTag,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let exact = tag.is_poly();
    if (lhs.dom(), lhs.cod()) != (rhs.dom(), rhs.cod()) {
        return LawReport::failure(
            law,
            exact,
            alloc::format!("types differ: {} → {} vs {} → {}", lhs.dom(), lhs.cod(), rhs.dom(), rhs.cod()),
        );
    }
    let points = Points::draw(rng, tag, lhs.dom(), trials);
    let outcomes: Vec<Outcome> = match &points {
        Points::Exact(xs) => exec.run(xs.len(), |i| {
            match (lhs.eval_in(&xs[i]), rhs.eval_in(&xs[i])) {
                (Ok(a), Ok(b)) => {
                    let dev = a
                        .iter()
                        .zip(&b)
                        .map(|(u, v)| rational_to_f64(&(u - v)).map(libm::fabs).unwrap_or(f64::INFINITY))
                        .fold(0.0, f64::max);
                    if a == b {
                        Outcome::Agree(dev)
                    } else {
                        Outcome::Disagree(dev)
                    }
                }
                _ => Outcome::Error,
            }
        }),
        Points::Float(xs) => exec.run(xs.len(), |i| {
            match (lhs.eval_in(&xs[i]), rhs.eval_in(&xs[i])) {
                (Ok(a), Ok(b)) => {
                    let dev = a.iter().zip(&b).map(|(u, v)| relative_deviation(*u, *v)).fold(0.0, f64::max);
                    if dev <= SMOOTH_TOLERANCE {
                        Outcome::Agree(dev)
                    } else {
                        Outcome::Disagree(dev)
                    }
                }
                _ => Outcome::Error,
            }
        }),
    };
    let mut report = LawReport::new(law, exact);
    report.trials = trials;
    let mut errors = 0;
    for o in outcomes {
        match o {
            Outcome::Agree(d) => report.max_deviation = report.max_deviation.max(d),
            Outcome::Disagree(d) => {
                report.max_deviation = report.max_deviation.max(d);
                report.mismatches += 1;
            }
            Outcome::Error => {
                errors += 1;
                report.mismatches += 1;
            }
        }
    }
    if errors > 0 {
        report.note = Some(alloc::format!("{errors} evaluation errors"));
    }
    report.passed = report.mismatches == 0;
    report
}

/// Extensional equality of two decorated spans: searches apex isomorphisms
/// `u: b.apex → a.apex` matching the legs, then compares `transport(u)`
/// against `b_decoration` pointwise. Passes if some witness passes.
#[allow(clippy::too_many_arguments)]
pub fn witness_report<E: Executor>(
    law: &str,
    a: &Span,
    b: &Span,
    b_decoration: &Term,
    transport: impl Fn(&LinMap) -> Term,
    tag: DomainTag,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let exact = tag.is_poly();
    if a.apex() != b.apex() {
        return LawReport::failure(law, exact, alloc::format!("apex dims differ: {} vs {}", a.apex(), b.apex()));
    }
    let candidates = a.apex_isos(b, rng, WITNESS_ATTEMPTS);
    if candidates.is_empty() {
        return LawReport::failure(law, exact, "no apex isomorphism matches the legs");
    }
    let mut last = None;
    for u in &candidates {
        let report = compare_terms(law, &transport(u), b_decoration, tag, trials, rng, exec);
        if report.passed {
            return report;
        }
        last = Some(report);
    }
    last.expect("at least one candidate")
}

/// Random perturbations tried when the legs leave the apex iso underdetermined.
const WITNESS_ATTEMPTS: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::term::build::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_terms_pass_and_different_terms_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = times(var(2, 0), var(2, 1));
        let g = times(var(2, 1), var(2, 0));
        let r = compare_terms("commute", &f, &g, DomainTag::PolyOverRationals, 30, &mut rng, &Sequential);
        assert!(r.passed && r.exact && r.trials == 30, "{r}");
        let h = plus(var(2, 0), var(2, 1));
        let r = compare_terms("differ", &f, &h, DomainTag::Smooth, 30, &mut rng, &Sequential);
        assert!(!r.passed && r.mismatches > 0, "{r}");
    }

    #[test]
    fn type_mismatch_is_a_failure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = compare_terms("types", &Term::id(2), &Term::id(3), DomainTag::Smooth, 5, &mut rng, &Sequential);
        assert!(!r.passed);
    }
}
