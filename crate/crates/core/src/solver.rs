//! Discrete-time descent: Euler steps of a vector field, run either on the
//! monolithic field or as distribute / compute / collect over an
//! [`ExecutionPlan`].

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dynam::{concat, OpenDynam};
use crate::exec::Executor;
use crate::linmap::{LinError, LinMap};
use crate::scalar::{f64_to_rational, linf, rational_to_f64, Dim, Rational, Ring, Scalar, ScalarError, Vector};
use crate::term::{DomainTag, EvalError, Term};

/// Default ratio of gradient norm to its starting value treated as divergence.
pub const DEFAULT_DIVERGENCE_FACTOR: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("learning rate must be non-negative")]
    NegativeGamma,
    #[error("gradient norm tolerance must be non-negative")]
    NegativeTolerance,
    #[error("at least one stopping criterion is required")]
    NoStoppingCriterion,
    #[error("unsolvable domain {0:?}: descent needs a domain with small steps")]
    UnsolvableDomain(DomainTag),
    #[error("state has the wrong scalar kind for this domain")]
    KindMismatch,
    #[error("state has dimension {found}, system expects {expected}")]
    DimMismatch { expected: Dim, found: Dim },
    #[error("diverged at iteration {iter}")]
    Diverged { iter: usize },
    #[error("evaluation failed at iteration {iter}{}: {source}", subsystem.map(|i| alloc::format!(" in subsystem {i}")).unwrap_or_default())]
    Eval { iter: usize, subsystem: Option<usize>, source: EvalError },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Monolithic,
    Distributed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    gamma: Scalar,
    max_iters: Option<usize>,
    tol: Option<Scalar>,
    pub mode: Mode,
    pub divergence_factor: f64,
}

impl DescentConfig {
    /// Stops when the ℓ∞ norm of the field drops to `tol`, or after
    /// `max_iters` updates, whichever comes first.
    pub fn new(gamma: Scalar, max_iters: Option<usize>, tol: Option<Scalar>) -> Result<Self, SolveError> {
        if is_negative(&gamma) {
            return Err(SolveError::NegativeGamma);
        }
        if tol.as_ref().is_some_and(is_negative) {
            return Err(SolveError::NegativeTolerance);
        }
        if max_iters.is_none() && tol.is_none() {
            return Err(SolveError::NoStoppingCriterion);
        }
        Ok(DescentConfig { gamma, max_iters, tol, mode: Mode::Monolithic, divergence_factor: DEFAULT_DIVERGENCE_FACTOR })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn gamma(&self) -> &Scalar {
        &self.gamma
    }

    pub fn max_iters(&self) -> Option<usize> {
        self.max_iters
    }

    pub fn tol(&self) -> Option<&Scalar> {
        self.tol.as_ref()
    }
}

fn is_negative(s: &Scalar) -> bool {
    s.try_cmp(&Scalar::zero(s.kind())) == Ok(Ordering::Less)
}

/// A scalar as an element of `R`, converting between the exact and float
/// views when needed.
fn coerce<R: Ring>(s: &Scalar) -> Result<R, SolveError> {
    match s {
        Scalar::Rational(q) => Ok(R::from_rational(q)),
        Scalar::Real(r) => R::from_scalar(s)
            .or_else(|| f64_to_rational(r.get()).map(|q| R::from_rational(&q)))
            .ok_or(SolveError::KindMismatch),
    }
}

fn norm_f64<R: Ring>(v: &[R]) -> f64 {
    let n = linf(v);
    match n.clone().into_scalar() {
        Ok(Scalar::Real(r)) => r.get(),
        Ok(Scalar::Rational(q)) => rational_to_f64(&q).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

/// Visited states and the field norm at each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vector>,
    pub grad_norms: Vec<Scalar>,
    /// True when the tolerance (not the iteration cap) ended the run.
    pub converged: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn iterations(&self) -> usize {
        self.states.len() - 1
    }
}

/// `x + γ · v(x)`.
pub fn euler_step(v: &Term, x: &Vector, gamma: &Scalar) -> Result<Vector, SolveError> {
    fn step<R: Ring>(v: &Term, x: &[R], gamma: &Scalar) -> Result<Vec<R>, SolveError> {
        let g = v.eval_in(x).map_err(|source| SolveError::Eval { iter: 0, subsystem: None, source })?;
        let gamma: R = coerce(gamma)?;
        let next = update(x, &g, &gamma);
        if next.iter().all(R::is_finite) {
            Ok(next)
        } else {
            Err(SolveError::Diverged { iter: 1 })
        }
    }
    if x.dim() != v.dom() {
        return Err(SolveError::DimMismatch { expected: v.dom(), found: x.dim() });
    }
    match x {
        Vector::Rational(xs) => Ok(Vector::Rational(step(v, xs, gamma)?)),
        Vector::Real(xs) => Ok(Vector::Real(step(v, xs, gamma)?)),
    }
}

fn update<R: Ring>(x: &[R], g: &[R], gamma: &R) -> Vec<R> {
    x.iter().zip(g).map(|(xi, gi)| xi.add(&gamma.mul(gi))).collect()
}

type FieldError = (Option<usize>, EvalError);

fn descend<R: Ring>(
    x0: Vec<R>,
    cfg: &DescentConfig,
    mut field: impl FnMut(&[R]) -> Result<Vec<R>, FieldError>,
) -> Result<Trajectory, SolveError> {
    let gamma: R = coerce(&cfg.gamma)?;
    let tol: Option<R> = cfg.tol.as_ref().map(coerce).transpose()?;
    let mut states = alloc::vec![x0];
    let mut norms: Vec<R> = Vec::new();
    let mut baseline = 1.0f64;
    let mut converged = false;
    for k in 0.. {
        let x = states.last().expect("nonempty");
        let g = field(x).map_err(|(subsystem, source)| match source {
            EvalError::NonFinite(_) => SolveError::Diverged { iter: k },
            source => SolveError::Eval { iter: k, subsystem, source },
        })?;
        let norm = linf(&g);
        let nf = norm_f64(&g);
        if k == 0 {
            baseline = baseline.max(nf);
        }
        if !nf.is_finite() || nf > cfg.divergence_factor * baseline {
            return Err(SolveError::Diverged { iter: k });
        }
        norms.push(norm.clone());
        if tol.as_ref().is_some_and(|t| norm.total_cmp(t) != Ordering::Greater) {
            converged = true;
            break;
        }
        if cfg.max_iters == Some(k) {
            break;
        }
        let next = update(x, &g, &gamma);
        if !next.iter().all(R::is_finite) {
            return Err(SolveError::Diverged { iter: k + 1 });
        }
        states.push(next);
    }
    let states = states.into_iter().map(Vector::from_ring).collect::<Result<Vec<_>, _>>()?;
    let grad_norms = norms.into_iter().map(R::into_scalar).collect::<Result<Vec<_>, _>>()?;
    Ok(Trajectory { states, grad_norms, converged })
}

fn check_start(tag: DomainTag, apex: Dim, x0: &Vector) -> Result<(), SolveError> {
    if tag == DomainTag::PolyOverIntegers {
        return Err(SolveError::UnsolvableDomain(tag));
    }
    if x0.kind() != tag.scalar_kind() {
        return Err(SolveError::KindMismatch);
    }
    if x0.dim() != apex {
        return Err(SolveError::DimMismatch { expected: apex, found: x0.dim() });
    }
    Ok(())
}

/// Iterates Euler steps of a single field.
pub fn run_field(field: &Term, tag: DomainTag, x0: &Vector, cfg: &DescentConfig) -> Result<Trajectory, SolveError> {
    check_start(tag, field.dom(), x0)?;
    match x0 {
        Vector::Rational(x) => descend(x.clone(), cfg, |x| field.eval_in(x).map_err(|e| (None, e))),
        Vector::Real(x) => descend(x.clone(), cfg, |x| field.eval_in(x).map_err(|e| (None, e))),
    }
}

/// Descent on the simplified composite field.
pub fn run_monolithic(v: &OpenDynam, x0: &Vector, cfg: &DescentConfig) -> Result<Trajectory, SolveError> {
    run_field(v.field(), v.tag(), x0, cfg)
}

/// Descent through the plan: distribute with the pairing, evaluate every
/// subsystem through `exec`, collect with the transposed pairing.
pub fn run_distributed<E: Executor>(
    plan: &ExecutionPlan,
    tag: DomainTag,
    x0: &Vector,
    cfg: &DescentConfig,
    exec: &E,
) -> Result<Trajectory, SolveError> {
    check_start(tag, plan.apex(), x0)?;
    match x0 {
        Vector::Rational(x) => descend(x.clone(), cfg, |x| plan.evaluate(x, exec)),
        Vector::Real(x) => descend(x.clone(), cfg, |x| plan.evaluate(x, exec)),
    }
}

/// Runs `v` in the mode named by `cfg`.
pub fn run<E: Executor>(v: &OpenDynam, x0: &Vector, cfg: &DescentConfig, exec: &E) -> Result<Trajectory, SolveError> {
    match cfg.mode {
        Mode::Monolithic => run_monolithic(v, x0, cfg),
        Mode::Distributed => run_distributed(v.plan(), v.tag(), x0, cfg, exec),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("subsystem {index} is not an endomap ({dom} → {cod})")]
    NotEndomap { index: usize, dom: Dim, cod: Dim },
    #[error("leaf dimensions sum to {leaves}, pairing has {rows} rows")]
    Stack { leaves: Dim, rows: Dim },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    pub offset: usize,
    pub dim: Dim,
    pub field: Term,
}

/// A composite field in factored form: `pairing: apex → Σ dims` distributes
/// the state, each subsystem evaluates its own field on its slice, and the
/// transposed pairing collects the stacked results. Subsystems are stacked,
/// and so summed, in ascending index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    pairing: LinMap,
    collect: LinMap,
    subsystems: Vec<Subsystem>,
}

impl ExecutionPlan {
    pub fn leaf(field: Term) -> ExecutionPlan {
        let n = field.dom();
        compile_plan(&[field], LinMap::identity(n)).expect("an endomap is its own plan")
    }

    pub fn pairing(&self) -> &LinMap {
        &self.pairing
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn apex(&self) -> Dim {
        self.pairing.cols()
    }

    pub(crate) fn tensor(&self, other: &ExecutionPlan) -> ExecutionPlan {
        let shift = self.pairing.rows();
        let moved = other.subsystems.iter().map(|s| Subsystem { offset: s.offset + shift, ..s.clone() });
        let pairing = self.pairing.block_diag(&other.pairing);
        ExecutionPlan {
            collect: pairing.dagger(),
            pairing,
            subsystems: concat(&self.subsystems, &moved.collect::<Vec<_>>()),
        }
    }

    /// The plan for this field restricted along `phi`.
    pub(crate) fn precompose(&self, phi: &LinMap) -> Result<ExecutionPlan, LinError> {
        let pairing = self.pairing.compose(phi)?;
        Ok(ExecutionPlan { collect: pairing.dagger(), pairing, subsystems: self.subsystems.clone() })
    }

    /// The plan as a single term, `φ† ∘ (Σᵢ ιᵢ ∘ vᵢ ∘ πᵢ) ∘ φ`, without simplification.
    pub fn factored(&self) -> Term {
        let total = self.pairing.rows();
        let mut sum: Option<Term> = None;
        for s in self.subsystems.iter().filter(|s| s.dim > 0) {
            let part = Term::comp(
                Term::linear(LinMap::injection(total, s.offset, s.dim)),
                Term::comp(s.field.clone(), Term::proj(total, s.offset, s.dim).expect("slice in range")).expect("typed"),
            )
            .expect("typed");
            sum = Some(match sum {
                None => part,
                Some(acc) => Term::add(acc, part).expect("typed"),
            });
        }
        let sum = sum.unwrap_or_else(|| Term::zero(total, total));
        let inner = Term::comp(sum, Term::linear(self.pairing.clone())).expect("typed");
        Term::comp(Term::linear(self.collect.clone()), inner).expect("typed")
    }

    /// One distribute / compute / collect round.
    pub fn evaluate<R: Ring, E: Executor>(&self, x: &[R], exec: &E) -> Result<Vec<R>, (Option<usize>, EvalError)> {
        let u = self
            .pairing
            .apply(x)
            .map_err(|_| (None, EvalError::DimMismatch { expected: self.apex(), found: x.len() }))?;
        let parts = exec.run(self.subsystems.len(), |i| {
            let s = &self.subsystems[i];
            s.field.eval_in(&u[s.offset..s.offset + s.dim])
        });
        let mut stacked = Vec::with_capacity(u.len());
        for (i, part) in parts.into_iter().enumerate() {
            stacked.extend(part.map_err(|e| (Some(i), e))?);
        }
        let g = self.collect.apply(&stacked).expect("stack matches the pairing");
        if g.iter().all(R::is_finite) {
            Ok(g)
        } else {
            Err((None, EvalError::NonFinite("collect")))
        }
    }
}

/// Builds a plan from leaf fields stacked in order and a pairing of the apex
/// into their stacked state space.
pub fn compile_plan(leaves: &[Term], pairing: LinMap) -> Result<ExecutionPlan, PlanError> {
    let mut subsystems = Vec::with_capacity(leaves.len());
    let mut offset = 0;
    for (index, field) in leaves.iter().enumerate() {
        if field.dom() != field.cod() {
            return Err(PlanError::NotEndomap { index, dom: field.dom(), cod: field.cod() });
        }
        subsystems.push(Subsystem { offset, dim: field.dom(), field: field.clone() });
        offset += field.dom();
    }
    if offset != pairing.rows() {
        return Err(PlanError::Stack { leaves: offset, rows: pairing.rows() });
    }
    Ok(ExecutionPlan { collect: pairing.dagger(), pairing, subsystems })
}

/// Rational shorthand for configs and tests.
pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::Rational(Rational::new(num.into(), den.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::gd::gd_component;
    use crate::scalar::ScalarKind;
    use crate::term::build::*;
    use alloc::vec;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn real(v: &[f64]) -> Vector {
        Vector::real(v.to_vec()).unwrap()
    }

    #[test]
    fn euler_step_examples() {
        let v = Term::linear(LinMap::from_ints(1, 1, &[-2]).unwrap());
        assert_eq!(euler_step(&v, &real(&[1.0]), &Scalar::real(0.1).unwrap()).unwrap(), real(&[0.8]));
        let zero = Term::zero(2, 2);
        assert_eq!(euler_step(&zero, &real(&[1.0, 2.0]), &Scalar::real(0.5).unwrap()).unwrap(), real(&[1.0, 2.0]));
        let field = gd_component(&square(var(1, 0))).unwrap();
        let x = Vector::from_ints(ScalarKind::Rational, &[3]);
        assert_eq!(euler_step(&field, &x, &ratio(1, 4)).unwrap(), Vector::Rational(vec![Rational::new(3.into(), 2.into())]));
    }

    #[test]
    fn config_validation() {
        assert_eq!(DescentConfig::new(ratio(-1, 10), Some(5), None), Err(SolveError::NegativeGamma));
        assert_eq!(DescentConfig::new(ratio(1, 10), None, None), Err(SolveError::NoStoppingCriterion));
        assert_eq!(DescentConfig::new(ratio(1, 10), None, Some(ratio(-1, 1))), Err(SolveError::NegativeTolerance));
        assert!(DescentConfig::new(ratio(0, 1), Some(3), None).is_ok());
    }

    #[test]
    fn quadratic_converges_geometrically() {
        let field = gd_component(&shifted_square(1, 0, q(2))).unwrap();
        let cfg = DescentConfig::new(Scalar::real(0.1).unwrap(), Some(200), Some(Scalar::real(1e-7).unwrap())).unwrap();
        let t = run_field(&field, DomainTag::Smooth, &real(&[0.0]), &cfg).unwrap();
        assert!(t.converged && t.iterations() <= 200);
        let x = t.final_state().to_f64().unwrap()[0];
        assert!((x - 2.0).abs() < 1e-6, "{x}");
        // x_k = 2 − 2(1 − 2γ)^k
        let x5 = t.states[5].to_f64().unwrap()[0];
        assert!((x5 - (2.0 - 2.0 * 0.8f64.powi(5))).abs() < 1e-12);
    }

    #[test]
    fn zero_field_stops_immediately() {
        let cfg = DescentConfig::new(ratio(1, 2), Some(10), Some(ratio(1, 1000))).unwrap();
        let t = run_field(&Term::zero(2, 2), DomainTag::PolyOverRationals, &Vector::from_ints(ScalarKind::Rational, &[1, 2]), &cfg)
            .unwrap();
        assert_eq!(t.states.len(), 1);
        assert!(t.converged);
    }

    #[test]
    fn large_step_diverges() {
        let field = gd_component(&square(var(1, 0))).unwrap();
        let cfg = DescentConfig::new(Scalar::real(1.1).unwrap(), Some(1000), None).unwrap();
        let err = run_field(&field, DomainTag::Smooth, &real(&[1.0]), &cfg).unwrap_err();
        assert!(matches!(err, SolveError::Diverged { iter } if iter > 10), "{err}");
    }

    #[test]
    fn integer_domain_is_rejected() {
        let cfg = DescentConfig::new(ratio(1, 2), Some(1), None).unwrap();
        let x = Vector::from_ints(ScalarKind::Rational, &[1]);
        assert_eq!(
            run_field(&Term::zero(1, 1), DomainTag::PolyOverIntegers, &x, &cfg),
            Err(SolveError::UnsolvableDomain(DomainTag::PolyOverIntegers))
        );
    }

    #[test]
    fn single_leaf_plan_matches_field_exactly() {
        let field = gd_component(&plus(times(var(2, 0), var(2, 1)), shifted_square(2, 0, q(1)))).unwrap();
        let plan = ExecutionPlan::leaf(field.clone());
        let cfg = DescentConfig::new(ratio(1, 8), Some(20), None).unwrap();
        let x0 = Vector::from_ints(ScalarKind::Rational, &[1, -1]);
        let mono = run_field(&field, DomainTag::PolyOverRationals, &x0, &cfg).unwrap();
        let dist = run_distributed(&plan, DomainTag::PolyOverRationals, &x0, &cfg, &Sequential).unwrap();
        assert_eq!(mono, dist);
    }

    #[test]
    fn plan_shape_is_checked() {
        assert_eq!(
            compile_plan(&[Term::zero(2, 2)], LinMap::identity(3)).unwrap_err(),
            PlanError::Stack { leaves: 2, rows: 3 }
        );
        assert!(matches!(compile_plan(&[Term::zero(2, 1)], LinMap::identity(2)), Err(PlanError::NotEndomap { .. })));
    }
}
