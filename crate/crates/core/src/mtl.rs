//! Multitask learning with hard parameter sharing.
//!
//! Task `i` is the open objective `P0 ←π₀ P0 × Pi →π₁ Pi` decorated with its
//! loss. The problem is the monoidal product of the tasks precomposed with
//! the N-fold copy on the shared weights; its pullback apex is
//! `(W₀, W₁, …, W_N)`. Applying the gradient descent functor to each piece
//! and composing gives the distributed trainer.

use alloc::vec::Vec;

use crate::dynam::OpenDynam;
use crate::exec::Executor;
use crate::gd::gd_functor;
use crate::linmap::LinMap;
use crate::opt::OpenObjective;
use crate::scalar::{Dim, Rational, Vector};
use crate::simplify::simplify;
use crate::solver::{run_distributed, DescentConfig, ExecutionPlan, SolveError, Trajectory};
use crate::span::{Generator, SpanError};
use crate::term::{build, DomainTag, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MtlError {
    #[error("no tasks")]
    NoTasks,
    #[error("loss has type {dom} → {cod}, expected {expected} → 1")]
    LossType { dom: Dim, cod: Dim, expected: Dim },
    #[error("task {index} shares {found} weights, expected {expected}")]
    SharedDim { index: usize, expected: Dim, found: Dim },
    #[error("data set is empty")]
    EmptyData,
    #[error("row {row} has {found} features, expected {expected}")]
    Features { row: usize, expected: usize, found: usize },
    #[error("{labels} labels for {rows} rows")]
    Labels { rows: usize, labels: usize },
    #[error(transparent)]
    Span(#[from] SpanError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    shared_dim: Dim,
    task_dim: Dim,
    loss: Term,
    data_rows: Option<usize>,
}

impl TaskSpec {
    pub fn new(shared_dim: Dim, task_dim: Dim, loss: Term) -> Result<Self, MtlError> {
        if loss.dom() != shared_dim + task_dim || loss.cod() != 1 {
            return Err(MtlError::LossType { dom: loss.dom(), cod: loss.cod(), expected: shared_dim + task_dim });
        }
        Ok(TaskSpec { shared_dim, task_dim, loss, data_rows: None })
    }

    pub fn shared_dim(&self) -> Dim {
        self.shared_dim
    }

    pub fn task_dim(&self) -> Dim {
        self.task_dim
    }

    pub fn loss(&self) -> &Term {
        &self.loss
    }

    /// Number of data rows baked into the loss, when it came from a data set.
    pub fn data_rows(&self) -> Option<usize> {
        self.data_rows
    }
}

/// Mean squared error of a model linear in the weights:
/// `(1/D) Σ_d (⟨x_d, (W₀, Wᵢ)⟩ − y_d)²`. Each feature row has
/// `shared_dim + task_dim` entries.
pub fn mean_squared_linear(
    features: &[Vec<Rational>],
    labels: &[Rational],
    shared_dim: Dim,
    task_dim: Dim,
) -> Result<TaskSpec, MtlError> {
    let rows = features.len();
    let p = shared_dim + task_dim;
    if rows == 0 {
        return Err(MtlError::EmptyData);
    }
    if labels.len() != rows {
        return Err(MtlError::Labels { rows, labels: labels.len() });
    }
    if let Some((row, r)) = features.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(MtlError::Features { row, expected: p, found: r.len() });
    }
    let x = LinMap::from_rows(p, features.to_vec()).expect("rows checked");
    let residual = build::minus(Term::linear(x), Term::constant_on(p, labels.to_vec()));
    let squares = Term::pair((0..rows).map(|d| build::square(build::var(rows, d))).collect()).expect("rows > 0");
    let inv = Rational::new(1.into(), (rows as i64).into());
    let mean = Term::linear(LinMap::new(1, rows, alloc::vec![inv; rows]).expect("shape"));
    let loss = build::after(mean, build::after(squares, residual));
    let mut spec = TaskSpec::new(shared_dim, task_dim, loss)?;
    spec.data_rows = Some(rows);
    Ok(spec)
}

/// `P0 ←π₀ P0 × Pi →π₁ Pi` decorated with the task loss.
pub fn build_task_span(t: &TaskSpec, tag: DomainTag) -> Result<OpenObjective, MtlError> {
    let n = t.shared_dim + t.task_dim;
    Ok(OpenObjective::new(
        LinMap::projection(n, 0, t.shared_dim),
        LinMap::projection(n, t.shared_dim, t.task_dim),
        t.loss.clone(),
        tag,
    )?)
}

/// The N-fold copy `X → X^N`, right-nested: `δ¹ = id`,
/// `δᴺ = (id ⊗ δᴺ⁻¹) ∘ δ`.
pub fn copy_n(x: Dim, n: usize, tag: DomainTag) -> OpenObjective {
    assert!(n >= 1, "at least one copy");
    let mut acc = OpenObjective::identity(x, tag);
    for _ in 1..n {
        let widened = OpenObjective::identity(x, tag).tensor(&acc).expect("same tag");
        acc = OpenObjective::generator(Generator::Copy, x, tag).compose(&widened).expect("boundaries match");
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtlProblem {
    tasks: Vec<TaskSpec>,
    composite: OpenObjective,
    optimizer: OpenDynam,
}

/// Final weights split into the shared block and one block per task.
#[derive(Debug, Clone, PartialEq)]
pub struct MtlWeights {
    pub shared: Vector,
    pub tasks: Vec<Vector>,
}

impl MtlProblem {
    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    /// The composite open objective `(⊗ᵢ Fⁱ) ∘ δᴺ`.
    pub fn composite(&self) -> &OpenObjective {
        &self.composite
    }

    /// `GD(⊗ᵢ Fⁱ) ∘ GD(δᴺ)`: the gradient descent functor applied piecewise.
    pub fn optimizer(&self) -> &OpenDynam {
        &self.optimizer
    }

    pub fn plan(&self) -> &ExecutionPlan {
        self.optimizer.plan()
    }

    pub fn apex(&self) -> Dim {
        self.composite.apex()
    }

    pub fn tag(&self) -> DomainTag {
        self.composite.tag()
    }

    /// Splits an apex point `(W₀, W₁, …, W_N)`.
    pub fn split(&self, x: &Vector) -> MtlWeights {
        let all = x.entries();
        let p0 = self.tasks[0].shared_dim;
        let kind = x.kind();
        let block = |lo: usize, len: usize| Vector::from_scalars(kind, all[lo..lo + len].to_vec()).expect("one kind");
        let mut offset = p0;
        let mut tasks = Vec::with_capacity(self.tasks.len());
        for t in &self.tasks {
            tasks.push(block(offset, t.task_dim));
            offset += t.task_dim;
        }
        MtlWeights { shared: block(0, p0), tasks }
    }
}

pub fn build_mtl(tasks: Vec<TaskSpec>, tag: DomainTag) -> Result<MtlProblem, MtlError> {
    let first = tasks.first().ok_or(MtlError::NoTasks)?;
    let p0 = first.shared_dim;
    if let Some((index, t)) = tasks.iter().enumerate().find(|(_, t)| t.shared_dim != p0) {
        return Err(MtlError::SharedDim { index, expected: p0, found: t.shared_dim });
    }
    let spans = tasks.iter().map(|t| build_task_span(t, tag)).collect::<Result<Vec<_>, _>>()?;
    let fan = copy_n(p0, tasks.len(), tag);
    let mut product = spans[0].clone();
    let mut product_gd = gd_functor(&spans[0]);
    for s in &spans[1..] {
        product = product.tensor(s)?;
        product_gd = product_gd.tensor(&gd_functor(s))?;
    }
    let composite = fan.compose(&product)?;
    let optimizer = gd_functor(&fan).compose(&product_gd)?;
    Ok(MtlProblem { tasks, composite, optimizer })
}

/// Distributed training: task gradients are evaluated per task through
/// `exec`, the shared block receives their sum.
pub fn run_algorithm1<E: Executor>(
    p: &MtlProblem,
    init: &Vector,
    cfg: &DescentConfig,
    exec: &E,
) -> Result<(MtlWeights, Trajectory), SolveError> {
    let t = run_distributed(p.plan(), p.tag(), init, cfg, exec)?;
    Ok((p.split(t.final_state()), t))
}

/// The composite objective `Σᵢ Lᵢ(W₀, Wᵢ)` written out directly, for
/// comparison with the pullback construction.
pub fn direct_sum_objective(tasks: &[TaskSpec]) -> Term {
    let p0 = tasks[0].shared_dim;
    let total = p0 + tasks.iter().map(|t| t.task_dim).sum::<usize>();
    let mut offset = p0;
    let mut acc = Term::zero(total, 1);
    for t in tasks {
        let select = Term::pair(alloc::vec![
            Term::proj(total, 0, p0).expect("in range"),
            Term::proj(total, offset, t.task_dim).expect("in range"),
        ])
        .expect("same domain");
        acc = build::plus(acc, build::after(t.loss.clone(), select));
        offset += t.task_dim;
    }
    simplify(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::gd::gd_functor;
    use crate::scalar::{Scalar, ScalarKind};
    use crate::solver::{ratio, run_monolithic};
    use crate::term::build::*;
    use alloc::vec;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    /// `Lᵢ = (w₀ − aᵢ)² + (wᵢ − bᵢ)²`.
    fn quadratic_task(a: i64, b: i64) -> TaskSpec {
        TaskSpec::new(1, 1, plus(shifted_square(2, 0, q(a)), shifted_square(2, 1, q(b)))).unwrap()
    }

    #[test]
    fn task_span_shape() {
        let t = quadratic_task(1, 2);
        let f = build_task_span(&t, DomainTag::PolyOverRationals).unwrap();
        assert_eq!(f.apex(), 2);
        assert_eq!(f.left().apply(&[q(5), q(7)]).unwrap(), vec![q(5)]);
        assert_eq!(f.eval(&Vector::from_ints(ScalarKind::Rational, &[1, 2])).unwrap(), Scalar::rational(0, 1));
    }

    #[test]
    fn composite_objective_and_pairing() {
        let p = build_mtl(vec![quadratic_task(1, 0), quadratic_task(3, 0)], DomainTag::PolyOverRationals).unwrap();
        assert_eq!(p.apex(), 3);
        let zero = Vector::from_ints(ScalarKind::Rational, &[0, 0, 0]);
        assert_eq!(p.composite().eval(&zero).unwrap(), Scalar::rational(10, 1));
        // (W₀, W₁, W₂) ↦ (W₀, (W₀, W₁), (W₀, W₂))
        let expected = LinMap::from_ints(5, 3, &[1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(p.plan().pairing(), &expected);
        assert_eq!(p.plan().subsystems().len(), 3);
    }

    #[test]
    fn apex_dimension_counts_shared_once() {
        let t1 = TaskSpec::new(2, 3, Term::zero(5, 1)).unwrap();
        let t2 = TaskSpec::new(2, 4, Term::zero(6, 1)).unwrap();
        let p = build_mtl(vec![t1, t2], DomainTag::Smooth).unwrap();
        assert_eq!(p.apex(), 9);
    }

    #[test]
    fn shared_dim_mismatch_is_rejected() {
        let t1 = TaskSpec::new(1, 1, Term::zero(2, 1)).unwrap();
        let t2 = TaskSpec::new(2, 1, Term::zero(3, 1)).unwrap();
        assert_eq!(
            build_mtl(vec![t1, t2], DomainTag::Smooth).unwrap_err(),
            MtlError::SharedDim { index: 1, expected: 1, found: 2 }
        );
        assert_eq!(build_mtl(vec![], DomainTag::Smooth).unwrap_err(), MtlError::NoTasks);
    }

    #[test]
    fn one_step_from_zero() {
        let p = build_mtl(vec![quadratic_task(1, 0), quadratic_task(3, 0)], DomainTag::PolyOverRationals).unwrap();
        let cfg = DescentConfig::new(ratio(1, 2), Some(1), None).unwrap();
        let zero = Vector::from_ints(ScalarKind::Rational, &[0, 0, 0]);
        let (w, t) = run_algorithm1(&p, &zero, &cfg, &Sequential).unwrap();
        assert_eq!(t.grad_norms[0], Scalar::rational(8, 1));
        assert_eq!(w.shared, Vector::from_ints(ScalarKind::Rational, &[4]));
        let (w, _) =
            run_algorithm1(&p, &zero, &DescentConfig::new(ratio(0, 1), Some(5), None).unwrap(), &Sequential).unwrap();
        assert_eq!(w.shared, Vector::from_ints(ScalarKind::Rational, &[0]));
    }

    #[test]
    fn three_tasks_match_monolithic_descent() {
        let tasks = vec![quadratic_task(1, 2), quadratic_task(3, -1), quadratic_task(-4, 0)];
        let p = build_mtl(tasks.clone(), DomainTag::PolyOverRationals).unwrap();
        let cfg = DescentConfig::new(ratio(1, 10), Some(30), None).unwrap();
        let x0 = Vector::from_ints(ScalarKind::Rational, &[1, 1, 1, 1]);
        let (_, dist) = run_algorithm1(&p, &x0, &cfg, &Sequential).unwrap();
        let mono = run_monolithic(&gd_functor(p.composite()), &x0, &cfg).unwrap();
        assert_eq!(dist, mono);
        let direct = direct_sum_objective(&tasks);
        assert!(crate::harness::compare_terms(
            "decoration",
            p.composite().objective(),
            &direct,
            DomainTag::PolyOverRationals,
            50,
            &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3),
            &Sequential
        )
        .passed);
    }

    #[test]
    fn single_datum_loss() {
        let t = mean_squared_linear(&[vec![q(1)]], &[q(2)], 1, 0).unwrap();
        assert_eq!(t.data_rows(), Some(1));
        let v = crate::term::eval(t.loss(), &Vector::from_ints(ScalarKind::Rational, &[5]), DomainTag::PolyOverRationals).unwrap();
        assert_eq!(v, Vector::from_ints(ScalarKind::Rational, &[9]));
        assert_eq!(mean_squared_linear(&[], &[], 1, 0).unwrap_err(), MtlError::EmptyData);
        assert!(matches!(mean_squared_linear(&[vec![q(1), q(2)]], &[q(2)], 1, 0), Err(MtlError::Features { .. })));
    }
}
