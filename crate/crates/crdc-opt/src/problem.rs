//! Problem files: declared open objectives, a linear composition program,
//! an optional multitask block and solver settings.
//!
//! ```json
//! {
//!   "domain": "rational",
//!   "objectives": {
//!     "f": { "left": "[[1, 0]]", "right": "[[0, 1]]", "objective": "(comp (mul) (id 2))" }
//!   },
//!   "program": [
//!     { "let": "d", "generator": "copy", "dim": 1 },
//!     { "let": "h", "compose": ["d", "f"] }
//!   ],
//!   "result": "h",
//!   "solver": { "gamma": "1/10", "max_iters": 100, "tol": "1e-9", "init": [0, 0] }
//! }
//! ```
//!
//! `compose: [a, b]` glues the right boundary of `a` to the left boundary of
//! `b`. Instead of `objectives`/`program`/`result` a file may carry an
//! `mtl` block: `{"shared_dim": k, "tasks": [{"dim": p, "loss": "<s-expr>"}
//! | {"dim": p, "loss": {"csv": path, "kind": "meanSquaredLinear", "header": bool}}]}`.
//! CSV paths are relative to the problem file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crdc_core::mtl::{build_mtl, MtlProblem, TaskSpec};
use crdc_core::sexpr::parse_matrix;
use crdc_core::{
    gd_functor, parse_term, DescentConfig, Dim, DomainTag, Generator, Mode, OpenDynam, OpenObjective, Scalar,
    ScalarKind, Vector,
};
use serde::Deserialize;
use serde_json::Value;

use crate::csv_task::{load_csv_task, LossKind};
use crate::diagram::Diagram;

pub const DEFAULT_GAMMA: &str = "1/10";
pub const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub domain: String,
    #[serde(default)]
    pub objectives: BTreeMap<String, ObjectiveDecl>,
    #[serde(default)]
    pub program: Vec<Step>,
    pub result: Option<String>,
    pub mtl: Option<MtlDecl>,
    #[serde(default)]
    pub solver: SolverDecl,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDecl {
    pub left: Value,
    pub right: Value,
    pub objective: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    #[serde(rename = "let")]
    pub name: String,
    pub compose: Option<Vec<String>>,
    pub tensor: Option<Vec<String>>,
    pub generator: Option<String>,
    pub identity: Option<Dim>,
    pub dim: Option<Dim>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MtlDecl {
    pub shared_dim: Dim,
    pub tasks: Vec<TaskDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDecl {
    pub dim: Dim,
    pub loss: LossDecl,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LossDecl {
    Term(String),
    Csv {
        csv: PathBuf,
        kind: LossKind,
        #[serde(default)]
        header: bool,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDecl {
    pub gamma: Option<Value>,
    pub max_iters: Option<usize>,
    pub tol: Option<Value>,
    pub init: Option<Vec<Value>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown domain `{0}` (expected smooth, rational or integer)")]
    Domain(String),
    #[error("objective `{name}`: {message}")]
    Objective { name: String, message: String },
    #[error("step {index} (`{name}`): {message}")]
    Step { index: usize, name: String, message: String },
    #[error("`{0}` is defined twice")]
    Duplicate(String),
    #[error("result `{0}` is not defined")]
    Result(String),
    #[error("mtl: {0}")]
    Mtl(String),
    #[error("solver: {0}")]
    Solver(String),
}

/// How a named morphism was made.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Declared,
    Compose(Vec<String>),
    Tensor(Vec<String>),
    Generator(Generator, Dim),
    Identity(Dim),
}

/// A named morphism with its image under the gradient descent functor and
/// its diagram.
#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub origin: Origin,
    pub objective: OpenObjective,
    pub optimizer: OpenDynam,
    pub diagram: Diagram,
}

#[derive(Debug, Clone)]
pub struct MtlBlock {
    pub problem: MtlProblem,
    pub diagram: Diagram,
}

/// What `run`, `dot` and `grad` act on by default.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub name: &'a str,
    pub objective: &'a OpenObjective,
    pub optimizer: &'a OpenDynam,
    pub diagram: &'a Diagram,
    pub mtl: Option<&'a MtlProblem>,
}

#[derive(Debug, Clone, Default)]
pub struct SolverSettings {
    pub gamma: Option<Scalar>,
    pub max_iters: Option<usize>,
    pub tol: Option<Scalar>,
    pub init: Option<Vector>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    tag: DomainTag,
    entries: Vec<Entry>,
    result: Option<String>,
    mtl: Option<MtlBlock>,
    pub solver: SolverSettings,
}

pub fn parse_domain(name: &str) -> Option<DomainTag> {
    match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "smooth" | "real" | "euclidean" => Some(DomainTag::Smooth),
        "rational" | "polyrational" | "polyoverrationals" => Some(DomainTag::PolyOverRationals),
        "integer" | "polyinteger" | "polyoverintegers" => Some(DomainTag::PolyOverIntegers),
        _ => None,
    }
}

/// Matrix and number literals may be given as strings or as JSON values.
fn literal(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(literal).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn scalar(v: &Value, kind: ScalarKind, what: &str) -> Result<Scalar, ProblemError> {
    let text = literal(v);
    Scalar::parse_as(&text, kind).map_err(|_| ProblemError::Solver(format!("{what}: `{text}` is not a number")))
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, ProblemError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ProblemError::Io { path: path.to_path_buf(), source })?;
        Problem::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// `base` resolves relative CSV paths.
    pub fn parse(text: &str, base: &Path) -> Result<Problem, ProblemError> {
        let file: ProblemFile = serde_json::from_str(text)?;
        Problem::build(file, base)
    }

    pub fn build(file: ProblemFile, base: &Path) -> Result<Problem, ProblemError> {
        let tag = parse_domain(&file.domain).ok_or_else(|| ProblemError::Domain(file.domain.clone()))?;
        let mut problem = Problem { tag, entries: Vec::new(), result: None, mtl: None, solver: SolverSettings::default() };
        for (name, decl) in &file.objectives {
            let entry = declare(name, decl, tag)?;
            problem.entries.push(entry);
        }
        for (i, step) in file.program.iter().enumerate() {
            let entry = problem.step(i + 1, step)?;
            if problem.entry(&entry.name).is_some() {
                return Err(ProblemError::Duplicate(entry.name));
            }
            problem.entries.push(entry);
        }
        if let Some(m) = &file.mtl {
            if file.result.is_some() {
                return Err(ProblemError::Mtl("give either `result` or `mtl`, not both".into()));
            }
            problem.mtl = Some(mtl_block(m, tag, base)?);
        }
        problem.result = match file.result {
            Some(r) if problem.entry(&r).is_none() => return Err(ProblemError::Result(r)),
            Some(r) => Some(r),
            None if problem.mtl.is_some() => None,
            None => match (file.program.last(), problem.entries.as_slice()) {
                (Some(step), _) => Some(step.name.clone()),
                (None, [only]) => Some(only.name.clone()),
                _ => None,
            },
        };
        problem.solver = settings(&file.solver, tag.scalar_kind())?;
        Ok(problem)
    }

    fn step(&self, index: usize, s: &Step) -> Result<Entry, ProblemError> {
        let fail = |message: String| ProblemError::Step { index, name: s.name.clone(), message };
        let lookup = |n: &String| self.entry(n).ok_or_else(|| fail(format!("`{n}` is not defined")));
        let ops = [s.compose.is_some(), s.tensor.is_some(), s.generator.is_some(), s.identity.is_some()];
        if ops.iter().filter(|&&b| b).count() != 1 {
            return Err(fail("give exactly one of compose, tensor, generator, identity".into()));
        }
        let fold = |names: &Vec<String>, tensor: bool| -> Result<Entry, ProblemError> {
            let (first, rest) = names.split_first().ok_or_else(|| fail("needs at least one operand".into()))?;
            let mut acc = lookup(first)?.clone();
            for n in rest {
                let next = lookup(n)?;
                let err = |e: &dyn std::fmt::Display| fail(format!("`{}` with `{n}`: {e}", acc.name));
                acc = if tensor {
                    Entry {
                        name: String::new(),
                        origin: Origin::Declared,
                        objective: acc.objective.tensor(&next.objective).map_err(|e| err(&e))?,
                        optimizer: acc.optimizer.tensor(&next.optimizer).map_err(|e| err(&e))?,
                        diagram: acc.diagram.tensor(&next.diagram),
                    }
                } else {
                    Entry {
                        name: String::new(),
                        origin: Origin::Declared,
                        objective: acc.objective.compose(&next.objective).map_err(|e| err(&e))?,
                        optimizer: acc.optimizer.compose(&next.optimizer).map_err(|e| err(&e))?,
                        diagram: acc.diagram.compose(&next.diagram).map_err(|e| err(&e))?,
                    }
                };
                acc.name = n.clone();
            }
            Ok(acc)
        };
        let (origin, objective, optimizer, diagram) = if let Some(names) = &s.compose {
            let e = fold(names, false)?;
            (Origin::Compose(names.clone()), e.objective, e.optimizer, e.diagram)
        } else if let Some(names) = &s.tensor {
            let e = fold(names, true)?;
            (Origin::Tensor(names.clone()), e.objective, e.optimizer, e.diagram)
        } else if let Some(g) = &s.generator {
            let kind = Generator::parse(g).ok_or_else(|| fail(format!("unknown generator `{g}`")))?;
            let x = s.dim.ok_or_else(|| fail("generator needs `dim`".into()))?;
            (
                Origin::Generator(kind, x),
                OpenObjective::generator(kind, x, self.tag),
                OpenDynam::generator(kind, x, self.tag),
                Diagram::generator(kind, x),
            )
        } else {
            let x = s.identity.expect("one op is present");
            (Origin::Identity(x), OpenObjective::identity(x, self.tag), OpenDynam::identity(x, self.tag), Diagram::identity(x))
        };
        Ok(Entry { name: s.name.clone(), origin, objective, optimizer, diagram })
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn mtl(&self) -> Option<&MtlBlock> {
        self.mtl.as_ref()
    }

    /// The MTL composite when present, else the designated result.
    pub fn target(&self) -> Option<Target<'_>> {
        if let Some(m) = &self.mtl {
            return Some(Target {
                name: "mtl",
                objective: m.problem.composite(),
                optimizer: m.problem.optimizer(),
                diagram: &m.diagram,
                mtl: Some(&m.problem),
            });
        }
        let e = self.entry(self.result.as_deref()?)?;
        Some(Target { name: &e.name, objective: &e.objective, optimizer: &e.optimizer, diagram: &e.diagram, mtl: None })
    }

    /// Command-line values override the file, which overrides the defaults.
    pub fn config(
        &self,
        gamma: Option<&str>,
        max_iters: Option<usize>,
        tol: Option<&str>,
        mode: Mode,
    ) -> Result<DescentConfig, ProblemError> {
        let kind = self.tag.scalar_kind();
        let parse = |text: &str, what: &str| scalar(&Value::String(text.into()), kind, what);
        let gamma = match gamma {
            Some(g) => parse(g, "gamma")?,
            None => self.solver.gamma.clone().map_or_else(|| parse(DEFAULT_GAMMA, "gamma"), Ok)?,
        };
        let tol = match tol {
            Some(t) => Some(parse(t, "tol")?),
            None => self.solver.tol.clone(),
        };
        let max_iters = max_iters.or(self.solver.max_iters).or(Some(DEFAULT_MAX_ITERS));
        DescentConfig::new(gamma, max_iters, tol)
            .map(|c| c.with_mode(mode))
            .map_err(|e| ProblemError::Solver(e.to_string()))
    }

    /// The file's initial point, or zeros on the target apex.
    pub fn init(&self) -> Option<Vector> {
        let apex = self.target()?.objective.apex();
        Some(self.solver.init.clone().unwrap_or_else(|| Vector::zeros(self.tag.scalar_kind(), apex)))
    }
}

fn declare(name: &str, decl: &ObjectiveDecl, tag: DomainTag) -> Result<Entry, ProblemError> {
    let fail = |message: String| ProblemError::Objective { name: name.to_string(), message };
    let objective = parse_term(&decl.objective, tag).map_err(|e| fail(e.to_string()))?;
    let apex = objective.dom();
    let leg = |v: &Value, side: &str| {
        parse_matrix(&literal(v), Some(apex)).map_err(|e| fail(format!("{side} leg: {e}")))
    };
    let (left, right) = (leg(&decl.left, "left")?, leg(&decl.right, "right")?);
    let f = OpenObjective::new(left, right, objective, tag).map_err(|e| fail(e.to_string()))?;
    Ok(Entry {
        name: name.to_string(),
        origin: Origin::Declared,
        optimizer: gd_functor(&f),
        diagram: Diagram::atom(name, f.source(), f.target()),
        objective: f,
    })
}

fn mtl_block(m: &MtlDecl, tag: DomainTag, base: &Path) -> Result<MtlBlock, ProblemError> {
    let mut tasks = Vec::with_capacity(m.tasks.len());
    for (i, t) in m.tasks.iter().enumerate() {
        let fail = |msg: String| ProblemError::Mtl(format!("task {}: {msg}", i + 1));
        let spec = match &t.loss {
            LossDecl::Term(text) => {
                let loss = parse_term(text, tag).map_err(|e| fail(e.to_string()))?;
                TaskSpec::new(m.shared_dim, t.dim, loss).map_err(|e| fail(e.to_string()))?
            }
            LossDecl::Csv { csv, kind, header } => {
                let path = base.join(csv);
                let spec = load_csv_task(&path, *kind, m.shared_dim, t.dim, *header)
                    .map_err(|e| fail(format!("{}: {e}", path.display())))?;
                spec.loss().check_domain(tag).map_err(|e| fail(e.to_string()))?;
                spec
            }
        };
        tasks.push(spec);
    }
    let diagram = mtl_diagram(&tasks);
    let problem = build_mtl(tasks, tag).map_err(|e| ProblemError::Mtl(e.to_string()))?;
    Ok(MtlBlock { problem, diagram })
}

/// `(⊗ᵢ taskᵢ) ∘ δᴺ` with the copies right-nested.
pub fn mtl_diagram(tasks: &[TaskSpec]) -> Diagram {
    let Some(first) = tasks.first() else { return Diagram::empty() };
    let p0 = first.shared_dim();
    let mut fan = Diagram::identity(p0);
    for _ in 1..tasks.len() {
        fan = Diagram::generator(Generator::Copy, p0)
            .compose(&Diagram::identity(p0).tensor(&fan))
            .expect("copy outputs meet the widened fan");
    }
    let mut product = Diagram::empty();
    for (i, t) in tasks.iter().enumerate() {
        product = product.tensor(&Diagram::atom(&format!("task{}", i + 1), p0, t.task_dim()));
    }
    fan.compose(&product).expect("one shared wire per task")
}

fn settings(s: &SolverDecl, kind: ScalarKind) -> Result<SolverSettings, ProblemError> {
    let gamma = s.gamma.as_ref().map(|v| scalar(v, kind, "gamma")).transpose()?;
    let tol = s.tol.as_ref().map(|v| scalar(v, kind, "tol")).transpose()?;
    let init = match &s.init {
        None => None,
        Some(values) => {
            let xs = values.iter().map(|v| scalar(v, kind, "init")).collect::<Result<Vec<_>, _>>()?;
            Some(Vector::from_scalars(kind, xs).map_err(|e| ProblemError::Solver(e.to_string()))?)
        }
    };
    Ok(SolverSettings { gamma, max_iters: s.max_iters, tol, init })
}
