//! Law checks over everything a problem file builds.

use crdc_core::gd::{check_functoriality, check_hypergraph, check_monoidality, check_naturality, check_optimizer_comp};
use crdc_core::harness::compare_terms;
use crdc_core::mtl::{build_task_span, direct_sum_objective};
use crdc_core::{gen, Executor, LawReport, OpenObjective};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::problem::{Origin, Problem};

fn labelled(mut r: LawReport, what: &str) -> LawReport {
    r.law = format!("{}[{what}]", r.law);
    r
}

fn pair_laws<E: Executor>(
    a: &OpenObjective,
    b: &OpenObjective,
    what: &str,
    trials: usize,
    rng: &mut ChaCha8Rng,
    exec: &E,
    out: &mut Vec<LawReport>,
) {
    out.push(labelled(check_functoriality(a, b, trials, rng, exec), what));
    out.push(labelled(check_optimizer_comp(a, b, trials, rng, exec), what));
}

/// Naturality for every declared objective against a random linear map,
/// functoriality and the optimizer equivalence for every composition,
/// monoidality for every tensor, and generator preservation. The MTL block
/// adds its decoration law. Reports come back in a fixed order for a fixed
/// seed.
pub fn check_problem<E: Executor>(p: &Problem, trials: usize, seed: u64, exec: &E) -> Vec<LawReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = p.tag();
    let mut out = Vec::new();
    for e in p.entries() {
        match &e.origin {
            Origin::Declared => {
                let n = e.objective.apex();
                let phi = gen::matrix(&mut rng, n, n);
                out.push(labelled(check_naturality(e.objective.objective(), &phi, tag, trials, &mut rng, exec), &e.name));
            }
            Origin::Compose(names) => {
                let mut acc = p.entry(&names[0]).expect("built").objective.clone();
                for n in &names[1..] {
                    let next = &p.entry(n).expect("built").objective;
                    pair_laws(&acc, next, &e.name, trials, &mut rng, exec, &mut out);
                    acc = acc.compose(next).expect("built");
                }
            }
            Origin::Tensor(names) => {
                let mut acc = p.entry(&names[0]).expect("built").objective.clone();
                for n in &names[1..] {
                    let next = &p.entry(n).expect("built").objective;
                    let r = check_monoidality(acc.objective(), next.objective(), tag, trials, &mut rng, exec);
                    out.push(labelled(r, &e.name));
                    acc = acc.tensor(next).expect("built");
                }
            }
            Origin::Generator(kind, x) => out.push(labelled(check_hypergraph(*kind, *x, tag), &e.name)),
            Origin::Identity(_) => {}
        }
    }
    if let Some(m) = p.mtl() {
        let tasks = m.problem.tasks();
        for (i, t) in tasks.iter().enumerate() {
            let n = t.shared_dim() + t.task_dim();
            let phi = gen::matrix(&mut rng, n, n);
            out.push(labelled(check_naturality(t.loss(), &phi, tag, trials, &mut rng, exec), &format!("task{}", i + 1)));
        }
        let direct = direct_sum_objective(tasks);
        let r = compare_terms("decoration", m.problem.composite().objective(), &direct, tag, trials, &mut rng, exec);
        out.push(labelled(r, "mtl"));
        let fan = crdc_core::mtl::copy_n(tasks[0].shared_dim(), tasks.len(), tag);
        let mut product = build_task_span(&tasks[0], tag).expect("built");
        for t in &tasks[1..] {
            product = product.tensor(&build_task_span(t, tag).expect("built")).expect("built");
        }
        pair_laws(&fan, &product, "mtl", trials, &mut rng, exec, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crdc_core::Sequential;
    use std::path::Path;

    #[test]
    fn reports_every_construction() {
        let p = Problem::parse(
            r#"{
              "domain": "smooth",
              "objectives": {
                "f": { "left": "[[1, 0]]", "right": "[[0, 1]]", "objective": "(comp (sin) (comp (mul) (id 2)))" }
              },
              "program": [
                { "let": "d", "generator": "copy", "dim": 1 },
                { "let": "ff", "tensor": ["f", "f"] },
                { "let": "h", "compose": ["d", "ff"] }
              ]
            }"#,
            Path::new("."),
        )
        .unwrap();
        let reports = check_problem(&p, 20, 7, &Sequential);
        let laws: Vec<&str> = reports.iter().map(|r| r.law.as_str()).collect();
        assert_eq!(laws, ["naturality[f]", "hypergraph[d]", "monoidality[ff]", "functoriality[h]", "optimizer_comp[h]"]);
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
        assert_eq!(reports, check_problem(&p, 20, 7, &crate::Rayon));
    }
}
