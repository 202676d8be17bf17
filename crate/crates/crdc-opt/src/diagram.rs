//! String diagrams of composites, kept alongside the morphisms they draw.
//!
//! A diagram is a set of boxes joined by wires. Boundaries are lists of
//! wires, so `δ` on `x` has one input wire and two output wires and a
//! monoidal product concatenates boundary lists. Dimension-0 wires are not
//! drawn. The gradient descent functor is the identity on wiring, so the
//! optimizer diagram is the objective diagram relabelled.

use std::fmt::Write;

use crdc_core::{Dim, Generator};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// A declared open objective or MTL task.
    Atom(String),
    Generator(Generator),
    /// Re-bundles wires whose dimensions sum to the same total.
    Regroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("boundary {left:?} does not meet boundary {right:?}")]
pub struct DiagramError {
    pub left: Vec<Dim>,
    pub right: Vec<Dim>,
}

/// How node labels are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Labels {
    Objective,
    Optimizer,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagram {
    nodes: Vec<Node>,
    wires: Vec<Dim>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Diagram {
    pub fn empty() -> Diagram {
        Diagram::default()
    }

    fn wire(&mut self, dim: Dim) -> Option<usize> {
        (dim > 0).then(|| {
            self.wires.push(dim);
            self.wires.len() - 1
        })
    }

    fn single(kind: NodeKind, ins: &[Dim], outs: &[Dim]) -> Diagram {
        let mut d = Diagram::empty();
        let inputs: Vec<usize> = ins.iter().filter_map(|&n| d.wire(n)).collect();
        let outputs: Vec<usize> = outs.iter().filter_map(|&n| d.wire(n)).collect();
        d.nodes.push(Node { kind, inputs: inputs.clone(), outputs: outputs.clone() });
        d.inputs = inputs;
        d.outputs = outputs;
        d
    }

    pub fn atom(label: &str, source: Dim, target: Dim) -> Diagram {
        Diagram::single(NodeKind::Atom(label.to_string()), &[source], &[target])
    }

    pub fn generator(kind: Generator, x: Dim) -> Diagram {
        let (ins, outs): (&[Dim], &[Dim]) = match kind {
            Generator::Copy => (&[x], &[x, x]),
            Generator::Merge => (&[x, x], &[x]),
            Generator::Unit => (&[], &[x]),
            Generator::Counit => (&[x], &[]),
        };
        Diagram::single(NodeKind::Generator(kind), ins, outs)
    }

    pub fn identity(x: Dim) -> Diagram {
        let mut d = Diagram::empty();
        if let Some(w) = d.wire(x) {
            d.inputs.push(w);
            d.outputs.push(w);
        }
        d
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn input_dims(&self) -> Vec<Dim> {
        self.inputs.iter().map(|&w| self.wires[w]).collect()
    }

    pub fn output_dims(&self) -> Vec<Dim> {
        self.outputs.iter().map(|&w| self.wires[w]).collect()
    }

    /// Appends `other`'s nodes and wires with fresh wire ids; returns the
    /// renumbering.
    fn absorb(&mut self, other: &Diagram) -> impl Fn(usize) -> usize {
        let shift = self.wires.len();
        self.wires.extend_from_slice(&other.wires);
        for n in &other.nodes {
            self.nodes.push(Node {
                kind: n.kind.clone(),
                inputs: n.inputs.iter().map(|w| w + shift).collect(),
                outputs: n.outputs.iter().map(|w| w + shift).collect(),
            });
        }
        move |w| w + shift
    }

    pub fn tensor(&self, other: &Diagram) -> Diagram {
        let mut d = self.clone();
        let shift = d.absorb(other);
        d.inputs.extend(other.inputs.iter().map(|&w| shift(w)));
        d.outputs.extend(other.outputs.iter().map(|&w| shift(w)));
        d
    }

    /// `other` after `self`, joining `self`'s outputs to `other`'s inputs.
    pub fn compose(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        let (left, right) = (self.output_dims(), other.input_dims());
        if left.iter().sum::<Dim>() != right.iter().sum::<Dim>() {
            return Err(DiagramError { left, right });
        }
        let mut d = self.clone();
        let mut meet = d.outputs.clone();
        if left != right {
            let fresh: Vec<usize> = right.iter().filter_map(|&n| d.wire(n)).collect();
            d.nodes.push(Node { kind: NodeKind::Regroup, inputs: meet, outputs: fresh.clone() });
            meet = fresh;
        }
        let shift = d.absorb(other);
        let joined: Vec<(usize, usize)> = other.inputs.iter().map(|&w| shift(w)).zip(meet).collect();
        let rename = |w: usize| joined.iter().find(|(from, _)| *from == w).map_or(w, |(_, to)| *to);
        let first_new = d.nodes.len() - other.nodes.len();
        for n in &mut d.nodes[first_new..] {
            n.inputs.iter_mut().for_each(|w| *w = rename(*w));
            n.outputs.iter_mut().for_each(|w| *w = rename(*w));
        }
        d.outputs = other.outputs.iter().map(|&w| rename(shift(w))).collect();
        Ok(d)
    }

    /// Graphviz source with one node per box and one edge per wire end.
    pub fn to_dot(&self, name: &str, labels: Labels) -> String {
        let mut out = String::new();
        writeln!(out, "digraph {name} {{").unwrap();
        if !self.nodes.is_empty() || !self.inputs.is_empty() {
            writeln!(out, "  rankdir=LR;").unwrap();
        }
        // (sources, sinks) per wire
        let mut ends: Vec<(Vec<String>, Vec<String>)> = vec![(Vec::new(), Vec::new()); self.wires.len()];
        for (k, &w) in self.inputs.iter().enumerate() {
            writeln!(out, "  in{k} [shape=point];").unwrap();
            ends[w].0.push(format!("in{k}"));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let (label, shape) = match (&n.kind, labels) {
                (NodeKind::Atom(l), Labels::Objective) => (l.clone(), "box"),
                (NodeKind::Atom(l), Labels::Optimizer) => (format!("gd({l})"), "box"),
                (NodeKind::Generator(g), _) => (g.symbol().to_string(), "circle"),
                (NodeKind::Regroup, _) => ("≅".to_string(), "diamond"),
            };
            writeln!(out, "  n{i} [shape={shape}, label=\"{}\"];", label.replace('"', "\\\"")).unwrap();
            n.inputs.iter().for_each(|&w| ends[w].1.push(format!("n{i}")));
            n.outputs.iter().for_each(|&w| ends[w].0.push(format!("n{i}")));
        }
        for (k, &w) in self.outputs.iter().enumerate() {
            writeln!(out, "  out{k} [shape=point];").unwrap();
            ends[w].1.push(format!("out{k}"));
        }
        for (w, (sources, sinks)) in ends.iter().enumerate() {
            let all: Vec<&String> = sources.iter().chain(sinks).collect();
            if let Some((first, rest)) = all.split_first() {
                for other in rest {
                    writeln!(out, "  {first} -> {other} [label=\"{}\"];", self.wires[w]).unwrap();
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mtl(n: usize) -> Diagram {
        let mut fan = Diagram::identity(1);
        for _ in 1..n {
            fan = Diagram::generator(Generator::Copy, 1).compose(&Diagram::identity(1).tensor(&fan)).unwrap();
        }
        let mut tasks = Diagram::atom("task1", 1, 1);
        for i in 2..=n {
            tasks = tasks.tensor(&Diagram::atom(&format!("task{i}"), 1, 1));
        }
        fan.compose(&tasks).unwrap()
    }

    fn strip_labels(dot: &str) -> String {
        dot.lines().map(|l| l.split(", label=").next().unwrap()).collect::<Vec<_>>().join("\n")
    }

    #[test]
    fn mtl_shape() {
        let d = mtl(2);
        let copies = d.nodes().iter().filter(|n| n.kind == NodeKind::Generator(Generator::Copy)).count();
        let atoms = d.nodes().iter().filter(|n| matches!(n.kind, NodeKind::Atom(_))).count();
        assert_eq!((copies, atoms), (1, 2));
        assert_eq!(d.input_dims(), vec![1]);
        assert_eq!(d.output_dims(), vec![1, 1]);
        let dot = d.to_dot("objective", Labels::Objective);
        // input → δ, δ → each task, each task → its output
        assert_eq!(dot.matches(" -> ").count(), 5);
        let gd = d.to_dot("objective", Labels::Optimizer);
        assert!(gd.contains("gd(task1)"));
        assert_eq!(strip_labels(&dot), strip_labels(&gd));
        assert_eq!(mtl(3).nodes().len(), 5);
    }

    #[test]
    fn identity_is_a_unit_for_wiring() {
        let f = Diagram::atom("f", 2, 1);
        assert_eq!(Diagram::identity(2).compose(&f).unwrap().to_dot("g", Labels::Objective), f.to_dot("g", Labels::Objective));
        assert_eq!(f.compose(&Diagram::identity(1)).unwrap().to_dot("g", Labels::Objective), f.to_dot("g", Labels::Objective));
    }

    #[test]
    fn regroup_and_mismatch() {
        let f = Diagram::atom("f", 1, 2);
        let g = Diagram::atom("a", 1, 1).tensor(&Diagram::atom("b", 1, 1));
        let h = f.compose(&g).unwrap();
        assert!(h.nodes().iter().any(|n| n.kind == NodeKind::Regroup));
        assert!(Diagram::atom("f", 1, 3).compose(&g).is_err());
    }

    #[test]
    fn empty_graph() {
        assert_eq!(Diagram::empty().to_dot("objective", Labels::Objective), "digraph objective {\n}\n");
        assert!(Diagram::identity(0).nodes().is_empty());
    }
}
