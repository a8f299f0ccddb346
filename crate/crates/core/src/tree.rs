//! Algebraic computation trees. Inner vertices either compute (outdegree 1)
//! or branch three ways on a sign (outdegree 3); leaves accept or reject.
//!
//! A tree may physically share identical subtrees between several parents.
//! Every semantic quantity (height, leaf sets) refers to the logical tree,
//! i.e. the unfolding of the stored graph from the root.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};
use crate::poly::{rational_str, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

impl VertexId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Inputs are 1-based. A `Var` must name a computation vertex that precedes
/// the user on every root path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Operand {
    Const(#[serde(with = "rational_str")] Rational),
    Input(usize),
    Var(VertexId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Add,
    Sub,
    Mul,
    /// Representable so that files using it can be diagnosed; never executed.
    Div,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Computation {
        op: Op,
        left: Operand,
        right: Operand,
        next: VertexId,
    },
    Branch {
        test: Operand,
        gt: VertexId,
        eq: VertexId,
        lt: VertexId,
    },
    Leaf {
        accept: bool,
    },
}

impl VertexKind {
    /// Successor ids in edge order; a branch always yields three entries.
    pub fn successors(&self) -> Vec<&VertexId> {
        match self {
            VertexKind::Computation { next, .. } => vec![next],
            VertexKind::Branch { gt, eq, lt, .. } => vec![gt, eq, lt],
            VertexKind::Leaf { .. } => Vec::new(),
        }
    }

    fn operands(&self) -> Vec<&Operand> {
        match self {
            VertexKind::Computation { left, right, .. } => vec![left, right],
            VertexKind::Branch { test, .. } => vec![test],
            VertexKind::Leaf { .. } => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    DanglingId,
    DuplicateId,
    Cycle,
    InputOutOfRange,
    PredecessorRule,
    OutDegree,
    Malformed,
    Division,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexId>,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, vertex: Option<&VertexId>, message: String) -> Self {
        Self {
            kind,
            vertex: vertex.cloned(),
            message,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    arity: usize,
    root: VertexId,
    vertices: IndexMap<VertexId, VertexKind>,
}

impl Tree {
    /// Assembles a tree; only duplicate ids are rejected here; everything
    /// else is reported by [`Tree::validate`].
    pub fn new(
        arity: usize,
        root: VertexId,
        vertices: impl IntoIterator<Item = (VertexId, VertexKind)>,
    ) -> Result<Tree> {
        let mut map = IndexMap::new();
        let mut diags = Vec::new();
        for (id, kind) in vertices {
            if map.contains_key(&id) {
                diags.push(Diagnostic::new(
                    DiagnosticKind::DuplicateId,
                    Some(&id),
                    format!("duplicate vertex id {id}"),
                ));
            } else {
                map.insert(id, kind);
            }
        }
        if !diags.is_empty() {
            return Err(Error::InvalidTree(diags));
        }
        Ok(Tree {
            arity,
            root,
            vertices: map,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &VertexId {
        &self.root
    }

    pub fn vertex(&self, id: &VertexId) -> Option<&VertexKind> {
        self.vertices.get(id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&VertexId, &VertexKind)> {
        self.vertices.iter()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Every structural violation; empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if !self.vertices.contains_key(&self.root) {
            diags.push(Diagnostic::new(
                DiagnosticKind::DanglingId,
                Some(&self.root),
                format!("root {} does not exist", self.root),
            ));
        }
        for (id, kind) in &self.vertices {
            for succ in kind.successors() {
                if !self.vertices.contains_key(succ) {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::DanglingId,
                        Some(id),
                        format!("vertex {id} points to missing vertex {succ}"),
                    ));
                }
            }
            for operand in kind.operands() {
                match operand {
                    Operand::Input(i) if *i == 0 || *i > self.arity => diags.push(Diagnostic::new(
                        DiagnosticKind::InputOutOfRange,
                        Some(id),
                        format!("vertex {id} reads X_{i} but the tree has {} inputs", self.arity),
                    )),
                    Operand::Var(v) if !self.vertices.contains_key(v) => diags.push(Diagnostic::new(
                        DiagnosticKind::DanglingId,
                        Some(id),
                        format!("vertex {id} reads missing vertex {v}"),
                    )),
                    _ => {}
                }
            }
            if let VertexKind::Computation { op: Op::Div, .. } = kind {
                diags.push(Diagnostic::new(
                    DiagnosticKind::Division,
                    Some(id),
                    format!("vertex {id} divides; trees must be division-free"),
                ));
            }
        }
        if !diags.is_empty() {
            return diags;
        }
        let graph = IndexGraph::new(self);
        if let Some(v) = graph.find_cycle() {
            let id = self.vertices.get_index(v).unwrap().0;
            diags.push(Diagnostic::new(
                DiagnosticKind::Cycle,
                Some(id),
                format!("cycle through vertex {id}"),
            ));
            return diags;
        }
        self.check_predecessors(&graph, &mut diags);
        diags
    }

    fn check_predecessors(&self, graph: &IndexGraph, diags: &mut Vec<Diagnostic>) {
        let must = graph.must_ancestors(self);
        for (v, kind) in self.vertices.values().enumerate() {
            let Some(anc) = &must[v] else { continue };
            let id = self.vertices.get_index(v).unwrap().0;
            for operand in kind.operands() {
                let Operand::Var(u) = operand else { continue };
                let ui = self.vertices.get_index_of(u).unwrap();
                let is_comp = matches!(self.vertices[ui], VertexKind::Computation { .. });
                if !is_comp {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::PredecessorRule,
                        Some(id),
                        format!("vertex {id} reads {u}, which is not a computation vertex"),
                    ));
                } else if anc.binary_search(&ui).is_err() {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::PredecessorRule,
                        Some(id),
                        format!("vertex {id} reads {u}, which does not precede it on every root path"),
                    ));
                }
            }
        }
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTree(diags))
        }
    }

    pub(crate) fn ensure_division_free(&self) -> Result<()> {
        for (id, kind) in &self.vertices {
            if let VertexKind::Computation { op: Op::Div, .. } = kind {
                return Err(Error::Division(id.to_string()));
            }
        }
        Ok(())
    }

    pub fn metrics(&self) -> Result<TreeMetrics> {
        self.ensure_valid()?;
        let graph = IndexGraph::new(self);
        let order = graph.post_order();
        let n = self.vertices.len();
        let mut height = vec![0usize; n];
        let mut leaves = vec![BigUint::zero(); n];
        let mut yes = vec![BigUint::zero(); n];
        let mut mults = vec![0usize; n];
        for &v in &order {
            match &self.vertices[v] {
                VertexKind::Leaf { accept } => {
                    height[v] = 1;
                    leaves[v] = BigUint::one();
                    yes[v] = if *accept { BigUint::one() } else { BigUint::zero() };
                }
                kind => {
                    let mut h = 0;
                    let mut m = 0;
                    let (mut l, mut y) = (BigUint::zero(), BigUint::zero());
                    for &c in &graph.children[v] {
                        h = h.max(height[c]);
                        m = m.max(mults[c]);
                        l += &leaves[c];
                        y += &yes[c];
                    }
                    height[v] = h + 1;
                    let own = matches!(kind, VertexKind::Computation { op: Op::Mul, .. });
                    mults[v] = m + usize::from(own);
                    leaves[v] = l;
                    yes[v] = y;
                }
            }
        }
        let r = graph.root;
        Ok(TreeMetrics {
            height: height[r],
            leaf_count: leaves[r].clone(),
            yes_leaf_count: yes[r].clone(),
            mult_count_max: mults[r],
        })
    }

    pub fn height(&self) -> Result<usize> {
        Ok(self.metrics()?.height)
    }

    /// Tree file text (pretty JSON). Emitting a parsed canonical file
    /// reproduces it byte for byte.
    pub fn to_json(&self) -> String {
        let file = TreeFile {
            inputs: self.arity,
            root: self.root.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|(id, k)| RawVertex::from_kind(id, k))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("tree serialization cannot fail")
    }

    /// Parses a tree file. Records whose fields do not fit their kind
    /// (wrong outdegree, missing operands) are reported as diagnostics.
    pub fn from_json(text: &str) -> Result<Tree> {
        let file: TreeFile = serde_json::from_str(text)?;
        let mut diags = Vec::new();
        let mut out = Vec::with_capacity(file.vertices.len());
        for raw in file.vertices {
            match raw.into_kind() {
                Ok(pair) => out.push(pair),
                Err(mut d) => diags.append(&mut d),
            }
        }
        if !diags.is_empty() {
            return Err(Error::InvalidTree(diags));
        }
        Tree::new(file.inputs, file.root, out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeMetrics {
    /// Vertices on the longest root-to-leaf path.
    pub height: usize,
    #[serde(serialize_with = "display_str")]
    pub leaf_count: BigUint,
    #[serde(serialize_with = "display_str")]
    pub yes_leaf_count: BigUint,
    pub mult_count_max: usize,
}

fn display_str<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    inputs: usize,
    root: VertexId,
    vertices: Vec<RawVertex>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: VertexId,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<Op>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Operand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Operand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    next: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    test: Option<Operand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eq: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lt: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accept: Option<bool>,
}

impl RawVertex {
    fn from_kind(id: &VertexId, kind: &VertexKind) -> RawVertex {
        let mut raw = RawVertex {
            id: id.clone(),
            kind: String::new(),
            op: None,
            left: None,
            right: None,
            next: None,
            test: None,
            gt: None,
            eq: None,
            lt: None,
            accept: None,
        };
        match kind {
            VertexKind::Computation { op, left, right, next } => {
                raw.kind = "computation".into();
                raw.op = Some(*op);
                raw.left = Some(left.clone());
                raw.right = Some(right.clone());
                raw.next = Some(next.clone());
            }
            VertexKind::Branch { test, gt, eq, lt } => {
                raw.kind = "branch".into();
                raw.test = Some(test.clone());
                raw.gt = Some(gt.clone());
                raw.eq = Some(eq.clone());
                raw.lt = Some(lt.clone());
            }
            VertexKind::Leaf { accept } => {
                raw.kind = "leaf".into();
                raw.accept = Some(*accept);
            }
        }
        raw
    }

    fn into_kind(self) -> std::result::Result<(VertexId, VertexKind), Vec<Diagnostic>> {
        let id = self.id;
        let succ_count = [&self.next, &self.gt, &self.eq, &self.lt]
            .iter()
            .filter(|s| s.is_some())
            .count();
        let mut diags = Vec::new();
        let mut outdegree = |expected: usize, what: &str| {
            diags.push(Diagnostic::new(
                DiagnosticKind::OutDegree,
                Some(&id),
                format!("{what} vertex {id} has {succ_count} successors, expected {expected}"),
            ))
        };
        let kind = match self.kind.as_str() {
            "computation" => {
                if succ_count != 1 || self.next.is_none() {
                    outdegree(1, "computation");
                }
                match (self.op, self.left, self.right, self.next) {
                    (Some(op), Some(left), Some(right), Some(next))
                        if self.test.is_none() && self.accept.is_none() && succ_count == 1 =>
                    {
                        Some(VertexKind::Computation { op, left, right, next })
                    }
                    _ => None,
                }
            }
            "branch" => {
                if succ_count != 3 || self.next.is_some() {
                    outdegree(3, "branch");
                }
                match (self.test, self.gt, self.eq, self.lt) {
                    (Some(test), Some(gt), Some(eq), Some(lt))
                        if self.op.is_none() && self.accept.is_none() && self.next.is_none() =>
                    {
                        Some(VertexKind::Branch { test, gt, eq, lt })
                    }
                    _ => None,
                }
            }
            "leaf" => {
                if succ_count != 0 {
                    outdegree(0, "leaf");
                }
                match self.accept {
                    Some(accept) if succ_count == 0 && self.op.is_none() && self.test.is_none() => {
                        Some(VertexKind::Leaf { accept })
                    }
                    _ => None,
                }
            }
            _ => None,
        };
        match kind {
            Some(k) => Ok((id, k)),
            None => {
                if diags.is_empty() {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::Malformed,
                        Some(&id),
                        format!("vertex {id}: fields do not match kind {:?}", self.kind),
                    ));
                }
                Err(diags)
            }
        }
    }
}

/// Index-based view of a tree whose references all resolve.
struct IndexGraph {
    root: usize,
    children: Vec<Vec<usize>>,
}

impl IndexGraph {
    fn new(t: &Tree) -> IndexGraph {
        let children = t
            .vertices
            .values()
            .map(|k| {
                k.successors()
                    .into_iter()
                    .map(|s| t.vertices.get_index_of(s).expect("resolved successor"))
                    .collect()
            })
            .collect();
        IndexGraph {
            root: t.vertices.get_index_of(&t.root).expect("resolved root"),
            children,
        }
    }

    fn find_cycle(&self) -> Option<usize> {
        // 0 = unseen, 1 = on stack, 2 = done
        let mut color = vec![0u8; self.children.len()];
        let mut stack = vec![(self.root, 0usize)];
        color[self.root] = 1;
        while let Some((v, i)) = stack.pop() {
            if i < self.children[v].len() {
                stack.push((v, i + 1));
                let c = self.children[v][i];
                match color[c] {
                    0 => {
                        color[c] = 1;
                        stack.push((c, 0));
                    }
                    1 => return Some(c),
                    _ => {}
                }
            } else {
                color[v] = 2;
            }
        }
        None
    }

    /// Reachable vertices, children before parents. Requires acyclicity.
    fn post_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.children.len()];
        let mut out = Vec::new();
        let mut stack = vec![(self.root, 0usize)];
        seen[self.root] = true;
        while let Some((v, i)) = stack.pop() {
            if i < self.children[v].len() {
                stack.push((v, i + 1));
                let c = self.children[v][i];
                if !seen[c] {
                    seen[c] = true;
                    stack.push((c, 0));
                }
            } else {
                out.push(v);
            }
        }
        out
    }

    /// For each reachable vertex, the sorted indices of computation vertices
    /// lying on every root path to it (excluding itself).
    fn must_ancestors(&self, t: &Tree) -> Vec<Option<Vec<usize>>> {
        let n = self.children.len();
        let mut order = self.post_order();
        order.reverse();
        let mut must: Vec<Option<Vec<usize>>> = vec![None; n];
        must[self.root] = Some(Vec::new());
        for v in order {
            let Some(anc) = must[v].clone() else { continue };
            let mut cand = anc;
            if matches!(t.vertices[v], VertexKind::Computation { .. }) {
                let pos = cand.binary_search(&v).unwrap_or_else(|p| p);
                cand.insert(pos, v);
            }
            for &c in &self.children[v] {
                must[c] = Some(match must[c].take() {
                    None => cand.clone(),
                    Some(prev) => intersect_sorted(&prev, &cand),
                });
            }
        }
        must
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvalOutcome {
    pub accepted: bool,
    pub leaf: VertexId,
    pub path_length: usize,
}

#[derive(Clone, Debug)]
enum Slot {
    Const(Rational),
    Input(usize),
    Var(usize),
}

#[derive(Clone, Debug)]
enum Node {
    Comp { op: Op, left: Slot, right: Slot, next: usize },
    Branch { test: Slot, gt: usize, eq: usize, lt: usize },
    Leaf { accept: bool },
}

/// A validated tree compiled to index form for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator<'t> {
    tree: &'t Tree,
    nodes: Vec<Node>,
    root: usize,
}

impl<'t> Evaluator<'t> {
    pub fn new(tree: &'t Tree) -> Result<Evaluator<'t>> {
        tree.ensure_valid()?;
        let idx = |id: &VertexId| tree.vertices.get_index_of(id).expect("validated");
        let slot = |o: &Operand| match o {
            Operand::Const(c) => Slot::Const(c.clone()),
            Operand::Input(i) => Slot::Input(i - 1),
            Operand::Var(v) => Slot::Var(idx(v)),
        };
        let nodes = tree
            .vertices
            .values()
            .map(|k| match k {
                VertexKind::Computation { op, left, right, next } => Node::Comp {
                    op: *op,
                    left: slot(left),
                    right: slot(right),
                    next: idx(next),
                },
                VertexKind::Branch { test, gt, eq, lt } => Node::Branch {
                    test: slot(test),
                    gt: idx(gt),
                    eq: idx(eq),
                    lt: idx(lt),
                },
                VertexKind::Leaf { accept } => Node::Leaf { accept: *accept },
            })
            .collect();
        Ok(Evaluator {
            tree,
            nodes,
            root: idx(&tree.root),
        })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<EvalOutcome> {
        check_arity(self.tree.arity, x.len())?;
        let mut values: HashMap<usize, Rational> = HashMap::new();
        let read = |s: &Slot, values: &HashMap<usize, Rational>| -> Rational {
            match s {
                Slot::Const(c) => c.clone(),
                Slot::Input(i) => x[*i].clone(),
                Slot::Var(v) => values[v].clone(),
            }
        };
        let mut v = self.root;
        let mut path_length = 1;
        loop {
            match &self.nodes[v] {
                Node::Comp { op, left, right, next } => {
                    let (a, b) = (read(left, &values), read(right, &values));
                    let y = match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => unreachable!("validated trees are division-free"),
                    };
                    values.insert(v, y);
                    v = *next;
                }
                Node::Branch { test, gt, eq, lt } => {
                    let y = read(test, &values);
                    v = match y.cmp(&Rational::zero()) {
                        std::cmp::Ordering::Greater => *gt,
                        std::cmp::Ordering::Equal => *eq,
                        std::cmp::Ordering::Less => *lt,
                    };
                }
                Node::Leaf { accept } => {
                    return Ok(EvalOutcome {
                        accepted: *accept,
                        leaf: self.tree.vertices.get_index(v).unwrap().0.clone(),
                        path_length,
                    })
                }
            }
            path_length += 1;
        }
    }
}

pub fn evaluate(t: &Tree, x: &[Rational]) -> Result<EvalOutcome> {
    Evaluator::new(t)?.evaluate(x)
}

/// Incremental construction with fresh ids. Ids are reserved top-down so the
/// emitted file lists parents before children.
#[derive(Debug)]
pub struct TreeBuilder {
    arity: usize,
    prefix: String,
    counter: usize,
    vertices: IndexMap<VertexId, Option<VertexKind>>,
}

impl TreeBuilder {
    pub fn new(arity: usize) -> Self {
        Self::with_prefix(arity, "v")
    }

    pub fn with_prefix(arity: usize, prefix: &str) -> Self {
        Self {
            arity,
            prefix: prefix.to_string(),
            counter: 0,
            vertices: IndexMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn reserve(&mut self) -> VertexId {
        let id = VertexId(format!("{}{}", self.prefix, self.counter));
        self.counter += 1;
        self.vertices.insert(id.clone(), None);
        id
    }

    pub fn define(&mut self, id: &VertexId, kind: VertexKind) {
        let slot = self.vertices.get_mut(id).expect("id was reserved by this builder");
        assert!(slot.is_none(), "vertex {id} defined twice");
        *slot = Some(kind);
    }

    pub fn add(&mut self, kind: VertexKind) -> VertexId {
        let id = self.reserve();
        self.define(&id, kind);
        id
    }

    pub fn leaf(&mut self, accept: bool) -> VertexId {
        self.add(VertexKind::Leaf { accept })
    }

    pub fn finish(self, root: VertexId) -> Result<Tree> {
        let mut out = Vec::with_capacity(self.vertices.len());
        for (id, kind) in self.vertices {
            match kind {
                Some(k) => out.push((id, k)),
                None => return Err(Error::Domain(format!("vertex {id} reserved but never defined"))),
            }
        }
        Tree::new(self.arity, root, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn id(s: &str) -> VertexId {
        VertexId::from(s)
    }

    /// `{x1 != x2}`: one subtraction and one branch.
    pub(crate) fn not_equal_tree() -> Tree {
        Tree::new(
            2,
            id("d"),
            vec![
                (
                    id("d"),
                    VertexKind::Computation {
                        op: Op::Sub,
                        left: Operand::Input(1),
                        right: Operand::Input(2),
                        next: id("b"),
                    },
                ),
                (
                    id("b"),
                    VertexKind::Branch {
                        test: Operand::Var(id("d")),
                        gt: id("yes"),
                        eq: id("no"),
                        lt: id("yes"),
                    },
                ),
                (id("yes"), VertexKind::Leaf { accept: true }),
                (id("no"), VertexKind::Leaf { accept: false }),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_leaf_is_valid() {
        let t = Tree::new(1, id("l"), vec![(id("l"), VertexKind::Leaf { accept: false })]).unwrap();
        assert!(t.validate().is_empty());
        let m = t.metrics().unwrap();
        assert_eq!((m.height, m.leaf_count.clone()), (1, BigUint::one()));
    }

    #[test]
    fn branch_on_non_predecessor_is_reported_once() {
        // b tests c, but c sits below b on the gt edge
        let t = Tree::new(
            1,
            id("b"),
            vec![
                (
                    id("b"),
                    VertexKind::Branch {
                        test: Operand::Var(id("c")),
                        gt: id("c"),
                        eq: id("n"),
                        lt: id("n"),
                    },
                ),
                (
                    id("c"),
                    VertexKind::Computation {
                        op: Op::Add,
                        left: Operand::Input(1),
                        right: Operand::Const(int(1)),
                        next: id("n"),
                    },
                ),
                (id("n"), VertexKind::Leaf { accept: false }),
            ],
        )
        .unwrap();
        let diags = t.validate();
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].kind, DiagnosticKind::PredecessorRule);
    }

    #[test]
    fn var_must_precede_on_every_path() {
        // c is an ancestor of the shared leaf-parent only along one path
        let t = Tree::new(
            1,
            id("b"),
            vec![
                (
                    id("b"),
                    VertexKind::Branch {
                        test: Operand::Input(1),
                        gt: id("c"),
                        eq: id("u"),
                        lt: id("u"),
                    },
                ),
                (
                    id("c"),
                    VertexKind::Computation {
                        op: Op::Mul,
                        left: Operand::Input(1),
                        right: Operand::Input(1),
                        next: id("u"),
                    },
                ),
                (
                    id("u"),
                    VertexKind::Branch {
                        test: Operand::Var(id("c")),
                        gt: id("n"),
                        eq: id("n"),
                        lt: id("n"),
                    },
                ),
                (id("n"), VertexKind::Leaf { accept: true }),
            ],
        )
        .unwrap();
        let diags = t.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::PredecessorRule);
    }

    #[test]
    fn structural_violations_are_all_reported() {
        let t = Tree::new(
            1,
            id("a"),
            vec![
                (
                    id("a"),
                    VertexKind::Computation {
                        op: Op::Div,
                        left: Operand::Input(2),
                        right: Operand::Var(id("ghost")),
                        next: id("missing"),
                    },
                ),
            ],
        )
        .unwrap();
        let kinds: Vec<_> = t.validate().into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::Division));
        assert!(kinds.contains(&DiagnosticKind::InputOutOfRange));
        assert_eq!(kinds.iter().filter(|k| **k == DiagnosticKind::DanglingId).count(), 2);
    }

    #[test]
    fn cycles_are_detected() {
        let t = Tree::new(
            1,
            id("a"),
            vec![(
                id("a"),
                VertexKind::Computation {
                    op: Op::Add,
                    left: Operand::Input(1),
                    right: Operand::Input(1),
                    next: id("a"),
                },
            )],
        )
        .unwrap();
        assert_eq!(t.validate()[0].kind, DiagnosticKind::Cycle);
        assert!(evaluate(&t, &[int(0)]).is_err());
    }

    #[test]
    fn not_equal_tree_evaluation() {
        let t = not_equal_tree();
        let out = evaluate(&t, &[int(1), int(1)]).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.path_length, 3);
        assert!(evaluate(&t, &[int(1), int(2)]).unwrap().accepted);
        assert!(evaluate(&t, &[rat(5, 2), rat(3, 2)]).unwrap().accepted);
        assert!(evaluate(&t, &[int(1)]).is_err());
    }

    #[test]
    fn metrics_of_a_path_then_branch() {
        let mut b = TreeBuilder::new(1);
        let c1 = b.reserve();
        let c2 = b.reserve();
        let c3 = b.reserve();
        let br = b.reserve();
        let (y, n1, n2) = (b.leaf(true), b.leaf(false), b.leaf(false));
        b.define(&c1, VertexKind::Computation { op: Op::Mul, left: Operand::Input(1), right: Operand::Input(1), next: c2.clone() });
        b.define(&c2, VertexKind::Computation { op: Op::Mul, left: Operand::Var(c1.clone()), right: Operand::Var(c1.clone()), next: c3.clone() });
        b.define(&c3, VertexKind::Computation { op: Op::Sub, left: Operand::Var(c2.clone()), right: Operand::Const(int(2)), next: br.clone() });
        b.define(&br, VertexKind::Branch { test: Operand::Var(c3.clone()), gt: y, eq: n1, lt: n2 });
        let t = b.finish(c1).unwrap();
        let m = t.metrics().unwrap();
        assert_eq!(m.height, 5);
        assert_eq!(m.leaf_count, BigUint::from(3u32));
        assert_eq!(m.yes_leaf_count, BigUint::one());
        assert_eq!(m.mult_count_max, 2);
    }

    #[test]
    fn shared_children_count_as_separate_logical_leaves() {
        let t = not_equal_tree();
        let m = t.metrics().unwrap();
        assert_eq!(m.leaf_count, BigUint::from(3u32));
        assert_eq!(m.yes_leaf_count, BigUint::from(2u32));
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let t = not_equal_tree();
        let text = t.to_json();
        let back = Tree::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"var\": \"d\""));
    }

    #[test]
    fn malformed_records_yield_outdegree_diagnostics() {
        let text = r#"{"inputs": 1, "root": "a", "vertices": [
            {"id": "a", "kind": "leaf", "accept": true, "next": "b"},
            {"id": "b", "kind": "branch", "test": {"input": 1}, "gt": "a", "eq": "a"}
        ]}"#;
        let Err(Error::InvalidTree(diags)) = Tree::from_json(text) else {
            panic!("expected diagnostics")
        };
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.kind == DiagnosticKind::OutDegree));
    }
}
