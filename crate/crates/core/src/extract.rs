//! Leaf sets of a computation tree as a disjunction of sign conditions, plus
//! the counting statistics (distinct polynomials, degrees) of such a formula.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};
use crate::poly::{Polynomial, TermRecord};
use crate::tree::{Op, Operand, Tree, VertexId, VertexKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Lt,
    Eq,
    Gt,
    Le,
    Ge,
}

impl Sign {
    /// Whether a value whose comparison with zero is `ord` satisfies the sign.
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Sign::Lt => ord == Ordering::Less,
            Sign::Eq => ord == Ordering::Equal,
            Sign::Gt => ord == Ordering::Greater,
            Sign::Le => ord != Ordering::Greater,
            Sign::Ge => ord != Ordering::Less,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Sign::Lt | Sign::Gt)
    }

    fn of_ordering(ord: Ordering) -> Sign {
        match ord {
            Ordering::Less => Sign::Lt,
            Ordering::Equal => Sign::Eq,
            Ordering::Greater => Sign::Gt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignCondition {
    pub poly: Polynomial,
    pub sign: Sign,
}

impl SignCondition {
    pub fn new(poly: Polynomial, sign: Sign) -> Self {
        Self { poly, sign }
    }
}

/// A conjunction of sign conditions; the empty conjunction is all of R^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicSet {
    pub arity: usize,
    pub conds: Vec<SignCondition>,
}

impl BasicSet {
    pub fn new(arity: usize, conds: Vec<SignCondition>) -> Result<Self> {
        for c in &conds {
            check_arity(arity, c.poly.arity())?;
        }
        Ok(Self { arity, conds })
    }

    pub fn everything(arity: usize) -> Self {
        Self { arity, conds: Vec::new() }
    }
}

/// A finite union of basic sets; the empty union is the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dnf {
    pub arity: usize,
    pub disjuncts: Vec<BasicSet>,
}

impl Dnf {
    pub fn new(arity: usize, disjuncts: Vec<BasicSet>) -> Result<Self> {
        for d in &disjuncts {
            check_arity(arity, d.arity)?;
        }
        Ok(Self { arity, disjuncts })
    }

    pub fn empty(arity: usize) -> Self {
        Self { arity, disjuncts: Vec::new() }
    }

    pub fn conditions(&self) -> impl Iterator<Item = &SignCondition> {
        self.disjuncts.iter().flat_map(|d| d.conds.iter())
    }

    pub fn has_strict_signs(&self) -> bool {
        self.conditions().any(|c| c.sign.is_strict())
    }

    pub fn to_json(&self) -> String {
        let file = DnfFile {
            inputs: self.arity,
            union: self
                .disjuncts
                .iter()
                .map(|d| ConjRecord {
                    conds: d
                        .conds
                        .iter()
                        .map(|c| CondRecord {
                            poly: c.poly.to_records(),
                            sign: c.sign,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("dnf serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Dnf> {
        let file: DnfFile = serde_json::from_str(text)?;
        let n = file.inputs;
        let disjuncts = file
            .union
            .iter()
            .map(|conj| {
                let conds = conj
                    .conds
                    .iter()
                    .map(|c| Ok(SignCondition::new(Polynomial::from_records(n, &c.poly)?, c.sign)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BasicSet { arity: n, conds })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dnf { arity: n, disjuncts })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DnfFile {
    inputs: usize,
    union: Vec<ConjRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConjRecord {
    conds: Vec<CondRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CondRecord {
    poly: Vec<TermRecord>,
    sign: Sign,
}

/// Guards against the exponential worst case of expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractLimits {
    pub max_terms: usize,
    pub max_disjuncts: usize,
}

impl Default for ExtractLimits {
    fn default() -> Self {
        Self {
            max_terms: 1_000_000,
            max_disjuncts: 1_000_000,
        }
    }
}

/// Expanded polynomials of computation vertices, memoized per tree.
struct Expander<'t> {
    tree: &'t Tree,
    cache: HashMap<VertexId, Arc<Polynomial>>,
    limits: ExtractLimits,
    terms: usize,
}

impl<'t> Expander<'t> {
    fn new(tree: &'t Tree, limits: ExtractLimits) -> Self {
        Self {
            tree,
            cache: HashMap::new(),
            limits,
            terms: 0,
        }
    }

    fn operand(&mut self, o: &Operand) -> Result<Arc<Polynomial>> {
        let n = self.tree.arity();
        Ok(match o {
            Operand::Const(c) => Arc::new(Polynomial::constant(n, c.clone())),
            Operand::Input(i) => Arc::new(Polynomial::var(n, i - 1)),
            Operand::Var(v) => self.computation(v)?,
        })
    }

    fn computation(&mut self, v: &VertexId) -> Result<Arc<Polynomial>> {
        if let Some(p) = self.cache.get(v) {
            return Ok(p.clone());
        }
        let Some(VertexKind::Computation { op, left, right, .. }) = self.tree.vertex(v) else {
            return Err(Error::Domain(format!("{v} is not a computation vertex")));
        };
        let (a, b) = (self.operand(left)?, self.operand(right)?);
        let p = match op {
            Op::Add => &*a + &*b,
            Op::Sub => &*a - &*b,
            Op::Mul => &*a * &*b,
            Op::Div => return Err(Error::Division(v.to_string())),
        };
        self.terms += p.term_count();
        if self.terms > self.limits.max_terms {
            return Err(Error::Limit {
                what: "term count",
                limit: self.limits.max_terms,
            });
        }
        let p = Arc::new(p);
        self.cache.insert(v.clone(), p.clone());
        Ok(p)
    }
}

/// The expansion of `Y_v` (computation vertex) or of the tested value (branch
/// vertex) as a polynomial in the inputs.
pub fn vertex_polynomial(t: &Tree, v: &VertexId) -> Result<Polynomial> {
    t.ensure_valid()?;
    if !reachable(t, v) {
        return Err(Error::Domain(format!("vertex {v} is not reachable from the root")));
    }
    let mut ex = Expander::new(t, ExtractLimits::default());
    let p = match t.vertex(v) {
        Some(VertexKind::Computation { .. }) => ex.computation(v)?,
        Some(VertexKind::Branch { test, .. }) => ex.operand(test)?,
        _ => return Err(Error::Domain(format!("vertex {v} is a leaf"))),
    };
    Ok((*p).clone())
}

fn reachable(t: &Tree, target: &VertexId) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![t.root()];
    while let Some(v) = stack.pop() {
        if v == target {
            return true;
        }
        if seen.insert(v) {
            if let Some(k) = t.vertex(v) {
                stack.extend(k.successors());
            }
        }
    }
    false
}

/// Yes-leaf sets of a tree, one disjunct per logical Yes leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafDnf {
    pub dnf: Dnf,
    /// Leaf id reached by each disjunct, index-aligned with `dnf.disjuncts`.
    pub leaves: Vec<VertexId>,
}

pub fn leaf_dnf(t: &Tree) -> Result<LeafDnf> {
    leaf_dnf_with(t, ExtractLimits::default())
}

pub fn leaf_dnf_with(t: &Tree, limits: ExtractLimits) -> Result<LeafDnf> {
    t.ensure_valid()?;
    t.ensure_division_free()?;
    let mut ex = Expander::new(t, limits);
    let mut out = LeafDnf {
        dnf: Dnf::empty(t.arity()),
        leaves: Vec::new(),
    };
    let mut path = Vec::new();
    walk(t, t.root(), &mut ex, &mut path, &mut out)?;
    Ok(out)
}

fn walk(
    t: &Tree,
    v: &VertexId,
    ex: &mut Expander<'_>,
    path: &mut Vec<SignCondition>,
    out: &mut LeafDnf,
) -> Result<()> {
    match t.vertex(v).expect("validated") {
        VertexKind::Leaf { accept } => {
            if *accept {
                if out.leaves.len() >= ex.limits.max_disjuncts {
                    return Err(Error::Limit {
                        what: "disjunct count",
                        limit: ex.limits.max_disjuncts,
                    });
                }
                out.dnf.disjuncts.push(BasicSet {
                    arity: t.arity(),
                    conds: path.clone(),
                });
                out.leaves.push(v.clone());
            }
            Ok(())
        }
        VertexKind::Computation { next, .. } => walk(t, next, ex, path, out),
        VertexKind::Branch { test, gt, eq, lt } => {
            let f = ex.operand(test)?;
            for (child, ord) in [(gt, Ordering::Greater), (eq, Ordering::Equal), (lt, Ordering::Less)] {
                path.push(SignCondition::new((*f).clone(), Sign::of_ordering(ord)));
                walk(t, child, ex, path, out)?;
                path.pop();
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DnfStats {
    /// Distinct polynomials, up to canonical-form equality.
    pub s: usize,
    /// Maximal total degree.
    pub d: u32,
    pub disjunct_count: usize,
    pub max_conds_per_disjunct: usize,
}

pub fn dnf_stats(f: &Dnf) -> DnfStats {
    let distinct: HashSet<&Polynomial> = f.conditions().map(|c| &c.poly).collect();
    DnfStats {
        s: distinct.len(),
        d: distinct.iter().map(|p| p.total_degree()).max().unwrap_or(0),
        disjunct_count: f.disjuncts.len(),
        max_conds_per_disjunct: f.disjuncts.iter().map(|d| d.conds.len()).max().unwrap_or(0),
    }
}
