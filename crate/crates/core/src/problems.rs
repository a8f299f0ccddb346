//! Worked instances: matched trees, formulas, schedules and boxes for the
//! parity and distinctness problems, the annulus, the circle projection and
//! the crossing-number curves, plus the random-tree corpus.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::{BasicSet, Dnf, Sign, SignCondition};
use crate::families::{fiber_product_formula, t_m_formula, AmbientMode, FiberSpec, Schedule};
use crate::poly::{int, rat, Polynomial, Rational};
use crate::topology::{
    betti_numbers, build_complex, complement_component_count, BettiVector, GridBox, OccupancyGrid,
};
use crate::tree::{Op, Operand, Tree, TreeBuilder, VertexId, VertexKind};

/// A tree together with the strict formula it decides and the sampling
/// parameters that resolve its topology.
#[derive(Clone, Debug)]
pub struct ProblemBundle {
    pub name: String,
    pub tree: Tree,
    pub strict_dnf: Dnf,
    pub suggested_schedule: Schedule,
    pub suggested_box: GridBox,
    pub mode: AmbientMode,
    /// Height bound the generator commits to.
    pub declared_height: usize,
    pub notes: String,
}

impl ProblemBundle {
    /// `T_ℓ` of the strict formula over the suggested schedule.
    pub fn closure(&self) -> Result<Dnf> {
        t_m_formula(&self.strict_dnf, &self.suggested_schedule, &self.mode)
    }
}

fn cond(poly: Polynomial, sign: Sign) -> SignCondition {
    SignCondition::new(poly, sign)
}

fn shifted_var(n: usize, i: usize, c: i64) -> Polynomial {
    Polynomial::var(n, i).add_constant(&int(-c))
}

fn comp(op: Op, left: Operand, right: Operand, next: &VertexId) -> VertexKind {
    VertexKind::Computation { op, left, right, next: next.clone() }
}

/// Points of `{1..m}^n` whose coordinates are all integers, or whose
/// coordinates are integers except for exactly two lying strictly inside
/// `(1, m)`: the open 2-faces and the vertices of the lattice cube complex.
pub fn parity_problem(n: usize, m: usize) -> Result<ProblemBundle> {
    if n < 2 || m < 3 {
        return Err(Error::Domain(format!("parity needs n ≥ 2 and m ≥ 3 (got n={n}, m={m})")));
    }
    let mut gen = ParityGen {
        b: TreeBuilder::new(n),
        n,
        m: m as i64,
        memo: HashMap::new(),
        yes: VertexId(String::new()),
        no: VertexId(String::new()),
    };
    gen.yes = gen.b.leaf(true);
    gen.no = gen.b.leaf(false);
    let root = gen.node(0, 0);
    let tree = gen.b.finish(root)?;
    let mut disjuncts = Vec::new();
    let lattice = |k: usize| -> Vec<Vec<i64>> {
        (0..m.pow(k as u32))
            .map(|mut l| {
                (0..k)
                    .map(|_| {
                        let v = (l % m) as i64 + 1;
                        l /= m;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    for i in 0..n {
        for j in i + 1..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            for a in 1..m as i64 {
                for c in 1..m as i64 {
                    for pins in lattice(others.len()) {
                        let mut conds = vec![
                            cond(shifted_var(n, i, a), Sign::Gt),
                            cond(shifted_var(n, i, a + 1), Sign::Lt),
                            cond(shifted_var(n, j, c), Sign::Gt),
                            cond(shifted_var(n, j, c + 1), Sign::Lt),
                        ];
                        for (&k, &v) in others.iter().zip(&pins) {
                            conds.push(cond(shifted_var(n, k, v), Sign::Eq));
                        }
                        disjuncts.push(BasicSet::new(n, conds)?);
                    }
                }
            }
        }
    }
    for pins in lattice(n) {
        let conds = pins.iter().enumerate().map(|(k, &v)| cond(shifted_var(n, k, v), Sign::Eq)).collect();
        disjuncts.push(BasicSet::new(n, conds)?);
    }
    let comparisons = (usize::BITS - m.leading_zeros()) as usize;
    let half = rat(1, 2);
    Ok(ProblemBundle {
        name: format!("parity(n={n}, m={m})"),
        tree,
        strict_dnf: Dnf::new(n, disjuncts)?,
        suggested_schedule: Schedule::parse("1/10000,1/100,1/25,1/5")?,
        suggested_box: GridBox::cube(n, half.clone(), int(m as i64) + half, 200 * m)?,
        mode: AmbientMode::bounded(int((n * (m + 1) * (m + 1)) as i64))?,
        declared_height: 2 * n * comparisons + 1,
        notes: "per-coordinate ternary search locating x_i among 1..m, then a count of non-integer coordinates".into(),
    })
}

struct ParityGen {
    b: TreeBuilder,
    n: usize,
    m: i64,
    memo: HashMap<(usize, usize), VertexId>,
    yes: VertexId,
    no: VertexId,
}

impl ParityGen {
    /// Decides coordinates `i..n` given `fracs` non-integer coordinates so far.
    fn node(&mut self, i: usize, fracs: usize) -> VertexId {
        if fracs > 2 {
            return self.no.clone();
        }
        if i == self.n {
            return if fracs == 1 { self.no.clone() } else { self.yes.clone() };
        }
        if let Some(v) = self.memo.get(&(i, fracs)) {
            return v.clone();
        }
        let v = self.search(i, fracs, None, None);
        self.memo.insert((i, fracs), v.clone());
        v
    }

    /// `x_i` is known to lie in the open interval `(a, b)` and to differ from
    /// every integer tested so far.
    fn search(&mut self, i: usize, fracs: usize, a: Option<i64>, b: Option<i64>) -> VertexId {
        let first = a.map_or(1, |a| (a + 1).max(1));
        let last = b.map_or(self.m, |b| (b - 1).min(self.m));
        if first > last {
            let inside = matches!((a, b), (Some(a), Some(b)) if a >= 1 && b <= self.m);
            return if inside { self.node(i + 1, fracs + 1) } else { self.no.clone() };
        }
        let c = (first + last) / 2;
        let d = self.b.reserve();
        let br = self.b.reserve();
        let gt = self.search(i, fracs, Some(c), b);
        let eq = self.node(i + 1, fracs);
        let lt = self.search(i, fracs, a, Some(c));
        self.b.define(&d, comp(Op::Sub, Operand::Input(i + 1), Operand::Const(int(c)), &br));
        self.b.define(&br, VertexKind::Branch { test: Operand::Var(d.clone()), gt, eq, lt });
        d
    }
}

/// `∏_{i<j} (x_i − x_j) ≠ 0`: the differences, their running product, one branch.
pub fn distinctness_tree(n: usize) -> Result<ProblemBundle> {
    if n < 2 {
        return Err(Error::Domain("distinctness needs n ≥ 2".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut b = TreeBuilder::new(n);
    let diffs: Vec<VertexId> = pairs.iter().map(|_| b.reserve()).collect();
    let prods: Vec<VertexId> = (1..pairs.len()).map(|_| b.reserve()).collect();
    let br = b.reserve();
    let yes = b.leaf(true);
    let no = b.leaf(false);
    let chain: Vec<VertexId> = diffs.iter().chain(&prods).cloned().chain(std::iter::once(br.clone())).collect();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        b.define(&diffs[k], comp(Op::Sub, Operand::Input(i + 1), Operand::Input(j + 1), &chain[k + 1]));
    }
    let mut acc = Operand::Var(diffs[0].clone());
    for (k, p) in prods.iter().enumerate() {
        let next = &chain[diffs.len() + k + 1];
        b.define(p, comp(Op::Mul, acc, Operand::Var(diffs[k + 1].clone()), next));
        acc = Operand::Var(p.clone());
    }
    b.define(&br, VertexKind::Branch { test: acc, gt: yes.clone(), eq: no, lt: yes });
    let tree = b.finish(diffs[0].clone())?;

    let product = pairs.iter().fold(Polynomial::constant(n, Rational::one()), |acc, &(i, j)| {
        &acc * &(&Polynomial::var(n, i) - &Polynomial::var(n, j))
    });
    let strict_dnf = Dnf::new(
        n,
        vec![
            BasicSet::new(n, vec![cond(product.clone(), Sign::Gt)])?,
            BasicSet::new(n, vec![cond(product, Sign::Lt)])?,
        ],
    )?;
    Ok(ProblemBundle {
        name: format!("distinctness(n={n})"),
        tree,
        strict_dnf,
        suggested_schedule: Schedule::parse("1/100,1/5,1/4,1/2")?,
        suggested_box: GridBox::cube(n, int(-1), int(1), 50)?,
        mode: AmbientMode::Unbounded,
        declared_height: 2 * pairs.len() + 1,
        notes: "one chamber per ordering of the coordinates".into(),
    })
}

/// `{1 < x² + y² < 4}`.
pub fn annulus_example() -> ProblemBundle {
    let mut b = TreeBuilder::new(2);
    let ids: Vec<VertexId> = (0..6).map(|_| b.reserve()).collect();
    let inner = b.reserve();
    let yes = b.leaf(true);
    let no = b.leaf(false);
    let [sx, sy, h, lo, lo_br, hi] = [0, 1, 2, 3, 4, 5].map(|k| ids[k].clone());
    b.define(&sx, comp(Op::Mul, Operand::Input(1), Operand::Input(1), &sy));
    b.define(&sy, comp(Op::Mul, Operand::Input(2), Operand::Input(2), &h));
    b.define(&h, comp(Op::Add, Operand::Var(sx.clone()), Operand::Var(sy.clone()), &lo));
    b.define(&lo, comp(Op::Sub, Operand::Var(h.clone()), Operand::Const(int(1)), &lo_br));
    b.define(&lo_br, VertexKind::Branch { test: Operand::Var(lo.clone()), gt: hi.clone(), eq: no.clone(), lt: no.clone() });
    b.define(&hi, comp(Op::Sub, Operand::Var(h.clone()), Operand::Const(int(4)), &inner));
    b.define(&inner, VertexKind::Branch { test: Operand::Var(hi.clone()), gt: no.clone(), eq: no, lt: yes });
    let tree = b.finish(sx).expect("static tree");
    let r2 = Polynomial::norm_squared(2);
    let strict_dnf = Dnf::new(
        2,
        vec![BasicSet::new(2, vec![cond(r2.add_constant(&int(-1)), Sign::Gt), cond(r2.add_constant(&int(-4)), Sign::Lt)])
            .expect("arity")],
    )
    .expect("arity");
    ProblemBundle {
        name: "annulus".into(),
        tree,
        strict_dnf,
        suggested_schedule: Schedule::parse("1/10000,1/100,1/25,1/5").expect("static"),
        suggested_box: GridBox::cube(2, int(-3), int(3), 64).expect("static"),
        mode: AmbientMode::bounded(int(9)).expect("static"),
        declared_height: 8,
        notes: "open annulus between radii 1 and 2".into(),
    }
}

/// The unit circle over its projection to the first axis, with the fibered
/// products that bound the image's Betti numbers.
#[derive(Clone, Debug)]
pub struct CircleFiber {
    pub sigma_tree: Tree,
    /// `{x² + y² − 1 = 0}`.
    pub sigma_dnf: Dnf,
    /// `ρ(Σ) = {x² − 1 ≤ 0}`.
    pub image_dnf: Dnf,
    pub schedule: Schedule,
    pub mode: AmbientMode,
    /// Half-width of the sampling cube for every `W_p`.
    pub radius: Rational,
    pub resolution: usize,
}

pub fn circle_fiber_example() -> CircleFiber {
    let mut b = TreeBuilder::new(2);
    let [sx, sy, h, g, br] = [(); 5].map(|_| b.reserve());
    let yes = b.leaf(true);
    let no = b.leaf(false);
    b.define(&sx, comp(Op::Mul, Operand::Input(1), Operand::Input(1), &sy));
    b.define(&sy, comp(Op::Mul, Operand::Input(2), Operand::Input(2), &h));
    b.define(&h, comp(Op::Add, Operand::Var(sx.clone()), Operand::Var(sy.clone()), &g));
    b.define(&g, comp(Op::Sub, Operand::Var(h.clone()), Operand::Const(int(1)), &br));
    b.define(&br, VertexKind::Branch { test: Operand::Var(g.clone()), gt: no.clone(), eq: yes, lt: no });
    let sigma_tree = b.finish(sx).expect("static tree");
    let circle = Polynomial::norm_squared(2).add_constant(&int(-1));
    let sigma_dnf = Dnf::new(2, vec![BasicSet::new(2, vec![cond(circle, Sign::Eq)]).expect("arity")]).expect("arity");
    let interval = Polynomial::norm_squared(1).add_constant(&int(-1));
    let image_dnf = Dnf::new(1, vec![BasicSet::new(1, vec![cond(interval, Sign::Le)]).expect("arity")]).expect("arity");
    CircleFiber {
        sigma_tree,
        sigma_dnf,
        image_dnf,
        schedule: Schedule::parse("1/10000,1/100,1/25,1/2").expect("static"),
        mode: AmbientMode::bounded(int(4)).expect("static"),
        radius: rat(3, 2),
        resolution: 120,
    }
}

impl CircleFiber {
    pub fn spec(&self, p: usize) -> FiberSpec {
        FiberSpec::new(2, 1, p).expect("static spec")
    }

    /// `T_ℓ(Σ)` over the example's schedule.
    pub fn closure(&self) -> Result<Dnf> {
        t_m_formula(&self.sigma_dnf, &self.schedule, &self.mode)
    }

    /// `W_p` of the compactified circle.
    pub fn w_formula(&self, p: usize) -> Result<Dnf> {
        fiber_product_formula(&self.closure()?, &self.spec(p))
    }

    pub fn w_box(&self, p: usize) -> Result<GridBox> {
        let dim = self.spec(p).product_arity();
        GridBox::cube(dim, -self.radius.clone(), self.radius.clone(), self.resolution)
    }

    /// The compactification of the image written by hand: the squared
    /// thickening `|x² + y² − 1| ≤ √ε` projects onto `x² ≤ 1 + √ε`.
    pub fn image_closure_by_hand(&self) -> Result<Dnf> {
        let disjuncts = self
            .schedule
            .levels
            .iter()
            .map(|l| {
                let root = rational_sqrt(&l.eps)
                    .ok_or_else(|| Error::Domain("schedule eps must be a perfect square".into()))?;
                let p = Polynomial::norm_squared(1).add_constant(&-(Rational::one() + root));
                BasicSet::new(1, vec![cond(p, Sign::Le)])
            })
            .collect::<Result<Vec<_>>>()?;
        Dnf::new(1, disjuncts)
    }
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer().sqrt(), x.denom().sqrt());
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Rational::new(n, d))
}

/// A polynomial curve `t ↦ (x(t), y(t), z(t))` on `[t0, t1]` and the box in
/// which its planar shadow `(x, y)` is rasterized.
#[derive(Clone, Debug)]
pub struct CrossingInstance {
    pub name: String,
    /// Coordinate polynomials in the single variable `t`.
    pub curve: [Polynomial; 3],
    pub t0: Rational,
    pub t1: Rational,
    pub closed: bool,
    pub plane_box: GridBox,
}

fn univariate(coefs: &[i64]) -> Polynomial {
    Polynomial::from_terms(1, coefs.iter().enumerate().map(|(k, &c)| (int(c), vec![k as u32]))).expect("arity")
}

/// `x = t³ − 3t`, `y = t⁴ − 4t²`, `z = t⁵ − 10t` on `[−11/5, 11/5]`: a
/// trefoil-style arc whose shadow has three transverse double points.
pub fn crossing_number_example() -> CrossingInstance {
    CrossingInstance {
        name: "trefoil arc".into(),
        curve: [
            univariate(&[0, -3, 0, 1]),
            univariate(&[0, 0, -4, 0, 1]),
            univariate(&[0, -10, 0, 0, 0, 1]),
        ],
        t0: rat(-11, 5),
        t1: rat(11, 5),
        closed: false,
        plane_box: GridBox::cube(2, int(-5), int(5), 400).expect("static"),
    }
}

/// A straight segment: no double points.
pub fn segment_crossing_example() -> CrossingInstance {
    CrossingInstance {
        name: "segment".into(),
        curve: [univariate(&[0, 1]), univariate(&[0, 1]), univariate(&[0])],
        t0: int(-1),
        t1: int(1),
        closed: false,
        plane_box: GridBox::cube(2, int(-2), int(2), 100).expect("static"),
    }
}

/// Upper bound on `|p'(t)|` for `|t| ≤ r`.
fn speed_bound(p: &Polynomial, r: &Rational) -> Rational {
    p.terms()
        .filter(|(e, _)| e[0] > 0)
        .map(|(e, c)| {
            let k = e[0];
            c.abs() * int(k as i64) * num_traits::pow(r.clone(), (k - 1) as usize)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

impl CrossingInstance {
    /// Occupancy of the shadow, thickened by one cell.
    ///
    /// Parameter steps are chosen so consecutive samples move less than half
    /// a cell along each axis; consecutive cells therefore touch and the
    /// raster is connected before thickening.
    pub fn shadow_grid(&self) -> Result<OccupancyGrid> {
        let g = &self.plane_box;
        let n_cells = g.resolution();
        let r = self.t0.abs().max(self.t1.abs());
        let width = (0..2).map(|a| (&g.hi()[a] - &g.lo()[a]) / int(n_cells as i64)).min().expect("two axes");
        let speed = speed_bound(&self.curve[0], &r).max(speed_bound(&self.curve[1], &r)).max(Rational::one());
        let steps = ((&self.t1 - &self.t0) * &speed * int(2) / width).ceil().to_integer();
        let steps = steps.to_usize().filter(|&s| s <= 50_000_000).ok_or(Error::Limit {
            what: "curve sample count",
            limit: 50_000_000,
        })?;
        let mut grid = OccupancyGrid::empty(g.clone())?;
        let dt = (&self.t1 - &self.t0) / int(steps.max(1) as i64);
        let mut idx = [0usize; 2];
        for s in 0..=steps {
            let t = &self.t0 + &dt * int(s as i64);
            for (a, slot) in idx.iter_mut().enumerate() {
                let v = self.curve[a].eval(std::slice::from_ref(&t))?;
                let cell = ((v - &g.lo()[a]) / (&g.hi()[a] - &g.lo()[a]) * int(n_cells as i64)).floor().to_integer();
                *slot = cell
                    .to_usize()
                    .filter(|&c| c < n_cells)
                    .ok_or_else(|| Error::Domain("curve leaves the sampling box".into()))?;
            }
            grid.set(&idx, true)?;
        }
        Ok(grid.dilate(1))
    }

    pub fn report(&self) -> Result<CrossingReport> {
        let grid = self.shadow_grid()?;
        let complement = complement_component_count(&grid);
        let complex = build_complex(&grid)?;
        let betti = betti_numbers(&complex, 1)?;
        let drop = if self.closed { 2 } else { 1 };
        Ok(CrossingReport {
            name: self.name.clone(),
            resolution: self.plane_box.resolution(),
            complement_components: complement,
            bounded_complement_components: complement - 1,
            crossing_number: complement.saturating_sub(drop),
            image_betti: betti,
        })
    }

    /// Parameter pairs `s < t` with equal shadows, found by Newton's method on
    /// the divided differences from a grid of seeds.
    pub fn double_points(&self) -> Vec<(f64, f64)> {
        let coefs = |p: &Polynomial| -> Vec<f64> {
            let deg = p.total_degree() as usize;
            let mut out = vec![0.0; deg + 1];
            for (e, c) in p.terms() {
                out[e[0] as usize] = c.to_f64().unwrap_or(f64::NAN);
            }
            out
        };
        let (cx, cy) = (coefs(&self.curve[0]), coefs(&self.curve[1]));
        let (t0, t1) = (self.t0.to_f64().unwrap_or(0.0), self.t1.to_f64().unwrap_or(0.0));
        let mut found: Vec<(f64, f64)> = Vec::new();
        let seeds = 40;
        for i in 0..=seeds {
            for j in i + 1..=seeds {
                let mut s = t0 + (t1 - t0) * i as f64 / seeds as f64;
                let mut t = t0 + (t1 - t0) * j as f64 / seeds as f64;
                for _ in 0..60 {
                    let (f, fs, ft) = divided_difference(&cx, s, t);
                    let (g, gs, gt) = divided_difference(&cy, s, t);
                    let det = fs * gt - ft * gs;
                    if det.abs() < 1e-14 {
                        break;
                    }
                    s -= (f * gt - ft * g) / det;
                    t -= (fs * g - f * gs) / det;
                }
                let (f, ..) = divided_difference(&cx, s, t);
                let (g, ..) = divided_difference(&cy, s, t);
                let (s, t) = if s < t { (s, t) } else { (t, s) };
                let ok = f.abs() < 1e-10 && g.abs() < 1e-10 && t - s > 1e-6 && s >= t0 - 1e-12 && t <= t1 + 1e-12;
                if ok && !found.iter().any(|&(a, b)| (a - s).abs() < 1e-6 && (b - t).abs() < 1e-6) {
                    found.push((s, t));
                }
            }
        }
        found.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        found
    }
}

/// `(p(s) − p(t)) / (s − t)` and its partial derivatives, for `p` given by
/// its coefficients.
fn divided_difference(c: &[f64], s: f64, t: f64) -> (f64, f64, f64) {
    let (mut v, mut ds, mut dt) = (0.0, 0.0, 0.0);
    for (k, &ck) in c.iter().enumerate().skip(1) {
        // Σ_{i<k} s^i t^{k-1-i}
        for i in 0..k {
            let j = k - 1 - i;
            v += ck * s.powi(i as i32) * t.powi(j as i32);
            if i > 0 {
                ds += ck * i as f64 * s.powi(i as i32 - 1) * t.powi(j as i32);
            }
            if j > 0 {
                dt += ck * j as f64 * s.powi(i as i32) * t.powi(j as i32 - 1);
            }
        }
    }
    (v, ds, dt)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossingReport {
    pub name: String,
    pub resolution: usize,
    /// Including the unbounded component.
    pub complement_components: usize,
    /// Equal to `b_1` of the shadow by planar duality.
    pub bounded_complement_components: usize,
    pub crossing_number: usize,
    pub image_betti: BettiVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomTreeParams {
    pub arity: usize,
    pub max_height: usize,
}

/// A random division-free tree of height at most `max_height`. Constants are
/// small rationals so that sampled points regularly land on branch boundaries.
pub fn random_tree<R: Rng>(rng: &mut R, params: &RandomTreeParams) -> Tree {
    assert!(params.arity >= 1 && params.max_height >= 1);
    let mut b = TreeBuilder::new(params.arity);
    let mut path = Vec::new();
    let root = grow(rng, &mut b, params.arity, params.max_height, true, &mut path);
    b.finish(root).expect("generated trees are well formed")
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

fn random_operand<R: Rng>(rng: &mut R, n: usize, path: &[VertexId]) -> Operand {
    let roll: f64 = rng.gen();
    if !path.is_empty() && roll < 0.45 {
        Operand::Var(path[rng.gen_range(0..path.len())].clone())
    } else if roll < 0.85 {
        Operand::Input(rng.gen_range(1..=n))
    } else {
        Operand::Const(small_rational(rng))
    }
}

fn grow<R: Rng>(
    rng: &mut R,
    b: &mut TreeBuilder,
    n: usize,
    budget: usize,
    root: bool,
    path: &mut Vec<VertexId>,
) -> VertexId {
    let roll: f64 = rng.gen();
    if budget == 1 || (!root && roll < 0.15) {
        return b.leaf(rng.gen_bool(0.5));
    }
    if roll < 0.55 {
        let id = b.reserve();
        let op = [Op::Add, Op::Sub, Op::Mul, Op::Mul][rng.gen_range(0..4)];
        let left = random_operand(rng, n, path);
        let right = random_operand(rng, n, path);
        path.push(id.clone());
        let next = grow(rng, b, n, budget - 1, false, path);
        path.pop();
        b.define(&id, VertexKind::Computation { op, left, right, next });
        id
    } else {
        let id = b.reserve();
        let test = random_operand(rng, n, path);
        let gt = grow(rng, b, n, budget - 1, false, path);
        let eq = grow(rng, b, n, budget - 1, false, path);
        let lt = grow(rng, b, n, budget - 1, false, path);
        b.define(&id, VertexKind::Branch { test, gt, eq, lt });
        id
    }
}

/// A random exact point mixing half-integers, small-denominator values and
/// generic rationals.
pub fn sample_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let roll: f64 = rng.gen();
            if roll < 0.3 {
                rat(rng.gen_range(-6..=6), 2)
            } else if roll < 0.5 {
                small_rational(rng)
            } else {
                let q: i64 = rng.gen_range(1..=97);
                Rational::new(BigInt::from(rng.gen_range(-400..=400) as i64), BigInt::from(q))
            }
        })
        .collect()
}
