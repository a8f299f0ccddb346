//! Betti numbers of closed formulas at a fixed grid resolution.
//!
//! A formula is sampled on the cells of a box, the occupied cells are closed
//! up into a cubical complex, and homology over GF(2) is computed after
//! elementary collapses have removed most of the cells.
//!
//! Cubical cells live on the doubled lattice `{0, …, 2N}^n`: a coordinate is
//! even on a degenerate (vertex-like) direction and odd on an interval, so a
//! cell's dimension is its number of odd coordinates.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_arity, Error, Result};
use crate::extract::{Dnf, Sign};
use crate::poly::{format_rational, parse_rational, Polynomial, Rational, ScaledSign};

/// Default guard on the number of top cells (and doubled-lattice sites).
pub const DEFAULT_CELL_LIMIT: usize = 50_000_000;

/// Axis-aligned box `∏ [lo_i, hi_i]` split into `N` cells per axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridBox {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
    resolution: usize,
}

impl GridBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>, resolution: usize) -> Result<Self> {
        check_arity(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::Domain("a box needs at least one axis".into()));
        }
        if resolution == 0 {
            return Err(Error::Domain("grid resolution must be at least 1".into()));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(Error::Domain(format!(
                "axis {}: lower end {} is not below upper end {}",
                i + 1,
                format_rational(&lo[i]),
                format_rational(&hi[i])
            )));
        }
        Ok(Self { lo, hi, resolution })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: Rational, hi: Rational, resolution: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], resolution)
    }

    /// Parses `"lo:hi,lo:hi,..."` with exact rationals.
    pub fn parse(spec: &str, resolution: usize) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in spec.split(',') {
            let (a, b) = axis
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("box axis {axis:?} is not of the form lo:hi")))?;
            lo.push(parse_rational(a)?);
            hi.push(parse_rational(b)?);
        }
        Self::new(lo, hi, resolution)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    /// Same box at another resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        Self::new(self.lo.clone(), self.hi.clone(), resolution)
    }

    pub fn cell_count(&self) -> Option<usize> {
        self.resolution.checked_pow(self.dim() as u32)
    }

    /// Exact center of the cell with multi-index `idx`.
    pub fn cell_center(&self, idx: &[usize]) -> Vec<Rational> {
        let two_n = Rational::from_integer(BigInt::from(2 * self.resolution));
        idx.iter()
            .enumerate()
            .map(|(a, &i)| {
                let w = &self.hi[a] - &self.lo[a];
                &self.lo[a] + w * Rational::from_integer(BigInt::from(2 * i + 1)) / &two_n
            })
            .collect()
    }

    /// Integer coordinates of the doubled lattice: the point with doubled
    /// index `k` on axis `a` is `(origin[a] + k·half[a]) / denom`.
    fn lattice(&self) -> Result<Lattice> {
        let two_n = Rational::from_integer(BigInt::from(2 * self.resolution));
        let halves: Vec<Rational> = (0..self.dim()).map(|a| (&self.hi[a] - &self.lo[a]) / &two_n).collect();
        let denom = self
            .lo
            .iter()
            .chain(halves.iter())
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let scaled = |r: &Rational| -> Result<i64> {
            (r * Rational::from_integer(denom.clone()))
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Domain("box coordinates too large for exact grid evaluation".into()))
        };
        let origin = self.lo.iter().map(&scaled).collect::<Result<Vec<_>>>()?;
        let half = halves.iter().map(&scaled).collect::<Result<Vec<_>>>()?;
        for a in 0..self.dim() {
            let top = (2 * self.resolution as i64).checked_mul(half[a]).and_then(|v| v.checked_add(origin[a]));
            if top.is_none() {
                return Err(Error::Domain("box coordinates too large for exact grid evaluation".into()));
            }
        }
        Ok(Lattice { denom, origin, half })
    }
}

struct Lattice {
    denom: BigInt,
    origin: Vec<i64>,
    half: Vec<i64>,
}

impl Lattice {
    fn point(&self, doubled: &[usize], out: &mut [i64]) {
        for (a, &k) in doubled.iter().enumerate() {
            out[a] = self.origin[a] + k as i64 * self.half[a];
        }
    }
}

/// A closed formula compiled for exact sign evaluation on one lattice.
struct CompiledFormula {
    polys: Vec<ScaledSign>,
    disjuncts: Vec<Vec<(usize, Sign)>>,
}

impl CompiledFormula {
    fn new(f: &Dnf, denom: &BigInt) -> Self {
        let mut index: HashMap<&Polynomial, usize> = HashMap::new();
        let mut polys = Vec::new();
        let disjuncts = f
            .disjuncts
            .iter()
            .map(|d| {
                d.conds
                    .iter()
                    .map(|c| {
                        let k = *index.entry(&c.poly).or_insert_with(|| {
                            polys.push(ScaledSign::new(&c.poly, denom));
                            polys.len() - 1
                        });
                        (k, c.sign)
                    })
                    .collect()
            })
            .collect();
        Self { polys, disjuncts }
    }

    fn holds(&self, y: &[i64], memo: &mut [Option<Ordering>]) -> bool {
        memo.iter_mut().for_each(|m| *m = None);
        self.disjuncts.iter().any(|d| {
            d.iter().all(|&(k, sign)| {
                let ord = *memo[k].get_or_insert_with(|| self.polys[k].sign(y));
                sign.holds(ord)
            })
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupancyMode {
    /// A cell is occupied iff the formula holds at its center.
    #[default]
    Center,
    /// A cell is occupied iff the formula holds at one of its corners.
    Corner,
}

/// Occupied top cells of a box, stored densely in row-major order with the
/// first axis slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupancyGrid {
    grid: GridBox,
    occupied: Vec<bool>,
}

fn decode(mut lin: usize, n: usize, size: usize, out: &mut [usize]) {
    for a in (0..n).rev() {
        out[a] = lin % size;
        lin /= size;
    }
}

fn encode(idx: &[usize], size: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * size + i)
}

fn guarded_count(grid: &GridBox, per_axis: usize, limit: usize) -> Result<usize> {
    per_axis
        .checked_pow(grid.dim() as u32)
        .filter(|&c| c <= limit)
        .ok_or(Error::Limit { what: "cell count", limit })
}

impl OccupancyGrid {
    pub fn empty(grid: GridBox) -> Result<Self> {
        let total = guarded_count(&grid, grid.resolution, DEFAULT_CELL_LIMIT)?;
        Ok(Self {
            grid,
            occupied: vec![false; total],
        })
    }

    /// Grid with exactly the given cells occupied.
    pub fn from_cells<'a, I>(grid: GridBox, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut g = Self::empty(grid)?;
        for c in cells {
            g.set(c, true)?;
        }
        Ok(g)
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution
    }

    pub fn set(&mut self, idx: &[usize], value: bool) -> Result<()> {
        check_arity(self.dim(), idx.len())?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.resolution()) {
            return Err(Error::Domain(format!("cell index {bad} out of range")));
        }
        let lin = encode(idx, self.resolution());
        self.occupied[lin] = value;
        Ok(())
    }

    pub fn is_occupied(&self, idx: &[usize]) -> bool {
        self.occupied[encode(idx, self.resolution())]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&b| b).count()
    }

    /// Occupied multi-indices in row-major order.
    pub fn occupied_cells(&self) -> Vec<Vec<usize>> {
        let (n, size) = (self.dim(), self.resolution());
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(lin, _)| {
                let mut idx = vec![0; n];
                decode(lin, n, size, &mut idx);
                idx
            })
            .collect()
    }

    /// Adds every cell within Chebyshev distance `radius` of an occupied cell.
    pub fn dilate(&self, radius: usize) -> OccupancyGrid {
        let (n, size) = (self.dim(), self.resolution());
        let mut out = self.clone();
        let mut idx = vec![0; n];
        let mut nb = vec![0; n];
        let r = radius as i64;
        let span = 2 * radius + 1;
        let offsets = span.pow(n as u32);
        for (lin, _) in self.occupied.iter().enumerate().filter(|(_, &b)| b) {
            decode(lin, n, size, &mut idx);
            'off: for o in 0..offsets {
                let mut rest = o;
                for a in 0..n {
                    let d = (rest % span) as i64 - r;
                    rest /= span;
                    let v = idx[a] as i64 + d;
                    if v < 0 || v >= size as i64 {
                        continue 'off;
                    }
                    nb[a] = v as usize;
                }
                out.occupied[encode(&nb, size)] = true;
            }
        }
        out
    }
}

/// Samples a closed formula on the grid (center mode, default cell limit).
pub fn occupancy_grid(f: &Dnf, grid: &GridBox) -> Result<OccupancyGrid> {
    occupancy_grid_with(f, grid, OccupancyMode::Center, DEFAULT_CELL_LIMIT)
}

pub fn occupancy_grid_with(f: &Dnf, grid: &GridBox, mode: OccupancyMode, cell_limit: usize) -> Result<OccupancyGrid> {
    check_arity(grid.dim(), f.arity)?;
    if f.has_strict_signs() {
        return Err(Error::Domain(
            "formula has strict signs; compactify it before sampling".into(),
        ));
    }
    let n = grid.dim();
    let size = grid.resolution;
    let total = guarded_count(grid, size, cell_limit)?;
    let lattice = grid.lattice()?;
    let compiled = CompiledFormula::new(f, &lattice.denom);
    let occupied = match mode {
        OccupancyMode::Center => (0..total)
            .into_par_iter()
            .map_init(
                || (vec![0usize; n], vec![0i64; n], vec![None; compiled.polys.len()]),
                |(idx, y, memo), lin| {
                    decode(lin, n, size, idx);
                    idx.iter_mut().for_each(|i| *i = 2 * *i + 1);
                    lattice.point(idx, y);
                    compiled.holds(y, memo)
                },
            )
            .collect(),
        OccupancyMode::Corner => {
            let vsize = size + 1;
            let vtotal = guarded_count(grid, vsize, cell_limit.saturating_mul(2))?;
            let corner: Vec<bool> = (0..vtotal)
                .into_par_iter()
                .map_init(
                    || (vec![0usize; n], vec![0i64; n], vec![None; compiled.polys.len()]),
                    |(idx, y, memo), lin| {
                        decode(lin, n, vsize, idx);
                        idx.iter_mut().for_each(|i| *i *= 2);
                        lattice.point(idx, y);
                        compiled.holds(y, memo)
                    },
                )
                .collect();
            (0..total)
                .into_par_iter()
                .map_init(
                    || (vec![0usize; n], vec![0usize; n]),
                    |(idx, c), lin| {
                        decode(lin, n, size, idx);
                        (0..1usize << n).any(|mask| {
                            for a in 0..n {
                                c[a] = idx[a] + ((mask >> a) & 1);
                            }
                            corner[encode(c, vsize)]
                        })
                    },
                )
                .collect()
        }
    };
    Ok(OccupancyGrid {
        grid: grid.clone(),
        occupied,
    })
}

/// Closed cubical complex on the doubled lattice of a grid.
#[derive(Clone, Debug)]
pub struct CubicalComplex {
    dim: usize,
    size: usize,
    strides: Vec<usize>,
    present: Vec<bool>,
}

impl CubicalComplex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn coord(&self, cell: usize, axis: usize) -> usize {
        (cell / self.strides[axis]) % self.size
    }

    fn cell_dim(&self, cell: usize) -> usize {
        (0..self.dim).filter(|&a| self.coord(cell, a) % 2 == 1).count()
    }

    fn faces(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        for a in 0..self.dim {
            if self.coord(cell, a) % 2 == 1 {
                out.push(cell - self.strides[a]);
                out.push(cell + self.strides[a]);
            }
        }
    }

    fn cofaces(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        for a in 0..self.dim {
            let c = self.coord(cell, a);
            if c.is_multiple_of(2) {
                if c > 0 {
                    out.push(cell - self.strides[a]);
                }
                if c + 1 < self.size {
                    out.push(cell + self.strides[a]);
                }
            }
        }
    }

    /// Number of cells of each dimension `0..=dim`.
    pub fn cell_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim + 1];
        for (cell, _) in self.present.iter().enumerate().filter(|(_, &p)| p) {
            counts[self.cell_dim(cell)] += 1;
        }
        counts
    }

    pub fn is_empty(&self) -> bool {
        !self.present.iter().any(|&p| p)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cell_counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Whether every face of a present cell is present.
    pub fn is_closed(&self) -> bool {
        let mut faces = Vec::new();
        self.present.iter().enumerate().filter(|(_, &p)| p).all(|(cell, _)| {
            self.faces(cell, &mut faces);
            faces.iter().all(|&f| self.present[f])
        })
    }

    /// `∂∘∂ = 0` over GF(2): every codimension-2 face of a cell is reached
    /// through an even number of its facets.
    pub fn boundary_squared_is_zero(&self) -> bool {
        let mut faces = Vec::new();
        let mut second = Vec::new();
        let mut parity: HashMap<usize, bool> = HashMap::new();
        for (cell, _) in self.present.iter().enumerate().filter(|(_, &p)| p) {
            parity.clear();
            self.faces(cell, &mut faces);
            for &f in &faces {
                self.faces(f, &mut second);
                for &g in &second {
                    *parity.entry(g).or_insert(false) ^= true;
                }
            }
            if parity.values().any(|&odd| odd) {
                return false;
            }
        }
        true
    }
}

/// All occupied top cells together with all their faces.
pub fn build_complex(g: &OccupancyGrid) -> Result<CubicalComplex> {
    build_complex_with(g, DEFAULT_CELL_LIMIT)
}

pub fn build_complex_with(g: &OccupancyGrid, cell_limit: usize) -> Result<CubicalComplex> {
    let n = g.dim();
    let size = 2 * g.resolution() + 1;
    let total = guarded_count(g.grid(), size, cell_limit.saturating_mul(1 << n.min(8)))?;
    let mut strides = vec![1; n];
    for a in (0..n.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * size;
    }
    let mut present = vec![false; total];
    let mut idx = vec![0; n];
    let offsets = 3usize.pow(n as u32);
    for cell in g.occupied_cells() {
        for (a, &i) in cell.iter().enumerate() {
            idx[a] = 2 * i + 1;
        }
        let center: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        for o in 0..offsets {
            let mut rest = o;
            let mut at = center as isize;
            for s in &strides {
                at += ((rest % 3) as isize - 1) * *s as isize;
                rest /= 3;
            }
            present[at as usize] = true;
        }
    }
    let c = CubicalComplex {
        dim: n,
        size,
        strides,
        present,
    };
    debug_assert!(c.present.len() > 1 << 16 || c.boundary_squared_is_zero());
    Ok(c)
}

/// Ranks of homology over GF(2), `b_0 … b_mmax`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BettiVector {
    pub b: Vec<usize>,
}

impl BettiVector {
    pub fn total(&self) -> usize {
        self.b.iter().sum()
    }
}

/// Betti numbers after collapsing free faces.
pub fn betti_numbers(c: &CubicalComplex, mmax: usize) -> Result<BettiVector> {
    if mmax > c.dim {
        return Err(Error::Domain(format!("max dimension {mmax} exceeds complex dimension {}", c.dim)));
    }
    let mut reduced = c.clone();
    collapse(&mut reduced);
    let mut b = homology_ranks(&reduced);
    b.truncate(mmax + 1);
    Ok(BettiVector { b })
}

/// Betti numbers by elimination on the full complex; slow, for cross-checks.
pub fn betti_numbers_uncollapsed(c: &CubicalComplex, mmax: usize) -> Result<BettiVector> {
    if mmax > c.dim {
        return Err(Error::Domain(format!("max dimension {mmax} exceeds complex dimension {}", c.dim)));
    }
    let mut b = homology_ranks(c);
    b.truncate(mmax + 1);
    Ok(BettiVector { b })
}

/// Repeatedly removes a cell with exactly one coface together with that
/// coface. Each removal is a deformation retraction, so homology is kept.
fn collapse(c: &mut CubicalComplex) {
    let mut work: Vec<usize> = (0..c.present.len()).filter(|&i| c.present[i]).collect();
    let mut cof = Vec::new();
    let mut faces = Vec::new();
    while let Some(s) = work.pop() {
        if !c.present[s] {
            continue;
        }
        c.cofaces(s, &mut cof);
        let mut live = cof.iter().copied().filter(|&t| c.present[t]);
        let (Some(t), None) = (live.next(), live.next()) else {
            continue;
        };
        c.present[s] = false;
        c.present[t] = false;
        c.faces(t, &mut faces);
        work.extend(faces.iter().copied().filter(|&f| c.present[f]));
        c.faces(s, &mut faces);
        work.extend(faces.iter().copied().filter(|&f| c.present[f]));
    }
}

/// Symmetric difference of two sorted index lists.
fn add_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn homology_ranks(c: &CubicalComplex) -> Vec<usize> {
    let n = c.dim;
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (cell, _) in c.present.iter().enumerate().filter(|(_, &p)| p) {
        by_dim[c.cell_dim(cell)].push(cell);
    }
    let position: Vec<HashMap<usize, u32>> = by_dim
        .iter()
        .map(|cells| cells.iter().enumerate().map(|(i, &cell)| (cell, i as u32)).collect())
        .collect();
    // rank[k] = rank of ∂_k : C_k → C_{k−1}
    let mut rank = vec![0usize; n + 2];
    // columns of ∂_k that are known to reduce to zero (pivots of ∂_{k+1})
    let mut cleared: Vec<bool> = Vec::new();
    let mut faces = Vec::new();
    for k in (1..=n).rev() {
        let mut pivot_col: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut next_cleared = vec![false; by_dim[k - 1].len()];
        for (j, &cell) in by_dim[k].iter().enumerate() {
            if cleared.get(j).copied().unwrap_or(false) {
                continue;
            }
            c.faces(cell, &mut faces);
            let mut col: Vec<u32> = faces.iter().map(|f| position[k - 1][f]).collect();
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match pivot_col.get(&low) {
                    Some(other) => col = add_columns(&col, other),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                next_cleared[low as usize] = true;
                pivot_col.insert(low, col);
            }
        }
        rank[k] = pivot_col.len();
        cleared = next_cleared;
    }
    (0..=n)
        .map(|k| by_dim[k].len() - rank[k] - rank[k + 1])
        .collect()
}

/// Connected components of the occupied cells, where cells sharing any face
/// (down to a single vertex) are adjacent, matching the closed complex.
pub fn component_count(g: &OccupancyGrid) -> usize {
    let (n, size) = (g.dim(), g.resolution());
    let total = g.occupied.len();
    let mut uf = UnionFind::<usize>::new(total);
    let mut idx = vec![0; n];
    let mut nb = vec![0; n];
    let offsets = 3usize.pow(n as u32);
    for lin in (0..total).filter(|&l| g.occupied[l]) {
        decode(lin, n, size, &mut idx);
        'off: for o in 0..offsets {
            let mut rest = o;
            for a in 0..n {
                let v = idx[a] as i64 + (rest % 3) as i64 - 1;
                rest /= 3;
                if v < 0 || v >= size as i64 {
                    continue 'off;
                }
                nb[a] = v as usize;
            }
            let other = encode(&nb, size);
            if other > lin && g.occupied[other] {
                uf.union(lin, other);
            }
        }
    }
    let mut roots: Vec<usize> = (0..total).filter(|&l| g.occupied[l]).map(|l| uf.find(l)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Connected components of the complement of the closed complex in `R^n`.
/// Empty cells are adjacent across shared facets; all empty cells on the box
/// boundary belong to the single unbounded component.
pub fn complement_component_count(g: &OccupancyGrid) -> usize {
    let (n, size) = (g.dim(), g.resolution());
    let total = g.occupied.len();
    let outside = total;
    let mut uf = UnionFind::<usize>::new(total + 1);
    let mut idx = vec![0; n];
    for lin in (0..total).filter(|&l| !g.occupied[l]) {
        decode(lin, n, size, &mut idx);
        let mut stride = 1;
        for a in (0..n).rev() {
            if idx[a] == 0 || idx[a] + 1 == size {
                uf.union(lin, outside);
            }
            if idx[a] + 1 < size && !g.occupied[lin + stride] {
                uf.union(lin, lin + stride);
            }
            stride *= size;
        }
    }
    let mut roots: Vec<usize> = (0..total)
        .filter(|&l| !g.occupied[l])
        .map(|l| uf.find(l))
        .chain(std::iter::once(uf.find(outside)))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{BasicSet, SignCondition};
    use crate::poly::{int, rat};
    use proptest::prelude::*;

    fn square_box(res: usize) -> GridBox {
        GridBox::cube(2, int(0), int(res as i64), res).unwrap()
    }

    fn grid_of(res: usize, cells: &[[usize; 2]]) -> OccupancyGrid {
        OccupancyGrid::from_cells(square_box(res), cells.iter().map(|c| &c[..])).unwrap()
    }

    fn betti(g: &OccupancyGrid) -> Vec<usize> {
        let c = build_complex(g).unwrap();
        betti_numbers(&c, c.dim()).unwrap().b
    }

    fn disk() -> Dnf {
        let p = Polynomial::norm_squared(2).add_constant(&int(-1));
        Dnf::new(2, vec![BasicSet::new(2, vec![SignCondition::new(p, Sign::Le)]).unwrap()]).unwrap()
    }

    #[test]
    fn disk_on_a_coarse_grid() {
        let g = occupancy_grid(&disk(), &GridBox::parse("-2:2,-2:2", 4).unwrap()).unwrap();
        assert_eq!(g.occupied_cells(), vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(g.grid().cell_center(&[1, 2]), vec![rat(-1, 2), rat(1, 2)]);
        assert_eq!(betti(&g), vec![1, 0, 0]);
    }

    #[test]
    fn half_line_and_false_formula() {
        let x = Polynomial::var(1, 0);
        let f = Dnf::new(1, vec![BasicSet::new(1, vec![SignCondition::new(x, Sign::Ge)]).unwrap()]).unwrap();
        let grid = GridBox::parse("-1:1", 4).unwrap();
        assert_eq!(occupancy_grid(&f, &grid).unwrap().occupied_cells(), vec![vec![2], vec![3]]);
        assert_eq!(occupancy_grid(&Dnf::empty(1), &grid).unwrap().occupied_count(), 0);
    }

    #[test]
    fn strict_signs_are_rejected() {
        let x = Polynomial::var(1, 0);
        let f = Dnf::new(1, vec![BasicSet::new(1, vec![SignCondition::new(x, Sign::Gt)]).unwrap()]).unwrap();
        assert!(occupancy_grid(&f, &GridBox::parse("-1:1", 4).unwrap()).is_err());
    }

    #[test]
    fn corner_mode_is_a_superset() {
        let grid = GridBox::parse("-2:2,-2:2", 8).unwrap();
        let center = occupancy_grid(&disk(), &grid).unwrap();
        let corner = occupancy_grid_with(&disk(), &grid, OccupancyMode::Corner, DEFAULT_CELL_LIMIT).unwrap();
        assert!(corner.occupied_count() > center.occupied_count());
        assert!(center.occupied_cells().iter().all(|c| corner.is_occupied(c)));
    }

    #[test]
    fn cell_limit_guard() {
        let grid = GridBox::parse("0:1,0:1,0:1", 100).unwrap();
        let err = occupancy_grid_with(&Dnf::empty(3), &grid, OccupancyMode::Center, 1000).unwrap_err();
        assert!(matches!(err, Error::Limit { .. }));
    }

    #[test]
    fn complex_cell_counts() {
        let one = build_complex(&grid_of(3, &[[1, 1]])).unwrap();
        assert_eq!(one.cell_counts(), vec![4, 4, 1]);
        let diag = build_complex(&grid_of(3, &[[0, 0], [1, 1]])).unwrap();
        assert_eq!(diag.cell_counts(), vec![7, 8, 2]);
        let empty = build_complex(&grid_of(3, &[])).unwrap();
        assert!(empty.is_empty());
        assert_eq!(betti(&grid_of(3, &[])), vec![0, 0, 0]);
    }

    #[test]
    fn square_fixtures() {
        let full: Vec<[usize; 2]> = (0..3).flat_map(|i| (0..3).map(move |j| [i, j])).collect();
        assert_eq!(betti(&grid_of(3, &full)), vec![1, 0, 0]);
        let ring: Vec<[usize; 2]> = full.iter().copied().filter(|&c| c != [1, 1]).collect();
        assert_eq!(betti(&grid_of(3, &ring)), vec![1, 1, 0]);
        assert_eq!(betti(&grid_of(5, &[[0, 0], [3, 3]])), vec![2, 0, 0]);
    }

    #[test]
    fn hollow_cube_has_a_cavity() {
        let grid = GridBox::cube(3, int(0), int(3), 3).unwrap();
        let cells: Vec<Vec<usize>> = (0..27)
            .map(|l| vec![l / 9, (l / 3) % 3, l % 3])
            .filter(|c| c != &vec![1, 1, 1])
            .collect();
        let g = OccupancyGrid::from_cells(grid, cells.iter().map(|c| &c[..])).unwrap();
        assert_eq!(betti(&g), vec![1, 0, 1, 0]);
        assert_eq!(complement_component_count(&g), 2);
    }

    #[test]
    fn components_follow_the_closed_convention() {
        let diag = grid_of(3, &[[0, 0], [1, 1]]);
        assert_eq!(component_count(&diag), 1);
        assert_eq!(component_count(&grid_of(3, &[[0, 0], [2, 2]])), 2);
        // the diagonal pair pinches but does not separate the complement
        assert_eq!(complement_component_count(&diag), 1);
    }

    #[test]
    fn dilation_thickens() {
        let g = grid_of(5, &[[2, 2]]).dilate(1);
        assert_eq!(g.occupied_count(), 9);
        assert_eq!(grid_of(5, &[[0, 0]]).dilate(1).occupied_count(), 4);
    }

    fn arb_grid(n: usize, res: usize) -> impl Strategy<Value = OccupancyGrid> {
        prop::collection::vec(prop::bool::weighted(0.45), res.pow(n as u32)).prop_map(move |bits| {
            let grid = GridBox::cube(n, int(0), int(1), res).unwrap();
            OccupancyGrid { grid, occupied: bits }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn planar_invariants(g in arb_grid(2, 7)) {
            let c = build_complex(&g).unwrap();
            prop_assert!(c.is_closed());
            prop_assert!(c.boundary_squared_is_zero());
            let b = betti_numbers(&c, 2).unwrap().b;
            prop_assert_eq!(&b, &betti_numbers_uncollapsed(&c, 2).unwrap().b);
            prop_assert_eq!(b[0], component_count(&g));
            prop_assert_eq!(b[2], 0);
            prop_assert_eq!(b[0] as i64 - b[1] as i64, c.euler_characteristic());
            // planar duality: one hole per bounded complement component
            if b[0] > 0 {
                prop_assert_eq!(b[1], complement_component_count(&g) - 1);
            }
        }

        #[test]
        fn solid_invariants(g in arb_grid(3, 4)) {
            let c = build_complex(&g).unwrap();
            prop_assert!(c.boundary_squared_is_zero());
            let b = betti_numbers(&c, 3).unwrap().b;
            prop_assert_eq!(&b, &betti_numbers_uncollapsed(&c, 3).unwrap().b);
            prop_assert_eq!(b[0], component_count(&g));
            prop_assert_eq!(b[0] as i64 - b[1] as i64 + b[2] as i64 - b[3] as i64, c.euler_characteristic());
            if b[0] > 0 {
                prop_assert_eq!(b[2], complement_component_count(&g) - 1);
            }
        }
    }
}
