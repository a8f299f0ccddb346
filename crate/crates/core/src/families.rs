//! Formula-level monotone families: the closed relaxations `S_δ` and
//! `S_{δ,ε}`, plus their union `T_m(S)` over a schedule.
//!
//! Thresholds are folded into the polynomial, so every relaxed condition has
//! a non-strict sign against zero.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{check_arity, Error, Result};
use crate::extract::{BasicSet, Dnf, Sign, SignCondition};
use crate::poly::{format_rational, parse_rational_list, Polynomial, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsDelta {
    pub eps: Rational,
    pub delta: Rational,
}

impl EpsDelta {
    pub fn new(eps: Rational, delta: Rational) -> Result<Self> {
        if eps <= Rational::zero() || delta <= Rational::zero() {
            return Err(Error::Domain(format!(
                "eps and delta must be positive (got {}, {})",
                format_rational(&eps),
                format_rational(&delta)
            )));
        }
        Ok(Self { eps, delta })
    }

    /// `ε < δ²`: the three relaxed regions `f ≥ δ`, `f ≤ −δ`, `f² ≤ ε` are
    /// pairwise disjoint, which is what a deterministic branch needs to decide
    /// their union exactly.
    pub fn separated(&self) -> bool {
        self.eps < &self.delta * &self.delta
    }
}

/// Levels `(ε_0, δ_0), …, (ε_ℓ, δ_ℓ)`. Construction only checks positivity;
/// interleaving and separation are checked by [`validate_schedule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub levels: Vec<EpsDelta>,
}

impl Schedule {
    pub fn new(levels: Vec<EpsDelta>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Schedule("a schedule needs at least one level".into()));
        }
        Ok(Self { levels })
    }

    /// From the flat sequence `ε_0, δ_0, ε_1, δ_1, …`.
    pub fn from_flat(values: &[Rational]) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::Schedule(format!(
                "expected an even, nonzero number of values, got {}",
                values.len()
            )));
        }
        let levels = values
            .chunks(2)
            .map(|p| EpsDelta::new(p[0].clone(), p[1].clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    /// Parses `"eps0,delta0,eps1,delta1,..."`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_flat(&parse_rational_list(text)?)
    }

    pub fn flat(&self) -> Vec<Rational> {
        self.levels
            .iter()
            .flat_map(|l| [l.eps.clone(), l.delta.clone()])
            .collect()
    }

    /// Index `ℓ` of the last level.
    pub fn last_index(&self) -> usize {
        self.levels.len() - 1
    }

    /// Strict interleaving `0 < ε_0 < δ_0 < … < δ_ℓ < 1`, required by every
    /// operation consuming a schedule.
    pub fn ensure_interleaved(&self) -> Result<()> {
        let bad: Vec<_> = validate_schedule(self, &Rational::one())
            .into_iter()
            .filter(|d| d.kind != ScheduleIssue::Ratio)
            .collect();
        match bad.first() {
            None => Ok(()),
            Some(d) => Err(Error::Schedule(d.message.clone())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleIssue {
    Interleaving,
    Ratio,
    BadRatioParameter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleDiagnostic {
    pub kind: ScheduleIssue,
    pub message: String,
}

/// Checks `ε_0 < δ_0 < ε_1 < … < δ_ℓ < 1` and that every consecutive ratio
/// in that sequence is at least `ratio`. A ratio of 1 checks interleaving only.
pub fn validate_schedule(sched: &Schedule, ratio: &Rational) -> Vec<ScheduleDiagnostic> {
    let mut out = Vec::new();
    if *ratio < Rational::one() {
        out.push(ScheduleDiagnostic {
            kind: ScheduleIssue::BadRatioParameter,
            message: format!("ratio {} must exceed 1", format_rational(ratio)),
        });
        return out;
    }
    let seq = sched.flat();
    let name = |i: usize| format!("{}_{}", if i.is_multiple_of(2) { "eps" } else { "delta" }, i / 2);
    for (i, w) in seq.windows(2).enumerate() {
        if w[0] >= w[1] {
            out.push(ScheduleDiagnostic {
                kind: ScheduleIssue::Interleaving,
                message: format!(
                    "{} = {} is not below {} = {}",
                    name(i),
                    format_rational(&w[0]),
                    name(i + 1),
                    format_rational(&w[1])
                ),
            });
        } else if *ratio > Rational::one() && &w[1] / &w[0] < *ratio {
            out.push(ScheduleDiagnostic {
                kind: ScheduleIssue::Ratio,
                message: format!(
                    "{}/{} = {} is below the required ratio {}",
                    name(i + 1),
                    name(i),
                    format_rational(&(&w[1] / &w[0])),
                    format_rational(ratio)
                ),
            });
        }
    }
    let last = seq.last().expect("schedules are nonempty");
    if *last >= Rational::one() {
        out.push(ScheduleDiagnostic {
            kind: ScheduleIssue::Interleaving,
            message: format!("{} = {} is not below 1", name(seq.len() - 1), format_rational(last)),
        });
    }
    out
}

/// Ambient compactum. Bounded sets need no extra conjunct; unbounded ones
/// get `|x|² ≤ 1/δ` appended to every relaxed disjunct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmbientMode {
    Bounded { ball_radius_sq: Rational },
    Unbounded,
}

impl AmbientMode {
    pub fn bounded(ball_radius_sq: Rational) -> Result<Self> {
        if ball_radius_sq <= Rational::zero() {
            return Err(Error::Domain("ball radius must be positive".into()));
        }
        Ok(AmbientMode::Bounded { ball_radius_sq })
    }
}

fn relax(f: &Dnf, delta: &Rational, eps: Option<&Rational>, mode: &AmbientMode) -> Result<Dnf> {
    if *delta <= Rational::zero() {
        return Err(Error::Domain("delta must be positive".into()));
    }
    if let Some(e) = eps {
        if *e <= Rational::zero() {
            return Err(Error::Domain("eps must be positive".into()));
        }
    }
    let n = f.arity;
    let ball = SignCondition::new(
        Polynomial::norm_squared(n).add_constant(&-(Rational::one() / delta)),
        Sign::Le,
    );
    let mut out = Vec::with_capacity(f.disjuncts.len());
    for d in &f.disjuncts {
        let mut conds = Vec::with_capacity(d.conds.len() + 1);
        for c in &d.conds {
            conds.push(match c.sign {
                Sign::Gt => SignCondition::new(c.poly.add_constant(&-delta.clone()), Sign::Ge),
                Sign::Lt => SignCondition::new((-&c.poly).add_constant(&-delta.clone()), Sign::Ge),
                Sign::Eq => match eps {
                    None => c.clone(),
                    Some(e) => SignCondition::new(c.poly.square().add_constant(&-e.clone()), Sign::Le),
                },
                Sign::Le | Sign::Ge => {
                    return Err(Error::Domain(
                        "relaxation expects a formula with only <, =, > conditions".into(),
                    ))
                }
            });
        }
        if let AmbientMode::Unbounded = mode {
            conds.push(ball.clone());
        }
        out.push(BasicSet { arity: n, conds });
    }
    Ok(Dnf { arity: n, disjuncts: out })
}

/// `S_δ`: `h > 0 ↦ h − δ ≥ 0`, `h < 0 ↦ −h − δ ≥ 0`, equations unchanged.
pub fn closure_delta(f: &Dnf, delta: &Rational, mode: &AmbientMode) -> Result<Dnf> {
    relax(f, delta, None, mode)
}

/// `S_{δ,ε}`: as [`closure_delta`], and `h = 0 ↦ h² − ε ≤ 0`.
pub fn closure_delta_eps(f: &Dnf, delta: &Rational, eps: &Rational, mode: &AmbientMode) -> Result<Dnf> {
    relax(f, delta, Some(eps), mode)
}

/// `T_ℓ(S) = S_{δ_0,ε_0} ∪ … ∪ S_{δ_ℓ,ε_ℓ}`.
pub fn t_m_formula(f: &Dnf, sched: &Schedule, mode: &AmbientMode) -> Result<Dnf> {
    sched.ensure_interleaved()?;
    let mut disjuncts = Vec::new();
    for level in &sched.levels {
        disjuncts.extend(closure_delta_eps(f, &level.delta, &level.eps, mode)?.disjuncts);
    }
    Ok(Dnf { arity: f.arity, disjuncts })
}

/// Exact membership: OR over disjuncts of AND over conditions.
pub fn eval_formula(f: &Dnf, x: &[Rational]) -> Result<bool> {
    check_arity(f.arity, x.len())?;
    for d in &f.disjuncts {
        let mut all = true;
        for c in &d.conds {
            let v = c.poly.eval(x)?;
            if !c.sign.holds(v.cmp(&Rational::zero())) {
                all = false;
                break;
            }
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `ρ: R^n → R^{n−r}` drops the last `r` coordinates; `W_p` is the
/// `(p+1)`-fold fibered product over the image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FiberSpec {
    pub n: usize,
    pub r: usize,
    pub p: usize,
}

impl FiberSpec {
    pub fn new(n: usize, r: usize, p: usize) -> Result<Self> {
        if r == 0 || r >= n {
            return Err(Error::Domain(format!("fiber dimension r={r} must satisfy 0 < r < n={n}")));
        }
        Ok(Self { n, r, p })
    }

    /// `(n − r) + (p + 1) r`: base coordinates, then one block per factor.
    pub fn product_arity(&self) -> usize {
        (self.n - self.r) + (self.p + 1) * self.r
    }

    /// Position, in the product, of coordinate `i` (0-based) of factor `j`.
    pub fn coordinate_map(&self, factor: usize) -> Vec<usize> {
        let base = self.n - self.r;
        (0..self.n)
            .map(|i| if i < base { i } else { base + factor * self.r + (i - base) })
            .collect()
    }

    /// Point of factor `j` inside a point of the product.
    pub fn factor_point(&self, x: &[Rational], factor: usize) -> Vec<Rational> {
        self.coordinate_map(factor).iter().map(|&k| x[k].clone()).collect()
    }
}

/// Formula for `W_p = {(x, y_1, …, y_{p+1}) : (x, y_j) ∈ S for all j}`.
/// One disjunct per choice of a disjunct of `f` in every factor.
pub fn fiber_product_formula(f: &Dnf, spec: &FiberSpec) -> Result<Dnf> {
    check_arity(spec.n, f.arity)?;
    let arity = spec.product_arity();
    let factors = (0..=spec.p)
        .map(|j| {
            let map = spec.coordinate_map(j);
            f.disjuncts
                .iter()
                .map(|d| {
                    d.conds
                        .iter()
                        .map(|c| Ok(SignCondition::new(c.poly.remap(arity, &map)?, c.sign)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc: Vec<Vec<SignCondition>> = vec![Vec::new()];
    for factor in &factors {
        let mut next = Vec::with_capacity(acc.len() * factor.len());
        for prefix in &acc {
            for conds in factor {
                let mut c = prefix.clone();
                c.extend(conds.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    Ok(Dnf {
        arity,
        disjuncts: acc.into_iter().map(|conds| BasicSet { arity, conds }).collect(),
    })
}

/// Sampled projection membership: whether some candidate fiber `y` puts
/// `(base, y)` in the set.
pub fn fiber_search(f: &Dnf, base: &[Rational], fibers: &[Vec<Rational>]) -> Result<bool> {
    for y in fibers {
        let mut pt = base.to_vec();
        pt.extend(y.iter().cloned());
        if eval_formula(f, &pt)? {
            return Ok(true);
        }
    }
    Ok(false)
}
