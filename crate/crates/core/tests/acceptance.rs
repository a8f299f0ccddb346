//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p actree-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use actree::bounds::{invert_height_bound, projection_inequality_check};
use actree::extract::{dnf_stats, leaf_dnf, BasicSet, Dnf, Sign, SignCondition};
use actree::families::{closure_delta_eps, eval_formula, fiber_search, t_m_formula};
use actree::poly::{int, rat, Polynomial, Rational};
use actree::problems::{
    annulus_example, circle_fiber_example, crossing_number_example, distinctness_tree, parity_problem,
    random_tree, sample_point, segment_crossing_example, RandomTreeParams,
};
use actree::topology::{
    betti_numbers, build_complex, component_count, occupancy_grid, GridBox, OccupancyGrid,
};
use actree::transforms::{eps_delta_tree, fiber_product_tree, t_ell_tree};
use actree::tree::Evaluator;
use actree::{AmbientMode, EpsDelta, Schedule, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Twenty random division-free trees with `n ≤ 3` and height `≤ 6`.
fn corpus() -> Vec<Tree> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..20)
        .map(|i| {
            let params = RandomTreeParams {
                arity: 1 + i % 3,
                max_height: 6,
            };
            random_tree(&mut rng, &params)
        })
        .collect()
}

fn single_level() -> EpsDelta {
    EpsDelta::new(rat(1, 1000), rat(1, 10)).unwrap()
}

fn two_levels() -> Schedule {
    Schedule::parse("1/100000,1/100,1/20,1/2").unwrap()
}

fn transform_semantics(trees: &[Tree]) -> Outcome {
    let ed = single_level();
    let sched = two_levels();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points = 0;
    for (i, t) in trees.iter().enumerate() {
        let leaf_sets = leaf_dnf(t).map_err(err)?.dnf;
        let f_ed = closure_delta_eps(&leaf_sets, &ed.delta, &ed.eps, &AmbientMode::Unbounded).map_err(err)?;
        let f_tl = t_m_formula(&leaf_sets, &sched, &AmbientMode::Unbounded).map_err(err)?;
        let t_ed = eps_delta_tree(t, &ed).map_err(err)?;
        let t_tl = t_ell_tree(t, &sched).map_err(err)?;
        let (e_ed, e_tl) = (Evaluator::new(&t_ed).map_err(err)?, Evaluator::new(&t_tl).map_err(err)?);
        for _ in 0..1000 {
            let x = sample_point(&mut rng, t.arity());
            let a = e_ed.evaluate(&x).map_err(err)?.accepted;
            ensure(a == eval_formula(&f_ed, &x).map_err(err)?, || format!("eps-delta mismatch on tree {i} at {x:?}"))?;
            let b = e_tl.evaluate(&x).map_err(err)?.accepted;
            ensure(b == eval_formula(&f_tl, &x).map_err(err)?, || format!("t-ell mismatch on tree {i} at {x:?}"))?;
            points += 1;
        }
    }
    Ok(format!("{} trees x 1000 points, 0 mismatches ({} comparisons)", trees.len(), 2 * points))
}

fn height_laws(trees: &[Tree]) -> Outcome {
    let ed = single_level();
    let sched = two_levels();
    let ell = sched.last_index();
    let mut worst_c = 0f64;
    for t in trees {
        let (k, n) = (t.height().map_err(err)?, t.arity());
        let h1 = eps_delta_tree(t, &ed).map_err(err)?.height().map_err(err)?;
        ensure(h1 <= 7 * k + 2 * n + 2, || format!("T_eps,delta height {h1} > 7*{k}+2*{n}+2"))?;
        let h2 = t_ell_tree(t, &sched).map_err(err)?.height().map_err(err)?;
        let cap = 7 * (ell + 1) * k + 2 * n + 2 * (ell + 1) + 2;
        ensure(h2 <= cap, || format!("T_ell height {h2} > {cap}"))?;
        worst_c = worst_c.max(h2 as f64 / ((ell + 1) * k + n) as f64);
    }
    let circle = circle_fiber_example();
    let tm = t_ell_tree(&circle.sigma_tree, &circle.schedule).map_err(err)?;
    let mut fiber = Vec::new();
    for base in [&circle.sigma_tree, &tm] {
        let k = base.height().map_err(err)?;
        for p in 1..=2 {
            let h = fiber_product_tree(base, &circle.spec(p)).map_err(err)?.height().map_err(err)?;
            ensure(h <= (p + 1) * k, || format!("fiber height {h} > (p+1)*{k}"))?;
            // edge count: copies chain end to end, each Yes leaf replaced by the next root
            ensure(h - 1 == (p + 1) * (k - 1), || {
                format!("fiber p={p}: {} edges, expected (p+1)*{} = {}", h - 1, k - 1, (p + 1) * (k - 1))
            })?;
            fiber.push(format!("p={p}:{h}/{k}"));
        }
    }
    Ok(format!(
        "T_ell constant c = height/((l+1)k+n) <= {worst_c:.2}; fiber heights (vertices/base) {} with edge counts exactly (p+1)x",
        fiber.join(" ")
    ))
}

fn betti_of(f: &Dnf, grid: &GridBox) -> Result<Vec<usize>, String> {
    let g = occupancy_grid(f, grid).map_err(err)?;
    let c = build_complex(&g).map_err(err)?;
    Ok(betti_numbers(&c, c.dim()).map_err(err)?.b)
}

fn annulus() -> Outcome {
    let a = annulus_example();
    let f = a.closure().map_err(err)?;
    let coarse = betti_of(&f, &a.suggested_box)?;
    let fine = betti_of(&f, &a.suggested_box.with_resolution(128).map_err(err)?)?;
    ensure(coarse == vec![1, 1, 0], || format!("N=64 gave {coarse:?}"))?;
    ensure(fine == coarse, || format!("N=128 gave {fine:?}"))?;
    Ok(format!("N=64 {coarse:?}, N=128 {fine:?}"))
}

fn parity() -> Outcome {
    let mut out = Vec::new();
    for (m, want) in [(3, 4), (4, 12)] {
        let p = parity_problem(2, m).map_err(err)?;
        let b = betti_of(&p.closure().map_err(err)?, &p.suggested_box)?;
        ensure(b[0] == 1 && b[1] == want, || format!("m={m}: {b:?}, expected b1={want}"))?;
        ensure(want == 2 * (m - 1) * (m - 2), || "growth law".into())?;
        out.push(format!("m={m} N={} b={b:?}", p.suggested_box.resolution()));
    }
    Ok(out.join("; "))
}

fn distinctness() -> Outcome {
    let d = distinctness_tree(3).map_err(err)?;
    let g = occupancy_grid(&d.closure().map_err(err)?, &d.suggested_box).map_err(err)?;
    let comps = component_count(&g);
    let c = build_complex(&g).map_err(err)?;
    let b0 = betti_numbers(&c, 0).map_err(err)?.b[0];
    ensure(comps == 6 && b0 == 6, || format!("components {comps}, b0 {b0}"))?;
    let k = invert_height_bound(&6u32.into(), 3, &int(1)).map_err(err)?;
    let h = d.tree.height().map_err(err)?;
    ensure(k as usize <= h, || format!("inverted bound {k} > height {h}"))?;
    Ok(format!("6 components (b0 agrees); inverted bound k={k} <= height {h}"))
}

fn projection() -> Outcome {
    let c = circle_fiber_example();
    let w0 = betti_of(&c.w_formula(0).map_err(err)?, &c.w_box(0).map_err(err)?)?;
    let w1 = betti_of(&c.w_formula(1).map_err(err)?, &c.w_box(1).map_err(err)?)?;
    let image_box = GridBox::cube(1, -c.radius.clone(), c.radius.clone(), c.resolution).map_err(err)?;
    let y = betti_of(&c.image_dnf, &image_box)?;
    ensure(w0 == vec![1, 1, 0], || format!("W_0 {w0:?}"))?;
    ensure(w1[..2] == [1, 3], || format!("W_1 {w1:?}"))?;
    let table = vec![w0.clone(), w1.clone()];
    let m1 = projection_inequality_check(&table, y.get(1).copied().unwrap_or(0), 1, true).map_err(err)?;
    let m0 = projection_inequality_check(&table, y[0], 0, true).map_err(err)?;
    ensure(m1.holds && m0.holds, || format!("check failed: {m0:?} {m1:?}"))?;
    ensure(m1.slack == 2 && m0.slack == 0, || format!("unexpected slack {} {}", m0.slack, m1.slack))?;
    Ok(format!(
        "W_0 {w0:?}, W_1 {w1:?}, image {y:?}; m=1 slack {}, m=0 slack {}",
        m1.slack, m0.slack
    ))
}

fn image_compatibility() -> Outcome {
    let c = circle_fiber_example();
    let closure = c.closure().map_err(err)?;
    let by_hand = c.image_closure_by_hand().map_err(err)?;
    let ys: Vec<Vec<Rational>> = (0..=1000).map(|j| vec![rat(-2, 1) + rat(4 * j, 1000)]).collect();
    let mut inside = 0;
    for i in 0..=400 {
        let x = vec![rat(-2, 1) + rat(4 * i, 400)];
        let sampled = fiber_search(&closure, &x, &ys).map_err(err)?;
        let direct = eval_formula(&by_hand, &x).map_err(err)?;
        ensure(sampled == direct, || format!("disagreement at x = {}", x[0]))?;
        inside += usize::from(direct);
    }
    Ok(format!("401 base points x 1001 fiber points, all agree ({inside} inside)"))
}

fn counting_laws(trees: &[Tree]) -> Outcome {
    let mut checked = 0;
    for t in trees {
        let k = t.height().map_err(err)? as u32;
        let mults = t.metrics().map_err(err)?.mult_count_max as u32;
        let f = leaf_dnf(t).map_err(err)?.dnf;
        let stats = dnf_stats(&f);
        let three_k = 3usize.pow(k);
        for c in f.conditions() {
            ensure(c.poly.total_degree() <= 1 << mults.min(k), || format!("degree {} > 2^{mults}", c.poly.total_degree()))?;
            checked += 1;
        }
        ensure(stats.disjunct_count <= three_k, || format!("{} disjuncts > 3^{k}", stats.disjunct_count))?;
        ensure(stats.s <= k as usize * three_k, || format!("s = {} > {k}*3^{k}", stats.s))?;
        ensure(stats.max_conds_per_disjunct <= k as usize, || "conditions exceed height".into())?;
    }
    Ok(format!("{checked} leaf conditions, 0 violations"))
}

fn ball(center: &[Rational], r2: Rational) -> BasicSet {
    let n = center.len();
    let p = (0..n).fold(Polynomial::constant(n, -r2), |acc, i| {
        let d = Polynomial::var(n, i).add_constant(&-center[i].clone());
        &acc + &d.square()
    });
    BasicSet::new(n, vec![SignCondition::new(p, Sign::Le)]).unwrap()
}

fn topology_fixtures() -> Outcome {
    let mut report = Vec::new();
    let mut check = |name: &str, g: &OccupancyGrid, want: &[usize]| -> Result<(), String> {
        let c = build_complex(g).map_err(err)?;
        ensure(c.boundary_squared_is_zero(), || format!("{name}: boundary of boundary is nonzero"))?;
        let b = betti_numbers(&c, c.dim()).map_err(err)?.b;
        ensure(b == want, || format!("{name}: {b:?}, expected {want:?}"))?;
        report.push(format!("{name} {b:?}"));
        Ok(())
    };
    let origin = vec![int(0); 3];
    let one_ball = Dnf::new(3, vec![ball(&origin, int(1))]).unwrap();
    check("ball", &occupancy_grid(&one_ball, &GridBox::cube(3, int(-2), int(2), 24).unwrap()).map_err(err)?, &[1, 0, 0, 0])?;
    let two = Dnf::new(
        3,
        vec![ball(&[rat(-3, 2), int(0), int(0)], int(1)), ball(&[rat(3, 2), int(0), int(0)], int(1))],
    )
    .unwrap();
    let wide = GridBox::new(vec![int(-3), int(-2), int(-2)], vec![int(3), int(2), int(2)], 24).unwrap();
    check("two balls", &occupancy_grid(&two, &wide).map_err(err)?, &[2, 0, 0, 0])?;
    let ring_cells: Vec<[usize; 2]> = (0..9).map(|l| [l / 3, l % 3]).filter(|&c| c != [1, 1]).collect();
    let ring = OccupancyGrid::from_cells(
        GridBox::cube(2, int(0), int(3), 3).unwrap(),
        ring_cells.iter().map(|c| &c[..]),
    )
    .map_err(err)?;
    check("hollow ring", &ring, &[1, 1, 0])?;
    let r2 = Polynomial::var(3, 0).square();
    let r2 = &r2 + &Polynomial::var(3, 1).square();
    let tube = Dnf::new(
        3,
        vec![BasicSet::new(
            3,
            vec![
                SignCondition::new(r2.add_constant(&int(-1)).square().add_constant(&rat(-1, 25)), Sign::Le),
                SignCondition::new(Polynomial::var(3, 2).square().add_constant(&rat(-1, 25)), Sign::Le),
            ],
        )
        .unwrap()],
    )
    .unwrap();
    check(
        "solid torus",
        &occupancy_grid(&tube, &GridBox::cube(3, rat(-3, 2), rat(3, 2), 48).unwrap()).map_err(err)?,
        &[1, 1, 0, 0],
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..50 {
        let n = 2 + i % 2;
        let res = if n == 2 { 12 } else { 6 };
        let grid = GridBox::cube(n, int(0), int(1), res).unwrap();
        let mut g = OccupancyGrid::empty(grid).map_err(err)?;
        let density = rng.gen_range(0.2..0.7);
        let mut idx = vec![0; n];
        for lin in 0..res.pow(n as u32) {
            let mut rest = lin;
            for a in (0..n).rev() {
                idx[a] = rest % res;
                rest /= res;
            }
            g.set(&idx, rng.gen_bool(density)).map_err(err)?;
        }
        let c = build_complex(&g).map_err(err)?;
        ensure(c.boundary_squared_is_zero(), || format!("random grid {i}: boundary of boundary"))?;
        let b0 = betti_numbers(&c, 0).map_err(err)?.b[0];
        ensure(b0 == component_count(&g), || format!("random grid {i}: b0 {b0} vs union-find {}", component_count(&g)))?;
    }
    Ok(format!("{}; 50 random grids b0 == union-find", report.join(", ")))
}

fn crossing() -> Outcome {
    let trefoil = crossing_number_example();
    let doubles = trefoil.double_points();
    ensure(doubles.len() == 3, || format!("{} double points", doubles.len()))?;
    let r = trefoil.report().map_err(err)?;
    ensure(r.complement_components == 4 && r.crossing_number == 3, || format!("{r:?}"))?;
    ensure(r.image_betti.b == vec![1, 3], || format!("image Betti {:?}", r.image_betti.b))?;
    let s = segment_crossing_example().report().map_err(err)?;
    ensure(s.crossing_number == 0 && s.complement_components == 1, || format!("{s:?}"))?;
    Ok(format!(
        "trefoil N={}: {} complement components, C={}, shadow Betti {:?}, 3 double points; segment C=0",
        r.resolution, r.complement_components, r.crossing_number, r.image_betti.b
    ))
}

fn main() -> ExitCode {
    let trees = corpus();
    let criteria: Vec<Criterion<'_>> = vec![
        ("transform semantics", Box::new(|| transform_semantics(&trees))),
        ("height laws", Box::new(|| height_laws(&trees))),
        ("annulus compactification", Box::new(annulus)),
        ("parity application", Box::new(parity)),
        ("distinctness", Box::new(distinctness)),
        ("projection inequality", Box::new(projection)),
        ("projection of compactification", Box::new(image_compatibility)),
        ("counting laws", Box::new(|| counting_laws(&trees))),
        ("topology fixtures", Box::new(topology_fixtures)),
        ("crossing example", Box::new(crossing)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
