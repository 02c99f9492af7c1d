//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line with its
//! measured numbers and wall time; the process fails if any criterion does.
//! All comparisons are exact (tolerance 0) unless a line says otherwise.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use urysohn::amalgam::double_with_swap;
use urysohn::builder::{build_tower, injectivity_audit, TowerApprox, TowerConfig};
use urysohn::fixedpoint::{
    fixed_set, fixed_set_level, migration_map, property_star_check, IsometrySystem,
};
use urysohn::homogeneity::{nice_violation, separate_equal_traces};
use urysohn::katetov::{
    check_partial, feasible_interval, katetov_check, katetov_extend, kuratowski, sup_distance,
    Bound,
};
use urysohn::ratmetric::{
    find_embedding, find_isometry, graph_to_metric, FiniteMetricSpace, Permutation, Rational,
    SimpleGraph,
};
use urysohn::tentacular::{
    euclid_spread, example1_convergence, fa_family, nat_line, nonempty_subsets,
};

use common::{q, random_partial, random_space, random_subset, random_total, rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn int(v: i64) -> Rational {
    Rational::integer(v)
}

fn space(m: &[&[Rational]]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_matrix(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn forced_value() -> Outcome {
    // points x0, x1, x
    let s = space(&[
        &[int(0), int(1), q(1, 2)],
        &[int(1), int(0), q(1, 2)],
        &[q(1, 2), q(1, 2), int(0)],
    ]);
    let iv = feasible_interval(&s, &[0, 1], &[int(1), int(2)], 2).unwrap();
    let pass = iv.lower == q(3, 2) && iv.upper == Bound::Finite(q(3, 2)) && iv.is_forced();
    outcome(pass, format!("interval [{}, {}]", iv.lower, iv.upper))
}

fn fundamental_identity() -> Outcome {
    let mut r = rng(2);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = r.gen_range(1..=6);
        let s = random_space(&mut r, n);
        let f = katetov_check(&s, random_total(&mut r, &s)).unwrap();
        let x = r.gen_range(0..n);
        if sup_distance(&f, &kuratowski(&s, x)).unwrap() != f.value(x) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 maps, {bad} mismatches"))
}

/// Every metric on `n` points with distances in `{1,2,3}`.
fn small_spaces(n: usize) -> Vec<FiniteMetricSpace> {
    let pairs = n * n.saturating_sub(1) / 2;
    let mut out = Vec::new();
    for code in 0..3usize.pow(pairs as u32) {
        let mut c = code;
        let mut lower = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            lower.push(int((c % 3) as i64 + 1));
            c /= 3;
        }
        let mut k = 0;
        let mut m = vec![vec![int(0); n]; n];
        for i in 1..n {
            for j in 0..i {
                m[i][j] = lower[k];
                m[j][i] = lower[k];
                k += 1;
            }
        }
        if let Ok(s) = FiniteMetricSpace::from_matrix(&m) {
            out.push(s);
        }
    }
    out
}

/// Total grid maps extending `(points, values)` that satisfy both Katetov
/// inequalities, checked pair by pair.
fn grid_completions(
    s: &FiniteMetricSpace,
    points: &[usize],
    values: &[Rational],
    grid: &[Rational],
) -> Vec<Vec<Rational>> {
    let n = s.n();
    let free: Vec<usize> = s.points().filter(|x| !points.contains(x)).collect();
    let mut out = Vec::new();
    for code in 0..grid.len().pow(free.len() as u32) {
        let mut g = vec![int(0); n];
        for (&p, &v) in points.iter().zip(values) {
            g[p] = v;
        }
        let mut c = code;
        for &x in &free {
            g[x] = grid[c % grid.len()];
            c /= grid.len();
        }
        let ok = (0..n).all(|a| {
            (0..a).all(|b| {
                let d = s.d(a, b);
                g[a].abs_diff(g[b]) <= d && d <= g[a] + g[b]
            })
        });
        if ok {
            out.push(g);
        }
    }
    out
}

fn extension_domination() -> Outcome {
    let grid = [int(1), int(2), int(3)];
    let (mut cases, mut compared, mut bad) = (0usize, 0usize, 0usize);
    for n in 1..=4 {
        for s in small_spaces(n) {
            for mask in 1u32..(1 << n) {
                let points: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).collect();
                for code in 0..3usize.pow(points.len() as u32) {
                    let mut c = code;
                    let values: Vec<Rational> = points
                        .iter()
                        .map(|_| {
                            let v = grid[c % 3];
                            c /= 3;
                            v
                        })
                        .collect();
                    if check_partial(&s, &points, &values).is_err() {
                        continue;
                    }
                    cases += 1;
                    let ext = katetov_extend(&s, &points, &values).unwrap();
                    let comps = grid_completions(&s, &points, &values, &grid);
                    for x in s.points() {
                        if !grid.contains(&ext.value(x)) {
                            continue;
                        }
                        compared += 1;
                        let best = comps.iter().map(|g| g[x]).max();
                        if best != Some(ext.value(x)) {
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad == 0 && cases > 0,
        format!("{cases} partial maps, {compared} points compared, {bad} mismatches"),
    )
}

fn universality_tower() -> TowerApprox {
    let cfg = TowerConfig {
        grid: (1..=6).map(|k| q(k, 2)).collect(),
        max_support: 3,
        depth: TOWER_DEPTH,
        max_points: 5000,
    };
    build_tower(&FiniteMetricSpace::single_point(), &cfg).unwrap()
}

fn universality(t: &TowerApprox) -> Outcome {
    // all spaces with at most 3 points and distances in {1,2}, one per class
    let classes: Vec<FiniteMetricSpace> = vec![
        FiniteMetricSpace::single_point(),
        space(&[&[int(0), int(1)], &[int(1), int(0)]]),
        space(&[&[int(0), int(2)], &[int(2), int(0)]]),
        FiniteMetricSpace::from_fn(3, |_, _| int(1)).unwrap(),
        FiniteMetricSpace::from_fn(3, |i, j| if (i, j) == (2, 0) { int(2) } else { int(1) })
            .unwrap(),
        FiniteMetricSpace::from_fn(3, |i, j| if (i, j) == (1, 0) { int(1) } else { int(2) })
            .unwrap(),
        FiniteMetricSpace::from_fn(3, |_, _| int(2)).unwrap(),
    ];
    let found = classes
        .iter()
        .filter(|c| find_embedding(c, &t.space).is_ok())
        .count();
    outcome(
        found == classes.len(),
        format!(
            "{found}/{} classes embedded, tower {} points, levels {:?}, truncated {}",
            classes.len(),
            t.space.n(),
            t.level_ends,
            t.truncated
        ),
    )
}

const TOWER_DEPTH: usize = 3;

fn audit(t: &TowerApprox) -> Outcome {
    let grid: Vec<Rational> = (1..=6).map(|k| q(k, 2)).collect();
    let witnesses = t.check_witnesses().is_ok();
    let level = TOWER_DEPTH - 1;
    let pool = t.level_ends[level];
    // Support-1 assignments are part of the k = 2 audit, so failures among
    // them bound its failure count from below at a fraction of the cost.
    let single = injectivity_audit(&t.space, pool, &grid, 1, Rational::ZERO);
    let (checked, failures, bound) = if single.is_clean() {
        let r = injectivity_audit(&t.space, pool, &grid, 2, Rational::ZERO);
        (r.checked, r.failures.len(), "")
    } else {
        (single.checked, single.failures.len(), "at least ")
    };
    let low = injectivity_audit(&t.space, t.level_ends[level - 1], &grid, 2, Rational::ZERO);
    outcome(
        failures == 0 && witnesses,
        format!(
            "level {level} ({pool} points): {bound}{failures} failures ({checked} assignments checked), \
             level {} truncated {}; level {} audit: {} assignments, {} failures; witnesses {}",
            TOWER_DEPTH,
            t.truncated,
            level - 1,
            low.checked,
            low.failures.len(),
            if witnesses { "exact" } else { "wrong" }
        ),
    )
}

/// A base space fixed pointwise plus one cycle `y_0..y_{m-1}` at constant
/// distance profile `h` from the base and cycle-graph distances `t·k`.
fn cycle_system(r: &mut impl Rng) -> IsometrySystem {
    let b = r.gen_range(1..=4);
    let base = random_space(r, b);
    let h = random_total(r, &base);
    let shift = *[int(2), int(3)].choose(r).unwrap();
    let h: Vec<Rational> = h.into_iter().map(|v| v + shift).collect();
    let m = r.gen_range(2..=6);
    let hmin = h.iter().copied().min().unwrap();
    let max_hops = int((m / 2) as i64);
    let steps: Vec<Rational> = [q(1, 4), q(1, 2), int(1)]
        .into_iter()
        .filter(|&t| t * max_hops <= hmin + hmin)
        .collect();
    let t = *steps.choose(r).unwrap();
    let n = b + m;
    let s = FiniteMetricSpace::from_fn(n, |i, j| match (i < b, j < b) {
        (true, true) => base.d(i, j),
        (false, true) => h[j],
        (false, false) => {
            let k = (i - j).min(m - (i - j));
            t * int(k as i64)
        }
        (true, false) => unreachable!(),
    })
    .unwrap();
    let images: Vec<usize> = (0..n)
        .map(|i| if i < b { i } else { b + (i - b + 1) % m })
        .collect();
    IsometrySystem::new(s, Permutation::new(images).unwrap(), (0..b).collect()).unwrap()
}

/// Two copies of a random space glued along a subset, with the swap.
fn doubled_system(r: &mut impl Rng) -> IsometrySystem {
    let n = r.gen_range(2..=5);
    let s = random_space(r, n);
    let k = r.gen_range(1..n);
    let glued = random_subset(r, n, k);
    let d = double_with_swap(&s, &glued).unwrap();
    IsometrySystem::new(d.space, d.swap, glued).unwrap()
}

fn migration() -> Outcome {
    let mut r = rng(6);
    let (mut ok, mut total) = (0, 0);
    let mut failure = String::new();
    while total < 1000 {
        let sys = if total % 2 == 0 {
            cycle_system(&mut r)
        } else {
            doubled_system(&mut r)
        };
        let moving: Vec<usize> = sys
            .space
            .points()
            .filter(|&z| sys.phi.apply(z) != z)
            .collect();
        let z = *moving.choose(&mut r).unwrap();
        let k = r.gen_range(1..=sys.base.len());
        let mut points = sys.base.clone();
        points.shuffle(&mut r);
        points.truncate(k);
        let rho = urysohn::fixedpoint::orbit_diameter(&sys, z);
        let lift = rho + rho + q(r.gen_range(0..=4), 2);
        let f: Vec<Rational> = random_partial(&mut r, &sys.space, &points)
            .into_iter()
            .map(|v| v + lift)
            .collect();
        total += 1;
        match migration_map(&sys, z, &points, &f) {
            Ok(m) => match check_partial(&sys.space, &m.domain, &m.values) {
                Ok(()) => ok += 1,
                Err(e) => failure = format!(", first failure {e}"),
            },
            Err(e) => failure = format!(", first failure {e}"),
        }
    }
    outcome(
        ok == total,
        format!("{ok}/{total} migration maps are Katetov{failure}"),
    )
}

fn spread_separation() -> Outcome {
    let s = euclid_spread(6).unwrap();
    let subsets = nonempty_subsets(6);
    let fam = fa_family(&s, &subsets).unwrap();
    let mut min = None::<Rational>;
    for a in 0..fam.len() {
        for b in a + 1..fam.len() {
            let d = sup_distance(&fam[a], &fam[b]).unwrap();
            min = Some(min.map_or(d, |m| m.min(d)));
        }
    }
    let min = min.unwrap();
    outcome(
        min >= int(1),
        format!("{} maps, min pairwise sup-distance {min}", fam.len()),
    )
}

fn convergence() -> Outcome {
    let mut r = rng(8);
    let line = nat_line(200);
    let mut bad = 0;
    for _ in 0..100 {
        let order: Vec<usize> = (0..200).collect();
        let f = katetov_check(&line, random_partial(&mut r, &line, &order)).unwrap();
        let seq = example1_convergence(&line, &f).unwrap();
        let monotone = seq.windows(2).all(|w| w[1] <= w[0]);
        if !monotone || *seq.last().unwrap() != Rational::ZERO {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("100 maps on 200 points, {bad} bad sequences"),
    )
}

fn edge_mask(n: usize, edges: &[(usize, usize)], perm: &[usize]) -> u32 {
    let mut m = 0;
    for &(a, b) in edges {
        let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
        m |= 1 << (y * (y - 1) / 2 + x);
    }
    let _ = n;
    m
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn mask_edges(n: usize, mask: u32) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for y in 1..n {
        for x in 0..y {
            if mask >> (y * (y - 1) / 2 + x) & 1 == 1 {
                e.push((x, y));
            }
        }
    }
    e
}

fn graph_oracle() -> Outcome {
    let mut r = rng(9);
    let (mut agree, mut total) = (0usize, 0usize);
    let mut classes_total = 0;
    for n in 1..=6 {
        let perms = permutations(n);
        let pairs = n * n.saturating_sub(1) / 2;
        // canonical form = least edge mask over all relabelings
        let mut reps: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for mask in 0u32..(1 << pairs) {
            let edges = mask_edges(n, mask);
            let g = SimpleGraph::new(n, &edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            let canon = perms.iter().map(|p| edge_mask(n, &edges, p)).min().unwrap();
            reps.entry(canon).or_insert(edges);
        }
        let mut reps: Vec<(u32, Vec<(usize, usize)>)> = reps.into_iter().collect();
        reps.sort();
        classes_total += reps.len();
        let metrics: Vec<FiniteMetricSpace> = reps
            .iter()
            .map(|(_, e)| graph_to_metric(&SimpleGraph::new(n, e).unwrap()).unwrap())
            .collect();
        for a in 0..reps.len() {
            for b in 0..reps.len() {
                total += 1;
                let brute = reps[a].0 == reps[b].0;
                if find_isometry(&metrics[a], &metrics[b]).is_ok() == brute {
                    agree += 1;
                }
            }
            // a relabeled copy must be found, and the map must carry edges to edges
            let p = perms.choose(&mut r).unwrap();
            let moved: Vec<(usize, usize)> = reps[a].1.iter().map(|&(x, y)| (p[x], p[y])).collect();
            let g2 = SimpleGraph::new(n, &moved).unwrap();
            let m2 = graph_to_metric(&g2).unwrap();
            total += 1;
            if let Ok(iso) = find_isometry(&metrics[a], &m2) {
                let map: Vec<usize> = iso.pairs().iter().map(|p| p.1).collect();
                let g1 = SimpleGraph::new(n, &reps[a].1).unwrap();
                let edges_ok = (0..n).all(|x| {
                    (0..n).all(|y| x == y || g1.has_edge(x, y) == g2.has_edge(map[x], map[y]))
                });
                if edges_ok {
                    agree += 1;
                }
            }
        }
    }
    outcome(
        agree == total,
        format!("{classes_total} connected classes, {agree}/{total} decisions agree"),
    )
}

fn fixed_set_construction() -> Outcome {
    let base = space(&[
        &[int(0), int(1), int(2)],
        &[int(1), int(0), int(1)],
        &[int(2), int(1), int(0)],
    ]);
    let sys = IsometrySystem::trivial(base);
    let lvl = match fixed_set_level(&sys, &[int(1), int(2)], 2, 2, 1, 5000) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let next = &lvl.system;
    let total = next.phi.is_isometry_of(&next.space);
    let fix = fixed_set(next);
    let recheck = property_star_check(next, 1, lvl.star_slack).unwrap();
    outcome(
        total && fix == vec![0, 1, 2] && lvl.star.passed && recheck.passed,
        format!(
            "{} points from {} maps, isometry {total}, fixed {:?}, wrap defect {}, star slack {}",
            next.space.n(),
            lvl.maps,
            fix,
            lvl.wrap_defect,
            lvl.star_slack
        ),
    )
}

fn uniqueness_sets() -> Outcome {
    let mut r = rng(11);
    let (mut ok, mut pairs) = (0usize, 0usize);
    let mut failure = String::new();
    let mut configs = 0;
    while configs < 100 {
        let n = r.gen_range(2..=5);
        let s = random_space(&mut r, n);
        let k = r.gen_range(1..n);
        let points = random_subset(&mut r, n, k);
        let sub = s.induced(&points);
        // a nice map on the x_i: both inequalities strict
        let f = (0..1000).find_map(|_| {
            let f: Vec<Rational> = points.iter().map(|_| q(r.gen_range(1..=16), 4)).collect();
            nice_violation(&sub, &f).is_none().then_some(f)
        });
        let Some(f) = f else { continue };
        configs += 1;
        let ambient = double_with_swap(&s, &points).unwrap().space;
        let rep = match separate_equal_traces(&ambient, &points, &f) {
            Ok(rep) => rep,
            Err(e) => {
                failure = format!(", first failure {e}");
                continue;
            }
        };
        let mut good = rep.space.check_metric().is_ok() && rep.separated_all;
        for &(x, y, z) in &rep.separators {
            pairs += 1;
            good &= rep.space.d(z, x) != rep.space.d(z, y);
        }
        if good && !rep.separators.is_empty() {
            ok += 1;
        } else if failure.is_empty() {
            failure = format!(", first failure in configuration {configs}");
        }
    }
    outcome(
        ok == 100,
        format!("{ok}/100 configurations separated, {pairs} equal-trace pairs{failure}"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |k: usize, name: &str, budget: Duration, run: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = run();
        let dt = t0.elapsed();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let slow = if dt > budget {
            format!(" (over the {budget:?} budget)")
        } else {
            String::new()
        };
        println!(
            "{status} criterion {k:>2} {name}: {} [{dt:.2?}]{slow}",
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    };
    report(
        1,
        "forced value",
        Duration::from_millis(1),
        &mut forced_value,
    );
    report(
        2,
        "fundamental identity",
        Duration::from_secs(5),
        &mut fundamental_identity,
    );
    report(
        3,
        "extension domination",
        Duration::from_secs(60),
        &mut extension_domination,
    );
    let t0 = Instant::now();
    let tower = universality_tower();
    println!("     tower built in {:.2?}", t0.elapsed());
    report(
        4,
        "desk-scale universality",
        Duration::from_secs(300),
        &mut || universality(&tower),
    );
    report(
        5,
        "audit by construction",
        Duration::from_secs(300),
        &mut || audit(&tower),
    );
    report(
        6,
        "migration maps",
        Duration::from_secs(10),
        &mut migration,
    );
    report(
        7,
        "spread separation",
        Duration::from_secs(5),
        &mut spread_separation,
    );
    report(
        8,
        "initial-segment convergence",
        Duration::from_secs(10),
        &mut convergence,
    );
    report(
        9,
        "graph reduction oracle",
        Duration::from_secs(120),
        &mut graph_oracle,
    );
    report(
        10,
        "fixed-set construction",
        Duration::from_secs(30),
        &mut fixed_set_construction,
    );
    report(
        11,
        "uniqueness sets",
        Duration::from_secs(60),
        &mut uniqueness_sets,
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
