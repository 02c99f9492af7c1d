//! Isometries with a prescribed fixed set: orbit diameters, the migration
//! map, a finite check of property (*), and one level of the orbit-amalgam
//! construction.

use thiserror::Error;

use crate::amalgam::{multi_amalgamate, orbit_amalgam, AmalgamError};
use crate::katetov::{check_partial, enumerate_katetov, KatetovError};
use crate::ratmetric::{FiniteMetricSpace, MetricError, PartialIsometry, Permutation, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedPointError {
    #[error("NotAnIsometry")]
    NotAnIsometry,
    #[error("BaseNotFixed {0}")]
    BaseNotFixed(usize),
    #[error("HypothesisViolated {0}")]
    HypothesisViolated(String),
    #[error("NotFixed {0}")]
    NotFixed(usize),
    #[error("EmptyBase")]
    EmptyBase,
    #[error("PropertyStarFails {0}")]
    PropertyStarFails(Rational),
    #[error("BudgetExceeded {points} {limit}")]
    BudgetExceeded { points: usize, limit: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
}

/// A space, a permutation of its points, and a base subset `X_0` fixed by it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometrySystem {
    pub space: FiniteMetricSpace,
    pub phi: Permutation,
    pub base: Vec<usize>,
}

impl IsometrySystem {
    /// Checks that `phi` preserves distances and fixes every base point.
    pub fn new(
        space: FiniteMetricSpace,
        phi: Permutation,
        base: Vec<usize>,
    ) -> Result<Self, FixedPointError> {
        if phi.len() != space.n() || !phi.is_isometry_of(&space) {
            return Err(FixedPointError::NotAnIsometry);
        }
        if let Some(&b) = base.iter().find(|&&b| b >= space.n()) {
            return Err(MetricError::IndexOutOfRange(b).into());
        }
        if let Some(&b) = base.iter().find(|&&b| phi.apply(b) != b) {
            return Err(FixedPointError::BaseNotFixed(b));
        }
        Ok(IsometrySystem { space, phi, base })
    }

    /// Identity on `space`, with every point in the base.
    pub fn trivial(space: FiniteMetricSpace) -> Self {
        let n = space.n();
        IsometrySystem {
            space,
            phi: Permutation::identity(n),
            base: (0..n).collect(),
        }
    }

    pub fn dist_to_base(&self, x: usize) -> Option<Rational> {
        self.base.iter().map(|&b| self.space.d(x, b)).min()
    }
}

/// Diameter of the `phi`-orbit of `x`.
pub fn orbit_diameter(sys: &IsometrySystem, x: usize) -> Rational {
    let orb = sys.phi.orbit(x);
    let mut diam = Rational::ZERO;
    for (a, &u) in orb.iter().enumerate() {
        for &v in &orb[..a] {
            diam = diam.max(sys.space.d(u, v));
        }
    }
    diam
}

pub fn fixed_set(sys: &IsometrySystem) -> Vec<usize> {
    sys.phi.fixed_points()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `d(z, x_i) < f(x_i) - rho/2`
    A,
    /// `d(z, x_i) > f(x_i) + rho/2`
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Migration {
    pub rho: Rational,
    /// The orbit of `z`, then the `x_i`.
    pub domain: Vec<usize>,
    pub values: Vec<Rational>,
    pub parts: Vec<Part>,
}

/// The map `g` on `orbit(z) ∪ {x_i}`: `rho/2` on the orbit, and on `x_i`
/// either `d(z,x_i) ± rho/2` (parts A and B) or `f(x_i)` (part C).
pub fn migration_map(
    sys: &IsometrySystem,
    z: usize,
    points: &[usize],
    f: &[Rational],
) -> Result<Migration, FixedPointError> {
    if z >= sys.space.n() {
        return Err(MetricError::IndexOutOfRange(z).into());
    }
    check_partial(&sys.space, points, f)?;
    if let Some(&x) = points.iter().find(|&&x| sys.phi.apply(x) != x) {
        return Err(FixedPointError::NotFixed(x));
    }
    let rho = orbit_diameter(sys, z);
    if rho.is_zero() {
        return Err(FixedPointError::HypothesisViolated(
            "orbit diameter is 0".into(),
        ));
    }
    if let Some(&m) = f.iter().min() {
        if m < rho + rho {
            return Err(FixedPointError::HypothesisViolated(format!(
                "min f {m} below 2 rho {}",
                rho + rho
            )));
        }
    }
    let h = rho.half();
    let mut domain = sys.phi.orbit(z);
    let mut values = vec![h; domain.len()];
    let mut parts = Vec::with_capacity(points.len());
    for (&x, &fx) in points.iter().zip(f) {
        let d = sys.space.d(z, x);
        let (part, v) = if d < fx - h {
            (Part::A, d + h)
        } else if d > fx + h {
            (Part::B, d - h)
        } else {
            (Part::C, fx)
        };
        domain.push(x);
        values.push(v);
        parts.push(part);
    }
    Ok(Migration {
        rho,
        domain,
        values,
        parts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarReport {
    /// Unordered pairs examined.
    pub checked: usize,
    /// Smallest `d(u, v) - d(u,X0) - d(v,X0)`; `None` if nothing was
    /// examined.
    pub worst_slack: Option<Rational>,
    /// `(u, v, q)` attaining the worst slack: `v = phi^q(u)` when the two
    /// share a cycle, `q = 0` when they do not.
    pub worst: Option<(usize, usize, i64)>,
    pub passed: bool,
}

/// Finite surrogate of property (*). On an infinite orbit only large
/// displacements matter, so displacement is measured along cycles: two
/// points of one cycle at cyclic offset `q` in `(-len/2, len/2]` are
/// compared when `|q| > excluded`; points of different cycles are always
/// compared, since every relative position recurs. Passes when every slack
/// is at least `-eps`.
pub fn property_star_check(
    sys: &IsometrySystem,
    excluded: u64,
    eps: Rational,
) -> Result<StarReport, FixedPointError> {
    if sys.base.is_empty() {
        return Err(FixedPointError::EmptyBase);
    }
    let n = sys.space.n();
    let dx0: Vec<Rational> = (0..n).map(|x| sys.dist_to_base(x).unwrap()).collect();
    // cycle id and position of every point
    let mut cycle = vec![0; n];
    let mut pos = vec![0i64; n];
    let mut len = Vec::new();
    for (c, cyc) in sys.phi.cycles().iter().enumerate() {
        for (k, &x) in cyc.iter().enumerate() {
            cycle[x] = c;
            pos[x] = k as i64;
        }
        len.push(cyc.len() as i64);
    }
    let mut report = StarReport {
        checked: 0,
        worst_slack: None,
        worst: None,
        passed: true,
    };
    for u in 0..n {
        for v in u + 1..n {
            let q = if cycle[u] == cycle[v] {
                let l = len[cycle[u]];
                let mut q = (pos[v] - pos[u]).rem_euclid(l);
                if q > l / 2 {
                    q -= l;
                }
                if q.unsigned_abs() <= excluded {
                    continue;
                }
                q
            } else {
                0
            };
            let slack = sys.space.d(u, v) - dx0[u] - dx0[v];
            report.checked += 1;
            if report.worst_slack.is_none_or(|w| slack < w) {
                report.worst_slack = Some(slack);
                report.worst = Some((u, v, q));
            }
        }
    }
    if let Some(w) = report.worst_slack {
        report.passed = w >= -eps;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct FixedSetLevel {
    /// The amalgam with the wrapped shift. `phi` is an isometry exactly when
    /// `wrap_defect` is zero.
    pub system: IsometrySystem,
    pub maps: usize,
    /// Largest distance error introduced by sending `y_N` to `y_{-N}`.
    pub wrap_defect: Rational,
    /// Slack at which property (*) holds for the new system.
    pub star_slack: Rational,
    pub star: StarReport,
}

/// Adds, for every grid map `f`, the orbit `y_{-N..N}` of its one-point
/// extension, amalgamated freely over the current space. The new
/// permutation shifts each orbit and wraps `y_N` to `y_{-N}`.
pub fn fixed_set_level(
    sys: &IsometrySystem,
    grid: &[Rational],
    max_support: usize,
    horizon: usize,
    excluded: u64,
    budget: usize,
) -> Result<FixedSetLevel, FixedPointError> {
    let pre = property_star_check(sys, excluded, Rational::ZERO)?;
    if !pre.passed {
        return Err(FixedPointError::PropertyStarFails(
            pre.worst_slack.unwrap_or(Rational::ZERO),
        ));
    }
    let n = sys.space.n();
    let maps = enumerate_katetov(&sys.space, grid, max_support);
    let mut extensions = Vec::with_capacity(maps.len());
    let mut total = n;
    for f in &maps {
        let o = orbit_amalgam(&sys.space, &sys.phi, f, horizon)?;
        total += o.space.n() - n;
        if total > budget {
            return Err(FixedPointError::BudgetExceeded {
                points: total,
                limit: budget,
            });
        }
        extensions.push(o);
    }
    let spaces: Vec<FiniteMetricSpace> = extensions.iter().map(|o| o.space.clone()).collect();
    let space = if spaces.is_empty() {
        sys.space.clone()
    } else {
        multi_amalgamate(&sys.space, &spaces)?
    };

    let mut images: Vec<usize> = sys.phi.images().to_vec();
    images.resize(space.n(), usize::MAX);
    let mut offset = n;
    for o in &extensions {
        let fresh = o.space.n() - n;
        // y_i sits at offset + (o.y_index(i) - n) when it was not identified
        let ys: Vec<usize> =
            o.y.iter()
                .filter(|&&y| y >= n)
                .map(|&y| offset + y - n)
                .collect();
        for (k, &y) in ys.iter().enumerate() {
            images[y] = ys[(k + 1) % ys.len()];
        }
        offset += fresh;
    }
    let phi = Permutation::new(images)?;
    let wrap_defect = phi.isometry_defect(&space);
    let system = IsometrySystem {
        space,
        phi,
        base: sys.base.clone(),
    };
    let probe = property_star_check(&system, excluded, Rational::ZERO)?;
    let star_slack = probe
        .worst_slack
        .map_or(Rational::ZERO, |w| (-w).max(Rational::ZERO));
    let star = property_star_check(&system, excluded, star_slack)?;
    Ok(FixedSetLevel {
        system,
        maps: maps.len(),
        wrap_defect,
        star_slack,
        star,
    })
}

/// An isometry `psi: a -> b` with `psi ∘ phi_a = phi_b ∘ psi`, if any.
/// Orbits are matched whole, in ascending order of their least point.
pub fn find_intertwiner(a: &IsometrySystem, b: &IsometrySystem) -> Option<PartialIsometry> {
    let n = a.space.n();
    if n != b.space.n() {
        return None;
    }
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if intertwine(a, b, &mut assign, &mut used) {
        Some(PartialIsometry::new(
            assign.into_iter().enumerate().collect(),
        ))
    } else {
        None
    }
}

fn intertwine(
    a: &IsometrySystem,
    b: &IsometrySystem,
    assign: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(u) = assign.iter().position(|&v| v == usize::MAX) else {
        return true;
    };
    let orb_u = a.phi.orbit(u);
    for v in 0..b.space.n() {
        if used[v] {
            continue;
        }
        let orb_v = b.phi.orbit(v);
        if orb_v.len() != orb_u.len() {
            continue;
        }
        let ok = orb_u.iter().zip(&orb_v).all(|(&u2, &v2)| {
            !used[v2]
                && (0..a.space.n())
                    .filter(|&w| assign[w] != usize::MAX)
                    .all(|w| a.space.d(u2, w) == b.space.d(v2, assign[w]))
        }) && orb_u.iter().enumerate().all(|(i, &u2)| {
            orb_u[..i]
                .iter()
                .zip(&orb_v[..i])
                .all(|(&u3, &v3)| a.space.d(u2, u3) == b.space.d(orb_v[i], v3))
        });
        if !ok {
            continue;
        }
        for (&u2, &v2) in orb_u.iter().zip(&orb_v) {
            assign[u2] = v2;
            used[v2] = true;
        }
        if intertwine(a, b, assign, used) {
            return true;
        }
        for (&u2, &v2) in orb_u.iter().zip(&orb_v) {
            assign[u2] = usize::MAX;
            used[v2] = false;
        }
    }
    false
}
