//! Finite metric measure spaces and a brute-force recurrence oracle for
//! measure-preserving isometries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

pub const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<f64>>,
    measure: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Checks symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality, all to [`METRIC_TOL`].
    #[allow(clippy::needless_range_loop)]
    pub fn new(points: Vec<String>, dist: Vec<Vec<f64>>, measure: Vec<f64>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(Error::Empty);
        }
        if dist.len() != m || dist.iter().any(|row| row.len() != m) {
            return Err(Error::NotMetric(format!("distance matrix must be {m} x {m}")));
        }
        if measure.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: measure.len() });
        }
        if let Some(w) = measure.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NotMetric(format!("measure weights must be positive, got {w}")));
        }
        for i in 0..m {
            if dist[i][i].abs() > METRIC_TOL {
                return Err(Error::NotMetric(format!("d({i},{i}) = {}", dist[i][i])));
            }
            for j in 0..m {
                let d = dist[i][j];
                if !d.is_finite() || d < -METRIC_TOL {
                    return Err(Error::NotMetric(format!("d({i},{j}) = {d}")));
                }
                if i != j && d <= METRIC_TOL {
                    return Err(Error::NotMetric(format!("distinct points {i} and {j} at distance {d}")));
                }
                if (d - dist[j][i]).abs() > METRIC_TOL {
                    return Err(Error::NotMetric(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if dist[i][k] > dist[i][j] + dist[j][k] + METRIC_TOL {
                        return Err(Error::NotMetric(format!("triangle inequality fails at ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(Self { points, dist, measure })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Measure of the open ball `{x : d(p, x) < r}`.
    pub fn open_ball_measure(&self, p: usize, r: f64) -> f64 {
        (0..self.len()).filter(|&x| self.dist[p][x] < r).map(|x| self.measure[x]).sum()
    }

    /// Replaces the measure by one constant on the orbits of `perm`, drawn from
    /// `rng`; such a measure is preserved by `perm`.
    pub fn with_orbit_measure(mut self, perm: &[usize], rng: &mut impl Rng) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let mut seen = vec![false; self.len()];
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let w: f64 = rng.random_range(0.1..2.0);
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                self.measure[x] = w;
                x = perm[x];
            }
        }
        Ok(self)
    }
}

pub fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    if perm.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: perm.len() });
    }
    let mut hit = vec![false; m];
    for &x in perm {
        if x >= m || hit[x] {
            return Err(Error::BadParameter("map is not a permutation".into()));
        }
        hit[x] = true;
    }
    Ok(())
}

/// Fails on the first pair whose distance `perm` changes.
pub fn check_isometry(space: &FiniteMetricSpace, perm: &[usize]) -> Result<()> {
    check_permutation(perm, space.len())?;
    for x in 0..space.len() {
        for y in 0..space.len() {
            if (space.dist(perm[x], perm[y]) - space.dist(x, y)).abs() > METRIC_TOL {
                return Err(Error::NotIsometry { x, y });
            }
        }
    }
    Ok(())
}

pub fn check_measure_preserving(space: &FiniteMetricSpace, perm: &[usize]) -> Result<()> {
    check_permutation(perm, space.len())?;
    let w = space.measure();
    match (0..space.len()).find(|&x| (w[perm[x]] - w[x]).abs() > METRIC_TOL * w[x].max(1.0)) {
        Some(x) => Err(Error::NotMeasurePreserving(x)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Smallest `k ≥ 1` with `d(p, T^k p) ≤ r`.
    pub n_r: usize,
    /// `μ(M)/μ(B_{r/2}(p))`, `+inf` (`null`) when the ball is empty.
    pub bound: f64,
    pub ok: bool,
    pub ball_empty: bool,
    pub ball_measure: f64,
    pub total_measure: f64,
    pub orbit_length: usize,
}

/// Brute-force first return of `p` within distance `r` under `perm`.
///
/// The ball is open, `d(p, x) < r/2`. The orbit of `p` is finite, so the search
/// always terminates by the orbit length at the latest.
pub fn metric_recurrence_oracle(space: &FiniteMetricSpace, perm: &[usize], p: usize, r: f64) -> Result<OracleResult> {
    if p >= space.len() {
        return Err(Error::DimensionMismatch { expected: space.len(), got: p + 1 });
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("radius must be finite and non-negative, got {r}")));
    }
    check_isometry(space, perm)?;
    check_measure_preserving(space, perm)?;

    let total = space.total_measure();
    let ball = space.open_ball_measure(p, r / 2.0);
    let ball_empty = ball == 0.0;
    let bound = if ball_empty { f64::INFINITY } else { total / ball };

    let mut n_r = None;
    let mut x = perm[p];
    let mut k = 1;
    loop {
        if n_r.is_none() && space.dist(p, x) <= r {
            n_r = Some(k);
        }
        if x == p {
            break;
        }
        x = perm[x];
        k += 1;
    }
    let n_r = n_r.expect("orbit returns to p");
    Ok(OracleResult {
        n_r,
        bound,
        // equality is attained (e.g. a single orbit of equal weights); compare
        // products so that round-off in the measure sum cannot flip it
        ok: ball_empty || (n_r as f64) * ball <= total * (1.0 + METRIC_TOL),
        ball_empty,
        ball_measure: ball,
        total_measure: total,
        orbit_length: k,
    })
}

/// JSON instance: `{points, dist, measure, permutation}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInstance {
    pub points: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub measure: Vec<f64>,
    pub permutation: Vec<usize>,
}

impl MetricInstance {
    pub fn from_json(text: &str) -> Result<(FiniteMetricSpace, Vec<usize>)> {
        let inst: MetricInstance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.into_parts()
    }

    pub fn load(path: &Path) -> Result<(FiniteMetricSpace, Vec<usize>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn into_parts(self) -> Result<(FiniteMetricSpace, Vec<usize>)> {
        let space = FiniteMetricSpace::new(self.points, self.dist, self.measure)?;
        check_permutation(&self.permutation, space.len())?;
        Ok((space, self.permutation))
    }

    pub fn from_parts(space: &FiniteMetricSpace, perm: &[usize]) -> Self {
        Self {
            points: space.points.clone(),
            dist: space.dist.clone(),
            measure: space.measure.clone(),
            permutation: perm.to_vec(),
        }
    }
}

fn labels(m: usize) -> Vec<String> {
    (0..m).map(|i| i.to_string()).collect()
}

/// Path metric of the `m`-cycle with uniform measure.
pub fn cycle_space(m: usize) -> Result<FiniteMetricSpace> {
    let dist = (0..m)
        .map(|i| (0..m).map(|j| i.abs_diff(j).min(m - i.abs_diff(j)) as f64).collect())
        .collect();
    FiniteMetricSpace::new(labels(m), dist, vec![1.0; m])
}

/// `m` equally spaced points on a circle of radius `radius`, chordal distance.
pub fn discretized_circle(m: usize, radius: f64) -> Result<FiniteMetricSpace> {
    let dist = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { 0.0 } else { 2.0 * radius * (PI * i.abs_diff(j) as f64 / m as f64).sin() })
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(labels(m), dist, vec![1.0; m])
}

/// Rotation by `shift`, optionally followed by the reflection `i ↦ -i`.
pub fn dihedral_map(m: usize, shift: usize, reflect: bool) -> Vec<usize> {
    (0..m)
        .map(|i| {
            let j = if reflect { (m - i) % m } else { i };
            (j + shift) % m
        })
        .collect()
}

/// Leaves of a complete `branching`-ary tree of the given depth; the distance
/// of two leaves is the height of their lowest common ancestor, with strictly
/// increasing random heights per level.
pub fn random_ultrametric(branching: usize, depth: usize, rng: &mut impl Rng) -> Result<FiniteMetricSpace> {
    if branching < 2 || depth == 0 {
        return Err(Error::BadParameter("ultrametric tree needs branching >= 2 and depth >= 1".into()));
    }
    let m = branching.pow(depth as u32);
    let mut heights = Vec::with_capacity(depth);
    let mut h = 0.0;
    for _ in 0..depth {
        h += rng.random_range(0.2..1.5);
        heights.push(h);
    }
    let dist = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    // number of trailing digit levels below the common ancestor
                    let (mut a, mut b, mut lvl) = (i, j, 0);
                    while a != b {
                        a /= branching;
                        b /= branching;
                        lvl += 1;
                    }
                    if lvl == 0 {
                        0.0
                    } else {
                        heights[lvl - 1]
                    }
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(labels(m), dist, vec![1.0; m])
}

/// Random automorphism of the tree behind [`random_ultrametric`]: an
/// independent child permutation at every internal node.
pub fn random_tree_automorphism(branching: usize, depth: usize, rng: &mut impl Rng) -> Vec<usize> {
    let m = branching.pow(depth as u32);
    // child permutations keyed by (level, prefix)
    let mut perms: Vec<Vec<Vec<usize>>> = Vec::with_capacity(depth);
    for lvl in 0..depth {
        let nodes = branching.pow(lvl as u32);
        perms.push(
            (0..nodes)
                .map(|_| {
                    let mut p: Vec<usize> = (0..branching).collect();
                    p.shuffle(rng);
                    p
                })
                .collect(),
        );
    }
    (0..m)
        .map(|leaf| {
            // most significant digit first
            let mut digits = vec![0; depth];
            let mut x = leaf;
            for d in digits.iter_mut().rev() {
                *d = x % branching;
                x /= branching;
            }
            let mut prefix = 0;
            let mut image = 0;
            for (lvl, &d) in digits.iter().enumerate() {
                image = image * branching + perms[lvl][prefix][d];
                prefix = prefix * branching + d;
            }
            image
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceFamily {
    Cycle,
    Circle,
    Ultrametric,
}

/// Seeded random instance `(space, isometry, point, radius)`.
pub fn random_instance(family: SpaceFamily, seed: u64) -> Result<(FiniteMetricSpace, Vec<usize>, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (space, perm) = match family {
        SpaceFamily::Cycle | SpaceFamily::Circle => {
            let m = rng.random_range(3..=40);
            let space = if family == SpaceFamily::Cycle {
                cycle_space(m)?
            } else {
                discretized_circle(m, rng.random_range(0.5..3.0))?
            };
            let perm = dihedral_map(m, rng.random_range(0..m), rng.random_bool(0.3));
            (space, perm)
        }
        SpaceFamily::Ultrametric => {
            let branching = rng.random_range(2..=3);
            let depth = rng.random_range(1..=if branching == 2 { 5 } else { 3 });
            let space = random_ultrametric(branching, depth, &mut rng)?;
            let perm = random_tree_automorphism(branching, depth, &mut rng);
            (space, perm)
        }
    };
    let space = space.with_orbit_measure(&perm, &mut rng)?;
    let p = rng.random_range(0..space.len());
    let diam = (0..space.len()).map(|x| space.dist(p, x)).fold(0.0, f64::max);
    let r = rng.random_range(0.0..=1.0) * diam;
    Ok((space, perm, p, r))
}
