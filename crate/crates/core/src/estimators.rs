//! Separated-set counts: box dimension, topological entropy and the
//! transversal scan of pairs whose orbit stays in a compact part.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::flow::ConeGrid;

const DEFAULT_STEP: f64 = ConeGrid::DEFAULT_STEP;

/// Finite set of points in `R^d` with the sup metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(1, |p| p.len());
        if d == 0 {
            return Err(LabError::Domain(
                "points need at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(LabError::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(LabError::Domain("point coordinates must be finite".into()));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { d, coords })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    pub fn empty(d: usize) -> Self {
        PointCloud {
            d: d.max(1),
            coords: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.d)
    }

    /// Concatenation, `self` first.
    pub fn union(&self, other: &PointCloud) -> Result<PointCloud> {
        if !self.is_empty() && !other.is_empty() && self.d != other.d {
            return Err(LabError::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        let d = if self.is_empty() { other.d } else { self.d };
        Ok(PointCloud {
            d,
            coords: [self.coords.as_slice(), other.coords.as_slice()].concat(),
        })
    }
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn cell_of(p: &[f64], eps: f64) -> Vec<i64> {
    p.iter().map(|x| (x / eps).floor() as i64).collect()
}

/// Indices of a maximal `eps`-separated subset, chosen greedily in input order.
///
/// A point is kept when its distance to every kept point is at least `eps`.
pub fn separated_subset(cloud: &PointCloud, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(LabError::Contract(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let d = cloud.dim();
    let mut kept = Vec::new();
    if d > 4 {
        for (i, p) in cloud.points().enumerate() {
            if kept
                .iter()
                .all(|&j: &usize| sup_dist(p, cloud.point(j)) >= eps)
            {
                kept.push(i);
            }
        }
        return Ok(kept);
    }
    // Kept points are pairwise >= eps apart, so the neighbouring cells of
    // side eps hold everything that could be closer than eps.
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut m| {
            (0..d)
                .map(|_| {
                    let o = (m % 3) as i64 - 1;
                    m /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for (i, p) in cloud.points().enumerate() {
        let c = cell_of(p, eps);
        let near = offsets.iter().any(|o| {
            let key: Vec<i64> = c.iter().zip(o).map(|(a, b)| a + b).collect();
            cells
                .get(&key)
                .is_some_and(|v| v.iter().any(|&j| sup_dist(p, cloud.point(j)) < eps))
        });
        if !near {
            cells.entry(c).or_default().push(i);
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Size of the greedy maximal `eps`-separated subset; 0 for an empty cloud.
///
/// The result lies between the largest `2 eps`-separated count and the
/// largest `eps`-separated count.
pub fn separated_count(cloud: &PointCloud, eps: f64) -> Result<usize> {
    Ok(separated_subset(cloud, eps)?.len())
}

/// Endpoints of the `2^level` intervals of the middle-thirds Cantor construction, ascending.
pub fn cantor_endpoints(level: u32) -> Vec<f64> {
    // Left endpoints are sums of 2 * 3^{-i}; work in units of 3^{-level}.
    let unit = 3f64.powi(-(level as i32));
    let mut lefts = vec![0u64];
    for i in 0..level {
        let shift = 2 * 3u64.pow(level - 1 - i);
        lefts = lefts.iter().flat_map(|&a| [a, a + shift]).collect();
    }
    lefts
        .iter()
        .flat_map(|&a| [a as f64 * unit, (a + 1) as f64 * unit])
        .collect()
}

/// `m + 1` equally spaced points `0, 1/m, ..., 1`.
pub fn unit_grid(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

/// Least-squares line `y = slope * x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

/// Residuals above this trigger a fit-quality warning.
pub const RESIDUAL_WARNING: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// `(eps, count)` per schedule entry.
    pub rows: Vec<(f64, usize)>,
    pub residuals: Vec<f64>,
    pub warning: bool,
}

impl BoxDimEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,count\n");
        for (e, c) in &self.rows {
            writeln!(s, "{e},{c}").unwrap();
        }
        s
    }
}

/// `eps_j = eps0 * ratio^j` for `j < len`.
pub fn geometric_schedule(eps0: f64, ratio: f64, len: usize) -> Vec<f64> {
    (0..len).map(|j| eps0 * ratio.powi(j as i32)).collect()
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 4 {
        return Err(LabError::Config(format!(
            "schedule needs >= 4 scales, got {}",
            schedule.len()
        )));
    }
    if schedule.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(LabError::Config(
            "scales must be positive and finite".into(),
        ));
    }
    let ratio = schedule[1] / schedule[0];
    if !(ratio < 1.0) {
        return Err(LabError::Config("scales must decrease".into()));
    }
    for w in schedule.windows(2) {
        if ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9 {
            return Err(LabError::Config(
                "scales must form a geometric sequence".into(),
            ));
        }
    }
    Ok(())
}

/// Slope of `ln count` against `|ln eps|` over a geometric schedule.
pub fn box_dim_estimate(cloud: &PointCloud, schedule: &[f64]) -> Result<BoxDimEstimate> {
    check_schedule(schedule)?;
    if cloud.is_empty() {
        return Err(LabError::Contract(
            "box dimension of an empty cloud is undefined".into(),
        ));
    }
    let counts: Vec<usize> = schedule
        .par_iter()
        .map(|&e| separated_count(cloud, e))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = schedule.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept) = least_squares(&x, &y);
    let residuals: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| b - (slope * a + intercept))
        .collect();
    let warning = residuals.iter().any(|r| r.abs() > RESIDUAL_WARNING);
    Ok(BoxDimEstimate {
        slope,
        intercept,
        rows: schedule.iter().copied().zip(counts).collect(),
        residuals,
        warning,
    })
}

/// Box-dimension estimate recast as an upper bound for Hausdorff dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffBound {
    pub upper: f64,
    pub note: String,
}

pub fn hausdorff_note(slope: f64) -> HausdorffBound {
    let upper = slope.max(0.0);
    HausdorffBound {
        upper,
        note: format!(
            "dim_H <= dim_box ~ {upper:.4} (estimate from a finite separated-set fit, not a certified bound)"
        ),
    }
}

/// A map together with the metric used for Bowen balls.
pub trait Dynamics: Sync {
    /// Image of `x`, or `None` when the orbit leaves the sampled region.
    fn step(&self, x: &[f64]) -> Option<Vec<f64>>;
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `x -> 2x mod 1` on the circle.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoublingMap;

impl Dynamics for DoublingMap {
    fn step(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![(2.0 * x[0]).rem_euclid(1.0)])
    }
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        circle_dist(a[0], b[0])
    }
}

/// Rotation `x -> x + alpha mod 1`, an isometry.
#[derive(Clone, Copy, Debug)]
pub struct CircleRotation(pub f64);

impl Dynamics for CircleRotation {
    fn step(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![(x[0] + self.0).rem_euclid(1.0)])
    }
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        circle_dist(a[0], b[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub n: usize,
    pub epsilon: f64,
    pub count: usize,
    /// `ln(count) / n`.
    pub rate: f64,
    /// Seed points whose orbit escaped before time `n`; they are left out.
    pub escaped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub rows: Vec<EntropyRow>,
    /// Rate at the largest `N`.
    pub rate: f64,
    /// Slope of `ln count` against `N`.
    pub slope: f64,
}

impl EntropyEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,epsilon,count,rate\n");
        for r in &self.rows {
            writeln!(s, "{},{},{},{}", r.n, r.epsilon, r.count, r.rate).unwrap();
        }
        s
    }
}

/// Greedy `(N, eps)`-separated counts for `N = 1..=n_max` under the Bowen
/// metric `max_{0 <= n < N} d(T^n x, T^n y)`, seeds taken in input order.
pub fn top_entropy_estimate<D: Dynamics>(
    dynamics: &D,
    seed: &PointCloud,
    n_max: usize,
    eps: f64,
) -> Result<EntropyEstimate> {
    if n_max < 2 {
        return Err(LabError::Contract("entropy estimate needs N >= 2".into()));
    }
    if !(eps > 0.0) {
        return Err(LabError::Contract(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if seed.is_empty() {
        return Err(LabError::Contract("empty seed cloud".into()));
    }
    // orbits[i][n] = T^n(x_i); shorter when the orbit escapes.
    let orbits: Vec<Vec<Vec<f64>>> = seed
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| {
            let mut orb = vec![p.to_vec()];
            while orb.len() < n_max {
                match dynamics.step(orb.last().unwrap()) {
                    Some(q) => orb.push(q),
                    None => break,
                }
            }
            orb
        })
        .collect();
    let rows: Vec<EntropyRow> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let alive: Vec<&Vec<Vec<f64>>> = orbits.iter().filter(|o| o.len() >= n).collect();
            let escaped = orbits.len() - alive.len();
            let mut kept: Vec<&Vec<Vec<f64>>> = Vec::new();
            for o in &alive {
                let separated = kept
                    .iter()
                    .all(|k| (0..n).any(|t| dynamics.distance(&o[t], &k[t]) >= eps));
                if separated {
                    kept.push(o);
                }
            }
            let count = kept.len();
            let rate = if count > 0 {
                (count as f64).ln() / n as f64
            } else {
                f64::NAN
            };
            EntropyRow {
                n,
                epsilon: eps,
                count,
                rate,
                escaped,
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.count > 0)
        .map(|r| (r.n as f64, (r.count as f64).ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = if xs.len() >= 2 {
        least_squares(&xs, &ys).0
    } else {
        f64::NAN
    };
    let rate = rows.last().unwrap().rate;
    Ok(EntropyEstimate { rows, rate, slope })
}

/// Survivors of the transversal scan and their box-dimension fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadScan {
    pub rho: f64,
    pub horizon: f64,
    pub grid: usize,
    pub survivors: PointCloud,
    /// `None` when there are no survivors.
    pub estimate: Option<BoxDimEstimate>,
}

impl BadScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,v\n");
        for p in self.survivors.points() {
            writeln!(s, "{},{}", p[0], p[1]).unwrap();
        }
        s
    }
}

/// Scales `2^{-j}` for `j = 1 ..= floor(log2(grid)) - 1`.
pub fn grid_schedule(grid: usize) -> Vec<f64> {
    let top = (usize::BITS - 1 - grid.max(1).leading_zeros()) as i32 - 1;
    (1..=top).map(|j| 0.5f64.powi(j)).collect()
}

/// Whether the orbit of `tau(u, v)` leaves `K_rho` at some sample time
/// `(r, s) = step * (i, j)` with `r + s <= horizon`, for `u = (2a+1)/(2G)`,
/// `v = (2b+1)/(2G)`.
///
/// For `rho <= 1` only vectors with `n >= 1` can be short, and the vector
/// for `n` is shorter than `rho` at `(r, s)` exactly when
/// `r < ln(rho / <nu>)`, `s < ln(rho / <nv>)` and `r + s > ln(n / rho)`.
struct ExitTable {
    /// limits[n - 1][a]: number of admissible `i` (i.e. `max i + 1`), capped.
    limits: Vec<Vec<u32>>,
    lower: Vec<f64>,
    kmax: u32,
    step: f64,
}

impl ExitTable {
    fn new(rho: f64, horizon: f64, grid: usize, step: f64) -> Self {
        let kmax = (horizon / step + 1e-9).floor().max(0.0) as u32;
        let n_max = if horizon >= 0.0 {
            (rho * horizon.exp()).ceil() as u64
        } else {
            0
        };
        let two_g = 2 * grid as u64;
        let mut limits = Vec::new();
        let mut lower = Vec::new();
        for n in 1..=n_max {
            lower.push((n as f64 / rho).ln());
            let row: Vec<u32> = (0..grid as u64)
                .map(|a| {
                    let m = (n * (2 * a + 1)) % two_g;
                    let frac = m.min(two_g - m) as f64 / two_g as f64;
                    if frac == 0.0 {
                        return kmax + 1;
                    }
                    let bound = (rho / frac).ln();
                    if bound <= 0.0 {
                        return 0;
                    }
                    // count of i >= 0 with step * i < bound
                    let c = (bound / step).ceil();
                    c.min((kmax + 1) as f64) as u32
                })
                .collect();
            limits.push(row);
        }
        ExitTable {
            limits,
            lower,
            kmax,
            step,
        }
    }

    fn exits(&self, a: usize, b: usize) -> bool {
        self.limits.iter().zip(&self.lower).any(|(row, &lo)| {
            let (ci, cj) = (row[a], row[b]);
            if ci == 0 || cj == 0 {
                return false;
            }
            let best = (ci - 1 + cj - 1).min(self.kmax);
            self.step * best as f64 > lo
        })
    }
}

/// Cell-centred grid points `(u, v)` of `[0, 1)^2` whose orbit under
/// `a(r, s)`, sampled with step [`ConeGrid::DEFAULT_STEP`] over `r, s >= 0`,
/// `r + s <= horizon`, stays in `K_rho`, plus a box-dimension fit.
pub fn transversal_bad_scan(rho: f64, horizon: f64, grid: usize) -> Result<BadScan> {
    transversal_bad_scan_with(rho, horizon, grid, DEFAULT_STEP)
}

pub fn transversal_bad_scan_with(
    rho: f64,
    horizon: f64,
    grid: usize,
    step: f64,
) -> Result<BadScan> {
    if !(rho > 0.0) || !horizon.is_finite() || horizon < 0.0 || !(step > 0.0) {
        return Err(LabError::Contract(
            "scan needs rho > 0, finite horizon >= 0, step > 0".into(),
        ));
    }
    if grid == 0 || grid > 1 << 14 {
        return Err(LabError::Contract(format!(
            "grid size {grid} out of range 1..=16384"
        )));
    }
    if rho * horizon.exp() > 1e6 {
        return Err(LabError::Budget(
            "rho * e^horizon exceeds 1e6 candidate n".into(),
        ));
    }
    let survivors = if rho > 1.0 {
        // delta(tau) = 1 already at time 0.
        PointCloud::empty(2)
    } else {
        let table = ExitTable::new(rho, horizon, grid, step);
        let g2 = 2.0 * grid as f64;
        let pts: Vec<Vec<f64>> = (0..grid)
            .into_par_iter()
            .flat_map_iter(|a| {
                let table = &table;
                (0..grid)
                    .filter(move |&b| !table.exits(a, b))
                    .map(move |b| vec![(2 * a + 1) as f64 / g2, (2 * b + 1) as f64 / g2])
            })
            .collect();
        PointCloud::new(&pts)?
    };
    let estimate = if survivors.is_empty() {
        None
    } else {
        Some(box_dim_estimate(&survivors, &grid_schedule(grid))?)
    };
    Ok(BadScan {
        rho,
        horizon,
        grid,
        survivors,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_count(cloud: &PointCloud, eps: f64) -> usize {
        let mut kept: Vec<&[f64]> = Vec::new();
        for p in cloud.points() {
            if kept.iter().all(|q| sup_dist(p, q) >= eps) {
                kept.push(p);
            }
        }
        kept.len()
    }

    #[test]
    fn separated_examples() {
        let c = PointCloud::from_scalars(&[0.0, 1.0]).unwrap();
        assert_eq!(separated_count(&c, 0.5).unwrap(), 2);
        assert_eq!(separated_count(&c, 1.5).unwrap(), 1);
        assert_eq!(separated_count(&c, 1.0).unwrap(), 2);
        assert_eq!(separated_count(&PointCloud::empty(1), 0.5).unwrap(), 0);
        assert!(separated_count(&c, 0.0).is_err());
        let h = 0.01;
        let grid =
            PointCloud::from_scalars(&(0..=100).map(|i| i as f64 * h).collect::<Vec<_>>()).unwrap();
        let n = separated_count(&grid, 2.0 * h).unwrap() as f64;
        let target = 1.0 / (2.0 * h) + 1.0;
        assert!(n <= 2.0 * target && n >= target / 2.0);
    }

    #[test]
    fn hashed_greedy_equals_naive_and_is_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 1..=3 {
            let pts: Vec<Vec<f64>> = (0..400)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let cloud = PointCloud::new(&pts).unwrap();
            for eps in [0.01, 0.05, 0.2, 0.7] {
                let kept = separated_subset(&cloud, eps).unwrap();
                assert_eq!(kept.len(), naive_count(&cloud, eps));
                for p in cloud.points() {
                    assert!(kept.iter().any(|&j| sup_dist(p, cloud.point(j)) < eps));
                }
            }
        }
    }

    #[test]
    fn counts_non_increasing_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let pts: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let cloud = PointCloud::new(&pts).unwrap();
        let counts: Vec<usize> = geometric_schedule(0.5, 0.8, 20)
            .iter()
            .map(|&e| separated_count(&cloud, e).unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn box_dim_basics() {
        let one = PointCloud::from_scalars(&[0.3]).unwrap();
        let sched = geometric_schedule(0.5, 0.5, 6);
        assert_eq!(box_dim_estimate(&one, &sched).unwrap().slope, 0.0);
        assert!(matches!(
            box_dim_estimate(&one, &sched[..3]),
            Err(LabError::Config(_))
        ));
        assert!(matches!(
            box_dim_estimate(&one, &[0.5, 0.25, 0.2, 0.1]),
            Err(LabError::Config(_))
        ));
        assert!(matches!(
            box_dim_estimate(&one, &[0.1, 0.2, 0.4, 0.8]),
            Err(LabError::Config(_))
        ));
        assert!(box_dim_estimate(&PointCloud::empty(1), &sched).is_err());
        let est = box_dim_estimate(&one, &sched).unwrap();
        assert!(est.to_csv().starts_with("epsilon,count\n0.5,1\n"));
    }

    #[test]
    fn hausdorff_relabels() {
        assert_eq!(hausdorff_note(0.63).upper, 0.63);
        assert_eq!(hausdorff_note(0.0).upper, 0.0);
        assert_eq!(hausdorff_note(-0.01).upper, 0.0);
    }

    #[test]
    fn doubling_and_rotation() {
        let seed =
            PointCloud::from_scalars(&(0..256).map(|i| i as f64 / 256.0).collect::<Vec<_>>())
                .unwrap();
        let e = top_entropy_estimate(&DoublingMap, &seed, 6, 0.125).unwrap();
        assert!(e.rows.windows(2).all(|w| w[0].count <= w[1].count));
        let r = top_entropy_estimate(&CircleRotation(0.1234), &seed, 8, 0.125).unwrap();
        assert!(r.rows.iter().all(|row| row.count == r.rows[0].count));
        assert!(r.rows.windows(2).all(|w| w[1].rate < w[0].rate));
        assert!(e.to_csv().starts_with("N,epsilon,count,rate\n1,0.125,"));
        assert!(top_entropy_estimate(&DoublingMap, &seed, 1, 0.1).is_err());
    }

    struct Escaping;
    impl Dynamics for Escaping {
        fn step(&self, x: &[f64]) -> Option<Vec<f64>> {
            let y = 3.0 * x[0];
            (y < 1.0).then(|| vec![y])
        }
        fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
            (a[0] - b[0]).abs()
        }
    }

    #[test]
    fn escapes_are_flagged() {
        let seed = PointCloud::from_scalars(&[0.01, 0.5, 0.9]).unwrap();
        let e = top_entropy_estimate(&Escaping, &seed, 3, 0.05).unwrap();
        assert_eq!(e.rows[0].escaped, 0);
        assert_eq!(e.rows[1].escaped, 2);
        assert_eq!(e.rows[1].count, 1);
    }

    #[test]
    fn generators() {
        assert_eq!(cantor_endpoints(1), vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let c = cantor_endpoints(6);
        assert_eq!(c.len(), 128);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(unit_grid(4), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn grid_schedule_sizes() {
        assert_eq!(grid_schedule(512).len(), 8);
        assert_eq!(grid_schedule(32).len(), 4);
        assert_eq!(grid_schedule(48).len(), 4);
    }

    #[test]
    fn bad_scan_trivial_cases() {
        let s = transversal_bad_scan(1.5, 2.0, 32).unwrap();
        assert!(s.survivors.is_empty() && s.estimate.is_none());
        let s = transversal_bad_scan(0.01, 0.0, 64).unwrap();
        assert_eq!(s.survivors.len(), 64 * 64);
        assert!((s.estimate.unwrap().slope - 2.0).abs() < 0.05);
    }

    #[test]
    fn exit_table_matches_lattice_reduction() {
        use crate::bridge::{tau, TargetPair};
        use crate::lattice::{apply_diag, delta, DiagParam};
        let (grid, rho, horizon, step) = (12usize, 0.3, 2.0, 0.25);
        let table = ExitTable::new(rho, horizon, grid, step);
        let kmax = (horizon / step).round() as usize;
        for a in 0..grid {
            for b in 0..grid {
                let u = (2 * a + 1) as f64 / (2 * grid) as f64;
                let v = (2 * b + 1) as f64 / (2 * grid) as f64;
                let base = tau(&TargetPair::from_f64(u, v));
                let mut exits = false;
                for i in 0..=kmax {
                    for j in 0..=kmax - i {
                        let t = DiagParam::from_rs(step * i as f64, step * j as f64);
                        if delta(&apply_diag(&t, &base).unwrap()).unwrap() < rho {
                            exits = true;
                        }
                    }
                }
                assert_eq!(table.exits(a, b), exits, "grid point ({a}, {b})");
            }
        }
    }

    #[test]
    fn survivors_shrink_with_horizon() {
        let sizes: Vec<usize> = [0.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|&t| transversal_bad_scan(0.1, t, 64).unwrap().survivors.len())
            .collect();
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "{sizes:?}");
        assert!(sizes[3] < sizes[0]);
    }
}
