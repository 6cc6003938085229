//! Empirical chord-arc certificates: ADR bounds, interior and exterior
//! corkscrews, and explicit Harnack chains.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::DiscreteDomain;
use super::point::{dist, lerp, Point};
use crate::error::{Error, Result};

/// Chain-length parameters `Λ` recorded in every certificate.
pub const HARNACK_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
const PAIRS_PER_LAMBDA: usize = 12;
/// Seed of the pair sampler; certificates are deterministic.
pub const HARNACK_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub radius: f64,
    /// Extremes of `σ(Δ(Q,r))/r^{n−1}` over `Q` at this radius.
    pub adr_min: f64,
    pub adr_max: f64,
    /// Extremes of `σ(Δ(Q,r))` divided by the flat measure `2r` or `πr²`.
    pub flat_min: f64,
    pub flat_max: f64,
    pub interior_c: f64,
    pub exterior_c: f64,
    pub balls_tested: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackRow {
    pub lambda: f64,
    /// Longest chain over the sampled pairs.
    pub max_balls: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordArcCertificate {
    pub passed: bool,
    /// `max(sup σ/r^{n−1}, 1/inf σ/r^{n−1})`.
    pub adr_constant: f64,
    pub flat_min: f64,
    pub flat_max: f64,
    pub interior_corkscrew_c: f64,
    pub exterior_corkscrew_c: f64,
    /// Comparability constant: `C⁻¹ diam B ≤ dist(B, ∂Ω) ≤ C diam B`.
    pub harnack_c: f64,
    pub harnack_n: Vec<HarnackRow>,
    pub scales_tested: Vec<f64>,
    pub per_scale: Vec<ScaleRow>,
    pub failures: Vec<String>,
}

/// Dyadic radii `2^k h` with `4h ≤ 2^k h ≤ diam/2`.
pub fn dyadic_scales(domain: &DiscreteDomain) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 4.0 * domain.h();
    while r <= domain.diameter() / 2.0 + 1e-12 {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Boundary centers used for ball tests: all face centroids and all corners.
pub fn test_centers(domain: &DiscreteDomain) -> Vec<Point> {
    domain
        .faces()
        .iter()
        .map(|f| f.centroid)
        .chain(domain.vertices().iter().copied())
        .collect()
}

fn flat_measure(dim: usize, r: f64) -> f64 {
    if dim == 2 {
        2.0 * r
    } else {
        std::f64::consts::PI * r * r
    }
}

fn interior_corkscrew(domain: &DiscreteDomain, q: &Point, r: f64) -> f64 {
    let mut best = 0.0_f64;
    domain.for_each_cell_in_ball(q, r, |c| {
        let cell = &domain.cells()[c];
        best = best.max(cell.delta.min(r - dist(&cell.center, q)));
    });
    best / r
}

fn exterior_corkscrew(domain: &DiscreteDomain, q: &Point, r: f64) -> f64 {
    let dim = domain.dim();
    let step = domain.h().max(r / 8.0);
    let m = (r / step).ceil() as isize;
    let mut best = 0.0_f64;
    let range = |k: usize| if k < dim { -m..=m } else { 0..=0 };
    for k2 in range(2) {
        for k1 in range(1) {
            for k0 in range(0) {
                let z = [
                    q[0] + k0 as f64 * step,
                    q[1] + k1 as f64 * step,
                    q[2] + k2 as f64 * step,
                ];
                let room = r - dist(&z, q);
                if room <= best * r {
                    continue;
                }
                let d = domain.boundary_distance(&z);
                if d.min(room) <= best * r || domain.contains(&z) {
                    continue;
                }
                best = d.min(room) / r;
            }
        }
    }
    best
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    cell: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Quasi-hyperbolic shortest path between cells on the axis-neighbour graph.
pub fn quasi_hyperbolic_path(domain: &DiscreteDomain, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = domain.cells().len();
    let mut cost = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    cost[from] = 0.0;
    heap.push(State { cost: 0.0, cell: from });
    let h = domain.h();
    while let Some(State { cost: c, cell }) = heap.pop() {
        if cell == to {
            break;
        }
        if c > cost[cell] {
            continue;
        }
        let da = domain.cells()[cell].delta;
        for nb in domain.neighbours(cell) {
            let w = 0.5 * h * (1.0 / da + 1.0 / domain.cells()[nb].delta);
            let nc = c + w;
            if nc < cost[nb] {
                cost[nb] = nc;
                prev[nb] = cell;
                heap.push(State { cost: nc, cell: nb });
            }
        }
    }
    if !cost[to].is_finite() {
        return None;
    }
    let mut path = vec![to];
    while *path.last().expect("nonempty") != from {
        path.push(prev[*path.last().expect("nonempty")]);
    }
    path.reverse();
    Some(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackBall {
    pub center: Point,
    pub radius: f64,
}

/// Covers the path polyline by balls of radius `δ(center)/2`, each next
/// center inside the previous ball.
pub fn harnack_chain(domain: &DiscreteDomain, from: usize, to: usize) -> Result<Vec<HarnackBall>> {
    let path = quasi_hyperbolic_path(domain, from, to)
        .ok_or_else(|| Error::Domain("cells are not connected".into()))?;
    let pts: Vec<Point> = path.iter().map(|&c| domain.cells()[c].center).collect();
    let ball = |c: Point| HarnackBall {
        radius: 0.5 * domain.boundary_distance(&c),
        center: c,
    };
    let target = pts[pts.len() - 1];
    let mut chain = vec![ball(pts[0])];
    let mut seg = 0;
    let mut pos = pts[0];
    loop {
        let cur = chain.last().expect("nonempty").clone();
        if dist(&cur.center, &target) < cur.radius {
            if dist(&cur.center, &target) > 0.0 {
                chain.push(ball(target));
            }
            break;
        }
        // Advance along the polyline to the last point strictly inside the ball.
        let reach = 0.95 * cur.radius;
        let mut next = pos;
        while seg + 1 < pts.len() {
            let b = pts[seg + 1];
            if dist(&cur.center, &b) < reach {
                seg += 1;
                next = b;
                continue;
            }
            // Intersect the segment [next, b] with the sphere of radius `reach`.
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if dist(&cur.center, &lerp(&next, &b, mid)) < reach {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            next = lerp(&next, &b, lo);
            break;
        }
        if dist(&next, &pos) == 0.0 && dist(&next, &cur.center) == 0.0 {
            return Err(Error::computation("Harnack chain walk stalled", vec![cur.radius]));
        }
        pos = next;
        chain.push(ball(next));
        if chain.len() > 100_000 {
            return Err(Error::computation("Harnack chain too long", vec![chain.len() as f64]));
        }
    }
    Ok(chain)
}

fn harnack_rows(domain: &DiscreteDomain, failures: &mut Vec<String>) -> Vec<HarnackRow> {
    let h = domain.h();
    let max_delta = domain.cells().iter().map(|c| c.delta).fold(0.0, f64::max);
    let mut rhos = Vec::new();
    let mut rho = 2.0 * h;
    while rho <= max_delta / 2.0 {
        rhos.push(rho);
        rho *= 2.0;
    }
    if rhos.is_empty() {
        rhos.push(max_delta);
    }
    let mut rows = Vec::new();
    for (li, &lambda) in HARNACK_LAMBDAS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(HARNACK_SEED + li as u64);
        let mut pairs = Vec::new();
        for k in 0..PAIRS_PER_LAMBDA {
            let rho = rhos[k % rhos.len()];
            let deep: Vec<usize> = (0..domain.cells().len())
                .filter(|&c| domain.cells()[c].delta >= rho)
                .collect();
            let Some(&x) = deep.choose(&mut rng) else { continue };
            let near: Vec<usize> = domain
                .cells_in_ball(&domain.cells()[x].center, lambda * rho + 1e-12)
                .into_iter()
                .filter(|&c| domain.cells()[c].delta >= rho && c != x)
                .collect();
            if let Some(&y) = near.choose(&mut rng) {
                pairs.push((x, y));
            }
        }
        let lengths: Vec<Result<usize>> = pairs
            .par_iter()
            .map(|&(x, y)| harnack_chain(domain, x, y).map(|c| c.len()))
            .collect();
        let mut max_balls = 0;
        for l in lengths {
            match l {
                Ok(n) => max_balls = max_balls.max(n),
                Err(e) => failures.push(format!("harnack chain (Λ = {lambda}): {e}")),
            }
        }
        rows.push(HarnackRow {
            lambda,
            max_balls,
            pairs: pairs.len(),
        });
    }
    rows
}

/// Certifies the domain at the given radii. Failures are recorded in the
/// certificate rather than returned as errors.
pub fn certify(domain: &DiscreteDomain, scales: &[f64]) -> ChordArcCertificate {
    let dim = domain.dim();
    let centers = test_centers(domain);
    let mut failures = Vec::new();
    let mut per_scale = Vec::new();
    for &r in scales {
        if r < 4.0 * domain.h() - 1e-12 || r > domain.diameter() {
            failures.push(format!("scale {r} outside (4h, diam)"));
            continue;
        }
        let rows: Vec<(f64, f64, f64)> = centers
            .par_iter()
            .map(|q| {
                (
                    domain.surface_measure(q, r),
                    interior_corkscrew(domain, q, r),
                    exterior_corkscrew(domain, q, r),
                )
            })
            .collect();
        let mut row = ScaleRow {
            radius: r,
            adr_min: f64::INFINITY,
            adr_max: 0.0,
            flat_min: f64::INFINITY,
            flat_max: 0.0,
            interior_c: f64::INFINITY,
            exterior_c: f64::INFINITY,
            balls_tested: rows.len(),
        };
        for (sigma, ci, ce) in rows {
            let ratio = sigma / r.powi(dim as i32 - 1);
            let flat = sigma / flat_measure(dim, r);
            row.adr_min = row.adr_min.min(ratio);
            row.adr_max = row.adr_max.max(ratio);
            row.flat_min = row.flat_min.min(flat);
            row.flat_max = row.flat_max.max(flat);
            row.interior_c = row.interior_c.min(ci);
            row.exterior_c = row.exterior_c.min(ce);
        }
        if row.interior_c <= 0.0 {
            failures.push(format!("no interior corkscrew at r = {r}"));
        }
        if row.exterior_c <= 0.0 {
            failures.push(format!("no exterior corkscrew at r = {r}"));
        }
        if row.adr_min <= 0.0 {
            failures.push(format!("empty surface ball at r = {r}"));
        }
        per_scale.push(row);
    }
    let fold = |f: fn(&ScaleRow) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        per_scale.iter().map(f).fold(init, op)
    };
    let adr_sup = fold(|r| r.adr_max, 0.0, f64::max);
    let adr_inf = fold(|r| r.adr_min, f64::INFINITY, f64::min);
    let harnack_n = harnack_rows(domain, &mut failures);
    if harnack_n.iter().any(|r| r.pairs == 0) {
        failures.push("no Harnack pairs sampled for some Λ".into());
    }
    let adr_constant = if per_scale.is_empty() {
        failures.push("no valid scales".into());
        f64::INFINITY
    } else {
        adr_sup.max(1.0 / adr_inf)
    };
    ChordArcCertificate {
        passed: failures.is_empty() && adr_constant.is_finite(),
        adr_constant,
        flat_min: fold(|r| r.flat_min, f64::INFINITY, f64::min),
        flat_max: fold(|r| r.flat_max, 0.0, f64::max),
        interior_corkscrew_c: fold(|r| r.interior_c, f64::INFINITY, f64::min),
        exterior_corkscrew_c: fold(|r| r.exterior_c, f64::INFINITY, f64::min),
        harnack_c: 2.0,
        harnack_n,
        scales_tested: per_scale.iter().map(|r| r.radius).collect(),
        per_scale,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::DomainPreset;

    #[test]
    fn square_certificate() {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 1.0 / 32.0).unwrap();
        let scales = dyadic_scales(&d);
        assert_eq!(scales, vec![0.125, 0.25, 0.5]);
        let c = certify(&d, &scales);
        assert!(c.passed, "{:?}", c.failures);
        // Worst case: Q at distance r/√2 from a corner, σ = (1 + √2) r.
        assert!((c.adr_constant - (1.0 + 2f64.sqrt())).abs() < 0.02, "{}", c.adr_constant);
        for &r in &scales {
            let corner = d.surface_measure(&[0.0, 0.0, 0.0], r) / r;
            assert!((corner - 2.0).abs() < 1e-12);
        }
        assert!(c.interior_corkscrew_c > 0.2 && c.interior_corkscrew_c < 1.0);
        assert!(c.exterior_corkscrew_c > 0.2 && c.exterior_corkscrew_c < 1.0);
        assert_eq!(c.harnack_n.len(), 4);
    }

    #[test]
    fn chains_link_and_compare() {
        let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 32.0).unwrap();
        let a = d.locate(&[0.75, 0.1, 0.0]).unwrap();
        let b = d.locate(&[0.1, 0.75, 0.0]).unwrap();
        let chain = harnack_chain(&d, a, b).unwrap();
        for w in chain.windows(2) {
            assert!(dist(&w[0].center, &w[1].center) < w[0].radius + w[1].radius);
            assert!(dist(&w[0].center, &w[1].center) < w[0].radius);
        }
        for ball in &chain {
            let gap = d.boundary_distance(&ball.center) - ball.radius;
            let ratio = gap / (2.0 * ball.radius);
            assert!((0.5..=2.0).contains(&ratio));
        }
        let last = chain.last().unwrap();
        assert!(dist(&last.center, &d.cells()[b].center) < 1e-12);
    }
}
