//! Discrete domains on a uniform box lattice with an exact polygonal or
//! polyhedral boundary.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::point::{self, Point};
use super::ChordArcCertificate;
use crate::error::{Error, Result};

const NO_CELL: u32 = u32::MAX;
/// Minimum number of cells across the smallest domain extent.
pub const MIN_CELLS_ACROSS: usize = 4;

fn default_side() -> f64 {
    1.0
}

fn default_slope() -> f64 {
    1.0
}

fn default_period() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainPreset {
    Square {
        #[serde(default = "default_side")]
        side: f64,
    },
    Cube {
        #[serde(default = "default_side")]
        side: f64,
    },
    /// `[0,1]² ∖ [0,½]²`, reentrant corner at `(½,½)`.
    LShape,
    /// `{0 < x < 1, g(x) < y < 1}` with `g` a triangle wave of the given slope
    /// and period, valley at `x = 0`.
    LipschitzGraph {
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_period")]
        period: f64,
    },
    /// Alias for `LipschitzGraph { slope: 1, period: 1/4 }`.
    Sawtooth,
}

impl DomainPreset {
    pub fn name(&self) -> &'static str {
        match self {
            DomainPreset::Square { .. } => "square",
            DomainPreset::Cube { .. } => "cube",
            DomainPreset::LShape => "l_shape",
            DomainPreset::LipschitzGraph { .. } => "lipschitz_graph",
            DomainPreset::Sawtooth => "sawtooth",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainPreset::Cube { .. } => 3,
            _ => 2,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "square" => DomainPreset::Square { side: 1.0 },
            "cube" => DomainPreset::Cube { side: 1.0 },
            "l_shape" => DomainPreset::LShape,
            "lipschitz_graph" => DomainPreset::LipschitzGraph {
                slope: default_slope(),
                period: default_period(),
            },
            "sawtooth" => DomainPreset::Sawtooth,
            other => return Err(Error::Config(format!("unknown domain preset {other:?}"))),
        })
    }
}

/// Exact description of `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryGeometry {
    /// Counter-clockwise closed polygon.
    Segments(Vec<[Point; 2]>),
    /// Outward-oriented triangulated surface.
    Triangles(Vec<[Point; 3]>),
}

impl BoundaryGeometry {
    pub fn piece_count(&self) -> usize {
        match self {
            BoundaryGeometry::Segments(s) => s.len(),
            BoundaryGeometry::Triangles(t) => t.len(),
        }
    }

    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            BoundaryGeometry::Segments(segs) => segs
                .iter()
                .map(|s| point::segment_distance(x, &s[0], &s[1]))
                .fold(f64::INFINITY, f64::min),
            BoundaryGeometry::Triangles(tris) => tris
                .iter()
                .map(|t| point::triangle_distance(x, t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Closest boundary point to `x`.
    pub fn closest_point(&self, x: &Point) -> Point {
        let mut best = (f64::INFINITY, *x);
        match self {
            BoundaryGeometry::Segments(segs) => {
                for s in segs {
                    let p = point::segment_closest(x, &s[0], &s[1]);
                    let d = point::dist(x, &p);
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
            BoundaryGeometry::Triangles(tris) => {
                for t in tris {
                    let p = point::triangle_closest(x, t);
                    let d = point::dist(x, &p);
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
        }
        best.1
    }

    /// Strict interior test; boundary points count as outside.
    pub fn contains(&self, x: &Point) -> bool {
        if self.distance(x) <= 1e-13 {
            return false;
        }
        match self {
            BoundaryGeometry::Segments(segs) => {
                let mut inside = false;
                for s in segs {
                    let (a, b) = (&s[0], &s[1]);
                    if (a[1] > x[1]) != (b[1] > x[1]) {
                        let t = (x[1] - a[1]) / (b[1] - a[1]);
                        if x[0] < a[0] + t * (b[0] - a[0]) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            BoundaryGeometry::Triangles(tris) => {
                let w: f64 = tris.iter().map(|t| point::solid_angle(x, t)).sum();
                w.abs() / (4.0 * std::f64::consts::PI) > 0.5
            }
        }
    }

    /// Total `(n−1)`-dimensional measure.
    pub fn measure(&self) -> f64 {
        match self {
            BoundaryGeometry::Segments(s) => s.iter().map(|s| point::dist(&s[0], &s[1])).sum(),
            BoundaryGeometry::Triangles(t) => t.iter().map(point::triangle_area).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub index: [usize; 3],
    pub center: Point,
    /// Exact distance from the center to `∂Ω`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFace {
    pub centroid: Point,
    /// Surface weight `σ_f`.
    pub weight: f64,
    /// Index of the boundary piece the face lies on.
    pub piece: usize,
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    preset: DomainPreset,
    dim: usize,
    h: f64,
    origin: Point,
    counts: [usize; 3],
    cells: Vec<Cell>,
    lookup: Vec<u32>,
    faces: Vec<BoundaryFace>,
    boundary: BoundaryGeometry,
    vertices: Vec<Point>,
    diameter: f64,
    cert: Option<ChordArcCertificate>,
}

fn lattice_count(extent: f64, h: f64) -> Result<usize> {
    let n = extent / h;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Config(format!(
            "mesh size h = {h} does not divide the extent {extent}"
        )));
    }
    let r = r as usize;
    if r < MIN_CELLS_ACROSS {
        return Err(Error::Config(format!(
            "mesh size h = {h} gives {r} cells across; need at least {MIN_CELLS_ACROSS}"
        )));
    }
    Ok(r)
}

fn polygon(vertices: &[[f64; 2]]) -> Vec<[Point; 2]> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            [[a[0], a[1], 0.0], [b[0], b[1], 0.0]]
        })
        .collect()
}

fn cube_triangles(side: f64) -> Vec<[Point; 3]> {
    let v = |i: usize| -> Point {
        [
            if i & 1 != 0 { side } else { 0.0 },
            if i & 2 != 0 { side } else { 0.0 },
            if i & 4 != 0 { side } else { 0.0 },
        ]
    };
    // Quads listed counter-clockwise seen from outside.
    let quads = [
        [0, 2, 3, 1], // z = 0
        [4, 5, 7, 6], // z = side
        [0, 1, 5, 4], // y = 0
        [2, 6, 7, 3], // y = side
        [0, 4, 6, 2], // x = 0
        [1, 3, 7, 5], // x = side
    ];
    let mut tris = Vec::new();
    for q in quads {
        tris.push([v(q[0]), v(q[1]), v(q[2])]);
        tris.push([v(q[0]), v(q[2]), v(q[3])]);
    }
    tris
}

impl DiscreteDomain {
    pub fn build(preset: &DomainPreset, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Config(format!("mesh size h = {h} must be positive")));
        }
        let (boundary, vertices, extent): (BoundaryGeometry, Vec<Point>, [f64; 3]) = match preset {
            DomainPreset::Square { side } => {
                let s = *side;
                let vs = [[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]];
                let segs = polygon(&vs);
                let verts = segs.iter().map(|s| s[0]).collect();
                (BoundaryGeometry::Segments(segs), verts, [s, s, 0.0])
            }
            DomainPreset::Cube { side } => {
                let s = *side;
                let verts = (0..8)
                    .map(|i| {
                        [
                            if i & 1 != 0 { s } else { 0.0 },
                            if i & 2 != 0 { s } else { 0.0 },
                            if i & 4 != 0 { s } else { 0.0 },
                        ]
                    })
                    .collect();
                (BoundaryGeometry::Triangles(cube_triangles(s)), verts, [s, s, s])
            }
            DomainPreset::LShape => {
                let vs = [[0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.5], [0.5, 0.5]];
                let segs = polygon(&vs);
                let verts = segs.iter().map(|s| s[0]).collect();
                (BoundaryGeometry::Segments(segs), verts, [1.0, 1.0, 0.0])
            }
            DomainPreset::LipschitzGraph { slope, period } => {
                Self::graph_boundary(*slope, *period)?
            }
            DomainPreset::Sawtooth => Self::graph_boundary(1.0, 0.25)?,
        };
        let dim = preset.dim();
        for (k, &e) in extent.iter().enumerate().take(dim) {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::Config(format!("domain extent {k} = {e} must be positive")));
            }
        }
        let mut counts = [1usize; 3];
        for k in 0..dim {
            counts[k] = lattice_count(extent[k], h)?;
        }
        let origin = [0.0; 3];
        let total = counts[0] * counts[1] * counts[2];
        let cells_opt: Vec<Option<Cell>> = (0..total)
            .into_par_iter()
            .map(|lin| {
                let idx = [
                    lin % counts[0],
                    (lin / counts[0]) % counts[1],
                    lin / (counts[0] * counts[1]),
                ];
                let mut center = [0.0; 3];
                for k in 0..dim {
                    center[k] = origin[k] + (idx[k] as f64 + 0.5) * h;
                }
                if !boundary.contains(&center) {
                    return None;
                }
                let lo: Point =
                    std::array::from_fn(|k| if k < dim { center[k] - 0.5 * h } else { 0.0 });
                let hi: Point =
                    std::array::from_fn(|k| if k < dim { center[k] + 0.5 * h } else { 0.0 });
                let inside = match &boundary {
                    BoundaryGeometry::Segments(segs) => !segs
                        .iter()
                        .any(|s| point::segment_hits_open_box(&s[0], &s[1], &lo, &hi)),
                    BoundaryGeometry::Triangles(_) => (0..8).all(|c| {
                        let corner: Point = std::array::from_fn(|k| {
                            if c & (1 << k) != 0 {
                                hi[k]
                            } else {
                                lo[k]
                            }
                        });
                        boundary.distance(&corner) <= 1e-12 * h || boundary.contains(&corner)
                    }),
                };
                inside.then(|| Cell {
                    index: idx,
                    center,
                    delta: boundary.distance(&center),
                })
            })
            .collect();
        let mut lookup = vec![NO_CELL; total];
        let mut cells = Vec::new();
        for (lin, c) in cells_opt.into_iter().enumerate() {
            if let Some(c) = c {
                lookup[lin] = cells.len() as u32;
                cells.push(c);
            }
        }
        if cells.is_empty() {
            return Err(Error::Config("mesh contains no interior cells".into()));
        }
        let faces = Self::split_faces(&boundary, h);
        let mut diameter = 0.0_f64;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max(point::dist(a, b));
            }
        }
        Ok(Self {
            preset: preset.clone(),
            dim,
            h,
            origin,
            counts,
            cells,
            lookup,
            faces,
            boundary,
            vertices,
            diameter,
            cert: None,
        })
    }

    fn graph_boundary(slope: f64, period: f64) -> Result<(BoundaryGeometry, Vec<Point>, [f64; 3])> {
        if !(slope >= 0.0) || !slope.is_finite() {
            return Err(Error::Config(format!("slope {slope} must be finite and ≥ 0")));
        }
        if !(period > 0.0) {
            return Err(Error::Config(format!("period {period} must be positive")));
        }
        let halves = 2.0 / period;
        let k = halves.round();
        if (halves - k).abs() > 1e-9 || k < 1.0 {
            return Err(Error::Config(format!(
                "period {period} must divide 2 (an integer number of half-teeth on [0,1])"
            )));
        }
        let peak = slope * period / 2.0;
        if peak >= 0.5 {
            return Err(Error::Config(format!(
                "graph peak {peak} must stay below 1/2 to leave room for the domain"
            )));
        }
        let k = k as usize;
        let mut vs: Vec<[f64; 2]> = (0..=k)
            .map(|j| [j as f64 / k as f64, if j % 2 == 0 { 0.0 } else { peak }])
            .collect();
        vs.push([1.0, 1.0]);
        vs.push([0.0, 1.0]);
        // Drop collinear points when the graph is flat.
        let vs: Vec<[f64; 2]> = if slope == 0.0 {
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
        } else {
            vs
        };
        let segs = polygon(&vs);
        let verts = segs.iter().map(|s| s[0]).collect();
        Ok((BoundaryGeometry::Segments(segs), verts, [1.0, 1.0, 0.0]))
    }

    fn split_faces(boundary: &BoundaryGeometry, h: f64) -> Vec<BoundaryFace> {
        let mut faces = Vec::new();
        match boundary {
            BoundaryGeometry::Segments(segs) => {
                for (piece, s) in segs.iter().enumerate() {
                    let len = point::dist(&s[0], &s[1]);
                    let m = ((len / h) - 1e-9).ceil().max(1.0) as usize;
                    for j in 0..m {
                        let t = (j as f64 + 0.5) / m as f64;
                        faces.push(BoundaryFace {
                            centroid: point::lerp(&s[0], &s[1], t),
                            weight: len / m as f64,
                            piece,
                        });
                    }
                }
            }
            BoundaryGeometry::Triangles(tris) => {
                // Pairs of triangles form the axis-aligned square faces.
                for (piece, pair) in tris.chunks(2).enumerate() {
                    let (a, b, d) = (pair[0][0], pair[0][1], pair[1][2]);
                    let eu = point::sub(&b, &a);
                    let ev = point::sub(&d, &a);
                    let m = ((point::norm(&eu) / h) - 1e-9).ceil().max(1.0) as usize;
                    let w = point::norm(&eu) * point::norm(&ev) / (m * m) as f64;
                    for i in 0..m {
                        for j in 0..m {
                            let (s, t) = ((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
                            let c: Point = std::array::from_fn(|k| a[k] + s * eu[k] + t * ev[k]);
                            faces.push(BoundaryFace {
                                centroid: c,
                                weight: w,
                                piece,
                            });
                        }
                    }
                }
            }
        }
        faces
    }

    pub fn preset(&self) -> &DomainPreset {
        &self.preset
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// Cells per axis of the bounding lattice (1 on unused axes).
    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    pub fn boundary(&self) -> &BoundaryGeometry {
        &self.boundary
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn total_face_weight(&self) -> f64 {
        self.faces.iter().map(|f| f.weight).sum()
    }

    pub fn certificate(&self) -> Option<&ChordArcCertificate> {
        self.cert.as_ref()
    }

    pub fn with_certificate(mut self, cert: ChordArcCertificate) -> Self {
        self.cert = Some(cert);
        self
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.boundary.contains(x)
    }

    pub fn boundary_distance(&self, x: &Point) -> f64 {
        self.boundary.distance(x)
    }

    /// `δ(x)`; points outside `Ω` are rejected.
    pub fn delta(&self, x: &Point) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {x:?} is not inside the domain")));
        }
        Ok(self.boundary.distance(x))
    }

    pub fn cell_at(&self, idx: [isize; 3]) -> Option<usize> {
        for k in 0..3 {
            if idx[k] < 0 || idx[k] as usize >= self.counts[k] {
                return None;
            }
        }
        let lin = idx[0] as usize
            + self.counts[0] * (idx[1] as usize + self.counts[1] * idx[2] as usize);
        match self.lookup[lin] {
            NO_CELL => None,
            c => Some(c as usize),
        }
    }

    /// Cell containing `x`, if any.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        let idx: [isize; 3] = std::array::from_fn(|k| {
            if k < self.dim {
                ((x[k] - self.origin[k]) / self.h).floor() as isize
            } else {
                0
            }
        });
        self.cell_at(idx)
    }

    /// Cells whose centers satisfy `|x_c − x| < r`, in increasing id order.
    pub fn cells_in_ball(&self, x: &Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_cell_in_ball(x, r, |c| out.push(c));
        out.sort_unstable();
        out
    }

    pub fn for_each_cell_in_ball(&self, x: &Point, r: f64, mut f: impl FnMut(usize)) {
        let mut lo = [0isize; 3];
        let mut hi = [0isize; 3];
        for k in 0..self.dim {
            lo[k] = (((x[k] - r - self.origin[k]) / self.h - 0.5).floor() as isize).max(0);
            hi[k] = (((x[k] + r - self.origin[k]) / self.h - 0.5).ceil() as isize)
                .min(self.counts[k] as isize - 1);
        }
        for k2 in lo[2]..=hi[2] {
            for k1 in lo[1]..=hi[1] {
                for k0 in lo[0]..=hi[0] {
                    if let Some(c) = self.cell_at([k0, k1, k2]) {
                        if point::dist(&self.cells[c].center, x) < r {
                            f(c);
                        }
                    }
                }
            }
        }
    }

    /// Axis neighbours of a cell that are themselves cells.
    pub fn neighbours(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        let idx = self.cells[c].index;
        let dim = self.dim;
        (0..2 * dim).filter_map(move |k| {
            let mut j = idx.map(|v| v as isize);
            j[k / 2] += if k % 2 == 0 { -1 } else { 1 };
            self.cell_at(j)
        })
    }

    /// Volume centroid of the cell union.
    pub fn centroid(&self) -> Point {
        let n = self.cells.len() as f64;
        let mut c = [0.0; 3];
        for cell in &self.cells {
            for k in 0..3 {
                c[k] += cell.center[k];
            }
        }
        c.map(|v| v / n)
    }

    /// Faces with `|centroid − Q| < r`.
    pub fn faces_in_ball(&self, q: &Point, r: f64) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| point::dist(&self.faces[f].centroid, q) < r)
            .collect()
    }

    /// `σ(Δ(Q,r))`: exact segment clipping in 2D, face sums in 3D.
    pub fn surface_measure(&self, q: &Point, r: f64) -> f64 {
        match &self.boundary {
            BoundaryGeometry::Segments(segs) => segs
                .iter()
                .map(|s| point::segment_length_in_ball(&s[0], &s[1], q, r))
                .sum(),
            BoundaryGeometry::Triangles(_) => self
                .faces_in_ball(q, r)
                .into_iter()
                .map(|f| self.faces[f].weight)
                .sum(),
        }
    }

    /// Uniformly distributed point of `∂Ω`.
    pub fn sample_boundary_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let total = self.boundary.measure();
        let mut t = rng.random::<f64>() * total;
        match &self.boundary {
            BoundaryGeometry::Segments(segs) => {
                for s in segs {
                    let len = point::dist(&s[0], &s[1]);
                    if t <= len {
                        return point::lerp(&s[0], &s[1], t / len);
                    }
                    t -= len;
                }
                segs[segs.len() - 1][1]
            }
            BoundaryGeometry::Triangles(tris) => {
                for tri in tris {
                    let area = point::triangle_area(tri);
                    if t <= area {
                        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
                        if u + v > 1.0 {
                            u = 1.0 - u;
                            v = 1.0 - v;
                        }
                        return std::array::from_fn(|k| {
                            tri[0][k] + u * (tri[1][k] - tri[0][k]) + v * (tri[2][k] - tri[0][k])
                        });
                    }
                    t -= area;
                }
                tris[tris.len() - 1][0]
            }
        }
    }

    /// Writes the exact boundary, one segment or triangle per row.
    pub fn write_boundary_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        match &self.boundary {
            BoundaryGeometry::Segments(segs) => {
                writeln!(w, "piece,x0,y0,x1,y1")?;
                for (i, s) in segs.iter().enumerate() {
                    writeln!(w, "{i},{},{},{},{}", s[0][0], s[0][1], s[1][0], s[1][1])?;
                }
            }
            BoundaryGeometry::Triangles(tris) => {
                writeln!(w, "piece,x0,y0,z0,x1,y1,z1,x2,y2,z2")?;
                for (i, t) in tris.iter().enumerate() {
                    let v: Vec<String> = t.iter().flatten().map(|c| c.to_string()).collect();
                    writeln!(w, "{i},{}", v.join(","))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
