//! Small vector helpers on `[f64; 3]`; 2D points carry `z = 0`.

pub type Point = [f64; 3];

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

#[inline]
pub fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

pub fn segment_closest(x: &Point, a: &Point, b: &Point) -> Point {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return *a;
    }
    let t = (dot(&sub(x, a), &ab) / len2).clamp(0.0, 1.0);
    lerp(a, b, t)
}

pub fn segment_distance(x: &Point, a: &Point, b: &Point) -> f64 {
    dist(x, &segment_closest(x, a, b))
}

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
pub fn triangle_closest(p: &Point, t: &[Point; 3]) -> Point {
    let (a, b, c) = (&t[0], &t[1], &t[2]);
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return lerp(a, b, d1 / (d1 - d3));
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return lerp(a, c, d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return lerp(b, c, (d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [
        a[0] + ab[0] * v + ac[0] * w,
        a[1] + ab[1] * v + ac[1] * w,
        a[2] + ab[2] * v + ac[2] * w,
    ]
}

pub fn triangle_distance(p: &Point, t: &[Point; 3]) -> f64 {
    dist(p, &triangle_closest(p, t))
}

pub fn triangle_area(t: &[Point; 3]) -> f64 {
    0.5 * norm(&cross(&sub(&t[1], &t[0]), &sub(&t[2], &t[0])))
}

/// Signed solid angle of a triangle seen from `p` (Van Oosterom–Strackee).
pub fn solid_angle(p: &Point, t: &[Point; 3]) -> f64 {
    let a = sub(&t[0], p);
    let b = sub(&t[1], p);
    let c = sub(&t[2], p);
    let (la, lb, lc) = (norm(&a), norm(&b), norm(&c));
    let num = dot(&a, &cross(&b, &c));
    let den = la * lb * lc + dot(&a, &b) * lc + dot(&a, &c) * lb + dot(&b, &c) * la;
    2.0 * num.atan2(den)
}

/// Whether the segment meets the open axis-aligned box `(lo, hi)` in the
/// `xy` plane with positive length.
pub fn segment_hits_open_box(a: &Point, b: &Point, lo: &Point, hi: &Point) -> bool {
    let size = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let eps = 1e-12 * size;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for k in 0..2 {
        let (l, u) = (lo[k] + eps, hi[k] - eps);
        let d = b[k] - a[k];
        if d == 0.0 {
            if a[k] <= l || a[k] >= u {
                return false;
            }
        } else {
            let (mut s0, mut s1) = ((l - a[k]) / d, (u - a[k]) / d);
            if s0 > s1 {
                std::mem::swap(&mut s0, &mut s1);
            }
            t0 = t0.max(s0);
            t1 = t1.min(s1);
        }
    }
    t1 - t0 > 1e-9
}

/// Length of the part of segment `ab` inside the open ball `B(q, r)`.
pub fn segment_length_in_ball(a: &Point, b: &Point, q: &Point, r: f64) -> f64 {
    let d = sub(b, a);
    let f = sub(a, q);
    let aa = dot(&d, &d);
    if aa == 0.0 {
        return 0.0;
    }
    let bb = 2.0 * dot(&f, &d);
    let cc = dot(&f, &f) - r * r;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = ((-bb - s) / (2.0 * aa)).max(0.0);
    let t1 = ((-bb + s) / (2.0 * aa)).min(1.0);
    (t1 - t0).max(0.0) * aa.sqrt()
}
