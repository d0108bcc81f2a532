//! Truncation regions and their boundary data.
//!
//! The catalog is closed: interval and half-line in d = 1; disk and convex
//! polygon in d = 2; plus the box-minus complement surrogate in either
//! dimension. Indicators follow the open-set convention, and polygon
//! corners are recorded but excluded from boundary quadrature.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Interval,
    HalfLine,
    Disk,
    Polygon,
    BoxMinus,
}

/// Which side of the boundary is bounded; None for the half-line, where
/// neither side is (its boundary is still the compact point set {0}).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundedSide {
    Region,
    Complement,
}

#[derive(Clone, Debug)]
enum Data {
    Interval { a: f64, b: f64 },
    HalfLine,
    Disk { center: [f64; 2], radius: f64 },
    Polygon { verts: Vec<[f64; 2]> },
    BoxMinus { half_width: f64, inner: Box<Region> },
}

/// A boundary quadrature node: position, outward unit normal, weight.
/// In d = 1 the second coordinate is zero and the weight is 1 per endpoint.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryNode {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct Region {
    pub dim: usize,
    pub kind: RegionKind,
    data: Data,
    pub corner_set: Vec<[f64; 2]>,
    pub bounded_side: Option<BoundedSide>,
}

impl Region {
    pub fn interval(a: f64, b: f64) -> Result<Region> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Region(format!(
                "interval needs finite a < b, got ({a}, {b})"
            )));
        }
        Ok(Region {
            dim: 1,
            kind: RegionKind::Interval,
            data: Data::Interval { a, b },
            corner_set: vec![],
            bounded_side: Some(BoundedSide::Region),
        })
    }

    /// The half-line (0, inf); its boundary is the single point 0.
    pub fn half_line() -> Region {
        Region {
            dim: 1,
            kind: RegionKind::HalfLine,
            data: Data::HalfLine,
            corner_set: vec![],
            bounded_side: None,
        }
    }

    pub fn disk(radius: f64) -> Result<Region> {
        Region::disk_at([0.0, 0.0], radius)
    }

    pub fn disk_at(center: [f64; 2], radius: f64) -> Result<Region> {
        if !(radius > 0.0) {
            return Err(Error::Region(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Region {
            dim: 2,
            kind: RegionKind::Disk,
            data: Data::Disk { center, radius },
            corner_set: vec![],
            bounded_side: Some(BoundedSide::Region),
        })
    }

    /// Convex polygon from its vertex list; orientation is normalized to
    /// counterclockwise and convexity is required.
    pub fn polygon(verts: Vec<[f64; 2]>) -> Result<Region> {
        if verts.len() < 3 {
            return Err(Error::Region(format!(
                "polygon needs at least 3 vertices, got {}",
                verts.len()
            )));
        }
        let mut verts = verts;
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        let area = signed_area(&verts);
        if area <= 1e-14 {
            return Err(Error::Region("polygon is degenerate".into()));
        }
        let n = verts.len();
        for i in 0..n {
            let p = verts[i];
            let q = verts[(i + 1) % n];
            let r = verts[(i + 2) % n];
            let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
            if cross <= 0.0 {
                return Err(Error::Region(format!(
                    "polygon is not strictly convex at vertex {:?}",
                    q
                )));
            }
        }
        Ok(Region {
            dim: 2,
            kind: RegionKind::Polygon,
            corner_set: verts.clone(),
            data: Data::Polygon { verts },
            bounded_side: Some(BoundedSide::Region),
        })
    }

    /// [-L, L]^d minus the closure of this (bounded) region. The region must
    /// sit strictly inside the concentric box of half-width L/2.
    pub fn complement_in_box(&self, half_width: f64) -> Result<Region> {
        if self.kind == RegionKind::HalfLine || self.kind == RegionKind::BoxMinus {
            return Err(Error::Region(
                "complement_in_box needs a bounded single-component region".into(),
            ));
        }
        let (lo, hi) = self.bounding_box();
        let inner_limit = half_width / 2.0;
        for k in 0..self.dim {
            if lo[k] <= -inner_limit || hi[k] >= inner_limit {
                return Err(Error::Region(format!(
                    "region spans [{}, {}] on axis {k}; it must lie strictly inside \
                     the half-width {inner_limit} box",
                    lo[k], hi[k]
                )));
            }
        }
        let mut corner_set = self.corner_set.clone();
        if self.dim == 2 {
            let l = half_width;
            corner_set.extend([[-l, -l], [l, -l], [l, l], [-l, l]]);
        }
        Ok(Region {
            dim: self.dim,
            kind: RegionKind::BoxMinus,
            data: Data::BoxMinus {
                half_width,
                inner: Box::new(self.clone()),
            },
            corner_set,
            bounded_side: Some(BoundedSide::Region),
        })
    }

    /// Membership with the open-set convention: boundary points are out.
    pub fn indicator(&self, x: &[f64]) -> bool {
        match &self.data {
            Data::Interval { a, b } => x[0] > *a && x[0] < *b,
            Data::HalfLine => x[0] > 0.0,
            Data::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
            Data::Polygon { verts } => {
                let n = verts.len();
                (0..n).all(|i| {
                    let p = verts[i];
                    let q = verts[(i + 1) % n];
                    (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]) > 0.0
                })
            }
            Data::BoxMinus { half_width, inner } => {
                let in_box = (0..self.dim).all(|k| x[k].abs() < *half_width);
                in_box && !inner.closure_contains(x)
            }
        }
    }

    fn closure_contains(&self, x: &[f64]) -> bool {
        match &self.data {
            Data::Interval { a, b } => x[0] >= *a && x[0] <= *b,
            Data::HalfLine => x[0] >= 0.0,
            Data::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Data::Polygon { verts } => {
                let n = verts.len();
                (0..n).all(|i| {
                    let p = verts[i];
                    let q = verts[(i + 1) % n];
                    (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]) >= 0.0
                })
            }
            Data::BoxMinus { .. } => !self.indicator(x) && {
                // Closure of a box-minus region: the closed box minus the
                // open inner region; only used for nesting checks.
                match &self.data {
                    Data::BoxMinus { half_width, inner } => {
                        (0..self.dim).all(|k| x[k].abs() <= *half_width)
                            && !inner.indicator(x)
                    }
                    _ => unreachable!(),
                }
            },
        }
    }

    /// Exact Lebesgue measure; infinite for the half-line.
    pub fn measure(&self) -> f64 {
        match &self.data {
            Data::Interval { a, b } => b - a,
            Data::HalfLine => f64::INFINITY,
            Data::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Data::Polygon { verts } => signed_area(verts),
            Data::BoxMinus { half_width, inner } => {
                let box_measure = (2.0 * half_width).powi(self.dim as i32);
                box_measure - inner.measure()
            }
        }
    }

    /// Axis-aligned bounding box (lo, hi).
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match &self.data {
            Data::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Data::HalfLine => ([0.0, 0.0], [f64::INFINITY, 0.0]),
            Data::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Data::Polygon { verts } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in verts {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Data::BoxMinus { half_width, .. } => {
                ([-half_width, -half_width], [*half_width, *half_width])
            }
        }
    }

    /// Connected components of a d = 1 region as intervals.
    pub fn intervals(&self) -> Result<Vec<(f64, f64)>> {
        match &self.data {
            Data::Interval { a, b } => Ok(vec![(*a, *b)]),
            Data::BoxMinus { half_width, inner } if self.dim == 1 => {
                let (lo, hi) = match &inner.data {
                    Data::Interval { a, b } => (*a, *b),
                    _ => return Err(Error::Region("inner region is not an interval".into())),
                };
                Ok(vec![(-half_width, lo), (hi, *half_width)])
            }
            _ => Err(Error::Region(
                "interval decomposition only exists for bounded d = 1 regions".into(),
            )),
        }
    }

    /// Boundary nodes, outward unit normals and weights; weights sum to the
    /// boundary measure as n grows (exactly, for the catalog shapes).
    /// Corner points never appear as nodes.
    pub fn boundary_quadrature(&self, n: usize) -> Result<Vec<BoundaryNode>> {
        if self.dim == 2 && n < 4 {
            return Err(Error::Region(format!(
                "need at least 4 nodes per patch, got {n}"
            )));
        }
        let mut nodes = Vec::new();
        self.push_boundary_nodes(n, false, &mut nodes)?;
        Ok(nodes)
    }

    fn push_boundary_nodes(
        &self,
        n: usize,
        flip: bool,
        out: &mut Vec<BoundaryNode>,
    ) -> Result<()> {
        let sign = if flip { -1.0 } else { 1.0 };
        match &self.data {
            Data::Interval { a, b } => {
                out.push(BoundaryNode {
                    point: [*a, 0.0],
                    normal: [-sign, 0.0],
                    weight: 1.0,
                });
                out.push(BoundaryNode {
                    point: [*b, 0.0],
                    normal: [sign, 0.0],
                    weight: 1.0,
                });
            }
            Data::HalfLine => {
                out.push(BoundaryNode {
                    point: [0.0, 0.0],
                    normal: [-sign, 0.0],
                    weight: 1.0,
                });
            }
            Data::Disk { center, radius } => {
                // Midpoint rule on the circle: spectrally accurate and the
                // weight sum is exactly the circumference.
                let w = 2.0 * std::f64::consts::PI * radius / n as f64;
                for j in 0..n {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                    let (s, c) = th.sin_cos();
                    out.push(BoundaryNode {
                        point: [center[0] + radius * c, center[1] + radius * s],
                        normal: [sign * c, sign * s],
                        weight: w,
                    });
                }
            }
            Data::Polygon { verts } => {
                let m = verts.len();
                for i in 0..m {
                    let p = verts[i];
                    let q = verts[(i + 1) % m];
                    let ex = q[0] - p[0];
                    let ey = q[1] - p[1];
                    let len = (ex * ex + ey * ey).sqrt();
                    // CCW orientation: outward normal is the edge direction
                    // rotated clockwise.
                    let nx = ey / len;
                    let ny = -ex / len;
                    let w = len / n as f64;
                    for j in 0..n {
                        let t = (j as f64 + 0.5) / n as f64;
                        out.push(BoundaryNode {
                            point: [p[0] + t * ex, p[1] + t * ey],
                            normal: [sign * nx, sign * ny],
                            weight: w,
                        });
                    }
                }
            }
            Data::BoxMinus { half_width, inner } => {
                let l = *half_width;
                if self.dim == 1 {
                    out.push(BoundaryNode {
                        point: [-l, 0.0],
                        normal: [-sign, 0.0],
                        weight: 1.0,
                    });
                    out.push(BoundaryNode {
                        point: [l, 0.0],
                        normal: [sign, 0.0],
                        weight: 1.0,
                    });
                } else {
                    let square = Region::polygon(vec![[-l, -l], [l, -l], [l, l], [-l, l]])?;
                    square.push_boundary_nodes(n, flip, out)?;
                }
                // Inner boundary with normals flipped: outward for the
                // box-minus region points into the excluded set.
                inner.push_boundary_nodes(n, !flip, out)?;
            }
        }
        Ok(())
    }
}

fn signed_area(verts: &[[f64; 2]]) -> f64 {
    let n = verts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = verts[i];
        let q = verts[(i + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    acc / 2.0
}

/// Parse the CLI region syntax:
/// `interval:a,b`, `halfline`, `disk:R`, or `polygon:x1,y1;x2,y2;...`.
pub fn parse_region(text: &str) -> Result<Region> {
    let bad = |msg: String| Error::Region(msg);
    if text == "halfline" {
        return Ok(Region::half_line());
    }
    if let Some(rest) = text.strip_prefix("interval:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(bad(format!("expected interval:a,b, got {text}")));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad(format!("bad number in {text}")))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad(format!("bad number in {text}")))?;
        return Region::interval(a, b);
    }
    if let Some(rest) = text.strip_prefix("disk:") {
        let r: f64 = rest.trim().parse().map_err(|_| bad(format!("bad radius in {text}")))?;
        return Region::disk(r);
    }
    if let Some(rest) = text.strip_prefix("polygon:") {
        let mut verts = Vec::new();
        for pair in rest.split(';') {
            let xy: Vec<&str> = pair.split(',').collect();
            if xy.len() != 2 {
                return Err(bad(format!("expected x,y pairs in {text}")));
            }
            let x: f64 = xy[0].trim().parse().map_err(|_| bad(format!("bad number in {text}")))?;
            let y: f64 = xy[1].trim().parse().map_err(|_| bad(format!("bad number in {text}")))?;
            verts.push([x, y]);
        }
        return Region::polygon(verts);
    }
    Err(bad(format!(
        "unknown region '{text}'; expected interval:a,b | halfline | disk:R | polygon:..."
    )))
}
