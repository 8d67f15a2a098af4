use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, Shape};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    /// Counterclockwise along the boundary (domain on the left).
    pub nodes: [usize; 2],
    pub normal: Point,
    pub length: f64,
}

/// Conforming triangulation with positively oriented triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    h: f64,
    domain: Option<Domain>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats {
    pub nodes: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub area: f64,
    pub boundary_length: f64,
    pub max_edge: f64,
    pub min_angle_deg: f64,
}

fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * b.sub(a).cross(c.sub(a))
}

impl Mesh {
    /// Builds a mesh from raw parts, orienting triangles and deriving boundary edges.
    pub fn from_parts(nodes: Vec<Point>, mut triangles: Vec<[usize; 3]>, h: f64, domain: Option<Domain>) -> Result<Self> {
        if nodes.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no nodes or no triangles".into()));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let a = tri_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if a < 0.0 {
                tri.swap(1, 2);
            } else if a == 0.0 || !a.is_finite() {
                return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
            }
        }
        let boundary = boundary_edges(&nodes, &triangles)?;
        Ok(Self {
            nodes,
            triangles,
            boundary,
            h,
            domain,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        tri_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary.iter().map(|e| e.length).sum()
    }

    /// Area-weighted centroid.
    pub fn centroid(&self) -> Point {
        let (mut sx, mut sy, mut a) = (0.0, 0.0, 0.0);
        for t in 0..self.triangles.len() {
            let [p, q, r] = self.triangle_points(t);
            let w = tri_area(p, q, r);
            sx += w * (p.x + q.x + r.x) / 3.0;
            sy += w * (p.y + q.y + r.y) / 3.0;
            a += w;
        }
        Point::new(sx / a, sy / a)
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary.iter().flat_map(|e| e.nodes).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(t);
            m = m.max(a.dist(b)).max(b.dist(c)).max(c.dist(a));
        }
        m
    }

    pub fn stats(&self) -> MeshStats {
        let mut min_angle = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let u = p[(k + 1) % 3].sub(p[k]);
                let v = p[(k + 2) % 3].sub(p[k]);
                min_angle = min_angle.min(u.cross(v).abs().atan2(u.dot(v)));
            }
        }
        MeshStats {
            nodes: self.nodes.len(),
            triangles: self.triangles.len(),
            boundary_edges: self.boundary.len(),
            area: self.area(),
            boundary_length: self.boundary_length(),
            max_edge: self.max_edge(),
            min_angle_deg: min_angle.to_degrees(),
        }
    }

    /// Uniform red refinement; boundary midpoints are moved onto the exact boundary
    /// when the mesh knows its domain.
    pub fn refine(&self) -> Result<Mesh> {
        let mut nodes = self.nodes.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let on_boundary: std::collections::HashSet<(usize, usize)> = self
            .boundary
            .iter()
            .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
            .collect();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&i) = mid.get(&key) {
                return i;
            }
            let mut p = nodes[a].lerp(nodes[b], 0.5);
            if on_boundary.contains(&key) {
                if let Some(d) = &self.domain {
                    p = d.project_to_boundary(p);
                }
            }
            nodes.push(p);
            mid.insert(key, nodes.len() - 1);
            nodes.len() - 1
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Mesh::from_parts(nodes, triangles, 0.5 * self.h, self.domain.clone())
    }

    /// Text export: header, `x y` per node, `i j k` per triangle, `i j` per boundary edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "nodes {} triangles {} bedges {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary.len()
        );
        for p in &self.nodes {
            let _ = writeln!(s, "{:.16e} {:.16e}", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary {
            let _ = writeln!(s, "{} {}", e.nodes[0], e.nodes[1]);
        }
        s
    }

    /// Parses the text format; the listed boundary edges must match the triangulation.
    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(Error::MeshFormat {
            line: 1,
            reason: "empty input".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::MeshFormat {
            line: hl + 1,
            reason: "expected `nodes N triangles T bedges B`".into(),
        };
        if h.len() != 6 || h[0] != "nodes" || h[2] != "triangles" || h[4] != "bedges" {
            return Err(bad_header());
        }
        let count = |s: &str| s.parse::<usize>().map_err(|_| bad_header());
        let (n, t, b) = (count(h[1])?, count(h[3])?, count(h[5])?);
        let mut next = |what: &str, arity: usize| -> Result<(usize, Vec<&str>)> {
            let (i, l) = lines.next().ok_or(Error::MeshFormat {
                line: 0,
                reason: format!("unexpected end of input while reading {what}"),
            })?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != arity {
                return Err(Error::MeshFormat {
                    line: i + 1,
                    reason: format!("{what} line needs {arity} fields, got {}", f.len()),
                });
            }
            Ok((i + 1, f))
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, f) = next("node", 2)?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MeshFormat {
                        line,
                        reason: format!("bad coordinate `{s}`"),
                    })
            };
            nodes.push(Point::new(num(f[0])?, num(f[1])?));
        }
        let index = |s: &str, line: usize| {
            s.parse::<usize>().ok().filter(|&i| i < n).ok_or_else(|| Error::MeshFormat {
                line,
                reason: format!("bad node index `{s}`"),
            })
        };
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let (line, f) = next("triangle", 3)?;
            triangles.push([index(f[0], line)?, index(f[1], line)?, index(f[2], line)?]);
        }
        let mut listed = Vec::with_capacity(b);
        for _ in 0..b {
            let (line, f) = next("boundary edge", 2)?;
            listed.push([index(f[0], line)?, index(f[1], line)?]);
        }
        if let Some((i, _)) = lines.next() {
            return Err(Error::MeshFormat {
                line: i + 1,
                reason: "trailing content after the declared records".into(),
            });
        }
        let mesh = Mesh::from_parts(nodes, triangles, 0.0, None)?;
        let mut want: Vec<(usize, usize)> = mesh
            .boundary
            .iter()
            .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
            .collect();
        let mut got: Vec<(usize, usize)> = listed.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(Error::InvalidMesh(
                "listed boundary edges do not match the triangulation".into(),
            ));
        }
        let h = mesh.max_edge();
        Ok(Mesh { h, ..mesh })
    }
}

fn boundary_edges(nodes: &[Point], triangles: &[[usize; 3]]) -> Result<Vec<BoundaryEdge>> {
    let mut count: HashMap<(usize, usize), (u32, usize, usize)> = HashMap::new();
    let mut order = Vec::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let e = count.entry(key).or_insert_with(|| {
                order.push(key);
                (0, a, b)
            });
            e.0 += 1;
        }
    }
    let mut out = Vec::new();
    for key in order {
        let (c, a, b) = count[&key];
        match c {
            1 => {
                let d = nodes[b].sub(nodes[a]);
                let length = d.norm();
                out.push(BoundaryEdge {
                    nodes: [a, b],
                    normal: Point::new(d.y / length, -d.x / length),
                    length,
                });
            }
            2 => {}
            _ => {
                return Err(Error::InvalidMesh(format!(
                    "edge ({}, {}) is shared by {c} triangles",
                    key.0, key.1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidMesh("mesh has no boundary".into()));
    }
    Ok(out)
}

/// Triangulates the annulus strip between two node rings given by their
/// parameter positions in [0, 1]. Closed rings wrap around.
fn stitch(inner: &[usize], inner_pos: &[f64], outer: &[usize], outer_pos: &[f64], closed: bool, tris: &mut Vec<[usize; 3]>) {
    let ni = inner.len();
    let no = outer.len();
    let at = |ring: &[usize], k: usize| if closed { ring[k % ring.len()] } else { ring[k] };
    let pos = |p: &[f64], k: usize| if k < p.len() { p[k] } else { 1.0 };
    let steps_i = if ni == 1 { 0 } else if closed { ni } else { ni - 1 };
    let steps_o = if closed { no } else { no - 1 };
    let (mut p, mut q) = (0, 0);
    while p < steps_i || q < steps_o {
        let advance_outer = if p == steps_i {
            true
        } else if q == steps_o {
            false
        } else {
            pos(outer_pos, q + 1) <= pos(inner_pos, p + 1)
        };
        if advance_outer {
            tris.push([at(inner, p), at(outer, q), at(outer, q + 1)]);
            q += 1;
        } else {
            tris.push([at(inner, p), at(outer, q), at(inner, p + 1)]);
            p += 1;
        }
    }
}

// outer rings sharing one node count, so the layer next to the boundary has no seams
const UNIFORM_LAYERS: usize = 2;

/// Unit-disc ring mesh: ring i has 6i nodes at radius i/n, except the outermost rings.
fn unit_disc(n: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut nodes = vec![Point::new(0.0, 0.0)];
    let mut tris = Vec::new();
    let mut prev: Vec<usize> = vec![0];
    let mut prev_pos = vec![0.0];
    for i in 1..=n {
        let m = 6 * if n > UNIFORM_LAYERS + 1 { i.min(n - UNIFORM_LAYERS) } else { i };
        let r = i as f64 / n as f64;
        let mut ring = Vec::with_capacity(m);
        let mut pos = Vec::with_capacity(m);
        for j in 0..m {
            let s = j as f64 / m as f64;
            let t = 2.0 * PI * s;
            ring.push(nodes.len());
            pos.push(s);
            nodes.push(if i == n {
                Point::new(t.cos(), t.sin())
            } else {
                Point::new(r * t.cos(), r * t.sin())
            });
        }
        stitch(&prev, &prev_pos, &ring, &pos, true, &mut tris);
        prev = ring;
        prev_pos = pos;
    }
    (nodes, tris)
}

/// Half-disc ring mesh on angles [-pi/2, pi/2] (mirrored when `left`), ring i with 3i+1 nodes.
fn half_disc(n: usize, radius: f64, left: bool) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut nodes = vec![Point::new(0.0, 0.0)];
    let mut tris = Vec::new();
    let mut prev: Vec<usize> = vec![0];
    let mut prev_pos = vec![0.0];
    for i in 1..=n {
        let m = 3 * i + 1;
        let r = radius * i as f64 / n as f64;
        let mut ring = Vec::with_capacity(m);
        let mut pos = Vec::with_capacity(m);
        for j in 0..m {
            let s = j as f64 / (m - 1) as f64;
            let t = -0.5 * PI + PI * s;
            ring.push(nodes.len());
            pos.push(s);
            let p = if j == 0 {
                Point::new(0.0, -r)
            } else if j == m - 1 {
                Point::new(0.0, r)
            } else {
                Point::new(r * t.cos(), r * t.sin())
            };
            nodes.push(if left { Point::new(-p.x, p.y) } else { p });
        }
        stitch(&prev, &prev_pos, &ring, &pos, false, &mut tris);
        prev = ring;
        prev_pos = pos;
    }
    (nodes, tris)
}

fn grid(x0: f64, y0: f64, w: f64, hgt: f64, nx: usize, ny: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x0 + w } else { x0 + w * i as f64 / nx as f64 };
            let y = if j == ny { y0 + hgt } else { y0 + hgt * j as f64 / ny as f64 };
            nodes.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (nodes, tris)
}

/// Merges node sets that share exactly equal coordinates.
struct NodeMerger {
    nodes: Vec<Point>,
    index: HashMap<(u64, u64), usize>,
}

impl NodeMerger {
    fn new() -> Self {
        Self {
            nodes: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn add(&mut self, pts: &[Point], tris: &[[usize; 3]], out: &mut Vec<[usize; 3]>) {
        let map: Vec<usize> = pts
            .iter()
            .map(|p| {
                let key = ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
                *self.index.entry(key).or_insert_with(|| {
                    self.nodes.push(*p);
                    self.nodes.len() - 1
                })
            })
            .collect();
        out.extend(tris.iter().map(|t| [map[t[0]], map[t[1]], map[t[2]]]));
    }
}

fn shift(pts: &mut [Point], c: Point) {
    for p in pts {
        *p = p.add(c);
    }
}

/// Structured triangulation per shape family with boundary nodes on the exact boundary.
pub fn generate_mesh(d: &Domain, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() || h >= d.diameter() / 4.0 {
        return Err(Error::param(
            "h",
            format!("mesh size must satisfy 0 < h < diameter/4 = {}, got {h}", d.diameter() / 4.0),
        ));
    }
    let (nodes, tris) = match d.shape() {
        Shape::Disc { center, radius } => {
            let n = (radius / h).ceil() as usize;
            let (mut pts, tris) = unit_disc(n);
            for p in pts.iter_mut() {
                *p = Point::new(center.x + radius * p.x, center.y + radius * p.y);
            }
            (pts, tris)
        }
        Shape::Ellipse { center, a, b } => {
            let n = (a.max(*b) / h).ceil() as usize;
            let (mut pts, tris) = unit_disc(n);
            for p in pts.iter_mut() {
                *p = Point::new(center.x + a * p.x, center.y + b * p.y);
            }
            (pts, tris)
        }
        Shape::Rectangle { center, width, height } => {
            let nx = (width / h).ceil() as usize;
            let ny = (height / h).ceil() as usize;
            let (mut pts, tris) = grid(-0.5 * width, -0.5 * height, *width, *height, nx, ny);
            shift(&mut pts, *center);
            (pts, tris)
        }
        Shape::Stadium { center, length, radius } => {
            let n = (radius / h).ceil() as usize;
            let nx = (length / h).ceil() as usize;
            let half = 0.5 * length;
            let mut merger = NodeMerger::new();
            let mut tris = Vec::new();
            // rectangle rows at y = radius * k / n so they meet the cap rings exactly
            let mut rect_nodes = Vec::with_capacity((nx + 1) * (2 * n + 1));
            for j in 0..=2 * n {
                let k = j as i64 - n as i64;
                let y = radius * k as f64 / n as f64;
                for i in 0..=nx {
                    let x = if i == 0 {
                        -half
                    } else if i == nx {
                        half
                    } else {
                        -half + length * i as f64 / nx as f64
                    };
                    rect_nodes.push(Point::new(x, y));
                }
            }
            let id = |i: usize, j: usize| j * (nx + 1) + i;
            let mut rect_tris = Vec::new();
            for j in 0..2 * n {
                for i in 0..nx {
                    rect_tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    rect_tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            merger.add(&rect_nodes, &rect_tris, &mut tris);
            for left in [false, true] {
                let (mut pts, cap_tris) = half_disc(n, *radius, left);
                let cx = if left { -half } else { half };
                for p in pts.iter_mut() {
                    // rebuild diameter nodes with the rectangle's exact y values
                    let y = if p.x == 0.0 {
                        let k = (p.y / radius * n as f64).round() as i64;
                        radius * k as f64 / n as f64
                    } else {
                        p.y
                    };
                    *p = Point::new(if p.x == 0.0 { cx } else { cx + p.x }, y);
                }
                merger.add(&pts, &cap_tris, &mut tris);
            }
            let mut pts = merger.nodes;
            shift(&mut pts, *center);
            (pts, tris)
        }
        Shape::Polygon(poly) => {
            if !poly.is_convex() {
                return Err(Error::Unsupported(
                    "automatic meshing of nonconvex polygons; generate a mesh externally and use mesh import".into(),
                ));
            }
            let c = poly.centroid();
            let mut pts = vec![c];
            pts.extend_from_slice(poly.vertices());
            let m = poly.vertices().len();
            let tris: Vec<[usize; 3]> = (0..m).map(|i| [0, 1 + i, 1 + (i + 1) % m]).collect();
            let mut mesh = Mesh::from_parts(pts, tris, h, Some(d.clone()))?;
            while mesh.max_edge() > h {
                mesh = mesh.refine()?;
            }
            mesh.h = h;
            return Ok(mesh);
        }
    };
    Mesh::from_parts(nodes, tris, h, Some(d.clone()))
}
