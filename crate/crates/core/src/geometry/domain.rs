use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{integrate, QuadOptions};

use super::polygon::{BoundingBox, Point, Polygon};

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Disc { center: Point, radius: f64 },
    /// Axis-aligned, `a >= b`.
    Ellipse { center: Point, a: f64, b: f64 },
    Rectangle { center: Point, width: f64, height: f64 },
    /// Segment of length `length` along x, capped by half-discs of radius `radius`.
    Stadium { center: Point, length: f64, radius: f64 },
    Polygon(Polygon),
}

/// A planar domain with exact measure and perimeter.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    shape: Shape,
    measure: f64,
    perimeter: f64,
}

/// Equal-measure comparison ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by adaptive quadrature of the arc length.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_panels: 4000,
    };
    let (quarter, _) = integrate(
        |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt(),
        0.0,
        0.5 * PI,
        opts,
    );
    4.0 * quarter
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let (measure, perimeter) = match &shape {
            Shape::Disc { radius, .. } => {
                let r = positive("r", *radius)?;
                (PI * r * r, 2.0 * PI * r)
            }
            Shape::Ellipse { a, b, .. } => {
                let (a, b) = (positive("a", *a)?, positive("b", *b)?);
                if a < b {
                    return Err(Error::param("a", format!("ellipse requires a >= b, got a={a}, b={b}")));
                }
                (PI * a * b, ellipse_perimeter(a, b))
            }
            Shape::Rectangle { width, height, .. } => {
                let (w, h) = (positive("w", *width)?, positive("h", *height)?);
                (w * h, 2.0 * (w + h))
            }
            Shape::Stadium { length, radius, .. } => {
                let (l, r) = (positive("l", *length)?, positive("r", *radius)?);
                (2.0 * r * l + PI * r * r, 2.0 * l + 2.0 * PI * r)
            }
            Shape::Polygon(p) => (p.area(), p.perimeter()),
        };
        if !(measure > 0.0 && perimeter > 0.0) {
            return Err(Error::InvalidDomain("measure and perimeter must be positive".into()));
        }
        Ok(Self {
            shape,
            measure,
            perimeter,
        })
    }

    pub fn disc(radius: f64) -> Result<Self> {
        Self::new(Shape::Disc {
            center: Point::default(),
            radius,
        })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse {
            center: Point::default(),
            a,
            b,
        })
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::new(Shape::Rectangle {
            center: Point::default(),
            width,
            height,
        })
    }

    pub fn stadium(length: f64, radius: f64) -> Result<Self> {
        Self::new(Shape::Stadium {
            center: Point::default(),
            length,
            radius,
        })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Self::new(Shape::Polygon(Polygon::new(vertices)?))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Radius of the ball with the same measure.
    pub fn equal_measure_radius(&self) -> f64 {
        (self.measure / PI).sqrt()
    }

    pub fn center(&self) -> Point {
        match &self.shape {
            Shape::Disc { center, .. }
            | Shape::Ellipse { center, .. }
            | Shape::Rectangle { center, .. }
            | Shape::Stadium { center, .. } => *center,
            Shape::Polygon(p) => p.centroid(),
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let c = self.center();
        let (hx, hy) = match &self.shape {
            Shape::Disc { radius, .. } => (*radius, *radius),
            Shape::Ellipse { a, b, .. } => (*a, *b),
            Shape::Rectangle { width, height, .. } => (0.5 * width, 0.5 * height),
            Shape::Stadium { length, radius, .. } => (0.5 * length + radius, *radius),
            Shape::Polygon(p) => return p.bounding_box(),
        };
        BoundingBox {
            min: Point::new(c.x - hx, c.y - hy),
            max: Point::new(c.x + hx, c.y + hy),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Disc { radius, .. } => 2.0 * radius,
            Shape::Ellipse { a, .. } => 2.0 * a,
            Shape::Rectangle { width, height, .. } => width.hypot(*height),
            Shape::Stadium { length, radius, .. } => length + 2.0 * radius,
            Shape::Polygon(p) => {
                let v = p.vertices();
                let mut d: f64 = 0.0;
                for i in 0..v.len() {
                    for j in (i + 1)..v.len() {
                        d = d.max(v[i].dist(v[j]));
                    }
                }
                d
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.shape {
            Shape::Polygon(p) => p.is_convex(),
            _ => true,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let c = self.center();
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        match &self.shape {
            Shape::Disc { radius, .. } => dx * dx + dy * dy < radius * radius,
            Shape::Ellipse { a, b, .. } => (dx / a).powi(2) + (dy / b).powi(2) < 1.0,
            Shape::Rectangle { width, height, .. } => {
                dx.abs() < 0.5 * width && dy.abs() < 0.5 * height
            }
            Shape::Stadium { length, radius, .. } => {
                let qx = (dx.abs() - 0.5 * length).max(0.0);
                qx * qx + dy * dy < radius * radius
            }
            Shape::Polygon(poly) => poly.contains(p),
        }
    }

    /// Counterclockwise boundary polygon with roughly `segments` vertices
    /// (exact for polygons and rectangles).
    pub fn boundary_polygon(&self, segments: usize) -> Polygon {
        let c = self.center();
        let m = segments.max(8);
        let verts: Vec<Point> = match &self.shape {
            Shape::Disc { radius, .. } => (0..m)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / m as f64;
                    Point::new(c.x + radius * t.cos(), c.y + radius * t.sin())
                })
                .collect(),
            Shape::Ellipse { a, b, .. } => (0..m)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / m as f64;
                    Point::new(c.x + a * t.cos(), c.y + b * t.sin())
                })
                .collect(),
            Shape::Rectangle { width, height, .. } => {
                let (hx, hy) = (0.5 * width, 0.5 * height);
                vec![
                    Point::new(c.x - hx, c.y - hy),
                    Point::new(c.x + hx, c.y - hy),
                    Point::new(c.x + hx, c.y + hy),
                    Point::new(c.x - hx, c.y + hy),
                ]
            }
            Shape::Stadium { length, radius, .. } => {
                let half = 0.5 * length;
                let cap = ((m as f64) * PI * radius / self.perimeter).ceil().max(4.0) as usize;
                let mut v = Vec::with_capacity(2 * cap + 2);
                // right cap from -pi/2 to pi/2, then left cap from pi/2 to 3pi/2
                for j in 0..=cap {
                    let t = -0.5 * PI + PI * j as f64 / cap as f64;
                    v.push(Point::new(c.x + half + radius * t.cos(), c.y + radius * t.sin()));
                }
                for j in 0..=cap {
                    let t = 0.5 * PI + PI * j as f64 / cap as f64;
                    v.push(Point::new(c.x - half + radius * t.cos(), c.y + radius * t.sin()));
                }
                v
            }
            Shape::Polygon(p) => return p.clone(),
        };
        Polygon::from_ccw_unchecked(verts)
    }

    /// Nearest-point style projection onto the exact boundary, used when
    /// refining meshes of curved domains. Straight boundary pieces are left alone.
    pub fn project_to_boundary(&self, p: Point) -> Point {
        let c = self.center();
        let d = p.sub(c);
        match &self.shape {
            Shape::Disc { radius, .. } => {
                let n = d.norm();
                if n == 0.0 {
                    p
                } else {
                    c.add(d.scale(radius / n))
                }
            }
            Shape::Ellipse { a, b, .. } => {
                let q = ((d.x / a).powi(2) + (d.y / b).powi(2)).sqrt();
                if q == 0.0 {
                    p
                } else {
                    c.add(d.scale(1.0 / q))
                }
            }
            Shape::Stadium { length, radius, .. } => {
                let half = 0.5 * length;
                if d.x.abs() <= half {
                    p
                } else {
                    let cc = Point::new(c.x + half * d.x.signum(), c.y);
                    let e = p.sub(cc);
                    let n = e.norm();
                    if n == 0.0 {
                        p
                    } else {
                        cc.add(e.scale(radius / n))
                    }
                }
            }
            Shape::Rectangle { .. } | Shape::Polygon(_) => p,
        }
    }

    /// Distance from `p` to the exact boundary of a convex shape, measured
    /// with the shape's implicit function (exact for discs, rectangles and stadiums).
    pub fn boundary_residual(&self, p: Point) -> f64 {
        let c = self.center();
        let d = p.sub(c);
        match &self.shape {
            Shape::Disc { radius, .. } => (d.norm() - radius).abs(),
            Shape::Ellipse { a, b, .. } => ((d.x / a).powi(2) + (d.y / b).powi(2) - 1.0).abs(),
            Shape::Rectangle { width, height, .. } => {
                let ex = (d.x.abs() - 0.5 * width).abs();
                let ey = (d.y.abs() - 0.5 * height).abs();
                if d.x.abs() <= 0.5 * width + 1e-12 && d.y.abs() <= 0.5 * height + 1e-12 {
                    ex.min(ey)
                } else {
                    f64::INFINITY
                }
            }
            Shape::Stadium { length, radius, .. } => {
                let qx = (d.x.abs() - 0.5 * length).max(0.0);
                (qx.hypot(d.y) - radius).abs()
            }
            Shape::Polygon(poly) => poly
                .edges()
                .map(|(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn translated(&self, by: Point) -> Domain {
        let shape = match &self.shape {
            Shape::Disc { center, radius } => Shape::Disc {
                center: center.add(by),
                radius: *radius,
            },
            Shape::Ellipse { center, a, b } => Shape::Ellipse {
                center: center.add(by),
                a: *a,
                b: *b,
            },
            Shape::Rectangle { center, width, height } => Shape::Rectangle {
                center: center.add(by),
                width: *width,
                height: *height,
            },
            Shape::Stadium { center, length, radius } => Shape::Stadium {
                center: center.add(by),
                length: *length,
                radius: *radius,
            },
            Shape::Polygon(p) => Shape::Polygon(p.translated(by)),
        };
        Domain::new(shape).expect("translation preserves validity")
    }

    /// Dilation about the origin.
    pub fn scaled(&self, s: f64) -> Result<Domain> {
        positive("scale", s)?;
        let shape = match &self.shape {
            Shape::Disc { center, radius } => Shape::Disc {
                center: center.scale(s),
                radius: radius * s,
            },
            Shape::Ellipse { center, a, b } => Shape::Ellipse {
                center: center.scale(s),
                a: a * s,
                b: b * s,
            },
            Shape::Rectangle { center, width, height } => Shape::Rectangle {
                center: center.scale(s),
                width: width * s,
                height: height * s,
            },
            Shape::Stadium { center, length, radius } => Shape::Stadium {
                center: center.scale(s),
                length: length * s,
                radius: radius * s,
            },
            Shape::Polygon(p) => Shape::Polygon(p.scaled(s)),
        };
        Domain::new(shape)
    }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b.sub(a);
    let s = (p.sub(a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    p.dist(a.add(d.scale(s)))
}

fn fmt_center(f: &mut fmt::Formatter<'_>, c: Point) -> fmt::Result {
    if c.x != 0.0 || c.y != 0.0 {
        write!(f, " cx={} cy={}", c.x, c.y)?;
    }
    Ok(())
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Disc { center, radius } => {
                write!(f, "disc r={radius}")?;
                fmt_center(f, *center)
            }
            Shape::Ellipse { center, a, b } => {
                write!(f, "ellipse a={a} b={b}")?;
                fmt_center(f, *center)
            }
            Shape::Rectangle { center, width, height } => {
                write!(f, "rect w={width} h={height}")?;
                fmt_center(f, *center)
            }
            Shape::Stadium { center, length, radius } => {
                write!(f, "stadium l={length} r={radius}")?;
                fmt_center(f, *center)
            }
            Shape::Polygon(p) => {
                write!(f, "polygon")?;
                for v in p.vertices() {
                    write!(f, " {},{}", v.x, v.y)?;
                }
                Ok(())
            }
        }
    }
}

/// Parses the shape mini-language: `disc r=1`, `ellipse a=2 b=0.5`,
/// `rect w=2 h=0.5`, `stadium l=1 r=0.5`, `polygon x1,y1 x2,y2 ...`.
/// Parametric shapes accept optional `cx=` / `cy=` offsets.
impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let kind = tokens
            .next()
            .ok_or_else(|| Error::InvalidDomain("empty domain spec".into()))?;
        let rest: Vec<&str> = tokens.collect();
        if kind == "polygon" {
            let mut verts = Vec::with_capacity(rest.len());
            for tok in rest {
                let (x, y) = tok
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidDomain(format!("expected x,y pair, got `{tok}`")))?;
                verts.push(Point::new(parse_num(x)?, parse_num(y)?));
            }
            return Domain::polygon(verts);
        }
        let mut kv: Vec<(&str, f64)> = Vec::new();
        for tok in rest {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidDomain(format!("expected key=value, got `{tok}`")))?;
            if kv.iter().any(|(key, _)| *key == k) {
                return Err(Error::InvalidDomain(format!("duplicate parameter `{k}`")));
            }
            kv.push((k, parse_num(v)?));
        }
        let get = |k: &str| kv.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
        let need = |k: &str| {
            get(k).ok_or_else(|| Error::InvalidDomain(format!("`{kind}` requires parameter `{k}`")))
        };
        let center = Point::new(get("cx").unwrap_or(0.0), get("cy").unwrap_or(0.0));
        let (shape, allowed): (Shape, &[&str]) = match kind {
            "disc" => (
                Shape::Disc {
                    center,
                    radius: need("r")?,
                },
                &["r", "cx", "cy"],
            ),
            "ellipse" => (
                Shape::Ellipse {
                    center,
                    a: need("a")?,
                    b: need("b")?,
                },
                &["a", "b", "cx", "cy"],
            ),
            "rect" | "rectangle" => (
                Shape::Rectangle {
                    center,
                    width: need("w")?,
                    height: need("h")?,
                },
                &["w", "h", "cx", "cy"],
            ),
            "stadium" => (
                Shape::Stadium {
                    center,
                    length: need("l")?,
                    radius: need("r")?,
                },
                &["l", "r", "cx", "cy"],
            ),
            other => return Err(Error::InvalidDomain(format!("unknown shape `{other}`"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::InvalidDomain(format!("unknown parameter `{k}` for `{kind}`")));
        }
        Domain::new(shape)
    }
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidDomain(format!("not a number: `{s}`")))
}
