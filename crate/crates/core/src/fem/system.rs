use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::mesh::Mesh;
use super::sparse::{dot, pcg, CsrMatrix};

/// Right-hand side of the Robin–Poisson problem.
#[derive(Clone)]
pub enum SourceSpec {
    Constant(f64),
    /// Closed-form expression of (x, y).
    Expression {
        label: String,
        f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    },
    /// One value per mesh node, interpolated linearly.
    Nodal(Vec<f64>),
    /// Profile of the distance to the mesh centroid.
    Radial {
        label: String,
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Constant(c) => write!(f, "Constant({c})"),
            SourceSpec::Expression { label, .. } => write!(f, "Expression({label})"),
            SourceSpec::Nodal(v) => write!(f, "Nodal({} values)", v.len()),
            SourceSpec::Radial { label, .. } => write!(f, "Radial({label})"),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Constant(c) if *c == 1.0 => write!(f, "constant"),
            SourceSpec::Constant(c) => write!(f, "constant={c}"),
            SourceSpec::Expression { label, .. } | SourceSpec::Radial { label, .. } => write!(f, "{label}"),
            SourceSpec::Nodal(v) => write!(f, "nodal[{}]", v.len()),
        }
    }
}

impl SourceSpec {
    /// Catalog lookup: `constant`, `constant=C`, `radial` (2 − |x − centroid|), `bump`.
    pub fn from_name(name: &str) -> Result<SourceSpec> {
        match name {
            "constant" | "one" => Ok(SourceSpec::Constant(1.0)),
            "radial" => Ok(SourceSpec::radial_cone()),
            "bump" => Ok(SourceSpec::tensor_bump()),
            other => {
                if let Some(v) = other.strip_prefix("constant=") {
                    let c: f64 = v
                        .parse()
                        .map_err(|_| Error::InvalidSource(format!("bad constant `{v}`")))?;
                    if !(c > 0.0) || !c.is_finite() {
                        return Err(Error::InvalidSource(format!("constant must be positive, got {c}")));
                    }
                    return Ok(SourceSpec::Constant(c));
                }
                Err(Error::InvalidSource(format!("unknown source `{other}`")))
            }
        }
    }

    pub fn radial_cone() -> SourceSpec {
        SourceSpec::Radial {
            label: "radial".into(),
            profile: Arc::new(|r: f64| (2.0 - r).max(0.0)),
        }
    }

    /// Off-center product of Gaussians; not symmetric about any axis of the catalog shapes.
    pub fn tensor_bump() -> SourceSpec {
        SourceSpec::Expression {
            label: "bump".into(),
            f: Arc::new(|p: Point| {
                0.25 + (-(p.x - 0.3).powi(2) / 0.5).exp() * (-(p.y - 0.1).powi(2) / 0.2).exp()
            }),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SourceSpec::Constant(_))
    }

    fn point_eval(&self, centroid: Point) -> impl Fn(Point) -> f64 + '_ {
        move |p: Point| match self {
            SourceSpec::Constant(c) => *c,
            SourceSpec::Expression { f, .. } => f(p),
            SourceSpec::Radial { profile, .. } => profile(p.dist(centroid)),
            SourceSpec::Nodal(_) => unreachable!("nodal sources are evaluated from node values"),
        }
    }

    /// Source values at the nodes.
    pub fn nodal_values(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        let v = match self {
            SourceSpec::Nodal(v) => {
                if v.len() != mesh.nodes().len() {
                    return Err(Error::InvalidSource(format!(
                        "{} nodal values for {} nodes",
                        v.len(),
                        mesh.nodes().len()
                    )));
                }
                v.clone()
            }
            _ => {
                let f = self.point_eval(mesh.centroid());
                mesh.nodes().iter().map(|p| f(*p)).collect()
            }
        };
        Ok(v)
    }

    /// Values at the three edge midpoints of every triangle (edges ab, bc, ca).
    fn midpoint_values(&self, mesh: &Mesh, nodal: &[f64]) -> Vec<[f64; 3]> {
        let centroid = mesh.centroid();
        (0..mesh.triangles().len())
            .map(|t| {
                let [a, b, c] = mesh.triangles()[t];
                match self {
                    SourceSpec::Nodal(_) => [
                        0.5 * (nodal[a] + nodal[b]),
                        0.5 * (nodal[b] + nodal[c]),
                        0.5 * (nodal[c] + nodal[a]),
                    ],
                    _ => {
                        let f = self.point_eval(centroid);
                        let [p, q, r] = mesh.triangle_points(t);
                        [f(p.lerp(q, 0.5)), f(q.lerp(r, 0.5)), f(r.lerp(p, 0.5))]
                    }
                }
            })
            .collect()
    }

    fn validate(&self, nodal: &[f64], mids: &[[f64; 3]]) -> Result<()> {
        let all = nodal.iter().chain(mids.iter().flatten());
        let mut positive = false;
        for v in all {
            if !v.is_finite() {
                return Err(Error::InvalidSource("non-finite value".into()));
            }
            if *v < 0.0 {
                return Err(Error::InvalidSource(format!("negative value {v}")));
            }
            positive |= *v > 0.0;
        }
        if !positive {
            return Err(Error::InvalidSource("source is identically zero".into()));
        }
        Ok(())
    }
}

/// Robin operator and load vector on a mesh.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub mesh: Arc<Mesh>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub beta: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", format!("must be positive, got {beta}")))
    }
}

fn gradients(p: [Point; 3]) -> ([Point; 3], f64) {
    let area = 0.5 * p[1].sub(p[0]).cross(p[2].sub(p[0]));
    let mut g = [Point::default(); 3];
    for k in 0..3 {
        let e = p[(k + 2) % 3].sub(p[(k + 1) % 3]);
        // gradient of the hat function at node k
        g[k] = Point::new(-e.y / (2.0 * area), e.x / (2.0 * area));
    }
    (g, area)
}

pub fn assemble_stiffness(mesh: &Mesh) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = gradients(mesh.triangle_points(t));
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], area * g[a].dot(g[b])));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.nodes().len(), trip)
}

/// Exact boundary mass ∮ φ_i φ_j over boundary edges.
pub fn assemble_boundary_mass(mesh: &Mesh) -> CsrMatrix {
    let mut trip = Vec::with_capacity(4 * mesh.boundary().len());
    for e in mesh.boundary() {
        let [i, j] = e.nodes;
        let l = e.length;
        trip.push((i, i, l / 3.0));
        trip.push((j, j, l / 3.0));
        trip.push((i, j, l / 6.0));
        trip.push((j, i, l / 6.0));
    }
    CsrMatrix::from_triplets(mesh.nodes().len(), trip)
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { area / 6.0 } else { area / 12.0 };
                trip.push((tri[a], tri[b], w));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.nodes().len(), trip)
}

pub fn assemble_robin_operator(mesh: &Mesh, beta: f64) -> Result<CsrMatrix> {
    check_beta(beta)?;
    Ok(assemble_stiffness(mesh).add_scaled(beta, &assemble_boundary_mass(mesh)))
}

/// Load vector ∫ f φ_i by the edge-midpoint rule.
pub fn assemble_load(mesh: &Mesh, f: &SourceSpec) -> Result<Vec<f64>> {
    let nodal = f.nodal_values(mesh)?;
    let mids = f.midpoint_values(mesh, &nodal);
    f.validate(&nodal, &mids)?;
    let mut load = vec![0.0; mesh.nodes().len()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let w = mesh.triangle_area(t) / 6.0;
        let [ab, bc, ca] = mids[t];
        load[tri[0]] += w * (ab + ca);
        load[tri[1]] += w * (ab + bc);
        load[tri[2]] += w * (bc + ca);
    }
    Ok(load)
}

pub fn assemble_robin_system(mesh: &Arc<Mesh>, f: &SourceSpec, beta: f64) -> Result<SparseSystem> {
    let matrix = assemble_robin_operator(mesh, beta)?;
    let rhs = assemble_load(mesh, f)?;
    Ok(SparseSystem {
        mesh: Arc::clone(mesh),
        matrix,
        rhs,
        beta,
    })
}

/// Nodal values of a piecewise-linear function.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    min: f64,
    max: f64,
}

impl ScalarField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes().len() {
            return Err(Error::param(
                "values",
                format!("{} values for {} nodes", values.len(), mesh.nodes().len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "non-finite nodal value"));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { mesh, values, min, max })
    }

    pub fn interpolate(mesh: &Arc<Mesh>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let v = mesh.nodes().iter().map(|p| f(*p)).collect();
        Self::new(Arc::clone(mesh), v)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn triangle_values(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.mesh.triangles()[t];
        [self.values[a], self.values[b], self.values[c]]
    }

    /// Two-column text `x y value` per node.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for (p, v) in self.mesh.nodes().iter().zip(&self.values) {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, v);
        }
        s
    }
}

pub fn solve_poisson(sys: &SparseSystem) -> Result<ScalarField> {
    let out = pcg(&sys.matrix, &sys.rhs, None, 1e-10, 20 * sys.rhs.len() + 1000)?;
    ScalarField::new(Arc::clone(&sys.mesh), out.x)
}

/// Assemble and solve in one call.
pub fn solve_robin(mesh: &Arc<Mesh>, f: &SourceSpec, beta: f64) -> Result<ScalarField> {
    solve_poisson(&assemble_robin_system(mesh, f, beta)?)
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    /// Positive, unit L² norm.
    pub field: ScalarField,
    pub iterations: usize,
}

/// Smallest Robin eigenvalue by unshifted inverse power iteration.
pub fn principal_robin_eigenpair(mesh: &Arc<Mesh>, beta: f64) -> Result<EigenPair> {
    let a = assemble_robin_operator(mesh, beta)?;
    let m = assemble_mass(mesh);
    let n = mesh.nodes().len();
    let mut w = vec![1.0; n];
    let scale = m.bilinear(&w, &w).sqrt();
    w.iter_mut().for_each(|x| *x /= scale);
    let mut lambda = a.bilinear(&w, &w);
    let mut history = vec![lambda];
    const MAX_ITER: usize = 500;
    for it in 1..=MAX_ITER {
        let rhs = m.mul(&w);
        let out = pcg(&a, &rhs, Some(&w), 1e-13, 20 * n + 1000)?;
        let mut next = out.x;
        let norm = m.bilinear(&next, &next).sqrt();
        next.iter_mut().for_each(|x| *x /= norm);
        let new_lambda = a.bilinear(&next, &next);
        w = next;
        history.push(new_lambda);
        let done = (new_lambda - lambda).abs() <= 1e-10 * new_lambda.abs();
        lambda = new_lambda;
        if done {
            if dot(&w, &rhs) < 0.0 || w.iter().sum::<f64>() < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            let field = ScalarField::new(Arc::clone(mesh), w)?;
            return Ok(EigenPair {
                lambda,
                field,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "inverse power iteration",
        iterations: MAX_ITER,
        residual: (history[history.len() - 1] - history[history.len() - 2]).abs(),
        history,
    })
}

/// Rayleigh quotient of a nodal vector for the Robin operator.
pub fn rayleigh_quotient(mesh: &Mesh, beta: f64, w: &[f64]) -> Result<f64> {
    let a = assemble_robin_operator(mesh, beta)?;
    let m = assemble_mass(mesh);
    Ok(a.bilinear(w, w) / m.bilinear(w, w))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integral {
    /// ∫_Ω u
    Domain,
    /// ∫_Ω |u|^p, p ≥ 1
    Lp(f64),
    /// ∮_∂Ω u
    Boundary,
}

/// Complete homogeneous symmetric polynomial of degree p in three variables.
fn complete_homogeneous(p: u32, a: f64, b: f64, c: f64) -> f64 {
    let mut s = 0.0;
    let mut ai = 1.0;
    for i in 0..=p {
        let mut bj = 1.0;
        for j in 0..=(p - i) {
            s += ai * bj * c.powi((p - i - j) as i32);
            bj *= b;
        }
        ai *= a;
    }
    s
}

// degree-5 rule on the reference triangle: barycentric points and weights (sum 1)
const DUNAVANT7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059_715_871_789_770, 0.470_142_064_105_115, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.059_715_871_789_770, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_770], 0.132_394_152_788_506),
    ([0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456], 0.125_939_180_544_827),
    ([0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456], 0.125_939_180_544_827),
    ([0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087], 0.125_939_180_544_827),
];

/// ∫_T |u|^p for the linear interpolant of `v` on a triangle of area `area`.
pub fn triangle_power_integral(area: f64, v: [f64; 3], p: f64) -> f64 {
    let same_sign = v.iter().all(|x| *x >= 0.0) || v.iter().all(|x| *x <= 0.0);
    if same_sign && p.fract() == 0.0 && p <= 64.0 {
        let k = p as u32;
        // 2 A p! / (p+2)! = 2A / ((p+1)(p+2))
        let w = 2.0 * area / ((k as f64 + 1.0) * (k as f64 + 2.0));
        let [a, b, c] = v.map(f64::abs);
        return w * complete_homogeneous(k, a, b, c);
    }
    area * DUNAVANT7
        .iter()
        .map(|(l, w)| w * (l[0] * v[0] + l[1] * v[1] + l[2] * v[2]).abs().powf(p))
        .sum::<f64>()
}

pub fn integrate_field(u: &ScalarField, mode: Integral) -> Result<f64> {
    let mesh = u.mesh();
    Ok(match mode {
        Integral::Domain => (0..mesh.triangles().len())
            .map(|t| mesh.triangle_area(t) * u.triangle_values(t).iter().sum::<f64>() / 3.0)
            .sum(),
        Integral::Lp(p) => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::param("p", format!("must satisfy p >= 1, got {p}")));
            }
            (0..mesh.triangles().len())
                .map(|t| triangle_power_integral(mesh.triangle_area(t), u.triangle_values(t), p))
                .sum()
        }
        Integral::Boundary => mesh
            .boundary()
            .iter()
            .map(|e| 0.5 * e.length * (u.values()[e.nodes[0]] + u.values()[e.nodes[1]]))
            .sum(),
    })
}

/// ∫_Ω g h for two fields on the same mesh (exact for the interpolants).
pub fn integrate_product(g: &ScalarField, h: &ScalarField) -> Result<f64> {
    if !Arc::ptr_eq(g.mesh(), h.mesh()) && g.mesh().as_ref() != h.mesh().as_ref() {
        return Err(Error::param("fields", "fields live on different meshes"));
    }
    let mesh = g.mesh();
    let mut s = 0.0;
    for t in 0..mesh.triangles().len() {
        let a = g.triangle_values(t);
        let b = h.triangle_values(t);
        let cross: f64 = (0..3).map(|i| (0..3).map(|j| a[i] * b[j]).sum::<f64>()).sum();
        let diag: f64 = (0..3).map(|i| a[i] * b[i]).sum();
        s += mesh.triangle_area(t) / 12.0 * (cross + diag);
    }
    Ok(s)
}
