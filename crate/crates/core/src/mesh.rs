//! Triangulated planar domains whose boundary is split into a Dirichlet part
//! (`Gamma0`) and a dynamic Wentzell part (`Gamma1`).
//!
//! Vertex indices are 0-based everywhere, in memory and in files.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which part of the boundary an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    /// Homogeneous Dirichlet part.
    Gamma0,
    /// Part carrying the Laplace-Beltrami / nonlinear flux condition.
    Gamma1,
}

impl BoundaryTag {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BoundaryTag::Gamma0),
            1 => Some(BoundaryTag::Gamma1),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BoundaryTag::Gamma0 => 0,
            BoundaryTag::Gamma1 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    /// Chord length of the edge.
    pub length: f64,
}

/// A 2-D triangulation with tagged boundary edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

/// A violated mesh invariant, with the offending entity.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    VertexOutOfRange { entity: &'static str, index: usize, vertex: usize },
    NonPositiveArea { triangle: usize, area: f64 },
    RepeatedVertex { triangle: usize },
    NonManifoldBoundary { edge: usize, adjacent_triangles: usize },
    DuplicateBoundaryEdge { edge: usize, first: usize },
    UntaggedBoundary { vertices: [usize; 2] },
    OpenBoundaryLoop { vertex: usize, degree: usize },
    ZeroLengthEdge { edge: usize },
    Gamma0MeasureZero,
    Gamma1Empty,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::VertexOutOfRange { entity, index, vertex } => {
                write!(f, "{entity} {index} references missing vertex {vertex}")
            }
            Diagnostic::NonPositiveArea { triangle, area } => {
                write!(f, "triangle {triangle} has non-positive signed area {area:e}")
            }
            Diagnostic::RepeatedVertex { triangle } => {
                write!(f, "triangle {triangle} repeats a vertex")
            }
            Diagnostic::NonManifoldBoundary { edge, adjacent_triangles } => {
                write!(f, "non-manifold boundary: boundary edge {edge} belongs to {adjacent_triangles} triangles")
            }
            Diagnostic::DuplicateBoundaryEdge { edge, first } => {
                write!(f, "boundary edge {edge} duplicates boundary edge {first}")
            }
            Diagnostic::UntaggedBoundary { vertices } => write!(
                f,
                "untagged boundary: edge ({}, {}) lies on one triangle but has no tag",
                vertices[0], vertices[1]
            ),
            Diagnostic::OpenBoundaryLoop { vertex, degree } => {
                write!(f, "open boundary loop: vertex {vertex} touches {degree} boundary edges")
            }
            Diagnostic::ZeroLengthEdge { edge } => write!(f, "boundary edge {edge} has zero length"),
            Diagnostic::Gamma0MeasureZero => write!(f, "GAMMA0 measure zero"),
            Diagnostic::Gamma1Empty => write!(f, "GAMMA1 empty"),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    Parameter(String),
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh validation failed: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh from raw connectivity, computing edge lengths. No validation.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        edges: Vec<([usize; 2], BoundaryTag)>,
    ) -> Self {
        let boundary_edges = edges
            .into_iter()
            .map(|(v, tag)| {
                let length = match (vertices.get(v[0]), vertices.get(v[1])) {
                    (Some(&a), Some(&b)) => distance(a, b),
                    _ => f64::NAN,
                };
                BoundaryEdge { vertices: v, tag, length }
            })
            .collect();
        Mesh { vertices, triangles, boundary_edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn tagged_length(&self, tag: BoundaryTag) -> f64 {
        self.boundary_edges.iter().filter(|e| e.tag == tag).map(|e| e.length).sum()
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Sorted list of every vertex touching a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            on[e.vertices[0]] = true;
            on[e.vertices[1]] = true;
        }
        (0..on.len()).filter(|&i| on[i]).collect()
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let nv = self.vertices.len();

        let mut indices_ok = true;
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    diags.push(Diagnostic::VertexOutOfRange { entity: "triangle", index: t, vertex: v });
                    indices_ok = false;
                }
            }
        }
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            for &v in &edge.vertices {
                if v >= nv {
                    diags.push(Diagnostic::VertexOutOfRange { entity: "boundary edge", index: e, vertex: v });
                    indices_ok = false;
                }
            }
        }
        if !indices_ok {
            return diags;
        }

        for (t, tri) in self.triangles.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                diags.push(Diagnostic::RepeatedVertex { triangle: t });
                continue;
            }
            let area = self.triangle_area(t);
            if area.is_nan() || area <= 0.0 {
                diags.push(Diagnostic::NonPositiveArea { triangle: t, area });
            }
        }

        // Edge -> number of incident triangles.
        let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *incidence.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }

        let mut listed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            let key = edge_key(edge.vertices[0], edge.vertices[1]);
            if let Some(&first) = listed.get(&key) {
                diags.push(Diagnostic::DuplicateBoundaryEdge { edge: e, first });
                continue;
            }
            listed.insert(key, e);
            *degree.entry(key.0).or_insert(0) += 1;
            *degree.entry(key.1).or_insert(0) += 1;
            let count = incidence.get(&key).copied().unwrap_or(0);
            if count != 1 {
                diags.push(Diagnostic::NonManifoldBoundary { edge: e, adjacent_triangles: count });
            }
            if !(edge.length > 0.0) {
                diags.push(Diagnostic::ZeroLengthEdge { edge: e });
            }
        }

        let mut untagged: Vec<_> = incidence
            .iter()
            .filter(|(key, &count)| count == 1 && !listed.contains_key(key))
            .map(|(key, _)| [key.0, key.1])
            .collect();
        untagged.sort_unstable();
        diags.extend(untagged.into_iter().map(|vertices| Diagnostic::UntaggedBoundary { vertices }));

        for (&vertex, &d) in &degree {
            if d != 2 {
                diags.push(Diagnostic::OpenBoundaryLoop { vertex, degree: d });
            }
        }

        if !(self.tagged_length(BoundaryTag::Gamma0) > 0.0) {
            diags.push(Diagnostic::Gamma0MeasureZero);
        }
        if self.edges_with_tag(BoundaryTag::Gamma1).next().is_none() {
            diags.push(Diagnostic::Gamma1Empty);
        }
        diags
    }

    /// Serializes to the plain-text mesh format read by [`load_mesh`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "vertices {}", self.vertices.len()).unwrap();
        for v in &self.vertices {
            writeln!(out, "{} {}", v[0], v[1]).unwrap();
        }
        writeln!(out, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        writeln!(out, "boundary_edges {}", self.boundary_edges.len()).unwrap();
        for e in &self.boundary_edges {
            writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.code()).unwrap();
        }
        out
    }
}

/// Every violated mesh invariant; empty for a valid mesh.
pub fn validate_mesh(mesh: &Mesh) -> Vec<Diagnostic> {
    mesh.validate()
}

/// Structured annulus `r0 < |x| < r_outer`: inner circle tagged `Gamma0`, outer `Gamma1`.
///
/// Vertex `(i, j)` sits on ring `i` (radius `r0 + i (R - r0) / n_r`) at angle
/// `2 pi j / n_theta` and has index `i * n_theta + j`.
pub fn generate_annulus_mesh(r0: f64, r_outer: f64, n_r: usize, n_theta: usize) -> Result<Mesh, MeshError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(MeshError::Parameter(format!("inner radius must be positive, got {r0}")));
    }
    if !(r_outer > r0 && r_outer.is_finite()) {
        return Err(MeshError::Parameter(format!("outer radius {r_outer} must exceed inner radius {r0}")));
    }
    if n_r < 2 {
        return Err(MeshError::Parameter(format!("need at least 2 radial divisions, got {n_r}")));
    }
    if n_theta < 8 || !n_theta.is_multiple_of(2) {
        return Err(MeshError::Parameter(format!("angular divisions must be even and at least 8, got {n_theta}")));
    }

    let index = |i: usize, j: usize| i * n_theta + (j % n_theta);
    let mut vertices = Vec::with_capacity((n_r + 1) * n_theta);
    for i in 0..=n_r {
        let r = r0 + (r_outer - r0) * i as f64 / n_r as f64;
        for j in 0..n_theta {
            let theta = 2.0 * PI * j as f64 / n_theta as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n_r * n_theta);
    for i in 0..n_r {
        for j in 0..n_theta {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut edges = Vec::with_capacity(2 * n_theta);
    for j in 0..n_theta {
        // Inner loop runs clockwise, outer counterclockwise: the domain stays on the left.
        edges.push(([index(0, j + 1), index(0, j)], BoundaryTag::Gamma0));
    }
    for j in 0..n_theta {
        edges.push(([index(n_r, j), index(n_r, j + 1)], BoundaryTag::Gamma1));
    }
    Ok(Mesh::from_parts(vertices, triangles, edges))
}

/// Parses the plain-text mesh format and validates the result.
pub fn load_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mesh = parse_mesh(text)?;
    let diags = mesh.validate();
    if diags.is_empty() {
        Ok(mesh)
    } else {
        Err(MeshError::Invalid(diags))
    }
}

pub fn save_mesh(mesh: &Mesh) -> String {
    mesh.to_text()
}

fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    fn header(
        name: &str,
        lines: &mut dyn Iterator<Item = (usize, &str)>,
        after: usize,
    ) -> Result<(usize, usize), MeshError> {
        let (line, content) = lines.next().ok_or(MeshError::Parse {
            line: after + 1,
            message: format!("expected `{name} <count>`, found end of input"),
        })?;
        let mut parts = content.split_whitespace();
        if parts.next() != Some(name) {
            return Err(MeshError::Parse { line, message: format!("expected `{name} <count>`") });
        }
        let count = parts
            .next()
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or(MeshError::Parse { line, message: format!("bad count after `{name}`") })?;
        if parts.next().is_some() {
            return Err(MeshError::Parse { line, message: "trailing tokens".into() });
        }
        Ok((line, count))
    }

    fn fields<'a, const N: usize>(
        lines: &mut dyn Iterator<Item = (usize, &'a str)>,
        after: usize,
        what: &str,
    ) -> Result<(usize, [&'a str; N]), MeshError> {
        let (line, content) =
            lines.next().ok_or(MeshError::Parse { line: after + 1, message: format!("missing {what} record") })?;
        let parts: Vec<&str> = content.split_whitespace().collect();
        let arr: [&str; N] = parts.try_into().map_err(|p: Vec<&str>| MeshError::Parse {
            line,
            message: format!("expected {N} fields for {what}, found {}", p.len()),
        })?;
        Ok((line, arr))
    }

    fn number<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, MeshError> {
        s.parse::<T>().map_err(|_| MeshError::Parse { line, message: format!("bad number `{s}`") })
    }

    let (mut cursor, nv) = header("vertices", &mut lines, 0)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, [x, y]) = fields::<2>(&mut lines, cursor, "vertex")?;
        cursor = line;
        let p = [number::<f64>(x, line)?, number::<f64>(y, line)?];
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(MeshError::Parse { line, message: "non-finite coordinate".into() });
        }
        vertices.push(p);
    }
    let check = |v: usize, line: usize| {
        if v < nv {
            Ok(v)
        } else {
            Err(MeshError::Parse { line, message: format!("vertex index {v} out of range (have {nv})") })
        }
    };

    let (mut cursor, nt) = header("triangles", &mut lines, cursor)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, [a, b, c]) = fields::<3>(&mut lines, cursor, "triangle")?;
        cursor = line;
        triangles.push([
            check(number(a, line)?, line)?,
            check(number(b, line)?, line)?,
            check(number(c, line)?, line)?,
        ]);
    }

    let (mut cursor, ne) = header("boundary_edges", &mut lines, cursor)?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, [a, b, t]) = fields::<3>(&mut lines, cursor, "boundary edge")?;
        cursor = line;
        let tag = number::<u8>(t, line)
            .ok()
            .and_then(BoundaryTag::from_code)
            .ok_or(MeshError::Parse { line, message: format!("boundary tag must be 0 or 1, got `{t}`") })?;
        edges.push(([check(number(a, line)?, line)?, check(number(b, line)?, line)?], tag));
    }
    if let Some((line, _)) = lines.next() {
        return Err(MeshError::Parse { line, message: "unexpected content after boundary edges".into() });
    }
    Ok(Mesh::from_parts(vertices, triangles, edges))
}

/// Partition of vertices into free and Dirichlet-constrained degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub free_dofs: Vec<usize>,
    pub constrained_dofs: Vec<usize>,
    /// Vertices on the closure of `Gamma1` (endpoints of `Gamma1` edges).
    pub boundary_dofs: Vec<usize>,
    constrained: Vec<bool>,
}

impl DofMap {
    pub fn is_constrained(&self, v: usize) -> bool {
        self.constrained[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.constrained.len()
    }

    /// Free vertices on the closure of `Gamma1`: where the nonlinear boundary terms live.
    pub fn free_boundary_dofs(&self) -> Vec<usize> {
        self.boundary_dofs.iter().copied().filter(|&v| !self.constrained[v]).collect()
    }
}

/// Every endpoint of a `Gamma0` edge is constrained, including corners shared with `Gamma1`.
pub fn build_dof_map(mesh: &Mesh) -> DofMap {
    let n = mesh.num_vertices();
    let mut constrained = vec![false; n];
    let mut on_gamma1 = vec![false; n];
    for e in &mesh.boundary_edges {
        let mark = match e.tag {
            BoundaryTag::Gamma0 => &mut constrained,
            BoundaryTag::Gamma1 => &mut on_gamma1,
        };
        mark[e.vertices[0]] = true;
        mark[e.vertices[1]] = true;
    }
    DofMap {
        free_dofs: (0..n).filter(|&v| !constrained[v]).collect(),
        constrained_dofs: (0..n).filter(|&v| constrained[v]).collect(),
        boundary_dofs: (0..n).filter(|&v| on_gamma1[v]).collect(),
        constrained,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_TRIANGLE: &str = "\
# smallest valid mesh
vertices 3
0 0
1 0
0 1
triangles 1
0 1 2
boundary_edges 3
0 1 0
1 2 1
2 0 1
";

    #[test]
    fn annulus_counts() {
        let m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        assert_eq!(m.vertices.len(), 24);
        assert_eq!(m.triangles.len(), 32);
        assert_eq!(m.edges_with_tag(BoundaryTag::Gamma0).count(), 8);
        assert_eq!(m.edges_with_tag(BoundaryTag::Gamma1).count(), 8);
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let expected = 2.0 * 2.0 * 8.0 * (PI / 8.0).sin();
        assert!((m.tagged_length(BoundaryTag::Gamma1) - expected).abs() < 1e-12);
        assert!((expected - 12.2459).abs() < 1e-4);
    }

    #[test]
    fn annulus_rejects_bad_parameters() {
        assert!(matches!(generate_annulus_mesh(1.0, 1.0, 2, 8), Err(MeshError::Parameter(_))));
        assert!(generate_annulus_mesh(0.0, 1.0, 2, 8).is_err());
        assert!(generate_annulus_mesh(1.0, 2.0, 1, 8).is_err());
        assert!(generate_annulus_mesh(1.0, 2.0, 2, 6).is_err());
        assert!(generate_annulus_mesh(1.0, 2.0, 2, 9).is_err());
    }

    #[test]
    fn annulus_area_converges() {
        let m = generate_annulus_mesh(1.0, 2.0, 32, 128).unwrap();
        let exact = PI * (4.0 - 1.0);
        assert!((m.total_area() - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn load_smallest_mesh() {
        let m = load_mesh(SINGLE_TRIANGLE).unwrap();
        assert_eq!(m.triangles.len(), 1);
        let dofs = build_dof_map(&m);
        // Vertices 0 and 1 are on Gamma0, vertex 2 is the only free one.
        assert_eq!(dofs.constrained_dofs, vec![0, 1]);
        assert_eq!(dofs.free_dofs, vec![2]);
        assert_eq!(dofs.boundary_dofs, vec![0, 1, 2]);
    }

    #[test]
    fn all_gamma1_is_rejected() {
        let text = SINGLE_TRIANGLE.replace("0 1 0\n", "0 1 1\n");
        match load_mesh(&text) {
            Err(MeshError::Invalid(d)) => {
                assert!(d.contains(&Diagnostic::Gamma0MeasureZero));
                assert!(MeshError::Invalid(d).to_string().contains("GAMMA0 measure zero"));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_index_is_parse_error() {
        let text = SINGLE_TRIANGLE.replace("0 1 2\n", "0 1 7\n");
        match load_mesh(&text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn garbage_is_parse_error() {
        assert!(matches!(load_mesh("vertices x\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(load_mesh(""), Err(MeshError::Parse { .. })));
        let truncated = "vertices 2\n0 0\n";
        assert!(matches!(load_mesh(truncated), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn inverted_triangle_is_named() {
        let mut m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        m.triangles[5].swap(1, 2);
        let d = m.validate();
        assert!(d.iter().any(|d| matches!(d, Diagnostic::NonPositiveArea { triangle: 5, .. })), "{d:?}");
    }

    #[test]
    fn boundary_edge_on_two_triangles() {
        // Two triangles sharing edge (0, 2); listing it as boundary is non-manifold.
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![
                ([0, 1], BoundaryTag::Gamma0),
                ([1, 2], BoundaryTag::Gamma1),
                ([2, 3], BoundaryTag::Gamma1),
                ([3, 0], BoundaryTag::Gamma1),
                ([0, 2], BoundaryTag::Gamma1),
            ],
        );
        let d = m.validate();
        assert!(d.iter().any(|d| matches!(d, Diagnostic::NonManifoldBoundary { edge: 4, adjacent_triangles: 2 })));
        assert!(d.iter().any(|d| d.to_string().starts_with("non-manifold boundary")));
    }

    #[test]
    fn missing_boundary_edge_is_reported() {
        let mut m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        m.boundary_edges.pop();
        let d = m.validate();
        assert!(d.iter().any(|d| matches!(d, Diagnostic::UntaggedBoundary { .. })));
        assert!(d.iter().any(|d| matches!(d, Diagnostic::OpenBoundaryLoop { .. })));
    }

    #[test]
    fn annulus_dofs() {
        let m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        let dofs = build_dof_map(&m);
        assert_eq!(dofs.constrained_dofs, (0..8).collect::<Vec<_>>());
        assert_eq!(dofs.free_dofs.len(), 16);
        assert_eq!(dofs.boundary_dofs, (16..24).collect::<Vec<_>>());
        assert_eq!(dofs.free_boundary_dofs(), dofs.boundary_dofs);
    }

    #[test]
    fn corner_vertex_is_constrained() {
        // Unit square, bottom edge Dirichlet: corners 0 and 1 join GAMMA0 and GAMMA1.
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![
                ([0, 1], BoundaryTag::Gamma0),
                ([1, 2], BoundaryTag::Gamma1),
                ([2, 3], BoundaryTag::Gamma1),
                ([3, 0], BoundaryTag::Gamma1),
            ],
        );
        assert!(m.validate().is_empty());
        let dofs = build_dof_map(&m);
        assert!(dofs.is_constrained(0) && dofs.is_constrained(1));
        assert_eq!(dofs.free_dofs, vec![2, 3]);
        assert_eq!(dofs.free_boundary_dofs(), vec![2, 3]);
    }
}
