//! Conic surfaces and their cone-to-cone geodesic digraph.
//!
//! A surface is described by its cone points (each with the total angle of
//! its link circle) and by the directed geodesics joining them. Every
//! directed geodesic `e` carries its reversal `ē`; the digraph has an arc
//! `f → e` whenever `f` arrives at the cone point `e` departs from.
//!
//! Link angles (`theta_from`, `theta_to`) are measured counterclockwise from
//! a fixed reference ray of each cone point and stored in `[0, A)`. An edge's
//! `theta_to` is the direction, seen from its arrival point, along which the
//! edge comes in; so for a geodesic and its reversal
//! `theta_from(ē) = theta_to(e)`.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;

pub const FILE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("malformed surface document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported surface document version {0} (expected {FILE_FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("surface document must give either `polygon` or `cone_points`/`edges`, not {0}")]
    InputSource(&'static str),
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("cone point `{id}` has invalid angle {angle}")]
    ConeAngle { id: String, angle: f64 },
    #[error("cone point `{id}`: {reason}")]
    Spectrum { id: String, reason: &'static str },
    #[error("edge `{edge}` references unknown cone point `{point}`")]
    UnknownConePoint { edge: String, point: String },
    #[error("edge `{edge}` has nonpositive or non-finite length {length}")]
    Length { edge: String, length: f64 },
    #[error("edge `{edge}`: {which} = {theta} lies outside [0, {angle})")]
    ThetaRange {
        edge: String,
        which: &'static str,
        theta: f64,
        angle: f64,
    },
    #[error("edge `{edge}` has no reversal `{reversal}` in the edge list")]
    MissingReversal { edge: String, reversal: String },
    #[error("edge `{edge}` and its reversal `{reversal}` are inconsistent: {reason}")]
    ReversalMismatch {
        edge: String,
        reversal: String,
        reason: &'static str,
    },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("polygon is not strictly convex at vertex {0}")]
    NonConvex(usize),
    #[error("polygon vertices are listed clockwise")]
    Clockwise,
    #[error("the geodesic digraph has no two-step path")]
    NoAdjacency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub id: String,
    /// Total angle of the link circle.
    #[serde(rename = "angle")]
    pub cone_angle: f64,
    /// Eigenvalues of the cross-section Laplacian, for the `n > 2` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub theta_from: f64,
    pub theta_to: f64,
    pub reversal: String,
}

/// On-disk form of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_points: Option<Vec<ConePoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<GeodesicEdge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
}

/// A validated conic surface with resolved edge incidences.
#[derive(Debug, Clone)]
pub struct ConeSurfaceSpec {
    dimension: usize,
    cone_points: Vec<ConePoint>,
    edges: Vec<GeodesicEdge>,
    edge_from: Vec<usize>,
    edge_to: Vec<usize>,
    edge_rev: Vec<usize>,
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), GeometryError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(GeometryError::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}

impl ConeSurfaceSpec {
    pub fn new(
        dimension: usize,
        cone_points: Vec<ConePoint>,
        edges: Vec<GeodesicEdge>,
    ) -> Result<Self, GeometryError> {
        if dimension < 2 {
            return Err(GeometryError::Dimension(dimension));
        }
        check_unique(cone_points.iter().map(|c| c.id.as_str()))?;
        check_unique(edges.iter().map(|e| e.id.as_str()))?;

        for c in &cone_points {
            if !(c.cone_angle.is_finite() && c.cone_angle > 0.0) {
                return Err(GeometryError::ConeAngle {
                    id: c.id.clone(),
                    angle: c.cone_angle,
                });
            }
            match &c.spectrum {
                Some(s) => {
                    if s.first() != Some(&0.0) {
                        return Err(GeometryError::Spectrum {
                            id: c.id.clone(),
                            reason: "spectrum must start at 0",
                        });
                    }
                    if s.windows(2).any(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
                        return Err(GeometryError::Spectrum {
                            id: c.id.clone(),
                            reason: "spectrum must be finite and nondecreasing",
                        });
                    }
                }
                None if dimension > 2 => {
                    return Err(GeometryError::Spectrum {
                        id: c.id.clone(),
                        reason: "dimension > 2 requires a cross-section spectrum",
                    });
                }
                None => {}
            }
        }

        let point_index: HashMap<&str, usize> = cone_points
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let edge_index: HashMap<&str, usize> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();

        let resolve = |edge: &GeodesicEdge, point: &str| {
            point_index
                .get(point)
                .copied()
                .ok_or_else(|| GeometryError::UnknownConePoint {
                    edge: edge.id.clone(),
                    point: point.to_string(),
                })
        };

        let mut edge_from = Vec::with_capacity(edges.len());
        let mut edge_to = Vec::with_capacity(edges.len());
        let mut edge_rev = Vec::with_capacity(edges.len());
        for e in &edges {
            let from = resolve(e, &e.from)?;
            let to = resolve(e, &e.to)?;
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(GeometryError::Length {
                    edge: e.id.clone(),
                    length: e.length,
                });
            }
            for (which, theta, point) in [("theta_from", e.theta_from, from), ("theta_to", e.theta_to, to)] {
                let angle = cone_points[point].cone_angle;
                if !(theta >= 0.0 && theta < angle) {
                    return Err(GeometryError::ThetaRange {
                        edge: e.id.clone(),
                        which,
                        theta,
                        angle,
                    });
                }
            }
            let rev = edge_index.get(e.reversal.as_str()).copied().ok_or_else(|| {
                GeometryError::MissingReversal {
                    edge: e.id.clone(),
                    reversal: e.reversal.clone(),
                }
            })?;
            edge_from.push(from);
            edge_to.push(to);
            edge_rev.push(rev);
        }

        for (i, e) in edges.iter().enumerate() {
            let r = edge_rev[i];
            let mismatch = |reason| GeometryError::ReversalMismatch {
                edge: e.id.clone(),
                reversal: edges[r].id.clone(),
                reason,
            };
            if r == i {
                return Err(mismatch("an edge cannot be its own reversal"));
            }
            if edge_rev[r] != i {
                return Err(mismatch("reversal is not an involution"));
            }
            if edge_from[r] != edge_to[i] || edge_to[r] != edge_from[i] {
                return Err(mismatch("endpoints are not swapped"));
            }
            if edges[r].length != e.length {
                return Err(mismatch("lengths differ"));
            }
        }

        Ok(Self {
            dimension,
            cone_points,
            edges,
            edge_from,
            edge_to,
            edge_rev,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.cone_points
    }

    pub fn edges(&self) -> &[GeodesicEdge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn from_point(&self, e: usize) -> usize {
        self.edge_from[e]
    }

    pub fn to_point(&self, e: usize) -> usize {
        self.edge_to[e]
    }

    pub fn reversal(&self, e: usize) -> usize {
        self.edge_rev[e]
    }

    /// `f → e`: `f` arrives where `e` departs.
    pub fn is_adjacent(&self, f: usize, e: usize) -> bool {
        self.edge_to[f] == self.edge_from[e]
    }

    /// All adjacent pairs `(f, e)` with `f → e`, in index order.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.edges.len();
        (0..m)
            .flat_map(|f| (0..m).map(move |e| (f, e)))
            .filter(|&(f, e)| self.is_adjacent(f, e))
            .collect()
    }

    pub fn to_document(&self) -> SurfaceDocument {
        SurfaceDocument {
            version: FILE_FORMAT_VERSION,
            dimension: Some(self.dimension),
            cone_points: Some(self.cone_points.clone()),
            edges: Some(self.edges.clone()),
            polygon: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("surface document serializes")
    }
}

/// Parse and validate a surface document (JSON).
pub fn load_surface(text: &str) -> Result<ConeSurfaceSpec, GeometryError> {
    let doc: SurfaceDocument = serde_json::from_str(text)?;
    surface_from_document(doc)
}

pub fn surface_from_document(doc: SurfaceDocument) -> Result<ConeSurfaceSpec, GeometryError> {
    if doc.version != FILE_FORMAT_VERSION {
        return Err(GeometryError::UnsupportedVersion(doc.version));
    }
    match (doc.polygon, doc.cone_points, doc.edges) {
        (Some(poly), None, None) => {
            if let Some(n) = doc.dimension {
                if n != 2 {
                    return Err(GeometryError::Dimension(n));
                }
            }
            build_polygon_double(&poly)
        }
        (None, Some(points), Some(edges)) => {
            let dim = doc.dimension.ok_or(GeometryError::InputSource("a missing dimension"))?;
            ConeSurfaceSpec::new(dim, points, edges)
        }
        (Some(_), _, _) => Err(GeometryError::InputSource("both")),
        _ => Err(GeometryError::InputSource("neither")),
    }
}

/// Exterior of a convex polygon, doubled across its sides.
///
/// Each vertex becomes a cone point of angle `2(2π - interior angle)`; each
/// side becomes one unoriented geodesic. In the link of vertex `i` the
/// direction back toward vertex `i-1` sits at angle 0 and the direction
/// toward vertex `i+1` at half the cone angle.
pub fn build_polygon_double(vertices: &[[f64; 2]]) -> Result<ConeSurfaceSpec, GeometryError> {
    let k = vertices.len();
    if k < 3 {
        return Err(GeometryError::TooFewVertices(k));
    }
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1.0);
    for i in 0..k {
        for j in i + 1..k {
            let d = (vertices[i][0] - vertices[j][0]).hypot(vertices[i][1] - vertices[j][1]);
            if d <= 1e-12 * scale {
                return Err(GeometryError::RepeatedVertex(i, j));
            }
        }
    }

    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let mut turning = 0.0;
    let mut interior = Vec::with_capacity(k);
    let mut negative = 0;
    for i in 0..k {
        let prev = vertices[(i + k - 1) % k];
        let cur = vertices[i];
        let next = vertices[(i + 1) % k];
        let a = sub(cur, prev);
        let b = sub(next, cur);
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        let rel = cross / (a[0].hypot(a[1]) * b[0].hypot(b[1]));
        if rel.abs() <= 1e-12 {
            return Err(GeometryError::NonConvex(i));
        }
        if rel < 0.0 {
            negative += 1;
        }
        let ext = cross.atan2(dot);
        turning += ext;
        interior.push(PI - ext);
    }
    if negative == k {
        return Err(GeometryError::Clockwise);
    }
    if negative > 0 {
        let i = interior.iter().position(|&a| a > PI).unwrap_or(0);
        return Err(GeometryError::NonConvex(i));
    }
    // A star polygon turns left everywhere but winds more than once.
    if (turning - TAU).abs() > 1e-9 {
        return Err(GeometryError::NonConvex(0));
    }

    let cone_points: Vec<ConePoint> = interior
        .iter()
        .enumerate()
        .map(|(i, &alpha)| ConePoint {
            id: format!("v{i}"),
            cone_angle: 2.0 * (TAU - alpha),
            spectrum: None,
        })
        .collect();

    let mut edges = Vec::with_capacity(2 * k);
    for i in 0..k {
        let j = (i + 1) % k;
        let len = (vertices[j][0] - vertices[i][0]).hypot(vertices[j][1] - vertices[i][1]);
        let half_i = 0.5 * cone_points[i].cone_angle;
        let fwd = format!("v{i}>v{j}");
        let bwd = format!("v{j}>v{i}");
        edges.push(GeodesicEdge {
            id: fwd.clone(),
            from: format!("v{i}"),
            to: format!("v{j}"),
            length: len,
            theta_from: half_i,
            theta_to: 0.0,
            reversal: bwd.clone(),
        });
        edges.push(GeodesicEdge {
            id: bwd,
            from: format!("v{j}"),
            to: format!("v{i}"),
            length: len,
            theta_from: 0.0,
            theta_to: half_i,
            reversal: fwd,
        });
    }
    ConeSurfaceSpec::new(2, cone_points, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthScales {
    /// Longest edge length.
    pub l0: f64,
    /// Half the longest two-step path length other than `2 L0`; absent
    /// when every two-step path has length `2 L0`.
    pub lprime: Option<f64>,
    /// `min(n / (2 L0), (n - 1) / (2 L'))`, or `n / (2 L0)` without `L'`.
    pub lambda: f64,
    pub maximal_edges: Vec<String>,
    /// Two-step paths `(f, e)` attaining `2 L'`.
    pub second_paths: Vec<(String, String)>,
}

fn tied(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

pub fn length_scales(spec: &ConeSurfaceSpec, tol: &Tolerances) -> Result<LengthScales, GeometryError> {
    let pairs = spec.adjacent_pairs();
    if pairs.is_empty() {
        return Err(GeometryError::NoAdjacency);
    }
    let rtol = tol.length_tie_rtol;
    let edges = spec.edges();
    let l0 = edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let maximal_edges = edges
        .iter()
        .filter(|e| tied(e.length, l0, rtol))
        .map(|e| e.id.clone())
        .collect();

    let mut best: Option<f64> = None;
    for &(f, e) in &pairs {
        let total = edges[f].length + edges[e].length;
        if tied(total, 2.0 * l0, rtol) {
            continue;
        }
        best = Some(best.map_or(total, |b| b.max(total)));
    }
    let second_paths = match best {
        Some(b) => pairs
            .iter()
            .filter(|&&(f, e)| {
                let t = edges[f].length + edges[e].length;
                !tied(t, 2.0 * l0, rtol) && tied(t, b, rtol)
            })
            .map(|&(f, e)| (edges[f].id.clone(), edges[e].id.clone()))
            .collect(),
        None => Vec::new(),
    };
    let lprime = best.map(|b| 0.5 * b);
    let n = spec.dimension() as f64;
    let lambda = match lprime {
        Some(lp) => (n / (2.0 * l0)).min((n - 1.0) / (2.0 * lp)),
        None => n / (2.0 * l0),
    };
    Ok(LengthScales {
        l0,
        lprime,
        lambda,
        maximal_edges,
        second_paths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub witnesses: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_UNIQUE_MAXIMAL: &str = "unique_maximal";
pub const CHECK_NO_PI_RELATED: &str = "no_pi_related";
pub const CHECK_NO_MAXIMAL_LOOP: &str = "no_maximal_loop";

/// Signed distance of `x` from the nearest multiple of `period`.
pub(crate) fn distance_to_lattice(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

/// Whether link angles `a` and `b` on a circle of circumference `angle` are
/// joined by a link geodesic of length π.
pub fn pi_related(a: f64, b: f64, angle: f64, tol: f64) -> bool {
    let d = a - b;
    distance_to_lattice(d - PI, angle) <= tol || distance_to_lattice(d + PI, angle) <= tol
}

/// Check the standing geometric hypotheses; failures carry witness edges.
pub fn validate_hypotheses(spec: &ConeSurfaceSpec, tol: &Tolerances) -> HypothesisReport {
    let edges = spec.edges();
    let rtol = tol.length_tie_rtol;
    let l0 = edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let maximal: Vec<usize> = (0..edges.len())
        .filter(|&i| tied(edges[i].length, l0, rtol))
        .collect();

    let mut witnesses = Vec::new();
    for (p, point) in spec.cone_points().iter().enumerate() {
        let ending: Vec<usize> = maximal.iter().copied().filter(|&e| spec.to_point(e) == p).collect();
        if ending.len() > 1 {
            let ids: Vec<&str> = ending.iter().map(|&e| edges[e].id.as_str()).collect();
            witnesses.push(format!("{}: {}", point.id, ids.join(", ")));
        }
    }
    let unique = HypothesisCheck {
        name: CHECK_UNIQUE_MAXIMAL.into(),
        passed: witnesses.is_empty(),
        detail: if witnesses.is_empty() {
            format!("no cone point receives two maximal geodesics (L0 = {l0})")
        } else {
            format!("distinct oriented geodesics of maximal length {l0} end at a common cone point")
        },
        witnesses,
    };

    let mut witnesses = Vec::new();
    for (p, point) in spec.cone_points().iter().enumerate() {
        let departing: Vec<usize> = (0..edges.len()).filter(|&e| spec.from_point(e) == p).collect();
        for (i, &a) in departing.iter().enumerate() {
            for &b in &departing[i + 1..] {
                if pi_related(edges[a].theta_from, edges[b].theta_from, point.cone_angle, tol.pi_relation_tol) {
                    witnesses.push(format!("{}: {} / {}", point.id, edges[a].id, edges[b].id));
                }
            }
        }
    }
    let pi_check = HypothesisCheck {
        name: CHECK_NO_PI_RELATED.into(),
        passed: witnesses.is_empty(),
        detail: format!(
            "no two geodesics at a cone point leave in directions a link distance π apart (tol {})",
            tol.pi_relation_tol
        ),
        witnesses,
    };

    let witnesses: Vec<String> = maximal
        .iter()
        .filter(|&&e| spec.from_point(e) == spec.to_point(e))
        .map(|&e| edges[e].id.clone())
        .collect();
    let loop_check = HypothesisCheck {
        name: CHECK_NO_MAXIMAL_LOOP.into(),
        passed: witnesses.is_empty(),
        detail: "no geodesic loop attains the maximal length".into(),
        witnesses,
    };

    HypothesisReport {
        checks: vec![unique, pi_check, loop_check],
    }
}

/// Two cone points joined by one geodesic of length `length`; both link
/// directions sit at angle 0.
pub fn two_cone_model(angle_a: f64, angle_b: f64, length: f64) -> Result<ConeSurfaceSpec, GeometryError> {
    ConeSurfaceSpec::new(
        2,
        vec![
            ConePoint {
                id: "P".into(),
                cone_angle: angle_a,
                spectrum: None,
            },
            ConePoint {
                id: "Q".into(),
                cone_angle: angle_b,
                spectrum: None,
            },
        ],
        vec![
            GeodesicEdge {
                id: "f".into(),
                from: "P".into(),
                to: "Q".into(),
                length,
                theta_from: 0.0,
                theta_to: 0.0,
                reversal: "fbar".into(),
            },
            GeodesicEdge {
                id: "fbar".into(),
                from: "Q".into(),
                to: "P".into(),
                length,
                theta_from: 0.0,
                theta_to: 0.0,
                reversal: "f".into(),
            },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CONES: &str = r#"{
        "version": 1,
        "dimension": 2,
        "cone_points": [{"id": "P", "angle": 12.566370614359172}, {"id": "Q", "angle": 12.566370614359172}],
        "edges": [
            {"id": "f", "from": "P", "to": "Q", "length": 3.141592653589793, "theta_from": 0.0, "theta_to": 0.0, "reversal": "fbar"},
            {"id": "fbar", "from": "Q", "to": "P", "length": 3.141592653589793, "theta_from": 0.0, "theta_to": 0.0, "reversal": "f"}
        ]
    }"#;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn loads_two_cone_document_and_round_trips() {
        let spec = load_surface(TWO_CONES).unwrap();
        assert_eq!(spec.cone_points().len(), 2);
        assert_eq!(spec.num_edges(), 2);
        let again = load_surface(&spec.to_json()).unwrap();
        assert_eq!(again.edges(), spec.edges());
        assert_eq!(again.cone_points(), spec.cone_points());
    }

    #[test]
    fn missing_reversal_rejected() {
        let text = TWO_CONES.replace(r#""reversal": "f"}"#, r#""reversal": "g"}"#);
        assert!(matches!(load_surface(&text), Err(GeometryError::MissingReversal { .. })));
    }

    #[test]
    fn zero_cone_angle_rejected() {
        let text = TWO_CONES.replacen("12.566370614359172", "0.0", 1);
        assert!(matches!(load_surface(&text), Err(GeometryError::ConeAngle { .. })));
    }

    #[test]
    fn theta_out_of_range_rejected() {
        let text = TWO_CONES.replacen(r#""theta_from": 0.0"#, r#""theta_from": 13.0"#, 1);
        assert!(matches!(load_surface(&text), Err(GeometryError::ThetaRange { .. })));
    }

    #[test]
    fn nonpositive_length_rejected() {
        let text = TWO_CONES.replace("3.141592653589793", "-1.0");
        assert!(matches!(load_surface(&text), Err(GeometryError::Length { .. })));
    }

    #[test]
    fn malformed_document_is_parse_error() {
        assert!(matches!(load_surface("{ version: 1"), Err(GeometryError::Parse(_))));
    }

    #[test]
    fn higher_dimension_needs_spectrum() {
        let text = TWO_CONES.replace(r#""dimension": 2"#, r#""dimension": 3"#);
        assert!(matches!(load_surface(&text), Err(GeometryError::Spectrum { .. })));
        let with = text
            .replace(r#""angle": 12.566370614359172}"#, r#""angle": 12.566370614359172, "spectrum": [0.0, 2.0, 2.0, 6.0]}"#);
        let spec = load_surface(&with).unwrap();
        assert_eq!(spec.dimension(), 3);
        let bad = text.replace(r#""angle": 12.566370614359172}"#, r#""angle": 12.566370614359172, "spectrum": [1.0, 2.0]}"#);
        assert!(matches!(load_surface(&bad), Err(GeometryError::Spectrum { .. })));
    }

    #[test]
    fn polygon_document_accepted() {
        let spec = load_surface(r#"{"version": 1, "polygon": [[0,0],[4,0],[0,3]]}"#).unwrap();
        assert_eq!(spec.num_edges(), 6);
        assert!(matches!(
            load_surface(r#"{"version": 1, "polygon": [[0,0],[4,0],[0,3]], "edges": []}"#),
            Err(GeometryError::InputSource("both"))
        ));
        assert!(matches!(load_surface(r#"{"version": 2, "polygon": []}"#), Err(GeometryError::UnsupportedVersion(2))));
    }

    #[test]
    fn unit_square_double() {
        let spec = build_polygon_double(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(spec.cone_points().len(), 4);
        assert_eq!(spec.num_edges(), 8);
        for c in spec.cone_points() {
            assert!((c.cone_angle - 3.0 * PI).abs() < 1e-12);
        }
        for e in spec.edges() {
            assert!((e.length - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_345_scales() {
        let spec = build_polygon_double(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]).unwrap();
        let ls = length_scales(&spec, &tol()).unwrap();
        assert_eq!(ls.l0, 5.0);
        assert_eq!(ls.maximal_edges.len(), 2); // one unoriented geodesic
        assert_eq!(ls.lprime, Some(4.5));
        assert!((ls.lambda - 1.0 / 9.0).abs() < 1e-15);
        // 5 + 4 at the vertex shared by the hypotenuse and the long leg, both orientations
        assert_eq!(ls.second_paths.len(), 2);
    }

    #[test]
    fn two_cone_scales_without_lprime() {
        let spec = load_surface(TWO_CONES).unwrap();
        let ls = length_scales(&spec, &tol()).unwrap();
        assert_eq!(ls.l0, PI);
        assert_eq!(ls.lprime, None);
        assert!((ls.lambda - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn equilateral_triangle_fails_unique_maximal() {
        let h = 3f64.sqrt() / 2.0;
        let spec = build_polygon_double(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        let ls = length_scales(&spec, &tol()).unwrap();
        assert!((ls.l0 - 1.0).abs() < 1e-12);
        assert_eq!(ls.lprime, None);
        let report = validate_hypotheses(&spec, &tol());
        assert!(!report.check(CHECK_UNIQUE_MAXIMAL).unwrap().passed);
    }

    #[test]
    fn degenerate_and_bad_polygons_rejected() {
        assert!(matches!(
            build_polygon_double(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
            Err(GeometryError::NonConvex(_))
        ));
        assert!(matches!(
            build_polygon_double(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            Err(GeometryError::RepeatedVertex(1, 2))
        ));
        assert!(matches!(
            build_polygon_double(&[[0.0, 0.0], [0.0, 3.0], [4.0, 0.0]]),
            Err(GeometryError::Clockwise)
        ));
        assert!(matches!(
            build_polygon_double(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 2.0], [0.0, 2.0]]),
            Err(GeometryError::NonConvex(_))
        ));
        assert!(matches!(build_polygon_double(&[[0.0, 0.0], [1.0, 0.0]]), Err(GeometryError::TooFewVertices(2))));
        // pentagram: five left turns, winding twice
        let star: Vec<[f64; 2]> = (0..5)
            .map(|i| {
                let t = (2 * i) as f64 * TAU / 5.0;
                [t.cos(), t.sin()]
            })
            .collect();
        assert!(matches!(build_polygon_double(&star), Err(GeometryError::NonConvex(_))));
    }

    #[test]
    fn hypotheses_on_reference_shapes() {
        let tri = build_polygon_double(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]).unwrap();
        assert!(validate_hypotheses(&tri, &tol()).passed());

        let square = build_polygon_double(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let report = validate_hypotheses(&square, &tol());
        let unique = report.check(CHECK_UNIQUE_MAXIMAL).unwrap();
        assert!(!unique.passed);
        assert_eq!(unique.witnesses.len(), 4);
        assert!(report.check(CHECK_NO_PI_RELATED).unwrap().passed);

        let two = load_surface(TWO_CONES).unwrap();
        assert!(validate_hypotheses(&two, &tol()).passed());
    }

    #[test]
    fn pi_related_and_loop_detected() {
        let spec = ConeSurfaceSpec::new(
            2,
            vec![ConePoint {
                id: "P".into(),
                cone_angle: 3.0 * PI,
                spectrum: None,
            }],
            vec![
                GeodesicEdge {
                    id: "a".into(),
                    from: "P".into(),
                    to: "P".into(),
                    length: 2.0,
                    theta_from: 0.0,
                    theta_to: PI + 1e-12,
                    reversal: "b".into(),
                },
                GeodesicEdge {
                    id: "b".into(),
                    from: "P".into(),
                    to: "P".into(),
                    length: 2.0,
                    theta_from: PI + 1e-12,
                    theta_to: 0.0,
                    reversal: "a".into(),
                },
            ],
        )
        .unwrap();
        let report = validate_hypotheses(&spec, &tol());
        assert!(!report.check(CHECK_NO_PI_RELATED).unwrap().passed);
        assert!(!report.check(CHECK_NO_MAXIMAL_LOOP).unwrap().passed);
        assert!(!report.check(CHECK_UNIQUE_MAXIMAL).unwrap().passed);
    }

    #[test]
    fn reversal_is_involution_with_equal_lengths() {
        let spec = build_polygon_double(&[[0.0, 0.0], [3.0, 0.2], [2.5, 2.0], [0.3, 1.7]]).unwrap();
        for e in 0..spec.num_edges() {
            let r = spec.reversal(e);
            assert_eq!(spec.reversal(r), e);
            assert_eq!(spec.edges()[e].length, spec.edges()[r].length);
            assert_eq!(spec.edges()[r].theta_from, spec.edges()[e].theta_to);
        }
    }
}
