//! Angled Euler numbers and the combinatorial Gauss–Bonnet count on
//! generalized graphs (graphs where some loop components carry no vertex).
//!
//! Angles here are interior corner angles in units of π, so a corner with
//! angle `α` contributes the external angle `1 - α`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::Certificate;
use crate::rational::Rational;
use crate::tangle::MontesinosKnot;

/// Compact surface with corners on its boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngledFace {
    pub euler_char: i64,
    pub corner_angles: Vec<Rational>,
}

impl AngledFace {
    pub fn new(euler_char: i64, corner_angles: Vec<Rational>) -> Self {
        AngledFace {
            euler_char,
            corner_angles,
        }
    }
}

/// `χ(σ) - Σ (1 - α_j) / 2`.
pub fn angled_euler(face: &AngledFace) -> Rational {
    let external: Rational = face.corner_angles.iter().map(|a| Rational::one() - a).sum();
    Rational::from(face.euler_char) - external / 2
}

/// Smallest number of small corners on an essential `(r, s)` disk in a
/// `p/q` tangle space.
pub fn s_min(r: u32, q: i64, pbar_abs: i64) -> i64 {
    if r == 0 {
        2 * q
    } else if r % 2 == 1 {
        q
    } else {
        2 * pbar_abs
    }
}

/// Disk face with `r` large and `s` small corners in tangle `tangle_index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceType {
    pub r: u32,
    pub s: u32,
    pub tangle_index: usize,
}

impl fmt::Display for FaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) in tangle {}",
            self.r, self.s, self.tangle_index
        )
    }
}

/// `1 - (r alpha_bar_i + s beta_bar_i) / 2` for a disk face under `cert`.
pub fn face_euler(cert: &Certificate, ftype: FaceType) -> Rational {
    let i = ftype.tangle_index - 1;
    let external = &cert.alpha_bar[i] * ftype.r as i64 + &cert.beta_bar[i] * ftype.s as i64;
    Rational::one() - external / 2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    pub face: FaceType,
    pub euler: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvatureSpectrum {
    pub entries: Vec<SpectrumEntry>,
    /// Faces with `e > 0`; empty whenever the certificate is valid.
    pub spherical: Vec<FaceType>,
    /// Faces with `e = 0`.
    pub euclidean: Vec<FaceType>,
    /// Every euclidean face is `(0, 2q_i)`, `(1, q_i)` or `(2, 2|pbar_i|)`.
    pub euclidean_types_expected: bool,
}

/// Tabulates `e` over every admissible `(r, s, i)` with `r <= r_max`, `s_min <= s <= s_max`.
pub fn curvature_spectrum(
    knot: &MontesinosKnot,
    cert: &Certificate,
    r_max: u32,
    s_max: u32,
) -> CurvatureSpectrum {
    let q = knot.q();
    let pb = knot.pbar_abs();
    let mut entries = Vec::new();
    for i in 0..3 {
        for r in 0..=r_max {
            let lo = s_min(r, q[i], pb[i]).max(0) as u32;
            for s in lo..=s_max {
                let face = FaceType {
                    r,
                    s,
                    tangle_index: i + 1,
                };
                entries.push(SpectrumEntry {
                    face,
                    euler: face_euler(cert, face),
                });
            }
        }
    }
    let spherical: Vec<FaceType> = entries
        .iter()
        .filter(|e| e.euler.is_positive())
        .map(|e| e.face)
        .collect();
    let euclidean: Vec<FaceType> = entries
        .iter()
        .filter(|e| e.euler.is_zero())
        .map(|e| e.face)
        .collect();
    let euclidean_types_expected = euclidean.iter().all(|f| {
        let i = f.tangle_index - 1;
        let s = f.s as i64;
        matches!((f.r, s), (0, x) if x == 2 * q[i])
            || matches!((f.r, s), (1, x) if x == q[i])
            || matches!((f.r, s), (2, x) if x == 2 * pb[i])
    });
    CurvatureSpectrum {
        entries,
        spherical,
        euclidean,
        euclidean_types_expected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    /// Meets the auxiliary unknot; valence 3.
    Small,
    /// Meets the knot; valence `6Δ`.
    Large,
    /// No valence requirement (test triangulations, subdivision points).
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Number of corner slots, labeled `0..slots`; equals the valence.
    pub slots: usize,
}

/// Corner of a face sitting in slot `slot` of vertex `vertex`, with interior angle `angle`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corner {
    pub vertex: usize,
    pub slot: usize,
    pub angle: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFace {
    pub euler_char: i64,
    #[serde(default)]
    pub corners: Vec<Corner>,
}

impl GraphFace {
    pub fn angled(&self) -> AngledFace {
        AngledFace::new(
            self.euler_char,
            self.corners.iter().map(|c| c.angle.clone()).collect(),
        )
    }
}

/// Generalized graph on a closed surface together with the angled faces it cuts out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedGraph {
    pub surface_euler_char: i64,
    #[serde(default)]
    pub delta: Option<u32>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub vertexless_loops: usize,
    pub faces: Vec<GraphFace>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum GraphError {
    #[error("edges[{edge}] ends at vertex {vertex}, which does not exist")]
    EdgeEndpoint { edge: usize, vertex: usize },
    #[error("faces[{face}].corners[{corner}] refers to vertex {vertex}, which does not exist")]
    CornerVertex {
        face: usize,
        corner: usize,
        vertex: usize,
    },
    #[error("faces[{face}].corners[{corner}].slot = {slot} but vertex {vertex} has {slots} slots")]
    SlotOutOfRange {
        face: usize,
        corner: usize,
        vertex: usize,
        slot: usize,
        slots: usize,
    },
    #[error("slot {slot} of vertex {vertex} is used by more than one corner")]
    SlotReused { vertex: usize, slot: usize },
    #[error("slot {slot} of vertex {vertex} has no corner")]
    SlotUnused { vertex: usize, slot: usize },
    #[error("vertices[{vertex}] has {slots} slots but {edge_ends} edge ends")]
    SlotsVsEdges {
        vertex: usize,
        slots: usize,
        edge_ends: usize,
    },
    #[error("faces[{face}].corners[{corner}].angle = {angle} is outside [0, 1)")]
    AngleOutOfRange {
        face: usize,
        corner: usize,
        angle: Rational,
    },
    #[error("V - E + Σχ(faces) = {computed}, but surface_euler_char = {declared}")]
    EulerMismatch { computed: i64, declared: i64 },
    #[error("angles around vertex {vertex} sum to {sum}, below 2")]
    VertexSumBelowTwo { vertex: usize, sum: Rational },
    #[error("{kind:?} vertex {vertex} has valence {valence}, expected {expected}")]
    Valence {
        vertex: usize,
        kind: VertexKind,
        valence: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub chi_surface: i64,
    pub sum_e: Rational,
    pub vertex_angle_sums: Vec<Rational>,
    /// `sum_e == chi_surface`; holds exactly when every vertex sum is 2.
    pub equality: bool,
}

impl fmt::Display for EulerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equality {
            write!(
                f,
                "sum_e = {}, chi = {}, equality",
                fmt_compact(&self.sum_e),
                self.chi_surface
            )
        } else {
            write!(
                f,
                "sum_e = {} > chi = {}, strict",
                fmt_compact(&self.sum_e),
                self.chi_surface
            )
        }
    }
}

/// `n` for integers, `n/d` otherwise.
fn fmt_compact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        r.to_string()
    }
}

impl GeneralizedGraph {
    /// Closed surface cut into disk faces, each given by its cycle of vertices.
    /// Edges are recovered by pairing face sides with the same endpoints, and
    /// slots are numbered in the order corners are listed.
    pub fn from_polygons(
        surface_euler_char: i64,
        kinds: Vec<VertexKind>,
        polygons: &[Vec<usize>],
        angles: &[Vec<Rational>],
    ) -> Self {
        assert_eq!(polygons.len(), angles.len(), "one angle list per polygon");
        let mut next_slot = vec![0usize; kinds.len()];
        let mut faces = Vec::with_capacity(polygons.len());
        let mut sides: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        for (poly, angs) in polygons.iter().zip(angles) {
            assert_eq!(poly.len(), angs.len(), "one angle per corner");
            let corners = poly
                .iter()
                .zip(angs)
                .map(|(&v, a)| {
                    let slot = next_slot[v];
                    next_slot[v] += 1;
                    Corner {
                        vertex: v,
                        slot,
                        angle: a.clone(),
                    }
                })
                .collect();
            for k in 0..poly.len() {
                let (u, v) = (poly[k], poly[(k + 1) % poly.len()]);
                let key = (u.min(v), u.max(v));
                let pending = sides.entry(key).or_insert(0);
                if *pending > 0 {
                    *pending -= 1;
                    edges.push([key.0, key.1]);
                } else {
                    *pending += 1;
                }
            }
            faces.push(GraphFace {
                euler_char: 1,
                corners,
            });
        }
        let vertices = kinds
            .into_iter()
            .zip(next_slot)
            .map(|(kind, slots)| Vertex { kind, slots })
            .collect();
        GeneralizedGraph {
            surface_euler_char,
            delta: None,
            vertices,
            edges,
            vertexless_loops: 0,
            faces,
        }
    }

    fn edge_ends(&self) -> Vec<usize> {
        let mut ends = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            for &v in e {
                if v < ends.len() {
                    ends[v] += 1;
                }
            }
        }
        ends
    }

    /// Interior angle sums at each vertex.
    pub fn vertex_angle_sums(&self) -> Vec<Rational> {
        let mut sums = vec![Rational::zero(); self.vertices.len()];
        for face in &self.faces {
            for c in &face.corners {
                if c.vertex < sums.len() {
                    sums[c.vertex] += &c.angle;
                }
            }
        }
        sums
    }

    /// `V - E + Σ χ(faces)`; vertexless loops are circles and add nothing.
    pub fn combinatorial_euler(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64
            + self.faces.iter().map(|f| f.euler_char).sum::<i64>()
    }

    /// Incidence, angle range and Euler identity problems, in that order.
    pub fn structural_violations(&self) -> Vec<GraphError> {
        let mut out = Vec::new();
        let nv = self.vertices.len();
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                if v >= nv {
                    out.push(GraphError::EdgeEndpoint { edge: i, vertex: v });
                }
            }
        }
        let mut used: Vec<Vec<usize>> = self.vertices.iter().map(|v| vec![0; v.slots]).collect();
        let ends = self.edge_ends();
        for (fi, face) in self.faces.iter().enumerate() {
            for (ci, c) in face.corners.iter().enumerate() {
                let Some(vertex) = self.vertices.get(c.vertex) else {
                    out.push(GraphError::CornerVertex {
                        face: fi,
                        corner: ci,
                        vertex: c.vertex,
                    });
                    continue;
                };
                if c.slot >= vertex.slots {
                    out.push(GraphError::SlotOutOfRange {
                        face: fi,
                        corner: ci,
                        vertex: c.vertex,
                        slot: c.slot,
                        slots: vertex.slots,
                    });
                } else {
                    used[c.vertex][c.slot] += 1;
                }
                // A straight corner (angle 1) is only meaningful at a subdivision point.
                let straight_ok = c.angle == 1 && ends[c.vertex] == 2;
                if c.angle.is_negative() || (c.angle >= 1 && !straight_ok) {
                    out.push(GraphError::AngleOutOfRange {
                        face: fi,
                        corner: ci,
                        angle: c.angle.clone(),
                    });
                }
            }
        }
        for (v, slots) in used.iter().enumerate() {
            for (slot, &n) in slots.iter().enumerate() {
                match n {
                    0 => out.push(GraphError::SlotUnused { vertex: v, slot }),
                    1 => {}
                    _ => out.push(GraphError::SlotReused { vertex: v, slot }),
                }
            }
        }
        for (v, vertex) in self.vertices.iter().enumerate() {
            if vertex.slots != ends[v] {
                out.push(GraphError::SlotsVsEdges {
                    vertex: v,
                    slots: vertex.slots,
                    edge_ends: ends[v],
                });
            }
        }
        let computed = self.combinatorial_euler();
        if computed != self.surface_euler_char {
            out.push(GraphError::EulerMismatch {
                computed,
                declared: self.surface_euler_char,
            });
        }
        out
    }

    /// Splits `edge` with a new valence-2 vertex carrying a straight corner
    /// (angle 1) in each of the two faces along the edge.
    pub fn subdivide_edge(&self, edge: usize, faces: [usize; 2]) -> GeneralizedGraph {
        let mut g = self.clone();
        let [u, w] = g.edges[edge];
        let mid = g.vertices.len();
        g.vertices.push(Vertex {
            kind: VertexKind::Plain,
            slots: 2,
        });
        g.edges[edge] = [u, mid];
        g.edges.push([mid, w]);
        for (slot, f) in faces.into_iter().enumerate() {
            g.faces[f].corners.push(Corner {
                vertex: mid,
                slot,
                angle: Rational::one(),
            });
        }
        g
    }
}

/// Exact `χ(F)` and `Σ e(σ)` for a well-formed graph whose vertex angle sums are all at least 2.
pub fn graph_euler_check(graph: &GeneralizedGraph) -> Result<EulerReport, GraphError> {
    if let Some(e) = graph.structural_violations().into_iter().next() {
        return Err(e);
    }
    let sums = graph.vertex_angle_sums();
    if let Some((vertex, sum)) = sums.iter().enumerate().find(|(_, s)| **s < 2) {
        return Err(GraphError::VertexSumBelowTwo {
            vertex,
            sum: sum.clone(),
        });
    }
    let sum_e: Rational = graph.faces.iter().map(|f| angled_euler(&f.angled())).sum();
    let chi = Rational::from(graph.surface_euler_char);
    let flat = sums.iter().all(|s| *s == 2);
    let equality = sum_e == chi;
    assert!(
        sum_e >= chi,
        "Σe = {sum_e} below χ = {chi} on a well-formed graph"
    );
    assert_eq!(
        equality, flat,
        "equality must hold exactly when every vertex sum is 2"
    );
    Ok(EulerReport {
        chi_surface: graph.surface_euler_char,
        sum_e,
        vertex_angle_sums: sums,
        equality,
    })
}

/// Structural problems plus valence rules: small vertices 3, large vertices `6Δ`.
pub fn validate_graph(graph: &GeneralizedGraph, delta: u32) -> Vec<GraphError> {
    let mut out = graph.structural_violations();
    let ends = graph.edge_ends();
    for (v, vertex) in graph.vertices.iter().enumerate() {
        let expected = match vertex.kind {
            VertexKind::Small => 3,
            VertexKind::Large => 6 * delta as usize,
            VertexKind::Plain => continue,
        };
        let valence = vertex.slots.max(ends[v]);
        if valence != expected {
            out.push(GraphError::Valence {
                vertex: v,
                kind: vertex.kind,
                valence,
                expected,
            });
        }
    }
    out
}
