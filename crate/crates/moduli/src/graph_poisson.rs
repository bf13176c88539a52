//! Ciliated fat graphs, graph connections with the reality condition, the
//! Fock-Rosly bracket, the Goldman bracket comparator and the map chi on the
//! four-vertex graph drawn on the real axis.

use serde::{Deserialize, Serialize};

use crate::decompositions::{contract, KStarElement, PoissonLie, Stencil};
use crate::error::{ModuliError, Result};
use crate::holonomy::{
    generator_holonomies, rebased_holonomy, word_holonomy, Catalogue, Contour, FrozenHolonomy, RationalConnection,
    Segment,
};
use crate::lie_core::{AlgebraContext, RMatrix};
use crate::linalg::{dagger, eye, inv, CMat, C64};
use crate::orbits_moment::kk_bracket_complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: usize,
    pub kind: EndKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    /// Edge ends in counterclockwise cyclic order.
    pub ends: Vec<EdgeEnd>,
    /// Position of the cilium: the linear order starts at `ends[cilium]`.
    pub cilium: usize,
    #[serde(default)]
    pub position: Option<[f64; 2]>,
}

impl Vertex {
    pub fn linear_order(&self) -> Vec<EdgeEnd> {
        let k = self.ends.len();
        (0..k).map(|i| self.ends[(self.cilium + i) % k]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Empty,
    Hole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub name: String,
    pub kind: FaceKind,
    /// Boundary traversal: (edge, traversed against its orientation).
    pub boundary: Vec<(usize, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiliatedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Edge pairs exchanged by the reflection tau; the first member is the
    /// free one, the second is determined by the reality condition.
    #[serde(default)]
    pub tau_edges: Vec<(usize, usize)>,
    #[serde(default)]
    pub faces: Vec<Face>,
}

/// Edge -> group element assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConnection {
    #[serde(with = "mats")]
    pub a: Vec<CMat>,
}

mod mats {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<_> = m.iter().map(crate::linalg::to_json_rows).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let v = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
        v.iter()
            .map(|r| crate::linalg::from_json_rows(r).ok_or_else(|| serde::de::Error::custom("ragged matrix")))
            .collect()
    }
}

impl CiliatedGraph {
    pub fn from_json(text: &str) -> Result<Self> {
        let g: CiliatedGraph = serde_json::from_str(text).map_err(|e| ModuliError::SchemaError(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// Every edge has exactly one source end at its source vertex and one
    /// target end at its target vertex; tau reverses linear orders at fixed
    /// vertices; face boundaries are closed.
    pub fn validate(&self) -> Result<()> {
        let schema = |m: String| Err(ModuliError::SchemaError(m));
        let mut seen = vec![[0usize; 2]; self.edges.len()];
        for (vi, v) in self.vertices.iter().enumerate() {
            if !v.ends.is_empty() && v.cilium >= v.ends.len() {
                return schema(format!("vertex {}: cilium out of range", v.name));
            }
            for e in &v.ends {
                let Some(edge) = self.edges.get(e.edge) else {
                    return schema(format!("vertex {}: unknown edge {}", v.name, e.edge));
                };
                let (slot, at) = match e.kind {
                    EndKind::Source => (0, edge.source),
                    EndKind::Target => (1, edge.target),
                };
                if at != vi {
                    return schema(format!("edge {} end listed at the wrong vertex {}", edge.name, v.name));
                }
                seen[e.edge][slot] += 1;
            }
        }
        if let Some(i) = seen.iter().position(|s| *s != [1, 1]) {
            return schema(format!("edge {} must have exactly one end of each kind", self.edges[i].name));
        }
        let tau = self.tau_edge_map();
        for (vi, v) in self.vertices.iter().enumerate() {
            let fixed = v.ends.iter().all(|e| {
                let te = tau[e.edge];
                let other = self.edges[te].clone();
                match e.kind {
                    EndKind::Source => other.source == vi,
                    EndKind::Target => other.target == vi,
                }
            });
            if !self.tau_edges.is_empty() && fixed {
                let order = v.linear_order();
                let mapped: Vec<EdgeEnd> =
                    order.iter().rev().map(|e| EdgeEnd { edge: tau[e.edge], kind: e.kind }).collect();
                if mapped != order {
                    return schema(format!("tau does not reverse the order at {}", v.name));
                }
            }
        }
        for f in &self.faces {
            let mut at: Option<usize> = None;
            let mut first = None;
            for &(e, rev) in &f.boundary {
                let edge =
                    self.edges.get(e).ok_or_else(|| ModuliError::SchemaError(format!("face {}: bad edge", f.name)))?;
                let (s, t) = if rev { (edge.target, edge.source) } else { (edge.source, edge.target) };
                if let Some(p) = at {
                    if p != s {
                        return schema(format!("face {} boundary is not connected", f.name));
                    }
                } else {
                    first = Some(s);
                }
                at = Some(t);
            }
            if at != first {
                return schema(format!("face {} boundary is not closed", f.name));
            }
        }
        Ok(())
    }

    fn tau_edge_map(&self) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.edges.len()).collect();
        for &(a, b) in &self.tau_edges {
            m[a] = b;
            m[b] = a;
        }
        m
    }

    /// Holonomy around a face: later edges multiply on the left.
    pub fn face_holonomy(&self, a: &GraphConnection, face: &Face) -> CMat {
        let n = a.a[0].nrows();
        let mut out = eye(n);
        for &(e, rev) in &face.boundary {
            let g = if rev { inv(&a.a[e]) } else { a.a[e].clone() };
            out = g * out;
        }
        out
    }

    /// Subgraph on the listed edges (renumbered in the given order), keeping
    /// the induced linear orders.
    pub fn restrict(&self, keep: &[usize]) -> CiliatedGraph {
        let index = |e: usize| keep.iter().position(|&k| k == e);
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                name: v.name.clone(),
                ends: v
                    .linear_order()
                    .into_iter()
                    .filter_map(|e| index(e.edge).map(|i| EdgeEnd { edge: i, kind: e.kind }))
                    .collect(),
                cilium: 0,
                position: v.position,
            })
            .collect();
        CiliatedGraph {
            vertices,
            edges: keep.iter().map(|&e| self.edges[e].clone()).collect(),
            tau_edges: vec![],
            faces: vec![],
        }
    }

    /// Gauge transformation a_l -> h_{t(l)} a_l h_{s(l)}^{-1}.
    pub fn gauge(&self, h: &[CMat], a: &GraphConnection) -> GraphConnection {
        GraphConnection { a: self.edges.iter().zip(&a.a).map(|(e, g)| &h[e.target] * g * inv(&h[e.source])).collect() }
    }
}

/// Impose a_{tau(l)} = bar(a_l)^{-1} on every tau pair.
pub fn reality_project(graph: &CiliatedGraph, a: &GraphConnection) -> GraphConnection {
    let mut out = a.clone();
    for &(l, lt) in &graph.tau_edges {
        out.a[lt] = inv(&dagger(&a.a[l]));
    }
    out
}

pub fn reality_residual(graph: &CiliatedGraph, a: &GraphConnection) -> f64 {
    graph.tau_edges.iter().map(|&(l, lt)| (&a.a[lt] * dagger(&a.a[l]) - eye(a.a[l].nrows())).norm()).fold(0.0, f64::max)
}

/// Function on the space of graph connections.
pub type GraphFn<'a> = &'a dyn Fn(&[CMat]) -> f64;

fn edge_gradients(stencil: &Stencil, psi: GraphFn, a: &[CMat], e: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = |g: &CMat| {
        let mut p = a.to_vec();
        p[e] = g.clone();
        psi(&p)
    };
    stencil.gradients(&f, &a[e])
}

/// Fock-Rosly bracket: for every vertex, with X = grad^L at target ends and
/// -grad^R at source ends, sum over ordered pairs alpha < beta of
/// X_alpha(psi) r X_beta(psi') - X_alpha(psi') r X_beta(psi), plus half the
/// same combination on the diagonal.
pub fn fr_bracket(
    graph: &CiliatedGraph,
    r: &RMatrix,
    stencil: &Stencil,
    psi: GraphFn,
    psi2: GraphFn,
    a: &GraphConnection,
) -> Result<f64> {
    let m = graph.edges.len();
    let mut g1 = Vec::with_capacity(m);
    let mut g2 = Vec::with_capacity(m);
    for e in 0..m {
        g1.push(edge_gradients(stencil, psi, &a.a, e)?);
        g2.push(edge_gradients(stencil, psi2, &a.a, e)?);
    }
    let x = |g: &[(Vec<f64>, Vec<f64>)], end: &EdgeEnd| -> Vec<f64> {
        match end.kind {
            EndKind::Target => g[end.edge].0.clone(),
            EndKind::Source => g[end.edge].1.iter().map(|v| -v).collect(),
        }
    };
    let rt = &r.tensor;
    let mut total = 0.0;
    for v in &graph.vertices {
        let order = v.linear_order();
        let xf: Vec<_> = order.iter().map(|e| x(&g1, e)).collect();
        let xg: Vec<_> = order.iter().map(|e| x(&g2, e)).collect();
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                total += contract(&xf[i], rt, &xg[j]) - contract(&xg[i], rt, &xf[j]);
            }
            total += 0.5 * (contract(&xf[i], rt, &xg[i]) - contract(&xg[i], rt, &xf[i]));
        }
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(ModuliError::EvaluationError)
    }
}

// ---------------------------------------------------------------------------
// The four-vertex graph on the real axis.

pub const P0: usize = 0;
pub const P1: usize = 1;
pub const P2: usize = 2;
pub const P3: usize = 3;

/// The graph with vertices P2 = -2, P1 = 0, P0 = 2, P3 = 3, upper edges
/// G1: P1 -> P0 (over +1), G2: P2 -> P1 (over -1), G3: P3 -> P2 (around
/// both), and their mirror images below the axis.
#[derive(Debug, Clone)]
pub struct PantsGraph {
    pub graph: CiliatedGraph,
    /// Geometric realization of each edge, source to target.
    pub edge_paths: Vec<Contour>,
    /// The real segment from P0 to P3 closing the chain.
    pub closing_segment: Contour,
}

fn arc(cx: f64, r: f64, start: f64, end: f64) -> Segment {
    Segment::Arc { center: [cx, 0.0], radius: r, start, end }
}

pub fn pants_graph() -> PantsGraph {
    use std::f64::consts::PI;
    let s = |e| EdgeEnd { edge: e, kind: EndKind::Source };
    let t = |e| EdgeEnd { edge: e, kind: EndKind::Target };
    let edge = |name: &str, source, target| Edge { name: name.into(), source, target };
    let vertex = |name: &str, x: f64, ends| Vertex { name: name.into(), ends, cilium: 0, position: Some([x, 0.0]) };
    let graph = CiliatedGraph {
        vertices: vec![
            vertex("P0", 2.0, vec![t(0), t(3)]),
            vertex("P1", 0.0, vec![s(0), t(1), t(4), s(3)]),
            vertex("P2", -2.0, vec![s(1), t(2), t(5), s(4)]),
            vertex("P3", 3.0, vec![s(2), s(5)]),
        ],
        edges: vec![
            edge("G1", P1, P0),
            edge("G2", P2, P1),
            edge("G3", P3, P2),
            edge("G1bar", P1, P0),
            edge("G2bar", P2, P1),
            edge("G3bar", P3, P2),
        ],
        tau_edges: vec![(0, 3), (1, 4), (2, 5)],
        faces: vec![
            Face {
                name: "inner".into(),
                kind: FaceKind::Empty,
                boundary: vec![(2, false), (1, false), (0, false), (3, true), (4, true), (5, true)],
            },
            Face { name: "hole1".into(), kind: FaceKind::Hole, boundary: vec![(0, false), (3, true)] },
            Face { name: "hole2".into(), kind: FaceKind::Hole, boundary: vec![(1, false), (4, true)] },
            Face { name: "hole3".into(), kind: FaceKind::Hole, boundary: vec![(2, false), (5, true)] },
        ],
    };
    let upper = [arc(1.0, 1.0, PI, 0.0), arc(-1.0, 1.0, PI, 0.0), arc(0.5, 2.5, 0.0, PI)];
    let mut edge_paths: Vec<Contour> =
        upper.iter().zip(["G1", "G2", "G3"]).map(|(s, n)| Contour::new(n, &[], vec![s.clone()])).collect();
    for (i, n) in ["G1bar", "G2bar", "G3bar"].iter().enumerate() {
        edge_paths.push(Contour::new(n, &[], vec![upper[i].reflected()]));
    }
    let closing_segment = Contour::new("P0P3", &[], vec![Segment::Line { from: [2.0, 0.0], to: [3.0, 0.0] }]);
    PantsGraph { graph, edge_paths, closing_segment }
}

impl PantsGraph {
    /// Graph connection induced by a rational connection: a_l is the
    /// transport along the edge from source to target.
    pub fn connection_from(&self, conn: &RationalConnection, tol: f64) -> Result<GraphConnection> {
        let a = self
            .edge_paths
            .iter()
            .map(|c| crate::holonomy::transport(conn, c, 0.0, c.param_len(), tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphConnection { a })
    }

    /// (g1, g2, g3) = (a1, a2, a3 s) with s the transport P0 -> P3 along the
    /// real axis, so that g1 g2 g3 = e for flat connections.
    pub fn g_triple(&self, conn: &RationalConnection, a: &GraphConnection, tol: f64) -> Result<[CMat; 3]> {
        let s = crate::holonomy::transport(conn, &self.closing_segment, 0.0, 1.0, tol)?;
        Ok([a.a[0].clone(), a.a[1].clone(), &a.a[2] * s])
    }

    /// The chain graph carrying only the upper edges.
    pub fn chain_graph(&self) -> CiliatedGraph {
        self.graph.restrict(&[0, 1, 2])
    }
}

/// The K^4 action g_i -> k_{i-1}^{-1} g_i k_i.
pub fn k4_action(k: &[CMat; 4], g: &[CMat; 3]) -> [CMat; 3] {
    [0, 1, 2].map(|i| inv(&k[i]) * &g[i] * &k[i + 1])
}

/// chi: k*_1 = pi*_L(g1), then k*_{i+1} = pi*_L(rho_i g_{i+1}) with
/// rho_i the K-leg left over from the previous step.
pub fn chi_map(pl: &PoissonLie, g: &[CMat]) -> Vec<KStarElement> {
    let n = pl.n();
    let mut rho = eye(n);
    let mut out = Vec::with_capacity(g.len());
    for gi in g {
        let (ks, k) = pl.iwasawa_mirrored(&(&rho * gi));
        out.push(ks);
        rho = k;
    }
    out
}

/// Direct-sum Poisson-Lie bracket on (K*)^m for functions of the tuple,
/// together with the natural size of the bilinear form at this point:
/// |r| (sum_i |grad_i f|) (sum_i |grad_i g|), left and right gradients both
/// counted.
pub fn product_dual_bracket(
    pl: &PoissonLie,
    stencil: &Stencil,
    f: GraphFn,
    g: GraphFn,
    ks: &[CMat],
) -> Result<(f64, f64)> {
    let rt = &pl.r_plus.tensor;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (mut total, mut sf, mut sg) = (0.0, 0.0, 0.0);
    for i in 0..ks.len() {
        let (l1, r1) = edge_gradients(stencil, f, ks, i)?;
        let (l2, r2) = edge_gradients(stencil, g, ks, i)?;
        total += contract(&l1, rt, &l2) - contract(&r1, rt, &r2);
        sf += norm(&l1) + norm(&r1);
        sg += norm(&l2) + norm(&r2);
    }
    Ok((total, rt.norm() * sf * sg))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketComparison {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs - rhs| / max(|rhs|, scale) with the bilinear scale of the
    /// functions, so vanishing brackets are judged against their natural size.
    pub rel_err: f64,
}

fn compare(lhs: f64, rhs: f64, scale: f64) -> BracketComparison {
    BracketComparison { lhs, rhs, rel_err: (lhs - rhs).abs() / rhs.abs().max(scale).max(f64::MIN_POSITIVE) }
}

/// Pullback of a function on (K*)^3 through chi.
pub fn pullback<'a>(pl: &'a PoissonLie, h: GraphFn<'a>) -> impl Fn(&[CMat]) -> f64 + 'a {
    move |a: &[CMat]| {
        let ks: Vec<CMat> = chi_map(pl, a).into_iter().map(|k| k.matrix).collect();
        h(&ks)
    }
}

/// Fock-Rosly bracket (chain graph) of pullbacks through chi against the
/// direct-sum dual bracket of the original functions.
pub fn fr_vs_kstar(
    fig: &PantsGraph,
    pl: &PoissonLie,
    stencil: &Stencil,
    f: GraphFn,
    g: GraphFn,
    gs: &[CMat; 3],
) -> Result<BracketComparison> {
    let chain = fig.chain_graph();
    let (pf, pg) = (pullback(pl, f), pullback(pl, g));
    let lhs = fr_bracket(&chain, &pl.r_plus, stencil, &pf, &pg, &GraphConnection { a: gs.to_vec() })?;
    let ks: Vec<CMat> = chi_map(pl, gs).into_iter().map(|k| k.matrix).collect();
    let (rhs, scale) = product_dual_bracket(pl, stencil, f, g, &ks)?;
    Ok(compare(lhs, rhs, scale))
}

// ---------------------------------------------------------------------------
// Goldman bracket.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldmanRhs {
    /// sum_p sign(p) Tr_12(C M^1 N^2) with C = P - 1/n.
    pub casimir_form: [f64; 2],
    /// sum_p sign(p) (phi_{resolution word} - phi phi' / n).
    pub trace_form: [f64; 2],
    /// Per-intersection Casimir terms (signed).
    pub terms: Vec<[f64; 2]>,
}

fn pc(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Tr_12((P - 1/n) M (x) N) computed from the compact basis:
/// -sum_a Tr(t_a M) Tr(t_a N).
pub fn casimir_trace(alg: &AlgebraContext, m: &CMat, nm: &CMat) -> C64 {
    -alg.compact_basis.iter().map(|t| (t * m).trace() * (t * nm).trace()).sum::<C64>()
}

/// Right-hand side of the Goldman identity for catalogue contours a, b.
pub fn goldman_rhs(
    alg: &AlgebraContext,
    conn: &RationalConnection,
    cat: &Catalogue,
    a: &str,
    b: &str,
    tol: f64,
) -> Result<GoldmanRhs> {
    if !cat.has_pair_data(a, b) {
        return Err(ModuliError::MissingIntersectionData(a.into(), b.into()));
    }
    let (ca, cb) = (cat.get(a)?, cat.get(b)?);
    let n = conn.n() as f64;
    let gens = generator_holonomies(conn, tol)?;
    let mut cas = C64::new(0.0, 0.0);
    let mut tr = C64::new(0.0, 0.0);
    let mut terms = Vec::new();
    for d in cat.intersections(a, b)? {
        let m = rebased_holonomy(conn, ca, d.param, tol)?;
        let nm = rebased_holonomy(conn, cb, d.param_with, tol)?;
        let s = d.sign as f64;
        let term = casimir_trace(alg, &m, &nm) * s;
        cas += term;
        terms.push(pc(term));
        let res = word_holonomy(&gens, &d.resolution_word)?.trace();
        tr += (res - m.trace() * nm.trace() / n) * s;
    }
    Ok(GoldmanRhs { casimir_form: pc(cas), trace_form: pc(tr), terms })
}

/// Kirillov-Kostant bracket of phi_a and phi_b as functions of the residues
/// (X1, X2), with FD step h on frozen integration meshes.
pub fn kk_goldman(
    alg: &AlgebraContext,
    conn: &RationalConnection,
    ca: &Contour,
    cb: &Contour,
    h: f64,
    tol: f64,
) -> Result<C64> {
    let fa = FrozenHolonomy::new(conn, ca, tol)?;
    let fb = FrozenHolonomy::new(conn, cb, tol)?;
    let with = |p: &[CMat]| RationalConnection { x1: p[0].clone(), x2: p[1].clone(), scale: conn.scale };
    let pa = |p: &[CMat]| fa.eval(&with(p)).trace();
    let pb = |p: &[CMat]| fb.eval(&with(p)).trace();
    kk_bracket_complex(alg, &pa, &pb, &[conn.x1.clone(), conn.x2.clone()], h)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldmanComparison {
    pub pair: (String, String),
    pub kk: [f64; 2],
    /// 2 i t times the Casimir form.
    pub rhs: [f64; 2],
    pub rhs_unscaled: GoldmanRhs,
    /// |kk - rhs| / max(|rhs|, 2t sum_p |term_p|).
    pub rel_err: f64,
    /// |Casimir form - trace form|, relative to the same magnitude.
    pub form_gap: f64,
}

/// Compare the Kirillov-Kostant bracket of two Goldman functions through xi
/// with 2 i t times the intersection sum.
pub fn goldman_comparison(
    alg: &AlgebraContext,
    conn: &RationalConnection,
    cat: &Catalogue,
    a: &str,
    b: &str,
    h: f64,
    tol: f64,
) -> Result<GoldmanComparison> {
    let t = conn.scale * std::f64::consts::PI;
    let rhs0 = goldman_rhs(alg, conn, cat, a, b, tol)?;
    let kk = kk_goldman(alg, conn, cat.get(a)?, cat.get(b)?, h, tol)?;
    let cas = C64::new(rhs0.casimir_form[0], rhs0.casimir_form[1]);
    let trf = C64::new(rhs0.trace_form[0], rhs0.trace_form[1]);
    let rhs = cas * C64::new(0.0, 2.0 * t);
    let mag: f64 = rhs0.terms.iter().map(|z| C64::new(z[0], z[1]).norm()).sum();
    let scale = rhs.norm().max(2.0 * t * mag).max(f64::MIN_POSITIVE);
    Ok(GoldmanComparison {
        pair: (a.into(), b.into()),
        kk: pc(kk),
        rhs: pc(rhs),
        rel_err: (kk - rhs).norm() / scale,
        form_gap: (cas - trf).norm() / mag.max(1.0),
        rhs_unscaled: rhs0,
    })
}

/// The ordered list of catalogue pairs carrying intersection points.
pub fn intersecting_pairs(cat: &Catalogue) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for ctr in &cat.contours {
        for d in &ctr.intersections {
            let p = (ctr.name.clone(), d.with.clone());
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn pants_graph_is_consistent() {
        let fig = pants_graph();
        fig.graph.validate().unwrap();
        let chain = fig.chain_graph();
        chain.validate().unwrap();
        let order: Vec<_> = chain.vertices[P1].linear_order();
        assert_eq!(order, vec![EdgeEnd { edge: 0, kind: EndKind::Source }, EdgeEnd { edge: 1, kind: EndKind::Target }]);
        for (p, v) in fig.edge_paths.iter().zip(&fig.graph.edges) {
            let x = |i: usize| fig.graph.vertices[i].position.unwrap()[0];
            assert!((p.start_point() - C64::new(x(v.source), 0.0)).norm() < 1e-12);
            assert!((p.end_point() - C64::new(x(v.target), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn broken_orders_are_rejected() {
        let mut g = pants_graph().graph;
        g.vertices[P1].ends.swap(0, 1);
        assert!(matches!(g.validate(), Err(ModuliError::SchemaError(_))));
        let mut g = pants_graph().graph;
        g.faces[0].boundary.pop();
        assert!(g.validate().is_err());
    }

    #[test]
    fn casimir_trace_is_the_traceless_pairing() {
        let alg = crate::lie_core::build_algebra(3).unwrap();
        let m = CMat::from_fn(3, 3, |i, j| c(i as f64 + 0.3, j as f64 * 0.7 - 0.2));
        let nm = CMat::from_fn(3, 3, |i, j| c((i * j) as f64 - 0.5, 0.1 * i as f64));
        let want = (&m * &nm).trace() - m.trace() * nm.trace() / 3.0;
        assert!((casimir_trace(&alg, &m, &nm) - want).norm() < 1e-12);
    }
}
