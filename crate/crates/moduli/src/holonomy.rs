//! Rational flat connections A(z)dz = scale (X1/(z-1) + X2/(z+1)) dz on the
//! three-holed sphere C \ {1, -1}, the sigma-symmetry, the map xi, a contour
//! catalogue with curated intersection data, and an adaptive path-ordered
//! exponential engine.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{ModuliError, Result};
use crate::lie_core::CartanVector;
use crate::linalg::{c, cmat_serde, dagger, eigenvalues, eye, inv, zeros, CMat, C64};

/// Minimal admissible distance between a contour and the poles +1, -1.
pub const POLE_MARGIN: f64 = 0.1;
/// Default relative/absolute tolerance of the adaptive integrator.
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
const CONTINUITY_TOL: f64 = 1e-9;

/// Connection with residues X1 at z = 1, X2 at z = -1 and X3 = -(X1+X2) at
/// infinity, multiplied by `scale`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalConnection {
    #[serde(with = "cmat_serde")]
    pub x1: CMat,
    #[serde(with = "cmat_serde")]
    pub x2: CMat,
    pub scale: f64,
}

impl RationalConnection {
    pub fn zero(n: usize) -> Self {
        Self { x1: zeros(n), x2: zeros(n), scale: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.x1.nrows()
    }

    pub fn x3(&self) -> CMat {
        -(&self.x1 + &self.x2)
    }

    /// A(z), the coefficient of dz.
    pub fn a(&self, z: C64) -> CMat {
        (&self.x1 / (z - 1.0) + &self.x2 / (z + 1.0)) * c(self.scale, 0.0)
    }

    /// Max over sample points of ||A(conj z) + A(z)^dagger||.
    pub fn sigma_residual_at(&self, zs: &[C64]) -> f64 {
        zs.iter().map(|z| (self.a(z.conj()) + dagger(&self.a(*z))).camax()).fold(0.0, f64::max)
    }

    /// Constant gauge transform: residues conjugated by g.
    pub fn conjugate(&self, g: &CMat) -> Self {
        let gi = inv(g);
        Self { x1: g * &self.x1 * &gi, x2: g * &self.x2 * &gi, scale: self.scale }
    }
}

fn anti_hermitian_defect(x: &CMat) -> f64 {
    let n = x.nrows() as f64;
    (x + dagger(x)).camax().max(x.trace().norm() / n)
}

/// The map xi: residues (X1, X2, X3) with X1+X2+X3 = 0, all in k, to the
/// rational connection with scale t/pi.
pub fn xi_map(x1: &CMat, x2: &CMat, x3: &CMat, t: f64) -> Result<RationalConnection> {
    let sum = (x1 + x2 + x3).norm();
    if sum > 1e-8 {
        return Err(ModuliError::ConstraintViolated(sum));
    }
    let defect = [x1, x2, x3].iter().map(|x| anti_hermitian_defect(x)).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(ModuliError::ConstraintViolated(defect));
    }
    Ok(RationalConnection { x1: x1.clone(), x2: x2.clone(), scale: t / std::f64::consts::PI })
}

/// A piece of a contour, parametrized by u in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Segment {
    Line {
        from: [f64; 2],
        to: [f64; 2],
    },
    /// Arc of the circle |z - center| = radius from angle `start` to `end`
    /// (radians; the sweep may exceed 2 pi and has the sign of end - start).
    Arc {
        center: [f64; 2],
        radius: f64,
        start: f64,
        end: f64,
    },
}

fn cz(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl Segment {
    /// Point and derivative dz/du at u.
    pub fn eval(&self, u: f64) -> (C64, C64) {
        match *self {
            Segment::Line { from, to } => {
                let (a, b) = (cz(from), cz(to));
                (a + (b - a) * u, b - a)
            }
            Segment::Arc { center, radius, start, end } => {
                let th = start + (end - start) * u;
                let e = C64::from_polar(radius, th);
                (cz(center) + e, C64::i() * e * (end - start))
            }
        }
    }

    pub fn start_point(&self) -> C64 {
        self.eval(0.0).0
    }

    pub fn end_point(&self) -> C64 {
        self.eval(1.0).0
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { center, radius, start, end } => Segment::Arc { center, radius, start: end, end: start },
        }
    }

    /// Image under tau(z) = conj(z).
    pub fn reflected(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: [from[0], -from[1]], to: [to[0], -to[1]] },
            Segment::Arc { center, radius, start, end } => {
                Segment::Arc { center: [center[0], -center[1]], radius, start: -start, end: -end }
            }
        }
    }

    /// Euclidean distance from p to the segment.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let (a, b) = (cz(from), cz(to));
                let d = b - a;
                let len2 = d.norm_sqr();
                let s = if len2 == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0) };
                (a + d * s - p).norm()
            }
            Segment::Arc { center, radius, start, end } => {
                let rel = p - cz(center);
                let endpoints = (self.start_point() - p).norm().min((self.end_point() - p).norm());
                let sweep = end - start;
                if sweep.abs() >= 2.0 * std::f64::consts::PI {
                    return (rel.norm() - radius).abs();
                }
                let (lo, hi) = if sweep >= 0.0 { (start, end) } else { (end, start) };
                let tau = 2.0 * std::f64::consts::PI;
                let ang = rel.arg();
                let k = ((lo - ang) / tau).ceil();
                if ang + k * tau <= hi {
                    (rel.norm() - radius).abs()
                } else {
                    endpoints
                }
            }
        }
    }
}

/// Intersection of a contour with another catalogue contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionDatum {
    pub with: String,
    pub point: [f64; 2],
    /// Crossing sign: +1 when the second tangent points to the left of the
    /// first.
    pub sign: i32,
    pub resolution_word: Vec<String>,
    /// Contour parameter (segment index + local u) of the point on this contour.
    pub param: f64,
    /// Parameter of the point on the other contour.
    pub param_with: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub name: String,
    pub word: Vec<String>,
    pub segments: Vec<Segment>,
    #[serde(default = "as_listed")]
    pub orientation: String,
    #[serde(default)]
    pub tau_image: Option<String>,
    #[serde(default)]
    pub intersections: Vec<IntersectionDatum>,
    /// Contours this one is freely homotopic to being disjoint from.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disjoint_from: Vec<String>,
}

fn as_listed() -> String {
    "as_listed".into()
}

impl Contour {
    pub fn new(name: &str, word: &[&str], segments: Vec<Segment>) -> Self {
        Self {
            name: name.into(),
            word: word.iter().map(|s| s.to_string()).collect(),
            segments,
            orientation: as_listed(),
            tau_image: None,
            intersections: vec![],
            disjoint_from: vec![],
        }
    }

    pub fn param_len(&self) -> f64 {
        self.segments.len() as f64
    }

    pub fn start_point(&self) -> C64 {
        self.segments[0].start_point()
    }

    pub fn end_point(&self) -> C64 {
        self.segments.last().expect("nonempty contour").end_point()
    }

    /// Point and derivative at contour parameter q in [0, len].
    pub fn eval(&self, q: f64) -> (C64, C64) {
        let k = (q.floor() as usize).min(self.segments.len() - 1);
        self.segments[k].eval(q - k as f64)
    }

    pub fn reversed(&self) -> Contour {
        Contour {
            name: format!("{}_rev", self.name),
            word: invert_word(&self.word),
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            orientation: self.orientation.clone(),
            tau_image: None,
            intersections: vec![],
            disjoint_from: vec![],
        }
    }

    /// Image under tau(z) = conj(z) (intersections are not carried over).
    pub fn reflected(&self) -> Contour {
        Contour {
            name: self.tau_image.clone().unwrap_or_else(|| format!("{}_tau", self.name)),
            word: vec![],
            segments: self.segments.iter().map(Segment::reflected).collect(),
            orientation: self.orientation.clone(),
            tau_image: Some(self.name.clone()),
            intersections: vec![],
            disjoint_from: vec![],
        }
    }

    /// Path `self` followed by `other`.
    pub fn then(&self, other: &Contour) -> Contour {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        let mut word = self.word.clone();
        word.extend(other.word.iter().cloned());
        Contour {
            name: format!("{}*{}", self.name, other.name),
            word,
            segments,
            orientation: as_listed(),
            tau_image: None,
            intersections: vec![],
            disjoint_from: vec![],
        }
    }

    pub fn pole_distance(&self) -> f64 {
        let poles = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        self.segments.iter().flat_map(|s| poles.iter().map(move |p| s.distance_to(*p))).fold(f64::INFINITY, f64::min)
    }

    /// Continuity, closedness and pole margin.
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(ModuliError::GeometryError(format!("{}: no segments", self.name)));
        }
        for w in self.segments.windows(2) {
            if (w[0].end_point() - w[1].start_point()).norm() > CONTINUITY_TOL {
                return Err(ModuliError::GeometryError(format!("{}: segments do not join", self.name)));
            }
        }
        if (self.end_point() - self.start_point()).norm() > CONTINUITY_TOL {
            return Err(ModuliError::GeometryError(format!("{}: contour is not closed", self.name)));
        }
        let d = self.pole_distance();
        if d < POLE_MARGIN {
            return Err(ModuliError::GeometryError(format!("{}: passes within {d:.3} of a pole", self.name)));
        }
        for s in &self.word {
            parse_symbol(s)?;
        }
        Ok(())
    }
}

fn parse_symbol(s: &str) -> Result<(usize, bool)> {
    let (base, inverse) = match s.strip_suffix("^-1") {
        Some(b) => (b, true),
        None => (s, false),
    };
    match base {
        "g1" => Ok((0, inverse)),
        "g2" => Ok((1, inverse)),
        "g3" => Ok((2, inverse)),
        _ => Err(ModuliError::SchemaError(format!("unknown generator symbol {s:?}"))),
    }
}

fn try_inv(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or(ModuliError::EvaluationError)
}

pub fn invert_word(word: &[String]) -> Vec<String> {
    word.iter()
        .rev()
        .map(|s| match s.strip_suffix("^-1") {
            Some(b) => b.to_string(),
            None => format!("{s}^-1"),
        })
        .collect()
}

/// Holonomy of a word given the generator holonomies: the letters are
/// traversed in order, so Hol([w1, ..., wk]) = Hol(wk) ... Hol(w1).
pub fn word_holonomy(gens: &[CMat; 3], word: &[String]) -> Result<CMat> {
    let n = gens[0].nrows();
    let mut out = eye(n);
    for s in word {
        let (i, inverse) = parse_symbol(s)?;
        let g = if inverse { try_inv(&gens[i])? } else { gens[i].clone() };
        out = g * out;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalogue {
    pub basepoint: [f64; 2],
    pub contours: Vec<Contour>,
}

const BUILTIN_CATALOGUE: &str = include_str!("../data/catalogue.json");

impl Catalogue {
    pub fn from_json(text: &str) -> Result<Self> {
        let cat: Catalogue = serde_json::from_str(text).map_err(|e| ModuliError::SchemaError(e.to_string()))?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ModuliError::SchemaError(e.to_string()))?;
        Self::from_json(&text)
    }

    /// The catalogue shipped with the library: hole loops, their pairwise
    /// products, and transversally intersecting pairs.
    pub fn builtin() -> &'static Catalogue {
        static CAT: OnceLock<Catalogue> = OnceLock::new();
        CAT.get_or_init(|| Catalogue::from_json(BUILTIN_CATALOGUE).expect("built-in catalogue is valid"))
    }

    pub fn validate(&self) -> Result<()> {
        let names: HashMap<&str, &Contour> = self.contours.iter().map(|c| (c.name.as_str(), c)).collect();
        if names.len() != self.contours.len() {
            return Err(ModuliError::SchemaError("duplicate contour names".into()));
        }
        for c in &self.contours {
            c.validate()?;
            if let Some(t) = &c.tau_image {
                if !names.contains_key(t.as_str()) {
                    return Err(ModuliError::SchemaError(format!("{}: unknown tau image {t}", c.name)));
                }
            }
            for d in &c.intersections {
                if !names.contains_key(d.with.as_str()) {
                    return Err(ModuliError::SchemaError(format!("{}: unknown partner {}", c.name, d.with)));
                }
                if d.sign != 1 && d.sign != -1 {
                    return Err(ModuliError::SchemaError(format!("{}: sign must be +-1", c.name)));
                }
                for s in &d.resolution_word {
                    parse_symbol(s)?;
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Contour> {
        self.contours
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| ModuliError::SchemaError(format!("no contour named {name:?}")))
    }

    /// The hole loops gamma1, gamma2, gamma3 based at the basepoint.
    pub fn generators(&self) -> Result<[&Contour; 3]> {
        Ok([self.get("gamma1")?, self.get("gamma2")?, self.get("gamma3")?])
    }

    /// Intersection data of (a, b) as seen from a. Data stored on b are
    /// mirrored: parameters swap and the crossing sign flips.
    pub fn intersections(&self, a: &str, b: &str) -> Result<Vec<IntersectionDatum>> {
        let ca = self.get(a)?;
        let cb = self.get(b)?;
        let own: Vec<_> = ca.intersections.iter().filter(|d| d.with == b).cloned().collect();
        let mirrored: Vec<_> = cb
            .intersections
            .iter()
            .filter(|d| d.with == a)
            .map(|d| IntersectionDatum {
                with: b.to_string(),
                point: d.point,
                sign: -d.sign,
                resolution_word: d.resolution_word.clone(),
                param: d.param_with,
                param_with: d.param,
            })
            .collect();
        Ok(if own.is_empty() { mirrored } else { own })
    }

    /// Whether the catalogue records the pair at all: either intersection
    /// points or a declaration that the contours are disjoint.
    pub fn has_pair_data(&self, a: &str, b: &str) -> bool {
        let has = |x: &str, y: &str| {
            self.get(x)
                .map(|c| c.intersections.iter().any(|d| d.with == y) || c.disjoint_from.iter().any(|d| d == y))
                .unwrap_or(false)
        };
        has(a, b) || has(b, a)
    }

    /// Geometric realization of a word as a concatenation of generator loops.
    pub fn realize_word(&self, word: &[String]) -> Result<Contour> {
        let gens = self.generators()?;
        let mut segments = Vec::new();
        for s in word {
            let (i, inverse) = parse_symbol(s)?;
            let g = if inverse { gens[i].reversed() } else { gens[i].clone() };
            segments.extend(g.segments);
        }
        if segments.is_empty() {
            return Err(ModuliError::GeometryError("empty word has no realization".into()));
        }
        let refs: Vec<&str> = word.iter().map(String::as_str).collect();
        Ok(Contour::new("word", &refs, segments))
    }
}

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) on dPsi/du = F(u) Psi.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
const NODES: [f64; 7] = [0.0, C2, C3, C4, C5, 1.0, 1.0];
const MAX_STEPS: usize = 200_000;

/// One Dormand-Prince step; returns the fifth-order update and the
/// embedded error estimate.
fn dp_step(f: &dyn Fn(f64) -> CMat, u: f64, h: f64, y: &CMat) -> (CMat, CMat) {
    let mut k: Vec<CMat> = Vec::with_capacity(7);
    k.push(f(u) * y);
    for s in 1..7 {
        let mut yi = y.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s - 1][j];
            if a != 0.0 {
                yi += kj * c(h * a, 0.0);
            }
        }
        if s == 6 {
            // FSAL stage: evaluated at the fifth-order solution.
            let y5 = yi.clone();
            k.push(f(u + h) * &y5);
            let mut y4 = y.clone();
            for (j, kj) in k.iter().enumerate() {
                y4 += kj * c(h * B4[j], 0.0);
            }
            return (y5.clone(), y5 - y4);
        }
        k.push(f(u + NODES[s] * h) * yi);
    }
    unreachable!("the loop returns at the last stage")
}

fn renormalize(y: CMat) -> CMat {
    let n = y.nrows() as f64;
    let d = y.determinant();
    y / d.powf(1.0 / n)
}

fn error_norm(err: &CMat, y0: &CMat, y1: &CMat, tol: f64) -> f64 {
    let mut m: f64 = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc = tol + tol * a.norm().max(b.norm());
        m = m.max(e.norm() / sc);
    }
    m
}

/// Adaptive integration over [u0, u1] (either direction), recording the
/// accepted mesh when requested.
fn integrate(
    f: &dyn Fn(f64) -> CMat,
    u0: f64,
    u1: f64,
    y0: CMat,
    tol: f64,
    mut mesh: Option<&mut Vec<f64>>,
) -> Result<CMat> {
    let span = u1 - u0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut u = u0;
    let mut y = y0;
    let mut h = dir * (span.abs() * 0.02).min(0.02);
    if let Some(m) = mesh.as_deref_mut() {
        m.push(u0);
    }
    for _ in 0..MAX_STEPS {
        if (u1 - u) * dir <= 0.0 {
            return Ok(y);
        }
        if (u + h - u1) * dir > 0.0 {
            h = u1 - u;
        }
        let (y5, err) = dp_step(f, u, h, &y);
        let e = error_norm(&err, &y, &y5, tol);
        if !e.is_finite() {
            return Err(ModuliError::ToleranceNotMet(e));
        }
        if e <= 1.0 {
            u = if (u + h - u1) * dir >= 0.0 { u1 } else { u + h };
            y = renormalize(y5);
            if let Some(m) = mesh.as_deref_mut() {
                m.push(u);
            }
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 {
            return Err(ModuliError::ToleranceNotMet(e));
        }
    }
    Err(ModuliError::ToleranceNotMet(f64::INFINITY))
}

/// Replay on a fixed mesh with the fifth-order update.
fn integrate_on_mesh(f: &dyn Fn(f64) -> CMat, nodes: &[f64], y0: CMat) -> CMat {
    let mut y = y0;
    for w in nodes.windows(2) {
        let (y5, _) = dp_step(f, w[0], w[1] - w[0], &y);
        y = renormalize(y5);
    }
    y
}

fn generator<'a>(conn: &'a RationalConnection, seg: &Segment) -> impl Fn(f64) -> CMat + 'a {
    let seg = seg.clone();
    move |u| {
        let (z, dz) = seg.eval(u);
        -(conn.a(z) * dz)
    }
}

fn check_margin(c: &Contour) -> Result<()> {
    let d = c.pole_distance();
    if d < POLE_MARGIN {
        return Err(ModuliError::PoleTooClose(d));
    }
    Ok(())
}

/// Pieces (segment index, u0, u1) covering the parameter range [p0, p1].
fn pieces(c: &Contour, p0: f64, p1: f64) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for k in 0..c.segments.len() {
        let a = (p0 - k as f64).max(0.0);
        let b = (p1 - k as f64).min(1.0);
        if b > a {
            out.push((k, a, b));
        }
    }
    out
}

/// Parallel transport along the contour from parameter p0 to p1 (p0 <= p1).
/// Later pieces multiply on the left.
pub fn transport(conn: &RationalConnection, c: &Contour, p0: f64, p1: f64, tol: f64) -> Result<CMat> {
    check_margin(c)?;
    let mut psi = eye(conn.n());
    for (k, a, b) in pieces(c, p0, p1) {
        let f = generator(conn, &c.segments[k]);
        psi = integrate(&f, a, b, psi, tol, None)?;
    }
    Ok(psi)
}

/// Hol(A, c): solution of dPsi = -A(c(s)) c'(s) Psi ds with Psi(start) = 1.
pub fn holonomy(conn: &RationalConnection, c: &Contour, tol: f64) -> Result<CMat> {
    transport(conn, c, 0.0, c.param_len(), tol)
}

/// Holonomy of the loop re-based at contour parameter q.
pub fn rebased_holonomy(conn: &RationalConnection, c: &Contour, q: f64, tol: f64) -> Result<CMat> {
    let head = transport(conn, c, 0.0, q, tol)?;
    let tail = transport(conn, c, q, c.param_len(), tol)?;
    Ok(head * tail)
}

/// Holonomy with the adaptive mesh frozen at a reference connection, so that
/// finite differences in the residues are smooth.
#[derive(Debug, Clone)]
pub struct FrozenHolonomy {
    contour: Contour,
    meshes: Vec<Vec<f64>>,
}

impl FrozenHolonomy {
    pub fn new(conn: &RationalConnection, c: &Contour, tol: f64) -> Result<Self> {
        check_margin(c)?;
        let mut meshes = Vec::with_capacity(c.segments.len());
        let mut psi = eye(conn.n());
        for seg in &c.segments {
            let f = generator(conn, seg);
            let mut m = Vec::new();
            psi = integrate(&f, 0.0, 1.0, psi, tol, Some(&mut m))?;
            meshes.push(m);
        }
        Ok(Self { contour: c.clone(), meshes })
    }

    pub fn eval(&self, conn: &RationalConnection) -> CMat {
        let mut psi = eye(conn.n());
        for (seg, m) in self.contour.segments.iter().zip(&self.meshes) {
            let f = generator(conn, seg);
            psi = integrate_on_mesh(&f, m, psi);
        }
        psi
    }

    pub fn steps(&self) -> usize {
        self.meshes.iter().map(|m| m.len().saturating_sub(1)).sum()
    }
}

/// phi_Gamma = Tr Hol(A, Gamma) in the defining representation. Complex in
/// general; real whenever the holonomy is conjugate to a real matrix.
pub fn goldman_function(conn: &RationalConnection, c: &Contour, tol: f64) -> Result<C64> {
    Ok(holonomy(conn, c, tol)?.trace())
}

/// ||Hol(tau(c)) - bar(Hol(c))^{-1}||_F / ||bar(Hol(c))^{-1}||_F. Relative,
/// because the integration error of either holonomy scales with its norm.
pub fn sigma_check(conn: &RationalConnection, c: &Contour, tol: f64) -> Result<f64> {
    let h = holonomy(conn, c, tol)?;
    let ht = holonomy(conn, &c.reflected(), tol)?;
    let target = try_inv(&dagger(&h))?;
    Ok((ht - &target).norm() / target.norm())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub hole: usize,
    /// Eigenvalues of the hole holonomy, sorted by real part.
    pub eigenvalues: Vec<[f64; 2]>,
    /// exp(-2 t theta_k), ascending.
    pub expected: Vec<f64>,
    /// Max relative deviation between the two lists.
    pub max_deviation: f64,
    /// All eigenvalues positive real (within the deviation tolerance).
    pub hyperbolic: bool,
}

/// Spectral tolerance of the hole conjugacy check (relative).
pub const SPECTRAL_TOL: f64 = 1e-7;

/// Compare the spectrum of Hol(A, gamma_j) with exp(2itH_j).
pub fn hole_conjugacy_check(
    conn: &RationalConnection,
    j: usize,
    h: &CartanVector,
    t: f64,
    tol: f64,
) -> Result<SpectralReport> {
    if !(1..=3).contains(&j) {
        return Err(ModuliError::SchemaError(format!("hole index {j} not in 1..=3")));
    }
    let gens = Catalogue::builtin().generators()?;
    let hol = holonomy(conn, gens[j - 1], tol)?;
    let mut ev = eigenvalues(&hol);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut expected: Vec<f64> = h.theta.iter().map(|th| (-2.0 * t * th).exp()).collect();
    expected.sort_by(f64::total_cmp);
    let max_deviation = ev.iter().zip(&expected).map(|(a, b)| (a - b).norm() / b.max(1.0)).fold(0.0, f64::max);
    let hyperbolic = ev.iter().all(|z| z.re > 0.0 && z.im.abs() <= SPECTRAL_TOL * z.re.max(1.0));
    let report = SpectralReport {
        hole: j,
        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
        expected,
        max_deviation,
        hyperbolic,
    };
    if max_deviation > SPECTRAL_TOL {
        return Err(ModuliError::SpectralMismatch(max_deviation));
    }
    Ok(report)
}

/// Holonomies of the three hole loops.
pub fn generator_holonomies(conn: &RationalConnection, tol: f64) -> Result<[CMat; 3]> {
    let gens = Catalogue::builtin().generators()?;
    Ok([holonomy(conn, gens[0], tol)?, holonomy(conn, gens[1], tol)?, holonomy(conn, gens[2], tol)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;

    fn circle(cx: f64, r: f64, start: f64, sweep: f64) -> Segment {
        Segment::Arc { center: [cx, 0.0], radius: r, start, end: start + sweep }
    }

    #[test]
    fn builtin_catalogue_loads() {
        let cat = Catalogue::builtin();
        assert!(cat.contours.len() >= 14);
        assert!(cat.generators().is_ok());
    }

    #[test]
    fn single_pole_loop_is_an_exponential() {
        let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.3), c(0.1, 0.2), c(-0.1, 0.2), c(0.0, -0.3)]);
        let conn = RationalConnection { x1: x.clone(), x2: zeros(2), scale: 1.0 };
        let loop1 = Contour::new("l", &[], vec![circle(1.0, 0.5, std::f64::consts::PI, -2.0 * std::f64::consts::PI)]);
        let h = holonomy(&conn, &loop1, 1e-12).unwrap();
        // Clockwise around the pole: -oint A dz = 2 pi i X.
        let want = expm(&(&x * c(0.0, 2.0 * std::f64::consts::PI)));
        assert!((h - want).camax() < 1e-9);
    }

    #[test]
    fn frozen_replay_matches_adaptive_solution() {
        let x1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.3), c(0.1, 0.2), c(-0.1, 0.2), c(0.0, -0.3)]);
        let x2 = CMat::from_row_slice(2, 2, &[c(0.0, -0.1), c(0.3, 0.0), c(-0.3, 0.0), c(0.0, 0.1)]);
        let conn = RationalConnection { x1, x2, scale: 0.4 };
        let cat = Catalogue::builtin();
        let c = cat.get("eight").unwrap();
        let frozen = FrozenHolonomy::new(&conn, c, 1e-10).unwrap();
        let h = holonomy(&conn, c, 1e-10).unwrap();
        assert!((frozen.eval(&conn) - h).camax() < 1e-13);
    }

    #[test]
    fn arc_distance_handles_partial_arcs() {
        let s = Segment::Arc { center: [0.0, 0.0], radius: 1.0, start: 0.0, end: std::f64::consts::FRAC_PI_2 };
        assert!((s.distance_to(C64::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((s.distance_to(C64::new(-2.0, 0.0)) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pole_margin_is_enforced() {
        let conn = RationalConnection::zero(2);
        let bad = Contour::new("bad", &[], vec![circle(1.0, 0.05, 0.0, 2.0 * std::f64::consts::PI)]);
        assert!(matches!(holonomy(&conn, &bad, 1e-10), Err(ModuliError::PoleTooClose(_))));
        assert!(matches!(bad.validate(), Err(ModuliError::GeometryError(_))));
    }

    #[test]
    fn unknown_symbols_are_schema_errors() {
        assert!(matches!(parse_symbol("g4"), Err(ModuliError::SchemaError(_))));
        assert_eq!(invert_word(&["g1".into(), "g2^-1".into()]), vec!["g2".to_string(), "g1^-1".to_string()]);
    }
}
