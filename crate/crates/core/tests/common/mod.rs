//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use montesinos::feasibility::{LinearConstraint, LinearSystem, Provenance, Relation};
use montesinos::gauss_bonnet::{GeneralizedGraph, VertexKind};
use montesinos::rational::Rational;
use rand::seq::SliceRandom;
use rand::Rng;

/// Smallest-magnitude `x` with `p x ≡ -1 (mod q)`, by scanning every residue.
pub fn brute_pbar(p: i64, q: i64) -> Option<i64> {
    let mut best: Option<i64> = None;
    for x in -q..=q {
        if (p * x + 1).rem_euclid(q) != 0 || 2 * x.abs() > q {
            continue;
        }
        best = match best {
            None => Some(x),
            Some(b) if x.abs() < b.abs() || (x.abs() == b.abs() && x > b) => Some(x),
            keep => keep,
        };
    }
    best
}

// Endpoint labels for the oracle: top-left, bottom-left, top-right, bottom-right.
const LT: usize = 0;
const LB: usize = 1;
const RT: usize = 2;
const RB: usize = 3;

/// Endpoint pairing of the rational tangle `p/q`, built from its continued
/// fraction: `n` horizontal half-twists swap the right endpoints `n` times,
/// and `T ↦ 1/T` reflects across the `LT`-`RB` diagonal.
pub fn twist_pairing(p: i64, q: i64) -> [usize; 4] {
    if q == 0 {
        // The ∞ tangle: two vertical arcs.
        return pairing_of(&[(LT, LB), (RT, RB)]);
    }
    let a = p.div_euclid(q);
    let r = p - a * q;
    let inner = twist_pairing(q, r);
    let reflected = relabel(inner, |e| match e {
        RT => LB,
        LB => RT,
        other => other,
    });
    let mut t = reflected;
    for _ in 0..a.rem_euclid(2) {
        t = relabel(t, |e| match e {
            RT => RB,
            RB => RT,
            other => other,
        });
    }
    t
}

fn pairing_of(arcs: &[(usize, usize)]) -> [usize; 4] {
    let mut partner = [0; 4];
    for &(a, b) in arcs {
        partner[a] = b;
        partner[b] = a;
    }
    partner
}

fn relabel(partner: [usize; 4], f: impl Fn(usize) -> usize) -> [usize; 4] {
    let mut out = [0; 4];
    for e in 0..4 {
        out[f(e)] = f(partner[e]);
    }
    out
}

/// Components of the closure of three tangles side by side, with `e0`
/// half-twists added to the last tangle.
pub fn twist_component_count(tangles: [(i64, i64); 3], e0: i64) -> usize {
    let mut fractions = tangles;
    fractions[2].0 += e0 * fractions[2].1;
    let pairings = fractions.map(|(p, q)| twist_pairing(p, q));
    // Walk arcs: inside a tangle use its pairing, between tangles cross to the neighbor.
    let across = |i: usize, e: usize| -> (usize, usize) {
        match e {
            RT => ((i + 1) % 3, LT),
            RB => ((i + 1) % 3, LB),
            LT => ((i + 2) % 3, RT),
            _ => ((i + 2) % 3, RB),
        }
    };
    let mut seen = [[false; 4]; 3];
    let mut components = 0;
    for i in 0..3 {
        for e in 0..4 {
            if seen[i][e] {
                continue;
            }
            components += 1;
            let (mut ti, mut te) = (i, e);
            while !seen[ti][te] {
                seen[ti][te] = true;
                let other = pairings[ti][te];
                seen[ti][other] = true;
                (ti, te) = across(ti, other);
            }
        }
    }
    components
}

/// All slopes `p/q` with `2 <= q <= q_max`, gcd 1 and `2|p| <= q`, ties at `q = 2` kept positive.
pub fn reduced_slopes(q_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for q in 2..=q_max {
        for p in -(q / 2)..=(q / 2) {
            if num_integer::gcd(p, q) == 1 && !(2 * p == -q) {
                out.push((p, q));
            }
        }
    }
    out
}

/// A closed triangulated surface: Euler characteristic and oriented triangles.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub euler_char: i64,
    pub vertex_count: usize,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn tetrahedron() -> Self {
        Triangulation {
            euler_char: 2,
            vertex_count: 4,
            triangles: vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]],
        }
    }

    /// `n × m` grid on the torus, each square split along its diagonal.
    pub fn torus_grid(n: usize, m: usize) -> Self {
        let v = |i: usize, j: usize| (i % n) * m + (j % m);
        let mut triangles = Vec::new();
        for i in 0..n {
            for j in 0..m {
                triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
            }
        }
        Triangulation {
            euler_char: 0,
            vertex_count: n * m,
            triangles,
        }
    }

    /// Cone a new vertex over triangle `t`.
    pub fn stellar(&mut self, t: usize) {
        let [a, b, c] = self.triangles[t];
        let x = self.vertex_count;
        self.vertex_count += 1;
        self.triangles[t] = [a, b, x];
        self.triangles.push([b, c, x]);
        self.triangles.push([c, a, x]);
    }

    /// Split the edge `u -> w` of triangle `t` and the matching edge of its neighbor.
    pub fn split_edge(&mut self, t: usize, side: usize) {
        let tri = self.triangles[t];
        let (u, w, z) = (tri[side], tri[(side + 1) % 3], tri[(side + 2) % 3]);
        let other = self
            .triangles
            .iter()
            .enumerate()
            .find_map(|(k, s)| {
                (0..3)
                    .find(|&r| s[r] == w && s[(r + 1) % 3] == u)
                    .map(|r| (k, s[(r + 2) % 3]))
            })
            .expect("closed orientable surface");
        let x = self.vertex_count;
        self.vertex_count += 1;
        self.triangles[t] = [u, x, z];
        self.triangles.push([x, w, z]);
        let (k, y) = other;
        self.triangles[k] = [w, x, y];
        self.triangles.push([x, u, y]);
    }

    pub fn random<R: Rng>(rng: &mut R, torus: bool, moves: usize) -> Self {
        let mut t = if torus {
            Triangulation::torus_grid(rng.gen_range(3..=5), rng.gen_range(3..=5))
        } else {
            Triangulation::tetrahedron()
        };
        for _ in 0..moves {
            let k = rng.gen_range(0..t.triangles.len());
            if rng.gen_bool(0.5) {
                t.stellar(k);
            } else {
                t.split_edge(k, rng.gen_range(0..3));
            }
        }
        t
    }

    /// Interior angles (units of π) summing to exactly 2 at every vertex,
    /// each in (0, 1), chosen from random integer weights.
    pub fn flat_angles<R: Rng>(&self, rng: &mut R) -> Vec<Vec<Rational>> {
        let mut corners: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (f, tri) in self.triangles.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                corners.entry(v).or_default().push((f, k));
            }
        }
        let mut angles = vec![vec![Rational::zero(); 3]; self.triangles.len()];
        for list in corners.values() {
            let weights = loop {
                let w: Vec<i64> = (0..list.len()).map(|_| rng.gen_range(1..=6)).collect();
                let total: i64 = w.iter().sum();
                if w.iter().all(|&x| 2 * x < total) {
                    break w;
                }
            };
            let total: i64 = weights.iter().sum();
            for (&(f, k), &w) in list.iter().zip(&weights) {
                angles[f][k] = Rational::new(2 * w, total);
            }
        }
        angles
    }

    pub fn graph(&self, angles: &[Vec<Rational>]) -> GeneralizedGraph {
        let polygons: Vec<Vec<usize>> = self.triangles.iter().map(|t| t.to_vec()).collect();
        GeneralizedGraph::from_polygons(
            self.euler_char,
            vec![VertexKind::Plain; self.vertex_count],
            &polygons,
            angles,
        )
    }
}

/// Raises one corner at a random vertex while staying below 1, so that
/// vertex's angle sum exceeds 2.
pub fn perturb_up<R: Rng>(graph: &mut GeneralizedGraph, rng: &mut R) -> usize {
    let mut corners: Vec<(usize, usize)> = graph
        .faces
        .iter()
        .enumerate()
        .flat_map(|(f, face)| (0..face.corners.len()).map(move |c| (f, c)))
        .collect();
    corners.shuffle(rng);
    let (f, c) = corners[0];
    let corner = &mut graph.faces[f].corners[c];
    let room = Rational::one() - corner.angle.clone();
    corner.angle = corner.angle.clone() + room / 2;
    corner.vertex
}

/// Random system over `vars` variables with integer coefficients in [-5, 5].
pub fn random_system<R: Rng>(rng: &mut R, vars: usize, rows: usize) -> LinearSystem {
    let names: Vec<String> = (0..vars).map(|i| format!("x{i}")).collect();
    let mut sys = LinearSystem::new(names);
    let relations = [
        Relation::Le,
        Relation::Lt,
        Relation::Ge,
        Relation::Gt,
        Relation::Eq,
    ];
    for _ in 0..rows {
        let terms: Vec<(usize, Rational)> = (0..vars)
            .map(|v| (v, Rational::from(rng.gen_range(-5..=5i64))))
            .collect();
        let rel = if rng.gen_bool(0.1) {
            Relation::Eq
        } else {
            relations[rng.gen_range(0..4)]
        };
        let rhs = Rational::from(rng.gen_range(-5..=5i64));
        sys.push(LinearConstraint::new(terms, rel, rhs, Provenance::Input))
            .expect("variables declared");
    }
    sys
}

/// Weighted sum of constraints read in `<=` orientation, recomputed from
/// scratch: (coefficients, rhs, any strict row with positive weight).
pub fn combine(
    sys: &LinearSystem,
    multipliers: &[(usize, Rational)],
) -> (Vec<Rational>, Rational, bool) {
    let n = sys.variables().len();
    let mut coeffs = vec![Rational::zero(); n];
    let mut rhs = Rational::zero();
    let mut strict = false;
    for (idx, m) in multipliers {
        let c = &sys.constraints()[*idx];
        let sign = match c.relation {
            Relation::Ge | Relation::Gt => -1,
            _ => 1,
        };
        let w = m.clone() * sign;
        for (v, a) in &c.coefficients {
            coeffs[*v] = coeffs[*v].clone() + a.clone() * w.clone();
        }
        rhs = rhs + c.rhs.clone() * w;
        if matches!(c.relation, Relation::Lt | Relation::Gt) && m.is_positive() {
            strict = true;
        }
    }
    (coeffs, rhs, strict)
}

/// Exact feasible interval of variable `v` given fixed values for the others,
/// as (lower, lower_strict, upper, upper_strict); `None` ends are unbounded.
pub type Bound = Option<(Rational, bool)>;

pub fn extension_interval(
    sys: &LinearSystem,
    v: usize,
    point: &[Rational],
) -> Option<(Bound, Bound)> {
    let mut lo: Bound = None;
    let mut hi: Bound = None;
    let tighter_lo = |cur: &Bound, val: Rational, strict: bool| -> Bound {
        match cur {
            Some((x, s)) if *x > val || (*x == val && *s) => Some((x.clone(), *s)),
            _ => Some((val, strict)),
        }
    };
    let tighter_hi = |cur: &Bound, val: Rational, strict: bool| -> Bound {
        match cur {
            Some((x, s)) if *x < val || (*x == val && *s) => Some((x.clone(), *s)),
            _ => Some((val, strict)),
        }
    };
    for c in sys.constraints() {
        let a = c
            .coefficients
            .get(&v)
            .cloned()
            .unwrap_or_else(Rational::zero);
        let rest: Rational = c
            .coefficients
            .iter()
            .filter(|(w, _)| **w != v)
            .map(|(w, x)| x.clone() * point[*w].clone())
            .sum();
        let room = c.rhs.clone() - rest;
        if a.is_zero() {
            let ok = match c.relation {
                Relation::Le => Rational::zero() <= room,
                Relation::Lt => Rational::zero() < room,
                Relation::Ge => Rational::zero() >= room,
                Relation::Gt => Rational::zero() > room,
                Relation::Eq => room.is_zero(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        let val = room / a.clone();
        let pos = a.is_positive();
        // a x REL room  ⇔  x REL' room / a, flipping for negative a.
        match (c.relation, pos) {
            (Relation::Le, true) | (Relation::Ge, false) => hi = tighter_hi(&hi, val, false),
            (Relation::Lt, true) | (Relation::Gt, false) => hi = tighter_hi(&hi, val, true),
            (Relation::Ge, true) | (Relation::Le, false) => lo = tighter_lo(&lo, val, false),
            (Relation::Gt, true) | (Relation::Lt, false) => lo = tighter_lo(&lo, val, true),
            (Relation::Eq, _) => {
                lo = tighter_lo(&lo, val.clone(), false);
                hi = tighter_hi(&hi, val, false);
            }
        }
    }
    if let (Some((l, ls)), Some((h, hs))) = (&lo, &hi) {
        if l > h || (l == h && (*ls || *hs)) {
            return None;
        }
    }
    Some((lo, hi))
}

/// Random rational in [-3, 3] with denominator at most 60.
pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let d = rng.gen_range(1..=60i64);
    Rational::new(rng.gen_range(-3 * d..=3 * d), d)
}
