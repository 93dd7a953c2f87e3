//! Rational tangles and length-3 Montesinos knots.
//!
//! A knot `K(p1/q1, p2/q2, p3/q3)` is stored as three tangles whose slopes are
//! reduced to the representative `2|p| <= q`, plus the integer `e0` collected
//! from the reductions. Only `(q_i, |pbar_i|)` matters for certification; the
//! rest is kept so that knots print and round-trip faithfully.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TangleError {
    #[error("denominator {q} is below 2 (trivial tangle)")]
    TrivialTangle { q: i64 },
    #[error("{p}/{q} is not in lowest terms")]
    NotCoprime { p: i64, q: i64 },
    #[error("|pbar({p}, {q})| = {pbar_abs}, expected 2")]
    PbarNotTwo { p: i64, q: i64, pbar_abs: i64 },
    #[error("value out of range: {0}")]
    Overflow(String),
    #[error("malformed knot literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },
    #[error("not a knot: {components} components")]
    NotAKnot { components: usize },
}

/// Mod-2 class of a tangle slope, which fixes how the four endpoints are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Zero,
    One,
    Infinity,
}

/// `pbar` with `p * pbar ≡ -1 (mod q)` and `2|pbar| <= q`; ties go to the positive value.
pub fn mod_inverse_min_abs(p: i64, q: i64) -> Result<i64, TangleError> {
    if q < 2 {
        return Err(TangleError::TrivialTangle { q });
    }
    let egcd = p.rem_euclid(q).extended_gcd(&q);
    if egcd.gcd != 1 {
        return Err(TangleError::NotCoprime { p, q });
    }
    // egcd.x * p ≡ 1, so -x is the inverse of -p.
    let mut pbar = (-egcd.x).rem_euclid(q);
    if 2 * pbar > q {
        pbar -= q;
    }
    Ok(pbar)
}

pub fn parity_type(p: i64, q: i64) -> Parity {
    match (q.rem_euclid(2), p.rem_euclid(2)) {
        (0, _) => Parity::Infinity,
        (_, 0) => Parity::Zero,
        _ => Parity::One,
    }
}

/// Splits `num/den` (den >= 2, coprime) into `(shift, p)` with `num/den = shift + p/den`
/// and `2|p| <= den`, preferring `p > 0` on the tie `den = 2`.
fn reduce_slope(num: i64, den: i64) -> (i64, i64) {
    let mut p = num.rem_euclid(den);
    if 2 * p > den {
        p -= den;
    }
    ((num - p) / den, p)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalTangle {
    p: i64,
    q: i64,
    pbar: i64,
    parity: Parity,
}

impl RationalTangle {
    pub fn new(p: i64, q: i64) -> Result<Self, TangleError> {
        let pbar = mod_inverse_min_abs(p, q)?;
        Ok(RationalTangle {
            p,
            q,
            pbar,
            parity: parity_type(p, q),
        })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn pbar(&self) -> i64 {
        self.pbar
    }

    pub fn pbar_abs(&self) -> i64 {
        self.pbar.abs()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn slope(&self) -> Rational {
        Rational::new(self.p, self.q)
    }

    fn reduced(&self) -> (i64, RationalTangle) {
        let (shift, p) = reduce_slope(self.p, self.q);
        (
            shift,
            RationalTangle::new(p, self.q).expect("coprimality is preserved by shifts"),
        )
    }

    fn sort_key(&self) -> (i64, i64) {
        (self.q, self.p)
    }
}

/// Length-3 Montesinos knot or link.
///
/// Each tangle satisfies `2|p_i| <= q_i`. Tangles are kept in the order they were
/// given; [`MontesinosKnot::canonical`] sorts them by `(q, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MontesinosKnot {
    tangles: [RationalTangle; 3],
    e0: i64,
}

/// Orbit representative used to deduplicate enumerations: sorted `(q, p)` pairs
/// and `e0 mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitKey {
    pub tangles: [(i64, i64); 3],
    pub e0_parity: i64,
}

impl OrbitKey {
    pub fn knot(&self) -> MontesinosKnot {
        MontesinosKnot::from_pairs_ordered(self.tangles.map(|(q, p)| (p, q)), self.e0_parity)
            .expect("orbit keys hold reduced slopes")
    }
}

/// One of the 12 relabelings generated by reordering the tangles and mirroring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitMove {
    pub permutation: [usize; 3],
    pub mirrored: bool,
}

pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl MontesinosKnot {
    /// Reduces each slope, collects integer parts into `e0`, and sorts by `(q, p)`.
    pub fn normalize(fractions: &[Rational; 3]) -> Result<Self, TangleError> {
        let mut pairs = [(0i64, 0i64); 3];
        for (slot, r) in pairs.iter_mut().zip(fractions) {
            let (n, d) = r
                .to_i64_pair()
                .ok_or_else(|| TangleError::Overflow(r.to_string()))?;
            *slot = (n, d);
        }
        Ok(Self::from_pairs_ordered(pairs, 0)?.canonical())
    }

    /// Same as [`normalize`](Self::normalize) for integer pairs; the pairs need not be reduced.
    pub fn from_fractions(pairs: [(i64, i64); 3]) -> Result<Self, TangleError> {
        Ok(Self::from_pairs_ordered(pairs, 0)?.canonical())
    }

    /// Builds a knot keeping the given tangle order. Each `p/q` is reduced
    /// (and must have `q >= 2` in lowest terms after a sign fix).
    pub fn from_pairs_ordered(pairs: [(i64, i64); 3], e0: i64) -> Result<Self, TangleError> {
        let mut e0 = e0;
        let mut tangles = Vec::with_capacity(3);
        for (p, q) in pairs {
            let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
            let g = p.gcd(&q);
            let (p, q) = if g > 1 { (p / g, q / g) } else { (p, q) };
            if q < 2 {
                return Err(TangleError::TrivialTangle { q });
            }
            let (shift, t) = RationalTangle::new(p, q)?.reduced();
            e0 = e0
                .checked_add(shift)
                .ok_or_else(|| TangleError::Overflow(format!("e0 + {shift}")))?;
            tangles.push(t);
        }
        let tangles: [RationalTangle; 3] = tangles.try_into().expect("three tangles");
        Ok(MontesinosKnot { tangles, e0 })
    }

    pub fn tangles(&self) -> &[RationalTangle; 3] {
        &self.tangles
    }

    pub fn e0(&self) -> i64 {
        self.e0
    }

    pub fn q(&self) -> [i64; 3] {
        [0, 1, 2].map(|i| self.tangles[i].q)
    }

    pub fn pbar_abs(&self) -> [i64; 3] {
        [0, 1, 2].map(|i| self.tangles[i].pbar_abs())
    }

    /// Tangles sorted by `(q, p)`.
    pub fn canonical(&self) -> Self {
        let mut tangles = self.tangles.clone();
        tangles.sort_by_key(RationalTangle::sort_key);
        MontesinosKnot {
            tangles,
            e0: self.e0,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.tangles
            .windows(2)
            .all(|w| w[0].sort_key() <= w[1].sort_key())
    }

    /// Mirror image: every slope and `e0` negated, then re-reduced in place.
    pub fn mirror(&self) -> Self {
        let pairs = [0, 1, 2].map(|i| (-self.tangles[i].p, self.tangles[i].q));
        Self::from_pairs_ordered(pairs, -self.e0).expect("mirror of a valid knot is valid")
    }

    /// Tangle `i` of the result is tangle `permutation[i]` of `self`.
    pub fn permute(&self, permutation: [usize; 3]) -> Self {
        let mut seen = [false; 3];
        for &j in &permutation {
            assert!(j < 3 && !seen[j], "not a permutation: {permutation:?}");
            seen[j] = true;
        }
        MontesinosKnot {
            tangles: permutation.map(|j| self.tangles[j].clone()),
            e0: self.e0,
        }
    }

    pub fn apply(&self, mv: OrbitMove) -> Self {
        let k = self.permute(mv.permutation);
        if mv.mirrored {
            k.mirror()
        } else {
            k
        }
    }

    /// All 12 images under tangle reordering and mirroring, identity first.
    pub fn orbit(&self) -> Vec<(OrbitMove, MontesinosKnot)> {
        let mut out = Vec::with_capacity(12);
        for mirrored in [false, true] {
            for permutation in PERMUTATIONS {
                let mv = OrbitMove {
                    permutation,
                    mirrored,
                };
                out.push((mv, self.apply(mv)));
            }
        }
        out
    }

    /// Smallest canonical form over the orbit, keeping only the parity of `e0`.
    /// Knots sharing a key have the same `(q_i, |pbar_i|)` multiset and the
    /// same closure parities, which is all that certification looks at.
    pub fn orbit_key(&self) -> OrbitKey {
        self.orbit()
            .into_iter()
            .map(|(_, k)| OrbitKey {
                tangles: k.canonical().tangles.map(|t| t.sort_key()),
                e0_parity: k.e0.rem_euclid(2),
            })
            .min()
            .expect("orbit is nonempty")
    }

    /// Parities seen by the closure, with `e0` twists folded into the last tangle.
    pub fn closure_parities(&self) -> [Parity; 3] {
        let [a, b, c] = self.display_fractions();
        [
            parity_type(a.0, a.1),
            parity_type(b.0, b.1),
            parity_type(c.0, c.1),
        ]
    }

    /// Number of components of the closure, traced through the 12 tangle endpoints.
    pub fn component_count(&self) -> usize {
        // Endpoint 4*i + {0: Lt, 1: Lb, 2: Rt, 3: Rb} of tangle i.
        const LT: usize = 0;
        const LB: usize = 1;
        const RT: usize = 2;
        const RB: usize = 3;
        let mut parent: Vec<usize> = (0..12).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        let mut join = |a: usize, b: usize| {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        };
        for (i, parity) in self.closure_parities().into_iter().enumerate() {
            let base = 4 * i;
            let pairs = match parity {
                Parity::Zero => [(LT, RT), (LB, RB)],
                Parity::One => [(LT, RB), (LB, RT)],
                Parity::Infinity => [(LT, LB), (RT, RB)],
            };
            for (a, b) in pairs {
                join(base + a, base + b);
            }
            let next = 4 * ((i + 1) % 3);
            join(base + RT, next + LT);
            join(base + RB, next + LB);
        }
        let mut roots: Vec<usize> = (0..12).map(|x| find(&mut parent, x)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    pub fn is_knot(&self) -> bool {
        self.component_count() == 1
    }

    /// `Σ 1/(q_i - 1) <= 1`, compared exactly.
    pub fn sum_condition(&self) -> bool {
        let sum: Rational = self.tangles.iter().map(|t| Rational::new(1, t.q - 1)).sum();
        sum <= 1
    }

    /// Slopes with `e0` folded into the last tangle, so that the printed form
    /// parses back to the same knot.
    pub fn display_fractions(&self) -> [(i64, i64); 3] {
        let mut out = self.tangles.clone().map(|t| (t.p, t.q));
        out[2].0 += self.e0 * out[2].1;
        out
    }

    pub fn to_json(&self) -> KnotJson {
        KnotJson {
            tangles: self.tangles.clone().map(|t| [t.p, t.q]),
            e0: self.e0,
        }
    }

    pub fn from_json(json: &KnotJson) -> Result<Self, TangleError> {
        Self::from_pairs_ordered(json.tangles.map(|[p, q]| (p, q)), json.e0).map(|k| k.canonical())
    }
}

impl fmt::Display for MontesinosKnot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.display_fractions();
        write!(f, "K({}/{}, {}/{}, {}/{})", a.0, a.1, b.0, b.1, c.0, c.1)
    }
}

impl FromStr for MontesinosKnot {
    type Err = TangleError;

    /// Parses `K(p1/q1, p2/q2, p3/q3)`; the `K` prefix is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| TangleError::Parse {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s.trim();
        let body = body.strip_prefix('K').unwrap_or(body).trim();
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| err("expected parentheses around three fractions"))?;
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 3 {
            return Err(err("expected exactly three fractions"));
        }
        let mut pairs = [(0i64, 0i64); 3];
        for (slot, part) in pairs.iter_mut().zip(&parts) {
            let (n, d) = part
                .split_once('/')
                .ok_or_else(|| err(&format!("`{}` is not of the form p/q", part.trim())))?;
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| err(&format!("bad numerator `{}`", n.trim())))?;
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|_| err(&format!("bad denominator `{}`", d.trim())))?;
            if d == 0 {
                return Err(err("zero denominator"));
            }
            *slot = (n, d);
        }
        Self::from_fractions(pairs)
    }
}

/// JSON form: `{"tangles": [[p,q],[p,q],[p,q]], "e0": int}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotJson {
    pub tangles: [[i64; 2]; 3],
    #[serde(default)]
    pub e0: i64,
}

impl Serialize for MontesinosKnot {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MontesinosKnot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = KnotJson::deserialize(deserializer)?;
        MontesinosKnot::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// `p/q = n + outer / (2 + inner / m)` with `outer, inner ∈ {+1, -1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialFractionForm {
    pub n: i64,
    pub m: i64,
    pub signs: (i8, i8),
    pub reconstructed: Rational,
}

impl PartialFractionForm {
    pub fn evaluate(&self) -> Rational {
        let (outer, inner) = self.signs;
        let inner_term = Rational::from(2) + Rational::new(inner as i64, self.m);
        Rational::from(self.n) + Rational::from(outer as i64) / inner_term
    }
}

impl fmt::Display for PartialFractionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |s: i8| if s > 0 { '+' } else { '-' };
        let (outer, inner) = self.signs;
        let (num, den) = self.reconstructed.to_i64_pair().unwrap_or((0, 1));
        if self.n == 0 && outer > 0 {
            write!(f, "{num}/{den} = 1/(2 {} 1/{})", sign(inner), self.m)
        } else {
            write!(
                f,
                "{num}/{den} = {} {} 1/(2 {} 1/{})",
                self.n,
                sign(outer),
                sign(inner),
                self.m
            )
        }
    }
}

/// Decomposes `p/q` with `|pbar| = 2` as `n ± 1/(2 ± 1/m)`, where `p = n q + m`, `2|m| < q`.
pub fn partial_fraction_small_pbar(p: i64, q: i64) -> Result<PartialFractionForm, TangleError> {
    let pbar = mod_inverse_min_abs(p, q)?;
    if pbar.abs() != 2 {
        return Err(TangleError::PbarNotTwo {
            p,
            q,
            pbar_abs: pbar.abs(),
        });
    }
    // q is odd here, so the reduced representative has 2|m| < q.
    let (n, m) = reduce_slope(p, q);
    for outer in [1i8, -1] {
        for inner in [1i8, -1] {
            if (outer as i64) * (2 * m + inner as i64) == q {
                let form = PartialFractionForm {
                    n,
                    m,
                    signs: (outer, inner),
                    reconstructed: Rational::new(p, q),
                };
                debug_assert_eq!(form.evaluate(), form.reconstructed);
                return Ok(form);
            }
        }
    }
    unreachable!("q divides m*pbar + 1 and |m*pbar + 1| <= q, so q = ±(2m ± 1)")
}

/// One canonical knot or link per orbit key with all `q_i <= q_bound` and
/// `e0 ∈ {0, 1}`, in key order.
pub fn enumerate_canonical(q_bound: i64) -> Vec<MontesinosKnot> {
    let mut slopes = Vec::new();
    for q in 2..=q_bound {
        for p in -(q / 2)..=(q / 2) {
            if p.gcd(&q) == 1 && reduce_slope(p, q).1 == p {
                slopes.push((q, p));
            }
        }
    }
    slopes.sort();
    let mut keys = std::collections::BTreeSet::new();
    for (i, a) in slopes.iter().enumerate() {
        for (j, b) in slopes.iter().enumerate().skip(i) {
            for c in slopes.iter().skip(j) {
                for e0 in 0..2 {
                    let knot = MontesinosKnot::from_pairs_ordered(
                        [(a.1, a.0), (b.1, b.0), (c.1, c.0)],
                        e0,
                    )
                    .expect("enumerated slopes are valid");
                    keys.insert(knot.orbit_key());
                }
            }
        }
    }
    keys.into_iter().map(|k| k.knot()).collect()
}
