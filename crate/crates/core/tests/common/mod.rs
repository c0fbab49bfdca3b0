//! Oracles shared by the integration tests. They use their own structure
//! constants and rational arithmetic, not the library's bracket or
//! residual code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use witt_rb::coeff::{rat, Rational};
use witt_rb::{BasisVector, Family};

/// Sparse vector in the algebra; each coefficient is the rational multiple
/// of `c^2` (or of `c` for operator images).
pub type Vector = BTreeMap<(Family, i64), Rational>;

fn add(v: &mut Vector, key: (Family, i64), by: Rational) {
    let slot = v.entry(key).or_insert_with(|| rat(0, 1));
    *slot += by;
    if *slot == rat(0, 1) {
        v.remove(&key);
    }
}

/// Structure constants written out by hand.
pub fn bracket_oracle(a: (Family, i64), b: (Family, i64)) -> Option<(Rational, (Family, i64))> {
    let (m, n) = (a.1, b.1);
    let (coef, fam) = match (a.0, b.0) {
        (Family::L, Family::L) => (m - n, Family::L),
        (Family::L, Family::G) => (m - n - 1, Family::G),
        (Family::G, Family::L) => (m - n + 1, Family::G),
        (Family::G, Family::G) => return None,
    };
    (coef != 0).then(|| (rat(coef, 1), (fam, m + n)))
}

fn bracket_vec(x: &Vector, y: &Vector) -> Vector {
    let mut out = Vector::new();
    for (a, ca) in x {
        for (b, cb) in y {
            if let Some((s, t)) = bracket_oracle(*a, *b) {
                add(&mut out, t, s * ca * cb);
            }
        }
    }
    out
}

/// `R(L_m) = f(m+k) G_{m+k}`, `R(G_n) = g(n+k) L_{n+k}`, as multiples of `c`.
pub struct OracleOperator<'a> {
    pub k: i64,
    pub f: &'a dyn Fn(i64) -> Rational,
    pub g: &'a dyn Fn(i64) -> Rational,
}

impl OracleOperator<'_> {
    fn apply(&self, v: &Vector) -> Vector {
        let mut out = Vector::new();
        for ((fam, d), c) in v {
            let i = d + self.k;
            match fam {
                Family::L => add(&mut out, (Family::G, i), (self.f)(i) * c),
                Family::G => add(&mut out, (Family::L, i), (self.g)(i) * c),
            }
        }
        out
    }

    /// `([Rx, Ry], R([Rx, y] + [x, Ry]))`, coefficients of `c^2`.
    pub fn sides(&self, x: (Family, i64), y: (Family, i64)) -> (Vector, Vector) {
        let ex: Vector = [(x, rat(1, 1))].into();
        let ey: Vector = [(y, rat(1, 1))].into();
        let rx = self.apply(&ex);
        let ry = self.apply(&ey);
        let lhs = bracket_vec(&rx, &ry);
        let mut inner = bracket_vec(&rx, &ey);
        for (key, c) in bracket_vec(&ex, &ry) {
            add(&mut inner, key, c);
        }
        // R is linear in c, so R(inner) picks up the second factor of c
        let rhs = self.apply(&inner);
        (lhs, rhs)
    }

    pub fn residual(&self, x: (Family, i64), y: (Family, i64)) -> Vector {
        let (lhs, rhs) = self.sides(x, y);
        let mut out = lhs;
        for (key, c) in rhs {
            add(&mut out, key, -c);
        }
        out
    }
}

/// Library element to oracle vector, reading off the `c^2` coefficients.
pub fn c2_vector(e: &witt_rb::Element) -> Vector {
    let mut out = Vector::new();
    for (b, p) in e.terms() {
        assert!(
            p.coeffs().iter().enumerate().all(|(d, q)| d == 2 || *q == rat(0, 1)),
            "expected a pure c^2 coefficient, got {p}"
        );
        add(&mut out, (b.family, b.degree), p.coeff(2));
    }
    out
}

pub fn key(b: BasisVector) -> (Family, i64) {
    (b.family, b.degree)
}

/// Scalar GG residual from its defining expression.
pub fn gg_oracle(k: i64, g: &dyn Fn(i64) -> Rational, m: i64, n: i64) -> Rational {
    let (mq, nq) = (rat(m, 1), rat(n, 1));
    (&mq - &nq) * g(m) * g(n)
        - g(m + n) * (rat(m - n + k - 1, 1) * g(m) + rat(m - n - k + 1, 1) * g(n))
}

/// A `g` table normalized so that `g(0) = 1` when `g(0) != 0`, else its
/// first nonzero value is 1.
pub type NormalizedG = BTreeMap<i64, Rational>;

fn normalize(values: &BTreeMap<i64, Rational>) -> NormalizedG {
    let pivot = values.get(&0).or_else(|| values.values().next()).cloned();
    match pivot {
        None => BTreeMap::new(),
        Some(p) => values.iter().map(|(m, v)| (*m, v / &p)).collect(),
    }
}

/// Every support subset of `[lo, hi]`, with values forced by the `N = 0`
/// case of the GG equation, kept when the full identity holds with `f = 0`
/// on every admissible generator pair, checked by the oracle brackets.
pub fn brute_force_g(k: i64, lo: i64, hi: i64) -> BTreeSet<NormalizedG> {
    let degrees: Vec<i64> = (lo..=hi).collect();
    let mut found = BTreeSet::new();
    for mask in 0u32..(1 << degrees.len()) {
        let support: Vec<i64> = degrees
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, d)| *d)
            .collect();
        let Some(values) = forced_values(k, &support) else { continue };
        let table = values.clone();
        let g = move |m: i64| table.get(&m).cloned().unwrap_or_else(|| rat(0, 1));
        let zero = |_: i64| rat(0, 1);
        let op = OracleOperator { k, f: &zero, g: &g };
        let admissible = |i: i64| lo <= i && i <= hi;
        let ok = (lo - k..=hi - k).all(|a| {
            (lo - k..=hi - k).all(|b| {
                let (mm, nn) = (a + k, b + k);
                !admissible(mm + nn)
                    || op.residual((Family::G, a), (Family::G, b)).is_empty()
            })
        });
        if ok {
            found.insert(normalize(&values));
        }
    }
    found
}

/// `g(M) (M+k-1) g(M) = (k-1) g(0) g(M)` pins each supported value; the
/// scale is fixed by `g(0) = 1`, or by the lone value when `g(0) = 0`.
fn forced_values(k: i64, support: &[i64]) -> Option<BTreeMap<i64, Rational>> {
    let mut values = BTreeMap::new();
    if support.contains(&0) {
        for &m in support {
            if m == 0 {
                values.insert(0, rat(1, 1));
                continue;
            }
            if m + k - 1 == 0 || k == 1 {
                return None;
            }
            values.insert(m, rat(k - 1, m + k - 1));
        }
    } else {
        for &m in support {
            if m + k - 1 != 0 {
                return None;
            }
            values.insert(m, rat(1, 1));
        }
    }
    Some(values)
}
