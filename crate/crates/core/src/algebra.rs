//! The modified Witt-type Lie superalgebra `W = <L_m, G_n>`:
//!
//! ```text
//! [L_m, L_n] = (m - n) L_{m+n}
//! [L_m, G_n] = (m - n - 1) G_{m+n}
//! [G_m, G_n] = 0
//! ```
//!
//! `[G_n, L_m]` follows from super skew-symmetry. Elements live over all of
//! the integers; windows are an operator-table concept only.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coeff::CoeffPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "even")]
    Even,
    #[serde(rename = "odd")]
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(b: u8) -> Parity {
        if b.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Sum in Z/2.
    pub fn plus(self, other: Parity) -> Parity {
        Parity::from_bit(self.bit() + other.bit())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    L,
    G,
}

impl Family {
    pub fn parity(self) -> Parity {
        match self {
            Family::L => Parity::Even,
            Family::G => Parity::Odd,
        }
    }

    pub fn of_parity(p: Parity) -> Family {
        match p {
            Parity::Even => Family::L,
            Parity::Odd => Family::G,
        }
    }
}

/// `L_m` or `G_n`. Ordered by family (L first), then degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisVector {
    pub family: Family,
    pub degree: i64,
}

impl BasisVector {
    pub const fn l(degree: i64) -> Self {
        BasisVector {
            family: Family::L,
            degree,
        }
    }

    pub const fn g(degree: i64) -> Self {
        BasisVector {
            family: Family::G,
            degree,
        }
    }

    pub fn parity(self) -> Parity {
        self.family.parity()
    }

    /// All basis vectors with degree in `[lo, hi]`, L's first.
    pub fn all_in(lo: i64, hi: i64) -> Vec<BasisVector> {
        (lo..=hi)
            .map(BasisVector::l)
            .chain((lo..=hi).map(BasisVector::g))
            .collect()
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::L => "L",
            Family::G => "G",
        };
        write!(f, "{fam}_{}", self.degree)
    }
}

/// Finitely supported formal sum of basis vectors with `CoeffPoly`
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Element {
    terms: BTreeMap<BasisVector, CoeffPoly>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn basis(b: BasisVector) -> Self {
        Self::term(b, CoeffPoly::one())
    }

    pub fn term(b: BasisVector, coeff: CoeffPoly) -> Self {
        let mut e = Element::zero();
        e.add_term(b, &coeff);
        e
    }

    pub fn l(degree: i64) -> Self {
        Self::basis(BasisVector::l(degree))
    }

    pub fn g(degree: i64) -> Self {
        Self::basis(BasisVector::g(degree))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisVector, &CoeffPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: &BasisVector) -> CoeffPoly {
        self.terms.get(b).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = BasisVector> + '_ {
        self.terms.keys().copied()
    }

    pub fn add_term(&mut self, b: BasisVector, coeff: &CoeffPoly) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(b).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&b);
        }
    }

    pub fn add_scaled(&mut self, other: &Element, scale: &CoeffPoly) {
        for (b, a) in &other.terms {
            self.add_term(*b, &(a * scale));
        }
    }

    pub fn scale(&self, s: &CoeffPoly) -> Element {
        let mut out = Element::zero();
        out.add_scaled(self, s);
        out
    }

    pub fn scale_int(&self, n: i64) -> Element {
        self.scale(&CoeffPoly::from_int(n))
    }

    /// Parity of every term, if they all agree (`None` for zero or mixed).
    pub fn homogeneous_parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|b| b.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// The component lying in the given parity.
    pub fn parity_component(&self, p: Parity) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.parity() == p)
                .map(|(b, a)| (*b, a.clone()))
                .collect(),
        }
    }

    /// Highest power of `c` among the coefficients.
    pub fn max_c_degree(&self) -> Option<usize> {
        self.terms.values().filter_map(CoeffPoly::degree).max()
    }

    /// Single-term view: `(basis, coefficient)` when exactly one term is
    /// stored.
    pub fn as_single(&self) -> Option<(BasisVector, &CoeffPoly)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(b, a)| (*b, a))
        } else {
            None
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, a)| format!("({a})*{b}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    family: Family,
    degree: i64,
    coeff: CoeffPoly,
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(b, a)| TermJson {
                family: b.family,
                degree: b.degree,
                coeff: a.clone(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        let mut e = Element::zero();
        for t in terms {
            let b = BasisVector {
                family: t.family,
                degree: t.degree,
            };
            if e.terms.contains_key(&b) {
                return Err(D::Error::custom(format!("duplicate term {b}")));
            }
            e.add_term(b, &t.coeff);
        }
        Ok(e)
    }
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &CoeffPoly::one());
        out
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &CoeffPoly::from_int(-1));
        out
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_int(-1)
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        &self + &rhs
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        &self - &rhs
    }
}

impl FromIterator<(BasisVector, CoeffPoly)> for Element {
    fn from_iter<I: IntoIterator<Item = (BasisVector, CoeffPoly)>>(iter: I) -> Self {
        let mut e = Element::zero();
        for (b, a) in iter {
            e.add_term(b, &a);
        }
        e
    }
}

/// Structure constant and target of `[x, y]` for basis vectors, or `None`
/// when the bracket vanishes identically.
pub fn bracket_basis(x: BasisVector, y: BasisVector) -> Option<(i64, BasisVector)> {
    let (m, n) = (x.degree, y.degree);
    let (coef, target) = match (x.family, y.family) {
        (Family::L, Family::L) => (m - n, BasisVector::l(m + n)),
        (Family::L, Family::G) => (m - n - 1, BasisVector::g(m + n)),
        // [G_m, L_n] = -[L_n, G_m] = -(n - m - 1) G_{m+n}
        (Family::G, Family::L) => (m - n + 1, BasisVector::g(m + n)),
        (Family::G, Family::G) => return None,
    };
    (coef != 0).then_some((coef, target))
}

/// Bilinear extension of the structure rules.
pub fn bracket(x: &Element, y: &Element) -> Element {
    let mut out = Element::zero();
    for (bx, ax) in x.terms() {
        for (by, ay) in y.terms() {
            if let Some((coef, target)) = bracket_basis(*bx, *by) {
                out.add_term(target, &(ax * ay).scale_int(coef));
            }
        }
    }
    out
}

pub fn bracket_bv(x: BasisVector, y: BasisVector) -> Element {
    match bracket_basis(x, y) {
        Some((coef, target)) => Element::term(target, CoeffPoly::from_int(coef)),
        None => Element::zero(),
    }
}

/// `(-1)^{|x||y|}` as an integer.
pub fn koszul_sign(p: Parity, q: Parity) -> i64 {
    if p == Parity::Odd && q == Parity::Odd {
        -1
    } else {
        1
    }
}

/// `[x,[y,z]] - (-1)^{|x||y|} [y,[x,z]] - [[x,y],z]`; zero iff the graded
/// Jacobi identity holds on the triple.
pub fn jacobi_residual(x: BasisVector, y: BasisVector, z: BasisVector) -> Element {
    let (ex, ey, ez) = (Element::basis(x), Element::basis(y), Element::basis(z));
    let lhs = bracket(&ex, &bracket(&ey, &ez));
    let swapped = bracket(&ey, &bracket(&ex, &ez)).scale_int(koszul_sign(x.parity(), y.parity()));
    let assoc = bracket(&bracket(&ex, &ey), &ez);
    &(&lhs - &swapped) - &assoc
}

/// `ad_a(x) = [a, x]`.
pub fn adjoint(a: &Element, x: &Element) -> Element {
    bracket(a, x)
}
