//! Degree-homogeneous derivations of W on a window, solved as exact linear
//! systems, and matching against inner derivations `ad_a`.

use std::collections::BTreeMap;

use num::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{bracket_basis, bracket_bv, koszul_sign, BasisVector, Element, Family, Parity};
use crate::coeff::{int, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::io::IndexTable;
use crate::linalg::{primitive, Echelon};
use crate::window::Window;

/// A derivation of degree `d`. For even parity: `lambda` is the
/// coefficient of `L_{m+d}` in `D(L_m)`, `gamma` of `G_{n+d}` in `D(G_n)`,
/// `beta` of `L_{n+d}` in `D(G_n)`. For odd parity the target families
/// swap: `lambda` lands on `G`, `gamma` on `L`, and `beta` on `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeDerivation {
    pub degree: i64,
    pub parity: Parity,
    pub window: Window,
    pub lambda: IndexTable,
    pub gamma: IndexTable,
    pub beta: IndexTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Lambda,
    Gamma,
    Beta,
}

impl Slot {
    fn source(self, s: i64) -> BasisVector {
        match self {
            Slot::Lambda => BasisVector::l(s),
            Slot::Gamma | Slot::Beta => BasisVector::g(s),
        }
    }

    fn target(self, parity: Parity, degree: i64) -> BasisVector {
        let family = match (self, parity) {
            (Slot::Lambda, Parity::Even) | (Slot::Gamma, Parity::Odd) | (Slot::Beta, Parity::Even) => {
                Family::L
            }
            _ => Family::G,
        };
        BasisVector { family, degree }
    }
}

const SLOTS: [Slot; 3] = [Slot::Lambda, Slot::Gamma, Slot::Beta];

impl DegreeDerivation {
    pub fn zero(degree: i64, parity: Parity, window: Window) -> Self {
        DegreeDerivation {
            degree,
            parity,
            window,
            lambda: IndexTable::default(),
            gamma: IndexTable::default(),
            beta: IndexTable::default(),
        }
    }

    /// Source degrees where the tables are defined: `s` and `s + d` both in
    /// the window.
    pub fn domain(&self) -> impl Iterator<Item = i64> + '_ {
        self.window.iter().filter(|s| self.window.contains(s + self.degree))
    }

    fn table(&self, slot: Slot) -> &IndexTable {
        match slot {
            Slot::Lambda => &self.lambda,
            Slot::Gamma => &self.gamma,
            Slot::Beta => &self.beta,
        }
    }

    fn table_mut(&mut self, slot: Slot) -> &mut IndexTable {
        match slot {
            Slot::Lambda => &mut self.lambda,
            Slot::Gamma => &mut self.gamma,
            Slot::Beta => &mut self.beta,
        }
    }

    fn set(&mut self, slot: Slot, s: i64, v: CoeffPoly) {
        if v.is_zero() {
            self.table_mut(slot).0.remove(&s);
        } else {
            self.table_mut(slot).0.insert(s, v);
        }
    }

    /// `ad_{alpha X_d}` on the domain, with `X = L` for even and `G` for odd
    /// parity.
    pub fn adjoint(degree: i64, parity: Parity, alpha: &CoeffPoly, window: Window) -> Self {
        let a = generator(degree, parity);
        let mut d = DegreeDerivation::zero(degree, parity, window);
        let domain: Vec<i64> = d.domain().collect();
        for s in domain {
            for slot in SLOTS {
                let src = slot.source(s);
                if let Some((coef, target)) = bracket_basis(a, src) {
                    if target == slot.target(parity, s + degree) {
                        d.set(slot, s, alpha.scale_int(coef));
                    }
                }
            }
        }
        d
    }

    pub fn apply_basis(&self, b: BasisVector) -> Result<Element> {
        let w = self.window;
        for i in [b.degree, b.degree + self.degree] {
            if !w.contains(i) {
                return Err(Error::OutsideWindow {
                    index: i,
                    lo: w.lo,
                    hi: w.hi,
                });
            }
        }
        let mut out = Element::zero();
        for slot in SLOTS {
            if slot.source(b.degree) != b {
                continue;
            }
            if let Some(v) = self.table(slot).0.get(&b.degree) {
                out.add_term(slot.target(self.parity, b.degree + self.degree), v);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (b, a) in x.terms() {
            out.add_scaled(&self.apply_basis(*b)?, a);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.0.is_empty() && self.gamma.0.is_empty() && self.beta.0.is_empty()
    }
}

fn generator(degree: i64, parity: Parity) -> BasisVector {
    BasisVector {
        family: Family::of_parity(parity),
        degree,
    }
}

/// Both arguments, their bracket, and all three images have degrees in the
/// window.
pub fn is_interior(window: Window, d: i64, x: BasisVector, y: BasisVector) -> bool {
    let (p, q) = (x.degree, y.degree);
    window.contains_all(&[p, q, p + q, p + d, q + d, p + q + d])
}

/// `D([x,y]) - [D(x), y] - (-1)^{|D||x|} [x, D(y)]`.
pub fn derivation_residual(dv: &DegreeDerivation, x: BasisVector, y: BasisVector) -> Result<Element> {
    let tuple = format!("({x}, {y})");
    let w = dv.window;
    let (p, q, d) = (x.degree, y.degree, dv.degree);
    if let Some(i) = w.first_outside(&[p, q, p + q, p + d, q + d, p + q + d]) {
        return Err(Error::Inadmissible { tuple, index: i });
    }
    let (ex, ey) = (Element::basis(x), Element::basis(y));
    let dxy = dv.apply(&bracket_bv(x, y)).map_err(|e| e.inadmissible(&tuple))?;
    let dx = dv.apply(&ex).map_err(|e| e.inadmissible(&tuple))?;
    let dy = dv.apply(&ey).map_err(|e| e.inadmissible(&tuple))?;
    let sign = koszul_sign(dv.parity, x.parity());
    let left = crate::algebra::bracket(&dx, &ey);
    let right = crate::algebra::bracket(&ex, &dy).scale_int(sign);
    Ok(&(&dxy - &left) - &right)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum InnerMatch {
    /// `D = ad_a` on the domain.
    Matched { alpha: CoeffPoly, element: Element },
    /// First domain vector where `D` disagrees with every `ad_{alpha X_d}`.
    NoMatch {
        at: BasisVector,
        expected: Element,
        actual: Element,
    },
}

impl InnerMatch {
    pub fn is_match(&self) -> bool {
        matches!(self, InnerMatch::Matched { .. })
    }
}

/// Find `alpha` with `D = ad_{alpha L_d}` (or `ad_{alpha G_d}` for odd `D`).
pub fn inner_match(dv: &DegreeDerivation) -> InnerMatch {
    let a = generator(dv.degree, dv.parity);
    let domain: Vec<i64> = dv.domain().collect();
    let sources = domain
        .iter()
        .map(|&s| BasisVector::l(s))
        .chain(domain.iter().map(|&s| BasisVector::g(s)));
    let mut alpha: Option<Rational> = None;
    for b in sources {
        let actual = dv.apply_basis(b).expect("domain vector");
        let ad = bracket_bv(a, b);
        if alpha.is_none() {
            if let Some((coef, target)) = bracket_basis(a, b) {
                alpha = Some(actual.coeff(&target).coeff(0) / int(coef));
            }
        }
        let scale = alpha.clone().unwrap_or_else(Rational::zero);
        let expected = ad.scale(&CoeffPoly::constant(scale));
        if expected != actual {
            return InnerMatch::NoMatch {
                at: b,
                expected,
                actual,
            };
        }
    }
    let alpha = CoeffPoly::constant(alpha.unwrap_or_else(Rational::zero));
    InnerMatch::Matched {
        element: Element::term(a, alpha.clone()),
        alpha,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationSpace {
    pub degree: i64,
    pub parity: Parity,
    pub window: Window,
    pub unknowns: usize,
    pub equations: usize,
    pub dimension: usize,
    pub basis: Vec<DegreeDerivation>,
    pub inner_match: Vec<InnerMatch>,
    pub beta_vanishes: bool,
}

impl DerivationSpace {
    /// One-dimensional and spanned by an inner derivation.
    pub fn all_inner(&self) -> bool {
        self.dimension == 1 && self.inner_match.iter().all(InnerMatch::is_match)
    }
}

/// Solve `derivation_residual = 0` over every interior pair for the
/// degree-`d` unknowns of the given parity.
pub fn solve_derivations(d: i64, window: Window, parity: Parity) -> DerivationSpace {
    let template = DegreeDerivation::zero(d, parity, window);
    let domain: Vec<i64> = template.domain().collect();
    let unknowns: Vec<(Slot, i64)> = SLOTS
        .iter()
        .flat_map(|&slot| domain.iter().map(move |&s| (slot, s)))
        .collect();
    let index: BTreeMap<(BasisVector, BasisVector), usize> = unknowns
        .iter()
        .enumerate()
        .map(|(i, &(slot, s))| ((slot.source(s), slot.target(parity, s + d)), i))
        .collect();
    // unknowns whose source is b, with their targets
    let images = |b: BasisVector| -> Vec<(usize, BasisVector)> {
        index
            .iter()
            .filter(|((src, _), _)| *src == b)
            .map(|((_, tgt), i)| (*i, *tgt))
            .collect()
    };

    let n = unknowns.len();
    let basis_vectors = BasisVector::all_in(window.lo, window.hi);
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for &x in &basis_vectors {
        for &y in &basis_vectors {
            if !is_interior(window, d, x, y) {
                continue;
            }
            let mut acc: BTreeMap<BasisVector, Vec<Rational>> = BTreeMap::new();
            let mut add = |target: BasisVector, var: usize, coef: i64| {
                acc.entry(target).or_insert_with(|| vec![Rational::zero(); n])[var] += int(coef);
            };
            if let Some((coef, z)) = bracket_basis(x, y) {
                for (var, img) in images(z) {
                    add(img, var, coef);
                }
            }
            for (var, img) in images(x) {
                if let Some((coef, t)) = bracket_basis(img, y) {
                    add(t, var, -coef);
                }
            }
            let sign = koszul_sign(parity, x.parity());
            for (var, img) in images(y) {
                if let Some((coef, t)) = bracket_basis(x, img) {
                    add(t, var, -sign * coef);
                }
            }
            rows.extend(acc.into_values().filter(|r| r.iter().any(|v| !v.is_zero())));
        }
    }

    let echelon = Echelon::new(&rows, n);
    let basis: Vec<DegreeDerivation> = echelon
        .nullspace()
        .iter()
        .map(|v| {
            let mut dv = template.clone();
            for (i, x) in primitive(v).into_iter().enumerate() {
                let (slot, s) = unknowns[i];
                dv.set(slot, s, CoeffPoly::constant(x));
            }
            dv
        })
        .collect();
    let inner_match = basis.iter().map(inner_match).collect();
    DerivationSpace {
        degree: d,
        parity,
        window,
        unknowns: n,
        equations: rows.len(),
        dimension: basis.len(),
        beta_vanishes: basis.iter().all(|b| b.beta.0.is_empty()),
        basis,
        inner_match,
    }
}

/// Degrees solved independently, in parallel, collected in degree order.
pub fn solve_derivation_range(lo: i64, hi: i64, window: Window, parity: Parity) -> Vec<DerivationSpace> {
    (lo..=hi)
        .into_par_iter()
        .map(|d| solve_derivations(d, window, parity))
        .collect()
}
