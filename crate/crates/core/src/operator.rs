//! Homogeneous odd operators of degree `k` and their Rota-Baxter residuals.
//!
//! Tables use the shifted-argument convention: `R(L_m) = f(m+k) G_{m+k}`
//! and `R(G_n) = g(n+k) L_{n+k}`, with `f` and `g` stored as functions of
//! the image index. Outside the window an entry is unknown, not zero.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, BasisVector, Element, Family, Parity};
use crate::coeff::CoeffPoly;
use crate::error::{Error, Result};
use crate::io::OperatorFile;
use crate::window::Window;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddOperator {
    k: i64,
    window: Window,
    f: BTreeMap<i64, CoeffPoly>,
    g: BTreeMap<i64, CoeffPoly>,
}

impl OddOperator {
    /// Build from sparse tables. Entries not listed inside the window are
    /// zero; entries outside the window are rejected.
    pub fn from_tables(
        k: i64,
        window: Window,
        f: BTreeMap<i64, CoeffPoly>,
        g: BTreeMap<i64, CoeffPoly>,
    ) -> Result<Self> {
        for (name, table) in [("f", &f), ("g", &g)] {
            if let Some(i) = table.keys().find(|i| !window.contains(**i)) {
                return Err(Error::Load(format!(
                    "{name}({i}) lies outside the window {window}"
                )));
            }
        }
        let strip = |t: BTreeMap<i64, CoeffPoly>| -> BTreeMap<i64, CoeffPoly> {
            t.into_iter().filter(|(_, v)| !v.is_zero()).collect()
        };
        Ok(OddOperator {
            k,
            window,
            f: strip(f),
            g: strip(g),
        })
    }

    /// Tabulate `f` and `g` over the whole window.
    pub fn from_fns(
        k: i64,
        window: Window,
        f: impl Fn(i64) -> CoeffPoly,
        g: impl Fn(i64) -> CoeffPoly,
    ) -> Self {
        let f = window.iter().map(|i| (i, f(i))).collect();
        let g = window.iter().map(|i| (i, g(i))).collect();
        Self::from_tables(k, window, f, g).expect("tabulated inside window")
    }

    pub fn zero(k: i64, window: Window) -> Self {
        OddOperator {
            k,
            window,
            f: BTreeMap::new(),
            g: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Nonzero entries of `f`.
    pub fn f_table(&self) -> &BTreeMap<i64, CoeffPoly> {
        &self.f
    }

    /// Nonzero entries of `g`.
    pub fn g_table(&self) -> &BTreeMap<i64, CoeffPoly> {
        &self.g
    }

    pub fn f_is_zero(&self) -> bool {
        self.f.is_empty()
    }

    pub fn g_is_zero(&self) -> bool {
        self.g.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_empty() && self.g.is_empty()
    }

    fn lookup(&self, table: &BTreeMap<i64, CoeffPoly>, i: i64) -> Result<CoeffPoly> {
        if !self.window.contains(i) {
            return Err(Error::OutsideWindow {
                index: i,
                lo: self.window.lo,
                hi: self.window.hi,
            });
        }
        Ok(table.get(&i).cloned().unwrap_or_default())
    }

    /// `f(i)` at a shifted index.
    pub fn f(&self, i: i64) -> Result<CoeffPoly> {
        self.lookup(&self.f, i)
    }

    /// `g(i)` at a shifted index.
    pub fn g(&self, i: i64) -> Result<CoeffPoly> {
        self.lookup(&self.g, i)
    }

    pub fn apply_basis(&self, b: BasisVector) -> Result<Element> {
        let target = b.degree + self.k;
        Ok(match b.family {
            Family::L => Element::term(BasisVector::g(target), self.f(target)?),
            Family::G => Element::term(BasisVector::l(target), self.g(target)?),
        })
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (b, a) in x.terms() {
            out.add_scaled(&self.apply_basis(*b)?, a);
        }
        Ok(out)
    }

    /// Same tables with every value transformed.
    pub fn map_values(&self, mut f_map: impl FnMut(&CoeffPoly) -> CoeffPoly, mut g_map: impl FnMut(&CoeffPoly) -> CoeffPoly) -> Self {
        OddOperator {
            k: self.k,
            window: self.window,
            f: self.f.iter().map(|(i, v)| (*i, f_map(v))).filter(|(_, v)| !v.is_zero()).collect(),
            g: self.g.iter().map(|(i, v)| (*i, g_map(v))).filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    /// Restrict the tables to a sub-window.
    pub fn restrict(&self, window: Window) -> Result<Self> {
        if window.lo < self.window.lo || window.hi > self.window.hi {
            return Err(Error::InvalidParameters(format!(
                "{window} is not inside {}",
                self.window
            )));
        }
        let keep = |t: &BTreeMap<i64, CoeffPoly>| {
            t.iter()
                .filter(|(i, _)| window.contains(**i))
                .map(|(i, v)| (*i, v.clone()))
                .collect()
        };
        Ok(OddOperator {
            k: self.k,
            window,
            f: keep(&self.f),
            g: keep(&self.g),
        })
    }

    /// Generator degrees whose image index lies in the window.
    pub fn source_degrees(&self) -> Window {
        self.window.shift(-self.k)
    }

    fn check_shifted(&self, tuple: &Tuple, idx: &[i64]) -> Result<()> {
        match self.window.first_outside(idx) {
            Some(index) => Err(Error::Inadmissible {
                tuple: tuple.to_string(),
                index,
            }),
            None => Ok(()),
        }
    }

    /// Both sides of the Rota-Baxter identity at a generator pair:
    /// `([Rx, Ry], R([Rx, y] + [x, Ry]))`.
    pub fn rb_sides(&self, x: BasisVector, y: BasisVector) -> Result<(Element, Element)> {
        let tuple = Tuple::Pair { x, y };
        let (mm, nn) = (x.degree + self.k, y.degree + self.k);
        self.check_shifted(&tuple, &[mm, nn, mm + nn])?;
        let rx = self.apply_basis(x)?;
        let ry = self.apply_basis(y)?;
        let lhs = bracket(&rx, &ry);
        let inner = &bracket(&rx, &Element::basis(y)) + &bracket(&Element::basis(x), &ry);
        let rhs = self.apply(&inner).map_err(|e| e.inadmissible(tuple))?;
        Ok((lhs, rhs))
    }

    /// `[Rx, Ry] - R([Rx, y] + [x, Ry])`.
    pub fn rb_residual(&self, x: BasisVector, y: BasisVector) -> Result<Element> {
        let (lhs, rhs) = self.rb_sides(x, y)?;
        Ok(&lhs - &rhs)
    }

    /// `g(M+N) ((M-N+k+1) f(M) + (M-N-k-1) f(N))`.
    pub fn residual_ll(&self, m: i64, n: i64) -> Result<CoeffPoly> {
        self.check_shifted(&Tuple::LL { m, n }, &[m, n, m + n])?;
        let k = self.k;
        let inner = &self.f(m)?.scale_int(m - n + k + 1) + &self.f(n)?.scale_int(m - n - k - 1);
        Ok(&self.g(m + n)? * &inner)
    }

    /// `(M-N) g(M) g(N) - g(M+N) ((M-N+k-1) g(M) + (M-N-k+1) g(N))`.
    pub fn residual_gg(&self, m: i64, n: i64) -> Result<CoeffPoly> {
        self.check_shifted(&Tuple::GG { m, n }, &[m, n, m + n])?;
        let k = self.k;
        let (gm, gn) = (self.g(m)?, self.g(n)?);
        let lhs = (&gm * &gn).scale_int(m - n);
        let inner = &gm.scale_int(m - n + k - 1) + &gn.scale_int(m - n - k + 1);
        Ok(&lhs - &(&self.g(m + n)? * &inner))
    }

    /// `(M-N+1) f(M) g(N) - (M-N-k) f(M+N) g(N)`.
    pub fn residual_lg(&self, m: i64, n: i64) -> Result<CoeffPoly> {
        self.check_shifted(&Tuple::LG { m, n }, &[m, n, m + n])?;
        let k = self.k;
        let gn = self.g(n)?;
        let lhs = (&self.f(m)? * &gn).scale_int(m - n + 1);
        let rhs = (&self.f(m + n)? * &gn).scale_int(m - n - k);
        Ok(&lhs - &rhs)
    }

    /// `(M+k-1) g(M) - (k-1) g(0)`.
    pub fn fundamental_residual(&self, m: i64) -> Result<CoeffPoly> {
        self.check_shifted(&Tuple::Fundamental { m }, &[m, 0])?;
        let k = self.k;
        Ok(&self.g(m)?.scale_int(m + k - 1) - &self.g(0)?.scale_int(k - 1))
    }

    /// Residual of any tuple kind.
    pub fn residual(&self, tuple: &Tuple) -> Result<ResidualValue> {
        Ok(match *tuple {
            Tuple::Pair { x, y } => ResidualValue::Element(self.rb_residual(x, y)?),
            Tuple::LL { m, n } => ResidualValue::Scalar(self.residual_ll(m, n)?),
            Tuple::GG { m, n } => ResidualValue::Scalar(self.residual_gg(m, n)?),
            Tuple::LG { m, n } => ResidualValue::Scalar(self.residual_lg(m, n)?),
            Tuple::Fundamental { m } => ResidualValue::Scalar(self.fundamental_residual(m)?),
        })
    }

    pub fn to_file(&self) -> OperatorFile {
        OperatorFile::from_operator(self)
    }
}

/// A checked tuple: a generator pair for the full identity, or a pair of
/// shifted indices for one of the functional equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Tuple {
    #[serde(rename = "pair")]
    Pair { x: BasisVector, y: BasisVector },
    #[serde(rename = "LL")]
    LL { m: i64, n: i64 },
    #[serde(rename = "GG")]
    GG { m: i64, n: i64 },
    #[serde(rename = "LG")]
    LG { m: i64, n: i64 },
    #[serde(rename = "fundamental")]
    Fundamental { m: i64 },
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tuple::Pair { x, y } => write!(f, "({x}, {y})"),
            Tuple::LL { m, n } => write!(f, "LL({m}, {n})"),
            Tuple::GG { m, n } => write!(f, "GG({m}, {n})"),
            Tuple::LG { m, n } => write!(f, "LG({m}, {n})"),
            Tuple::Fundamental { m } => write!(f, "fundamental({m})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualValue {
    Element(Element),
    Scalar(CoeffPoly),
}

impl ResidualValue {
    pub fn is_zero(&self) -> bool {
        match self {
            ResidualValue::Element(e) => e.is_zero(),
            ResidualValue::Scalar(p) => p.is_zero(),
        }
    }

    pub fn max_c_degree(&self) -> Option<usize> {
        match self {
            ResidualValue::Element(e) => e.max_c_degree(),
            ResidualValue::Scalar(p) => p.degree(),
        }
    }
}

impl fmt::Display for ResidualValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualValue::Element(e) => e.fmt(f),
            ResidualValue::Scalar(p) => p.fmt(f),
        }
    }
}

/// Functional-equation partner of a generator pair: the residual of the
/// pair is `sign * functional` on the single basis vector `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossLink {
    pub functional: Tuple,
    pub sign: i64,
    pub target: BasisVector,
}

/// The functional equation obtained by substituting the generator pair
/// `(x, y)` into the identity, with `M = m + k`, `N = n + k`.
pub fn cross_link(k: i64, x: BasisVector, y: BasisVector) -> CrossLink {
    let (m, n) = (x.degree + k, y.degree + k);
    match (x.family, y.family) {
        (Family::L, Family::L) => CrossLink {
            functional: Tuple::LL { m, n },
            sign: -1,
            target: BasisVector::l(m + n),
        },
        (Family::G, Family::G) => CrossLink {
            functional: Tuple::GG { m, n },
            sign: 1,
            target: BasisVector::l(m + n),
        },
        (Family::L, Family::G) => CrossLink {
            functional: Tuple::LG { m, n },
            sign: 1,
            target: BasisVector::g(m + n),
        },
        (Family::G, Family::L) => CrossLink {
            functional: Tuple::LG { m: n, n: m },
            sign: -1,
            target: BasisVector::g(m + n),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckedTuple {
    pub tuple: Tuple,
    pub residual: ResidualValue,
    /// For generator pairs: the functional tuple this pair reduces to.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub link: Option<CrossLink>,
}

/// A failure that replays on its own: the operator, the tuple and the
/// residual it produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub operator: OperatorFile,
    pub tuple: Tuple,
    pub residual: ResidualValue,
}

impl Counterexample {
    /// Recompute the residual from the embedded operator.
    pub fn replay(&self) -> Result<ResidualValue> {
        let op = self.operator.to_operator()?;
        op.residual(&self.tuple)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { first: Box<Counterexample> },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Disagreement between a generator-pair residual and its functional
/// partner. Signals an internal error, not a residual failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossMismatch {
    pub pair: Tuple,
    pub functional: Tuple,
    pub pair_residual: Element,
    pub functional_residual: CoeffPoly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub k: i64,
    pub window: Window,
    pub description: String,
    pub operator: OperatorFile,
    #[serde(skip)]
    pub checked: Vec<CheckedTuple>,
    pub checked_count: usize,
    pub skipped_count: usize,
    pub skip_reason: String,
    pub failures: Vec<CheckedTuple>,
    pub cross_checked: usize,
    pub cross_mismatches: Vec<CrossMismatch>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn consistent(&self) -> bool {
        self.cross_mismatches.is_empty()
    }

    pub fn find(&self, tuple: &Tuple) -> Option<&CheckedTuple> {
        self.checked.iter().find(|c| &c.tuple == tuple)
    }

    pub fn first_failure(&self) -> Option<&CheckedTuple> {
        self.failures.first()
    }
}

const SKIP_REASON: &str = "inadmissible (index outside window)";

/// Every admissible generator pair against the full identity, then every
/// admissible `(M, N)` against (LL), (GG), (LG), with the cross-consistency
/// check between the two routes. Ordering is lexicographic within each
/// block.
pub fn sweep(op: &OddOperator, description: &str) -> ResidualReport {
    let src = op.source_degrees();
    let basis = BasisVector::all_in(src.lo, src.hi);
    let pairs: Vec<(BasisVector, BasisVector)> = basis
        .iter()
        .flat_map(|x| basis.iter().map(move |y| (*x, *y)))
        .collect();
    let pair_results: Vec<Option<CheckedTuple>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            op.rb_residual(x, y).ok().map(|r| CheckedTuple {
                tuple: Tuple::Pair { x, y },
                residual: ResidualValue::Element(r),
                link: Some(cross_link(op.k, x, y)),
            })
        })
        .collect();

    let w = op.window;
    let idx_pairs: Vec<(i64, i64)> = w.iter().flat_map(|m| w.iter().map(move |n| (m, n))).collect();
    let mut functional_tuples = Vec::with_capacity(idx_pairs.len() * 3);
    for make in [
        (|m, n| Tuple::LL { m, n }) as fn(i64, i64) -> Tuple,
        |m, n| Tuple::GG { m, n },
        |m, n| Tuple::LG { m, n },
    ] {
        functional_tuples.extend(idx_pairs.iter().map(|&(m, n)| make(m, n)));
    }
    let functional_results: Vec<Option<CheckedTuple>> = functional_tuples
        .par_iter()
        .map(|t| {
            op.residual(t).ok().map(|r| CheckedTuple {
                tuple: *t,
                residual: r,
                link: None,
            })
        })
        .collect();

    let total = pair_results.len() + functional_results.len();
    let checked: Vec<CheckedTuple> = pair_results
        .into_iter()
        .chain(functional_results)
        .flatten()
        .collect();
    let skipped_count = total - checked.len();

    let functional_index: BTreeMap<Tuple, &CoeffPoly> = checked
        .iter()
        .filter_map(|c| match &c.residual {
            ResidualValue::Scalar(p) => Some((c.tuple, p)),
            _ => None,
        })
        .collect();
    let mut cross_checked = 0;
    let mut cross_mismatches = Vec::new();
    for c in &checked {
        let (Some(link), ResidualValue::Element(e)) = (&c.link, &c.residual) else {
            continue;
        };
        let Some(func) = functional_index.get(&link.functional) else {
            continue;
        };
        cross_checked += 1;
        let expected = Element::term(link.target, func.scale_int(link.sign));
        if &expected != e {
            cross_mismatches.push(CrossMismatch {
                pair: c.tuple,
                functional: link.functional,
                pair_residual: e.clone(),
                functional_residual: (*func).clone(),
            });
        }
    }

    let failures: Vec<CheckedTuple> = checked.iter().filter(|c| !c.residual.is_zero()).cloned().collect();
    let file = op.to_file();
    let verdict = match failures.first() {
        None => Verdict::Pass,
        Some(f) => Verdict::Fail {
            first: Box::new(Counterexample {
                operator: file.clone(),
                tuple: f.tuple,
                residual: f.residual.clone(),
            }),
        },
    };
    ResidualReport {
        k: op.k,
        window: op.window,
        description: description.to_string(),
        operator: file,
        checked_count: checked.len(),
        checked,
        skipped_count,
        skip_reason: SKIP_REASON.to_string(),
        failures,
        cross_checked,
        cross_mismatches,
        verdict,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageParity {
    Zero,
    Even,
    Odd,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub k: i64,
    pub window: Window,
    /// Basis vectors spanning the image of the windowed operator.
    pub image: Vec<BasisVector>,
    pub image_parity: ImageParity,
    pub single_parity: bool,
    /// A basis vector with degree in the window that is not in the image,
    /// taken from the parity component the image misses when there is one.
    pub witness: Option<BasisVector>,
}

/// Image span of the windowed operator and a cokernel witness.
pub fn invertibility_report(op: &OddOperator) -> InvertibilityReport {
    // Each generator maps onto a multiple of a distinct basis vector, so
    // the image is spanned by the targets with nonzero coefficient.
    let image: Vec<BasisVector> = op
        .g
        .keys()
        .map(|&i| BasisVector::l(i))
        .chain(op.f.keys().map(|&i| BasisVector::g(i)))
        .collect();
    let has_even = !op.g.is_empty();
    let has_odd = !op.f.is_empty();
    let image_parity = match (has_even, has_odd) {
        (false, false) => ImageParity::Zero,
        (true, false) => ImageParity::Even,
        (false, true) => ImageParity::Odd,
        (true, true) => ImageParity::Mixed,
    };
    let preferred = match image_parity {
        ImageParity::Even => Parity::Odd,
        _ => Parity::Even,
    };
    let mut degrees: Vec<i64> = op.window.iter().collect();
    degrees.sort_by_key(|d| (d.abs(), *d));
    let candidates = [preferred, preferred.flip()];
    let witness = candidates.iter().find_map(|p| {
        degrees
            .iter()
            .map(|&d| BasisVector {
                family: Family::of_parity(*p),
                degree: d,
            })
            .find(|b| !image.contains(b))
    });
    InvertibilityReport {
        k: op.k,
        window: op.window,
        image,
        image_parity,
        single_parity: image_parity != ImageParity::Mixed,
        witness,
    }
}
