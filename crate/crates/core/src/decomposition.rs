//! Arbitrary window-bounded operators, their split into parity-preserving
//! and parity-reversing parts, and a search for Rota-Baxter operators whose
//! parts are not Rota-Baxter on their own.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, BasisVector, Element, Family};
use crate::coeff::{int, CoeffPoly};
use crate::error::{Error, Result};
use crate::operator::OddOperator;
use crate::window::Window;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ImageEntry {
    from: BasisVector,
    to: Element,
}

/// Linear map on the basis vectors with degree in the window. Unlisted
/// vectors map to zero; images are arbitrary elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GeneralOperatorFile", into = "GeneralOperatorFile")]
pub struct GeneralOperator {
    window: Window,
    images: BTreeMap<BasisVector, Element>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeneralOperatorFile {
    window: Window,
    images: Vec<ImageEntry>,
}

impl TryFrom<GeneralOperatorFile> for GeneralOperator {
    type Error = Error;
    fn try_from(file: GeneralOperatorFile) -> Result<Self> {
        let mut op = GeneralOperator::zero(file.window);
        for ImageEntry { from, to } in file.images {
            if op.images.contains_key(&from) {
                return Err(Error::Load(format!("duplicate image for {from}")));
            }
            op.set(from, to)?;
        }
        Ok(op)
    }
}

impl From<GeneralOperator> for GeneralOperatorFile {
    fn from(op: GeneralOperator) -> Self {
        GeneralOperatorFile {
            window: op.window,
            images: op
                .images
                .into_iter()
                .map(|(from, to)| ImageEntry { from, to })
                .collect(),
        }
    }
}

impl GeneralOperator {
    pub fn zero(window: Window) -> Self {
        GeneralOperator {
            window,
            images: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn images(&self) -> &BTreeMap<BasisVector, Element> {
        &self.images
    }

    pub fn set(&mut self, from: BasisVector, to: Element) -> Result<()> {
        if !self.window.contains(from.degree) {
            return Err(Error::Load(format!("{from} lies outside the window {}", self.window)));
        }
        if to.is_zero() {
            self.images.remove(&from);
        } else {
            self.images.insert(from, to);
        }
        Ok(())
    }

    /// An odd operator viewed on its source degrees `window - k`.
    pub fn from_odd(op: &OddOperator) -> Self {
        let window = op.source_degrees();
        let mut out = GeneralOperator::zero(window);
        for b in BasisVector::all_in(window.lo, window.hi) {
            let img = op.apply_basis(b).expect("source degree maps into the window");
            out.set(b, img).expect("inside window");
        }
        out
    }

    /// `L_m -> f0(m) L_m`, `G_n -> g0(n) G_n`.
    pub fn diagonal(window: Window, f0: impl Fn(i64) -> CoeffPoly, g0: impl Fn(i64) -> CoeffPoly) -> Self {
        let mut out = GeneralOperator::zero(window);
        for m in window.iter() {
            out.set(BasisVector::l(m), Element::term(BasisVector::l(m), f0(m)))
                .expect("inside window");
            out.set(BasisVector::g(m), Element::term(BasisVector::g(m), g0(m)))
                .expect("inside window");
        }
        out
    }

    pub fn apply_basis(&self, b: BasisVector) -> Result<Element> {
        if !self.window.contains(b.degree) {
            return Err(Error::OutsideWindow {
                index: b.degree,
                lo: self.window.lo,
                hi: self.window.hi,
            });
        }
        Ok(self.images.get(&b).cloned().unwrap_or_default())
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (b, a) in x.terms() {
            out.add_scaled(&self.apply_basis(*b)?, a);
        }
        Ok(out)
    }

    /// Pointwise sum; the windows must agree.
    pub fn sum(&self, other: &GeneralOperator) -> Result<GeneralOperator> {
        if self.window != other.window {
            return Err(Error::InvalidParameters(format!(
                "window mismatch: {} vs {}",
                self.window, other.window
            )));
        }
        let mut out = self.clone();
        for (b, img) in &other.images {
            let total = &out.apply_basis(*b)? + img;
            out.set(*b, total)?;
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.images.is_empty()
    }

    /// `[Tx, Ty] - T([Tx, y] + [x, Ty])`.
    pub fn rb_residual(&self, x: BasisVector, y: BasisVector) -> Result<Element> {
        let tuple = format!("({x}, {y})");
        let tx = self.apply_basis(x).map_err(|e| e.inadmissible(&tuple))?;
        let ty = self.apply_basis(y).map_err(|e| e.inadmissible(&tuple))?;
        let (ex, ey) = (Element::basis(x), Element::basis(y));
        let inner = &bracket(&tx, &ey) + &bracket(&ex, &ty);
        let rhs = self.apply(&inner).map_err(|e| e.inadmissible(&tuple))?;
        Ok(&bracket(&tx, &ty) - &rhs)
    }
}

/// Output-parity projection: `T_even(x)` is the parity-`|x|` component of
/// `T(x)`, `T_odd(x)` the opposite one.
pub fn split_parity(t: &GeneralOperator) -> (GeneralOperator, GeneralOperator) {
    let mut even = GeneralOperator::zero(t.window);
    let mut odd = GeneralOperator::zero(t.window);
    for (b, img) in &t.images {
        let p = b.parity();
        even.set(*b, img.parity_component(p)).expect("inside window");
        odd.set(*b, img.parity_component(p.flip())).expect("inside window");
    }
    (even, odd)
}

/// Parity-`(|x|+|y|)` and parity-`(|x|+|y|+1)` components of the residual.
pub fn projected_rb_residuals(t: &GeneralOperator, x: BasisVector, y: BasisVector) -> Result<(Element, Element)> {
    let r = t.rb_residual(x, y)?;
    let p = x.parity().plus(y.parity());
    Ok((r.parity_component(p), r.parity_component(p.flip())))
}

/// `[T0x,T0y] + [T1x,T1y] - T0([T0x,y]+[x,T0y]) - T1([T1x,y]+[x,T1y])`,
/// the parity-`(|x|+|y|)` part of the residual written through the
/// components.
pub fn even_projection_identity(t: &GeneralOperator, x: BasisVector, y: BasisVector) -> Result<Element> {
    let (t0, t1) = split_parity(t);
    let mut total = Element::zero();
    for part in [&t0, &t1] {
        total = &total + &part.rb_residual(x, y)?;
    }
    Ok(total.parity_component(x.parity().plus(y.parity())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub x: BasisVector,
    pub y: BasisVector,
    pub residual: Element,
}

/// First failing admissible pair in basis order, if any.
pub fn first_rb_failure(t: &GeneralOperator) -> Option<PairFailure> {
    first_failure_where(t, t)
}

/// First failing pair of `t` among the pairs admissible for `scope`.
fn first_failure_where(t: &GeneralOperator, scope: &GeneralOperator) -> Option<PairFailure> {
    let w = t.window;
    let basis = BasisVector::all_in(w.lo, w.hi);
    for &x in &basis {
        for &y in &basis {
            if scope.rb_residual(x, y).is_err() {
                continue;
            }
            if let Ok(r) = t.rb_residual(x, y) {
                if !r.is_zero() {
                    return Some(PairFailure { x, y, residual: r });
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub operator: GeneralOperator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub label: String,
    pub even_nonzero: bool,
    pub odd_nonzero: bool,
    pub even_passes: bool,
    pub odd_passes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCounterexample {
    pub label: String,
    pub operator: GeneralOperator,
    pub component: String,
    pub failure: PairFailure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub window: Window,
    pub candidates: usize,
    pub rota_baxter: usize,
    pub mixed: usize,
    pub claim_holds: bool,
    pub counterexample: Option<ClaimCounterexample>,
    pub violations: usize,
    #[serde(skip)]
    pub results: Vec<ComponentResult>,
}

/// Keep the candidates that pass the full Rota-Baxter sweep, then sweep
/// each parity component on its own over the same admissible pairs.
pub fn componentwise_claim_search(window: Window, candidates: &[Candidate]) -> ClaimReport {
    let outcomes: Vec<Option<(ComponentResult, Option<ClaimCounterexample>)>> = candidates
        .par_iter()
        .map(|c| {
            if first_rb_failure(&c.operator).is_some() {
                return None;
            }
            let (even, odd) = split_parity(&c.operator);
            // components are judged on the pairs admissible for the whole
            // operator, so truncation cannot manufacture a failure
            let even_fail = first_failure_where(&even, &c.operator);
            let odd_fail = first_failure_where(&odd, &c.operator);
            let result = ComponentResult {
                label: c.label.clone(),
                even_nonzero: !even.is_zero(),
                odd_nonzero: !odd.is_zero(),
                even_passes: even_fail.is_none(),
                odd_passes: odd_fail.is_none(),
            };
            let cex = even_fail
                .map(|f| ("even", f))
                .or(odd_fail.map(|f| ("odd", f)))
                .map(|(component, failure)| ClaimCounterexample {
                    label: c.label.clone(),
                    operator: c.operator.clone(),
                    component: component.to_string(),
                    failure,
                });
            Some((result, cex))
        })
        .collect();
    let mut results = Vec::new();
    let mut counterexample = None;
    let mut violations = 0;
    for (res, cex) in outcomes.into_iter().flatten() {
        if let Some(cex) = cex {
            violations += 1;
            counterexample.get_or_insert(cex);
        }
        results.push(res);
    }
    ClaimReport {
        window,
        candidates: candidates.len(),
        rota_baxter: results.len(),
        mixed: results.iter().filter(|r| r.even_nonzero && r.odd_nonzero).count(),
        claim_holds: counterexample.is_none(),
        counterexample,
        violations,
        results,
    }
}

/// Sparse integer tables for the exhaustive search: an even diagonal part
/// with at most one nonzero entry, plus an odd shift-`k` part
/// (`k` in `{-1, 0, 1}`) with at most two nonzero entries, coefficients in
/// `{-2, ..., 2}`.
pub fn enumerate_candidates(window: Window) -> Vec<Candidate> {
    let coeffs: Vec<i64> = vec![-2, -1, 1, 2];
    let sources = BasisVector::all_in(window.lo, window.hi);

    let mut evens: Vec<(String, GeneralOperator)> = vec![("E=0".into(), GeneralOperator::zero(window))];
    for &b in &sources {
        for &a in &coeffs {
            let mut e = GeneralOperator::zero(window);
            e.set(b, Element::term(b, CoeffPoly::constant(int(a)))).expect("inside window");
            evens.push((format!("E({b})={a}{b}"), e));
        }
    }

    let odd_image = |b: BasisVector, k: i64| BasisVector {
        family: Family::of_parity(b.parity().flip()),
        degree: b.degree + k,
    };
    let mut odds: Vec<(String, GeneralOperator)> = Vec::new();
    for k in [-1, 0, 1] {
        let entry = |b: BasisVector, a: i64| -> (String, Element) {
            let t = odd_image(b, k);
            (format!("O({b})={a}{t}"), Element::term(t, CoeffPoly::constant(int(a))))
        };
        for (i, &b1) in sources.iter().enumerate() {
            for &a1 in &coeffs {
                let (l1, e1) = entry(b1, a1);
                let mut o = GeneralOperator::zero(window);
                o.set(b1, e1.clone()).expect("inside window");
                odds.push((format!("k={k} {l1}"), o.clone()));
                for &b2 in &sources[i + 1..] {
                    for &a2 in &coeffs {
                        let (l2, e2) = entry(b2, a2);
                        let mut o2 = o.clone();
                        o2.set(b2, e2).expect("inside window");
                        odds.push((format!("k={k} {l1} {l2}"), o2));
                    }
                }
            }
        }
    }

    let mut out = Vec::with_capacity(evens.len() * odds.len());
    for (le, e) in &evens {
        for (lo, o) in &odds {
            out.push(Candidate {
                label: format!("{le}; {lo}"),
                operator: e.sum(o).expect("same window"),
            });
        }
    }
    out
}
