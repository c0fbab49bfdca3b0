//! Products induced by an odd operator (`x ▷ y = [Rx, y]`, `x ≺ y = [Rx, y]`,
//! `x ≻ y = -[x, Ry]`), the identities they satisfy or fail, and a
//! comparison against closed-form product tables.

use std::fmt;

use num::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, koszul_sign, BasisVector, Element, Family};
use crate::coeff::{CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::operator::OddOperator;
use crate::window::Window;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductTag {
    Triangle,
    Prec,
    Succ,
}

impl ProductTag {
    pub fn symbol(self) -> &'static str {
        match self {
            ProductTag::Triangle => "▷",
            ProductTag::Prec => "≺",
            ProductTag::Succ => "≻",
        }
    }
}

impl fmt::Display for ProductTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

pub fn product(op: &OddOperator, tag: ProductTag, x: &Element, y: &Element) -> Result<Element> {
    Ok(match tag {
        ProductTag::Triangle | ProductTag::Prec => bracket(&op.apply(x)?, y),
        ProductTag::Succ => -&bracket(x, &op.apply(y)?),
    })
}

fn tuple_name(xs: &[BasisVector]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn tag_err(xs: &[BasisVector]) -> impl Fn(Error) -> Error {
    let name = tuple_name(xs);
    move |e| e.inadmissible(&name)
}

/// `x ≺ y + x ≻ y - ([Rx, y] - [x, Ry])`; zero by construction.
pub fn sum_rule_residual(op: &OddOperator, x: BasisVector, y: BasisVector) -> Result<Element> {
    let err = tag_err(&[x, y]);
    let (ex, ey) = (Element::basis(x), Element::basis(y));
    let prec = product(op, ProductTag::Prec, &ex, &ey).map_err(&err)?;
    let succ = product(op, ProductTag::Succ, &ex, &ey).map_err(&err)?;
    let rx = op.apply(&ex).map_err(&err)?;
    let ry = op.apply(&ey).map_err(&err)?;
    let direct = &bracket(&rx, &ey) - &bracket(&ex, &ry);
    Ok(&(&prec + &succ) - &direct)
}

/// `[Rx,[Ry,z]] - s [Ry,[Rx,z]] - [R([Rx,y] + [x,Ry]), z]` with
/// `s = (-1)^{(|x|+1)(|y|+1)}`, the parities of `Rx` and `Ry`. With
/// `naive_sign` the sign is `(-1)^{|x||y|}` instead.
pub fn prelie_rb_chain_residual(
    op: &OddOperator,
    x: BasisVector,
    y: BasisVector,
    z: BasisVector,
    naive_sign: bool,
) -> Result<Element> {
    let err = tag_err(&[x, y, z]);
    let (ex, ey, ez) = (Element::basis(x), Element::basis(y), Element::basis(z));
    let rx = op.apply(&ex).map_err(&err)?;
    let ry = op.apply(&ey).map_err(&err)?;
    let sign = if naive_sign {
        koszul_sign(x.parity(), y.parity())
    } else {
        koszul_sign(x.parity().flip(), y.parity().flip())
    };
    let inner = &bracket(&rx, &ey) + &bracket(&ex, &ry);
    let r_inner = op.apply(&inner).map_err(&err)?;
    let a = bracket(&rx, &bracket(&ry, &ez));
    let b = bracket(&ry, &bracket(&rx, &ez)).scale_int(sign);
    let c = bracket(&r_inner, &ez);
    Ok(&(&a - &b) - &c)
}

/// Residuals (LHS - RHS) of the three dendriform axioms:
/// `(x≺y)≺z = x≺(y≺z + y≻z)`, `(x≻y)≺z = x≻(y≺z)`,
/// `x≻(y≻z) = (x≺y + x≻y)≻z`.
pub fn dendriform_axiom_residuals(
    op: &OddOperator,
    x: BasisVector,
    y: BasisVector,
    z: BasisVector,
) -> Result<[Element; 3]> {
    let err = tag_err(&[x, y, z]);
    let (ex, ey, ez) = (Element::basis(x), Element::basis(y), Element::basis(z));
    let p = |a: &Element, b: &Element| product(op, ProductTag::Prec, a, b).map_err(&err);
    let s = |a: &Element, b: &Element| product(op, ProductTag::Succ, a, b).map_err(&err);
    let xy_p = p(&ex, &ey)?;
    let xy_s = s(&ex, &ey)?;
    let yz_p = p(&ey, &ez)?;
    let yz_s = s(&ey, &ez)?;
    let first = &p(&xy_p, &ez)? - &p(&ex, &(&yz_p + &yz_s))?;
    let second = &p(&xy_s, &ez)? - &s(&ex, &yz_p)?;
    let third = &s(&ex, &yz_s)? - &s(&(&xy_p + &xy_s), &ez)?;
    Ok([first, second, third])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleFailure {
    pub tuple: Vec<BasisVector>,
    pub residual: Element,
}

/// Outcome of an identity checked over every admissible tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityVerdict {
    pub checked: usize,
    pub failed: usize,
    pub first: Option<TupleFailure>,
}

impl IdentityVerdict {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn collect(results: Vec<Option<(Vec<BasisVector>, Element)>>) -> Self {
        let checked = results.iter().filter(|r| r.is_some()).count();
        let mut failures = results
            .into_iter()
            .flatten()
            .filter(|(_, r)| !r.is_zero());
        let first = failures.next().map(|(tuple, residual)| TupleFailure { tuple, residual });
        let failed = first.iter().count() + failures.count();
        IdentityVerdict {
            checked,
            failed,
            first,
        }
    }
}

fn pairs(window: Window) -> Vec<(BasisVector, BasisVector)> {
    let basis = BasisVector::all_in(window.lo, window.hi);
    basis
        .iter()
        .flat_map(|&x| basis.iter().map(move |&y| (x, y)))
        .collect()
}

fn triples(window: Window) -> Vec<(BasisVector, BasisVector, BasisVector)> {
    let basis = BasisVector::all_in(window.lo, window.hi);
    let mut out = Vec::with_capacity(basis.len().pow(3));
    for &x in &basis {
        for &y in &basis {
            for &z in &basis {
                out.push((x, y, z));
            }
        }
    }
    out
}

pub fn check_sum_rule(op: &OddOperator, window: Window) -> IdentityVerdict {
    let results = pairs(window)
        .par_iter()
        .map(|&(x, y)| sum_rule_residual(op, x, y).ok().map(|r| (vec![x, y], r)))
        .collect();
    IdentityVerdict::collect(results)
}

pub fn check_chain(op: &OddOperator, window: Window, naive_sign: bool) -> IdentityVerdict {
    let results = triples(window)
        .par_iter()
        .map(|&(x, y, z)| {
            prelie_rb_chain_residual(op, x, y, z, naive_sign)
                .ok()
                .map(|r| (vec![x, y, z], r))
        })
        .collect();
    IdentityVerdict::collect(results)
}

pub fn check_dendriform(op: &OddOperator, window: Window) -> [IdentityVerdict; 3] {
    let results: Vec<Option<(Vec<BasisVector>, [Element; 3])>> = triples(window)
        .par_iter()
        .map(|&(x, y, z)| {
            dendriform_axiom_residuals(op, x, y, z)
                .ok()
                .map(|r| (vec![x, y, z], r))
        })
        .collect();
    [0, 1, 2].map(|i| {
        IdentityVerdict::collect(
            results
                .iter()
                .map(|r| r.as_ref().map(|(t, res)| (t.clone(), res[i].clone())))
                .collect(),
        )
    })
}

/// Which table value scales a closed-form product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// `f(m+k)`
    FLeft,
    /// `g(m+k)`
    GLeft,
    /// `g(n+k)`
    GRight,
}

impl Scale {
    fn value(self, op: &OddOperator, m: i64, n: i64) -> Result<CoeffPoly> {
        let k = op.k();
        match self {
            Scale::FLeft => op.f(m + k),
            Scale::GLeft => op.g(m + k),
            Scale::GRight => op.g(n + k),
        }
    }
}

/// Operators a closed form is stated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Applies {
    Always,
    GZero,
    FZero,
}

impl Applies {
    fn holds(self, op: &OddOperator) -> bool {
        match self {
            Applies::Always => true,
            Applies::GZero => op.g_is_zero(),
            Applies::FZero => op.f_is_zero(),
        }
    }
}

/// `x_m ⋆ y_n = coef(m, n, k) * scale * target_{m+n+k}`, or `= 0` when
/// `value` is `None`.
#[derive(Clone, Copy)]
pub struct ClosedForm {
    pub name: &'static str,
    pub source: &'static str,
    pub tag: ProductTag,
    pub left: Family,
    pub right: Family,
    pub applies: Applies,
    pub value: Option<(fn(i64, i64, i64) -> i64, Scale, Family)>,
}

/// The tabulated product formulas, including every "vanishes" claim.
pub fn closed_forms() -> Vec<ClosedForm> {
    use Family::{G, L};
    use ProductTag::{Prec, Succ, Triangle};
    let f = |name, source, tag, left, right, applies, value| ClosedForm {
        name,
        source,
        tag,
        left,
        right,
        applies,
        value,
    };
    vec![
        f("L_m ▷ L_n = (m+k-n-1) f(m+k) G_{m+n+k}", "pre-Lie, g = 0", Triangle, L, L, Applies::GZero,
            Some(((|m, n, k| m + k - n - 1) as fn(i64, i64, i64) -> i64, Scale::FLeft, G))),
        f("L_m ▷ G_n = 0", "pre-Lie, g = 0", Triangle, L, G, Applies::GZero, None),
        f("G_m ▷ L_n = 0", "pre-Lie, g = 0", Triangle, G, L, Applies::GZero, None),
        f("G_m ▷ G_n = 0", "pre-Lie, g = 0", Triangle, G, G, Applies::GZero, None),
        f("G_m ▷ L_n = (m+k-n) g(m+k) L_{m+n+k}", "pre-Lie", Triangle, G, L, Applies::Always,
            Some((|m, n, k| m + k - n, Scale::GLeft, L))),
        f("G_m ▷ G_n = (m+k-n-1) g(m+k) G_{m+n+k}", "pre-Lie", Triangle, G, G, Applies::Always,
            Some((|m, n, k| m + k - n - 1, Scale::GLeft, G))),
        f("L_m ▷ L_n = 0", "pre-Lie", Triangle, L, L, Applies::Always, None),
        f("L_m ▷ G_n = 0", "pre-Lie", Triangle, L, G, Applies::Always, None),
        f("L_m ≺ L_n = (m+k-n-1) f(m+k) G_{m+n+k}", "dendriform, g = 0", Prec, L, L, Applies::GZero,
            Some((|m, n, k| m + k - n - 1, Scale::FLeft, G))),
        f("L_m ≺ G_n = 0", "dendriform, g = 0", Prec, L, G, Applies::GZero, None),
        f("G_m ≺ L_n = 0", "dendriform, g = 0", Prec, G, L, Applies::GZero, None),
        f("G_m ≺ G_n = 0", "dendriform, g = 0", Prec, G, G, Applies::GZero, None),
        f("L_m ≻ L_n = 0", "dendriform, g = 0", Succ, L, L, Applies::GZero, None),
        f("L_m ≻ G_n = 0", "dendriform, g = 0", Succ, L, G, Applies::GZero, None),
        f("G_m ≻ L_n = 0", "dendriform, g = 0", Succ, G, L, Applies::GZero, None),
        f("G_m ≻ G_n = 0", "dendriform, g = 0", Succ, G, G, Applies::GZero, None),
        f("L_m ≻ G_n = -(m-n-k-1) g(n+k) L_{m+n+k}", "dendriform, f = 0", Succ, L, G, Applies::FZero,
            Some((|m, n, k| -(m - n - k - 1), Scale::GRight, L))),
        f("G_m ≺ L_n = (m+k-n) g(m+k) L_{m+n+k}", "dendriform, f = 0", Prec, G, L, Applies::FZero,
            Some((|m, n, k| m + k - n, Scale::GLeft, L))),
        f("G_m ≺ G_n = (m+k-n-1) g(m+k) G_{m+n+k}", "dendriform, f = 0", Prec, G, G, Applies::FZero,
            Some((|m, n, k| m + k - n - 1, Scale::GLeft, G))),
        f("L_m ≺ L_n = 0", "dendriform, f = 0", Prec, L, L, Applies::FZero, None),
        f("L_m ≺ G_n = 0", "dendriform, f = 0", Prec, L, G, Applies::FZero, None),
        f("L_m ≻ L_n = 0", "dendriform, f = 0", Succ, L, L, Applies::FZero, None),
        f("G_m ≻ L_n = 0", "dendriform, f = 0", Succ, G, L, Applies::FZero, None),
        f("G_m ≻ G_n = 0", "dendriform, f = 0", Succ, G, G, Applies::FZero, None),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FormulaOutcome {
    NotApplicable,
    /// No admissible pair with a nonzero scale: nothing to compare.
    Vacuous,
    Agree,
    /// `actual = (formula coefficient + gap) * scale` on every pair.
    ConstantGap {
        #[serde(with = "crate::coeff::rational_str")]
        gap: Rational,
        scale: Scale, example: Discrepancy },
    Disagree { example: Discrepancy },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub m: i64,
    pub n: i64,
    pub actual: Element,
    pub formula: Element,
    pub difference: Element,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaVerdict {
    pub formula: String,
    pub source: String,
    pub checked: usize,
    #[serde(flatten)]
    pub outcome: FormulaOutcome,
}

impl FormulaVerdict {
    pub fn agrees(&self) -> bool {
        matches!(self.outcome, FormulaOutcome::Agree | FormulaOutcome::Vacuous)
    }
}

fn compare_one(op: &OddOperator, window: Window, form: &ClosedForm) -> FormulaVerdict {
    let mut verdict = FormulaVerdict {
        formula: form.name.to_string(),
        source: form.source.to_string(),
        checked: 0,
        outcome: FormulaOutcome::NotApplicable,
    };
    if !form.applies.holds(op) {
        return verdict;
    }
    let k = op.k();
    let mut first_diff: Option<Discrepancy> = None;
    let mut gaps: Vec<Option<Rational>> = Vec::new();
    let mut any_scale = false;
    for m in window.iter() {
        for n in window.iter() {
            let x = Element::basis(BasisVector { family: form.left, degree: m });
            let y = Element::basis(BasisVector { family: form.right, degree: n });
            let Ok(actual) = product(op, form.tag, &x, &y) else {
                continue;
            };
            let claimed = match form.value {
                None => Element::zero(),
                Some((coef, scale, fam)) => {
                    let Ok(s) = scale.value(op, m, n) else {
                        continue;
                    };
                    let target = BasisVector { family: fam, degree: m + n + k };
                    if !s.is_zero() {
                        any_scale = true;
                        // gap = actual/scale - coef, when actual is a multiple of scale
                        let a = actual.coeff(&target);
                        let single = actual.is_zero() || (actual.len() == 1 && !a.is_zero());
                        let ratio = multiple_of(&a, &s)
                            .filter(|_| single)
                            .map(|r| r - Rational::from_integer(coef(m, n, k).into()));
                        gaps.push(ratio);
                    }
                    Element::term(target, s.scale_int(coef(m, n, k)))
                }
            };
            verdict.checked += 1;
            if actual != claimed && first_diff.is_none() {
                first_diff = Some(Discrepancy {
                    m,
                    n,
                    difference: &actual - &claimed,
                    actual,
                    formula: claimed,
                });
            }
        }
    }
    verdict.outcome = match (first_diff, form.value) {
        (None, _) if form.value.is_some() && !any_scale => FormulaOutcome::Vacuous,
        (None, _) => FormulaOutcome::Agree,
        (Some(example), Some((_, scale, _))) => {
            let constant = gaps.first().cloned().flatten().filter(|g0| {
                gaps.iter().all(|g| g.as_ref() == Some(g0))
            });
            match constant {
                Some(gap) if !gap.is_zero() => FormulaOutcome::ConstantGap { gap, scale, example },
                _ => FormulaOutcome::Disagree { example },
            }
        }
        (Some(example), None) => FormulaOutcome::Disagree { example },
    };
    verdict
}

/// `r` with `a = r * s`, if one exists. `s` must be nonzero.
fn multiple_of(a: &CoeffPoly, s: &CoeffPoly) -> Option<Rational> {
    let d = s.coeffs().iter().position(|q| !q.is_zero())?;
    let r = a.coeff(d) / &s.coeffs()[d];
    (s.scale(&r) == *a).then_some(r)
}

/// Evaluate every closed form against first-principles brackets on all
/// admissible `(m, n)` in the window.
pub fn closed_form_compare(op: &OddOperator, window: Window) -> Vec<FormulaVerdict> {
    closed_forms()
        .iter()
        .map(|form| compare_one(op, window, form))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuresReport {
    pub k: i64,
    pub window: Window,
    pub description: String,
    pub sum_rule: IdentityVerdict,
    pub chain_identity: IdentityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_chain_identity: Option<IdentityVerdict>,
    pub dendriform_axioms: [IdentityVerdict; 3],
    pub closed_form: Vec<FormulaVerdict>,
}

impl StructuresReport {
    /// Sum rule and chain identity hold; dendriform axioms and closed
    /// forms are recorded, not required.
    pub fn identities_pass(&self) -> bool {
        self.sum_rule.passed() && self.chain_identity.passed()
    }

    pub fn formula(&self, name: &str) -> Option<&FormulaVerdict> {
        self.closed_form.iter().find(|v| v.formula == name)
    }
}

pub fn structures_report(op: &OddOperator, window: Window, description: &str, naive: bool) -> StructuresReport {
    StructuresReport {
        k: op.k(),
        window,
        description: description.to_string(),
        sum_rule: check_sum_rule(op, window),
        chain_identity: check_chain(op, window, false),
        naive_chain_identity: naive.then(|| check_chain(op, window, true)),
        dendriform_axioms: check_dendriform(op, window),
        closed_form: closed_form_compare(op, window),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, CoeffPoly};

    fn delta_zero_k1(w: Window) -> OddOperator {
        OddOperator::from_fns(1, w, |_| CoeffPoly::zero(), |m| {
            if m == 0 { CoeffPoly::c() } else { CoeffPoly::zero() }
        })
    }

    fn c_times(n: i64) -> CoeffPoly {
        CoeffPoly::c_times(int(n))
    }

    #[test]
    fn product_examples() {
        let op = delta_zero_k1(Window::symmetric(8));
        let tri = product(&op, ProductTag::Triangle, &Element::g(-1), &Element::l(2)).unwrap();
        assert_eq!(tri, Element::term(BasisVector::l(2), c_times(-2)));
        let succ = product(&op, ProductTag::Succ, &Element::l(2), &Element::g(-1)).unwrap();
        assert_eq!(succ, Element::term(BasisVector::l(2), c_times(-2)));
        for m in -3..=3 {
            for y in BasisVector::all_in(-3, 3) {
                let p = product(&op, ProductTag::Triangle, &Element::l(m), &Element::basis(y)).unwrap();
                assert!(p.is_zero());
            }
        }
    }

    #[test]
    fn chain_examples() {
        let w = Window::symmetric(8);
        let op = delta_zero_k1(w);
        let (gm1, g0, l2) = (BasisVector::g(-1), BasisVector::g(0), BasisVector::l(2));
        assert!(prelie_rb_chain_residual(&op, gm1, g0, l2, false).unwrap().is_zero());
        for x in BasisVector::all_in(-2, 2) {
            for z in BasisVector::all_in(-2, 2) {
                assert!(prelie_rb_chain_residual(&op, x, x, z, false).unwrap().is_zero());
            }
        }
        let zero = OddOperator::zero(1, w);
        assert!(prelie_rb_chain_residual(&zero, gm1, g0, l2, false).unwrap().is_zero());
    }

    #[test]
    fn dendriform_counterexample() {
        let op = delta_zero_k1(Window::symmetric(8));
        let res =
            dendriform_axiom_residuals(&op, BasisVector::g(-1), BasisVector::g(-1), BasisVector::g(0)).unwrap();
        let expected = Element::term(BasisVector::g(0), CoeffPoly::monomial(int(-1), 2));
        assert_eq!(res[0], expected);
        let zero = OddOperator::zero(1, Window::symmetric(8));
        let res = dendriform_axiom_residuals(&zero, BasisVector::g(-1), BasisVector::g(-1), BasisVector::g(0)).unwrap();
        assert!(res.iter().all(Element::is_zero));
    }

    #[test]
    fn g_zero_l_triples_vanish() {
        let op = OddOperator::from_fns(2, Window::symmetric(20), |m| c_times(m + 3), |_| CoeffPoly::zero());
        for m in -3..=3 {
            for n in -3..=3 {
                let res =
                    dendriform_axiom_residuals(&op, BasisVector::l(m), BasisVector::l(n), BasisVector::l(1)).unwrap();
                assert!(res.iter().all(Element::is_zero));
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let w = Window::symmetric(6);
        let op = delta_zero_k1(Window::symmetric(8));
        let report = closed_form_compare(&op, w);
        let get = |name: &str| report.iter().find(|v| v.formula == name).unwrap();
        assert!(get("G_m ▷ L_n = (m+k-n) g(m+k) L_{m+n+k}").agrees());
        assert!(get("G_m ≺ G_n = (m+k-n-1) g(m+k) G_{m+n+k}").agrees());
        assert!(matches!(
            &get("L_m ≻ G_n = -(m-n-k-1) g(n+k) L_{m+n+k}").outcome,
            FormulaOutcome::ConstantGap { gap, .. } if *gap == int(-1)
        ));

        let f_only = OddOperator::from_fns(1, Window::symmetric(8), |m| c_times(m * m + 1), |_| CoeffPoly::zero());
        let report = closed_form_compare(&f_only, w);
        let get = |name: &str| report.iter().find(|v| v.formula == name).unwrap();
        assert!(matches!(
            &get("L_m ▷ L_n = (m+k-n-1) f(m+k) G_{m+n+k}").outcome,
            FormulaOutcome::ConstantGap { gap, .. } if *gap == int(2)
        ));

        let affine = OddOperator::from_fns(1, Window::symmetric(8), |m| &c_times(m) + &CoeffPoly::from_int(2), |_| {
            CoeffPoly::zero()
        });
        let report = closed_form_compare(&affine, w);
        assert!(matches!(
            &report.iter().find(|v| v.formula.starts_with("L_m ▷ L_n = (")).unwrap().outcome,
            FormulaOutcome::ConstantGap { gap, .. } if *gap == int(2)
        ));
    }

    #[test]
    fn sum_rule_holds() {
        let op = delta_zero_k1(Window::symmetric(4));
        assert!(check_sum_rule(&op, Window::symmetric(4)).passed());
    }
}
