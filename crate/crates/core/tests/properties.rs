mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use witt_rb::algebra::{bracket, bracket_bv, koszul_sign};
use witt_rb::coeff::{rat, CoeffPoly, Rational};
use witt_rb::decomposition::{even_projection_identity, projected_rb_residuals, GeneralOperator};
use witt_rb::operator::{sweep, Counterexample, Tuple};
use witt_rb::{BasisVector, Element, OddOperator, Window};

use common::{bracket_oracle, c2_vector, key, OracleOperator};

fn basis_vector(range: i64) -> impl Strategy<Value = BasisVector> {
    (any::<bool>(), -range..=range).prop_map(|(l, d)| if l { BasisVector::l(d) } else { BasisVector::g(d) })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| rat(p, q))
}

fn element(range: i64) -> impl Strategy<Value = Element> {
    prop::collection::vec((basis_vector(range), small_rational()), 0..4).prop_map(|terms| {
        terms
            .into_iter()
            .map(|(b, r)| (b, CoeffPoly::constant(r)))
            .collect()
    })
}

fn table(window: Window) -> impl Strategy<Value = BTreeMap<i64, Rational>> {
    prop::collection::vec(prop::option::weighted(0.4, small_rational()), window.len()).prop_map(move |vals| {
        window
            .iter()
            .zip(vals)
            .filter_map(|(i, v)| v.filter(|r| *r != rat(0, 1)).map(|r| (i, r)))
            .collect()
    })
}

fn as_c_table(t: &BTreeMap<i64, Rational>) -> BTreeMap<i64, CoeffPoly> {
    t.iter().map(|(i, r)| (*i, CoeffPoly::c_times(r.clone()))).collect()
}

fn lookup(t: &BTreeMap<i64, Rational>) -> impl Fn(i64) -> Rational + '_ {
    move |i| t.get(&i).cloned().unwrap_or_else(|| rat(0, 1))
}

const W: Window = Window { lo: -4, hi: 4 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_graded_skew(x in basis_vector(10), y in basis_vector(10)) {
        let xy = bracket_bv(x, y);
        let yx = bracket_bv(y, x);
        let sign = -koszul_sign(x.parity(), y.parity());
        prop_assert_eq!(xy, yx.scale_int(sign));
    }

    #[test]
    fn bracket_matches_hand_constants(x in basis_vector(10), y in basis_vector(10)) {
        let expected: Element = bracket_oracle(key(x), key(y))
            .map(|(s, (fam, d))| (BasisVector { family: fam, degree: d }, CoeffPoly::constant(s)))
            .into_iter()
            .collect();
        prop_assert_eq!(bracket_bv(x, y), expected);
    }

    #[test]
    fn bracket_is_bilinear(a in element(6), b in element(6), z in element(6), s in small_rational()) {
        let s = CoeffPoly::constant(s);
        let lhs = bracket(&(&a + &b.scale(&s)), &z);
        let rhs = &bracket(&a, &z) + &bracket(&b, &z).scale(&s);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pair_residual_matches_oracle(k in -3i64..=3, f in table(W), g in table(W),
                                    x in basis_vector(4), y in basis_vector(4)) {
        let op = OddOperator::from_tables(k, W, as_c_table(&f), as_c_table(&g)).unwrap();
        let (ff, gg) = (lookup(&f), lookup(&g));
        let oracle = OracleOperator { k, f: &ff, g: &gg };
        if let Ok(r) = op.rb_residual(x, y) {
            prop_assert_eq!(c2_vector(&r), oracle.residual(key(x), key(y)));
        }
    }

    #[test]
    fn gg_at_zero_factors_through_fundamental(k in -3i64..=4, g in table(W), m in -4i64..=4) {
        let op = OddOperator::from_tables(k, W, BTreeMap::new(), as_c_table(&g)).unwrap();
        let gg = op.residual_gg(m, 0).unwrap();
        let fund = op.fundamental_residual(m).unwrap();
        prop_assert_eq!(gg, -(&op.g(m).unwrap() * &fund));
    }

    #[test]
    fn sweep_is_scale_invariant(k in -2i64..=2, f in table(W), g in table(W), s in 1i64..=3) {
        let op = OddOperator::from_tables(k, W, as_c_table(&f), as_c_table(&g)).unwrap();
        let scale = rat(s, 2);
        let scaled = op.map_values(|p| p.scale(&scale), |p| p.scale(&scale));
        let a = sweep(&op, "a");
        let b = sweep(&scaled, "b");
        prop_assert_eq!(a.passed(), b.passed());
        let sq = CoeffPoly::constant(&scale * &scale);
        for (x, y) in a.failures.iter().zip(&b.failures) {
            prop_assert_eq!(x.tuple, y.tuple);
            if let (witt_rb::operator::ResidualValue::Element(ex), witt_rb::operator::ResidualValue::Element(ey)) = (&x.residual, &y.residual) {
                prop_assert_eq!(&ex.scale(&sq), ey);
            }
        }
    }

    #[test]
    fn sweep_routes_agree(k in -3i64..=3, f in table(W), g in table(W)) {
        let op = OddOperator::from_tables(k, W, as_c_table(&f), as_c_table(&g)).unwrap();
        let rep = sweep(&op, "random");
        prop_assert!(rep.consistent(), "{:?}", rep.cross_mismatches);
    }

    #[test]
    fn counterexamples_replay(k in -2i64..=2, f in table(W), g in table(W)) {
        let op = OddOperator::from_tables(k, W, as_c_table(&f), as_c_table(&g)).unwrap();
        let rep = sweep(&op, "random");
        if let witt_rb::operator::Verdict::Fail { first } = &rep.verdict {
            let json = serde_json::to_string(first).unwrap();
            let back: Counterexample = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back.replay().unwrap(), first.residual.clone());
        }
    }

    #[test]
    fn operator_files_round_trip(k in -3i64..=3, f in table(W), g in table(W)) {
        let op = OddOperator::from_tables(k, W, as_c_table(&f), as_c_table(&g)).unwrap();
        let json = serde_json::to_string(&op.to_file()).unwrap();
        let back = witt_rb::io::OperatorFile::parse(&json).unwrap();
        prop_assert_eq!(back.to_file(), op.to_file());
    }

    #[test]
    fn projections_sum_to_full_residual(k in -1i64..=1, f in table(W), g in table(W),
                                        e0 in table(W), e1 in table(W),
                                        x in basis_vector(2), y in basis_vector(2)) {
        let w = Window::symmetric(2);
        let odd = OddOperator::from_tables(k, w.shift(k), restrict(&f, w.shift(k)), restrict(&g, w.shift(k))).unwrap();
        let even = GeneralOperator::diagonal(w, |i| c_of(&e0, i), |i| c_of(&e1, i));
        let t = GeneralOperator::from_odd(&odd).sum(&even).unwrap();
        if let Ok(full) = t.rb_residual(x, y) {
            let (p0, p1) = projected_rb_residuals(&t, x, y).unwrap();
            prop_assert_eq!(&p0 + &p1, full);
            prop_assert_eq!(even_projection_identity(&t, x, y).unwrap(), p0);
        }
    }
}

fn restrict(t: &BTreeMap<i64, Rational>, w: Window) -> BTreeMap<i64, CoeffPoly> {
    as_c_table(&t.iter().filter(|(i, _)| w.contains(**i)).map(|(i, r)| (*i, r.clone())).collect())
}

fn c_of(t: &BTreeMap<i64, Rational>, i: i64) -> CoeffPoly {
    t.get(&i).map_or_else(CoeffPoly::zero, |r| CoeffPoly::c_times(r.clone()))
}

#[test]
fn gg_residual_matches_direct_expression() {
    let g = |m: i64| if m == -2 { rat(0, 1) } else { rat(2, m + 2) };
    for (m, n) in [(-2, 1), (1, 3), (-5, 2), (4, -1)] {
        let op = OddOperator::from_fns(3, Window::symmetric(8), |_| CoeffPoly::zero(), |i| CoeffPoly::c_times(g(i)));
        let got = op.residual(&Tuple::GG { m, n }).unwrap();
        let expected = CoeffPoly::monomial(common::gg_oracle(3, &g, m, n), 2);
        assert_eq!(got, witt_rb::operator::ResidualValue::Scalar(expected));
    }
}
