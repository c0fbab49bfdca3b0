//! Exact homogeneous linear systems: fraction-free (Bareiss) elimination
//! over the integers, then rational back-substitution for a nullspace
//! basis.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::coeff::Rational;

/// Row echelon form produced by fraction-free elimination.
#[derive(Clone, Debug)]
pub struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    ncols: usize,
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect()
}

impl Echelon {
    pub fn new(rows: &[Vec<Rational>], ncols: usize) -> Self {
        let mut a: Vec<Vec<BigInt>> = rows
            .iter()
            .inspect(|r| assert_eq!(r.len(), ncols, "ragged system"))
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .map(|r| integer_row(r))
            .collect();
        let nrows = a.len();
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for col in 0..ncols {
            if r == nrows {
                break;
            }
            let Some(p) = (r..nrows).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let (head, tail) = a.split_at_mut(r + 1);
            let pivot_row = &head[r];
            let pivot = &pivot_row[col];
            for row in tail.iter_mut() {
                let lead = std::mem::take(&mut row[col]);
                for j in col + 1..ncols {
                    let num = pivot * &row[j] - &lead * &pivot_row[j];
                    let (q, rem) = num.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "fraction-free step left a remainder");
                    row[j] = q;
                }
            }
            prev = a[r][col].clone();
            pivots.push(col);
            r += 1;
        }
        a.truncate(r);
        Echelon {
            rows: a,
            pivots,
            ncols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduced row echelon form over the rationals.
    pub fn reduced(&self) -> Vec<Vec<Rational>> {
        let mut rref: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .zip(&self.pivots)
            .map(|(row, &pc)| {
                let p = &row[pc];
                row.iter()
                    .map(|x| Rational::new(x.clone(), p.clone()))
                    .collect()
            })
            .collect();
        for i in (0..rref.len()).rev() {
            let pc = self.pivots[i];
            for u in 0..i {
                let factor = rref[u][pc].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in pc..self.ncols {
                    let delta = &factor * &rref[i][j];
                    rref[u][j] -= delta;
                }
            }
        }
        rref
    }

    /// Basis of `{v : A v = 0}`: one vector per free column, with that
    /// column set to 1.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let rref = self.reduced();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Rational::zero(); self.ncols];
                v[fc] = Rational::one();
                for (row, &pc) in rref.iter().zip(&self.pivots) {
                    v[pc] = -row[fc].clone();
                }
                v
            })
            .collect()
    }
}

pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    Echelon::new(rows, ncols).nullspace()
}

/// Scale a vector so its entries are coprime integers with a positive first
/// nonzero entry.
pub fn primitive(v: &[Rational]) -> Vec<Rational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &gcd * &sign))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    fn apply(rows: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
        rows.iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Plain rational Gauss-Jordan rank, kept apart from the Bareiss path.
    fn rational_rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
        let mut a = rows.to_vec();
        let mut r = 0;
        for col in 0..ncols {
            let Some(p) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let pv = a[r][col].clone();
            for i in 0..a.len() {
                if i != r && !a[i][col].is_zero() {
                    let f = &a[i][col] / &pv;
                    for j in 0..ncols {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn small_nullspace() {
        let a = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(apply(&a, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn full_rank_has_trivial_nullspace() {
        let a = mat(&[&[2, 1], &[1, 3]]);
        assert_eq!(Echelon::new(&a, 2).rank(), 2);
        assert!(nullspace(&a, 2).is_empty());
    }

    #[test]
    fn rational_entries_and_skipped_columns() {
        let a = vec![
            vec![int(0), rat(1, 2), rat(1, 3), int(0)],
            vec![int(0), int(1), rat(2, 3), int(1)],
        ];
        let e = Echelon::new(&a, 4);
        assert_eq!(e.pivots(), &[1, 3]);
        for v in e.nullspace() {
            assert!(apply(&a, &v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![rat(-1, 2), int(0), rat(3, 4)];
        assert_eq!(primitive(&v), vec![int(2), int(0), int(-3)]);
    }

    proptest! {
        #[test]
        fn nullspace_is_kernel_with_full_dimension(
            entries in prop::collection::vec(-4i64..=4, 20),
            rows in 1usize..=4,
        ) {
            let ncols = 5;
            let a: Vec<Vec<Rational>> = entries
                .chunks(ncols)
                .take(rows)
                .map(|r| r.iter().map(|&x| rat(x, 1 + x.abs() % 3)).collect())
                .collect();
            let e = Echelon::new(&a, ncols);
            prop_assert_eq!(e.rank(), rational_rank(&a, ncols));
            let ns = e.nullspace();
            prop_assert_eq!(ns.len() + e.rank(), ncols);
            for v in &ns {
                prop_assert!(apply(&a, v).iter().all(Zero::is_zero));
            }
        }
    }
}
