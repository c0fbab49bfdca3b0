//! Window-scale rederivation of the classification: solve (GG) for `g` by
//! backtracking, solve (LL) + (LG) for `f` given `g`, check the support
//! lemmas instance by instance, and match each solution against the named
//! family shapes.
//!
//! The solver works with `g / c`: (GG) is homogeneous quadratic in `g`, so
//! solutions are determined up to the formal scale. Normalization puts
//! `g(0) = c` when `g(0) != 0`, otherwise the single support value is `c`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{int, rat, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::io::IndexTable;
use crate::linalg::{primitive, Echelon};
use crate::operator::{sweep, OddOperator};
use crate::window::Window;

/// Margin used for the window-robustness test.
pub const ROBUST_MARGIN: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    /// `g = 0`, `f` arbitrary.
    TrivialG,
    /// `g = c delta_{1-k}`.
    DeltaOneMinusK,
    /// `k = 1`, `g = c delta_0`.
    DeltaZeroK1,
    /// `k` odd, `k != 1`: `g = c (delta_0 + 2 delta_{(1-k)/2})`.
    TwoPointFinite,
    /// `k` odd, `k != 1`: `g(m) = (k-1) c / (m+k-1)`, zero at `1-k`.
    RationalInfinite,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 5] = [
        FamilyTag::TrivialG,
        FamilyTag::DeltaOneMinusK,
        FamilyTag::DeltaZeroK1,
        FamilyTag::TwoPointFinite,
        FamilyTag::RationalInfinite,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            FamilyTag::TrivialG => "trivial-g",
            FamilyTag::DeltaOneMinusK => "delta-one-minus-k",
            FamilyTag::DeltaZeroK1 => "delta-zero",
            FamilyTag::TwoPointFinite => "two-point",
            FamilyTag::RationalInfinite => "rational",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.cli_name() == s || format!("{t:?}") == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub k: i64,
}

impl FamilySpec {
    pub fn new(tag: FamilyTag, k: i64) -> Result<Self> {
        let spec = FamilySpec { tag, k };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        let bad = |why: &str| Err(Error::InvalidParameters(format!("{} with k = {k}: {why}", self.tag)));
        match self.tag {
            FamilyTag::DeltaZeroK1 if k != 1 => bad("requires k = 1"),
            FamilyTag::TwoPointFinite | FamilyTag::RationalInfinite if k % 2 == 0 || k == 1 => {
                bad("requires k odd and k != 1")
            }
            _ => Ok(()),
        }
    }

    /// The family's `g / c` at a shifted index.
    pub fn g_shape(&self, m: i64) -> Rational {
        let k = self.k;
        match self.tag {
            FamilyTag::TrivialG => Rational::zero(),
            FamilyTag::DeltaOneMinusK => indicator(m == 1 - k),
            FamilyTag::DeltaZeroK1 => indicator(m == 0),
            FamilyTag::TwoPointFinite => {
                let h = (1 - k) / 2;
                if m == 0 {
                    int(1)
                } else if m == h {
                    int(2)
                } else {
                    Rational::zero()
                }
            }
            FamilyTag::RationalInfinite => {
                if m == 1 - k {
                    Rational::zero()
                } else {
                    rat(k - 1, m + k - 1)
                }
            }
        }
    }

    /// Support of `g` over all integers, when finite.
    pub fn finite_support(&self) -> Option<Vec<i64>> {
        let k = self.k;
        match self.tag {
            FamilyTag::TrivialG => Some(vec![]),
            FamilyTag::DeltaOneMinusK => Some(vec![1 - k]),
            FamilyTag::DeltaZeroK1 => Some(vec![0]),
            FamilyTag::TwoPointFinite => {
                let mut s = vec![(1 - k) / 2, 0];
                s.sort();
                Some(s)
            }
            FamilyTag::RationalInfinite => None,
        }
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Sample `f` tables used for the `g = 0` family when the caller does not
/// supply one.
pub fn sample_f_tables() -> Vec<(&'static str, fn(i64) -> CoeffPoly)> {
    vec![
        ("f(M) = c", |_| CoeffPoly::c()),
        ("f(M) = (M^2 - 3M + 1) c", |m| CoeffPoly::c_times(int(m * m - 3 * m + 1))),
        ("f(M) = c / (M^2 + 1) + 2", |m| {
            CoeffPoly::from_coeffs(vec![int(2), rat(1, m * m + 1)])
        }),
    ]
}

/// The family's operator table on the window. The `g = 0` family uses the
/// first sample `f`.
pub fn build_family(spec: &FamilySpec, window: Window) -> Result<OddOperator> {
    let (_, f) = sample_f_tables()[0];
    build_family_with_f(spec, window, f)
}

/// Like [`build_family`], with a caller-supplied `f` for the `g = 0` family.
/// Every other family has `f = 0`.
pub fn build_family_with_f(
    spec: &FamilySpec,
    window: Window,
    f: impl Fn(i64) -> CoeffPoly,
) -> Result<OddOperator> {
    spec.validate()?;
    let g = |m: i64| CoeffPoly::c_times(spec.g_shape(m));
    Ok(match spec.tag {
        FamilyTag::TrivialG => OddOperator::from_fns(spec.k, window, f, |_| CoeffPoly::zero()),
        _ => OddOperator::from_fns(spec.k, window, |_| CoeffPoly::zero(), g),
    })
}

/// Support set of `g` on the window: `J = supp(g)` and its complement `I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub support: Vec<i64>,
    pub annihilator: Vec<i64>,
}

impl SupportSet {
    pub fn of(window: Window, g: &BTreeMap<i64, CoeffPoly>) -> Self {
        let (support, annihilator) = window
            .iter()
            .partition(|m| g.get(m).is_some_and(|v| !v.is_zero()));
        SupportSet {
            support,
            annihilator,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: u64,
    pub pair_prunes: u64,
    pub symmetry_forced: u64,
    pub propagation_forced: u64,
}

/// A solution of (GG) on a window, as `g / c`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GSolution {
    pub values: BTreeMap<i64, Rational>,
}

impl GSolution {
    pub fn support(&self) -> Vec<i64> {
        self.values.keys().copied().collect()
    }

    pub fn get(&self, m: i64) -> Rational {
        self.values.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn table(&self) -> BTreeMap<i64, CoeffPoly> {
        self.values
            .iter()
            .map(|(m, v)| (*m, CoeffPoly::c_times(v.clone())))
            .collect()
    }

    pub fn restrict(&self, w: Window) -> GSolution {
        GSolution {
            values: self
                .values
                .iter()
                .filter(|(m, _)| w.contains(**m))
                .map(|(m, v)| (*m, v.clone()))
                .collect(),
        }
    }

    /// Rescale so that `g(0) = 1`, or the first support value is 1.
    pub fn normalized(&self) -> GSolution {
        let pivot = self
            .values
            .get(&0)
            .or_else(|| self.values.values().next())
            .cloned();
        match pivot {
            None => self.clone(),
            Some(p) => GSolution {
                values: self.values.iter().map(|(m, v)| (*m, v / &p)).collect(),
            },
        }
    }
}

/// `(M-N) g(M) g(N) - g(M+N) ((M-N+k-1) g(M) + (M-N-k+1) g(N))` on scalars.
fn gg_scalar(k: i64, m: i64, n: i64, gm: &Rational, gn: &Rational, gmn: &Rational) -> Rational {
    let lhs = gm * gn * int(m - n);
    let rhs = gmn * (gm * int(m - n + k - 1) + gn * int(m - n - k + 1));
    lhs - rhs
}

struct GSearch {
    k: i64,
    order: Vec<i64>,
    assigned: BTreeMap<i64, Rational>,
    solutions: Vec<GSolution>,
    stats: SolverStats,
}

impl GSearch {
    /// Candidate values of `g(M)`, from (GG) at `(M, 0)`:
    /// `g(M) ((k-1) g(0) - (M+k-1) g(M)) = 0`.
    fn candidates(&self, m: i64, g0: &Rational) -> Vec<Rational> {
        let k = self.k;
        if m == 0 {
            return vec![g0.clone()];
        }
        if g0.is_zero() {
            // only M = 1 - k escapes, with a free value normalized to 1
            return if m + k - 1 == 0 {
                vec![Rational::zero(), Rational::one()]
            } else {
                vec![Rational::zero()]
            };
        }
        if m + k - 1 == 0 {
            return vec![Rational::zero()];
        }
        let v = g0 * rat(k - 1, m + k - 1);
        if v.is_zero() {
            vec![Rational::zero()]
        } else {
            vec![Rational::zero(), v]
        }
    }

    /// Zero/nonzero requirement on `g(M)` implied by the support lemmas and
    /// the indices assigned so far.
    fn forced(&mut self, m: i64) -> Option<bool> {
        let k = self.k;
        let nonzero = |a: &BTreeMap<i64, Rational>, i: i64| a.get(&i).map(|v| !v.is_zero());
        // symmetry, g(0) != 0: j in J, 2j != 1-k  =>  -j in J
        let g0_nonzero = nonzero(&self.assigned, 0) == Some(true);
        if let Some(z) = nonzero(&self.assigned, -m).filter(|_| g0_nonzero) {
            if z && -2 * m != 1 - k {
                self.stats.symmetry_forced += 1;
                return Some(true);
            }
            if !z && 2 * m != 1 - k {
                self.stats.symmetry_forced += 1;
                return Some(false);
            }
        }
        // propagation: n in J, a in I, a != n+k-1  =>  a+n in I
        for (&n, gn) in &self.assigned {
            if gn.is_zero() {
                continue;
            }
            let a = m - n;
            if a != n + k - 1 && nonzero(&self.assigned, a) == Some(false) {
                self.stats.propagation_forced += 1;
                return Some(false);
            }
        }
        None
    }

    /// Every admissible (GG) triple closed by assigning `m`.
    fn consistent_with(&self, m: i64) -> bool {
        let k = self.k;
        let a = &self.assigned;
        let get = |i: i64| a.get(&i);
        for &other in a.keys() {
            // pairs (m, other), (other, m) with the sum assigned
            for (x, y) in [(m, other), (other, m)] {
                if let (Some(gx), Some(gy), Some(gs)) = (get(x), get(y), get(x + y)) {
                    if !gg_scalar(k, x, y, gx, gy, gs).is_zero() {
                        return false;
                    }
                }
            }
            // pairs summing to m
            let rest = m - other;
            if let (Some(gx), Some(gy), Some(gs)) = (get(other), get(rest), get(m)) {
                if !gg_scalar(k, other, rest, gx, gy, gs).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn dfs(&mut self, depth: usize) {
        self.stats.nodes += 1;
        if depth == self.order.len() {
            self.solutions.push(GSolution {
                values: self
                    .assigned
                    .iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(m, v)| (*m, v.clone()))
                    .collect(),
            });
            return;
        }
        let m = self.order[depth];
        let g0 = self.assigned.get(&0).cloned().unwrap_or_else(Rational::zero);
        let forced = self.forced(m);
        for v in self.candidates(m, &g0) {
            if forced.is_some_and(|must| must == v.is_zero()) {
                continue;
            }
            self.assigned.insert(m, v);
            if self.consistent_with(m) {
                self.dfs(depth + 1);
            } else {
                self.stats.pair_prunes += 1;
            }
            self.assigned.remove(&m);
        }
    }
}

/// Does `g` satisfy (GG) on every admissible pair of the window?
pub fn satisfies_gg(k: i64, window: Window, g: &GSolution) -> bool {
    window.iter().all(|m| {
        window.iter().all(|n| {
            !window.contains(m + n)
                || gg_scalar(k, m, n, &g.get(m), &g.get(n), &g.get(m + n)).is_zero()
        })
    })
}

#[derive(Clone, Debug)]
pub struct GSolveResult {
    pub k: i64,
    pub window: Window,
    pub solutions: Vec<GSolution>,
    pub stats: SolverStats,
}

/// All `g` (up to scale) with zero (GG) residual on every admissible pair of
/// the window. Branches on `g(0) = 0` versus `g(0) = c`, restricts every
/// other value through the fundamental relation, and backtracks over the
/// support with lemma-driven forcing plus exact pair checks.
pub fn solve_g(k: i64, window: Window) -> Result<GSolveResult> {
    if !window.contains_zero() {
        return Err(Error::InvalidParameters(format!(
            "solve_g needs 0 inside the window, got {window}"
        )));
    }
    let mut order: Vec<i64> = window.iter().filter(|&m| m != 0).collect();
    order.sort_by_key(|m| (m.abs(), *m));
    let mut all = Vec::new();
    let mut stats = SolverStats::default();
    for g0 in [Rational::zero(), Rational::one()] {
        let mut search = GSearch {
            k,
            order: order.clone(),
            assigned: BTreeMap::from([(0, g0)]),
            solutions: Vec::new(),
            stats: SolverStats::default(),
        };
        search.dfs(0);
        stats.nodes += search.stats.nodes;
        stats.pair_prunes += search.stats.pair_prunes;
        stats.symmetry_forced += search.stats.symmetry_forced;
        stats.propagation_forced += search.stats.propagation_forced;
        all.extend(search.solutions);
    }
    // the search is exact on triples it closes; re-check the whole window
    all.retain(|s| satisfies_gg(k, window, s));
    all.sort_by(solution_order);
    all.dedup();
    Ok(GSolveResult {
        k,
        window,
        solutions: all,
        stats,
    })
}

fn solution_order(a: &GSolution, b: &GSolution) -> std::cmp::Ordering {
    let key = |s: &GSolution| (!s.values.contains_key(&0), s.values.len(), s.support());
    // g = 0 first, then g(0) = 0 solutions, then by support
    let ka = (a.values.is_empty(), key(a));
    let kb = (b.values.is_empty(), key(b));
    kb.0.cmp(&ka.0)
        .then_with(|| ka.1.cmp(&kb.1))
        .then_with(|| a.cmp(b))
}

/// What (LL) and (LG) leave of `f` once `g` is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum FStatus {
    /// `g = 0`: the equations impose nothing.
    Free,
    /// The only solution is `f = 0`.
    Zero,
    /// `f = sum_i t_i b_i` over the listed basis tables.
    Parametric { basis: Vec<RationalTable> },
}

impl FStatus {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            FStatus::Free => None,
            FStatus::Zero => Some(0),
            FStatus::Parametric { basis } => Some(basis.len()),
        }
    }
}

/// Integer-indexed table of rationals, serialized as `{"<index>": "p/q"}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalTable(pub BTreeMap<i64, Rational>);

impl Serialize for RationalTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (i, v) in &self.0 {
            map.serialize_entry(&i.to_string(), &crate::coeff::format_rational(v))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for RationalTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let i = k.parse::<i64>().map_err(D::Error::custom)?;
                let r = crate::coeff::parse_rational(&v).map_err(D::Error::custom)?;
                Ok((i, r))
            })
            .collect::<std::result::Result<BTreeMap<_, _>, _>>()
            .map(RationalTable)
    }
}

/// Linear solve for `f` on the window given `g / c`: unknowns `f(M)`,
/// one equation per admissible (LL) and (LG) pair.
pub fn solve_f(k: i64, window: Window, g: &GSolution) -> FStatus {
    if g.values.is_empty() {
        return FStatus::Free;
    }
    let idx: Vec<i64> = window.iter().collect();
    let col = |m: i64| (m - window.lo) as usize;
    let n = idx.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for &m in &idx {
        for &nn in &idx {
            if !window.contains(m + nn) {
                continue;
            }
            // (LL): g(M+N) ((M-N+k+1) f(M) + (M-N-k-1) f(N))
            let gs = g.get(m + nn);
            if !gs.is_zero() {
                let mut row = vec![Rational::zero(); n];
                row[col(m)] += &gs * int(m - nn + k + 1);
                row[col(nn)] += &gs * int(m - nn - k - 1);
                rows.push(row);
            }
            // (LG): (M-N+1) f(M) g(N) - (M-N-k) f(M+N) g(N)
            let gn = g.get(nn);
            if !gn.is_zero() {
                let mut row = vec![Rational::zero(); n];
                row[col(m)] += &gn * int(m - nn + 1);
                row[col(m + nn)] -= &gn * int(m - nn - k);
                rows.push(row);
            }
        }
    }
    let basis = Echelon::new(&rows, n).nullspace();
    if basis.is_empty() {
        return FStatus::Zero;
    }
    let tables = basis
        .iter()
        .map(|v| {
            RationalTable(
                primitive(v)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (idx[i], x))
                    .collect(),
            )
        })
        .collect();
    FStatus::Parametric { basis: tables }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "match")]
pub enum FamilyMatch {
    Matched { family: FamilyTag },
    Unmatched,
}

impl FamilyMatch {
    pub fn family(&self) -> Option<FamilyTag> {
        match self {
            FamilyMatch::Matched { family } => Some(*family),
            FamilyMatch::Unmatched => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDescriptor {
    pub k: i64,
    pub window: Window,
    pub g_table: IndexTable,
    pub support: SupportSet,
    pub f_status: FStatus,
    #[serde(flatten)]
    pub matched: FamilyMatch,
    pub window_robust: bool,
}

impl SolutionDescriptor {
    pub fn g_solution(&self) -> GSolution {
        GSolution {
            values: self
                .g_table
                .0
                .iter()
                .map(|(m, v)| (*m, v.coeff(1)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn g_is_zero(&self) -> bool {
        self.g_table.0.is_empty()
    }

    /// Operators realizing the descriptor: sample `f` tables when `f` is
    /// free, `f = 0` when forced, one operator per basis vector plus their
    /// sum when parametric (`t` is identified with `c`; every residual is
    /// a sum of `f g` or `g g` products, so nothing cancels across types).
    pub fn operators(&self) -> Vec<OddOperator> {
        let g = self.g_table.0.clone();
        let build = |f: BTreeMap<i64, CoeffPoly>| {
            OddOperator::from_tables(self.k, self.window, f, g.clone()).expect("tables inside window")
        };
        match &self.f_status {
            FStatus::Free => sample_f_tables()
                .into_iter()
                .map(|(_, f)| OddOperator::from_fns(self.k, self.window, f, |_| CoeffPoly::zero()))
                .collect(),
            FStatus::Zero => vec![build(BTreeMap::new())],
            FStatus::Parametric { basis } => {
                let as_f = |t: &RationalTable| -> BTreeMap<i64, CoeffPoly> {
                    t.0.iter().map(|(m, v)| (*m, CoeffPoly::c_times(v.clone()))).collect()
                };
                let mut ops: Vec<OddOperator> = basis.iter().map(|b| build(as_f(b))).collect();
                let mut sum: BTreeMap<i64, CoeffPoly> = BTreeMap::new();
                for b in basis {
                    for (m, v) in as_f(b) {
                        *sum.entry(m).or_default() += &v;
                    }
                }
                if basis.len() > 1 {
                    ops.push(build(sum));
                }
                ops
            }
        }
    }
}

/// Structural match of a descriptor against the family shapes on its
/// window, invariant under `c -> lambda c`.
pub fn match_family(desc: &SolutionDescriptor) -> FamilyMatch {
    let g = desc.g_solution();
    if g.values.is_empty() {
        return match desc.f_status {
            FStatus::Free => FamilyMatch::Matched {
                family: FamilyTag::TrivialG,
            },
            _ => FamilyMatch::Unmatched,
        };
    }
    if desc.f_status != FStatus::Zero {
        return FamilyMatch::Unmatched;
    }
    let order = [
        FamilyTag::DeltaZeroK1,
        FamilyTag::DeltaOneMinusK,
        FamilyTag::TwoPointFinite,
        FamilyTag::RationalInfinite,
    ];
    for tag in order {
        let Ok(spec) = FamilySpec::new(tag, desc.k) else {
            continue;
        };
        if proportional_on(desc.window, &g, |m| spec.g_shape(m)) {
            return FamilyMatch::Matched { family: tag };
        }
    }
    FamilyMatch::Unmatched
}

fn proportional_on(window: Window, g: &GSolution, shape: impl Fn(i64) -> Rational) -> bool {
    let Some((&m0, v0)) = g.values.iter().next() else {
        return false;
    };
    let s0 = shape(m0);
    if s0.is_zero() {
        return false;
    }
    let lambda = v0 / s0;
    window.iter().all(|m| g.get(m) == &lambda * shape(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaInstance {
    pub lemma: String,
    pub indices: Vec<i64>,
    pub status: InstanceStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Whether the symmetry and propagation hypotheses (`g(0) != 0`,
    /// `k != 1`) hold.
    pub hypotheses_hold: bool,
    pub g_structure: LemmaTally,
    pub symmetry: LemmaTally,
    pub propagation: LemmaTally,
    pub failures: Vec<LemmaInstance>,
    #[serde(skip)]
    pub instances: Vec<LemmaInstance>,
}

impl LemmaReport {
    fn record(&mut self, inst: LemmaInstance) {
        let tally = match inst.lemma.as_str() {
            "g-structure" => &mut self.g_structure,
            "symmetry" => &mut self.symmetry,
            _ => &mut self.propagation,
        };
        match inst.status {
            InstanceStatus::Pass => tally.passed += 1,
            InstanceStatus::Fail => tally.failed += 1,
            InstanceStatus::Skipped => tally.skipped += 1,
        }
        if inst.status == InstanceStatus::Fail {
            self.failures.push(inst.clone());
        }
        self.instances.push(inst);
    }

    pub fn find(&self, lemma: &str, indices: &[i64]) -> Option<&LemmaInstance> {
        self.instances
            .iter()
            .find(|i| i.lemma == lemma && i.indices == indices)
    }
}

/// Check each instance of the support lemmas on a window table of `g`.
pub fn lemma_checks(k: i64, window: Window, g: &BTreeMap<i64, CoeffPoly>) -> LemmaReport {
    let get = |m: i64| g.get(&m).cloned().unwrap_or_default();
    let in_j = |m: i64| !get(m).is_zero();
    let g0 = get(0);
    let mut rep = LemmaReport {
        hypotheses_hold: !g0.is_zero() && k != 1,
        ..LemmaReport::default()
    };
    let status = |ok: bool| if ok { InstanceStatus::Pass } else { InstanceStatus::Fail };
    let support: Vec<i64> = window.iter().filter(|m| in_j(*m)).collect();

    // g-structure (i): g(0) = 0, g != 0  =>  supp g = {1-k}
    if g0.is_zero() && !support.is_empty() {
        rep.record(LemmaInstance {
            lemma: "g-structure".into(),
            indices: support.clone(),
            status: status(support == vec![1 - k]),
            detail: "g(0) = 0 forces supp(g) = {1-k}".into(),
        });
    }
    // g-structure (ii): g(0) != 0  =>  g(1-k) = 0, and k odd unless k = 1
    if !g0.is_zero() {
        if k != 1 && window.contains(1 - k) {
            rep.record(LemmaInstance {
                lemma: "g-structure".into(),
                indices: vec![1 - k],
                status: status(!in_j(1 - k)),
                detail: "g(0) != 0 forces g(1-k) = 0".into(),
            });
        }
        if k != 1 {
            rep.record(LemmaInstance {
                lemma: "g-structure".into(),
                indices: vec![k],
                status: status(k % 2 != 0),
                detail: "g(0) != 0 and k != 1 forces k odd".into(),
            });
        }
    }
    if !rep.hypotheses_hold {
        return rep;
    }

    for &m in &support {
        if 2 * m == 1 - k {
            rep.record(LemmaInstance {
                lemma: "symmetry".into(),
                indices: vec![m],
                status: InstanceStatus::Skipped,
                detail: "excluded point m = (1-k)/2".into(),
            });
            continue;
        }
        if !window.contains(-m) {
            rep.record(LemmaInstance {
                lemma: "symmetry".into(),
                indices: vec![m],
                status: InstanceStatus::Skipped,
                detail: "-m outside window".into(),
            });
            continue;
        }
        let lhs = get(-m).scale_int(-m + k - 1);
        let rhs = g0.scale_int(k - 1);
        let ok = in_j(-m) && lhs == rhs;
        rep.record(LemmaInstance {
            lemma: "symmetry".into(),
            indices: vec![m],
            status: status(ok),
            detail: format!("(-m+k-1) g(-m) = {lhs}, (k-1) g(0) = {rhs}"),
        });
    }

    for &n in &support {
        for m in window.iter() {
            if m == n || m == n + k - 1 {
                continue;
            }
            if !window.contains(m + n) {
                rep.record(LemmaInstance {
                    lemma: "propagation".into(),
                    indices: vec![n, m],
                    status: InstanceStatus::Skipped,
                    detail: "m+n outside window".into(),
                });
                continue;
            }
            let (m_in_i, sum_in_i) = (!in_j(m), !in_j(m + n));
            rep.record(LemmaInstance {
                lemma: "propagation".into(),
                indices: vec![n, m],
                status: status(m_in_i == sum_in_i),
                detail: format!("m in I: {m_in_i}, m+n in I: {sum_in_i}"),
            });
        }
    }
    rep
}

/// Post-hoc verification of a descriptor by the independent residual sweep
/// (generator pairs plus all three functional equations).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub operators_swept: usize,
    pub all_pass: bool,
    pub consistent: bool,
}

pub fn verify_descriptor(desc: &SolutionDescriptor) -> Verification {
    let reports: Vec<_> = desc
        .operators()
        .iter()
        .map(|op| sweep(op, "descriptor verification"))
        .collect();
    Verification {
        operators_swept: reports.len(),
        all_pass: reports.iter().all(|r| r.passed()),
        consistent: reports.iter().all(|r| r.consistent()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedSolution {
    #[serde(flatten)]
    pub descriptor: SolutionDescriptor,
    pub lemmas: LemmaReport,
    pub verification: Verification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub k: i64,
    pub window: Window,
    pub robust_margin: i64,
    pub stats: SolverStats,
    pub solutions: Vec<ClassifiedSolution>,
}

impl Classification {
    pub fn robust(&self) -> impl Iterator<Item = &ClassifiedSolution> {
        self.solutions.iter().filter(|s| s.descriptor.window_robust)
    }

    pub fn robust_unmatched(&self) -> impl Iterator<Item = &ClassifiedSolution> {
        self.robust()
            .filter(|s| s.descriptor.matched == FamilyMatch::Unmatched)
    }

    /// Every descriptor verified and every robust one matched.
    pub fn all_pass(&self) -> bool {
        self.solutions
            .iter()
            .all(|s| s.verification.all_pass && s.verification.consistent)
            && self.robust_unmatched().next().is_none()
    }
}

fn restrict_f(status: &FStatus, w: Window) -> Vec<Vec<Rational>> {
    match status {
        FStatus::Parametric { basis } => basis
            .iter()
            .map(|t| w.iter().map(|m| t.0.get(&m).cloned().unwrap_or_else(Rational::zero)).collect())
            .collect(),
        _ => Vec::new(),
    }
}

/// A window solution is robust when it is the restriction of a solution on
/// the window grown by `margin`, with the same `f`-space after restriction.
fn is_robust(
    k: i64,
    window: Window,
    g: &GSolution,
    f: &FStatus,
    outer: &GSolveResult,
) -> bool {
    let target = g.normalized();
    outer.solutions.iter().any(|big| {
        if big.restrict(window).normalized() != target {
            return false;
        }
        let big_f = solve_f(k, outer.window, big);
        match (f, &big_f) {
            (FStatus::Free, FStatus::Free) => true,
            (FStatus::Zero, FStatus::Zero) => true,
            (FStatus::Parametric { basis }, FStatus::Parametric { .. }) => {
                let restricted = restrict_f(&big_f, window);
                Echelon::new(&restricted, window.len()).rank() == basis.len()
            }
            (FStatus::Zero, FStatus::Parametric { .. }) => {
                restrict_f(&big_f, window).iter().all(|v| v.iter().all(Zero::is_zero))
            }
            _ => false,
        }
    })
}

fn describe(k: i64, window: Window, g: &GSolution, f_status: FStatus, robust: bool) -> SolutionDescriptor {
    let table = g.table();
    let mut desc = SolutionDescriptor {
        k,
        window,
        support: SupportSet::of(window, &table),
        g_table: IndexTable(table),
        f_status,
        matched: FamilyMatch::Unmatched,
        window_robust: robust,
    };
    desc.matched = match_family(&desc);
    desc
}

/// Solve, describe, match, lemma-check and re-verify every window
/// solution for one shift.
pub fn classify(k: i64, window: Window) -> Result<Classification> {
    let inner = solve_g(k, window)?;
    let outer = solve_g(k, window.grow(ROBUST_MARGIN))?;
    let solutions: Vec<ClassifiedSolution> = inner
        .solutions
        .par_iter()
        .map(|g| {
            let f_status = solve_f(k, window, g);
            let robust = is_robust(k, window, g, &f_status, &outer);
            let descriptor = describe(k, window, g, f_status, robust);
            let lemmas = lemma_checks(k, window, &descriptor.g_table.0);
            let verification = verify_descriptor(&descriptor);
            ClassifiedSolution {
                descriptor,
                lemmas,
                verification,
            }
        })
        .collect();
    Ok(Classification {
        k,
        window,
        robust_margin: ROBUST_MARGIN,
        stats: inner.stats,
        solutions,
    })
}

/// Descriptor for an arbitrary operator's `g` (used to lemma-check the
/// named families directly).
pub fn support_of(op: &OddOperator) -> BTreeSet<i64> {
    op.g_table().keys().copied().collect()
}
