//! Audits of the two worked examples, under the literal reading of the
//! stated operator and under the shifted table convention.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{BasisVector, Element};
use crate::coeff::{rat, CoeffPoly};
use crate::error::{Error, Result};
use crate::operator::{sweep, OddOperator, ResidualReport};
use crate::window::Window;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reading {
    /// `R(G_n) = h(n) L_{n+k}` with the stated `h` read at the source index.
    Literal,
    /// The stated function stored as the table at the image index.
    Shifted,
}

impl Reading {
    pub fn all() -> [Reading; 2] {
        [Reading::Literal, Reading::Shifted]
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reading::Literal => "literal",
            Reading::Shifted => "shifted",
        })
    }
}

impl FromStr for Reading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Reading::Literal),
            "shifted" => Ok(Reading::Shifted),
            _ => Err(Error::InvalidParameters(format!("unknown reading {s:?}"))),
        }
    }
}

/// Example 1: `k = 1`, `G_0 -> c L_1`. Example 2: `k = 3`,
/// `G_n -> 2c/(n+2) L_{n+3}` for `n != -2`.
pub fn example_operator(which: u8, reading: Reading, window: Window) -> Result<OddOperator> {
    let zero = |_: i64| CoeffPoly::zero();
    match (which, reading) {
        // literal: g(n+1) = c at n = 0, i.e. g = c delta_1
        (1, Reading::Literal) => Ok(OddOperator::from_fns(1, window, zero, |m| delta(m, 1))),
        (1, Reading::Shifted) => Ok(OddOperator::from_fns(1, window, zero, |m| delta(m, 0))),
        // literal: g(n+3) = 2c/(n+2), i.e. g(M) = 2c/(M-1), g(1) = 0
        (2, Reading::Literal) => Ok(OddOperator::from_fns(3, window, zero, |m| pole(m, -1))),
        (2, Reading::Shifted) => Ok(OddOperator::from_fns(3, window, zero, |m| pole(m, 2))),
        _ => Err(Error::InvalidParameters(format!("no example {which}"))),
    }
}

fn delta(m: i64, at: i64) -> CoeffPoly {
    if m == at {
        CoeffPoly::c()
    } else {
        CoeffPoly::zero()
    }
}

/// `2c / (m + shift)`, zero at the pole.
fn pole(m: i64, shift: i64) -> CoeffPoly {
    if m + shift == 0 {
        CoeffPoly::zero()
    } else {
        CoeffPoly::c_times(rat(2, m + shift))
    }
}

/// The pairs the worked example checks by hand.
pub fn hand_checked_pairs(which: u8) -> Vec<(BasisVector, BasisVector)> {
    match which {
        1 => vec![
            (BasisVector::g(0), BasisVector::g(0)),
            (BasisVector::g(0), BasisVector::l(0)),
        ],
        2 => vec![(BasisVector::g(1), BasisVector::g(2))],
        _ => vec![],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub x: BasisVector,
    pub y: BasisVector,
    pub admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Element>,
}

impl PairCheck {
    pub fn is_zero(&self) -> bool {
        self.residual.as_ref().is_some_and(Element::is_zero)
    }
}

pub fn check_pair(op: &OddOperator, x: BasisVector, y: BasisVector) -> PairCheck {
    match op.rb_sides(x, y) {
        Ok((lhs, rhs)) => PairCheck {
            x,
            y,
            admissible: true,
            residual: Some(&lhs - &rhs),
            lhs: Some(lhs),
            rhs: Some(rhs),
        },
        Err(_) => PairCheck {
            x,
            y,
            admissible: false,
            lhs: None,
            rhs: None,
            residual: None,
        },
    }
}

/// The two sides claimed for Example 2 at `(G_1, G_2)`, compared with the
/// computed ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimedChain {
    pub claimed_lhs: Element,
    pub claimed_rhs: Element,
    pub claimed_sides_equal: bool,
    pub computed_lhs: Option<Element>,
    pub computed_rhs: Option<Element>,
    pub lhs_matches: bool,
    pub rhs_matches: bool,
}

fn claimed_chain(op: &OddOperator) -> ClaimedChain {
    let l9 = BasisVector::l(9);
    let claimed_lhs = Element::term(l9, CoeffPoly::monomial(rat(-1, 3), 2));
    let claimed_rhs = Element::term(l9, CoeffPoly::monomial(rat(-5, 24), 2));
    let check = check_pair(op, BasisVector::g(1), BasisVector::g(2));
    ClaimedChain {
        claimed_sides_equal: claimed_lhs == claimed_rhs,
        lhs_matches: check.lhs.as_ref() == Some(&claimed_lhs),
        rhs_matches: check.rhs.as_ref() == Some(&claimed_rhs),
        claimed_lhs,
        claimed_rhs,
        computed_lhs: check.lhs,
        computed_rhs: check.rhs,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExampleAudit {
    pub example: u8,
    pub reading: Reading,
    pub k: i64,
    pub window: Window,
    pub description: String,
    pub hand_checked: Vec<PairCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_chain: Option<ClaimedChain>,
    pub sweep: ResidualReport,
}

impl ExampleAudit {
    pub fn hand_checks_pass(&self) -> bool {
        self.hand_checked.iter().all(PairCheck::is_zero)
    }

    pub fn passed(&self) -> bool {
        self.sweep.passed()
    }
}

pub fn audit_example(which: u8, reading: Reading, window: Window) -> Result<ExampleAudit> {
    let op = example_operator(which, reading, window)?;
    let description = match (which, reading) {
        (1, Reading::Literal) => "k = 1, G_0 -> c L_1, all else 0 (g = c delta_1)",
        (1, Reading::Shifted) => "k = 1, g = c delta_0",
        (2, Reading::Literal) => "k = 3, G_n -> 2c/(n+2) L_{n+3} (g(M) = 2c/(M-1), g(1) = 0)",
        _ => "k = 3, g(M) = 2c/(M+2), g(-2) = 0",
    };
    let hand_checked = hand_checked_pairs(which)
        .into_iter()
        .map(|(x, y)| check_pair(&op, x, y))
        .collect();
    Ok(ExampleAudit {
        example: which,
        reading,
        k: op.k(),
        window,
        description: description.to_string(),
        hand_checked,
        claimed_chain: (which == 2).then(|| claimed_chain(&op)),
        sweep: sweep(&op, description),
    })
}
