//! Command-line front end: argument parsing, dispatch to the library, and
//! deterministic JSON or text reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{Element, Parity};
use crate::audit::{audit_example, ExampleAudit, Reading};
use crate::classification::{
    build_family, classify, sample_f_tables, build_family_with_f, Classification, FStatus, FamilySpec,
    FamilyTag,
};
use crate::coeff::{format_rational, parse_rational, CoeffPoly, Rational};
use crate::decomposition::{
    componentwise_claim_search, enumerate_candidates, even_projection_identity, first_rb_failure,
    projected_rb_residuals, split_parity, Candidate, ClaimReport, GeneralOperator,
};
use crate::derivations::{solve_derivation_range, DerivationSpace};
use crate::error::{Error, Result};
use crate::io::OperatorFile;
use crate::operator::{invertibility_report, sweep, Counterexample, OddOperator, ResidualReport, ResidualValue};
use crate::structures::structures_report;
use crate::window::{parse_range, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReadingArg {
    Literal,
    Shifted,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    All,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "witt-rb", version, about = "Exact checks for odd Rota-Baxter operators on a Witt-type Lie superalgebra")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also report failing residuals evaluated at c = p/q.
    #[arg(long, global = true, value_parser = parse_c, allow_hyphen_values = true)]
    pub c_eval: Option<Rational>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Sweep one named family for one shift or a range of shifts.
    VerifyFamily {
        #[arg(long, value_parser = parse_family)]
        family: FamilyTag,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
        #[arg(long, value_parser = parse_k_range, allow_hyphen_values = true)]
        k_range: Option<(i64, i64)>,
        #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
        window: Window,
    },
    /// Sweep an operator table read from a JSON file.
    VerifyFile {
        #[arg(long)]
        file: PathBuf,
    },
    /// Sweep every named family valid for each shift in a range.
    Sweep {
        #[arg(long, value_parser = parse_k_range, default_value = "-5:5", allow_hyphen_values = true)]
        k_range: (i64, i64),
        #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
        window: Window,
    },
    /// Solve for all operators on a window and match them to the families.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
        #[arg(long, value_parser = parse_k_range, allow_hyphen_values = true)]
        k_range: Option<(i64, i64)>,
        #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
        window: Window,
    },
    /// Audit the two worked examples.
    Examples {
        #[arg(long, value_enum, default_value_t = WhichArg::All)]
        which: WhichArg,
        #[arg(long, value_enum, default_value_t = ReadingArg::Both)]
        reading: ReadingArg,
        #[arg(long, default_value = "-12:12", allow_hyphen_values = true)]
        window: Window,
    },
    /// Parity decomposition: split one operator from a file, or search a
    /// small window for operators whose parts are not Rota-Baxter.
    Decompose {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value = "-2:2", allow_hyphen_values = true)]
        window: Window,
    },
    /// Induced products: sum rule, chain identity, dendriform axioms and
    /// closed-form tables.
    Structures {
        #[arg(long, value_parser = parse_family)]
        family: Option<FamilyTag>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value = "-6:6", allow_hyphen_values = true)]
        window: Window,
        /// Also evaluate the chain identity with the unshifted sign.
        #[arg(long)]
        naive_sign: bool,
    },
    /// Solve for homogeneous derivations degree by degree.
    Derivations {
        #[arg(long, value_parser = parse_k_range, default_value = "-3:3", allow_hyphen_values = true)]
        degree_range: (i64, i64),
        #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
        window: Window,
        /// Solve for parity-reversing derivations instead.
        #[arg(long)]
        odd: bool,
    },
    /// Support sets, solution inventory and derivation dimensions per shift.
    FigureData {
        #[arg(long, value_parser = parse_k_range, default_value = "-5:5", allow_hyphen_values = true)]
        k_range: (i64, i64),
        #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
        window: Window,
    },
    /// Recompute every embedded counterexample in a report file.
    Replay {
        #[arg(long)]
        file: PathBuf,
    },
}

fn parse_c(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<FamilyTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_k_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (lo, hi) = parse_range(s).map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

/// Result of one subcommand: the JSON payload, a text rendering, and
/// whether every verdict passed.
struct Outcome {
    json: Value,
    text: String,
    pass: bool,
}

/// Run a parsed configuration, writing the report to `out`. Returns the
/// process exit code: 0 when every verdict passes, 1 on any residual or
/// claim failure, 2 on usage or load errors.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> i32 {
    let result = dispatch(config);
    let (body, code) = match result {
        Ok(o) => {
            let code = if o.pass { 0 } else { 1 };
            match config.format {
                Format::Json => {
                    let mut v = o.json;
                    v["pass"] = json!(o.pass);
                    (pretty(&v), code)
                }
                Format::Text => (o.text, code),
            }
        }
        Err(e) => match config.format {
            Format::Json => (pretty(&json!({ "error": e.to_string() })), 2),
            Format::Text => (format!("error: {e}\n"), 2),
        },
    };
    if out.write_all(body.as_bytes()).is_err() {
        return 2;
    }
    code
}

/// Parse `args` (including the program name) and run. Usage errors print
/// to stderr and return 2; `--help` and `--version` return 0.
pub fn run_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config, out),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn check_window(w: Window) -> Result<()> {
    if w.contains_zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("window {w} must contain 0")))
    }
}

fn k_values(k: Option<i64>, k_range: Option<(i64, i64)>) -> Result<Vec<i64>> {
    match (k, k_range) {
        (_, Some((lo, hi))) => Ok((lo..=hi).collect()),
        (Some(k), None) => Ok(vec![k]),
        (None, None) => Err(Error::InvalidParameters("one of --k or --k-range is required".into())),
    }
}

fn dispatch(config: &RunConfig) -> Result<Outcome> {
    let c = config.c_eval.as_ref();
    match &config.command {
        Command::VerifyFamily { family, k, k_range, window } => {
            check_window(*window)?;
            verify_family(*family, &k_values(*k, *k_range)?, *window, c)
        }
        Command::VerifyFile { file } => {
            let op = OperatorFile::load(file)?;
            let rep = sweep(&op, &format!("operator file {}", file.display()));
            let entry = sweep_entry(&op, &rep, c);
            Ok(Outcome {
                text: sweep_line(&rep, c),
                pass: rep.passed() && rep.consistent(),
                json: json!({ "command": "verify-file", "reports": [entry] }),
            })
        }
        Command::Sweep { k_range, window } => {
            check_window(*window)?;
            sweep_all(*k_range, *window, c)
        }
        Command::Classify { k, k_range, window } => {
            check_window(*window)?;
            run_classify(&k_values(*k, *k_range)?, *window)
        }
        Command::Examples { which, reading, window } => {
            check_window(*window)?;
            run_examples(*which, *reading, *window, c)
        }
        Command::Decompose { file, window } => match file {
            Some(path) => decompose_file(path),
            None => decompose_search(*window),
        },
        Command::Structures { family, k, window, naive_sign } => {
            check_window(*window)?;
            run_structures(*family, *k, *window, *naive_sign)
        }
        Command::Derivations { degree_range, window, odd } => {
            check_window(*window)?;
            run_derivations(*degree_range, *window, *odd)
        }
        Command::FigureData { k_range, window } => {
            check_window(*window)?;
            figure_data(*k_range, *window)
        }
        Command::Replay { file } => replay(file),
    }
}

fn evaluate(e: &Element, c: &Rational) -> Element {
    e.terms()
        .map(|(b, p)| (*b, CoeffPoly::constant(p.evaluate_at(c))))
        .collect()
}

fn evaluate_residual(r: &ResidualValue, c: &Rational) -> String {
    match r {
        ResidualValue::Element(e) => evaluate(e, c).to_string(),
        ResidualValue::Scalar(p) => format_rational(&p.evaluate_at(c)),
    }
}

fn sweep_entry(op: &OddOperator, rep: &ResidualReport, c: Option<&Rational>) -> Value {
    let mut v = to_json(rep);
    v["invertibility"] = to_json(&invertibility_report(op));
    if let (Some(c), Some(first)) = (c, rep.first_failure()) {
        v["c_eval"] = json!({
            "c": format_rational(c),
            "first_failure": evaluate_residual(&first.residual, c),
        });
    }
    v
}

fn sweep_line(rep: &ResidualReport, c: Option<&Rational>) -> String {
    let mut s = format!(
        "{} | k={} window={} checked={} skipped={} cross-checked={}",
        rep.description, rep.k, rep.window, rep.checked_count, rep.skipped_count, rep.cross_checked
    );
    match rep.first_failure() {
        None => s.push_str(" PASS"),
        Some(f) => {
            s.push_str(&format!(" FAIL at {}: {}", f.tuple, f.residual));
            if let Some(c) = c {
                s.push_str(&format!(" (= {} at c = {})", evaluate_residual(&f.residual, c), format_rational(c)));
            }
        }
    }
    if !rep.consistent() {
        s.push_str(&format!(" CROSS-MISMATCH x{}", rep.cross_mismatches.len()));
    }
    s.push('\n');
    s
}

fn family_operator(tag: FamilyTag, k: i64, window: Window) -> Result<(OddOperator, String)> {
    let spec = FamilySpec::new(tag, k)?;
    let op = build_family(&spec, window)?;
    let mut desc = format!("{} k={k}", tag.cli_name());
    if tag == FamilyTag::TrivialG {
        desc.push_str(&format!(" with {}", sample_f_tables()[0].0));
    }
    Ok((op, desc))
}

fn verify_family(tag: FamilyTag, ks: &[i64], window: Window, c: Option<&Rational>) -> Result<Outcome> {
    let ops: Vec<(OddOperator, String)> =
        ks.iter().map(|&k| family_operator(tag, k, window)).collect::<Result<_>>()?;
    let reports: Vec<ResidualReport> = ops.par_iter().map(|(op, d)| sweep(op, d)).collect();
    let pass = reports.iter().all(|r| r.passed() && r.consistent());
    Ok(Outcome {
        json: json!({
            "command": "verify-family",
            "family": tag,
            "reports": ops.iter().zip(&reports).map(|((op, _), r)| sweep_entry(op, r, c)).collect::<Vec<_>>(),
        }),
        text: reports.iter().map(|r| sweep_line(r, c)).collect(),
        pass,
    })
}

/// Every valid (family, k) operator; the `g = 0` family once per sample `f`.
fn family_operators(k: i64, window: Window) -> Vec<(OddOperator, String)> {
    let mut out = Vec::new();
    for tag in FamilyTag::ALL {
        let Ok(spec) = FamilySpec::new(tag, k) else { continue };
        if tag == FamilyTag::TrivialG {
            for (name, f) in sample_f_tables() {
                let op = build_family_with_f(&spec, window, f).expect("valid spec");
                out.push((op, format!("{} k={k} with {name}", tag.cli_name())));
            }
        } else {
            let op = build_family(&spec, window).expect("valid spec");
            out.push((op, format!("{} k={k}", tag.cli_name())));
        }
    }
    out
}

fn sweep_all((lo, hi): (i64, i64), window: Window, c: Option<&Rational>) -> Result<Outcome> {
    let ops: Vec<(OddOperator, String)> = (lo..=hi).flat_map(|k| family_operators(k, window)).collect();
    let reports: Vec<ResidualReport> = ops.par_iter().map(|(op, d)| sweep(op, d)).collect();
    let pass = reports.iter().all(|r| r.passed() && r.consistent());
    Ok(Outcome {
        json: json!({
            "command": "sweep",
            "reports": ops.iter().zip(&reports).map(|((op, _), r)| sweep_entry(op, r, c)).collect::<Vec<_>>(),
        }),
        text: reports.iter().map(|r| sweep_line(r, c)).collect(),
        pass,
    })
}

fn classify_all(ks: &[i64], window: Window) -> Result<Vec<Classification>> {
    ks.par_iter().map(|&k| classify(k, window)).collect()
}

fn run_classify(ks: &[i64], window: Window) -> Result<Outcome> {
    let all = classify_all(ks, window)?;
    let mut text = String::new();
    for cl in &all {
        text.push_str(&format!("k={} window={} solutions={}\n", cl.k, cl.window, cl.solutions.len()));
        for s in &cl.solutions {
            let d = &s.descriptor;
            let fam = d.matched.family().map_or("Unmatched".to_string(), |f| f.to_string());
            text.push_str(&format!(
                "  support={:?} f={} {} robust={} verified={} lemma-failures={}\n",
                d.support.support,
                f_label(&d.f_status),
                fam,
                d.window_robust,
                s.verification.all_pass,
                s.lemmas.failures.len()
            ));
        }
    }
    Ok(Outcome {
        pass: all.iter().all(Classification::all_pass),
        json: json!({ "command": "classify", "classifications": to_json(&all) }),
        text,
    })
}

fn f_label(f: &FStatus) -> String {
    match f {
        FStatus::Free => "free".into(),
        FStatus::Zero => "zero".into(),
        FStatus::Parametric { basis } => format!("parametric(dim {})", basis.len()),
    }
}

fn run_examples(which: WhichArg, reading: ReadingArg, window: Window, c: Option<&Rational>) -> Result<Outcome> {
    let examples: Vec<u8> = match which {
        WhichArg::One => vec![1],
        WhichArg::Two => vec![2],
        WhichArg::All => vec![1, 2],
    };
    let readings: Vec<Reading> = match reading {
        ReadingArg::Literal => vec![Reading::Literal],
        ReadingArg::Shifted => vec![Reading::Shifted],
        ReadingArg::Both => Reading::all().to_vec(),
    };
    let mut audits: Vec<ExampleAudit> = Vec::new();
    for &e in &examples {
        for &r in &readings {
            audits.push(audit_example(e, r, window)?);
        }
    }
    let mut text = String::new();
    let mut entries = Vec::new();
    for a in &audits {
        text.push_str(&format!("example {} ({}): {}\n", a.example, a.reading, a.description));
        for p in &a.hand_checked {
            match &p.residual {
                Some(r) => text.push_str(&format!(
                    "  hand-checked ({}, {}): lhs {} rhs {} residual {}\n",
                    p.x,
                    p.y,
                    p.lhs.as_ref().expect("admissible"),
                    p.rhs.as_ref().expect("admissible"),
                    r
                )),
                None => text.push_str(&format!("  hand-checked ({}, {}): inadmissible on {}\n", p.x, p.y, a.window)),
            }
        }
        if let Some(ch) = &a.claimed_chain {
            text.push_str(&format!(
                "  claimed sides {} vs {} (equal: {}); computed lhs matches: {}, rhs matches: {}\n",
                ch.claimed_lhs, ch.claimed_rhs, ch.claimed_sides_equal, ch.lhs_matches, ch.rhs_matches
            ));
        }
        text.push_str("  ");
        text.push_str(&sweep_line(&a.sweep, c));
        let op = OperatorFile::to_operator(&a.sweep.operator)?;
        let mut v = to_json(a);
        v["sweep"] = sweep_entry(&op, &a.sweep, c);
        entries.push(v);
    }
    Ok(Outcome {
        pass: audits.iter().all(|a| a.passed() && a.hand_checks_pass()),
        json: json!({ "command": "examples", "audits": entries }),
        text,
    })
}

fn decompose_file(path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let t: GeneralOperator = serde_json::from_str(&text).map_err(|e| Error::Load(e.to_string()))?;
    let (even, odd) = split_parity(&t);
    let w = t.window();
    let basis = crate::algebra::BasisVector::all_in(w.lo, w.hi);
    let mut admissible = 0;
    let mut projection_ok = true;
    for &x in &basis {
        for &y in &basis {
            let Ok(full) = t.rb_residual(x, y) else { continue };
            admissible += 1;
            let (p0, p1) = projected_rb_residuals(&t, x, y)?;
            let same = even_projection_identity(&t, x, y)?;
            projection_ok &= &p0 + &p1 == full && same == p0;
        }
    }
    let full = first_rb_failure(&t);
    let report = componentwise_claim_search(
        w,
        &[Candidate {
            label: path.display().to_string(),
            operator: t.clone(),
        }],
    );
    let summary = format!(
        "operator {}: full identity {}, projections consistent on {} pairs: {}, parts: {}\n",
        path.display(),
        if full.is_none() { "holds" } else { "fails" },
        admissible,
        projection_ok,
        if report.rota_baxter == 0 {
            "not judged (operator is not Rota-Baxter)".to_string()
        } else if report.claim_holds {
            "both Rota-Baxter".to_string()
        } else {
            "a part fails".to_string()
        }
    );
    Ok(Outcome {
        pass: projection_ok && report.claim_holds,
        json: json!({
            "command": "decompose",
            "operator": to_json(&t),
            "even_part": to_json(&even),
            "odd_part": to_json(&odd),
            "full_identity_failure": to_json(&full),
            "admissible_pairs": admissible,
            "projections_consistent": projection_ok,
            "claim": to_json(&report),
        }),
        text: summary,
    })
}

fn family_candidates(window: Window) -> Vec<Candidate> {
    let mut out = Vec::new();
    for k in -1..=1 {
        for (op, desc) in family_operators(k, window.shift(k)) {
            out.push(Candidate {
                label: desc,
                operator: GeneralOperator::from_odd(&op),
            });
        }
    }
    out
}

fn decompose_search(window: Window) -> Result<Outcome> {
    if window.len() > 5 {
        return Err(Error::InvalidParameters(format!(
            "decomposition search needs a window of at most 5 degrees, got {window}"
        )));
    }
    let mut candidates = family_candidates(window);
    candidates.extend(enumerate_candidates(window));
    let report: ClaimReport = componentwise_claim_search(window, &candidates);
    let text = format!(
        "window {}: {} candidates, {} Rota-Baxter, {} with both parts nonzero, claim {}\n",
        report.window,
        report.candidates,
        report.rota_baxter,
        report.mixed,
        if report.claim_holds { "holds on every candidate" } else { "fails" }
    );
    Ok(Outcome {
        pass: report.claim_holds,
        json: json!({ "command": "decompose", "search": to_json(&report) }),
        text,
    })
}

fn run_structures(family: Option<FamilyTag>, k: i64, window: Window, naive: bool) -> Result<Outcome> {
    let op_window = window.grow((window.hi - window.lo) + 2 * k.abs());
    let ops: Vec<(OddOperator, String)> = match family {
        Some(tag) => vec![family_operator(tag, k, op_window)?],
        None => family_operators(k, op_window),
    };
    let reports: Vec<_> = ops
        .iter()
        .map(|(op, d)| (op, structures_report(op, window, d, naive)))
        .collect();
    let mut text = String::new();
    let mut pass = true;
    let mut entries = Vec::new();
    for (op, r) in &reports {
        let dendri: Vec<bool> = r.dendriform_axioms.iter().map(|a| a.passed()).collect();
        let forms_ok = r.closed_form.iter().filter(|f| f.agrees()).count();
        let forms_applicable = r
            .closed_form
            .iter()
            .filter(|f| f.outcome != crate::structures::FormulaOutcome::NotApplicable)
            .count();
        pass &= r.identities_pass() && dendri.iter().all(|&b| b) && r.closed_form.iter().all(|f| {
            f.agrees() || f.outcome == crate::structures::FormulaOutcome::NotApplicable
        });
        text.push_str(&format!(
            "{}: sum rule {}, chain identity {}, dendriform axioms {:?}, closed forms agreeing {}/{}\n",
            r.description,
            verdict_word(r.sum_rule.passed()),
            verdict_word(r.chain_identity.passed()),
            dendri.iter().map(|&b| verdict_word(b)).collect::<Vec<_>>(),
            forms_ok,
            forms_applicable
        ));
        let mut v = to_json(r);
        v["operator"] = to_json(&op.to_file());
        entries.push(v);
    }
    Ok(Outcome {
        pass,
        json: json!({ "command": "structures", "reports": entries }),
        text,
    })
}

fn verdict_word(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn run_derivations((lo, hi): (i64, i64), window: Window, odd: bool) -> Result<Outcome> {
    let parity = if odd { Parity::Odd } else { Parity::Even };
    let spaces: Vec<DerivationSpace> = solve_derivation_range(lo, hi, window, parity);
    let text = spaces
        .iter()
        .map(|s| {
            format!(
                "degree {} ({:?}): dimension {}, inner {}, beta zero {}\n",
                s.degree,
                s.parity,
                s.dimension,
                s.inner_match.iter().filter(|m| m.is_match()).count(),
                s.beta_vanishes
            )
        })
        .collect();
    Ok(Outcome {
        pass: spaces.iter().all(|s| s.all_inner() && s.beta_vanishes),
        json: json!({ "command": "derivations", "spaces": to_json(&spaces) }),
        text,
    })
}

fn figure_data((lo, hi): (i64, i64), window: Window) -> Result<Outcome> {
    let ks: Vec<i64> = (lo..=hi).collect();
    let all = classify_all(&ks, window)?;
    let derivs = solve_derivation_range(-3, 3, window, Parity::Even);
    let mut text = String::new();
    let per_k: Vec<Value> = all
        .iter()
        .map(|cl| {
            let supports: Vec<Value> = cl
                .solutions
                .iter()
                .filter_map(|s| {
                    let d = &s.descriptor;
                    let fam = d.matched.family()?;
                    (fam != FamilyTag::TrivialG && d.window_robust)
                        .then(|| json!({ "family": fam, "support": d.support.support }))
                })
                .collect();
            let inventory: Vec<Value> = cl
                .solutions
                .iter()
                .map(|s| {
                    let d = &s.descriptor;
                    json!({
                        "family": d.matched.family(),
                        "support": d.support.support,
                        "g0_nonzero": d.support.support.contains(&0),
                        "f_status": f_label(&d.f_status),
                        "window_robust": d.window_robust,
                    })
                })
                .collect();
            let g0_nonzero = cl.solutions.iter().filter(|s| s.descriptor.support.support.contains(&0)).count();
            text.push_str(&format!(
                "k={}: {} solutions, {} with g(0) != 0, {} matched supports\n",
                cl.k,
                cl.solutions.len(),
                g0_nonzero,
                supports.len()
            ));
            json!({
                "k": cl.k,
                "supports": supports,
                "inventory": inventory,
                "g0_nonzero_count": g0_nonzero,
                "robust_unmatched_count": cl.robust_unmatched().count(),
            })
        })
        .collect();
    let panel_b: Vec<Value> = derivs
        .iter()
        .map(|s| json!({ "degree": s.degree, "dimension": s.dimension, "all_inner": s.all_inner() }))
        .collect();
    for s in &derivs {
        text.push_str(&format!("derivations degree {}: dimension {}\n", s.degree, s.dimension));
    }
    Ok(Outcome {
        pass: true,
        json: json!({
            "command": "figure-data",
            "window": window,
            "per_k": per_k,
            "derivation_dimensions": panel_b,
        }),
        text,
    })
}

/// Objects carrying an odd-operator counterexample or a decomposition
/// counterexample, in document order.
fn collect_counterexamples<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v {
        Value::Object(map) => {
            let odd = map.contains_key("operator") && map.contains_key("tuple") && map.contains_key("residual");
            let general = map.contains_key("operator") && map.contains_key("component") && map.contains_key("failure");
            if odd || general {
                out.push(v);
                return;
            }
            for child in map.values() {
                collect_counterexamples(child, out);
            }
        }
        Value::Array(items) => {
            for child in items {
                collect_counterexamples(child, out);
            }
        }
        _ => {}
    }
}

fn replay_one(v: &Value) -> Result<Value> {
    let bad = |e: serde_json::Error| Error::Load(e.to_string());
    if v.get("tuple").is_some() {
        let cex: Counterexample = serde_json::from_value(v.clone()).map_err(bad)?;
        let again = cex.replay()?;
        return Ok(json!({
            "tuple": cex.tuple,
            "recorded": cex.residual,
            "replayed": again,
            "matches": again == cex.residual,
        }));
    }
    let op: GeneralOperator = serde_json::from_value(v["operator"].clone()).map_err(bad)?;
    let failure: crate::decomposition::PairFailure = serde_json::from_value(v["failure"].clone()).map_err(bad)?;
    let (even, odd) = split_parity(&op);
    let part = match v["component"].as_str() {
        Some("even") => even,
        Some("odd") => odd,
        other => return Err(Error::Load(format!("unknown component {other:?}"))),
    };
    let again = part.rb_residual(failure.x, failure.y)?;
    Ok(json!({
        "pair": [failure.x, failure.y],
        "recorded": failure.residual,
        "replayed": again,
        "matches": again == failure.residual,
    }))
}

fn replay(path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Load(e.to_string()))?;
    let mut found = Vec::new();
    collect_counterexamples(&doc, &mut found);
    if found.is_empty() {
        return Err(Error::Load(format!("{}: no counterexample found", path.display())));
    }
    let results: Vec<Value> = found.into_iter().map(replay_one).collect::<Result<_>>()?;
    let matched = results.iter().filter(|r| r["matches"] == json!(true)).count();
    Ok(Outcome {
        pass: matched == results.len(),
        text: format!("replayed {} counterexamples, {} reproduce exactly\n", results.len(), matched),
        json: json!({ "command": "replay", "replays": results }),
    })
}
