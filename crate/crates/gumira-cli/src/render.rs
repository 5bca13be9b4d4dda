//! Pure renderers: every subcommand produces its complete output as a
//! string, so replay can re-run a command and compare bytes.

use crate::{
    BranchArg, Cli, ClassifyArgs, Command, DirectionArg, FamilyArg, LevelsArgs, LocalArgs,
    OrbitArgs, PeriodsArgs, ReplayArgs, RotationArgs, SearchInvariantArgs,
};
use clap::Parser;
use gumira::classify::{adherence_intervals, classify_behavior, Behavior, ClassifyConfig};
use gumira::dynamics::{fold_orbit, recurrence_sequence, Direction, Family, MapSpec, PlanePoint};
use gumira::error::Error;
use gumira::geometry::{critical_values, level_descriptor, Branch, IntervalSet};
use gumira::invariants::{eval_integral, IntegralSpec};
use gumira::local::local_report;
use gumira::params::{ParamPair, Regime};
use gumira::periods::{
    admissible_periods, find_level_with_rho, min_realized_tail, two_periodic_locus,
};
use gumira::rotation::{estimate_winding, flow_rotation, limit_rho, RhoLimit, RhoMethod};
use gumira::search::{search_invariant, verify_invariant, BetaCycle, ANSATZ_MONOMIALS};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::process::ExitCode;

pub struct Rendered {
    pub content: String,
    /// Set when the output is complete but the run hit a reportable
    /// condition (divergence trailer); maps to exit code 1.
    pub runtime_error: Option<String>,
}

impl Rendered {
    fn ok(content: String) -> Self {
        Rendered {
            content,
            runtime_error: None,
        }
    }
}

pub fn render(cmd: &Command) -> gumira::Result<Rendered> {
    match cmd {
        Command::Orbit(args) => orbit(args),
        Command::Levels(args) => levels(args),
        Command::Rotation(args) => rotation(args),
        Command::Classify(args) => classify(args),
        Command::Periods(args) => periods(args),
        Command::SearchInvariant(args) => search(args),
        Command::Local(args) => local(args),
        Command::Replay(_) => unreachable!("replay is handled by the caller"),
    }
}

// --- command-line embedding -------------------------------------------------

fn canonical_args(cmd: &Command) -> Vec<String> {
    fn s<T: std::fmt::Display>(v: T) -> String {
        format!("{v}")
    }
    match cmd {
        Command::Orbit(a) => vec![
            "orbit".into(),
            "--family".into(),
            family_name(a.family).into(),
            "-a".into(),
            s(a.a),
            "-b".into(),
            s(a.b),
            "--seed".into(),
            a.seed.clone(),
            "-n".into(),
            s(a.n),
            "--direction".into(),
            match a.direction {
                DirectionArg::Forward => "forward".into(),
                DirectionArg::Backward => "backward".into(),
            },
        ],
        Command::Levels(a) => {
            let mut v = vec!["levels".into(), "-a".into(), s(a.a), "-b".into(), s(a.b)];
            for h in &a.levels {
                v.push("--h".into());
                v.push(s(h));
            }
            v
        }
        Command::Rotation(a) => vec![
            "rotation".into(),
            "-a".into(),
            s(a.a),
            "-b".into(),
            s(a.b),
            "--h-grid".into(),
            a.h_grid.clone(),
            "--branch".into(),
            branch_name(a.branch).into(),
            "--n-iter".into(),
            s(a.n_iter),
        ],
        Command::Classify(a) => {
            let mut v = vec![
                "classify".into(),
                "--family".into(),
                family_name(a.family).into(),
                "-a".into(),
                s(a.a),
                "-b".into(),
                s(a.b),
                "--seed".into(),
                a.seed.clone(),
                "--n-terms".into(),
                s(a.n_terms),
                "--gap-factor".into(),
                s(a.gap_factor),
                "--min-cluster".into(),
                s(a.min_cluster),
            ];
            if a.odd_even {
                v.push("--odd-even".into());
            }
            v
        }
        Command::Periods(a) => {
            let mut v = vec![
                "periods".into(),
                "-a".into(),
                s(a.a),
                "-b".into(),
                s(a.b),
                "--q-max".into(),
                s(a.q_max),
            ];
            if let Some(t) = &a.target {
                v.push("--target".into());
                v.push(t.clone());
            }
            if let Some(br) = &a.bracket {
                v.push("--bracket".into());
                v.push(br.clone());
            }
            v.push("--branch".into());
            v.push(branch_name(a.branch).into());
            v
        }
        Command::SearchInvariant(a) => vec![
            "search-invariant".into(),
            "--betas".into(),
            a.betas.clone(),
            "--verify-steps".into(),
            s(a.verify_steps),
        ],
        Command::Local(a) => vec!["local".into(), "-a".into(), s(a.a), "-b".into(), s(a.b)],
        Command::Replay(_) => unreachable!(),
    }
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::G => "G",
        FamilyArg::F => "F",
    }
}

fn branch_name(b: BranchArg) -> &'static str {
    match b {
        BranchArg::Main => "main",
        BranchArg::Positive => "positive",
        BranchArg::Negative => "negative",
    }
}

fn branch_of(b: BranchArg) -> Branch {
    match b {
        BranchArg::Main => Branch::Main,
        BranchArg::Positive => Branch::PositiveOval,
        BranchArg::Negative => Branch::NegativeOval,
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SubSixteenth => "SubSixteenth",
        Regime::Boundary16 => "Boundary16",
        Regime::MidRange => "MidRange",
        Regime::Quarter => "Quarter",
        Regime::SuperQuarter => "SuperQuarter",
    }
}

fn parse_pair(text: &str, what: &'static str) -> gumira::Result<(f64, f64)> {
    let mut it = text.split(',');
    let err = || Error::DomainError { context: what };
    let x = it.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
    let y = it.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
    if it.next().is_some() {
        return Err(err());
    }
    Ok((x, y))
}

fn intervals_json(set: &IntervalSet) -> Value {
    Value::Array(
        set.as_slice()
            .iter()
            .map(|&(lo, hi)| json!([lo, hi]))
            .collect(),
    )
}

fn json_output(mut body: serde_json::Map<String, Value>, cmd_args: Vec<String>) -> String {
    body.insert("command".into(), json!(cmd_args));
    let mut out = serde_json::to_string_pretty(&Value::Object(body)).expect("valid json");
    out.push('\n');
    out
}

// --- orbit -------------------------------------------------------------------

fn orbit(args: &OrbitArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let (x, y) = parse_pair(&args.seed, "seed must be `x,y`")?;
    let (family, integral, column) = match args.family {
        FamilyArg::G => (Family::G, IntegralSpec::v(pp), "V"),
        FamilyArg::F => (Family::F, IntegralSpec::w(args.a), "W"),
    };
    let mut spec = MapSpec::composed(family, pp);
    if args.direction == DirectionArg::Backward {
        spec = spec.reversed();
    }
    let sign: i64 = match args.direction {
        DirectionArg::Forward => 1,
        DirectionArg::Backward => -1,
    };

    let mut content = format!(
        "# gumira-args: {}\nn,x,y,{column}\n",
        canonical_args(&Command::Orbit(args.clone())).join(" ")
    );
    let diverged = fold_orbit(&spec, PlanePoint::new(x, y), args.n, |step, p| {
        let v = eval_integral(&integral, p);
        content.push_str(&format!("{},{},{},{}\n", sign * step as i64, p.x, p.y, v));
    });
    let runtime_error = diverged.map(|step| {
        content.push_str(&format!("# diverged-orbit at step {step}\n"));
        format!("error[diverged-orbit]: orbit diverged at step {step}; partial orbit written")
    });
    Ok(Rendered {
        content,
        runtime_error,
    })
}

// --- levels ------------------------------------------------------------------

fn levels(args: &LevelsArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let cv = critical_values(&pp);
    let level_entries: Vec<Value> = args
        .levels
        .iter()
        .map(|&h| {
            let d = level_descriptor(&pp, h);
            json!({
                "h": h,
                "topology": d.topology.name(),
                "projection_v_ba": intervals_json(&d.projection_v_ba),
                "projection_v_ab": intervals_json(&d.projection_v_ab),
            })
        })
        .collect();
    let mut body = serde_json::Map::new();
    body.insert("a".into(), json!(args.a));
    body.insert("b".into(), json!(args.b));
    body.insert("product".into(), json!(pp.product()));
    body.insert("regime".into(), json!(regime_name(pp.regime())));
    body.insert("h_min".into(), json!(cv.h_min));
    body.insert("h_plus".into(), json!(cv.h_plus));
    body.insert("h_minus".into(), json!(cv.h_minus));
    body.insert("levels".into(), Value::Array(level_entries));
    Ok(Rendered::ok(json_output(
        body,
        canonical_args(&Command::Levels(args.clone())),
    )))
}

// --- rotation ----------------------------------------------------------------

fn parse_grid(text: &str) -> gumira::Result<Vec<f64>> {
    let err = || Error::DomainError {
        context: "h grid must be `LO:HI:lin|log:N`",
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(err());
    }
    let lo: f64 = parts[0].parse().map_err(|_| err())?;
    let hi: f64 = parts[1].parse().map_err(|_| err())?;
    let n: usize = parts[3].parse().map_err(|_| err())?;
    if n < 2 {
        return Err(err());
    }
    match parts[2] {
        "lin" => Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()),
        "log" => {
            if lo <= 0.0 || hi <= 0.0 {
                return Err(err());
            }
            let (llo, lhi) = (lo.ln(), hi.ln());
            Ok((0..n)
                .map(|k| (llo + (lhi - llo) * k as f64 / (n - 1) as f64).exp())
                .collect())
        }
        _ => Err(err()),
    }
}

fn rotation(args: &RotationArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let hs = parse_grid(&args.h_grid)?;
    let branch = branch_of(args.branch);

    let rows: Vec<String> = hs
        .par_iter()
        .enumerate()
        .map(|(i, &h)| {
            let mut tags: Vec<String> = Vec::new();
            if i == 0 {
                let v = limit_rho(&pp, RhoLimit::AtZeroPlus).expect("total");
                tags.push(format!("rho_at_0+={v}"));
                if let Ok(v) = limit_rho(&pp, RhoLimit::AtPpm) {
                    tags.push(format!("rho_at_Ppm={v}"));
                }
            }
            if i + 1 == hs.len() {
                tags.push("rho_at_inf=0.5".into());
            }
            let winding = estimate_winding(&pp, h, branch, args.n_iter);
            let flow = flow_rotation(&pp, h, branch);
            let w_txt = match &winding {
                Ok(est) => {
                    if est.method == RhoMethod::Flow {
                        tags.push("winding-folded->flow".into());
                    }
                    format!("{}", est.rho)
                }
                Err(e) => {
                    tags.push(format!("error:{}", e.code()));
                    String::new()
                }
            };
            let f_txt = match &flow {
                Ok((_, est)) => format!("{}", est.rho),
                Err(e) => {
                    tags.push(format!("error:{}", e.code()));
                    String::new()
                }
            };
            format!("{h},{w_txt},{f_txt},{}", tags.join(";"))
        })
        .collect();

    let mut content = format!(
        "# gumira-args: {}\nh,rho_winding,rho_flow,limit_tags\n",
        canonical_args(&Command::Rotation(args.clone())).join(" ")
    );
    for row in rows {
        content.push_str(&row);
        content.push('\n');
    }
    Ok(Rendered::ok(content))
}

// --- classify ----------------------------------------------------------------

fn classify(args: &ClassifyArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let (x1, x2) = parse_pair(&args.seed, "seed must be `x1,x2`")?;
    let family = match args.family {
        FamilyArg::G => Family::G,
        FamilyArg::F => Family::F,
    };
    let config = ClassifyConfig {
        n_terms: args.n_terms,
        gap_factor: args.gap_factor,
        min_cluster: args.min_cluster,
        ..ClassifyConfig::default()
    };
    let report = classify_behavior(family, pp, x1, x2, &config)?;

    let behavior = match report.behavior {
        Behavior::Periodic2q { q } => json!({ "kind": "Periodic2q", "q": q }),
        Behavior::ManyIntervals { k } => json!({ "kind": "ManyIntervals", "k": k }),
        other => json!({ "kind": other.name() }),
    };
    let mut body = serde_json::Map::new();
    body.insert("family".into(), json!(family_name(args.family)));
    body.insert("a".into(), json!(args.a));
    body.insert("b".into(), json!(args.b));
    body.insert("seed".into(), json!([x1, x2]));
    body.insert("n_points".into(), json!(report.n_points));
    body.insert("behavior".into(), behavior);
    body.insert("interval_count".into(), json!(report.intervals.count()));
    body.insert("intervals".into(), intervals_json(&report.intervals));

    if args.odd_even {
        let seq = recurrence_sequence(family, pp, x1, x2, args.n_terms, Direction::Forward)?;
        let odd: Vec<f64> = seq.iter().step_by(2).copied().collect();
        let even: Vec<f64> = seq.iter().skip(1).step_by(2).copied().collect();
        let odd_set = adherence_intervals(&odd, args.gap_factor, args.min_cluster);
        let even_set = adherence_intervals(&even, args.gap_factor, args.min_cluster);
        body.insert(
            "odd_even".into(),
            json!({
                "odd_intervals": intervals_json(&odd_set),
                "even_intervals": intervals_json(&even_set),
            }),
        );
    }
    Ok(Rendered::ok(json_output(
        body,
        canonical_args(&Command::Classify(args.clone())),
    )))
}

// --- periods -----------------------------------------------------------------

fn periods(args: &PeriodsArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let q_max = args.q_max.max(2);
    let admissible = admissible_periods(&pp, q_max);
    let locus = two_periodic_locus(&pp).map(|l| {
        json!({
            "h": l.h,
            "degenerate": l.degenerate,
            "n_samples": l.samples.len(),
            "max_second_iterate_residual": l.max_residual,
        })
    });

    let resonant = match (&args.target, &args.bracket) {
        (Some(target), Some(bracket)) => {
            let err = || Error::DomainError {
                context: "target must be `P/Q` with 0 < P < Q",
            };
            let (p_str, q_str) = target.split_once('/').ok_or_else(err)?;
            let p: usize = p_str.parse().map_err(|_| err())?;
            let q: usize = q_str.parse().map_err(|_| err())?;
            if !(p >= 1 && p < q) {
                return Err(err());
            }
            let (lo_str, hi_str) = bracket.split_once(':').ok_or(Error::DomainError {
                context: "bracket must be `LO:HI`",
            })?;
            let berr = || Error::DomainError {
                context: "bracket must be `LO:HI`",
            };
            let lo: f64 = lo_str.parse().map_err(|_| berr())?;
            let hi: f64 = hi_str.parse().map_err(|_| berr())?;
            let level = find_level_with_rho(&pp, p, q, (lo, hi), branch_of(args.branch))?;
            Some(json!({
                "target": target,
                "h": level.h,
                "rho": level.estimate.rho,
                "orbit_residual": level.orbit_residual,
                "map_period": q,
                "sequence_period": 2 * q,
            }))
        }
        _ => None,
    };

    let mut body = serde_json::Map::new();
    body.insert("a".into(), json!(args.a));
    body.insert("b".into(), json!(args.b));
    body.insert("product".into(), json!(pp.product()));
    body.insert("regime".into(), json!(regime_name(pp.regime())));
    body.insert("q_max".into(), json!(q_max));
    body.insert("admissible_periods".into(), json!(admissible));
    body.insert("all_admissible_from".into(), json!(min_realized_tail(&pp, q_max)));
    body.insert(
        "two_periodic_locus".into(),
        locus.unwrap_or(Value::Null),
    );
    body.insert("resonant_level".into(), resonant.unwrap_or(Value::Null));
    Ok(Rendered::ok(json_output(
        body,
        canonical_args(&Command::Periods(args.clone())),
    )))
}

// --- search-invariant ----------------------------------------------------------

fn parse_betas(text: &str) -> gumira::Result<BetaCycle> {
    let err = || Error::DomainError {
        context: "betas must be comma-separated positive rationals like `1/2,2,3`",
    };
    let mut betas = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        let value = if let Some((num, den)) = token.split_once('/') {
            let n: i64 = num.parse().map_err(|_| err())?;
            let d: i64 = den.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            BigRational::new(BigInt::from(n), BigInt::from(d))
        } else {
            let n: i64 = token.parse().map_err(|_| err())?;
            BigRational::from(BigInt::from(n))
        };
        betas.push(value);
    }
    BetaCycle::new(betas)
}

fn monomial_name(i: u32, j: u32) -> String {
    let part = |sym: &str, e: u32| match e {
        0 => String::new(),
        1 => sym.to_string(),
        _ => format!("{sym}^{e}"),
    };
    let (px, py) = (part("x", i), part("y", j));
    match (px.is_empty(), py.is_empty()) {
        (false, false) => format!("{px}*{py}"),
        (false, true) => px,
        (true, false) => py,
        (true, true) => "1".into(),
    }
}

fn search(args: &SearchInvariantArgs) -> gumira::Result<Rendered> {
    let cycle = parse_betas(&args.betas)?;
    let report = search_invariant(&cycle);

    let monomials: Vec<String> = ANSATZ_MONOMIALS
        .iter()
        .map(|&(i, j)| monomial_name(i, j))
        .collect();
    let basis: Vec<Value> = report
        .nullspace
        .basis
        .iter()
        .map(|ansatz| {
            let phases: Vec<Value> = ansatz
                .coeffs
                .iter()
                .map(|row| json!(row.iter().map(|c| c.to_string()).collect::<Vec<_>>()))
                .collect();
            json!({ "phases": phases })
        })
        .collect();

    let numeric = if args.verify_steps > 0 && !report.nullspace.basis.is_empty() {
        let seeds = [(0.4, -0.3), (1.1, 0.6), (-0.8, 0.2)];
        let worst = report
            .nullspace
            .basis
            .iter()
            .map(|a| verify_invariant(a, &cycle, args.verify_steps, &seeds))
            .fold(0.0_f64, f64::max);
        json!(worst)
    } else {
        Value::Null
    };

    let mut body = serde_json::Map::new();
    body.insert(
        "betas".into(),
        json!(cycle.betas().iter().map(|b| b.to_string()).collect::<Vec<_>>()),
    );
    body.insert("cycle_length".into(), json!(cycle.len()));
    body.insert("minimal_period".into(), json!(cycle.minimal_period()));
    body.insert("nullspace_dim".into(), json!(report.nullspace.dim()));
    body.insert("rank".into(), json!(report.nullspace.rank));
    body.insert("inherited_from_minimal_period".into(), json!(report.inherited));
    body.insert("monomials".into(), json!(monomials));
    body.insert("basis".into(), Value::Array(basis));
    body.insert("numeric_max_jump".into(), numeric);
    Ok(Rendered::ok(json_output(
        body,
        canonical_args(&Command::SearchInvariant(args.clone())),
    )))
}

// --- local ---------------------------------------------------------------------

fn local(args: &LocalArgs) -> gumira::Result<Rendered> {
    let pp = ParamPair::new(args.a, args.b)?;
    let report = local_report(&pp);
    let (lp, lm) = report.eigenvalues;
    let mut body = serde_json::Map::new();
    body.insert("a".into(), json!(args.a));
    body.insert("b".into(), json!(args.b));
    body.insert("product".into(), json!(pp.product()));
    body.insert(
        "char_poly".into(),
        json!([report.char_poly.0, report.char_poly.1, report.char_poly.2]),
    );
    body.insert(
        "eigenvalues".into(),
        json!([{ "re": lp.re, "im": lp.im }, { "re": lm.re, "im": lm.im }]),
    );
    body.insert("resonant_orders".into(), json!(report.resonant_orders));
    body.insert("sigma".into(), report.sigma.map_or(Value::Null, |s| json!(s)));
    body.insert(
        "sigma_swapped".into(),
        report.sigma_swapped.map_or(Value::Null, |s| json!(s)),
    );
    Ok(Rendered::ok(json_output(
        body,
        canonical_args(&Command::Local(args.clone())),
    )))
}

// --- replay ----------------------------------------------------------------------

pub fn replay(args: &ReplayArgs, output: Option<&std::path::Path>) -> ExitCode {
    let original = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error[io]: cannot read {}: {e}", args.file.display());
            return ExitCode::from(1);
        }
    };
    let embedded = match extract_args(&original) {
        Some(v) => v,
        None => {
            eprintln!("error[replay]: no embedded command line found in the file");
            return ExitCode::from(1);
        }
    };
    let mut argv = vec!["gumira".to_string()];
    argv.extend(embedded);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            eprintln!("error[replay]: embedded command does not parse: {e}");
            return ExitCode::from(1);
        }
    };
    let rendered = match render(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            return ExitCode::from(1);
        }
    };
    if let Some(path) = output {
        if let Err(e) = std::fs::write(path, &rendered.content) {
            eprintln!("error[io]: {e}");
            return ExitCode::from(1);
        }
    }
    if rendered.content == original {
        println!("replay: identical ({} bytes)", original.len());
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "error[replay]: regenerated output differs ({} vs {} bytes)",
            rendered.content.len(),
            original.len()
        );
        ExitCode::from(1)
    }
}

/// Emit a gnuplot script next to an exported data file. The script only
/// references the data; nothing is plotted in-process.
pub fn write_plot_script(cli: &Cli) -> std::io::Result<()> {
    let (script, data, body) = match &cli.command {
        Command::Orbit(a) => match (&a.plot_script, &cli.output) {
            (Some(script), Some(data)) => (
                script.clone(),
                data.clone(),
                "set size ratio -1\n\
                 plot data using 2:3 with dots notitle\n",
            ),
            _ => return Ok(()),
        },
        Command::Rotation(a) => match (&a.plot_script, &cli.output) {
            (Some(script), Some(data)) => (
                script.clone(),
                data.clone(),
                "set logscale x\n\
                 set xlabel 'h'\n\
                 set ylabel 'rotation number'\n\
                 plot data using 1:2 with linespoints title 'winding', \\\n\
                      data using 1:3 with points title 'flow'\n",
            ),
            _ => return Ok(()),
        },
        _ => return Ok(()),
    };
    let content = format!(
        "# gnuplot script generated by gumira\nset datafile separator ','\ndata = '{}'\n{}",
        data.display(),
        body
    );
    std::fs::write(script, content)
}

fn extract_args(content: &str) -> Option<Vec<String>> {
    if let Some(rest) = content.strip_prefix("# gumira-args: ") {
        let line = rest.lines().next()?;
        return Some(line.split_whitespace().map(String::from).collect());
    }
    let value: Value = serde_json::from_str(content).ok()?;
    let items = value.get("command")?.as_array()?;
    items
        .iter()
        .map(|v| v.as_str().map(String::from))
        .collect()
}
