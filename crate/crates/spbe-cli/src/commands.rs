use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use spbe_core::cascade::{
    absorption, exact_cascade_dp, revelation_chain, simulate, y_max_bound, CascadeClass, CascadeDistribution, SimConfig,
};
use spbe_core::oracle::{deviation_test, fpe2_residual, DeviationConfig, Fpe2Error};
use spbe_core::par::ExecMode;
use spbe_core::profiles::{delta1_profile, large_delta_profile, myopic_profile, structural_check, RowChoice};
use spbe_core::rational::{format_rational, int, to_f64, Rational};
use spbe_core::solver::{solve, SolveConfig, SolveError, SolveResult};
use spbe_core::verifier::{bisect_delta, check_profile_with, VerifyError};
use spbe_core::{GameParams, Gamma, Signal, StrategyProfile};

use crate::args::{
    CascadeArgs, ChainArgs, DeviateArgs, Format, Fpe2Args, GameArgs, ProfileArgs, ProfileKind, RowArg, SimulateArgs,
    SolveArgs, TableFormat, ValueArg, VerifyArgs,
};
use crate::profile_io::{read_profile, render_ascii, ProfileFile};
use crate::{CliError, EXIT_FAIL, EXIT_NOT_CONVERGED, EXIT_OK};

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn game_params(g: &GameArgs) -> Result<GameParams, CliError> {
    GameParams::new(g.n, g.p.clone(), g.delta.clone()).map_err(|e| CliError::Usage(e.to_string()))
}

fn mode(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn values_of(v: ValueArg) -> Vec<Signal> {
    match v {
        ValueArg::Plus => vec![Signal::Plus],
        ValueArg::Minus => vec![Signal::Minus],
        ValueArg::Both => vec![Signal::Plus, Signal::Minus],
    }
}

fn csv_text(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w).map_err(|e| CliError::Output(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn profile_csv(profile: &StrategyProfile) -> Result<String, CliError> {
    csv_text(|w| {
        w.write_record(["r", "y", "w", "code"])?;
        for (r, y, wv, g) in profile.entries() {
            if let Some(g) = g {
                w.write_record([r.to_string(), y.to_string(), wv.to_string(), g.code().to_string()])?;
            }
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct ValueRow {
    acting: bool,
    x: i32,
    r: u8,
    z: Option<u8>,
    y: i32,
    w: i32,
    value: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    profile: ProfileFile,
    converged: bool,
    iterations: usize,
    residual: f64,
    flags: Vec<String>,
    values: Vec<ValueRow>,
}

fn reveal_count(profile: &StrategyProfile) -> usize {
    profile.entries().filter(|e| e.3 == Some(Gamma::Reveal)).count()
}

pub fn solve_cmd(a: &SolveArgs) -> Result<u8, CliError> {
    let params = game_params(&a.game)?;
    let initial = match &a.initial {
        Some(path) => {
            let (prof, _) = read_profile(path)?;
            if prof.n() != params.n() {
                return Err(CliError::Usage(format!("initial profile has N = {}, expected {}", prof.n(), params.n())));
            }
            Some(prof)
        }
        None => None,
    };
    let config = SolveConfig {
        tie_break: a.tie_break,
        tol: a.tol,
        max_iters: a.max_iters,
        indifference_eps: a.indifference_eps,
        initial,
        ..Default::default()
    };
    let (res, converged): (SolveResult, bool) = match solve(&params, &config) {
        Ok(r) => (r, true),
        Err(SolveError::NotConverged(r)) => (*r, false),
        Err(SolveError::Config(m)) => return Err(CliError::Usage(m)),
        Err(e) => return Err(CliError::Failed(e.to_string())),
    };
    eprintln!(
        "{} after {} passes, residual {:.3e}",
        if converged { "converged" } else { "NOT converged" },
        res.iterations,
        res.residual
    );
    for f in &res.flags {
        eprintln!("flag: {f}");
    }

    let text = match a.format {
        Format::Ascii => render_ascii(&res.profile),
        Format::Csv => profile_csv(&res.profile)?,
        Format::Json => {
            let values = res
                .values
                .entries()
                .into_iter()
                .map(|(acting, x, r, z, y, w, v)| ValueRow {
                    acting,
                    x: x.value(),
                    r,
                    z: (!acting).then_some(z),
                    y,
                    w,
                    value: *v,
                })
                .collect();
            let out = SolveOutput {
                profile: ProfileFile::new(&res.profile, &params),
                converged,
                iterations: res.iterations,
                residual: res.residual,
                flags: res.flags.iter().map(ToString::to_string).collect(),
                values,
            };
            serde_json::to_string_pretty(&out).map_err(|e| CliError::Output(e.to_string()))? + "\n"
        }
    };
    emit(a.out.as_deref(), &text)?;

    if let Some(path) = &a.baseline {
        let (base, _) = read_profile(path)?;
        if base.n() != res.profile.n() {
            return Err(CliError::Usage("baseline profile has a different N".into()));
        }
        let diff = res.profile.diff(&base);
        eprintln!(
            "versus baseline: {} cells differ; REVEAL cells {} here, {} in baseline",
            diff.len(),
            reveal_count(&res.profile),
            reveal_count(&base)
        );
    }

    let mut code = if converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    if a.verify && converged {
        let rep = check_profile_with(&res.profile, &params, ExecMode::Parallel).map_err(verify_error)?;
        eprintln!(
            "exact check: {} ({} violations, {} ties)",
            if rep.passed { "passed" } else { "FAILED" },
            rep.violations.len(),
            rep.ties.len()
        );
        if !rep.passed {
            code = EXIT_FAIL;
        }
    }
    Ok(code)
}

fn verify_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::Profile(p) => CliError::Schema(p.to_string()),
        VerifyError::SizeMismatch { .. } => CliError::Schema(e.to_string()),
        other => CliError::Failed(format!("not certifiable: {other}")),
    }
}

#[derive(Serialize)]
struct ViolationRow {
    r: u8,
    y: i32,
    w: i32,
    x: i32,
    prescribed: String,
    buy: String,
    wait: String,
    margin: f64,
}

#[derive(Serialize)]
struct VerifyOutput {
    n: usize,
    p: String,
    delta: String,
    passed: bool,
    ties: usize,
    violations: Vec<ViolationRow>,
}

#[derive(Serialize)]
struct BisectOutput {
    depth: u32,
    delta_star: Option<String>,
    delta_fail: Option<String>,
    evaluations: Vec<(String, bool)>,
}

pub fn verify_cmd(a: &VerifyArgs) -> Result<u8, CliError> {
    let (profile, mut params) = read_profile(&a.profile)?;
    if let Some(d) = &a.delta {
        params = params.with_delta(d.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if a.bisect_delta {
        if !(1..=62).contains(&a.depth) {
            return Err(CliError::Usage("--depth must lie in 1..=62".into()));
        }
        let rep = bisect_delta(&profile, &params, a.depth).map_err(verify_error)?;
        match &rep.delta_star {
            Some(d) => println!("delta* = {} ({:.12})", format_rational(d), to_f64(d)),
            None => println!("no certifying discount on the grid j/2^{}", a.depth),
        }
        if let Some(d) = &rep.delta_fail {
            println!("largest failing grid point below it: {} ({:.12})", format_rational(d), to_f64(d));
        }
        println!("{} verifier runs", rep.evaluations.len());
        if let Some(path) = &a.out {
            let out = BisectOutput {
                depth: rep.depth,
                delta_star: rep.delta_star.as_ref().map(format_rational),
                delta_fail: rep.delta_fail.as_ref().map(format_rational),
                evaluations: rep.evaluations.iter().map(|(d, ok)| (format_rational(d), *ok)).collect(),
            };
            emit(
                Some(path),
                &(serde_json::to_string_pretty(&out).map_err(|e| CliError::Output(e.to_string()))? + "\n"),
            )?;
        }
        return Ok(if rep.delta_star.is_some() { EXIT_OK } else { EXIT_FAIL });
    }

    let rep = check_profile_with(&profile, &params, mode(a.sequential)).map_err(verify_error)?;
    println!(
        "{}: N={} p={} delta={}, {} violations, {} ties",
        if rep.passed { "PASS" } else { "FAIL" },
        params.n(),
        format_rational(params.p()),
        format_rational(params.delta()),
        rep.violations.len(),
        rep.ties.len()
    );
    let rows: Vec<ViolationRow> = rep
        .violations
        .iter()
        .map(|v| ViolationRow {
            r: v.r,
            y: v.y,
            w: v.w,
            x: v.x.value(),
            prescribed: v.prescribed.to_string(),
            buy: format_rational(&v.buy),
            wait: format_rational(&v.wait),
            margin: to_f64(&v.margin()),
        })
        .collect();
    for v in &rep.violations {
        println!(
            "violation at (r={}, y={}, w={}) x={:+}: prescribed {}, buy {:.6} wait {:.6}, margin {:.3e}",
            v.r,
            v.y,
            v.w,
            v.x.value(),
            v.prescribed,
            to_f64(&v.buy),
            to_f64(&v.wait),
            to_f64(&v.margin())
        );
    }
    if let Some(path) = &a.out {
        let out = VerifyOutput {
            n: params.n(),
            p: format_rational(params.p()),
            delta: format_rational(params.delta()),
            passed: rep.passed,
            ties: rep.ties.len(),
            violations: rows,
        };
        emit(Some(path), &(serde_json::to_string_pretty(&out).map_err(|e| CliError::Output(e.to_string()))? + "\n"))?;
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_FAIL })
}

pub fn profile_cmd(a: &ProfileArgs) -> Result<u8, CliError> {
    let params = game_params(&a.game)?;
    let row = match a.row {
        RowArg::Buy => RowChoice::Buy,
        RowArg::Reveal => RowChoice::Reveal,
    };
    let profile = match a.kind {
        ProfileKind::Myopic => myopic_profile(&params, row),
        ProfileKind::Delta1 => delta1_profile(&params),
        ProfileKind::LargeDelta => large_delta_profile(&params),
    };
    if a.check {
        for res in structural_check(&profile) {
            eprintln!("{}: {} {:?}", res.name, if res.passed { "ok" } else { "broken at" }, res.witnesses);
        }
    }
    let text = match a.format {
        Format::Json => {
            serde_json::to_string_pretty(&ProfileFile::new(&profile, &params))
                .map_err(|e| CliError::Output(e.to_string()))?
                + "\n"
        }
        Format::Ascii => render_ascii(&profile),
        Format::Csv => profile_csv(&profile)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn bad_class(v: Signal) -> CascadeClass {
    match v {
        Signal::Plus => CascadeClass::WaitCascade,
        Signal::Minus => CascadeClass::BuyCascade,
    }
}

/// `P(bad cascade with onset w' <= w)` for `w = 0..=N`.
pub fn cumulative_bad(dist: &CascadeDistribution, n: usize) -> Vec<(i32, Rational)> {
    let steps = dist.cumulative_onset(bad_class(dist.v));
    let mut acc = int(0);
    let mut it = steps.into_iter().peekable();
    (0..=n as i32)
        .map(|w| {
            while let Some((_, p)) = it.next_if(|(ow, _)| *ow <= w) {
                acc = p;
            }
            (w, acc.clone())
        })
        .collect()
}

#[derive(Serialize)]
struct ClassRow {
    v: i32,
    class: &'static str,
    probability: String,
    probability_f64: f64,
}

#[derive(Serialize)]
struct CascadeOutput {
    classes: Vec<ClassRow>,
    expected_revelations: Vec<(i32, String)>,
    cumulative_bad: Vec<(i32, i32, String)>,
    non_closed_buy: Vec<(i32, i32)>,
}

pub fn cascade_cmd(a: &CascadeArgs) -> Result<u8, CliError> {
    let (profile, params) = read_profile(&a.profile)?;
    let dp = exact_cascade_dp(&profile, &params);
    if !dp.non_closed_buy.is_empty() {
        eprintln!("warning: BUY not closed in w at {:?}; those cells are followed pathwise", dp.non_closed_buy);
    }
    let vs = values_of(a.v);
    let classes: Vec<ClassRow> = vs
        .iter()
        .flat_map(|&v| {
            let d = dp.for_value(v);
            CascadeClass::ALL.into_iter().map(move |c| ClassRow {
                v: v.value(),
                class: c.label(),
                probability: format_rational(d.probability(c)),
                probability_f64: to_f64(d.probability(c)),
            })
        })
        .collect();
    let cumulative: Vec<(i32, i32, Rational)> = vs
        .iter()
        .flat_map(|&v| cumulative_bad(dp.for_value(v), params.n()).into_iter().map(move |(w, p)| (v.value(), w, p)))
        .collect();

    let text = match a.format {
        TableFormat::Csv => csv_text(|w| {
            w.write_record(["v", "class", "probability"])?;
            for row in &classes {
                w.write_record([row.v.to_string(), row.class.to_string(), row.probability_f64.to_string()])?;
            }
            Ok(())
        })?,
        TableFormat::Json => {
            let out = CascadeOutput {
                classes,
                expected_revelations: vs
                    .iter()
                    .map(|&v| (v.value(), format_rational(&dp.for_value(v).expected_revelations)))
                    .collect(),
                cumulative_bad: cumulative.iter().map(|(v, w, p)| (*v, *w, format_rational(p))).collect(),
                non_closed_buy: dp.non_closed_buy.clone(),
            };
            serde_json::to_string_pretty(&out).map_err(|e| CliError::Output(e.to_string()))? + "\n"
        }
    };
    emit(a.out.as_deref(), &text)?;
    if let Some(path) = &a.cumulative {
        let text = csv_text(|w| {
            w.write_record(["v", "w", "cumulative_probability"])?;
            for (v, wv, p) in &cumulative {
                w.write_record([v.to_string(), wv.to_string(), to_f64(p).to_string()])?;
            }
            Ok(())
        })?;
        emit(Some(path), &text)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AgreementRow {
    v: i32,
    class: &'static str,
    exact: f64,
    simulated: f64,
    count: usize,
    std_error: f64,
    z: Option<f64>,
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<u8, CliError> {
    let (profile, params) = read_profile(&a.profile)?;
    let max_turns = a.max_turns.unwrap_or(100 * params.n());
    let config = SimConfig { seed: a.seed, n_runs: a.runs, max_turns, mode: mode(a.sequential) };
    let sim = simulate(&profile, &params, &config);
    let dp = exact_cascade_dp(&profile, &params);

    let mut rows = Vec::new();
    for v in values_of(a.v) {
        let runs = sim.count(v);
        for c in CascadeClass::ALL {
            let exact = to_f64(dp.for_value(v).probability(c));
            let simulated = sim.frequency(v, c);
            let se = if runs > 0 { (exact * (1.0 - exact) / runs as f64).sqrt() } else { 0.0 };
            rows.push(AgreementRow {
                v: v.value(),
                class: c.label(),
                exact,
                simulated,
                count: sim.class_count(v, c),
                std_error: se,
                z: (se > 0.0).then(|| (simulated - exact) / se),
            });
        }
    }
    eprintln!(
        "{} runs, max_turns {max_turns}: cascade frequency {:.6}, mean revelations {:.4}, mean welfare {:.6}",
        sim.runs.len(),
        sim.cascade_frequency(),
        sim.mean_revelations(),
        sim.mean_welfare()
    );
    let text = match a.format {
        TableFormat::Csv => csv_text(|w| {
            w.write_record(["v", "class", "exact", "simulated", "count", "std_error", "z"])?;
            for r in &rows {
                w.write_record([
                    r.v.to_string(),
                    r.class.to_string(),
                    r.exact.to_string(),
                    r.simulated.to_string(),
                    r.count.to_string(),
                    r.std_error.to_string(),
                    r.z.map_or(String::new(), |z| format!("{z:.3}")),
                ])?;
            }
            Ok(())
        })?,
        TableFormat::Json => serde_json::to_string_pretty(&rows).map_err(|e| CliError::Output(e.to_string()))? + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    if let Some(path) = &a.runs_out {
        let text = csv_text(|w| {
            w.write_record(["run", "v", "class", "onset_w", "onset_turn", "revelations", "turns", "welfare"])?;
            for (i, r) in sim.runs.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    r.v.value().to_string(),
                    r.class.label().to_string(),
                    r.onset_w.to_string(),
                    r.onset_turn.map_or(String::new(), |t| t.to_string()),
                    r.revelations.to_string(),
                    r.turns.to_string(),
                    r.welfare.to_string(),
                ])?;
            }
            Ok(())
        })?;
        emit(Some(path), &text)?;
    }
    Ok(EXIT_OK)
}

pub fn chain_cmd(a: &ChainArgs) -> Result<u8, CliError> {
    let (profile, params) = read_profile(&a.profile)?;
    let chain = revelation_chain(&profile, &params);
    let mut out = String::new();
    if !chain.w_dependent.is_empty() {
        eprintln!("warning: REVEAL region depends on w at y = {:?}; chain is valid pathwise only", chain.w_dependent);
    }
    let _ = writeln!(out, "y,up,absorbing");
    for y in chain.y_min..=chain.y_max {
        let _ = writeln!(out, "{y},{},{}", format_rational(chain.up(y)), chain.is_absorbing(y));
    }
    let abs = absorption(&chain, a.start).map_err(|e| CliError::Failed(e.to_string()))?;
    for (y, p) in &abs.hit {
        let _ = writeln!(out, "# P(absorb at {y} | start {}) = {}", a.start, format_rational(p));
    }
    let _ = writeln!(out, "# expected revelations = {}", format_rational(&abs.expected_steps));
    match y_max_bound(&params) {
        Ok(b) => {
            let _ = writeln!(out, "# y bound = {b}");
        }
        Err(e) => {
            let _ = writeln!(out, "# y bound: {e}");
        }
    }
    emit(None, &out)?;
    Ok(EXIT_OK)
}

pub fn fpe2_cmd(a: &Fpe2Args) -> Result<u8, CliError> {
    let (profile, params) = read_profile(&a.profile)?;
    let values = spbe_core::verifier::solve_exact_values(&profile, &params).map_err(verify_error)?;
    let rep = fpe2_residual(&profile, &values, &params).map_err(|e| match e {
        Fpe2Error::TooLarge(_) => CliError::Usage(e.to_string()),
        other => CliError::Failed(other.to_string()),
    })?;
    println!(
        "residual {} over {} equations on {} states; {} argmax violations",
        format_rational(&rep.max_residual),
        rep.equations,
        rep.states,
        rep.argmax_violations.len()
    );
    Ok(if rep.max_residual == int(0) && rep.argmax_violations.is_empty() { EXIT_OK } else { EXIT_FAIL })
}

pub fn deviate_cmd(a: &DeviateArgs) -> Result<u8, CliError> {
    let (profile, params) = read_profile(&a.profile)?;
    if params.delta_is_one() && a.horizon.is_none() {
        return Err(CliError::Usage("delta = 1 needs an explicit --horizon".into()));
    }
    let config = DeviationConfig {
        seed: a.seed,
        n_samples: a.samples,
        horizon: a.horizon,
        tail_tolerance: a.tail_tolerance,
        mode: mode(a.sequential),
        ..Default::default()
    };
    let rep = deviation_test(&profile, &params, &config);
    println!("baseline payoff {:.6} over {} samples, horizon {}", rep.baseline, rep.n_samples, rep.horizon);
    let mut est: Vec<_> = rep.estimates.iter().collect();
    est.sort_by(|x, y| y.mean_gain.total_cmp(&x.mean_gain));
    for e in est.iter().take(10) {
        println!("{:+.3e} +/- {:.1e}  {}", e.mean_gain, e.std_error, e.deviation.label());
    }
    if let Some(g) = &rep.exact_gain {
        println!("exact one-shot gain {}", format_rational(g));
    }
    println!("{}", if rep.detected { "profitable deviation detected" } else { "no profitable deviation detected" });
    Ok(if rep.detected { EXIT_FAIL } else { EXIT_OK })
}
