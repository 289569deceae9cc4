//! Command line for power-map eigenvalue analysis: closed-form
//! decompositions, congruential subgroups, independence thresholds, printed
//! tables, and the exact and Monte Carlo verification engines.

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use powmap::classical::{
    ominus, oplus, power_decomposition, render_identity, reu, reu_split, sp, u, Component,
    ComponentKind, Decomposition,
};
use powmap::congruential::{independence_threshold, power_conditions, w_p};
use powmap::mc::{compare, McConfig, DEFAULT_GATE};
use powmap::oracle::{verify_identity_with_budget, VerifyOutcome, DEFAULT_BUDGET};
use powmap::rootsys::{
    adjoint_spec, simply_connected_spec, special_unitary_spec, twisted_spec, unitary_spec,
    GroupSpec, Lattice, TwistClass,
};
use powmap::tables::{generate_table, render_table, BarStyle, TableCase};

/// Flag or value errors: exit 2, distinct from verification failures.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(name = "powmap", about = "Eigenvalue distributions under power maps")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Unitary,
    Orthogonal,
    Symplectic,
    Reu,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Style {
    Ascii,
    Overline,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form decomposition of eig(M^p) into independent blocks.
    Decompose {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: u64,
        /// Drop zero-size blocks from the rendering.
        #[arg(long)]
        elide_zero: bool,
    },
    /// Congruential subgroup at v = delta/p.
    Wp {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "adjoint")]
        form: String,
    },
    /// Structure flags of the congruential subgroup at delta/p.
    Conditions {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "adjoint")]
        form: String,
    },
    /// Independence threshold of a group form.
    Threshold {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value = "adjoint")]
        form: String,
    },
    /// Printed reduction table of delta/p rows.
    Table {
        #[arg(long)]
        group: String,
        #[arg(long, value_enum, default_value_t = Style::Ascii)]
        style: Style,
    },
    /// Exact rational verification of power identities.
    VerifyExact {
        /// Single-identity mode; omit to sweep a suite.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<u64>,
        /// Right-hand side override, e.g. "U(2) (+) U(1)".
        #[arg(long)]
        rhs: Option<String>,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Sweep size cap: matrix size for unitary, free pairs otherwise.
        #[arg(long)]
        max_n: Option<u64>,
        #[arg(long)]
        max_p: Option<u64>,
        /// Term cap per expanded density.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Two-sample Monte Carlo comparison of trace statistics.
    VerifyMc {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: u64,
        /// Right-hand side override, e.g. "U(3)".
        #[arg(long)]
        rhs: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_GATE)]
        gate: f64,
        /// Emit a CSV report instead of text.
        #[arg(long)]
        csv: bool,
    },
    /// Fixture and property suite across all engines.
    Selftest {
        /// Smaller sweeps and sample counts.
        #[arg(long)]
        quick: bool,
    },
}

fn parse_component(s: &str) -> Result<Component> {
    let s = s.trim();
    let inner = s
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| usage(format!("expected Kind(size), got {s:?}")))?;
    let size: u64 = inner
        .1
        .trim()
        .parse()
        .map_err(|e| usage(format!("bad size in {s:?}: {e}")))?;
    let kind = match inner.0.trim() {
        "U" => ComponentKind::U,
        "O+" | "Oplus" => ComponentKind::Oplus,
        "O-" | "Ominus" => ComponentKind::Ominus,
        "ReU" => ComponentKind::ReU,
        "Sp" => ComponentKind::Sp,
        other => return Err(usage(format!("unknown component kind {other:?}"))),
    };
    if kind == ComponentKind::Sp && size % 2 != 0 {
        return Err(usage(format!("symplectic size must be even, got {size}")));
    }
    Ok(Component::new(kind, size))
}

fn parse_decomposition(s: &str) -> Result<Decomposition> {
    let components: Vec<Component> = s
        .replace("(+)", ",")
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_component)
        .collect::<Result<_>>()?;
    let ignored = components.iter().flat_map(|c| c.forced_eigenvalues()).collect();
    Ok(Decomposition::new(components, ignored))
}

fn classical_component(group: &str, n: u64) -> Result<Component> {
    parse_component(&format!("{group}({n})"))
}

/// Group form for the lattice-based commands.
fn parse_spec(group: &str, n: Option<u64>, form: &str) -> Result<GroupSpec> {
    let need_n = || n.ok_or_else(|| usage(format!("--group {group} requires --n")));
    if let Some(rest) = group.strip_prefix("twisted:") {
        let sc = match form {
            "adjoint" => false,
            "sc" => true,
            other => return Err(usage(format!("twisted groups take --form adjoint|sc, got {other:?}"))),
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let parse_m = |t: &str| -> Result<usize> {
            t.parse().map_err(|e| usage(format!("bad twisted rank {t:?}: {e}")))
        };
        let (class, cycle) = match parts.as_slice() {
            ["a2_odd", m] => (TwistClass::A2Odd { m: parse_m(m)? }, 2),
            ["a2_even", m] => (TwistClass::A2Even { m: parse_m(m)? }, 2),
            ["d2", m] => (TwistClass::D2 { m: parse_m(m)? }, 2),
            ["e6_2"] => (TwistClass::E6Fold, 2),
            ["d4_3"] => (TwistClass::D4Fold, 3),
            ["u", m, cycle] => (
                TwistClass::CycleU { m: parse_m(m)? },
                cycle.parse().map_err(|e| usage(format!("bad cycle {cycle:?}: {e}")))?,
            ),
            _ => {
                return Err(usage(format!(
                    "unknown twisted class {rest:?}; expected a2_odd:<m>, a2_even:<m>, d2:<m>, e6_2, d4_3, or u:<m>:<cycle>"
                )))
            }
        };
        return twisted_spec(class, cycle, sc).map_err(|e| usage(e.to_string()));
    }
    match group {
        "U" => Ok(unitary_spec(need_n()?.max(1) as usize)),
        "SU" => {
            let n = need_n()?;
            if n < 2 {
                return Err(usage("SU requires --n >= 2"));
            }
            Ok(special_unitary_spec(n as usize))
        }
        "G2" | "F4" | "E6" | "E7" | "E8" => {
            let family = &group[..1];
            let rank: usize = group[1..].parse().unwrap();
            match form {
                "adjoint" => adjoint_spec(family, rank).map_err(|e| usage(e.to_string())),
                "sc" => simply_connected_spec(family, rank).map_err(|e| usage(e.to_string())),
                custom => {
                    let path = custom
                        .strip_prefix("custom:")
                        .ok_or_else(|| usage(format!("--form must be adjoint, sc, or custom:<path>, got {custom:?}")))?;
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading lattice file {path}"))
                        .map_err(|e| usage(format!("{e:#}")))?;
                    let lattice: Lattice = serde_json::from_str(&text)
                        .map_err(|e| usage(format!("parsing lattice file {path}: {e}")))?;
                    let base = adjoint_spec(family, rank).map_err(|e| usage(e.to_string()))?;
                    if lattice.ambient_dim != base.root_datum.dim {
                        return Err(usage(format!(
                            "lattice ambient dimension {} does not match {} realization dimension {}",
                            lattice.ambient_dim, group, base.root_datum.dim
                        )));
                    }
                    Ok(GroupSpec {
                        label: format!("{group} custom"),
                        root_datum: base.root_datum,
                        lattice,
                        twist: None,
                    })
                }
            }
        }
        other => Err(usage(format!(
            "unknown group {other:?}; expected U, SU, G2, F4, E6, E7, E8, or twisted:*"
        ))),
    }
}

fn table_case(group: &str) -> Result<TableCase> {
    let key = group.strip_prefix("twisted:").unwrap_or(group);
    TableCase::ALL
        .into_iter()
        .find(|c| c.label().eq_ignore_ascii_case(key))
        .ok_or_else(|| {
            usage(format!(
                "no printed table for {group:?}; expected G2, F4, E6, E7, E8, D4_3, or E6_2"
            ))
        })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct SweepEntry {
    identity: String,
    lhs: Component,
    p: u64,
    rhs: Decomposition,
    outcome: VerifyOutcome,
}

fn verify_one(lhs: Component, p: u64, rhs: Decomposition, budget: u64) -> Result<SweepEntry> {
    let outcome = verify_identity_with_budget(&lhs, p, &rhs, budget)?;
    Ok(SweepEntry {
        identity: render_identity(&lhs, p, &rhs, false),
        lhs,
        p,
        rhs,
        outcome,
    })
}

fn sweep_identities(suite: Suite, max_n: Option<u64>, max_p: Option<u64>) -> Result<Vec<(Component, u64, Decomposition)>> {
    let mut out = Vec::new();
    let run = |s: Suite| suite == Suite::All || suite == s;
    if run(Suite::Unitary) {
        let (mn, mp) = (max_n.unwrap_or(6), max_p.unwrap_or(8));
        for n in 1..=mn {
            for p in 1..=mp {
                out.push((u(n), p, power_decomposition(&u(n), p)?));
            }
        }
    }
    if run(Suite::Orthogonal) {
        let (pairs, mp) = (max_n.unwrap_or(5), max_p.unwrap_or(6));
        for sign in [1i8, -1] {
            for cap_n in 1..=(2 * pairs + 2) {
                let c = if sign > 0 { oplus(cap_n) } else { ominus(cap_n) };
                if c.free_pairs() > pairs {
                    continue;
                }
                for p in 1..=mp {
                    out.push((c, p, power_decomposition(&c, p)?));
                }
            }
        }
    }
    if run(Suite::Symplectic) {
        let pairs = max_n.unwrap_or(5);
        for n in 1..=pairs {
            out.push((sp(2 * n), 1, power_decomposition(&sp(2 * n), 1)?));
        }
    }
    if run(Suite::Reu) {
        let mn = max_n.unwrap_or(4);
        for n in 1..=mn {
            out.push((reu(n), 1, reu_split(n)));
        }
    }
    Ok(out)
}

fn cmd_verify_exact(
    json: bool,
    group: Option<String>,
    n: Option<u64>,
    p: Option<u64>,
    rhs: Option<String>,
    suite: Suite,
    max_n: Option<u64>,
    max_p: Option<u64>,
    budget: u64,
) -> Result<bool> {
    let identities = match group {
        Some(g) => {
            let n = n.ok_or_else(|| usage("--group requires --n"))?;
            let p = p.ok_or_else(|| usage("--group requires --p"))?;
            let lhs = classical_component(&g, n)?;
            let rhs = match rhs {
                Some(s) => parse_decomposition(&s)?,
                None => power_decomposition(&lhs, p)?,
            };
            vec![(lhs, p, rhs)]
        }
        None => {
            if rhs.is_some() {
                return Err(usage("--rhs requires --group/--n/--p"));
            }
            sweep_identities(suite, max_n, max_p)?
        }
    };
    let mut entries = Vec::with_capacity(identities.len());
    let mut all_equal = true;
    for (lhs, p, rhs) in identities {
        let entry = verify_one(lhs, p, rhs, budget)?;
        let ok = entry.outcome.is_equal();
        all_equal &= ok;
        if !json {
            match &entry.outcome {
                VerifyOutcome::Equal => println!("ok   {}", entry.identity),
                VerifyOutcome::Differs(w) => println!(
                    "FAIL {}: exponent {:?} has coefficients {} vs {}",
                    entry.identity,
                    w.exponent,
                    w.lhs_coeff,
                    w.rhs_coeff
                ),
            }
        }
        entries.push(entry);
    }
    if json {
        print_json(&entries)?;
    } else {
        let okc = entries.iter().filter(|e| e.outcome.is_equal()).count();
        println!("{okc}/{} identities exact", entries.len());
    }
    Ok(all_equal)
}

fn cmd_verify_mc(
    json: bool,
    csv: bool,
    group: String,
    n: u64,
    p: u64,
    rhs: Option<String>,
    cfg: McConfig,
    gate: f64,
) -> Result<bool> {
    if cfg.samples < 1000 {
        return Err(usage("--samples must be at least 1000"));
    }
    if cfg.kmax < 1 {
        return Err(usage("--kmax must be at least 1"));
    }
    let lhs = classical_component(&group, n)?;
    let rhs = match rhs {
        Some(s) => parse_decomposition(&s)?,
        None => power_decomposition(&lhs, p)?,
    };
    let report = compare(&lhs, p, &rhs, &cfg);
    let pass = report.passes(gate);
    if json {
        print_json(&report)?;
    } else if csv {
        print!("{}", report.to_csv());
    } else {
        println!("{}", render_identity(&lhs, p, &rhs, false));
        println!(
            "samples={} kmax={} seed={} workers={}",
            report.samples, report.kmax, report.seed, cfg.workers
        );
        for line in &report.lines {
            match line.z {
                Some(z) => println!(
                    "{:<14} lhs {:>12.6} rhs {:>12.6} z {:>8.3}",
                    line.name, line.lhs.mean, line.rhs.mean, z
                ),
                None => println!(
                    "{:<14} lhs {:>12.6} rhs {:>12.6} exact match {}",
                    line.name,
                    line.lhs.mean,
                    line.rhs.mean,
                    line.exact == Some(true)
                ),
            }
        }
        println!(
            "max |z| = {:.3}, gate {gate}: {}",
            report.max_abs_z(),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(pass)
}

#[derive(Serialize)]
struct SelftestLine {
    name: String,
    ok: bool,
    detail: String,
}

fn cmd_selftest(json: bool, quick: bool) -> Result<bool> {
    let mut lines: Vec<SelftestLine> = Vec::new();
    let mut record = |name: &str, ok: bool, detail: String| {
        lines.push(SelftestLine { name: name.to_string(), ok, detail });
    };

    let mut table_fail = Vec::new();
    for case in TableCase::ALL {
        let rows = generate_table(&case.spec())?;
        if render_table(&rows, BarStyle::Ascii) != case.fixture() {
            table_fail.push(case.label());
        }
    }
    record(
        "tables",
        table_fail.is_empty(),
        if table_fail.is_empty() {
            "7/7 fixtures byte-identical".into()
        } else {
            format!("mismatched: {table_fail:?}")
        },
    );

    let (mn, mp) = if quick { (3, 3) } else { (4, 4) };
    let mut exact_total = 0usize;
    let mut exact_fail = Vec::new();
    let mut sweep = sweep_identities(Suite::Unitary, Some(mn), Some(mp))?;
    sweep.extend(sweep_identities(Suite::Orthogonal, Some(2), Some(3))?);
    sweep.extend(sweep_identities(Suite::Symplectic, Some(2), None)?);
    sweep.extend(sweep_identities(Suite::Reu, Some(2), None)?);
    for (lhs, p, rhs) in sweep {
        exact_total += 1;
        let entry = verify_one(lhs, p, rhs, DEFAULT_BUDGET)?;
        if !entry.outcome.is_equal() {
            exact_fail.push(entry.identity);
        }
    }
    record(
        "exact identities",
        exact_fail.is_empty(),
        if exact_fail.is_empty() {
            format!("{exact_total}/{exact_total} exact")
        } else {
            format!("failed: {exact_fail:?}")
        },
    );

    let e8 = independence_threshold(&adjoint_spec("E", 8).unwrap())?;
    let su4 = w_p(&special_unitary_spec(4), 4)?;
    let e8_29 = w_p(&adjoint_spec("E", 8).unwrap(), 29)?;
    let e8_30 = w_p(&adjoint_spec("E", 8).unwrap(), 30)?;
    let thr_ok = e8.h == 30
        && e8.iid_at_h
        && su4.order == 4.into()
        && !e8_29.is_trivial()
        && e8_30.is_trivial();
    record(
        "thresholds",
        thr_ok,
        format!(
            "E8: h={}, |W^(29)|={}, |W^(30)|={}; SU(4): |W^(4)|={}",
            e8.h, e8_29.order, e8_30.order, su4.order
        ),
    );

    let cfg = McConfig {
        samples: if quick { 5_000 } else { 50_000 },
        kmax: 4,
        seed: 1,
        workers: 4,
    };
    let report = compare(&u(2), 2, &power_decomposition(&u(2), 2)?, &cfg);
    record(
        "monte carlo",
        report.passes(DEFAULT_GATE),
        format!("U(2)^2 max |z| = {:.3}", report.max_abs_z()),
    );

    let all_ok = lines.iter().all(|l| l.ok);
    if json {
        print_json(&lines)?;
    } else {
        for l in &lines {
            println!("{} {}: {}", if l.ok { "ok  " } else { "FAIL" }, l.name, l.detail);
        }
        println!("selftest: {}", if all_ok { "PASS" } else { "FAIL" });
    }
    Ok(all_ok)
}

fn run(cli: Cli) -> Result<bool> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Decompose { group, n, p, elide_zero } => {
            let lhs = classical_component(&group, n)?;
            let d = power_decomposition(&lhs, p)?;
            if json {
                print_json(&d)?;
            } else {
                println!("{}", d.render(elide_zero));
            }
            Ok(true)
        }
        Cmd::Wp { group, n, p, form } => {
            if p < 1 {
                return Err(usage("--p must be at least 1"));
            }
            let spec = parse_spec(&group, n, &form)?;
            let cg = w_p(&spec, p)?;
            if json {
                print_json(&cg)?;
            } else {
                println!("group = {}", spec.label);
                println!("order = {}", cg.order);
                let label = if cg.weyl_part.rank == 0 {
                    "trivial".to_string()
                } else {
                    cg.weyl_part
                        .family
                        .iter()
                        .map(|f| f.to_string())
                        .collect::<Vec<_>>()
                        .join(" x ")
                };
                println!("reflection part = {label}");
                println!("alcove isometries fixing v_bar = {}", cg.automorphism_part.len());
                println!("wall nodes = {:?}", cg.wall_nodes);
            }
            Ok(true)
        }
        Cmd::Conditions { group, n, p, form } => {
            if p < 1 {
                return Err(usage("--p must be at least 1"));
            }
            let spec = parse_spec(&group, n, &form)?;
            let pc = power_conditions(&spec, p)?;
            if json {
                print_json(&pc)?;
            } else {
                println!(
                    "is_weyl={} weyl_vector_condition={} center_connected={}",
                    pc.is_weyl, pc.weyl_vector_condition, pc.center_connected
                );
            }
            Ok(true)
        }
        Cmd::Threshold { group, n, form } => {
            let spec = parse_spec(&group, n, &form)?;
            let t = independence_threshold(&spec).map_err(|e| usage(e.to_string()))?;
            if json {
                print_json(&t)?;
            } else if t.iid_at_h {
                println!("h={}, iid for p>={}", t.h, t.h);
            } else {
                println!("h={}, iid for p>{}", t.h, t.h);
            }
            Ok(true)
        }
        Cmd::Table { group, style } => {
            let case = table_case(&group)?;
            let rows = generate_table(&case.spec())?;
            if json {
                print_json(&rows)?;
            } else {
                let style = match style {
                    Style::Ascii => BarStyle::Ascii,
                    Style::Overline => BarStyle::Overline,
                };
                print!("{}", render_table(&rows, style));
            }
            Ok(true)
        }
        Cmd::VerifyExact { group, n, p, rhs, suite, max_n, max_p, budget } => {
            cmd_verify_exact(json, group, n, p, rhs, suite, max_n, max_p, budget)
        }
        Cmd::VerifyMc { group, n, p, rhs, samples, kmax, seed, workers, gate, csv } => {
            let cfg = McConfig { samples, kmax, seed, workers: workers.max(1) };
            cmd_verify_mc(json, csv, group, n, p, rhs, cfg, gate)
        }
        Cmd::Selftest { quick } => cmd_selftest(json, quick),
    }
}

fn main() -> ExitCode {
    // Die quietly when a pipe reader closes early, like other line tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
