use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asymrado::catalogue;
use asymrado::hypergraph::{projection_count_audit, OrderedSolutionHypergraph};
use asymrado::linalg::{fmt_fraction, parse_rational, to_f64, ColumnSet, Rational};
use asymrado::matrix_io::{parse_catalogue, parse_matrix};
use asymrado::rado::{m_asym, sort_by_density, structural_checks, Irredundancy, RadoProfile};
use asymrado::ramsey::{decide_arrow, supersaturation_scan, zeta_estimate, ArrowVerdict, RamseyInstance, ScanValue};
use asymrado::threshold::{
    concentration_check, janson_bound, janson_bound_exact, preflight, threshold_scan, ConcentrationConfig,
    PreflightConfig, ScanConfig,
};
use asymrado::weights::{boundedness_audit, solve_weights, WeightContext, WeightFunction};
use asymrado::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "asymrado", version, about = "Asymmetric Rado-Ramsey threshold toolkit")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Matrices {
    /// Catalogue names (schur, ap3..ap6, a+b for diagonal blocks) or matrix files.
    #[arg(value_name = "MATRIX")]
    positional: Vec<String>,
    #[arg(long = "matrix", value_name = "FILE|NAME")]
    flagged: Vec<String>,
}

impl Matrices {
    fn names(&self) -> Vec<String> {
        self.positional.iter().chain(&self.flagged).cloned().collect()
    }

    fn load(&self) -> Result<Vec<RadoProfile>, Error> {
        let names = self.names();
        if names.is_empty() {
            return Err(Error::input("no matrix given"));
        }
        let mut out = Vec::new();
        for n in &names {
            out.extend(load_matrices(n)?);
        }
        Ok(out)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate matrices and report rank, certificates and densities.
    Check {
        #[command(flatten)]
        matrices: Matrices,
        /// Also report m(A_1, A_2) for the first two matrices.
        #[arg(long)]
        asym: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Fit projection-count exponents, and optionally the boundedness exponent.
    Audit {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long, alias = "n-grid", value_delimiter = ',', default_value = "100,200,400")]
        grid: Vec<u32>,
        /// Second matrix for the boundedness audit.
        #[arg(long)]
        boundedness: Option<String>,
        /// Also report tameness and the co-degree function at this n.
        #[arg(long)]
        n: Option<u32>,
        /// Evaluate the co-degree function at this tau (needs --n).
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Solve for the weight function of a pair and report r_x and minimisers.
    Weights {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decide [n] -> (A_1, ..., A_r) exactly.
    Arrow {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long)]
        n: u32,
        /// Repeat a single matrix r times.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Also report the supersaturation minimum (single matrix, r colours).
        #[arg(long)]
        supersaturation: bool,
        /// Also report the zeta proxy.
        #[arg(long)]
        zeta: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the ordered solution hypergraph at n.
    Enumerate {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long)]
        n: u32,
        /// Print the projection onto these 1-based coordinates instead.
        #[arg(long, value_delimiter = ',')]
        project: Vec<usize>,
    },
    /// Monte-Carlo threshold scan at p = C n^(-1/m(A_1, A_2)).
    Scan {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        c_grid: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        cprime: f64,
        /// Ground-set size for the zeta proxy in the preflight.
        #[arg(long, default_value_t = 16)]
        zeta_n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Empirical concentration of projected counts in the weighted random set.
    Concentrate {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long)]
        n: u32,
        /// q directly.
        #[arg(long, conflicts_with = "c")]
        q: Option<f64>,
        /// q = C n^(-1/m(A_1, A_2)).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long)]
        seed: u64,
        /// Ignore the part assignment when counting.
        #[arg(long)]
        literal: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Suen-Janson bound for the solution hypergraph of A_1 under weights for (A_1, A_2).
    Janson {
        #[command(flatten)]
        matrices: Matrices,
        #[arg(long)]
        n: u32,
        /// A rational (exact when the weights are integral) or a decimal.
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Parse { .. } => 1,
        Error::Validation(_) | Error::Ordering { .. } | Error::Internal(_) => 2,
        Error::Guard { .. } | Error::Budget { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// A catalogue name, a matrix file, or a catalogue file with `[name]`
/// sections (which contributes all of its matrices).
fn load_matrices(arg: &str) -> Result<Vec<RadoProfile>, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Error::input(format!("{arg}: {e}")))?;
        if text.lines().any(|l| l.trim_start().starts_with('[')) {
            return Ok(parse_catalogue(&text)?
                .into_iter()
                .map(|(name, m)| RadoProfile::new(name, m))
                .collect());
        }
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        return Ok(vec![RadoProfile::new(name, parse_matrix(&text)?)]);
    }
    Ok(vec![load_matrix(arg)?])
}

fn load_matrix(arg: &str) -> Result<RadoProfile, Error> {
    if Path::new(arg).is_file() {
        let mut ps = load_matrices(arg)?;
        if ps.len() != 1 {
            return Err(Error::input(format!("{arg} holds {} matrices, expected one", ps.len())));
        }
        return Ok(ps.remove(0));
    }
    catalogue::profile(arg).map_err(|_| {
        Error::input(format!(
            "'{arg}' is neither a file nor a catalogue name ({})",
            catalogue::all_names().join(", ")
        ))
    })
}

fn show(q: &Rational) -> String {
    format!("{} (~{:.6})", fmt_fraction(q), to_f64(q))
}

fn repeat(mut profiles: Vec<RadoProfile>, r: Option<usize>) -> Result<Vec<RadoProfile>, Error> {
    if let Some(r) = r {
        if r == 0 {
            return Err(Error::input("--r must be positive"));
        }
        if profiles.len() == 1 {
            profiles = vec![profiles[0].clone(); r];
        } else if profiles.len() != r {
            return Err(Error::input("--r disagrees with the number of matrices"));
        }
    }
    Ok(profiles)
}

fn pair(matrices: &Matrices) -> Result<(RadoProfile, RadoProfile), Error> {
    let mut ps = matrices.load()?;
    match ps.len() {
        1 => Ok((ps[0].clone(), ps.remove(0))),
        2 => {
            let b = ps.pop().unwrap();
            Ok((ps.pop().unwrap(), b))
        }
        _ => Err(Error::input("expected one or two matrices")),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serialisable"));
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Check { matrices, asym, format } => cmd_check(&matrices, asym, format),
        Command::Audit {
            matrices,
            grid,
            boundedness,
            n,
            tau,
            out,
            format,
        } => cmd_audit(&matrices, &grid, boundedness.as_deref(), n, tau.as_deref(), out.as_deref(), format),
        Command::Weights { matrices, format } => cmd_weights(&matrices, format),
        Command::Arrow {
            matrices,
            n,
            r,
            budget,
            supersaturation,
            zeta,
            format,
        } => cmd_arrow(&matrices, n, r, budget, supersaturation, zeta, format),
        Command::Enumerate { matrices, n, project } => cmd_enumerate(&matrices, n, &project),
        Command::Scan {
            matrices,
            r,
            n_grid,
            c_grid,
            trials,
            seed,
            budget,
            epsilon,
            cprime,
            zeta_n,
            out,
            format,
        } => {
            let profiles = repeat(matrices.load()?, r)?;
            let config = ScanConfig {
                n_grid,
                c_grid,
                trials,
                seed,
                budget,
            };
            let pre = PreflightConfig {
                epsilon,
                cprime,
                zeta_n,
                budget,
            };
            cmd_scan(&profiles, &config, &pre, out.as_deref(), format)
        }
        Command::Concentrate {
            matrices,
            n,
            q,
            c,
            trials,
            seed,
            literal,
            format,
        } => cmd_concentrate(&matrices, n, q, c, trials, seed, literal, format),
        Command::Janson { matrices, n, q, format } => cmd_janson(&matrices, n, &q, format),
    }
}

fn profile_json(p: &RadoProfile) -> Value {
    let density = p.m_density().ok();
    json!({
        "name": p.name(),
        "k": p.k(),
        "rank": p.rank(),
        "dropped_rows": p.dropped_rows(),
        "partition_regular": p.is_partition_regular(),
        "certificate": p.certificate().map(|c| c.to_string()),
        "irredundancy": p.irredundancy(),
        "rado": p.is_rado(),
        "m": density.map(|d| fmt_fraction(&d.value)),
        "m_decimal": density.map(|d| to_f64(&d.value)),
        "m_maximiser": density.map(|d| d.maximiser.to_string()),
        "density_issue": p.density_issue(),
    })
}

fn cmd_check(matrices: &Matrices, asym: bool, format: Format) -> Result<u8, Error> {
    let profiles = matrices.load()?;
    let mut code = 0;
    let mut text = String::new();
    let mut reports = Vec::new();
    for p in &profiles {
        if !p.is_rado() {
            code = 2;
        }
        reports.push(profile_json(p));
        writeln!(text, "[{}] k = {}, rank = {}", p.name(), p.k(), p.rank()).unwrap();
        if !p.dropped_rows().is_empty() {
            writeln!(text, "  dependent rows dropped: {:?}", p.dropped_rows()).unwrap();
        }
        match p.certificate() {
            Some(c) => writeln!(text, "  partition-regular: yes, columns condition {c}").unwrap(),
            None => writeln!(text, "  partition-regular: no (columns condition fails)").unwrap(),
        }
        let irr = match p.irredundancy() {
            Irredundancy::Confirmed { witness } => format!("yes, witness {witness:?}"),
            Irredundancy::RefutedUpToBound { bound } => format!("no distinct-entry solution up to {bound}"),
            Irredundancy::Unknown { reason } => format!("unknown ({reason})"),
        };
        writeln!(text, "  irredundant: {irr}").unwrap();
        match p.m_density() {
            Ok(d) => writeln!(text, "  m(A) = {}, maximiser {}", show(&d.value), d.maximiser).unwrap(),
            Err(e) => writeln!(text, "  m(A): {e}").unwrap(),
        }
        if p.is_rado() {
            let s = structural_checks(p)?;
            writeln!(text, "  structural checks: {}", if s.holds() { "hold" } else { "FAIL" }).unwrap();
        }
    }
    let mut asym_json = Value::Null;
    if asym {
        if profiles.len() < 2 {
            return Err(Error::input("--asym needs two matrices"));
        }
        let d = m_asym(&profiles[0], &profiles[1])?;
        writeln!(
            text,
            "m({}, {}) = {}, maximiser {}",
            profiles[0].name(),
            profiles[1].name(),
            show(&d.value),
            d.maximiser
        )
        .unwrap();
        asym_json = json!({"value": fmt_fraction(&d.value), "decimal": to_f64(&d.value), "maximiser": d.maximiser.to_string()});
    }
    match format {
        Format::Json => print_json(&json!({"matrices": reports, "asymmetric": asym_json})),
        _ => print!("{text}"),
    }
    Ok(code)
}

fn cmd_audit(
    matrices: &Matrices,
    grid: &[u32],
    boundedness: Option<&str>,
    n: Option<u32>,
    tau: Option<&str>,
    out: Option<&Path>,
    format: Format,
) -> Result<u8, Error> {
    let profiles = matrices.load()?;
    if profiles.len() != 1 {
        return Err(Error::input("audit takes one matrix"));
    }
    let a = &profiles[0];
    a.require_rado()?;
    let audit = projection_count_audit(a, grid)?;
    let mut csv = String::from("I,exponent,slope");
    for n in &audit.grid {
        write!(csv, ",count_{n}").unwrap();
    }
    csv.push('\n');
    for row in &audit.rows {
        write!(csv, "\"{}\",{},{}", row.set, row.exponent, row.slope).unwrap();
        for c in &row.counts {
            write!(csv, ",{c}").unwrap();
        }
        csv.push('\n');
    }
    let mut text = format!("projection counts for {} on grid {:?}\n", a.name(), grid);
    for row in &audit.rows {
        writeln!(
            text,
            "  I = {:<10} exponent {:>2}  slope {:.4}  deviation {:+.4}",
            row.set.to_string(),
            row.exponent,
            row.slope,
            row.deviation()
        )
        .unwrap();
    }
    let mut report = json!({
        "matrix": a.name(),
        "grid": grid,
        "rows": audit.rows.iter().map(|r| json!({
            "set": r.set.to_string(), "exponent": r.exponent, "slope": r.slope, "counts": r.counts,
        })).collect::<Vec<_>>(),
    });
    if let Some(b) = boundedness {
        let b = load_matrix(b)?;
        let w = solve_weights(a, &b)?;
        let bd = boundedness_audit(a, &b, &w, grid)?;
        writeln!(
            text,
            "boundedness against {}: weights {}, slope {:.4}, target {} , deviation {:+.4}",
            b.name(),
            w,
            bd.slope,
            show(&bd.target),
            bd.deviation()
        )
        .unwrap();
        report["boundedness"] = json!({
            "against": b.name(), "weights": w.to_string(), "slope": bd.slope,
            "target": fmt_fraction(&bd.target), "points": bd.points.iter().map(|p| json!({
                "n": p.n, "log_minimum": p.log_minimum,
                "minimisers": p.empirical_minimisers.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
    }
    if let Some(n) = n {
        let h = OrderedSolutionHypergraph::enumerate(a, n)?;
        let t = h.tameness()?;
        writeln!(
            text,
            "at n = {n}: {} edges, tameness constant {} at I = {}, W = {}, cherry bound {}",
            h.edge_count(),
            show(&t.constant),
            t.inner,
            t.window,
            if t.cherry_holds { "holds" } else { "FAILS" }
        )
        .unwrap();
        report["tameness"] = json!({"n": n, "constant": fmt_fraction(&t.constant), "inner": t.inner.to_string(),
            "window": t.window.to_string(), "cherry_holds": t.cherry_holds});
        if let Some(tau) = tau {
            let tau = parse_rational(tau)?;
            let f = h.unordered().codegree_function()?;
            let v = f.evaluate(&tau)?;
            writeln!(text, "co-degree function at tau = {}: delta = {}", fmt_fraction(&tau), show(&v.delta)).unwrap();
            report["codegree"] = json!({"tau": fmt_fraction(&tau), "delta": fmt_fraction(&v.delta),
                "delta_j": v.delta_j.iter().map(fmt_fraction).collect::<Vec<_>>()});
        }
    } else if tau.is_some() {
        return Err(Error::input("--tau needs --n"));
    }
    if let Some(dir) = out {
        write_out(dir, "audit.csv", &csv)?;
        write_out(dir, "audit.json", &serde_json::to_string_pretty(&report).unwrap())?;
    }
    match format {
        Format::Json => print_json(&report),
        Format::Csv => print!("{csv}"),
        Format::Text => print!("{text}"),
    }
    Ok(0)
}

fn cmd_weights(matrices: &Matrices, format: Format) -> Result<u8, Error> {
    let (a1, a2) = pair(matrices)?;
    let ctx = WeightContext::new(&a1, &a2)?;
    let w = ctx.solve()?;
    let mins = ctx.minimiser_sets(&w)?;
    let r: Vec<Rational> = (0..w.k()).map(|x| ctx.r_x(&w, x)).collect::<Result<_, _>>()?;
    match format {
        Format::Json => print_json(&json!({
            "a1": a1.name(), "a2": a2.name(),
            "m12": fmt_fraction(ctx.m12()),
            "weights": serde_json::from_str::<Value>(&w.to_json()).unwrap(),
            "r_x": r.iter().map(fmt_fraction).collect::<Vec<_>>(),
            "minimum": fmt_fraction(&mins.minimum),
            "minimisers": mins.sets.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "proper": mins.proper,
        })),
        _ => {
            println!("m({}, {}) = {}", a1.name(), a2.name(), show(ctx.m12()));
            for (i, wi) in w.weights().iter().enumerate() {
                println!("  w({}) = {}   r_{} = {}", i + 1, show(wi), i + 1, fmt_fraction(&r[i]));
            }
            let sets: Vec<String> = mins.sets.iter().map(|s| s.to_string()).collect();
            println!("minimum exponent {} attained at {}", show(&mins.minimum), sets.join(" "));
            println!("every index covered by a minimiser: {}", mins.proper);
        }
    }
    Ok(0)
}

fn cmd_arrow(
    matrices: &Matrices,
    n: u32,
    r: Option<usize>,
    budget: u64,
    supersaturation: bool,
    zeta: bool,
    format: Format,
) -> Result<u8, Error> {
    let profiles = repeat(matrices.load()?, r)?;
    let names: Vec<&str> = profiles.iter().map(|p| p.name()).collect();
    let inst = RamseyInstance::interval(n, profiles.clone())?;
    let verdict = decide_arrow(&inst, budget)?;
    let mut report = json!({"n": n, "matrices": names, "result": verdict});
    let mut text = format!("[{n}] -> ({}): {} after {} nodes\n", names.join(", "), verdict.label(), verdict.nodes());
    if let ArrowVerdict::GoodColouring { colouring, .. } = &verdict {
        text.push_str(&colouring.to_lines());
    }
    if supersaturation {
        if profiles.len() != 1 && !profiles.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::input("--supersaturation needs a single matrix"));
        }
        let s = supersaturation_scan(n, profiles.len(), &profiles[0], budget)?;
        let v = match &s.value {
            ScanValue::Exact { value } => value.to_string(),
            ScanValue::Bounded { lower, upper } => format!("in [{lower}, {upper}]"),
        };
        writeln!(text, "min over colourings of max monochromatic solutions: {v}").unwrap();
        report["supersaturation"] = serde_json::to_value(&s).unwrap();
    }
    if zeta {
        let z = zeta_estimate(n, &profiles, budget)?;
        let v = match &z.value {
            ScanValue::Exact { value } => show(value),
            ScanValue::Bounded { lower, upper } => format!("in [{}, {}]", show(lower), show(upper)),
        };
        writeln!(text, "zeta proxy: {v}").unwrap();
        report["zeta"] = json!({
            "exact": z.value.is_exact(),
            "lower": fmt_fraction(z.value.lower()),
            "upper": fmt_fraction(z.value.upper()),
            "witness": z.witness,
        });
    }
    match format {
        Format::Json => print_json(&report),
        _ => print!("{text}"),
    }
    Ok(if matches!(verdict, ArrowVerdict::BudgetExhausted { .. }) { 3 } else { 0 })
}

fn cmd_enumerate(matrices: &Matrices, n: u32, project: &[usize]) -> Result<u8, Error> {
    let profiles = matrices.load()?;
    if profiles.len() != 1 {
        return Err(Error::input("enumerate takes one matrix"));
    }
    let a = &profiles[0];
    let h = OrderedSolutionHypergraph::enumerate(a, n)?;
    if project.is_empty() {
        print!("{}", h.dump_edges());
        return Ok(0);
    }
    if project.iter().any(|&i| i == 0 || i > a.k()) {
        return Err(Error::input(format!("projection coordinates must lie in 1..={}", a.k())));
    }
    let p = h.project(ColumnSet::from_indices(project.iter().map(|i| i - 1)))?;
    let mut out = String::new();
    for (key, count) in p.iter() {
        let key: Vec<String> = key.iter().map(u32::to_string).collect();
        writeln!(out, "{} {count}", key.join(" ")).unwrap();
    }
    print!("{out}");
    Ok(0)
}

fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(serde_json::to_vec(config).unwrap());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_scan(
    profiles: &[RadoProfile],
    config: &ScanConfig,
    pre: &PreflightConfig,
    out: Option<&Path>,
    format: Format,
) -> Result<u8, Error> {
    let curve = threshold_scan(profiles, config)?;
    let mut sorted = profiles.to_vec();
    sort_by_density(&mut sorted)?;
    let n_max = *config.n_grid.iter().max().unwrap();
    let checks = preflight(&sorted, n_max, pre)?;
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("warning: preflight {}: {}", c.name, c.detail);
    }
    for notice in &curve.notices {
        eprintln!("notice: {notice}");
    }
    let config_json = json!({
        "matrices": sorted.iter().map(|p| json!({"name": p.name(), "rows": p.matrix().to_rows()
            .iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()}))
            .collect::<Vec<_>>(),
        "scan": config,
        "preflight": pre,
    });
    let mut ns = config.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let manifest = json!({
        "config": config_json,
        "config_hash": config_hash(&config_json),
        "density": curve.density,
        "notices": curve.notices,
        "preflight": checks,
        "crossing": ns.iter().map(|&n| json!({"n": n, "c_star": curve.crossing(n)})).collect::<Vec<_>>(),
    });
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&curve).unwrap() + "\n",
        _ => curve.to_csv(),
    };
    match out {
        Some(dir) => {
            let name = if format == Format::Json { "scan.json" } else { "scan.csv" };
            write_out(dir, name, &body)?;
            write_out(dir, "manifest.json", &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
        }
        None => print!("{body}"),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_concentrate(
    matrices: &Matrices,
    n: u32,
    q: Option<f64>,
    c: Option<f64>,
    trials: u32,
    seed: u64,
    literal: bool,
    format: Format,
) -> Result<u8, Error> {
    let (a1, a2) = pair(matrices)?;
    let ctx = WeightContext::new(&a1, &a2)?;
    let w = ctx.solve()?;
    let q = match (q, c) {
        (Some(q), None) => q,
        (None, Some(c)) => (c * (n as f64).powf(-1.0 / to_f64(ctx.m12()))).min(1.0),
        _ => return Err(Error::input("give exactly one of --q and --c")),
    };
    let cfg = ConcentrationConfig {
        n,
        q,
        trials,
        seed,
        respect_parts: !literal,
    };
    let report = concentration_check(&a1, &w, &cfg)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    match format {
        Format::Json => print_json(&json!({"config": cfg, "weights": w.to_string(), "report": report})),
        _ => {
            println!("q = {q}, weights {w}, {trials} trials");
            for row in &report.rows {
                println!(
                    "  I = {:<10} |H_I| = {:>12}  threshold {:>14.3}  mean X_I {:>12.3}  frequency {:.3}",
                    row.set, row.projection_size, row.threshold, row.mean_count, row.frequency
                );
            }
        }
    }
    Ok(0)
}

fn cmd_janson(matrices: &Matrices, n: u32, q: &str, format: Format) -> Result<u8, Error> {
    let (a1, a2) = pair(matrices)?;
    let w: WeightFunction = solve_weights(&a1, &a2)?;
    let h = OrderedSolutionHypergraph::enumerate(&a1, n)?;
    let exact_q = parse_rational(q).ok();
    let (terms, bound, exact) = match exact_q {
        Some(q) if w.is_integral() => {
            let (t, b) = janson_bound_exact(&h, &q, &w)?;
            (
                [fmt_fraction(&t.mu), fmt_fraction(&t.big_delta), fmt_fraction(&t.small_delta)],
                b,
                true,
            )
        }
        _ => {
            let qf: f64 = match &exact_q {
                Some(q) => to_f64(q),
                None => q.parse().map_err(|_| Error::input(format!("cannot read q = '{q}'")))?,
            };
            let (t, b) = janson_bound(&h, qf, &w)?;
            ([t.mu.to_string(), t.big_delta.to_string(), t.small_delta.to_string()], b, false)
        }
    };
    match format {
        Format::Json => print_json(&json!({
            "n": n, "q": q, "exact": exact, "mu": terms[0], "Delta": terms[1], "delta": terms[2],
            "exponent": bound.exponent, "bound": bound.bound, "binding": bound.binding,
        })),
        _ => {
            println!("mu = {}\nDelta = {}\ndelta = {}", terms[0], terms[1], terms[2]);
            println!("bound = exp(-{}) = {} (binding term {})", bound.exponent, bound.bound, bound.binding);
        }
    }
    Ok(0)
}
