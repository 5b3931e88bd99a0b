//! `toric-disc`: command-line front end. Every subcommand is a thin adapter
//! over the library; output is deterministic for a given configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use toric_disc::corpus::{verify, verify_all, ExpectedCase, VerificationReport};
use toric_disc::geometry::{Geometry, BUILTIN_NAMES};
use toric_disc::series::text::format_rational;
use toric_disc::slab::TruncationConfig;
use toric_disc::solver::{
    av_potential_split, untwisted_leading_constant, CoefficientTable, Convention,
};
use toric_disc::{Error, TruncatedSeries};

const TRUNCATION_ENV: &str = "TORIC_DISC_TRUNCATION";

const EXIT_CONFIG: u8 = 1;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "toric-disc", version)]
#[command(about = "Exact disc potentials of toric Calabi-Yau mirrors")]
#[command(after_help = "Truncation precedence: flags, then the TORIC_DISC_TRUNCATION \
    environment variable (\"Q_TOTAL,UV_MAX,Z_WINDOW\"), then the geometry's default.\n\
    Exit status: 0 success, 1 configuration error, 2 usage error, 3 verification mismatch.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hypergeometric series g_i, mirror map q(Q), inverse Q(q) and corrections delta_i
    MirrorMap {
        #[command(flatten)]
        geo: GeometryArgs,
        /// Order of the series (default: the geometry's q_total)
        #[arg(long)]
        order: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The slab function f with its term provenance
    Slab {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The solution Z of uv = f(-Z, ...) and the equivariant potential log Z
    Potential {
        #[command(flatten)]
        geo: GeometryArgs,
        /// Restrict to uv = 0
        #[arg(long)]
        uv_zero: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Coefficient table of log Z under a sign convention
    Table {
        #[command(flatten)]
        geo: GeometryArgs,
        /// inner, plain, negated or phase (default: the geometry's)
        #[arg(long, value_parser = parse_convention)]
        convention: Option<Convention>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare a built-in case (or `all`) with its stored reference values
    Verify {
        /// C3, KP2-inner, KP2-outer, KP3, local-surface-A0, abelian-family, all,
        /// or a path to a case file in the corpus format
        case: String,
        /// Emit the verification report in this format
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
        /// Include wall-clock runtimes (output is then not reproducible)
        #[arg(long)]
        timings: bool,
        /// Write output to this file instead of stdout
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Term-wise antiderivative of log Z at uv = 0 in one phase variable
    AvPotential {
        #[command(flatten)]
        geo: GeometryArgs,
        /// Phase variable to integrate in (default: the first one)
        #[arg(long)]
        wrt: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct GeometryArgs {
    /// Built-in name (C3, KP2-inner, KP2-outer, KP3, local-surface-A0,
    /// abelian-family) or path to a JSON config
    #[arg(long, short)]
    geometry: String,
    /// Maximal total Kähler degree
    #[arg(long)]
    q_total: Option<u32>,
    /// Maximal uv order
    #[arg(long)]
    uv_max: Option<u32>,
    /// Upper bound on printed phase exponents
    #[arg(long)]
    z_window: Option<u32>,
    /// Chamber of a toric geometry: 0-based point index in sigma
    #[arg(long)]
    chamber: Option<usize>,
    /// Frame matrix as JSON rows, e.g. '[[1,-1],[0,-1]]' (needs --chamber)
    #[arg(long, requires = "chamber")]
    frame: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Shorthand for --format json
    #[arg(long)]
    json: bool,
    /// Write output to this file instead of stdout
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable
    Pretty,
    /// Canonical series text, `num/den  e1 e2 ...`
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn env_truncation() -> Result<Option<[u32; 3]>, Error> {
    let Ok(raw) = std::env::var(TRUNCATION_ENV) else {
        return Ok(None);
    };
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let bad = || config(format!("{TRUNCATION_ENV} must be Q_TOTAL,UV_MAX,Z_WINDOW, got `{raw}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0u32; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| bad())?;
    }
    Ok(Some(v))
}

impl GeometryArgs {
    fn resolve(&self) -> Result<Geometry, Error> {
        let mut g = Geometry::resolve(&self.geometry)?;
        if let Some(chamber) = self.chamber {
            let matrix = self
                .frame
                .as_deref()
                .map(serde_json::from_str::<Vec<Vec<i64>>>)
                .transpose()
                .map_err(|e| config(format!("--frame: {e}")))?;
            g = g.with_frame(chamber, matrix)?;
        }
        let mut t: TruncationConfig = g.truncation.clone();
        if let Some([q, uv, w]) = env_truncation()? {
            (t.q_total, t.uv_max, t.z_window) = (q, uv, w);
        }
        t.q_total = self.q_total.unwrap_or(t.q_total);
        t.uv_max = self.uv_max.unwrap_or(t.uv_max);
        t.z_window = self.z_window.unwrap_or(t.z_window);
        Ok(g.with_truncation(t))
    }
}

fn var_names(s: &TruncatedSeries) -> Vec<&str> {
    s.ring().vars().names().collect()
}

fn series_json(name: &str, s: &TruncatedSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| json!({ "coefficient": format_rational(c), "exponents": e }))
        .collect();
    json!({ "name": name, "variables": var_names(s), "terms": terms })
}

/// Renders named series plus notes in the requested format.
fn render(list: &[(String, TruncatedSeries)], notes: &[(&str, Value)], fmt: Format) -> String {
    let note_text = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let mut out = String::new();
    match fmt {
        Format::Pretty => {
            for (name, s) in list {
                out += &format!("{name} = {s}\n");
            }
            for (k, v) in notes {
                out += &format!("{k}: {}\n", note_text(v));
            }
        }
        Format::Text => {
            for (k, v) in notes {
                out += &format!("# {k}: {}\n", note_text(v));
            }
            for (name, s) in list {
                out += &format!("# {name}\n# variables: {}\n", var_names(s).join(" "));
                out += &s.to_canonical_text();
            }
        }
        Format::Csv => {
            for (i, (name, s)) in list.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out += &format!("series,coefficient,{}\n", var_names(s).join(","));
                for (e, c) in s.terms() {
                    let exps: Vec<String> = e.iter().map(i32::to_string).collect();
                    out += &format!("{name},{},{}\n", format_rational(c), exps.join(","));
                }
            }
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert(
                "series".into(),
                list.iter().map(|(n, s)| series_json(n, s)).collect::<Vec<_>>().into(),
            );
            for (k, v) in notes {
                doc.insert((*k).into(), v.clone());
            }
            out = serde_json::to_string_pretty(&Value::Object(doc)).expect("json") + "\n";
        }
    }
    out
}

fn mirror_map(geo: &GeometryArgs, order: Option<u32>, fmt: Format) -> Result<String, Error> {
    let g = geo.resolve()?;
    let order = order.unwrap_or(g.truncation.q_total);
    let Some(data) = g.toric_data() else {
        return Err(config(format!("`{}` is given by a series and has no mirror map", g.name)));
    };
    let mm = g.mirror_map(order)?.expect("toric geometry");
    let mut list = Vec::new();
    for i in 0..data.m() {
        list.push((format!("g{i}"), mm.g(i).clone()));
    }
    let n = mm.forward().len();
    for (k, s) in mm.forward().iter().enumerate() {
        list.push((indexed("q", k, n), s.clone()));
    }
    for (k, s) in mm.inverse().iter().enumerate() {
        list.push((indexed("Q", k, n), s.clone()));
    }
    for i in 0..data.m() {
        list.push((format!("delta{i}"), mm.delta(i)?));
    }
    let notes = [
        ("order", json!(order)),
        ("inverse_rounds", json!(mm.rounds())),
        ("round_trip", json!(mm.round_trip_holds()?)),
    ];
    Ok(render(&list, &notes, fmt))
}

fn indexed(stem: &str, k: usize, count: usize) -> String {
    if count == 1 {
        stem.to_string()
    } else {
        format!("{stem}{}", k + 1)
    }
}

fn slab(geo: &GeometryArgs, fmt: Format) -> Result<String, Error> {
    let g = geo.resolve()?;
    let slab = g.slab()?;
    let provenance: Vec<Value> = slab
        .provenance()
        .iter()
        .map(|t| json!({ "point": t.index, "z_exponent": t.z_exponent, "charge": t.charge }))
        .collect();
    let untwisted = untwisted_leading_constant(&slab)?;
    let mut notes = vec![
        ("solve_variable", json!(slab.solve_var())),
        ("untwisted_leading_constant", json!(untwisted.to_string())),
    ];
    if fmt == Format::Pretty {
        for t in slab.provenance() {
            notes.push(("term", json!(format!(
                "point {} z^{:?} charge {:?}",
                t.index, t.z_exponent, t.charge
            ))));
        }
    } else {
        notes.push(("provenance", Value::Array(provenance)));
    }
    Ok(render(&[("f".to_string(), slab.series().clone())], &notes, fmt))
}

fn potential(geo: &GeometryArgs, uv_zero: bool, fmt: Format) -> Result<String, Error> {
    let g = geo.resolve()?;
    let sol = g.solve()?;
    let mut z = sol.z().clone();
    if uv_zero {
        z = sol.at_uv_zero()?;
    }
    let log = z.log()?;
    let notes = [
        ("newton_rounds", json!(sol.rounds())),
        ("residual_zero", json!(sol.residual_checked())),
    ];
    Ok(render(&[("Z".to_string(), z), ("log Z".to_string(), log)], &notes, fmt))
}

fn join_ints(v: &[i32]) -> String {
    v.iter().map(i32::to_string).collect::<Vec<_>>().join(",")
}

/// Fills gaps in a one-variable axis so that zero rows and columns still show.
fn contiguous(axis: &mut Vec<Vec<i32>>) {
    if axis.first().is_some_and(|a| a.len() == 1) {
        let lo = axis.iter().map(|a| a[0]).min().unwrap_or(0).min(0);
        let hi = axis.iter().map(|a| a[0]).max().unwrap_or(0);
        *axis = (lo..=hi).map(|x| vec![x]).collect();
    }
}

fn table(geo: &GeometryArgs, conv: Option<Convention>, fmt: Format) -> Result<String, Error> {
    let g = geo.resolve()?;
    let conv = conv.unwrap_or(g.convention);
    let t: CoefficientTable = g.table(conv)?;
    let mut out = String::new();
    match fmt {
        Format::Pretty => {
            out += &format!("# {} convention {}\n", g.name, conv);
            let zlabel = t.z_names().join(",");
            let qlabel = t.q_names().join(",");
            for uv in t.uv_orders() {
                let (mut rows, mut cols) = t.block_axes(uv);
                contiguous(&mut rows);
                contiguous(&mut cols);
                let mut grid = vec![std::iter::once(format!("{zlabel} \\ {qlabel}"))
                    .chain(cols.iter().map(|c| join_ints(c)))
                    .collect::<Vec<_>>()];
                for r in &rows {
                    let mut line = vec![join_ints(r)];
                    for c in &cols {
                        let key = toric_disc::solver::TableKey { uv, z: r.clone(), q: c.clone() };
                        line.push(t.get(&key).to_string());
                    }
                    grid.push(line);
                }
                let widths: Vec<usize> = (0..grid[0].len())
                    .map(|j| grid.iter().map(|l| l[j].len()).max().unwrap_or(0))
                    .collect();
                out += &format!("\nord(uv)={uv}\n");
                for line in grid {
                    let cells: Vec<String> =
                        line.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
                    out += cells.join("  ").trim_end();
                    out.push('\n');
                }
            }
        }
        Format::Csv => {
            let mut header = vec!["uv".to_string()];
            header.extend(t.z_names().iter().cloned());
            header.extend(t.q_names().iter().cloned());
            header.push("value".into());
            out += &(header.join(",") + "\n");
            for (k, v) in t.entries() {
                let mut cells = vec![k.uv.to_string()];
                cells.extend(k.z.iter().map(i32::to_string));
                cells.extend(k.q.iter().map(i32::to_string));
                cells.push(v.to_string());
                out += &(cells.join(",") + "\n");
            }
        }
        Format::Json => {
            let entries: Vec<Value> = t
                .entries()
                .iter()
                .map(|(k, v)| json!({ "uv": k.uv, "z": k.z, "q": k.q, "value": v.to_string() }))
                .collect();
            let doc = json!({
                "geometry": g.name,
                "convention": conv.name(),
                "z_variables": t.z_names(),
                "q_variables": t.q_names(),
                "entries": entries,
            });
            out = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        }
        Format::Text => {
            return Err(config("table supports --format pretty, csv or json"));
        }
    }
    Ok(out)
}

fn av_potential(geo: &GeometryArgs, wrt: Option<&str>, fmt: Format) -> Result<String, Error> {
    let g = geo.resolve()?;
    let sol = g.solve()?;
    let wrt = match wrt {
        Some(w) => w.to_string(),
        None => sol
            .z()
            .ring()
            .vars()
            .phase_names()
            .first()
            .cloned()
            .ok_or_else(|| config(format!("`{}` has no phase variable to integrate in", g.name)))?,
    };
    let (integrated, logs) = av_potential_split(&sol, &wrt)?;
    let mut list = vec![("AV".to_string(), integrated)];
    let notes = [("wrt", json!(wrt)), ("logarithmic_terms", json!(logs.len()))];
    if !logs.is_zero() {
        list.push(("not integrated".to_string(), logs));
    }
    Ok(render(&list, &notes, fmt))
}

fn report_json(r: &VerificationReport, timings: bool) -> Value {
    let mut v = serde_json::to_value(r).expect("json");
    v["passed"] = json!(r.passed());
    if !timings {
        v.as_object_mut().expect("object").remove("runtime_ms");
    }
    v
}

fn run_verify(case: &str, json_report: bool, timings: bool) -> Result<(String, bool), Error> {
    let reports = if case == "all" {
        verify_all()?
    } else if BUILTIN_NAMES.contains(&case) {
        vec![verify(&ExpectedCase::builtin(case)?)?]
    } else {
        let text = std::fs::read_to_string(case)
            .map_err(|_| Error::UnknownCase(case.to_string()))?;
        vec![verify(&ExpectedCase::parse(&text)?)?]
    };
    let ok = reports.iter().all(VerificationReport::passed);
    let out = if json_report {
        let docs: Vec<Value> = reports.iter().map(|r| report_json(r, timings)).collect();
        let doc = if case == "all" { Value::Array(docs) } else { docs[0].clone() };
        serde_json::to_string_pretty(&doc).expect("json") + "\n"
    } else {
        let mut out = String::new();
        for r in &reports {
            out += &r.summary();
            if timings {
                out += &format!(" ({:.0} ms)", r.runtime_ms);
            }
            out.push('\n');
            for (label, list) in [("mismatch", &r.mismatches), ("cross-check", &r.cross_mismatches)] {
                for m in list {
                    out += &format!(
                        "  {label} [{}] {:?} {}: expected {}, computed {}\n",
                        m.section, m.target, m.coords, m.expected, m.computed
                    );
                }
            }
        }
        out
    };
    Ok((out, ok))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::MirrorMap { geo, order, out } => {
            mirror_map(geo, *order, out.format()).and_then(|t| emit(&t, out.out.as_ref()))
        }
        Command::Slab { geo, out } => slab(geo, out.format()).and_then(|t| emit(&t, out.out.as_ref())),
        Command::Potential { geo, uv_zero, out } => {
            potential(geo, *uv_zero, out.format()).and_then(|t| emit(&t, out.out.as_ref()))
        }
        Command::Table { geo, convention, out } => {
            table(geo, *convention, out.format()).and_then(|t| emit(&t, out.out.as_ref()))
        }
        Command::AvPotential { geo, wrt, out } => {
            av_potential(geo, wrt.as_deref(), out.format()).and_then(|t| emit(&t, out.out.as_ref()))
        }
        Command::Verify { case, report, timings, out } => {
            match run_verify(case, report.is_some(), *timings) {
                Ok((text, ok)) => match emit(&text, out.as_ref()) {
                    Ok(()) if ok => Ok(()),
                    Ok(()) => return ExitCode::from(EXIT_MISMATCH),
                    Err(e) => Err(e),
                },
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
