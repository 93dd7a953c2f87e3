use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use montesinos::classifier::{
    classify, cross_check, enumerate_and_classify, Classification, ClassifyError, EnumerateOptions,
    Summary, VerdictClass,
};
use montesinos::feasibility::{verify_certificate, verify_params, Certificate, Regime};
use montesinos::gauss_bonnet::{graph_euler_check, validate_graph, GeneralizedGraph};
use montesinos::rational::Rational;
use montesinos::tangle::MontesinosKnot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAMILY: i32 = 2;
pub const EXIT_ANOMALY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "montesinos",
    version,
    about = "Angle certificates for length-3 Montesinos knots"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a knot or name its residual family. Exit 0 certified, 2 family, 3 anomaly.
    Classify {
        /// e.g. "K(1/2,1/5,1/5)"
        knot: String,
        /// Print the preset/solver/orbit consistency report instead.
        #[arg(long)]
        cross_check: bool,
    },
    /// Check an angle certificate (JSON) against a knot. Exit 0 valid, 2 invalid.
    Certify { knot: String, certificate: PathBuf },
    /// Classify one knot per orbit with all q_i up to the bound.
    Enumerate {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(i64).range(2..))]
        q_bound: i64,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
        /// Count skipped links in the summary.
        #[arg(long)]
        include_links: bool,
    },
    /// Check the Euler characteristic identity on a generalized graph (JSON).
    /// Exit 0 if well formed, 2 on violations.
    GbVerify {
        graph: PathBuf,
        /// Enforce valence 6Δ at large vertices and 3 at small ones; overrides the file's `delta`.
        #[arg(long)]
        delta: Option<u32>,
    },
    /// List the known angle presets and re-verify each one.
    Presets,
}

pub fn run(cli: Cli) -> Result<i32> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let code = match cli.command {
        Command::Classify { knot, cross_check } => {
            cmd_classify(&knot, cross_check, cli.format, &mut out)?
        }
        Command::Certify { knot, certificate } => {
            cmd_certify(&knot, &certificate, cli.format, &mut out)?
        }
        Command::Enumerate {
            q_bound,
            jobs,
            include_links,
        } => cmd_enumerate(
            q_bound,
            EnumerateOptions {
                include_links,
                jobs: jobs.map(usize::from),
            },
            cli.format,
            &mut out,
        )?,
        Command::GbVerify { graph, delta } => cmd_gb_verify(&graph, delta, cli.format, &mut out)?,
        Command::Presets => cmd_presets(cli.format, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn parse_knot(literal: &str) -> Result<MontesinosKnot> {
    literal
        .parse()
        .with_context(|| format!("cannot parse knot literal {literal:?}"))
}

fn exit_code(class: VerdictClass) -> i32 {
    match class {
        VerdictClass::Certified => EXIT_OK,
        VerdictClass::Family(_) => EXIT_FAMILY,
        VerdictClass::Anomaly => EXIT_ANOMALY,
    }
}

fn classify_checked(knot: &MontesinosKnot) -> Result<Classification> {
    classify(knot).map_err(|e| match e {
        ClassifyError::NotAKnot { .. } => anyhow::anyhow!("{e}"),
        other => anyhow::Error::new(other).context(format!("classifying {knot}")),
    })
}

const CSV_HEADER: [&str; 4] = ["knot", "verdict", "family", "certificate_source"];

fn csv_record(c: &Classification) -> [String; 4] {
    [
        c.knot.to_string(),
        c.verdict.class().label().to_string(),
        c.family().map(|f| f.to_string()).unwrap_or_default(),
        c.certificate_source()
            .map(|s| s.to_string())
            .unwrap_or_default(),
    ]
}

fn table_line(c: &Classification) -> String {
    let detail = match (c.family(), c.certificate_source()) {
        (Some(f), _) => format!("family {f}"),
        (None, Some(s)) => match c.row().certificate.and_then(|cert| cert.regime) {
            Some(r) => format!("{s} {}", r.id()),
            None => s.to_string(),
        },
        (None, None) => String::new(),
    };
    format!(
        "{:<24} {:<10} {}",
        c.knot.to_string(),
        c.verdict.class().label(),
        detail
    )
    .trim_end()
    .to_string()
}

fn cmd_classify(
    literal: &str,
    want_cross_check: bool,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    let knot = parse_knot(literal)?;
    if want_cross_check {
        let report = cross_check(&knot).map_err(|e| anyhow::anyhow!("{e}"))?;
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(if report.consistent() {
            EXIT_OK
        } else {
            EXIT_ANOMALY
        });
    }
    let c = classify_checked(&knot)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&c.row())?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(CSV_HEADER)?;
            w.write_record(csv_record(&c))?;
            w.flush()?;
        }
        Format::Table => {
            writeln!(out, "{}", table_line(&c))?;
            if let montesinos::classifier::Verdict::Anomaly { report } = &c.verdict {
                writeln!(out, "{report}")?;
            }
        }
    }
    Ok(exit_code(c.verdict.class()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a valid {what}", path.display()))
}

fn cmd_certify(literal: &str, path: &Path, format: Format, out: &mut dyn Write) -> Result<i32> {
    let knot = parse_knot(literal)?;
    let components = knot.component_count();
    anyhow::ensure!(components == 1, "not a knot: {components} components");
    let cert: Certificate = read_json(path, "certificate")?;
    let violations = verify_certificate(&knot, &cert);
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string(&serde_json::json!({
                "knot": knot.to_string(),
                "valid": violations.is_empty(),
                "violations": violations,
            }))?
        )?,
        Format::Csv | Format::Table => {
            if violations.is_empty() {
                writeln!(
                    out,
                    "valid: certificate satisfies every condition for {knot}"
                )?;
            }
            for v in &violations {
                writeln!(out, "violated: {} (slack {})", v.check, v.slack)?;
            }
        }
    }
    Ok(if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAMILY
    })
}

fn summary_line(s: &Summary) -> String {
    let families: Vec<String> = (1..=5)
        .map(|f| format!("family{f}={}", s.families.get(&f).copied().unwrap_or(0)))
        .collect();
    let mut line = format!(
        "summary: q_bound={} knots={} certified_preset={} certified_solver={} {} anomalies={} certified_in_family={}",
        s.q_bound,
        s.knots,
        s.certified_preset,
        s.certified_solver,
        families.join(" "),
        s.anomalies,
        s.certified_in_family
    );
    if let Some(links) = s.links {
        line.push_str(&format!(" links={links}"));
    }
    line
}

fn cmd_enumerate(
    q_bound: i64,
    options: EnumerateOptions,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    let e = enumerate_and_classify(q_bound, options)?;
    match format {
        Format::Json => {
            for c in &e.rows {
                writeln!(out, "{}", serde_json::to_string(&c.row())?)?;
            }
            writeln!(
                out,
                "{}",
                serde_json::to_string(&serde_json::json!({ "summary": e.summary }))?
            )?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(CSV_HEADER)?;
            for c in &e.rows {
                w.write_record(csv_record(c))?;
            }
            w.flush()?;
            eprintln!("{}", summary_line(&e.summary));
        }
        Format::Table => {
            for c in &e.rows {
                writeln!(out, "{}", table_line(c))?;
            }
            writeln!(out, "{}", summary_line(&e.summary))?;
        }
    }
    Ok(if e.summary.anomalies > 0 {
        EXIT_ANOMALY
    } else {
        EXIT_OK
    })
}

fn cmd_gb_verify(
    path: &Path,
    delta: Option<u32>,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    let graph: GeneralizedGraph = read_json(path, "generalized graph")?;
    let delta = delta.or(graph.delta);
    let mut violations = match delta {
        Some(d) => validate_graph(&graph, d),
        None => graph.structural_violations(),
    };
    let report = if violations.is_empty() {
        match graph_euler_check(&graph) {
            Ok(r) => Some(r),
            Err(e) => {
                violations.push(e);
                None
            }
        }
    } else {
        None
    };
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string(&serde_json::json!({
                "report": report,
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }))?
        )?,
        Format::Csv | Format::Table => {
            if let Some(r) = &report {
                writeln!(out, "{r}")?;
            }
            for v in &violations {
                writeln!(out, "violation: {v}")?;
            }
        }
    }
    Ok(if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAMILY
    })
}

/// `2π/3`, `π/2`, `π`.
fn pi_units(r: &Rational) -> String {
    let (n, d) = r.to_i64_pair().expect("preset angles are small");
    let num = match n {
        1 => "π".to_string(),
        -1 => "-π".to_string(),
        _ => format!("{n}π"),
    };
    if d == 1 {
        num
    } else {
        format!("{num}/{d}")
    }
}

fn triple(angles: &[Rational; 3]) -> String {
    format!(
        "({})",
        angles.iter().map(pi_units).collect::<Vec<_>>().join(", ")
    )
}

fn cmd_presets(format: Format, out: &mut dyn Write) -> Result<i32> {
    let rows: Vec<(Regime, Certificate, bool)> = Regime::ALL
        .into_iter()
        .map(|r| {
            let cert = r.certificate();
            let verified = verify_params(r.minimal_params(), &cert).is_empty();
            (r, cert, verified)
        })
        .collect();
    match format {
        Format::Json => {
            for (r, cert, verified) in &rows {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&serde_json::json!({
                        "id": r.id(),
                        "regime": r.pattern(),
                        "certificate": cert,
                        "verified": verified,
                    }))?
                )?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["id", "regime", "alpha_bar", "beta_bar", "verified"])?;
            for (r, cert, verified) in &rows {
                w.write_record([
                    r.id().to_string(),
                    r.pattern().to_string(),
                    triple(&cert.alpha_bar),
                    triple(&cert.beta_bar),
                    verified.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Table => {
            for (r, cert, verified) in &rows {
                writeln!(
                    out,
                    "{:<14} {:<45} ᾱ={} β̄={} verified={verified}",
                    r.id(),
                    r.pattern(),
                    triple(&cert.alpha_bar),
                    triple(&cert.beta_bar),
                )?;
            }
        }
    }
    Ok(if rows.iter().all(|(_, _, v)| *v) {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}
