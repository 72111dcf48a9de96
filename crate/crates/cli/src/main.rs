//! Command-line front end: instance I/O, reduction pipelines, bounded
//! solvers, certificate verification, corpus generation and threshold-law
//! reports.
//!
//! Exit codes are a stable contract: 0 = yes-instance / valid, 1 = no
//! within the bound / invalid certificate, 2 = error.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use reductio_core::files::{
    self, certificate_file, corpus_file, instance_file, read_certificate_file, read_corpus_file,
    read_instance_file, REPORT_SCHEMA,
};
use reductio_core::framework::{Certificate, Instance, Registry, ThresholdPolynomial};
use reductio_core::turing::{CorpusSpec, Ntm, TapeModel};

#[derive(Parser)]
#[command(
    name = "reductio",
    about = "Exact bounded solvers and reductions between hard problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an instance along a registered reduction (or composed chain).
    Reduce {
        /// Source problem id.
        #[arg(long = "from")]
        from: String,
        /// Target problem id.
        #[arg(long = "to")]
        to: String,
        /// Input instance file (JSON).
        #[arg(short = 'i', long = "input")]
        input: String,
        /// Output instance file (JSON).
        #[arg(short = 'o', long = "output")]
        output: String,
    },
    /// Run the exact bounded solver for one problem.
    Solve {
        /// Problem id (bnhalt, bnhalt-all, bpcp, bzulc, bmm, bmpo, bpoly,
        /// bstab, btile, bgse).
        #[arg(long = "problem")]
        problem: String,
        /// Step budget, a decimal integer with unary size semantics.
        #[arg(long = "bound")]
        bound: u64,
        #[arg(short = 'i', long = "input")]
        input: String,
    },
    /// Re-check a certificate from scratch (no solver state involved).
    Verify {
        #[arg(long = "problem")]
        problem: String,
        #[arg(short = 'i', long = "input")]
        input: String,
        /// Certificate file (JSON).
        #[arg(short = 'c', long = "certificate")]
        certificate: String,
        /// Bound the certificate must respect; defaults to the instance
        /// file's bound, then to the certificate's own size.
        #[arg(long = "bound")]
        bound: Option<u64>,
    },
    /// Run a machine corpus down both reduction branches and report the
    /// threshold laws observed at every arrow.
    Chain {
        /// Corpus file of machine descriptions.
        #[arg(long = "corpus")]
        corpus: String,
        /// Root horizon for the halting oracles.
        #[arg(long = "horizon")]
        horizon: u64,
        /// Report output file (JSON).
        #[arg(short = 'o', long = "output")]
        output: String,
        /// Cap on the search bound of the matrix and operator solvers;
        /// windows beyond the cap are reported as capped, never guessed.
        #[arg(long = "max-bound", default_value_t = 6)]
        max_bound: u64,
    },
    /// Enumerate a deterministic machine corpus.
    Corpus {
        /// Number of non-final states.
        #[arg(long = "states")]
        states: u32,
        /// Number of tape symbols (the blank included).
        #[arg(long = "symbols")]
        symbols: u32,
        /// Maximum transitions per (state, symbol) key.
        #[arg(long = "branch")]
        branch: u32,
        /// Number of machines to emit.
        #[arg(long = "limit")]
        limit: usize,
        #[arg(short = 'o', long = "output")]
        output: String,
        /// Enumeration seed; the default is fixed for reproducibility.
        #[arg(long = "seed", default_value_t = 0x5eed_cafe_f00d_0001)]
        seed: u64,
        /// Tape model: "semi" or "two-way".
        #[arg(long = "tape", default_value = "semi")]
        tape: String,
    },
    /// Print the registry manifest: problems, certificate kinds, arrows and
    /// their threshold polynomials.
    Manifest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Writes one line to stdout, exiting quietly when the pipe is closed
/// (e.g. downstream `head`).
fn emit(line: impl std::fmt::Display) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let registry = Registry::standard();
    match cli.command {
        Command::Reduce {
            from,
            to,
            input,
            output,
        } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{input}: {e}"))?;
            let (file, inst) = read_instance_file(&text).map_err(|e| e.to_string())?;
            if file.problem != from {
                return Err(format!(
                    "input file is a {} instance, not {}",
                    file.problem, from
                ));
            }
            let arrow = registry
                .arrow_chain(&from, &to)
                .ok_or_else(|| format!("no registered reduction chain from {from} to {to}"))?;
            let reduced = arrow.map.apply(&inst).map_err(|e| e.to_string())?;
            let bound = match file.bound {
                Some(b) => Some(arrow.threshold.eval_u64(b).map_err(|e| e.to_string())?),
                None => None,
            };
            let out = instance_file(&to, &reduced, bound);
            fs::write(&output, serde_json::to_string_pretty(&out).unwrap())
                .map_err(|e| format!("{output}: {e}"))?;
            emit(format!(
                "reduced {} -> {} via {}{}",
                from,
                to,
                arrow.map.id(),
                match (file.bound, bound) {
                    (Some(a), Some(b)) => format!(", bound {a} -> {b}"),
                    _ => String::new(),
                }
            ));
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            problem,
            bound,
            input,
        } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{input}: {e}"))?;
            let (file, inst) = read_instance_file(&text).map_err(|e| e.to_string())?;
            if file.problem != problem {
                return Err(format!(
                    "input file is a {} instance, not {}",
                    file.problem, problem
                ));
            }
            match registry
                .solve(&problem, &inst, bound)
                .map_err(|e| e.to_string())?
            {
                Some(cert) => {
                    let kind = &registry.problem(&problem).unwrap().certificate_kind;
                    let out = certificate_file(&problem, kind, &cert);
                    emit(format!("{}", serde_json::to_string(&out).unwrap()));
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    emit(format!("exhausted bound {bound}"));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Verify {
            problem,
            input,
            certificate,
            bound,
        } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{input}: {e}"))?;
            let (file, inst) = read_instance_file(&text).map_err(|e| e.to_string())?;
            if file.problem != problem {
                return Err(format!(
                    "input file is a {} instance, not {}",
                    file.problem, problem
                ));
            }
            let cert_text =
                fs::read_to_string(&certificate).map_err(|e| format!("{certificate}: {e}"))?;
            let (cert_file, cert) =
                read_certificate_file(&cert_text).map_err(|e| e.to_string())?;
            let expected_kind = &registry
                .problem(&problem)
                .map_err(|e| e.to_string())?
                .certificate_kind;
            if &cert_file.kind != expected_kind {
                return Err(format!(
                    "certificate kind {} does not match problem {problem} ({expected_kind})",
                    cert_file.kind
                ));
            }
            let n = bound
                .or(file.bound)
                .or(match &cert {
                    Certificate::Path(p) => Some(p.0.len() as u64),
                    Certificate::Indices(ix) => Some(ix.len() as u64),
                    Certificate::Exhaustive => None,
                })
                .ok_or_else(|| "a bound is required for exhaustive certificates".to_string())?;
            let ok = registry
                .verify(&problem, &inst, n, &cert)
                .map_err(|e| e.to_string())?;
            if ok {
                emit(format!("valid"));
                Ok(ExitCode::SUCCESS)
            } else {
                emit(format!("invalid"));
                Ok(ExitCode::from(1))
            }
        }
        Command::Chain {
            corpus,
            horizon,
            output,
            max_bound,
        } => {
            let text = fs::read_to_string(&corpus).map_err(|e| format!("{corpus}: {e}"))?;
            let machines = read_corpus_file(&text).map_err(|e| e.to_string())?;
            let report = run_chain(&registry, &machines, horizon, max_bound);
            fs::write(&output, serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| format!("{output}: {e}"))?;
            let mut pass = 0;
            let mut violation = 0;
            let mut other = 0;
            for row in &report.rows {
                match row.iff.as_str() {
                    "pass" => pass += 1,
                    "violation" => violation += 1,
                    _ => other += 1,
                }
                emit(format!(
                    "machine {:>3}  {:<18} src {:>2} tgt {:>2} pred {:>2}  iff {:<9} eq {}",
                    row.machine,
                    row.arrow,
                    row.source_min.map_or("-".to_string(), |v| v.to_string()),
                    row.target_min.map_or("-".to_string(), |v| v.to_string()),
                    row.predicted.map_or("-".to_string(), |v| v.to_string()),
                    row.iff,
                    row.equality,
                ));
            }
            emit(format!("rows: {pass} pass / {violation} violation / {other} capped-or-error"));
            if violation > 0 {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Corpus {
            states,
            symbols,
            branch,
            limit,
            output,
            seed,
            tape,
        } => {
            let tape = match tape.as_str() {
                "semi" => TapeModel::SemiInfinite,
                "two-way" => TapeModel::TwoWayInfinite,
                other => return Err(format!("unknown tape model {other:?}")),
            };
            let spec = CorpusSpec {
                states,
                symbols,
                branching: branch,
                limit,
                seed,
                tape,
            };
            let machines =
                reductio_core::turing::generate_corpus(&spec).map_err(|e| e.to_string())?;
            let file = corpus_file(&machines);
            fs::write(&output, serde_json::to_string_pretty(&file).unwrap())
                .map_err(|e| format!("{output}: {e}"))?;
            emit(format!("wrote {} machines to {}", machines.len(), output));
            Ok(ExitCode::SUCCESS)
        }
        Command::Manifest => {
            #[derive(Serialize)]
            struct ManifestFile {
                schema: String,
                #[serde(flatten)]
                manifest: reductio_core::framework::RegistryManifest,
            }
            emit(format!(
                "{}",
                serde_json::to_string_pretty(&ManifestFile {
                    schema: files::REGISTRY_SCHEMA.into(),
                    manifest: registry.manifest(),
                })
                .unwrap()
            ));
            Ok(ExitCode::SUCCESS)
        }
    }
}

// ---------------------------------------------------------------------------
// Threshold-law report
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ReportRow {
    machine: usize,
    arrow: String,
    /// Smallest accepting bound at the arrow source, within its window.
    source_min: Option<u64>,
    source_window: u64,
    target_min: Option<u64>,
    target_window: u64,
    /// The polynomial image of the source threshold, when found.
    predicted: Option<u64>,
    /// "pass" when acceptance transfers exactly on the checkable window,
    /// "violation" when it does not, "capped" when the window was too small
    /// to decide, "error" when a solver refused the instance.
    iff: String,
    /// "holds" / "fails" when both thresholds are known, "unknown" otherwise.
    equality: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct ChainReport {
    schema: String,
    horizon: u64,
    max_bound: u64,
    rows: Vec<ReportRow>,
}

const BRANCH_EXISTS: [&str; 4] = ["bnhalt", "bpcp", "bzulc", "bmm"];
const BRANCH_OPERATOR: [&str; 3] = ["bzulc", "bmpo", "bpoly"];
const BRANCH_STAB: [&str; 2] = ["bmpo", "bstab"];
const BRANCH_ALL: [&str; 3] = ["bnhalt-all", "btile", "bgse"];

fn run_chain(registry: &Registry, machines: &[Ntm], horizon: u64, max_bound: u64) -> ChainReport {
    let mut rows = Vec::new();
    for (idx, m) in machines.iter().enumerate() {
        let semi = Instance::Machine(m.clone());
        let two_way = Instance::Machine(m.with_tape_model(TapeModel::TwoWayInfinite));
        walk_branch(
            registry,
            idx,
            &semi,
            &BRANCH_EXISTS,
            horizon,
            max_bound,
            &mut rows,
        );
        // The operator branches restart from the corner-zero instance so the
        // mortality and operator arrows are judged independently.
        if let (Some(a1), Some(a2)) = (
            registry.arrow("bnhalt", "bpcp"),
            registry.arrow("bpcp", "bzulc"),
        ) {
            if let Ok(pcp) = a1.map.apply(&semi) {
                if let Ok(zulc) = a2.map.apply(&pcp) {
                    let h_pcp = a1.threshold.eval_u64(horizon).unwrap_or(u64::MAX);
                    let h_zulc = cap_for("bzulc", h_pcp, max_bound, &zulc);
                    walk_branch(
                        registry,
                        idx,
                        &zulc,
                        &BRANCH_OPERATOR,
                        h_zulc,
                        max_bound,
                        &mut rows,
                    );
                    if let Some(a3) = registry.arrow("bzulc", "bmpo") {
                        if let Ok(mpo) = a3.map.apply(&zulc) {
                            let h_mpo = cap_for(
                                "bmpo",
                                a3.threshold.eval_u64(h_zulc).unwrap_or(0),
                                max_bound,
                                &mpo,
                            );
                            walk_branch(
                                registry,
                                idx,
                                &mpo,
                                &BRANCH_STAB,
                                h_mpo,
                                max_bound,
                                &mut rows,
                            );
                        }
                    }
                }
            }
        }
        walk_branch(
            registry,
            idx,
            &two_way,
            &BRANCH_ALL,
            horizon,
            max_bound,
            &mut rows,
        );
    }
    ChainReport {
        schema: REPORT_SCHEMA.into(),
        horizon,
        max_bound,
        rows,
    }
}

/// Largest product length whose enumeration stays inside `budget`.
fn affordable_products(k: usize, budget: u128) -> u64 {
    let k = k.max(2) as u128;
    let mut n = 0u64;
    let mut total: u128 = 1;
    while n < 64 {
        total = total.saturating_mul(k);
        if total > budget {
            break;
        }
        n += 1;
    }
    n
}

/// Per-problem window cap: the matrix and operator searches grow
/// exponentially in the bound, so their windows are clipped to what the
/// instance at hand can afford.
fn cap_for(problem: &str, window: u64, max_bound: u64, payload: &Instance) -> u64 {
    match (problem, payload) {
        ("bzulc" | "bmm", Instance::Matrices(f)) => window
            .min(max_bound)
            .min(affordable_products(f.len(), 120_000)),
        ("bmpo", Instance::Operator(f)) => window
            .min(max_bound)
            .min(affordable_products(f.len(), 40_000)),
        ("bpoly", Instance::Polynomials(pf)) => window
            .min(max_bound)
            .min(affordable_products(pf.vars(), 40_000)),
        ("bstab", Instance::Maps(spec)) => {
            // Cost of scanning length n: s^(2n) * n * k^n terms.
            let s2 = (spec.s as u128).saturating_mul(spec.s as u128);
            let k = spec.maps.len() as u128;
            let mut n = 0u64;
            let mut cost: u128 = 1;
            while n < 16 {
                cost = cost
                    .saturating_mul(s2)
                    .saturating_mul(k)
                    .saturating_mul((n + 1) as u128);
                if cost > 4_000_000 {
                    break;
                }
                n += 1;
            }
            window.min(max_bound).min(n)
        }
        ("btile", _) => window.min(5),
        // Exact ground-state search explodes past small radii on many-spin
        // models; the solver's node budget would catch it, but the window
        // is clipped up front so rows read "capped", not "error".
        ("bgse", _) => window.min(2),
        _ => window.min(64),
    }
}

fn walk_branch(
    registry: &Registry,
    machine: usize,
    root_payload: &Instance,
    branch: &[&str],
    root_horizon: u64,
    max_bound: u64,
    rows: &mut Vec<ReportRow>,
) {
    let mut payload = root_payload.clone();
    let mut window = cap_for(branch[0], root_horizon, max_bound, root_payload);
    for pair in branch.windows(2) {
        let (src, tgt) = (pair[0], pair[1]);
        let Some(arrow) = registry.arrow(src, tgt) else {
            break;
        };
        let target_payload = match arrow.map.apply(&payload) {
            Ok(p) => p,
            Err(e) => {
                rows.push(ReportRow {
                    machine,
                    arrow: format!("{src}->{tgt}"),
                    source_min: None,
                    source_window: window,
                    target_min: None,
                    target_window: 0,
                    predicted: None,
                    iff: "error".into(),
                    equality: "unknown".into(),
                    note: Some(e.to_string()),
                });
                return;
            }
        };
        let translated = arrow.threshold.eval_u64(window).unwrap_or(u64::MAX);
        let target_window = cap_for(tgt, translated, max_bound, &target_payload);
        let row = judge_arrow(
            registry,
            machine,
            src,
            tgt,
            &arrow.threshold,
            &payload,
            &target_payload,
            window,
            target_window,
        );
        rows.push(row);
        payload = target_payload;
        window = target_window;
    }
}

#[allow(clippy::too_many_arguments)]
fn judge_arrow(
    registry: &Registry,
    machine: usize,
    src: &str,
    tgt: &str,
    threshold: &ThresholdPolynomial,
    src_payload: &Instance,
    tgt_payload: &Instance,
    src_window: u64,
    tgt_window: u64,
) -> ReportRow {
    let base = |iff: &str, eq: &str, s: Option<u64>, t: Option<u64>, note: Option<String>| {
        ReportRow {
            machine,
            arrow: format!("{src}->{tgt}"),
            source_min: s,
            source_window: src_window,
            target_min: t,
            target_window: tgt_window,
            predicted: s.and_then(|v| threshold.eval_u64(v).ok()),
            iff: iff.into(),
            equality: eq.into(),
            note,
        }
    };
    let src_min = match registry.min_threshold(src, src_payload, src_window) {
        Ok(t) => t.found(),
        Err(e) => return base("error", "unknown", None, None, Some(e.to_string())),
    };
    let tgt_min = match registry.min_threshold(tgt, tgt_payload, tgt_window) {
        Ok(t) => t.found(),
        Err(e) => return base("error", "unknown", src_min, None, Some(e.to_string())),
    };
    // The iff-law is checkable for n with p(n) inside the target window.
    let mut checkable = None;
    for n in (0..=src_window).rev() {
        if threshold.eval_u64(n).is_ok_and(|v| v <= tgt_window) {
            checkable = Some(n);
            break;
        }
    }
    let Some(win) = checkable else {
        return base("capped", "unknown", src_min, tgt_min, None);
    };
    let verdict = match src_min {
        Some(s) if s <= win => {
            // Accepted at s: the target must accept within p(s) and must
            // not accept at or below p(s - 1).
            let p_s = threshold.eval_u64(s).unwrap_or(u64::MAX);
            let lower = if s == 0 {
                None
            } else {
                Some(threshold.eval_u64(s - 1).unwrap_or(u64::MAX))
            };
            match tgt_min {
                Some(t) if t <= p_s && lower.is_none_or(|l| t > l) => "pass",
                _ => "violation",
            }
        }
        // Unaccepted on the whole window: the target must reject up to
        // p(win) as well.
        _ => match tgt_min {
            Some(t) if threshold.eval_u64(win).is_ok_and(|pw| t <= pw) => "violation",
            _ => "pass",
        },
    };
    let equality = match (src_min, tgt_min) {
        (Some(s), Some(t)) if s <= win => {
            if threshold.eval_u64(s).is_ok_and(|v| v == t) {
                "holds"
            } else {
                "fails"
            }
        }
        _ => "unknown",
    };
    base(verdict, equality, src_min, tgt_min, None)
}
