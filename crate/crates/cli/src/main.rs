//! Command-line front end: every pipeline as a subcommand with
//! machine-readable reports. Exit status 0 means every residual passed its
//! tolerance; 1 flags a check failure (the report is still emitted); 2 is a
//! usage error.

mod builders;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use builders::*;
use equivmod_core::equivariant::{
    equivariance_residual, probe_points, ratio_of_vmf, reconstruct, vmf_residual, GroupElement,
};
use equivmod_core::error::Error;
use equivmod_core::moebius::{slash_scalar, GroupWord};
use equivmod_core::numerics::BigComplex;
use equivmod_core::ode::{monodromy_general, wronskian};
use equivmod_core::qforms::{eval_form, FormName};
use equivmod_core::report::{CheckSet, OutputFormat, Report, RunConfig, TolClass};
use equivmod_core::schwarz::{bol_residual, schwarz_cocycle_residual, schwarzian};
use equivmod_core::suite::{run_suite, suite_to_report};

#[derive(Parser)]
#[command(
    name = "equivmod",
    about = "High-precision checks for equivariant functions, vector-valued modular forms, \
             Schwarzian calculus and monodromy",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Significand bits for every computation.
    #[arg(long, global = true, env = "EQUIVMOD_PRECISION", default_value_t = 256)]
    precision: usize,

    /// Default jet order for derivative-carrying operations.
    #[arg(long, global = true, env = "EQUIVMOD_JET_ORDER", default_value_t = 8)]
    jet_order: usize,

    /// q-expansion terms retained.
    #[arg(long, global = true, env = "EQUIVMOD_TERMS", default_value_t = 200)]
    terms: usize,

    /// ODE step cap relative to the clearance radius.
    #[arg(long, global = true, env = "EQUIVMOD_SAFETY", default_value_t = 0.25)]
    safety: f64,

    /// Seed for all randomized probes (full determinism per seed).
    #[arg(long, global = true, env = "EQUIVMOD_SEED", default_value_t = 42)]
    seed: u64,

    /// Output format: json | csv | pretty.
    #[arg(long, global = true, env = "EQUIVMOD_FORMAT", default_value = "json")]
    format: String,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "EQUIVMOD_OUT")]
    out: Option<String>,

    /// Override the single-formula tolerance class.
    #[arg(long = "tol-single", global = true, env = "EQUIVMOD_TOL_SINGLE")]
    tol_single: Option<f64>,

    /// Override the composite-pipeline tolerance class.
    #[arg(long = "tol-pipeline", global = true, env = "EQUIVMOD_TOL_PIPELINE")]
    tol_pipeline: Option<f64>,

    /// Override the deck/covering tolerance class.
    #[arg(long = "tol-deck", global = true, env = "EQUIVMOD_TOL_DECK")]
    tol_deck: Option<f64>,
}

impl GlobalArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let format: OutputFormat = self.format.parse().map_err(Error::InvalidInput)?;
        Ok(RunConfig {
            precision_bits: self.precision,
            jet_order: self.jet_order,
            truncation: self.terms,
            safety_factor: self.safety,
            seed: self.seed,
            format,
            tol_single: self.tol_single,
            tol_pipeline: self.tol_pipeline,
            tol_deck: self.tol_deck,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Schwarzian derivative of a builtin function; with
    /// --gamma also check the weight-4 cocycle there.
    Schwarzian {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        at: String,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Check Bol's identity (F|_{-r} gamma)^{(r+1)} = F^{(r+1)}|_{r+2} gamma.
    Bol {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        at: String,
    },
    /// Apply the weight-k slash operator to a builtin function.
    Slash {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        weight: i64,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        at: String,
    },
    /// Evaluate a classical form or lambda with its tail bound.
    Modform {
        #[arg(long)]
        name: String,
        #[arg(long)]
        at: String,
    },
    /// Monodromy matrix of a loop for a builtin equation.
    Monodromy {
        #[arg(long, default_value = "legendre")]
        equation: String,
        #[arg(long = "loop", default_value = "around0")]
        loop_spec: String,
        #[arg(long, default_value = "0.5")]
        base: String,
    },
    /// Equivariance residuals of a candidate over group elements.
    Equivariance {
        #[arg(long, default_value = "trivial")]
        candidate: String,
        #[arg(long, default_value = "gamma2")]
        group: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        word: Option<String>,
    },
    /// Vector-valued modular form residuals of a candidate.
    Vmf {
        #[arg(long, default_value = "trivial")]
        candidate: String,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[arg(long)]
        word: Option<String>,
    },
    /// The constructive round trip h -> g -> solutions -> alpha -> F.
    Reconstruct {
        #[arg(long, default_value = "trivial")]
        candidate: String,
        #[arg(long, default_value = "i")]
        base: String,
        #[arg(long, default_value_t = 9)]
        probes: usize,
    },
    /// Deck-transformation residuals through the covering map.
    Deckcheck {
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Run the full verification battery (optionally a subset).
    Suite {
        /// Comma-separated criterion indices, e.g. "1,4,10".
        #[arg(long)]
        only: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.global.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(report) => {
            let rendered = report.render(cfg.format);
            if let Some(path) = &cli.global.out {
                if let Err(e) = std::fs::write(path, rendered.as_bytes()) {
                    eprintln!("cannot write report to {path}: {e}");
                    return ExitCode::from(2);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(rendered.as_bytes());
                let _ = stdout.write_all(b"\n");
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Report, Error> {
    let t0 = Instant::now();
    let p = cfg.precision_bits;
    let tcfg = cfg.transport();
    let mut covering = None;
    let mut report = match cmd {
        Command::Schwarzian { function, at, gamma } => {
            let f = build_function(function, cfg, &mut covering)?;
            let z = parse_point(at, p)?;
            let s = schwarzian(f.as_ref(), &z)?;
            let mut cs = CheckSet::new();
            cs.note(
                "schwarzian value",
                json!({"fn": function, "z": at}),
                format!("S(f)(z) = {s}"),
            );
            if let Some(g) = gamma {
                let m = parse_mat(g, p)?;
                let r = schwarz_cocycle_residual(&f, &m, &z)?;
                cs.push(
                    "weight-4 cocycle residual",
                    json!({"gamma": g}),
                    r,
                    cfg.tolerance(TolClass::Pipeline),
                );
            }
            Report::new("schwarzian", cfg, cs).with_values(serde_json::to_value(&s).unwrap())
        }
        Command::Bol { function, r, gamma, at } => {
            let f = build_function(function, cfg, &mut covering)?;
            let m = parse_mat(gamma, p)?;
            let z = parse_point(at, p)?;
            let res = bol_residual(f.as_ref(), *r, &m, &z)?;
            let mut cs = CheckSet::new();
            cs.push(
                format!("bol r={r}"),
                json!({"fn": function, "gamma": gamma, "z": at}),
                res,
                cfg.tolerance(TolClass::Single),
            );
            Report::new("bol", cfg, cs)
        }
        Command::Slash { function, weight, gamma, at } => {
            let f = build_function(function, cfg, &mut covering)?;
            let m = parse_mat(gamma, p)?;
            let z = parse_point(at, p)?;
            let v = slash_scalar(f.as_ref(), *weight, &m, &z)?;
            let mut cs = CheckSet::new();
            cs.note(
                "slash value",
                json!({"fn": function, "weight": weight, "gamma": gamma, "z": at}),
                format!("(F|_k gamma)(z) = {v}"),
            );
            Report::new("slash", cfg, cs).with_values(serde_json::to_value(&v).unwrap())
        }
        Command::Modform { name, at } => {
            let form = FormName::parse(name)?;
            let z = parse_point(at, p)?;
            let (v, bound) = eval_form(form, &z, cfg.truncation)?;
            let mut cs = CheckSet::new();
            cs.note(
                "modular form value",
                json!({"name": name, "z": at, "truncation": cfg.truncation, "precision_bits": p}),
                match &bound {
                    Some(b) => format!(
                        "{name}(z) = {v}; tail bound {}",
                        equivmod_core::numerics::real::format(b)
                    ),
                    None => format!("{name}(z) = {v}; tail bound unavailable at this Im z"),
                },
            );
            Report::new("modform", cfg, cs).with_values(json!({
                "value": serde_json::to_value(&v).unwrap(),
                "tail_bound": bound.map(|b| equivmod_core::numerics::real::format(&b)),
                "truncation": cfg.truncation,
                "precision_bits": p,
            }))
        }
        Command::Monodromy { equation, loop_spec, base } => {
            let b = parse_point(base, p)?;
            let eq = build_equation(equation, &b, &tcfg)?;
            let lp = build_loop(loop_spec, &b)?;
            let out = monodromy_general(&eq.coeffs, &lp, &eq.reference, &tcfg)?;
            let mut cs = CheckSet::new();
            cs.push(
                "wronskian drift",
                json!({"loop": loop_spec}),
                out.stats.wronskian_drift,
                cfg.tolerance(TolClass::Pipeline),
            );
            cs.push(
                "det(M) = 1",
                json!({"loop": loop_spec}),
                out.matrix.det().dist_f64(&BigComplex::one(p)),
                cfg.tolerance(TolClass::Pipeline),
            );
            Report::new("monodromy", cfg, cs).with_values(json!({
                "matrix": serde_json::to_value(&out.matrix).unwrap(),
                "trace": serde_json::to_value(&out.matrix.trace()).unwrap(),
                "det": serde_json::to_value(&out.matrix.det()).unwrap(),
                "wronskian_reference": serde_json::to_value(&wronskian(&eq.reference)).unwrap(),
                "steps": out.stats.steps,
                "loop": loop_spec,
            }))
        }
        Command::Equivariance { candidate, group, samples, word } => {
            if group.to_ascii_lowercase() != "gamma2" {
                return Err(Error::InvalidInput(format!(
                    "only the gamma2 group is wired to the CLI, got `{group}`"
                )));
            }
            let cand = build_equivariant_candidate(candidate, cfg, &mut covering)?;
            let words: Vec<GroupWord> = match word {
                Some(w) => vec![GroupWord::parse(w)?],
                None => vec![GroupWord::generator("A", 1), GroupWord::generator("B", 1)],
            };
            let points = probe_points(cfg.seed, *samples, p);
            let mut cs = CheckSet::new();
            for w in &words {
                for z in &points {
                    let r = equivariance_residual(&cand, &GroupElement::Word(w.clone()), z)?;
                    cs.push(
                        format!("equivariance [{w}]"),
                        json!({"z": format!("{z:?}")}),
                        r,
                        cfg.tolerance(TolClass::Deck),
                    );
                }
            }
            if let Some(n) = &cand.note {
                cs.note("candidate note", json!({}), n.clone());
            }
            Report::new("equivariance", cfg, cs)
        }
        Command::Vmf { candidate, samples, word } => {
            let cand = build_vmf_candidate(candidate, cfg, &mut covering)?;
            let words: Vec<GroupWord> = match word {
                Some(w) => vec![GroupWord::parse(w)?],
                None => vec![GroupWord::generator("A", 1), GroupWord::generator("B", 1)],
            };
            let points = probe_points(cfg.seed, *samples, p);
            let mut cs = CheckSet::new();
            for w in &words {
                for z in &points {
                    let r = vmf_residual(&cand, &GroupElement::Word(w.clone()), z)?;
                    cs.push(
                        format!("vmf weight {} [{w}]", cand.weight),
                        json!({"z": format!("{z:?}")}),
                        r,
                        cfg.tolerance(TolClass::Deck),
                    );
                }
            }
            Report::new("vmf", cfg, cs)
        }
        Command::Reconstruct { candidate, base, probes } => {
            let cand = build_equivariant_candidate(candidate, cfg, &mut covering)?;
            let b = parse_point(base, p)?;
            let pts = probe_points(cfg.seed, (*probes).max(4), p);
            let out = reconstruct(&cand, &b, &pts, &tcfg)?;
            let mut cs = CheckSet::new();
            cs.push(
                "held-out ratio fit",
                json!({"probes": pts.len()}),
                out.report.fit_residual,
                cfg.tolerance(TolClass::Deck),
            );
            for c in &out.report.conjugation {
                cs.push(
                    format!("projective conjugation [{}]", c.generator),
                    json!({"scalar": format!("{:?}", c.scalar)}),
                    c.projective_distance,
                    cfg.tolerance(TolClass::Deck),
                );
            }
            for z in pts.iter().take(2) {
                for gen in ["A", "B"] {
                    let r = vmf_residual(&out.vmf, &GroupElement::parse(gen)?, z)?;
                    cs.push(
                        format!("recovered F at weight -1 [{gen}]"),
                        json!({"z": format!("{z:?}")}),
                        r,
                        cfg.tolerance(TolClass::Deck),
                    );
                }
            }
            // ratio sanity: the recovered ratio reproduces h
            let h_back = ratio_of_vmf(&out.vmf, &pts)?;
            let z0 = &pts[0];
            let d = h_back.h.value_ext(z0)?.chordal(&cand.h.value_ext(z0)?);
            cs.push("h_F = h at a fresh probe", json!({}), d, cfg.tolerance(TolClass::Deck));
            Report::new("reconstruct", cfg, cs).with_values(json!({
                "alpha": serde_json::to_value(&out.alpha).unwrap(),
                "g_at_base": serde_json::to_value(out.g_at_base.value()).unwrap(),
            }))
        }
        Command::Deckcheck { word, at, samples } => {
            let cov = covering_of(cfg, &mut covering)?;
            let words: Vec<GroupWord> = match word {
                Some(w) => vec![GroupWord::parse(w)?],
                None => vec![GroupWord::generator("A", 1), GroupWord::generator("B", 1)],
            };
            let points: Vec<BigComplex> = match at {
                Some(s) => vec![parse_point(s, p)?],
                None => probe_points(cfg.seed, *samples, p),
            };
            let mut cs = CheckSet::new();
            for w in &words {
                for z in &points {
                    let r = cov.deck_check(w, z)?;
                    cs.push(
                        format!("deck vector residual [{w}, {:?}]", r.route),
                        json!({"z": format!("{z:?}")}),
                        r.vector_residual,
                        cfg.tolerance(TolClass::Deck),
                    );
                    cs.push(
                        format!("deck chordal residual [{w}, {:?}]", r.route),
                        json!({"z": format!("{z:?}")}),
                        r.chordal_residual,
                        cfg.tolerance(TolClass::Deck),
                    );
                }
            }
            for e in &cov.correspondence {
                cs.note(
                    format!("correspondence {}", e.deck_generator),
                    json!({"winding": e.winding}),
                    format!(
                        "{} -> {} (matrix residual {:.3e}); loops positively oriented",
                        e.deck_generator, e.loop_word, e.matrix_residual
                    ),
                );
            }
            Report::new("deckcheck", cfg, cs)
        }
        Command::Suite { only } => {
            let indices: Option<Vec<usize>> = match only {
                None => None,
                Some(s) => Some(
                    s.split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<usize>()
                                .map_err(|_| Error::InvalidInput(format!("bad index `{t}`")))
                        })
                        .collect::<Result<_, _>>()?,
                ),
            };
            let sr = run_suite(cfg, indices.as_deref())?;
            eprint!("{}", sr.summary());
            suite_to_report(cfg, &sr)
        }
    };
    report.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
