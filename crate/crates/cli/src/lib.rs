//! Operator surface: group catalog, counting, extremal search, lemma
//! verification, the pipeline runner, and certificate checking.

use clap::{Parser, Subcommand, ValueEnum};
use groth_core::bohr::{bohr_system, BohrSpec};
use groth_core::check::check_certificate_json;
use groth_core::counting::{
    best_coset_translate, count_triples, largest_abelian_subgroup, max_solution_free,
    EquationKind,
};
use groth_core::croot_sisask::{bogolioubov_neighbourhood, build_system, conjugate_intersection};
use groth_core::group::{catalog, GroupTable};
use groth_core::measures::{
    convolve_fn_measure, convolve_measure_fn, inner_product, tilde_fn, tv_haar_defect,
    uniform_measure, FunctionVec,
};
use groth_core::msys::verify_system;
use groth_core::pipeline::run_iteration;
use groth_core::subset::{is_symmetric_neighbourhood, power_set_k, Subset};
use groth_core::{RunConfig, SamplerMode};
use serde_json::json;

#[derive(Parser)]
#[command(name = "groth", about = "Exact machinery for xz = y^2 in finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in group catalog.
    Catalog {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Count solutions of the equation in a subset.
    Count {
        #[arg(long)]
        group: String,
        /// Subset as "order:hex" or a comma-separated element list.
        #[arg(long)]
        subset: String,
        #[arg(long, default_value = "square")]
        eq: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Search for a maximum solution-free subset.
    Search {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "square")]
        eq: String,
        #[arg(long, default_value_t = 1 << 26)]
        budget: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Verify one lemma's conclusion on concrete data.
    Verify {
        /// One of: bogolioubov, conjugate-intersection, build-system,
        /// bohr-system, haar, adjoint, coset-translate.
        lemma: String,
        #[arg(long)]
        group: String,
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        g: usize,
        #[arg(long, default_value_t = 0)]
        h: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<String>,
    },
    /// Run the density-increment pipeline and emit a certificate.
    Pipeline {
        #[arg(long)]
        group: String,
        #[arg(long)]
        subset: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Check a certificate file.
    CheckCert {
        #[arg(long)]
        path: String,
        /// Additionally re-run the pipeline and require identical bytes.
        #[arg(long)]
        replay: bool,
    },
}

fn parse_subset(group: &GroupTable, s: &str) -> Result<Subset, String> {
    if s.contains(':') {
        return Subset::from_hex(group, s).map_err(|e| e.to_string());
    }
    let elems: Result<Vec<usize>, _> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>())
        .collect();
    let elems = elems.map_err(|e| format!("bad element list: {e}"))?;
    if let Some(&bad) = elems.iter().find(|&&e| e >= group.order()) {
        return Err(format!("element {bad} out of range for |G| = {}", group.order()));
    }
    Ok(Subset::from_elems(group, &elems))
}

fn load_config(path: Option<&str>, seed: Option<u64>) -> Result<RunConfig, String> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{p}: {e}"))?;
            RunConfig::parse(&text).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run_command(cmd: Command) -> Result<String, String> {
    match cmd {
        Command::Catalog { format } => {
            let groups = catalog();
            match format {
                Format::Json => {
                    let rows: Vec<_> = groups
                        .iter()
                        .map(|g| {
                            json!({
                                "name": g.name(),
                                "order": g.order(),
                                "abelian": g.is_abelian(),
                                "hash": g.table_hash(),
                            })
                        })
                        .collect();
                    Ok(serde_json::to_string_pretty(&rows).unwrap())
                }
                Format::Csv => {
                    let mut out = String::from("name,order,abelian,hash\n");
                    for g in &groups {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            g.name(),
                            g.order(),
                            g.is_abelian(),
                            g.table_hash()
                        ));
                    }
                    Ok(out)
                }
            }
        }
        Command::Count {
            group,
            subset,
            eq,
            format,
        } => {
            let g = GroupTable::from_descriptor(&group).map_err(|e| e.to_string())?;
            let a = parse_subset(&g, &subset)?;
            let eq = EquationKind::parse(&eq).map_err(|e| e.to_string())?;
            let counts = count_triples(&g, &a, eq).map_err(|e| e.to_string())?;
            match format {
                Format::Json => Ok(serde_json::to_string_pretty(&json!({
                    "group": g.name(),
                    "subset": a.to_hex(),
                    "size": a.card(),
                    "equation": eq,
                    "total": counts.total,
                    "nontrivial": counts.nontrivial,
                }))
                .unwrap()),
                Format::Csv => Ok(format!(
                    "group,size,equation,total,nontrivial\n{},{},{},{},{}\n",
                    g.name(),
                    a.card(),
                    format!("{eq:?}").to_lowercase(),
                    counts.total,
                    counts.nontrivial
                )),
            }
        }
        Command::Search {
            group,
            eq,
            budget,
            format,
        } => {
            let g = GroupTable::from_descriptor(&group).map_err(|e| e.to_string())?;
            let eq = EquationKind::parse(&eq).map_err(|e| e.to_string())?;
            let report = max_solution_free(&g, eq, budget).map_err(|e| e.to_string())?;
            match format {
                Format::Json => Ok(serde_json::to_string_pretty(&report).unwrap()),
                Format::Csv => Ok(format!(
                    "group,order,equation,max_size,density,exhaustive\n{},{},{},{},{:.6},{}\n",
                    g.name(),
                    g.order(),
                    format!("{eq:?}").to_lowercase(),
                    report.best_size,
                    report.best_size as f64 / g.order() as f64,
                    report.exhaustive
                )),
            }
        }
        Command::Verify {
            lemma,
            group,
            subset,
            k,
            g,
            h,
            epsilon,
            seed,
            config,
        } => {
            let gt = GroupTable::from_descriptor(&group).map_err(|e| e.to_string())?;
            let cfg = load_config(config.as_deref(), seed)?;
            let x = match subset {
                Some(s) => parse_subset(&gt, &s)?,
                None => gt.full_subset(),
            };
            verify_lemma(&lemma, &gt, &x, k, g, h, epsilon, &cfg)
        }
        Command::Pipeline {
            group,
            subset,
            seed,
            config,
            out,
        } => {
            let gt = GroupTable::from_descriptor(&group).map_err(|e| e.to_string())?;
            let a = parse_subset(&gt, &subset)?;
            let cfg = load_config(config.as_deref(), seed)?;
            let cert = run_iteration(&gt, &a, &cfg).map_err(|e| e.to_string())?;
            let text = cert.to_json();
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| format!("{path}: {e}"))?;
            }
            Ok(text)
        }
        Command::CheckCert { path, replay } => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
            let report = check_certificate_json(&text, replay).map_err(|e| e.to_string())?;
            let out = serde_json::to_string_pretty(&report).unwrap();
            if report.passed() {
                Ok(out)
            } else {
                Err(out)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn verify_lemma(
    lemma: &str,
    gt: &GroupTable,
    x: &Subset,
    k: usize,
    g: usize,
    h: usize,
    epsilon: f64,
    cfg: &RunConfig,
) -> Result<String, String> {
    let ok = |payload: serde_json::Value| Ok(serde_json::to_string_pretty(&payload).unwrap());
    match lemma {
        "bogolioubov" => {
            let (s, trace) =
                bogolioubov_neighbourhood(gt, x, k, cfg).map_err(|e| e.to_string())?;
            let sk = power_set_k(gt, &s, k).map_err(|e| e.to_string())?;
            let x4 = power_set_k(gt, x, 4).map_err(|e| e.to_string())?;
            let certified = sk.is_subset_of(&x4).map_err(|e| e.to_string())?
                && is_symmetric_neighbourhood(gt, &s);
            ok(json!({
                "lemma": lemma, "certified": certified,
                "s": s.to_hex(), "trace": trace,
            }))
        }
        "conjugate-intersection" => {
            let y = conjugate_intersection(gt, x, g, h, cfg).map_err(|e| e.to_string())?;
            ok(json!({ "lemma": lemma, "certified": true, "y": y.to_hex() }))
        }
        "build-system" => {
            let (sys, s, trace) =
                build_system(gt, x, 1, epsilon, cfg).map_err(|e| e.to_string())?;
            let report = verify_system(gt, &sys);
            ok(json!({
                "lemma": lemma, "certified": report.passed(),
                "system": sys.to_json(gt), "s": s.to_hex(), "trace": trace,
                "report": report,
            }))
        }
        "bohr-system" => {
            // Frequencies: the first k coordinate characters at width 1/2.
            let dec = groth_core::bohr::cyclic_decomposition(gt).map_err(|e| e.to_string())?;
            let kk = k.min(dec.orders.len());
            let freqs: Vec<Vec<usize>> = (0..kk)
                .map(|i| {
                    let mut f = vec![0; dec.orders.len()];
                    f[i] = 1;
                    f
                })
                .collect();
            let spec = BohrSpec {
                frequencies: freqs,
                width: 0.5,
            };
            let (sys, l, j) = bohr_system(gt, &spec, epsilon).map_err(|e| e.to_string())?;
            let report = verify_system(gt, &sys);
            ok(json!({
                "lemma": lemma, "certified": report.passed(),
                "l": l, "j": j, "system": sys.to_json(gt), "report": report,
            }))
        }
        "haar" => {
            let (sys, _, _) = build_system(gt, x, 1, epsilon, cfg).map_err(|e| e.to_string())?;
            let bound = 2.0 * sys.epsilon / (1.0 + sys.epsilon);
            let mut worst: f64 = 0.0;
            for i in 0..=sys.r() {
                for t in sys.level_after(i).clone().iter() {
                    let d = tv_haar_defect(gt, &sys, i, t).map_err(|e| e.to_string())?;
                    worst = worst.max(d);
                }
            }
            ok(json!({
                "lemma": lemma, "certified": worst <= bound + 1e-12,
                "worst_defect": worst, "bound": bound,
            }))
        }
        "adjoint" => {
            // <f * mu, nu> = <mu, f~ * nu> on data derived from X.
            let f = FunctionVec::indicator(gt, x);
            let mu = uniform_measure(gt, x).map_err(|e| e.to_string())?;
            let x2 = power_set_k(gt, x, 2).map_err(|e| e.to_string())?;
            let nu = uniform_measure(gt, &x2).map_err(|e| e.to_string())?;
            let lhs = {
                let c = convolve_fn_measure(gt, &f, &mu).map_err(|e| e.to_string())?;
                inner_product(
                    &c,
                    &FunctionVec::constant(gt, 1.0),
                    &nu,
                )
            };
            let rhs = {
                let ft = tilde_fn(gt, &f).map_err(|e| e.to_string())?;
                let c = convolve_measure_fn(gt, &nu, &ft).map_err(|e| e.to_string())?;
                inner_product(&c, &FunctionVec::constant(gt, 1.0), &mu)
            };
            ok(json!({
                "lemma": lemma, "certified": (lhs - rhs).abs() <= 1e-9,
                "lhs": lhs, "rhs": rhs,
            }))
        }
        "coset-translate" => {
            let hsub = largest_abelian_subgroup(gt).map_err(|e| e.to_string())?;
            let (t, th, hits) =
                best_coset_translate(gt, &hsub, x).map_err(|e| e.to_string())?;
            let bound = (x.card() * hsub.card()).div_ceil(gt.order());
            ok(json!({
                "lemma": lemma, "certified": hits >= bound,
                "t": t, "translate": th.to_hex(), "hits": hits, "bound": bound,
                "subgroup": hsub.to_hex(),
            }))
        }
        other => Err(format!("unknown lemma `{other}`")),
    }
}

pub fn run() {
    let cli = Cli::parse();
    let _ = SamplerMode::Exhaustive; // re-exported for config files
    match run_command(cli.command) {
        // Tolerate a closed stdout (e.g. piping into `head`).
        Ok(out) => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{out}");
        }
        Err(msg) => {
            eprintln!("{msg}");
            std::process::exit(1);
        }
    }
}
