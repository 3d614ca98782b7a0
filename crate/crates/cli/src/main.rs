//! Command-line driver: reproducible experiment runs with JSON/CSV reports.
//!
//! Exit codes: 0 success, 2 budget exhausted, 3 invalid configuration.

use clap::{Parser, Subcommand, ValueEnum};
use num::bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relendo::field::{make_field, Restriction};
use relendo::linalg::Matrix;
use relendo::pair::{
    canonical_flag, end_algebra, envelope, generic_subspace, rational_kernel, EndoAlgebra,
    SubspacePair,
};
use relendo::{Error, Result};
use serde_json::{json, Value};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "relendo", version, about = "Exact experiments on relative endomorphism algebras, masses, and torsion")]
struct Cli {
    /// Characteristic of the base field / residue field
    #[arg(long, global = true, default_value_t = 2)]
    prime: u64,
    /// Degree of k0 over the prime field
    #[arg(long, global = true, default_value_t = 1)]
    base_deg: usize,
    /// Degree of L over the prime field (must be a multiple of --base-deg)
    #[arg(long, global = true, default_value_t = 4)]
    ext_deg: usize,
    /// Seed for every randomized sampling step
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Budget for enumerations, conjugacy refinement, and group searches
    #[arg(long, global = true, default_value_t = 1 << 24)]
    budget: u64,
    /// Worker count (accepted for forward compatibility; runs are sequential
    /// so that reports stay byte-identical)
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Endomorphism algebra, rational kernel, envelope, and flag of one point
    Endo {
        n: usize,
        r: usize,
        /// Column-major coordinate codes of P (n*r values); omitted = sample
        /// a generic point with the configured seed
        #[arg(long, value_delimiter = ',')]
        point: Option<Vec<u64>>,
    },
    /// Stratify an enumerated Grassmannian or Lagrangian variety
    Strat {
        n: usize,
        r: usize,
        #[arg(long, value_enum, default_value_t = StratMode::Gl)]
        mode: StratMode,
    },
    /// Exact mass values
    Mass {
        g: usize,
        c: usize,
        /// Explicit reduced index (default 1)
        #[arg(long, default_value_t = 1)]
        index: u64,
        /// Compute the index from the scalar-algebra stratum instead
        #[arg(long, default_value_t = false)]
        stratum: bool,
    },
    /// Torsion probes in quaternionic matrix quotients
    Torsion {
        n: usize,
        s: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Genus-4 generic-point certificate over F_{p^ext}
    G4 {
        #[arg(long, default_value_t = 50)]
        max_attempts: u64,
    },
    /// Elementary sequences: the full set, the semisimple locus, the maximum
    Eo { g: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StratMode {
    Gl,
    Sp,
}

fn mat_codes(m: &Matrix<relendo::field::Fq>) -> Value {
    let rows: Vec<Vec<u64>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m[(i, j)].code()).collect())
        .collect();
    json!(rows)
}

fn algebra_json(e: &EndoAlgebra) -> Value {
    json!({
        "n": e.n,
        "dim": e.dim,
        "signature": [e.signature.0, e.signature.1, e.signature.2],
        "contains_identity": e.contains_identity,
        "basis": e.basis.iter().map(mat_codes).collect::<Vec<_>>(),
    })
}

struct Report {
    body: Value,
    /// fixed-order (header, rows) table for CSV output
    csv: (Vec<&'static str>, Vec<Vec<String>>),
}

fn config_json(cli: &Cli) -> Value {
    json!({
        "prime": cli.prime,
        "base_deg": cli.base_deg,
        "ext_deg": cli.ext_deg,
        "seed": cli.seed,
        "budget": cli.budget,
        "workers": cli.workers,
        "version": env!("CARGO_PKG_VERSION"),
        "schema": 1,
    })
}

fn restriction(cli: &Cli) -> Result<Arc<Restriction>> {
    let ctx = make_field(cli.prime, cli.ext_deg)?;
    Ok(Arc::new(Restriction::new(&ctx, cli.base_deg)?))
}

fn run_endo(cli: &Cli, n: usize, r: usize, point: &Option<Vec<u64>>) -> Result<Report> {
    let rest = restriction(cli)?;
    let s = match point {
        Some(codes) => {
            if codes.len() != n * r {
                return relendo::error::invalid(format!(
                    "--point needs {} codes for a {n}x{r} matrix, got {}",
                    n * r,
                    codes.len()
                ));
            }
            let cols: Vec<Vec<_>> = (0..r)
                .map(|c| (0..n).map(|i| rest.ctx.from_code(codes[c * n + i])).collect())
                .collect();
            SubspacePair::new(rest.clone(), Matrix::from_cols(cols))?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            generic_subspace(n, r, &rest, &mut rng, 200)?
        }
    };
    let alg = end_algebra(&s)?;
    let w0 = rational_kernel(&s)?;
    let env = envelope(&s)?;
    let flag = canonical_flag(&s)?;
    let body = json!({
        "n": n, "r": r,
        "point": mat_codes(&s.p_mat),
        "end": algebra_json(&alg),
        "rational_kernel_dim": w0.len(),
        "envelope_dim": env.len(),
        "flag": {
            "dims": [flag.v1.len(), flag.v2.len(), flag.v3.len()],
            "block_certified": flag.block_certified,
            "basis_change": mat_codes(&flag.basis_change),
        },
    });
    let csv = (
        vec!["n", "r", "end_dim", "sig_a", "sig_b", "sig_c", "w0_dim", "envelope_dim", "flag_dims", "block_certified"],
        vec![vec![
            n.to_string(),
            r.to_string(),
            alg.dim.to_string(),
            alg.signature.0.to_string(),
            alg.signature.1.to_string(),
            alg.signature.2.to_string(),
            w0.len().to_string(),
            env.len().to_string(),
            format!("{}|{}|{}", flag.v1.len(), flag.v2.len(), flag.v3.len()),
            flag.block_certified.to_string(),
        ]],
    );
    Ok(Report { body, csv })
}

fn run_strat(cli: &Cli, n: usize, r: usize, mode: StratMode) -> Result<Report> {
    let rest = restriction(cli)?;
    let (points, smode) = match mode {
        StratMode::Gl => (
            relendo::strata::enumerate_grassmannian(n, r, &rest.ctx, cli.budget)?,
            relendo::strata::Mode::Gl,
        ),
        StratMode::Sp => {
            if n != 2 * r {
                return relendo::error::invalid("symplectic mode needs n = 2r");
            }
            (
                relendo::strata::enumerate_lagrangian(r, &rest.ctx, cli.budget)?,
                relendo::strata::Mode::Sp,
            )
        }
    };
    let strat = relendo::strata::stratify(&points, &rest, smode, cli.budget)?;
    let mut rows = Vec::new();
    let mut jrows = Vec::new();
    for rep in &strat.reports {
        jrows.push(json!({
            "class_id": rep.class_id,
            "signature": [rep.signature.0, rep.signature.1, rep.signature.2],
            "end_dim": rep.algebra.dim,
            "count": rep.count,
            "coarse": rep.coarse,
            "representative": mat_codes(&rep.representative),
        }));
        rows.push(vec![
            rep.class_id.to_string(),
            format!("{}|{}|{}", rep.signature.0, rep.signature.1, rep.signature.2),
            rep.algebra.dim.to_string(),
            rep.count.to_string(),
            rep.coarse.to_string(),
        ]);
    }
    let body = json!({
        "n": n, "r": r,
        "mode": if mode == StratMode::Gl { "gl" } else { "sp" },
        "total": strat.total,
        "strata": jrows,
        "inclusions": strat.inclusions,
    });
    Ok(Report {
        body,
        csv: (vec!["class_id", "signature", "end_dim", "count", "coarse"], rows),
    })
}

fn run_mass(cli: &Cli, g: usize, c: usize, index: u64, stratum: bool) -> Result<Report> {
    let m = if stratum {
        // the stratum index lives over k0 = F_{p^2}
        let sub = make_field(cli.prime, 2)?;
        let rest = Arc::new(Restriction::new(&sub, 2)?);
        let space = relendo::symplectic::SymplecticSpace::new(c, rest.clone());
        let scalars = EndoAlgebra {
            n: 2 * c,
            basis: vec![Matrix::identity(&rest.ctx.zero(), 2 * c)],
            dim: 1,
            signature: (1, 0, 2 * c),
            contains_identity: true,
        };
        relendo::mass::mass_stratum(g, cli.prime, c, &scalars, &space, cli.budget)?
    } else {
        relendo::mass::mass_lambda(g, cli.prime, c, &BigUint::from(index))?
    };
    let body = json!({
        "g": g, "c": c,
        "mass": m.value.to_string(),
        "zeta_product": m.zeta_product.to_string(),
        "index": m.index.to_string(),
        "local_factor": m.local.to_string(),
    });
    let csv = (
        vec!["g", "c", "p", "mass", "zeta_product", "index", "local_factor"],
        vec![vec![
            g.to_string(),
            c.to_string(),
            cli.prime.to_string(),
            m.value.to_string(),
            m.zeta_product.to_string(),
            m.index.to_string(),
            m.local.to_string(),
        ]],
    );
    Ok(Report { body, csv })
}

fn run_torsion(cli: &Cli, n: usize, s: usize, trials: u64) -> Result<Report> {
    let rep = relendo::quat::torsion_probe(cli.prime, n, s, trials, cli.seed)?;
    let witness = rep
        .witness
        .as_ref()
        .map(|w| json!({"element": w.description, "order": w.order}))
        .unwrap_or(Value::Null);
    let body = json!({
        "p": rep.p, "n": rep.n, "s": rep.s,
        "excluded": rep.excluded,
        "torsion": witness,
        "trials": rep.trials,
        "congruence_ok": rep.congruence_ok,
    });
    let csv = (
        vec!["p", "n", "s", "excluded", "torsion_order", "trials", "congruence_ok"],
        vec![vec![
            rep.p.to_string(),
            rep.n.to_string(),
            rep.s.to_string(),
            rep.excluded.to_string(),
            rep.witness.as_ref().map(|w| w.order.to_string()).unwrap_or_default(),
            rep.trials.to_string(),
            rep.congruence_ok.to_string(),
        ]],
    );
    Ok(Report { body, csv })
}

fn run_g4(cli: &Cli, max_attempts: u64) -> Result<Report> {
    let e = if cli.ext_deg == 4 { 94 } else { cli.ext_deg }; // 94 is the default surface degree
    let (chain, attempts) =
        relendo::dieudonne::generic_chain(cli.prime, e, cli.seed, max_attempts as usize)?;
    let mp = relendo::dieudonne::end_mp_m1(&chain)?;
    let mv3 = relendo::dieudonne::end_mv3_m0(&chain, &mp)?;
    let aut = relendo::dieudonne::aut_polarized_m0(&chain, &mv3)?;
    let body = json!({
        "p": cli.prime,
        "ext_deg": e,
        "attempts": attempts,
        "slope_identity": chain.t2p == chain.t4pp,
        "end_mp_dim": mp.dim,
        "end_mp_scalars": mp.is_scalars,
        "end_mv3_scalars": mv3.is_scalars,
        "end_mv3": mv3.description,
        "aut_order": aut.order,
        "aut_elements": aut.elements,
    });
    let csv = (
        vec!["p", "ext_deg", "attempts", "slope_identity", "end_mp_dim", "end_mp_scalars", "end_mv3_scalars", "aut_order"],
        vec![vec![
            cli.prime.to_string(),
            e.to_string(),
            attempts.to_string(),
            (chain.t2p == chain.t4pp).to_string(),
            mp.dim.to_string(),
            mp.is_scalars.to_string(),
            mv3.is_scalars.to_string(),
            aut.order.to_string(),
        ]],
    );
    Ok(Report { body, csv })
}

fn run_eo(_cli: &Cli, g: usize) -> Result<Report> {
    let rep = relendo::eo::eo_sequences(g)?;
    let seq = |s: &relendo::eo::ElementarySequence| s.values.clone();
    let mut rows = Vec::new();
    for s in &rep.all {
        rows.push(vec![
            s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("|"),
            s.dim().to_string(),
            s.is_ss().to_string(),
        ]);
    }
    let body = json!({
        "g": g,
        "count": rep.all.len(),
        "ss_count": rep.ss.len(),
        "phi_max": seq(&rep.phi_max),
        "phi_max_dim": rep.phi_max.dim(),
        "ss": rep.ss.iter().map(seq).collect::<Vec<_>>(),
    });
    Ok(Report { body, csv: (vec!["sequence", "dim", "semisimple"], rows) })
}

fn render(cli: &Cli, report: Report) -> String {
    match cli.format {
        Format::Json => {
            let full = json!({ "config": config_json(cli), "report": report.body });
            let mut s = serde_json::to_string_pretty(&full).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let (header, rows) = report.csv;
            let mut s = format!("# config: prime={} base_deg={} ext_deg={} seed={} budget={} version={}\n",
                cli.prime, cli.base_deg, cli.ext_deg, cli.seed, cli.budget, env!("CARGO_PKG_VERSION"));
            s.push_str(&header.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    if cli.prime < 2 || !relendo::field::is_prime_u64(cli.prime) {
        return relendo::error::invalid("--prime must be a prime number");
    }
    if cli.base_deg == 0 || cli.ext_deg == 0 || cli.ext_deg % cli.base_deg != 0 {
        return relendo::error::invalid("--ext-deg must be a positive multiple of --base-deg");
    }
    if cli.workers == 0 {
        return relendo::error::invalid("--workers must be positive");
    }
    let report = match &cli.cmd {
        Cmd::Endo { n, r, point } => run_endo(cli, *n, *r, point)?,
        Cmd::Strat { n, r, mode } => run_strat(cli, *n, *r, *mode)?,
        Cmd::Mass { g, c, index, stratum } => run_mass(cli, *g, *c, *index, *stratum)?,
        Cmd::Torsion { n, s, trials } => run_torsion(cli, *n, *s, *trials)?,
        Cmd::G4 { max_attempts } => run_g4(cli, *max_attempts)?,
        Cmd::Eo { g } => run_eo(cli, *g)?,
    };
    Ok(render(cli, report))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind::*;
            let code = match e.kind() {
                DisplayHelp | DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(3);
                }
            } else {
                print!("{text}");
            }
        }
        Err(Error::Budget(msg)) => {
            eprintln!("error: budget exceeded: {msg}");
            std::process::exit(2);
        }
        Err(Error::Invalid(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            std::process::exit(3);
        }
    }
}
