//! Batch driver: load a scenario, run its verification suites, emit
//! deterministic reports.
//!
//! Subcommands:
//!   mcr run <scenario.json> [--seed N] [--tol X] [--level N]
//!                           [--suite NAME ...] [--out DIR]
//!   mcr kernels list
//!   mcr kernels dump <scenario.json> [--out DIR]
//!   mcr explain <suite>
//!
//! Exit codes: 0 all suites pass, 1 suite failure, 2 parse/usage error,
//! 3 resource cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use mcr::error::Error;
use mcr::report::matrix_to_json;
use mcr::scenario::{Scenario, SuiteSpec};
use mcr::suites::run_scenario;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::MemoryCap { .. }
                | Error::TruncationOverflow { .. }
                | Error::StepBudget(_) => ExitCode::from(3),
                Error::Scenario(_) | Error::Io(_) | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(args: &[String]) -> Result<ExitCode, Error> {
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("kernels") => cmd_kernels(&args[1..]),
        Some("explain") => cmd_explain(&args[1..]),
        Some("--help") | Some("-h") | None => {
            print_usage();
            Ok(ExitCode::SUCCESS)
        }
        Some(other) => Err(Error::Scenario(format!("unknown subcommand `{other}`"))),
    }
}

fn print_usage() {
    println!(
        "mcr - exchange-kernel verification workbench

USAGE:
  mcr run <scenario.json> [--seed N] [--tol X] [--level N] [--suite NAME ...] [--out DIR]
  mcr kernels list
  mcr kernels dump <scenario.json> [--out DIR]
  mcr explain <suite>

FLAGS for run:
  --seed N       override the scenario seed
  --tol X        override the moment-class tolerance
  --level N      override the Fock truncation level
  --suite NAME   run only the named suites (repeatable)
  --out DIR      directory for report.json / report.txt (default .)

Suites: {}",
        SuiteSpec::all_names().join(", ")
    );
}

struct RunFlags {
    scenario_path: PathBuf,
    seed: Option<u64>,
    tol: Option<f64>,
    level: Option<usize>,
    suites: Vec<String>,
    out_dir: PathBuf,
}

fn parse_run_flags(args: &[String]) -> Result<RunFlags, Error> {
    let mut flags = RunFlags {
        scenario_path: PathBuf::new(),
        seed: None,
        tol: None,
        level: None,
        suites: Vec::new(),
        out_dir: PathBuf::from("."),
    };
    let mut it = args.iter();
    let mut positional = Vec::new();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--seed" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Scenario("--seed needs a value".into()))?;
                flags.seed = Some(
                    v.parse()
                        .map_err(|_| Error::Scenario(format!("bad seed `{v}`")))?,
                );
            }
            "--tol" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Scenario("--tol needs a value".into()))?;
                flags.tol = Some(
                    v.parse()
                        .map_err(|_| Error::Scenario(format!("bad tolerance `{v}`")))?,
                );
            }
            "--level" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Scenario("--level needs a value".into()))?;
                flags.level = Some(
                    v.parse()
                        .map_err(|_| Error::Scenario(format!("bad level `{v}`")))?,
                );
            }
            "--suite" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Scenario("--suite needs a name".into()))?;
                if !SuiteSpec::all_names().contains(&v.as_str()) {
                    return Err(Error::Scenario(format!("unknown suite `{v}`")));
                }
                flags.suites.push(v.clone());
            }
            "--out" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Scenario("--out needs a directory".into()))?;
                flags.out_dir = PathBuf::from(v);
            }
            other => positional.push(other.to_string()),
        }
    }
    match positional.as_slice() {
        [path] => flags.scenario_path = PathBuf::from(path),
        [] => return Err(Error::Scenario("run needs a scenario file".into())),
        _ => {
            return Err(Error::Scenario(
                "run takes exactly one scenario file".into(),
            ))
        }
    }
    Ok(flags)
}

fn cmd_run(args: &[String]) -> Result<ExitCode, Error> {
    let flags = parse_run_flags(args)?;
    let mut scenario = Scenario::load(&flags.scenario_path)?;
    if let Some(seed) = flags.seed {
        scenario.seed = seed;
    }
    if let Some(tol) = flags.tol {
        scenario.tolerances.moment = tol;
    }
    if let Some(level) = flags.level {
        scenario.model.truncation = level;
    }

    let result = run_scenario(&scenario, &flags.suites)?;

    std::fs::create_dir_all(&flags.out_dir)?;
    let json = serde_json::to_string_pretty(&result.records)?;
    std::fs::write(flags.out_dir.join("report.json"), json.as_bytes())?;
    let mut text = result.text.clone();
    text.push_str(&format!(
        "overall: {}\n",
        if result.pass() { "PASS" } else { "FAIL" }
    ));
    std::fs::write(flags.out_dir.join("report.txt"), text.as_bytes())?;
    if !result.moment_rows.is_empty() {
        let rows = serde_json::to_string_pretty(&result.moment_rows)?;
        std::fs::write(flags.out_dir.join("moments.json"), rows.as_bytes())?;
    }

    print!("{text}");
    if result.pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_kernels(args: &[String]) -> Result<ExitCode, Error> {
    match args.first().map(String::as_str) {
        Some("list") => {
            println!(
                "kernel families:
  abelian          scalar kernel q(y1,y2); q = 1 bosons, q = -1 fermions
  lifted           r x r phase table, exchange swaps component indices
  two_component    opposite types 1 <-> 2; q1 same-type, q2 distinct-type
  three_component  two_component plus an abelian third component (q3, q4)
  opposite_type    general involution theta with a symmetric invariant table
  fused            k-fold fusion of a two-component base (2^k components)
  tabulated        explicit matrices per ordered site pair"
            );
            Ok(ExitCode::SUCCESS)
        }
        Some("dump") => {
            let rest = &args[1..];
            let mut out_dir = PathBuf::from(".");
            let mut path: Option<PathBuf> = None;
            let mut it = rest.iter();
            while let Some(a) = it.next() {
                if a == "--out" {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::Scenario("--out needs a directory".into()))?;
                    out_dir = PathBuf::from(v);
                } else {
                    path = Some(PathBuf::from(a));
                }
            }
            let path = path.ok_or_else(|| Error::Scenario("dump needs a scenario file".into()))?;
            dump_kernel(&path, &out_dir)?;
            Ok(ExitCode::SUCCESS)
        }
        _ => Err(Error::Scenario(
            "kernels subcommands: list, dump <scenario.json>".into(),
        )),
    }
}

/// Write the kernel and its derived transforms for every ordered site pair
/// as JSON arrays of [re, im] pairs in the lexicographic product basis.
fn dump_kernel(path: &Path, out_dir: &Path) -> Result<(), Error> {
    let scenario = Scenario::load(path)?;
    let kernel = scenario.kernel.build(&scenario.model)?;
    let hat = kernel.derive_hat();
    let tilde = kernel.derive_tilde();
    let mut entries = Vec::new();
    for &y1 in &scenario.model.sites {
        for &y2 in &scenario.model.sites {
            entries.push(serde_json::json!({
                "y1": y1,
                "y2": y2,
                "q": matrix_to_json(&kernel.eval(y1, y2)?),
                "q_hat": matrix_to_json(&hat.eval(y1, y2)?),
                "q_tilde": matrix_to_json(&tilde.eval(y1, y2)?),
            }));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let payload = serde_json::json!({
        "family": scenario.kernel.family_name(),
        "basis": "e_i ⊗ e_j -> i*r + j (0-based, row-major matrices)",
        "pairs": entries,
    });
    std::fs::write(
        out_dir.join("kernel_matrices.json"),
        serde_json::to_string_pretty(&payload)?.as_bytes(),
    )?;
    println!("wrote {}", out_dir.join("kernel_matrices.json").display());
    Ok(())
}

fn cmd_explain(args: &[String]) -> Result<ExitCode, Error> {
    let name = args
        .first()
        .ok_or_else(|| Error::Scenario("explain needs a suite name".into()))?;
    let text = match name.as_str() {
        "kernel_axioms" => {
            "kernel_axioms
  unitarity            ||Q(y1,y2) Q(y1,y2)* - 1|| over all site pairs
  adjoint_exchange     ||Q(y1,y2)* - Q(y2,y1)|| over all site pairs
  yang_baxter          braid consistency Q1 Q2 Q1 = Q2 Q1 Q2 with position
                       arguments, over all site triples"
        }
        "family_hypotheses" => {
            "family_hypotheses (phase-table kernels)
  unit_modulus               |q(y1,y2,i,j)| = 1
  conjugate_swap_symmetry    conj(q(y1,y2,i,j)) = q(y2,y1,i,j)
  table_symmetry             q(..,i,j) = q(..,j,i)
  theta_invariance           q(..,theta(i),theta(j)) = q(..,i,j)
  diagonal_sign_constancy    q(y,y,i,i) is one constant in {-1,+1}"
        }
        "assumptions" => {
            "assumptions (state construction prerequisites)
  tilde_unitarity           the index-permutation transform stays unitary
  tilde_adjoint_exchange    tilde(Q)(y1,y2)* = tilde(Q)(y2,y1)
  tilde_involution          applying the transform twice returns Q
  hat_fixes_kernel          hat(Q) = Q
  hat_fixes_tilde           hat(tilde(Q)) = tilde(Q)
  diagonal_trace_constant   Tr(tilde(Q)(y,y) v) = kappa Tr(v) for one real
                            kappa across all sites (kappa is reported)
  doubled_*                 unitarity/adjoint/braid consistency of the
                            doubled kernel on two tagged site copies"
        }
        "fock" => {
            "fock (representation basics)
  projection_idempotent     P_n^2 = P_n on random tensors
  projection_self_adjoint   <P t, u> = <t, P u>
  matches_permutation_sum   recursion evaluation equals the n!-term average
  product_recursion         P_n = (1/n)(1 x P_{n-1})(1 + U_1 + U_1U_2 + ...)
  braid_word_independence   two reduced words of one permutation agree
  ladder_adjointness        <a+(f)F, G> = <F, a-(Jf)G> with n! weights"
        }
        "mcr" => {
            "mcr (commutation relations in the representation)
  create_create_exchange          creator pair exchange against Q
  annihilate_annihilate_exchange  annihilator pair exchange against hat(Q)
  mixed_exchange_contraction      mixed relation: delta contraction plus
                                  the tilde(Q)-exchanged reversed pair
checked exhaustively over one-particle basis pairs and symmetrized basis
vectors up to truncation - 2"
        }
        "pairings" => {
            "pairings (combinatorics)
  count_double_factorial   enumeration size is (2n-1)!!
  shadow_noncrossing       every partition's shadow matching has zero
                           crossings"
        }
        "moments" => {
            "moments (closed formula vs representation)
  oracle_equivalence_lenL  the pair-partition moment sum equals the vacuum
                           expectation of the same field word, relative
                           error, L in the configured lengths
  odd_length_L_vanishes    odd words vanish identically"
        }
        "quasifree" => {
            "quasifree (doubling construction)
  create_create_exchange / annihilate_annihilate_exchange /
  mixed_exchange_contraction   the represented field operators satisfy the
                               same commutation relations as the abstract
                               generators
  moment_identity_mM_nN        state of A+^m A-^n against the matched-pair
                               sum over rho2 (zero when m != n)
  unequal_counts_vanish_*      particle-number grading of the state"
        }
        "strongly_quasifree" => {
            "strongly_quasifree
  field_moment_identity_nN   state of B(f_1)..B(f_n) against the full
                             pair-partition sum over lambda2
  strong_exchange_condition  whether tilde(Q)(y1,y2) = Q(y2,y1) holds;
                             the identity is expected to hold exactly when
                             it does"
        }
        "wick" => {
            "wick (symbolic algebra)
  matrix_cross_oracle         scalar part of the normal form equals the
                              representation vacuum expectation
  rewrite_order_independence  randomized rule orders give the same scalar
  state_positivity            vacuum of a* a is nonnegative
  positivity_real_valued      ... and real"
        }
        other => {
            return Err(Error::Scenario(format!(
                "unknown suite `{other}`; known: {}",
                SuiteSpec::all_names().join(", ")
            )))
        }
    };
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}
