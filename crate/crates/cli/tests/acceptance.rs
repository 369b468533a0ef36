//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::Command;

use heavenly::expr::parse_expression;
use heavenly::flows::FlowKind;
use heavenly::grid::{Grid, GridFunction};
use heavenly::lax::{pde_residual, JetField};
use heavenly::poisson::flow_consistency;
use heavenly::report::VerificationReport;
use heavenly::suites::{self, EvolveRun};
use heavenly::Case;

type Outcome = Result<Vec<VerificationReport>, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn all_pass(reports: &[VerificationReport]) -> bool {
    !reports.is_empty() && reports.iter().all(|r| r.pass)
}

fn summary(reports: &[VerificationReport]) -> String {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}[{}] defect {:.3e} > {:.1e}", r.check, r.case, r.defect, r.tolerance))
        .collect();
    if failed.is_empty() {
        format!("{} checks", reports.len())
    } else {
        failed.join("; ")
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion1() -> Outcome {
    let mut out = Vec::new();
    for (case, p) in [(Case::MikhalevPavlov, 0), (Case::MikhalevPavlov, -1), (Case::Plebanski, -1)] {
        out.extend(suites::bracket_suite(case, 128, p).map_err(err)?.0);
    }
    for case in [Case::MikhalevPavlov, Case::Plebanski] {
        for p in [-3, -2, 1, 2] {
            out.extend(suites::bracket_suite(case, 128, p).map_err(err)?.0);
        }
    }
    Ok(out)
}

fn criterion2() -> Outcome {
    let reports = suites::poisson_suite(128, 7).map_err(err)?;
    Ok(reports.into_iter().filter(|r| r.check.starts_with("skew_") || r.check.starts_with("jacobi_")).collect())
}

fn criterion3() -> Outcome {
    let grid = Grid::new_1d(256).map_err(err)?;
    let reports = flow_consistency(&suites::tilted_field(grid).map_err(err)?).map_err(err)?;
    if reports.iter().any(|r| r.sign.is_none()) {
        return Err("resolved sign missing".into());
    }
    Ok(reports)
}

fn criterion4() -> Outcome {
    let reports = suites::reconstruct_suite(256, 7).map_err(err)?;
    let wanted = ["variational_cubic", "homotopy_h0", "homotopy_t_flow"];
    Ok(reports.into_iter().filter(|r| wanted.contains(&r.check.as_str())).collect())
}

fn criterion5() -> Outcome {
    let mut out = Vec::new();
    for (case, n) in [(Case::MikhalevPavlov, 128), (Case::Plebanski, 32)] {
        let jets = suites::jets(case, n, None, 7, 5, 0.3, 0.2).map_err(err)?;
        out.extend(suites::lax_suite(case, &jets).map_err(err)?);
    }
    let (y, t) = (0.3, 0.2);
    let e = parse_expression("sin(x+y+t)").map_err(err)?;
    let grid = Grid::new_1d(128).map_err(err)?;
    let jet = JetField::from_expression(Case::MikhalevPavlov, &e, grid, y, t).map_err(err)?;
    let residual = pde_residual(&jet).map_err(err)?;
    let expected = GridFunction::from_fn(grid, |x| -2.0 * (x + y + t).sin());
    out.push(VerificationReport::new("mp_residual_sin", "mp", residual.sup_distance(&expected), 1e-10));
    Ok(out)
}

fn criterion6() -> Outcome {
    let mut out = Vec::new();
    for (case, n) in [(Case::MikhalevPavlov, 128), (Case::Plebanski, 32)] {
        let jets = suites::jets(case, n, None, 7, 5, 0.3, 0.2).map_err(err)?;
        out.extend(suites::casimir_suite(case, &jets).map_err(err)?);
    }
    Ok(out)
}

fn criterion7() -> Outcome {
    let mut out = Vec::new();
    for flow in [FlowKind::MpY, FlowKind::MpT] {
        let run = EvolveRun {
            flow,
            init: parse_expression("0.1*sin(x)").map_err(err)?,
            n: 256,
            dt: 1e-3,
            t_end: 0.1,
            dealias: false,
            order_check: true,
        };
        out.extend(suites::evolve_suite(&run).map_err(err)?.0);
    }
    Ok(out)
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_heavenly")).args(args).output().map_err(err)?;
    if !output.status.success() {
        return Err(format!("{args:?} exited with {}", output.status));
    }
    Ok(output.stdout)
}

fn criterion8() -> Outcome {
    let invocations: [&[&str]; 3] = [
        &["verify", "poisson", "--case", "mp", "--grid", "64", "--seed", "11"],
        &["lax-check", "--case", "plebanski", "--grid", "16", "--seed", "11"],
        &["verify", "loop-algebra", "--case", "mp", "--grid", "64", "--seed", "11"],
    ];
    let mut out = Vec::new();
    for args in invocations {
        let (a, b) = (run_cli(args)?, run_cli(args)?);
        let defect = if a == b { 0.0 } else { 1.0 };
        out.push(VerificationReport::new(format!("byte_identical {}", args[..2].join(" ")), "cli", defect, 0.0));
    }
    Ok(out)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("bracket kernels", criterion1),
        ("Poisson skew and Jacobi", criterion2),
        ("bi-Hamiltonian flow consistency", criterion3),
        ("Hamiltonian reconstruction", criterion4),
        ("Lax equivalence", criterion5),
        ("Casimir defects", criterion6),
        ("flow integration", criterion7),
        ("reproducibility", criterion8),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(reports) => (all_pass(&reports), summary(&reports)),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} criterion {} ({name}): {detail}", if ok { "PASS" } else { "FAIL" }, k + 1);
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
