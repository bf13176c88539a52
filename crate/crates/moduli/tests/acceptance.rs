//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the PASS/FAIL lines are always printed; the process exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use moduli::verify::{expected_dimension, grid_values, run_suite, su2_feasible, SuiteConfig};

/// su(2) orbits of radii a, b, c close up into a zero-sum triple exactly when
/// the radii satisfy the triangle inequality.
fn triangle(a: f64, b: f64, c: f64) -> bool {
    a + b >= c && b + c >= a && c + a >= b
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    // Independent oracles for the quantities the suites compare against.
    let vs = grid_values();
    let oracle_ok =
        vs.iter().all(|&a| vs.iter().all(|&b| vs.iter().all(|&c| su2_feasible([a, b, c]) == triangle(a, b, c))));
    let dims_ok = expected_dimension(2) == 0 && expected_dimension(3) == 2;

    let criteria: [(&str, &str); 9] = [
        ("1 iwasawa round-trip", "iwasawa"),
        ("2 r-matrix CYBE and reality", "r_matrix"),
        ("3 e-map equivariance and f round-trip", "e_map"),
        ("4 xi-image geometry", "xi_geometry"),
        ("5 KK bracket vs intersection sum", "goldman"),
        ("6 chi side: level set and FR vs dual bracket", "chi"),
        ("7 dimension count", "dimension"),
        ("8 bracket axioms", "axioms"),
        ("9 su(2) solver vs triangle oracle", "solver_grid"),
    ];
    let total = Instant::now();
    let mut all = true;
    for (label, suite) in criteria {
        let (ok, detail) = match run_suite(suite, &cfg) {
            Ok(res) => {
                let mut ok = res.passed();
                if suite == "solver_grid" {
                    ok &= oracle_ok;
                }
                if suite == "dimension" {
                    ok &= dims_ok;
                }
                let worst = res
                    .checks
                    .iter()
                    .map(|c| format!("{}={:.2e}/{:.0e}", c.name, c.residual, c.tolerance))
                    .collect::<Vec<_>>()
                    .join(" ");
                (ok, format!("[{:.1}s] {worst}", res.seconds))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("{} criterion {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance total {:.1}s", total.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
