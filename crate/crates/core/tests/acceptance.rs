//! Full-size acceptance run: one PASS/FAIL line per criterion, with the
//! individual checks listed underneath. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use polyheat::verify::{self, Check, McFamily, SuiteOptions};

struct Criterion {
    id: usize,
    title: &'static str,
    budget: Option<Duration>,
    run: Box<dyn Fn() -> Vec<Check>>,
}

fn criterion(id: usize, title: &'static str, budget: Option<u64>, run: impl Fn() -> Vec<Check> + 'static) -> Criterion {
    Criterion { id, title, budget: budget.map(Duration::from_secs), run: Box::new(run) }
}

fn determinism() -> Vec<Check> {
    let o = SuiteOptions { quick: true, ..SuiteOptions::default() };
    let start = Instant::now();
    let a = verify::run_suite("all", &o).map(|r| r.to_csv());
    let first = start.elapsed().as_secs_f64();
    let b = verify::run_suite("all", &o).map(|r| r.to_csv());
    match (a, b) {
        (Ok(a), Ok(b)) => vec![
            Check::flagged("C13.bytes", "quick all-suite reports byte-identical", a.len() as f64, verify::Bound::AtLeast(1.0), a == b),
            Check::new("C13.time", "quick all-suite wall time (s)", first, verify::Bound::AtMost(300.0)),
        ],
        (Err(e), _) | (_, Err(e)) => vec![Check::failed("C13", "quick all-suite", &e)],
    }
}

fn main() {
    let seed = 1;
    let criteria = vec![
        criterion(1, "spectral kernel matches the 3-star closed form", Some(60), move || {
            verify::oracle_equivalence(1.0 / 200.0, 50, seed)
        }),
        criterion(2, "star small-time constants", None, verify::small_time_constants),
        criterion(3, "two-star reduces to the interval", None, verify::two_star_interval),
        criterion(4, "on-diagonal dimension exponents", Some(120), || verify::dimension_exponents(false)),
        criterion(5, "Gaussian envelope constants are stable", None, move || verify::gaussian_shapes(500, seed)),
        criterion(6, "Poincare audits", None, move || {
            let mut c = verify::group_weak_poincare(200, seed);
            c.extend(verify::canonical_poincare_constants());
            c
        }),
        criterion(7, "Whitney cover audits", None, move || verify::whitney_audits(100, 300, seed)),
        criterion(8, "group walk exactness", None, verify::group_walks),
        criterion(9, "large-time ratio, amenable groups", None, || {
            let mut c = verify::large_time("z1");
            c.extend(verify::large_time("z2"));
            c
        }),
        criterion(10, "nonamenable decay", None, move || verify::nonamenable_decay(30, seed)),
        criterion(11, "eigenvalue and trace comparison", None, || {
            let mut c = verify::eigen_comparison("z1");
            c.extend(verify::eigen_comparison("z2"));
            c
        }),
        criterion(12, "Monte Carlo consistency", Some(180), move || {
            let mut c = verify::monte_carlo(McFamily::Star, 200_000, seed);
            c.extend(verify::monte_carlo(McFamily::Circle, 200_000, seed));
            c
        }),
        criterion(13, "determinism of the quick all-suite", None, determinism),
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let checks = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.budget.is_none_or(|b| elapsed <= b);
        let pass = !checks.is_empty() && checks.iter().all(|k| k.pass) && in_time;
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {}  {}  ({:.1}s)", c.id, if pass { "PASS" } else { "FAIL" }, c.title, elapsed.as_secs_f64());
        for k in &checks {
            println!("    {}", k.line());
        }
        if !in_time {
            println!("    over budget of {}s", c.budget.unwrap().as_secs());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
