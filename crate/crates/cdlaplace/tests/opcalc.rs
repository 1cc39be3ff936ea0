use cdlaplace::opcalc::{run_suite, SuiteOptions, Verdict, SUITE_IDS};

#[test]
fn every_suite_passes() {
    let opts = SuiteOptions::default();
    let mut failed = Vec::new();
    for id in SUITE_IDS {
        let t = std::time::Instant::now();
        let reports = run_suite(id, &opts).unwrap_or_else(|e| panic!("{id}: {e}"));
        for r in &reports {
            println!(
                "{:<26} {:<8} res {:.2e} tol {:.2e} qerr {:.2e} {} {}",
                r.id, r.verdict, r.max_residual, r.tolerance, r.quad_error, r.description, r.note.clone().unwrap_or_default()
            );
            if r.verdict == Verdict::Fail {
                failed.push(r.description.clone());
            }
        }
        println!("-- {id}: {:.1}s", t.elapsed().as_secs_f64());
    }
    assert!(failed.is_empty(), "{failed:?}");
}
