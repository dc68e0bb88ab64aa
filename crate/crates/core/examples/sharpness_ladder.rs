//! Scaling family f_A = A^{n/p} 1_{B(0,2/A)}: the modular of I f_A under the
//! critical and an inflated exponent.

use rieszlab::harness::experiments::run_sharpness;
use rieszlab::harness::Config;

fn main() -> rieszlab::Result<()> {
    for eps in [0.0, 0.5] {
        let cfg = Config::from_json(&format!(
            r#"{{"kernel": {{"preset": "log-john(1.2,1)"}}, "params": {{"n": 2, "p": 1, "epsilon": {eps}}},
                "grid": {{"resolutions": [256]}}, "sweep": {{"ladder": [1, 2, 4, 8]}}}}"#
        ))?;
        let r = run_sharpness(&cfg)?;
        println!("eps = {eps}: J = {:?} -> {}", r.values("J").iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>(), r.verdict.as_str());
        println!("  ||f_A||_1 = {:?}", r.values("norm").iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    }
    Ok(())
}
