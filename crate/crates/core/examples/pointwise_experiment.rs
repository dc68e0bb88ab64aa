//! The pointwise estimate driver on the classical preset, printed as the
//! JSON report the CLI would write.

use rieszlab::harness::{run, Config, Subcommand};

fn main() -> rieszlab::Result<()> {
    let cfg = Config::from_json(
        r#"{"kernel": {"preset": "classical"}, "params": {"n": 2, "p": 1.5},
            "grid": {"resolutions": [64, 128]},
            "fields": {"families": ["indicator", "gaussian"], "count": 1, "seed": 7}}"#,
    )?;
    let report = run(Subcommand::Pointwise, &cfg)?;
    for c in &report.prechecks {
        println!("{:<16} {}", c.name, if c.passed { "ok" } else { "FAILED" });
    }
    for row in report.series.iter().filter(|r| r.series == "sup_by_resolution") {
        println!("res {:>4}: sup H(If)/(Mf)^p = {:.4}", row.scale, row.value);
    }
    println!("verdict: {}", report.verdict.as_str());
    Ok(())
}
