//! Orlicz-Sobolev embedding on the unit square with trig fields, then the
//! mushroom sequence that breaks it for a too-large H.

use rieszlab::harness::{run, Config, Subcommand};

fn main() -> rieszlab::Result<()> {
    let square = Config::from_json(
        r#"{"kernel": {"preset": "log-john(1.2,1)"}, "params": {"n": 2, "p": 1},
            "grid": {"resolutions": [32, 64]}, "fields": {"families": ["trig"], "count": 3, "seed": 5}}"#,
    )?;
    let r = run(Subcommand::Embedding, &square)?;
    println!("square: integral {:.4e}, norm ratio {:.4}, {}", r.constants["integral"], r.constants["norm_ratio"], r.verdict.as_str());

    let mushrooms = Config::from_json(
        r#"{"kernel": {"preset": "log-john(1.2,0)"}, "orlicz": {"family": "power", "params": {"p": 2}},
            "params": {"n": 2, "p": 1}, "grid": {"resolutions": [256]},
            "domain": {"kind": "mushroom", "mushroom": {"n": 2, "phi": {"family": "power", "alpha": 1.2}, "count": 4}}}"#,
    )?;
    let r = run(Subcommand::Embedding, &mushrooms)?;
    for (row, grad) in r.series.iter().filter(|s| s.series == "integral").zip(r.values("grad_norm")) {
        println!("{}: integral {:.4}, ||grad u||_1 {:.4}", row.label, row.value, grad);
    }
    println!("mushrooms: {}", r.verdict.as_str());
    Ok(())
}
