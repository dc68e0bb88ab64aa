//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs sequentially so the timings mean something.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rieszlab::domains::{counterexample_field, divergence_profile, mushroom_build, MushroomSpec, ProfileVerdict};
use rieszlab::fields::{gradient_magnitude, lp_norm};
use rieszlab::harness::experiments::{run_pointwise, run_sharpness};
use rieszlab::harness::families::rough_random;
use rieszlab::harness::{Config, Verdict};
use rieszlab::kernels::{h_series, sum_condition_sup, Preset, PresetParams};
use rieszlab::orlicz::{luxemburg_norm, OrliczFunction};
use rieszlab::potentials::{maximal_function_field, riesz_potential, tail_bound_check, PotentialOptions};
use rieszlab::{DomainGeometry, GridField, LogGrid, MaskedGrid, PhiKernel};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("{what} took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn ball_indicator(mesh: &std::sync::Arc<MaskedGrid>) -> GridField {
    GridField::from_fn(mesh.clone(), |x| if x.iter().map(|v| v * v).sum::<f64>() < 1.0 { 1.0 } else { 0.0 })
}

fn riesz_oracle() -> Outcome {
    let t = Instant::now();
    let m2 = MaskedGrid::discretize(&DomainGeometry::cube(2, -1.0, 1.0), &[256, 256]).map_err(e)?;
    let v2 = riesz_potential(&ball_indicator(&m2), &PhiKernel::identity(), &[0.0, 0.0], &PotentialOptions::default()).map_err(e)?;
    let err2 = (v2 / (2.0 * PI) - 1.0).abs();
    ensure(err2 < 0.02, format!("2D value {v2}, relative error {err2}"))?;
    within_time(t, Duration::from_secs(5), "2D")?;

    let t = Instant::now();
    let m3 = MaskedGrid::discretize(&DomainGeometry::cube(3, -1.0, 1.0), &[128, 128, 128]).map_err(e)?;
    let v3 = riesz_potential(&ball_indicator(&m3), &PhiKernel::identity(), &[0.0; 3], &PotentialOptions::default()).map_err(e)?;
    let err3 = (v3 / (4.0 * PI) - 1.0).abs();
    ensure(err3 < 0.03, format!("3D value {v3}, relative error {err3}"))?;
    within_time(t, Duration::from_secs(60), "3D")?;
    Ok(format!("2D rel err {err2:.2e}, 3D rel err {err3:.2e}"))
}

fn h_series_closed_forms() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for k in [64usize, 128] {
        for t in [0.1, 1.0, 10.0] {
            let s = h_series(&PhiKernel::identity(), 2, t, k).map_err(e)?;
            let err = (s.partial_sum - t).abs();
            ensure(err <= 2f64.powi(-(k as i32)) * t, format!("K = {k}, t = {t}: sum {} off by {err}", s.partial_sum))?;
            worst = worst.max(err / t);
        }
    }
    for (n, alpha) in [(2usize, 2.0), (3, 1.5)] {
        let phi = PhiKernel::power_over_log(alpha, 0.0).map_err(e)?;
        let s = h_series(&phi, n, 1.0, 128).map_err(e)?;
        ensure(s.diverges, format!("n = {n}, alpha = {alpha}: no divergence flag within 128 terms"))?;
    }
    within_time(t0, Duration::from_secs(1), "h series")?;
    Ok(format!("max relative error {worst:.1e}, endpoint divergence flagged"))
}

fn luxemburg_checks() -> Outcome {
    let t0 = Instant::now();
    let dom = DomainGeometry::cube(2, 0.0, 1.0);
    let mesh = MaskedGrid::discretize(&dom, &[32, 32]).map_err(e)?;
    let h = OrliczFunction::log_john(2, 1.0, 1.2, 1.0, 0.0, 0.0, std::f64::consts::E).map_err(e)?;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let u = rough_random(seed, &mesh);
        let lambda = 0.1 + seed as f64 * 0.37;
        let a = luxemburg_norm(&u, &h).map_err(e)?.value;
        let b = luxemburg_norm(&u.scaled(lambda), &h).map_err(e)?.value;
        let rel = (b / (lambda * a) - 1.0).abs();
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-10, format!("homogeneity relative error {worst:e}"))?;
    let disk = MaskedGrid::discretize(&DomainGeometry::ball(vec![0.0, 0.0], 1.0), &[64, 64]).map_err(e)?;
    let vol = disk.volume();
    let mut worst_chi = 0.0f64;
    for (c, p) in [(1.0, 1.0), (2.5, 2.0), (0.3, 3.5)] {
        let u = GridField::constant(disk.clone(), c);
        let v = luxemburg_norm(&u, &OrliczFunction::power(p)).map_err(e)?.value;
        worst_chi = worst_chi.max((v / (c * vol.powf(1.0 / p)) - 1.0).abs());
    }
    ensure(worst_chi <= 1e-10, format!("c V^(1/p) relative error {worst_chi:e}"))?;
    within_time(t0, Duration::from_secs(5), "luxemburg")?;
    Ok(format!("homogeneity {worst:.1e}, indicator {worst_chi:.1e}"))
}

fn condition_frontier() -> Outcome {
    let t0 = Instant::now();
    let grid = LogGrid::new(-8, 8, 6);
    let preset = Preset::LogJohn { alpha: 1.2, beta: 1.0 };
    let base = preset.resolve(PresetParams::new(2, 1.0)).map_err(e)?;
    let c = sum_condition_sup(&base.inputs(), &grid).map_err(e)?;
    ensure(!c.estimate.unbounded && c.estimate.value.is_finite(), format!("critical exponent flagged: {:?}", c.estimate))?;
    let mut params = PresetParams::new(2, 1.0);
    params.epsilon = 0.5;
    let inflated = preset.resolve(params).map_err(e)?;
    let d = sum_condition_sup(&inflated.inputs(), &grid).map_err(e)?;
    ensure(d.estimate.unbounded, format!("inflated exponent not flagged: {:?}", d.estimate))?;
    within_time(t0, Duration::from_secs(5), "condition sweep")?;
    Ok(format!("sup {:.4} at q = 5/3; eps = 0.5 grows x{:.2} per decade", c.estimate.value, d.estimate.decade_growth))
}

fn pointwise_stability() -> Outcome {
    let t0 = Instant::now();
    let cfg = Config::from_json(
        r#"{"kernel": {"preset": "classical"}, "params": {"n": 2, "p": 1.5},
            "grid": {"resolutions": [64, 128]},
            "fields": {"families": ["indicator", "gaussian", "random"], "count": 2, "seed": 7}}"#,
    )
    .map_err(e)?;
    let r = run_pointwise(&cfg).map_err(e)?;
    let drift = r.constants["drift"];
    ensure(drift < 0.25, format!("drift {drift}"))?;
    ensure(r.verdict == Verdict::Bounded, format!("verdict {}", r.verdict.as_str()))?;
    ensure(r.prechecks.iter().all(|c| c.passed), "a hypothesis check failed")?;
    within_time(t0, Duration::from_secs(120), "pointwise")?;
    Ok(format!("drift {drift:.3}"))
}

fn maximal_identities() -> Outcome {
    let t0 = Instant::now();
    let opts = PotentialOptions::default();
    for dom in [DomainGeometry::cube(2, 0.0, 1.0), DomainGeometry::ball(vec![0.0, 0.0], 1.0)] {
        let mesh = MaskedGrid::discretize(&dom, &[48, 48]).map_err(e)?;
        for c in [0.7, 3.0, 1e-3] {
            let m = maximal_function_field(&GridField::constant(mesh.clone(), c), &opts).map_err(e)?;
            ensure(mesh.masked().iter().all(|&i| m.values()[i] == c), format!("M{c} != {c} on {}", dom.label))?;
        }
    }
    let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, 0.0, 1.0), &[48, 48]).map_err(e)?;
    let mut worst = f64::NEG_INFINITY;
    for pair in 0..20u64 {
        let f = rough_random(2 * pair, &mesh);
        let g = rough_random(2 * pair + 1, &mesh).map(|v| v - 0.5);
        let sum = GridField::from_values(mesh.clone(), f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).map_err(e)?;
        let (mf, mg, ms) = (
            maximal_function_field(&f, &opts).map_err(e)?,
            maximal_function_field(&g, &opts).map_err(e)?,
            maximal_function_field(&sum, &opts).map_err(e)?,
        );
        for &i in mesh.masked() {
            let bound = mf.values()[i] + mg.values()[i];
            worst = worst.max((ms.values()[i] - bound) / bound);
        }
    }
    ensure(worst <= 1e-12, format!("sublinearity violated by {worst:e} relative"))?;
    within_time(t0, Duration::from_secs(30), "maximal")?;
    Ok(format!("max relative excess {worst:.1e}"))
}

fn mushroom_divergence() -> Outcome {
    let t0 = Instant::now();
    let phi = PhiKernel::power(1.2).map_err(e)?;
    let spec = MushroomSpec::geometric(2, phi.clone(), 1.0, 0.5, 30, 1).map_err(e)?;
    let prof = divergence_profile(&spec, 1.0, &OrliczFunction::power(2.0), 30).map_err(e)?;
    let target = 2f64.powf(0.4);
    let worst = prof.lower_bound.windows(2).map(|w| (w[1] / w[0] - target).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-9, format!("ratio off by {worst:e}"))?;
    ensure(prof.verdict == ProfileVerdict::Diverges, "Power(2) profile not diverging")?;
    let mild = divergence_profile(&spec, 1.0, &OrliczFunction::power(1.5), 30).map_err(e)?;
    ensure(mild.verdict == ProfileVerdict::Bounded, "Power(1.5) profile not bounded")?;
    let mut grid_worst = 0.0f64;
    for k in 1..=4 {
        let one = MushroomSpec {
            n: 2,
            phi: phi.clone(),
            radii: vec![2f64.powi(-k)],
            first_index: k as usize,
        };
        let mesh = MaskedGrid::discretize(&mushroom_build(&one).map_err(e)?, &[512, 512]).map_err(e)?;
        let ce = counterexample_field(&one, k as usize, 1.0, mesh).map_err(e)?;
        let fd = lp_norm(&gradient_magnitude(&ce.u), 1.0).map_err(e)?;
        ensure((fd - 1.0).abs() < 0.05, format!("k = {k}: grid gradient norm {fd}"))?;
        grid_worst = grid_worst.max((fd - 1.0).abs());
    }
    within_time(t0, Duration::from_secs(120), "mushroom")?;
    Ok(format!("ratio error {worst:.1e}, grid gradient error {grid_worst:.3}"))
}

fn sharpness_scaling() -> Outcome {
    let t0 = Instant::now();
    let cfg = |eps: f64| {
        Config::from_json(&format!(
            r#"{{"kernel": {{"preset": "log-john(1.2,1)"}}, "params": {{"n": 2, "p": 1, "epsilon": {eps}}},
                "grid": {{"resolutions": [512]}}, "sweep": {{"ladder": [1, 2, 4, 8]}}}}"#
        ))
        .map_err(e)
    };
    let inflated = run_sharpness(&cfg(0.5)?).map_err(e)?;
    let j = inflated.values("J");
    ensure(j.windows(2).all(|w| w[1] > w[0]), format!("J not increasing: {j:?}"))?;
    ensure(inflated.constants["norm_deviation"] < 0.02, format!("norm deviation {}", inflated.constants["norm_deviation"]))?;
    let norms = inflated.values("norm");
    let spread = norms.iter().copied().fold(0.0, f64::max) / norms.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    ensure(spread < 0.02, format!("norm spread {spread}"))?;
    let critical = run_sharpness(&cfg(0.0)?).map_err(e)?;
    let growth = critical.constants["growth"];
    ensure(growth < 2.0, format!("J(8)/J(1) = {growth} at eps = 0"))?;
    within_time(t0, Duration::from_secs(300), "sharpness")?;
    Ok(format!("eps = 0.5 growth {:.2}, eps = 0 growth {growth:.2}, norm spread {spread:.4}", inflated.constants["growth"]))
}

fn tail_bound() -> Outcome {
    let t0 = Instant::now();
    let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, 0.0, 1.0), &[64, 64]).map_err(e)?;
    let phi = PhiKernel::power_over_log(1.2, 1.0).map_err(e)?;
    let points: Vec<Vec<f64>> = (0..16).map(|i| vec![0.1 + 0.05 * i as f64, 0.8 - 0.04 * i as f64]).collect();
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let f = rough_random(100 + seed, &mesh);
        let f = f.scaled(1.0 / lp_norm(&f, 1.0).map_err(e)?);
        for delta in [0.05, 0.2, 0.5] {
            let c = tail_bound_check(&f, &phi, 1.0, delta, &points, &PotentialOptions::default()).map_err(e)?;
            worst = worst.max(c.constant.unwrap_or(0.0));
        }
    }
    ensure(worst <= 1.03, format!("tail ratio {worst}"))?;
    within_time(t0, Duration::from_secs(60), "tail")?;
    Ok(format!("max ratio {worst:.4}"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_rieszlab");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut entries: Vec<_> = fs::read_dir(&configs).map_err(e)?.filter_map(|d| d.ok()).map(|d| d.path()).collect();
    entries.sort();
    let tmp = tempfile::tempdir().map_err(e)?;
    let mut runs = 0;
    for cfg in entries.iter().filter(|p| p.extension().is_some_and(|x| x == "json")) {
        let stem = cfg.file_stem().and_then(|s| s.to_str()).ok_or("bad config name")?;
        let sub = stem.split('_').next().ok_or("bad config name")?;
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = tmp.path().join(format!("{stem}-{round}"));
            let status = Command::new(bin).arg(sub).arg("--config").arg(cfg).arg("--out").arg(&out).output().map_err(e)?;
            ensure(status.status.code().is_some_and(|c| c <= 1), format!("{stem}: exit {:?}", status.status.code()))?;
            let mut files: Vec<_> = fs::read_dir(&out).map_err(e)?.filter_map(|d| d.ok()).map(|d| d.path()).collect();
            files.sort();
            let contents: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|f| Ok((f.file_name().unwrap().to_string_lossy().into_owned(), fs::read(f).map_err(e)?)))
                .collect::<Result<_, String>>()?;
            outputs.push(contents);
        }
        ensure(outputs[0] == outputs[1], format!("{stem}: outputs differ between runs"))?;
        runs += 1;
    }
    ensure(runs > 0, "no configs found")?;
    Ok(format!("{runs} configs byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("riesz potential oracle", riesz_oracle),
        ("h-series closed forms", h_series_closed_forms),
        ("luxemburg norm", luxemburg_checks),
        ("compatibility frontier", condition_frontier),
        ("pointwise constant stability", pointwise_stability),
        ("maximal operator identities", maximal_identities),
        ("mushroom divergence", mushroom_divergence),
        ("sharpness scaling", sharpness_scaling),
        ("tail bound", tail_bound),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
