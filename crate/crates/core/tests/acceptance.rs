//! Acceptance suite. Prints one line per criterion and fails if any
//! criterion fails. Criteria 10-14 need the standard 256x256 test images
//! (barbara, boat, fence, parrot as .png or .pgm) in the directory named by
//! `DEJASP_TEST_IMAGES`; without it they are reported as SKIP.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use dejasp_core::act::{act_denoise, soft_shrink, ActConfig, NoiseLevel};
use dejasp_core::curvelet::{CurveletParams, CurveletPyramid, CurveletTransform};
use dejasp_core::dejasp::{solve, solve_u, u_rhs, w_subproblem, Solver, SolverConfig};
use dejasp_core::image::ImageBuffer;
use dejasp_core::impulse::{detect, DetectorConfig, NoiseKind, PixelMask};
use dejasp_core::metrics::{psnr, ssim};
use dejasp_core::nlsm::{block_match, nlsm_forward, nlsm_shrink_inverse, GroupTransform, PatchGeometry};
use dejasp_core::noise::{corrupt, NoiseSpec};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

enum Outcome {
    Pass,
    Fail,
    Skip,
}

struct Report {
    lines: Vec<(Outcome, String)>,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String, elapsed: Duration) {
        let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
        self.push(outcome, format!("{id:>3} {detail} [{:.1}s]", elapsed.as_secs_f64()));
    }

    fn skip(&mut self, id: &str, detail: &str) {
        self.push(Outcome::Skip, format!("{id:>3} {detail}"));
    }

    fn push(&mut self, outcome: Outcome, text: String) {
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        println!("{tag} {text}");
        self.lines.push((outcome, text));
    }

    fn failures(&self) -> Vec<&str> {
        self.lines
            .iter()
            .filter(|(o, _)| matches!(o, Outcome::Fail))
            .map(|(_, t)| t.as_str())
            .collect()
    }
}

fn random_image(n: usize, rng: &mut ChaCha8Rng) -> ImageBuffer {
    ImageBuffer::from_fn(n, n, |_| rng.random_range(0.0..255.0)).unwrap()
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).mapv(f64::abs).fold(0.0, |m, &v| m.max(v))
}

fn criterion_1(report: &mut Report) {
    let start = Instant::now();
    let t = CurveletTransform::new(64, 64, CurveletParams::for_size(64, 64)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut energy, mut round) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = random_image(64, &mut rng);
        let pyr = t.forward(&x).unwrap();
        let direct: f64 = x.pixels().iter().map(|v| v * v).sum();
        let coeffs: f64 = pyr.to_vec().iter().map(|c| c.norm_sqr()).sum();
        energy = energy.max((coeffs / direct - 1.0).abs());
        round = round.max(max_abs(t.inverse(&pyr).unwrap().pixels(), x.pixels()));
    }
    let elapsed = start.elapsed();
    report.check(
        "1",
        energy < 1e-8 && round < 1e-8 && elapsed.as_secs_f64() < 30.0,
        format!("curvelet tight frame, 100 images: max |energy ratio - 1| = {energy:.2e}, max roundtrip err = {round:.2e} (< 1e-8, < 30 s)"),
        elapsed,
    );
}

fn criterion_2(report: &mut Report) {
    let start = Instant::now();
    let t = CurveletTransform::new(64, 64, CurveletParams::for_size(64, 64)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = ImageBuffer::from_fn(64, 64, |_| rng.random::<f64>()).unwrap();
        let bands = t
            .geometry()
            .subbands()
            .iter()
            .map(|s| {
                Array2::from_shape_fn((s.rows, s.cols), |_| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect();
        let y = CurveletPyramid::from_bands(t.geometry().clone(), bands).unwrap();
        let lhs: f64 = t
            .forward(&x)
            .unwrap()
            .to_vec()
            .iter()
            .zip(y.to_vec())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        let rhs: f64 = (x.pixels() * t.inverse(&y).unwrap().pixels()).sum();
        worst = worst.max((lhs - rhs).abs());
    }
    report.check(
        "2",
        worst < 1e-8,
        format!("adjoint identity, 20 pairs: max |<Psi x, y> - <x, Psi^T y>| = {worst:.2e} (< 1e-8)"),
        start.elapsed(),
    );
}

fn criterion_3(report: &mut Report) {
    let start = Instant::now();
    let t = GroupTransform::new(8, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut round, mut parseval) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let stack: Vec<f64> = (0..640).map(|_| rng.random_range(0.0..255.0)).collect();
        let coeffs = t.forward(&stack);
        let back = t.inverse(&coeffs);
        round = round.max(back.iter().zip(&stack).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let nx = stack.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nc = coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        parseval = parseval.max((nx - nc).abs() / nx);
    }
    report.check(
        "3",
        round < 1e-10 && parseval < 1e-10,
        format!("3D group transform, 1000 stacks 8x8x10: roundtrip err = {round:.2e}, relative |‖Θ‖-‖x‖| = {parseval:.2e} (< 1e-10)"),
        start.elapsed(),
    );
}

fn criterion_4(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let y: f64 = rng.random_range(-8.0..8.0);
        let rho: f64 = rng.random_range(0.0..4.0);
        let (mut best_v, mut best_obj) = (0.0, f64::INFINITY);
        for i in 0..=20_000 {
            let v = -10.0 + i as f64 * 1e-3;
            let obj = 0.5 * (v - y) * (v - y) + rho * v.abs();
            if obj < best_obj {
                best_obj = obj;
                best_v = v;
            }
        }
        worst = worst.max((soft_shrink(y, rho) - best_v).abs());
    }
    report.check(
        "4",
        worst <= 1e-3,
        format!("proximal oracle, 50 (y, rho): max |soft_shrink - grid argmin| = {worst:.1e} (<= 1e-3)"),
        start.elapsed(),
    );
}

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn criterion_5(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let cfg = SolverConfig {
            fidelity: if trial % 2 == 0 { 1.0 } else { SolverConfig::default().fidelity },
            ..SolverConfig::default()
        };
        let mut img = || ImageBuffer::from_fn(16, 16, |_| rng.random_range(-50.0..300.0)).unwrap();
        let (synth, w, c, f) = (img(), img(), img(), img());
        let mask = PixelMask::from_flags(Array2::from_shape_fn((16, 16), |_| rng.random_bool(0.7)));
        let d = u_rhs(&synth, &w, &c, &f, &mask, &cfg).unwrap();
        let u = solve_u(&d, &mask, &cfg);

        let n = 256;
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for (i, ((idx, &m), dv)) in mask.flags().indexed_iter().zip(&d).enumerate() {
            let _ = idx;
            a[i][i] = cfg.mu + if m { cfg.fidelity } else { 0.0 };
            rhs[i] = *dv;
        }
        let x = dense_solve(a, rhs);
        let num: f64 = u.iter().zip(&x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    report.check(
        "5",
        worst < 1e-12,
        format!("u-subproblem vs dense solve of (gamma Phi^T Phi + mu I) u = D, 20 cases 16x16: max rel err = {worst:.2e} (< 1e-12)"),
        start.elapsed(),
    );
}

fn criterion_6(report: &mut Report) {
    let start = Instant::now();
    let geom = PatchGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0usize;
    let mut groups = 0usize;
    for _ in 0..20 {
        let img = random_image(64, &mut rng);
        let sets = block_match(&img, &geom).unwrap();
        let px = img.pixels();
        for set in &sets.sets {
            groups += 1;
            let (r0, c0) = set.reference();
            let mut all = Vec::new();
            for r in r0.saturating_sub(10)..=(r0 + 9).min(56) {
                for c in c0.saturating_sub(10)..=(c0 + 9).min(56) {
                    let mut d = 0.0;
                    for i in 0..8 {
                        for j in 0..8 {
                            let e = px[[r0 + i, c0 + j]] - px[[r + i, c + j]];
                            d += e * e;
                        }
                    }
                    all.push((d, r * 64 + c, (r, c)));
                }
            }
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expected: Vec<(usize, usize)> = all.iter().take(10).map(|e| e.2).collect();
            if expected != set.members {
                mismatches += 1;
            }
        }
    }
    report.check(
        "6",
        mismatches == 0,
        format!("block matching vs exhaustive search, 20 images 64x64: {mismatches} of {groups} groups differ"),
        start.elapsed(),
    );
}

fn criterion_7(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = random_image(64, &mut rng);
        let (theta, sets) = nlsm_forward(&z, &PatchGeometry::default()).unwrap();
        let back = nlsm_shrink_inverse(&theta, &sets, 0.0).unwrap();
        worst = worst.max(max_abs(back.pixels(), z.pixels()));
    }
    report.check(
        "7",
        worst < 1e-8,
        format!("NLSM zero-threshold roundtrip, 10 images 64x64: max err = {worst:.2e} (< 1e-8)"),
        start.elapsed(),
    );
}

fn test_scene(n: usize) -> ImageBuffer {
    ImageBuffer::from_fn(n, n, |(r, c)| {
        let (x, y) = (c as f64, r as f64);
        let disk = if (x - 0.4 * n as f64).powi(2) + (y - 0.5 * n as f64).powi(2) < 0.05 * (n * n) as f64 {
            70.0
        } else {
            0.0
        };
        (80.0 + 50.0 * (x * 0.13).sin() * (y * 0.06).cos() + disk + 0.4 * y).clamp(10.0, 245.0)
    })
    .unwrap()
}

/// Replays solver iterations by hand from the public subproblem pieces and
/// compares with the instrumented trace.
fn criterion_8(report: &mut Report) {
    let start = Instant::now();
    let clean = test_scene(64);
    let f = corrupt(&clean, &NoiseSpec::new(20.0, 0.2, 0.0, 8).unwrap()).unwrap();
    let mut problems = Vec::new();
    let configs = [
        ("zero thresholds", SolverConfig { tau_prime: 0.0, ..SolverConfig::default() }, 0.0),
        ("default", SolverConfig::for_noise(20.0, 0.2), 20.0),
    ];
    for (name, cfg, sigma) in configs {
        let mut solver = Solver::new(&f, NoiseKind::SaltPepper, NoiseLevel::Declared(sigma), &cfg).unwrap();
        let t = solver.transform().clone();
        let profile = solver.profile().clone();
        for k in 0..3 {
            let before = solver.state().clone();
            let step = solver.step_traced().unwrap();
            let mut bad = |what: &str, ok: bool| {
                if !ok {
                    problems.push(format!("{name} k={k}: {what}"));
                }
            };
            bad("u~ = u^k", step.u_tilde == before.u);
            let hat = t.forward(&before.u).unwrap().add(&before.b).unwrap();
            bad("theta^ = Psi u + b", hat.to_vec() == step.vartheta_hat.to_vec());
            let z = before.u.pixels() - before.c.pixels();
            bad("z = u - c", z == *step.z.pixels());
            let theta = dejasp_core::act::act_shrink(&hat, &profile, cfg.ml_window).unwrap();
            bad("theta = ACT(theta^)", theta.to_vec() == step.vartheta.to_vec());
            if sigma == 0.0 {
                bad("zero profile leaves theta^", theta.to_vec() == hat.to_vec());
            }
            let (w, _, thr) = w_subproblem(&step.z, &cfg).unwrap();
            bad("w from z", w == step.w && thr == step.w_threshold);
            if cfg.tau_prime == 0.0 {
                bad("zero tau' gives w = z", max_abs(w.pixels(), &z) < 1e-8);
            }
            let synth = t.inverse(&theta.sub(&before.b).unwrap()).unwrap();
            let d = u_rhs(&synth, &w, &before.c, &f, &before.mask, &cfg).unwrap();
            let u = solve_u(&d, &before.mask, &cfg);
            bad("u from (theta, w, b, c)", u == *step.u.pixels());
            let s = ssim(&step.u, &before.u).unwrap();
            bad("s = SSIM(u, u~)", s == step.s);
            bad("diff = |s - s_prev|", step.diff == (s - before.last_ssim()).abs());
            let psi_u = t.forward(&step.u).unwrap();
            let residual = step.b.sub(&before.b).unwrap().add(&step.vartheta).unwrap().sub(&psi_u).unwrap();
            bad(
                "b' - b + theta - Psi u = 0",
                residual.to_vec().iter().all(|c| c.norm() < 1e-9),
            );
            let rc = step.c.pixels() - before.c.pixels() + step.u.pixels() - step.w.pixels();
            bad("c' - c + u - w = 0", rc.iter().all(|v| v.abs() < 1e-9));
            bad("s trace length", solver.state().ssim_trace.len() == k + 1);
        }
    }
    report.check(
        "8",
        problems.is_empty(),
        if problems.is_empty() {
            "solver step order and Bregman identities: 2 configs x 3 iterations replayed by hand on 64x64".into()
        } else {
            format!("solver step order: {}", problems.join("; "))
        },
        start.elapsed(),
    );
}

fn criterion_9(report: &mut Report) {
    let start = Instant::now();
    let clean = test_scene(64);
    let spec = NoiseSpec::new(20.0, 0.2, 0.0, 9).unwrap();
    let cfg = SolverConfig::for_noise(20.0, 0.2);
    let run = || {
        let f = corrupt(&clean, &spec).unwrap();
        solve(&f, NoiseKind::SaltPepper, NoiseLevel::Declared(20.0), &cfg, Some(&clean)).unwrap()
    };
    let (a, b) = (run(), run());
    let same_image = a.image.pixels().iter().zip(b.image.pixels()).all(|(x, y)| x.to_bits() == y.to_bits());
    let same_trace = a.trace.len() == b.trace.len()
        && a.trace.iter().zip(&b.trace).all(|(x, y)| x.s_k.to_bits() == y.s_k.to_bits() && x.psnr == y.psnr);
    report.check(
        "9",
        same_image && same_trace,
        format!("determinism: two full solves bit-identical (image {same_image}, trace {same_trace})"),
        start.elapsed(),
    );
}

struct Images {
    dir: PathBuf,
}

impl Images {
    fn from_env() -> Option<Self> {
        let dir = PathBuf::from(std::env::var_os("DEJASP_TEST_IMAGES")?);
        dir.is_dir().then_some(Self { dir })
    }

    fn load(&self, name: &str) -> Option<ImageBuffer> {
        ["png", "pgm", "PNG", "PGM"]
            .iter()
            .map(|ext| self.dir.join(format!("{name}.{ext}")))
            .find(|p| p.exists())
            .and_then(|p: PathBuf| ImageBuffer::load(&p).ok())
    }
}

const SEEDS: u64 = 10;

#[derive(Default, Clone, Copy)]
struct Mean {
    psnr: f64,
    ssim: f64,
}

fn mean_over_seeds(clean: &ImageBuffer, sigma: f64, r: f64, mut method: impl FnMut(&ImageBuffer) -> ImageBuffer) -> Mean {
    let mut m = Mean::default();
    for seed in 0..SEEDS {
        let f = corrupt(clean, &NoiseSpec::new(sigma, r, 0.0, seed).unwrap()).unwrap();
        let out = method(&f);
        m.psnr += psnr(clean, &out).unwrap() / SEEDS as f64;
        m.ssim += ssim(clean, &out).unwrap() / SEEDS as f64;
    }
    m
}

fn amf_init(f: &ImageBuffer) -> ImageBuffer {
    detect(f, NoiseKind::SaltPepper, &DetectorConfig::default()).unwrap().u_init
}

fn act_run(f: &ImageBuffer, sigma: f64) -> ImageBuffer {
    act_denoise(f, NoiseKind::SaltPepper, NoiseLevel::Declared(sigma), &ActConfig::default())
        .unwrap()
        .image
}

fn dejasp_run(f: &ImageBuffer, sigma: f64, r: f64) -> ImageBuffer {
    solve(f, NoiseKind::SaltPepper, NoiseLevel::Declared(sigma), &SolverConfig::for_noise(sigma, r), None)
        .unwrap()
        .image
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn image_criteria(report: &mut Report, images: &Images) {
    let fence = images.load("fence");
    let barbara = images.load("barbara");

    match (&fence, &barbara) {
        (Some(fence), Some(barbara)) => {
            let start = Instant::now();
            let fen = mean_over_seeds(fence, 30.0, 0.3, |f| f.clone());
            let bar = mean_over_seeds(barbara, 20.0, 0.2, |f| f.clone());
            report.check(
                "10",
                within(fen.psnr, 9.92, 0.3) && within(fen.ssim, 0.143, 0.02) && within(bar.psnr, 12.10, 0.3),
                format!(
                    "noisy rows: Fence (30, 0.3) {:.2} dB / {:.3} (9.92±0.3 / 0.143±0.02), Barbara (20, 0.2) {:.2} dB (12.10±0.3)",
                    fen.psnr, fen.ssim, bar.psnr
                ),
                start.elapsed(),
            );
        }
        _ => report.skip("10", "noisy-image rows: fence/barbara not found"),
    }

    let Some(fence) = fence else {
        report.skip("11", "AMF init: fence not found");
        report.skip("12", "iterative ACT: fence not found");
        return cells(report, images);
    };
    let start = Instant::now();
    let amf = mean_over_seeds(&fence, 30.0, 0.3, amf_init);
    let per_image = start.elapsed() / SEEDS as u32;
    report.check(
        "11",
        within(amf.psnr, 18.81, 0.5) && within(amf.ssim, 0.432, 0.03) && per_image.as_secs_f64() < 5.0,
        format!("AMF init Fence (30, 0.3): {:.2} dB / {:.3} (18.81±0.5 / 0.432±0.03)", amf.psnr, amf.ssim),
        start.elapsed(),
    );
    let start = Instant::now();
    let act = mean_over_seeds(&fence, 30.0, 0.3, |f| act_run(f, 30.0));
    let per_image = start.elapsed() / SEEDS as u32;
    report.check(
        "12",
        within(act.psnr, 22.11, 0.7) && within(act.ssim, 0.589, 0.05) && per_image.as_secs_f64() < 120.0,
        format!("iterative ACT x11 Fence (30, 0.3): {:.2} dB / {:.3} (22.11±0.7 / 0.589±0.05)", act.psnr, act.ssim),
        start.elapsed(),
    );
    cells(report, images);
}

fn cells(report: &mut Report, images: &Images) {
    let spots = [
        ("barbara", 0.2, 20.0, 28.06, 0.835),
        ("boat", 0.2, 30.0, 25.88, 0.679),
        ("fence", 0.3, 30.0, 23.80, 0.679),
        ("parrot", 0.2, 20.0, 29.65, 0.837),
    ];
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok13 = true;
    let mut ok14 = true;
    let mut ran = 0;
    let mut slowest = Duration::ZERO;
    for (name, r, sigma, p_ref, s_ref) in spots {
        let Some(clean) = images.load(name) else {
            lines.push(format!("{name}: missing"));
            continue;
        };
        ran += 1;
        let noisy = mean_over_seeds(&clean, sigma, r, |f| f.clone());
        let init = mean_over_seeds(&clean, sigma, r, amf_init);
        let act = mean_over_seeds(&clean, sigma, r, |f| act_run(f, sigma));
        let cell_start = Instant::now();
        let dj = mean_over_seeds(&clean, sigma, r, |f| dejasp_run(f, sigma, r));
        slowest = slowest.max(cell_start.elapsed() / SEEDS as u32);
        let hit = within(dj.psnr, p_ref, 0.75) && within(dj.ssim, s_ref, 0.04);
        let fallback = dj.psnr >= init.psnr + 4.0 && dj.psnr > act.psnr;
        ok13 &= hit || fallback;
        ok14 &= dj.psnr > init.psnr && init.psnr > noisy.psnr && dj.ssim > init.ssim;
        lines.push(format!(
            "{name} ({r}, {sigma}): {:.2}/{:.3} vs {p_ref:.2}/{s_ref:.3}{} [noisy {:.2}/{:.3}, init {:.2}/{:.3}, ACT {:.2}/{:.3}]",
            dj.psnr,
            dj.ssim,
            if hit { "" } else if fallback { " MISS, fallback met" } else { " MISS" },
            noisy.psnr,
            noisy.ssim,
            init.psnr,
            init.ssim,
            act.psnr,
            act.ssim
        ));
    }
    if ran == 0 {
        report.skip("13", "De-JASP reference cells: no test images found");
        report.skip("14", "method ordering: no test images found");
        return;
    }
    for l in &lines {
        println!("     {l}");
    }
    ok13 &= slowest.as_secs_f64() < 600.0;
    report.check("13", ok13, format!("De-JASP spot cells, {ran} of 4 images"), start.elapsed());
    report.check("14", ok14, "ordering De-JASP > init > noisy (PSNR), De-JASP > init (SSIM)".into(), start.elapsed());
}

/// Stand-in for criterion 14 when the test images are absent.
fn ordering_on_synthetic(report: &mut Report) {
    let start = Instant::now();
    let clean = test_scene(128);
    let (sigma, r) = (20.0, 0.2);
    let noisy = mean_over_seeds(&clean, sigma, r, |f| f.clone());
    let init = mean_over_seeds(&clean, sigma, r, amf_init);
    let dj = mean_over_seeds(&clean, sigma, r, |f| dejasp_run(f, sigma, r));
    report.check(
        "14s",
        dj.psnr > init.psnr && init.psnr > noisy.psnr && dj.ssim > init.ssim,
        format!(
            "ordering on a synthetic 128x128 scene (20, 0.2): noisy {:.2}/{:.3}, init {:.2}/{:.3}, De-JASP {:.2}/{:.3}",
            noisy.psnr, noisy.ssim, init.psnr, init.ssim, dj.psnr, dj.ssim
        ),
        start.elapsed(),
    );
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);
    match Images::from_env() {
        Some(images) => image_criteria(&mut report, &images),
        None => {
            for (id, what) in [
                ("10", "noisy-image rows"),
                ("11", "AMF init on Fence"),
                ("12", "iterative ACT on Fence"),
                ("13", "De-JASP reference cells"),
                ("14", "method ordering"),
            ] {
                report.skip(id, &format!("{what}: set DEJASP_TEST_IMAGES to a directory with the 256x256 test images"));
            }
            ordering_on_synthetic(&mut report);
        }
    }
    let failures = report.failures();
    if !failures.is_empty() {
        eprintln!("failing criteria:\n{}", failures.join("\n"));
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed or skipped");
}

