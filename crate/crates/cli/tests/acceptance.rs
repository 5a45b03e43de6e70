//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use drqa::{run_pipeline, PipelineConfig};
use drqa_core::agreement::{agreement_profile, co_ranking, item_agreement, mean_agreement, psi, weighted_psi};
use drqa_core::dimred::{classical_mds, pca, reduce, smacof, Method, ReductionRequest, SmacofInit, SmacofParams};
use drqa_core::geometry::{config_ranks, euclidean_distances};
use drqa_core::manifolds::{generate, ManifoldShape, ManifoldSpec};
use drqa_core::viz::{
    default_item_order, loess_surface, positive_lift_area, render_heatmap, render_lift, render_loess_overlay,
    render_scatter, RenderSpec,
};
use drqa_core::{AgreementProfile, Configuration, KRange, WeightFunction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_config(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Configuration {
    Configuration::from_flat(n, m, (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn profile(a: &Configuration, b: &Configuration, per_item: bool) -> AgreementProfile {
    agreement_profile(&config_ranks(a).unwrap(), &config_ranks(b).unwrap(), per_item).unwrap()
}

fn knn_oracle(c: &Configuration, i: usize, k: usize) -> HashSet<usize> {
    let d = |j: usize| -> f64 { c.row(i).iter().zip(c.row(j)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() };
    let mut others: Vec<usize> = (0..c.n()).filter(|&j| j != i).collect();
    others.sort_by(|&x, &y| d(x).total_cmp(&d(y)).then(x.cmp(&y)));
    others.truncate(k);
    others.into_iter().collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    for _ in 0..100 {
        let n = rng.random_range(5..=50);
        let a = random_config(&mut rng, n, 3);
        let b = random_config(&mut rng, n, 2);
        let (ra, rb) = (config_ranks(&a).unwrap(), config_ranks(&b).unwrap());
        let p = agreement_profile(&ra, &rb, false).unwrap();
        let omega = co_ranking(&ra, &rb).unwrap();
        for k in 1..n {
            let shared: usize =
                (0..n).map(|i| knn_oracle(&a, i, k).intersection(&knn_oracle(&b, i, k)).count()).sum();
            if p.ar_at(k) != shared as f64 / (k * n) as f64 {
                return Err(format!("n = {n}, k = {k}: AR {} vs oracle {shared}/{}", p.ar_at(k), k * n));
            }
            if omega.block_sum(k) != shared as u64 {
                return Err(format!("n = {n}, k = {k}: block sum {} vs {shared}", omega.block_sum(k)));
            }
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 30.0, format!("{checked} (pair, k) cases exact in {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let line = |v: &[f64]| Configuration::from_flat(v.len(), 1, v.to_vec()).unwrap();
    let (a, b) = (line(&[0.0, 1.0, 3.0, 7.0]), line(&[0.0, 2.0, 3.0, 4.5]));
    let (ra, rb) = (config_ranks(&a).unwrap(), config_ranks(&b).unwrap());
    let p = agreement_profile(&ra, &rb, false).unwrap();
    let omega = co_ranking(&ra, &rb).unwrap();
    let want = [[3, 1, 0], [1, 2, 1], [0, 1, 3]];
    let got: Vec<Vec<u32>> = (1..=3).map(|r| (1..=3).map(|s| omega.count(r, s)).collect()).collect();
    let psi_v = psi(&p).unwrap();
    let ok = p.ar() == [0.75, 0.875, 1.0] && psi_v == 0.625 && got == want;
    check(ok, format!("AR = {:?}, psi = {psi_v}, omega = {got:?}", p.ar()))
}

fn criterion_3() -> Outcome {
    let n = 200;
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_config(&mut rng, n, 3);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let b = a.permuted(&order).unwrap();
        let v = psi(&profile(&a, &b, false)).unwrap();
        total += v;
        worst = worst.max(v.abs());
    }
    let mean = total / 100.0;
    check(mean.abs() <= 0.05, format!("mean psi = {mean:.5}, max |psi| = {worst:.4}"))
}

fn criterion_4() -> Outcome {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let flat = random_config(&mut rng, n, 2);
    let dist = euclidean_distances(&flat, 2.0).unwrap();
    let mds = classical_mds(&dist, 2).unwrap();
    let mds_ok = profile(&flat, &mds.embedding, false).ar().iter().all(|&v| v == 1.0);
    let padded = Configuration::from_flat(n, 3, (0..n).flat_map(|i| [flat.get(i, 0), flat.get(i, 1), 0.0]).collect()).unwrap();
    let pc = pca(&padded, 2, false).unwrap();
    let pca_ok = profile(&padded, &pc.embedding, false).ar().iter().all(|&v| v == 1.0);
    let params = SmacofParams { max_iter: 500, ..Default::default() };
    let sm = smacof(&dist, 2, None, &params, 40).unwrap();
    let diag = sm.diagnostics.smacof().unwrap();
    let monotone = |h: &[f64]| h.windows(2).all(|w| w[1] <= w[0]);
    let random = SmacofParams { init: SmacofInit::Random, ..params };
    let rs = smacof(&dist, 2, None, &random, 40).unwrap();
    let rdiag = rs.diagnostics.smacof().unwrap();
    let smacof_ok = [diag, rdiag].iter().all(|d| d.stress < 0.01 && d.iterations <= 500 && monotone(&d.stress_history));
    check(
        mds_ok && pca_ok && smacof_ok,
        format!(
            "classical MDS AR=1: {mds_ok}, PCA AR=1: {pca_ok}, SMACOF stress {:.2e} ({} iterations) from classical start and {:.2e} ({} iterations) from random start, non-increasing: {}",
            diag.stress, diag.iterations, rdiag.stress, rdiag.iterations, monotone(&diag.stress_history) && monotone(&rdiag.stress_history)
        ),
    )
}

fn embed(c: &Configuration, method: Method, seed: u64) -> Configuration {
    reduce(c, &ReductionRequest::new(method, 2).with_seed(seed)).unwrap().embedding
}

fn criterion_5() -> Outcome {
    let seed = 1;
    let n = 1000;
    let local: Vec<usize> = (1..=10).collect();
    let all: Vec<usize> = (1..n).collect();
    let mut notes = Vec::new();
    let mut ok = true;

    // Points sampled at random in (phi, h). On the grid layout PCA stacks
    // items exactly and index tie-breaking inflates its local agreement; the
    // grid figures are printed for reference only.
    for random in [true, false] {
        let mut spec = ManifoldSpec::new(ManifoldShape::SwissRoll, n, seed);
        spec.params.random = Some(random);
        let roll = generate(&spec).unwrap();
        let mut stats = Vec::new();
        for name in ["smacof", "pca", "local_smacof"] {
            let p = profile(&roll, &embed(&roll, Method::from_name(name).unwrap(), seed), false);
            stats.push((psi(&p).unwrap(), mean_agreement(&p, &local, false).unwrap()));
        }
        let [(ps, ls), (pp, lp), (pl, ll)] = [stats[0], stats[1], stats[2]];
        let a_psi = ps > pp && pp > pl;
        let a_local = ll > ls && ll > lp;
        let figures = format!(
            "psi smacof {ps:.4} > pca {pp:.4} > local {pl:.4}: {a_psi}; k<=10 local {ll:.4} vs smacof {ls:.4}, pca {lp:.4}: {a_local}"
        );
        if random {
            ok &= a_psi && a_local;
            notes.push(format!("(a) random roll {figures}"));
        } else {
            notes.push(format!("[grid roll, not scored: {figures}]"));
        }
    }

    let torus = generate(&ManifoldSpec::new(ManifoldShape::TorusSmallRegular, n, seed)).unwrap();
    let pl = profile(&torus, &embed(&torus, Method::from_name("lle").unwrap(), seed), false);
    let ps = profile(&torus, &embed(&torus, Method::from_name("smacof").unwrap(), seed), false);
    let (ll, ls) = (mean_agreement(&pl, &local, false).unwrap(), mean_agreement(&ps, &local, false).unwrap());
    let (al, as_) = (mean_agreement(&pl, &all, false).unwrap(), mean_agreement(&ps, &all, false).unwrap());
    let b = ll > ls && as_ > al;
    ok &= b;
    notes.push(format!("(b) k<=10 lle {ll:.4} > smacof {ls:.4}, all-k smacof {as_:.4} > lle {al:.4}: {b}"));

    let sphere = generate(&ManifoldSpec::new(ManifoldShape::SphereRegular, n, seed)).unwrap();
    let pi = profile(&sphere, &embed(&sphere, Method::Isomap { n_neighbors: 10 }, seed), false);
    let ai = mean_agreement(&pi, &all, false).unwrap();
    let c = (0.72..=0.92).contains(&ai);
    ok &= c;
    notes.push(format!("(c) isomap all-k {ai:.4} in [0.72, 0.92]: {c}"));
    check(ok, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut identity = true;
    for n in [5, 17, 60, 200] {
        let (a, b) = (random_config(&mut rng, n, 3), random_config(&mut rng, n, 2));
        let p = profile(&a, &b, false);
        identity &= weighted_psi(&p, &WeightFunction::Uniform).unwrap() == psi(&p).unwrap();
        identity &= weighted_psi(&p, &WeightFunction::Table(vec![1.0; n - 1])).unwrap() == psi(&p).unwrap();
    }
    let f = WeightFunction::LinearTaper.resolve(1000).unwrap();
    let cut = 2 * 999 / 3;
    let zeros = (cut..=999).all(|k| f[k - 1] == 0.0);
    let head = (1..999 / 3).all(|k| f[k - 1] == 1.0);
    check(identity && zeros && head, format!("uniform identity: {identity}, f(k) = 0 for k >= {cut}: {zeros}, f = 1 below 333: {head}"))
}

struct LiftGeometry {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    k_max: f64,
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let m = poly.len();
    (0..m).map(|i| poly[i].0 * poly[(i + 1) % m].1 - poly[(i + 1) % m].0 * poly[i].1).sum::<f64>().abs() / 2.0
}

/// Fill area per technique recovered from the SVG, in data units.
fn painted_areas(svg: &str, techniques: usize) -> Vec<f64> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    let frame = doc.descendants().find(|n| n.attribute("class") == Some("frame")).unwrap();
    let num = |n: &roxmltree::Node, a: &str| n.attribute(a).unwrap().parse::<f64>().unwrap();
    let g = LiftGeometry {
        x0: num(&frame, "x"),
        y0: num(&frame, "y"),
        w: num(&frame, "width"),
        h: num(&frame, "height"),
        k_max: num(&frame, "data-k-max"),
    };
    let mut areas = vec![0.0; techniques];
    for poly in doc.descendants().filter(|n| n.attribute("class") == Some("lift-fill")) {
        let pts: Vec<(f64, f64)> = poly
            .attribute("points")
            .unwrap()
            .split_whitespace()
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                let (px, py): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
                ((px - g.x0) / g.w * g.k_max, (g.y0 + g.h - py) / g.h)
            })
            .collect();
        let a = shoelace(&pts);
        for u in poly.attribute("data-cover").unwrap().split(',') {
            areas[u.parse::<usize>().unwrap()] += a;
        }
    }
    areas
}

fn noisy(rng: &mut ChaCha8Rng, c: &Configuration, scale: f64) -> Configuration {
    let v: Vec<f64> = c.values().iter().map(|x| x + scale * rng.random_range(-1.0..1.0)).collect();
    Configuration::from_flat(c.n(), c.dim(), v).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = RenderSpec::default();
    let mut worst = 0.0f64;
    let mut svgs: Vec<String> = Vec::new();
    let mut deterministic = true;
    for trial in 0..12 {
        let n = rng.random_range(8..=120);
        let a = random_config(&mut rng, n, 3);
        let profiles: Vec<AgreementProfile> =
            [0.05, 0.3, 1.0, 3.0][..1 + trial % 4].iter().map(|&s| profile(&a, &noisy(&mut rng, &a, s), true)).collect();
        let named: Vec<(&str, &AgreementProfile)> = profiles.iter().map(|p| ("t", p)).collect();
        let svg = render_lift(&named, &spec).unwrap();
        deterministic &= svg == render_lift(&named, &spec).unwrap();
        for (u, area) in painted_areas(&svg, profiles.len()).into_iter().enumerate() {
            let numerator: f64 = profiles[u].ar_adjusted().iter().map(|v| v.max(0.0)).sum();
            let trapezoid = positive_lift_area(&profiles[u]);
            let err = if numerator > 0.0 { (area - numerator).abs() / numerator } else { area };
            let err = err.max(if numerator > 0.0 { (trapezoid - numerator).abs() / numerator } else { trapezoid });
            worst = worst.max(err);
        }
        svgs.push(svg);
        let b = noisy(&mut rng, &a, 0.2);
        let emb = Configuration::from_flat(n, 2, (0..n).flat_map(|i| [b.get(i, 0), b.get(i, 1)]).collect()).unwrap();
        let p = &profiles[0];
        let range = KRange::Span { from: 1, to: (n - 1).min(10) };
        let spec = RenderSpec { range_k: range.clone(), ..Default::default() };
        let ks = range.resolve(n).unwrap();
        let items = item_agreement(p, &ks, false).unwrap();
        let caption = vec![("mean AR".to_string(), mean_agreement(p, &ks, false).unwrap())];
        let matrix: Vec<f64> = (0..n).flat_map(|i| ks.iter().map(move |&k| p.item_value(i, k).unwrap())).collect();
        let mut loess_spec = spec.clone();
        loess_spec.plot.grid = 8;
        let renders: [Box<dyn Fn() -> String>; 3] = [
            Box::new(|| render_scatter(&[&a, &emb], &items, &caption, &spec).unwrap()),
            Box::new(|| render_heatmap(&matrix, &default_item_order(&emb), &caption, &spec, false).unwrap()),
            Box::new(|| render_loess_overlay(&emb, &items, None, &caption, &loess_spec).unwrap()),
        ];
        for r in &renders {
            let s = r();
            deterministic &= s == r();
            svgs.push(s);
        }
    }
    let malformed = svgs.iter().filter(|s| roxmltree::Document::parse(s).is_err()).count();
    check(
        worst <= 0.01 && malformed == 0 && deterministic,
        format!("worst relative area error {worst:.2e}, {} SVGs with {malformed} malformed, byte-identical reruns: {deterministic}", svgs.len()),
    )
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *xc = det(m) / d;
    }
    x
}

fn loess_oracle(pts: &Configuration, vals: &[f64], span: f64, x0: f64, y0: f64) -> f64 {
    let n = pts.n();
    let q = (span * n as f64).ceil() as usize;
    let mut near: Vec<(f64, usize)> =
        (0..n).map(|i| (((pts.get(i, 0) - x0).powi(2) + (pts.get(i, 1) - y0).powi(2)).sqrt(), i)).collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    near.truncate(q);
    let dmax = near[q - 1].0;
    let mut xtwx = [[0.0; 3]; 3];
    let mut xtwy = [0.0; 3];
    for &(d, i) in &near {
        let w = (1.0 - (d / dmax).powi(3)).powi(3);
        let row = [1.0, pts.get(i, 0), pts.get(i, 1)];
        for r in 0..3 {
            for c in 0..3 {
                xtwx[r][c] += w * row[r] * row[c];
            }
            xtwy[r] += w * row[r] * vals[i];
        }
    }
    let beta = solve3(xtwx, xtwy);
    beta[0] + beta[1] * x0 + beta[2] * y0
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 80;
    let pts = random_config(&mut rng, n, 2);
    let vals: Vec<f64> = (0..n).map(|i| (3.0 * pts.get(i, 0)).sin() + pts.get(i, 1).powi(2) + rng.random_range(-0.1..0.1)).collect();
    let (span, grid) = (0.4, 15);
    let surface = loess_surface(&pts, &vals, span, grid).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (i, j) = (rng.random_range(0..grid), rng.random_range(0..grid));
        let want = loess_oracle(&pts, &vals, span, surface.xs[i], surface.ys[j]);
        worst = worst.max((surface.at(i, j) - want).abs());
    }
    let flat = loess_surface(&pts, &vec![2.75; n], span, grid).unwrap();
    let const_err = flat.values.iter().map(|v| (v - 2.75).abs()).fold(0.0, f64::max);
    check(worst <= 1e-8 && const_err <= 1e-9, format!("max node error {worst:.2e}, constant field error {const_err:.2e}"))
}

const METHODS: [&str; 6] = ["pca", "smacof", "local_smacof", "lle", "isomap", "laplacian_eigenmaps"];

fn benchmark_config(out: &Path) -> PipelineConfig {
    let mut stages = Vec::new();
    for shape in ManifoldShape::ALL {
        stages.push(json!({"stage": "generate", "name": shape.name(), "shape": shape.name(), "n": 1000}));
    }
    let methods: Vec<_> = METHODS.iter().map(|m| json!({"method": m})).collect();
    for shape in ManifoldShape::ALL {
        stages.push(json!({"stage": "reduce", "source": shape.name(), "methods": methods}));
    }
    for shape in ManifoldShape::ALL {
        stages.push(json!({"stage": "agree", "reference": shape.name()}));
        let embeddings: Vec<String> =
            METHODS.iter().map(|m| format!("{}/{m}", shape.name())).collect();
        stages.push(json!({"stage": "plot", "type": "lift", "name": format!("{}.lift", shape.name()), "reference": shape.name(), "embeddings": embeddings}));
    }
    let text = json!({
        "version": 1,
        "seed": 5,
        "io": {"output_dir": out, "score_table": "scores.csv"},
        "stages": stages,
    });
    PipelineConfig::from_json(&text.to_string()).unwrap()
}

fn criterion_9() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let start = Instant::now();
    let runs: Vec<_> = dirs.iter().map(|d| run_pipeline(&benchmark_config(d.path())).map_err(|e| e.to_string())).collect();
    let secs = start.elapsed().as_secs_f64();
    let (first, second) = match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Err(e.clone()),
    };
    let rows = first.scores.len();
    let table = fs::read_to_string(dirs[0].path().join("scores.csv")).unwrap();
    let table_rows = table.lines().count() - 1;
    let plots = first.manifest.count("plot");
    let mut identical = fs::read(&first.manifest_path).unwrap() == fs::read(&second.manifest_path).unwrap();
    let mut well_formed = true;
    for e in &first.manifest.entries {
        let (a, b) = (fs::read(dirs[0].path().join(&e.path)).unwrap(), fs::read(dirs[1].path().join(&e.path)).unwrap());
        identical &= a == b && !a.is_empty();
        if e.kind == "plot" {
            well_formed &= roxmltree::Document::parse(std::str::from_utf8(&a).unwrap()).is_ok();
        }
    }
    check(
        rows == 36 && table_rows == 36 && plots == 6 && identical && well_formed,
        format!("{rows} score rows ({table_rows} in CSV), {plots} plots, {} files byte-identical across runs: {identical}, SVG well-formed: {well_formed}, {secs:.0} s for two runs", first.manifest.entries.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", criterion_1),
        ("hand-computed fixture", criterion_2),
        ("randomness baseline", criterion_3),
        ("exact recovery", criterion_4),
        ("directional claims at n = 1000", criterion_5),
        ("weight function", criterion_6),
        ("renderer consistency", criterion_7),
        ("loess oracle", criterion_8),
        ("pipeline determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} ({name}): PASS [{secs:.1} s] {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1} s] {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
