//! Acceptance criteria 1-8, one PASS/FAIL line each.
//!
//! Run with `cargo test -p gibbs-lab --test acceptance`. Any FAIL makes the
//! process exit non-zero.

use std::time::Instant;

use gibbs_lab::concentration::{blowup_bound_check_exact, gcb_test, Observations, Verdict};
use gibbs_lab::defaults::{critical_beta_2d_ising, EXACT_TOLERANCE, PRODUCT_MEASURE_D};
use gibbs_lab::dobrushin::{dobrushin_constant, gcb_constant};
use gibbs_lab::entropy::abs_entropy_bound_check;
use gibbs_lab::experiment::{self, BoundarySpec, ExperimentSpec, ObservableKind, Scenario, Sampling, Status};
use gibbs_lab::lattice::decode;
use gibbs_lab::observables::{
    shields_bound_check, young_bound_check, BoundObservable, LocalFunction,
    Observable,
};
use gibbs_lab::specification::{dlr_check, exact_marginal, project};
use gibbs_lab::{
    gcb_certificate, Boundary, Configuration, FiniteGibbsMeasure, Geometry, ModelConfig,
    PatternDistribution, Potential, Site, Symbol, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn exactness() -> Outcome {
    let mut worst_dlr = 0.0f64;
    // d=1 Λ_3 and d=2 3×3, fixed boundaries, with and without a field.
    let cases = [
        (1, 7, 0.3, 0.0, 1),
        (1, 7, 0.7, 0.25, 0),
        (2, 3, 0.4, 0.0, 1),
        (2, 3, 0.8, -0.3, 0),
    ];
    for &(dim, side, beta, h, boundary) in &cases {
        let p = Potential::ising(dim, beta, h).map_err(err)?;
        let w = Window::with_side(dim, side, Geometry::Fixed, 2).map_err(err)?;
        let mu = FiniteGibbsMeasure::exact(&p, &w, &Boundary::Uniform(boundary)).map_err(err)?;
        let n = w.radius().unwrap();
        for k in 0..n {
            let v = dlr_check(&mu, k).map_err(err)?;
            worst_dlr = worst_dlr.max(v);
            check(v <= 1e-10, format!("DLR violation {v:e} at d={dim} side={side} β={beta} k={k}"))?;
        }
        // Projectivity: Λ_k marginal equals the projection of the Λ_{k+1} one.
        for k in 0..n {
            let direct = exact_marginal(&mu, k).map_err(err)?;
            let via = project(&exact_marginal(&mu, k + 1).map_err(err)?, k).map_err(err)?;
            let diff = max_abs_diff(direct.dense().unwrap(), via.dense().unwrap());
            check(diff <= 1e-15, format!("projectivity off by {diff:e} at d={dim} k={k}"))?;
        }
        // Spin flip maps (+ boundary, h) to (− boundary, −h) state by state.
        let flipped = Potential::ising(dim, beta, -h).map_err(err)?;
        let nu = FiniteGibbsMeasure::exact(&flipped, &w, &Boundary::Uniform(1 - boundary)).map_err(err)?;
        let top = mu.probs().len() - 1;
        let diff = mu
            .probs()
            .iter()
            .enumerate()
            .map(|(c, p)| (p - nu.probs()[top - c]).abs() / p.max(nu.probs()[top - c]))
            .fold(0.0, f64::max);
        check(
            diff <= EXACT_TOLERANCE,
            format!("spin-flip covariance off by {diff:e} (relative) at d={dim} β={beta}"),
        )?;
    }
    Ok(format!("max DLR violation {worst_dlr:.1e}; projectivity and flip covariance at rounding level"))
}

/// Random local function: random support near the origin, random table.
fn random_function(rng: &mut ChaCha8Rng) -> LocalFunction {
    let dim = rng.random_range(1..=2);
    let q: usize = rng.random_range(2..=3);
    let radius: i32 = 1;
    let candidates: Vec<Site> = if dim == 1 {
        (-radius..=radius).map(|x| Site::new(vec![x])).collect()
    } else {
        (-radius..=radius)
            .flat_map(|x| (-radius..=radius).map(move |y| Site::new(vec![x, y])))
            .collect()
    };
    let size = rng.random_range(1..=3.min(candidates.len()));
    let mut sites = Vec::new();
    while sites.len() < size {
        let s = candidates[rng.random_range(0..candidates.len())].clone();
        if !sites.contains(&s) {
            sites.push(s);
        }
    }
    let table: Vec<f64> = (0..q.pow(sites.len() as u32)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut i = 0;
    LocalFunction::from_fn("random", dim, q, sites, move |_| {
        i += 1;
        table[i - 1]
    })
    .expect("small function")
}

fn lemma_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);

    // Young bound on random functions and windows.
    // Draws whose block sum has more than 2^18 states are redrawn.
    let mut young = 0;
    while young < 1000 {
        let f = random_function(&mut rng);
        let side = rng.random_range(1..=if f.dim() == 1 { 8 } else { 3 });
        let w = Window::with_side(f.dim(), side, Geometry::Free, f.alphabet()).map_err(err)?;
        let union: std::collections::BTreeSet<Site> = w
            .sites()
            .iter()
            .flat_map(|a| f.sites().iter().map(move |s| s.add(a)))
            .collect();
        if (f.alphabet() as f64).powi(union.len() as i32) > (1u64 << 18) as f64 {
            continue;
        }
        match young_bound_check(&f, &w) {
            Ok(c) => {
                check(c.ok, format!("Young bound violated: {} > {}", c.lhs, c.rhs))?;
                young += 1;
            }
            Err(e) => return Err(err(e)),
        }
    }
    let equality = young_bound_check(
        &LocalFunction::spin(Site::origin(1)),
        &Window::with_side(1, 3, Geometry::Free, 2).map_err(err)?,
    )
    .map_err(err)?;
    check(
        equality.lhs == 12.0 && equality.rhs == 12.0,
        format!("equality case gave {} vs {}", equality.lhs, equality.rhs),
    )?;

    // Frequency bound on every pair at d=1, n=3, k=1.
    let w = Window::cube(1, 3, Geometry::Free, 2).map_err(err)?;
    let configs: Vec<Configuration> = (0..128)
        .map(|c| Configuration::from_code(w.clone(), c, Boundary::None))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let mut exhaustive = 0;
    for a in &configs {
        for b in &configs {
            let c = shields_bound_check(a, b, 1, None).map_err(err)?;
            check(c.ok, format!("frequency bound violated: tv {} > {}", c.tv, c.bound))?;
            exhaustive += 1;
        }
    }

    // 10^5 sampled pairs at d=2, n=2, k=0.
    let w = Window::cube(2, 2, Geometry::Free, 2).map_err(err)?;
    for _ in 0..100_000 {
        let a: Vec<Symbol> = (0..25).map(|_| rng.random_range(0..2)).collect();
        let mut b = a.clone();
        for _ in 0..rng.random_range(0..=25) {
            let i = rng.random_range(0..25);
            b[i] ^= 1;
        }
        let ca = Configuration::new(w.clone(), a, Boundary::None).map_err(err)?;
        let cb = Configuration::new(w.clone(), b, Boundary::None).map_err(err)?;
        let c = shields_bound_check(&ca, &cb, 0, None).map_err(err)?;
        check(c.ok, format!("frequency bound violated at d=2: tv {} > {}", c.tv, c.bound))?;
    }

    // Absolute log-ratio bound on random distribution pairs.
    for i in 0..10_000 {
        let q = rng.random_range(2..=16);
        let mut nu: Vec<f64> = (0..q).map(|_| rng.random::<f64>()).collect();
        if i % 3 == 0 {
            nu[rng.random_range(0..q)] = 0.0;
        }
        let mu: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-3).collect();
        let (sn, sm) = (nu.iter().sum::<f64>(), mu.iter().sum::<f64>());
        let nu = PatternDistribution::from_dense(1, 0, q, nu.iter().map(|x| x / sn).collect()).map_err(err)?;
        let mu = PatternDistribution::from_dense(1, 0, q, mu.iter().map(|x| x / sm).collect()).map_err(err)?;
        let c = abs_entropy_bound_check(&nu, &mu).map_err(err)?;
        check(c.ok, format!("log-ratio bound violated: {} > {}", c.lhs, c.rhs))?;
    }
    Ok(format!(
        "Young 1000/1000 (equality 12 = 12), frequency {exhaustive} exhaustive + 100000 sampled, log-ratio 10000"
    ))
}

fn dobrushin() -> Outcome {
    check(gcb_constant(0.0) == Some(0.5), "D(0) != 1/2")?;
    check(gcb_constant(0.5) == Some(2.0), "D(1/2) != 2")?;
    check(gcb_constant(1.0).is_none(), "D(1) should not exist")?;
    let c0 = dobrushin_constant(&Potential::ising(2, 0.0, 0.0).map_err(err)?).map_err(err)?;
    check(c0 == 0.0, format!("c(β=0) = {c0}"))?;
    let grid: Vec<f64> = (1..=12).map(|i| i as f64 * 0.05).collect();
    for (name, dim, oracle) in [("d=1 Ising", 1usize, 1.0), ("d=2 Ising", 2, 2.0)] {
        let cs: Vec<f64> = grid
            .iter()
            .map(|&b| dobrushin_constant(&Potential::ising(dim, b, 0.0)?))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        check(cs.windows(2).all(|w| w[0] < w[1]), format!("{name}: c not increasing {cs:?}"))?;
        // A single flipped neighbour moves P(+) by at most tanh(2β)/2.
        for (&b, &c) in grid.iter().zip(&cs) {
            let want = oracle * (2.0 * b).tanh();
            check((c - want).abs() < 1e-12, format!("{name} β={b}: c={c}, oracle {want}"))?;
        }
    }
    let potts: Vec<f64> = grid
        .iter()
        .map(|&b| dobrushin_constant(&Potential::potts(2, b, 3)?))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    check(potts.windows(2).all(|w| w[0] < w[1]), format!("Potts c not increasing {potts:?}"))?;
    let hot = gcb_certificate(&Potential::ising(2, 0.6, 0.0).map_err(err)?).map_err(err)?;
    check(!hot.satisfied && hot.d.is_none(), "d=2 β=0.6 reported satisfied")?;
    Ok(format!("D(0)=1/2, D(1/2)=2, c matches tanh oracles, d=2 β=0.6 c={:.3} not satisfied", hot.c))
}

fn gcb_verification() -> Outcome {
    let mut detail = Vec::new();
    for beta in [0.1, 0.2, 0.3] {
        let p = Potential::ising(1, beta, 0.0).map_err(err)?;
        let d = gcb_certificate(&p).map_err(err)?.d.ok_or("not certified")?;
        for (geometry, boundary) in [(Geometry::Fixed, Boundary::Uniform(1)), (Geometry::Free, Boundary::None)] {
            let w = Window::cube(1, 2, geometry, 2).map_err(err)?;
            let mu = FiniteGibbsMeasure::exact(&p, &w, &boundary).map_err(err)?;
            for obs in [
                Observable::magnetization(&w),
                Observable::block(LocalFunction::product(vec![Site::new(vec![0]), Site::new(vec![1])]).map_err(err)?, &w),
                Observable::local(LocalFunction::spin(Site::new(vec![0]))),
            ] {
                let bound = BoundObservable::new(&obs, &w, &boundary);
                let Ok(bound) = bound else { continue };
                let osc = bound.oscillation().map_err(err)?;
                let r = gcb_test(&Observations::exact(&mu, &bound), &osc, d, Some(d), None);
                check(
                    r.points.iter().all(|p| p.verdict == Verdict::Pass),
                    format!("exact GCB failed at β={beta} for {}: {:?}", obs.name(), r.points),
                )?;
            }
        }
    }
    detail.push("exact d=1 β∈{0.1,0.2,0.3} pass at every λ".to_string());

    let p = Potential::ising(1, 0.0, 0.0).map_err(err)?;
    let w = Window::cube(1, 2, Geometry::Free, 2).map_err(err)?;
    let mu = FiniteGibbsMeasure::exact(&p, &w, &Boundary::None).map_err(err)?;
    let obs = BoundObservable::new(&Observable::magnetization(&w), &w, &Boundary::None).map_err(err)?;
    let osc = obs.oscillation().map_err(err)?;
    let r = gcb_test(&Observations::exact(&mu, &obs), &osc, PRODUCT_MEASURE_D, None, None);
    check(r.verdict == Verdict::Pass, format!("product measure with D=1/8 failed: {:?}", r.points))?;
    // Independent oracle: log cosh(2λ) per site for ±1 spins.
    for pt in &r.points {
        let oracle = 5.0 * pt.lambda.cosh().ln();
        check((pt.lhs - oracle).abs() < 1e-12, format!("product MGF {} vs oracle {oracle}", pt.lhs))?;
    }
    detail.push("product D=1/8 pass".into());

    let mut spec = ExperimentSpec::new(Scenario::GcbTest, ModelConfig::ising(2, 0.2));
    spec.sides = vec![16];
    spec.boundary = BoundarySpec::Periodic;
    spec.seed = 4;
    spec.sampling = Sampling {
        burn_in: Some(1000),
        samples: 12_500,
        chains: 4,
        ..Sampling::default()
    };
    let o = experiment::run(&spec);
    let g = &o.body["results"]["windows"][0]["gcb"];
    let ess = g["ess"].as_f64().unwrap_or(0.0);
    let verdict = g["verdict"].as_str().unwrap_or("?").to_string();
    check(verdict != "fail" && o.status != Status::Error, format!("16×16 torus verdict {verdict}: {}", o.body_json()))?;
    check(ess >= 1e4, format!("16×16 torus ESS {ess:.0} < 10^4"))?;
    detail.push(format!("16×16 torus β=0.2 {verdict}, ESS {ess:.0}"));
    Ok(detail.join("; "))
}

fn blowup() -> Outcome {
    let epsilons: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairs, mut applicable) = (0, 0);
    for beta in [0.0, 0.2] {
        let p = Potential::ising(1, beta, 0.0).map_err(err)?;
        let d = gcb_certificate(&p).map_err(err)?.d.ok_or("not certified")?;
        for side in [3, 5, 7] {
            for (geometry, boundary) in [(Geometry::Fixed, Boundary::Uniform(1)), (Geometry::Free, Boundary::None)] {
                let w = Window::with_side(1, side, geometry, 2).map_err(err)?;
                let mu = FiniteGibbsMeasure::exact(&p, &w, &boundary).map_err(err)?;
                let states = 1u64 << side;
                for _ in 0..8 {
                    let density: f64 = rng.random_range(0.05..0.95);
                    let mut c: Vec<u64> = (0..states).filter(|_| rng.random::<f64>() < density).collect();
                    if c.is_empty() {
                        c.push(rng.random_range(0..states));
                    }
                    let reports = blowup_bound_check_exact(&mu, &c, &epsilons, d).map_err(err)?;
                    for r in &reports {
                        // Brute-force oracle for both masses.
                        let mut mass_c = 0.0;
                        let mut mass_b = 0.0;
                        for (code, &pr) in mu.probs().iter().enumerate() {
                            let x = decode(code as u64, side, 2).map_err(err)?;
                            let dist = c
                                .iter()
                                .map(|&y| {
                                    let y = decode(y, side, 2).unwrap();
                                    x.iter().zip(&y).filter(|(a, b)| a != b).count()
                                })
                                .min()
                                .unwrap();
                            if dist == 0 {
                                mass_c += pr;
                            }
                            if (dist as f64) < r.epsilon * side as f64 {
                                mass_b += pr;
                            }
                        }
                        check(
                            (mass_c - r.mass_c).abs() < 1e-12 && (mass_b - r.mass_blowup).abs() < 1e-12,
                            format!("blow-up masses disagree with brute force at side {side}"),
                        )?;
                        pairs += 1;
                        if r.applicable {
                            applicable += 1;
                            let lhs = mass_b;
                            let rhs = 1.0 - (-(side as f64) / (4.0 * d) * (r.epsilon - 2.0 * (d * (1.0 / mass_c).ln() / side as f64).sqrt()).powi(2)).exp();
                            check(lhs >= rhs - 1e-12, format!("blow-up violated: {lhs} < {rhs} (β={beta} side={side} ε={})", r.epsilon))?;
                            check(r.ok, "report disagrees with oracle")?;
                        }
                    }
                }
            }
        }
    }
    check(applicable >= 100, format!("only {applicable} applicable (C, ε) pairs"))?;
    Ok(format!("{applicable} applicable of {pairs} (C, ε) pairs, zero violations"))
}

fn variance_spec(beta: f64, seed: u64, burn_in: usize, samples: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(Scenario::CriticalVariance, ModelConfig::ising(2, beta));
    // Tori of radius n ∈ {4, 8, 16, 32}, i.e. sides 2n+1.
    spec.sides = vec![9, 17, 33, 65];
    spec.boundary = BoundarySpec::Periodic;
    spec.seed = seed;
    spec.sampling = Sampling {
        burn_in: Some(burn_in),
        samples,
        chains: 4,
        ..Sampling::default()
    };
    spec
}

fn table(o: &experiment::Outcome) -> String {
    o.body["results"]["points"]
        .as_array()
        .map(|ps| {
            ps.iter()
                .map(|p| {
                    format!(
                        "{}:{:.3}±{:.3}",
                        p["side"],
                        p["var_per_site"].as_f64().unwrap_or(f64::NAN),
                        p["stderr"].as_f64().unwrap_or(f64::NAN)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default()
}

/// `Var(Σω)/|Λ|` on the 4×4 torus at β=0.2 by enumeration.
fn exact_small_torus_variance() -> Result<f64, String> {
    let p = Potential::ising(2, 0.2, 0.0).map_err(err)?;
    let w = Window::with_side(2, 4, Geometry::Torus, 2).map_err(err)?;
    let mu = FiniteGibbsMeasure::exact(&p, &w, &Boundary::None).map_err(err)?;
    let m2 = mu.expectation(|s| {
        let m: f64 = s.iter().map(|&x| if x == 1 { 1.0 } else { -1.0 }).sum();
        m * m
    });
    Ok(m2 / 16.0)
}

fn criticality() -> Outcome {
    let critical = experiment::run(&variance_spec(critical_beta_2d_ising(), 6, 10_000, 40_000));
    check(
        critical.status == Status::Pass,
        format!("β_c not strictly increasing beyond 3σ: {} steps {}", table(&critical), critical.body["results"]["steps"]),
    )?;
    let hot = experiment::run(&variance_spec(0.2, 7, 1_000, 20_000));
    let ceiling = hot.body["results"]["ceiling_8D"].as_f64().unwrap_or(f64::NAN);
    let exact4 = exact_small_torus_variance()?;
    let mut small = variance_spec(0.2, 5, 1_000, 20_000);
    small.sides = vec![4];
    let small = experiment::run(&small);
    let p4 = &small.body["results"]["points"][0];
    let (v4, se4) = (p4["var_per_site"].as_f64().unwrap_or(f64::NAN), p4["stderr"].as_f64().unwrap_or(f64::NAN));
    check(
        (v4 - exact4).abs() <= 3.0 * se4,
        format!("sampled 4×4 torus {v4}±{se4} disagrees with exact {exact4}"),
    )?;
    check(
        hot.status == Status::Pass,
        format!(
            "β=0.2 not flat within 3σ below 8D={ceiling:.2}: {} (exact 4×4 value {exact4:.4}) steps {}",
            table(&hot),
            hot.body["results"]["steps"]
        ),
    )?;
    Ok(format!("β_c {}; β=0.2 {} (8D = {ceiling:.2})", table(&critical), table(&hot)))
}

fn phase_coexistence() -> Outcome {
    let mut spec = ExperimentSpec::new(Scenario::PhaseCoexistence, ModelConfig::ising(2, 0.55));
    spec.sides = vec![16];
    spec.exact_sides = Some(vec![3, 4]);
    spec.seed = 8;
    spec.sampling = Sampling {
        samples: 2_000,
        chains: 4,
        ..Sampling::default()
    };
    let o = experiment::run(&spec);
    let r = &o.body["results"];
    let m = &r["magnetization"];
    let summary = format!(
        "(a) m+={:.3}±{:.4} m-={:.3}±{:.4} sep {:.0}σ; (b) per-site H {}; (c) rates {}",
        m["plus"]["value"].as_f64().unwrap_or(f64::NAN),
        m["plus"]["stderr"].as_f64().unwrap_or(f64::NAN),
        m["minus"]["value"].as_f64().unwrap_or(f64::NAN),
        m["minus"]["stderr"].as_f64().unwrap_or(f64::NAN),
        m["separation_sigma"].as_f64().unwrap_or(f64::NAN),
        r["entropy"]["report"]["points"]
            .as_array()
            .map(|ps| ps.iter().map(|p| format!("{:.4}", p["per_site"].as_f64().unwrap_or(f64::NAN))).collect::<Vec<_>>().join(" > "))
            .unwrap_or_default(),
        r["rates"]["points"]
            .as_array()
            .map(|ps| ps.iter().map(|p| format!("{:.4}", p["rate"].as_f64().unwrap_or(f64::NAN))).collect::<Vec<_>>().join(" > "))
            .unwrap_or_default(),
    );
    check(o.status == Status::Pass, format!("{summary}: {}", o.body_json()))?;
    Ok(summary)
}

fn reproducibility() -> Outcome {
    let mut specs = Vec::new();
    let mut s = ExperimentSpec::new(Scenario::GcbTest, ModelConfig::ising(2, 0.2));
    s.sides = vec![8];
    s.sampling = Sampling {
        burn_in: Some(200),
        samples: 500,
        chains: 6,
        ..Sampling::default()
    };
    s.seed = 99;
    specs.push(s);
    let mut s = variance_spec(0.3, 3, 200, 400);
    s.sides = vec![4, 6, 8];
    specs.push(s);
    let mut s = ExperimentSpec::new(Scenario::Blowup, ModelConfig::ising(1, 0.2));
    s.boundary = BoundarySpec::Plus;
    s.sides = vec![5, 7];
    s.sets = Some(4);
    s.seed = 12;
    specs.push(s);
    let mut s = ExperimentSpec::new(Scenario::DeviationRates, ModelConfig::ising(2, 0.15));
    s.observable = ObservableKind::Spin;
    s.sides = vec![6, 8];
    s.sampling = Sampling {
        burn_in: Some(100),
        samples: 300,
        chains: 5,
        ..Sampling::default()
    };
    s.seed = 5;
    specs.push(s);
    let mut s = ExperimentSpec::new(Scenario::PhaseCoexistence, ModelConfig::ising(2, 0.55));
    s.sides = vec![6];
    s.exact_sides = Some(vec![2, 3]);
    s.sampling = Sampling {
        burn_in: Some(300),
        samples: 200,
        chains: 3,
        ..Sampling::default()
    };
    specs.push(s);
    let mut s = ExperimentSpec::new(Scenario::FrequencyLemma, ModelConfig::ising(2, 0.0));
    s.sides = vec![5];
    s.k = Some(1);
    s.pairs = Some(2000);
    specs.push(s);

    let render = |threads: usize| -> Result<Vec<String>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
        Ok(pool.install(|| specs.iter().map(|s| experiment::run(s).report_json(None)).collect()))
    };
    let one = render(1)?;
    let four = render(4)?;
    for (i, (a, b)) in one.iter().zip(&four).enumerate() {
        check(a == b, format!("{} report differs between 1 and 4 threads", specs[i].scenario.name()))?;
    }
    let again = render(4)?;
    check(again == four, "re-run with 4 threads differs")?;
    Ok(format!("{} scenarios byte-identical under 1 and 4 threads", specs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exactness suite", exactness),
        ("lemma battery", lemma_battery),
        ("Dobrushin certification", dobrushin),
        ("GCB verification", gcb_verification),
        ("blow-up bound", blowup),
        ("criticality signature", criticality),
        ("phase-coexistence signatures", phase_coexistence),
        ("reproducibility", reproducibility),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
