//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use ssh_revival::analysis::{
    crossover_length, curve_distance, dense_negativity_curve, effective_length,
    ensemble_mutual_information_curve, gaussian_curve, revival_visibility, steady_state_value,
    symmetric_distance, visibility_scan, within_horizon, CurveSpec, TimeGrid,
    UniversalityCriterion,
};
use ssh_revival::chain::{build_mode_basis, localization_length_for_ratio, ChainParams};
use ssh_revival::entanglement::{
    dense_log_negativity, entropy_density_closed_form, fermionic_log_negativity, spectrum_entropy,
    EntanglementCurve, EntropyOrder, Measure, NegativityFlavor,
};
use ssh_revival::fock::{FockSpace, Statistics};
use ssh_revival::lindblad::{build_initial_state, eigenstate_populations, evolve};
use ssh_revival::semiclassical::{
    green_function, semiclassical_density_operator, ModeOccupation, PopulationLaw,
};

const GAMMA: f64 = 0.1;
const FOCK_CAP: usize = 4096;
/// Curves run to Γt = 40 for the steady-state anchor; distances and
/// visibilities use Γt ≤ 20.
const LONG: f64 = 40.0;
const HORIZON: f64 = 20.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.pass &= elapsed <= budget;
    out.detail = format!("{}; {:.1} s (budget {} s)", out.detail, elapsed.as_secs_f64(), budget.as_secs());
    out
}

fn spec(steps: usize) -> CurveSpec {
    CurveSpec::new(GAMMA, vec![2], TimeGrid::new(LONG, steps).unwrap())
}

/// Curves whose Γt = 40 value is checked against the edge state.
#[derive(Default)]
struct Anchors(Vec<EntanglementCurve>);

fn criterion_1() -> Outcome {
    let params = ChainParams::with_ratio(7, 0.1, GAMMA).unwrap();
    let basis = build_mode_basis(&params);
    let space = Arc::new(FockSpace::fermi(7).unwrap());
    let rho0 = build_initial_state(&basis, space).unwrap();
    let times: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64 / GAMMA).collect();
    let law = PopulationLaw::for_basis(&basis);
    let mut worst = 0.0f64;
    for rho in evolve(&rho0, &params, &times).unwrap() {
        let pops = eigenstate_populations(&rho);
        for m in 1..=4 {
            let closed = law.aggregate(m, rho.time()).unwrap();
            worst = worst.max((pops.get(&m).copied().unwrap_or(0.0) - closed).abs());
        }
    }
    check(worst <= 0.02, format!("max |ΔP_m| = {worst:.2e} (tol 0.02)"))
}

fn criterion_2(anchors: &mut Anchors) -> Outcome {
    let crit = UniversalityCriterion::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [0.1, 0.5] {
        let curves: Vec<EntanglementCurve> = [51, 201, 1001]
            .iter()
            .map(|&l| gaussian_curve(l, q, &spec(800), Measure::FermionicNegativity).unwrap())
            .collect();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max(symmetric_distance(&curves[i], &curves[j], &crit).unwrap());
            }
        }
        let vis = curves
            .iter()
            .map(|c| revival_visibility(&within_horizon(c, HORIZON)).unwrap().visibility)
            .fold(f64::INFINITY, f64::min);
        pass &= worst <= 0.05 && vis > 0.05;
        parts.push(format!("g1/g2={q}: max distance {worst:.2e}, min visibility {vis:.3} bits"));
        anchors.0.extend(curves);
    }
    check(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for l in [3, 5, 7] {
        for q in [0.1, 0.5, 0.9] {
            let basis = build_mode_basis(&ChainParams::with_ratio(l, q, GAMMA).unwrap());
            let occ = ModeOccupation::ground_state(l / 2);
            let part = ssh_revival::entanglement::Partition::default_for(l).unwrap();
            for i in 0..10 {
                let t = (0.37 + 1.9 * i as f64) / GAMMA;
                let rho =
                    semiclassical_density_operator(&basis, t, Statistics::Fermi, &occ, FOCK_CAP)
                        .unwrap();
                let dense = dense_log_negativity(&rho, &part, NegativityFlavor::Fermionic).unwrap();
                let gauss = fermionic_log_negativity(&green_function(&basis, t, &occ), &part).unwrap();
                worst = worst.max((dense - gauss).abs());
            }
        }
    }
    check(worst <= 1e-8, format!("max |Δℰ| = {worst:.2e} (tol 1e-8)"))
}

fn criterion_4(anchors: &mut Anchors) -> Outcome {
    let crit = UniversalityCriterion::default();
    let curves: Vec<EntanglementCurve> = [3, 5, 7]
        .iter()
        .map(|&l| {
            dense_negativity_curve(
                l,
                0.1,
                &spec(800),
                Statistics::Bose,
                NegativityFlavor::Conventional,
                FOCK_CAP,
            )
            .unwrap()
        })
        .collect();
    let vis: Vec<f64> = curves
        .iter()
        .map(|c| revival_visibility(&within_horizon(c, HORIZON)).unwrap().visibility)
        .collect();
    let d = curve_distance(&curves[1], &curves[2], &crit).unwrap();
    let pass = vis.iter().all(|&v| v > 0.0) && d <= 0.05;
    anchors.0.extend(curves);
    check(
        pass,
        format!("visibilities L=3,5,7: {:.3}, {:.3}, {:.3} bits; distance(5, 7) = {d:.2e}", vis[0], vis[1], vis[2]),
    )
}

fn criterion_5() -> Outcome {
    let crit = UniversalityCriterion::default();
    let s = CurveSpec::new(GAMMA, vec![2], TimeGrid::new(HORIZON, 400).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [0.3, 0.5, 0.7, 0.9] {
        let xi = localization_length_for_ratio(q).unwrap();
        let lc = crossover_length(q, &crit, &s).unwrap().result;
        let le = effective_length(q, &crit, &s).unwrap().result;
        let ok = |x: Option<usize>| match x {
            Some(x) if q == 0.9 => (17..=23).contains(&x),
            Some(x) => (x as f64 - xi).abs() <= 4.0,
            None => false,
        };
        pass &= ok(lc) && ok(le);
        parts.push(format!("g1/g2={q} ξ={xi:.2} L_c={lc:?} L_eff={le:?}"));
    }
    check(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let s = CurveSpec::new(GAMMA, vec![2], TimeGrid::new(HORIZON, 400).unwrap());
    let mut ratios: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    ratios.push(0.98);
    let scan = visibility_scan(301, &ratios, &s).unwrap();
    let (q_max, v_max) = scan[..19]
        .iter()
        .map(|(q, r)| (*q, r.visibility))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let at_edge = scan[19].1.visibility;
    let pass = (0.35..=0.65).contains(&q_max) && at_edge < 0.05;
    check(
        pass,
        format!("maximum {v_max:.3} bits at g1/g2={q_max:.2} (want [0.35, 0.65]); visibility at 0.98 = {at_edge:.3} bits (want < 0.05)"),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for l in [5, 7, 9] {
        let basis = build_mode_basis(&ChainParams::with_ratio(l, 0.1, GAMMA).unwrap());
        let occ = ModeOccupation::ground_state(l / 2);
        for stats in [Statistics::Fermi, Statistics::Bose] {
            for i in 0..20 {
                let t = (0.05 + 0.5 * i as f64) / GAMMA;
                let rho = semiclassical_density_operator(&basis, t, stats, &occ, FOCK_CAP).unwrap();
                let spectrum = rho.eigenvalues();
                for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)] {
                    let s = spectrum_entropy(&spectrum, order) / (l / 2) as f64;
                    let closed = entropy_density_closed_form(t, GAMMA, order).unwrap();
                    worst = worst.max((s - closed).abs());
                }
            }
        }
    }
    let h = 0.01;
    let mut peak_ok = true;
    let mut report = Vec::new();
    for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)] {
        let (arg, max) = (0..=1000)
            .map(|i| {
                let gt = h * i as f64;
                (gt, entropy_density_closed_form(gt / GAMMA, GAMMA, order).unwrap())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        peak_ok &= (arg - 2.0 * 2f64.ln()).abs() <= h && (max - 1.0).abs() <= 1e-3;
        report.push(format!("{} max {max:.6} at Γt={arg:.2}", order.label()));
    }
    check(
        worst <= 1e-10 && peak_ok,
        format!("max |Δs| = {worst:.2e} (tol 1e-10); {}", report.join(", ")),
    )
}

fn criterion_8(anchors: &mut Anchors) -> Outcome {
    let crit = UniversalityCriterion::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for q in [0.1, 0.5] {
        let curves: Vec<EntanglementCurve> = [51, 201, 1001]
            .iter()
            .map(|&l| {
                gaussian_curve(l, q, &spec(800), Measure::MutualInformation(EntropyOrder::VonNeumann))
                    .unwrap()
            })
            .collect();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max(symmetric_distance(&curves[i], &curves[j], &crit).unwrap());
            }
        }
        pass &= worst <= 0.05;
        parts.push(format!("fermi vN g1/g2={q}: {worst:.2e}"));
        anchors.0.extend(curves);
    }
    let bose: Vec<EntanglementCurve> = [11, 15]
        .iter()
        .map(|&l| {
            ensemble_mutual_information_curve(
                l,
                0.1,
                &spec(200),
                Statistics::Bose,
                EntropyOrder::Renyi(2.0),
                50_000_000,
            )
            .unwrap()
        })
        .collect();
    let d = symmetric_distance(&bose[0], &bose[1], &crit).unwrap();
    pass &= d <= 0.05;
    parts.push(format!("bose Rényi-2 L=11 vs 15: {d:.2e}"));
    anchors.0.extend(bose);
    check(pass, parts.join("; "))
}

fn criterion_9(anchors: &Anchors) -> Outcome {
    let mut worst = 0.0f64;
    for c in &anchors.0 {
        let basis = build_mode_basis(&c.params);
        let last = c.times.last().copied().unwrap();
        assert!((last - LONG).abs() < 1e-9);
        let expected = steady_state_value(&basis, &c.partition, c.measure);
        worst = worst.max((c.final_value().unwrap() - expected).abs());
    }
    check(
        !anchors.0.is_empty() && worst <= 1e-6,
        format!("{} curves, max |Δ| at Γt=40 = {worst:.2e} (tol 1e-6)", anchors.0.len()),
    )
}

fn main() {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let mut anchors = Anchors::default();
    let results = [
        ("1 population dynamics", timed(mins(1), criterion_1)),
        ("2 universal fermionic revival", timed(mins(10), || criterion_2(&mut anchors))),
        ("3 gaussian vs dense negativity", timed(mins(2), criterion_3)),
        ("4 bosonic revival", timed(mins(10), || criterion_4(&mut anchors))),
        ("5 crossover and effective length", timed(mins(30), criterion_5)),
        ("6 visibility curve", timed(mins(20), criterion_6)),
        ("7 entropy densities", timed(mins(1), criterion_7)),
        ("8 mutual information universality", timed(mins(15), || criterion_8(&mut anchors))),
        ("9 steady-state anchor", criterion_9(&anchors)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} ({})", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
