//! Spectrum curve invariants and closed-form oracles.

use std::sync::Arc;

use orbitlab::markov::{doubling_map, BranchSpec, MapSpec, MarkovMap, Orientation};
use orbitlab::rat;
use orbitlab::thermo::{eta, normalize, weight_potential, Potential, Spectrum};

fn slopes_244_map() -> MarkovMap {
    MarkovMap::new(MapSpec {
        endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::ratio(3, 4), rat::int(1)],
        branches: (0..3)
            .map(|_| BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 })
            .collect(),
    })
    .unwrap()
}

fn three_cell_map() -> MarkovMap {
    MarkovMap::new(MapSpec {
        endpoints: vec![rat::int(0), rat::ratio(1, 3), rat::ratio(2, 3), rat::int(1)],
        branches: vec![
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            BranchSpec { orientation: Orientation::Increasing, image_first: 1, image_last: 2 },
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
        ],
    })
    .unwrap()
}

fn spectra() -> Vec<(&'static str, Spectrum)> {
    let mut out = Vec::new();
    let map = Arc::new(doubling_map());
    out.push((
        "bernoulli",
        Spectrum::compute(Arc::clone(&map), weight_potential(&map, &[0.7, 0.3]).unwrap()).unwrap(),
    ));
    out.push((
        "lebesgue",
        Spectrum::compute(Arc::clone(&map), Potential::constant(&map, -(2f64.ln()))).unwrap(),
    ));
    let map = Arc::new(three_cell_map());
    let pot = normalize(&map, &weight_potential(&map, &[0.5, 0.3, 0.2]).unwrap()).unwrap();
    out.push(("three_cell", Spectrum::compute(Arc::clone(&map), pot).unwrap()));
    let map = Arc::new(slopes_244_map());
    let pot = weight_potential(&map, &[0.4, 0.4, 0.2]).unwrap();
    out.push(("slopes_244", Spectrum::compute(Arc::clone(&map), pot).unwrap()));
    out
}

fn q_grid() -> Vec<f64> {
    let mut grid = Vec::new();
    let mut q = -5.0;
    while q <= 5.0 + 1e-12 {
        grid.push(q);
        q += 0.25;
    }
    grid
}

#[test]
fn curve_invariants_all_models() {
    for (name, spectrum) in spectra() {
        let curve = spectrum.sample(&q_grid()).unwrap();
        assert!(
            (spectrum.eta(0.0).unwrap() - 1.0).abs() < 1e-10,
            "{name}: eta(0) != 1"
        );
        assert!(spectrum.eta(1.0).unwrap().abs() < 1e-10, "{name}: eta(1) != 0");
        for w in curve.points.windows(2) {
            assert!(
                w[1].alpha <= w[0].alpha + 1e-10,
                "{name}: alpha increased between q = {} and {}",
                w[0].q,
                w[1].q
            );
        }
        // eta is the Legendre conjugate of the concave spectrum, hence
        // convex in q: second differences are nonnegative.
        for w in curve.points.windows(3) {
            let second = w[2].eta - 2.0 * w[1].eta + w[0].eta;
            assert!(second >= -1e-9, "{name}: eta convexity violation {second} at q = {}", w[1].q);
        }
        for p in &curve.points {
            assert!(p.dimension <= 1.0 + 1e-9, "{name}: D > 1 at q = {}", p.q);
            assert!(
                p.alpha >= spectrum.alpha_minus - 1e-8 && p.alpha <= spectrum.alpha_plus + 1e-8,
                "{name}: alpha(q) outside extremes at q = {}",
                p.q
            );
        }
        // The spectrum peaks at alpha_max with value 1 (q = 0 sample).
        let at_zero = spectrum.eta(0.0).unwrap();
        assert!((at_zero - 1.0).abs() < 1e-9, "{name}: D(alpha_max) != 1");
        if spectrum.is_degenerate() {
            assert!((spectrum.dim_mu - spectrum.alpha_max).abs() < 1e-9);
        } else {
            let d_dim = spectrum.dimension_at(spectrum.dim_mu).unwrap();
            assert!(
                (d_dim - spectrum.dim_mu).abs() < 1e-9,
                "{name}: bisector tangency {d_dim} vs {}",
                spectrum.dim_mu
            );
            let d_max = spectrum.dimension_at(spectrum.alpha_max).unwrap();
            assert!((d_max - 1.0).abs() < 1e-9, "{name}: D at alpha_max is {d_max}");
        }
    }
}

#[test]
fn alpha_matches_eta_derivative() {
    let eps = 1e-4;
    for (name, spectrum) in spectra() {
        for q in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.5] {
            let a = spectrum.alpha(q).unwrap();
            let diff = -(spectrum.eta(q + eps).unwrap() - spectrum.eta(q - eps).unwrap()) / (2.0 * eps);
            assert!(
                (a - diff).abs() < 1e-5,
                "{name}: alpha({q}) = {a} vs -eta' = {diff}"
            );
        }
    }
}

#[test]
fn eta_closed_form_spotcheck() {
    let map = doubling_map();
    let pot = weight_potential(&map, &[0.7, 0.3]).unwrap();
    for q in [-5.0, -1.25, 0.75, 2.0, 5.0] {
        let expect = (0.7f64.powf(q) + 0.3f64.powf(q)).log2();
        assert!((eta(&map, &pot, q).unwrap() - expect).abs() < 1e-10);
    }
}

#[test]
fn extremes_full_shift_hand_oracle() {
    // Full shift: every cycle ratio is a weighted mean of the per-state
    // self-loop ratios, so the extremes are attained at self-loops.
    let map = Arc::new(slopes_244_map());
    let pot = weight_potential(&map, &[0.4, 0.4, 0.2]).unwrap();
    let spectrum = Spectrum::compute(Arc::clone(&map), pot).unwrap();
    let r0 = -(0.4f64.ln()) / 2f64.ln();
    let r1 = -(0.4f64.ln()) / 4f64.ln();
    let r2 = -(0.2f64.ln()) / 4f64.ln();
    let lo = r0.min(r1).min(r2);
    let hi = r0.max(r1).max(r2);
    assert!((spectrum.alpha_minus - lo).abs() < 1e-8);
    assert!((spectrum.alpha_plus - hi).abs() < 1e-8);
}

#[test]
fn geometric_potential_degenerates() {
    // -log|T'| normalized: the Gibbs measure is Lebesgue-equivalent and the
    // spectrum collapses to alpha = 1 on any of these maps.
    for map in [Arc::new(doubling_map()), Arc::new(slopes_244_map())] {
        let pot = normalize(&map, &Potential::log_derivative(&map)).unwrap();
        let spectrum = Spectrum::compute(Arc::clone(&map), pot).unwrap();
        assert!(spectrum.is_degenerate());
        assert!((spectrum.alpha_minus - 1.0).abs() < 1e-9);
        assert!((spectrum.alpha_plus - 1.0).abs() < 1e-9);
        for q in [-2.0, 0.0, 3.0] {
            assert!((spectrum.alpha(q).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn q_of_alpha_inverse() {
    let map = Arc::new(doubling_map());
    let pot = weight_potential(&map, &[0.7, 0.3]).unwrap();
    let spectrum = Spectrum::compute(Arc::clone(&map), pot).unwrap();
    assert!(spectrum.q_of_alpha(spectrum.alpha_max).unwrap().abs() < 1e-7);
    assert!((spectrum.q_of_alpha(spectrum.dim_mu).unwrap() - 1.0).abs() < 1e-7);

    // Independent oracle for q(1.3) from the closed-form alpha.
    let closed_alpha = |q: f64| {
        let (w0, w1) = (0.7f64.powf(q), 0.3f64.powf(q));
        (w0 * (1.0f64 / 0.7).ln() + w1 * (1.0f64 / 0.3).ln()) / ((w0 + w1) * 2f64.ln())
    };
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if closed_alpha(mid) > 1.3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle_q = 0.5 * (lo + hi);
    let got = spectrum.q_of_alpha(1.3).unwrap();
    assert!((got - oracle_q).abs() < 1e-7, "q(1.3): {got} vs oracle {oracle_q}");
    // Round trip.
    assert!((spectrum.alpha(got).unwrap() - 1.3).abs() < 1e-9);
    // Outside the open interval: domain error.
    assert!(spectrum.q_of_alpha(spectrum.alpha_plus + 0.01).is_err());
    assert!(spectrum.q_of_alpha(spectrum.alpha_minus).is_err());
}
