//! Cross-checks of the ground-truth numerics against independent integration
//! paths and models with known structure.

mod support;

use pdmp::oracle::{
    self, basis_coefficients, characterization_residual, cumulative_transition_hazard,
    stationary_distribution, transition_hazard_profile, transition_matrix,
    transition_probability,
};
use pdmp::quad::trapezoid;
use pdmp::{legendre_family, tcp_model, OracleConfig, PdmpModel, Scenario};

/// P(S >= t, next = y | x) computed the slow, independent way: a fixed-step
/// trapezoid over the joint density plus the boundary atom.
fn direct_sub_survival(model: &PdmpModel, x: f64, yi: usize, t: f64, steps: usize) -> f64 {
    let t_star = model.exit_time(x);
    let joint = |s: f64| {
        let phi = model.flow(s, x);
        let survival = (-model.cumulative_rate(x, s).unwrap()).exp();
        model.rate(phi) * survival * model.kernel_distribution(phi).unwrap()[yi]
    };
    let atom = (-model.cumulative_rate(x, t_star).unwrap()).exp()
        * model.kernel_distribution(model.flow(t_star, x)).unwrap()[yi];
    trapezoid(joint, t, t_star, steps) + atom
}

#[test]
fn transition_rows_sum_to_one() {
    let cfg = OracleConfig::default();
    for scenario in [Scenario::Const { rate: 5.0 }, Scenario::Linear { slope: 20.0 }] {
        let model = tcp_model(5, scenario).unwrap();
        for row in transition_matrix(&model, &cfg).unwrap() {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-8, "row sums to {total}");
            assert!(row.iter().all(|&p| p > 0.0));
        }
    }
}

#[test]
fn cumulative_hazard_matches_sub_survival_logarithm() {
    // The transformed hazard is by construction the hazard of the
    // sub-distribution (S, next = y), so R e^{-H(t)} must reproduce
    // P(S >= t, next = y) computed by direct integration.
    let cfg = OracleConfig::default();
    for scenario in [Scenario::Const { rate: 5.0 }, Scenario::Linear { slope: 20.0 }] {
        let model = tcp_model(5, scenario).unwrap();
        for (x, y) in [(0.2, 0.4), (0.0, 0.0), (0.6, 0.2)] {
            let r = transition_probability(&model, x, y, &cfg).unwrap();
            let ts = [0.1, 0.25, 0.35];
            let cumulative = cumulative_transition_hazard(&model, x, y, &ts, &cfg).unwrap();
            let yi = model.grid().require_index(y).unwrap();
            for (&t, &h) in ts.iter().zip(&cumulative) {
                let direct = direct_sub_survival(&model, x, yi, t, 50_000);
                let via_hazard = r * (-h).exp();
                assert!(
                    (via_hazard - direct).abs() < 1e-5,
                    "{scenario:?} ({x}, {y}) at t = {t}: {via_hazard} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn characterization_identity_on_wrapped_flow() {
    let model = support::circle_model(2.0, 3.0, 0.4);
    let cfg = OracleConfig::default();
    for &x in model.grid().points() {
        let residual = characterization_residual(&model, x, &cfg).unwrap();
        assert!(residual < 1e-6, "state {x}: residual {residual}");
    }
}

#[test]
fn position_free_kernel_collapses_hazard_to_rate() {
    // When the kernel does not see the position, the transformed hazard is
    // the plain rate along the flow, whatever the destination.
    let cfg = OracleConfig::default();
    for scenario in [Scenario::Const { rate: 5.0 }, Scenario::Linear { slope: 20.0 }] {
        let model = support::position_free_kernel_model(5, scenario);
        for (x, y) in [(0.0, 0.6), (0.4, 0.0), (0.6, 0.6)] {
            let t_star = model.exit_time(x);
            let ts: Vec<f64> = (0..25).map(|k| k as f64 / 25.0 * t_star).collect();
            let hazard = transition_hazard_profile(&model, x, y, &ts, &cfg).unwrap();
            for (&t, &h) in ts.iter().zip(&hazard) {
                let rate = model.rate(model.flow(t, x));
                assert!(
                    (h - rate).abs() < 1e-8,
                    "{scenario:?} ({x}, {y}) at t = {t}: hazard {h} vs rate {rate}"
                );
            }
        }
    }
}

#[test]
fn smooth_model_basis_reconstruction_recovers_rate() {
    // Analytic hazards: Legendre coefficients decay geometrically (the rate
    // extends to a strip of half-width ln(1/r)/(2 pi) around the real line,
    // giving a measured ~0.69 decay ratio per index), so 25 coefficients
    // leave under 1e-3 of truncation bias at the left endpoint.
    let model = support::circle_model(2.0, 3.0, 0.3);
    let basis = legendre_family(24);
    let cfg = OracleConfig::default();
    for &x in model.grid().points() {
        let rebuilt = oracle::jump_rate_from_basis(&model, &basis, 24, x, &cfg).unwrap();
        let rate = model.rate(x);
        assert!(
            (rebuilt - rate).abs() < 2.5e-3,
            "state {x}: reconstruction {rebuilt} vs rate {rate}"
        );
    }
}

#[test]
fn legendre_coefficients_match_independent_quadrature() {
    // theta_p from the oracle's panel quadrature vs a plain trapezoid over
    // the pointwise hazard profile.
    let model = tcp_model(3, Scenario::Const { rate: 5.0 }).unwrap();
    let basis = legendre_family(3);
    let cfg = OracleConfig::default();
    let (x, y) = (1.0 / 3.0, 2.0 / 3.0);
    let t_star = model.exit_time(x);
    let theta = basis_coefficients(&model, &basis, 3, x, y, &cfg).unwrap();

    let steps = 4_000;
    let ts: Vec<f64> = (0..steps)
        .map(|k| (k as f64 + 0.5) / steps as f64 * t_star)
        .collect();
    let hazard = transition_hazard_profile(&model, x, y, &ts, &cfg).unwrap();
    for p in 0..=3 {
        let riemann: f64 = ts
            .iter()
            .zip(&hazard)
            .map(|(&t, &h)| basis.eval(p, t / t_star) * h / steps as f64)
            .sum();
        assert!(
            (theta[p] - riemann).abs() < 1e-3,
            "p = {p}: {} vs {riemann}",
            theta[p]
        );
    }
}

#[test]
fn stationary_vector_is_a_fixed_point() {
    let model = tcp_model(5, Scenario::Const { rate: 5.0 }).unwrap();
    let cfg = OracleConfig::default();
    let matrix = transition_matrix(&model, &cfg).unwrap();
    let pi = stationary_distribution(&matrix).unwrap();
    let total: f64 = pi.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // the fixed-point residual inherits the quadrature error of the row sums
    for j in 0..pi.len() {
        let image: f64 = (0..pi.len()).map(|i| pi[i] * matrix[i][j]).sum();
        assert!((image - pi[j]).abs() < 5e-9, "component {j}: {image} vs {}", pi[j]);
    }
}

#[test]
fn kernel_mode_follows_half_the_position() {
    // The congestion-window kernel weights peak where |y - position / 2|
    // vanishes; from position 0.987 the favored restart state is 0.5.
    let model = tcp_model(10, Scenario::Const { rate: 5.0 }).unwrap();
    let q = model.kernel_distribution(0.987).unwrap();
    let mode = (0..q.len()).max_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap();
    assert_eq!(model.grid().value(mode), 0.5);
    let idx = |y: f64| model.grid().require_index(y).unwrap();
    assert!(q[idx(0.5)] > q[idx(0.4)]);
    assert!(q[idx(0.4)] > q[idx(0.2)]);
    assert!(q[idx(0.5)] > q[idx(0.7)]);
}
