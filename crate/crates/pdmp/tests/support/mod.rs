//! Shared model fixtures for the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use pdmp::{PdmpModel, Scenario, StateGrid};

/// Constant rate 5, uniform kernel over {0, 0.25, 0.5}, exit at 1 - x.
/// The kernel is position-free, so the transformed hazard equals the plain
/// rate along the flow and every basis coefficient past the constant is zero.
pub fn uniform_kernel_model() -> PdmpModel {
    PdmpModel::builder()
        .grid(StateGrid::new(vec![0.0, 0.25, 0.5]).unwrap())
        .flow(|t, x| x + t)
        .rate(|_| 5.0)
        .exit_time(|x| 1.0 - x)
        .kernel_weights(|_, w| w.fill(1.0))
        .cumulative_rate_closed_form(|t, _| 5.0 * t)
        .build()
        .unwrap()
}

/// Congestion-window geometry (states i/N, flow x + t, exit 1 - x) with the
/// scenario's rate but a kernel that depends only on the destination, never
/// on the pre-jump position: weight 1 + y on state y.
pub fn position_free_kernel_model(n_states: usize, scenario: Scenario) -> PdmpModel {
    let points: Vec<f64> = (0..n_states).map(|i| i as f64 / n_states as f64).collect();
    let builder = PdmpModel::builder()
        .grid(StateGrid::new(points.clone()).unwrap())
        .flow(|t, x| x + t)
        .exit_time(|x| 1.0 - x)
        .kernel_weights(move |_, w| {
            for (wi, &y) in w.iter_mut().zip(&points) {
                *wi = 1.0 + y;
            }
        });
    match scenario {
        Scenario::Const { rate } => builder
            .rate(move |_| rate)
            .cumulative_rate_closed_form(move |t, _| rate * t),
        Scenario::Linear { slope } => builder
            .rate(move |z| slope * z)
            .cumulative_rate_closed_form(move |t, x| slope * x * t + 0.5 * slope * t * t),
    }
    .build()
    .unwrap()
}

/// Poisson kernel (1 - r^2) / (1 - 2 r cos(2 pi z) + r^2): positive, smooth,
/// periodic, with unit mean over [0, 1).
pub fn poisson_kernel(r: f64, z: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * (2.0 * PI * z).cos() + r * r)
}

/// Antiderivative of the Poisson kernel via its geometric cosine series:
/// int_0^u P_r(2 pi z) dz = u + sum_j r^j sin(2 pi j u) / (j pi).
fn poisson_kernel_antiderivative(r: f64, u: f64) -> f64 {
    let mut acc = u;
    let mut rj = 1.0;
    for j in 1..=64 {
        rj *= r;
        acc += rj * (2.0 * PI * j as f64 * u).sin() / (j as f64 * PI);
        if rj < 1e-18 {
            break;
        }
    }
    acc
}

/// Uniform kernel over three states with rate 5 + c sqrt(3) (2z - 1): along
/// the sojourn from state 0 the transformed hazard is exactly
/// 5 + c B_1(u) in the normalized Legendre family, so the first-order
/// coefficient of every pair out of state 0 equals c. A sharp, analytically
/// known alternative for power studies.
pub fn tilted_rate_model(c: f64) -> PdmpModel {
    let root3 = 3.0f64.sqrt();
    PdmpModel::builder()
        .grid(StateGrid::new(vec![0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap())
        .flow(|t, x| x + t)
        .exit_time(|x| 1.0 - x)
        .rate(move |z| 5.0 + c * root3 * (2.0 * z - 1.0))
        .cumulative_rate_closed_form(move |t, x| {
            5.0 * t + c * root3 * t * (2.0 * x + t - 1.0)
        })
        .kernel_weights(|_, w| w.fill(1.0))
        .build()
        .unwrap()
}

/// Smooth everything: circular flow (x + t mod 1) with exit after one full
/// revolution, analytic periodic rate base + amp * P_r, and a strictly
/// positive trigonometric kernel that moves with the position. Useful for
/// checking basis reconstructions where polynomial approximation converges
/// geometrically.
pub fn circle_model(base: f64, amp: f64, r: f64) -> PdmpModel {
    let points: Vec<f64> = (0..4).map(|i| i as f64 * 0.25).collect();
    PdmpModel::builder()
        .grid(StateGrid::new(points.clone()).unwrap())
        .flow(|t, x| (x + t).rem_euclid(1.0))
        .exit_time(|_| 1.0)
        .rate(move |z| base + amp * poisson_kernel(r, z))
        .cumulative_rate_closed_form(move |t, x| {
            base * t
                + amp
                    * (poisson_kernel_antiderivative(r, x + t)
                        - poisson_kernel_antiderivative(r, x))
        })
        .kernel_weights(move |phi, w| {
            for (wi, &y) in w.iter_mut().zip(&points) {
                *wi = 2.0 + (2.0 * PI * (y - phi)).cos();
            }
        })
        .build()
        .unwrap()
}
