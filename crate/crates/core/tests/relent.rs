use nsplab::evolve::State;
use nsplab::poisson::solve_phi;
use nsplab::profile::{shock_speed, solve_profile, ProfileParams};
use nsplab::relent::{eta_integral, good_terms, sobolev_norm, RelConstants};
use nsplab::shift::shifted_frame;
use nsplab::Grid;

#[test]
fn shock_weighted_velocity_integral_telescopes() {
    let es = shock_speed(1.0, 0.0, 1.2).unwrap();
    let p = solve_profile(&es, &ProfileParams::default()).unwrap();
    let g = Grid::new(120.0, 2400).unwrap();
    let f = shifted_frame(&p, 0.0, 0.0, &g);
    let u: Vec<f64> = f.ubar_x.iter().map(|u| u + 1.0).collect();
    let st = State::new(f.vbar_x.clone(), u, 0.0).unwrap();
    let gt = good_terms(&st, &f, &g, &es, &RelConstants::new(&es)).unwrap();
    assert!((gt.gs - 0.2).abs() < 1e-5, "{}", gt.gs);
    assert!(gt.d.abs() < 1e-20);
    assert!(gt.g1 > 0.0);
}

#[test]
fn relative_entropy_is_quadratic_in_the_perturbation() {
    let es = shock_speed(1.0, 0.0, 1.2).unwrap();
    let p = solve_profile(&es, &ProfileParams::default()).unwrap();
    let g = Grid::new(120.0, 2400).unwrap();
    let f = shifted_frame(&p, 0.0, 0.0, &g);
    let eta_at = |eps: f64| {
        let bump: Vec<f64> = g.nodes().iter().map(|x| eps * (-(x * x) / 25.0).exp()).collect();
        let v: Vec<f64> = f.vbar_x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let u: Vec<f64> = f.ubar_x.iter().zip(&bump).map(|(a, b)| a - 0.5 * b).collect();
        let st = State::new(v, u, 0.0).unwrap();
        let phi = solve_phi(&st.v, &g, st.phi_bc(), None).unwrap();
        eta_integral(&st, &phi, &f, &g).unwrap()
    };
    let a = eta_at(1e-3);
    let b = eta_at(5e-4);
    assert!(a.eta_plain > 0.0 && a.eta_weighted >= a.eta_plain);
    let r = a.eta_weighted / b.eta_weighted;
    assert!((r - 4.0).abs() < 0.02, "{r}");
}

#[test]
fn sobolev_norm_of_a_sine() {
    let g = Grid::new(std::f64::consts::PI, 4000).unwrap();
    let s: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
    // ||sin||^2 = pi per order on [-pi, pi]
    for k in 0..=3 {
        let n = sobolev_norm(&[&s], k, &g).unwrap();
        let exact = ((k + 1) as f64 * std::f64::consts::PI).sqrt();
        assert!((n - exact).abs() < 1e-2, "k = {k}: {n} vs {exact}");
    }
    assert!(sobolev_norm(&[&s], 4, &g).is_err());
}
