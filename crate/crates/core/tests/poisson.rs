use nsplab::poisson::{electric_force, poisson_residual, solve_phi, trf_residual};
use nsplab::profile::{shock_speed, solve_profile, ProfileParams};
use nsplab::Grid;

#[test]
fn solver_reproduces_the_profile_potential() {
    let es = shock_speed(1.0, 0.0, 1.2).unwrap();
    let p = solve_profile(&es, &ProfileParams::default()).unwrap();
    let mut errs = Vec::new();
    for n in [1000usize, 2000] {
        let g = Grid::new(60.0, n).unwrap();
        let s = p.sample_on_grid(&g, 0.0, 0.0);
        let bc = (-s.v[0].ln(), -s.v.last().unwrap().ln());
        let phi = solve_phi(&s.v, &g, bc, None).unwrap();
        assert!(poisson_residual(&s.v, &phi.phi, &g).unwrap() < 1e-9);
        let err = phi.phi.iter().zip(&s.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        errs.push(err);
        assert!(trf_residual(&s.v, &phi.phi, &g).unwrap() < 1e-5);
        let force = electric_force(&s.v, &phi.phi, &g).unwrap();
        let edge = force.len() / 50;
        for f in force[..edge].iter().chain(&force[force.len() - edge..]) {
            assert!(f.abs() < 1e-5, "far-field force {f}");
        }
    }
    let ratio = errs[0] / errs[1];
    assert!(errs[1] < 1e-5, "{errs:?}");
    assert!((3.0..=5.0).contains(&ratio), "{errs:?}");
}

#[test]
fn constant_volume_gives_constant_potential() {
    let g = Grid::new(10.0, 100).unwrap();
    let v = vec![1.3; g.n_nodes()];
    let c = -(1.3f64).ln();
    let phi = solve_phi(&v, &g, (c, c), None).unwrap();
    for x in &phi.phi {
        assert!((x - c).abs() < 1e-13);
    }
}
