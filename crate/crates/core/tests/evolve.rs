use nsplab::evolve::{cfl_dt, run, FluxHistory, FnObserver, Form, RunOptions, State, Stepper};
use nsplab::PhiField;
use nsplab::profile::{shock_speed, solve_profile, ProfileParams};
use nsplab::Grid;

#[test]
fn profile_translates_and_boundaries_stay_put() {
    let es = shock_speed(1.0, 0.0, 1.2).unwrap();
    let p = solve_profile(&es, &ProfileParams::default()).unwrap();
    let g = Grid::new(150.0, 1500).unwrap();
    let t_final = 10.0 / es.sigma;
    let mut finals = Vec::new();
    for safety in [0.4, 0.2] {
        let s = p.sample_on_grid(&g, 0.0, 0.0);
        let init = State::new(s.v, s.u, 0.0).unwrap();
        let mut stepper = Stepper::new(g, Form::Divergence);
        let opts = RunOptions {
            safety,
            observe_every: t_final,
        };
        let mut seen = 0;
        let mut obs = FnObserver(|_: &State, _: &PhiField, _: &FluxHistory| {
            seen += 1;
            Ok(())
        });
        let out = run(init.clone(), &mut stepper, t_final, &opts, &mut obs).unwrap();
        assert!(seen >= 2);
        let st = out.state;
        assert!((st.t - t_final).abs() < 1e-12);
        assert_eq!(st.v[0], init.v[0]);
        assert_eq!(st.u[0], init.u[0]);
        assert_eq!(st.v.last(), init.v.last());
        assert_eq!(st.u.last(), init.u.last());
        let exact = p.sample_on_grid(&g, t_final, 0.0);
        let err = st.v.iter().zip(&exact.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "sup error {err}");
        finals.push(st);
    }
    let diff = finals[0].v.iter().zip(&finals[1].v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-5, "time-step dependence {diff}");
}

#[test]
fn cfl_step_shrinks_with_the_grid() {
    let g = Grid::new(10.0, 100).unwrap();
    let st = State::new(vec![1.0; g.n_nodes()], vec![0.0; g.n_nodes()], 0.0).unwrap();
    let a = cfl_dt(&st, &g, 0.4).unwrap();
    let g2 = g.refined(2);
    let st2 = State::new(vec![1.0; g2.n_nodes()], vec![0.0; g2.n_nodes()], 0.0).unwrap();
    let b = cfl_dt(&st2, &g2, 0.4).unwrap();
    assert!((a / b - 4.0).abs() < 1e-12, "{a} {b}");
}
