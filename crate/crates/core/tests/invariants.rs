use ch_core::cfl::CflPolicy;
use ch_core::diagnostics::{
    check_energy, h1_norm, l1_distance, l1_error, linf_norm, oleinik_monitor, EnergyLedger,
    Reconstruction,
};
use ch_core::elliptic::{kernel_constants, p_source_from_u, solve_direct, solve_kernel, HelmholtzSolver};
use ch_core::mesh::{d_minus, d_plus, make_grid, sample_half_nodes, GridFn, GridSpec, Site};
use ch_core::peakons::{antipeakon_initial, single_peakon};
use ch_core::scheme1::FirstOrder;
use ch_core::scheme2::SecondOrder;
use ch_core::stepping::TimeStepper;
use proptest::collection::vec;
use proptest::prelude::*;

fn field(values: Vec<f64>, site: Site) -> GridFn {
    GridFn::new(values, site).unwrap()
}

fn grid(nx: usize, dx: f64) -> GridSpec {
    make_grid(0.0, dx * nx as f64, nx).unwrap()
}

/// Random values paired with a grid of matching size.
fn values_and_dx() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (4usize..96, 0.01f64..2.0).prop_flat_map(|(n, dx)| (vec(-3.0f64..3.0, n), Just(dx)))
}

fn two_fields() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (4usize..96, 0.01f64..2.0)
        .prop_flat_map(|(n, dx)| (vec(-3.0f64..3.0, n), vec(-3.0f64..3.0, n), Just(dx)))
}

fn shift(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.rotate_right(1);
    s
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn differences_commute_with_shift((v, dx) in values_and_dx()) {
        let f = field(v.clone(), Site::Half);
        let g = field(shift(&v), Site::Half);
        prop_assert_eq!(d_plus(&g, dx).into_values(), shift(d_plus(&f, dx).values()));
        prop_assert_eq!(d_minus(&g, dx).into_values(), shift(d_minus(&f, dx).values()));
    }

    #[test]
    fn pressure_commutes_with_shift((v, dx) in values_and_dx()) {
        let g = grid(v.len(), dx);
        let solver = HelmholtzSolver::new(&g);
        let p = solver.solve(&p_source_from_u(&field(v.clone(), Site::Half), dx));
        let ps = solver.solve(&p_source_from_u(&field(shift(&v), Site::Half), dx));
        prop_assert!(close(ps.values(), &shift(p.values()), 1e-12));
    }

    #[test]
    fn first_order_step_commutes_with_shift((v, dx) in values_and_dx()) {
        let g = grid(v.len(), dx);
        let s = FirstOrder::new(g, CflPolicy::practical(0.9));
        let a = s.initial_state(field(v.clone(), Site::Half), true).unwrap();
        let b = s.initial_state(field(shift(&v), Site::Half), true).unwrap();
        let dt = s.time_step(&a);
        let a1 = s.step_u(&a, dt).unwrap();
        let b1 = s.step_u(&b, dt).unwrap();
        let scale = 1.0 + a1.u.max_abs();
        prop_assert!(close(b1.u.values(), &shift(a1.u.values()), 1e-10 * scale));
    }

    #[test]
    fn summation_by_parts((v, w, dx) in two_fields()) {
        let vf = field(v.clone(), Site::Integer);
        let wf = field(w.clone(), Site::Half);
        let lhs: f64 = dx * d_plus(&vf, dx).values().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let rhs: f64 = -dx * v.iter().zip(d_minus(&wf, dx).values()).map(|(a, b)| a * b).sum::<f64>();
        let scale: f64 = v.iter().chain(&w).map(|x| x * x).sum::<f64>() + 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    // D_+(vw)_j = v_j D_+w_j + (D_+v)_j w_{j+1}, and the mirrored D_- form.
    #[test]
    fn product_rule((v, w, dx) in two_fields()) {
        let n = v.len();
        let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a * b).collect();
        let prod = field(vw, Site::Integer);
        let (vf, wf) = (field(v.clone(), Site::Integer), field(w.clone(), Site::Integer));
        let (dpv, dpw, dpp) = (d_plus(&vf, dx), d_plus(&wf, dx), d_plus(&prod, dx));
        let (dmv, dmw, dmp) = (d_minus(&vf, dx), d_minus(&wf, dx), d_minus(&prod, dx));
        for j in 0..n {
            let plus = v[j] * dpw[j] + dpv[j] * w[(j + 1) % n];
            let minus = v[j] * dmw[j] + dmv[j] * w[(j + n - 1) % n];
            let tol = 1e-11 * (1.0 + dpp[j].abs() + 9.0 / dx);
            prop_assert!((dpp[j] - plus).abs() <= tol);
            prop_assert!((dmp[j] - minus).abs() <= tol);
        }
    }

    // On a periodic grid the inequality needs a vanishing node; see README.
    #[test]
    fn discrete_sobolev((mut v, dx) in values_and_dx(), zero in any::<prop::sample::Index>()) {
        let n = v.len();
        v[zero.index(n)] = 0.0;
        let u = field(v, Site::Half);
        let g = grid(n, dx);
        prop_assert!(linf_norm(&u) <= h1_norm(&u, &g) / 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn l1_is_a_metric(
        (a, b, dx) in two_fields(),
        seed in vec(-3.0f64..3.0, 96),
    ) {
        let n = a.len();
        let g = grid(n, dx);
        let c = field(seed[..n].to_vec(), Site::Half);
        let (a, b) = (field(a, Site::Half), field(b, Site::Half));
        let ab = l1_distance(&a, &b, &g);
        prop_assert_eq!(ab, l1_distance(&b, &a, &g));
        prop_assert_eq!(l1_distance(&a, &a, &g), 0.0);
        prop_assert!(ab <= l1_distance(&a, &c, &g) + l1_distance(&c, &b, &g) + 1e-12 * (1.0 + ab));
        // l1_error against the samples of a field is the same distance
        let exact = |_t: f64, x: f64| {
            let j = ((x - g.half_node(0)) / g.dx()).round() as usize;
            b[j]
        };
        prop_assert!((l1_error(&a, exact, 0.0, &g) - ab).abs() <= 1e-12 * (1.0 + ab));
    }

    #[test]
    fn pressure_of_nonnegative_source_is_nonnegative(
        (v, dx) in values_and_dx()
    ) {
        let g = grid(v.len(), dx);
        let f = field(v.iter().map(|x| x.abs()).collect(), Site::Integer);
        let fmax = f.max_abs();
        let direct = solve_direct(&f, &g).unwrap();
        let kernel = solve_kernel(&f, &kernel_constants(dx).unwrap());
        prop_assert!(direct.min() >= -1e-14 * fmax);
        prop_assert!(kernel.min() >= 0.0);
    }
}

#[test]
fn reconstruction_is_continuous_and_differentiates_to_q() {
    let g = make_grid(-10.0, 30.0, 128).unwrap();
    let s = FirstOrder::new(g, CflPolicy::practical(0.9));
    let u0 = sample_half_nodes(|x| single_peakon(0.0, x) + 0.3 * antipeakon_initial(x - 5.0), &g).unwrap();
    let lo = s.initial_state(u0, true).unwrap();
    let hi = s.step_u(&lo, s.time_step(&lo)).unwrap();
    let r = Reconstruction::new(&lo, &hi, g).unwrap();
    let dx = g.dx();
    for frac in [0.0, 0.3, 1.0] {
        let t = lo.t + frac * (hi.t - lo.t);
        // nodal values at both levels
        if frac == 0.0 {
            for j in 0..g.nx() - 1 {
                let v = r.reconstruct_u(t, g.half_node(j)).unwrap();
                assert!((v - lo.u[j]).abs() < 1e-12);
            }
        }
        for j in 1..g.nx() {
            // cell boundaries sit at half nodes
            let x = g.half_node(j);
            let left = r.reconstruct_u(t, x - 1e-12).unwrap();
            let right = r.reconstruct_u(t, x + 1e-12).unwrap();
            assert!((left - right).abs() < 1e-9, "jump at {x}: {left} vs {right}");
            // d/dx of u equals q in the interior of each cell
            let mid = g.node(j);
            let h = 1e-4 * dx;
            let slope = (r.reconstruct_u(t, mid + h).unwrap() - r.reconstruct_u(t, mid - h).unwrap()) / (2.0 * h);
            assert!((slope - r.reconstruct_q(t, mid).unwrap()).abs() < 1e-6);
        }
    }
    assert!(r.reconstruct_u(hi.t + 1.0, 0.0).is_err());
    assert!(r.reconstruct_u(lo.t, 31.0).is_err());
}

#[test]
fn energy_bound_and_sobolev_hold_at_every_step() {
    for nx in [64usize, 128] {
        let g = make_grid(-12.0, 12.0, nx).unwrap();
        let u0 = sample_half_nodes(antipeakon_initial, &g).unwrap();
        let h0 = h1_norm(&u0, &g);
        let policy = CflPolicy {
            h1norm0: h0,
            ..CflPolicy::strict(1.0, 1.0)
        };
        let s = FirstOrder::new(g, policy);
        let mut ledger = EnergyLedger::new(&u0, g, 1.0);
        let mut st = s.initial_state(u0, false).unwrap();
        while st.t < 0.5 {
            st = s.step_u(&st, s.time_step(&st)).unwrap();
            ledger.record(st.t, &st.u);
            assert!(linf_norm(&st.u) <= h1_norm(&st.u, &g) / 2f64.sqrt() + 1e-12);
        }
        assert!(check_energy(&ledger).pass);
    }
}

// The fitted one-sided constant stays bounded under refinement on the
// peakon-antipeakon collision.
#[test]
fn one_sided_constant_is_stable_under_refinement() {
    let mut fits = Vec::new();
    for k in [7u32, 8, 9] {
        let g = GridSpec::with_level(-12.0, 12.0, k).unwrap();
        let u0 = sample_half_nodes(antipeakon_initial, &g).unwrap();
        let h0 = h1_norm(&u0, &g);
        let s = FirstOrder::new(g, CflPolicy::practical(0.9));
        let mut st = s.initial_state(u0, true).unwrap();
        let mut worst = f64::NEG_INFINITY;
        while st.t < 10.0 {
            let dt = s.time_step(&st).min(10.0 - st.t);
            st = s.step_u(&st, dt).unwrap();
            let rep = oleinik_monitor(st.q.as_ref().unwrap(), st.t, h0).unwrap();
            worst = worst.max(rep.c_fit.unwrap());
        }
        fits.push(worst);
    }
    assert!(fits.iter().all(|&c| c < 10.0), "{fits:?}");
    let (lo, hi) = fits.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi < 2.0 * lo.max(0.05), "{fits:?}");
}

#[test]
fn second_order_fixed_points_with_either_node() {
    use ch_core::scheme2::{FluxPressure, PressureNode};
    let g = make_grid(0.0, 16.0, 32).unwrap();
    for node in [PressureNode::Left, PressureNode::Right] {
        for fp in [FluxPressure::HalfLevel, FluxPressure::Predictor] {
            let s = SecondOrder::with_flux_pressure(g, CflPolicy::practical(0.9), fp).with_pressure_node(node);
            let mut st = s.initial_state(GridFn::constant(32, -0.4, Site::Integer)).unwrap();
            for _ in 0..100 {
                st = s.step_second(&st, s.time_step(&st)).unwrap();
            }
            assert!(st.u.values().iter().all(|&v| v == -0.4));
        }
    }
}
