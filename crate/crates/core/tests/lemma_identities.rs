//! Exact-evaluation suites for the slack identities: the FTC form and the
//! Green form vanish on the whole state space, the boundary form vanishes
//! exactly on the boundary-condition subspace, and the combined slack
//! vanishes there too.

mod common;

use common::*;
use lyapsos::basisproj::StackLayout;
use lyapsos::funceval::{
    evaluate, random_function, sample_boundary_functions, FunctionalForm, Lcg64, TestFunction,
};
use lyapsos::pdemodel::builtin;
use lyapsos::polyalg::PolyMatrix;
use lyapsos::slackforms::{make_bb, make_hb_hbar, make_kb, make_slack, Projections, SlackParams};

const LAYOUTS: [(usize, usize); 3] = [(1, 1), (2, 1), (1, 2)];

fn form_scale(form: &FunctionalForm, w: &TestFunction, alpha: usize) -> f64 {
    let wb = w.full_stack(alpha).abs_bound();
    form.boundary_kernel.abs_bound().max(form.domain_kernel.abs_bound()) * wb * wb
}

#[test]
fn ftc_slack_vanishes_universally() {
    let mut rng = Lcg64::new(0x5eed_0001);
    for &(alpha, beta) in &LAYOUTS {
        let layout = StackLayout::new(alpha, beta);
        let proj = Projections::new(layout).unwrap();
        let ba = beta * alpha;
        for _ in 0..50 {
            let k1 = random_matrix(ba, ba, 3, false, &mut rng);
            let k2 = random_matrix(ba, 2 * ba, 3, false, &mut rng);
            let kb = make_kb(&k1, &k2, &proj).unwrap().he().unwrap();
            let form = FunctionalForm::new_alpha(
                layout,
                kb,
                PolyMatrix::zeros(layout.dim_stack(), layout.dim_stack()),
            )
            .unwrap();
            for _ in 0..20 {
                let w = random_function(beta, 6, &mut rng);
                let v = evaluate(&form, &w).unwrap();
                assert_tiny(v, form_scale(&form, &w, alpha), "FTC slack");
            }
        }
    }
}

#[test]
fn green_slack_vanishes_universally() {
    let mut rng = Lcg64::new(0x5eed_0002);
    for &(alpha, beta) in &LAYOUTS {
        let layout = StackLayout::new(alpha, beta);
        let proj = Projections::new(layout).unwrap();
        let ba = beta * alpha;
        for _ in 0..50 {
            let h1 = random_matrix(ba, ba, 3, true, &mut rng);
            let h2 = random_matrix(ba, ba, 3, true, &mut rng);
            let (hb, hbar) = make_hb_hbar(&h1, &h2, &proj).unwrap();
            let form =
                FunctionalForm::new_alpha(layout, hb.he().unwrap(), hbar).unwrap();
            for _ in 0..20 {
                let w = random_function(beta, 6, &mut rng);
                let v = evaluate(&form, &w).unwrap();
                assert_tiny(v, form_scale(&form, &w, alpha), "Green slack");
            }
        }
    }
}

#[test]
fn boundary_slack_vanishes_on_b_and_detects_violations() {
    let mut rng = Lcg64::new(0x5eed_0003);
    let model = builtin("example1").unwrap().instantiate(1.5).unwrap();
    let layout = model.layout;
    let proj = Projections::new(layout).unwrap();
    let ba = layout.beta * layout.alpha;

    let mut nonzero = 0usize;
    let mut total = 0usize;
    for draw in 0..50 {
        let b1 = random_matrix(layout.dim_stack(), ba, 2, false, &mut rng);
        let b2 = random_matrix(2 * ba, ba, 2, false, &mut rng);
        let bb = make_bb(&b1, &b2, &model.f, &layout).unwrap().he().unwrap();
        let form = FunctionalForm::new_alpha(
            layout,
            bb,
            PolyMatrix::zeros(layout.dim_stack(), layout.dim_stack()),
        )
        .unwrap();
        let ws =
            sample_boundary_functions(&model.f, &layout, 6, 20, 0xb0a + draw as u64).unwrap();
        for w in &ws {
            let v = evaluate(&form, w).unwrap();
            assert_tiny(v, form_scale(&form, w, layout.alpha), "boundary slack on B");
        }
        // sanity direction: generically nonzero off the boundary set
        for _ in 0..4 {
            let w = random_function(layout.beta, 6, &mut rng);
            if w.in_boundary_set(&model.f, layout.alpha) {
                continue;
            }
            total += 1;
            let v = evaluate(&form, &w).unwrap();
            if v.abs() > 1e-8 * form_scale(&form, &w, layout.alpha).max(1.0) {
                nonzero += 1;
            }
        }
    }
    assert!(
        nonzero as f64 >= 0.9 * total as f64,
        "boundary slack nonzero on only {nonzero}/{total} violating functions"
    );
}

#[test]
fn combined_slack_vanishes_on_boundary_subspace() {
    let mut rng = Lcg64::new(0x5eed_0004);
    for (name, lambda) in [("example1", 2.0), ("example2", 0.5), ("example3", 0.5)] {
        let model = builtin(name).unwrap().instantiate(lambda).unwrap();
        let layout = model.layout;
        let proj = Projections::new(layout).unwrap();
        for draw in 0..50 {
            let params = random_slack_params(&layout, 2, &mut rng);
            let form = make_slack(&params, &model.f, &proj).unwrap();
            let ws = sample_boundary_functions(
                &model.f,
                &layout,
                2 * layout.alpha + 3,
                20,
                0xc0de + draw as u64,
            )
            .unwrap();
            for w in &ws {
                let v = evaluate(&form, w).unwrap();
                assert_tiny(v, form_scale(&form, w, layout.alpha), name);
            }
        }
    }
}

#[test]
fn slack_params_zero_give_zero_functional() {
    let model = builtin("example1").unwrap().instantiate(1.0).unwrap();
    let layout = model.layout;
    let proj = Projections::new(layout).unwrap();
    let form = make_slack(&SlackParams::zero(&layout), &model.f, &proj).unwrap();
    let mut rng = Lcg64::new(9);
    let w = random_function(layout.beta, 5, &mut rng);
    assert_eq!(evaluate(&form, &w).unwrap(), 0.0);
}
