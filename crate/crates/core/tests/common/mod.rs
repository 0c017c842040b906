//! Shared helpers for the integration suites: seeded random polynomial data
//! and a Gauss-Legendre quadrature oracle independent of the exact
//! integration path.

#![allow(dead_code)]

use lyapsos::basisproj::{BasisSpec, StackLayout};
use lyapsos::funceval::Lcg64;
use lyapsos::lyapforms::KernelParams;
use lyapsos::polyalg::{Expo, Poly, PolyMatrix};
use lyapsos::slackforms::SlackParams;

pub fn random_poly(deg: usize, bivariate: bool, rng: &mut Lcg64) -> Poly {
    let mut p = Poly::zero();
    for dx in 0..=deg {
        let ymax = if bivariate { deg - dx } else { 0 };
        for dy in 0..=ymax {
            p.add_term(
                Expo::new(dx as u16, dy as u16, 0),
                lyapsos::polyalg::AffineCoeff::constant(rng.next_sym()),
            );
        }
    }
    p
}

pub fn random_matrix(r: usize, c: usize, deg: usize, bivariate: bool, rng: &mut Lcg64) -> PolyMatrix {
    PolyMatrix::from_fn(r, c, |_, _| random_poly(deg, bivariate, rng))
}

pub fn random_symmetric(n: usize, deg: usize, rng: &mut Lcg64) -> PolyMatrix {
    let m = random_matrix(n, n, deg, false, rng);
    m.he().unwrap()
}

pub fn random_const_symmetric(n: usize, rng: &mut Lcg64) -> PolyMatrix {
    random_symmetric(n, 0, rng)
}

/// Random numeric kernel parameters for the state-level (`pad_rows = 0`) or
/// derivative-level functional.
pub fn random_kernel_params(
    basis: &BasisSpec,
    kb_dim: usize,
    deg: usize,
    rng: &mut Lcg64,
) -> KernelParams {
    let q = basis.q();
    let n = basis.layout.dim_stack();
    KernelParams {
        kb: random_symmetric(kb_dim, deg, rng),
        k12: random_matrix(n, q, deg, false, rng),
        k13: random_matrix(n, q, deg, false, rng),
        k22: random_const_symmetric(q, rng),
        k23: random_matrix(q, q, 0, false, rng),
        k33: random_const_symmetric(q, rng),
    }
}

pub fn random_slack_params(layout: &StackLayout, deg: usize, rng: &mut Lcg64) -> SlackParams {
    let ba = layout.beta * layout.alpha;
    SlackParams {
        k1: random_matrix(ba, ba, deg, false, rng),
        k2: random_matrix(ba, 2 * ba, deg, false, rng),
        h1: random_matrix(ba, ba, deg, true, rng),
        h2: random_matrix(ba, ba, deg, true, rng),
        b1: random_matrix(layout.dim_stack(), ba, deg, false, rng),
        b2: random_matrix(2 * ba, ba, deg, false, rng),
    }
}

/// Asserts `|value| <= 1e-10 * max(1, scale)`.
pub fn assert_tiny(value: f64, scale: f64, what: &str) {
    let tol = 1e-10 * scale.max(1.0);
    assert!(
        value.abs() <= tol,
        "{what}: |{value:.3e}| exceeds {tol:.3e} (scale {scale:.3e})"
    );
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to [0, 1]
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Quadrature value of `int_0^1 s_b(x)^T B(x) s_b(x) dx + int_D s(x)^T
/// Gamma[K] s(y) dD`, evaluating all polynomials pointwise. Both triangles
/// of the square are integrated with iterated Gauss-Legendre rules, so the
/// result is exact for polynomial data up to degree 2n-1.
pub fn quadrature_value(
    boundary: &PolyMatrix,
    domain: &PolyMatrix,
    full_stack: &PolyMatrix,
    stack: &PolyMatrix,
    n: usize,
) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let eval_vec = |m: &PolyMatrix, x: f64| -> Vec<f64> {
        (0..m.rows())
            .map(|i| m.get(i, 0).eval_num(x, 0.0, 0.0).unwrap())
            .collect()
    };
    let eval_mat = |m: &PolyMatrix, x: f64, y: f64| -> Vec<f64> {
        m.eval_num(x, y, 0.0).unwrap()
    };
    let nb = boundary.rows();
    let ns = domain.rows();

    let mut acc = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let sb = eval_vec(full_stack, x);
        let b = eval_mat(boundary, x, 0.0);
        let mut quad = 0.0;
        for r in 0..nb {
            for c in 0..nb {
                quad += sb[r] * b[r * nb + c] * sb[c];
            }
        }
        acc += ws[i] * quad;
    }

    // lower triangle: y in [0, x], kernel K(x,y)
    for (i, &x) in xs.iter().enumerate() {
        let sx = eval_vec(stack, x);
        let mut inner = 0.0;
        for (j, &t) in xs.iter().enumerate() {
            let y = x * t;
            let sy = eval_vec(stack, y);
            let k = eval_mat(domain, x, y);
            let mut quad = 0.0;
            for r in 0..ns {
                for c in 0..ns {
                    quad += sx[r] * k[r * ns + c] * sy[c];
                }
            }
            inner += ws[j] * x * quad;
        }
        acc += ws[i] * inner;
    }
    // upper triangle: y in [x, 1], kernel K(y,x)^T
    for (i, &x) in xs.iter().enumerate() {
        let sx = eval_vec(stack, x);
        let mut inner = 0.0;
        for (j, &t) in xs.iter().enumerate() {
            let y = x + (1.0 - x) * t;
            let sy = eval_vec(stack, y);
            let k = eval_mat(domain, y, x);
            let mut quad = 0.0;
            for r in 0..ns {
                for c in 0..ns {
                    // transpose of K(y,x)
                    quad += sx[r] * k[c * ns + r] * sy[c];
                }
            }
            inner += ws[j] * (1.0 - x) * quad;
        }
        acc += ws[i] * inner;
    }
    acc
}
