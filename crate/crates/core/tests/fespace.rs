use std::sync::Arc;

use dfheat::fespace::*;
use dfheat::geom::{self, Point};
use dfheat::mesh::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: usize) -> Arc<Mesh> {
    Arc::new(build_structured_simplex_mesh(2, n, &BoxExtent::unit()).unwrap())
}

fn cube(n: usize) -> Arc<Mesh> {
    Arc::new(build_structured_simplex_mesh(3, n, &BoxExtent::unit()).unwrap())
}

fn integrate_ref<F: Fn(&Point) -> f64>(dim: usize, deg: usize, f: F) -> f64 {
    let r = quadrature(dim, deg).unwrap();
    (0..r.len()).map(|q| r.weights[q] * f(&r.points[q])).sum()
}

#[test]
fn quadrature_oracles() {
    assert!((integrate_ref(2, 1, |x| x[0]) - 1.0 / 6.0).abs() < 1e-15);
    assert!((integrate_ref(2, 0, |_| 1.0) - 0.5).abs() < 1e-15);
    assert!((integrate_ref(3, 2, |x| x[0] * x[0]) - 1.0 / 60.0).abs() < 1e-15);
    assert!(quadrature(2, MAX_QUADRATURE_DEGREE + 1).is_err());
    assert!(quadrature(4, 2).is_err());
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[test]
fn quadrature_exact_on_monomials() {
    // ∫ x^a y^b z^c over the unit simplex = a! b! c! / (a+b+c+d)!
    for dim in [1, 2, 3] {
        for deg in 0..=MAX_QUADRATURE_DEGREE {
            let r = quadrature(dim, deg).unwrap();
            assert!(r.degree >= deg);
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        if (dim < 2 && b > 0) || (dim < 3 && c > 0) {
                            continue;
                        }
                        let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + dim);
                        let num: f64 = (0..r.len())
                            .map(|q| {
                                let p = r.points[q];
                                r.weights[q] * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)
                            })
                            .sum();
                        assert!((num - exact).abs() < 1e-14, "dim {dim} deg {deg} ({a},{b},{c})");
                    }
                }
            }
        }
    }
}

#[test]
fn dof_counts() {
    for (dim, m, n) in [(2, 0, 3), (2, 1, 8), (3, 0, 4), (2, 2, 15), (3, 1, 15)] {
        assert_eq!(RtBasis::new(dim, m).unwrap().len(), n, "RT{m} in {dim}D");
    }
    for (dim, l, n) in [(2, 0, 1), (2, 1, 3), (2, 2, 6), (3, 1, 4), (3, 3, 20)] {
        assert_eq!(DgBasis::new(dim, l).unwrap().len(), n);
    }
    let mesh = square(4);
    let rt = Space::rt(mesh.clone(), 1).unwrap();
    assert_eq!(rt.total_dofs, 2 * mesh.n_faces() + 2 * mesh.n_elements());
    let v = Space::dg_vector(mesh.clone(), 2).unwrap();
    assert_eq!(v.total_dofs, 12 * mesh.n_elements());
    assert!(Space::dg_scalar(mesh.clone(), MAX_DEGREE + 1).is_err());
    assert!(Space::rt(mesh, MAX_RT_DEGREE + 1).is_err());
}

#[test]
fn dg_mass_matrix_is_identity() {
    for mesh in [square(2), cube(1)] {
        for l in 0..=4 {
            let s = Space::dg_scalar(mesh.clone(), l).unwrap();
            let r = quadrature(mesh.dim, 2 * l).unwrap();
            let n = s.dofs_per_element;
            let k = mesh.n_elements() - 1;
            let det = mesh.map(k).det;
            let mut mass = vec![0.0; n * n];
            let mut vals = vec![0.0; n];
            for q in 0..r.len() {
                s.eval_scalar(k, &r.points[q], &mut vals, None);
                for i in 0..n {
                    for j in 0..n {
                        mass[i * n + j] += r.weights[q] * det * vals[i] * vals[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((mass[i * n + j] - e).abs() < 1e-11, "l={l} ({i},{j}) {}", mass[i * n + j]);
                }
            }
        }
    }
}

#[test]
fn projection_of_one_is_one() {
    let mesh = square(1);
    let s = Arc::new(Space::dg_scalar(mesh.clone(), 1).unwrap());
    let f = interpolate_scalar(&s, |_| 1.0).unwrap();
    let (v, g) = f.eval_scalar(0, &[1.0 / 3.0, 1.0 / 3.0, 0.0]);
    assert!((v - 1.0).abs() < 1e-13);
    assert!(geom::norm(&g) < 1e-12);
}

#[test]
fn dg_projection_reproduces_polynomials() {
    let mesh = cube(1);
    let s = Arc::new(Space::dg_scalar(mesh.clone(), 3).unwrap());
    let p = |x: &Point| 1.0 + x[0] * x[1] * x[2] - 2.0 * x[2].powi(3) + x[0] * x[0];
    let f = interpolate_scalar(&s, p).unwrap();
    for k in 0..mesh.n_elements() {
        let xi = [0.2, 0.3, 0.1];
        let x = mesh.to_physical(k, &xi);
        assert!((f.eval_scalar(k, &xi).0 - p(&x)).abs() < 1e-11);
    }
}

#[test]
fn rt0_reference_fluxes() {
    let b = RtBasis::new(2, 0).unwrap();
    let line = quadrature(1, 4).unwrap();
    for f in 0..3 {
        let fv: Vec<Point> = (0..3).filter(|&v| v != f).map(|v| reference_vertex(2, v)).collect();
        let (n, meas) = reference_face(2, f);
        let mut flux = [0.0; 3];
        let mut normal_vals = vec![];
        for q in 0..line.len() {
            let t = line.points[q][0];
            let xi = geom::add(&geom::scale(&fv[0], 1.0 - t), &geom::scale(&fv[1], t));
            let mut v = [[0.0; 3]; 3];
            let mut d = [0.0; 3];
            b.eval(&xi, &mut v, &mut d);
            for i in 0..3 {
                flux[i] += line.weights[q] * meas * geom::dot(&v[i], &n);
            }
            normal_vals.push(geom::dot(&v[f], &n));
        }
        for i in 0..3 {
            let e = if i == f { 1.0 } else { 0.0 };
            assert!((flux[i] - e).abs() < 1e-13, "face {f} basis {i}: {}", flux[i]);
        }
        for w in normal_vals.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-13);
        }
    }
}

#[test]
fn rt_interpolation_reproduces_linear_fields() {
    for mesh in [square(2), cube(1)] {
        let s = Arc::new(Space::rt(mesh.clone(), 1).unwrap());
        let u = |x: &Point| [1.0 + 2.0 * x[1] - x[2], x[0] - 3.0 * x[1], 0.5 + x[0] + x[2]];
        let f = interpolate_vector(&s, u).unwrap();
        for k in 0..mesh.n_elements() {
            let xi = [0.15, 0.25, if mesh.dim == 3 { 0.2 } else { 0.0 }];
            let x = mesh.to_physical(k, &xi);
            let (v, div) = f.eval_vector(k, &xi);
            let mut e = u(&x);
            if mesh.dim == 2 {
                e[2] = 0.0;
            }
            let exact_div = if mesh.dim == 2 { -3.0 } else { -2.0 };
            assert!(geom::norm(&geom::sub(&v, &e)) < 1e-11, "{v:?} vs {e:?}");
            assert!((div - exact_div).abs() < 1e-10, "dim {} div {div} vs {exact_div}", mesh.dim);
        }
    }
}

#[test]
fn rt_commuting_divergence() {
    // ∫ div(Π u) q = ∫ div u q for q in P_m.
    let mesh = square(2);
    let m = 1;
    let s = Arc::new(Space::rt(mesh.clone(), m).unwrap());
    let u = |x: &Point| [x[0].powi(3) * x[1], x[0] * x[0] * x[1] * x[1] + x[1].powi(3), 0.0];
    let div_u = |x: &Point| 5.0 * x[0] * x[0] * x[1] + 3.0 * x[1] * x[1];
    let f = interpolate_vector(&s, u).unwrap();
    let r = quadrature(2, 12).unwrap();
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q_exp in [[0, 0], [1, 0], [0, 1]] {
            let (mut a, mut b) = (0.0, 0.0);
            for q in 0..r.len() {
                let x = mesh.to_physical(k, &r.points[q]);
                let qv = x[0].powi(q_exp[0]) * x[1].powi(q_exp[1]);
                a += r.weights[q] * det * f.eval_vector(k, &r.points[q]).1 * qv;
                b += r.weights[q] * det * div_u(&x) * qv;
            }
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

fn random_field(space: &Arc<Space>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (0..space.total_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::new(space.clone(), c).unwrap()
}

fn max_normal_jump(f: &Field) -> f64 {
    let mesh = f.space.mesh.clone();
    let rule = quadrature(mesh.dim - 1, 4).unwrap();
    let mut worst: f64 = 0.0;
    for &fi in mesh.interior_faces() {
        let face = &mesh.faces[fi];
        let pts = face_points(&mesh, fi, &rule);
        for q in 0..pts.x.len() {
            let (a, _) = f.eval_vector(face.elem_plus, &pts.xi_plus[q]);
            let (b, _) = f.eval_vector(face.elem_minus.unwrap(), &pts.xi_minus[q]);
            worst = worst.max(geom::dot(&geom::sub(&a, &b), &face.normal).abs());
        }
    }
    worst
}

#[test]
fn field_length_checked() {
    let s = Arc::new(Space::dg_scalar(square(1), 1).unwrap());
    assert!(Field::new(s, vec![0.0; 5]).is_err());
}

#[test]
fn eval_outside_reference_rejected() {
    let s = Space::dg_scalar(square(1), 1).unwrap();
    assert!(eval_basis(&s, 0, &[0.8, 0.8, 0.0]).is_err());
    assert!(eval_basis(&s, 7, &[0.1, 0.1, 0.0]).is_err());
    assert!(eval_basis(&s, 0, &[0.1, 0.1, 0.0]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rt_fields_have_continuous_normal_component(seed in any::<u64>(), m in 0usize..3, three_d in any::<bool>()) {
        let mesh = if three_d { cube(1) } else { square(2) };
        let s = Arc::new(Space::rt(mesh, m).unwrap());
        let f = random_field(&s, seed);
        prop_assert!(max_normal_jump(&f) < 1e-10);
    }

    #[test]
    fn dg_vector_divergence_matches_gradient(seed in any::<u64>(), l in 1usize..4) {
        let mesh = square(1);
        let s = Arc::new(Space::dg_vector(mesh.clone(), l).unwrap());
        let f = random_field(&s, seed);
        let xi = [0.2, 0.3, 0.0];
        let h = 1e-6;
        let k = 1;
        let x = mesh.to_physical(k, &xi);
        let mut fd = 0.0;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let vp = f.eval_vector(k, &mesh.to_reference(k, &xp)).0;
            let vm = f.eval_vector(k, &mesh.to_reference(k, &xm)).0;
            fd += (vp[c] - vm[c]) / (2.0 * h);
        }
        prop_assert!((fd - f.eval_vector(k, &xi).1).abs() < 1e-5 * (1.0 + fd.abs()));
    }
}
