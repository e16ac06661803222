use std::sync::Arc;

use dfheat::fespace::*;
use dfheat::forms::*;
use dfheat::geom::{self, Point};
use dfheat::linsolve::solve_general;
use dfheat::mesh::*;
use dfheat::sparse::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square(n: usize) -> Arc<Mesh> {
    Arc::new(build_structured_simplex_mesh(2, n, &BoxExtent::unit()).unwrap())
}

fn data_with(beta: f64, flow: FlowBc, thermal: ThermalBc) -> ProblemData {
    ProblemData {
        permeability: scaled_identity(1.0),
        conductivity: scaled_identity(1.0),
        beta,
        viscosity: default_viscosity(),
        f: Arc::new(|_| [0.0; 3]),
        g: Arc::new(|_| 0.0),
        bcs: BoundarySpec::uniform(flow, thermal),
    }
}

fn simple_data() -> ProblemData {
    data_with(1.0, FlowBc::DirichletPressure(Arc::new(|_| 0.0)), ThermalBc::DirichletTemperature(Arc::new(|_| 0.0)))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_field(rng: &mut ChaCha8Rng, space: &Arc<Space>) -> Field {
    Field::new(space.clone(), random_vec(rng, space.total_dofs)).unwrap()
}

/// Single triangle with diameter `h`.
fn one_triangle(h: f64) -> Mesh {
    Mesh::new(2, vec![[0.0, 0.0, 0.0], [h, 0.0, 0.0], [0.5 * h, 0.3 * h, 0.0]], vec![vec![0, 1, 2]]).unwrap()
}

#[test]
fn penalty_examples() {
    let m = one_triangle(0.5);
    let f = m.boundary_faces()[0];
    let cfg = PenaltyConfig::default();
    assert!((penalty_sigma(&m, f, &cfg, &[2.0], 2) - 160.0).abs() < 1e-12);

    let m1 = Mesh::new(2, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, -0.5, 0.0]], vec![vec![0, 1, 2], vec![0, 3, 1]])
        .unwrap();
    let fi = m1.interior_faces()[0];
    let unit = PenaltyConfig { alpha1: 1.0, alpha2: 1.0, alpha3: 1.0 };
    assert!((penalty_sigma(&m1, fi, &unit, &[2.0, 2.0], 1) - 2.0).abs() < 1e-12);
    let doubled = PenaltyConfig { alpha1: 2.0, ..unit };
    assert!((penalty_sigma(&m1, fi, &doubled, &[2.0, 2.0], 1) - 4.0).abs() < 1e-12);

    let m = one_triangle(0.25);
    let f = m.boundary_faces()[0];
    assert!((penalty_xi(&m, f, &cfg, 2) - 160.0).abs() < 1e-12);
    assert!((penalty_rho(&m, f, &cfg, 1) - 2.5).abs() < 1e-12);
}

#[test]
fn penalty_scaling_under_refinement() {
    let cfg = PenaltyConfig::default();
    let (a, b) = (unit_square(4), unit_square(8));
    let max_over = |m: &Mesh, g: &dyn Fn(&Mesh, usize) -> f64| (0..m.n_faces()).map(|f| g(m, f)).fold(0.0, f64::max);
    let min_over = |m: &Mesh, g: &dyn Fn(&Mesh, usize) -> f64| (0..m.n_faces()).map(|f| g(m, f)).fold(f64::INFINITY, f64::min);
    let tb_a = vec![2.0; a.n_elements()];
    let tb_b = vec![2.0; b.n_elements()];
    let sa = max_over(&a, &|m, f| penalty_sigma(m, f, &cfg, &tb_a, 2));
    let sb = max_over(&b, &|m, f| penalty_sigma(m, f, &cfg, &tb_b, 2));
    assert!((sb / sa - 2.0).abs() < 1e-12);
    let xa = max_over(&a, &|m, f| penalty_xi(m, f, &cfg, 2));
    let xb = max_over(&b, &|m, f| penalty_xi(m, f, &cfg, 2));
    assert!((xb / xa - 2.0).abs() < 1e-12);
    let ra = min_over(&a, &|m, f| penalty_rho(m, f, &cfg, 1));
    let rb = min_over(&b, &|m, f| penalty_rho(m, f, &cfg, 1));
    assert!((rb / ra - 0.5).abs() < 1e-12);
}

#[test]
fn diffusion_matrix_symmetric_and_coercive() {
    let mesh = unit_square(3);
    let space = Space::dg_scalar(mesh, 2).unwrap();
    let (a, _) = assemble_ah(&space, &simple_data(), &PenaltyConfig::default()).unwrap();
    assert!(a.max_asymmetry() <= 1e-12 * a.max_abs().max(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x = random_vec(&mut rng, space.total_dofs);
        assert!(a.bilinear(&x, &x) > 0.0);
    }
}

#[test]
fn diffusion_reproduces_linear_temperature() {
    let mesh = unit_square(1);
    let exact = |x: &Point| 1.0 + 2.0 * x[0] - x[1];
    let data = data_with(1.0, FlowBc::DirichletPressure(Arc::new(|_| 0.0)), ThermalBc::DirichletTemperature(Arc::new(exact)));
    for l in 1..=2 {
        let space = Arc::new(Space::dg_scalar(mesh.clone(), l).unwrap());
        let (a, rhs) = assemble_ah(&space, &data, &PenaltyConfig::default()).unwrap();
        let x = solve_general(&a, &rhs, 1e-14).unwrap();
        let reference = interpolate_scalar(&space, exact).unwrap();
        let err = x.iter().zip(&reference.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "ℓ = {l}: {err:e}");
    }
}

#[test]
fn robin_constant_exterior_temperature_is_exact() {
    let mesh = unit_square(2);
    let data = data_with(1.0, FlowBc::DirichletPressure(Arc::new(|_| 0.0)), ThermalBc::Robin { gamma: 0.1, t_ext: 0.5 });
    let space = Arc::new(Space::dg_scalar(mesh, 1).unwrap());
    let (a, rhs) = assemble_ah(&space, &data, &PenaltyConfig::default()).unwrap();
    let t = interpolate_scalar(&space, |_| 0.5).unwrap();
    let r = a.mul_vec(&t.coeffs);
    let res = r.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(res < 1e-12, "{res:e}");
}

fn boundary_flux(v: &Field) -> f64 {
    let mesh = &*v.space.mesh;
    let rule = simplex_rule(mesh.dim - 1, 8).unwrap();
    let mut s = 0.0;
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let fp = face_points(mesh, f, &rule);
        for q in 0..fp.x.len() {
            s += fp.weights[q] * geom::dot(&v.eval_vector(face.elem_plus, &fp.xi_plus[q]).0, &face.normal);
        }
    }
    s
}

#[test]
fn coupling_form_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = simple_data();
    // Divergence theorem on one element.
    let mesh = Arc::new(one_triangle(1.0));
    let p = Arc::new(Space::dg_scalar(mesh.clone(), 0).unwrap());
    let v = Arc::new(Space::dg_vector(mesh.clone(), 2).unwrap());
    let b = assemble_bh(&p, &v, &data).unwrap();
    let one = interpolate_scalar(&p, |_| 1.0).unwrap();
    for _ in 0..5 {
        let w = random_field(&mut rng, &v);
        let bqv = b.bilinear(&one.coeffs, &w.coeffs);
        assert!((bqv + boundary_flux(&w)).abs() < 1e-12);
    }
    // Divergence-free field against a constant pressure.
    let w = interpolate_vector(&v, |x| [x[1], -x[0], 0.0]).unwrap();
    assert!(b.bilinear(&one.coeffs, &w.coeffs).abs() < 1e-12);

    // RT fields: no face contributions.
    let mesh = unit_square(2);
    let p = Arc::new(Space::dg_scalar(mesh.clone(), 1).unwrap());
    let v = Arc::new(Space::rt(mesh.clone(), 1).unwrap());
    let b = assemble_bh(&p, &v, &data).unwrap();
    for _ in 0..5 {
        let q = random_field(&mut rng, &p);
        let w = random_field(&mut rng, &v);
        let rule = simplex_rule(2, 6).unwrap();
        let mut direct = 0.0;
        for k in 0..mesh.n_elements() {
            let det = mesh.map(k).det;
            for i in 0..rule.len() {
                direct -= rule.weights[i] * det * q.eval_scalar(k, &rule.points[i]).0 * w.eval_vector(k, &rule.points[i]).1;
            }
        }
        assert!((b.bilinear(&q.coeffs, &w.coeffs) - direct).abs() < 1e-12);
    }
}

#[test]
fn convection_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = simple_data();
    let mesh = unit_square(2);
    let t = Space::dg_scalar(mesh.clone(), 2).unwrap();
    let v = Arc::new(Space::dg_vector(mesh.clone(), 2).unwrap());
    let (c, _) = assemble_ch(&Field::zeros(v.clone()), &t, &data).unwrap();
    assert_eq!(c.max_abs(), 0.0);
    for _ in 0..100 {
        let u = random_field(&mut rng, &v);
        let (c, _) = assemble_ch(&u, &t, &data).unwrap();
        let s = random_vec(&mut rng, t.total_dofs);
        assert!(c.bilinear(&s, &s) >= -1e-12);
    }

    // One element, constant u and S = 1: ½∮|u·n| − ½∮u·n.
    let mesh = Arc::new(one_triangle(1.0));
    let t = Arc::new(Space::dg_scalar(mesh.clone(), 1).unwrap());
    let v = Arc::new(Space::dg_vector(mesh.clone(), 1).unwrap());
    let uc = [0.7, -0.4, 0.0];
    let u = interpolate_vector(&v, |_| uc).unwrap();
    let (c, _) = assemble_ch(&u, &t, &data).unwrap();
    let one = interpolate_scalar(&t, |_| 1.0).unwrap();
    let mut hand = 0.0;
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let un = geom::dot(&uc, &face.normal);
        hand += 0.5 * face.measure * (un.abs() - un);
    }
    assert!((c.bilinear(&one.coeffs, &one.coeffs) - hand).abs() < 1e-12);
}

#[test]
fn velocity_jump_penalty_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = simple_data();
    let cfg = PenaltyConfig::default();
    let single = Arc::new(Space::dg_vector(Arc::new(one_triangle(1.0)), 2).unwrap());
    let (du, _) = assemble_du(&single, &data, &cfg).unwrap();
    assert_eq!(du.max_abs(), 0.0);
    let p0 = Space::dg_scalar(single.mesh.clone(), 1).unwrap();
    assert_eq!(assemble_dp(&p0, &cfg).unwrap().max_abs(), 0.0);

    let mesh = unit_square(3);
    let v = Arc::new(Space::dg_vector(mesh.clone(), 2).unwrap());
    let (du, _) = assemble_du(&v, &data, &cfg).unwrap();
    let smooth = interpolate_vector(&v, |x| [x[0] * x[1], x[1] * x[1] - x[0], 0.0]).unwrap();
    assert!(du.bilinear(&smooth.coeffs, &smooth.coeffs) <= 1e-12);
    let p = Space::dg_scalar(mesh, 1).unwrap();
    let dp = assemble_dp(&p, &cfg).unwrap();
    for _ in 0..20 {
        let x = random_vec(&mut rng, v.total_dofs);
        assert!(du.bilinear(&x, &x) >= -1e-12);
        let y = random_vec(&mut rng, p.total_dofs);
        assert!(dp.bilinear(&y, &y) >= -1e-12);
    }
}

fn max_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    a.add(1.0, b, -1.0).max_abs()
}

#[test]
fn velocity_mass_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = simple_data();
    let mesh = unit_square(2);
    for v in [Arc::new(Space::dg_vector(mesh.clone(), 2).unwrap()), Arc::new(Space::rt(mesh.clone(), 1).unwrap())] {
        let t = Arc::new(Space::dg_scalar(mesh.clone(), 2).unwrap());
        let mass = assemble_velocity_mass(&v).unwrap();
        let mnu = assemble_mnu(&Field::zeros(t.clone()), &v, &data).unwrap();
        let mut twice = mass.clone();
        twice.scale(2.0);
        assert!(max_diff(&mnu, &twice) < 1e-12);

        let mut unit = data.clone();
        unit.viscosity = Arc::new(|_| 1.0);
        let m1 = assemble_mnu(&random_field(&mut rng, &t), &v, &unit).unwrap();
        let w = random_field(&mut rng, &v);
        let l2 = dfheat::analysis::l2_vector(&w).unwrap();
        assert!((m1.bilinear(&w.coeffs, &w.coeffs) - l2 * l2).abs() < 1e-12 * (1.0 + l2 * l2));

        assert_eq!(assemble_mbeta(&w, &v, 0.0).unwrap().max_abs(), 0.0);

        // Any temperature field gives an SPD viscous mass.
        let m = assemble_mnu(&random_field(&mut rng, &t), &v, &data).unwrap();
        let signs = vec![1; v.total_dofs];
        let rhs = random_vec(&mut rng, v.total_dofs);
        dfheat::linsolve::solve_quasi_definite(&m, signs, &rhs, 1e-12).unwrap();
        for _ in 0..10 {
            let x = random_vec(&mut rng, v.total_dofs);
            assert!(m.bilinear(&x, &x) > 0.0);
        }
    }
    let v = Arc::new(Space::dg_vector(mesh.clone(), 1).unwrap());
    let w = interpolate_vector(&v, |_| [2.0f64.sqrt(), 2.0f64.sqrt(), 0.0]).unwrap();
    let mb = assemble_mbeta(&w, &v, 1.0).unwrap();
    let mut twice = assemble_velocity_mass(&v).unwrap();
    twice.scale(2.0);
    assert!(max_diff(&mb, &twice) < 1e-12);

    // |w| stays away from zero so both quadratures resolve |w|³.
    let w = interpolate_vector(&v, |x| [1.0 + 0.3 * x[0], 0.5 - 0.2 * x[1], 0.0]).unwrap();
    let mb = assemble_mbeta(&w, &v, 1.0).unwrap();
    let l3 = dfheat::analysis::l3_vector(&w).unwrap();
    let rel = (mb.bilinear(&w.coeffs, &w.coeffs) - l3.powi(3)).abs() / l3.powi(3);
    assert!(rel < 1e-3, "{rel:e}");
}

/// Element-wise projection of an RT field onto a DG vector space that contains it.
fn rt_to_dg(w: &Field, dg: &Arc<Space>) -> Field {
    let mesh = &*dg.mesh;
    let n = dg.dofs_per_element;
    let rule = simplex_rule(mesh.dim, 2 * dg.degree + 2).unwrap();
    let mut vals = vec![[0.0; 3]; n];
    let mut divs = vec![0.0; n];
    let mut out = Field::zeros(dg.clone());
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            let u = w.eval_vector(k, &rule.points[q]).0;
            dg.eval_vector(k, &rule.points[q], &mut vals, &mut divs);
            for i in 0..n {
                out.coeffs[k * n + i] += rule.weights[q] * det * geom::dot(&u, &vals[i]);
            }
        }
    }
    out
}

#[test]
fn dg_and_rt_forms_agree_on_rt_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let data = simple_data();
    let mesh = unit_square(2);
    let rt = Arc::new(Space::rt(mesh.clone(), 1).unwrap());
    let dg = Arc::new(Space::dg_vector(mesh.clone(), 2).unwrap());
    let t = Space::dg_scalar(mesh.clone(), 2).unwrap();
    let p = Space::dg_scalar(mesh.clone(), 1).unwrap();
    let b_rt = assemble_bh(&p, &rt, &data).unwrap();
    let b_dg = assemble_bh(&p, &dg, &data).unwrap();
    for _ in 0..3 {
        let w = random_field(&mut rng, &rt);
        let wd = rt_to_dg(&w, &dg);
        let (c_rt, _) = assemble_ch(&w, &t, &data).unwrap();
        let (c_dg, _) = assemble_ch(&wd, &t, &data).unwrap();
        assert!(max_diff(&c_rt, &c_dg) < 1e-11, "{:e}", max_diff(&c_rt, &c_dg));
        let q = random_vec(&mut rng, p.total_dofs);
        let d = b_rt.bilinear(&q, &w.coeffs) - b_dg.bilinear(&q, &wd.coeffs);
        assert!(d.abs() < 1e-11, "{d:e}");
    }
}
