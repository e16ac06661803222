use std::sync::Arc;

use dfheat::cases::*;
use dfheat::fespace::*;
use dfheat::forms::{FlowBc, ThermalBc};
use dfheat::geom::{self, Point};

const FD_STEP: f64 = 1e-6;

fn fd_grad(f: &dyn Fn(&Point) -> f64, x: &Point, dim: usize) -> Point {
    let mut g = [0.0; 3];
    for a in 0..dim {
        let (mut xp, mut xm) = (*x, *x);
        xp[a] += FD_STEP;
        xm[a] -= FD_STEP;
        g[a] = (f(&xp) - f(&xm)) / (2.0 * FD_STEP);
    }
    g
}

fn sample_points(dim: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let z = if dim == 3 { 0.13 + 0.2 * ((i + j) % 4) as f64 } else { 0.0 };
            pts.push([0.11 + 0.23 * i as f64, 0.07 + 0.27 * j as f64, z]);
        }
    }
    pts
}

#[test]
fn conv2d_spot_values() {
    let case = case_convergence_2d();
    let ex = case.exact.unwrap();
    let u = (ex.u)(&[0.5, 0.25, 0.0]);
    assert!((u[0] - 0.25).abs() < 1e-14 && u[1].abs() < 1e-14);
    for y in [0.0, 0.3, 0.77, 1.0] {
        assert!((ex.p)(&[0.0, y, 0.0]).abs() < 1e-14);
    }
}

#[test]
fn conv3d_spot_values() {
    let case = case_convergence_3d();
    let ex = case.exact.unwrap();
    for (x, y) in [(0.1, 0.2), (0.7, 0.4), (0.5, 0.9)] {
        assert!((ex.t)(&[x, y, 0.0]).abs() < 1e-14);
    }
    // p(0.25, 0.5, 0) = (x² + 3y − 2xy + xz − z²) sin(2πx) sin(2πy) cos(2πz) with sin(π) = 0.
    assert!((ex.p)(&[0.25, 0.5, 0.0]).abs() < 1e-14);
    let x = [0.25, 0.25, 0.0];
    let hand = (0.0625 + 0.75 - 0.125) * 1.0 * 1.0 * 1.0;
    assert!(((ex.p)(&x) - hand).abs() < 1e-14);
}

fn check_divergence_free(case: &CaseDefinition) {
    let ex = case.exact.as_ref().unwrap();
    let d = case.dim;
    let mesh = Arc::new(case.build_mesh(MeshSpec::Cells(2)).unwrap());
    let rule = simplex_rule(d, 12).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..mesh.n_elements() {
        for xi in &rule.points {
            let x = mesh.to_physical(k, xi);
            let mut div = 0.0;
            for a in 0..d {
                let comp = |p: &Point| (ex.u)(p)[a];
                div += fd_grad(&comp, &x, d)[a];
            }
            worst = worst.max(div.abs());
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
    // Discrete check: zero flux through every element boundary.
    let frule = simplex_rule(d - 1, 14).unwrap();
    for k in 0..mesh.n_elements() {
        let mut flux = 0.0;
        for lf in 0..=d {
            let f = mesh.element_face(k, lf);
            let face = &mesh.faces[f];
            let sign = if face.elem_plus == k { 1.0 } else { -1.0 };
            let fp = face_points(&mesh, f, &frule);
            for q in 0..fp.x.len() {
                flux += sign * fp.weights[q] * geom::dot(&(ex.u)(&fp.x[q]), &face.normal);
            }
        }
        assert!(flux.abs() < 1e-9, "element {k}: {flux:e}");
    }
}

#[test]
fn manufactured_velocities_are_solenoidal() {
    check_divergence_free(&case_convergence_2d());
    check_divergence_free(&case_convergence_3d());
}

fn check_sources(case: &CaseDefinition) {
    let ex = case.exact.as_ref().unwrap();
    let d = case.dim;
    let data = &case.data;
    for x in sample_points(d) {
        let gp = fd_grad(&*ex.p, &x, d);
        let gt = fd_grad(&*ex.t, &x, d);
        for a in 0..d {
            assert!((gp[a] - (ex.grad_p)(&x)[a]).abs() < 1e-7);
            assert!((gt[a] - (ex.grad_t)(&x)[a]).abs() < 1e-7);
        }
        let mut lap = 0.0;
        for a in 0..d {
            let ga = |p: &Point| (ex.grad_t)(p)[a];
            lap += fd_grad(&ga, &x, d)[a];
        }
        assert!((lap - (ex.lap_t)(&x)).abs() < 1e-6 * (1.0 + lap.abs()));

        let u = (ex.u)(&x);
        let nu = (data.viscosity)((ex.t)(&x));
        let f = (data.f)(&x);
        for a in 0..d {
            let expected = (nu + geom::norm(&u)) * u[a] + gp[a];
            assert!((f[a] - expected).abs() < 1e-7, "{} f[{a}]", case.name);
        }
        let g = -lap + geom::dot(&u, &gt);
        assert!(((data.g)(&x) - g).abs() < 1e-6 * (1.0 + g.abs()), "{} g", case.name);
    }
}

#[test]
fn manufactured_sources_match_finite_differences() {
    check_sources(&case_convergence_2d());
    check_sources(&case_convergence_3d());
}

#[test]
fn ramp_examples() {
    let uin = lshape_inflow_ramp();
    assert!((ramp_eval(&uin, 0.7).unwrap() - 0.5).abs() < 1e-14);
    assert!((ramp_eval(&uin, 1.0).unwrap() - 1.0).abs() < 1e-14);
    assert!(ramp_eval(&lshape_temperature_ramp(), 0.2).unwrap().abs() < 1e-14);
    assert!(ramp_eval(&uin, 2.5).is_err());
    assert!(RampProfile::new(1.0, 0.5, 1.1, 1.5, 2.0, 0.0, 1.0).is_err());
}

#[test]
fn ramps_are_continuous() {
    for r in [lshape_inflow_ramp(), lshape_outflow_ramp(), lshape_temperature_ramp()] {
        for x in [r.a, r.b, r.c, r.d] {
            let jump = (r.value(x + 1e-13) - r.value(x - 1e-13)).abs();
            assert!(jump <= 1e-12, "{x}: {jump:e}");
        }
    }
}

#[test]
fn lshape_fluxes_balance() {
    assert!((lshape_inflow_ramp().integral() - lshape_outflow_ramp().integral()).abs() < 1e-10);
    for dim in [2, 3] {
        let case = case_lshape(dim).unwrap();
        let mesh = case.build_mesh(MeshSpec::TargetH(0.5)).unwrap();
        case.data.validate(&mesh).unwrap();
        assert!(case.data.bcs.needs_pressure_gauge(&mesh));
        let rule = simplex_rule(dim - 1, 10).unwrap();
        let mut net = 0.0;
        for &f in mesh.boundary_faces() {
            let face = &mesh.faces[f];
            let tag = face.boundary_tag.as_deref().unwrap();
            let FlowBc::NormalVelocity(un) = case.data.bcs.flow_bc(tag).unwrap() else { panic!("tag {tag}") };
            let fp = face_points(&mesh, f, &rule);
            for q in 0..fp.x.len() {
                let v = un(&fp.x[q]);
                if tag == "wall" {
                    assert_eq!(v, 0.0);
                }
                net += fp.weights[q] * v;
            }
        }
        // Coarse faces do not resolve the ramps exactly.
        assert!(net.abs() < 0.05, "{dim}D net flux {net}");
    }
}

#[test]
fn lshape_robin_data() {
    let case = case_lshape(2).unwrap();
    match case.data.bcs.thermal_bc("wall").unwrap() {
        ThermalBc::Robin { gamma, t_ext } => {
            // Θ∇T·n + γ(T − T_ext) vanishes for T ≡ T_ext.
            assert_eq!(*gamma * (LSHAPE_T_EXT - *t_ext), 0.0);
            assert_eq!(*gamma, LSHAPE_ROBIN_GAMMA);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(case.data.bcs.thermal_bc("inflow").unwrap(), ThermalBc::DirichletTemperature(_)));
}

#[test]
fn reentrant_distance() {
    assert_eq!(lshape_reentrant_distance(2, &[2.0, 1.0, 0.0]), 0.0);
    assert!((lshape_reentrant_distance(2, &[3.0, 1.0, 0.0]) - 1.0).abs() < 1e-14);
    assert_eq!(lshape_reentrant_distance(3, &[3.0, 1.0, 1.0]), 0.0);
    assert_eq!(lshape_reentrant_distance(3, &[2.0, 1.0, 0.5]), 0.0);
}

#[test]
fn unknown_case_rejected() {
    assert!(case_by_name("nope").is_err());
    for n in CASE_NAMES {
        assert_eq!(case_by_name(n).unwrap().name, n);
    }
    let c = case_convergence_2d();
    assert_eq!(c.build_mesh(MeshSpec::Elements(64)).unwrap().n_elements(), 64);
}
