//! Basis evaluation buffers shared by the assembly routines.

use crate::fespace::Space;
use crate::geom::Point;

/// Scalar basis values and gradients at one point.
pub(crate) struct ScalarVals {
    pub v: Vec<f64>,
    pub g: Vec<Point>,
}

impl ScalarVals {
    pub fn new(n: usize) -> ScalarVals {
        ScalarVals { v: vec![0.0; n], g: vec![[0.0; 3]; n] }
    }

    pub fn eval(&mut self, space: &Space, k: usize, xi: &Point) {
        space.eval_scalar(k, xi, &mut self.v, Some(&mut self.g));
    }
}

/// Vector basis values and divergences at one point.
pub(crate) struct VectorVals {
    pub v: Vec<Point>,
    pub div: Vec<f64>,
}

impl VectorVals {
    pub fn new(n: usize) -> VectorVals {
        VectorVals { v: vec![[0.0; 3]; n], div: vec![0.0; n] }
    }

    pub fn eval(&mut self, space: &Space, k: usize, xi: &Point) {
        space.eval_vector(k, xi, &mut self.v, &mut self.div);
    }
}

/// Dofs of the two owners of an interior face, plus-side first.
pub(crate) fn pair_dofs(space: &Space, plus: usize, minus: usize) -> Vec<usize> {
    let mut d = space.element_dofs(plus);
    d.extend(space.element_dofs(minus));
    d
}

/// Accumulates `w · a[i] · b[j]` into the row-major block.
#[inline]
pub(crate) fn add_outer(block: &mut [f64], a: &[f64], b: &[f64], w: f64) {
    let nb = b.len();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let s = w * ai;
        let row = &mut block[i * nb..(i + 1) * nb];
        for (r, &bj) in row.iter_mut().zip(b) {
            *r += s * bj;
        }
    }
}
