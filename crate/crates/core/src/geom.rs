//! Small fixed-size vector and matrix helpers. Points always carry three
//! coordinates; in two dimensions the third one is zero.

pub type Point = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO: Point = [0.0; 3];

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn mat_vec(m: &Mat3, v: &Point) -> Point {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// `mᵀ v`.
pub fn mat_t_vec(m: &Mat3, v: &Point) -> Point {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_scale(m: &Mat3, s: f64) -> Mat3 {
    let mut r = *m;
    for row in r.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    r
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut r = *a;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += b[i][j];
        }
    }
    r
}

/// Determinant of the leading `dim × dim` block.
pub fn det(m: &Mat3, dim: usize) -> f64 {
    match dim {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

/// Inverse of the leading `dim × dim` block; remaining entries are zero.
pub fn inverse(m: &Mat3, dim: usize) -> Mat3 {
    let d = det(m, dim);
    let mut r = [[0.0; 3]; 3];
    match dim {
        1 => r[0][0] = 1.0 / d,
        2 => {
            r[0][0] = m[1][1] / d;
            r[0][1] = -m[0][1] / d;
            r[1][0] = -m[1][0] / d;
            r[1][1] = m[0][0] / d;
        }
        _ => {
            r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
            r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
            r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
            r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
            r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
            r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
            r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
            r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
            r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
        }
    }
    r
}

/// Cholesky test for symmetric positive definiteness of the leading block.
/// Returns the smallest pivot, or `None` if the block is not symmetric.
pub fn spd_min_pivot(m: &Mat3, dim: usize) -> Option<f64> {
    for i in 0..dim {
        for j in 0..i {
            let s = m[i][j].abs().max(m[j][i].abs()).max(1.0);
            if (m[i][j] - m[j][i]).abs() > 1e-12 * s {
                return None;
            }
        }
    }
    let mut l = [[0.0; 3]; 3];
    let mut min_pivot = f64::INFINITY;
    for j in 0..dim {
        let mut d = m[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        min_pivot = min_pivot.min(d);
        if d <= 0.0 {
            return Some(d);
        }
        l[j][j] = d.sqrt();
        for i in j + 1..dim {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(min_pivot)
}
