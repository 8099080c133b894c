//! Small complex linear algebra: dense LU with partial pivoting, 2x2
//! matrices, polynomial roots by Durand-Kerner, and a 2-d Nelder-Mead.

use num_complex::Complex64;

pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dense complex matrix in row-major storage.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] += v;
    }
}

/// LU factorization with partial pivoting, kept packed in `lu`.
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
    /// Magnitude ratio of the extreme U diagonal entries; a cheap
    /// condition-number proxy.
    pub cond_estimate: f64,
    pub det: Complex64,
}

impl LuFactors {
    pub fn factor(mut m: CMatrix) -> Option<LuFactors> {
        let n = m.n;
        let mut piv = vec![0usize; n];
        let mut det = ONE;
        let mut dmax: f64 = 0.0;
        let mut dmin = f64::INFINITY;
        for col in 0..n {
            // pivot search
            let mut best = col;
            let mut best_mag = m.at(col, col).norm_sqr();
            for r in col + 1..n {
                let mag = m.at(r, col).norm_sqr();
                if mag > best_mag {
                    best_mag = mag;
                    best = r;
                }
            }
            piv[col] = best;
            if best != col {
                for j in 0..n {
                    let a = m.at(col, j);
                    let b = m.at(best, j);
                    m.set(col, j, b);
                    m.set(best, j, a);
                }
                det = -det;
            }
            let p = m.at(col, col);
            if p == ZERO {
                return None;
            }
            det *= p;
            dmax = dmax.max(p.norm());
            dmin = dmin.min(p.norm());
            let pinv = p.finv();
            for r in col + 1..n {
                let f = m.at(r, col) * pinv;
                m.set(r, col, f);
                if f != ZERO {
                    for j in col + 1..n {
                        let v = m.at(col, j);
                        m.add_at(r, j, -f * v);
                    }
                }
            }
        }
        Some(LuFactors {
            n,
            lu: m.data,
            piv,
            cond_estimate: if dmin > 0.0 { dmax / dmin } else { f64::INFINITY },
            det,
        })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for col in 0..n {
            x.swap(col, self.piv[col]);
            let xc = x[col];
            if xc != ZERO {
                for r in col + 1..n {
                    x[r] -= self.lu[r * n + col] * xc;
                }
            }
        }
        for col in (0..n).rev() {
            x[col] /= self.lu[col * n + col];
            let xc = x[col];
            if xc != ZERO {
                for r in 0..col {
                    x[r] -= self.lu[r * n + col] * xc;
                }
            }
        }
        x
    }
}

/// Determinant of a small dense matrix (consumes a copy).
pub fn det(m: CMatrix) -> Complex64 {
    match LuFactors::factor(m) {
        Some(f) => f.det,
        None => ZERO,
    }
}

/// 2x2 complex matrix, used throughout the RH machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2 { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut r = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        Mat2 { m: r }
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn inv(&self) -> Mat2 {
        let d = self.det().finv();
        Mat2 {
            m: [
                [self.m[1][1] * d, -self.m[0][1] * d],
                [-self.m[1][0] * d, self.m[0][0] * d],
            ],
        }
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] *= s;
            }
        }
        r
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] -= o.m[i][j];
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> [Complex64; 2] {
        [self.m[0][j], self.m[1][j]]
    }
}

/// All roots of a polynomial c[0] + c[1] z + ... + c[d] z^d by the
/// Durand-Kerner iteration. Leading coefficient must be nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return vec![];
    }
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = ZERO;
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    // Spread starting guesses on a circle avoiding symmetry lock-in.
    let radius = 1.0
        + monic[..d]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius.min(2.0 + 0.3 * j as f64), th)
        })
        .collect();
    for _ in 0..200 {
        let mut moved: f64 = 0.0;
        for j in 0..d {
            let mut denom = ONE;
            for l in 0..d {
                if l != j {
                    denom *= z[j] - z[l];
                }
            }
            let step = eval(z[j]) / denom;
            z[j] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-13 {
            break;
        }
    }
    z
}

/// Nelder-Mead minimization of f over R^2.
pub fn nelder_mead_2d(
    f: impl Fn(f64, f64) -> f64,
    start: (f64, f64),
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> ((f64, f64), f64) {
    let mut pts = [
        (start.0, start.1),
        (start.0 + scale, start.1),
        (start.0, start.1 + scale),
    ];
    let mut vals = [f(pts[0].0, pts[0].1), f(pts[1].0, pts[1].1), f(pts[2].0, pts[2].1)];
    for _ in 0..max_iter {
        // order best..worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        let spread = (pts[b].0 - pts[w].0).hypot(pts[b].1 - pts[w].1);
        if spread < tol && (vals[w] - vals[b]).abs() < tol * (1.0 + vals[b].abs()) {
            return (pts[b], vals[b]);
        }
        let cx = (pts[b].0 + pts[m].0) / 2.0;
        let cy = (pts[b].1 + pts[m].1) / 2.0;
        let refl = (2.0 * cx - pts[w].0, 2.0 * cy - pts[w].1);
        let fr = f(refl.0, refl.1);
        if fr < vals[b] {
            let exp = (3.0 * cx - 2.0 * pts[w].0, 3.0 * cy - 2.0 * pts[w].1);
            let fe = f(exp.0, exp.1);
            if fe < fr {
                pts[w] = exp;
                vals[w] = fe;
            } else {
                pts[w] = refl;
                vals[w] = fr;
            }
        } else if fr < vals[m] {
            pts[w] = refl;
            vals[w] = fr;
        } else {
            let con = ((cx + pts[w].0) / 2.0, (cy + pts[w].1) / 2.0);
            let fc = f(con.0, con.1);
            if fc < vals[w] {
                pts[w] = con;
                vals[w] = fc;
            } else {
                for j in [m, w] {
                    pts[j] = ((pts[j].0 + pts[b].0) / 2.0, (pts[j].1 + pts[b].1) / 2.0);
                    vals[j] = f(pts[j].0, pts[j].1);
                }
            }
        }
    }
    let mut best = 0;
    for j in 1..3 {
        if vals[j] < vals[best] {
            best = j;
        }
    }
    (pts[best], vals[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let mut m = CMatrix::zeros(3);
        let entries = [
            [2.0, 1.0, 0.5],
            [0.1, 3.0, -1.0],
            [1.0, -0.2, 4.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, Complex64::new(entries[i][j], 0.3 * (i as f64 - j as f64)));
            }
        }
        let x_true = [Complex64::new(1.0, -2.0),
            Complex64::new(0.5, 0.5),
            Complex64::new(-1.0, 0.1)];
        let mut b = vec![ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += m.at(i, j) * x_true[j];
            }
        }
        let f = LuFactors::factor(m).unwrap();
        let x = f.solve(&b);
        for j in 0..3 {
            assert!((x[j] - x_true[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_of_cubic() {
        // (z-1)(z-2i)(z+3) = z^3 + (2 - 2i) z^2 + (-3 - 4i) z + 6i... expand numerically instead:
        let r = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-3.0, 0.0),
        ];
        let mut c = vec![ONE];
        for root in r {
            let mut next = vec![ZERO; c.len() + 1];
            for (j, cj) in c.iter().enumerate() {
                next[j + 1] += *cj;
                next[j] -= *cj * root;
            }
            c = next;
        }
        let found = polynomial_roots(&c);
        for root in r {
            let best = found.iter().map(|z| (z - root).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "missing root {root}");
        }
    }

    #[test]
    fn nelder_mead_finds_minimum() {
        let f = |x: f64, y: f64| (x - 0.3).powi(2) + 2.0 * (y + 0.7).powi(2);
        let ((x, y), v) = nelder_mead_2d(f, (1.0, 1.0), 0.5, 1e-12, 500);
        assert!((x - 0.3).abs() < 1e-6 && (y + 0.7).abs() < 1e-6, "({x},{y}) v={v}");
    }
}
