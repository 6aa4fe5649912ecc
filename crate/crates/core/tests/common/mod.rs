//! Reference computations that avoid the crate's eigendecomposition path.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};

pub type CMat = DMatrix<Complex<f64>>;

pub fn eye(m: usize) -> CMat {
    CMat::identity(m, m)
}

pub fn inv(a: &CMat) -> CMat {
    a.clone()
        .try_inverse()
        .expect("oracle inverse of a singular matrix")
}

/// Principal square root by the Denman–Beavers iteration.
pub fn db_sqrt(a: &CMat) -> CMat {
    let mut y = a.clone();
    let mut z = eye(a.nrows());
    for _ in 0..100 {
        let y_next = (&y + inv(&z)) * Complex::new(0.5, 0.0);
        let z_next = (&z + inv(&y)) * Complex::new(0.5, 0.0);
        let step = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if step <= 1e-15 * y.norm() {
            break;
        }
    }
    herm(&y)
}

pub fn herm(a: &CMat) -> CMat {
    (a + a.adjoint()) * Complex::new(0.5, 0.0)
}

/// `A # B` from Denman–Beavers roots.
pub fn geo_mean(a: &CMat, b: &CMat) -> CMat {
    let ah = db_sqrt(a);
    let ahi = inv(&ah);
    herm(&(&ah * db_sqrt(&herm(&(&ahi * b * &ahi))) * &ah))
}

/// `‖X A⁻¹ X − B‖_F / ‖B‖_F`: the Riccati characterization of `A # B`.
pub fn riccati_defect(x: &CMat, a: &CMat, b: &CMat) -> f64 {
    (x * inv(a) * x - b).norm() / b.norm()
}

/// Lower Cholesky factor, or `None` when a pivot is not strictly positive.
pub fn cholesky(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex::new(d, 0.0);
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

/// `A + εI` is positive definite, with `ε = tol·max(1, ‖A‖_F)`.
pub fn psd_within(a: &CMat, tol: f64) -> bool {
    let shift = tol * a.norm().max(1.0);
    cholesky(&(herm(a) + eye(a.nrows()) * Complex::new(shift, 0.0))).is_some()
}

/// `A ≤ B` up to `tol·max(1, ‖A‖_F, ‖B‖_F)`.
pub fn loewner_oracle(a: &CMat, b: &CMat, tol: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    let d = b - a;
    cholesky(&(herm(&d) + eye(a.nrows()) * Complex::new(tol * scale, 0.0))).is_some()
}

/// `log det` from the Cholesky factor.
pub fn log_det(a: &CMat) -> f64 {
    let l = cholesky(&herm(a)).expect("oracle log det of a non-SPD matrix");
    2.0 * (0..a.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>()
}

/// `‖I − Σ wⱼ (Aⱼ # X⁻¹)‖_F` computed with Denman–Beavers geometric means.
pub fn wass_residual(x: &CMat, weights: &[f64], mats: &[CMat]) -> f64 {
    let xi = inv(x);
    let mut s = CMat::zeros(x.nrows(), x.ncols());
    for (w, a) in weights.iter().zip(mats) {
        s += geo_mean(a, &xi) * Complex::new(*w, 0.0);
    }
    (eye(x.nrows()) - s).norm()
}

/// `[tr((A+B)/2) − tr(A^{1/2} B A^{1/2})^{1/2}]^{1/2}` with Denman–Beavers roots.
pub fn bw_distance(a: &CMat, b: &CMat) -> f64 {
    let ah = db_sqrt(a);
    let t = (a.trace().re + b.trace().re) / 2.0 - db_sqrt(&herm(&(&ah * b * &ah))).trace().re;
    t.max(0.0).sqrt()
}

pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
