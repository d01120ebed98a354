//! Inner kernels: the S3 tables, bilinear contractions and a complex GEMM.

use num_complex::Complex64 as C64;

use crate::contours::ContourGrid;
use crate::wiener_hopf::map_collect;

/// S3_h[j, k] = sum_m f_m / (xi_k - eta_j - eta'_m) and
/// R_h[j] = sum_m f_m / (eta_j + eta'_m), with f_m = der'_m e^{-i h eta'_m} S1_m.
#[derive(Clone, Debug)]
pub struct S3Set {
    pub hs: Vec<f64>,
    pub s3: Vec<Vec<C64>>,
    pub r: Vec<Vec<C64>>,
}

impl S3Set {
    pub fn build(eta: &ContourGrid, xi: &ContourGrid, etap: &ContourGrid, s1: &[C64], hs: &[f64]) -> Self {
        let nm = etap.len();
        let nk = xi.len();
        let er: Vec<f64> = etap.points.iter().map(|z| z.re).collect();
        let ei: Vec<f64> = etap.points.iter().map(|z| z.im).collect();
        let f: Vec<Vec<C64>> = hs
            .iter()
            .map(|&h| {
                (0..nm)
                    .map(|m| etap.der[m] * (C64::new(0.0, -h) * etap.points[m]).exp() * s1[m])
                    .collect()
            })
            .collect();
        let fr: Vec<Vec<f64>> = f.iter().map(|v| v.iter().map(|z| z.re).collect()).collect();
        let fi: Vec<Vec<f64>> = f.iter().map(|v| v.iter().map(|z| z.im).collect()).collect();
        let nh = hs.len();
        let rows: Vec<usize> = (0..eta.len()).collect();
        let per_row: Vec<Vec<Vec<C64>>> = map_collect(&rows, |&j| {
            let ej = eta.points[j];
            let mut wr = vec![0.0; nm];
            let mut wi = vec![0.0; nm];
            let mut out = vec![vec![C64::new(0.0, 0.0); nk]; nh];
            for k in 0..nk {
                let c = xi.points[k] - ej;
                for m in 0..nm {
                    let dr = c.re - er[m];
                    let di = c.im - ei[m];
                    let inv = 1.0 / (dr * dr + di * di);
                    wr[m] = dr * inv;
                    wi[m] = -di * inv;
                }
                for h in 0..nh {
                    let (a, b) = (&fr[h], &fi[h]);
                    let mut sr = 0.0;
                    let mut si = 0.0;
                    for m in 0..nm {
                        sr += a[m] * wr[m] - b[m] * wi[m];
                        si += a[m] * wi[m] + b[m] * wr[m];
                    }
                    out[h][k] = C64::new(sr, si);
                }
            }
            out
        });
        let mut s3 = vec![Vec::with_capacity(eta.len() * nk); nh];
        for row in per_row {
            for (dst, src) in s3.iter_mut().zip(row) {
                dst.extend(src);
            }
        }
        let r = f
            .iter()
            .map(|fh| {
                eta.points
                    .iter()
                    .map(|&ej| fh.iter().zip(&etap.points).map(|(fm, em)| fm / (ej + em)).sum())
                    .collect()
            })
            .collect();
        Self {
            hs: hs.to_vec(),
            s3,
            r,
        }
    }

    pub fn index(&self, h: f64) -> usize {
        self.hs
            .iter()
            .position(|&x| x == h)
            .expect("S3 table requested for an h that was not prepared")
    }
}

/// sum_j u_j sum_k s[j,k] (t[j,k] + r_j) v_k.
pub fn contract(s: &[C64], t: &[C64], r: Option<&[C64]>, u: &[C64], v: &[C64]) -> C64 {
    let nk = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for (j, uj) in u.iter().enumerate() {
        let srow = &s[j * nk..(j + 1) * nk];
        let trow = &t[j * nk..(j + 1) * nk];
        let rj = r.map_or(C64::new(0.0, 0.0), |r| r[j]);
        let mut row = C64::new(0.0, 0.0);
        for k in 0..nk {
            row += srow[k] * (trow[k] + rj) * v[k];
        }
        acc += uj * row;
    }
    acc
}

/// sum_j u_j sum_k s[j,k] v_k.
pub fn bilinear(s: &[C64], u: &[C64], v: &[C64]) -> C64 {
    let nk = v.len();
    u.iter()
        .enumerate()
        .map(|(j, uj)| {
            let row: C64 = s[j * nk..(j + 1) * nk].iter().zip(v).map(|(a, b)| a * b).sum();
            uj * row
        })
        .sum()
}

/// c = a b for row-major a (m x k) and b (k x n).
pub fn zgemm(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![C64::new(0.0, 0.0); m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2];
    // the slices have the asserted sizes and the strides describe them.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: Vec<C64>) -> ContourGrid {
        let der = vec![C64::new(1.0, 0.0); points.len()];
        ContourGrid { points, der, zeta: 1.0 }
    }

    #[test]
    fn s3_matches_direct_sum() {
        let eta = grid(vec![C64::new(-1.0, -0.5), C64::new(0.5, -0.3)]);
        let xi = grid(vec![C64::new(0.2, 0.4), C64::new(1.5, 0.7), C64::new(-2.0, 0.9)]);
        let etap = grid(vec![C64::new(0.1, -0.2), C64::new(-0.7, -0.9), C64::new(3.0, -1.0)]);
        let s1 = vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.3, -0.3)];
        let set = S3Set::build(&eta, &xi, &etap, &s1, &[0.0, 0.3]);
        let h = 0.3;
        let t = &set.s3[set.index(h)];
        for j in 0..2 {
            for k in 0..3 {
                let d: C64 = (0..3)
                    .map(|m| {
                        (C64::new(0.0, -h) * etap.points[m]).exp() * s1[m]
                            / (xi.points[k] - eta.points[j] - etap.points[m])
                    })
                    .sum();
                assert!((t[j * 3 + k] - d).norm() < 1e-14);
            }
            let rd: C64 = (0..3)
                .map(|m| (C64::new(0.0, -h) * etap.points[m]).exp() * s1[m] / (eta.points[j] + etap.points[m]))
                .sum();
            assert!((set.r[1][j] - rd).norm() < 1e-14);
        }
    }

    #[test]
    fn zgemm_small() {
        let a = vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.0, -1.0), C64::new(1.0, 0.5)];
        let b = vec![C64::new(0.5, 0.0), C64::new(0.0, 2.0)];
        let c = zgemm(&a, &b, 2, 2, 1);
        assert!((c[0] - (a[0] * b[0] + a[1] * b[1])).norm() < 1e-15);
        assert!((c[1] - (a[2] * b[0] + a[3] * b[1])).norm() < 1e-15);
    }

    #[test]
    fn contract_reduces_to_bilinear() {
        let s = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(2.0, 0.0), C64::new(1.0, -1.0)];
        let zero = vec![C64::new(0.0, 0.0); 4];
        let one = vec![C64::new(1.0, 0.0); 2];
        let u = vec![C64::new(0.3, 0.0), C64::new(0.0, 0.7)];
        let v = vec![C64::new(1.0, 2.0), C64::new(-1.0, 0.0)];
        let a = contract(&s, &zero, Some(&one), &u, &v);
        assert!((a - bilinear(&s, &u, &v)).norm() < 1e-15);
    }
}
