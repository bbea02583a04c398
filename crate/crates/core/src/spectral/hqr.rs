//! Eigenvalues of a dense real matrix: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then Francis double-shift QR on the
//! active window only (no Schur vectors are accumulated).
//!
//! Everything works in place on a row-major buffer so that both the row and
//! column updates of the reduction stream through contiguous memory.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iterations per eigenvalue before giving up; exceptional shifts are taken
/// at 10 and 20.
const MAX_ITS_PER_EIGENVALUE: usize = 30;

pub(crate) struct QrOutcome {
    pub eigenvalues: Vec<Complex64>,
}

/// Row-major square matrix view used by the solver.
struct Dense<'a> {
    n: usize,
    a: &'a mut [f64],
}

impl Dense<'_> {
    #[inline(always)]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline(always)]
    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.a[i * self.n..(i + 1) * self.n]
    }
}

/// Computes all eigenvalues of the `n`×`n` row-major matrix `a`, destroying it.
pub(crate) fn eigenvalues_in_place(a: &mut [f64], n: usize, max_sweeps: usize) -> Result<QrOutcome> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = Dense { n, a };
    if n == 0 {
        return Ok(QrOutcome {
            eigenvalues: Vec::new(),
        });
    }
    balance(&mut m);
    hessenberg(&mut m);
    hqr(&mut m, max_sweeps)
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Exact in floating point, so the spectrum is untouched.
fn balance(m: &mut Dense<'_>) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = m.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m.get(j, i).abs();
                    r += m.get(i, j).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for v in m.row_mut(i) {
                    *v *= g;
                }
                for j in 0..n {
                    let v = m.get(j, i) * f;
                    m.set(j, i, v);
                }
            }
        }
    }
}

/// Orthogonal reduction to upper Hessenberg form by Householder reflectors.
fn hessenberg(m: &mut Dense<'_>) {
    let n = m.n;
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let mut f = vec![0.0; n];
    for col in 1..n - 1 {
        let prev = col - 1;
        let scale: f64 = (col..n).map(|i| m.get(i, prev).abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in col..n {
            ort[i] = m.get(i, prev) / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[col] > 0.0 {
            g = -g;
        }
        h -= ort[col] * g;
        ort[col] -= g;

        // Left: rows col.., columns col.. ; f_j = (u^T A)_j / h.
        f[col..].iter_mut().for_each(|v| *v = 0.0);
        for i in col..n {
            let u = ort[i];
            if u == 0.0 {
                continue;
            }
            let row = &m.a[i * n + col..(i + 1) * n];
            for (fj, &aij) in f[col..].iter_mut().zip(row) {
                *fj += u * aij;
            }
        }
        let inv_h = 1.0 / h;
        for i in col..n {
            let u = ort[i] * inv_h;
            if u == 0.0 {
                continue;
            }
            let row = &mut m.a[i * n + col..(i + 1) * n];
            for (aij, &fj) in row.iter_mut().zip(&f[col..]) {
                *aij -= u * fj;
            }
        }

        // Right: all rows, columns col.. .
        let u = &ort[col..];
        for i in 0..n {
            let row = &mut m.a[i * n + col..(i + 1) * n];
            let dot: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            let s = dot * inv_h;
            for (aij, &uj) in row.iter_mut().zip(u) {
                *aij -= s * uj;
            }
        }

        m.set(col, prev, scale * g);
        for i in col + 1..n {
            m.set(i, prev, 0.0);
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr(m: &mut Dense<'_>, max_sweeps: usize) -> Result<QrOutcome> {
    let n = m.n;
    let eps = f64::EPSILON;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += m.get(i, j).abs();
        }
    }

    let mut sweeps = 0usize;
    let mut t = 0.0;
    // `nn` is one past the last active row; eigenvalues below it are final.
    let mut nn = n;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let hi = nn - 1;
            // Look for a single small subdiagonal element.
            let mut l = hi;
            while l >= 1 {
                let mut s = m.get(l - 1, l - 1).abs() + m.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if m.get(l, l - 1).abs() <= eps * s {
                    m.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = m.get(hi, hi);
            if l == hi {
                wr[hi] = x + t;
                wi[hi] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = m.get(hi - 1, hi - 1);
            let mut w = m.get(hi, hi - 1) * m.get(hi - 1, hi);
            if l + 1 == hi {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[hi - 1] = x + z;
                    wr[hi] = x + z;
                    if z != 0.0 {
                        wr[hi] = x - w / z;
                    }
                    wi[hi - 1] = 0.0;
                    wi[hi] = 0.0;
                } else {
                    wr[hi - 1] = x + p;
                    wr[hi] = x + p;
                    wi[hi - 1] = z;
                    wi[hi] = -z;
                }
                nn -= 2;
                break;
            }

            if its == MAX_ITS_PER_EIGENVALUE || sweeps >= max_sweeps {
                let residual = m.get(hi, hi - 1).abs() / anorm.max(f64::MIN_POSITIVE);
                return Err(Error::NoConvergence {
                    sweeps,
                    remaining: nn,
                    residual,
                });
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..nn {
                    let v = m.get(i, i) - x;
                    m.set(i, i, v);
                }
                let s = m.get(hi, hi - 1).abs() + m.get(hi - 1, hi - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut mm = hi - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = m.get(mm, mm);
                let r0 = x - z;
                let s0 = y - z;
                p = (r0 * s0 - w) / m.get(mm + 1, mm) + m.get(mm, mm + 1);
                q = m.get(mm + 1, mm + 1) - z - r0 - s0;
                r = m.get(mm + 2, mm + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = m.get(mm, mm - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (m.get(mm - 1, mm - 1).abs() + z.abs() + m.get(mm + 1, mm + 1).abs());
                if u <= eps * v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=hi {
                m.set(i, i - 2, 0.0);
                if i != mm + 2 {
                    m.set(i, i - 3, 0.0);
                }
            }

            // Double-shift QR step on rows/columns l..=hi.
            let mut k = mm;
            while k < hi {
                let mut xk = 0.0;
                if k != mm {
                    p = m.get(k, k - 1);
                    q = m.get(k + 1, k - 1);
                    r = if k + 1 != hi { m.get(k + 2, k - 1) } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == mm {
                        if l != mm {
                            let v = -m.get(k, k - 1);
                            m.set(k, k - 1, v);
                        }
                    } else {
                        m.set(k, k - 1, -s * xk);
                    }
                    p += s;
                    let xs = p / s;
                    let ys = q / s;
                    let zs = r / s;
                    q /= p;
                    r /= p;
                    let three = k + 1 != hi;
                    // Row modification.
                    let nc = m.n;
                    {
                        let (head, tail) = m.a.split_at_mut((k + 1) * nc);
                        let rk = &mut head[k * nc + k..k * nc + nn];
                        let (r1, r2) = tail.split_at_mut(nc);
                        let rk1 = &mut r1[k..nn];
                        if three {
                            let rk2 = &mut r2[k..nn];
                            for ((a0, a1), a2) in rk.iter_mut().zip(rk1.iter_mut()).zip(rk2.iter_mut()) {
                                let pp = *a0 + q * *a1 + r * *a2;
                                *a2 -= pp * zs;
                                *a1 -= pp * ys;
                                *a0 -= pp * xs;
                            }
                        } else {
                            for (a0, a1) in rk.iter_mut().zip(rk1.iter_mut()) {
                                let pp = *a0 + q * *a1;
                                *a1 -= pp * ys;
                                *a0 -= pp * xs;
                            }
                        }
                    }
                    // Column modification.
                    let imax = hi.min(k + 3);
                    for i in l..=imax {
                        let base = i * nc + k;
                        let row = &mut m.a[base..base + if three { 3 } else { 2 }];
                        let mut pp = xs * row[0] + ys * row[1];
                        if three {
                            pp += zs * row[2];
                            row[2] -= pp * r;
                        }
                        row[1] -= pp * q;
                        row[0] -= pp;
                    }
                }
                k += 1;
            }
        }
    }

    let eigenvalues = wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect();
    Ok(QrOutcome { eigenvalues })
}
