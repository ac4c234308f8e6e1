//! Independent oracles shared by the integration suites. These deliberately
//! use different algorithms from the library: hull distances come from
//! exhaustive affine-subset projection, F statistics from longhand sums of
//! squares, and tail probabilities from adaptive Simpson quadrature.

#![allow(dead_code)]

use hpf_core::geometry::Point3;

/// Exact closest-hull-point distance by Caratheodory subset enumeration:
/// for every subset of up to four generators, project the query onto the
/// subset's affine hull and keep the projection when its barycentric
/// coordinates are feasible. The optimal face always shows up as one of
/// these subsets, so the minimum over feasible projections is exact up to
/// linear-algebra roundoff.
pub fn hull_distance_oracle(q: Point3, pts: &[Point3]) -> f64 {
    let n = pts.len();
    assert!(n >= 1);
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > 4 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if let Some(d) = affine_projection_distance(q, pts, &idx) {
            best = best.min(d);
        }
    }
    best
}

/// Distance from `q` to the projection onto aff(pts[idx]) when that
/// projection has nonnegative barycentric coordinates; `None` when the
/// subset is affinely dependent or the projection falls outside its
/// simplex (a smaller subset covers those cases).
fn affine_projection_distance(q: Point3, pts: &[Point3], idx: &[usize]) -> Option<f64> {
    let k = idx.len();
    let base = pts[idx[k - 1]];
    if k == 1 {
        return Some(q.distance(base));
    }
    let m = k - 1; // unknowns after eliminating the affine constraint
    let cols: Vec<[f64; 3]> = idx[..m]
        .iter()
        .map(|&i| {
            let d = pts[i] - base;
            [d.x, d.y, d.z]
        })
        .collect();
    let rhs3 = {
        let d = q - base;
        [d.x, d.y, d.z]
    };

    // Normal equations (A^T A) mu = A^T (q - base), at most 3x3.
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for r in 0..m {
        for c in 0..m {
            a[r][c] = dot3(&cols[r], &cols[c]);
        }
        b[r] = dot3(&cols[r], &rhs3);
    }
    let mu = solve_spd(&mut a, &mut b, m)?;

    let mut lambda_last = 1.0;
    for &w in mu.iter().take(m) {
        lambda_last -= w;
    }
    if mu[..m].iter().any(|&w| w < -1e-9) || lambda_last < -1e-9 {
        return None;
    }

    let mut x = [base.x, base.y, base.z];
    for r in 0..m {
        for c in 0..3 {
            x[c] += mu[r] * cols[r][c];
        }
    }
    let dx = [q.x - x[0], q.y - x[1], q.z - x[2]];
    Some(dot3(&dx, &dx).sqrt())
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Gaussian elimination with partial pivoting on an m x m system stored in
/// 3x3 buffers. Returns `None` for (near-)singular systems.
fn solve_spd(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], m: usize) -> Option<[f64; 3]> {
    let scale: f64 = (0..m)
        .map(|r| a[r][r].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..m).rev() {
        let mut s = b[col];
        for c in col + 1..m {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Longhand one-way ANOVA F via explicit deviations from group and grand
/// means (two-pass; no shortcut identities shared with the library).
/// Returns (f, df_between, df_within).
pub fn anova_f_oracle(groups: &[Vec<f64>]) -> (f64, usize, usize) {
    let k = groups.len();
    let n_total: usize = groups.iter().map(|g| g.len()).sum();
    let grand: f64 = groups.iter().flatten().sum::<f64>() / n_total as f64;

    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let gm: f64 = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (gm - grand).powi(2);
        for &x in g {
            ss_within += (x - gm).powi(2);
        }
    }
    let df_b = k - 1;
    let df_w = n_total - k;
    let f = (ss_between / df_b as f64) / (ss_within / df_w as f64);
    (f, df_b, df_w)
}

/// F-distribution upper tail by numeric quadrature of the beta density.
///
/// P(F > f) = I_y(d2/2, d1/2) with y = d2 / (d2 + d1 f). The integral runs
/// over whichever tail keeps the upper limit away from 1, and the
/// substitution t = u^2 removes the power singularity at the origin, so
/// adaptive Simpson sees a smooth integrand throughout.
pub fn f_upper_tail_oracle(f: f64, d1: usize, d2: usize) -> f64 {
    assert!(f >= 0.0 && d1 >= 1 && d2 >= 1);
    let a = d2 as f64 / 2.0; // shape attached to the integration variable
    let b = d1 as f64 / 2.0;
    let y = d2 as f64 / (d2 as f64 + d1 as f64 * f);
    let ln_beta = ln_beta_oracle(a, b);
    if y <= 0.9 {
        incomplete_beta_sub(y, a, b, ln_beta)
    } else {
        1.0 - incomplete_beta_sub(1.0 - y, b, a, ln_beta)
    }
}

/// I_z(a, b) via t = u^2: integral of 2 u^(2a-1) (1-u^2)^(b-1) du on
/// [0, sqrt(z)], normalized by B(a, b). Requires z bounded away from 1.
fn incomplete_beta_sub(z: f64, a: f64, b: f64, ln_beta: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let g = |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (1.0 - u * u).powf(b - 1.0);
    let raw = adaptive_simpson(&g, 0.0, z.sqrt(), 1e-13, 60);
    raw * (-ln_beta).exp()
}

/// ln B(a, b) from the split-and-substitute form: both halves integrate a
/// smooth function on [0, sqrt(1/2)].
fn ln_beta_oracle(a: f64, b: f64) -> f64 {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let g1 = |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (1.0 - u * u).powf(b - 1.0);
    let g2 = |u: f64| 2.0 * u.powf(2.0 * b - 1.0) * (1.0 - u * u).powf(a - 1.0);
    let total = adaptive_simpson(&g1, 0.0, half, 1e-13, 60)
        + adaptive_simpson(&g2, 0.0, half, 1e-13, 60);
    total.ln()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1)
            + simpson_recurse(f, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1)
    }
}
