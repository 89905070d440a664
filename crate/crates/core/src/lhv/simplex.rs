//! Phase-one simplex for `A w = b, w >= 0`.
//!
//! Dense tableau with Bland's rule; the problem sizes here are a few hundred
//! columns at most. On infeasibility the phase-one dual `y` is returned: it
//! satisfies `y·A_j <= 0` for every column and `y·b` = the minimal L1 residual.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Feasibility {
    Feasible { w: Vec<f64>, residual_l1: f64 },
    Infeasible { dual: Vec<f64>, residual_l1: f64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-11,
            feasibility_tol: 1e-9,
            max_iterations: 200_000,
        }
    }
}

/// `columns[j]` is column `j` of `A`, each of length `b.len()`.
pub(crate) fn phase_one(
    columns: &[Vec<f64>],
    b: &[f64],
    opts: SimplexOptions,
) -> Result<Feasibility, String> {
    let m = b.len();
    let n = columns.len();
    if columns.iter().any(|c| c.len() != m) {
        return Err("column length differs from right-hand side".into());
    }
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![0.0; (m + 1) * width];
    let sign: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        for (j, col) in columns.iter().enumerate() {
            row[j] = sign[i] * col[i];
        }
        row[n + i] = 1.0;
        row[rhs] = sign[i] * b[i];
    }
    // reduced costs of "minimise sum of artificials" with the artificial basis
    for j in 0..n {
        t[m * width + j] = -(0..m).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[m * width + rhs] = -(0..m).map(|i| t[i * width + rhs]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut iterations = 0;
    loop {
        let obj = &t[m * width..(m + 1) * width];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -opts.pivot_tol) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > opts.pivot_tol {
                let ratio = t[i * width + rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            // cannot happen for a bounded phase-one problem
            return Err("phase-one problem reported unbounded".into());
        };
        pivot(&mut t, width, m + 1, r, enter);
        basis[r] = enter;
        iterations += 1;
        if iterations > opts.max_iterations {
            return Err(format!(
                "no convergence after {} pivots",
                opts.max_iterations
            ));
        }
    }

    let residual_l1 = -t[m * width + rhs];
    if !residual_l1.is_finite() {
        return Err("non-finite objective".into());
    }
    if residual_l1 <= opts.feasibility_tol {
        let mut w = vec![0.0; n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                w[bj] = t[i * width + rhs].max(0.0);
            }
        }
        Ok(Feasibility::Feasible {
            w,
            residual_l1: residual_l1.max(0.0),
        })
    } else {
        // y_i = c_art - reduced cost of artificial i, undone for flipped rows
        let dual = (0..m)
            .map(|i| sign[i] * (1.0 - t[m * width + n + i]))
            .collect();
        Ok(Feasibility::Infeasible { dual, residual_l1 })
    }
}

fn pivot(t: &mut [f64], width: usize, rows: usize, r: usize, c: usize) {
    let p = t[r * width + c];
    for v in &mut t[r * width..(r + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
    for i in 0..rows {
        if i == r {
            continue;
        }
        let f = t[i * width + c];
        if f != 0.0 {
            for (v, pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            t[i * width + c] = 0.0;
        }
    }
}
