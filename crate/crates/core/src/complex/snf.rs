//! Integer Smith normal form with the column transform, enough to read off
//! first homology and test membership in a relation lattice.

/// `diag` holds the nonzero invariant factors; `col_transform` is the
/// unimodular `V` with `U A V = D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<i64>,
    pub col_transform: Vec<Vec<i64>>,
    pub cols: usize,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn free_rank(&self) -> usize {
        self.cols - self.diag.len()
    }

    pub fn torsion(&self) -> Vec<i64> {
        self.diag.iter().copied().filter(|&d| d > 1).collect()
    }

    /// Whether the integer row vector lies in the row lattice of `A`.
    pub fn in_row_lattice(&self, x: &[i64]) -> bool {
        let n = self.cols;
        let y: Vec<i64> = (0..n).map(|j| (0..n).map(|i| x[i] * self.col_transform[i][j]).sum()).collect();
        y.iter().enumerate().all(|(k, &v)| match self.diag.get(k) {
            Some(&d) => v % d == 0,
            None => v == 0,
        })
    }
}

pub fn smith_normal_form(a: &[Vec<i64>], cols: usize) -> SmithForm {
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let rows = m.len();
    let mut v: Vec<Vec<i64>> = (0..cols).map(|i| (0..cols).map(|j| i64::from(i == j)).collect()).collect();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows && t < cols {
        // Pivot: smallest nonzero absolute value in the remaining block.
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| m[i][j] != 0)
            .min_by_key(|&(i, j)| m[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_euclid(m[t][t]);
                if q != 0 {
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    m.swap(t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    for i in t..rows {
                        m[i][j] -= q * m[i][t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                if m[t][j] != 0 {
                    swap_cols(&mut m, t, j);
                    swap_cols(&mut v, t, j);
                    clean = false;
                }
            }
            if clean {
                // Divisibility: fold any entry not divisible by the pivot
                // into the pivot row.
                let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % m[t][t] != 0));
                match bad {
                    Some(i) => {
                        for j in t..cols {
                            m[t][j] += m[i][j];
                        }
                    }
                    None => break,
                }
            }
        }
        if m[t][t] < 0 {
            for i in t..rows {
                m[i][t] = -m[i][t];
            }
            for row in v.iter_mut() {
                row[t] = -row[t];
            }
        }
        diag.push(m[t][t]);
        t += 1;
    }
    SmithForm { diag, col_transform: v, cols }
}

fn swap_cols(m: &mut [Vec<i64>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}
