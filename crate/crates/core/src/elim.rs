//! Allocation-free elimination check used on the hot path of the search.
//!
//! Same pivot rule and parameter order as [`crate::nicg::reduce`] and
//! [`crate::nicg::for_each_solution`]; additionally a partial assignment is
//! dropped as soon as some pivot variable is forced out of its range by interval
//! arithmetic over the still unassigned parameters.

const COEF_LIMIT: i64 = 1 << 40;
const SHRINK_ABOVE: i64 = 1 << 16;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reusable buffers for [`GaussScratch::is_nicg`].
#[derive(Default, Debug, Clone)]
pub(crate) struct GaussScratch {
    a: Vec<i64>,
    b: Vec<i64>,
    pivots: Vec<usize>,
    is_pivot: Vec<bool>,
    free: Vec<usize>,
    col_ub: Vec<i64>,
    denom: Vec<i64>,
    piv_ub: Vec<i64>,
    coef: Vec<i64>,
    pos_rest: Vec<i64>,
    neg_rest: Vec<i64>,
    partial: Vec<i64>,
    values: Vec<i64>,
}

impl GaussScratch {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// NICG test on the columns `masks` in dimension `dim`.
    /// `None` if intermediate values leave the safe integer range.
    pub(crate) fn is_nicg(&mut self, dim: usize, masks: &[u32]) -> Option<bool> {
        let n = masks.len();
        if n <= 1 {
            return Some(true);
        }
        let width = n + 1;
        self.a.clear();
        self.b.clear();
        for r in 0..dim {
            let mut s = 0;
            for &m in masks {
                let e = i64::from((m >> r) & 1);
                self.a.push(e);
                s += e;
            }
            self.a.push(s);
            self.b.push(s);
        }
        self.col_ub.clear();
        for &m in masks {
            let ub = (0..dim)
                .filter(|&r| (m >> r) & 1 == 1)
                .map(|r| self.b[r])
                .min()
                .unwrap_or(n as i64);
            self.col_ub.push(ub);
        }

        let a = &mut self.a;
        self.pivots.clear();
        let mut rank = 0;
        for col in 0..n {
            if rank == dim {
                break;
            }
            let Some(p) = (rank..dim).find(|&r| a[r * width + col] != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..width {
                    a.swap(p * width + k, rank * width + k);
                }
            }
            let pv = a[rank * width + col];
            for r in 0..dim {
                if r == rank {
                    continue;
                }
                let f = a[r * width + col];
                if f == 0 {
                    continue;
                }
                let mut big = 0;
                for k in 0..width {
                    let v = a[r * width + k]
                        .checked_mul(pv)?
                        .checked_sub(f.checked_mul(a[rank * width + k])?)?;
                    a[r * width + k] = v;
                    big = big.max(v.abs());
                }
                // a common factor never changes the solution set; only strip it
                // once entries start to grow
                if big > SHRINK_ABOVE {
                    let g = a[r * width..(r + 1) * width].iter().fold(0, |g, &v| gcd(g, v));
                    if g > 1 {
                        for k in 0..width {
                            a[r * width + k] /= g;
                        }
                    }
                }
            }
            self.pivots.push(col);
            rank += 1;
        }

        self.is_pivot.clear();
        self.is_pivot.resize(n, false);
        for &c in &self.pivots {
            self.is_pivot[c] = true;
        }
        self.free.clear();
        self.free.extend((0..n).filter(|&c| !self.is_pivot[c]));
        let nf = self.free.len();
        if nf == 0 {
            // unique rational solution, which is the all-ones vector
            return Some(true);
        }

        self.denom.clear();
        self.piv_ub.clear();
        self.coef.clear();
        self.partial.clear();
        self.partial.resize((nf + 1) * rank, 0);
        for (r, &pc) in self.pivots.iter().enumerate() {
            let row = &a[r * width..(r + 1) * width];
            let sign = if row[pc] < 0 { -1 } else { 1 };
            self.denom.push(sign * row[pc]);
            self.piv_ub.push(self.col_ub[pc]);
            self.partial[r] = sign * row[n];
            for &j in &self.free {
                let c = sign * row[j];
                if c.abs() > COEF_LIMIT {
                    return None;
                }
                self.coef.push(c);
            }
            if row[n].abs() > COEF_LIMIT || row[pc].abs() > COEF_LIMIT {
                return None;
            }
        }
        // suffix sums of the reachable range of Σ c_j λ_j over parameters k..
        self.pos_rest.clear();
        self.pos_rest.resize((nf + 1) * rank, 0);
        self.neg_rest.clear();
        self.neg_rest.resize((nf + 1) * rank, 0);
        for r in 0..rank {
            for k in (0..nf).rev() {
                let c = self.coef[r * nf + k];
                let ub = self.col_ub[self.free[k]];
                self.pos_rest[k * rank + r] = self.pos_rest[(k + 1) * rank + r] + (c.max(0) * ub);
                self.neg_rest[k * rank + r] = self.neg_rest[(k + 1) * rank + r] + (c.min(0) * ub);
            }
        }
        self.values.clear();
        self.values.resize(nf, 0);
        Some(!self.zero_entry_solution(0, rank, nf))
    }

    fn feasible(&self, k: usize, rank: usize, nf: usize) -> bool {
        let base = k * rank;
        for r in 0..rank {
            let p = self.partial[base + r];
            if p - self.neg_rest[base + r] < 0 {
                return false;
            }
            if p - self.pos_rest[base + r] > self.denom[r] * self.piv_ub[r] {
                return false;
            }
            if k == nf && p % self.denom[r] != 0 {
                return false;
            }
        }
        true
    }

    /// True if some nonnegative integer solution extending the first `k`
    /// parameters has a zero entry.
    fn zero_entry_solution(&mut self, k: usize, rank: usize, nf: usize) -> bool {
        if !self.feasible(k, rank, nf) {
            return false;
        }
        if k == nf {
            if self.values.contains(&0) {
                return true;
            }
            let base = nf * rank;
            return (0..rank).any(|r| self.partial[base + r] == 0);
        }
        let ub = self.col_ub[self.free[k]];
        for v in 0..=ub {
            self.values[k] = v;
            for r in 0..rank {
                self.partial[(k + 1) * rank + r] =
                    self.partial[k * rank + r] - self.coef[r * nf + k] * v;
            }
            if self.zero_entry_solution(k + 1, rank, nf) {
                return true;
            }
        }
        false
    }
}
