//! Exact linear programs over `{x ≥ 0, Gx ≥ h}` solved by enumerating basic
//! solutions.
//!
//! The full constraint matrix is `[G; I]` with right-hand side `[h; 0]`. A basis
//! is a set of `n` of its rows. Choosing `k` rows `R` of `G` forces the `n − k`
//! identity rows, which pin the variables outside some column set `F` (`|F| = k`)
//! to zero, so the basic solution solves `G[R, F] x_F = h_R`. Bases are reported
//! as sorted row indices into `[G; I]`, identity rows numbered after the rows of
//! `G`.

use std::cmp::Ordering;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::rational::{dot, is_nonnegative, BigRational, RatMatrix, RatVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub value: BigRational,
    pub point: RatVector,
    pub basis: Vec<usize>,
}

/// `C(m + n, n)`, the number of candidate bases of an `m`-row, `n`-column
/// system with nonnegativity rows appended. Saturates at `u128::MAX`.
pub fn basis_count(m: usize, n: usize) -> u128 {
    let (total, k) = ((m + n) as u128, n.min(m) as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(total - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `visit(basis, x)` for every nonsingular basis whose basic solution is
/// nonnegative. Feasibility against `G` is left to the caller.
pub fn for_each_nonnegative_basic_solution<V>(g: &RatMatrix, h: &[BigRational], mut visit: V)
where
    V: FnMut(&[usize], &[BigRational]),
{
    let (m, n) = (g.rows(), g.cols());
    assert_eq!(h.len(), m, "rhs length must match constraint rows");
    let small = SmallSystem::new(g, h);
    let mut basis = Vec::with_capacity(n);
    let mut x = vec![BigRational::zero(); n];
    for k in 0..=m.min(n) {
        for rows in (0..m).combinations(k) {
            for free in (0..n).combinations(k) {
                let solved = match small.as_ref().map(|s| s.solve(&rows, &free)) {
                    Some(Small::Solved(v)) => v,
                    Some(Small::Singular) => None,
                    None | Some(Small::Overflow) => solve_block(g, h, &rows, &free),
                };
                let Some(xf) = solved else {
                    continue;
                };
                if !is_nonnegative(&xf) {
                    continue;
                }
                x.iter_mut().for_each(|v| *v = BigRational::zero());
                for (&c, v) in free.iter().zip(xf) {
                    x[c] = v;
                }
                basis.clear();
                basis.extend_from_slice(&rows);
                let mut fi = free.iter().peekable();
                for c in 0..n {
                    if fi.peek() == Some(&&c) {
                        fi.next();
                    } else {
                        basis.push(m + c);
                    }
                }
                visit(&basis, &x);
            }
        }
    }
}

enum Small {
    /// `None` when the solution has a negative entry.
    Solved(Option<RatVector>),
    Singular,
    Overflow,
}

/// Integer copy of `[G | h]` for fraction-free elimination in `i128`.
struct SmallSystem {
    cols: usize,
    g: Vec<i128>,
    h: Vec<i128>,
}

impl SmallSystem {
    fn new(g: &RatMatrix, h: &[BigRational]) -> Option<Self> {
        let small = |v: &BigRational| {
            if !v.is_integer() {
                return None;
            }
            v.to_integer()
                .to_i64()
                .filter(|x| x.abs() <= 1 << 24)
                .map(i128::from)
        };
        Some(SmallSystem {
            cols: g.cols(),
            g: g.entries().iter().map(small).collect::<Option<_>>()?,
            h: h.iter().map(small).collect::<Option<_>>()?,
        })
    }

    /// Bareiss elimination on `G[R, F] | h_R`, then `x = y / det` by
    /// fraction-free back substitution. Rationals are built only for
    /// nonnegative solutions.
    fn solve(&self, rows: &[usize], free: &[usize]) -> Small {
        let k = rows.len();
        let w = k + 1;
        let mut a: Vec<i128> = Vec::with_capacity(k * w);
        for &r in rows {
            a.extend(free.iter().map(|&c| self.g[r * self.cols + c]));
            a.push(self.h[r]);
        }
        let mut prev: i128 = 1;
        for p in 0..k {
            let Some(pr) = (p..k).find(|&r| a[r * w + p] != 0) else {
                return Small::Singular;
            };
            if pr != p {
                for j in 0..w {
                    a.swap(p * w + j, pr * w + j);
                }
            }
            let piv = a[p * w + p];
            for i in p + 1..k {
                let lead = a[i * w + p];
                for j in p + 1..w {
                    let Some(v) = a[i * w + j].checked_mul(piv).and_then(|x| {
                        lead.checked_mul(a[p * w + j])
                            .and_then(|y| x.checked_sub(y))
                    }) else {
                        return Small::Overflow;
                    };
                    a[i * w + j] = v / prev;
                }
                a[i * w + p] = 0;
            }
            prev = piv;
        }
        if k == 0 {
            return Small::Solved(Some(Vec::new()));
        }
        let det = a[(k - 1) * w + k - 1];
        let mut y = vec![0i128; k];
        for i in (0..k).rev() {
            let mut acc = match det.checked_mul(a[i * w + k]) {
                Some(v) => v,
                None => return Small::Overflow,
            };
            for j in i + 1..k {
                match a[i * w + j]
                    .checked_mul(y[j])
                    .and_then(|t| acc.checked_sub(t))
                {
                    Some(v) => acc = v,
                    None => return Small::Overflow,
                }
            }
            y[i] = acc / a[i * w + i];
        }
        if y.iter().any(|&v| v != 0 && (v < 0) != (det < 0)) {
            return Small::Solved(None);
        }
        let det = BigInt::from(det);
        Small::Solved(Some(
            y.into_iter()
                .map(|v| BigRational::new(BigInt::from(v), det.clone()))
                .collect(),
        ))
    }
}

fn solve_block(
    g: &RatMatrix,
    h: &[BigRational],
    rows: &[usize],
    free: &[usize],
) -> Option<RatVector> {
    let k = rows.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let mut entries = Vec::with_capacity(k * k);
    for &r in rows {
        for &c in free {
            entries.push(g.get(r, c).clone());
        }
    }
    let sub = RatMatrix::new(k, k, entries).ok()?;
    let rhs: Vec<BigRational> = rows.iter().map(|&r| h[r].clone()).collect();
    sub.solve_square(&rhs).ok()
}

/// Optimum of `c·x` over `{x ≥ 0, Gx ≥ h}` attained at a basic feasible
/// solution, or `None` when the region is empty.
///
/// The caller guarantees the objective is bounded in the requested direction.
/// Among optimal vertices the one with the lexicographically smallest basis
/// wins.
pub fn optimize(
    g: &RatMatrix,
    h: &[BigRational],
    c: &[BigRational],
    sense: Sense,
) -> Option<Vertex> {
    assert_eq!(c.len(), g.cols(), "objective length must match columns");
    let mut best: Option<Vertex> = None;
    for_each_nonnegative_basic_solution(g, h, |basis, x| {
        let feasible = (0..g.rows()).all(|r| dot(g.row(r), x) >= h[r]);
        if !feasible {
            return;
        }
        let value = dot(c, x);
        let better = match &best {
            None => true,
            Some(b) => match (value.cmp(&b.value), sense) {
                (Ordering::Less, Sense::Minimize) | (Ordering::Greater, Sense::Maximize) => true,
                (Ordering::Equal, _) => basis < b.basis.as_slice(),
                _ => false,
            },
        };
        if better {
            best = Some(Vertex {
                value,
                point: x.to_vec(),
                basis: basis.to_vec(),
            });
        }
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn ones(n: usize) -> Vec<BigRational> {
        vec![rat(1); n]
    }

    #[test]
    fn basis_count_matches_binomial() {
        assert_eq!(basis_count(3, 2), 10);
        assert_eq!(basis_count(6, 20), 230_230);
        assert_eq!(basis_count(0, 4), 1);
    }

    #[test]
    fn covering_example() {
        // min x1 + x2 s.t. x1 ≥ 1, x1 + x2 ≥ 1, x2 ≥ 1
        let g = RatMatrix::from_i64_rows(&[&[1, 0], &[1, 1], &[0, 1]]);
        let v = optimize(&g, &ones(3), &ones(2), Sense::Minimize).unwrap();
        assert_eq!(v.value, rat(2));
        assert_eq!(v.point, vec![rat(1), rat(1)]);
        assert_eq!(v.basis, vec![0, 2]);
    }

    #[test]
    fn fractional_optimum() {
        // min x1 + x2 + x3 with each pair covering one of three elements
        let g = RatMatrix::from_i64_rows(&[&[1, 0, 1], &[1, 1, 0], &[0, 1, 1]]);
        let v = optimize(&g, &ones(3), &ones(3), Sense::Minimize).unwrap();
        assert_eq!(v.value, ratio(3, 2));
        assert_eq!(v.point, vec![ratio(1, 2); 3]);
    }

    #[test]
    fn maximize_packing() {
        // max y1 + y2 + y3 s.t. y1 + y2 ≤ 1, y2 + y3 ≤ 1
        let g = RatMatrix::from_i64_rows(&[&[-1, -1, 0], &[0, -1, -1]]);
        let h = vec![rat(-1), rat(-1)];
        let v = optimize(&g, &h, &ones(3), Sense::Maximize).unwrap();
        assert_eq!(v.value, rat(2));
        assert_eq!(v.point, vec![rat(1), rat(0), rat(1)]);
    }

    #[test]
    fn infeasible_region() {
        // x ≥ 1 and −x ≥ 0
        let g = RatMatrix::from_i64_rows(&[&[1], &[-1]]);
        assert!(optimize(&g, &[rat(1), rat(0)], &[rat(1)], Sense::Minimize).is_none());
    }

    #[test]
    fn zero_dimensional() {
        let g = RatMatrix::zeros(2, 0);
        let v = optimize(&g, &[rat(0), rat(-1)], &[], Sense::Minimize).unwrap();
        assert_eq!(v.value, rat(0));
        assert!(optimize(&g, &[rat(1), rat(0)], &[], Sense::Minimize).is_none());
    }

    proptest::proptest! {
        #[test]
        fn integer_path_matches_rational_solve(
            k in 1usize..5,
            cells in proptest::collection::vec(-3i64..4, 16),
            rhs in proptest::collection::vec(-3i64..4, 4),
        ) {
            let rows: Vec<Vec<i64>> = (0..k).map(|r| cells[r * 4..r * 4 + k].to_vec()).collect();
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let g = RatMatrix::from_i64_rows(&refs);
            let h: Vec<BigRational> = rhs[..k].iter().map(|&v| rat(v)).collect();
            let idx: Vec<usize> = (0..k).collect();
            let exact = solve_block(&g, &h, &idx, &idx);
            match SmallSystem::new(&g, &h).unwrap().solve(&idx, &idx) {
                Small::Singular => proptest::prop_assert!(exact.is_none()),
                Small::Solved(Some(x)) => proptest::prop_assert_eq!(Some(x), exact),
                Small::Solved(None) => proptest::prop_assert!(!is_nonnegative(&exact.unwrap())),
                Small::Overflow => proptest::prop_assert!(false, "overflow on tiny entries"),
            }
        }
    }
}
