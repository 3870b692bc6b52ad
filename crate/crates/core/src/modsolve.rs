//! Solver for linear congruence systems `A f = b (mod M)` with composite `M`.
//!
//! Rows are streamed into a Hermite-style echelon basis. Because `Z/M` has
//! zero divisors, plain row elimination is not enough: whenever a pivot with
//! value `g` is created, the annihilator row `(M/g) *` pivot is fed back in
//! (Howell completion), so inconsistencies are always detected. The surviving
//! pivot rows are then diagonalised with tracked column operations, which
//! handles non-unit pivots correctly when extracting a solution.

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    ext_gcd(a.abs(), b.abs()).0
}

fn modinv(a: i64, m: i64) -> i64 {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m)
}

/// A unit `u mod m` with `u * a = gcd(a, m) (mod m)`.
fn unit_multiplier(a: i64, m: i64) -> i64 {
    let a = a.rem_euclid(m);
    let g = gcd(a, m).max(1);
    let m1 = m / g;
    let u0 = if m1 == 1 { 0 } else { modinv(a / g, m1) };
    // Adjust by multiples of m/g until coprime to m. A valid unit always
    // exists in this residue class.
    for k in 0.. {
        let u = (u0 + k * m1).rem_euclid(m.max(2));
        if gcd(u, m) == 1 {
            return u;
        }
    }
    unreachable!()
}

fn mul_mod(a: i64, b: i64, m: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(m as i128)) as i64
}

/// Streaming congruence system over `Z/M`. Columns `0..ncols` hold the
/// unknown coefficients; each stored row carries its right-hand side at
/// position `ncols`.
pub(crate) struct CongruenceSystem {
    m: i64,
    ncols: usize,
    pivots: Vec<Option<Vec<i64>>>,
    inconsistent: bool,
}

impl CongruenceSystem {
    pub fn new(ncols: usize, m: i64) -> Self {
        assert!(m >= 2);
        CongruenceSystem {
            m,
            ncols,
            pivots: vec![None; ncols],
            inconsistent: false,
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// Add the equation `sum coeffs[j] f_j = rhs (mod M)`.
    pub fn add_row(&mut self, mut coeffs: Vec<i64>, rhs: i64) {
        assert_eq!(coeffs.len(), self.ncols);
        coeffs.push(rhs);
        let mut pending = vec![coeffs];
        while let Some(row) = pending.pop() {
            self.reduce_row(row, &mut pending);
        }
    }

    fn reduce_row(&mut self, mut row: Vec<i64>, pending: &mut Vec<Vec<i64>>) {
        let m = self.m;
        for v in row.iter_mut() {
            *v = v.rem_euclid(m);
        }
        loop {
            let Some(j) = row[..self.ncols].iter().position(|&v| v != 0) else {
                if row[self.ncols] != 0 {
                    self.inconsistent = true;
                }
                return;
            };
            match self.pivots[j].take() {
                None => {
                    let u = unit_multiplier(row[j], m);
                    for v in row.iter_mut() {
                        *v = mul_mod(*v, u, m);
                    }
                    let g = row[j];
                    debug_assert_eq!(m % g, 0);
                    let ann: Vec<i64> = row.iter().map(|&v| mul_mod(v, m / g, m)).collect();
                    self.pivots[j] = Some(row);
                    pending.push(ann);
                    return;
                }
                Some(mut piv) => {
                    let pv = piv[j];
                    if row[j] % pv == 0 {
                        let q = row[j] / pv;
                        for (r, p) in row.iter_mut().zip(&piv) {
                            *r = (*r - mul_mod(q, *p, m)).rem_euclid(m);
                        }
                        self.pivots[j] = Some(piv);
                        // leading entry cleared; keep reducing
                    } else {
                        // Combine pivot and row so the pivot becomes
                        // gcd(pv, row[j]); both remainders are re-queued.
                        let (g, s, t) = ext_gcd(pv, row[j]);
                        let newp: Vec<i64> = piv
                            .iter()
                            .zip(&row)
                            .map(|(&p, &r)| (mul_mod(s, p, m) + mul_mod(t, r, m)).rem_euclid(m))
                            .collect();
                        debug_assert_eq!(newp[j], g.rem_euclid(m));
                        let qp = pv / g;
                        let qr = row[j] / g;
                        for (p, np) in piv.iter_mut().zip(&newp) {
                            *p = (*p - mul_mod(qp, *np, m)).rem_euclid(m);
                        }
                        for (r, np) in row.iter_mut().zip(&newp) {
                            *r = (*r - mul_mod(qr, *np, m)).rem_euclid(m);
                        }
                        let ann: Vec<i64> = newp.iter().map(|&v| mul_mod(v, m / g, m)).collect();
                        self.pivots[j] = Some(newp);
                        pending.push(ann);
                        pending.push(piv);
                        // row's leading entry is now zero; keep reducing
                    }
                }
            }
        }
    }

    /// Extract one solution, or `None` if the system has none modulo `M`.
    pub fn solve(&self) -> Option<Vec<i64>> {
        if self.inconsistent {
            return None;
        }
        let m = self.m;
        let rows: Vec<Vec<i64>> = self.pivots.iter().flatten().cloned().collect();
        if rows.is_empty() {
            return Some(vec![0; self.ncols]);
        }
        let nr = rows.len();
        let nc = self.ncols;
        // Work matrix with rhs in the last column; q tracks column operations
        // so that f = q * y recovers the original unknowns.
        let mut a = rows;
        let mut q: Vec<Vec<i64>> = (0..nc)
            .map(|i| (0..nc).map(|j| i64::from(i == j)).collect())
            .collect();

        let steps = nr.min(nc);
        for t in 0..steps {
            loop {
                // Move a nonzero entry of the trailing block to (t, t).
                let mut found = None;
                'search: for i in t..nr {
                    for j in t..nc {
                        if a[i][j] % m != 0 {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                let Some((pi, pj)) = found else { break };
                a.swap(t, pi);
                if pj != t {
                    for row in a.iter_mut() {
                        row.swap(t, pj);
                    }
                    for row in q.iter_mut() {
                        row.swap(t, pj);
                    }
                }
                // Clear column t below the pivot with gcd row combinations.
                for i in t + 1..nr {
                    if a[i][t] == 0 {
                        continue;
                    }
                    let (p, r) = (a[t][t], a[i][t]);
                    if r % p == 0 {
                        let f = r / p;
                        for j in 0..=nc {
                            a[i][j] = (a[i][j] - mul_mod(f, a[t][j], m)).rem_euclid(m);
                        }
                    } else {
                        let (g, s, u) = ext_gcd(p, r);
                        let (qp, qr) = (p / g, r / g);
                        for j in 0..=nc {
                            let top = (mul_mod(s, a[t][j], m) + mul_mod(u, a[i][j], m))
                                .rem_euclid(m);
                            let bot = (mul_mod(qp, a[i][j], m) - mul_mod(qr, a[t][j], m))
                                .rem_euclid(m);
                            a[t][j] = top;
                            a[i][j] = bot;
                        }
                    }
                }
                // Clear row t to the right of the pivot with column ops.
                let mut row_clean = true;
                for j in t + 1..nc {
                    if a[t][j] == 0 {
                        continue;
                    }
                    let (p, r) = (a[t][t], a[t][j]);
                    if r % p == 0 {
                        let f = r / p;
                        for i in 0..nr {
                            a[i][j] = (a[i][j] - mul_mod(f, a[i][t], m)).rem_euclid(m);
                        }
                        for qrow in q.iter_mut() {
                            qrow[j] = (qrow[j] - mul_mod(f, qrow[t], m)).rem_euclid(m);
                        }
                    } else {
                        let (g, s, u) = ext_gcd(p, r);
                        let (qp, qr) = (p / g, r / g);
                        for i in 0..nr {
                            let left =
                                (mul_mod(s, a[i][t], m) + mul_mod(u, a[i][j], m)).rem_euclid(m);
                            let right =
                                (mul_mod(qp, a[i][j], m) - mul_mod(qr, a[i][t], m)).rem_euclid(m);
                            a[i][t] = left;
                            a[i][j] = right;
                        }
                        for qrow in q.iter_mut() {
                            let left =
                                (mul_mod(s, qrow[t], m) + mul_mod(u, qrow[j], m)).rem_euclid(m);
                            let right =
                                (mul_mod(qp, qrow[j], m) - mul_mod(qr, qrow[t], m)).rem_euclid(m);
                            qrow[t] = left;
                            qrow[j] = right;
                        }
                        row_clean = false;
                        break;
                    }
                }
                if !row_clean {
                    continue;
                }
                // Column elimination may have disturbed rows below; verify.
                let col_clean = (t + 1..nr).all(|i| a[i][t] == 0);
                if col_clean {
                    break;
                }
            }
        }

        // Diagonal solve d_t * y_t = rhs_t (mod M).
        let mut y = vec![0i64; nc];
        for (t, row) in a.iter().enumerate() {
            let rhs = row[nc];
            if t >= nc || row[t] == 0 {
                if rhs != 0 {
                    return None;
                }
                continue;
            }
            let d = row[t];
            let g = gcd(d, m);
            if rhs % g != 0 {
                return None;
            }
            y[t] = mul_mod(rhs / g, modinv(d / g, m / g), m);
        }
        let f = (0..nc)
            .map(|i| {
                (0..nc)
                    .map(|t| mul_mod(q[i][t], y[t], m))
                    .fold(0i64, |acc, v| (acc + v).rem_euclid(m))
            })
            .collect();
        Some(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve_system(rows: &[(Vec<i64>, i64)], ncols: usize, m: i64) -> Option<Vec<i64>> {
        let mut sys = CongruenceSystem::new(ncols, m);
        for (coeffs, rhs) in rows {
            sys.add_row(coeffs.clone(), *rhs);
        }
        sys.solve()
    }

    fn check(rows: &[(Vec<i64>, i64)], f: &[i64], m: i64) -> bool {
        rows.iter().all(|(coeffs, rhs)| {
            let s: i64 = coeffs
                .iter()
                .zip(f)
                .fold(0, |acc, (&c, &x)| (acc + mul_mod(c, x, m)).rem_euclid(m));
            s == rhs.rem_euclid(m)
        })
    }

    #[test]
    fn solves_despite_non_unit_leading_coefficient() {
        // 2 f0 + f1 = 1 (mod 4) has no solution with f1 = 0 but is solvable.
        let rows = vec![(vec![2, 1], 1)];
        let f = solve_system(&rows, 2, 4).unwrap();
        assert!(check(&rows, &f, 4));
    }

    #[test]
    fn detects_unsolvable_systems() {
        assert!(solve_system(&[(vec![2], 1)], 1, 4).is_none());
        // f0 + f1 = 1 and f0 + f1 = 3 (mod 4)
        assert!(solve_system(&[(vec![1, 1], 1), (vec![1, 1], 3)], 2, 4).is_none());
        // 2 f0 = 2 is fine, but combined with 2 f0 = 3 it is not.
        assert!(solve_system(&[(vec![2], 2), (vec![2], 3)], 1, 4).is_none());
    }

    #[test]
    fn agrees_with_brute_force_on_small_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &m in &[4i64, 6, 8, 9, 12] {
            for _ in 0..120 {
                let ncols = 1 + (rng.next_u64() % 3) as usize;
                let nrows = 1 + (rng.next_u64() % 4) as usize;
                let rows: Vec<(Vec<i64>, i64)> = (0..nrows)
                    .map(|_| {
                        let coeffs =
                            (0..ncols).map(|_| (rng.next_u64() % m as u64) as i64).collect();
                        (coeffs, (rng.next_u64() % m as u64) as i64)
                    })
                    .collect();
                let got = solve_system(&rows, ncols, m);
                // brute force over all assignments
                let total = (m as u64).pow(ncols as u32);
                let brute = (0..total).find_map(|code| {
                    let mut c = code;
                    let f: Vec<i64> = (0..ncols)
                        .map(|_| {
                            let v = (c % m as u64) as i64;
                            c /= m as u64;
                            v
                        })
                        .collect();
                    check(&rows, &f, m).then_some(f)
                });
                match (got, brute) {
                    (Some(f), Some(_)) => assert!(check(&rows, &f, m)),
                    (None, None) => {}
                    (got, brute) => {
                        panic!("solver disagreement: solver {got:?}, brute {brute:?}, rows {rows:?}, m {m}")
                    }
                }
            }
        }
    }

    #[test]
    fn planted_solutions_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &m in &[8i64, 16, 18, 24] {
            for _ in 0..60 {
                let ncols = 2 + (rng.next_u64() % 4) as usize;
                let planted: Vec<i64> =
                    (0..ncols).map(|_| (rng.next_u64() % m as u64) as i64).collect();
                let rows: Vec<(Vec<i64>, i64)> = (0..ncols + 3)
                    .map(|_| {
                        let coeffs: Vec<i64> =
                            (0..ncols).map(|_| (rng.next_u64() % m as u64) as i64).collect();
                        let rhs = coeffs
                            .iter()
                            .zip(&planted)
                            .fold(0i64, |acc, (&c, &x)| (acc + mul_mod(c, x, m)).rem_euclid(m));
                        (coeffs, rhs)
                    })
                    .collect();
                let f = solve_system(&rows, ncols, m).expect("planted system must be solvable");
                assert!(check(&rows, &f, m));
            }
        }
    }
}
