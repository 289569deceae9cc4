//! Exact rational vectors, Gaussian elimination, and integer Smith normal form.

use num::bigint::BigInt;
pub use num::rational::Ratio;
use num::traits::{Signed, Zero};

pub type Rat = Ratio<BigInt>;
pub type RatVec = Vec<Rat>;

/// Serde adapter: a single rational as a "num/den" string.
pub mod serde_rat {
    use super::{rat_from_str, rat_to_string, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// Big integers serialize as decimal strings.
pub mod serde_bigint {
    use num::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Integer as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Ratio::from_integer(BigInt::from(n))
}

/// Exact fraction `num/den`.
pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn zeros(n: usize) -> RatVec {
    vec![Rat::zero(); n]
}

pub fn vec_add(a: &[Rat], b: &[Rat]) -> RatVec {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rat], b: &[Rat]) -> RatVec {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rat], c: &Rat) -> RatVec {
    a.iter().map(|x| x * c).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Coordinates of `target` in the given spanning set, or None when `target`
/// is outside the span. Panics if the spanning set is linearly dependent:
/// every caller passes a basis.
pub fn solve_in_basis(basis: &[RatVec], target: &[Rat]) -> Option<RatVec> {
    let k = basis.len();
    let m = target.len();
    if k == 0 {
        return if target.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    for v in basis {
        assert_eq!(v.len(), m, "basis vector dimension mismatch");
    }
    // Augmented matrix rows: [basis columns | target].
    let mut aug: Vec<RatVec> = (0..m)
        .map(|r| {
            let mut row: RatVec = basis.iter().map(|v| v[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..k {
        let Some(pr) = (row..m).find(|&r| !aug[r][col].is_zero()) else {
            panic!("linearly dependent spanning set passed to solve_in_basis");
        };
        aug.swap(row, pr);
        let inv = aug[row][col].clone();
        for c in col..=k {
            let val = &aug[row][c] / &inv;
            aug[row][c] = val;
        }
        for r in 0..m {
            if r != row && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=k {
                    let val = &aug[r][c] - &f * &aug[row][c];
                    aug[r][c] = val;
                }
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    // Any leftover row with a nonzero last entry means the system is inconsistent.
    for r in row..m {
        if !aug[r][k].is_zero() {
            return None;
        }
    }
    Some((0..k).map(|c| aug[pivot_rows[c]][k].clone()).collect())
}

/// Result of `smith_normal_form`: `u * a * v = d` with `u`, `v` unimodular and
/// `d` diagonal with each entry dividing the next.
pub struct Snf {
    pub u: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

impl Snf {
    /// Nonzero diagonal entries (the invariant factors), in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let r = self.d.len().min(if self.d.is_empty() { 0 } else { self.d[0].len() });
        (0..r)
            .map(|i| self.d[i][i].clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

fn identity_int(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul_int(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let (m, k) = (a.len(), if a.is_empty() { 0 } else { a[0].len() });
    let n = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(k, b.len());
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum::<BigInt>())
                .collect()
        })
        .collect()
}

/// Smith normal form over the integers.
pub fn smith_normal_form(a: &[Vec<BigInt>]) -> Snf {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity_int(m);
    let mut v = identity_int(n);

    fn swap_rows(d: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], i: usize, j: usize) {
        d.swap(i, j);
        u.swap(i, j);
    }
    fn swap_cols(d: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in d.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    }
    fn add_row(d: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], src: usize, dst: usize, f: &BigInt) {
        for c in 0..d[src].len() {
            let t = &d[dst][c] + f * &d[src][c];
            d[dst][c] = t;
        }
        for c in 0..u[src].len() {
            let t = &u[dst][c] + f * &u[src][c];
            u[dst][c] = t;
        }
    }
    fn add_col(d: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], src: usize, dst: usize, f: &BigInt) {
        for row in d.iter_mut() {
            let t = &row[dst] + f * &row[src];
            row[dst] = t;
        }
        for row in v.iter_mut() {
            let t = &row[dst] + f * &row[src];
            row[dst] = t;
        }
    }

    let rmax = m.min(n);
    let mut t = 0usize;
    while t < rmax {
        // Find the smallest-magnitude nonzero entry in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero()
                    && pivot
                        .map(|(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, &mut u, t, pi);
        swap_cols(&mut d, &mut v, t, pj);
        // Reduce the pivot row and column; restart whenever a remainder shrinks the pivot.
        let mut clean = true;
        for i in (t + 1)..m {
            if !d[i][t].is_zero() {
                let q = -(&d[i][t] / &d[t][t]);
                add_row(&mut d, &mut u, t, i, &q);
                if !d[i][t].is_zero() {
                    clean = false;
                }
            }
        }
        for j in (t + 1)..n {
            if !d[t][j].is_zero() {
                let q = -(&d[t][j] / &d[t][t]);
                add_col(&mut d, &mut v, t, j, &q);
                if !d[t][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // Pivot must divide the rest of the block; otherwise fold a bad row in and retry.
        let mut fixed = true;
        'scan: for i in (t + 1)..m {
            for j in (t + 1)..n {
                if !(&d[i][j] % &d[t][t]).is_zero() {
                    add_row(&mut d, &mut u, i, t, &BigInt::from(1));
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        if d[t][t].sign() == num::bigint::Sign::Minus {
            for c in t..n {
                let x = -&d[t][c];
                d[t][c] = x;
            }
            for c in 0..m {
                let x = -&u[t][c];
                u[t][c] = x;
            }
        }
        t += 1;
    }
    Snf { u, d, v }
}

/// Basis of the integer kernel {x : a x = 0} as column vectors.
pub fn integer_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    if n == 0 {
        return Vec::new();
    }
    if m == 0 {
        return (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect();
    }
    let snf = smith_normal_form(a);
    let mut kernel = Vec::new();
    for j in 0..n {
        let dzero = j >= m || snf.d[j][j].is_zero();
        if dzero {
            kernel.push((0..n).map(|i| snf.v[i][j].clone()).collect());
        }
    }
    kernel
}

/// Solve `gens * x = target` over the integers, where `gens` columns generate a lattice.
pub fn lattice_solve(gens: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let m = target.len();
    let k = if gens.is_empty() { 0 } else { gens[0].len() };
    assert!(gens.len() == m || k == 0);
    if k == 0 {
        return if target.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let snf = smith_normal_form(gens);
    // u*g*v = d, so g x = t  <=>  d y = u t with x = v y.
    let ut: Vec<BigInt> = (0..m)
        .map(|i| (0..m).map(|j| &snf.u[i][j] * &target[j]).sum::<BigInt>())
        .collect();
    let mut y = vec![BigInt::zero(); k];
    for i in 0..m {
        let di = if i < k { snf.d[i][i].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !ut[i].is_zero() {
                return None;
            }
        } else {
            if !(&ut[i] % &di).is_zero() {
                return None;
            }
            y[i] = &ut[i] / &di;
        }
    }
    let x: Vec<BigInt> = (0..k)
        .map(|i| (0..k).map(|j| &snf.v[i][j] * &y[j]).sum::<BigInt>())
        .collect();
    Some(x)
}

/// Inverse of a square rational matrix given as rows. Panics when singular:
/// callers pass unimodular or otherwise known-invertible matrices.
pub fn invert_rat_mat(rows: &[RatVec]) -> Vec<RatVec> {
    let n = rows.len();
    let mut aug: Vec<RatVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            assert_eq!(r.len(), n);
            let mut row = r.clone();
            for j in 0..n {
                row.push(if i == j { rat_int(1) } else { Rat::zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pr = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .expect("singular matrix passed to invert_rat_mat");
        aug.swap(col, pr);
        let inv = aug[col][col].clone();
        for c in col..2 * n {
            let v = &aug[col][c] / &inv;
            aug[col][c] = v;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..2 * n {
                    let v = &aug[r][c] - &f * &aug[col][c];
                    aug[r][c] = v;
                }
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Compact string form: "3", "-1/2".
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_str(s: &str) -> Result<Rat, String> {
    let parse_int = |t: &str| -> Result<BigInt, String> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| format!("bad integer {t:?}: {e}"))
    };
    match s.split_once('/') {
        None => Ok(Ratio::from_integer(parse_int(s)?)),
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Ratio::new(parse_int(num)?, d))
        }
    }
}

/// Serde adapter: rational vector as a list of "num/den" strings.
pub mod serde_ratvec {
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &RatVec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rat_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RatVec, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| rat_from_str(s).map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter: list of rational vectors.
pub mod serde_ratvecs {
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[RatVec], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            v.iter()
                .map(|row| row.iter().map(rat_to_string).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<RatVec>, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(d)?;
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|s| rat_from_str(s).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// Common-denominator integer form of a list of rational vectors: returns the
/// integer matrix whose columns are `den * vecs[j]` together with `den`.
pub fn clear_denominators(vecs: &[RatVec]) -> (Vec<Vec<BigInt>>, BigInt) {
    let m = if vecs.is_empty() { 0 } else { vecs[0].len() };
    let mut den = BigInt::from(1);
    for v in vecs {
        for x in v {
            den = num::integer::lcm(den.clone(), x.denom().clone());
        }
    }
    let mat: Vec<Vec<BigInt>> = (0..m)
        .map(|r| {
            vecs.iter()
                .map(|v| v[r].numer() * (&den / v[r].denom()))
                .collect()
        })
        .collect();
    (mat, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_in_basis_roundtrip() {
        let basis = vec![
            vec![rat_int(1), rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1), rat_int(1)],
        ];
        let target = vec![rat_int(2), rat(9, 2), rat(1, 2)];
        let coords = solve_in_basis(&basis, &target).expect("in span");
        assert_eq!(coords, vec![rat_int(2), rat(1, 2)]);
        let outside = vec![rat_int(1), rat_int(0), rat_int(1)];
        assert!(solve_in_basis(&basis, &outside).is_none());
    }

    #[test]
    fn snf_reconstructs_and_divides() {
        let a: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(4)],
            vec![BigInt::from(-6), BigInt::from(6), BigInt::from(12)],
            vec![BigInt::from(10), BigInt::from(4), BigInt::from(16)],
        ];
        let snf = smith_normal_form(&a);
        let ua = mat_mul_int(&snf.u, &a);
        let uav = mat_mul_int(&ua, &snf.v);
        assert_eq!(uav, snf.d);
        let f = snf.invariant_factors();
        for w in f.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain {f:?}");
        }
        assert_eq!(f, vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]);
    }

    #[test]
    fn integer_kernel_is_kernel() {
        let a: Vec<Vec<BigInt>> = vec![vec![
            BigInt::from(2),
            BigInt::from(-4),
            BigInt::from(2),
        ]];
        let ker = integer_kernel(&a);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let s: BigInt = (0..3).map(|i| &a[0][i] * &v[i]).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn invert_and_string_roundtrip() {
        let m = vec![
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
        ];
        let inv = invert_rat_mat(&m);
        assert_eq!(
            inv,
            vec![
                vec![rat_int(1), rat_int(-1)],
                vec![rat_int(-1), rat_int(2)],
            ]
        );
        for r in [rat(7, 3), rat_int(-4), rat(-1, 2)] {
            assert_eq!(rat_from_str(&rat_to_string(&r)).unwrap(), r);
        }
        assert!(rat_from_str("1/0").is_err());
    }

    #[test]
    fn lattice_solve_membership() {
        // Columns generate the lattice spanned by (2,0) and (1,3).
        let gens: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(0), BigInt::from(3)],
        ];
        let inside = vec![BigInt::from(3), BigInt::from(3)];
        let x = lattice_solve(&gens, &inside).expect("member");
        assert_eq!(x, vec![BigInt::from(1), BigInt::from(1)]);
        let outside = vec![BigInt::from(1), BigInt::from(0)];
        assert!(lattice_solve(&gens, &outside).is_none());
    }
}
