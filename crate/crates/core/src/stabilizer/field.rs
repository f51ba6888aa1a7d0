//! Row reduction over the prime field `F_p`.

/// Is `p` prime (trial division; `p` is small).
pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Multiplicative inverse of a nonzero `a` mod `p`.
pub fn inv(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow(a, p - 2, p)
}

fn pow(b: u32, mut e: u32, p: u32) -> u32 {
    let m = u64::from(p);
    let (mut acc, mut base) = (1u64, u64::from(b) % m);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u32
}

/// Reduced row echelon form in place, pivoting over `pivot_cols` in order.
/// Returns the pivot column of each nonzero row; rows are reordered so pivots come first.
pub fn rref(rows: &mut [Vec<u32>], pivot_cols: &[usize], p: u32) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c] != 0) else { continue };
        rows.swap(r, k);
        let f = inv(rows[r][c], p);
        if f != 1 {
            for x in rows[r].iter_mut() {
                *x = (*x * f) % p;
            }
        }
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k == r || row[c] == 0 {
                continue;
            }
            let m = p - row[c];
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if *y != 0 {
                    *x = (*x + m * y) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of the submatrix on `cols`.
pub fn rank_on_columns(rows: &[Vec<u32>], cols: &[usize], p: u32) -> usize {
    if p == 2 {
        return rank_gf2(&pack_gf2(rows, cols));
    }
    let mut sub: Vec<Vec<u32>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
    let all: Vec<usize> = (0..cols.len()).collect();
    rref(&mut sub, &all, p).len()
}

/// Same as [`rank_on_columns`] but always through the general-`p` eliminator.
pub fn rank_on_columns_generic(rows: &[Vec<u32>], cols: &[usize], p: u32) -> usize {
    let mut sub: Vec<Vec<u32>> = rows.iter().map(|r| cols.iter().map(|&c| r[c] % p).collect()).collect();
    let all: Vec<usize> = (0..cols.len()).collect();
    rref(&mut sub, &all, p).len()
}

/// Bit-packed rows over GF(2).
pub fn pack_gf2(rows: &[Vec<u32>], cols: &[usize]) -> Vec<Vec<u64>> {
    let words = cols.len().div_ceil(64);
    rows.iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for (j, &c) in cols.iter().enumerate() {
                if r[c] & 1 == 1 {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect()
}

/// GF(2) rank by XOR elimination on packed rows.
pub fn rank_gf2(rows: &[Vec<u64>]) -> usize {
    let mut rows: Vec<Vec<u64>> = rows.iter().filter(|r| r.iter().any(|w| *w != 0)).cloned().collect();
    let Some(words) = rows.first().map(Vec::len) else { return 0 };
    let mut rank = 0;
    for bit in 0..words * 64 {
        let (w, b) = (bit / 64, 1u64 << (bit % 64));
        let Some(k) = (rank..rows.len()).find(|&k| rows[k][w] & b != 0) else { continue };
        rows.swap(rank, k);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[w] & b != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
