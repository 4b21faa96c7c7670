//! Oracles shared by integration tests.

fn prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Smallest prime `q` admitting some degree `k` with `q > Δk` and `q^(k+1) >= m`.
pub fn oracle_q(m: u64, delta: u64) -> u64 {
    (2..)
        .filter(|&q| prime(q))
        .find(|&q| (1..q).take_while(|k| q > delta * k).any(|k| (q as u128).pow(k as u32 + 1) >= m as u128))
        .unwrap()
}

/// Palettes of repeated Linial rounds while `q^2` still shrinks the palette.
pub fn oracle_linial_palettes(m: u64, delta: u64) -> Vec<u64> {
    let mut out = vec![m];
    loop {
        let q = oracle_q(*out.last().unwrap(), delta);
        if q * q >= *out.last().unwrap() {
            return out;
        }
        out.push(q * q);
    }
}

/// Smallest `k` with `k >= m(1 - 1/(Δ+2))`, compared exactly.
pub fn oracle_kw(m: u64, delta: u64) -> u64 {
    (0..=m).find(|k| k * (delta + 2) >= m * (delta + 1)).unwrap()
}
