//! Shannon entropy helpers (natural log).

use std::collections::BTreeMap;

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum()
}

/// Entropy of the empirical distribution given by integer counts.
pub fn shannon_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    // ln T - (1/T) sum c ln c, with equal counts grouped to keep the sum short.
    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for c in counts.into_iter().filter(|c| *c > 0) {
        *groups.entry(c).or_default() += 1;
    }
    let total: u64 = groups.iter().map(|(c, m)| c * m).sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let weighted: f64 = groups.iter().map(|(&c, &m)| (c * m) as f64 * (c as f64).ln()).sum();
    (t.ln() - weighted / t).max(0.0)
}

pub const LN2: f64 = std::f64::consts::LN_2;

/// Convert nats to bits.
pub fn bits(nats: f64) -> f64 {
    nats / LN2
}
