//! Slow, obviously-correct reference implementations used as test oracles.
//! Everything here works on surface strings and rescans raw tables; none of
//! it shares code with the library.

use std::collections::{BTreeMap, HashMap};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub type Gram = Vec<String>;

/// Brute-force n-gram and gap counts over surfaces.
#[derive(Debug, Default)]
pub struct ScanCounts {
    pub unigrams: HashMap<String, u64>,
    pub bigrams: HashMap<(String, String), u64>,
    pub trigrams: HashMap<(String, String, String), u64>,
    pub together: HashMap<(String, String), u64>,
    pub separate: HashMap<(String, String), u64>,
    pub middles: HashMap<(String, String, String), u64>,
    /// Real (non-sentinel) tokens.
    pub tokens: u64,
}

/// Sentences as surface lists after the frequency cutoff.
pub fn mapped_sentences(lines: &[String], min_count: u64) -> Vec<Vec<String>> {
    let sentences: Vec<Vec<&str>> = lines
        .iter()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in &sentences {
        for t in s {
            *freq.entry(t).or_default() += 1;
        }
    }
    sentences
        .iter()
        .map(|s| {
            s.iter()
                .map(|t| if freq[t] >= min_count { t.to_string() } else { UNK.to_string() })
                .collect()
        })
        .collect()
}

pub fn scan(lines: &[String], min_count: u64) -> ScanCounts {
    let mut out = ScanCounts::default();
    for s in mapped_sentences(lines, min_count) {
        out.tokens += s.len() as u64;
        let mut aug = vec![BOS.to_string(), BOS.to_string()];
        aug.extend(s.iter().cloned());
        aug.push(EOS.to_string());
        for i in 0..aug.len() {
            *out.unigrams.entry(aug[i].clone()).or_default() += 1;
            if i + 1 < aug.len() {
                *out.bigrams.entry((aug[i].clone(), aug[i + 1].clone())).or_default() += 1;
            }
            if i + 2 < aug.len() {
                *out
                    .trigrams
                    .entry((aug[i].clone(), aug[i + 1].clone(), aug[i + 2].clone()))
                    .or_default() += 1;
            }
        }
        for i in 0..s.len() {
            if i + 1 < s.len() {
                *out.together.entry((s[i].clone(), s[i + 1].clone())).or_default() += 1;
            }
            if i + 2 < s.len() {
                *out.separate.entry((s[i].clone(), s[i + 2].clone())).or_default() += 1;
                *out
                    .middles
                    .entry((s[i].clone(), s[i + 1].clone(), s[i + 2].clone()))
                    .or_default() += 1;
            }
        }
    }
    out
}

/// Katz back-off evaluated straight from the scanned tables, recomputing
/// every sum on each call.
pub struct ReferenceKatz<'a> {
    pub counts: &'a ScanCounts,
    /// Every surface that can be predicted (BOS excluded, UNK included).
    pub predictable: Vec<String>,
    k: u64,
    coc: [BTreeMap<u64, u64>; 3],
}

impl<'a> ReferenceKatz<'a> {
    pub fn new(counts: &'a ScanCounts, k: u64) -> Self {
        let mut predictable: Vec<String> = counts
            .unigrams
            .keys()
            .filter(|w| w.as_str() != BOS)
            .cloned()
            .collect();
        if !predictable.iter().any(|w| w == UNK) {
            predictable.push(UNK.to_string());
        }
        predictable.sort();
        let mut coc: [BTreeMap<u64, u64>; 3] = Default::default();
        for (w, &c) in &counts.unigrams {
            if w != BOS {
                *coc[0].entry(c).or_default() += 1;
            }
        }
        for ((a, b), &c) in &counts.bigrams {
            if !(a == BOS && b == BOS) {
                *coc[1].entry(c).or_default() += 1;
            }
        }
        for &c in counts.trigrams.values() {
            *coc[2].entry(c).or_default() += 1;
        }
        ReferenceKatz { counts, predictable, k, coc }
    }

    /// Discount for count `r` at `order`; 1 whenever the formula is not
    /// usable.
    pub fn discount(&self, order: usize, r: u64) -> f64 {
        let n = |i: u64| *self.coc[order - 1].get(&i).unwrap_or(&0) as f64;
        let k = self.k;
        if r == 0 || r >= k || n(1) == 0.0 || n(r) == 0.0 || n(r + 1) == 0.0 {
            return 1.0;
        }
        let common = k as f64 * n(k) / n(1);
        if common >= 1.0 {
            return 1.0;
        }
        let r_star = (r + 1) as f64 * n(r + 1) / n(r);
        ((r_star / r as f64 - common) / (1.0 - common)).clamp(1e-9, 1.0)
    }

    fn c1(&self, w: &str) -> u64 {
        *self.counts.unigrams.get(w).unwrap_or(&0)
    }

    pub fn p1(&self, w: &str) -> f64 {
        let total: u64 = self.predictable.iter().map(|x| self.c1(x)).sum();
        let kept: f64 = self
            .predictable
            .iter()
            .map(|x| self.discount(1, self.c1(x)) * self.c1(x) as f64)
            .sum();
        let unk = self.c1(UNK);
        let denom = if kept >= total as f64 && unk == 0 { total + 1 } else { total } as f64;
        if w == UNK {
            let known = kept - self.discount(1, unk) * unk as f64;
            (denom - known) / denom
        } else {
            self.discount(1, self.c1(w)) * self.c1(w) as f64 / denom
        }
    }

    /// Generic back-off step: `seen` lists (word, count) observed after the
    /// context, `lower` is the next lower order.
    fn backoff(&self, order: usize, w: &str, seen: &[(String, u64)], lower: &dyn Fn(&str) -> f64) -> f64 {
        if seen.is_empty() {
            return lower(w);
        }
        let total: u64 = seen.iter().map(|(_, c)| c).sum();
        let kept: f64 = seen.iter().map(|(_, c)| self.discount(order, *c) * *c as f64).sum();
        if let Some((_, c)) = seen.iter().find(|(x, _)| x == w) {
            let denom = if seen.len() >= self.predictable.len() {
                kept
            } else if kept >= total as f64 {
                total as f64 + 1.0
            } else {
                total as f64
            };
            return self.discount(order, *c) * *c as f64 / denom;
        }
        let denom = if kept >= total as f64 { total as f64 + 1.0 } else { total as f64 };
        let lower_seen: f64 = seen.iter().map(|(x, _)| lower(x)).sum();
        (denom - kept) / denom / (1.0 - lower_seen).max(f64::EPSILON) * lower(w)
    }

    pub fn p2(&self, v: &str, w: &str) -> f64 {
        let seen: Vec<(String, u64)> = self
            .counts
            .bigrams
            .iter()
            .filter(|((a, b), _)| a == v && b != BOS)
            .map(|((_, b), &c)| (b.clone(), c))
            .collect();
        self.backoff(2, w, &seen, &|x| self.p1(x))
    }

    pub fn p3(&self, u: &str, v: &str, w: &str) -> f64 {
        let seen: Vec<(String, u64)> = self
            .counts
            .trigrams
            .iter()
            .filter(|((a, b, _), _)| a == u && b == v)
            .map(|((_, _, x), &c)| (x.clone(), c))
            .collect();
        self.backoff(3, w, &seen, &|x| self.p2(v, x))
    }
}

/// Full-matrix edit distance over chars.
pub fn textbook_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom,
/// via the regularized upper incomplete gamma function `Q(df/2, x/2)`.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    let a = df as f64 / 2.0;
    let x = x / 2.0;
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_fraction(a, x)
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut s = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..10_000 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn upper_gamma_fraction(a: f64, x: f64) -> f64 {
    // modified Lentz
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_tail_matches_tables() {
        // critical values from standard tables
        assert!((chi_square_sf(16.919, 9) - 0.05).abs() < 1e-4);
        assert!((chi_square_sf(21.666, 9) - 0.01).abs() < 1e-4);
        assert!((chi_square_sf(3.841, 1) - 0.05).abs() < 1e-4);
        assert!((chi_square_sf(0.0, 4) - 1.0).abs() < 1e-12);
    }
}
