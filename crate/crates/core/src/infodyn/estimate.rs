use super::{InfoKind, InfoParams, InfoResult};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_binary(values: &[u8]) -> Result<()> {
    if values.iter().any(|&v| v > 1) {
        return Err(Error::InvalidParam("series values must be 0 or 1".into()));
    }
    Ok(())
}

#[inline]
fn log2<F: Scalar>(v: F) -> F {
    v.log2()
}

/// Plug-in Shannon entropy in bits of a histogram. Zero cells contribute nothing.
pub fn entropy<F: Scalar>(counts: &[u64]) -> Result<F> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("entropy of an empty histogram".into()));
    }
    let n = F::from_u64(total).expect("count fits");
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = F::from_u64(c).expect("count fits") / n;
            -p * log2(p)
        })
        .sum())
}

/// Distinct keys with their multiplicities, in key order.
fn tally<K: Ord + Copy>(mut keys: Vec<K>) -> Vec<(K, u64)> {
    keys.sort_unstable();
    let mut out: Vec<(K, u64)> = Vec::with_capacity(keys.len());
    for k in keys {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

fn lookup<K: Ord>(table: &[(K, u64)], key: &K) -> u64 {
    table
        .binary_search_by(|(k, _)| k.cmp(key))
        .map(|i| table[i].1)
        .expect("marginal key present")
}

/// `sum p(a,b) log2 p(a,b) / (p(a) p(b))` over observed pairs.
fn mi_from_pairs<F: Scalar, A: Ord + Copy, B: Ord + Copy>(pairs: &[(A, B)]) -> F {
    let n = pairs.len();
    if n == 0 {
        return F::zero();
    }
    let joint = tally(pairs.to_vec());
    let left = tally(pairs.iter().map(|p| p.0).collect());
    let right = tally(pairs.iter().map(|p| p.1).collect());
    let nf = F::from_usize_lossy(n);
    joint
        .iter()
        .map(|&((a, b), c)| {
            let c = F::from_u64(c).unwrap();
            let ca = F::from_u64(lookup(&left, &a)).unwrap();
            let cb = F::from_u64(lookup(&right, &b)).unwrap();
            c / nf * log2(c * nf / (ca * cb))
        })
        .sum()
}

fn clamp_nonnegative<F: Scalar>(v: F) -> F {
    debug_assert!(v > F::from_f64_lossy(-1e-9), "information value {v} is negative");
    v.max(F::zero())
}

/// Mutual information between `x_t` and `y_{t+u}`.
///
/// Unaligned years are truncated, so `len - u` samples remain; at least two are
/// required.
pub fn mutual_information<F: Scalar>(x: &[u8], y: &[u8], u: usize) -> Result<InfoResult<F>> {
    check_binary(x)?;
    check_binary(y)?;
    if x.len() != y.len() {
        return Err(Error::InvalidParam(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let available = x.len().saturating_sub(u);
    if available < 2 {
        return Err(Error::InsufficientSamples { needed: 2, available });
    }
    let pairs: Vec<(u8, u8)> = (0..available).map(|t| (x[t], y[t + u])).collect();
    Ok(InfoResult {
        measure: InfoKind::MutualInformation,
        value_bits: clamp_nonnegative(mi_from_pairs(&pairs)),
        p_value: None,
        n_samples: available,
        params: InfoParams {
            u,
            ..Default::default()
        },
        population_size: 1,
    })
}

/// Packs `len` values spaced `tau` apart, ending at index `end`, newest first.
#[inline]
fn embed(series: &[u8], end: usize, len: usize, tau: usize) -> u64 {
    (0..len).fold(0u64, |acc, j| (acc << 1) | series[end - j * tau] as u64)
}

/// Mutual information between `x_{n+1}` and the history `(x_n, x_{n-tau}, ..., x_{n-(k-1)tau})`.
pub fn active_information_storage<F: Scalar>(x: &[u8], k: usize, tau: usize) -> Result<InfoResult<F>> {
    check_binary(x)?;
    let params = InfoParams {
        k,
        tau_x: tau,
        ..Default::default()
    };
    params.validate()?;
    let first = (k - 1) * tau;
    let available = x.len().saturating_sub(first + 1);
    if available < 1 {
        return Err(Error::InsufficientSamples { needed: 1, available });
    }
    let pairs: Vec<(u64, u8)> = (first..first + available)
        .map(|n| (embed(x, n, k, tau), x[n + 1]))
        .collect();
    Ok(InfoResult {
        measure: InfoKind::ActiveStorage,
        value_bits: clamp_nonnegative(mi_from_pairs(&pairs)),
        p_value: None,
        n_samples: available,
        params,
        population_size: 1,
    })
}

/// Embedded state-transition tuples `(x_{n+1}, x_n^(k,tau_x), y_{n+1-u}^(l,tau_y))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferSamples {
    pub tuples: Vec<(u8, u64, u64)>,
}

impl TransferSamples {
    pub fn embed(source: &[u8], target: &[u8], params: &InfoParams) -> Result<Self> {
        check_binary(source)?;
        check_binary(target)?;
        params.validate()?;
        if source.len() != target.len() {
            return Err(Error::InvalidParam(format!(
                "series lengths differ ({} vs {})",
                source.len(),
                target.len()
            )));
        }
        let InfoParams { k, l, tau_x, tau_y, u } = *params;
        let first = ((k - 1) * tau_x).max((u + (l - 1) * tau_y).saturating_sub(1));
        let available = target.len().saturating_sub(first + 1);
        if available < 1 {
            return Err(Error::InsufficientSamples { needed: 1, available });
        }
        let tuples = (first..first + available)
            .map(|n| {
                (
                    target[n + 1],
                    embed(target, n, k, tau_x),
                    embed(source, n + 1 - u, l, tau_y),
                )
            })
            .collect();
        Ok(Self { tuples })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Contingency table over `(next, target history, source history)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCounts {
    pub cells: Vec<((u8, u64, u64), u64)>,
    pub n_samples: u64,
}

impl JointCounts {
    pub fn from_samples(samples: &TransferSamples) -> Self {
        Self {
            cells: tally(samples.tuples.clone()),
            n_samples: samples.len() as u64,
        }
    }

    fn marginal<K: Ord + Copy>(&self, f: impl Fn(&(u8, u64, u64)) -> K) -> Vec<(K, u64)> {
        let mut m: Vec<(K, u64)> = self.cells.iter().map(|(k, c)| (f(k), *c)).collect();
        m.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(K, u64)> = Vec::with_capacity(m.len());
        for (k, c) in m {
            match out.last_mut() {
                Some((last, acc)) if *last == k => *acc += c,
                _ => out.push((k, c)),
            }
        }
        out
    }

    fn entropy_of<F: Scalar, K: Ord + Copy>(&self, f: impl Fn(&(u8, u64, u64)) -> K) -> F {
        let counts: Vec<u64> = self.marginal(f).into_iter().map(|(_, c)| c).collect();
        entropy(&counts).unwrap_or_else(|_| F::zero())
    }

    /// Conditional mutual information as the expected log ratio
    /// `p(next | hist, src) / p(next | hist)`.
    pub fn conditional_mi<F: Scalar>(&self) -> F {
        let n = F::from_u64(self.n_samples).unwrap();
        let hist = self.marginal(|&(_, h, _)| h);
        let hist_src = self.marginal(|&(_, h, s)| (h, s));
        let next_hist = self.marginal(|&(x, h, _)| (x, h));
        self.cells
            .iter()
            .map(|&((x, h, s), c)| {
                let c_hs = F::from_u64(lookup(&hist_src, &(h, s))).unwrap();
                let c_xh = F::from_u64(lookup(&next_hist, &(x, h))).unwrap();
                let c_h = F::from_u64(lookup(&hist, &h)).unwrap();
                let c = F::from_u64(c).unwrap();
                c / n * log2((c / c_hs) / (c_xh / c_h))
            })
            .sum()
    }

    /// `H(next | hist) - H(next | hist, src)` assembled from joint entropies.
    pub fn entropy_difference<F: Scalar>(&self) -> F {
        let h_xh: F = self.entropy_of(|&(x, h, _)| (x, h));
        let h_h: F = self.entropy_of(|&(_, h, _)| h);
        let h_xhs: F = self.entropy_of(|&k| k);
        let h_hs: F = self.entropy_of(|&(_, h, s)| (h, s));
        (h_xh - h_h) - (h_xhs - h_hs)
    }
}

/// Transfer entropy from `source` to `target` as a conditional mutual information.
pub fn transfer_entropy<F: Scalar>(source: &[u8], target: &[u8], params: &InfoParams) -> Result<InfoResult<F>> {
    let samples = TransferSamples::embed(source, target, params)?;
    let counts = JointCounts::from_samples(&samples);
    Ok(InfoResult {
        measure: InfoKind::TransferEntropy,
        value_bits: clamp_nonnegative(counts.conditional_mi()),
        p_value: None,
        n_samples: samples.len(),
        params: *params,
        population_size: 1,
    })
}

/// Same quantity as [`transfer_entropy`], computed as a difference of conditional entropies.
pub fn transfer_entropy_by_entropies<F: Scalar>(
    source: &[u8],
    target: &[u8],
    params: &InfoParams,
) -> Result<InfoResult<F>> {
    let samples = TransferSamples::embed(source, target, params)?;
    let counts = JointCounts::from_samples(&samples);
    Ok(InfoResult {
        measure: InfoKind::TransferEntropy,
        value_bits: clamp_nonnegative(counts.entropy_difference()),
        p_value: None,
        n_samples: samples.len(),
        params: *params,
        population_size: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infodyn::BinarySeries;
    use std::collections::HashMap;

    // Independent oracle: entropies from hash-map histograms in f64.
    fn h<K: std::hash::Hash + Eq>(items: impl Iterator<Item = K>) -> f64 {
        let mut m: HashMap<K, f64> = HashMap::new();
        let mut n = 0.0;
        for k in items {
            *m.entry(k).or_default() += 1.0;
            n += 1.0;
        }
        m.values().map(|&c| -(c / n) * (c / n).log2()).sum()
    }

    fn bits(s: &str) -> Vec<u8> {
        BinarySeries::parse(s).unwrap().into_inner()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy::<f64>(&[4, 4]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(entropy::<f64>(&[8, 0]).unwrap(), 0.0);
        let expected = h([0, 0, 0, 0, 0, 0, 1, 1].into_iter());
        assert!((expected - 0.811278).abs() < 1e-6);
        assert!((entropy::<f64>(&[6, 2]).unwrap() - expected).abs() < 1e-14);
        assert!(entropy::<f64>(&[0, 0]).is_err());
    }

    #[test]
    fn mi_examples() {
        let x = bits("01010101");
        assert!((mutual_information::<f64>(&x, &x, 0).unwrap().value_bits - 1.0).abs() < 1e-12);
        let r = mutual_information::<f64>(&bits("0011"), &bits("0101"), 0).unwrap();
        assert!(r.value_bits.abs() < 1e-12);
    }

    #[test]
    fn delayed_mi_matches_enumeration() {
        // y_t = x_{t-2} (cyclic shift); aligned pairs (x_t, y_{t+2}) are identical.
        let x = bits("00110011");
        let y = bits("11001100");
        let pairs: Vec<(u8, u8)> = (0..6).map(|t| (x[t], y[t + 2])).collect();
        let oracle = h(pairs.iter().map(|p| p.0)) + h(pairs.iter().map(|p| p.1)) - h(pairs.iter().copied());
        assert!((oracle - 0.918296).abs() < 1e-6);
        let r = mutual_information::<f64>(&x, &y, 2).unwrap();
        assert_eq!(r.n_samples, 6);
        assert!((r.value_bits - oracle).abs() < 1e-12);
    }

    #[test]
    fn mi_needs_two_aligned_samples() {
        let x = bits("0101");
        match mutual_information::<f64>(&x, &x, 3) {
            Err(Error::InsufficientSamples { available, .. }) => assert_eq!(available, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ais_examples() {
        let alt = bits("010101010");
        assert!((active_information_storage::<f64>(&alt, 1, 1).unwrap().value_bits - 1.0).abs() < 1e-12);
        let zero = bits("000000000");
        assert_eq!(active_information_storage::<f64>(&zero, 1, 1).unwrap().value_bits, 0.0);

        // enumerate (history, next) for k = 2
        let x = bits("011011011");
        let pairs: Vec<((u8, u8), u8)> = (1..8).map(|n| ((x[n - 1], x[n]), x[n + 1])).collect();
        let oracle = h(pairs.iter().map(|p| p.1)) + h(pairs.iter().map(|p| p.0)) - h(pairs.iter().copied());
        assert!((oracle - 0.863121).abs() < 1e-6);
        let r = active_information_storage::<f64>(&x, 2, 1).unwrap();
        assert_eq!(r.n_samples, 7);
        assert!((r.value_bits - oracle).abs() < 1e-12);
    }

    #[test]
    fn ais_too_short() {
        assert!(active_information_storage::<f64>(&bits("010"), 3, 1).is_err());
        assert!(active_information_storage::<f64>(&bits("010"), 2, 2).is_err());
        assert!(active_information_storage::<f64>(&bits("0101"), 2, 2).is_ok());
    }

    #[test]
    fn te_constant_source_is_zero() {
        let src = bits("1111111111");
        let tgt = bits("0110100110");
        for params in [
            InfoParams { k: 1, l: 1, tau_x: 1, tau_y: 1, u: 1 },
            InfoParams { k: 2, l: 2, tau_x: 1, tau_y: 2, u: 0 },
            InfoParams { k: 3, l: 1, tau_x: 2, tau_y: 1, u: 3 },
        ] {
            assert_eq!(transfer_entropy::<f64>(&src, &tgt, &params).unwrap().value_bits, 0.0);
        }
    }

    #[test]
    fn te_copy_of_full_cycle_source_is_one_bit() {
        // Source walks a binary de Bruijn cycle of order 3; target copies it one step late.
        let y = bits("000101110");
        let x = bits("100010111");
        let p = InfoParams { k: 1, l: 1, tau_x: 1, tau_y: 1, u: 1 };
        // oracle: enumerate (x_{n+1}, x_n, y_n) and evaluate H(X'|X) - H(X'|X,Y)
        let q: Vec<(u8, u8, u8)> = (0..8).map(|n| (x[n + 1], x[n], y[n])).collect();
        let cond = |a: f64, b: f64| a - b;
        let oracle = cond(h(q.iter().map(|t| (t.0, t.1))), h(q.iter().map(|t| t.1)))
            - cond(h(q.iter().copied()), h(q.iter().map(|t| (t.1, t.2))));
        assert!((oracle - 1.0).abs() < 1e-12);
        let r = transfer_entropy::<f64>(&y, &x, &p).unwrap();
        assert_eq!(r.n_samples, 8);
        assert!((r.value_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn te_self_source_on_alternating_series_is_zero() {
        let x = bits("0101010101");
        let p = InfoParams { k: 1, l: 1, tau_x: 1, tau_y: 1, u: 1 };
        let r = transfer_entropy::<f64>(&x, &x, &p).unwrap();
        assert!(r.value_bits.abs() < 1e-12);
    }

    #[test]
    fn te_sample_window_accounts_for_all_lags() {
        let s = bits("0110100110");
        let p = InfoParams { k: 2, l: 2, tau_x: 2, tau_y: 3, u: 2 };
        // first n satisfies n-(k-1)tau_x >= 0 and n+1-u-(l-1)tau_y >= 0 -> n >= 4
        let t = TransferSamples::embed(&s, &s, &p).unwrap();
        assert_eq!(t.len(), 10 - 1 - 4);
        assert!(TransferSamples::embed(&s, &bits("01"), &p).is_err());
        let too_long = InfoParams { k: 10, ..p };
        assert!(matches!(
            TransferSamples::embed(&s, &s, &too_long),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn generic_over_f32() {
        let x = bits("01010101");
        let r = mutual_information::<f32>(&x, &x, 0).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-6);
    }
}
