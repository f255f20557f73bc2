//! Order-k conditional entropy rate of a symbol stream.

use serde::{Deserialize, Serialize};

use crate::experiments::stats::StreamError;
use crate::scalar::Real;
use crate::word::Symbol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextRow<R> {
    pub context: Vec<Symbol>,
    pub count: u64,
    /// Next-symbol distribution given the context; uniform for a context
    /// that never occurs.
    pub probabilities: Vec<R>,
    pub conditional_entropy: R,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport<R> {
    pub order: usize,
    pub mu: usize,
    pub table: Vec<ContextRow<R>>,
    /// Bits per symbol.
    pub entropy_rate: R,
}

pub fn required_length(mu: usize, order: usize) -> usize {
    100usize.saturating_mul(mu.saturating_pow(order as u32 + 1))
}

fn context_index(context: &[Symbol], mu: usize) -> usize {
    context.iter().fold(0, |acc, &s| acc * mu + s as usize)
}

fn context_of(mut index: usize, mu: usize, order: usize) -> Vec<Symbol> {
    let mut out = vec![0; order];
    for slot in out.iter_mut().rev() {
        *slot = (index % mu) as Symbol;
        index /= mu;
    }
    out
}

/// `H = sum_c P(c) H(S | c)` over contexts of length `order`, with
/// maximum-likelihood (relative frequency) probabilities.
pub fn entropy_rate<R: Real>(
    stream: &[Symbol],
    mu: usize,
    order: usize,
) -> Result<EntropyReport<R>, StreamError> {
    let required = required_length(mu, order);
    if stream.len() < required {
        return Err(StreamError::StreamTooShort {
            len: stream.len(),
            required,
        });
    }
    let contexts = mu.pow(order as u32);
    let mut counts = vec![0u64; contexts * mu];
    for window in stream.windows(order + 1) {
        let c = context_index(&window[..order], mu);
        counts[c * mu + window[order] as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mut table = Vec::with_capacity(contexts);
    let mut rate = 0.0f64;
    for c in 0..contexts {
        let row = &counts[c * mu..(c + 1) * mu];
        let n: u64 = row.iter().sum();
        let probs: Vec<f64> = if n == 0 {
            vec![1.0 / mu as f64; mu]
        } else {
            row.iter().map(|&k| k as f64 / n as f64).collect()
        };
        let h: f64 = if n == 0 {
            0.0
        } else {
            probs
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.log2())
                .sum()
        };
        rate += n as f64 / total as f64 * h;
        table.push(ContextRow {
            context: context_of(c, mu, order),
            count: n,
            probabilities: probs.into_iter().map(R::of).collect(),
            conditional_entropy: R::of(h),
        });
    }
    Ok(EntropyReport {
        order,
        mu,
        table,
        entropy_rate: R::of(rate.max(0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_streams_have_zero_entropy() {
        let zeros = vec![0u8; 1000];
        assert_eq!(entropy_rate::<f64>(&zeros, 2, 1).unwrap().entropy_rate, 0.0);
        assert_eq!(entropy_rate::<f64>(&zeros, 2, 0).unwrap().entropy_rate, 0.0);
        let alt: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        assert_eq!(entropy_rate::<f64>(&alt, 2, 1).unwrap().entropy_rate, 0.0);
        assert_eq!(entropy_rate::<f64>(&alt, 2, 0).unwrap().entropy_rate, 1.0);
    }

    #[test]
    fn hand_computed_table() {
        // Pairs of 0011 repeated: 00, 01, 11, 10 equally often.
        let s: Vec<u8> = [0, 0, 1, 1].iter().cycle().take(800).copied().collect();
        let r = entropy_rate::<f64>(&s, 2, 1).unwrap();
        assert!((r.entropy_rate - 1.0).abs() < 1e-2);
        assert_eq!(r.table[0].context, vec![0]);
        let r2 = entropy_rate::<f64>(&s, 2, 2).unwrap();
        assert_eq!(r2.entropy_rate, 0.0);
    }

    #[test]
    fn too_short() {
        assert_eq!(
            entropy_rate::<f64>(&[0; 399], 2, 1).unwrap_err(),
            StreamError::StreamTooShort {
                len: 399,
                required: 400
            }
        );
    }

    #[test]
    fn unseen_context_is_uniform() {
        let zeros = vec![0u8; 1000];
        let r = entropy_rate::<f32>(&zeros, 2, 1).unwrap();
        assert_eq!(r.table[1].count, 0);
        assert_eq!(r.table[1].probabilities, vec![0.5, 0.5]);
    }
}
