//! Binary-stream randomness battery: monobit frequency, Wald-Wolfowitz
//! runs, block frequency and non-overlapping 2-gram chi-square tests.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::scalar::Real;
use crate::word::Symbol;

pub const MIN_STREAM: usize = 10_000;
pub const ALPHA: f64 = 0.01;
pub const BLOCK: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("stream of {len} symbols is shorter than the required {required}")]
    StreamTooShort { len: usize, required: usize },
    #[error("stream contains symbol {0}; the battery needs a binary stream")]
    NotBinary(Symbol),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    Monobit,
    Runs,
    BlockFrequency,
    Serial,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [
        TestKind::Monobit,
        TestKind::Runs,
        TestKind::BlockFrequency,
        TestKind::Serial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Monobit => "monobit",
            TestKind::Runs => "runs",
            TestKind::BlockFrequency => "block_frequency",
            TestKind::Serial => "serial",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult<R> {
    pub test: TestKind,
    pub statistic: R,
    pub p_value: R,
    pub alpha: R,
    pub pass: bool,
}

fn verdict<R: Real>(test: TestKind, statistic: f64, p_value: f64) -> TestResult<R> {
    TestResult {
        test,
        statistic: R::of(statistic),
        p_value: R::of(p_value),
        alpha: R::of(ALPHA),
        pass: p_value >= ALPHA,
    }
}

/// `Q(a, x)` extended to `x = 0` and `x = inf`.
fn upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(a, x)
    }
}

pub fn monobit<R: Real>(bits: &[Symbol]) -> TestResult<R> {
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b == 1).count() as f64;
    let s = 2.0 * ones - n;
    let s_obs = s.abs() / n.sqrt();
    verdict(
        TestKind::Monobit,
        s_obs,
        erfc(s_obs / std::f64::consts::SQRT_2),
    )
}

/// Two-sided z-test on the number of runs; a stream with one symbol class
/// has zero variance and fails outright.
pub fn runs<R: Real>(bits: &[Symbol]) -> TestResult<R> {
    let n = bits.len() as f64;
    let n1 = bits.iter().filter(|&&b| b == 1).count() as f64;
    let n0 = n - n1;
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let mean = 2.0 * n0 * n1 / n + 1.0;
    let var = (mean - 1.0) * (mean - 2.0) / (n - 1.0);
    if var <= 0.0 {
        return verdict(TestKind::Runs, f64::INFINITY, 0.0);
    }
    let z = (runs as f64 - mean) / var.sqrt();
    verdict(TestKind::Runs, z, erfc(z.abs() / std::f64::consts::SQRT_2))
}

pub fn block_frequency<R: Real>(bits: &[Symbol]) -> TestResult<R> {
    let blocks = bits.len() / BLOCK;
    let chi2: f64 = bits
        .chunks_exact(BLOCK)
        .map(|b| {
            let pi = b.iter().filter(|&&x| x == 1).count() as f64 / BLOCK as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * BLOCK as f64;
    verdict(
        TestKind::BlockFrequency,
        chi2,
        upper_gamma(blocks as f64 / 2.0, chi2 / 2.0),
    )
}

/// Chi-square over the four non-overlapping 2-grams, 3 degrees of freedom.
pub fn serial<R: Real>(bits: &[Symbol]) -> TestResult<R> {
    let mut counts = [0u64; 4];
    for pair in bits.chunks_exact(2) {
        counts[(pair[0] * 2 + pair[1]) as usize] += 1;
    }
    let pairs = (bits.len() / 2) as f64;
    let expected = pairs / 4.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    verdict(TestKind::Serial, chi2, upper_gamma(1.5, chi2 / 2.0))
}

pub fn check_binary(bits: &[Symbol]) -> Result<(), StreamError> {
    if bits.len() < MIN_STREAM {
        return Err(StreamError::StreamTooShort {
            len: bits.len(),
            required: MIN_STREAM,
        });
    }
    match bits.iter().find(|&&b| b > 1) {
        Some(&b) => Err(StreamError::NotBinary(b)),
        None => Ok(()),
    }
}

/// All four tests, in [`TestKind::ALL`] order.
pub fn battery<R: Real>(bits: &[Symbol]) -> Result<Vec<TestResult<R>>, StreamError> {
    check_binary(bits)?;
    Ok(vec![
        monobit(bits),
        runs(bits),
        block_frequency(bits),
        serial(bits),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_streams() {
        let zeros = vec![0u8; 20_000];
        let r = battery::<f64>(&zeros).unwrap();
        assert!(!r[0].pass);
        let alt: Vec<u8> = (0..20_000).map(|i| (i % 2) as u8).collect();
        let r = battery::<f64>(&alt).unwrap();
        assert!(r[0].pass);
        assert_eq!(r[0].p_value, 1.0);
        assert!(!r[1].pass);
    }

    #[test]
    fn monobit_matches_reference_example() {
        // 1011010101: S = 2, s_obs = 0.632455532, p = 0.527089.
        let bits = [1, 0, 1, 1, 0, 1, 0, 1, 0, 1];
        let r = monobit::<f64>(&bits);
        assert!((r.statistic - 0.632455532).abs() < 1e-8);
        assert!((r.p_value - 0.527089).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert_eq!(
            battery::<f64>(&[0; 10]).unwrap_err(),
            StreamError::StreamTooShort {
                len: 10,
                required: MIN_STREAM
            }
        );
        let mut s = vec![0u8; MIN_STREAM];
        s[5] = 2;
        assert_eq!(battery::<f64>(&s).unwrap_err(), StreamError::NotBinary(2));
    }

    #[test]
    fn single_precision_agrees() {
        let bits: Vec<u8> = (0..30_000u32)
            .map(|i| ((i.wrapping_mul(2654435761) >> 13) & 1) as u8)
            .collect();
        let a = battery::<f64>(&bits).unwrap();
        let b = battery::<f32>(&bits).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pass, y.pass);
            assert!((x.p_value as f32 - y.p_value).abs() < 1e-5);
        }
    }
}
