use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use serde::{Deserialize, Serialize};

use super::tables;
use crate::{Error, Result};

const QMF_TOLERANCE: f64 = 1e-10;
const DC_GAIN_TOLERANCE: f64 = 1e-8;

/// An orthogonal two-channel filter bank.
///
/// The high-pass analysis filter is the alternating-flip of the low-pass one,
/// `high[k] = (-1)^k * low[len - 1 - k]`, and synthesis filters are the
/// time reversals of the analysis filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletFilterBank {
    pub name: String,
    pub analysis_low: Vec<f64>,
    pub analysis_high: Vec<f64>,
    pub synthesis_low: Vec<f64>,
    pub synthesis_high: Vec<f64>,
}

impl WaveletFilterBank {
    /// Builds the full bank from an orthogonal low-pass filter.
    pub fn from_low_pass(name: &str, low: &[f64]) -> Result<Self> {
        let len = low.len();
        let high: Vec<f64> = (0..len)
            .map(|k| if k % 2 == 0 { low[len - 1 - k] } else { -low[len - 1 - k] })
            .collect();
        let bank = Self {
            name: name.to_string(),
            synthesis_low: low.iter().rev().copied().collect(),
            synthesis_high: high.iter().rev().copied().collect(),
            analysis_low: low.to_vec(),
            analysis_high: high,
        };
        bank.validate()?;
        Ok(bank)
    }

    pub fn haar() -> Self {
        let c = core::f64::consts::FRAC_1_SQRT_2;
        Self::from_low_pass("haar", &[c, c]).expect("haar bank is valid")
    }

    /// Daubechies wavelet with `order` vanishing moments, `2..=10` (1 is Haar).
    pub fn daubechies(order: usize) -> Result<Self> {
        let taps: &[f64] = match order {
            1 => return Ok(Self { name: "db1".into(), ..Self::haar() }),
            2 => &tables::DB2,
            3 => &tables::DB3,
            4 => &tables::DB4,
            5 => &tables::DB5,
            6 => &tables::DB6,
            7 => &tables::DB7,
            8 => &tables::DB8,
            9 => &tables::DB9,
            10 => &tables::DB10,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "daubechies order {order} not shipped (available: 1..=10)"
                )))
            }
        };
        Self::from_low_pass(&format!("db{order}"), taps)
    }

    /// 62-tap discrete Meyer approximation.
    ///
    /// The taps are the usual FIR truncation of the Meyer scaling filter,
    /// re-projected onto the set of exactly orthogonal filters so that the
    /// bank reconstructs perfectly (the raw truncation is off by ~2e-3 in norm).
    pub fn dmey() -> Self {
        Self::from_low_pass("dmey", &tables::DMEY).expect("dmey bank is valid")
    }

    /// Looks up a shipped bank: `haar`, `db1`..`db10`, `dmey`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" => Ok(Self::haar()),
            "dmey" => Ok(Self::dmey()),
            _ => match name.strip_prefix("db").and_then(|n| n.parse::<usize>().ok()) {
                Some(order) => Self::daubechies(order),
                None => Err(Error::InvalidInput(format!(
                    "unknown wavelet `{name}` (expected haar, db1..db10, dmey)"
                ))),
            },
        }
    }

    pub fn shipped_names() -> &'static [&'static str] {
        &["haar", "db2", "db3", "db4", "db5", "db6", "db7", "db8", "db9", "db10", "dmey"]
    }

    pub fn taps(&self) -> usize {
        self.analysis_low.len()
    }

    /// Checks the orthogonal QMF relations, unit DC gain `sqrt(2)`, and
    /// synthesis/analysis time reversal.
    pub fn validate(&self) -> Result<()> {
        let len = self.analysis_low.len();
        if len < 2 || len % 2 != 0 {
            return Err(Error::InvalidFilterBank(format!(
                "filters must have an even number of taps >= 2, got {len}"
            )));
        }
        for (label, f) in [
            ("analysis_high", &self.analysis_high),
            ("synthesis_low", &self.synthesis_low),
            ("synthesis_high", &self.synthesis_high),
        ] {
            if f.len() != len {
                return Err(Error::InvalidFilterBank(format!(
                    "{label} has {} taps, analysis_low has {len}",
                    f.len()
                )));
            }
        }
        let all = [&self.analysis_low, &self.analysis_high, &self.synthesis_low, &self.synthesis_high];
        if all.iter().any(|f| f.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidFilterBank("non-finite coefficient".into()));
        }
        for k in 0..len {
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } * self.analysis_low[len - 1 - k];
            if (self.analysis_high[k] - expected).abs() > QMF_TOLERANCE {
                return Err(Error::InvalidFilterBank(format!(
                    "QMF relation violated at tap {k}: high = {}, expected {expected}",
                    self.analysis_high[k]
                )));
            }
            if (self.synthesis_low[k] - self.analysis_low[len - 1 - k]).abs() > QMF_TOLERANCE
                || (self.synthesis_high[k] - self.analysis_high[len - 1 - k]).abs() > QMF_TOLERANCE
            {
                return Err(Error::InvalidFilterBank(format!(
                    "synthesis filters must be time-reversed analysis filters (tap {k})"
                )));
            }
        }
        let dc: f64 = self.analysis_low.iter().sum();
        if (dc - core::f64::consts::SQRT_2).abs() > DC_GAIN_TOLERANCE {
            return Err(Error::InvalidFilterBank(format!(
                "low-pass taps sum to {dc}, expected sqrt(2)"
            )));
        }
        // Double-shift orthonormality of the low-pass filter.
        for shift in (0..len).step_by(2) {
            let acc: f64 = (0..len - shift)
                .map(|k| self.analysis_low[k] * self.analysis_low[k + shift])
                .sum();
            let target = if shift == 0 { 1.0 } else { 0.0 };
            if (acc - target).abs() > QMF_TOLERANCE {
                return Err(Error::InvalidFilterBank(format!(
                    "low-pass filter is not orthogonal to its shift by {shift} (inner product {acc})"
                )));
            }
        }
        Ok(())
    }

    /// Parses the four-line text format: analysis low, analysis high,
    /// synthesis low, synthesis high, each a whitespace-separated list of
    /// decimals. Blank lines and `#` comments are skipped.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(4);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidFilterBank(format!(
                            "line {}: cannot parse `{tok}` as a number",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.len() != 4 {
            return Err(Error::InvalidFilterBank(format!(
                "expected 4 filter lines, found {}",
                rows.len()
            )));
        }
        let mut it = rows.into_iter();
        let bank = Self {
            name: name.to_string(),
            analysis_low: it.next().unwrap_or_default(),
            analysis_high: it.next().unwrap_or_default(),
            synthesis_low: it.next().unwrap_or_default(),
            synthesis_high: it.next().unwrap_or_default(),
        };
        bank.validate()?;
        Ok(bank)
    }

    /// Inverse of [`from_text`](Self::from_text), shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in [&self.analysis_low, &self.analysis_high, &self.synthesis_low, &self.synthesis_high] {
            let line: Vec<String> = f.iter().map(|c| format!("{c:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_bank_satisfies_invariants() {
        for name in WaveletFilterBank::shipped_names() {
            let bank = WaveletFilterBank::by_name(name).unwrap();
            bank.validate().unwrap();
            let dc: f64 = bank.analysis_low.iter().sum();
            assert!((dc - core::f64::consts::SQRT_2).abs() < 1e-8, "{name}");
        }
    }

    #[test]
    fn dmey_has_62_taps() {
        assert_eq!(WaveletFilterBank::dmey().taps(), 62);
    }

    #[test]
    fn db_orders_have_2n_taps() {
        for n in 2..=10 {
            assert_eq!(WaveletFilterBank::daubechies(n).unwrap().taps(), 2 * n);
        }
        assert!(WaveletFilterBank::daubechies(11).is_err());
        assert!(WaveletFilterBank::by_name("sym4").is_err());
    }

    #[test]
    fn text_round_trip() {
        let bank = WaveletFilterBank::daubechies(4).unwrap();
        let parsed = WaveletFilterBank::from_text("db4", &bank.to_text()).unwrap();
        assert_eq!(parsed, bank);
    }

    #[test]
    fn text_rejects_broken_qmf() {
        let mut bank = WaveletFilterBank::daubechies(3).unwrap();
        bank.analysis_high[1] += 1e-3;
        let err = WaveletFilterBank::from_text("bad", &bank.to_text()).unwrap_err();
        assert!(matches!(err, Error::InvalidFilterBank(_)));
        assert!(WaveletFilterBank::from_text("short", "1 2\n3 4\n").is_err());
        assert!(WaveletFilterBank::from_text("nan", "a b\nc d\ne f\ng h\n").is_err());
    }

    #[test]
    fn non_orthogonal_low_pass_rejected() {
        // Sums to sqrt(2) but is not orthogonal to its double shift.
        let s = core::f64::consts::SQRT_2;
        let err = WaveletFilterBank::from_low_pass("x", &[s / 4.0, s / 4.0, s / 4.0, s / 4.0]);
        assert!(err.is_err());
    }
}
