//! Dynamic block state selection: grow the kept-state count until the
//! entropy lost to truncation drops below the a-priori bound χ.

use serde::{Deserialize, Serialize};

use crate::entanglement::entropy_of_spectrum;

use super::SweepConfig;

/// Eigenvalues of a reduced block density matrix at one cut, sorted
/// non-increasing and normalized to unit sum (the squared Schmidt
/// coefficients).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub weights: Vec<f64>,
    pub cut_position: usize,
}

impl SchmidtSpectrum {
    pub fn new(mut weights: Vec<f64>, cut_position: usize) -> Self {
        for w in &mut weights {
            if *w < 0.0 {
                debug_assert!(*w > -1e-10, "density matrix eigenvalue {w}");
                *w = 0.0;
            }
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        Self {
            weights,
            cut_position,
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.weights)
    }
}

/// Outcome of one DBSS decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub cut_position: usize,
    /// States retained.
    pub kept: usize,
    /// States available before truncation (enlarged block dimension).
    pub m_used: usize,
    pub entropy_before: f64,
    /// Entropy of the kept, unrenormalized weights.
    pub entropy_after: f64,
    /// entropy_before - entropy_after; below χ unless `clamped`.
    pub info_loss: f64,
    /// Kept count was forced down by the hard ceiling m_cap.
    pub clamped: bool,
}

/// Chooses the kept-state count: the smallest m whose kept-weight entropy is
/// within χ of the full entropy, floored by m_min, with degenerate multiplets
/// at the boundary kept whole, and finally clamped by the hard cap.
pub fn dbss_truncate(spectrum: &SchmidtSpectrum, cfg: &SweepConfig) -> TruncationRecord {
    let w = &spectrum.weights;
    let available = w.len();
    let entropy_before = entropy_of_spectrum(w);

    let mut kept = available.max(1);
    let mut partial = 0.0;
    for (m, &wi) in w.iter().enumerate() {
        if wi > 1e-300 {
            partial -= wi * wi.ln();
        }
        if partial >= entropy_before - cfg.chi {
            kept = m + 1;
            break;
        }
    }
    kept = kept.max(cfg.m_min.min(available));
    // Never split a degenerate multiplet across the kept/discarded boundary.
    while kept < available && w[kept] > 0.0 && (w[kept - 1] - w[kept]).abs() <= 1e-12 {
        kept += 1;
    }
    let clamped = kept > cfg.m_cap;
    if clamped {
        kept = cfg.m_cap;
    }
    let entropy_after = entropy_of_spectrum(&w[..kept]);
    TruncationRecord {
        cut_position: spectrum.cut_position,
        kept,
        m_used: available,
        entropy_before,
        entropy_after,
        info_loss: (entropy_before - entropy_after).max(0.0),
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(chi: f64, m_min: usize, m_cap: usize) -> SweepConfig {
        SweepConfig {
            chi,
            m_min,
            m_cap,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn floor_forced_keep() {
        let s = SchmidtSpectrum::new(vec![1.0, 0.0, 0.0, 0.0], 1);
        let r = dbss_truncate(&s, &cfg(1e-4, 2, 1000));
        assert_eq!(r.kept, 2);
        assert_eq!(r.info_loss, 0.0);
        assert!(!r.clamped);
    }

    #[test]
    fn uniform_spectrum_keeps_everything() {
        let s = SchmidtSpectrum::new(vec![0.125; 8], 3);
        let r = dbss_truncate(&s, &cfg(1e-6, 1, 1000));
        assert_eq!(r.kept, 8);
        assert!(r.info_loss < 1e-6);
    }

    #[test]
    fn geometric_spectrum_matches_scalar_scan() {
        // w_i ∝ 2^-i over 20 states; expected kept found by brute force over
        // the partial entropy sums.
        let chi = 1e-4;
        let raw: Vec<f64> = (0..20).map(|i| 0.5f64.powi(i)).collect();
        let norm: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let full = entropy_of_spectrum(&w);
        let mut expected = 20;
        for m in 1..=20 {
            if entropy_of_spectrum(&w[..m]) >= full - chi {
                expected = m;
                break;
            }
        }
        assert!(expected < 20, "test spectrum must truncate");
        let s = SchmidtSpectrum::new(w, 0);
        let r = dbss_truncate(&s, &cfg(chi, 1, 1000));
        assert_eq!(r.kept, expected);
        assert!(r.info_loss < chi);
    }

    #[test]
    fn degenerate_multiplet_not_split() {
        let mut w = vec![0.4, 0.2, 0.2, 0.1, 0.1];
        let norm: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= norm);
        let s = SchmidtSpectrum::new(w, 0);
        // m_min = 2 would split the 0.2-pair; expansion keeps it whole.
        let r = dbss_truncate(&s, &cfg(1e+1, 2, 1000));
        assert_eq!(r.kept, 3);
    }

    #[test]
    fn cap_clamps_and_flags() {
        let s = SchmidtSpectrum::new(vec![0.25; 4], 0);
        let r = dbss_truncate(&s, &cfg(1e-8, 1, 2));
        assert_eq!(r.kept, 2);
        assert!(r.clamped);
        assert!(r.info_loss > 0.0);
    }
}
