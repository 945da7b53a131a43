use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nominal-pi cable segment: series `r + jx`, shunt `j * b_half` at each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiSection {
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
}

impl PiSection {
    pub fn new(r: f64, x: f64, b_half: f64) -> Result<Self> {
        if r >= 0.0 && x > 0.0 && b_half >= 0.0 {
            Ok(Self { r, x, b_half })
        } else {
            Err(Error::InvalidParameter(format!(
                "pi section r = {r}, x = {x}, b_half = {b_half}"
            )))
        }
    }
}

/// Split a cable with totals `r`, `x`, `b` into `n_sections` equal pi sections.
pub fn build_hvac_cable(r: f64, x: f64, b: f64, n_sections: usize) -> Result<Vec<PiSection>> {
    if n_sections == 0 {
        return Err(Error::InvalidParameter("cable needs at least one section".into()));
    }
    let n = n_sections as f64;
    let s = PiSection::new(r / n, x / n, b / (2.0 * n))?;
    Ok(vec![s; n_sections])
}

/// Series branch with lumped shunt charging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectorBranch {
    pub z: Complex64,
    /// Total shunt susceptance of the branch.
    pub b: f64,
    /// Rating carried by the branch [MVA].
    pub rating_mva: f64,
}

/// Equivalent of parallel collector feeders, all on one common base.
///
/// Series impedance is weighted by the squared rating share so that copper
/// losses at full dispatch are preserved; charging is summed.
pub fn aggregate_collector(strings: &[CollectorBranch]) -> Result<CollectorBranch> {
    if strings.is_empty() {
        return Err(Error::InvalidParameter("no collector strings".into()));
    }
    let total: f64 = strings.iter().map(|s| s.rating_mva).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("zero total collector rating".into()));
    }
    let z = strings
        .iter()
        .map(|s| s.z * (s.rating_mva / total).powi(2))
        .sum();
    Ok(CollectorBranch {
        z,
        b: strings.iter().map(|s| s.b).sum(),
        rating_mva: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn branch(r: f64, x: f64, rating: f64) -> CollectorBranch {
        CollectorBranch {
            z: Complex64::new(r, x),
            b: 0.01,
            rating_mva: rating,
        }
    }

    #[test]
    fn single_section_keeps_totals() {
        let s = build_hvac_cable(0.01, 0.2, 0.1, 1).unwrap();
        assert_eq!(s, vec![PiSection::new(0.01, 0.2, 0.05).unwrap()]);
        assert!(build_hvac_cable(0.01, 0.2, 0.1, 0).is_err());
    }

    #[test]
    fn ten_sections_dc_resistance() {
        let s = build_hvac_cable(0.0123, 0.2, 0.1, 10).unwrap();
        // At dc, inductors short and capacitors open: series r only.
        let r: f64 = s.iter().map(|p| p.r).sum();
        assert_relative_eq!(r, 0.0123, max_relative = 1e-14);
        let b: f64 = s.iter().map(|p| 2.0 * p.b_half).sum();
        assert_relative_eq!(b, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn aggregation_cases() {
        let one = branch(0.01, 0.1, 60.0);
        assert_eq!(aggregate_collector(&[one]).unwrap().z, one.z);

        let seven = vec![one; 7];
        let eq = aggregate_collector(&seven).unwrap();
        assert_relative_eq!(eq.z.re, 0.01 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(eq.z.im, 0.1 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(eq.b, 0.07, max_relative = 1e-14);

        assert!(aggregate_collector(&[]).is_err());
        assert!(aggregate_collector(&[branch(0.1, 0.1, 0.0)]).is_err());
    }

    #[test]
    fn aggregation_preserves_losses() {
        // Two equally rated feeders at rated current I each; common base.
        let a = CollectorBranch { z: Complex64::new(0.1, 0.0), b: 0.0, rating_mva: 1.0 };
        let b = CollectorBranch { z: Complex64::new(0.2, 0.0), b: 0.0, rating_mva: 1.0 };
        let eq = aggregate_collector(&[a, b]).unwrap();
        assert_relative_eq!(eq.z.re, 0.075, max_relative = 1e-14);
        // Brute force: each feeder carries half of total current 2 pu.
        let i_each = 1.0;
        let loss_detail = a.z.re * i_each * i_each + b.z.re * i_each * i_each;
        let loss_eq = eq.z.re * (2.0 * i_each) * (2.0 * i_each);
        assert_relative_eq!(loss_detail, loss_eq, max_relative = 1e-14);
    }
}
