//! Prepare-and-measure figures of merit: BB84 error rates and key fraction,
//! MUB-averaged fidelity.

use super::link::{Link, QubitOutcome};
use crate::error::{Error, Result};
use crate::modes::LogicalLabel;

/// Shor-Preskill fidelity threshold for a positive key.
pub const SECURITY_THRESHOLD: f64 = 0.89;

/// `h(x) = -x log₂x - (1-x) log₂(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy needs x in [0, 1], got {x}")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Asymptotic BB84 secret-key fraction `max(0, 1 - h(e_z) - h(e_x))`.
pub fn key_fraction(qber_z: f64, qber_x: f64) -> Result<f64> {
    for (name, q) in [("qber_z", qber_z), ("qber_x", qber_x)] {
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain(format!("{name} must lie in [0, 0.5], got {q}")));
        }
    }
    Ok((1.0 - binary_entropy(qber_z)? - binary_entropy(qber_x)?).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bb84Report {
    /// Conditional fidelities of `0_L, 1_L, +_L, -_L`.
    pub fidelities: [f64; 4],
    pub survivals: [f64; 4],
    pub qber_z: f64,
    pub qber_x: f64,
    pub avg_fidelity: f64,
    pub key_fraction: f64,
    pub secure: bool,
}

impl Bb84Report {
    pub fn from_outcomes(link: &Link, outcomes: &[QubitOutcome; 4]) -> Result<Self> {
        let mut fidelities = [0.0; 4];
        let mut survivals = [0.0; 4];
        for (i, label) in LogicalLabel::BB84.into_iter().enumerate() {
            fidelities[i] = outcomes[i].fidelity(&link.reference(label))?;
            survivals[i] = outcomes[i].survival();
        }
        let qber_z = 1.0 - 0.5 * (fidelities[0] + fidelities[1]);
        let qber_x = 1.0 - 0.5 * (fidelities[2] + fidelities[3]);
        let avg_fidelity = fidelities.iter().sum::<f64>() / 4.0;
        // Error rates above 1/2 carry no more key than 1/2.
        let key_fraction = key_fraction(qber_z.clamp(0.0, 0.5), qber_x.clamp(0.0, 0.5))?;
        Ok(Self {
            fidelities,
            survivals,
            qber_z,
            qber_x,
            avg_fidelity,
            key_fraction,
            secure: avg_fidelity >= SECURITY_THRESHOLD,
        })
    }

    pub fn min_survival(&self) -> f64 {
        self.survivals.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// BB84 with a receiver frame rotated by `theta`.
pub fn bb84_run(link: &Link, theta: f64) -> Result<Bb84Report> {
    bb84_run_per_state(link, [theta; 4])
}

/// BB84 with a separate frame angle for each prepared state.
pub fn bb84_run_per_state(link: &Link, thetas: [f64; 4]) -> Result<Bb84Report> {
    let mut outcomes = [QubitOutcome::from_branches(&[]); 4];
    for (i, label) in LogicalLabel::BB84.into_iter().enumerate() {
        outcomes[i] = link.outcome(label, thetas[i])?;
    }
    Bb84Report::from_outcomes(link, &outcomes)
}

/// BB84 over a session whose frame angle is uniformly mixed over `thetas`.
pub fn bb84_run_mixed(link: &Link, thetas: &[f64]) -> Result<Bb84Report> {
    if thetas.is_empty() {
        return Err(Error::Domain("angle mixture must not be empty".into()));
    }
    let mut outcomes = [QubitOutcome::from_branches(&[]); 4];
    for (i, label) in LogicalLabel::BB84.into_iter().enumerate() {
        let per_theta = thetas.iter().map(|&t| link.outcome(label, t)).collect::<Result<Vec<_>>>()?;
        outcomes[i] = QubitOutcome::mix(&per_theta);
    }
    Bb84Report::from_outcomes(link, &outcomes)
}

/// Mean conditional fidelity over the six MUB eigenstates.
pub fn mub_average_fidelity(link: &Link, theta: f64) -> Result<f64> {
    Ok(mub_fidelities(link, theta)?.iter().map(|(f, _)| f).sum::<f64>() / 6.0)
}

/// `(fidelity, survival)` of each MUB eigenstate, in [`LogicalLabel::MUB`] order.
pub fn mub_fidelities(link: &Link, theta: f64) -> Result<[(f64, f64); 6]> {
    let mut out = [(0.0, 0.0); 6];
    for (i, label) in LogicalLabel::MUB.into_iter().enumerate() {
        let o = link.outcome(label, theta)?;
        out[i] = (o.fidelity(&link.reference(label))?, o.survival());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::make_basis;
    use crate::protocols::Encoding;
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.041).unwrap() - 0.2468585146603582).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn key_fraction_values() {
        assert_eq!(key_fraction(0.0, 0.0).unwrap(), 1.0);
        let r = key_fraction(0.0065, 0.041).unwrap();
        assert!((r - 0.697).abs() < 0.01, "{r}");
        let near = 1.0 - 2.0 * binary_entropy(0.11).unwrap();
        assert!((key_fraction(0.11, 0.11).unwrap() - near.max(0.0)).abs() < 1e-15);
        assert!(near.abs() < 1e-3);
        assert_eq!(key_fraction(0.2, 0.2).unwrap(), 0.0);
        assert!(key_fraction(0.6, 0.0).is_err());
    }

    #[test]
    fn polarization_bb84_follows_cos_squared() {
        let link = Link::ideal(Encoding::Polarization, &make_basis(2, 2, 1.0, 1.0).unwrap());
        let r = bb84_run(&link, 20f64.to_radians()).unwrap();
        assert!((r.avg_fidelity - 20f64.to_radians().cos().powi(2)).abs() < 1e-12);
        assert!(!r.secure);
        let r0 = bb84_run(&link, 0.0).unwrap();
        assert!((r0.avg_fidelity - 1.0).abs() < 1e-12 && r0.secure);
    }

    #[test]
    fn hybrid_bb84_is_flat() {
        let link = Link::ideal(Encoding::Hybrid, &make_basis(2, 3, 1.0, 1.0).unwrap());
        let r = bb84_run(&link, 73f64.to_radians()).unwrap();
        assert!(r.fidelities.iter().all(|f| (f - 1.0).abs() < 1e-12));
        assert!(r.qber_z.abs() < 1e-12 && r.qber_x.abs() < 1e-12 && r.secure);
    }

    proptest! {
        #[test]
        fn key_fraction_is_monotone(a in 0.0..0.5f64, b in 0.0..0.5f64, d in 0.0..0.5f64) {
            let hi = (a + d).min(0.5);
            prop_assert!(key_fraction(hi, b).unwrap() <= key_fraction(a, b).unwrap() + 1e-15);
            prop_assert!(key_fraction(b, hi).unwrap() <= key_fraction(b, a).unwrap() + 1e-15);
        }
    }
}
