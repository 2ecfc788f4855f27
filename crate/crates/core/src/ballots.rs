//! Ballot descriptions and their realization as density operators.
//!
//! Single-voter specs (`classical`, `probabilistic`, `pure`, `mixed`) carry
//! no voter index: [`realize`] hands them, in order, to the voters that no
//! `joint` spec claims, lowest index first.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{
    partial_trace, pure_to_density, qubit_cap, winning_probability, DensityOperator, PureState,
};
use crate::error::{QvoteError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedComponent {
    pub weight: f64,
    pub amplitudes: Vec<Complex64>,
}

/// A voter's ballot, before realization. Complex amplitudes serialize as
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BallotSpec {
    /// `|0><0|` (disagree) or `|1><1|` (agree).
    Classical { bit: u8 },
    /// Canonical pure encoding of a preference `r`.
    Probabilistic { r: f64 },
    Pure { amplitudes: Vec<Complex64> },
    Mixed { components: Vec<MixedComponent> },
    /// One state shared by several voters; qubit `j` belongs to `slots[j]`
    /// (1-based voter indices).
    Joint { slots: Vec<usize>, amplitudes: Vec<Complex64> },
}

impl BallotSpec {
    pub fn classical(bit: u8) -> Self {
        BallotSpec::Classical { bit }
    }

    pub fn probabilistic(r: f64) -> Self {
        BallotSpec::Probabilistic { r }
    }

    pub fn pure(zero: Complex64, one: Complex64) -> Self {
        BallotSpec::Pure { amplitudes: vec![zero, one] }
    }

    /// Classical mixture `(1-r)|0><0| + r|1><1|`.
    pub fn classical_mixture(r: f64) -> Self {
        let re = |x: f64| Complex64::new(x, 0.0);
        BallotSpec::Mixed {
            components: vec![
                MixedComponent { weight: 1.0 - r, amplitudes: vec![re(1.0), re(0.0)] },
                MixedComponent { weight: r, amplitudes: vec![re(0.0), re(1.0)] },
            ],
        }
    }

    pub fn joint(slots: Vec<usize>, amplitudes: Vec<Complex64>) -> Self {
        BallotSpec::Joint { slots, amplitudes }
    }

    /// Number of voters this spec covers.
    pub fn width(&self) -> usize {
        match self {
            BallotSpec::Joint { slots, .. } => slots.len(),
            _ => 1,
        }
    }

    /// The density operator this spec describes.
    pub fn to_density(&self) -> Result<DensityOperator> {
        match self {
            BallotSpec::Classical { bit } => match bit {
                0 | 1 => DensityOperator::basis(1, usize::from(*bit)),
                other => Err(QvoteError::Domain(format!("classical ballot bit must be 0 or 1, got {other}"))),
            },
            BallotSpec::Probabilistic { r } => canonical_ballot(*r),
            BallotSpec::Pure { amplitudes } => {
                if amplitudes.len() != 2 {
                    return Err(QvoteError::Validation(format!(
                        "pure ballot needs 2 amplitudes, got {}",
                        amplitudes.len()
                    )));
                }
                Ok(pure_to_density(&normalized(amplitudes.clone())?))
            }
            BallotSpec::Mixed { components } => {
                let mut parts = Vec::with_capacity(components.len());
                for comp in components {
                    if comp.amplitudes.len() != 2 {
                        return Err(QvoteError::Validation(
                            "mixed ballot components must be single-qubit states".into(),
                        ));
                    }
                    parts.push((comp.weight, pure_to_density(&normalized(comp.amplitudes.clone())?)));
                }
                DensityOperator::mixture(&parts)
            }
            BallotSpec::Joint { slots, amplitudes } => {
                if slots.is_empty() {
                    return Err(QvoteError::Validation("joint ballot with no slots".into()));
                }
                if slots.len() > qubit_cap() {
                    return Err(QvoteError::Capacity { qubits: slots.len(), cap: qubit_cap() });
                }
                if amplitudes.len() != 1 << slots.len() {
                    return Err(QvoteError::Validation(format!(
                        "joint ballot over {} slots needs {} amplitudes, got {}",
                        slots.len(),
                        1usize << slots.len(),
                        amplitudes.len()
                    )));
                }
                Ok(pure_to_density(&normalized(amplitudes.clone())?))
            }
        }
    }
}

fn normalized(amplitudes: Vec<Complex64>) -> Result<PureState> {
    PureState::new(amplitudes).map_err(|e| match e {
        QvoteError::Normalization { norm_sq } => {
            QvoteError::Validation(format!("ballot amplitudes have squared norm {norm_sq}, expected 1"))
        }
        other => other,
    })
}

/// `Θ_r = |θ_r><θ_r|` with `|θ_r> = sqrt(1-r)|0> + sqrt(r)|1>`.
pub fn canonical_ballot(r: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&r) {
        return Err(QvoteError::Domain(format!("preference {r} is outside [0, 1]")));
    }
    let psi = PureState::new(vec![
        Complex64::new((1.0 - r).sqrt(), 0.0),
        Complex64::new(r.sqrt(), 0.0),
    ])?;
    Ok(pure_to_density(&psi))
}

/// `(|00> + |11>)/sqrt(2)` shared by voters 1 and 2.
pub fn bell_ballot() -> BallotSpec {
    bell_ballot_on(1, 2)
}

/// The Bell ballot on an arbitrary pair of voters.
pub fn bell_ballot_on(first: usize, second: usize) -> BallotSpec {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::default();
    BallotSpec::joint(vec![first, second], vec![s, z, z, s])
}

/// One realized operator and the voters (in qubit order) who share it.
#[derive(Debug, Clone, PartialEq)]
pub struct BallotGroup {
    voters: Vec<usize>,
    state: DensityOperator,
}

impl BallotGroup {
    pub fn voters(&self) -> &[usize] {
        &self.voters
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn is_joint(&self) -> bool {
        self.voters.len() > 1
    }
}

/// Realized ballots for voters `1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallotAssignment {
    groups: Vec<BallotGroup>,
    group_of: Vec<usize>,
}

impl BallotAssignment {
    /// Product assignment from one single-qubit operator per voter.
    pub fn from_product(states: Vec<DensityOperator>) -> Result<Self> {
        if states.is_empty() {
            return Err(QvoteError::Config("an election needs at least one voter".into()));
        }
        let mut groups = Vec::with_capacity(states.len());
        for (i, state) in states.into_iter().enumerate() {
            if state.num_qubits() != 1 {
                return Err(QvoteError::Shape(format!("voter {} ballot is not a single qubit", i + 1)));
            }
            groups.push(BallotGroup { voters: vec![i + 1], state });
        }
        let group_of = (0..groups.len()).collect();
        Ok(Self { groups, group_of })
    }

    pub fn voter_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn groups(&self) -> &[BallotGroup] {
        &self.groups
    }

    /// The group holding `voter` (1-based).
    pub fn group_of(&self, voter: usize) -> Result<&BallotGroup> {
        voter
            .checked_sub(1)
            .and_then(|i| self.group_of.get(i))
            .map(|&g| &self.groups[g])
            .ok_or_else(|| QvoteError::Evaluation(format!("no voter v{voter} in this election")))
    }

    pub fn has_joint(&self) -> bool {
        self.groups.iter().any(BallotGroup::is_joint)
    }

    /// Reduced single-qubit state of one voter.
    pub fn reduced(&self, voter: usize) -> Result<DensityOperator> {
        let group = self.group_of(voter)?;
        if !group.is_joint() {
            return Ok(group.state.clone());
        }
        let own = group.voters.iter().position(|&v| v == voter).expect("voter is in its group");
        let others: Vec<usize> = (0..group.voters.len()).filter(|&q| q != own).collect();
        partial_trace(&group.state, &others)
    }

    /// Per-voter winning probabilities, or an error if any ballot is joint.
    pub fn winning_probabilities(&self) -> Result<Vec<f64>> {
        if self.has_joint() {
            return Err(QvoteError::Unsupported(
                "winning probabilities of entangled ballots do not factor per voter".into(),
            ));
        }
        (1..=self.voter_count())
            .map(|v| winning_probability(self.group_of(v)?.state()))
            .collect()
    }
}

/// Materializes `specs` for an election with `m` voters.
pub fn realize(specs: &[BallotSpec], m: usize) -> Result<BallotAssignment> {
    if m == 0 {
        return Err(QvoteError::Config("an election needs at least one voter".into()));
    }
    let mut claimed = vec![false; m];
    for spec in specs {
        if let BallotSpec::Joint { slots, .. } = spec {
            for &v in slots {
                if v == 0 || v > m {
                    return Err(QvoteError::Config(format!(
                        "joint ballot slot v{v} is outside v1..v{m}"
                    )));
                }
                if claimed[v - 1] {
                    return Err(QvoteError::Config(format!("voter v{v} appears in two ballots")));
                }
                claimed[v - 1] = true;
            }
        }
    }
    let mut free = (1..=m).filter(|v| !claimed[v - 1]);
    let mut groups = Vec::with_capacity(specs.len());
    let mut group_of = vec![usize::MAX; m];
    for spec in specs {
        let voters = match spec {
            BallotSpec::Joint { slots, .. } => slots.clone(),
            _ => vec![free.next().ok_or_else(|| {
                QvoteError::Config(format!("more ballots than the {m} voters"))
            })?],
        };
        let state = spec.to_density()?;
        for &v in &voters {
            group_of[v - 1] = groups.len();
        }
        groups.push(BallotGroup { voters, state });
    }
    if let Some(missing) = group_of.iter().position(|&g| g == usize::MAX) {
        return Err(QvoteError::Config(format!("voter v{} has no ballot", missing + 1)));
    }
    Ok(BallotAssignment { groups, group_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::tensor;
    use crate::qlogic::{quantum_and, quantum_or};

    fn wp(rho: &DensityOperator) -> f64 {
        winning_probability(rho).unwrap()
    }

    #[test]
    fn canonical_endpoints_and_value() {
        let zero = canonical_ballot(0.0).unwrap();
        assert!(zero.max_abs_diff(&DensityOperator::basis(1, 0).unwrap()) < 1e-15);
        let one = canonical_ballot(1.0).unwrap();
        assert!(one.max_abs_diff(&DensityOperator::basis(1, 1).unwrap()) < 1e-15);
        assert!((wp(&canonical_ballot(0.6).unwrap()) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn canonical_grid() {
        for i in 0..=100 {
            let r = f64::from(i) / 100.0;
            assert!((wp(&canonical_ballot(r).unwrap()) - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn canonical_domain() {
        assert!(matches!(canonical_ballot(-0.01), Err(QvoteError::Domain(_))));
        assert!(matches!(canonical_ballot(1.5), Err(QvoteError::Domain(_))));
        assert!(matches!(canonical_ballot(f64::NAN), Err(QvoteError::Domain(_))));
    }

    #[test]
    fn realize_classical_pair() {
        let a = realize(&[BallotSpec::classical(1), BallotSpec::classical(0)], 2).unwrap();
        assert_eq!(a.winning_probabilities().unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn realize_charlie_example() {
        let specs = [
            BallotSpec::probabilistic(0.6),
            BallotSpec::probabilistic(0.6),
            BallotSpec::classical(0),
        ];
        let wps = realize(&specs, 3).unwrap().winning_probabilities().unwrap();
        for (got, want) in wps.iter().zip([0.6, 0.6, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn realize_bell() {
        let a = realize(&[bell_ballot()], 2).unwrap();
        assert_eq!(a.groups().len(), 1);
        assert_eq!(a.groups()[0].state().num_qubits(), 2);
        let mm = DensityOperator::maximally_mixed(1).unwrap();
        for v in [1, 2] {
            assert!(a.reduced(v).unwrap().max_abs_diff(&mm) < 1e-12);
        }
        assert!(matches!(a.winning_probabilities(), Err(QvoteError::Unsupported(_))));
    }

    #[test]
    fn joint_slots_need_not_be_adjacent() {
        let specs = [BallotSpec::classical(1), bell_ballot_on(3, 1)];
        let a = realize(&specs, 3).unwrap();
        assert_eq!(a.group_of(2).unwrap().state(), &DensityOperator::basis(1, 1).unwrap());
        assert_eq!(a.group_of(1).unwrap().voters(), &[3, 1]);
    }

    #[test]
    fn coverage_errors() {
        let err = realize(&[BallotSpec::classical(1)], 2).unwrap_err();
        assert!(matches!(err, QvoteError::Config(_)));
        let err = realize(&vec![BallotSpec::classical(1); 3], 2).unwrap_err();
        assert!(matches!(err, QvoteError::Config(_)));
        let err = realize(&[bell_ballot(), bell_ballot_on(2, 3)], 3).unwrap_err();
        assert!(matches!(err, QvoteError::Config(_)));
        let err = realize(&[bell_ballot_on(1, 4)], 3).unwrap_err();
        assert!(matches!(err, QvoteError::Config(_)));
    }

    #[test]
    fn validation_errors() {
        let bad = BallotSpec::pure(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(realize(&[bad], 1), Err(QvoteError::Validation(_))));
        let bad_mix = BallotSpec::Mixed {
            components: vec![MixedComponent { weight: 0.7, amplitudes: vec![Complex64::new(1.0, 0.0), Complex64::default()] }],
        };
        assert!(matches!(realize(&[bad_mix], 1), Err(QvoteError::Validation(_))));
        assert!(matches!(realize(&[BallotSpec::classical(2)], 1), Err(QvoteError::Domain(_))));
        assert!(realize(&[BallotSpec::probabilistic(1.2)], 1).is_err());
    }

    #[test]
    fn bell_amplitudes_and_observation() {
        let BallotSpec::Joint { slots, amplitudes } = bell_ballot() else { panic!("not joint") };
        assert_eq!(slots, vec![1, 2]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [s, 0.0, 0.0, s];
        for (a, e) in amplitudes.iter().zip(expect) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        let rho = bell_ballot().to_density().unwrap();
        assert!((wp(&quantum_and(&rho).unwrap()) - 0.5).abs() < 1e-12);
        assert!((wp(&quantum_or(&rho).unwrap()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixture_is_linear_in_wp() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let psi1 = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let psi2 = vec![c(0.5f64.sqrt(), 0.0), c(-(0.5f64.sqrt()), 0.0)];
        let spec = BallotSpec::Mixed {
            components: vec![
                MixedComponent { weight: 0.25, amplitudes: psi1 },
                MixedComponent { weight: 0.75, amplitudes: psi2 },
            ],
        };
        let got = wp(&spec.to_density().unwrap());
        assert!((got - (0.25 * 0.64 + 0.75 * 0.5)).abs() < 1e-9);
    }

    #[test]
    fn two_encodings_of_sixty_percent() {
        let pure = BallotSpec::probabilistic(0.6).to_density().unwrap();
        let mixed = BallotSpec::classical_mixture(0.6).to_density().unwrap();
        assert!((wp(&pure) - wp(&mixed)).abs() < 1e-12);
        assert!(pure.max_abs_diff(&mixed) > 0.1);
        let and_pure = quantum_and(&tensor(&pure, &pure).unwrap()).unwrap();
        let and_mixed = quantum_and(&tensor(&mixed, &mixed).unwrap()).unwrap();
        assert!((wp(&and_pure) - wp(&and_mixed)).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let json = serde_json::to_value(bell_ballot()).unwrap();
        assert_eq!(json["kind"], "joint");
        assert_eq!(json["slots"], serde_json::json!([1, 2]));
        assert_eq!(json["amplitudes"][1], serde_json::json!([0.0, 0.0]));
        let spec: BallotSpec = serde_json::from_str(r#"{"kind":"pure","amplitudes":[[0.6,0],[0,0.8]]}"#).unwrap();
        assert_eq!(spec, BallotSpec::pure(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)));
        assert!(serde_json::from_str::<BallotSpec>(r#"{"kind":"classical","bit":1,"extra":2}"#).is_err());
    }
}
