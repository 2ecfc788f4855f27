//! Quantum logical connectives as channels on density operators.
//!
//! AND appends a `|0><0|` ancilla, conjugates by the Toffoli gate and
//! traces out both inputs. NOT is Pauli-X conjugation and OR is the De
//! Morgan dual `NOT(AND(NOT ⊗ NOT))`. The n-ary forms are left folds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{
    conjugate_local, partial_trace_matrix, qubit_cap, DensityOperator, Matrix,
};
use crate::error::{QvoteError, Result};

/// The controlled-controlled-NOT permutation `|x1,x2,x3> -> |x1,x2,x1x2 ⊕ x3>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToffoliGate {
    entries: Matrix,
}

impl ToffoliGate {
    pub fn new() -> Self {
        let mut entries = Matrix::zeros(8, 8);
        for input in 0..8usize {
            let (x1, x2, x3) = (input >> 2 & 1, input >> 1 & 1, input & 1);
            let output = (x1 << 2) | (x2 << 1) | ((x1 & x2) ^ x3);
            entries[(output, input)] = Complex64::new(1.0, 0.0);
        }
        Self { entries }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }
}

impl Default for ToffoliGate {
    fn default() -> Self {
        Self::new()
    }
}

pub fn pauli_x() -> Matrix {
    let mut x = Matrix::zeros(2, 2);
    x[(0, 1)] = Complex64::new(1.0, 0.0);
    x[(1, 0)] = Complex64::new(1.0, 0.0);
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn name(self) -> &'static str {
        match self {
            Connective::And => "AND",
            Connective::Or => "OR",
        }
    }
}

/// AND on qubits `a` and `b` of an arbitrary square matrix over
/// `num_qubits` qubits. The result has `num_qubits - 1` qubits; the AND
/// output sits last and the other qubits keep their order.
///
/// Works on non-Hermitian inputs so linearity arguments can be checked
/// on operators such as `|0><1| ⊗ sigma`.
pub fn and_channel_matrix(m: &Matrix, num_qubits: usize, a: usize, b: usize) -> Result<Matrix> {
    let widened = num_qubits + 1;
    if widened > qubit_cap() {
        return Err(QvoteError::Capacity { qubits: widened, cap: qubit_cap() });
    }
    let mut ancilla = Matrix::zeros(2, 2);
    ancilla[(0, 0)] = Complex64::new(1.0, 0.0);
    let with_ancilla = m.kronecker(&ancilla);
    let toffoli = ToffoliGate::new();
    let conjugated = conjugate_local(&with_ancilla, widened, toffoli.entries(), &[a, b, num_qubits])?;
    partial_trace_matrix(&conjugated, widened, &[a, b])
}

/// OR on qubits `a` and `b`; same layout contract as [`and_channel_matrix`].
pub fn or_channel_matrix(m: &Matrix, num_qubits: usize, a: usize, b: usize) -> Result<Matrix> {
    let x = pauli_x();
    let flipped = conjugate_local(m, num_qubits, &x.kronecker(&x), &[a, b])?;
    let anded = and_channel_matrix(&flipped, num_qubits, a, b)?;
    conjugate_local(&anded, num_qubits - 1, &x, &[num_qubits - 2])
}

fn channel_matrix(conn: Connective, m: &Matrix, num_qubits: usize, a: usize, b: usize) -> Result<Matrix> {
    match conn {
        Connective::And => and_channel_matrix(m, num_qubits, a, b),
        Connective::Or => or_channel_matrix(m, num_qubits, a, b),
    }
}

fn require_qubits(rho: &DensityOperator, k: usize, what: &str) -> Result<()> {
    if rho.num_qubits() != k {
        return Err(QvoteError::Arity(format!(
            "{what} takes a {k}-qubit operand, got {} qubits",
            rho.num_qubits()
        )));
    }
    Ok(())
}

/// Quantum AND of a (possibly entangled) two-qubit state.
pub fn quantum_and(joint: &DensityOperator) -> Result<DensityOperator> {
    require_qubits(joint, 2, "AND")?;
    DensityOperator::from_channel_output(and_channel_matrix(joint.entries(), 2, 0, 1)?)
}

/// Quantum OR of a (possibly entangled) two-qubit state.
pub fn quantum_or(joint: &DensityOperator) -> Result<DensityOperator> {
    require_qubits(joint, 2, "OR")?;
    DensityOperator::from_channel_output(or_channel_matrix(joint.entries(), 2, 0, 1)?)
}

/// `X rho X`.
pub fn quantum_not(rho: &DensityOperator) -> Result<DensityOperator> {
    require_qubits(rho, 1, "NOT")?;
    let out = conjugate_local(rho.entries(), 1, &pauli_x(), &[0])?;
    DensityOperator::from_channel_output(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Accumulator,
    Pending(usize),
}

/// Incremental left fold of AND or OR.
///
/// Operands are loaded as blocks whose qubits are tagged with caller
/// chosen keys; `combine(key)` folds the tagged qubit into the running
/// result. A joint block can therefore be loaded once and its qubits
/// folded in one at a time, possibly with other operands in between.
#[derive(Debug, Clone)]
pub struct FoldWorkspace {
    connective: Connective,
    state: Option<DensityOperator>,
    slots: Vec<Slot>,
    peak_qubits: usize,
}

impl FoldWorkspace {
    pub fn new(connective: Connective) -> Self {
        Self { connective, state: None, slots: Vec::new(), peak_qubits: 0 }
    }

    pub fn live_qubits(&self) -> usize {
        self.slots.len()
    }

    /// Widest register the fold has built so far, ancilla included.
    pub fn peak_qubits(&self) -> usize {
        self.peak_qubits
    }

    pub fn is_pending(&self, key: usize) -> bool {
        self.slots.contains(&Slot::Pending(key))
    }

    /// Tensors `block` onto the workspace, tagging its qubits with `keys`.
    pub fn absorb(&mut self, block: &DensityOperator, keys: &[usize]) -> Result<()> {
        if keys.len() != block.num_qubits() {
            return Err(QvoteError::Arity(format!(
                "{} keys for a {}-qubit block",
                keys.len(),
                block.num_qubits()
            )));
        }
        if let Some(dup) = keys.iter().find(|k| self.is_pending(**k)) {
            return Err(QvoteError::Evaluation(format!("operand key {dup} loaded twice")));
        }
        self.state = Some(match self.state.take() {
            None => block.clone(),
            Some(s) => crate::density::tensor(&s, block)?,
        });
        self.slots.extend(keys.iter().map(|&k| Slot::Pending(k)));
        self.peak_qubits = self.peak_qubits.max(self.slots.len());
        Ok(())
    }

    /// Folds the qubit tagged `key` into the accumulator.
    pub fn combine(&mut self, key: usize) -> Result<()> {
        let target = self
            .slots
            .iter()
            .position(|s| *s == Slot::Pending(key))
            .ok_or_else(|| QvoteError::Evaluation(format!("operand key {key} is not loaded")))?;
        let Some(acc) = self.slots.iter().position(|s| *s == Slot::Accumulator) else {
            self.slots[target] = Slot::Accumulator;
            return Ok(());
        };
        let state = self.state.take().expect("slots imply a state");
        let n = state.num_qubits();
        self.peak_qubits = self.peak_qubits.max(n + 1);
        let out = channel_matrix(self.connective, state.entries(), n, acc, target)?;
        self.state = Some(DensityOperator::from_channel_output(out)?);
        let (lo, hi) = (acc.min(target), acc.max(target));
        self.slots.remove(hi);
        self.slots.remove(lo);
        self.slots.push(Slot::Accumulator);
        Ok(())
    }

    /// The folded single-qubit result. Fails if operands are still pending.
    pub fn finish(self) -> Result<DensityOperator> {
        match (self.state, self.slots.as_slice()) {
            (Some(state), [Slot::Accumulator]) => Ok(state),
            (None, _) => Err(QvoteError::Arity(format!("{} of zero operands", self.connective.name()))),
            (Some(_), slots) => Err(QvoteError::Evaluation(format!(
                "{} operands were loaded but never folded",
                slots.len() - 1
            ))),
        }
    }
}

fn fold(connective: Connective, operands: &[DensityOperator]) -> Result<DensityOperator> {
    if operands.is_empty() {
        return Err(QvoteError::Arity(format!("{} needs at least one operand", connective.name())));
    }
    let mut ws = FoldWorkspace::new(connective);
    let mut next_key = 0;
    for op in operands {
        let keys: Vec<usize> = (next_key..next_key + op.num_qubits()).collect();
        next_key += op.num_qubits();
        ws.absorb(op, &keys)?;
        for k in keys {
            ws.combine(k)?;
        }
    }
    ws.finish()
}

/// `AND(...AND(AND(rho1 ⊗ rho2) ⊗ rho3)... ⊗ rhon)`.
///
/// A multi-qubit operand is a joint ballot occupying that many consecutive
/// slots. A single single-qubit operand is returned unchanged.
pub fn and_fold(operands: &[DensityOperator]) -> Result<DensityOperator> {
    fold(Connective::And, operands)
}

/// Left fold of OR; see [`and_fold`].
pub fn or_fold(operands: &[DensityOperator]) -> Result<DensityOperator> {
    fold(Connective::Or, operands)
}

pub fn connective_fold(connective: Connective, operands: &[DensityOperator]) -> Result<DensityOperator> {
    fold(connective, operands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{tensor, winning_probability, PureState, pure_to_density};

    fn theta(r: f64) -> DensityOperator {
        let psi = PureState::new(vec![
            Complex64::new((1.0 - r).sqrt(), 0.0),
            Complex64::new(r.sqrt(), 0.0),
        ])
        .unwrap();
        pure_to_density(&psi)
    }

    fn basis(bit: usize) -> DensityOperator {
        DensityOperator::basis(1, bit).unwrap()
    }

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::default();
        pure_to_density(&PureState::new(vec![Complex64::new(s, 0.0), z, z, Complex64::new(s, 0.0)]).unwrap())
    }

    fn wp(rho: &DensityOperator) -> f64 {
        winning_probability(rho).unwrap()
    }

    #[test]
    fn toffoli_truth_table() {
        let t = ToffoliGate::new();
        for input in 0..8usize {
            let out = (0..8).find(|&r| t.entries()[(r, input)].re == 1.0).unwrap();
            let expect = if input >> 1 == 0b11 { input ^ 1 } else { input };
            assert_eq!(out, expect, "input {input:03b}");
        }
        assert!(crate::density::unitarity_error(t.entries()) == 0.0);
    }

    #[test]
    fn toffoli_on_110() {
        let rho = DensityOperator::basis(3, 0b110).unwrap();
        let out = crate::density::apply_unitary(&rho, ToffoliGate::new().entries()).unwrap();
        assert!(out.max_abs_diff(&DensityOperator::basis(3, 0b111).unwrap()) < 1e-15);
    }

    #[test]
    fn and_basis_cases() {
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let out = quantum_and(&tensor(&basis(a), &basis(b)).unwrap()).unwrap();
            assert!(out.max_abs_diff(&basis(a & b)) < 1e-15, "{a}{b}");
        }
    }

    #[test]
    fn or_basis_cases() {
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let out = quantum_or(&tensor(&basis(a), &basis(b)).unwrap()).unwrap();
            assert!(out.max_abs_diff(&basis(a | b)) < 1e-15, "{a}{b}");
        }
    }

    #[test]
    fn bell_pair_through_and_and_or() {
        assert!((wp(&quantum_and(&bell()).unwrap()) - 0.5).abs() < 1e-12);
        assert!((wp(&quantum_or(&bell()).unwrap()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(quantum_and(&basis(1)), Err(QvoteError::Arity(_))));
        assert!(matches!(quantum_or(&basis(1)), Err(QvoteError::Arity(_))));
        assert!(matches!(quantum_not(&bell()), Err(QvoteError::Arity(_))));
        assert!(matches!(and_fold(&[]), Err(QvoteError::Arity(_))));
        assert!(matches!(or_fold(&[]), Err(QvoteError::Arity(_))));
    }

    #[test]
    fn not_flips_and_is_involution() {
        assert!(quantum_not(&basis(0)).unwrap().max_abs_diff(&basis(1)) < 1e-15);
        let rho = theta(0.6);
        assert!((wp(&quantum_not(&rho).unwrap()) - 0.4).abs() < 1e-12);
        let back = quantum_not(&quantum_not(&rho).unwrap()).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn and_fold_examples() {
        let rho = theta(0.3);
        assert_eq!(and_fold(std::slice::from_ref(&rho)).unwrap(), rho);
        let veto = and_fold(&[theta(0.6), theta(0.6), basis(0)]).unwrap();
        assert!(wp(&veto).abs() < 1e-12);
        let pair = and_fold(&[theta(0.6), theta(0.6)]).unwrap();
        assert!((wp(&pair) - 0.36).abs() < 1e-12);
    }

    #[test]
    fn or_fold_examples() {
        let rho = theta(0.3);
        assert_eq!(or_fold(std::slice::from_ref(&rho)).unwrap(), rho);
        assert!((wp(&or_fold(&[theta(0.5), theta(0.5)]).unwrap()) - 0.75).abs() < 1e-12);
        assert!((wp(&or_fold(&[basis(0), basis(0), basis(1)]).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn or_with_certain_agree_dominates() {
        for r in [0.0, 0.13, 0.5, 0.99] {
            let out = quantum_or(&tensor(&basis(1), &theta(r)).unwrap()).unwrap();
            assert!((wp(&out) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_operand_inside_fold() {
        // Bell pair followed by a certain-agree ballot: AND keeps 1/2.
        let out = and_fold(&[bell(), basis(1)]).unwrap();
        assert!((wp(&out) - 0.5).abs() < 1e-12);
        // Certain-agree first, then the Bell pair: AND(AND(1, a), b).
        let out = and_fold(&[basis(1), bell()]).unwrap();
        assert!((wp(&out) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn workspace_stays_small() {
        let mut ws = FoldWorkspace::new(Connective::And);
        for (k, r) in [0.1, 0.5, 0.9, 0.4, 0.7].iter().enumerate() {
            ws.absorb(&theta(*r), &[k]).unwrap();
            ws.combine(k).unwrap();
        }
        assert!(ws.peak_qubits() <= 3);
        ws.finish().unwrap();

        let mut ws = FoldWorkspace::new(Connective::Or);
        ws.absorb(&theta(0.2), &[0]).unwrap();
        ws.combine(0).unwrap();
        ws.absorb(&bell(), &[1, 2]).unwrap();
        ws.combine(1).unwrap();
        ws.combine(2).unwrap();
        assert!(ws.peak_qubits() <= 3 + 2);
    }

    #[test]
    fn unfinished_fold_is_an_error() {
        let mut ws = FoldWorkspace::new(Connective::And);
        ws.absorb(&bell(), &[1, 2]).unwrap();
        ws.combine(1).unwrap();
        assert!(matches!(ws.finish(), Err(QvoteError::Evaluation(_))));
        let ws = FoldWorkspace::new(Connective::And);
        assert!(matches!(ws.finish(), Err(QvoteError::Arity(_))));
    }
}
