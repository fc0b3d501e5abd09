//! Pauli frames over all circuit qubits, phases dropped.

use crate::bits::BitString;
use crate::circuit::{ElementaryOp, Qubit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn from_parts(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// X and Z parts of a Pauli operator, one bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliMask {
    pub x: BitString,
    pub z: BitString,
}

impl PauliMask {
    pub fn identity(width: usize) -> Self {
        Self {
            x: BitString::zeros(width),
            z: BitString::zeros(width),
        }
    }

    pub fn single(width: usize, qubit: Qubit, pauli: Pauli) -> Self {
        let mut mask = Self::identity(width);
        mask.set(qubit, pauli);
        mask
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, qubit: Qubit) -> Pauli {
        Pauli::from_parts(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: Qubit, pauli: Pauli) {
        self.x.set(qubit, pauli.has_x());
        self.z.set(qubit, pauli.has_z());
    }

    /// Product up to phase.
    pub fn mul_assign(&mut self, other: &PauliMask) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn clear(&mut self, qubit: Qubit) {
        self.x.set(qubit, false);
        self.z.set(qubit, false);
    }
}

/// Pushes `frame` forward through one op.
///
/// CNOT copies X from control to target and Z from target to control.
/// Preparation discards whatever sat on the qubit. A measurement reports
/// whether the frame anticommutes with its basis and consumes the qubit's
/// frame; the flip is returned as `Some(flipped)`.
pub fn conjugate_through(op: &ElementaryOp, frame: &mut PauliMask) -> Result<Option<bool>> {
    let width = frame.width();
    if let Some(q) = op.qubits().into_iter().find(|&q| q >= width) {
        return Err(Error::QubitOutOfRange {
            qubit: q,
            count: width,
        });
    }
    Ok(match op {
        ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) => {
            frame.clear(*q);
            None
        }
        ElementaryOp::Cnot { control, target } => {
            if frame.x.get(*control) {
                frame.x.flip(*target);
            }
            if frame.z.get(*target) {
                frame.z.flip(*control);
            }
            None
        }
        ElementaryOp::MeasureZ { qubit, .. } => {
            let flipped = frame.x.get(*qubit);
            frame.clear(*qubit);
            Some(flipped)
        }
        ElementaryOp::MeasureX { qubit, .. } => {
            let flipped = frame.z.get(*qubit);
            frame.clear(*qubit);
            Some(flipped)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(control: Qubit, target: Qubit) -> ElementaryOp {
        ElementaryOp::Cnot { control, target }
    }

    #[test]
    fn x_on_control_spreads_to_target() {
        let mut f = PauliMask::single(2, 0, Pauli::X);
        conjugate_through(&cx(0, 1), &mut f).unwrap();
        assert_eq!(f.get(0), Pauli::X);
        assert_eq!(f.get(1), Pauli::X);
    }

    #[test]
    fn z_on_control_stays() {
        let mut f = PauliMask::single(2, 0, Pauli::Z);
        conjugate_through(&cx(0, 1), &mut f).unwrap();
        assert_eq!(f.get(0), Pauli::Z);
        assert_eq!(f.get(1), Pauli::I);
    }

    #[test]
    fn z_on_target_spreads_back() {
        let mut f = PauliMask::single(2, 1, Pauli::Z);
        conjugate_through(&cx(0, 1), &mut f).unwrap();
        assert_eq!(f.get(0), Pauli::Z);
        assert_eq!(f.get(1), Pauli::Z);
    }

    #[test]
    fn ancilla_x_before_two_cnots_hits_both_data() {
        // Syndrome ancilla on qubit 2 feeding data qubits 0 and 1.
        let mut f = PauliMask::single(3, 2, Pauli::X);
        conjugate_through(&cx(2, 0), &mut f).unwrap();
        conjugate_through(&cx(2, 1), &mut f).unwrap();
        assert_eq!(f.get(0), Pauli::X);
        assert_eq!(f.get(1), Pauli::X);
    }

    #[test]
    fn measurement_reports_and_consumes() {
        let mut f = PauliMask::single(1, 0, Pauli::Y);
        let z = ElementaryOp::MeasureZ {
            qubit: 0,
            label: "m".into(),
        };
        assert_eq!(conjugate_through(&z, &mut f).unwrap(), Some(true));
        assert!(f.is_identity());

        let mut f = PauliMask::single(1, 0, Pauli::X);
        let x = ElementaryOp::MeasureX {
            qubit: 0,
            label: "m".into(),
        };
        assert_eq!(conjugate_through(&x, &mut f).unwrap(), Some(false));
    }

    #[test]
    fn out_of_range_qubit_is_rejected() {
        let mut f = PauliMask::identity(2);
        assert!(matches!(
            conjugate_through(&cx(0, 5), &mut f),
            Err(Error::QubitOutOfRange { qubit: 5, .. })
        ));
    }
}
