/// Sign with sgn(0) = +1.
#[inline]
pub fn sgn(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Quantization-bin edge. Infinite edges are tags, never floats in arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    NegInf,
    Zero,
    PosInf,
}

/// One block of 1-bit ADC output, entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    z: Vec<i8>,
}

impl Observation {
    /// Panics if an entry is not ±1.
    pub fn new(z: Vec<i8>) -> Self {
        assert!(z.iter().all(|&v| v == 1 || v == -1), "observation entries must be ±1");
        Observation { z }
    }

    pub fn from_presign(v: &[f64]) -> Self {
        Observation {
            z: v.iter().map(|&x| sgn(x)).collect(),
        }
    }

    pub fn z(&self) -> &[i8] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// (low, up) edges of the bin of entry `i`.
    pub fn bin(&self, i: usize) -> (Threshold, Threshold) {
        if self.z[i] > 0 {
            (Threshold::Zero, Threshold::PosInf)
        } else {
            (Threshold::NegInf, Threshold::Zero)
        }
    }
}
