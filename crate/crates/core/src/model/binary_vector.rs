use crate::error::{Error, Result};

/// A fixed-length vector of {0,1} unit states, one byte per unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    bits: Vec<u8>,
}

impl BinaryVector {
    /// Validates that the input is nonempty and strictly 0/1-valued.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("binary vector must be nonempty".into()));
        }
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "binary vector entries must be 0 or 1, found {bad}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "binary vector must be nonempty");
        Self { bits: vec![0; len] }
    }

    /// Decodes `index` as a bit pattern, unit `i` taking bit `i` (LSB first).
    pub fn from_index(index: usize, len: usize) -> Self {
        assert!(len > 0 && len < usize::BITS as usize);
        let bits = (0..len).map(|i| ((index >> i) & 1) as u8).collect();
        Self { bits }
    }

    /// Inverse of [`from_index`](Self::from_index).
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits[i] = bit;
    }

    /// Indices of the units that are on.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
    }
}

/// Sum of `coeffs[i]` over the set bits of `v`.
#[inline]
pub(crate) fn dot_bits(coeffs: &[f64], v: &BinaryVector) -> f64 {
    debug_assert_eq!(coeffs.len(), v.len());
    let mut acc = 0.0;
    for (c, &b) in coeffs.iter().zip(v.bits()) {
        if b == 1 {
            acc += c;
        }
    }
    acc
}
