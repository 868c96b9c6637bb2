use serde::{Deserialize, Serialize};

use super::CodecError;

/// Per-dimension option counts of a factored action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radices(Vec<u64>);

impl Radices {
    pub fn new(radices: Vec<u64>) -> Result<Self, CodecError> {
        if radices.iter().any(|&r| r == 0) {
            return Err(CodecError::ZeroRadix);
        }
        let r = Radices(radices);
        r.space_size()?;
        Ok(r)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Product of all radices.
    pub fn space_size(&self) -> Result<u64, CodecError> {
        self.0
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r))
            .filter(|&v| v <= i64::MAX as u64)
            .ok_or(CodecError::Infeasible)
    }
}

/// Splits `index` into little-endian digits: digit `i` is
/// `(index / prod(r[..i])) % r[i]`.
pub fn mixed_radix_decode(index: u64, radices: &Radices) -> Result<Vec<u64>, CodecError> {
    let size = radices.space_size()?;
    if index >= size {
        return Err(CodecError::IndexOutOfRange { index, size });
    }
    let mut rest = index;
    Ok(radices
        .as_slice()
        .iter()
        .map(|&r| {
            let d = rest % r;
            rest /= r;
            d
        })
        .collect())
}

/// Inverse of [`mixed_radix_decode`].
pub fn mixed_radix_encode(digits: &[u64], radices: &Radices) -> Result<u64, CodecError> {
    if digits.len() != radices.as_slice().len() {
        return Err(CodecError::DigitCount { got: digits.len(), want: radices.as_slice().len() });
    }
    let mut index = 0u64;
    for (&d, &r) in digits.iter().zip(radices.as_slice()).rev() {
        if d >= r {
            return Err(CodecError::IndexOutOfRange { index: d, size: r });
        }
        index = index * r + d;
    }
    Ok(index)
}

/// The kinds of acting unit whose action-space size is tabulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitSpace {
    DistOffer,
    DistAccept,
    SemiOffer,
    SemiAccept,
    Full,
}

impl UnitSpace {
    pub const ALL: [UnitSpace; 5] =
        [UnitSpace::DistOffer, UnitSpace::DistAccept, UnitSpace::SemiOffer, UnitSpace::SemiAccept, UnitSpace::Full];

    pub fn name(self) -> &'static str {
        match self {
            UnitSpace::DistOffer => "DIST_OFFER",
            UnitSpace::DistAccept => "DIST_ACCEPT",
            UnitSpace::SemiOffer => "SEMI_OFFER",
            UnitSpace::SemiAccept => "SEMI_ACCEPT",
            UnitSpace::Full => "FULL",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            UnitSpace::DistOffer => "distributed offer unit",
            UnitSpace::DistAccept => "distributed acceptor unit",
            UnitSpace::SemiOffer => "semi-aggregated offer unit",
            UnitSpace::SemiAccept => "semi-aggregated acceptor unit",
            UnitSpace::Full => "fully aggregated unit",
        }
    }

    /// Digit radices of this unit's action for `m` cores, `n` agents, `k` slots.
    ///
    /// Acceptor digits come first (one per core, `n*k + 1` options), then
    /// offer digits (one per slot, `m + 1` options).
    pub fn radices(self, m: usize, n: usize, k: usize) -> Result<Radices, CodecError> {
        let accept = (n as u64).checked_mul(k as u64).and_then(|v| v.checked_add(1)).ok_or(CodecError::Infeasible)?;
        let offer = m as u64 + 1;
        let digits = match self {
            UnitSpace::DistOffer => vec![offer],
            UnitSpace::DistAccept => vec![accept],
            UnitSpace::SemiOffer => vec![offer; k],
            UnitSpace::SemiAccept => vec![accept; m],
            UnitSpace::Full => {
                let mut d = vec![accept; m];
                d.extend(std::iter::repeat_n(offer, k));
                d
            }
        };
        Radices::new(digits)
    }
}

/// Number of discrete actions of `space` for `m` cores, `n` agents, `k` slots.
pub fn cardinality(space: UnitSpace, m: usize, n: usize, k: usize) -> Result<u64, CodecError> {
    let (m64, n64, k64) = (m as u64, n as u64, k as u64);
    let accept = n64.checked_mul(k64).and_then(|v| v.checked_add(1));
    let offer = m64.checked_add(1);
    let pow = |base: Option<u64>, exp: usize| -> Option<u64> { base?.checked_pow(u32::try_from(exp).ok()?) };
    let v = match space {
        UnitSpace::DistOffer => offer,
        UnitSpace::DistAccept => accept,
        UnitSpace::SemiOffer => pow(offer, k),
        UnitSpace::SemiAccept => pow(accept, m),
        UnitSpace::Full => pow(offer, k).zip(pow(accept, m)).and_then(|(a, b)| a.checked_mul(b)),
    };
    v.filter(|&v| v <= i64::MAX as u64).ok_or(CodecError::Infeasible)
}
