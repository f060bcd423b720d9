//! Packed little-endian bit buffers used by the window kernels.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl BitBuf {
    pub(crate) fn zeros(len: usize) -> Self {
        BitBuf {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub(crate) fn from_letters(letters: &[u8]) -> Self {
        let mut buf = BitBuf::zeros(letters.len());
        for (i, &l) in letters.iter().enumerate() {
            if l != 0 {
                buf.set(i);
            }
        }
        buf
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> u8 {
        ((self.words[i >> 6] >> (i & 63)) & 1) as u8
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    /// `n <= 64` bits starting at `offset`, bit 0 of the result is `offset`.
    #[inline]
    pub(crate) fn extract(&self, offset: usize, n: usize) -> u64 {
        debug_assert!(n <= 64 && offset + n <= self.len);
        if n == 0 {
            return 0;
        }
        let word = offset >> 6;
        let bit = offset & 63;
        let mut v = self.words[word] >> bit;
        if bit != 0 && word + 1 < self.words.len() {
            v |= self.words[word + 1] << (64 - bit);
        }
        if n == 64 {
            v
        } else {
            v & ((1u64 << n) - 1)
        }
    }

    /// Writes the low `n <= 64` bits of `value` at `offset` (target bits must be zero).
    #[inline]
    pub(crate) fn or_bits(&mut self, offset: usize, n: usize, value: u64) {
        if n == 0 {
            return;
        }
        let value = if n == 64 { value } else { value & ((1u64 << n) - 1) };
        let word = offset >> 6;
        let bit = offset & 63;
        self.words[word] |= value << bit;
        if bit != 0 && bit + n > 64 {
            self.words[word + 1] |= value >> (64 - bit);
        }
    }

    /// Compares `n` bits of `self` at `offset` against the first `n` bits of `other`.
    pub(crate) fn matches(&self, offset: usize, other: &BitBuf, n: usize) -> bool {
        let mut done = 0;
        while done < n {
            let take = (n - done).min(64);
            if self.extract(offset + done, take) != other.extract(done, take) {
                return false;
            }
            done += take;
        }
        true
    }

    pub(crate) fn to_letters(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}
