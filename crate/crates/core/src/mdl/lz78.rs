//! LZ78 dictionary coder for event streams.
//!
//! The stream is parsed into LZ78 phrases: each phrase is the longest
//! dictionary entry matching the input, extended by one more symbol, and it
//! becomes a new dictionary entry. The dictionary is a trie, and a phrase is
//! identified by the free `(node, symbol)` slot it occupies. Slots that
//! already hold a child are excluded. With `t` nodes in the trie there are
//! `t(m − 1) + 1` free slots for an alphabet of `m` symbols.
//!
//! Wire layout:
//! - Elias-gamma code of `c + 1`, where `c` is the number of full phrases;
//! - one mixed-radix integer holding, least significant first, the slot index
//!   of every phrase (radix `t(m − 1) + 1` for the phrase made when the trie
//!   has `t` nodes), then the unfinished trailing phrase as a node id in
//!   `0..=c` (0 means none).
//!
//! Every radix is known once `c` is, so the payload width is
//! `⌈log2 Π radix⌉` bits and the code is self-delimiting. The empty stream
//! costs the single header bit.

use num_bigint::BigUint;

use super::StreamCoder;
use crate::error::{Result, TrustError};

pub const METHOD: &str = "lz78";

/// Bits spent on the header by the empty stream.
pub const EMPTY_STREAM_BITS: u64 = 1;

#[derive(Clone, Copy, Debug, Default)]
pub struct Lz78Coder;

impl StreamCoder for Lz78Coder {
    fn name(&self) -> &str {
        METHOD
    }

    fn encoded_bits(&self, alphabet_size: usize, events: &[usize]) -> u64 {
        encode(alphabet_size, events).bits()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lz78Encoding {
    pub alphabet_size: usize,
    pub phrases: u64,
    pub payload: BigUint,
}

impl Lz78Encoding {
    pub fn header_bits(&self) -> u64 {
        elias_gamma_bits(self.phrases + 1)
    }

    pub fn payload_bits(&self) -> u64 {
        let product = radix_product(&radices(self.alphabet_size, self.phrases));
        (product - 1u32).bits()
    }

    pub fn bits(&self) -> u64 {
        self.header_bits() + self.payload_bits()
    }
}

fn elias_gamma_bits(n: u64) -> u64 {
    debug_assert!(n >= 1);
    2 * (63 - n.leading_zeros() as u64) + 1
}

fn radices(alphabet_size: usize, phrases: u64) -> Vec<u64> {
    let m = alphabet_size as u64;
    (1..=phrases)
        .map(|t| t * (m - 1) + 1)
        .chain(std::iter::once(phrases + 1))
        .collect()
}

fn radix_product(radices: &[u64]) -> BigUint {
    match radices.len() {
        0 => BigUint::from(1u32),
        1 => BigUint::from(radices[0]),
        n => radix_product(&radices[..n / 2]) * radix_product(&radices[n / 2..]),
    }
}

/// `(value, product)` of little-endian mixed-radix digits.
fn pack(digits: &[u64], radices: &[u64]) -> (BigUint, BigUint) {
    match digits.len() {
        0 => (BigUint::ZERO, BigUint::from(1u32)),
        1 => (BigUint::from(digits[0]), BigUint::from(radices[0])),
        n => {
            let (lo, lo_base) = pack(&digits[..n / 2], &radices[..n / 2]);
            let (hi, hi_base) = pack(&digits[n / 2..], &radices[n / 2..]);
            (lo + &lo_base * hi, lo_base * hi_base)
        }
    }
}

fn unpack(mut value: BigUint, radices: &[u64], out: &mut Vec<u64>) {
    match radices.len() {
        0 => {}
        1 => out.push(value.to_u64_digits().first().copied().unwrap_or(0)),
        n => {
            let base = radix_product(&radices[..n / 2]);
            let hi = &value / &base;
            value %= &base;
            unpack(value, &radices[..n / 2], out);
            unpack(hi, &radices[n / 2..], out);
        }
    }
}

/// Binary indexed tree over trie slots `node·m + symbol`, counting used slots.
struct SlotIndex {
    tree: Vec<u32>,
}

impl SlotIndex {
    fn new(capacity: usize) -> Self {
        Self {
            tree: vec![0; capacity + 1],
        }
    }

    fn mark(&mut self, slot: usize) {
        let mut i = slot + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Used slots strictly below `slot`.
    fn used_below(&self, slot: usize) -> usize {
        let mut i = slot;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i] as usize;
            i &= i - 1;
        }
        acc
    }

    /// Slot of the `rank`-th free position (0-based).
    fn free_slot(&self, rank: usize) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut remaining = rank + 1;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n {
                let free = step - self.tree[next] as usize;
                if free < remaining {
                    pos = next;
                    remaining -= free;
                }
            }
            step >>= 1;
        }
        pos
    }
}

const NO_CHILD: u32 = u32::MAX;

pub fn encode(alphabet_size: usize, events: &[usize]) -> Lz78Encoding {
    let m = alphabet_size.max(1);
    let capacity = (events.len() + 1) * m;
    let mut children = vec![NO_CHILD; m];
    let mut used = SlotIndex::new(capacity);
    let mut digits = Vec::new();
    let mut node = 0usize;
    let mut nodes = 1usize;

    for &symbol in events {
        let slot = node * m + symbol;
        let child = children[slot];
        if child != NO_CHILD {
            node = child as usize;
            continue;
        }
        digits.push((slot - used.used_below(slot)) as u64);
        used.mark(slot);
        children[slot] = nodes as u32;
        children.extend(std::iter::repeat_n(NO_CHILD, m));
        nodes += 1;
        node = 0;
    }
    let phrases = digits.len() as u64;
    digits.push(node as u64);
    let (payload, _) = pack(&digits, &radices(m, phrases));
    Lz78Encoding {
        alphabet_size: m,
        phrases,
        payload,
    }
}

pub fn decode(encoding: &Lz78Encoding) -> Result<Vec<usize>> {
    let m = encoding.alphabet_size.max(1);
    let radices = radices(m, encoding.phrases);
    if encoding.payload >= radix_product(&radices) {
        return Err(TrustError::CorruptPayload(
            "payload exceeds radix range".into(),
        ));
    }
    let mut digits = Vec::with_capacity(radices.len());
    unpack(encoding.payload.clone(), &radices, &mut digits);

    let phrases = encoding.phrases as usize;
    let mut used = SlotIndex::new((phrases + 1) * m);
    // (parent, symbol) per node; root is node 0
    let mut nodes: Vec<(usize, usize)> = vec![(0, 0)];
    let mut out = Vec::new();
    let spell = |nodes: &[(usize, usize)], mut id: usize, out: &mut Vec<usize>| {
        let start = out.len();
        while id != 0 {
            out.push(nodes[id].1);
            id = nodes[id].0;
        }
        out[start..].reverse();
    };
    for &digit in &digits[..phrases] {
        let slot = used.free_slot(digit as usize);
        if slot >= nodes.len() * m {
            return Err(TrustError::CorruptPayload("slot outside trie".into()));
        }
        used.mark(slot);
        let (parent, symbol) = (slot / m, slot % m);
        nodes.push((parent, symbol));
        spell(&nodes, nodes.len() - 1, &mut out);
    }
    spell(&nodes, digits[phrases] as usize, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_costs_header_bit() {
        let e = encode(4, &[]);
        assert_eq!(e.phrases, 0);
        assert_eq!(e.bits(), EMPTY_STREAM_BITS);
        assert_eq!(decode(&e).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn classic_parse() {
        // a|b|ab|aba|ba|c then the unfinished phrase ab
        let s: Vec<usize> = "ababababacab"
            .bytes()
            .map(|b| (b - b'a') as usize)
            .collect();
        let e = encode(3, &s);
        assert_eq!(e.phrases, 6);
        assert_eq!(decode(&e).unwrap(), s);
    }

    #[test]
    fn gamma_lengths() {
        assert_eq!(elias_gamma_bits(1), 1);
        assert_eq!(elias_gamma_bits(2), 3);
        assert_eq!(elias_gamma_bits(3), 3);
        assert_eq!(elias_gamma_bits(4), 5);
    }

    #[test]
    fn round_trip_random_streams() {
        let mut g = crate::rng::generator(11);
        for m in [1usize, 2, 3, 4, 7] {
            for n in [1usize, 2, 5, 50, 500] {
                let s: Vec<usize> = (0..n)
                    .map(|_| (crate::rng::unit_f64(&mut g) * m as f64) as usize)
                    .collect();
                let e = encode(m, &s);
                assert_eq!(decode(&e).unwrap(), s, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn slot_index_ranks() {
        let mut idx = SlotIndex::new(10);
        idx.mark(2);
        idx.mark(3);
        idx.mark(7);
        assert_eq!(idx.used_below(8), 3);
        let free: Vec<usize> = (0..7).map(|r| idx.free_slot(r)).collect();
        assert_eq!(free, vec![0, 1, 4, 5, 6, 8, 9]);
    }

    #[test]
    fn corrupt_payload_rejected() {
        let mut e = encode(2, &[0, 1, 0]);
        e.payload += radix_product(&radices(2, e.phrases));
        assert!(matches!(decode(&e), Err(TrustError::CorruptPayload(_))));
    }
}
