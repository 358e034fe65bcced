//! Sortable 26-character identifiers (48-bit millisecond timestamp, 80 bits
//! of randomness, Crockford base32). Each new id is strictly greater than
//! every id the generator has produced or observed, so id order follows
//! journal order.

use chrono::Utc;

const ALPHABET: &[u8; 32] = b"0123456789ABCDEFGHJKMNPQRSTVWXYZ";

#[derive(Debug, Default)]
pub struct IdGenerator {
    last: u128,
}

impl IdGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> String {
        let ms = Utc::now().timestamp_millis().max(0) as u128 & ((1 << 48) - 1);
        let random = rand::random::<u128>() & ((1 << 80) - 1);
        let candidate = (ms << 80) | random;
        self.last = candidate.max(self.last + 1);
        encode(self.last)
    }

    /// Records an id produced elsewhere (e.g. during replay).
    pub fn observe(&mut self, id: &str) {
        if let Some(v) = decode(id) {
            self.last = self.last.max(v);
        }
    }
}

fn encode(mut v: u128) -> String {
    let mut out = [0u8; 26];
    for slot in out.iter_mut().rev() {
        *slot = ALPHABET[(v & 31) as usize];
        v >>= 5;
    }
    String::from_utf8(out.to_vec()).expect("ascii")
}

fn decode(s: &str) -> Option<u128> {
    if s.len() != 26 {
        return None;
    }
    s.bytes().try_fold(0u128, |acc, b| {
        let digit = ALPHABET.iter().position(|&a| a == b.to_ascii_uppercase())?;
        Some((acc << 5) | digit as u128)
    })
}
