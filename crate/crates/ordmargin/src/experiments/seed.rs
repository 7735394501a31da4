//! Stable seed derivation so that adding a method or size to a plan never
//! perturbs the splits of the others.

/// FNV-1a over the byte encoding of the parts, finished with a splitmix64
/// avalanche. Stable across platforms and releases, unlike the standard
/// library hasher.
pub fn mix_seed(master: u64, method: &str, train_size: usize, repeat: usize) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&master.to_le_bytes());
    eat(method.as_bytes());
    eat(&(train_size as u64).to_le_bytes());
    eat(&(repeat as u64).to_le_bytes());
    splitmix64(h)
}

/// Derives an independent stream from a run seed for a named purpose.
pub fn sub_seed(seed: u64, purpose: &str) -> u64 {
    let mut h = seed ^ 0x9e3779b97f4a7c15;
    for &b in purpose.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    splitmix64(h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
