use sha2::{Digest, Sha256};

/// Formats with three decimals, rounding halves away from zero.
///
/// Rounding goes through the scaled value so that a decimal tie such as
/// `1.0005` (stored slightly below the tie) still rounds up.
pub fn format_fixed3(v: f64) -> String {
    let millis = (v * 1000.0).round();
    if millis == 0.0 {
        return "0.000".to_string();
    }
    let sign = if millis < 0.0 { "-" } else { "" };
    let m = millis.abs() as u64;
    format!("{sign}{}.{:03}", m / 1000, m % 1000)
}

/// Stable 64-bit seed derived from a base seed and a list of labels.
pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for l in labels {
        h.update((l.len() as u64).to_le_bytes());
        h.update(l.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
