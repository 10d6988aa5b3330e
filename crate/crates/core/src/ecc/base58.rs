//! Base58 and Base58Check text encoding.

use super::EccError;
use crate::hashing::double_sha256;

pub const ALPHABET: &[u8; 58] = b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

/// Longest payload accepted by [`base58check_encode`].
pub const MAX_PAYLOAD: usize = 64;

const CHECKSUM_LEN: usize = 4;

fn digit_value(c: char) -> Option<u8> {
    if !c.is_ascii() {
        return None;
    }
    ALPHABET.iter().position(|&a| a == c as u8).map(|p| p as u8)
}

/// Plain base-58: one leading '1' per leading zero byte, the rest as a big number.
pub fn encode(bytes: &[u8]) -> String {
    let zeros = bytes.iter().take_while(|&&b| b == 0).count();
    // little-endian base-58 digits of the remaining number
    let mut digits: Vec<u8> = Vec::with_capacity(bytes.len() * 138 / 100 + 1);
    for &byte in &bytes[zeros..] {
        let mut carry = byte as u32;
        for d in digits.iter_mut() {
            carry += (*d as u32) << 8;
            *d = (carry % 58) as u8;
            carry /= 58;
        }
        while carry > 0 {
            digits.push((carry % 58) as u8);
            carry /= 58;
        }
    }
    let mut out = String::with_capacity(zeros + digits.len());
    out.extend(std::iter::repeat_n('1', zeros));
    out.extend(digits.iter().rev().map(|&d| ALPHABET[d as usize] as char));
    out
}

pub fn decode(text: &str) -> Result<Vec<u8>, EccError> {
    let ones = text.chars().take_while(|&c| c == '1').count();
    let mut bytes: Vec<u8> = Vec::with_capacity(text.len());
    for c in text.chars().skip(ones) {
        let mut carry = digit_value(c).ok_or(EccError::BadCharacter(c))? as u32;
        for b in bytes.iter_mut() {
            carry += (*b as u32) * 58;
            *b = (carry & 0xff) as u8;
            carry >>= 8;
        }
        while carry > 0 {
            bytes.push((carry & 0xff) as u8);
            carry >>= 8;
        }
    }
    let mut out = vec![0u8; ones];
    out.extend(bytes.iter().rev());
    Ok(out)
}

fn checksum(data: &[u8]) -> [u8; CHECKSUM_LEN] {
    let d = double_sha256(data);
    d.0[..CHECKSUM_LEN].try_into().unwrap()
}

/// `version || payload || first four bytes of double_sha256(version || payload)`, in base 58.
pub fn base58check_encode(version: u8, payload: &[u8]) -> Result<String, EccError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(EccError::PayloadTooLong(payload.len()));
    }
    let mut data = Vec::with_capacity(1 + payload.len() + CHECKSUM_LEN);
    data.push(version);
    data.extend_from_slice(payload);
    let sum = checksum(&data);
    data.extend_from_slice(&sum);
    Ok(encode(&data))
}

pub fn base58check_decode(text: &str) -> Result<(u8, Vec<u8>), EccError> {
    let data = decode(text)?;
    if data.len() < 1 + CHECKSUM_LEN {
        return Err(EccError::TooShort);
    }
    let (body, sum) = data.split_at(data.len() - CHECKSUM_LEN);
    if checksum(body) != sum {
        return Err(EccError::BadChecksum);
    }
    Ok((body[0], body[1..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixture_address_decodes() {
        let (version, payload) = base58check_decode("14xuSZXtfGw5XqfYxEjp4crwYGYQDWmZ12").unwrap();
        assert_eq!(version, 0);
        assert_eq!(hex::encode(payload), "2b7b07d1dd05f5c7dcf29b94aa9cd7f2cc42f8aa");
    }

    #[test]
    fn all_zero_payload() {
        // reference string from the python base58 package
        assert_eq!(base58check_encode(0, &[0u8; 20]).unwrap(), "1111111111111111111114oLvT2");
    }

    #[test]
    fn excluded_symbols_rejected() {
        for bad in ["14xuSZXtfGw5XqfYxEjp4crwYGYQDWmZ1O", "l4xuSZXtfGw5XqfYxEjp4crwYGYQDWmZ12", "0abc", "I", "é"] {
            assert!(matches!(base58check_decode(bad), Err(EccError::BadCharacter(_))), "{bad}");
        }
    }

    #[test]
    fn perturbed_last_character_fails_checksum() {
        let good = "14xuSZXtfGw5XqfYxEjp4crwYGYQDWmZ12";
        let mut rejected = 0;
        for &c in ALPHABET.iter() {
            if c == b'2' {
                continue;
            }
            let mut s = good[..good.len() - 1].to_string();
            s.push(c as char);
            if base58check_decode(&s) == Err(EccError::BadChecksum) {
                rejected += 1;
            }
        }
        assert_eq!(rejected, 57);
    }

    #[test]
    fn payload_limit() {
        assert!(base58check_encode(0, &[1u8; 64]).is_ok());
        assert_eq!(base58check_encode(0, &[1u8; 65]), Err(EccError::PayloadTooLong(65)));
        assert_eq!(base58check_decode("1"), Err(EccError::TooShort));
    }

    proptest! {
        #[test]
        fn round_trip(version in any::<u8>(), payload in proptest::collection::vec(any::<u8>(), 0..=64)) {
            let text = base58check_encode(version, &payload).unwrap();
            prop_assert_eq!(base58check_decode(&text).unwrap(), (version, payload));
        }

        #[test]
        fn version_zero_leads_with_one(payload in proptest::collection::vec(any::<u8>(), 0..=64)) {
            prop_assert!(base58check_encode(0, &payload).unwrap().starts_with('1'));
        }
    }
}
