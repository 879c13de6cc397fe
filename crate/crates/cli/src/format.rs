//! Deterministic JSON emission: every float is written with 17 significant
//! digits so identical requests produce byte-identical documents that parse
//! back to the exact same values.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

#[derive(Default)]
pub struct SigDigitFormatter;

impl Formatter for SigDigitFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut buf, SigDigitFormatter);
    value
        .serialize(&mut serializer)
        .expect("serialization of output documents cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let xs = [0.5, 1.0 / 3.0, std::f64::consts::LN_2, 1e-300, 12345.678];
        for &x in &xs {
            let json = to_json_string(&x);
            let back: f64 = serde_json::from_str(&json).unwrap();
            assert_eq!(x, back, "{json}");
        }
    }

    #[test]
    fn deterministic_document() {
        let doc = serde_json::json!({"p": 0.8, "argmin_l": 2});
        assert_eq!(to_json_string(&doc), to_json_string(&doc));
        assert!(to_json_string(&doc).contains("8.0000000000000004e-1"));
    }
}
