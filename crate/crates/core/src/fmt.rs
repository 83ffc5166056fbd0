//! Deterministic number formatting for text outputs.
//!
//! Angles, impedances and ratios are written with six significant digits;
//! frequencies in Hz use scientific notation, so `2.4e9` and `46.0397` come
//! out as written here.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mant))
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

/// Frequency in Hz: scientific notation, up to ten significant digits.
pub fn hz(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return sig6(x);
    }
    let sci = format!("{x:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    format!("{}e{exp}", trim_zeros(mant))
}

/// JSON number text: [`hz`] for magnitudes of 1e6 and above, else [`sig6`].
pub fn json_number(x: f64) -> String {
    if x.abs() >= 1e6 {
        hz(x)
    } else {
        sig6(x)
    }
}

/// Pretty JSON whose floating-point numbers go through [`sig6`].
struct Sig6Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig6Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(json_number(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with numbers formatted by [`json_number`].
pub fn to_json_sig6<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Sig6Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(sig6(46.03971), "46.0397");
        assert_eq!(sig6(50.0), "50");
        assert_eq!(sig6(0.5), "0.5");
        assert_eq!(sig6(1e9), "1e9");
        assert_eq!(sig6(2.4e9), "2.4e9");
        assert_eq!(sig6(-3.0103), "-3.0103");
        assert_eq!(sig6(1.234567e-15), "1.23457e-15");
        assert_eq!(sig6(999999.7), "1e6");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(0.000123456), "0.000123456");
        assert_eq!(hz(1.0125e9), "1.0125e9");
        assert_eq!(hz(1.0123456789e9), "1.012345679e9");
    }

    #[test]
    fn json_numbers() {
        let v = serde_json::json!({"f": 2.4e9, "z": 44.79960123, "n": 3, "x": [0.1, 1e-20]});
        let s = to_json_sig6(&v).unwrap();
        assert!(s.contains("\"f\": 2.4e9"));
        assert!(s.contains("\"z\": 44.7996"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"][1].as_f64(), Some(1e-20));
    }

    proptest! {
        #[test]
        fn parses_back_within_six_digits(x in -1e12f64..1e12) {
            let y: f64 = sig6(x).parse().unwrap();
            prop_assert!((y - x).abs() <= 5e-6 * x.abs() + 1e-300);
        }
    }
}
