//! `%g`-style formatting with a fixed number of significant digits.
//!
//! Output follows C's `printf("%.Pg")`: fixed notation when the decimal
//! exponent `X` satisfies `-4 <= X < P`, scientific otherwise, trailing zeros
//! removed. Rust's `{:e}` formatter is correctly rounded, so the digits are
//! taken from it.

use alloc::format;
use alloc::string::String;

/// Digits used for every serialized float (round-trips any `f64`).
pub const SERIAL_DIGITS: usize = 17;
/// Digits used for values printed inside rendered figures.
pub const DISPLAY_DIGITS: usize = 4;

pub fn format_sig(value: f64, precision: usize) -> String {
    let precision = precision.max(1);
    if value.is_nan() {
        return String::from("nan");
    }
    if value.is_infinite() {
        return String::from(if value > 0.0 { "inf" } else { "-inf" });
    }
    if value == 0.0 {
        return String::from(if value.is_sign_negative() { "-0" } else { "0" });
    }

    let sci = format!("{:.*e}", precision - 1, value);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent < -4 || exponent >= precision as i32 {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push(if exponent < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exponent.unsigned_abs()));
    } else if exponent < 0 {
        out.push_str("0.");
        for _ in 0..(-exponent - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    } else {
        let int_len = exponent as usize + 1;
        out.push_str(&digits[..int_len]);
        let frac = digits[int_len..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    }
    out
}

/// Serialization form: 17 significant digits.
pub fn format_serial(value: f64) -> String {
    format_sig(value, SERIAL_DIGITS)
}

/// Figure label form: 4 significant digits.
pub fn format_display(value: f64) -> String {
    format_sig(value, DISPLAY_DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(format_serial(8.0 / 9.0), "0.88888888888888884");
        assert_eq!(format_serial(25.0), "25");
        assert_eq!(format_serial(0.1), "0.10000000000000001");
        assert_eq!(format_serial(1e-12), "9.9999999999999998e-13");
        assert_eq!(format_serial(1e17), "1e+17");
        assert_eq!(format_serial(-2.5), "-2.5");
        assert_eq!(format_display(8.0 / 9.0), "0.8889");
        assert_eq!(format_display(1e7), "1e+07");
        assert_eq!(format_display(1234.4), "1234");
        assert_eq!(format_display(12344.0), "1.234e+04");
        assert_eq!(format_display(0.0001), "0.0001");
        assert_eq!(format_display(0.00001), "1e-05");
        assert_eq!(format_display(9.99996), "10");
        assert_eq!(format_display(0.0), "0");
    }

    #[test]
    fn serial_form_round_trips() {
        for &v in &[1.0 / 3.0, 2.0f64.sqrt(), 1e300, 5e-324, -7.25e-8, 123456789.0] {
            let s = format_serial(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }
}
