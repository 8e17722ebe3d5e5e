//! Fixed 12-significant-digit decimal output, as C's `%.12g`.

const DIGITS: i32 = 12;

pub fn g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(0.5), "0.5");
        assert_eq!(g12(-2.25), "-2.25");
        assert_eq!(g12(0.1 + 0.2), "0.3");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(123456.789), "123456.789");
        assert_eq!(g12(1e-5), "1e-05");
        assert_eq!(g12(0.0001234), "0.0001234");
        assert_eq!(g12(1.5e12), "1.5e+12");
        assert_eq!(g12(999999999999.0), "999999999999");
        assert_eq!(g12(0.99999999999999), "1");
        assert_eq!(g12(2.0f64.powi(-40)), "9.09494701773e-13");
    }
}
