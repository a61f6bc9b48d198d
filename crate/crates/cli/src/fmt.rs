//! Locale-independent CSV number formatting: reals carry 12 significant
//! digits, printed in plain decimal when the magnitude allows and in
//! scientific notation otherwise, with trailing zeros trimmed.

pub fn real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let prec = (11 - exp).max(0) as usize;
        trim_decimal(format!("{x:.prec$}"))
    } else {
        let s = format!("{x:.11e}");
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim_decimal(mantissa.to_string())),
            None => s,
        }
    }
}

fn trim_decimal(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
