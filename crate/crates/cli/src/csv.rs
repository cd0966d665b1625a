//! Trace CSV emission. The format is fixed: one header, one row per control
//! step, floats printed with six significant digits (printf %g style), LF
//! line endings, no trailing separator.

use parktrack::sim::TraceRecord;

pub const CSV_HEADER: &str =
    "frame,t_s,x_m,y_m,heading_rad,speed_mps,eod_px,eoa_deg,cte,steer_deg,lat_err_m,proc_ms";

/// printf("%.6g")-style rendering: six significant digits, fixed notation
/// for decimal exponents in [-4, 5], scientific otherwise, trailing zeros
/// trimmed.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.5e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let frac = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.frac$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let m = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp:+03}")
    }
}

pub fn write_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&r.frame.to_string());
        for v in [
            r.t_s,
            r.x_m,
            r.y_m,
            r.heading_rad,
            r.speed_mps,
            r.eod_px,
            r.eoa_deg,
            r.cte,
            r.steer_deg,
            r.lat_err_m,
            r.proc_ms,
        ] {
            out.push(',');
            out.push_str(&fmt_g6(v));
        }
        out.push('\n');
    }
    out
}
