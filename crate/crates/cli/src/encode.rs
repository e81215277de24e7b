//! JSON encodings for reports and the plotting CSV.

use pickforge_core::{Complex64, ComplexMatrix, Realization, ToleranceConfig, VerificationReport};
use serde_json::{json, Value};

/// `[re, im]`, with negative zeros normalized.
pub fn complex(z: Complex64) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn realization(r: &Realization) -> Value {
    json!({
        "state_dim": r.state_dim(),
        "a": matrix(&r.a),
        "b": matrix(&r.b),
        "c": matrix(&r.c),
        "d": matrix(&r.d),
    })
}

pub fn checks(report: &VerificationReport) -> Value {
    Value::Array(
        report
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "value": c.value, "threshold": c.threshold, "passed": c.passed }))
            .collect(),
    )
}

pub fn tolerances(cfg: &ToleranceConfig) -> Value {
    json!({
        "psd_tol": cfg.psd_tol,
        "residual_tol": cfg.residual_tol,
        "truncation_tol": cfg.truncation_tol,
        "grid_boundary_points": cfg.grid_boundary_points,
        "grid_interior_points": cfg.grid_interior_points,
        "kernel_tuples": cfg.kernel_tuples,
    })
}

/// C's `%.17g`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let s = format!("{:.16e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if x < 0.0 { "-" } else { "" };
    let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
    if !(-4..17).contains(&exp) {
        let m = trim(format!("{}.{}", &digits[..1], &digits[1..]));
        return format!("{sign}{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let body = if exp >= 0 {
        let cut = exp as usize + 1;
        format!("{}.{}", &digits[..cut], &digits[cut..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim(body))
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

pub fn csv(rows: &[(Complex64, f64)]) -> String {
    let mut out = String::from("z_re,z_im,min_eig\n");
    for (z, v) in rows {
        out.push_str(&format!("{},{},{}\n", g17(z.re), g17(z.im), g17(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1.5e16, "15000000000000000"),
            (0.0001, "0.0001"),
            (-0.0, "-0"),
            (1.0 / 3.0, "0.33333333333333331"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(g17(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let text = csv(&[(Complex64::new(0.5, -0.25), -1e-12)]);
        assert_eq!(text, "z_re,z_im,min_eig\n0.5,-0.25,-9.9999999999999998e-13\n");
    }
}
