//! File formats: round-trip float formatting, polynomial and verdict JSON,
//! and the CSV layouts for rays, cusps and point clouds.

use std::io::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::farey::Slope;
use crate::limitset::LimitSetCloud;
use crate::moebius::{ConeOrders, Order};
use crate::pleating::{CuspPoint, RayTrace};
use crate::slice::{CuspCloud, Verdict};
use crate::traces::{Coefficients, TracePolynomial};

/// `x` with 17 significant digits in the style of C's `%.17g`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format_f64(x));
    }
    Value::Number(Number::from_str(&format_f64(x)).expect("formatted float is valid JSON"))
}

fn complex(z: Complex64) -> Value {
    Value::Array(vec![number(z.re), number(z.im)])
}

fn order_value(o: Order) -> Value {
    match o {
        Order::Finite(n) => Value::from(n),
        Order::Infinite => Value::String("inf".into()),
    }
}

fn orders_value(o: ConeOrders) -> Value {
    Value::Array(vec![order_value(o.a), order_value(o.b)])
}

fn parse_order(v: &Value) -> Result<Order> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => n.to_string().parse(),
        _ => Err(Error::Validation(format!("bad order {v}"))),
    }
}

/// `{"slope", "orders", "coefficients": [[re, im], ...]}`, ascending; exact
/// polynomials also carry `"exact": [integers]`.
pub fn polynomial_json(p: &TracePolynomial) -> Value {
    let mut obj = Map::new();
    obj.insert("slope".into(), Value::String(p.slope().to_string()));
    obj.insert("orders".into(), orders_value(p.orders()));
    obj.insert(
        "coefficients".into(),
        Value::Array(p.float_coefficients().iter().map(|c| complex(*c)).collect()),
    );
    if let Coefficients::Exact(c) = p.coefficients() {
        let ints = c
            .iter()
            .map(|n| Value::Number(Number::from_str(&n.to_string()).expect("integer literal")))
            .collect();
        obj.insert("exact".into(), Value::Array(ints));
    }
    Value::Object(obj)
}

/// Inverse of [`polynomial_json`].
pub fn polynomial_from_json(v: &Value) -> Result<TracePolynomial> {
    let bad = |what: &str| Error::Validation(format!("polynomial JSON: {what}"));
    let slope: Slope = v["slope"].as_str().ok_or_else(|| bad("slope"))?.parse()?;
    let orders = match v["orders"].as_array().map(Vec::as_slice) {
        Some([a, b]) => ConeOrders::new(parse_order(a)?, parse_order(b)?)?,
        _ => return Err(bad("orders")),
    };
    if let Some(exact) = v.get("exact").and_then(Value::as_array) {
        let ints = exact
            .iter()
            .map(|n| BigInt::from_str(&n.to_string()).map_err(|_| bad("exact")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(TracePolynomial::from_exact(slope, orders, ints));
    }
    let coeffs = v["coefficients"]
        .as_array()
        .ok_or_else(|| bad("coefficients"))?
        .iter()
        .map(|c| match c.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok(Complex64::new(
                re.as_f64().ok_or_else(|| bad("re"))?,
                im.as_f64().ok_or_else(|| bad("im"))?,
            )),
            _ => Err(bad("coefficient pair")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TracePolynomial::from_float(slope, orders, coeffs))
}

/// `{"rho": [re, im], "orders": [...], "verdict": tag, "witness": {...}}`.
pub fn verdict_json(rho: Complex64, orders: ConeOrders, v: &Verdict) -> Value {
    let witness = match v {
        Verdict::InteriorCertified { slope } => json!({ "slope": slope.to_string() }),
        Verdict::OnRay { slope, t } => json!({ "slope": slope.to_string(), "t": number(*t) }),
        Verdict::CuspNear { slope, distance } => {
            json!({ "slope": slope.to_string(), "distance": number(*distance) })
        }
        Verdict::ExteriorRelator { slope, trace } => {
            json!({ "slope": slope.to_string(), "trace": complex(*trace) })
        }
        Verdict::NondiscreteEvidence { words, jorgensen } => json!({
            "words": [words[0].to_string(), words[1].to_string()],
            "jorgensen": number(*jorgensen),
        }),
        Verdict::OutsideNecessaryBound { bound } => json!({ "bound": bound }),
        Verdict::Unknown => json!({}),
    };
    json!({
        "rho": complex(rho),
        "orders": orders_value(orders),
        "verdict": v.tag(),
        "witness": witness,
    })
}

fn csv_writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// Rows `slope,t,re,im`.
pub fn write_rays_csv<W: Write>(w: W, rays: &[RayTrace]) -> Result<()> {
    let mut out = csv_writer(w, &["slope", "t", "re", "im"])?;
    for ray in rays {
        let slope = ray.slope.to_string();
        for s in &ray.samples {
            out.write_record([
                slope.as_str(),
                &format_f64(s.t),
                &format_f64(s.rho.re),
                &format_f64(s.rho.im),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rows `slope,re,im,residual`.
pub fn write_cusps_csv<W: Write>(w: W, cusps: &[CuspPoint]) -> Result<()> {
    let mut out = csv_writer(w, &["slope", "re", "im", "residual"])?;
    for c in cusps {
        out.write_record([
            c.slope.to_string(),
            format_f64(c.rho.re),
            format_f64(c.rho.im),
            format_f64(c.residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Rows `p,q,re,im,residual`.
pub fn write_cloud_csv<W: Write>(w: W, cloud: &CuspCloud) -> Result<()> {
    let mut out = csv_writer(w, &["p", "q", "re", "im", "residual"])?;
    for pt in &cloud.points {
        let c = &pt.cusp;
        out.write_record([
            c.slope.p().to_string(),
            c.slope.q().to_string(),
            format_f64(c.rho.re),
            format_f64(c.rho.im),
            format_f64(c.residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Rows `re,im`.
pub fn write_limit_csv<W: Write>(w: W, cloud: &LimitSetCloud) -> Result<()> {
    let mut out = csv_writer(w, &["re", "im"])?;
    for z in &cloud.points {
        out.write_record([format_f64(z.re), format_f64(z.im)])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::cusp_cloud;
    use crate::traces::farey_polynomial_direct;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digit_format() {
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(-4.0), "-4");
        assert_eq!(format_f64(2.0), "2");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_f64(1e20), "1e+20");
        assert_eq!(format_f64(123456.5), "123456.5");
        assert_eq!(format_f64(0.0), "0");
    }

    proptest! {
        #[test]
        fn format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn polynomial_json_layout() {
        let p = farey_polynomial_direct(Slope::new(1, 2).unwrap(), ConeOrders::PARABOLIC).unwrap();
        let v = polynomial_json(&p);
        assert_eq!(
            v.to_string(),
            r#"{"slope":"1/2","orders":["inf","inf"],"coefficients":[[2,0],[0,0],[1,0]],"exact":[2,0,1]}"#
        );
        assert_eq!(polynomial_from_json(&v).unwrap(), p);
        let o = ConeOrders::finite(2, 3).unwrap();
        let p = farey_polynomial_direct(Slope::new(2, 5).unwrap(), o).unwrap();
        let back = polynomial_from_json(&polynomial_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn big_exact_coefficients_survive_json() {
        let p = farey_polynomial_direct(Slope::new(1, 200).unwrap(), ConeOrders::PARABOLIC).unwrap();
        let back = polynomial_from_json(&polynomial_json(&p)).unwrap();
        assert_eq!(back.exact_coefficients(), p.exact_coefficients());
    }

    #[test]
    fn verdict_json_layout() {
        let v = Verdict::OnRay {
            slope: Slope::ONE,
            t: -3.0,
        };
        let j = verdict_json(Complex64::new(5.0, 0.0), ConeOrders::PARABOLIC, &v);
        assert_eq!(
            j.to_string(),
            r#"{"rho":[5,0],"orders":["inf","inf"],"verdict":"OnRay","witness":{"slope":"1/1","t":-3}}"#
        );
    }

    #[test]
    fn cloud_csv_layout() {
        let cloud = cusp_cloud(1, ConeOrders::PARABOLIC).unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&mut buf, &cloud).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,q,re,im,residual");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1,-4,0,"));
        assert!(lines[2].starts_with("1,1,4,0,"));
    }
}
