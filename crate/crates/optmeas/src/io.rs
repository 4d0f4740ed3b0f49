//! File formats: CSV point sets and weights, design/diameter/convergence
//! artifacts in CSV and JSON.
//!
//! Every floating-point value is serialized with 17 significant digits so
//! artifacts round-trip exactly and regression comparisons can be
//! byte-for-byte. Non-finite values appear as `inf`/`-inf`/`NaN` in CSV and
//! as the same strings in JSON (JSON numbers cannot carry them).

use std::io::{Read, Write};

use num_complex::Complex;
use serde_json::{json, Map, Number, Value};

use crate::asymptotics::{ConvergenceReport, DiameterEstimate};
use crate::design_solver::DesignResult;
use crate::error::{Error, Result};
use crate::extremal_points::PointFamily;
use crate::poly_basis::PointSet;
use crate::scalar::Real;

/// 17-significant-digit decimal form of a scalar; round-trips `f64` exactly.
pub fn fmt_real<R: Real>(x: R) -> String {
    let x = x.to_f64().unwrap_or(f64::NAN);
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real<R: Real>(s: &str) -> Result<R> {
    let t = s.trim();
    let v = match t {
        "inf" | "+inf" | "Infinity" => f64::INFINITY,
        "-inf" | "-Infinity" => f64::NEG_INFINITY,
        "NaN" | "nan" => f64::NAN,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("not a number: `{t}`")))?,
    };
    R::from_f64(v).ok_or_else(|| Error::Parse(format!("out of range: `{t}`")))
}

/// JSON encoding of a scalar; non-finite values become strings, since JSON
/// numbers cannot carry them. Render with [`render_json`] to get the
/// 17-significant-digit form on disk.
pub fn json_real<R: Real>(x: R) -> Value {
    let v = x.to_f64().unwrap_or(f64::NAN);
    match Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_real(x)),
    }
}

/// Canonical JSON rendering: two-space indentation, keys in map order
/// (sorted), floating-point numbers with 17 significant digits. Used for
/// every JSON artifact so identical runs produce identical bytes.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    render_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn render_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&fmt_real(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string encodes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                render_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("string encodes"));
                out.push_str(": ");
                render_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Writes a point set as CSV with columns `re_1, im_1, …, re_d, im_d`.
pub fn write_point_set_csv<R: Real, W: Write>(points: &PointSet<R>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = Vec::with_capacity(2 * points.dim());
    for j in 1..=points.dim() {
        header.push(format!("re_{j}"));
        header.push(format!("im_{j}"));
    }
    wtr.write_record(&header)?;
    for pt in points.iter_points() {
        let mut record = Vec::with_capacity(2 * points.dim());
        for c in pt {
            record.push(fmt_real(c.re));
            record.push(fmt_real(c.im));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a point set from CSV; the dimension comes from the header.
pub fn read_point_set_csv<R: Real, I: Read>(input: I, label: &str) -> Result<PointSet<R>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || header.len() % 2 != 0 {
        return Err(Error::Parse(
            "point CSV needs paired re_k, im_k columns".into(),
        ));
    }
    let dim = header.len() / 2;
    for j in 0..dim {
        if header.get(2 * j) != Some(format!("re_{}", j + 1).as_str())
            || header.get(2 * j + 1) != Some(format!("im_{}", j + 1).as_str())
        {
            return Err(Error::Parse(format!(
                "unexpected point CSV header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut coords = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 2 * dim {
            return Err(Error::Parse("ragged point CSV row".into()));
        }
        for j in 0..dim {
            let re: R = parse_real(record.get(2 * j).unwrap())?;
            let im: R = parse_real(record.get(2 * j + 1).unwrap())?;
            coords.push(Complex::new(re, im));
        }
    }
    PointSet::new(dim, coords, label)
}

/// Writes the `phi` column of an admissible weight, aligned with the
/// candidate CSV row order.
pub fn write_phi_csv<R: Real, W: Write>(phi: &[R], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["phi"])?;
    for &p in phi {
        wtr.write_record([fmt_real(p)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a `phi` column; `expected_len` guards alignment with the candidate
/// set.
pub fn read_phi_csv<R: Real, I: Read>(input: I, expected_len: usize) -> Result<Vec<R>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() != 1 || header.get(0) != Some("phi") {
        return Err(Error::Parse("weight CSV needs a single `phi` column".into()));
    }
    let mut phi = Vec::new();
    for record in rdr.records() {
        let record = record?;
        phi.push(parse_real(record.get(0).unwrap_or(""))?);
    }
    if phi.len() != expected_len {
        return Err(Error::LengthMismatch {
            expected: expected_len,
            got: phi.len(),
        });
    }
    Ok(phi)
}

/// Threshold above which a candidate counts as design support in exports.
pub const SUPPORT_EXPORT_THRESHOLD: f64 = 1e-7;

/// JSON object for a solved design:
/// `{weights, support_indices, kw_gap, log_det, iterations, converged}`.
pub fn design_result_json<R: Real>(result: &DesignResult<R>) -> Value {
    let weights: Vec<Value> = result.measure.weights().iter().map(|&w| json_real(w)).collect();
    let support: Vec<Value> = result
        .measure
        .support_indices(crate::scalar::real(SUPPORT_EXPORT_THRESHOLD))
        .into_iter()
        .map(|i| Value::Number(Number::from(i as u64)))
        .collect();
    let mut obj = Map::new();
    obj.insert("weights".into(), Value::Array(weights));
    obj.insert("support_indices".into(), Value::Array(support));
    obj.insert("kw_gap".into(), json_real(result.kw_gap));
    obj.insert("log_det".into(), json_real(result.log_det));
    obj.insert(
        "iterations".into(),
        Value::Number(Number::from(result.iterations as u64)),
    );
    obj.insert("converged".into(), Value::Bool(result.converged));
    Value::Object(obj)
}

/// CSV trace `(iteration, log_det, kw_gap)` of a solve.
pub fn write_trace_csv<R: Real, W: Write>(result: &DesignResult<R>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["iteration", "log_det", "kw_gap"])?;
    for point in &result.trace {
        wtr.write_record([
            point.iteration.to_string(),
            fmt_real(point.log_det),
            fmt_real(point.kw_gap),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// JSON sidecar for an exported point family.
pub fn family_sidecar_json<R: Real>(family: &PointFamily<R>) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(family.kind.name().into()));
    obj.insert("n".into(), Value::Number(Number::from(family.degree as u64)));
    obj.insert(
        "log_weighted_vdm".into(),
        json_real(family.log_weighted_vdm),
    );
    if !family.increments.is_empty() {
        obj.insert(
            "increments".into(),
            Value::Array(family.increments.iter().map(|&x| json_real(x)).collect()),
        );
    }
    Value::Object(obj)
}

/// Diameter table: one CSV row per degree with both routes, the log-domain
/// sandwich, and a violation flag.
pub fn write_diameter_csv<R: Real, W: Write>(
    estimates: &[(DiameterEstimate<R>, bool, &str)],
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "degree",
        "delta_from_points",
        "delta_from_gram",
        "log_det",
        "log_sandwich_lo",
        "log_sandwich_hi",
        "sandwich_ok",
        "delta_source",
    ])?;
    for (est, ok, source) in estimates {
        wtr.write_record([
            est.degree.to_string(),
            fmt_real(est.delta_from_points),
            fmt_real(est.delta_from_gram),
            fmt_real(est.log_det),
            fmt_real(est.log_sandwich_lo),
            fmt_real(est.log_sandwich_hi),
            ok.to_string(),
            (*source).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Convergence report as CSV: one row per degree, one `err_a_b` column per
/// tracked moment, plus the localization column.
pub fn write_convergence_csv<R: Real, W: Write>(
    report: &ConvergenceReport<R>,
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["degree".to_string(), "mass_outside_region".to_string()];
    for &(a, b) in &report.moment_indices {
        header.push(format!("err_{a}_{b}"));
    }
    wtr.write_record(&header)?;
    for (pos, &degree) in report.degrees.iter().enumerate() {
        let mut record = vec![
            degree.to_string(),
            fmt_real(report.mass_outside_region[pos]),
        ];
        for err in &report.moment_errors[pos] {
            record.push(fmt_real(*err));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Convergence report as JSON.
pub fn convergence_report_json<R: Real>(report: &ConvergenceReport<R>) -> Value {
    let mut per_degree = Vec::new();
    for (pos, &degree) in report.degrees.iter().enumerate() {
        let mut errors = Map::new();
        for (k, &(a, b)) in report.moment_indices.iter().enumerate() {
            errors.insert(format!("err_{a}_{b}"), json_real(report.moment_errors[pos][k]));
        }
        per_degree.push(json!({
            "degree": degree,
            "mass_outside_region": json_real(report.mass_outside_region[pos]),
            "moment_errors": Value::Object(errors),
        }));
    }
    json!({
        "reference": report.reference_label,
        "localization_radius": json_real(report.localization_radius),
        "degrees": Value::Array(per_degree),
    })
}

/// Two-column plot data (x = degree, y = value).
pub fn write_plot_csv<R: Real, W: Write>(
    y_name: &str,
    rows: &[(usize, R)],
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["degree", y_name])?;
    for &(degree, y) in rows {
        wtr.write_record([degree.to_string(), fmt_real(y)])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DiscreteMeasure;
    use proptest::prelude::*;

    #[test]
    fn point_set_round_trip() {
        let pts = PointSet::new(
            2,
            vec![
                Complex::new(0.1, -0.2),
                Complex::new(1.0 / 3.0, 0.0),
                Complex::new(-1.5e-13, 2.0),
                Complex::new(0.0, -7.25),
            ],
            "round",
        )
        .unwrap();
        let mut buf = Vec::new();
        write_point_set_csv(&pts, &mut buf).unwrap();
        let back: PointSet<f64> = read_point_set_csv(&buf[..], "round").unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.len(), 2);
        for i in 0..2 {
            assert_eq!(back.point(i), pts.point(i));
        }
    }

    #[test]
    fn phi_round_trip_with_infinity() {
        let phi = vec![0.0, 1.5, f64::INFINITY, 1e-300];
        let mut buf = Vec::new();
        write_phi_csv(&phi, &mut buf).unwrap();
        let back: Vec<f64> = read_phi_csv(&buf[..], 4).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn phi_length_guard() {
        let mut buf = Vec::new();
        write_phi_csv(&[0.0f64, 1.0], &mut buf).unwrap();
        assert!(matches!(
            read_phi_csv::<f64, _>(&buf[..], 3),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn design_json_shape() {
        let result = DesignResult {
            measure: DiscreteMeasure::new(vec![0.5, 0.0, 0.5]).unwrap(),
            kw_gap: 1e-9,
            log_det: -0.25,
            iterations: 12,
            trace: vec![],
            converged: true,
        };
        let v = design_result_json(&result);
        assert_eq!(v["support_indices"], serde_json::json!([0, 2]));
        assert_eq!(v["iterations"], serde_json::json!(12));
        assert_eq!(v["converged"], serde_json::json!(true));
        assert_eq!(v["weights"].as_array().unwrap().len(), 3);
        // 17-significant-digit numbers survive a JSON round trip exactly.
        let text = serde_json::to_string(&v).unwrap();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["log_det"].as_f64().unwrap(), -0.25);
    }

    proptest! {
        #[test]
        fn fmt_real_round_trips_exactly(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let s = fmt_real(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
