//! Flat tables <-> nested JSON arrays, outermost dimension first.

use serde_json::Value;

pub(crate) fn nest(dims: &[usize], flat: &[f64]) -> Value {
    debug_assert_eq!(dims.iter().product::<usize>(), flat.len());
    match dims.split_first() {
        None => Value::from(flat[0]),
        Some((&d, rest)) => {
            let stride: usize = rest.iter().product();
            Value::Array(
                (0..d)
                    .map(|i| nest(rest, &flat[i * stride..(i + 1) * stride]))
                    .collect(),
            )
        }
    }
}

pub(crate) fn flatten(dims: &[usize], value: &Value) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(dims.iter().product());
    flatten_into(dims, value, 0, &mut out)?;
    Ok(out)
}

fn flatten_into(
    dims: &[usize],
    value: &Value,
    depth: usize,
    out: &mut Vec<f64>,
) -> Result<(), String> {
    match dims.split_first() {
        None => {
            let v = value
                .as_f64()
                .ok_or_else(|| format!("expected a number at depth {depth}, found {value}"))?;
            out.push(v);
            Ok(())
        }
        Some((&d, rest)) => {
            let arr = value
                .as_array()
                .ok_or_else(|| format!("expected an array at depth {depth}"))?;
            if arr.len() != d {
                return Err(format!(
                    "depth {depth}: expected length {d}, found {}",
                    arr.len()
                ));
            }
            arr.iter()
                .try_for_each(|v| flatten_into(rest, v, depth + 1, out))
        }
    }
}
