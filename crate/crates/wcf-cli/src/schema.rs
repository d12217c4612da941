//! The JSON file format for stability data.
//!
//! Rationals are stored as strings `"p/q"` (or just `"p"`) so files stay
//! exact and diff-able; weights are listed per total charge `gamma`, and the
//! central charge and quadratic form are given by their rational matrix
//! entries.  Loading validates everything the library requires: a symmetric
//! non-degenerate form, cone charges within the truncation order, and no
//! duplicate weight entries.

use std::collections::BTreeSet;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use wcf_core::{
    Charge, CentralCharge, Pairing, QuadraticForm, Rat, RationalComplex, RaySpectrum,
    StabilityData, TruncationOrder,
};

use crate::{usage, CliError};

/// Serialized stability data.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityFile {
    pub k: u32,
    #[serde(rename = "Z")]
    pub z: CentralChargeFile,
    #[serde(rename = "Q")]
    pub q: [[String; 2]; 2],
    pub omega: Vec<OmegaEntry>,
    pub order: u32,
}

/// The central charge's values on the two basis charges, as `[re, im]`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralChargeFile {
    pub gamma1: [String; 2],
    pub gamma2: [String; 2],
}

/// One weight: the total charge `gamma = n * primitive` and its value.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaEntry {
    pub gamma: [i64; 2],
    pub value: String,
}

/// Parses `"p"` or `"p/q"` into an exact rational, rejecting zero
/// denominators with a message naming the offending field.
pub fn parse_rational(text: &str, field: &str) -> Result<Rat, CliError> {
    let (numer_text, denom_text) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let numer: BigInt = numer_text
        .parse()
        .map_err(|_| usage(format!("field {field}: {text:?} is not a rational \"p/q\"")))?;
    let denom: BigInt = denom_text
        .parse()
        .map_err(|_| usage(format!("field {field}: {text:?} is not a rational \"p/q\"")))?;
    if denom.is_zero() {
        return Err(usage(format!("field {field}: zero denominator in {text:?}")));
    }
    Ok(Rat::new(numer, denom))
}

/// Reads and validates a stability file, optionally overriding the stored
/// truncation order.
pub fn load(path: &Path, order_override: Option<u32>) -> Result<StabilityData, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: StabilityFile = serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "{}: parse error at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    to_data(&file, order_override)
}

fn to_data(file: &StabilityFile, order_override: Option<u32>) -> Result<StabilityData, CliError> {
    let order = TruncationOrder::new(order_override.unwrap_or(file.order))
        .map_err(|e| usage(format!("field order: {e}")))?;
    let pairing = Pairing::new(file.k);
    let component = |values: &[String; 2], field: &str| -> Result<RationalComplex, CliError> {
        Ok(RationalComplex::new(
            parse_rational(&values[0], &format!("{field}[0]"))?,
            parse_rational(&values[1], &format!("{field}[1]"))?,
        ))
    };
    let central_charge = CentralCharge::new(
        component(&file.z.gamma1, "Z.gamma1")?,
        component(&file.z.gamma2, "Z.gamma2")?,
    );
    let q12 = parse_rational(&file.q[0][1], "Q[0][1]")?;
    let q21 = parse_rational(&file.q[1][0], "Q[1][0]")?;
    if q12 != q21 {
        return Err(usage("field Q: matrix must be symmetric (Q[0][1] != Q[1][0])"));
    }
    let form = QuadraticForm::new(
        parse_rational(&file.q[0][0], "Q[0][0]")?,
        q12,
        parse_rational(&file.q[1][1], "Q[1][1]")?,
    )
    .map_err(|e| usage(format!("field Q: {e}")))?;
    let mut spectrum = RaySpectrum::new(order);
    let mut seen: BTreeSet<Charge> = BTreeSet::new();
    for (i, entry) in file.omega.iter().enumerate() {
        let gamma = Charge::new(entry.gamma[0], entry.gamma[1]);
        if !seen.insert(gamma) {
            return Err(usage(format!("field omega[{i}]: duplicate charge {gamma}")));
        }
        let value = parse_rational(&entry.value, &format!("omega[{i}].value"))?;
        spectrum
            .set_omega(gamma, value)
            .map_err(|e| usage(format!("field omega[{i}]: {e}")))?;
    }
    Ok(StabilityData { pairing, central_charge, form, spectrum })
}

/// Serializes stability data back to the file schema, with weights in
/// slope-descending, multiple-ascending order.
pub fn to_file(data: &StabilityData) -> StabilityFile {
    let z = &data.central_charge;
    let pair = |c: &RationalComplex| -> [String; 2] { [c.re.to_string(), c.im.to_string()] };
    StabilityFile {
        k: data.pairing.k(),
        z: CentralChargeFile { gamma1: pair(&z.z1), gamma2: pair(&z.z2) },
        q: [
            [data.form.q11().to_string(), data.form.q12().to_string()],
            [data.form.q12().to_string(), data.form.q22().to_string()],
        ],
        omega: sorted_entries(&data.spectrum)
            .into_iter()
            .map(|(primitive, multiple, value)| OmegaEntry {
                gamma: [
                    primitive.a * i64::from(multiple),
                    primitive.b * i64::from(multiple),
                ],
                value: value.to_string(),
            })
            .collect(),
        order: data.spectrum.order().get(),
    }
}

/// Writes a stability file as pretty-printed JSON.
pub fn save(path: &Path, data: &StabilityData) -> Result<(), CliError> {
    let file = to_file(data);
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| usage(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Spectrum entries in slope-descending, then multiple-ascending order —
/// the deterministic row order used for all output.
pub fn sorted_entries(spectrum: &RaySpectrum) -> Vec<(Charge, u32, Rat)> {
    let mut rows: Vec<(Charge, u32, Rat)> = spectrum
        .entries()
        .map(|(p, m, w)| (p, m, w.clone()))
        .collect();
    rows.sort_by(|x, y| {
        wcf_core::slope_compare(x.0, y.0)
            .expect("spectrum rays are nonzero cone charges")
            .then(x.1.cmp(&y.1))
    });
    rows
}
