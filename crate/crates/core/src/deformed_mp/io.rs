//! Population input and density output formats.
//!
//! A population file is JSON, either `{"sigmas": [..]}` or
//! `{"atoms": [{"sigma": s, "weight": w}, ..], "M": m}`. Densities are
//! written as CSV with header `E,rho`.

use std::io::Write;

use serde::Deserialize;

use super::population::{Atom, PopulationSpectrum};
use crate::error::{invalid, Result};

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum PopulationFile {
    Sigmas {
        sigmas: Vec<f64>,
    },
    Atoms {
        atoms: Vec<Atom>,
        #[serde(rename = "M")]
        m: usize,
    },
}

pub fn population_from_json(text: &str) -> Result<PopulationSpectrum> {
    let parsed: PopulationFile =
        serde_json::from_str(text).map_err(|e| invalid(format!("population JSON: {e}")))?;
    match parsed {
        PopulationFile::Sigmas { sigmas } => PopulationSpectrum::new(sigmas),
        PopulationFile::Atoms { atoms, m } => PopulationSpectrum::from_atoms(&atoms, m),
    }
}

pub fn write_density_csv<W: Write>(mut w: W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "E,rho")?;
    for (e, rho) in rows {
        writeln!(w, "{e},{rho}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_shapes() {
        let p = population_from_json(r#"{"sigmas": [1, 4, 1]}"#).unwrap();
        assert_eq!(p.sigmas(), &[4.0, 1.0, 1.0]);
        let q = population_from_json(r#"{"atoms": [{"sigma": 4, "weight": 1}, {"sigma": 1, "weight": 1}], "M": 6}"#)
            .unwrap();
        assert_eq!(q.len(), 6);
        assert!(population_from_json(r#"{"sigma": [1]}"#).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &[(0.5, 0.25), (1.0, 0.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "E,rho\n0.5,0.25\n1,0\n");
    }
}
