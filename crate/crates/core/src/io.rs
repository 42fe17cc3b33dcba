//! JSON files for channels and states.
//!
//! ```json
//! { "dim": 2, "kraus": [ [[1,0],[0,0],[0,0],[1,0]] ] }
//! { "dim": 2, "matrix": [[0.5,0],[0.5,0],[0.5,0],[0.5,0]] }
//! ```
//!
//! Every matrix is a flat row-major list of `[re, im]` pairs. Floats are
//! written in shortest round-trip form, so write-then-read is bit-exact.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::states::DensityMatrix;

type Entries = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<Entries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub matrix: Entries,
}

fn to_matrix(dim: usize, entries: &[[f64; 2]], field: &str) -> Result<ComplexMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::Malformed(format!(
            "{field}: expected {} [re, im] pairs for dim {dim}, got {}",
            dim * dim,
            entries.len()
        )));
    }
    ComplexMatrix::new(dim, dim, entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .map_err(|e| Error::Malformed(format!("{field}: {e}")))
}

fn to_entries(m: &ComplexMatrix) -> Entries {
    m.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Malformed("dim: must be at least 1".into()));
    }
    Ok(())
}

fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    // serde_json's message already carries "at line L column C"
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl ChannelFile {
    pub fn from_channel(phi: &KrausChannel) -> Result<Self> {
        if !phi.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "channel files hold square channels, got {} -> {}",
                phi.dim_in(),
                phi.dim_out()
            )));
        }
        Ok(ChannelFile { dim: phi.dim_in(), kraus: phi.kraus().iter().map(to_entries).collect() })
    }

    /// Validates shapes and Kraus completeness at `tol`.
    pub fn into_channel(self, tol: Tolerance) -> Result<KrausChannel> {
        check_dim(self.dim)?;
        if self.kraus.is_empty() {
            return Err(Error::Malformed("kraus: at least one operator required".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, m)| to_matrix(self.dim, m, &format!("kraus[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(kraus, tol)
    }
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        StateFile { dim: rho.dim(), matrix: to_entries(rho.matrix()) }
    }

    pub fn into_state(self, tol: Tolerance) -> Result<DensityMatrix> {
        check_dim(self.dim)?;
        DensityMatrix::with_tolerance(to_matrix(self.dim, &self.matrix, "matrix")?, tol)
    }
}

pub fn parse_channel_str(text: &str, tol: Tolerance) -> Result<KrausChannel> {
    decode::<ChannelFile>(text)?.into_channel(tol)
}

pub fn parse_state_str(text: &str, tol: Tolerance) -> Result<DensityMatrix> {
    decode::<StateFile>(text)?.into_state(tol)
}

pub fn parse_channel_file(path: impl AsRef<Path>, tol: Tolerance) -> Result<KrausChannel> {
    parse_channel_str(&read(path.as_ref())?, tol)
}

pub fn parse_state_file(path: impl AsRef<Path>, tol: Tolerance) -> Result<DensityMatrix> {
    parse_state_str(&read(path.as_ref())?, tol)
}

pub fn channel_to_json(phi: &KrausChannel) -> Result<String> {
    serde_json::to_string_pretty(&ChannelFile::from_channel(phi)?).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn state_to_json(rho: &DensityMatrix) -> Result<String> {
    serde_json::to_string_pretty(&StateFile::from_state(rho)).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn write_channel_file(path: impl AsRef<Path>, phi: &KrausChannel) -> Result<()> {
    write(path.as_ref(), &channel_to_json(phi)?)
}

pub fn write_state_file(path: impl AsRef<Path>, rho: &DensityMatrix) -> Result<()> {
    write(path.as_ref(), &state_to_json(rho)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_dio_counterexample, fixture_u0_rho0};

    #[test]
    fn identity_file() {
        let text = r#"{ "dim": 2, "kraus": [ [[1,0],[0,0],[0,0],[1,0]] ] }"#;
        let phi = parse_channel_str(text, Tolerance::DEFAULT).unwrap();
        assert_eq!(phi.kraus(), KrausChannel::identity(2).kraus());
    }

    #[test]
    fn overcomplete_names_the_residual() {
        let s = std::f64::consts::SQRT_2;
        let text = format!(r#"{{ "dim": 2, "kraus": [ [[{s},0],[0,0],[0,0],[{s},0]] ] }}"#);
        match parse_channel_str(&text, Tolerance::DEFAULT) {
            Err(Error::Incomplete { residual, .. }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_reports_position() {
        let err = parse_channel_str("{ \"dim\": 2,\n  \"kraus\": [ [[1,0],[0,0]] ", Tolerance::DEFAULT).unwrap_err();
        assert!(matches!(&err, Error::Malformed(m) if m.contains("line 2")), "{err}");
        let err =
            parse_channel_str(r#"{ "dim": 2, "kraus": [ [[1,0],[0,0],[0,0]] ] }"#, Tolerance::DEFAULT).unwrap_err();
        assert!(matches!(&err, Error::Malformed(m) if m.contains("kraus[0]")), "{err}");
        let err = parse_state_str(r#"{ "dim": 1, "matrix": [[1,0]], "extra": 3 }"#, Tolerance::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn round_trips_are_bit_exact() {
        let phi = fixture_dio_counterexample();
        let back = parse_channel_str(&channel_to_json(&phi).unwrap(), phi.tolerance()).unwrap();
        assert_eq!(back.kraus(), phi.kraus());
        let (_, rho0) = fixture_u0_rho0();
        let back = parse_state_str(&state_to_json(&rho0).unwrap(), Tolerance::PRINTED).unwrap();
        assert_eq!(back.matrix(), rho0.matrix());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.json");
        let phi = fixture_dio_counterexample();
        write_channel_file(&path, &phi).unwrap();
        assert_eq!(parse_channel_file(&path, Tolerance::DEFAULT).unwrap().kraus(), phi.kraus());
        assert!(matches!(parse_state_file(dir.path().join("missing.json"), Tolerance::DEFAULT), Err(Error::Io(_))));
    }
}
