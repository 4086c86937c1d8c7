//! Centering, PCA whitening, FastICA and axis canonicalization.
//!
//! The chain is `X → C = X − μ → Z = C·A → S = Z·R`, where `A` whitens and
//! `R` is orthogonal.

mod center;
mod ica;
mod skew;
mod whiten;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

pub use center::{center, CenteringModel};
pub use ica::{fast_ica, fit_ica, rotate, IcaModel, IcaParams};
pub use skew::{canonicalize_axes, skewness};
pub use whiten::{pca_whiten, WhiteningModel, RANK_TOLERANCE};

use crate::error::{Error, Result};
use crate::io::{CacheContainer, EmbeddingMatrix, PayloadReader, PayloadWriter, Section, Vocabulary};

pub const TAG_CENTERING: [u8; 4] = *b"CENT";
pub const TAG_WHITENING: [u8; 4] = *b"WHIT";
pub const TAG_ICA: [u8; 4] = *b"ICAR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Pca,
    Ica,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Pca => "pca",
            Space::Ica => "ica",
        })
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Space::Pca),
            "ica" => Ok(Space::Ica),
            other => Err(Error::invalid(format!("unknown space {other:?}"))),
        }
    }
}

/// Fingerprints of the models that produced a transformed matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub centering: u64,
    pub whitening: u64,
    pub ica: Option<u64>,
}

/// `Z` (PCA space) or `S` (ICA space) with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedEmbeddings {
    space: Space,
    data: Array2<f64>,
    vocab: Arc<Vocabulary>,
    provenance: Provenance,
}

impl TransformedEmbeddings {
    pub fn new(
        space: Space,
        data: Array2<f64>,
        vocab: Arc<Vocabulary>,
        provenance: Provenance,
    ) -> Result<Self> {
        if data.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                found: data.nrows(),
            });
        }
        Ok(Self {
            space,
            data,
            vocab,
            provenance,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn shared_vocab(&self) -> Arc<Vocabulary> {
        self.vocab.clone()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

impl CenteringModel {
    pub fn to_section(&self) -> Section {
        let payload = PayloadWriter::default()
            .u64(self.mean.len() as u64)
            .f64s(self.mean.iter())
            .finish();
        Section {
            tag: TAG_CENTERING,
            payload,
        }
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let mut r = PayloadReader::new(&s.payload, "CENT");
        let d = r.u64()? as usize;
        let mean = Array1::from(r.f64s(d)?);
        r.finish()?;
        Ok(Self { mean })
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a(&self.to_section().payload)
    }
}

impl WhiteningModel {
    pub fn to_section(&self) -> Section {
        let d = self.singular_values.len();
        let payload = PayloadWriter::default()
            .u64(d as u64)
            .u64(self.fitted_n as u64)
            .f64s(self.singular_values.iter())
            .f64s(self.transform.iter())
            .finish();
        Section {
            tag: TAG_WHITENING,
            payload,
        }
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let mut r = PayloadReader::new(&s.payload, "WHIT");
        let d = r.u64()? as usize;
        let fitted_n = r.u64()? as usize;
        let singular_values = Array1::from(r.f64s(d)?);
        let transform = Array2::from_shape_vec((d, d), r.f64s(d * d)?)
            .map_err(|e| Error::MalformedCache(e.to_string()))?;
        r.finish()?;
        Ok(Self {
            transform,
            singular_values,
            fitted_n,
        })
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a(&self.to_section().payload)
    }
}

impl IcaModel {
    pub fn to_section(&self) -> Section {
        let d = self.axis_skewness.len();
        let payload = PayloadWriter::default()
            .u64(d as u64)
            .u64(self.seed)
            .u64(self.max_iter as u64)
            .u64(self.n_iterations_used as u64)
            .u64(self.converged as u64)
            .f64(self.tolerance)
            .f64s(self.axis_skewness.iter())
            .f64s(self.rotation.iter())
            .finish();
        Section {
            tag: TAG_ICA,
            payload,
        }
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let mut r = PayloadReader::new(&s.payload, "ICAR");
        let d = r.u64()? as usize;
        let seed = r.u64()?;
        let max_iter = r.u64()? as usize;
        let n_iterations_used = r.u64()? as usize;
        let converged = r.u64()? != 0;
        let tolerance = r.f64()?;
        let axis_skewness = Array1::from(r.f64s(d)?);
        let rotation = Array2::from_shape_vec((d, d), r.f64s(d * d)?)
            .map_err(|e| Error::MalformedCache(e.to_string()))?;
        r.finish()?;
        Ok(Self {
            rotation,
            axis_skewness,
            n_iterations_used,
            converged,
            seed,
            max_iter,
            tolerance,
        })
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a(&self.to_section().payload)
    }
}

/// The fitted models behind one transformed matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedTransform {
    pub centering: CenteringModel,
    pub whitening: WhiteningModel,
    pub ica: Option<IcaModel>,
}

impl FittedTransform {
    pub fn space(&self) -> Space {
        if self.ica.is_some() {
            Space::Ica
        } else {
            Space::Pca
        }
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            centering: self.centering.fingerprint(),
            whitening: self.whitening.fingerprint(),
            ica: self.ica.as_ref().map(IcaModel::fingerprint),
        }
    }

    /// Maps a raw embedding vector into this transform's space.
    pub fn apply(&self, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        apply_transform(v, &self.centering, &self.whitening, self.ica.as_ref())
    }
}

/// `((v − μ)·A)·R`, with `R` omitted for PCA space.
pub fn apply_transform(
    v: ArrayView1<'_, f64>,
    centering: &CenteringModel,
    whitening: &WhiteningModel,
    ica: Option<&IcaModel>,
) -> Result<Array1<f64>> {
    let d = centering.mean.len();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    let z = (&v - &centering.mean).dot(&whitening.transform);
    Ok(match ica {
        Some(m) => z.dot(&m.rotation),
        None => z,
    })
}

/// Both transformed spaces from a single whitening run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub centering: CenteringModel,
    pub whitening: WhiteningModel,
    pub ica: IcaModel,
    pub pca_space: TransformedEmbeddings,
    pub ica_space: TransformedEmbeddings,
}

impl Pipeline {
    /// Center, whiten and run FastICA on raw embeddings.
    pub fn fit(e: &EmbeddingMatrix, params: IcaParams) -> Result<Self> {
        let (c, centering) = center(e)?;
        let (whitening, z) = pca_whiten(&c)?;
        let mut provenance = z.provenance().clone();
        provenance.centering = centering.fingerprint();
        let z = TransformedEmbeddings::new(Space::Pca, z.data, z.vocab, provenance)?;
        let (ica, s) = fit_ica(&z, params)?;
        Ok(Self {
            centering,
            whitening,
            ica,
            pca_space: z,
            ica_space: s,
        })
    }

    pub fn transform(&self, space: Space) -> FittedTransform {
        FittedTransform {
            centering: self.centering.clone(),
            whitening: self.whitening.clone(),
            ica: (space == Space::Ica).then(|| self.ica.clone()),
        }
    }

    pub fn space(&self, space: Space) -> &TransformedEmbeddings {
        match space {
            Space::Pca => &self.pca_space,
            Space::Ica => &self.ica_space,
        }
    }
}

/// Writes a transformed matrix together with the models that produced it.
pub fn save_transformed(
    t: &TransformedEmbeddings,
    models: &FittedTransform,
    path: impl AsRef<Path>,
) -> Result<()> {
    if models.space() != t.space() {
        return Err(Error::invalid(format!(
            "models describe {} space but embeddings are {}",
            models.space(),
            t.space()
        )));
    }
    let mut sections = vec![models.centering.to_section(), models.whitening.to_section()];
    if let Some(ica) = &models.ica {
        sections.push(ica.to_section());
    }
    CacheContainer {
        vocab: t.shared_vocab(),
        data: t.data().clone(),
        precision: crate::io::Precision::F64,
        sections,
    }
    .write_path(path)
}

/// Reads a file written by [`save_transformed`]. The space is ICA when an
/// ICA section is present.
pub fn load_transformed(
    path: impl AsRef<Path>,
) -> Result<(TransformedEmbeddings, FittedTransform)> {
    let c = CacheContainer::read_path(path)?;
    let need = |tag: &[u8; 4]| {
        c.section(tag).ok_or_else(|| {
            Error::MalformedCache(format!(
                "missing {} section",
                String::from_utf8_lossy(tag)
            ))
        })
    };
    let centering = CenteringModel::from_section(need(&TAG_CENTERING)?)?;
    let whitening = WhiteningModel::from_section(need(&TAG_WHITENING)?)?;
    let ica = c.section(&TAG_ICA).map(IcaModel::from_section).transpose()?;
    let models = FittedTransform {
        centering,
        whitening,
        ica,
    };
    let t = TransformedEmbeddings::new(models.space(), c.data, c.vocab, models.provenance())?;
    Ok((t, models))
}
