//! Composes the three detector variants over the shared preprocessing:
//! IF-raw on standardized windows, PCA-IF on reduced windows, and AE-IF on
//! the 1-D MCE feature. Also owns the run-level dev/test split and the
//! repeated train/validation folds.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{self, AutoencoderModel, MceMode, TrainConfig};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::forest::{Decision, IsolationForestModel};
use crate::pca::{self, PcaModel};
use crate::series::{Standardizer, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    IfRaw,
    PcaIf,
    AeIf,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::IfRaw, DetectorKind::PcaIf, DetectorKind::AeIf];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::IfRaw => "if-raw",
            DetectorKind::PcaIf => "pca-if",
            DetectorKind::AeIf => "ae-if",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if-raw" | "if_raw" | "if" => Ok(DetectorKind::IfRaw),
            "pca-if" | "pca_if" | "pca" => Ok(DetectorKind::PcaIf),
            "ae-if" | "ae_if" | "ae" => Ok(DetectorKind::AeIf),
            _ => Err(Error::InvalidConfig(format!("unknown detector `{s}`"))),
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to fit one detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Window length k.
    pub window: usize,
    pub n_trees: usize,
    pub psi: usize,
    /// Contamination rate used for threshold calibration.
    pub tau: f64,
    pub n_components: usize,
    pub ae: TrainConfig,
    pub mce_mode: MceMode,
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window: 6,
            n_trees: 100,
            psi: 256,
            tau: 0.1,
            n_components: 2,
            ae: TrainConfig::default(),
            mce_mode: MceMode::Signed,
            seed: 42,
        }
    }
}

/// A fitted detector: the shared standardizer, the kind-specific feature
/// model, and the calibrated forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedDetector {
    pub kind: DetectorKind,
    pub standardizer: Standardizer,
    pub ae: Option<AutoencoderModel>,
    pub pca: Option<PcaModel>,
    pub forest: IsolationForestModel,
    pub mce_mode: MceMode,
}

/// Run-level experiment plan: disjoint dev/test sets and repeated seeded
/// train/validation partitions of the dev set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub dev_run_ids: Vec<String>,
    pub test_run_ids: Vec<String>,
    pub folds: Vec<Fold>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

/// Seeded random 60/40 run-level split plus 10 repeated random
/// train/validation partitions of the dev runs at a 2:1 ratio.
pub fn make_split(run_ids: &[String], seed: u64) -> Result<SplitPlan> {
    let n = run_ids.len();
    if n < 5 {
        return Err(Error::TooFewRuns { needed: 5, got: n });
    }
    let mut ids: Vec<String> = run_ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split/dev-test"));
    shuffle(&mut ids, &mut rng);
    let dev_n = ((0.6 * n as f64).round() as usize).clamp(2, n - 1);
    let mut dev_run_ids = ids[..dev_n].to_vec();
    let mut test_run_ids = ids[dev_n..].to_vec();
    dev_run_ids.sort();
    test_run_ids.sort();

    let train_n = ((dev_n as f64 * 2.0 / 3.0).round() as usize).clamp(1, dev_n - 1);
    let mut folds = Vec::with_capacity(10);
    for f in 0..10 {
        let mut pool = dev_run_ids.clone();
        let mut frng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("split/fold/{f}")));
        shuffle(&mut pool, &mut frng);
        let mut train_ids = pool[..train_n].to_vec();
        let mut val_ids = pool[train_n..].to_vec();
        train_ids.sort();
        val_ids.sort();
        folds.push(Fold { train_ids, val_ids });
    }
    Ok(SplitPlan {
        dev_run_ids,
        test_run_ids,
        folds,
        seed,
    })
}

fn shuffle<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in 0..items.len() {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
}

/// Fits one detector on labeled training windows.
///
/// Labels are used only to select the normal-only AE training subset; the
/// standardizer, PCA, MCE feature set and forest calibration all see every
/// training window.
pub fn fit_detector(
    kind: DetectorKind,
    train_windows: &[Window],
    cfg: &DetectorConfig,
) -> Result<FittedDetector> {
    if train_windows.is_empty() {
        return Err(Error::NothingToFit);
    }
    let standardizer = Standardizer::fit(train_windows)?;
    let standardized: Vec<Window> = train_windows
        .iter()
        .map(|w| standardizer.transform_window(w))
        .collect::<Result<_>>()?;

    let forest_seed = derive_seed(cfg.seed, &format!("forest/{}", kind.name()));
    let mut ae = None;
    let mut pca_model = None;
    let features: Vec<Vec<f64>> = match kind {
        DetectorKind::IfRaw => standardized.iter().map(|w| w.values.clone()).collect(),
        DetectorKind::PcaIf => {
            let m = pca::fit_pca(&standardized, cfg.n_components)?;
            let feats = standardized
                .iter()
                .map(|w| m.transform(&w.values))
                .collect::<Result<_>>()?;
            pca_model = Some(m);
            feats
        }
        DetectorKind::AeIf => {
            let normal: Vec<Window> = standardized
                .iter()
                .filter(|w| w.label == Some(crate::series::WindowLabel::Normal))
                .cloned()
                .collect();
            if normal.is_empty() {
                return Err(Error::NothingToFit);
            }
            let mut ae_cfg = cfg.ae.clone();
            ae_cfg.seed = derive_seed(cfg.seed, "ae/train");
            let model = autoencoder::train(&ae_cfg, &normal, standardizer.clone())?;
            // MCE over the entire training set, raw windows in, the model
            // standardizes internally.
            let feats = autoencoder::mce_features_with(&model, train_windows, cfg.mce_mode)?;
            ae = Some(model);
            feats.into_iter().map(|f| vec![f]).collect()
        }
    };

    let forest = IsolationForestModel::fit(&features, cfg.n_trees, cfg.psi, cfg.tau, forest_seed)?;
    Ok(FittedDetector {
        kind,
        standardizer,
        ae,
        pca: pca_model,
        forest,
        mce_mode: cfg.mce_mode,
    })
}

impl FittedDetector {
    /// Kind-appropriate feature vector for one raw window: the standardized
    /// window (IF-raw), its PCA reduction (PCA-IF), or `[MCE]` (AE-IF).
    pub fn feature_map(&self, window: &Window) -> Result<Vec<f64>> {
        match self.kind {
            DetectorKind::IfRaw => self.standardizer.transform(&window.values),
            DetectorKind::PcaIf => {
                let std = self.standardizer.transform(&window.values)?;
                self.pca
                    .as_ref()
                    .expect("pca present iff kind = PCA-IF")
                    .transform(&std)
            }
            DetectorKind::AeIf => {
                let ae = self.ae.as_ref().expect("ae present iff kind = AE-IF");
                let feats =
                    autoencoder::mce_features_with(ae, std::slice::from_ref(window), self.mce_mode)?;
                Ok(feats)
            }
        }
    }

    /// Scores raw windows and applies the calibrated decision function.
    pub fn detect(&self, windows: &[Window]) -> Result<Vec<Decision>> {
        windows
            .iter()
            .map(|w| self.forest.decide(&self.feature_map(w)?))
            .collect()
    }
}

/// A single serialized document embedding the detector and the config and
/// seed it was fitted with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorBundle {
    pub kind: DetectorKind,
    pub config: DetectorConfig,
    pub detector: FittedDetector,
}

impl DetectorBundle {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl SplitPlan {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
