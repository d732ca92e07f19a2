//! Training corpus: `(T, G) -> I_mp` samples generated through the MPP search,
//! shuffled and split with a seeded generator, optionally perturbed with
//! Gaussian input noise, and persisted as row-per-sample CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{read_numeric_csv, read_to_string, write_atomic, write_string_atomic};
use crate::mpp::{find_mpp, MppConfig};
use crate::pv::{EnvConditions, ModuleParams};

pub const DATASET_HEADER: [&str; 3] = ["T_degC", "G_Wm2", "Imp_A"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Cell temperature (degC).
    pub t_c: f64,
    /// Irradiance (W/m^2).
    pub g: f64,
    /// Current at the maximum power point (A).
    pub i_mp: f64,
}

/// Temperature and irradiance axes of the generation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_values: Vec<f64>,
    pub g_values: Vec<f64>,
}

impl Default for GridSpec {
    /// 26 temperatures 15..=40 degC at 1 degC, 50 irradiances evenly spaced
    /// over [200, 1090] W/m^2: 1300 points.
    fn default() -> Self {
        GridSpec {
            t_values: linspace(15.0, 40.0, 26),
            g_values: linspace(200.0, 1090.0, 50),
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.t_values.len() * self.g_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `n` evenly spaced values from `start` to `end`, both endpoints exact.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    end
                } else {
                    start + (end - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Dataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        samples_csv(&self.samples)
    }

    /// Writes the dataset as `T_degC,G_Wm2,Imp_A` CSV.
    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string_atomic(path.as_ref(), &self.to_csv())
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Dataset::new(import_samples(path.as_ref())?))
    }
}

fn samples_csv(samples: &[Sample]) -> String {
    let mut out = DATASET_HEADER.join(",");
    out.push('\n');
    for s in samples {
        // `{}` on f64 prints the shortest decimal that parses back to the same bits
        out.push_str(&format!("{},{},{}\n", s.t_c, s.g, s.i_mp));
    }
    out
}

fn import_samples(path: &Path) -> Result<Vec<Sample>> {
    Ok(read_numeric_csv(path, &DATASET_HEADER)?
        .into_iter()
        .map(|r| Sample {
            t_c: r[0],
            g: r[1],
            i_mp: r[2],
        })
        .collect())
}

fn check_axis(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Evaluates the MPP search over the Cartesian grid, temperature outer and
/// irradiance inner.
pub fn generate_grid(params: &ModuleParams, grid: &GridSpec) -> Result<Dataset> {
    check_axis("temperature", &grid.t_values)?;
    check_axis("irradiance", &grid.g_values)?;
    let cfg = MppConfig::default();
    let mut samples = Vec::with_capacity(grid.len());
    for &t_c in &grid.t_values {
        for &g in &grid.g_values {
            let mpp = find_mpp(params, &EnvConditions::from_celsius(t_c, g), &cfg).map_err(|e| {
                Error::AtGridPoint {
                    t_c,
                    g,
                    source: Box::new(e),
                }
            })?;
            samples.push(Sample {
                t_c,
                g,
                i_mp: mpp.i_mp,
            });
        }
    }
    Ok(Dataset::new(samples))
}

/// Fractions of the dataset routed to (train, validation, test).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.85,
            validation: 0.10,
            test: 0.05,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidParameter("split fractions must lie in [0, 1]".into()));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// (train, validation, test) sizes for `n` rows: validation and test are
    /// floored, train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // absorb representation error such as 0.1 * 1300 = 130.00000000000003
        let floor = |f: f64| ((n as f64) * f + 1e-9).floor() as usize;
        let validation = floor(self.validation).min(n);
        let test = floor(self.test).min(n - validation);
        (n - validation - test, validation, test)
    }
}

/// Row indices of the source dataset assigned to each part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSplit {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub seed: u64,
    pub fractions: SplitFractions,
    /// Present when the split was made in this process; not persisted.
    pub indices: Option<SplitIndices>,
}

/// Fisher-Yates shuffle with a seeded ChaCha8 generator, then a contiguous
/// train / validation / test cut.
pub fn shuffle_split(dataset: &Dataset, seed: u64, fractions: SplitFractions) -> Result<DataSplit> {
    fractions.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let (n_train, n_val, _) = fractions.sizes(n);
    let train_idx = order[..n_train].to_vec();
    let val_idx = order[n_train..n_train + n_val].to_vec();
    let test_idx = order[n_train + n_val..].to_vec();
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.samples[i]).collect::<Vec<_>>();
    Ok(DataSplit {
        train: pick(&train_idx),
        validation: pick(&val_idx),
        test: pick(&test_idx),
        seed,
        fractions,
        indices: Some(SplitIndices {
            train: train_idx,
            validation: val_idx,
            test: test_idx,
        }),
    })
}

/// Adds zero-mean Gaussian noise to the inputs `(t_c, g)`; targets stay clean.
pub fn add_awgn(dataset: &Dataset, sigma_t: f64, sigma_g: f64, seed: u64) -> Result<Dataset> {
    if !(sigma_t >= 0.0 && sigma_g >= 0.0) || !sigma_t.is_finite() || !sigma_g.is_finite() {
        return Err(Error::InvalidParameter("noise sigmas must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = dataset
        .samples
        .iter()
        .map(|s| {
            let zt: f64 = StandardNormal.sample(&mut rng);
            let zg: f64 = StandardNormal.sample(&mut rng);
            Sample {
                t_c: s.t_c + sigma_t * zt,
                g: s.g + sigma_g * zg,
                i_mp: s.i_mp,
            }
        })
        .collect();
    Ok(Dataset::new(samples))
}

/// SHA-256 of the canonical JSON encoding of the module parameters.
pub fn params_hash(params: &ModuleParams) -> String {
    let json = serde_json::to_string(params).expect("module params serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Sidecar JSON describing how a dataset or split was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<SplitFractions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub files: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_sha256: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_t: f64,
    pub sigma_g: f64,
    pub seed: u64,
}

pub const MANIFEST_VERSION: u32 = 1;

impl Manifest {
    pub fn for_dataset(rows: usize) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            rows,
            seed: None,
            fractions: None,
            sizes: None,
            files: None,
            grid: None,
            noise: None,
            params_sha256: None,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_string_atomic(path.as_ref(), &json)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let manifest: Manifest = serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::schema(path, e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::schema(
                path,
                format!("unsupported manifest version {}", manifest.version),
            ));
        }
        Ok(manifest)
    }
}

/// `base.train.csv`, `base.val.csv`, `base.test.csv` and `base.manifest.json`.
pub fn split_paths(base: &Path) -> ([PathBuf; 3], PathBuf) {
    let with = |suffix: &str| {
        let mut s = base.as_os_str().to_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    (
        [with(".train.csv"), with(".val.csv"), with(".test.csv")],
        with(".manifest.json"),
    )
}

impl DataSplit {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }

    /// Writes the three part files and the manifest next to `base`.
    pub fn export(&self, base: impl AsRef<Path>, mut manifest: Manifest) -> Result<()> {
        let (parts, manifest_path) = split_paths(base.as_ref());
        for (path, samples) in parts.iter().zip([&self.train, &self.validation, &self.test]) {
            let body = samples_csv(samples);
            write_atomic(path, |w| w.write_all(body.as_bytes()))?;
        }
        manifest.version = MANIFEST_VERSION;
        manifest.rows = self.train.len() + self.validation.len() + self.test.len();
        manifest.seed = Some(self.seed);
        manifest.fractions = Some(self.fractions);
        manifest.sizes = Some(self.sizes());
        manifest.files = Some(parts.map(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        }));
        manifest.write(manifest_path)
    }

    /// Reads a split written by [`DataSplit::export`].
    pub fn import(base: impl AsRef<Path>) -> Result<(Self, Manifest)> {
        let (parts, manifest_path) = split_paths(base.as_ref());
        let manifest = Manifest::read(&manifest_path)?;
        let (Some(seed), Some(fractions)) = (manifest.seed, manifest.fractions) else {
            return Err(Error::schema(&manifest_path, "split manifest lacks seed or fractions"));
        };
        let [train, validation, test] = [
            import_samples(&parts[0])?,
            import_samples(&parts[1])?,
            import_samples(&parts[2])?,
        ];
        let split = DataSplit {
            train,
            validation,
            test,
            seed,
            fractions,
            indices: None,
        };
        if let Some(sizes) = manifest.sizes {
            if sizes != split.sizes() {
                return Err(Error::schema(
                    &manifest_path,
                    format!("manifest sizes {sizes:?} disagree with files {:?}", split.sizes()),
                ));
            }
        }
        Ok((split, manifest))
    }
}
