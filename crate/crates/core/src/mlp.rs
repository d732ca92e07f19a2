//! Two-input, one-hidden-layer, single-output regression network mapping
//! `(T, G)` to the current at the maximum power point.
//!
//! Inputs and target are min-max scaled to `[-1, 1]` by [`NormSpec`]. The
//! hidden layer is `tanh`, the output layer is linear:
//!
//! ```text
//! h = tanh(W_h x + b_h)
//! y = w_o . h + b_o
//! ```

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_string_atomic};
use crate::scalar::Scalar;

pub const MODEL_VERSION: u32 = 1;

/// Hidden width used throughout unless configured otherwise.
pub const DEFAULT_HIDDEN: usize = 15;

const PAPER_WEIGHTS_JSON: &str = include_str!("../assets/paper_weights.json");

/// Min-max ranges mapped onto `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct NormSpec<S = f64> {
    pub t: [S; 2],
    pub g: [S; 2],
    pub imp: [S; 2],
}

#[inline]
fn scale<S: Scalar>(x: S, range: [S; 2]) -> S {
    let two = S::of(2.0);
    two * (x - range[0]) / (range[1] - range[0]) - S::one()
}

#[inline]
fn unscale<S: Scalar>(y: S, range: [S; 2]) -> S {
    let half = S::of(0.5);
    (y + S::one()) * half * (range[1] - range[0]) + range[0]
}

impl<S: Scalar> NormSpec<S> {
    pub fn new(t: [S; 2], g: [S; 2], imp: [S; 2]) -> Result<Self> {
        let norm = NormSpec { t, g, imp };
        norm.validate()?;
        Ok(norm)
    }

    /// Ranges spanned by `(t_c, g, i_mp)` triples.
    pub fn fit<I>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S)>,
    {
        let mut lo = [S::infinity(); 3];
        let mut hi = [S::neg_infinity(); 3];
        let mut any = false;
        for (t, g, i) in samples {
            any = true;
            for (k, v) in [t, g, i].into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        if !any {
            return Err(Error::EmptyDataset);
        }
        // a constant column still needs a non-empty range
        for k in 0..3 {
            if hi[k] <= lo[k] {
                let pad = lo[k].abs().max(S::one()) * S::of(1e-6);
                lo[k] = lo[k] - pad;
                hi[k] = hi[k] + pad;
            }
        }
        NormSpec::new([lo[0], hi[0]], [lo[1], hi[1]], [lo[2], hi[2]])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("t", self.t), ("g", self.g), ("imp", self.imp)] {
            if !r[0].is_finite() || !r[1].is_finite() || r[1] <= r[0] {
                return Err(Error::InvalidParameter(format!(
                    "normalization range `{name}` must be finite with max > min"
                )));
            }
        }
        Ok(())
    }

    pub fn normalize_inputs(&self, t_c: S, g: S) -> [S; 2] {
        [scale(t_c, self.t), scale(g, self.g)]
    }

    pub fn normalize_target(&self, i_mp: S) -> S {
        scale(i_mp, self.imp)
    }

    pub fn denormalize_target(&self, y: S) -> S {
        unscale(y, self.imp)
    }

    /// Half-width of the target range: d(i_mp)/d(y_norm).
    pub fn target_half_span(&self) -> S {
        (self.imp[1] - self.imp[0]) * S::of(0.5)
    }

    pub fn cast<T: Scalar>(&self) -> NormSpec<T> {
        let c = |r: [S; 2]| [T::of(r[0].to_f64()), T::of(r[1].to_f64())];
        NormSpec {
            t: c(self.t),
            g: c(self.g),
            imp: c(self.imp),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel<S = f64> {
    /// One `[w_T, w_G]` row per hidden neuron.
    w_hidden: Vec<[S; 2]>,
    b_hidden: Vec<S>,
    w_out: Vec<S>,
    b_out: S,
    norm: NormSpec<S>,
}

/// On-disk layout of a model.
#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
struct ModelFile<S> {
    version: u32,
    w_hidden: Vec<[S; 2]>,
    b_hidden: Vec<S>,
    w_out: Vec<S>,
    b_out: S,
    norm: NormSpec<S>,
}

impl<S: Scalar> MlpModel<S> {
    pub fn new(
        w_hidden: Vec<[S; 2]>,
        b_hidden: Vec<S>,
        w_out: Vec<S>,
        b_out: S,
        norm: NormSpec<S>,
    ) -> Result<Self> {
        let h = w_hidden.len();
        if h == 0 {
            return Err(Error::DimensionMismatch("hidden layer is empty".into()));
        }
        if b_hidden.len() != h || w_out.len() != h {
            return Err(Error::DimensionMismatch(format!(
                "hidden weights have {h} rows but {} hidden biases and {} output weights",
                b_hidden.len(),
                w_out.len()
            )));
        }
        let finite = w_hidden.iter().flatten().all(|x| x.is_finite())
            && b_hidden.iter().all(|x| x.is_finite())
            && w_out.iter().all(|x| x.is_finite())
            && b_out.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("model weights must be finite".into()));
        }
        norm.validate()?;
        Ok(MlpModel {
            w_hidden,
            b_hidden,
            w_out,
            b_out,
            norm,
        })
    }

    pub fn zeros(hidden: usize, norm: NormSpec<S>) -> Result<Self> {
        MlpModel::new(
            vec![[S::zero(); 2]; hidden],
            vec![S::zero(); hidden],
            vec![S::zero(); hidden],
            S::zero(),
            norm,
        )
    }

    /// Every weight and bias drawn uniformly from `[-0.5, 0.5]`.
    pub fn random<R: Rng + ?Sized>(hidden: usize, norm: NormSpec<S>, rng: &mut R) -> Result<Self> {
        let mut draw = || S::of(rng.random_range(-0.5..=0.5));
        let w_hidden = (0..hidden).map(|_| [draw(), draw()]).collect();
        let b_hidden = (0..hidden).map(|_| draw()).collect();
        let w_out = (0..hidden).map(|_| draw()).collect();
        let b_out = draw();
        MlpModel::new(w_hidden, b_hidden, w_out, b_out, norm)
    }

    pub fn hidden_width(&self) -> usize {
        self.w_hidden.len()
    }

    /// `2h + h + h + 1` for hidden width `h`.
    pub fn param_count(&self) -> usize {
        4 * self.hidden_width() + 1
    }

    pub fn w_hidden(&self) -> &[[S; 2]] {
        &self.w_hidden
    }

    pub fn b_hidden(&self) -> &[S] {
        &self.b_hidden
    }

    pub fn w_out(&self) -> &[S] {
        &self.w_out
    }

    pub fn b_out(&self) -> S {
        self.b_out
    }

    pub fn norm(&self) -> &NormSpec<S> {
        &self.norm
    }

    /// Flat parameter vector: hidden weights row-major, hidden biases, output
    /// weights, output bias.
    pub fn params(&self) -> Vec<S> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend(self.w_hidden.iter().flatten().copied());
        p.extend_from_slice(&self.b_hidden);
        p.extend_from_slice(&self.w_out);
        p.push(self.b_out);
        p
    }

    pub fn set_params(&mut self, p: &[S]) -> Result<()> {
        let h = self.hidden_width();
        if p.len() != self.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                p.len()
            )));
        }
        for (j, row) in self.w_hidden.iter_mut().enumerate() {
            *row = [p[2 * j], p[2 * j + 1]];
        }
        self.b_hidden.copy_from_slice(&p[2 * h..3 * h]);
        self.w_out.copy_from_slice(&p[3 * h..4 * h]);
        self.b_out = p[4 * h];
        Ok(())
    }

    pub fn with_norm(mut self, norm: NormSpec<S>) -> Result<Self> {
        norm.validate()?;
        self.norm = norm;
        Ok(self)
    }

    /// Hidden activations for an already normalized input.
    pub fn hidden(&self, x: [S; 2], out: &mut Vec<S>) {
        out.clear();
        out.extend(
            self.w_hidden
                .iter()
                .zip(&self.b_hidden)
                .map(|(w, b)| (w[0] * x[0] + w[1] * x[1] + *b).tanh()),
        );
    }

    /// Network output in normalized target units.
    pub fn forward_normalized(&self, x: [S; 2]) -> S {
        self.w_hidden
            .iter()
            .zip(&self.b_hidden)
            .zip(&self.w_out)
            .fold(self.b_out, |acc, ((w, b), wo)| {
                acc + *wo * (w[0] * x[0] + w[1] * x[1] + *b).tanh()
            })
    }

    /// Predicted current at the maximum power point (A).
    pub fn forward(&self, t_c: S, g: S) -> S {
        let x = self.norm.normalize_inputs(t_c, g);
        self.norm.denormalize_target(self.forward_normalized(x))
    }

    pub fn cast<T: Scalar>(&self) -> MlpModel<T> {
        let c = |x: S| T::of(x.to_f64());
        MlpModel {
            w_hidden: self.w_hidden.iter().map(|r| [c(r[0]), c(r[1])]).collect(),
            b_hidden: self.b_hidden.iter().map(|&x| c(x)).collect(),
            w_out: self.w_out.iter().map(|&x| c(x)).collect(),
            b_out: c(self.b_out),
            norm: self.norm.cast(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_VERSION,
            w_hidden: self.w_hidden.clone(),
            b_hidden: self.b_hidden.clone(),
            w_out: self.w_out.clone(),
            b_out: self.b_out,
            norm: self.norm,
        };
        let mut json = serde_json::to_string_pretty(&file).expect("model serializes");
        json.push('\n');
        json
    }

    /// Parses a model JSON document; `origin` names the source in errors.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: ModelFile<S> =
            serde_json::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))?;
        if file.version != MODEL_VERSION {
            return Err(Error::schema(
                origin,
                format!("unsupported model version {}", file.version),
            ));
        }
        MlpModel::new(file.w_hidden, file.b_hidden, file.w_out, file.b_out, file.norm)
            .map_err(|e| Error::schema(origin, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string_atomic(path.as_ref(), &self.to_json())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        MlpModel::from_json(&read_to_string(path)?, path)
    }
}

impl MlpModel<f64> {
    /// The published 2-15-1 weights and biases, with input ranges taken from
    /// the default generation grid and the target range from the default
    /// dataset.
    pub fn paper_weights() -> Self {
        MlpModel::from_json(PAPER_WEIGHTS_JSON, Path::new("paper_weights.json"))
            .expect("bundled paper_weights.json is valid")
    }
}

/// The bundled `paper_weights.json` document.
pub fn paper_weights_json() -> &'static str {
    PAPER_WEIGHTS_JSON
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn norm() -> NormSpec {
        NormSpec::new([15.0, 40.0], [200.0, 1090.0], [1.0, 9.0]).unwrap()
    }

    #[test]
    fn zero_network_predicts_target_midpoint() {
        let m = MlpModel::zeros(15, norm()).unwrap();
        assert_eq!(m.forward(25.0, 1000.0), 5.0);
        assert_eq!(m.param_count(), 61);
    }

    #[test]
    fn forward_is_pure() {
        let m = MlpModel::<f64>::random(15, norm(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(m.forward(31.5, 640.0).to_bits(), m.forward(31.5, 640.0).to_bits());
    }

    #[test]
    fn paper_weights_spot_values() {
        let m = MlpModel::paper_weights();
        assert_eq!(m.hidden_width(), 15);
        assert_eq!(m.b_hidden()[2], 0.476703785811994);
        assert_eq!(m.w_hidden()[0], [0.330659943126136, 0.375354867765757]);
        assert_eq!(m.w_out()[0], 0.526055556926590);
        assert_eq!(m.b_out(), 0.1528);
    }

    #[test]
    fn params_layout_round_trip() {
        let mut m = MlpModel::<f64>::random(4, norm(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let p = m.params();
        assert_eq!(p.len(), 17);
        assert_eq!(p[0], m.w_hidden()[0][0]);
        assert_eq!(p[1], m.w_hidden()[0][1]);
        assert_eq!(p[8], m.b_hidden()[0]);
        assert_eq!(p[12], m.w_out()[0]);
        assert_eq!(p[16], m.b_out());
        let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        m.set_params(&shifted).unwrap();
        assert_eq!(m.params(), shifted);
        assert!(m.set_params(&p[..16]).is_err());
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        assert!(matches!(
            MlpModel::new(vec![[0.0; 2]; 15], vec![0.0; 14], vec![0.0; 15], 0.0, norm()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            MlpModel::new(vec![[0.0; 2]; 15], vec![0.0; 15], vec![0.0; 16], 0.0, norm()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(MlpModel::new(vec![[f64::NAN, 0.0]], vec![0.0], vec![0.0], 0.0, norm()).is_err());
        assert!(NormSpec::new([1.0, 1.0], [0.0, 1.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn save_load_round_trip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let m = MlpModel::<f64>::random(15, norm(), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        m.save(&path).unwrap();
        assert_eq!(MlpModel::load(&path).unwrap(), m);

        let paper = MlpModel::paper_weights();
        paper.save(&path).unwrap();
        let back = MlpModel::<f64>::load(&path).unwrap();
        assert_eq!(back.b_hidden()[2], 0.476703785811994);

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(MlpModel::<f64>::load(&path), Err(Error::Schema { .. })));
    }

    #[test]
    fn wrong_version_rejected() {
        let text = paper_weights_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            MlpModel::<f64>::from_json(&text, Path::new("x")),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn norm_fit_covers_samples() {
        let n = NormSpec::fit([(15.0, 200.0, 1.5), (40.0, 1090.0, 8.3)]).unwrap();
        assert_eq!(n.t, [15.0, 40.0]);
        assert_eq!(n.normalize_inputs(15.0, 1090.0), [-1.0, 1.0]);
        assert!(NormSpec::<f64>::fit(std::iter::empty()).is_err());
        let constant = NormSpec::fit([(25.0, 500.0, 5.0), (26.0, 600.0, 5.0)]).unwrap();
        assert!(constant.imp[1] > constant.imp[0]);
    }

    #[test]
    fn f32_forward_close_to_f64() {
        let m = MlpModel::paper_weights();
        let m32: MlpModel<f32> = m.cast();
        assert!((f64::from(m32.forward(25.0, 1000.0)) - m.forward(25.0, 1000.0)).abs() < 1e-4);
    }
}
