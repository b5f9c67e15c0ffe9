//! Parameterized test functions: fully connected ReLU networks with
//! hand-written reverse-mode gradients, a positivity wrapper, and the
//! exponential-family submanifold parameterization.

use crate::data::SampleMatrix;
use crate::divergence::{DivergenceFamily, FamilyKind};
use crate::error::{DivError, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>) -> Result<Self> {
        if input_dim == 0 || hidden.iter().any(|&w| w == 0) {
            return Err(DivError::Domain("layer widths must be >= 1".into()));
        }
        Ok(MlpSpec { input_dim, hidden })
    }

    /// Widths including input and the scalar output.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim];
        d.extend(&self.hidden);
        d.push(1);
        d
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::from_dims(&self.dims())
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

/// Slice map for one linear layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    pub layers: Vec<LayerShape>,
    pub total: usize,
}

impl ParamLayout {
    fn from_dims(dims: &[usize]) -> Self {
        let mut layers = Vec::new();
        let mut offset = 0;
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            layers.push(LayerShape {
                fan_in,
                fan_out,
                weight_offset: offset,
                bias_offset: offset + fan_in * fan_out,
            });
            offset += (fan_in + 1) * fan_out;
        }
        ParamLayout { layers, total: offset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubmanifoldMode {
    /// phi = f'(exp(kappa . T + beta)); n + 1 parameters.
    Generic { family: DivergenceFamily },
    /// phi = kappa . T (the shift family absorbs the constant); n parameters.
    KlLinear,
    /// phi = exp((alpha - 1) kappa . T); n parameters.
    AlphaScale { alpha: f64 },
}

/// Test functions spanned by the Gaussian sufficient statistics
/// T(x) = (x_1..x_d, x_i x_j for i <= j).
#[derive(Debug, Clone, PartialEq)]
pub struct SubmanifoldSpec {
    pub input_dim: usize,
    pub mode: SubmanifoldMode,
}

impl SubmanifoldSpec {
    pub fn new(input_dim: usize, mode: SubmanifoldMode) -> Result<Self> {
        if input_dim == 0 {
            return Err(DivError::Domain("input dim must be >= 1".into()));
        }
        if let SubmanifoldMode::AlphaScale { alpha } = mode {
            DivergenceFamily::alpha(alpha)?;
        }
        Ok(SubmanifoldSpec { input_dim, mode })
    }

    /// Dimension of the sufficient-statistics vector.
    pub fn stat_dim(&self) -> usize {
        self.input_dim + self.input_dim * (self.input_dim + 1) / 2
    }

    pub fn param_count(&self) -> usize {
        match self.mode {
            SubmanifoldMode::Generic { .. } => self.stat_dim() + 1,
            _ => self.stat_dim(),
        }
    }

    fn fill_stats(&self, x: &[f64], t: &mut [f64]) {
        let d = self.input_dim;
        t[..d].copy_from_slice(x);
        let mut k = d;
        for i in 0..d {
            for j in i..d {
                t[k] = x[i] * x[j];
                k += 1;
            }
        }
    }
}

/// A parameterized scalar test function on R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mlp(MlpSpec),
    /// exp(g_theta): structurally positive, for the alpha objectives.
    PositiveMlp(MlpSpec),
    Submanifold(SubmanifoldSpec),
}

impl Model {
    pub fn input_dim(&self) -> usize {
        match self {
            Model::Mlp(s) | Model::PositiveMlp(s) => s.input_dim,
            Model::Submanifold(s) => s.input_dim,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Mlp(s) | Model::PositiveMlp(s) => s.param_count(),
            Model::Submanifold(s) => s.param_count(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Model::PositiveMlp(_) => true,
            Model::Submanifold(s) => matches!(s.mode, SubmanifoldMode::AlphaScale { .. }),
            _ => false,
        }
    }

    /// He-uniform weights for ReLU layers, zero biases; submanifold
    /// coefficients start at zero (a constant test function).
    pub fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Model::Mlp(spec) | Model::PositiveMlp(spec) => {
                let layout = spec.layout();
                let mut params = vec![0.0; layout.total];
                for layer in &layout.layers {
                    let limit = (6.0 / layer.fan_in as f64).sqrt();
                    for w in 0..layer.fan_in * layer.fan_out {
                        params[layer.weight_offset + w] = (rng.gen::<f64>() * 2.0 - 1.0) * limit;
                    }
                }
                params
            }
            Model::Submanifold(spec) => vec![0.0; spec.param_count()],
        }
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<f64> {
        self.check(params, x)?;
        match self {
            Model::Mlp(spec) => Ok(mlp_forward(spec, params, x, None)),
            Model::PositiveMlp(spec) => Ok(mlp_forward(spec, params, x, None).exp()),
            Model::Submanifold(spec) => submanifold_forward(spec, params, x).map(|(out, _)| out),
        }
    }

    pub fn forward_batch(&self, params: &[f64], xs: &SampleMatrix) -> Result<Vec<f64>> {
        xs.rows_iter().map(|row| self.forward(params, row)).collect()
    }

    /// Accumulates upstream * d output / d params into `grad`.
    pub fn backward_into(
        &self,
        params: &[f64],
        x: &[f64],
        upstream: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        self.check(params, x)?;
        if grad.len() != params.len() {
            return Err(DivError::Domain("gradient buffer length mismatch".into()));
        }
        if upstream == 0.0 {
            return Ok(());
        }
        match self {
            Model::Mlp(spec) => {
                mlp_backward(spec, params, x, upstream, grad);
                Ok(())
            }
            Model::PositiveMlp(spec) => {
                let out = mlp_forward(spec, params, x, None).exp();
                mlp_backward(spec, params, x, upstream * out, grad);
                Ok(())
            }
            Model::Submanifold(spec) => {
                let (_, dz) = submanifold_forward(spec, params, x)?;
                let n = spec.stat_dim();
                let mut t = vec![0.0; n];
                spec.fill_stats(x, &mut t);
                match spec.mode {
                    SubmanifoldMode::Generic { .. } => {
                        for (gi, ti) in grad[..n].iter_mut().zip(&t) {
                            *gi += upstream * dz * ti;
                        }
                        grad[n] += upstream * dz;
                    }
                    SubmanifoldMode::KlLinear | SubmanifoldMode::AlphaScale { .. } => {
                        for (gi, ti) in grad[..n].iter_mut().zip(&t) {
                            *gi += upstream * dz * ti;
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// d(upstream * output) / d params as a fresh vector.
    pub fn backward(&self, params: &[f64], x: &[f64], upstream: f64) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; params.len()];
        self.backward_into(params, x, upstream, &mut grad)?;
        Ok(grad)
    }

    fn check(&self, params: &[f64], x: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(DivError::Domain(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        if x.len() != self.input_dim() {
            return Err(DivError::Domain(format!(
                "expected input dim {}, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

fn mlp_forward(spec: &MlpSpec, params: &[f64], x: &[f64], mut acts: Option<&mut Vec<Vec<f64>>>) -> f64 {
    let layout = spec.layout();
    let mut current: Vec<f64> = x.to_vec();
    if let Some(acts) = acts.as_deref_mut() {
        acts.clear();
        acts.push(current.clone());
    }
    let last = layout.layers.len() - 1;
    for (li, layer) in layout.layers.iter().enumerate() {
        let mut next = vec![0.0; layer.fan_out];
        for o in 0..layer.fan_out {
            let wrow = &params[layer.weight_offset + o * layer.fan_in
                ..layer.weight_offset + (o + 1) * layer.fan_in];
            let mut acc = params[layer.bias_offset + o];
            for (w, v) in wrow.iter().zip(&current) {
                acc += w * v;
            }
            // ReLU on hidden layers, identity on the output; subgradient at
            // the kink is 0
            next[o] = if li < last { acc.max(0.0) } else { acc };
        }
        current = next;
        if let Some(acts) = acts.as_deref_mut() {
            acts.push(current.clone());
        }
    }
    current[0]
}

fn mlp_backward(spec: &MlpSpec, params: &[f64], x: &[f64], upstream: f64, grad: &mut [f64]) {
    let layout = spec.layout();
    let mut acts: Vec<Vec<f64>> = Vec::new();
    mlp_forward(spec, params, x, Some(&mut acts));
    let last = layout.layers.len() - 1;
    // delta starts at the scalar output
    let mut delta = vec![upstream];
    for (li, layer) in layout.layers.iter().enumerate().rev() {
        let input = &acts[li];
        let output = &acts[li + 1];
        // gate deltas through the ReLU of this layer's output
        if li < last {
            for (d, o) in delta.iter_mut().zip(output) {
                if *o <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        for o in 0..layer.fan_out {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            let wbase = layer.weight_offset + o * layer.fan_in;
            for (i, v) in input.iter().enumerate() {
                grad[wbase + i] += d * v;
            }
            grad[layer.bias_offset + o] += d;
        }
        if li > 0 {
            let mut prev = vec![0.0; layer.fan_in];
            for o in 0..layer.fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let wbase = layer.weight_offset + o * layer.fan_in;
                for (p, w) in prev.iter_mut().zip(&params[wbase..wbase + layer.fan_in]) {
                    *p += d * w;
                }
            }
            delta = prev;
        }
    }
}

/// Returns (output, d output / d z) where z = kappa . T (+ beta), computed in
/// z-space so large activations do not overflow prematurely.
fn submanifold_forward(spec: &SubmanifoldSpec, params: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    let n = spec.stat_dim();
    let mut t = vec![0.0; n];
    spec.fill_stats(x, &mut t);
    let mut z: f64 = params[..n].iter().zip(&t).map(|(k, ti)| k * ti).sum();
    match spec.mode {
        SubmanifoldMode::KlLinear => Ok((z, 1.0)),
        SubmanifoldMode::AlphaScale { alpha } => {
            let out = ((alpha - 1.0) * z).exp();
            if !out.is_finite() {
                return Err(DivError::Domain("submanifold activation overflow".into()));
            }
            Ok((out, (alpha - 1.0) * out))
        }
        SubmanifoldMode::Generic { family } => {
            z += params[n];
            // phi = f'(e^z) and d phi/dz = f''(e^z) e^z, in closed form
            let (out, dz) = match family.kind() {
                FamilyKind::Kl => (z + 1.0, 1.0),
                FamilyKind::ChiSquared => (z.exp(), z.exp()),
                FamilyKind::Alpha(a) => {
                    let e = ((a - 1.0) * z).exp();
                    (e / (a - 1.0), e)
                }
                FamilyKind::Hellinger => {
                    let e = (-0.5 * z).exp();
                    (-2.0 * e, e)
                }
            };
            if !out.is_finite() || !dz.is_finite() {
                return Err(DivError::Domain(
                    "submanifold generic mode left the domain of f'".into(),
                ));
            }
            Ok((out, dz))
        }
    }
}

// ---------------------------------------------------------------------------
// Parameter checkpoints
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 4] = b"DGPM";
const CHECKPOINT_VERSION: u32 = 1;

/// Writes the 16-byte header (magic, version, count) and the little-endian
/// f64 parameter array.
pub fn save_params(path: &Path, params: &[f64]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(CHECKPOINT_MAGIC)?;
    f.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    f.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in params {
        f.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_params(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[0..4] != CHECKPOINT_MAGIC {
        return Err(DivError::Format("bad checkpoint magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(DivError::Format(format!("unsupported checkpoint version {version}")));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 8 * count {
        return Err(DivError::Format(format!(
            "checkpoint length {} does not match count {count}",
            bytes.len()
        )));
    }
    Ok(bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RunRng, StreamKind};

    fn rng(seed: u64) -> ChaCha8Rng {
        RunRng::new(seed).stream(StreamKind::Init)
    }

    #[test]
    fn param_count_matches_layout() {
        let spec = MlpSpec::new(2, vec![16]).unwrap();
        // (2+1)*16 + (16+1)*1 = 48+16+17 = 65
        assert_eq!(spec.param_count(), 65);
        let layout = spec.layout();
        assert_eq!(layout.layers.len(), 2);
        assert_eq!(layout.layers[0].bias_offset, 32);
        assert_eq!(layout.layers[1].weight_offset, 48);
        let sub = SubmanifoldSpec::new(3, SubmanifoldMode::KlLinear).unwrap();
        assert_eq!(sub.stat_dim(), 3 + 6);
        assert_eq!(sub.param_count(), 9);
        let gen = SubmanifoldSpec::new(
            3,
            SubmanifoldMode::Generic { family: DivergenceFamily::kl() },
        )
        .unwrap();
        assert_eq!(gen.param_count(), 10);
    }

    #[test]
    fn zero_mlp_outputs_zero_and_positive_wrapper_one() {
        let spec = MlpSpec::new(3, vec![8, 4]).unwrap();
        let model = Model::Mlp(spec.clone());
        let params = vec![0.0; model.param_count()];
        assert_eq!(model.forward(&params, &[0.3, -1.0, 2.0]).unwrap(), 0.0);
        let pos = Model::PositiveMlp(spec);
        assert_eq!(pos.forward(&params, &[0.3, -1.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn positive_wrapper_is_structurally_positive() {
        let spec = MlpSpec::new(2, vec![8]).unwrap();
        let model = Model::PositiveMlp(spec);
        let mut r = rng(1);
        let params = model.init_params(&mut r);
        use rand::Rng;
        for _ in 0..50 {
            let x = [r.gen::<f64>() * 4.0 - 2.0, r.gen::<f64>() * 4.0 - 2.0];
            assert!(model.forward(&params, &x).unwrap() > 0.0);
        }
    }

    #[test]
    fn single_linear_layer_gradient() {
        // output = w . x + b: gradient is (x, 1) * upstream
        let spec = MlpSpec::new(2, vec![]).unwrap();
        let model = Model::Mlp(spec);
        let params = vec![0.7, -0.3, 0.1]; // w1 w2 b
        let x = [2.0, 5.0];
        let grad = model.backward(&params, &x, 3.0).unwrap();
        assert_eq!(grad, vec![6.0, 15.0, 3.0]);
        assert!((model.forward(&params, &x).unwrap() - (1.4 - 1.5 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn upstream_zero_gives_zero_gradient() {
        let spec = MlpSpec::new(2, vec![4]).unwrap();
        let model = Model::Mlp(spec);
        let mut r = rng(2);
        let params = model.init_params(&mut r);
        let grad = model.backward(&params, &[0.5, -0.5], 0.0).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    fn fd_check(model: &Model, params: &[f64], x: &[f64]) {
        let upstream = 1.3;
        let grad = model.backward(params, x, upstream).unwrap();
        let h = 1e-5;
        for k in 0..params.len() {
            let mut plus = params.to_vec();
            plus[k] += h;
            let mut minus = params.to_vec();
            minus[k] -= h;
            let num = upstream * (model.forward(&plus, x).unwrap() - model.forward(&minus, x).unwrap())
                / (2.0 * h);
            let denom = num.abs().max(grad[k].abs()).max(1e-3);
            assert!(
                (num - grad[k]).abs() / denom < 1e-5,
                "param {k}: fd {num} vs analytic {}",
                grad[k]
            );
        }
    }

    #[test]
    fn mlp_gradients_match_finite_differences() {
        use rand::Rng;
        let spec = MlpSpec::new(2, vec![16]).unwrap();
        let mut r = rng(3);
        for variant in 0..2 {
            let model = if variant == 0 {
                Model::Mlp(spec.clone())
            } else {
                Model::PositiveMlp(spec.clone())
            };
            for _ in 0..20 {
                let params = model.init_params(&mut r);
                let x = [r.gen::<f64>() * 2.0 - 1.0, r.gen::<f64>() * 2.0 - 1.0];
                fd_check(&model, &params, &x);
            }
        }
    }

    #[test]
    fn two_hidden_layer_gradients_match_finite_differences() {
        use rand::Rng;
        let spec = MlpSpec::new(3, vec![8, 4]).unwrap();
        let model = Model::Mlp(spec);
        let mut r = rng(4);
        for _ in 0..10 {
            let params = model.init_params(&mut r);
            let x = [r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>()];
            fd_check(&model, &params, &x);
        }
    }

    #[test]
    fn submanifold_gradients_match_finite_differences() {
        use rand::Rng;
        let mut r = rng(5);
        let modes = [
            SubmanifoldMode::KlLinear,
            SubmanifoldMode::AlphaScale { alpha: 0.25 },
            SubmanifoldMode::Generic { family: DivergenceFamily::hellinger() },
            SubmanifoldMode::Generic { family: DivergenceFamily::kl() },
        ];
        for mode in modes {
            let model = Model::Submanifold(SubmanifoldSpec::new(2, mode).unwrap());
            for _ in 0..10 {
                let params: Vec<f64> =
                    (0..model.param_count()).map(|_| r.gen::<f64>() * 0.4 - 0.2).collect();
                let x = [r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5];
                fd_check(&model, &params, &x);
            }
        }
    }

    #[test]
    fn kl_linear_submanifold_reproduces_dv_value() {
        // T = (x, x^2), kappa = (0, -1/2): phi differs from log(dQ/dP) by a
        // constant, so DV recovers D_KL for Q = N(0,1/2), P = N(0,1)
        use crate::divergence::Gaussian1d;
        use crate::exact::GaussianPair;
        let model =
            Model::Submanifold(SubmanifoldSpec::new(1, SubmanifoldMode::KlLinear).unwrap());
        let params = vec![0.0, -0.5];
        let pair = GaussianPair::new(Gaussian1d::new(0.0, 0.5), Gaussian1d::new(0.0, 1.0));
        let v = pair.dv(|x| model.forward(&params, &[x]).unwrap()).unwrap();
        let d_kl = 0.5 * (0.5 - 1.0 - 0.5f64.ln());
        assert!((v - d_kl).abs() < 1e-8, "{v} vs {d_kl}");
    }

    #[test]
    fn checkpoint_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.dgpm");
        let params = vec![0.1, -2.5, 1e-8, 3.7];
        save_params(&path, &params).unwrap();
        let loaded = load_params(&path).unwrap();
        assert_eq!(params, loaded);

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_params(&path), Err(DivError::Format(_))));

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'D';
        bytes.pop();
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_params(&path), Err(DivError::Format(_))));
    }
}
