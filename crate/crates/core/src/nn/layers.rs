use rand::Rng;

use super::{NnError, Tensor};
use crate::scalar::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// 3x3 kernel, stride 2, padding 1, relu activation.
    Conv { in_channels: usize, out_channels: usize },
    Dense { input: usize, output: usize, activation: Activation },
    /// Splices the scalar side input after the flattened trunk.
    Concat { side_width: usize },
}

/// Ordered layer stack over an image input plus a scalar side input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    /// (channels, height, width) of the image input.
    pub image_shape: [usize; 3],
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Width {
    Spatial(usize, usize, usize),
    Flat(usize),
}

impl Width {
    fn flat(self) -> usize {
        match self {
            Width::Spatial(c, h, w) => c * h * w,
            Width::Flat(n) => n,
        }
    }
}

/// Output spatial size of a 3x3 stride-2 pad-1 convolution.
fn conv_out(n: usize) -> usize {
    (n - 1) / 2 + 1
}

impl NetworkSpec {
    /// Feature extractor and trunk for the CNN soft actor-critic:
    /// Conv(1->8) -> Conv(8->16) -> Dense(->64) -> Concat(side) ->
    /// Dense(->256) -> Dense(256->256) -> Dense(256->output).
    pub fn cnn_sac(rows: usize, cols: usize, side_width: usize, output: usize) -> Self {
        let h = conv_out(conv_out(rows));
        let w = conv_out(conv_out(cols));
        let flat = 16 * h * w;
        NetworkSpec {
            image_shape: [1, rows, cols],
            layers: vec![
                Layer::Conv { in_channels: 1, out_channels: 8 },
                Layer::Conv { in_channels: 8, out_channels: 16 },
                Layer::Dense { input: flat, output: 64, activation: Activation::Relu },
                Layer::Concat { side_width },
                Layer::Dense { input: 64 + side_width, output: 256, activation: Activation::Relu },
                Layer::Dense { input: 256, output: 256, activation: Activation::Relu },
                Layer::Dense { input: 256, output, activation: Activation::None },
            ],
        }
    }

    /// Small dense-only stack; the image is flattened straight into the
    /// first layer. Used by the desk-scale pitch-only scenario.
    pub fn dense_sac(rows: usize, cols: usize, side_width: usize, hidden: usize, output: usize) -> Self {
        let image_len = rows * cols;
        NetworkSpec {
            image_shape: [1, rows, cols],
            layers: vec![
                Layer::Dense { input: image_len, output: hidden, activation: Activation::Relu },
                Layer::Concat { side_width },
                Layer::Dense {
                    input: hidden + side_width,
                    output: hidden,
                    activation: Activation::Relu,
                },
                Layer::Dense { input: hidden, output: hidden, activation: Activation::Relu },
                Layer::Dense { input: hidden, output, activation: Activation::None },
            ],
        }
    }

    pub fn side_width(&self) -> usize {
        self.layers
            .iter()
            .find_map(|l| match l {
                Layer::Concat { side_width } => Some(*side_width),
                _ => None,
            })
            .unwrap_or(0)
    }

    /// Walks the stack checking adjacent widths; returns the per-layer input
    /// widths and the final output width.
    fn walk(&self) -> Result<(Vec<Width>, usize), NnError> {
        let [c, h, w] = self.image_shape;
        let mut cur = Width::Spatial(c, h, w);
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut concat_seen = false;
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(cur);
            match *layer {
                Layer::Conv { in_channels, out_channels } => match cur {
                    Width::Spatial(c, h, w) if c == in_channels => {
                        cur = Width::Spatial(out_channels, conv_out(h), conv_out(w));
                    }
                    other => {
                        return Err(NnError::ShapeMismatch(format!(
                            "layer {i}: conv expects {in_channels} channels, input is {other:?}"
                        )))
                    }
                },
                Layer::Dense { input, output, .. } => {
                    if cur.flat() != input {
                        return Err(NnError::ShapeMismatch(format!(
                            "layer {i}: dense expects width {input}, input is {}",
                            cur.flat()
                        )));
                    }
                    cur = Width::Flat(output);
                }
                Layer::Concat { side_width } => {
                    if concat_seen {
                        return Err(NnError::ShapeMismatch(
                            "more than one concat layer".into(),
                        ));
                    }
                    concat_seen = true;
                    cur = Width::Flat(cur.flat() + side_width);
                }
            }
        }
        Ok((inputs, cur.flat()))
    }

    pub fn output_width(&self) -> Result<usize, NnError> {
        Ok(self.walk()?.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T: Real> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T: Real> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Real> Params<T> {
    pub fn zeros_like(&self) -> Self {
        Params {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    weight: Tensor::zeros(&l.weight.shape),
                    bias: Tensor::zeros(&l.bias.shape),
                })
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weight.all_finite() && l.bias.all_finite())
    }

    /// Flat views over every parameter slice, weights then biases per layer.
    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.data.as_mut_slice(), l.bias.data.as_mut_slice()])
            .collect()
    }

    pub fn slices(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.data.as_slice(), l.bias.data.as_slice()])
            .collect()
    }
}

/// Weights uniform in +-sqrt(1/fan_in), biases zero.
pub fn init_params<T: Real, R: Rng>(spec: &NetworkSpec, rng: &mut R) -> Params<T> {
    let mut layers = Vec::with_capacity(spec.layers.len());
    for layer in &spec.layers {
        let (wshape, bshape, fan_in) = match *layer {
            Layer::Conv { in_channels, out_channels } => (
                vec![out_channels, in_channels, 3, 3],
                vec![out_channels],
                in_channels * 9,
            ),
            Layer::Dense { input, output, .. } => (vec![output, input], vec![output], input),
            Layer::Concat { .. } => (vec![0], vec![0], 1),
        };
        let bound = (1.0 / fan_in as f64).sqrt();
        let weight = Tensor::from_vec(
            &wshape,
            (0..wshape.iter().product::<usize>())
                .map(|_| real::<T>(rng.gen_range(-bound..=bound)))
                .collect(),
        );
        let bias = Tensor::zeros(&bshape);
        layers.push(LayerParams { weight, bias });
    }
    Params { layers }
}

/// Per-layer buffers captured by the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache<T: Real> {
    /// Input vector feeding each layer.
    inputs: Vec<Vec<T>>,
    /// Pre-activation output of each parameterized layer (empty for concat).
    zs: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Real> {
    pub layers: Vec<LayerParams<T>>,
    pub image: Tensor<T>,
    pub scalars: Tensor<T>,
}

fn relu<T: Real>(z: T) -> T {
    z.max(T::zero())
}

fn conv_forward<T: Real>(
    input: &[T],
    weight: &[T],
    bias: &[T],
    (ci, h, w): (usize, usize, usize),
    co: usize,
) -> Vec<T> {
    let oh = conv_out(h);
    let ow = conv_out(w);
    let mut z = vec![T::zero(); co * oh * ow];
    for oc in 0..co {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = bias[oc];
                for ic in 0..ci {
                    for ky in 0..3usize {
                        let iy = (oy * 2 + ky) as isize - 1;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..3usize {
                            let ix = (ox * 2 + kx) as isize - 1;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let wv = weight[((oc * ci + ic) * 3 + ky) * 3 + kx];
                            let xv = input[(ic * h + iy as usize) * w + ix as usize];
                            acc = acc + wv * xv;
                        }
                    }
                }
                z[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    z
}

#[allow(clippy::too_many_arguments)]
fn conv_backward<T: Real>(
    input: &[T],
    weight: &[T],
    delta: &[T],
    (ci, h, w): (usize, usize, usize),
    co: usize,
    dw: &mut [T],
    db: &mut [T],
    dx: &mut [T],
) {
    let oh = conv_out(h);
    let ow = conv_out(w);
    for oc in 0..co {
        for oy in 0..oh {
            for ox in 0..ow {
                let d = delta[(oc * oh + oy) * ow + ox];
                if d == T::zero() {
                    continue;
                }
                db[oc] = db[oc] + d;
                for ic in 0..ci {
                    for ky in 0..3usize {
                        let iy = (oy * 2 + ky) as isize - 1;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..3usize {
                            let ix = (ox * 2 + kx) as isize - 1;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let widx = ((oc * ci + ic) * 3 + ky) * 3 + kx;
                            let xidx = (ic * h + iy as usize) * w + ix as usize;
                            dw[widx] = dw[widx] + d * input[xidx];
                            dx[xidx] = dx[xidx] + d * weight[widx];
                        }
                    }
                }
            }
        }
    }
}

/// Deterministic forward pass; the cache feeds [`backward`].
pub fn forward<T: Real>(
    spec: &NetworkSpec,
    params: &Params<T>,
    image: &Tensor<T>,
    scalars: &Tensor<T>,
) -> Result<(Tensor<T>, ForwardCache<T>), NnError> {
    let (widths, _) = spec.walk()?;
    if image.len() != spec.image_shape.iter().product::<usize>() {
        return Err(NnError::ShapeMismatch(format!(
            "image has {} values, spec expects {:?}",
            image.len(),
            spec.image_shape
        )));
    }
    if scalars.len() != spec.side_width() {
        return Err(NnError::ShapeMismatch(format!(
            "scalar input has {} values, spec expects {}",
            scalars.len(),
            spec.side_width()
        )));
    }
    if params.layers.len() != spec.layers.len() {
        return Err(NnError::ShapeMismatch("params/spec layer count differs".into()));
    }

    let mut cache = ForwardCache { inputs: Vec::new(), zs: Vec::new() };
    let mut cur = image.data.clone();
    for (i, layer) in spec.layers.iter().enumerate() {
        cache.inputs.push(cur.clone());
        let lp = &params.layers[i];
        match *layer {
            Layer::Conv { in_channels, out_channels } => {
                let (c, h, w) = match widths[i] {
                    Width::Spatial(c, h, w) => (c, h, w),
                    _ => unreachable!("walk validated conv input"),
                };
                debug_assert_eq!(c, in_channels);
                let z = conv_forward(&cur, &lp.weight.data, &lp.bias.data, (c, h, w), out_channels);
                cur = z.iter().map(|&v| relu(v)).collect();
                cache.zs.push(z);
            }
            Layer::Dense { input, output, activation } => {
                let mut z = vec![T::zero(); output];
                for o in 0..output {
                    let mut acc = lp.bias.data[o];
                    let row = &lp.weight.data[o * input..(o + 1) * input];
                    for (xv, wv) in cur.iter().zip(row) {
                        acc = acc + *xv * *wv;
                    }
                    z[o] = acc;
                }
                cur = match activation {
                    Activation::Relu => z.iter().map(|&v| relu(v)).collect(),
                    Activation::None => z.clone(),
                };
                cache.zs.push(z);
            }
            Layer::Concat { .. } => {
                cur.extend_from_slice(&scalars.data);
                cache.zs.push(Vec::new());
            }
        }
    }
    Ok((Tensor::from_vec(&[cur.len()], cur), cache))
}

/// Backpropagates `grad_output` (dL/dy on the network output) through the
/// cached forward pass, returning parameter gradients and input gradients.
pub fn backward<T: Real>(
    spec: &NetworkSpec,
    params: &Params<T>,
    cache: &ForwardCache<T>,
    grad_output: &[T],
) -> Result<Gradients<T>, NnError> {
    let (widths, out_width) = spec.walk()?;
    if grad_output.len() != out_width {
        return Err(NnError::ShapeMismatch(format!(
            "grad_output has {} values, network output is {out_width}",
            grad_output.len()
        )));
    }
    let mut grads = params.zeros_like();
    let mut scalars_grad = vec![T::zero(); spec.side_width()];
    let mut g: Vec<T> = grad_output.to_vec();

    for (i, layer) in spec.layers.iter().enumerate().rev() {
        let lp = &params.layers[i];
        let gl = &mut grads.layers[i];
        match *layer {
            Layer::Conv { in_channels, out_channels } => {
                let (c, h, w) = match widths[i] {
                    Width::Spatial(c, h, w) => (c, h, w),
                    _ => unreachable!(),
                };
                debug_assert_eq!(c, in_channels);
                let z = &cache.zs[i];
                let delta: Vec<T> = g
                    .iter()
                    .zip(z)
                    .map(|(&gv, &zv)| if zv > T::zero() { gv } else { T::zero() })
                    .collect();
                let mut dx = vec![T::zero(); c * h * w];
                conv_backward(
                    &cache.inputs[i],
                    &lp.weight.data,
                    &delta,
                    (c, h, w),
                    out_channels,
                    &mut gl.weight.data,
                    &mut gl.bias.data,
                    &mut dx,
                );
                g = dx;
            }
            Layer::Dense { input, output, activation } => {
                let z = &cache.zs[i];
                let delta: Vec<T> = match activation {
                    Activation::Relu => g
                        .iter()
                        .zip(z)
                        .map(|(&gv, &zv)| if zv > T::zero() { gv } else { T::zero() })
                        .collect(),
                    Activation::None => g.clone(),
                };
                let x = &cache.inputs[i];
                let mut dx = vec![T::zero(); input];
                for o in 0..output {
                    let d = delta[o];
                    gl.bias.data[o] = gl.bias.data[o] + d;
                    let wrow = &lp.weight.data[o * input..(o + 1) * input];
                    let dwrow = &mut gl.weight.data[o * input..(o + 1) * input];
                    for j in 0..input {
                        dwrow[j] = dwrow[j] + d * x[j];
                        dx[j] = dx[j] + d * wrow[j];
                    }
                }
                g = dx;
            }
            Layer::Concat { side_width } => {
                let trunk = widths[i].flat();
                debug_assert_eq!(g.len(), trunk + side_width);
                scalars_grad.copy_from_slice(&g[trunk..]);
                g.truncate(trunk);
            }
        }
    }

    let image_len = spec.image_shape.iter().product();
    debug_assert_eq!(g.len(), image_len);
    Ok(Gradients {
        layers: grads.layers,
        image: Tensor::from_vec(&[image_len], g),
        scalars: Tensor::from_vec(&[spec.side_width().max(0)], scalars_grad),
    })
}
