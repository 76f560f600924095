use serde_json::{json, Value};

use super::layers::{Activation, Layer, LayerParams, NetworkSpec, Params};
use super::{NnError, Tensor};
use crate::scalar::{real, Real};

const VERSION: u64 = 1;

fn layer_to_json(layer: &Layer) -> Value {
    match *layer {
        Layer::Conv { in_channels, out_channels } => {
            json!({"type": "conv", "in_channels": in_channels, "out_channels": out_channels})
        }
        Layer::Dense { input, output, activation } => json!({
            "type": "dense",
            "input": input,
            "output": output,
            "activation": match activation { Activation::Relu => "relu", Activation::None => "none" },
        }),
        Layer::Concat { side_width } => json!({"type": "concat", "side_width": side_width}),
    }
}

/// Versioned JSON parameter document: spec descriptor plus flat weight and
/// bias lists per layer.
pub fn save_params<T: Real>(spec: &NetworkSpec, params: &Params<T>) -> String {
    let layers: Vec<Value> = params
        .layers
        .iter()
        .map(|lp| {
            json!({
                "weight_shape": lp.weight.shape,
                "weight": lp.weight.data.iter().map(|v| v.to_f64().unwrap()).collect::<Vec<f64>>(),
                "bias": lp.bias.data.iter().map(|v| v.to_f64().unwrap()).collect::<Vec<f64>>(),
            })
        })
        .collect();
    let doc = json!({
        "version": VERSION,
        "spec": {
            "image_shape": spec.image_shape,
            "layers": spec.layers.iter().map(layer_to_json).collect::<Vec<Value>>(),
        },
        "layers": layers,
    });
    serde_json::to_string(&doc).expect("parameter document serializes")
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, NnError> {
    v.get(key).ok_or_else(|| NnError::Malformed(format!("missing key '{key}'")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize, NnError> {
    get(v, key)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| NnError::Malformed(format!("'{key}' is not an integer")))
}

fn layer_from_json(v: &Value) -> Result<Layer, NnError> {
    let ty = get(v, "type")?
        .as_str()
        .ok_or_else(|| NnError::Malformed("layer type is not a string".into()))?;
    match ty {
        "conv" => Ok(Layer::Conv {
            in_channels: as_usize(v, "in_channels")?,
            out_channels: as_usize(v, "out_channels")?,
        }),
        "dense" => {
            let activation = match get(v, "activation")?.as_str() {
                Some("relu") => Activation::Relu,
                Some("none") => Activation::None,
                other => return Err(NnError::Malformed(format!("bad activation {other:?}"))),
            };
            Ok(Layer::Dense { input: as_usize(v, "input")?, output: as_usize(v, "output")?, activation })
        }
        "concat" => Ok(Layer::Concat { side_width: as_usize(v, "side_width")? }),
        other => Err(NnError::Malformed(format!("unknown layer type '{other}'"))),
    }
}

pub fn load_params<T: Real>(text: &str) -> Result<(NetworkSpec, Params<T>), NnError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| NnError::Malformed(format!("bad JSON: {e}")))?;
    let version = get(&doc, "version")?
        .as_u64()
        .ok_or_else(|| NnError::Malformed("version is not an integer".into()))?;
    if version != VERSION {
        return Err(NnError::VersionMismatch(version));
    }

    let spec_doc = get(&doc, "spec")?;
    let shape_doc = get(spec_doc, "image_shape")?
        .as_array()
        .ok_or_else(|| NnError::Malformed("image_shape is not an array".into()))?;
    if shape_doc.len() != 3 {
        return Err(NnError::Malformed("image_shape must have 3 entries".into()));
    }
    let mut image_shape = [0usize; 3];
    for (i, v) in shape_doc.iter().enumerate() {
        image_shape[i] = v
            .as_u64()
            .ok_or_else(|| NnError::Malformed("image_shape entry not integer".into()))?
            as usize;
    }
    let layers_doc = get(spec_doc, "layers")?
        .as_array()
        .ok_or_else(|| NnError::Malformed("spec.layers is not an array".into()))?;
    let layers: Vec<Layer> = layers_doc.iter().map(layer_from_json).collect::<Result<_, _>>()?;
    let spec = NetworkSpec { image_shape, layers };
    spec.output_width()?; // validates adjacent widths

    let params_doc = get(&doc, "layers")?
        .as_array()
        .ok_or_else(|| NnError::Malformed("layers is not an array".into()))?;
    if params_doc.len() != spec.layers.len() {
        return Err(NnError::ShapeMismatch(format!(
            "document has {} parameter layers, spec has {}",
            params_doc.len(),
            spec.layers.len()
        )));
    }

    let mut layer_params = Vec::with_capacity(spec.layers.len());
    for (layer, pd) in spec.layers.iter().zip(params_doc) {
        let (wshape, blen) = match *layer {
            Layer::Conv { in_channels, out_channels } => {
                (vec![out_channels, in_channels, 3, 3], out_channels)
            }
            Layer::Dense { input, output, .. } => (vec![output, input], output),
            Layer::Concat { .. } => (vec![0], 0),
        };
        let read_vec = |key: &str| -> Result<Vec<T>, NnError> {
            get(pd, key)?
                .as_array()
                .ok_or_else(|| NnError::Malformed(format!("'{key}' is not an array")))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .filter(|f| f.is_finite())
                        .map(real::<T>)
                        .ok_or_else(|| NnError::Malformed(format!("non-finite value in '{key}'")))
                })
                .collect()
        };
        let weight = read_vec("weight")?;
        let bias = read_vec("bias")?;
        let wlen: usize = wshape.iter().product();
        if weight.len() != wlen || bias.len() != blen {
            return Err(NnError::ShapeMismatch(format!(
                "layer parameter lengths ({}, {}) do not match spec ({wlen}, {blen})",
                weight.len(),
                bias.len()
            )));
        }
        layer_params.push(LayerParams {
            weight: Tensor::from_vec(&wshape, weight),
            bias: Tensor::from_vec(&[blen], bias),
        });
    }
    Ok((spec, Params { layers: layer_params }))
}
