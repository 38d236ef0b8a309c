"""
Feed-forward encoder F_theta: feature vector -> unit-norm embedding.

Layers are dense (relu or linear) and the network always ends with an L2
normalization. Backpropagation is written out by hand.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import NormTooSmallError
from suvr_engine.numeric import NORM_FLOOR
from suvr_engine.numeric import DenseMatrix
from suvr_engine.numeric import DenseVector
from suvr_engine.numeric import as_matrix
from suvr_engine.numeric import as_vector
from suvr_engine.numeric import make_rng

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN = (64,)
DEFAULT_EMBEDDING_DIM = 64
BIAS_INIT = 0.01


class Activation(StrEnum):
    RELU = "relu"
    LINEAR = "linear"


@dataclass
class DenseLayer:
    weights: DenseMatrix  # out x in
    biases: DenseVector  # out
    activation: Activation = Activation.LINEAR

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]


@dataclass
class LayerGradients:
    weights: DenseMatrix
    biases: DenseVector


@dataclass
class ForwardCache:
    """Everything `backward` needs from one forward pass."""

    inputs: list[DenseVector]  # input to each layer
    pre_activations: list[DenseVector]
    unnormalized: DenseVector
    norm: float
    output: DenseVector


class MlpEncoder:
    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise ValueError("encoder needs at least one layer")
        for depth, (a, b) in enumerate(zip(layers, layers[1:], strict=False)):
            if a.fan_out != b.fan_in:
                raise DimensionMismatchError(
                    f"layer {depth} outputs {a.fan_out} values but layer {depth + 1} expects {b.fan_in}"
                )
        for depth, layer in enumerate(layers):
            if layer.biases.shape != (layer.fan_out,):
                raise DimensionMismatchError(
                    f"layer {depth} bias shape {layer.biases.shape} does not match {layer.fan_out} outputs"
                )
        self.layers = list(layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        """Weights and biases in layer order; arrays are updated in place by the optimizer."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.extend((layer.weights, layer.biases))
        return params


def build_encoder(
    d_in: int,
    d: int = DEFAULT_EMBEDDING_DIM,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    seed: int | np.random.SeedSequence = 0,
) -> MlpEncoder:
    """
    d_in -> hidden (relu) ... -> d (linear) -> normalize.

    Weights are N(0, 1/fan_in); biases start at 0.01.
    """
    rng = make_rng(seed)
    dims = [d_in, *hidden, d]
    layers = []
    for depth, (fan_in, fan_out) in enumerate(zip(dims, dims[1:], strict=False)):
        last = depth == len(dims) - 2
        layers.append(
            DenseLayer(
                weights=rng.standard_normal((fan_out, fan_in)) / np.sqrt(fan_in),
                biases=np.full(fan_out, BIAS_INIT),
                activation=Activation.LINEAR if last else Activation.RELU,
            )
        )
    logger.debug(f"Built encoder with dims {dims}")
    return MlpEncoder(layers)


def forward(enc: MlpEncoder, x) -> tuple[DenseVector, ForwardCache]:
    """
    Embed one feature vector.

    Raises:
        NormTooSmallError: If the last layer's output is (numerically) zero.
    """
    x = as_vector(x)
    if x.size != enc.input_dim:
        raise DimensionMismatchError(
            f"input has dimension {x.size}, encoder expects {enc.input_dim}"
        )
    inputs, pre_activations = [], []
    a = x
    for layer in enc.layers:
        inputs.append(a)
        z = layer.weights @ a + layer.biases
        pre_activations.append(z)
        a = np.maximum(z, 0.0) if layer.activation == Activation.RELU else z
    norm = float(np.linalg.norm(a))
    if norm < NORM_FLOOR:
        raise NormTooSmallError(f"encoder output norm {norm:.3e} is too small to normalize")
    v = a / norm
    return v, ForwardCache(inputs, pre_activations, a, norm, v)


def backward(enc: MlpEncoder, cache: ForwardCache, dl_dv) -> list[LayerGradients]:
    """
    Parameter gradients given dL/dv.

    Through the normalization, dL/du = (I - v v^T) dL/dv / ||u||.
    """
    dl_dv = as_vector(dl_dv)
    if len(cache.inputs) != len(enc.layers) or dl_dv.shape != cache.output.shape:
        raise DimensionMismatchError("forward cache does not belong to this encoder")
    for layer, a_in, z in zip(enc.layers, cache.inputs, cache.pre_activations, strict=True):
        if a_in.shape != (layer.fan_in,) or z.shape != (layer.fan_out,):
            raise DimensionMismatchError("forward cache is stale: layer shapes changed")

    v = cache.output
    grad = (dl_dv - v * (v @ dl_dv)) / cache.norm
    grads: list[LayerGradients] = []
    for layer, a_in, z in zip(
        reversed(enc.layers), reversed(cache.inputs), reversed(cache.pre_activations), strict=True
    ):
        if layer.activation == Activation.RELU:
            grad = grad * (z > 0.0)
        grads.append(LayerGradients(weights=np.outer(grad, a_in), biases=grad.copy()))
        grad = layer.weights.T @ grad
    grads.reverse()
    return grads


def flatten_gradients(grads: Sequence[LayerGradients]) -> list[np.ndarray]:
    """Gradients aligned with `MlpEncoder.parameters()`."""
    flat: list[np.ndarray] = []
    for g in grads:
        flat.extend((g.weights, g.biases))
    return flat


def embed_batch(enc: MlpEncoder, X) -> DenseMatrix:
    """Embed every row of X; rows are processed together for speed."""
    X = as_matrix(X)
    if X.shape[1] != enc.input_dim:
        raise DimensionMismatchError(
            f"features have dimension {X.shape[1]}, encoder expects {enc.input_dim}"
        )
    A = X
    for layer in enc.layers:
        Z = A @ layer.weights.T + layer.biases
        A = np.maximum(Z, 0.0) if layer.activation == Activation.RELU else Z
    norms = np.linalg.norm(A, axis=1)
    small = np.flatnonzero(norms < NORM_FLOOR)
    if small.size:
        raise NormTooSmallError(f"encoder output for row {int(small[0])} is too small to normalize")
    return A / norms[:, None]
