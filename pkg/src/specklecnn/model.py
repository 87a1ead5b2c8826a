"""The fixed classifier topology: four conv/pool stages and two dense layers.

Stage widths are 32/64/128/128 kernels of size 3x3 (valid padding, stride
1), each followed by ReLU and 2x2 max pooling, then a 512-unit ReLU dense
layer and a softmax output layer. With a 256-pixel input and 30 classes
this network has exactly 13,101,214 trainable parameters.
"""

from dataclasses import dataclass

import numpy as np

from . import ops
from .errors import ShapeError

KERNEL_SIZE = 3
CONV_CHANNELS = (32, 64, 128, 128)
DENSE_HIDDEN = 512

TENSOR_NAMES = (
    "conv1_kernels", "conv1_bias",
    "conv2_kernels", "conv2_bias",
    "conv3_kernels", "conv3_bias",
    "conv4_kernels", "conv4_bias",
    "dense1_weights", "dense1_bias",
    "dense2_weights", "dense2_bias",
)


def shape_chain(input_side):
    """Spatial sides after each conv and pool stage.

    Returns a list of (conv_out_side, pool_out_side) per stage, or raises
    ShapeError if some stage would underflow.
    """
    side = input_side
    chain = []
    for i in range(len(CONV_CHANNELS)):
        if side < KERNEL_SIZE:
            raise ShapeError(f"stage {i + 1} conv input side {side} < "
                             f"kernel size {KERNEL_SIZE}")
        conv_side = side - (KERNEL_SIZE - 1)
        if conv_side < 2:
            raise ShapeError(f"stage {i + 1} pool input side {conv_side} "
                             f"< 2")
        pool_side = conv_side // 2
        chain.append((conv_side, pool_side))
        side = pool_side
    return chain


def _min_input_side():
    side = KERNEL_SIZE
    while True:
        try:
            shape_chain(side)
            return side
        except ShapeError:
            side += 1


MIN_INPUT_SIDE = _min_input_side()


def flatten_dim(input_side):
    """Length of the flattened final pool output."""
    chain = shape_chain(input_side)
    last = chain[-1][1]
    return last * last * CONV_CHANNELS[-1]


def layer_shapes(input_side, class_count):
    """Parameter tensor shapes keyed by TENSOR_NAMES."""
    shapes = {}
    cin = 1
    for i, cout in enumerate(CONV_CHANNELS, start=1):
        shapes[f"conv{i}_kernels"] = (KERNEL_SIZE, KERNEL_SIZE, cin, cout)
        shapes[f"conv{i}_bias"] = (cout,)
        cin = cout
    flat = flatten_dim(input_side)
    shapes["dense1_weights"] = (flat, DENSE_HIDDEN)
    shapes["dense1_bias"] = (DENSE_HIDDEN,)
    shapes["dense2_weights"] = (DENSE_HIDDEN, class_count)
    shapes["dense2_bias"] = (class_count,)
    return shapes


@dataclass
class NetworkParams:
    """All trainable tensors of one network, keyed by TENSOR_NAMES."""
    input_side: int
    class_count: int
    tensors: dict

    @property
    def dtype(self):
        return self.tensors["conv1_kernels"].dtype

    def param_count(self):
        return sum(t.size for t in self.tensors.values())


@dataclass
class ForwardTrace:
    """Intermediate activations retained for backpropagation."""
    conv_inputs: list
    conv_preacts: list
    pool_traces: list
    flat: np.ndarray
    dense1_preact: np.ndarray
    dense1_out: np.ndarray
    logits: np.ndarray
    probs: np.ndarray


def _glorot_limit(fan_in, fan_out):
    return np.sqrt(6.0 / (fan_in + fan_out))


def build_network(input_side, class_count, seed, dtype=np.float32):
    """Create a freshly initialized network.

    Weights are Glorot-uniform, biases zero; identical seeds give
    bit-identical networks. `dtype` may be float64 for gradient checks.
    """
    try:
        shapes = layer_shapes(input_side, class_count)
    except ShapeError as exc:
        raise ShapeError(f"input side {input_side} is too small: {exc}; "
                         f"minimum side is {MIN_INPUT_SIDE}") from None
    if class_count < 1:
        raise ShapeError(f"class count must be >= 1, got {class_count}")

    rng = np.random.default_rng(seed)
    tensors = {}
    for name in TENSOR_NAMES:
        shape = shapes[name]
        if name.endswith("_bias"):
            tensors[name] = np.zeros(shape, dtype=dtype)
        elif name.startswith("conv"):
            kh, kw, cin, cout = shape
            lim = _glorot_limit(kh * kw * cin, kh * kw * cout)
            tensors[name] = rng.uniform(-lim, lim, shape).astype(dtype)
        else:
            n, m = shape
            lim = _glorot_limit(n, m)
            tensors[name] = rng.uniform(-lim, lim, shape).astype(dtype)
    return NetworkParams(input_side=input_side, class_count=class_count,
                         tensors=tensors)


def forward(params, image):
    """Run the network on one image of shape (side, side, 1) with values
    in [0, 1]; returns a ForwardTrace whose `probs` sum to 1."""
    image = np.ascontiguousarray(image, dtype=params.dtype)
    expected = (params.input_side, params.input_side, 1)
    if image.shape != expected:
        raise ShapeError(f"forward: image shape {image.shape} != expected "
                         f"{expected}")

    t = params.tensors
    conv_inputs, conv_preacts, pool_traces = [], [], []
    x = image
    for i in range(1, len(CONV_CHANNELS) + 1):
        conv_inputs.append(x)
        z = ops.conv2d_valid(x, t[f"conv{i}_kernels"], t[f"conv{i}_bias"])
        conv_preacts.append(z)
        trace = ops.maxpool2(ops.relu(z))
        pool_traces.append(trace)
        x = trace.output

    flat = ops.flatten(x)
    z1 = ops.dense(flat, t["dense1_weights"], t["dense1_bias"])
    a1 = ops.relu(z1)
    logits = ops.dense(a1, t["dense2_weights"], t["dense2_bias"])
    probs = ops.softmax(logits)
    return ForwardTrace(conv_inputs=conv_inputs, conv_preacts=conv_preacts,
                        pool_traces=pool_traces, flat=flat,
                        dense1_preact=z1, dense1_out=a1,
                        logits=logits, probs=probs)


def zero_gradients(params):
    """A gradient accumulator with the same tensor names and shapes."""
    return {name: np.zeros_like(t) for name, t in params.tensors.items()}


def _backward(params, trace, grad_logits, grads):
    """Accumulate gradients of one sample's loss into `grads`."""
    t = params.tensors

    ga1, gw2, gb2 = ops.dense_backward(trace.dense1_out,
                                       t["dense2_weights"], grad_logits)
    grads["dense2_weights"] += gw2
    grads["dense2_bias"] += gb2

    gz1 = ops.relu_backward(trace.dense1_preact, ga1)
    gflat, gw1, gb1 = ops.dense_backward(trace.flat, t["dense1_weights"],
                                         gz1)
    grads["dense1_weights"] += gw1
    grads["dense1_bias"] += gb1

    gx = gflat.reshape(trace.pool_traces[-1].output.shape)
    for i in range(len(CONV_CHANNELS), 0, -1):
        pool = trace.pool_traces[i - 1]
        g = ops.maxpool2_backward(pool, gx)
        g = ops.relu_backward(trace.conv_preacts[i - 1], g)
        gx, gk, gb = ops.conv2d_valid_backward(trace.conv_inputs[i - 1],
                                               t[f"conv{i}_kernels"], g)
        grads[f"conv{i}_kernels"] += gk
        grads[f"conv{i}_bias"] += gb
    return gx


def _batch_pass(params, batch):
    """One forward+backward sweep over (image, onehot) pairs.

    Returns (mean_loss, grads, correct_count); samples are accumulated in
    list order, so results are deterministic.
    """
    if len(batch) == 0:
        raise ValueError("loss_and_gradients: empty batch")
    grads = zero_gradients(params)
    total = 0.0
    correct = 0
    for image, onehot in batch:
        trace = forward(params, image)
        total += ops.cross_entropy(trace.probs, onehot)
        if int(np.argmax(trace.probs)) == int(np.argmax(onehot)):
            correct += 1
        glogits = ops.softmax_xent_grad(trace.probs, onehot)
        _backward(params, trace, glogits, grads)
    n = params.dtype.type(len(batch))
    for name in grads:
        grads[name] /= n
    return total / len(batch), grads, correct


def loss_and_gradients(params, batch):
    """Mean cross-entropy over a batch of (image, onehot) pairs and its
    exact gradient for every parameter tensor."""
    mean_loss, grads, _ = _batch_pass(params, batch)
    return mean_loss, grads


def predict(params, image):
    """Class with the highest probability; ties resolve to the lowest
    class index. Returns (class_index, probability)."""
    probs = forward(params, image).probs
    idx = int(np.argmax(probs))
    return idx, float(probs[idx])
