"""
NN Layers - Conv1D, BatchNorm, ReLU/tanh, MaxPool, LSTM, Dropout, Dense, softmax/CE, RMSProp

Tensores são numpy.ndarray contíguos (row-major). Cada operação tem o forward puro e o
backward correspondente; as camadas de nn_model guardam o cache entre os dois.
"""
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, log_softmax, softmax

from app.core.exceptions import ShapeMismatch, TinyBatch

TRAIN = "train"
INFER = "infer"


# --- CONV1D ---
def conv1d_output_length(time: int, kernel: int, stride: int) -> int:
    return (time - kernel) // stride + 1


def _conv_windows(x: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    # (batch, t_out, ch_in, k)
    return sliding_window_view(x, kernel, axis=1)[:, ::stride]


def conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1) -> np.ndarray:
    """y[t, o] = Σ_{j,c} w[j, c, o]·x[t·stride + j, c] + b[o] (valid, correlação cruzada)"""
    if x.ndim != 3 or w.ndim != 3 or x.shape[2] != w.shape[1] or b.shape != (w.shape[2],):
        raise ShapeMismatch(f"conv1d: x{x.shape}, w{w.shape}, b{b.shape}")
    if x.shape[1] < w.shape[0] or stride < 1:
        raise ShapeMismatch(f"conv1d: tempo {x.shape[1]} menor que o kernel {w.shape[0]}")
    windows = _conv_windows(x, w.shape[0], stride)
    return np.tensordot(windows, w, axes=([2, 3], [1, 0])) + b


def conv1d_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray, stride: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    kernel = w.shape[0]
    t_out = dy.shape[1]
    windows = _conv_windows(x, kernel, stride)
    dw = np.tensordot(windows, dy, axes=([0, 1], [0, 1])).transpose(1, 0, 2)
    db = dy.sum(axis=(0, 1))
    dx = np.zeros_like(x)
    span = stride * (t_out - 1) + 1
    for j in range(kernel):
        dx[:, j:j + span:stride, :] += dy @ w[j].T
    return dx, dw, db


# --- BATCH NORMALIZATION ---
def batch_norm(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    mode: str = TRAIN,
    running_mean: Optional[np.ndarray] = None,
    running_var: Optional[np.ndarray] = None,
    momentum: float = 0.99,
    eps: float = 1e-3,
) -> Tuple[np.ndarray, Dict]:
    """
    Normalização por canal sobre batch×tempo. Em treino usa as estatísticas do batch e
    atualiza running_mean/running_var no lugar; em inferência usa as running.
    """
    axes = tuple(range(x.ndim - 1))
    if mode == TRAIN:
        if x.shape[0] < 2:
            raise TinyBatch(f"batch_norm em treino com batch {x.shape[0]}")
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        if running_mean is not None:
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mean
        if running_var is not None:
            running_var *= momentum
            running_var += (1.0 - momentum) * var
    else:
        mean = running_mean if running_mean is not None else np.zeros_like(gamma)
        var = running_var if running_var is not None else np.ones_like(gamma)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    cache = {"xhat": xhat, "inv_std": inv_std, "gamma": gamma, "mode": mode, "axes": axes}
    return gamma * xhat + beta, cache


def batch_norm_backward(dy: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv_std, gamma, axes = cache["xhat"], cache["inv_std"], cache["gamma"], cache["axes"]
    dgamma = (dy * xhat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dxhat = dy * gamma
    if cache["mode"] != TRAIN:
        return dxhat * inv_std, dgamma, dbeta
    n = int(np.prod([dy.shape[a] for a in axes]))
    dx = (inv_std / n) * (
        n * dxhat - dxhat.sum(axis=axes) - xhat * (dxhat * xhat).sum(axis=axes)
    )
    return dx, dgamma, dbeta


# --- ATIVAÇÕES ---
def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(dy: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dy * (x > 0.0)


def tanh_act(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def tanh_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * (1.0 - y ** 2)


# --- MAX POOLING ---
def max_pool1d(x: np.ndarray, pool: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Janelas não sobrepostas; o resto final é descartado. Retorna (y, argmax)"""
    batch, time, channels = x.shape
    t_out = time // pool
    if t_out < 1:
        raise ShapeMismatch(f"max_pool1d: tempo {time} menor que pool {pool}")
    blocks = x[:, :t_out * pool].reshape(batch, t_out, pool, channels)
    idx = blocks.argmax(axis=2)
    return np.take_along_axis(blocks, idx[:, :, None, :], axis=2)[:, :, 0, :], idx


def max_pool1d_backward(dy: np.ndarray, idx: np.ndarray, input_shape: Tuple[int, ...], pool: int = 2) -> np.ndarray:
    batch, time, channels = input_shape
    t_out = dy.shape[1]
    onehot = np.arange(pool)[None, None, :, None] == idx[:, :, None, :]
    dx = np.zeros(input_shape, dtype=dy.dtype)
    dx[:, :t_out * pool] = (onehot * dy[:, :, None, :]).reshape(batch, t_out * pool, channels)
    return dx


# --- DROPOUT ---
def dropout(x: np.ndarray, rate: float, mode: str = TRAIN, rng: Union[int, np.random.Generator, None] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Dropout invertido em treino; identidade em inferência"""
    if mode != TRAIN or rate <= 0.0:
        return x, None
    rng = np.random.default_rng(rng)
    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * mask, mask


# --- DENSE ---
def dense(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    if x.shape[-1] != W.shape[0] or b.shape != (W.shape[1],):
        raise ShapeMismatch(f"dense: x{x.shape}, W{W.shape}, b{b.shape}")
    return x @ W + b


def dense_backward(dy: np.ndarray, x: np.ndarray, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dy @ W.T, x.T @ dy, dy.sum(axis=0)


# --- LSTM ---
def lstm_layer(
    x: np.ndarray,
    W: np.ndarray,
    U: np.ndarray,
    b: np.ndarray,
    recurrent_dropout: float = 0.0,
    mode: str = INFER,
    rng: Union[int, np.random.Generator, None] = None,
) -> Tuple[np.ndarray, Dict]:
    """
    Célula padrão, portas na ordem (i, f, g, o). Em treino, o h que entra em U é
    mascarado por uma única máscara por sequência, escalada por 1/(1 - taxa).
    Retorna a sequência completa de h.
    """
    batch, time, features = x.shape
    units = U.shape[0]
    if W.shape != (features, 4 * units) or U.shape != (units, 4 * units) or b.shape != (4 * units,):
        raise ShapeMismatch(f"lstm: x{x.shape}, W{W.shape}, U{U.shape}, b{b.shape}")

    mask = None
    if mode == TRAIN and recurrent_dropout > 0.0:
        rng = np.random.default_rng(rng)
        mask = (rng.random((batch, units)) >= recurrent_dropout).astype(x.dtype) / (1.0 - recurrent_dropout)

    projected = x @ W + b  # (batch, time, 4u)
    h = np.zeros((batch, units), dtype=x.dtype)
    c = np.zeros((batch, units), dtype=x.dtype)
    hs = np.zeros((batch, time, units), dtype=x.dtype)
    steps = []
    for t in range(time):
        h_in = h * mask if mask is not None else h
        z = projected[:, t] + h_in @ U
        i = expit(z[:, :units])
        f = expit(z[:, units:2 * units])
        g = np.tanh(z[:, 2 * units:3 * units])
        o = expit(z[:, 3 * units:])
        c_prev = c
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        hs[:, t] = h
        steps.append((h_in, c_prev, i, f, g, o, tc))

    cache = {"x": x, "W": W, "U": U, "mask": mask, "steps": steps}
    return hs, cache


def lstm_backward(dhs: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x, W, U, mask, steps = cache["x"], cache["W"], cache["U"], cache["mask"], cache["steps"]
    batch, time, _ = x.shape
    units = U.shape[0]
    dx = np.zeros_like(x)
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * units, dtype=x.dtype)
    dh_next = np.zeros((batch, units), dtype=x.dtype)
    dc_next = np.zeros((batch, units), dtype=x.dtype)

    for t in reversed(range(time)):
        h_in, c_prev, i, f, g, o, tc = steps[t]
        dh = dhs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc ** 2)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g ** 2), do * o * (1.0 - o)],
            axis=1,
        )
        dW += x[:, t].T @ dz
        dU += h_in.T @ dz
        db += dz.sum(axis=0)
        dx[:, t] = dz @ W.T
        dh_in = dz @ U.T
        dh_next = dh_in * mask if mask is not None else dh_in

    return dx, dW, dU, db


# --- SAÍDA / OTIMIZADOR ---
def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Entropia cruzada média; labels one-hot (batch, classes) ou índices (batch,)"""
    if labels.ndim == 1:
        onehot = np.zeros_like(logits)
        onehot[np.arange(len(labels)), labels.astype(int)] = 1.0
        labels = onehot
    if labels.shape != logits.shape:
        raise ShapeMismatch(f"logits{logits.shape} e labels{labels.shape}")
    batch = logits.shape[0]
    log_probs = log_softmax(logits, axis=1)
    loss = float(-(labels * log_probs).sum() / batch)
    return loss, (softmax(logits, axis=1) - labels) / batch


def rmsprop_step(
    param: np.ndarray,
    grad: np.ndarray,
    state: np.ndarray,
    lr: float = 0.001,
    rho: float = 0.9,
    eps: float = 1e-7,
):
    """v <- rho·v + (1 - rho)·g²; θ <- θ - lr·g / (√v + eps), no lugar"""
    if param.shape != grad.shape or param.shape != state.shape:
        raise ShapeMismatch(f"rmsprop: param{param.shape}, grad{grad.shape}, v{state.shape}")
    state *= rho
    state += (1.0 - rho) * grad ** 2
    param -= lr * grad / (np.sqrt(state) + eps)
