"""
NN Model - CNN -> LSTM -> DNN -> softmax, treino RMSProp com early stopping e checkpoint

Conv1D (256, 128, 64) + BatchNorm + ReLU + MaxPool(2), LSTM (128, 128, 64) com dropout
recorrente e dropout entre camadas, último passo de tempo -> Dense tanh
(128, 64, 32, 16, 8, 4) -> Dense 4 -> 2 logits.
"""
import json
import logging
import os
import struct
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import softmax

from app.core.exceptions import InvalidConfig, MalformedHeader, NonFiniteLoss, ShapeMismatch, TruncatedData
from app.core.utils import spawn_seeds
from app.models.classifiers import ModelConfig
from app.services import nn_layers as F

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"OSANN"
CHECKPOINT_VERSION = 1
_CKPT_HEAD = struct.Struct("<5sHI")
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "val_acc"]


def conv_stack_output_length(length: int, kernel: int, stride: int, pool: int, layers: int) -> int:
    """
    Comprimento após `layers` blocos conv + pool:
    L_{n+1} = floor((floor((L_n - k) / s) + 1) / p)
    Ex.: 7680, k=16, s=2, p=2, 3 blocos -> 1916 -> 475 -> 115
    """
    for _ in range(layers):
        if length < kernel:
            raise ShapeMismatch(f"Entrada de {length} amostras menor que o kernel {kernel}")
        length = F.conv1d_output_length(length, kernel, stride) // pool
        if length < 1:
            raise ShapeMismatch("Sequência vazia após o max pooling")
    return length


def _uniform(rng: np.random.Generator, shape: Tuple[int, ...], limit: float, dtype: str) -> np.ndarray:
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


# --- CAMADAS ---
class Layer:
    """Camada com parâmetros/gradientes nomeados; forward guarda o cache do backward"""

    def __init__(self, name: str):
        self.name = name
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.buffers: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv1D(Layer):
    def __init__(self, name, ch_in, ch_out, kernel, stride, rng, dtype):
        super().__init__(name)
        self.stride = stride
        self.params = {
            "w": _uniform(rng, (kernel, ch_in, ch_out), np.sqrt(6.0 / (kernel * ch_in)), dtype),
            "b": np.zeros(ch_out, dtype=dtype),
        }

    def forward(self, x, mode):
        self._x = x
        return F.conv1d(x, self.params["w"], self.params["b"], self.stride)

    def backward(self, dy):
        dx, self.grads["w"], self.grads["b"] = F.conv1d_backward(dy, self._x, self.params["w"], self.stride)
        return dx


class BatchNorm(Layer):
    def __init__(self, name, channels, momentum, eps, dtype):
        super().__init__(name)
        self.momentum = momentum
        self.eps = eps
        self.params = {"gamma": np.ones(channels, dtype=dtype), "beta": np.zeros(channels, dtype=dtype)}
        self.buffers = {"running_mean": np.zeros(channels, dtype=dtype), "running_var": np.ones(channels, dtype=dtype)}

    def forward(self, x, mode):
        y, self._cache = F.batch_norm(
            x, self.params["gamma"], self.params["beta"], mode,
            self.buffers["running_mean"], self.buffers["running_var"], self.momentum, self.eps,
        )
        return y

    def backward(self, dy):
        dx, self.grads["gamma"], self.grads["beta"] = F.batch_norm_backward(dy, self._cache)
        return dx


class ReLU(Layer):
    def forward(self, x, mode):
        self._x = x
        return F.relu(x)

    def backward(self, dy):
        return F.relu_backward(dy, self._x)


class Tanh(Layer):
    def forward(self, x, mode):
        self._y = F.tanh_act(x)
        return self._y

    def backward(self, dy):
        return F.tanh_backward(dy, self._y)


class MaxPool1D(Layer):
    def __init__(self, name, pool):
        super().__init__(name)
        self.pool = pool

    def forward(self, x, mode):
        self._shape = x.shape
        y, self._idx = F.max_pool1d(x, self.pool)
        return y

    def backward(self, dy):
        return F.max_pool1d_backward(dy, self._idx, self._shape, self.pool)


class LSTM(Layer):
    def __init__(self, name, features, units, recurrent_dropout, rng, dtype, dropout_rng):
        super().__init__(name)
        self.recurrent_dropout = recurrent_dropout
        self.rng = dropout_rng
        b = np.zeros(4 * units, dtype=dtype)
        b[units:2 * units] = 1.0  # viés da porta de esquecimento
        self.params = {
            "W": _uniform(rng, (features, 4 * units), np.sqrt(3.0 / features), dtype),
            "U": _uniform(rng, (units, 4 * units), 1.0 / np.sqrt(units), dtype),
            "b": b,
        }

    def forward(self, x, mode):
        hs, self._cache = F.lstm_layer(
            x, self.params["W"], self.params["U"], self.params["b"], self.recurrent_dropout, mode, self.rng
        )
        return hs

    def backward(self, dy):
        dx, self.grads["W"], self.grads["U"], self.grads["b"] = F.lstm_backward(dy, self._cache)
        return dx


class Dropout(Layer):
    def __init__(self, name, rate, dropout_rng):
        super().__init__(name)
        self.rate = rate
        self.rng = dropout_rng

    def forward(self, x, mode):
        y, self._mask = F.dropout(x, self.rate, mode, self.rng)
        return y

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask


class LastStep(Layer):
    """[B, T, U] -> [B, U] (último passo de tempo)"""

    def forward(self, x, mode):
        self._shape = x.shape
        return x[:, -1, :]

    def backward(self, dy):
        dx = np.zeros(self._shape, dtype=dy.dtype)
        dx[:, -1, :] = dy
        return dx


class Dense(Layer):
    def __init__(self, name, features, units, rng, dtype):
        super().__init__(name)
        self.params = {
            "W": _uniform(rng, (features, units), np.sqrt(3.0 / features), dtype),
            "b": np.zeros(units, dtype=dtype),
        }

    def forward(self, x, mode):
        self._x = x
        return F.dense(x, self.params["W"], self.params["b"])

    def backward(self, dy):
        dx, self.grads["W"], self.grads["b"] = F.dense_backward(dy, self._x, self.params["W"])
        return dx


# --- MODELO ---
class OsaNet:
    """Pilha completa; entrada [batch, input_length, 1], saída logits [batch, output_classes]"""

    def __init__(self, cfg: ModelConfig, input_length: int):
        self.cfg = cfg
        self.input_length = input_length
        self.lstm_steps = conv_stack_output_length(
            input_length, cfg.conv_kernel, cfg.conv_stride, cfg.pool, len(cfg.conv_units)
        )
        init_seed, dropout_seed = spawn_seeds(cfg.seed, 2)
        rng = np.random.default_rng(init_seed)
        self.dropout_rng = np.random.default_rng(dropout_seed)
        dtype = cfg.dtype

        self.layers: List[Layer] = []
        channels = 1
        for i, units in enumerate(cfg.conv_units):
            self.layers += [
                Conv1D(f"conv{i}", channels, units, cfg.conv_kernel, cfg.conv_stride, rng, dtype),
                BatchNorm(f"bn{i}", units, cfg.bn_momentum, cfg.bn_epsilon, dtype),
                ReLU(f"relu{i}"),
                MaxPool1D(f"pool{i}", cfg.pool),
            ]
            channels = units
        for i, units in enumerate(cfg.lstm_units):
            self.layers += [
                LSTM(f"lstm{i}", channels, units, cfg.recurrent_dropout, rng, dtype, self.dropout_rng),
                Dropout(f"drop{i}", cfg.inter_lstm_dropout, self.dropout_rng),
            ]
            channels = units
        self.layers.append(LastStep("last"))
        for i, units in enumerate(cfg.dense_units):
            self.layers += [Dense(f"dense{i}", channels, units, rng, dtype), Tanh(f"tanh{i}")]
            channels = units
        self.layers.append(Dense("logits", channels, cfg.output_classes, rng, dtype))

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.cfg.dtype)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.ndim != 3 or x.shape[1:] != (self.input_length, 1):
            raise ShapeMismatch(f"Entrada {x.shape}, esperado [batch, {self.input_length}, 1]")
        return x

    def forward(self, x: np.ndarray, mode: str = F.INFER) -> np.ndarray:
        out = self._prepare(x)
        for layer in self.layers:
            out = layer.forward(out, mode)
        return out

    def backward(self, dlogits: np.ndarray):
        grad = dlogits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)

    def loss(self, x: np.ndarray, labels: np.ndarray, mode: str = F.TRAIN) -> Tuple[float, np.ndarray]:
        return F.softmax_cross_entropy(self.forward(x, mode), np.asarray(labels))

    def parameters(self) -> List[Tuple[str, np.ndarray, Optional[np.ndarray]]]:
        return [
            (f"{layer.name}.{key}", value, layer.grads.get(key))
            for layer in self.layers
            for key, value in layer.params.items()
        ]

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Cópia de parâmetros + estatísticas do BatchNorm"""
        state = {}
        for layer in self.layers:
            for key, value in {**layer.params, **layer.buffers}.items():
                state[f"{layer.name}.{key}"] = value.copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        for layer in self.layers:
            for store in (layer.params, layer.buffers):
                for key in store:
                    name = f"{layer.name}.{key}"
                    if name not in state or state[name].shape != store[key].shape:
                        raise ShapeMismatch(f"Parâmetro ausente ou com forma diferente: {name}")
                    store[key][...] = state[name]


def model_forward(model: OsaNet, windows: np.ndarray, batch_size: Optional[int] = None) -> np.ndarray:
    """Probabilidades por classe em modo inferência (sem dropout, BN com estatísticas acumuladas)"""
    windows = np.asarray(windows)
    batch_size = batch_size or model.cfg.batch_size
    chunks = [
        softmax(model.forward(windows[start:start + batch_size], F.INFER), axis=1)
        for start in range(0, len(windows), batch_size)
    ]
    return np.concatenate(chunks, axis=0)


def _evaluate(model: OsaNet, x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    probs = model_forward(model, x)
    picked = np.clip(probs[np.arange(len(y)), y], 1e-300, None)
    return float(-np.log(picked).mean()), float((probs.argmax(axis=1) == y).mean())


def model_train(
    train_x: np.ndarray,
    train_y: Sequence[int],
    val_x: Optional[np.ndarray],
    val_y: Optional[Sequence[int]],
    cfg: ModelConfig,
) -> Tuple[OsaNet, List[Dict]]:
    """
    RMSProp sobre a entropia cruzada em mini-batches embaralhados. Ao fim de cada época
    mede a perda de validação; para após `patience` épocas sem melhora e devolve os
    parâmetros da melhor época. Sem validação, monitora a perda de treino.
    Rótulos: índices de classe (0 Normal, 1 Severe).
    """
    train_x = np.asarray(train_x, dtype=cfg.dtype)
    train_y = np.asarray(train_y, dtype=np.int64)
    if len(train_x) != len(train_y):
        raise ShapeMismatch(f"{len(train_x)} janelas e {len(train_y)} rótulos")
    has_val = val_x is not None and len(val_x) > 0
    if has_val:
        val_x = np.asarray(val_x, dtype=cfg.dtype)
        val_y = np.asarray(val_y, dtype=np.int64)

    model = OsaNet(cfg, train_x.shape[1])
    shuffle_seed = spawn_seeds(cfg.seed, 3)[2]
    shuffle_rng = np.random.default_rng(shuffle_seed)
    state = {name: np.zeros_like(value) for name, value, _ in model.parameters()}

    best_loss = np.inf
    best_state = model.state_dict()
    wait = 0
    history: List[Dict] = []
    n = len(train_x)

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            if len(batch) < 2 and n >= 2:
                # BatchNorm exige pelo menos 2 amostras em treino
                continue
            loss, dlogits = model.loss(train_x[batch], train_y[batch], F.TRAIN)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"Perda não finita ({loss}) na época {epoch}, batch iniciado em {start}")
            model.backward(dlogits)
            for name, param, grad in model.parameters():
                F.rmsprop_step(param, grad, state[name], cfg.learning_rate, cfg.rmsprop_rho, cfg.rmsprop_epsilon)
            losses.append(loss)

        train_loss = float(np.mean(losses))
        val_loss, val_acc = _evaluate(model, val_x, val_y) if has_val else (float("nan"), float("nan"))
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss, "val_acc": val_acc})

        monitored = val_loss if has_val else train_loss
        if not np.isfinite(monitored):
            raise NonFiniteLoss(f"Perda de validação não finita na época {epoch}")
        if monitored < best_loss:
            best_loss = monitored
            best_state = model.state_dict()
            wait = 0
        else:
            wait += 1
            if wait >= cfg.patience:
                logger.info(f"Early stopping na época {epoch} (melhor perda {best_loss:.4f})")
                break
        logger.debug(f"Época {epoch}: train_loss={train_loss:.4f} val_loss={val_loss:.4f} val_acc={val_acc:.3f}")

    model.load_state_dict(best_state)
    return model, history


# --- CHECAGEM DE GRADIENTE ---
def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / (||a|| + ||n||); gradientes ambos ~0 (ex.: viés antes do BatchNorm) contam como iguais"""
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom < 1e-8:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def numerical_gradient(loss_fn: Callable[[], float], param: np.ndarray, h: float = 1e-3, indices=None) -> np.ndarray:
    """Diferenças centrais de loss_fn em relação a `param` (alterado e restaurado no lugar)"""
    numeric = np.zeros_like(param)
    targets = indices if indices is not None else list(np.ndindex(param.shape))
    for idx in targets:
        old = param[idx]
        param[idx] = old + h
        plus = loss_fn()
        param[idx] = old - h
        minus = loss_fn()
        param[idx] = old
        numeric[idx] = (plus - minus) / (2.0 * h)
    return numeric


def gradient_check(
    loss_fn: Callable[[], float],
    param: np.ndarray,
    analytic: np.ndarray,
    h: float = 1e-3,
    max_checks: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Erro relativo entre o gradiente analítico e o numérico (amostra de até max_checks posições)"""
    indices = list(np.ndindex(param.shape))
    if max_checks is not None and len(indices) > max_checks:
        chosen = np.random.default_rng(seed).choice(len(indices), size=max_checks, replace=False)
        indices = [indices[i] for i in sorted(chosen)]
    numeric = numerical_gradient(loss_fn, param, h, indices)
    rows = tuple(np.array(axis) for axis in zip(*indices))
    return relative_error(np.asarray(analytic)[rows], numeric[rows])


# --- CHECKPOINT ---
def _sidecar_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def save_checkpoint(path: str, model: OsaNet):
    """Binário (tabela de formas + float64 little-endian) e JSON com o ModelConfig"""
    state = model.state_dict()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(_CKPT_HEAD.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(state)))
        for name, value in state.items():
            raw = name.encode("utf-8")
            f.write(struct.pack("<H", len(raw)) + raw)
            f.write(struct.pack("<B", value.ndim))
            f.write(struct.pack(f"<{value.ndim}I", *value.shape))
        for value in state.values():
            f.write(np.ascontiguousarray(value, dtype="<f8").tobytes())
    with open(_sidecar_path(path), "w", encoding="utf-8") as f:
        json.dump({
            "format_version": CHECKPOINT_VERSION,
            "input_length": model.input_length,
            "config": model.cfg.model_dump(),
        }, f, indent=1)


def load_checkpoint(path: str) -> OsaNet:
    with open(_sidecar_path(path), "r", encoding="utf-8") as f:
        meta = json.load(f)
    if meta.get("format_version") != CHECKPOINT_VERSION:
        raise InvalidConfig(f"Versão de checkpoint não suportada: {meta.get('format_version')}")
    model = OsaNet(ModelConfig(**meta["config"]), meta["input_length"])

    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < _CKPT_HEAD.size:
        raise TruncatedData(f"Checkpoint truncado: {path}")
    magic, version, count = _CKPT_HEAD.unpack_from(buf, 0)
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise MalformedHeader(f"{path} não é um checkpoint suportado")

    offset = _CKPT_HEAD.size
    table = []
    for _ in range(count):
        (size,) = struct.unpack_from("<H", buf, offset)
        offset += 2
        name = buf[offset:offset + size].decode("utf-8")
        offset += size
        (ndim,) = struct.unpack_from("<B", buf, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", buf, offset)
        offset += 4 * ndim
        table.append((name, shape))

    state = {}
    for name, shape in table:
        nbytes = 8 * int(np.prod(shape))
        if offset + nbytes > len(buf):
            raise TruncatedData(f"Checkpoint truncado em {name}")
        state[name] = np.frombuffer(buf[offset:offset + nbytes], dtype="<f8").reshape(shape)
        offset += nbytes
    model.load_state_dict(state)
    return model


def write_history(path: str, history: Sequence[Dict]):
    pd.DataFrame(list(history), columns=HISTORY_COLUMNS).to_csv(path, index=False)


def read_history(path: str) -> pd.DataFrame:
    return pd.read_csv(path)
