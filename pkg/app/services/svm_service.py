"""
SVM Service - baseline sobre as features HRV/EDR (libsvm/SMO via scikit-learn)
"""
import json
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics.pairwise import linear_kernel, rbf_kernel
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC

from app.core.exceptions import (
    DimensionMismatch,
    EmptyFeatureSpace,
    EmptyTrainingSet,
    InvalidConfig,
    NonFiniteFeature,
    SingleClassData,
)
from app.models.classifiers import SVM_FORMAT_VERSION, Standardizer, SvmModel
from app.models.features import FEATURE_NAMES, FeatureVector
from app.models.signals import SeverityLabel

logger = logging.getLogger(__name__)

VectorLike = Union[FeatureVector, Sequence[float], np.ndarray]


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.atleast_2d(vectors.astype(np.float64))
    rows = [v.to_array() if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64) for v in vectors]
    return np.vstack(rows) if rows else np.empty((0, len(FEATURE_NAMES)))


def standardize_fit(train, feature_names: Optional[List[str]] = None) -> Standardizer:
    """Média/desvio (populacional) por feature; variância nula -> feature descartada com aviso"""
    X = _as_matrix(train)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("Conjunto de treino vazio")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("Feature não finita no treino")
    names = feature_names or (FEATURE_NAMES if X.shape[1] == len(FEATURE_NAMES) else [f"f{i}" for i in range(X.shape[1])])

    scaler = StandardScaler().fit(X)
    keep = scaler.var_ > 0.0
    dropped = [name for name, k in zip(names, keep) if not k]
    if dropped:
        logger.warning(f"Features com variância nula descartadas: {dropped}")
    if not keep.any():
        raise EmptyFeatureSpace("Todas as features têm variância nula")

    return Standardizer(
        feature_names=list(names),
        keep=[bool(k) for k in keep],
        mean=[float(m) for m in scaler.mean_[keep]],
        scale=[float(s) for s in np.sqrt(scaler.var_[keep])],
    )


def standardize_apply(s: Standardizer, v) -> np.ndarray:
    """Aplica o Standardizer a um vetor (1-D) ou a uma matriz (linhas)"""
    single = isinstance(v, FeatureVector) or np.ndim(v) == 1
    X = _as_matrix([v] if single else v)
    if X.shape[1] != len(s.keep):
        raise DimensionMismatch(f"Vetor com {X.shape[1]} features, esperado {len(s.keep)}")
    Z = (X[:, np.array(s.keep)] - np.array(s.mean)) / np.array(s.scale)
    return Z[0] if single else Z


def default_gamma(X: np.ndarray) -> float:
    """1 / (n_features · variância média das features)"""
    variance = float(np.mean(np.var(X, axis=0)))
    return 1.0 / (X.shape[1] * variance) if variance > 0 else 1.0


def _kernel_matrix(model: SvmModel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if model.kernel == "linear":
        return linear_kernel(A, B)
    return rbf_kernel(A, B, gamma=model.gamma)


def svm_train(
    X,
    y: Sequence[int],
    kernel: str = "rbf",
    C: float = 1.0,
    tol: float = 1e-3,
    seed: int = 0,
    gamma: Union[float, str, None] = "auto",
) -> SvmModel:
    """
    Otimização dual SMO (libsvm) até violação KKT <= tol. As linhas são postas em ordem
    canônica antes do ajuste, então permutar as amostras não muda o modelo.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} amostras e {y.shape[0]} rótulos")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("Feature não finita no treino")
    if set(np.unique(y)) != {-1, 1}:
        raise SingleClassData(f"Treino exige as duas classes (-1, +1), recebido {sorted(set(y.tolist()))}")
    if kernel not in ("rbf", "linear"):
        raise InvalidConfig(f"Kernel não suportado: {kernel}")

    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    X, y = X[order], y[order]

    if kernel == "rbf":
        gamma_value = default_gamma(X) if gamma in (None, "auto") else float(gamma)
        clf = SVC(kernel="rbf", C=C, gamma=gamma_value, tol=tol, random_state=seed, shrinking=False)
    else:
        gamma_value = None
        clf = SVC(kernel="linear", C=C, tol=tol, random_state=seed, shrinking=False)
    clf.fit(X, y)

    model = SvmModel(
        kernel=kernel,
        C=C,
        gamma=gamma_value,
        tol=tol,
        support_vectors=clf.support_vectors_.tolist(),
        dual_coef=clf.dual_coef_[0].tolist(),
        bias=float(clf.intercept_[0]),
    )
    logger.info(f"SVM treinado: {len(model.dual_coef)} vetores de suporte, kernel={kernel}, C={C}")
    return model


def decision_values(model: SvmModel, X) -> np.ndarray:
    """Σ α_i y_i K(x_i, x) + b para cada linha de X"""
    X = _as_matrix(X)
    sv = np.asarray(model.support_vectors, dtype=np.float64)
    if X.shape[1] != sv.shape[1]:
        raise DimensionMismatch(f"Vetor com {X.shape[1]} features, modelo com {sv.shape[1]}")
    return _kernel_matrix(model, X, sv) @ np.asarray(model.dual_coef) + model.bias


def svm_predict(model: SvmModel, v: VectorLike) -> Tuple[SeverityLabel, float]:
    """Rótulo pelo sinal da função de decisão (v já padronizado)"""
    value = float(decision_values(model, [np.asarray(v.to_array() if isinstance(v, FeatureVector) else v)])[0])
    return (SeverityLabel.SEVERE if value > 0 else SeverityLabel.NORMAL), value


def dual_objective(model: SvmModel) -> float:
    """½ Σ_ij (α_i y_i)(α_j y_j) K_ij - Σ α_i (objetivo dual minimizado)"""
    sv = np.asarray(model.support_vectors, dtype=np.float64)
    coef = np.asarray(model.dual_coef)
    K = _kernel_matrix(model, sv, sv)
    return float(0.5 * coef @ K @ coef - np.abs(coef).sum())


def save_model(path: str, model: SvmModel):
    with open(path, "w", encoding="utf-8") as f:
        f.write(model.model_dump_json(indent=1))


def load_model(path: str) -> SvmModel:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if data.get("format_version") != SVM_FORMAT_VERSION:
        raise InvalidConfig(f"Versão de modelo SVM não suportada: {data.get('format_version')}")
    return SvmModel(**data)


class SvmClassifier:
    """Standardizer + SVM, como usado em cada fold"""

    def __init__(self, kernel: str = "rbf", C: float = 1.0, tol: float = 1e-3, gamma="auto", seed: int = 0):
        self.kernel = kernel
        self.C = C
        self.tol = tol
        self.gamma = gamma
        self.seed = seed
        self.model: Optional[SvmModel] = None

    def fit(self, X, labels: Sequence[SeverityLabel]) -> SvmModel:
        standardizer = standardize_fit(X)
        Z = standardize_apply(standardizer, _as_matrix(X))
        y = [label.target for label in labels]
        self.model = svm_train(Z, y, kernel=self.kernel, C=self.C, tol=self.tol, seed=self.seed, gamma=self.gamma)
        self.model.standardizer = standardizer
        return self.model

    def predict(self, X) -> Tuple[List[SeverityLabel], np.ndarray]:
        if self.model is None or self.model.standardizer is None:
            raise InvalidConfig("Modelo SVM não treinado")
        values = decision_values(self.model, standardize_apply(self.model.standardizer, _as_matrix(X)))
        labels = [SeverityLabel.SEVERE if value > 0 else SeverityLabel.NORMAL for value in values]
        return labels, values
