"""
Fold Service - seleção balanceada de janelas e k-fold estratificado (treino/validação/teste)
"""
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.core.exceptions import InsufficientSamples, TooFewSamples
from app.models.evaluation import FoldPlan
from app.models.signals import SeverityLabel
from app.models.windows import EventWindow

logger = logging.getLogger(__name__)

CLASS_ORDER = [SeverityLabel.NORMAL, SeverityLabel.SEVERE]


def select_samples(windows: Sequence[EventWindow], per_class: int, seed: int = 0) -> List[EventWindow]:
    """Sorteio sem reposição de `per_class` janelas de cada classe (ordem original preservada)"""
    rng = np.random.default_rng(seed)
    selected: List[EventWindow] = []
    for label in CLASS_ORDER:
        pool = [w for w in windows if w.label == label]
        if len(pool) < per_class:
            raise InsufficientSamples(f"{label.value}: {len(pool)} janelas, necessárias {per_class}")
        chosen = np.sort(rng.choice(len(pool), size=per_class, replace=False))
        selected.extend(pool[i] for i in chosen)
        logger.info(f"{label.value}: {per_class} de {len(pool)} janelas selecionadas")
    return selected


def make_folds(
    items: Sequence[Tuple[str, SeverityLabel]],
    k: int = 10,
    seed: int = 0,
    val_fraction: float = 0.1,
) -> List[FoldPlan]:
    """
    Cada classe é embaralhada e dividida em k partes (o resto vai para as primeiras partes).
    Fold i: teste = parte i de cada classe; validação = sorteio por classe no restante
    (round(n_classe · val_fraction), mínimo 1); treino = o que sobra.
    """
    if k < 2:
        raise TooFewSamples(f"k deve ser pelo menos 2, recebido {k}")
    rng = np.random.default_rng(seed)

    by_class: Dict[SeverityLabel, List[str]] = {label: [] for label in CLASS_ORDER}
    for item_id, label in items:
        by_class[SeverityLabel(label)].append(item_id)

    parts: Dict[SeverityLabel, List[np.ndarray]] = {}
    val_sizes: Dict[SeverityLabel, int] = {}
    for label, ids in by_class.items():
        if len(ids) < k:
            raise TooFewSamples(f"{label.value}: {len(ids)} amostras para {k} folds")
        n_val = max(1, int(round(len(ids) * val_fraction)))
        if len(ids) - int(np.ceil(len(ids) / k)) - n_val < 1:
            raise TooFewSamples(f"{label.value}: {len(ids)} amostras não deixam treino em cada fold")
        shuffled = np.array(ids, dtype=object)[rng.permutation(len(ids))]
        parts[label] = np.array_split(shuffled, k)
        val_sizes[label] = n_val

    plans = []
    for fold in range(k):
        test_ids, val_ids, train_ids = [], [], []
        for label in CLASS_ORDER:
            rest = np.concatenate([part for i, part in enumerate(parts[label]) if i != fold])
            picked = rng.permutation(len(rest))
            val_ids.extend(rest[picked[:val_sizes[label]]].tolist())
            train_ids.extend(rest[picked[val_sizes[label]:]].tolist())
            test_ids.extend(parts[label][fold].tolist())
        plans.append(FoldPlan(fold_index=fold + 1, test_ids=test_ids, val_ids=val_ids, train_ids=train_ids))
    return plans
