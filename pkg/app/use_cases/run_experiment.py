"""
Run Experiment Use Case - validação cruzada SVM vs DL com splits idênticos
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence

import numpy as np

from app.core.config import Settings
from app.core.exceptions import InvalidConfig
from app.core.utils import spawn_seeds
from app.models.classifiers import ModelConfig
from app.models.evaluation import FoldPlan, MetricsRow
from app.models.features import FeatureVector
from app.models.signals import SeverityLabel
from app.models.windows import EventWindow
from app.services import run_store
from app.services.fold_service import make_folds, select_samples
from app.services.hrv_service import extract_features
from app.services.metrics_service import (
    build_report,
    confusion_from_predictions,
    metrics_from_confusion,
    render_report,
)
from app.services.nn_model import model_forward, model_train, save_checkpoint, write_history
from app.services.svm_service import SvmClassifier, save_model
from app.services.window_store import read_window_store

logger = logging.getLogger(__name__)

MODELS = {"svm": ["SVM"], "dl": ["DL"], "both": ["SVM", "DL"]}


def _class_index(label: SeverityLabel) -> int:
    return 1 if label is SeverityLabel.SEVERE else 0


class RunExperimentUseCase:
    """Use case para o experimento completo: seleção, folds, treino, avaliação e relatório"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def _train_svm(self, plan: FoldPlan, seed: int, out_dir: str,
                   windows: Dict[str, EventWindow], features: Dict[str, FeatureVector]) -> MetricsRow:
        s = self.settings
        clf = SvmClassifier(kernel=s.svm_kernel, C=s.svm_c, tol=s.svm_tol, gamma=s.svm_gamma, seed=seed)
        model = clf.fit([features[i] for i in plan.train_ids], [windows[i].label for i in plan.train_ids])
        save_model(os.path.join(out_dir, "svm_model.json"), model)
        predicted, _ = clf.predict([features[i] for i in plan.test_ids])
        cm = confusion_from_predictions([windows[i].label for i in plan.test_ids], predicted)
        return metrics_from_confusion(cm)

    def _train_dl(self, plan: FoldPlan, seed: int, out_dir: str, windows: Dict[str, EventWindow]) -> MetricsRow:
        cfg = ModelConfig(**{**self.settings.model_settings(), "seed": seed})

        def arrays(ids: Sequence[str]):
            x = np.stack([windows[i].samples for i in ids]) if ids else np.empty((0, 0))
            return x, np.array([_class_index(windows[i].label) for i in ids], dtype=np.int64)

        train_x, train_y = arrays(plan.train_ids)
        val_x, val_y = arrays(plan.val_ids)
        model, history = model_train(train_x, train_y, val_x, val_y, cfg)
        save_checkpoint(os.path.join(out_dir, "dl_model.bin"), model)
        write_history(os.path.join(out_dir, "history.csv"), history)

        test_x, _ = arrays(plan.test_ids)
        probs = model_forward(model, test_x)
        predicted = [SeverityLabel.SEVERE if p[1] > p[0] else SeverityLabel.NORMAL for p in probs]
        cm = confusion_from_predictions([windows[i].label for i in plan.test_ids], predicted)
        return metrics_from_confusion(cm)

    def _run_fold(self, plan: FoldPlan, seed: int, run_dir: str, classifiers: List[str],
                  windows: Dict[str, EventWindow], features: Dict[str, FeatureVector]) -> Dict[str, MetricsRow]:
        out_dir = run_store.fold_dir(run_dir, plan.fold_index)
        run_store.write_json(os.path.join(out_dir, "plan.json"), plan.model_dump())
        results = {}
        if "SVM" in classifiers:
            results["SVM"] = self._train_svm(plan, seed, out_dir, windows, features)
        if "DL" in classifiers:
            results["DL"] = self._train_dl(plan, seed, out_dir, windows)
        run_store.write_json(os.path.join(out_dir, "metrics.json"), {k: v.model_dump() for k, v in results.items()})
        logger.info(
            f"Fold {plan.fold_index}: "
            + ", ".join(f"{name} acc={row.accuracy:.2f}" for name, row in results.items())
        )
        return results

    def execute(self, windows_path: str, run_dir: str, model: str = "both") -> dict:
        """
        Returns:
            dict: {"status": "ok", "run_dir": str, "report": ReportTable, "text": str}
        """
        if model not in MODELS:
            raise InvalidConfig(f"Modelo desconhecido: {model} (svm, dl ou both)")
        classifiers = MODELS[model]
        s = self.settings
        os.makedirs(run_dir, exist_ok=True)
        run_store.write_json(os.path.join(run_dir, "config.json"), {"model": model, **s.model_dump()})
        completed: List[int] = []

        try:
            pool = read_window_store(windows_path)
            # só janelas com features válidas entram, para que SVM e DL usem os mesmos splits
            rows, rejected = extract_features(pool, s.pnn50_absolute, **s.detector_settings())
            logger.info(f"{len(rows)} janelas elegíveis, {len(rejected)} rejeitadas na extração de features")
            features = {window.window_id: vector for window, vector in rows}
            selected = select_samples([window for window, _ in rows], s.samples_per_class, s.seed)
            windows = {w.window_id: w for w in selected}
            run_store.write_json(os.path.join(run_dir, "selection.json"), sorted(windows))

            plans = make_folds([(w.window_id, w.label) for w in selected], s.folds, s.seed, s.val_fraction)
            seeds = spawn_seeds(s.seed, len(plans))

            def job(args):
                plan, seed = args
                result = self._run_fold(plan, seed, run_dir, classifiers, windows, features)
                completed.append(plan.fold_index)
                return result

            if s.fold_workers > 1:
                with ThreadPoolExecutor(max_workers=s.fold_workers) as executor:
                    results = list(executor.map(job, zip(plans, seeds)))
            else:
                results = [job(args) for args in zip(plans, seeds)]

            table = build_report({name: [r[name] for r in results] for name in classifiers})
            rendered = render_report(table)
            run_store.save_report(run_dir, table, rendered.text, rendered.csv, rendered.boxplot)
        except Exception as e:
            # qualquer falha deixa o marcador; o código de saída continua vindo de OsaKitError
            logger.error(f"Experimento interrompido: {e}", exc_info=True)
            run_store.mark_failed(run_dir, e, completed)
            raise

        return {"status": "ok", "run_dir": run_dir, "report": table, "text": rendered.text}
