"""
Command line interface: synth, preprocess, features, crossval, report, published

Exit codes: 0 sucesso, 1 uso, 2 dados, 3 falha numérica.
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.core.config import load_settings
from app.core.exceptions import OsaKitError, UsageError
from app.core.utils import configure_logging
from app.use_cases.extract_features import ExtractFeaturesUseCase
from app.use_cases.preprocess_cohort import PreprocessCohortUseCase
from app.use_cases.render_report import RenderReportUseCase
from app.use_cases.reproduce_published import ReproducePublishedUseCase
from app.use_cases.run_experiment import MODELS, RunExperimentUseCase
from app.use_cases.synthesize_cohort import SynthesizeCohortUseCase

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Erros de argumento viram UsageError (código 1) em vez de sair com 2"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="osakit", description="Classificação de severidade de apneia obstrutiva a partir do ECG")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING...")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="gera uma coorte sintética (EDF + XML)")
    p.add_argument("--subjects-normal", type=int, required=True)
    p.add_argument("--subjects-severe", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float, default=1200.0, help="segundos por sujeito")
    p.add_argument("--sampling-rate", type=float, default=512.0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("preprocess", help="filtra o ECG e extrai as janelas de evento")
    p.add_argument("--in", dest="cohort", required=True, help="diretório ou manifesto da coorte")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)

    p = sub.add_parser("features", help="features HRV/EDR de cada janela")
    p.add_argument("--windows", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)

    p = sub.add_parser("crossval", help="validação cruzada SVM vs DL")
    p.add_argument("--windows", required=True)
    p.add_argument("--model", choices=sorted(MODELS), default="both")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="mostra o relatório de uma execução")
    p.add_argument("--run", required=True)
    p.add_argument("--csv", action="store_true", help="imprime o CSV em vez da tabela")

    sub.add_parser("published", help="recompõe a tabela publicada por fold")
    return parser


def run(args: argparse.Namespace) -> dict:
    if args.command == "synth":
        return SynthesizeCohortUseCase().execute(
            args.out, args.subjects_normal, args.subjects_severe, args.seed,
            args.duration, args.sampling_rate, args.workers,
        )
    if args.command == "preprocess":
        return PreprocessCohortUseCase(load_settings(args.config)).execute(args.cohort, args.out)
    if args.command == "features":
        return ExtractFeaturesUseCase(load_settings(args.config)).execute(args.windows, args.out)
    if args.command == "crossval":
        settings = load_settings(args.config, seed=args.seed)
        return RunExperimentUseCase(settings).execute(args.windows, args.out, args.model)
    if args.command == "report":
        result = RenderReportUseCase().execute(args.run)
        return {**result, "text": result["csv"] if args.csv else result["text"]}
    return ReproducePublishedUseCase().execute()


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        result = run(args)
    except OsaKitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"erro: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code

    if "text" in result:
        sys.stdout.write(result["text"])
    else:
        print(", ".join(f"{key}={value}" for key, value in result.items()))
    return 0
