"""
Reproduce Published Use Case
"""
import logging

from app.core.published_results import PUBLISHED_T_STATISTIC
from app.services.metrics_service import build_report, check_published_rows, published_rows, render_report

logger = logging.getLogger(__name__)


class ReproducePublishedUseCase:
    """Use case para recompor a tabela publicada por fold: matrizes, agregados, teste t e boxplots"""

    def execute(self) -> dict:
        """
        Returns:
            dict: {"status": "ok", "text": str, "checks": list, "report": ReportTable, "boxplot": dict}
        """
        checks = check_published_rows()
        table = build_report(published_rows())
        rendered = render_report(table)

        lines = [rendered.text, "Row check (recomputed from sensitivity/specificity and class sizes):"]
        for check in checks:
            cm = check.confusion
            status = "ok" if check.consistent else "MISMATCH"
            line = (
                f"  {check.classifier:>3} fold {check.fold:>2}: tp={cm.tp} fn={cm.fn} tn={cm.tn} fp={cm.fp}"
                f" acc {check.recomputed.accuracy:6.2f} (printed {check.published.accuracy:6.2f})"
                f" F {check.recomputed.f_score:6.2f} (printed {check.published.f_score:6.2f}) {status}"
            )
            if check.implied_sensitivity is not None:
                line += f", sensitivity implied by acc and F: {check.implied_sensitivity:.2f}"
            lines.append(line)

        if table.t_test is not None:
            lines.append(
                f"Printed t statistic {PUBLISHED_T_STATISTIC} vs computed t({table.t_test.df}) = {table.t_test.t:.4f}"
            )
        for name, summary in rendered.boxplot.items():
            lines.append(
                f"Boxplot {name}: min {summary.min:.2f}, Q1 {summary.q1:.2f}, median {summary.median:.2f},"
                f" Q3 {summary.q3:.2f}, max {summary.max:.2f}"
            )

        mismatches = [c for c in checks if not c.consistent]
        logger.info(f"{len(checks) - len(mismatches)} de {len(checks)} linhas publicadas recompostas")
        return {
            "status": "ok",
            "text": "\n".join(lines) + "\n",
            "checks": checks,
            "report": table,
            "boxplot": rendered.boxplot,
        }
