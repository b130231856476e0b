# mc_report.py
#
# Relatório PDF de uma corrida: parâmetros, extremos, restrições,
# diagnósticos do MC e comparação com a densidade analítica.

from __future__ import annotations

import io
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from coulomb_mc import ComparisonMetrics, MCResult
from density_quadrature import ConstraintReport


# ----------------------------------------------------------------------
# Labels por idioma
# ----------------------------------------------------------------------

REPORT_LABELS: Dict[str, Dict[str, str]] = {
    "pt": {
        "title": "Fluido de Coulomb com polo singular",
        "params": "Parâmetros",
        "support": "Suporte analítico",
        "alpha": "Coeficientes alfa",
        "constraints": "Restrições da densidade",
        "mc": "Diagnósticos do Monte Carlo",
        "comparison": "Comparação com a densidade analítica",
        "bins": "Densidade por bin",
        "quantity": "Grandeza",
        "value": "Valor",
        "cut": "Corte",
        "empirical": "Empírica",
        "analytic": "Analítica",
        "center": "Centro do bin",
        "no_solution": "Sem solução analítica para estes parâmetros.",
        "warning_support": "Aviso: mais de 1% das amostras fora do suporte.",
    },
    "en": {
        "title": "Coulomb fluid with a singular pole",
        "params": "Parameters",
        "support": "Analytic support",
        "alpha": "Alpha coefficients",
        "constraints": "Density constraints",
        "mc": "Monte Carlo diagnostics",
        "comparison": "Comparison with the analytic density",
        "bins": "Density per bin",
        "quantity": "Quantity",
        "value": "Value",
        "cut": "Cut",
        "empirical": "Empirical",
        "analytic": "Analytic",
        "center": "Bin centre",
        "no_solution": "No analytic solution for these parameters.",
        "warning_support": "Warning: more than 1% of the samples outside the support.",
    },
}

HEADER_STYLE = TableStyle(
    [
        ("BACKGROUND", (0, 0), (-1, 0), colors.lightgrey),
        ("TEXTCOLOR", (0, 0), (-1, 0), colors.black),
        ("GRID", (0, 0), (-1, -1), 0.25, colors.grey),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("ALIGN", (1, 1), (-1, -1), "RIGHT"),
    ]
)


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{v:.6g}"
    return str(v)


def _kv_table(header: Sequence[str], rows: Dict[str, Any]) -> Table:
    data: List[List[str]] = [list(header)]
    data += [[k, _fmt(v)] for k, v in rows.items()]
    t = Table(data, hAlign="LEFT")
    t.setStyle(HEADER_STYLE)
    return t


def build_bin_rows(result: MCResult, density, max_rows: int = 60) -> List[List[str]]:
    """Linhas (centro, empírica, analítica); sub-amostra se houver muitos bins."""
    hist = result.histogram
    centers = hist.centers
    emp = hist.density()
    step = max(1, int(np.ceil(centers.size / max_rows)))
    rows = []
    for k in range(0, centers.size, step):
        ana = float(density(centers[k])) if density is not None else float("nan")
        rows.append([f"{centers[k]:.4f}", f"{emp[k]:.5f}", f"{ana:.5f}"])
    return rows


def generate_pdf_report(
    result: MCResult,
    metrics: Optional[ComparisonMetrics],
    solution=None,
    constraints: Optional[ConstraintReport] = None,
    lang: str = "pt",
) -> bytes:
    """Gera o PDF em memória e devolve os bytes."""
    labels = REPORT_LABELS.get(lang, REPORT_LABELS["pt"])
    cfg = result.config

    buffer = io.BytesIO()
    doc = SimpleDocTemplate(
        buffer,
        pagesize=A4,
        leftMargin=2 * cm,
        rightMargin=2 * cm,
        topMargin=2 * cm,
        bottomMargin=2 * cm,
    )
    styles = getSampleStyleSheet()
    normal = styles["Normal"]
    heading = styles["Heading2"]
    head = [labels["quantity"], labels["value"]]
    story = [Paragraph(labels["title"], styles["Title"]), Spacer(1, 0.5 * cm)]

    # --------------------------------------------------
    # 1. Parâmetros e solução analítica
    # --------------------------------------------------
    story.append(Paragraph(labels["params"], heading))
    story.append(_kv_table(head, {
        "N": cfg.N, "a": cfg.a, "A": cfg.A, "m": cfg.m, "beta_D": cfg.beta_D,
        "seed": cfg.seed, "sweeps": cfg.sweeps, "burn_in": cfg.burn_in,
        "energy_scaling": cfg.energy_scaling,
    }))
    story.append(Spacer(1, 0.5 * cm))

    story.append(Paragraph(labels["support"], heading))
    if solution is None:
        story.append(Paragraph(labels["no_solution"], normal))
    else:
        cuts = {f"{labels['cut']} {k + 1}": f"[{lo:.10f}, {hi:.10f}]" for k, (lo, hi) in enumerate(solution.cuts)}
        story.append(_kv_table(head, cuts))
        alpha = getattr(solution, "alpha", None)
        if alpha is not None:
            story.append(Spacer(1, 0.3 * cm))
            story.append(Paragraph(labels["alpha"], styles["Heading3"]))
            story.append(_kv_table(head, {f"alpha_{j}": float(v) for j, v in enumerate(alpha)}))
    story.append(Spacer(1, 0.5 * cm))

    if constraints is not None:
        story.append(Paragraph(labels["constraints"], heading))
        story.append(_kv_table(head, constraints.as_row()))
        story.append(Spacer(1, 0.5 * cm))

    # --------------------------------------------------
    # 2. Diagnósticos do MC
    # --------------------------------------------------
    story.append(Paragraph(labels["mc"], heading))
    diag = result.diagnostics()
    flat = {
        "acceptance": diag["acceptance"],
        "epsilon_final": diag["epsilon_final"],
        "E mean": diag["energy_trace_summary"]["mean"],
        "E std": diag["energy_trace_summary"]["std"],
        "N_l mean": diag["n_left_trace_summary"]["mean"],
        "max_energy_drift": diag["max_energy_drift"],
        "max_sum_error": diag["max_sum_error"],
    }
    story.append(_kv_table(head, flat))
    story.append(Spacer(1, 0.5 * cm))

    # --------------------------------------------------
    # 3. Comparação
    # --------------------------------------------------
    if metrics is not None:
        story.append(Paragraph(labels["comparison"], heading))
        story.append(_kv_table(head, {"L1": metrics.l1, "sup": metrics.sup_norm,
                                      "outside_fraction": metrics.outside_fraction}))
        if metrics.cut_mass_analytic:
            rows = [[labels["cut"], labels["empirical"], labels["analytic"]]]
            for k, (e, a) in enumerate(zip(metrics.cut_mass_empirical, metrics.cut_mass_analytic)):
                rows.append([str(k + 1), f"{e:.5f}", f"{a:.5f}"])
            t = Table(rows, hAlign="LEFT")
            t.setStyle(HEADER_STYLE)
            story.append(Spacer(1, 0.3 * cm))
            story.append(t)
        if metrics.support_mismatch:
            story.append(Paragraph(labels["warning_support"], normal))
        story.append(Spacer(1, 0.5 * cm))

    story.append(Paragraph(labels["bins"], heading))
    density = solution.density if solution is not None else None
    rows = [[labels["center"], labels["empirical"], labels["analytic"]]] + build_bin_rows(result, density)
    t = Table(rows, hAlign="LEFT")
    t.setStyle(HEADER_STYLE)
    story.append(t)

    doc.build(story)
    pdf_bytes = buffer.getvalue()
    buffer.close()
    return pdf_bytes
