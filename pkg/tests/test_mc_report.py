import pytest

from coulomb_mc import MCConfig, compare, run
from density_quadrature import constraint_report
from mc_report import REPORT_LABELS, build_bin_rows, generate_pdf_report
from one_cut_analysis import OneCutSolution


@pytest.fixture(scope="module")
def small_run():
    return run(MCConfig(N=6, a=3.0, A=0.0, sweeps=300, burn_in=50, n_bins=150))


def test_labels_have_same_keys():
    assert set(REPORT_LABELS["pt"]) == set(REPORT_LABELS["en"])


def test_bin_rows_are_subsampled(small_run):
    sc = OneCutSolution.semicircle(3.0)
    rows = build_bin_rows(small_run, sc.density, max_rows=60)
    assert 1 <= len(rows) <= 60
    assert all(len(r) == 3 for r in rows)
    assert build_bin_rows(small_run, None)[0][2] == "nan"


@pytest.mark.parametrize("lang", ["pt", "en"])
def test_pdf_with_solution(small_run, lang):
    sc = OneCutSolution.semicircle(3.0)
    metrics = compare(small_run.histogram, sc.density, sc.cuts)
    pdf = generate_pdf_report(small_run, metrics, sc, constraint_report(sc), lang=lang)
    assert pdf.startswith(b"%PDF")


def test_pdf_without_solution(small_run):
    pdf = generate_pdf_report(small_run, None)
    assert pdf.startswith(b"%PDF")
