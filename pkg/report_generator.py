# report_generator.py

from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd

from file_utils import save_json

# ---------- Monte Carlo reports (CSV + JSON) ----------

MC_COLUMNS = ["eps", "m", "trials", "successes", "p_hat", "ci_low", "ci_high", "bound_value", "seed"]


def mc_frame(reports: Sequence[Any]) -> pd.DataFrame:
    """
    One row per McReport, columns in the fixed exchange order.
    """
    rows = [{col: getattr(r, col) for col in MC_COLUMNS} for r in reports]
    return pd.DataFrame(rows, columns=MC_COLUMNS)


def write_mc_csv(path: str | Path, reports: Sequence[Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mc_frame(reports).to_csv(path, index=False, lineterminator="\n")
    return path


def mc_document(reports: Sequence[Any], summary: Dict[str, Any] | None = None) -> Dict[str, Any]:
    """
    {"reports": [...McReport documents...], "summary": {...}}
    """
    return {
        "reports": [r.to_document() for r in reports],
        "summary": summary or {},
    }


def write_mc_json(path: str | Path, reports: Sequence[Any], summary: Dict[str, Any] | None = None) -> Path:
    return save_json(path, mc_document(reports, summary))


# ---------- Count tables ----------

COUNT_COLUMNS = ["eps", "m", "energy", "count", "at_least_m"]


def count_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=COUNT_COLUMNS)
    frame["at_least_m"] = frame["at_least_m"].astype(int)
    return frame


def write_count_csv(path: str | Path, rows: List[Dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count_frame(rows).to_csv(path, index=False, lineterminator="\n")
    return path


# ---------- Property suite table ----------

VERIFY_COLUMNS = ["property", "group", "status", "checked", "violations", "worst_margin"]


def verify_frame(results: Sequence[Any]) -> pd.DataFrame:
    rows = [
        {
            "property": r.name,
            "group": r.group,
            "status": "PASS" if r.passed else "FAIL",
            "checked": r.checked,
            "violations": r.violations,
            "worst_margin": r.worst_margin,
        }
        for r in results
    ]
    return pd.DataFrame(rows, columns=VERIFY_COLUMNS)


def render_verify_table(results: Sequence[Any]) -> str:
    return verify_frame(results).to_string(index=False, float_format=lambda x: f"{x:.3e}")
