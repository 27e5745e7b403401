# src/services/results_store.py
"""Persist sweep results: samples CSV, JSON summary and decay plots."""
import json
import logging
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from config.settings import OUTPUT_DIR, SVG_TIMESTAMP  # noqa: E402
from src.services.verification_harness import DecayFit, OracleReport, SweepResult  # noqa: E402

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["name", "case", "j", "k", "beta", "N", "h", "norm_u", "norm_Pu", "ratio"]


class ResultsStore:
    """Writes one run's artifacts into an output directory."""

    def __init__(self, output_dir: Union[str, Path] = OUTPUT_DIR, timestamp: bool = SVG_TIMESTAMP):
        self.output_dir = Path(output_dir)
        self.timestamp = timestamp

    def samples_frame(self, result: SweepResult, name: str) -> pd.DataFrame:
        """One row per sample; failed samples keep NaN norms and carry their error."""
        spec = result.config.spec
        rows = []
        for sample in result.samples:
            rows.append({
                "name": name,
                "case": spec.case.value,
                "j": spec.j,
                "k": spec.k,
                "beta": str(result.config.recipe.params.beta),
                "N": sample.n_terms,
                "h": sample.h,
                "norm_u": sample.norm_u,
                "norm_Pu": sample.norm_pu,
                "ratio": sample.ratio,
                "path": sample.path.value,
                "error": sample.error or "",
            })
        return pd.DataFrame(rows, columns=SAMPLE_COLUMNS + ["path", "error"])

    def summary(
        self,
        result: SweepResult,
        name: str,
        resolved_config: Dict[str, Any],
        oracle: Optional[OracleReport] = None,
        condition: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """Verdict, fits and provenance; oracle notes are repeated under deviations."""
        verdict = result.verdict
        snapped = sorted({s.kappa_snapped for s in result.samples if s.kappa_snapped is not None})
        return {
            "name": name,
            "case": result.config.spec.case.value,
            "condition": condition,
            "verdict": verdict.kind.value,
            "reason": verdict.reason,
            "slope_by_N": {str(n): slope for n, slope in verdict.slope_by_n.items()},
            "gains": verdict.gains,
            "fits": [_fit_record(fit) for fit in result.fits],
            "thresholds": asdict(result.config.thresholds),
            "snapped_frequencies": snapped,
            "failed_samples": sum(not s.ok for s in result.samples),
            "config": resolved_config,
            "oracle": asdict(oracle) if oracle is not None else None,
            "seed": oracle.seed if oracle is not None else None,
            "deviations": list(oracle.notes) if oracle is not None else [],
        }

    def write(
        self,
        result: SweepResult,
        name: str,
        resolved_config: Dict[str, Any],
        oracle: Optional[OracleReport] = None,
        condition: Optional[Dict[str, Any]] = None,
    ) -> List[Path]:
        """
        Write <name>_samples.csv, <name>_summary.json and one SVG per fit.

        Returns:
            Paths of every written file, CSV and JSON first.
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        csv_path = self.output_dir / f"{name}_samples.csv"
        self.samples_frame(result, name).to_csv(csv_path, index=False, float_format="%.12e")

        json_path = self.output_dir / f"{name}_summary.json"
        summary = self.summary(result, name, resolved_config, oracle, condition)
        json_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")

        written = [csv_path, json_path]
        for fit in result.fits:
            written.append(self.plot_fit(fit, name))
        logger.info(f"Wrote {len(written)} files to {self.output_dir}")
        return written

    def plot_fit(self, fit: DecayFit, name: str) -> Path:
        """Log-log ratio against h with the fitted line."""
        path_label = fit.path.value if fit.path is not None else "fit"
        svg_path = self.output_dir / f"{name}_{path_label}_N{fit.n_terms}.svg"

        hs = np.array([h for h, _ in fit.samples])
        ratios = np.array([r for _, r in fit.samples])
        fitted = np.exp(fit.intercept) * hs ** fit.slope

        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(hs, ratios, "o", label="measured")
        ax.loglog(hs, fitted, "-", label=f"slope {fit.slope:.3f}")
        ax.set_xlabel("h")
        ax.set_ylabel("||P u|| / ||u||")
        ax.set_title(f"{name}, {path_label}, N={fit.n_terms}")
        ax.legend()
        fig.tight_layout()

        with plt.rc_context({"svg.hashsalt": name}):
            fig.savefig(svg_path, format="svg", metadata={"Date": self._date()})
        plt.close(fig)
        return svg_path

    def _date(self) -> Optional[str]:
        if not self.timestamp:
            return None
        return datetime.now(timezone.utc).isoformat()


def _fit_record(fit: DecayFit) -> Dict[str, Any]:
    return {
        "N": fit.n_terms,
        "path": fit.path.value if fit.path is not None else None,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "max_residual": fit.max_residual,
        "reliable": fit.reliable,
        "samples": len(fit.samples),
    }
