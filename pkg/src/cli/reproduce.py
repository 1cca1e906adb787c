"""
One-command reproduction of the worked examples.

Each example writes its reports and CSVs into the output directory plus a
``manifest.json`` comparing produced numbers with expected values.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import stats

from src.conflict import (
    SCHEMA_VERSION, conflict_p_value, em_p_value, exact_tail_p_value, hierarchical_p1,
    hierarchical_p2, minimising_t, p_value_curve, per_unit_reports, reports_to_frame,
    tail_p_value_monte_carlo,
)
from src.core.errors import ValidationError
from src.core.rng import make_rng
from src.divergence.order import KL, MR, DivergenceOrder
from src.export import write_curve, write_unit_table
from src.models.catalog import (
    BetaBinomialModel, BinomialModel, LogisticRandomEffectsModel, NormalInverseGammaModel,
    NormalLocationModel,
)
from src.models.dataset import Dataset

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parents[2] / "data"

EXAMPLE5_PRIOR_MEANS = (-7.1, -7.4, -7.7)
EXAMPLE5_EXPECTED = (0.58, 0.25, 0.03)

# Hospital: (p_KL, p_KL_CV)
TABLE1_EXPECTED = {
    "Bristol": (0.010, 0.002),
    "Leicester": (0.527, 0.516),
    "Leeds": (0.912, 0.947),
    "Oxford": (0.173, 0.123),
    "Guys": (0.398, 0.383),
    "Liverpool": (0.690, 0.745),
    "Southampton": (0.680, 0.715),
    "Great Ormond St": (0.595, 0.628),
    "Newcastle": (0.455, 0.430),
    "Harefield": (0.474, 0.452),
    "Birmingham": (0.761, 0.787),
    "Brompton": (0.591, 0.631),
}


@dataclass
class ManifestEntry:
    example: int
    quantity: str
    produced: float
    expected: Optional[float] = None
    tolerance: Optional[float] = None

    @property
    def within_tolerance(self) -> Optional[bool]:
        if self.expected is None or self.tolerance is None:
            return None
        return bool(abs(self.produced - self.expected) <= self.tolerance)

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload["within_tolerance"] = self.within_tolerance
        return payload


def fixture(name: str, data_dir: Path) -> Dataset:
    return Dataset.from_csv(data_dir / name)


def _save_reports(reports, out: Path, stem: str):
    for i, report in enumerate(reports):
        report.save(out / f"{stem}_{i}.json", keep_replicates=True)


def example_1(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    model = NormalLocationModel(mu0=0.0, sigma0sq=1.0, sigmasq=1.0)
    data = Dataset([2.0])
    expected = float(2.0 * stats.norm.sf(np.sqrt(2.0)))
    orders = [DivergenceOrder.finite(0.5), KL, DivergenceOrder.finite(2.0), MR]
    reports = [conflict_p_value(model, data, order, 10_000, seed, workers) for order in orders]
    reports.append(em_p_value(model, data, 10_000, seed, workers))
    _save_reports(reports, out, "example1")
    names = [f"p[{o}]" for o in orders] + ["p_em"]
    return [ManifestEntry(1, name, r.p_value, expected, 0.015) for name, r in zip(names, reports)]


def example_2(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    n = 10
    model = BinomialModel(a=1.0, b=1.0, n=n)
    entries = []
    outcomes = np.arange(n + 1)
    for y in outcomes:
        data = Dataset([y], [n])
        expected = float(np.mean(np.abs(outcomes - n / 2) >= abs(y - n / 2)))
        mr = conflict_p_value(model, data, MR, seed=seed, workers=workers)
        em = em_p_value(model, data, seed=seed, workers=workers)
        _save_reports([mr, em], out, f"example2_y{y}")
        entries.append(ManifestEntry(2, f"p_mr[y={y}]", mr.p_value, expected, 1e-12))
        entries.append(ManifestEntry(2, f"p_em[y={y}]", em.p_value, 1.0, 1e-12))
    return entries


def example_3(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    model = NormalInverseGammaModel(mu0=0.0, lambda0=1.0, a=2.0, b=2.0)
    rng = make_rng(seed, 3)
    data = Dataset(0.8 + np.sqrt(1.5) * rng.standard_normal(20))
    p1 = hierarchical_p1(model, data, KL, 2000, 200, seed, workers)
    p2 = hierarchical_p2(model, data, KL, 2000, seed, workers)
    _save_reports([p1, p2], out, "example3")
    closed = model.closed_form_p1(data)
    return [
        ManifestEntry(3, "p1", p1.p_value, closed, max(3.0 * p1.mc_std_error, 0.02)),
        ManifestEntry(3, "p2", p2.p_value),
        ManifestEntry(3, "theta2_discrepancy_large_n_form", model.approximate_theta2_discrepancy(data)),
    ]


def example_4(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    nus = (2.0, 8.0, 50.0)
    frame = p_value_curve(nus, np.geomspace(1e-3, 200.0, 120), KL)
    write_curve(frame, out / "example4_curve.csv")
    entries = []
    for nu in nus:
        t0 = minimising_t(nu)
        entries.append(ManifestEntry(4, f"p_at_t0[nu={nu:g}]", exact_tail_p_value(nu, t0, t0=t0), 1.0, 1e-12))
        entries.append(ManifestEntry(4, f"p_at_10t0[nu={nu:g}]",
                                     exact_tail_p_value(nu, 10.0 * t0, t0=t0), 0.0, 0.01))
    for i, (nu, ratio) in enumerate(((2.0, 0.3), (2.0, 4.0), (8.0, 0.5), (8.0, 2.5), (50.0, 1.2))):
        t_obs = ratio * minimising_t(nu)
        exact = exact_tail_p_value(nu, t_obs)
        mc, se = tail_p_value_monte_carlo(nu, t_obs, KL, 100_000, seed + i)
        entries.append(ManifestEntry(4, f"mc_vs_exact[nu={nu:g},t={t_obs:.3g}]", mc, exact, 3.0 * max(se, 1e-3)))
    return entries


def example_5(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    data = fixture("cancer_mortality.csv", data_dir)
    entries = []
    for mean, expected in zip(EXAMPLE5_PRIOR_MEANS, EXAMPLE5_EXPECTED):
        model = BetaBinomialModel(mean_logit_eta=mean, mean_log_k=7.9, strategy="variational")
        report = conflict_p_value(model, data, KL, 1000, seed, workers)
        _save_reports([report], out, f"example5_{mean:g}")
        entries.append(ManifestEntry(5, f"p_kl[mean_logit_eta={mean:g}]", report.p_value, expected, 0.07))
    return entries


def example_6(out: Path, data_dir: Path, seed: int, workers: Optional[int]) -> List[ManifestEntry]:
    data = fixture("bristol.csv", data_dir)
    model = LogisticRandomEffectsModel()
    entries = []
    for column, cv in ((0, False), (1, True)):
        reports = per_unit_reports(model, data, KL, 1000, 200, seed, workers,
                                   cross_validated=cv, one_sided=True)
        stem = "example6_cv" if cv else "example6"
        write_unit_table(reports_to_frame(reports), out / f"{stem}.csv")
        for report in reports:
            expected = TABLE1_EXPECTED.get(report.unit, (None, None))[column]
            name = f"p_kl{'_cv' if cv else ''}[{report.unit}]"
            entries.append(ManifestEntry(6, name, report.p_value, expected, 0.10))
        produced = [r.p_value for r in reports if r.unit in TABLE1_EXPECTED]
        expected = [TABLE1_EXPECTED[r.unit][column] for r in reports if r.unit in TABLE1_EXPECTED]
        rho = float(stats.spearmanr(produced, expected).correlation)
        entries.append(ManifestEntry(6, f"spearman{'_cv' if cv else ''}", rho, 1.0, 0.10))
    return entries


EXAMPLES: Dict[int, Callable] = {
    1: example_1, 2: example_2, 3: example_3, 4: example_4, 5: example_5, 6: example_6,
}


def cmd_reproduce(example_id: int, output_dir: str, seed: int = 2024,
                  workers: Optional[int] = None, data_dir: Optional[str] = None) -> int:
    """
    Run one worked example end to end and write its manifest.

    Raises:
        ValidationError: Unknown example.
        FileNotFoundError: A data fixture is missing.
    """
    if example_id not in EXAMPLES:
        raise ValidationError(f"Unknown example {example_id}; choose from {sorted(EXAMPLES)}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"=== Reproducing example {example_id} ===")
    entries = EXAMPLES[example_id](out, Path(data_dir) if data_dir else DATA_DIR, seed, workers)
    manifest = {"schema_version": SCHEMA_VERSION, "example": example_id, "seed": seed,
                "entries": [e.to_dict() for e in entries]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    for entry in entries:
        status = {True: "✅", False: "❌", None: "•"}[entry.within_tolerance]
        target = "" if entry.expected is None else f" (expected {entry.expected:.4f} ± {entry.tolerance:g})"
        print(f"  {status} {entry.quantity}: {entry.produced:.4f}{target}")
    logger.info(f"Manifest written to {out / 'manifest.json'}")
    return 0
