"""Device catalogs, resonance measurements, model comparison and calibration.

File formats (UTF-8 CSV, ``.`` decimal separator, LF line endings):

* catalog: ``id,chip,l_um,w1_um,l2_um,w2_um,h_um`` where ``l`` is the total
  length ``l1 + l2``;
* measurements: ``id,fr_khz,q``.

Records hold SI values; files use micrometres and kilohertz.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from statistics import median

import numpy as np

from .core import BEAM_MASS_COEFF, MaterialSpec, TGeometry, lumped_prediction, segment_masses, spring_constant_t
from .exceptions import ConvergenceError, DataFormatError, GeometryError
from .modal import DEFAULT_ELEMENTS, modal_analysis

UM = 1e-6
KHZ = 1e3

CATALOG_HEADER = ("id", "chip", "l_um", "w1_um", "l2_um", "w2_um", "h_um")
MEASUREMENT_HEADER = ("id", "fr_khz", "q")

#: Relative uncertainty of the averaged resonance measurements.
FREQUENCY_UNCERTAINTY = 0.01
#: Relative uncertainty of the averaged quality factors.
Q_UNCERTAINTY = 0.15
#: Spread of f from the unstated Young's modulus (sqrt(130/169) is about 0.88).
MATERIAL_BAND = 0.10
#: Regime boundary quoted for the fabricated devices, as a fraction of l.
NOMINAL_BOUNDARY_FRACTION = 0.6


@dataclass(frozen=True)
class DeviceRecord:
    """One catalog row, in meters."""

    id: int
    chip: int
    l: float
    w1: float
    l2: float
    w2: float
    h: float

    @property
    def l1(self) -> float:
        return self.l - self.l2

    def geometry(self, n_beams: int = 3) -> TGeometry:
        return TGeometry(l1=self.l1, l2=self.l2, w1=self.w1, w2=self.w2, h=self.h, n_beams=n_beams)


@dataclass(frozen=True)
class MeasurementRecord:
    """Averaged measurement: resonance frequency (Hz) and quality factor."""

    id: int
    f_r: float
    q: float


def _format_number(value: float) -> str:
    return f"{value:.12g}"


def _open_text(source):
    if hasattr(source, "read"):
        return source.read()
    with open(os.fspath(source), encoding="utf-8", newline="") as fh:
        return fh.read()


def _parse_rows(text, header, label):
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    try:
        found = next(reader)
    except StopIteration:
        return []
    found = [h.strip() for h in found]
    if tuple(found) != header:
        raise DataFormatError(f"{label}: expected header {','.join(header)!r}, got {','.join(found)!r}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(f"{label}: row {lineno}: expected {len(header)} fields, got {len(row)}")
        rows.append((lineno, dict(zip(header, (cell.strip() for cell in row)))))
    return rows


def _number(label, lineno, name, raw, integer=False):
    try:
        value = int(raw) if integer else float(raw)
    except ValueError:
        raise DataFormatError(f"{label}: row {lineno}, field {name!r}: not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise DataFormatError(f"{label}: row {lineno}, field {name!r}: not finite: {raw!r}")
    return value


def _check_unique(label, records):
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise DataFormatError(f"{label}: duplicate id {rec.id}")
        seen.add(rec.id)


def load_catalog(source) -> list[DeviceRecord]:
    """Read a device catalog from a path or text stream.

    Raises:
        DataFormatError: on a bad header, malformed row or field, invariant
            violation (``l2 >= l``, non-positive sizes) or duplicate id.
    """
    label = "catalog"
    records = []
    for lineno, row in _parse_rows(_open_text(source), CATALOG_HEADER, label):
        ident = _number(label, lineno, "id", row["id"], integer=True)
        chip = _number(label, lineno, "chip", row["chip"], integer=True)
        dims = {name: _number(label, lineno, name, row[name]) for name in CATALOG_HEADER[2:]}
        for name in ("l_um", "w1_um", "h_um"):
            if dims[name] <= 0:
                raise DataFormatError(f"{label}: row {lineno}, field {name!r}: must be positive")
        for name in ("l2_um", "w2_um"):
            if dims[name] < 0:
                raise DataFormatError(f"{label}: row {lineno}, field {name!r}: must be non-negative")
        if dims["l2_um"] >= dims["l_um"]:
            raise DataFormatError(f"{label}: row {lineno}, field 'l2_um': must be below l_um so that l1 > 0")
        if dims["l2_um"] > 0 and dims["w2_um"] == 0:
            raise DataFormatError(f"{label}: row {lineno}, field 'w2_um': must be positive when l2_um > 0")
        records.append(
            DeviceRecord(
                id=ident,
                chip=chip,
                l=dims["l_um"] * UM,
                w1=dims["w1_um"] * UM,
                l2=dims["l2_um"] * UM,
                w2=dims["w2_um"] * UM,
                h=dims["h_um"] * UM,
            )
        )
    _check_unique(label, records)
    return records


def load_measurements(source) -> list[MeasurementRecord]:
    """Read resonance measurements from a path or text stream.

    Raises:
        DataFormatError: as ``load_catalog``; ``fr_khz`` and ``q`` must be positive.
    """
    label = "measurements"
    records = []
    for lineno, row in _parse_rows(_open_text(source), MEASUREMENT_HEADER, label):
        ident = _number(label, lineno, "id", row["id"], integer=True)
        fr = _number(label, lineno, "fr_khz", row["fr_khz"])
        q = _number(label, lineno, "q", row["q"])
        for name, value in (("fr_khz", fr), ("q", q)):
            if value <= 0:
                raise DataFormatError(f"{label}: row {lineno}, field {name!r}: must be positive")
        records.append(MeasurementRecord(id=ident, f_r=fr * KHZ, q=q))
    _check_unique(label, records)
    return records


def dump_catalog(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CATALOG_HEADER)
    for r in records:
        writer.writerow(
            [r.id, r.chip] + [_format_number(v / UM) for v in (r.l, r.w1, r.l2, r.w2, r.h)]
        )
    return out.getvalue()


def dump_measurements(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MEASUREMENT_HEADER)
    for r in records:
        writer.writerow([r.id, _format_number(r.f_r / KHZ), _format_number(r.q)])
    return out.getvalue()


def shipped_data_path(name: str):
    """Path of a shipped data file (``table1_devices.csv`` or ``table2_measurements.csv``)."""
    return resources.files("tcantilever") / "data" / name


def shipped_catalog() -> list[DeviceRecord]:
    with shipped_data_path("table1_devices.csv").open(encoding="utf-8", newline="") as fh:
        return load_catalog(fh)


def shipped_measurements() -> list[MeasurementRecord]:
    with shipped_data_path("table2_measurements.csv").open(encoding="utf-8", newline="") as fh:
        return load_measurements(fh)


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class ComparisonRow:
    id: int
    chip: int
    model: str
    predicted_hz: float
    measured_hz: float
    relative_error: float
    within_band: bool
    q: float
    l2_fraction: float


@dataclass(frozen=True)
class ComparisonReport:
    """Predicted against measured resonance frequencies.

    ``aggregates[(model, chip)]`` holds ``{"median": ..., "max": ...}``
    relative errors; ``measured_argmin[chip]`` is the device id with the
    lowest measured frequency on that chip and ``measured_argmin_fraction``
    its ``l2 / l``. That sampled minimum is reported next to
    ``nominal_boundary_fraction`` without reconciling the two.
    """

    rows: tuple[ComparisonRow, ...]
    aggregates: dict
    measured_argmin: dict
    measured_argmin_fraction: dict
    material: MaterialSpec
    models: tuple[str, ...]
    beam_mass_coeff: float
    n_elements: int
    band: float
    nominal_boundary_fraction: float = NOMINAL_BOUNDARY_FRACTION


def _join(catalog, measurements):
    by_id = {d.id: d for d in catalog}
    orphans = sorted(m.id for m in measurements if m.id not in by_id)
    if orphans:
        raise DataFormatError(f"measurements without catalog record: ids {orphans}")
    return [(by_id[m.id], m) for m in sorted(measurements, key=lambda m: m.id)]


def predict_frequency(device: DeviceRecord, model: str, material: MaterialSpec,
                      beam_mass_coeff=BEAM_MASS_COEFF, n_elements=DEFAULT_ELEMENTS) -> float:
    g = device.geometry()
    if model == "lumped":
        return lumped_prediction(g, material, beam_mass_coeff).frequency
    if model == "fem":
        return modal_analysis(g, material, n_elements).f1
    raise ValueError(f"unknown model {model!r}")


def expand_models(model: str) -> tuple[str, ...]:
    if model == "all":
        return ("lumped", "fem")
    if model not in ("lumped", "fem"):
        raise ValueError(f"model must be lumped, fem or all, got {model!r}")
    return (model,)


def compare(
    catalog,
    measurements,
    model: str = "all",
    material: MaterialSpec | None = None,
    beam_mass_coeff: float = BEAM_MASS_COEFF,
    n_elements: int = DEFAULT_ELEMENTS,
    band: float = FREQUENCY_UNCERTAINTY + MATERIAL_BAND,
) -> ComparisonReport:
    """Compare model predictions with measurements, device by device.

    A prediction is ``within_band`` when its relative error does not exceed
    ``band`` (measurement uncertainty plus the material-constant spread by
    default). Output is sorted by (model, id), so input row order is
    irrelevant.

    Raises:
        DataFormatError: if a measurement id has no catalog record.
    """
    material = material or MaterialSpec()
    models = expand_models(model)
    pairs = _join(catalog, measurements)
    rows = []
    for name in models:
        for dev, meas in pairs:
            pred = predict_frequency(dev, name, material, beam_mass_coeff, n_elements)
            err = abs(pred - meas.f_r) / meas.f_r
            rows.append(
                ComparisonRow(
                    id=dev.id,
                    chip=dev.chip,
                    model=name,
                    predicted_hz=pred,
                    measured_hz=meas.f_r,
                    relative_error=err,
                    within_band=err <= band,
                    q=meas.q,
                    l2_fraction=dev.l2 / dev.l,
                )
            )
    aggregates = {}
    for name in models:
        for chip in sorted({dev.chip for dev, _ in pairs}):
            errs = [r.relative_error for r in rows if r.model == name and r.chip == chip]
            aggregates[(name, chip)] = {"median": median(errs), "max": max(errs)}
    measured_argmin = {}
    for chip in sorted({dev.chip for dev, _ in pairs}):
        chip_pairs = [(meas.f_r, dev.id) for dev, meas in pairs if dev.chip == chip]
        measured_argmin[chip] = min(chip_pairs)[1]
    return ComparisonReport(
        rows=tuple(rows),
        aggregates=aggregates,
        measured_argmin=measured_argmin,
        measured_argmin_fraction={
            chip: next(d.l2 / d.l for d, _ in pairs if d.id == ident) for chip, ident in measured_argmin.items()
        },
        material=material,
        models=models,
        beam_mass_coeff=beam_mass_coeff,
        n_elements=n_elements,
        band=band,
    )


# ---------------------------------------------------------------------------
# effective-mass calibration


@dataclass(frozen=True)
class FitResult:
    """Fitted effective-mass coefficients ``m_eff = alpha m1 + beta m2``.

    ``physical`` is False when either coefficient came out negative; the
    values are reported as found, not clamped.
    """

    alpha: float
    beta: float
    residual: float
    iterations: int
    trajectory: tuple = field(repr=False)

    @property
    def physical(self) -> bool:
        return self.alpha >= 0.0 and self.beta >= 0.0


def design_matrix(catalog, measurements, material):
    pairs = _join(catalog, measurements)
    k = np.empty(len(pairs))
    masses = np.empty((len(pairs), 2))
    freqs = np.empty(len(pairs))
    for i, (dev, meas) in enumerate(pairs):
        g = dev.geometry()
        k[i] = spring_constant_t(g, material)
        masses[i] = segment_masses(g, material)
        freqs[i] = meas.f_r
    return k, masses, freqs


def gauss_newton_effective_mass(k, masses, freqs, start=(BEAM_MASS_COEFF, 1.0), max_iter=100, tol=1e-14):
    """Least-squares ``(alpha, beta)`` for ``f = sqrt(k / (alpha m1 + beta m2)) / 2 pi``.

    Minimizes ``sum(((f_model - f) / f)^2)`` by Gauss-Newton with step
    halving; steps that make any effective mass non-positive are halved too.

    Args:
        k: Spring constant per sample (N/m).
        masses: ``(n, 2)`` array of ``(m1, m2)`` per sample (kg).
        freqs: Measured frequency per sample (Hz).

    Raises:
        ConvergenceError: after ``max_iter`` iterations; ``trajectory`` lists
            the iterates.
    """
    k = np.asarray(k, dtype=float)
    masses = np.asarray(masses, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if len(freqs) < 2:
        raise ValueError("need at least 2 measurements to fit two coefficients")

    # work with coefficients of order one and masses normalized per sample scale
    scale = masses.max()
    A = masses / scale

    def residuals(p):
        m_eff = A @ p
        if np.any(m_eff <= 0):
            return None, None
        f_model = np.sqrt(k / (m_eff * scale)) / (2 * np.pi)
        return (f_model - freqs) / freqs, f_model

    p = np.asarray(start, dtype=float)
    r, f_model = residuals(p)
    if r is None:
        raise ValueError("starting coefficients give a non-positive effective mass")
    cost = float(r @ r)
    trajectory = [(float(p[0]), float(p[1]), cost)]
    for it in range(1, max_iter + 1):
        m_eff = A @ p
        J = (-f_model / (2 * m_eff))[:, None] * A / freqs[:, None]
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        t = 1.0
        while True:
            trial = p + t * step
            r_new, f_new = residuals(trial)
            if r_new is not None and float(r_new @ r_new) <= cost:
                break
            t *= 0.5
            if t < 1e-12:
                trial, r_new, f_new = p, r, f_model
                break
        converged = np.max(np.abs(trial - p)) <= tol * max(1.0, np.max(np.abs(p)))
        p, r, f_model = trial, r_new, f_new
        cost = float(r @ r)
        trajectory.append((float(p[0]), float(p[1]), cost))
        if converged:
            return FitResult(float(p[0]), float(p[1]), cost, it, tuple(trajectory))
    raise ConvergenceError(
        f"Gauss-Newton did not converge in {max_iter} iterations", residual=cost, trajectory=trajectory
    )


def linear_effective_mass_fit(k, masses, freqs):
    """Closed-form check: ordinary least squares of ``k / (2 pi f)^2`` on ``(m1, m2)``."""
    m_eff = np.asarray(k, dtype=float) / (2 * np.pi * np.asarray(freqs, dtype=float)) ** 2
    masses = np.asarray(masses, dtype=float)
    scale = masses.max()
    coef, *_ = np.linalg.lstsq(masses / scale, m_eff / scale, rcond=None)
    return float(coef[0]), float(coef[1])


def fit_coefficients(catalog, measurements, material: MaterialSpec | None = None, **kwargs) -> FitResult:
    """Calibrate ``(alpha, beta)`` against measured frequencies.

    Spring constants come from the closed-form stepped-beam formula.
    """
    material = material or MaterialSpec()
    k, masses, freqs = design_matrix(catalog, measurements, material)
    return gauss_newton_effective_mass(k, masses, freqs, **kwargs)


def synthetic_measurements(catalog, alpha, beta, material: MaterialSpec | None = None, q=1000.0):
    """Noise-free measurements generated from ``m_eff = alpha m1 + beta m2``."""
    material = material or MaterialSpec()
    out = []
    for dev in catalog:
        g = dev.geometry()
        m1, m2 = segment_masses(g, material)
        m_eff = alpha * m1 + beta * m2
        if m_eff <= 0:
            raise GeometryError(f"device {dev.id}: non-positive effective mass")
        f = math.sqrt(spring_constant_t(g, material) / m_eff) / (2 * math.pi)
        out.append(MeasurementRecord(id=dev.id, f_r=f, q=q))
    return out
