"""Command-line interface.

Usage:
    tcantilever predict --device 4
    tcantilever predict --l1 400 --l2 0 --w1 64 --h 15 --format csv
    tcantilever deflect --device 4 --force 1e-6
    tcantilever sweep --device 1 --format svg --out sweep.svg
    tcantilever modal --l1 400 --w1 64 --elements 64
    tcantilever compare
    tcantilever fit

Geometry flags are in micrometres, ``--E-gpa`` in GPa and ``--rho`` in
kg/m^3. Data goes to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys

import click
import numpy as np

from . import __version__
from .core import (
    BEAM_MASS_COEFF,
    CLASSICAL_BEAM_MASS_COEFF,
    SILICON_DENSITY,
    SILICON_YOUNGS_MODULUS,
    MaterialSpec,
    TGeometry,
    deflection_curve,
    lumped_prediction,
    segment_masses,
    spring_constant_t,
)
from .devices import (
    FREQUENCY_UNCERTAINTY,
    MATERIAL_BAND,
    UM,
    compare,
    expand_models,
    fit_coefficients,
    design_matrix,
    linear_effective_mass_fit,
    load_catalog,
    load_measurements,
    shipped_catalog,
    shipped_measurements,
)

from .exceptions import ConvergenceError, DataFormatError, GeometryError, NoTransitionError
from .modal import DEFAULT_ELEMENTS, build_mesh, effective_mass_from_modal, first_mode, static_tip_stiffness
from .plotting import line_plot
from .regime import DEFAULT_FRACTIONS, DEFAULT_POINTS, SweepPointError, SweepSpec, sweep

GPA = 1e9
HANDLED = (GeometryError, DataFormatError, ConvergenceError, NoTransitionError, SweepPointError, ValueError, OSError)


# ---------------------------------------------------------------------------
# shared options and helpers


def material_options(f):
    @click.option("--E-gpa", "e_gpa", type=float, default=SILICON_YOUNGS_MODULUS / GPA, show_default=True,
                  help="Young's modulus in GPa.")
    @click.option("--rho", type=float, default=SILICON_DENSITY, show_default=True, help="Density in kg/m^3.")
    @functools.wraps(f)
    def wrapper(*args, e_gpa, rho, **kwargs):
        return f(*args, material=MaterialSpec(e_gpa * GPA, rho), **kwargs)

    return wrapper


def geometry_options(f):
    @click.option("--device", type=int, default=None, help="Device id from the catalog.")
    @click.option("--catalog", type=click.Path(dir_okay=False), default=None,
                  help="Catalog CSV (default: shipped table).")
    @click.option("--l1", type=float, default=None, help="Narrow segment length (um).")
    @click.option("--l2", type=float, default=None, help="Extra-mass length (um), default 0.")
    @click.option("--w1", type=float, default=None, help="Narrow segment width (um).")
    @click.option("--w2", type=float, default=None, help="Extra-mass width (um), default 0.")
    @click.option("--h", type=float, default=None, help="Thickness (um), default 15.")
    @click.option("--n-beams", type=int, default=3, show_default=True, help="Parallel beams per device.")
    @functools.wraps(f)
    def wrapper(*args, device, catalog, l1, l2, w1, w2, h, n_beams, **kwargs):
        inline = {"l1": l1, "l2": l2, "w1": w1, "w2": w2, "h": h}
        given = [k for k, v in inline.items() if v is not None]
        if device is not None and given:
            raise click.UsageError("give either --device or inline geometry flags, not both")
        if device is not None:
            records = load_catalog(catalog) if catalog else shipped_catalog()
            match = [r for r in records if r.id == device]
            if not match:
                raise click.ClickException(f"unknown device id {device}")
            geometry = match[0].geometry(n_beams)
        else:
            if l1 is None or w1 is None:
                raise click.UsageError("need --device or at least --l1 and --w1")
            geometry = TGeometry(
                l1=l1 * UM,
                l2=(l2 or 0.0) * UM,
                w1=w1 * UM,
                w2=(w2 or 0.0) * UM,
                h=(15.0 if h is None else h) * UM,
                n_beams=n_beams,
            )
        return f(*args, geometry=geometry, device=device, **kwargs)

    return wrapper


def output_options(formats):
    def deco(f):
        @click.option("--format", "fmt", type=click.Choice(formats), default=formats[0], show_default=True)
        @click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                      help="Write to a file instead of stdout.")
        @functools.wraps(f)
        def wrapper(*args, **kwargs):
            return f(*args, **kwargs)

        return wrapper

    return deco


def model_option(default="all"):
    return click.option("--model", type=click.Choice(["lumped", "fem", "all"]), default=default, show_default=True)


def elements_option(f):
    return click.option("--elements", type=int, default=DEFAULT_ELEMENTS, show_default=True,
                        help="Finite elements per beam (>= 4).")(f)


def coeff_options(f):
    @click.option("--mass-coeff", type=float, default=BEAM_MASS_COEFF, show_default=True,
                  help="Effective-mass coefficient of the narrow segment.")
    @click.option("--classical", is_flag=True, help=f"Use {CLASSICAL_BEAM_MASS_COEFF} instead of --mass-coeff.")
    @functools.wraps(f)
    def wrapper(*args, mass_coeff, classical, **kwargs):
        return f(*args, beam_mass_coeff=CLASSICAL_BEAM_MASS_COEFF if classical else mass_coeff, **kwargs)

    return wrapper


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except HANDLED as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def to_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def to_csv(header, rows, comments=()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def material_dict(m: MaterialSpec):
    return {"youngs_modulus_gpa": m.youngs_modulus / GPA, "density_kg_m3": m.density}


def material_comment(m: MaterialSpec):
    return f"material: E = {m.youngs_modulus / GPA:g} GPa, rho = {m.density:g} kg/m^3"


def geometry_dict(g: TGeometry):
    return {
        "l1_um": g.l1 / UM,
        "l2_um": g.l2 / UM,
        "w1_um": g.w1 / UM,
        "w2_um": g.w2 / UM,
        "h_um": g.h / UM,
        "n_beams": g.n_beams,
    }


def log(message):
    click.echo(message, err=True)


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__)
def cli():
    """Stiffness, frequency and regime analysis of T-shaped microcantilevers."""


PREDICT_COLUMNS = (
    "model",
    "spring_constant_n_m",
    "beam_mass_kg",
    "extra_mass_kg",
    "effective_mass_kg",
    "frequency_hz",
    "total_spring_constant_n_m",
    "total_mass_kg",
)


def predict_rows(geometry, material, models, beam_mass_coeff, n_elements):
    rows = []
    for name in models:
        if name == "lumped":
            p = lumped_prediction(geometry, material, beam_mass_coeff)
            k, m1, m2, m_eff, f = p.spring_constant, p.beam_mass, p.extra_mass, p.effective_mass, p.frequency
        else:
            k = spring_constant_t(geometry, material)
            m1, m2 = segment_masses(geometry, material)
            result = first_mode(build_mesh(geometry, material, n_elements))
            m_eff, f = effective_mass_from_modal(k, result.omega1), result.f1
        n = geometry.n_beams
        rows.append(dict(zip(PREDICT_COLUMNS, (name, k, m1, m2, m_eff, f, n * k, n * (m1 + m2)))))
    return rows


@cli.command()
@handle_errors
@geometry_options
@material_options
@model_option()
@elements_option
@coeff_options
@output_options(["json", "csv"])
def predict(geometry, device, material, model, elements, beam_mass_coeff, fmt, out):
    """Spring constant, masses and resonance frequency of one beam."""
    rows = predict_rows(geometry, material, expand_models(model), beam_mass_coeff, elements)
    if fmt == "json":
        emit(to_json({
            "material": material_dict(material),
            "device": device,
            "geometry": geometry_dict(geometry),
            "beam_mass_coeff": beam_mass_coeff,
            "n_elements": elements,
            "predictions": rows,
        }), out)
    else:
        comments = [material_comment(material), f"beam_mass_coeff = {beam_mass_coeff:g}, n_elements = {elements}"]
        emit(to_csv(PREDICT_COLUMNS, [[r[c] for c in PREDICT_COLUMNS] for r in rows], comments), out)


@cli.command()
@handle_errors
@geometry_options
@material_options
@click.option("--force", type=float, default=1e-6, show_default=True, help="Tip force in N.")
@click.option("--points", type=click.IntRange(min=2), default=201, show_default=True)
@click.option("--no-timestamp", is_flag=True, help="Omit the SVG generation timestamp.")
@output_options(["json", "csv", "svg"])
def deflect(geometry, device, material, force, points, no_timestamp, fmt, out):
    """Static elastic curve under a tip force."""
    curve = deflection_curve(geometry, material, force)
    x = np.linspace(0.0, geometry.length, points)
    y = np.atleast_1d(curve(x))
    tip = curve.tip_deflection()
    if fmt == "json":
        emit(to_json({
            "material": material_dict(material),
            "device": device,
            "geometry": geometry_dict(geometry),
            "force_n": force,
            "tip_deflection_m": tip,
            "points": [{"x_m": float(a), "y_m": float(b)} for a, b in zip(x, y)],
        }), out)
    elif fmt == "csv":
        comments = [material_comment(material), f"force = {force:g} N, tip deflection = {tip:.6e} m"]
        emit(to_csv(("x_m", "y_m"), [[float(a), float(b)] for a, b in zip(x, y)], comments), out)
    else:
        emit(line_plot([("deflection", x / UM, y * 1e9)], "x (um)", "deflection (nm)",
                       title=f"Tip force {force:g} N", timestamp=not no_timestamp), out)


SWEEP_COLUMNS = ("model", "l2_um", "fraction", "frequency_hz", "regime")


@cli.command("sweep")
@handle_errors
@geometry_options
@material_options
@model_option()
@elements_option
@coeff_options
@click.option("--points", type=int, default=DEFAULT_POINTS, show_default=True)
@click.option("--fmin", type=float, default=DEFAULT_FRACTIONS[0], show_default=True, help="Smallest l2/l.")
@click.option("--fmax", type=float, default=DEFAULT_FRACTIONS[1], show_default=True, help="Largest l2/l.")
@click.option("--jobs", type=int, default=None, help="Threads for grid points.")
@click.option("--no-timestamp", is_flag=True, help="Omit the SVG generation timestamp.")
@output_options(["json", "csv", "svg"])
def sweep_cmd(geometry, device, material, model, elements, beam_mass_coeff, points, fmin, fmax, jobs,
              no_timestamp, fmt, out):
    """Frequency versus extra-mass length at fixed total length."""
    results = []
    for name in expand_models(model):
        spec = SweepSpec(base=geometry, model=name, material=material, fraction_range=(fmin, fmax),
                         n_points=points, n_elements=elements, beam_mass_coeff=beam_mass_coeff)
        result = sweep(spec, n_jobs=jobs)
        if result.transition is None:
            log(f"{name}: no transition in range l2/l = [{fmin:g}, {fmax:g}]")
        results.append(result)

    if fmt == "json":
        payload = {
            "material": material_dict(material),
            "device": device,
            "total_length_um": geometry.length / UM,
            "geometry": geometry_dict(geometry),
            "beam_mass_coeff": beam_mass_coeff,
            "n_elements": elements,
            "sweeps": [],
        }
        for r in results:
            t = r.transition
            payload["sweeps"].append({
                "model": r.spec.model,
                "transition": None if t is None else {"l2_um": t.l2 / UM, "fraction": t.fraction},
                "points": [
                    {"l2_um": float(l2 / UM), "fraction": float(fr), "frequency_hz": float(f),
                     "regime": None if r.labels is None else r.labels[i].value}
                    for i, (l2, fr, f) in enumerate(zip(r.l2, r.fractions, r.frequencies))
                ],
            })
        emit(to_json(payload), out)
    elif fmt == "csv":
        rows = []
        comments = [material_comment(material), f"total length = {geometry.length / UM:g} um"]
        for r in results:
            t = r.transition
            comments.append(
                f"{r.spec.model}: "
                + ("no transition in range" if t is None else f"l2* = {t.l2 / UM:.4f} um, fraction = {t.fraction:.4f}")
            )
            for i, (l2, fr, f) in enumerate(zip(r.l2, r.fractions, r.frequencies)):
                rows.append([r.spec.model, float(l2 / UM), float(fr), float(f),
                             "" if r.labels is None else r.labels[i].value])
        emit(to_csv(SWEEP_COLUMNS, rows, comments), out)
    else:
        series, markers = [], []
        for r in results:
            series.append((r.spec.model, r.fractions, r.frequencies / 1e3))
            t = r.transition
            if t is not None:
                markers.append((f"{r.spec.model} min {t.fraction:.3f}", t.fraction, r.spec.evaluate(t.l2) / 1e3))
        emit(line_plot(series, "extra-mass length l2 / l", "resonance frequency (kHz)",
                       title=f"l = {geometry.length / UM:g} um", markers=markers, timestamp=not no_timestamp), out)


@cli.command()
@handle_errors
@geometry_options
@material_options
@elements_option
@output_options(["json", "csv"])
def modal(geometry, device, material, elements, fmt, out):
    """First flexural mode from the stepped-beam finite-element model."""
    mesh = build_mesh(geometry, material, elements)
    result = first_mode(mesh)
    k_closed = spring_constant_t(geometry, material)
    k_static = static_tip_stiffness(mesh)
    shape = result.mode_shape
    if fmt == "json":
        emit(to_json({
            "material": material_dict(material),
            "device": device,
            "geometry": geometry_dict(geometry),
            "n_elements": result.n_elements,
            "f1_hz": result.f1,
            "omega1_rad_s": result.omega1,
            "residual": result.residual,
            "iterations": result.iterations,
            "spring_constant_n_m": k_closed,
            "static_tip_stiffness_n_m": k_static,
            "effective_mass_kg": effective_mass_from_modal(k_closed, result.omega1),
            "mode_shape": [
                {"x_m": float(x), "deflection": float(shape[2 * i]), "rotation_per_m": float(shape[2 * i + 1])}
                for i, x in enumerate(mesh.nodes)
            ],
        }), out)
    else:
        comments = [
            material_comment(material),
            f"n_elements = {result.n_elements}, f1 = {result.f1:.6f} Hz, residual = {result.residual:.3e}",
            f"spring constant = {k_closed:.6f} N/m, static FEM stiffness = {k_static:.6f} N/m",
        ]
        rows = [[float(x), float(shape[2 * i]), float(shape[2 * i + 1])] for i, x in enumerate(mesh.nodes)]
        emit(to_csv(("x_m", "deflection", "rotation_per_m"), rows, comments), out)


def data_options(f):
    @click.option("--catalog", type=click.Path(exists=True, dir_okay=False), default=None,
                  help="Catalog CSV (default: shipped table).")
    @click.option("--measurements", type=click.Path(exists=True, dir_okay=False), default=None,
                  help="Measurements CSV (default: shipped table).")
    @functools.wraps(f)
    def wrapper(*args, catalog, measurements, **kwargs):
        cat = load_catalog(catalog) if catalog else shipped_catalog()
        meas = load_measurements(measurements) if measurements else shipped_measurements()
        return f(*args, catalog=cat, measurements=meas, **kwargs)

    return wrapper


COMPARE_COLUMNS = ("model", "id", "chip", "l2_fraction", "predicted_hz", "measured_hz", "relative_error",
                   "within_band", "q")


@cli.command("compare")
@handle_errors
@data_options
@material_options
@model_option()
@elements_option
@coeff_options
@click.option("--band", type=float, default=FREQUENCY_UNCERTAINTY + MATERIAL_BAND, show_default=True,
              help="Relative error accepted as agreement.")
@output_options(["json", "csv"])
def compare_cmd(catalog, measurements, material, model, elements, beam_mass_coeff, band, fmt, out):
    """Predicted against measured resonance frequencies."""
    report = compare(catalog, measurements, model, material, beam_mass_coeff, elements, band)
    argmin = [
        {"chip": chip, "device": dev, "l2_fraction": report.measured_argmin_fraction[chip]}
        for chip, dev in report.measured_argmin.items()
    ]
    if fmt == "json":
        emit(to_json({
            "material": material_dict(material),
            "models": list(report.models),
            "beam_mass_coeff": beam_mass_coeff,
            "n_elements": elements,
            "band": band,
            "rows": [{c: getattr(r, c) for c in COMPARE_COLUMNS} for r in report.rows],
            "aggregates": [
                {"model": m, "chip": chip, "median_relative_error": v["median"], "max_relative_error": v["max"]}
                for (m, chip), v in report.aggregates.items()
            ],
            "measured_argmin": argmin,
            "nominal_boundary_fraction": report.nominal_boundary_fraction,
        }), out)
    else:
        comments = [material_comment(material), f"band = {band:g}",
                    f"nominal regime boundary l2/l = {report.nominal_boundary_fraction:g}"]
        comments += [f"chip {a['chip']}: measured minimum at device {a['device']} "
                     f"(l2/l = {a['l2_fraction']:.3f})" for a in argmin]
        rows = [[getattr(r, c) for c in COMPARE_COLUMNS] for r in report.rows]
        emit(to_csv(COMPARE_COLUMNS, rows, comments), out)


FIT_COLUMNS = ("alpha", "beta", "residual", "iterations", "physical", "linear_alpha", "linear_beta")


@cli.command("fit")
@handle_errors
@data_options
@material_options
@output_options(["json", "csv"])
def fit_cmd(catalog, measurements, material, fmt, out):
    """Calibrate m_eff = alpha*m1 + beta*m2 against measurements."""
    result = fit_coefficients(catalog, measurements, material)
    lin_alpha, lin_beta = linear_effective_mass_fit(*design_matrix(catalog, measurements, material))
    if not result.physical:
        log("warning: fitted coefficients are negative (non-physical)")
    values = (result.alpha, result.beta, result.residual, result.iterations, result.physical, lin_alpha, lin_beta)
    if fmt == "json":
        payload = {"material": material_dict(material), "n_measurements": len(measurements)}
        payload.update(zip(FIT_COLUMNS, values))
        emit(to_json(payload), out)
    else:
        emit(to_csv(FIT_COLUMNS, [list(values)], [material_comment(material)]), out)


def main(argv=None):
    return cli.main(args=argv, prog_name="tcantilever")


if __name__ == "__main__":
    sys.exit(main())
