"""Command-line entry point.

Subcommands: rd-curve, verify, task-app, toy, bd. Every run is deterministic
given its flags, seed, and input files; floats are formatted with 12
significant digits and all files are written atomically, so re-runs produce
byte-identical output. Exit codes: 0 success, 1 verification failure, 2
usage or config error, 3 I/O error.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from . import bd_metrics, figures, theorem_suite, toy_lab
from .machine_rd import CodingApproach, MachineRDInstance, machine_rd, reduce
from .probspace import (
    Alphabet,
    DeterministicMap,
    DistortionMatrix,
    FiniteDistribution,
    TaskModel,
)
from .rd_solver import RDSolverConfig
from .task_appropriateness import (
    compute_report,
    depth_sweep,
    load_feature_set,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _fmt(x: float) -> str:
    """Shortest representation with up to 12 significant digits."""
    return format(float(x), ".12g")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)!r}")


def _round_floats(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _write_atomic(path: Path, data: str | bytes) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload) -> None:
    text = json.dumps(_round_floats(payload), indent=2, sort_keys=True,
                      default=_json_default) + "\n"
    _write_atomic(path, text)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"error: cannot create output directory: {exc}", err=True)
        sys.exit(EXIT_IO)
    return out


class SchemaError(ValueError):
    """Instance file violates the schema; the message carries a field path."""


def load_instance(path: str | Path) -> MachineRDInstance:
    """Parse the versioned instance JSON into a MachineRDInstance.

    Layout: {"schema": 1, "alphabets": [sizes per boundary], "source":
    [masses], "stages": [stage tables], "cuts": {name: boundary},
    "distortions": {cut name: square matrix}}.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None

    def fail(field: str, why: str):
        raise SchemaError(f"{path}: field '{field}': {why}")

    if not isinstance(doc, dict):
        fail("$", "document must be an object")
    if doc.get("schema") != 1:
        fail("schema", f"expected 1, got {doc.get('schema')!r}")
    sizes = doc.get("alphabets")
    if not isinstance(sizes, list) or len(sizes) < 2 or \
            not all(isinstance(s, int) and s >= 1 for s in sizes):
        fail("alphabets", "expected a list of at least two positive sizes")
    alphabets = [Alphabet(s) for s in sizes]
    stage_tables = doc.get("stages")
    if not isinstance(stage_tables, list) or len(stage_tables) != len(sizes) - 1:
        fail("stages", f"expected {len(sizes) - 1} stage tables")
    stages = []
    for k, table in enumerate(stage_tables):
        try:
            stages.append(
                DeterministicMap(alphabets[k], alphabets[k + 1], tuple(table))
            )
        except (TypeError, ValueError) as exc:
            fail(f"stages[{k}]", str(exc))
    cuts = doc.get("cuts", {})
    if not isinstance(cuts, dict):
        fail("cuts", "expected an object of {name: boundary}")
    try:
        model = TaskModel(stages=tuple(stages), cuts=dict(cuts))
    except (TypeError, ValueError) as exc:
        fail("cuts", str(exc))
    source_mass = doc.get("source")
    try:
        source = FiniteDistribution(alphabets[0], np.asarray(source_mass, dtype=float))
    except (TypeError, ValueError) as exc:
        fail("source", str(exc))
    dist_doc = doc.get("distortions")
    if not isinstance(dist_doc, dict) or "T" not in dist_doc:
        fail("distortions", "expected an object with at least key 'T'")
    distortions = {}
    for name, values in dist_doc.items():
        try:
            alph = model.alphabet_at(model.cut_position(name))
            distortions[name] = DistortionMatrix(
                alph, alph, np.asarray(values, dtype=float)
            )
        except (KeyError, TypeError, ValueError) as exc:
            fail(f"distortions.{name}", str(exc))
    try:
        return MachineRDInstance(source, model, distortions)
    except ValueError as exc:
        fail("$", str(exc))


def _threads() -> int:
    raw = os.environ.get("RDM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise click.UsageError(f"RDM_THREADS must be an integer, got {raw!r}")


@click.group()
def main() -> None:
    """Rate-distortion laboratory for coding-for-machines experiments."""


@main.command("rd-curve")
@click.option("--instance", "instance_path", required=True,
              type=click.Path(exists=False))
@click.option("--approach", type=click.Choice(["full", "split", "direct"]),
              default="full", show_default=True)
@click.option("--cut", default=None, help="Cut name for split/direct approaches.")
@click.option("--target", default="T", show_default=True)
@click.option("--out", "out_path", required=True)
def rd_curve_cmd(instance_path, approach, cut, target, out_path) -> None:
    """Sweep the rate-distortion curve of a reduced instance."""
    try:
        instance = load_instance(instance_path)
    except SchemaError as exc:
        raise click.UsageError(str(exc))
    try:
        coding = CodingApproach(approach, cut=cut, target=target)
        source, dmat = reduce(instance, coding)
    except (KeyError, ValueError) as exc:
        raise click.UsageError(str(exc))
    out = _out_dir(out_path)
    from .rd_solver import sweep

    curve = sweep(source, dmat, RDSolverConfig(), tag=f"{approach}->{target}",
                  workers=_threads())
    rows = [
        [("inf" if p.slope == float("inf") else float(p.slope)),
         float(p.rate), float(p.distortion)]
        for p in curve.points
    ]
    _write_csv(out / "curve.csv", ["slope", "rate_bits", "distortion"], rows)
    _write_json(out / "meta.json", {
        "instance": str(instance_path),
        "approach": approach,
        "cut": cut,
        "target": target,
        "reduced_source_size": source.alphabet.size,
        "reduced_reproduction_size": dmat.col_alphabet.size,
        "points": len(curve.points),
    })
    figures.render_rd_curve(curve, out / "curve.png")
    click.echo(f"wrote {out / 'curve.csv'} ({len(curve.points)} points)")


@main.command("verify")
@click.option("--theorem", default="all", show_default=True)
@click.option("--seeds", default=20, show_default=True, type=int)
@click.option("--levels", default=5, show_default=True, type=int)
@click.option("--tol", default=theorem_suite.EQUALITY_TOL, show_default=True,
              type=float)
@click.option("--out", "out_path", required=True)
def verify_cmd(theorem, seeds, levels, tol, out_path) -> None:
    """Check the coding-for-machines identities on random instances.

    Note that --tol 0 rejects ordinary floating-point noise and will fail;
    the default tolerance is the intended operating point.
    """
    ids = list(theorem_suite.THEOREMS) if theorem == "all" else [theorem]
    for tid in ids:
        if tid not in theorem_suite.THEOREMS:
            raise click.UsageError(
                f"unknown theorem {tid!r}; valid ids: "
                + ", ".join(theorem_suite.THEOREMS)
            )
    out = _out_dir(out_path)
    specs = theorem_suite.default_specs(seeds)
    all_passed = True
    for tid in ids:
        verdict = theorem_suite.verify(tid, specs, distortion_levels_count=levels,
                                       tolerance=tol)
        _write_json(out / f"{tid}.json", verdict.to_json())
        status = "pass" if verdict.passed else "FAIL"
        click.echo(f"{tid}: {status} (max violation {_fmt(verdict.max_violation)})")
        all_passed = all_passed and verdict.passed
    if not all_passed:
        sys.exit(EXIT_VERIFY_FAIL)


@main.command("task-app")
@click.option("--inputs", multiple=True, required=True)
@click.option("--names", multiple=True)
@click.option("--out", "out_path", required=True)
def task_app_cmd(inputs, names, out_path) -> None:
    """Score labeled feature sets, in the order given."""
    if names and len(names) != len(inputs):
        raise click.UsageError(
            f"got {len(inputs)} inputs but {len(names)} names"
        )
    names = list(names) or [Path(p).stem for p in inputs]
    sets = {}
    for name, path in zip(names, inputs):
        try:
            sets[name] = load_feature_set(path)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    classes = {name: fs.num_classes for name, fs in sets.items()}
    if len(set(classes.values())) > 1:
        raise click.UsageError(
            "class-count mismatch between inputs: "
            + ", ".join(f"{n} has {c}" for n, c in classes.items())
        )
    out = _out_dir(out_path)
    result = depth_sweep(sets)
    rows = []
    for i, (name, score) in enumerate(zip(result.names, result.scores)):
        monotone = "" if i == 0 else str(score >= result.scores[i - 1]).lower()
        rows.append([name, float(score), monotone])
        _write_json(out / f"{name}.json", compute_report(sets[name]).to_json())
    _write_csv(out / "rho.csv", ["name", "rho", "monotone_vs_prev"], rows)
    figures.render_rho_bars(result, out / "rho.png")
    click.echo(
        f"wrote {out / 'rho.csv'} (monotone: {result.monotone_nondecreasing})"
    )


@main.command("toy")
@click.option("--n", default=1_000_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--method", type=click.Choice(["analytic", "lloyd"]),
              default="analytic", show_default=True)
@click.option("--out", "out_path", required=True)
def toy_cmd(n, seed, method, out_path) -> None:
    """Run the two-class synthetic experiment end to end."""
    if n < 4:
        raise click.UsageError("--n must be at least 4")
    out = _out_dir(out_path)
    report = toy_lab.run_experiment(n, seed, fit=(method == "lloyd"))
    ds = toy_lab.sample_dataset(n, seed)
    bins_x = report.input_quantizer.assign(ds.inputs)
    bins_y = report.feature_quantizer.assign(ds.features)
    limit = min(n, 10_000)
    rows = [
        [float(ds.inputs[i, 0]), float(ds.inputs[i, 1]),
         float(ds.features[i, 0]), float(ds.features[i, 1]),
         int(ds.labels[i]), int(bins_x[i]), int(bins_y[i])]
        for i in range(limit)
    ]
    _write_csv(out / "points.csv",
               ["u", "v", "g_u", "g_v", "label", "bin_inputs", "bin_features"],
               rows)
    meta = report.to_json()
    meta["method"] = method
    meta["points_written"] = limit
    _write_json(out / "meta.json", meta)
    toy_lab.export_feature_sets(ds, out)
    figures.render_toy_scatter(ds, report, out / "scatter.png")
    click.echo(
        "error_inputs={} error_features={} rho_inputs={} rho_features={}".format(
            _fmt(report.input_task_error), _fmt(report.feature_task_error),
            _fmt(report.input_report.rho), _fmt(report.feature_report.rho),
        )
    )


@main.command("bd")
@click.option("--anchor", required=True)
@click.option("--test", "test_path", required=True)
@click.option("--mode", type=click.Choice(["rate", "metric"]), default="rate",
              show_default=True)
@click.option("--fit", type=click.Choice(["cubic", "pchip"]), default="cubic",
              show_default=True)
def bd_cmd(anchor, test_path, mode, fit) -> None:
    """Average rate or quality difference between two tabulated curves."""
    try:
        ref = bd_metrics.load_curve(anchor)
        test = bd_metrics.load_curve(test_path)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except bd_metrics.CurveDataError as exc:
        raise click.UsageError(str(exc))
    try:
        result = bd_metrics.bd_rate(ref, test, method=fit)
    except bd_metrics.CurveDataError as exc:
        raise click.UsageError(str(exc))
    payload = {
        "bd_rate_percent": result.bd_rate_percent,
        "bd_metric": result.bd_metric,
        "overlap": list(result.overlap_metric if mode == "rate"
                        else result.overlap_rate),
        "mode": mode,
        "fit": fit,
    }
    click.echo(json.dumps(_round_floats(payload), indent=2, sort_keys=True))


def entry() -> None:  # kept for symmetry with tests that invoke main directly
    main()


if __name__ == "__main__":
    main()
