"""Trial dataset container, manifest schema, and delimited-text ingestion.

A dataset is a CSV file paired with a JSON manifest that declares the arm
column, covariate columns, and response columns (kind and transform per
response). The manifest convention keeps clinical-trial exports
human-auditable; see docs/formats.md for the bit-exact format.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadValue, SchemaMismatch

__all__ = ["ResponseSpec", "TrialDataset", "load_dataset", "save_dataset", "manifest_path_for"]

DATASET_SCHEMA = "ptselect.dataset/1"

RESPONSE_KINDS = ("complete", "right_censored")
TRANSFORMS = ("identity", "log")


@dataclass(frozen=True)
class ResponseSpec:
    """Declared semantics of one response column (or time/event pair)."""

    name: str
    kind: str
    transform: str = "identity"

    def __post_init__(self):
        if self.kind not in RESPONSE_KINDS:
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}")

    @property
    def censored(self) -> bool:
        return self.kind == "right_censored"


@dataclass(frozen=True)
class TrialDataset:
    """Per-subject arms, covariates, and responses of a randomized trial.

    Arm labels are contiguous 1..K. ``complete[name]`` holds a fully
    observed response; ``censored[name]`` holds (observed time, event flag)
    for a right-censored one.
    """

    arms: np.ndarray
    X: np.ndarray
    specs: tuple[ResponseSpec, ...]
    complete: dict[str, np.ndarray]
    censored: dict[str, tuple[np.ndarray, np.ndarray]]
    covariate_names: tuple[str, ...]
    arm_names: tuple[str, ...]
    manifest: dict

    @property
    def n(self) -> int:
        return int(self.arms.size)

    @property
    def r(self) -> int:
        return int(self.X.shape[1])

    @property
    def K(self) -> int:
        return len(self.arm_names)

    @property
    def J(self) -> int:
        return len(self.specs)

    def arm_mask(self, k: int) -> np.ndarray:
        return self.arms == k

    def arm_sizes(self) -> tuple[int, ...]:
        return tuple(int((self.arms == k).sum()) for k in range(1, self.K + 1))


def manifest_path_for(data_path: Path) -> Path:
    return data_path.with_name(data_path.stem + ".manifest.json")


def _parse_float(raw: str, line: int, column: str) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise BadValue(line, column, f"not a number: {raw!r}") from None
    if not np.isfinite(val):
        raise BadValue(line, column, f"not finite: {raw!r}")
    return val


def load_dataset(path, manifest_path=None) -> TrialDataset:
    """Read and validate a CSV dataset against its manifest.

    Raises SchemaMismatch for header/manifest disagreements and BadValue
    (with line and column) for cell-level failures.
    """
    path = Path(path)
    mpath = Path(manifest_path) if manifest_path is not None else manifest_path_for(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if not mpath.exists():
        raise SchemaMismatch(f"manifest not found: {mpath}")
    manifest = json.loads(mpath.read_text())
    if manifest.get("schema") != DATASET_SCHEMA:
        raise SchemaMismatch(
            f"manifest schema {manifest.get('schema')!r} != {DATASET_SCHEMA!r}"
        )

    arm_col = manifest["arm_column"]
    cov_cols = list(manifest["covariates"])
    specs: list[ResponseSpec] = []
    resp_cols: list[tuple[str, str | None, str | None]] = []  # (value, time, event)
    for entry in manifest["responses"]:
        spec = ResponseSpec(
            name=entry["name"], kind=entry["kind"], transform=entry.get("transform", "identity")
        )
        specs.append(spec)
        if spec.censored:
            tcol, ecol = entry.get("time_column"), entry.get("event_column")
            if not tcol or not ecol:
                raise SchemaMismatch(
                    f"censored response {spec.name!r} needs time_column and event_column"
                )
            resp_cols.append((spec.name, tcol, ecol))
        else:
            vcol = entry.get("column")
            if not vcol:
                raise SchemaMismatch(f"complete response {spec.name!r} needs a column")
            resp_cols.append((spec.name, vcol, None))
    if not specs:
        raise SchemaMismatch("manifest declares no responses")

    needed = [arm_col] + cov_cols
    for _, a, b in resp_cols:
        needed.append(a)
        if b:
            needed.append(b)

    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in needed if c not in header]
        if missing:
            raise SchemaMismatch(f"columns missing from {path.name}: {missing}")

        arms: list[int] = []
        X_rows: list[list[float]] = []
        complete: dict[str, list[float]] = {s.name: [] for s in specs if not s.censored}
        cens_t: dict[str, list[float]] = {s.name: [] for s in specs if s.censored}
        cens_e: dict[str, list[int]] = {s.name: [] for s in specs if s.censored}

        for line, row in enumerate(reader, start=2):
            raw_arm = row[arm_col]
            try:
                arm = int(raw_arm)
            except ValueError:
                raise BadValue(line, arm_col, f"arm label must be an integer: {raw_arm!r}") from None
            if arm < 1:
                raise BadValue(line, arm_col, f"arm label must be >= 1: {arm}")
            arms.append(arm)
            X_rows.append([_parse_float(row[c], line, c) for c in cov_cols])
            for spec, (_, col_a, col_b) in zip(specs, resp_cols):
                if spec.censored:
                    t = _parse_float(row[col_a], line, col_a)
                    if t <= 0:
                        raise BadValue(line, col_a, f"observed time must be positive: {t}")
                    raw_e = row[col_b].strip()
                    if raw_e not in ("0", "1"):
                        raise BadValue(line, col_b, f"event flag must be 0 or 1: {raw_e!r}")
                    cens_t[spec.name].append(t)
                    cens_e[spec.name].append(int(raw_e))
                else:
                    v = _parse_float(row[col_a], line, col_a)
                    if spec.transform == "log" and v <= 0:
                        raise BadValue(line, col_a, f"log transform needs positive value: {v}")
                    complete[spec.name].append(v)

    if not arms:
        raise SchemaMismatch(f"{path.name} contains no data rows")
    arms_arr = np.array(arms, dtype=int)
    K = int(arms_arr.max())
    present = sorted(set(arms))
    if present != list(range(1, K + 1)):
        raise SchemaMismatch(f"arm labels must be contiguous 1..K; found {present}")

    arm_names = tuple(manifest.get("arm_names") or [f"arm-{k}" for k in range(1, K + 1)])
    if len(arm_names) != K:
        raise SchemaMismatch(f"manifest names {len(arm_names)} arms, data has {K}")

    return TrialDataset(
        arms=arms_arr,
        X=np.array(X_rows, dtype=float),
        specs=tuple(specs),
        complete={k: np.array(v) for k, v in complete.items()},
        censored={
            name: (np.array(cens_t[name]), np.array(cens_e[name], dtype=bool)) for name in cens_t
        },
        covariate_names=tuple(cov_cols),
        arm_names=arm_names,
        manifest=manifest,
    )


def save_dataset(ds: TrialDataset, path, manifest_path=None) -> None:
    """Write a dataset back to CSV + manifest (bit-exact round trip)."""
    path = Path(path)
    mpath = Path(manifest_path) if manifest_path is not None else manifest_path_for(path)
    arm_col = ds.manifest["arm_column"]
    cols = [arm_col] + list(ds.covariate_names)
    getters = []
    for spec in ds.specs:
        entry = next(e for e in ds.manifest["responses"] if e["name"] == spec.name)
        if spec.censored:
            cols += [entry["time_column"], entry["event_column"]]
            t, e = ds.censored[spec.name]
            getters.append(("censored", t, e))
        else:
            cols.append(entry["column"])
            getters.append(("complete", ds.complete[spec.name], None))

    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for i in range(ds.n):
            row: list[str] = [str(int(ds.arms[i]))]
            row += [repr(float(v)) for v in ds.X[i]]
            for kind, a, b in getters:
                if kind == "censored":
                    row.append(repr(float(a[i])))
                    row.append(str(int(b[i])))
                else:
                    row.append(repr(float(a[i])))
            writer.writerow(row)
    mpath.write_text(json.dumps(ds.manifest, indent=2, sort_keys=True) + "\n")
