"""File formats: covariance CSV input, sample/spectrum output, run manifests."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import struct
import subprocess
from pathlib import Path
from typing import Union

import numpy as np

from improper_sim.covariance import CovarianceSpec
from improper_sim.embedding import EigenSpectrum

PathLike = Union[str, Path]

SPEC_HEADER = ["tau", "re_s", "im_s", "re_r", "im_r"]
BATCH_HEADER = ["rep", "t", "re_z", "im_z"]
SPECTRUM_HEADER = ["k", "lambda_xx", "lambda_yy", "re_lambda_xy", "im_lambda_xy"]

# Binary batch layout: "<QQ" header (replicates, length), then interleaved "<f8" re/im.
_BIN_HEADER = struct.Struct("<QQ")


def read_spec_csv(path: PathLike) -> CovarianceSpec:
    """Covariance spec from ``tau,re_s,im_s,re_r,im_r`` rows, tau = 0..n without gaps."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != SPEC_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SPEC_HEADER)}, got {','.join(header)}")
        rows = [r for r in reader if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no covariance rows")
    data = np.array([[float(c) for c in r] for r in rows])
    if data.shape[1] != 5:
        raise ValueError(f"{path}: every row needs 5 columns")
    if not np.array_equal(data[:, 0], np.arange(len(data))):
        raise ValueError(f"{path}: tau must run 0..n in order without gaps")
    return CovarianceSpec(data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


def write_spec_csv(spec: CovarianceSpec, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPEC_HEADER)
        for tau, (s, r) in enumerate(zip(spec.s_zz, spec.r_zz)):
            w.writerow([tau] + [repr(float(v)) for v in (s.real, s.imag, r.real, r.imag)])


def batch_to_csv(Z: np.ndarray) -> str:
    Z = np.atleast_2d(Z)
    reps, n = Z.shape
    rep, t = np.divmod(np.arange(reps * n), n)
    table = np.column_stack([rep, t, Z.real.ravel(), Z.imag.ravel()])
    buf = io.StringIO()
    np.savetxt(
        buf, table, fmt=["%d", "%d", "%.17g", "%.17g"], delimiter=",",
        header=",".join(BATCH_HEADER), comments="",
    )
    return buf.getvalue()


def write_batch(Z: np.ndarray, path: PathLike, fmt: str = "csv") -> None:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if fmt == "csv":
        Path(path).write_text(batch_to_csv(Z))
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(_BIN_HEADER.pack(*Z.shape))
            fh.write(Z.astype("<c16").tobytes())
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_batch(path: PathLike, fmt: str = "csv") -> np.ndarray:
    if fmt == "binary":
        raw = Path(path).read_bytes()
        reps, n = _BIN_HEADER.unpack_from(raw)
        return np.frombuffer(raw, dtype="<c16", offset=_BIN_HEADER.size).reshape(reps, n).copy()
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    reps, n = int(data[:, 0].max()) + 1, int(data[:, 1].max()) + 1
    return (data[:, 2] + 1j * data[:, 3]).reshape(reps, n)


def spectrum_to_csv(spectrum: EigenSpectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_HEADER)
    for k in range(spectrum.lambda_xx.size):
        lxy = spectrum.lambda_xy[k]
        values = (spectrum.lambda_xx[k], spectrum.lambda_yy[k], lxy.real, lxy.imag)
        w.writerow([k + 1] + [repr(float(v)) for v in values])
    return buf.getvalue()


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_manifest(path: PathLike, payload: dict) -> dict:
    """Write ``payload`` plus build/time provenance as JSON; returns what was written."""
    manifest = dict(payload)
    manifest["build"] = git_describe()
    manifest["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
