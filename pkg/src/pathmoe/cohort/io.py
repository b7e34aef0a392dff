"""Cohort serialization: cohort.csv, studies.bin, reports.json.

studies.bin layout (version 1):

    bytes 0..7    magic b"PMSTUDY1"
    bytes 8..11   uint32 little-endian header length H
    bytes 12..12+H  UTF-8 JSON header: version, n, slices, patches, d_tok,
                    d_latent, organ ordering, and the array manifest
    remainder     the arrays named in the manifest, C-order, concatenated:
                  float64 patch_tokens/occupancy/latents, int64 lesion sites

The header is authoritative; import validates the byte count against it and
raises ParseError with the offending offset on truncation or corruption.
Latent factors ride along in studies.bin so that export/import round-trips
the full generated state, not just the observable files.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .anatomy import ORGANS, SyntheticStudy
from .generator import Cohort, LatentPatient, PatientData, SurvivalRecord
from .reports import ReportSegments

MAGIC = b"PMSTUDY1"

COHORT_CSV = "cohort.csv"
STUDIES_BIN = "studies.bin"
REPORTS_JSON = "reports.json"

_CSV_COLUMNS = ["patient_id", "time_months", "event", "treated", "palbi_class",
                "bilobar", "immunoscore_class", "log_hazard"]


def export_cohort(cohort: Cohort, out_dir) -> dict:
    """Write the three cohort files; returns {name: path}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "cohort": out_dir / COHORT_CSV,
        "studies": out_dir / STUDIES_BIN,
        "reports": out_dir / REPORTS_JSON,
    }

    with open(paths["cohort"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for p in cohort:
            s = p.survival
            writer.writerow([
                p.latent.patient_id,
                repr(s.time_months),
                int(s.event),
                int(s.treated),
                s.palbi_class,
                int(s.bilobar),
                s.immunoscore_class,
                repr(s.log_hazard),
            ])

    n = len(cohort)
    tokens = np.stack([p.study.patch_tokens for p in cohort])
    occupancy = np.stack([p.study.occupancy for p in cohort])
    lesions = np.array([p.study.lesion_site for p in cohort], dtype=np.int64)
    liver = np.stack([p.latent.liver_factor for p in cohort])
    tumor = np.stack([p.latent.tumor_factor for p in cohort])
    neutral = np.stack([p.latent.neutral_context for p in cohort])

    arrays = [
        ("patch_tokens", tokens), ("occupancy", occupancy), ("lesion_site", lesions),
        ("liver_factor", liver), ("tumor_factor", tumor), ("neutral_context", neutral),
    ]
    header = {
        "version": 1,
        "n": n,
        "slices": int(tokens.shape[1]),
        "patches": int(tokens.shape[2]),
        "d_tok": int(tokens.shape[3]),
        "d_latent": int(liver.shape[1]),
        "organs": list(ORGANS),
        "arrays": [
            {"name": name, "shape": list(a.shape), "dtype": str(a.dtype)}
            for name, a in arrays
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(paths["studies"], "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a).tobytes())

    report_entries = [
        {"patient_id": p.latent.patient_id, "liver": list(p.report.s_liver),
         "tumor": list(p.report.s_tumor), "neutral": list(p.report.s_neutral)}
        for p in cohort
    ]
    with open(paths["reports"], "w") as fh:
        json.dump({"version": 1, "patients": report_entries}, fh, sort_keys=True)

    return paths


def _read_studies(path: Path) -> dict:
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:8] != MAGIC:
        raise ParseError(f"{path} is not a studies file (bad magic)", offset=0)
    (header_len,) = struct.unpack("<I", raw[8:12])
    if len(raw) < 12 + header_len:
        raise ParseError(f"{path} truncated inside header", offset=len(raw))
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path} header is not valid JSON: {exc}", offset=12) from exc
    if header.get("version") != 1:
        raise ParseError(f"{path} has unsupported version {header.get('version')}")

    offset = 12 + header_len
    out = {"header": header}
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        nbytes = count * dtype.itemsize
        if len(raw) < offset + nbytes:
            raise ParseError(
                f"{path} truncated in array '{spec['name']}'", offset=len(raw)
            )
        out[spec["name"]] = np.frombuffer(
            raw, dtype=dtype, count=count, offset=offset
        ).reshape(spec["shape"]).copy()
        offset += nbytes
    if offset != len(raw):
        raise ParseError(f"{path} has {len(raw) - offset} trailing bytes", offset=offset)
    return out


def _read_cohort_csv(path: Path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty", line=1) from None
        if head != _CSV_COLUMNS:
            raise ParseError(f"{path} has unexpected columns {head}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(_CSV_COLUMNS):
                raise ParseError(f"{path} row has {len(row)} fields", line=lineno)
            try:
                rows.append({
                    "patient_id": int(row[0]),
                    "time_months": float(row[1]),
                    "event": bool(int(row[2])),
                    "treated": bool(int(row[3])),
                    "palbi_class": int(row[4]),
                    "bilobar": bool(int(row[5])),
                    "immunoscore_class": int(row[6]),
                    "log_hazard": float(row[7]),
                })
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno) from exc
    return rows


def _read_reports(path: Path) -> list:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if doc.get("version") != 1 or "patients" not in doc:
        raise ParseError(f"{path} missing version/patients keys")
    return doc["patients"]


def import_cohort(in_dir) -> Cohort:
    """Load a cohort previously written by export_cohort; lossless inverse."""
    in_dir = Path(in_dir)
    rows = _read_cohort_csv(in_dir / COHORT_CSV)
    studies = _read_studies(in_dir / STUDIES_BIN)
    reports = _read_reports(in_dir / REPORTS_JSON)

    n = studies["header"]["n"]
    if not (len(rows) == n == len(reports)):
        raise ParseError(
            f"file lengths disagree: csv {len(rows)}, studies {n}, reports {len(reports)}"
        )

    cohort: Cohort = []
    for i, (row, rep) in enumerate(zip(rows, reports)):
        if row["patient_id"] != rep["patient_id"]:
            raise ParseError(
                f"patient order mismatch at index {i}: csv {row['patient_id']}, "
                f"reports {rep['patient_id']}"
            )
        latent = LatentPatient(
            patient_id=row["patient_id"],
            liver_factor=studies["liver_factor"][i],
            tumor_factor=studies["tumor_factor"][i],
            neutral_context=studies["neutral_context"][i],
        )
        study = SyntheticStudy(
            patch_tokens=studies["patch_tokens"][i],
            occupancy=studies["occupancy"][i],
            lesion_site=int(studies["lesion_site"][i]),
        )
        report = ReportSegments(
            s_liver=[int(t) for t in rep["liver"]],
            s_tumor=[int(t) for t in rep["tumor"]],
            s_neutral=[int(t) for t in rep["neutral"]],
        ).validate()
        survival = SurvivalRecord(
            time_months=row["time_months"], event=row["event"], treated=row["treated"],
            palbi_class=row["palbi_class"], bilobar=row["bilobar"],
            immunoscore_class=row["immunoscore_class"], log_hazard=row["log_hazard"],
        )
        cohort.append(PatientData(latent, study, report, survival))
    return cohort
